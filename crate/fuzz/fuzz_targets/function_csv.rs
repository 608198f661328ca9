#![no_main]
use libfuzzer_sys::fuzz_target;
use nuclab::group::FiniteAbelianGroup;
use nuclab::io::read_complex_csv;

// first byte picks the group order, the rest is the file
fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let g = FiniteAbelianGroup::new(vec![2 + (n % 31) as usize]).unwrap();
    if let Ok(text) = std::str::from_utf8(rest) {
        if let Ok(v) = read_complex_csv(text, &g) {
            assert_eq!(v.len(), g.order());
        }
    }
});
