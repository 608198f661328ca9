#![no_main]
use libfuzzer_sys::fuzz_target;
use nuclab::group::FiniteAbelianGroup;
use nuclab::io::{read_vector_function_csv, write_vector_function_csv};

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let g = FiniteAbelianGroup::new(vec![2 + (n % 15) as usize]).unwrap();
    if let Ok(text) = std::str::from_utf8(rest) {
        if let Ok(f) = read_vector_function_csv(text, &g) {
            let back = read_vector_function_csv(&write_vector_function_csv(&f), &g).expect("round trip");
            assert_eq!(back.values(), f.values());
        }
    }
});
