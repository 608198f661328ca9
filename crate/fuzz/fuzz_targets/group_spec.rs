#![no_main]
use libfuzzer_sys::fuzz_target;
use nuclab::group::FiniteAbelianGroup;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(g) = text.parse::<FiniteAbelianGroup>() {
            let back: FiniteAbelianGroup = g.to_string().parse().expect("display output parses");
            assert_eq!(back, g);
        }
    }
});
