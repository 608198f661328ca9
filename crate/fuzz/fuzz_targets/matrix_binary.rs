#![no_main]
use libfuzzer_sys::fuzz_target;
use nuclab::io::{read_matrix_binary, write_matrix_binary};

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = read_matrix_binary(data) {
        let back = read_matrix_binary(&write_matrix_binary(&m)).expect("round trip");
        assert_eq!(back, m);
    }
});
