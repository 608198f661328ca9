#![no_main]
use libfuzzer_sys::fuzz_target;
use nuclab::io::{read_matrix_csv, write_matrix_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = read_matrix_csv(text) {
            assert_eq!(read_matrix_csv(&write_matrix_csv(&m)).expect("round trip"), m);
        }
    }
});
