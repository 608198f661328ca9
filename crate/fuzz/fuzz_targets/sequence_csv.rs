#![no_main]
use libfuzzer_sys::fuzz_target;
use nuclab::io::{read_sequence_csv, write_sequence_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(seq) = read_sequence_csv(text) {
            let back = read_sequence_csv(&write_sequence_csv(&seq)).expect("round trip");
            assert_eq!(back.values(), seq.values());
        }
    }
});
