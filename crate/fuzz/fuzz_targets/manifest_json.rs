#![no_main]
use libfuzzer_sys::fuzz_target;
use nuclab::io::ChainManifest;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = ChainManifest::parse(text) {
            assert!(m.middle_index < m.stages.len());
        }
    }
});
