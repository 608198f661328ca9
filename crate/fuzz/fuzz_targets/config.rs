#![no_main]
use libfuzzer_sys::fuzz_target;
use nuclab::config::{ConfigOverrides, ExperimentConfig};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(o) = ConfigOverrides::parse(text) {
            if let Ok(cfg) = ExperimentConfig::default().with(&o) {
                assert!(cfg.m_lo <= cfg.m_hi);
                assert!(cfg.group().is_ok());
            }
        }
    }
});
