#![no_main]
use libfuzzer_sys::fuzz_target;
use nuclab::calibration::Calibration;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cal) = Calibration::from_json(text) {
            let _ = Calibration::from_json(&cal.to_json());
        }
    }
});
