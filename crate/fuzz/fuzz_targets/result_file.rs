#![no_main]

use archex::external::parse_result_file;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(raw) = parse_result_file(text) {
        assert!(raw.power_watts.is_finite() && raw.power_watts > 0.0);
        assert!(raw.exec_time_ms.is_finite() && raw.exec_time_ms > 0.0);
    }
});
