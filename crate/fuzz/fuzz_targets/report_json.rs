#![no_main]

use archex::report::ExplorationReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = ExplorationReport::from_json(text) {
        let again = ExplorationReport::from_json(&report.to_json()).expect("serialized report reparses");
        assert_eq!(again, report);
    }
});
