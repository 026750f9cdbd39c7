#![no_main]

use archex::evaluator::{BenchmarkId, Category};
use archex::external::{check_template, render_command};
use archex::presets::high_performance_space;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(template) = std::str::from_utf8(data) else { return };
    let space = high_performance_space();
    let config = space.all_last();
    let bench = BenchmarkId::new("fft", Category::SignalProcessingCommunication);
    let checked = check_template(template, &space);
    if let Ok(argv) = render_command(template, &config, &bench) {
        assert!(!argv.is_empty());
        assert!(checked.is_ok());
    }
});
