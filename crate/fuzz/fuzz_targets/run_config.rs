#![no_main]

use archex::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::parse(text) {
        // whatever parses must survive its own serialization
        let again = RunConfig::parse(&cfg.to_json()).expect("serialized config reparses");
        assert_eq!(again, cfg);
        assert_eq!(again.hash(), cfg.hash());
    }
});
