#![no_main]

use explicit_weights::cli::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = RunConfig::from_json(s) {
        let again = RunConfig::from_json(&cfg.to_json().to_string()).unwrap();
        assert_eq!(again, cfg);
    }
});
