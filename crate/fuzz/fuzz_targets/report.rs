#![no_main]

use explicit_weights::cli::{cmd_compare, cmd_psi, cmd_weights, RunConfig};
use libfuzzer_sys::fuzz_target;

// Validated configurations at p = 3, f = 1 must produce a report or a typed
// error, never a panic.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = RunConfig::from_json(s) else {
        return;
    };
    if cfg.p != 3 || cfg.f != 1 {
        return;
    }
    let _ = cmd_weights(&cfg);
    let _ = cmd_psi(&cfg);
    let _ = cmd_compare(&cfg, false);
});
