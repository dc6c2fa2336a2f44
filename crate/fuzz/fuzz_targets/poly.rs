#![no_main]

use std::sync::OnceLock;

use explicit_weights::cli::parse_weight;
use explicit_weights::ffield::Tower;
use libfuzzer_sys::fuzz_target;

fn tower() -> &'static Tower {
    static T: OnceLock<Tower> = OnceLock::new();
    T.get_or_init(|| Tower::new(3, 2, 1).unwrap())
}

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let e = &tower().e;
    if let Some(x) = e.from_coeff_string(s) {
        assert_eq!(e.from_coeff_string(&e.to_coeff_string(&x)), Some(x));
    }
    let _ = parse_weight(s, 2);
});
