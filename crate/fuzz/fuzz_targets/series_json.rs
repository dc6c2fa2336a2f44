#![no_main]

use std::sync::OnceLock;

use explicit_weights::ffield::Tower;
use explicit_weights::series::TensorRing;
use libfuzzer_sys::fuzz_target;

fn tower() -> &'static Tower {
    static T: OnceLock<Tower> = OnceLock::new();
    T.get_or_init(|| Tower::new(3, 2, 1).unwrap())
}

fuzz_target!(|data: &[u8]| {
    let Ok(v) = serde_json::from_slice::<serde_json::Value>(data) else {
        return;
    };
    let r = TensorRing::new(tower());
    if let Ok(x) = r.from_json(&v) {
        assert_eq!(r.from_json(&r.to_json(&x)).unwrap(), x);
    }
});
