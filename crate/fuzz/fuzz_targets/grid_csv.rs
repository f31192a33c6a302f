#![no_main]

use fractal_percolation::transfer::GridFunction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = GridFunction::from_csv(text) {
        assert!(g.values().iter().all(|v| v.is_finite()));
        let back = GridFunction::from_csv(&g.to_csv()).expect("re-parse of written CSV");
        assert_eq!(back.intervals(), g.intervals());
    }
});
