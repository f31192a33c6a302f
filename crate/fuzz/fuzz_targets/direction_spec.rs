#![no_main]

use fractal_percolation::cli::parse_direction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = parse_direction(text) {
        let beta = d.beta();
        assert!((0.0..=1.0).contains(&beta), "beta {beta}");
    }
});
