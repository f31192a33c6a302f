#![no_main]

use fractal_percolation::cli::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config(text) {
        // a validated config must survive its own serialisation
        let again = serde_json::to_string(&cfg.raw).expect("serialisable");
        let back = parse_config(&again).expect("re-parse of a valid config");
        assert_eq!(back.params, cfg.params);
    }
});
