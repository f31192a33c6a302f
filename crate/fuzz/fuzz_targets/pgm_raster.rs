#![no_main]

use fractal_percolation::cli::pgm::{parse_pgm, to_pgm};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = parse_pgm(text) {
        assert_eq!(parse_pgm(&to_pgm(&grid)).expect("re-parse of written PGM"), grid);
    }
});
