#![no_main]

use libfuzzer_sys::fuzz_target;
use owkg_core::grid::parse_grid;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_grid(text) {
        assert!(!g.is_empty());
        assert!(g.iter().all(|x| x.is_finite()));
    }
});
