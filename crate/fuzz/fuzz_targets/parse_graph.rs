#![no_main]

use libfuzzer_sys::fuzz_target;
use owkg_core::kg::io::{parse_entities, parse_graph};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // A NUL byte separates the entity table from the fact table.
    let (entities, facts) = text.split_once('\u{0}').unwrap_or((text, ""));
    let _ = parse_entities(entities);
    let _ = parse_graph(entities, facts);
});
