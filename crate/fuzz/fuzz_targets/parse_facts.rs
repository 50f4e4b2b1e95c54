#![no_main]

use libfuzzer_sys::fuzz_target;
use owkg_core::kg::io::{format_facts, parse_facts};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(facts) = parse_facts(text) {
        // Whatever parses must survive a format/parse round trip.
        let again = parse_facts(&format_facts(&facts)).expect("formatted facts parse");
        let mut sorted = facts.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(again, sorted);
    }
});
