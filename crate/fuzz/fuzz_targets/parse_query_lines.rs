#![no_main]

use libfuzzer_sys::fuzz_target;
use owkg_core::split::{format_query_lines, parse_query_lines};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(qs) = parse_query_lines(text) {
        let out = format_query_lines(&qs).expect("format parsed queries");
        assert_eq!(parse_query_lines(&out).expect("reparse"), qs);
    }
});
