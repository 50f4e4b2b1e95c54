#![no_main]

use libfuzzer_sys::fuzz_target;
use owkg_core::metrics::RankingFunction;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rf) = text.parse::<RankingFunction>() {
        assert_eq!(rf.to_string().parse::<RankingFunction>().unwrap(), rf);
    }
});
