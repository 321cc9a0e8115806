#![no_main]

use dynpred::io::{parse_predictions, write_predictions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_predictions(text) {
        assert_eq!(parse_predictions(&write_predictions(&p)).unwrap(), p);
    }
});
