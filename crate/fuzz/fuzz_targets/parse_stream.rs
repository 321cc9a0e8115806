#![no_main]

use dynpred::io::{parse_stream, write_stream};
use dynpred::model::validate_stream;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = parse_stream(text) {
        let _ = validate_stream(&s);
        assert_eq!(parse_stream(&write_stream(&s)).unwrap(), s);
    }
});
