#![no_main]

use dynpred::io::{parse_deletion_stream, write_real_events};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ev) = parse_deletion_stream(text) {
        assert_eq!(parse_deletion_stream(&write_real_events(&ev)).unwrap(), ev);
    }
});
