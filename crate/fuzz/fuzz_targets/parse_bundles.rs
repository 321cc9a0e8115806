#![no_main]

use dynpred::io::{parse_bundles, write_bundles};
use dynpred::model::validate_bundle_sequence;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(b) = parse_bundles(text) {
        let _ = validate_bundle_sequence(&b);
        assert_eq!(parse_bundles(&write_bundles(&b)).unwrap(), b);
    }
});
