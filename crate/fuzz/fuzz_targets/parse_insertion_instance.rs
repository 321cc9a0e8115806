#![no_main]

use dynpred::io::{parse_insertion_instance, write_insertion_instance};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(inst) = parse_insertion_instance(text) {
        assert_eq!(parse_insertion_instance(&write_insertion_instance(&inst)).unwrap(), inst);
    }
});
