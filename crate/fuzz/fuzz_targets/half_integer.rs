#![no_main]

use dicke_mirror::model::{format_half_integer, parse_half_integer};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(two_j) = parse_half_integer(text) {
            assert_eq!(parse_half_integer(&format_half_integer(two_j)).expect("re-parse"), two_j);
        }
    }
});
