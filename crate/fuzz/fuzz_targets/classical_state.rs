#![no_main]

use dicke_mirror::semiclassical::ClassicalState;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(s) = text.parse::<ClassicalState>() {
            assert_eq!(s.to_string().parse::<ClassicalState>().expect("re-parse"), s);
        }
    }
});
