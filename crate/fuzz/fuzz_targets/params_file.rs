#![no_main]

use dicke_mirror::ModelParams;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = ModelParams::from_kv_str(text) {
            // anything accepted must survive a write/read cycle unchanged
            let again = ModelParams::from_kv_str(&p.to_kv_string()).expect("re-parse");
            assert_eq!(again.to_kv_string(), p.to_kv_string());
        }
    }
});
