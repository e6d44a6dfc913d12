#![no_main]

use dicke_mirror::io::read_trajectory;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = read_trajectory(data);
});
