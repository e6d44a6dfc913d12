#![no_main]

use dicke_mirror::io::{read_timeseries, write_timeseries};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ts) = read_timeseries(data) {
        let mut buf = Vec::new();
        write_timeseries(&mut buf, &ts).expect("write");
        let back = read_timeseries(&buf[..]).expect("re-read");
        assert_eq!(back.times, ts.times);
        assert_eq!(back.values, ts.values);
    }
});
