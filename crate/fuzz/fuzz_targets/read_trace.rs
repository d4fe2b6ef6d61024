#![no_main]

use cscr_sense::trace::{read_trace, write_trace};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = read_trace(text) {
        // Anything accepted must survive a write/read cycle unchanged.
        let again = read_trace(&write_trace(&t)).expect("re-read of written trace");
        assert_eq!(again.len(), t.len());
    }
});
