#![no_main]

use cscr_sense::gass::GassSolution;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = GassSolution::from_json(text);
});
