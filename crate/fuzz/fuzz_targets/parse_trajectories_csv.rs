#![no_main]

use libfuzzer_sys::fuzz_target;
use vaf_extract::trajectories::{parse_trajectories, Format};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_trajectories(text, Format::Csv, None);
    }
});
