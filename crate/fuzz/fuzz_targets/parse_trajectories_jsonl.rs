#![no_main]

use libfuzzer_sys::fuzz_target;
use vaf_extract::trajectories::{parse_trajectories, render_trajectories, Format};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(report) = parse_trajectories(text, Format::Jsonl, None) {
            let again = render_trajectories(&report.set, Format::Jsonl).unwrap();
            let back = parse_trajectories(&again, Format::Jsonl, None).unwrap();
            assert_eq!(back.set, report.set);
        }
    }
});
