#![no_main]

use libfuzzer_sys::fuzz_target;
use vaf_extract::extraction::ExtractionConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = ExtractionConfig::from_json(text);
    }
});
