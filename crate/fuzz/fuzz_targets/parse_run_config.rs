#![no_main]

use libfuzzer_sys::fuzz_target;
use vaf_extract::environments::EnvConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = EnvConfig::from_json(text);
    }
});
