#![no_main]

use libfuzzer_sys::fuzz_target;
use vaf_extract::agents::AgentModelFile;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = AgentModelFile::from_json(text);
    }
});
