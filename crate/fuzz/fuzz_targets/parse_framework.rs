#![no_main]

use libfuzzer_sys::fuzz_target;
use vaf_extract::argumentation::ArgumentationFramework;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(af) = ArgumentationFramework::from_json(text) {
            let grounded = af.grounded_extension();
            assert!(af.is_conflict_free(&grounded).unwrap());
        }
    }
});
