#![no_main]

use libfuzzer_sys::fuzz_target;
use vaf_extract::agents::ArgumentCatalog;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(catalog) = ArgumentCatalog::from_json(text) {
            let back = ArgumentCatalog::from_json(&catalog.to_json()).unwrap();
            assert_eq!(back, catalog);
        }
    }
});
