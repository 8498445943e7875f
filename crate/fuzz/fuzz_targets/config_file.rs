#![no_main]

use cocktail_core::config::{ConfigFile, KNOWN_KEYS};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ConfigFile::parse(text) {
        // Accepted files only ever carry known keys with non-empty values.
        for key in cfg.keys() {
            assert!(KNOWN_KEYS.contains(&key));
            assert!(!cfg.get(key).unwrap().is_empty());
        }
    }
});
