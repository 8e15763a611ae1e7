#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = helmdd::harness::parse_config(text) {
            config.validate().expect("parsed configs are valid");
        }
    }
});
