#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = helmdd::harness::parse_sweep_spec(text) {
            // keep the product small enough to enumerate
            if spec.num_rows() < 10_000 {
                let configs = spec.configs().expect("parsed specs expand");
                assert!(configs.iter().all(|c| c.validate().is_ok()));
            }
        }
    }
});
