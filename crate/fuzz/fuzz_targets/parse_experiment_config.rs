#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    match zzbound::parse(text) {
        Ok(exp) => {
            assert!(!exp.points.is_empty());
            for (_, cfg) in &exp.points {
                assert!(cfg.validate().is_ok());
            }
        }
        Err(e) => assert!(matches!(e.exit_code(), 1..=3)),
    }
});
