#![no_main]

use libfuzzer_sys::fuzz_target;
use zzbound_core::AwgnChannel;

fuzz_target!(|data: &[u8]| {
    if let Ok(ch) = serde_json::from_slice::<AwgnChannel>(data) {
        assert!(ch.eta() > 0.0 && ch.eta().is_finite());
        let again = serde_json::to_string(&ch).unwrap();
        assert_eq!(serde_json::from_str::<AwgnChannel>(&again).unwrap(), ch);
    }
});
