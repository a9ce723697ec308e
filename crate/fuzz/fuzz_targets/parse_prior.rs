#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = zzbound_core::schema::parse_prior(text) {
        // Anything accepted must be a proper distribution that round-trips.
        let (lo, hi) = p.support();
        assert!(lo <= hi);
        let (_, var) = p.mean_variance();
        assert!(var >= 0.0 || var.is_nan());
        let again = serde_json::to_string(&p).unwrap();
        let back = zzbound_core::schema::parse_prior(&again).unwrap();
        assert_eq!(back.support(), p.support());
    }
});
