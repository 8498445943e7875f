#![no_main]

use cocktail_core::config::parse_points;
use cocktail_core::mi::Constellation;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(points) = parse_points(text) {
        assert!(!points.is_empty());
        assert!(points.iter().all(|p| p.is_finite()));
        // Energy may still overflow; that must surface as an error, not a panic.
        let _ = Constellation::equiprobable(points);
    }
});
