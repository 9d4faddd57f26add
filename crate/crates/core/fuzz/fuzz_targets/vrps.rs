#![no_main]

use libfuzzer_sys::fuzz_target;
use rovtrace::rpki::{format_vrps, parse_vrps, validate};
use rovtrace::text::ParseMode;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = parse_vrps(s, ParseMode::Strict);
    if let Ok(vrps) = parse_vrps(s, ParseMode::Lenient) {
        let text = format_vrps(&vrps);
        let again = parse_vrps(&text, ParseMode::Strict).expect("formatted VRPs parse strictly");
        assert_eq!(format_vrps(&again), text);
        if let Some(v) = vrps.first() {
            let _ = validate(&v.prefix(), v.origin(), &vrps);
        }
    }
});
