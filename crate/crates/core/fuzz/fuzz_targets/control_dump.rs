#![no_main]

use libfuzzer_sys::fuzz_target;
use rovtrace::ingest::{format_control_dump, parse_control_dump};
use rovtrace::text::ParseMode;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = parse_control_dump(s, ParseMode::Strict);
    if let Ok(records) = parse_control_dump(s, ParseMode::Lenient) {
        let text = format_control_dump(&records);
        let again = parse_control_dump(&text, ParseMode::Strict).expect("formatted dump parses strictly");
        assert_eq!(format_control_dump(&again), text);
    }
});
