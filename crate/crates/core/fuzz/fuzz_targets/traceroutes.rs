#![no_main]

use libfuzzer_sys::fuzz_target;
use rovtrace::ingest::parse_traceroutes;
use rovtrace::text::ParseMode;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = parse_traceroutes(s, ParseMode::Strict);
    let _ = parse_traceroutes(s, ParseMode::Lenient);
});
