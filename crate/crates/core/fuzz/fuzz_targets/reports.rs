#![no_main]

use libfuzzer_sys::fuzz_target;
use rovtrace::pipeline::{parse_asn_table, parse_classification_report, parse_ground_truth};
use rovtrace::text::ParseMode;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = parse_ground_truth(s, ParseMode::Lenient);
    let _ = parse_asn_table(s, ParseMode::Strict, "input");
    let _ = parse_classification_report(s);
});
