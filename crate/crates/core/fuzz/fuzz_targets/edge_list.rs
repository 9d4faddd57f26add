#![no_main]

use libfuzzer_sys::fuzz_target;
use rovtrace::propgraph::{format_edge_list, metrics, parse_edge_list};
use rovtrace::text::ParseMode;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = parse_edge_list(s, ParseMode::Strict);
    if let Ok(g) = parse_edge_list(s, ParseMode::Lenient) {
        let text = format_edge_list(&g);
        let again = parse_edge_list(&text, ParseMode::Strict).expect("formatted edge list parses strictly");
        assert_eq!(format_edge_list(&again), text);
        if g.vertex_count() <= 64 {
            let _ = metrics(&g);
        }
    }
});
