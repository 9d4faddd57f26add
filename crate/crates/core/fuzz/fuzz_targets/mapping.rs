#![no_main]

use std::net::Ipv4Addr;

use libfuzzer_sys::fuzz_target;
use rovtrace::ingest::{parse_ip2as, parse_ixp_lans, parse_target_equivalence, IpMappingDb};
use rovtrace::text::ParseMode;

// One input feeds all three mapping tables; the first bytes of each line
// are also used as lookup addresses.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let ases = parse_ip2as(s, ParseMode::Lenient).unwrap_or_default();
    let lans = parse_ixp_lans(s, ParseMode::Lenient).unwrap_or_default();
    let targets = parse_target_equivalence(s, ParseMode::Lenient).unwrap_or_default();
    let db = IpMappingDb::from_tables(ases, lans, targets);
    for chunk in data.chunks(4) {
        if let Ok(b) = <[u8; 4]>::try_from(chunk) {
            let _ = db.lookup(Ipv4Addr::from(b));
        }
    }
});
