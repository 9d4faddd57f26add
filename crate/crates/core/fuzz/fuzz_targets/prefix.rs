#![no_main]

use libfuzzer_sys::fuzz_target;
use rovtrace::rpki::Prefix;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(p) = s.parse::<Prefix>() {
        let again: Prefix = p.to_string().parse().expect("display re-parses");
        assert_eq!(again, p);
    }
});
