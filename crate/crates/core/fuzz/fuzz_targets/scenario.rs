#![no_main]

use libfuzzer_sys::fuzz_target;
use rovtrace::simnet::scenario::TopologySpec;
use rovtrace::simnet::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(scenario) = Scenario::from_json(s) {
        let _ = Scenario::from_json(&scenario.to_json()).expect("serialized scenario re-parses");
        if let TopologySpec::Explicit { nodes, .. } = &scenario.topology {
            if nodes.len() <= 32 {
                let _ = scenario.run();
            }
        }
    }
});
