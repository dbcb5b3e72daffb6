#![no_main]

use arena_harness::{parse_config, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(pairs) = parse_config(text) else { return };
    if let Ok(cfg) = RunConfig::from_pairs(&pairs) {
        let _ = cfg.resolved().validate();
        let printed = cfg.to_config_text();
        let again = RunConfig::from_pairs(&parse_config(&printed).expect("printed config parses")).expect("printed config loads");
        assert_eq!(again.to_config_text(), printed);
    }
});
