#![no_main]

use arena_core::problems::TestCase;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(tc) = data.parse::<TestCase>() {
        let back: TestCase = tc.to_string().parse().expect("printed case parses");
        assert_eq!(back.to_string(), tc.to_string());
    }
});
