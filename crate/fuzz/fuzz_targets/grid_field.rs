#![no_main]

use arena_core::spectral::GridField;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(g) = GridField::from_bytes(data) {
        let n = g.n();
        assert_eq!(g.data().len(), n * n * n);
        let again = GridField::from_bytes(&g.to_bytes()).expect("encoded field decodes");
        assert_eq!(again.to_bytes(), g.to_bytes());
    }
});
