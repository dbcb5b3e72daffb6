#![no_main]

use arena_core::fmm::tables::NearTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = NearTable::from_bytes(data) {
        assert_eq!(t.data.len(), t.rows * t.cols);
        let again = NearTable::from_bytes(&t.to_bytes()).expect("encoded table decodes");
        assert_eq!(again.data.len(), t.data.len());
    }
});
