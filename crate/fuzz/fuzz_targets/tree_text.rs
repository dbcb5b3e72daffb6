#![no_main]

use arena_core::octree::parse_tree_text;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(tree) = parse_tree_text(text) {
        let again = parse_tree_text(&tree.to_text()).expect("printed tree parses");
        assert_eq!(again.leaves(), tree.leaves());
    }
});
