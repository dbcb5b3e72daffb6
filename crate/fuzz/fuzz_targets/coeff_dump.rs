#![no_main]

use arena_core::chebyshev::parse_coeff_dump;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = parse_coeff_dump(text) {
        let again = parse_coeff_dump(&c.to_dump()).expect("dump parses");
        assert_eq!(again.octant(), c.octant());
        assert_eq!(again.coeffs(), c.coeffs());
    }
});
