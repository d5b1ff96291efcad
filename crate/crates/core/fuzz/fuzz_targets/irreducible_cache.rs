#![no_main]

use ffdivisor::factor::{format_cache, parse_cache};
use ffdivisor::gf::Field;
use ffdivisor::poly::PolyRing;
use libfuzzer_sys::fuzz_target;

const ORDERS: [u64; 4] = [2, 3, 4, 5];

fuzz_target!(|data: &[u8]| {
    let [sel, deg, rest @ ..] = data else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let ring = PolyRing::new(Field::with_order(ORDERS[*sel as usize % ORDERS.len()]).unwrap());
    let n = *deg as usize % 6 + 1;
    if let Ok(primes) = parse_cache(&ring, n, text) {
        assert_eq!(parse_cache(&ring, n, &format_cache(&ring, n, &primes)).unwrap(), primes);
    }
});
