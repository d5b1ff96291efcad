#![no_main]

use ffdivisor::gf::Field;
use ffdivisor::poly::PolyRing;
use libfuzzer_sys::fuzz_target;

const ORDERS: [u64; 6] = [2, 3, 4, 5, 9, 251];

fuzz_target!(|data: &[u8]| {
    let Some((&sel, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let ring = PolyRing::new(Field::with_order(ORDERS[sel as usize % ORDERS.len()]).unwrap());
    if let Ok(f) = ring.parse(text) {
        // Display drops trailing zeros, so the round trip goes through the value.
        assert_eq!(ring.parse(&f.to_string()).unwrap(), f);
    }
});
