use ffdivisor::{factor, gf::Field, poly::PolyRing};
fn main() {
    for (q, n) in [(9u64, 6usize), (8, 6), (27, 3), (2, 16)] {
        let r = PolyRing::new(Field::with_order(q).unwrap());
        let t = std::time::Instant::now();
        let mut s = 0u64;
        for f in r.monic_iter(n) { s += factor::factorize(&r, &f).unwrap().num_factors() as u64; }
        println!("q={q} n={n} {} polys {:?} ({s})", r.monic_count(n), t.elapsed());
    }
}
