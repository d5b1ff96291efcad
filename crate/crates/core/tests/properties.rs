use ffdivisor::combinatorics::Partition;
use ffdivisor::conjecture::ramanujan_sum;
use ffdivisor::factor::{factorize, format_cache, is_irreducible, mobius, parse_cache, primes_of_degree};
use ffdivisor::gf::{Field, FieldElem};
use ffdivisor::harness::rows::{parse_rational, rational_text};
use ffdivisor::poly::{Poly, PolyPattern, PolyRing};
use ffdivisor::stats::divisor_k;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

const ORDERS: [u64; 8] = [2, 3, 4, 5, 7, 8, 9, 25];

fn ring(sel: usize) -> PolyRing {
    PolyRing::new(Field::with_order(ORDERS[sel % ORDERS.len()]).unwrap())
}

fn poly(ring: &PolyRing, raw: &[u64]) -> Poly {
    let q = ring.q() as u64;
    Poly::new(raw.iter().map(|&c| ring.field().elem(c % q).unwrap()).collect())
}

fn monic(ring: &PolyRing, deg: usize, raw: u64) -> Poly {
    ring.monic_from_index(deg, raw % ring.monic_count(deg)).unwrap()
}

/// Monic divisors of `f` found by trying every monic of degree at most `deg f`.
fn monic_divisors(ring: &PolyRing, f: &Poly) -> Vec<Poly> {
    let n = f.degree().unwrap();
    (0..=n)
        .flat_map(|d| ring.monic_iter(d))
        .filter(|d| ring.divides(d, f))
        .collect()
}

fn coeffs() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(any::<u64>(), 0..7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn field_axioms(sel in 0usize..8, a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let field = Field::with_order(ORDERS[sel]).unwrap();
        let q = field.q() as u64;
        let (a, b, c) = (field.elem(a % q).unwrap(), field.elem(b % q).unwrap(), field.elem(c % q).unwrap());
        prop_assert_eq!(field.add(a, field.add(b, c)), field.add(field.add(a, b), c));
        prop_assert_eq!(field.mul(a, field.mul(b, c)), field.mul(field.mul(a, b), c));
        prop_assert_eq!(field.mul(a, field.add(b, c)), field.add(field.mul(a, b), field.mul(a, c)));
        prop_assert_eq!(field.add(field.sub(a, b), b), a);
        if a != FieldElem::ZERO {
            prop_assert_eq!(field.mul(a, field.inv(a).unwrap()), FieldElem::ONE);
        }
    }

    #[test]
    fn ring_axioms_and_division(sel in 0usize..8, a in coeffs(), b in coeffs(), c in coeffs()) {
        let ring = ring(sel);
        let (a, b, c) = (poly(&ring, &a), poly(&ring, &b), poly(&ring, &c));
        prop_assert_eq!(ring.mul(&ring.add(&a, &b), &c), ring.add(&ring.mul(&a, &c), &ring.mul(&b, &c)));
        prop_assert_eq!(ring.mul(&a, &ring.mul(&b, &c)), ring.mul(&ring.mul(&a, &b), &c));
        prop_assert!(ring.add(&a, &ring.neg(&a)).is_zero());
        if !b.is_zero() {
            let (quo, rem) = ring.divrem(&a, &b).unwrap();
            prop_assert_eq!(ring.add(&ring.mul(&quo, &b), &rem), a.clone());
            prop_assert!(rem.degree() < b.degree());
        }
    }

    #[test]
    fn monic_index_round_trip(sel in 0usize..8, deg in 0usize..6, raw in any::<u64>()) {
        let ring = ring(sel);
        let f = monic(&ring, deg, raw);
        prop_assert!(f.is_monic());
        prop_assert_eq!(f.degree(), Some(deg));
        prop_assert_eq!(ring.monic_index(&f).unwrap(), raw % ring.monic_count(deg));
    }

    #[test]
    fn factorization_reconstructs(sel in 0usize..8, deg in 1usize..10, raw in any::<u64>()) {
        let ring = ring(sel);
        let f = monic(&ring, deg, raw);
        let fac = factorize(&ring, &f).unwrap();
        prop_assert_eq!(fac.reconstruct(&ring), f);
        prop_assert_eq!(fac.degree(), deg);
        for (p, e) in fac.factors() {
            prop_assert!(*e >= 1);
            prop_assert!(p.is_monic());
            prop_assert!(is_irreducible(&ring, p).unwrap());
        }
    }

    #[test]
    fn divisor_function_counts_divisors(sel in 0usize..4, deg in 1usize..5, raw in any::<u64>()) {
        let ring = ring(sel);
        let f = monic(&ring, deg, raw);
        let divisors = monic_divisors(&ring, &f);
        prop_assert_eq!(divisor_k(&ring, &f, 1).unwrap(), 1);
        prop_assert_eq!(divisor_k(&ring, &f, 2).unwrap(), divisors.len() as u128);
        // d_3(f) = sum of d_2(f / d) over monic d | f.
        let d3: u128 = divisors
            .iter()
            .map(|d| divisor_k(&ring, &ring.div_exact(&f, d), 2).unwrap())
            .sum();
        prop_assert_eq!(divisor_k(&ring, &f, 3).unwrap(), d3);
    }

    #[test]
    fn divisor_function_is_multiplicative(
        sel in 0usize..8, da in 1usize..5, db in 1usize..5, ra in any::<u64>(), rb in any::<u64>(), k in 1u32..6,
    ) {
        let ring = ring(sel);
        let (a, b) = (monic(&ring, da, ra), monic(&ring, db, rb));
        if ring.coprime(&a, &b) {
            let ab = ring.mul(&a, &b);
            prop_assert_eq!(
                divisor_k(&ring, &ab, k).unwrap(),
                divisor_k(&ring, &a, k).unwrap() * divisor_k(&ring, &b, k).unwrap()
            );
        }
    }

    #[test]
    fn ramanujan_sum_matches_divisor_form(
        sel in 0usize..4, dm in 0usize..4, dh in 0usize..4, rm in any::<u64>(), rh in any::<u64>(),
    ) {
        let ring = ring(sel);
        let (m, h) = (monic(&ring, dm, rm), monic(&ring, dh, rh));
        let g = ring.gcd(&m, &h).unwrap();
        let expected: i128 = monic_divisors(&ring, &g)
            .iter()
            .map(|d| ring.norm(d) as i128 * mobius(&ring, &ring.div_exact(&m, d)).unwrap() as i128)
            .sum();
        prop_assert_eq!(ramanujan_sum(&ring, &m, &h).unwrap(), expected);
        let c = ring.field().elem(ring.q() as u64 - 1).unwrap();
        prop_assert_eq!(ramanujan_sum(&ring, &m, &ring.scale(&h, c)).unwrap(), expected);
    }

    #[test]
    fn ramanujan_sum_is_multiplicative(
        sel in 0usize..8, da in 1usize..4, db in 1usize..4, dh in 0usize..5,
        ra in any::<u64>(), rb in any::<u64>(), rh in any::<u64>(),
    ) {
        let ring = ring(sel);
        let (a, b, h) = (monic(&ring, da, ra), monic(&ring, db, rb), monic(&ring, dh, rh));
        if ring.coprime(&a, &b) {
            prop_assert_eq!(
                ramanujan_sum(&ring, &ring.mul(&a, &b), &h).unwrap(),
                ramanujan_sum(&ring, &a, &h).unwrap() * ramanujan_sum(&ring, &b, &h).unwrap()
            );
        }
    }

    #[test]
    fn poly_text_round_trip(sel in 0usize..8, a in coeffs()) {
        let ring = ring(sel);
        let f = poly(&ring, &a);
        prop_assert_eq!(ring.parse(&f.to_string()).unwrap(), f.clone());
        let pattern: PolyPattern = f.to_string().parse().unwrap();
        prop_assert_eq!(pattern.to_string().parse::<PolyPattern>().unwrap(), pattern.clone());
        prop_assert_eq!(pattern.instantiate(&ring).unwrap(), f);
    }

    #[test]
    fn poly_parse_never_panics(sel in 0usize..8, text in "[0-9, ]{0,12}") {
        let _ = ring(sel).parse(&text);
    }

    #[test]
    fn partition_text_round_trip(parts in prop::collection::vec(1usize..9, 1..7)) {
        let p = Partition::from_parts(&parts).unwrap();
        prop_assert_eq!(p.to_string().parse::<Partition>().unwrap(), p.clone());
        prop_assert_eq!(p.parts().iter().sum::<usize>(), parts.iter().sum::<usize>());
    }

    #[test]
    fn rational_text_round_trip(n in any::<i64>(), d in 1i64..i64::MAX) {
        let r = BigRational::new(BigInt::from(n), BigInt::from(d));
        prop_assert_eq!(parse_rational(&rational_text(&r)), Some(r));
    }

    #[test]
    fn manifest_parse_never_panics(text in "[a-z=,;|.0-9 +#\n^]{0,80}") {
        let _ = ffdivisor::harness::Manifest::parse(&text);
    }
}

#[test]
fn irreducible_cache_round_trip() {
    for q in [2u64, 3, 4, 5] {
        let ring = PolyRing::new(Field::with_order(q).unwrap());
        for n in 1..=4 {
            let primes = primes_of_degree(&ring, n);
            let text = format_cache(&ring, n, &primes);
            assert_eq!(parse_cache(&ring, n, &text).unwrap(), *primes);
            assert!(parse_cache(&ring, n + 1, &text).is_err());
        }
    }
}
