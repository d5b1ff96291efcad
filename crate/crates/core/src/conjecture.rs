//! The singular-series constant `A_{k,q}(h)` of the shifted-divisor conjecture
//! for fixed `q`, built from Ramanujan sums `c_{m,q}(h)` and the zero-product
//! counts `g_j(f)`, and its comparison with exhaustive shifted sums.
//!
//! Every series term is multiplicative in `m`, so the truncated series is the
//! degree-`≤ D` part of an Euler product whose local factors at primes not
//! dividing `h` depend only on the degree. The tail beyond `D` is bounded by
//! Rankin's trick with an exact rational bound.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinatorics::rational_to_f64;
use crate::enumerate::{checked_add, checked_mul, EnumOpts};
use crate::error::{invalid, Error, Result};
use crate::factor;
use crate::gf::Field;
use crate::poly::{Poly, PolyPattern, PolyRing};
use crate::stats;

/// Largest `|f|^j` counted by direct enumeration in [`g_count`].
pub const G_BRUTE_LIMIT: u128 = 1_000_000;

/// Default truncation degree of the series.
pub const DEFAULT_DEGREE: usize = 8;

/// The `ε` in the `C / q^{1 - ε}` envelope of [`akq_limit_check`].
pub const ENVELOPE_EPSILON: f64 = 0.1;

fn p_adic_valuation(ring: &PolyRing, p: &Poly, h: &Poly) -> Result<u32> {
    let mut v = 0;
    let mut rest = h.clone();
    loop {
        let (quo, r) = ring.divrem(&rest, p)?;
        if !r.is_zero() {
            return Ok(v);
        }
        rest = quo;
        v += 1;
    }
}

fn pow_u128(base: u128, e: u32) -> Result<u128> {
    base.checked_pow(e).ok_or(Error::Overflow)
}

/// `c_{P^a}(h)` where `P^e ∥ h` and `|P| = norm`.
fn ramanujan_local(norm: u128, a: u32, e: u32) -> Result<i128> {
    let v = if a == 0 {
        1
    } else if a <= e {
        (pow_u128(norm, a)? - pow_u128(norm, a - 1)?) as i128
    } else if a == e + 1 {
        -(pow_u128(norm, e)? as i128)
    } else {
        0
    };
    Ok(v)
}

/// `c_{m,q}(h) = Σ_{d | gcd(m, h)} |d| μ(m/d)`, evaluated multiplicatively.
pub fn ramanujan_sum(ring: &PolyRing, m: &Poly, h: &Poly) -> Result<i128> {
    if !m.is_monic() {
        return invalid("m must be monic");
    }
    if h.is_zero() {
        return invalid("h must be nonzero");
    }
    if m.is_one() {
        return Ok(1);
    }
    let mut c = 1i128;
    for (p, a) in factor::factorize(ring, m)?.factors() {
        let e = p_adic_valuation(ring, p, h)?;
        let local = ramanujan_local(ring.norm(p), *a, e)?;
        c = c.checked_mul(local).ok_or(Error::Overflow)?;
        if c == 0 {
            break;
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GMethod {
    Brute,
    Crt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GCount {
    pub value: u128,
    pub method: GMethod,
}

/// Tuples `(a_1, ..., a_j)` mod `P^a` with `P^a | a_1 ⋯ a_j`, for `|P| = norm`.
pub fn g_local(norm: u128, a: u32, j: u32) -> Result<u128> {
    let a = a as usize;
    // Residues mod P^a by P-adic valuation, the last bucket holding zero.
    let mut by_val = vec![0u128; a + 1];
    for (v, slot) in by_val.iter_mut().enumerate().take(a) {
        *slot = pow_u128(norm, (a - v) as u32)? - pow_u128(norm, (a - v - 1) as u32)?;
    }
    by_val[a] = 1;
    let mut dp = vec![0u128; a + 1];
    dp[0] = 1;
    for _ in 0..j {
        let mut next = vec![0u128; a + 1];
        for (s, &ways) in dp.iter().enumerate() {
            if ways == 0 {
                continue;
            }
            for (v, &cnt) in by_val.iter().enumerate() {
                let slot = &mut next[(s + v).min(a)];
                *slot = checked_add(*slot, checked_mul(ways, cnt)?)?;
            }
        }
        dp = next;
    }
    Ok(dp[a])
}

/// `g_j(P) = |P|^j - (|P| - 1)^j` for an irreducible of norm `norm`.
pub fn g_prime(norm: &BigInt, j: u32) -> BigInt {
    norm.pow(j) - (norm - 1u32).pow(j)
}

fn check_g(f: &Poly, j: u32) -> Result<()> {
    if !f.is_monic() {
        return invalid("g_count needs a monic modulus");
    }
    if j == 0 {
        return invalid("g_count needs j >= 1");
    }
    Ok(())
}

fn count_zero_products(ring: &PolyRing, f: &Poly, residues: &[Poly], prod: &Poly, left: u32) -> Result<u128> {
    if prod.is_zero() {
        return pow_u128(residues.len() as u128, left);
    }
    if left == 0 {
        return Ok(0);
    }
    residues.iter().try_fold(0u128, |acc, r| {
        let next = ring.rem(&ring.mul(prod, r), f)?;
        checked_add(acc, count_zero_products(ring, f, residues, &next, left - 1)?)
    })
}

/// `#{(a_1, ..., a_j) mod f : a_1 ⋯ a_j ≡ 0 mod f}` by enumeration.
pub fn g_count_brute(ring: &PolyRing, f: &Poly, j: u32) -> Result<u128> {
    check_g(f, j)?;
    let d = f.degree().unwrap_or(0);
    let residues: Vec<Poly> = ring.residues(d).collect();
    count_zero_products(ring, f, &residues, &Poly::one(), j)
}

/// The same count as a product of prime-power local counts.
pub fn g_count_crt(ring: &PolyRing, f: &Poly, j: u32) -> Result<u128> {
    check_g(f, j)?;
    if f.is_one() {
        return Ok(1);
    }
    factor::factorize(ring, f)?
        .factors()
        .iter()
        .try_fold(1u128, |acc, (p, a)| checked_mul(acc, g_local(ring.norm(p), *a, j)?))
}

/// Enumerates when `|f|^j <= G_BRUTE_LIMIT`, otherwise multiplies local counts.
pub fn g_count(ring: &PolyRing, f: &Poly, j: u32) -> Result<GCount> {
    check_g(f, j)?;
    let cost = ring.norm(f).checked_pow(j).unwrap_or(u128::MAX);
    if cost <= G_BRUTE_LIMIT {
        Ok(GCount {
            value: g_count_brute(ring, f, j)?,
            method: GMethod::Brute,
        })
    } else {
        Ok(GCount {
            value: g_count_crt(ring, f, j)?,
            method: GMethod::Crt,
        })
    }
}

fn require_k(k: u32) -> Result<()> {
    if k < 2 {
        invalid("the singular series needs k >= 2")
    } else {
        Ok(())
    }
}

fn require_h(h: &Poly) -> Result<()> {
    if h.is_zero() {
        invalid("h must be nonzero")
    } else {
        Ok(())
    }
}

/// One term `c_{m,q}(h) |gcd(m, h)|^{2(k-1)} g_{k-1}(m/gcd)^2 / |m|^{2(k-1)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTerm {
    pub m: Poly,
    pub c: i128,
    pub gval: u128,
    pub contribution: BigRational,
}

pub fn series_term(ring: &PolyRing, k: u32, h: &Poly, m: &Poly) -> Result<SeriesTerm> {
    require_k(k)?;
    require_h(h)?;
    let c = ramanujan_sum(ring, m, h)?;
    let g = ring.gcd(m, h)?;
    let cofactor = ring.div_exact(m, &g);
    let gval = g_count(ring, &cofactor, k - 1)?.value;
    let e = 2 * (k - 1);
    let num = BigInt::from(c) * BigInt::from(ring.norm(&g)).pow(e) * BigInt::from(gval).pow(2);
    let den = BigInt::from(ring.norm(m)).pow(e);
    Ok(SeriesTerm {
        m: m.clone(),
        c,
        gval,
        contribution: BigRational::new(num, den),
    })
}

/// Every term with `deg m <= degree`, in degree then MonicIndex order.
pub fn series_terms(ring: &PolyRing, k: u32, h: &Poly, degree: usize, opts: &EnumOpts) -> Result<Vec<SeriesTerm>> {
    let cost = (0..=degree).try_fold(0u128, |acc, d| checked_add(acc, ring.monic_count(d) as u128))?;
    opts.check_budget(cost)?;
    (0..=degree)
        .flat_map(|d| ring.monic_iter(d))
        .map(|m| series_term(ring, k, h, &m))
        .collect()
}

/// The truncated series summed term by term.
pub fn akq_direct(ring: &PolyRing, k: u32, h: &Poly, degree: usize, opts: &EnumOpts) -> Result<BigRational> {
    Ok(series_terms(ring, k, h, degree, opts)?
        .into_iter()
        .map(|t| t.contribution)
        .sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct AkqValue {
    pub degree: usize,
    /// Sum of the terms with `deg m <= degree`.
    pub value: BigRational,
    /// Upper bound on the absolute sum of the remaining terms.
    pub tail_bound: BigRational,
}

type USeries = Vec<BigRational>;

fn mul_sparse(series: &mut USeries, factor: &[(usize, BigRational)]) {
    let top = series.len();
    let mut out = vec![BigRational::zero(); top];
    for (i, s) in series.iter().enumerate() {
        if s.is_zero() {
            continue;
        }
        for (d, c) in factor {
            if i + d < top {
                out[i + d] += s * c;
            }
        }
    }
    *series = out;
}

/// Local factor `Σ_a term(P^a) u^{a deg P}` at a prime with `P^e ∥ h`.
fn local_factor_dividing(norm: &BigInt, deg: usize, e: u32, k: u32) -> Vec<(usize, BigRational)> {
    let mut out = vec![(0, BigRational::one())];
    for a in 1..=e {
        out.push((a as usize * deg, BigRational::from_integer(norm.pow(a) - norm.pow(a - 1))));
    }
    let g = g_prime(norm, k - 1);
    let last = BigRational::new(-norm.pow(e) * g.pow(2), norm.pow(2 * (k - 1)));
    out.push(((e as usize + 1) * deg, last));
    out
}

fn h_primes(ring: &PolyRing, h: &Poly) -> Result<Vec<(usize, BigInt, u32)>> {
    let monic = ring.monic(h);
    if monic.is_one() {
        return Ok(Vec::new());
    }
    Ok(factor::factorize(ring, &monic)?
        .factors()
        .iter()
        .map(|(p, e)| (p.degree().unwrap_or(0), BigInt::from(ring.norm(p)), *e))
        .collect())
}

/// The series through degree `degree` from its Euler product, with a Rankin tail bound.
pub fn akq_truncated(ring: &PolyRing, k: u32, h: &Poly, degree: usize) -> Result<AkqValue> {
    require_k(k)?;
    require_h(h)?;
    let q = BigInt::from(ring.q());
    let primes_of_h = h_primes(ring, h)?;
    let mut series: USeries = vec![BigRational::zero(); degree + 1];
    series[0] = BigRational::one();
    for (deg, norm, e) in &primes_of_h {
        if *deg <= degree {
            mul_sparse(&mut series, &local_factor_dividing(norm, *deg, *e, k));
        }
    }
    for d in 1..=degree {
        let dividing = primes_of_h.iter().filter(|(deg, _, _)| *deg == d).count();
        let count = BigInt::from(factor::prime_count(ring.q() as u64, d)) - BigInt::from(dividing);
        let norm = q.pow(d as u32);
        let g = g_prime(&norm, k - 1);
        let t = BigRational::new(-g.pow(2), norm.pow(2 * (k - 1)));
        // (1 + t u^d)^count, truncated.
        let mut factor = vec![(0usize, BigRational::one())];
        let mut binom = BigInt::one();
        let mut power = BigRational::one();
        for i in 1..=degree / d {
            binom = binom * (&count - BigInt::from(i - 1)) / BigInt::from(i);
            if binom.is_zero() {
                break;
            }
            power *= &t;
            factor.push((i * d, BigRational::from_integer(binom.clone()) * &power));
        }
        mul_sparse(&mut series, &factor);
    }
    let value = series.into_iter().sum();
    Ok(AkqValue {
        degree,
        value,
        tail_bound: rankin_tail(ring, k, &primes_of_h, degree),
    })
}

/// `x^{-(D+1)} ∏_{P | h} Σ_a |term(P^a)| x^{a deg P} · (1 - x/q)^{-(k-1)^2}`.
fn rankin_tail(ring: &PolyRing, k: u32, primes_of_h: &[(usize, BigInt, u32)], degree: usize) -> BigRational {
    let q = BigInt::from(ring.q());
    let a2 = ((k - 1) * (k - 1)) as usize;
    let d1 = degree + 1;
    let candidate = BigRational::new(&q * BigInt::from(d1), BigInt::from(d1 + a2));
    let x = if candidate < BigRational::one() { BigRational::one() } else { candidate };
    let mut bound = BigRational::one() / x.pow(d1 as i32);
    for (deg, norm, e) in primes_of_h {
        let xd = x.pow(*deg as i32);
        let local: BigRational = local_factor_dividing(norm, *deg, *e, k)
            .into_iter()
            .map(|(exp, c)| c.abs() * xd.pow((exp / deg) as i32))
            .sum();
        bound *= local;
    }
    let ratio = BigRational::one() - &x / BigRational::from_integer(q);
    bound / ratio.pow(a2 as i32)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitRow {
    pub q: u32,
    pub h: Poly,
    pub akq: AkqValue,
    /// `|value - 1| + tail_bound`.
    pub deviation: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitCheck {
    pub k: u32,
    pub rows: Vec<LimitRow>,
    /// Deviation strictly decreasing along the grid.
    pub decreasing: bool,
    /// Deviation at the smallest `q` times `q^{1 - ε}`.
    pub envelope_constant: f64,
    /// Every deviation within `envelope_constant / q^{1 - ε}`.
    pub within_envelope: bool,
}

impl LimitCheck {
    pub fn passed(&self) -> bool {
        self.decreasing && self.within_envelope
    }
}

/// Evaluates the series over a grid of field sizes with `h` instantiated per field.
pub fn akq_limit_check(k: u32, pattern: &PolyPattern, q_grid: &[u64], degree: usize) -> Result<LimitCheck> {
    require_k(k)?;
    if q_grid.len() < 3 {
        return invalid("the limit check needs at least three field sizes");
    }
    let mut grid = q_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.len() < 3 {
        return invalid("the limit check needs at least three distinct field sizes");
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &q in &grid {
        let ring = PolyRing::new(Field::with_order(q)?);
        let h = pattern.instantiate(&ring)?;
        let akq = akq_truncated(&ring, k, &h, degree)?;
        let deviation = (&akq.value - BigRational::one()).abs() + &akq.tail_bound;
        rows.push(LimitRow { q: ring.q(), h, akq, deviation });
    }
    let decreasing = rows.windows(2).all(|w| w[1].deviation < w[0].deviation);
    let exponent = 1.0 - ENVELOPE_EPSILON;
    let q0 = rows[0].q as f64;
    let envelope_constant = rational_to_f64(&rows[0].deviation) * q0.powf(exponent);
    let within_envelope = rows
        .iter()
        .all(|r| rational_to_f64(&r.deviation) <= envelope_constant / (r.q as f64).powf(exponent) * (1.0 + 1e-12));
    Ok(LimitCheck {
        k,
        rows,
        decreasing,
        envelope_constant,
        within_envelope,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Increasing,
    Decreasing,
    Constant,
    Mixed,
}

impl Trend {
    fn of(values: &[BigRational]) -> Trend {
        let mut up = false;
        let mut down = false;
        for w in values.windows(2) {
            up |= w[1] > w[0];
            down |= w[1] < w[0];
        }
        match (up, down) {
            (false, false) => Trend::Constant,
            (true, false) => Trend::Increasing,
            (false, true) => Trend::Decreasing,
            (true, true) => Trend::Mixed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjectureRow {
    pub n: usize,
    /// `Σ_{f ∈ M_n} d_k(f) d_k(f + h)`.
    pub raw_sum: u128,
    /// `A_{k,q}(h) q^n n^{2k-2} / ((k-1)!)^2` with the truncated constant.
    pub main_term: BigRational,
    pub ratio: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjectureTable {
    pub akq: AkqValue,
    pub rows: Vec<ConjectureRow>,
    pub trend: Trend,
}

/// Exhaustive shifted sums against the conjectured leading term for fixed `q`.
pub fn conjecture_vs_data(
    ring: &PolyRing,
    k: u32,
    h: &Poly,
    ns: &[usize],
    degree: usize,
    opts: &EnumOpts,
) -> Result<ConjectureTable> {
    require_k(k)?;
    require_h(h)?;
    if ns.contains(&0) {
        return invalid("n must be at least 1");
    }
    let total = ns
        .iter()
        .try_fold(0u128, |acc, &n| checked_add(acc, 2 * ring.monic_count(n) as u128))?;
    opts.check_budget(total)?;
    let akq = akq_truncated(ring, k, h, degree)?;
    let factorial: BigInt = (1..k).map(BigInt::from).product();
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let raw_sum = stats::shifted_raw(ring, n, k, h, opts)?;
        let scale = BigInt::from(ring.q()).pow(n as u32) * BigInt::from(n).pow(2 * (k - 1));
        let main_term = &akq.value * BigRational::new(scale, factorial.pow(2));
        if main_term.is_zero() {
            return invalid("the conjectured main term vanishes");
        }
        let ratio = BigRational::from_integer(BigInt::from(raw_sum)) / &main_term;
        rows.push(ConjectureRow { n, raw_sum, main_term, ratio });
    }
    let trend = Trend::of(&rows.iter().map(|r| r.ratio.clone()).collect::<Vec<_>>());
    Ok(ConjectureTable { akq, rows, trend })
}

impl ConjectureRow {
    pub fn ratio_f64(&self) -> f64 {
        rational_to_f64(&self.ratio)
    }
}

impl AkqValue {
    pub fn value_f64(&self) -> f64 {
        rational_to_f64(&self.value)
    }

    pub fn tail_f64(&self) -> f64 {
        self.tail_bound.to_f64().unwrap_or(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::Factorization;

    fn ring(q: u64) -> PolyRing {
        PolyRing::new(Field::with_order(q).unwrap())
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn all_monic(r: &PolyRing, max_deg: usize) -> Vec<Poly> {
        (0..=max_deg).flat_map(|d| r.monic_iter(d)).collect()
    }

    fn mobius_by_trial(r: &PolyRing, f: &Poly) -> i128 {
        if f.is_one() {
            return 1;
        }
        let fac: Factorization = factor::factorize_by_trial(r, f).unwrap();
        if !fac.is_squarefree() {
            0
        } else if fac.num_factors().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// `Σ_{d | gcd(m, h)} |d| μ(m/d)` over enumerated monic divisors.
    fn ramanujan_oracle(r: &PolyRing, m: &Poly, h: &Poly) -> i128 {
        let g = r.gcd(m, h).unwrap();
        all_monic(r, g.degree().unwrap())
            .into_iter()
            .filter(|d| r.divides(d, &g))
            .map(|d| r.norm(&d) as i128 * mobius_by_trial(r, &r.div_exact(m, &d)))
            .sum()
    }

    #[test]
    fn ramanujan_examples() {
        let r = ring(3);
        let h = r.parse("2,1").unwrap();
        assert_eq!(ramanujan_sum(&r, &Poly::one(), &h).unwrap(), 1);
        let p = r.parse("1,0,1").unwrap();
        assert_eq!(ramanujan_sum(&r, &p, &h).unwrap(), -1);
        let lin = r.parse("2,1").unwrap();
        assert_eq!(ramanujan_sum(&r, &lin, &h).unwrap(), 2);
        assert!(ramanujan_sum(&r, &Poly::zero(), &h).is_err());
        assert!(ramanujan_sum(&r, &p, &Poly::zero()).is_err());
    }

    #[test]
    fn ramanujan_matches_definition() {
        for (q, max_deg) in [(2u64, 9usize), (3, 6), (4, 4), (5, 4), (7, 3), (9, 3)] {
            let r = ring(q);
            let hs = [Poly::one(), r.t(), r.pow(&r.t(), 2), r.parse("1,1,1").unwrap(), r.parse("0,1,1").unwrap()];
            for h in &hs {
                for m in all_monic(&r, max_deg) {
                    let c = ramanujan_sum(&r, &m, h).unwrap();
                    assert_eq!(c, ramanujan_oracle(&r, &m, h), "q={q} m={m} h={h}");
                    let g = r.gcd(&m, h).unwrap();
                    let d2 = stats::divisor_k(&r, &m, 2).unwrap() as i128;
                    assert!(c.abs() <= r.norm(&g) as i128 * d2);
                }
            }
        }
    }

    #[test]
    fn g_examples() {
        let r = ring(3);
        for j in 1..=4 {
            assert_eq!(g_count(&r, &Poly::one(), j).unwrap().value, 1);
        }
        for f in all_monic(&r, 3) {
            assert_eq!(g_count(&r, &f, 1).unwrap().value, 1);
        }
        for p in factor::primes_of_degree(&r, 2).iter() {
            assert_eq!(g_count(&r, p, 2).unwrap().value, 2 * 9 - 1);
        }
        assert!(g_count(&r, &Poly::one(), 0).is_err());
        assert!(g_count(&r, &r.parse("1,2").unwrap(), 2).is_err());
        let big = r.pow(&r.t(), 7);
        assert_eq!(g_count(&r, &big, 2).unwrap().method, GMethod::Crt);
    }

    #[test]
    fn g_crt_matches_brute() {
        for (q, j, max_deg) in [(2u64, 2u32, 8usize), (2, 3, 5), (3, 2, 5), (3, 3, 3), (4, 2, 4), (5, 2, 3), (5, 3, 2), (9, 2, 2)] {
            let r = ring(q);
            for f in all_monic(&r, max_deg) {
                if r.norm(&f).pow(j) > 100_000 {
                    continue;
                }
                assert_eq!(g_count_brute(&r, &f, j).unwrap(), g_count_crt(&r, &f, j).unwrap(), "q={q} j={j} f={f}");
            }
        }
    }

    #[test]
    fn truncation_at_zero_is_one() {
        for q in [2u64, 3, 4, 5] {
            let r = ring(q);
            for k in 2..=4 {
                for h in [Poly::one(), r.t(), r.parse("1,1,1").unwrap()] {
                    assert_eq!(akq_truncated(&r, k, &h, 0).unwrap().value, BigRational::one());
                    assert_eq!(akq_direct(&r, k, &h, 0, &EnumOpts::default()).unwrap(), BigRational::one());
                }
            }
        }
        assert!(akq_truncated(&ring(3), 1, &Poly::one(), 3).is_err());
        assert!(akq_truncated(&ring(3), 2, &Poly::zero(), 3).is_err());
    }

    /// Every term recomputed from the definitions: divisor sums for `c`,
    /// residue enumeration for `g`.
    fn oracle_series(r: &PolyRing, k: u32, h: &Poly, degree: usize) -> BigRational {
        all_monic(r, degree)
            .into_iter()
            .map(|m| {
                let c = ramanujan_oracle(r, &m, h);
                let g = r.gcd(&m, h).unwrap();
                let cof = r.div_exact(&m, &g);
                let gv = g_count_brute(r, &cof, k - 1).unwrap();
                let e = 2 * (k - 1);
                BigRational::new(
                    BigInt::from(c) * BigInt::from(r.norm(&g)).pow(e) * BigInt::from(gv).pow(2),
                    BigInt::from(r.norm(&m)).pow(e),
                )
            })
            .sum()
    }

    #[test]
    fn euler_product_matches_definition() {
        let r = ring(3);
        assert_eq!(akq_truncated(&r, 2, &Poly::one(), 1).unwrap().value, rat(2, 3));
        assert_eq!(oracle_series(&r, 2, &Poly::one(), 1), rat(2, 3));
        for (q, k, degree) in [(2u64, 2u32, 6usize), (2, 3, 5), (3, 2, 4), (3, 3, 3), (4, 2, 3), (5, 3, 2)] {
            let r = ring(q);
            let hs = [Poly::one(), r.t(), r.parse("1,1").unwrap(), r.pow(&r.t(), 2), r.parse("0,1,1").unwrap()];
            for h in &hs {
                let euler = akq_truncated(&r, k, h, degree).unwrap().value;
                assert_eq!(euler, oracle_series(&r, k, h, degree), "q={q} k={k} h={h}");
                assert_eq!(euler, akq_direct(&r, k, h, degree, &EnumOpts::default()).unwrap());
            }
        }
    }

    #[test]
    fn k2_h1_is_one_minus_inverse_q() {
        for q in [2u64, 3, 5, 7, 8, 13] {
            let r = ring(q);
            for degree in 1..=8 {
                assert_eq!(akq_truncated(&r, 2, &Poly::one(), degree).unwrap().value, rat(q as i64 - 1, q as i64));
            }
        }
    }

    #[test]
    fn tail_bounds_successive_truncations() {
        for (q, k) in [(2u64, 2u32), (3, 2), (3, 3), (5, 3), (2, 4)] {
            let r = ring(q);
            for h in [Poly::one(), r.t(), r.parse("1,1,1").unwrap()] {
                let mut prev = akq_truncated(&r, k, &h, 0).unwrap();
                for degree in 1..=7 {
                    let next = akq_truncated(&r, k, &h, degree).unwrap();
                    assert!((&next.value - &prev.value).abs() <= prev.tail_bound, "q={q} k={k} h={h} D={degree}");
                    prev = next;
                }
                let far = akq_truncated(&r, k, &h, 14).unwrap();
                let near = akq_truncated(&r, k, &h, 4).unwrap();
                assert!((&far.value - &near.value).abs() <= near.tail_bound);
            }
        }
    }

    #[test]
    fn limit_for_h_one() {
        let grid = [3u64, 5, 7, 11, 13];
        let check = akq_limit_check(2, &PolyPattern::One, &grid, 8).unwrap();
        assert!(check.decreasing);
        assert!(check.passed());
        let check = akq_limit_check(3, &PolyPattern::One, &[3, 5, 7], 8).unwrap();
        assert!(check.decreasing);
        assert!(akq_limit_check(2, &PolyPattern::One, &[3, 5], 8).is_err());
    }

    #[test]
    fn limit_for_h_t_does_not_approach_one() {
        let check = akq_limit_check(2, &PolyPattern::T, &[3, 5, 7, 11], 8).unwrap();
        assert!(!check.decreasing);
        for row in &check.rows {
            // The local factor at P = t contributes c_t(t) = q - 1 at degree one.
            let q = row.q as i64;
            assert!((&row.akq.value - rat(q - 1, 1)).abs() <= row.akq.tail_bound);
        }
    }

    #[test]
    fn remark_form_agrees_for_k3_coprime() {
        // gcd^{2k-1}/|m|^{k-1} g^2 over |m|^2 equals the summand when k = 3 and gcd(m, h) = 1.
        let r = ring(3);
        let h = r.t();
        for m in all_monic(&r, 3) {
            let g = r.gcd(&m, &h).unwrap();
            if !g.is_one() {
                continue;
            }
            let term = series_term(&r, 3, &h, &m).unwrap();
            let gv = BigInt::from(term.gval);
            let norm = BigInt::from(r.norm(&m));
            let remark = BigRational::new(BigInt::from(term.c) * gv.pow(2), norm.pow(2) * norm.pow(2));
            assert_eq!(remark, term.contribution);
        }
    }

    #[test]
    fn conjecture_table_k2_h1() {
        let r = ring(2);
        let ns: Vec<usize> = (2..=10).collect();
        let table = conjecture_vs_data(&r, 2, &Poly::one(), &ns, 8, &EnumOpts::default()).unwrap();
        for row in &table.rows {
            let n = row.n as i64;
            let exact = estermann(2, n) / (rat(1, 2) * rat(n * n, 1));
            assert_eq!(row.ratio, exact);
        }
        assert_eq!(table.trend, Trend::Decreasing);
        assert!(conjecture_vs_data(&r, 1, &Poly::one(), &ns, 8, &EnumOpts::default()).is_err());
    }

    fn estermann(q: i64, n: i64) -> BigRational {
        rat((n + 1) * (n + 1), 1) - rat((n - 1) * (n - 1), q)
    }
}
