//! Divisor functions `d_k` on `F_q[t]` and the normalized sums whose large-`q`
//! limits are binomial main terms: mean values, shifted convolutions,
//! multi-shift correlations, the unshifted second moment, the Titchmarsh sum
//! over shifted primes and joint cycle-structure frequencies.
//!
//! Every sum is exact. An [`ExperimentResult`] carries the raw integer sum,
//! its normalizer, the exact normalized value, the main term, their
//! difference and the difference scaled by `q^{1/2}`.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::combinatorics::{binom_main_term, binomial, joint_cauchy, partitions_of, rational_to_f64, Partition};
use crate::enumerate::{checked_add, checked_mul, sum_over_monic, sweep, EnumOpts};
use crate::error::{invalid, Error, Result};
use crate::factor::{self, Factorization};
use crate::poly::{Poly, PolyRing};

/// Flag attached to joint cycle statistics at `n = 2` over even `q`.
pub const FLAG_N2_EVEN_Q: &str = "n2-even-q-unproven";

static DK_SQUARE_FAULT: AtomicBool = AtomicBool::new(false);

/// Test hook: when set, `d_k` is off by one on every prime-square factor.
pub fn set_dk_square_fault(on: bool) {
    DK_SQUARE_FAULT.store(on, Ordering::SeqCst);
}

fn local_dk(e: u32, k: u32) -> u128 {
    let v = binomial((e + k - 1) as u64, (k - 1) as u64);
    if e == 2 && DK_SQUARE_FAULT.load(Ordering::Relaxed) {
        v + 1
    } else {
        v
    }
}

/// `d_k` from a factorization: `∏ C(e + k - 1, k - 1)` over prime powers `P^e ∥ f`.
pub fn divisor_k_of(fac: &Factorization, k: u32) -> u128 {
    fac.exponents().map(|e| local_dk(e, k)).product()
}

/// Number of ordered `k`-tuples of monic polynomials with product `f`.
pub fn divisor_k(ring: &PolyRing, f: &Poly, k: u32) -> Result<u128> {
    if k == 0 {
        return invalid("k must be at least 1");
    }
    if !f.is_monic() {
        return Err(crate::poly::PolyError::NotMonic.into());
    }
    if f.is_one() {
        return Ok(1);
    }
    Ok(divisor_k_of(&factor::factorize(ring, f)?, k))
}

/// Ordered `k`-fold factorization counts of every monic polynomial of degree
/// at most `max_deg`, built by repeated Dirichlet convolution with the constant
/// function 1 and no factoring. Indexed by degree, then MonicIndex.
pub fn ordered_factorization_table(ring: &PolyRing, max_deg: usize, k: u32, opts: &EnumOpts) -> Result<Vec<Vec<u128>>> {
    require_k(k)?;
    let pairs = (0..=max_deg).try_fold(0u128, |acc, d| {
        checked_add(acc, (d as u128 + 1) * ring.monic_count(d) as u128)
    })?;
    opts.check_budget(pairs.saturating_mul(k as u128 - 1))?;
    let blank = || -> Vec<Vec<u128>> {
        (0..=max_deg).map(|d| vec![0u128; ring.monic_count(d) as usize]).collect()
    };
    let mut table = blank();
    table.iter_mut().for_each(|row| row.fill(1));
    let monics: Vec<Vec<Poly>> = (0..=max_deg).map(|d| ring.monic_iter(d).collect()).collect();
    for _ in 1..k {
        let mut next = blank();
        for da in 0..=max_deg {
            for a in &monics[da] {
                for db in 0..=max_deg - da {
                    for (bi, b) in monics[db].iter().enumerate() {
                        let idx = ring.monic_index(&ring.mul(a, b))? as usize;
                        let slot = &mut next[da + db][idx];
                        *slot = checked_add(*slot, table[db][bi])?;
                    }
                }
            }
        }
        table = next;
    }
    Ok(table)
}

fn factor_or_one(ring: &PolyRing, f: &Poly, opts: &EnumOpts) -> Result<Factorization> {
    if f.is_one() {
        Ok(Factorization::default())
    } else {
        opts.factorize(ring, f)
    }
}

/// Distinct shifts `h_1, ..., h_s`, each of degree below `n` (zero allowed).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftTuple {
    hs: Vec<Poly>,
}

impl ShiftTuple {
    pub fn new(hs: Vec<Poly>, n: usize) -> Result<Self> {
        if hs.is_empty() {
            return invalid("a shift tuple needs at least one shift");
        }
        for (i, h) in hs.iter().enumerate() {
            if h.degree().is_some_and(|d| d >= n) {
                return invalid(format!("shift {h} has degree >= n = {n}"));
            }
            if hs[..i].contains(h) {
                return invalid(format!("duplicate shift {h}"));
            }
        }
        Ok(ShiftTuple { hs })
    }

    pub fn shifts(&self) -> &[Poly] {
        &self.hs
    }

    pub fn len(&self) -> usize {
        self.hs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hs.is_empty()
    }
}

/// The parameters echoed with every result.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Params {
    pub p: u32,
    pub e: u32,
    pub q: u32,
    pub n: usize,
    pub ks: Vec<u32>,
    pub hs: Vec<String>,
    pub lambdas: Vec<String>,
}

impl Params {
    pub fn new(ring: &PolyRing, n: usize) -> Self {
        let spec = ring.field().spec();
        Params {
            p: spec.p,
            e: spec.e,
            q: spec.q,
            n,
            ..Default::default()
        }
    }

    pub fn ks(mut self, ks: &[u32]) -> Self {
        self.ks = ks.to_vec();
        self
    }

    pub fn hs(mut self, hs: &[Poly]) -> Self {
        self.hs = hs.iter().map(Poly::to_string).collect();
        self
    }

    pub fn lambdas(mut self, lambdas: &[Partition]) -> Self {
        self.lambdas = lambdas.iter().map(Partition::to_string).collect();
        self
    }
}

/// The `d_2` Titchmarsh form `Σ_P d_2(P + α)` against `q^n + q^n/n`,
/// with the error scaled by `q^{n - 1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinedTerm {
    pub raw_sum: BigInt,
    pub main_term: BigRational,
    pub error: BigRational,
    pub scaled_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub raw_sum: BigInt,
    pub normalizer: BigInt,
    pub value: BigRational,
    pub main_term: BigRational,
    /// `value - main_term`, signed.
    pub abs_error: BigRational,
    /// `|abs_error| · q^{1/2}`.
    pub scaled_error: f64,
    pub params: Params,
    pub flags: Vec<String>,
    pub refined: Option<RefinedTerm>,
}

impl ExperimentResult {
    pub fn new(raw_sum: BigInt, normalizer: BigInt, main_term: BigRational, params: Params) -> Self {
        let value = BigRational::new(raw_sum.clone(), normalizer.clone());
        let abs_error = &value - &main_term;
        let scaled_error = rational_to_f64(&abs_error.abs()) * (params.q as f64).sqrt();
        ExperimentResult {
            raw_sum,
            normalizer,
            value,
            main_term,
            abs_error,
            scaled_error,
            params,
            flags: Vec::new(),
            refined: None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.abs_error.is_zero()
    }

    pub fn abs_error_magnitude(&self) -> BigRational {
        self.abs_error.abs()
    }
}

fn q_pow(ring: &PolyRing, n: usize) -> BigInt {
    BigInt::from(ring.q()).pow(n as u32)
}

fn integer_rational(v: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn require_k(k: u32) -> Result<()> {
    if k == 0 {
        invalid("k must be at least 1")
    } else {
        Ok(())
    }
}

/// `(1/q^n) Σ_{f ∈ M_n} d_k(f)` against `C(n + k - 1, k - 1)`; the two agree exactly.
pub fn mean_divisor(ring: &PolyRing, n: usize, k: u32, opts: &EnumOpts) -> Result<ExperimentResult> {
    Ok(mean_divisor_many(ring, n, &[k], opts)?.remove(0))
}

/// [`mean_divisor`] for several `k` from a single sweep.
pub fn mean_divisor_many(ring: &PolyRing, n: usize, ks: &[u32], opts: &EnumOpts) -> Result<Vec<ExperimentResult>> {
    for &k in ks {
        require_k(k)?;
    }
    opts.check_budget(ring.monic_count(n) as u128)?;
    let total = ring.monic_count(n);
    let zeros = vec![0u128; ks.len()];
    let sums = sweep(
        total,
        opts.shards,
        |range| {
            let mut acc = vec![0u128; ks.len()];
            for f in ring.monic_range(n, range) {
                let fac = factor_or_one(ring, &f, opts)?;
                for (a, &k) in acc.iter_mut().zip(ks) {
                    *a = checked_add(*a, divisor_k_of(&fac, k))?;
                }
            }
            Ok(acc)
        },
        zeros,
        |a, b| a.iter().zip(&b).map(|(x, y)| checked_add(*x, *y)).collect(),
    )?;
    Ok(ks
        .iter()
        .zip(sums)
        .map(|(&k, raw)| {
            let main = integer_rational(binom_main_term(n as u64, k as u64));
            ExperimentResult::new(raw.into(), q_pow(ring, n), main, Params::new(ring, n).ks(&[k]))
        })
        .collect())
}

/// `(1/q^n) Σ_{f ∈ M_n} d_k(f) d_k(f + h)` for `h ≠ 0`, `deg h < n`, `n > 1`,
/// against `C(n + k - 1, k - 1)^2`.
pub fn shifted_sum(ring: &PolyRing, n: usize, k: u32, h: &Poly, opts: &EnumOpts) -> Result<ExperimentResult> {
    if h.is_zero() {
        return invalid("h = 0 is the unshifted moment; use moment_h0");
    }
    if n <= 1 {
        return invalid("the shifted sum needs n > 1");
    }
    let shifts = ShiftTuple::new(vec![Poly::zero(), h.clone()], n)?;
    let mut res = multi_shift_sum(ring, n, &[k, k], &shifts, opts)?;
    res.params = Params::new(ring, n).ks(&[k]).hs(std::slice::from_ref(h));
    Ok(res)
}

/// Raw `Σ_{f ∈ M_n} d_k(f) d_k(f + h)` with no restriction on `n` or `h` beyond `deg h < n`.
pub fn shifted_raw(ring: &PolyRing, n: usize, k: u32, h: &Poly, opts: &EnumOpts) -> Result<u128> {
    require_k(k)?;
    if h.degree().is_some_and(|d| d >= n) {
        return invalid("deg h must be below n");
    }
    opts.check_budget(2 * ring.monic_count(n) as u128)?;
    sum_over_monic(ring, n, opts, |f| {
        let a = divisor_k_of(&factor_or_one(ring, f, opts)?, k);
        let g = ring.add(f, h);
        let b = divisor_k_of(&factor_or_one(ring, &g, opts)?, k);
        checked_mul(a, b)
    })
}

/// `(1/q^n) Σ_f ∏_i d_{k_i}(f + h_i)` against `∏_i C(n + k_i - 1, k_i - 1)`.
pub fn multi_shift_sum(
    ring: &PolyRing,
    n: usize,
    ks: &[u32],
    shifts: &ShiftTuple,
    opts: &EnumOpts,
) -> Result<ExperimentResult> {
    if n <= 1 {
        return invalid("multi-shift sums need n > 1");
    }
    if ks.len() != shifts.len() {
        return invalid("one k per shift");
    }
    for &k in ks {
        require_k(k)?;
    }
    for h in shifts.shifts() {
        if h.degree().is_some_and(|d| d >= n) {
            return invalid("every shift needs degree below n");
        }
    }
    opts.check_budget(ring.monic_count(n) as u128 * shifts.len() as u128)?;
    let raw = sum_over_monic(ring, n, opts, |f| {
        ks.iter().zip(shifts.shifts()).try_fold(1u128, |acc, (&k, h)| {
            let g = ring.add(f, h);
            checked_mul(acc, divisor_k_of(&opts.factorize(ring, &g)?, k))
        })
    })?;
    let main = ks
        .iter()
        .fold(BigInt::one(), |acc, &k| acc * BigInt::from(binom_main_term(n as u64, k as u64)));
    Ok(ExperimentResult::new(
        raw.into(),
        q_pow(ring, n),
        BigRational::from_integer(main),
        Params::new(ring, n).ks(ks).hs(shifts.shifts()),
    ))
}

/// `(1/q^n) Σ_{f ∈ M_n} d_k(f)^2` against `C(n + k^2 - 1, k^2 - 1)`.
pub fn moment_h0(ring: &PolyRing, n: usize, k: u32, opts: &EnumOpts) -> Result<ExperimentResult> {
    require_k(k)?;
    if n == 0 {
        return invalid("the second moment needs n >= 1");
    }
    opts.check_budget(ring.monic_count(n) as u128)?;
    let raw = sum_over_monic(ring, n, opts, |f| {
        let d = divisor_k_of(&opts.factorize(ring, f)?, k);
        checked_mul(d, d)
    })?;
    let main = integer_rational(binom_main_term(n as u64, (k * k) as u64));
    Ok(ExperimentResult::new(raw.into(), q_pow(ring, n), main, Params::new(ring, n).ks(&[k])))
}

/// `(1/π_q(n)) Σ_{P ∈ P_n} d_k(P + α)` against `C(n + k - 1, k - 1)`.
/// For `k = 2` the result also carries the raw form against `q^n + q^n/n`.
pub fn titchmarsh_sum(ring: &PolyRing, n: usize, k: u32, alpha: &Poly, opts: &EnumOpts) -> Result<ExperimentResult> {
    require_k(k)?;
    if n <= 1 {
        return invalid("the Titchmarsh sum needs n > 1");
    }
    if alpha.is_zero() {
        return invalid("alpha must be nonzero");
    }
    if alpha.degree().is_some_and(|d| d >= n) {
        return invalid("deg alpha must be below n");
    }
    opts.check_budget(2 * ring.monic_count(n) as u128)?;
    let primes = factor::primes_of_degree(ring, n);
    let raw = sweep(
        primes.len() as u64,
        opts.shards,
        |range| {
            primes[range.start as usize..range.end as usize]
                .iter()
                .try_fold(0u128, |acc, prime| {
                    let g = ring.add(prime, alpha);
                    checked_add(acc, divisor_k_of(&opts.factorize(ring, &g)?, k))
                })
        },
        0u128,
        checked_add,
    )?;
    let count = BigInt::from(primes.len());
    debug_assert_eq!(count, BigInt::from(factor::prime_count(ring.q() as u64, n)));
    let main = integer_rational(binom_main_term(n as u64, k as u64));
    let mut res = ExperimentResult::new(
        raw.into(),
        count,
        main,
        Params::new(ring, n).ks(&[k]).hs(std::slice::from_ref(alpha)),
    );
    if k == 2 {
        let qn = q_pow(ring, n);
        let main = BigRational::from_integer(qn.clone()) + BigRational::new(qn, BigInt::from(n));
        let error = BigRational::from_integer(res.raw_sum.clone()) - &main;
        let scale = (ring.q() as f64).powf(n as f64 - 0.5);
        res.refined = Some(RefinedTerm {
            raw_sum: res.raw_sum.clone(),
            scaled_error: rational_to_f64(&error.abs()) / scale,
            main_term: main,
            error,
        });
    }
    Ok(res)
}

/// Counts `f ∈ M_n` with `λ(f + h_i) = λ_i` for every `i`, over all partition tuples.
pub fn joint_cycle_counts(
    ring: &PolyRing,
    n: usize,
    shifts: &ShiftTuple,
    opts: &EnumOpts,
) -> Result<BTreeMap<Vec<Partition>, u64>> {
    if n == 0 {
        return invalid("cycle structure needs n >= 1");
    }
    for h in shifts.shifts() {
        if h.degree().is_some_and(|d| d >= n) {
            return invalid("every shift needs degree below n");
        }
    }
    opts.check_budget(ring.monic_count(n) as u128 * shifts.len() as u128)?;
    sweep(
        ring.monic_count(n),
        opts.shards,
        |range| {
            let mut counts = BTreeMap::new();
            for f in ring.monic_range(n, range) {
                let key = shifts
                    .shifts()
                    .iter()
                    .map(|h| Ok(opts.factorize(ring, &ring.add(&f, h))?.cycle_type()))
                    .collect::<Result<Vec<_>>>()?;
                *counts.entry(key).or_insert(0u64) += 1;
            }
            Ok(counts)
        },
        BTreeMap::new(),
        |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            Ok(a)
        },
    )
}

fn joint_result(
    ring: &PolyRing,
    n: usize,
    shifts: &ShiftTuple,
    lambdas: &[Partition],
    count: u64,
) -> ExperimentResult {
    let mut res = ExperimentResult::new(
        count.into(),
        q_pow(ring, n),
        joint_cauchy(lambdas),
        Params::new(ring, n).hs(shifts.shifts()).lambdas(lambdas),
    );
    if n == 2 && ring.q().is_multiple_of(2) {
        res.flags.push(FLAG_N2_EVEN_Q.to_string());
    }
    res
}

fn check_lambdas(n: usize, shifts: &ShiftTuple, lambdas: &[Partition]) -> Result<()> {
    if lambdas.len() != shifts.len() {
        return invalid("one partition per shift");
    }
    if let Some(l) = lambdas.iter().find(|l| l.n() != n) {
        return invalid(format!("partition {l} is not a partition of {n}"));
    }
    Ok(())
}

/// `(1/q^n) #{f ∈ M_n : λ(f + h_i) = λ_i ∀i}` against `∏ p(λ_i)`.
pub fn joint_cycle_freq(
    ring: &PolyRing,
    n: usize,
    shifts: &ShiftTuple,
    lambdas: &[Partition],
    opts: &EnumOpts,
) -> Result<ExperimentResult> {
    check_lambdas(n, shifts, lambdas)?;
    let counts = joint_cycle_counts(ring, n, shifts, opts)?;
    let count = counts.get(lambdas).copied().unwrap_or(0);
    Ok(joint_result(ring, n, shifts, lambdas, count))
}

/// [`joint_cycle_freq`] for every tuple of partitions of `n`, from one sweep.
/// Tuples are ordered lexicographically by the order of [`partitions_of`].
pub fn joint_cycle_table(
    ring: &PolyRing,
    n: usize,
    shifts: &ShiftTuple,
    opts: &EnumOpts,
) -> Result<Vec<ExperimentResult>> {
    let counts = joint_cycle_counts(ring, n, shifts, opts)?;
    let parts = partitions_of(n);
    let s = shifts.len();
    let total = parts.len().checked_pow(s as u32).ok_or(Error::Overflow)?;
    let mut out = Vec::with_capacity(total);
    for mut i in 0..total {
        let mut lambdas = vec![parts[0].clone(); s];
        for slot in lambdas.iter_mut().rev() {
            *slot = parts[i % parts.len()].clone();
            i /= parts.len();
        }
        let count = counts.get(&lambdas).copied().unwrap_or(0);
        out.push(joint_result(ring, n, shifts, &lambdas, count));
    }
    Ok(out)
}

/// `#{f ∈ M_n : f and f + h squarefree}`.
pub fn squarefree_pair_count(ring: &PolyRing, n: usize, h: &Poly, opts: &EnumOpts) -> Result<u64> {
    if n == 0 {
        return invalid("squarefree pairs need n >= 1");
    }
    if h.degree().is_some_and(|d| d >= n) {
        return invalid("deg h must be below n");
    }
    opts.check_budget(2 * ring.monic_count(n) as u128)?;
    let count = sum_over_monic(ring, n, opts, |f| {
        let both = ring.is_squarefree(f)? && ring.is_squarefree(&ring.add(f, h))?;
        Ok(both as u128)
    })?;
    count.to_u64().ok_or(Error::Overflow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;

    fn ring(q: u64) -> PolyRing {
        PolyRing::new(Field::with_order(q).unwrap())
    }

    fn opts() -> EnumOpts {
        EnumOpts::default().verified()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Ordered factorization counts by Dirichlet convolution over all monic
    /// polynomials up to degree `n`, indexed by (degree, MonicIndex).
    fn dk_table(r: &PolyRing, n: usize, k: u32) -> Vec<Vec<u128>> {
        let mut table: Vec<Vec<u128>> = (0..=n).map(|d| vec![1u128; r.monic_count(d) as usize]).collect();
        for _ in 1..k {
            let mut next: Vec<Vec<u128>> = (0..=n).map(|d| vec![0u128; r.monic_count(d) as usize]).collect();
            for da in 0..=n {
                for a in r.monic_iter(da) {
                    for db in 0..=n - da {
                        for (bi, b) in r.monic_iter(db).enumerate() {
                            let ab = r.mul(&a, &b);
                            let idx = r.monic_index(&ab).unwrap() as usize;
                            next[da + db][idx] += table[db][bi];
                        }
                    }
                }
            }
            table = next;
        }
        table
    }

    #[test]
    fn convolution_table_matches_oracle() {
        for (q, n) in [(2u64, 5usize), (3, 3), (4, 2)] {
            let r = ring(q);
            for k in 1..=4u32 {
                assert_eq!(ordered_factorization_table(&r, n, k, &opts()).unwrap(), dk_table(&r, n, k));
            }
        }
    }

    #[test]
    fn divisor_basics() {
        let r = ring(3);
        assert_eq!(divisor_k(&r, &Poly::one(), 4).unwrap(), 1);
        let p2 = r.pow(&r.parse("1,0,1").unwrap(), 2);
        assert_eq!(divisor_k(&r, &p2, 2).unwrap(), 3);
        assert!(divisor_k(&r, &Poly::zero(), 2).is_err());
        assert!(divisor_k(&r, &r.parse("1,2").unwrap(), 2).is_err());
    }

    #[test]
    fn divisor_matches_ordered_factorizations() {
        for (q, n) in [(2u64, 6usize), (3, 4), (4, 3), (5, 3)] {
            let r = ring(q);
            for k in 1..=4u32 {
                let table = dk_table(&r, n, k);
                for d in 0..=n {
                    for (i, f) in r.monic_iter(d).enumerate() {
                        assert_eq!(divisor_k(&r, &f, k).unwrap(), table[d][i], "q={q} f={f} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn squarefree_divisor_depends_on_parts() {
        for (q, n) in [(2u64, 8usize), (3, 5), (5, 4), (7, 3)] {
            let r = ring(q);
            for f in r.monic_iter(n) {
                let fac = factor::factorize(&r, &f).unwrap();
                if fac.is_squarefree() {
                    let parts = fac.cycle_type().num_parts();
                    for k in 1..=4u32 {
                        assert_eq!(divisor_k_of(&fac, k), (k as u128).pow(parts));
                    }
                }
            }
        }
    }

    #[test]
    fn mean_values_are_exact() {
        let cases = [(3u64, 3usize, 2u32, 4u128), (2, 4, 3, 15), (5, 2, 4, 10)];
        for (q, n, k, expected) in cases {
            let res = mean_divisor(&ring(q), n, k, &opts()).unwrap();
            assert_eq!(res.value, integer_rational(expected));
            assert!(res.is_exact());
        }
        let res = mean_divisor(&ring(4), 0, 3, &opts()).unwrap();
        assert!(res.is_exact());
    }

    #[test]
    fn shifted_examples() {
        let r = ring(3);
        let res = shifted_sum(&r, 2, 2, &Poly::one(), &opts()).unwrap();
        assert_eq!(res.value, rat(26, 3));
        assert_eq!(res.main_term, integer_rational(9));
        for (q, n) in [(2u64, 3usize), (3, 2), (4, 3)] {
            let r = ring(q);
            let h = r.t();
            let res = shifted_sum(&r, n, 1, &h, &opts()).unwrap();
            assert_eq!(res.value, BigRational::one());
            assert!(res.is_exact());
        }
        let r5 = ring(5);
        let res = shifted_sum(&r5, 3, 2, &Poly::one(), &opts()).unwrap();
        // h = 1, k = 2 is the exact Estermann value 16 - 4/5.
        assert_eq!(res.value, rat(76, 5));
        assert!(shifted_sum(&r, 2, 2, &Poly::zero(), &opts()).is_err());
        assert!(shifted_sum(&r, 2, 2, &Poly::monomial(2), &opts()).is_err());
        assert!(shifted_sum(&r, 1, 2, &Poly::one(), &opts()).is_err());
    }

    #[test]
    fn shifted_sum_symmetric_in_sign_of_h() {
        for (q, n) in [(3u64, 3usize), (5, 2), (4, 3), (7, 2)] {
            let r = ring(q);
            let monics: Vec<Poly> = (0..n).flat_map(|d| r.monic_iter(d)).collect();
            for h in monics.iter().flat_map(|m| r.field().elements().skip(1).map(|c| r.scale(m, c))) {
                let a = shifted_sum(&r, n, 2, &h, &opts()).unwrap();
                let b = shifted_sum(&r, n, 2, &r.neg(&h), &opts()).unwrap();
                assert_eq!(a.value, b.value);
            }
        }
    }

    #[test]
    fn multi_shift_reductions() {
        let r = ring(3);
        let single = ShiftTuple::new(vec![Poly::zero()], 3).unwrap();
        let m = multi_shift_sum(&r, 3, &[3], &single, &opts()).unwrap();
        assert_eq!(m.value, mean_divisor(&r, 3, 3, &opts()).unwrap().value);
        let pair = ShiftTuple::new(vec![Poly::zero(), Poly::one()], 3).unwrap();
        let m = multi_shift_sum(&r, 3, &[2, 2], &pair, &opts()).unwrap();
        assert_eq!(m.value, shifted_sum(&r, 3, 2, &Poly::one(), &opts()).unwrap().value);
        let m = multi_shift_sum(&r, 3, &[2, 3], &pair, &opts()).unwrap();
        assert_eq!(m.main_term, integer_rational(4 * 10));
        assert!(m.scaled_error.is_finite());
        assert!(ShiftTuple::new(vec![Poly::one(), Poly::one()], 3).is_err());
        assert!(ShiftTuple::new(vec![Poly::monomial(3)], 3).is_err());
        assert!(multi_shift_sum(&r, 3, &[2], &pair, &opts()).is_err());
    }

    #[test]
    fn second_moment() {
        for q in [2u64, 3, 4, 5, 7] {
            let r = ring(q);
            assert_eq!(moment_h0(&r, 3, 1, &opts()).unwrap().value, BigRational::one());
            let res = moment_h0(&r, 2, 2, &opts()).unwrap();
            assert_eq!(res.main_term, integer_rational(10));
            // Hand count over M_2: 10 - 1/q.
            assert_eq!(res.value, rat(10 * q as i64 - 1, q as i64));
        }
    }

    #[test]
    fn titchmarsh_small() {
        let r = ring(3);
        let one = titchmarsh_sum(&r, 2, 1, &Poly::one(), &opts()).unwrap();
        assert!(one.is_exact());
        let res = titchmarsh_sum(&r, 2, 2, &Poly::one(), &opts()).unwrap();
        // P_2(F_3) + 1 = {t^2 + 2, t^2 + t, t^2 + 2t}, each a product of two distinct linears.
        assert_eq!(res.raw_sum, BigInt::from(12));
        assert_eq!(res.normalizer, BigInt::from(3));
        assert_eq!(res.main_term, integer_rational(3));
        let refined = res.refined.unwrap();
        assert_eq!(refined.main_term, rat(27, 2));
        assert!(titchmarsh_sum(&r, 2, 2, &Poly::zero(), &opts()).is_err());
        assert!(titchmarsh_sum(&r, 1, 2, &Poly::one(), &opts()).is_err());
    }

    #[test]
    fn joint_cycles() {
        let r = ring(3);
        let zero = ShiftTuple::new(vec![Poly::zero()], 3).unwrap();
        let res = joint_cycle_freq(&r, 3, &zero, &[Partition::cycle(3)], &opts()).unwrap();
        assert_eq!(res.value, rat(8, 27));
        assert_eq!(res.main_term, rat(1, 3));
        let pair = ShiftTuple::new(vec![Poly::zero(), Poly::one()], 2).unwrap();
        let res = joint_cycle_freq(&r, 2, &pair, &[Partition::cycle(2), Partition::cycle(2)], &opts()).unwrap();
        // Oracle: direct count of f with f and f + 1 both irreducible quadratics.
        let direct = r
            .monic_iter(2)
            .filter(|f| {
                factor::is_irreducible(&r, f).unwrap()
                    && factor::is_irreducible(&r, &r.add(f, &Poly::one())).unwrap()
            })
            .count();
        assert_eq!(res.raw_sum, BigInt::from(direct));
        assert_eq!(res.main_term, rat(1, 4));
        assert!(res.flags.is_empty());
        let r4 = ring(4);
        let res = joint_cycle_freq(&r4, 2, &pair, &[Partition::cycle(2), Partition::ones(2)], &opts()).unwrap();
        assert_eq!(res.flags, [FLAG_N2_EVEN_Q]);
        assert!(joint_cycle_freq(&r, 3, &zero, &[Partition::cycle(2)], &opts()).is_err());
    }

    #[test]
    fn joint_table_sums_to_one() {
        for q in [2u64, 3, 4, 5] {
            let r = ring(q);
            let hs = ShiftTuple::new(vec![Poly::zero(), Poly::one(), r.t()], 3).unwrap();
            let table = joint_cycle_table(&r, 3, &hs, &opts()).unwrap();
            assert_eq!(table.len(), 27);
            let total: BigRational = table.iter().map(|t| t.value.clone()).sum();
            assert_eq!(total, BigRational::one());
        }
    }

    #[test]
    fn squarefree_pairs() {
        let r = ring(3);
        let c = squarefree_pair_count(&r, 2, &Poly::one(), &opts()).unwrap();
        let direct = r
            .monic_iter(2)
            .filter(|f| r.is_squarefree(f).unwrap() && r.is_squarefree(&r.add(f, &Poly::one())).unwrap())
            .count() as u64;
        assert_eq!(c, direct);
        assert!(c >= 3);
        for q in [2u64, 3, 4, 5, 7] {
            let r = ring(q);
            assert_eq!(squarefree_pair_count(&r, 1, &Poly::one(), &opts()).unwrap(), q);
            for n in 2..=4usize {
                for h in [Poly::one(), r.t(), Poly::zero()] {
                    let c = squarefree_pair_count(&r, n, &h, &opts()).unwrap();
                    let qn = q.pow(n as u32);
                    assert!(c + 2 * qn / q >= qn, "q={q} n={n} h={h}");
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let r = ring(7);
        let small = EnumOpts::default().with_budget(1000);
        assert!(matches!(mean_divisor(&r, 4, 2, &small), Err(Error::Budget { .. })));
        assert!(mean_divisor(&r, 3, 2, &small).is_ok());
    }

    #[test]
    fn shard_independence() {
        let r = ring(4);
        let reference = shifted_sum(&r, 3, 3, &r.t(), &EnumOpts::default().with_shards(1)).unwrap();
        for shards in [2, 5, 13, 64] {
            let res = shifted_sum(&r, 3, 3, &r.t(), &EnumOpts::default().with_shards(shards)).unwrap();
            assert_eq!(res, reference);
        }
    }
}
