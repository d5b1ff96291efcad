//! Exact identities behind the shifted `d_2` sum at `h = 1`: monic solutions
//! of `Au - Bv = 1`, the four-degree count `S(α, β; γ, δ)`, truncated
//! Möbius sums and the closed form `(n + 1)^2 - (n - 1)^2 / q`.
//!
//! Everything here is exact; no floating point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::enumerate::{checked_add, EnumOpts};
use crate::error::{invalid, Error, Result};
use crate::factor;
use crate::poly::{Poly, PolyRing};
use crate::stats;

/// Largest enumeration for which brute-force cross-checks run by default.
pub const BRUTE_LIMIT: u128 = 100_000;

fn q_pow(ring: &PolyRing, n: usize) -> Result<u128> {
    (ring.q() as u128).checked_pow(n as u32).ok_or(Error::Overflow)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    /// The closed formula.
    Closed,
    /// The reduction used in the derivation of the closed formula.
    Brute,
    /// Fully independent enumeration.
    Direct,
}

/// Monic solution count of `Au - Bv = 1` with `deg(Au) = n = deg(Bv)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiophantineCount {
    pub closed: u128,
    pub brute: Option<u128>,
}

impl DiophantineCount {
    pub fn agrees(&self) -> bool {
        self.brute.is_none_or(|b| b == self.closed)
    }
}

fn check_diophantine(ring: &PolyRing, a: &Poly, b: &Poly, n: usize) -> Result<(usize, usize)> {
    if !a.is_monic() || !b.is_monic() {
        return invalid("A and B must be monic");
    }
    if !ring.coprime(a, b) {
        return invalid("A and B must be coprime for Au - Bv = 1 to be solvable");
    }
    let (da, db) = (a.degree().unwrap_or(0), b.degree().unwrap_or(0));
    if n < (da + db).max(1) {
        return invalid(format!("n = {n} is below max(1, deg A + deg B) = {}", (da + db).max(1)));
    }
    Ok((da, db))
}

/// `q^n / (|A||B|)`.
pub fn diophantine_closed(ring: &PolyRing, a: &Poly, b: &Poly, n: usize) -> Result<u128> {
    let (da, db) = check_diophantine(ring, a, b, n)?;
    q_pow(ring, n - da - db)
}

/// Enumerates monic `u` of degree `n - deg A` and keeps those for which
/// `B | Au - 1` with a monic quotient of degree `n - deg B`.
pub fn diophantine_brute(ring: &PolyRing, a: &Poly, b: &Poly, n: usize) -> Result<u128> {
    let (da, db) = check_diophantine(ring, a, b, n)?;
    let mut count = 0u128;
    for u in ring.monic_iter(n - da) {
        let w = ring.sub(&ring.mul(a, &u), &Poly::one());
        let (v, r) = ring.divrem(&w, b)?;
        if r.is_zero() && v.is_monic() && v.degree() == Some(n - db) {
            count += 1;
        }
    }
    Ok(count)
}

/// Closed count, plus the brute-force count whenever it costs at most `brute_limit`.
pub fn diophantine_count(
    ring: &PolyRing,
    a: &Poly,
    b: &Poly,
    n: usize,
    brute_limit: u128,
) -> Result<DiophantineCount> {
    let closed = diophantine_closed(ring, a, b, n)?;
    let da = a.degree().unwrap_or(0);
    let cost = q_pow(ring, n - da).unwrap_or(u128::MAX);
    let brute = if cost <= brute_limit {
        Some(diophantine_brute(ring, a, b, n)?)
    } else {
        None
    };
    Ok(DiophantineCount { closed, brute })
}

/// Degrees `(α, β; γ, δ)` with `α + β = γ + δ = n >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SCountParams {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    pub delta: usize,
}

impl SCountParams {
    pub fn new(alpha: usize, beta: usize, gamma: usize, delta: usize) -> Result<Self> {
        let n = alpha + beta;
        if gamma + delta != n {
            return invalid(format!("α + β = {n} but γ + δ = {}", gamma + delta));
        }
        if n == 0 {
            return invalid("α + β must be at least 1");
        }
        Ok(SCountParams { alpha, beta, gamma, delta })
    }

    pub fn n(&self) -> usize {
        self.alpha + self.beta
    }

    pub fn min(&self) -> usize {
        self.alpha.min(self.beta).min(self.gamma).min(self.delta)
    }

    pub fn is_boundary(&self) -> bool {
        self.min() == 0
    }

    /// The equivalent tuple with `α <= β` and `γ <= δ`.
    pub fn ordered(&self) -> Self {
        let (alpha, beta) = (self.alpha.min(self.beta), self.alpha.max(self.beta));
        let (gamma, delta) = (self.gamma.min(self.delta), self.gamma.max(self.delta));
        SCountParams { alpha, beta, gamma, delta }
    }

    /// Enumeration cost of `mode`.
    pub fn cost(&self, ring: &PolyRing, mode: CountMode) -> u128 {
        let o = self.ordered();
        let q = ring.q() as u128;
        let exp = match mode {
            CountMode::Closed => return 1,
            CountMode::Brute => o.alpha + o.gamma,
            CountMode::Direct => o.n() + o.gamma,
        };
        q.checked_pow(exp as u32).unwrap_or(u128::MAX)
    }
}

impl std::fmt::Display for SCountParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{};{},{})", self.alpha, self.beta, self.gamma, self.delta)
    }
}

/// All `(n + 1)^2` tuples for a given `n`, in lexicographic order.
pub fn quadruples(n: usize) -> Vec<SCountParams> {
    (0..=n)
        .flat_map(|a| (0..=n).map(move |g| SCountParams { alpha: a, beta: n - a, gamma: g, delta: n - g }))
        .collect()
}

/// `#{x ∈ M_α, y ∈ M_β, z ∈ M_γ, u ∈ M_δ : xy - zu = 1}`.
pub fn s_count(ring: &PolyRing, params: SCountParams, mode: CountMode, opts: &EnumOpts) -> Result<u128> {
    opts.check_budget(params.cost(ring, mode))?;
    let n = params.n();
    let o = params.ordered();
    match mode {
        CountMode::Closed => {
            let qn = q_pow(ring, n)?;
            Ok(if params.is_boundary() { qn } else { qn - qn / ring.q() as u128 })
        }
        CountMode::Brute => {
            let inner = q_pow(ring, n - o.alpha - o.gamma)?;
            let zs: Vec<Poly> = ring.monic_iter(o.gamma).collect();
            let mut total = 0u128;
            for x in ring.monic_iter(o.alpha) {
                for z in &zs {
                    if ring.coprime(&x, z) {
                        total = checked_add(total, inner)?;
                    }
                }
            }
            Ok(total)
        }
        CountMode::Direct => {
            let ys: Vec<Poly> = ring.monic_iter(o.beta).collect();
            let zs: Vec<Poly> = ring.monic_iter(o.gamma).collect();
            let mut total = 0u128;
            for x in ring.monic_iter(o.alpha) {
                for y in &ys {
                    let w = ring.sub(&ring.mul(&x, y), &Poly::one());
                    for z in &zs {
                        let (u, r) = ring.divrem(&w, z)?;
                        if r.is_zero() && u.is_monic() && u.degree() == Some(o.delta) {
                            total += 1;
                        }
                    }
                }
            }
            Ok(total)
        }
    }
}

/// `Σ_{deg d <= η} μ(d)/|d|^2` over monic `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MobiusPartial {
    pub enumerated: BigRational,
    pub closed: BigRational,
    /// `Σ_{d ∈ M_ξ} μ(d)` for `ξ = 0..=η`.
    pub degree_sums: Vec<i64>,
}

pub fn mobius_l2_closed(ring: &PolyRing, eta: usize) -> BigRational {
    if eta == 0 {
        BigRational::one()
    } else {
        let q = BigInt::from(ring.q());
        BigRational::new(&q - 1, q)
    }
}

pub fn mobius_l2_partial(ring: &PolyRing, eta: usize, opts: &EnumOpts) -> Result<MobiusPartial> {
    let cost = (0..=eta).try_fold(0u128, |acc, d| checked_add(acc, q_pow(ring, d)?))?;
    opts.check_budget(cost)?;
    let mut enumerated = BigRational::zero();
    let mut degree_sums = Vec::with_capacity(eta + 1);
    for xi in 0..=eta {
        let mut s = 0i64;
        for d in ring.monic_iter(xi) {
            s += factor::mobius(ring, &d)? as i64;
        }
        degree_sums.push(s);
        let norm2 = BigInt::from(ring.q()).pow(2 * xi as u32);
        enumerated += BigRational::new(BigInt::from(s), norm2);
    }
    Ok(MobiusPartial {
        enumerated,
        closed: mobius_l2_closed(ring, eta),
        degree_sums,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EstermannCheck {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub equal: bool,
}

/// `(n + 1)^2 - (n - 1)^2 / q`.
pub fn estermann_rhs(ring: &PolyRing, n: usize) -> BigRational {
    let n = n as i64;
    BigRational::from_integer(BigInt::from((n + 1) * (n + 1)))
        - BigRational::new(BigInt::from((n - 1) * (n - 1)), BigInt::from(ring.q()))
}

/// `(1/q^n) Σ_{f ∈ M_n} d_2(f) d_2(f + h)` by enumeration, for any `h` with `deg h < n`.
pub fn estermann_lhs(ring: &PolyRing, n: usize, h: &Poly, opts: &EnumOpts) -> Result<BigRational> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let raw = stats::shifted_raw(ring, n, 2, h, opts)?;
    Ok(BigRational::new(BigInt::from(raw), BigInt::from(q_pow(ring, n)?)))
}

/// Enumerated left side at `h = 1` against the closed right side.
pub fn estermann_exact(ring: &PolyRing, n: usize, opts: &EnumOpts) -> Result<EstermannCheck> {
    let lhs = estermann_lhs(ring, n, &Poly::one(), opts)?;
    let rhs = estermann_rhs(ring, n);
    Ok(EstermannCheck { equal: lhs == rhs, lhs, rhs })
}

/// Tuples with some degree zero, and the rest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadrupleSplit {
    pub boundary: u64,
    pub interior: u64,
}

/// Closed split: `4n` and `(n - 1)^2`.
pub fn quadruple_decomposition_count(n: usize) -> Result<QuadrupleSplit> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let n = n as u64;
    Ok(QuadrupleSplit {
        boundary: 4 * n,
        interior: (n + 1) * (n + 1) - 4 * n,
    })
}

/// The split counted from [`quadruples`].
pub fn quadruple_decomposition_enumerated(n: usize) -> Result<QuadrupleSplit> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let all = quadruples(n);
    let boundary = all.iter().filter(|p| p.is_boundary()).count() as u64;
    Ok(QuadrupleSplit {
        boundary,
        interior: all.len() as u64 - boundary,
    })
}

/// `Σ S(α, β; γ, δ)` over all tuples of `n`, with each count taken in `mode`.
pub fn reassembled_sum(ring: &PolyRing, n: usize, mode: CountMode, opts: &EnumOpts) -> Result<u128> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    quadruples(n)
        .into_iter()
        .try_fold(0u128, |acc, p| checked_add(acc, s_count(ring, p, mode, opts)?))
}
