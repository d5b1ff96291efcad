//! Irreducibility, factorization into monic irreducibles, cycle structure,
//! and enumeration of the monic irreducibles `P_n` of a given degree.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::combinatorics::{integer_mobius, Partition};
use crate::gf::FieldElem;
use crate::poly::{Poly, PolyError, PolyRing};

/// Seed of the generator that drives equal-degree splitting.
pub const SPLIT_SEED: u64 = 0x5eed_f00d;

/// Splitting attempts before switching to trial division on small inputs.
const SPLIT_ATTEMPTS: usize = 256;
/// Trial division by cached irreducibles is available when `q^deg` is at most this.
const TRIAL_DIVISION_MAX: u128 = 10_000;

/// Environment variable naming the on-disk irreducible cache directory.
pub const CACHE_ENV: &str = "FFDIVISOR_CACHE";

/// The cycle structure of a polynomial is a partition of its degree.
pub type CycleType = Partition;

/// Monic irreducible factors with multiplicities, sorted by `(degree, MonicIndex)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Factorization {
    factors: Vec<(Poly, u32)>,
}

impl Factorization {
    pub fn factors(&self) -> &[(Poly, u32)] {
        &self.factors
    }

    /// Exponents of the prime powers, in factor order.
    pub fn exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.factors.iter().map(|(_, m)| *m)
    }

    pub fn degree(&self) -> usize {
        self.factors
            .iter()
            .map(|(p, m)| p.degree().unwrap_or(0) * *m as usize)
            .sum()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|(_, m)| *m == 1)
    }

    /// Number of irreducible factors counted with multiplicity.
    pub fn num_factors(&self) -> u32 {
        self.exponents().sum()
    }

    pub fn reconstruct(&self, ring: &PolyRing) -> Poly {
        self.factors
            .iter()
            .fold(Poly::one(), |acc, (p, m)| ring.mul(&acc, &ring.pow(p, *m)))
    }

    /// `λ_j` counts factors of degree `j` with multiplicity.
    pub fn cycle_type(&self) -> CycleType {
        let mut lam = vec![0u32; self.degree()];
        for (p, m) in &self.factors {
            lam[p.degree().expect("irreducibles are nonconstant") - 1] += m;
        }
        Partition::from_multiplicities(lam).expect("a factorization partitions its degree")
    }
}

fn require_monic_nonconstant(f: &Poly) -> Result<usize, PolyError> {
    if !f.is_monic() {
        return Err(if f.is_zero() {
            PolyError::Constant
        } else {
            PolyError::NotMonic
        });
    }
    match f.degree() {
        Some(0) | None => Err(PolyError::Constant),
        Some(n) => Ok(n),
    }
}

/// Distinct-degree sieve: `f` is irreducible iff `gcd(f, t^{q^i} - t) = 1` for `i <= deg/2`.
pub fn is_irreducible(ring: &PolyRing, f: &Poly) -> Result<bool, PolyError> {
    let n = require_monic_nonconstant(f)?;
    if n == 1 {
        return Ok(true);
    }
    let q = ring.q() as u128;
    let t = ring.t();
    let mut h = ring.rem(&t, f)?;
    for _ in 1..=n / 2 {
        h = ring.pow_mod(&h, q, f);
        if !ring.gcd(f, &ring.sub(&h, &t))?.is_one() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Full factorization: squarefree decomposition, distinct-degree splitting,
/// then Cantor–Zassenhaus equal-degree splitting.
pub fn factorize(ring: &PolyRing, f: &Poly) -> Result<Factorization, PolyError> {
    require_monic_nonconstant(f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED);
    let mut factors = Vec::new();
    for (part, mult) in squarefree_decomposition(ring, f) {
        for (d, block) in distinct_degree(ring, &part) {
            for prime in equal_degree(ring, &block, d, &mut rng) {
                factors.push((prime, mult));
            }
        }
    }
    Ok(sorted(ring, factors))
}

fn sorted(ring: &PolyRing, mut factors: Vec<(Poly, u32)>) -> Factorization {
    factors.sort_by_cached_key(|(p, _)| (p.degree(), ring.monic_index(p).expect("monic")));
    Factorization { factors }
}

/// Pairwise coprime squarefree monic parts `(g, m)` with `f = ∏ g^m`.
pub fn squarefree_decomposition(ring: &PolyRing, f: &Poly) -> Vec<(Poly, u32)> {
    let p = ring.field().p();
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let df = ring.derivative(f);
    if df.is_zero() {
        for (g, m) in squarefree_decomposition(ring, &ring.pth_root(f)) {
            out.push((g, m * p));
        }
        return out;
    }
    let mut c = ring.gcd(f, &df).expect("f nonzero");
    let mut w = ring.div_exact(f, &c);
    let mut i = 1;
    while !w.is_one() {
        let y = ring.gcd(&w, &c).expect("w nonzero");
        let part = ring.div_exact(&w, &y);
        if !part.is_one() {
            out.push((part, i));
        }
        c = ring.div_exact(&c, &y);
        w = y;
        i += 1;
    }
    if !c.is_one() {
        for (g, m) in squarefree_decomposition(ring, &ring.pth_root(&c)) {
            out.push((g, m * p));
        }
    }
    out
}

/// Splits a squarefree monic `f` into `(d, product of its degree-d irreducible factors)`.
pub fn distinct_degree(ring: &PolyRing, f: &Poly) -> Vec<(usize, Poly)> {
    let q = ring.q() as u128;
    let t = ring.t();
    let mut out = Vec::new();
    let mut rest = f.clone();
    let mut h = ring.rem(&t, &rest).expect("nonzero");
    let mut d = 1;
    while rest.degree().unwrap_or(0) >= 2 * d {
        h = ring.pow_mod(&h, q, &rest);
        let g = ring.gcd(&rest, &ring.sub(&h, &t)).expect("nonzero");
        if !g.is_one() {
            rest = ring.div_exact(&rest, &g);
            h = ring.rem(&h, &rest).expect("nonzero");
            out.push((d, g));
        }
        d += 1;
    }
    if let Some(n) = rest.degree().filter(|&n| n > 0) {
        out.push((n, rest));
    }
    out
}

/// Splits a product of distinct monic irreducibles of degree `d`.
pub fn equal_degree(ring: &PolyRing, f: &Poly, d: usize, rng: &mut ChaCha8Rng) -> Vec<Poly> {
    let n = f.degree().unwrap_or(0);
    if n == d {
        return vec![f.clone()];
    }
    for _ in 0..SPLIT_ATTEMPTS {
        let a = random_below(ring, n, rng);
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let b = splitting_element(ring, &a, f, d);
        let g = ring.gcd(f, &b).expect("f nonzero");
        let dg = g.degree().unwrap_or(0);
        if dg > 0 && dg < n {
            let other = ring.div_exact(f, &g);
            let mut out = equal_degree(ring, &g, d, rng);
            out.extend(equal_degree(ring, &other, d, rng));
            return out;
        }
    }
    if ring.norm(f) <= TRIAL_DIVISION_MAX {
        return factorize_by_trial(ring, f)
            .expect("monic nonconstant")
            .factors
            .into_iter()
            .map(|(p, _)| p)
            .collect();
    }
    equal_degree(ring, f, d, rng)
}

fn random_below(ring: &PolyRing, n: usize, rng: &mut ChaCha8Rng) -> Poly {
    let q = ring.q();
    Poly::new((0..n).map(|_| FieldElem(rng.gen_range(0..q))).collect())
}

/// `a^{(q^d-1)/2} - 1` for odd `q`; the absolute trace `Σ a^{2^i}` for even `q`.
fn splitting_element(ring: &PolyRing, a: &Poly, f: &Poly, d: usize) -> Poly {
    let field = ring.field();
    let q = field.q() as u128;
    if field.p() == 2 {
        let steps = field.e() as usize * d;
        let mut acc = a.clone();
        let mut power = a.clone();
        for _ in 1..steps {
            power = ring.mul_mod(&power, &power, f);
            acc = ring.add(&acc, &power);
        }
        acc
    } else {
        // (q^d - 1)/2 = ((q - 1)/2) · (1 + q + ... + q^{d-1})
        let mut norm = a.clone();
        let mut frob = a.clone();
        for _ in 1..d {
            frob = ring.pow_mod(&frob, q, f);
            norm = ring.mul_mod(&norm, &frob, f);
        }
        let b = ring.pow_mod(&norm, (q - 1) / 2, f);
        ring.sub(&b, &Poly::one())
    }
}

/// Factorization by trial division over the irreducibles of degree `<= deg/2`.
pub fn factorize_by_trial(ring: &PolyRing, f: &Poly) -> Result<Factorization, PolyError> {
    let n = require_monic_nonconstant(f)?;
    let mut rest = f.clone();
    let mut factors = Vec::new();
    for d in 1..=n / 2 {
        if rest.degree().unwrap_or(0) < 2 * d {
            break;
        }
        for prime in primes_of_degree(ring, d).iter() {
            let mut mult = 0;
            loop {
                let (quot, rem) = ring.divrem(&rest, prime)?;
                if !rem.is_zero() {
                    break;
                }
                rest = quot;
                mult += 1;
            }
            if mult > 0 {
                factors.push((prime.clone(), mult));
            }
        }
    }
    if rest.degree().unwrap_or(0) > 0 {
        factors.push((rest, 1));
    }
    Ok(sorted(ring, factors))
}

pub fn cycle_structure(ring: &PolyRing, f: &Poly) -> Result<CycleType, PolyError> {
    Ok(factorize(ring, f)?.cycle_type())
}

/// `π_q(n) = (1/n) Σ_{d | n} μ(d) q^{n/d}`.
pub fn prime_count(q: u64, n: usize) -> BigUint {
    assert!(n >= 1, "prime_count needs n >= 1");
    let q = BigInt::from(q);
    let mut total = BigInt::zero();
    for d in (1..=n).filter(|d| n.is_multiple_of(*d)) {
        let mu = integer_mobius(d as u64);
        if mu != 0 {
            total += BigInt::from(mu) * q.pow((n / d) as u32);
        }
    }
    let count = total / BigInt::from(n);
    debug_assert!(!count.is_negative());
    count.to_biguint().expect("non-negative")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct CacheKey {
    p: u32,
    e: u32,
    modulus: Option<Vec<u32>>,
    n: usize,
}

type Cache = RwLock<HashMap<CacheKey, Arc<Vec<Poly>>>>;

fn memory_cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// All monic irreducibles of degree `n` in MonicIndex order, cached per field and degree.
pub fn primes_of_degree(ring: &PolyRing, n: usize) -> Arc<Vec<Poly>> {
    assert!(n >= 1, "primes_of_degree needs n >= 1");
    let spec = ring.field().spec();
    let key = CacheKey {
        p: spec.p,
        e: spec.e,
        modulus: spec.modulus.clone(),
        n,
    };
    if let Some(hit) = memory_cache().read().expect("cache lock").get(&key) {
        return hit.clone();
    }
    let dir = std::env::var_os(CACHE_ENV).map(PathBuf::from);
    let primes = dir
        .as_deref()
        .and_then(|d| load_cache_file(ring, n, &cache_path(d, ring, n)).ok())
        .unwrap_or_else(|| {
            let primes = enumerate_primes(ring, n);
            if let Some(d) = dir.as_deref() {
                // A failed write only costs a recomputation next time.
                let _ = store_cache_file(ring, n, &primes, d);
            }
            primes
        });
    let primes = Arc::new(primes);
    memory_cache()
        .write()
        .expect("cache lock")
        .entry(key)
        .or_insert(primes)
        .clone()
}

fn enumerate_primes(ring: &PolyRing, n: usize) -> Vec<Poly> {
    ring.monic_iter(n)
        .filter(|f| is_irreducible(ring, f).expect("monic nonconstant"))
        .collect()
}

pub fn cache_path(dir: &Path, ring: &PolyRing, n: usize) -> PathBuf {
    let spec = ring.field().spec();
    let modulus = spec
        .modulus
        .as_ref()
        .map(|m| m.iter().map(u32::to_string).collect::<Vec<_>>().join("-"))
        .unwrap_or_else(|| "prime".to_string());
    dir.join(format!("irr_p{}_e{}_m{}_n{}.txt", spec.p, spec.e, modulus, n))
}

/// Header line plus one polynomial per line.
pub fn format_cache(ring: &PolyRing, n: usize, primes: &[Poly]) -> String {
    let mut out = format!("q={} n={} count={}\n", ring.q(), n, primes.len());
    for p in primes {
        out.push_str(&p.to_string());
        out.push('\n');
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CacheError {
    #[error("cache header malformed: {0:?}")]
    Header(String),
    #[error("cache is for q={q} n={n}")]
    Mismatch { q: u64, n: usize },
    #[error("cache declares {declared} entries but holds {found}")]
    Count { declared: usize, found: usize },
    #[error("cache line {line}: {reason}")]
    Entry { line: usize, reason: String },
}

/// Parses and validates cache text: every entry must be a distinct monic
/// irreducible of degree `n`, in increasing MonicIndex order, and the count
/// must equal `π_q(n)`.
pub fn parse_cache(ring: &PolyRing, n: usize, text: &str) -> Result<Vec<Poly>, CacheError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let fields: Vec<_> = header.split(' ').collect();
    let value = |i: usize, key: &str| -> Result<u64, CacheError> {
        fields
            .get(i)
            .and_then(|f| f.strip_prefix(key))
            .and_then(|v| v.strip_prefix('='))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| CacheError::Header(header.to_string()))
    };
    if fields.len() != 3 {
        return Err(CacheError::Header(header.to_string()));
    }
    let (q, hn, declared) = (value(0, "q")?, value(1, "n")?, value(2, "count")?);
    if q != ring.q() as u64 || hn != n as u64 {
        return Err(CacheError::Mismatch { q, n: hn as usize });
    }
    let mut primes = Vec::new();
    let mut last: Option<u64> = None;
    for (i, line) in lines.enumerate() {
        let entry = |reason: &str| CacheError::Entry {
            line: i + 2,
            reason: reason.to_string(),
        };
        let f = ring.parse(line).map_err(|e| entry(&e.to_string()))?;
        if !f.is_monic() || f.degree() != Some(n) {
            return Err(entry("not monic of the declared degree"));
        }
        let idx = ring.monic_index(&f).expect("monic");
        if last.is_some_and(|l| l >= idx) {
            return Err(entry("entries out of order"));
        }
        last = Some(idx);
        if !is_irreducible(ring, &f).expect("monic nonconstant") {
            return Err(entry("reducible entry"));
        }
        primes.push(f);
    }
    if declared != primes.len() as u64 {
        return Err(CacheError::Count {
            declared: declared as usize,
            found: primes.len(),
        });
    }
    let expected = prime_count(ring.q() as u64, n);
    if expected.to_usize() != Some(primes.len()) {
        return Err(CacheError::Count {
            declared: expected.to_usize().unwrap_or(usize::MAX),
            found: primes.len(),
        });
    }
    Ok(primes)
}

fn load_cache_file(ring: &PolyRing, n: usize, path: &Path) -> Result<Vec<Poly>, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_cache(ring, n, &text)?)
}

fn store_cache_file(ring: &PolyRing, n: usize, primes: &[Poly], dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = cache_path(dir, ring, n);
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, format_cache(ring, n, primes))?;
    std::fs::rename(tmp, path)
}

/// `μ(f)` for monic nonzero `f`.
pub fn mobius(ring: &PolyRing, f: &Poly) -> Result<i32, PolyError> {
    if !f.is_monic() {
        return Err(PolyError::NotMonic);
    }
    if f.is_one() {
        return Ok(1);
    }
    let fac = factorize(ring, f)?;
    Ok(if !fac.is_squarefree() {
        0
    } else if fac.num_factors() % 2 == 0 {
        1
    } else {
        -1
    })
}

/// `Σ_{d ∈ M_ξ} μ(d)` by enumeration.
pub fn mobius_degree_sum(ring: &PolyRing, xi: usize) -> i64 {
    ring.monic_iter(xi)
        .map(|d| mobius(ring, &d).expect("monic") as i64)
        .sum()
}

/// Exact check that a factorization multiplies back to `f`.
pub fn reconstructs(ring: &PolyRing, fac: &Factorization, f: &Poly) -> bool {
    fac.reconstruct(ring) == *f
        && fac
            .factors
            .iter()
            .all(|(p, m)| *m >= 1 && p.is_monic() && p.degree().unwrap_or(0) >= 1)
}
