//! Finite fields `F_q`, `q = p^e`, with elements stored as dense indices.
//!
//! An element of `F_{p^e}` is a residue `c_0 + c_1 x + ... + c_{e-1} x^{e-1}`
//! modulo a fixed monic irreducible of degree `e` over `F_p`; its index is the
//! base-`p` integer `c_0 + c_1 p + ... + c_{e-1} p^{e-1}`. Index 0 is zero and
//! index 1 is one.
//!
//! Arithmetic is backed by one of four strategies chosen at construction:
//! direct reduction for prime fields, full operation tables for `q <= 2^8`,
//! log/antilog plus Zech tables for `q <= 2^16`, and digit-wise arithmetic
//! with on-the-fly reduction above that.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest field order accepted by [`Field::new`].
pub const MAX_ORDER: u64 = 1 << 20;

const FULL_TABLE_MAX: u32 = 1 << 8;
const LOG_TABLE_MAX: u32 = 1 << 16;
const NO_LOG: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{e} exceeds the supported bound {MAX_ORDER}")]
    TooLarge { p: u64, e: u32 },
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("element index {index} out of range for F_{q}")]
    OutOfRange { index: u64, q: u32 },
    #[error("zero has no multiplicative inverse")]
    InverseOfZero,
}

/// An element of a finite field, identified by its canonical index in `[0, q)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElem(pub u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The parameters that determine a field: characteristic, degree, order and
/// (for `e > 1`) the defining modulus over `F_p`, low-to-high coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    pub p: u32,
    pub e: u32,
    pub q: u32,
    pub modulus: Option<Vec<u32>>,
}

enum Arith {
    Prime {
        inv: Option<Vec<u32>>,
    },
    Full {
        add: Vec<u32>,
        mul: Vec<u32>,
        neg: Vec<u32>,
        inv: Vec<u32>,
    },
    Log {
        exp: Vec<u32>,
        log: Vec<u32>,
        zech: Vec<u32>,
        neg: Vec<u32>,
    },
    Digits,
}

struct Inner {
    spec: FieldSpec,
    arith: Arith,
}

/// A finite field. Cloning is cheap; the tables are shared.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p())
            .field("e", &self.e())
            .field("modulus", &self.inner.spec.modulus)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.spec == other.inner.spec
    }
}

impl Eq for Field {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Writes `q = p^e` when `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p as u32, e))
}

impl Field {
    /// Builds `F_{p^e}`. For `e > 1` the modulus is the monic irreducible of
    /// degree `e` over `F_p` whose lower coefficients, read as a base-`p`
    /// integer with the constant term least significant, are smallest.
    pub fn new(p: u64, e: u32) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if e == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = p
            .checked_pow(e)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or(FieldError::TooLarge { p, e })?;
        let (p, q) = (p as u32, q as u32);
        let modulus = (e > 1).then(|| smallest_irreducible(p, e));
        let spec = FieldSpec { p, e, q, modulus };
        let arith = build_arith(&spec);
        Ok(Field {
            inner: Arc::new(Inner { spec, arith }),
        })
    }

    /// Builds the field of order `q`, which must be a prime power.
    pub fn with_order(q: u64) -> Result<Self, FieldError> {
        let (p, e) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        Field::new(p as u64, e)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.inner.spec
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.inner.spec.p
    }

    #[inline]
    pub fn e(&self) -> u32 {
        self.inner.spec.e
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.inner.spec.q
    }

    pub fn modulus(&self) -> Option<&[u32]> {
        self.inner.spec.modulus.as_deref()
    }

    pub fn elem(&self, index: u64) -> Result<FieldElem, FieldError> {
        if index < self.q() as u64 {
            Ok(FieldElem(index as u32))
        } else {
            Err(FieldError::OutOfRange {
                index,
                q: self.q(),
            })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q()).map(FieldElem)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.p() as i64) as u32)
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let spec = &self.inner.spec;
        match &self.inner.arith {
            Arith::Prime { .. } => {
                let s = a.0 + b.0;
                FieldElem(if s >= spec.q { s - spec.q } else { s })
            }
            Arith::Full { add, .. } => FieldElem(add[(a.0 * spec.q + b.0) as usize]),
            Arith::Log { exp, log, zech, .. } => {
                if a.0 == 0 {
                    return b;
                }
                if b.0 == 0 {
                    return a;
                }
                let order = spec.q - 1;
                let (la, lb) = (log[a.0 as usize], log[b.0 as usize]);
                let d = if lb >= la { lb - la } else { lb + order - la };
                match zech[d as usize] {
                    NO_LOG => FieldElem::ZERO,
                    z => FieldElem(exp[(la + z) as usize]),
                }
            }
            Arith::Digits => FieldElem(digit_add(spec.p, a.0, b.0)),
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        let spec = &self.inner.spec;
        match &self.inner.arith {
            Arith::Prime { .. } => FieldElem(if a.0 == 0 { 0 } else { spec.q - a.0 }),
            Arith::Full { neg, .. } | Arith::Log { neg, .. } => FieldElem(neg[a.0 as usize]),
            Arith::Digits => FieldElem(digit_neg(spec.p, a.0)),
        }
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let spec = &self.inner.spec;
        match &self.inner.arith {
            Arith::Prime { .. } => FieldElem(((a.0 as u64 * b.0 as u64) % spec.q as u64) as u32),
            Arith::Full { mul, .. } => FieldElem(mul[(a.0 * spec.q + b.0) as usize]),
            Arith::Log { exp, log, .. } => {
                if a.0 == 0 || b.0 == 0 {
                    FieldElem::ZERO
                } else {
                    FieldElem(exp[(log[a.0 as usize] + log[b.0 as usize]) as usize])
                }
            }
            Arith::Digits => FieldElem(digit_mul(spec, a.0, b.0)),
        }
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem, FieldError> {
        if a.is_zero() {
            return Err(FieldError::InverseOfZero);
        }
        let spec = &self.inner.spec;
        Ok(match &self.inner.arith {
            Arith::Prime { inv: Some(inv) } | Arith::Full { inv, .. } => FieldElem(inv[a.0 as usize]),
            Arith::Log { exp, log, .. } => {
                let order = spec.q - 1;
                FieldElem(exp[((order - log[a.0 as usize]) % order) as usize])
            }
            Arith::Prime { inv: None } | Arith::Digits => self.pow(a, spec.q as u64 - 2),
        })
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElem, mut m: u64) -> FieldElem {
        let mut base = a;
        let mut acc = FieldElem::ONE;
        while m > 0 {
            if m & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            m >>= 1;
        }
        acc
    }

    /// `a ↦ a^p`; its `e`-fold iterate is the identity.
    pub fn frobenius(&self, a: FieldElem) -> FieldElem {
        self.pow(a, self.p() as u64)
    }

    /// Inverse of the Frobenius map, `a ↦ a^{q/p}`.
    pub fn frobenius_inv(&self, a: FieldElem) -> FieldElem {
        self.pow(a, (self.q() / self.p()) as u64)
    }
}

fn digits(p: u32, e: u32, mut x: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(e as usize);
    for _ in 0..e {
        out.push(x % p);
        x /= p;
    }
    out
}

fn undigits(p: u32, ds: &[u32]) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn digit_add(p: u32, mut a: u32, mut b: u32) -> u32 {
    if p == 2 {
        return a ^ b;
    }
    let (mut out, mut scale) = (0, 1);
    while a > 0 || b > 0 {
        out += ((a % p + b % p) % p) * scale;
        scale *= p;
        a /= p;
        b /= p;
    }
    out
}

fn digit_neg(p: u32, mut a: u32) -> u32 {
    if p == 2 {
        return a;
    }
    let (mut out, mut scale) = (0, 1);
    while a > 0 {
        out += ((p - a % p) % p) * scale;
        scale *= p;
        a /= p;
    }
    out
}

fn digit_mul(spec: &FieldSpec, a: u32, b: u32) -> u32 {
    let (p, e) = (spec.p, spec.e);
    let modulus = match &spec.modulus {
        Some(m) => m,
        None => return ((a as u64 * b as u64) % p as u64) as u32,
    };
    let (da, db) = (digits(p, e, a), digits(p, e, b));
    let mut prod = fp_mul(p, &da, &db);
    fp_reduce(p, &mut prod, modulus);
    prod.resize(e as usize, 0);
    undigits(p, &prod)
}

/// Product of two coefficient vectors over `F_p`.
fn fp_mul(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x as u64 * y as u64;
        }
    }
    out.into_iter().map(|c| (c % p as u64) as u32).collect()
}

/// Reduces `a` in place modulo the monic `m` over `F_p`; leaves trailing zeros trimmed.
fn fp_reduce(p: u32, a: &mut Vec<u32>, m: &[u32]) {
    let dm = m.len() - 1;
    while let Some(&0) = a.last() {
        a.pop();
    }
    while a.len() > dm {
        let top = a.len() - 1;
        let c = a[top];
        if c != 0 {
            let shift = top - dm;
            for (i, &mi) in m.iter().enumerate() {
                let sub = (c as u64 * mi as u64 % p as u64) as u32;
                a[shift + i] = (a[shift + i] + p - sub) % p;
            }
        }
        a.pop();
        while let Some(&0) = a.last() {
            a.pop();
        }
    }
}

/// True iff the monic `f` over `F_p` has no monic divisor of degree `1..=deg/2`.
fn fp_irreducible_by_trial(p: u32, f: &[u32]) -> bool {
    let n = f.len() - 1;
    for d in 1..=n / 2 {
        for idx in 0..(p as u64).pow(d as u32) {
            let mut g = digits(p, d as u32, idx as u32);
            g.push(1);
            let mut r = f.to_vec();
            fp_reduce(p, &mut r, &g);
            if r.is_empty() {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(p: u32, e: u32) -> Vec<u32> {
    let count = (p as u64).pow(e);
    (0..count)
        .map(|idx| {
            let mut m = digits(p, e, idx as u32);
            m.push(1);
            m
        })
        .find(|m| fp_irreducible_by_trial(p, m))
        .expect("an irreducible of every degree exists over F_p")
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn digit_pow(spec: &FieldSpec, a: u32, mut m: u64) -> u32 {
    let (mut base, mut acc) = (a, 1);
    while m > 0 {
        if m & 1 == 1 {
            acc = digit_mul(spec, acc, base);
        }
        base = digit_mul(spec, base, base);
        m >>= 1;
    }
    acc
}

fn primitive_element(spec: &FieldSpec) -> u32 {
    let order = spec.q - 1;
    let factors = prime_factors(order);
    (2..spec.q)
        .find(|&g| {
            factors
                .iter()
                .all(|&r| digit_pow(spec, g, (order / r) as u64) != 1)
        })
        .expect("the multiplicative group is cyclic")
}

fn build_arith(spec: &FieldSpec) -> Arith {
    let q = spec.q;
    if spec.e == 1 {
        let inv = (q <= LOG_TABLE_MAX).then(|| {
            let mut inv = vec![0u32; q as usize];
            for a in 1..q {
                inv[a as usize] = digit_pow(spec, a, q as u64 - 2);
            }
            inv
        });
        return Arith::Prime { inv };
    }
    let neg_table = || (0..q).map(|a| digit_neg(spec.p, a)).collect::<Vec<_>>();
    if q <= FULL_TABLE_MAX {
        let n = q as usize;
        let mut add = vec![0u32; n * n];
        let mut mul = vec![0u32; n * n];
        for a in 0..q {
            for b in 0..q {
                add[(a * q + b) as usize] = digit_add(spec.p, a, b);
                mul[(a * q + b) as usize] = digit_mul(spec, a, b);
            }
        }
        let mut inv = vec![0u32; n];
        for a in 1..q {
            let b = (1..q)
                .find(|&b| mul[(a * q + b) as usize] == 1)
                .expect("nonzero elements are invertible");
            inv[a as usize] = b;
        }
        return Arith::Full {
            add,
            mul,
            neg: neg_table(),
            inv,
        };
    }
    if q <= LOG_TABLE_MAX {
        let order = q - 1;
        let g = primitive_element(spec);
        // exp is doubled so that exp[log a + log b] needs no reduction.
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![NO_LOG; q as usize];
        let mut x = 1u32;
        for i in 0..order {
            exp[i as usize] = x;
            exp[(i + order) as usize] = x;
            log[x as usize] = i;
            x = digit_mul(spec, x, g);
        }
        let zech = (0..order)
            .map(|n| match digit_add(spec.p, 1, exp[n as usize]) {
                0 => NO_LOG,
                s => log[s as usize],
            })
            .collect();
        return Arith::Log {
            exp,
            log,
            zech,
            neg: neg_table(),
        };
    }
    Arith::Digits
}
