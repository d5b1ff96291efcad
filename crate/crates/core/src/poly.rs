//! Polynomials over `F_q`, arithmetic in `F_q[t]`, and enumeration of the
//! monic polynomials `M_n` of a fixed degree.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::gf::{Field, FieldElem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("gcd(0, 0) is undefined")]
    GcdOfZeros,
    #[error("expected a monic polynomial")]
    NotMonic,
    #[error("expected a polynomial of positive degree")]
    Constant,
    #[error("monic index {idx} out of range for degree {n} over F_{q}")]
    IndexOutOfRange { idx: u64, n: usize, q: u32 },
    #[error("malformed polynomial text {text:?}: {reason}")]
    Parse { text: String, reason: String },
}

/// A polynomial with coefficients stored low-to-high and no trailing zeros.
/// The zero polynomial has an empty coefficient vector and no degree.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    coeffs: Vec<FieldElem>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<FieldElem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly {
            coeffs: vec![FieldElem::ONE],
        }
    }

    pub fn constant(c: FieldElem) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `t^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![FieldElem::ZERO; n + 1];
        coeffs[n] = FieldElem::ONE;
        Poly { coeffs }
    }

    /// `None` for the zero polynomial.
    #[inline]
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [FieldElem::ONE]
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&FieldElem::ONE)
    }

    pub fn leading(&self) -> Option<FieldElem> {
        self.coeffs.last().copied()
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.coeffs.get(i).copied().unwrap_or(FieldElem::ZERO)
    }

    pub fn into_coeffs(self) -> Vec<FieldElem> {
        self.coeffs
    }
}

impl fmt::Display for Poly {
    /// The comma-separated coefficient text, `0` for the zero polynomial.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", c.0)?;
        }
        Ok(())
    }
}

/// `F_q[t]` for a fixed field. Cheap to clone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyRing {
    field: Field,
}

impl PolyRing {
    pub fn new(field: Field) -> Self {
        PolyRing { field }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.field.q()
    }

    /// The variable `t`.
    pub fn t(&self) -> Poly {
        Poly::monomial(1)
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        let (long, short) = if a.coeffs.len() >= b.coeffs.len() {
            (a, b)
        } else {
            (b, a)
        };
        let mut out = long.coeffs.clone();
        for (o, &s) in out.iter_mut().zip(&short.coeffs) {
            *o = self.field.add(*o, s);
        }
        Poly::new(out)
    }

    pub fn neg(&self, a: &Poly) -> Poly {
        Poly {
            coeffs: a.coeffs.iter().map(|&c| self.field.neg(c)).collect(),
        }
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        let n = a.coeffs.len().max(b.coeffs.len());
        let out = (0..n)
            .map(|i| self.field.sub(a.coeff(i), b.coeff(i)))
            .collect();
        Poly::new(out)
    }

    pub fn scale(&self, a: &Poly, c: FieldElem) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            coeffs: a.coeffs.iter().map(|&x| self.field.mul(x, c)).collect(),
        }
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let f = &self.field;
        let mut out = vec![FieldElem::ZERO; a.coeffs.len() + b.coeffs.len() - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(x, y));
            }
        }
        Poly::new(out)
    }

    /// `(quotient, remainder)` with `a = quotient·b + remainder`, `deg remainder < deg b`.
    pub fn divrem(&self, a: &Poly, b: &Poly) -> Result<(Poly, Poly), PolyError> {
        let db = b.degree().ok_or(PolyError::DivisionByZero)?;
        let f = &self.field;
        let lead_inv = f.inv(b.coeffs[db]).expect("nonzero leading coefficient");
        let mut rem = a.coeffs.clone();
        if rem.len() <= db {
            return Ok((Poly::zero(), a.clone()));
        }
        let mut quot = vec![FieldElem::ZERO; rem.len() - db];
        for top in (db..rem.len()).rev() {
            let c = rem[top];
            if c.is_zero() {
                continue;
            }
            let factor = f.mul(c, lead_inv);
            let shift = top - db;
            quot[shift] = factor;
            for (i, &bc) in b.coeffs.iter().enumerate() {
                rem[shift + i] = f.sub(rem[shift + i], f.mul(factor, bc));
            }
        }
        rem.truncate(db);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    pub fn rem(&self, a: &Poly, b: &Poly) -> Result<Poly, PolyError> {
        let db = b.degree().ok_or(PolyError::DivisionByZero)?;
        if a.coeffs.len() <= db {
            return Ok(a.clone());
        }
        let f = &self.field;
        let monic = b.is_monic();
        let lead_inv = f.inv(b.coeffs[db]).expect("nonzero leading coefficient");
        let mut rem = a.coeffs.clone();
        for top in (db..rem.len()).rev() {
            let c = rem[top];
            if c.is_zero() {
                continue;
            }
            let factor = if monic { c } else { f.mul(c, lead_inv) };
            let shift = top - db;
            for (i, &bc) in b.coeffs[..db].iter().enumerate() {
                rem[shift + i] = f.sub(rem[shift + i], f.mul(factor, bc));
            }
        }
        rem.truncate(db);
        Ok(Poly::new(rem))
    }

    /// Exact quotient; the caller guarantees `b | a`.
    pub fn div_exact(&self, a: &Poly, b: &Poly) -> Poly {
        let (quot, rem) = self.divrem(a, b).expect("nonzero divisor");
        debug_assert!(rem.is_zero(), "div_exact with nonzero remainder");
        quot
    }

    pub fn divides(&self, d: &Poly, a: &Poly) -> bool {
        self.rem(a, d).map(|r| r.is_zero()).unwrap_or(false)
    }

    /// Scales a nonzero polynomial to be monic; zero stays zero.
    pub fn monic(&self, a: &Poly) -> Poly {
        match a.leading() {
            None => Poly::zero(),
            Some(FieldElem::ONE) => a.clone(),
            Some(c) => self.scale(a, self.field.inv(c).expect("nonzero")),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, a: &Poly, b: &Poly) -> Result<Poly, PolyError> {
        if a.is_zero() && b.is_zero() {
            return Err(PolyError::GcdOfZeros);
        }
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let r = self.rem(&x, &y)?;
            x = y;
            y = r;
        }
        Ok(self.monic(&x))
    }

    pub fn coprime(&self, a: &Poly, b: &Poly) -> bool {
        self.gcd(a, b).map(|g| g.is_one()).unwrap_or(false)
    }

    pub fn derivative(&self, a: &Poly) -> Poly {
        let f = &self.field;
        let out = a
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| f.mul(c, f.from_int(i as i64)))
            .collect();
        Poly::new(out)
    }

    /// `gcd(f, f') = 1` with `f' ≠ 0`; a `p`-th power is never squarefree.
    pub fn is_squarefree(&self, a: &Poly) -> Result<bool, PolyError> {
        match a.degree() {
            None | Some(0) => Err(PolyError::Constant),
            Some(_) => {
                let d = self.derivative(a);
                if d.is_zero() {
                    return Ok(false);
                }
                Ok(self.gcd(a, &d)?.is_one())
            }
        }
    }

    /// `|f| = q^deg f`, with `|0| = 0`.
    pub fn norm(&self, a: &Poly) -> u128 {
        match a.degree() {
            None => 0,
            Some(d) => (self.q() as u128).pow(d as u32),
        }
    }

    pub fn mul_mod(&self, a: &Poly, b: &Poly, m: &Poly) -> Poly {
        self.rem(&self.mul(a, b), m).expect("nonzero modulus")
    }

    pub fn pow_mod(&self, a: &Poly, mut e: u128, m: &Poly) -> Poly {
        let mut base = self.rem(a, m).expect("nonzero modulus");
        let mut acc = self.rem(&Poly::one(), m).expect("nonzero modulus");
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_mod(&acc, &base, m);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul_mod(&base, &base, m);
            }
        }
        acc
    }

    pub fn pow(&self, a: &Poly, e: u32) -> Poly {
        (0..e).fold(Poly::one(), |acc, _| self.mul(&acc, a))
    }

    /// Applies the inverse Frobenius coefficient-wise and `t^p ↦ t`.
    /// The caller guarantees every exponent with a nonzero coefficient is a multiple of `p`.
    pub fn pth_root(&self, a: &Poly) -> Poly {
        let p = self.field.p() as usize;
        let out = a
            .coeffs
            .iter()
            .step_by(p)
            .map(|&c| self.field.frobenius_inv(c))
            .collect();
        Poly::new(out)
    }

    /// `#M_n = q^n`.
    pub fn monic_count(&self, n: usize) -> u64 {
        (self.q() as u64).pow(n as u32)
    }

    /// The monic polynomial of degree `n` whose lower `n` coefficients are the
    /// base-`q` digits of `idx`, constant coefficient least significant.
    pub fn monic_from_index(&self, n: usize, idx: u64) -> Result<Poly, PolyError> {
        let q = self.q() as u64;
        if idx >= self.monic_count(n) {
            return Err(PolyError::IndexOutOfRange {
                idx,
                n,
                q: self.q(),
            });
        }
        let mut coeffs = Vec::with_capacity(n + 1);
        let mut rest = idx;
        for _ in 0..n {
            coeffs.push(FieldElem((rest % q) as u32));
            rest /= q;
        }
        coeffs.push(FieldElem::ONE);
        Ok(Poly { coeffs })
    }

    pub fn monic_index(&self, f: &Poly) -> Result<u64, PolyError> {
        if !f.is_monic() {
            return Err(PolyError::NotMonic);
        }
        let q = self.q() as u64;
        let n = f.coeffs.len() - 1;
        Ok(f.coeffs[..n]
            .iter()
            .rev()
            .fold(0u64, |acc, c| acc * q + c.0 as u64))
    }

    pub fn monic_iter(&self, n: usize) -> MonicIter {
        self.monic_range(n, 0..self.monic_count(n))
    }

    /// The polynomials of `M_n` with MonicIndex in `range`, in increasing order.
    pub fn monic_range(&self, n: usize, range: Range<u64>) -> MonicIter {
        let end = range.end.min(self.monic_count(n));
        let start = range.start.min(end);
        let current = self
            .monic_from_index(n, start.min(self.monic_count(n) - 1))
            .expect("in range");
        MonicIter {
            q: self.q(),
            current,
            next_idx: start,
            end,
        }
    }

    /// Every polynomial of degree below `d`, ordered by the base-`q` value of
    /// its coefficients.
    pub fn residues(&self, d: usize) -> impl Iterator<Item = Poly> + '_ {
        self.monic_iter(d).map(|f| {
            let mut coeffs = f.into_coeffs();
            coeffs.pop();
            Poly::new(coeffs)
        })
    }

    /// Parses the comma-separated coefficient text produced by `Display`.
    pub fn parse(&self, text: &str) -> Result<Poly, PolyError> {
        let err = |reason: &str| PolyError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let text_trim = text.trim();
        if text_trim.is_empty() {
            return Err(err("empty"));
        }
        let mut coeffs = Vec::new();
        for token in text_trim.split(',') {
            let token = token.trim();
            if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err("coefficients must be non-negative decimal integers"));
            }
            let value: u64 = token.parse().map_err(|_| err("coefficient overflow"))?;
            if value >= self.q() as u64 {
                return Err(err("coefficient outside the field"));
            }
            coeffs.push(FieldElem(value as u32));
        }
        Ok(Poly::new(coeffs))
    }
}

/// A shift given either literally or as a token instantiated per field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PolyPattern {
    /// The constant `1`.
    One,
    /// The monomial `t`.
    T,
    /// Coefficient text, low to high.
    Literal(String),
}

impl PolyPattern {
    pub fn instantiate(&self, ring: &PolyRing) -> Result<Poly, PolyError> {
        match self {
            PolyPattern::One => Ok(Poly::one()),
            PolyPattern::T => Ok(ring.t()),
            PolyPattern::Literal(text) => ring.parse(text),
        }
    }
}

impl fmt::Display for PolyPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyPattern::One => f.write_str("one"),
            PolyPattern::T => f.write_str("t"),
            PolyPattern::Literal(text) => f.write_str(text),
        }
    }
}

impl std::str::FromStr for PolyPattern {
    type Err = PolyError;

    fn from_str(text: &str) -> Result<Self, PolyError> {
        let trimmed = text.trim();
        match trimmed {
            "one" => Ok(PolyPattern::One),
            "t" => Ok(PolyPattern::T),
            _ if !trimmed.is_empty() && trimmed.split(',').all(|c| {
                let c = c.trim();
                !c.is_empty() && c.bytes().all(|b| b.is_ascii_digit())
            }) =>
            {
                Ok(PolyPattern::Literal(trimmed.to_string()))
            }
            _ => Err(PolyError::Parse {
                text: text.to_string(),
                reason: "expected \"one\", \"t\" or comma-separated coefficients".to_string(),
            }),
        }
    }
}

/// Odometer over a MonicIndex range; the constant coefficient turns fastest.
#[derive(Clone, Debug)]
pub struct MonicIter {
    q: u32,
    current: Poly,
    next_idx: u64,
    end: u64,
}

impl Iterator for MonicIter {
    type Item = Poly;

    fn next(&mut self) -> Option<Poly> {
        if self.next_idx >= self.end {
            return None;
        }
        let out = self.current.clone();
        self.next_idx += 1;
        if self.next_idx < self.end {
            let n = self.current.coeffs.len() - 1;
            for c in &mut self.current.coeffs[..n] {
                c.0 += 1;
                if c.0 < self.q {
                    break;
                }
                c.0 = 0;
            }
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next_idx) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for MonicIter {}
