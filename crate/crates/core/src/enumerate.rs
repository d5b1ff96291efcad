//! Sharded exhaustive sweeps over MonicIndex ranges.
//!
//! A sweep splits `[0, q^n)` into `shards` contiguous ranges, evaluates each
//! range independently on the rayon pool and merges the partial results in
//! range order. Merges used in this crate are exact integer additions, so the
//! result does not depend on the shard count or on the thread count.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factor::{self, Factorization};
use crate::poly::{Poly, PolyRing};

/// Default number of polynomial visits an experiment may perform.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumOpts {
    pub shards: usize,
    pub budget: u64,
    /// Multiply every factorization back and fail on mismatch.
    pub verify_factorizations: bool,
}

impl Default for EnumOpts {
    fn default() -> Self {
        EnumOpts {
            shards: rayon::current_num_threads().max(1),
            budget: DEFAULT_BUDGET,
            verify_factorizations: false,
        }
    }
}

impl EnumOpts {
    pub fn with_shards(mut self, shards: usize) -> Self {
        self.shards = shards.max(1);
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn verified(mut self) -> Self {
        self.verify_factorizations = true;
        self
    }

    /// Refuses a sweep whose precomputed cost exceeds the budget.
    pub fn check_budget(&self, cost: u128) -> Result<()> {
        if cost > self.budget as u128 {
            Err(Error::Budget {
                cost,
                budget: self.budget,
            })
        } else {
            Ok(())
        }
    }

    pub fn factorize(&self, ring: &PolyRing, f: &Poly) -> Result<Factorization> {
        let fac = factor::factorize(ring, f)?;
        if self.verify_factorizations && !factor::reconstructs(ring, &fac, f) {
            return Err(Error::Reconstruction(f.to_string()));
        }
        Ok(fac)
    }
}

/// Splits `[0, total)` into at most `shards` contiguous non-empty ranges.
pub fn shard_ranges(total: u64, shards: usize) -> Vec<Range<u64>> {
    let shards = (shards.max(1) as u64).min(total.max(1));
    let size = total.div_ceil(shards);
    (0..shards)
        .map(|i| (i * size).min(total)..((i + 1) * size).min(total))
        .filter(|r| !r.is_empty())
        .collect()
}

/// Evaluates `work` over each shard of `[0, total)` and merges in shard order.
pub fn sweep<T, W, M>(total: u64, shards: usize, work: W, init: T, merge: M) -> Result<T>
where
    T: Send,
    W: Fn(Range<u64>) -> Result<T> + Sync,
    M: Fn(T, T) -> Result<T>,
{
    let parts: Vec<Result<T>> = shard_ranges(total, shards)
        .into_par_iter()
        .map(&work)
        .collect();
    parts.into_iter().try_fold(init, |acc, part| merge(acc, part?))
}

pub(crate) fn checked_add(a: u128, b: u128) -> Result<u128> {
    a.checked_add(b).ok_or(Error::Overflow)
}

pub(crate) fn checked_mul(a: u128, b: u128) -> Result<u128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

/// Sums `term(f)` over the monic polynomials of degree `n`.
pub fn sum_over_monic<F>(ring: &PolyRing, n: usize, opts: &EnumOpts, term: F) -> Result<u128>
where
    F: Fn(&Poly) -> Result<u128> + Sync,
{
    let total = ring.monic_count(n);
    sweep(
        total,
        opts.shards,
        |range| {
            ring.monic_range(n, range)
                .try_fold(0u128, |acc, f| checked_add(acc, term(&f)?))
        },
        0u128,
        checked_add,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;

    #[test]
    fn ranges_cover_exactly() {
        for total in [0u64, 1, 7, 81, 1000] {
            for shards in [1, 2, 3, 8, 2000] {
                let ranges = shard_ranges(total, shards);
                let covered: u64 = ranges.iter().map(|r| r.end - r.start).sum();
                assert_eq!(covered, total);
                for w in ranges.windows(2) {
                    assert_eq!(w[0].end, w[1].start);
                }
            }
        }
    }

    #[test]
    fn sums_independent_of_shards() {
        let ring = PolyRing::new(Field::with_order(5).unwrap());
        let term = |f: &Poly| Ok(ring.monic_index(f).unwrap() as u128 * 3 + 1);
        let reference = sum_over_monic(&ring, 4, &EnumOpts::default().with_shards(1), term).unwrap();
        for shards in [2, 3, 7, 64, 625, 10_000] {
            let opts = EnumOpts::default().with_shards(shards);
            assert_eq!(sum_over_monic(&ring, 4, &opts, term).unwrap(), reference);
        }
        assert_eq!(reference, (0..625u128).map(|i| 3 * i + 1).sum());
    }

    #[test]
    fn budget_refusal() {
        let opts = EnumOpts::default().with_budget(100);
        assert!(opts.check_budget(100).is_ok());
        assert_eq!(opts.check_budget(101), Err(Error::Budget { cost: 101, budget: 100 }));
    }
}
