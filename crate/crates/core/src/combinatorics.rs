//! Partitions, Cauchy's cycle-type probabilities, binomial main terms and a
//! seeded random-permutation oracle.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("multiplicities sum to {weight}, not {n}")]
    Weight { weight: usize, n: usize },
    #[error("the empty partition is not supported")]
    Empty,
    #[error("malformed partition text {0:?}")]
    Parse(String),
}

/// A partition `λ ⊢ n` stored as multiplicities `(λ_1, ..., λ_n)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    mult: Vec<u32>,
}

impl Partition {
    pub fn from_multiplicities(mult: Vec<u32>) -> Result<Self, PartitionError> {
        let n = mult.len();
        if n == 0 {
            return Err(PartitionError::Empty);
        }
        let weight: usize = mult
            .iter()
            .enumerate()
            .map(|(i, &m)| (i + 1) * m as usize)
            .sum();
        if weight != n {
            return Err(PartitionError::Weight { weight, n });
        }
        Ok(Partition { mult })
    }

    /// Builds the partition whose parts are `parts` (any order).
    pub fn from_parts(parts: &[usize]) -> Result<Self, PartitionError> {
        let n: usize = parts.iter().sum();
        if n == 0 || parts.contains(&0) {
            return Err(PartitionError::Empty);
        }
        let mut mult = vec![0u32; n];
        for &p in parts {
            mult[p - 1] += 1;
        }
        Ok(Partition { mult })
    }

    /// The single `n`-cycle `(0, ..., 0, 1)`.
    pub fn cycle(n: usize) -> Self {
        let mut mult = vec![0; n];
        mult[n - 1] = 1;
        Partition { mult }
    }

    /// The identity type `(n, 0, ..., 0)`.
    pub fn ones(n: usize) -> Self {
        let mut mult = vec![0; n];
        mult[0] = n as u32;
        Partition { mult }
    }

    pub fn n(&self) -> usize {
        self.mult.len()
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.mult
    }

    /// `|λ| = Σ λ_j`.
    pub fn num_parts(&self) -> u32 {
        self.mult.iter().sum()
    }

    /// Parts in non-increasing order.
    pub fn parts(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, &m) in self.mult.iter().enumerate().rev() {
            out.extend(std::iter::repeat_n(i + 1, m as usize));
        }
        out
    }
}

impl fmt::Display for Partition {
    /// Parts joined by `+`, largest first, e.g. `2+1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts().iter().map(usize::to_string).collect();
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for Partition {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts = s
            .split('+')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| PartitionError::Parse(s.to_string()))?;
        if parts.iter().sum::<usize>() > 1 << 16 {
            return Err(PartitionError::Parse(s.to_string()));
        }
        Partition::from_parts(&parts)
    }
}

/// Every partition of `n` once, parts in reverse lexicographic order:
/// `[n], [n-1, 1], [n-2, 2], [n-2, 1, 1], ...`.
pub fn partitions_of(n: usize) -> Vec<Partition> {
    assert!(n >= 1, "partitions_of needs n >= 1");
    let mut out = Vec::new();
    let mut parts = vec![n];
    loop {
        out.push(Partition::from_parts(&parts).expect("positive parts"));
        // Find the rightmost part larger than 1, decrement it and refill greedily.
        let ones = parts.iter().rev().take_while(|&&p| p == 1).count();
        if ones == parts.len() {
            break;
        }
        let idx = parts.len() - ones - 1;
        let k = parts[idx] - 1;
        let mut rest = ones + 1;
        parts.truncate(idx);
        parts.push(k);
        while rest > 0 {
            let take = rest.min(k);
            parts.push(take);
            rest -= take;
        }
    }
    out
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// Cauchy's formula `p(λ) = ∏_j 1 / (j^{λ_j} · λ_j!)`.
pub fn cauchy_prob(lambda: &Partition) -> BigRational {
    let den = lambda
        .mult
        .iter()
        .enumerate()
        .fold(BigInt::one(), |acc, (i, &m)| {
            acc * BigInt::from(i + 1).pow(m) * factorial(m)
        });
    BigRational::new(BigInt::one(), den)
}

pub fn num_parts(lambda: &Partition) -> u32 {
    lambda.num_parts()
}

/// `C(n, k)` exactly; panics on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .expect("binomial overflow")
            / (i as u128 + 1);
    }
    acc
}

/// `C(n + k - 1, k - 1)`, the mean of `d_k` over `M_n`.
pub fn binom_main_term(n: u64, k: u64) -> u128 {
    assert!(k >= 1, "k must be at least 1");
    binomial(n + k - 1, k - 1)
}

/// Möbius function on the positive integers.
pub fn integer_mobius(mut n: u64) -> i32 {
    assert!(n >= 1);
    let mut sign = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Cycle type of a permutation of `0..n` given in one-line notation.
pub fn perm_cycle_type(perm: &[usize]) -> Partition {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut mult = vec![0u32; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        mult[len - 1] += 1;
    }
    Partition { mult }
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = vec![perm.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).expect("exists");
        perm.swap(i - 1, j);
        perm[i..].reverse();
        out.push(perm.clone());
    }
    out
}

/// Tallies of joint cycle types over `S_n^s`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JointTally {
    pub trials: u64,
    pub counts: BTreeMap<Vec<Partition>, u64>,
}

impl JointTally {
    pub fn count(&self, key: &[Partition]) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn frequency(&self, key: &[Partition]) -> BigRational {
        BigRational::new(self.count(key).into(), self.trials.into())
    }

    fn merge(mut self, other: JointTally) -> JointTally {
        self.trials += other.trials;
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self
    }
}

/// Trials per generator stream; stream `c` covers trials `c·CHUNK .. (c+1)·CHUNK`.
const SAMPLE_CHUNK: u64 = 1 << 14;

/// Samples `trials` tuples of `s` independent uniform permutations of `n`
/// letters. The generator is ChaCha8 seeded with `seed`, one stream per block
/// of 16384 trials, and each permutation is drawn by Fisher–Yates; the tally
/// is therefore independent of the number of worker threads.
pub fn perm_joint_sample(n: usize, s: usize, trials: u64, seed: u64) -> JointTally {
    assert!(trials >= 1 && n >= 1 && s >= 1);
    let chunks = trials.div_ceil(SAMPLE_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = SAMPLE_CHUNK.min(trials - c * SAMPLE_CHUNK);
            let mut tally = JointTally::default();
            let mut perm: Vec<usize> = (0..n).collect();
            for _ in 0..count {
                let key: Vec<Partition> = (0..s)
                    .map(|_| {
                        for i in (1..n).rev() {
                            let j = rng.gen_range(0..=i);
                            perm.swap(i, j);
                        }
                        perm_cycle_type(&perm)
                    })
                    .collect();
                *tally.counts.entry(key).or_insert(0) += 1;
            }
            tally.trials = count;
            tally
        })
        .reduce(JointTally::default, JointTally::merge)
}

/// Exact tally over all `(n!)^s` tuples.
pub fn perm_joint_exhaustive(n: usize, s: usize) -> JointTally {
    let types: Vec<Partition> = all_permutations(n).iter().map(|p| perm_cycle_type(p)).collect();
    let m = types.len();
    let total = (m as u64).pow(s as u32);
    let mut tally = JointTally {
        trials: total,
        ..Default::default()
    };
    let mut idx = vec![0usize; s];
    for _ in 0..total {
        let key: Vec<Partition> = idx.iter().map(|&i| types[i].clone()).collect();
        *tally.counts.entry(key).or_insert(0) += 1;
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < m {
                break;
            }
            *slot = 0;
        }
    }
    tally
}

/// `|count/trials - p| <= k·sqrt(p(1-p)/trials)`.
pub fn within_binomial_sigma(count: u64, trials: u64, p: f64, k: f64) -> bool {
    let freq = count as f64 / trials as f64;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    (freq - p).abs() <= k * sigma
}

/// Exact product `∏ p(λ_i)`.
pub fn joint_cauchy(lambdas: &[Partition]) -> BigRational {
    lambdas
        .iter()
        .fold(BigRational::one(), |acc, l| acc * cauchy_prob(l))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    if r.is_zero() {
        return 0.0;
    }
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Partition counts by the standard recurrence over largest part.
    fn partition_count(n: usize) -> usize {
        let mut table = vec![vec![0usize; n + 1]; n + 1];
        for k in 0..=n {
            table[0][k] = 1;
        }
        for m in 1..=n {
            for k in 1..=n {
                table[m][k] = table[m][k - 1] + if k <= m { table[m - k][k] } else { 0 };
            }
        }
        table[n][n]
    }

    #[test]
    fn partition_lists() {
        assert_eq!(partitions_of(1), vec![Partition::ones(1)]);
        let p4: Vec<String> = partitions_of(4).iter().map(|p| p.to_string()).collect();
        assert_eq!(p4, ["4", "3+1", "2+2", "2+1+1", "1+1+1+1"]);
        for n in 1..=14 {
            let all = partitions_of(n);
            assert_eq!(all.len(), partition_count(n));
            let mut sorted = all.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), all.len());
        }
        assert_eq!(partitions_of(10).len(), 42);
    }

    #[test]
    fn cauchy_values() {
        for n in 1..=8u32 {
            assert_eq!(
                cauchy_prob(&Partition::cycle(n as usize)),
                BigRational::new(1.into(), n.into())
            );
            assert_eq!(
                cauchy_prob(&Partition::ones(n as usize)),
                BigRational::new(1.into(), factorial(n))
            );
        }
        for n in 1..=12 {
            let total: BigRational = partitions_of(n).iter().map(cauchy_prob).sum();
            assert_eq!(total, BigRational::one());
        }
    }

    #[test]
    fn cauchy_matches_symmetric_group() {
        for n in 1..=6 {
            let perms = all_permutations(n);
            let total = perms.len() as u64;
            for lambda in partitions_of(n) {
                let hits = perms.iter().filter(|p| perm_cycle_type(p) == lambda).count() as u64;
                assert_eq!(
                    BigRational::new(hits.into(), total.into()),
                    cauchy_prob(&lambda),
                    "{lambda}"
                );
            }
        }
    }

    #[test]
    fn parts_counts() {
        assert_eq!(num_parts(&Partition::cycle(5)), 1);
        assert_eq!(num_parts(&Partition::ones(5)), 5);
        assert_eq!(Partition::from_parts(&[1, 1, 1]).unwrap().num_parts(), 3);
    }

    #[test]
    fn invalid_partitions() {
        assert_eq!(
            Partition::from_multiplicities(vec![1, 1]),
            Err(PartitionError::Weight { weight: 3, n: 2 })
        );
        assert_eq!(Partition::from_multiplicities(vec![]), Err(PartitionError::Empty));
        assert!("2+x".parse::<Partition>().is_err());
        assert!("0".parse::<Partition>().is_err());
        assert_eq!("1+2".parse::<Partition>().unwrap().to_string(), "2+1");
    }

    #[test]
    fn binomial_main_terms() {
        for n in 0..=12u64 {
            assert_eq!(binom_main_term(n, 2), n as u128 + 1);
            assert_eq!(binom_main_term(n, 1), 1);
        }
        assert_eq!(binom_main_term(3, 3), 10);
        // Oracle: count k-compositions of n by enumeration.
        fn compositions(n: u64, k: u64) -> u128 {
            if k == 1 {
                return 1;
            }
            (0..=n).map(|a| compositions(n - a, k - 1)).sum()
        }
        for n in 0..=8 {
            for k in 1..=5 {
                assert_eq!(binom_main_term(n, k), compositions(n, k));
            }
        }
    }

    #[test]
    fn integer_mobius_values() {
        let expected = [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0];
        for (i, &mu) in expected.iter().enumerate() {
            assert_eq!(integer_mobius(i as u64 + 1), mu);
        }
    }

    #[test]
    fn exhaustive_joint_tallies() {
        let t = perm_joint_exhaustive(2, 1);
        assert_eq!(t.frequency(&[Partition::cycle(2)]), BigRational::new(1.into(), 2.into()));
        assert_eq!(t.frequency(&[Partition::ones(2)]), BigRational::new(1.into(), 2.into()));
        let t = perm_joint_exhaustive(3, 2);
        assert_eq!(t.trials, 36);
        for a in partitions_of(3) {
            for b in partitions_of(3) {
                let key = [a.clone(), b.clone()];
                assert_eq!(t.frequency(&key), joint_cauchy(&key));
            }
        }
    }

    #[test]
    fn sampled_five_cycles() {
        let trials = 1_000_000;
        let t = perm_joint_sample(5, 1, trials, 7);
        assert_eq!(t.trials, trials);
        let hits = t.count(&[Partition::cycle(5)]);
        assert!(within_binomial_sigma(hits, trials, 0.2, 5.0), "{hits}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = perm_joint_sample(4, 2, 50_000, 99);
        let b = perm_joint_sample(4, 2, 50_000, 99);
        assert_eq!(a, b);
        assert_ne!(a, perm_joint_sample(4, 2, 50_000, 100));
    }
}
