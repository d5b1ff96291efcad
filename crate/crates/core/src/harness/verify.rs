//! The curated end-to-end checks behind `verify-all`.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;

use super::manifest::{Format, Manifest};
use super::run::{execute, render, ExecOpts};
use crate::combinatorics::{binom_main_term, joint_cauchy, partitions_of, perm_joint_sample, rational_to_f64, within_binomial_sigma};
use crate::conjecture::{self, akq_limit_check, g_count_brute, g_count_crt};
use crate::enumerate::{sum_over_monic, EnumOpts};
use crate::error::Result;
use crate::factor;
use crate::gf::Field;
use crate::identities::{self, quadruples, CountMode};
use crate::poly::{Poly, PolyPattern, PolyRing};
use crate::stats::{self, ShiftTuple};

/// Seed of the random-permutation cross-check.
pub const PERMUTATION_SEED: u64 = 0x0c1c_1e55;
pub const PERMUTATION_TRIALS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub limit: Option<Duration>,
    pub quick: bool,
}

pub const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, title: "mean value of d_k is exact", limit: Some(Duration::from_secs(60)), quick: true },
    Criterion { id: 2, title: "shifted d_2 sum at h = 1 equals (n+1)^2 - (n-1)^2/q", limit: Some(Duration::from_secs(60)), quick: true },
    Criterion { id: 3, title: "monic solutions of Au - Bv = 1 and four-degree counts S", limit: None, quick: false },
    Criterion { id: 4, title: "Moebius degree sums and truncated sums of mu(d)/|d|^2", limit: None, quick: true },
    Criterion { id: 5, title: "shifted d_k sums approach the binomial main term", limit: Some(Duration::from_secs(120)), quick: true },
    Criterion { id: 6, title: "joint cycle structure of f and f + 1 is independent", limit: None, quick: false },
    Criterion { id: 7, title: "d_2 over shifted primes against q^n + q^n/n", limit: None, quick: false },
    Criterion { id: 8, title: "unshifted second moment of d_2 tends to 10", limit: None, quick: true },
    Criterion { id: 9, title: "singular-series constant tends to 1", limit: None, quick: true },
    Criterion { id: 10, title: "oracle equivalences and shard independence", limit: Some(Duration::from_secs(600)), quick: false },
];

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Option<Duration>,
}

impl Outcome {
    pub fn within_limit(&self) -> bool {
        self.limit.is_none_or(|l| self.elapsed <= l)
    }

    pub fn ok(&self) -> bool {
        self.passed && self.within_limit()
    }

    pub fn line(&self) -> String {
        let status = if self.ok() { "PASS" } else { "FAIL" };
        let limit = match self.limit {
            Some(l) if !self.within_limit() => format!(" (over the {}s limit)", l.as_secs()),
            _ => String::new(),
        };
        format!(
            "criterion {:>2} {status} [{:>7.2}s{limit}] {}: {}",
            self.id,
            self.elapsed.as_secs_f64(),
            self.title,
            self.detail
        )
    }
}

struct Check {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: impl Into<String>) -> Check {
    Check { passed, detail: detail.into() }
}

/// First few failures, or nothing when there are none.
fn sample(bad: &[String]) -> String {
    const SHOWN: usize = 4;
    if bad.is_empty() {
        return String::new();
    }
    let more = if bad.len() > SHOWN { format!(", {} more", bad.len() - SHOWN) } else { String::new() };
    format!(": {}{more}", bad[..bad.len().min(SHOWN)].join(", "))
}

fn ring(q: u64) -> PolyRing {
    PolyRing::new(Field::with_order(q).expect("grid fields are prime powers"))
}

fn opts() -> EnumOpts {
    EnumOpts::default().verified()
}

fn exact_mean(quick: bool) -> Result<Check> {
    let cap = if quick { 10_000u64 } else { 1_000_000 };
    let ks = [2u32, 3, 4];
    let mut points = 0;
    let mut bad = Vec::new();
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        let r = ring(q);
        for n in (0..=6usize).filter(|&n| q.pow(n as u32) <= cap) {
            for res in stats::mean_divisor_many(&r, n, &ks, &opts())? {
                points += 1;
                let expected = BigInt::from(q).pow(n as u32) * BigInt::from(binom_main_term(n as u64, res.params.ks[0] as u64));
                if res.raw_sum != expected || !res.is_exact() {
                    bad.push(format!("q={q} n={n} k={}", res.params.ks[0]));
                }
            }
        }
    }
    Ok(check(bad.is_empty(), format!("{points} (q, n, k) points, {} inexact{}", bad.len(), sample(&bad))))
}

fn estermann() -> Result<Check> {
    let mut points = 0;
    let mut bad = Vec::new();
    for q in [2u64, 3, 4, 5, 7] {
        let r = ring(q);
        for n in (1..=5usize).filter(|&n| q.pow(n as u32) <= 100_000) {
            points += 1;
            let e = identities::estermann_exact(&r, n, &opts())?;
            if !e.equal {
                bad.push(format!("q={q} n={n}: {} vs {}", e.lhs, e.rhs));
            }
        }
    }
    Ok(check(bad.is_empty(), format!("{points} (q, n) points, {} mismatches{}", bad.len(), sample(&bad))))
}

fn diophantine_and_s() -> Result<Check> {
    let mut dioph = 0u64;
    let mut s_brute = 0u64;
    let mut s_direct = 0u64;
    let mut bad = Vec::new();
    let cap = 100_000u128;
    for q in [2u64, 3, 5] {
        let r = ring(q);
        let qn = |n: usize| (q as u128).pow(n as u32);
        for n in (1..).take_while(|&n| qn(n) <= 1_000) {
            for da in 0..=n {
                let monic_a: Vec<Poly> = r.monic_iter(da).collect();
                for db in 0..=n - da {
                    if qn(n - da) > cap {
                        continue;
                    }
                    let results: Vec<Result<Option<String>>> = monic_a
                        .par_iter()
                        .map(|a| {
                            let mut local = None;
                            for b in r.monic_iter(db) {
                                if !r.coprime(a, &b) {
                                    continue;
                                }
                                let c = identities::diophantine_count(&r, a, &b, n, cap)?;
                                if c.brute != Some(c.closed) {
                                    local = Some(format!("q={q} n={n} A={a} B={b}"));
                                }
                            }
                            Ok(local)
                        })
                        .collect();
                    for res in results {
                        if let Some(b) = res? {
                            bad.push(b);
                        }
                    }
                    dioph += 1;
                }
            }
        }
        let unlimited = EnumOpts::default().with_budget(u64::MAX);
        for n in (1..).take_while(|&n| qn(n) <= cap) {
            let tuples = quadruples(n);
            let rows: Vec<Result<(u64, u64, Vec<String>)>> = tuples
                .par_iter()
                .map(|&p| {
                    let closed = identities::s_count(&r, p, CountMode::Closed, &unlimited)?;
                    let mut miss = Vec::new();
                    let mut counts = (0, 0);
                    if p.cost(&r, CountMode::Brute) <= cap {
                        counts.0 += 1;
                        if identities::s_count(&r, p, CountMode::Brute, &unlimited)? != closed {
                            miss.push(format!("brute q={q} {p}"));
                        }
                    }
                    if p.cost(&r, CountMode::Direct) <= cap {
                        counts.1 += 1;
                        if identities::s_count(&r, p, CountMode::Direct, &unlimited)? != closed {
                            miss.push(format!("direct q={q} {p}"));
                        }
                    }
                    Ok((counts.0, counts.1, miss))
                })
                .collect();
            for row in rows {
                let (b, d, miss) = row?;
                s_brute += b;
                s_direct += d;
                bad.extend(miss);
            }
        }
    }
    Ok(check(
        bad.is_empty(),
        format!(
            "{dioph} (q, n, deg A, deg B) blocks, {s_brute} brute and {s_direct} direct S tuples, {} mismatches{}",
            bad.len(),
            sample(&bad)
        ),
    ))
}

fn mobius() -> Result<Check> {
    let mut bad = Vec::new();
    for q in [2u64, 3, 5, 7] {
        let r = ring(q);
        for xi in 0..=4usize {
            let s = factor::mobius_degree_sum(&r, xi);
            let expected = match xi {
                0 => 1,
                1 => -(q as i64),
                _ => 0,
            };
            if s != expected {
                bad.push(format!("sum mu over M_{xi}, q={q}: {s}"));
            }
        }
        for eta in 0..=4usize {
            let m = identities::mobius_l2_partial(&r, eta, &opts())?;
            let expected = if eta == 0 {
                BigRational::one()
            } else {
                BigRational::new(BigInt::from(q - 1), BigInt::from(q))
            };
            if m.enumerated != m.closed || m.enumerated != expected {
                bad.push(format!("partial sum q={q} eta={eta}: {}", m.enumerated));
            }
        }
    }
    Ok(check(bad.is_empty(), format!("q in {{2,3,5,7}}, degrees 0..=4, {} mismatches{}", bad.len(), sample(&bad))))
}

fn shifted_convergence() -> Result<Check> {
    let grid = [3u64, 5, 7, 9, 11, 13, 16, 25, 27];
    let mut rows = Vec::new();
    for q in grid {
        let res = stats::shifted_sum(&ring(q), 3, 2, &Poly::one(), &opts())?;
        rows.push((q, res.abs_error_magnitude(), res.scaled_error));
    }
    let first = &rows[0];
    let last = rows.last().expect("nonempty grid");
    let max_scaled = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let passed = last.1 < first.1 && max_scaled <= 4.0 * first.2;
    Ok(check(
        passed,
        format!(
            "|err| {} at q=3, {} at q=27; max scaled error {max_scaled:.4} vs 4 x {:.4}",
            first.1, last.1, first.2
        ),
    ))
}

fn joint_cycles() -> Result<Check> {
    let grid = [3u64, 5, 7, 11, 13];
    let mut tables = Vec::new();
    let mut sums_ok = true;
    for q in grid {
        let r = ring(q);
        let shifts = ShiftTuple::new(vec![Poly::zero(), Poly::one()], 3)?;
        let table = stats::joint_cycle_table(&r, 3, &shifts, &opts())?;
        let total: BigRational = table.iter().map(|t| t.value.clone()).sum();
        sums_ok &= total.is_one();
        tables.push(table);
    }
    let pairs = tables[0].len();
    let mut worst_ratio = 0.0f64;
    let mut bounded = true;
    for i in 0..pairs {
        let base = tables[0][i].scaled_error;
        for t in &tables[1..] {
            let s = t[i].scaled_error;
            bounded &= s <= 4.0 * base;
            if base > 0.0 {
                worst_ratio = worst_ratio.max(s / base);
            } else if s > 0.0 {
                worst_ratio = f64::INFINITY;
            }
        }
    }
    let tally = perm_joint_sample(3, 2, PERMUTATION_TRIALS, PERMUTATION_SEED);
    let parts = partitions_of(3);
    let mut mc_ok = true;
    let mut worst_z = 0.0f64;
    for a in &parts {
        for b in &parts {
            let key = [a.clone(), b.clone()];
            let p = rational_to_f64(&joint_cauchy(&key));
            mc_ok &= within_binomial_sigma(tally.count(&key), tally.trials, p, 5.0);
            let sigma = (p * (1.0 - p) / tally.trials as f64).sqrt();
            worst_z = worst_z.max((tally.count(&key) as f64 / tally.trials as f64 - p).abs() / sigma);
        }
    }
    Ok(check(
        sums_ok && bounded && mc_ok && pairs == 9,
        format!(
            "{pairs} pairs; sums to 1: {sums_ok}; worst scaled-error ratio to q=3: {worst_ratio:.3}; permutation sample worst |z| {worst_z:.2}"
        ),
    ))
}

fn titchmarsh() -> Result<Check> {
    let grid = [3u64, 5, 7, 11, 13];
    let mut scaled = Vec::new();
    let mut counts_ok = true;
    for q in grid {
        let r = ring(q);
        let res = stats::titchmarsh_sum(&r, 3, 2, &Poly::one(), &opts())?;
        let oracle = BigInt::from(factor::prime_count(q, 3));
        counts_ok &= res.normalizer == oracle;
        let listed = factor::primes_of_degree(&r, 3).len();
        counts_ok &= BigInt::from(listed) == oracle;
        scaled.push(res.refined.expect("k = 2 carries the refined form").scaled_error);
    }
    let bound = 4.0 * scaled[0];
    let passed = counts_ok && scaled.iter().all(|&s| s <= bound);
    Ok(check(passed, format!("scaled errors {scaled:.4?} vs bound {bound:.4}; prime counts match: {counts_ok}")))
}

fn moment() -> Result<Check> {
    let grid = [2u64, 3, 4, 5, 7, 9, 11, 13, 16];
    let mut errs = Vec::new();
    for q in grid {
        errs.push(stats::moment_h0(&ring(q), 2, 2, &opts())?.abs_error_magnitude());
    }
    let passed = errs.last() < errs.first();
    Ok(check(
        passed,
        format!("|mean - 10| = {} at q=2, {} at q=16", errs[0], errs[errs.len() - 1]),
    ))
}

fn akq() -> Result<Check> {
    let grid = [3u64, 5, 7, 11, 13];
    let mut details = Vec::new();
    let mut passed = true;
    for k in [2u32, 3] {
        let lc = akq_limit_check(k, &PolyPattern::One, &grid, 8)?;
        passed &= lc.decreasing;
        let devs: Vec<String> = lc.rows.iter().map(|r| format!("{:.3e}", rational_to_f64(&r.deviation))).collect();
        details.push(format!("k={k}: deviations {devs:?}, envelope {}", lc.within_envelope));
        for q in grid {
            let r = ring(q);
            for h in [Poly::one(), r.t()] {
                passed &= conjecture::akq_truncated(&r, k, &h, 0)?.value.is_one();
            }
        }
    }
    Ok(check(passed, details.join("; ")))
}

fn oracles() -> Result<Check> {
    let mut notes = Vec::new();
    let mut passed = true;

    let mut dk_points = 0u64;
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        let r = ring(q);
        let max_deg = (0..).take_while(|&d| q.pow(d) <= 10_000).last().unwrap_or(0) as usize;
        for k in 1..=4u32 {
            let table = stats::ordered_factorization_table(&r, max_deg, k, &EnumOpts::default().with_budget(u64::MAX))?;
            for (d, row) in table.iter().enumerate() {
                let mismatches: usize = row
                    .par_iter()
                    .enumerate()
                    .map(|(i, &expected)| {
                        let f = r.monic_from_index(d, i as u64).expect("in range");
                        usize::from(stats::divisor_k(&r, &f, k).ok() != Some(expected))
                    })
                    .sum();
                passed &= mismatches == 0;
                dk_points += row.len() as u64;
            }
        }
    }
    notes.push(format!("d_k vs ordered factorizations: {dk_points} checks"));

    let mut g_points = 0u64;
    for q in [2u64, 3, 5] {
        let r = ring(q);
        for j in [1u32, 2, 3] {
            let cap: u128 = if j == 1 { 1_000 } else { 100_000 };
            let mut d = 0usize;
            while (q as u128).pow(d as u32).pow(j) <= cap {
                let bad: usize = r
                    .monic_iter(d)
                    .collect::<Vec<_>>()
                    .par_iter()
                    .map(|f| usize::from(g_count_brute(&r, f, j).ok() != g_count_crt(&r, f, j).ok()))
                    .sum();
                passed &= bad == 0;
                g_points += r.monic_count(d);
                d += 1;
            }
        }
    }
    notes.push(format!("g_j by enumeration vs local counts: {g_points} checks"));

    let mut visited = 0u64;
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        let r = ring(q);
        for n in (1..=16usize).filter(|&n| (q as u128).pow(n as u32) <= 100_000) {
            let ok = sum_over_monic(&r, n, &opts(), |f| Ok(u128::from(factor::reconstructs(&r, &factor::factorize(&r, f)?, f))))?;
            passed &= ok == r.monic_count(n) as u128;
            visited += r.monic_count(n);
        }
    }
    notes.push(format!("factorizations reconstructed: {visited}"));

    let manifests = [
        "experiment = cycles\nfield = 3, 4\nn = 3\nhs = 0 | one",
        "experiment = shifted\nfield = 5\nn = 3\nk = 3\nh = t",
        "experiment = mean\nfield = 7\nn = 3\nk = 2..4",
        "experiment = titchmarsh\nfield = 4\nn = 3\nk = 2\nh = one",
    ];
    let mut identical = true;
    for text in manifests {
        let m = Manifest::parse(text).expect("curated manifest");
        for format in [Format::Csv, Format::Json] {
            let mut outputs = Vec::new();
            for shards in [1usize, 7, 64] {
                let out = execute(&m, &ExecOpts { shards: Some(shards), verify_factorizations: true })
                    .map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
                outputs.push(render(&out.rows, format).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?);
            }
            identical &= outputs.windows(2).all(|w| w[0] == w[1]);
        }
    }
    passed &= identical;
    notes.push(format!("outputs identical across 1, 7 and 64 shards: {identical}"));
    Ok(check(passed, notes.join("; ")))
}

pub fn run_criterion(id: u8, quick: bool) -> Outcome {
    let c = CRITERIA.iter().find(|c| c.id == id).copied().expect("known criterion");
    let start = Instant::now();
    let result = match id {
        1 => exact_mean(quick),
        2 => estermann(),
        3 => diophantine_and_s(),
        4 => mobius(),
        5 => shifted_convergence(),
        6 => joint_cycles(),
        7 => titchmarsh(),
        8 => moment(),
        9 => akq(),
        10 => oracles(),
        _ => unreachable!(),
    };
    let (passed, detail) = match result {
        Ok(c) => (c.passed, c.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    Outcome {
        id,
        title: c.title,
        passed,
        detail,
        elapsed: start.elapsed(),
        limit: c.limit,
    }
}

/// Runs every criterion, or with `quick` the fast subset on reduced grids.
pub fn run_all(quick: bool, mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    CRITERIA
        .iter()
        .filter(|c| !quick || c.quick)
        .map(|c| {
            let o = run_criterion(c.id, quick);
            report(&o);
            o
        })
        .collect()
}

pub fn all_ok(outcomes: &[Outcome]) -> bool {
    outcomes.iter().all(Outcome::ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass() {
        for id in [2u8, 4, 8, 9] {
            let o = run_criterion(id, true);
            assert!(o.ok(), "{}", o.line());
        }
    }

    #[test]
    fn line_format() {
        let o = Outcome {
            id: 3,
            title: "t",
            passed: true,
            detail: "d".into(),
            elapsed: Duration::from_millis(1500),
            limit: Some(Duration::from_secs(1)),
        };
        assert!(!o.ok());
        assert!(o.line().starts_with("criterion  3 FAIL"));
    }
}
