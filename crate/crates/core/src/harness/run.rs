//! Manifest execution: cost planning, per-point evaluation and output.

use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::manifest::{Experiment, FieldSize, Format, Manifest};
use super::rows::{rational_text, to_csv, to_json, ResultRow, RowLabels};
use crate::combinatorics::{cauchy_prob, perm_joint_sample, rational_to_f64, within_binomial_sigma, Partition};
use crate::conjecture;
use crate::enumerate::{checked_add, EnumOpts};
use crate::error::Error;
use crate::gf::Field;
use crate::identities::{self, quadruples, SCountParams};
use crate::poly::{Poly, PolyPattern, PolyRing};
use crate::stats::{self, ExperimentResult, Params, ShiftTuple};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_MANIFEST: i32 = 4;
pub const EXIT_IO: i32 = 5;

/// Flag on rows whose exact identity failed.
pub const FLAG_VIOLATED: &str = "identity-violated";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("manifest: {0}")]
    Manifest(#[from] super::manifest::ManifestError),
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("refused: grid point {point} costs {cost} visits, budget is {budget}")]
    Budget { point: String, cost: u128, budget: u64 },
    #[error("I/O: {0}")]
    Io(String),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Manifest(_) | RunError::Invalid(_) => EXIT_MANIFEST,
            RunError::Budget { .. } => EXIT_BUDGET,
            RunError::Io(_) => EXIT_IO,
            RunError::Compute(_) => EXIT_ASSERTION,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget { cost, budget } => RunError::Budget {
                point: "inner".into(),
                cost,
                budget,
            },
            Error::InvalidArgument(_) | Error::Poly(_) | Error::Field(_) | Error::Partition(_) => {
                RunError::Invalid(e.to_string())
            }
            Error::Reconstruction(_) | Error::Overflow => RunError::Compute(e.to_string()),
        }
    }
}

/// How a manifest is executed; none of it reaches the output.
#[derive(Clone, Debug, Default)]
pub struct ExecOpts {
    pub shards: Option<usize>,
    pub verify_factorizations: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutcome {
    pub rows: Vec<ResultRow>,
    /// Exact identities that failed, one line each.
    pub failures: Vec<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_ASSERTION
        }
    }
}

#[derive(Clone, Debug)]
enum Task {
    Mean { n: usize, k: u32 },
    Shifted { n: usize, k: u32, h: PolyPattern },
    Multishift { n: usize, ks: Vec<u32>, hs: Vec<PolyPattern> },
    Moment0 { n: usize, k: u32 },
    Titchmarsh { n: usize, k: u32, h: PolyPattern },
    Cycles { n: usize, hs: Vec<PolyPattern>, lambdas: Option<Vec<Partition>> },
    Estermann { n: usize, h: PolyPattern },
    Scount { params: SCountParams },
    Dioph { n: usize, a: PolyPattern, b: PolyPattern },
    Akq { k: u32, h: PolyPattern },
    Conjecture { k: u32, h: PolyPattern },
}

fn pow_cost(q: u64, n: usize) -> u128 {
    (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join("|")
}

impl Task {
    fn cost(&self, m: &Manifest, q: u64) -> u128 {
        match self {
            Task::Mean { n, .. } | Task::Moment0 { n, .. } => pow_cost(q, *n),
            Task::Shifted { n, .. } | Task::Titchmarsh { n, .. } | Task::Estermann { n, .. } => {
                pow_cost(q, *n).saturating_mul(2)
            }
            Task::Multishift { n, hs, .. } | Task::Cycles { n, hs, .. } => {
                pow_cost(q, *n).saturating_mul(hs.len() as u128)
            }
            Task::Scount { params } => {
                let ring_free = |exp: usize| pow_cost(q, exp);
                let o = params.ordered();
                match m.mode {
                    identities::CountMode::Direct => ring_free(o.n() + o.gamma),
                    _ => ring_free(o.alpha + o.gamma),
                }
            }
            // Brute force only runs within budget; the closed form is free.
            Task::Dioph { .. } => 1,
            Task::Akq { .. } => m.degree as u128 + 1,
            Task::Conjecture { .. } => m
                .ns
                .iter()
                .fold(0u128, |acc, &n| acc.saturating_add(pow_cost(q, n).saturating_mul(2))),
        }
    }

    fn describe(&self) -> String {
        format!("{self:?}")
    }
}

fn plan(m: &Manifest) -> Vec<Task> {
    let mut tasks = Vec::new();
    let ks = || m.ks.iter().map(|t| t[0]);
    let hs = || m.hs.iter().map(|t| t[0].clone());
    use Experiment::*;
    match m.experiment {
        Mean => {
            for &n in &m.ns {
                tasks.extend(ks().map(|k| Task::Mean { n, k }));
            }
        }
        Moment0 => {
            for &n in &m.ns {
                tasks.extend(ks().map(|k| Task::Moment0 { n, k }));
            }
        }
        Shifted | Titchmarsh => {
            for &n in &m.ns {
                for k in ks() {
                    for h in hs() {
                        tasks.push(if m.experiment == Shifted {
                            Task::Shifted { n, k, h }
                        } else {
                            Task::Titchmarsh { n, k, h }
                        });
                    }
                }
            }
        }
        Multishift => {
            for &n in &m.ns {
                for ks in &m.ks {
                    for hs in &m.hs {
                        tasks.push(Task::Multishift { n, ks: ks.clone(), hs: hs.clone() });
                    }
                }
            }
        }
        Cycles => {
            for &n in &m.ns {
                for hs in &m.hs {
                    if m.lambdas.is_empty() {
                        tasks.push(Task::Cycles { n, hs: hs.clone(), lambdas: None });
                    } else {
                        for l in &m.lambdas {
                            tasks.push(Task::Cycles { n, hs: hs.clone(), lambdas: Some(l.clone()) });
                        }
                    }
                }
            }
        }
        Estermann => {
            let shifts: Vec<PolyPattern> = if m.hs.is_empty() { vec![PolyPattern::One] } else { hs().collect() };
            for &n in &m.ns {
                tasks.extend(shifts.iter().map(|h| Task::Estermann { n, h: h.clone() }));
            }
        }
        Scount => {
            if m.tuples.is_empty() {
                for &n in &m.ns {
                    if n >= 1 {
                        tasks.extend(quadruples(n).into_iter().map(|params| Task::Scount { params }));
                    }
                }
            } else {
                tasks.extend(m.tuples.iter().map(|&params| Task::Scount { params }));
            }
        }
        Dioph => {
            for &n in &m.ns {
                for a in &m.a {
                    for b in &m.b {
                        tasks.push(Task::Dioph { n, a: a.clone(), b: b.clone() });
                    }
                }
            }
        }
        Akq => {
            for k in ks() {
                tasks.extend(hs().map(|h| Task::Akq { k, h }));
            }
        }
        Conjecture => {
            for k in ks() {
                tasks.extend(hs().map(|h| Task::Conjecture { k, h }));
            }
        }
    }
    tasks
}

fn ring_of(field: FieldSize) -> Result<PolyRing, RunError> {
    Field::new(field.p as u64, field.e)
        .map(PolyRing::new)
        .map_err(|e| RunError::Invalid(e.to_string()))
}

fn instantiate(ring: &PolyRing, pats: &[PolyPattern]) -> Result<Vec<Poly>, RunError> {
    pats.iter()
        .map(|p| p.instantiate(ring).map_err(|e| RunError::Invalid(e.to_string())))
        .collect()
}

struct Ctx<'a> {
    m: &'a Manifest,
    opts: EnumOpts,
    out: RunOutcome,
}

impl Ctx<'_> {
    fn labels(&self, n: usize, k: String, h: String) -> RowLabels {
        RowLabels {
            experiment: self.m.experiment.name().to_string(),
            n,
            k,
            h,
            seed: self.m.seed,
            shards: self.m.shards,
        }
    }

    fn push(&mut self, res: &ExperimentResult, labels: RowLabels, flags: &[String]) {
        self.out.rows.push(ResultRow::from_result(res, labels, flags));
    }

    fn fail(&mut self, what: String) -> Vec<String> {
        self.out.failures.push(what);
        vec![FLAG_VIOLATED.to_string()]
    }

    fn exact_result(ring: &PolyRing, n: usize, raw: BigInt, normalizer: BigInt, main: BigRational) -> ExperimentResult {
        ExperimentResult::new(raw, normalizer, main, Params::new(ring, n))
    }

    fn run_task(&mut self, ring: &PolyRing, task: &Task) -> Result<(), RunError> {
        let opts = self.opts.clone();
        let q = ring.q();
        match task {
            Task::Mean { n, k } => {
                let res = stats::mean_divisor(ring, *n, *k, &opts)?;
                let flags = if res.is_exact() {
                    Vec::new()
                } else {
                    self.fail(format!("mean of d_{k} over M_{n}, q={q}: {} is not exact", rational_text(&res.value)))
                };
                self.push(&res, self.labels(*n, k.to_string(), String::new()), &flags);
            }
            Task::Shifted { n, k, h } => {
                let hp = instantiate(ring, std::slice::from_ref(h))?.remove(0);
                let res = stats::shifted_sum(ring, *n, *k, &hp, &opts)?;
                self.push(&res, self.labels(*n, k.to_string(), hp.to_string()), &[]);
            }
            Task::Multishift { n, ks, hs } => {
                let shifts = ShiftTuple::new(instantiate(ring, hs)?, *n)?;
                let res = stats::multi_shift_sum(ring, *n, ks, &shifts, &opts)?;
                self.push(&res, self.labels(*n, join(ks), join(shifts.shifts())), &[]);
            }
            Task::Moment0 { n, k } => {
                let res = stats::moment_h0(ring, *n, *k, &opts)?;
                self.push(&res, self.labels(*n, k.to_string(), "0".into()), &[]);
            }
            Task::Titchmarsh { n, k, h } => {
                let alpha = instantiate(ring, std::slice::from_ref(h))?.remove(0);
                let res = stats::titchmarsh_sum(ring, *n, *k, &alpha, &opts)?;
                let flags: Vec<String> = res
                    .refined
                    .iter()
                    .flat_map(|r| {
                        [
                            format!("refined_main={}", rational_text(&r.main_term)),
                            format!("refined_error={}", rational_text(&r.error)),
                            format!("refined_scaled={}", r.scaled_error),
                        ]
                    })
                    .collect();
                self.push(&res, self.labels(*n, k.to_string(), alpha.to_string()), &flags);
            }
            Task::Cycles { n, hs, lambdas } => {
                let shifts = ShiftTuple::new(instantiate(ring, hs)?, *n)?;
                let results = match lambdas {
                    Some(l) => vec![stats::joint_cycle_freq(ring, *n, &shifts, l, &opts)?],
                    None => stats::joint_cycle_table(ring, *n, &shifts, &opts)?,
                };
                let tally = (self.m.trials > 0).then(|| perm_joint_sample(*n, shifts.len(), self.m.trials, self.m.seed));
                let mut failed = Vec::new();
                if lambdas.is_none() {
                    let total: BigRational = results.iter().map(|r| r.value.clone()).sum();
                    if !total.is_one() {
                        failed = self.fail(format!("cycle frequencies at q={q}, n={n} sum to {}", rational_text(&total)));
                    }
                }
                for res in &results {
                    let parts: Vec<Partition> = res.params.lambdas.iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(|e: crate::combinatorics::PartitionError| RunError::Compute(e.to_string()))?;
                    let mut flags = failed.clone();
                    if let Some(t) = &tally {
                        let p: BigRational = parts.iter().map(cauchy_prob).product();
                        let ok = within_binomial_sigma(t.count(&parts), t.trials, rational_to_f64(&p), 5.0);
                        flags.push(format!("mc_freq={}", rational_to_f64(&t.frequency(&parts))));
                        flags.push(if ok { "mc=agree" } else { "mc=disagree" }.to_string());
                    }
                    self.push(res, self.labels(*n, join(&parts), join(shifts.shifts())), &flags);
                }
            }
            Task::Estermann { n, h } => {
                let hp = instantiate(ring, std::slice::from_ref(h))?.remove(0);
                let qn = BigInt::from(q).pow(*n as u32);
                let lhs = identities::estermann_lhs(ring, *n, &hp, &opts)?;
                let rhs = identities::estermann_rhs(ring, *n);
                let raw = (&lhs * BigRational::from_integer(qn.clone())).to_integer();
                let res = Self::exact_result(ring, *n, raw, qn, rhs.clone());
                let flags = if hp.is_one() {
                    if lhs == rhs {
                        Vec::new()
                    } else {
                        self.fail(format!(
                            "shifted d_2 identity at q={q}, n={n}: lhs {} != rhs {}",
                            rational_text(&lhs),
                            rational_text(&rhs)
                        ))
                    }
                } else {
                    vec!["exploratory".to_string()]
                };
                self.push(&res, self.labels(*n, "2".into(), hp.to_string()), &flags);
            }
            Task::Scount { params } => {
                let mode = self.m.mode;
                let closed = identities::s_count(ring, *params, identities::CountMode::Closed, &opts)?;
                let counted = identities::s_count(ring, *params, mode, &opts)?;
                let res = Self::exact_result(
                    ring,
                    params.n(),
                    BigInt::from(counted),
                    BigInt::one(),
                    BigRational::from_integer(BigInt::from(closed)),
                );
                let mut flags = vec![format!("mode={mode:?}").to_lowercase()];
                if counted != closed {
                    flags.extend(self.fail(format!("S{params} at q={q}: counted {counted}, closed {closed}")));
                }
                let label = format!("{},{}|{},{}", params.alpha, params.beta, params.gamma, params.delta);
                self.push(&res, self.labels(params.n(), String::new(), label), &flags);
            }
            Task::Dioph { n, a, b } => {
                let ab = instantiate(ring, &[a.clone(), b.clone()])?;
                let count = identities::diophantine_count(ring, &ab[0], &ab[1], *n, self.m.budget as u128)?;
                let value = count.brute.unwrap_or(count.closed);
                let res = Self::exact_result(
                    ring,
                    *n,
                    BigInt::from(value),
                    BigInt::one(),
                    BigRational::from_integer(BigInt::from(count.closed)),
                );
                let mut flags = Vec::new();
                if count.brute.is_none() {
                    flags.push("closed-only".to_string());
                }
                if !count.agrees() {
                    flags.extend(self.fail(format!("Au - Bv = 1 at q={q}, n={n}, A={}, B={}: brute {value}, closed {}", ab[0], ab[1], count.closed)));
                }
                self.push(&res, self.labels(*n, String::new(), join(&ab)), &flags);
            }
            Task::Akq { k, h } => {
                let hp = instantiate(ring, std::slice::from_ref(h))?.remove(0);
                let akq = conjecture::akq_truncated(ring, *k, &hp, self.m.degree)?;
                let res = Self::exact_result(
                    ring,
                    self.m.degree,
                    akq.value.numer().clone(),
                    akq.value.denom().clone(),
                    BigRational::one(),
                );
                let flags = vec![format!("tail_bound={}", rational_text(&akq.tail_bound)), format!("tail_bound_f64={}", akq.tail_f64())];
                self.push(&res, self.labels(self.m.degree, k.to_string(), hp.to_string()), &flags);
            }
            Task::Conjecture { k, h } => {
                let hp = instantiate(ring, std::slice::from_ref(h))?.remove(0);
                let table = conjecture::conjecture_vs_data(ring, *k, &hp, &self.m.ns, self.m.degree, &opts)?;
                let trend = format!("trend={:?}", table.trend).to_lowercase();
                for row in &table.rows {
                    let qn = BigInt::from(q).pow(row.n as u32);
                    let main = &row.main_term / BigRational::from_integer(qn.clone());
                    let res = Self::exact_result(ring, row.n, BigInt::from(row.raw_sum), qn, main);
                    let flags = vec![format!("ratio={}", row.ratio_f64()), trend.clone(), format!("D={}", self.m.degree)];
                    self.push(&res, self.labels(row.n, k.to_string(), hp.to_string()), &flags);
                }
            }
        }
        Ok(())
    }
}

/// Plans every grid point, refuses if any exceeds the budget, then evaluates
/// them in manifest order.
pub fn execute(m: &Manifest, exec: &ExecOpts) -> Result<RunOutcome, RunError> {
    let tasks = plan(m);
    for field in &m.fields {
        for task in &tasks {
            let cost = task.cost(m, field.q());
            if cost > m.budget as u128 {
                return Err(RunError::Budget {
                    point: format!("q={} {}", field.q(), task.describe()),
                    cost,
                    budget: m.budget,
                });
            }
        }
    }
    let mut opts = EnumOpts::default()
        .with_shards(exec.shards.unwrap_or(m.shards))
        .with_budget(m.budget);
    opts.verify_factorizations = exec.verify_factorizations;
    let mut ctx = Ctx {
        m,
        opts,
        out: RunOutcome::default(),
    };
    for field in &m.fields {
        let ring = ring_of(*field)?;
        for task in &tasks {
            ctx.run_task(&ring, task)?;
        }
    }
    Ok(ctx.out)
}

pub fn render(rows: &[ResultRow], format: Format) -> Result<String, RunError> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    }
    .map_err(RunError::Io)
}

/// Writes atomically next to `path`.
pub fn write_output(path: &Path, text: &str) -> Result<(), RunError> {
    let io = |e: std::io::Error| RunError::Io(format!("{}: {e}", path.display()));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, text).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Total precomputed cost of a manifest, used by callers that want to report it.
pub fn planned_cost(m: &Manifest) -> u128 {
    let tasks = plan(m);
    m.fields.iter().fold(0u128, |acc, f| {
        tasks
            .iter()
            .fold(acc, |a, t| checked_add(a, t.cost(m, f.q())).unwrap_or(u128::MAX))
    })
}

/// Whether the row's identity (if any) held; rows without one always pass.
pub fn row_exact(row: &ResultRow) -> bool {
    super::rows::parse_rational(&row.abs_error).is_some_and(|e| e.is_zero())
}
