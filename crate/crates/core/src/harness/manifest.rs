//! Flat `key = value` experiment manifests.
//!
//! ```text
//! # comment
//! experiment = shifted
//! field = 3, 5, 7, 2^3, 11..13
//! n = 3
//! k = 2..3
//! h = one; t; 1,0,1
//! ```
//!
//! Numeric grids are comma lists whose items are numbers or inclusive
//! `lo..hi` ranges. Polynomial grids are `;`-separated because polynomial text
//! itself uses commas; within a tuple the shifts are separated by `|`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::combinatorics::Partition;
use crate::enumerate::DEFAULT_BUDGET;
use crate::gf::{is_prime, prime_power, MAX_ORDER};
use crate::identities::{CountMode, SCountParams};
use crate::poly::PolyPattern;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ManifestError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("key {key:?}: {message}")]
    Value { key: String, message: String },
    #[error("missing required key {0:?}")]
    Missing(&'static str),
}

fn value_err(key: &str, message: impl Into<String>) -> ManifestError {
    ManifestError::Value {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    Mean,
    Shifted,
    Multishift,
    Moment0,
    Titchmarsh,
    Cycles,
    Estermann,
    Scount,
    Dioph,
    Akq,
    Conjecture,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::Mean,
        Experiment::Shifted,
        Experiment::Multishift,
        Experiment::Moment0,
        Experiment::Titchmarsh,
        Experiment::Cycles,
        Experiment::Estermann,
        Experiment::Scount,
        Experiment::Dioph,
        Experiment::Akq,
        Experiment::Conjecture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Mean => "mean",
            Experiment::Shifted => "shifted",
            Experiment::Multishift => "multishift",
            Experiment::Moment0 => "moment0",
            Experiment::Titchmarsh => "titchmarsh",
            Experiment::Cycles => "cycles",
            Experiment::Estermann => "estermann",
            Experiment::Scount => "scount",
            Experiment::Dioph => "dioph",
            Experiment::Akq => "akq",
            Experiment::Conjecture => "conjecture",
        }
    }

    fn needs_n(self) -> bool {
        !matches!(self, Experiment::Akq | Experiment::Scount)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| format!("unknown experiment {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}; expected csv or json")),
        }
    }
}

/// A field size `q = p^e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldSize {
    pub p: u32,
    pub e: u32,
}

impl FieldSize {
    pub fn q(self) -> u64 {
        (self.p as u64).pow(self.e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub experiment: Experiment,
    pub fields: Vec<FieldSize>,
    pub ns: Vec<usize>,
    /// Grid of `k` values; tuples for multi-shift sums, single values otherwise.
    pub ks: Vec<Vec<u32>>,
    /// Grid of shifts; tuples for multi-shift and cycle statistics.
    pub hs: Vec<Vec<PolyPattern>>,
    /// Partition tuples for cycle statistics; empty means every tuple.
    pub lambdas: Vec<Vec<Partition>>,
    /// Degree tuples for four-degree counts; empty means every tuple of each `n`.
    pub tuples: Vec<SCountParams>,
    pub mode: CountMode,
    pub a: Vec<PolyPattern>,
    pub b: Vec<PolyPattern>,
    pub degree: usize,
    /// Random-permutation trials compared against cycle frequencies; 0 disables.
    pub trials: u64,
    pub shards: usize,
    pub seed: u64,
    pub budget: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

const KEYS: [&str; 20] = [
    "experiment", "field", "n", "k", "ks", "h", "hs", "lambdas", "tuples", "mode", "a", "b", "D", "trials", "shards",
    "seed", "budget", "output", "format", "q",
];

fn parse_u64_item(key: &str, item: &str) -> Result<Vec<u64>, ManifestError> {
    let num = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| value_err(key, format!("{s:?} is not a non-negative integer")))
    };
    match item.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            if lo > hi {
                return Err(value_err(key, format!("empty range {item:?}")));
            }
            if hi - lo > 1 << 20 {
                return Err(value_err(key, format!("range {item:?} is too long")));
            }
            Ok((lo..=hi).collect())
        }
        None => Ok(vec![num(item)?]),
    }
}

/// Comma list of numbers and inclusive `lo..hi` ranges.
pub fn parse_number_list(key: &str, value: &str) -> Result<Vec<u64>, ManifestError> {
    let mut out = Vec::new();
    for item in value.split(',') {
        if item.trim().is_empty() {
            return Err(value_err(key, "empty list item"));
        }
        out.extend(parse_u64_item(key, item)?);
    }
    Ok(out)
}

fn parse_small<T: TryFrom<u64>>(key: &str, v: u64) -> Result<T, ManifestError> {
    T::try_from(v).map_err(|_| value_err(key, format!("{v} is too large")))
}

fn parse_field_item(item: &str) -> Result<Vec<FieldSize>, ManifestError> {
    let key = "field";
    let item = item.trim();
    if let Some((p, e)) = item.split_once('^') {
        let p: u64 = p.trim().parse().map_err(|_| value_err(key, format!("bad prime in {item:?}")))?;
        let e: u32 = e.trim().parse().map_err(|_| value_err(key, format!("bad exponent in {item:?}")))?;
        if !is_prime(p) || e == 0 {
            return Err(value_err(key, format!("{item:?} is not a prime power p^e with e >= 1")));
        }
        let q = p.checked_pow(e).filter(|&q| q <= MAX_ORDER);
        if q.is_none() {
            return Err(value_err(key, format!("{item:?} exceeds the largest supported field")));
        }
        return Ok(vec![FieldSize { p: p as u32, e }]);
    }
    let ranged = item.contains("..");
    let mut out = Vec::new();
    for q in parse_u64_item(key, item)? {
        match prime_power(q) {
            Some((p, e)) if q <= MAX_ORDER => out.push(FieldSize { p, e }),
            _ if ranged => {}
            _ => return Err(value_err(key, format!("{q} is not a supported prime power"))),
        }
    }
    if out.is_empty() {
        return Err(value_err(key, format!("{item:?} contains no prime power")));
    }
    Ok(out)
}

fn split_entries(value: &str) -> impl Iterator<Item = &str> {
    value.split(';').map(str::trim)
}

fn parse_patterns(key: &str, value: &str, sep: char) -> Result<Vec<PolyPattern>, ManifestError> {
    value
        .split(sep)
        .map(|t| t.trim().parse::<PolyPattern>().map_err(|e| value_err(key, e.to_string())))
        .collect()
}

fn parse_tuple(key: &str, entry: &str) -> Result<SCountParams, ManifestError> {
    let (left, right) = entry
        .split_once('|')
        .ok_or_else(|| value_err(key, format!("expected \"alpha,beta | gamma,delta\", got {entry:?}")))?;
    let pair = |s: &str| -> Result<(usize, usize), ManifestError> {
        let v: Vec<u64> = s
            .split(',')
            .map(|x| x.trim().parse::<u64>().map_err(|_| value_err(key, format!("bad degree in {entry:?}"))))
            .collect::<Result<_, _>>()?;
        match v[..] {
            [a, b] => Ok((parse_small(key, a)?, parse_small(key, b)?)),
            _ => Err(value_err(key, format!("expected two degrees on each side of {entry:?}"))),
        }
    };
    let (alpha, beta) = pair(left)?;
    let (gamma, delta) = pair(right)?;
    SCountParams::new(alpha, beta, gamma, delta).map_err(|e| value_err(key, e.to_string()))
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Manifest, ManifestError> {
        let mut kv: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ManifestError::Syntax {
                line: line_no,
                message: format!("expected \"key = value\", got {line:?}"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let known = KEYS.iter().find(|k| **k == key).ok_or_else(|| ManifestError::Syntax {
                line: line_no,
                message: format!("unknown key {key:?}"),
            })?;
            if value.is_empty() {
                return Err(ManifestError::Syntax {
                    line: line_no,
                    message: format!("empty value for {key:?}"),
                });
            }
            if kv.insert(known, (line_no, value)).is_some() {
                return Err(ManifestError::Syntax {
                    line: line_no,
                    message: format!("duplicate key {key:?}"),
                });
            }
        }
        let get = |k: &str| kv.get(k).map(|(_, v)| *v);

        let experiment: Experiment = get("experiment")
            .ok_or(ManifestError::Missing("experiment"))?
            .parse()
            .map_err(|e: String| value_err("experiment", e))?;

        let field_text = match (get("field"), get("q")) {
            (Some(_), Some(_)) => return Err(value_err("q", "give either field or q, not both")),
            (Some(f), None) | (None, Some(f)) => f,
            (None, None) => return Err(ManifestError::Missing("field")),
        };
        let mut fields = Vec::new();
        for item in field_text.split(',') {
            fields.extend(parse_field_item(item)?);
        }

        let ns = match get("n") {
            Some(v) => parse_number_list("n", v)?
                .into_iter()
                .map(|n| parse_small::<usize>("n", n).and_then(|n| {
                    if n > 64 { Err(value_err("n", format!("degree {n} is too large"))) } else { Ok(n) }
                }))
                .collect::<Result<Vec<_>, _>>()?,
            None if experiment.needs_n() => return Err(ManifestError::Missing("n")),
            None => Vec::new(),
        };

        let ks: Vec<Vec<u32>> = match (get("k"), get("ks")) {
            (Some(_), Some(_)) => return Err(value_err("ks", "give either k or ks, not both")),
            (Some(v), None) => parse_number_list("k", v)?
                .into_iter()
                .map(|k| parse_small::<u32>("k", k).map(|k| vec![k]))
                .collect::<Result<_, _>>()?,
            (None, Some(v)) => split_entries(v)
                .map(|entry| {
                    parse_number_list("ks", entry)?
                        .into_iter()
                        .map(|k| parse_small::<u32>("ks", k))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<_, _>>()?,
            (None, None) => Vec::new(),
        };
        if ks.iter().flatten().any(|&k| k == 0 || k > 64) {
            return Err(value_err("k", "k must lie in 1..=64"));
        }

        let hs: Vec<Vec<PolyPattern>> = match (get("h"), get("hs")) {
            (Some(_), Some(_)) => return Err(value_err("hs", "give either h or hs, not both")),
            (Some(v), None) => split_entries(v)
                .map(|e| e.parse::<PolyPattern>().map(|p| vec![p]).map_err(|err| value_err("h", err.to_string())))
                .collect::<Result<_, _>>()?,
            (None, Some(v)) => split_entries(v).map(|e| parse_patterns("hs", e, '|')).collect::<Result<_, _>>()?,
            (None, None) => Vec::new(),
        };

        let lambdas = match get("lambdas") {
            Some(v) => split_entries(v)
                .map(|entry| {
                    entry
                        .split('|')
                        .map(|p| p.trim().parse::<Partition>().map_err(|e| value_err("lambdas", e.to_string())))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<_, _>>()?,
            None => Vec::new(),
        };

        let tuples = match get("tuples") {
            Some(v) => split_entries(v).map(|e| parse_tuple("tuples", e)).collect::<Result<_, _>>()?,
            None => Vec::new(),
        };

        let mode = match get("mode") {
            None | Some("brute") => CountMode::Brute,
            Some("direct") => CountMode::Direct,
            Some(other) => return Err(value_err("mode", format!("unknown mode {other:?}; expected brute or direct"))),
        };

        let pats = |key: &str| -> Result<Vec<PolyPattern>, ManifestError> {
            match get(key) {
                Some(v) => split_entries(v)
                    .map(|e| e.parse::<PolyPattern>().map_err(|err| value_err(key, err.to_string())))
                    .collect(),
                None => Ok(Vec::new()),
            }
        };
        let a = pats("a")?;
        let b = pats("b")?;

        let single = |key: &str, default: u64| -> Result<u64, ManifestError> {
            match get(key) {
                Some(v) => v.parse::<u64>().map_err(|_| value_err(key, format!("{v:?} is not a non-negative integer"))),
                None => Ok(default),
            }
        };
        let degree = parse_small::<usize>("D", single("D", crate::conjecture::DEFAULT_DEGREE as u64)?)?;
        if degree > 64 {
            return Err(value_err("D", "truncation degree is too large"));
        }
        let trials = single("trials", 0)?;
        let shards = parse_small::<usize>("shards", single("shards", 1)?)?;
        if shards == 0 || shards > 1 << 16 {
            return Err(value_err("shards", "shards must lie in 1..=65536"));
        }
        let seed = single("seed", 0)?;
        let budget = single("budget", DEFAULT_BUDGET)?;
        let output = get("output").map(PathBuf::from);
        let format = match get("format") {
            Some(v) => v.parse().map_err(|e: String| value_err("format", e))?,
            None => Format::Csv,
        };

        let manifest = Manifest {
            experiment,
            fields,
            ns,
            ks,
            hs,
            lambdas,
            tuples,
            mode,
            a,
            b,
            degree,
            trials,
            shards,
            seed,
            budget,
            output,
            format,
        };
        manifest.check_shape()?;
        Ok(manifest)
    }

    fn check_shape(&self) -> Result<(), ManifestError> {
        use Experiment::*;
        let need = |ok: bool, key: &'static str| if ok { Ok(()) } else { Err(ManifestError::Missing(key)) };
        match self.experiment {
            Mean | Moment0 => need(!self.ks.is_empty(), "k")?,
            Shifted | Titchmarsh | Akq | Conjecture => {
                need(!self.ks.is_empty(), "k")?;
                need(!self.hs.is_empty(), "h")?;
            }
            Multishift => {
                need(!self.ks.is_empty(), "ks")?;
                need(!self.hs.is_empty(), "hs")?;
            }
            Cycles => need(!self.hs.is_empty(), "hs")?,
            Dioph => {
                need(!self.a.is_empty(), "a")?;
                need(!self.b.is_empty(), "b")?;
            }
            Estermann => {}
            Scount => {
                if self.tuples.is_empty() {
                    need(!self.ns.is_empty(), "n")?;
                }
            }
        }
        let single_k = !matches!(self.experiment, Multishift);
        if single_k && self.ks.iter().any(|t| t.len() != 1) {
            return Err(value_err("ks", "this experiment takes single k values; use k"));
        }
        let single_h = !matches!(self.experiment, Multishift | Cycles);
        if single_h && self.hs.iter().any(|t| t.len() != 1) {
            return Err(value_err("hs", "this experiment takes single shifts; use h"));
        }
        if self.experiment == Multishift {
            for (ks, hs) in self.ks.iter().flat_map(|k| self.hs.iter().map(move |h| (k, h))) {
                if ks.len() != hs.len() {
                    return Err(value_err("ks", "every k tuple needs as many entries as every shift tuple"));
                }
            }
        }
        if !self.lambdas.is_empty() {
            if self.experiment != Cycles {
                return Err(value_err("lambdas", "only cycle statistics take partitions"));
            }
            for (l, hs) in self.lambdas.iter().flat_map(|l| self.hs.iter().map(move |h| (l, h))) {
                if l.len() != hs.len() {
                    return Err(value_err("lambdas", "every partition tuple needs one partition per shift"));
                }
            }
        }
        Ok(())
    }
}
