//! Result rows and their CSV/JSON serialization.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::stats::ExperimentResult;

/// Bumped whenever a column is added, removed or reinterpreted.
pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 16] = [
    "experiment",
    "p",
    "e",
    "q",
    "n",
    "k",
    "h",
    "value",
    "main_term",
    "abs_error",
    "scaled_error",
    "raw_sum",
    "normalizer",
    "flags",
    "seed",
    "shards",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub p: u32,
    pub e: u32,
    pub q: u32,
    pub n: usize,
    pub k: String,
    pub h: String,
    pub value: String,
    pub main_term: String,
    pub abs_error: String,
    pub scaled_error: f64,
    pub raw_sum: String,
    pub normalizer: String,
    pub flags: String,
    pub seed: u64,
    pub shards: usize,
}

/// `num/den` in lowest terms with a positive denominator.
pub fn rational_text(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses [`rational_text`] output.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let (n, d) = text.split_once('/')?;
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d == BigInt::from(0) {
        return None;
    }
    Some(BigRational::new(n, d))
}

/// Labels that vary per experiment.
#[derive(Clone, Debug, Default)]
pub struct RowLabels {
    pub experiment: String,
    pub n: usize,
    pub k: String,
    pub h: String,
    pub seed: u64,
    pub shards: usize,
}

impl ResultRow {
    pub fn from_result(res: &ExperimentResult, labels: RowLabels, extra_flags: &[String]) -> ResultRow {
        let mut flags = res.flags.clone();
        flags.extend(extra_flags.iter().cloned());
        ResultRow {
            experiment: labels.experiment,
            p: res.params.p,
            e: res.params.e,
            q: res.params.q,
            n: labels.n,
            k: labels.k,
            h: labels.h,
            value: rational_text(&res.value),
            main_term: rational_text(&res.main_term),
            abs_error: rational_text(&res.abs_error),
            scaled_error: res.scaled_error,
            raw_sum: res.raw_sum.to_string(),
            normalizer: res.normalizer.to_string(),
            flags: flags.join(";"),
            seed: labels.seed,
            shards: labels.shards,
        }
    }
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    schema_version: u32,
    columns: &'a [&'a str],
    rows: &'a [ResultRow],
}

pub fn to_csv(rows: &[ResultRow]) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(COLUMNS).map_err(|e| e.to_string())?;
    }
    for row in rows {
        w.serialize(row).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

pub fn to_json(rows: &[ResultRow]) -> Result<String, String> {
    let doc = JsonDocument {
        schema_version: SCHEMA_VERSION,
        columns: &COLUMNS,
        rows,
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
    text.push('\n');
    Ok(text)
}
