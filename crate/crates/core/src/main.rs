use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ffdivisor::harness::run::{write_output, EXIT_ASSERTION, EXIT_IO, EXIT_MANIFEST, EXIT_OK};
use ffdivisor::harness::{execute, render, verify, ExecOpts, Experiment, Manifest, RunError};
use ffdivisor::stats::set_dk_square_fault;

#[derive(Parser)]
#[command(name = "ffdivisor", version, about = "Divisor-function correlations over F_q[t]")]
struct Cli {
    /// Deliberately corrupt an arithmetic function to exercise the checks.
    #[arg(long, global = true, hide = true, value_enum)]
    inject_fault: Option<Fault>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    /// d_k is off by one on every prime-square factor.
    DkSquare,
}

#[derive(Subcommand)]
enum Command {
    /// Run every grid point of a manifest file.
    Run {
        manifest: PathBuf,
        /// Execution shards; the output does not depend on this.
        #[arg(long)]
        shards: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Multiply every factorization back and fail on mismatch.
        #[arg(long)]
        check_factorizations: bool,
    },
    /// Run the curated verification suite.
    VerifyAll {
        /// Only the fast subset on reduced grids.
        #[arg(long)]
        quick: bool,
    },
    /// Mean value of d_k over M_n.
    Mean(PointArgs),
    /// Shifted sums of d_k(f) d_k(f + h).
    Shifted(PointArgs),
    /// Products of d_{k_i}(f + h_i) over a shift tuple.
    Multishift(PointArgs),
    /// Mean of d_k(f)^2.
    Moment0(PointArgs),
    /// Mean of d_k(P + h) over irreducible P.
    Titchmarsh(PointArgs),
    /// Joint cycle-structure frequencies of f + h_i.
    Cycles(PointArgs),
    /// Shifted d_2 sums against (n+1)^2 - (n-1)^2/q.
    Estermann(PointArgs),
    /// Four-degree counts S(alpha, beta; gamma, delta).
    Scount(PointArgs),
    /// Monic solutions of Au - Bv = 1.
    Dioph(PointArgs),
    /// Truncated singular-series constant A_{k,q}(h).
    Akq(PointArgs),
    /// Exhaustive shifted sums against the conjectured leading term.
    Conjecture(PointArgs),
}

/// Each option maps to the manifest key of the same name.
#[derive(Args, Default)]
struct PointArgs {
    /// Field sizes: q, p^e, or lo..hi, comma separated.
    #[arg(long)]
    q: String,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
    /// k tuples separated by ';'.
    #[arg(long)]
    ks: Option<String>,
    /// Shifts separated by ';': "one", "t" or coefficient text low to high.
    #[arg(long)]
    h: Option<String>,
    /// Shift tuples separated by ';', shifts within a tuple by '|'.
    #[arg(long)]
    hs: Option<String>,
    /// Partition tuples such as "2+1|3;3|3".
    #[arg(long)]
    lambdas: Option<String>,
    /// Degree tuples such as "1,1|1,1;2,0|0,2".
    #[arg(long)]
    tuples: Option<String>,
    /// brute or direct.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    /// Truncation degree of the series.
    #[arg(long = "D", alias = "degree")]
    degree: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    shards: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    budget: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl PointArgs {
    fn manifest_text(&self, experiment: Experiment) -> Result<String, String> {
        let pairs = [
            ("q", Some(&self.q)),
            ("n", self.n.as_ref()),
            ("k", self.k.as_ref()),
            ("ks", self.ks.as_ref()),
            ("h", self.h.as_ref()),
            ("hs", self.hs.as_ref()),
            ("lambdas", self.lambdas.as_ref()),
            ("tuples", self.tuples.as_ref()),
            ("mode", self.mode.as_ref()),
            ("a", self.a.as_ref()),
            ("b", self.b.as_ref()),
            ("D", self.degree.as_ref()),
            ("trials", self.trials.as_ref()),
            ("shards", self.shards.as_ref()),
            ("seed", self.seed.as_ref()),
            ("budget", self.budget.as_ref()),
            ("format", self.format.as_ref()),
        ];
        let mut text = format!("experiment = {experiment}\n");
        for (key, value) in pairs {
            if let Some(v) = value {
                if v.contains(['\n', '\r', '#']) {
                    return Err(format!("--{key} may not contain newlines or '#'"));
                }
                text.push_str(&format!("{key} = {v}\n"));
            }
        }
        Ok(text)
    }
}

fn report(err: &RunError) -> i32 {
    eprintln!("ffdivisor: {err}");
    err.exit_code()
}

fn run_manifest(manifest: &Manifest, exec: &ExecOpts, out: Option<PathBuf>) -> i32 {
    let outcome = match execute(manifest, exec) {
        Ok(o) => o,
        Err(e) => return report(&e),
    };
    let text = match render(&outcome.rows, manifest.format) {
        Ok(t) => t,
        Err(e) => return report(&e),
    };
    match out.or_else(|| manifest.output.clone()) {
        Some(path) => {
            if let Err(e) = write_output(&path, &text) {
                return report(&e);
            }
        }
        None => print!("{text}"),
    }
    for failure in &outcome.failures {
        eprintln!("ffdivisor: identity violated: {failure}");
    }
    outcome.exit_code()
}

fn verify_all(quick: bool) -> i32 {
    let start = Instant::now();
    let outcomes = verify::run_all(quick, |o| println!("{}", o.line()));
    let passed = outcomes.iter().filter(|o| o.ok()).count();
    println!(
        "{passed}/{} criteria passed in {:.1}s{}",
        outcomes.len(),
        start.elapsed().as_secs_f64(),
        if quick { " (quick subset)" } else { "" }
    );
    if verify::all_ok(&outcomes) {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(Fault::DkSquare) = cli.inject_fault {
        set_dk_square_fault(true);
    }
    let code = match cli.command {
        Command::Run {
            manifest,
            shards,
            out,
            check_factorizations,
        } => match fs::read_to_string(&manifest) {
            Err(e) => {
                eprintln!("ffdivisor: {}: {e}", manifest.display());
                EXIT_IO
            }
            Ok(text) => match Manifest::parse(&text) {
                Err(e) => {
                    eprintln!("ffdivisor: {}: {e}", manifest.display());
                    EXIT_MANIFEST
                }
                Ok(m) => run_manifest(
                    &m,
                    &ExecOpts {
                        shards,
                        verify_factorizations: check_factorizations,
                    },
                    out,
                ),
            },
        },
        Command::VerifyAll { quick } => verify_all(quick),
        Command::Mean(a) => point(Experiment::Mean, a),
        Command::Shifted(a) => point(Experiment::Shifted, a),
        Command::Multishift(a) => point(Experiment::Multishift, a),
        Command::Moment0(a) => point(Experiment::Moment0, a),
        Command::Titchmarsh(a) => point(Experiment::Titchmarsh, a),
        Command::Cycles(a) => point(Experiment::Cycles, a),
        Command::Estermann(a) => point(Experiment::Estermann, a),
        Command::Scount(a) => point(Experiment::Scount, a),
        Command::Dioph(a) => point(Experiment::Dioph, a),
        Command::Akq(a) => point(Experiment::Akq, a),
        Command::Conjecture(a) => point(Experiment::Conjecture, a),
    };
    ExitCode::from(code as u8)
}

fn point(experiment: Experiment, args: PointArgs) -> i32 {
    let text = match args.manifest_text(experiment) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("ffdivisor: {e}");
            return EXIT_MANIFEST;
        }
    };
    match Manifest::parse(&text) {
        Ok(m) => run_manifest(&m, &ExecOpts::default(), args.out),
        Err(e) => {
            eprintln!("ffdivisor: {e}");
            EXIT_MANIFEST
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_args_become_manifests() {
        let args = PointArgs {
            q: "3,5".into(),
            n: Some("2..3".into()),
            k: Some("2".into()),
            h: Some("one".into()),
            ..Default::default()
        };
        let m = Manifest::parse(&args.manifest_text(Experiment::Shifted).unwrap()).unwrap();
        assert_eq!(m.fields.len(), 2);
        assert_eq!(m.ns, [2, 3]);
        let bad = PointArgs { q: "3\nn = 4".into(), ..Default::default() };
        assert!(bad.manifest_text(Experiment::Mean).is_err());
    }
}
