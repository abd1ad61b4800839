use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use opertuple_core::generators::random_instance;
use opertuple_core::{
    classify, joint_spectrum, load_tuple_file, reproduce_example, run_audit, to_json,
    worked_example, AuditInput, AuditReport, Claim, ClassificationReport, MultiIndex, ParsedTuple,
    ToleranceModel, TupleFile,
};

#[derive(Parser)]
#[command(
    name = "opertuple",
    version,
    about = "Audit commuting matrix tuples: defects, joint spectra, m-inverses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Uniform absolute and relative tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Master seed for randomized steps.
    #[arg(long, env = "OPERTUPLE_SEED", default_value_t = 0)]
    seed: u64,
}

impl Common {
    fn tolerance(&self) -> Result<ToleranceModel> {
        Ok(match self.tol {
            Some(t) => ToleranceModel::uniform(t)?,
            None => ToleranceModel::default(),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Partial-isometry and structural classification of a tuple file.
    Classify {
        #[arg(long)]
        input: PathBuf,
        /// Order m (defaults to the file's value).
        #[arg(long)]
        m: Option<usize>,
        /// Exponent q as comma-separated integers (defaults to the file's value).
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Joint point spectrum, triangular diagonal and spectral radius.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check one claim on a tuple file or on seeded random instances.
    Audit {
        #[arg(long)]
        claim: Claim,
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        input: Option<PathBuf>,
        /// Number of random trials.
        #[arg(long)]
        random: Option<u64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        q: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Expected-versus-observed table for a worked example.
    Reproduce {
        #[arg(long)]
        example: String,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Write a worked example as a tuple file.
    Export {
        #[arg(long)]
        example: String,
    },
}

fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit_json<T: Serialize>(value: &T) -> Result<()> {
    emit(&format!("{}\n", to_json(value)))
}

fn parse_q(text: &str) -> Result<MultiIndex> {
    let entries = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .with_context(|| format!("invalid entry '{s}' in --q"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiIndex::new(entries))
}

fn order(parsed: &ParsedTuple, m: Option<usize>, q: Option<&str>) -> Result<(usize, MultiIndex)> {
    let m = m.or(parsed.m).unwrap_or(1);
    let q = match q {
        Some(text) => parse_q(text)?,
        None => parsed
            .q
            .clone()
            .unwrap_or_else(|| MultiIndex::ones(parsed.tuple.d())),
    };
    if q.d() != parsed.tuple.d() {
        bail!(
            "q has {} entries but the tuple has {} components",
            q.d(),
            parsed.tuple.d()
        );
    }
    Ok((m, q))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn classification_text(r: &ClassificationReport) -> String {
    let mut out = String::new();
    let what = format!("({};{})-partial isometry", r.m, r.q);
    let verdict = if r.partial_isometry.is_zero {
        what
    } else {
        format!("not {what}")
    };
    out.push_str(&format!("tuple: d = {}, dim = {}\n", r.d, r.dim));
    out.push_str(&format!("verdict: {verdict}\n"));
    out.push_str(&format!(
        "defect norm: {} (scale {})\n",
        r.partial_isometry.norm, r.partial_isometry.scale
    ));
    out.push_str(&format!("{}-isometry: {}\n", r.m, yes_no(r.is_m_isometry)));
    for c in &r.components {
        out.push_str(&format!(
            "T{} alone ({};{}): {} (defect norm {})\n",
            c.index + 1,
            r.m,
            c.q,
            yes_no(c.defect.is_zero),
            c.defect.norm
        ));
    }
    out.push_str(&format!(
        "N(T^q): dimension {}, reducing {}\n",
        r.null_space_dim,
        yes_no(r.null_space_reducing)
    ));
    out.push_str(&format!(
        "quasinormal: matricial {}, joint {}, spherical {}\n",
        yes_no(r.quasinormal.matricial),
        yes_no(r.quasinormal.joint),
        yes_no(r.quasinormal.spherical)
    ));
    out.push_str(&format!(
        "doubly commuting: {}\n",
        yes_no(r.doubly_commuting)
    ));
    out
}

#[derive(Serialize)]
struct RandomAudit {
    claim: Claim,
    seed: u64,
    trials: u64,
    counterexamples: usize,
    hypotheses_failed: usize,
    failed_conclusions: BTreeMap<String, usize>,
    reports: Vec<TrialReport>,
}

#[derive(Serialize)]
struct TrialReport {
    trial: u64,
    family: &'static str,
    d: usize,
    dim: usize,
    m: usize,
    q: MultiIndex,
    report: AuditReport,
}

fn random_audit(claim: Claim, trials: u64, common: &Common) -> Result<(RandomAudit, bool)> {
    let tol = common.tolerance()?;
    let reports = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let inst = random_instance(claim, common.seed, trial)?;
            let input = AuditInput {
                tuple: inst.tuple,
                inverse: inst.inverse,
                m: inst.m,
                q: inst.q,
            };
            let report = run_audit(claim, &input, &tol, inst.seed)?;
            Ok(TrialReport {
                trial,
                family: inst.family,
                d: input.tuple.d(),
                dim: input.tuple.dim(),
                m: input.m,
                q: input.q,
                report,
            })
        })
        .collect::<opertuple_core::Result<Vec<_>>>()?;
    let mut failed_conclusions = BTreeMap::new();
    for r in &reports {
        for v in r.report.sub_verdicts.iter().filter(|v| !v.holds) {
            *failed_conclusions.entry(v.name.clone()).or_insert(0) += 1;
        }
    }
    let counterexamples = reports
        .iter()
        .filter(|r| r.report.is_counterexample())
        .count();
    let summary = RandomAudit {
        claim,
        seed: common.seed,
        trials,
        counterexamples,
        hypotheses_failed: reports.iter().filter(|r| !r.report.hypotheses_hold).count(),
        failed_conclusions,
        reports,
    };
    Ok((summary, counterexamples > 0))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Classify {
            input,
            m,
            q,
            json,
            common,
        } => {
            let tol = common.tolerance()?;
            let parsed = load_tuple_file(&input, &tol)?;
            let (m, q) = order(&parsed, m, q.as_deref())?;
            let report = classify(&parsed.tuple, m, &q, &tol)?;
            if json {
                emit_json(&report)?;
            } else {
                emit(&classification_text(&report))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum { input, common } => {
            let tol = common.tolerance()?;
            let parsed = load_tuple_file(&input, &tol)?;
            emit_json(&joint_spectrum(&parsed.tuple, common.seed, &tol)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Audit {
            claim,
            input,
            random,
            m,
            q,
            common,
        } => {
            let counterexample = if let Some(trials) = random {
                let (summary, bad) = random_audit(claim, trials, &common)?;
                emit_json(&summary)?;
                bad
            } else {
                let tol = common.tolerance()?;
                let path = input.expect("clap enforces --input or --random");
                let parsed = load_tuple_file(&path, &tol)?;
                let (m, q) = order(&parsed, m, q.as_deref())?;
                let audit_input = AuditInput {
                    tuple: parsed.tuple,
                    inverse: parsed.inverse,
                    m,
                    q,
                };
                let report = run_audit(claim, &audit_input, &tol, common.seed)?;
                emit_json(&report)?;
                report.is_counterexample()
            };
            Ok(if counterexample {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Reproduce {
            example,
            json,
            common,
        } => {
            let table = reproduce_example(&example, common.seed, &common.tolerance()?)?;
            if json {
                emit_json(&table)?;
            } else {
                emit(&table.to_string())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Export { example } => {
            emit_json(&TupleFile::from_example(&worked_example(&example)?))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
