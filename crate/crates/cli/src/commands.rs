use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use potrel_core::law::{self, Bounds};
use potrel_core::monitor::{self, replay_log, PlanRow, SessionHeader, TestsRemaining};
use potrel_core::relevance::{tokenize_bytes, Cqsm, RelevanceMode};
use potrel_core::sites::{blackbox_sensitive_sites, SiteModel};
use potrel_core::{MonitorSession, SigmaTarget, TokenizerConfig};
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::format::{sig4, Output, TargetArg};

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    println!("{text}");
    Ok(())
}

pub struct BoundsInput {
    pub n: u64,
    pub coverage: f64,
    pub semantic_mean: f64,
    pub o_constant: f64,
    pub extremes: Option<(f64, f64)>,
}

pub fn bounds(out: &Output, input: BoundsInput) -> Result<(), CliError> {
    let p_mid = match input.extremes {
        Some((lower, upper)) => law::p_mid(lower, upper)?,
        None => input.semantic_mean,
    };
    let bounds = law::evaluate_bounds(
        input.n as f64,
        input.coverage,
        input.semantic_mean,
        p_mid,
        input.o_constant,
    )?;
    if out.json {
        return print_json(&json!({
            "n": input.n,
            "coverage": input.coverage,
            "semantic_mean": input.semantic_mean,
            "p_mid": p_mid,
            "o_constant": input.o_constant,
            "bounds": bounds,
        }));
    }
    match bounds {
        Bounds::NotGrowing => println!(
            "lambda_max   NOT_GROWING (coverage {} does not exceed semantic mean {})",
            sig4(input.coverage),
            sig4(input.semantic_mean)
        ),
        Bounds::Finite(r) => {
            println!("lambda_min   {}", sig4(r.lambda_min));
            println!("lambda_max   {}", sig4(r.lambda_max));
            println!(
                "reliability  [{}, {}]",
                sig4(r.reliability_min),
                sig4(r.reliability_max)
            );
        }
    }
    Ok(())
}

pub enum SiteSource {
    Sensitive(u64),
    Blackbox,
    Matrix(PathBuf),
}

fn remaining_text(r: TestsRemaining) -> String {
    match r {
        TestsRemaining::Count(c) => c.to_string(),
        TestsRemaining::NoSolution => "NO_SOLUTION".into(),
    }
}

fn target_label(t: SigmaTarget) -> String {
    match t {
        SigmaTarget::FourSigma => "four".into(),
        SigmaTarget::SixSigma => "six".into(),
        SigmaTarget::EnoughSigma => "enough".into(),
        SigmaTarget::Custom(l) => format!("lambda={l}"),
    }
}

pub fn plan(
    out: &Output,
    n: Option<u64>,
    source: SiteSource,
    target: TargetArg,
) -> Result<(), CliError> {
    let mut extrapolated = None;
    let (n, s0) = match source {
        SiteSource::Sensitive(s0) => (n.expect("clap requires --n"), s0),
        SiteSource::Blackbox => {
            let n = n.expect("clap requires --n");
            (n, blackbox_sensitive_sites(n)?)
        }
        SiteSource::Matrix(path) => {
            let model = SiteModel::load(&path)?;
            let n = match n {
                Some(n) => n,
                None => model.total_sites()?,
            };
            if let Some(profile) = model.profile()? {
                extrapolated = profile.extrapolated_coverage().ok();
            }
            (n, model.sensitive_sites()?)
        }
    };
    let plan = monitor::plan(n, s0)?;
    let requested: PlanRow = monitor::plan_row(n, s0, target.0)?;

    if out.json {
        print_json(&json!({
            "plan": plan,
            "target": requested,
            "extrapolated_coverage": extrapolated,
        }))?;
    } else {
        println!(
            "n = {n}, sensitive sites = {s0}, semantic mean = {}",
            sig4(plan.semantic_mean)
        );
        println!("target\tlambda_rq\ttests\tcoverage");
        for row in &plan.rows {
            println!(
                "{}\t{}\t{}\t{}",
                serde_json::to_value(row.target)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default(),
                sig4(row.lambda_rq),
                remaining_text(row.required_tests),
                row.coverage.map(sig4).unwrap_or_else(|| "-".into())
            );
        }
        for ratio in &plan.ratios {
            println!(
                "effort {}/{}\t{}",
                serde_json::to_value(ratio.numerator).unwrap_or_default().as_str().unwrap_or(""),
                serde_json::to_value(ratio.denominator).unwrap_or_default().as_str().unwrap_or(""),
                ratio.ratio.map(sig4).unwrap_or_else(|| "-".into())
            );
        }
        if let Some(c) = extrapolated {
            println!("extrapolated coverage\t{}", sig4(c));
        }
        println!(
            "required tests ({})\t{}",
            target_label(target.0),
            remaining_text(requested.required_tests)
        );
    }
    match requested.required_tests {
        TestsRemaining::Count(_) => Ok(()),
        TestsRemaining::NoSolution => Err(CliError::Domain(format!(
            "NO_SOLUTION: target {} is unreachable with n = {n}",
            target_label(target.0)
        ))),
    }
}

fn status_line(line: usize, session: &MonitorSession, json: bool) -> String {
    match session.status() {
        Ok(status) if json => json!({"line": line, "status": status}).to_string(),
        Ok(status) => {
            let lambda = match status.bounds {
                Bounds::Finite(r) => sig4(r.lambda_max),
                Bounds::NotGrowing => "NOT_GROWING".into(),
            };
            format!(
                "line {line}: n={} s={} s0={} tau={} lambda_max={} target_met={} remaining={}",
                status.total_sites,
                status.tested_sites,
                status.sensitive_sites,
                sig4(status.tau),
                lambda,
                status.target_met,
                remaining_text(status.tests_remaining_to_target)
            )
        }
        Err(e) => format!("line {line}: status unavailable: {e}"),
    }
}

pub fn monitor(out: &Output, events: &Path, session: Option<&Path>) -> Result<(), CliError> {
    let header = match session {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let header: SessionHeader = serde_json::from_str(&text)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Some(header)
        }
        None => None,
    };
    let file =
        File::open(events).map_err(|e| CliError::Io(format!("{}: {e}", events.display())))?;
    let stdout = io::stdout();
    let session = replay_log(BufReader::new(file), header, |line, s| {
        if !out.quiet {
            let _ = writeln!(stdout.lock(), "{}", status_line(line, s, out.json));
        }
    })?;
    print_json(&session.status()?)
}

pub fn curve(
    out: &Output,
    n: u64,
    semantic_mean: f64,
    resolution: u32,
    destination: &Path,
) -> Result<(), CliError> {
    let step = (1.0 - semantic_mean) / (resolution as f64 + 1.0);
    let writer: Box<dyn Write> = if destination.as_os_str() == "-" {
        Box::new(io::stdout())
    } else {
        Box::new(
            File::create(destination)
                .map_err(|e| CliError::Io(format!("{}: {e}", destination.display())))?,
        )
    };
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["c", "lambda_max", "reliability", "relevance"])?;
    for i in 1..=resolution {
        let c = semantic_mean + i as f64 * step;
        let lambda = law::lambda_max(n as f64, c, semantic_mean)?;
        let (lambda_text, reliability_text) = match lambda.finite() {
            Some(l) => (l.to_string(), law::reliability_from_lambda(l)?.to_string()),
            None => ("NOT_GROWING".into(), String::new()),
        };
        let relevance = law::relevance(n as f64, c, semantic_mean)?;
        csv.write_record([
            c.to_string(),
            lambda_text,
            reliability_text,
            relevance.to_string(),
        ])?;
    }
    csv.flush()?;
    if !out.quiet && destination.as_os_str() != "-" {
        eprintln!("wrote {resolution} rows to {}", destination.display());
    }
    Ok(())
}

pub fn index(
    out: &Output,
    inputs: &[PathBuf],
    destination: &Path,
    tokenizer: TokenizerConfig,
) -> Result<(), CliError> {
    let mut docs = Vec::with_capacity(inputs.len());
    for path in inputs {
        let bytes =
            fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let source = path.display().to_string();
        // validates the encoding before indexing
        tokenize_bytes(&bytes, &tokenizer, &source)?;
        let id = path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or(source);
        docs.push((id, String::from_utf8(bytes).expect("checked above")));
    }
    let cqsm = Cqsm::build(docs, tokenizer)?;
    cqsm.save(destination)?;
    if out.json {
        print_json(&json!({
            "index": destination.display().to_string(),
            "documents": cqsm.documents().len(),
        }))?;
    } else if !out.quiet {
        println!(
            "indexed {} documents into {}",
            cqsm.documents().len(),
            destination.display()
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct RankedRow<'a> {
    doc_id: &'a str,
    relevance: f64,
    coverage: f64,
    mode: RelevanceMode,
}

pub fn query(
    _out: &Output,
    index: &Path,
    text: Option<&str>,
    query_file: Option<&Path>,
    table: bool,
) -> Result<(), CliError> {
    let cqsm = Cqsm::load(index)?;
    let query = match (text, query_file) {
        (Some(t), _) => t.to_owned(),
        (None, Some(path)) => {
            let bytes =
                fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            String::from_utf8(bytes)
                .map_err(|_| CliError::Io(format!("{}: query is not valid UTF-8", path.display())))?
        }
        (None, None) => return Err(CliError::Usage("a query is required".into())),
    };
    let ranked = cqsm.rank(&query)?;
    if table {
        println!("doc_id\trelevance\tcoverage\tmode");
        for r in &ranked {
            println!(
                "{}\t{}\t{}\t{}",
                r.doc_id,
                sig4(r.score.relevance),
                sig4(r.score.coverage),
                serde_json::to_value(r.score.mode)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default()
            );
        }
        return Ok(());
    }
    let rows: Vec<_> = ranked
        .iter()
        .map(|r| RankedRow {
            doc_id: &r.doc_id,
            relevance: r.score.relevance,
            coverage: r.score.coverage,
            mode: r.score.mode,
        })
        .collect();
    print_json(&rows)
}
