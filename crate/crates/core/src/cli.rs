//! Command-line front end: `run <experiment>` and `report <path>`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiments::{round12, run, ExperimentError, Params, Record, EXPERIMENTS};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Jsonl,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "bulab", version, about = "Blind-unforgeability experiments and numerical checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its records.
    Run(RunArgs),
    /// Summarize a records file.
    Report {
        path: PathBuf,
    },
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(EXPERIMENTS))]
    pub experiment: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    /// Query count for the hybrid check, runtime bound for the classical conversion.
    #[arg(long = "T")]
    pub t: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub c: Option<usize>,
    /// Quantum samples per attack, or blinding draws per circuit in the hybrid check.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub game_trials: Option<u64>,
    #[arg(long)]
    pub seed: u64,
    /// Append records here instead of printing them.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    pub format: Format,
}

impl RunArgs {
    pub fn params(&self) -> Params {
        Params {
            n: self.n,
            m: self.m,
            q: self.q,
            t: self.t,
            eps: self.eps,
            trials: self.trials,
            c: self.c,
            samples: self.samples,
            game_trials: self.game_trials,
            seed: self.seed,
        }
    }
}

/// Flat CSV form of a [`Record`]; `params` holds the JSON object.
#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    experiment: String,
    check: String,
    params: String,
    seed: u64,
    wins: Option<u64>,
    trials: Option<u64>,
    rate: Option<f64>,
    ci_lo: Option<f64>,
    ci_hi: Option<f64>,
    bound: Option<f64>,
    measured: Option<f64>,
    margin: Option<f64>,
    pass: Option<bool>,
    formula: String,
    note: String,
    blinding_mode: Option<crate::func::BlindingMode>,
    realized_eps: Option<f64>,
    seed_rule: String,
    version: String,
    wall_clock_s: f64,
}

impl CsvRow {
    fn from_record(r: &Record) -> Result<Self, CliError> {
        let f = |x: Option<f64>| x.map(round12);
        Ok(Self {
            experiment: r.experiment.clone(),
            check: r.check.clone(),
            params: serde_json::to_string(&r.params)?,
            seed: r.seed,
            wins: r.wins,
            trials: r.trials,
            rate: f(r.rate),
            ci_lo: f(r.ci_lo),
            ci_hi: f(r.ci_hi),
            bound: f(r.bound),
            measured: f(r.measured),
            margin: f(r.margin),
            pass: r.pass,
            formula: r.formula.clone(),
            note: r.note.clone(),
            blinding_mode: r.blinding_mode,
            realized_eps: f(r.realized_eps),
            seed_rule: r.seed_rule.clone(),
            version: r.version.clone(),
            wall_clock_s: round12(r.wall_clock_s),
        })
    }

    fn into_record(self) -> Result<Record, CliError> {
        Ok(Record {
            experiment: self.experiment,
            check: self.check,
            params: serde_json::from_str(&self.params)?,
            seed: self.seed,
            wins: self.wins,
            trials: self.trials,
            rate: self.rate,
            ci_lo: self.ci_lo,
            ci_hi: self.ci_hi,
            bound: self.bound,
            measured: self.measured,
            margin: self.margin,
            pass: self.pass,
            formula: self.formula,
            note: self.note,
            blinding_mode: self.blinding_mode,
            realized_eps: self.realized_eps,
            seed_rule: self.seed_rule,
            version: self.version,
            wall_clock_s: self.wall_clock_s,
        })
    }
}

/// Writes records; the CSV header is emitted only when `header` is set.
pub fn write_records(out: &mut dyn Write, records: &[Record], format: Format, header: bool) -> Result<(), CliError> {
    match format {
        Format::Jsonl => {
            for r in records {
                serde_json::to_writer(&mut *out, r)?;
                out.write_all(b"\n")?;
            }
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(header).from_writer(out);
            for r in records {
                w.serialize(CsvRow::from_record(r)?)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Appends to `path`, writing a CSV header only into an empty file.
pub fn append_records(path: &Path, records: &[Record], format: Format) -> Result<(), CliError> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let empty = file.metadata()?.len() == 0;
    write_records(&mut file, records, format, empty)?;
    Ok(())
}

/// Parses a records file in either format. Lines of the other format are rejected by line number.
pub fn parse_records(text: &str) -> Result<Vec<Record>, CliError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, first)) = lines.next() else { return Ok(Vec::new()) };
    if first.trim_start().starts_with('{') {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            if !line.trim_start().starts_with('{') {
                return Err(CliError::Malformed { line: i + 1, msg: "expected a JSON record".into() });
            }
            let r: Record =
                serde_json::from_str(line).map_err(|e| CliError::Malformed { line: i + 1, msg: e.to_string() })?;
            out.push(r);
        }
        return Ok(out);
    }
    if let Some((i, _)) = text.lines().enumerate().find(|(_, l)| l.trim_start().starts_with('{')) {
        return Err(CliError::Malformed { line: i + 1, msg: "JSON record in a CSV file".into() });
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in rdr.deserialize::<CsvRow>() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            CliError::Malformed { line, msg: e.to_string() }
        })?;
        out.push(row.into_record()?);
    }
    Ok(out)
}

fn cell(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.6e}"))
}

/// Fixed-width table with one row per record.
pub fn summary_table(records: &[Record]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<22} {:<44} {:>13} {:>13} {:>13}  pass", "experiment", "check", "bound", "measured", "margin");
    for r in records {
        let pass = match r.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "-",
        };
        let _ = writeln!(
            s,
            "{:<22} {:<44} {:>13} {:>13} {:>13}  {}",
            r.experiment,
            r.check,
            cell(r.bound),
            cell(r.measured),
            cell(r.margin),
            pass
        );
    }
    s
}

pub fn any_failed(records: &[Record]) -> bool {
    records.iter().any(|r| r.pass == Some(false))
}

fn exit_for(records: &[Record]) -> i32 {
    if any_failed(records) {
        EXIT_FAIL
    } else {
        EXIT_PASS
    }
}

/// Executes a parsed command, writing human output to `out` and errors to `err`.
pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cli.command {
        Command::Run(args) => match run(&args.experiment, &args.params()) {
            Ok(records) => {
                let written = match &args.out {
                    Some(path) => append_records(path, &records, args.format),
                    None => write_records(out, &records, args.format, true),
                };
                if let Err(e) = written {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_USAGE;
                }
                if args.out.is_some() {
                    let _ = write!(out, "{}", summary_table(&records));
                }
                exit_for(&records)
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_USAGE
            }
        },
        Command::Report { path } => {
            let parsed = std::fs::read_to_string(&path).map_err(CliError::from).and_then(|t| parse_records(&t));
            match parsed {
                Ok(records) => {
                    let _ = write!(out, "{}", summary_table(&records));
                    exit_for(&records)
                }
                Err(e) => {
                    let _ = writeln!(err, "error: {}: {e}", path.display());
                    EXIT_USAGE
                }
            }
        }
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli, &mut io::stdout().lock(), &mut io::stderr().lock()),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Record> {
        run("verify-numberop", &Params { n: Some(1), seed: 3, ..Params::default() }).unwrap()
    }

    #[test]
    fn jsonl_round_trip() {
        let recs = sample();
        let mut buf = Vec::new();
        write_records(&mut buf, &recs, Format::Jsonl, true).unwrap();
        let back = parse_records(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.len(), recs.len());
        assert_eq!(back[0].check, recs[0].check);
        assert_eq!(back[0].pass, Some(true));
    }

    #[test]
    fn csv_round_trip() {
        let recs = sample();
        let mut buf = Vec::new();
        write_records(&mut buf, &recs, Format::Csv, true).unwrap();
        let back = parse_records(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.len(), recs.len());
        assert_eq!(back[1].params, recs[1].params);
    }

    #[test]
    fn mixed_formats_report_line() {
        let recs = sample();
        let mut j = Vec::new();
        write_records(&mut j, &recs[..1], Format::Jsonl, true).unwrap();
        let mut c = Vec::new();
        write_records(&mut c, &recs[..1], Format::Csv, true).unwrap();
        let mixed = format!("{}{}", String::from_utf8(j.clone()).unwrap(), String::from_utf8(c.clone()).unwrap());
        match parse_records(&mixed) {
            Err(CliError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let mixed = format!("{}{}", String::from_utf8(c).unwrap(), String::from_utf8(j).unwrap());
        match parse_records(&mixed) {
            Err(CliError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(round12(0.1234567890123456), 0.123456789012);
        assert_eq!(round12(1.0 / 3.0).to_string(), "0.333333333333");
        assert_eq!(round12(0.0), 0.0);
    }

    #[test]
    fn empty_report() {
        assert!(parse_records("").unwrap().is_empty());
        assert!(parse_records("\n\n").unwrap().is_empty());
    }
}
