//! Command-line front end and the CSV result format.
//!
//! ```text
//! mimopnc sweep --snr 0:1:20 --symbols 1e6 --seed 1 --detectors vblast-nc,vblast-pnc --out r.csv
//! mimopnc gap --in r.csv --a vblast-pnc --b vblast-nc --at-ber 1e-3
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::detect::DetectorId;
use crate::error::{Error, Result};
use crate::harness::{
    estimate_gap_db, run_sweep, sort_records, with_workers, BerRecord, SimConfig,
};

pub const CSV_HEADER: &str = "detector,snr_db,bits_total,bit_errors,ber,degenerate_count";

/// Caps the worker count of `sweep`; results do not depend on it.
pub const THREADS_ENV: &str = "MIMOPNC_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

const DEFAULT_SYMBOLS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum CliCommand {
    Sweep {
        config: SimConfig,
        out: PathBuf,
    },
    Gap {
        input: PathBuf,
        det_a: DetectorId,
        det_b: DetectorId,
        target_ber: f64,
    },
}

#[derive(Debug, Parser)]
#[command(
    name = "mimopnc",
    about = "2x2 MIMO two-way relay detection: BER sweeps and dB gaps"
)]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Simulate XOR bit-error rates over an SNR grid and write CSV.
    Sweep {
        /// Inclusive SNR grid in dB, START:STEP:STOP
        #[arg(long)]
        snr: String,
        /// Symbols per SNR point (accepts 1e6)
        #[arg(long)]
        symbols: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Comma-separated detector names; all six by default
        #[arg(long)]
        detectors: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// SNR gap between two detectors' curves at a target BER.
    Gap {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long = "at-ber")]
        at_ber: f64,
    },
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

/// Expand `START:STEP:STOP` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!(
            "--snr expects START:STEP:STOP, got `{spec}`"
        )));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| usage(format!("--snr: `{s}` is not a number")))
    };
    let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if step <= 0.0 {
        return Err(usage("--snr step must be positive"));
    }
    if stop < start {
        return Err(usage("--snr stop must not be below start"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if n > 100_000 {
        return Err(usage("--snr grid has too many points"));
    }
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

fn parse_symbols(s: &str) -> Result<u64> {
    let bad = || usage(format!("--symbols: `{s}` is not a positive integer"));
    if let Ok(n) = s.parse::<u64>() {
        return if n > 0 { Ok(n) } else { Err(bad()) };
    }
    let v: f64 = s.parse().map_err(|_| bad())?;
    if v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(bad())
    }
}

fn parse_detector(s: &str) -> Result<DetectorId> {
    s.parse().map_err(|e: Error| usage(e.to_string()))
}

fn parse_detectors(list: &str) -> Result<Vec<DetectorId>> {
    let ds = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_detector)
        .collect::<Result<Vec<_>>>()?;
    if ds.is_empty() {
        return Err(usage("--detectors is empty"));
    }
    Ok(ds)
}

fn program_args<S: AsRef<str>>(argv: &[S]) -> impl Iterator<Item = &str> {
    std::iter::once("mimopnc").chain(argv.iter().map(|s| s.as_ref()))
}

/// Parse `argv` (without the program name) into a validated command.
pub fn parse_args<S: AsRef<str>>(argv: &[S]) -> Result<CliCommand> {
    let args = Args::try_parse_from(program_args(argv)).map_err(|e| usage(e.to_string()))?;

    match args.cmd {
        Cmd::Sweep {
            snr,
            symbols,
            seed,
            detectors,
            out,
        } => {
            if out.as_os_str().is_empty() {
                return Err(usage("--out path is empty"));
            }
            let symbols = symbols.as_deref().map(parse_symbols).transpose()?;
            let mut config =
                SimConfig::new(parse_grid(&snr)?, symbols.unwrap_or(DEFAULT_SYMBOLS), seed);
            if let Some(list) = detectors {
                config.detectors = parse_detectors(&list)?;
            }
            config.validate().map_err(|e| usage(e.to_string()))?;
            Ok(CliCommand::Sweep { config, out })
        }
        Cmd::Gap {
            input,
            a,
            b,
            at_ber,
        } => {
            if input.as_os_str().is_empty() {
                return Err(usage("--in path is empty"));
            }
            if !(at_ber > 0.0 && at_ber < 1.0) {
                return Err(usage("--at-ber must lie in (0, 1)"));
            }
            Ok(CliCommand::Gap {
                input,
                det_a: parse_detector(&a)?,
                det_b: parse_detector(&b)?,
                target_ber: at_ber,
            })
        }
    }
}

fn format_ber(ber: f64) -> String {
    format!("{ber:.5e}")
}

/// Render records as CSV text, sorted by (detector, snr_db).
pub fn to_csv(records: &[BerRecord]) -> String {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in &sorted {
        s.push_str(&format!(
            "{},{:.2},{},{},{},{}\n",
            r.detector,
            r.snr_db,
            r.bits_total,
            r.bit_errors,
            format_ber(r.ber),
            r.degenerate_count
        ));
    }
    s
}

pub fn write_csv(records: &[BerRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Io("refusing to write an empty record list".into()));
    }
    let mut f = fs::File::create(path)?;
    f.write_all(to_csv(records).as_bytes())?;
    Ok(())
}

/// Parse CSV text produced by [`to_csv`].
///
/// The `ber` column must agree with `bit_errors / bits_total` as rendered
/// (six significant digits) to within 1e-9; the returned records carry the
/// exact ratio.
pub fn parse_csv(text: &str) -> Result<Vec<BerRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header `{CSV_HEADER}`"),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, found {}", fields.len())));
        }
        let detector: DetectorId = fields[0]
            .parse()
            .map_err(|_| err(format!("unknown detector `{}`", fields[0])))?;
        let num_f = |s: &str, what: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("bad {what} `{s}`")))
        };
        let num_u = |s: &str, what: &str| {
            s.parse::<u64>()
                .map_err(|_| err(format!("bad {what} `{s}`")))
        };
        let snr_db = num_f(fields[1], "snr_db")?;
        let bits_total = num_u(fields[2], "bits_total")?;
        let bit_errors = num_u(fields[3], "bit_errors")?;
        let ber = num_f(fields[4], "ber")?;
        let degenerate_count = num_u(fields[5], "degenerate_count")?;
        if bits_total == 0 || bit_errors > bits_total {
            return Err(err("bit counts out of range".into()));
        }
        let rec = BerRecord::new(detector, snr_db, bits_total, bit_errors, degenerate_count);
        let rendered: f64 = format_ber(rec.ber).parse().expect("formatted float");
        if (ber - rendered).abs() > 1e-9 {
            return Err(err(format!(
                "ber {ber} disagrees with {bit_errors}/{bits_total}"
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<BerRecord>> {
    parse_csv(&fs::read_to_string(path)?)
}

/// Worker cap from [`THREADS_ENV`]; `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

/// Execute a parsed command, printing human-readable results to stdout.
pub fn execute(cmd: &CliCommand) -> Result<()> {
    match cmd {
        CliCommand::Sweep { config, out } => {
            let records = match threads_from_env()? {
                Some(n) => with_workers(n, || run_sweep(config))??,
                None => run_sweep(config)?,
            };
            write_csv(&records, out)?;
            println!("wrote {} records to {}", records.len(), out.display());
        }
        CliCommand::Gap {
            input,
            det_a,
            det_b,
            target_ber,
        } => {
            let records = read_csv(input)?;
            let gap = estimate_gap_db(&records, *det_a, *det_b, *target_ber)?;
            println!("{gap:.4}");
        }
    }
    Ok(())
}

/// Full CLI entry point; returns the process exit code.
pub fn run<S: AsRef<str>>(argv: &[S]) -> i32 {
    if let Err(e) = Args::try_parse_from(program_args(argv)) {
        if matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        ) {
            let _ = e.print();
            return EXIT_OK;
        }
    }
    let cmd = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    match execute(&cmd) {
        Ok(()) => EXIT_OK,
        Err(e @ Error::Usage(_)) => {
            eprintln!("{e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
