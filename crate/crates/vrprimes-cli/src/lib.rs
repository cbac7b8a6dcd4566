//! Argument parsing and dispatch for the `vrprimes` binary.
//!
//! Exit codes: 0 on success, 1 for computational errors (bad discriminant,
//! non-prime p, io failures), 2 for usage errors. All machine-readable output
//! is JSON on stdout; `scan --out` additionally writes per-discriminant
//! records as JSON lines or CSV.

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::PathBuf;
use vrprimes::arith::PrimeCtx;
use vrprimes::bernoulli::{is_regular, BernoulliTable};
use vrprimes::quadfield::FundamentalDiscriminant;
use vrprimes::stabledim::{
    general_field_series, hs_degeneration_check, koszul_series_identity, unstable_h2_dim,
    unstable_hk_asymptotic, HsReport,
};
use vrprimes::survey::{
    density_prediction, emit_table, render_table_text, scan_collect, ScanConfig, ScanOutcome,
    SurveyRecord, TABLE_DISCRIMINANTS, TABLE_PMAX,
};
use vrprimes::veryregular::{list_very_regular_discriminants, Evaluator, VRReport};

#[derive(Parser)]
#[command(name = "vrprimes", version, about = "very regular primes for imaginary quadratic fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Kummer regularity of p, with zeta witnesses if it fails
    Regular {
        p: u64,
        #[arg(long)]
        json: bool,
    },
    /// Full report for the pair (d, p); d may be given as -8 or 8
    VeryRegular {
        #[arg(allow_hyphen_values = true)]
        d: i64,
        p: u64,
    },
    /// Discriminants |d| < limit at which p is very regular
    List {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        limit: u64,
        #[arg(long)]
        json: bool,
    },
    /// Tally split and very regular discriminants up to --dmax
    Scan {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        dmax: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// resume file; defaults to $VRPRIMES_CHECKPOINT_DIR/scan-p<p>.json
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// write one record per split discriminant to this file
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RecordFormat::Jsonl)]
        format: RecordFormat,
        /// scan |d| <= dmax instead of |d| < dmax
        #[arg(long)]
        inclusive: bool,
    },
    /// The survey table for all odd p <= --pmax over the ten smallest fields
    Table {
        #[arg(long, default_value_t = TABLE_PMAX)]
        pmax: u64,
        #[arg(long)]
        json: bool,
    },
    /// Heuristic density prod (1 - p^-n)
    Density {
        #[arg(long)]
        p: u64,
    },
    /// Coefficients of the stable dimension series for signature (r1, r2)
    Series {
        #[arg(long)]
        r1: u32,
        #[arg(long)]
        r2: u32,
        #[arg(long)]
        maxdeg: usize,
    },
    /// Unstable dimension formulas: exact H^k data for SL_N
    Dims {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        degree: u32,
        #[arg(long)]
        json: bool,
    },
    /// Verify spectral degeneration against the predicted E_infinity series
    HsCheck {
        #[arg(long)]
        maxdeg: usize,
    },
    /// Verify the signed Koszul factorization of the page series
    KoszulCheck {
        #[arg(long)]
        maxdeg: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecordFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RegularOut {
    pub p: u64,
    pub regular: bool,
    pub witnesses: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReportOut {
    #[serde(flatten)]
    pub report: VRReport,
    pub h: u64,
    pub cell: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ListOut {
    pub p: u64,
    pub limit: u64,
    pub discriminants: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScanSummary {
    #[serde(flatten)]
    pub outcome: ScanOutcome,
    pub percentage: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SeriesOut {
    pub r1: u32,
    pub r2: u32,
    pub maxdeg: usize,
    pub coefficients: Vec<u64>,
    /// dimension interpretation relies on the standard conjectures
    pub conditional: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DimsOut {
    pub n: u32,
    pub k: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stable_range: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leading: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct KoszulOut {
    pub maxdeg: usize,
    pub holds: bool,
}

/// Parse and dispatch; never panics on user input.
pub fn run(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                0
            } else {
                let _ = write!(stderr, "{e}");
                2
            };
        }
    };
    match dispatch(cli.cmd, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            1
        }
    }
}

fn dispatch(cmd: Cmd, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Cmd::Regular { p, json } => {
            let ctx = PrimeCtx::with_inverse_table(p)?;
            let table = BernoulliTable::new(&ctx);
            let (regular, witnesses) = is_regular(&ctx, &table);
            if json {
                emit(out, &RegularOut { p, regular, witnesses })?;
            } else if regular {
                writeln!(out, "regular")?;
            } else {
                writeln!(out, "irregular {witnesses:?}")?;
            }
        }
        Cmd::VeryRegular { d, p } => {
            let d = FundamentalDiscriminant::new(-(d.abs()))?;
            let engine = Evaluator::new(p)?;
            let (report, h) = engine.report_with_class_number(d)?;
            let cell = report.cell();
            emit(out, &ReportOut { report, h, cell })?;
        }
        Cmd::List { p, limit, json } => {
            let discriminants = list_very_regular_discriminants(p, limit)?;
            if json {
                emit(out, &ListOut { p, limit, discriminants })?;
            } else {
                writeln!(out, "{discriminants:?}")?;
            }
        }
        Cmd::Scan { p, dmax, jobs, checkpoint, out: record_path, format, inclusive } => {
            let mut config = ScanConfig::new(p, dmax);
            config.jobs = jobs;
            config.inclusive = inclusive;
            config.checkpoint_path = checkpoint.or_else(|| {
                std::env::var_os("VRPRIMES_CHECKPOINT_DIR")
                    .map(|dir| PathBuf::from(dir).join(format!("scan-p{p}.json")))
            });
            let (outcome, records) = scan_collect(&config)?;
            if let Some(path) = record_path {
                write_records(&path, format, &records)
                    .with_context(|| path.display().to_string())?;
            }
            let percentage = outcome.percentage();
            emit(out, &ScanSummary { outcome, percentage })?;
        }
        Cmd::Table { pmax, json } => {
            let table = emit_table(pmax, &TABLE_DISCRIMINANTS)?;
            if json {
                emit(out, &table)?;
            } else {
                write!(out, "{}", render_table_text(&table))?;
            }
        }
        Cmd::Density { p } => {
            if p < 2 {
                return Err(anyhow!("p must be at least 2"));
            }
            writeln!(out, "{:.6}", density_prediction(p))?;
        }
        Cmd::Series { r1, r2, maxdeg } => {
            let series = general_field_series(r1, r2, maxdeg);
            let coefficients = series
                .coeffs()
                .iter()
                .map(|c| u64::try_from(c).map_err(|_| anyhow!("coefficient exceeds u64")))
                .collect::<Result<Vec<u64>>>()?;
            emit(out, &SeriesOut { r1, r2, maxdeg, coefficients, conditional: true })?;
        }
        Cmd::Dims { n, k, degree, json } => {
            if n < 2 {
                return Err(anyhow!("N must be at least 2"));
            }
            let report = match k {
                2 => {
                    let h2 = unstable_h2_dim(n);
                    let dim = u64::try_from(&h2.dim).map_err(|_| anyhow!("dimension exceeds u64"))?;
                    DimsOut {
                        n,
                        k,
                        dim: Some(dim),
                        stable_range: Some(h2.stable_range),
                        degree: None,
                        exact: None,
                        leading: None,
                        correction: None,
                        residual: None,
                    }
                }
                3.. => {
                    let hk = unstable_hk_asymptotic(n, k, degree);
                    DimsOut {
                        n,
                        k,
                        dim: None,
                        stable_range: None,
                        degree: Some(degree),
                        exact: Some(hk.exact.to_string()),
                        leading: Some(hk.leading.to_string()),
                        correction: Some(hk.correction.to_string()),
                        residual: Some(hk.residual().to_string()),
                    }
                }
                _ => return Err(anyhow!("k must be at least 2")),
            };
            if json {
                emit(out, &report)?;
            } else if let Some(dim) = report.dim {
                writeln!(out, "{dim}")?;
            } else {
                writeln!(out, "{}", report.exact.as_deref().unwrap_or(""))?;
            }
        }
        Cmd::HsCheck { maxdeg } => {
            let report: HsReport = hs_degeneration_check(maxdeg)?;
            emit(out, &report)?;
        }
        Cmd::KoszulCheck { maxdeg } => {
            let holds = koszul_series_identity(maxdeg);
            emit(out, &KoszulOut { maxdeg, holds })?;
        }
    }
    Ok(())
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let line = serde_json::to_string(value)?;
    writeln!(out, "{line}")?;
    Ok(())
}

fn write_records(path: &PathBuf, format: RecordFormat, records: &[SurveyRecord]) -> Result<()> {
    match format {
        RecordFormat::Jsonl => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            for record in records {
                serde_json::to_writer(&mut file, record)?;
                file.write_all(b"\n")?;
            }
            file.flush()?;
        }
        RecordFormat::Csv => {
            let mut writer = csv::Writer::from_path(path)?;
            for record in records {
                writer.serialize(record)?;
            }
            writer.flush()?;
        }
    }
    Ok(())
}
