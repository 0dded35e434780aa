//! Command-line front end: `simulate`, `analytic`, `compare`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{
    parse_modulation, parse_snr_grid, Compensation, Detection, IqiSetting, SimConfig,
};
use super::output::{
    write_analytic_csv, write_ber_csv, write_compare_csv, write_gamma_trace_csv, write_json,
    CompareRow,
};
use super::sim::{run_sweep, run_sweep_traced};
use crate::analysis::{analytic_curve, lin_to_db, AnalyticPoint};
use crate::channel::load_profile;
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "dstbc", version, about = "Differential Alamouti OFDM link simulator under receiver I/Q imbalance")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo BER sweep.
    Simulate(CommonArgs),
    /// Closed-form BER and error floor over the SNR grid.
    Analytic(CommonArgs),
    /// Simulation next to the closed-form prediction.
    Compare(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML experiment file; flags below override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `start:stop:step` in dB (stop inclusive) or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    pub snr: Option<String>,
    /// bpsk, qpsk, 8psk or 16psk.
    #[arg(long = "mod")]
    pub modulation: Option<String>,
    /// itu-pb, itu-va or flat.
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long)]
    pub doppler_hz: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub iqi_kappa_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub iqi_phi_deg: Option<f64>,
    /// Ideal front end regardless of the config file.
    #[arg(long, conflicts_with_all = ["iqi_kappa_db", "iqi_phi_deg"])]
    pub no_iqi: bool,
    /// Image rejection ratio in dB for the closed-form curves, replacing the
    /// value implied by the imbalance settings (analytic only).
    #[arg(long, allow_hyphen_values = true)]
    pub irr_db: Option<f64>,
    /// differential or coherent.
    #[arg(long)]
    pub detection: Option<String>,
    /// off, genie or lms.
    #[arg(long)]
    pub compensation: Option<String>,
    #[arg(long)]
    pub min_bits: Option<u64>,
    #[arg(long)]
    pub max_block_pairs: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the rows as JSON to this file.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the compensation coefficient trajectory (simulate only).
    #[arg(long)]
    pub gamma_trace: Option<PathBuf>,
}

impl CommonArgs {
    /// Merges the config file (or defaults) with command-line overrides.
    pub fn resolve(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(p) => SimConfig::from_file(p)?,
            None => SimConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(g) = &self.snr {
            cfg.snr_grid_db = parse_snr_grid(g)?;
        }
        if let Some(m) = &self.modulation {
            cfg.order = parse_modulation(m)?;
        }
        if self.channel.is_some() || self.doppler_hz.is_some() {
            let name = self.channel.clone().unwrap_or_else(|| cfg.channel.name.clone());
            let doppler = self.doppler_hz.unwrap_or(cfg.channel.doppler_hz);
            cfg.channel = if self.channel.is_none() {
                let mut p = cfg.channel.clone();
                p.doppler_hz = doppler;
                p
            } else {
                load_profile(&name, doppler).map_err(|e| Error::Config(e.to_string()))?
            };
        }
        if self.no_iqi {
            cfg.iqi = None;
        } else if self.iqi_kappa_db.is_some() || self.iqi_phi_deg.is_some() {
            let base = cfg.iqi.unwrap_or(IqiSetting {
                kappa_db: 0.0,
                phi_deg: 0.0,
            });
            cfg.iqi = Some(IqiSetting {
                kappa_db: self.iqi_kappa_db.unwrap_or(base.kappa_db),
                phi_deg: self.iqi_phi_deg.unwrap_or(base.phi_deg),
            });
        }
        if let Some(d) = &self.detection {
            cfg.detection = d.parse::<Detection>()?;
        }
        if let Some(c) = &self.compensation {
            cfg.compensation = c.parse::<Compensation>()?;
        }
        if let Some(b) = self.min_bits {
            cfg.min_bits = b;
        }
        if let Some(b) = self.max_block_pairs {
            cfg.max_block_pairs = b;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

/// Image rejection ratio (dB) the closed form should use: imbalance that a
/// compensator removes counts as absent.
fn effective_irr_db(cfg: &SimConfig) -> f64 {
    if cfg.compensation == Compensation::Off {
        cfg.iqi_params().irr_db
    } else {
        f64::INFINITY
    }
}

/// Coherent detection sees half the noise and half the interference of the
/// differential detector, i.e. both ratios gain 3 dB.
fn analytic_shift_db(cfg: &SimConfig) -> f64 {
    match cfg.detection {
        Detection::Differential => 0.0,
        Detection::Coherent => lin_to_db(2.0),
    }
}

fn analytic_rows(cfg: &SimConfig, irr_override: Option<f64>) -> Result<Vec<AnalyticPoint>> {
    let shift = analytic_shift_db(cfg);
    let grid: Vec<f64> = cfg.snr_grid_db.iter().map(|s| s + shift).collect();
    let irr = irr_override.unwrap_or_else(|| effective_irr_db(cfg));
    let mut pts = analytic_curve(cfg.order, irr + shift, &grid)?;
    for (p, s) in pts.iter_mut().zip(&cfg.snr_grid_db) {
        p.snr_db = *s;
    }
    Ok(pts)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            if args.irr_db.is_some() {
                return Err(Error::Config("--irr-db only applies to `analytic`".into()));
            }
            let cfg = args.resolve()?;
            let runs = run_sweep_traced(&cfg)?;
            let records: Vec<_> = runs.iter().map(|r| r.record.clone()).collect();
            write_ber_csv(&records, args.sink()?)?;
            if let Some(p) = &args.json {
                write_json(&records, BufWriter::new(File::create(p)?))?;
            }
            if let Some(p) = &args.gamma_trace {
                let traces: Vec<_> = runs
                    .iter()
                    .map(|r| (r.record.snr_db, r.gamma_trace.as_slice()))
                    .collect();
                write_gamma_trace_csv(&traces, BufWriter::new(File::create(p)?))?;
            }
        }
        Command::Analytic(args) => {
            let cfg = args.resolve()?;
            if let Some(irr) = args.irr_db {
                if irr.is_nan() || irr < 0.0 {
                    return Err(Error::Config(format!("bad --irr-db {irr}")));
                }
            }
            let pts = analytic_rows(&cfg, args.irr_db)?;
            write_analytic_csv(&pts, args.sink()?)?;
            if let Some(p) = &args.json {
                write_json(&pts, BufWriter::new(File::create(p)?))?;
            }
        }
        Command::Compare(args) => {
            if args.irr_db.is_some() {
                return Err(Error::Config("--irr-db only applies to `analytic`".into()));
            }
            let cfg = args.resolve()?;
            let pts = analytic_rows(&cfg, None)?;
            let records = run_sweep(&cfg)?;
            let rows: Vec<CompareRow> = records
                .iter()
                .zip(&pts)
                .map(|(r, p)| CompareRow {
                    snr_db: r.snr_db,
                    bit_errors: r.bit_errors,
                    bits: r.bits,
                    ber_sim: r.ber,
                    ber_closed_form: p.ber_closed_form,
                    ber_floor: p.ber_floor,
                    rel_gap: (r.ber - p.ber_closed_form) / p.ber_closed_form,
                    irr_db: p.irr_db,
                })
                .collect();
            write_compare_csv(&rows, args.sink()?)?;
            if let Some(p) = &args.json {
                write_json(&rows, BufWriter::new(File::create(p)?))?;
            }
        }
    }
    Ok(())
}

/// Process exit code for an error: 2 for bad configuration, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::UnknownProfile(_)
        | Error::InvalidProfile(_)
        | Error::DelayExceedsCp { .. }
        | Error::UnsupportedOrder(_)
        | Error::NotPowerOfTwo(_) => 2,
        _ => 1,
    }
}
