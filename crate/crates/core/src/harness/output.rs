//! CSV and JSON writers for sweep results.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use super::sim::BerRecord;
use crate::analysis::AnalyticPoint;
use crate::error::{Error, Result};

pub const BER_COLUMNS: [&str; 12] = [
    "snr_db",
    "detection",
    "compensation",
    "channel",
    "doppler_hz",
    "irr_db",
    "bit_errors",
    "bits",
    "ber",
    "seed",
    "gamma_re",
    "gamma_im",
];

pub const ANALYTIC_COLUMNS: [&str; 6] = [
    "snr_db",
    "irr_db",
    "m",
    "sinr_eq_db",
    "ber_closed_form",
    "ber_floor",
];

pub const COMPARE_COLUMNS: [&str; 8] = [
    "snr_db",
    "bit_errors",
    "bits",
    "ber_sim",
    "ber_closed_form",
    "ber_floor",
    "rel_gap",
    "irr_db",
];

/// Formats with 9 significant digits, trimming trailing zeros.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..=8).contains(&e) {
        let prec = (8 - e).max(0) as usize;
        let s = format!("{x:.prec$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.8e}")
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// One row of `compare` output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub ber_sim: f64,
    pub ber_closed_form: f64,
    pub ber_floor: f64,
    /// `(ber_sim - ber_closed_form) / ber_closed_form`.
    pub rel_gap: f64,
    pub irr_db: f64,
}

pub fn write_ber_csv<W: Write>(records: &[BerRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BER_COLUMNS).map_err(csv_err)?;
    for r in records {
        w.write_record([
            fmt_sig(r.snr_db),
            r.detection.to_string(),
            r.compensation.to_string(),
            r.channel.clone(),
            fmt_sig(r.doppler_hz),
            fmt_sig(r.irr_db),
            r.bit_errors.to_string(),
            r.bits.to_string(),
            fmt_sig(r.ber),
            r.seed.to_string(),
            fmt_sig(r.gamma_re),
            fmt_sig(r.gamma_im),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_analytic_csv<W: Write>(points: &[AnalyticPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ANALYTIC_COLUMNS).map_err(csv_err)?;
    for p in points {
        w.write_record([
            fmt_sig(p.snr_db),
            fmt_sig(p.irr_db),
            p.order.to_string(),
            fmt_sig(10.0 * p.sinr_eq.log10()),
            fmt_sig(p.ber_closed_form),
            fmt_sig(p.ber_floor),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_compare_csv<W: Write>(rows: &[CompareRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            fmt_sig(r.snr_db),
            r.bit_errors.to_string(),
            r.bits.to_string(),
            fmt_sig(r.ber_sim),
            fmt_sig(r.ber_closed_form),
            fmt_sig(r.ber_floor),
            fmt_sig(r.rel_gap),
            fmt_sig(r.irr_db),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `snr_db,iteration,gamma_re,gamma_im` rows for every traced point.
pub fn write_gamma_trace_csv<W: Write>(traces: &[(f64, &[(u64, Complex64)])], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["snr_db", "iteration", "gamma_re", "gamma_im"])
        .map_err(csv_err)?;
    for (snr, trace) in traces {
        for (it, g) in trace.iter() {
            w.write_record([fmt_sig(*snr), it.to_string(), fmt_sig(g.re), fmt_sig(g.im)])
                .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON array mirroring a CSV table. Non-finite floats become `null`.
pub fn write_json<T: Serialize, W: Write>(rows: &[T], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}
