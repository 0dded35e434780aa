//! Python bindings for `dstbc-core`.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dstbc_core::analysis;
use dstbc_core::compensator;
use dstbc_core::harness::config::{parse_snr_grid, PAPER_FIG1_CFG, PAPER_FIG2_CFG};
use dstbc_core::harness::{self as h, BerRecord};
use dstbc_core::iqi;
use dstbc_core::numerics;
use dstbc_core::stbc;

fn err(e: dstbc_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Simulation settings, loaded from TOML text or one of the bundled presets.
#[pyclass(name = "SimConfig", skip_from_py_object)]
#[derive(Clone)]
struct PySimConfig {
    inner: h::SimConfig,
}

#[pymethods]
impl PySimConfig {
    #[new]
    #[pyo3(signature = (toml = None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        let inner = match toml {
            Some(t) => h::SimConfig::from_toml_str(t).map_err(err)?,
            None => h::SimConfig::default(),
        };
        Ok(Self { inner })
    }

    /// `"fig1"` or `"fig2"`.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        let text = match name {
            "fig1" => PAPER_FIG1_CFG,
            "fig2" => PAPER_FIG2_CFG,
            _ => return Err(PyValueError::new_err(format!("unknown preset `{name}`"))),
        };
        Self::new(Some(text))
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[setter]
    fn set_seed(&mut self, v: u64) {
        self.inner.seed = v;
    }

    #[getter]
    fn min_bits(&self) -> u64 {
        self.inner.min_bits
    }

    #[setter]
    fn set_min_bits(&mut self, v: u64) {
        self.inner.min_bits = v;
    }

    #[getter]
    fn snr_grid_db(&self) -> Vec<f64> {
        self.inner.snr_grid_db.clone()
    }

    /// Accepts a list of dB values or a `start:stop:step` string.
    #[setter]
    fn set_snr_grid_db(&mut self, v: &Bound<'_, PyAny>) -> PyResult<()> {
        self.inner.snr_grid_db = match v.extract::<String>() {
            Ok(s) => parse_snr_grid(&s).map_err(err)?,
            Err(_) => v.extract::<Vec<f64>>()?,
        };
        Ok(())
    }

    #[getter]
    fn detection(&self) -> String {
        self.inner.detection.to_string()
    }

    #[setter]
    fn set_detection(&mut self, v: &str) -> PyResult<()> {
        self.inner.detection = v.parse().map_err(err)?;
        Ok(())
    }

    #[getter]
    fn compensation(&self) -> String {
        self.inner.compensation.to_string()
    }

    #[setter]
    fn set_compensation(&mut self, v: &str) -> PyResult<()> {
        self.inner.compensation = v.parse().map_err(err)?;
        Ok(())
    }

    /// `(kappa_db, phi_deg)` or `None`.
    #[getter]
    fn iqi(&self) -> Option<(f64, f64)> {
        self.inner.iqi.map(|s| (s.kappa_db, s.phi_deg))
    }

    #[setter]
    fn set_iqi(&mut self, v: Option<(f64, f64)>) {
        self.inner.iqi = v.map(|(kappa_db, phi_deg)| h::IqiSetting { kappa_db, phi_deg });
    }

    fn set_channel(&mut self, profile: &str, doppler_hz: f64) -> PyResult<()> {
        self.inner.channel = dstbc_core::channel::load_profile(profile, doppler_hz).map_err(err)?;
        Ok(())
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(err)
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        let iqi = match c.iqi {
            Some(s) => format!("({}, {})", s.kappa_db, s.phi_deg),
            None => "None".into(),
        };
        format!(
            "SimConfig(channel='{}', doppler_hz={}, detection='{}', compensation='{}', iqi={}, seed={})",
            c.channel.name, c.channel.doppler_hz, c.detection, c.compensation, iqi, c.seed
        )
    }
}

fn record_dict<'py>(py: Python<'py>, r: &BerRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("snr_db", r.snr_db)?;
    d.set_item("detection", r.detection.to_string())?;
    d.set_item("compensation", r.compensation.to_string())?;
    d.set_item("channel", &r.channel)?;
    d.set_item("doppler_hz", r.doppler_hz)?;
    d.set_item("irr_db", r.irr_db)?;
    d.set_item("bit_errors", r.bit_errors)?;
    d.set_item("bits", r.bits)?;
    d.set_item("ber", r.ber)?;
    d.set_item("seed", r.seed)?;
    d.set_item("gamma", Complex64::new(r.gamma_re, r.gamma_im))?;
    d.set_item("elapsed_s", r.elapsed_s)?;
    Ok(d)
}

/// One SNR point; `snr_db = float("inf")` disables noise.
#[pyfunction]
#[pyo3(signature = (config, snr_db, seed = None))]
fn run_point<'py>(
    py: Python<'py>,
    config: &PySimConfig,
    snr_db: f64,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config.inner.clone();
    let seed = seed.unwrap_or(cfg.seed);
    let r = py.detach(|| h::run_point(&cfg, snr_db, seed)).map_err(err)?;
    record_dict(py, &r)
}

/// Every point of the configured grid.
#[pyfunction]
fn run_sweep<'py>(py: Python<'py>, config: &PySimConfig) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = config.inner.clone();
    let recs = py.detach(|| h::run_sweep(&cfg)).map_err(err)?;
    recs.iter().map(|r| record_dict(py, r)).collect()
}

/// Receiver imbalance parameters as a dict (`alpha`, `beta`, `rho`, `irr_db`).
#[pyfunction]
fn derive_iqi_params<'py>(py: Python<'py>, kappa_db: f64, phi_deg: f64) -> PyResult<Bound<'py, PyDict>> {
    let p = iqi::derive_iqi_params(kappa_db, phi_deg);
    let d = PyDict::new(py);
    d.set_item("g_r", p.g_r)?;
    d.set_item("phi_r", p.phi_r)?;
    d.set_item("alpha", p.alpha)?;
    d.set_item("beta", p.beta)?;
    d.set_item("rho", p.rho)?;
    d.set_item("irr_db", p.irr_db)?;
    d.set_item("gamma_true", compensator::gamma_true(&p).map_err(err)?)?;
    Ok(d)
}

#[pyfunction]
fn apply_rx_iqi(samples: Vec<Complex64>, kappa_db: f64, phi_deg: f64) -> Vec<Complex64> {
    iqi::apply_rx_iqi(&samples, &iqi::derive_iqi_params(kappa_db, phi_deg))
}

#[pyfunction]
fn dft(x: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    numerics::dft(&x).map_err(err)
}

#[pyfunction]
fn idft(x: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    numerics::idft(&x).map_err(err)
}

#[pyfunction]
fn psk_modulate(bits: Vec<u8>, order: usize) -> PyResult<Vec<Complex64>> {
    numerics::psk_modulate(&bits, order).map_err(err)
}

#[pyfunction]
fn psk_demodulate(symbols: Vec<Complex64>, order: usize) -> PyResult<Vec<u32>> {
    let bits = numerics::psk_demodulate(&symbols, order).map_err(err)?;
    Ok(bits.into_iter().map(u32::from).collect())
}

/// Differential ML decision from two received blocks, each given by its
/// first row `(z1, z2)`. Returns the two constellation indices.
#[pyfunction]
fn ml_differential_detect(
    z_k: (Complex64, Complex64),
    z_next: (Complex64, Complex64),
    order: usize,
) -> PyResult<(usize, usize)> {
    let c = numerics::PskConstellation::new(order).map_err(err)?;
    let a = stbc::AlamoutiMatrix::new(z_k.0, z_k.1);
    let b = stbc::AlamoutiMatrix::new(z_next.0, z_next.1);
    Ok(stbc::ml_differential_detect(&a, &b, &c).indices)
}

#[pyfunction]
fn ber_floor(order: usize, rho: f64) -> PyResult<f64> {
    analysis::ber_floor(order, rho).map_err(err)
}

#[pyfunction]
fn ber_closed_form(order: usize, snr_eq: f64) -> f64 {
    analysis::ber_closed_form(order, snr_eq)
}

#[pyfunction]
fn snr_eq(snr_lin: f64, irr_lin: f64) -> f64 {
    analysis::snr_eq(snr_lin, irr_lin)
}

#[pyfunction]
fn f44_pdf(x: f64) -> PyResult<f64> {
    analysis::f44_pdf(x).map_err(err)
}

/// `(snr_db, sinr_eq, ber_closed_form, ber_floor)` tuples.
#[pyfunction]
fn analytic_curve(order: usize, irr_db: f64, snr_grid_db: Vec<f64>) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    Ok(analysis::analytic_curve(order, irr_db, &snr_grid_db)
        .map_err(err)?
        .into_iter()
        .map(|p| (p.snr_db, p.sinr_eq, p.ber_closed_form, p.ber_floor))
        .collect())
}

#[pymodule]
fn dstbc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySimConfig>()?;
    m.add_function(wrap_pyfunction!(run_point, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(derive_iqi_params, m)?)?;
    m.add_function(wrap_pyfunction!(apply_rx_iqi, m)?)?;
    m.add_function(wrap_pyfunction!(dft, m)?)?;
    m.add_function(wrap_pyfunction!(idft, m)?)?;
    m.add_function(wrap_pyfunction!(psk_modulate, m)?)?;
    m.add_function(wrap_pyfunction!(psk_demodulate, m)?)?;
    m.add_function(wrap_pyfunction!(ml_differential_detect, m)?)?;
    m.add_function(wrap_pyfunction!(ber_floor, m)?)?;
    m.add_function(wrap_pyfunction!(ber_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(snr_eq, m)?)?;
    m.add_function(wrap_pyfunction!(f44_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_curve, m)?)?;
    Ok(())
}
