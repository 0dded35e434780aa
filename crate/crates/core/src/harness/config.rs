//! Experiment configuration.
//!
//! Config files are TOML (flat `key = value` pairs grouped in sections):
//!
//! ```toml
//! seed = 42
//!
//! [system]
//! subcarriers = 64
//! cp_len = 20
//! modulation = "8psk"
//! bandwidth_hz = 5e6
//! carrier_hz = 2.5e9
//!
//! [channel]
//! profile = "itu-pb"        # itu-pb | itu-va | flat | custom
//! doppler_hz = 11.6         # or speed_kmh = 5
//! # delays_ns = [0, 100]    # custom profiles only
//! # powers_db = [0, -3]
//!
//! [iqi]
//! enabled = true
//! kappa_db = 2.0
//! phi_deg = 8.0
//!
//! [receiver]
//! detection = "differential"  # differential | coherent
//! compensation = "lms"        # off | genie | lms
//! step_size = 0.005
//!
//! [sweep]
//! snr_db = "0:40:5"           # start:stop:step, or a list
//! min_bits = 2000000
//! max_block_pairs = 1000000
//! blocks_per_frame = 10
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{doppler_from_speed, load_profile, ChannelProfile};
use crate::compensator::DEFAULT_STEP_SIZE;
use crate::error::{Error, Result};
use crate::iqi::{derive_iqi_params, IqiParams};
use crate::ofdm::OfdmConfig;

pub const PAPER_FIG1_CFG: &str = include_str!("../../configs/paper_fig1.cfg");
pub const PAPER_FIG2_CFG: &str = include_str!("../../configs/paper_fig2.cfg");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detection {
    Differential,
    Coherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Compensation {
    Off,
    #[serde(alias = "genie_gamma", alias = "genie-gamma")]
    Genie,
    Lms,
}

impl fmt::Display for Detection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detection::Differential => "differential",
            Detection::Coherent => "coherent",
        })
    }
}

impl fmt::Display for Compensation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Compensation::Off => "off",
            Compensation::Genie => "genie",
            Compensation::Lms => "lms",
        })
    }
}

impl FromStr for Detection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "differential" | "diff" => Ok(Detection::Differential),
            "coherent" | "coh" => Ok(Detection::Coherent),
            _ => Err(Error::Config(format!("unknown detection `{s}`"))),
        }
    }
}

impl FromStr for Compensation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" | "none" => Ok(Compensation::Off),
            "genie" | "genie_gamma" | "genie-gamma" => Ok(Compensation::Genie),
            "lms" => Ok(Compensation::Lms),
            _ => Err(Error::Config(format!("unknown compensation `{s}`"))),
        }
    }
}

/// Parses `bpsk`, `qpsk`, `8psk`, `16psk` (or a bare order).
pub fn parse_modulation(s: &str) -> Result<usize> {
    let m = match s.to_ascii_lowercase().as_str() {
        "bpsk" | "2psk" | "2" => 2,
        "qpsk" | "4psk" | "4" => 4,
        "8psk" | "8" => 8,
        "16psk" | "16" => 16,
        _ => return Err(Error::Config(format!("unknown modulation `{s}`"))),
    };
    Ok(m)
}

/// Parses `start:stop:step` (inclusive stop) or a comma-separated list.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("bad SNR grid `{s}`"));
    if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let (start, stop, step) = match parts.as_slice() {
            [a, b] => (*a, *b, 1.0),
            [a, b, c] => (*a, *b, *c),
            _ => return Err(bad()),
        };
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| start + i as f64 * step).collect())
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect()
    }
}

/// Receiver imbalance in the units used on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqiSetting {
    pub kappa_db: f64,
    pub phi_deg: f64,
}

impl IqiSetting {
    pub fn params(&self) -> IqiParams {
        derive_iqi_params(self.kappa_db, self.phi_deg)
    }
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub ofdm: OfdmConfig,
    pub order: usize,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub channel: ChannelProfile,
    /// `None` for an ideal front end.
    pub iqi: Option<IqiSetting>,
    pub detection: Detection,
    pub compensation: Compensation,
    pub step_size: f64,
    pub snr_grid_db: Vec<f64>,
    pub min_bits: u64,
    pub max_block_pairs: u64,
    /// Information blocks per channel realization (after the reference
    /// block in differential mode).
    pub blocks_per_frame: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            ofdm: OfdmConfig::default(),
            order: 8,
            bandwidth_hz: 5e6,
            carrier_hz: 2.5e9,
            channel: load_profile("itu-pb", 11.6).expect("embedded profile"),
            iqi: None,
            detection: Detection::Differential,
            compensation: Compensation::Off,
            step_size: DEFAULT_STEP_SIZE,
            snr_grid_db: (0..=8).map(|i| 5.0 * i as f64).collect(),
            min_bits: 2_000_000,
            max_block_pairs: 1_000_000,
            blocks_per_frame: 10,
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn sample_period(&self) -> f64 {
        1.0 / self.bandwidth_hz
    }

    pub fn iqi_params(&self) -> IqiParams {
        self.iqi.map(|s| s.params()).unwrap_or_else(IqiParams::ideal)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if !matches!(self.order, 2 | 4 | 8 | 16) {
            return err(format!("unsupported PSK order {}", self.order));
        }
        OfdmConfig::new(self.ofdm.fft_len, self.ofdm.cp_len).map_err(|e| Error::Config(e.to_string()))?;
        self.channel
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.min_bits < 10_000 {
            return err(format!("min_bits must be at least 10000, got {}", self.min_bits));
        }
        if self.snr_grid_db.is_empty() {
            return err("empty SNR grid".into());
        }
        if self.snr_grid_db.iter().any(|s| s.is_nan()) {
            return err("SNR grid contains NaN".into());
        }
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return err("SNR grid must be sorted ascending without duplicates".into());
        }
        if !(self.bandwidth_hz > 0.0) {
            return err("bandwidth must be positive".into());
        }
        if self.blocks_per_frame == 0 {
            return err("blocks_per_frame must be at least 1".into());
        }
        if self.max_block_pairs == 0 {
            return err("max_block_pairs must be at least 1".into());
        }
        if !(self.step_size > 0.0) {
            return err("step_size must be positive".into());
        }
        if self.detection == Detection::Coherent && self.compensation != Compensation::Off {
            return err("compensation is only defined for differential detection".into());
        }
        let max_delay = self
            .channel
            .quantize(self.sample_period())
            .last()
            .map(|t| t.0)
            .unwrap_or(0);
        if max_delay > self.ofdm.cp_len {
            return err(format!(
                "channel `{}` spans {} samples, beyond the cyclic prefix of {}",
                self.channel.name, max_delay, self.ofdm.cp_len
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = Self::default();
        file.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ConfigFile {
    seed: Option<u64>,
    #[serde(default)]
    system: SystemSection,
    #[serde(default)]
    channel: ChannelSection,
    #[serde(default)]
    iqi: IqiSection,
    #[serde(default)]
    receiver: ReceiverSection,
    #[serde(default)]
    sweep: SweepSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    subcarriers: Option<usize>,
    cp_len: Option<usize>,
    modulation: Option<String>,
    bandwidth_hz: Option<f64>,
    carrier_hz: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    profile: Option<String>,
    doppler_hz: Option<f64>,
    speed_kmh: Option<f64>,
    delays_ns: Option<Vec<f64>>,
    powers_db: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IqiSection {
    enabled: Option<bool>,
    kappa_db: Option<f64>,
    phi_deg: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReceiverSection {
    detection: Option<String>,
    compensation: Option<String>,
    step_size: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    snr_db: Option<SnrGrid>,
    min_bits: Option<u64>,
    max_block_pairs: Option<u64>,
    blocks_per_frame: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SnrGrid {
    Range(String),
    List(Vec<f64>),
}

impl ConfigFile {
    fn apply(self, cfg: &mut SimConfig) -> Result<()> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        let sys = self.system;
        if let Some(n) = sys.subcarriers {
            cfg.ofdm.fft_len = n;
        }
        if let Some(cp) = sys.cp_len {
            cfg.ofdm.cp_len = cp;
        }
        if let Some(m) = sys.modulation {
            cfg.order = parse_modulation(&m)?;
        }
        if let Some(b) = sys.bandwidth_hz {
            cfg.bandwidth_hz = b;
        }
        if let Some(f) = sys.carrier_hz {
            cfg.carrier_hz = f;
        }

        let ch = self.channel;
        let doppler = match (ch.doppler_hz, ch.speed_kmh) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either channel.doppler_hz or channel.speed_kmh, not both".into(),
                ))
            }
            (Some(d), None) => d,
            (None, Some(v)) => doppler_from_speed(v, cfg.carrier_hz),
            (None, None) => cfg.channel.doppler_hz,
        };
        let name = ch.profile.unwrap_or_else(|| cfg.channel.name.clone());
        cfg.channel = match (ch.delays_ns, ch.powers_db) {
            (Some(d), Some(p)) => ChannelProfile::custom(name, &d, &p, doppler)
                .map_err(|e| Error::Config(e.to_string()))?,
            (None, None) => {
                load_profile(&name, doppler).map_err(|e| Error::Config(e.to_string()))?
            }
            _ => {
                return Err(Error::Config(
                    "custom channels need both delays_ns and powers_db".into(),
                ))
            }
        };

        let iqi = self.iqi;
        let enabled = iqi
            .enabled
            .unwrap_or(iqi.kappa_db.is_some() || iqi.phi_deg.is_some());
        cfg.iqi = enabled.then(|| IqiSetting {
            kappa_db: iqi.kappa_db.unwrap_or(0.0),
            phi_deg: iqi.phi_deg.unwrap_or(0.0),
        });

        let rx = self.receiver;
        if let Some(d) = rx.detection {
            cfg.detection = d.parse()?;
        }
        if let Some(c) = rx.compensation {
            cfg.compensation = c.parse()?;
        }
        if let Some(mu) = rx.step_size {
            cfg.step_size = mu;
        }

        let sw = self.sweep;
        match sw.snr_db {
            Some(SnrGrid::Range(s)) => cfg.snr_grid_db = parse_snr_grid(&s)?,
            Some(SnrGrid::List(v)) => cfg.snr_grid_db = v,
            None => {}
        }
        if let Some(b) = sw.min_bits {
            cfg.min_bits = b;
        }
        if let Some(b) = sw.max_block_pairs {
            cfg.max_block_pairs = b;
        }
        if let Some(b) = sw.blocks_per_frame {
            cfg.blocks_per_frame = b;
        }
        Ok(())
    }
}
