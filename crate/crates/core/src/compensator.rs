//! Decision-directed compensation of receiver I/Q imbalance for differential
//! Alamouti detection.
//!
//! With `Gamma = diag(g, conj(g))` the compensated blocks are
//!
//! ```text
//! S^  = Z'  + Gamma  Zbar'
//! Sbar^ = Gamma* Z'  + Zbar'
//! ```
//!
//! and `g = -beta / conj(alpha)` removes the image term exactly, leaving
//! `diag(c, conj(c)) Lambda S` which still obeys the differential recursion.
//! The scalar `g` is learnt by LMS on the differential residuals
//! `Xi = Z'_{k+1} - Z'_k U`, `Delta = Zbar'_{k+1} - Zbar'_k U`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::iqi::IqiParams;
use crate::numerics::PskConstellation;
use crate::ofdm::SubcarrierObservation;
use crate::stbc::{ml_differential_detect, AlamoutiMatrix, Decision};

pub const DEFAULT_STEP_SIZE: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatorState {
    pub gamma: Complex64,
    pub mu: f64,
    pub iteration: u64,
}

impl CompensatorState {
    pub fn new(mu: f64) -> Self {
        Self {
            gamma: Complex64::new(0.0, 0.0),
            mu,
            iteration: 0,
        }
    }
}

impl Default for CompensatorState {
    fn default() -> Self {
        Self::new(DEFAULT_STEP_SIZE)
    }
}

/// The ideal compensation coefficient `-beta / conj(alpha)`.
pub fn gamma_true(p: &IqiParams) -> Result<Complex64> {
    if p.alpha.norm_sqr() == 0.0 {
        return Err(Error::DegenerateIqi);
    }
    Ok(-p.beta / p.alpha.conj())
}

/// Compensated blocks at the desired subcarrier and (conjugated) image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatedPair {
    pub s_k: AlamoutiMatrix,
    pub s_next: AlamoutiMatrix,
    pub sbar_k: AlamoutiMatrix,
    pub sbar_next: AlamoutiMatrix,
}

#[inline]
pub fn compensate_observation(obs: &SubcarrierObservation, gamma: Complex64) -> CompensatedPair {
    let gc = gamma.conj();
    CompensatedPair {
        s_k: obs.z_k + obs.zbar_k.row_scale(gamma),
        s_next: obs.z_next + obs.zbar_next.row_scale(gamma),
        sbar_k: obs.z_k.row_scale(gc) + obs.zbar_k,
        sbar_next: obs.z_next.row_scale(gc) + obs.zbar_next,
    }
}

/// One `(xi, delta)` sample for the LMS update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSample {
    pub xi: Complex64,
    pub delta: Complex64,
}

/// First-column residual samples `([Xi]_11, [Delta]_11)` and
/// `([Xi*]_21, [Delta*]_21)`.
///
/// `u_step` is the matrix linking the two blocks, i.e. the information
/// matrix after power normalisation (see [`step_matrix`]).
#[inline]
pub fn build_residuals(obs: &SubcarrierObservation, u_step: &AlamoutiMatrix) -> [ResidualSample; 2] {
    let xi = obs.z_next - obs.z_k * *u_step;
    let delta = obs.zbar_next - obs.zbar_k * *u_step;
    // [M]_21 = -conj(b), so its conjugate is -b.
    [
        ResidualSample {
            xi: xi.a,
            delta: delta.a,
        },
        ResidualSample {
            xi: -xi.b,
            delta: -delta.b,
        },
    ]
}

/// Unit-modulus information matrix scaled so that `S_k S_k^H = I` is kept.
#[inline]
pub fn step_matrix(u: &AlamoutiMatrix) -> AlamoutiMatrix {
    u.scale(FRAC_1_SQRT_2)
}

/// `e = xi + g delta`, then a descent step `g <- g - mu e conj(delta)`.
#[inline]
pub fn lms_step(state: CompensatorState, xi: Complex64, delta: Complex64) -> CompensatorState {
    let e = xi + state.gamma * delta;
    CompensatorState {
        gamma: state.gamma - state.mu * e * delta.conj(),
        mu: state.mu,
        iteration: state.iteration + 1,
    }
}

/// Decisions for one subcarrier pair within one block pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDecision {
    pub desired: Decision,
    pub image: Decision,
}

/// Stateful receiver-side compensator.
#[derive(Debug, Clone)]
pub struct IqiCompensator {
    pub state: CompensatorState,
    /// When false `gamma` is held fixed (genie or disabled compensation).
    pub adapt: bool,
}

impl IqiCompensator {
    pub fn adaptive(mu: f64) -> Self {
        Self {
            state: CompensatorState::new(mu),
            adapt: true,
        }
    }

    pub fn fixed(gamma: Complex64) -> Self {
        Self {
            state: CompensatorState {
                gamma,
                mu: 0.0,
                iteration: 0,
            },
            adapt: false,
        }
    }

    pub fn gamma(&self) -> Complex64 {
        self.state.gamma
    }

    /// Compensates with the current `gamma`, detects both members of the
    /// pair, then (if adapting) runs two LMS updates from the desired
    /// subcarrier's residuals. `genie` replaces the desired decision in the
    /// update with the true information matrix.
    #[inline]
    pub fn process(
        &mut self,
        obs: &SubcarrierObservation,
        constellation: &PskConstellation,
        genie: Option<&AlamoutiMatrix>,
    ) -> PairDecision {
        let comp = compensate_observation(obs, self.state.gamma);
        let desired = ml_differential_detect(&comp.s_k, &comp.s_next, constellation);
        let image = ml_differential_detect(&comp.sbar_k.conj(), &comp.sbar_next.conj(), constellation);
        if self.adapt {
            let u = step_matrix(genie.unwrap_or(&desired.u));
            for r in build_residuals(obs, &u) {
                self.state = lms_step(self.state, r.xi, r.delta);
            }
        }
        PairDecision { desired, image }
    }
}

/// Output of [`decision_directed_pass`].
#[derive(Debug, Clone)]
pub struct PassOutput {
    /// Detected bits, block-pair major, then ascending pair head with the
    /// desired subcarrier before its image.
    pub bits: Vec<u8>,
    pub state: CompensatorState,
    /// `gamma` after every LMS update, starting with the initial value.
    pub trajectory: Vec<Complex64>,
}

/// Runs the decision-directed loop over a stream of block pairs. Each item
/// holds the observations of every pair head (`n < N - n + 2`) for one block
/// pair.
pub fn decision_directed_pass<'a, I>(
    block_pairs: I,
    state: CompensatorState,
    constellation: &PskConstellation,
) -> PassOutput
where
    I: IntoIterator<Item = &'a [SubcarrierObservation]>,
{
    run_pass(block_pairs.into_iter().map(|o| (o, None)), state, constellation)
}

/// Same as [`decision_directed_pass`] but the LMS update uses the supplied
/// true information matrices (one per observation) instead of decisions.
pub fn genie_directed_pass<'a, I>(
    block_pairs: I,
    state: CompensatorState,
    constellation: &PskConstellation,
) -> PassOutput
where
    I: IntoIterator<Item = (&'a [SubcarrierObservation], &'a [AlamoutiMatrix])>,
{
    run_pass(
        block_pairs.into_iter().map(|(o, u)| (o, Some(u))),
        state,
        constellation,
    )
}

fn run_pass<'a, I>(items: I, state: CompensatorState, constellation: &PskConstellation) -> PassOutput
where
    I: Iterator<Item = (&'a [SubcarrierObservation], Option<&'a [AlamoutiMatrix]>)>,
{
    let mut comp = IqiCompensator { state, adapt: true };
    let k = constellation.bits_per_symbol();
    let mut bits = Vec::new();
    let mut trajectory = vec![state.gamma];
    let mut buf = vec![0u8; k];
    for (observations, truth) in items {
        for (i, obs) in observations.iter().enumerate() {
            let genie = truth.map(|t| &t[i]);
            let before = comp.state.iteration;
            let d = comp.process(obs, constellation, genie);
            debug_assert_eq!(comp.state.iteration, before + 2);
            trajectory.push(comp.state.gamma);
            for dec in [d.desired, d.image] {
                for idx in [dec.indices.0, dec.indices.1] {
                    constellation.write_bits(constellation.bits_of_index(idx), &mut buf);
                    bits.extend_from_slice(&buf);
                }
            }
        }
    }
    PassOutput {
        bits,
        state: comp.state,
        trajectory,
    }
}

/// Writes `iteration,gamma_re,gamma_im` rows.
pub fn write_trajectory_csv<W: Write>(trajectory: &[Complex64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "gamma_re", "gamma_im"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for (i, g) in trajectory.iter().enumerate() {
        w.write_record([i.to_string(), format!("{:.9e}", g.re), format!("{:.9e}", g.im)])
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
