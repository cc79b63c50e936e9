//! Coarse-grained recursions over the resonance blocks.
//!
//! Sampling the Prufer trajectory at the half-integer points x_l and dressing
//! the samples with O(1/l) phase corrections produces slow variables
//! (cR(l), Lambda(l)) whose one-block increments are explicit up to
//! O(l^{-5/4}): the l-scale recursion. When F = pi^2 q/(3p) the increments
//! over q consecutive blocks collapse to a cubic Gauss sum w(E, lambda, q, p)
//! and an arithmetic phase Omega(k): the q-scale recursion, whose summability
//! drives the convergence of R for non-exceptional energies.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expsum::{cubic_gauss_sum, gauss_sum_zero_threshold, GaussSumSpec};
use crate::params::ModelParams;
use crate::prufer::{sampling_point, PruferState};
use crate::special::ReferenceSolution;

/// Slow phase Gamma(l) = -pi^3 l^3/(3F) + pi l (E - lambda)/F + 3 pi/8.
pub fn big_gamma(params: &ModelParams, l: u32) -> f64 {
    let lf = l as f64;
    -PI.powi(3) * lf.powi(3) / (3.0 * params.field_strength)
        + PI * lf * (params.energy - params.coupling) / params.field_strength
        + 3.0 * PI / 8.0
}

/// Dressed coarse sample at scale l: log cR(l) and Lambda(l), plus the raw
/// (undressed) values R(x_l), eta_tilde(x_l) they came from.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoarseState {
    pub l: u32,
    pub log_radius: f64,
    pub angle: f64,
    pub raw_log_radius: f64,
    pub raw_angle: f64,
    /// theta evaluated at the sampling cell, used by the dressing factors.
    pub theta_sample: f64,
}

impl CoarseState {
    /// Theta(l) = Lambda(l) + Gamma(l).
    pub fn big_theta(&self, params: &ModelParams) -> f64 {
        self.angle + big_gamma(params, self.l)
    }
}

/// Cells ceil(x_l) = x_l + 1/2 at which the trajectory must be sampled for
/// l in [l_min, l_max].
pub fn sample_cells(field_strength: f64, l_min: u32, l_max: u32) -> Vec<i64> {
    (l_min..=l_max)
        .map(|l| (sampling_point(field_strength, l) + 0.5) as i64)
        .collect()
}

/// Dress trajectory samples (one per l, at the cells from `sample_cells`)
/// into coarse states.
pub fn extract_coarse(
    rs: &ReferenceSolution,
    samples: &[PruferState],
    l_min: u32,
) -> Result<Vec<CoarseState>> {
    let params = *rs.params();
    let lambda = params.coupling;
    let mut out = Vec::with_capacity(samples.len());
    for (i, state) in samples.iter().enumerate() {
        let l = l_min + i as u32;
        let expected = (sampling_point(params.field_strength, l) + 0.5) as i64;
        if state.n != expected {
            return Err(Error::Coverage(format!(
                "sample {i} sits at cell {} but l = {l} needs cell {expected}",
                state.n
            )));
        }
        let theta = state.theta(rs);
        let (tilde_eta, _) = crate::prufer::slow_variables(state, rs);
        let lf = l as f64;
        // cR(l) = R(x_l) exp(lambda sin(2 theta(x_l))/(4 pi l)),
        // Lambda(l) = eta_tilde(x_l) + lambda cos(2 theta(x_l))/(4 pi l):
        // the window boundary contributions these absorb carry the combined
        // phase 2 theta(ceil(x_l)) - 2 pi l, because the continuous gamma at
        // the half-integer x_l sits half a cell (gamma shift pi l/2 - pi/4)
        // below its value at the sampling cell.
        let log_radius = state.log_radius + lambda * (2.0 * theta).sin() / (4.0 * PI * lf);
        let angle = tilde_eta + lambda * (2.0 * theta).cos() / (4.0 * PI * lf);
        out.push(CoarseState {
            l,
            log_radius,
            angle,
            raw_log_radius: state.log_radius,
            raw_angle: tilde_eta,
            theta_sample: theta,
        });
    }
    Ok(out)
}

/// Predicted one-block increments of (log cR, Lambda) from scale l to l+1:
///   d log cR = lambda/sqrt(2Fl) sin(2 Theta) + lambda^2/(4Fl)(1 + cos(4 Theta)),
///   d Lambda = lambda/sqrt(2Fl) cos(2 Theta) + lambda^2 S(l),
/// with S(l) supplied by the explicit double sum.
pub fn predict_l_step(state: &CoarseState, params: &ModelParams, s_l: f64) -> (f64, f64) {
    let lambda = params.coupling;
    let f = params.field_strength;
    let lf = state.l as f64;
    let theta = state.big_theta(params);
    let d_log_r = lambda / (2.0 * f * lf).sqrt() * (2.0 * theta).sin()
        + lambda * lambda / (4.0 * f * lf) * (1.0 + (4.0 * theta).cos());
    let d_angle = lambda / (2.0 * f * lf).sqrt() * (2.0 * theta).cos() + lambda * lambda * s_l;
    (d_log_r, d_angle)
}

/// Coarse sample at the q-block scale l = qk together with the arithmetic
/// data Omega(k) and w(E, lambda, q, p) of the rational case.
#[derive(Debug, Clone, Copy)]
pub struct QScaleState {
    pub k: u32,
    pub log_radius: f64,
    pub angle: f64,
    pub omega: f64,
    pub w: Complex64,
}

/// Omega(k) = 3 p (E - lambda) k / pi + 3 pi/8.
pub fn omega_phase(params: &ModelParams, k: u32) -> Result<f64> {
    let rational = params
        .rational
        .ok_or_else(|| Error::InvalidParameter("q-scale requires rational F".into()))?;
    Ok(3.0 * rational.p as f64 * (params.energy - params.coupling) * k as f64 / PI + 3.0 * PI / 8.0)
}

impl QScaleState {
    pub fn from_coarse(state: &CoarseState, params: &ModelParams) -> Result<QScaleState> {
        let rational = params
            .rational
            .ok_or_else(|| Error::InvalidParameter("q-scale requires rational F".into()))?;
        if state.l % rational.q as u32 != 0 {
            return Err(Error::InvalidParameter(format!(
                "l = {} is not a multiple of q = {}",
                state.l, rational.q
            )));
        }
        let k = state.l / rational.q as u32;
        let w = cubic_gauss_sum(&GaussSumSpec {
            p: rational.p,
            q: rational.q,
            energy: params.energy,
            coupling: params.coupling,
            m: None,
        })?;
        Ok(QScaleState {
            k,
            log_radius: state.log_radius,
            angle: state.angle,
            omega: omega_phase(params, k)?,
            w,
        })
    }
}

/// Predicted q-block increments from k to k+1:
///   d log cR = lambda/sqrt(2Fqk) Im[e^{2i(Omega+Lambda)} w]
///            + lambda^2 |w|^2/(4Fqk)
///            + lambda^2/(4Fqk) Re[e^{4i(Omega+Lambda)} w^2],
///   d Lambda = lambda/sqrt(2Fqk) Re[e^{2i(Omega+Lambda)} w].
pub fn predict_q_step(state: &QScaleState, params: &ModelParams) -> Result<(f64, f64)> {
    let rational = params
        .rational
        .ok_or_else(|| Error::InvalidParameter("q-scale requires rational F".into()))?;
    if state.k == 0 {
        return Err(Error::InvalidParameter("q-scale step needs k >= 1".into()));
    }
    let lambda = params.coupling;
    let f = params.field_strength;
    let qk = rational.q as f64 * state.k as f64;
    let phase2 = Complex64::from_polar(1.0, 2.0 * (state.omega + state.angle));
    let d_log_r = lambda / (2.0 * f * qk).sqrt() * (phase2 * state.w).im
        + lambda * lambda * state.w.norm_sqr() / (4.0 * f * qk)
        + lambda * lambda / (4.0 * f * qk) * (phase2 * phase2 * state.w * state.w).re;
    let d_angle = lambda / (2.0 * f * qk).sqrt() * (phase2 * state.w).re;
    Ok((d_log_r, d_angle))
}

/// Energy classification in the rational case: exceptional energies are
/// E = pi^2 m/(3p) + lambda; detection uses the supplied (p, q) exactly.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyClass {
    pub exceptional: bool,
    pub m: Option<i64>,
    pub w_re: f64,
    pub w_im: f64,
}

impl EnergyClass {
    pub fn w(&self) -> Complex64 {
        Complex64::new(self.w_re, self.w_im)
    }
}

pub fn classify_energy(params: &ModelParams, energy: f64) -> Result<EnergyClass> {
    let rational = params
        .rational
        .ok_or_else(|| Error::InvalidParameter("classification requires rational F".into()))?;
    let spacing = PI * PI / (3.0 * rational.p as f64);
    let offset = energy - params.coupling;
    let m = (offset / spacing).round();
    let exceptional = (offset - m * spacing).abs() <= 1e-9;
    let w = if exceptional {
        cubic_gauss_sum(&GaussSumSpec {
            p: rational.p,
            q: rational.q,
            energy,
            coupling: params.coupling,
            m: Some((m as i64).rem_euclid(rational.q as i64)),
        })?
    } else {
        cubic_gauss_sum(&GaussSumSpec {
            p: rational.p,
            q: rational.q,
            energy,
            coupling: params.coupling,
            m: None,
        })?
    };
    Ok(EnergyClass {
        exceptional,
        m: exceptional.then_some(m as i64),
        w_re: w.re,
        w_im: w.im,
    })
}

/// Dyadic Cauchy profile of log R along the q-block samples: for each window
/// [M, 2M] the oscillation sup - inf, compared against the 10 M^{-1/4}
/// tolerance from the tail estimate.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceDiagnostic {
    pub converged: bool,
    pub limit_estimate: f64,
    /// (M, oscillation, tolerance)
    pub profile: Vec<(u32, f64, f64)>,
}

pub const CONVERGENCE_TOLERANCE_FACTOR: f64 = 10.0;

pub fn convergence_diagnostic(samples: &[(u32, f64)]) -> Result<ConvergenceDiagnostic> {
    let k_max = samples.iter().map(|s| s.0).max().unwrap_or(0);
    let k_min = samples.iter().map(|s| s.0).min().unwrap_or(0);
    let mut profile = Vec::new();
    let mut m = k_max / 2;
    while m >= k_min.max(1) {
        let window: Vec<f64> = samples
            .iter()
            .filter(|(k, _)| *k >= m && *k <= 2 * m)
            .map(|(_, v)| *v)
            .collect();
        if window.len() >= 2 {
            let lo = window.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let tol = CONVERGENCE_TOLERANCE_FACTOR * (m as f64).powf(-0.25);
            profile.push((m, hi - lo, tol));
        }
        m /= 2;
    }
    profile.reverse();
    if profile.len() < 4 {
        return Err(Error::InsufficientRange(format!(
            "only {} dyadic windows; need at least 4",
            profile.len()
        )));
    }
    let last = profile.last().unwrap();
    let limit_estimate = samples
        .iter()
        .max_by_key(|(k, _)| *k)
        .map(|(_, v)| *v)
        .unwrap();
    Ok(ConvergenceDiagnostic {
        converged: last.1 <= last.2,
        limit_estimate,
        profile,
    })
}

/// Module envelope constant for the reconstruction band C l^{-1/2}.
pub const RECONSTRUCTION_BAND_C: f64 = 1.0;

/// Main-term reconstruction of the eigenfunction inside the l-th window:
/// psi(x) ~ cR(l) Im(e^{i(Lambda(l) - lambda sqrt(ceil(x)/F))} zeta(x)),
/// with guaranteed relative envelope C l^{-1/2}.
pub fn reconstruct_eigenfunction(
    state: &CoarseState,
    rs: &ReferenceSolution,
    x: f64,
) -> Result<(f64, f64)> {
    let params = rs.params();
    let f = params.field_strength;
    let lf = state.l as f64;
    let lo = PI * PI / f * (lf - 0.5) * (lf - 0.5);
    let hi = PI * PI / f * (lf + 0.5) * (lf + 0.5);
    if !(x > lo && x <= hi) {
        return Err(Error::Domain(format!(
            "x = {x} outside the l = {} window ({lo}, {hi}]",
            state.l
        )));
    }
    let (z, _) = rs.zeta(x)?;
    let phase = state.angle - params.coupling * (x.ceil() / f).sqrt();
    let psi = state.log_radius.exp() * (Complex64::from_polar(1.0, phase) * z).im;
    Ok((psi, RECONSTRUCTION_BAND_C / lf.sqrt()))
}

/// True when the q-scale theory guarantees convergence of R at this energy:
/// non-exceptional E, or exceptional with vanishing w_m.
pub fn convergence_guaranteed(class: &EnergyClass, q: u64) -> bool {
    !class.exceptional || class.w().norm() <= gauss_sum_zero_threshold(q)
}
