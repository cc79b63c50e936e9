//! Relative Prufer variables for solutions written in the basis {zeta, conj zeta}.
//!
//! A real solution psi on the cell (n-1, n) is psi(x) = Im(rho(n) zeta(x)) with
//! complex coefficient rho(n) = R(n) e^{i eta(n)}. Crossing the delta at n
//! multiplies rho by 1 + U(n) sin(theta) e^{-i theta} where U(n) = g_n/gamma'(n)
//! and theta(n) = eta(n) + gamma(n). The radius lives in log space; the angle
//! increment is taken in (-pi, pi] so eta stays on the continuous branch.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::ReferenceSolution;

/// Prufer state on the cell (n-1, n): log R(n) and the continuous angle eta(n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruferState {
    pub n: i64,
    pub log_radius: f64,
    pub angle: f64,
}

impl PruferState {
    pub fn radius(&self) -> f64 {
        self.log_radius.exp()
    }

    pub fn rho(&self) -> Complex64 {
        Complex64::from_polar(self.radius(), self.angle)
    }

    /// theta(n) = eta(n) + gamma(n).
    pub fn theta(&self, rs: &ReferenceSolution) -> f64 {
        self.angle + rs.gamma(self.n as f64)
    }
}

/// State from the half-line boundary condition psi(0) = sin(theta0),
/// psi'(0+) = cos(theta0); rho(1) = psi'(0+) conj(zeta)(0) - psi(0) conj(zeta)'(0).
pub fn initial_state(rs: &ReferenceSolution, theta0: f64) -> Result<PruferState> {
    initial_state_from_cauchy(rs, theta0.sin(), theta0.cos())
}

/// State from arbitrary non-trivial Cauchy data at 0+.
pub fn initial_state_from_cauchy(
    rs: &ReferenceSolution,
    psi: f64,
    psi_prime: f64,
) -> Result<PruferState> {
    if psi == 0.0 && psi_prime == 0.0 {
        return Err(Error::InvalidParameter(
            "trivial Cauchy data (0, 0) has no Prufer representation".into(),
        ));
    }
    let (z, dz) = rs.zeta(0.0)?;
    let rho = psi_prime * z.conj() - psi * dz.conj();
    Ok(PruferState {
        n: 1,
        log_radius: rho.norm().ln(),
        angle: rho.im.atan2(rho.re),
    })
}

/// U(n) = g_n / gamma'(n).
pub fn coupling_u(rs: &ReferenceSolution, n: i64, g: f64) -> f64 {
    g / rs.gamma1(n as f64)
}

/// One exact step across the delta at n: the multiplicative update
/// rho -> rho (1 + U sin(theta) e^{-i theta}).
pub fn step_exact(state: &PruferState, u: f64, rs: &ReferenceSolution) -> PruferState {
    let theta = state.angle + rs.gamma(state.n as f64);
    step_exact_with_theta(state, u, theta)
}

#[inline]
pub(crate) fn step_exact_with_theta(state: &PruferState, u: f64, theta: f64) -> PruferState {
    let (s, c) = theta.sin_cos();
    let re = 1.0 + u * s * c;
    let im = -u * s * s;
    let mut d_angle = im.atan2(re);
    if d_angle == -PI {
        d_angle = PI;
    }
    PruferState {
        n: state.n + 1,
        log_radius: state.log_radius + 0.5 * (re * re + im * im).ln(),
        angle: state.angle + d_angle,
    }
}

/// Second-order expansions of the step: returns (d log R, d eta).
///
/// Valid for |U| <= 1/2 (Taylor window); the truncation error is O(|U|^3).
pub fn step_approx(state: &PruferState, u: f64, rs: &ReferenceSolution) -> Result<(f64, f64)> {
    if u.abs() > 0.5 {
        return Err(Error::Domain(format!(
            "step_approx valid for |U| <= 0.5, got {u}"
        )));
    }
    let theta = state.angle + rs.gamma(state.n as f64);
    let (s2, c2) = (2.0 * theta).sin_cos();
    let (s4, c4) = (4.0 * theta).sin_cos();
    let d_log_r = 0.5 * u * s2 + u * u / 8.0 - u * u / 8.0 * (2.0 * c2 - c4);
    let d_eta = -0.5 * u + 0.5 * u * c2 + 0.25 * u * u * (s2 - 0.5 * s4);
    Ok((d_log_r, d_eta))
}

/// Slow variables: eta_tilde(n) = eta(n) + lambda sqrt(n/F) and
/// gamma_tilde(n) = gamma(n) - lambda sqrt(n/F); their sum is theta(n).
pub fn slow_variables(state: &PruferState, rs: &ReferenceSolution) -> (f64, f64) {
    let p = rs.params();
    let shift = p.coupling * ((state.n as f64) / p.field_strength).sqrt();
    let tilde_eta = state.angle + shift;
    let tilde_gamma = rs.gamma(state.n as f64) - shift;
    (tilde_eta, tilde_gamma)
}

/// Resonant points X_l (gamma'(X_l) = pi l) and half-integer sampling points
/// x_l = ceil((pi^2/F)(l - 1/2)^2) - 1/2, interlacing as x_l < X_l < x_{l+1}.
#[derive(Debug, Clone)]
pub struct ResonanceGrid {
    pub l_min: u32,
    pub l_max: u32,
    resonant: Vec<f64>,
    /// sampling points for l_min ..= l_max + 1
    sampling: Vec<f64>,
}

impl ResonanceGrid {
    pub fn resonant(&self, l: u32) -> f64 {
        self.resonant[(l - self.l_min) as usize]
    }

    pub fn sampling(&self, l: u32) -> f64 {
        self.sampling[(l - self.l_min) as usize]
    }

    /// First integer inside the window (x_l, x_{l+1}].
    pub fn window_first(&self, l: u32) -> i64 {
        (self.sampling(l) + 0.5) as i64
    }

    /// Last integer inside the window (x_l, x_{l+1}].
    pub fn window_last(&self, l: u32) -> i64 {
        (self.sampling(l + 1) - 0.5) as i64
    }
}

/// The sampling point formula, exact in f64 for the ranges used here.
pub fn sampling_point(field_strength: f64, l: u32) -> f64 {
    let lf = l as f64;
    (PI * PI / field_strength * (lf - 0.5) * (lf - 0.5)).ceil() - 0.5
}

/// Solve gamma'(X_l) = pi l by bracketed Newton for l in [l_min, l_max].
pub fn build_resonance_grid(
    rs: &ReferenceSolution,
    l_min: u32,
    l_max: u32,
) -> Result<ResonanceGrid> {
    if l_min < 2 || l_max < l_min {
        return Err(Error::InvalidParameter(format!(
            "need 2 <= l_min <= l_max, got [{l_min}, {l_max}]"
        )));
    }
    let f = rs.params().field_strength;
    let mut resonant = Vec::with_capacity((l_max - l_min + 1) as usize);
    for l in l_min..=l_max {
        let lf = l as f64;
        let mut lo = PI * PI * (lf - 1.0) * (lf - 1.0) / f;
        let mut hi = PI * PI * (lf + 1.0) * (lf + 1.0) / f;
        let target = PI * lf;
        if rs.gamma1(lo) >= target || rs.gamma1(hi) <= target {
            return Err(Error::RootBracket(format!(
                "gamma' does not bracket pi*{l} on [{lo}, {hi}]; l_min too small"
            )));
        }
        let mut x = PI * PI * lf * lf / f;
        for _ in 0..60 {
            let p = rs.eval_phase(x)?;
            let r = p.gamma1 - target;
            if r.abs() <= 1e-12 * target {
                break;
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let next = x - r / p.gamma2;
            x = if next <= lo || next >= hi {
                0.5 * (lo + hi)
            } else {
                next
            };
        }
        if (rs.gamma1(x) - target).abs() > 1e-10 {
            return Err(Error::RootBracket(format!(
                "Newton residual too large for X_{l}"
            )));
        }
        resonant.push(x);
    }
    let sampling: Vec<f64> = (l_min..=l_max + 1).map(|l| sampling_point(f, l)).collect();
    for (i, &xl) in resonant.iter().enumerate() {
        if !(sampling[i] < xl && xl < sampling[i + 1]) {
            return Err(Error::RootBracket(format!(
                "interlacing x_l < X_l < x_(l+1) violated at l = {}",
                l_min + i as u32
            )));
        }
    }
    Ok(ResonanceGrid {
        l_min,
        l_max,
        resonant,
        sampling,
    })
}

/// Exact-recursion trajectory with snapshots at selected cells.
#[derive(Debug, Clone)]
pub struct PruferTrajectory {
    pub samples: Vec<PruferState>,
    pub final_state: PruferState,
}

/// Run the exact Prufer recursion from `init` up to the cell n_max, applying
/// the coupling g_n at each integer. `record` must be sorted ascending; the
/// state at each requested cell index is snapshotted.
pub fn run_prufer(
    rs: &ReferenceSolution,
    coupling: &mut dyn FnMut(i64) -> f64,
    init: PruferState,
    n_max: i64,
    record: &[i64],
) -> PruferTrajectory {
    let mut samples = Vec::with_capacity(record.len());
    let mut next_record = record.iter().copied().peekable();
    let mut state = init;
    loop {
        while next_record.peek() == Some(&state.n) {
            samples.push(state);
            next_record.next();
        }
        if state.n >= n_max {
            break;
        }
        let n = state.n;
        let g = coupling(n);
        let phase = rs
            .eval_phase(n as f64)
            .expect("phase evaluation inside trajectory range");
        let u = g / phase.gamma1;
        state = step_exact_with_theta(&state, u, state.angle + phase.gamma);
    }
    PruferTrajectory {
        samples,
        final_state: state,
    }
}
