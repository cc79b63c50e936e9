//! Stationary and non-stationary phase expansions for oscillatory integrals
//! int_I u(x) e^{i omega phi(x)} dx, with boundary contributions, validated
//! against an adaptive quadrature oracle.
//!
//! The boundary operators B^j v = d/dy((phi')^{-1} B^{j-1} v) and the
//! stationary coefficients L_j are expanded through exact jet arithmetic of
//! caller-supplied derivative towers; nothing is differenced numerically.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::quad::integrate_complex;

/// A smooth function supplying its Taylor jet at any point of the interval.
pub trait SmoothFn: Sync {
    fn jet(&self, x: f64, order: usize) -> Jet;

    fn value(&self, x: f64) -> f64 {
        self.jet(x, 0).value()
    }
}

/// Polynomial in the global coordinate; jets by Taylor shift.
pub struct PolyFn(pub Vec<f64>);

impl SmoothFn for PolyFn {
    fn jet(&self, x: f64, order: usize) -> Jet {
        // Horner-style repeated differentiation of the shifted polynomial.
        let mut derivs = vec![0.0; order + 1];
        let mut coeffs = self.0.clone();
        let mut fact = 1.0;
        for (k, slot) in derivs.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
                // differentiate
                for i in 1..coeffs.len() {
                    coeffs[i - 1] = coeffs[i] * i as f64;
                }
                coeffs.pop();
            }
            let mut v = 0.0;
            for c in coeffs.iter().rev() {
                v = v * x + c;
            }
            *slot = v;
            let _ = fact;
        }
        Jet::from_derivatives(&derivs)
    }
}

/// Oscillatory integral problem on (a, b) at frequency omega, with expansion
/// order k (capped at 3; order k needs u in C^{2k} and phi in C^{3k+1}).
pub struct PhaseProblem<'a> {
    pub a: f64,
    pub b: f64,
    pub omega: f64,
    pub amplitude: &'a dyn SmoothFn,
    pub phase: &'a dyn SmoothFn,
    pub order: usize,
}

pub const MAX_EXPANSION_ORDER: usize = 3;

impl PhaseProblem<'_> {
    fn validate(&self) -> Result<()> {
        if !(self.a < self.b) || !(self.omega > 0.0) {
            return Err(Error::InvalidParameter(
                "phase problem requires a < b and omega > 0".into(),
            ));
        }
        if self.order == 0 || self.order > MAX_EXPANSION_ORDER {
            return Err(Error::InvalidParameter(format!(
                "expansion order must lie in 1..={MAX_EXPANSION_ORDER}"
            )));
        }
        Ok(())
    }
}

/// Adaptive Gauss-Kronrod evaluation of the integral itself; absolute error
/// target 1e-12 max(1, omega^{1/2}).
pub fn quadrature_oracle(problem: &PhaseProblem) -> Result<Complex64> {
    problem.validate()?;
    let tol = 1e-12 * problem.omega.sqrt().max(1.0);
    integrate_complex(
        |x| {
            let u = problem.amplitude.value(x);
            let phi = problem.phase.value(x);
            Complex64::from_polar(u, problem.omega * phi)
        },
        problem.a,
        problem.b,
        tol,
        400_000,
    )
}

/// Terms of the boundary expansion and an a priori remainder envelope.
#[derive(Debug, Clone)]
pub struct NonstationaryExpansion {
    pub terms: Vec<Complex64>,
    pub remainder_bound: f64,
}

impl NonstationaryExpansion {
    pub fn total(&self) -> Complex64 {
        self.terms.iter().sum()
    }
}

/// Value of B^j u at x, via jets of u (order >= j) and phi (order >= j + 1).
fn boundary_operator(u: &Jet, phi: &Jet, j: usize) -> f64 {
    let inv_dphi = phi.differentiate().recip();
    let mut b = u.clone();
    for _ in 0..j {
        b = inv_dphi.mul(&b).differentiate();
    }
    b.value()
}

/// Non-stationary phase: sum_{j<k} (i/omega)^{j+1} [B^j u/phi' e^{i omega phi}]_a^b
/// with remainder |I| omega^{-k} sum_m delta^{m-2k} sup|d^m u|.
pub fn nonstationary_expansion(problem: &PhaseProblem) -> Result<NonstationaryExpansion> {
    problem.validate()?;
    let k = problem.order;
    let delta = min_abs_phase_slope(problem, 64)?;
    let mut terms = Vec::with_capacity(k);
    let u_a = problem.amplitude.jet(problem.a, k);
    let u_b = problem.amplitude.jet(problem.b, k);
    let phi_a = problem.phase.jet(problem.a, k + 1);
    let phi_b = problem.phase.jet(problem.b, k + 1);
    let e_a = Complex64::from_polar(1.0, problem.omega * phi_a.value());
    let e_b = Complex64::from_polar(1.0, problem.omega * phi_b.value());
    let i_over_omega = Complex64::new(0.0, 1.0 / problem.omega);
    let mut pow = Complex64::new(1.0, 0.0);
    for j in 0..k {
        pow *= i_over_omega;
        let at_a = boundary_operator(&u_a, &phi_a, j) / phi_a.derivative(1) * e_a;
        let at_b = boundary_operator(&u_b, &phi_b, j) / phi_b.derivative(1) * e_b;
        terms.push(pow * (at_a - at_b));
    }
    let sup = amplitude_sup_norms(problem, k, 64);
    let mut envelope = 0.0;
    for (m, s) in sup.iter().enumerate() {
        envelope += delta.powi(m as i32 - 2 * k as i32) * s;
    }
    Ok(NonstationaryExpansion {
        terms,
        remainder_bound: (problem.b - problem.a) * problem.omega.powi(-(k as i32)) * envelope,
    })
}

fn min_abs_phase_slope(problem: &PhaseProblem, probes: usize) -> Result<f64> {
    let mut delta = f64::INFINITY;
    for i in 0..=probes {
        let x = problem.a + (problem.b - problem.a) * i as f64 / probes as f64;
        delta = delta.min(problem.phase.jet(x, 1).derivative(1).abs());
    }
    if delta < 1e-12 {
        return Err(Error::Degenerate(format!(
            "|phi'| dips to {delta:.3e} on the interval; non-stationary expansion invalid"
        )));
    }
    Ok(delta)
}

fn amplitude_sup_norms(problem: &PhaseProblem, max_order: usize, probes: usize) -> Vec<f64> {
    let mut sup = vec![0.0f64; max_order + 1];
    for i in 0..=probes {
        let x = problem.a + (problem.b - problem.a) * i as f64 / probes as f64;
        let jet = problem.amplitude.jet(x, max_order);
        for (m, s) in sup.iter_mut().enumerate() {
            *s = s.max(jet.derivative(m).abs());
        }
    }
    sup
}

/// Stationary-phase expansion: interior main terms plus boundary terms.
#[derive(Debug, Clone)]
pub struct StationaryExpansion {
    pub stationary_point: f64,
    pub main_terms: Vec<Complex64>,
    pub boundary_terms: Vec<Complex64>,
    pub remainder_bound: f64,
}

impl StationaryExpansion {
    pub fn total(&self) -> Complex64 {
        self.main_terms.iter().sum::<Complex64>() + self.boundary_terms.iter().sum::<Complex64>()
    }
}

/// L_j u(x0) from the Hoermander-type sum
///   L_j v = sum_{nu - mu = j, 2 nu >= 3 mu} i^{-j} 2^{-nu}/(nu! mu!)
///           phi''(x0)^{-nu} (-1)^nu d^{2 nu}(f^mu v)(x0),
/// f(y) = phi(y) - phi(x0) - phi''(x0)(y - x0)^2/2. The truncated-order jets
/// are exact here because f vanishes to third order at x0.
fn stationary_coefficient(u: &Jet, phi: &Jet, j: usize) -> Complex64 {
    let ddphi = phi.derivative(2);
    // f as a Taylor jet at x0: drop the 0th, 1st (= 0 at a stationary point)
    // and quadratic coefficients.
    let mut f_coeffs = phi.coeffs.clone();
    f_coeffs[0] = 0.0;
    f_coeffs[1] = 0.0;
    f_coeffs[2] = 0.0;
    let f = Jet::from_coeffs(f_coeffs);

    let i_pow_minus_j = match j % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for nu in j..=(3 * j).max(j) {
        let mu = nu - j;
        if 2 * nu < 3 * mu {
            continue;
        }
        // d^{2nu}(f^mu v)(x0) = (2nu)! [t^{2nu}] (f^mu v)
        let mut poly = u.clone();
        for _ in 0..mu {
            poly = poly.mul_full(&f);
        }
        let mut fact = 1.0;
        for i in 2..=(2 * nu) {
            fact *= i as f64;
        }
        let d2nu = poly.coeff(2 * nu) * fact;
        let mut nu_fact = 1.0;
        for i in 2..=nu {
            nu_fact *= i as f64;
        }
        let mut mu_fact = 1.0;
        for i in 2..=mu {
            mu_fact *= i as f64;
        }
        let sign = if nu % 2 == 0 { 1.0 } else { -1.0 };
        acc += i_pow_minus_j * sign * d2nu
            / (2f64.powi(nu as i32) * nu_fact * mu_fact * ddphi.powi(nu as i32));
    }
    acc
}

/// Stationary phase with boundary contributions: main terms for j <= k-1,
/// boundary terms for j <= k-2, remainder O(omega^{-k}).
pub fn stationary_expansion(problem: &PhaseProblem) -> Result<StationaryExpansion> {
    problem.validate()?;
    let k = problem.order;
    let x0 = locate_stationary_point(problem)?;
    let phi0 = problem.phase.jet(x0, 3 * k + 1);
    let ddphi = phi0.derivative(2);
    if ddphi.abs() < 1e-8 {
        return Err(Error::Degenerate(format!(
            "phi''(x0) = {ddphi:.3e} too close to degenerate"
        )));
    }
    let u0 = problem.amplitude.jet(x0, 2 * k);
    let omega = problem.omega;

    let front = (2.0 * PI).sqrt() / (omega * ddphi.abs()).sqrt()
        * Complex64::from_polar(1.0, omega * phi0.value() + FRAC_PI_4 * ddphi.signum());
    let mut main_terms = Vec::with_capacity(k);
    for j in 0..k {
        main_terms.push(front * omega.powi(-(j as i32)) * stationary_coefficient(&u0, &phi0, j));
    }

    // Boundary contributions as in the non-stationary lemma, one order lower.
    let mut boundary_terms = Vec::new();
    if k >= 2 {
        let u_a = problem.amplitude.jet(problem.a, k - 1);
        let u_b = problem.amplitude.jet(problem.b, k - 1);
        let phi_a = problem.phase.jet(problem.a, k);
        let phi_b = problem.phase.jet(problem.b, k);
        let e_a = Complex64::from_polar(1.0, omega * phi_a.value());
        let e_b = Complex64::from_polar(1.0, omega * phi_b.value());
        let i_over_omega = Complex64::new(0.0, 1.0 / omega);
        let mut pow = Complex64::new(1.0, 0.0);
        for j in 0..=(k - 2) {
            pow *= i_over_omega;
            let at_a = boundary_operator(&u_a, &phi_a, j) / phi_a.derivative(1) * e_a;
            let at_b = boundary_operator(&u_b, &phi_b, j) / phi_b.derivative(1) * e_b;
            boundary_terms.push(pow * (at_a - at_b));
        }
    }

    let sup = amplitude_sup_norms(problem, 2 * k, 64);
    let envelope: f64 = sup.iter().sum();
    Ok(StationaryExpansion {
        stationary_point: x0,
        main_terms,
        boundary_terms,
        remainder_bound: omega.powi(-(k as i32)) * envelope,
    })
}

fn locate_stationary_point(problem: &PhaseProblem) -> Result<f64> {
    let probes = 256;
    let slope = |x: f64| problem.phase.jet(x, 1).derivative(1);
    let mut bracket = None;
    let mut prev_x = problem.a;
    let mut prev_s = slope(prev_x);
    for i in 1..=probes {
        let x = problem.a + (problem.b - problem.a) * i as f64 / probes as f64;
        let s = slope(x);
        if prev_s == 0.0 {
            bracket = Some((prev_x, prev_x));
            break;
        }
        if s * prev_s < 0.0 {
            if bracket.is_some() {
                return Err(Error::Domain(
                    "multiple stationary points in the interval".into(),
                ));
            }
            bracket = Some((prev_x, x));
        }
        prev_x = x;
        prev_s = s;
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        Error::Domain("no interior stationary point located on the probe grid".into())
    })?;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let jet = problem.phase.jet(x, 2);
        let s = jet.derivative(1);
        if s == 0.0 {
            break;
        }
        if s * slope(lo) < 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - s / jet.derivative(2);
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo).abs() < 1e-15 * (problem.b - problem.a) {
            break;
        }
    }
    let resid = slope(x).abs();
    // omega-independent scale of phi' over the interval
    let scale = slope(problem.a).abs().max(slope(problem.b).abs()).max(1.0);
    if resid > 1e-12 * scale {
        return Err(Error::RootBracket(format!(
            "stationary point residual {resid:.3e}"
        )));
    }
    Ok(x)
}
