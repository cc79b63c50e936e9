//! The Stark reference solution zeta and its phase.
//!
//! zeta(x) = sqrt(pi/F^{1/3}) (i Ai(u) + Bi(u)) with u = -F^{1/3}(x + E/F)
//! solves -zeta'' - F x zeta = E zeta. Since Ai and Bi have no common zeros,
//! |zeta| > 0 everywhere and the continuous phase gamma with
//! zeta = |zeta| e^{i gamma}, gamma(0) in (-pi, pi], is well defined. The two
//! identities that everything downstream relies on are
//!   {zeta, conj zeta} = -2i   and   |zeta(x)|^2 gamma'(x) = 1.
//!
//! Far into the oscillatory regime the phase comes from the Airy asymptotic
//! series (no unwrapping, no mod-2pi reduction); below that a cached unwrap
//! table anchored at gamma(0) carries the branch. Derivatives of gamma beyond
//! the second come from the Riccati chain of w = zeta'/zeta, never from
//! differencing.

mod airy;

pub use airy::{airy, AiryValues, MAX_NEGATIVE_ARG, MAX_POSITIVE_ARG};

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::ModelParams;

use airy::{airy_oscillatory, OscParts, OSC_SWITCH_T};

/// Argument above which the growing Airy branch makes zeta unrepresentable.
const GROW_T_LIMIT: f64 = 103.0;
/// Argument below which gamma' underflows and the unwrap table stops.
const TABLE_T_LIMIT: f64 = 60.0;

/// gamma, gamma', gamma'' at a point.
#[derive(Debug, Clone, Copy)]
pub struct PhaseEval {
    pub gamma: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

/// Cached evaluator for the reference solution of a fixed (F, E).
///
/// Immutable after construction; cheap to share across threads.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    params: ModelParams,
    /// x above which the oscillatory asymptotic branch is used.
    x_osc: f64,
    /// x below which gamma is constant to machine precision.
    x_table_lo: f64,
    /// x below which zeta itself overflows f64.
    x_min_repr: f64,
    /// Unwrap table nodes (x, gamma), increasing in x, covering [x_table_lo, x_osc].
    table: Vec<(f64, f64)>,
    /// 2 pi k correction anchoring the asymptotic phase to gamma(0) in (-pi, pi].
    asym_shift: f64,
}

#[inline]
fn wrap_angle(d: f64) -> f64 {
    let mut r = d.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

impl ReferenceSolution {
    pub fn new(params: ModelParams) -> Result<Self> {
        let f = params.field_strength;
        let e = params.energy;
        let f13 = f.cbrt();
        let x_turn = -e / f;
        let x_osc = x_turn + OSC_SWITCH_T / f13;
        let x_table_lo = x_turn - TABLE_T_LIMIT / f13;
        let x_min_repr = x_turn - GROW_T_LIMIT / f13;

        let mut rs = ReferenceSolution {
            params,
            x_osc,
            x_table_lo,
            x_min_repr,
            table: Vec::new(),
            asym_shift: 0.0,
        };

        if x_osc <= 0.0 {
            // x = 0 is already oscillatory: anchor the asymptotic branch there,
            // then hang the table below it.
            let raw0 = rs.osc_parts(0.0).phase();
            rs.asym_shift = raw0 - wrap_angle(raw0);
            let top = rs.osc_parts(x_osc).phase() - rs.asym_shift;
            rs.build_table_downward(x_osc, top)?;
        } else {
            let anchor_x = if x_table_lo <= 0.0 { 0.0 } else { x_table_lo };
            let zeta_anchor = rs.zeta_from_airy(anchor_x)?.0;
            let anchor = zeta_anchor.im.atan2(zeta_anchor.re);
            rs.build_table_bidirectional(anchor_x, anchor)?;
            let (xn, gn) = *rs.table.last().unwrap();
            let seam = rs.seam_gamma(xn, gn);
            let raw = rs.osc_parts(rs.x_osc).phase();
            rs.asym_shift = 2.0 * PI * ((raw - seam) / (2.0 * PI)).round();
            let resid = raw - rs.asym_shift - seam;
            if resid.abs() > 1e-8 {
                return Err(Error::Precision(format!(
                    "phase branch mismatch {resid:.3e} at the asymptotic seam"
                )));
            }
        }
        Ok(rs)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Scaled Airy argument t(x) = F^{1/3}(x + E/F); oscillatory for t > 0.
    #[inline]
    fn t_of(&self, x: f64) -> f64 {
        self.params.field_strength.cbrt() * (x + self.params.energy / self.params.field_strength)
    }

    #[inline]
    fn osc_parts(&self, x: f64) -> OscParts {
        airy_oscillatory(self.t_of(x))
    }

    fn zeta_from_airy(&self, x: f64) -> Result<(Complex64, Complex64)> {
        if x < self.x_min_repr {
            return Err(Error::Domain(format!(
                "zeta overflows below x = {:.3}",
                self.x_min_repr
            )));
        }
        let f13 = self.params.field_strength.cbrt();
        let u = -self.t_of(x);
        let v = airy(u)?;
        let scale = (PI / f13).sqrt();
        let value = scale * Complex64::new(v.bi, v.ai);
        let derivative = -f13 * scale * Complex64::new(v.bi_prime, v.ai_prime);
        Ok((value, derivative))
    }

    /// zeta(x) and zeta'(x).
    pub fn zeta(&self, x: f64) -> Result<(Complex64, Complex64)> {
        if x >= self.x_osc {
            let p = self.eval_phase(x)?;
            let modulus = (1.0 / p.gamma1).sqrt();
            let value = Complex64::from_polar(modulus, p.gamma);
            let w = Complex64::new(-p.gamma2 / (2.0 * p.gamma1), p.gamma1);
            Ok((value, value * w))
        } else {
            self.zeta_from_airy(x)
        }
    }

    /// |zeta(x)|^2.
    pub fn abs_zeta_sq(&self, x: f64) -> Result<f64> {
        if x >= self.x_osc {
            let parts = self.osc_parts(x);
            Ok(parts.pi_modulus_sq() / self.params.field_strength.cbrt())
        } else {
            let (z, _) = self.zeta_from_airy(x)?;
            Ok(z.norm_sqr())
        }
    }

    /// Continuous phase gamma(x), anchored at gamma(0) in (-pi, pi].
    pub fn gamma(&self, x: f64) -> f64 {
        if x >= self.x_osc {
            return self.osc_parts(x).phase() - self.asym_shift;
        }
        if x <= self.x_table_lo {
            // gamma' < exp(-600) here; constant to all representable digits.
            return self.table.first().map(|&(_, g)| g).unwrap_or(0.0);
        }
        let idx = self.nearest_node(x);
        let (_, g_node) = self.table[idx];
        self.seam_gamma(x, g_node)
    }

    /// gamma'(x) = 1/|zeta(x)|^2 (zero when |zeta| overflows in the decaying tail).
    pub fn gamma1(&self, x: f64) -> f64 {
        if x >= self.x_osc {
            let parts = self.osc_parts(x);
            let f13 = self.params.field_strength.cbrt();
            f13 * parts.t.sqrt() / (parts.p * parts.p + parts.q * parts.q)
        } else {
            match self.zeta_from_airy(x) {
                Ok((z, _)) => 1.0 / z.norm_sqr(),
                Err(_) => 0.0,
            }
        }
    }

    /// gamma''(x), analytic (never finite-differenced).
    pub fn gamma2(&self, x: f64) -> f64 {
        if x >= self.x_osc {
            let parts = self.osc_parts(x);
            let f = self.params.field_strength;
            let f23 = f.cbrt() * f.cbrt();
            let d = parts.p * parts.p + parts.q * parts.q;
            // gamma' = F^{1/3} sqrt(t)/D(xi), dxi/dx = F^{1/3} sqrt(t)
            f23 * (0.5 / (parts.t.sqrt() * d) - parts.t * parts.dsq_dxi / (d * d))
        } else {
            match self.zeta_from_airy(x) {
                Ok((z, dz)) => {
                    let w = dz / z;
                    -(w * w).im
                }
                Err(_) => 0.0,
            }
        }
    }

    /// (gamma, gamma', gamma'') in one evaluation.
    pub fn eval_phase(&self, x: f64) -> Result<PhaseEval> {
        if x >= self.x_osc {
            let parts = self.osc_parts(x);
            let f = self.params.field_strength;
            let f13 = f.cbrt();
            let d = parts.p * parts.p + parts.q * parts.q;
            let gamma1 = f13 * parts.t.sqrt() / d;
            let gamma2 = f13 * f13 * (0.5 / (parts.t.sqrt() * d) - parts.t * parts.dsq_dxi / (d * d));
            Ok(PhaseEval {
                gamma: parts.phase() - self.asym_shift,
                gamma1,
                gamma2,
            })
        } else {
            Ok(PhaseEval {
                gamma: self.gamma(x),
                gamma1: self.gamma1(x),
                gamma2: self.gamma2(x),
            })
        }
    }

    /// Derivative tower [gamma, gamma', ..., gamma^{(order)}] from the Riccati
    /// equation w' = -(Fx + E) - w^2 for w = zeta'/zeta.
    pub fn gamma_tower(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        let p = self.eval_phase(x)?;
        let mut out = Vec::with_capacity(order + 1);
        out.push(p.gamma);
        if order == 0 {
            return Ok(out);
        }
        let mut w: Vec<Complex64> = Vec::with_capacity(order);
        w.push(Complex64::new(-p.gamma2 / (2.0 * p.gamma1), p.gamma1));
        for m in 0..order.saturating_sub(1) {
            let mut sq = Complex64::new(0.0, 0.0);
            for j in 0..=m {
                sq += binomial(m, j) * w[j] * w[m - j];
            }
            let mut next = -sq;
            if m == 0 {
                next -= Complex64::new(
                    self.params.field_strength * x + self.params.energy,
                    0.0,
                );
            } else if m == 1 {
                next -= Complex64::new(self.params.field_strength, 0.0);
            }
            w.push(next);
        }
        for k in 0..order {
            out.push(w[k].im);
        }
        Ok(out)
    }

    /// x above which the asymptotic phase branch is in effect.
    pub fn oscillatory_threshold(&self) -> f64 {
        self.x_osc
    }

    /// Smallest x with representable zeta.
    pub fn representable_min(&self) -> f64 {
        self.x_min_repr
    }

    fn seam_gamma(&self, x: f64, g_node: f64) -> f64 {
        let (z, _) = match self.zeta_from_airy(x) {
            Ok(v) => v,
            // Deep in the decaying tail the phase is frozen anyway.
            Err(_) => return g_node,
        };
        g_node + wrap_angle(z.im.atan2(z.re) - g_node)
    }

    fn nearest_node(&self, x: f64) -> usize {
        let idx = self.table.partition_point(|&(xn, _)| xn < x);
        if idx == 0 {
            return 0;
        }
        if idx >= self.table.len() {
            return self.table.len() - 1;
        }
        if (x - self.table[idx - 1].0) <= (self.table[idx].0 - x) {
            idx - 1
        } else {
            idx
        }
    }

    fn unwrap_step(&self, x: f64) -> f64 {
        let g1 = self.gamma1(x).max(0.0);
        (0.25f64).min(1.0 / (4.0 * g1.max(1.0)))
    }

    fn push_node(&mut self, x: f64, gamma: f64) {
        self.table.push((x, gamma));
    }

    fn step_gamma(&self, x_from: f64, g_from: f64, x_to: f64) -> Result<f64> {
        let (z, _) = self.zeta_from_airy(x_to)?;
        let delta = wrap_angle(z.im.atan2(z.re) - wrap_angle(g_from));
        if delta.abs() >= 0.5 * PI {
            return Err(Error::Precision(format!(
                "phase unwrap step at x = {x_from}..{x_to} jumped by {delta:.3}"
            )));
        }
        Ok(g_from + delta)
    }

    fn build_table_bidirectional(&mut self, anchor_x: f64, anchor_gamma: f64) -> Result<()> {
        let mut down = Vec::new();
        let mut x = anchor_x;
        let mut g = anchor_gamma;
        while x > self.x_table_lo {
            let h = self.unwrap_step(x);
            let next = (x - h).max(self.x_table_lo);
            g = self.step_gamma(x, g, next)?;
            x = next;
            down.push((x, g));
        }
        down.reverse();
        self.table = down;
        self.push_node(anchor_x, anchor_gamma);
        let mut x = anchor_x;
        let mut g = anchor_gamma;
        while x < self.x_osc {
            let h = self.unwrap_step(x);
            let next = (x + h).min(self.x_osc);
            g = self.step_gamma(x, g, next)?;
            x = next;
            self.push_node(x, g);
        }
        Ok(())
    }

    fn build_table_downward(&mut self, top_x: f64, top_gamma: f64) -> Result<()> {
        let mut nodes = vec![(top_x, top_gamma)];
        let mut x = top_x;
        let mut g = top_gamma;
        while x > self.x_table_lo {
            let h = self.unwrap_step(x);
            let next = (x - h).max(self.x_table_lo);
            g = self.step_gamma(x, g, next)?;
            x = next;
            nodes.push((x, g));
        }
        nodes.reverse();
        self.table = nodes;
        Ok(())
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Leading asymptotic behavior of gamma and its first two derivatives:
///   order 0: (2 sqrt(F)/3) x^{3/2} + (E/sqrt(F)) x^{1/2} + pi/4
///   order 1: sqrt(F) x^{1/2}
///   order 2: (sqrt(F)/2) x^{-1/2}
///
/// The additive constant pi/4 is what the anchored branch actually converges
/// to; see the residual-slope tests.
pub fn gamma_asymptotic(params: &ModelParams, x: f64, order: u8) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "gamma_asymptotic requires x > 0, got {x}"
        )));
    }
    let f = params.field_strength;
    let sf = f.sqrt();
    match order {
        0 => Ok(2.0 * sf / 3.0 * x.powf(1.5) + params.energy / sf * x.sqrt() + FRAC_PI_4),
        1 => Ok(sf * x.sqrt()),
        2 => Ok(0.5 * sf / x.sqrt()),
        _ => Err(Error::InvalidParameter(format!(
            "gamma_asymptotic order must be 0, 1 or 2, got {order}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::log_log_slope;

    fn rs(f: f64, e: f64) -> ReferenceSolution {
        ReferenceSolution::new(ModelParams::new(f, e, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn gamma_at_zero_is_principal() {
        for (f, e) in [(1.0, 0.0), (PI * PI / 3.0, 1.0), (4.0, -2.0), (0.5, 17.0), (2.0, -9.0)] {
            let r = rs(f, e);
            let g0 = r.gamma(0.0);
            assert!(g0 > -PI && g0 <= PI, "gamma(0) = {g0} for F={f}, E={e}");
            let (z, _) = r.zeta(0.0).unwrap();
            assert!((wrap_angle(g0 - z.im.atan2(z.re))).abs() < 1e-12);
        }
        // F=1, E=0: gamma(0) = atan(Ai(0)/Bi(0)) = pi/6 exactly.
        assert!((rs(1.0, 0.0).gamma(0.0) - PI / 6.0).abs() < 1e-14);
    }

    #[test]
    fn wronskian_and_modulus_identities() {
        for (f, e) in [(1.0, 0.0), (PI * PI / 3.0, 1.0), (4.0, -2.0)] {
            let r = rs(f, e);
            let mut x = -20.0;
            while x < 9000.0 {
                if x >= r.representable_min() {
                    let (z, dz) = r.zeta(x).unwrap();
                    let w = z * dz.conj() - dz * z.conj();
                    assert!(
                        (w - Complex64::new(0.0, -2.0)).norm() < 1e-10,
                        "wronskian at x={x}, F={f}: {w}"
                    );
                    let g1 = r.gamma1(x);
                    assert!(
                        (z.norm_sqr() * g1 - 1.0).abs() < 1e-10,
                        "|zeta|^2 gamma' at x={x}: {}",
                        z.norm_sqr() * g1
                    );
                }
                x += 87.3;
            }
        }
    }

    #[test]
    fn phase_is_continuous_across_the_seam() {
        for (f, e) in [(1.0, 0.0), (4.0, -2.0), (0.7, 3.0)] {
            let r = rs(f, e);
            let x0 = r.oscillatory_threshold();
            let below = r.gamma(x0 - 1e-6);
            let above = r.gamma(x0 + 1e-6);
            let jump = above - below - 2e-6 * r.gamma1(x0);
            assert!(
                jump.abs() < 1e-9,
                "seam jump for F={f}, E={e}: {below} vs {above} (resid {jump:.3e})"
            );
            // strictly increasing over a sample of the positive axis
            let mut prev = r.gamma(0.0);
            let mut x = 0.5;
            while x < 300.0 {
                let g = r.gamma(x);
                assert!(g > prev, "gamma not increasing at x={x}");
                prev = g;
                x += 0.5;
            }
        }
    }

    #[test]
    fn asymptotic_expansion_constants() {
        // order 0 at F=1, E=0, x=1: 2/3 + pi/4 (anchored branch constant).
        let params = ModelParams::new(1.0, 0.0, 0.0).unwrap();
        let v = gamma_asymptotic(&params, 1.0, 0).unwrap();
        assert!((v - (2.0 / 3.0 + FRAC_PI_4)).abs() < 1e-15);
        // order 1 at F=4, E=0, x=9: sqrt(4)*sqrt(9) = 6.
        let params = ModelParams::new(4.0, 0.0, 0.0).unwrap();
        assert!((gamma_asymptotic(&params, 9.0, 1).unwrap() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn gamma_residual_slopes() {
        // F=1, E=2: residuals of gamma, gamma', gamma'' against the leading
        // asymptotics decay like x^{-1/2}, x^{-1/2}, x^{-3/2}.
        let params = ModelParams::new(1.0, 2.0, 0.0).unwrap();
        let r = ReferenceSolution::new(params).unwrap();
        let xs: Vec<f64> = (0..40).map(|i| 1000.0 * (10f64).powf(i as f64 / 39.0)).collect();
        let resid0: Vec<f64> = xs
            .iter()
            .map(|&x| (r.gamma(x) - gamma_asymptotic(&params, x, 0).unwrap()).abs())
            .collect();
        let resid1: Vec<f64> = xs
            .iter()
            .map(|&x| (r.gamma1(x) - gamma_asymptotic(&params, x, 1).unwrap()).abs())
            .collect();
        let resid2: Vec<f64> = xs
            .iter()
            .map(|&x| (r.gamma2(x) - gamma_asymptotic(&params, x, 2).unwrap()).abs())
            .collect();
        let s0 = log_log_slope(&xs, &resid0).unwrap();
        let s1 = log_log_slope(&xs, &resid1).unwrap();
        let s2 = log_log_slope(&xs, &resid2).unwrap();
        assert!((s0 + 0.5).abs() < 0.1, "gamma slope {s0}");
        assert!((s1 + 0.5).abs() < 0.1, "gamma' slope {s1}");
        assert!((s2 + 1.5).abs() < 0.1, "gamma'' slope {s2}");
    }

    #[test]
    fn tower_matches_direct_derivatives() {
        let r = rs(1.0, 0.0);
        let x = 137.25;
        let tower = r.gamma_tower(x, 4).unwrap();
        assert!((tower[0] - r.gamma(x)).abs() < 1e-12);
        assert!((tower[1] - r.gamma1(x)).abs() < 1e-12);
        assert!((tower[2] - r.gamma2(x)).abs() < 1e-12);
        // compare gamma''' and gamma'''' against central differences of gamma''
        let h = 1e-3;
        let d3 = (r.gamma2(x + h) - r.gamma2(x - h)) / (2.0 * h);
        assert!((tower[3] - d3).abs() < 1e-6 * d3.abs().max(1e-3), "{} vs {d3}", tower[3]);
        let d4 = (r.gamma2(x + h) - 2.0 * r.gamma2(x) + r.gamma2(x - h)) / (h * h);
        assert!((tower[4] - d4).abs() < 1e-3 * d4.abs().max(1e-6), "{} vs {d4}", tower[4]);
    }

    #[test]
    fn higher_gamma_derivatives_obey_envelopes() {
        // |d^k gamma| <= C_k x^{3/2 - k} for k = 3, 4 along a wide grid
        let r = rs(1.0, 0.0);
        for i in 1..=20 {
            let x = 50.0 * (200.0f64).powf(i as f64 / 20.0);
            let tower = r.gamma_tower(x, 4).unwrap();
            assert!(
                tower[3].abs() * x.powf(1.5) < 2.0,
                "gamma''' envelope at x={x}: {}",
                tower[3]
            );
            assert!(
                tower[4].abs() * x.powf(2.5) < 3.0,
                "gamma'''' envelope at x={x}: {}",
                tower[4]
            );
        }
    }

    #[test]
    fn scaling_relation_links_parameter_sets() {
        // zeta_{F,E}(x) = F^{-1/6} zeta_{1,0}(F^{1/3}(x + E/F))
        let base = rs(1.0, 0.0);
        let scaled = rs(8.0, 4.0);
        let f13 = 2.0f64;
        for x in [0.3, 2.0, 7.7, 40.0, 412.5] {
            let (zs, _) = scaled.zeta(x).unwrap();
            let (zb, _) = base.zeta(f13 * (x + 0.5)).unwrap();
            let expected = zb / 8.0f64.powf(1.0 / 6.0);
            assert!(
                (zs - expected).norm() < 1e-10 * expected.norm(),
                "scaling at x={x}: {zs} vs {expected}"
            );
        }
    }

    #[test]
    fn gamma1_spot_value() {
        // F=1, E=0, x=400: gamma' = sqrt(400) = 20 up to O(x^{-1/2}).
        let r = rs(1.0, 0.0);
        let g1 = r.gamma1(400.0);
        assert!((g1 - 20.0).abs() < 0.05 / 20.0, "gamma'(400) = {g1}");
    }

    #[test]
    fn high_energy_anchor_cases() {
        // E large positive: x = 0 is already oscillatory (case B anchoring).
        let r = rs(1.0, 30.0);
        let g0 = r.gamma(0.0);
        assert!(g0 > -PI && g0 <= PI);
        // E very negative: the whole table sits right of zero (case C).
        let r = rs(1.0, -80.0);
        let g0 = r.gamma(0.0);
        assert!(g0 > -PI && g0 <= PI + 1e-12);
        assert!(r.gamma1(0.0) >= 0.0);
    }
}
