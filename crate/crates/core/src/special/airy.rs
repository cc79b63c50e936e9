//! Real-argument Airy functions Ai, Bi and their derivatives.
//!
//! Three evaluation branches:
//!   * Maclaurin series in double-double arithmetic for -11 < x < 9, where the
//!     alternating series loses up to ~15 digits to cancellation in plain f64;
//!   * exponential asymptotic expansions for x >= 9;
//!   * oscillatory (phase/modulus) asymptotic expansions for x <= -11.
//!
//! The branch boundaries are placed so that either side of each seam delivers
//! better than 1e-13 relative accuracy; the seams are cross-checked in tests.

use crate::dd::Dd;
use crate::error::{Error, Result};

/// Ai(0) = 3^{-2/3}/Gamma(2/3)
const AI0: Dd = Dd {
    hi: 0.3550280538878172,
    lo: 2.05233632436212e-17,
};
/// -Ai'(0) = 3^{-1/3}/Gamma(1/3)
const AIP0: Dd = Dd {
    hi: 0.2588194037928068,
    lo: -2.522243111610832e-17,
};
const SQRT3: Dd = Dd {
    hi: 1.7320508075688772,
    lo: 1.0035084221806903e-16,
};

/// Largest argument for which Bi stays below f64 overflow with headroom.
pub const MAX_POSITIVE_ARG: f64 = 104.0;
/// Documented validated range for negative arguments.
pub const MAX_NEGATIVE_ARG: f64 = 1.0e4;

const SERIES_POS_SWITCH: f64 = 9.0;
const SERIES_NEG_SWITCH: f64 = -11.0;

/// Values of Ai, Bi and their derivatives at a common point.
#[derive(Debug, Clone, Copy)]
pub struct AiryValues {
    pub ai: f64,
    pub bi: f64,
    pub ai_prime: f64,
    pub bi_prime: f64,
}

/// Evaluate Ai(x), Bi(x), Ai'(x), Bi'(x).
///
/// Validated for -1e4 <= x <= 104 (Bi overflows f64 shortly above that).
pub fn airy(x: f64) -> Result<AiryValues> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("airy: non-finite argument {x}")));
    }
    if x > MAX_POSITIVE_ARG {
        return Err(Error::Domain(format!(
            "airy: x = {x} exceeds {MAX_POSITIVE_ARG}; Bi overflows f64"
        )));
    }
    if x < -MAX_NEGATIVE_ARG {
        return Err(Error::Domain(format!(
            "airy: x = {x} below validated range -{MAX_NEGATIVE_ARG}"
        )));
    }
    if x >= SERIES_POS_SWITCH {
        Ok(airy_asymptotic_pos(x))
    } else if x <= SERIES_NEG_SWITCH {
        Ok(airy_oscillatory(-x).values())
    } else {
        Ok(airy_series(x))
    }
}

/// Maclaurin series in double-double arithmetic.
///
/// Ai = c1 f - c2 g, Bi = sqrt(3)(c1 f + c2 g) with the standard f, g series.
fn airy_series(x: f64) -> AiryValues {
    let z = Dd::from(x);
    let z3 = z.mul(z).mul(z);

    let mut f = Dd::ONE;
    let mut g = z;
    let mut fp = Dd::ZERO;
    let mut gp = Dd::ONE;

    let mut tf = Dd::ONE;
    let mut tg = z;
    // f' = z^2/2 + ..., g' = 1 + z^3/3 + ...
    let mut tfp = z.mul(z).div_f64(2.0);
    let mut tgp = Dd::ONE;
    fp = fp.add(tfp);

    for k in 0..200 {
        let kf = k as f64;
        tf = tf.mul(z3).div_f64((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        tg = tg.mul(z3).div_f64((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        tfp = tfp.mul(z3).div_f64((3.0 * kf + 3.0) * (3.0 * kf + 5.0));
        tgp = tgp.mul(z3).div_f64((3.0 * kf + 1.0) * (3.0 * kf + 3.0));
        f = f.add(tf);
        g = g.add(tg);
        fp = fp.add(tfp);
        gp = gp.add(tgp);
        let scale = f.abs().max(g.abs()).max(1.0);
        if tf.abs() < 1e-35 * scale && tg.abs() < 1e-35 * scale {
            break;
        }
    }

    let ai = AI0.mul(f).sub(AIP0.mul(g));
    let aip = AI0.mul(fp).sub(AIP0.mul(gp));
    let bi = SQRT3.mul(AI0.mul(f).add(AIP0.mul(g)));
    let bip = SQRT3.mul(AI0.mul(fp).add(AIP0.mul(gp)));
    AiryValues {
        ai: ai.value(),
        bi: bi.value(),
        ai_prime: aip.value(),
        bi_prime: bip.value(),
    }
}

/// Asymptotic series coefficients u_k (values) and v_k (derivatives),
/// u_0 = 1, u_{k+1} = u_k (6k+1)(6k+5)/(72(k+1)), v_k = -(6k+1)/(6k-1) u_k.
#[inline]
fn next_u(k: usize, u_k: f64) -> f64 {
    let kf = k as f64;
    u_k * (6.0 * kf + 1.0) * (6.0 * kf + 5.0) / (72.0 * (kf + 1.0))
}

/// Exponential branch for x >= 9 (zeta = (2/3) x^{3/2} >= 18).
fn airy_asymptotic_pos(x: f64) -> AiryValues {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let inv = 1.0 / zeta;

    let mut sum_au = 0.0; // sum (-1)^k u_k zeta^-k   (Ai)
    let mut sum_av = 0.0; // sum (-1)^k v_k zeta^-k   (Ai')
    let mut sum_bu = 0.0; // sum u_k zeta^-k          (Bi)
    let mut sum_bv = 0.0; // sum v_k zeta^-k          (Bi')
    let mut u = 1.0;
    let mut p = 1.0; // zeta^-k
    let mut sign = 1.0;
    for k in 0..26 {
        let v = -(6.0 * k as f64 + 1.0) / (6.0 * k as f64 - 1.0) * u;
        let tu = u * p;
        let tv = v * p;
        sum_au += sign * tu;
        sum_av += sign * tv;
        sum_bu += tu;
        sum_bv += tv;
        if tu.abs() < 1e-18 {
            break;
        }
        u = next_u(k, u);
        p *= inv;
        sign = -sign;
    }

    let sqrt_pi = std::f64::consts::PI.sqrt();
    let x4 = x.powf(0.25);
    let em = (-zeta).exp();
    let ep = zeta.exp();
    AiryValues {
        ai: em / (2.0 * sqrt_pi * x4) * sum_au,
        ai_prime: -x4 * em / (2.0 * sqrt_pi) * sum_av,
        bi: ep / (sqrt_pi * x4) * sum_bu,
        bi_prime: x4 * ep / sqrt_pi * sum_bv,
    }
}

/// Oscillatory-branch evaluation at argument -t, t >= 11.
///
/// Carries the pieces needed both for raw values and for the reference
/// solution's phase representation:
///   Ai(-t) = (c P + s Q)/(sqrt(pi) t^{1/4}),   c = cos(xi - pi/4),
///   Bi(-t) = (-s P + c Q)/(sqrt(pi) t^{1/4}),  s = sin(xi - pi/4),
///   Ai'(-t) = t^{1/4}(s S - c T)/sqrt(pi),
///   Bi'(-t) = t^{1/4}(c S + s T)/sqrt(pi),
/// with xi = (2/3) t^{3/2}. Then i Ai(-t) + Bi(-t) has modulus
/// sqrt((P^2+Q^2)/(pi sqrt(t))) and phase xi + pi/4 - atan(Q/P).
#[derive(Debug, Clone, Copy)]
pub(crate) struct OscParts {
    pub t: f64,
    pub xi: f64,
    pub p: f64,
    pub q: f64,
    pub s_series: f64,
    pub t_series: f64,
    /// d/dxi of P^2 + Q^2
    pub dsq_dxi: f64,
}

pub(crate) fn airy_oscillatory(t: f64) -> OscParts {
    // Still usable slightly below the production switch (overlap checks).
    debug_assert!(t >= 8.0);
    let xi = 2.0 / 3.0 * t.powf(1.5);
    let inv2 = 1.0 / (xi * xi);

    // Even-index coefficients feed P and S, odd feed Q and T; signs (-1)^k.
    let mut pp = 0.0;
    let mut qq = 0.0;
    let mut ss = 0.0;
    let mut tt = 0.0;
    let mut dp = 0.0; // dP/dxi
    let mut dq = 0.0; // dQ/dxi
    let mut u = 1.0;
    let mut pw_even = 1.0; // xi^{-2k}
    let mut sign = 1.0;
    for k in 0..14 {
        let m_even = 2 * k;
        let v_even = -(6.0 * m_even as f64 + 1.0) / (6.0 * m_even as f64 - 1.0) * u;
        pp += sign * u * pw_even;
        ss += sign * v_even * pw_even;
        dp += sign * u * -(m_even as f64) * pw_even / xi;

        let u_odd = next_u(m_even, u);
        let m_odd = m_even + 1;
        let v_odd = -(6.0 * m_odd as f64 + 1.0) / (6.0 * m_odd as f64 - 1.0) * u_odd;
        let pw_odd = pw_even / xi;
        qq += sign * u_odd * pw_odd;
        tt += sign * v_odd * pw_odd;
        dq += sign * u_odd * -(m_odd as f64) * pw_odd / xi;

        if u * pw_even < 1e-19 {
            break;
        }
        u = next_u(m_odd, u_odd);
        pw_even *= inv2;
        sign = -sign;
    }

    OscParts {
        t,
        xi,
        p: pp,
        q: qq,
        s_series: ss,
        t_series: tt,
        dsq_dxi: 2.0 * (pp * dp + qq * dq),
    }
}

impl OscParts {
    pub fn values(&self) -> AiryValues {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let t4 = self.t.powf(0.25);
        let (s, c) = (self.xi - std::f64::consts::FRAC_PI_4).sin_cos();
        AiryValues {
            ai: (c * self.p + s * self.q) / (sqrt_pi * t4),
            bi: (-s * self.p + c * self.q) / (sqrt_pi * t4),
            ai_prime: t4 * (s * self.s_series - c * self.t_series) / sqrt_pi,
            bi_prime: t4 * (c * self.s_series + s * self.t_series) / sqrt_pi,
        }
    }

    /// Phase of i Ai(-t) + Bi(-t), continuous in t (no mod-2pi reduction).
    #[inline]
    pub fn phase(&self) -> f64 {
        self.xi + std::f64::consts::FRAC_PI_4 - (self.q / self.p).atan()
    }

    /// (Ai^2 + Bi^2)(-t) * pi, i.e. pi * squared modulus.
    #[inline]
    pub fn pi_modulus_sq(&self) -> f64 {
        (self.p * self.p + self.q * self.q) / self.t.sqrt()
    }
}

pub(crate) const OSC_SWITCH_T: f64 = -SERIES_NEG_SWITCH;

#[cfg(test)]
mod tests {
    use super::*;

    // Frozen from a 30-digit evaluation (mpmath); spans all three branches.
    const REFERENCE: &[(f64, f64, f64, f64, f64)] = &[
        (
            -9999.75,
            0.020258843986828982301,
            -0.052656603495065647945,
            5.2655950348253956805,
            2.0258577585219584856,
        ),
        (
            -1000.5,
            -0.046895461515614125919,
            0.08868000107825552159,
            -2.8050205709318076578,
            -1.4833132392964809605,
        ),
        (
            -100.5,
            0.027927645277987351801,
            0.17598792590995788889,
            -1.7642042712134213374,
            0.28041159694993783969,
        ),
        (
            -50.25,
            -0.10228007262505645287,
            0.18558671286004571043,
            -1.316083353811123808,
            -0.72411273085091646144,
        ),
        (
            -20.5,
            -0.044625680397011909816,
            0.26136213786923029211,
            -1.183933019705147497,
            -0.19886802802168598109,
        ),
        (
            -11.5,
            0.3054229700435926564,
            -0.023909272355945757549,
            0.087724154321784443054,
            1.0353264046930834409,
        ),
        (
            -10.75,
            -0.23464750093159514468,
            0.20496824118248996844,
            -0.67757043642092759891,
            -0.76467665260005728436,
        ),
        (
            -9.25,
            0.20523980876035542315,
            0.25003139321019702202,
            -0.75504976826789332431,
            0.63108488291357240273,
        ),
        (
            -7.5,
            0.32177571638064787527,
            -0.11246348507649080638,
            0.31880950669855459621,
            0.87780228154576092237,
        ),
        (
            -5.0,
            0.35076100902411431979,
            -0.13836913490160057685,
            0.32719281855444313679,
            0.77841177300189924609,
        ),
        (
            -2.5,
            -0.11232506769296608919,
            -0.43242247184070529303,
            0.67885273426479436337,
            -0.22042015487462958768,
        ),
        (
            -1.0,
            0.5355608832923521188,
            0.10399738949694461189,
            -0.010160567116645209395,
            0.59237562642279235082,
        ),
        (
            0.5,
            0.23169360648083348977,
            0.8542770431031554933,
            -0.22491053266468389314,
            0.54457256414059230183,
        ),
        (
            2.0,
            0.034924130423274379135,
            3.2980949999782147103,
            -0.053090384433653631704,
            4.1006820499328898894,
        ),
        (
            4.5,
            0.00033025032351430898366,
            227.58808183559971846,
            -0.00071786656755750888869,
            469.13507732796639795,
        ),
        (
            6.5,
            2.7958823432049135855e-6,
            22340.607718396998158,
            -7.2319314666017925598e-6,
            56062.495842522860748,
        ),
        (
            8.75,
            5.2401142318917524192e-9,
            10270159.474439297067,
            -1.5646762027577949094e-8,
            30078570.41411533568,
        ),
        (
            9.5,
            5.3302637046174916266e-10,
            96892265.580451092832,
            -1.6566394593740666263e-9,
            296034763.86800503867,
        ),
        (
            12.5,
            2.3968278260780499363e-14,
            1878291935622.0518674,
            -8.5213465646738564453e-14,
            6602648681364.2953906,
        ),
        (
            25.0,
            8.1160268246913866838e-38,
            3.9220307780413817738e+35,
            -4.0660893372432810053e-37,
            1.957073508323330897e+36,
        ),
        (
            60.0,
            2.7831487094969355371e-136,
            7.3825841915430987895e+133,
            -2.1569758112094737872e-135,
            5.7154448983354510182e+134,
        ),
        (
            100.0,
            2.6344821520881844896e-291,
            6.041223996670201399e+288,
            -2.6351403616044099336e-290,
            6.0397127453106029094e+289,
        ),
    ];

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn matches_high_precision_reference() {
        for &(x, ai, bi, aip, bip) in REFERENCE {
            let v = airy(x).unwrap();
            // At large |x| the limit is the f64 ulp of the phase xi.
            let tol = if x.abs() > 500.0 {
                5e-11
            } else if x.abs() > 60.0 {
                1e-12
            } else {
                2e-13
            };
            assert!(rel(v.ai, ai) < tol, "Ai({x}): {} vs {}", v.ai, ai);
            assert!(rel(v.bi, bi) < tol, "Bi({x}): {} vs {}", v.bi, bi);
            assert!(rel(v.ai_prime, aip) < tol, "Ai'({x}): {} vs {}", v.ai_prime, aip);
            assert!(rel(v.bi_prime, bip) < tol, "Bi'({x}): {} vs {}", v.bi_prime, bip);
        }
    }

    #[test]
    fn values_at_zero_match_gamma_closed_forms() {
        // Ai(0) = 1/(3^{2/3} Gamma(2/3)) etc., evaluated with 30-digit Gamma.
        let v = airy(0.0).unwrap();
        assert!((v.ai - 0.3550280538878172392601).abs() < 1e-15);
        assert!((v.bi - 0.6149266274460007351509).abs() < 1e-15);
        assert!((v.ai_prime + 0.2588194037928067984052).abs() < 1e-15);
        assert!((v.bi_prime - 0.4482883573538263579148).abs() < 1e-15);
    }

    #[test]
    fn wronskian_is_reciprocal_pi() {
        let inv_pi = 1.0 / std::f64::consts::PI;
        let mut x = -9999.75;
        while x < 100.0 {
            let v = airy(x).unwrap();
            let w = v.ai * v.bi_prime - v.ai_prime * v.bi;
            assert!(
                (w - inv_pi).abs() < 1e-12,
                "wronskian off at x={x}: {w} vs {inv_pi}"
            );
            x += 73.37;
        }
    }

    #[test]
    fn branch_seams_agree() {
        // Series vs asymptotic on both sides of each switch point.
        for x in [8.5, 8.75, 8.9, 9.0, 9.2] {
            let s = airy_series(x);
            let a = airy_asymptotic_pos(x);
            assert!(rel(s.ai, a.ai) < 1e-12, "Ai seam at {x}");
            assert!(rel(s.bi, a.bi) < 1e-12, "Bi seam at {x}");
            assert!(rel(s.ai_prime, a.ai_prime) < 1e-12);
            assert!(rel(s.bi_prime, a.bi_prime) < 1e-12);
        }
        for x in [-11.6, -11.2, -11.0, -10.8, -10.4] {
            let s = airy_series(x);
            let a = airy_oscillatory(-x).values();
            // Near zeros of Ai/Bi compare against the envelope instead.
            let env = (s.ai * s.ai + s.bi * s.bi).sqrt();
            let env_p = (s.ai_prime * s.ai_prime + s.bi_prime * s.bi_prime).sqrt();
            assert!((s.ai - a.ai).abs() / env < 1e-12, "Ai seam at {x}");
            assert!((s.bi - a.bi).abs() / env < 1e-12, "Bi seam at {x}");
            assert!((s.ai_prime - a.ai_prime).abs() / env_p < 1e-12);
            assert!((s.bi_prime - a.bi_prime).abs() / env_p < 1e-12);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(airy(f64::NAN).is_err());
        assert!(airy(f64::INFINITY).is_err());
        assert!(airy(105.0).is_err());
        assert!(airy(-10001.0).is_err());
    }
}
