//! Minimal double-double arithmetic (~32 significant digits).
//!
//! Used where a plain f64 evaluation loses too many digits to cancellation:
//! the Airy Maclaurin series in the mid-range and the compensated summation
//! oracles in tests. Based on the usual error-free transformations
//! (Dekker/Knuth two-sum, FMA two-product).

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b|
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, x: f64) -> Dd {
        self.add(Dd::from(x))
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(Dd {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, x: f64) -> Dd {
        let (p, e) = two_prod(self.hi, x);
        let e = e + self.lo * x;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div_f64(self, x: f64) -> Dd {
        let q1 = self.hi / x;
        let (p, e) = two_prod(q1, x);
        let r = ((self.hi - p) - e + self.lo) / x;
        let (hi, lo) = quick_two_sum(q1, r);
        Dd { hi, lo }
    }

    #[inline]
    pub fn abs(self) -> f64 {
        self.value().abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_is_exact() {
        // (1 + 1e-20) - 1 vanishes in f64 but survives in double-double.
        let x = Dd::ONE.add(Dd { hi: 1e-20, lo: 0.0 });
        let d = x.sub(Dd::ONE);
        assert_eq!(d.value(), 1e-20);
    }

    #[test]
    fn product_carries_low_bits() {
        let a = Dd::from(1.0 + 2f64.powi(-30));
        let b = a.mul(a);
        let err = b.sub(Dd::from(1.0 + 2f64.powi(-29))).value() - 2f64.powi(-60);
        assert!(err.abs() < 1e-32);
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = Dd::from(std::f64::consts::PI);
        let b = a.mul_f64(7.25).div_f64(7.25);
        assert!((b.hi - a.hi).abs() < 1e-16 && (b.value() - a.value()).abs() < 1e-30);
    }
}
