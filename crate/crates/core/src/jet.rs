//! Truncated Taylor jets: a function germ at a point stored as coefficients
//! c_k = f^{(k)}(x0)/k!.
//!
//! The boundary and stationary-phase operators need exact high-order
//! derivatives of products and quotients of caller-supplied functions;
//! expanding them through jet arithmetic keeps everything algebraic, so the
//! omega^{-k} remainder fits are not polluted by differencing noise.

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    /// coeffs[k] = f^{(k)}(x0)/k!
    pub coeffs: Vec<f64>,
}

impl Jet {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Jet {
        Jet { coeffs }
    }

    /// Build from derivative values [f, f', f'', ...].
    pub fn from_derivatives(derivs: &[f64]) -> Jet {
        let mut fact = 1.0;
        let coeffs = derivs
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                if k > 0 {
                    fact *= k as f64;
                }
                d / fact
            })
            .collect();
        Jet { coeffs }
    }

    pub fn constant(value: f64, order: usize) -> Jet {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// k-th derivative value at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.coeffs[k] * fact
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let n = self.coeffs.len().min(other.coeffs.len());
        Jet {
            coeffs: (0..n).map(|k| self.coeffs[k] + other.coeffs[k]).collect(),
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let n = self.coeffs.len().min(other.coeffs.len());
        Jet {
            coeffs: (0..n).map(|k| self.coeffs[k] - other.coeffs[k]).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Product truncated to the shorter operand's order.
    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut coeffs = vec![0.0; n];
        for i in 0..n {
            for j in 0..(n - i) {
                coeffs[i + j] += self.coeffs[i] * other.coeffs[j];
            }
        }
        Jet { coeffs }
    }

    /// Full polynomial product (no truncation). Only meaningful when the
    /// caller knows the high coefficients it reads are determined by the
    /// stored ones (e.g. factors vanishing to high order).
    pub fn mul_full(&self, other: &Jet) -> Jet {
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Jet { coeffs }
    }

    /// Reciprocal jet; requires a nonzero value at the expansion point.
    pub fn recip(&self) -> Jet {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        out[0] = 1.0 / self.coeffs[0];
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += self.coeffs[j] * out[k - j];
            }
            out[k] = -acc / self.coeffs[0];
        }
        Jet { coeffs: out }
    }

    /// Jet of the derivative (order drops by one).
    pub fn differentiate(&self) -> Jet {
        Jet {
            coeffs: (1..self.coeffs.len())
                .map(|k| k as f64 * self.coeffs[k])
                .collect(),
        }
    }

    /// Rescale the independent variable: g(t) = f(s t) as a jet in t.
    pub fn stretch(&self, s: f64) -> Jet {
        let mut p = 1.0;
        Jet {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    let v = c * p;
                    p *= s;
                    v
                })
                .collect(),
        }
    }

    /// Coefficient of t^k, zero beyond the stored order.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_against_known_series() {
        // f = 1 + t + t^2/2 (e^t truncated), g = 1 - t
        let f = Jet::from_coeffs(vec![1.0, 1.0, 0.5]);
        let g = Jet::from_coeffs(vec![1.0, -1.0, 0.0]);
        let p = f.mul(&g);
        assert_eq!(p.coeffs, vec![1.0, 0.0, -0.5]);
        let r = g.recip(); // 1/(1-t) = 1 + t + t^2
        assert_eq!(r.coeffs, vec![1.0, 1.0, 1.0]);
        let d = f.differentiate();
        assert_eq!(d.coeffs, vec![1.0, 1.0]);
    }

    #[test]
    fn derivative_round_trip() {
        let derivs = [2.0, -3.0, 4.0, 5.0, -6.0];
        let j = Jet::from_derivatives(&derivs);
        for (k, &d) in derivs.iter().enumerate() {
            assert!((j.derivative(k) - d).abs() < 1e-14);
        }
    }

    #[test]
    fn recip_is_inverse() {
        let f = Jet::from_coeffs(vec![2.0, 0.3, -0.1, 0.07, 0.5]);
        let one = f.mul(&f.recip());
        assert!((one.coeffs[0] - 1.0).abs() < 1e-15);
        for c in &one.coeffs[1..] {
            assert!(c.abs() < 1e-14);
        }
    }

    #[test]
    fn stretch_rescales_derivatives() {
        // f(t) = t^2: under t -> 2t the second coefficient quadruples
        let f = Jet::from_coeffs(vec![0.0, 0.0, 1.0]);
        let g = f.stretch(2.0);
        assert_eq!(g.coeffs, vec![0.0, 0.0, 4.0]);
    }
}
