use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rational encoding of the field strength, asserting `F = pi^2 q / (3 p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalField {
    pub p: u64,
    pub q: u64,
}

impl RationalField {
    pub fn field_strength(&self) -> f64 {
        PI * PI * self.q as f64 / (3.0 * self.p as f64)
    }
}

/// Model parameters: field strength F > 0, energy E, coupling strength lambda,
/// and an optional exact rational encoding of F.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub field_strength: f64,
    pub energy: f64,
    pub coupling: f64,
    pub rational: Option<RationalField>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl ModelParams {
    pub fn new(field_strength: f64, energy: f64, coupling: f64) -> Result<Self> {
        if !(field_strength > 0.0) || !field_strength.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "field strength must be positive and finite, got {field_strength}"
            )));
        }
        if !energy.is_finite() || !coupling.is_finite() {
            return Err(Error::InvalidParameter(
                "energy and coupling must be finite".into(),
            ));
        }
        Ok(Self {
            field_strength,
            energy,
            coupling,
            rational: None,
        })
    }

    /// Construct from the rational encoding; F is derived exactly as `pi^2 q / (3 p)`.
    pub fn from_rational(p: u64, q: u64, energy: f64, coupling: f64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidParameter(
                "rational encoding requires positive integers p, q".into(),
            ));
        }
        if gcd(p, q) != 1 {
            return Err(Error::InvalidParameter(format!(
                "rational encoding requires gcd(p, q) = 1, got ({p}, {q})"
            )));
        }
        let rational = RationalField { p, q };
        let mut params = Self::new(rational.field_strength(), energy, coupling)?;
        params.rational = Some(rational);
        Ok(params)
    }

    /// Attach a rational encoding to an existing parameter set, checking consistency.
    pub fn with_rational(mut self, p: u64, q: u64) -> Result<Self> {
        if p == 0 || q == 0 || gcd(p, q) != 1 {
            return Err(Error::InvalidParameter(format!(
                "invalid rational encoding ({p}, {q})"
            )));
        }
        let rational = RationalField { p, q };
        let f = rational.field_strength();
        if (self.field_strength - f).abs() > 1e-12 * self.field_strength {
            return Err(Error::InvalidParameter(format!(
                "field strength {} does not match pi^2*{q}/(3*{p}) = {f}",
                self.field_strength
            )));
        }
        // Snap to the exact value so downstream arithmetic sees the rational F.
        self.field_strength = f;
        self.rational = Some(rational);
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_field() {
        assert!(ModelParams::new(0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(-1.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn rational_encoding_round_trip() {
        let params = ModelParams::from_rational(1, 1, 0.3, 1.0).unwrap();
        assert!((params.field_strength - PI * PI / 3.0).abs() < 1e-15);
        assert!(ModelParams::from_rational(2, 4, 0.0, 1.0).is_err());

        let p = ModelParams::new(PI * PI / 3.0, 0.0, 1.0).unwrap();
        assert!(p.with_rational(1, 1).is_ok());
        let p = ModelParams::new(3.2899, 0.0, 1.0).unwrap();
        assert!(p.with_rational(1, 1).is_err());
    }
}
