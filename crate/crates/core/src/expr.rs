//! Affine expressions in external rate symbols.
//!
//! Entropies of symbolic (message / bit-pipe) factors are not numbers: they
//! carry the factor's rate symbol. Every information quantity computed by this
//! crate is therefore an affine expression `constant + sum_m q_m * R_m` with a
//! real constant part (bits) and exact rational coefficients on the symbols.

use num_rational::Ratio;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct AffineRateExpr {
    pub constant: f64,
    /// rate symbol -> coefficient; zero coefficients are never stored
    pub coeffs: BTreeMap<String, Rational>,
}

impl AffineRateExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        AffineRateExpr {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn symbol(name: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), Rational::from_integer(1));
        AffineRateExpr {
            constant: 0.0,
            coeffs,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_symbol(&mut self, name: &str, coeff: Rational) {
        if coeff == Rational::from_integer(0) {
            return;
        }
        let entry = self
            .coeffs
            .entry(name.to_string())
            .or_insert_with(|| Rational::from_integer(0));
        *entry += coeff;
        if *entry == Rational::from_integer(0) {
            self.coeffs.remove(name);
        }
    }

    pub fn add(&self, other: &AffineRateExpr) -> AffineRateExpr {
        let mut out = self.clone();
        out.constant += other.constant;
        for (name, c) in &other.coeffs {
            out.add_symbol(name, *c);
        }
        out
    }

    pub fn sub(&self, other: &AffineRateExpr) -> AffineRateExpr {
        self.add(&other.scale(Rational::from_integer(-1)))
    }

    pub fn scale(&self, q: Rational) -> AffineRateExpr {
        if q == Rational::from_integer(0) {
            return AffineRateExpr::zero();
        }
        let mut out = AffineRateExpr::constant(self.constant * rational_to_f64(q));
        for (name, c) in &self.coeffs {
            out.add_symbol(name, *c * q);
        }
        out
    }

    /// Numeric value under an assignment of the rate symbols.
    /// Unassigned symbols evaluate as zero.
    pub fn eval(&self, assignment: &BTreeMap<String, f64>) -> f64 {
        let mut v = self.constant;
        for (name, c) in &self.coeffs {
            v += rational_to_f64(*c) * assignment.get(name).copied().unwrap_or(0.0);
        }
        v
    }

    pub fn approx_eq(&self, other: &AffineRateExpr, tol: f64) -> bool {
        (self.constant - other.constant).abs() <= tol && self.coeffs == other.coeffs
    }
}

pub fn rational_to_f64(q: Rational) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

impl fmt::Display for AffineRateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if self.constant.abs() > 1e-12 || self.coeffs.is_empty() {
            write!(f, "{:.6}", self.constant)?;
            first = false;
        }
        for (name, c) in &self.coeffs {
            let cf = rational_to_f64(*c);
            if cf < 0.0 {
                write!(f, " - ")?;
            } else if !first {
                write!(f, " + ")?;
            }
            first = false;
            let a = c.abs();
            if a == Rational::from_integer(1) {
                write!(f, "{name}")?;
            } else if *a.denom() == 1 {
                write!(f, "{}*{name}", a.numer())?;
            } else {
                write!(f, "({}/{})*{name}", a.numer(), a.denom())?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_and_cancel() {
        let a = AffineRateExpr::symbol("R1");
        let b = a.scale(Rational::from_integer(-1));
        let sum = a.add(&b);
        assert!(sum.is_constant());
        assert_eq!(sum.constant, 0.0);
    }

    #[test]
    fn eval_with_assignment() {
        let mut e = AffineRateExpr::constant(0.5);
        e.add_symbol("R", Rational::new(3, 2));
        let mut asg = BTreeMap::new();
        asg.insert("R".to_string(), 2.0);
        assert!((e.eval(&asg) - 3.5).abs() < 1e-12);
    }

    #[test]
    fn display_readable() {
        let mut e = AffineRateExpr::zero();
        e.add_symbol("R1", Rational::from_integer(1));
        e.add_symbol("R2", Rational::from_integer(1));
        assert_eq!(format!("{e}"), "R1 + R2");
    }
}
