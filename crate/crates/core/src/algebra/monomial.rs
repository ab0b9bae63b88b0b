//! Monomials in `T = e^t` and the per-edge coefficients they induce.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::EdgeElement;
use crate::polygon::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Powers `T^k` of `T = e^{t_x + i t_y}`.
    ComplexPower,
    /// Products `T_x^{k_x} T_y^{k_y}` of `T_x = e^{t_x}`, `T_y = e^{t_y}`.
    RealMultiIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Evaluate at the edge midpoint.
    Point,
    /// Integrate along the edge with respect to arc length.
    PathIntegral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Monomial {
    Complex(u32),
    Real(u32, u32),
}

impl Monomial {
    pub fn complex(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition(
                "complex-power degree must be at least 1".into(),
            ));
        }
        Ok(Monomial::Complex(k))
    }

    pub fn real(kx: u32, ky: u32) -> Result<Self> {
        if kx + ky == 0 {
            return Err(Error::Precondition(
                "multi-index must have positive total degree".into(),
            ));
        }
        Ok(Monomial::Real(kx, ky))
    }

    pub fn family(&self) -> Family {
        match self {
            Monomial::Complex(_) => Family::ComplexPower,
            Monomial::Real(..) => Family::RealMultiIndex,
        }
    }

    pub fn total_degree(&self) -> u32 {
        match *self {
            Monomial::Complex(k) => k,
            Monomial::Real(kx, ky) => kx + ky,
        }
    }

    /// The exponent `k · p`, so that the monomial at `T = e^p` is `exp(k · p)`.
    pub fn exponent(&self, p: &Vec2) -> Complex64 {
        match *self {
            Monomial::Complex(k) => Complex64::new(p.x, p.y) * f64::from(k),
            Monomial::Real(kx, ky) => {
                Complex64::new(f64::from(kx) * p.x + f64::from(ky) * p.y, 0.0)
            }
        }
    }

    /// Value at `T = e^t`.
    pub fn eval(&self, t: &Vec2) -> Complex64 {
        self.exponent(t).exp()
    }

    /// All monomials of total degree `1..=k`, by degree; within a degree the
    /// real family lists `T_x^{d}, T_x^{d−1}T_y, …, T_y^{d}`.
    pub fn up_to(family: Family, k: u32) -> Vec<Monomial> {
        match family {
            Family::ComplexPower => (1..=k).map(Monomial::Complex).collect(),
            Family::RealMultiIndex => (1..=k)
                .flat_map(|d| (0..=d).rev().map(move |kx| Monomial::Real(kx, d - kx)))
                .collect(),
        }
    }
}

/// `(e^w − 1) / w`, equal to 1 at `w = 0`.
pub fn exprel(w: Complex64) -> Complex64 {
    if w.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 2..40 {
            term = term * w / n as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (w.exp() - 1.0) / w
    }
}

/// Coefficient of one edge: `exp(k · b)` at the midpoint, or the arc-length
/// integral of `exp(k · z)` along the segment.
pub fn edge_coefficient(edge: &EdgeElement, monomial: &Monomial, mode: Mode) -> Complex64 {
    match mode {
        Mode::Point => monomial.eval(&edge.offset),
        Mode::PathIntegral => {
            let a = edge.endpoints[0];
            let d = edge.endpoints[1] - a;
            monomial.eval(&a) * exprel(monomial.exponent(&d)) * d.norm()
        }
    }
}
