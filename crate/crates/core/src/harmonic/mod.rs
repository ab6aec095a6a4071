//! Points of the harmonic model on finite windows and the covering maps
//! `xi_g(v) = rho((g* . w) . v)` from integer fields to the torus.

mod checks;
mod witness;
mod xi;

use std::fmt::Write;

use thiserror::Error;

use crate::laurent::LaurentError;
use crate::sandpile::{HeightConfig, SandpileError};
use crate::scalar::Real;
use crate::window::BoxWindow;

pub use checks::{
    addition_operator_demo, additivity_check, equivariance_residual, group_sum_representative,
    harmonicity_residual, injectivity_check, intertwining_residual, kernel_check, separation_check, AdditionDemo,
    AdditivityReport, Comparison, KernelReport, SeparationReport,
};
pub use witness::{kernel_witness, PeriodicProfile, WitnessKind};
pub use xi::{xi_apply, xi_tuple, XiSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmonicError {
    #[error("green table: {0}")]
    Green(String),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Sandpile(#[from] SandpileError),
    #[error("multiplier is not summable (fitted exponent {0:?})")]
    NotSummable(Option<f64>),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("windows do not overlap")]
    EmptyOverlap,
}

/// Torus distance to the nearest integer.
pub fn torus_dist<T: Real>(t: T) -> T {
    (t - t.round()).abs()
}

/// Reduction to `[0, 1)`.
pub fn torus_reduce<T: Real>(t: T) -> T {
    let r = t - t.floor();
    if r >= T::one() {
        T::zero()
    } else {
        r
    }
}

/// How an integer field continues outside its window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    Zero,
    Constant(i64),
    /// Periodic with the window extents as periods.
    Periodic,
}

/// A bounded integer field on `Z^d`: explicit values on a window, extended
/// outside it by a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerField {
    pub window: BoxWindow,
    pub values: Vec<i64>,
    pub extension: Extension,
}

impl IntegerField {
    pub fn new(window: BoxWindow, values: Vec<i64>, extension: Extension) -> Result<Self, HarmonicError> {
        if values.len() != window.len() {
            return Err(HarmonicError::Mismatch(format!("{} values for {} sites", values.len(), window.len())));
        }
        Ok(IntegerField { window, values, extension })
    }

    /// The constant field `m`.
    pub fn constant(dim: usize, m: i64) -> Self {
        IntegerField { window: BoxWindow::centered(dim, 0), values: vec![m], extension: Extension::Constant(m) }
    }

    pub fn from_config(v: &HeightConfig, extension: Extension) -> Self {
        IntegerField { window: v.window().clone(), values: v.heights().to_vec(), extension }
    }

    /// Extension by `gamma - 1`, which keeps a recurrent window recurrent.
    pub fn from_recurrent(v: &HeightConfig) -> Self {
        Self::from_config(v, Extension::Constant(v.gamma() - 1))
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// Value outside the window for non-periodic rules.
    pub fn background(&self) -> Option<i64> {
        match self.extension {
            Extension::Zero => Some(0),
            Extension::Constant(c) => Some(c),
            Extension::Periodic => None,
        }
    }

    pub fn get(&self, n: &[i64]) -> i64 {
        if let Some(i) = self.window.index_of(n) {
            return self.values[i];
        }
        match self.extension {
            Extension::Zero => 0,
            Extension::Constant(c) => c,
            Extension::Periodic => {
                let m: Vec<i64> = n
                    .iter()
                    .zip(self.window.lo())
                    .zip(self.window.size())
                    .map(|((x, l), &s)| l + (x - l).rem_euclid(s as i64))
                    .collect();
                self.values[self.window.index_of(&m).unwrap()]
            }
        }
    }

    pub fn sup_norm(&self) -> i64 {
        let inside = self.values.iter().map(|v| v.abs()).max().unwrap_or(0);
        inside.max(self.background().unwrap_or(0).abs())
    }

    /// Pointwise sum; both fields must use non-periodic rules.
    pub fn add(&self, other: &Self) -> Result<Self, HarmonicError> {
        let (Some(a), Some(b)) = (self.background(), other.background()) else {
            return Err(HarmonicError::Mismatch("sum of periodic fields".into()));
        };
        let lo: Vec<i64> = self.window.lo().iter().zip(other.window.lo()).map(|(x, y)| (*x).min(*y)).collect();
        let hi: Vec<i64> = self.window.hi().into_iter().zip(other.window.hi()).map(|(x, y)| x.max(y)).collect();
        let size = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
        let window = BoxWindow::new(lo, size).map_err(|e| HarmonicError::Mismatch(e.to_string()))?;
        let values = window.sites().map(|n| self.get(&n) + other.get(&n)).collect();
        Ok(IntegerField { window, values, extension: Extension::Constant(a + b) })
    }

    /// `(sigma^m v)_n = v_{n+m}`.
    pub fn shifted(&self, m: &[i64]) -> Self {
        let neg: Vec<i64> = m.iter().map(|x| -x).collect();
        IntegerField { window: self.window.translate(&neg), values: self.values.clone(), extension: self.extension }
    }
}

/// Torus-valued field on a window with a per-site error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint<T: Real> {
    pub window: BoxWindow,
    /// Values in `[0, 1)`.
    pub values: Vec<T>,
    pub err: Vec<T>,
}

impl<T: Real> TorusPoint<T> {
    pub fn zeros(window: BoxWindow) -> Self {
        let n = window.len();
        TorusPoint { window, values: vec![T::zero(); n], err: vec![T::zero(); n] }
    }

    pub fn get(&self, n: &[i64]) -> Option<T> {
        self.window.index_of(n).map(|i| self.values[i])
    }

    pub fn max_err(&self) -> T {
        self.err.iter().fold(T::zero(), |a, &b| a.max(b))
    }

    /// Largest torus distance to 0.
    pub fn max_dist_to_zero(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &b| a.max(torus_dist(b)))
    }

    /// Pointwise sum mod 1 on the common window.
    pub fn add(&self, other: &Self) -> Result<Self, HarmonicError> {
        let w = self.window.intersect(&other.window).ok_or(HarmonicError::EmptyOverlap)?;
        let mut out = TorusPoint::zeros(w.clone());
        for (i, n) in w.sites().enumerate() {
            let a = self.window.index_of(&n).unwrap();
            let b = other.window.index_of(&n).unwrap();
            out.values[i] = torus_reduce(self.values[a] + other.values[b]);
            out.err[i] = self.err[a] + other.err[b];
        }
        Ok(out)
    }

    /// `max_n dist_T(x_n, y_n)` and `max_n (err_x + err_y)` on the common window.
    pub fn distance(&self, other: &Self) -> Result<(T, T), HarmonicError> {
        let w = self.window.intersect(&other.window).ok_or(HarmonicError::EmptyOverlap)?;
        let mut dist = T::zero();
        let mut err = T::zero();
        for n in w.sites() {
            let a = self.window.index_of(&n).unwrap();
            let b = other.window.index_of(&n).unwrap();
            dist = dist.max(torus_dist(self.values[a] - other.values[b]));
            err = err.max(self.err[a] + other.err[b]);
        }
        Ok((dist, err))
    }

    /// CSV rows `n_1,...,n_d,value,err`.
    pub fn to_csv(&self) -> String {
        let d = self.window.dim();
        let cols: Vec<String> = (1..=d).map(|i| format!("n{i}")).collect();
        let mut out = format!("{},value,err\n", cols.join(","));
        for ((n, v), e) in self.window.sites().zip(&self.values).zip(&self.err) {
            for x in &n {
                let _ = write!(out, "{x},");
            }
            let _ = writeln!(out, "{:e},{:e}", v.to_f64_lossy(), e.to_f64_lossy());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_helpers() {
        assert_eq!(torus_dist(0.9f64), 0.09999999999999998);
        assert_eq!(torus_dist(-0.25f64), 0.25);
        assert_eq!(torus_reduce(-0.25f64), 0.75);
        assert_eq!(torus_reduce(3.0f64), 0.0);
    }

    #[test]
    fn field_extension_rules() {
        let w = BoxWindow::new(vec![0], vec![3]).unwrap();
        let f = IntegerField::new(w.clone(), vec![1, 2, 3], Extension::Periodic).unwrap();
        assert_eq!(f.get(&[4]), 2);
        assert_eq!(f.get(&[-1]), 3);
        let g = IntegerField::new(w, vec![1, 2, 3], Extension::Constant(-5)).unwrap();
        assert_eq!(g.get(&[7]), -5);
        assert_eq!(g.sup_norm(), 5);
        let s = g.add(&IntegerField::constant(1, 1)).unwrap();
        assert_eq!(s.get(&[1]), 3);
        assert_eq!(s.get(&[9]), -4);
        assert_eq!(g.shifted(&[1]).get(&[-1]), 1);
    }
}
