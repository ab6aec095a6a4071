//! Abelian sandpiles on finite rectangles with open boundary.
//!
//! A site topples when its height reaches `gamma`: it loses `gamma` grains and
//! each of its `2d` lattice neighbours inside the window gains one. Grains sent
//! outside the window, and the `gamma - 2d` grains dissipated per toppling, are
//! lost.

mod burn;
mod correct;
mod count;
mod group;
mod io;
mod topple;
mod witness;

use std::fmt;

use thiserror::Error;

use crate::window::{BoxWindow, WindowError};

pub use burn::{burning_test, has_forbidden_subconfiguration, is_recurrent, BurnReport};
pub use correct::{correct_to_recurrent, enumerate_corrections, verify_correction, Correction, CorrectionReport};
pub use count::{
    count_recurrent, finite_entropy_estimate, log_det_dense, log_det_rectangle, toppling_det_exact, CountBackend,
    CountResult,
};
pub use group::{group_add, group_add_with_odometer, identity_element, random_recurrent};
pub use io::{odometer_csv, parse_grid, write_grid};
pub use topple::{stabilize, stabilize_random_order, topple_at, Odometer};
pub use witness::{max_norm_components, sparse_zero_witness, witness_conditions, WitnessReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SandpileError {
    #[error("need d >= 1 and gamma >= 2d, got d={dim}, gamma={gamma}")]
    InvalidModel { dim: usize, gamma: i64 },
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error("expected {expected} heights, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("site {0:?} lies outside the window")]
    SiteOutside(Vec<i64>),
    #[error("site {site:?} has height {height} < gamma and cannot topple")]
    NotUnstable { site: Vec<i64>, height: i64 },
    #[error("configuration is not stable (height {height} at {site:?})")]
    Unstable { site: Vec<i64>, height: i64 },
    #[error("configuration is not recurrent")]
    NotRecurrent,
    #[error("configurations live on different windows or models")]
    Incompatible,
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("window must contain {0}")]
    WindowTooSmall(String),
    #[error("grid format error on line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("iteration limit reached in {0}")]
    IterationLimit(&'static str),
}

pub(crate) fn check_model(dim: usize, gamma: i64) -> Result<(), SandpileError> {
    if dim == 0 || gamma < 2 * dim as i64 {
        return Err(SandpileError::InvalidModel { dim, gamma });
    }
    Ok(())
}

/// Integer heights on a rectangle `E`, for the model with parameter `gamma`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HeightConfig {
    window: BoxWindow,
    gamma: i64,
    heights: Vec<i64>,
}

impl HeightConfig {
    pub fn new(window: BoxWindow, gamma: i64, heights: Vec<i64>) -> Result<Self, SandpileError> {
        check_model(window.dim(), gamma)?;
        if heights.len() != window.len() {
            return Err(SandpileError::LengthMismatch { expected: window.len(), got: heights.len() });
        }
        Ok(HeightConfig { window, gamma, heights })
    }

    pub fn constant(window: BoxWindow, gamma: i64, value: i64) -> Result<Self, SandpileError> {
        let n = window.len();
        Self::new(window, gamma, vec![value; n])
    }

    pub fn zeros(window: BoxWindow, gamma: i64) -> Result<Self, SandpileError> {
        Self::constant(window, gamma, 0)
    }

    /// The all-`(gamma-1)` configuration.
    pub fn max_stable(window: BoxWindow, gamma: i64) -> Result<Self, SandpileError> {
        Self::constant(window, gamma, gamma - 1)
    }

    /// `delta^(n)`: one grain at `site`, zero elsewhere.
    pub fn delta(window: BoxWindow, gamma: i64, site: &[i64]) -> Result<Self, SandpileError> {
        let mut v = Self::zeros(window, gamma)?;
        v.set(site, 1)?;
        Ok(v)
    }

    pub fn from_fn(window: BoxWindow, gamma: i64, f: impl Fn(&[i64]) -> i64) -> Result<Self, SandpileError> {
        let heights = window.sites().map(|n| f(&n)).collect();
        Self::new(window, gamma, heights)
    }

    pub fn window(&self) -> &BoxWindow {
        &self.window
    }

    pub fn gamma(&self) -> i64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn heights(&self) -> &[i64] {
        &self.heights
    }

    pub fn heights_mut(&mut self) -> &mut [i64] {
        &mut self.heights
    }

    pub fn get(&self, site: &[i64]) -> Option<i64> {
        self.window.index_of(site).map(|i| self.heights[i])
    }

    pub fn set(&mut self, site: &[i64], value: i64) -> Result<(), SandpileError> {
        let i = self.window.index_of(site).ok_or_else(|| SandpileError::SiteOutside(site.to_vec()))?;
        self.heights[i] = value;
        Ok(())
    }

    pub fn is_critical(&self) -> bool {
        self.gamma == 2 * self.dim() as i64
    }

    /// `0 <= v_n <= gamma - 1` everywhere.
    pub fn is_stable(&self) -> bool {
        self.heights.iter().all(|&h| (0..self.gamma).contains(&h))
    }

    pub(crate) fn check_stable(&self) -> Result<(), SandpileError> {
        match self.heights.iter().position(|&h| !(0..self.gamma).contains(&h)) {
            None => Ok(()),
            Some(i) => Err(SandpileError::Unstable { site: self.window.site(i), height: self.heights[i] }),
        }
    }

    pub fn total(&self) -> i64 {
        self.heights.iter().sum()
    }

    pub fn sup_norm(&self) -> i64 {
        self.heights.iter().map(|h| h.abs()).max().unwrap_or(0)
    }

    fn check_compatible(&self, other: &Self) -> Result<(), SandpileError> {
        if self.window != other.window || self.gamma != other.gamma {
            return Err(SandpileError::Incompatible);
        }
        Ok(())
    }

    /// Site-wise sum (no stabilization).
    pub fn add(&self, other: &Self) -> Result<Self, SandpileError> {
        self.check_compatible(other)?;
        let heights = self.heights.iter().zip(&other.heights).map(|(a, b)| a + b).collect();
        Ok(HeightConfig { window: self.window.clone(), gamma: self.gamma, heights })
    }

    /// Site-wise difference (no stabilization).
    pub fn sub(&self, other: &Self) -> Result<Self, SandpileError> {
        self.check_compatible(other)?;
        let heights = self.heights.iter().zip(&other.heights).map(|(a, b)| a - b).collect();
        Ok(HeightConfig { window: self.window.clone(), gamma: self.gamma, heights })
    }

    /// Restriction to a sub-window.
    pub fn restrict(&self, to: &BoxWindow) -> Result<Self, SandpileError> {
        if !self.window.contains_window(to) {
            return Err(SandpileError::WindowTooSmall(format!("{to:?}")));
        }
        Self::from_fn(to.clone(), self.gamma, |n| self.get(n).unwrap())
    }

    /// The shift `(sigma^m v)_n = v_{n+m}`, carried on the translated window.
    pub fn shifted(&self, m: &[i64]) -> Self {
        let neg: Vec<i64> = m.iter().map(|x| -x).collect();
        HeightConfig { window: self.window.translate(&neg), gamma: self.gamma, heights: self.heights.clone() }
    }

    /// Flat indices of the in-window lattice neighbours of flat index `i`.
    pub(crate) fn neighbours(window: &BoxWindow, strides: &[usize], i: usize, out: &mut Vec<usize>) {
        out.clear();
        for (axis, &stride) in strides.iter().enumerate() {
            let c = (i / stride) % window.size()[axis];
            if c > 0 {
                out.push(i - stride);
            }
            if c + 1 < window.size()[axis] {
                out.push(i + stride);
            }
        }
    }
}

impl fmt::Display for HeightConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_grid(self))
    }
}

/// `|E cap {n +- e_i}|` for `n` in `E`.
pub fn neighbour_count(window: &BoxWindow, site: &[i64]) -> Result<usize, SandpileError> {
    if !window.contains(site) {
        return Err(SandpileError::SiteOutside(site.to_vec()));
    }
    Ok(window.neighbour_count(site)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbour_count_examples() {
        let w = BoxWindow::with_extents(vec![3, 4]).unwrap();
        assert_eq!(neighbour_count(&w, &[0, 0]).unwrap(), 4);
        assert_eq!(neighbour_count(&w, &[-1, -2]).unwrap(), 2);
        assert!(neighbour_count(&w, &[5, 0]).is_err());
        assert_eq!(neighbour_count(&BoxWindow::centered(2, 0), &[0, 0]).unwrap(), 0);
    }

    #[test]
    fn construction_checks() {
        let w = BoxWindow::centered(2, 1);
        assert!(HeightConfig::zeros(w.clone(), 3).is_err());
        assert!(HeightConfig::new(w.clone(), 4, vec![0; 8]).is_err());
        let v = HeightConfig::delta(w.clone(), 4, &[1, 0]).unwrap();
        assert_eq!(v.total(), 1);
        assert_eq!(v.get(&[1, 0]), Some(1));
        assert!(HeightConfig::max_stable(w, 4).unwrap().is_stable());
    }

    #[test]
    fn shift_moves_values() {
        let w = BoxWindow::centered(2, 2);
        let v = HeightConfig::delta(w, 4, &[1, 1]).unwrap();
        let s = v.shifted(&[1, 0]);
        // (sigma^m v)_n = v_{n+m}: the grain now sits at (0, 1)
        assert_eq!(s.get(&[0, 1]), Some(1));
        assert_eq!(s.total(), 1);
    }
}
