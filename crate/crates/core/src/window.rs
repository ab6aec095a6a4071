//! Finite rectangular windows in `Z^d`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WindowError {
    #[error("window must have dimension >= 1")]
    ZeroDimension,
    #[error("window extent along axis {axis} is zero")]
    EmptyAxis { axis: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A rectangle `lo_i <= n_i < lo_i + size_i` in `Z^d`.
///
/// Sites are stored in row-major order: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxWindow {
    lo: Vec<i64>,
    size: Vec<usize>,
}

impl BoxWindow {
    pub fn new(lo: Vec<i64>, size: Vec<usize>) -> Result<Self, WindowError> {
        if lo.is_empty() {
            return Err(WindowError::ZeroDimension);
        }
        if lo.len() != size.len() {
            return Err(WindowError::DimensionMismatch { expected: lo.len(), got: size.len() });
        }
        if let Some(axis) = size.iter().position(|&s| s == 0) {
            return Err(WindowError::EmptyAxis { axis });
        }
        Ok(BoxWindow { lo, size })
    }

    /// The centered cube `Q_M = {-M, ..., M}^d`.
    pub fn centered(dim: usize, radius: usize) -> Self {
        assert!(dim >= 1);
        BoxWindow { lo: vec![-(radius as i64); dim], size: vec![2 * radius + 1; dim] }
    }

    /// A window with the given extents whose origin is placed at
    /// `-floor(size_i / 2)` along every axis (odd extents are centered).
    pub fn with_extents(size: Vec<usize>) -> Result<Self, WindowError> {
        let lo = size.iter().map(|&s| -((s / 2) as i64)).collect();
        Self::new(lo, size)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn size(&self) -> &[usize] {
        &self.size
    }

    /// Inclusive upper corner.
    pub fn hi(&self) -> Vec<i64> {
        self.lo.iter().zip(&self.size).map(|(&l, &s)| l + s as i64 - 1).collect()
    }

    pub fn len(&self) -> usize {
        self.size.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: &[i64]) -> bool {
        site.len() == self.dim()
            && site
                .iter()
                .zip(self.lo.iter().zip(&self.size))
                .all(|(&x, (&l, &s))| x >= l && x < l + s as i64)
    }

    /// Row-major index of `site`, if it lies in the window.
    pub fn index_of(&self, site: &[i64]) -> Option<usize> {
        if !self.contains(site) {
            return None;
        }
        let mut idx = 0usize;
        for ((&x, &l), &s) in site.iter().zip(&self.lo).zip(&self.size) {
            idx = idx * s + (x - l) as usize;
        }
        Some(idx)
    }

    pub fn site(&self, mut idx: usize) -> Vec<i64> {
        let mut site = vec![0i64; self.dim()];
        for axis in (0..self.dim()).rev() {
            let s = self.size[axis];
            site[axis] = self.lo[axis] + (idx % s) as i64;
            idx /= s;
        }
        site
    }

    pub fn sites(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(move |i| self.site(i))
    }

    /// Flat-index strides (last axis has stride 1).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.dim()];
        for axis in (0..self.dim().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * self.size[axis + 1];
        }
        strides
    }

    /// Grow (or shrink, for negative `by`) the window by `by` sites on every side.
    pub fn expand(&self, by: i64) -> Option<Self> {
        let lo: Vec<i64> = self.lo.iter().map(|&l| l - by).collect();
        let mut size = Vec::with_capacity(self.dim());
        for &s in &self.size {
            let t = s as i64 + 2 * by;
            if t <= 0 {
                return None;
            }
            size.push(t as usize);
        }
        Some(BoxWindow { lo, size })
    }

    pub fn translate(&self, by: &[i64]) -> Self {
        BoxWindow { lo: self.lo.iter().zip(by).map(|(&l, &b)| l + b).collect(), size: self.size.clone() }
    }

    pub fn intersect(&self, other: &BoxWindow) -> Option<Self> {
        if self.dim() != other.dim() {
            return None;
        }
        let (a_hi, b_hi) = (self.hi(), other.hi());
        let mut lo = Vec::with_capacity(self.dim());
        let mut size = Vec::with_capacity(self.dim());
        for axis in 0..self.dim() {
            let l = self.lo[axis].max(other.lo[axis]);
            let h = a_hi[axis].min(b_hi[axis]);
            if h < l {
                return None;
            }
            lo.push(l);
            size.push((h - l + 1) as usize);
        }
        Some(BoxWindow { lo, size })
    }

    pub fn contains_window(&self, other: &BoxWindow) -> bool {
        self.dim() == other.dim() && self.contains(other.lo()) && self.contains(&other.hi())
    }

    /// Minkowski sum of two rectangles.
    pub fn minkowski_sum(&self, other: &BoxWindow) -> Self {
        let lo = self.lo.iter().zip(&other.lo).map(|(a, b)| a + b).collect();
        let size = self.size.iter().zip(&other.size).map(|(a, b)| a + b - 1).collect();
        BoxWindow { lo, size }
    }

    /// Number of sites of `site`'s 2d lattice neighbours that lie in the window.
    pub fn neighbour_count(&self, site: &[i64]) -> Result<usize, WindowError> {
        if site.len() != self.dim() {
            return Err(WindowError::DimensionMismatch { expected: self.dim(), got: site.len() });
        }
        let mut probe = site.to_vec();
        let mut count = 0;
        for axis in 0..self.dim() {
            for step in [-1i64, 1] {
                probe[axis] = site[axis] + step;
                if self.contains(&probe) {
                    count += 1;
                }
            }
            probe[axis] = site[axis];
        }
        Ok(count)
    }
}

/// Maximum norm `max_i |n_i|`.
pub fn max_norm(site: &[i64]) -> i64 {
    site.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// Sites of `Z^d` with `max_norm == r`.
pub fn shell_size(dim: usize, r: usize) -> usize {
    if r == 0 {
        1
    } else {
        (2 * r + 1).pow(dim as u32) - (2 * r - 1).pow(dim as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip_and_order() {
        let w = BoxWindow::new(vec![-1, 2], vec![3, 4]).unwrap();
        assert_eq!(w.len(), 12);
        for i in 0..w.len() {
            assert_eq!(w.index_of(&w.site(i)), Some(i));
        }
        assert_eq!(w.site(1), vec![-1, 3]);
        assert_eq!(w.strides(), vec![4, 1]);
        assert!(!w.contains(&[2, 2]));
    }

    #[test]
    fn neighbour_counts() {
        let w = BoxWindow::centered(2, 1);
        assert_eq!(w.neighbour_count(&[0, 0]).unwrap(), 4);
        assert_eq!(w.neighbour_count(&[1, 1]).unwrap(), 2);
        let single = BoxWindow::centered(3, 0);
        assert_eq!(single.neighbour_count(&[0, 0, 0]).unwrap(), 0);
    }

    #[test]
    fn window_algebra() {
        let a = BoxWindow::centered(2, 2);
        let b = a.translate(&[3, 0]);
        let c = a.intersect(&b).unwrap();
        assert_eq!(c.lo(), &[1, -2]);
        assert_eq!(c.size(), &[2, 5]);
        assert!(a.intersect(&a.translate(&[9, 9])).is_none());
        assert_eq!(a.minkowski_sum(&BoxWindow::centered(2, 1)), BoxWindow::centered(2, 3));
        assert_eq!(a.expand(-2).unwrap(), BoxWindow::centered(2, 0));
        assert!(a.expand(-3).is_none());
        assert_eq!(shell_size(2, 3), 24);
    }
}
