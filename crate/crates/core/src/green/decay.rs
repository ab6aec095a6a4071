//! Shell statistics and power-law decay fits for arrays on centered boxes.

use serde::Serialize;

use super::GreenError;
use crate::scalar::Real;
use crate::window::{max_norm, BoxWindow};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProfile {
    pub dim: usize,
    pub radius: usize,
    /// `max_{|n|_max = r} |v_n|` for `r = 0..=radius`.
    pub shell_max: Vec<f64>,
    /// `sum_{|n|_max = r} |v_n|`.
    pub shell_l1: Vec<f64>,
    /// Least-squares slope of `log shell_max` against `log r` over the fit range.
    pub exponent: Option<f64>,
    /// The same slope for `log shell_l1`.
    pub l1_exponent: Option<f64>,
    /// Shells used by the fit, inclusive.
    pub fit_range: (usize, usize),
    /// Shells at or below this magnitude are treated as zero.
    pub noise_floor: f64,
}

impl DecayProfile {
    /// True when fewer than two shells in the fit range rise above the noise floor.
    pub fn is_degenerate(&self) -> bool {
        self.exponent.is_none()
    }

    /// Envelope `|v_n| <= c |n|^q` with `q = exponent + margin`, where `c` is the
    /// largest ratio observed on the fit range. `None` for degenerate fits.
    pub fn envelope(&self, margin: f64) -> Option<(f64, f64)> {
        let q = self.exponent? + margin;
        let (lo, hi) = self.fit_range;
        let c = (lo..=hi).map(|r| self.shell_max[r] / (r as f64).powf(q)).fold(0.0, f64::max);
        Some((c, q))
    }

    /// Bound on `sum_{|n|_max > radius} |v_n|` from the shell sums: with
    /// `p = l1_exponent + margin` and `c` the largest ratio `shell_l1(r) / r^p`
    /// on the fit range, the tail is at most `c R^{p+1} / (-p-1)`. `Some(0)`
    /// for degenerate fits, `None` if `p >= -1`.
    pub fn tail_bound(&self, margin: f64) -> Option<f64> {
        let Some(e) = self.l1_exponent else {
            return Some(0.0);
        };
        let p = e + margin;
        if p >= -1.0 {
            return None;
        }
        let (lo, hi) = self.fit_range;
        let c = (lo..=hi).map(|r| self.shell_l1[r] / (r as f64).powf(p)).fold(0.0, f64::max);
        let r = self.radius as f64;
        Some(c * r.powf(p + 1.0) / (-p - 1.0))
    }

    pub fn partial_sums(&self) -> Vec<f64> {
        self.shell_l1
            .iter()
            .scan(0.0, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    }
}

fn shells<T: Real>(values: &[T], window: &BoxWindow) -> (usize, Vec<f64>, Vec<f64>) {
    let radius = (window.size()[0] - 1) / 2;
    let mut shell_max = vec![0.0f64; radius + 1];
    let mut shell_l1 = vec![0.0f64; radius + 1];
    for (n, v) in window.sites().zip(values) {
        let r = max_norm(&n) as usize;
        let a = v.to_f64_lossy().abs();
        shell_max[r] = shell_max[r].max(a);
        shell_l1[r] += a;
    }
    (radius, shell_max, shell_l1)
}

fn check_centered(window: &BoxWindow, len: usize) -> Result<(), String> {
    let s = window.size()[0];
    if window.len() != len {
        return Err("array length does not match the window".into());
    }
    if s.is_multiple_of(2) || window.size().iter().any(|&x| x != s) || window.lo().iter().any(|&l| l != -((s / 2) as i64)) {
        return Err("window must be a centered cube".into());
    }
    Ok(())
}

/// Least-squares slope of `log y` against `log r` over `r >= lo` with `y > floor`.
fn slope(y: &[f64], lo: usize, floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        (lo..y.len()).filter(|&r| y[r] > floor).map(|r| ((r as f64).ln(), y[r].ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Fits the decay exponent over shells `[ceil(R/2), R]`.
pub fn decay_profile<T: Real>(values: &[T], window: &BoxWindow, noise_floor: f64) -> Result<DecayProfile, GreenError<T>> {
    check_centered(window, values.len()).map_err(GreenError::InvalidParameter)?;
    let (radius, shell_max, shell_l1) = shells(values, window);
    if radius < 8 {
        return Err(GreenError::InvalidParameter(format!("decay fit needs radius >= 8, got {radius}")));
    }
    if shell_max.iter().all(|&x| x == 0.0) {
        return Err(GreenError::DegenerateFit("all-zero array".into()));
    }
    let lo = radius.div_ceil(2).max(1);
    let exponent = slope(&shell_max, lo, noise_floor);
    let l1_exponent = exponent.and_then(|_| slope(&shell_l1, lo, noise_floor));
    Ok(DecayProfile {
        dim: window.dim(),
        radius,
        shell_max,
        shell_l1,
        exponent,
        l1_exponent,
        fit_range: (lo, radius),
        noise_floor,
    })
}

/// `sum_{|n|_max <= r} |v_n|` for `r = 0..=R`.
pub fn l1_partial_sums<T: Real>(values: &[T], window: &BoxWindow) -> Result<Vec<f64>, GreenError<T>> {
    check_centered(window, values.len()).map_err(GreenError::InvalidParameter)?;
    let (_, _, l1) = shells(values, window);
    Ok(l1
        .iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect())
}
