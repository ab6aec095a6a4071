//! Correcting an integer field to a recurrent patch on `Q_M` by adding a
//! multiple `h * f` of the toppling polynomial with `supp h` inside `Q_M`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::burn::burn_rounds;
use super::{HeightConfig, SandpileError};
use crate::laurent::LaurentPoly;
use crate::window::{max_norm, BoxWindow};
use crate::Poly;

const MAX_ROUNDS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Correction {
    pub h: Poly,
    /// `v + h * f` on the input window.
    pub corrected: HeightConfig,
    /// Burning-test rounds of the second phase that found a stuck set.
    pub additions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionReport {
    pub support_in_qm: bool,
    pub recurrent_on_qm: bool,
    pub unchanged_outside: bool,
    /// `sum_{|n|_max = M+1} |v'_n|`.
    pub boundary_sum: i64,
    /// `(2M+3)^d * sup |v|` over the input window.
    pub boundary_bound: i64,
}

impl CorrectionReport {
    pub fn boundary_ok(&self) -> bool {
        self.boundary_sum <= self.boundary_bound
    }

    pub fn all_hold(&self) -> bool {
        self.support_in_qm && self.recurrent_on_qm && self.unchanged_outside && self.boundary_ok()
    }
}

struct Patch {
    inner: Vec<usize>,
    in_qm: Vec<bool>,
    strides: Vec<usize>,
}

fn patch(v: &HeightConfig, m: usize) -> Result<Patch, SandpileError> {
    let outer = BoxWindow::centered(v.dim(), m + 1);
    if !v.window.contains_window(&outer) {
        return Err(SandpileError::WindowTooSmall(format!("Q_{}", m + 1)));
    }
    let in_qm: Vec<bool> = v.window.sites().map(|n| max_norm(&n) <= m as i64).collect();
    let inner = (0..in_qm.len()).filter(|&i| in_qm[i]).collect();
    Ok(Patch { inner, in_qm, strides: v.window.strides() })
}

/// Adds `q * f` at flat index `i`, recording `q` in `h`.
fn add_f(v: &mut HeightConfig, p: &Patch, h: &mut [i64], i: usize, q: i64, nb: &mut Vec<usize>) {
    v.heights[i] += q * v.gamma;
    h[i] += q;
    HeightConfig::neighbours(&v.window, &p.strides, i, nb);
    for &j in nb.iter() {
        v.heights[j] -= q;
    }
}

/// Topples every site of `Q_M` down below `gamma`, then anti-topples any
/// negative sites of `Q_M` back into `[0, gamma)`.
fn phase_one(v: &mut HeightConfig, p: &Patch, h: &mut [i64]) {
    let gamma = v.gamma;
    let mut nb = Vec::new();
    let mut queue: Vec<usize> = p.inner.iter().copied().filter(|&i| v.heights[i] >= gamma).collect();
    while let Some(i) = queue.pop() {
        let q = v.heights[i] / gamma;
        if q <= 0 {
            continue;
        }
        add_f(v, p, h, i, -q, &mut nb);
        for &j in &nb {
            if p.in_qm[j] && v.heights[j] >= gamma && v.heights[j] - q < gamma {
                queue.push(j);
            }
        }
    }
    fix_negatives(v, p, h);
}

fn fix_negatives(v: &mut HeightConfig, p: &Patch, h: &mut [i64]) {
    let gamma = v.gamma;
    let mut nb = Vec::new();
    let mut queue: Vec<usize> = p.inner.iter().copied().filter(|&i| v.heights[i] < 0).collect();
    while let Some(i) = queue.pop() {
        if v.heights[i] >= 0 {
            continue;
        }
        let q = (-v.heights[i] + gamma - 1) / gamma;
        add_f(v, p, h, i, q, &mut nb);
        for &j in &nb {
            if p.in_qm[j] && v.heights[j] < 0 && v.heights[j] + q >= 0 {
                queue.push(j);
            }
        }
    }
}

fn to_poly(window: &BoxWindow, h: &[i64]) -> Poly {
    LaurentPoly::from_terms(
        window.dim(),
        h.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (window.site(i), BigInt::from(c))),
    )
    .expect("dimensions agree")
}

/// Finds `h` with support in `Q_M` such that `v + h * f` is recurrent on `Q_M`.
/// The window of `v` must contain `Q_{M+1}`.
pub fn correct_to_recurrent(v: &HeightConfig, m: usize) -> Result<Correction, SandpileError> {
    let p = patch(v, m)?;
    let mut out = v.clone();
    let mut h = vec![0i64; v.heights.len()];
    phase_one(&mut out, &p, &mut h);

    let qm = BoxWindow::centered(v.dim(), m);
    let qm_strides = qm.strides();
    let mut local = vec![0i64; qm.len()];
    let mut nb = Vec::new();
    let mut additions = 0;
    loop {
        for (slot, &i) in local.iter_mut().zip(&p.inner) {
            *slot = out.heights[i];
        }
        let rounds = burn_rounds(&local, &qm, &qm_strides);
        let stuck: Vec<usize> = p.inner.iter().zip(&rounds).filter(|(_, &r)| r == 0).map(|(&i, _)| i).collect();
        if stuck.is_empty() {
            break;
        }
        additions += 1;
        if additions > MAX_ROUNDS {
            return Err(SandpileError::IterationLimit("correct_to_recurrent"));
        }
        for &i in &stuck {
            add_f(&mut out, &p, &mut h, i, 1, &mut nb);
        }
        fix_negatives(&mut out, &p, &mut h);
    }
    Ok(Correction { h: to_poly(&v.window, &h), corrected: out, additions })
}

/// `v + h * f` on the window of `v`; `None` if a coefficient leaves `i64`.
fn apply(v: &HeightConfig, h: &Poly) -> Option<HeightConfig> {
    let mut out = v.clone();
    let d = v.dim();
    for (k, c) in h.terms() {
        let c = c.to_i64()?;
        if let Some(i) = v.window.index_of(k) {
            out.heights[i] = out.heights[i].checked_add(c.checked_mul(v.gamma)?)?;
        }
        let mut n = k.to_vec();
        for axis in 0..d {
            for s in [-1, 1] {
                n[axis] += s;
                if let Some(j) = v.window.index_of(&n) {
                    out.heights[j] = out.heights[j].checked_sub(c)?;
                }
                n[axis] -= s;
            }
        }
    }
    Some(out)
}

/// Evaluates the four postconditions for a candidate `h`.
pub fn verify_correction(v: &HeightConfig, m: usize, h: &Poly) -> Result<CorrectionReport, SandpileError> {
    patch(v, m)?;
    let mi = m as i64;
    let support_in_qm = h.support().all(|k| max_norm(k) <= mi);
    let w = apply(v, h).ok_or_else(|| SandpileError::SizeLimit("coefficients overflow i64".into()))?;
    let qm = BoxWindow::centered(v.dim(), m);
    let local = w.restrict(&qm)?;
    let recurrent_on_qm =
        local.is_stable() && burn_rounds(&local.heights, &qm, &qm.strides()).iter().all(|&r| r > 0);
    let mut unchanged_outside = true;
    let mut boundary_sum = 0i64;
    for ((n, &a), &b) in v.window.sites().zip(&v.heights).zip(&w.heights) {
        let r = max_norm(&n);
        if r > mi + 1 && a != b {
            unchanged_outside = false;
        }
        if r == mi + 1 {
            boundary_sum += b.abs();
        }
    }
    let boundary_bound = (2 * mi + 3).pow(v.dim() as u32) * v.sup_norm();
    Ok(CorrectionReport { support_in_qm, recurrent_on_qm, unchanged_outside, boundary_sum, boundary_bound })
}

/// Every `h` with support in `Q_M` and coefficients in `[-bound, bound]` for
/// which `v + h * f` is recurrent on `Q_M`, by depth-first search with pruning
/// on completed sites.
pub fn enumerate_corrections(v: &HeightConfig, m: usize, bound: i64) -> Result<Vec<Poly>, SandpileError> {
    patch(v, m)?;
    let qm = BoxWindow::centered(v.dim(), m);
    if qm.len() > 32 {
        return Err(SandpileError::SizeLimit(format!("exhaustive search over {} sites", qm.len())));
    }
    let base = v.restrict(&qm)?;
    let strides = qm.strides();
    let nbrs: Vec<Vec<usize>> = (0..qm.len())
        .map(|i| {
            let mut nb = Vec::new();
            HeightConfig::neighbours(&qm, &strides, i, &mut nb);
            nb
        })
        .collect();
    let search = Search { base: &base.heights, gamma: v.gamma, nbrs: &nbrs, lag: strides[0], bound, qm: &qm };
    let mut found = Vec::new();
    let mut h = vec![0i64; qm.len()];
    search.descend(0, &mut h, &mut found);
    Ok(found.into_iter().map(|h| to_poly(&qm, &h)).collect())
}

struct Search<'a> {
    base: &'a [i64],
    gamma: i64,
    nbrs: &'a [Vec<usize>],
    /// Site `i - lag` is complete once `h_i` is assigned.
    lag: usize,
    bound: i64,
    qm: &'a BoxWindow,
}

impl Search<'_> {
    fn value(&self, h: &[i64], i: usize) -> i64 {
        self.base[i] + self.gamma * h[i] - self.nbrs[i].iter().map(|&j| h[j]).sum::<i64>()
    }

    fn ok(&self, h: &[i64], i: usize) -> bool {
        (0..self.gamma).contains(&self.value(h, i))
    }

    fn descend(&self, i: usize, h: &mut Vec<i64>, found: &mut Vec<Vec<i64>>) {
        let n = h.len();
        if i == n {
            let tail = n.saturating_sub(self.lag);
            if (tail..n).all(|k| self.ok(h, k)) {
                let vals: Vec<i64> = (0..n).map(|k| self.value(h, k)).collect();
                if burn_rounds(&vals, self.qm, &self.qm.strides()).iter().all(|&r| r > 0) {
                    found.push(h.clone());
                }
            }
            return;
        }
        for c in -self.bound..=self.bound {
            h[i] = c;
            if i < self.lag || self.ok(h, i - self.lag) {
                self.descend(i + 1, h, found);
            }
        }
        h[i] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recurrent_input_needs_nothing() {
        let v = HeightConfig::max_stable(BoxWindow::centered(2, 3), 4).unwrap();
        let c = correct_to_recurrent(&v, 1).unwrap();
        assert!(c.h.is_zero());
        assert_eq!(c.corrected, v);
    }

    #[test]
    fn zero_input_m1() {
        let v = HeightConfig::zeros(BoxWindow::centered(2, 2), 4).unwrap();
        let c = correct_to_recurrent(&v, 1).unwrap();
        assert!(!c.h.is_zero());
        let r = verify_correction(&v, 1, &c.h).unwrap();
        assert!(r.support_in_qm && r.recurrent_on_qm && r.unchanged_outside);
        // the boundary estimate degenerates for v = 0
        assert!(r.boundary_sum > 0 && r.boundary_bound == 0);
        assert_eq!(enumerate_corrections(&v, 1, 3).unwrap(), vec![c.h]);
    }

    #[test]
    fn window_must_hold_outer_shell() {
        let v = HeightConfig::zeros(BoxWindow::centered(2, 1), 4).unwrap();
        assert!(correct_to_recurrent(&v, 1).is_err());
    }
}
