//! Configurations whose maximal set `{v = gamma - 1}` is connected, whose
//! complement splits into finite pieces, and which still reach height 0.
//! Connectivity here is max-norm adjacency (`3^d - 1` neighbours).

use serde::Serialize;

use super::burn::burn_rounds;
use super::{HeightConfig, SandpileError};
use crate::window::BoxWindow;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    /// `{v = gamma - 1}` is nonempty and max-norm connected.
    pub max_set_connected: bool,
    pub complement_components: usize,
    /// No complement component reaches the window boundary.
    pub complement_bounded: bool,
    pub min_is_zero: bool,
    pub recurrent: bool,
}

impl WitnessReport {
    pub fn all_hold(&self) -> bool {
        self.max_set_connected && self.complement_bounded && self.min_is_zero && self.recurrent
    }
}

/// Components of `{i : mask[i]}` under max-norm adjacency, as flat indices.
pub fn max_norm_components(window: &BoxWindow, mask: &[bool]) -> Vec<Vec<usize>> {
    let d = window.dim();
    let offsets: Vec<Vec<i64>> = BoxWindow::centered(d, 1).sites().filter(|o| o.iter().any(|&x| x != 0)).collect();
    let mut seen = vec![false; mask.len()];
    let mut comps = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let n = window.site(i);
            for o in &offsets {
                let m: Vec<i64> = n.iter().zip(o).map(|(a, b)| a + b).collect();
                if let Some(j) = window.index_of(&m) {
                    if mask[j] && !seen[j] {
                        seen[j] = true;
                        comp.push(j);
                        stack.push(j);
                    }
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

pub fn witness_conditions(v: &HeightConfig) -> Result<WitnessReport, SandpileError> {
    v.check_stable()?;
    let w = v.window();
    let top: Vec<bool> = v.heights().iter().map(|&h| h == v.gamma() - 1).collect();
    let rest: Vec<bool> = top.iter().map(|b| !b).collect();
    let top_comps = max_norm_components(w, &top);
    let rest_comps = max_norm_components(w, &rest);
    let hi = w.hi();
    let on_boundary = |i: usize| {
        let n = w.site(i);
        n.iter().zip(w.lo()).zip(&hi).any(|((x, l), h)| x == l || x == h)
    };
    Ok(WitnessReport {
        max_set_connected: top_comps.len() == 1,
        complement_components: rest_comps.len(),
        complement_bounded: rest_comps.iter().all(|c| !c.iter().any(|&i| on_boundary(i))),
        min_is_zero: v.heights().iter().min() == Some(&0),
        recurrent: burn_rounds(v.heights(), w, &w.strides()).iter().all(|&r| r > 0),
    })
}

/// `gamma - 1` everywhere except height 0 at interior sites whose coordinates
/// are all divisible by `spacing` (`spacing >= 2`).
pub fn sparse_zero_witness(window: BoxWindow, gamma: i64, spacing: i64) -> Result<HeightConfig, SandpileError> {
    if spacing < 2 {
        return Err(SandpileError::WindowTooSmall("spacing >= 2".into()));
    }
    let lo = window.lo().to_vec();
    let hi = window.hi();
    HeightConfig::from_fn(window, gamma, |n| {
        let interior = n.iter().zip(&lo).zip(&hi).all(|((x, l), h)| x > l && x < h);
        if interior && n.iter().all(|x| x.rem_euclid(spacing) == 0) {
            0
        } else {
            gamma - 1
        }
    })
}
