use serde::Serialize;

use super::{HeightConfig, SandpileError};
use crate::window::BoxWindow;

/// Outcome of the burning test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BurnReport {
    pub recurrent: bool,
    /// `(round, site)` in burn order; rounds start at 1.
    pub burn_order: Vec<(usize, Vec<i64>)>,
    /// Sites that never burned; empty iff recurrent.
    pub stuck_set: Vec<Vec<i64>>,
}

/// Parallel-round burning on flat data. Returns the round in which each site
/// burned (0 = never).
pub(crate) fn burn_rounds(heights: &[i64], window: &BoxWindow, strides: &[usize]) -> Vec<usize> {
    let n = heights.len();
    let mut nb = Vec::with_capacity(2 * window.dim());
    let mut residual_nbrs: Vec<i64> = (0..n)
        .map(|i| {
            HeightConfig::neighbours(window, strides, i, &mut nb);
            nb.len() as i64
        })
        .collect();
    let mut round_of = vec![0usize; n];
    let mut candidates: Vec<usize> = (0..n).collect();
    let mut round = 0;
    loop {
        round += 1;
        let burning: Vec<usize> =
            candidates.iter().copied().filter(|&i| round_of[i] == 0 && heights[i] >= residual_nbrs[i]).collect();
        if burning.is_empty() {
            return round_of;
        }
        for &i in &burning {
            round_of[i] = round;
        }
        candidates.clear();
        for &i in &burning {
            HeightConfig::neighbours(window, strides, i, &mut nb);
            for &j in &nb {
                residual_nbrs[j] -= 1;
                if round_of[j] == 0 {
                    candidates.push(j);
                }
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
    }
}

/// Burning test on the whole window; every eligible site burns in each round.
pub fn burning_test(v: &HeightConfig) -> Result<BurnReport, SandpileError> {
    v.check_stable()?;
    let rounds = burn_rounds(&v.heights, &v.window, &v.window.strides());
    let mut order: Vec<(usize, usize)> =
        rounds.iter().enumerate().filter(|(_, &r)| r > 0).map(|(i, &r)| (r, i)).collect();
    order.sort_unstable();
    let stuck_set: Vec<Vec<i64>> =
        rounds.iter().enumerate().filter(|(_, &r)| r == 0).map(|(i, _)| v.window.site(i)).collect();
    Ok(BurnReport {
        recurrent: stuck_set.is_empty(),
        burn_order: order.into_iter().map(|(r, i)| (r, v.window.site(i))).collect(),
        stuck_set,
    })
}

pub fn is_recurrent(v: &HeightConfig) -> Result<bool, SandpileError> {
    v.check_stable()?;
    Ok(burn_rounds(&v.heights, &v.window, &v.window.strides()).iter().all(|&r| r > 0))
}

/// Direct search for a nonempty `F` with `v_n < N_F(n)` on all of `F`, over
/// every subset of the window. Returns the first such `F` by bitmask order.
pub fn has_forbidden_subconfiguration(v: &HeightConfig) -> Result<Option<Vec<Vec<i64>>>, SandpileError> {
    let n = v.heights.len();
    if n > 24 {
        return Err(SandpileError::SizeLimit(format!("subset enumeration over {n} sites")));
    }
    let strides = v.window.strides();
    let mut nb = Vec::new();
    let adj: Vec<u32> = (0..n)
        .map(|i| {
            HeightConfig::neighbours(&v.window, &strides, i, &mut nb);
            nb.iter().fold(0u32, |m, &j| m | (1 << j))
        })
        .collect();
    for mask in 1u32..(1u32 << n) {
        let forbidden = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .all(|i| v.heights[i] < (adj[i] & mask).count_ones() as i64);
        if forbidden {
            return Ok(Some((0..n).filter(|&i| mask & (1 << i) != 0).map(|i| v.window.site(i)).collect()));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> BoxWindow {
        BoxWindow::new(vec![0, 0], vec![1, 2]).unwrap()
    }

    #[test]
    fn two_site_examples() {
        let v = HeightConfig::new(pair(), 4, vec![0, 0]).unwrap();
        let r = burning_test(&v).unwrap();
        assert!(!r.recurrent);
        assert_eq!(r.stuck_set.len(), 2);

        let v = HeightConfig::new(pair(), 4, vec![1, 0]).unwrap();
        let r = burning_test(&v).unwrap();
        assert!(r.recurrent);
        assert_eq!(r.burn_order, vec![(1, vec![0, 0]), (2, vec![0, 1])]);
    }

    #[test]
    fn max_is_recurrent() {
        let w = BoxWindow::centered(2, 3);
        // critical: burning spreads inward from the boundary, one shell per round
        let r = burning_test(&HeightConfig::max_stable(w.clone(), 4).unwrap()).unwrap();
        assert!(r.recurrent);
        assert_eq!(r.burn_order.last().unwrap().0, 4);
        let r = burning_test(&HeightConfig::max_stable(w, 5).unwrap()).unwrap();
        assert!(r.recurrent && r.burn_order.iter().all(|(k, _)| *k == 1));
    }

    #[test]
    fn unstable_input_rejected() {
        let v = HeightConfig::new(pair(), 4, vec![4, 0]).unwrap();
        assert!(burning_test(&v).is_err());
        let v = HeightConfig::new(pair(), 4, vec![-1, 0]).unwrap();
        assert!(is_recurrent(&v).is_err());
    }
}
