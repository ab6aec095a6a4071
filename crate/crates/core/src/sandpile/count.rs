use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::burn::burn_rounds;
use super::{check_model, HeightConfig, SandpileError};
use crate::window::BoxWindow;

const BRUTEFORCE_LIMIT: u64 = 10_000_000;
const DETERMINANT_LIMIT: usize = 1_000_000;
/// Largest window for which the determinant backend also returns the exact count.
const EXACT_DET_LIMIT: usize = 144;
const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountBackend {
    Bruteforce,
    Determinant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountResult {
    pub backend: CountBackend,
    /// Exact number of recurrent configurations when available.
    #[serde(serialize_with = "ser_opt_big")]
    pub exact: Option<BigInt>,
    /// Natural log of the count.
    pub log_count: f64,
}

fn ser_opt_big<S: serde::Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(b) => s.serialize_some(&b.to_string()),
        None => s.serialize_none(),
    }
}

fn big_ln(b: &BigInt) -> f64 {
    // ln(b) = ln(mantissa) + shift * ln 2, keeping 64 leading bits.
    let bits = b.bits();
    if bits <= 1000 {
        return b.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (b >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Number of recurrent configurations on `window`.
pub fn count_recurrent(window: &BoxWindow, gamma: i64, backend: CountBackend) -> Result<CountResult, SandpileError> {
    check_model(window.dim(), gamma)?;
    match backend {
        CountBackend::Bruteforce => {
            let n = bruteforce(window, gamma)?;
            Ok(CountResult { backend, exact: Some(BigInt::from(n)), log_count: (n as f64).ln() })
        }
        CountBackend::Determinant => {
            if window.len() <= EXACT_DET_LIMIT {
                let det = toppling_det_exact(window, gamma)?;
                let log_count = big_ln(&det);
                Ok(CountResult { backend, exact: Some(det), log_count })
            } else {
                Ok(CountResult { backend, exact: None, log_count: log_det_rectangle(window, gamma)? })
            }
        }
    }
}

fn bruteforce(window: &BoxWindow, gamma: i64) -> Result<u64, SandpileError> {
    let n = window.len();
    let total = (gamma as u64).checked_pow(n as u32).filter(|&t| t <= BRUTEFORCE_LIMIT).ok_or_else(|| {
        SandpileError::SizeLimit(format!("gamma^|E| = {gamma}^{n} exceeds {BRUTEFORCE_LIMIT}"))
    })?;
    let strides = window.strides();
    let count = (0..total)
        .into_par_iter()
        .map_init(
            || vec![0i64; n],
            |h, mut k| {
                for x in h.iter_mut() {
                    *x = (k % gamma as u64) as i64;
                    k /= gamma as u64;
                }
                burn_rounds(h, window, &strides).iter().all(|&r| r > 0) as u64
            },
        )
        .sum();
    Ok(count)
}

/// Dense toppling matrix: `gamma` on the diagonal, `-1` for adjacent pairs.
fn toppling_matrix(window: &BoxWindow, gamma: i64) -> Vec<Vec<i64>> {
    let n = window.len();
    let strides = window.strides();
    let mut m = vec![vec![0i64; n]; n];
    let mut nb = Vec::new();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = gamma;
        HeightConfig::neighbours(window, &strides, i, &mut nb);
        for &j in &nb {
            row[j] = -1;
        }
    }
    m
}

/// `det(Delta_E)` by fraction-free Gaussian elimination. The matrix is
/// positive definite, so no pivoting is needed.
pub fn toppling_det_exact(window: &BoxWindow, gamma: i64) -> Result<BigInt, SandpileError> {
    check_model(window.dim(), gamma)?;
    let n = window.len();
    if n > 400 {
        return Err(SandpileError::SizeLimit(format!("exact determinant of order {n}")));
    }
    let mut m: Vec<Vec<BigInt>> =
        toppling_matrix(window, gamma).into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
    let mut prev = BigInt::from(1);
    for k in 0..n.saturating_sub(1) {
        let (top, rest) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        let pivot = &pivot_row[k];
        for row in rest.iter_mut() {
            let lead = row[k].clone();
            for j in k + 1..n {
                let mut x = &row[j] * pivot;
                if !lead.is_zero() && !pivot_row[j].is_zero() {
                    x -= &lead * &pivot_row[j];
                }
                row[j] = x / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    Ok(m[n - 1][n - 1].clone())
}

/// `log det(Delta_E)` from the product of grid-graph eigenvalues
/// `gamma - sum_i 2 cos(pi j_i / (a_i + 1))`.
pub fn log_det_rectangle(window: &BoxWindow, gamma: i64) -> Result<f64, SandpileError> {
    check_model(window.dim(), gamma)?;
    if window.len() > DETERMINANT_LIMIT {
        return Err(SandpileError::SizeLimit(format!("|E| = {} exceeds {DETERMINANT_LIMIT}", window.len())));
    }
    let axes: Vec<Vec<f64>> =
        window.size().iter().map(|&a| (1..=a).map(|j| 2.0 * (PI * j as f64 / (a + 1) as f64).cos()).collect()).collect();
    let eig = BoxWindow::new(vec![0; window.dim()], window.size().to_vec())?;
    let total: f64 = (0..eig.len())
        .into_par_iter()
        .map(|k| {
            let j = eig.site(k);
            let s: f64 = j.iter().zip(&axes).map(|(&ji, ax)| ax[ji as usize]).sum();
            (gamma as f64 - s).ln()
        })
        .sum();
    Ok(total)
}

/// `log det(Delta_E)` by dense LU with partial pivoting.
pub fn log_det_dense(window: &BoxWindow, gamma: i64) -> Result<f64, SandpileError> {
    check_model(window.dim(), gamma)?;
    let n = window.len();
    if n > DENSE_LIMIT {
        return Err(SandpileError::SizeLimit(format!("dense LU of order {n}")));
    }
    let mut m: Vec<Vec<f64>> =
        toppling_matrix(window, gamma).into_iter().map(|r| r.into_iter().map(|x| x as f64).collect()).collect();
    let mut log = 0.0;
    for k in 0..n {
        let p = (k..n).max_by(|&a, &b| m[a][k].abs().total_cmp(&m[b][k].abs())).unwrap();
        m.swap(k, p);
        let pivot = m[k][k];
        log += pivot.abs().ln();
        let (top, rest) = m.split_at_mut(k + 1);
        let pr = &top[k];
        for row in rest.iter_mut() {
            let factor = row[k] / pivot;
            if factor != 0.0 {
                for j in k + 1..n {
                    row[j] -= factor * pr[j];
                }
            }
        }
    }
    Ok(log)
}

/// `log |R_{Q}| / |Q|` for the cube with `side` sites per axis.
pub fn finite_entropy_estimate(side: usize, dim: usize, gamma: i64) -> Result<f64, SandpileError> {
    check_model(dim, gamma)?;
    let window = BoxWindow::with_extents(vec![side; dim])?;
    Ok(log_det_rectangle(&window, gamma)? / window.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        let pair = BoxWindow::with_extents(vec![1, 2]).unwrap();
        let c = count_recurrent(&pair, 4, CountBackend::Bruteforce).unwrap();
        assert_eq!(c.exact, Some(BigInt::from(15)));
        assert_eq!(toppling_det_exact(&pair, 4).unwrap(), BigInt::from(15));
        let single = BoxWindow::centered(2, 0);
        assert_eq!(count_recurrent(&single, 4, CountBackend::Determinant).unwrap().exact, Some(BigInt::from(4)));
        assert!((finite_entropy_estimate(1, 2, 4).unwrap() - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn log_dets_agree() {
        let w = BoxWindow::with_extents(vec![5, 7]).unwrap();
        let exact = big_ln(&toppling_det_exact(&w, 5).unwrap());
        assert!((log_det_rectangle(&w, 5).unwrap() - exact).abs() < 1e-9);
        assert!((log_det_dense(&w, 5).unwrap() - exact).abs() < 1e-9);
    }

    #[test]
    fn size_limits() {
        let w = BoxWindow::with_extents(vec![4, 4]).unwrap();
        assert!(matches!(count_recurrent(&w, 4, CountBackend::Bruteforce), Err(SandpileError::SizeLimit(_))));
    }
}
