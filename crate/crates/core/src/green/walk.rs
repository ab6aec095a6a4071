//! Random-walk series for `w`, used as an oracle independent of quadrature.
//!
//! With `P_k(n)` the `k`-step distribution of the simple random walk,
//!
//! ```text
//! critical, d = 2:   4 w_n = sum_{k>=0} (P_k(n) - P_k(0))
//! critical, d >= 3: 2d w_n = sum_{k>=0} P_k(n)
//! gamma > 2d:     gamma w_n = sum_{k>=0} (2d/gamma)^k P_k(n)
//! ```
//!
//! The critical series converge algebraically; their partial sums over
//! complete step pairs have tails with an asymptotic expansion in powers of
//! `1/J` (`J` pairs), removed by Richardson extrapolation. The dissipative
//! series has a geometric tail bound.

use rayon::prelude::*;

use super::{canonical, canonical_sites, check_model, GreenError, GreenTable, Method};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    /// Estimate of `w_n`.
    pub value: f64,
    /// Tail plus round-off error estimate.
    pub error: f64,
    /// Number of walk steps summed.
    pub terms: usize,
}

const LEVELS: usize = 5;

struct Tables {
    /// `C(2m, m) / 4^m`
    central: Vec<f64>,
    /// `ln k!`
    ln_fact: Vec<f64>,
}

impl Tables {
    fn new(k_max: usize) -> Self {
        let mut central = Vec::with_capacity(k_max / 2 + 2);
        central.push(1.0);
        for m in 1..=k_max / 2 + 1 {
            let prev = central[m - 1];
            central.push(prev * (2 * m - 1) as f64 / (2 * m) as f64);
        }
        let mut ln_fact = vec![0.0; k_max + 1];
        for k in 1..=k_max {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        Tables { central, ln_fact }
    }

    /// One-dimensional `P(S_k = j)` for the `+-1` walk.
    fn p1(&self, k: usize, j: i64) -> f64 {
        let j = j.unsigned_abs() as usize;
        if j > k || (k + j) % 2 == 1 {
            return 0.0;
        }
        let m = k / 2;
        if k.is_multiple_of(2) {
            let mut p = self.central[m];
            for i in 1..=j / 2 {
                p *= (m + 1 - i) as f64 / (m + i) as f64;
            }
            p
        } else {
            let mut p = self.central[m] * (2 * m + 1) as f64 / (2 * m + 2) as f64;
            for i in 1..=j / 2 {
                p *= (m + 1 - i) as f64 / (m + 1 + i) as f64;
            }
            p
        }
    }

    /// Binomial(k, p) probabilities, anchored at the mode and normalised.
    fn binomial_row(&self, k: usize, p: f64) -> Vec<f64> {
        let mut row = vec![0.0; k + 1];
        let mode = (((k + 1) as f64) * p).floor().min(k as f64) as usize;
        let q = 1.0 - p;
        row[mode] = (self.ln_fact[k] - self.ln_fact[mode] - self.ln_fact[k - mode]
            + mode as f64 * p.ln()
            + (k - mode) as f64 * q.ln())
        .exp();
        for i in mode..k {
            row[i + 1] = row[i] * (k - i) as f64 / (i + 1) as f64 * (p / q);
        }
        for i in (0..mode).rev() {
            row[i] = row[i + 1] * (i + 1) as f64 / (k - i) as f64 * (q / p);
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= total);
        row
    }

    /// `P_k(n)` for `k = 0..=k_max`.
    fn distribution(&self, n: &[i64], k_max: usize) -> Vec<f64> {
        match n.len() {
            1 => (0..=k_max).map(|k| self.p1(k, n[0])).collect(),
            2 => (0..=k_max).map(|k| self.p1(k, n[0] + n[1]) * self.p1(k, n[0] - n[1])).collect(),
            d => {
                let rest = self.distribution(&n[1..], k_max);
                let first: Vec<f64> = (0..=k_max).map(|k| self.p1(k, n[0])).collect();
                let p = 1.0 / d as f64;
                (0..=k_max)
                    .map(|k| {
                        let row = self.binomial_row(k, p);
                        (0..=k).map(|k1| row[k1] * first[k1] * rest[k - k1]).sum()
                    })
                    .collect()
            }
        }
    }
}

/// Richardson extrapolation of `s[l] = S(J_0 2^l)` assuming
/// `S(J) = S + sum_i c_i J^{-(base + i)}`.
fn richardson(s: &[f64], base: f64) -> (f64, f64) {
    let mut cols: Vec<Vec<f64>> = vec![s.to_vec()];
    for i in 0..s.len() - 1 {
        let prev = &cols[i];
        let r = 2f64.powf(base + i as f64);
        let next: Vec<f64> = (0..prev.len() - 1).map(|l| (r * prev[l + 1] - prev[l]) / (r - 1.0)).collect();
        cols.push(next);
    }
    let last = cols[s.len() - 1][0];
    let before = cols[s.len() - 2][1];
    (last, (last - before).abs())
}

fn oracle_with(tables: &Tables, dim: usize, gamma: i64, n: &[i64], k_max: usize) -> OracleValue {
    let critical = gamma == 2 * dim as i64;
    let c = canonical(n);
    let eps = f64::EPSILON;
    let pn = tables.distribution(&c, k_max);
    if !critical {
        let rho = 2.0 * dim as f64 / gamma as f64;
        let mut s = 0.0;
        let mut weight = 1.0;
        for &p in &pn {
            s += weight * p;
            weight *= rho;
        }
        let tail = weight / (1.0 - rho);
        let noise = 16.0 * k_max as f64 * eps * s;
        return OracleValue { value: s / gamma as f64, error: (tail + noise) / gamma as f64, terms: k_max + 1 };
    }
    if dim == 2 && c.iter().all(|&x| x == 0) {
        return OracleValue { value: 0.0, error: 0.0, terms: k_max + 1 };
    }
    let p0 = if dim == 2 { tables.distribution(&vec![0; dim], k_max) } else { Vec::new() };
    let term = |k: usize| if dim == 2 { pn[k] - p0[k] } else { pn[k] };
    let top = k_max / 2;
    let levels: Vec<usize> = (0..LEVELS).map(|l| top >> (LEVELS - 1 - l)).collect();
    let mut partial = Vec::with_capacity(LEVELS);
    let mut s = 0.0;
    let mut mass = 0.0;
    let mut k = 0;
    for &j in &levels {
        while k < 2 * j {
            s += term(k);
            mass += pn[k] + if dim == 2 { p0[k] } else { 0.0 };
            k += 1;
        }
        partial.push(s);
    }
    let base = if dim == 2 { 1.0 } else { dim as f64 / 2.0 - 1.0 };
    let (value, tail) = richardson(&partial, base);
    // Relative error of each probability grows at most linearly in k; the
    // extrapolation amplifies it by less than 10.
    let noise = 10.0 * 16.0 * k_max as f64 * eps * mass;
    let scale = 2.0 * dim as f64;
    OracleValue { value: value / scale, error: (tail + noise) / scale, terms: 2 * top }
}

/// Estimates `w_n` from the random-walk series with at most `k_max` steps.
pub fn walk_series_oracle(dim: usize, gamma: i64, n: &[i64], k_max: usize) -> Result<OracleValue, GreenError<f64>> {
    check_model::<f64>(dim, gamma)?;
    if n.len() != dim {
        return Err(GreenError::DimensionMismatch(dim, n.len()));
    }
    let critical = gamma == 2 * dim as i64;
    let min_k = if critical { 2 << LEVELS } else { 1 };
    if k_max < min_k {
        return Err(GreenError::InvalidParameter(format!("k_max must be at least {min_k}")));
    }
    Ok(oracle_with(&Tables::new(k_max), dim, gamma, n, k_max))
}

/// A whole table of series values on `Q_R`.
pub fn series_table<T: Real>(dim: usize, gamma: i64, radius: usize, k_max: usize) -> Result<GreenTable<T>, GreenError<T>> {
    check_model::<T>(dim, gamma)?;
    if gamma == 2 * dim as i64 && k_max < 2 << LEVELS {
        return Err(GreenError::InvalidParameter(format!("k_max must be at least {}", 2 << LEVELS)));
    }
    let tables = Tables::new(k_max);
    let sites = canonical_sites(dim, radius);
    let values: Vec<OracleValue> = sites.par_iter().map(|n| oracle_with(&tables, dim, gamma, n, k_max)).collect();
    let accuracy = values.iter().map(|v| v.error).fold(0.0, f64::max);
    let lookup: std::collections::HashMap<&[i64], f64> =
        sites.iter().map(|s| s.as_slice()).zip(values.iter().map(|v| v.value)).collect();
    Ok(GreenTable::from_canonical(
        dim,
        gamma,
        radius,
        Method::Series,
        T::from_f64_lossy(accuracy).max(T::roundoff_floor()),
        |c| T::from_f64_lossy(lookup[c]),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn one_dimensional_probabilities() {
        let t = Tables::new(40);
        for k in 0..=40usize {
            let total: f64 = (-(k as i64)..=k as i64).map(|j| t.p1(k, j)).sum();
            assert!((total - 1.0).abs() < 1e-13);
            for j in 0..=k as i64 {
                let expect = if (k as i64 + j) % 2 == 0 {
                    binom(k as u64, (k as u64 + j as u64) / 2) / 2f64.powi(k as i32)
                } else {
                    0.0
                };
                assert!((t.p1(k, j) - expect).abs() < 1e-14, "k={k} j={j}");
            }
        }
    }

    #[test]
    fn distributions_are_probability_measures() {
        let t = Tables::new(12);
        for d in 1..=3usize {
            let w = crate::window::BoxWindow::centered(d, 12);
            let mut totals = vec![0.0; 13];
            for n in w.sites() {
                for (k, p) in t.distribution(&n, 12).into_iter().enumerate() {
                    totals[k] += p;
                }
            }
            assert!(totals.iter().all(|x| (x - 1.0).abs() < 1e-12), "d={d}: {totals:?}");
        }
        // Two steps in d=3 return to the origin with probability 1/6.
        assert!((t.distribution(&[0, 0, 0], 2)[2] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn richardson_removes_power_tails() {
        let exact = 0.75;
        let s: Vec<f64> = (0..5).map(|l| {
            let j = 16.0 * 2f64.powi(l);
            exact + 1.0 / j + 3.0 / (j * j) - 2.0 / (j * j * j)
        }).collect();
        let (v, e) = richardson(&s, 1.0);
        assert!((v - exact).abs() < 1e-12 && e < 1e-10);
    }

    #[test]
    fn plane_anchor_values() {
        let origin = walk_series_oracle(2, 4, &[0, 0], 1 << 12).unwrap();
        assert_eq!(origin.value, 0.0);
        let e1 = walk_series_oracle(2, 4, &[1, 0], 1 << 14).unwrap();
        assert!((e1.value + 0.25).abs() <= e1.error.max(1e-9), "{e1:?}");
        let diag = walk_series_oracle(2, 4, &[1, -1], 1 << 16).unwrap();
        assert!((diag.value + 1.0 / std::f64::consts::PI).abs() <= diag.error + 1e-9, "{diag:?}");
    }

    #[test]
    fn dissipative_total_mass() {
        // Sum over all n of the series is 1/(gamma - 2d); check the series at a few
        // sites obeys the stencil relation instead.
        let k = 400;
        let w = |n: &[i64]| walk_series_oracle(2, 5, n, k).unwrap().value;
        let lhs = 5.0 * w(&[0, 0]) - 4.0 * w(&[1, 0]);
        assert!((lhs - 1.0).abs() < 1e-12);
        let lhs = 5.0 * w(&[1, 0]) - w(&[0, 0]) - w(&[2, 0]) - 2.0 * w(&[1, 1]);
        assert!(lhs.abs() < 1e-12);
    }
}
