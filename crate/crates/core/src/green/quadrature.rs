//! Quadrature for `w_n` and for the entropy integral.
//!
//! The first coordinate is integrated in closed form. With
//! `a = gamma - 2 sum_{j>=2} cos(2 pi t_j)` and `theta = acosh(a/2)`,
//!
//! ```text
//! int_0^1 e^{-2 pi i n t} / (a - 2 cos 2 pi t) dt = e^{-|n| theta} / sqrt(a^2 - 4)
//! int_0^1 log(a - 2 cos 2 pi t) dt              = theta
//! ```
//!
//! leaving a `(d-1)`-dimensional integral over `t'`. Symmetry in each `t_j`
//! reduces it to `[0, 1/2]^{d-1}`, where the oscillatory factor becomes
//! `prod_j cos(2 pi n_j t_j)`. `a - 2 = (gamma - 2d) + 4 sum sin^2(pi t_j)` is
//! evaluated in this form, so no cancellation occurs near `t' = 0`.

use rayon::prelude::*;

use super::gauss::gauss_legendre;
use super::{canonical_sites, check_model, GreenError, GreenTable, Method, QuadratureSpec, SingularityTreatment};
use crate::scalar::Real;

/// Quadrature nodes on `[0, 1/2]^m`; `weights` include the symmetry factor `2^m`.
struct Grid<T> {
    m: usize,
    points: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> Grid<T> {
    fn len(&self) -> usize {
        self.weights.len()
    }

    fn point(&self, i: usize) -> &[T] {
        &self.points[i * self.m..(i + 1) * self.m]
    }

    /// Tensor midpoint rule with `n` nodes per axis.
    fn midpoint(m: usize, n: usize) -> Self {
        let nf = T::from_usize_lossy(n);
        let half = T::from_f64_lossy(0.5);
        let axis: Vec<T> = (0..n).map(|i| (T::from_usize_lossy(i) + half) / (nf + nf)).collect();
        let w = T::one() / nf;
        let total = n.pow(m as u32);
        let mut points = Vec::with_capacity(total * m);
        let mut idx = vec![0usize; m];
        for _ in 0..total {
            points.extend(idx.iter().map(|&i| axis[i]));
            increment(&mut idx, n);
        }
        Grid { m, points, weights: vec![w.powi(m as i32); total] }
    }

    /// Gauss-Legendre in Duffy coordinates around the corner `t' = 0`: on the
    /// pyramid where `t_i` is the largest coordinate, `t_i = s` and
    /// `t_j = s v_j`, with Jacobian `s^{m-1}`.
    fn duffy(m: usize, n: usize) -> Self {
        let half = T::from_f64_lossy(0.5);
        let (s_nodes, s_weights) = gauss_legendre(n, T::zero(), half);
        let (v_nodes, v_weights) = gauss_legendre(n, T::zero(), T::one());
        let sym = T::from_usize_lossy(1 << m);
        let inner = n.pow(m as u32 - 1);
        let mut points = Vec::with_capacity(m * n * inner * m);
        let mut weights = Vec::with_capacity(m * n * inner);
        for apex in 0..m {
            for (&s, &ws) in s_nodes.iter().zip(&s_weights) {
                let jac = s.powi(m as i32 - 1);
                let mut idx = vec![0usize; m - 1];
                for _ in 0..inner {
                    let mut w = ws * jac * sym;
                    let mut slot = 0;
                    for axis in 0..m {
                        if axis == apex {
                            points.push(s);
                        } else {
                            points.push(s * v_nodes[idx[slot]]);
                            w *= v_weights[idx[slot]];
                            slot += 1;
                        }
                    }
                    weights.push(w);
                    increment(&mut idx, n);
                }
            }
        }
        Grid { m, points, weights }
    }
}

fn increment(idx: &mut [usize], n: usize) {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < n {
            return;
        }
        *slot = 0;
    }
}

/// Per-node data: `weight / sqrt(a^2 - 4)` and `theta`.
struct Kernel<T> {
    scaled: Vec<T>,
    theta: Vec<T>,
}

fn kernel<T: Real>(grid: &Grid<T>, dim: usize, gamma: i64) -> Kernel<T> {
    let pi = T::from_f64_lossy(std::f64::consts::PI);
    let excess = T::from_i64_lossy(gamma - 2 * dim as i64);
    let four = T::from_f64_lossy(4.0);
    let two = T::from_f64_lossy(2.0);
    let mut scaled = Vec::with_capacity(grid.len());
    let mut theta = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let mut am2 = excess;
        for &t in grid.point(i) {
            let s = (pi * t).sin();
            am2 += four * s * s;
        }
        let root = am2.sqrt();
        scaled.push(grid.weights[i] / (root * (am2 + four).sqrt()));
        theta.push(two * (root / two).asinh());
    }
    Kernel { scaled, theta }
}

fn cos_product<T: Real>(point: &[T], n_rest: &[i64]) -> T {
    let two_pi = T::from_f64_lossy(2.0 * std::f64::consts::PI);
    let mut p = T::one();
    for (&t, &k) in point.iter().zip(n_rest) {
        if k != 0 {
            p *= (two_pi * T::from_i64_lossy(k) * t).cos();
        }
    }
    p
}

/// `sum_nodes scaled * prod cos * e^{-n1 theta}`.
fn plain_entry<T: Real>(grid: &Grid<T>, ker: &Kernel<T>, n: &[i64]) -> T {
    let n1 = T::from_i64_lossy(n[0]);
    let mut acc = T::zero();
    for i in 0..grid.len() {
        acc += ker.scaled[i] * cos_product(grid.point(i), &n[1..]) * (-n1 * ker.theta[i]).exp();
    }
    acc
}

/// `sum_nodes scaled * (prod cos * e^{-n1 theta} - 1)`, arranged to avoid
/// cancellation: `c e^{-x} - 1 = c expm1(-x) + (c - 1)`.
fn regularized_entry<T: Real>(grid: &Grid<T>, ker: &Kernel<T>, n: &[i64]) -> T {
    let n1 = T::from_i64_lossy(n[0]);
    let mut acc = T::zero();
    if grid.m == 1 {
        let pi = T::from_f64_lossy(std::f64::consts::PI);
        let two = T::from_f64_lossy(2.0);
        let k = T::from_i64_lossy(n[1]);
        for i in 0..grid.len() {
            let t = grid.points[i];
            let s = (pi * k * t).sin();
            let c = (two * pi * k * t).cos();
            acc += ker.scaled[i] * (c * (-n1 * ker.theta[i]).exp_m1() - two * s * s);
        }
    } else {
        for i in 0..grid.len() {
            let c = cos_product(grid.point(i), &n[1..]);
            acc += ker.scaled[i] * (c * (-n1 * ker.theta[i]).exp_m1() + (c - T::one()));
        }
    }
    acc
}

/// Evaluates every canonical entry with `nodes` per axis.
fn evaluate<T: Real>(
    dim: usize,
    gamma: i64,
    sites: &[Vec<i64>],
    nodes: usize,
    treatment: SingularityTreatment,
) -> Vec<T> {
    let m = dim - 1;
    let critical = gamma == 2 * dim as i64;
    if !critical {
        let grid = Grid::midpoint(m, nodes);
        let ker = kernel(&grid, dim, gamma);
        return sites.par_iter().map(|n| plain_entry(&grid, &ker, n)).collect();
    }
    match (treatment, m) {
        (SingularityTreatment::PolarPatch, 1) => {
            let (x, w) = gauss_legendre(nodes, T::zero(), T::from_f64_lossy(0.5));
            let two = T::from_f64_lossy(2.0);
            let grid = Grid { m: 1, points: x, weights: w.into_iter().map(|w| w * two).collect() };
            let ker = kernel(&grid, dim, gamma);
            sites.par_iter().map(|n| regularized_entry(&grid, &ker, n)).collect()
        }
        (SingularityTreatment::PolarPatch, _) => {
            let grid = Grid::duffy(m, nodes);
            let ker = kernel(&grid, dim, gamma);
            sites.par_iter().map(|n| plain_entry(&grid, &ker, n)).collect()
        }
        (SingularityTreatment::Subtraction, _) | (SingularityTreatment::None, 1) => {
            let w0 = if m == 1 {
                T::zero()
            } else {
                let patch = Grid::duffy(m, nodes);
                plain_entry(&patch, &kernel(&patch, dim, gamma), &vec![0; dim])
            };
            let grid = Grid::midpoint(m, nodes);
            let ker = kernel(&grid, dim, gamma);
            sites.par_iter().map(|n| w0 + regularized_entry(&grid, &ker, n)).collect()
        }
        (SingularityTreatment::None, _) => {
            let grid = Grid::midpoint(m, nodes);
            let ker = kernel(&grid, dim, gamma);
            sites.par_iter().map(|n| plain_entry(&grid, &ker, n)).collect()
        }
    }
}

/// Computes `w^(d)` (`gamma = 2d`) or `w^(d,gamma)` on `Q_R`.
///
/// The node count is doubled until the largest change of any entry between
/// `N` and `2N` nodes per axis is below the target; that change (floored at
/// round-off) is reported as the table accuracy. If the node budget runs out
/// first, the error carries the finest table with its honest accuracy.
pub fn compute_green<T: Real>(
    dim: usize,
    gamma: i64,
    radius: usize,
    spec: &QuadratureSpec,
) -> Result<GreenTable<T>, GreenError<T>> {
    check_model::<T>(dim, gamma)?;
    spec.validate::<T>()?;
    if radius < 1 {
        return Err(GreenError::InvalidParameter("radius must be >= 1".into()));
    }
    let sites = canonical_sites(dim, radius);
    let mut nodes = spec.nodes_per_axis;
    let mut coarse = evaluate::<T>(dim, gamma, &sites, nodes, spec.singularity_treatment);
    loop {
        let fine = evaluate::<T>(dim, gamma, &sites, 2 * nodes, spec.singularity_treatment);
        let mut accuracy = T::roundoff_floor();
        for (a, b) in coarse.iter().zip(&fine) {
            accuracy = accuracy.max((*a - *b).abs());
        }
        let table = {
            let lookup: std::collections::HashMap<&[i64], T> =
                sites.iter().map(|s| s.as_slice()).zip(fine.iter().copied()).collect();
            GreenTable::from_canonical(dim, gamma, radius, Method::Quadrature, accuracy, |c| lookup[c])
        };
        let achieved = accuracy.to_f64_lossy();
        if achieved <= spec.target_abs_error {
            return Ok(table);
        }
        if 4 * nodes > spec.max_nodes_per_axis {
            return Err(GreenError::Unconverged { achieved, target: spec.target_abs_error, table: Box::new(table) });
        }
        coarse = fine;
        nodes *= 2;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    pub value: f64,
    pub accuracy: f64,
    pub nodes_per_axis: usize,
}

fn entropy_at<T: Real>(dim: usize, gamma: i64, nodes: usize, treatment: SingularityTreatment) -> T {
    let m = dim - 1;
    let critical = gamma == 2 * dim as i64;
    let grid = if critical && treatment != SingularityTreatment::None {
        if m == 1 {
            let (x, w) = gauss_legendre(nodes, T::zero(), T::from_f64_lossy(0.5));
            let two = T::from_f64_lossy(2.0);
            Grid { m: 1, points: x, weights: w.into_iter().map(|w| w * two).collect() }
        } else {
            Grid::duffy(m, nodes)
        }
    } else {
        Grid::midpoint(m, nodes)
    };
    let ker = kernel(&grid, dim, gamma);
    grid.weights.iter().zip(&ker.theta).map(|(&w, &t)| w * t).sum()
}

/// `int_{[0,1]^d} log(gamma - 2 sum cos 2 pi x_j) dx`, refined like [`compute_green`].
pub fn entropy_quadrature<T: Real>(
    dim: usize,
    gamma: i64,
    spec: &QuadratureSpec,
) -> Result<EntropyEstimate, GreenError<T>> {
    check_model::<T>(dim, gamma)?;
    spec.validate::<T>()?;
    let mut nodes = spec.nodes_per_axis;
    let mut coarse: T = entropy_at(dim, gamma, nodes, spec.singularity_treatment);
    loop {
        let fine: T = entropy_at(dim, gamma, 2 * nodes, spec.singularity_treatment);
        let accuracy = (fine - coarse).abs().max(T::roundoff_floor()).to_f64_lossy();
        let est = EntropyEstimate { value: fine.to_f64_lossy(), accuracy, nodes_per_axis: 2 * nodes };
        if accuracy <= spec.target_abs_error {
            return Ok(est);
        }
        if 4 * nodes > spec.max_nodes_per_axis {
            return Err(GreenError::EntropyUnconverged { estimate: est, target: spec.target_abs_error });
        }
        coarse = fine;
        nodes *= 2;
    }
}
