//! Residual checks for the covering maps. Every check returns the observed
//! torus distance together with the threshold implied by the error bounds.

use serde::Serialize;

use super::{torus_dist, torus_reduce, xi_apply, Extension, HarmonicError, IntegerField, TorusPoint, XiSpec};
use crate::laurent::{divide_by, standard_polys, LaurentPoly, Division};
use crate::sandpile::{group_add_with_odometer, HeightConfig};
use crate::scalar::Real;
use crate::window::BoxWindow;
use crate::Poly;

/// An observed residual and the threshold it is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison<T: Real> {
    pub residual: T,
    pub threshold: T,
}

impl<T: Real> Comparison<T> {
    pub fn within(&self) -> bool {
        self.residual <= self.threshold
    }

    pub fn exceeds(&self) -> bool {
        self.residual > self.threshold
    }
}

/// `max dist_T(gamma x_n - sum_nbrs x, 0)` over sites whose `2d` neighbours
/// lie in the window.
pub fn harmonicity_residual<T: Real>(x: &TorusPoint<T>, gamma: i64) -> T {
    let w = &x.window;
    let d = w.dim();
    let g = T::from_i64_lossy(gamma);
    let mut worst = T::zero();
    let mut m = vec![0i64; d];
    'sites: for (i, n) in w.sites().enumerate() {
        let mut s = g * x.values[i];
        for axis in 0..d {
            for step in [-1, 1] {
                m.copy_from_slice(&n);
                m[axis] += step;
                match w.index_of(&m) {
                    Some(j) => s -= x.values[j],
                    None => continue 'sites,
                }
            }
        }
        worst = worst.max(torus_dist(s));
    }
    worst
}

/// Compares `xi(sigma^m v)` with `alpha^m xi(v)` on `out`.
pub fn equivariance_residual<T: Real>(
    spec: &XiSpec<T>,
    v: &IntegerField,
    m: &[i64],
    out: &BoxWindow,
) -> Result<Comparison<T>, HarmonicError> {
    let a = xi_apply(spec, &v.shifted(m), out)?;
    let b = xi_apply(spec, v, &out.translate(m))?;
    // (alpha^m x)_n = x_{n+m}
    let neg: Vec<i64> = m.iter().map(|x| -x).collect();
    let b = TorusPoint { window: b.window.translate(&neg), values: b.values, err: b.err };
    let (residual, err) = a.distance(&b)?;
    Ok(Comparison { residual, threshold: err })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport<T: Real> {
    /// One entry per spec: `max dist_T(xi_g(v), 0)` against the error bound.
    pub per_generator: Vec<Comparison<T>>,
}

impl<T: Real> KernelReport<T> {
    pub fn all_within(&self) -> bool {
        self.per_generator.iter().all(Comparison::within)
    }
}

pub fn kernel_check<T: Real>(
    specs: &[XiSpec<T>],
    v: &IntegerField,
    out: &BoxWindow,
) -> Result<KernelReport<T>, HarmonicError> {
    let per_generator = specs
        .iter()
        .map(|s| {
            let x = xi_apply(s, v, out)?;
            Ok(Comparison { residual: x.max_dist_to_zero(), threshold: x.max_err() })
        })
        .collect::<Result<_, HarmonicError>>()?;
    Ok(KernelReport { per_generator })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport<T: Real> {
    /// `max dist_T(xi(v)_n, xi(v')_n)` over `Q + Q_K`.
    pub value: T,
    /// Error bound of `value`.
    pub err: T,
    /// `v' - v` is a multiple of the toppling polynomial.
    pub difference_in_ideal: bool,
}

impl<T: Real> SeparationReport<T> {
    /// `value >= 1/(4d) - 2 err`.
    pub fn separated(&self, dim: usize) -> bool {
        self.value >= T::one() / T::from_usize_lossy(4 * dim) - self.err - self.err
    }
}

/// Compares two recurrent configurations that agree outside `q`; both are
/// extended by `gamma - 1`.
pub fn separation_check<T: Real>(
    spec: &XiSpec<T>,
    v: &HeightConfig,
    w: &HeightConfig,
    q: &BoxWindow,
) -> Result<SeparationReport<T>, HarmonicError> {
    if v.window() != w.window() || v.gamma() != w.gamma() {
        return Err(HarmonicError::Mismatch("configurations on different windows".into()));
    }
    let mut diff_terms = Vec::new();
    for (n, (a, b)) in v.window().sites().zip(v.heights().iter().zip(w.heights())) {
        if a != b {
            if !q.contains(&n) {
                return Err(HarmonicError::InvalidParameter(format!("configurations differ at {n:?} outside Q")));
            }
            diff_terms.push((n, num_bigint::BigInt::from(b - a)));
        }
    }
    let diff = LaurentPoly::from_terms(spec.dim, diff_terms)?;
    let f = standard_polys(spec.dim, spec.gamma)?.f_gamma;
    let difference_in_ideal = matches!(divide_by(&diff, &f, None)?, Division::Quotient(_));
    let out = q.expand(spec.trunc_radius as i64).ok_or(HarmonicError::EmptyOverlap)?;
    // Both fields share the background gamma - 1, so with a common truncated
    // kernel xi(v') - xi(v) = xi(v' - v) up to round-off.
    let delta = IntegerField::new(
        v.window().clone(),
        v.heights().iter().zip(w.heights()).map(|(a, b)| b - a).collect(),
        Extension::Zero,
    )?;
    let x = xi_apply(spec, &delta, &out)?;
    let value = x.max_dist_to_zero();
    let err = x.max_err() + spec.roundoff(&IntegerField::from_recurrent(v)) + spec.roundoff(&IntegerField::from_recurrent(w));
    Ok(SeparationReport { value, err, difference_in_ideal })
}

/// Compares `xi_{g h}(v)` with `h(alpha) xi_g(v)` on `out`.
pub fn intertwining_residual<T: Real>(
    spec_g: &XiSpec<T>,
    spec_gh: &XiSpec<T>,
    h: &Poly,
    v: &IntegerField,
    out: &BoxWindow,
) -> Result<Comparison<T>, HarmonicError> {
    let Some(hb) = h.bounding_box() else {
        return Err(HarmonicError::InvalidParameter("h = 0".into()));
    };
    let lhs = xi_apply(spec_gh, v, out)?;
    let x = xi_apply(spec_g, v, &out.minkowski_sum(&hb))?;
    let terms: Vec<(Vec<i64>, T)> = h.float_terms().into_iter().map(|(k, c)| (k, T::from_f64_lossy(c))).collect();
    let h1 = T::from_f64_lossy(h.l1_norm());
    let mut rhs = TorusPoint::zeros(out.clone());
    let mut m = vec![0i64; out.dim()];
    for (i, n) in out.sites().enumerate() {
        let mut s = T::zero();
        for (k, c) in &terms {
            for a in 0..m.len() {
                m[a] = n[a] + k[a];
            }
            s += *c * x.values[x.window.index_of(&m).unwrap()];
        }
        rhs.values[i] = torus_reduce(s);
        rhs.err[i] = h1 * x.max_err();
    }
    let (residual, err) = lhs.distance(&rhs)?;
    Ok(Comparison { residual, threshold: err })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdditionDemo<T: Real> {
    /// `rho(alpha^{-n} z)` on the output window, `z = g* . w`.
    pub delta: TorusPoint<T>,
    /// `xi(v + delta^(n)) - xi(v)` against `delta`.
    pub comparison: Comparison<T>,
}

/// Adding one grain at `n` moves `xi_g(v)` by the shifted homoclinic point.
pub fn addition_operator_demo<T: Real>(
    spec: &XiSpec<T>,
    v: &IntegerField,
    n: &[i64],
    out: &BoxWindow,
) -> Result<AdditionDemo<T>, HarmonicError> {
    let grain = IntegerField::new(BoxWindow::new(n.to_vec(), vec![1; n.len()]).map_err(|e| {
        HarmonicError::InvalidParameter(e.to_string())
    })?, vec![1], Extension::Zero)?;
    let mut delta = TorusPoint::zeros(out.clone());
    let entry_err = spec.coeff_accuracy + T::epsilon();
    let mut k = vec![0i64; n.len()];
    for (i, m) in out.sites().enumerate() {
        for a in 0..k.len() {
            k[a] = m[a] - n[a];
        }
        delta.values[i] = torus_reduce(spec.z(&k));
        let outside = spec.kernel_window().index_of(&k).is_none();
        delta.err[i] = if spec.exact { T::zero() } else if outside { spec.tail_l1 } else { entry_err };
    }
    let before = xi_apply(spec, v, out)?;
    let after = xi_apply(spec, &v.add(&grain)?, out)?;
    let mut moved = TorusPoint::zeros(out.clone());
    for i in 0..out.len() {
        moved.values[i] = torus_reduce(after.values[i] - before.values[i]);
        moved.err[i] = after.err[i] + before.err[i];
    }
    let (residual, threshold) = moved.distance(&delta)?;
    Ok(AdditionDemo { delta, comparison: Comparison { residual, threshold } })
}

/// `(v + v') - f * odometer` for the stabilization of `v + v'`, as a field
/// on `E + Q_1`: the stabilized heights on `E`, the background `2(gamma-1)`
/// outside, and the grains that toppled across the boundary on the outer
/// shell. It differs from `v + v'` by a multiple of `f`.
pub fn group_sum_representative(v: &HeightConfig, w: &HeightConfig) -> Result<(HeightConfig, IntegerField), HarmonicError> {
    let (s, odo) = group_add_with_odometer(v, w)?;
    let e = v.window();
    let big = e.expand(1).ok_or(HarmonicError::EmptyOverlap)?;
    let bg = 2 * (v.gamma() - 1);
    let d = e.dim();
    let mut m = vec![0i64; d];
    let values = big
        .sites()
        .map(|n| {
            if let Some(i) = e.index_of(&n) {
                return s.heights()[i];
            }
            let mut spill = 0i64;
            for axis in 0..d {
                for step in [-1, 1] {
                    m.copy_from_slice(&n);
                    m[axis] += step;
                    if let Some(c) = odo.get(&m) {
                        spill += c as i64;
                    }
                }
            }
            bg + spill
        })
        .collect();
    Ok((s, IntegerField::new(big, values, Extension::Constant(bg))?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditivityReport<T: Real> {
    pub per_generator: Vec<Comparison<T>>,
}

impl<T: Real> AdditivityReport<T> {
    pub fn all_within(&self) -> bool {
        self.per_generator.iter().all(Comparison::within)
    }
}

/// `xi(v (+) v') = xi(v) + xi(v')` per spec, using the boundary-spill
/// representative of the group sum.
pub fn additivity_check<T: Real>(
    specs: &[XiSpec<T>],
    v: &HeightConfig,
    w: &HeightConfig,
    out: &BoxWindow,
) -> Result<AdditivityReport<T>, HarmonicError> {
    let (_, rep) = group_sum_representative(v, w)?;
    let fv = IntegerField::from_recurrent(v);
    let fw = IntegerField::from_recurrent(w);
    let per_generator = specs
        .iter()
        .map(|s| {
            let lhs = xi_apply(s, &rep, out)?;
            let rhs = xi_apply(s, &fv, out)?.add(&xi_apply(s, &fw, out)?)?;
            let (residual, threshold) = lhs.distance(&rhs)?;
            Ok(Comparison { residual, threshold })
        })
        .collect::<Result<_, HarmonicError>>()?;
    Ok(AdditivityReport { per_generator })
}

/// `max dist_T(xi(v + p), xi(v))` against `3 err`; injectivity asks for
/// `exceeds()`.
pub fn injectivity_check<T: Real>(
    spec: &XiSpec<T>,
    v: &IntegerField,
    p: &IntegerField,
    out: &BoxWindow,
) -> Result<Comparison<T>, HarmonicError> {
    let a = xi_apply(spec, v, out)?;
    let b = xi_apply(spec, &v.add(p)?, out)?;
    let (residual, err) = a.distance(&b)?;
    Ok(Comparison { residual, threshold: err + err + err })
}
