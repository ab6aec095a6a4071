use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::{torus_reduce, HarmonicError, IntegerField, TorusPoint};
use crate::green::{decay_profile, multiplier_table, DecayProfile, GreenTable};
use crate::laurent::{divide_by, hg0, standard_polys, Division};
use crate::scalar::Real;
use crate::window::{max_norm, BoxWindow};
use crate::Poly;

/// Safety margin subtracted from the fitted decay rate before extrapolating.
const DECAY_MARGIN: f64 = 0.5;

/// A truncated convolution kernel `z = g* . w` on `Q_K` with bounds on the
/// discarded part.
#[derive(Debug, Clone, PartialEq)]
pub struct XiSpec<T: Real> {
    pub g: Poly,
    pub dim: usize,
    pub gamma: i64,
    pub trunc_radius: usize,
    /// `z_k` for `|k|_max <= trunc_radius`, row-major on the centered cube.
    pub kernel: Vec<T>,
    /// Error bound on each kernel entry.
    pub coeff_accuracy: T,
    /// Bound on `sum_{|k|_max > trunc_radius} |z_k|`.
    pub tail_l1: T,
    /// `sum_k z_k`: `H_g(0)` in the critical model, `g(1) / (gamma - 2d)`
    /// otherwise.
    pub total: T,
    /// `g` is a multiple of the toppling polynomial; the kernel is then an
    /// exact integer polynomial and `xi_g` vanishes on integer fields.
    pub exact: bool,
    pub profile: Option<DecayProfile>,
    /// Pointwise bound `|z_k| <= c |k|^q` used beyond the measured shells.
    pub envelope: Option<(f64, f64)>,
}

impl<T: Real> XiSpec<T> {
    /// Uses the full radius `table.radius - deg g`.
    pub fn new(g: &Poly, table: &GreenTable<T>) -> Result<Self, HarmonicError> {
        Self::with_truncation(g, table, None)
    }

    pub fn with_truncation(g: &Poly, table: &GreenTable<T>, trunc: Option<usize>) -> Result<Self, HarmonicError> {
        if g.dim() != table.dim {
            return Err(HarmonicError::Mismatch(format!("g has d={}, table has d={}", g.dim(), table.dim)));
        }
        let f = standard_polys(table.dim, table.gamma)?.f_gamma;
        if let Division::Quotient(q) = divide_by(g, &f, None)? {
            let z = q.involution();
            let r = z.degree();
            let w = BoxWindow::centered(table.dim, r);
            let mut kernel = vec![T::zero(); w.len()];
            for (k, c) in z.float_terms() {
                kernel[w.index_of(&k).unwrap()] = T::from_f64_lossy(c);
            }
            let total = kernel.iter().copied().sum();
            return Ok(XiSpec {
                g: g.clone(),
                dim: table.dim,
                gamma: table.gamma,
                trunc_radius: r,
                kernel,
                coeff_accuracy: T::zero(),
                tail_l1: T::zero(),
                total,
                exact: true,
                profile: None,
                envelope: None,
            });
        }
        let total = if table.is_critical() {
            T::from_f64_lossy(hg0(g)?.to_f64().unwrap_or(f64::NAN))
        } else {
            let s = g.coefficient_sum().to_f64().unwrap_or(f64::NAN);
            T::from_f64_lossy(s / (table.gamma - 2 * table.dim as i64) as f64)
        };
        let mt = multiplier_table(g, table).map_err(|e| HarmonicError::Green(e.to_string()))?;
        let full = mt.window();
        let floor = (mt.accuracy * T::from_f64_lossy(10.0)).to_f64_lossy();
        let profile = decay_profile(&mt.values, &full, floor).map_err(|e| HarmonicError::Green(e.to_string()))?;
        let extrapolated = profile.tail_bound(DECAY_MARGIN).ok_or(HarmonicError::NotSummable(profile.exponent))?;
        let k = trunc.unwrap_or(mt.radius);
        if k > mt.radius {
            return Err(HarmonicError::InvalidParameter(format!(
                "truncation radius {k} exceeds {}",
                mt.radius
            )));
        }
        // measured shells between the truncation and the table edge
        let measured: f64 = profile.shell_l1[k + 1..].iter().sum();
        let measured_sites = full.sites().filter(|n| max_norm(n) > k as i64).count();
        let tail_l1 = T::from_f64_lossy(measured + extrapolated)
            + mt.accuracy * T::from_usize_lossy(measured_sites);
        let w = BoxWindow::centered(table.dim, k);
        let kernel = w.sites().map(|n| mt.get(&n).unwrap()).collect();
        let envelope = profile.envelope(DECAY_MARGIN);
        Ok(XiSpec {
            g: g.clone(),
            dim: table.dim,
            gamma: table.gamma,
            trunc_radius: k,
            kernel,
            coeff_accuracy: mt.accuracy,
            tail_l1,
            total,
            exact: false,
            profile: Some(profile),
            envelope,
        })
    }

    pub fn kernel_window(&self) -> BoxWindow {
        BoxWindow::centered(self.dim, self.trunc_radius)
    }

    pub fn kernel_l1(&self) -> T {
        self.kernel.iter().map(|z| z.abs()).sum()
    }

    /// `z_k` for `|k|_max <= trunc_radius`, else 0.
    pub fn z(&self, k: &[i64]) -> T {
        self.kernel_window().index_of(k).map_or(T::zero(), |i| self.kernel[i])
    }

    /// Floating point error bound of one evaluation of `xi_apply` on `v`.
    pub fn roundoff(&self, v: &IntegerField) -> T {
        if self.exact {
            return T::zero();
        }
        let (base, dev, terms) = match v.background() {
            Some(c) => {
                let dev = v.values.iter().map(|x| (x - c).abs()).max().unwrap_or(0);
                let nnz = v.values.iter().filter(|&&x| x != c).count();
                (T::from_i64_lossy(c) * self.total, T::from_i64_lossy(dev), nnz)
            }
            None => {
                let mean = T::from_i64_lossy(v.values.iter().sum()) / T::from_usize_lossy(v.values.len());
                let dev = v.values.iter().fold(T::zero(), |a, &x| a.max((T::from_i64_lossy(x) - mean).abs()));
                (mean * self.total, dev, self.kernel.len())
            }
        };
        T::epsilon() * T::from_usize_lossy(2 * terms + 4) * (base.abs() + dev * self.kernel_l1())
    }

    /// Bound on `|z_k|` for `|k|_max = r > trunc_radius`.
    pub fn beyond(&self, r: usize) -> T {
        let Some(p) = &self.profile else {
            return T::zero();
        };
        let measured = if r <= p.radius { Some(p.shell_max[r]) } else { None };
        let v = match (measured, self.envelope) {
            (Some(m), _) => m,
            (None, Some((c, q))) => c * (r as f64).powf(q),
            (None, None) => 0.0,
        };
        T::from_f64_lossy(v) + self.coeff_accuracy
    }
}

/// `x_n = (sum_k v_{n-k} z_k) mod 1` on `out`.
///
/// The background of the field (its constant value outside the window, or
/// its mean for periodic fields) is convolved with the full kernel through
/// `total`; the remainder is convolved with the truncated kernel. Errors are
/// bounded per site: window sites farther than the truncation radius are
/// bounded with the decay envelope, periodic remainders with `tail_l1`.
pub fn xi_apply<T: Real>(spec: &XiSpec<T>, v: &IntegerField, out: &BoxWindow) -> Result<TorusPoint<T>, HarmonicError> {
    if v.dim() != spec.dim || out.dim() != spec.dim {
        return Err(HarmonicError::Mismatch("dimension of field, window and kernel differ".into()));
    }
    if spec.exact {
        return Ok(TorusPoint::zeros(out.clone()));
    }
    let kw = spec.kernel_window();
    let kstrides = kw.strides();
    let r = spec.trunc_radius as i64;
    let d = spec.dim;
    let kidx = |diff: &[i64]| -> usize {
        (0..d).map(|a| (diff[a] + r) as usize * kstrides[a]).sum()
    };
    let sites: Vec<Vec<i64>> = out.sites().collect();
    let results: Vec<(T, T)> = match v.background() {
        Some(c) => {
            let base = T::from_i64_lossy(c) * spec.total;
            let sparse: Vec<(Vec<i64>, T)> = v
                .window
                .sites()
                .zip(&v.values)
                .filter(|(_, &x)| x != c)
                .map(|(m, &x)| (m, T::from_i64_lossy(x - c)))
                .collect();
            let roundoff = spec.roundoff(v);
            sites
                .par_iter()
                .map(|n| {
                    let mut diff = vec![0i64; d];
                    let mut s = base;
                    let mut near = T::zero();
                    let mut far = T::zero();
                    for (m, a) in &sparse {
                        for i in 0..d {
                            diff[i] = n[i] - m[i];
                        }
                        let dist = max_norm(&diff);
                        if dist <= r {
                            s += *a * spec.kernel[kidx(&diff)];
                            near += a.abs();
                        } else {
                            far += a.abs() * spec.beyond(dist as usize);
                        }
                    }
                    (torus_reduce(s), far + near * spec.coeff_accuracy + roundoff)
                })
                .collect()
        }
        None => {
            let mean = T::from_i64_lossy(v.values.iter().sum()) / T::from_usize_lossy(v.values.len());
            let dev = v.values.iter().fold(T::zero(), |a, &x| a.max((T::from_i64_lossy(x) - mean).abs()));
            let base = mean * spec.total;
            let ks: Vec<Vec<i64>> = kw.sites().collect();
            let e = dev * (spec.tail_l1 + T::from_usize_lossy(ks.len()) * spec.coeff_accuracy) + spec.roundoff(v);
            sites
                .par_iter()
                .map(|n| {
                    let mut m = vec![0i64; d];
                    let mut s = base;
                    for (k, z) in ks.iter().zip(&spec.kernel) {
                        for i in 0..d {
                            m[i] = n[i] - k[i];
                        }
                        s += (T::from_i64_lossy(v.get(&m)) - mean) * *z;
                    }
                    (torus_reduce(s), e)
                })
                .collect()
        }
    };
    let (values, err) = results.into_iter().unzip();
    Ok(TorusPoint { window: out.clone(), values, err })
}

/// Component-wise `xi_g` for every spec.
pub fn xi_tuple<T: Real>(
    specs: &[XiSpec<T>],
    v: &IntegerField,
    out: &BoxWindow,
) -> Result<Vec<TorusPoint<T>>, HarmonicError> {
    specs.iter().map(|s| xi_apply(s, v, out)).collect()
}
