//! The fundamental solution `w` of `f^(d,gamma) * w = delta_0` on centered
//! boxes, its random-walk series, multiplier tables `g* . w`, decay fits and
//! the entropy integral.

mod decay;
mod gauss;
mod quadrature;
mod walk;

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::laurent::LaurentPoly;
use crate::scalar::{Coefficient, Real};
use crate::window::BoxWindow;

pub use decay::{decay_profile, l1_partial_sums, DecayProfile};
pub use gauss::gauss_legendre;
pub use quadrature::{compute_green, entropy_quadrature, EntropyEstimate};
pub use walk::{series_table, walk_series_oracle, OracleValue};

#[derive(Debug, Error)]
pub enum GreenError<T: Real> {
    #[error("need d >= 2 and gamma >= 2d, got d={dim}, gamma={gamma}")]
    InvalidModel { dim: usize, gamma: i64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature reached accuracy {achieved:e} but the target was {target:e}")]
    Unconverged { achieved: f64, target: f64, table: Box<GreenTable<T>> },
    #[error("entropy quadrature reached accuracy {:e} but the target was {target:e}", estimate.accuracy)]
    EntropyUnconverged { estimate: EntropyEstimate, target: f64 },
    #[error("polynomial support (degree {degree}) does not fit a table of radius {radius}")]
    SupportTooLarge { degree: usize, radius: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("decay fit undefined: {0}")]
    DegenerateFit(String),
    #[error("malformed table: {0}")]
    Format(String),
}

pub(crate) fn check_model<T: Real>(dim: usize, gamma: i64) -> Result<(), GreenError<T>> {
    if dim < 2 || gamma < 2 * dim as i64 {
        return Err(GreenError::InvalidModel { dim, gamma });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    Series,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::Series => "series",
        }
    }
}

/// How the singular point `t = 0` of the critical integrand is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityTreatment {
    /// Plain midpoint rule; nodes avoid the singular point. Slow.
    None,
    /// Midpoint rule on `w_n - w_0`, with `w_0` from the polar patch.
    Subtraction,
    /// Gauss-Legendre in Duffy (corner-collapsing) coordinates, which makes
    /// the critical integrand analytic.
    PolarPatch,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
    pub singularity_treatment: SingularityTreatment,
    pub target_abs_error: f64,
    /// Upper bound on nodes per axis during refinement.
    pub max_nodes_per_axis: usize,
}

impl QuadratureSpec {
    /// Defaults: target `1e-6` for critical models, `1e-8` for dissipative ones.
    pub fn default_for(dim: usize, gamma: i64) -> Self {
        let critical = gamma == 2 * dim as i64;
        QuadratureSpec {
            nodes_per_axis: 16,
            singularity_treatment: SingularityTreatment::PolarPatch,
            target_abs_error: if critical { 1e-6 } else { 1e-8 },
            max_nodes_per_axis: match dim {
                2 => 1 << 14,
                3 => 1 << 10,
                4 => 1 << 7,
                _ => 1 << 5,
            },
        }
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.target_abs_error = target;
        self
    }

    pub fn with_treatment(mut self, t: SingularityTreatment) -> Self {
        self.singularity_treatment = t;
        self
    }

    pub(crate) fn validate<T: Real>(&self) -> Result<(), GreenError<T>> {
        if self.nodes_per_axis < 8 {
            return Err(GreenError::InvalidParameter("nodes_per_axis must be >= 8".into()));
        }
        if self.target_abs_error.is_nan() || self.target_abs_error <= 0.0 {
            return Err(GreenError::InvalidParameter("target_abs_error must be positive".into()));
        }
        Ok(())
    }
}

/// Values of `w^(d)` or `w^(d,gamma)` on `Q_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenTable<T: Real> {
    pub dim: usize,
    pub gamma: i64,
    pub radius: usize,
    pub values: Vec<T>,
    /// Uniform absolute error bound for every entry.
    pub accuracy: T,
    pub method: Method,
}

impl<T: Real> GreenTable<T> {
    pub fn window(&self) -> BoxWindow {
        BoxWindow::centered(self.dim, self.radius)
    }

    pub fn is_critical(&self) -> bool {
        self.gamma == 2 * self.dim as i64
    }

    pub fn get(&self, n: &[i64]) -> Option<T> {
        self.window().index_of(n).map(|i| self.values[i])
    }

    /// Builds a table from a function of the canonical representative
    /// (absolute values sorted in decreasing order) of each site.
    pub(crate) fn from_canonical(
        dim: usize,
        gamma: i64,
        radius: usize,
        method: Method,
        accuracy: T,
        lookup: impl Fn(&[i64]) -> T,
    ) -> Self {
        let window = BoxWindow::centered(dim, radius);
        let values = window.sites().map(|n| lookup(&canonical(&n))).collect();
        GreenTable { dim, gamma, radius, values, accuracy, method }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# d={} gamma={} R={} accuracy={:e} method={}\n",
            self.dim,
            self.gamma,
            self.radius,
            self.accuracy.to_f64_lossy(),
            self.method.as_str()
        );
        for (n, v) in self.window().sites().zip(&self.values) {
            for k in &n {
                write!(out, "{k},").unwrap();
            }
            writeln!(out, "{:.17e}", v.to_f64_lossy()).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, GreenError<T>> {
        let bad = |m: &str| GreenError::Format(m.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty input"))?;
        let header = header.strip_prefix('#').ok_or_else(|| bad("missing header"))?;
        let (mut dim, mut gamma, mut radius, mut accuracy, mut method) = (None, None, None, None, None);
        for field in header.split_whitespace() {
            let (k, v) = field.split_once('=').ok_or_else(|| bad("header fields must be key=value"))?;
            match k {
                "d" => dim = v.parse::<usize>().ok(),
                "gamma" => gamma = v.parse::<i64>().ok(),
                "R" => radius = v.parse::<usize>().ok(),
                "accuracy" => accuracy = v.parse::<f64>().ok(),
                "method" => {
                    method = match v {
                        "quadrature" => Some(Method::Quadrature),
                        "series" => Some(Method::Series),
                        _ => None,
                    }
                }
                _ => return Err(bad("unknown header field")),
            }
        }
        let (dim, gamma, radius, accuracy, method) = match (dim, gamma, radius, accuracy, method) {
            (Some(a), Some(b), Some(c), Some(d), Some(e)) => (a, b, c, d, e),
            _ => return Err(bad("incomplete header")),
        };
        check_model::<T>(dim, gamma)?;
        let window = BoxWindow::centered(dim, radius);
        let mut values = vec![T::nan(); window.len()];
        let mut seen = 0usize;
        for line in lines {
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            if parts.len() != dim + 1 {
                return Err(bad("wrong number of columns"));
            }
            let n: Vec<i64> =
                parts[..dim].iter().map(|p| p.parse()).collect::<Result<_, _>>().map_err(|_| bad("bad site"))?;
            let v: f64 = parts[dim].parse().map_err(|_| bad("bad value"))?;
            let idx = window.index_of(&n).ok_or_else(|| bad("site outside the box"))?;
            if !values[idx].is_nan() {
                return Err(bad("duplicate site"));
            }
            values[idx] = T::from_f64_lossy(v);
            seen += 1;
        }
        if seen != window.len() {
            return Err(bad("missing sites"));
        }
        Ok(GreenTable { dim, gamma, radius, values, accuracy: T::from_f64_lossy(accuracy), method })
    }
}

/// Absolute values sorted in decreasing order: the orbit representative under
/// coordinate permutations and sign flips.
pub fn canonical(n: &[i64]) -> Vec<i64> {
    let mut c: Vec<i64> = n.iter().map(|x| x.abs()).collect();
    c.sort_unstable_by(|a, b| b.cmp(a));
    c
}

/// All canonical sites of `Q_R`.
pub(crate) fn canonical_sites(dim: usize, radius: usize) -> Vec<Vec<i64>> {
    fn rec(dim: usize, bound: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for x in (0..=bound).rev() {
            prefix.push(x);
            rec(dim, x, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, radius as i64, &mut Vec::new(), &mut out);
    out
}

/// `max_{|n|_max <= R-1} |(f^(d,gamma) . w)_n - delta_0(n)|`.
pub fn fundamental_residual<T: Real>(table: &GreenTable<T>) -> T {
    let window = table.window();
    let gamma = T::from_i64_lossy(table.gamma);
    let r = table.radius as i64;
    let mut worst = T::zero();
    let mut probe = vec![0i64; table.dim];
    for (idx, n) in window.sites().enumerate() {
        if n.iter().any(|x| x.abs() >= r) {
            continue;
        }
        let mut s = gamma * table.values[idx];
        for axis in 0..table.dim {
            probe.copy_from_slice(&n);
            for step in [-1, 1] {
                probe[axis] = n[axis] + step;
                s -= table.values[window.index_of(&probe).unwrap()];
            }
        }
        if n.iter().all(|&x| x == 0) {
            s -= T::one();
        }
        worst = worst.max(s.abs());
    }
    worst
}

/// `v = g* . w`, i.e. `v_n = sum_k g_k w_{n+k}`, on the box where every term is tabulated.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierTable<T: Real> {
    pub dim: usize,
    pub gamma: i64,
    pub radius: usize,
    pub values: Vec<T>,
    /// `||g||_1` times the table accuracy, plus round-off.
    pub accuracy: T,
}

impl<T: Real> MultiplierTable<T> {
    pub fn window(&self) -> BoxWindow {
        BoxWindow::centered(self.dim, self.radius)
    }

    pub fn get(&self, n: &[i64]) -> Option<T> {
        self.window().index_of(n).map(|i| self.values[i])
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }
}

pub fn multiplier_table<T: Real, C: Coefficient>(
    g: &LaurentPoly<C>,
    table: &GreenTable<T>,
) -> Result<MultiplierTable<T>, GreenError<T>> {
    if g.dim() != table.dim {
        return Err(GreenError::DimensionMismatch(g.dim(), table.dim));
    }
    let degree = g.degree();
    if degree >= table.radius {
        return Err(GreenError::SupportTooLarge { degree, radius: table.radius });
    }
    let radius = table.radius - degree;
    let out = BoxWindow::centered(table.dim, radius);
    let src = table.window();
    let terms: Vec<(Vec<i64>, T)> =
        g.float_terms().into_iter().map(|(k, c)| (k, T::from_f64_lossy(c))).collect();
    let mut probe = vec![0i64; table.dim];
    let values = out
        .sites()
        .map(|n| {
            let mut s = T::zero();
            for (k, c) in &terms {
                for axis in 0..table.dim {
                    probe[axis] = n[axis] + k[axis];
                }
                s += *c * table.values[src.index_of(&probe).unwrap()];
            }
            s
        })
        .collect();
    let l1 = T::from_f64_lossy(g.l1_norm());
    let accuracy = l1 * (table.accuracy + T::roundoff_floor());
    Ok(MultiplierTable { dim: table.dim, gamma: table.gamma, radius, values, accuracy })
}
