//! Moment conditions characterising the ideal `I_d = (f) + I^3` and the
//! constant `H_g(0)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{LaurentError, LaurentPoly};
use crate::scalar::Coefficient;

/// The four moment conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Condition {
    /// `sum g_k = 0`
    A,
    /// `sum g_k k_i = 0` for every axis `i`
    B,
    /// `sum g_k k_i k_j = 0` for `i != j`
    C,
    /// `sum g_k (k_i^2 - k_j^2) = 0` for `i != j`
    D,
}

/// First violated condition; axes are 0-based, `(i, i)` for single-axis conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailingCondition {
    pub condition: Condition,
    pub axes: Option<(usize, usize)>,
    pub value: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealCertificate {
    pub member: bool,
    pub failing_condition: Option<FailingCondition>,
    /// `c = sum g_k k_j^2`, the same for every `j` when all conditions hold.
    pub common_second_moment: Option<BigInt>,
}

impl fmt::Display for IdealCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "member={}", self.member)?;
        if let Some(fc) = &self.failing_condition {
            write!(f, " failing={:?}", fc.condition)?;
            if let Some((i, j)) = fc.axes {
                write!(f, " axes=({},{})", i + 1, j + 1)?;
            }
            write!(f, " value={}", fc.value)?;
        }
        if let Some(c) = &self.common_second_moment {
            write!(f, " c={c}")?;
        }
        Ok(())
    }
}

struct Moments {
    zeroth: BigInt,
    first: Vec<BigInt>,
    /// `second[i][j] = sum g_k k_i k_j`
    second: Vec<Vec<BigInt>>,
}

fn moments<C: Coefficient>(g: &LaurentPoly<C>) -> Moments {
    let d = g.dim();
    let mut m = Moments {
        zeroth: BigInt::zero(),
        first: vec![BigInt::zero(); d],
        second: vec![vec![BigInt::zero(); d]; d],
    };
    for (k, c) in g.terms() {
        let c = c.to_bigint();
        m.zeroth += &c;
        for i in 0..d {
            m.first[i] += &c * k[i];
            for j in 0..d {
                m.second[i][j] += &c * (k[i] * k[j]);
            }
        }
    }
    m
}

/// Evaluates conditions A to D exactly and reports the first violation.
pub fn ideal_certificate<C: Coefficient>(g: &LaurentPoly<C>) -> IdealCertificate {
    let d = g.dim();
    let m = moments(g);
    let fail = |condition, axes, value: BigInt| IdealCertificate {
        member: false,
        failing_condition: Some(FailingCondition { condition, axes, value }),
        common_second_moment: None,
    };
    if !m.zeroth.is_zero() {
        return fail(Condition::A, None, m.zeroth);
    }
    for i in 0..d {
        if !m.first[i].is_zero() {
            return fail(Condition::B, Some((i, i)), m.first[i].clone());
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            if !m.second[i][j].is_zero() {
                return fail(Condition::C, Some((i, j)), m.second[i][j].clone());
            }
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            let diff = &m.second[i][i] - &m.second[j][j];
            if !diff.is_zero() {
                return fail(Condition::D, Some((i, j)), diff);
            }
        }
    }
    IdealCertificate { member: true, failing_condition: None, common_second_moment: Some(m.second[0][0].clone()) }
}

/// `H_g(0) = -sum_k g_k k_j (k_j - 1) / 2`, which is independent of `j` for `g` in `I_d`.
pub fn hg0<C: Coefficient>(g: &LaurentPoly<C>) -> Result<BigInt, LaurentError> {
    let cert = ideal_certificate(g);
    if let Some(fc) = cert.failing_condition {
        return Err(LaurentError::NotInIdeal(fc.condition));
    }
    let per_axis = |j: usize| -> BigInt {
        let mut s = BigInt::zero();
        for (k, c) in g.terms() {
            let kj = k[j];
            s += c.to_bigint() * (kj * (kj - 1) / 2);
        }
        -s
    };
    let value = per_axis(0);
    for j in 1..g.dim() {
        assert_eq!(per_axis(j), value, "conditions B and D imply axis independence");
    }
    Ok(value)
}

/// `f^(d)`, `f^(d,gamma)` and the generating set `G_d` of `I_d`.
#[derive(Debug, Clone)]
pub struct StandardPolys {
    pub dim: usize,
    pub gamma: i64,
    pub f: LaurentPoly,
    pub f_gamma: LaurentPoly,
    pub generators: Vec<LaurentPoly>,
}

fn laplacian(dim: usize, gamma: i64) -> LaurentPoly {
    let mut terms = vec![(vec![0; dim], BigInt::from(gamma))];
    for axis in 0..dim {
        for s in [-1, 1] {
            let mut k = vec![0; dim];
            k[axis] = s;
            terms.push((k, -BigInt::one()));
        }
    }
    LaurentPoly::from_terms(dim, terms).expect("exponents have the right length")
}

/// Builds the standard polynomials.
///
/// For `d = 2` the generators are `(1-u1)^2 (1-u2)`, `(1-u1)(1-u2)^2` and
/// `(1-u1)^2 + (1-u2)^2`. For `d >= 3` they are `f` followed by
/// `(u_i-1)(u_j-1)(u_k-1)` for every multiset `i <= j <= k`.
pub fn standard_polys(dim: usize, gamma: i64) -> Result<StandardPolys, LaurentError> {
    if dim < 2 {
        return Err(LaurentError::DimensionTooSmall { min: 2, got: dim });
    }
    let min = 2 * dim as i64;
    if gamma < min {
        return Err(LaurentError::GammaTooSmall { min, got: gamma });
    }
    let one = LaurentPoly::one(dim);
    let x = |i: usize| &one - &LaurentPoly::variable(dim, i);
    let f = laplacian(dim, min);
    let generators = if dim == 2 {
        vec![
            &x(0).pow(2) * &x(1),
            &x(0) * &x(1).pow(2),
            &x(0).pow(2) + &x(1).pow(2),
        ]
    } else {
        let mut gens = vec![f.clone()];
        for i in 0..dim {
            for j in i..dim {
                for k in j..dim {
                    // (u_i - 1)(u_j - 1)(u_k - 1) = -(1-u_i)(1-u_j)(1-u_k)
                    gens.push(-(&(&x(i) * &x(j)) * &x(k)));
                }
            }
        }
        gens
    };
    Ok(StandardPolys { dim, gamma, f, f_gamma: laplacian(dim, gamma), generators })
}
