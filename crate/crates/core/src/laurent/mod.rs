//! Laurent polynomials over `Z^d` with exact integer coefficients.

mod divide;
mod ideal;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::scalar::Coefficient;
use crate::window::BoxWindow;

pub use divide::{default_quotient_bound, divide_by, Division};
pub use ideal::{
    hg0, ideal_certificate, standard_polys, Condition, FailingCondition, IdealCertificate, StandardPolys,
};
pub use parse::{parse_expression, parse_text, to_text};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension must be at least {min}, got {got}")]
    DimensionTooSmall { min: usize, got: usize },
    #[error("gamma must be at least 2d = {min}, got {got}")]
    GammaTooSmall { min: i64, got: i64 },
    #[error("polynomial is not in the ideal I_d (condition {0:?} fails)")]
    NotInIdeal(Condition),
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },
}

/// Binary ring operation selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingOp {
    Add,
    Sub,
    Mul,
}

/// A Laurent polynomial `sum_k g_k u^k` in `d` variables.
///
/// Terms are kept in a `BTreeMap`, so iteration is in lexicographic order of
/// exponent vectors and no stored coefficient is zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly<C: Coefficient = BigInt> {
    dim: usize,
    terms: BTreeMap<Vec<i64>, C>,
}

impl<C: Coefficient> LaurentPoly<C> {
    pub fn zero(dim: usize) -> Self {
        LaurentPoly { dim, terms: BTreeMap::new() }
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, C::one())
    }

    pub fn constant(dim: usize, c: C) -> Self {
        Self::monomial(vec![0; dim], c)
    }

    pub fn monomial(exponent: Vec<i64>, c: C) -> Self {
        let dim = exponent.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exponent, c);
        }
        LaurentPoly { dim, terms }
    }

    /// The variable `u_i` (0-based axis).
    pub fn variable(dim: usize, axis: usize) -> Self {
        assert!(axis < dim, "axis {axis} out of range for dimension {dim}");
        let mut k = vec![0; dim];
        k[axis] = 1;
        Self::monomial(k, C::one())
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self, LaurentError>
    where
        I: IntoIterator<Item = (Vec<i64>, C)>,
    {
        let mut p = Self::zero(dim);
        for (k, c) in terms {
            if k.len() != dim {
                return Err(LaurentError::DimensionMismatch { left: dim, right: k.len() });
            }
            p.add_term(k, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, k: Vec<i64>, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i64], &C)> {
        self.terms.iter().map(|(k, c)| (k.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: &[i64]) -> C {
        self.terms.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &[i64]> {
        self.terms.keys().map(|k| k.as_slice())
    }

    /// Lexicographically largest exponent.
    pub fn leading(&self) -> Option<(&[i64], &C)> {
        self.terms.iter().next_back().map(|(k, c)| (k.as_slice(), c))
    }

    /// Smallest rectangle containing the support, `None` for the zero polynomial.
    pub fn bounding_box(&self) -> Option<BoxWindow> {
        let mut keys = self.terms.keys();
        let first = keys.next()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for k in keys {
            for axis in 0..self.dim {
                lo[axis] = lo[axis].min(k[axis]);
                hi[axis] = hi[axis].max(k[axis]);
            }
        }
        let size = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
        BoxWindow::new(lo, size).ok()
    }

    /// `max_k |k|_max` over the support (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|k| crate::window::max_norm(k) as usize).max().unwrap_or(0)
    }

    fn check_dim(&self, other: &Self) -> Result<(), LaurentError> {
        if self.dim != other.dim {
            return Err(LaurentError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, LaurentError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, LaurentError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, LaurentError> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let k = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(k, ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        LaurentPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v.clone() * c.clone())).collect(),
        }
    }

    /// Multiplication by the monomial `u^shift`.
    pub fn shift(&self, shift: &[i64]) -> Self {
        assert_eq!(shift.len(), self.dim);
        LaurentPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.iter().zip(shift).map(|(a, b)| a + b).collect(), v.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::one(self.dim);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// `p*(u) = p(u^{-1})`: the coefficient at `k` becomes the coefficient at `-k`.
    pub fn involution(&self) -> Self {
        LaurentPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, v)| (k.iter().map(|x| -x).collect(), v.clone())).collect(),
        }
    }

    /// Sum of coefficients, i.e. the value at `u = (1, ..., 1)`.
    pub fn coefficient_sum(&self) -> BigInt {
        self.terms.values().map(|c| c.to_bigint()).sum()
    }

    pub fn to_big(&self) -> LaurentPoly<BigInt> {
        LaurentPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c.to_bigint())).collect(),
        }
    }

    /// `sum_k |g_k|` as a float.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().unwrap_or(f64::INFINITY).abs()).sum()
    }

    /// Coefficients as `f64` pairs, for numerical convolution.
    pub fn float_terms(&self) -> Vec<(Vec<i64>, f64)> {
        self.terms.iter().map(|(k, c)| (k.clone(), c.to_f64().unwrap_or(f64::NAN))).collect()
    }
}

impl LaurentPoly<BigInt> {
    /// Converts to a machine-integer coefficient type if every coefficient fits.
    pub fn try_narrow<C: Coefficient>(&self) -> Option<LaurentPoly<C>> {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let v = c.to_i128().and_then(C::from_i128)?;
            terms.insert(k.clone(), v);
        }
        Some(LaurentPoly { dim: self.dim, terms })
    }
}

/// Applies one of the three ring operations.
pub fn ring_ops<C: Coefficient>(
    p: &LaurentPoly<C>,
    q: &LaurentPoly<C>,
    op: RingOp,
) -> Result<LaurentPoly<C>, LaurentError> {
    match op {
        RingOp::Add => p.checked_add(q),
        RingOp::Sub => p.checked_sub(q),
        RingOp::Mul => p.checked_mul(q),
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<'a, C: Coefficient> $tr<&'a LaurentPoly<C>> for &'a LaurentPoly<C> {
            type Output = LaurentPoly<C>;

            /// Panics on dimension mismatch; use the `checked_*` method to handle it.
            fn $method(self, rhs: &'a LaurentPoly<C>) -> LaurentPoly<C> {
                self.$checked(rhs).expect("Laurent polynomial dimension mismatch")
            }
        }

        impl<C: Coefficient> $tr for LaurentPoly<C> {
            type Output = LaurentPoly<C>;

            fn $method(self, rhs: LaurentPoly<C>) -> LaurentPoly<C> {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl<C: Coefficient> Neg for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;

    fn neg(self) -> LaurentPoly<C> {
        self.scale(&-C::one())
    }
}

impl<C: Coefficient> Neg for LaurentPoly<C> {
    type Output = LaurentPoly<C>;

    fn neg(self) -> LaurentPoly<C> {
        -&self
    }
}

impl<C: Coefficient> fmt::Debug for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly[d={}]({})", self.dim, self)
    }
}

impl<C: Coefficient> fmt::Display for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let is_const = k.iter().all(|&e| e == 0);
            if is_const || !abs.is_one() {
                write!(f, "{abs}")?;
            }
            let mut first = is_const || !abs.is_one();
            for (axis, &e) in k.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if first {
                    write!(f, "*")?;
                }
                first = true;
                write!(f, "u{}", axis + 1)?;
                if e != 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}
