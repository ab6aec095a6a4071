//! Exact division `g = h * f` with `supp(h)` inside a prescribed box.
//!
//! The convolution constraints `sum_m h_m f_{n-m} = g_n` are triangular with
//! respect to the lexicographic order of exponents: the lex-largest term of
//! `h * f` is the product of the lex-largest terms of the factors. The system
//! is therefore solved by back substitution from the top, one unknown per
//! step, in exact integer arithmetic.

use super::{LaurentError, LaurentPoly};
use crate::scalar::Coefficient;
use crate::window::BoxWindow;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Division<C: Coefficient> {
    /// `h` with `h * f = g` and support inside the bound.
    Quotient(LaurentPoly<C>),
    /// No integer quotient supported in the bound exists.
    NotDivisible,
    /// `supp(g)` is not contained in `bound + supp(f)`, so no quotient within
    /// the bound can exist.
    BoundTooSmall,
}

impl<C: Coefficient> Division<C> {
    pub fn quotient(self) -> Option<LaurentPoly<C>> {
        match self {
            Division::Quotient(h) => Some(h),
            _ => None,
        }
    }
}

/// The box of exponents `m` with `bbox(f) + m` inside `bbox(g)`.
/// `None` when `g` is zero or `bbox(g)` is narrower than `bbox(f)`.
pub fn default_quotient_bound<C: Coefficient>(g: &LaurentPoly<C>, f: &LaurentPoly<C>) -> Option<BoxWindow> {
    let gb = g.bounding_box()?;
    let fb = f.bounding_box()?;
    let mut size = Vec::with_capacity(g.dim());
    for (sg, sf) in gb.size().iter().zip(fb.size()) {
        if sg < sf {
            return None;
        }
        size.push(sg - sf + 1);
    }
    let lo = gb.lo().iter().zip(fb.lo()).map(|(a, b)| a - b).collect();
    BoxWindow::new(lo, size).ok()
}

/// Finds `h` with `h * f = g` and `supp(h)` inside `bound` (default:
/// [`default_quotient_bound`]).
pub fn divide_by<C: Coefficient>(
    g: &LaurentPoly<C>,
    f: &LaurentPoly<C>,
    bound: Option<&BoxWindow>,
) -> Result<Division<C>, LaurentError> {
    if g.dim() != f.dim() {
        return Err(LaurentError::DimensionMismatch { left: g.dim(), right: f.dim() });
    }
    let (lead_exp, lead_coeff) = match f.leading() {
        Some((k, c)) => (k.to_vec(), c.clone()),
        None => return Err(LaurentError::DivisionByZero),
    };
    if g.is_zero() {
        return Ok(Division::Quotient(LaurentPoly::zero(g.dim())));
    }
    let default_bound;
    let bound = match bound {
        Some(b) => {
            if b.dim() != g.dim() {
                return Err(LaurentError::DimensionMismatch { left: g.dim(), right: b.dim() });
            }
            b
        }
        None => match default_quotient_bound(g, f) {
            Some(b) => {
                default_bound = b;
                &default_bound
            }
            None => return Ok(Division::NotDivisible),
        },
    };
    let reach = bound.minkowski_sum(&f.bounding_box().expect("f is nonzero"));
    if g.support().any(|k| !reach.contains(k)) {
        return Ok(Division::BoundTooSmall);
    }

    let mut remainder = g.clone();
    let mut quotient = LaurentPoly::zero(g.dim());
    while let Some((top, c)) = remainder.leading() {
        let m: Vec<i64> = top.iter().zip(&lead_exp).map(|(a, b)| a - b).collect();
        if !bound.contains(&m) {
            return Ok(Division::NotDivisible);
        }
        let (q, r) = c.div_rem(&lead_coeff);
        if !r.is_zero() {
            return Ok(Division::NotDivisible);
        }
        let step = LaurentPoly::monomial(m, q);
        remainder = &remainder - &(&step * f);
        quotient = &quotient + &step;
    }
    Ok(Division::Quotient(quotient))
}
