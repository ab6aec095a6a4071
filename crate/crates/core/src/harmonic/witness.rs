//! Integer fields annihilated by every `xi_g`, `g` in the standard generators.

use num_rational::Ratio;
use num_traits::ToPrimitive;

use super::{Extension, HarmonicError, IntegerField};
use crate::laurent::standard_polys;
use crate::window::BoxWindow;
use crate::Poly;

/// `y_n = beta * profile[n_axis mod p]`, constant along the other axes,
/// shifted by the integer `offset` after applying `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicProfile {
    pub axis: usize,
    pub beta: Ratio<i64>,
    pub profile: Vec<i64>,
    pub offset: i64,
}

impl PeriodicProfile {
    /// `y_n = (n_axis mod 2) / 4`.
    pub fn quarter_alternating(axis: usize) -> Self {
        PeriodicProfile { axis, beta: Ratio::new(1, 4), profile: vec![0, 1], offset: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessKind {
    /// The constant field `m`.
    Constant(i64),
    /// `f_gamma * h` for a finitely supported `h`.
    FMultiple(Poly),
    /// `f * y + c(y) + offset` for a periodic `y` whose third differences are
    /// integers (critical model only).
    Periodic(PeriodicProfile),
}

pub fn kernel_witness(kind: &WitnessKind, dim: usize, gamma: i64) -> Result<IntegerField, HarmonicError> {
    match kind {
        WitnessKind::Constant(m) => Ok(IntegerField::constant(dim, *m)),
        WitnessKind::FMultiple(h) => {
            let f = standard_polys(dim, gamma)?.f_gamma;
            let v = h.checked_mul(&f)?;
            let Some(bb) = v.bounding_box() else {
                return Ok(IntegerField::constant(dim, 0));
            };
            let values = bb
                .sites()
                .map(|n| {
                    v.coeff(&n)
                        .to_i64()
                        .ok_or_else(|| HarmonicError::InvalidParameter("coefficient exceeds i64".into()))
                })
                .collect::<Result<_, _>>()?;
            IntegerField::new(bb, values, Extension::Zero)
        }
        WitnessKind::Periodic(p) => periodic(p, dim, gamma),
    }
}

fn periodic(p: &PeriodicProfile, dim: usize, gamma: i64) -> Result<IntegerField, HarmonicError> {
    if gamma != 2 * dim as i64 {
        return Err(HarmonicError::InvalidParameter("periodic witnesses need the critical model".into()));
    }
    if p.axis >= dim || p.profile.is_empty() {
        return Err(HarmonicError::InvalidParameter("axis out of range or empty profile".into()));
    }
    let len = p.profile.len() as i64;
    let s = |j: i64| Ratio::from_integer(p.profile[j.rem_euclid(len) as usize]);
    for j in 0..len {
        let third = p.beta * (s(j) - s(j - 1) * 3 + s(j - 2) * 3 - s(j - 3));
        if !third.is_integer() {
            return Err(HarmonicError::InvalidParameter(format!(
                "third difference {third} of beta * profile is not an integer"
            )));
        }
    }
    // f * y along the profile axis; the other axes cancel
    let fy: Vec<Ratio<i64>> = (0..len).map(|j| p.beta * (s(j) * 2 - s(j + 1) - s(j - 1))).collect();
    let frac = |r: Ratio<i64>| r - r.floor();
    let c = frac(-fy[0]);
    let mut values = Vec::with_capacity(fy.len());
    for x in &fy {
        let v = *x + c;
        if !v.is_integer() {
            return Err(HarmonicError::InvalidParameter("f * y has no common fractional part".into()));
        }
        values.push(v.to_integer() + p.offset);
    }
    let mut size = vec![1usize; dim];
    size[p.axis] = values.len();
    let window = BoxWindow::new(vec![0; dim], size).map_err(|e| HarmonicError::InvalidParameter(e.to_string()))?;
    IntegerField::new(window, values, Extension::Periodic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse_expression;

    #[test]
    fn quarter_alternating_gives_parity() {
        let v = kernel_witness(&WitnessKind::Periodic(PeriodicProfile::quarter_alternating(0)), 2, 4).unwrap();
        assert_eq!(v.get(&[0, 5]), 0);
        assert_eq!(v.get(&[1, -3]), 1);
        assert_eq!(v.get(&[-1, 0]), 1);
    }

    #[test]
    fn invalid_beta_rejected() {
        let p = PeriodicProfile { axis: 0, beta: Ratio::new(1, 8), profile: vec![0, 1], offset: 0 };
        assert!(kernel_witness(&WitnessKind::Periodic(p), 2, 4).is_err());
        let p = PeriodicProfile::quarter_alternating(0);
        assert!(kernel_witness(&WitnessKind::Periodic(p), 2, 5).is_err());
    }

    #[test]
    fn f_multiple_field() {
        let h = parse_expression("u1 - 2*u2", 2).unwrap();
        let v = kernel_witness(&WitnessKind::FMultiple(h), 2, 4).unwrap();
        assert_eq!(v.get(&[1, 0]), 4);
        assert_eq!(v.get(&[0, 1]), -8);
        assert_eq!(v.get(&[1, 1]), 1);
        assert_eq!(v.get(&[9, 9]), 0);
        assert_eq!(v.values.iter().sum::<i64>(), 0);
    }
}
