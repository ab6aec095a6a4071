use rand::Rng;

use super::burn::burn_rounds;
use super::{check_model, stabilize, HeightConfig, Odometer, SandpileError};
use crate::window::BoxWindow;

fn require_recurrent(v: &HeightConfig) -> Result<(), SandpileError> {
    v.check_stable()?;
    if burn_rounds(&v.heights, &v.window, &v.window.strides()).contains(&0) {
        return Err(SandpileError::NotRecurrent);
    }
    Ok(())
}

/// `stabilize(v + v')` together with its odometer.
pub fn group_add_with_odometer(v: &HeightConfig, w: &HeightConfig) -> Result<(HeightConfig, Odometer), SandpileError> {
    require_recurrent(v)?;
    require_recurrent(w)?;
    Ok(stabilize(&v.add(w)?))
}

/// The sandpile-group operation on recurrent configurations.
pub fn group_add(v: &HeightConfig, w: &HeightConfig) -> Result<HeightConfig, SandpileError> {
    group_add_with_odometer(v, w).map(|p| p.0)
}

/// Neutral element `(2m - (2m)°)°` with `m` the all-`(gamma-1)` configuration.
pub fn identity_element(window: &BoxWindow, gamma: i64) -> Result<HeightConfig, SandpileError> {
    let m = HeightConfig::max_stable(window.clone(), gamma)?;
    let two_m = m.add(&m)?;
    let (s, _) = stabilize(&two_m);
    Ok(stabilize(&two_m.sub(&s)?).0)
}

/// A recurrent configuration obtained by dropping random grains on the
/// maximal configuration and stabilizing, twice.
pub fn random_recurrent<R: Rng + ?Sized>(window: &BoxWindow, gamma: i64, rng: &mut R) -> Result<HeightConfig, SandpileError> {
    check_model(window.dim(), gamma)?;
    let mut v = HeightConfig::max_stable(window.clone(), gamma)?;
    for _ in 0..2 {
        for h in v.heights.iter_mut() {
            *h += rng.gen_range(0..gamma);
        }
        v = stabilize(&v).0;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sandpile::is_recurrent;

    #[test]
    fn two_site_group() {
        let w = BoxWindow::with_extents(vec![1, 2]).unwrap();
        let max = HeightConfig::max_stable(w.clone(), 4).unwrap();
        let (s, odo) = group_add_with_odometer(&max, &max).unwrap();
        assert_eq!(s, max);
        assert_eq!(odo.counts, vec![1, 1]);
        assert_eq!(odo.total_mass_lost, 6);
        let e = identity_element(&w, 4).unwrap();
        assert!(is_recurrent(&e).unwrap());
        let zero = HeightConfig::zeros(w, 4).unwrap();
        assert_eq!(group_add(&zero, &max), Err(SandpileError::NotRecurrent));
    }
}
