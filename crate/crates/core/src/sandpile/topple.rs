use std::collections::VecDeque;

use rand::Rng;

use super::{HeightConfig, SandpileError};
use crate::window::BoxWindow;

/// Toppling counts from a stabilization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Odometer {
    pub window: BoxWindow,
    pub counts: Vec<u64>,
    /// Grains that left the system: `sum_n counts_n * (gamma - N_E(n))`.
    pub total_mass_lost: i64,
}

impl Odometer {
    pub fn zeros(window: BoxWindow) -> Self {
        let n = window.len();
        Odometer { window, counts: vec![0; n], total_mass_lost: 0 }
    }

    pub fn get(&self, site: &[i64]) -> Option<u64> {
        self.window.index_of(site).map(|i| self.counts[i])
    }

    pub fn total_topplings(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }
}

/// One toppling at `site`; requires `v_site >= gamma`.
pub fn topple_at(v: &HeightConfig, site: &[i64]) -> Result<HeightConfig, SandpileError> {
    let i = v.window.index_of(site).ok_or_else(|| SandpileError::SiteOutside(site.to_vec()))?;
    if v.heights[i] < v.gamma {
        return Err(SandpileError::NotUnstable { site: site.to_vec(), height: v.heights[i] });
    }
    let mut out = v.clone();
    let strides = v.window.strides();
    let mut nb = Vec::with_capacity(2 * v.dim());
    HeightConfig::neighbours(&v.window, &strides, i, &mut nb);
    out.heights[i] -= v.gamma;
    for &j in &nb {
        out.heights[j] += 1;
    }
    Ok(out)
}

fn mass_lost(v: &HeightConfig, counts: &[u64], strides: &[usize]) -> i64 {
    let mut nb = Vec::with_capacity(2 * v.dim());
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| {
            HeightConfig::neighbours(&v.window, strides, i, &mut nb);
            c as i64 * (v.gamma - nb.len() as i64)
        })
        .sum()
}

/// Topples until stable. Each visit of an unstable site performs all
/// `floor(v_n / gamma)` topplings at once; sites are queued in scanline order
/// as they become unstable.
///
/// Negative heights are left untouched; they never cause toppling.
pub fn stabilize(v: &HeightConfig) -> (HeightConfig, Odometer) {
    let mut out = v.clone();
    let strides = v.window.strides();
    let gamma = v.gamma;
    let mut counts = vec![0u64; v.heights.len()];
    let mut queue: VecDeque<usize> = (0..out.heights.len()).filter(|&i| out.heights[i] >= gamma).collect();
    let mut nb = Vec::with_capacity(2 * v.dim());
    while let Some(i) = queue.pop_front() {
        let q = out.heights[i] / gamma;
        if q <= 0 {
            continue;
        }
        out.heights[i] -= q * gamma;
        counts[i] += q as u64;
        HeightConfig::neighbours(&out.window, &strides, i, &mut nb);
        for &j in &nb {
            let before = out.heights[j];
            out.heights[j] += q;
            if before < gamma && out.heights[j] >= gamma {
                queue.push_back(j);
            }
        }
    }
    let total_mass_lost = mass_lost(v, &counts, &strides);
    (out, Odometer { window: v.window.clone(), counts, total_mass_lost })
}

/// Stabilization by single topplings at uniformly chosen unstable sites.
pub fn stabilize_random_order<R: Rng + ?Sized>(v: &HeightConfig, rng: &mut R) -> (HeightConfig, Odometer) {
    let mut out = v.clone();
    let strides = v.window.strides();
    let gamma = v.gamma;
    let mut counts = vec![0u64; v.heights.len()];
    let mut unstable: Vec<usize> = (0..out.heights.len()).filter(|&i| out.heights[i] >= gamma).collect();
    let mut nb = Vec::with_capacity(2 * v.dim());
    while !unstable.is_empty() {
        let k = rng.gen_range(0..unstable.len());
        let i = unstable[k];
        out.heights[i] -= gamma;
        counts[i] += 1;
        if out.heights[i] < gamma {
            unstable.swap_remove(k);
        }
        HeightConfig::neighbours(&out.window, &strides, i, &mut nb);
        for &j in &nb {
            out.heights[j] += 1;
            if out.heights[j] == gamma {
                unstable.push(j);
            }
        }
    }
    let total_mass_lost = mass_lost(v, &counts, &strides);
    (out, Odometer { window: v.window.clone(), counts, total_mass_lost })
}
