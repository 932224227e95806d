//! Joint element and power allocation over orthogonally placed surfaces.
//!
//! With optimal phases every surface contributes one interference-free
//! stream of gain `chi_k M_k^2`, so the sum rate is
//! `sum_k log2(1 + p_k chi_k M_k^2)`.

mod barrier;
mod oracle;
mod sca;
mod water_filling;

pub use barrier::{BarrierOptions, BarrierReport, Local, SmoothConvexProgram};
pub use oracle::{brute_force_oracle, count_splits, ORACLE_LIMIT};
pub use sca::{
    convex_subproblem, sca_optimize, sca_optimize_multistart, ScaOptions, ScaState,
    SubproblemSolution,
};
pub use water_filling::{water_filling, WaterFilling};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::placement::PlacementResult;

/// Per-surface channel quality `chi_k = |rho_k|^2 / sigma^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelQuality {
    pub chi: Vec<f64>,
}

impl ChannelQuality {
    pub fn new(chi: Vec<f64>) -> Result<Self> {
        if chi.is_empty() {
            return Err(Error::domain("channel quality needs at least one surface"));
        }
        if let Some(bad) = chi.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::domain(format!(
                "channel quality entries must be >= 0, got {bad}"
            )));
        }
        Ok(ChannelQuality { chi })
    }

    pub fn from_placement(placement: &PlacementResult, noise_power: f64) -> Self {
        ChannelQuality {
            chi: placement
                .surfaces
                .iter()
                .map(|s| s.rho.norm_sqr() / noise_power)
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.chi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationSolution {
    pub elements: Vec<usize>,
    /// Watts per surface.
    pub powers: Vec<f64>,
    /// Spectral efficiency at (`elements`, `powers`), bits/s/Hz.
    pub se: f64,
    /// Relaxed objective after each outer iteration, starting with the
    /// initial point.
    pub trace: Vec<f64>,
    /// Continuous element split before rounding.
    pub relaxed_elements: Vec<f64>,
    /// Continuous power split paired with `relaxed_elements`.
    pub relaxed_powers: Vec<f64>,
    pub relaxed_se: f64,
    /// Outer (convex subproblem) iterations performed.
    pub iterations: usize,
}

impl AllocationSolution {
    /// Builds a solution from an integer split and its powers, with no
    /// optimization history.
    pub fn from_integer(elements: Vec<usize>, powers: Vec<f64>, chi: &ChannelQuality) -> Self {
        let se = spectral_efficiency(&elements, &powers, chi);
        let relaxed_elements: Vec<f64> = elements.iter().map(|&m| m as f64).collect();
        AllocationSolution {
            relaxed_powers: powers.clone(),
            relaxed_se: se,
            trace: vec![se],
            relaxed_elements,
            elements,
            powers,
            se,
            iterations: 0,
        }
    }
}

/// `sum_k log2(1 + p_k chi_k M_k^2)`.
pub fn spectral_efficiency(elements: &[usize], powers: &[f64], chi: &ChannelQuality) -> f64 {
    let relaxed: Vec<f64> = elements.iter().map(|&m| m as f64).collect();
    relaxed_spectral_efficiency(&relaxed, powers, chi)
}

/// Same as [`spectral_efficiency`] for a continuous element split.
pub fn relaxed_spectral_efficiency(elements: &[f64], powers: &[f64], chi: &ChannelQuality) -> f64 {
    elements
        .iter()
        .zip(powers)
        .zip(&chi.chi)
        .map(|((&m, &p), &c)| (p * c * m * m).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2
}

/// Splits `total` into `k` integers differing by at most one, larger parts
/// first.
pub fn balanced_split(total: usize, k: usize) -> Vec<usize> {
    let base = total / k;
    let extra = total % k;
    (0..k).map(|i| base + usize::from(i < extra)).collect()
}

/// Equal elements and equal power on every surface.
pub fn equal_allocation(config: &SystemConfig, chi: &ChannelQuality) -> AllocationSolution {
    let k = chi.len();
    let elements = balanced_split(config.element_budget, k);
    let powers = vec![config.power_budget / k as f64; k];
    AllocationSolution::from_integer(elements, powers, chi)
}

/// All elements and all power on the first surface.
pub fn single_surface_allocation(
    config: &SystemConfig,
    chi: &ChannelQuality,
) -> AllocationSolution {
    let mut elements = vec![0; chi.len()];
    let mut powers = vec![0.0; chi.len()];
    elements[0] = config.element_budget;
    powers[0] = config.power_budget;
    AllocationSolution::from_integer(elements, powers, chi)
}

/// Largest-remainder rounding of a continuous split. The rounded total is
/// the nearest integer to the continuous total, capped at `budget`; ties in
/// the fractional parts go to the lower index.
pub fn round_elements(m_tilde: &[f64], budget: usize) -> Vec<usize> {
    let floors: Vec<usize> = m_tilde
        .iter()
        .map(|&m| m.max(0.0).floor() as usize)
        .collect();
    let floor_sum: usize = floors.iter().sum();
    let total: f64 = m_tilde.iter().map(|m| m.max(0.0)).sum();
    let target = (total.round() as usize).min(budget);
    let mut out = floors.clone();
    if target <= floor_sum {
        // Nothing to hand out, or the floors alone already exceed the budget.
        let mut excess = floor_sum - target;
        let mut order: Vec<usize> = (0..m_tilde.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = m_tilde[a] - floors[a] as f64;
            let rb = m_tilde[b] - floors[b] as f64;
            ra.total_cmp(&rb).then(b.cmp(&a))
        });
        for idx in order {
            if excess == 0 {
                break;
            }
            if out[idx] > 0 {
                out[idx] -= 1;
                excess -= 1;
            }
        }
        return out;
    }
    let mut order: Vec<usize> = (0..m_tilde.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = m_tilde[a] - floors[a] as f64;
        let rb = m_tilde[b] - floors[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &idx in order.iter().take(target - floor_sum) {
        out[idx] += 1;
    }
    out
}

/// Water-filling powers for an integer split; an all-zero split gets no
/// power.
pub fn powers_for_elements(
    elements: &[usize],
    chi: &ChannelQuality,
    power_budget: f64,
) -> Result<Vec<f64>> {
    let eta: Vec<f64> = elements
        .iter()
        .zip(&chi.chi)
        .map(|(&m, &c)| c * (m as f64) * (m as f64))
        .collect();
    if eta.iter().all(|&e| e == 0.0) {
        return Ok(vec![0.0; eta.len()]);
    }
    Ok(water_filling(&eta, power_budget)?.powers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi(v: &[f64]) -> ChannelQuality {
        ChannelQuality::new(v.to_vec()).unwrap()
    }

    #[test]
    fn se_examples() {
        assert!((spectral_efficiency(&[1], &[1.0], &chi(&[1.0])) - 1.0).abs() < 1e-15);
        // chi P M^2 = 48 on one surface
        let single = spectral_efficiency(&[4], &[3.0], &chi(&[1.0]));
        assert!((single - 49f64.log2()).abs() < 1e-12);
        assert!((single - 5.614_709_844).abs() < 1e-9);
        // equal split of the same budget over two equal surfaces
        let double = spectral_efficiency(&[2, 2], &[1.5, 1.5], &chi(&[1.0, 1.0]));
        assert!((double - 2.0 * (1.0 + 48.0 / 8.0f64).log2()).abs() < 1e-12);
        assert!((double - 49f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn equal_allocation_examples() {
        let mut cfg = SystemConfig::default();
        let q = chi(&[1e-3; 4]);
        let sol = equal_allocation(&cfg, &q);
        assert_eq!(sol.elements, vec![600; 4]);
        assert!(sol.powers.iter().all(|&p| (p - 0.25).abs() < 1e-15));

        let one = equal_allocation(&cfg, &chi(&[1e-3]));
        assert_eq!(one.elements, vec![2400]);
        assert_eq!(one.powers, vec![1.0]);

        cfg.element_budget = 10;
        let three = equal_allocation(&cfg, &chi(&[1.0; 3]));
        assert_eq!(three.elements, vec![4, 3, 3]);
        assert_eq!(three.elements.iter().sum::<usize>(), 10);
    }

    #[test]
    fn rounding_examples() {
        assert_eq!(round_elements(&[600.0; 4], 2400), vec![600; 4]);
        // remainders 0.6, 0.7, 0.7 with two units to hand out
        assert_eq!(round_elements(&[10.6, 9.7, 9.7], 30), vec![10, 10, 10]);
        assert_eq!(round_elements(&[0.2, 0.2], 0), vec![0, 0]);
        // interior solutions just below the budget still use all of it
        assert_eq!(
            round_elements(&[14.999_999_9, 15.0 - 1e-7], 30),
            vec![15, 15]
        );
        // index tie-break
        assert_eq!(round_elements(&[1.5, 1.5], 3), vec![2, 1]);
    }

    #[test]
    fn powers_for_dead_split() {
        let p = powers_for_elements(&[0, 0], &chi(&[1.0, 1.0]), 1.0).unwrap();
        assert_eq!(p, vec![0.0, 0.0]);
    }
}
