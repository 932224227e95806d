//! Exhaustive search over integer element splits, each with water-filled
//! powers. Only usable for small budgets.

use super::{powers_for_elements, spectral_efficiency, AllocationSolution, ChannelQuality};
use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// Largest number of splits the oracle will enumerate.
pub const ORACLE_LIMIT: u128 = 10_000_000;

/// Number of `k`-tuples of non-negative integers summing to at most
/// `budget`, i.e. `C(budget + k, k)`. Saturates at `u128::MAX`.
pub fn count_splits(budget: usize, k: usize) -> u128 {
    let n = budget as u128 + k as u128;
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (n - k + i) / i stays exact because acc = C(n - k + i - 1, i - 1)
        acc = match acc.checked_mul(n - k as u128 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// Best integer split with `sum M_k <= M` under water-filled powers. Ties
/// keep the lexicographically smallest split.
pub fn brute_force_oracle(
    chi: &ChannelQuality,
    config: &SystemConfig,
) -> Result<AllocationSolution> {
    let k = chi.len();
    let count = count_splits(config.element_budget, k);
    if count > ORACLE_LIMIT {
        return Err(Error::Size {
            count,
            limit: ORACLE_LIMIT,
        });
    }
    let mut split = vec![0usize; k];
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    search(chi, config, 0, config.element_budget, &mut split, &mut best)?;
    let (_, elements, powers) = best.expect("the empty split is always visited");
    Ok(AllocationSolution::from_integer(elements, powers, chi))
}

fn search(
    chi: &ChannelQuality,
    config: &SystemConfig,
    index: usize,
    remaining: usize,
    split: &mut Vec<usize>,
    best: &mut Option<(f64, Vec<usize>, Vec<f64>)>,
) -> Result<()> {
    if index == split.len() {
        let powers = powers_for_elements(split, chi, config.power_budget)?;
        let se = spectral_efficiency(split, &powers, chi);
        if best.as_ref().is_none_or(|(b, _, _)| se > *b) {
            *best = Some((se, split.clone(), powers));
        }
        return Ok(());
    }
    for m in 0..=remaining {
        split[index] = m;
        search(chi, config, index + 1, remaining - m, split, best)?;
    }
    split[index] = 0;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_binomials() {
        assert_eq!(count_splits(0, 3), 1);
        assert_eq!(count_splits(30, 3), 5456);
        assert_eq!(count_splits(2, 2), 6);
        assert_eq!(count_splits(2400, 4), 1_388_168_405_001);
        assert_eq!(count_splits(usize::MAX, 40), u128::MAX);
    }

    #[test]
    fn refuses_large_instances() {
        let chi = ChannelQuality::new(vec![1e-3; 4]).unwrap();
        let cfg = SystemConfig::default();
        assert!(matches!(
            brute_force_oracle(&chi, &cfg),
            Err(Error::Size {
                limit: ORACLE_LIMIT,
                ..
            })
        ));
    }

    #[test]
    fn symmetric_pair_splits_evenly_at_high_snr() {
        let chi = ChannelQuality::new(vec![1.0, 1.0]).unwrap();
        let mut cfg = SystemConfig::default();
        cfg.element_budget = 4;
        cfg.power_budget = 3.0;
        let sol = brute_force_oracle(&chi, &cfg).unwrap();
        // (4, 0): log2 49 ~ 5.61; (2, 2): 2 log2 7 ~ 5.61 as well; (3, 1)
        // is worse. 49 = 7^2 so the two tie exactly and the first found wins.
        assert_eq!(sol.elements.iter().sum::<usize>(), 4);
        assert!((sol.se - 49f64.log2()).abs() < 1e-12);
    }
}
