use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WaterFilling {
    pub powers: Vec<f64>,
    pub water_level: f64,
}

/// Maximizes `sum_k log2(1 + p_k eta_k)` subject to `sum_k p_k = budget`:
/// `p_k = max(u - 1/eta_k, 0)` with the water level `u` set by the budget.
pub fn water_filling(eta: &[f64], power_budget: f64) -> Result<WaterFilling> {
    if !(power_budget.is_finite() && power_budget > 0.0) {
        return Err(Error::domain(format!(
            "power budget must be positive, got {power_budget}"
        )));
    }
    if eta.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(Error::domain(
            "channel gains must be finite and non-negative",
        ));
    }
    let mut order: Vec<usize> = (0..eta.len()).filter(|&k| eta[k] > 0.0).collect();
    if order.is_empty() {
        return Err(Error::domain(
            "water-filling needs at least one positive gain",
        ));
    }
    order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]).then(a.cmp(&b)));

    // Grow the active set strongest-first until the next channel's floor
    // 1/eta sits above the water level.
    let mut inverse_sum = 0.0;
    let mut level = 0.0;
    let mut active = 0;
    for (n, &k) in order.iter().enumerate() {
        let floor = 1.0 / eta[k];
        let candidate = (power_budget + inverse_sum + floor) / (n + 1) as f64;
        if n > 0 && candidate <= floor {
            break;
        }
        inverse_sum += floor;
        level = candidate;
        active = n + 1;
    }

    let mut powers = vec![0.0; eta.len()];
    for &k in &order[..active] {
        powers[k] = (level - 1.0 / eta[k]).max(0.0);
    }
    Ok(WaterFilling {
        powers,
        water_level: level,
    })
}
