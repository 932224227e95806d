//! System-level metrics and checks of the closed-form results: effective
//! rank, rate slopes in the element and power budgets, and the
//! single-versus-double surface threshold.

use crate::allocation::{equal_allocation, sca_optimize_multistart, ChannelQuality, ScaOptions};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::placement::place;

/// `exp` of the entropy of the weights `sqrt(d_k) / sum_i sqrt(d_i)`.
/// Zero entries carry no weight.
pub fn effective_rank(singular_values: &[f64]) -> Result<f64> {
    if singular_values
        .iter()
        .any(|d| !(d.is_finite() && *d >= 0.0))
    {
        return Err(Error::domain(
            "singular values must be finite and non-negative",
        ));
    }
    let total: f64 = singular_values.iter().map(|d| d.sqrt()).sum();
    if total == 0.0 {
        return Err(Error::domain("effective rank of an all-zero spectrum"));
    }
    let entropy: f64 = singular_values
        .iter()
        .filter(|&&d| d > 0.0)
        .map(|d| {
            let w = d.sqrt() / total;
            -w * w.ln()
        })
        .sum();
    Ok(entropy.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingVariable {
    Elements,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationRule {
    Equal,
    Sca,
}

/// Fixed channel qualities evaluated under a varying budget.
#[derive(Debug, Clone)]
pub struct ScalingScenario {
    pub config: SystemConfig,
    pub chi: ChannelQuality,
    pub rule: AllocationRule,
}

/// Sample points `start * 2^i` for `i = 0..=doublings`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublingRange {
    pub start: f64,
    pub doublings: u32,
}

impl DoublingRange {
    pub fn values(&self) -> Vec<f64> {
        (0..=self.doublings)
            .map(|i| self.start * 2f64.powi(i as i32))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub variable: ScalingVariable,
    /// `(budget, se)` pairs, budgets strictly increasing.
    pub sample_points: Vec<(f64, f64)>,
    /// Least-squares rate gain per doubling of the budget, bits/s/Hz.
    pub fitted_slope: f64,
    /// `2K` for elements, `K` for power.
    pub theoretical_slope: f64,
}

impl ScalingReport {
    pub fn relative_error(&self) -> f64 {
        (self.fitted_slope - self.theoretical_slope).abs() / self.theoretical_slope
    }
}

/// Least-squares slope of `se` against `log2(value)`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::domain("slope fit needs at least two sample points"));
    }
    if points.iter().any(|(v, _)| !(*v > 0.0)) {
        return Err(Error::domain("slope fit needs positive sample values"));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(v, _)| v.log2()).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, (_, y)) in xs.iter().zip(points) {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
    }
    if sxx == 0.0 {
        return Err(Error::domain("slope fit needs distinct sample values"));
    }
    Ok(sxy / sxx)
}

/// Rate of `scenario` at each budget in `range`, and the fitted slope.
/// Element budgets are rounded to the nearest integer.
pub fn scaling_slope(
    scenario: &ScalingScenario,
    variable: ScalingVariable,
    range: DoublingRange,
) -> Result<ScalingReport> {
    let values = range.values();
    if values.len() < 2 {
        return Err(Error::domain(
            "scaling sweep needs at least two sample points",
        ));
    }
    let mut sample_points = Vec::with_capacity(values.len());
    for value in values {
        let mut config = scenario.config.clone();
        let value = match variable {
            ScalingVariable::Elements => {
                config.element_budget = value.round() as usize;
                config.element_budget as f64
            }
            ScalingVariable::Power => {
                config.power_budget = value;
                value
            }
        };
        let se = match scenario.rule {
            AllocationRule::Equal => equal_allocation(&config, &scenario.chi).se,
            AllocationRule::Sca => {
                sca_optimize_multistart(&scenario.chi, &config, &ScaOptions::default())?.se
            }
        };
        sample_points.push((value, se));
    }
    if sample_points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::domain(
            "scaling sample values must be strictly increasing",
        ));
    }
    let k = scenario.chi.len() as f64;
    Ok(ScalingReport {
        variable,
        fitted_slope: fit_slope(&sample_points)?,
        theoretical_slope: match variable {
            ScalingVariable::Elements => 2.0 * k,
            ScalingVariable::Power => k,
        },
        sample_points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOutcome {
    /// One surface with all elements and power.
    pub r1: f64,
    /// Two equal surfaces, each with half of both budgets.
    pub r2: f64,
    pub double_wins: bool,
}

/// Relative slack under which `r2` and `r1` count as equal.
const THRESHOLD_TIE: f64 = 1e-12;

pub fn double_irs_threshold(chi: f64, power: f64, elements: usize) -> ThresholdOutcome {
    let snr = chi * power * (elements as f64).powi(2);
    let r1 = snr.ln_1p() / std::f64::consts::LN_2;
    let r2 = 2.0 * (snr / 8.0).ln_1p() / std::f64::consts::LN_2;
    ThresholdOutcome {
        r1,
        r2,
        double_wins: r2 >= r1 - THRESHOLD_TIE * r1,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropositionCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> PropositionCheck {
    PropositionCheck {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Geometric grid of `n` points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Reference power for the power-slope check, watts (0 dBm).
pub const POWER_SLOPE_REFERENCE: f64 = 1e-3;

/// Runs the threshold, equal-split and slope checks on the placements of
/// `config` for every surface count up to `config.num_surfaces`.
pub fn check_propositions(config: &SystemConfig) -> Result<Vec<PropositionCheck>> {
    config.validate()?;
    let mut out = Vec::new();

    let boundary = double_irs_threshold(48.0, 1.0, 1);
    let sweep_ok = log_grid(1.0, 1e4, 50).iter().all(|&snr| {
        let t = double_irs_threshold(snr, 1.0, 1);
        let diff = t.r2 - t.r1;
        if (snr - 48.0).abs() < 1e-9 {
            diff.abs() < 1e-9
        } else {
            (diff > 0.0) == (snr > 48.0)
        }
    });
    out.push(check(
        "threshold",
        (boundary.r1 - boundary.r2).abs() <= 1e-9 && sweep_ok,
        format!(
            "r1 = r2 = {:.9} at chi P M^2 = 48; sign sweep {}",
            boundary.r1,
            if sweep_ok {
                "consistent"
            } else {
                "inconsistent"
            }
        ),
    ));

    for k in 1..=config.num_surfaces {
        let scenario = config.with_surfaces(k);
        let placement = place(&scenario)?;
        let chi = ChannelQuality::from_placement(&placement, config.noise_power);

        let mut asym = scenario.clone();
        asym.element_budget = 1 << 14;
        let equal_chi = ChannelQuality::new(vec![chi.chi[0]; k])?;
        let sca = sca_optimize_multistart(&equal_chi, &asym, &ScaOptions::default())?;
        let equal = equal_allocation(&asym, &equal_chi);
        let gap = (sca.se - equal.se) / sca.se;
        let target = asym.element_budget as f64 / k as f64;
        let spread = sca
            .elements
            .iter()
            .map(|&m| (m as f64 - target).abs())
            .fold(0.0, f64::max);
        out.push(check(
            &format!("equal-split K={k}"),
            gap <= 1e-3 && spread <= 1.0,
            format!("relative gap {gap:.3e}, largest deviation from M/K {spread}"),
        ));

        let mut fixed_power = scenario.clone();
        fixed_power.power_budget = 1.0;
        let elements = scaling_slope(
            &ScalingScenario {
                config: fixed_power,
                chi: chi.clone(),
                rule: AllocationRule::Equal,
            },
            ScalingVariable::Elements,
            DoublingRange {
                start: 4096.0,
                doublings: 2,
            },
        )?;
        out.push(check(
            &format!("elements-slope K={k}"),
            elements.relative_error() <= 0.03,
            format!(
                "{:.4} bits per doubling, expected {}",
                elements.fitted_slope, elements.theoretical_slope
            ),
        ));

        let power = scaling_slope(
            &ScalingScenario {
                config: scenario.clone(),
                chi,
                rule: AllocationRule::Equal,
            },
            ScalingVariable::Power,
            DoublingRange {
                start: 1024.0 * POWER_SLOPE_REFERENCE,
                doublings: 2,
            },
        )?;
        out.push(check(
            &format!("power-slope K={k}"),
            power.relative_error() <= 0.03,
            format!(
                "{:.4} bits per doubling, expected {}",
                power.fitted_slope, power.theoretical_slope
            ),
        ));
    }
    Ok(out)
}
