//! Experiment orchestration: the full placement, beamforming and
//! allocation pipeline evaluated over a sweep of budgets.

mod commands;
mod spec;
mod table;

pub use commands::{check_props_report, optimize_report, oracle_report, place_report};
pub use spec::{parse_config, ExperimentSpec, Sweep, SweepVariable};
pub use table::{emit_csv, format_real, parse_csv, render_csv, COLUMNS};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::allocation::{
    equal_allocation, sca_optimize_multistart, single_surface_allocation, AllocationSolution,
    ChannelQuality, ScaOptions,
};
use crate::analysis::effective_rank;
use crate::beamforming::{optimal_phases, IrsPanel};
use crate::channel::{build_link_channels, compose_effective_channel};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::placement::{place, PlacementResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Strategy {
    /// Best single surface with every element and all the power.
    SingleIrs,
    /// `K` surfaces with the SCA element and power split.
    MultiSca,
    /// `K` surfaces with equal elements and power.
    MultiEqual,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::SingleIrs => "single_irs",
            Strategy::MultiSca => "multi_sca",
            Strategy::MultiEqual => "multi_equal",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_irs" => Ok(Strategy::SingleIrs),
            "multi_sca" => Ok(Strategy::MultiSca),
            "multi_equal" => Ok(Strategy::MultiEqual),
            other => Err(Error::parse(
                "strategies",
                format!(
                    "unknown strategy `{other}` (expected single_irs, multi_sca or multi_equal)"
                ),
            )),
        }
    }
}

/// Metrics of one successful pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct RowMetrics {
    pub se_bits: f64,
    pub erank: f64,
    pub elements: Vec<usize>,
    pub powers: Vec<f64>,
    pub sca_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Swept budget in SI units (elements or watts).
    pub sweep_value: f64,
    pub strategy: Strategy,
    pub k: usize,
    pub outcome: std::result::Result<RowMetrics, String>,
    pub wall_ms: Option<f64>,
}

/// Output of the full pipeline for one scenario.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub placement: PlacementResult,
    pub chi: ChannelQuality,
    pub allocation: AllocationSolution,
    /// Singular values of the composed channel with optimal phases.
    pub singular_values: Vec<f64>,
    pub erank: f64,
}

/// Singular values below this fraction of the largest are numerical zeros.
const RANK_TOL: f64 = 1e-9;

/// Allocates on a fixed placement, configures every surface with its
/// optimal phases and measures the composed channel.
pub fn evaluate_placement(
    config: &SystemConfig,
    placement: &PlacementResult,
    strategy: Strategy,
) -> Result<PipelineOutcome> {
    let chi = ChannelQuality::from_placement(placement, config.noise_power);
    let allocation = match strategy {
        Strategy::SingleIrs => single_surface_allocation(config, &chi),
        Strategy::MultiEqual => equal_allocation(config, &chi),
        Strategy::MultiSca => sca_optimize_multistart(&chi, config, &ScaOptions::default())?,
    };

    // Surfaces left without elements take no part in the channel.
    let active: Vec<usize> = (0..placement.len())
        .filter(|&i| allocation.elements[i] > 0)
        .collect();
    let singular_values = if active.is_empty() {
        vec![0.0; config.n_rx.min(config.n_tx)]
    } else {
        let sub = PlacementResult {
            surfaces: active
                .iter()
                .map(|&i| placement.surfaces[i].clone())
                .collect(),
            selection_order: active
                .iter()
                .map(|&i| placement.selection_order[i])
                .collect(),
            comparisons: placement.comparisons,
        };
        let mut panels: Vec<IrsPanel> = active
            .iter()
            .map(|&i| IrsPanel::with_elements(allocation.elements[i]))
            .collect();
        let links = build_link_channels(&sub, &panels, config)?;
        for (panel, (t, r)) in panels.iter_mut().zip(&links) {
            panel.set_phases(optimal_phases(&t.surface_steering, &r.surface_steering)?)?;
        }
        let composite = compose_effective_channel(&links, &panels)?;
        composite.matrix.singular_values().iter().copied().collect()
    };
    let largest = singular_values.iter().copied().fold(0.0, f64::max);
    let significant: Vec<f64> = singular_values
        .iter()
        .map(|&s| if s > RANK_TOL * largest { s } else { 0.0 })
        .collect();
    let erank = if largest > 0.0 {
        effective_rank(&significant)?
    } else {
        0.0
    };
    Ok(PipelineOutcome {
        placement: placement.clone(),
        chi,
        allocation,
        singular_values,
        erank,
    })
}

/// Places `config.num_surfaces` surfaces (one for [`Strategy::SingleIrs`])
/// and runs [`evaluate_placement`].
pub fn evaluate(config: &SystemConfig, strategy: Strategy) -> Result<PipelineOutcome> {
    let config = match strategy {
        Strategy::SingleIrs => config.with_surfaces(1),
        _ => config.clone(),
    };
    config.validate()?;
    let placement = place(&config)?;
    evaluate_placement(&config, &placement, strategy)
}

/// Every (sweep value, strategy, K) combination in spec order. The single
/// surface baseline runs once per sweep value with `K = 1`. Failures are
/// recorded in the row instead of aborting the sweep.
pub fn run_sweep(spec: &ExperimentSpec) -> Vec<SweepRow> {
    // Placement depends on neither budget, so it is shared across the sweep.
    let mut placements: BTreeMap<usize, std::result::Result<PlacementResult, String>> =
        BTreeMap::new();
    let mut rows = Vec::new();
    for &value in &spec.sweep.values {
        let mut config = spec.scenario.clone();
        match spec.sweep.variable {
            SweepVariable::ElementBudget => config.element_budget = value as usize,
            SweepVariable::PowerBudget => config.power_budget = value,
        }
        for &strategy in &spec.strategies {
            let ks: Vec<usize> = match strategy {
                Strategy::SingleIrs => vec![1],
                _ => spec.surfaces.clone(),
            };
            for k in ks {
                let start = Instant::now();
                let scenario = config.with_surfaces(k);
                let placement = placements
                    .entry(k)
                    .or_insert_with(|| place(&scenario).map_err(|e| e.to_string()));
                let outcome = match placement {
                    Ok(p) => evaluate_placement(&scenario, p, strategy)
                        .map(|o| RowMetrics {
                            se_bits: o.allocation.se,
                            erank: o.erank,
                            elements: o.allocation.elements,
                            powers: o.allocation.powers,
                            sca_iters: o.allocation.iterations,
                        })
                        .map_err(|e| e.to_string()),
                    Err(e) => Err(e.clone()),
                };
                let elapsed = start.elapsed().as_secs_f64() * 1e3;
                rows.push(SweepRow {
                    sweep_value: value,
                    strategy,
                    k,
                    outcome,
                    wall_ms: spec.record_timing.then_some(elapsed),
                });
            }
        }
    }
    rows
}
