//! Orthogonal surface placement on DFT directions.
//!
//! Every surface must sit where the transmitter sees it along one DFT
//! direction of its array and the receiver along one DFT direction of its
//! own, with no two surfaces sharing a direction at either end. That makes
//! the transmit and receive steering matrices orthonormal.
//!
//! Geometry conventions: both arrays lie along `[0, -1]`, the transmitter
//! looks toward `+x` and the receiver toward `-x`. A phase argument `X`
//! maps to the direction with `sin(theta) = X lambda / (2 pi d)` measured
//! from broadside, where positive angles lean toward `-y`. Endfire
//! (`|sin| = 1`, which for half-wavelength spacing is the grid point `pi`)
//! is the array axis itself in either sense. When both terminals look at
//! each other along broadside the surface is put above the midpoint of the
//! link.

use std::f64::consts::PI;

use crate::channel::{path_gain, C64};
use crate::config::SystemConfig;
use crate::error::{Error, Result};

const GEOM_EPS: f64 = 1e-9;

/// One feasible placement: a (transmit direction, receive direction) pair
/// and the surface position it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEntry {
    pub aod_index: usize,
    pub aoa_index: usize,
    pub aod_phase: f64,
    pub aoa_phase: f64,
    /// `|rho_T| |rho_R|`.
    pub gain: f64,
    pub position: [f64; 2],
    /// Transmitter-to-surface distance including the mounting height.
    pub dist_tx: f64,
    pub dist_rx: f64,
    pub rho_tx: C64,
    pub rho_rx: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectedSurface {
    pub candidate_index: usize,
    pub aod_index: usize,
    pub aoa_index: usize,
    pub aod_phase: f64,
    pub aoa_phase: f64,
    pub position: [f64; 2],
    pub dist_tx: f64,
    pub dist_rx: f64,
    pub rho_tx: C64,
    pub rho_rx: C64,
    /// Cascaded gain `rho_T rho_R`.
    pub rho: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementResult {
    /// Surfaces in the order the greedy search picked them.
    pub surfaces: Vec<SelectedSurface>,
    /// Candidate index chosen at each greedy iteration.
    pub selection_order: Vec<usize>,
    /// Number of candidate gain comparisons performed.
    pub comparisons: usize,
}

impl PlacementResult {
    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }
}

/// Planar intersection of a transmit ray and a receive ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayIntersection {
    pub position: [f64; 2],
    /// Planar (ground) distances; heights are not included.
    pub dist_tx: f64,
    pub dist_rx: f64,
}

/// DFT direction grids `{2 pi i / N - pi : i = 1..N}` for both arrays,
/// ascending.
pub fn dft_angle_grids(config: &SystemConfig) -> (Vec<f64>, Vec<f64>) {
    (dft_grid(config.n_tx), dft_grid(config.n_rx))
}

fn dft_grid(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| 2.0 * PI * i as f64 / n as f64 - PI)
        .collect()
}

#[derive(Debug, Clone, Copy)]
enum Beam {
    /// Half-line from the terminal.
    Ray([f64; 2]),
    /// Full line through the terminal along the array axis.
    Axis,
}

fn beam(phase: f64, spacing: f64, wavelength: f64, front: f64) -> Option<Beam> {
    let sin = phase * wavelength / (2.0 * PI * spacing);
    if sin.abs() > 1.0 + GEOM_EPS {
        return None;
    }
    if (sin.abs() - 1.0).abs() <= GEOM_EPS {
        return Some(Beam::Axis);
    }
    let cos = (1.0 - sin * sin).sqrt();
    Some(Beam::Ray([front * cos, -sin]))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Where a surface must sit to be seen along `aod_phase` from the
/// transmitter and along `aoa_phase` from the receiver. `None` when the
/// directions do not meet in front of both arrays.
pub fn position_from_angles(
    aod_phase: f64,
    aoa_phase: f64,
    config: &SystemConfig,
) -> Option<RayIntersection> {
    let tx = config.tx_pos;
    let rx = config.rx_pos;
    let t_beam = beam(aod_phase, config.tx_spacing, config.wavelength, 1.0)?;
    let r_beam = beam(aoa_phase, config.rx_spacing, config.wavelength, -1.0)?;

    let position = match (t_beam, r_beam) {
        (Beam::Axis, Beam::Axis) => return None,
        (Beam::Axis, Beam::Ray(dir)) => hit_axis(rx, dir, tx[0])?,
        (Beam::Ray(dir), Beam::Axis) => hit_axis(tx, dir, rx[0])?,
        (Beam::Ray(dt), Beam::Ray(dr)) => {
            let det = dt[0] * (-dr[1]) - dt[1] * (-dr[0]);
            let delta = [rx[0] - tx[0], rx[1] - tx[1]];
            if det.abs() < 1e-12 {
                facing_midpoint(tx, rx, dt, dr)?
            } else {
                let a = (delta[0] * (-dr[1]) - delta[1] * (-dr[0])) / det;
                let b = (dt[0] * delta[1] - dt[1] * delta[0]) / det;
                if a <= GEOM_EPS || b <= GEOM_EPS {
                    return None;
                }
                [tx[0] + a * dt[0], tx[1] + a * dt[1]]
            }
        }
    };

    let dist_tx = dist(position, tx);
    let dist_rx = dist(position, rx);
    if dist_tx <= GEOM_EPS || dist_rx <= GEOM_EPS {
        return None;
    }
    Some(RayIntersection {
        position,
        dist_tx,
        dist_rx,
    })
}

/// Intersection of the ray `origin + s dir` (s > 0) with the vertical line
/// `x = axis_x`.
fn hit_axis(origin: [f64; 2], dir: [f64; 2], axis_x: f64) -> Option<[f64; 2]> {
    if dir[0].abs() < 1e-12 {
        return None;
    }
    let s = (axis_x - origin[0]) / dir[0];
    if s <= GEOM_EPS {
        return None;
    }
    Some([origin[0] + s * dir[0], origin[1] + s * dir[1]])
}

/// Parallel rays only meet when they lie on the link itself and point at
/// each other; the whole segment qualifies and its midpoint is used.
fn facing_midpoint(tx: [f64; 2], rx: [f64; 2], dt: [f64; 2], dr: [f64; 2]) -> Option<[f64; 2]> {
    let delta = [rx[0] - tx[0], rx[1] - tx[1]];
    let cross = dt[0] * delta[1] - dt[1] * delta[0];
    let facing = dt[0] * dr[0] + dt[1] * dr[1] < 0.0;
    let ahead = dt[0] * delta[0] + dt[1] * delta[1] > 0.0;
    if cross.abs() > GEOM_EPS * dist(tx, rx) || !facing || !ahead {
        return None;
    }
    Some([(tx[0] + rx[0]) / 2.0, (tx[1] + rx[1]) / 2.0])
}

/// All feasible placements over the product of the two DFT grids, in
/// row-major (transmit direction, receive direction) order.
pub fn enumerate_candidates(config: &SystemConfig) -> Result<Vec<CandidateEntry>> {
    let (grid_t, grid_r) = dft_angle_grids(config);
    let h2 = config.irs_height * config.irs_height;
    let mut out = Vec::new();
    for (i, &aod) in grid_t.iter().enumerate() {
        for (j, &aoa) in grid_r.iter().enumerate() {
            let Some(hit) = position_from_angles(aod, aoa, config) else {
                continue;
            };
            let dist_tx = (hit.dist_tx * hit.dist_tx + h2).sqrt();
            let dist_rx = (hit.dist_rx * hit.dist_rx + h2).sqrt();
            let rho_tx = path_gain(dist_tx, config)?;
            let rho_rx = path_gain(dist_rx, config)?;
            out.push(CandidateEntry {
                aod_index: i,
                aoa_index: j,
                aod_phase: aod,
                aoa_phase: aoa,
                gain: rho_tx.norm() * rho_rx.norm(),
                position: hit.position,
                dist_tx,
                dist_rx,
                rho_tx,
                rho_rx,
            });
        }
    }
    Ok(out)
}

fn select(candidate_index: usize, c: &CandidateEntry) -> SelectedSurface {
    SelectedSurface {
        candidate_index,
        aod_index: c.aod_index,
        aoa_index: c.aoa_index,
        aod_phase: c.aod_phase,
        aoa_phase: c.aoa_phase,
        position: c.position,
        dist_tx: c.dist_tx,
        dist_rx: c.dist_rx,
        rho_tx: c.rho_tx,
        rho_rx: c.rho_rx,
        rho: c.rho_tx * c.rho_rx,
    }
}

/// Greedy placement: take the strongest remaining candidate, then drop
/// every candidate that shares its transmit or receive direction. Ties go
/// to the lowest candidate index.
pub fn greedy_select(candidates: &[CandidateEntry], k: usize) -> Result<PlacementResult> {
    if k == 0 {
        return Err(Error::domain("at least one surface must be placed"));
    }
    let mut alive = vec![true; candidates.len()];
    let mut surfaces = Vec::with_capacity(k);
    let mut selection_order = Vec::with_capacity(k);
    let mut comparisons = 0usize;

    for iteration in 0..k {
        let mut best: Option<usize> = None;
        for (idx, c) in candidates.iter().enumerate() {
            if !alive[idx] {
                continue;
            }
            comparisons += 1;
            match best {
                Some(b) if candidates[b].gain >= c.gain => {}
                _ => best = Some(idx),
            }
        }
        let Some(pick) = best else {
            return Err(Error::Infeasible {
                iteration: iteration + 1,
                requested: k,
            });
        };
        let chosen = &candidates[pick];
        for (idx, c) in candidates.iter().enumerate() {
            if c.aod_index == chosen.aod_index || c.aoa_index == chosen.aoa_index {
                alive[idx] = false;
            }
        }
        surfaces.push(select(pick, chosen));
        selection_order.push(pick);
    }

    Ok(PlacementResult {
        surfaces,
        selection_order,
        comparisons,
    })
}

/// Enumerates the candidates and places `config.num_surfaces` surfaces.
pub fn place(config: &SystemConfig) -> Result<PlacementResult> {
    config.validate()?;
    let candidates = enumerate_candidates(config)?;
    greedy_select(&candidates, config.num_surfaces)
}

/// Exhaustive search over all `k`-subsets with pairwise distinct
/// directions, maximizing `score`. Only meant for tiny pools.
pub fn exhaustive_select<F>(
    candidates: &[CandidateEntry],
    k: usize,
    mut score: F,
) -> Option<(PlacementResult, f64)>
where
    F: FnMut(&PlacementResult) -> f64,
{
    fn recurse<F: FnMut(&PlacementResult) -> f64>(
        candidates: &[CandidateEntry],
        k: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        score: &mut F,
        best: &mut Option<(PlacementResult, f64)>,
    ) {
        if chosen.len() == k {
            let result = PlacementResult {
                surfaces: chosen.iter().map(|&i| select(i, &candidates[i])).collect(),
                selection_order: chosen.clone(),
                comparisons: 0,
            };
            let value = score(&result);
            if best.as_ref().is_none_or(|(_, v)| value > *v) {
                *best = Some((result, value));
            }
            return;
        }
        for idx in start..candidates.len() {
            let c = &candidates[idx];
            let clash = chosen.iter().any(|&o| {
                candidates[o].aod_index == c.aod_index || candidates[o].aoa_index == c.aoa_index
            });
            if clash {
                continue;
            }
            chosen.push(idx);
            recurse(candidates, k, idx + 1, chosen, score, best);
            chosen.pop();
        }
    }

    let mut best = None;
    recurse(candidates, k, 0, &mut Vec::new(), &mut score, &mut best);
    best
}
