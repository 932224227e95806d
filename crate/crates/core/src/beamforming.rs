//! Closed-form passive beamforming for a single surface.

use std::f64::consts::TAU;

use crate::channel::{SteeringVector, C64};
use crate::error::{Error, Result};

/// One reflecting surface: its element count, panel shape and per-element
/// phase shifts in `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IrsPanel {
    pub element_count: usize,
    pub panel_rows: usize,
    pub panel_cols: usize,
    pub phases: Vec<f64>,
}

impl IrsPanel {
    /// A near-square panel with `elements` elements and all phases zero.
    pub fn with_elements(elements: usize) -> Self {
        let (rows, cols) = panel_factorization(elements);
        IrsPanel {
            element_count: elements,
            panel_rows: rows,
            panel_cols: cols,
            phases: vec![0.0; elements],
        }
    }

    /// A panel with an explicit `rows x cols` shape and zero phases.
    pub fn with_shape(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::domain("panel dimensions must be positive"));
        }
        Ok(IrsPanel {
            element_count: rows * cols,
            panel_rows: rows,
            panel_cols: cols,
            phases: vec![0.0; rows * cols],
        })
    }

    pub fn set_phases(&mut self, phases: Vec<f64>) -> Result<()> {
        if phases.len() != self.element_count {
            return Err(Error::domain(format!(
                "{} phases for a {}-element panel",
                phases.len(),
                self.element_count
            )));
        }
        self.phases = phases;
        Ok(())
    }
}

/// Closest-to-square factorization `rows x cols = m` with `rows <= cols`.
/// A zero-element panel is reported as `1 x 0`.
pub fn panel_factorization(m: usize) -> (usize, usize) {
    if m == 0 {
        return (1, 0);
    }
    let mut rows = (m as f64).sqrt() as usize;
    while rows * rows > m {
        rows -= 1;
    }
    while (rows + 1) * (rows + 1) <= m {
        rows += 1;
    }
    while !m.is_multiple_of(rows) {
        rows -= 1;
    }
    (rows, m / rows)
}

/// Canonical representative of `phase` in `[0, 2 pi)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let wrapped = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// `f(Phi) = sum_m conj(out_m) e^{j phi_m} in_m`.
pub fn coupling_factor(
    panel: &IrsPanel,
    steer_in: &SteeringVector,
    steer_out: &SteeringVector,
) -> Result<C64> {
    let m = panel.phases.len();
    if steer_in.len() != m || steer_out.len() != m {
        return Err(Error::domain(format!(
            "steering vectors of length {} and {} for a {m}-element panel",
            steer_in.len(),
            steer_out.len()
        )));
    }
    Ok(panel
        .phases
        .iter()
        .zip(steer_in.entries())
        .zip(steer_out.entries())
        .map(|((&phi, a_in), a_out)| a_out.conj() * C64::from_polar(1.0, phi) * a_in)
        .sum())
}

/// Phase profile that co-phases every element of the cascaded path, so
/// that `|f| = M`.
pub fn optimal_phases(steer_in: &SteeringVector, steer_out: &SteeringVector) -> Result<Vec<f64>> {
    if steer_in.len() != steer_out.len() {
        return Err(Error::domain(format!(
            "steering vectors differ in length: {} vs {}",
            steer_in.len(),
            steer_out.len()
        )));
    }
    Ok(steer_in
        .entries()
        .iter()
        .zip(steer_out.entries())
        .map(|(a_in, a_out)| wrap_phase((a_out * a_in.conj()).arg()))
        .collect())
}
