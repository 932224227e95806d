//! Array responses, per-hop line-of-sight channels and the composite
//! transmitter-surfaces-receiver channel.
//!
//! Both terminal arrays are uniform linear arrays whose axis points along
//! `[0, -1]`; their broadsides face each other along the x axis. Phase
//! arguments are stored as the exponent increment `2 pi d sin(theta) / lambda`
//! between adjacent elements, so a steering vector is fully described by
//! its element count and that single number.
//!
//! Each surface is a uniform planar array mounted at the configured height.
//! Panel rows stack vertically and panel columns run parallel to the x axis.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};

use crate::beamforming::{coupling_factor, IrsPanel};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::placement::PlacementResult;

pub type C64 = Complex<f64>;

/// Response of an array to a plane wave: unit-modulus entries, first entry 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(Vec<C64>);

impl SteeringVector {
    /// Wraps raw entries; the caller is responsible for unit modulus.
    pub fn from_entries(entries: Vec<C64>) -> Self {
        SteeringVector(entries)
    }

    pub fn entries(&self) -> &[C64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn conj(&self) -> SteeringVector {
        SteeringVector(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn as_column(&self) -> DMatrix<C64> {
        DMatrix::from_column_slice(self.0.len(), 1, &self.0)
    }
}

/// `[1, e^{jx}, ..., e^{jx(n-1)}]`.
pub fn ula_response(n: usize, phase_arg: f64) -> SteeringVector {
    SteeringVector(
        (0..n)
            .map(|m| C64::from_polar(1.0, phase_arg * m as f64))
            .collect(),
    )
}

/// Planar response as the Kronecker product of the vertical and the
/// horizontal linear responses (row-major: vertical index varies slowest).
pub fn upa_response(m_v: usize, m_h: usize, phase_v: f64, phase_h: f64) -> SteeringVector {
    let vertical = ula_response(m_v, phase_v);
    let horizontal = ula_response(m_h, phase_h);
    let mut out = Vec::with_capacity(m_v * m_h);
    for v in vertical.entries() {
        for h in horizontal.entries() {
            out.push(v * h);
        }
    }
    SteeringVector(out)
}

/// Free-space line-of-sight gain of one hop: magnitude `sqrt(beta0) / d`,
/// phase `-2 pi d / lambda`.
pub fn path_gain(distance: f64, config: &SystemConfig) -> Result<C64> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::domain(format!(
            "path distance must be positive, got {distance}"
        )));
    }
    let magnitude = config.pathloss_ref_gain.sqrt() / distance;
    let phase = -2.0 * PI * distance / config.wavelength;
    Ok(C64::from_polar(magnitude, phase))
}

/// Phase arguments seen at a surface toward one terminal: the vertical
/// (row) increment and the horizontal (column) increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePhases {
    pub vertical: f64,
    pub horizontal: f64,
}

/// Phase arguments at a surface mounted at `position` (and the configured
/// height) toward a terminal at `terminal` (height zero).
pub fn surface_phases(
    position: [f64; 2],
    terminal: [f64; 2],
    config: &SystemConfig,
) -> SurfacePhases {
    let dx = terminal[0] - position[0];
    let dy = terminal[1] - position[1];
    let dz = -config.irs_height;
    let dist = (dx * dx + dy * dy + dz * dz).sqrt();
    let k = 2.0 * PI * config.irs_spacing / config.wavelength;
    SurfacePhases {
        vertical: k * dz / dist,
        horizontal: k * dx / dist,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkAngles {
    /// Phase argument at the terminal array (AoD at the transmitter or AoA
    /// at the receiver).
    pub array_phase: f64,
    /// Phase arguments at the surface for this hop.
    pub surface: SurfacePhases,
}

/// One rank-one hop: transmitter to surface (`M_k x N_t`) or surface to
/// receiver (`N_r x M_k`).
#[derive(Debug, Clone)]
pub struct LinkChannel {
    pub matrix: DMatrix<C64>,
    pub complex_gain: C64,
    pub angles: LinkAngles,
    pub array_steering: SteeringVector,
    pub surface_steering: SteeringVector,
}

/// Builds the two hops of every placed surface from the placement geometry.
pub fn build_link_channels(
    placement: &PlacementResult,
    panels: &[IrsPanel],
    config: &SystemConfig,
) -> Result<Vec<(LinkChannel, LinkChannel)>> {
    if placement.surfaces.len() != panels.len() {
        return Err(Error::domain(format!(
            "{} surfaces placed but {} panels given",
            placement.surfaces.len(),
            panels.len()
        )));
    }
    placement
        .surfaces
        .iter()
        .zip(panels)
        .map(|(surface, panel)| {
            if panel.element_count == 0 {
                return Err(Error::domain(
                    "cannot build a channel for a zero-element panel",
                ));
            }
            let towards_tx = surface_phases(surface.position, config.tx_pos, config);
            let towards_rx = surface_phases(surface.position, config.rx_pos, config);

            let tx_array = ula_response(config.n_tx, surface.aod_phase);
            let rx_array = ula_response(config.n_rx, surface.aoa_phase);
            let surface_in = upa_response(
                panel.panel_rows,
                panel.panel_cols,
                towards_tx.vertical,
                towards_tx.horizontal,
            );
            let surface_out = upa_response(
                panel.panel_rows,
                panel.panel_cols,
                towards_rx.vertical,
                towards_rx.horizontal,
            );

            let t_matrix = surface_in.as_column() * tx_array.as_column().adjoint() * surface.rho_tx;
            let r_matrix =
                rx_array.as_column() * surface_out.as_column().adjoint() * surface.rho_rx;

            let forward = LinkChannel {
                matrix: t_matrix,
                complex_gain: surface.rho_tx,
                angles: LinkAngles {
                    array_phase: surface.aod_phase,
                    surface: towards_tx,
                },
                array_steering: tx_array,
                surface_steering: surface_in,
            };
            let backward = LinkChannel {
                matrix: r_matrix,
                complex_gain: surface.rho_rx,
                angles: LinkAngles {
                    array_phase: surface.aoa_phase,
                    surface: towards_rx,
                },
                array_steering: rx_array,
                surface_steering: surface_out,
            };
            Ok((forward, backward))
        })
        .collect()
}

/// `H = sum_k R_k Phi_k T_k` together with its factorization
/// `H = A_R diag(sigma) A_T^H`.
#[derive(Debug, Clone)]
pub struct CompositeChannel {
    pub matrix: DMatrix<C64>,
    pub a_t_matrix: DMatrix<C64>,
    pub a_r_matrix: DMatrix<C64>,
    pub sigma_diag: Vec<f64>,
}

impl CompositeChannel {
    pub fn factorized(&self) -> DMatrix<C64> {
        let sigma = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.sigma_diag.len(),
            self.sigma_diag.iter().map(|&s| C64::new(s, 0.0)),
        ));
        &self.a_r_matrix * sigma * self.a_t_matrix.adjoint()
    }
}

pub fn compose_effective_channel(
    links: &[(LinkChannel, LinkChannel)],
    panels: &[IrsPanel],
) -> Result<CompositeChannel> {
    if links.len() != panels.len() {
        return Err(Error::domain(format!(
            "{} link pairs but {} panels",
            links.len(),
            panels.len()
        )));
    }
    let Some((first_t, first_r)) = links.first() else {
        return Err(Error::domain("no surfaces to compose"));
    };
    let n_tx = first_t.matrix.ncols();
    let n_rx = first_r.matrix.nrows();
    let k = links.len();

    let mut matrix = DMatrix::<C64>::zeros(n_rx, n_tx);
    let mut a_t = DMatrix::<C64>::zeros(n_tx, k);
    let mut a_r = DMatrix::<C64>::zeros(n_rx, k);
    let mut sigma_diag = Vec::with_capacity(k);
    let norm_t = (n_tx as f64).sqrt();
    let norm_r = (n_rx as f64).sqrt();

    for (idx, ((t, r), panel)) in links.iter().zip(panels).enumerate() {
        if t.matrix.ncols() != n_tx || r.matrix.nrows() != n_rx {
            return Err(Error::domain("link pairs disagree on terminal array sizes"));
        }
        if panel.phases.len() != t.matrix.nrows() || panel.phases.len() != r.matrix.ncols() {
            return Err(Error::domain(format!(
                "surface {idx}: panel has {} phases but the hops have {} and {} elements",
                panel.phases.len(),
                t.matrix.nrows(),
                r.matrix.ncols()
            )));
        }
        let mut reflected = t.matrix.clone();
        for (m, &phi) in panel.phases.iter().enumerate() {
            let shift = C64::from_polar(1.0, phi);
            for z in reflected.row_mut(m).iter_mut() {
                *z *= shift;
            }
        }
        matrix += &r.matrix * reflected;

        let f = coupling_factor(panel, &t.surface_steering, &r.surface_steering)?;
        let cascaded = t.complex_gain * r.complex_gain * f;
        sigma_diag.push(norm_t * norm_r * cascaded.norm());
        // The rotation is conjugated here so that it reappears as e^{j omega}
        // once A_T is transposed-conjugated in the factorization.
        let rotation = C64::from_polar(1.0, -cascaded.arg());
        for (row, z) in t.array_steering.entries().iter().enumerate() {
            a_t[(row, idx)] = rotation * z / norm_t;
        }
        for (row, z) in r.array_steering.entries().iter().enumerate() {
            a_r[(row, idx)] = z / norm_r;
        }
    }

    Ok(CompositeChannel {
        matrix,
        a_t_matrix: a_t,
        a_r_matrix: a_r,
        sigma_diag,
    })
}
