//! Successive convex approximation for the joint element and power split.
//!
//! In the log domain `x = ln p`, `y = ln M^2` the rate term
//! `log2(1 + chi e^(x + y))` is bounded below by replacing `l = chi e^(x+y)`
//! with its tangent at the current point `(x_hat, y_hat)`, and the
//! non-convex coupling `e^y <= M^2` by its tangent at `M_hat`. Each outer
//! iteration solves the resulting convex program and moves the tangent
//! points to its solution, so the true relaxed objective never decreases.
//!
//! The subproblem is posed in per-surface scaled variables centred on the
//! tangent point (`p / p_hat`, `M / M_hat`, `x - x_hat`, `y - y_hat`) so
//! that every coordinate is of order one regardless of the channel scale.

use nalgebra::DVector;

use super::barrier::{minimize, BarrierOptions, Local, SmoothConvexProgram};
use super::{
    powers_for_elements, relaxed_spectral_efficiency, round_elements, spectral_efficiency,
    AllocationSolution, ChannelQuality,
};
use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// Tangent point of one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaState {
    /// `ln p_hat`.
    pub x_hat: Vec<f64>,
    /// `ln M_hat^2`.
    pub y_hat: Vec<f64>,
    pub m_hat: Vec<f64>,
    /// `chi e^(x_hat + y_hat)`.
    pub l_hat: Vec<f64>,
}

impl ScaState {
    /// Tangent point at `(powers, m_tilde)`, with both clamped below at
    /// `floor` so the logarithms stay finite.
    pub fn from_point(powers: &[f64], m_tilde: &[f64], chi: &ChannelQuality, floor: f64) -> Self {
        let m_hat: Vec<f64> = m_tilde.iter().map(|&m| m.max(floor)).collect();
        let x_hat: Vec<f64> = powers.iter().map(|&p| p.max(floor).ln()).collect();
        let y_hat: Vec<f64> = m_hat.iter().map(|m| 2.0 * m.ln()).collect();
        let l_hat = chi
            .chi
            .iter()
            .zip(x_hat.iter().zip(&y_hat))
            .map(|(c, (x, y))| c * (x + y).exp())
            .collect();
        ScaState {
            x_hat,
            y_hat,
            m_hat,
            l_hat,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub powers: Vec<f64>,
    pub m_tilde: Vec<f64>,
    pub l: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Surrogate value `sum_k log2(1 + l_k)`, a lower bound on the true
    /// relaxed rate at `(powers, m_tilde)`.
    pub objective: f64,
    pub duality_gap: f64,
    pub kkt_residual: f64,
    pub newton_steps: usize,
}

#[derive(Debug, Clone)]
pub struct ScaOptions {
    /// Relative change in the objective below which the outer loop stops.
    pub rel_tol: f64,
    pub max_outer: usize,
    /// Lower clamp on `p_hat` and `M_hat`.
    pub floor: f64,
    pub barrier: BarrierOptions,
}

impl Default for ScaOptions {
    fn default() -> Self {
        ScaOptions {
            rel_tol: 1e-9,
            max_outer: 100,
            floor: 1e-9,
            barrier: BarrierOptions::default(),
        }
    }
}

/// Variable layout `[p' | m' | x' | y' | w]`, `K` entries each, where the
/// true quantities are `p = p' p_hat`, `M = m' M_hat`, `x = x_hat + x'`,
/// `y = y_hat + y'` and `l = s w`.
struct Subproblem {
    k: usize,
    /// `p_hat / P`.
    a: Vec<f64>,
    /// `M_hat / M`.
    b: Vec<f64>,
    /// `M_hat^2 e^(-y_hat)`.
    gamma: Vec<f64>,
    /// Scale of `l`.
    s: Vec<f64>,
    /// `l_hat / s`.
    r: Vec<f64>,
}

impl Subproblem {
    fn p(&self, k: usize) -> usize {
        k
    }
    fn m(&self, k: usize) -> usize {
        self.k + k
    }
    fn x(&self, k: usize) -> usize {
        2 * self.k + k
    }
    fn y(&self, k: usize) -> usize {
        3 * self.k + k
    }
    fn w(&self, k: usize) -> usize {
        4 * self.k + k
    }

    fn start(&self) -> Result<DVector<f64>> {
        let k = self.k;
        let sum_a: f64 = self.a.iter().sum();
        let sum_b: f64 = self.b.iter().sum();
        if sum_b >= 2.0 {
            return Err(Error::domain(
                "tangent point far outside the element budget",
            ));
        }
        let p = 0.9 * (1.0 / sum_a).min(1.0);
        let cap = (1.0 / sum_b).min(1.0);
        let m = 0.5 + 0.8 * (cap - 0.5);
        let mut z = DVector::zeros(5 * k);
        for i in 0..k {
            let x = p.ln() - 0.05;
            let y = (self.gamma[i] * (2.0 * m - 1.0)).ln() - 0.05;
            let lower = -1.0 / self.s[i];
            let upper = self.r[i] * (1.0 + x + y);
            if !(upper > lower) {
                return Err(Error::domain(
                    "no strictly feasible start for the subproblem",
                ));
            }
            z[self.p(i)] = p;
            z[self.m(i)] = m;
            z[self.x(i)] = x;
            z[self.y(i)] = y;
            z[self.w(i)] = lower + 0.9 * (upper - lower);
        }
        Ok(z)
    }
}

impl SmoothConvexProgram for Subproblem {
    fn dim(&self) -> usize {
        5 * self.k
    }

    fn num_inequalities(&self) -> usize {
        3 * self.k + 2
    }

    fn objective(&self, z: &DVector<f64>) -> Option<Local> {
        let mut out = Local::zeros(0.0, self.dim());
        for i in 0..self.k {
            let arg = 1.0 + self.s[i] * z[self.w(i)];
            if !(arg > 0.0) {
                return None;
            }
            let wi = self.w(i);
            out.value -= arg.ln() / std::f64::consts::LN_2;
            out.gradient[wi] = -self.s[i] / (arg * std::f64::consts::LN_2);
            out.hessian[(wi, wi)] = self.s[i] * self.s[i] / (arg * arg * std::f64::consts::LN_2);
        }
        Some(out)
    }

    fn inequality(&self, idx: usize, z: &DVector<f64>) -> Local {
        let k = self.k;
        let n = self.dim();
        match idx {
            0 => {
                let mut l = Local::zeros(-1.0, n);
                for i in 0..k {
                    l.value += self.a[i] * z[self.p(i)];
                    l.gradient[self.p(i)] = self.a[i];
                }
                l
            }
            1 => {
                let mut l = Local::zeros(-1.0, n);
                for i in 0..k {
                    l.value += self.b[i] * z[self.m(i)];
                    l.gradient[self.m(i)] = self.b[i];
                }
                l
            }
            _ if idx < 2 + k => {
                // e^x' <= p'
                let i = idx - 2;
                let e = z[self.x(i)].exp();
                let mut l = Local::zeros(e - z[self.p(i)], n);
                l.gradient[self.x(i)] = e;
                l.gradient[self.p(i)] = -1.0;
                l.hessian[(self.x(i), self.x(i))] = e;
                l
            }
            _ if idx < 2 + 2 * k => {
                // tangent bound on l
                let i = idx - 2 - k;
                let r = self.r[i];
                let mut l = Local::zeros(z[self.w(i)] - r * (1.0 + z[self.x(i)] + z[self.y(i)]), n);
                l.gradient[self.w(i)] = 1.0;
                l.gradient[self.x(i)] = -r;
                l.gradient[self.y(i)] = -r;
                l
            }
            _ => {
                // e^y' <= gamma (2 m' - 1)
                let i = idx - 2 - 2 * k;
                let e = z[self.y(i)].exp();
                let g = self.gamma[i];
                let mut l = Local::zeros(e - g * (2.0 * z[self.m(i)] - 1.0), n);
                l.gradient[self.y(i)] = e;
                l.gradient[self.m(i)] = -2.0 * g;
                l.hessian[(self.y(i), self.y(i))] = e;
                l
            }
        }
    }
}

/// Solves the convex surrogate at `state` with default barrier settings.
/// Every surface must have `chi_k > 0`.
pub fn convex_subproblem(
    chi: &ChannelQuality,
    config: &SystemConfig,
    state: &ScaState,
) -> Result<SubproblemSolution> {
    solve_subproblem(chi, config, state, &BarrierOptions::default())
}

fn solve_subproblem(
    chi: &ChannelQuality,
    config: &SystemConfig,
    state: &ScaState,
    options: &BarrierOptions,
) -> Result<SubproblemSolution> {
    let k = chi.len();
    if [state.x_hat.len(), state.y_hat.len(), state.m_hat.len()]
        .iter()
        .any(|&n| n != k)
    {
        return Err(Error::domain(
            "tangent point and channel quality differ in length",
        ));
    }
    if chi.chi.iter().any(|&c| c <= 0.0) {
        return Err(Error::domain("subproblem needs chi_k > 0 on every surface"));
    }
    if config.element_budget == 0 || !(config.power_budget > 0.0) {
        return Err(Error::domain(
            "subproblem needs positive power and element budgets",
        ));
    }
    let budget_m = config.element_budget as f64;
    let mut problem = Subproblem {
        k,
        a: Vec::with_capacity(k),
        b: Vec::with_capacity(k),
        gamma: Vec::with_capacity(k),
        s: Vec::with_capacity(k),
        r: Vec::with_capacity(k),
    };
    for i in 0..k {
        let c = chi.chi[i] * (state.x_hat[i] + state.y_hat[i]).exp();
        let s = c.max(1.0);
        problem.a.push(state.x_hat[i].exp() / config.power_budget);
        problem.b.push(state.m_hat[i] / budget_m);
        problem
            .gamma
            .push(state.m_hat[i] * state.m_hat[i] * (-state.y_hat[i]).exp());
        problem.s.push(s);
        problem.r.push(c / s);
    }
    let report = minimize(&problem, problem.start()?, options)?;
    let z = &report.z;
    let mut out = SubproblemSolution {
        powers: Vec::with_capacity(k),
        m_tilde: Vec::with_capacity(k),
        l: Vec::with_capacity(k),
        x: Vec::with_capacity(k),
        y: Vec::with_capacity(k),
        objective: -report.objective,
        duality_gap: report.duality_gap,
        kkt_residual: report.kkt_residual,
        newton_steps: report.newton_steps,
    };
    for i in 0..k {
        out.powers.push(z[problem.p(i)] * state.x_hat[i].exp());
        out.m_tilde.push(z[problem.m(i)] * state.m_hat[i]);
        out.x.push(state.x_hat[i] + z[problem.x(i)]);
        out.y.push(state.y_hat[i] + z[problem.y(i)]);
        out.l.push(problem.s[i] * z[problem.w(i)]);
    }
    Ok(out)
}

struct Relaxed {
    powers: Vec<f64>,
    elements: Vec<f64>,
    trace: Vec<f64>,
    iterations: usize,
}

/// Outer loop on a problem where every `chi_k > 0`.
fn outer_loop(
    chi: &ChannelQuality,
    config: &SystemConfig,
    powers: Vec<f64>,
    elements: Vec<f64>,
    options: &ScaOptions,
) -> Result<Relaxed> {
    let mut current = Relaxed {
        trace: vec![relaxed_spectral_efficiency(&elements, &powers, chi)],
        powers,
        elements,
        iterations: 0,
    };
    for j in 1..=options.max_outer {
        let state = ScaState::from_point(&current.powers, &current.elements, chi, options.floor);
        let sol = solve_subproblem(chi, config, &state, &options.barrier)?;
        current.iterations = j;
        let previous = *current.trace.last().expect("trace starts non-empty");
        let value = relaxed_spectral_efficiency(&sol.m_tilde, &sol.powers, chi);
        if value < previous {
            break;
        }
        current.trace.push(value);
        current.powers = sol.powers;
        current.elements = sol.m_tilde;
        if value - previous <= options.rel_tol * value.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(current)
}

fn finish(
    chi: &ChannelQuality,
    config: &SystemConfig,
    support: &[usize],
    relaxed: Relaxed,
) -> Result<AllocationSolution> {
    let k = chi.len();
    let mut relaxed_elements = vec![0.0; k];
    let mut relaxed_powers = vec![0.0; k];
    for (j, &i) in support.iter().enumerate() {
        relaxed_elements[i] = relaxed.elements[j];
        relaxed_powers[i] = relaxed.powers[j];
    }
    let elements = round_elements(&relaxed_elements, config.element_budget);
    let powers = powers_for_elements(&elements, chi, config.power_budget)?;
    Ok(AllocationSolution {
        se: spectral_efficiency(&elements, &powers, chi),
        relaxed_se: relaxed_spectral_efficiency(&relaxed_elements, &relaxed_powers, chi),
        elements,
        powers,
        trace: relaxed.trace,
        relaxed_elements,
        relaxed_powers,
        iterations: relaxed.iterations,
    })
}

fn zero_solution(chi: &ChannelQuality) -> AllocationSolution {
    AllocationSolution::from_integer(vec![0; chi.len()], vec![0.0; chi.len()], chi)
}

fn run_on_support(
    chi: &ChannelQuality,
    config: &SystemConfig,
    support: &[usize],
    powers: Vec<f64>,
    elements: Vec<f64>,
    options: &ScaOptions,
) -> Result<AllocationSolution> {
    let reduced = ChannelQuality {
        chi: support.iter().map(|&i| chi.chi[i]).collect(),
    };
    let relaxed = outer_loop(&reduced, config, powers, elements, options)?;
    finish(chi, config, support, relaxed)
}

/// Runs SCA from `init` (its relaxed split) or, without one, from equal
/// power and elements on every surface. Surfaces with `chi_k = 0`, or with
/// no power or elements in `init`, are left out and receive nothing; an
/// all-zero `chi` is an error.
pub fn sca_optimize(
    chi: &ChannelQuality,
    config: &SystemConfig,
    init: Option<&AllocationSolution>,
    options: &ScaOptions,
) -> Result<AllocationSolution> {
    check_power(config)?;
    check_live(chi)?;
    let k = chi.len();
    if let Some(start) = init {
        if start.relaxed_elements.len() != k || start.relaxed_powers.len() != k {
            return Err(Error::domain(
                "initial split and channel quality differ in length",
            ));
        }
    }
    let support: Vec<usize> = (0..k)
        .filter(|&i| chi.chi[i] > 0.0)
        .filter(|&i| init.is_none_or(|s| s.relaxed_elements[i] > 0.0 && s.relaxed_powers[i] > 0.0))
        .collect();
    if config.element_budget == 0 || support.is_empty() {
        return Ok(zero_solution(chi));
    }
    let (powers, elements) = match init {
        Some(s) => (
            support.iter().map(|&i| s.relaxed_powers[i]).collect(),
            support.iter().map(|&i| s.relaxed_elements[i]).collect(),
        ),
        None => equal_split(config, support.len()),
    };
    run_on_support(chi, config, &support, powers, elements, options)
}

fn check_live(chi: &ChannelQuality) -> Result<()> {
    if chi.chi.iter().all(|&c| c == 0.0) {
        return Err(Error::domain("every surface has zero channel quality"));
    }
    Ok(())
}

fn check_power(config: &SystemConfig) -> Result<()> {
    if config.power_budget.is_finite() && config.power_budget > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "power budget must be positive, got {}",
            config.power_budget
        )))
    }
}

fn equal_split(config: &SystemConfig, n: usize) -> (Vec<f64>, Vec<f64>) {
    (
        vec![config.power_budget / n as f64; n],
        vec![config.element_budget as f64 / n as f64; n],
    )
}

/// SCA from equal splits over the strongest `s` surfaces, for every `s`,
/// keeping the run with the highest relaxed rate. The surrogate is not
/// jointly concave, so a single start can stall at a split that spreads
/// the budget too thinly; nested supports cover those cases.
///
/// `iterations` of the result counts outer iterations over all starts.
pub fn sca_optimize_multistart(
    chi: &ChannelQuality,
    config: &SystemConfig,
    options: &ScaOptions,
) -> Result<AllocationSolution> {
    check_power(config)?;
    check_live(chi)?;
    let mut live: Vec<usize> = (0..chi.len()).filter(|&i| chi.chi[i] > 0.0).collect();
    if config.element_budget == 0 || live.is_empty() {
        return Ok(zero_solution(chi));
    }
    live.sort_by(|&a, &b| chi.chi[b].total_cmp(&chi.chi[a]).then(a.cmp(&b)));
    let mut best: Option<AllocationSolution> = None;
    let mut total = 0;
    for s in 1..=live.len() {
        let mut support = live[..s].to_vec();
        support.sort_unstable();
        let (powers, elements) = equal_split(config, s);
        let sol = run_on_support(chi, config, &support, powers, elements, options)?;
        total += sol.iterations;
        if best.as_ref().is_none_or(|b| sol.relaxed_se > b.relaxed_se) {
            best = Some(sol);
        }
    }
    let mut best = best.expect("at least one support");
    best.iterations = total;
    Ok(best)
}
