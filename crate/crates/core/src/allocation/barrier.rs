//! Log-barrier interior-point method for small, dense, smooth convex
//! programs
//!
//! ```text
//! minimize f0(z)  subject to  f_i(z) <= 0,  i = 1..m
//! ```
//!
//! Each centering step minimizes `t f0(z) - sum_i log(-f_i(z))` by damped
//! Newton iterations with a backtracking line search; `t` is then
//! multiplied by `mu` until the duality gap bound `m / t` falls below the
//! requested tolerance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Value, gradient and Hessian of a scalar function at a point.
#[derive(Debug, Clone)]
pub struct Local {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl Local {
    pub fn zeros(value: f64, dim: usize) -> Self {
        Local {
            value,
            gradient: DVector::zeros(dim),
            hessian: DMatrix::zeros(dim, dim),
        }
    }
}

pub trait SmoothConvexProgram {
    fn dim(&self) -> usize;
    fn num_inequalities(&self) -> usize;
    /// Objective to minimize, or `None` outside its domain.
    fn objective(&self, z: &DVector<f64>) -> Option<Local>;
    /// The `i`-th constraint function `f_i`, feasible when `f_i(z) <= 0`.
    fn inequality(&self, i: usize, z: &DVector<f64>) -> Local;
}

#[derive(Debug, Clone)]
pub struct BarrierOptions {
    pub t0: f64,
    pub mu: f64,
    /// Target bound on the duality gap `m / t`.
    pub gap_tol: f64,
    /// Centering stops once half the squared Newton decrement is below this.
    pub newton_tol: f64,
    /// Cap on the total number of Newton steps.
    pub max_newton: usize,
    pub armijo: f64,
    pub backtrack: f64,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        BarrierOptions {
            t0: 1.0,
            mu: 20.0,
            gap_tol: 1e-8,
            newton_tol: 1e-10,
            max_newton: 2000,
            armijo: 0.01,
            backtrack: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BarrierReport {
    pub z: DVector<f64>,
    pub objective: f64,
    /// Bound `m / t` on the suboptimality of `objective`.
    pub duality_gap: f64,
    /// Infinity norm of the Lagrangian gradient at the recovered duals
    /// `lambda_i = -1 / (t f_i)`.
    pub kkt_residual: f64,
    /// Largest constraint value (negative when strictly feasible).
    pub max_violation: f64,
    pub newton_steps: usize,
}

/// Decrement below which the full Newton step is taken without the
/// sufficient-decrease test, whose evaluation is dominated by rounding
/// once `t f0` is large.
const QUADRATIC_REGION: f64 = 1e-6;

struct Eval {
    psi: f64,
    gradient: DVector<f64>,
    hessian: DMatrix<f64>,
}

fn strictly_feasible<P: SmoothConvexProgram>(problem: &P, z: &DVector<f64>) -> bool {
    problem.objective(z).is_some()
        && (0..problem.num_inequalities()).all(|i| {
            let v = problem.inequality(i, z).value;
            v.is_finite() && v < 0.0
        })
}

fn evaluate<P: SmoothConvexProgram>(problem: &P, z: &DVector<f64>, t: f64) -> Option<Eval> {
    let f0 = problem.objective(z)?;
    let mut psi = t * f0.value;
    let mut gradient = f0.gradient * t;
    let mut hessian = f0.hessian * t;
    for i in 0..problem.num_inequalities() {
        let fi = problem.inequality(i, z);
        if !(fi.value < 0.0) {
            return None;
        }
        let inv = -1.0 / fi.value;
        psi -= (-fi.value).ln();
        gradient.axpy(inv, &fi.gradient, 1.0);
        hessian.ger(inv * inv, &fi.gradient, &fi.gradient, 1.0);
        hessian += fi.hessian * inv;
    }
    Some(Eval {
        psi,
        gradient,
        hessian,
    })
}

fn psi_only<P: SmoothConvexProgram>(problem: &P, z: &DVector<f64>, t: f64) -> Option<f64> {
    let f0 = problem.objective(z)?;
    let mut psi = t * f0.value;
    for i in 0..problem.num_inequalities() {
        let v = problem.inequality(i, z).value;
        if !(v < 0.0) {
            return None;
        }
        psi -= (-v).ln();
    }
    Some(psi)
}

fn newton_direction(hessian: DMatrix<f64>, gradient: &DVector<f64>) -> Option<DVector<f64>> {
    let rhs = -gradient;
    if let Some(chol) = hessian.clone().cholesky() {
        return Some(chol.solve(&rhs));
    }
    hessian.lu().solve(&rhs)
}

/// Runs the barrier method from the strictly feasible point `z0`.
pub fn minimize<P: SmoothConvexProgram>(
    problem: &P,
    z0: DVector<f64>,
    options: &BarrierOptions,
) -> Result<BarrierReport> {
    if z0.len() != problem.dim() {
        return Err(Error::domain("starting point has the wrong dimension"));
    }
    if !strictly_feasible(problem, &z0) {
        return Err(Error::domain(
            "barrier method needs a strictly feasible start",
        ));
    }
    let m = problem.num_inequalities() as f64;
    let mut z = z0;
    let mut t = options.t0;
    let mut steps = 0usize;

    loop {
        // centering
        let mut previous = f64::INFINITY;
        loop {
            let eval = evaluate(problem, &z, t).expect("iterate left the feasible set");
            let Some(dz) = newton_direction(eval.hessian, &eval.gradient) else {
                break;
            };
            let slope = eval.gradient.dot(&dz);
            let decrement = -slope;
            if decrement / 2.0 <= options.newton_tol {
                break;
            }
            // Inside the quadratic region the decrement should collapse; if
            // it does not, rounding noise has taken over.
            if decrement < QUADRATIC_REGION && decrement > 0.5 * previous {
                break;
            }
            previous = decrement;
            if steps >= options.max_newton {
                return Err(Error::Solver {
                    iterations: steps,
                    duality_gap: m / t,
                    newton_decrement: decrement,
                    last_iterate: z.iter().copied().collect(),
                });
            }
            steps += 1;

            let mut s = 1.0;
            let near = decrement < QUADRATIC_REGION;
            loop {
                let trial = &z + &dz * s;
                match psi_only(problem, &trial, t) {
                    Some(v) if near || v <= eval.psi + options.armijo * s * slope => {
                        z = trial;
                        break;
                    }
                    _ => s *= options.backtrack,
                }
                if s < 1e-16 {
                    break;
                }
            }
            if s < 1e-16 {
                // no progress possible at this precision
                break;
            }
        }

        if m / t <= options.gap_tol {
            break;
        }
        t *= options.mu;
    }

    let f0 = problem
        .objective(&z)
        .expect("final iterate outside the domain");
    let mut lagrangian = f0.gradient.clone();
    let mut max_violation = f64::NEG_INFINITY;
    for i in 0..problem.num_inequalities() {
        let fi = problem.inequality(i, &z);
        max_violation = max_violation.max(fi.value);
        lagrangian.axpy(-1.0 / (t * fi.value), &fi.gradient, 1.0);
    }
    Ok(BarrierReport {
        objective: f0.value,
        duality_gap: m / t,
        kkt_residual: lagrangian.amax(),
        max_violation,
        newton_steps: steps,
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// minimize (z0 - 2)^2 + (z1 + 1)^2  subject to  z0 + z1 <= 0.5, z0^2 <= 1
    struct Toy;

    impl SmoothConvexProgram for Toy {
        fn dim(&self) -> usize {
            2
        }
        fn num_inequalities(&self) -> usize {
            2
        }
        fn objective(&self, z: &DVector<f64>) -> Option<Local> {
            let mut l = Local::zeros((z[0] - 2.0).powi(2) + (z[1] + 1.0).powi(2), 2);
            l.gradient[0] = 2.0 * (z[0] - 2.0);
            l.gradient[1] = 2.0 * (z[1] + 1.0);
            l.hessian[(0, 0)] = 2.0;
            l.hessian[(1, 1)] = 2.0;
            Some(l)
        }
        fn inequality(&self, i: usize, z: &DVector<f64>) -> Local {
            match i {
                0 => {
                    let mut l = Local::zeros(z[0] + z[1] - 0.5, 2);
                    l.gradient[0] = 1.0;
                    l.gradient[1] = 1.0;
                    l
                }
                _ => {
                    let mut l = Local::zeros(z[0] * z[0] - 1.0, 2);
                    l.gradient[0] = 2.0 * z[0];
                    l.hessian[(0, 0)] = 2.0;
                    l
                }
            }
        }
    }

    #[test]
    fn solves_toy_problem() {
        // Optimum (1, -1): the box is active, the line is slack
        let report =
            minimize(&Toy, DVector::from_vec(vec![0.0, 0.0]), &Default::default()).unwrap();
        assert!((report.z[0] - 1.0).abs() < 1e-6);
        assert!((report.z[1] + 1.0).abs() < 1e-6);
        assert!(report.duality_gap <= 1e-8);
        assert!(report.kkt_residual < 1e-6);
        assert!(report.max_violation < 0.0);
    }

    #[test]
    fn rejects_infeasible_start() {
        let err = minimize(&Toy, DVector::from_vec(vec![2.0, 0.0]), &Default::default());
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn reports_iteration_cap() {
        let options = BarrierOptions {
            max_newton: 1,
            ..Default::default()
        };
        let err = minimize(&Toy, DVector::from_vec(vec![0.0, 0.0]), &options);
        assert!(matches!(err, Err(Error::Solver { .. })));
    }
}
