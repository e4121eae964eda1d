use num_complex::Complex64;
use rayon::prelude::*;

use super::{DensityField, DesignProblem, FilterChain, TopoptError, EPS_SILICA, EPS_SILICON};
use crate::em::{mode_overlap, FieldSolver};

/// Port amplitudes and merit of one excitation condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResult {
    pub amplitudes: Vec<Complex64>,
    /// `|a|^2` per target, in units of a unit-power source.
    pub powers: Vec<f64>,
    /// `1 - sum w (P - goal)^2`, before the condition weight.
    pub merit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub conditions: Vec<ConditionResult>,
    /// Field solves performed.
    pub solves: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub evaluation: Evaluation,
    /// `dF/drho` per pixel, indexed like [`DensityField::values`].
    pub values: Vec<f64>,
}

/// `F = sum_c weight_c (1 - sum_t w_t (P_t - goal_t)^2)`.
pub fn evaluate_objective(problem: &DesignProblem, rho: &DensityField) -> Result<Evaluation, TopoptError> {
    Ok(run(problem, rho, false)?.evaluation)
}

/// Gradient of [`evaluate_objective`] with respect to the raw densities, using
/// one forward and one adjoint solve per condition.
pub fn adjoint_gradient(problem: &DesignProblem, rho: &DensityField) -> Result<Gradient, TopoptError> {
    run(problem, rho, true)
}

struct GroupResult {
    conditions: Vec<(usize, ConditionResult)>,
    /// Gradient with respect to the physical density of each pixel.
    grad: Vec<f64>,
    solves: usize,
}

fn run(problem: &DesignProblem, rho: &DensityField, gradient: bool) -> Result<Gradient, TopoptError> {
    problem.validate()?;
    problem.check_density(rho)?;
    let chain = problem.filter.map(|spec| FilterChain::new(spec, rho.px(), rho.py(), rho.pitch()));
    let (filtered, physical) = match &chain {
        Some(c) => c.forward(rho.values()),
        None => (Vec::new(), rho.values().to_vec()),
    };

    let groups = problem.wavelength_groups();
    let results: Vec<GroupResult> = groups
        .par_iter()
        .map(|(wavelength, members)| solve_group(problem, &physical, *wavelength, members, gradient))
        .collect::<Result<_, _>>()?;

    let mut conditions: Vec<Option<ConditionResult>> = vec![None; problem.conditions.len()];
    let mut grad_physical = vec![0.0; physical.len()];
    let mut solves = 0;
    for g in results {
        solves += g.solves;
        for (k, c) in g.conditions {
            conditions[k] = Some(c);
        }
        for (acc, v) in grad_physical.iter_mut().zip(&g.grad) {
            *acc += v;
        }
    }
    let conditions: Vec<ConditionResult> = conditions.into_iter().map(|c| c.expect("every condition solved")).collect();
    let objective = problem.conditions.iter().zip(&conditions).map(|(c, r)| c.weight * r.merit).sum();
    let values = match (&chain, gradient) {
        (_, false) => Vec::new(),
        (Some(c), true) => c.backward(&filtered, &grad_physical),
        (None, true) => grad_physical,
    };
    Ok(Gradient { evaluation: Evaluation { objective, conditions, solves }, values })
}

fn solve_group(
    problem: &DesignProblem,
    physical: &[f64],
    wavelength: f64,
    members: &[usize],
    gradient: bool,
) -> Result<GroupResult, TopoptError> {
    let grid = problem.grid_with(physical, wavelength)?;
    let solver = FieldSolver::new(&grid)?;
    let r = problem.region;
    let c = r.cells_per_pixel;
    let mut grad = vec![0.0; physical.len()];
    let mut conditions = Vec::with_capacity(members.len());
    for &k in members {
        let cond = &problem.conditions[k];
        let field = solver.solve(&cond.sources)?;
        let amplitudes = cond
            .targets
            .iter()
            .map(|t| mode_overlap(&field, &t.monitor))
            .collect::<Result<Vec<_>, _>>()?;
        let powers: Vec<f64> = amplitudes.iter().map(|a| a.norm_sqr()).collect();
        let penalty: f64 = cond.targets.iter().zip(&powers).map(|(t, p)| t.weight * (p - t.goal).powi(2)).sum();
        let merit = 1.0 - penalty;

        if gradient {
            // dF = Re(v^T dE) with v = sum_t kappa_t conj(m_t) on each monitor cut.
            let n = grid.nx() * grid.ny();
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            for ((t, a), p) in cond.targets.iter().zip(&amplitudes).zip(&powers) {
                let kappa = -4.0 * cond.weight * t.weight * (p - t.goal) * a.conj();
                let cut = t.monitor.mode.cut;
                for (m, j) in t.monitor.mode.amplitude.iter().zip(cut.rows()) {
                    v[grid.index(cut.x, j)] += kappa * m.conj();
                }
            }
            let adjoint = solver.solve_transpose_rhs(v)?;
            let scale = EPS_SILICON - EPS_SILICA;
            for x in 0..r.px {
                for y in 0..r.py {
                    let mut acc = 0.0;
                    for i in r.x0 + x * c..r.x0 + (x + 1) * c {
                        for j in r.y0 + y * c..r.y0 + (y + 1) * c {
                            let d = -adjoint.get(i, j) * solver.eps_sensitivity(i, j) * field.get(i, j);
                            acc += d.re;
                        }
                    }
                    grad[x * r.py + y] += acc * scale;
                }
            }
        }
        conditions.push((k, ConditionResult { amplitudes, powers, merit }));
    }
    Ok(GroupResult { conditions, grad, solves: solver.solves() })
}
