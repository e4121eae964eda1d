use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{adjoint_gradient, evaluate_objective, DensityField, DesignProblem, Evaluation, FilterSpec, TopoptError};
use crate::table;

/// Iteration budget, projection continuation and step size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub iterations: usize,
    pub filter_radius: f64,
    pub eta: f64,
    /// Projection sharpness per stage; stages split the budget evenly.
    pub betas: Vec<f64>,
    /// Initial per-pixel step in density units.
    pub step: f64,
}

impl Schedule {
    pub fn with_iterations(iterations: usize) -> Self {
        Self {
            iterations,
            filter_radius: FilterSpec::DEFAULT_RADIUS,
            eta: 0.5,
            betas: vec![1.0, 4.0, 16.0, 64.0],
            step: 0.05,
        }
    }

    /// Projection sharpness in effect at `iteration`.
    pub fn beta_at(&self, iteration: usize) -> f64 {
        let stages = self.betas.len().max(1);
        let stage = (iteration * stages / self.iterations.max(1)).min(stages - 1);
        self.betas.get(stage).copied().unwrap_or(1.0)
    }

    pub fn filter_at(&self, iteration: usize) -> FilterSpec {
        FilterSpec { radius: self.filter_radius, beta: self.beta_at(iteration), eta: self.eta }
    }

    fn validate(&self) -> Result<(), TopoptError> {
        if self.iterations == 0 {
            return Err(TopoptError::InvalidProblem("iteration budget must be at least 1".into()));
        }
        if self.betas.is_empty() || !(self.step > 0.0) {
            return Err(TopoptError::InvalidProblem("schedule needs betas and a positive step".into()));
        }
        for k in 0..self.iterations {
            self.filter_at(k).validate()?;
        }
        Ok(())
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Self::with_iterations(200)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRecord {
    pub iteration: usize,
    pub beta: f64,
    pub objective: f64,
    /// Port powers per condition, in target order.
    pub powers: Vec<Vec<f64>>,
    pub solves: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OptimizationHistory {
    pub records: Vec<HistoryRecord>,
}

impl OptimizationHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// CSV columns: iteration, beta, objective, one column per (condition, target), solves.
    pub fn write_csv<W: Write>(&self, w: W, comments: &[String], port_labels: &[String]) -> Result<(), TopoptError> {
        let mut columns = vec!["iteration".to_string(), "beta".into(), "objective".into()];
        columns.extend(port_labels.iter().cloned());
        columns.push("solves".into());
        let rows = self.records.iter().map(|r| {
            let mut row = vec![r.iteration as f64, r.beta, r.objective];
            row.extend(r.powers.iter().flatten());
            row.push(r.solves as f64);
            row
        });
        table::write_records(w, comments, &columns, rows).map_err(|e| TopoptError::Io(e.to_string()))
    }
}

/// Moment estimates for the per-pixel adaptive step.
struct Moments {
    first: Vec<f64>,
    second: Vec<f64>,
    t: i32,
}

impl Moments {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-12;

    fn new(n: usize) -> Self {
        Self { first: vec![0.0; n], second: vec![0.0; n], t: 0 }
    }

    /// Ascent step for gradient `g`.
    fn step(&mut self, g: &[f64], lr: f64) -> Vec<f64> {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        g.iter()
            .enumerate()
            .map(|(k, &gk)| {
                self.first[k] = Self::B1 * self.first[k] + (1.0 - Self::B1) * gk;
                self.second[k] = Self::B2 * self.second[k] + (1.0 - Self::B2) * gk * gk;
                lr * (self.first[k] / c1) / ((self.second[k] / c2).sqrt() + Self::EPS)
            })
            .collect()
    }
}

/// Maximize the objective from `init`. Returns the binarized physical design
/// (filtered, projected with the last stage, thresholded at 0.5) and the history.
///
/// The objective recorded at iteration `k` is the one evaluated before the
/// `k`-th update.
pub fn optimize(
    problem: &DesignProblem,
    init: &DensityField,
    schedule: &Schedule,
) -> Result<(DensityField, OptimizationHistory), TopoptError> {
    optimize_with(problem, init, schedule, |_| {})
}

/// [`optimize`] with a per-iteration observer.
pub fn optimize_with(
    problem: &DesignProblem,
    init: &DensityField,
    schedule: &Schedule,
    mut observe: impl FnMut(&HistoryRecord),
) -> Result<(DensityField, OptimizationHistory), TopoptError> {
    schedule.validate()?;
    problem.check_density(init)?;
    let mut rho = init.clamped();
    let mut moments = Moments::new(rho.values().len());
    let mut history = OptimizationHistory::default();
    let mut working = problem.clone();
    let mut beta = f64::NAN;
    for iteration in 0..schedule.iterations {
        let stage_beta = schedule.beta_at(iteration);
        if stage_beta != beta {
            beta = stage_beta;
            working.filter = Some(schedule.filter_at(iteration));
            // Sharper projection rescales the gradient; restart the moments.
            moments = Moments::new(rho.values().len());
        }
        let grad = adjoint_gradient(&working, &rho)?;
        let eval = &grad.evaluation;
        if !eval.objective.is_finite() || grad.values.iter().any(|g| !g.is_finite()) {
            return Err(TopoptError::Diverged { iteration });
        }
        let record = HistoryRecord {
            iteration,
            beta,
            objective: eval.objective,
            powers: eval.conditions.iter().map(|c| c.powers.clone()).collect(),
            solves: eval.solves,
        };
        observe(&record);
        history.records.push(record);
        let step = moments.step(&grad.values, schedule.step);
        for (r, s) in rho.values_mut().iter_mut().zip(step) {
            *r = (*r + s).clamp(0.0, 1.0);
        }
    }
    let last = schedule.filter_at(schedule.iterations - 1);
    let physical = super::filter_and_project(&rho, last);
    Ok((physical.binarized(), history))
}

/// Evaluate a design exactly as given, with no smoothing or projection.
pub fn evaluate_final(problem: &DesignProblem, design: &DensityField) -> Result<Evaluation, TopoptError> {
    let mut raw = problem.clone();
    raw.filter = None;
    evaluate_objective(&raw, design)
}
