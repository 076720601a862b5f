//! Nelder-Mead simplex minimization, the derivative-free workhorse behind
//! the score-parameter search. The objective may return `+inf` to mark an
//! invalid point; only finite improvements are accepted.

use alloc::vec;
use alloc::vec::Vec;

/// Simplex search settings.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    /// Evaluation budget per restart.
    pub max_iterations: usize,
    /// Convergence threshold on the objective spread across the simplex.
    pub objective_tol: f64,
    /// Convergence threshold on the simplex diameter.
    pub simplex_tol: f64,
    /// Initial step added to each coordinate when building the simplex.
    pub initial_step: f64,
    /// Number of restarts from the incumbent after first convergence.
    pub restarts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            objective_tol: 1e-8,
            simplex_tol: 1e-8,
            initial_step: 0.25,
            restarts: 3,
        }
    }
}

/// Outcome of a simplex search.
#[derive(Debug, Clone)]
pub struct OptimOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

// Standard reflection/expansion/contraction/shrink coefficients.
const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

/// Minimize `f` from `x0` with restarts: after each convergence the simplex
/// is rebuilt around the incumbent and the search repeated.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], cfg: &OptimizerConfig) -> OptimOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let mut best = x0.to_vec();
    let mut best_f = f(&best);
    let mut evaluations = 1;
    let mut converged = false;
    for _ in 0..=cfg.restarts {
        let run = nelder_mead_once(&mut f, &best, best_f, cfg, &mut evaluations);
        converged = run.converged;
        if run.f < best_f {
            best = run.x;
            best_f = run.f;
        }
    }
    OptimOutcome {
        x: best,
        f: best_f,
        evaluations,
        converged,
    }
}

struct RunOutcome {
    x: Vec<f64>,
    f: f64,
    converged: bool,
}

fn nelder_mead_once<F>(
    f: &mut F,
    x0: &[f64],
    f0: f64,
    cfg: &OptimizerConfig,
    evaluations: &mut usize,
) -> RunOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let d = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    let mut values: Vec<f64> = vec![f0];
    for i in 0..d {
        let mut v = x0.to_vec();
        v[i] += cfg.initial_step;
        values.push(f(&v));
        *evaluations += 1;
        simplex.push(v);
    }

    let mut budget = cfg.max_iterations;
    let mut converged = false;
    while budget > 0 {
        // order vertices best..worst
        let mut idx: Vec<usize> = (0..=d).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(core::cmp::Ordering::Equal));
        let reorder_s: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let reorder_v: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        simplex = reorder_s;
        values = reorder_v;

        let spread = if values[d].is_finite() {
            values[d] - values[0]
        } else {
            f64::INFINITY
        };
        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| libm::fabs(a - b))
                    .fold(0.0_f64, f64::max)
            })
            .fold(0.0_f64, f64::max);
        if (spread < cfg.objective_tol && diameter < cfg.simplex_tol)
            || diameter < f64::EPSILON
        {
            converged = true;
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; d];
        for v in &simplex[..d] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / d as f64;
            }
        }

        let point = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = point(ALPHA, &simplex[d]);
        let fr = f(&reflected);
        *evaluations += 1;
        budget = budget.saturating_sub(1);

        if fr < values[0] {
            let expanded = point(GAMMA, &simplex[d]);
            let fe = f(&expanded);
            *evaluations += 1;
            budget = budget.saturating_sub(1);
            if fe < fr {
                simplex[d] = expanded;
                values[d] = fe;
            } else {
                simplex[d] = reflected;
                values[d] = fr;
            }
        } else if fr < values[d - 1] {
            simplex[d] = reflected;
            values[d] = fr;
        } else {
            // contraction: outside if the reflection improved on the worst,
            // inside otherwise
            let (contracted, fc) = if fr < values[d] {
                let c = point(RHO, &simplex[d].clone());
                let v = f(&c);
                (c, v)
            } else {
                let c = point(-RHO, &simplex[d].clone());
                let v = f(&c);
                (c, v)
            };
            *evaluations += 1;
            budget = budget.saturating_sub(1);
            if fc < values[d].min(fr) {
                simplex[d] = contracted;
                values[d] = fc;
            } else {
                // shrink toward the best vertex
                for i in 1..=d {
                    let target: Vec<f64> = simplex[0]
                        .iter()
                        .zip(&simplex[i])
                        .map(|(b, x)| b + SIGMA * (x - b))
                        .collect();
                    values[i] = f(&target);
                    *evaluations += 1;
                    simplex[i] = target;
                }
                budget = budget.saturating_sub(d);
            }
        }
    }

    let mut best = 0;
    for i in 1..=d {
        if values[i] < values[best] {
            best = i;
        }
    }
    RunOutcome {
        x: simplex[best].clone(),
        f: values[best],
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let out = nelder_mead(
            |x| (x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 2.0) * (x[1] - 2.0),
            &[0.0, 0.0],
            &OptimizerConfig::default(),
        );
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-5, "{:?}", out.x);
        assert!((out.x[1] - 2.0).abs() < 1e-5, "{:?}", out.x);
    }

    #[test]
    fn rosenbrock_with_restarts() {
        let rosen = |x: &[f64]| {
            100.0 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1.0 - x[0]) * (1.0 - x[0])
        };
        let out = nelder_mead(rosen, &[-1.2, 1.0], &OptimizerConfig::default());
        assert!(out.f < 1e-6, "f = {}", out.f);
        assert!((out.x[0] - 1.0).abs() < 1e-3);
        assert!((out.x[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn constant_objective_collapses() {
        let out = nelder_mead(|_| 7.0, &[3.0, -1.0], &OptimizerConfig::default());
        assert!(out.converged);
        assert_eq!(out.f, 7.0);
        assert!((out.x[0] - 3.0).abs() <= 0.25);
        assert!((out.x[1] + 1.0).abs() <= 0.25);
    }

    #[test]
    fn infinite_regions_are_avoided() {
        // valid only for x > 0; minimum at x = 2
        let out = nelder_mead(
            |x| {
                if x[0] <= 0.0 {
                    f64::INFINITY
                } else {
                    (x[0] - 2.0) * (x[0] - 2.0)
                }
            },
            &[0.5],
            &OptimizerConfig::default(),
        );
        assert!((out.x[0] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn deterministic_across_runs() {
        let run = || {
            nelder_mead(
                |x| libm::sin(x[0]) + x[0] * x[0] * 0.1,
                &[2.0],
                &OptimizerConfig::default(),
            )
        };
        let a = run();
        let b = run();
        assert_eq!(a.x, b.x);
        assert_eq!(a.f, b.f);
        assert_eq!(a.evaluations, b.evaluations);
    }
}
