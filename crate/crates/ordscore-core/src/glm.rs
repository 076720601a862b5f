//! Model fitting and inference: ordinary least squares for gaussian
//! responses, IRLS for grouped-binomial logistic regression, and Box-Cox
//! power profiling.

use crate::design::{build_design, DesignMatrix, ModelFrame, ResponseSpec, ScoreParams, TermSpec};
use crate::linalg::{least_squares, Mat};
use crate::score::{quantile_scores, ScoreFamilyParams, ScoreGrid};
use crate::special::{normal_p_value, t_p_value};
use crate::{Error, Result};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Which reference distribution the per-coefficient statistics use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatKind {
    /// Normal reference (grouped binomial fits).
    Z,
    /// Student t reference with `residual_df` degrees of freedom (gaussian).
    T,
}

/// Coefficient table plus fit diagnostics.
#[derive(Debug, Clone)]
pub struct FitSummary {
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// z or t statistics, per `stat_kind`.
    pub statistics: Vec<f64>,
    pub p_values: Vec<f64>,
    pub stat_kind: StatKind,
    /// Residual deviance; for gaussian fits this is the RSS.
    pub deviance: f64,
    /// Residual standard deviation (gaussian fits only).
    pub residual_sd: Option<f64>,
    pub residual_df: usize,
    pub n: usize,
    pub p: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Set when a coefficient diverged past |beta| = 30 during IRLS,
    /// the usual symptom of separation.
    pub separation_warning: bool,
    /// Deviance after each IRLS iteration (empty for OLS fits).
    pub deviance_trace: Vec<f64>,
}

impl FitSummary {
    /// Index of a coefficient by design-column name.
    pub fn coef_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

fn rank_error(design: &DesignMatrix, col: usize) -> Error {
    Error::RankDeficient(design.names()[col].clone())
}

/// Ordinary least squares with t-based inference.
pub fn fit_ols(design: &DesignMatrix, y: &[f64]) -> Result<FitSummary> {
    let n = design.n_rows();
    let p = design.n_cols();
    if y.len() != n {
        return Err(Error::Data(format!(
            "response has {} rows, design has {n}",
            y.len()
        )));
    }
    if n <= p {
        return Err(Error::Data(format!(
            "need n > p for least squares, got n = {n}, p = {p}"
        )));
    }
    let ls = least_squares(&design.mat, y).map_err(|j| rank_error(design, j))?;
    let fitted = design.mat.mul_vec(&ls.beta);
    let rss: f64 = y
        .iter()
        .zip(&fitted)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let df = n - p;
    let s2 = rss / df as f64;
    let s = libm::sqrt(s2);

    let mut std_errors = Vec::with_capacity(p);
    let mut statistics = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    for j in 0..p {
        let se = libm::sqrt(s2 * ls.xtx_inv.get(j, j));
        let t = ls.beta[j] / se;
        std_errors.push(se);
        statistics.push(t);
        p_values.push(t_p_value(t, df as f64)?);
    }

    Ok(FitSummary {
        names: design.names().to_vec(),
        estimates: ls.beta,
        std_errors,
        statistics,
        p_values,
        stat_kind: StatKind::T,
        deviance: rss,
        residual_sd: Some(s),
        residual_df: df,
        n,
        p,
        converged: true,
        iterations: 1,
        separation_warning: false,
        deviance_trace: Vec::new(),
    })
}

/// Grouped binomial deviance with the 0 ln 0 = 0 convention.
fn binomial_deviance(successes: &[f64], totals: &[f64], mu: &[f64]) -> f64 {
    let mut dev = 0.0;
    for i in 0..successes.len() {
        let (y, m) = (successes[i], totals[i]);
        if m == 0.0 {
            continue;
        }
        let fit = m * mu[i];
        if y > 0.0 {
            dev += y * libm::log(y / fit);
        }
        if m - y > 0.0 {
            dev += (m - y) * libm::log((m - y) / (m - fit));
        }
    }
    2.0 * dev
}

const IRLS_MAX_ITER: usize = 50;
const IRLS_REL_TOL: f64 = 1e-10;
const SEPARATION_BOUND: f64 = 30.0;
const MIN_WEIGHT: f64 = 1e-10;

/// Grouped-binomial logistic regression by iteratively reweighted least
/// squares, with normal-reference inference.
///
/// Starting values are `mu = (y + 1/2)/(m + 1)`; convergence is declared
/// when the relative deviance change drops below 1e-10 within 50
/// iterations. Coefficients drifting past |beta| = 30 set
/// `separation_warning` without aborting.
pub fn fit_logistic_grouped(
    design: &DesignMatrix,
    successes: &[f64],
    failures: &[f64],
) -> Result<FitSummary> {
    let n = design.n_rows();
    let p = design.n_cols();
    if successes.len() != n || failures.len() != n {
        return Err(Error::Data(format!(
            "binomial counts have {}/{} rows, design has {n}",
            successes.len(),
            failures.len()
        )));
    }
    let totals: Vec<f64> = successes
        .iter()
        .zip(failures)
        .map(|(s, f)| s + f)
        .collect();
    if totals.iter().all(|&m| m == 0.0) {
        return Err(Error::Data(String::from(
            "all binomial rows have zero trials",
        )));
    }

    // mu and eta per row; eta = logit(mu).
    let mut mu: Vec<f64> = successes
        .iter()
        .zip(&totals)
        .map(|(y, m)| (y + 0.5) / (m + 1.0))
        .collect();
    let mut eta: Vec<f64> = mu.iter().map(|&u| libm::log(u / (1.0 - u))).collect();

    let mut beta = vec![0.0; p];
    let mut xtx_inv = Mat::zeros(p, p);
    let mut deviance = binomial_deviance(successes, &totals, &mu);
    let mut deviance_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    let mut weighted = Mat::zeros(n, p);
    let mut wz = vec![0.0; n];

    for iter in 1..=IRLS_MAX_ITER {
        iterations = iter;
        for i in 0..n {
            let m = totals[i];
            let w = (m * mu[i] * (1.0 - mu[i])).max(if m > 0.0 { MIN_WEIGHT } else { 0.0 });
            let z = if w > 0.0 {
                eta[i] + (successes[i] - m * mu[i]) / w
            } else {
                0.0
            };
            let sw = libm::sqrt(w);
            for j in 0..p {
                weighted.set(i, j, sw * design.mat.get(i, j));
            }
            wz[i] = sw * z;
        }
        let ls = least_squares(&weighted, &wz).map_err(|j| rank_error(design, j))?;
        beta = ls.beta;
        xtx_inv = ls.xtx_inv;

        eta = design.mat.mul_vec(&beta);
        for i in 0..n {
            mu[i] = 1.0 / (1.0 + libm::exp(-eta[i]));
        }
        let new_deviance = binomial_deviance(successes, &totals, &mu);
        deviance_trace.push(new_deviance);
        let rel = libm::fabs(new_deviance - deviance) / (libm::fabs(new_deviance) + 0.1);
        deviance = new_deviance;
        if rel < IRLS_REL_TOL {
            converged = true;
            break;
        }
    }

    // Refresh the weighted problem at the converged mu so the covariance
    // uses final weights rather than the previous iterate's.
    for i in 0..n {
        let m = totals[i];
        let w = (m * mu[i] * (1.0 - mu[i])).max(if m > 0.0 { MIN_WEIGHT } else { 0.0 });
        let sw = libm::sqrt(w);
        for j in 0..p {
            weighted.set(i, j, sw * design.mat.get(i, j));
        }
        wz[i] = sw * eta[i];
    }
    if let Ok(ls) = least_squares(&weighted, &wz) {
        xtx_inv = ls.xtx_inv;
    }

    let separation_warning = beta.iter().any(|b| libm::fabs(*b) > SEPARATION_BOUND);
    let mut std_errors = Vec::with_capacity(p);
    let mut statistics = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    for j in 0..p {
        let se = libm::sqrt(xtx_inv.get(j, j));
        let z = beta[j] / se;
        std_errors.push(se);
        statistics.push(z);
        p_values.push(normal_p_value(z));
    }

    Ok(FitSummary {
        names: design.names().to_vec(),
        estimates: beta,
        std_errors,
        statistics,
        p_values,
        stat_kind: StatKind::Z,
        deviance,
        residual_sd: None,
        residual_df: n - p,
        n,
        p,
        converged,
        iterations,
        separation_warning,
        deviance_trace,
    })
}

/// Build the grids for every fixed-parameter score term and merge them with
/// grids supplied for free terms.
pub fn score_grids_for_frame(
    frame: &ModelFrame,
    free_grids: &BTreeMap<String, ScoreGrid>,
) -> Result<BTreeMap<String, ScoreGrid>> {
    let mut grids = free_grids.clone();
    for term in &frame.terms {
        if let TermSpec::FactorScore {
            column,
            family,
            params,
        } = term
        {
            match params {
                ScoreParams::Fixed { p1, p2 } => {
                    let k = frame.factor_column(column)?.n_levels().unwrap();
                    let fp = ScoreFamilyParams::new(*family, *p1, *p2)?;
                    grids.insert(column.clone(), quantile_scores(k, &fp)?);
                }
                ScoreParams::Free => {
                    if !grids.contains_key(column) {
                        return Err(Error::Data(format!(
                            "free score term '{column}' has no grid; run the optimizer or pass one"
                        )));
                    }
                }
            }
        }
    }
    Ok(grids)
}

/// Extract the (possibly power-transformed) gaussian response.
fn gaussian_response(frame: &ModelFrame, column: &str, power: f64) -> Result<Vec<f64>> {
    let raw = frame.numeric_column(column)?;
    if power == 1.0 {
        return Ok(raw.to_vec());
    }
    let mut y = Vec::with_capacity(raw.len());
    for (i, &v) in raw.iter().enumerate() {
        if v < 0.0 {
            return Err(Error::Data(format!(
                "response '{column}' is negative at row {} but a power transform was requested",
                i + 1
            )));
        }
        y.push(libm::pow(v, power));
    }
    Ok(y)
}

/// Fit the frame's model: build the design, then dispatch on the response
/// kind. `free_grids` supplies score grids for free-parameter score terms;
/// fixed-parameter grids are computed here.
pub fn fit(frame: &ModelFrame, free_grids: &BTreeMap<String, ScoreGrid>) -> Result<FitSummary> {
    let grids = score_grids_for_frame(frame, free_grids)?;
    let design = build_design(frame, &grids)?;
    match &frame.response {
        ResponseSpec::Gaussian { column, power } => {
            let y = gaussian_response(frame, column, *power)?;
            fit_ols(&design, &y)
        }
        ResponseSpec::BinomialGrouped {
            successes,
            failures,
        } => {
            let s = frame.numeric_column(successes)?.to_vec();
            let f = frame.numeric_column(failures)?.to_vec();
            fit_logistic_grouped(&design, &s, &f)
        }
    }
}

/// Profile of the Box-Cox transformation parameter.
#[derive(Debug, Clone)]
pub struct BoxCoxProfile {
    pub lambdas: Vec<f64>,
    pub log_likelihoods: Vec<f64>,
    /// Grid maximizer refined by a local quadratic.
    pub lambda_hat: f64,
    /// Approximate 95% profile interval (grid resolution).
    pub interval: (f64, f64),
}

/// Profile the Box-Cox power for a gaussian-response frame over a lambda
/// grid.
///
/// For each lambda the response is replaced by the scaled transform
/// `(y^lambda - 1)/(lambda gdot^{lambda-1})` (with `gdot` the geometric
/// mean; `gdot ln y` at lambda = 0), the model is refitted by OLS and the
/// profile log-likelihood `-(n/2) ln(RSS/n)` recorded.
pub fn boxcox_profile(frame: &ModelFrame, lambdas: &[f64]) -> Result<BoxCoxProfile> {
    let ResponseSpec::Gaussian { column, .. } = &frame.response else {
        return Err(Error::Data(String::from(
            "Box-Cox profiling requires a gaussian response",
        )));
    };
    if lambdas.len() < 3 {
        return Err(Error::Data(String::from(
            "Box-Cox profiling needs at least 3 lambda values",
        )));
    }
    let y = frame.numeric_column(column)?;
    if y.iter().any(|&v| v <= 0.0) {
        return Err(Error::Data(format!(
            "Box-Cox requires a strictly positive response; '{column}' is not"
        )));
    }
    let n = y.len();
    let grids = score_grids_for_frame(frame, &BTreeMap::new())?;
    let design = build_design(frame, &grids)?;

    let mean_log = y.iter().map(|&v| libm::log(v)).sum::<f64>() / n as f64;
    let gdot = libm::exp(mean_log);

    let mut log_likelihoods = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let yt: Vec<f64> = if libm::fabs(lambda) < 1e-9 {
            y.iter().map(|&v| gdot * libm::log(v)).collect()
        } else {
            let scale = lambda * libm::pow(gdot, lambda - 1.0);
            y.iter()
                .map(|&v| (libm::pow(v, lambda) - 1.0) / scale)
                .collect()
        };
        let ls = least_squares(&design.mat, &yt)
            .map_err(|j| rank_error(&design, j))?;
        let fitted = design.mat.mul_vec(&ls.beta);
        let rss: f64 = yt
            .iter()
            .zip(&fitted)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        log_likelihoods.push(-(n as f64 / 2.0) * libm::log(rss / n as f64));
    }

    // Quadratic refinement around the grid maximum (interior points only).
    let mut imax = 0;
    for (i, &ll) in log_likelihoods.iter().enumerate() {
        if ll > log_likelihoods[imax] {
            imax = i;
        }
    }
    let lambda_hat = if imax > 0 && imax + 1 < lambdas.len() {
        let (a, b, c) = (
            log_likelihoods[imax - 1],
            log_likelihoods[imax],
            log_likelihoods[imax + 1],
        );
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            lambdas[imax] + 0.5 * (lambdas[imax + 1] - lambdas[imax]) * (a - c) / denom
        } else {
            lambdas[imax]
        }
    } else {
        lambdas[imax]
    };

    // 95% interval: lambda with profile within chi2_1(0.95)/2 of the max.
    let cutoff = log_likelihoods[imax] - 1.920_729;
    let lo = lambdas
        .iter()
        .zip(&log_likelihoods)
        .find(|(_, &ll)| ll >= cutoff)
        .map(|(&l, _)| l)
        .unwrap_or(lambdas[0]);
    let hi = lambdas
        .iter()
        .zip(&log_likelihoods)
        .rev()
        .find(|(_, &ll)| ll >= cutoff)
        .map(|(&l, _)| l)
        .unwrap_or(*lambdas.last().unwrap());

    Ok(BoxCoxProfile {
        lambdas: lambdas.to_vec(),
        log_likelihoods,
        lambda_hat,
        interval: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Column;
    use alloc::string::ToString;

    fn design_from_cols(cols: Vec<(&str, Vec<f64>)>) -> DesignMatrix {
        let n = cols[0].1.len();
        let frame = ModelFrame::new(
            cols.iter()
                .map(|(name, v)| Column::numeric(*name, v.clone()))
                .chain(core::iter::once(Column::numeric("y", vec![0.0; n])))
                .collect(),
            ResponseSpec::Gaussian {
                column: "y".into(),
                power: 1.0,
            },
            cols.iter()
                .map(|(name, _)| TermSpec::Numeric {
                    column: name.to_string(),
                })
                .collect(),
        )
        .unwrap();
        build_design(&frame, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn ols_exact_line() {
        let design = design_from_cols(vec![("x", vec![1.0, 2.0, 3.0, 4.0])]);
        let y = [3.0, 5.0, 7.0, 9.0]; // 1 + 2x
        let fit = fit_ols(&design, &y).unwrap();
        assert!((fit.estimates[0] - 1.0).abs() < 1e-10);
        assert!((fit.estimates[1] - 2.0).abs() < 1e-10);
        assert!(fit.residual_sd.unwrap() < 1e-10);
        assert_eq!(fit.residual_df, 2);
    }

    #[test]
    fn ols_three_point_hand_solution() {
        let design = design_from_cols(vec![("x", vec![1.0, 2.0, 3.0])]);
        let y = [1.0, 2.0, 4.0];
        let fit = fit_ols(&design, &y).unwrap();
        assert!((fit.estimates[1] - 1.5).abs() < 1e-12);
        assert!((fit.estimates[0] + 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ols_residuals_orthogonal_to_design() {
        let design = design_from_cols(vec![
            ("x1", vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            ("x2", vec![2.0, 1.0, 4.0, 3.0, 6.0, 5.0]),
        ]);
        let y = [1.1, 1.9, 3.2, 3.8, 5.3, 5.7];
        let fit = fit_ols(&design, &y).unwrap();
        let fitted = design.mat.mul_vec(&fit.estimates);
        let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let xtr = design.mat.tr_mul_vec(&resid);
        let ynorm = libm::sqrt(y.iter().map(|v| v * v).sum());
        for v in xtr {
            assert!(v.abs() < 1e-8 * ynorm);
        }
    }

    #[test]
    fn ols_rank_deficiency_names_column() {
        let design = design_from_cols(vec![
            ("x1", vec![1.0, 2.0, 3.0, 4.0]),
            ("twice_x1", vec![2.0, 4.0, 6.0, 8.0]),
        ]);
        let y = [0.0, 1.0, 2.0, 3.0];
        match fit_ols(&design, &y) {
            Err(Error::RankDeficient(name)) => assert_eq!(name, "twice_x1"),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn logistic_two_by_two_closed_form() {
        // Grouped 2x2: 10/90 vs 30/70; slope is the log odds ratio.
        let design = design_from_cols(vec![("x", vec![0.0, 1.0])]);
        let fit = fit_logistic_grouped(&design, &[10.0, 30.0], &[90.0, 70.0]).unwrap();
        let expect = libm::log(27.0 / 7.0);
        assert!((fit.estimates[1] - expect).abs() < 1e-8, "{}", fit.estimates[1]);
        assert!(fit.converged);
        assert!(fit.deviance.abs() < 1e-8); // saturated
    }

    #[test]
    fn logistic_intercept_only_balanced() {
        let frame = ModelFrame::new(
            vec![
                Column::numeric("s", vec![3.0, 7.0, 2.0]),
                Column::numeric("f", vec![3.0, 7.0, 2.0]),
            ],
            ResponseSpec::BinomialGrouped {
                successes: "s".into(),
                failures: "f".into(),
            },
            vec![],
        )
        .unwrap();
        let fit = super::fit(&frame, &BTreeMap::new()).unwrap();
        assert!(fit.estimates[0].abs() < 1e-10);
    }

    #[test]
    fn logistic_flags_separation() {
        // Perfectly separated groups.
        let design = design_from_cols(vec![("x", vec![0.0, 1.0, 2.0, 3.0])]);
        let fit =
            fit_logistic_grouped(&design, &[0.0, 0.0, 40.0, 40.0], &[40.0, 40.0, 0.0, 0.0])
                .unwrap();
        assert!(fit.separation_warning);
    }

    #[test]
    fn boxcox_identity_scale_data() {
        // y linear in x with tiny noise: lambda_hat should sit near 1.
        let n = 500;
        let x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / 50.0).collect();
        // deterministic low-discrepancy "noise"
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| 5.0 + 2.0 * v + 0.01 * libm::sin(i as f64 * 2.39996))
            .collect();
        let frame = ModelFrame::new(
            vec![Column::numeric("x", x), Column::numeric("y", y)],
            ResponseSpec::Gaussian {
                column: "y".into(),
                power: 1.0,
            },
            vec![TermSpec::Numeric { column: "x".into() }],
        )
        .unwrap();
        let lambdas: Vec<f64> = (0..81).map(|i| -1.0 + i as f64 * 0.05).collect();
        let profile = boxcox_profile(&frame, &lambdas).unwrap();
        assert!(
            (profile.lambda_hat - 1.0).abs() < 0.05,
            "{}",
            profile.lambda_hat
        );
    }

    #[test]
    fn boxcox_log_scale_data() {
        let n = 400;
        let x: Vec<f64> = (0..n).map(|i| i as f64 / 100.0).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| libm::exp(1.0 + 0.8 * v + 0.01 * libm::sin(i as f64 * 2.39996)))
            .collect();
        let frame = ModelFrame::new(
            vec![Column::numeric("x", x), Column::numeric("y", y)],
            ResponseSpec::Gaussian {
                column: "y".into(),
                power: 1.0,
            },
            vec![TermSpec::Numeric { column: "x".into() }],
        )
        .unwrap();
        let lambdas: Vec<f64> = (0..81).map(|i| -1.0 + i as f64 * 0.05).collect();
        let profile = boxcox_profile(&frame, &lambdas).unwrap();
        assert!(profile.lambda_hat.abs() < 0.05, "{}", profile.lambda_hat);
    }

    #[test]
    fn boxcox_rejects_nonpositive_response() {
        let frame = ModelFrame::new(
            vec![
                Column::numeric("x", vec![1.0, 2.0, 3.0, 4.0]),
                Column::numeric("y", vec![1.0, 0.0, 3.0, 4.0]),
            ],
            ResponseSpec::Gaussian {
                column: "y".into(),
                power: 1.0,
            },
            vec![TermSpec::Numeric { column: "x".into() }],
        )
        .unwrap();
        let lambdas = [0.0, 0.5, 1.0];
        assert!(boxcox_profile(&frame, &lambdas).is_err());
    }

    #[test]
    fn gaussian_power_transform_applied() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|&v| (1.0 + 2.0 * v) * (1.0 + 2.0 * v)).collect();
        let frame = ModelFrame::new(
            vec![Column::numeric("x", x), Column::numeric("y", y)],
            ResponseSpec::Gaussian {
                column: "y".into(),
                power: 0.5,
            },
            vec![TermSpec::Numeric { column: "x".into() }],
        )
        .unwrap();
        let fit = super::fit(&frame, &BTreeMap::new()).unwrap();
        assert!((fit.estimates[0] - 1.0).abs() < 1e-10);
        assert!((fit.estimates[1] - 2.0).abs() < 1e-10);
    }
}
