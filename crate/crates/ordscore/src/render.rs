//! Plain-text tables and JSON mirrors of fit results.
//!
//! Text output rounds the way the published tables do (three decimals for
//! estimates and standard errors, two for statistics and p-values); the
//! JSON mirror carries the same numbers at full precision.

use std::fmt;

use ordscore_core::glm::{FitSummary, StatKind};
use ordscore_core::score::ScoreGrid;
use serde_json::json;

/// A rectangular text table with a title and an optional footer line.
#[derive(Debug, Clone)]
pub struct RenderedTable {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub footer: Option<String>,
}

impl fmt::Display for RenderedTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ncol = self.headers.len();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        writeln!(f, "{}", self.title)?;
        for (i, h) in self.headers.iter().enumerate() {
            if i > 0 {
                write!(f, "  ")?;
            }
            if i == 0 {
                write!(f, "{:<width$}", h, width = widths[0])?;
            } else {
                write!(f, "{:>width$}", h, width = widths[i])?;
            }
        }
        writeln!(f)?;
        for row in &self.rows {
            for i in 0..ncol {
                if i > 0 {
                    write!(f, "  ")?;
                }
                if i == 0 {
                    write!(f, "{:<width$}", row[i], width = widths[0])?;
                } else {
                    write!(f, "{:>width$}", row[i], width = widths[i])?;
                }
            }
            writeln!(f)?;
        }
        if let Some(footer) = &self.footer {
            writeln!(f, "{footer}")?;
        }
        Ok(())
    }
}

fn footer_line(fit: &FitSummary) -> String {
    match fit.residual_sd {
        Some(sd) => format!(
            "Residual standard deviation: {:.2} on {} degrees of freedom",
            sd, fit.residual_df
        ),
        None => format!(
            "Residual deviance: {:.3} on {} degrees of freedom",
            fit.deviance, fit.residual_df
        ),
    }
}

/// The coefficient table of a fit, formatted in the published style.
pub fn fit_table(title: &str, fit: &FitSummary) -> RenderedTable {
    let stat_header = match fit.stat_kind {
        StatKind::Z => "z value",
        StatKind::T => "t value",
    };
    let rows = (0..fit.p)
        .map(|j| {
            vec![
                fit.names[j].clone(),
                format!("{:.3}", fit.estimates[j]),
                format!("{:.3}", fit.std_errors[j]),
                format!("{:.2}", fit.statistics[j]),
                format!("{:.2}", fit.p_values[j]),
            ]
        })
        .collect();
    RenderedTable {
        title: title.to_string(),
        headers: ["", "Estimate", "Std. Error", stat_header, "Pr(>|stat|)"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        rows,
        footer: Some(footer_line(fit)),
    }
}

/// Full-precision JSON mirror of a fit.
pub fn fit_json(fit: &FitSummary) -> serde_json::Value {
    json!({
        "coefficients": (0..fit.p).map(|j| json!({
            "name": fit.names[j],
            "estimate": fit.estimates[j],
            "std_error": fit.std_errors[j],
            "statistic": fit.statistics[j],
            "p_value": fit.p_values[j],
        })).collect::<Vec<_>>(),
        "statistic": match fit.stat_kind { StatKind::Z => "z", StatKind::T => "t" },
        "deviance": fit.deviance,
        "residual_sd": fit.residual_sd,
        "residual_df": fit.residual_df,
        "n": fit.n,
        "p": fit.p,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "separation_warning": fit.separation_warning,
    })
}

/// Score-grid table: level, u, raw quantile, working (rescaled) score.
pub fn scores_table(title: &str, grid: &ScoreGrid, working: &[f64]) -> RenderedTable {
    let rows = (0..grid.k())
        .map(|i| {
            vec![
                format!("{}", i + 1),
                format!("{:.4}", grid.levels()[i]),
                format!("{:.4}", grid.scores()[i]),
                format!("{:.4}", working[i]),
            ]
        })
        .collect();
    RenderedTable {
        title: title.to_string(),
        headers: ["level", "u", "quantile", "score"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        rows,
        footer: None,
    }
}

/// Full-precision JSON mirror of a score grid.
pub fn scores_json(grid: &ScoreGrid, working: &[f64]) -> serde_json::Value {
    json!({
        "k": grid.k(),
        "levels": grid.levels(),
        "quantiles": grid.scores(),
        "scores": working,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ordscore_core::design::{Column, ModelFrame, ResponseSpec, TermSpec};
    use ordscore_core::glm::fit;
    use std::collections::BTreeMap;

    fn small_fit() -> FitSummary {
        let frame = ModelFrame::new(
            vec![
                Column::numeric("x", vec![1.0, 2.0, 3.0, 4.0]),
                Column::numeric("y", vec![1.1, 1.9, 3.2, 3.9]),
            ],
            ResponseSpec::Gaussian {
                column: "y".into(),
                power: 1.0,
            },
            vec![TermSpec::Numeric { column: "x".into() }],
        )
        .unwrap();
        fit(&frame, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn table_is_rectangular_and_rounded() {
        let summary = small_fit();
        let table = fit_table("Linear model", &summary);
        assert_eq!(table.headers.len(), 5);
        for row in &table.rows {
            assert_eq!(row.len(), 5);
        }
        let text = table.to_string();
        assert!(text.contains("Linear model"));
        assert!(text.contains("Residual standard deviation"));
        // estimates carry exactly three decimals
        assert!(table.rows[1][1].split('.').nth(1).unwrap().len() == 3);
    }

    #[test]
    fn json_mirrors_unrounded_values() {
        let summary = small_fit();
        let v = fit_json(&summary);
        let est = v["coefficients"][1]["estimate"].as_f64().unwrap();
        assert_eq!(est, summary.estimates[1]);
        assert_eq!(v["residual_df"].as_u64().unwrap() as usize, summary.residual_df);
    }
}
