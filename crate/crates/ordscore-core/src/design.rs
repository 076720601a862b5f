//! Model frames and design-matrix assembly.
//!
//! A [`ModelFrame`] holds typed columns (numeric or ordered factor), a
//! response specification and an ordered list of terms. [`build_design`]
//! expands the terms into a numeric design matrix: ordered factors either
//! as orthogonal-polynomial contrast blocks or as a single fitted score
//! column.

use crate::contrasts::{poly_contrasts, truncate_contrasts};
use crate::linalg::Mat;
use crate::score::{FamilyKind, ScoreGrid};
use crate::{Error, Result};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Payload of one frame column.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    /// Ordered factor: level labels in increasing order plus a 0-based
    /// level code per row.
    Factor { labels: Vec<String>, codes: Vec<usize> },
}

/// A named column of a model frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            data: ColumnData::Numeric(values),
        }
    }

    pub fn factor(name: impl Into<String>, labels: Vec<String>, codes: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            data: ColumnData::Factor { labels, codes },
        }
    }

    pub fn len(&self) -> usize {
        match &self.data {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Factor { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of levels, for factor columns.
    pub fn n_levels(&self) -> Option<usize> {
        match &self.data {
            ColumnData::Factor { labels, .. } => Some(labels.len()),
            ColumnData::Numeric(_) => None,
        }
    }
}

/// What the model's response is.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseSpec {
    /// Numeric response, optionally power-transformed (`y^power`,
    /// `power = 1` means identity).
    Gaussian { column: String, power: f64 },
    /// Grouped binomial counts: one row records successes and failures for
    /// all trials sharing the covariates.
    BinomialGrouped { successes: String, failures: String },
}

/// Fixed or free score-family parameters for a score term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoreParams {
    Fixed { p1: f64, p2: f64 },
    Free,
}

/// How one term expands into design columns.
#[derive(Debug, Clone, PartialEq)]
pub enum TermSpec {
    /// A numeric column, copied as-is.
    Numeric { column: String },
    /// An ordered factor expanded into the orthogonal-polynomial columns of
    /// the listed degrees.
    FactorPoly { column: String, degrees: Vec<usize> },
    /// An ordered factor replaced by a single constructed score column.
    FactorScore {
        column: String,
        family: FamilyKind,
        params: ScoreParams,
    },
}

impl TermSpec {
    pub fn column(&self) -> &str {
        match self {
            TermSpec::Numeric { column }
            | TermSpec::FactorPoly { column, .. }
            | TermSpec::FactorScore { column, .. } => column,
        }
    }
}

/// Data plus model specification: columns, response, terms.
#[derive(Debug, Clone)]
pub struct ModelFrame {
    columns: Vec<Column>,
    pub response: ResponseSpec,
    pub terms: Vec<TermSpec>,
}

impl ModelFrame {
    /// Assemble and validate a frame. All columns must share a length,
    /// referenced columns must exist with the right type, and each factor
    /// may carry at most one score term.
    pub fn new(columns: Vec<Column>, response: ResponseSpec, terms: Vec<TermSpec>) -> Result<Self> {
        if columns.is_empty() || columns[0].is_empty() {
            return Err(Error::Data(String::from("model frame has no rows")));
        }
        let n = columns[0].len();
        for c in &columns {
            if c.len() != n {
                return Err(Error::Data(format!(
                    "column '{}' has {} rows, expected {n}",
                    c.name,
                    c.len()
                )));
            }
            if let ColumnData::Factor { labels, codes } = &c.data {
                if codes.iter().any(|&code| code >= labels.len()) {
                    return Err(Error::Data(format!(
                        "factor '{}' contains an out-of-range level code",
                        c.name
                    )));
                }
            }
        }
        let frame = Self {
            columns,
            response,
            terms,
        };
        frame.check_references()?;
        Ok(frame)
    }

    fn check_references(&self) -> Result<()> {
        match &self.response {
            ResponseSpec::Gaussian { column, power } => {
                if !power.is_finite() {
                    return Err(Error::Data(format!(
                        "non-finite response power {power}"
                    )));
                }
                self.numeric_column(column)?;
            }
            ResponseSpec::BinomialGrouped {
                successes,
                failures,
            } => {
                for name in [successes, failures] {
                    let v = self.numeric_column(name)?;
                    if v.iter().any(|&x| x < 0.0 || libm::floor(x) != x) {
                        return Err(Error::Data(format!(
                            "binomial count column '{name}' must hold nonnegative integers"
                        )));
                    }
                }
            }
        }
        let mut scored: Vec<&str> = Vec::new();
        for term in &self.terms {
            match term {
                TermSpec::Numeric { column } => {
                    self.numeric_column(column)?;
                }
                TermSpec::FactorPoly { column, degrees } => {
                    let col = self.factor_column(column)?;
                    let k = col.n_levels().unwrap();
                    if degrees.is_empty() {
                        return Err(Error::Data(format!(
                            "factor term '{column}' lists no degrees"
                        )));
                    }
                    if let Some(&d) = degrees.iter().find(|&&d| d == 0 || d >= k) {
                        return Err(Error::Data(format!(
                            "degree {d} invalid for factor '{column}' with {k} levels"
                        )));
                    }
                }
                TermSpec::FactorScore { column, .. } => {
                    self.factor_column(column)?;
                    if scored.contains(&column.as_str()) {
                        return Err(Error::Data(format!(
                            "factor '{column}' has more than one score term"
                        )));
                    }
                    scored.push(column);
                }
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::MissingColumn(String::from(name)))
    }

    pub fn numeric_column(&self, name: &str) -> Result<&[f64]> {
        match &self.column(name)?.data {
            ColumnData::Numeric(v) => Ok(v),
            ColumnData::Factor { .. } => Err(Error::Data(format!(
                "column '{name}' is a factor, expected numeric"
            ))),
        }
    }

    pub fn factor_column(&self, name: &str) -> Result<&Column> {
        let col = self.column(name)?;
        match col.data {
            ColumnData::Factor { .. } => Ok(col),
            ColumnData::Numeric(_) => Err(Error::Data(format!(
                "column '{name}' is numeric, expected an ordered factor"
            ))),
        }
    }

    /// Names of factors whose score term has free parameters, with the
    /// requested family, in term order.
    pub fn free_score_terms(&self) -> Vec<(String, FamilyKind)> {
        self.terms
            .iter()
            .filter_map(|t| match t {
                TermSpec::FactorScore {
                    column,
                    family,
                    params: ScoreParams::Free,
                } => Some((column.clone(), *family)),
                _ => None,
            })
            .collect()
    }
}

/// A numeric design matrix with named columns and a term-to-column map.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub(crate) mat: Mat,
    names: Vec<String>,
    /// Half-open column range per term, intercept excluded.
    term_ranges: Vec<(usize, usize)>,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.mat.rows
    }

    pub fn n_cols(&self) -> usize {
        self.mat.cols
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn term_range(&self, term_index: usize) -> (usize, usize) {
        self.term_ranges[term_index]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.mat.get(row, col)
    }

    /// Column index by name.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Expand the frame's terms into a design matrix. The intercept column of
/// ones comes first; every `FactorScore` term must have a grid of matching
/// size in `score_grids` and contributes one raw (unrescaled) score column.
pub fn build_design(
    frame: &ModelFrame,
    score_grids: &BTreeMap<String, ScoreGrid>,
) -> Result<DesignMatrix> {
    let n = frame.n_rows();
    let mut names: Vec<String> = alloc::vec![String::from("(Intercept)")];
    let mut cols: Vec<Vec<f64>> = alloc::vec![alloc::vec![1.0; n]];
    let mut term_ranges = Vec::with_capacity(frame.terms.len());

    for term in &frame.terms {
        let start = cols.len();
        match term {
            TermSpec::Numeric { column } => {
                cols.push(frame.numeric_column(column)?.to_vec());
                names.push(column.clone());
            }
            TermSpec::FactorPoly { column, degrees } => {
                let col = frame.factor_column(column)?;
                let ColumnData::Factor { labels, codes } = &col.data else {
                    unreachable!()
                };
                let full = poly_contrasts(labels.len())?;
                let contrasts = truncate_contrasts(&full, degrees)?;
                for j in 0..contrasts.n_columns() {
                    let cj = contrasts.column(j);
                    cols.push(codes.iter().map(|&code| cj[code]).collect());
                    names.push(format!("{column}{}", contrasts.names()[j]));
                }
            }
            TermSpec::FactorScore { column, .. } => {
                let col = frame.factor_column(column)?;
                let ColumnData::Factor { labels, codes } = &col.data else {
                    unreachable!()
                };
                let grid = score_grids.get(column).ok_or_else(|| {
                    Error::Data(format!("no score grid supplied for factor '{column}'"))
                })?;
                if grid.k() != labels.len() {
                    return Err(Error::Data(format!(
                        "score grid for '{column}' has {} levels, factor has {}",
                        grid.k(),
                        labels.len()
                    )));
                }
                let q = grid.scores();
                cols.push(codes.iter().map(|&code| q[code]).collect());
                names.push(format!("{column}.score"));
            }
        }
        term_ranges.push((start, cols.len()));
    }

    let p = cols.len();
    let mut mat = Mat::zeros(n, p);
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            mat.set(i, j, v);
        }
    }
    Ok(DesignMatrix {
        mat,
        names,
        term_ranges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::{quantile_scores, ScoreFamilyParams};
    use alloc::string::ToString;
    use alloc::vec;

    fn toy_factor_frame(terms: Vec<TermSpec>) -> ModelFrame {
        // 8 rows, one 4-level factor cycling through its levels.
        let labels: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let codes = vec![0, 1, 2, 3, 0, 1, 2, 3];
        let y = vec![1.0, 2.0, 3.0, 4.0, 1.5, 2.5, 3.5, 4.5];
        ModelFrame::new(
            vec![
                Column::factor("f", labels, codes),
                Column::numeric("y", y),
            ],
            ResponseSpec::Gaussian {
                column: "y".into(),
                power: 1.0,
            },
            terms,
        )
        .unwrap()
    }

    #[test]
    fn poly_term_expands_by_level() {
        let frame = toy_factor_frame(vec![TermSpec::FactorPoly {
            column: "f".into(),
            degrees: vec![1, 2, 3],
        }]);
        let design = build_design(&frame, &BTreeMap::new()).unwrap();
        assert_eq!(design.n_cols(), 4);
        assert_eq!(
            design.names(),
            ["(Intercept)", "f.L", "f.Q", "f.C"]
        );
        let c = poly_contrasts(4).unwrap();
        for row in 0..8 {
            let level = row % 4;
            for j in 0..3 {
                assert_eq!(design.value(row, 1 + j), c.column(j)[level]);
            }
        }
    }

    #[test]
    fn score_term_is_one_column_with_k_distinct_values() {
        let params = ScoreFamilyParams::new(FamilyKind::JohnsonSu, -0.025, 0.395).unwrap();
        let grid = quantile_scores(4, &params).unwrap();
        let mut grids = BTreeMap::new();
        grids.insert("f".to_string(), grid.clone());
        let frame = toy_factor_frame(vec![TermSpec::FactorScore {
            column: "f".into(),
            family: FamilyKind::JohnsonSu,
            params: ScoreParams::Fixed {
                p1: -0.025,
                p2: 0.395,
            },
        }]);
        let design = build_design(&frame, &grids).unwrap();
        assert_eq!(design.n_cols(), 2);
        assert_eq!(design.names()[1], "f.score");
        for row in 0..8 {
            assert_eq!(design.value(row, 1), grid.scores()[row % 4]);
        }
    }

    #[test]
    fn numeric_term_two_columns() {
        let frame = ModelFrame::new(
            vec![
                Column::numeric("x", vec![1.0, 2.0, 3.0]),
                Column::numeric("y", vec![1.0, 2.0, 4.0]),
            ],
            ResponseSpec::Gaussian {
                column: "y".into(),
                power: 1.0,
            },
            vec![TermSpec::Numeric { column: "x".into() }],
        )
        .unwrap();
        let design = build_design(&frame, &BTreeMap::new()).unwrap();
        assert_eq!(design.n_cols(), 2);
        assert_eq!(design.term_range(0), (1, 2));
    }

    #[test]
    fn missing_grid_is_an_error() {
        let frame = toy_factor_frame(vec![TermSpec::FactorScore {
            column: "f".into(),
            family: FamilyKind::GAndH,
            params: ScoreParams::Free,
        }]);
        assert!(build_design(&frame, &BTreeMap::new()).is_err());
    }

    #[test]
    fn bad_references_rejected() {
        let cols = vec![Column::numeric("y", vec![1.0, 2.0])];
        let resp = ResponseSpec::Gaussian {
            column: "y".into(),
            power: 1.0,
        };
        assert!(matches!(
            ModelFrame::new(
                cols.clone(),
                resp.clone(),
                vec![TermSpec::Numeric {
                    column: "nope".into()
                }],
            ),
            Err(Error::MissingColumn(_))
        ));
        // negative binomial count
        assert!(ModelFrame::new(
            vec![
                Column::numeric("s", vec![1.0, -2.0]),
                Column::numeric("f", vec![1.0, 2.0]),
            ],
            ResponseSpec::BinomialGrouped {
                successes: "s".into(),
                failures: "f".into(),
            },
            vec![],
        )
        .is_err());
    }

    #[test]
    fn duplicate_score_term_rejected() {
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let result = ModelFrame::new(
            vec![
                Column::factor("f", labels, vec![0, 1, 2]),
                Column::numeric("y", vec![1.0, 2.0, 3.0]),
            ],
            ResponseSpec::Gaussian {
                column: "y".into(),
                power: 1.0,
            },
            vec![
                TermSpec::FactorScore {
                    column: "f".into(),
                    family: FamilyKind::JohnsonSu,
                    params: ScoreParams::Free,
                },
                TermSpec::FactorScore {
                    column: "f".into(),
                    family: FamilyKind::GAndH,
                    params: ScoreParams::Free,
                },
            ],
        );
        assert!(result.is_err());
    }
}
