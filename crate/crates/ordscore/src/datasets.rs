//! The two worked datasets: the embedded oesophageal-cancer fixture and the
//! preparation pipeline for a user-supplied diamonds CSV.

use std::path::Path;

use anyhow::{bail, Result};
use ordscore_core::design::{
    Column, ColumnData, ModelFrame, ResponseSpec, ScoreParams, TermSpec,
};
use ordscore_core::score::FamilyKind;

use crate::csvio::{load_csv_path, load_csv_reader, ColumnSchema};

/// Case-control counts of oesophageal cancer by age, alcohol and tobacco
/// consumption (88 grouped rows).
pub const ESOPH_CSV: &str = include_str!("../data/esoph.csv");

pub const AGEGP_LEVELS: [&str; 6] = ["25-34", "35-44", "45-54", "55-64", "65-74", "75+"];
pub const ALCGP_LEVELS: [&str; 4] = ["0-39g/day", "40-79", "80-119", "120+"];
pub const TOBGP_LEVELS: [&str; 4] = ["0-9g/day", "10-19", "20-29", "30+"];

fn esoph_schema() -> Vec<ColumnSchema> {
    vec![
        ColumnSchema::factor("agegp", AGEGP_LEVELS.to_vec()),
        ColumnSchema::factor("alcgp", ALCGP_LEVELS.to_vec()),
        ColumnSchema::factor("tobgp", TOBGP_LEVELS.to_vec()),
        ColumnSchema::numeric("ncases"),
        ColumnSchema::numeric("ncontrols"),
    ]
}

/// The embedded fixture as typed columns.
pub fn esoph_columns() -> Result<Vec<Column>> {
    load_csv_reader(ESOPH_CSV.as_bytes(), &esoph_schema())
}

fn esoph_response() -> ResponseSpec {
    ResponseSpec::BinomialGrouped {
        successes: "ncases".into(),
        failures: "ncontrols".into(),
    }
}

/// The logistic model with all three factors coded by orthogonal
/// polynomials (agegp linear + quadratic, tobgp linear, alcgp full).
pub fn esoph_poly_frame() -> Result<ModelFrame> {
    ModelFrame::new(
        esoph_columns()?,
        esoph_response(),
        vec![
            TermSpec::FactorPoly {
                column: "agegp".into(),
                degrees: vec![1, 2],
            },
            TermSpec::FactorPoly {
                column: "tobgp".into(),
                degrees: vec![1],
            },
            TermSpec::FactorPoly {
                column: "alcgp".into(),
                degrees: vec![1, 2, 3],
            },
        ],
    )
    .map_err(|e| anyhow::anyhow!("{e}"))
}

/// The same model with the alcohol factor expressed through a single
/// constructed score column.
pub fn esoph_score_frame(family: FamilyKind, params: ScoreParams) -> Result<ModelFrame> {
    ModelFrame::new(
        esoph_columns()?,
        esoph_response(),
        vec![
            TermSpec::FactorPoly {
                column: "agegp".into(),
                degrees: vec![1, 2],
            },
            TermSpec::FactorPoly {
                column: "tobgp".into(),
                degrees: vec![1],
            },
            TermSpec::FactorScore {
                column: "alcgp".into(),
                family,
                params,
            },
        ],
    )
    .map_err(|e| anyhow::anyhow!("{e}"))
}

pub const CLARITY_LEVELS: [&str; 8] = ["I1", "SI2", "SI1", "VS2", "VS1", "VVS2", "VVS1", "IF"];
pub const COLOR_LEVELS: [&str; 7] = ["D", "E", "F", "G", "H", "I", "J"];
pub const CUT_LEVELS: [&str; 5] = ["Fair", "Good", "Very Good", "Premium", "Ideal"];

/// Number of rows expected in the full diamonds CSV.
pub const DIAMONDS_FULL_ROWS: usize = 53_940;
/// 1-based positions, within the thinned subset, of the three high-leverage
/// outliers that are dropped.
pub const DIAMONDS_OUTLIERS: [usize; 3] = [518, 519, 523];

/// The diamonds data after subsetting: the thinned rows and, separately,
/// the same rows with the three outliers removed.
pub struct Diamonds {
    /// Every 100th row of the full data (540 rows), before outlier removal.
    pub thinned: Vec<Column>,
    /// The thinned rows minus the three outliers (537 rows).
    pub cleaned: Vec<Column>,
}

fn take_rows(columns: &[Column], keep: &[usize]) -> Vec<Column> {
    columns
        .iter()
        .map(|c| match &c.data {
            ColumnData::Numeric(v) => {
                Column::numeric(c.name.clone(), keep.iter().map(|&i| v[i]).collect())
            }
            ColumnData::Factor { labels, codes } => Column::factor(
                c.name.clone(),
                labels.clone(),
                keep.iter().map(|&i| codes[i]).collect(),
            ),
        })
        .collect()
}

/// Load and subset the full diamonds CSV: keep rows 1, 101, 201, ... then
/// drop the three outliers.
pub fn prepare_diamonds(path: &Path) -> Result<Diamonds> {
    let schema = vec![
        ColumnSchema::numeric("carat"),
        ColumnSchema::factor("clarity", CLARITY_LEVELS.to_vec()),
        ColumnSchema::factor("color", COLOR_LEVELS.to_vec()),
        ColumnSchema::factor("cut", CUT_LEVELS.to_vec()),
        ColumnSchema::numeric("price"),
    ];
    let columns = load_csv_path(path, &schema)?;
    let n = columns[0].len();
    if n != DIAMONDS_FULL_ROWS {
        bail!(
            "expected the full diamonds data with {DIAMONDS_FULL_ROWS} rows, found {n}; \
             pass the unmodified source CSV"
        );
    }
    let thin_idx: Vec<usize> = (0..n).step_by(100).collect();
    let thinned = take_rows(&columns, &thin_idx);
    let clean_idx: Vec<usize> = (0..thin_idx.len())
        .filter(|i| !DIAMONDS_OUTLIERS.contains(&(i + 1)))
        .map(|i| thin_idx[i])
        .collect();
    let cleaned = take_rows(&columns, &clean_idx);
    Ok(Diamonds { thinned, cleaned })
}

impl Diamonds {
    fn response() -> ResponseSpec {
        ResponseSpec::Gaussian {
            column: "price".into(),
            power: 0.5,
        }
    }

    fn carat() -> TermSpec {
        TermSpec::Numeric {
            column: "carat".into(),
        }
    }

    fn cut_linear() -> TermSpec {
        TermSpec::FactorPoly {
            column: "cut".into(),
            degrees: vec![1],
        }
    }

    /// The sqrt-price linear model with polynomial factor codings: carat,
    /// clarity to degree 3, color to degree 4, cut linear.
    pub fn poly_frame(&self) -> Result<ModelFrame> {
        ModelFrame::new(
            self.cleaned.clone(),
            Self::response(),
            vec![
                Self::carat(),
                TermSpec::FactorPoly {
                    column: "clarity".into(),
                    degrees: vec![1, 2, 3],
                },
                TermSpec::FactorPoly {
                    column: "color".into(),
                    degrees: vec![1, 2, 3, 4],
                },
                Self::cut_linear(),
            ],
        )
        .map_err(|e| anyhow::anyhow!("{e}"))
    }

    /// The same model with clarity and color each expressed through one
    /// free-parameter score column of the given family.
    pub fn score_frame(&self, family: FamilyKind) -> Result<ModelFrame> {
        ModelFrame::new(
            self.cleaned.clone(),
            Self::response(),
            vec![
                Self::carat(),
                TermSpec::FactorScore {
                    column: "clarity".into(),
                    family,
                    params: ScoreParams::Free,
                },
                TermSpec::FactorScore {
                    column: "color".into(),
                    family,
                    params: ScoreParams::Free,
                },
                Self::cut_linear(),
            ],
        )
        .map_err(|e| anyhow::anyhow!("{e}"))
    }

    /// The frame used to choose the response power: raw price against the
    /// full-degree polynomial codings, on all thinned rows.
    pub fn boxcox_frame(&self) -> Result<ModelFrame> {
        ModelFrame::new(
            self.thinned.clone(),
            ResponseSpec::Gaussian {
                column: "price".into(),
                power: 1.0,
            },
            vec![
                Self::carat(),
                TermSpec::FactorPoly {
                    column: "clarity".into(),
                    degrees: (1..CLARITY_LEVELS.len()).collect(),
                },
                TermSpec::FactorPoly {
                    column: "color".into(),
                    degrees: (1..COLOR_LEVELS.len()).collect(),
                },
                TermSpec::FactorPoly {
                    column: "cut".into(),
                    degrees: (1..CUT_LEVELS.len()).collect(),
                },
            ],
        )
        .map_err(|e| anyhow::anyhow!("{e}"))
    }
}

/// The diamonds CSV path from a flag value or the ORDSCORE_DIAMONDS_CSV
/// environment variable.
pub fn diamonds_csv_path(flag: Option<&Path>) -> Result<std::path::PathBuf> {
    if let Some(p) = flag {
        return Ok(p.to_path_buf());
    }
    if let Ok(p) = std::env::var("ORDSCORE_DIAMONDS_CSV") {
        if !p.is_empty() {
            return Ok(p.into());
        }
    }
    bail!(
        "the diamonds data is not bundled; pass --csv <path> to the full diamonds CSV \
         (53,940 rows) or set ORDSCORE_DIAMONDS_CSV"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shape() {
        let cols = esoph_columns().unwrap();
        assert_eq!(cols[0].len(), 88);
        assert_eq!(cols[0].n_levels(), Some(6));
        assert_eq!(cols[1].n_levels(), Some(4));
        assert_eq!(cols[2].n_levels(), Some(4));
        let total_cases: f64 = match &cols[3].data {
            ColumnData::Numeric(v) => v.iter().sum(),
            _ => unreachable!(),
        };
        let total_controls: f64 = match &cols[4].data {
            ColumnData::Numeric(v) => v.iter().sum(),
            _ => unreachable!(),
        };
        assert_eq!(total_cases, 200.0);
        assert_eq!(total_controls, 775.0);
    }

    #[test]
    fn poly_frame_has_seven_coefficients() {
        use ordscore_core::design::build_design;
        let frame = esoph_poly_frame().unwrap();
        let design = build_design(&frame, &std::collections::BTreeMap::new()).unwrap();
        assert_eq!(design.n_cols(), 7);
        assert_eq!(
            design.names(),
            [
                "(Intercept)",
                "agegp.L",
                "agegp.Q",
                "tobgp.L",
                "alcgp.L",
                "alcgp.Q",
                "alcgp.C"
            ]
        );
    }

    #[test]
    fn score_frame_has_five_coefficients() {
        use ordscore_core::design::build_design;
        use ordscore_core::glm::score_grids_for_frame;
        let frame = esoph_score_frame(
            FamilyKind::JohnsonSu,
            ScoreParams::Fixed {
                p1: -0.025,
                p2: 0.395,
            },
        )
        .unwrap();
        let grids = score_grids_for_frame(&frame, &std::collections::BTreeMap::new()).unwrap();
        let design = build_design(&frame, &grids).unwrap();
        assert_eq!(design.n_cols(), 5);
        assert_eq!(design.names()[4], "alcgp.score");
    }

    #[test]
    fn missing_diamonds_path_explains_itself() {
        std::env::remove_var("ORDSCORE_DIAMONDS_CSV");
        let err = diamonds_csv_path(None).unwrap_err();
        assert!(format!("{err}").contains("--csv"));
    }
}
