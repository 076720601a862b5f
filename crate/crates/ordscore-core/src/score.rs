//! Quantile-transform score families.
//!
//! An ordered factor with `K` levels is scored by evaluating the quantile
//! function of a two-parameter transformation family of the normal at the
//! equally spaced levels `u_k = k/(K+1)`. Each family is defined by a
//! strictly increasing transformation `T` of a standard normal variable, so
//! the quantile at level `u` is `T(Phi^{-1}(u))`.

use crate::special::norm_quantile;
use crate::{Error, Result};
use alloc::format;
use alloc::vec::Vec;

/// Largest score magnitude allowed before a transform reports overflow.
const OVERFLOW_LIMIT: f64 = 1e300;
const LN_OVERFLOW_LIMIT: f64 = 690.77; // ln(1e300)

/// The three supported transformation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// Johnson S_U: `Y = sinh((Z - gamma) / delta)`, `delta > 0`.
    JohnsonSu,
    /// Tukey g-and-h: `Y = g^{-1}(e^{gZ} - 1) e^{hZ^2/2}`, `h >= 0`.
    GAndH,
    /// Sinh-arcsinh: `Y = sinh((arcsinh Z + eps) / delta)`, `delta > 0`.
    SinhArcsinh,
}

impl FamilyKind {
    /// Short lowercase tag used by the CLI and spec files.
    pub fn tag(self) -> &'static str {
        match self {
            FamilyKind::JohnsonSu => "su",
            FamilyKind::GAndH => "gh",
            FamilyKind::SinhArcsinh => "sas",
        }
    }

    /// Parse a family tag (`su`, `gh`, `sas`).
    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "su" => Ok(FamilyKind::JohnsonSu),
            "gh" => Ok(FamilyKind::GAndH),
            "sas" => Ok(FamilyKind::SinhArcsinh),
            other => Err(Error::Data(format!("unknown score family '{other}'"))),
        }
    }
}

/// Shape parameters of one transformation family.
///
/// `p1` is the skewness-type parameter (gamma, g or epsilon) and `p2` the
/// tail-type parameter (delta, h or delta).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreFamilyParams {
    pub kind: FamilyKind,
    pub p1: f64,
    pub p2: f64,
}

impl ScoreFamilyParams {
    pub fn new(kind: FamilyKind, p1: f64, p2: f64) -> Result<Self> {
        let params = Self { kind, p1, p2 };
        params.validate()?;
        Ok(params)
    }

    /// Check the family-specific constraint on `p2`.
    pub fn validate(&self) -> Result<()> {
        if !self.p1.is_finite() || !self.p2.is_finite() {
            return Err(Error::Domain(format!(
                "non-finite score family parameters ({}, {})",
                self.p1, self.p2
            )));
        }
        let ok = match self.kind {
            FamilyKind::JohnsonSu | FamilyKind::SinhArcsinh => self.p2 > 0.0,
            FamilyKind::GAndH => self.p2 >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "invalid p2 = {} for family {}",
                self.p2,
                self.kind.tag()
            )))
        }
    }
}

/// The levels `u_k` and quantile scores `q_k` for one ordered factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGrid {
    levels: Vec<f64>,
    scores: Vec<f64>,
}

impl ScoreGrid {
    /// Number of factor levels.
    pub fn k(&self) -> usize {
        self.scores.len()
    }

    /// The grid levels `u_k = k/(K+1)`.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// The quantile scores `q_k`, strictly increasing.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Build a grid directly from precomputed scores; they must be
    /// strictly increasing and of length >= 2.
    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        if scores.len() < 2 {
            return Err(Error::Domain(format!(
                "score grid needs K >= 2, got K = {}",
                scores.len()
            )));
        }
        if scores.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Data(format!(
                "scores are not strictly increasing: {scores:?}"
            )));
        }
        let levels = grid_levels(scores.len())?;
        Ok(Self { levels, scores })
    }
}

/// The equally spaced levels `(1/(K+1), ..., K/(K+1))`.
pub fn grid_levels(k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::Domain(format!("grid_levels requires K >= 2, got {k}")));
    }
    let denom = (k + 1) as f64;
    Ok((1..=k).map(|i| i as f64 / denom).collect())
}

/// Apply the family transformation to a standard normal deviate `z`.
///
/// Strictly increasing in `z` for any valid parameters. Magnitudes are
/// checked in log space before exponentiating, so huge-but-finite scores
/// pass through and genuine overflow is reported as a range error.
pub fn transform(z: f64, params: &ScoreFamilyParams) -> Result<f64> {
    params.validate()?;
    let ScoreFamilyParams { kind, p1, p2 } = *params;
    let y = match kind {
        FamilyKind::JohnsonSu => {
            let zt = (z - p1) / p2;
            if libm::fabs(zt) > LN_OVERFLOW_LIMIT {
                return Err(Error::Overflow { p1, p2 });
            }
            libm::sinh(zt)
        }
        FamilyKind::GAndH => {
            let (g, h) = (p1, p2);
            let tail = 0.5 * h * z * z;
            // |g| below 1e-12 is treated as the symmetric g = 0 branch to
            // avoid catastrophic cancellation in (e^{gz} - 1)/g.
            if libm::fabs(g) < 1e-12 {
                if tail + libm::log(libm::fabs(z).max(1e-300)) > LN_OVERFLOW_LIMIT {
                    return Err(Error::Overflow { p1, p2 });
                }
                z * libm::exp(tail)
            } else {
                let skew = libm::expm1(g * z) / g;
                let ln_mag = libm::log(libm::fabs(skew).max(1e-300)) + tail;
                if ln_mag > LN_OVERFLOW_LIMIT {
                    return Err(Error::Overflow { p1, p2 });
                }
                skew * libm::exp(tail)
            }
        }
        FamilyKind::SinhArcsinh => {
            let arg = (libm::asinh(z) + p1) / p2;
            if libm::fabs(arg) > LN_OVERFLOW_LIMIT {
                return Err(Error::Overflow { p1, p2 });
            }
            libm::sinh(arg)
        }
    };
    if !y.is_finite() || libm::fabs(y) > OVERFLOW_LIMIT {
        return Err(Error::Overflow { p1, p2 });
    }
    Ok(y)
}

/// Quantile scores `q_k = T(Phi^{-1}(u_k))` on the K-level grid.
pub fn quantile_scores(k: usize, params: &ScoreFamilyParams) -> Result<ScoreGrid> {
    let levels = grid_levels(k)?;
    let mut scores = Vec::with_capacity(k);
    for &u in &levels {
        scores.push(transform(norm_quantile(u)?, params)?);
    }
    if scores.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Data(format!(
            "transform produced non-increasing scores for ({}, {})",
            params.p1, params.p2
        )));
    }
    Ok(ScoreGrid { levels, scores })
}

/// How to map raw quantile scores to working scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RescaleMode {
    /// Raw quantiles, unchanged.
    None,
    /// `(K+1) * q_k`, comparable with the basic scores `1..K`.
    TimesKPlus1,
    /// Affine map sending the first two scores to (1, 2).
    AnchorFirstTwo,
}

/// Rescale a grid's scores per `mode`.
pub fn rescale_scores(grid: &ScoreGrid, mode: RescaleMode) -> Result<Vec<f64>> {
    let q = grid.scores();
    match mode {
        RescaleMode::None => Ok(q.to_vec()),
        RescaleMode::TimesKPlus1 => {
            let f = (grid.k() + 1) as f64;
            Ok(q.iter().map(|&v| f * v).collect())
        }
        RescaleMode::AnchorFirstTwo => {
            let gap = q[1] - q[0];
            if gap < 1e-12 {
                return Err(Error::DegenerateSpacing(gap));
            }
            Ok(q.iter().map(|&v| 1.0 + (v - q[0]) / gap).collect())
        }
    }
}
