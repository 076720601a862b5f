//! Orthogonal-polynomial contrast coding for ordered factors.
//!
//! The `K x (K-1)` coding whose columns are orthonormal polynomials of
//! increasing degree in the level index; this is the default coding the
//! score method replaces, and the two must agree in span and normalization
//! for the fitted tables to be comparable.

use crate::{Error, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Orthonormal polynomial contrasts for a `K`-level ordered factor.
///
/// Column `j` (1-based degree) is a degree-`j` polynomial in the level
/// index, centered and normalized so that columns sum to zero and are
/// mutually orthonormal.
#[derive(Debug, Clone)]
pub struct ContrastMatrix {
    k: usize,
    /// Column-major: `columns[j]` has `K` entries for degree `degrees[j]`.
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
    degrees: Vec<usize>,
}

impl ContrastMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Column for the `j`-th retained degree (0-based position).
    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    /// Suffix names in table style: `.L`, `.Q`, `.C`, `^4`, ...
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Polynomial degrees of the retained columns.
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }
}

/// Table-style suffix for a polynomial degree.
fn degree_name(degree: usize) -> String {
    match degree {
        1 => String::from(".L"),
        2 => String::from(".Q"),
        3 => String::from(".C"),
        d => format!("^{d}"),
    }
}

/// Orthonormal polynomial contrasts for `K >= 2` levels.
///
/// Built by modified Gram-Schmidt on the Vandermonde matrix of the
/// centered level indices; the constant column is dropped and signs are
/// fixed so every column's leading-order coefficient is positive (the
/// linear column increases with the level).
pub fn poly_contrasts(k: usize) -> Result<ContrastMatrix> {
    if k < 2 {
        return Err(Error::Domain(format!(
            "poly_contrasts requires K >= 2, got {k}"
        )));
    }
    let center = (k + 1) as f64 / 2.0;
    let x: Vec<f64> = (1..=k).map(|i| i as f64 - center).collect();

    // Vandermonde columns 1, x, x^2, ..., x^{K-1}, orthonormalized in order.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    for degree in 0..k {
        let mut col: Vec<f64> = x.iter().map(|&v| libm::pow(v, degree as f64)).collect();
        for prev in &basis {
            let dot: f64 = col.iter().zip(prev).map(|(a, b)| a * b).sum();
            for (c, p) in col.iter_mut().zip(prev) {
                *c -= dot * p;
            }
        }
        // second orthogonalization pass for numerical hygiene at larger K
        for prev in &basis {
            let dot: f64 = col.iter().zip(prev).map(|(a, b)| a * b).sum();
            for (c, p) in col.iter_mut().zip(prev) {
                *c -= dot * p;
            }
        }
        let norm = libm::sqrt(col.iter().map(|v| v * v).sum());
        // Sign convention: positive projection onto x^degree.
        let lead: f64 = col
            .iter()
            .zip(&x)
            .map(|(c, &v)| c * libm::pow(v, degree as f64))
            .sum();
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for c in col.iter_mut() {
            *c *= sign / norm;
        }
        basis.push(col);
    }
    basis.remove(0); // constant column

    let degrees: Vec<usize> = (1..k).collect();
    let names = degrees.iter().map(|&d| degree_name(d)).collect();
    Ok(ContrastMatrix {
        k,
        columns: basis,
        names,
        degrees,
    })
}

/// Keep only the requested polynomial degrees, preserving order and names.
pub fn truncate_contrasts(full: &ContrastMatrix, degrees: &[usize]) -> Result<ContrastMatrix> {
    if degrees.is_empty() {
        return Err(Error::Domain(String::from(
            "truncate_contrasts requires at least one degree",
        )));
    }
    let mut columns = Vec::with_capacity(degrees.len());
    let mut names = Vec::with_capacity(degrees.len());
    let mut kept = Vec::with_capacity(degrees.len());
    for &d in degrees {
        let pos = full.degrees.iter().position(|&fd| fd == d).ok_or_else(|| {
            Error::Domain(format!(
                "degree {d} not available for a {}-level factor",
                full.k
            ))
        })?;
        columns.push(full.columns[pos].clone());
        names.push(full.names[pos].clone());
        kept.push(d);
    }
    Ok(ContrastMatrix {
        k: full.k,
        columns,
        names,
        degrees: kept,
    })
}
