//! Ordinary least squares with standard errors and a collinearity check.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative residual norm below which a column counts as a linear
/// combination of earlier columns.
const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OlsFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `SS_res / (n - p)`.
    pub residual_variance: f64,
    pub r_squared: f64,
}

impl OlsFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.position(name).map(|i| self.coefficients[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.position(name).map(|i| self.std_errors[i])
    }

    fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn fitted(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.residuals).map(|(y, r)| y - r).collect()
    }
}

/// Fits `y ~ X` where `rows[i]` is row `i` of `X`. No intercept is added;
/// include a column of ones when one is wanted.
pub fn fit(rows: &[Vec<f64>], y: &[f64], names: &[String]) -> Result<OlsFit> {
    let p = names.len();
    let n = rows.len();
    if n != y.len() {
        return Err(Error::InvalidArgument(format!("{n} design rows but {} targets", y.len())));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != p) {
        return Err(Error::InvalidArgument(format!("design row {bad} has the wrong width")));
    }
    if n <= p {
        return Err(Error::InvalidArgument(format!(
            "need more observations ({n}) than parameters ({p})"
        )));
    }
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    check_rank(&x, names)?;

    let yv = DVector::from_column_slice(y);
    let qr = x.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient { columns: names.to_vec() })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::RankDeficient { columns: names.to_vec() })?;
    // (X'X)^-1 = R^-1 R^-T
    let xtx_inv = &r_inv * r_inv.transpose();

    let residuals = &yv - &x * &beta;
    let ss_res = residuals.norm_squared();
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let residual_variance = ss_res / (n - p) as f64;
    let std_errors = (0..p).map(|j| (residual_variance * xtx_inv[(j, j)]).max(0.0).sqrt()).collect();

    Ok(OlsFit {
        names: names.to_vec(),
        coefficients: beta.iter().copied().collect(),
        std_errors,
        residuals: residuals.iter().copied().collect(),
        residual_variance,
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { f64::NAN },
    })
}

/// Gram-Schmidt pass over the columns; a column whose residual vanishes
/// is reported together with the earlier columns it depends on.
fn check_rank(x: &DMatrix<f64>, names: &[String]) -> Result<()> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut independent: Vec<usize> = Vec::new();
    let mut collinear: Vec<String> = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j).into_owned();
        let scale = col.norm();
        let mut v = col.clone();
        // two passes for numerical stability
        for _ in 0..2 {
            for q in &basis {
                let d = q.dot(&v);
                v -= q * d;
            }
        }
        let rest = v.norm();
        if scale == 0.0 || rest <= RANK_TOLERANCE * scale {
            if scale > 0.0 && !independent.is_empty() {
                let sub = DMatrix::from_fn(x.nrows(), independent.len(), |i, k| x[(i, independent[k])]);
                let svd = sub.svd(true, true);
                if let Ok(coef) = svd.solve(&col, 1e-12) {
                    for (k, c) in coef.iter().enumerate() {
                        let name = &names[independent[k]];
                        if c.abs() > 1e-8 && !collinear.contains(name) {
                            collinear.push(name.clone());
                        }
                    }
                }
            }
            if !collinear.contains(&names[j]) {
                collinear.push(names[j].clone());
            }
        } else {
            basis.push(v / rest);
            independent.push(j);
        }
    }
    if collinear.is_empty() {
        Ok(())
    } else {
        Err(Error::RankDeficient { columns: collinear })
    }
}
