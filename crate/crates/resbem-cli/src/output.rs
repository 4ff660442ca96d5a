//! CSV writing. Floats use the shortest representation that round-trips,
//! with '.' as decimal separator; complex values are split into re/im columns.

use std::io;
use std::path::Path;

pub trait Row {
    fn header() -> &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

pub fn float(v: f64) -> String {
    // Debug formatting is locale-free and round-trips exactly.
    format!("{v:?}")
}

/// Write `rows` with a header line; an empty slice still produces the header.
pub fn write_csv<R: Row>(path: &Path, rows: &[R]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(R::header())?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()
}

#[derive(Debug, Clone)]
pub struct ResonanceRow {
    pub n_outer: usize,
    pub n_inclusion: usize,
    pub tol: f64,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub m_geo: usize,
    pub p: usize,
    pub alpha: usize,
    /// `σ_min(T(λ)) / ‖T(λ)‖`.
    pub residual: f64,
    pub newton_steps: usize,
}

impl Row for ResonanceRow {
    fn header() -> &'static [&'static str] {
        &["n_outer", "n_inclusion", "tol", "lambda_re", "lambda_im", "m_geo", "p", "alpha", "residual", "newton_steps"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n_outer.to_string(),
            self.n_inclusion.to_string(),
            float(self.tol),
            float(self.lambda_re),
            float(self.lambda_im),
            self.m_geo.to_string(),
            self.p.to_string(),
            self.alpha.to_string(),
            float(self.residual),
            self.newton_steps.to_string(),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct PolarizationRow {
    pub inclusion: usize,
    pub mode: &'static str,
    pub n_polarization: usize,
    pub tol: f64,
    pub gamma_bg: f64,
    pub trace: f64,
    pub m: [[f64; 2]; 2],
    pub eigenvalues: [f64; 2],
    pub quad_error: f64,
}

impl Row for PolarizationRow {
    fn header() -> &'static [&'static str] {
        &["inclusion", "mode", "n_polarization", "tol", "gamma_bg", "trace", "m11", "m12", "m21", "m22", "eig_min", "eig_max", "quad_error"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.inclusion.to_string(),
            self.mode.to_string(),
            self.n_polarization.to_string(),
            float(self.tol),
            float(self.gamma_bg),
            float(self.trace),
            float(self.m[0][0]),
            float(self.m[0][1]),
            float(self.m[1][0]),
            float(self.m[1][1]),
            float(self.eigenvalues[0]),
            float(self.eigenvalues[1]),
            float(self.quad_error),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n_outer: usize,
    pub n_inclusion: usize,
    pub tol: f64,
    pub epsilon: f64,
    pub branch: usize,
    pub lambda: [f64; 2],
    pub lambda_eps: [f64; 2],
    /// Prediction of the configured mode.
    pub predicted: [f64; 2],
    pub corrected: [f64; 2],
    pub published: [f64; 2],
    /// `|mean_j λ^j_ε − λ − Δ_pred|`.
    pub residual: f64,
    pub slope_shift: f64,
    pub slope_residual: f64,
    pub status: String,
}

impl Row for SweepRow {
    fn header() -> &'static [&'static str] {
        &[
            "n_outer", "n_inclusion", "tol", "epsilon", "branch", "lambda_re", "lambda_im", "lambda_eps_re", "lambda_eps_im",
            "pred_re", "pred_im", "corrected_re", "corrected_im", "published_re", "published_im", "residual",
            "slope_shift", "slope_residual", "status",
        ]
    }

    fn record(&self) -> Vec<String> {
        let mut v = vec![self.n_outer.to_string(), self.n_inclusion.to_string(), float(self.tol), float(self.epsilon), self.branch.to_string()];
        for c in [self.lambda, self.lambda_eps, self.predicted, self.corrected, self.published] {
            v.push(float(c[0]));
            v.push(float(c[1]));
        }
        v.extend([float(self.residual), float(self.slope_shift), float(self.slope_residual), self.status.clone()]);
        v
    }
}

#[derive(Debug, Clone)]
pub struct OracleRow {
    pub n_outer: usize,
    pub tol: f64,
    pub mode: u32,
    pub omega: [f64; 2],
    pub multiplicity: usize,
    pub residual: f64,
}

impl Row for OracleRow {
    fn header() -> &'static [&'static str] {
        &["n_outer", "tol", "mode", "omega_re", "omega_im", "multiplicity", "residual"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n_outer.to_string(),
            float(self.tol),
            self.mode.to_string(),
            float(self.omega[0]),
            float(self.omega[1]),
            self.multiplicity.to_string(),
            float(self.residual),
        ]
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Check {
    pub name: &'static str,
    pub n: usize,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value < threshold`.
    pub fn below(name: &'static str, n: usize, value: f64, threshold: f64) -> Self {
        Self { name, n, value, threshold, pass: value < threshold }
    }
}

impl Row for Check {
    fn header() -> &'static [&'static str] {
        &["check", "n", "value", "threshold", "pass"]
    }

    fn record(&self) -> Vec<String> {
        vec![self.name.to_string(), self.n.to_string(), float(self.value), float(self.threshold), self.pass.to_string()]
    }
}
