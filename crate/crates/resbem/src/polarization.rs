//! Polarization tensors of a reference inclusion `B` with scalar contrast
//! `γ` (background) against `t = tr γ_D`.
//!
//! With `φ_l = S_B ψ_l` (Laplace single layer, `G = −log|x−y|/2π`) the
//! transmission conditions reduce to the second-kind equation
//!
//! `(λ_c − K') ψ_l = t/(γ − t) ν_l`,  `λ_c = (γ + t) / (2(γ − t))`,
//!
//! where `K'` has kernel `∂_{ν_x}G`. The outer flux is `∂_ν φ_l⁺ = (K' − ½)ψ_l`
//! and `M_jl = |B| δ_jl + (γ/t − 1) ∮ y_j ∂_ν φ_l⁺ dσ`.
//! For the unit disk `M = 2π t/(γ + t) I`.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryGrid, ParametricCurve};
use crate::linalg::{condition, Lu};
use crate::potentials::{assemble_layers, Want};
use crate::specfun::Kernel;
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::Serialize;

/// Exterior normal trace of the single layer: `∂_ν S ψ|₊ = (K' + EXTERIOR_JUMP) ψ`.
pub const EXTERIOR_JUMP: f64 = -0.5;

pub const DEGENERATE_CONTRAST: f64 = 1e-12;
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarizationTensor {
    pub m: [[f64; 2]; 2],
    pub shape: ParametricCurve,
    pub gamma_bg: f64,
    pub trace_gd: f64,
    pub nodes: usize,
    pub area: f64,
    /// Max entry difference against the `N/2` grid (0 when not estimated).
    pub quad_error: f64,
    /// `max_l |∮ ψ_l dσ|`.
    pub mean_density: f64,
}

impl PolarizationTensor {
    pub fn eigenvalues(&self) -> [f64; 2] {
        let m = &self.m;
        let c = 0.5 * (m[0][0] + m[1][1]);
        let d = (0.25 * (m[0][0] - m[1][1]).powi(2) + m[0][1] * m[1][0]).sqrt();
        [c - d, c + d]
    }

    pub fn asymmetry(&self) -> f64 {
        (self.m[0][1] - self.m[1][0]).abs()
    }

    /// `ξ · M η`.
    pub fn apply(&self, x: [C64; 2]) -> [C64; 2] {
        let m = &self.m;
        [x[0] * m[0][0] + x[1] * m[0][1], x[0] * m[1][0] + x[1] * m[1][1]]
    }
}

fn solve(grid: &BoundaryGrid, gamma_bg: f64, trace_gd: f64) -> Result<([[f64; 2]; 2], f64)> {
    let n = grid.len();
    let area = grid.area();
    let diff = gamma_bg - trace_gd;
    let lam = (gamma_bg + trace_gd) / (2.0 * diff);
    let kp = assemble_layers(grid, grid, &Kernel::laplace(1.0), Want { adjoint: true, ..Want::default() }).kp.unwrap();
    let a = Mat::from_fn(n, n, |i, j| if i == j { C64::new(lam, 0.0) } else { C64::new(0.0, 0.0) } - kp[(i, j)]);
    let cond = condition(a.as_ref())?;
    if cond > MAX_CONDITION {
        return Err(Error::IllConditioned(cond));
    }
    let lu = Lu::new(a.as_ref())?;
    let w = grid.arc_weights();
    let mut m = [[0.0; 2]; 2];
    let mut mean = 0.0f64;
    for l in 0..2 {
        let rhs: Vec<C64> = grid.normals.iter().map(|nu| C64::new(trace_gd / diff * nu[l], 0.0)).collect();
        let psi = lu.solve_vec(&rhs);
        mean = mean.max(psi.iter().zip(&w).map(|(p, w)| p * w).sum::<C64>().norm());
        let kpsi = crate::linalg::mat_vec(kp.as_ref(), &psi);
        let flux: Vec<f64> = kpsi.iter().zip(&psi).map(|(k, p)| (k + p * EXTERIOR_JUMP).re).collect();
        for (j, row) in m.iter_mut().enumerate() {
            let integral: f64 = (0..n).map(|k| grid.nodes[k][j] * flux[k] * w[k]).sum();
            row[l] = (gamma_bg / trace_gd - 1.0) * integral + if j == l { area } else { 0.0 };
        }
    }
    Ok((m, mean))
}

/// Polarization tensor on the grid of `B`, with a quadrature error estimate
/// from the half-size grid when `N ≥ 32`.
pub fn compute_polarization(grid: &BoundaryGrid, gamma_bg: f64, trace_gd: f64) -> Result<PolarizationTensor> {
    for (name, v) in [("gamma_bg", gamma_bg), ("trace_gd", trace_gd)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter { name, reason: format!("must be positive, got {v}") });
        }
    }
    let area = grid.area();
    let base = PolarizationTensor {
        m: [[area, 0.0], [0.0, area]],
        shape: grid.curve,
        gamma_bg,
        trace_gd,
        nodes: grid.len(),
        area,
        quad_error: 0.0,
        mean_density: 0.0,
    };
    if gamma_bg == trace_gd {
        return Ok(base);
    }
    if (gamma_bg - trace_gd).abs() < DEGENERATE_CONTRAST {
        return Err(Error::DegenerateContrast(gamma_bg - trace_gd));
    }
    let (m, mean_density) = solve(grid, gamma_bg, trace_gd)?;
    let quad_error = if grid.len() >= 32 {
        let (mc, _) = solve(&grid.coarsen()?, gamma_bg, trace_gd)?;
        (0..4).map(|k| (m[k / 2][k % 2] - mc[k / 2][k % 2]).abs()).fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok(PolarizationTensor { m, quad_error, mean_density, ..base })
}

/// Tensor of the dilated shape `sB`: `M(sB) = s² M(B)`.
pub fn polarization_shape_scaling(t: &PolarizationTensor, s: f64) -> Result<PolarizationTensor> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter { name: "s", reason: format!("must be positive, got {s}") });
    }
    let s2 = s * s;
    let mut out = t.clone();
    for row in out.m.iter_mut() {
        for v in row.iter_mut() {
            *v *= s2;
        }
    }
    out.area *= s2;
    out.quad_error *= s2;
    out.shape = t.shape.scaled_translated(s, [0.0, 0.0]);
    Ok(out)
}
