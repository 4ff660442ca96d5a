//! Leading-order predictions for resonance shifts caused by small inclusions,
//! and the pieces they are built from.
//!
//! Two prediction modes are provided:
//!
//! - [`PredictionMode::Published`] evaluates the printed formulas literally:
//!   contrast `γ1(1 − γ1/tr γ_D)`, tensor `M(γ1, tr γ_D)` and the Gram-matrix
//!   dual coefficients `c = A⁻¹`.
//! - [`PredictionMode::Corrected`] is the first-order perturbation of
//!   `T_ε(z) = T(z) + γ1 S^z (N_ε^z − N^z)`: the shifts are the eigenvalues of
//!   `−B⁻¹C` with `B_kj = ⟨T'(λ) u^j, ψ^k⟩`, `ψ^k = (S^{λ*})⁻¹ ū^k`, and
//!   `C_kj = ε² Σ_i γ1(1 − γ1/c_i) ∇v^k(z_i)·M(γ1, c_i)∇v^j(z_i)`, where
//!   `c_i = tr γ_D/2` is the conductivity of an isotropic inclusion.
//!
//! Both rely on the Dirichlet-problem expansion
//! `(N_ε − N)f ≈ −ε² Σ_i γ1(1 − γ1/c_i) [∂_{ν_x}∇_z G1 − N ∇_z G1](·, z_i)·M∇v(z_i)`
//! with `G1 = (i/(4γ1)) H0(k1|x − z|)`.

use crate::dtn::{dtn_homogeneous, DtnMap, SceneGrids};
use crate::error::{Error, Result};
use crate::geometry::{build_grid, BoundaryGrid, Point, Scene};
use crate::linalg::{condition, inverse, mat_vec, vec_norm, weighted_adjoint, CMat, Lu};
use crate::nep::{OperatorFamily, ResonanceResult};
use crate::polarization::{compute_polarization, PolarizationTensor};
use crate::potentials::{assemble_single_layer, assemble_layers, Want};
use crate::specfun::{green_gradient_y, jy01};
use crate::transfer::{
    assemble_t, assemble_t_dual, assemble_t_eps, exterior_kernel, JumpMode, TransferFamily,
};
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Space dimension; appears only as the exponent of `ε`.
pub const DIMENSION: i32 = 2;

pub const MAX_GRAM_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictionMode {
    Published,
    #[default]
    Corrected,
}

/// Bilinear product `a·M b` (no conjugation).
pub fn bilinear(a: [C64; 2], m: &[[f64; 2]; 2], b: [C64; 2]) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            s += a[i] * m[i][j] * b[j];
        }
    }
    s
}

/// Dual basis of the null space of `T(λ)`.
#[derive(Debug, Clone)]
pub struct DualBasis {
    /// `ψ^k = (S^{−λ̄})⁻¹ ū^k` (columns).
    pub psi: CMat,
    /// `A_ki = ⟨ψ^k, u^i⟩`.
    pub gram: CMat,
    /// `c = A⁻¹`.
    pub coeffs: CMat,
    /// `u^{j*} = Σ_k c_jk ψ^k` (columns).
    pub vectors: CMat,
    pub gram_condition: f64,
}

fn weighted_inner_cols(a: &CMat, ja: usize, b: &CMat, jb: usize, w: &[f64]) -> C64 {
    (0..a.nrows()).map(|i| a[(i, ja)] * b[(i, jb)].conj() * w[i]).sum()
}

/// Dual vectors for the null vectors `u` (columns) of `T(λ)` on `grid`.
///
/// `S^{−λ̄}` is realized as the weighted adjoint of the exterior single layer
/// `S^λ`.
pub fn dual_basis(u: &CMat, grid: &BoundaryGrid, lambda: C64, gamma2: f64) -> Result<DualBasis> {
    let w = grid.arc_weights();
    let s = assemble_single_layer(grid, grid, &exterior_kernel(lambda, gamma2)).matrix;
    let s_star = weighted_adjoint(s.as_ref(), &w);
    let cond = condition(s_star.as_ref())?;
    if cond > MAX_GRAM_CONDITION {
        return Err(Error::IllConditioned(cond));
    }
    let lu = Lu::new(s_star.as_ref())?;
    let (n, m) = (u.nrows(), u.ncols());
    let ubar = Mat::from_fn(n, m, |i, j| u[(i, j)].conj());
    let psi = lu.solve(ubar.as_ref());
    let gram = Mat::from_fn(m, m, |k, i| weighted_inner_cols(&psi, k, u, i, &w));
    let gram_condition = condition(gram.as_ref())?;
    if gram_condition > MAX_GRAM_CONDITION {
        return Err(Error::SingularGram(gram_condition));
    }
    let coeffs = inverse(gram.as_ref())?;
    let vectors = Mat::from_fn(n, m, |i, j| (0..m).map(|k| coeffs[(j, k)] * psi[(i, k)]).sum());
    Ok(DualBasis { psi, gram, coeffs, vectors, gram_condition })
}

impl DualBasis {
    /// `max |⟨u^j, u^{i*}⟩ − δ_ij|`.
    pub fn biorthogonality_error(&self, u: &CMat, w: &[f64]) -> f64 {
        let m = u.ncols();
        let mut e = 0.0f64;
        for j in 0..m {
            for i in 0..m {
                let v = weighted_inner_cols(u, j, &self.vectors, i, w);
                let d = if i == j { 1.0 } else { 0.0 };
                e = e.max((v - d).norm());
            }
        }
        e
    }
}

/// `(i/4)H0(k r)` derivatives at `d = x − z`: gradient in `z`, and the mixed
/// Hessian `∂_{x_b}∂_{z_a}`.
fn kernel_derivatives(k: C64, d: Point) -> ([C64; 2], [[C64; 2]; 2]) {
    let r = d[0].hypot(d[1]);
    let b = jy01(k * r);
    let (h0, h1) = (b.h0(), b.h1());
    let c = 0.25 * I;
    // ∇_z = c k H1 d / r
    let g = [c * k * h1 * d[0] / r, c * k * h1 * d[1] / r];
    let mut hess = [[C64::new(0.0, 0.0); 2]; 2];
    for (a, row) in hess.iter_mut().enumerate() {
        for (bb, v) in row.iter_mut().enumerate() {
            let dab = if a == bb { 1.0 } else { 0.0 };
            *v = c * k * (k * h0 * d[a] * d[bb] / (r * r) + h1 * (dab / r - 2.0 * d[a] * d[bb] / (r * r * r)));
        }
    }
    (g, hess)
}

/// Interior Helmholtz field `γ1Δv + ω²v = 0` with trace `f`, evaluated from
/// its Green representation `v = ∫ Φ ∂_ν v − ∂_{ν_y}Φ v`.
#[derive(Debug, Clone)]
pub struct InteriorSolution {
    grid: BoundaryGrid,
    f: Vec<C64>,
    q: Vec<C64>,
    k: C64,
}

impl InteriorSolution {
    pub fn new(grid: &BoundaryGrid, f: &[C64], omega: C64, gamma1: f64) -> Result<Self> {
        let dtn = dtn_homogeneous(grid, omega, gamma1)?;
        Ok(Self::from_dtn(grid, f, &dtn, gamma1))
    }

    pub fn from_dtn(grid: &BoundaryGrid, f: &[C64], dtn: &DtnMap, gamma1: f64) -> Self {
        Self { grid: grid.clone(), f: f.to_vec(), q: dtn.apply(f), k: dtn.omega / gamma1.sqrt() }
    }

    fn check(&self, z: Point) -> Result<()> {
        if !self.grid.contains(z) {
            return Err(Error::InvalidParameter { name: "z", reason: "point is outside the domain".into() });
        }
        let d = self.grid.distance_to(z);
        let min = 5.0 * self.grid.max_spacing();
        if d <= min {
            return Err(Error::TooCloseToBoundary { distance: d, min });
        }
        Ok(())
    }

    pub fn value(&self, z: Point) -> Result<C64> {
        self.check(z)?;
        let g = &self.grid;
        let mut v = C64::new(0.0, 0.0);
        for k in 0..g.len() {
            let y = g.nodes[k];
            let d = [z[0] - y[0], z[1] - y[1]];
            let r = d[0].hypot(d[1]);
            let b = jy01(self.k * r);
            let phi = 0.25 * I * b.h0();
            // ∂_{ν_y} Φ(z, y) = (i/4) k H1 (d·ν)/r
            let dn = 0.25 * I * self.k * b.h1() * (d[0] * g.normals[k][0] + d[1] * g.normals[k][1]) / r;
            v += (phi * self.q[k] - dn * self.f[k]) * g.speed[k] * g.weight;
        }
        Ok(v)
    }

    pub fn gradient(&self, z: Point) -> Result<[C64; 2]> {
        self.check(z)?;
        let g = &self.grid;
        let k = self.k;
        let mut out = [C64::new(0.0, 0.0); 2];
        for j in 0..g.len() {
            let y = g.nodes[j];
            let nu = g.normals[j];
            let d = [z[0] - y[0], z[1] - y[1]];
            let r = d[0].hypot(d[1]);
            let b = jy01(k * r);
            let (h0, h1) = (b.h0(), b.h1());
            let dn = d[0] * nu[0] + d[1] * nu[1];
            let w = g.speed[j] * g.weight;
            for a in 0..2 {
                // ∇_z Φ = −(i/4) k H1 d/r
                let gphi = -0.25 * I * k * h1 * d[a] / r;
                // ∇_z ∂_{ν_y}Φ = (i/4) k [(k H0/r − 2 H1/r²)(d·ν) d/r + H1 ν/r]
                let gdn = 0.25 * I * k * ((k * h0 / r - 2.0 * h1 / (r * r)) * dn * d[a] / r + h1 * nu[a] / r);
                out[a] += (gphi * self.q[j] - gdn * self.f[j]) * w;
            }
        }
        Ok(out)
    }
}

/// `∇v(z)` for the interior extension of `f` at frequency `ω`.
pub fn interior_gradient(grid: &BoundaryGrid, f: &[C64], omega: C64, gamma1: f64, z: Point) -> Result<[C64; 2]> {
    InteriorSolution::new(grid, f, omega, gamma1)?.gradient(z)
}

/// Contrast factor and tensor used for inclusion `i` in a given mode.
#[derive(Debug, Clone)]
pub struct InclusionTerm {
    pub center: Point,
    /// `γ1(1 − γ1/t)` with `t = tr γ_D` (published) or `tr γ_D/2` (corrected).
    pub contrast: f64,
    pub tensor: PolarizationTensor,
}

/// Contrast and tensor of every inclusion of the scene.
pub fn inclusion_terms(scene: &Scene, mode: PredictionMode, n_pol: usize) -> Result<Vec<InclusionTerm>> {
    let g1 = scene.gamma1;
    scene
        .inclusions
        .iter()
        .map(|inc| {
            let t = match mode {
                PredictionMode::Published => inc.trace(),
                PredictionMode::Corrected => inc.trace() / 2.0,
            };
            let grid = build_grid(&inc.shape, n_pol)?;
            let tensor = compute_polarization(&grid, g1, t)?;
            Ok(InclusionTerm { center: inc.center, contrast: g1 * (1.0 - g1 / t), tensor })
        })
        .collect()
}

/// Everything at an unperturbed resonance that the predictions need.
#[derive(Debug, Clone)]
pub struct PerturbationSetup {
    pub lambda: C64,
    pub alpha: usize,
    pub null_vectors: CMat,
    pub dual: DualBasis,
    /// `B_kj = ⟨T'(λ) u^j, ψ^k⟩`.
    pub derivative_gram: CMat,
    /// `∇v^j(z_i)`, indexed `[i][j]`.
    pub gradients: Vec<Vec<[C64; 2]>>,
    pub published: Vec<InclusionTerm>,
    pub corrected: Vec<InclusionTerm>,
}

/// Central difference `T'(λ)` with step `h`.
pub fn derivative<F: OperatorFamily + ?Sized>(family: &F, lambda: C64, h: f64) -> Result<CMat> {
    let a = family.eval(lambda + h)?;
    let b = family.eval(lambda - h)?;
    Ok(Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] - b[(i, j)]) / (2.0 * h)))
}

impl PerturbationSetup {
    pub fn new(family: &TransferFamily, res: &ResonanceResult, scene: &Scene, n_pol: usize) -> Result<Self> {
        let lambda = res.lambda;
        let grid = &family.grid;
        let u = res.null_vectors.clone();
        let dual = dual_basis(&u, grid, lambda, family.gamma2)?;
        let tp = derivative(family, lambda, 1e-5 * lambda.norm().max(1.0))?;
        let w = grid.arc_weights();
        let m = u.ncols();
        let tu = &tp * &u;
        let derivative_gram = Mat::from_fn(m, m, |k, j| weighted_inner_cols(&tu, j, &dual.psi, k, &w));
        let dtn = dtn_homogeneous(grid, lambda, family.gamma1)?;
        let fields: Vec<InteriorSolution> = (0..m)
            .map(|j| {
                let col: Vec<C64> = (0..u.nrows()).map(|i| u[(i, j)]).collect();
                InteriorSolution::from_dtn(grid, &col, &dtn, family.gamma1)
            })
            .collect();
        let gradients = scene
            .inclusions
            .iter()
            .map(|inc| fields.iter().map(|f| f.gradient(inc.center)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lambda,
            alpha: res.alpha,
            null_vectors: u,
            dual,
            derivative_gram,
            gradients,
            published: inclusion_terms(scene, PredictionMode::Published, n_pol)?,
            corrected: inclusion_terms(scene, PredictionMode::Corrected, n_pol)?,
        })
    }

    pub fn m_geo(&self) -> usize {
        self.null_vectors.ncols()
    }

    fn terms(&self, mode: PredictionMode) -> &[InclusionTerm] {
        match mode {
            PredictionMode::Published => &self.published,
            PredictionMode::Corrected => &self.corrected,
        }
    }

    /// Per-inclusion `m × m` matrices whose combination gives the shifts at `ε = 1`:
    /// published `K_jl = γ1(1 − γ1/t) ∇v^j·M ∇(c_jl v^l)`, corrected `B⁻¹C_i`.
    fn kernel_matrices(&self, mode: PredictionMode) -> Result<Vec<CMat>> {
        let m = self.m_geo();
        let binv = inverse(self.derivative_gram.as_ref())?;
        self.terms(mode)
            .iter()
            .zip(&self.gradients)
            .map(|(term, grads)| {
                let mm = &term.tensor.m;
                let c = Mat::from_fn(m, m, |k, j| term.contrast * bilinear(grads[k], mm, grads[j]));
                Ok(match mode {
                    PredictionMode::Published => Mat::from_fn(m, m, |j, l| c[(j, l)] * self.dual.coeffs[(j, l)]),
                    PredictionMode::Corrected => &binv * &c,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct AsymptoticPrediction {
    pub lambda: C64,
    pub epsilon: f64,
    pub mode: PredictionMode,
    /// Predicted averaged shift `(1/m)Σ_j λ^j_ε − λ`.
    pub shift: C64,
    /// Contribution of each inclusion to `shift`.
    pub per_inclusion: Vec<C64>,
    /// `∇v^j(z_i)`, indexed `[i][j]`.
    pub gradients: Vec<Vec<[C64; 2]>>,
}

/// Averaged first-order shift of a resonance with ascent 1.
pub fn predict_shift_simple(setup: &PerturbationSetup, eps: f64, mode: PredictionMode) -> Result<AsymptoticPrediction> {
    if setup.alpha != 1 {
        return Err(Error::AscentMismatch(setup.alpha));
    }
    let m = setup.m_geo() as f64;
    let scale = eps.powi(DIMENSION);
    let per_inclusion: Vec<C64> = setup
        .kernel_matrices(mode)?
        .iter()
        .map(|k| {
            let tr: C64 = (0..k.nrows()).map(|j| k[(j, j)]).sum();
            -scale * tr / m
        })
        .collect();
    Ok(AsymptoticPrediction {
        lambda: setup.lambda,
        epsilon: eps,
        mode,
        shift: per_inclusion.iter().sum(),
        per_inclusion,
        gradients: setup.gradients.clone(),
    })
}

/// Right-hand side `R_j` of `(λ^j_ε − λ)^α ≈ R_j` for the `j`-th null vector.
///
/// The corrected mode is a first-order (α = 1) theory and refuses `α > 1`.
pub fn shift_power(setup: &PerturbationSetup, alpha: usize, j: usize, eps: f64, mode: PredictionMode) -> Result<C64> {
    if alpha == 0 {
        return Err(Error::InvalidParameter { name: "alpha", reason: "must be at least 1".into() });
    }
    if j >= setup.m_geo() {
        return Err(Error::InvalidParameter { name: "j", reason: format!("only {} null vectors", setup.m_geo()) });
    }
    if mode == PredictionMode::Corrected && alpha > 1 {
        return Err(Error::InvalidParameter { name: "alpha", reason: "corrected prediction needs alpha = 1".into() });
    }
    let scale = eps.powi(DIMENSION);
    let mats = setup.kernel_matrices(mode)?;
    Ok(match mode {
        PredictionMode::Published => -scale * mats.iter().map(|k| (0..k.ncols()).map(|l| k[(j, l)]).sum::<C64>()).sum::<C64>(),
        PredictionMode::Corrected => -scale * mats.iter().map(|k| k[(j, j)]).sum::<C64>(),
    })
}

/// The `α` candidates `λ + R^{1/α} e^{2πik/α}`.
pub fn alpha_roots(lambda: C64, alpha: usize, r: C64) -> Vec<C64> {
    let a = alpha.max(1) as f64;
    let base = r.powf(1.0 / a);
    (0..alpha.max(1))
        .map(|k| lambda + base * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / a))
        .collect()
}

/// Branch set for the `j`-th eigenfunction.
pub fn predict_shift_general(setup: &PerturbationSetup, alpha: usize, j: usize, eps: f64, mode: PredictionMode) -> Result<Vec<C64>> {
    Ok(alpha_roots(setup.lambda, alpha, shift_power(setup, alpha, j, eps, mode)?))
}

/// Comparison of `(T − T_ε) f` with its predicted leading term on `∂Ω`.
#[derive(Debug, Clone)]
pub struct ExpansionReport {
    pub epsilon: f64,
    pub mode: PredictionMode,
    pub lhs: Vec<C64>,
    pub rhs: Vec<C64>,
    /// `max |lhs − rhs|`.
    pub residual: f64,
    pub lhs_norm: f64,
}

/// Predicted `(T − T_ε)f` at `ω` for the scene's inclusions.
pub fn expansion_rhs(scene: &Scene, grid: &BoundaryGrid, omega: C64, f: &[C64], mode: PredictionMode, n_pol: usize) -> Result<Vec<C64>> {
    let g1 = scene.gamma1;
    let eps2 = scene.epsilon.powi(DIMENSION);
    let dtn = dtn_homogeneous(grid, omega, g1)?;
    let field = InteriorSolution::from_dtn(grid, f, &dtn, g1);
    let terms = inclusion_terms(scene, mode, n_pol)?;
    let n = grid.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    match mode {
        PredictionMode::Published => {
            let ker = exterior_kernel(omega, scene.gamma2);
            for term in &terms {
                let mg = term.tensor.apply(field.gradient(term.center)?);
                for (k, o) in out.iter_mut().enumerate() {
                    let gy = green_gradient_y(&ker, grid.nodes[k], term.center)?;
                    *o -= eps2 * term.contrast * (mg[0] * gy[0] + mg[1] * gy[1]);
                }
            }
        }
        PredictionMode::Corrected => {
            // (T − T_ε) f = −γ1 S (N_ε − N) f
            let k1 = omega / g1.sqrt();
            let mut dn = vec![C64::new(0.0, 0.0); n];
            for term in &terms {
                let a = term.tensor.apply(field.gradient(term.center)?);
                let mut gz = vec![C64::new(0.0, 0.0); n];
                let mut hz = vec![C64::new(0.0, 0.0); n];
                for k in 0..n {
                    let x = grid.nodes[k];
                    let nu = grid.normals[k];
                    let (g, h) = kernel_derivatives(k1, [x[0] - term.center[0], x[1] - term.center[1]]);
                    // G1 = Φ/γ1
                    gz[k] = (g[0] * a[0] + g[1] * a[1]) / g1;
                    hz[k] = ((h[0][0] * nu[0] + h[0][1] * nu[1]) * a[0] + (h[1][0] * nu[0] + h[1][1] * nu[1]) * a[1]) / g1;
                }
                let ng = dtn.apply(&gz);
                for k in 0..n {
                    dn[k] -= eps2 * term.contrast * (hz[k] - ng[k]);
                }
            }
            let s = assemble_layers(grid, grid, &exterior_kernel(omega, scene.gamma2), Want { single: true, ..Want::default() }).s.unwrap();
            let sdn = mat_vec(s.as_ref(), &dn);
            for (o, v) in out.iter_mut().zip(sdn) {
                *o = -g1 * v;
            }
        }
    }
    Ok(out)
}

pub fn verify_expansion_fprop1(
    scene: &Scene,
    grids: &SceneGrids,
    omega: C64,
    f: &[C64],
    mode: PredictionMode,
    jump: JumpMode,
    n_pol: usize,
) -> Result<ExpansionReport> {
    let g = &grids.outer;
    let t = assemble_t(g, omega, scene.gamma1, scene.gamma2, jump)?;
    let te = assemble_t_eps(scene, grids, omega, jump)?;
    let lhs: Vec<C64> = t.apply(f).iter().zip(te.apply(f)).map(|(a, b)| a - b).collect();
    let rhs = expansion_rhs(scene, g, omega, f, mode, n_pol)?;
    let residual = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let lhs_norm = lhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(ExpansionReport { epsilon: scene.epsilon, mode, lhs, rhs, residual, lhs_norm })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// `max_j ‖T*(λ) u^{j*}‖ / ‖T*(λ)‖_F`-style residual used to check the dual basis.
pub fn dual_residual(dual: &DualBasis, grid: &BoundaryGrid, lambda: C64, gamma1: f64, gamma2: f64, mode: JumpMode) -> Result<f64> {
    let ts = assemble_t_dual(grid, lambda, gamma1, gamma2, mode)?;
    let norm = crate::linalg::singular_values(ts.matrix.as_ref())?[0];
    let mut worst = 0.0f64;
    for j in 0..dual.vectors.ncols() {
        let v: Vec<C64> = (0..dual.vectors.nrows()).map(|i| dual.vectors[(i, j)]).collect();
        let r = ts.apply(&v);
        worst = worst.max(vec_norm(&r) / (norm * vec_norm(&v)));
    }
    Ok(worst)
}
