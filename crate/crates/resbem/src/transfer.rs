//! Transfer operators `T(ω)`, `T_ε(ω)` and the dual `T*(ω)` on the outer grid.
//!
//! `T(ω) = c I − γ2 D^ω + γ1 S^ω N^ω`, where `S^ω`, `D^ω` use the exterior
//! kernel `(i/(4γ2)) H0(ω|x−y|/√γ2)` and `N^ω` is the interior DtN map.
//! Tracing the exterior Green representation onto `∂Ω` with the jump
//! conventions of [`crate::potentials`] gives `c = 1/2`.

use crate::dtn::{dtn_homogeneous, dtn_perturbed, half_identity, SceneGrids};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryGrid, Scene};
use crate::linalg::{mat_vec, CMat};
use crate::nep::OperatorFamily;
use crate::potentials::{assemble_layers, Want};
use crate::specfun::Kernel;
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Identity coefficient obtained from the trace of the exterior representation.
pub const DERIVED_JUMP: f64 = 0.5;

/// Which identity coefficient to use in `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpMode {
    /// `1 − γ2/2`, as printed.
    Paper,
    /// `1/2`, consistent with the normalized kernel.
    #[default]
    Derived,
}

impl JumpMode {
    pub fn coefficient(self, gamma2: f64) -> f64 {
        match self {
            JumpMode::Paper => 1.0 - gamma2 / 2.0,
            JumpMode::Derived => DERIVED_JUMP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferVariant {
    Unperturbed,
    Perturbed,
    Dual,
}

#[derive(Debug, Clone)]
pub struct TransferOperator {
    pub matrix: CMat,
    pub omega: C64,
    pub variant: TransferVariant,
    pub mode: JumpMode,
}

impl TransferOperator {
    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        mat_vec(self.matrix.as_ref(), f)
    }
}

/// The pieces of `T(ω)`: exterior `S^ω`, `D^ω` and the interior DtN `N^ω`.
#[derive(Debug, Clone)]
pub struct TransferParts {
    pub s: CMat,
    pub d: CMat,
    pub n: CMat,
}

pub fn exterior_kernel(omega: C64, gamma2: f64) -> Kernel {
    Kernel::helmholtz(omega, gamma2)
}

fn check_material(gamma1: f64, gamma2: f64) -> Result<()> {
    for (name, g) in [("gamma1", gamma1), ("gamma2", gamma2)] {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameter { name, reason: format!("must be positive, got {g}") });
        }
    }
    Ok(())
}

pub fn transfer_parts(grid: &BoundaryGrid, omega: C64, gamma1: f64, gamma2: f64) -> Result<TransferParts> {
    check_material(gamma1, gamma2)?;
    let n = dtn_homogeneous(grid, omega, gamma1)?.matrix;
    let l = assemble_layers(grid, grid, &exterior_kernel(omega, gamma2), Want::SD);
    Ok(TransferParts { s: l.s.unwrap(), d: l.d.unwrap(), n })
}

/// `c I − γ2 D + γ1 S N`.
fn combine(c: f64, parts: &TransferParts, gamma1: f64, gamma2: f64) -> CMat {
    let sn = &parts.s * &parts.n;
    let len = parts.d.nrows();
    Mat::from_fn(len, len, |i, j| {
        let id = if i == j { c } else { 0.0 };
        C64::new(id, 0.0) - parts.d[(i, j)] * gamma2 + sn[(i, j)] * gamma1
    })
}

pub fn assemble_t(grid: &BoundaryGrid, omega: C64, gamma1: f64, gamma2: f64, mode: JumpMode) -> Result<TransferOperator> {
    let parts = transfer_parts(grid, omega, gamma1, gamma2)?;
    let matrix = combine(mode.coefficient(gamma2), &parts, gamma1, gamma2);
    Ok(TransferOperator { matrix, omega, variant: TransferVariant::Unperturbed, mode })
}

/// `T_ε(ω)`: as [`assemble_t`] with the DtN map of the medium with inclusions.
pub fn assemble_t_eps(scene: &Scene, grids: &SceneGrids, omega: C64, mode: JumpMode) -> Result<TransferOperator> {
    check_material(scene.gamma1, scene.gamma2)?;
    let n = dtn_perturbed(scene, grids, omega)?.matrix;
    let l = assemble_layers(&grids.outer, &grids.outer, &exterior_kernel(omega, scene.gamma2), Want::SD);
    let parts = TransferParts { s: l.s.unwrap(), d: l.d.unwrap(), n };
    let matrix = combine(mode.coefficient(scene.gamma2), &parts, scene.gamma1, scene.gamma2);
    Ok(TransferOperator { matrix, omega, variant: TransferVariant::Perturbed, mode })
}

/// `T*(ω) = c I − γ2 (D^ω)* + γ1 N^{ω̄} S^{−ω̄}`, the adjoint in the weighted
/// `L²(∂Ω)` product.
///
/// `(D^ω)*` is the conjugated `∂_{ν_x}G^ω` operator and `S^{−ω̄}` is taken as
/// the `L²` adjoint of `S^ω` (its kernel is `conj G^ω`), which keeps the
/// Hankel function on its principal branch. `N^{ω̄}` is solved directly.
pub fn assemble_t_dual(grid: &BoundaryGrid, omega: C64, gamma1: f64, gamma2: f64, mode: JumpMode) -> Result<TransferOperator> {
    check_material(gamma1, gamma2)?;
    let n_bar = dtn_homogeneous(grid, omega.conj(), gamma1)?.matrix;
    Ok(dual_from(grid, omega, gamma1, gamma2, &n_bar, mode))
}

/// `T_ε*(ω)`: as [`assemble_t_dual`] with `N_ε^{ω̄}`.
pub fn assemble_t_eps_dual(scene: &Scene, grids: &SceneGrids, omega: C64, mode: JumpMode) -> Result<TransferOperator> {
    check_material(scene.gamma1, scene.gamma2)?;
    let n_bar = dtn_perturbed(scene, grids, omega.conj())?.matrix;
    Ok(dual_from(&grids.outer, omega, scene.gamma1, scene.gamma2, &n_bar, mode))
}

fn dual_from(grid: &BoundaryGrid, omega: C64, gamma1: f64, gamma2: f64, n_bar: &CMat, mode: JumpMode) -> TransferOperator {
    let l = assemble_layers(grid, grid, &exterior_kernel(omega, gamma2), Want { single: true, double: false, adjoint: true });
    let conj = |m: &CMat| Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].conj());
    let s_star = conj(l.s.as_ref().unwrap());
    let d_star = conj(l.kp.as_ref().unwrap());
    let ns = n_bar * &s_star;
    let c = mode.coefficient(gamma2);
    let len = grid.len();
    let matrix = Mat::from_fn(len, len, |i, j| {
        let id = if i == j { c } else { 0.0 };
        C64::new(id, 0.0) - d_star[(i, j)] * gamma2 + ns[(i, j)] * gamma1
    });
    TransferOperator { matrix, omega, variant: TransferVariant::Dual, mode }
}

/// Difference of the two jump modes: `(1 − γ2/2 − 1/2) I`.
pub fn mode_offset(gamma2: f64) -> f64 {
    JumpMode::Paper.coefficient(gamma2) - JumpMode::Derived.coefficient(gamma2)
}

/// Discrete `H^s` norm on the parameter circle,
/// `‖f‖² = 2π Σ_m (1 + m²)^s |f̂_m|²`.
pub fn sobolev_norm(f: &[C64], s: f64) -> f64 {
    let n = f.len();
    if n == 0 {
        return 0.0;
    }
    let h = n as i64 / 2;
    let mut acc = 0.0;
    for m in -h..(n as i64 - h) {
        let mut c = C64::new(0.0, 0.0);
        for (k, v) in f.iter().enumerate() {
            let t = 2.0 * PI * k as f64 / n as f64;
            c += v * C64::from_polar(1.0, -(m as f64) * t);
        }
        c /= n as f64;
        acc += (1.0 + (m * m) as f64).powf(s) * c.norm_sqr();
    }
    (2.0 * PI * acc).sqrt()
}

/// `ω ↦ T(ω)` for the medium without inclusions.
#[derive(Debug, Clone)]
pub struct TransferFamily {
    pub grid: BoundaryGrid,
    pub gamma1: f64,
    pub gamma2: f64,
    pub mode: JumpMode,
}

impl OperatorFamily for TransferFamily {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn eval(&self, z: C64) -> Result<CMat> {
        Ok(assemble_t(&self.grid, z, self.gamma1, self.gamma2, self.mode)?.matrix)
    }

    fn weights(&self) -> Vec<f64> {
        self.grid.arc_weights()
    }
}

/// `ω ↦ T_ε(ω)` for a fixed scene.
#[derive(Debug, Clone)]
pub struct PerturbedFamily {
    pub scene: Scene,
    pub grids: SceneGrids,
    pub mode: JumpMode,
}

impl PerturbedFamily {
    pub fn new(scene: Scene, n_outer: usize, n_inclusion: usize, mode: JumpMode) -> Result<Self> {
        let grids = SceneGrids::new(&scene, n_outer, n_inclusion)?;
        Ok(Self { scene, grids, mode })
    }
}

impl OperatorFamily for PerturbedFamily {
    fn dim(&self) -> usize {
        self.grids.outer.len()
    }

    fn eval(&self, z: C64) -> Result<CMat> {
        Ok(assemble_t_eps(&self.scene, &self.grids, z, self.mode)?.matrix)
    }

    fn weights(&self) -> Vec<f64> {
        self.grids.outer.arc_weights()
    }
}

/// `½ I` on the outer grid; handy when forming trace combinations.
pub fn half(grid: &BoundaryGrid) -> CMat {
    half_identity(grid.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, InclusionSpec, ParametricCurve};
    use crate::linalg::{inner, max_abs, weighted_adjoint, Lu};
    use crate::specfun::{besselj, besselj_derivative, hankel1, hankel1_derivative};

    fn disk(n: usize) -> BoundaryGrid {
        build_grid(&ParametricCurve::circle(1.0), n).unwrap()
    }

    fn mode(g: &BoundaryGrid, m: i32) -> Vec<C64> {
        g.t.iter().map(|&t| C64::from_polar(1.0, m as f64 * t)).collect()
    }

    fn dispersion(m: u32, w: C64, g1: f64, g2: f64) -> C64 {
        let (k1, k2) = (w / g1.sqrt(), w / g2.sqrt());
        k1 * g1 * besselj_derivative(m, k1).unwrap() * hankel1(m, k2).unwrap()
            - k2 * g2 * besselj(m, k1).unwrap() * hankel1_derivative(m, k2).unwrap()
    }

    #[test]
    fn disk_symbol_matches_separation_of_variables() {
        // on the unit circle T acts on e^{imθ} by iπ J_m(k2) f_m / (2 γ2 J_m(k1))
        let g = disk(64);
        let (g1, g2) = (2.0, 1.0);
        let w = C64::new(1.7, -0.3);
        let t = assemble_t(&g, w, g1, g2, JumpMode::Derived).unwrap();
        for m in 0..5u32 {
            let k1 = w / g1.sqrt();
            let k2 = w / g2.sqrt();
            let sym = C64::new(0.0, PI) * besselj(m, k2).unwrap() * dispersion(m, w, g1, g2)
                / (2.0 * g2 * besselj(m, k1).unwrap());
            let f = mode(&g, m as i32);
            let e = t.apply(&f).iter().zip(&f).map(|(a, b)| (a - sym * b).norm()).fold(0.0, f64::max);
            assert!(e < 1e-9, "m={m} err={e:e}");
        }
    }

    #[test]
    fn modes_differ_by_identity_shift() {
        let g = disk(32);
        let w = C64::new(1.2, -0.1);
        let a = assemble_t(&g, w, 2.0, 1.5, JumpMode::Paper).unwrap();
        let b = assemble_t(&g, w, 2.0, 1.5, JumpMode::Derived).unwrap();
        let off = mode_offset(1.5);
        let diff = Mat::from_fn(32, 32, |i, j| a.matrix[(i, j)] - b.matrix[(i, j)] - if i == j { off } else { 0.0 });
        assert!(max_abs(diff.as_ref()) < 1e-15);
    }

    #[test]
    fn dual_is_weighted_adjoint() {
        let g = disk(64);
        let w = C64::new(1.5, -0.4);
        let t = assemble_t(&g, w, 2.0, 1.0, JumpMode::Derived).unwrap();
        let ts = assemble_t_dual(&g, w, 2.0, 1.0, JumpMode::Derived).unwrap();
        let wts = g.arc_weights();
        let adj = weighted_adjoint(t.matrix.as_ref(), &wts);
        let diff = Mat::from_fn(64, 64, |i, j| adj[(i, j)] - ts.matrix[(i, j)]);
        assert!(max_abs(diff.as_ref()) < 1e-8, "{:e}", max_abs(diff.as_ref()));
        let f: Vec<C64> = g.t.iter().map(|t| C64::new(t.cos().exp(), (2.0 * t).sin())).collect();
        let h: Vec<C64> = g.t.iter().map(|t| C64::new((3.0 * t).cos(), 1.0 + t.sin().powi(2))).collect();
        let lhs = inner(&t.apply(&f), &h, &wts);
        let rhs = inner(&f, &ts.apply(&h), &wts);
        assert!((lhs - rhs).norm() < 1e-9 * lhs.norm().max(1.0));
    }

    #[test]
    fn far_from_resonance_is_well_conditioned() {
        let g = disk(128);
        let t = assemble_t(&g, C64::new(1.0, 0.0), 2.0, 1.0, JumpMode::Derived).unwrap();
        let (s, _, _) = Lu::new(t.matrix.as_ref()).unwrap().smallest_singular(30);
        assert!(s > 1e-2, "{s}");
    }

    #[test]
    fn perturbed_identities() {
        let scene = Scene {
            outer: ParametricCurve::circle(1.0),
            gamma1: 2.0,
            gamma2: 1.0,
            inclusions: vec![InclusionSpec {
                center: [0.3, 0.0],
                shape: ParametricCurve::circle(1.0),
                gamma_d: [[3.0, 0.0], [0.0, 3.0]],
            }],
            epsilon: 0.1,
        };
        let w = C64::new(1.5, -0.2);
        let grids = SceneGrids::new(&scene, 64, 32).unwrap();
        let te = assemble_t_eps(&scene, &grids, w, JumpMode::Derived).unwrap();
        let parts = transfer_parts(&grids.outer, w, 2.0, 1.0).unwrap();
        let t = combine(0.5, &parts, 2.0, 1.0);
        let ne = dtn_perturbed(&scene, &grids, w).unwrap().matrix;
        let dn = Mat::from_fn(64, 64, |i, j| ne[(i, j)] - parts.n[(i, j)]);
        let sd = &parts.s * &dn;
        let diff = Mat::from_fn(64, 64, |i, j| te.matrix[(i, j)] - t[(i, j)] - sd[(i, j)] * 2.0);
        assert!(max_abs(diff.as_ref()) < 1e-13, "{:e}", max_abs(diff.as_ref()));

        let mut s0 = scene.clone();
        s0.epsilon = 0.0;
        let g0 = SceneGrids::new(&s0, 64, 32).unwrap();
        let t0 = assemble_t_eps(&s0, &g0, w, JumpMode::Derived).unwrap();
        let d0 = Mat::from_fn(64, 64, |i, j| t0.matrix[(i, j)] - t[(i, j)]);
        assert!(max_abs(d0.as_ref()) < 1e-12);
    }

    fn disk_symbol(m: u32, w: C64, g1: f64, g2: f64) -> C64 {
        let (k1, k2) = (w / g1.sqrt(), w / g2.sqrt());
        C64::new(0.0, PI) * besselj(m, k2).unwrap() * dispersion(m, w, g1, g2) / (2.0 * g2 * besselj(m, k1).unwrap())
    }

    #[test]
    fn difference_of_frequencies_is_compact() {
        // on the disk T(ω) − T(ω0) is diagonal in Fourier modes; its singular
        // values are the sorted symbol differences, which decay like m^-2
        let n = 256;
        let g = disk(n);
        let (w, w0) = (C64::new(1.5, -0.2), C64::new(0.5, 0.0));
        let a = assemble_t(&g, w, 2.0, 1.0, JumpMode::Derived).unwrap();
        let b = assemble_t(&g, w0, 2.0, 1.0, JumpMode::Derived).unwrap();
        let d = Mat::from_fn(n, n, |i, j| a.matrix[(i, j)] - b.matrix[(i, j)]);
        let delta = |m: u32| disk_symbol(m, w, 2.0, 1.0) - disk_symbol(m, w0, 2.0, 1.0);
        for m in 0..=64u32 {
            let f = mode(&g, m as i32);
            let df = crate::linalg::mat_vec(d.as_ref(), &f);
            let e = df.iter().zip(&f).map(|(x, y)| (x - delta(m) * y).norm()).fold(0.0, f64::max);
            assert!(e < 1e-9, "m={m} {e:e}");
        }
        // algebraic decay m^-2
        let r = delta(64).norm() * 64.0 * 64.0 / (delta(16).norm() * 16.0 * 16.0);
        assert!(r > 0.5 && r < 2.0, "{r}");
        let sv = crate::linalg::singular_values(d.as_ref()).unwrap();
        assert!(sv[n / 2] < 1e-3 * sv[0]);
    }

    #[test]
    fn sobolev_norm_of_modes() {
        let f: Vec<C64> = (0..32).map(|k| C64::from_polar(1.0, 3.0 * 2.0 * PI * k as f64 / 32.0)).collect();
        let n = sobolev_norm(&f, 0.5);
        assert!((n - (2.0 * PI * 10f64.sqrt()).sqrt()).abs() < 1e-12);
        assert!((sobolev_norm(&f, 0.0) - (2.0 * PI).sqrt()).abs() < 1e-12);
    }
}
