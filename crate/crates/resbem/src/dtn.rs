//! Interior Dirichlet-to-Neumann maps, with and without inclusions.

use crate::error::{Error, Result};
use crate::geometry::{build_grid, BoundaryGrid, Scene};
use crate::linalg::{identity, mat_vec, CMat, Lu};
use crate::potentials::{assemble_layers, Want};
use crate::specfun::Kernel;
use faer::Mat;
use num_complex::Complex64 as C64;

/// Below this smallest singular value the interior system counts as singular.
pub const NEAR_SINGULAR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtnVariant {
    Homogeneous,
    Perturbed,
}

/// Discrete map `f ↦ ∂_ν v` on the outer grid.
#[derive(Debug, Clone)]
pub struct DtnMap {
    pub matrix: CMat,
    pub omega: C64,
    pub variant: DtnVariant,
    /// Estimated smallest singular value of the system that was solved.
    pub sigma_min: f64,
}

impl DtnMap {
    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        mat_vec(self.matrix.as_ref(), f)
    }
}

/// Grids of the outer boundary and of every scaled inclusion `z_i + εB_i`.
#[derive(Debug, Clone)]
pub struct SceneGrids {
    pub outer: BoundaryGrid,
    pub inclusions: Vec<BoundaryGrid>,
}

impl SceneGrids {
    /// Inclusion grids are only built for `ε > 0`.
    pub fn new(scene: &Scene, n_outer: usize, n_inclusion: usize) -> Result<Self> {
        let outer = build_grid(&scene.outer, n_outer)?;
        let mut inclusions = Vec::new();
        if scene.epsilon > 0.0 {
            for inc in &scene.inclusions {
                inclusions.push(build_grid(&inc.placed(scene.epsilon), n_inclusion)?);
            }
        }
        Ok(Self { outer, inclusions })
    }
}

/// Standard kernel `(i/4) H0(k1 r)` of the interior medium.
pub(crate) fn interior_kernel(omega: C64, gamma1: f64) -> Kernel {
    Kernel::helmholtz(omega / gamma1.sqrt(), 1.0)
}

fn check_sigma(lu: &Lu) -> Result<f64> {
    let (sigma, _, _) = lu.smallest_singular(8);
    if sigma < NEAR_SINGULAR {
        return Err(Error::NearSingularSystem { sigma_min: sigma });
    }
    Ok(sigma)
}

/// Solves `S q = (½I + K) f` with the interior kernel, where `S`, `K` are the
/// single and double layer on `∂Ω`.
pub fn dtn_homogeneous(grid: &BoundaryGrid, omega: C64, gamma1: f64) -> Result<DtnMap> {
    let ker = interior_kernel(omega, gamma1);
    let l = assemble_layers(grid, grid, &ker, Want::SD);
    let (s, d) = (l.s.unwrap(), l.d.unwrap());
    let lu = Lu::new(s.as_ref())?;
    let sigma_min = check_sigma(&lu)?;
    let mut rhs = d;
    for i in 0..rhs.nrows() {
        rhs[(i, i)] += 0.5;
    }
    lu.solve_in_place(&mut rhs);
    Ok(DtnMap { matrix: rhs, omega, variant: DtnVariant::Homogeneous, sigma_min })
}

/// DtN map of `∇·γ_ε∇v + ω²v = 0` in `Ω` with the inclusions of `scene`.
///
/// Unknowns: `∂_ν v` on `∂Ω`, and per inclusion the trace `u_i` and the outer
/// normal derivative `q_i` on `∂D_i`. Equations: the Green representation in
/// `Ω \ ∪D_i` traced on `∂Ω` and on each `∂D_i`, and the anisotropic Green
/// representation inside `D_i`, coupled by `ν·γ_D∇v⁻ = γ1 q_i`.
pub fn dtn_perturbed(scene: &Scene, grids: &SceneGrids, omega: C64) -> Result<DtnMap> {
    if scene.epsilon == 0.0 || scene.inclusions.is_empty() {
        let mut m = dtn_homogeneous(&grids.outer, omega, scene.gamma1)?;
        m.variant = DtnVariant::Perturbed;
        return Ok(m);
    }
    if grids.inclusions.len() != scene.inclusions.len() {
        return Err(Error::InvalidParameter { name: "grids", reason: "inclusion grid count mismatch".into() });
    }
    let g1 = scene.gamma1;
    let ker = interior_kernel(omega, g1);
    let outer = &grids.outer;
    let n0 = outer.len();
    let sizes: Vec<usize> = grids.inclusions.iter().map(|g| g.len()).collect();
    let mut offsets = Vec::new();
    let mut tot = n0;
    for &n in &sizes {
        offsets.push(tot);
        tot += 2 * n;
    }
    let mut a = Mat::<C64>::zeros(tot, tot);
    let mut b = Mat::<C64>::zeros(tot, n0);
    let put = |a: &mut CMat, r0: usize, c0: usize, m: &CMat, scale: f64| {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                a[(r0 + i, c0 + j)] += m[(i, j)] * scale;
            }
        }
    };

    let oo = assemble_layers(outer, outer, &ker, Want::SD);
    put(&mut a, 0, 0, oo.s.as_ref().unwrap(), 1.0);
    put(&mut b, 0, 0, oo.d.as_ref().unwrap(), 1.0);
    for i in 0..n0 {
        b[(i, i)] += 0.5;
    }
    for (i, gi) in grids.inclusions.iter().enumerate() {
        let (oi, ni) = (offsets[i], sizes[i]);
        // inclusion sources on the outer boundary
        let io = assemble_layers(gi, outer, &ker, Want::SD);
        put(&mut a, 0, oi, io.d.as_ref().unwrap(), 1.0);
        put(&mut a, 0, oi + ni, io.s.as_ref().unwrap(), -1.0);
        // outer sources on the inclusion
        let oi_l = assemble_layers(outer, gi, &ker, Want::SD);
        put(&mut a, oi, 0, oi_l.s.as_ref().unwrap(), 1.0);
        put(&mut b, oi, 0, oi_l.d.as_ref().unwrap(), 1.0);
        for (l, gl) in grids.inclusions.iter().enumerate() {
            let (ol, nl) = (offsets[l], sizes[l]);
            let li = assemble_layers(gl, gi, &ker, Want::SD);
            put(&mut a, oi, ol, li.d.as_ref().unwrap(), 1.0);
            put(&mut a, oi, ol + nl, li.s.as_ref().unwrap(), -1.0);
        }
        for k in 0..ni {
            a[(oi + k, oi + k)] -= 0.5;
        }
        // interior of the inclusion
        let ak = Kernel::anisotropic(omega, scene.inclusions[i].gamma_d)?;
        let ii = assemble_layers(gi, gi, &ak, Want::SD);
        put(&mut a, oi + ni, oi, ii.d.as_ref().unwrap(), -1.0);
        put(&mut a, oi + ni, oi + ni, ii.s.as_ref().unwrap(), g1);
        for k in 0..ni {
            a[(oi + ni + k, oi + k)] -= 0.5;
        }
    }
    let lu = Lu::new(a.as_ref())?;
    let sigma_min = check_sigma(&lu)?;
    lu.solve_in_place(&mut b);
    let matrix = Mat::from_fn(n0, n0, |i, j| b[(i, j)]);
    Ok(DtnMap { matrix, omega, variant: DtnVariant::Perturbed, sigma_min })
}

/// `½I` helper used by operator assembly elsewhere.
pub(crate) fn half_identity(n: usize) -> CMat {
    let mut m = identity(n);
    for i in 0..n {
        m[(i, i)] = C64::new(0.5, 0.0);
    }
    m
}
