//! Invariant suite run by `resbem validate` on the bundled disk scene.

use crate::oracle::disk_dispersion_oracle;
use crate::output::Check;
use num_complex::Complex64 as C64;
use resbem::asymptotics::{dual_basis, dual_residual};
use resbem::geometry::{build_grid, ParametricCurve};
use resbem::linalg::{inverse, CMat};
use resbem::nep::{find_resonances, ContourSpec, LinearFamily, Rectangle, SolverOptions};
use resbem::polarization::compute_polarization;
use resbem::potentials::{assemble_double_layer, calderon_residual};
use resbem::specfun::{flux_residual, Kernel};
use resbem::transfer::{exterior_kernel, JumpMode, TransferFamily};
use resbem::Result;
use std::f64::consts::PI;

pub const GAMMA1: f64 = 2.0;
pub const GAMMA2: f64 = 1.0;
pub const N_ASSEMBLY: usize = 256;
pub const N_POLARIZATION: usize = 128;

/// `T(z) = P diag(eigs) P⁻¹ − z I` with a fixed, well-conditioned `P`.
pub fn synthetic_family(eigs: &[C64]) -> Result<LinearFamily> {
    let n = eigs.len();
    let p = CMat::from_fn(n, n, |i, j| {
        C64::new(if i == j { 2.0 } else { 0.0 } + 0.3 * ((i * 3 + j) as f64).sin(), 0.2 * ((i + 2 * j) as f64).cos())
    });
    let pinv = inverse(p.as_ref())?;
    let d = CMat::from_fn(n, n, |i, j| if i == j { eigs[i] } else { C64::new(0.0, 0.0) });
    Ok(LinearFamily { b: &p * &d * &pinv })
}

pub fn synthetic_eigenvalues() -> Vec<C64> {
    vec![
        C64::new(0.3, 0.2),
        C64::new(-0.4, 0.1),
        C64::new(0.1, -0.5),
        C64::new(2.0, 0.3),
        C64::new(-1.8, -1.1),
        C64::new(0.2, 2.4),
    ]
}

pub fn disk_family(n: usize) -> Result<TransferFamily> {
    Ok(TransferFamily { grid: build_grid(&ParametricCurve::circle(1.0), n)?, gamma1: GAMMA1, gamma2: GAMMA2, mode: JumpMode::Derived })
}

fn oracle_root(m: u32, near: C64) -> Result<C64> {
    let rect = Rectangle { re: [near.re - 0.2, near.re + 0.2], im: [near.im - 0.2, near.im + 0.2] };
    let roots = disk_dispersion_oracle(GAMMA1, GAMMA2, 1.0, m, &rect)?;
    Ok(roots.first().map_or(C64::new(f64::NAN, f64::NAN), |r| r.omega))
}

pub fn run_suite(opts: &SolverOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let disk = build_grid(&ParametricCurve::circle(1.0), N_ASSEMBLY)?;

    let d = assemble_double_layer(&disk, &disk, &Kernel::laplace(1.0));
    let g = d.apply(&vec![C64::new(1.0, 0.0); N_ASSEMBLY]).iter().map(|v| (v + 0.5).norm()).fold(0.0, f64::max);
    out.push(Check::below("gauss_identity", N_ASSEMBLY, g, 1e-10));

    let w = C64::new(1.5, 0.0);
    let cal = calderon_residual(&disk, &exterior_kernel(w, GAMMA2)).max(calderon_residual(&disk, &Kernel::helmholtz(w, GAMMA1)));
    out.push(Check::below("calderon_residual", N_ASSEMBLY, cal, 1e-8));

    let kernels = [
        Kernel::laplace(GAMMA1),
        Kernel::helmholtz(C64::new(1.5, -0.2), GAMMA1),
        Kernel::helmholtz(C64::new(1.5, -0.2), GAMMA2),
        Kernel::anisotropic(C64::new(1.5, -0.2), [[3.0, 0.5], [0.5, 2.0]])?,
    ];
    let mut flux = 0.0f64;
    for k in &kernels {
        flux = flux.max(flux_residual(k, [0.1, -0.2], 1e-3, 512)?);
    }
    out.push(Check::below("flux_normalization", 512, flux, 1e-10));

    let pg = build_grid(&ParametricCurve::circle(1.0), N_POLARIZATION)?;
    let p = compute_polarization(&pg, 1.0, 3.0)?;
    let e = 1.5 * PI;
    let err = (p.m[0][0] - e).abs().max((p.m[1][1] - e).abs()).max(p.m[0][1].abs()).max(p.m[1][0].abs());
    out.push(Check::below("polarization_disk", N_POLARIZATION, err, 1e-8));
    let z = compute_polarization(&pg, 2.0, 2.0)?;
    let err = (z.m[0][0] - PI).abs().max((z.m[1][1] - PI).abs()).max(z.m[0][1].abs());
    out.push(Check::below("polarization_zero_contrast", N_POLARIZATION, err, 1e-13));

    let eigs = synthetic_eigenvalues();
    let fam = synthetic_family(&eigs)?;
    let generic = SolverOptions { lower_half_plane: false, ..*opts };
    let rep = find_resonances(&fam, &ContourSpec::new(C64::new(0.0, 0.0), 1.0), &generic)?;
    let inside: Vec<C64> = eigs.iter().copied().filter(|z| z.norm() < 1.0).collect();
    let err = if rep.results.len() == inside.len() {
        inside.iter().map(|z| rep.results.iter().map(|r| (r.lambda - z).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    out.push(Check::below("synthetic_eigenvalues", eigs.len(), err, 1e-10));

    let fam = disk_family(N_ASSEMBLY)?;
    let r0 = oracle_root(0, C64::new(5.42, -1.25))?;
    let rep = find_resonances(&fam, &ContourSpec::new(r0 + C64::new(0.05, 0.03), 0.25), opts)?;
    let err = match rep.results.as_slice() {
        [r] => (r.lambda - r0).norm() / r0.norm(),
        _ => f64::INFINITY,
    };
    out.push(Check::below("disk_simple_resonance", N_ASSEMBLY, err, 1e-6));

    let r1 = oracle_root(1, C64::new(2.82, -1.6))?;
    let rep = find_resonances(&fam, &ContourSpec::new(r1 - C64::new(0.04, 0.02), 0.25), opts)?;
    match rep.results.as_slice() {
        [r] => {
            out.push(Check::below("disk_double_resonance", N_ASSEMBLY, (r.lambda - r1).norm() / r1.norm(), 1e-6));
            out.push(Check::below("double_multiplicity", N_ASSEMBLY, (r.m_geo as f64 - 2.0).abs(), 0.5));
            let dual = dual_basis(&r.null_vectors, &fam.grid, r.lambda, GAMMA2)?;
            out.push(Check::below("dual_biorthogonality", N_ASSEMBLY, dual.biorthogonality_error(&r.null_vectors, &fam.grid.arc_weights()), 1e-8));
            out.push(Check::below("dual_residual", N_ASSEMBLY, dual_residual(&dual, &fam.grid, r.lambda, GAMMA1, GAMMA2, fam.mode)?, 1e-6));
        }
        _ => out.push(Check::below("disk_double_resonance", N_ASSEMBLY, f64::INFINITY, 1e-6)),
    }
    Ok(out)
}
