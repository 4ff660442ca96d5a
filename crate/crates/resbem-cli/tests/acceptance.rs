//! Acceptance suite. Prints one PASS/FAIL line per criterion (plus INFO lines
//! for the literal published formulas) and exits nonzero on any FAIL.

use num_complex::Complex64 as C64;
use resbem::asymptotics::{
    dual_basis, dual_residual, loglog_slope, predict_shift_simple, verify_expansion_fprop1, PerturbationSetup, PredictionMode,
};
use resbem::dtn::SceneGrids;
use resbem::geometry::{build_grid, InclusionSpec, ParametricCurve, Scene};
use resbem::nep::{find_in_rectangle, find_resonances, track_resonance, ContourSpec, Rectangle, ResonanceResult, SolverOptions};
use resbem::polarization::compute_polarization;
use resbem::potentials::{assemble_double_layer, calderon_residual};
use resbem::specfun::{flux_residual, Kernel};
use resbem::transfer::{
    assemble_t, assemble_t_dual, assemble_t_eps, assemble_t_eps_dual, exterior_kernel, sobolev_norm, JumpMode, PerturbedFamily,
    TransferFamily,
};
use resbem_cli::oracle::{disk_dispersion_oracle, winding_count, OracleRoot};
use resbem_cli::validate::{synthetic_eigenvalues, synthetic_family};
use std::f64::consts::PI;
use std::time::Instant;

const G1: f64 = 2.0;
const G2: f64 = 1.0;
const N: usize = 256;
const EPS4: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
const EPS3: [f64; 3] = [0.2, 0.1, 0.05];
/// Highest angular mode searched by the oracle; the winding count of the
/// next one is checked to be zero.
const MAX_MODE: u32 = 12;

struct Suite {
    failed: usize,
}

impl Suite {
    fn line(&mut self, id: &str, pass: bool, msg: String) {
        if !pass {
            self.failed += 1;
        }
        println!("{} [{id}] {msg}", if pass { "PASS" } else { "FAIL" });
    }

    fn info(&self, id: &str, msg: String) {
        println!("INFO [{id}] {msg}");
    }
}

fn family(n: usize) -> TransferFamily {
    TransferFamily { grid: build_grid(&ParametricCurve::circle(1.0), n).unwrap(), gamma1: G1, gamma2: G2, mode: JumpMode::Derived }
}

fn scene(eps: f64, gd: f64) -> Scene {
    Scene {
        outer: ParametricCurve::circle(1.0),
        gamma1: G1,
        gamma2: G2,
        inclusions: vec![InclusionSpec { center: [0.3, 0.0], shape: ParametricCurve::circle(1.0), gamma_d: [[gd, 0.0], [0.0, gd]] }],
        epsilon: eps,
    }
}

/// Oracle roots of all modes in `rect`, and whether the mode range was exhausted.
fn oracle_roots(rect: &Rectangle) -> (Vec<OracleRoot>, bool) {
    let mut out = Vec::new();
    for m in 0..=MAX_MODE {
        out.extend(disk_dispersion_oracle(G1, G2, 1.0, m, rect).unwrap());
    }
    let exhausted = winding_count(G1, G2, 1.0, MAX_MODE + 1, rect).unwrap() == 0;
    (out, exhausted)
}

/// Two-way match of computed and oracle roots, multiplicities included.
fn match_roots(found: &[ResonanceResult], oracle: &[OracleRoot]) -> (bool, f64, String) {
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for r in found {
        match oracle.iter().min_by(|a, b| (a.omega - r.lambda).norm().total_cmp(&(b.omega - r.lambda).norm())) {
            Some(o) => {
                let e = (o.omega - r.lambda).norm() / o.omega.norm();
                worst = worst.max(e);
                if r.m_geo != o.multiplicity() {
                    notes.push(format!("multiplicity {} vs {} at {}", r.m_geo, o.multiplicity(), r.lambda));
                    worst = f64::INFINITY;
                }
            }
            None => {
                notes.push(format!("spurious {}", r.lambda));
                worst = f64::INFINITY;
            }
        }
    }
    for o in oracle {
        if !found.iter().any(|r| (r.lambda - o.omega).norm() <= 1e-6 * o.omega.norm()) {
            notes.push(format!("missed {} (m={})", o.omega, o.mode));
            worst = f64::INFINITY;
        }
    }
    (worst <= 1e-6, worst, notes.join("; "))
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn main() {
    let mut s = Suite { failed: 0 };
    let opts = SolverOptions::default();
    let fam = family(N);
    let total = Instant::now();

    // 1. disk oracle match on the prescribed rectangle
    let rect = Rectangle { re: [0.5, 4.0], im: [-1.5, -0.01] };
    let t = Instant::now();
    let rep = find_in_rectangle(&fam, &rect, 1.0, 64, 8, &opts).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let (oracle, exhausted) = oracle_roots(&rect);
    let (ok, worst, notes) = match_roots(&rep.results, &oracle);
    s.line(
        "1",
        ok && exhausted && secs < 60.0,
        format!(
            "disk roots in Re[0.5,4] x Im[-1.5,-0.01], N={N}: found {}, oracle {}, max rel err {worst:.2e} (tol 1e-6), {secs:.1} s (limit 60) {notes}",
            rep.results.len(),
            oracle.len()
        ),
    );
    // the prescribed rectangle has no roots, so also match on a wider one
    let wide = Rectangle { re: [0.3, 6.0], im: [-1.75, -0.01] };
    let t = Instant::now();
    let wrep = find_in_rectangle(&fam, &wide, 1.0, 64, 8, &opts).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let (woracle, wexhausted) = oracle_roots(&wide);
    let (ok, worst, notes) = match_roots(&wrep.results, &woracle);
    s.line(
        "1b",
        ok && wexhausted && !woracle.is_empty(),
        format!(
            "disk roots in Re[0.3,6] x Im[-1.75,-0.01], N={N}: found {} (oracle {}), max rel err {worst:.2e} (tol 1e-6), {secs:.1} s {notes}",
            wrep.results.len(),
            woracle.len()
        ),
    );

    // 2. lower half-plane and mirror symmetry on a symmetric pair of circles
    let right = find_resonances(&fam, &ContourSpec::new(C64::new(1.0, -1.55), 0.6), &opts).unwrap();
    let left = find_resonances(&fam, &ContourSpec::new(C64::new(-1.0, -1.55), 0.6), &opts).unwrap();
    let all: Vec<&ResonanceResult> = right.results.iter().chain(&left.results).chain(&wrep.results).collect();
    let lower = all.iter().all(|r| r.lambda.im < 0.0);
    let mut sym = 0.0f64;
    for r in right.results.iter().chain(&left.results) {
        let m = -r.lambda.conj();
        let d = right.results.iter().chain(&left.results).map(|q| (q.lambda - m).norm()).fold(f64::INFINITY, f64::min);
        sym = sym.max(d);
    }
    let n_pair = right.results.len() + left.results.len();
    s.line(
        "2",
        lower && n_pair >= 2 && right.results.len() == left.results.len() && sym <= 1e-6,
        format!("all Im < 0: {lower}; {} + {} roots in mirrored circles, max |mirror - found| {sym:.2e} (tol 1e-6)", right.results.len(), left.results.len()),
    );

    // 3. polarization closed form, zero contrast, symmetry and definiteness
    let disk128 = build_grid(&ParametricCurve::circle(1.0), 128).unwrap();
    let p = compute_polarization(&disk128, 1.0, 3.0).unwrap();
    let e = 1.5 * PI;
    let err = (p.m[0][0] - e).abs().max((p.m[1][1] - e).abs()).max(p.m[0][1].abs()).max(p.m[1][0].abs());
    let z = compute_polarization(&disk128, 1.0, 1.0).unwrap();
    let exact = z.m == [[z.area, 0.0], [0.0, z.area]] && (z.area - PI).abs() < 1e-13;
    let mut spd = true;
    let mut worst_asym = 0.0f64;
    for curve in [ParametricCurve::circle(1.0), ParametricCurve::ellipse(2.0, 1.0).with_orientation(0.4), ParametricCurve::kite()] {
        let g = build_grid(&curve, 128).unwrap();
        for t in [0.1, 0.5, 2.0, 10.0] {
            let p = compute_polarization(&g, 1.0, t).unwrap();
            worst_asym = worst_asym.max(p.asymmetry() / p.m[0][0].abs().max(p.m[1][1].abs()));
            spd &= p.eigenvalues()[0] > 0.0;
        }
    }
    s.line(
        "3",
        err < 1e-8 && exact && spd && worst_asym < 1e-8,
        format!("disk M err {err:.2e} (tol 1e-8); zero contrast exactly pi I: {exact}; sweep SPD: {spd}, rel asymmetry {worst_asym:.2e}"),
    );

    // 4. ||(T_eps - T) f|| = O(eps^2), also for the dual
    let w = C64::new(1.5, -0.2);
    let n4 = 128;
    let mut prim = Vec::new();
    let mut dual = Vec::new();
    let base = build_grid(&ParametricCurve::circle(1.0), n4).unwrap();
    let t0 = assemble_t(&base, w, G1, G2, JumpMode::Derived).unwrap();
    let t0s = assemble_t_dual(&base, w, G1, G2, JumpMode::Derived).unwrap();
    let f: Vec<C64> = base.t.iter().map(|t| C64::new(t.cos() + 0.3, 0.5 * (2.0 * t).sin())).collect();
    let g: Vec<C64> = base.t.iter().map(|t| C64::new((3.0 * t).cos(), t.sin())).collect();
    for &eps in &EPS4 {
        let sc = scene(eps, 3.0);
        let grids = SceneGrids::new(&sc, n4, 48).unwrap();
        let te = assemble_t_eps(&sc, &grids, w, JumpMode::Derived).unwrap();
        let tes = assemble_t_eps_dual(&sc, &grids, w, JumpMode::Derived).unwrap();
        let d: Vec<C64> = te.apply(&f).iter().zip(t0.apply(&f)).map(|(a, b)| a - b).collect();
        let ds: Vec<C64> = tes.apply(&g).iter().zip(t0s.apply(&g)).map(|(a, b)| a - b).collect();
        prim.push(sobolev_norm(&d, 0.5));
        dual.push(sobolev_norm(&ds, 0.5));
    }
    let (sp, sd) = (loglog_slope(&EPS4, &prim), loglog_slope(&EPS4, &dual));
    let inr = |x: f64| (1.85..=2.15).contains(&x);
    s.line("4", inr(sp) && inr(sd), format!("H^1/2 slope of (T_eps - T)f {sp:.3}, dual {sd:.3} (range [1.85, 2.15]); norms [{}]", fmt_vec(&prim)));

    // 5. expansion remainder
    for mode in [PredictionMode::Corrected, PredictionMode::Published] {
        let mut res = Vec::new();
        for &eps in &EPS4 {
            let sc = scene(eps, 3.0);
            let grids = SceneGrids::new(&sc, n4, 48).unwrap();
            res.push(verify_expansion_fprop1(&sc, &grids, w, &f, mode, JumpMode::Derived, 64).unwrap().residual);
        }
        let slope = loglog_slope(&EPS4, &res);
        let msg = format!("max-norm remainder slope {slope:.3} (need > 2.0); residuals [{}]", fmt_vec(&res));
        match mode {
            PredictionMode::Corrected => s.line("5", slope > 2.0, msg),
            PredictionMode::Published => s.info("5-published", msg),
        }
    }

    // 6. end-to-end shift of the simple root with smallest |Im|
    let t = Instant::now();
    let target = woracle.iter().min_by(|a, b| a.omega.im.abs().total_cmp(&b.omega.im.abs())).copied();
    match target {
        Some(o) if o.multiplicity() == 1 => {
            let rep = find_resonances(&fam, &ContourSpec::new(o.omega + C64::new(0.05, 0.03), 0.25), &opts).unwrap();
            let res = &rep.results[0];
            let setup = PerturbationSetup::new(&fam, res, &scene(0.1, 3.0), 64).unwrap();
            let mut scaled = Vec::new();
            let mut errs = Vec::new();
            let mut published = Vec::new();
            for &eps in &EPS3 {
                let pred = predict_shift_simple(&setup, eps, PredictionMode::Corrected).unwrap().shift;
                let publ = predict_shift_simple(&setup, eps, PredictionMode::Published).unwrap().shift;
                let make = |e: f64| PerturbedFamily::new(scene(e, 3.0), N, 48, JumpMode::Derived);
                let track = track_resonance(make, res.lambda, 1, &[eps], &|_| pred.norm(), &opts);
                let found = track[0].outcome.as_ref().map(|v| v[0].lambda).unwrap_or(C64::new(f64::NAN, f64::NAN));
                let shift = found - res.lambda;
                errs.push((shift - pred).norm());
                scaled.push((shift - pred).norm() / (eps * eps));
                published.push((shift - publ).norm() / shift.norm());
            }
            let mono = scaled.windows(2).all(|p| p[1] < p[0]);
            let slope = loglog_slope(&EPS3, &errs);
            let secs = t.elapsed().as_secs_f64();
            s.line(
                "6",
                mono && slope > 2.0 && secs < 300.0,
                format!(
                    "lambda = {:.6}: |meas - pred|/eps^2 = [{}] decreasing: {mono}; slope {slope:.3} (need > 2.0); {secs:.1} s (limit 300)",
                    res.lambda,
                    fmt_vec(&scaled)
                ),
            );
            s.info("6-published", format!("relative error of the published prediction [{}]", fmt_vec(&published)));
        }
        other => s.line("6", false, format!("no simple oracle root available: {other:?}")),
    }

    // 7. transparent inclusion
    let rep = find_resonances(&fam, &ContourSpec::new(C64::new(5.47, -1.22), 0.25), &opts).unwrap();
    let res = &rep.results[0];
    let setup = PerturbationSetup::new(&fam, res, &scene(0.1, G1), 64).unwrap();
    let mut pred = 0.0f64;
    let mut publ = 0.0f64;
    for &eps in &EPS4 {
        pred = pred.max(predict_shift_simple(&setup, eps, PredictionMode::Corrected).unwrap().shift.norm());
        publ = publ.max(predict_shift_simple(&setup, eps, PredictionMode::Published).unwrap().shift.norm());
    }
    let make = |e: f64| PerturbedFamily::new(scene(e, G1), N, 48, JumpMode::Derived);
    let track = track_resonance(make, res.lambda, 1, &EPS4, &|_| 0.0, &opts);
    let mut moved = 0.0f64;
    for p in &track {
        moved = moved.max(match &p.outcome {
            Ok(v) => (v[0].lambda - res.lambda).norm(),
            Err(_) => f64::INFINITY,
        });
    }
    s.line("7", moved < 1e-7 && pred == 0.0, format!("gamma_D = gamma1 I: max |lambda_eps - lambda| {moved:.2e} (tol 1e-7), max |pred| {pred:e}"));
    s.info("7-published", format!("published prediction for the same inclusion: max |pred| {publ:.3e}"));

    // 8. synthetic linear family
    let eigs = synthetic_eigenvalues();
    let lin = synthetic_family(&eigs).unwrap();
    let generic = SolverOptions { lower_half_plane: false, ..opts };
    let rep = find_resonances(&lin, &ContourSpec::new(C64::new(0.0, 0.0), 1.0), &generic).unwrap();
    let inside: Vec<C64> = eigs.iter().copied().filter(|z| z.norm() < 1.0).collect();
    let err = inside.iter().map(|z| rep.results.iter().map(|r| (r.lambda - z).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    let empty = find_resonances(&lin, &ContourSpec::new(C64::new(5.0, 5.0), 0.5), &generic).unwrap();
    s.line(
        "8",
        inside.len() == 3 && rep.results.len() == 3 && err < 1e-10 && empty.rank == 0 && empty.results.is_empty(),
        format!("recovered {} of 3 eigenvalues, max err {err:.2e} (tol 1e-10); empty contour rank {}", rep.results.len(), empty.rank),
    );

    // 9. assembly certificates
    let disk = &fam.grid;
    let cal = calderon_residual(disk, &exterior_kernel(C64::new(1.5, 0.0), G2));
    let d = assemble_double_layer(disk, disk, &Kernel::laplace(1.0));
    let gauss = d.apply(&vec![C64::new(1.0, 0.0); N]).iter().map(|v| (v + 0.5).norm()).fold(0.0, f64::max);
    let kernels = [
        Kernel::laplace(G1),
        Kernel::helmholtz(w, G1),
        Kernel::helmholtz(w, G2),
        Kernel::anisotropic(w, [[3.0, 0.5], [0.5, 2.0]]).unwrap(),
    ];
    let flux = kernels.iter().map(|k| flux_residual(k, [0.1, -0.2], 1e-3, 512).unwrap()).fold(0.0, f64::max);
    s.line(
        "9",
        cal < 1e-8 && gauss < 1e-10 && flux < 1e-10,
        format!("Calderon {cal:.2e} (tol 1e-8), Gauss {gauss:.2e} (tol 1e-10), flux {flux:.2e} (tol 1e-10)"),
    );

    // 10. dual basis on a double root
    let r1 = woracle.iter().find(|o| o.mode == 1).map(|o| o.omega).unwrap_or(C64::new(2.82, -1.6));
    let rep = find_resonances(&fam, &ContourSpec::new(r1 - C64::new(0.04, 0.02), 0.25), &opts).unwrap();
    match rep.results.as_slice() {
        [r] if r.m_geo == 2 => {
            let db = dual_basis(&r.null_vectors, disk, r.lambda, G2).unwrap();
            let bio = db.biorthogonality_error(&r.null_vectors, &disk.arc_weights());
            let resid = dual_residual(&db, disk, r.lambda, G1, G2, JumpMode::Derived).unwrap();
            s.line("10", bio < 1e-8 && resid < 1e-6, format!("lambda = {:.6}, m = 2: biorthogonality {bio:.2e} (tol 1e-8), T* residual {resid:.2e} (tol 1e-6)", r.lambda));
        }
        other => s.line("10", false, format!("double root not resolved: {} results", other.len())),
    }

    s.info("jump", format!("identity coefficients of the two jump modes for gamma2 = 1: {} vs {}", JumpMode::Paper.coefficient(G2), JumpMode::Derived.coefficient(G2)));
    println!("acceptance: {} failed, {:.1} s total", s.failed, total.elapsed().as_secs_f64());
    if s.failed > 0 {
        std::process::exit(1);
    }
}
