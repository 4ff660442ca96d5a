//! wasm-bindgen entry points for the static demo page in `www/`.
//!
//! Each export is a thin wrapper over a plain function so the numerics can be
//! tested natively. Results are flat `f64` arrays; the page knows the layout.

use num_complex::Complex64 as C64;
use resbem::asymptotics::{predict_shift_simple, PerturbationSetup, PredictionMode};
use resbem::geometry::{build_grid, InclusionSpec, ParametricCurve, Scene};
use resbem::linalg::Lu;
use resbem::nep::{find_resonances, ContourSpec, OperatorFamily, SolverOptions};
use resbem::polarization::compute_polarization;
use resbem::transfer::{JumpMode, TransferFamily};
use wasm_bindgen::prelude::*;

fn disk_family(gamma1: f64, gamma2: f64, n: usize) -> resbem::Result<TransferFamily> {
    Ok(TransferFamily { grid: build_grid(&ParametricCurve::circle(1.0), n)?, gamma1, gamma2, mode: JumpMode::Derived })
}

/// `[t, m11, m12, m21, m22]` per contrast `t = trace(γ_D) / γ_bg` for an
/// ellipse with semi-axes `a`, `b` rotated by `theta`.
pub fn polarization_curve(a: f64, b: f64, theta: f64, n: usize, contrasts: &[f64]) -> resbem::Result<Vec<f64>> {
    let grid = build_grid(&ParametricCurve::ellipse(a, b).with_orientation(theta), n)?;
    let mut out = Vec::with_capacity(5 * contrasts.len());
    for &t in contrasts {
        let p = compute_polarization(&grid, 1.0, t)?;
        out.extend([t, p.m[0][0], p.m[0][1], p.m[1][0], p.m[1][1]]);
    }
    Ok(out)
}

/// `log10 σ_min(T(ω))` on an `nx × ny` grid over the window, row-major from
/// the bottom-left corner.
#[allow(clippy::too_many_arguments)]
pub fn sigma_landscape(gamma1: f64, gamma2: f64, n: usize, re: [f64; 2], im: [f64; 2], nx: usize, ny: usize) -> resbem::Result<Vec<f64>> {
    let fam = disk_family(gamma1, gamma2, n)?;
    let step = |r: [f64; 2], k: usize, m: usize| if m > 1 { r[0] + (r[1] - r[0]) * k as f64 / (m - 1) as f64 } else { r[0] };
    let mut out = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let w = C64::new(step(re, ix, nx), step(im, iy, ny));
            let t = fam.eval(w)?;
            let s = match Lu::new(t.as_ref()) {
                Ok(lu) => lu.smallest_singular(20).0,
                Err(_) => 0.0,
            };
            out.push(s.max(1e-300).log10());
        }
    }
    Ok(out)
}

/// Resonance nearest to `guess` in a disk of `radius`, then the predicted
/// shift for one disk-shaped inclusion of radius `eps` at `center`:
/// `[λ_re, λ_im, corrected_re, corrected_im, published_re, published_im]`.
#[allow(clippy::too_many_arguments)]
pub fn shift_prediction(
    gamma1: f64,
    gamma2: f64,
    gamma_d: f64,
    center: [f64; 2],
    eps: f64,
    guess: [f64; 2],
    radius: f64,
    n: usize,
) -> resbem::Result<Vec<f64>> {
    let fam = disk_family(gamma1, gamma2, n)?;
    let g = C64::new(guess[0], guess[1]);
    let rep = find_resonances(&fam, &ContourSpec::new(g, radius), &SolverOptions::default())?;
    let res = rep
        .results
        .iter()
        .min_by(|a, b| (a.lambda - g).norm().total_cmp(&(b.lambda - g).norm()))
        .ok_or_else(|| resbem::Error::InvalidParameter { name: "guess", reason: "no resonance inside the disk".into() })?;
    let scene = Scene {
        outer: ParametricCurve::circle(1.0),
        gamma1,
        gamma2,
        inclusions: vec![InclusionSpec { center, shape: ParametricCurve::circle(1.0), gamma_d: [[gamma_d, 0.0], [0.0, gamma_d]] }],
        epsilon: eps,
    };
    let setup = PerturbationSetup::new(&fam, res, &scene, 64)?;
    let c = predict_shift_simple(&setup, eps, PredictionMode::Corrected)?.shift;
    let p = predict_shift_simple(&setup, eps, PredictionMode::Published)?.shift;
    Ok(vec![res.lambda.re, res.lambda.im, c.re, c.im, p.re, p.im])
}

fn js(e: resbem::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = polarizationCurve)]
pub fn polarization_curve_js(a: f64, b: f64, theta: f64, n: usize, contrasts: Vec<f64>) -> Result<Vec<f64>, JsError> {
    polarization_curve(a, b, theta, n, &contrasts).map_err(js)
}

#[wasm_bindgen(js_name = sigmaLandscape)]
#[allow(clippy::too_many_arguments)]
pub fn sigma_landscape_js(gamma1: f64, gamma2: f64, n: usize, re0: f64, re1: f64, im0: f64, im1: f64, nx: usize, ny: usize) -> Result<Vec<f64>, JsError> {
    sigma_landscape(gamma1, gamma2, n, [re0, re1], [im0, im1], nx, ny).map_err(js)
}

#[wasm_bindgen(js_name = shiftPrediction)]
#[allow(clippy::too_many_arguments)]
pub fn shift_prediction_js(
    gamma1: f64,
    gamma2: f64,
    gamma_d: f64,
    cx: f64,
    cy: f64,
    eps: f64,
    re: f64,
    im: f64,
    radius: f64,
    n: usize,
) -> Result<Vec<f64>, JsError> {
    shift_prediction(gamma1, gamma2, gamma_d, [cx, cy], eps, [re, im], radius, n).map_err(js)
}
