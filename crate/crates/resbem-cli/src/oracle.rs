//! Dispersion relation of the two-medium disk, solved independently of the
//! boundary integral machinery.
//!
//! Separation of variables on a disk of radius `R` gives, per angular mode `m`,
//! `f_m(ω) = γ1 k1 J_m'(k1 R) H_m(k2 R) − γ2 k2 J_m(k1 R) H_m'(k2 R)`,
//! `k_j = ω/√γ_j`. Modes `m ≥ 1` carry the `±m` pair, so their roots are
//! resonances of multiplicity 2.

use num_complex::Complex64 as C64;
use resbem::nep::Rectangle;
use resbem::specfun::{besselj, hankel1};
use resbem::{Error, Result};

/// Roots are accepted when `|f_m| ≤ RESIDUAL_TOL · scale`, `scale` being the
/// size of the two products in `f_m`.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Bessel-type values `Z_m, Z_m', Z_m''` from `Z_{m−1}, Z_m, Z_{m+1}`.
fn derivs(zm1: C64, z0: C64, zp1: C64, m: u32, x: C64) -> (C64, C64, C64) {
    let d1 = 0.5 * (zm1 - zp1);
    let m2 = (m * m) as f64;
    let d2 = -d1 / x - (1.0 - m2 / (x * x)) * z0;
    (z0, d1, d2)
}

fn triple(f: impl Fn(u32, C64) -> Result<C64>, m: u32, x: C64) -> Result<(C64, C64, C64)> {
    let below = if m == 0 { -f(1, x)? } else { f(m - 1, x)? };
    Ok(derivs(below, f(m, x)?, f(m + 1, x)?, m, x))
}

/// `(f_m(ω), f_m'(ω), scale)`.
pub fn dispersion(g1: f64, g2: f64, radius: f64, m: u32, w: C64) -> Result<(C64, C64, f64)> {
    let (s1, s2) = (g1.sqrt(), g2.sqrt());
    let (k1, k2) = (w / s1, w / s2);
    let (x1, x2) = (k1 * radius, k2 * radius);
    let (j, jp, jpp) = triple(besselj, m, x1)?;
    let (h, hp, hpp) = triple(hankel1, m, x2)?;
    let a = g1 * k1 * jp * h;
    let b = g2 * k2 * j * hp;
    // d/dω with dk_j/dω = 1/√γ_j
    let da = g1 / s1 * jp * h + g1 * k1 * (jpp * radius / s1 * h + jp * hp * radius / s2);
    let db = g2 / s2 * j * hp + g2 * k2 * (jp * radius / s1 * hp + j * hpp * radius / s2);
    Ok((a - b, da - db, a.norm() + b.norm()))
}

/// Split a rectangle that straddles the branch cut on the negative imaginary
/// axis into its left and right parts.
fn halves(rect: &Rectangle) -> Vec<Rectangle> {
    if rect.re[0] < 0.0 && rect.re[1] > 0.0 {
        let d = 1e-9 * rect.re[1].max(-rect.re[0]);
        vec![Rectangle { re: [rect.re[0], -d], im: rect.im }, Rectangle { re: [d, rect.re[1]], im: rect.im }]
    } else {
        vec![*rect]
    }
}

/// Number of zeros of `f_m` inside the rectangle by the argument principle,
/// with adaptive refinement of the boundary.
pub fn winding_count(g1: f64, g2: f64, radius: f64, m: u32, rect: &Rectangle) -> Result<i64> {
    halves(rect).iter().map(|r| winding_half(g1, g2, radius, m, r)).sum()
}

fn winding_half(g1: f64, g2: f64, radius: f64, m: u32, rect: &Rectangle) -> Result<i64> {
    let f = |z: C64| dispersion(g1, g2, radius, m, z).map(|v| v.0);
    let corners = [
        C64::new(rect.re[0], rect.im[0]),
        C64::new(rect.re[1], rect.im[0]),
        C64::new(rect.re[1], rect.im[1]),
        C64::new(rect.re[0], rect.im[1]),
    ];
    let mut total = 0.0;
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let n = 64;
        let mut za = a;
        let mut fa = f(a)?;
        for i in 1..=n {
            let zb = a + (b - a) * (i as f64 / n as f64);
            let fb = f(zb)?;
            total += phase_change(&f, za, fa, zb, fb, 0)?;
            za = zb;
            fa = fb;
        }
    }
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i64)
}

fn phase_change(f: &impl Fn(C64) -> Result<C64>, za: C64, fa: C64, zb: C64, fb: C64, depth: u32) -> Result<f64> {
    let d = (fb / fa).arg();
    if d.abs() < 0.3 || depth > 30 {
        return Ok(d);
    }
    let zm = 0.5 * (za + zb);
    let fm = f(zm)?;
    Ok(phase_change(f, za, fa, zm, fm, depth + 1)? + phase_change(f, zm, fm, zb, fb, depth + 1)?)
}

fn newton(g1: f64, g2: f64, radius: f64, m: u32, mut w: C64) -> Option<(C64, f64)> {
    for _ in 0..60 {
        let (v, d, _) = dispersion(g1, g2, radius, m, w).ok()?;
        if d.norm() == 0.0 {
            return None;
        }
        let step = v / d;
        w -= step;
        if !w.is_finite() || w.im >= 0.0 {
            return None;
        }
        if step.norm() < 1e-15 * w.norm() {
            break;
        }
    }
    let (v, _, scale) = dispersion(g1, g2, radius, m, w).ok()?;
    Some((w, v.norm() / scale))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRoot {
    pub mode: u32,
    pub omega: C64,
    /// `|f_m| / scale`.
    pub residual: f64,
}

impl OracleRoot {
    pub fn multiplicity(&self) -> usize {
        if self.mode == 0 {
            1
        } else {
            2
        }
    }
}

/// All roots of `f_m` in `region`, sorted by real part. Newton is seeded on
/// a grid that is refined until the count matches the winding number.
pub fn disk_dispersion_oracle(g1: f64, g2: f64, radius: f64, m: u32, region: &Rectangle) -> Result<Vec<OracleRoot>> {
    if !(region.im[1] < 0.0) {
        return Err(Error::InvalidParameter { name: "region", reason: "must lie in the lower half-plane".into() });
    }
    let mut roots = Vec::new();
    for r in halves(region) {
        roots.extend(oracle_half(g1, g2, radius, m, &r)?);
    }
    roots.sort_by(|a, b| a.omega.re.total_cmp(&b.omega.re));
    Ok(roots)
}

fn oracle_half(g1: f64, g2: f64, radius: f64, m: u32, region: &Rectangle) -> Result<Vec<OracleRoot>> {
    let expected = winding_count(g1, g2, radius, m, region)?;
    let mut roots: Vec<OracleRoot> = Vec::new();
    let (wr, wi) = (region.re[1] - region.re[0], region.im[1] - region.im[0]);
    for level in 0..5 {
        let nx = 8usize << level;
        let ny = ((nx as f64 * wi / wr).ceil() as usize).max(4);
        for iy in 0..ny {
            for ix in 0..nx {
                let z = C64::new(region.re[0] + (ix as f64 + 0.5) * wr / nx as f64, region.im[0] + (iy as f64 + 0.5) * wi / ny as f64);
                let Some((w, res)) = newton(g1, g2, radius, m, z) else { continue };
                if !region.contains(w) || res > RESIDUAL_TOL {
                    continue;
                }
                if roots.iter().any(|r| (r.omega - w).norm() < 1e-8 * w.norm()) {
                    continue;
                }
                roots.push(OracleRoot { mode: m, omega: w, residual: res });
            }
        }
        if roots.len() as i64 >= expected {
            break;
        }
    }
    Ok(roots)
}
