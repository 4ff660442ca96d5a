//! Complex Bessel/Hankel functions and the fundamental solutions.
//!
//! Public Bessel entry points are backed by the Amos algorithms
//! (`complex-bessel`). Kernel assembly uses [`jy01`], a power series for
//! `|z| ≤ 10` that returns `J0, J1, Y0, Y1` in one pass and falls back to Amos
//! beyond.
//!
//! Functions with a logarithmic branch (`Y_n`, `H_n`, the kernels) live on the
//! sheet reached from the upper half-plane, `arg z ∈ [−π/2, 3π/2)`: the third
//! quadrant is approached across the negative real axis rather than across
//! the negative imaginary axis. This is the continuation of the outgoing
//! resolvent from real frequencies of either sign, and the one on which
//! resonances are symmetric under `ω ↦ −ω̄`. The branch cut sits on the
//! negative imaginary axis, so contours must not cross it.

use crate::error::{Error, Result};
use crate::geometry::{Point, Sym2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_2_PI, FRAC_1_PI, PI};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// True where the sheet differs from the principal branch.
pub fn off_principal(z: C64) -> bool {
    z.re < 0.0 && z.im < 0.0
}

/// `log z` with `arg z ∈ [−π/2, 3π/2)`.
pub fn ln_sheet(z: C64) -> C64 {
    let l = z.ln();
    if off_principal(z) {
        l + 2.0 * PI * I
    } else {
        l
    }
}

fn amos(r: std::result::Result<C64, complex_bessel::Error>, z: C64) -> Result<C64> {
    r.map_err(|_| Error::DomainError(z))
}

/// `H^(1)_n(z)` on the principal branch.
pub fn hankel1(order: u32, z: C64) -> Result<C64> {
    if z == C64::new(0.0, 0.0) {
        return Err(Error::DomainError(z));
    }
    let h = amos(complex_bessel::hankel1(order as f64, z), z)?;
    // Y_n carries (2/π) J_n log z, so the sheet shift is Y += 4i J, H −= 4J
    if off_principal(z) {
        return Ok(h - 4.0 * besselj(order, z)?);
    }
    Ok(h)
}

pub fn besselj(order: u32, z: C64) -> Result<C64> {
    amos(complex_bessel::besselj(order as f64, z), z)
}

pub fn bessely(order: u32, z: C64) -> Result<C64> {
    if z == C64::new(0.0, 0.0) {
        return Err(Error::DomainError(z));
    }
    let y = amos(complex_bessel::bessely(order as f64, z), z)?;
    if off_principal(z) {
        return Ok(y + 4.0 * I * besselj(order, z)?);
    }
    Ok(y)
}

/// `d/dz J_n(z)`.
pub fn besselj_derivative(order: u32, z: C64) -> Result<C64> {
    if order == 0 {
        return Ok(-besselj(1, z)?);
    }
    Ok(0.5 * (besselj(order - 1, z)? - besselj(order + 1, z)?))
}

/// `d/dz H^(1)_n(z)`.
pub fn hankel1_derivative(order: u32, z: C64) -> Result<C64> {
    if order == 0 {
        return Ok(-hankel1(1, z)?);
    }
    Ok(0.5 * (hankel1(order - 1, z)? - hankel1(order + 1, z)?))
}

/// `J0, J1, Y0, Y1` at one argument.
#[derive(Debug, Clone, Copy)]
pub struct Jy01 {
    pub j0: C64,
    pub j1: C64,
    pub y0: C64,
    pub y1: C64,
}

impl Jy01 {
    pub fn h0(&self) -> C64 {
        self.j0 + I * self.y0
    }

    pub fn h1(&self) -> C64 {
        self.j1 + I * self.y1
    }
}

const SERIES_RADIUS: f64 = 10.0;

/// `J0, J1, Y0, Y1` for `z ≠ 0` on the principal branch.
pub fn jy01(z: C64) -> Jy01 {
    if z.norm() <= SERIES_RADIUS {
        return jy01_series(z);
    }
    let j = complex_bessel::besselj_seq(0.0, z, 2, complex_bessel::Scaling::Unscaled)
        .expect("J0/J1 evaluation");
    let y = complex_bessel::bessely_seq(0.0, z, 2, complex_bessel::Scaling::Unscaled)
        .expect("Y0/Y1 evaluation");
    let (j0, j1) = (j.values[0], j.values[1]);
    let (mut y0, mut y1) = (y.values[0], y.values[1]);
    if off_principal(z) {
        y0 += 4.0 * I * j0;
        y1 += 4.0 * I * j1;
    }
    Jy01 { j0, j1, y0, y1 }
}

fn jy01_series(z: C64) -> Jy01 {
    let q = -0.25 * z * z;
    // a_k = q^k/(k!)^2, b_k = q^k/(k!(k+1)!)
    let mut a = C64::new(1.0, 0.0);
    let mut b = C64::new(1.0, 0.0);
    let mut j0 = a;
    let mut sb = b;
    let mut sa_h = C64::new(0.0, 0.0);
    let mut sb_h = b; // H_0 + H_1 = 1
    let mut h = 0.0;
    for k in 1..80 {
        let kf = k as f64;
        a *= q / (kf * kf);
        b *= q / (kf * (kf + 1.0));
        h += 1.0 / kf;
        let h_next = h + 1.0 / (kf + 1.0);
        j0 += a;
        sb += b;
        sa_h += a * h;
        sb_h += b * (h + h_next);
        if k > 3 && a.norm_sqr() < 1e-36 * j0.norm_sqr().max(1e-300) && b.norm_sqr() < 1e-36 * sb.norm_sqr().max(1e-300) {
            break;
        }
    }
    let half = 0.5 * z;
    let j1 = half * sb;
    let lg = ln_sheet(half) + EULER_GAMMA;
    let y0 = FRAC_2_PI * (lg * j0 - sa_h);
    let y1 = FRAC_2_PI * lg * j1 - FRAC_2_PI / z - FRAC_1_PI * half * sb_h;
    Jy01 { j0, j1, y0, y1 }
}

/// Kernel families of the fundamental solutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Helmholtz2d,
    Laplace2d,
    Anisotropic2d,
}

/// Fundamental solution of `(γΔ + ω²)G = −δ` (helmholtz), `γΔG = −δ`
/// (laplace) or `(∇·A∇ + ω²)G = −δ` (anisotropic).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub family: Family,
    pub omega: C64,
    pub gamma: f64,
    /// Anisotropy matrix, only used by the anisotropic family.
    pub a: Sym2,
    a_inv: Sym2,
    sqrt_det: f64,
}

impl Kernel {
    pub fn helmholtz(omega: C64, gamma: f64) -> Self {
        Self::build(Family::Helmholtz2d, omega, gamma, [[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn laplace(gamma: f64) -> Self {
        Self::build(Family::Laplace2d, C64::new(0.0, 0.0), gamma, [[1.0, 0.0], [0.0, 1.0]])
    }

    /// Anisotropic kernel; `a` must be symmetric positive definite.
    pub fn anisotropic(omega: C64, a: Sym2) -> Result<Self> {
        if (a[0][1] - a[1][0]).abs() > 1e-14 * (1.0 + a[0][1].abs()) || crate::geometry::sym2_min_eig(&a) <= 0.0 {
            return Err(Error::NotSpd);
        }
        Ok(Self::build(Family::Anisotropic2d, omega, 1.0, a))
    }

    fn build(family: Family, omega: C64, gamma: f64, a: Sym2) -> Self {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let a_inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
        Self { family, omega, gamma, a, a_inv, sqrt_det: det.sqrt() }
    }

    /// Wavenumber `ω/√γ` (helmholtz) or `ω` (anisotropic, in the stretched metric).
    pub fn wavenumber(&self) -> C64 {
        match self.family {
            Family::Anisotropic2d => self.omega,
            _ => self.omega / self.gamma.sqrt(),
        }
    }

    /// Overall factor multiplying the standard `(i/4)H0` or `−log/(2π)` kernel.
    pub fn prefactor(&self) -> f64 {
        match self.family {
            Family::Anisotropic2d => 1.0 / self.sqrt_det,
            _ => 1.0 / self.gamma,
        }
    }

    /// Distance in the kernel metric: `|d|` or `|A^{-1/2} d|`.
    pub fn metric_distance(&self, d: Point) -> f64 {
        match self.family {
            Family::Anisotropic2d => self.metric_norm2(d).sqrt(),
            _ => d[0].hypot(d[1]),
        }
    }

    /// `dᵀ A⁻¹ d` (or `|d|²`).
    pub fn metric_norm2(&self, d: Point) -> f64 {
        match self.family {
            Family::Anisotropic2d => {
                let m = &self.a_inv;
                d[0] * (m[0][0] * d[0] + m[0][1] * d[1]) + d[1] * (m[1][0] * d[0] + m[1][1] * d[1])
            }
            _ => d[0] * d[0] + d[1] * d[1],
        }
    }

    /// `A⁻¹ d` (or `d`).
    pub fn metric_apply(&self, d: Point) -> Point {
        match self.family {
            Family::Anisotropic2d => {
                let m = &self.a_inv;
                [m[0][0] * d[0] + m[0][1] * d[1], m[1][0] * d[0] + m[1][1] * d[1]]
            }
            _ => d,
        }
    }

    /// Conormal `A ν` used for flux derivatives (or `ν`). The conormal
    /// derivative of the anisotropic kernel is `(Aν)·∇G`.
    pub fn conormal(&self, nu: Point) -> Point {
        match self.family {
            Family::Anisotropic2d => {
                let a = &self.a;
                [a[0][0] * nu[0] + a[0][1] * nu[1], a[1][0] * nu[0] + a[1][1] * nu[1]]
            }
            _ => nu,
        }
    }
}

fn coincident(x: Point, y: Point) -> bool {
    x[0] == y[0] && x[1] == y[1]
}

/// `G(x, y)`.
pub fn green(kernel: &Kernel, x: Point, y: Point) -> Result<C64> {
    if coincident(x, y) {
        return Err(Error::CoincidentPoints);
    }
    let d = [x[0] - y[0], x[1] - y[1]];
    let r = kernel.metric_distance(d);
    let c = kernel.prefactor();
    Ok(match kernel.family {
        Family::Laplace2d => C64::new(-c * r.ln() / (2.0 * PI), 0.0),
        _ => {
            let h = jy01(kernel.wavenumber() * r).h0();
            c * 0.25 * I * h
        }
    })
}

/// `∇_y G(x, y)`. For the anisotropic family this is the plain gradient;
/// the conormal derivative is `(A ν_y)·∇_y G`.
pub fn green_gradient_y(kernel: &Kernel, x: Point, y: Point) -> Result<[C64; 2]> {
    if coincident(x, y) {
        return Err(Error::CoincidentPoints);
    }
    let d = [x[0] - y[0], x[1] - y[1]];
    let r = kernel.metric_distance(d);
    let c = kernel.prefactor();
    let md = kernel.metric_apply(d);
    // ∇_y r = −A⁻¹d / r
    let s = match kernel.family {
        Family::Laplace2d => C64::new(c / (2.0 * PI * r * r), 0.0),
        _ => {
            let k = kernel.wavenumber();
            let h1 = jy01(k * r).h1();
            c * 0.25 * I * k * h1 / r
        }
    };
    Ok([s * md[0], s * md[1]])
}

/// Normalization certificate: on the metric circle `C_r` around `x`,
/// `∮ γ (Aν)·∇_y G dσ + ω² ∫_{inside C_r} G dA = −1`. Returns the deviation,
/// with `n` trapezoid nodes on the circle and a midpoint rule in `√ρ` for the
/// area term.
pub fn flux_residual(kernel: &Kernel, x: Point, r: f64, n: usize) -> Result<f64> {
    // A^{1/2} maps the unit circle onto the metric circle
    let a = &kernel.a;
    let sd = kernel.sqrt_det;
    let q = (a[0][0] + a[1][1] + 2.0 * sd).sqrt();
    let root = [[(a[0][0] + sd) / q, a[0][1] / q], [a[1][0] / q, (a[1][1] + sd) / q]];
    let h = 2.0 * PI / n as f64;
    let mut flux = C64::new(0.0, 0.0);
    for j in 0..n {
        let (s, c) = (j as f64 * h).sin_cos();
        let y = [x[0] + r * (root[0][0] * c + root[0][1] * s), x[1] + r * (root[1][0] * c + root[1][1] * s)];
        let tau = [r * (-root[0][0] * s + root[0][1] * c), r * (-root[1][0] * s + root[1][1] * c)];
        let len = tau[0].hypot(tau[1]);
        let cn = kernel.conormal([tau[1] / len, -tau[0] / len]);
        let g = green_gradient_y(kernel, x, y)?;
        flux += (g[0] * cn[0] + g[1] * cn[1]) * len * h;
    }
    flux *= kernel.gamma;
    let area = if kernel.family == Family::Laplace2d {
        C64::new(0.0, 0.0)
    } else {
        let k = kernel.wavenumber();
        let jac = if kernel.family == Family::Anisotropic2d { sd } else { 1.0 };
        let m = 4 * n;
        // ρ = r s², dρ = 2 r s ds
        let radial: C64 = (0..m)
            .map(|i| {
                let s = (i as f64 + 0.5) / m as f64;
                let rho = r * s * s;
                jy01(k * rho).h0() * rho * 2.0 * r * s / m as f64
            })
            .sum();
        kernel.omega * kernel.omega * 2.0 * PI * jac * kernel.prefactor() * 0.25 * I * radial
    };
    Ok((flux + area + 1.0).norm())
}

/// `(i/4) H0(k r)` is written as `L(r) log(4 sin²(h/2)) + rest`; this returns the
/// Kress coefficients for the single layer (`L = −J0(kr)/(4π)`) and the
/// continuous value of the remainder at `r → 0` for unit speed `s`:
/// `i/4 − (C + log(k s / 2))/(2π)`.
pub(crate) fn single_layer_diagonal(k: C64, s: f64) -> C64 {
    0.25 * I - (ln_sheet(0.5 * k * s) + EULER_GAMMA) / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn h0_at_one() {
        let h = hankel1(0, C64::new(1.0, 0.0)).unwrap();
        assert!((h.re - 0.765_197_686_557_966_6).abs() < 1e-13);
        assert!((h.im - 0.088_256_964_215_676_96).abs() < 1e-13);
    }

    #[test]
    fn h1_is_minus_derivative_of_h0() {
        let z = C64::new(2.0, 0.1);
        let e = 1e-5;
        let fd = (hankel1(0, z + e).unwrap() - hankel1(0, z - e).unwrap()) / (2.0 * e);
        assert!((fd + hankel1(1, z).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn zero_argument_is_domain_error() {
        assert!(matches!(hankel1(0, C64::new(0.0, 0.0)), Err(Error::DomainError(_))));
    }

    #[test]
    fn series_matches_amos() {
        for &r in &[1e-3, 0.05, 0.7, 2.0, 4.5, 7.0, 9.9] {
            for &th in &[0.0, -0.3, -1.0, -2.0, 0.5, 2.8] {
                let z = C64::from_polar(r, th);
                let s = jy01_series(z);
                let tol = 2e-12;
                assert!(close(s.j0, besselj(0, z).unwrap(), tol), "J0 {z}");
                assert!(close(s.j1, besselj(1, z).unwrap(), tol), "J1 {z}");
                assert!(close(s.y0, bessely(0, z).unwrap(), tol), "Y0 {z}");
                assert!(close(s.y1, bessely(1, z).unwrap(), tol), "Y1 {z}");
            }
        }
    }

    #[test]
    fn helmholtz_kernel_normalization() {
        let k = Kernel::helmholtz(C64::new(1.3, -0.2), 2.0);
        let x = [0.1, 0.2];
        let y = [0.5, -0.4];
        let r = crate::geometry::dist(x, y);
        let expect = I / 8.0 * hankel1(0, k.wavenumber() * r).unwrap();
        assert!((green(&k, x, y).unwrap() - expect).norm() < 1e-14);
        assert_eq!(green(&Kernel::laplace(1.0), [0.0, 0.0], [1.0, 0.0]).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(green(&k, x, x), Err(Error::CoincidentPoints));
    }

    #[test]
    fn anisotropic_identity_reduces_to_helmholtz() {
        let w = C64::new(2.1, -0.4);
        let a = Kernel::anisotropic(w, [[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let h = Kernel::helmholtz(w, 1.0);
        let x = [0.3, 0.1];
        let y = [-0.2, 0.4];
        assert!((green(&a, x, y).unwrap() - green(&h, x, y).unwrap()).norm() < 1e-14);
        let ga = green_gradient_y(&a, x, y).unwrap();
        let gh = green_gradient_y(&h, x, y).unwrap();
        assert!((ga[0] - gh[0]).norm() + (ga[1] - gh[1]).norm() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let kernels = [
            Kernel::helmholtz(C64::new(1.7, -0.3), 1.5),
            Kernel::laplace(2.0),
            Kernel::anisotropic(C64::new(1.2, -0.1), [[2.0, 0.3], [0.3, 1.0]]).unwrap(),
        ];
        let x = [0.2, -0.1];
        let y = [0.9, 0.5];
        let e = 1e-6;
        for k in &kernels {
            let g = green_gradient_y(k, x, y).unwrap();
            for i in 0..2 {
                let mut yp = y;
                let mut ym = y;
                yp[i] += e;
                ym[i] -= e;
                let fd = (green(k, x, yp).unwrap() - green(k, x, ym).unwrap()) / (2.0 * e);
                assert!((fd - g[i]).norm() < 1e-8, "{:?}", k.family);
            }
        }
    }

    #[test]
    fn annulus_flux_normalization() {
        let x = [0.2, -0.1];
        let kernels = [
            Kernel::laplace(1.0),
            Kernel::laplace(2.5),
            Kernel::helmholtz(C64::new(1.3, -0.2), 2.0),
            Kernel::helmholtz(C64::new(4.0, -1.0), 1.0),
            Kernel::anisotropic(C64::new(1.1, -0.3), [[2.0, 0.4], [0.4, 1.0]]).unwrap(),
        ];
        for k in &kernels {
            let e = flux_residual(k, x, 1e-3, 512).unwrap();
            assert!(e < 1e-10, "{:?} {e:e}", k.family);
        }
    }

    #[test]
    fn sheet_reflection_and_continuity() {
        // H_n(−z̄) = (−1)^{n+1} conj(H_n(z)) on the continued sheet
        for &z in &[C64::new(0.7, -0.4), C64::new(3.0, -1.2), C64::new(12.0, -2.0), C64::new(0.05, -0.01)] {
            let m = -z.conj();
            assert!(close(hankel1(0, m).unwrap(), -hankel1(0, z).unwrap().conj(), 1e-12));
            assert!(close(hankel1(1, m).unwrap(), hankel1(1, z).unwrap().conj(), 1e-12));
            assert!(close(hankel1(2, m).unwrap(), -hankel1(2, z).unwrap().conj(), 1e-12));
            let s = jy01(m);
            assert!(close(s.h0(), -jy01(z).h0().conj(), 1e-12));
            assert!(close(s.h1(), jy01(z).h1().conj(), 1e-12));
        }
        // continuous across the negative real axis, cut on the negative imaginary axis
        let d = 1e-9;
        for x in [0.5, 4.0, 15.0] {
            let (a, b) = (jy01(C64::new(-x, d)).h0(), jy01(C64::new(-x, -d)).h0());
            assert!((a - b).norm() < 1e-7);
            let (a, b) = (jy01(C64::new(d, -x)).h0(), jy01(C64::new(-d, -x)).h0());
            assert!((a - b).norm() > 1e-3);
        }
        let k = Kernel::helmholtz(C64::new(1.3, -0.4), 2.0);
        let km = Kernel::helmholtz(C64::new(-1.3, -0.4), 2.0);
        let (x, y) = ([0.1, 0.2], [0.6, -0.3]);
        assert!(close(green(&km, x, y).unwrap(), green(&k, x, y).unwrap().conj(), 1e-13));
    }
}
