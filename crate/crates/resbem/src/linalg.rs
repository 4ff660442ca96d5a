//! Dense complex linear algebra helpers on top of `faer`.

use crate::error::{Error, Result};
use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;

pub type CMat = Mat<C64>;

pub fn zeros(n: usize, m: usize) -> CMat {
    Mat::zeros(n, m)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

pub fn col_mat(x: &[C64]) -> CMat {
    Mat::from_fn(x.len(), 1, |i, _| x[i])
}

pub fn column(a: MatRef<'_, C64>, j: usize) -> Vec<C64> {
    (0..a.nrows()).map(|i| a[(i, j)]).collect()
}

pub fn mat_vec(a: MatRef<'_, C64>, x: &[C64]) -> Vec<C64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![C64::new(0.0, 0.0); a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == C64::new(0.0, 0.0) {
            continue;
        }
        let c = a.col(j);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += c[i] * xj;
        }
    }
    y
}

pub fn max_abs(a: MatRef<'_, C64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn frobenius(a: MatRef<'_, C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

pub fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_max(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `Σ w_k f_k conj(g_k)`.
pub fn inner(f: &[C64], g: &[C64], w: &[f64]) -> C64 {
    f.iter().zip(g).zip(w).map(|((a, b), w)| *a * b.conj() * *w).sum()
}

/// `W^{1/2} A W^{-1/2}`: the matrix whose Euclidean geometry is the weighted one.
pub fn weighted(a: MatRef<'_, C64>, w: &[f64]) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (w[i] / w[j]).sqrt())
}

/// Adjoint in the weighted inner product: `W⁻¹ Aᴴ W`.
pub fn weighted_adjoint(a: MatRef<'_, C64>, w: &[f64]) -> CMat {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj() * (w[j] / w[i]))
}

pub struct Lu {
    lu: PartialPivLu<C64>,
    n: usize,
}

impl Lu {
    pub fn new(a: MatRef<'_, C64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Linalg("LU of a non-square matrix".into()));
        }
        if !a.col_iter().all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Linalg("non-finite matrix entries".into()));
        }
        Ok(Self { lu: a.partial_piv_lu(), n: a.nrows() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: MatRef<'_, C64>) -> CMat {
        self.lu.solve(b)
    }

    pub fn solve_in_place(&self, b: &mut CMat) {
        self.lu.solve_in_place(b.as_mut());
    }

    pub fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let mut m = col_mat(b);
        self.lu.solve_in_place(m.as_mut());
        column(m.as_ref(), 0)
    }

    /// Solves `Aᴴ x = b`.
    pub fn solve_adjoint_vec(&self, b: &[C64]) -> Vec<C64> {
        let mut m = col_mat(b);
        self.lu.solve_adjoint_in_place(m.as_mut());
        column(m.as_ref(), 0)
    }

    /// Smallest singular value and its right/left singular vectors, by inverse
    /// iteration on `AᴴA`.
    pub fn smallest_singular(&self, iters: usize) -> (f64, Vec<C64>, Vec<C64>) {
        let n = self.n;
        // deterministic, generic start vector
        let mut x: Vec<C64> =
            (0..n).map(|i| C64::new(1.0 + (0.37 * i as f64).sin(), (1.3 * i as f64).cos())).collect();
        normalize(&mut x);
        let mut sigma = f64::INFINITY;
        for _ in 0..iters.max(1) {
            // y = A^{-H} x, z = A^{-1} y, so z = (A^H A)^{-1} x
            let y = self.solve_adjoint_vec(&x);
            let mut z = self.solve_vec(&y);
            let nz = vec_norm(&z);
            if !(nz.is_finite()) || nz == 0.0 {
                return (0.0, x.clone(), x);
            }
            for v in z.iter_mut() {
                *v /= nz;
            }
            sigma = 1.0 / nz.sqrt();
            // converged when z equals x up to a phase
            let c: C64 = z.iter().zip(&x).map(|(a, b)| a * b.conj()).sum();
            let ph = if c.norm() > 0.0 { c / c.norm() } else { C64::new(1.0, 0.0) };
            let diff: f64 = z.iter().zip(&x).map(|(a, b)| (a - b * ph).norm_sqr()).sum::<f64>().sqrt();
            let done = diff <= 1e-12;
            x = z;
            if done {
                break;
            }
        }
        // left vector: u = A v / σ computed as A^{-H} v scaled (A^{-H} v = u/σ)
        let mut u = self.solve_adjoint_vec(&x);
        let nu = vec_norm(&u);
        for v in u.iter_mut() {
            *v /= nu;
        }
        (sigma, x, u)
    }
}

pub fn normalize(x: &mut [C64]) {
    let n = vec_norm(x);
    if n > 0.0 {
        for v in x.iter_mut() {
            *v /= n;
        }
    }
}

/// Singular value decomposition `A = U diag(s) Vᴴ` (thin).
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn svd(a: MatRef<'_, C64>) -> Result<Svd> {
    let d = a.thin_svd().map_err(|e| Error::Linalg(format!("svd: {e:?}")))?;
    let s = d.S().column_vector().iter().map(|v| v.re).collect();
    Ok(Svd { u: d.U().to_owned(), s, v: d.V().to_owned() })
}

pub fn singular_values(a: MatRef<'_, C64>) -> Result<Vec<f64>> {
    a.singular_values().map_err(|e| Error::Linalg(format!("svd: {e:?}")))
}

pub fn eigenvalues(a: MatRef<'_, C64>) -> Result<Vec<C64>> {
    a.eigenvalues().map_err(|e| Error::Linalg(format!("eig: {e:?}")))
}

/// Inverse of a small square matrix.
pub fn inverse(a: MatRef<'_, C64>) -> Result<CMat> {
    let lu = Lu::new(a)?;
    let inv = lu.solve(identity(a.nrows()).as_ref());
    if !inv.col_iter().all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Linalg("singular matrix".into()));
    }
    Ok(inv)
}

/// 2-norm condition number from the singular values.
pub fn condition(a: MatRef<'_, C64>) -> Result<f64> {
    let s = singular_values(a)?;
    let (max, min) = (s.first().copied().unwrap_or(0.0), s.last().copied().unwrap_or(0.0));
    Ok(if min > 0.0 { max / min } else { f64::INFINITY })
}
