//! Nyström assembly of layer potentials.
//!
//! Conventions (principal value, `ν` outward):
//! - `S φ(x) = ∫ G(x,y) φ(y) dσ_y`
//! - `D φ(x) = ∫ ∂_{ν_y} G(x,y) φ(y) dσ_y`, traces `D ∓ ½/γ` from inside/outside
//! - `K' φ(x) = ∫ ∂_{ν_x} G(x,y) φ(y) dσ_y`, normal traces of `S` are `K' ± ½/γ`
//!
//! so the Laplace identity reads `D·1 = −½` on any closed curve (for `γ = 1`).
//! For the anisotropic family normal derivatives are conormal ones, `(Aν)·∇`.
//!
//! Self-interaction blocks split the logarithmic singularity with the
//! trigonometric product weights of Kress; other blocks use the trapezoid rule.

use crate::geometry::BoundaryGrid;
use crate::linalg::{mat_vec, CMat};
use crate::specfun::{jy01, single_layer_diagonal, Family, Jy01, Kernel};
use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    SingleLayer,
    DoubleLayer,
    AdjointDoubleLayer,
}

/// Dense discretization of a boundary integral operator (target × source).
#[derive(Debug, Clone)]
pub struct BoundaryOperator {
    pub matrix: CMat,
    pub source: u64,
    pub target: u64,
    pub kernel: Kernel,
    pub kind: OperatorKind,
}

impl BoundaryOperator {
    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        mat_vec(self.matrix.as_ref(), f)
    }
}

/// Which operators to assemble in one pass.
#[derive(Debug, Clone, Copy, Default)]
pub struct Want {
    pub single: bool,
    pub double: bool,
    pub adjoint: bool,
}

impl Want {
    pub const ALL: Want = Want { single: true, double: true, adjoint: true };
    pub const SD: Want = Want { single: true, double: true, adjoint: false };
}

/// Matrices assembled together (sharing kernel evaluations).
#[derive(Debug, Clone, Default)]
pub struct Layers {
    pub s: Option<CMat>,
    pub d: Option<CMat>,
    pub kp: Option<CMat>,
}

/// Kress weights `R_m` (for `|i−j| = m`) and `log(4 sin²((t_i − t_j)/2))`.
pub(crate) fn kress_tables(n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = n / 2;
    let hf = h as f64;
    let mut r = vec![0.0; n];
    let mut lg = vec![0.0; n];
    for (m, (rm, lm)) in r.iter_mut().zip(lg.iter_mut()).enumerate() {
        let t = PI * m as f64 / hf;
        let mut s = 0.0;
        for k in 1..h {
            s += (k as f64 * t).cos() / k as f64;
        }
        *rm = -2.0 * PI / hf * s - PI / (hf * hf) * (hf * t).cos();
        if m > 0 {
            *lm = (4.0 * (0.5 * t).sin().powi(2)).ln();
        }
    }
    (r, lg)
}

fn tri_index(n: usize, i: usize, j: usize) -> usize {
    // i < j
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

fn pair_bessel(grid: &BoundaryGrid, kernel: &Kernel) -> Vec<Jy01> {
    let n = grid.len();
    let k = kernel.wavenumber();
    (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let xi = grid.nodes[i];
            (i + 1..n).map(move |j| {
                let xj = grid.nodes[j];
                let r = kernel.metric_distance([xi[0] - xj[0], xi[1] - xj[1]]);
                jy01(k * r)
            })
        })
        .collect()
}

/// Assemble the requested operators from `src` to `tgt`.
pub fn assemble_layers(src: &BoundaryGrid, tgt: &BoundaryGrid, kernel: &Kernel, want: Want) -> Layers {
    if src.id == tgt.id && src.len() == tgt.len() {
        self_layers(src, kernel, want)
    } else {
        cross_layers(src, tgt, kernel, want)
    }
}

fn alloc(flag: bool, n: usize, m: usize) -> Option<CMat> {
    flag.then(|| Mat::zeros(n, m))
}

fn self_layers(g: &BoundaryGrid, kernel: &Kernel, want: Want) -> Layers {
    let n = g.len();
    assert!(n >= 4 && n % 2 == 0);
    let (rw, lg) = kress_tables(n);
    let w = g.weight;
    let c = kernel.prefactor();
    let laplace = kernel.family == Family::Laplace2d;
    let k = kernel.wavenumber();
    let bes = if laplace { Vec::new() } else { pair_bessel(g, kernel) };
    let mut s = alloc(want.single, n, n);
    let mut d = alloc(want.double, n, n);
    let mut kp = alloc(want.adjoint, n, n);
    let c4pi = c / (4.0 * PI);

    for i in 0..n {
        let xi = g.nodes[i];
        for j in 0..n {
            if i == j {
                continue;
            }
            let m = (i + n - j) % n;
            let (r_w, l) = (rw[m], lg[m]);
            let xj = g.nodes[j];
            let dv = [xi[0] - xj[0], xi[1] - xj[1]];
            let sj = g.speed[j];
            let dn_y = dv[0] * g.normals[j][0] + dv[1] * g.normals[j][1];
            let dn_x = -(dv[0] * g.normals[i][0] + dv[1] * g.normals[i][1]);
            if laplace {
                let r2 = dv[0] * dv[0] + dv[1] * dv[1];
                if let Some(s) = s.as_mut() {
                    let m1 = -c4pi * sj;
                    let full = -c / (4.0 * PI) * r2.ln() * sj;
                    s[(i, j)] = C64::new(r_w * m1 + w * (full - m1 * l), 0.0);
                }
                let f = c / (2.0 * PI) / r2 * sj * w;
                if let Some(d) = d.as_mut() {
                    d[(i, j)] = C64::new(f * dn_y, 0.0);
                }
                if let Some(kp) = kp.as_mut() {
                    kp[(i, j)] = C64::new(f * dn_x, 0.0);
                }
                continue;
            }
            let b = if i < j { bes[tri_index(n, i, j)] } else { bes[tri_index(n, j, i)] };
            let r = kernel.metric_distance(dv);
            if let Some(s) = s.as_mut() {
                let full = c * 0.25 * I * b.h0() * sj;
                let m1 = -c4pi * b.j0 * sj;
                s[(i, j)] = r_w * m1 + w * (full - m1 * l);
            }
            if d.is_some() || kp.is_some() {
                let h = c * 0.25 * I * k * b.h1() / r * sj;
                let j1 = -c4pi * k * b.j1 / r * sj;
                if let Some(d) = d.as_mut() {
                    d[(i, j)] = r_w * j1 * dn_y + w * (h * dn_y - j1 * dn_y * l);
                }
                if let Some(kp) = kp.as_mut() {
                    kp[(i, j)] = r_w * j1 * dn_x + w * (h * dn_x - j1 * dn_x * l);
                }
            }
        }
        // diagonal limits
        let si = g.speed[i];
        let t = g.tangents[i];
        let sa2 = kernel.metric_norm2(t);
        let curv = g.second[i][0] * g.normals[i][0] + g.second[i][1] * g.normals[i][1];
        let dl = C64::new(w * c * curv / (4.0 * PI * sa2) * si, 0.0);
        if let Some(s) = s.as_mut() {
            let m1 = -c4pi * si;
            let m2 = if laplace {
                C64::new(-c / (2.0 * PI) * sa2.sqrt().ln() * si, 0.0)
            } else {
                c * single_layer_diagonal(k, sa2.sqrt()) * si
            };
            s[(i, i)] = rw[0] * m1 + w * m2;
        }
        if let Some(d) = d.as_mut() {
            d[(i, i)] = dl;
        }
        if let Some(kp) = kp.as_mut() {
            kp[(i, i)] = dl;
        }
    }
    Layers { s, d, kp }
}

fn cross_layers(src: &BoundaryGrid, tgt: &BoundaryGrid, kernel: &Kernel, want: Want) -> Layers {
    let (nt, ns) = (tgt.len(), src.len());
    let w = src.weight;
    let c = kernel.prefactor();
    let laplace = kernel.family == Family::Laplace2d;
    let k = kernel.wavenumber();
    let rows: Vec<Vec<[C64; 3]>> = (0..nt)
        .into_par_iter()
        .map(|i| {
            let xi = tgt.nodes[i];
            (0..ns)
                .map(|j| {
                    let xj = src.nodes[j];
                    let dv = [xi[0] - xj[0], xi[1] - xj[1]];
                    let sj = src.speed[j] * w;
                    let dn_y = dv[0] * src.normals[j][0] + dv[1] * src.normals[j][1];
                    let dn_x = -(dv[0] * tgt.normals[i][0] + dv[1] * tgt.normals[i][1]);
                    if laplace {
                        let r2 = dv[0] * dv[0] + dv[1] * dv[1];
                        let f = c / (2.0 * PI) / r2 * sj;
                        [
                            C64::new(-c / (4.0 * PI) * r2.ln() * sj, 0.0),
                            C64::new(f * dn_y, 0.0),
                            C64::new(f * dn_x, 0.0),
                        ]
                    } else {
                        let r = kernel.metric_distance(dv);
                        let b = jy01(k * r);
                        let h = c * 0.25 * I * k * b.h1() / r * sj;
                        [c * 0.25 * I * b.h0() * sj, h * dn_y, h * dn_x]
                    }
                })
                .collect()
        })
        .collect();
    let fill = |flag: bool, idx: usize| flag.then(|| Mat::from_fn(nt, ns, |i, j| rows[i][j][idx]));
    Layers { s: fill(want.single, 0), d: fill(want.double, 1), kp: fill(want.adjoint, 2) }
}

fn wrap(m: CMat, src: &BoundaryGrid, tgt: &BoundaryGrid, kernel: &Kernel, kind: OperatorKind) -> BoundaryOperator {
    BoundaryOperator { matrix: m, source: src.id, target: tgt.id, kernel: *kernel, kind }
}

pub fn assemble_single_layer(src: &BoundaryGrid, tgt: &BoundaryGrid, kernel: &Kernel) -> BoundaryOperator {
    let l = assemble_layers(src, tgt, kernel, Want { single: true, ..Want::default() });
    wrap(l.s.unwrap(), src, tgt, kernel, OperatorKind::SingleLayer)
}

pub fn assemble_double_layer(src: &BoundaryGrid, tgt: &BoundaryGrid, kernel: &Kernel) -> BoundaryOperator {
    let l = assemble_layers(src, tgt, kernel, Want { double: true, ..Want::default() });
    wrap(l.d.unwrap(), src, tgt, kernel, OperatorKind::DoubleLayer)
}

/// The operator with kernel `∂_{ν_x} G(x, y)`. Its adjoint in the `L²(∂Ω)`
/// product is the double layer with conjugated kernel (see [`conjugate_adjoint`]).
pub fn assemble_adjoint_double_layer(src: &BoundaryGrid, tgt: &BoundaryGrid, kernel: &Kernel) -> BoundaryOperator {
    let l = assemble_layers(src, tgt, kernel, Want { adjoint: true, ..Want::default() });
    wrap(l.kp.unwrap(), src, tgt, kernel, OperatorKind::AdjointDoubleLayer)
}

/// Elementwise conjugate: the `L²` adjoint of `D^ω` is the conjugate of the
/// assembled `∂_{ν_x}G^ω` operator, and vice versa.
pub fn conjugate_adjoint(op: &BoundaryOperator) -> CMat {
    Mat::from_fn(op.matrix.nrows(), op.matrix.ncols(), |i, j| op.matrix[(i, j)].conj())
}

/// Test densities `cos(m t)`, `sin(m t)` for `m ≤ 4` on the parameter circle.
fn trig_densities(g: &BoundaryGrid) -> Vec<Vec<C64>> {
    let mut out = Vec::new();
    for m in 0..=4 {
        let mf = m as f64;
        out.push(g.t.iter().map(|t| C64::new((mf * t).cos(), 0.0)).collect());
        if m > 0 {
            out.push(g.t.iter().map(|t| C64::new((mf * t).sin(), 0.0)).collect());
        }
    }
    out
}

/// Max-norm residual of the Calderón identity `S K' = K S` on smooth densities.
pub fn calderon_residual(grid: &BoundaryGrid, kernel: &Kernel) -> f64 {
    let l = assemble_layers(grid, grid, kernel, Want::ALL);
    let (s, d, kp) = (l.s.unwrap(), l.d.unwrap(), l.kp.unwrap());
    let mut res = 0.0f64;
    for f in trig_densities(grid) {
        let a = mat_vec(s.as_ref(), &mat_vec(kp.as_ref(), &f));
        let b = mat_vec(d.as_ref(), &mat_vec(s.as_ref(), &f));
        for (x, y) in a.iter().zip(&b) {
            res = res.max((x - y).norm());
        }
    }
    res
}
