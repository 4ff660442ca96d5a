//! Contour-integral eigensolver for analytic matrix families `z ↦ T(z)`.
//!
//! Poles of `T(z)⁻¹` inside a circle are extracted from the first two moments
//! of `T⁻¹V` (Beyn's method) and polished by Newton steps on the smallest
//! singular triple of `T`. Inner products are the family's weighted ones.

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, frobenius, svd, CMat, Lu};
use faer::Mat;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// An analytic family of square matrices.
pub trait OperatorFamily: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, z: C64) -> Result<CMat>;
    /// Quadrature weights of the inner product used for null vectors.
    fn weights(&self) -> Vec<f64> {
        vec![1.0; self.dim()]
    }
}

/// `T(z) = B − zI`.
#[derive(Debug, Clone)]
pub struct LinearFamily {
    pub b: CMat,
}

impl OperatorFamily for LinearFamily {
    fn dim(&self) -> usize {
        self.b.nrows()
    }

    fn eval(&self, z: C64) -> Result<CMat> {
        let n = self.b.nrows();
        Ok(Mat::from_fn(n, n, |i, j| self.b[(i, j)] - if i == j { z } else { C64::new(0.0, 0.0) }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_probes")]
    pub probes: usize,
}

fn default_nodes() -> usize {
    64
}

fn default_probes() -> usize {
    8
}

impl ContourSpec {
    pub fn new(center: C64, radius: f64) -> Self {
        Self { center: [center.re, center.im], radius, nodes: 64, probes: 8 }
    }

    pub fn center(&self) -> C64 {
        C64::new(self.center[0], self.center[1])
    }

    pub fn check(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParameter { name: "radius", reason: format!("{}", self.radius) });
        }
        if self.nodes < 8 {
            return Err(Error::InvalidParameter { name: "nodes", reason: "need at least 8".into() });
        }
        if self.probes == 0 {
            return Err(Error::InvalidParameter { name: "probes", reason: "need at least 1".into() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Relative singular value cutoff for the moment matrix.
    pub rank_tol: f64,
    /// Relative cutoff defining the numerical null space of `T(λ)`.
    pub null_tol: f64,
    /// Required `σ_min(T(λ)) / ‖T(λ)‖` for a converged result.
    pub residual_tol: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Relative step of the forward difference for `T'`.
    pub fd_step: f64,
    /// Roots closer than `contact_tol · radius` to the contour trigger a re-radius.
    pub contact_tol: f64,
    pub cond_max: f64,
    /// Relative distance under which refined roots are merged.
    pub cluster_tol: f64,
    pub seed: u64,
    /// Report roots with `Im λ ≥ 0` (or on the real axis) as spurious. On the
    /// transfer operator these are zeros of its Bessel factors, not resonances.
    pub lower_half_plane: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rank_tol: 1e-8,
            null_tol: 1e-6,
            residual_tol: 1e-8,
            newton_tol: 1e-12,
            max_newton: 30,
            fd_step: 1e-7,
            contact_tol: 1e-3,
            cond_max: 1e14,
            cluster_tol: 1e-8,
            seed: 0x5eed,
            lower_half_plane: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResonanceResult {
    pub lambda: C64,
    /// Dimension of the numerical null space of `T(λ)`.
    pub m_geo: usize,
    /// Number of moment eigenvalues that converged to `λ`.
    pub p: usize,
    pub alpha: usize,
    /// Null vectors, orthonormal in the weighted product (columns).
    pub null_vectors: CMat,
    /// `σ_min(T(λ))`.
    pub residual: f64,
    /// `‖T(λ)‖₂`.
    pub norm: f64,
    /// Singular values of `T(λ)` from the bottom (smallest first, at most 4).
    pub lowest_singular: Vec<f64>,
    pub newton_steps: usize,
}

/// Moments of `T⁻¹V` on a circle without the extraction step.
pub struct ProjectorData {
    pub contour: ContourSpec,
    /// `A_p = (1/2πi)∮ ((z − c)/r)^p T⁻¹(z) V dz`, `p = 0, 1`.
    pub a0: CMat,
    pub a1: CMat,
    pub probes: CMat,
    /// `r · max_k ‖T⁻¹(z_k)V‖`, the scale against which ranks are judged.
    pub scale: f64,
    /// Largest condition estimate met on the contour.
    pub max_condition: f64,
    lus: Vec<Lu>,
    nodes: Vec<C64>,
}

impl ProjectorData {
    pub fn rank(&self, rank_tol: f64) -> Result<usize> {
        let s = svd(self.a0.as_ref())?.s;
        Ok(s.iter().filter(|&&v| v > rank_tol * self.scale).count())
    }

    /// Approximation of the projector `E = (1/2πi)∮ T⁻¹ dz` applied to `x`.
    pub fn apply_projector(&self, x: &CMat) -> CMat {
        let m = self.nodes.len();
        let r = self.contour.radius;
        let mut acc = Mat::<C64>::zeros(x.nrows(), x.ncols());
        for (k, lu) in self.lus.iter().enumerate() {
            let th = theta(k, m);
            let y = lu.solve(x.as_ref());
            let f = C64::from_polar(r / m as f64, th);
            acc += &y * faer::Scale(f);
        }
        acc
    }
}

fn theta(k: usize, m: usize) -> f64 {
    2.0 * PI * (k as f64 + 0.5) / m as f64
}

fn random_block(n: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut v = Mat::<C64>::zeros(n, cols);
    for j in 0..cols {
        for i in 0..n {
            v[(i, j)] = C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
        }
    }
    v
}

fn col_norm_max(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Contour moments `A_0`, `A_1` of `T⁻¹V` with a seeded random probe block.
pub fn spectral_projector<F: OperatorFamily + ?Sized>(
    family: &F,
    contour: &ContourSpec,
    opts: &SolverOptions,
) -> Result<ProjectorData> {
    contour.check()?;
    let n = family.dim();
    let m = contour.nodes;
    let c = contour.center();
    let r = contour.radius;
    let nodes: Vec<C64> = (0..m).map(|k| c + C64::from_polar(r, theta(k, m))).collect();
    let lus: Vec<(Lu, f64)> = nodes
        .par_iter()
        .map(|&z| {
            let t = family.eval(z)?;
            let norm = frobenius(t.as_ref());
            Ok((Lu::new(t.as_ref())?, norm))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let probes = random_block(n, contour.probes.min(n), &mut rng);
    let (a0, a1, scale, max_condition) = moments(&lus, &nodes, &probes, contour, opts)?;
    Ok(ProjectorData {
        contour: *contour,
        a0,
        a1,
        probes,
        scale,
        max_condition,
        lus: lus.into_iter().map(|(l, _)| l).collect(),
        nodes,
    })
}

type Moments = (CMat, CMat, f64, f64);

fn moments(lus: &[(Lu, f64)], nodes: &[C64], v: &CMat, contour: &ContourSpec, opts: &SolverOptions) -> Result<Moments> {
    let m = nodes.len();
    let r = contour.radius;
    let vn = {
        let mut mn = f64::INFINITY;
        for j in 0..v.ncols() {
            mn = mn.min((0..v.nrows()).map(|i| v[(i, j)].norm_sqr()).sum::<f64>().sqrt());
        }
        mn
    };
    let sols: Vec<CMat> = lus.par_iter().map(|(lu, _)| lu.solve(v.as_ref())).collect();
    let mut a0 = Mat::<C64>::zeros(v.nrows(), v.ncols());
    let mut a1 = Mat::<C64>::zeros(v.nrows(), v.ncols());
    let mut big = 0.0f64;
    let mut max_cond = 0.0f64;
    for (k, y) in sols.iter().enumerate() {
        let yn = col_norm_max(y);
        if !yn.is_finite() {
            return Err(Error::ContourThroughPole { z: nodes[k], cond: f64::INFINITY });
        }
        // ‖T‖ · ‖T⁻¹v‖/‖v‖ bounds the condition number from below
        let cond = lus[k].1 * yn / vn;
        max_cond = max_cond.max(cond);
        if cond > opts.cond_max {
            return Err(Error::ContourThroughPole { z: nodes[k], cond });
        }
        big = big.max(yn);
        let th = theta(k, m);
        a0 += y * faer::Scale(C64::from_polar(r / m as f64, th));
        a1 += y * faer::Scale(C64::from_polar(r / m as f64, 2.0 * th));
    }
    Ok((a0, a1, r * big, max_cond))
}

/// Raw eigenvalues of the moment pencil, as points `λ = c + rμ`, plus the rank.
fn extract(data: &ProjectorData, opts: &SolverOptions) -> Result<(Vec<C64>, usize)> {
    let d = svd(data.a0.as_ref())?;
    let k = d.s.iter().filter(|&&v| v > opts.rank_tol * data.scale).count();
    if k == 0 {
        return Ok((Vec::new(), 0));
    }
    let n = data.a0.nrows();
    let uk = Mat::from_fn(n, k, |i, j| d.u[(i, j)]);
    let wk = Mat::from_fn(d.v.nrows(), k, |i, j| d.v[(i, j)] / d.s[j]);
    let b = uk.adjoint() * &data.a1 * &wk;
    let mu = eigenvalues(b.as_ref())?;
    let c = data.contour.center();
    Ok((mu.into_iter().map(|m| c + m * data.contour.radius).collect(), k))
}

/// `W^{1/2} T W^{-1/2}`.
fn weighted_eval<F: OperatorFamily + ?Sized>(family: &F, z: C64, sw: &[f64]) -> Result<CMat> {
    let t = family.eval(z)?;
    Ok(Mat::from_fn(t.nrows(), t.ncols(), |i, j| t[(i, j)] * (sw[i] / sw[j])))
}

/// Newton iteration on `g(λ) = uᴴ T(λ) v` with `u, v` the smallest singular pair.
pub fn refine<F: OperatorFamily + ?Sized>(family: &F, start: C64, opts: &SolverOptions) -> Result<(C64, usize)> {
    let sw: Vec<f64> = family.weights().iter().map(|w| w.sqrt()).collect();
    let mut z = start;
    for step in 0..opts.max_newton {
        let t = weighted_eval(family, z, &sw)?;
        let lu = Lu::new(t.as_ref())?;
        let (sigma, v, u) = lu.smallest_singular(60);
        if !sigma.is_finite() {
            return Err(Error::NoConvergence { start });
        }
        let h = opts.fd_step * z.norm().max(1.0);
        let th = weighted_eval(family, z + h, &sw)?;
        let tv = crate::linalg::mat_vec(t.as_ref(), &v);
        let thv = crate::linalg::mat_vec(th.as_ref(), &v);
        let g: C64 = u.iter().zip(&tv).map(|(a, b)| a.conj() * b).sum();
        let gh: C64 = u.iter().zip(&thv).map(|(a, b)| a.conj() * b).sum();
        let dg = (gh - g) / h;
        if dg.norm() == 0.0 || !dg.is_finite() {
            return Err(Error::NoConvergence { start });
        }
        let delta = -g / dg;
        z += delta;
        if !z.is_finite() || (z - start).norm() > 1e3 * (1.0 + start.norm()) {
            return Err(Error::NoConvergence { start });
        }
        if delta.norm() <= opts.newton_tol * z.norm().max(1.0) {
            return Ok((z, step + 1));
        }
    }
    Err(Error::NoConvergence { start })
}

/// Null-space analysis of `T(λ)` in the weighted metric.
pub fn analyze_point<F: OperatorFamily + ?Sized>(family: &F, lambda: C64, opts: &SolverOptions) -> Result<ResonanceResult> {
    let w = family.weights();
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let t = weighted_eval(family, lambda, &sw)?;
    let d = svd(t.as_ref())?;
    let norm = d.s.first().copied().unwrap_or(0.0);
    let n = d.s.len();
    let m_geo = d.s.iter().filter(|&&s| s < opts.null_tol * norm).count().max(1);
    let null_vectors = Mat::from_fn(t.ncols(), m_geo, |i, j| d.v[(i, n - 1 - j)] / sw[i]);
    let lowest_singular = d.s.iter().rev().take(4).copied().collect();
    Ok(ResonanceResult {
        lambda,
        m_geo,
        p: m_geo,
        alpha: 1,
        null_vectors,
        residual: d.s[n - 1],
        norm,
        lowest_singular,
        newton_steps: 0,
    })
}

/// Ascent estimate from algebraic count `p` and geometric multiplicity.
pub fn ascent(p: usize, m_geo: usize) -> usize {
    if p <= m_geo {
        1
    } else if m_geo == 1 {
        p
    } else {
        p - m_geo + 1
    }
}

/// Outcome of a search in one circle.
#[derive(Debug, Clone, Default)]
pub struct SearchReport {
    pub results: Vec<ResonanceResult>,
    /// Candidates that did not converge.
    pub failures: Vec<Error>,
    /// Converged roots dropped because `Im λ ≥ 0` (real-axis artifacts).
    pub spurious: Vec<C64>,
    /// Rank of the moment matrix (total algebraic count).
    pub rank: usize,
    pub contour: Option<ContourSpec>,
    pub max_condition: f64,
}

/// Find all resonances inside the circle `region`.
pub fn find_resonances<F: OperatorFamily + ?Sized>(family: &F, region: &ContourSpec, opts: &SolverOptions) -> Result<SearchReport> {
    let mut contour = *region;
    let mut last_err = None;
    for _attempt in 0..4 {
        match search_once(family, &contour, opts) {
            Ok((rep, contact)) if !contact => return Ok(rep),
            Ok(_) => {}
            Err(e @ Error::ContourThroughPole { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
        contour.radius *= 1.05;
    }
    match last_err {
        Some(e) => Err(e),
        None => search_once(family, &contour, opts).map(|(r, _)| r),
    }
}

fn search_once<F: OperatorFamily + ?Sized>(family: &F, contour: &ContourSpec, opts: &SolverOptions) -> Result<(SearchReport, bool)> {
    let mut data = spectral_projector(family, contour, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = family.dim();
    let (mut raw, mut rank) = extract(&data, opts)?;
    // saturated probe block: widen it and reuse the factorizations
    while rank >= data.probes.ncols() && data.probes.ncols() < n {
        let extra = random_block(n, data.probes.ncols().min(n - data.probes.ncols()), &mut rng);
        let mut v = Mat::<C64>::zeros(n, data.probes.ncols() + extra.ncols());
        for j in 0..data.probes.ncols() {
            for i in 0..n {
                v[(i, j)] = data.probes[(i, j)];
            }
        }
        for j in 0..extra.ncols() {
            for i in 0..n {
                v[(i, data.probes.ncols() + j)] = extra[(i, j)];
            }
        }
        let lus: Vec<(Lu, f64)> = std::mem::take(&mut data.lus).into_iter().map(|l| (l, 0.0)).collect();
        let (a0, a1, scale, _) = moments(&lus, &data.nodes, &v, contour, &SolverOptions { cond_max: f64::INFINITY, ..*opts })?;
        data.lus = lus.into_iter().map(|(l, _)| l).collect();
        data.a0 = a0;
        data.a1 = a1;
        data.scale = scale;
        data.probes = v;
        (raw, rank) = extract(&data, opts)?;
    }
    let c = contour.center();
    let r = contour.radius;
    let mut report = SearchReport { rank, contour: Some(*contour), max_condition: data.max_condition, ..Default::default() };
    let mut refined: Vec<(C64, usize)> = Vec::new();
    for &z in &raw {
        if (z - c).norm() > 1.5 * r {
            continue;
        }
        match refine(family, z, opts) {
            Ok(zs) => refined.push(zs),
            Err(e) => report.failures.push(e),
        }
    }
    // cluster refined roots; each cluster counts its raw members
    let mut clusters: Vec<(C64, usize, usize)> = Vec::new();
    for (z, steps) in refined {
        let tol = opts.cluster_tol * z.norm().max(1.0);
        match clusters.iter_mut().find(|(w, _, _)| (*w - z).norm() <= tol.max(1e-7 * z.norm().max(1.0))) {
            Some(cl) => cl.1 += 1,
            None => clusters.push((z, 1, steps)),
        }
    }
    let mut contact = false;
    for (z, p, steps) in clusters {
        let dist = (z - c).norm();
        if (dist - r).abs() < opts.contact_tol * r {
            contact = true;
        }
        if dist >= r {
            continue;
        }
        if opts.lower_half_plane && (z.im >= 0.0 || z.im.abs() < 1e-9 * z.norm().max(1.0)) {
            report.spurious.push(z);
            continue;
        }
        let mut res = analyze_point(family, z, opts)?;
        if res.residual > opts.residual_tol * res.norm {
            report.failures.push(Error::NoConvergence { start: z });
            continue;
        }
        res.p = p.max(res.m_geo);
        res.alpha = ascent(res.p, res.m_geo);
        res.newton_steps = steps;
        // null vectors come out weighted-orthonormal from the SVD
        report.results.push(res);
    }
    report.results.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re).then(a.lambda.im.total_cmp(&b.lambda.im)));
    Ok((report, contact))
}

/// Axis-aligned search rectangle `[re_min, re_max] × [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl Rectangle {
    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re[0] && z.re <= self.re[1] && z.im >= self.im[0] && z.im <= self.im[1]
    }

    /// Circles of radius `rho` whose union covers the rectangle.
    pub fn tiling(&self, rho: f64) -> Vec<ContourSpec> {
        let step = rho * std::f64::consts::SQRT_2;
        let nx = (((self.re[1] - self.re[0]) / step).ceil() as usize).max(1);
        let ny = (((self.im[1] - self.im[0]) / step).ceil() as usize).max(1);
        let (dx, dy) = ((self.re[1] - self.re[0]) / nx as f64, (self.im[1] - self.im[0]) / ny as f64);
        let rad = 0.5 * dx.hypot(dy) * 1.0001;
        let mut out = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let c = C64::new(self.re[0] + (i as f64 + 0.5) * dx, self.im[0] + (j as f64 + 0.5) * dy);
                out.push(ContourSpec::new(c, rad));
            }
        }
        out
    }
}

/// Search a rectangle by tiling it with circles and merging duplicates.
pub fn find_in_rectangle<F: OperatorFamily + ?Sized>(family: &F, rect: &Rectangle, rho: f64, nodes: usize, probes: usize, opts: &SolverOptions) -> Result<SearchReport> {
    let mut all = SearchReport::default();
    for mut c in rect.tiling(rho) {
        c.nodes = nodes;
        c.probes = probes;
        let rep = find_resonances(family, &c, opts)?;
        all.rank += rep.rank;
        all.failures.extend(rep.failures);
        all.max_condition = all.max_condition.max(rep.max_condition);
        for z in rep.spurious {
            if !all.spurious.iter().any(|w| (w - z).norm() < 1e-7 * z.norm().max(1.0)) {
                all.spurious.push(z);
            }
        }
        for r in rep.results {
            if !rect.contains(r.lambda) {
                continue;
            }
            if all.results.iter().any(|q| (q.lambda - r.lambda).norm() < 1e-7 * r.lambda.norm().max(1.0)) {
                continue;
            }
            all.results.push(r);
        }
    }
    all.results.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re).then(a.lambda.im.total_cmp(&b.lambda.im)));
    Ok(all)
}

/// One point of a resonance track.
#[derive(Debug, Clone)]
pub struct TrackPoint {
    pub epsilon: f64,
    pub contour: ContourSpec,
    /// Resonances found near `λ_0`, or the reason none were accepted.
    pub outcome: std::result::Result<Vec<ResonanceResult>, Error>,
}

/// For each `ε`, search a circle of radius `max(5|Δ_pred|, 1e-4)` around `λ_0`
/// and check the count (with multiplicity) against `m_geo`.
pub fn track_resonance<F, G>(
    make_family: G,
    lambda0: C64,
    m_geo: usize,
    eps_list: &[f64],
    predicted: &dyn Fn(f64) -> f64,
    opts: &SolverOptions,
) -> Vec<TrackPoint>
where
    F: OperatorFamily,
    G: Fn(f64) -> Result<F>,
{
    eps_list
        .iter()
        .map(|&eps| {
            let radius = (5.0 * predicted(eps)).max(1e-4);
            let contour = ContourSpec::new(lambda0, radius);
            let outcome = make_family(eps).and_then(|fam| {
                let rep = find_resonances(&fam, &contour, opts)?;
                let found: usize = rep.results.iter().map(|r| r.m_geo).sum();
                if found != m_geo {
                    return Err(Error::CountMismatch { center: lambda0, found, expected: m_geo });
                }
                Ok(rep.results)
            });
            TrackPoint { epsilon: eps, contour, outcome }
        })
        .collect()
}

/// Largest principal angle (radians) between two subspaces given by possibly
/// non-orthonormal column bases, in the weighted product.
pub fn principal_angle(a: &CMat, b: &CMat, w: &[f64]) -> Result<f64> {
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let orth = |m: &CMat| -> Result<CMat> {
        let scaled = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * sw[i]);
        Ok(svd(scaled.as_ref())?.u)
    };
    let (qa, qb) = (orth(a)?, orth(b)?);
    let c = qa.adjoint() * &qb;
    let s = svd(c.as_ref())?.s;
    let smallest = s.iter().copied().fold(f64::INFINITY, f64::min).min(1.0);
    Ok(smallest.acos())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(eigs: &[C64]) -> LinearFamily {
        // non-normal B = P diag(eigs) P⁻¹ with a well-conditioned P
        let n = eigs.len();
        let p = Mat::from_fn(n, n, |i, j| {
            C64::new(if i == j { 2.0 } else { 0.0 } + 0.3 * ((i * 3 + j) as f64).sin(), 0.2 * ((i + 2 * j) as f64).cos())
        });
        let pinv = crate::linalg::inverse(p.as_ref()).unwrap();
        let d = Mat::from_fn(n, n, |i, j| if i == j { eigs[i] } else { C64::new(0.0, 0.0) });
        LinearFamily { b: &p * &d * &pinv }
    }

    fn eigs6() -> Vec<C64> {
        vec![
            C64::new(1.0, -0.5),
            C64::new(1.4, -0.8),
            C64::new(0.7, -0.9),
            C64::new(3.0, -0.5),
            C64::new(-2.0, -1.0),
            C64::new(1.0, 2.0),
        ]
    }

    #[test]
    fn linear_family_inside_circle() {
        let fam = synthetic(&eigs6());
        let c = ContourSpec::new(C64::new(1.0, -0.7), 0.6);
        let rep = find_resonances(&fam, &c, &SolverOptions::default()).unwrap();
        assert_eq!(rep.rank, 3);
        assert_eq!(rep.results.len(), 3);
        for e in &eigs6()[..3] {
            assert!(rep.results.iter().any(|r| (r.lambda - e).norm() < 1e-10), "{e}");
        }
        assert!(rep.results.iter().all(|r| r.m_geo == 1 && r.alpha == 1));
    }

    #[test]
    fn empty_contour_has_rank_zero() {
        let fam = synthetic(&eigs6());
        let c = ContourSpec::new(C64::new(5.0, -3.0), 0.5);
        let data = spectral_projector(&fam, &c, &SolverOptions::default()).unwrap();
        assert_eq!(data.rank(1e-8).unwrap(), 0);
        assert!(crate::linalg::max_abs(data.a0.as_ref()) < 1e-8);
        assert!(find_resonances(&fam, &c, &SolverOptions::default()).unwrap().results.is_empty());
    }

    #[test]
    fn node_doubling_is_stable() {
        let fam = synthetic(&eigs6());
        let mut c = ContourSpec::new(C64::new(1.0, -0.7), 0.6);
        let opts = SolverOptions { max_newton: 0, ..Default::default() };
        let data = spectral_projector(&fam, &c, &opts).unwrap();
        let (a, _) = extract(&data, &opts).unwrap();
        c.nodes = 128;
        let data2 = spectral_projector(&fam, &c, &opts).unwrap();
        let (b, _) = extract(&data2, &opts).unwrap();
        for z in &a {
            assert!(b.iter().any(|w| (w - z).norm() < 1e-9));
        }
    }

    #[test]
    fn defective_eigenvalue_reports_ascent() {
        // Jordan block of size 2 at 1 − i plus a simple eigenvalue far away
        let b = Mat::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) | (1, 1) => C64::new(1.0, -1.0),
            (0, 1) => C64::new(1.0, 0.0),
            (2, 2) => C64::new(4.0, -1.0),
            _ => C64::new(0.0, 0.0),
        });
        let fam = LinearFamily { b };
        let c = ContourSpec::new(C64::new(1.0, -1.0), 0.5);
        let data = spectral_projector(&fam, &c, &SolverOptions::default()).unwrap();
        assert_eq!(data.rank(1e-8).unwrap(), 2);
        assert_eq!(ascent(2, 1), 2);
    }

    #[test]
    fn probe_rank_saturation_is_widened() {
        let eigs: Vec<C64> = (0..10).map(|k| C64::new(1.0 + 0.05 * k as f64, -0.5 - 0.03 * k as f64)).collect();
        let fam = synthetic(&eigs);
        let c = ContourSpec { probes: 2, ..ContourSpec::new(C64::new(1.2, -0.6), 0.5) };
        let rep = find_resonances(&fam, &c, &SolverOptions::default()).unwrap();
        assert_eq!(rep.results.len(), 10);
    }

    #[test]
    fn rank_is_probe_invariant() {
        let fam = synthetic(&eigs6());
        let c = ContourSpec::new(C64::new(1.0, -0.7), 0.6);
        for seed in [1, 2, 3] {
            let opts = SolverOptions { seed, ..Default::default() };
            assert_eq!(spectral_projector(&fam, &c, &opts).unwrap().rank(1e-8).unwrap(), 3);
        }
    }

    #[test]
    fn tiling_covers_rectangle() {
        let r = Rectangle { re: [0.5, 4.0], im: [-1.5, -0.01] };
        let tiles = r.tiling(0.6);
        for i in 0..=20 {
            for j in 0..=20 {
                let z = C64::new(0.5 + 3.5 * i as f64 / 20.0, -1.5 + 1.49 * j as f64 / 20.0);
                assert!(tiles.iter().any(|c| (z - c.center()).norm() <= c.radius));
            }
        }
    }
}
