//! Parametric curves, Nyström grids and inclusion scenes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::hash::{DefaultHasher, Hash, Hasher};

pub type Point = [f64; 2];

/// Reference shapes, all parametrized counterclockwise on `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    /// `(cos t + 0.65 cos 2t - 0.65, 1.5 sin t)` scaled by `size`.
    Kite { size: f64 },
    /// `r(t) = radius (1 + amplitude cos(arms t))`.
    Star { radius: f64, amplitude: f64, arms: u32 },
}

/// A shape placed in the plane: `p(t) = center + scale · R(orientation) q(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametricCurve {
    pub shape: Shape,
    #[serde(default)]
    pub center: Point,
    #[serde(default)]
    pub orientation: f64,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl ParametricCurve {
    pub fn new(shape: Shape) -> Self {
        Self { shape, center: [0.0, 0.0], orientation: 0.0, scale: 1.0 }
    }

    pub fn circle(radius: f64) -> Self {
        Self::new(Shape::Circle { radius })
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        Self::new(Shape::Ellipse { a, b })
    }

    pub fn kite() -> Self {
        Self::new(Shape::Kite { size: 1.0 })
    }

    pub fn star(radius: f64, amplitude: f64, arms: u32) -> Self {
        Self::new(Shape::Star { radius, amplitude, arms })
    }

    pub fn with_center(mut self, center: Point) -> Self {
        self.center = center;
        self
    }

    pub fn with_orientation(mut self, orientation: f64) -> Self {
        self.orientation = orientation;
        self
    }

    /// The affine image `z + s·self`.
    pub fn scaled_translated(&self, s: f64, z: Point) -> Self {
        Self {
            shape: self.shape,
            center: [z[0] + s * self.center[0], z[1] + s * self.center[1]],
            orientation: self.orientation,
            scale: s * self.scale,
        }
    }

    pub fn check(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return bad("scale", "must be positive");
        }
        match self.shape {
            Shape::Circle { radius } if !(radius > 0.0) => bad("radius", "must be positive"),
            Shape::Ellipse { a, b } if !(a > 0.0 && b > 0.0) => bad("a/b", "must be positive"),
            Shape::Kite { size } if !(size > 0.0) => bad("size", "must be positive"),
            Shape::Star { radius, amplitude, arms } => {
                if !(radius > 0.0) {
                    bad("radius", "must be positive")
                } else if !(amplitude.abs() < 1.0) {
                    bad("amplitude", "must satisfy |amplitude| < 1")
                } else if arms == 0 {
                    bad("arms", "must be at least 1")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    fn local(&self, t: f64) -> [Point; 3] {
        let (s, c) = t.sin_cos();
        match self.shape {
            Shape::Circle { radius: r } => [[r * c, r * s], [-r * s, r * c], [-r * c, -r * s]],
            Shape::Ellipse { a, b } => [[a * c, b * s], [-a * s, b * c], [-a * c, -b * s]],
            Shape::Kite { size: k } => {
                let (s2, c2) = (2.0 * t).sin_cos();
                [
                    [k * (c + 0.65 * c2 - 0.65), k * 1.5 * s],
                    [k * (-s - 1.3 * s2), k * 1.5 * c],
                    [k * (-c - 2.6 * c2), -k * 1.5 * s],
                ]
            }
            Shape::Star { radius, amplitude, arms } => {
                let m = arms as f64;
                let (sm, cm) = (m * t).sin_cos();
                let r = radius * (1.0 + amplitude * cm);
                let r1 = -radius * amplitude * m * sm;
                let r2 = -radius * amplitude * m * m * cm;
                [
                    [r * c, r * s],
                    [r1 * c - r * s, r1 * s + r * c],
                    [r2 * c - 2.0 * r1 * s - r * c, r2 * s + 2.0 * r1 * c - r * s],
                ]
            }
        }
    }

    /// Position, first and second derivative at parameter `t`.
    pub fn eval(&self, t: f64) -> [Point; 3] {
        let (so, co) = self.orientation.sin_cos();
        let rot = |p: Point| [self.scale * (co * p[0] - so * p[1]), self.scale * (so * p[0] + co * p[1])];
        let [p, d1, d2] = self.local(t);
        let p = rot(p);
        [[p[0] + self.center[0], p[1] + self.center[1]], rot(d1), rot(d2)]
    }

    fn fingerprint(&self, n: usize) -> u64 {
        let mut h = DefaultHasher::new();
        let bits = |h: &mut DefaultHasher, x: f64| x.to_bits().hash(h);
        match self.shape {
            Shape::Circle { radius } => {
                0u8.hash(&mut h);
                bits(&mut h, radius);
            }
            Shape::Ellipse { a, b } => {
                1u8.hash(&mut h);
                bits(&mut h, a);
                bits(&mut h, b);
            }
            Shape::Kite { size } => {
                2u8.hash(&mut h);
                bits(&mut h, size);
            }
            Shape::Star { radius, amplitude, arms } => {
                3u8.hash(&mut h);
                bits(&mut h, radius);
                bits(&mut h, amplitude);
                arms.hash(&mut h);
            }
        }
        for x in [self.center[0], self.center[1], self.orientation, self.scale] {
            bits(&mut h, x);
        }
        n.hash(&mut h);
        h.finish()
    }
}

/// Nyström discretization of a closed curve at `t_k = 2πk/N`.
#[derive(Debug, Clone)]
pub struct BoundaryGrid {
    pub id: u64,
    pub curve: ParametricCurve,
    pub t: Vec<f64>,
    pub nodes: Vec<Point>,
    /// `p'(t_k)`.
    pub tangents: Vec<Point>,
    /// `p''(t_k)`.
    pub second: Vec<Point>,
    pub normals: Vec<Point>,
    pub speed: Vec<f64>,
    /// Trapezoid weight `2π/N` (identical for every node).
    pub weight: f64,
}

/// Build the grid with `n` nodes. `n` must be even and at least 4.
pub fn build_grid(curve: &ParametricCurve, n: usize) -> Result<BoundaryGrid> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidGridSize(n, 4));
    }
    curve.check()?;
    let mut g = BoundaryGrid {
        id: curve.fingerprint(n),
        curve: *curve,
        t: Vec::with_capacity(n),
        nodes: Vec::with_capacity(n),
        tangents: Vec::with_capacity(n),
        second: Vec::with_capacity(n),
        normals: Vec::with_capacity(n),
        speed: Vec::with_capacity(n),
        weight: 2.0 * PI / n as f64,
    };
    let mut min_speed = f64::INFINITY;
    for k in 0..n {
        let t = 2.0 * PI * k as f64 / n as f64;
        let [p, d1, d2] = curve.eval(t);
        let s = d1[0].hypot(d1[1]);
        min_speed = min_speed.min(s);
        g.t.push(t);
        g.nodes.push(p);
        g.tangents.push(d1);
        g.second.push(d2);
        g.normals.push(if s > 0.0 { [d1[1] / s, -d1[0] / s] } else { [0.0, 0.0] });
        g.speed.push(s);
    }
    if !(min_speed >= 1e-12) {
        return Err(Error::NonRegularCurve { min_speed });
    }
    Ok(g)
}

impl BoundaryGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature weights of `∫ f dσ`: `weight · speed_k`.
    pub fn arc_weights(&self) -> Vec<f64> {
        self.speed.iter().map(|s| s * self.weight).collect()
    }

    pub fn length(&self) -> f64 {
        self.speed.iter().sum::<f64>() * self.weight
    }

    /// Signed area `½∮(x dy − y dx)`; positive for outward normals.
    pub fn area(&self) -> f64 {
        let mut a = 0.0;
        for (p, d) in self.nodes.iter().zip(&self.tangents) {
            a += p[0] * d[1] - p[1] * d[0];
        }
        0.5 * a * self.weight
    }

    /// Largest distance between consecutive nodes.
    pub fn max_spacing(&self) -> f64 {
        let n = self.len();
        (0..n).map(|k| dist(self.nodes[k], self.nodes[(k + 1) % n])).fold(0.0, f64::max)
    }

    /// Minimal distance from `z` to the nodes.
    pub fn distance_to(&self, z: Point) -> f64 {
        self.nodes.iter().map(|&p| dist(p, z)).fold(f64::INFINITY, f64::min)
    }

    /// Winding-number test against the node polygon.
    pub fn contains(&self, z: Point) -> bool {
        let n = self.len();
        let mut inside = false;
        for k in 0..n {
            let a = self.nodes[k];
            let b = self.nodes[(k + 1) % n];
            if (a[1] > z[1]) != (b[1] > z[1]) {
                let x = a[0] + (z[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if x > z[0] {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Checks that the node polygon has no crossing non-adjacent segments.
    pub fn check_simple(&self) -> Result<()> {
        let n = self.len();
        let seg = |k: usize| (self.nodes[k], self.nodes[(k + 1) % n]);
        let h = self.max_spacing();
        for i in 0..n {
            let (a, b) = seg(i);
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = seg(j);
                // cheap rejection before the exact test
                if dist(a, c) > 4.0 * h {
                    continue;
                }
                if segments_cross(a, b, c, d) {
                    return Err(Error::SelfIntersecting(i, j));
                }
            }
        }
        Ok(())
    }

    /// Node-by-node affine image `z + s·self`.
    pub fn map_affine(&self, s: f64, z: Point) -> BoundaryGrid {
        let curve = self.curve.scaled_translated(s, z);
        BoundaryGrid {
            id: curve.fingerprint(self.len()),
            curve,
            t: self.t.clone(),
            nodes: self.nodes.iter().map(|p| [z[0] + s * p[0], z[1] + s * p[1]]).collect(),
            tangents: self.tangents.iter().map(|p| [s * p[0], s * p[1]]).collect(),
            second: self.second.iter().map(|p| [s * p[0], s * p[1]]).collect(),
            normals: self.normals.clone(),
            speed: self.speed.iter().map(|v| s * v).collect(),
            weight: self.weight,
        }
    }

    /// Every other node; a valid grid of the same curve with `N/2` nodes.
    pub fn coarsen(&self) -> Result<BoundaryGrid> {
        build_grid(&self.curve, self.len() / 2)
    }
}

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// A symmetric 2×2 matrix stored row-major.
pub type Sym2 = [[f64; 2]; 2];

/// Smallest eigenvalue of a symmetric 2×2 matrix.
pub fn sym2_min_eig(a: &Sym2) -> f64 {
    let m = 0.5 * (a[0][0] + a[1][1]);
    let d = (0.25 * (a[0][0] - a[1][1]).powi(2) + a[0][1] * a[0][1]).sqrt();
    m - d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionSpec {
    pub center: Point,
    pub shape: ParametricCurve,
    pub gamma_d: Sym2,
}

impl InclusionSpec {
    pub fn check(&self) -> Result<()> {
        self.shape.check()?;
        let a = &self.gamma_d;
        if (a[0][1] - a[1][0]).abs() > 1e-14 * (a[0][1].abs() + 1.0) || !(sym2_min_eig(a) > 0.0) {
            return Err(Error::NotSpd);
        }
        Ok(())
    }

    /// The scaled inclusion `z + εB`.
    pub fn placed(&self, eps: f64) -> ParametricCurve {
        self.shape.scaled_translated(eps, self.center)
    }

    pub fn trace(&self) -> f64 {
        self.gamma_d[0][0] + self.gamma_d[1][1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub outer: ParametricCurve,
    pub gamma1: f64,
    pub gamma2: f64,
    #[serde(default)]
    pub inclusions: Vec<InclusionSpec>,
    #[serde(default)]
    pub epsilon: f64,
}

/// Measured margins of a valid scene.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneReport {
    /// Minimal gap between pairs of scaled inclusions (∞ if fewer than two).
    pub min_pair_gap: f64,
    /// `dist(z_i, ∂Ω)` per inclusion.
    pub center_distances: Vec<f64>,
    /// Minimal distance from each scaled inclusion to `∂Ω`.
    pub boundary_gaps: Vec<f64>,
    /// Safety margin used (3 × max node spacing).
    pub margin: f64,
}

/// Nodes per curve used by [`validate_scene`].
pub const VALIDATION_NODES: usize = 256;

pub fn validate_scene(scene: &Scene) -> Result<SceneReport> {
    let positive = |name, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter { name, reason: format!("must be positive, got {v}") })
        }
    };
    positive("gamma1", scene.gamma1)?;
    positive("gamma2", scene.gamma2)?;
    if !(scene.epsilon >= 0.0) {
        return Err(Error::InvalidParameter { name: "epsilon", reason: "must be nonnegative".into() });
    }
    let outer = build_grid(&scene.outer, VALIDATION_NODES)?;
    outer.check_simple()?;
    for inc in &scene.inclusions {
        inc.check()?;
    }
    let mut margin = outer.max_spacing();
    let mut grids = Vec::new();
    if scene.epsilon > 0.0 {
        for inc in &scene.inclusions {
            let g = build_grid(&inc.placed(scene.epsilon), VALIDATION_NODES)?;
            g.check_simple()?;
            margin = margin.max(g.max_spacing());
            grids.push(g);
        }
    }
    margin *= 3.0;
    let mut center_distances = Vec::new();
    let mut boundary_gaps = Vec::new();
    for (i, inc) in scene.inclusions.iter().enumerate() {
        let d = outer.distance_to(inc.center);
        if !outer.contains(inc.center) || d <= margin {
            return Err(Error::BoundaryTooClose { index: i, distance: d });
        }
        center_distances.push(d);
        let gap = match grids.get(i) {
            Some(g) => {
                let gap = g.nodes.iter().map(|&p| outer.distance_to(p)).fold(f64::INFINITY, f64::min);
                if g.nodes.iter().any(|&p| !outer.contains(p)) || gap <= margin {
                    return Err(Error::BoundaryTooClose { index: i, distance: gap });
                }
                gap
            }
            None => d,
        };
        boundary_gaps.push(gap);
    }
    let mut min_pair_gap = f64::INFINITY;
    for i in 0..grids.len() {
        for j in i + 1..grids.len() {
            let (a, b) = (&grids[i], &grids[j]);
            let gap = a.nodes.iter().map(|&p| b.distance_to(p)).fold(f64::INFINITY, f64::min);
            let nested = a.contains(b.nodes[0]) || b.contains(a.nodes[0]);
            if nested || gap <= margin {
                return Err(Error::Overlap(i, j, if nested { 0.0 } else { gap }));
            }
            min_pair_gap = min_pair_gap.min(gap);
        }
    }
    Ok(SceneReport { min_pair_gap, center_distances, boundary_gaps, margin })
}
