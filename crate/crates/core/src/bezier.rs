//! Cubic Bézier strokes: evaluation, fitting to traced skeleton pixels,
//! control-point perturbation and rasterization.

use std::collections::VecDeque;
use std::ops::{Add, Mul, Sub};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::BinaryMask;
use crate::scalar::Scalar;
use crate::skeleton::PixelComponent;

/// Point in pixel coordinates (`x` column, `y` row).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// `self + (other - self) * s`
    pub fn lerp(self, other: Self, s: T) -> Self {
        self + (other - self) * s
    }
}

impl<T: Scalar> Add for Point2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Point2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

/// Bernstein weights of the cubic basis at `t`.
#[inline]
fn bernstein<T: Scalar>(t: T) -> [T; 4] {
    let three = T::lit(3.0);
    let s = T::one() - t;
    [s * s * s, three * t * s * s, three * t * t * s, t * t * t]
}

/// Cubic Bézier curve with endpoints `p0`, `p3` and pivots `p1`, `p2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicBezier<T> {
    pub p0: Point2<T>,
    pub p1: Point2<T>,
    pub p2: Point2<T>,
    pub p3: Point2<T>,
}

impl<T: Scalar> CubicBezier<T> {
    pub fn new(p0: Point2<T>, p1: Point2<T>, p2: Point2<T>, p3: Point2<T>) -> Result<Self> {
        let c = Self { p0, p1, p2, p3 };
        if !c.points().iter().all(|p| p.is_finite()) {
            return Err(Error::Domain("control point is not finite".into()));
        }
        Ok(c)
    }

    /// Straight curve with pivots at 1/3 and 2/3 of the chord.
    pub fn chord(p0: Point2<T>, p3: Point2<T>) -> Self {
        let third = T::one() / T::lit(3.0);
        Self {
            p0,
            p1: p0.lerp(p3, third),
            p2: p0.lerp(p3, T::one() - third),
            p3,
        }
    }

    pub fn points(&self) -> [Point2<T>; 4] {
        [self.p0, self.p1, self.p2, self.p3]
    }

    /// Point at `t ∈ [0, 1]`.
    pub fn eval(&self, t: T) -> Result<Point2<T>> {
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::Domain(format!("curve parameter {t} outside [0, 1]")));
        }
        Ok(self.at(t))
    }

    /// Point at `t` without the domain check.
    #[inline]
    pub fn at(&self, t: T) -> Point2<T> {
        let [b0, b1, b2, b3] = bernstein(t);
        Point2::new(
            b0 * self.p0.x + b1 * self.p1.x + b2 * self.p2.x + b3 * self.p3.x,
            b0 * self.p0.y + b1 * self.p1.y + b2 * self.p2.y + b3 * self.p3.y,
        )
    }

    /// First derivative with respect to `t`.
    #[inline]
    pub fn derivative(&self, t: T) -> Point2<T> {
        let three = T::lit(3.0);
        let two = T::lit(2.0);
        let s = T::one() - t;
        (self.p1 - self.p0) * (three * s * s)
            + (self.p2 - self.p1) * (three * two * s * t)
            + (self.p3 - self.p2) * (three * t * t)
    }

    /// Applies `f` to every control point.
    pub fn map_points(&self, f: impl Fn(Point2<T>) -> Point2<T>) -> Self {
        Self {
            p0: f(self.p0),
            p1: f(self.p1),
            p2: f(self.p2),
            p3: f(self.p3),
        }
    }
}

/// Parameters of the displacement law and the size of the augmented set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbParams {
    /// Row-count control unit.
    pub c: usize,
    /// Displacement increment per control unit.
    pub k_step: f64,
    pub num_variants: usize,
    pub seed: u64,
}

impl Default for PerturbParams {
    fn default() -> Self {
        Self {
            c: 10,
            k_step: 10.0,
            num_variants: 5,
            seed: 0,
        }
    }
}

impl PerturbParams {
    pub fn validate(&self) -> Result<()> {
        if self.c == 0 {
            return Err(Error::InvalidConfig("perturb.c must be >= 1".into()));
        }
        if !(self.k_step >= 0.0 && self.k_step.is_finite()) {
            return Err(Error::InvalidConfig("perturb.k_step must be >= 0".into()));
        }
        if self.num_variants == 0 {
            return Err(Error::InvalidConfig(
                "perturb.num_variants must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Perturbation standard deviation `floor(row_count / C) * K_step`.
pub fn displacement_magnitude(row_count: usize, params: &PerturbParams) -> f64 {
    (row_count / params.c) as f64 * params.k_step
}

/// Adds isotropic Gaussian noise with per-axis standard deviation `theta` to
/// `p1` and `p2`. Endpoints are untouched. Always consumes four normal draws.
pub fn perturb<T: Scalar, R: Rng + ?Sized>(curve: &CubicBezier<T>, theta: T, rng: &mut R) -> CubicBezier<T> {
    let mut draw = || T::lit(rng.sample::<f64, _>(StandardNormal));
    let d = [draw(), draw(), draw(), draw()];
    let mut out = *curve;
    if theta > T::zero() {
        out.p1 = out.p1 + Point2::new(d[0], d[1]) * theta;
        out.p2 = out.p2 + Point2::new(d[2], d[3]) * theta;
    }
    out
}

/// Traces a path through a component and keeps every `interval`-th pixel,
/// always including both path ends.
///
/// The path is the shortest 8-connected route between two far-apart pixels
/// (double-sweep breadth-first search), which is the stroke end to end for
/// skeleton curves.
pub fn sample_component<T: Scalar>(comp: &PixelComponent, interval: usize) -> Result<Vec<Point2<T>>> {
    if interval == 0 {
        return Err(Error::Domain("sampling interval must be >= 1".into()));
    }
    if comp.len() < 2 {
        return Err(Error::DegenerateComponent);
    }
    let path = trace_path(comp);
    if path.len() < 2 {
        return Err(Error::DegenerateComponent);
    }
    let last = path.len() - 1;
    let mut idx: Vec<usize> = (0..=last).step_by(interval).collect();
    if *idx.last().expect("non-empty") != last {
        idx.push(last);
    }
    Ok(idx
        .into_iter()
        .map(|i| {
            let (x, y) = path[i];
            Point2::new(T::from_usize_lossy(x), T::from_usize_lossy(y))
        })
        .collect())
}

fn trace_path(comp: &PixelComponent) -> Vec<(usize, usize)> {
    let bb = comp.bounding_box();
    let (bw, bh) = (bb.x_max - bb.x_min + 1, bb.y_max - bb.y_min + 1);
    let mut index = vec![usize::MAX; bw * bh];
    for (i, &(x, y)) in comp.pixels().iter().enumerate() {
        index[(y - bb.y_min) * bw + (x - bb.x_min)] = i;
    }
    let pixels = comp.pixels();
    let neighbours = |i: usize| {
        let (x, y) = pixels[i];
        let (lx, ly) = ((x - bb.x_min) as i64, (y - bb.y_min) as i64);
        let index = &index;
        (-1i64..=1)
            .flat_map(move |dy| (-1i64..=1).map(move |dx| (dx, dy)))
            .filter(|&d| d != (0, 0))
            .filter_map(move |(dx, dy)| {
                let (nx, ny) = (lx + dx, ly + dy);
                if nx < 0 || ny < 0 || nx as usize >= bw || ny as usize >= bh {
                    return None;
                }
                let j = index[ny as usize * bw + nx as usize];
                (j != usize::MAX).then_some(j)
            })
    };
    let bfs = |start: usize| {
        let mut parent = vec![usize::MAX; pixels.len()];
        let mut dist = vec![usize::MAX; pixels.len()];
        let mut queue = VecDeque::from([start]);
        dist[start] = 0;
        let mut far = start;
        while let Some(i) = queue.pop_front() {
            if dist[i] > dist[far] {
                far = i;
            }
            for j in neighbours(i) {
                if dist[j] == usize::MAX {
                    dist[j] = dist[i] + 1;
                    parent[j] = i;
                    queue.push_back(j);
                }
            }
        }
        (far, parent)
    };
    let (a, _) = bfs(0);
    let (b, parent) = bfs(a);
    let mut path = vec![pixels[b]];
    let mut cur = b;
    while cur != a {
        cur = parent[cur];
        path.push(pixels[cur]);
    }
    // start at the end that comes first in row-major order
    if (path[0].1, path[0].0) > (path[path.len() - 1].1, path[path.len() - 1].0) {
        path.reverse();
    }
    path
}

/// Normalized cumulative chord length of a polyline.
pub fn chord_length_parameters<T: Scalar>(points: &[Point2<T>]) -> Vec<T> {
    let mut acc = T::zero();
    let mut t = Vec::with_capacity(points.len());
    t.push(T::zero());
    for w in points.windows(2) {
        acc = acc + (w[1] - w[0]).norm();
        t.push(acc);
    }
    let total = acc;
    for v in t.iter_mut() {
        *v = *v / total;
    }
    if let Some(last) = t.last_mut() {
        *last = T::one();
    }
    t
}

fn check_fit_input<T: Scalar>(points: &[Point2<T>]) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "fitting needs at least 2 points, got {}",
            points.len()
        )));
    }
    if !points.iter().all(|p| p.is_finite()) {
        return Err(Error::Domain("non-finite point".into()));
    }
    if points.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Domain("consecutive points must be distinct".into()));
    }
    Ok(())
}

/// Least-squares pivots for fixed parameters with pinned endpoints.
fn solve_pivots<T: Scalar>(
    points: &[Point2<T>],
    params: &[T],
    p0: Point2<T>,
    p3: Point2<T>,
) -> Option<(Point2<T>, Point2<T>)> {
    let (mut a11, mut a12, mut a22) = (T::zero(), T::zero(), T::zero());
    let zero = Point2::new(T::zero(), T::zero());
    let (mut r1, mut r2) = (zero, zero);
    for (&p, &t) in points.iter().zip(params) {
        let [b0, b1, b2, b3] = bernstein(t);
        let rest = p - p0 * b0 - p3 * b3;
        a11 = a11 + b1 * b1;
        a12 = a12 + b1 * b2;
        a22 = a22 + b2 * b2;
        r1 = r1 + rest * b1;
        r2 = r2 + rest * b2;
    }
    let det = a11 * a22 - a12 * a12;
    if !(det > a11 * a22 * T::epsilon() * T::lit(1e3)) || det <= T::zero() {
        return None;
    }
    let p1 = (r1 * a22 - r2 * a12) * (T::one() / det);
    let p2 = (r2 * a11 - r1 * a12) * (T::one() / det);
    Some((p1, p2))
}

fn fit_cost<T: Scalar>(curve: &CubicBezier<T>, points: &[Point2<T>], params: &[T]) -> T {
    points
        .iter()
        .zip(params)
        .map(|(&p, &t)| {
            let r = curve.at(t) - p;
            r.dot(r)
        })
        .sum()
}

/// Solves the dense 4×4 system `a x = b` by Gaussian elimination with partial pivoting.
fn solve4<T: Scalar>(mut a: [[T; 4]; 4], mut b: [T; 4]) -> Option<[T; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if !(a[piv][col].abs() > T::min_positive_value()) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] = a[row][k] - f * a[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [T::zero(); 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for k in row + 1..4 {
            s = s - a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

const REFINE_MAX_ITERS: usize = 200;

/// Squared residual below which a fit counts as exact: machine precision at
/// the scale of the point cloud.
fn exact_floor<T: Scalar>(points: &[Point2<T>]) -> T {
    let extent = points
        .iter()
        .map(|&p| (p - points[0]).norm())
        .fold(T::zero(), T::max)
        .max(T::one());
    (T::epsilon() * extent).powi(2)
}

/// Levenberg-Marquardt over the pivots and the interior curve parameters
/// jointly. The parameter block is diagonal, so each step reduces to a 4×4
/// Schur complement system.
fn refine<T: Scalar>(points: &[Point2<T>], params: &mut [T], curve: &mut CubicBezier<T>) {
    let n = points.len();
    if n < 4 {
        return;
    }
    let floor = exact_floor(points);
    let mut cost = fit_cost(curve, points, params);
    let mut lambda = T::lit(1e-3);
    let mut trial = params.to_vec();
    for _ in 0..REFINE_MAX_ITERS {
        if cost <= floor {
            break;
        }
        let mut a = [[T::zero(); 4]; 4];
        let mut g = [T::zero(); 4];
        let mut cs = Vec::with_capacity(n);
        for i in 1..n - 1 {
            let t = params[i];
            let [_, b1, b2, _] = bernstein(t);
            let r = curve.at(t) - points[i];
            let d = curve.derivative(t);
            let jp = [b1, b2];
            for (u, &bu) in jp.iter().enumerate() {
                for (v, &bv) in jp.iter().enumerate() {
                    a[2 * u][2 * v] = a[2 * u][2 * v] + bu * bv;
                    a[2 * u + 1][2 * v + 1] = a[2 * u + 1][2 * v + 1] + bu * bv;
                }
                g[2 * u] = g[2 * u] + bu * r.x;
                g[2 * u + 1] = g[2 * u + 1] + bu * r.y;
            }
            let c = [b1 * d.x, b1 * d.y, b2 * d.x, b2 * d.y];
            cs.push((c, d.dot(d), d.dot(r)));
        }
        let mut improved = false;
        for _ in 0..16 {
            let damp = T::one() + lambda;
            let mut s = a;
            let mut rhs = g.map(|v| -v);
            for k in 0..4 {
                s[k][k] = s[k][k] * damp + T::min_positive_value();
            }
            let denoms: Vec<T> = cs
                .iter()
                .map(|&(_, dd, _)| dd * damp + T::epsilon() * T::epsilon())
                .collect();
            for (&(c, _, gt), &den) in cs.iter().zip(&denoms) {
                for u in 0..4 {
                    for v in 0..4 {
                        s[u][v] = s[u][v] - c[u] * c[v] / den;
                    }
                    rhs[u] = rhs[u] + c[u] * gt / den;
                }
            }
            let Some(dp) = solve4(s, rhs) else {
                lambda = lambda * T::lit(10.0);
                continue;
            };
            let mut cand = *curve;
            cand.p1 = cand.p1 + Point2::new(dp[0], dp[1]);
            cand.p2 = cand.p2 + Point2::new(dp[2], dp[3]);
            for (i, (&(c, _, gt), &den)) in cs.iter().zip(&denoms).enumerate() {
                let cdp = c[0] * dp[0] + c[1] * dp[1] + c[2] * dp[2] + c[3] * dp[3];
                let dt = -(gt + cdp) / den;
                trial[i + 1] = (params[i + 1] + dt).max(T::zero()).min(T::one());
            }
            let new_cost = fit_cost(&cand, points, &trial);
            if new_cost < cost {
                let rel = (cost - new_cost) / cost;
                *curve = cand;
                params.copy_from_slice(&trial);
                cost = new_cost;
                lambda = (lambda * T::lit(0.3)).max(T::lit(1e-15));
                improved = rel > T::epsilon();
                break;
            }
            lambda = lambda * T::lit(10.0);
        }
        if !improved {
            break;
        }
    }
}

/// Resolution of the parameter grid used by [`monotone_projection`].
const PROJECTION_GRID: usize = 1024;
/// Reassignment rounds tried after each local refinement.
const REASSIGN_ROUNDS: usize = 8;

/// Parameters minimizing the summed squared distance of each point to the
/// curve over a uniform grid, subject to `t` being nondecreasing along the
/// point sequence with both ends pinned. Solved exactly by dynamic
/// programming, so a curve traced in the wrong order around a turn gets
/// untangled where a local step would stay stuck.
fn monotone_projection<T: Scalar>(curve: &CubicBezier<T>, points: &[Point2<T>]) -> Vec<T> {
    let g = PROJECTION_GRID;
    let n = points.len();
    let grid: Vec<T> = (0..g)
        .map(|k| T::from_usize_lossy(k) / T::from_usize_lossy(g - 1))
        .collect();
    let at: Vec<Point2<T>> = grid.iter().map(|&t| curve.at(t)).collect();
    let dist = |i: usize, k: usize| {
        let r = at[k] - points[i];
        r.dot(r)
    };
    let inf = T::infinity();
    let mut prev: Vec<T> = (0..g).map(|k| if k == 0 { T::zero() } else { inf }).collect();
    let mut back = vec![0u32; n * g];
    for i in 1..n {
        let mut best = (inf, 0usize);
        let mut cur = vec![inf; g];
        for k in 0..g {
            if prev[k] < best.0 {
                best = (prev[k], k);
            }
            let pinned = i == n - 1 && k != g - 1;
            if !pinned && best.0 < inf {
                cur[k] = best.0 + dist(i, k);
                back[i * g + k] = best.1 as u32;
            }
        }
        prev = cur;
    }
    let mut params = vec![T::zero(); n];
    let mut k = g - 1;
    for i in (1..n).rev() {
        params[i] = grid[k];
        k = back[i * g + k] as usize;
    }
    params
}

/// Segments of the arc-length table used by [`arc_length_parameters`].
const ARC_TABLE: usize = 512;

/// Parameters placing each point at its chord-length fraction of the arc
/// length of `curve`. Points sampled at even spacing along a stroke sit near
/// these parameters once the curve shape is roughly right.
fn arc_length_parameters<T: Scalar>(curve: &CubicBezier<T>, points: &[Point2<T>]) -> Vec<T> {
    let step = T::one() / T::from_usize_lossy(ARC_TABLE);
    let mut table = Vec::with_capacity(ARC_TABLE + 1);
    table.push(T::zero());
    let mut prev = curve.p0;
    for k in 1..=ARC_TABLE {
        let p = curve.at(T::from_usize_lossy(k) * step);
        table.push(table[k - 1] + (p - prev).norm());
        prev = p;
    }
    let total = table[ARC_TABLE];
    let chord = chord_length_parameters(points);
    if !(total > T::zero()) {
        return chord;
    }
    let mut out: Vec<T> = chord
        .iter()
        .map(|&u| {
            let target = u * total;
            let k = table.partition_point(|&a| a < target).clamp(1, ARC_TABLE);
            let span = table[k] - table[k - 1];
            let f = if span > T::zero() {
                ((target - table[k - 1]) / span).max(T::zero()).min(T::one())
            } else {
                T::zero()
            };
            (T::from_usize_lossy(k - 1) + f) * step
        })
        .collect();
    out[0] = T::zero();
    if let Some(end) = out.last_mut() {
        *end = T::one();
    }
    out
}

/// Strict fit: endpoints pinned, pivots from the chord-length least-squares
/// solve, then refined jointly with the point parameters.
///
/// Fails with [`Error::SingularFit`] when the chord-length normal equations
/// are rank deficient (fewer than three informative points).
pub fn fit_checked<T: Scalar>(points: &[Point2<T>]) -> Result<CubicBezier<T>> {
    check_fit_input(points)?;
    let p0 = points[0];
    let p3 = points[points.len() - 1];
    let mut best: Option<(T, CubicBezier<T>)> = None;
    let chord = chord_length_parameters(points);
    let uniform: Vec<T> = (0..points.len())
        .map(|i| T::from_usize_lossy(i) / T::from_usize_lossy(points.len() - 1))
        .collect();
    for start in [chord, uniform] {
        let mut params = start;
        let Some((p1, p2)) = solve_pivots(points, &params, p0, p3) else {
            continue;
        };
        let mut curve = CubicBezier { p0, p1, p2, p3 };
        refine(points, &mut params, &mut curve);
        let mut cost = fit_cost(&curve, points, &params);
        for round in 0..REASSIGN_ROUNDS {
            if cost <= exact_floor(points) {
                break;
            }
            let mut trial = if round % 2 == 0 {
                arc_length_parameters(&curve, points)
            } else {
                monotone_projection(&curve, points)
            };
            let Some((q1, q2)) = solve_pivots(points, &trial, p0, p3) else {
                break;
            };
            let mut cand = CubicBezier { p0, p1: q1, p2: q2, p3 };
            refine(points, &mut trial, &mut cand);
            let c = fit_cost(&cand, points, &trial);
            if c < cost {
                (curve, cost) = (cand, c);
            } else if round > 0 {
                break;
            }
        }
        if best.as_ref().map_or(true, |(c, _)| cost < *c) {
            best = Some((cost, curve));
        }
    }
    best.map(|(_, c)| c).ok_or(Error::SingularFit)
}

/// Like [`fit_checked`], falling back to [`CubicBezier::chord`] when the
/// normal equations are singular.
pub fn fit<T: Scalar>(points: &[Point2<T>]) -> Result<CubicBezier<T>> {
    match fit_checked(points) {
        Err(Error::SingularFit) => Ok(CubicBezier::chord(points[0], points[points.len() - 1])),
        other => other,
    }
}

/// Upper bound on the curve length between parameters `t` and `t + dt` is
/// `3 * max_leg * dt`; this many segments keeps samples within 1 px.
const MAX_RENDER_SEGMENTS: f64 = 1e6;

/// Rasterizes the curve onto `canvas` with a square brush of Chebyshev
/// radius `(thickness - 1) / 2`. Pixels outside the canvas are clipped.
pub fn render_into<T: Scalar>(curve: &CubicBezier<T>, canvas: &mut BinaryMask, thickness: usize) -> Result<()> {
    if thickness == 0 {
        return Err(Error::Domain("thickness must be >= 1".into()));
    }
    if !curve.points().iter().all(|p| p.is_finite()) {
        return Err(Error::Domain("control point is not finite".into()));
    }
    let r = ((thickness - 1) / 2) as i64;
    let max_leg = [
        curve.p1 - curve.p0,
        curve.p2 - curve.p1,
        curve.p3 - curve.p2,
    ]
    .iter()
    .map(|d| d.norm().to_f64_lossy())
    .fold(0.0, f64::max);
    let segments = (3.0 * max_leg).ceil().clamp(1.0, MAX_RENDER_SEGMENTS) as usize;
    let mut prev = None;
    for i in 0..=segments {
        let t = T::from_usize_lossy(i) / T::from_usize_lossy(segments);
        let p = curve.at(t);
        let px = (p.x.to_f64_lossy() + 0.5).floor() as i64;
        let py = (p.y.to_f64_lossy() + 0.5).floor() as i64;
        if prev == Some((px, py)) {
            continue;
        }
        prev = Some((px, py));
        for dy in -r..=r {
            for dx in -r..=r {
                canvas.set_clipped(px + dx, py + dy);
            }
        }
    }
    Ok(())
}

/// Returns a copy of `canvas` with the curve drawn in.
pub fn render<T: Scalar>(curve: &CubicBezier<T>, canvas: &BinaryMask, thickness: usize) -> Result<BinaryMask> {
    let mut out = canvas.clone();
    render_into(curve, &mut out, thickness)?;
    Ok(out)
}
