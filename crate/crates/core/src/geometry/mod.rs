//! Strictly convex obstacles (balls, ellipses, ellipsoids), curvature
//! queries, pairwise distances and the no-eclipse condition.
//!
//! Obstacles are quadrics stored as center + semi-axes + orthonormal
//! orientation, so normals, principal curvatures and support functions are
//! all closed form.

mod hull;

pub use hull::{convex_hull, ConvexPolytope};

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tol::Tolerances;

pub type Point<const D: usize> = SVector<f64, D>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("projection source point is degenerate (equidistant medial set)")]
    DegeneratePoint,
    #[error("point is off the obstacle boundary (implicit residual {0:.3e})")]
    PointOffBoundary(f64),
    #[error("iteration did not converge within the budget")]
    NoConvergence,
    #[error("obstacle meets the convex hull of a pair (margin {0:.3e})")]
    EclipseViolation(f64),
    #[error("billiard needs at least 3 obstacles, got {0}")]
    TooFewObstacles(usize),
    #[error("obstacles {0} and {1} are not disjoint")]
    NotDisjoint(usize, usize),
    #[error("invalid obstacle parameters: {0}")]
    BadObstacle(String),
}

/// Tag describing how an obstacle was constructed; all kinds share the same
/// quadric representation internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObstacleKind {
    Ball,
    Ellipse,
    Ellipsoid,
}

/// A strictly convex quadric obstacle in R^D: the set
/// `{ c + R y : sum (y_i / a_i)^2 <= 1 }` with `R` orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle<const D: usize> {
    kind: ObstacleKind,
    center: Point<D>,
    semi_axes: SVector<f64, D>,
    /// Columns are the principal axis directions.
    orientation: SMatrix<f64, D, D>,
}

impl<const D: usize> Obstacle<D> {
    pub fn ball(center: Point<D>, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0) {
            return Err(GeometryError::BadObstacle(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            kind: ObstacleKind::Ball,
            center,
            semi_axes: SVector::repeat(radius),
            orientation: SMatrix::identity(),
        })
    }

    pub fn kind(&self) -> ObstacleKind {
        self.kind
    }

    pub fn center(&self) -> Point<D> {
        self.center
    }

    pub fn semi_axes(&self) -> SVector<f64, D> {
        self.semi_axes
    }

    pub fn orientation(&self) -> SMatrix<f64, D, D> {
        self.orientation
    }

    /// Radius of the smallest ball centered at `center` containing the body.
    pub fn circumradius(&self) -> f64 {
        self.semi_axes.max()
    }

    fn to_body(&self, p: &Point<D>) -> Point<D> {
        self.orientation.transpose() * (p - self.center)
    }

    fn to_world(&self, y: &Point<D>) -> Point<D> {
        self.center + self.orientation * y
    }

    /// Implicit equation residual `sum (y_i/a_i)^2 - 1`; zero on the boundary,
    /// negative inside.
    pub fn implicit(&self, p: &Point<D>) -> f64 {
        let y = self.to_body(p);
        (0..D).map(|i| (y[i] / self.semi_axes[i]).powi(2)).sum::<f64>() - 1.0
    }

    pub fn contains(&self, p: &Point<D>) -> bool {
        self.implicit(p) <= 0.0
    }

    /// Support function `h(w) = max { <x, w> : x in K }` for unit `w`.
    pub fn support(&self, w: &Point<D>) -> f64 {
        let wb = self.orientation.transpose() * w;
        let scaled = wb.component_mul(&self.semi_axes);
        self.center.dot(w) + scaled.norm()
    }

    /// Boundary point attaining the support value in direction `w`.
    pub fn support_point(&self, w: &Point<D>) -> Point<D> {
        let wb = self.orientation.transpose() * w;
        let scaled = wb.component_mul(&self.semi_axes);
        let u = scaled / scaled.norm();
        self.to_world(&u.component_mul(&self.semi_axes))
    }
}

impl Obstacle<2> {
    pub fn ellipse(center: Point<2>, a: f64, b: f64, rotation: f64) -> Result<Self, GeometryError> {
        if !(a >= b && b > 0.0) {
            return Err(GeometryError::BadObstacle(format!(
                "ellipse needs a >= b > 0, got a={a}, b={b}"
            )));
        }
        let (s, c) = rotation.sin_cos();
        Ok(Self {
            kind: if (a - b).abs() == 0.0 {
                ObstacleKind::Ball
            } else {
                ObstacleKind::Ellipse
            },
            center,
            semi_axes: SVector::<f64, 2>::new(a, b),
            orientation: SMatrix::<f64, 2, 2>::new(c, -s, s, c),
        })
    }
}

impl Obstacle<3> {
    pub fn ellipsoid(
        center: Point<3>,
        semi_axes: [f64; 3],
        orientation: SMatrix<f64, 3, 3>,
    ) -> Result<Self, GeometryError> {
        let [a, b, c] = semi_axes;
        if !(a >= b && b >= c && c > 0.0) {
            return Err(GeometryError::BadObstacle(format!(
                "ellipsoid needs a >= b >= c > 0, got {a}, {b}, {c}"
            )));
        }
        let ortho_err = (orientation.transpose() * orientation - SMatrix::<f64, 3, 3>::identity())
            .norm();
        if ortho_err > 1e-9 {
            return Err(GeometryError::BadObstacle(format!(
                "orientation frame is not orthonormal (residual {ortho_err:.3e})"
            )));
        }
        Ok(Self {
            kind: ObstacleKind::Ellipsoid,
            center,
            semi_axes: SVector::<f64, 3>::new(a, b, c),
            orientation,
        })
    }
}

/// Outcome of [`normal_and_curvatures`]: unit outward normal, principal
/// curvatures sorted ascending, and the matching principal direction frame.
#[derive(Debug, Clone)]
pub struct SurfaceData<const D: usize> {
    pub normal: Point<D>,
    pub curvatures: Vec<f64>,
    pub frame: Vec<Point<D>>,
}

/// Closest boundary point of `k` to `p`.
///
/// Works for interior and exterior points; the only excluded inputs are
/// points on the degenerate medial set (e.g. a ball's center).
pub fn project_to_boundary<const D: usize>(
    k: &Obstacle<D>,
    p: &Point<D>,
    tol: &Tolerances,
) -> Result<Point<D>, GeometryError> {
    let y = k.to_body(p);
    if y.norm() < 1e-14 * k.circumradius() {
        return Err(GeometryError::DegeneratePoint);
    }
    if k.kind == ObstacleKind::Ball {
        let r = k.semi_axes[0];
        return Ok(k.to_world(&(y * (r / y.norm()))));
    }
    // Closest point on the ellipsoid: z_i = a_i^2 y_i / (a_i^2 + t) where t is
    // the largest root of psi(t) = sum (a_i y_i / (a_i^2 + t))^2 - 1.
    let a = k.semi_axes;
    let psi = |t: f64| -> f64 {
        (0..D)
            .map(|i| {
                let v = a[i] * y[i] / (a[i] * a[i] + t);
                v * v
            })
            .sum::<f64>()
            - 1.0
    };
    let a_min2 = (0..D).map(|i| a[i] * a[i]).fold(f64::INFINITY, f64::min);
    let mut lo = -a_min2 + 1e-14 * a_min2.max(1.0);
    // psi may be negative near the medial set even at lo; advance lo until
    // positive, or give up as degenerate.
    let mut tries = 0;
    while psi(lo) <= 0.0 {
        lo = -a_min2 + (lo + a_min2) * 0.5 + 1e-300;
        tries += 1;
        if tries > 200 {
            return Err(GeometryError::DegeneratePoint);
        }
    }
    let mut hi = a.max() * (y.norm() + a.max());
    while psi(hi) > 0.0 {
        hi *= 2.0;
    }
    // Bisection to a rough bracket, then Newton.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + hi.abs()) {
            break;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..50 {
        let f = psi(t);
        let df = (0..D)
            .map(|i| {
                let d = a[i] * a[i] + t;
                -2.0 * (a[i] * y[i]).powi(2) / (d * d * d)
            })
            .sum::<f64>();
        if df == 0.0 {
            break;
        }
        let step = f / df;
        t -= step;
        if step.abs() < 1e-16 * (1.0 + t.abs()) {
            break;
        }
    }
    let mut z = Point::<D>::zeros();
    for i in 0..D {
        z[i] = a[i] * a[i] * y[i] / (a[i] * a[i] + t);
    }
    let q = k.to_world(&z);
    let residual = k.implicit(&q).abs();
    if residual > tol.on_boundary {
        return Err(GeometryError::NoConvergence);
    }
    Ok(q)
}

/// Unit outward normal, principal curvatures (ascending) and principal
/// directions at a boundary point.
pub fn normal_and_curvatures<const D: usize>(
    k: &Obstacle<D>,
    q: &Point<D>,
    tol: &Tolerances,
) -> Result<SurfaceData<D>, GeometryError> {
    let res = k.implicit(q);
    if res.abs() > tol.on_boundary {
        return Err(GeometryError::PointOffBoundary(res.abs()));
    }
    let y = k.to_body(q);
    let a = k.semi_axes;
    let mut grad_b = Point::<D>::zeros();
    for i in 0..D {
        grad_b[i] = 2.0 * y[i] / (a[i] * a[i]);
    }
    let grad = k.orientation * grad_b;
    let gn = grad.norm();
    let normal = grad / gn;
    // Weingarten map of the implicit surface: P (H / |grad|) P with
    // P = I - n n^T. Its tangent-space eigenvalues are the principal
    // curvatures (positive here since the body is strictly convex).
    let mut h_b = SMatrix::<f64, D, D>::zeros();
    for i in 0..D {
        h_b[(i, i)] = 2.0 / (a[i] * a[i]);
    }
    let h = k.orientation * h_b * k.orientation.transpose();
    let p = SMatrix::<f64, D, D>::identity() - normal * normal.transpose();
    let w = p * (h / gn) * p;
    // Dynamic eigen solve: the static one is not available for a generic
    // const dimension.
    let wd = nalgebra::DMatrix::<f64>::from_fn(D, D, |i, j| w[(i, j)]);
    let eig = wd.symmetric_eigen();
    let mut pairs: Vec<(f64, Point<D>)> = Vec::with_capacity(D);
    for i in 0..D {
        let mut v = Point::<D>::zeros();
        for r in 0..D {
            v[r] = eig.eigenvectors[(r, i)];
        }
        pairs.push((eig.eigenvalues[i], v));
    }
    // Drop the spurious normal-direction eigenpair.
    pairs.sort_by(|a, b| {
        a.1.dot(&normal)
            .abs()
            .partial_cmp(&b.1.dot(&normal).abs())
            .unwrap()
    });
    pairs.truncate(D - 1);
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    // Re-orthogonalize the frame against the normal.
    let mut frame = Vec::with_capacity(D - 1);
    for (_, v) in &pairs {
        let mut u = *v - normal * normal.dot(v);
        for f in &frame {
            u -= *f * u.dot(f);
        }
        frame.push(u / u.norm());
    }
    Ok(SurfaceData {
        normal,
        curvatures: pairs.iter().map(|p| p.0).collect(),
        frame,
    })
}

/// Mutually nearest boundary points of two disjoint obstacles and their
/// distance, by alternating projection.
pub fn closest_pair<const D: usize>(
    ki: &Obstacle<D>,
    kj: &Obstacle<D>,
    tol: &Tolerances,
) -> Result<(Point<D>, Point<D>, f64), GeometryError> {
    let mut p = project_to_boundary(ki, &kj.center(), tol)?;
    let mut q = project_to_boundary(kj, &p, tol)?;
    for _ in 0..tol.closest_pair_iters {
        let p_next = project_to_boundary(ki, &q, tol)?;
        let q_next = project_to_boundary(kj, &p_next, tol)?;
        let movement = (p_next - p).norm().max((q_next - q).norm());
        p = p_next;
        q = q_next;
        if movement < tol.projection {
            return Ok((p, q, (p - q).norm()));
        }
    }
    Err(GeometryError::NoConvergence)
}

/// Distance from `k` to the convex hull of `a` and `b`, via support-function
/// maximization: `d = max_w [ -h_K(-w) - max(h_A(w), h_B(w)) ]` over unit
/// directions. Any sampled direction gives a lower bound; the scan plus local
/// refinement recovers the maximum to high accuracy for smooth bodies.
pub fn distance_obstacle_to_hull<const D: usize>(
    k: &Obstacle<D>,
    pair: (&Obstacle<D>, &Obstacle<D>),
    tol: &Tolerances,
) -> Result<f64, GeometryError> {
    let d = hull_distance_raw(k, pair, tol);
    if d <= 0.0 {
        return Err(GeometryError::EclipseViolation(d));
    }
    Ok(d)
}

/// Same as [`distance_obstacle_to_hull`] but reports non-positive margins
/// instead of erroring; used by the no-eclipse check.
pub fn hull_distance_raw<const D: usize>(
    k: &Obstacle<D>,
    (a, b): (&Obstacle<D>, &Obstacle<D>),
    tol: &Tolerances,
) -> f64 {
    let sep = |w: &Point<D>| -> f64 { -k.support(&-w) - a.support(w).max(b.support(w)) };
    match D {
        2 => {
            let n = tol.support_scan;
            let mut best = f64::NEG_INFINITY;
            let mut best_t = 0.0;
            for i in 0..n {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let w = dir2::<D>(t);
                let v = sep(&w);
                if v > best {
                    best = v;
                    best_t = t;
                }
            }
            // Golden-section refinement around the best sample.
            let step = 2.0 * std::f64::consts::PI / n as f64;
            let (mut lo, mut hi) = (best_t - step, best_t + step);
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..120 {
                let m1 = hi - phi * (hi - lo);
                let m2 = lo + phi * (hi - lo);
                if sep(&dir2::<D>(m1)) < sep(&dir2::<D>(m2)) {
                    lo = m1;
                } else {
                    hi = m2;
                }
            }
            sep(&dir2::<D>(0.5 * (lo + hi)))
        }
        3 => {
            // Fibonacci sphere scan, then compass refinement on the sphere.
            let n = tol.support_scan;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            let mut best = f64::NEG_INFINITY;
            let mut best_w = Point::<D>::zeros();
            for i in 0..n {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let t = golden * i as f64;
                let w = dir3::<D>(r * t.cos(), r * t.sin(), z);
                let v = sep(&w);
                if v > best {
                    best = v;
                    best_w = w;
                }
            }
            let mut w = best_w;
            let mut delta = 2.0 / (n as f64).sqrt();
            while delta > 1e-13 {
                let (t1, t2) = tangent_basis(&w);
                let mut improved = false;
                for cand in [
                    (w + t1 * delta).normalize(),
                    (w - t1 * delta).normalize(),
                    (w + t2 * delta).normalize(),
                    (w - t2 * delta).normalize(),
                ] {
                    if sep(&cand) > best {
                        best = sep(&cand);
                        w = cand;
                        improved = true;
                    }
                }
                if !improved {
                    delta *= 0.5;
                }
            }
            best
        }
        _ => unreachable!("only D = 2 and D = 3 are supported"),
    }
}

pub fn dir2<const D: usize>(t: f64) -> Point<D> {
    let mut w = Point::<D>::zeros();
    w[0] = t.cos();
    w[1] = t.sin();
    w
}

pub fn dir3<const D: usize>(x: f64, y: f64, z: f64) -> Point<D> {
    let mut w = Point::<D>::zeros();
    w[0] = x;
    w[1] = y;
    w[2] = z;
    w
}

/// Two unit vectors spanning the plane orthogonal to unit `v`.
pub fn tangent_basis<const D: usize>(v: &Point<D>) -> (Point<D>, Point<D>) {
    let mut seed = Point::<D>::zeros();
    // Pick the coordinate axis least aligned with v.
    let mut idx = 0;
    for i in 1..D {
        if v[i].abs() < v[idx].abs() {
            idx = i;
        }
    }
    seed[idx] = 1.0;
    let t1 = (seed - v * v.dot(&seed)).normalize();
    if D == 2 {
        return (t1, Point::<D>::zeros());
    }
    // Cross product, written component-wise to stay generic over D.
    let mut t2 = Point::<D>::zeros();
    t2[0] = v[1] * t1[2] - v[2] * t1[1];
    t2[1] = v[2] * t1[0] - v[0] * t1[2];
    t2[2] = v[0] * t1[1] - v[1] * t1[0];
    (t1, t2.normalize())
}

/// An open billiard: at least three pairwise disjoint strictly convex
/// obstacles in R^D.
#[derive(Debug, Clone)]
pub struct Billiard<const D: usize> {
    obstacles: Vec<Obstacle<D>>,
}

impl<const D: usize> Billiard<D> {
    pub fn new(obstacles: Vec<Obstacle<D>>, tol: &Tolerances) -> Result<Self, GeometryError> {
        if obstacles.len() < 3 {
            return Err(GeometryError::TooFewObstacles(obstacles.len()));
        }
        for i in 0..obstacles.len() {
            for j in (i + 1)..obstacles.len() {
                let (_, _, d) = closest_pair(&obstacles[i], &obstacles[j], tol)?;
                if d <= tol.on_boundary {
                    return Err(GeometryError::NotDisjoint(i, j));
                }
            }
        }
        Ok(Self { obstacles })
    }

    pub fn obstacles(&self) -> &[Obstacle<D>] {
        &self.obstacles
    }

    pub fn len(&self) -> usize {
        self.obstacles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }
}

/// Margin of one no-eclipse triple: distance from obstacle `k` to the convex
/// hull of obstacles `i` and `j`.
#[derive(Debug, Clone, Serialize)]
pub struct TripleMargin {
    pub blocked: usize,
    pub pair: (usize, usize),
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EclipseReport {
    pub triples: Vec<TripleMargin>,
    pub all_pass: bool,
}

/// Checks condition (H): for every triple, the hull of two obstacles stays
/// clear of the third. Failures are reported, not thrown.
pub fn no_eclipse_check<const D: usize>(b: &Billiard<D>, tol: &Tolerances) -> EclipseReport {
    let u = b.len();
    let mut triples = Vec::new();
    for i in 0..u {
        for j in (i + 1)..u {
            for k in 0..u {
                if k == i || k == j {
                    continue;
                }
                let margin =
                    hull_distance_raw(&b.obstacles[k], (&b.obstacles[i], &b.obstacles[j]), tol);
                triples.push(TripleMargin {
                    blocked: k,
                    pair: (i, j),
                    margin,
                    pass: margin > 0.0,
                });
            }
        }
    }
    let all_pass = triples.iter().all(|t| t.pass);
    EclipseReport { triples, all_pass }
}
