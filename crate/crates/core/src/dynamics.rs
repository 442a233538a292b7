//! The billiard flow and map: ray-obstacle intersection, specular
//! reflection, and propagation of convex-front curvature operators with the
//! per-flight contraction factors delta_j.

use nalgebra::Matrix2;
use thiserror::Error;

use crate::geometry::{
    normal_and_curvatures, project_to_boundary, tangent_basis, Billiard, GeometryError,
    Point, SurfaceData,
};
use crate::tol::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("ray is tangent to obstacle {0} (discriminant within tolerance of zero)")]
    TangentRay(usize),
    #[error("grazing collision: cos(phi) = {0:.3e} below tolerance")]
    GrazingCollision(f64),
    #[error("front basis mismatch: frames are not orthonormal in the front plane")]
    BasisMismatch,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A point of the billiard phase space: position plus unit velocity, with
/// the outgoing convention on boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<const D: usize> {
    pub q: Point<D>,
    pub v: Point<D>,
    pub last_obstacle: Option<usize>,
}

impl<const D: usize> PhasePoint<D> {
    pub fn new(q: Point<D>, v: Point<D>) -> Self {
        Self {
            q,
            v: v.normalize(),
            last_obstacle: None,
        }
    }
}

/// One reflection: where it happened, the velocities around it, the
/// collision angle phi and the free flight length since the previous event.
#[derive(Debug, Clone, Copy)]
pub struct CollisionEvent<const D: usize> {
    pub obstacle: usize,
    pub q: Point<D>,
    pub v_in: Point<D>,
    pub v_out: Point<D>,
    /// arccos <v_out, n> in [0, pi/2).
    pub angle: f64,
    pub flight: f64,
}

/// Specular reflection `v - 2 <v, n> n`.
pub fn reflect<const D: usize>(v: &Point<D>, n: &Point<D>) -> Point<D> {
    v - n * (2.0 * v.dot(n))
}

/// First obstacle hit by the ray from `x`, with its flight time, or `None`
/// if the ray escapes. Near-tangent hits are flagged instead of resolved.
pub fn first_intersection<const D: usize>(
    x: &PhasePoint<D>,
    b: &Billiard<D>,
    tol: &Tolerances,
) -> Result<Option<(usize, f64)>, DynamicsError> {
    let mut best: Option<(usize, f64)> = None;
    let mut tangent: Option<(usize, f64)> = None;
    let t_eps = 1e-9;
    for (i, k) in b.obstacles().iter().enumerate() {
        let rot_t = k.orientation().transpose();
        let a = k.semi_axes();
        let mut y = rot_t * (x.q - k.center());
        let mut w = rot_t * x.v;
        for d in 0..D {
            y[d] /= a[d];
            w[d] /= a[d];
        }
        let qa = w.norm_squared();
        let qb = 2.0 * y.dot(&w);
        let qc = y.norm_squared() - 1.0;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc.abs() <= tol.tangency {
            let t = -qb / (2.0 * qa);
            if t > t_eps {
                tangent = Some(match tangent {
                    Some(prev) if prev.1 <= t => prev,
                    _ => (i, t),
                });
            }
            continue;
        }
        if disc < 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let t1 = (-qb - sq) / (2.0 * qa);
        let t2 = (-qb + sq) / (2.0 * qa);
        let t = if t1 > t_eps {
            t1
        } else if t2 > t_eps {
            t2
        } else {
            continue;
        };
        if best.is_none_or(|(_, bt)| t < bt) {
            best = Some((i, t));
        }
    }
    match (best, tangent) {
        (Some((i, t)), Some((_, tt))) if t < tt => Ok(Some((i, t))),
        (_, Some((i, _))) => Err(DynamicsError::TangentRay(i)),
        (b, None) => Ok(b),
    }
}

/// One application of the billiard ball map: advance to the next reflection
/// and return the outgoing phase point plus the collision record. `None`
/// means the trajectory escapes to infinity.
pub fn billiard_map<const D: usize>(
    x: &PhasePoint<D>,
    b: &Billiard<D>,
    tol: &Tolerances,
) -> Result<Option<(PhasePoint<D>, CollisionEvent<D>)>, DynamicsError> {
    let Some((i, t)) = first_intersection(x, b, tol)? else {
        return Ok(None);
    };
    let k = &b.obstacles()[i];
    // Polish the hit point back onto the boundary to stop drift over long
    // trajectories.
    let q = project_to_boundary(k, &(x.q + x.v * t), tol)?;
    let data = normal_and_curvatures(k, &q, tol)?;
    let v_out = reflect(&x.v, &data.normal).normalize();
    let cos_phi = v_out.dot(&data.normal).clamp(-1.0, 1.0);
    let event = CollisionEvent {
        obstacle: i,
        q,
        v_in: x.v,
        v_out,
        angle: cos_phi.acos(),
        flight: t,
    };
    Ok(Some((
        PhasePoint {
            q,
            v: v_out,
            last_obstacle: Some(i),
        },
        event,
    )))
}

/// Second fundamental form of a convex front on the plane orthogonal to its
/// propagation direction `v`, stored against an explicit orthonormal basis.
/// For D = 2 the plane is one-dimensional and only `mat[(0,0)]` is used.
#[derive(Debug, Clone)]
pub struct FrontOperator<const D: usize> {
    v: Point<D>,
    basis: [Point<D>; 2],
    mat: Matrix2<f64>,
}

impl<const D: usize> FrontOperator<D> {
    /// Isotropic front of curvature `k` travelling along `v`.
    pub fn isotropic(k: f64, v: &Point<D>) -> Self {
        let v = v.normalize();
        let (t1, t2) = tangent_basis(&v);
        Self {
            v,
            basis: [t1, t2],
            mat: Matrix2::new(k, 0.0, 0.0, k),
        }
    }

    /// Front from explicit basis and matrix. The basis must be orthonormal
    /// and orthogonal to `v`.
    pub fn from_parts(
        v: Point<D>,
        basis: [Point<D>; 2],
        mat: Matrix2<f64>,
    ) -> Result<Self, DynamicsError> {
        let dim = D - 1;
        for i in 0..dim {
            if (basis[i].norm() - 1.0).abs() > 1e-9 || basis[i].dot(&v).abs() > 1e-9 {
                return Err(DynamicsError::BasisMismatch);
            }
            for j in (i + 1)..dim {
                if basis[i].dot(&basis[j]).abs() > 1e-9 {
                    return Err(DynamicsError::BasisMismatch);
                }
            }
        }
        if (mat[(0, 1)] - mat[(1, 0)]).abs() > 1e-9 {
            return Err(DynamicsError::BasisMismatch);
        }
        Ok(Self { v, basis, mat })
    }

    pub fn direction(&self) -> Point<D> {
        self.v
    }

    pub fn basis(&self) -> &[Point<D>; 2] {
        &self.basis
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        self.mat
    }

    /// Eigenvalues (principal front curvatures), ascending. One value for
    /// D = 2, two for D = 3.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if D == 2 {
            vec![self.mat[(0, 0)]]
        } else {
            let e = self.mat.symmetric_eigen().eigenvalues;
            let mut v = vec![e[0], e[1]];
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        }
    }

    /// Curvature in the direction of unit tangent `u` (must lie in the front
    /// plane).
    pub fn directional_curvature(&self, u: &Point<D>) -> f64 {
        let c = self.coords(u);
        (self.mat * c).dot(&c) / c.norm_squared()
    }

    /// Operator norm (largest eigenvalue magnitude).
    pub fn norm(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .fold(0.0f64, |m, e| m.max(e.abs()))
    }

    fn coords(&self, u: &Point<D>) -> nalgebra::Vector2<f64> {
        nalgebra::Vector2::new(
            u.dot(&self.basis[0]),
            if D == 2 { 0.0 } else { u.dot(&self.basis[1]) },
        )
    }

    /// Apply the operator to a front-plane vector, returning a world vector.
    pub fn apply(&self, u: &Point<D>) -> Point<D> {
        let c = self.mat * self.coords(u);
        let mut out = self.basis[0] * c[0];
        if D == 3 {
            out += self.basis[1] * c[1];
        }
        out
    }
}

/// Curvature increment at a reflection: `Theta = cos(phi) V* K V` on the
/// plane orthogonal to the outgoing direction. For D = 2 this reduces to the
/// scalar `kappa / cos(phi)`.
pub fn theta_operator<const D: usize>(
    surface: &SurfaceData<D>,
    v_out: &Point<D>,
    tol: &Tolerances,
) -> Result<FrontOperator<D>, DynamicsError> {
    let n = surface.normal;
    let cos_phi = n.dot(v_out);
    if cos_phi < tol.grazing {
        return Err(DynamicsError::GrazingCollision(cos_phi));
    }
    let (t1, t2) = tangent_basis(v_out);
    let basis = [t1, t2];
    if D == 2 {
        let mat = Matrix2::new(surface.curvatures[0] / cos_phi, 0.0, 0.0, 0.0);
        return FrontOperator::from_parts(*v_out, basis, mat);
    }
    let mut mat = Matrix2::zeros();
    for (col, j) in basis.iter().enumerate() {
        // V: front plane -> obstacle tangent plane.
        let w = j - v_out * (j.dot(&n) / cos_phi);
        // K: shape operator of the obstacle in its principal frame.
        let mut kw = Point::<D>::zeros();
        for (kappa, t) in surface.curvatures.iter().zip(&surface.frame) {
            kw += t * (kappa * w.dot(t));
        }
        // V*: obstacle tangent plane -> front plane.
        let z = kw - n * (kw.dot(v_out) / cos_phi);
        for (row, jp) in basis.iter().enumerate() {
            mat[(row, col)] += cos_phi * jp.dot(&z);
        }
    }
    // Theta is symmetric in exact arithmetic; symmetrize the rounding.
    let mat = (mat + mat.transpose()) * 0.5;
    FrontOperator::from_parts(*v_out, basis, mat)
}

/// Free-flight evolution over distance `t`: eigenvalues map as
/// `k -> k / (1 + t k)`; the basis and direction are unchanged.
pub fn propagate_front<const D: usize>(front: &FrontOperator<D>, t: f64) -> FrontOperator<D> {
    let m = front.mat;
    let mat = if D == 2 {
        let k = m[(0, 0)];
        Matrix2::new(k / (1.0 + t * k), 0.0, 0.0, 0.0)
    } else {
        // (B^-1 + tI)^-1 = B (I + tB)^-1
        let inv = (Matrix2::identity() + m * t).try_inverse().expect(
            "I + tB is invertible for positive semidefinite B and t >= 0",
        );
        let p = m * inv;
        (p + p.transpose()) * 0.5
    };
    FrontOperator {
        v: front.v,
        basis: front.basis,
        mat,
    }
}

/// Reflection step `B+ = B- + 2 Theta`. The pre-collision basis is
/// parallel-transported by the reflection isometry across `n`, re-projected
/// onto the post-collision front plane, and the operator re-expressed in
/// Theta's basis before the increment is added.
pub fn reflect_front<const D: usize>(
    incoming: &FrontOperator<D>,
    theta: &FrontOperator<D>,
    n: &Point<D>,
) -> Result<FrontOperator<D>, DynamicsError> {
    let v_out = theta.v;
    // Transport and re-orthonormalize against the outgoing direction.
    let mut transported: [Point<D>; 2] = [Point::zeros(), Point::zeros()];
    for i in 0..(D - 1) {
        let mut e = reflect(&incoming.basis[i], n);
        e -= v_out * e.dot(&v_out);
        for t in transported.iter().take(i) {
            e -= t * e.dot(t);
        }
        let norm = e.norm();
        if norm < 1e-9 {
            return Err(DynamicsError::BasisMismatch);
        }
        transported[i] = e / norm;
    }
    // Change of basis from the transported frame to theta's frame.
    let mat_in_theta = if D == 2 {
        Matrix2::new(incoming.mat[(0, 0)], 0.0, 0.0, 0.0)
    } else {
        let mut c = Matrix2::zeros();
        for row in 0..2 {
            for col in 0..2 {
                c[(row, col)] = theta.basis[row].dot(&transported[col]);
            }
        }
        let m = c * incoming.mat * c.transpose();
        (m + m.transpose()) * 0.5
    };
    FrontOperator::from_parts(v_out, theta.basis, mat_in_theta + theta.mat * 2.0)
}

/// Per-flight contraction factor: `delta = 1 / (1 + d l)` where
/// `(1 + d l)^2 = |u + d B u|^2` for the unit front tangent `u`. For D = 2
/// this is exactly `1 / (1 + d k)`.
pub fn delta_factor<const D: usize>(front: &FrontOperator<D>, u: &Point<D>, d: f64) -> f64 {
    let u = u.normalize();
    1.0 / (u + front.apply(&u) * d).norm()
}

/// Range of delta over all front directions: attained at the eigenvectors.
pub fn delta_range<const D: usize>(front: &FrontOperator<D>, d: f64) -> (f64, f64) {
    let eig = front.eigenvalues();
    let hi = 1.0 / (1.0 + d * eig[0]);
    let lo = 1.0 / (1.0 + d * eig[eig.len() - 1]);
    (lo, hi)
}

#[derive(Debug, Clone)]
pub struct Trajectory<const D: usize> {
    pub events: Vec<CollisionEvent<D>>,
    /// Post-collision fronts (index j = front leaving collision j); index 0
    /// is the initial front.
    pub fronts: Vec<FrontOperator<D>>,
    /// `(delta_lo, delta_hi)` per flight; equal components when D = 2.
    pub deltas: Vec<(f64, f64)>,
    pub escaped: bool,
}

impl<const D: usize> Trajectory<D> {
    /// Product of the per-flight contraction factors, taken at the lower and
    /// upper ends of each step's delta range.
    pub fn delta_product(&self) -> (f64, f64) {
        self.deltas
            .iter()
            .fold((1.0, 1.0), |(lo, hi), (dlo, dhi)| (lo * dlo, hi * dhi))
    }
}

/// Default large-curvature proxy for a point-source initial front.
pub const POINT_SOURCE_CURVATURE: f64 = 1e6;

/// Simulate up to `n_max` reflections, tracking the front operator and the
/// contraction factors. The trajectory ends at escape or at the cap.
pub fn simulate<const D: usize>(
    x0: &PhasePoint<D>,
    b: &Billiard<D>,
    n_max: usize,
    front0: Option<FrontOperator<D>>,
    tol: &Tolerances,
) -> Result<Trajectory<D>, DynamicsError> {
    let mut front = front0.unwrap_or_else(|| FrontOperator::isotropic(POINT_SOURCE_CURVATURE, &x0.v));
    let mut x = *x0;
    let mut events = Vec::new();
    let mut fronts = vec![front.clone()];
    let mut deltas = Vec::new();
    let mut escaped = false;
    for _ in 0..n_max {
        match billiard_map(&x, b, tol)? {
            None => {
                escaped = true;
                break;
            }
            Some((x1, ev)) => {
                deltas.push(delta_range(&front, ev.flight));
                let arrived = propagate_front(&front, ev.flight);
                let k = &b.obstacles()[ev.obstacle];
                let surface = normal_and_curvatures(k, &ev.q, tol)?;
                let theta = theta_operator(&surface, &ev.v_out, tol)?;
                front = reflect_front(&arrived, &theta, &surface.normal)?;
                fronts.push(front.clone());
                events.push(ev);
                x = x1;
            }
        }
    }
    Ok(Trajectory {
        events,
        fronts,
        deltas,
        escaped,
    })
}

/// Front propagation driven by a prescribed periodic cycle of collision
/// points. The collision data (points, flight lengths, angles, curvatures)
/// comes from the exact orbit, so the curvature recursion can be followed
/// for arbitrarily many reflections without hyperbolic drift.
pub fn front_along_cycle<const D: usize>(
    b: &Billiard<D>,
    obstacle_indices: &[usize],
    points: &[Point<D>],
    steps: usize,
    front0: Option<FrontOperator<D>>,
    tol: &Tolerances,
) -> Result<Trajectory<D>, DynamicsError> {
    let n = points.len();
    assert!(n >= 2 && obstacle_indices.len() == n);
    let dir = |i: usize| -> Point<D> { (points[(i + 1) % n] - points[i]).normalize() };
    let mut front = front0.unwrap_or_else(|| FrontOperator::isotropic(POINT_SOURCE_CURVATURE, &dir(0)));
    let mut events = Vec::new();
    let mut fronts = vec![front.clone()];
    let mut deltas = Vec::new();
    for step in 0..steps {
        let i = step % n;
        let j = (step + 1) % n;
        let flight = (points[j] - points[i]).norm();
        deltas.push(delta_range(&front, flight));
        let arrived = propagate_front(&front, flight);
        let k = &b.obstacles()[obstacle_indices[j]];
        let surface = normal_and_curvatures(k, &points[j], tol)?;
        let v_out = dir(j);
        let cos_phi = v_out.dot(&surface.normal).clamp(-1.0, 1.0);
        let theta = theta_operator(&surface, &v_out, tol)?;
        front = reflect_front(&arrived, &theta, &surface.normal)?;
        fronts.push(front.clone());
        events.push(CollisionEvent {
            obstacle: obstacle_indices[j],
            q: points[j],
            v_in: dir(i),
            v_out,
            angle: cos_phi.acos(),
            flight,
        });
    }
    Ok(Trajectory {
        events,
        fronts,
        deltas,
        escaped: false,
    })
}
