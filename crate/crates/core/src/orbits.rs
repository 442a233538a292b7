//! Periodic orbits as minimizers of the cyclic length functional
//! `F(q_1..q_n) = sum |q_j - q_{j+1}|`, the period-2 closest-pair points
//! p_ij, the hull H they span, and the empirical convex-hull containment
//! test.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{
    closest_pair, convex_hull, normal_and_curvatures, project_to_boundary, Billiard,
    ConvexPolytope, GeometryError, Point,
};
use crate::dynamics::reflect;
use crate::tol::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("inadmissible symbol sequence: {0}")]
    InadmissibleSequence(String),
    #[error("orbit minimizer did not converge within the sweep budget")]
    NoConvergence,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A word in the obstacle alphabet (0-based indices). Admissible words have
/// no equal consecutive symbols; periodic words additionally differ at the
/// wrap-around.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymbolSequence {
    symbols: Vec<usize>,
    periodic: bool,
}

impl SymbolSequence {
    pub fn periodic(symbols: Vec<usize>, u: usize) -> Result<Self, OrbitError> {
        Self::check(&symbols, u, true)?;
        Ok(Self {
            symbols,
            periodic: true,
        })
    }

    pub fn finite(symbols: Vec<usize>, u: usize) -> Result<Self, OrbitError> {
        Self::check(&symbols, u, false)?;
        Ok(Self {
            symbols,
            periodic: false,
        })
    }

    fn check(symbols: &[usize], u: usize, periodic: bool) -> Result<(), OrbitError> {
        if symbols.len() < 2 {
            return Err(OrbitError::InadmissibleSequence(format!(
                "need at least 2 symbols, got {}",
                symbols.len()
            )));
        }
        if let Some(&s) = symbols.iter().find(|&&s| s >= u) {
            return Err(OrbitError::InadmissibleSequence(format!(
                "symbol {} out of range for {} obstacles",
                s + 1,
                u
            )));
        }
        for w in symbols.windows(2) {
            if w[0] == w[1] {
                return Err(OrbitError::InadmissibleSequence(format!(
                    "consecutive repeat of symbol {}",
                    w[0] + 1
                )));
            }
        }
        if periodic && symbols.first() == symbols.last() {
            return Err(OrbitError::InadmissibleSequence(
                "periodic word must differ at the wrap-around".into(),
            ));
        }
        Ok(())
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    /// Lexicographically minimal rotation; used to deduplicate cyclic words.
    pub fn canonical_rotation(&self) -> Vec<usize> {
        let n = self.symbols.len();
        (0..n)
            .map(|r| {
                let mut w = Vec::with_capacity(n);
                w.extend_from_slice(&self.symbols[r..]);
                w.extend_from_slice(&self.symbols[..r]);
                w
            })
            .min()
            .unwrap()
    }
}

/// A periodic billiard trajectory found as a local minimum of the cyclic
/// length functional.
#[derive(Debug, Clone)]
pub struct PeriodicOrbit<const D: usize> {
    pub sequence: SymbolSequence,
    pub points: Vec<Point<D>>,
    /// Value of the length functional F.
    pub length: f64,
    /// Max violation of the reflection law over the cycle (norm of the
    /// difference between the reflected incoming and actual outgoing
    /// directions).
    pub residual: f64,
}

/// Minimize `|q - a| + |q - b|` over the boundary of `k`, starting from `q0`:
/// tangent-space Newton on the stationarity residual with a projected
/// gradient fallback.
fn minimize_bounce<const D: usize>(
    k: &crate::geometry::Obstacle<D>,
    a: &Point<D>,
    b: &Point<D>,
    q0: &Point<D>,
    tol: &Tolerances,
) -> Result<Point<D>, OrbitError> {
    let f = |q: &Point<D>| (q - a).norm() + (q - b).norm();
    let mut q = *q0;
    let h = 1e-7 * k.circumradius().max(1.0);
    for _ in 0..100 {
        let data = normal_and_curvatures(k, &q, tol)?;
        let grad = (q - a).normalize() + (q - b).normalize();
        // Residual in the tangent frame.
        let dim = D - 1;
        let mut r = [0.0f64; 2];
        for (m, e) in data.frame.iter().enumerate() {
            r[m] = grad.dot(e);
        }
        let rnorm = (r[0] * r[0] + r[1] * r[1]).sqrt();
        if rnorm < 1e-14 {
            break;
        }
        // Numerical Jacobian of the residual.
        let mut jac = [[0.0f64; 2]; 2];
        for (m, e) in data.frame.iter().enumerate() {
            let qp = project_to_boundary(k, &(q + e * h), tol)?;
            let gp = (qp - a).normalize() + (qp - b).normalize();
            for (l, el) in data.frame.iter().enumerate() {
                jac[l][m] = (gp.dot(el) - r[l]) / h;
            }
        }
        // Solve J step = -r (1x1 or 2x2).
        let step = if dim == 1 {
            if jac[0][0].abs() < 1e-300 {
                None
            } else {
                Some([-r[0] / jac[0][0], 0.0])
            }
        } else {
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det.abs() < 1e-300 {
                None
            } else {
                Some([
                    (-r[0] * jac[1][1] + r[1] * jac[0][1]) / det,
                    (-r[1] * jac[0][0] + r[0] * jac[1][0]) / det,
                ])
            }
        };
        let newton = step.map(|s| {
            let mut d = Point::<D>::zeros();
            for (m, e) in data.frame.iter().enumerate() {
                d += e * s[m];
            }
            d
        });
        // Try the Newton step with backtracking; fall back to the projected
        // gradient direction.
        let mut moved = false;
        let f0 = f(&q);
        let candidates: Vec<Point<D>> = match newton {
            Some(d) => vec![d],
            None => vec![],
        };
        let mut tangential_grad = Point::<D>::zeros();
        for (m, e) in data.frame.iter().enumerate() {
            tangential_grad += e * r[m];
        }
        for dir in candidates.into_iter().chain([-tangential_grad]) {
            let mut scale = 1.0;
            for _ in 0..40 {
                let qn = project_to_boundary(k, &(q + dir * scale), tol)?;
                // Accept a Newton step that reduces the residual even when f
                // is flat to rounding.
                let gn = (qn - a).normalize() + (qn - b).normalize();
                let mut rn = 0.0;
                let dn = normal_and_curvatures(k, &qn, tol)?;
                for e in &dn.frame {
                    rn += gn.dot(e).powi(2);
                }
                if f(&qn) < f0 || rn.sqrt() < 0.5 * rnorm {
                    if (qn - q).norm() > 0.0 {
                        q = qn;
                        moved = true;
                    }
                    break;
                }
                scale *= 0.5;
            }
            if moved {
                break;
            }
        }
        if !moved {
            break;
        }
    }
    Ok(q)
}

/// Find the periodic orbit with the given admissible symbol sequence by
/// cyclic coordinate descent on the length functional.
pub fn find_periodic_orbit<const D: usize>(
    b: &Billiard<D>,
    seq: &SymbolSequence,
    tol: &Tolerances,
) -> Result<PeriodicOrbit<D>, OrbitError> {
    if !seq.is_periodic() {
        return Err(OrbitError::InadmissibleSequence(
            "orbit finder needs a periodic sequence".into(),
        ));
    }
    let u = b.len();
    SymbolSequence::check(seq.symbols(), u, true)?;
    let n = seq.len();
    let obstacles = b.obstacles();

    // Initialize each point at the boundary point nearest the centroid of the
    // other obstacles' centers; this lands inside the attraction basin for
    // non-eclipsing configurations.
    let mut points: Vec<Point<D>> = Vec::with_capacity(n);
    for &i in seq.symbols() {
        let mut centroid = Point::<D>::zeros();
        for (j, k) in obstacles.iter().enumerate() {
            if j != i {
                centroid += k.center();
            }
        }
        centroid /= (u - 1) as f64;
        points.push(project_to_boundary(&obstacles[i], &centroid, tol)?);
    }

    let mut converged = false;
    for _ in 0..tol.orbit_sweeps {
        let mut max_move = 0.0f64;
        for j in 0..n {
            let prev = points[(j + n - 1) % n];
            let next = points[(j + 1) % n];
            let k = &obstacles[seq.symbols()[j]];
            let qn = minimize_bounce(k, &prev, &next, &points[j], tol)?;
            max_move = max_move.max((qn - points[j]).norm());
            points[j] = qn;
        }
        if max_move < tol.orbit_movement {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(OrbitError::NoConvergence);
    }

    let mut length = 0.0;
    let mut residual = 0.0f64;
    for j in 0..n {
        let next = points[(j + 1) % n];
        let prev = points[(j + n - 1) % n];
        length += (next - points[j]).norm();
        let k = &obstacles[seq.symbols()[j]];
        let normal = normal_and_curvatures(k, &points[j], tol)?.normal;
        let v_in = (points[j] - prev).normalize();
        let v_out = (next - points[j]).normalize();
        residual = residual.max((reflect(&v_in, &normal) - v_out).norm());
    }
    Ok(PeriodicOrbit {
        sequence: seq.clone(),
        points,
        length,
        residual,
    })
}

/// Closest-pair points p_ij for one unordered obstacle pair.
#[derive(Debug, Clone)]
pub struct PairPoints<const D: usize> {
    pub i: usize,
    pub j: usize,
    pub p_ij: Point<D>,
    pub p_ji: Point<D>,
    pub distance: f64,
}

/// All u(u-1)/2 closest pairs, in deterministic (i, j) order.
#[derive(Debug, Clone)]
pub struct ClosestPairs<const D: usize> {
    pairs: Vec<PairPoints<D>>,
    u: usize,
}

impl<const D: usize> ClosestPairs<D> {
    /// The boundary point of K_i nearest K_j (defined for i != j, either
    /// order).
    pub fn point(&self, i: usize, j: usize) -> Point<D> {
        let p = self
            .pairs
            .iter()
            .find(|p| (p.i, p.j) == (i.min(j), i.max(j)))
            .expect("pair indices in range");
        if i < j {
            p.p_ij
        } else {
            p.p_ji
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.pairs
            .iter()
            .find(|p| (p.i, p.j) == (i.min(j), i.max(j)))
            .expect("pair indices in range")
            .distance
    }

    pub fn pairs(&self) -> &[PairPoints<D>] {
        &self.pairs
    }

    /// Every p_ij over all ordered pairs (both endpoints of every pair).
    pub fn all_points(&self) -> Vec<Point<D>> {
        let mut pts = Vec::with_capacity(self.u * (self.u - 1));
        for p in &self.pairs {
            pts.push(p.p_ij);
            pts.push(p.p_ji);
        }
        pts
    }
}

pub fn all_closest_pairs<const D: usize>(
    b: &Billiard<D>,
    tol: &Tolerances,
) -> Result<ClosestPairs<D>, GeometryError> {
    let u = b.len();
    let mut pairs = Vec::with_capacity(u * (u - 1) / 2);
    for i in 0..u {
        for j in (i + 1)..u {
            let (p_ij, p_ji, distance) = closest_pair(&b.obstacles()[i], &b.obstacles()[j], tol)?;
            pairs.push(PairPoints {
                i,
                j,
                p_ij,
                p_ji,
                distance,
            });
        }
    }
    Ok(ClosestPairs { pairs, u })
}

/// Convex hull H of all closest-pair points. A degenerate hull is returned
/// flagged, not as an error.
pub fn hull_h<const D: usize>(pairs: &ClosestPairs<D>) -> ConvexPolytope<D> {
    convex_hull(&pairs.all_points())
}

/// Result of the empirical convex-hull containment test.
#[derive(Debug, Clone, Serialize)]
pub struct ConjectureReport {
    pub orbits_tested: usize,
    pub solver_failures: usize,
    /// Largest signed distance of any orbit point outside H (negative when
    /// every point is strictly inside).
    pub max_violation: f64,
    pub worst_sequence: Option<Vec<usize>>,
}

/// Enumerate admissible periodic words of length 2..=max_period up to
/// rotation, in lexicographic order of their canonical rotations.
pub fn enumerate_periodic_sequences(u: usize, max_period: usize) -> Vec<SymbolSequence> {
    let mut out = Vec::new();
    let mut word: Vec<usize> = Vec::new();
    for n in 2..=max_period {
        word.clear();
        enumerate_rec(u, n, &mut word, &mut out);
    }
    out
}

fn enumerate_rec(u: usize, n: usize, word: &mut Vec<usize>, out: &mut Vec<SymbolSequence>) {
    if word.len() == n {
        if word.first() != word.last() {
            let seq = SymbolSequence {
                symbols: word.clone(),
                periodic: true,
            };
            if seq.canonical_rotation() == *word {
                out.push(seq);
            }
        }
        return;
    }
    for s in 0..u {
        if word.last() == Some(&s) {
            continue;
        }
        word.push(s);
        enumerate_rec(u, n, word, out);
        word.pop();
    }
}

/// Uniform random admissible periodic word of the given period.
fn random_sequence(u: usize, period: usize, rng: &mut ChaCha8Rng) -> SymbolSequence {
    loop {
        let mut word = Vec::with_capacity(period);
        for _ in 0..period {
            loop {
                let s = rng.gen_range(0..u);
                if word.last() != Some(&s) {
                    word.push(s);
                    break;
                }
            }
        }
        if word.first() != word.last() {
            return SymbolSequence {
                symbols: word,
                periodic: true,
            };
        }
    }
}

/// Find every periodic orbit up to `max_period` (or a random sample of
/// `samples` admissible words when the enumeration is larger) and record the
/// worst outward excursion from H.
pub fn test_hull_conjecture<const D: usize>(
    b: &Billiard<D>,
    max_period: usize,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ConjectureReport, OrbitError> {
    let pairs = all_closest_pairs(b, tol)?;
    let hull = hull_h(&pairs);
    let sequences = {
        let all = enumerate_periodic_sequences(b.len(), max_period);
        if all.len() <= samples {
            all
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = Vec::with_capacity(samples);
            let mut seen: Vec<Vec<usize>> = Vec::new();
            while picked.len() < samples {
                let period = rng.gen_range(2..=max_period);
                let seq = random_sequence(b.len(), period, &mut rng);
                let canon = seq.canonical_rotation();
                if !seen.contains(&canon) {
                    seen.push(canon);
                    picked.push(seq);
                }
            }
            picked
        }
    };
    let mut report = ConjectureReport {
        orbits_tested: 0,
        solver_failures: 0,
        max_violation: f64::NEG_INFINITY,
        worst_sequence: None,
    };
    for seq in &sequences {
        match find_periodic_orbit(b, seq, tol) {
            Err(OrbitError::NoConvergence) => report.solver_failures += 1,
            Err(e) => return Err(e),
            Ok(orbit) => {
                report.orbits_tested += 1;
                for p in &orbit.points {
                    let d = hull
                        .signed_distance(p)
                        .expect("hull of a valid billiard is non-degenerate");
                    if d > report.max_violation {
                        report.max_violation = d;
                        report.worst_sequence = Some(seq.symbols().to_vec());
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Obstacle;
    use approx::assert_relative_eq;
    use nalgebra::Vector2;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn triangle_billiard(side: f64) -> Billiard<2> {
        let h = side * 3f64.sqrt() / 2.0;
        Billiard::new(
            vec![
                Obstacle::<2>::ball(Vector2::new(0.0, 0.0), 1.0).unwrap(),
                Obstacle::<2>::ball(Vector2::new(side, 0.0), 1.0).unwrap(),
                Obstacle::<2>::ball(Vector2::new(side / 2.0, h), 1.0).unwrap(),
            ],
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn admissibility_checks() {
        assert!(SymbolSequence::periodic(vec![0, 1, 2], 3).is_ok());
        assert!(SymbolSequence::periodic(vec![0, 1, 1], 3).is_err());
        assert!(SymbolSequence::periodic(vec![0, 1, 0], 3).is_err());
        assert!(SymbolSequence::periodic(vec![0, 3], 3).is_err());
        assert!(SymbolSequence::periodic(vec![0], 3).is_err());
    }

    #[test]
    fn period_two_matches_closest_pair() {
        let b = triangle_billiard(10.0);
        let t = tol();
        let seq = SymbolSequence::periodic(vec![0, 1], 3).unwrap();
        let orbit = find_periodic_orbit(&b, &seq, &t).unwrap();
        let (p, q, d) = closest_pair(&b.obstacles()[0], &b.obstacles()[1], &t).unwrap();
        assert!((orbit.points[0] - p).norm() < 1e-9);
        assert!((orbit.points[1] - q).norm() < 1e-9);
        assert_relative_eq!(orbit.length, 2.0 * d, epsilon = 1e-9);
        assert!(orbit.residual < 1e-8);
    }

    #[test]
    fn equilateral_triangle_orbit_is_symmetric() {
        let side = 10.0;
        let b = triangle_billiard(side);
        let seq = SymbolSequence::periodic(vec![0, 1, 2], 3).unwrap();
        let orbit = find_periodic_orbit(&b, &seq, &tol()).unwrap();
        // Equal flight lengths by symmetry; points on the inward bisectors.
        let d01 = (orbit.points[0] - orbit.points[1]).norm();
        let d12 = (orbit.points[1] - orbit.points[2]).norm();
        let d20 = (orbit.points[2] - orbit.points[0]).norm();
        assert_relative_eq!(d01, d12, epsilon = 1e-8);
        assert_relative_eq!(d12, d20, epsilon = 1e-8);
        assert!(orbit.residual < 1e-8);
        let centroid = Vector2::new(side / 2.0, side * 3f64.sqrt() / 6.0);
        for (j, p) in orbit.points.iter().enumerate() {
            let c = b.obstacles()[seq.symbols()[j]].center();
            let to_centroid = (centroid - c).normalize();
            assert!(((p - c).normalize() - to_centroid).norm() < 1e-8);
        }
    }

    #[test]
    fn rotated_sequence_gives_same_point_set() {
        let b = triangle_billiard(9.0);
        let t = tol();
        let a = find_periodic_orbit(&b, &SymbolSequence::periodic(vec![0, 1, 2], 3).unwrap(), &t)
            .unwrap();
        let r = find_periodic_orbit(&b, &SymbolSequence::periodic(vec![1, 2, 0], 3).unwrap(), &t)
            .unwrap();
        for p in &a.points {
            assert!(r.points.iter().any(|q| (p - q).norm() < 1e-9));
        }
    }

    #[test]
    fn local_minimality_certificate() {
        let b = triangle_billiard(10.0);
        let t = tol();
        let seq = SymbolSequence::periodic(vec![0, 1, 2], 3).unwrap();
        let orbit = find_periodic_orbit(&b, &seq, &t).unwrap();
        let f = |pts: &[Point<2>]| -> f64 {
            (0..pts.len())
                .map(|j| (pts[j] - pts[(j + 1) % pts.len()]).norm())
                .sum()
        };
        let base = f(&orbit.points);
        for j in 0..orbit.points.len() {
            let k = &b.obstacles()[seq.symbols()[j]];
            let n = normal_and_curvatures(k, &orbit.points[j], &t).unwrap().normal;
            let tangent = Vector2::new(-n.y, n.x);
            for sign in [-1.0, 1.0] {
                let mut pts = orbit.points.clone();
                pts[j] =
                    project_to_boundary(k, &(pts[j] + tangent * (sign * 1e-4)), &t).unwrap();
                assert!(f(&pts) >= base - 1e-10);
            }
        }
    }

    #[test]
    fn enumeration_counts_and_admissibility() {
        // u = 3: period-2 words up to rotation: {01, 02, 12} -> 3.
        let seqs = enumerate_periodic_sequences(3, 2);
        assert_eq!(seqs.len(), 3);
        for s in enumerate_periodic_sequences(4, 6) {
            assert!(SymbolSequence::periodic(s.symbols().to_vec(), 4).is_ok());
        }
    }

    #[test]
    fn hull_h_contains_triangle_orbit() {
        let b = triangle_billiard(10.0);
        let t = tol();
        let pairs = all_closest_pairs(&b, &t).unwrap();
        assert_eq!(pairs.pairs().len(), 3);
        let hull = hull_h(&pairs);
        assert!(!hull.degenerate);
        let orbit =
            find_periodic_orbit(&b, &SymbolSequence::periodic(vec![0, 1, 2], 3).unwrap(), &t)
                .unwrap();
        for p in &orbit.points {
            assert!(hull.contains(p, 1e-7));
        }
    }
}
