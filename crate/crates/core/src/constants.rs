//! Scalar billiard constants — pair distances d±_ij, hull clearances b⁻,
//! reflection-angle bounds cos φ, curvature extrema κ± — over whole
//! boundaries ("natural") or restricted to the closest-pair hull H
//! ("adjusted"), and the (γ, θ) domain they span.

use serde::{Deserialize, Serialize};

use crate::geometry::{
    dir2, distance_obstacle_to_hull, normal_and_curvatures, no_eclipse_check, Billiard,
    ConvexPolytope, GeometryError, Obstacle, ObstacleKind, Point,
};
use crate::orbits::{all_closest_pairs, hull_h, ClosestPairs};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Extrema over whole obstacle boundaries.
    Natural,
    /// Extrema restricted to ∂K ∩ H with per-pair distance and angle bounds.
    Adjusted,
}

/// Which obstacle's curvature bounds a pair's (γ) interval: the obstacle the
/// trajectory departs from, or the one it strikes next. The two readings give
/// different g_max values; departure is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaReading {
    Departure,
    Target,
}

impl Default for KappaReading {
    fn default() -> Self {
        KappaReading::Departure
    }
}

/// Constants attached to the ordered obstacle pair (i, j): flight-length
/// window, hull clearance of the departure obstacle, angle bound, and the
/// curvature window of the obstacle selected by the κ reading.
#[derive(Debug, Clone, Serialize)]
pub struct PairConstants {
    pub i: usize,
    pub j: usize,
    pub d_minus: f64,
    pub d_plus: f64,
    pub b_minus: f64,
    pub cos_phi_bound: f64,
    pub kappa_minus_i: f64,
    pub kappa_plus_i: f64,
}

#[derive(Debug, Clone)]
pub struct ConstantsReport<const D: usize> {
    pub mode: Mode,
    pub reading: KappaReading,
    pub pairs: Vec<PairConstants>,
    pub d_min: f64,
    pub d_max: f64,
    pub b_minus_global: f64,
    /// Lower bound on cos φ over trapped reflections: b⁻ / d_max.
    pub cos_phi_plus: f64,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    pub hull: ConvexPolytope<D>,
}

/// One (γ, θ) rectangle; `pair` is None for the single natural-mode
/// rectangle.
#[derive(Debug, Clone, Serialize)]
pub struct DomainRect {
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub pair: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DomainD {
    pub rects: Vec<DomainRect>,
    /// Cosine exponent on the γ lower endpoint: 0 in the plane, 1 in space.
    pub iota: u32,
}

/// Uniformly spread boundary sample points (angle grid in 2D, Fibonacci
/// sphere mapped through the affine parametrization in 3D).
fn sample_boundary<const D: usize>(k: &Obstacle<D>, n: usize) -> Vec<Point<D>> {
    let r = k.orientation();
    let a = k.semi_axes();
    let c = k.center();
    let mut out = Vec::with_capacity(n);
    match D {
        2 => {
            for i in 0..n {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let s: Point<D> = dir2::<D>(t);
                let world: Point<D> = r * s.component_mul(&a);
                out.push(c + world);
            }
        }
        _ => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for i in 0..n {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let t = golden * i as f64;
                let mut s = Point::<D>::zeros();
                s[0] = rho * t.cos();
                s[1] = rho * t.sin();
                s[2] = z;
                let world: Point<D> = r * s.component_mul(&a);
                out.push(c + world);
            }
        }
    }
    out
}

/// Principal-curvature extrema of ∂K over the given points (all of ∂K when
/// `hull` is None, else only points inside the hull). Balls short-circuit to
/// 1/r.
fn curvature_extrema<const D: usize>(
    k: &Obstacle<D>,
    hull: Option<(&ConvexPolytope<D>, &[Point<D>])>,
    tol: &Tolerances,
) -> Result<(f64, f64), GeometryError> {
    if k.kind() == ObstacleKind::Ball {
        let inv_r = 1.0 / k.semi_axes()[0];
        return Ok((inv_r, inv_r));
    }
    let n = if D == 2 {
        tol.hull_samples_2d
    } else {
        tol.hull_samples_3d
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let samples = sample_boundary(k, n);
    let anchors: &[Point<D>] = hull.map(|(_, a)| a).unwrap_or(&[]);
    for q in samples.iter().chain(anchors.iter()) {
        if let Some((h, _)) = hull {
            if !h.contains(q, tol.hull) {
                continue;
            }
        }
        let data = normal_and_curvatures(k, q, tol)?;
        lo = lo.min(data.curvatures[0]);
        hi = hi.max(*data.curvatures.last().unwrap());
    }
    if !lo.is_finite() {
        return Err(GeometryError::NoConvergence);
    }
    Ok((lo, hi))
}

/// Max over l≠i, m≠j of |p_il − p_jm|: the widest flight between the pair's
/// admissible arrival regions, measured on the closest-pair point set.
fn pair_d_plus<const D: usize>(pairs: &ClosestPairs<D>, u: usize, i: usize, j: usize) -> f64 {
    let mut best = 0.0f64;
    for l in 0..u {
        if l == i {
            continue;
        }
        for m in 0..u {
            if m == j {
                continue;
            }
            best = best.max((pairs.point(i, l) - pairs.point(j, m)).norm());
        }
    }
    best
}

pub fn compute_constants<const D: usize>(
    b: &Billiard<D>,
    mode: Mode,
    reading: KappaReading,
    tol: &Tolerances,
) -> Result<ConstantsReport<D>, GeometryError> {
    let eclipse = no_eclipse_check(b, tol);
    if !eclipse.all_pass {
        let worst = eclipse
            .triples
            .iter()
            .map(|t| t.margin)
            .fold(f64::INFINITY, f64::min);
        return Err(GeometryError::EclipseViolation(worst));
    }
    let u = b.len();
    let obstacles = b.obstacles();
    let cp = all_closest_pairs(b, tol)?;
    let hull = hull_h(&cp);
    if hull.degenerate && mode == Mode::Adjusted {
        return Err(GeometryError::BadObstacle(
            "closest-pair hull is degenerate; adjusted constants undefined".into(),
        ));
    }

    // Per-obstacle curvature extrema, plus hull-anchored p-points so the
    // restricted extrema are never taken over an empty sample set.
    let mut kappa: Vec<(f64, f64)> = Vec::with_capacity(u);
    for (i, k) in obstacles.iter().enumerate() {
        let anchors: Vec<Point<D>> = (0..u).filter(|&l| l != i).map(|l| cp.point(i, l)).collect();
        let window = match mode {
            Mode::Natural => curvature_extrema(k, None, tol)?,
            Mode::Adjusted => curvature_extrema(k, Some((&hull, &anchors)), tol)?,
        };
        kappa.push(window);
    }
    let kappa_minus = kappa.iter().map(|k| k.0).fold(f64::INFINITY, f64::min);
    let kappa_plus = kappa.iter().map(|k| k.1).fold(0.0f64, f64::max);

    // b⁻_ij = min over k ∉ {i, j} of d(K_i, Cvx(K_j, K_k)).
    let mut b_minus = vec![vec![f64::INFINITY; u]; u];
    for i in 0..u {
        for j in 0..u {
            if i == j {
                continue;
            }
            for k in 0..u {
                if k == i || k == j {
                    continue;
                }
                let d = distance_obstacle_to_hull(&obstacles[i], (&obstacles[j], &obstacles[k]), tol)?;
                b_minus[i][j] = b_minus[i][j].min(d);
            }
        }
    }

    let d_max = (0..u)
        .flat_map(|i| (0..u).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| pair_d_plus(&cp, u, i, j))
        .fold(0.0f64, f64::max);
    let b_minus_global = (0..u)
        .flat_map(|i| {
            let row = &b_minus[i];
            (0..u).filter(move |&j| j != i).map(move |j| row[j])
        })
        .fold(f64::INFINITY, f64::min);
    let cos_phi_plus = (b_minus_global / d_max).min(1.0);

    let mut pairs = Vec::with_capacity(u * (u - 1));
    for i in 0..u {
        for j in 0..u {
            if i == j {
                continue;
            }
            let kap = match reading {
                KappaReading::Departure => kappa[i],
                KappaReading::Target => kappa[j],
            };
            let d_plus = pair_d_plus(&cp, u, i, j);
            // Per-pair angle bound: the flight between this pair is at most
            // d⁺_ij, so cos φ ≥ b⁻_ij/d⁺_ij, sharper than the global
            // b⁻/d_max.
            let cos_phi_bound = match mode {
                Mode::Natural => cos_phi_plus,
                Mode::Adjusted => (b_minus[i][j] / d_plus).min(1.0),
            };
            pairs.push(PairConstants {
                i,
                j,
                d_minus: cp.distance(i, j),
                d_plus,
                b_minus: b_minus[i][j],
                cos_phi_bound,
                kappa_minus_i: kap.0,
                kappa_plus_i: kap.1,
            });
        }
    }
    let d_min = pairs.iter().map(|p| p.d_minus).fold(f64::INFINITY, f64::min);

    Ok(ConstantsReport {
        mode,
        reading,
        pairs,
        d_min,
        d_max,
        b_minus_global,
        cos_phi_plus,
        kappa_minus,
        kappa_plus,
        hull,
    })
}

pub fn build_domain<const D: usize>(report: &ConstantsReport<D>) -> DomainD {
    let iota = if D == 2 { 0 } else { 1 };
    let cosi = |c: f64| if iota == 0 { 1.0 } else { c };
    let rects = match report.mode {
        Mode::Natural => vec![DomainRect {
            gamma_lo: report.kappa_minus * cosi(report.cos_phi_plus),
            gamma_hi: report.kappa_plus / report.cos_phi_plus,
            theta_lo: report.d_min,
            theta_hi: report.d_max,
            pair: None,
        }],
        Mode::Adjusted => report
            .pairs
            .iter()
            .map(|p| DomainRect {
                gamma_lo: p.kappa_minus_i * cosi(p.cos_phi_bound),
                gamma_hi: p.kappa_plus_i / p.cos_phi_bound,
                theta_lo: p.d_minus,
                theta_hi: p.d_plus,
                pair: Some((p.i, p.j)),
            })
            .collect(),
    };
    DomainD { rects, iota }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Vector2;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn triangle(radii: [f64; 3]) -> Billiard<2> {
        Billiard::new(
            vec![
                Obstacle::<2>::ball(Vector2::new(0.0, 0.0), radii[0]).unwrap(),
                Obstacle::<2>::ball(Vector2::new(10.0, 0.0), radii[1]).unwrap(),
                Obstacle::<2>::ball(Vector2::new(5.0, 5.0 * 3f64.sqrt()), radii[2]).unwrap(),
            ],
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn two_unit_balls_pair_distance() {
        // Unit balls, centers 10 apart, third obstacle far away.
        let b = Billiard::new(
            vec![
                Obstacle::<2>::ball(Vector2::new(0.0, 0.0), 1.0).unwrap(),
                Obstacle::<2>::ball(Vector2::new(10.0, 0.0), 1.0).unwrap(),
                Obstacle::<2>::ball(Vector2::new(5.0, 50.0), 1.0).unwrap(),
            ],
            &tol(),
        )
        .unwrap();
        let r = compute_constants(&b, Mode::Natural, KappaReading::Departure, &tol()).unwrap();
        let p01 = r.pairs.iter().find(|p| (p.i, p.j) == (0, 1)).unwrap();
        assert_relative_eq!(p01.d_minus, 8.0, epsilon = 1e-9);
    }

    #[test]
    fn ball_curvature_constant_in_both_modes() {
        let b = triangle([1.0, 2.0, 0.5]);
        let t = tol();
        for mode in [Mode::Natural, Mode::Adjusted] {
            let r = compute_constants(&b, mode, KappaReading::Departure, &t).unwrap();
            assert_relative_eq!(r.kappa_minus, 0.5, epsilon = 1e-12);
            assert_relative_eq!(r.kappa_plus, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn adjusted_tightens_every_pair() {
        let b = triangle([1.0, 1.5, 0.75]);
        let t = tol();
        let nat = compute_constants(&b, Mode::Natural, KappaReading::Departure, &t).unwrap();
        let adj = compute_constants(&b, Mode::Adjusted, KappaReading::Departure, &t).unwrap();
        for (pn, pa) in nat.pairs.iter().zip(&adj.pairs) {
            assert!(pa.d_minus >= pn.d_minus - 1e-12);
            assert!(pa.d_plus <= pn.d_plus + 1e-12);
            assert!(pa.cos_phi_bound >= pn.cos_phi_bound - 1e-12);
        }
        assert!(nat.cos_phi_plus > 0.0 && nat.cos_phi_plus <= 1.0);
        assert!((nat.cos_phi_plus - nat.b_minus_global / nat.d_max).abs() < 1e-12);
    }

    #[test]
    fn domain_counts_and_nesting() {
        let b = triangle([1.0, 1.0, 1.0]);
        let t = tol();
        let nat = compute_constants(&b, Mode::Natural, KappaReading::Departure, &t).unwrap();
        let adj = compute_constants(&b, Mode::Adjusted, KappaReading::Departure, &t).unwrap();
        let dn = build_domain(&nat);
        let da = build_domain(&adj);
        assert_eq!(dn.rects.len(), 1);
        assert_eq!(da.rects.len(), 6);
        assert_eq!(dn.iota, 0);
        let n = &dn.rects[0];
        for r in &da.rects {
            assert!(r.gamma_lo > 0.0 && r.gamma_lo <= r.gamma_hi);
            assert!(r.theta_lo > 0.0 && r.theta_lo <= r.theta_hi);
            // Every adjusted rectangle nests in the natural one.
            assert!(r.gamma_lo >= n.gamma_lo - 1e-12);
            assert!(r.gamma_hi <= n.gamma_hi + 1e-12);
            assert!(r.theta_lo >= n.theta_lo - 1e-12);
            assert!(r.theta_hi <= n.theta_hi + 1e-12);
        }
    }

    #[test]
    fn symmetric_equal_balls_give_identical_rectangles() {
        let b = triangle([1.0, 1.0, 1.0]);
        let t = tol();
        let adj = compute_constants(&b, Mode::Adjusted, KappaReading::Departure, &t).unwrap();
        let d = build_domain(&adj);
        let first = &d.rects[0];
        for r in &d.rects {
            assert_relative_eq!(r.gamma_lo, first.gamma_lo, epsilon = 1e-6);
            assert_relative_eq!(r.gamma_hi, first.gamma_hi, epsilon = 1e-6);
            assert_relative_eq!(r.theta_lo, first.theta_lo, epsilon = 1e-6);
            assert_relative_eq!(r.theta_hi, first.theta_hi, epsilon = 1e-6);
        }
    }

    #[test]
    fn iota_is_one_in_space() {
        use nalgebra::Vector3;
        let b = Billiard::new(
            vec![
                Obstacle::<3>::ball(Vector3::new(0.0, 0.0, 0.0), 1.0).unwrap(),
                Obstacle::<3>::ball(Vector3::new(10.0, 0.0, 0.0), 1.0).unwrap(),
                Obstacle::<3>::ball(Vector3::new(5.0, 8.66, 0.0), 1.0).unwrap(),
            ],
            &tol(),
        )
        .unwrap();
        let t = tol();
        let nat = compute_constants(&b, Mode::Natural, KappaReading::Departure, &t).unwrap();
        let d = build_domain(&nat);
        assert_eq!(d.iota, 1);
        // γ_lo picks up the cos φ⁺ factor in space.
        assert_relative_eq!(
            d.rects[0].gamma_lo,
            nat.kappa_minus * nat.cos_phi_plus,
            epsilon = 1e-12
        );
    }
}
