//! Convex hulls of finite point sets in R^2 (monotone chain) and R^3
//! (incremental), with signed-distance queries against the hull boundary.

use super::Point;

/// Convex hull of a point set. In 2D `vertices` is the counter-clockwise
/// boundary loop; in 3D `faces` triangulates the boundary with outward
/// normals. `degenerate` is set when the input is affinely dependent, in
/// which case only `vertices` (the deduplicated input extremes) is kept.
#[derive(Debug, Clone)]
pub struct ConvexPolytope<const D: usize> {
    pub vertices: Vec<Point<D>>,
    pub faces: Vec<[usize; 3]>,
    face_normals: Vec<Point<D>>,
    face_offsets: Vec<f64>,
    pub degenerate: bool,
}

impl<const D: usize> ConvexPolytope<D> {
    /// Signed distance from `p` to the hull boundary: negative inside,
    /// positive outside (measured as the largest outward face-plane excess,
    /// which is exact for containment tests). `None` for degenerate hulls.
    pub fn signed_distance(&self, p: &Point<D>) -> Option<f64> {
        if self.degenerate || self.face_normals.is_empty() {
            return None;
        }
        let mut best = f64::NEG_INFINITY;
        for (n, b) in self.face_normals.iter().zip(&self.face_offsets) {
            best = best.max(n.dot(p) - b);
        }
        Some(best)
    }

    pub fn contains(&self, p: &Point<D>, tol: f64) -> bool {
        self.signed_distance(p).is_some_and(|d| d <= tol)
    }

    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.vertices.len() {
            for j in (i + 1)..self.vertices.len() {
                d = d.max((self.vertices[i] - self.vertices[j]).norm());
            }
        }
        d
    }
}

/// Convex hull of `points`. Degenerate (affinely dependent) inputs return a
/// flagged lower-dimensional hull rather than an error.
pub fn convex_hull<const D: usize>(points: &[Point<D>]) -> ConvexPolytope<D> {
    match D {
        2 => hull_2d(points),
        3 => hull_3d(points),
        _ => unreachable!("only D = 2 and D = 3 are supported"),
    }
}

fn scale<const D: usize>(points: &[Point<D>]) -> f64 {
    let mut s = 1.0f64;
    for p in points {
        s = s.max(p.amax());
    }
    s
}

fn dedup<const D: usize>(points: &[Point<D>], eps: f64) -> Vec<Point<D>> {
    let mut out: Vec<Point<D>> = Vec::with_capacity(points.len());
    for p in points {
        if out.iter().all(|q| (p - q).norm() > eps) {
            out.push(*p);
        }
    }
    out
}

fn hull_2d<const D: usize>(points: &[Point<D>]) -> ConvexPolytope<D> {
    let eps = 1e-12 * scale(points);
    let mut pts = dedup(points, eps);
    pts.sort_by(|a, b| (a[0], a[1]).partial_cmp(&(b[0], b[1])).unwrap());
    let cross = |o: &Point<D>, a: &Point<D>, b: &Point<D>| -> f64 {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    if pts.len() < 3 {
        return ConvexPolytope {
            vertices: pts,
            faces: vec![],
            face_normals: vec![],
            face_offsets: vec![],
            degenerate: true,
        };
    }
    let turn_eps = 1e-9 * scale(points);
    let build = |iter: &mut dyn Iterator<Item = &Point<D>>| -> Vec<Point<D>> {
        let mut chain: Vec<Point<D>> = Vec::new();
        for p in iter {
            while chain.len() >= 2
                && cross(&chain[chain.len() - 2], &chain[chain.len() - 1], p) <= turn_eps
            {
                chain.pop();
            }
            chain.push(*p);
        }
        chain
    };
    let mut lower = build(&mut pts.iter());
    let mut upper = build(&mut pts.iter().rev());
    lower.pop();
    upper.pop();
    lower.append(&mut upper);
    if lower.len() < 3 {
        // All points collinear: keep the two extremes.
        return ConvexPolytope {
            vertices: vec![*pts.first().unwrap(), *pts.last().unwrap()],
            faces: vec![],
            face_normals: vec![],
            face_offsets: vec![],
            degenerate: true,
        };
    }
    let mut normals = Vec::with_capacity(lower.len());
    let mut offsets = Vec::with_capacity(lower.len());
    for i in 0..lower.len() {
        let a = lower[i];
        let b = lower[(i + 1) % lower.len()];
        let e = b - a;
        let mut n = Point::<D>::zeros();
        // Outward normal of a CCW loop.
        n[0] = e[1];
        n[1] = -e[0];
        let n = n / n.norm();
        normals.push(n);
        offsets.push(n.dot(&a));
    }
    ConvexPolytope {
        vertices: lower,
        faces: vec![],
        face_normals: normals,
        face_offsets: offsets,
        degenerate: false,
    }
}

fn cross3<const D: usize>(a: &Point<D>, b: &Point<D>) -> Point<D> {
    let mut c = Point::<D>::zeros();
    c[0] = a[1] * b[2] - a[2] * b[1];
    c[1] = a[2] * b[0] - a[0] * b[2];
    c[2] = a[0] * b[1] - a[1] * b[0];
    c
}

fn hull_3d<const D: usize>(points: &[Point<D>]) -> ConvexPolytope<D> {
    let sc = scale(points);
    let eps = 1e-12 * sc;
    let pts = dedup(points, eps);
    let plane_eps = 1e-9 * sc;

    let degenerate = |pts: Vec<Point<D>>| ConvexPolytope {
        vertices: pts,
        faces: vec![],
        face_normals: vec![],
        face_offsets: vec![],
        degenerate: true,
    };

    // Seed a non-degenerate tetrahedron.
    if pts.len() < 4 {
        return degenerate(pts);
    }
    let i0 = 0;
    let Some(i1) = (1..pts.len()).find(|&i| (pts[i] - pts[i0]).norm() > eps) else {
        return degenerate(pts);
    };
    let Some(i2) = (1..pts.len()).find(|&i| {
        i != i1 && cross3(&(pts[i1] - pts[i0]), &(pts[i] - pts[i0])).norm() > plane_eps
    }) else {
        return degenerate(pts);
    };
    let n012 = cross3(&(pts[i1] - pts[i0]), &(pts[i2] - pts[i0]));
    let Some(i3) = (1..pts.len())
        .find(|&i| i != i1 && i != i2 && n012.dot(&(pts[i] - pts[i0])).abs() > plane_eps)
    else {
        return degenerate(pts);
    };

    let interior = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
    let orient = |f: [usize; 3]| -> [usize; 3] {
        let n = cross3(&(pts[f[1]] - pts[f[0]]), &(pts[f[2]] - pts[f[0]]));
        if n.dot(&(interior - pts[f[0]])) > 0.0 {
            [f[0], f[2], f[1]]
        } else {
            f
        }
    };
    let mut faces: Vec<[usize; 3]> = vec![
        orient([i0, i1, i2]),
        orient([i0, i1, i3]),
        orient([i0, i2, i3]),
        orient([i1, i2, i3]),
    ];

    let face_plane = |f: &[usize; 3]| -> (Point<D>, f64) {
        let n = cross3(&(pts[f[1]] - pts[f[0]]), &(pts[f[2]] - pts[f[0]])).normalize();
        (n, n.dot(&pts[f[0]]))
    };

    for (idx, p) in pts.iter().enumerate() {
        if idx == i0 || idx == i1 || idx == i2 || idx == i3 {
            continue;
        }
        let visible: Vec<usize> = (0..faces.len())
            .filter(|&fi| {
                let (n, b) = face_plane(&faces[fi]);
                n.dot(p) - b > plane_eps
            })
            .collect();
        if visible.is_empty() {
            continue;
        }
        // Horizon: edges of visible faces not shared with another visible face.
        let mut edge_count: Vec<((usize, usize), (usize, usize))> = Vec::new();
        for &fi in &visible {
            let f = faces[fi];
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                let key = (a.min(b), a.max(b));
                if let Some(pos) = edge_count.iter().position(|(k, _)| *k == key) {
                    edge_count.remove(pos);
                } else {
                    edge_count.push((key, (a, b)));
                }
            }
        }
        let horizon: Vec<(usize, usize)> = edge_count.into_iter().map(|(_, e)| e).collect();
        let mut keep: Vec<[usize; 3]> = (0..faces.len())
            .filter(|fi| !visible.contains(fi))
            .map(|fi| faces[fi])
            .collect();
        for (a, b) in horizon {
            keep.push(orient([a, b, idx]));
        }
        faces = keep;
    }

    // Collect used vertices and remap face indices.
    let mut used: Vec<usize> = faces.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let remap = |i: usize| used.binary_search(&i).unwrap();
    let vertices: Vec<Point<D>> = used.iter().map(|&i| pts[i]).collect();
    let faces: Vec<[usize; 3]> = faces
        .iter()
        .map(|f| [remap(f[0]), remap(f[1]), remap(f[2])])
        .collect();
    let mut normals = Vec::with_capacity(faces.len());
    let mut offsets = Vec::with_capacity(faces.len());
    for f in &faces {
        let n = cross3(
            &(vertices[f[1]] - vertices[f[0]]),
            &(vertices[f[2]] - vertices[f[0]]),
        )
        .normalize();
        normals.push(n);
        offsets.push(n.dot(&vertices[f[0]]));
    }
    ConvexPolytope {
        vertices,
        faces,
        face_normals: normals,
        face_offsets: offsets,
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Vector2, Vector3};

    #[test]
    fn triangle_drops_interior_point() {
        let pts = [
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(0.0, 1.0),
            Vector2::new(0.2, 0.2),
        ];
        let h = convex_hull(&pts);
        assert!(!h.degenerate);
        assert_eq!(h.vertices.len(), 3);
        for p in &pts {
            assert!(h.contains(p, 1e-9));
        }
        assert!(!h.contains(&Vector2::new(0.6, 0.6), 1e-9));
    }

    #[test]
    fn tetrahedron_drops_centroid() {
        let pts = [
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(0.25, 0.25, 0.25),
        ];
        let h = convex_hull(&pts);
        assert!(!h.degenerate);
        assert_eq!(h.vertices.len(), 4);
        assert_eq!(h.faces.len(), 4);
        for p in &pts {
            assert!(h.contains(p, 1e-9));
        }
        assert!(!h.contains(&Vector3::new(0.5, 0.5, 0.5), 1e-9));
    }

    #[test]
    fn collinear_points_flagged_degenerate() {
        let pts = [
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(2.0, 2.0),
        ];
        let h = convex_hull(&pts);
        assert!(h.degenerate);
        assert_eq!(h.vertices.len(), 2);
    }

    #[test]
    fn coplanar_3d_points_flagged_degenerate() {
        let pts = [
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(1.0, 0.0, 1.0),
            Vector3::new(0.0, 1.0, 1.0),
            Vector3::new(1.0, 1.0, 1.0),
        ];
        let h = convex_hull(&pts);
        assert!(h.degenerate);
    }

    #[test]
    fn random_disk_points_contained() {
        // Deterministic pseudo-random points in the unit disk.
        let mut pts = Vec::new();
        let mut s = 1234567u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        while pts.len() < 100 {
            let x = 2.0 * next() - 1.0;
            let y = 2.0 * next() - 1.0;
            if x * x + y * y <= 1.0 {
                pts.push(Vector2::new(x, y));
            }
        }
        let h = convex_hull(&pts);
        for p in &pts {
            assert!(h.contains(p, 1e-9));
        }
    }

    #[test]
    fn hull_monotone_under_union() {
        let s1 = [
            Vector2::new(0.0, 0.0),
            Vector2::new(2.0, 0.3),
            Vector2::new(1.0, 1.7),
            Vector2::new(0.2, 0.9),
        ];
        let s2 = [Vector2::new(3.0, 3.0), Vector2::new(-1.0, 2.0)];
        let h1 = convex_hull(&s1);
        let union: Vec<_> = s1.iter().chain(s2.iter()).copied().collect();
        let h12 = convex_hull(&union);
        for v in &h1.vertices {
            assert!(h12.contains(v, 1e-9));
        }
    }

    #[test]
    fn sphere_points_3d_contained() {
        let mut pts = Vec::new();
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        for i in 0..60 {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / 60.0;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            pts.push(Vector3::new(r * t.cos(), r * t.sin(), z));
        }
        let h = convex_hull(&pts);
        assert!(!h.degenerate);
        for p in &pts {
            assert!(h.contains(p, 1e-9));
        }
        assert!(h.contains(&Vector3::zeros(), 1e-9));
        assert!(!h.contains(&Vector3::new(1.1, 0.0, 0.0), 1e-9));
    }
}
