//! SVG figure emission: 2D billiard layouts (obstacles, pair distances,
//! hull, orbits) and the (γ, θ) domain picture with iso-contours of g.
//! Conventions: y-up, world units from the config, 40 px per unit by default.

use billiard_core::constants::{DomainD, DomainRect};
use billiard_core::dimension::g;
use billiard_core::geometry::ConvexPolytope;
use billiard_core::orbits::ClosestPairs;
use billiard_core::{Billiard, Obstacle};
use nalgebra::Vector2;
use std::fmt::Write as _;

pub const PX_PER_UNIT: f64 = 40.0;

/// World-to-screen mapping with a flipped y axis.
struct Frame {
    xmin: f64,
    ymax: f64,
    scale: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64, scale: f64) -> Self {
        let margin = 0.75;
        let (xmin, xmax) = (xmin - margin, xmax + margin);
        let (ymin, ymax) = (ymin - margin, ymax + margin);
        Self {
            xmin,
            ymax,
            scale,
            width: (xmax - xmin) * scale,
            height: (ymax - ymin) * scale,
        }
    }

    fn x(&self, wx: f64) -> f64 {
        (wx - self.xmin) * self.scale
    }

    fn y(&self, wy: f64) -> f64 {
        (self.ymax - wy) * self.scale
    }
}

fn open_svg(f: &Frame) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">\n",
        f.width, f.height, f.width, f.height
    )
}

fn obstacle_element(k: &Obstacle<2>, f: &Frame) -> String {
    let c = k.center();
    let a = k.semi_axes();
    let m = k.orientation();
    let angle = -m[(1, 0)].atan2(m[(0, 0)]).to_degrees();
    format!(
        "  <ellipse cx=\"{:.3}\" cy=\"{:.3}\" rx=\"{:.3}\" ry=\"{:.3}\" transform=\"rotate({:.3} {:.3} {:.3})\" fill=\"#d0d7e2\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n",
        f.x(c.x), f.y(c.y), a[0] * f.scale, a[1] * f.scale, angle, f.x(c.x), f.y(c.y)
    )
}

fn segment(p: &Vector2<f64>, q: &Vector2<f64>, f: &Frame, style: &str) -> String {
    format!(
        "  <line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" {style}/>\n",
        f.x(p.x),
        f.y(p.y),
        f.x(q.x),
        f.y(q.y)
    )
}

fn bounding_frame(b: &Billiard<2>) -> Frame {
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for k in b.obstacles() {
        let c = k.center();
        let r = k.circumradius();
        xmin = xmin.min(c.x - r);
        xmax = xmax.max(c.x + r);
        ymin = ymin.min(c.y - r);
        ymax = ymax.max(c.y + r);
    }
    Frame::new(xmin, xmax, ymin, ymax, PX_PER_UNIT)
}

fn hull_polygon(hull: &ConvexPolytope<2>, f: &Frame) -> String {
    let mut pts = String::new();
    for v in &hull.vertices {
        let _ = write!(pts, "{:.3},{:.3} ", f.x(v.x), f.y(v.y));
    }
    format!(
        "  <polygon points=\"{}\" fill=\"#ffe9b0\" fill-opacity=\"0.55\" stroke=\"#b08020\" stroke-width=\"1\"/>\n",
        pts.trim_end()
    )
}

/// Billiard layout: obstacles, the hull H, solid closest-pair segments
/// (d⁻_ij) and dashed widest p-point segments (d⁺_ij).
pub fn billiard_svg(b: &Billiard<2>, pairs: &ClosestPairs<2>, hull: &ConvexPolytope<2>) -> String {
    let f = bounding_frame(b);
    let mut s = open_svg(&f);
    s.push_str(&hull_polygon(hull, &f));
    // Dashed d+ segments: for each unordered pair, the widest p-point flight.
    let u = b.len();
    for i in 0..u {
        for j in (i + 1)..u {
            let mut best = (0.0f64, Vector2::zeros(), Vector2::zeros());
            for l in 0..u {
                if l == i {
                    continue;
                }
                for m in 0..u {
                    if m == j {
                        continue;
                    }
                    let (p, q) = (pairs.point(i, l), pairs.point(j, m));
                    let d = (p - q).norm();
                    if d > best.0 {
                        best = (d, p, q);
                    }
                }
            }
            s.push_str(&segment(
                &best.1,
                &best.2,
                &f,
                "stroke=\"#777777\" stroke-width=\"1\" stroke-dasharray=\"6 4\"",
            ));
        }
    }
    for p in pairs.pairs() {
        s.push_str(&segment(
            &p.p_ij,
            &p.p_ji,
            &f,
            "stroke=\"#222222\" stroke-width=\"1.5\"",
        ));
    }
    for k in b.obstacles() {
        s.push_str(&obstacle_element(k, &f));
    }
    for p in pairs.all_points() {
        let _ = write!(
            s,
            "  <circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"3\" fill=\"#c03030\"/>\n",
            f.x(p.x),
            f.y(p.y)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Billiard layout plus a closed orbit polyline.
pub fn orbit_svg(
    b: &Billiard<2>,
    pairs: &ClosestPairs<2>,
    hull: &ConvexPolytope<2>,
    orbit: &[Vector2<f64>],
) -> String {
    let base = billiard_svg(b, pairs, hull);
    let f = bounding_frame(b);
    let mut pts = String::new();
    for p in orbit.iter().chain(orbit.first().into_iter()) {
        let _ = write!(pts, "{:.3},{:.3} ", f.x(p.x), f.y(p.y));
    }
    let overlay = format!(
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"#1050c0\" stroke-width=\"2\"/>\n</svg>\n",
        pts.trim_end()
    );
    base.replace("</svg>\n", &overlay)
}

/// Marching-squares iso-contour segments for `g(γ, θ) = level` over the
/// window, in world (γ, θ) coordinates.
fn contour_segments(
    win: &DomainRect,
    n: usize,
    level: f64,
) -> Vec<(Vector2<f64>, Vector2<f64>)> {
    let gx = |i: usize| win.gamma_lo + (win.gamma_hi - win.gamma_lo) * i as f64 / n as f64;
    let ty = |j: usize| win.theta_lo + (win.theta_hi - win.theta_lo) * j as f64 / n as f64;
    let mut vals = vec![0.0f64; (n + 1) * (n + 1)];
    for i in 0..=n {
        for j in 0..=n {
            vals[i * (n + 1) + j] = g(gx(i), ty(j));
        }
    }
    let at = |i: usize, j: usize| vals[i * (n + 1) + j] - level;
    let mut segs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            // Cell corners: (i,j), (i+1,j), (i+1,j+1), (i,j+1).
            let corners = [
                (at(i, j), gx(i), ty(j)),
                (at(i + 1, j), gx(i + 1), ty(j)),
                (at(i + 1, j + 1), gx(i + 1), ty(j + 1)),
                (at(i, j + 1), gx(i), ty(j + 1)),
            ];
            let mut crossings: Vec<Vector2<f64>> = Vec::new();
            for e in 0..4 {
                let (v0, x0, y0) = corners[e];
                let (v1, x1, y1) = corners[(e + 1) % 4];
                if (v0 <= 0.0) != (v1 <= 0.0) {
                    let t = v0 / (v0 - v1);
                    crossings.push(Vector2::new(x0 + t * (x1 - x0), y0 + t * (y1 - y0)));
                }
            }
            if crossings.len() == 2 {
                segs.push((crossings[0], crossings[1]));
            }
        }
    }
    segs
}

/// The (γ, θ) picture: natural rectangle outline, adjusted rectangles
/// shaded, g iso-contours sampled on a 200x200 grid.
pub fn domain_svg(natural: &DomainD, adjusted: &DomainD) -> String {
    let nat = &natural.rects[0];
    let win = DomainRect {
        gamma_lo: 0.0,
        gamma_hi: nat.gamma_hi * 1.05,
        theta_lo: 0.0,
        theta_hi: nat.theta_hi * 1.05,
        pair: None,
    };
    // Fixed-size canvas with anisotropic world scaling.
    let (w, h) = (640.0f64, 480.0f64);
    let sx = w / (win.gamma_hi - win.gamma_lo);
    let sy = h / (win.theta_hi - win.theta_lo);
    let px = |gamma: f64| (gamma - win.gamma_lo) * sx;
    let py = |theta: f64| h - (theta - win.theta_lo) * sy;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n"
    );
    // Iso-contours of g between its extreme values over the natural corners.
    let g_lo = g(nat.gamma_lo.max(1e-9), nat.theta_hi);
    let g_hi = g(nat.gamma_hi, nat.theta_lo);
    let levels = 9;
    let mut grid_win = win.clone();
    grid_win.gamma_lo = 1e-6;
    grid_win.theta_lo = 1e-6;
    for l in 0..levels {
        let level = g_lo + (g_hi - g_lo) * (l as f64 + 0.5) / levels as f64;
        for (p, q) in contour_segments(&grid_win, 200, level) {
            let _ = write!(
                s,
                "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#c8d4e8\" stroke-width=\"0.8\"/>\n",
                px(p.x), py(p.y), px(q.x), py(q.y)
            );
        }
    }
    let rect_el = |r: &DomainRect, style: &str| {
        format!(
            "  <rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" {style}/>\n",
            px(r.gamma_lo),
            py(r.theta_hi),
            (r.gamma_hi - r.gamma_lo) * sx,
            (r.theta_hi - r.theta_lo) * sy,
        )
    };
    for r in &adjusted.rects {
        s.push_str(&rect_el(
            r,
            "fill=\"#f0b060\" fill-opacity=\"0.45\" stroke=\"#b06010\" stroke-width=\"1\"",
        ));
    }
    s.push_str(&rect_el(
        nat,
        "fill=\"none\" stroke=\"#203050\" stroke-width=\"2\"",
    ));
    s.push_str("</svg>\n");
    s
}
