#![allow(dead_code)]

use rand::Rng;
use rotkit::geometry::{canonicalize, Convention, Point, Quad, RBox};

pub fn rbox(rng: &mut impl Rng, convention: Convention) -> RBox {
    let b = RBox {
        cx: rng.random_range(-500.0..500.0),
        cy: rng.random_range(-500.0..500.0),
        w: rng.random_range(1.0..200.0),
        h: rng.random_range(1.0..200.0),
        theta: rng.random_range(-180.0..180.0),
        convention,
    };
    canonicalize(&b).unwrap()
}

/// Convex quad with vertices on a rotated ellipse, angular gaps >= 0.3 rad.
pub fn convex_quad(rng: &mut impl Rng) -> Quad {
    loop {
        let mut t: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        t.sort_by(f64::total_cmp);
        let gaps_ok = (0..4).all(|i| {
            let next = if i == 3 { t[0] + std::f64::consts::TAU } else { t[i + 1] };
            next - t[i] > 0.3
        });
        if !gaps_ok {
            continue;
        }
        let (cx, cy) = (rng.random_range(-300.0..300.0), rng.random_range(-300.0..300.0));
        let (a, b) = (rng.random_range(5.0..100.0), rng.random_range(5.0..100.0));
        let (s, c) = rng.random_range(0.0..std::f64::consts::PI).sin_cos();
        let v = [0, 1, 2, 3].map(|i| {
            let (x, y) = (a * t[i].cos(), b * t[i].sin());
            Point::new(cx + c * x - s * y, cy + s * x + c * y)
        });
        return Quad::new(v).unwrap();
    }
}

/// Every point of `a` within `tol` of some point of `b` and vice versa.
pub fn same_point_set(a: &[Point], b: &[Point], tol: f64) -> bool {
    let near = |p: &Point, set: &[Point]| set.iter().any(|q| (p.x - q.x).abs() <= tol && (p.y - q.y).abs() <= tol);
    a.iter().all(|p| near(p, b)) && b.iter().all(|p| near(p, a))
}

/// Horizontal extent `[lo, hi]` of the convex CCW polygon at height `y`.
fn row_span(poly: &[Point], y: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let n = poly.len();
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        if (p.y <= y && y <= q.y) || (q.y <= y && y <= p.y) {
            let x = if p.y == q.y {
                lo = lo.min(p.x.min(q.x));
                hi = hi.max(p.x.max(q.x));
                continue;
            } else {
                p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y)
            };
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Number of cell centers `x0 + (i + 0.5) dx`, `0 <= i < n`, inside `[lo, hi]`.
fn centers_in(lo: f64, hi: f64, x0: f64, dx: f64, n: usize) -> i64 {
    let first = ((lo - x0) / dx - 0.5).ceil().max(0.0);
    let last = ((hi - x0) / dx - 0.5).floor().min(n as f64 - 1.0);
    if last < first {
        0
    } else {
        (last - first) as i64 + 1
    }
}

/// IoU estimated by sampling a `cells` x `cells` grid of cell centers over
/// the joint bounding box, one scanline per row.
pub fn raster_iou(a: &[Point], b: &[Point], cells: usize) -> f64 {
    let all = a.iter().chain(b);
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let (dx, dy) = ((x1 - x0) / cells as f64, (y1 - y0) / cells as f64);
    let (mut inter, mut union) = (0i64, 0i64);
    for r in 0..cells {
        let y = y0 + (r as f64 + 0.5) * dy;
        let sa = row_span(a, y).map_or(0, |(l, h)| centers_in(l, h, x0, dx, cells));
        let sb = row_span(b, y).map_or(0, |(l, h)| centers_in(l, h, x0, dx, cells));
        let both = match (row_span(a, y), row_span(b, y)) {
            (Some((la, ha)), Some((lb, hb))) => centers_in(la.max(lb), ha.min(hb), x0, dx, cells),
            _ => 0,
        };
        inter += both;
        union += sa + sb - both;
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Minimum-area enclosing rectangle by trying every hull edge direction of
/// the (convex) input; areas within a relative 1e-9 tie and the smaller
/// canonical theta wins.
pub fn brute_force_min_rect(points: &[Point], convention: Convention) -> RBox {
    let n = points.len();
    let mut cands: Vec<(f64, RBox)> = Vec::new();
    for i in 0..n {
        let (p, q) = (points[i], points[(i + 1) % n]);
        let (ex, ey) = (q.x - p.x, q.y - p.y);
        let len = ex.hypot(ey);
        let (ux, uy) = (ex / len, ey / len);
        let (mut amin, mut amax, mut bmin, mut bmax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for r in points {
            let a = r.x * ux + r.y * uy;
            let b = -r.x * uy + r.y * ux;
            amin = amin.min(a);
            amax = amax.max(a);
            bmin = bmin.min(b);
            bmax = bmax.max(b);
        }
        let (ca, cb) = ((amin + amax) / 2.0, (bmin + bmax) / 2.0);
        let b = canonicalize(&RBox {
            cx: ca * ux - cb * uy,
            cy: ca * uy + cb * ux,
            w: amax - amin,
            h: bmax - bmin,
            theta: uy.atan2(ux).to_degrees(),
            convention,
        })
        .unwrap();
        cands.push((b.w * b.h, b));
    }
    let min = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    cands
        .into_iter()
        .filter(|c| c.0 <= min * (1.0 + 1e-9))
        .min_by(|a, b| a.1.theta.total_cmp(&b.1.theta))
        .unwrap()
        .1
}

/// Symmetric PSD square root via the closed-form 2x2 eigendecomposition.
pub fn sqrtm(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
    let mean = (a + c) / 2.0;
    let r = ((a - c) / 2.0).hypot(b);
    let (l1, l2) = ((mean + r).max(0.0), (mean - r).max(0.0));
    let phi = 0.5 * (2.0 * b).atan2(a - c);
    let (s, co) = phi.sin_cos();
    let (s1, s2) = (l1.sqrt(), l2.sqrt());
    [
        [co * co * s1 + s * s * s2, co * s * (s1 - s2)],
        [co * s * (s1 - s2), s * s * s1 + co * co * s2],
    ]
}

pub fn matmul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `|mu1 - mu2|^2 + tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2)`
pub fn gwd_eigen(mu1: [f64; 2], s1: [[f64; 2]; 2], mu2: [f64; 2], s2: [[f64; 2]; 2]) -> f64 {
    let r1 = sqrtm(s1);
    let cross = sqrtm(matmul(matmul(r1, s2), r1));
    let dm = (mu1[0] - mu2[0]).powi(2) + (mu1[1] - mu2[1]).powi(2);
    dm + s1[0][0] + s1[1][1] + s2[0][0] + s2[1][1] - 2.0 * (cross[0][0] + cross[1][1])
}

/// Infinity-norm relative error of `a` against `b`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-8);
    diff / scale
}
