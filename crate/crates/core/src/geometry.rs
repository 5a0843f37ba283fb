//! Rotated-box representations, angle conventions, convex polygon
//! operations and rotated IoU.
//!
//! Frame: y-up, positive angles counterclockwise, degrees in every public
//! type. An [`RBox`] is the rectangle `[-w/2, w/2] x [-h/2, h/2]` rotated by
//! `theta` about the origin and translated to `(cx, cy)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boxes with an edge shorter than this are rejected.
pub const MIN_EXTENT: f64 = 1e-7;
/// Long-edge boxes whose sides differ by at most this much are squares.
pub const SQUARE_TOLERANCE: f64 = 1e-9;
/// Vertex dedup distance used after clipping.
pub const CLIP_EPSILON: f64 = 1e-9;
/// Relative tolerance when comparing candidate rectangle areas.
const AREA_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2-D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn lex_less(self, other: Point) -> bool {
        self.x < other.x || (self.x == other.x && self.y < other.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Angle convention of an [`RBox`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    /// OpenCV definition: `theta` in `[-90, 0)`, no ordering between `w` and `h`.
    Oc,
    /// Long-edge definition: `theta` in `[-90, 90)` and `w >= h`.
    Le,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Convention::Oc => f.write_str("oc"),
            Convention::Le => f.write_str("le"),
        }
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oc" | "opencv" => Ok(Convention::Oc),
            "le" | "long-edge" | "long_edge" => Ok(Convention::Le),
            other => Err(Error::Config(format!("unknown box convention `{other}`"))),
        }
    }
}

/// Rotated rectangle. Fields are public; use [`RBox::new`] or
/// [`RBox::validate`] to check the extent and finiteness rules, and
/// [`canonicalize`] to bring `theta` into the convention's range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    /// Degrees, counterclockwise.
    pub theta: f64,
    pub convention: Convention,
}

impl RBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, theta: f64, convention: Convention) -> Result<Self> {
        let b = Self {
            cx,
            cy,
            w,
            h,
            theta,
            convention,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn oc(cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> Result<Self> {
        Self::new(cx, cy, w, h, theta, Convention::Oc)
    }

    pub fn le(cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> Result<Self> {
        Self::new(cx, cy, w, h, theta, Convention::Le)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.cx, self.cy, self.w, self.h, self.theta];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBox(format!("non-finite field in {self:?}")));
        }
        if self.w < MIN_EXTENT || self.h < MIN_EXTENT {
            return Err(Error::InvalidBox(format!(
                "extents must be at least {MIN_EXTENT} px, got {} x {}",
                self.w, self.h
            )));
        }
        Ok(())
    }

    /// Whether the box already satisfies its convention's invariants.
    pub fn is_canonical(&self) -> bool {
        if self.validate().is_err() {
            return false;
        }
        match self.convention {
            Convention::Oc => (-90.0..0.0).contains(&self.theta),
            Convention::Le => {
                let in_range = (-90.0..90.0).contains(&self.theta) && self.w >= self.h;
                if (self.w - self.h).abs() <= SQUARE_TOLERANCE {
                    in_range && self.theta < 0.0
                } else {
                    in_range
                }
            }
        }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }

    /// Corners in counterclockwise order, starting from the rotated
    /// `(-w/2, -h/2)` corner.
    pub fn corners(&self) -> [Point; 4] {
        let (s, c) = self.theta.to_radians().sin_cos();
        let (hw, hh) = (self.w / 2.0, self.h / 2.0);
        [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
            .map(|(x, y)| Point::new(self.cx + c * x - s * y, self.cy + s * x + c * y))
    }

    pub fn translate(&self, dx: f64, dy: f64) -> RBox {
        RBox {
            cx: self.cx + dx,
            cy: self.cy + dy,
            ..*self
        }
    }
}

/// Shifts `theta` by whole periods into `[-90, -90 + period)`; returns the
/// wrapped angle and the number of periods removed.
fn wrap_angle(theta: f64, period: f64) -> (f64, f64) {
    let mut k = ((theta + 90.0) / period).floor();
    let mut t = theta - period * k;
    if t >= -90.0 + period {
        t -= period;
        k += 1.0;
    }
    if t < -90.0 {
        t += period;
        k -= 1.0;
    }
    (t, k)
}

/// Returns the geometrically equal box that satisfies the invariants of
/// `b.convention`. Already-canonical boxes are returned bit-for-bit.
///
/// Long-edge squares (`|w - h| <= SQUARE_TOLERANCE`) are pinned to
/// `theta in [-90, 0)`; axis-aligned OC boxes come out at `theta = -90`.
pub fn canonicalize(b: &RBox) -> Result<RBox> {
    b.validate()?;
    let mut out = *b;
    match b.convention {
        Convention::Oc => {
            if !(-90.0..0.0).contains(&out.theta) {
                let (t, k) = wrap_angle(out.theta, 90.0);
                out.theta = t;
                if k.rem_euclid(2.0) == 1.0 {
                    std::mem::swap(&mut out.w, &mut out.h);
                }
            }
        }
        Convention::Le => {
            if (out.w - out.h).abs() <= SQUARE_TOLERANCE {
                if out.w < out.h {
                    std::mem::swap(&mut out.w, &mut out.h);
                }
                if !(-90.0..0.0).contains(&out.theta) {
                    out.theta = wrap_angle(out.theta, 90.0).0;
                }
            } else {
                if out.w < out.h {
                    std::mem::swap(&mut out.w, &mut out.h);
                    out.theta += 90.0;
                }
                if !(-90.0..90.0).contains(&out.theta) {
                    out.theta = wrap_angle(out.theta, 180.0).0;
                }
            }
        }
    }
    Ok(out)
}

/// Re-expresses `b` in the `target` convention. The result is canonical and
/// covers the same corner set.
pub fn convert_convention(b: &RBox, target: Convention) -> Result<RBox> {
    canonicalize(&RBox {
        convention: target,
        ..*b
    })
}

/// Four-vertex polygon kept in canonical form: counterclockwise winding
/// (y-up) starting at the lexicographically smallest vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quad {
    v: [Point; 4],
}

impl Quad {
    pub fn new(vertices: [Point; 4]) -> Result<Self> {
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidPolygon(format!("non-finite vertex {p:?}")));
        }
        Ok(Self {
            v: canonical_order(vertices),
        })
    }

    /// `[x1, y1, x2, y2, x3, y3, x4, y4]`
    pub fn from_coords(c: [f64; 8]) -> Result<Self> {
        Self::new([
            Point::new(c[0], c[1]),
            Point::new(c[2], c[3]),
            Point::new(c[4], c[5]),
            Point::new(c[6], c[7]),
        ])
    }

    pub fn vertices(&self) -> &[Point; 4] {
        &self.v
    }

    pub fn coords(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (i, p) in self.v.iter().enumerate() {
            out[2 * i] = p.x;
            out[2 * i + 1] = p.y;
        }
        out
    }

    /// Non-negative for canonical quads.
    pub fn signed_area(&self) -> f64 {
        polygon_area(&self.v)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn is_convex(&self) -> bool {
        is_convex_polygon(&self.v)
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::of(&self.v)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Quad {
        Quad {
            v: self.v.map(|p| Point::new(p.x + dx, p.y + dy)),
        }
    }

    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Result<Quad> {
        Quad::new(self.v.map(f))
    }
}

fn canonical_order(mut v: [Point; 4]) -> [Point; 4] {
    if polygon_area(&v) < 0.0 {
        v.reverse();
    }
    let mut start = 0;
    for i in 1..4 {
        if v[i].lex_less(v[start]) {
            start = i;
        }
    }
    v.rotate_left(start);
    v
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Aabb {
    pub fn of(points: &[Point]) -> Aabb {
        points.iter().fold(
            Aabb {
                min_x: f64::INFINITY,
                min_y: f64::INFINITY,
                max_x: f64::NEG_INFINITY,
                max_y: f64::NEG_INFINITY,
            },
            |acc, p| Aabb {
                min_x: acc.min_x.min(p.x),
                min_y: acc.min_y.min(p.y),
                max_x: acc.max_x.max(p.x),
                max_y: acc.max_y.max(p.y),
            },
        )
    }

    pub fn overlaps(&self, other: &Aabb) -> bool {
        self.min_x <= other.max_x
            && other.min_x <= self.max_x
            && self.min_y <= other.max_y
            && other.min_y <= self.max_y
    }

    fn diagonal_sq(&self) -> f64 {
        let dx = self.max_x - self.min_x;
        let dy = self.max_y - self.min_y;
        dx * dx + dy * dy
    }
}

/// Either box representation accepted by the IoU kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    RBox(RBox),
    Quad(Quad),
}

impl Shape {
    pub fn translate(&self, dx: f64, dy: f64) -> Shape {
        match self {
            Shape::RBox(b) => Shape::RBox(b.translate(dx, dy)),
            Shape::Quad(q) => Shape::Quad(q.translate(dx, dy)),
        }
    }
}

impl From<RBox> for Shape {
    fn from(b: RBox) -> Self {
        Shape::RBox(b)
    }
}

impl From<Quad> for Shape {
    fn from(q: Quad) -> Self {
        Shape::Quad(q)
    }
}

pub trait ToQuad {
    fn to_quad(&self) -> Result<Quad>;
}

impl ToQuad for Quad {
    fn to_quad(&self) -> Result<Quad> {
        Ok(*self)
    }
}

impl ToQuad for RBox {
    fn to_quad(&self) -> Result<Quad> {
        self.validate()?;
        Ok(rbox_to_quad(self))
    }
}

impl ToQuad for Shape {
    fn to_quad(&self) -> Result<Quad> {
        match self {
            Shape::RBox(b) => b.to_quad(),
            Shape::Quad(q) => Ok(*q),
        }
    }
}

/// Corners of `b` as a canonical quad. The box is assumed valid.
pub fn rbox_to_quad(b: &RBox) -> Quad {
    Quad {
        v: canonical_order(b.corners()),
    }
}

/// Minimum-area enclosing rectangle of the quad's convex hull, canonical
/// in `target`.
pub fn quad_to_rbox(q: &Quad, target: Convention) -> Result<RBox> {
    min_area_rect(q.vertices(), target)
}

/// Minimum-area enclosing rectangle of an arbitrary point set by rotating
/// calipers over the convex hull. One side of the result is collinear with a
/// hull edge. Equal-area candidates (relative 1e-9) resolve to the smaller
/// canonical `theta`.
pub fn min_area_rect(points: &[Point], target: Convention) -> Result<RBox> {
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidPolygon(format!("non-finite vertex {p:?}")));
    }
    let hull = convex_hull(points);
    if hull.len() < 3 || is_degenerate(&hull) {
        return Err(Error::Degenerate(
            "convex hull has zero area; no enclosing rectangle".into(),
        ));
    }

    let n = hull.len();
    let at = |i: usize| hull[i % n];
    let mut candidates: Vec<(f64, RBox)> = Vec::with_capacity(n);
    // Support pointers: far along the edge, farthest from the edge, and back
    // along the edge. Each only ever moves forward around the hull.
    let (mut right, mut top, mut left) = (1usize, 1usize, 1usize);

    for i in 0..n {
        let p = at(i);
        let e = at(i + 1) - p;
        let len = e.norm();
        let dir = e * (1.0 / len);
        let normal = Point::new(-dir.y, dir.x);

        right = right.max(i + 1);
        while at(right + 1).dot(dir) > at(right).dot(dir) && right < i + n {
            right += 1;
        }
        top = top.max(right);
        while at(top + 1).dot(normal) > at(top).dot(normal) && top < i + n {
            top += 1;
        }
        left = left.max(top);
        while at(left + 1).dot(dir) < at(left).dot(dir) && left < i + n {
            left += 1;
        }

        let u_max = at(right).dot(dir);
        let u_min = at(left).dot(dir);
        let v_min = p.dot(normal);
        let v_max = at(top).dot(normal);
        let (w, h) = (u_max - u_min, v_max - v_min);
        let u_mid = 0.5 * (u_max + u_min);
        let v_mid = 0.5 * (v_max + v_min);
        let center = dir * u_mid + normal * v_mid;
        let theta = dir.y.atan2(dir.x).to_degrees();
        let candidate = RBox {
            cx: center.x,
            cy: center.y,
            w,
            h,
            theta,
            convention: target,
        };
        if let Ok(c) = canonicalize(&candidate) {
            candidates.push((w * h, c));
        }
    }

    select_min_rect(&candidates)
        .ok_or_else(|| Error::Degenerate("no valid enclosing rectangle".into()))
}

/// Shared tie rule for enclosing-rectangle candidates.
pub fn select_min_rect(candidates: &[(f64, RBox)]) -> Option<RBox> {
    let min_area = candidates
        .iter()
        .map(|(a, _)| *a)
        .fold(f64::INFINITY, f64::min);
    candidates
        .iter()
        .filter(|(a, _)| *a <= min_area * (1.0 + AREA_TIE_TOLERANCE))
        .min_by(|(_, x), (_, y)| x.theta.total_cmp(&y.theta))
        .map(|(_, b)| *b)
}

/// Signed shoelace area; positive for counterclockwise polygons.
pub fn polygon_area(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..n {
        twice += points[i].cross(points[(i + 1) % n]);
    }
    0.5 * twice
}

/// Andrew's monotone chain. Counterclockwise, no duplicate or collinear
/// points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point, a: Point, b: Point| (a - o).cross(b - o);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn is_degenerate(points: &[Point]) -> bool {
    let scale = Aabb::of(points).diagonal_sq();
    polygon_area(points).abs() <= 1e-12 * scale
}

fn is_convex_polygon(points: &[Point]) -> bool {
    let n = points.len();
    if n < 3 {
        return false;
    }
    let orientation = polygon_area(points).signum();
    let tol = 1e-12 * Aabb::of(points).diagonal_sq();
    (0..n).all(|i| {
        let a = points[i];
        let b = points[(i + 1) % n];
        let c = points[(i + 2) % n];
        orientation * (b - a).cross(c - b) >= -tol
    })
}

/// Sutherland-Hodgman clipping of `subject` by the counterclockwise convex
/// polygon `clip`. Consecutive vertices closer than [`CLIP_EPSILON`] are
/// merged; fewer than three survivors yield an empty polygon.
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut output = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let edge = clip[(i + 1) % n] - a;
        let input = std::mem::take(&mut output);
        let side = |p: Point| edge.cross(p - a);
        let mut prev = input[input.len() - 1];
        let mut prev_side = side(prev);
        for &cur in &input {
            let cur_side = side(cur);
            if cur_side >= 0.0 {
                if prev_side < 0.0 {
                    output.push(edge_crossing(prev, cur, prev_side, cur_side));
                }
                output.push(cur);
            } else if prev_side >= 0.0 {
                output.push(edge_crossing(prev, cur, prev_side, cur_side));
            }
            prev = cur;
            prev_side = cur_side;
        }
    }
    dedup_ring(output)
}

fn edge_crossing(p: Point, q: Point, sp: f64, sq: f64) -> Point {
    let t = sp / (sp - sq);
    p + (q - p) * t
}

fn dedup_ring(points: Vec<Point>) -> Vec<Point> {
    let close = |a: Point, b: Point| (a.x - b.x).abs() <= CLIP_EPSILON && (a.y - b.y).abs() <= CLIP_EPSILON;
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        if out.last().is_none_or(|&q| !close(p, q)) {
            out.push(p);
        }
    }
    while out.len() > 1 && close(out[0], out[out.len() - 1]) {
        out.pop();
    }
    if out.len() < 3 {
        out.clear();
    }
    out
}

/// Area of the intersection of two counterclockwise convex polygons. No
/// validation; see [`convex_intersection_area`].
pub fn convex_polygon_intersection_area(a: &[Point], b: &[Point]) -> f64 {
    polygon_area(&clip_convex(a, b)).max(0.0)
}

fn check_convex_quad(q: &Quad) -> Result<()> {
    if is_degenerate(q.vertices()) {
        return Err(Error::InvalidPolygon(format!("degenerate quad {:?}", q.coords())));
    }
    if !q.is_convex() {
        return Err(Error::InvalidPolygon(format!("non-convex quad {:?}", q.coords())));
    }
    Ok(())
}

/// Area of `a ∩ b` in px². Both quads must be convex and non-degenerate.
pub fn convex_intersection_area(a: &Quad, b: &Quad) -> Result<f64> {
    check_convex_quad(a)?;
    check_convex_quad(b)?;
    Ok(convex_polygon_intersection_area(a.vertices(), b.vertices()))
}

/// A validated convex quad with cached area and bounds, for repeated IoU
/// evaluation.
#[derive(Debug, Clone, Copy)]
pub struct PreparedPolygon {
    pub quad: Quad,
    pub area: f64,
    pub aabb: Aabb,
}

impl PreparedPolygon {
    pub fn new<T: ToQuad + ?Sized>(shape: &T) -> Result<Self> {
        let quad = shape.to_quad()?;
        check_convex_quad(&quad)?;
        Ok(Self {
            area: quad.area(),
            aabb: quad.aabb(),
            quad,
        })
    }

    pub fn iou(&self, other: &PreparedPolygon) -> f64 {
        let inter = convex_polygon_intersection_area(self.quad.vertices(), other.quad.vertices());
        let union = self.area + other.area - inter;
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Intersection over union of two boxes or quads, in `[0, 1]`.
pub fn rotated_iou<A, B>(a: &A, b: &B) -> Result<f64>
where
    A: ToQuad + ?Sized,
    B: ToQuad + ?Sized,
{
    Ok(PreparedPolygon::new(a)?.iou(&PreparedPolygon::new(b)?))
}

/// `m[i][j] = rotated_iou(a[i], b[j])`. Rows are computed in parallel; each
/// entry is bit-identical to the scalar call.
pub fn iou_matrix<T: ToQuad + Sync>(a: &[T], b: &[T]) -> Result<Vec<Vec<f64>>> {
    let pa = a.iter().map(PreparedPolygon::new).collect::<Result<Vec<_>>>()?;
    let pb = b.iter().map(PreparedPolygon::new).collect::<Result<Vec<_>>>()?;
    Ok(pa
        .par_iter()
        .map(|x| pb.iter().map(|y| x.iou(y)).collect())
        .collect())
}
