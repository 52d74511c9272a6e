//! Lattice polygons as a semiring: addition is the convex hull of the
//! union, multiplication the Minkowski sum.
//!
//! Canonical form lists the vertices counter-clockwise, in strictly convex
//! position, starting from the lexicographically smallest one. The empty
//! polygon is the additive identity and `{(0, 0)}` the multiplicative one.

use std::cmp::Ordering;

use super::Semiring;

pub type Point = (i64, i64);

fn cross(o: Point, a: Point, b: Point) -> i128 {
    let (ax, ay) = ((a.0 - o.0) as i128, (a.1 - o.1) as i128);
    let (bx, by) = ((b.0 - o.0) as i128, (b.1 - o.1) as i128);
    ax * by - ay * bx
}

/// Indices of the canonical hull vertices of `points` (Andrew's monotone
/// chain). When a point occurs more than once, the first occurrence wins.
pub fn hull_indices(points: &[Point]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].cmp(&points[b]).then(a.cmp(&b)));
    order.dedup_by(|b, a| points[*a] == points[*b]);
    if order.len() <= 2 {
        return order;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(order.len() + 1);
    for (pass, chain) in [order.clone(), order.iter().rev().skip(1).copied().collect()].into_iter().enumerate() {
        // the upper pass may not pop into the finished lower chain
        let floor = if pass == 0 { 2 } else { hull.len() + 1 };
        for i in chain {
            while hull.len() >= floor
                && cross(points[hull[hull.len() - 2]], points[hull[hull.len() - 1]], points[i]) <= 0
            {
                hull.pop();
            }
            hull.push(i);
        }
    }
    hull.pop();
    hull
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LatticePolygon {
    vertices: Vec<Point>,
}

impl LatticePolygon {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn point(p: Point) -> Self {
        Self { vertices: vec![p] }
    }

    /// Convex hull of arbitrary points.
    pub fn hull_of(points: &[Point]) -> Self {
        let vertices = hull_indices(points).into_iter().map(|i| points[i]).collect();
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `conv(self ∪ other)`.
    pub fn sum(&self, other: &Self) -> Self {
        let mut pts = self.vertices.clone();
        pts.extend_from_slice(&other.vertices);
        Self::hull_of(&pts)
    }

    /// Minkowski sum.
    pub fn product(&self, other: &Self) -> Self {
        let points: Vec<Point> = minkowski_boundary(&self.vertices, &other.vertices)
            .into_iter()
            .map(|(i, j)| add(self.vertices[i], other.vertices[j]))
            .collect();
        Self::hull_of(&points)
    }

    /// Does the closed polygon contain `p`?
    pub fn contains(&self, p: Point) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => self.vertices[0] == p,
            2 => {
                let (a, b) = (self.vertices[0], self.vertices[1]);
                cross(a, b, p) == 0
                    && p.0 >= a.0.min(b.0)
                    && p.0 <= a.0.max(b.0)
                    && p.1 >= a.1.min(b.1)
                    && p.1 <= a.1.max(b.1)
            }
            n => (0..n).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % n], p) >= 0),
        }
    }
}

fn add(a: Point, b: Point) -> Point {
    (a.0 + b.0, a.1 + b.1)
}

fn sub(a: Point, b: Point) -> Point {
    (a.0 - b.0, a.1 - b.1)
}

/// Polar order of edge directions, starting just after straight down.
/// Canonical polygons start at their lexicographically smallest vertex, so
/// their edge directions increase in this order.
fn direction_order(a: Point, b: Point) -> Ordering {
    let half = |d: Point| if d.0 > 0 || (d.0 == 0 && d.1 > 0) { 0 } else { 1 };
    half(a).cmp(&half(b)).then_with(|| {
        let c = a.0 as i128 * b.1 as i128 - a.1 as i128 * b.0 as i128;
        0.cmp(&c)
    })
}

/// Vertex-index pairs `(i, j)` visited while merging the edge sequences of
/// two canonical polygons. Every vertex of the Minkowski sum is among the
/// returned `p[i] + q[j]`.
fn minkowski_boundary(p: &[Point], q: &[Point]) -> Vec<(usize, usize)> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let edges = |v: &[Point]| -> Vec<Point> {
        if v.len() == 1 {
            Vec::new()
        } else {
            (0..v.len()).map(|i| sub(v[(i + 1) % v.len()], v[i])).collect()
        }
    };
    let (ep, eq) = (edges(p), edges(q));
    let (mut i, mut j) = (0usize, 0usize);
    let mut out = Vec::with_capacity(ep.len() + eq.len() + 1);
    out.push((0, 0));
    while i < ep.len() || j < eq.len() {
        let take_p = if i == ep.len() {
            false
        } else if j == eq.len() {
            true
        } else {
            direction_order(ep[i], eq[j]) != Ordering::Greater
        };
        if take_p {
            i += 1;
        } else {
            j += 1;
        }
        out.push((i % p.len(), j % q.len()));
    }
    out
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PolygonSemiring;

impl Semiring for PolygonSemiring {
    type Value = LatticePolygon;

    fn zero(&self) -> LatticePolygon {
        LatticePolygon::empty()
    }
    fn one(&self) -> LatticePolygon {
        LatticePolygon::point((0, 0))
    }
    fn add(&self, a: &LatticePolygon, b: &LatticePolygon) -> LatticePolygon {
        a.sum(b)
    }
    fn mul(&self, a: &LatticePolygon, b: &LatticePolygon) -> LatticePolygon {
        a.product(b)
    }
}

/// A canonical lattice polygon whose vertices each carry a witness word.
///
/// Addition keeps the lexicographically smallest witness when two operands
/// share a vertex; multiplication concatenates the witnesses of the two
/// summand vertices, so it is associative but not commutative.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WitnessPolygon {
    vertices: Vec<Point>,
    witnesses: Vec<String>,
}

impl WitnessPolygon {
    pub fn point(p: Point, witness: impl Into<String>) -> Self {
        Self {
            vertices: vec![p],
            witnesses: vec![witness.into()],
        }
    }

    fn from_candidates(mut candidates: Vec<(Point, String)>) -> Self {
        candidates.sort();
        candidates.dedup_by(|b, a| a.0 == b.0);
        let points: Vec<Point> = candidates.iter().map(|c| c.0).collect();
        let (vertices, witnesses) = hull_indices(&points)
            .into_iter()
            .map(|i| candidates[i].clone())
            .unzip();
        Self { vertices, witnesses }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn witnesses(&self) -> &[String] {
        &self.witnesses
    }

    pub fn polygon(&self) -> LatticePolygon {
        LatticePolygon {
            vertices: self.vertices.clone(),
        }
    }

    pub fn sum(&self, other: &Self) -> Self {
        let candidates = self
            .vertices
            .iter()
            .zip(&self.witnesses)
            .chain(other.vertices.iter().zip(&other.witnesses))
            .map(|(p, w)| (*p, w.clone()))
            .collect();
        Self::from_candidates(candidates)
    }

    pub fn product(&self, other: &Self) -> Self {
        let candidates = minkowski_boundary(&self.vertices, &other.vertices)
            .into_iter()
            .map(|(i, j)| {
                let mut w = self.witnesses[i].clone();
                w.push_str(&other.witnesses[j]);
                (add(self.vertices[i], other.vertices[j]), w)
            })
            .collect();
        Self::from_candidates(candidates)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WitnessPolygonSemiring;

impl Semiring for WitnessPolygonSemiring {
    type Value = WitnessPolygon;

    fn zero(&self) -> WitnessPolygon {
        WitnessPolygon::default()
    }
    fn one(&self) -> WitnessPolygon {
        WitnessPolygon::point((0, 0), "")
    }
    fn add(&self, a: &WitnessPolygon, b: &WitnessPolygon) -> WitnessPolygon {
        a.sum(b)
    }
    fn mul(&self, a: &WitnessPolygon, b: &WitnessPolygon) -> WitnessPolygon {
        a.product(b)
    }
}
