use serde::{Deserialize, Serialize};

/// Tolerance for geometric predicates.
pub(crate) const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Signed distance of `p` from the directed line through `a` and `b`.
fn side(a: Point, b: Point, p: Point) -> f64 {
    let len = a.distance(&b);
    ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) / len
}

/// True iff the segments `p1-p2` and `q1-q2` cross at a single interior point
/// of both. Touching, endpoint contact and collinear overlap do not count.
pub(crate) fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    if p1.distance(&p2) <= EPS || q1.distance(&q2) <= EPS {
        return false;
    }
    let d1 = side(p1, p2, q1);
    let d2 = side(p1, p2, q2);
    let d3 = side(q1, q2, p1);
    let d4 = side(q1, q2, p2);
    let strictly_opposite = |a: f64, b: f64| (a > EPS && b < -EPS) || (a < -EPS && b > EPS);
    strictly_opposite(d1, d2) && strictly_opposite(d3, d4)
}
