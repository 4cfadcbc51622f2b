//! Shared geometric primitives: points, segments, axis-parallel boxes and the
//! torus distance. All constructions and verifiers go through these.
//!
//! Everything lives in double precision with a global predicate tolerance of
//! [`crate::GEOM_EPS`]; the exact-arithmetic work is confined to [`crate::sud`].

use crate::error::{Error, Result};
use serde::Serialize;

/// A point of `R^d`, `d >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid("point", "dimension must be at least 2"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("point", "coordinates must be finite"));
        }
        Ok(Point { coords })
    }

    /// Builds a planar point without validation overhead on the caller side.
    pub fn xy(x: f64, y: f64) -> Self {
        Point { coords: vec![x, y] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coord(&self, axis: usize) -> f64 {
        self.coords[axis]
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Swaps the first and `axis`-th coordinate (0-based), the symmetry the
    /// lattice constructions are closed under.
    pub fn swap_axis(&self, axis: usize) -> Point {
        let mut coords = self.coords.clone();
        coords.swap(0, axis);
        Point { coords }
    }
}

/// A directed segment with distinct endpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        if a.dist(&b) == 0.0 {
            return Err(Error::invalid("segment", "endpoints must be distinct"));
        }
        Ok(Segment { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn length(&self) -> f64 {
        self.a.dist(&self.b)
    }
}

/// A closed axis-parallel box with positive volume. Points on the boundary
/// count as inside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.len() < 2 {
            return Err(Error::invalid("box", "dimension must be at least 2"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::invalid("box", "needs lo < hi on every axis"));
        }
        Ok(AxisBox { lo, hi })
    }

    /// The planar box `[x0, x1] x [y0, y1]`.
    pub fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        AxisBox::new(vec![x0, y0], vec![x1, y1])
    }

    /// The cube `[-h, h]^d`.
    pub fn centered_cube(d: usize, h: f64) -> Result<Self> {
        AxisBox::new(vec![-h; d], vec![h; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    /// Largest coordinate magnitude the box reaches on any axis.
    pub fn max_abs(&self) -> f64 {
        self.lo
            .iter()
            .chain(&self.hi)
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.coords()
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(c, (l, h))| *l <= *c && *c <= *h)
    }
}

/// A point of the unit torus, stored as its representative in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct TorusPoint(f64);

impl TorusPoint {
    pub fn new(value: f64) -> Self {
        let mut v = value.rem_euclid(1.0);
        // rem_euclid can return 1.0 for tiny negative inputs.
        if v >= 1.0 {
            v = 0.0;
        }
        TorusPoint(v)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
pub fn torus_dist(x: f64) -> f64 {
    let f = x.rem_euclid(1.0);
    f.min(1.0 - f)
}

/// Minimum Euclidean distance from `p` to the segment `s`.
pub fn dist_point_segment(p: &Point, s: &Segment) -> Result<f64> {
    if p.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: p.dim(),
        });
    }
    let d = p.dim();
    let mut dir_sq = 0.0;
    let mut dot = 0.0;
    for i in 0..d {
        let v = s.b.coord(i) - s.a.coord(i);
        dir_sq += v * v;
        dot += (p.coord(i) - s.a.coord(i)) * v;
    }
    let t = (dot / dir_sq).clamp(0.0, 1.0);
    let mut dist_sq = 0.0;
    for i in 0..d {
        let foot = s.a.coord(i) + t * (s.b.coord(i) - s.a.coord(i));
        dist_sq += (p.coord(i) - foot) * (p.coord(i) - foot);
    }
    Ok(dist_sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seg2(ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
        Segment::new(Point::xy(ax, ay), Point::xy(bx, by)).unwrap()
    }

    #[test]
    fn perpendicular_foot_interior() {
        let d = dist_point_segment(&Point::xy(0.0, 1.0), &seg2(-1.0, 0.0, 1.0, 0.0)).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nearest_endpoint() {
        let d = dist_point_segment(&Point::xy(2.0, 0.0), &seg2(-1.0, 0.0, 1.0, 0.0)).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_four_five_to_endpoint() {
        let p = Point::new(vec![3.0, 4.0, 0.0]).unwrap();
        let s = Segment::new(
            Point::new(vec![0.0, 0.0, 0.0]).unwrap(),
            Point::new(vec![0.0, 0.0, 1.0]).unwrap(),
        )
        .unwrap();
        let d = dist_point_segment(&p, &s).unwrap();
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = Point::new(vec![0.0, 0.0, 0.0]).unwrap();
        let s = seg2(0.0, 0.0, 1.0, 0.0);
        assert!(dist_point_segment(&p, &s).is_err());
    }

    #[test]
    fn torus_dist_examples() {
        assert!((torus_dist(0.75) - 0.25).abs() < 1e-12);
        assert!((torus_dist(0.5) - 0.5).abs() < 1e-12);
        assert!((torus_dist(-1.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn degenerate_segment_rejected() {
        assert!(Segment::new(Point::xy(1.0, 1.0), Point::xy(1.0, 1.0)).is_err());
    }

    #[test]
    fn box_closed_boundary() {
        let b = AxisBox::rect(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(b.contains(&Point::xy(0.0, 0.5)));
        assert!(b.contains(&Point::xy(1.0, 1.0)));
        assert!(!b.contains(&Point::xy(1.0 + 1e-12, 0.5)));
        assert!((b.volume() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn dist_never_exceeds_endpoint_distances(
            px in -50.0..50.0f64, py in -50.0..50.0f64,
            ax in -50.0..50.0f64, ay in -50.0..50.0f64,
            bx in -50.0..50.0f64, by in -50.0..50.0f64,
        ) {
            prop_assume!((ax, ay) != (bx, by));
            let p = Point::xy(px, py);
            let s = seg2(ax, ay, bx, by);
            let d = dist_point_segment(&p, &s).unwrap();
            prop_assert!(d <= p.dist(&s.a) + 1e-12);
            prop_assert!(d <= p.dist(&s.b) + 1e-12);
        }

        #[test]
        fn dist_invariant_under_translation(
            px in -10.0..10.0f64, py in -10.0..10.0f64,
            ax in -10.0..10.0f64, ay in -10.0..10.0f64,
            bx in -10.0..10.0f64, by in -10.0..10.0f64,
            tx in -10.0..10.0f64, ty in -10.0..10.0f64,
        ) {
            prop_assume!((ax, ay) != (bx, by));
            let d0 = dist_point_segment(&Point::xy(px, py), &seg2(ax, ay, bx, by)).unwrap();
            let d1 = dist_point_segment(
                &Point::xy(px + tx, py + ty),
                &seg2(ax + tx, ay + ty, bx + tx, by + ty),
            )
            .unwrap();
            prop_assert!((d0 - d1).abs() < 1e-9);
        }

        #[test]
        fn dist_invariant_under_coordinate_swap(
            px in -10.0..10.0f64, py in -10.0..10.0f64,
            ax in -10.0..10.0f64, ay in -10.0..10.0f64,
            bx in -10.0..10.0f64, by in -10.0..10.0f64,
        ) {
            prop_assume!((ax, ay) != (bx, by));
            let d0 = dist_point_segment(&Point::xy(px, py), &seg2(ax, ay, bx, by)).unwrap();
            let d1 = dist_point_segment(&Point::xy(py, px), &seg2(ay, ax, by, bx)).unwrap();
            prop_assert!((d0 - d1).abs() < 1e-12);
        }

        #[test]
        fn torus_dist_periodic_and_even(x in -100.0..100.0f64) {
            prop_assert!((torus_dist(x) - torus_dist(x + 1.0)).abs() < 1e-9);
            prop_assert!((torus_dist(x) - torus_dist(-x)).abs() < 1e-9);
            prop_assert!(torus_dist(x) <= 0.5);
        }
    }
}
