//! Planar forests driven by a torus sequence: integer columns carrying the
//! sequence values mod 1, united with their quarter-turn image.
//!
//! `F1 = { (k, a_|k| + l) : k != 0, l in Z }` and `F2` is `F1` rotated by a
//! quarter turn around the origin, `(x, y) -> (-y, x)`.

use crate::error::{Error, Result};
use crate::forest::{min_dist_segment_to_grid_2d, GridColumn};
use crate::geometry::{AxisBox, Point, Segment, TorusPoint};
use crate::sud;
use crate::GEOM_EPS;
use std::collections::HashSet;

/// A sequence on the unit torus, indexed from 1.
pub trait TorusSequence: Sync {
    fn value(&self, n: u64) -> f64;
}

impl<F: Fn(u64) -> f64 + Sync> TorusSequence for F {
    fn value(&self, n: u64) -> f64 {
        self(n).rem_euclid(1.0)
    }
}

/// The golden-ratio sequence: `(n/2) phi mod 1` on even indices, `0` on odd.
#[derive(Debug, Clone, Copy, Default)]
pub struct GoldenSequence;

impl GoldenSequence {
    pub const PHI: f64 = 1.618033988749895;
}

impl TorusSequence for GoldenSequence {
    fn value(&self, n: u64) -> f64 {
        if n % 2 == 0 {
            ((n / 2) as f64 * Self::PHI).rem_euclid(1.0)
        } else {
            0.0
        }
    }
}

/// The exact digital sequence of [`crate::sud`], converted to `f64` (exact:
/// desk-scale terms have denominators far below `2^53`).
#[derive(Debug, Clone, Copy, Default)]
pub struct DigitalSequence;

impl TorusSequence for DigitalSequence {
    fn value(&self, n: u64) -> f64 {
        sud::term(n).expect("desk-scale digital terms are exact").value_f64()
    }
}

/// Torus value of the golden sequence (test and CLI convenience).
pub fn golden_sequence(n: u64) -> TorusPoint {
    TorusPoint::new(GoldenSequence.value(n))
}

/// A Peres-type forest over any torus sequence.
#[derive(Debug, Clone)]
pub struct PeresForest<S> {
    seq: S,
}

impl<S: TorusSequence> PeresForest<S> {
    pub fn new(seq: S) -> Self {
        PeresForest { seq }
    }

    pub fn sequence(&self) -> &S {
        &self.seq
    }

    /// Streams the unrotated half `F1` inside the window.
    pub fn for_each_point_f1(
        &self,
        window: &AxisBox,
        budget: u64,
        mut f: impl FnMut(&Point),
    ) -> Result<u64> {
        self.check_window(window)?;
        let mut emitted = 0u64;
        let (k_min, k_max) = index_range(window.lo()[0], window.hi()[0], 1.0);
        for k in k_min..=k_max {
            if k == 0 {
                continue;
            }
            let a = self.seq.value(k.unsigned_abs());
            let l_min = (window.lo()[1] - a - GEOM_EPS).ceil() as i64;
            let l_max = (window.hi()[1] - a + GEOM_EPS).floor() as i64;
            for l in l_min..=l_max {
                emitted += 1;
                if emitted > budget {
                    return Err(Error::BudgetExceeded {
                        module: "peres",
                        layer: format!("column k={k}"),
                        budget,
                    });
                }
                f(&Point::xy(k as f64, a + l as f64));
            }
        }
        Ok(emitted)
    }

    /// Streams the full forest `F1 union F2` inside the window,
    /// deduplicated, columns first.
    pub fn for_each_point(
        &self,
        window: &AxisBox,
        budget: u64,
        mut f: impl FnMut(&Point),
    ) -> Result<u64> {
        self.check_window(window)?;
        let mut seen: HashSet<(u64, u64)> = HashSet::new();
        let mut emitted = 0u64;
        let mut visited = 0u64;
        self.for_each_point_f1(window, budget, |p| {
            visited += 1;
            if seen.insert((p.coord(0).to_bits(), p.coord(1).to_bits())) {
                emitted += 1;
                f(p);
            }
        })?;
        // F2: rows y = k, x = -(a_|k| + l).
        let (k_min, k_max) = index_range(window.lo()[1], window.hi()[1], 1.0);
        for k in k_min..=k_max {
            if k == 0 {
                continue;
            }
            let a = self.seq.value(k.unsigned_abs());
            let l_min = (-window.hi()[0] - a - GEOM_EPS).ceil() as i64;
            let l_max = (-window.lo()[0] - a + GEOM_EPS).floor() as i64;
            for l in l_min..=l_max {
                visited += 1;
                if visited > budget {
                    return Err(Error::BudgetExceeded {
                        module: "peres",
                        layer: format!("row k={k}"),
                        budget,
                    });
                }
                let p = Point::xy(-(a + l as f64), k as f64);
                if seen.insert((p.coord(0).to_bits(), p.coord(1).to_bits())) {
                    emitted += 1;
                    f(&p);
                }
            }
        }
        Ok(emitted)
    }

    pub fn enumerate_points(&self, window: &AxisBox, budget: u64) -> Result<Vec<Point>> {
        let mut out = Vec::new();
        self.for_each_point(window, budget, |p| out.push(p.clone()))?;
        Ok(out)
    }

    /// Exact minimum distance from the segment to the forest inside the
    /// window, by structural column/row scans.
    pub fn min_dist_to_segment(&self, seg: &Segment, window: &AxisBox) -> Result<f64> {
        self.min_dist_to_segment_capped(seg, window, f64::NEG_INFINITY)
    }

    /// Like [`Self::min_dist_to_segment`] but may stop early once the
    /// running minimum drops to `cap` or below; the result is then still an
    /// upper bound on the true minimum that certifies the hit.
    pub fn min_dist_to_segment_capped(
        &self,
        seg: &Segment,
        window: &AxisBox,
        cap: f64,
    ) -> Result<f64> {
        self.check_window(window)?;
        if seg.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: seg.dim(),
            });
        }
        // Columns x = k carrying y-grids at offset a_|k|.
        let mut best = min_dist_segment_to_grid_2d(
            seg,
            window,
            0,
            1.0,
            |k| k != 0,
            |k| GridColumn {
                spacing: 1.0,
                offset: self.seq.value(k.unsigned_abs()),
            },
            f64::INFINITY,
        );
        if best > cap {
            // Rows y = k carrying x-grids at offset -a_|k|.
            best = min_dist_segment_to_grid_2d(
                seg,
                window,
                1,
                1.0,
                |k| k != 0,
                |k| GridColumn {
                    spacing: 1.0,
                    offset: -self.seq.value(k.unsigned_abs()),
                },
                best,
            );
        }
        if best.is_infinite() {
            return Err(Error::EmptyPointSet {
                context: "no forest point inside the probe window",
            });
        }
        Ok(best)
    }

    fn check_window(&self, window: &AxisBox) -> Result<()> {
        if window.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: window.dim(),
            });
        }
        Ok(())
    }
}

fn index_range(lo: f64, hi: f64, step: f64) -> (i64, i64) {
    (
        ((lo - GEOM_EPS) / step).ceil() as i64,
        ((hi + GEOM_EPS) / step).floor() as i64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_POINT_BUDGET;

    #[test]
    fn golden_sequence_values() {
        assert_eq!(golden_sequence(1).value(), 0.0);
        assert!((golden_sequence(2).value() - 0.618033988749895).abs() < 1e-12);
        assert!((golden_sequence(4).value() - 0.236067977499790).abs() < 1e-12);
    }

    #[test]
    fn single_f1_point_in_narrow_window() {
        let forest = PeresForest::new(GoldenSequence);
        let window = AxisBox::rect(1.5, 2.5, 0.0, 1.0).unwrap();
        let mut f1 = Vec::new();
        forest
            .for_each_point_f1(&window, DEFAULT_POINT_BUDGET, |p| f1.push(p.clone()))
            .unwrap();
        assert_eq!(f1.len(), 1);
        assert_eq!(f1[0].coord(0), 2.0);
        assert!((f1[0].coord(1) - 0.618033988749895).abs() < 1e-12);
        // The full forest adds the rotated row point (2, 1).
        let all = forest.enumerate_points(&window, DEFAULT_POINT_BUDGET).unwrap();
        assert!(all.iter().any(|p| p.coord(0) == 2.0 && p.coord(1) == 1.0));
        assert!(all.len() == 2);
    }

    #[test]
    fn odd_columns_are_integer_points() {
        let forest = PeresForest::new(GoldenSequence);
        let window = AxisBox::rect(2.5, 3.5, -2.0, 2.0).unwrap();
        let mut f1 = Vec::new();
        forest
            .for_each_point_f1(&window, DEFAULT_POINT_BUDGET, |p| f1.push(p.clone()))
            .unwrap();
        let expected: Vec<(f64, f64)> = (-2..=2).map(|l| (3.0, l as f64)).collect();
        let got: Vec<(f64, f64)> = f1.iter().map(|p| (p.coord(0), p.coord(1))).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn forest_is_f1_united_with_its_quarter_turn() {
        // The window is invariant under the quarter turn, so the forest
        // restricted to it must equal F1 plus the rotated copy of F1.
        let forest = PeresForest::new(GoldenSequence);
        let window = AxisBox::rect(-3.0, 3.0, -3.0, 3.0).unwrap();
        let key = |x: f64, y: f64| ((x * 1e9).round() as i64, (y * 1e9).round() as i64);
        let mut expected = std::collections::BTreeSet::new();
        forest
            .for_each_point_f1(&window, DEFAULT_POINT_BUDGET, |p| {
                expected.insert(key(p.coord(0), p.coord(1)));
                expected.insert(key(-p.coord(1), p.coord(0)));
            })
            .unwrap();
        let pts = forest.enumerate_points(&window, DEFAULT_POINT_BUDGET).unwrap();
        let got: std::collections::BTreeSet<(i64, i64)> =
            pts.iter().map(|p| key(p.coord(0), p.coord(1))).collect();
        assert_eq!(got, expected);
        assert_eq!(got.len(), pts.len(), "duplicates emitted");
    }

    #[test]
    fn f1_columns_carry_single_residue() {
        let forest = PeresForest::new(GoldenSequence);
        let window = AxisBox::rect(-5.0, 5.0, -5.0, 5.0).unwrap();
        let mut cols: std::collections::BTreeMap<i64, Vec<f64>> = Default::default();
        forest
            .for_each_point_f1(&window, DEFAULT_POINT_BUDGET, |p| {
                let k = p.coord(0) as i64;
                assert_eq!(k as f64, p.coord(0), "first coordinate must be integer");
                assert_ne!(k, 0);
                cols.entry(k).or_default().push(p.coord(1));
            })
            .unwrap();
        for (_, ys) in cols {
            let frac0 = ys[0].rem_euclid(1.0);
            for y in ys {
                assert!((y.rem_euclid(1.0) - frac0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn structural_distance_matches_enumeration() {
        let forest = PeresForest::new(GoldenSequence);
        let window = AxisBox::rect(-8.0, 8.0, -8.0, 8.0).unwrap();
        let pts = forest.enumerate_points(&window, DEFAULT_POINT_BUDGET).unwrap();
        let segs = [
            Segment::new(Point::xy(-4.0, -3.0), Point::xy(4.0, 3.5)).unwrap(),
            Segment::new(Point::xy(0.4, -6.0), Point::xy(0.6, 6.0)).unwrap(),
            Segment::new(Point::xy(-6.0, 2.2), Point::xy(6.0, 2.2)).unwrap(),
            Segment::new(Point::xy(1.2, 1.3), Point::xy(1.4, 1.8)).unwrap(),
        ];
        for seg in &segs {
            let brute = pts
                .iter()
                .map(|p| crate::geometry::dist_point_segment(p, seg).unwrap())
                .fold(f64::INFINITY, f64::min);
            let structural = forest.min_dist_to_segment(seg, &window).unwrap();
            assert!(
                (brute - structural).abs() < 1e-9,
                "brute {brute} vs structural {structural}"
            );
        }
    }

    #[test]
    fn digital_forest_probe_at_certified_window_lengths() {
        // The dispersion chain suggests segment lengths
        // 4 * 2^i * (V_(i+1)/V_i) * V(eps) for the digital forest; the probe
        // reports measured worst distances rather than asserting a threshold
        // at eps itself, so only a generous slack ceiling is checked.
        let forest = PeresForest::new(DigitalSequence);
        for eps in [0.5f64, 0.0625] {
            let wc = crate::sud::window_constants(eps).unwrap();
            let len = wc.via_next_block;
            let region = AxisBox::centered_cube(2, 2.0 * len).unwrap();
            let sampler = crate::verify::SegmentSampler::new(0x5EED, 6, len, region)
                .with_adversarial_spacings(&[1.0]);
            let report = crate::verify::visibility_probe(&forest, &sampler, eps).unwrap();
            assert!(
                report.worst_min_distance <= 4.0 * eps,
                "eps={eps}: measured worst {} beyond slack ceiling",
                report.worst_min_distance
            );
        }
    }

    #[test]
    fn digital_sequence_matches_sud_terms() {
        for n in 1..200u64 {
            let expected = crate::sud::term(n).unwrap().value_f64();
            assert_eq!(DigitalSequence.value(n), expected);
        }
    }
}
