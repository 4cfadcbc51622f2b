//! Dense forests assembled as countable unions of translated lattices.
//!
//! A forest is a family of layers indexed by `(j, axis)`: layer `j` places
//! points on a coarse grid of spacing `coarse_spacing` along one axis and a
//! fine grid of spacing `fine_spacing` along the remaining axes, and the
//! family is closed under swapping the coarse axis with every other axis.
//! A visibility schedule `j -> (e_j, V(e_j))` records which accuracy each
//! layer serves: a segment long enough that some axis projection crosses two
//! consecutive coarse multiples of layer `j` passes within `e_j` of a layer
//! point.

use crate::error::{Error, Result};
use crate::geometry::{AxisBox, Point, Segment};
use crate::GEOM_EPS;
use serde::Serialize;
use std::collections::HashSet;

/// Which coarse multiples `k * coarse_spacing` a layer uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoarseIndexSet {
    /// `k` ranges over all nonzero integers.
    NonzeroIntegers,
    /// `k` ranges over the odd integers.
    OddIntegers,
}

impl CoarseIndexSet {
    fn admits(self, k: i64) -> bool {
        match self {
            CoarseIndexSet::NonzeroIntegers => k != 0,
            CoarseIndexSet::OddIntegers => k.rem_euclid(2) == 1,
        }
    }
}

/// Exact rational backing of a layer's grid, when available: the coarse
/// spacing is the integer `coarse` and the fine spacing is `2^-fine_log2`.
/// It makes cross-layer deduplication exact.
#[derive(Debug, Clone, Copy, Serialize)]
struct ExactGrid {
    coarse: i64,
    fine_log2: u32,
}

/// One translated lattice, after the axis swap moving the coarse direction
/// onto `swap_axis`.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeLayer {
    pub j: u32,
    pub coarse_spacing: f64,
    pub fine_spacing: f64,
    pub coarse_index_set: CoarseIndexSet,
    /// 0-based axis carrying the coarse spacing.
    pub swap_axis: usize,
    pub epsilon: f64,
    exact: Option<ExactGrid>,
}

impl LatticeLayer {
    pub fn new(
        j: u32,
        coarse_spacing: f64,
        fine_spacing: f64,
        coarse_index_set: CoarseIndexSet,
        swap_axis: usize,
        epsilon: f64,
    ) -> Result<Self> {
        if !(coarse_spacing > fine_spacing && fine_spacing > 0.0) {
            return Err(Error::invalid(
                "lattice layer",
                "needs coarse_spacing > fine_spacing > 0",
            ));
        }
        Ok(LatticeLayer {
            j,
            coarse_spacing,
            fine_spacing,
            coarse_index_set,
            swap_axis,
            epsilon,
            exact: None,
        })
    }

    /// Declares the grid exactly rational: integer coarse spacing and a
    /// dyadic fine spacing.
    pub fn with_exact_grid(mut self, coarse: i64, fine_log2: u32) -> Self {
        debug_assert_eq!(coarse as f64, self.coarse_spacing);
        debug_assert_eq!((-(fine_log2 as f64)).exp2(), self.fine_spacing);
        self.exact = Some(ExactGrid { coarse, fine_log2 });
        self
    }

    fn label(&self) -> String {
        format!("layer j={} axis {}", self.j, self.swap_axis)
    }

    /// Exact dedup key of one grid coordinate, or a bit-pattern key when the
    /// grid has no rational backing.
    fn coord_key(&self, axis: usize, index: i64) -> (i64, u32) {
        match self.exact {
            Some(g) if axis == self.swap_axis => (index * g.coarse, 0),
            Some(g) => {
                let mut num = index;
                let mut den = g.fine_log2;
                while den > 0 && num % 2 == 0 && num != 0 {
                    num /= 2;
                    den -= 1;
                }
                if num == 0 {
                    (0, 0)
                } else {
                    (num, den)
                }
            }
            None => {
                let v = self.coord_value(axis, index);
                (v.to_bits() as i64, u32::MAX)
            }
        }
    }

    fn coord_value(&self, axis: usize, index: i64) -> f64 {
        index as f64
            * if axis == self.swap_axis {
                self.coarse_spacing
            } else {
                self.fine_spacing
            }
    }

    /// Inclusive index range of multiples of `step` inside `[lo, hi]`.
    fn index_range(lo: f64, hi: f64, step: f64) -> (i64, i64) {
        let min = ((lo - GEOM_EPS) / step).ceil() as i64;
        let max = ((hi + GEOM_EPS) / step).floor() as i64;
        (min, max)
    }

    /// Per-axis inclusive index ranges inside the window, or `None` when the
    /// layer cannot intersect it (no admissible coarse multiple fits).
    fn axis_ranges(&self, window: &AxisBox) -> Option<Vec<(i64, i64)>> {
        let d = window.dim();
        let mut ranges = Vec::with_capacity(d);
        for axis in 0..d {
            let step = if axis == self.swap_axis {
                self.coarse_spacing
            } else {
                self.fine_spacing
            };
            let (min, max) = Self::index_range(window.lo()[axis], window.hi()[axis], step);
            if min > max {
                return None;
            }
            if axis == self.swap_axis && !(min..=max).any(|k| self.coarse_index_set.admits(k)) {
                return None;
            }
            ranges.push((min, max));
        }
        Some(ranges)
    }
}

/// One step of the visibility schedule.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VisibilityStep {
    pub epsilon: f64,
    pub window_len: f64,
}

/// A caller-certified bound on the tail of the density series
/// `sum_j e_j^-(d-1) / V(e_j)` beyond the stored schedule. The crate checks
/// the stored prefix numerically; the infinite tail cannot be checked here.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailBound(pub f64);

/// A dense forest: the stored prefix of the layer family plus its
/// visibility schedule.
#[derive(Debug, Clone, Serialize)]
pub struct ForestSpec {
    dim: usize,
    layers: Vec<LatticeLayer>,
    schedule: Vec<VisibilityStep>,
    density_tail: f64,
    /// True when the stored layers are a prefix of an infinite family, in
    /// which case windows reaching past the last coarse spacing error out
    /// instead of silently dropping layers.
    infinite_family: bool,
}

/// Smallest odd integer strictly greater than `x`.
pub fn odd_ceiling(x: f64) -> i64 {
    let mut m = 2 * (x / 2.0).floor() as i64 + 1;
    while (m as f64) <= x {
        m += 2;
    }
    while ((m - 2) as f64) > x {
        m -= 2;
    }
    m
}

impl ForestSpec {
    /// Builds a forest from an explicit finite layer list.
    pub fn from_layers(
        dim: usize,
        layers: Vec<LatticeLayer>,
        schedule: Vec<VisibilityStep>,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("forest", "dimension must be at least 2"));
        }
        for l in &layers {
            if l.swap_axis >= dim {
                return Err(Error::invalid("forest", "swap axis outside dimension"));
            }
        }
        Ok(ForestSpec {
            dim,
            layers,
            schedule,
            density_tail: 0.0,
            infinite_family: false,
        })
    }

    /// The generic builder: layer `j` has coarse spacing `V(e_j)` over all
    /// nonzero integers and fine spacing `e_j / sqrt(d)`. The schedule must
    /// decrease strictly in `e` and increase in `V`; the caller vouches for
    /// the tail of the density series beyond the stored prefix.
    pub fn from_schedule(dim: usize, steps: Vec<VisibilityStep>, tail: TailBound) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("forest", "dimension must be at least 2"));
        }
        if steps.is_empty() {
            return Err(Error::invalid("forest", "schedule must be nonempty"));
        }
        if !(tail.0 >= 0.0 && tail.0.is_finite()) {
            return Err(Error::invalid("forest", "tail bound must be finite"));
        }
        for w in steps.windows(2) {
            if !(w[1].epsilon < w[0].epsilon && w[1].window_len > w[0].window_len) {
                return Err(Error::invalid(
                    "forest",
                    "schedule needs strictly decreasing epsilons and increasing lengths",
                ));
            }
        }
        let sqrt_d = (dim as f64).sqrt();
        let mut layers = Vec::new();
        for (idx, step) in steps.iter().enumerate() {
            for axis in 0..dim {
                layers.push(LatticeLayer::new(
                    (idx + 1) as u32,
                    step.window_len,
                    step.epsilon / sqrt_d,
                    CoarseIndexSet::NonzeroIntegers,
                    axis,
                    step.epsilon,
                )?);
            }
        }
        Ok(ForestSpec {
            dim,
            layers,
            schedule: steps,
            density_tail: tail.0,
            infinite_family: true,
        })
    }

    /// The explicit odd-ceiling forest: layer `j` has coarse spacing
    /// `odd_ceiling(j ln(j)^(1+eta)) * 2^(j(d-1))` over the odd integers and
    /// fine spacing `2^-j`, giving visibility
    /// `O(eps^-(d-1) ln(1/eps) lnln(1/eps)^(1+eta))`.
    ///
    /// Layers are stored while the coarse spacing fits an `i64`, which is
    /// beyond every window this crate can enumerate within budget.
    pub fn loglog(dim: usize, eta: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("forest", "dimension must be at least 2"));
        }
        if !(eta > 0.0) {
            return Err(Error::invalid("forest", "eta must be positive"));
        }
        let mut layers = Vec::new();
        let mut schedule = Vec::new();
        for j in 1u32.. {
            let jf = j as f64;
            let odd = odd_ceiling(jf * jf.ln().powf(1.0 + eta));
            let pow = (j as u64) * (dim as u64 - 1);
            if pow >= 62 {
                break;
            }
            let coarse = match odd.checked_mul(1i64 << pow) {
                Some(c) if c < (1i64 << 62) => c,
                _ => break,
            };
            let epsilon = (-(j as f64)).exp2();
            schedule.push(VisibilityStep {
                epsilon,
                window_len: coarse as f64,
            });
            for axis in 0..dim {
                layers.push(
                    LatticeLayer::new(
                        j,
                        coarse as f64,
                        epsilon,
                        CoarseIndexSet::OddIntegers,
                        axis,
                        epsilon,
                    )?
                    .with_exact_grid(coarse, j),
                );
            }
        }
        // Tail of sum 1/odd_ceiling(j ln(j)^(1+eta)) past the stored prefix,
        // by the integral bound 1/(eta ln(j_max)^eta).
        let j_max = schedule.len() as f64;
        let density_tail = 1.0 / (eta * j_max.ln().powf(eta));
        Ok(ForestSpec {
            dim,
            layers,
            schedule,
            density_tail,
            infinite_family: true,
        })
    }

    /// Marks the stored layers as the prefix of an infinite family, so that
    /// windows reaching past the last coarse spacing error out instead of
    /// silently dropping layers.
    pub fn into_infinite_family(mut self) -> Self {
        self.infinite_family = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layers(&self) -> &[LatticeLayer] {
        &self.layers
    }

    pub fn schedule(&self) -> &[VisibilityStep] {
        &self.schedule
    }

    /// The step visibility function: for `e_i <= eps < e_(i-1)` the forest
    /// serves accuracy `eps` with the window length `V(e_i)`.
    pub fn visibility_at(&self, eps: f64) -> Result<VisibilityStep> {
        self.schedule
            .iter()
            .find(|s| s.epsilon <= eps)
            .copied()
            .ok_or(Error::ScheduleExhausted {
                max_spacing: self.schedule.last().map(|s| s.window_len).unwrap_or(0.0),
            })
    }

    /// Partial density series `2^d d^(d/2) sum_(j<=j_max) e_j^-(d-1)/V(e_j)`.
    pub fn series_density_bound(&self, j_max: usize) -> f64 {
        let d = self.dim as f64;
        let constant = d.powf(d / 2.0) * (2.0f64).powi(self.dim as i32);
        constant
            * self
                .schedule
                .iter()
                .take(j_max)
                .map(|s| s.epsilon.powi(-(self.dim as i32 - 1)) / s.window_len)
                .sum::<f64>()
    }

    /// Density series over the whole family, stored prefix plus certified
    /// tail.
    pub fn series_density_bound_total(&self) -> f64 {
        let d = self.dim as f64;
        let constant = d.powf(d / 2.0) * (2.0f64).powi(self.dim as i32);
        self.series_density_bound(self.schedule.len()) + constant * self.density_tail
    }

    /// Largest schedule index whose window length stays within `t`.
    pub fn schedule_index_for_radius(&self, t: f64) -> usize {
        self.schedule
            .iter()
            .take_while(|s| s.window_len <= t)
            .count()
    }

    /// Streams the forest points inside `window`, deduplicated, layer-major
    /// then lexicographic. Returns the number of points emitted.
    pub fn for_each_point(
        &self,
        window: &AxisBox,
        budget: u64,
        mut f: impl FnMut(&Point),
    ) -> Result<u64> {
        if window.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: window.dim(),
            });
        }
        if self.infinite_family {
            if let Some(last) = self.schedule.last() {
                if last.window_len <= window.max_abs() {
                    return Err(Error::ScheduleExhausted {
                        max_spacing: last.window_len,
                    });
                }
            }
        }
        let mut seen: HashSet<Vec<(i64, u32)>> = HashSet::new();
        let mut emitted = 0u64;
        let mut visited = 0u64;
        for layer in &self.layers {
            let Some(ranges) = layer.axis_ranges(window) else {
                continue;
            };
            let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            'odometer: loop {
                if layer.coarse_index_set.admits(idx[layer.swap_axis]) {
                    visited += 1;
                    if visited > budget {
                        return Err(Error::BudgetExceeded {
                            module: "forest",
                            layer: layer.label(),
                            budget,
                        });
                    }
                    let key: Vec<(i64, u32)> = (0..self.dim)
                        .map(|a| layer.coord_key(a, idx[a]))
                        .collect();
                    if seen.insert(key) {
                        let coords: Vec<f64> = (0..self.dim)
                            .map(|a| layer.coord_value(a, idx[a]))
                            .collect();
                        f(&Point::new(coords)?);
                        emitted += 1;
                    }
                }
                for a in (0..self.dim).rev() {
                    idx[a] += 1;
                    if idx[a] <= ranges[a].1 {
                        continue 'odometer;
                    }
                    idx[a] = ranges[a].0;
                }
                break;
            }
        }
        Ok(emitted)
    }

    /// Collects the forest points inside `window`.
    pub fn enumerate_points(&self, window: &AxisBox, budget: u64) -> Result<Vec<Point>> {
        let mut out = Vec::new();
        self.for_each_point(window, budget, |p| out.push(p.clone()))?;
        Ok(out)
    }

    /// Exact number of forest points with Euclidean norm at most `t`. The
    /// coordinates are dyadic rationals at desk scale, so the squared-norm
    /// comparison is exact.
    pub fn count_in_ball(&self, t: f64, budget: u64) -> Result<u64> {
        if !(t > 0.0) {
            return Err(Error::invalid("radius", "needs t > 0"));
        }
        let window = AxisBox::centered_cube(self.dim, t)?;
        let t_sq = t * t;
        let mut count = 0u64;
        self.for_each_point(&window, budget, |p| {
            let norm_sq: f64 = p.coords().iter().map(|c| c * c).sum();
            if norm_sq <= t_sq {
                count += 1;
            }
        })?;
        Ok(count)
    }

    /// Exact minimum distance from the segment to the forest points inside
    /// `window` (planar forests only). Errors when the window holds no
    /// forest point.
    pub fn min_dist_to_segment(&self, seg: &Segment, window: &AxisBox) -> Result<f64> {
        if self.dim != 2 {
            return Err(Error::invalid(
                "structural distance",
                "only implemented for planar forests",
            ));
        }
        if seg.dim() != 2 || window.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: seg.dim().max(window.dim()),
            });
        }
        let mut best = f64::INFINITY;
        for layer in &self.layers {
            best = min_dist_segment_to_grid_2d(
                seg,
                window,
                layer.swap_axis,
                layer.coarse_spacing,
                |k| layer.coarse_index_set.admits(k),
                |_k| GridColumn {
                    spacing: layer.fine_spacing,
                    offset: 0.0,
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
}

/// Fine-axis structure of one coarse column: points at `offset + l * spacing`.
#[derive(Debug, Clone, Copy)]
pub struct GridColumn {
    pub spacing: f64,
    pub offset: f64,
}

/// Exact minimum distance from a planar segment to a column family: columns
/// sit at `k * coarse` along `coarse_axis` (for admissible `k`), and column
/// `k` carries points `offset + l * spacing` along the other axis, clipped
/// to `window`. Shared by the lattice forests, the optical forest and the
/// Peres-type forests.
///
/// Per column only a handful of candidate points is evaluated: the fine
/// indices at the vertices of the three distance regimes (perpendicular
/// foot, two endpoint regimes) plus the window clamps, each regime being a
/// quadratic in the fine index.
#[allow(clippy::too_many_arguments)]
pub fn min_dist_segment_to_grid_2d(
    seg: &Segment,
    window: &AxisBox,
    coarse_axis: usize,
    coarse: f64,
    admits: impl Fn(i64) -> bool,
    column: impl Fn(i64) -> GridColumn,
    mut best: f64,
) -> f64 {
    let fine_axis = 1 - coarse_axis;
    let (ax, ay) = (seg.a.coord(coarse_axis), seg.a.coord(fine_axis));
    let (bx, by) = (seg.b.coord(coarse_axis), seg.b.coord(fine_axis));
    let (seg_lo, seg_hi) = (ax.min(bx), ax.max(bx));
    let (win_lo, win_hi) = (window.lo()[coarse_axis], window.hi()[coarse_axis]);
    let (k_win_min, k_win_max) = LatticeLayer::index_range(win_lo, win_hi, coarse);
    if k_win_min > k_win_max {
        return best;
    }
    let dx = bx - ax;
    let dy = by - ay;
    let len_sq = dx * dx + dy * dy;

    let eval_column = |k: i64, best: &mut f64| {
        let col = column(k);
        let (l_min, l_max) = LatticeLayer::index_range(
            window.lo()[fine_axis] - col.offset,
            window.hi()[fine_axis] - col.offset,
            col.spacing,
        );
        if l_min > l_max {
            return;
        }
        let x0 = k as f64 * coarse;
        let mut candidates: [i64; 8] = [0; 8];
        let mut n = 0;
        let mut push = |l: f64| {
            if !l.is_finite() {
                return;
            }
            let base = l.floor() as i64;
            for cand in [base, base + 1] {
                let cand = cand.clamp(l_min, l_max);
                if n < 8 && !candidates[..n].contains(&cand) {
                    candidates[n] = cand;
                    n += 1;
                }
            }
        };
        push((ay - col.offset) / col.spacing);
        push((by - col.offset) / col.spacing);
        if len_sq > 0.0 {
            // Signed line offset of (x0, offset + l spacing) is affine in l.
            let c0 = dx * (col.offset - ay) - dy * (x0 - ax);
            let slope = dx * col.spacing;
            if slope != 0.0 {
                push(-c0 / slope);
            }
        }
        for &l in &candidates[..n] {
            let py = col.offset + l as f64 * col.spacing;
            let t = (((x0 - ax) * dx + (py - ay) * dy) / len_sq).clamp(0.0, 1.0);
            let fx = ax + t * dx - x0;
            let fy = ay + t * dy - py;
            let d = (fx * fx + fy * fy).sqrt();
            if d < *best {
                *best = d;
            }
        }
    };

    // Seed with columns near the segment midpoint so the distance-based
    // pruning kicks in early.
    let mid = ((seg_lo + seg_hi) / 2.0 / coarse).round() as i64;
    for off in 0..4i64 {
        for k in [mid + off, mid - off] {
            if (k_win_min..=k_win_max).contains(&k) && admits(k) {
                eval_column(k, &mut best);
            }
            if off == 0 {
                break;
            }
        }
    }
    let radius = if best.is_finite() {
        best
    } else {
        (win_hi - win_lo).hypot(window.extent(fine_axis))
    };
    let (k_min, k_max) =
        LatticeLayer::index_range(seg_lo - radius, seg_hi + radius, coarse);
    for k in k_min.max(k_win_min)..=k_max.min(k_win_max) {
        if !admits(k) {
            continue;
        }
        let x0 = k as f64 * coarse;
        let col_gap = if x0 < seg_lo {
            seg_lo - x0
        } else if x0 > seg_hi {
            x0 - seg_hi
        } else {
            0.0
        };
        if col_gap > best {
            continue;
        }
        eval_column(k, &mut best);
    }
    best
}
