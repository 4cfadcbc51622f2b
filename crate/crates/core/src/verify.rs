//! Brute-force and exact verification engines: seeded segment probing for
//! visibility, measured visibility curves, the exact planar largest empty
//! rectangle, a heuristic empty-box search in higher dimension, and
//! growth-rate fits.

use crate::error::{Error, Result};
use crate::geometry::{dist_point_segment, AxisBox, Point, Segment};
use crate::GEOM_EPS;
use rayon::prelude::*;
use serde::Serialize;

/// Splitmix-style generator: explicit seed, no global state.
#[derive(Debug, Clone)]
pub struct SplitMix(u64);

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Deterministic segment source: seeded pseudo-random segments of a fixed
/// length inside a region, optionally augmented with adversarial
/// axis-aligned segments straddling the listed coarse spacings.
#[derive(Debug, Clone, Serialize)]
pub struct SegmentSampler {
    pub seed: u64,
    pub count: u32,
    pub length: f64,
    pub region: AxisBox,
    pub include_adversarial: bool,
    /// Coarse hyperplane spacings the adversarial set straddles.
    pub adversarial_spacings: Vec<f64>,
}

impl SegmentSampler {
    pub fn new(seed: u64, count: u32, length: f64, region: AxisBox) -> Self {
        SegmentSampler {
            seed,
            count,
            length,
            region,
            include_adversarial: true,
            adversarial_spacings: Vec::new(),
        }
    }

    pub fn with_adversarial_spacings(mut self, spacings: &[f64]) -> Self {
        self.adversarial_spacings = spacings.to_vec();
        self
    }

    /// The deterministic segment list: same fields, same segments.
    pub fn segments(&self) -> Vec<Segment> {
        let d = self.region.dim();
        let mut rng = SplitMix::new(self.seed);
        let mut out = Vec::with_capacity(self.count as usize);
        while out.len() < self.count as usize {
            // Direction: rejection-sample a nonzero vector in the cube.
            let mut dir = vec![0.0f64; d];
            loop {
                let mut norm_sq = 0.0;
                for v in dir.iter_mut() {
                    *v = 2.0 * rng.next_f64() - 1.0;
                    norm_sq += *v * *v;
                }
                if norm_sq > 0.01 && norm_sq <= 1.0 {
                    let norm = norm_sq.sqrt();
                    for v in dir.iter_mut() {
                        *v /= norm;
                    }
                    break;
                }
            }
            // Center: uniform in the region shrunk so the segment fits.
            let mut a = Vec::with_capacity(d);
            let mut b = Vec::with_capacity(d);
            let mut fits = true;
            for axis in 0..d {
                let half_span = self.length / 2.0 * dir[axis].abs();
                let lo = self.region.lo()[axis] + half_span;
                let hi = self.region.hi()[axis] - half_span;
                if lo > hi {
                    fits = false;
                    break;
                }
                let c = lo + (hi - lo) * rng.next_f64();
                a.push(c - self.length / 2.0 * dir[axis]);
                b.push(c + self.length / 2.0 * dir[axis]);
            }
            if !fits {
                continue;
            }
            if let Ok(seg) = Segment::new(Point::new(a).unwrap(), Point::new(b).unwrap()) {
                out.push(seg);
            }
        }
        if self.include_adversarial {
            out.extend(self.adversarial_segments());
        }
        out
    }

    /// Axis-aligned segments engineered against the lattice structure: for
    /// every listed spacing and axis, segments crossing a coarse hyperplane
    /// mid-length or barely reaching it at an endpoint, placed at deep-hole
    /// perpendicular offsets. The offset 1/3 is far from every dyadic grid
    /// at once (distance e/3 to a grid of spacing e), the offset c/2 + 1/3
    /// additionally dodges the coarse hyperplanes of the other axes.
    fn adversarial_segments(&self) -> Vec<Segment> {
        let d = self.region.dim();
        let mut out = Vec::new();
        let mut push = |coords_a: Vec<f64>, coords_b: Vec<f64>| {
            let pa = Point::new(coords_a).unwrap();
            let pb = Point::new(coords_b).unwrap();
            if self.region.contains(&pa) && self.region.contains(&pb) {
                if let Ok(seg) = Segment::new(pa, pb) {
                    out.push(seg);
                }
            }
        };
        for &c in &self.adversarial_spacings {
            if !(c > 0.0) {
                continue;
            }
            for axis in 0..d {
                // First admissible hyperplane coordinate inside the region.
                let lo = self.region.lo()[axis];
                let hi = self.region.hi()[axis];
                let mut k = (lo / c).ceil() as i64;
                if k == 0 {
                    k = 1;
                }
                let plane = k as f64 * c;
                if plane > hi {
                    continue;
                }
                for offset in [1.0 / 3.0, c / 2.0 + 1.0 / 3.0] {
                    // Crossing mid-length.
                    let mut a = vec![offset; d];
                    let mut b = vec![offset; d];
                    a[axis] = plane - self.length / 2.0;
                    b[axis] = plane + self.length / 2.0;
                    push(a, b);
                    // Barely reaching the hyperplane at the far endpoint.
                    let mut a = vec![offset; d];
                    let mut b = vec![offset; d];
                    a[axis] = plane - self.length;
                    b[axis] = plane;
                    push(a, b);
                }
            }
        }
        out
    }
}

/// A point set a segment can be probed against. The distance is exact; an
/// implementation may stop early once its running minimum is at or below
/// `cap`, in which case the returned value still upper-bounds nothing it
/// did not verify: the true minimum is at most the returned value.
pub trait PointSource: Sync {
    fn dim(&self) -> usize;
    fn min_dist(&self, seg: &Segment, window: &AxisBox, cap: f64) -> Result<f64>;
}

/// Brute-force source over materialised points, any dimension.
pub struct MaterializedPoints(pub Vec<Point>);

impl PointSource for MaterializedPoints {
    fn dim(&self) -> usize {
        self.0.first().map(|p| p.dim()).unwrap_or(2)
    }

    fn min_dist(&self, seg: &Segment, window: &AxisBox, cap: f64) -> Result<f64> {
        let mut best = f64::INFINITY;
        for p in &self.0 {
            if !window.contains(p) {
                continue;
            }
            let d = dist_point_segment(p, seg)?;
            if d < best {
                best = d;
                if best <= cap {
                    return Ok(best);
                }
            }
        }
        if best.is_infinite() {
            return Err(Error::EmptyPointSet {
                context: "no point inside the probe window",
            });
        }
        Ok(best)
    }
}

impl PointSource for crate::forest::ForestSpec {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn min_dist(&self, seg: &Segment, window: &AxisBox, _cap: f64) -> Result<f64> {
        self.min_dist_to_segment(seg, window)
    }
}

impl PointSource for crate::optical::OpticalForest {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn min_dist(&self, seg: &Segment, window: &AxisBox, _cap: f64) -> Result<f64> {
        self.min_dist_to_segment(seg, window)
    }
}

impl<S: crate::peres::TorusSequence> PointSource for crate::peres::PeresForest<S> {
    fn dim(&self) -> usize {
        2
    }

    fn min_dist(&self, seg: &Segment, window: &AxisBox, cap: f64) -> Result<f64> {
        self.min_dist_to_segment_capped(seg, window, cap)
    }
}

/// Outcome of one visibility probe.
#[derive(Debug, Clone, Serialize)]
pub struct VisibilityReport {
    pub epsilon: f64,
    pub segment_length: f64,
    pub segments_probed: usize,
    /// Largest certified minimum distance over the probed segments. Exact
    /// for the witness segment whenever the probe fails; on passing probes
    /// sources may have stopped refining below `epsilon`.
    pub worst_min_distance: f64,
    pub witness_segment: Segment,
    pub pass: bool,
}

/// Probes every sampled segment against the source and reports the worst
/// minimum distance with its witness. Passing means every segment sees a
/// point within `epsilon` (plus the global predicate tolerance).
pub fn visibility_probe(
    source: &(impl PointSource + ?Sized),
    sampler: &SegmentSampler,
    epsilon: f64,
) -> Result<VisibilityReport> {
    let segments = sampler.segments();
    if segments.is_empty() {
        return Err(Error::invalid("sampler", "no segments to probe"));
    }
    let cap = epsilon * 0.5;
    let worst = segments
        .par_iter()
        .enumerate()
        .map(|(idx, seg)| {
            source
                .min_dist(seg, &sampler.region, cap)
                .map(|d| (d, idx))
        })
        .try_reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                Ok(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                })
            },
        )?;
    Ok(VisibilityReport {
        epsilon,
        segment_length: sampler.length,
        segments_probed: segments.len(),
        worst_min_distance: worst.0,
        witness_segment: segments[worst.1].clone(),
        pass: worst.0 <= epsilon + GEOM_EPS,
    })
}

/// One entry of a measured visibility curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvePoint {
    pub epsilon: f64,
    /// Smallest ladder length whose probe passed; `None` when even the
    /// largest rung failed (recorded as unbounded).
    pub min_passing_length: Option<f64>,
}

/// Configuration of a curve measurement: for each accuracy the ladder is
/// climbed until a probe passes.
#[derive(Debug, Clone, Serialize)]
pub struct CurveConfig {
    pub seed: u64,
    pub count: u32,
    /// Geometric ladder of candidate segment lengths, increasing.
    pub ladder: Vec<f64>,
    /// The probe region for length `L` is the centered cube of half-width
    /// `region_factor * L`.
    pub region_factor: f64,
    pub adversarial_spacings: Vec<f64>,
}

impl CurveConfig {
    pub fn geometric_ladder(start: f64, factor: f64, steps: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(steps);
        let mut x = start;
        for _ in 0..steps {
            v.push(x);
            x *= factor;
        }
        v
    }
}

/// Measures the minimal passing segment length per accuracy. The true pass
/// structure is monotone in the length (a longer segment contains a shorter
/// one); a sampled pass can be spurious, so a rung only counts once the next
/// rung confirms it — an unconfirmed pass is discarded and the climb
/// continues from the refuting rung.
pub fn visibility_curve(
    source: &(impl PointSource + ?Sized),
    config: &CurveConfig,
    epsilons: &[f64],
) -> Result<Vec<CurvePoint>> {
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("curve", "epsilons must strictly decrease"));
    }
    let d = source.dim();
    let probe = |ei: usize, li: usize, len: f64, eps: f64| -> Result<bool> {
        let region = AxisBox::centered_cube(d, config.region_factor * len)?;
        let sampler = SegmentSampler {
            seed: config
                .seed
                .wrapping_add(0x9e37 * ei as u64)
                .wrapping_add(li as u64),
            count: config.count,
            length: len,
            region,
            include_adversarial: true,
            adversarial_spacings: config.adversarial_spacings.clone(),
        };
        Ok(visibility_probe(source, &sampler, eps)?.pass)
    };
    let mut out = Vec::with_capacity(epsilons.len());
    for (ei, &eps) in epsilons.iter().enumerate() {
        let mut found = None;
        let mut candidate: Option<(usize, f64)> = None;
        for (li, &len) in config.ladder.iter().enumerate() {
            let pass = probe(ei, li, len, eps)?;
            match (pass, candidate) {
                (true, None) => candidate = Some((li, len)),
                (true, Some((cli, clen))) => {
                    // Confirmed by the successor rung.
                    let _ = cli;
                    found = Some(clen);
                    break;
                }
                (false, Some(_)) => candidate = None,
                (false, None) => {}
            }
        }
        if found.is_none() {
            // A candidate on the final rung counts; nothing can confirm it.
            found = candidate.map(|(_, len)| len);
        }
        out.push(CurvePoint {
            epsilon: eps,
            min_passing_length: found,
        });
    }
    Ok(out)
}

/// Fitted floor of `length * eps^(d-1)` over a curve: the visibility of any
/// dense forest is bounded below by a constant times `eps^-(d-1)`, so the
/// normalised ratios of a measured curve must stay away from zero.
#[derive(Debug, Clone, Serialize)]
pub struct CurveBaseline {
    pub ratios: Vec<f64>,
    pub floor: f64,
    pub complete: bool,
}

pub fn curve_baseline(curve: &[CurvePoint], dim: usize) -> CurveBaseline {
    let mut ratios = Vec::new();
    let mut complete = true;
    for p in curve {
        match p.min_passing_length {
            Some(len) => ratios.push(len * p.epsilon.powi(dim as i32 - 1)),
            None => complete = false,
        }
    }
    let floor = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    CurveBaseline {
        ratios,
        floor: if floor.is_finite() { floor } else { 0.0 },
        complete,
    }
}

/// Exact largest empty open axis-parallel rectangle among planar points
/// inside a region. Points on a rectangle's boundary do not violate
/// emptiness, matching the closed-box hit rule on the net side.
#[derive(Debug, Clone, Serialize)]
pub struct EmptyRect {
    pub area: f64,
    pub rect: AxisBox,
}

pub fn largest_empty_rectangle(points: &[Point], region: &AxisBox) -> Result<EmptyRect> {
    if region.dim() != 2 {
        return Err(Error::invalid("region", "planar regions only"));
    }
    for p in points {
        if p.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: p.dim(),
            });
        }
        if !region.contains(p) {
            return Err(Error::invalid("points", "all points must lie in the region"));
        }
    }
    let (rx0, rx1) = (region.lo()[0], region.hi()[0]);
    let (ry0, ry1) = (region.lo()[1], region.hi()[1]);
    let mut best = EmptyRect {
        area: 0.0,
        rect: region.clone(),
    };
    let mut consider = |x0: f64, x1: f64, y0: f64, y1: f64| {
        let area = (x1 - x0) * (y1 - y0);
        if area > best.area {
            best = EmptyRect {
                area,
                rect: AxisBox::rect(x0, x1, y0, y1).expect("positive extent"),
            };
        }
    };
    if points.is_empty() {
        return Ok(EmptyRect {
            area: region.volume(),
            rect: region.clone(),
        });
    }
    // Full-width strips between vertically consecutive points (and walls).
    let mut ys: Vec<f64> = points.iter().map(|p| p.coord(1)).collect();
    ys.push(ry0);
    ys.push(ry1);
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in ys.windows(2) {
        if w[1] > w[0] {
            consider(rx0, rx1, w[0], w[1]);
        }
    }
    // Left-support and right-support sweeps.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        (points[a].coord(0), points[a].coord(1))
            .partial_cmp(&(points[b].coord(0), points[b].coord(1)))
            .unwrap()
    });
    let px: Vec<f64> = order.iter().map(|&i| points[i].coord(0)).collect();
    let py: Vec<f64> = order.iter().map(|&i| points[i].coord(1)).collect();
    let n = px.len();
    for i in 0..n {
        // Rectangles whose left edge passes through point i.
        let (mut bot, mut top) = (ry0, ry1);
        let mut blocked = false;
        for j in i + 1..n {
            if py[j] > bot && py[j] < top {
                consider(px[i], px[j], bot, top);
                if py[j] > py[i] {
                    top = py[j];
                } else if py[j] < py[i] {
                    bot = py[j];
                } else {
                    blocked = true;
                    break;
                }
            } else if py[j] == py[i] {
                blocked = true;
                break;
            }
        }
        if !blocked {
            consider(px[i], rx1, bot, top);
        }
    }
    for i in (0..n).rev() {
        // Rectangles whose right edge passes through point i.
        let (mut bot, mut top) = (ry0, ry1);
        let mut blocked = false;
        for j in (0..i).rev() {
            if py[j] > bot && py[j] < top {
                consider(px[j], px[i], bot, top);
                if py[j] > py[i] {
                    top = py[j];
                } else if py[j] < py[i] {
                    bot = py[j];
                } else {
                    blocked = true;
                    break;
                }
            } else if py[j] == py[i] {
                blocked = true;
                break;
            }
        }
        if !blocked {
            consider(rx0, px[i], bot, top);
        }
    }
    Ok(best)
}

/// Result of the heuristic empty-box search: a certified-empty box of the
/// constrained shape, a lower bound for the true supremum.
#[derive(Debug, Clone, Serialize)]
pub struct EmptyBoxResult {
    pub volume: f64,
    pub rect: AxisBox,
    pub grid_resolution: usize,
}

/// Deterministic heuristic search for a large empty open box with `d-1`
/// equal sides: grid seeds are grown to maximal empty boxes (symmetric cube
/// growth, then per-face expansion until blocked), then shrunk to the best
/// constrained shape. The reported box is re-verified to contain no input
/// point in its interior.
pub fn empty_box_search(
    points: &[Point],
    region: &AxisBox,
    grid_resolution: usize,
) -> Result<EmptyBoxResult> {
    let d = region.dim();
    if grid_resolution < 2 {
        return Err(Error::invalid("grid", "needs at least 2 seeds per axis"));
    }
    for p in points {
        if p.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.dim(),
            });
        }
    }
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut seed_idx = vec![0usize; d];
    'seeds: loop {
        let seed: Vec<f64> = (0..d)
            .map(|a| {
                region.lo()[a]
                    + region.extent(a) * (seed_idx[a] as f64 + 0.5) / grid_resolution as f64
            })
            .collect();
        grow_box(points, region, &seed, &mut best);
        for a in (0..d).rev() {
            seed_idx[a] += 1;
            if seed_idx[a] < grid_resolution {
                continue 'seeds;
            }
            seed_idx[a] = 0;
        }
        break;
    }
    let (volume, lo, hi) = best.ok_or(Error::EmptyPointSet {
        context: "no empty box found (every seed collides with a point)",
    })?;
    let rect = AxisBox::new(lo, hi)?;
    // Hard assertion: the reported box is genuinely empty inside.
    for p in points {
        let inside = p
            .coords()
            .iter()
            .zip(rect.lo().iter().zip(rect.hi()))
            .all(|(c, (l, h))| *l < *c && *c < *h);
        assert!(!inside, "empty-box search produced a non-empty box");
    }
    Ok(EmptyBoxResult {
        volume,
        rect,
        grid_resolution,
    })
}

fn grow_box(
    points: &[Point],
    region: &AxisBox,
    seed: &[f64],
    best: &mut Option<(f64, Vec<f64>, Vec<f64>)>,
) {
    let d = region.dim();
    // Largest empty cube centered at the seed, by binary search; growing
    // from a degenerate box would let the first axis overshoot.
    let max_r = (0..d)
        .map(|a| (region.hi()[a] - seed[a]).min(seed[a] - region.lo()[a]))
        .fold(f64::INFINITY, f64::min);
    if max_r <= 0.0 {
        return;
    }
    let empty_at = |r: f64| {
        points.iter().all(|p| {
            (0..d).any(|a| {
                let c = p.coord(a);
                c <= seed[a] - r || c >= seed[a] + r
            })
        })
    };
    if !empty_at(max_r * 1e-9) {
        return;
    }
    let (mut r_ok, mut r_bad) = (max_r * 1e-9, max_r);
    if empty_at(max_r) {
        r_ok = max_r;
    } else {
        for _ in 0..40 {
            let mid = (r_ok + r_bad) / 2.0;
            if empty_at(mid) {
                r_ok = mid;
            } else {
                r_bad = mid;
            }
        }
    }
    let mut lo: Vec<f64> = seed.iter().map(|c| c - r_ok).collect();
    let mut hi: Vec<f64> = seed.iter().map(|c| c + r_ok).collect();
    // Per-face expansion until blocked by a point or the region boundary;
    // two rounds so later axes can re-expand after earlier ones widen.
    for _ in 0..2 {
        for a in 0..d {
            let mut max_hi = region.hi()[a];
            let mut min_lo = region.lo()[a];
            for p in points {
                let others_inside = (0..d)
                    .filter(|&b| b != a)
                    .all(|b| p.coord(b) > lo[b] && p.coord(b) < hi[b]);
                if !others_inside {
                    continue;
                }
                let c = p.coord(a);
                if c >= hi[a] {
                    max_hi = max_hi.min(c);
                } else if c <= lo[a] {
                    min_lo = min_lo.max(c);
                }
            }
            hi[a] = max_hi;
            lo[a] = min_lo;
        }
    }
    // Shrink to the best (d-1)-equal-sides sub-box, trying each long axis.
    for long in 0..d {
        let s = (0..d)
            .filter(|&a| a != long)
            .map(|a| hi[a] - lo[a])
            .fold(f64::INFINITY, f64::min);
        if !(s > 0.0) || hi[long] <= lo[long] {
            continue;
        }
        let volume = (hi[long] - lo[long]) * s.powi(d as i32 - 1);
        if best.as_ref().is_none_or(|b| volume > b.0) {
            let mut blo = Vec::with_capacity(d);
            let mut bhi = Vec::with_capacity(d);
            for a in 0..d {
                if a == long {
                    blo.push(lo[a]);
                    bhi.push(hi[a]);
                } else {
                    let mid = (lo[a] + hi[a]) / 2.0;
                    blo.push(mid - s / 2.0);
                    bhi.push(mid + s / 2.0);
                }
            }
            *best = Some((volume, blo, bhi));
        }
    }
}

/// Normalised growth ratios of a counting function along a radius ladder.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub entries: Vec<GrowthEntry>,
    pub power_band: (f64, f64),
    pub power_log_band: (f64, f64),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthEntry {
    pub t: f64,
    pub count: u64,
    /// `count / T^d`
    pub power_ratio: f64,
    /// `count / (T^d ln T)`
    pub power_log_ratio: f64,
}

pub fn growth_fit(
    mut count_fn: impl FnMut(f64) -> Result<u64>,
    ladder: &[f64],
    dim: usize,
) -> Result<GrowthReport> {
    if ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("ladder", "radii must strictly increase"));
    }
    let mut entries = Vec::with_capacity(ladder.len());
    for &t in ladder {
        let count = count_fn(t)?;
        let td = t.powi(dim as i32);
        entries.push(GrowthEntry {
            t,
            count,
            power_ratio: count as f64 / td,
            power_log_ratio: count as f64 / (td * t.ln()),
        });
    }
    let band = |f: fn(&GrowthEntry) -> f64| {
        entries
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                (lo.min(f(e)), hi.max(f(e)))
            })
    };
    Ok(GrowthReport {
        power_band: band(|e| e.power_ratio),
        power_log_band: band(|e| e.power_log_ratio),
        entries,
    })
}
