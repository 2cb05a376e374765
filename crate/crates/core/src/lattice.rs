//! Finite subsets of the scaled lattice `ρZ^d`, the projector `π_ρ` and
//! max-norm Hausdorff distances.
//!
//! Points are stored as integer index tuples `z` (the state point is `ρ·z`),
//! sorted lexicographically without duplicates, so set operations and
//! equality are exact and independent of how a set was assembled.

use std::fmt::Write as _;

use smallvec::SmallVec;

use crate::error::{ReachError, Result};
use crate::scalar::Scalar;
use crate::systems::IntervalBox;

/// Integer coordinates of a lattice point.
pub type LatticePoint = SmallVec<[i64; 4]>;

/// Closed index range `[lo, hi]` along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AxisRange {
    pub lo: i64,
    pub hi: i64,
}

impl AxisRange {
    pub fn len(&self) -> u64 {
        (self.hi - self.lo + 1) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

/// Quotient slack that turns boundary ties into inclusions (closed-ball semantics).
fn slack<S: Scalar>(q: S) -> S {
    S::of(64.0) * S::epsilon() * q.abs().max(S::one())
}

fn to_index<S: Scalar>(v: S) -> Result<i64> {
    v.to_i64()
        .filter(|z| z.unsigned_abs() < (1u64 << 62))
        .ok_or_else(|| ReachError::InvalidInput(format!("lattice index {v} out of range")))
}

/// Index ranges of `π_ρ(b)`: per axis `[⌈(lo-ρ/2)/ρ⌉, ⌊(hi+ρ/2)/ρ⌋]`, never empty.
pub fn project_box_ranges<S: Scalar>(b: &IntervalBox<S>, rho: S) -> Result<SmallVec<[AxisRange; 4]>> {
    if !(rho > S::zero()) || !rho.is_finite() {
        return Err(ReachError::InvalidInput(format!(
            "resolution must be positive, got {rho}"
        )));
    }
    let half = S::of(0.5);
    let mut ranges = SmallVec::new();
    for (&lo, &hi) in b.lower().iter().zip(b.upper()) {
        let qlo = lo / rho - half;
        let qhi = hi / rho + half;
        let range = AxisRange {
            lo: to_index((qlo - slack(qlo)).ceil())?,
            hi: to_index((qhi + slack(qhi)).floor())?,
        };
        debug_assert!(!range.is_empty());
        ranges.push(range);
    }
    Ok(ranges)
}

/// Number of points in the product of `ranges`, saturating.
pub fn range_count(ranges: &[AxisRange]) -> u128 {
    ranges.iter().fold(1u128, |acc, r| acc.saturating_mul(r.len() as u128))
}

/// Appends every point of the product of `ranges` (lexicographic order).
pub fn push_range_points(ranges: &[AxisRange], out: &mut Vec<LatticePoint>) {
    let mut z: LatticePoint = ranges.iter().map(|r| r.lo).collect();
    loop {
        out.push(z.clone());
        let mut axis = ranges.len();
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if z[axis] < ranges[axis].hi {
                z[axis] += 1;
                break;
            }
            z[axis] = ranges[axis].lo;
        }
    }
}

/// A finite set `A ⊂ ρZ^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSet<S> {
    resolution: S,
    dim: usize,
    points: Vec<LatticePoint>,
}

impl<S: Scalar> LatticeSet<S> {
    /// Builds a set from arbitrary points, sorting and deduplicating them.
    pub fn from_points(resolution: S, dim: usize, mut points: Vec<LatticePoint>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(ReachError::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        points.sort_unstable();
        points.dedup();
        Ok(Self {
            resolution,
            dim,
            points,
        })
    }

    /// Wraps points already sorted and deduplicated.
    pub(crate) fn from_sorted(resolution: S, dim: usize, points: Vec<LatticePoint>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        Self {
            resolution,
            dim,
            points,
        }
    }

    pub fn resolution(&self) -> S {
        self.resolution
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn contains(&self, z: &[i64]) -> bool {
        self.points.binary_search_by(|p| p.as_slice().cmp(z)).is_ok()
    }

    /// State-space coordinates `ρ·z`.
    pub fn state(&self, z: &[i64]) -> Vec<S> {
        z.iter()
            .map(|&c| S::from_i64(c).expect("index fits scalar") * self.resolution)
            .collect()
    }

    pub fn states(&self) -> impl Iterator<Item = Vec<S>> + '_ {
        self.points.iter().map(|z| self.state(z))
    }

    /// Plain-text snapshot: a header line then one `z1 ... zd` row per point.
    /// `stride > 1` keeps only points whose indices are all multiples of `stride`.
    pub fn to_snapshot(&self, stride: i64) -> String {
        let stride = stride.max(1);
        let mut out = String::new();
        let _ = writeln!(out, "# rho {} d {}", self.resolution, self.dim);
        for z in self
            .points
            .iter()
            .filter(|z| z.iter().all(|c| c.rem_euclid(stride) == 0))
        {
            let row: Vec<String> = z.iter().map(i64::to_string).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// `π_ρ(b) = (b + B_{ρ/2}(0)) ∩ ρZ^d`.
pub fn project_box<S: Scalar>(b: &IntervalBox<S>, rho: S) -> Result<LatticeSet<S>> {
    let ranges = project_box_ranges(b, rho)?;
    let mut points = Vec::with_capacity(range_count(&ranges).min(1 << 20) as usize);
    push_range_points(&ranges, &mut points);
    Ok(LatticeSet::from_sorted(rho, b.dim(), points))
}

/// Union of two sets on the same lattice; also returns `#addition` (the per-source
/// cardinality that enters the exact cost, counted before deduplication).
pub fn union_into<S: Scalar>(target: LatticeSet<S>, addition: &LatticeSet<S>) -> Result<(LatticeSet<S>, usize)> {
    if target.resolution != addition.resolution {
        return Err(ReachError::InvalidInput(format!(
            "resolution mismatch: {} vs {}",
            target.resolution, addition.resolution
        )));
    }
    if target.dim != addition.dim {
        return Err(ReachError::DimensionMismatch {
            expected: target.dim,
            found: addition.dim,
        });
    }
    let count = addition.len();
    let mut merged = Vec::with_capacity(target.len() + count);
    let (mut a, mut b) = (target.points.into_iter().peekable(), addition.points.iter().peekable());
    loop {
        match (a.peek(), b.peek()) {
            (Some(x), Some(y)) => match x.cmp(y) {
                std::cmp::Ordering::Less => merged.push(a.next().unwrap()),
                std::cmp::Ordering::Greater => merged.push(b.next().unwrap().clone()),
                std::cmp::Ordering::Equal => {
                    merged.push(a.next().unwrap());
                    b.next();
                }
            },
            (Some(_), None) => merged.push(a.next().unwrap()),
            (None, Some(_)) => merged.push(b.next().unwrap().clone()),
            (None, None) => break,
        }
    }
    Ok((LatticeSet::from_sorted(target.resolution, target.dim, merged), count))
}

fn max_norm<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(x, y)| (*x - *y).abs()).fold(S::zero(), S::max)
}

/// Max-norm Hausdorff distance between two finite point sets (brute force).
pub fn hausdorff_points<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>]) -> Result<S> {
    if a.is_empty() || b.is_empty() {
        return Err(ReachError::InvalidInput("Hausdorff distance of an empty set".into()));
    }
    let dim = a[0].len();
    if let Some(p) = a.iter().chain(b).find(|p| p.len() != dim) {
        return Err(ReachError::DimensionMismatch {
            expected: dim,
            found: p.len(),
        });
    }
    let directed = |from: &[Vec<S>], to: &[Vec<S>]| {
        from.iter()
            .map(|p| to.iter().map(|q| max_norm(p, q)).fold(S::infinity(), S::min))
            .fold(S::zero(), S::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// Max-norm Hausdorff distance between the state points of `a` and the box `b`.
///
/// The direction `a → b` is a closed-form per-point distance. The direction
/// `b → a` is `inf{r : b ⊂ a + B_r}`, found by bisection on `r` with an exact
/// coverage test: a box point `β` (in index units) is covered iff the integer
/// window `∏[⌈β_i - r⌉, ⌊β_i + r⌋]` contains a point of `a`, which is a prefix-sum
/// query over `a`'s bounding grid.
pub fn hausdorff_to_box<S: Scalar>(a: &LatticeSet<S>, b: &IntervalBox<S>) -> Result<S> {
    if a.is_empty() {
        return Err(ReachError::InvalidInput("Hausdorff distance of an empty set".into()));
    }
    if a.dim() != b.dim() {
        return Err(ReachError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let to_box = a.states().map(|x| b.distance_to_point(&x)).fold(S::zero(), S::max);
    let cover = CoverageGrid::new(a)?;
    let rho = a.resolution().to_f64().expect("finite resolution");
    let lo: Vec<f64> = b.lower().iter().map(|v| v.to_f64().unwrap() / rho).collect();
    let hi: Vec<f64> = b.upper().iter().map(|v| v.to_f64().unwrap() / rho).collect();
    let from_box = cover.directed_from_box(&lo, &hi) * rho;
    Ok(to_box.max(S::of(from_box)))
}

/// Dense prefix sums of a lattice set's indicator over its bounding grid.
struct CoverageGrid {
    origin: Vec<i64>,
    extent: Vec<i64>,
    strides: Vec<usize>,
    /// Prefix sums with a zero layer in front on every axis.
    sums: Vec<u32>,
    anchor: Vec<i64>,
}

const MAX_GRID_CELLS: u128 = 400_000_000;

impl CoverageGrid {
    fn new<S: Scalar>(a: &LatticeSet<S>) -> Result<Self> {
        let d = a.dim();
        let mut min = vec![i64::MAX; d];
        let mut max = vec![i64::MIN; d];
        for z in a.points() {
            for i in 0..d {
                min[i] = min[i].min(z[i]);
                max[i] = max[i].max(z[i]);
            }
        }
        let extent: Vec<i64> = (0..d).map(|i| max[i] - min[i] + 1).collect();
        let cells = extent.iter().fold(1u128, |acc, &e| acc.saturating_mul(e as u128 + 1));
        if cells > MAX_GRID_CELLS {
            return Err(ReachError::Unsupported(format!(
                "bounding grid of {cells} cells is too large for exact Hausdorff evaluation"
            )));
        }
        let mut strides = vec![1usize; d];
        for i in (0..d.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * (extent[i + 1] as usize + 1);
        }
        let mut sums = vec![0u32; cells as usize];
        for z in a.points() {
            let idx: usize = (0..d).map(|i| (z[i] - min[i] + 1) as usize * strides[i]).sum();
            sums[idx] = 1;
        }
        for axis in 0..d {
            for idx in 0..sums.len() {
                if !(idx / strides[axis]).is_multiple_of(extent[axis] as usize + 1) {
                    sums[idx] += sums[idx - strides[axis]];
                }
            }
        }
        Ok(Self {
            origin: min,
            extent,
            strides,
            sums,
            anchor: a.points()[0].to_vec(),
        })
    }

    /// Number of set points in the integer window `∏[lo_i, hi_i]`.
    fn count(&self, lo: &[i64], hi: &[i64]) -> u32 {
        let d = lo.len();
        let mut a = Vec::with_capacity(d);
        let mut b = Vec::with_capacity(d);
        for i in 0..d {
            let l = (lo[i] - self.origin[i]).max(0);
            let h = (hi[i] - self.origin[i]).min(self.extent[i] - 1);
            if l > h {
                return 0;
            }
            a.push(l as usize);
            b.push(h as usize + 1);
        }
        let mut total: i64 = 0;
        for corner in 0..(1usize << d) {
            let mut idx = 0usize;
            let mut sign = 1i64;
            for i in 0..d {
                if corner >> i & 1 == 1 {
                    idx += a[i] * self.strides[i];
                    sign = -sign;
                } else {
                    idx += b[i] * self.strides[i];
                }
            }
            total += sign * self.sums[idx] as i64;
        }
        total as u32
    }

    /// Inclusion-minimal integer windows `[⌈β-r⌉, ⌊β+r⌋]` over `β ∈ [lo, hi]`.
    /// Returns `None` when some achievable window misses the grid (so some `β` is uncovered).
    fn windows(&self, axis: usize, lo: f64, hi: f64, r: f64) -> Option<Vec<(i64, i64)>> {
        let window = |beta: f64| ((beta - r).ceil() as i64, (beta + r).floor() as i64);
        let mut samples = vec![lo, hi];
        let mut breaks = Vec::new();
        // ⌈β - r⌉ jumps after β = c + r, ⌊β + r⌋ jumps at β = f - r.
        let mut c = (lo - r).floor();
        while c + r <= hi {
            if c + r >= lo {
                breaks.push(c + r);
            }
            c += 1.0;
        }
        let mut f = (lo + r).floor();
        while f - r <= hi {
            if f - r >= lo {
                breaks.push(f - r);
            }
            f += 1.0;
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        samples.extend_from_slice(&breaks);
        let mut edges = Vec::with_capacity(breaks.len() + 2);
        edges.push(lo);
        edges.extend_from_slice(&breaks);
        edges.push(hi);
        samples.extend(edges.windows(2).map(|w| 0.5 * (w[0] + w[1])));

        let grid_lo = self.origin[axis];
        let grid_hi = self.origin[axis] + self.extent[axis] - 1;
        let mut out: Vec<(i64, i64)> = Vec::with_capacity(samples.len());
        for beta in samples {
            let (a, b) = window(beta);
            if a > b || b < grid_lo || a > grid_hi {
                return None;
            }
            out.push((a, b));
        }
        // Both endpoints are nondecreasing in β, so one window can only contain
        // another when they share an endpoint; keep the smallest per endpoint.
        out.sort_unstable();
        out.dedup_by(|next, prev| next.0 == prev.0);
        out.sort_unstable_by_key(|w| (w.1, std::cmp::Reverse(w.0)));
        out.dedup_by(|next, prev| next.1 == prev.1);
        Some(out)
    }

    /// Whether some point of the box `[lo, hi]` is farther than `r` from every set point.
    fn uncovered(&self, lo: &[f64], hi: &[f64], r: f64) -> bool {
        let d = lo.len();
        let mut lists = Vec::with_capacity(d);
        for i in 0..d {
            match self.windows(i, lo[i], hi[i], r) {
                Some(w) => lists.push(w),
                None => return true,
            }
        }
        let mut pos = vec![0usize; d];
        let mut wlo = vec![0i64; d];
        let mut whi = vec![0i64; d];
        loop {
            for i in 0..d {
                (wlo[i], whi[i]) = lists[i][pos[i]];
            }
            if self.count(&wlo, &whi) == 0 {
                return true;
            }
            let mut axis = d;
            loop {
                if axis == 0 {
                    return false;
                }
                axis -= 1;
                pos[axis] += 1;
                if pos[axis] < lists[axis].len() {
                    break;
                }
                pos[axis] = 0;
            }
        }
    }

    /// `sup_{β ∈ box} min_{z} ‖β - z‖∞` in index units.
    fn directed_from_box(&self, lo: &[f64], hi: &[f64]) -> f64 {
        let mut upper = (0..lo.len())
            .map(|i| {
                (lo[i] - self.anchor[i] as f64)
                    .abs()
                    .max((hi[i] - self.anchor[i] as f64).abs())
            })
            .fold(0.0, f64::max);
        let mut lower = 0.0;
        if !self.uncovered(lo, hi, 0.0) {
            return 0.0;
        }
        while self.uncovered(lo, hi, upper) {
            upper *= 2.0;
        }
        for _ in 0..200 {
            if upper - lower <= 1e-13 * upper.max(1.0) {
                break;
            }
            let mid = 0.5 * (lower + upper);
            if self.uncovered(lo, hi, mid) {
                lower = mid;
            } else {
                upper = mid;
            }
        }
        upper
    }
}
