//! Bicovering and completeness checks.
//!
//! A point `P` on the secant through `P1`, `P2` is `P1 + s(P2 - P1)` for some
//! `s ∉ {0, 1}`, and its position on the segment is the class of
//! `χ(s(s-1))`. The full engine walks every secant once and marks both
//! classes in a pair of bitmaps; the sampled engine looks at the secants
//! through one point at a time.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldElement, FieldSpec};
use crate::plane::{self, ArcSet, PlaneError, Point2, PointN, SetCheck, SlopeBuckets};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("input is not an arc: {0:?} are collinear")]
    NotAnArc([Point2; 3]),
    #[error("input is not a cap: {0:?} are collinear")]
    NotACap(Vec<PointN>),
    #[error("{what} of size {size} exceeds the configured limit {limit}")]
    TooLarge { what: &'static str, size: u128, limit: u128 },
    #[error(transparent)]
    Plane(#[from] PlaneError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Largest `q` for the full bicovering engine (two `q²`-bit maps).
    pub full_max_q: u64,
    /// Largest `q^N` for the cap completeness bitmap.
    pub cap_max_points: u128,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { full_max_q: 20_000, cap_max_points: 1 << 30 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Full,
    Sampled,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    /// Points outside the input set that were examined.
    pub checked: u64,
    pub external: u64,
    pub internal: u64,
    pub both: u64,
    /// Examined points on no secant at all.
    pub uncovered: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub verdict: bool,
    pub mode: Mode,
    /// Smallest failing point by dense index, as coordinate codes.
    pub first_failure: Option<Vec<u64>>,
    /// Up to ten failing points in dense-index order.
    pub uncovered: Vec<Vec<u64>>,
    pub counts: Counts,
    /// Whether every examined point lies on some secant. For bicovering runs
    /// this is plain completeness of the arc.
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sample_size: Option<u64>,
}

pub const MAX_REPORTED: usize = 10;

pub(crate) fn bitmap(bits: u64) -> Vec<AtomicU64> {
    (0..bits.div_ceil(64)).map(|_| AtomicU64::new(0)).collect()
}

#[inline]
pub(crate) fn set_bit(map: &[AtomicU64], i: u64) {
    map[(i / 64) as usize].fetch_or(1 << (i % 64), Ordering::Relaxed);
}

#[inline]
pub(crate) fn get_bit(map: &[AtomicU64], i: u64) -> bool {
    map[(i / 64) as usize].load(Ordering::Relaxed) >> (i % 64) & 1 == 1
}

/// External and internal marks over `AG(2,q)`, indexed by dense point index.
pub struct CoverageMap {
    q: u64,
    external: Vec<AtomicU64>,
    internal: Vec<AtomicU64>,
}

impl CoverageMap {
    fn new(q: u64) -> Self {
        CoverageMap { q, external: bitmap(q * q), internal: bitmap(q * q) }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn is_external(&self, p: Point2) -> bool {
        get_bit(&self.external, p.index(self.q))
    }

    pub fn is_internal(&self, p: Point2) -> bool {
        get_bit(&self.internal, p.index(self.q))
    }

    pub fn is_bicovered(&self, p: Point2) -> bool {
        self.is_external(p) && self.is_internal(p)
    }

    fn mark(&self, idx: u64, chi: i8) {
        if chi > 0 {
            set_bit(&self.external, idx);
        } else {
            set_bit(&self.internal, idx);
        }
    }
}

fn require_arc(a: &ArcSet) -> Result<(), VerifyError> {
    match a.check_arc() {
        SetCheck::Collinear(w) => Err(VerifyError::NotAnArc(w)),
        SetCheck::NoThreeCollinear => Ok(()),
    }
}

/// `χ(s(s-1))` for every `s`, indexed by code.
fn position_table(f: &FieldSpec) -> Vec<i8> {
    f.elements().map(|s| f.chi(f.mul(s, f.sub(s, f.one())))).collect()
}

/// Marks every third point of every secant of `a`.
pub fn coverage_full(a: &ArcSet, config: &VerifyConfig) -> Result<CoverageMap, VerifyError> {
    require_arc(a)?;
    let f = &a.field;
    let q = f.q();
    if q > config.full_max_q {
        return Err(VerifyError::TooLarge { what: "plane", size: q as u128, limit: config.full_max_q as u128 });
    }
    let map = CoverageMap::new(q);
    let table = position_table(f);
    let pts = a.points();
    let prime = f.is_prime_field();
    (0..pts.len()).into_par_iter().for_each(|i| {
        let p1 = pts[i];
        for &p2 in &pts[i + 1..] {
            let dx = f.sub(p2.x, p1.x);
            let dy = f.sub(p2.y, p1.y);
            if prime {
                // s = 2, 3, …, q-1 by repeated addition
                let (mut x, mut y) = (f.add(p2.x, dx), f.add(p2.y, dy));
                for &chi in &table[2..] {
                    map.mark(x.code() * q + y.code(), chi);
                    x = f.add(x, dx);
                    y = f.add(y, dy);
                }
            } else {
                for s in f.elements().skip(2) {
                    let x = f.add(p1.x, f.mul(s, dx));
                    let y = f.add(p1.y, f.mul(s, dy));
                    map.mark(x.code() * q + y.code(), table[s.code() as usize]);
                }
            }
        }
    });
    Ok(map)
}

/// Every point of `AG(2,q)` off `a` must be external to one secant segment and
/// internal to another.
pub fn verify_bicovering_full(a: &ArcSet, config: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    let map = coverage_full(a, config)?;
    let f = &a.field;
    let q = f.q();
    let in_arc: std::collections::HashSet<u64> = a.points().iter().map(|p| p.index(q)).collect();
    let mut counts = Counts::default();
    let mut uncovered = Vec::new();
    let mut complete = true;
    for idx in 0..q * q {
        if in_arc.contains(&idx) {
            continue;
        }
        counts.checked += 1;
        let e = get_bit(&map.external, idx);
        let i = get_bit(&map.internal, idx);
        counts.external += e as u64;
        counts.internal += i as u64;
        if e && i {
            counts.both += 1;
        } else {
            if !e && !i {
                counts.uncovered += 1;
                complete = false;
            }
            if uncovered.len() < MAX_REPORTED {
                uncovered.push(Point2::from_index(f, idx).codes().to_vec());
            }
        }
    }
    Ok(VerifyReport {
        verdict: counts.both == counts.checked,
        mode: Mode::Full,
        first_failure: uncovered.first().cloned(),
        uncovered,
        counts,
        complete,
        seed: None,
        sample_size: None,
    })
}

/// Which classes `p` (not in `pts`) takes on the secants of `pts` through it.
/// Stops as soon as both are seen.
pub(crate) fn classes_at(f: &FieldSpec, pts: &[Point2], p: Point2, buckets: &mut SlopeBuckets) -> (bool, bool) {
    buckets.reset();
    let keys = plane::slope_keys(f, p, pts);
    let (mut ext, mut int) = (false, false);
    for (j, key) in keys.into_iter().enumerate() {
        if let Some(prev) = buckets.insert(key, j as u32) {
            let (p1, p2) = (pts[prev as usize], pts[j]);
            let (c, c1, c2) = if p1.x != p2.x { (p.x, p1.x, p2.x) } else { (p.y, p1.y, p2.y) };
            match f.chi(f.mul(f.sub(c, c1), f.sub(c, c2))) {
                1 => ext = true,
                _ => int = true,
            }
            if ext && int {
                break;
            }
        }
    }
    (ext, int)
}

/// Per-point check of `sample` seeded uniform points off `a`, drawn with
/// replacement.
pub fn verify_bicovering_sampled(a: &ArcSet, sample: u64, seed: u64) -> Result<VerifyReport, VerifyError> {
    require_arc(a)?;
    let f = &a.field;
    let q = f.q();
    let total = q as u128 * q as u128;
    let in_arc: std::collections::HashSet<u64> = a.points().iter().map(|p| p.index(q)).collect();
    if in_arc.len() as u128 >= total {
        return Err(VerifyError::Plane(PlaneError::DuplicatePoints));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<u64> = (0..sample)
        .map(|_| loop {
            let idx = rng.gen_range(0..q * q);
            if !in_arc.contains(&idx) {
                break idx;
            }
        })
        .collect();
    let pts = a.points();
    let dense = q < (1 << 26);
    let results: Vec<(u64, bool, bool)> = draws
        .par_iter()
        .map_init(
            || SlopeBuckets::new(q, dense),
            |buckets, &idx| {
                let (e, i) = classes_at(f, pts, Point2::from_index(f, idx), buckets);
                (idx, e, i)
            },
        )
        .collect();
    let mut counts = Counts { checked: sample, ..Counts::default() };
    let mut failures: Vec<u64> = Vec::new();
    for &(idx, e, i) in &results {
        counts.external += e as u64;
        counts.internal += i as u64;
        if e && i {
            counts.both += 1;
        } else {
            if !e && !i {
                counts.uncovered += 1;
            }
            failures.push(idx);
        }
    }
    failures.sort_unstable();
    failures.dedup();
    let uncovered: Vec<Vec<u64>> =
        failures.iter().take(MAX_REPORTED).map(|&i| Point2::from_index(f, i).codes().to_vec()).collect();
    Ok(VerifyReport {
        verdict: failures.is_empty(),
        mode: Mode::Sampled,
        first_failure: uncovered.first().cloned(),
        uncovered,
        complete: counts.uncovered == 0,
        counts,
        seed: Some(seed),
        sample_size: Some(sample),
    })
}

/// Every point of `AG(N,q)` off `cap` must lie on a secant of `cap`.
pub fn verify_complete_cap(f: &FieldSpec, cap: &[PointN], config: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    if let SetCheck::Collinear(w) = plane::is_cap(f, cap)? {
        return Err(VerifyError::NotACap(w.to_vec()));
    }
    let Some(first) = cap.first() else {
        return Err(VerifyError::Plane(PlaneError::MixedDimensions(0, 0)));
    };
    let n = first.dim();
    let q = f.q();
    let size = (q as u128).checked_pow(n as u32).filter(|&s| s <= config.cap_max_points).ok_or(
        VerifyError::TooLarge {
            what: "space",
            size: (q as u128).saturating_pow(n as u32),
            limit: config.cap_max_points,
        },
    )? as u64;
    let mut pts = cap.to_vec();
    pts.sort_by_key(|p| p.index(q));
    pts.dedup();
    let marks = bitmap(size);
    let scalars: Vec<FieldElement> = f.elements().skip(2).collect();
    (0..pts.len()).into_par_iter().for_each(|i| {
        let p1 = &pts[i];
        for p2 in &pts[i + 1..] {
            let d: Vec<FieldElement> = p2.coords.iter().zip(&p1.coords).map(|(&x, &y)| f.sub(x, y)).collect();
            for &s in &scalars {
                let idx = p1.coords.iter().zip(&d).rev().fold(0u64, |acc, (&c, &dc)| acc * q + f.add(c, f.mul(s, dc)).code());
                set_bit(&marks, idx);
            }
        }
    });
    let in_cap: std::collections::HashSet<u64> = pts.iter().map(|p| p.index(q) as u64).collect();
    let mut counts = Counts::default();
    let mut uncovered = Vec::new();
    for idx in 0..size {
        if in_cap.contains(&idx) {
            continue;
        }
        counts.checked += 1;
        if get_bit(&marks, idx) {
            counts.both += 1;
        } else {
            counts.uncovered += 1;
            if uncovered.len() < MAX_REPORTED {
                let p = PointN::from_index(f, idx as u128, n);
                uncovered.push(p.coords.iter().map(|c| c.code()).collect());
            }
        }
    }
    Ok(VerifyReport {
        verdict: counts.uncovered == 0,
        mode: Mode::Full,
        first_failure: uncovered.first().cloned(),
        uncovered,
        complete: counts.uncovered == 0,
        counts,
        seed: None,
        sample_size: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubic::NodalCubic;
    use crate::plane::{line_third_points, segment_position, SegmentPosition};

    /// Coverage by the plane module's own line walk and frame rule.
    fn oracle_classes(f: &FieldSpec, pts: &[Point2], p: Point2) -> (bool, bool) {
        let (mut e, mut i) = (false, false);
        for (k, &p1) in pts.iter().enumerate() {
            for &p2 in &pts[k + 1..] {
                if line_third_points(f, p1, p2).unwrap().any(|r| r == p) {
                    match segment_position(f, p, p1, p2).unwrap() {
                        SegmentPosition::External => e = true,
                        SegmentPosition::Internal => i = true,
                    }
                }
            }
        }
        (e, i)
    }

    fn coset_arc(q: u64, m: u64, members: &[u64]) -> ArcSet {
        let c = NodalCubic::new(FieldSpec::with_order(q).unwrap()).unwrap();
        c.union_arc(m, members, false).unwrap()
    }

    #[test]
    fn coverage_matches_line_walk_oracle() {
        for (q, m, members) in [(31u64, 5u64, vec![2u64, 3]), (25, 4, vec![1]), (13, 4, vec![1]), (37, 4, vec![1])] {
            let a = coset_arc(q, m, &members);
            let f = &a.field;
            let map = coverage_full(&a, &VerifyConfig::default()).unwrap();
            let mut buckets = SlopeBuckets::new(q, true);
            for idx in 0..q * q {
                let p = Point2::from_index(f, idx);
                if a.points().contains(&p) {
                    continue;
                }
                let want = oracle_classes(f, a.points(), p);
                assert_eq!((map.is_external(p), map.is_internal(p)), want, "q={q} p={p:?}");
                let (e, i) = classes_at(f, a.points(), p, &mut buckets);
                assert_eq!(e && i, want.0 && want.1);
            }
        }
    }

    #[test]
    fn single_coset_fails_on_the_cubic() {
        let a = coset_arc(31, 5, &[1]);
        let c = NodalCubic::new(a.field.clone()).unwrap();
        let r = verify_bicovering_full(&a, &VerifyConfig::default()).unwrap();
        assert!(!r.verdict);
        let map = coverage_full(&a, &VerifyConfig::default()).unwrap();
        let on_cubic_failure = a
            .field
            .nonzero_elements()
            .map(|v| c.point_of_param(v).unwrap())
            .any(|p| !a.points().contains(&p) && !map.is_bicovered(p));
        assert!(on_cubic_failure);
    }

    #[test]
    fn two_points_bicover_nothing() {
        let f = FieldSpec::prime(7).unwrap();
        let a = ArcSet::new(f.clone(), vec![Point2::new(f.el(0), f.el(0)), Point2::new(f.el(1), f.el(2))], None);
        let r = verify_bicovering_full(&a, &VerifyConfig::default()).unwrap();
        assert!(!r.verdict && r.counts.both == 0 && !r.complete);
        assert_eq!(r.first_failure, Some(vec![0, 1]));
    }

    #[test]
    fn rejects_non_arcs_and_large_planes() {
        let f = FieldSpec::prime(7).unwrap();
        let line: Vec<Point2> = (0..3).map(|i| Point2::new(f.el(i), f.el(i))).collect();
        let a = ArcSet::new(f, line, None);
        assert!(matches!(verify_bicovering_full(&a, &VerifyConfig::default()), Err(VerifyError::NotAnArc(_))));
        assert!(matches!(verify_bicovering_sampled(&a, 5, 1), Err(VerifyError::NotAnArc(_))));
        let big = coset_arc(31, 5, &[1]);
        let tight = VerifyConfig { full_max_q: 29, ..VerifyConfig::default() };
        assert!(matches!(verify_bicovering_full(&big, &tight), Err(VerifyError::TooLarge { .. })));
    }

    #[test]
    fn secant_split_law_in_marks() {
        let f = FieldSpec::prime(11).unwrap();
        let p1 = Point2::new(f.el(1), f.el(3));
        let p2 = Point2::new(f.el(4), f.el(9));
        let a = ArcSet::new(f.clone(), vec![p1, p2], None);
        let r = verify_bicovering_full(&a, &VerifyConfig::default()).unwrap();
        assert_eq!((r.counts.external, r.counts.internal), (4, 5));
    }

    #[test]
    fn sampled_is_deterministic_and_sound() {
        let a = coset_arc(31, 5, &[2, 3]);
        let r1 = verify_bicovering_sampled(&a, 300, 42).unwrap();
        let r2 = verify_bicovering_sampled(&a, 300, 42).unwrap();
        assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r2).unwrap());
        let full = verify_bicovering_full(&a, &VerifyConfig::default()).unwrap();
        let map = coverage_full(&a, &VerifyConfig::default()).unwrap();
        for u in &r1.uncovered {
            assert!(!map.is_bicovered(Point2::from_codes(&a.field, u[0], u[1]).unwrap()));
        }
        if full.verdict {
            assert!(r1.verdict);
        }
    }

    #[test]
    fn cap_completeness_on_small_examples() {
        let f = FieldSpec::prime(3).unwrap();
        // the 4 points of a conic-free quadrangle in AG(2,3) form a complete cap
        let pts: Vec<PointN> = [[0, 0], [1, 0], [0, 1], [1, 1]]
            .iter()
            .map(|c| PointN::new(c.iter().map(|&x| f.el(x)).collect()))
            .collect();
        let r = verify_complete_cap(&f, &pts, &VerifyConfig::default()).unwrap();
        assert!(r.verdict, "{r:?}");
        let r = verify_complete_cap(&f, &pts[..3], &VerifyConfig::default()).unwrap();
        assert!(!r.verdict);
        // dense order is little-endian in the coordinates
        assert_eq!(r.uncovered, vec![vec![1, 1], vec![2, 1], vec![1, 2]]);
        let line: Vec<PointN> = (0..3).map(|i| PointN::new(vec![f.el(i), f.el(0)])).collect();
        assert!(matches!(verify_complete_cap(&f, &line, &VerifyConfig::default()), Err(VerifyError::NotACap(_))));
    }
}
