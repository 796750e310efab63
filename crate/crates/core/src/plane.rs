//! Affine geometry of `AG(2,q)` and `AG(N,q)`: collinearity, lines,
//! Segre's external/internal position on a segment, arcs and caps.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldDescriptor, FieldElement, FieldError, FieldSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlaneError {
    #[error("points must be pairwise distinct")]
    DuplicatePoints,
    #[error("points are not collinear")]
    NotCollinear,
    #[error("points of different dimensions ({0} and {1})")]
    MixedDimensions(usize, usize),
    #[error("coordinate code {0} out of range")]
    BadCoordinate(u64),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Point of `AG(2,q)`. Serializes as `[x, y]` codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[FieldElement; 2]", into = "[FieldElement; 2]")]
pub struct Point2 {
    pub x: FieldElement,
    pub y: FieldElement,
}

impl From<[FieldElement; 2]> for Point2 {
    fn from([x, y]: [FieldElement; 2]) -> Self {
        Point2 { x, y }
    }
}

impl From<Point2> for [FieldElement; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Point2 {
    pub fn new(x: FieldElement, y: FieldElement) -> Self {
        Point2 { x, y }
    }

    /// Dense index `code(x)·q + code(y)`.
    #[inline]
    pub fn index(&self, q: u64) -> u64 {
        self.x.code() * q + self.y.code()
    }

    pub fn from_index(f: &FieldSpec, idx: u64) -> Point2 {
        let q = f.q();
        Point2 { x: f.el(idx / q), y: f.el(idx % q) }
    }

    pub fn from_codes(f: &FieldSpec, x: u64, y: u64) -> Result<Point2, FieldError> {
        Ok(Point2 { x: f.element(x)?, y: f.element(y)? })
    }

    pub fn codes(&self) -> [u64; 2] {
        [self.x.code(), self.y.code()]
    }
}

/// Point of `AG(N,q)`. Serializes as `[c0, …, cN-1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointN {
    pub coords: Vec<FieldElement>,
}

impl PointN {
    pub fn new(coords: Vec<FieldElement>) -> Self {
        PointN { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Dense index `Σ code(c_i)·q^i`.
    pub fn index(&self, q: u64) -> u128 {
        self.coords.iter().rev().fold(0u128, |acc, c| acc * q as u128 + c.code() as u128)
    }

    pub fn from_index(f: &FieldSpec, mut idx: u128, n: usize) -> PointN {
        let q = f.q() as u128;
        let coords = (0..n)
            .map(|_| {
                let c = (idx % q) as u64;
                idx /= q;
                f.el(c)
            })
            .collect();
        PointN { coords }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentPosition {
    External,
    Internal,
}

impl SegmentPosition {
    pub fn from_character(chi: i8) -> Option<Self> {
        match chi {
            1 => Some(SegmentPosition::External),
            -1 => Some(SegmentPosition::Internal),
            _ => None,
        }
    }
}

fn det(f: &FieldSpec, p1: Point2, p2: Point2, p3: Point2) -> FieldElement {
    let a = f.mul(f.sub(p2.x, p1.x), f.sub(p3.y, p1.y));
    let b = f.mul(f.sub(p2.y, p1.y), f.sub(p3.x, p1.x));
    f.sub(a, b)
}

/// Whether three pairwise distinct points lie on a line.
pub fn collinear3(f: &FieldSpec, p1: Point2, p2: Point2, p3: Point2) -> Result<bool, PlaneError> {
    if p1 == p2 || p1 == p3 || p2 == p3 {
        return Err(PlaneError::DuplicatePoints);
    }
    Ok(f.is_zero(det(f, p1, p2, p3)))
}

/// Position of `p` relative to the segment `p1 p2` on their common line:
/// external iff `(c - c1)(c - c2)` is a nonzero square, where `c` is the
/// X-coordinate when `p1.x != p2.x` and the Y-coordinate otherwise.
pub fn segment_position(f: &FieldSpec, p: Point2, p1: Point2, p2: Point2) -> Result<SegmentPosition, PlaneError> {
    if !collinear3(f, p, p1, p2)? {
        return Err(PlaneError::NotCollinear);
    }
    let (c, c1, c2) = if p1.x != p2.x { (p.x, p1.x, p2.x) } else { (p.y, p1.y, p2.y) };
    let prod = f.mul(f.sub(c, c1), f.sub(c, c2));
    Ok(SegmentPosition::from_character(f.chi(prod)).expect("distinct collinear points have distinct frame coordinates"))
}

/// The `q - 2` points `p1 + s(p2 - p1)`, `s ∉ {0, 1}`, in increasing code of `s`.
pub fn line_third_points(f: &FieldSpec, p1: Point2, p2: Point2) -> Result<impl Iterator<Item = Point2> + '_, PlaneError> {
    if p1 == p2 {
        return Err(PlaneError::DuplicatePoints);
    }
    let dx = f.sub(p2.x, p1.x);
    let dy = f.sub(p2.y, p1.y);
    Ok(f.elements().skip(2).map(move |s| Point2 {
        x: f.add(p1.x, f.mul(s, dx)),
        y: f.add(p1.y, f.mul(s, dy)),
    }))
}

/// Outcome of an arc or cap check; `Collinear` carries a witness triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetCheck<P> {
    NoThreeCollinear,
    Collinear([P; 3]),
}

impl<P> SetCheck<P> {
    pub fn holds(&self) -> bool {
        matches!(self, SetCheck::NoThreeCollinear)
    }

    pub fn witness(&self) -> Option<&[P; 3]> {
        match self {
            SetCheck::Collinear(w) => Some(w),
            SetCheck::NoThreeCollinear => None,
        }
    }
}

pub type ArcCheck = SetCheck<Point2>;
pub type CapCheck = SetCheck<PointN>;

/// Slope-bucket arc test: for each anchor, later points sharing a slope through
/// it form a collinear triple. Duplicate input points are ignored.
///
/// The witness is the smallest (by dense indices) among the first collision
/// found from each anchor, so it does not depend on thread scheduling.
pub fn is_arc(f: &FieldSpec, points: &[Point2]) -> ArcCheck {
    let q = f.q();
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by_key(|p| p.index(q));
    pts.dedup();
    let n = pts.len();
    if n < 3 {
        return SetCheck::NoThreeCollinear;
    }
    let dense = q < (1 << 26);
    let witness = (0..n - 2)
        .into_par_iter()
        .map_init(
            || SlopeBuckets::new(q, dense),
            |buckets, i| first_collision(f, &pts, i, buckets),
        )
        .flatten()
        .min();
    match witness {
        Some([a, b, c]) => SetCheck::Collinear([pts[a], pts[b], pts[c]]),
        None => SetCheck::NoThreeCollinear,
    }
}

/// Slope → last point index, with generation stamps so a reset is O(1).
pub(crate) struct SlopeBuckets {
    stamp: u32,
    slots: Vec<(u32, u32)>,
    sparse: HashMap<u64, u32>,
    dense: bool,
}

impl SlopeBuckets {
    pub(crate) fn new(q: u64, dense: bool) -> Self {
        let slots = if dense { vec![(0, 0); q as usize + 1] } else { Vec::new() };
        SlopeBuckets { stamp: 0, slots, sparse: HashMap::new(), dense }
    }

    pub(crate) fn reset(&mut self) {
        if self.dense {
            self.stamp = self.stamp.wrapping_add(1);
            if self.stamp == 0 {
                self.slots.iter_mut().for_each(|s| *s = (0, 0));
                self.stamp = 1;
            }
        } else {
            self.sparse.clear();
        }
    }

    /// Records `idx` under `key`, returning the previous occupant.
    #[inline]
    pub(crate) fn insert(&mut self, key: u64, idx: u32) -> Option<u32> {
        if self.dense {
            let slot = &mut self.slots[key as usize];
            let prev = (slot.0 == self.stamp).then_some(slot.1);
            *slot = (self.stamp, idx);
            prev
        } else {
            self.sparse.insert(key, idx)
        }
    }
}

/// Slope keys from `anchor` to each of `others`: the code of `dy/dx`, or `q`
/// for vertical lines.
pub(crate) fn slope_keys(f: &FieldSpec, anchor: Point2, others: &[Point2]) -> Vec<u64> {
    let mut dxs: Vec<FieldElement> = others.iter().map(|p| f.sub(p.x, anchor.x)).filter(|d| !f.is_zero(*d)).collect();
    f.batch_inv(&mut dxs).expect("filtered nonzero");
    let mut inv = dxs.into_iter();
    others
        .iter()
        .map(|p| {
            if p.x == anchor.x {
                f.q()
            } else {
                f.mul(f.sub(p.y, anchor.y), inv.next().expect("one inverse per non-vertical")).code()
            }
        })
        .collect()
}

fn first_collision(f: &FieldSpec, pts: &[Point2], i: usize, buckets: &mut SlopeBuckets) -> Option<[usize; 3]> {
    buckets.reset();
    let rest = &pts[i + 1..];
    let keys = slope_keys(f, pts[i], rest);
    for (off, key) in keys.into_iter().enumerate() {
        let j = i + 1 + off;
        if let Some(prev) = buckets.insert(key, j as u32) {
            return Some([i, prev as usize, j]);
        }
    }
    None
}

/// Whether `c - a` is parallel to `b - a` in `AG(N,q)`.
pub fn collinear_n(f: &FieldSpec, a: &PointN, b: &PointN, c: &PointN) -> bool {
    let u: Vec<FieldElement> = b.coords.iter().zip(&a.coords).map(|(&x, &y)| f.sub(x, y)).collect();
    let v: Vec<FieldElement> = c.coords.iter().zip(&a.coords).map(|(&x, &y)| f.sub(x, y)).collect();
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            if f.mul(u[i], v[j]) != f.mul(u[j], v[i]) {
                return false;
            }
        }
    }
    true
}

/// Direction `b - a` scaled so its first nonzero coordinate is 1.
fn normalized_direction(f: &FieldSpec, a: &PointN, b: &PointN) -> Vec<u64> {
    let d: Vec<FieldElement> = b.coords.iter().zip(&a.coords).map(|(&x, &y)| f.sub(x, y)).collect();
    let lead = d.iter().copied().find(|c| !f.is_zero(*c)).expect("distinct points");
    let s = f.inv(lead).expect("nonzero");
    d.into_iter().map(|c| f.mul(c, s).code()).collect()
}

/// Cap test in `AG(N,q)` by direction bucketing. Duplicates are ignored.
pub fn is_cap(f: &FieldSpec, points: &[PointN]) -> Result<CapCheck, PlaneError> {
    let Some(first) = points.first() else {
        return Ok(SetCheck::NoThreeCollinear);
    };
    let n = first.dim();
    if let Some(bad) = points.iter().find(|p| p.dim() != n) {
        return Err(PlaneError::MixedDimensions(n, bad.dim()));
    }
    let q = f.q();
    let mut pts: Vec<PointN> = points.to_vec();
    pts.sort_by_key(|p| p.index(q));
    pts.dedup();
    let len = pts.len();
    if len < 3 {
        return Ok(SetCheck::NoThreeCollinear);
    }
    let witness = (0..len - 2)
        .into_par_iter()
        .filter_map(|i| {
            let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(len - i);
            for j in i + 1..len {
                if let Some(prev) = seen.insert(normalized_direction(f, &pts[i], &pts[j]), j) {
                    return Some([i, prev, j]);
                }
            }
            None
        })
        .min();
    Ok(match witness {
        Some([a, b, c]) => SetCheck::Collinear([pts[a].clone(), pts[b].clone(), pts[c].clone()]),
        None => SetCheck::NoThreeCollinear,
    })
}

/// Where an arc came from when it is a union of cubic cosets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetProvenance {
    pub m: u64,
    #[serde(rename = "M")]
    pub members: Vec<u64>,
    pub g: u64,
}

/// A point set of `AG(2,q)` together with its field, sorted by dense index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ArcSetJson", into = "ArcSetJson")]
pub struct ArcSet {
    pub field: FieldSpec,
    pub provenance: Option<CosetProvenance>,
    points: Vec<Point2>,
}

impl ArcSet {
    pub fn new(field: FieldSpec, mut points: Vec<Point2>, provenance: Option<CosetProvenance>) -> Self {
        let q = field.q();
        points.sort_by_key(|p| p.index(q));
        points.dedup();
        ArcSet { field, provenance, points }
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn check_arc(&self) -> ArcCheck {
        is_arc(&self.field, &self.points)
    }
}

#[derive(Serialize, Deserialize)]
struct ArcSetJson {
    q: u64,
    p: u64,
    h: u32,
    #[serde(default)]
    modulus: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    m: Option<u64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none", default)]
    members: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    g: Option<u64>,
    points: Vec<[u64; 2]>,
}

impl TryFrom<ArcSetJson> for ArcSet {
    type Error = PlaneError;

    fn try_from(j: ArcSetJson) -> Result<Self, Self::Error> {
        let field = FieldSpec::from_descriptor(&FieldDescriptor { p: j.p, h: j.h, modulus: j.modulus })?;
        if field.q() != j.q {
            return Err(PlaneError::BadCoordinate(j.q));
        }
        let points = j
            .points
            .iter()
            .map(|&[x, y]| Point2::from_codes(&field, x, y))
            .collect::<Result<Vec<_>, _>>()?;
        let provenance = match (j.m, j.members, j.g) {
            (Some(m), Some(members), Some(g)) => Some(CosetProvenance { m, members, g }),
            _ => None,
        };
        Ok(ArcSet::new(field, points, provenance))
    }
}

impl From<ArcSet> for ArcSetJson {
    fn from(a: ArcSet) -> Self {
        let d = a.field.descriptor();
        let (m, members, g) = match a.provenance {
            Some(p) => (Some(p.m), Some(p.members), Some(p.g)),
            None => (None, None, None),
        };
        ArcSetJson {
            q: a.field.q(),
            p: d.p,
            h: d.h,
            modulus: d.modulus,
            m,
            members,
            g,
            points: a.points.iter().map(Point2::codes).collect(),
        }
    }
}
