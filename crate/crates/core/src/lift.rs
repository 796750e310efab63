//! Lifting a plane arc `A ⊆ AG(2,q)` to the cap
//! `C_A = {(α, α², u, v) : α ∈ F_{q'}, (u, v) ∈ A}` in `AG(N,q)`,
//! `q' = q^((N-2)/2)`, and exporting caps as parity-check matrices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::field::{ExtensionField, FieldDescriptor, FieldElement, FieldError, FieldSpec};
use crate::plane::{self, ArcSet, PlaneError, PointN, SetCheck};
use crate::verify::{self, Counts, Mode, VerifyConfig, VerifyError, VerifyReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("dimension {0} is not a multiple of 4 that is at least 4")]
    BadDimension(usize),
    #[error("input is not a cap: {0:?} are collinear")]
    NotACap(Vec<PointN>),
    #[error("malformed matrix: {0}")]
    BadMatrix(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Plane(#[from] PlaneError),
}

/// A point set of `AG(N,q)`, sorted by dense index, with the arc it was lifted
/// from when known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CapJson", into = "CapJson")]
pub struct Cap {
    pub field: FieldSpec,
    pub dim: usize,
    pub source: Option<LiftSource>,
    points: Vec<PointN>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftSource {
    pub qprime: u64,
    pub arc: ArcSet,
}

impl Cap {
    pub fn new(field: FieldSpec, dim: usize, mut points: Vec<PointN>) -> Result<Self, LiftError> {
        if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
            return Err(PlaneError::MixedDimensions(dim, bad.dim()).into());
        }
        let q = field.q();
        points.sort_by_key(|p| p.index(q));
        points.dedup();
        Ok(Cap { field, dim, source: None, points })
    }

    pub fn points(&self) -> &[PointN] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn check_cap(&self) -> Result<plane::CapCheck, PlaneError> {
        plane::is_cap(&self.field, &self.points)
    }
}

#[derive(Serialize, Deserialize)]
struct CapJson {
    q: u64,
    p: u64,
    h: u32,
    #[serde(default)]
    modulus: Vec<u64>,
    #[serde(rename = "N")]
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    qprime: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    arc: Option<ArcSet>,
    points: Vec<Vec<u64>>,
}

impl TryFrom<CapJson> for Cap {
    type Error = LiftError;

    fn try_from(j: CapJson) -> Result<Self, LiftError> {
        let field = FieldSpec::from_descriptor(&FieldDescriptor { p: j.p, h: j.h, modulus: j.modulus })?;
        if field.q() != j.q {
            return Err(PlaneError::BadCoordinate(j.q).into());
        }
        let points = j
            .points
            .iter()
            .map(|c| c.iter().map(|&x| field.element(x)).collect::<Result<Vec<_>, _>>().map(PointN::new))
            .collect::<Result<Vec<_>, _>>()?;
        let mut cap = Cap::new(field, j.n, points)?;
        if let (Some(qprime), Some(arc)) = (j.qprime, j.arc) {
            cap.source = Some(LiftSource { qprime, arc });
        }
        Ok(cap)
    }
}

impl From<Cap> for CapJson {
    fn from(c: Cap) -> Self {
        let d = c.field.descriptor();
        let (qprime, arc) = match c.source {
            Some(s) => (Some(s.qprime), Some(s.arc)),
            None => (None, None),
        };
        CapJson {
            q: c.field.q(),
            p: d.p,
            h: d.h,
            modulus: d.modulus,
            n: c.dim,
            qprime,
            arc,
            points: c.points.iter().map(|p| p.coords.iter().map(|x| x.code()).collect()).collect(),
        }
    }
}

/// `C_A` together with the extension field used to coordinatize `F_{q'}`.
#[derive(Debug, Clone)]
pub struct LiftedCap {
    pub n: usize,
    pub arc: ArcSet,
    pub extension: ExtensionField,
    pub cap: Cap,
}

impl LiftedCap {
    pub fn qprime(&self) -> u64 {
        self.extension.order()
    }

    pub fn points(&self) -> &[PointN] {
        self.cap.points()
    }
}

/// Builds `C_A ⊆ AG(N,q)` for `N ≡ 0 (mod 4)`, `N ≥ 4`.
pub fn lift_arc(a: &ArcSet, n: usize) -> Result<LiftedCap, LiftError> {
    if n < 4 || n % 4 != 0 {
        return Err(LiftError::BadDimension(n));
    }
    let e = ((n - 2) / 2) as u32;
    let ext = a.field.extension(e)?;
    let alphas: Vec<_> = ext.elements().collect();
    let points: Vec<PointN> = alphas
        .par_iter()
        .flat_map_iter(|alpha| {
            let mut head: Vec<FieldElement> = alpha.coords().to_vec();
            head.extend_from_slice(ext.square(alpha).coords());
            a.points().iter().map(move |p| {
                let mut c = head.clone();
                c.push(p.x);
                c.push(p.y);
                PointN::new(c)
            })
        })
        .collect();
    let mut cap = Cap::new(a.field.clone(), n, points)?;
    cap.source = Some(LiftSource { qprime: ext.order(), arc: a.clone() });
    Ok(LiftedCap { n, arc: a.clone(), extension: ext, cap })
}

/// Completeness of `C_A` in `AG(N,q)`, marked only on the slice `α = 0`.
///
/// For `c ∈ F_{q'}` the affine map `(α, β, u, v) ↦ (α + c, β + 2cα + c², u, v)`
/// fixes `C_A` and moves any point into the slice, so the cap is complete iff
/// every slice point off it lies on a secant. All pairs of cap points are
/// still enumerated; each secant meets the slice in at most one point unless
/// it lies inside it.
pub fn verify_lift_complete(l: &LiftedCap, config: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    let f = &l.cap.field;
    let q = f.q();
    let n = l.n;
    let e = (n - 2) / 2;
    let size = (q as u128)
        .checked_pow((n - e) as u32)
        .filter(|&s| s <= config.cap_max_points)
        .ok_or(VerifyError::TooLarge {
            what: "slice",
            size: (q as u128).saturating_pow((n - e) as u32),
            limit: config.cap_max_points,
        })? as u64;
    let pts = l.points();
    let marks = verify::bitmap(size);
    let scalars: Vec<FieldElement> = f.elements().skip(2).collect();
    // Points sharing the α block span secants of the same shape; group them.
    let mut groups: std::collections::BTreeMap<&[FieldElement], Vec<&[FieldElement]>> = Default::default();
    for p in pts {
        groups.entry(&p.coords[..e]).or_default().push(&p.coords[e..]);
    }
    let groups: Vec<_> = groups.into_iter().collect();
    let tail_index = |c: &[FieldElement]| c.iter().rev().fold(0u64, |acc, x| acc * q + x.code());
    let mut tail = vec![f.zero(); n - e];
    if let Some((_, g)) = groups.iter().find(|(a, _)| a.iter().all(|x| f.is_zero(*x))) {
        for (i, t1) in g.iter().enumerate() {
            for t2 in &g[i + 1..] {
                for &s in &scalars {
                    for k in 0..n - e {
                        tail[k] = f.add(t1[k], f.mul(s, f.sub(t2[k], t1[k])));
                    }
                    verify::set_bit(&marks, tail_index(&tail));
                }
            }
        }
    }
    (0..groups.len()).into_par_iter().for_each(|i| {
        let (a1, g1) = &groups[i];
        let mut tail = vec![f.zero(); n - e];
        for (a2, g2) in &groups[i + 1..] {
            let j = (0..e).find(|&j| a1[j] != a2[j]).expect("distinct groups");
            let s = f.div(f.neg(a1[j]), f.sub(a2[j], a1[j])).expect("nonzero");
            if f.is_zero(s) || s == f.one() {
                continue;
            }
            if !(j + 1..e).all(|k| f.is_zero(f.add(a1[k], f.mul(s, f.sub(a2[k], a1[k]))))) {
                continue;
            }
            let r = f.sub(f.one(), s);
            for t1 in g1 {
                let u: Vec<FieldElement> = t1.iter().map(|&x| f.mul(r, x)).collect();
                for t2 in g2 {
                    for k in 0..n - e {
                        tail[k] = f.add(u[k], f.mul(s, t2[k]));
                    }
                    verify::set_bit(&marks, tail_index(&tail));
                }
            }
        }
    });
    let in_slice: std::collections::HashSet<u64> =
        pts.iter().filter(|p| p.coords[..e].iter().all(|x| f.is_zero(*x))).map(|p| tail_index(&p.coords[e..])).collect();
    let mut counts = Counts::default();
    let mut uncovered = Vec::new();
    for idx in 0..size {
        if in_slice.contains(&idx) {
            continue;
        }
        counts.checked += 1;
        if verify::get_bit(&marks, idx) {
            counts.both += 1;
        } else {
            counts.uncovered += 1;
            if uncovered.len() < verify::MAX_REPORTED {
                let tail = PointN::from_index(f, idx as u128, n - e);
                let mut c = vec![0u64; e];
                c.extend(tail.coords.iter().map(|x| x.code()));
                uncovered.push(c);
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

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeMetadata {
    /// `[k, k - N - 1, 4]`.
    pub parameters: [i64; 3],
    pub embedding: String,
    /// SHA-256 of the source arc's JSON, or of the cap's when no arc is known.
    pub source_hash: String,
}

/// `(N+1) × k` matrix over `F_q`; column `j` is `(1, x_1, …, x_N)` for the
/// `j`-th cap point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityCheckMatrix {
    pub field: FieldSpec,
    pub rows: usize,
    pub cols: usize,
    /// Column-major entry codes.
    pub columns: Vec<Vec<u64>>,
    pub metadata: CodeMetadata,
}

impl ParityCheckMatrix {
    /// One line per row, entries comma-separated.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            let line: Vec<String> = self.columns.iter().map(|c| c[r].to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// The cap points back from the homogenized columns.
    pub fn decode(&self) -> Result<Vec<PointN>, LiftError> {
        self.columns
            .iter()
            .map(|c| {
                if c.len() != self.rows || c.first() != Some(&1) {
                    return Err(LiftError::BadMatrix("column is not of the form (1, x)".into()));
                }
                c[1..]
                    .iter()
                    .map(|&x| self.field.element(x).map_err(LiftError::from))
                    .collect::<Result<Vec<_>, _>>()
                    .map(PointN::new)
            })
            .collect()
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Parity-check matrix of the code whose columns are the cap's points.
pub fn export_parity_check(cap: &Cap) -> Result<ParityCheckMatrix, LiftError> {
    if let SetCheck::Collinear(w) = cap.check_cap()? {
        return Err(LiftError::NotACap(w.to_vec()));
    }
    let k = cap.len();
    let n = cap.dim;
    let columns: Vec<Vec<u64>> = cap
        .points()
        .iter()
        .map(|p| std::iter::once(1).chain(p.coords.iter().map(|c| c.code())).collect())
        .collect();
    let source_hash = match &cap.source {
        Some(s) => sha256_hex(serde_json::to_string(&s.arc).expect("serializable").as_bytes()),
        None => sha256_hex(serde_json::to_string(cap).expect("serializable").as_bytes()),
    };
    Ok(ParityCheckMatrix {
        field: cap.field.clone(),
        rows: n + 1,
        cols: k,
        columns,
        metadata: CodeMetadata {
            parameters: [k as i64, k as i64 - n as i64 - 1, 4],
            embedding: "affine-embedded".into(),
            source_hash,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceCheck {
    /// No three columns are linearly dependent.
    pub holds: bool,
    /// Column indices of a dependent triple.
    pub witness: Option<[usize; 3]>,
}

/// Reduced basis of a two-column span: pivot rows and echelon vectors.
struct Span2 {
    e1: Vec<FieldElement>,
    e2: Vec<FieldElement>,
    r1: usize,
    r2: usize,
}

fn span2(f: &FieldSpec, a: &[FieldElement], b: &[FieldElement]) -> Option<Span2> {
    let r1 = a.iter().position(|x| !f.is_zero(*x))?;
    let s = f.inv(a[r1]).expect("nonzero");
    let e1: Vec<FieldElement> = a.iter().map(|&x| f.mul(x, s)).collect();
    let c = b[r1];
    let rest: Vec<FieldElement> = b.iter().zip(&e1).map(|(&y, &x)| f.sub(y, f.mul(c, x))).collect();
    let r2 = rest.iter().position(|x| !f.is_zero(*x))?;
    let s2 = f.inv(rest[r2]).expect("nonzero");
    let e2: Vec<FieldElement> = rest.iter().map(|&x| f.mul(x, s2)).collect();
    // clear the second pivot from e1
    let c1 = e1[r2];
    let e1 = e1.iter().zip(&e2).map(|(&x, &y)| f.sub(x, f.mul(c1, y))).collect();
    Some(Span2 { e1, e2, r1, r2 })
}

fn in_span(f: &FieldSpec, s: &Span2, v: &[FieldElement]) -> bool {
    let (a, b) = (v[s.r1], v[s.r2]);
    v.iter()
        .zip(s.e1.iter().zip(&s.e2))
        .all(|(&x, (&y1, &y2))| f.sub(x, f.add(f.mul(a, y1), f.mul(b, y2))) == f.zero())
}

/// Minimum distance at least 4, i.e. every three columns independent. The
/// witness is the lexicographically first dependent triple.
pub fn check_distance_ge4(h: &ParityCheckMatrix) -> DistanceCheck {
    let f = &h.field;
    let cols: Vec<Vec<FieldElement>> = h.columns.iter().map(|c| c.iter().map(|&x| f.el(x % f.q())).collect()).collect();
    let k = cols.len();
    if k < 3 {
        return DistanceCheck { holds: true, witness: None };
    }
    let witness = (0..k - 1).into_par_iter().find_map_first(|i| {
        for j in i + 1..k {
            match span2(f, &cols[i], &cols[j]) {
                None => {
                    let l = (0..k).find(|&l| l != i && l != j).expect("k >= 3");
                    let mut w = [i, j, l];
                    w.sort_unstable();
                    return Some(w);
                }
                Some(s) => {
                    if let Some(l) = (j + 1..k).find(|&l| in_span(f, &s, &cols[l])) {
                        return Some([i, j, l]);
                    }
                }
            }
        }
        None
    });
    DistanceCheck { holds: witness.is_none(), witness }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::Point2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn triangle(q: u64) -> ArcSet {
        let f = FieldSpec::prime(q).unwrap();
        let pts = [(0, 0), (1, 0), (0, 1)].iter().map(|&(x, y)| Point2::new(f.el(x), f.el(y))).collect();
        ArcSet::new(f, pts, None)
    }

    #[test]
    fn lift_sizes_and_cap_property() {
        let a = triangle(7);
        let l = lift_arc(&a, 4).unwrap();
        assert_eq!(l.points().len(), 21);
        assert!(l.cap.check_cap().unwrap().holds());
        assert_eq!(lift_arc(&a, 6).unwrap_err(), LiftError::BadDimension(6));
        assert_eq!(lift_arc(&a, 0).unwrap_err(), LiftError::BadDimension(0));
        let l8 = lift_arc(&a, 8).unwrap();
        assert_eq!(l8.qprime(), 343);
        assert_eq!(l8.points().len(), 343 * 3);
        // the first three coordinates of each point name an element of F_{7^3}
        for p in l8.points() {
            let alpha = l8.extension.from_coords(&p.coords[..3]).unwrap();
            assert_eq!(l8.extension.square(&alpha).coords(), &p.coords[3..6]);
        }
    }

    #[test]
    fn slice_check_agrees_with_full_check() {
        use crate::verify::verify_complete_cap;
        let cfg = VerifyConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for q in [5u64, 7] {
            let f = FieldSpec::prime(q).unwrap();
            for _ in 0..6 {
                // random arc by rejection
                let mut pts: Vec<Point2> = Vec::new();
                for _ in 0..200 {
                    let p = Point2::from_index(&f, rng.gen_range(0..q * q));
                    let mut cand = pts.clone();
                    cand.push(p);
                    if !pts.contains(&p) && plane::is_arc(&f, &cand).holds() {
                        pts = cand;
                    }
                }
                let l = lift_arc(&ArcSet::new(f.clone(), pts, None), 4).unwrap();
                let full = verify_complete_cap(&f, l.points(), &cfg).unwrap();
                let slice = verify_lift_complete(&l, &cfg).unwrap();
                assert_eq!(full.verdict, slice.verdict);
                // every uncovered point has exactly one translate in the slice
                assert_eq!(full.counts.uncovered, slice.counts.uncovered * l.qprime());
                for u in &slice.uncovered {
                    assert!(full.uncovered.contains(u) || full.counts.uncovered > full.uncovered.len() as u64);
                }
            }
        }
    }

    #[test]
    fn cap_json_round_trip() {
        let l = lift_arc(&triangle(5), 4).unwrap();
        let s = serde_json::to_string(&l.cap).unwrap();
        assert!(s.contains("\"N\":4") && s.contains("\"qprime\":5"));
        let back: Cap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l.cap);
    }

    #[test]
    fn export_and_decode() {
        let l = lift_arc(&triangle(5), 4).unwrap();
        let h = export_parity_check(&l.cap).unwrap();
        assert_eq!((h.rows, h.cols), (5, 15));
        assert_eq!(h.metadata.parameters, [15, 10, 4]);
        assert_eq!(h.metadata.embedding, "affine-embedded");
        assert_eq!(h.decode().unwrap(), l.points());
        assert!(check_distance_ge4(&h).holds);
        assert_eq!(h.to_csv().lines().count(), 5);
        let empty = Cap::new(FieldSpec::prime(5).unwrap(), 4, Vec::new()).unwrap();
        assert_eq!(export_parity_check(&empty).unwrap().cols, 0);
    }

    #[test]
    fn repeated_column_is_caught() {
        let l = lift_arc(&triangle(5), 4).unwrap();
        let mut h = export_parity_check(&l.cap).unwrap();
        let dup = h.columns[3].clone();
        h.columns.push(dup);
        h.cols += 1;
        let r = check_distance_ge4(&h);
        assert!(!r.holds);
        let w = r.witness.unwrap();
        assert!(w.contains(&3) && w.contains(&15));
    }

    #[test]
    fn distance_agrees_with_cap_test() {
        let f = FieldSpec::prime(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let k = rng.gen_range(3..9);
            let mut pts: Vec<PointN> =
                (0..k).map(|_| PointN::new((0..3).map(|_| f.el(rng.gen_range(0..5))).collect())).collect();
            pts.sort();
            pts.dedup();
            let columns = pts.iter().map(|p| std::iter::once(1).chain(p.coords.iter().map(|c| c.code())).collect()).collect();
            let h = ParityCheckMatrix {
                field: f.clone(),
                rows: 4,
                cols: pts.len(),
                columns,
                metadata: CodeMetadata { parameters: [0, 0, 4], embedding: String::new(), source_hash: String::new() },
            };
            assert_eq!(check_distance_ge4(&h).holds, plane::is_cap(&f, &pts).unwrap().holds());
        }
    }
}
