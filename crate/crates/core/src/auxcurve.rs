//! The curve `f_{a,b,t,m}(X,Y) = 0` whose points record secants of the coset
//! arc `K_t` through `P = (a,b)`, and its quartic shadow `g_P`.
//!
//! With `u = t·x^m` and `z = t·y^m`,
//!
//! ```text
//! f = a(u²z + uz² - 3uz + 1) - b·uz - u²z² + 3uz - u - z
//! ```
//!
//! which is the determinant of `P`, `P(u)`, `P(z)` up to a nonzero factor.
//! As a polynomial in `z` it has coefficients `au - u²`, `au² - 3au - bu + 3u - 1`
//! and `a - u`; every counting and search routine below works line by line
//! in this form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;
use crate::cubic::{self, CubicError, NodalCubic};
use crate::field::{FieldElement, FieldError, FieldSpec};
use crate::plane::{Point2, SegmentPosition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuxError {
    #[error("precondition not met: {0}")]
    PreconditionNotMet(String),
    #[error("P = ({0}, {1}) lies on the cubic")]
    OnCubicPoint(u64, u64),
    #[error("the parameter must be nonzero")]
    ZeroParam,
    #[error("t = {0} is an m-th power")]
    TrivialCoset(u64),
    #[error("no witness found after searching {searched} values")]
    NotFound { searched: u64 },
    #[error("the partner of K_t through P0 does not lie in the coset of {0}")]
    BadCosetPair(u64),
    #[error("P0 = P({0}) lies on one of the cosets")]
    PointInCoset(u64),
    #[error(transparent)]
    Cubic(#[from] CubicError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Parameters of `f_{a,b,t,m}`. Construction only checks `t ≠ 0` and
/// `m ≥ 1`; [`CurveParams::validate`] adds the arithmetic hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveParams {
    pub a: FieldElement,
    pub b: FieldElement,
    pub t: FieldElement,
    pub m: u64,
}

impl CurveParams {
    pub fn new(a: FieldElement, b: FieldElement, t: FieldElement, m: u64) -> Result<Self, AuxError> {
        if t.code() == 0 {
            return Err(AuxError::ZeroParam);
        }
        if m == 0 {
            return Err(AuxError::PreconditionNotMet("m must be positive".into()));
        }
        Ok(CurveParams { a, b, t, m })
    }

    /// `m | q-1`, `gcd(m,6) = 1`, `m > 1`, and `t` not an `m`-th power.
    pub fn validate(&self, f: &FieldSpec) -> Result<(), AuxError> {
        cubic::check_hypotheses(f.q(), self.m)?;
        if f.is_mth_power(self.t, self.m)? {
            return Err(AuxError::TrivialCoset(self.t.code()));
        }
        Ok(())
    }

    pub fn point(&self) -> Point2 {
        Point2::new(self.a, self.b)
    }

    pub fn on_cubic(&self, f: &FieldSpec) -> bool {
        let am1 = f.sub(self.a, f.one());
        f.mul(self.a, self.b) == f.mul(f.square(am1), am1)
    }

    fn require_off_cubic(&self, f: &FieldSpec) -> Result<(), AuxError> {
        if self.on_cubic(f) {
            return Err(AuxError::OnCubicPoint(self.a.code(), self.b.code()));
        }
        Ok(())
    }
}

/// `D(u, z)`: `f` after the substitution `u = t x^m`, `z = t y^m`.
#[inline]
fn d_form(f: &FieldSpec, a: FieldElement, b: FieldElement, u: FieldElement, z: FieldElement) -> FieldElement {
    let uz = f.mul(u, z);
    let three = f.from_int(3);
    let inner = f.add(f.sub(f.mul(uz, f.add(u, z)), f.mul(three, uz)), f.one());
    let mut r = f.mul(a, inner);
    r = f.sub(r, f.mul(b, uz));
    r = f.sub(r, f.square(uz));
    r = f.add(r, f.mul(three, uz));
    f.sub(f.sub(r, u), z)
}

/// Coefficients `(A, B, C)` of `D(u, z) = A z² + B z + C`.
#[inline]
fn z_coefficients(f: &FieldSpec, a: FieldElement, b: FieldElement, u: FieldElement) -> [FieldElement; 3] {
    let three = f.from_int(3);
    let a2 = f.sub(f.mul(a, u), f.square(u));
    let lin = f.sub(f.mul(a, u), f.add(f.mul(three, a), f.sub(b, three)));
    let a1 = f.sub(f.mul(u, lin), f.one());
    [a2, a1, f.sub(a, u)]
}

/// Number of roots of `A z² + B z + C` in `F_q`; `q` when it vanishes.
fn root_count(f: &FieldSpec, [a2, a1, a0]: [FieldElement; 3]) -> u64 {
    if !f.is_zero(a2) {
        let disc = f.sub(f.square(a1), f.mul(f.from_int(4), f.mul(a2, a0)));
        return (1 + f.chi(disc)) as u64;
    }
    if !f.is_zero(a1) {
        return 1;
    }
    if f.is_zero(a0) {
        f.q()
    } else {
        0
    }
}

/// Roots of `A z² + B z + C`, sorted by code; `None` when it vanishes.
fn roots(f: &FieldSpec, [a2, a1, a0]: [FieldElement; 3]) -> Option<Vec<FieldElement>> {
    if f.is_zero(a2) {
        if f.is_zero(a1) {
            return if f.is_zero(a0) { None } else { Some(Vec::new()) };
        }
        return Some(vec![f.div(f.neg(a0), a1).expect("nonzero")]);
    }
    let disc = f.sub(f.square(a1), f.mul(f.from_int(4), f.mul(a2, a0)));
    let Some(s) = f.sqrt(disc) else { return Some(Vec::new()) };
    let two_a = f.add(a2, a2);
    let r1 = f.div(f.sub(s, a1), two_a).expect("nonzero");
    let r2 = f.div(f.sub(f.neg(s), a1), two_a).expect("nonzero");
    let mut v = vec![r1, r2];
    v.sort_unstable();
    v.dedup();
    Some(v)
}

/// `f_{a,b,t,m}(x, y)`.
pub fn eval_f(f: &FieldSpec, cp: &CurveParams, x: FieldElement, y: FieldElement) -> FieldElement {
    let u = f.mul(cp.t, f.pow_u(x, cp.m));
    let z = f.mul(cp.t, f.pow_u(y, cp.m));
    d_form(f, cp.a, cp.b, u, z)
}

/// `g_P(X, Y) = f_{a,b,t,1}(X, Y)`.
pub fn eval_g(f: &FieldSpec, a: FieldElement, b: FieldElement, t: FieldElement, x: FieldElement, y: FieldElement) -> FieldElement {
    d_form(f, a, b, f.mul(t, x), f.mul(t, y))
}

/// `-(a² + t²X^mY^m - a t Y^m)(a² + t²X^mY^m - a t X^m)`.
pub fn factored_form(f: &FieldSpec, cp: &CurveParams, x: FieldElement, y: FieldElement) -> FieldElement {
    let u = f.mul(cp.t, f.pow_u(x, cp.m));
    let z = f.mul(cp.t, f.pow_u(y, cp.m));
    let base = f.add(f.square(cp.a), f.mul(u, z));
    let l = f.sub(base, f.mul(cp.a, z));
    let r = f.sub(base, f.mul(cp.a, u));
    f.neg(f.mul(l, r))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorReport {
    pub checked: u64,
    pub exhaustive: bool,
    /// First `(x, y, f, factored)` where the two sides differ, by code order.
    pub mismatch: Option<[FieldElement; 4]>,
}

impl FactorReport {
    pub fn holds(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Above this many plane points the factorization check samples.
pub const FACTOR_EXHAUSTIVE_LIMIT: u64 = 1 << 22;
const FACTOR_SAMPLE: u64 = 1 << 16;

/// Compares `f` with its factored form when `a³ = -1` and `b = 1 - (a-1)³`.
pub fn special_factor_check(f: &FieldSpec, cp: &CurveParams) -> Result<FactorReport, AuxError> {
    let a3 = f.pow_u(cp.a, 3);
    if a3 != f.neg(f.one()) {
        return Err(AuxError::PreconditionNotMet(format!("a^3 = {} is not -1", a3.code())));
    }
    let am1 = f.sub(cp.a, f.one());
    if cp.b != f.sub(f.one(), f.pow_u(am1, 3)) {
        return Err(AuxError::PreconditionNotMet("b is not 1 - (a-1)^3".into()));
    }
    let q = f.q() as u128;
    let exhaustive = q * q <= FACTOR_EXHAUSTIVE_LIMIT as u128;
    let total = if exhaustive { (q * q) as u64 } else { FACTOR_SAMPLE };
    // sampled indices follow a fixed odd stride through the plane
    let stride = if exhaustive { 1 } else { (q * q / FACTOR_SAMPLE as u128) | 1 };
    let mismatch = (0..total).into_par_iter().find_map_first(|k| {
        let idx = (k as u128 * stride) % (q * q);
        let p = Point2::new(f.el((idx / q) as u64), f.el((idx % q) as u64));
        let lhs = eval_f(f, cp, p.x, p.y);
        let rhs = factored_form(f, cp, p.x, p.y);
        (lhs != rhs).then_some([p.x, p.y, lhs, rhs])
    });
    Ok(FactorReport { checked: total, exhaustive, mismatch })
}

/// Distinct values of `x^m` on `F_q`, each with the number of preimages.
fn power_classes(f: &FieldSpec, m: u64) -> (Vec<FieldElement>, u64) {
    let q = f.q();
    let d = arith::gcd(m, q - 1);
    let g = f.primitive_root();
    let step = f.pow_u(g, d);
    let mut v = f.one();
    let mut out = Vec::with_capacity(((q - 1) / d) as usize);
    for _ in 0..(q - 1) / d {
        out.push(v);
        v = f.mul(v, step);
    }
    (out, d)
}

fn is_power_class(f: &FieldSpec, y: FieldElement, d: u64) -> bool {
    !f.is_zero(y) && f.pow_u(y, (f.q() - 1) / d) == f.one()
}

/// `#{(x, y) ∈ F_q² : f(x, y) = 0}`.
pub fn count_curve_points(f: &FieldSpec, cp: &CurveParams) -> u64 {
    let (classes, d) = power_classes(f, cp.m);
    let t_inv = f.inv(cp.t).expect("t nonzero");
    let per_line = |big_x: FieldElement, weight: u64| -> u64 {
        let u = f.mul(cp.t, big_x);
        match roots(f, z_coefficients(f, cp.a, cp.b, u)) {
            None => weight * f.q(),
            Some(rs) => rs
                .into_iter()
                .map(|z| {
                    let big_y = f.mul(z, t_inv);
                    if f.is_zero(big_y) {
                        1
                    } else if is_power_class(f, big_y, d) {
                        d
                    } else {
                        0
                    }
                })
                .sum::<u64>()
                * weight,
        }
    };
    per_line(f.zero(), 1) + classes.par_iter().map(|&c| per_line(c, d)).sum::<u64>()
}

/// `#{(X, Y) ∈ F_q² : g_P(X, Y) = 0}` in `O(q)` character evaluations.
pub fn count_quartic_points(f: &FieldSpec, a: FieldElement, b: FieldElement, t: FieldElement) -> Result<u64, AuxError> {
    let cp = CurveParams::new(a, b, t, 1)?;
    cp.require_off_cubic(f)?;
    Ok(f.elements()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&x| root_count(f, z_coefficients(f, a, b, f.mul(t, x))))
        .sum())
}

/// `|count - (q+1)| ≤ 2g√q + slack`, decided in integers.
pub fn in_weil_window(q: u64, count: u64, genus: u64, slack: u64) -> bool {
    let dev = (count as i128 - (q as i128 + 1)).unsigned_abs();
    if dev <= slack as u128 {
        return true;
    }
    let excess = dev - slack as u128;
    let g = genus as u128;
    excess
        .checked_mul(excess)
        .is_some_and(|lhs| 4u128.checked_mul(g * g).and_then(|r| r.checked_mul(q as u128)).is_some_and(|rhs| lhs <= rhs))
}

/// `(lo, hi)` of `q + 1 ± (2g√q + slack)`, rounded outward.
pub fn weil_bounds(q: u64, genus: u64, slack: u64) -> (i128, i128) {
    let r = 2 * genus as u128 * (arith::isqrt(q as u128) + 1) + slack as u128;
    (q as i128 + 1 - r as i128, q as i128 + 1 + r as i128)
}

/// Genus bound for `f_{a,b,t,m}` used in count windows.
pub fn curve_genus_bound(m: u64) -> u64 {
    3 * m * m - 3 * m + 1
}

pub const QUARTIC_GENUS: u64 = 1;
pub const QUARTIC_SLACK: u64 = 8;

pub fn curve_slack(m: u64) -> u64 {
    8 * m
}

/// Points `(x, y)` of `f = 0` with `x, y ≠ 0` and `x^m ≠ y^m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSearch {
    pub witnesses: Vec<(FieldElement, FieldElement)>,
    /// `x^m` classes examined; equals the number of classes when the search
    /// ran to exhaustion.
    pub searched: u64,
    pub exhausted: bool,
}

/// Enumerates secant witnesses `(x, y)` in order of `x`'s code, then `y`'s.
struct SecantScan<'a> {
    f: &'a FieldSpec,
    cp: CurveParams,
    /// smallest-code preimages of each `y^m`, indexed by the class code
    preimages: Vec<Vec<FieldElement>>,
    d: u64,
}

impl<'a> SecantScan<'a> {
    fn new(f: &'a FieldSpec, cp: CurveParams) -> Self {
        let d = arith::gcd(cp.m, f.q() - 1);
        let mut preimages = vec![Vec::new(); f.q() as usize];
        for y in f.nonzero_elements() {
            preimages[f.pow_u(y, cp.m).code() as usize].push(y);
        }
        SecantScan { f, cp, preimages, d }
    }

    fn classes(&self) -> u64 {
        (self.f.q() - 1) / self.d
    }

    /// Witness pairs for one `x`, each with the secant's parameters `(u, z)`.
    fn for_x(&self, x: FieldElement) -> Vec<(FieldElement, FieldElement, FieldElement, FieldElement)> {
        let f = self.f;
        let big_x = f.pow_u(x, self.cp.m);
        let u = f.mul(self.cp.t, big_x);
        let zs = match roots(f, z_coefficients(f, self.cp.a, self.cp.b, u)) {
            Some(zs) => zs,
            None => unreachable!("P is off the cubic"),
        };
        let t_inv = f.inv(self.cp.t).expect("t nonzero");
        let mut out = Vec::new();
        for z in zs {
            let big_y = f.mul(z, t_inv);
            if f.is_zero(big_y) || big_y == big_x {
                continue;
            }
            for &y in &self.preimages[big_y.code() as usize] {
                out.push((x, y, u, z));
            }
        }
        out
    }

    /// Nonzero `x` of smallest code in each class of `x^m`.
    fn representatives(&self) -> Vec<FieldElement> {
        let mut seen = vec![false; self.f.q() as usize];
        self.f
            .nonzero_elements()
            .filter(|&x| {
                let c = self.f.pow_u(x, self.cp.m).code() as usize;
                !std::mem::replace(&mut seen[c], true)
            })
            .collect()
    }
}

/// Up to `limit` points of `f = 0` with `x, y ∈ F_q*` and `x^m ≠ y^m`, each
/// naming a secant of `K_t` through `P`.
pub fn collinear_witnesses(f: &FieldSpec, cp: &CurveParams, limit: usize) -> Result<WitnessSearch, AuxError> {
    cp.require_off_cubic(f)?;
    let scan = SecantScan::new(f, *cp);
    let mut witnesses = Vec::new();
    let mut searched = 0;
    for x in f.nonzero_elements() {
        if witnesses.len() >= limit {
            break;
        }
        searched += 1;
        for (x, y, _, _) in scan.for_x(x) {
            if witnesses.len() < limit {
                witnesses.push((x, y));
            }
        }
    }
    let exhausted = searched == f.q() - 1;
    Ok(WitnessSearch { witnesses, searched, exhausted })
}

/// A secant through `P` with `P` in the requested position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    #[serde(rename = "P")]
    pub p: Point2,
    pub t: FieldElement,
    pub m: u64,
    pub x: FieldElement,
    pub y: FieldElement,
    pub class: SegmentPosition,
    pub secant: [Point2; 2],
}

fn wanted_chi(want: SegmentPosition) -> i8 {
    match want {
        SegmentPosition::External => 1,
        SegmentPosition::Internal => -1,
    }
}

/// A point of `f = 0` whose secant has `P` external (`χ((a-u)(a-z)) = 1`) or
/// internal (`-1`).
pub fn bicover_witness(f: &FieldSpec, cp: &CurveParams, want: SegmentPosition) -> Result<WitnessReport, AuxError> {
    cp.require_off_cubic(f)?;
    let cubic = NodalCubic::new(f.clone())?;
    let scan = SecantScan::new(f, *cp);
    let reps = scan.representatives();
    let target = wanted_chi(want);
    let found = reps.par_iter().find_map_first(|&x| {
        scan.for_x(x).into_iter().find(|&(_, _, u, z)| {
            let prod = f.mul(f.sub(cp.a, u), f.sub(cp.a, z));
            f.chi(prod) == target
        })
    });
    match found {
        Some((x, y, u, z)) => Ok(WitnessReport {
            p: cp.point(),
            t: cp.t,
            m: cp.m,
            x,
            y,
            class: want,
            secant: [cubic.point_of_param(u)?, cubic.point_of_param(z)?],
        }),
        None => Err(AuxError::NotFound { searched: scan.classes() }),
    }
}

/// A secant joining `P(t x^m) ∈ K_t` to its third-point partner
/// `Q = P(1/(u0 t x^m)) ∈ K_{t2}` on which `P0 = P(u0)` sits in the requested
/// position.
pub fn eta_witness(
    f: &FieldSpec,
    u0: FieldElement,
    t: FieldElement,
    t2: FieldElement,
    m: u64,
    want: SegmentPosition,
) -> Result<WitnessReport, AuxError> {
    if f.is_zero(u0) || f.is_zero(t) || f.is_zero(t2) {
        return Err(AuxError::ZeroParam);
    }
    let cubic = NodalCubic::new(f.clone())?;
    if f.is_mth_power(f.div(u0, t)?, m)? || f.is_mth_power(f.div(u0, t2)?, m)? {
        return Err(AuxError::PointInCoset(u0.code()));
    }
    let partner = f.inv(f.mul(u0, t))?;
    if !f.is_mth_power(f.div(partner, t2)?, m)? {
        return Err(AuxError::BadCosetPair(t2.code()));
    }
    let target = wanted_chi(want);
    let t2_inv = f.inv(t2)?;
    let mut seen = vec![false; f.q() as usize];
    let mut searched = 0;
    for x in f.nonzero_elements() {
        let big_x = f.pow_u(x, m);
        if std::mem::replace(&mut seen[big_x.code() as usize], true) {
            continue;
        }
        searched += 1;
        let v = f.mul(t, big_x);
        let w = f.inv(f.mul(u0, v))?;
        if v == w {
            continue;
        }
        let eta = f.mul(f.sub(u0, v), f.sub(u0, w));
        if f.chi(eta) == target {
            let big_y = f.mul(w, t2_inv);
            let y = f
                .nonzero_elements()
                .find(|&y| f.pow_u(y, m) == big_y)
                .expect("w lies in t2·K");
            return Ok(WitnessReport {
                p: cubic.point_of_param(u0)?,
                t,
                m,
                x,
                y,
                class: want,
                secant: [cubic.point_of_param(v)?, cubic.point_of_param(w)?],
            });
        }
    }
    Err(AuxError::NotFound { searched })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::{collinear3, segment_position};

    fn f(q: u64) -> FieldSpec {
        FieldSpec::with_order(q).unwrap()
    }

    /// Literal `f` with every power computed from scratch.
    fn literal_f(f: &FieldSpec, a: u64, b: u64, t: u64, m: u64, x: u64, y: u64) -> u64 {
        let q = f.q() as i128;
        let pw = |base: i128, e: u64| -> i128 { (0..e).fold(1i128, |acc, _| acc * base % q) };
        let (a, b, t) = (a as i128, b as i128, t as i128);
        let xm = pw(x as i128, m);
        let ym = pw(y as i128, m);
        let t2 = t * t % q;
        let t3 = t2 * t % q;
        let t4 = t3 * t % q;
        let v = a * ((t3 * xm % q * xm % q * ym + t3 * xm % q * ym % q * ym - 3 * t2 * xm % q * ym + 1) % q) - b * t2 % q * xm % q * ym
            - t4 * xm % q * xm % q * ym % q * ym
            + 3 * t2 * xm % q * ym
            - t * xm
            - t * ym;
        v.rem_euclid(q) as u64
    }

    #[test]
    fn eval_examples() {
        let f7 = f(7);
        let cp = CurveParams::new(f7.el(3), f7.el(0), f7.el(3), 5).unwrap();
        assert_eq!(eval_f(&f7, &cp, f7.zero(), f7.zero()), f7.el(3));
        assert_eq!(eval_f(&f7, &cp, f7.one(), f7.one()), f7.el(3));
        let f11 = f(11);
        for (a, b, t, m) in [(0, 1, 2, 1), (4, 7, 3, 5), (10, 0, 6, 7)] {
            let cp = CurveParams::new(f11.el(a), f11.el(b), f11.el(t), m).unwrap();
            for x in 0..11 {
                for y in 0..11 {
                    let v = eval_f(&f11, &cp, f11.el(x), f11.el(y));
                    assert_eq!(v.code(), literal_f(&f11, a, b, t, m, x, y));
                    assert_eq!(v, eval_f(&f11, &cp, f11.el(y), f11.el(x)));
                }
            }
        }
    }

    #[test]
    fn factor_identity() {
        let f7 = f(7);
        let cp = CurveParams::new(f7.el(3), f7.el(0), f7.el(3), 5).unwrap();
        assert_eq!(factored_form(&f7, &cp, f7.one(), f7.one()), f7.el(3));
        let r = special_factor_check(&f7, &cp).unwrap();
        assert!(r.holds() && r.exhaustive && r.checked == 49);
        let bad = CurveParams::new(f7.el(2), f7.el(0), f7.el(3), 5).unwrap();
        assert!(matches!(special_factor_check(&f7, &bad), Err(AuxError::PreconditionNotMet(_))));
        // a wrong b is caught too
        let bad_b = CurveParams::new(f7.el(3), f7.el(1), f7.el(3), 5).unwrap();
        assert!(matches!(special_factor_check(&f7, &bad_b), Err(AuxError::PreconditionNotMet(_))));
    }

    #[test]
    fn curve_count_matches_double_loop() {
        let f31 = f(31);
        for (a, b, t, m) in [(0u64, 1u64, 2u64, 5u64), (5, 9, 3, 5), (7, 1, 2, 1), (1, 0, 3, 3)] {
            let cp = CurveParams::new(f31.el(a), f31.el(b), f31.el(t), m).unwrap();
            let brute = (0..31 * 31)
                .filter(|&i| {
                    let p = Point2::from_index(&f31, i);
                    f31.is_zero(eval_f(&f31, &cp, p.x, p.y))
                })
                .count() as u64;
            assert_eq!(count_curve_points(&f31, &cp), brute, "{a} {b} {t} {m}");
            assert!(brute <= 31 * 2 * m.max(2));
        }
        // on the cubic the line u = a is a full component
        let on = CurveParams::new(f31.el(2), f31.el(16), f31.el(1), 1).unwrap();
        assert!(on.on_cubic(&f31));
        let brute = (0..31 * 31)
            .filter(|&i| {
                let p = Point2::from_index(&f31, i);
                f31.is_zero(eval_f(&f31, &on, p.x, p.y))
            })
            .count() as u64;
        assert_eq!(count_curve_points(&f31, &on), brute);
    }

    #[test]
    fn quartic_count_agrees_with_curve_count_at_m1() {
        let f101 = f(101);
        let cp = CurveParams::new(f101.el(17), f101.el(40), f101.el(5), 1).unwrap();
        assert_eq!(count_quartic_points(&f101, cp.a, cp.b, cp.t).unwrap(), count_curve_points(&f101, &cp));
        assert!(matches!(
            count_quartic_points(&f101, f101.el(2), f101.el(51), f101.el(5)),
            Err(AuxError::OnCubicPoint(2, 51))
        ));
        // degenerate lines: x = 0 and x = a/t have exactly one root each
        let a = f101.el(17);
        let t = f101.el(5);
        for x in [f101.zero(), f101.div(a, t).unwrap()] {
            let c = z_coefficients(&f101, a, f101.el(40), f101.mul(t, x));
            assert!(f101.is_zero(c[0]));
            assert_eq!(root_count(&f101, c), 1);
        }
    }

    #[test]
    fn weil_window_arithmetic() {
        assert!(in_weil_window(101, 102, 1, 0));
        // 2·1·√101 ≈ 20.1
        assert!(in_weil_window(101, 102 + 20, 1, 0));
        assert!(!in_weil_window(101, 102 + 21, 1, 0));
        assert!(in_weil_window(101, 102 + 28, 1, 8));
        assert!(!in_weil_window(101, 102 + 29, 1, 8));
        assert!(!in_weil_window(101, 102 + 29, 1, 0));
        let (lo, hi) = weil_bounds(101, 1, 8);
        assert!(lo <= 102 - 28 && hi >= 102 + 28);
    }

    #[test]
    fn witnesses_lie_on_secants() {
        let f31 = f(31);
        let cubic = NodalCubic::new(f31.clone()).unwrap();
        let cp = CurveParams::new(f31.el(4), f31.el(9), f31.el(2), 5).unwrap();
        assert!(!cp.on_cubic(&f31));
        let ws = collinear_witnesses(&f31, &cp, usize::MAX).unwrap();
        assert!(ws.exhausted);
        for &(x, y) in &ws.witnesses {
            assert!(f31.is_zero(eval_f(&f31, &cp, x, y)));
            let u = f31.mul(cp.t, f31.pow_u(x, 5));
            let z = f31.mul(cp.t, f31.pow_u(y, 5));
            assert_ne!(u, z);
            let p1 = cubic.point_of_param(u).unwrap();
            let p2 = cubic.point_of_param(z).unwrap();
            assert!(collinear3(&f31, cp.point(), p1, p2).unwrap());
        }
        let on = CurveParams::new(f31.el(2), f31.el(16), f31.el(2), 5).unwrap();
        assert!(matches!(collinear_witnesses(&f31, &on, 5), Err(AuxError::OnCubicPoint(..))));
        assert_eq!(collinear_witnesses(&f31, &cp, 1).unwrap().witnesses.len().min(1), ws.witnesses.len().min(1));
    }

    #[test]
    fn bicover_witnesses_cross_check_geometrically() {
        let f31 = f(31);
        let mut found = 0;
        for a in 0..31 {
            for b in 0..31 {
                let cp = CurveParams::new(f31.el(a), f31.el(b), f31.el(3), 5).unwrap();
                if cp.on_cubic(&f31) {
                    continue;
                }
                for want in [SegmentPosition::External, SegmentPosition::Internal] {
                    if let Ok(w) = bicover_witness(&f31, &cp, want) {
                        found += 1;
                        assert_eq!(segment_position(&f31, w.p, w.secant[0], w.secant[1]).unwrap(), want);
                        let json = serde_json::to_value(&w).unwrap();
                        assert!(json.get("P").is_some() && json.get("secant").is_some());
                    }
                }
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn eta_witness_examples() {
        let f31 = f(31);
        let g = f31.primitive_root();
        let t = g;
        // P0 = P(u0) with u0 in the coset g^2 K: the partner coset is g^{-3} K = g^2 K
        let u0 = f31.pow_u(g, 2);
        let t2 = f31.inv(f31.mul(u0, t)).unwrap();
        assert_eq!(
            eta_witness(&f31, f31.zero(), t, t2, 5, SegmentPosition::External),
            Err(AuxError::ZeroParam)
        );
        let u0 = f31.pow_u(g, 4);
        let t2 = f31.inv(f31.mul(u0, t)).unwrap();
        for want in [SegmentPosition::External, SegmentPosition::Internal] {
            match eta_witness(&f31, u0, t, t2, 5, want) {
                Ok(w) => {
                    assert!(collinear3(&f31, w.p, w.secant[0], w.secant[1]).unwrap());
                    assert_eq!(segment_position(&f31, w.p, w.secant[0], w.secant[1]).unwrap(), want);
                }
                Err(AuxError::NotFound { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
        assert!(matches!(eta_witness(&f31, u0, t, t, 5, SegmentPosition::External), Err(AuxError::BadCosetPair(_))));
    }
}
