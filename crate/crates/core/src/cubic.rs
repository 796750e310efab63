//! The nodal cubic `XY = (X-1)^3`, its group of affine points
//! `G ≅ (F_q*, ·)` via `v ↦ (v, (v-1)^3/v)`, coset arcs, unions of cosets,
//! and the arithmetic gates on `(q, m)`.
//!
//! The node sits at the point at infinity `(0:1:0)`, so every affine point of
//! the curve is nonsingular and has `x ≠ 0`. Three distinct points `P(v1)`,
//! `P(v2)`, `P(v3)` are collinear exactly when `v1·v2·v3 = 1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;
use crate::field::{FieldElement, FieldError, FieldSpec};
use crate::indep;
use crate::plane::{ArcSet, CosetProvenance, Point2};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CubicError {
    #[error("characteristic {0} is too small for the nodal cubic (need p > 3)")]
    CharacteristicTooSmall(u64),
    #[error("the parameter must be nonzero")]
    ZeroParam,
    #[error("point ({0}, {1}) is not on XY = (X-1)^3")]
    NotOnCubic(u64, u64),
    #[error("index {m} does not divide q - 1 = {q_minus_1}")]
    BadDivisibility { m: u64, q_minus_1: u64 },
    #[error("index {m} must be coprime to {required}")]
    BadGcd { m: u64, required: u64 },
    #[error("bad index or residue: {0}")]
    BadIndex(String),
    #[error("coset representative {0} lies in the subgroup of m-th powers")]
    RepresentativeInSubgroup(u64),
    #[error("residue set {0:?} is not 3-independent")]
    NotThreeIndependent(Vec<u64>),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupOp {
    Mul,
    Inv,
}

/// A coset `t·K` of the index-`m` subgroup `K = {w^m}` of `F_q*`, with the
/// primitive root `g` that labels cosets by residues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetSpec {
    pub m: u64,
    pub t: FieldElement,
    pub g: FieldElement,
}

#[derive(Debug, Clone)]
pub struct NodalCubic {
    field: FieldSpec,
}

impl NodalCubic {
    pub fn new(field: FieldSpec) -> Result<Self, CubicError> {
        if field.p() <= 3 {
            return Err(CubicError::CharacteristicTooSmall(field.p()));
        }
        Ok(NodalCubic { field })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    /// The neutral element `(1, 0)`.
    pub fn neutral(&self) -> Point2 {
        Point2::new(self.field.one(), self.field.zero())
    }

    pub fn contains(&self, p: Point2) -> bool {
        let f = &self.field;
        let xm1 = f.sub(p.x, f.one());
        !f.is_zero(p.x) && f.mul(p.x, p.y) == f.mul(f.square(xm1), xm1)
    }

    /// `y`-coordinate `(v-1)^3 / v` for nonzero `v`.
    #[inline]
    pub(crate) fn y_of(&self, v: FieldElement) -> FieldElement {
        let f = &self.field;
        let vm1 = f.sub(v, f.one());
        f.div(f.mul(f.square(vm1), vm1), v).expect("v nonzero")
    }

    pub fn point_of_param(&self, v: FieldElement) -> Result<Point2, CubicError> {
        if self.field.is_zero(v) {
            return Err(CubicError::ZeroParam);
        }
        Ok(Point2::new(v, self.y_of(v)))
    }

    pub fn param_of_point(&self, p: Point2) -> Result<FieldElement, CubicError> {
        if !self.contains(p) {
            return Err(CubicError::NotOnCubic(p.x.code(), p.y.code()));
        }
        Ok(p.x)
    }

    pub fn group_op(&self, v1: FieldElement, v2: FieldElement, op: GroupOp) -> Result<FieldElement, CubicError> {
        let f = &self.field;
        if f.is_zero(v1) || (op == GroupOp::Mul && f.is_zero(v2)) {
            return Err(CubicError::ZeroParam);
        }
        Ok(match op {
            GroupOp::Mul => f.mul(v1, v2),
            GroupOp::Inv => f.inv(v1)?,
        })
    }

    /// Validated coset `t·K` for index `m`.
    pub fn coset(&self, m: u64, t: FieldElement) -> Result<CosetSpec, CubicError> {
        self.check_index(m)?;
        if self.field.is_zero(t) {
            return Err(CubicError::ZeroParam);
        }
        if self.field.is_mth_power(t, m)? {
            return Err(CubicError::RepresentativeInSubgroup(t.code()));
        }
        Ok(CosetSpec { m, t, g: self.field.primitive_root() })
    }

    /// The coset labelled by residue `i`: representative `g^i`.
    pub fn residue_coset(&self, m: u64, i: u64) -> Result<CosetSpec, CubicError> {
        self.check_index(m)?;
        if i >= m {
            return Err(CubicError::BadIndex(format!("residue {i} is not below m = {m}")));
        }
        let g = self.field.primitive_root();
        Ok(CosetSpec { m, t: self.field.pow_u(g, i), g })
    }

    fn check_index(&self, m: u64) -> Result<(), CubicError> {
        let q_minus_1 = self.field.q() - 1;
        if m == 0 || q_minus_1 % m != 0 {
            return Err(CubicError::BadDivisibility { m, q_minus_1 });
        }
        Ok(())
    }

    /// Parameters `t·w^m`, `w ∈ F_q*`, without repetition, sorted by code.
    pub fn coset_params(&self, c: &CosetSpec) -> Vec<FieldElement> {
        let f = &self.field;
        let size = (f.q() - 1) / c.m;
        let step = f.pow_u(c.g, c.m);
        let mut out = Vec::with_capacity(size as usize);
        let mut v = c.t;
        for _ in 0..size {
            out.push(v);
            v = f.mul(v, step);
        }
        out.sort_unstable();
        out
    }

    /// Points of the coset arc `K_t`, sorted by dense index.
    pub fn coset_points(&self, c: &CosetSpec) -> Vec<Point2> {
        let mut pts: Vec<Point2> = self
            .coset_params(c)
            .into_iter()
            .map(|v| Point2::new(v, self.y_of(v)))
            .collect();
        pts.sort_by_key(|p| p.index(self.field.q()));
        pts
    }

    /// Union of the cosets `g^i·K`, `i ∈ members`. With `strict`, the residue
    /// set must be 3-independent in `Z_m`.
    pub fn union_arc(&self, m: u64, members: &[u64], strict: bool) -> Result<ArcSet, CubicError> {
        self.check_index(m)?;
        if arith::gcd(m, 3) != 1 {
            return Err(CubicError::BadGcd { m, required: 3 });
        }
        let mut residues = members.to_vec();
        residues.sort_unstable();
        residues.dedup();
        if let Some(&bad) = residues.iter().find(|&&i| i >= m) {
            return Err(CubicError::BadIndex(format!("residue {bad} is not below m = {m}")));
        }
        if strict && !indep::verify(m, &residues).flags.three_independent {
            return Err(CubicError::NotThreeIndependent(residues));
        }
        let mut points = Vec::with_capacity(residues.len() * ((self.field.q() - 1) / m) as usize);
        for &i in &residues {
            points.extend(self.coset_points(&self.residue_coset(m, i)?));
        }
        let g = self.field.primitive_root();
        Ok(ArcSet::new(self.field.clone(), points, Some(CosetProvenance { m, members: residues, g: g.code() })))
    }
}

/// Which sufficient condition on `(q, m)` to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateRule {
    /// `q + 1 - (12m² - 8m + 2)√q ≥ 8m² + 8m + 1`, decided in integers.
    Exact,
    /// `m ≤ q^(1/4) / 3.5`, i.e. `16q ≥ 2401·m⁴`.
    Quartic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateReport {
    pub q: u64,
    pub m: u64,
    pub exact: bool,
    pub quartic: bool,
    /// `q + 1 - (8m² + 8m + 1)`.
    pub exact_margin: i128,
    /// `12m² - 8m + 2`.
    pub sqrt_coefficient: u128,
    /// Smallest `q` passing the quartic rule for this `m`.
    pub quartic_threshold: u128,
}

impl GateReport {
    pub fn passes(&self, rule: GateRule) -> bool {
        match rule {
            GateRule::Exact => self.exact,
            GateRule::Quartic => self.quartic,
        }
    }
}

/// The exact rule without any divisibility preconditions.
pub fn exact_rule(q: u64, m: u64) -> bool {
    let m = m as i128;
    let margin = q as i128 + 1 - (8 * m * m + 8 * m + 1);
    if margin < 0 {
        return false;
    }
    let c = (12 * m * m - 8 * m + 2) as u128;
    let lhs = (margin as u128) * (margin as u128);
    match c.checked_mul(c).and_then(|cc| cc.checked_mul(q as u128)) {
        Some(rhs) => lhs >= rhs,
        None => false,
    }
}

/// The quartic rule `16q ≥ 2401·m⁴` without preconditions.
pub fn quartic_rule(q: u64, m: u64) -> bool {
    match (m as u128).checked_pow(4).and_then(|m4| m4.checked_mul(2401)) {
        Some(rhs) => 16 * q as u128 >= rhs,
        None => false,
    }
}

/// `⌈2401·m⁴ / 16⌉`, the least `q` with `16q ≥ 2401·m⁴`.
pub fn quartic_threshold(m: u64) -> u128 {
    (2401 * (m as u128).pow(4)).div_ceil(16)
}

/// Checks `m | q-1`, `gcd(m, 6) = 1`, `m > 1`, then evaluates both rules.
pub fn check_hypotheses(q: u64, m: u64) -> Result<GateReport, CubicError> {
    if m <= 1 {
        return Err(CubicError::BadIndex(format!("index must exceed 1, got {m}")));
    }
    if q < 2 || (q - 1) % m != 0 {
        return Err(CubicError::BadDivisibility { m, q_minus_1: q.saturating_sub(1) });
    }
    if arith::gcd(m, 6) != 1 {
        return Err(CubicError::BadGcd { m, required: 6 });
    }
    let mi = m as i128;
    Ok(GateReport {
        q,
        m,
        exact: exact_rule(q, m),
        quartic: quartic_rule(q, m),
        exact_margin: q as i128 + 1 - (8 * mi * mi + 8 * mi + 1),
        sqrt_coefficient: (12 * mi * mi - 8 * mi + 2) as u128,
        quartic_threshold: quartic_threshold(m),
    })
}
