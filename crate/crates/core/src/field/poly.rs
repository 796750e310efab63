//! Dense univariate polynomials over a [`FieldSpec`], little-endian.
//!
//! Only what irreducibility testing and tower arithmetic need.

use super::{FieldElement, FieldSpec};

pub(crate) type Poly = Vec<FieldElement>;

pub(crate) fn trim(f: &FieldSpec, mut a: Poly) -> Poly {
    while a.last().is_some_and(|c| f.is_zero(*c)) {
        a.pop();
    }
    a
}

pub(crate) fn degree(a: &[FieldElement]) -> Option<usize> {
    a.len().checked_sub(1)
}

pub(crate) fn sub(f: &FieldSpec, a: &[FieldElement], b: &[FieldElement]) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(f.zero());
            let y = b.get(i).copied().unwrap_or(f.zero());
            f.sub(x, y)
        })
        .collect();
    trim(f, out)
}

pub(crate) fn mul(f: &FieldSpec, a: &[FieldElement], b: &[FieldElement]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    trim(f, out)
}

/// Remainder of `a` modulo a nonzero `m`.
pub(crate) fn rem(f: &FieldSpec, a: &[FieldElement], m: &[FieldElement]) -> Poly {
    let mut r = trim(f, a.to_vec());
    let dm = degree(m).expect("modulus must be nonzero");
    let lead_inv = f.inv(m[dm]).expect("trimmed modulus has nonzero lead");
    while let Some(dr) = degree(&r) {
        if dr < dm {
            break;
        }
        let c = f.mul(r[dr], lead_inv);
        let shift = dr - dm;
        for (i, &mc) in m.iter().enumerate() {
            r[shift + i] = f.sub(r[shift + i], f.mul(c, mc));
        }
        r = trim(f, r);
    }
    r
}

pub(crate) fn mulmod(f: &FieldSpec, a: &[FieldElement], b: &[FieldElement], m: &[FieldElement]) -> Poly {
    rem(f, &mul(f, a, b), m)
}

pub(crate) fn powmod(f: &FieldSpec, base: &[FieldElement], mut exp: u64, m: &[FieldElement]) -> Poly {
    let mut acc = rem(f, &[f.one()], m);
    let mut b = rem(f, base, m);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(f, &acc, &b, m);
        }
        exp >>= 1;
        if exp > 0 {
            b = mulmod(f, &b, &b, m);
        }
    }
    acc
}

pub(crate) fn gcd(f: &FieldSpec, a: &[FieldElement], b: &[FieldElement]) -> Poly {
    let mut x = trim(f, a.to_vec());
    let mut y = trim(f, b.to_vec());
    while !y.is_empty() {
        let r = rem(f, &x, &y);
        x = y;
        y = r;
    }
    x
}

/// Ben-Or irreducibility test: `m` of degree `d` is irreducible iff
/// `gcd(m, X^(Q^i) - X) = 1` for every `i <= d/2`, where `Q` is the order of
/// the coefficient field.
pub(crate) fn is_irreducible(f: &FieldSpec, m: &[FieldElement]) -> bool {
    let Some(d) = degree(m) else { return false };
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    let x: Poly = vec![f.zero(), f.one()];
    let mut frob = rem(f, &x, m);
    for _ in 1..=d / 2 {
        frob = powmod(f, &frob, f.q(), m);
        let g = gcd(f, m, &sub(f, &frob, &x));
        if degree(&g) != Some(0) {
            return false;
        }
    }
    true
}
