//! Explicit arithmetic in `F_q`, `q = p^h` odd, and in extension towers
//! `F_{q^e}` over it.
//!
//! Elements are carried as their canonical integer code
//! `Σ c_i p^i ∈ [0, q)`, where `c_i` are the little-endian coefficients of
//! the representing polynomial modulo the field's defining modulus. Every
//! bitmap in the crate is indexed by these codes.

mod extension;
pub(crate) mod poly;

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith;

pub use extension::{ExtElement, ExtensionField};

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 63;

/// Orders up to this size get discrete log/exp tables for `h > 1`.
const LOG_TABLE_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    CompositeCharacteristic(u64),
    #[error("characteristic 2 is not supported")]
    EvenCharacteristic,
    #[error("extension degree must be at least 1")]
    BadDegree,
    #[error("modulus {0:?} is reducible over F_p")]
    ReducibleModulus(Vec<u64>),
    #[error("malformed modulus {0:?}: expected a monic polynomial of degree h with coefficients below p")]
    BadModulus(Vec<u64>),
    #[error("field order p^h exceeds 2^63")]
    OrderTooLarge,
    #[error("element code {code} out of range for a field of order {q}")]
    CodeOutOfRange { code: u64, q: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero raised to a negative power")]
    ZeroToNegativePower,
    #[error("{m} does not divide q - 1 = {q_minus_1}")]
    NonDivisorM { m: u64, q_minus_1: u64 },
    #[error("zero is not in the multiplicative group")]
    ZeroInput,
    #[error("every element is an m-th power for m = {0}")]
    NoSuchElement(u64),
}

/// Field element as its canonical integer code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement(u64);

impl FieldElement {
    #[inline]
    pub const fn code(self) -> u64 {
        self.0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Binary and unary field operations, for callers that pick the operation at
/// runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Inv,
    Neg,
}

struct LogTables {
    log: Vec<u32>,
    /// `exp[i] = g^i` for `i < 2(q-1)`, so sums of two logs need no reduction.
    exp: Vec<u32>,
}

struct Inner {
    p: u64,
    h: u32,
    q: u64,
    /// Monic defining polynomial over `F_p`, little-endian; empty when `h = 1`.
    modulus: Vec<u64>,
    /// `p^i` for `i < h`.
    radix: Vec<u64>,
    tables: Option<LogTables>,
    primitive: OnceLock<FieldElement>,
    non_square: OnceLock<FieldElement>,
}

/// An explicit finite field `F_{p^h}`. Cheap to clone and shareable across
/// threads.
#[derive(Clone)]
pub struct FieldSpec {
    inner: Arc<Inner>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.inner.p)
            .field("h", &self.inner.h)
            .field("modulus", &self.inner.modulus)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.inner.p == other.inner.p && self.inner.h == other.inner.h && self.inner.modulus == other.inner.modulus
    }
}

impl Eq for FieldSpec {}

/// JSON shape of a field description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u64,
    pub h: u32,
    #[serde(default)]
    pub modulus: Vec<u64>,
}

impl FieldSpec {
    /// Builds `F_{p^h}`. Without an explicit modulus and `h > 1`, the monic
    /// irreducible of degree `h` with the smallest code `Σ c_i p^i` (over its
    /// non-leading coefficients) is selected.
    pub fn new(p: u64, h: u32, modulus: Option<&[u64]>) -> Result<Self, FieldError> {
        if !arith::is_prime(p) {
            return Err(FieldError::CompositeCharacteristic(p));
        }
        if p == 2 {
            return Err(FieldError::EvenCharacteristic);
        }
        if h == 0 {
            return Err(FieldError::BadDegree);
        }
        let q = arith::checked_pow_u128(p, h)
            .filter(|&q| q < MAX_ORDER as u128)
            .ok_or(FieldError::OrderTooLarge)? as u64;
        if h == 1 {
            if let Some(m) = modulus {
                if !m.is_empty() {
                    return Err(FieldError::BadModulus(m.to_vec()));
                }
            }
            return Ok(Self::prime_unchecked(p));
        }

        let base = Self::prime_unchecked(p);
        let modulus = match modulus {
            Some(m) => {
                if m.len() != h as usize + 1 || m[h as usize] != 1 || m.iter().any(|&c| c >= p) {
                    return Err(FieldError::BadModulus(m.to_vec()));
                }
                let as_poly: Vec<FieldElement> = m.iter().map(|&c| FieldElement(c)).collect();
                if !poly::is_irreducible(&base, &as_poly) {
                    return Err(FieldError::ReducibleModulus(m.to_vec()));
                }
                m.to_vec()
            }
            None => smallest_irreducible(&base, h as usize)
                .into_iter()
                .map(FieldElement::code)
                .collect(),
        };
        let radix = (0..h).map(|i| p.pow(i)).collect();
        let mut inner = Inner {
            p,
            h,
            q,
            modulus,
            radix,
            tables: None,
            primitive: OnceLock::new(),
            non_square: OnceLock::new(),
        };
        if q <= LOG_TABLE_LIMIT {
            let slow = FieldSpec { inner: Arc::new(inner) };
            let tables = build_log_tables(&slow);
            inner = Arc::into_inner(slow.inner).expect("sole owner");
            inner.tables = Some(tables);
        }
        Ok(FieldSpec { inner: Arc::new(inner) })
    }

    /// The prime field `F_p`, validated.
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        Self::new(p, 1, None)
    }

    /// `F_q` from its order, which must be an odd prime power.
    pub fn with_order(q: u64) -> Result<Self, FieldError> {
        match arith::prime_power(q) {
            Some((p, h)) => Self::new(p, h, None),
            None => Err(FieldError::CompositeCharacteristic(q)),
        }
    }

    pub(crate) fn prime_unchecked(p: u64) -> Self {
        FieldSpec {
            inner: Arc::new(Inner {
                p,
                h: 1,
                q: p,
                modulus: Vec::new(),
                radix: vec![1],
                tables: None,
                primitive: OnceLock::new(),
                non_square: OnceLock::new(),
            }),
        }
    }

    pub fn from_descriptor(d: &FieldDescriptor) -> Result<Self, FieldError> {
        let modulus = (!d.modulus.is_empty()).then_some(d.modulus.as_slice());
        Self::new(d.p, d.h, modulus)
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor { p: self.p(), h: self.h(), modulus: self.modulus().to_vec() }
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.inner.p
    }

    #[inline]
    pub fn h(&self) -> u32 {
        self.inner.h
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.inner.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.inner.modulus
    }

    #[inline]
    pub fn is_prime_field(&self) -> bool {
        self.inner.h == 1
    }

    pub fn element(&self, code: u64) -> Result<FieldElement, FieldError> {
        if code < self.q() {
            Ok(FieldElement(code))
        } else {
            Err(FieldError::CodeOutOfRange { code, q: self.q() })
        }
    }

    /// Element from a code known to be in range.
    #[inline]
    pub(crate) fn el(&self, code: u64) -> FieldElement {
        debug_assert!(code < self.q());
        FieldElement(code)
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<FieldElement, FieldError> {
        if coeffs.len() > self.h() as usize || coeffs.iter().any(|&c| c >= self.p()) {
            return Err(FieldError::BadModulus(coeffs.to_vec()));
        }
        Ok(FieldElement(coeffs.iter().zip(&self.inner.radix).map(|(c, r)| c * r).sum()))
    }

    /// Little-endian coefficient vector of length `h`.
    pub fn coeffs(&self, a: FieldElement) -> Vec<u64> {
        let p = self.p();
        let mut code = a.0;
        (0..self.h())
            .map(|_| {
                let d = code % p;
                code /= p;
                d
            })
            .collect()
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.p() as i64) as u64)
    }

    #[inline]
    pub fn zero(&self) -> FieldElement {
        FieldElement(0)
    }

    #[inline]
    pub fn one(&self) -> FieldElement {
        FieldElement(1)
    }

    #[inline]
    pub fn is_zero(&self, a: FieldElement) -> bool {
        a.0 == 0
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (0..self.q()).map(FieldElement)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (1..self.q()).map(FieldElement)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let p = self.inner.p;
        if self.inner.h == 1 {
            let s = a.0 + b.0;
            return FieldElement(if s >= p { s - p } else { s });
        }
        self.digitwise(a, b, |x, y| {
            let s = x + y;
            if s >= p {
                s - p
            } else {
                s
            }
        })
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let p = self.inner.p;
        if self.inner.h == 1 {
            return FieldElement(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + p - b.0 });
        }
        self.digitwise(a, b, |x, y| if x >= y { x - y } else { x + p - y })
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.sub(self.zero(), a)
    }

    #[inline]
    fn digitwise(&self, a: FieldElement, b: FieldElement, op: impl Fn(u64, u64) -> u64) -> FieldElement {
        let p = self.inner.p;
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        for &r in &self.inner.radix {
            out += op(x % p, y % p) * r;
            x /= p;
            y /= p;
        }
        FieldElement(out)
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let inner = &*self.inner;
        if inner.h == 1 {
            return FieldElement(if inner.p < (1 << 32) {
                (a.0 * b.0) % inner.p
            } else {
                arith::mul_mod(a.0, b.0, inner.p)
            });
        }
        if a.0 == 0 || b.0 == 0 {
            return FieldElement(0);
        }
        if let Some(t) = &inner.tables {
            let l = t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize;
            return FieldElement(t.exp[l] as u64);
        }
        self.poly_mul(a, b)
    }

    fn poly_mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let base = Self::prime_unchecked(self.p());
        let to_poly = |x: FieldElement| -> Vec<FieldElement> { self.coeffs(x).into_iter().map(FieldElement).collect() };
        let m: Vec<FieldElement> = self.inner.modulus.iter().map(|&c| FieldElement(c)).collect();
        let prod = poly::mulmod(&base, &to_poly(a), &to_poly(b), &m);
        let digits: Vec<u64> = prod.iter().map(|c| c.0).collect();
        self.from_coeffs(&digits).expect("reduced product has degree < h")
    }

    #[inline]
    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero);
        }
        if self.inner.h == 1 {
            return Ok(FieldElement(inv_mod(a.0, self.inner.p)));
        }
        if let Some(t) = &self.inner.tables {
            let qm1 = (self.q() - 1) as usize;
            let l = t.log[a.0 as usize] as usize;
            return Ok(FieldElement(t.exp[(qm1 - l) % qm1] as u64));
        }
        Ok(self.pow_u(a, self.q() - 2))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Applies `op`; unary operations ignore `b`.
    pub fn apply(&self, op: ArithOp, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(match op {
            ArithOp::Add => self.add(a, b),
            ArithOp::Sub => self.sub(a, b),
            ArithOp::Mul => self.mul(a, b),
            ArithOp::Div => self.div(a, b)?,
            ArithOp::Inv => self.inv(a)?,
            ArithOp::Neg => self.neg(a),
        })
    }

    /// Square-and-multiply for a non-negative exponent.
    pub fn pow_u(&self, a: FieldElement, mut n: u64) -> FieldElement {
        if let Some(t) = &self.inner.tables {
            if a.0 == 0 {
                return if n == 0 { self.one() } else { self.zero() };
            }
            let qm1 = self.q() as u128 - 1;
            let l = (t.log[a.0 as usize] as u128 * (n as u128 % qm1)) % qm1;
            return FieldElement(t.exp[l as usize] as u64);
        }
        let mut acc = self.one();
        let mut b = a;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, b);
            }
            n >>= 1;
            if n > 0 {
                b = self.mul(b, b);
            }
        }
        acc
    }

    pub fn pow(&self, a: FieldElement, n: i64) -> Result<FieldElement, FieldError> {
        if n >= 0 {
            return Ok(self.pow_u(a, n as u64));
        }
        if a.0 == 0 {
            return Err(FieldError::ZeroToNegativePower);
        }
        Ok(self.pow_u(self.inv(a)?, n.unsigned_abs()))
    }

    /// Quadratic character: 0 at zero, +1 on nonzero squares, -1 otherwise.
    pub fn chi(&self, a: FieldElement) -> i8 {
        if a.0 == 0 {
            return 0;
        }
        if self.inner.h == 1 {
            return legendre(a.0, self.inner.p);
        }
        if let Some(t) = &self.inner.tables {
            return if t.log[a.0 as usize] % 2 == 0 { 1 } else { -1 };
        }
        self.chi_by_euler(a)
    }

    /// `a^((q-1)/2)` read in {-1, 0, +1}; the reference definition of `chi`.
    pub fn chi_by_euler(&self, a: FieldElement) -> i8 {
        if a.0 == 0 {
            return 0;
        }
        if self.pow_u(a, (self.q() - 1) / 2) == self.one() {
            1
        } else {
            -1
        }
    }

    /// Whether nonzero `a` lies in the index-`m` subgroup of `F_q*`.
    pub fn is_mth_power(&self, a: FieldElement, m: u64) -> Result<bool, FieldError> {
        self.check_divisor(m)?;
        if a.0 == 0 {
            return Err(FieldError::ZeroInput);
        }
        Ok(self.pow_u(a, (self.q() - 1) / m) == self.one())
    }

    pub(crate) fn check_divisor(&self, m: u64) -> Result<(), FieldError> {
        let q_minus_1 = self.q() - 1;
        if m == 0 || q_minus_1 % m != 0 {
            return Err(FieldError::NonDivisorM { m, q_minus_1 });
        }
        Ok(())
    }

    /// Element of smallest code that is not an `m`-th power.
    pub fn find_non_mth_power(&self, m: u64) -> Result<FieldElement, FieldError> {
        self.check_divisor(m)?;
        if m == 1 {
            return Err(FieldError::NoSuchElement(m));
        }
        let e = (self.q() - 1) / m;
        self.nonzero_elements()
            .find(|&a| self.pow_u(a, e) != self.one())
            .ok_or(FieldError::NoSuchElement(m))
    }

    /// Generator of `F_q*` with the smallest code.
    pub fn primitive_root(&self) -> FieldElement {
        *self.inner.primitive.get_or_init(|| {
            if let Some(t) = &self.inner.tables {
                // the table generator is the smallest-code generator already
                return FieldElement(t.exp[1] as u64);
            }
            smallest_generator(self)
        })
    }

    /// Non-square with the smallest code.
    pub fn non_square(&self) -> FieldElement {
        *self
            .inner
            .non_square
            .get_or_init(|| self.nonzero_elements().find(|&a| self.chi(a) == -1).expect("q odd"))
    }

    /// Square root via Tonelli–Shanks; `None` for non-squares.
    pub fn sqrt(&self, a: FieldElement) -> Option<FieldElement> {
        match self.chi(a) {
            0 => return Some(self.zero()),
            -1 => return None,
            _ => {}
        }
        let q = self.q();
        let mut s = 0;
        let mut odd = q - 1;
        while odd % 2 == 0 {
            odd /= 2;
            s += 1;
        }
        let z = self.non_square();
        let mut m = s;
        let mut c = self.pow_u(z, odd);
        let mut t = self.pow_u(a, odd);
        let mut r = self.pow_u(a, odd.div_ceil(2));
        while t != self.one() {
            let mut i = 0;
            let mut tt = t;
            while tt != self.one() {
                tt = self.square(tt);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.square(b);
            }
            m = i;
            c = self.square(b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        Some(r)
    }

    /// Inverts every entry in place with one field inversion (Montgomery's
    /// trick). All entries must be nonzero.
    pub fn batch_inv(&self, xs: &mut [FieldElement]) -> Result<(), FieldError> {
        if xs.is_empty() {
            return Ok(());
        }
        let mut prefix = Vec::with_capacity(xs.len());
        let mut acc = self.one();
        for &x in xs.iter() {
            if x.0 == 0 {
                return Err(FieldError::DivisionByZero);
            }
            prefix.push(acc);
            acc = self.mul(acc, x);
        }
        let mut inv = self.inv(acc)?;
        for i in (0..xs.len()).rev() {
            let x = xs[i];
            xs[i] = self.mul(inv, prefix[i]);
            inv = self.mul(inv, x);
        }
        Ok(())
    }

    /// Builds `F_{q^e}` over this field with its fixed polynomial basis.
    pub fn extension(&self, e: u32) -> Result<ExtensionField, FieldError> {
        ExtensionField::new(self.clone(), e)
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.descriptor().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let desc = FieldDescriptor::deserialize(d)?;
        FieldSpec::from_descriptor(&desc).map_err(serde::de::Error::custom)
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let qt = r0 / r1;
        (r0, r1) = (r1, r0 - qt * r1);
        (t0, t1) = (t1, t0 - qt * t1);
    }
    debug_assert_eq!(r0, 1);
    t0.rem_euclid(p as i128) as u64
}

/// Legendre symbol `(a | p)` for odd prime `p` via quadratic reciprocity.
fn legendre(a: u64, p: u64) -> i8 {
    let (mut a, mut n) = (a % p, p);
    let mut sign = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                sign = -sign;
            }
        }
        (a, n) = (n, a);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

fn smallest_irreducible(base: &FieldSpec, degree: usize) -> Vec<FieldElement> {
    let p = base.p();
    let count = p.pow(degree as u32);
    (0..count)
        .map(|code| {
            let mut c = code;
            let mut poly: Vec<FieldElement> = (0..degree)
                .map(|_| {
                    let d = c % p;
                    c /= p;
                    FieldElement(d)
                })
                .collect();
            poly.push(base.one());
            poly
        })
        .find(|m| poly::is_irreducible(base, m))
        .expect("irreducible polynomials exist in every degree")
}

fn smallest_generator(f: &FieldSpec) -> FieldElement {
    let n = f.q() - 1;
    let primes: Vec<u64> = arith::factorize(n).into_iter().map(|(r, _)| r).collect();
    f.nonzero_elements()
        .find(|&g| primes.iter().all(|&r| f.pow_u(g, n / r) != f.one()))
        .expect("F_q* is cyclic")
}

fn build_log_tables(f: &FieldSpec) -> LogTables {
    let g = smallest_generator(f);
    let n = (f.q() - 1) as usize;
    let mut log = vec![0u32; f.q() as usize];
    let mut exp = vec![0u32; 2 * n];
    let mut x = f.one();
    for i in 0..n {
        exp[i] = x.0 as u32;
        log[x.0 as usize] = i as u32;
        x = f.mul(x, g);
    }
    for i in n..2 * n {
        exp[i] = exp[i - n];
    }
    LogTables { log, exp }
}
