use super::{poly, FieldElement, FieldError, FieldSpec};

/// Element of `F_{q^e}` as its coordinate vector over `F_q` in the basis
/// `1, β, …, β^(e-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtElement(Vec<FieldElement>);

impl ExtElement {
    pub fn coords(&self) -> &[FieldElement] {
        &self.0
    }
}

/// `F_{q^e} = F_q[β]/(μ)`, with `μ` the monic irreducible of degree `e` over
/// `F_q` of smallest code `Σ c_i q^i`.
#[derive(Debug, Clone)]
pub struct ExtensionField {
    base: FieldSpec,
    degree: u32,
    modulus: Vec<FieldElement>,
    order: u64,
}

impl ExtensionField {
    pub fn new(base: FieldSpec, degree: u32) -> Result<Self, FieldError> {
        if degree == 0 {
            return Err(FieldError::BadDegree);
        }
        let order = (base.q() as u128)
            .checked_pow(degree)
            .filter(|&o| o < super::MAX_ORDER as u128)
            .ok_or(FieldError::OrderTooLarge)? as u64;
        let modulus = if degree == 1 {
            vec![base.zero(), base.one()]
        } else {
            smallest_irreducible_over(&base, degree as usize)
        };
        Ok(ExtensionField { base, degree, modulus, order })
    }

    pub fn base(&self) -> &FieldSpec {
        &self.base
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// `q^e`.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// Monic defining polynomial over the base field, little-endian codes.
    pub fn modulus(&self) -> Vec<u64> {
        self.modulus.iter().map(|c| c.code()).collect()
    }

    pub fn from_coords(&self, coords: &[FieldElement]) -> Result<ExtElement, FieldError> {
        if coords.len() != self.degree as usize || coords.iter().any(|c| c.code() >= self.base.q()) {
            return Err(FieldError::BadModulus(coords.iter().map(|c| c.code()).collect()));
        }
        Ok(ExtElement(coords.to_vec()))
    }

    pub fn coords(&self, a: &ExtElement) -> Vec<FieldElement> {
        a.0.clone()
    }

    /// `F_q` sits inside as `(a, 0, …, 0)`.
    pub fn embed(&self, a: FieldElement) -> ExtElement {
        let mut v = vec![self.base.zero(); self.degree as usize];
        v[0] = a;
        ExtElement(v)
    }

    /// Element whose coordinates are the base-`q` digits of `code`.
    pub fn element(&self, code: u64) -> Result<ExtElement, FieldError> {
        if code >= self.order {
            return Err(FieldError::CodeOutOfRange { code, q: self.order });
        }
        let q = self.base.q();
        let mut c = code;
        Ok(ExtElement(
            (0..self.degree)
                .map(|_| {
                    let d = c % q;
                    c /= q;
                    self.base.el(d)
                })
                .collect(),
        ))
    }

    pub fn code(&self, a: &ExtElement) -> u64 {
        a.0.iter().rev().fold(0, |acc, c| acc * self.base.q() + c.code())
    }

    pub fn elements(&self) -> impl Iterator<Item = ExtElement> + '_ {
        (0..self.order).map(|c| self.element(c).expect("in range"))
    }

    pub fn add(&self, a: &ExtElement, b: &ExtElement) -> ExtElement {
        ExtElement(a.0.iter().zip(&b.0).map(|(&x, &y)| self.base.add(x, y)).collect())
    }

    pub fn mul(&self, a: &ExtElement, b: &ExtElement) -> ExtElement {
        let prod = poly::mulmod(&self.base, &a.0, &b.0, &self.modulus);
        self.pad(prod)
    }

    pub fn square(&self, a: &ExtElement) -> ExtElement {
        self.mul(a, a)
    }

    pub fn pow_u(&self, a: &ExtElement, n: u64) -> ExtElement {
        self.pad(poly::powmod(&self.base, &a.0, n, &self.modulus))
    }

    fn pad(&self, mut v: Vec<FieldElement>) -> ExtElement {
        v.resize(self.degree as usize, self.base.zero());
        ExtElement(v)
    }
}

fn smallest_irreducible_over(base: &FieldSpec, degree: usize) -> Vec<FieldElement> {
    let q = base.q();
    let mut code = 0u64;
    loop {
        let mut c = code;
        let mut m: Vec<FieldElement> = (0..degree)
            .map(|_| {
                let d = c % q;
                c /= q;
                base.el(d)
            })
            .collect();
        m.push(base.one());
        if poly::is_irreducible(base, &m) {
            return m;
        }
        code += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_one_is_identity() {
        let f7 = FieldSpec::prime(7).unwrap();
        let e = f7.extension(1).unwrap();
        assert_eq!(e.order(), 7);
        for a in f7.elements() {
            let x = e.embed(a);
            assert_eq!(e.coords(&x), vec![a]);
            assert_eq!(e.code(&x), a.code());
            for b in f7.elements() {
                assert_eq!(e.mul(&x, &e.embed(b)).coords()[0], f7.mul(a, b));
            }
        }
    }

    #[test]
    fn cubic_extension_of_f7_round_trips() {
        let f7 = FieldSpec::prime(7).unwrap();
        let e = f7.extension(3).unwrap();
        assert_eq!(e.order(), 343);
        let mut seen = std::collections::HashSet::new();
        for x in e.elements() {
            let back = e.from_coords(&e.coords(&x)).unwrap();
            assert_eq!(back, x);
            assert!(seen.insert(e.code(&x)));
        }
        assert_eq!(seen.len(), 343);
        // the multiplicative group has order 342: every nonzero x has x^342 = 1
        let one = e.embed(f7.one());
        for x in e.elements().skip(1) {
            assert_eq!(e.pow_u(&x, 342), one);
        }
    }

    #[test]
    fn tower_over_nonprime_base() {
        let f9 = FieldSpec::new(3, 2, None).unwrap();
        let e = f9.extension(2).unwrap();
        assert_eq!(e.order(), 81);
        let one = e.embed(f9.one());
        // x^80 = 1 and x^81 = x throughout
        for x in e.elements().skip(1) {
            assert_eq!(e.pow_u(&x, 80), one);
        }
        // the tower agrees with F_9 on embedded elements
        for a in f9.elements() {
            for b in f9.elements() {
                assert_eq!(e.mul(&e.embed(a), &e.embed(b)), e.embed(f9.mul(a, b)));
            }
        }
    }
}
