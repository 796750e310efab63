//! Integer helpers: primality, prime powers, divisors, integer roots.
//!
//! Everything here works on `u64` with `u128` intermediates, which covers
//! every field order the crate accepts (q < 2^63).

/// Witness set that makes Miller–Rabin deterministic for all n < 2^64.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, n: u64) -> u64 {
    let mut acc = 1 % n;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin primality test, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Splits `q` as `p^h` with `p` prime, or returns `None`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = smallest_prime_factor(q);
    let mut rest = q;
    let mut h = 0;
    while rest % p == 0 {
        rest /= p;
        h += 1;
    }
    (rest == 1).then_some((p, h))
}

fn smallest_prime_factor(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    if is_prime(n) {
        return n;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 2;
    }
    n
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs in
/// increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
        if n > 1 && is_prime(n) {
            break;
        }
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// All positive divisors of `n`, sorted.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factorize(n) {
        let len = divs.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Floor of the square root.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = ((n as f64).sqrt() as u128).min(u64::MAX as u128);
    while x * x > n {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|s| s <= n) {
        x += 1;
    }
    x
}

/// Smallest prime `q >= from` with `q ≡ residue (mod modulus)`.
pub fn next_prime_congruent(from: u64, residue: u64, modulus: u64) -> Option<u64> {
    let mut q = from;
    let r = residue % modulus;
    while q % modulus != r {
        q = q.checked_add(1)?;
    }
    loop {
        if is_prime(q) {
            return Some(q);
        }
        q = q.checked_add(modulus)?;
    }
}

/// Checked `base^exp` in `u128`.
pub fn checked_pow_u128(base: u64, exp: u32) -> Option<u128> {
    (base as u128).checked_pow(exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_prime(n: u64) -> bool {
        n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn miller_rabin_matches_trial_division() {
        for n in 0..20_000 {
            assert_eq!(is_prime(n), trial_prime(n), "n = {n}");
        }
        // strong pseudoprimes to several small bases
        for n in [3_215_031_751u64, 2_152_302_898_747, 3_474_749_660_383, 341_550_071_728_321] {
            assert!(!is_prime(n));
        }
        assert!(is_prime(93_811));
        assert!(is_prime(1_000_003));
        assert!(is_prime((1 << 61) - 1));
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(49), Some((7, 2)));
        assert_eq!(prime_power(343), Some((7, 3)));
        assert_eq!(prime_power(31), Some((31, 1)));
        assert_eq!(prime_power(45), None);
        assert_eq!(prime_power(1), None);
        assert_eq!(prime_power(1024), Some((2, 10)));
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(30), vec![1, 2, 3, 5, 6, 10, 15, 30]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(70), vec![1, 2, 5, 7, 10, 14, 35, 70]);
        for n in 1..500u64 {
            let brute: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
            assert_eq!(divisors(n), brute);
        }
    }

    #[test]
    fn congruent_prime_search() {
        assert_eq!(next_prime_congruent(93_790, 1, 5), Some(93_811));
        assert_eq!(isqrt(93_811), 306);
        assert_eq!(isqrt(u64::MAX as u128 * u64::MAX as u128), u64::MAX as u128);
    }
}
