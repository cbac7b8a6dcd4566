//! Modular arithmetic over machine words, plus arbitrary-precision helpers.
//!
//! Residue computations run on `u64` with `u128` intermediates; prime contexts
//! keep `p < 2^31` so arithmetic modulo `p^2` never overflows. Arbitrary
//! precision (`WideInt`) enters only where ideal powers `p^h` outgrow machine
//! words: Hensel lifts and lattice reduction in the quadratic field layer.

use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision signed integer for ideal powers and Hensel lifts.
pub type WideInt = BigInt;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ArithError {
    #[error("{0} is not an odd prime below 2^31")]
    NotOddPrime(u64),
    #[error("{0} has no inverse modulo {1}")]
    NonInvertible(u64, u64),
    #[error("{0} is not a quadratic residue modulo {1}")]
    NonResidue(u64, u64),
    #[error("seed {seed} does not square to {a} modulo {p}")]
    BadSeed { a: i64, seed: u64, p: u64 },
    #[error("target modulus is not a positive power of {0}")]
    BadTarget(u64),
}

/// Working context for a fixed odd prime `p < 2^31`.
///
/// Construction performs a deterministic primality check, so downstream code
/// can rely on `p` being an odd prime without re-testing.
#[derive(Debug, Clone)]
pub struct PrimeCtx {
    p: u64,
    p2: u64,
    inverses: Option<Vec<u64>>,
}

impl PrimeCtx {
    pub fn new(p: u64) -> Result<Self, ArithError> {
        if p <= 2 || p >= (1 << 31) || !is_prime(p) {
            return Err(ArithError::NotOddPrime(p));
        }
        Ok(PrimeCtx {
            p,
            p2: p * p,
            inverses: None,
        })
    }

    /// Like [`PrimeCtx::new`] but precomputes the inverse table for `1..p`,
    /// worth it when many small inverses are needed (Bernoulli recurrences).
    pub fn with_inverse_table(p: u64) -> Result<Self, ArithError> {
        let mut ctx = Self::new(p)?;
        let mut inv = vec![0u64; p as usize];
        inv[1] = 1;
        for a in 2..p as usize {
            // p = q*a + r  =>  a^{-1} = -q * r^{-1} mod p
            let q = p / a as u64;
            let r = (p % a as u64) as usize;
            inv[a] = mulmod(p - q % p, inv[r], p);
        }
        ctx.inverses = Some(inv);
        Ok(ctx)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `p^2`, the modulus for the Artin condition.
    pub fn p2(&self) -> u64 {
        self.p2
    }

    /// Inverse modulo `p`, served from the table when one was built.
    pub fn inv(&self, a: u64) -> Result<u64, ArithError> {
        let a = a % self.p;
        match &self.inverses {
            Some(table) if a != 0 => Ok(table[a as usize]),
            _ => invmod(a, self.p),
        }
    }
}

/// Deterministic Miller-Rabin; the fixed witness set is exact for all `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for q in WITNESSES {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in WITNESSES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `(a * b) mod m` without overflow.
#[inline]
pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `base^exp mod m` by binary exponentiation; `powmod(_, 0, m) = 1 % m`.
pub fn powmod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    let mut base = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, or `NonInvertible` when `gcd(a, m) > 1`.
pub fn invmod(a: u64, m: u64) -> Result<u64, ArithError> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return Err(ArithError::NonInvertible(a, m));
    }
    Ok(t0.rem_euclid(m as i128) as u64)
}

/// Kronecker symbol `(a|n)` on its full domain, including `n <= 0`.
pub fn kronecker(a: i64, n: i64) -> i32 {
    let (mut a, mut n) = (a as i128, n as i128);
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    // peel off the even part of n; (a|2) depends on a mod 8
    let mut v = 0u32;
    while n % 2 == 0 {
        n /= 2;
        v += 1;
    }
    let mut k: i32 = if v % 2 == 0 {
        1
    } else {
        match a.rem_euclid(8) {
            1 | 7 => 1,
            _ => -1,
        }
    };
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -k;
        }
    }
    // n now positive odd; standard reciprocity loop
    loop {
        a = a.rem_euclid(n);
        if a == 0 {
            return if n == 1 { k } else { 0 };
        }
        v = 0;
        while a % 2 == 0 {
            a /= 2;
            v += 1;
        }
        if v % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            k = -k;
        }
        if a % 4 == 3 && n % 4 == 3 {
            k = -k;
        }
        std::mem::swap(&mut a, &mut n);
    }
}

/// Square root of `a` modulo `p` by Tonelli-Shanks.
///
/// Returns the root in `[0, p/2]`; the other root is `p - r`. Errors with
/// `NonResidue` when `a` is a quadratic non-residue.
pub fn sqrt_mod_p(a: u64, ctx: &PrimeCtx) -> Result<u64, ArithError> {
    let p = ctx.p();
    let a = a % p;
    if a == 0 {
        return Ok(0);
    }
    if powmod(a, (p - 1) / 2, p) != 1 {
        return Err(ArithError::NonResidue(a, p));
    }
    let r = if p % 4 == 3 {
        powmod(a, (p + 1) / 4, p)
    } else {
        tonelli_shanks(a, p)
    };
    Ok(r.min(p - r))
}

fn tonelli_shanks(a: u64, p: u64) -> u64 {
    // p = q * 2^s + 1 with q odd
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    // smallest non-residue as the generator seed; deterministic
    let z = (2..p)
        .find(|&z| powmod(z, (p - 1) / 2, p) == p - 1)
        .expect("odd prime has a non-residue");
    let mut m = s;
    let mut c = powmod(z, q, p);
    let mut t = powmod(a, q, p);
    let mut r = powmod(a, (q + 1) / 2, p);
    while t != 1 {
        let i = (1..m)
            .scan(t, |acc, i| {
                *acc = mulmod(*acc, *acc, p);
                Some((i, *acc))
            })
            .find(|&(_, v)| v == 1)
            .map(|(i, _)| i)
            .expect("order of t divides 2^(m-1)");
        let b = powmod(c, 1 << (m - i - 1), p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    r
}

/// Hensel lift: the unique root `r = r0 (mod p)` of `r^2 = a` modulo
/// `target = p^e`, by Newton iteration with doubling precision.
///
/// `a` may be negative; `target` must be a positive power of `p`.
pub fn hensel_sqrt(a: i64, r0: u64, ctx: &PrimeCtx, target: &WideInt) -> Result<WideInt, ArithError> {
    let p = ctx.p();
    let big_p = WideInt::from(p);
    let mut e = 0u32;
    let mut t = target.clone();
    while t > WideInt::one() {
        let (q, r) = t.div_rem(&big_p);
        if !r.is_zero() {
            return Err(ArithError::BadTarget(p));
        }
        t = q;
        e += 1;
    }
    if e == 0 || !t.is_one() {
        return Err(ArithError::BadTarget(p));
    }
    let a_mod_p = (a.rem_euclid(p as i64)) as u64;
    let r0 = r0 % p;
    if mulmod(r0, r0, p) != a_mod_p {
        return Err(ArithError::BadSeed { a, seed: r0, p });
    }
    let a_big = WideInt::from(a);
    let mut r = WideInt::from(r0);
    let mut k = 1u32;
    while k < e {
        let k2 = (2 * k).min(e);
        let modulus = big_p.pow(k2);
        let inv = wide_invmod(&(&r * 2), &modulus).expect("2r is a unit mod p^k");
        let delta = (&r * &r - &a_big) * inv;
        r = (r - delta).mod_floor(&modulus);
        k = k2;
    }
    Ok(r)
}

/// Inverse of `a` modulo `m > 0`, when `gcd(a, m) = 1`.
pub fn wide_invmod(a: &WideInt, m: &WideInt) -> Option<WideInt> {
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (WideInt::zero(), WideInt::one());
    while !r1.is_zero() {
        let (q, r2) = r0.div_rem(&r1);
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    r0.is_one().then(|| t0.mod_floor(m))
}

/// Euclidean division on `WideInt`: `a = q*b + r` with `0 <= r < |b|`.
pub fn divrem(a: &WideInt, b: &WideInt) -> (WideInt, WideInt) {
    let (mut q, mut r) = a.div_rem(b);
    if r.is_negative() {
        if b.is_positive() {
            q -= 1;
            r += b;
        } else {
            q += 1;
            r -= b;
        }
    }
    (q, r)
}
