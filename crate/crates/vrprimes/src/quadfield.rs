//! Arithmetic in imaginary quadratic fields `Q(sqrt(d))`, `d < 0` fundamental.
//!
//! Class numbers are counted over reduced binary quadratic forms `(a, b, c)`
//! of discriminant `d = b^2 - 4ac` with `|b| <= a <= c` and `b >= 0` whenever
//! `|b| = a` or `a = c`. Ideals follow the classical form correspondence:
//! `IdealRep { a, b }` is the lattice `aZ + ((-b + sqrt(d))/2)Z`, the primitive
//! ideal of norm `a` at which `sqrt(d) = b`. Generators of principal ideal
//! powers `P^h` come from Gauss-Lagrange reduction of the rank-2 lattice under
//! the norm form; the shortest vector has norm exactly `p^h` precisely when
//! the power is principal.

use crate::arith::{
    hensel_sqrt, invmod, kronecker, mulmod, sqrt_mod_p, ArithError, PrimeCtx, WideInt,
};
use num::{Integer, One, Signed, ToPrimitive, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum FieldError {
    #[error("{0} is not a negative fundamental discriminant")]
    NotFundamental(i64),
    #[error("{0} does not split in Q(sqrt({1}))")]
    NotSplit(u64, i64),
    #[error("ideal power is not principal")]
    NotPrincipal,
    #[error("coordinates violate the parity constraint x = y*d (mod 2)")]
    NotIntegral,
    #[error("{0} is not a square root of the discriminant modulo p^2")]
    InvalidRoot(u64),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// A fundamental discriminant `d < 0`: either `d = 1 (mod 4)` and squarefree,
/// or `d = 4m` with `m = 2, 3 (mod 4)` and squarefree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FundamentalDiscriminant(i64);

impl FundamentalDiscriminant {
    pub fn new(d: i64) -> Result<Self, FieldError> {
        if d >= 0 {
            return Err(FieldError::NotFundamental(d));
        }
        let ok = match d.rem_euclid(4) {
            1 => squarefree(d.unsigned_abs()),
            0 => {
                let m = d / 4;
                matches!(m.rem_euclid(4), 2 | 3) && squarefree(m.unsigned_abs())
            }
            _ => false,
        };
        if ok {
            Ok(FundamentalDiscriminant(d))
        } else {
            Err(FieldError::NotFundamental(d))
        }
    }

    pub fn get(&self) -> i64 {
        self.0
    }

    /// `|d|`, which is also the conductor of the attached quadratic character.
    pub fn abs(&self) -> u64 {
        self.0.unsigned_abs()
    }

    /// Number of roots of unity in the maximal order: 6, 4, or 2.
    pub fn roots_of_unity(&self) -> u64 {
        match self.0 {
            -3 => 6,
            -4 => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for FundamentalDiscriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn squarefree(mut n: u64) -> bool {
    if n % 4 == 0 {
        return false;
    }
    if n % 2 == 0 {
        n /= 2;
    }
    let mut f = 3;
    while f * f <= n {
        if n % f == 0 {
            n /= f;
            if n % f == 0 {
                return false;
            }
        }
        f += 2;
    }
    true
}

/// All fundamental discriminants with `|d| <= limit`, ascending in `|d|`.
pub fn enumerate_fundamental(limit: u64) -> Vec<FundamentalDiscriminant> {
    (3..=limit)
        .filter_map(|n| FundamentalDiscriminant::new(-(n as i64)).ok())
        .collect()
}

/// Class number by counting reduced forms; exact for any fundamental `d < 0`.
pub fn class_number(d: FundamentalDiscriminant) -> u64 {
    let abs = d.abs();
    let mut h = 0;
    let mut b = abs % 2;
    while 3 * b * b <= abs {
        let m = (b * b + abs) / 4;
        for a in b.max(1)..=m.isqrt() {
            if m % a == 0 {
                let c = m / a;
                h += if b == 0 || b == a || a == c { 1 } else { 2 };
            }
        }
        b += 2;
    }
    h
}

/// Class numbers for every `|d| <= limit` at once, indexed by `|d|`.
///
/// One pass over all reduced forms `(a, b, c)` with `|b| <= a <= c` and
/// `4ac - b^2 <= limit` increments the bucket of its discriminant, so the
/// whole table costs `O(limit^1.5)` where per-discriminant counting would
/// be quadratic over a range.  Entries are meaningful only at fundamental
/// indices; elsewhere the bucket counts imprimitive forms too.
pub fn class_number_table(limit: u64) -> Vec<u64> {
    let mut h = vec![0u64; limit as usize + 1];
    let mut a = 1;
    while 3 * a * a <= limit {
        for b in 0..=a {
            // c >= a forces 4ac - b^2 >= 3a^2 > 0, so every form here is
            // positive definite without a separate check.
            let max_c = (limit + b * b) / (4 * a);
            for c in a..=max_c {
                let disc = 4 * a * c - b * b;
                h[disc as usize] += if b == 0 || b == a || a == c { 1 } else { 2 };
            }
        }
        a += 1;
    }
    h
}

/// Primitive ideal of norm `a`: the lattice `aZ + ((-b + sqrt(d))/2)Z`.
///
/// `b` satisfies `b^2 = d (mod 4a)` and is normalized to `0 < |b| < a` for the
/// prime ideals built here; conjugation flips its sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdealRep {
    pub a: u64,
    pub b: i64,
    pub d: i64,
}

impl IdealRep {
    pub fn norm(&self) -> u64 {
        self.a
    }

    pub fn conj(&self) -> IdealRep {
        IdealRep {
            a: self.a,
            b: -self.b,
            d: self.d,
        }
    }
}

/// The prime ideal above a split `p`, with `b` the smaller of the two
/// parity-correct square roots of `d` modulo `4p`.
pub fn prime_above(d: FundamentalDiscriminant, ctx: &PrimeCtx) -> Result<IdealRep, FieldError> {
    let p = ctx.p();
    if kronecker(d.get(), p as i64) != 1 {
        return Err(FieldError::NotSplit(p, d.get()));
    }
    let r = sqrt_mod_p(d.get().rem_euclid(p as i64) as u64, ctx)?;
    let parity = d.abs() % 2;
    let b = [r, p - r, p + r, 2 * p - r]
        .into_iter()
        .filter(|&b| b % 2 == parity)
        .min()
        .expect("one candidate per parity class");
    debug_assert!(0 < b && b < p);
    debug_assert_eq!(
        ((b * b) % (4 * p)) as i64,
        d.get().rem_euclid(4 * p as i64),
        "b^2 = d (mod 4p)"
    );
    Ok(IdealRep {
        a: p,
        b: b as i64,
        d: d.get(),
    })
}

/// Element `(x + y*sqrt(d))/2` of the maximal order; `x = y*d (mod 2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadInt {
    x: WideInt,
    y: WideInt,
    d: i64,
}

impl QuadInt {
    pub fn new(x: WideInt, y: WideInt, d: i64) -> Result<Self, FieldError> {
        if (&x - &y * d).is_odd() {
            return Err(FieldError::NotIntegral);
        }
        Ok(QuadInt { x, y, d })
    }

    pub fn from_xy(x: i64, y: i64, d: i64) -> Result<Self, FieldError> {
        Self::new(WideInt::from(x), WideInt::from(y), d)
    }

    /// The rational integer `n` as an element.
    pub fn from_int(n: i64, d: i64) -> Self {
        QuadInt {
            x: WideInt::from(2 * n),
            y: WideInt::zero(),
            d,
        }
    }

    pub fn x(&self) -> &WideInt {
        &self.x
    }

    pub fn y(&self) -> &WideInt {
        &self.y
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    /// `(x^2 - d*y^2)/4`, always a non-negative integer for `d < 0`.
    pub fn norm(&self) -> WideInt {
        let four_n = &self.x * &self.x - WideInt::from(self.d) * &self.y * &self.y;
        debug_assert!(four_n.mod_floor(&WideInt::from(4)).is_zero());
        four_n / 4
    }

    pub fn conj(&self) -> QuadInt {
        QuadInt {
            x: self.x.clone(),
            y: -self.y.clone(),
            d: self.d,
        }
    }
}

impl std::ops::Add<&QuadInt> for &QuadInt {
    type Output = QuadInt;
    fn add(self, rhs: &QuadInt) -> QuadInt {
        assert_eq!(self.d, rhs.d);
        QuadInt {
            x: &self.x + &rhs.x,
            y: &self.y + &rhs.y,
            d: self.d,
        }
    }
}

impl std::ops::Mul<&QuadInt> for &QuadInt {
    type Output = QuadInt;
    fn mul(self, rhs: &QuadInt) -> QuadInt {
        assert_eq!(self.d, rhs.d);
        // ((x1 + y1 s)/2)((x2 + y2 s)/2) = (X + Y s)/2 with s = sqrt(d)
        let two_x = &self.x * &rhs.x + WideInt::from(self.d) * &self.y * &rhs.y;
        let two_y = &self.x * &rhs.y + &rhs.x * &self.y;
        debug_assert!(two_x.is_even() && two_y.is_even());
        QuadInt {
            x: two_x / 2,
            y: two_y / 2,
            d: self.d,
        }
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}*sqrt({}))/2", self.x, self.y, self.d)
    }
}

/// Round-to-nearest quotient `t/q` for `q > 0`; ties round up.
fn round_div(t: &WideInt, q: &WideInt) -> WideInt {
    (t + t + q).div_floor(&(q + q))
}

/// Gauss-Lagrange reduction of a rank-2 lattice under `x^2 + |d| y^2`;
/// returns a shortest nonzero vector.
fn gauss_reduce(
    mut u: (WideInt, WideInt),
    mut v: (WideInt, WideInt),
    absd: &WideInt,
) -> (WideInt, WideInt) {
    let quad = |w: &(WideInt, WideInt)| &w.0 * &w.0 + absd * &w.1 * &w.1;
    if quad(&u) < quad(&v) {
        std::mem::swap(&mut u, &mut v);
    }
    loop {
        let qv = quad(&v);
        let dot = &u.0 * &v.0 + absd * &u.1 * &v.1;
        let m = round_div(&dot, &qv);
        u = (u.0 - &m * &v.0, u.1 - &m * &v.1);
        if quad(&u) >= qv {
            return v;
        }
        std::mem::swap(&mut u, &mut v);
    }
}

/// Generator of `P^h` for the prime ideal `P = ideal`, when principal.
///
/// The representative `b` is Hensel-lifted to `B` with `B^2 = d (mod 4p^h)`,
/// and the lattice `p^h Z + ((-B + sqrt(d))/2) Z` is reduced; the shortest
/// vector generates iff its norm is exactly `p^h`. Output is deterministic,
/// sign-normalized so that `x > 0`, or `y > 0` when `x = 0`.
pub fn generator_of_ideal_power(
    ideal: &IdealRep,
    h: u32,
    ctx: &PrimeCtx,
) -> Result<QuadInt, FieldError> {
    let d = ideal.d;
    let p = ctx.p();
    debug_assert_eq!(ideal.a, p);
    if h == 0 {
        return Ok(QuadInt::from_int(1, d));
    }
    let ph = WideInt::from(p).pow(h);
    let seed = ideal.b.rem_euclid(p as i64) as u64;
    let rho = hensel_sqrt(d, seed, ctx, &ph)?;
    // B = d (mod 2) makes (-B + sqrt(d))/2 integral and B^2 = d (mod 4p^h)
    let big_b = if rho.is_even() == (d % 2 == 0) {
        rho
    } else {
        &rho + &ph
    };
    let absd = WideInt::from(d.unsigned_abs());
    let u = (&ph * 2, WideInt::zero());
    let v = (-big_b, WideInt::one());
    let (x, y) = gauss_reduce(u, v, &absd);
    let min_quad = &x * &x + &absd * &y * &y;
    if min_quad != &ph * 4 {
        return Err(FieldError::NotPrincipal);
    }
    let (x, y) = if x.is_negative() || (x.is_zero() && y.is_negative()) {
        (-x, -y)
    } else {
        (x, y)
    };
    let alpha = QuadInt::new(x, y, d).expect("lattice vectors satisfy the parity constraint");
    debug_assert_eq!(alpha.norm(), ph);
    Ok(alpha)
}

/// Images of `alpha` under the two embeddings into `Z/p^2` (`sqrt(d) -> +-r`).
///
/// Neither slot is tied to a particular prime above `p`; the decision
/// procedure only consumes the pair as an unordered set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResiduePair {
    pub plus: u64,
    pub minus: u64,
}

/// The canonical square root of `d` modulo `p^2`: the Hensel lift of the
/// normalized root returned by `sqrt_mod_p`.
pub fn canonical_root_mod_p2(d: FundamentalDiscriminant, ctx: &PrimeCtx) -> Result<u64, FieldError> {
    let p = ctx.p();
    if kronecker(d.get(), p as i64) != 1 {
        return Err(FieldError::NotSplit(p, d.get()));
    }
    let r0 = sqrt_mod_p(d.get().rem_euclid(p as i64) as u64, ctx)?;
    let r = hensel_sqrt(d.get(), r0, ctx, &WideInt::from(ctx.p2()))?;
    Ok(r.to_u64().expect("root fits: p^2 < 2^62"))
}

pub fn residue_pair(alpha: &QuadInt, ctx: &PrimeCtx) -> Result<ResiduePair, FieldError> {
    let d = FundamentalDiscriminant::new(alpha.d())?;
    let r = canonical_root_mod_p2(d, ctx)?;
    residue_pair_with_root(alpha, ctx, r)
}

/// Same as [`residue_pair`] but with an explicit root of `d` modulo `p^2`,
/// letting callers check invariance under the `r -> -r` swap.
pub fn residue_pair_with_root(
    alpha: &QuadInt,
    ctx: &PrimeCtx,
    r: u64,
) -> Result<ResiduePair, FieldError> {
    let p2 = ctx.p2();
    if mulmod(r, r, p2) != alpha.d().rem_euclid(p2 as i64) as u64 {
        return Err(FieldError::InvalidRoot(r));
    }
    let inv2 = invmod(2, p2)?;
    let big_p2 = WideInt::from(p2);
    let x = alpha.x().mod_floor(&big_p2).to_u64().unwrap();
    let y = alpha.y().mod_floor(&big_p2).to_u64().unwrap();
    let eval = |root: u64| mulmod((x + mulmod(y, root, p2)) % p2, inv2, p2);
    Ok(ResiduePair {
        plus: eval(r),
        minus: eval(p2 - r),
    })
}
