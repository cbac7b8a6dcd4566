//! The very-regular decision procedure.
//!
//! A split odd prime `p` of the imaginary quadratic field with fundamental
//! discriminant `d < 0` is *very regular* when all three hold:
//!
//! 1. `p` is regular: `p` divides no `B_{2n}` for `2n <= p - 3`;
//! 2. `p` divides no `L(chi_d, -2n)` for `2n <= p - 3`;
//! 3. the Artin condition: for `P` a prime above `p` and `h` the class
//!    number, the generator `alpha` of `P^h` projects onto a generator of
//!    `(1 + conj(P)) / (1 + conj(P)^2)`; numerically, `U^{p-1} != 1 (mod p^2)`
//!    where `U` is the unit entry of the residue pair of `alpha`.
//!
//! All three conditions are always evaluated, never short-circuited, so a
//! report carries the complete witness data for the survey tables.

use crate::arith::{kronecker, powmod, ArithError, PrimeCtx};
use crate::bernoulli::{
    is_regular, BernoulliError, BernoulliTable, QuadChar,
};
use crate::quadfield::{
    canonical_root_mod_p2, class_number, generator_of_ideal_power, prime_above,
    residue_pair_with_root, FieldError, FundamentalDiscriminant,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum VrError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Bernoulli(#[from] BernoulliError),
    #[error("residue pair of the generator has {0} unit entries, expected exactly one")]
    ResidueUnits(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    VeryRegular,
    NotVeryRegular,
    /// `p` is inert or ramified; the notion does not apply.
    NotApplicable,
}

/// Full outcome of the decision procedure for one pair `(d, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VRReport {
    pub d: i64,
    pub p: u64,
    pub split: bool,
    /// odd `2n - 1` with `p | zeta(1 - 2n)`
    pub zeta_witnesses: Vec<u64>,
    /// even `2n` with `p | L(chi_d, -2n)`
    pub l_witnesses: Vec<u64>,
    /// `None` exactly when `p` does not split
    pub artin_ok: Option<bool>,
    pub verdict: Verdict,
}

impl VRReport {
    /// Table-cell rendering: empty for inert/ramified, a tick when very
    /// regular, otherwise all witnesses ascending joined by "," with an
    /// appended cross when the unit-residue test fails.
    pub fn cell(&self) -> String {
        if !self.split {
            return String::new();
        }
        if self.verdict == Verdict::VeryRegular {
            return "\u{2713}".into();
        }
        let mut w: Vec<u64> = self
            .zeta_witnesses
            .iter()
            .chain(&self.l_witnesses)
            .copied()
            .collect();
        w.sort_unstable();
        let joined = w
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        match (self.artin_ok, joined.is_empty()) {
            (Some(false), true) => "\u{2717}".into(),
            (Some(false), false) => format!("{joined}, \u{2717}"),
            _ => joined,
        }
    }
}

/// Per-prime evaluation engine: the Bernoulli table and the regularity
/// verdict depend only on `p` and are shared across all discriminants.
pub struct Evaluator {
    ctx: PrimeCtx,
    table: BernoulliTable,
    regular: (bool, Vec<u64>),
}

impl Evaluator {
    pub fn new(p: u64) -> Result<Evaluator, VrError> {
        Ok(Self::from_ctx(PrimeCtx::with_inverse_table(p)?))
    }

    pub fn from_ctx(ctx: PrimeCtx) -> Evaluator {
        let table = BernoulliTable::new(&ctx);
        let regular = is_regular(&ctx, &table);
        Evaluator {
            ctx,
            table,
            regular,
        }
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    pub fn ctx(&self) -> &PrimeCtx {
        &self.ctx
    }

    pub fn report(&self, d: FundamentalDiscriminant) -> Result<VRReport, VrError> {
        self.report_with_class_number(d).map(|(report, _)| report)
    }

    /// Report plus the class number, which the Artin condition needs anyway.
    pub fn report_with_class_number(
        &self,
        d: FundamentalDiscriminant,
    ) -> Result<(VRReport, u64), VrError> {
        let h = class_number(d);
        self.report_given_class_number(d, h).map(|report| (report, h))
    }

    /// Variant for range sweeps that already hold the class number (say from
    /// [`crate::quadfield::class_number_table`]); `h` must equal `h(d)`.
    pub fn report_given_class_number(
        &self,
        d: FundamentalDiscriminant,
        h: u64,
    ) -> Result<VRReport, VrError> {
        let p = self.ctx.p();
        if kronecker(d.get(), p as i64) != 1 {
            return Ok(VRReport {
                d: d.get(),
                p,
                split: false,
                zeta_witnesses: Vec::new(),
                l_witnesses: Vec::new(),
                artin_ok: None,
                verdict: Verdict::NotApplicable,
            });
        }
        let (regular, zeta_witnesses) = (self.regular.0, self.regular.1.clone());
        // p = 3 admits no even 2n <= p - 3, so skip the O(|d|) character table
        let (l_ok, l_witnesses) = if p >= 5 {
            let chi = QuadChar::new(d);
            l_condition_with(&chi, &self.ctx, &self.table)?
        } else {
            (true, Vec::new())
        };
        let artin = artin_condition_with_h(d, h, &self.ctx)?;
        let verdict = if regular && l_ok && artin {
            Verdict::VeryRegular
        } else {
            Verdict::NotVeryRegular
        };
        Ok(VRReport {
            d: d.get(),
            p,
            split: true,
            zeta_witnesses,
            l_witnesses,
            artin_ok: Some(artin),
            verdict,
        })
    }
}

fn l_condition_with(
    chi: &QuadChar,
    ctx: &PrimeCtx,
    table: &BernoulliTable,
) -> Result<(bool, Vec<u64>), VrError> {
    crate::bernoulli::l_condition(chi, ctx, table).map_err(VrError::from)
}

/// The Artin condition for `(d, p)` with `p` split.
pub fn artin_condition(d: FundamentalDiscriminant, ctx: &PrimeCtx) -> Result<bool, VrError> {
    artin_condition_with_h(d, class_number(d), ctx)
}

fn artin_condition_with_h(
    d: FundamentalDiscriminant,
    h: u64,
    ctx: &PrimeCtx,
) -> Result<bool, VrError> {
    let root = canonical_root_mod_p2(d, ctx)?;
    artin_condition_given_root(d, h, ctx, root)
}

/// Root-explicit variant so callers can verify invariance under conjugation
/// (`root -> p^2 - root`).
pub fn artin_condition_given_root(
    d: FundamentalDiscriminant,
    h: u64,
    ctx: &PrimeCtx,
    root: u64,
) -> Result<bool, VrError> {
    // p never divides the unit group order: w = 6 needs p = 3, which is
    // ramified in Q(sqrt(-3)); w = 4 needs p = 2
    assert_eq!(
        num::integer::gcd(ctx.p(), d.roots_of_unity()),
        1,
        "p divides the number of roots of unity"
    );
    let ideal = prime_above(d, ctx)?;
    let alpha = generator_of_ideal_power(&ideal, h as u32, ctx)?;
    artin_condition_of_unit_residue(&alpha, ctx, root)
}

fn artin_condition_of_unit_residue(
    alpha: &crate::quadfield::QuadInt,
    ctx: &PrimeCtx,
    root: u64,
) -> Result<bool, VrError> {
    let pair = residue_pair_with_root(alpha, ctx, root)?;
    let p = ctx.p();
    let units: Vec<u64> = [pair.plus, pair.minus]
        .into_iter()
        .filter(|&u| u % p != 0)
        .collect();
    if units.len() != 1 {
        return Err(VrError::ResidueUnits(units.len()));
    }
    Ok(powmod(units[0], p - 1, ctx.p2()) != 1)
}

/// Multiply the generator by a unit before taking residues; the verdict must
/// not change. Exposed for the unit-independence checks.
pub fn artin_condition_with_unit(
    d: FundamentalDiscriminant,
    ctx: &PrimeCtx,
    unit: &crate::quadfield::QuadInt,
) -> Result<bool, VrError> {
    assert_eq!(unit.norm(), crate::arith::WideInt::from(1), "not a unit");
    let h = class_number(d);
    let root = canonical_root_mod_p2(d, ctx)?;
    let ideal = prime_above(d, ctx)?;
    let alpha = generator_of_ideal_power(&ideal, h as u32, ctx)?;
    let alpha = &alpha * unit;
    artin_condition_of_unit_residue(&alpha, ctx, root)
}

/// Independent route for `d = -4` via the Gaussian-integer shortcut: writing
/// `p = a^2 + b^2`, the condition reads `(4ab)^{p-1} != 1 (mod p^2)`.
pub fn artin_condition_gaussian(ctx: &PrimeCtx) -> Result<bool, VrError> {
    let p = ctx.p();
    if p % 4 != 1 {
        return Err(VrError::Field(FieldError::NotSplit(p, -4)));
    }
    let (a, b) = (1..)
        .take_while(|a| a * a * 2 <= p)
        .find_map(|a| {
            let b2 = p - a * a;
            let b = b2.isqrt();
            (b * b == b2).then_some((a, b))
        })
        .expect("split p is a sum of two squares");
    let u = (4 * a % ctx.p2()) * b % ctx.p2();
    Ok(powmod(u, p - 1, ctx.p2()) != 1)
}

/// Decision procedure for a single pair; builds the per-p tables on the fly.
/// Use [`Evaluator`] when sweeping many discriminants at one prime.
pub fn very_regular(d: FundamentalDiscriminant, ctx: &PrimeCtx) -> Result<VRReport, VrError> {
    Evaluator::from_ctx(ctx.clone()).report(d)
}

/// `|d|` for every fundamental discriminant with `|d| <= limit` at which `p`
/// is very regular, ascending.
pub fn list_very_regular_discriminants(p: u64, limit: u64) -> Result<Vec<u64>, VrError> {
    let engine = Evaluator::new(p)?;
    let mut out = Vec::new();
    for d in crate::quadfield::enumerate_fundamental(limit) {
        if engine.report(d)?.verdict == Verdict::VeryRegular {
            out.push(d.abs());
        }
    }
    Ok(out)
}
