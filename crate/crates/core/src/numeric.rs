//! Numeric backends for probability computation.
//!
//! Every analytic quantity in this crate is a polynomial in the hash share
//! with huge integer path counts as coefficients, so it can be evaluated two
//! ways:
//!
//! * **exact rationals** ([`BigRational`]) — arbitrary-precision, used as
//!   ground truth in tests and available from the CLI via
//!   `--backend rational`;
//! * **compensated floats** (`f64`) — fast enough for large sweeps. Terms are
//!   evaluated in a scaled mantissa/exponent representation so that path
//!   counts beyond `f64` range and deeply underflowing powers still combine
//!   into the correct finite term, and series are accumulated with Neumaier
//!   compensation so summation order is immaterial to ~1 ulp.
//!
//! The [`Scalar`] trait abstracts the two so each formula is written once.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Excursions above 1 (or below 0) up to this size are attributed to float
/// round-off and clamped with a diagnostic; anything larger is a bug.
pub const FLOAT_UNIT_SLACK: f64 = 1e-12;

/// Arithmetic backend for probability formulas.
///
/// Implemented by `f64` (compensated floating point) and [`BigRational`]
/// (exact). All values handled through this trait are finite and, where the
/// context says "probability", lie in `[0, 1]` up to the backend's slack.
pub trait Scalar: Clone + PartialEq + PartialOrd + std::fmt::Debug {
    /// Whether arithmetic is exact. Exact backends get zero tolerance in the
    /// `[0, 1]` range check; the float backend is allowed round-off slack.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;

    /// `1 - self`.
    fn complement(&self) -> Self {
        Self::one().sub(self)
    }

    /// `self >= 1/2`, used to pick the certain-success branch of the
    /// unrestricted catch-up probability.
    fn at_least_half(&self) -> bool;

    /// `count * a^a_exp * b^b_exp`.
    ///
    /// The workhorse for series terms such as `a_{i,m} (1-I)^i I^{m+1+i}` and
    /// negative-binomial masses `C(k+Z,k) I^k (1-I)^{Z+1}`. Float
    /// implementations must stay correct when `count` exceeds `f64` range or
    /// the power factors underflow: the true product is always a probability
    /// contribution in `[0, 1]`.
    fn count_term(count: &BigUint, a: &Self, a_exp: u32, b: &Self, b_exp: u32) -> Self;

    /// `(num/den)^exp`, with `num <= den` guaranteed by callers so the result
    /// never exceeds 1.
    fn ratio_power(num: &Self, den: &Self, exp: u32) -> Self;

    /// Sum of a term stream; compensated on the float backend.
    fn sum(terms: impl Iterator<Item = Self>) -> Self;

    /// Lossy view for reporting. Exact for the float backend; correctly
    /// rounded to ~1 ulp for rationals of any magnitude.
    fn to_f64(&self) -> f64;

    /// Enforce the probability range policy and return the value.
    ///
    /// Exact backends must satisfy `0 <= v <= 1` identically. The float
    /// backend clamps excursions within [`FLOAT_UNIT_SLACK`] to the nearest
    /// bound with a `log` diagnostic; larger excursions are an internal
    /// consistency error.
    fn into_probability(self, context: &'static str) -> Result<Self>;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn at_least_half(&self) -> bool {
        *self >= 0.5
    }

    fn count_term(count: &BigUint, a: &Self, a_exp: u32, b: &Self, b_exp: u32) -> Self {
        ScaledFloat::from_biguint(count)
            .mul(ScaledFloat::from_f64(*a).powu(a_exp))
            .mul(ScaledFloat::from_f64(*b).powu(b_exp))
            .to_f64()
    }

    fn ratio_power(num: &Self, den: &Self, exp: u32) -> Self {
        // num/den <= 1, so repeated squaring cannot overflow; underflow to 0
        // is the correct limit.
        ScaledFloat::from_f64(num / den).powu(exp).to_f64()
    }

    fn sum(terms: impl Iterator<Item = Self>) -> Self {
        let mut acc = Neumaier::default();
        for t in terms {
            acc.add(t);
        }
        acc.value()
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn into_probability(self, context: &'static str) -> Result<Self> {
        if (0.0..=1.0).contains(&self) {
            Ok(self)
        } else if self > 1.0 && self <= 1.0 + FLOAT_UNIT_SLACK {
            log::warn!("{context}: clamping {self:.17e} to 1 (float round-off above unit)");
            Ok(1.0)
        } else if (-FLOAT_UNIT_SLACK..0.0).contains(&self) {
            log::warn!("{context}: clamping {self:.17e} to 0 (float round-off below zero)");
            Ok(0.0)
        } else {
            Err(Error::ProbabilityExcursion { context, value: self })
        }
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }

    fn one() -> Self {
        <BigRational as num_traits::One>::one()
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn at_least_half(&self) -> bool {
        *self >= BigRational::new(BigInt::from(1), BigInt::from(2))
    }

    fn count_term(count: &BigUint, a: &Self, a_exp: u32, b: &Self, b_exp: u32) -> Self {
        let count = BigRational::from_integer(BigInt::from(count.clone()));
        count * rational_powu(a, a_exp) * rational_powu(b, b_exp)
    }

    fn ratio_power(num: &Self, den: &Self, exp: u32) -> Self {
        rational_powu(&(num / den), exp)
    }

    fn sum(terms: impl Iterator<Item = Self>) -> Self {
        terms.fold(<Self as Scalar>::zero(), |acc, t| acc + t)
    }

    fn to_f64(&self) -> f64 {
        big_rational_to_f64(self)
    }

    fn into_probability(self, context: &'static str) -> Result<Self> {
        if self >= <Self as Scalar>::zero() && self <= <Self as Scalar>::one() {
            Ok(self)
        } else {
            Err(Error::ProbabilityExcursion { context, value: big_rational_to_f64(&self) })
        }
    }
}

/// `r^exp` for a reduced rational; numerator and denominator are raised
/// separately (powers of coprime integers stay coprime, so no re-reduction).
fn rational_powu(r: &BigRational, exp: u32) -> BigRational {
    BigRational::new_raw(r.numer().pow(exp), r.denom().pow(exp))
}

/// Convert a big rational of any magnitude to the nearest `f64`.
///
/// `BigRational` values arising from exact probability sums routinely carry
/// numerators and denominators far beyond `f64` range, where a naive
/// `numer/denom` conversion yields `inf/inf = NaN`. This scales the quotient
/// into range first: the result is correct to ~1 ulp, with gradual underflow
/// to 0 and overflow to infinity at the representability boundaries.
pub fn big_rational_to_f64(r: &BigRational) -> f64 {
    let numer = r.numer();
    let denom = r.denom();
    if numer.is_zero() {
        return 0.0;
    }
    let sign = if (numer.is_negative()) != (denom.is_negative()) { -1.0 } else { 1.0 };
    let n = numer.magnitude();
    let d = denom.magnitude();

    // Compute t = floor(n * 2^(64 - shift) / d), a ~64-bit integer whose
    // value times 2^(shift - 64) is the quotient.
    let shift = n.bits() as i64 - d.bits() as i64;
    let extra: i64 = 64;
    let t: BigUint = if extra - shift >= 0 {
        (n << (extra - shift) as u64) / d
    } else {
        n / (d << (shift - extra) as u64)
    };
    // t has 63..=65 bits; f64 conversion rounds it to 53 bits (<= 0.5 ulp).
    let t = t.to_f64().expect("scaled quotient fits f64 range");
    sign * ldexp2(t, shift - extra)
}

/// `x * 2^e` without intermediate under/overflow for any `i64` exponent.
///
/// Applied in chunks that `powi` represents exactly; each chunk moves the
/// value monotonically toward the result, so intermediates never leave the
/// representable range unless the result itself does.
fn ldexp2(x: f64, e: i64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut v = x;
    let mut rem = e.clamp(-4500, 4500);
    while rem != 0 {
        let step = rem.clamp(-1000, 1000);
        v *= 2f64.powi(step as i32);
        rem -= step;
    }
    v
}

/// Neumaier (improved Kahan) compensated accumulator.
///
/// Keeps the running error of a float sum below ~1 ulp of the total
/// regardless of term count or ordering — the reason float series here agree
/// with the exact backend to ~1e-15.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    compensation: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// `f64` in normalized mantissa/exponent form: `mant * 2^exp2`, `mant` in
/// `[1, 2)` (or exactly 0).
///
/// Multiplication renormalizes by exact powers of two, so products of factors
/// spanning thousands of binary orders of magnitude — giant path counts times
/// deeply underflowing probability powers — evaluate to full `f64` precision.
#[derive(Clone, Copy, Debug)]
struct ScaledFloat {
    mant: f64,
    exp2: i64,
}

impl ScaledFloat {
    const ZERO: Self = Self { mant: 0.0, exp2: 0 };
    const ONE: Self = Self { mant: 1.0, exp2: 0 };

    fn from_f64(x: f64) -> Self {
        debug_assert!(x >= 0.0 && x.is_finite());
        Self { mant: x, exp2: 0 }.normalized()
    }

    /// Round the top 53 bits of `c`; exact below 2^53.
    fn from_biguint(c: &BigUint) -> Self {
        let bits = c.bits();
        if bits == 0 {
            return Self::ZERO;
        }
        if bits <= 53 {
            return Self { mant: c.to_f64().expect("<= 53 bits"), exp2: 0 }.normalized();
        }
        let shift = bits - 54;
        let top: u64 = (c >> shift).to_u64().expect("54-bit slice");
        let rounded = (top + 1) >> 1; // round half up to 53 bits
        Self { mant: rounded as f64, exp2: shift as i64 + 1 }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.mant == 0.0 {
            return Self::ZERO;
        }
        // Exponent straight from the bit pattern; mant stays normal (it is a
        // fresh f64 or a product of two values in [1, 2)).
        let e = ((self.mant.to_bits() >> 52) & 0x7ff) as i64 - 1023;
        if e != 0 {
            self.mant *= 2f64.powi(-e as i32);
            self.exp2 += e;
        }
        self
    }

    fn mul(self, rhs: Self) -> Self {
        if self.mant == 0.0 || rhs.mant == 0.0 {
            return Self::ZERO;
        }
        Self { mant: self.mant * rhs.mant, exp2: self.exp2 + rhs.exp2 }.normalized()
    }

    fn powu(self, exp: u32) -> Self {
        let mut result = Self::ONE;
        let mut base = self;
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(base);
            }
        }
        result
    }

    fn to_f64(self) -> f64 {
        ldexp2(self.mant, self.exp2)
    }
}

/// Parse a decimal or fraction literal into an exact rational.
///
/// Accepts `"0.35"`, `".5"`, `"7"`, and `"7/20"`. This is how the CLI's
/// rational backend receives parameters without a lossy trip through `f64`
/// (the float literal `0.3` is not 3/10).
pub fn rational_from_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let numer: BigInt = if joined.is_empty() { BigInt::zero() } else { joined.parse().ok()? };
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(BigRational::new(numer * sign, denom))
}
