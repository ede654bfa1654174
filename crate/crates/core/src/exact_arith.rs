//! Exact big-integer primitives and provably correct floors of sums of
//! radical expressions.
//!
//! Every trap coefficient is a floor of an irrational quantity such as
//! `⌊3·(s²n)^{1/3}⌋`. Those floors are computed here with interval
//! refinement over exact rationals, never with floating point.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision non-negative integer.
pub type Natural = BigUint;

/// Exact fraction in canonical form (positive denominator, reduced).
pub type Rational = BigRational;

/// Environment variable that overrides the default precision cap.
pub const PRECISION_CAP_ENV: &str = "TRAPFACTOR_PRECISION_CAP_BITS";

const DEFAULT_START_BITS: u32 = 64;
const DEFAULT_CAP_BITS: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FloorError {
    /// The interval for the sum still straddles an integer at the cap.
    /// Either the sum is a disguised integer the exact path did not
    /// recognise, or it lies extraordinarily close to one.
    #[error("floor of radical sum not resolved within {cap_bits} bits of precision")]
    PrecisionCapExceeded { cap_bits: u32 },
    #[error("radical term has degree 0")]
    ZeroDegree,
}

/// `coeff · scale · radicand^(1/degree)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadicalTerm {
    pub coeff: BigInt,
    pub radicand: Natural,
    pub degree: u32,
    pub scale: Rational,
}

impl RadicalTerm {
    pub fn new(coeff: impl Into<BigInt>, radicand: Natural, degree: u32, scale: Rational) -> Self {
        RadicalTerm {
            coeff: coeff.into(),
            radicand,
            degree,
            scale,
        }
    }

    /// A term that is just the integer `value`.
    pub fn integer(value: impl Into<BigInt>) -> Self {
        RadicalTerm::new(value, Natural::one(), 1, Rational::one())
    }

    /// `coeff · radicand^(1/degree)` with unit scale.
    pub fn root(coeff: impl Into<BigInt>, radicand: Natural, degree: u32) -> Self {
        RadicalTerm::new(coeff, radicand, degree, Rational::one())
    }

    pub fn negated(&self) -> Self {
        RadicalTerm {
            coeff: -&self.coeff,
            ..self.clone()
        }
    }

    fn weight(&self) -> Rational {
        &self.scale * Rational::from_integer(self.coeff.clone())
    }
}

/// Precision schedule for [`floor_radical_sum_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FloorConfig {
    pub start_bits: u32,
    pub cap_bits: u32,
}

impl Default for FloorConfig {
    fn default() -> Self {
        FloorConfig {
            start_bits: DEFAULT_START_BITS,
            cap_bits: precision_cap_bits(),
        }
    }
}

/// Process-wide precision cap: `TRAPFACTOR_PRECISION_CAP_BITS` if set and
/// valid, otherwise 4096. Read once.
pub fn precision_cap_bits() -> u32 {
    static CAP: OnceLock<u32> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(PRECISION_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
            .filter(|&bits| bits >= DEFAULT_START_BITS)
            .unwrap_or(DEFAULT_CAP_BITS)
    })
}

/// Largest `r` with `r² ≤ n`.
pub fn isqrt(n: &Natural) -> Natural {
    n.sqrt()
}

/// Largest `r` with `r^m ≤ n`.
///
/// # Panics
///
/// Panics if `m == 0`.
pub fn iroot(n: &Natural, m: u32) -> Natural {
    assert!(m >= 1, "iroot degree must be positive");
    if m == 1 {
        return n.clone();
    }
    n.nth_root(m)
}

// Quadratic residues modulo 64, one bit per residue.
const SQUARE_MASK_64: u64 = {
    let mut mask = 0u64;
    let mut i = 0;
    while i < 64 {
        mask |= 1 << ((i * i) % 64);
        i += 1;
    }
    mask
};

/// `Some(r)` with `r² = n` when `n` is a perfect square.
pub fn as_square(n: &Natural) -> Option<Natural> {
    let low = n.iter_u64_digits().next().unwrap_or(0);
    if SQUARE_MASK_64 >> (low & 63) & 1 == 0 {
        return None;
    }
    let r = isqrt(n);
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// `Some(r)` with `r^m = n` when `n` is a perfect `m`-th power.
pub fn as_perfect_power(n: &Natural, m: u32) -> Option<Natural> {
    let r = iroot(n, m);
    if num_traits::pow(r.clone(), m as usize) == *n {
        Some(r)
    } else {
        None
    }
}

pub fn gcd(a: &Natural, b: &Natural) -> Natural {
    a.gcd(b)
}

/// Floor of a rational, toward negative infinity.
pub fn floor_rational(q: &Rational) -> BigInt {
    q.floor().to_integer()
}

/// Ceiling of a rational.
pub fn ceil_rational(q: &Rational) -> BigInt {
    q.ceil().to_integer()
}

/// `⌊Σ terms⌋` with the default precision schedule.
pub fn floor_radical_sum(terms: &[RadicalTerm]) -> Result<BigInt, FloorError> {
    floor_radical_sum_with(terms, &FloorConfig::default())
}

/// `⌈Σ terms⌉`, computed as `-⌊-Σ terms⌋`.
pub fn ceil_radical_sum(terms: &[RadicalTerm]) -> Result<BigInt, FloorError> {
    let negated: Vec<RadicalTerm> = terms.iter().map(RadicalTerm::negated).collect();
    Ok(-floor_radical_sum(&negated)?)
}

/// `⌊Σ terms⌋`, exact.
///
/// Terms whose radicand is a perfect power of its degree are folded into
/// an exact rational part. The remaining terms are grouped by
/// `(radicand, degree)` and bracketed with `p` fractional bits; `p`
/// doubles from `config.start_bits` until the bracket for the whole sum
/// contains no integer in its interior, or `config.cap_bits` is passed.
pub fn floor_radical_sum_with(
    terms: &[RadicalTerm],
    config: &FloorConfig,
) -> Result<BigInt, FloorError> {
    let mut exact = Rational::zero();
    let mut irrational: BTreeMap<(u32, Natural), Rational> = BTreeMap::new();

    for term in terms {
        if term.degree == 0 {
            return Err(FloorError::ZeroDegree);
        }
        let weight = term.weight();
        if weight.is_zero() || term.radicand.is_zero() {
            continue;
        }
        match as_perfect_power(&term.radicand, term.degree) {
            Some(root) => exact += weight * Rational::from_integer(BigInt::from(root)),
            None => {
                *irrational
                    .entry((term.degree, term.radicand.clone()))
                    .or_insert_with(Rational::zero) += weight;
            }
        }
    }
    irrational.retain(|_, w| !w.is_zero());

    if irrational.is_empty() {
        return Ok(floor_rational(&exact));
    }

    let mut bits = config.start_bits.max(1);
    loop {
        let (lo, hi) = bracket(&exact, &irrational, bits);
        let floor_lo = floor_rational(&lo);
        if floor_lo == floor_rational(&hi) {
            return Ok(floor_lo);
        }
        if bits >= config.cap_bits {
            return Err(FloorError::PrecisionCapExceeded {
                cap_bits: config.cap_bits,
            });
        }
        bits = bits.saturating_mul(2).min(config.cap_bits);
    }
}

// Encloses the sum in [lo, hi] using roots truncated to `bits` fractional
// bits: radicand^(1/d) ∈ [r/2^bits, (r+1)/2^bits].
fn bracket(
    exact: &Rational,
    irrational: &BTreeMap<(u32, Natural), Rational>,
    bits: u32,
) -> (Rational, Rational) {
    let denom = BigInt::one() << bits as usize;
    let mut lo = exact.clone();
    let mut hi = exact.clone();
    for ((degree, radicand), weight) in irrational {
        let shifted = radicand << (bits as usize * *degree as usize);
        let root = BigInt::from(iroot(&shifted, *degree));
        let below = Rational::new(root.clone(), denom.clone());
        let above = Rational::new(root + 1, denom.clone());
        if weight.is_positive() {
            lo += weight * below;
            hi += weight * above;
        } else {
            lo += weight * above;
            hi += weight * below;
        }
    }
    (lo, hi)
}

/// Natural logarithm of a big integer, accurate to f64 precision for any
/// magnitude. Returns `-inf` for zero.
pub fn ln_natural(n: &Natural) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift as usize).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural logarithm of a positive rational.
pub fn ln_rational(q: &Rational) -> f64 {
    let num = q.numer().to_biguint().unwrap_or_default();
    let den = q.denom().to_biguint().unwrap_or_default();
    ln_natural(&num) - ln_natural(&den)
}

/// Converts a non-negative `BigInt` to a `Natural`, if it is non-negative.
pub fn to_natural(x: &BigInt) -> Option<Natural> {
    match x.sign() {
        Sign::Minus => None,
        _ => x.to_biguint(),
    }
}

/// `C(m, i)` as a big integer.
pub fn binomial(m: u32, i: u32) -> BigInt {
    let mut acc = BigInt::one();
    for j in 0..i {
        acc = acc * BigInt::from(m - j) / BigInt::from(j + 1);
    }
    acc
}
