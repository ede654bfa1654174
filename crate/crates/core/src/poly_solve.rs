//! Integer-root detection for the integer-coefficient polynomials that trap
//! equations produce.
//!
//! The general path isolates real roots exactly: the real roots of `p` are
//! separated by those of `p'`, so recursing on derivatives yields integer
//! segments on which `p` is strictly monotone, and a bisection over the
//! integers of each segment finds the floor of the one root it may hold.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exact_arith::{as_square, ceil_rational, floor_rational, to_natural, Natural, Rational};

/// Polynomial with integer coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPolynomial::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn sign_at(&self, x: &BigInt) -> Ordering {
        self.eval(x).sign_cmp()
    }

    pub fn derivative(&self) -> IntPolynomial {
        IntPolynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// Adds `delta · x^power`.
    pub fn add_monomial(&mut self, delta: &BigInt, power: usize) {
        if self.coeffs.len() <= power {
            self.coeffs.resize(power + 1, BigInt::zero());
        }
        self.coeffs[power] += delta;
        *self = IntPolynomial::new(std::mem::take(&mut self.coeffs));
    }

    /// Every real root lies in `[-B, B]` for the returned `B`
    /// (Cauchy's bound, rounded up).
    pub fn cauchy_bound(&self) -> BigInt {
        let Some((lead, rest)) = self.coeffs.split_last() else {
            return BigInt::zero();
        };
        let max = rest.iter().map(|c| c.abs()).max().unwrap_or_default();
        BigInt::one() + Integer::div_ceil(&max, &lead.abs())
    }
}

trait SignCmp {
    fn sign_cmp(&self) -> Ordering;
}

impl SignCmp for BigInt {
    fn sign_cmp(&self) -> Ordering {
        if self.is_zero() {
            Ordering::Equal
        } else if self.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

/// `a·x³ + b·x² + c·x + d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicShape {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl CubicShape {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>, d: impl Into<BigInt>) -> Self {
        CubicShape {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    /// `None` unless `p` has degree exactly 3.
    pub fn from_polynomial(p: &IntPolynomial) -> Option<Self> {
        (p.degree() == Some(3)).then(|| CubicShape::new(p.coeff(3), p.coeff(2), p.coeff(1), p.coeff(0)))
    }
}

/// All integer `x` with `a·x² + b·x + c = 0`, ascending and deduplicated.
///
/// # Panics
///
/// Panics if `a` is zero.
pub fn quadratic_integer_roots(a: &BigInt, b: &BigInt, c: &BigInt) -> Vec<BigInt> {
    assert!(!a.is_zero(), "quadratic_integer_roots requires a ≠ 0");
    let disc = b * b - BigInt::from(4) * a * c;
    let Some(root) = to_natural(&disc).and_then(|d| as_square(&d)) else {
        return Vec::new();
    };
    let root = BigInt::from(root);
    let two_a = a * 2;
    let mut out: Vec<BigInt> = [-b - &root, -b + &root]
        .into_iter()
        .filter(|num| num.is_multiple_of(&two_a))
        .map(|num| num / &two_a)
        .collect();
    out.sort();
    out.dedup();
    out
}

/// `18abcd − 4b³d + b²c² − 4ac³ − 27a²d²`.
pub fn cubic_discriminant(p: &CubicShape) -> BigInt {
    let CubicShape { a, b, c, d } = p;
    BigInt::from(18) * a * b * c * d - BigInt::from(4) * b * b * b * d + b * b * c * c
        - BigInt::from(4) * a * c * c * c
        - BigInt::from(27) * a * a * d * d
}

/// `true` iff `−Δ` is a non-negative perfect square.
///
/// A `false` answer only rules out cubics whose complex-pair factor
/// `x² + ux + v` has `4v − u²` a perfect square: for a cubic
/// `(x − r)(x² + ux + v)` one has `−Δ = (r² + ur + v)²·(4v − u²)`. In
/// particular it does not rule out an integer root in general
/// (`x³ − 1` has `Δ = −27`), so it must not gate an exhaustive search.
pub fn cubic_prefilter(p: &CubicShape) -> bool {
    to_natural(&-cubic_discriminant(p)).is_some_and(|neg| as_square(&neg).is_some())
}

/// Superset of the floors of all real roots of `p` inside `[lo, hi]`,
/// ascending and deduplicated. `p` must not be the zero polynomial.
pub fn real_root_floors(p: &IntPolynomial, lo: &BigInt, hi: &BigInt) -> Vec<BigInt> {
    if lo > hi || p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let critical = real_root_floors(&p.derivative(), lo, hi);

    // Segments [u, v] of integers whose real span holds no critical point
    // in its interior, so p is strictly monotone there.
    let mut floors = critical.clone();
    let mut start = lo.clone();
    for c in critical.iter().chain(std::iter::once(hi)) {
        if &start <= c {
            if let Some(f) = monotone_root_floor(p, &start, c) {
                floors.push(f);
            }
        }
        start = c + 1;
    }
    floors.sort();
    floors.dedup();
    floors
}

// Floor of the root of p in [u, v], given p monotone on that span.
fn monotone_root_floor(p: &IntPolynomial, u: &BigInt, v: &BigInt) -> Option<BigInt> {
    let su = p.sign_at(u);
    if su == Ordering::Equal {
        return Some(u.clone());
    }
    let sv = p.sign_at(v);
    if sv == Ordering::Equal {
        return Some(v.clone());
    }
    if su == sv {
        return None;
    }
    let (mut lo, mut hi) = (u.clone(), v.clone());
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) >> 1usize;
        match p.sign_at(&mid) {
            Ordering::Equal => return Some(mid),
            s if s == su => lo = mid,
            _ => hi = mid,
        }
    }
    Some(lo)
}

/// Every integer root of `p` in `[lo, hi]`, ascending.
pub fn integer_roots_in(p: &IntPolynomial, lo: &BigInt, hi: &BigInt) -> Vec<BigInt> {
    if p.is_zero() {
        return Vec::new();
    }
    real_root_floors(p, lo, hi)
        .into_iter()
        .filter(|x| p.eval(x).is_zero())
        .collect()
}

/// Every integer root of `p`, ascending.
pub fn integer_roots(p: &IntPolynomial) -> Vec<BigInt> {
    let bound = p.cauchy_bound();
    integer_roots_in(p, &-&bound, &bound)
}

/// Integer roots of `p` found by searching outward from `anchor`.
///
/// The window `[anchor − R, anchor + R]` starts at `R = radius_hint` and
/// doubles until it covers every real root (Cauchy's bound), so the result
/// is the complete set of integer roots; the hint only sets where the
/// search begins. Every returned `x` satisfies `p(x) = 0` exactly.
pub fn integer_roots_near(p: &IntPolynomial, anchor: &Rational, radius_hint: &Natural) -> Vec<BigInt> {
    if p.is_zero() {
        return Vec::new();
    }
    let bound = p.cauchy_bound();
    let mut radius = BigInt::from(radius_hint.clone()).max(BigInt::one());
    let mut found: Vec<BigInt> = Vec::new();
    let mut covered: Option<(BigInt, BigInt)> = None;
    loop {
        let lo = floor_rational(&(anchor - Rational::from_integer(radius.clone()))).max(-&bound);
        let hi = ceil_rational(&(anchor + Rational::from_integer(radius.clone()))).min(bound.clone());
        // Search only the parts of the window not searched before.
        let pieces = match &covered {
            None => vec![(lo.clone(), hi.clone())],
            Some((clo, chi)) => vec![(lo.clone(), clo - 1), (chi + 1, hi.clone())],
        };
        for (a, b) in pieces {
            found.extend(integer_roots_in(p, &a, &b));
        }
        let done = lo <= -&bound && hi >= bound;
        covered = Some((lo, hi));
        if done {
            break;
        }
        radius *= 2;
    }
    found.sort();
    found.dedup();
    found
}
