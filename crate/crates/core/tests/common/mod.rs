//! Independent decimal evaluator for floors of radical sums and for the
//! trap constants written in their textbook form.

#![allow(dead_code)]

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use trapfactor::exact_arith::RadicalTerm;
use trapfactor::Rational;

/// Fractional decimal digits carried by the oracle.
pub const DIGITS: u32 = 220;

/// Values closer than this to an integer are reported as ambiguous.
pub fn ambiguity_margin() -> BigInt {
    BigInt::from(10u32).pow(DIGITS - 30)
}

fn scale() -> BigUint {
    BigUint::from(10u32).pow(DIGITS)
}

/// `⌊v^{1/m}⌋` by integer Newton iteration from above.
pub fn newton_root(v: &BigUint, m: u32) -> BigUint {
    assert!(m >= 1);
    if m == 1 || v.is_zero() {
        return v.clone();
    }
    let bits = v.bits();
    let mut x = BigUint::one() << (bits / u64::from(m) + 1) as usize;
    loop {
        let xm1 = x.pow(m - 1);
        let y = (&x * (m - 1) + v / &xm1) / m;
        if y >= x {
            break;
        }
        x = y;
    }
    while x.pow(m) > *v {
        x -= 1u32;
    }
    while (&x + 1u32).pow(m) <= *v {
        x += 1u32;
    }
    x
}

/// A term `c · (p/q)^{1/m}` with its fixed-point value and error bound in
/// units of `10^-DIGITS`.
struct Fixed {
    value: BigInt,
    error: BigInt,
}

fn term(c: &BigInt, p: &BigUint, q: &BigUint, m: u32) -> Fixed {
    let radicand = p * scale().pow(m);
    let root = newton_root(&(&radicand / q), m);
    let exact = (&radicand % q).is_zero() && root.pow(m) * q == radicand;
    Fixed {
        value: c * BigInt::from(root),
        error: if exact { BigInt::zero() } else { c.abs() + 1 },
    }
}

fn floor_of(terms: &[Fixed]) -> Option<BigInt> {
    let total: BigInt = terms.iter().map(|t| &t.value).sum();
    if terms.iter().all(|t| t.error.is_zero()) {
        return Some(total.div_floor(&BigInt::from(scale())));
    }
    let error: BigInt = terms.iter().map(|t| &t.error).sum::<BigInt>() + ambiguity_margin();
    let s = BigInt::from(scale());
    let (fl, frac) = total.div_mod_floor(&s);
    if frac < error || &s - &frac <= error {
        return None;
    }
    Some(fl)
}

/// `⌊Σ coeff·scale·radicand^{1/degree}⌋`, or `None` when the sum lies too
/// close to an integer to decide at this precision.
pub fn floor_radical_sum(terms: &[RadicalTerm]) -> Option<BigInt> {
    let fixed: Vec<Fixed> = terms
        .iter()
        .map(|t| {
            // c·(a/b)·r^{1/m} = c·a·(r/b^m)^{1/m}, b > 0
            let a = t.scale.numer();
            let b = t.scale.denom().magnitude();
            let c = &t.coeff * a;
            let q = b.pow(t.degree);
            term(&c, &t.radicand, &q, t.degree)
        })
        .collect();
    floor_of(&fixed)
}

fn binom(m: u32, i: u32) -> BigInt {
    let mut v = BigInt::one();
    for j in 0..i {
        v = v * (m - j) / (j + 1);
    }
    v
}

fn sign(e: u32) -> BigInt {
    if e % 2 == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// Coefficients `[a₁ … a_{M-1}]` and constant `C` of the order-`order`
/// trap, evaluated from
/// `aᵢ = ⌊C(M,i)·(s^{M-i} nⁱ)^{1/M}⌋` and
/// `C = ⌊(1+(-1)^M)(s n^{M-1})^{1/M} + Σ (-1)^{M-i} aᵢ (n/s)^{(M-1-i)/M}⌋`.
pub fn trap_constants(n: &BigUint, order: u32, s: &Rational) -> Option<(Vec<BigInt>, BigInt)> {
    let m = order + 1;
    let h = s.numer().magnitude().clone();
    let t = s.denom().magnitude().clone();
    let mut a = Vec::new();
    for i in 1..m {
        // (s^{M-i} nⁱ)^{1/M} = (h^{M-i} nⁱ / t^{M-i})^{1/M}
        let f = term(&binom(m, i), &(h.pow(m - i) * n.pow(i)), &t.pow(m - i), m);
        a.push(floor_of(&[f])?);
    }
    let mut terms = Vec::new();
    if m % 2 == 0 {
        terms.push(term(&BigInt::from(2), &(&h * n.pow(m - 1)), &t, m));
    }
    for i in 1..m {
        let j = m - 1 - i;
        // (n/s)^{j/M} = ((n t / h)^j)^{1/M}
        let c = sign(m - i) * &a[i as usize - 1];
        if c.sign() == Sign::NoSign {
            continue;
        }
        terms.push(term(&c, &(n * &t).pow(j), &h.pow(j), m));
    }
    Some((a, floor_of(&terms)?))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime factor, by trial division.
pub fn smallest_factor(n: u64) -> u64 {
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 1;
    }
    n
}

/// Odd semiprimes below `limit` as `(n, p, q)` with `p ≤ q`.
pub fn odd_semiprimes(limit: u64) -> Vec<(u64, u64, u64)> {
    (9..limit)
        .step_by(2)
        .filter_map(|n| {
            let p = smallest_factor(n);
            (p < n && is_prime(n / p)).then_some((n, p, n / p))
        })
        .collect()
}
