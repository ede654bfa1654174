//! Divisor traps: integer-coefficient curves that locally approximate the
//! hyperbola `y = n/x`, swept by an integer step `k`.
//!
//! A trap of order `o` approximates `n/x` by its Taylor polynomial of degree
//! `o - 1` at the anchor `x₀ = (n/s)^{1/(o+1)}`, with every irrational
//! coefficient replaced by its floor. Writing `M = o + 1`, `s = h/t` and
//! `aᵢ = ⌊C(M,i)·(s^{M-i}·n^i)^{1/M}⌋`, step `k` asks for integer roots of
//!
//! ```text
//! n/x + (-1)^M·s·x^{M-1} + Σᵢ (-1)^{M-i}·aᵢ·x^{M-1-i} = C + k/t
//! ```
//!
//! where `C` is the floor of the left-hand side at the anchor. Multiplying
//! by `t·x` gives the polynomial form used throughout:
//!
//! ```text
//! t·n + Σᵢ (-1)^{M-i}·t·aᵢ·x^{M-i} + (-1)^M·h·x^M − (t·C + k)·x = 0
//! ```
//!
//! Order 1 with `s = 1` is `x² − (⌊2√n⌋ + k)·x + n = 0`, Fermat's method.
//! Any integer solution `x` of the original system satisfies exactly one
//! step `k`, so sweeping `k` over a range and solving each step exactly
//! misses no divisor whose step falls in that range.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::exact_arith::{
    binomial, floor_radical_sum, gcd, iroot, isqrt, ln_natural, ln_rational, to_natural, FloorError,
    Natural, RadicalTerm, Rational,
};
use crate::poly_solve::{
    cubic_prefilter, integer_roots_in, quadratic_integer_roots, CubicShape, IntPolynomial,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrapError {
    #[error("n = {0} is even; strip factors of 2 before trapping")]
    EvenModulus(Natural),
    #[error("n = {0} is too small; traps need n ≥ 3")]
    TooSmall(Natural),
    #[error("trap parameter s = {0} must be positive")]
    NonPositiveS(Rational),
    #[error("trap order must be at least 1")]
    ZeroOrder,
    #[error("empty step range {lo}..{hi}")]
    EmptyRange { lo: i64, hi: i64 },
    #[error("residue filter modulus must be positive")]
    ZeroModulus,
    #[error("coverage estimate for order {0} is experimental; request it explicitly")]
    UnsupportedOrder(u32),
    #[error("Fermat-number filter needs index ≥ 2, got {0}")]
    FermatIndexTooSmall(u32),
    #[error(transparent)]
    Floor(#[from] FloorError),
}

/// Keeps steps `k` of one parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(k: i64) -> Self {
        if k.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Keeps steps `k ≡ residue (mod modulus)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepFilter {
    pub modulus: Natural,
    pub residue: Natural,
}

impl StepFilter {
    pub fn accepts(&self, k: i64) -> bool {
        let m = BigInt::from(self.modulus.clone());
        BigInt::from(k).mod_floor(&m) == BigInt::from(self.residue.clone()).mod_floor(&m)
    }
}

/// Everything needed to run one trap sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrapSpec {
    pub n: Natural,
    pub order: u32,
    pub s: Rational,
    pub k_lo: i64,
    pub k_hi: i64,
    pub parity_filter: Option<Parity>,
    pub residue_filter: Option<StepFilter>,
}

impl TrapSpec {
    pub fn new(n: Natural, order: u32, s: Rational, k_lo: i64, k_hi: i64) -> Self {
        TrapSpec {
            n,
            order,
            s,
            k_lo,
            k_hi,
            parity_filter: None,
            residue_filter: None,
        }
    }

    /// Order-1, `s = 1` trap over `k_lo..=k_hi` keeping only steps with
    /// `⌊2√n⌋ + k` even, the only ones that can hold a factor pair of an
    /// odd `n`.
    pub fn tangent(n: Natural, k_lo: i64, k_hi: i64) -> Self {
        let parity = if isqrt(&(&n << 2usize)).is_even() {
            Parity::Even
        } else {
            Parity::Odd
        };
        TrapSpec::new(n, 1, Rational::one(), k_lo, k_hi).with_parity(parity)
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity_filter = Some(parity);
        self
    }

    pub fn with_residue_filter(mut self, filter: StepFilter) -> Self {
        self.residue_filter = Some(filter);
        self
    }

    pub fn validate(&self) -> Result<(), TrapError> {
        if self.n < Natural::from(3u32) {
            return Err(TrapError::TooSmall(self.n.clone()));
        }
        if self.n.is_even() {
            return Err(TrapError::EvenModulus(self.n.clone()));
        }
        validate_shape(self.order, &self.s)?;
        if self.k_lo > self.k_hi {
            return Err(TrapError::EmptyRange {
                lo: self.k_lo,
                hi: self.k_hi,
            });
        }
        if self.residue_filter.as_ref().is_some_and(|f| f.modulus.is_zero()) {
            return Err(TrapError::ZeroModulus);
        }
        Ok(())
    }

    /// The steps that survive both filters, ascending.
    pub fn steps(&self) -> StepIter {
        StepIter::new(self.k_lo, self.k_hi, self.parity_filter, self.residue_filter.as_ref())
    }
}

fn validate_shape(order: u32, s: &Rational) -> Result<(), TrapError> {
    if order == 0 {
        return Err(TrapError::ZeroOrder);
    }
    if !s.is_positive() {
        return Err(TrapError::NonPositiveS(s.clone()));
    }
    Ok(())
}

/// Ascending steps in a range, stepping straight through a residue class
/// when one is given.
#[derive(Debug, Clone)]
pub struct StepIter {
    next: Option<i64>,
    hi: i64,
    stride: i64,
    parity: Option<Parity>,
}

impl StepIter {
    fn new(lo: i64, hi: i64, parity: Option<Parity>, residue: Option<&StepFilter>) -> Self {
        let (first, stride) = match residue {
            None => (Some(lo), 1),
            Some(filter) if filter.modulus.is_zero() => (None, 1),
            Some(filter) => {
                let m = BigInt::from(filter.modulus.clone());
                let lo_big = BigInt::from(lo);
                let offset = (BigInt::from(filter.residue.clone()) - &lo_big).mod_floor(&m);
                let first = (lo_big + offset).to_i64();
                // A modulus beyond i64 admits at most one step in range.
                (first, m.to_i64().unwrap_or(i64::MAX))
            }
        };
        StepIter {
            next: first.filter(|&k| k <= hi),
            hi,
            stride,
            parity,
        }
    }
}

impl Iterator for StepIter {
    type Item = i64;

    fn next(&mut self) -> Option<i64> {
        loop {
            let k = self.next?;
            self.next = k.checked_add(self.stride).filter(|&n| n <= self.hi);
            if self.parity.map_or(true, |p| Parity::of(k) == p) {
                return Some(k);
            }
        }
    }
}

/// One integer solution found by a sweep.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TrapHit {
    pub k: i64,
    pub x: Natural,
    pub divisor: Natural,
}

/// The cleared polynomial identity of a Taylor trap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrapEquation {
    pub order: u32,
    /// The integer whose hyperbola is approximated (`n`, or `r·n` inside
    /// multiplier sweeps).
    pub target: Natural,
    pub s: Rational,
    /// `t·n + Σ (-1)^{M-i}·t·aᵢ·x^{M-i} + (-1)^M·h·x^M`; the step adds
    /// `−(t·C + k)·x`.
    pub poly_base: IntPolynomial,
    /// `t`, the denominator of `s`.
    pub step_scale: Natural,
    /// `C`, the floor of the curve side at the anchor.
    pub constant_c: BigInt,
    /// `a₁ … a_{M-1}`, the floored bracket coefficients.
    pub bracket_coeffs: Vec<BigInt>,
    /// `(n/s)^{1/M}` truncated to `2·bitlen(n)` fractional bits.
    pub anchor: Rational,
}

/// Builds the trap equation for `spec`. Rejects even or tiny `n`.
pub fn build_trap(spec: &TrapSpec) -> Result<TrapEquation, TrapError> {
    spec.validate()?;
    TrapEquation::for_target(&spec.n, spec.order, &spec.s)
}

impl TrapEquation {
    /// Builds the equation for an arbitrary positive target, without the
    /// odd-`n` requirement of [`build_trap`]; multiplier sweeps trap `r·n`.
    pub fn for_target(target: &Natural, order: u32, s: &Rational) -> Result<Self, TrapError> {
        validate_shape(order, s)?;
        let m = order + 1;
        let h = s.numer().to_biguint().expect("s > 0");
        let t = s.denom().to_biguint().expect("denominator > 0");
        let t_big = BigInt::from(t.clone());
        let h_big = BigInt::from(h.clone());
        let inv_t = Rational::new(BigInt::one(), t_big.clone());
        let inv_h = Rational::new(BigInt::one(), h_big.clone());
        let nt = target * &t;
        let sign = |e: u32| if e % 2 == 0 { BigInt::one() } else { -BigInt::one() };

        // aᵢ = ⌊C(M,i)·(h^{M-i}·n^i·t^i)^{1/M} / t⌋
        let mut bracket_coeffs = Vec::with_capacity(m as usize - 1);
        for i in 1..m {
            let radicand = h.pow(m - i) * nt.pow(i);
            let term = RadicalTerm::new(binomial(m, i), radicand, m, inv_t.clone());
            bracket_coeffs.push(floor_radical_sum(&[term])?);
        }

        // C = ⌊(1 + (-1)^M)·(s·n^{M-1})^{1/M} + Σ (-1)^{M-i}·aᵢ·(n/s)^{(M-1-i)/M}⌋
        let mut terms = Vec::with_capacity(m as usize);
        if m % 2 == 0 {
            let radicand = &h * nt.pow(m - 1);
            terms.push(RadicalTerm::new(2, radicand, m, inv_t.clone()));
        }
        for (idx, a) in bracket_coeffs.iter().enumerate() {
            let i = idx as u32 + 1;
            let j = m - 1 - i;
            let radicand = nt.pow(j) * h.pow(m - j);
            terms.push(RadicalTerm::new(sign(m - i) * a, radicand, m, inv_h.clone()));
        }
        let constant_c = floor_radical_sum(&terms)?;

        let mut coeffs = vec![BigInt::zero(); m as usize + 1];
        coeffs[0] = BigInt::from(target.clone()) * &t_big;
        for (idx, a) in bracket_coeffs.iter().enumerate() {
            let i = idx as u32 + 1;
            coeffs[(m - i) as usize] = sign(m - i) * &t_big * a;
        }
        coeffs[m as usize] = sign(m) * &h_big;

        Ok(TrapEquation {
            order,
            target: target.clone(),
            s: s.clone(),
            poly_base: IntPolynomial::new(coeffs),
            step_scale: t,
            constant_c,
            bracket_coeffs,
            anchor: anchor_point(target, m, s),
        })
    }

    /// `M = order + 1`, the degree of every step polynomial.
    pub fn degree(&self) -> u32 {
        self.order + 1
    }

    fn shift(&self, k: i64) -> BigInt {
        BigInt::from(self.step_scale.clone()) * &self.constant_c + k
    }

    /// The polynomial whose integer roots are the solutions at step `k`.
    pub fn step_polynomial(&self, k: i64) -> IntPolynomial {
        let mut p = self.poly_base.clone();
        p.add_monomial(&-self.shift(k), 1);
        p
    }

    /// The unique step at which `x` solves the trap equation, if `x` is a
    /// positive divisor of `t·n`; `None` otherwise.
    pub fn step_of(&self, x: &Natural) -> Option<BigInt> {
        if x.is_zero() || !(&self.target * &self.step_scale).is_multiple_of(x) {
            return None;
        }
        let xb = BigInt::from(x.clone());
        let value = self.poly_base.eval(&xb) / &xb;
        Some(value - BigInt::from(self.step_scale.clone()) * &self.constant_c)
    }

    /// Positive integer roots at step `k`, ascending. With
    /// `cubic_prefilter` set, order-2 steps whose discriminant test fails
    /// are skipped without solving.
    pub fn roots_at(&self, k: i64, cubic_prefilter_on: bool) -> Vec<Natural> {
        let p = self.step_polynomial(k);
        let roots = if self.order == 1 {
            quadratic_integer_roots(&p.coeff(2), &p.coeff(1), &p.coeff(0))
        } else {
            if cubic_prefilter_on && self.order == 2 {
                if let Some(shape) = CubicShape::from_polynomial(&p) {
                    if !cubic_prefilter(&shape) {
                        return Vec::new();
                    }
                }
            }
            integer_roots_in(&p, &BigInt::one(), &p.cauchy_bound())
        };
        roots.iter().filter_map(|r| to_natural(r).filter(|r| !r.is_zero())).collect()
    }

    /// Hits at step `k`: roots `x` whose `gcd(x, n)` is a proper divisor
    /// of `n`.
    pub fn hits_at(&self, k: i64, n: &Natural, cubic_prefilter_on: bool) -> Vec<TrapHit> {
        self.roots_at(k, cubic_prefilter_on)
            .into_iter()
            .filter_map(|x| {
                let divisor = gcd(&x, n);
                is_proper_divisor(&divisor, n).then_some(TrapHit { k, x, divisor })
            })
            .collect()
    }
}

fn is_proper_divisor(d: &Natural, n: &Natural) -> bool {
    !d.is_one() && d != n && !d.is_zero()
}

// (n/s)^{1/M} = (n·t·h^{M-1})^{1/M} / h, truncated to 2·bitlen(n) bits.
fn anchor_point(target: &Natural, m: u32, s: &Rational) -> Rational {
    let h = s.numer().to_biguint().expect("s > 0");
    let t = s.denom().to_biguint().expect("denominator > 0");
    let bits = 2 * target.bits().max(1) as usize;
    let radicand = (target * t * h.pow(m - 1)) << (bits * m as usize);
    Rational::new(BigInt::from(iroot(&radicand, m)), BigInt::from(h) << bits)
}

/// Sweep tuning that does not change which divisors exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    /// Skip order-2 steps failing the cubic discriminant test. This can
    /// lose genuine hits (see [`cubic_prefilter`]), so it is off by default.
    pub cubic_prefilter: bool,
    /// Worker threads for partitioning the step range; 0 or 1 runs inline.
    /// Never affects the output.
    pub workers: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            cubic_prefilter: false,
            workers: 1,
        }
    }
}

const STEP_BLOCK: usize = 4096;

/// Runs the sweep described by `spec`: hits in ascending `(k, x)` order.
pub fn scan(spec: &TrapSpec) -> Result<Vec<TrapHit>, TrapError> {
    scan_with(spec, &ScanOptions::default())
}

pub fn scan_with(spec: &TrapSpec, options: &ScanOptions) -> Result<Vec<TrapHit>, TrapError> {
    let equation = build_trap(spec)?;
    let mut hits = Vec::new();
    for_each_step_block(spec.steps(), options.workers, |block| {
        map_steps(block, options.workers, |k| {
            equation.hits_at(k, &spec.n, options.cubic_prefilter)
        })
    }, |block_hits| {
        hits.extend(block_hits);
        true
    });
    hits.sort();
    Ok(hits)
}

/// Feeds `steps` to `run` in blocks; `sink` returns `false` to stop early.
pub(crate) fn for_each_step_block<R>(
    steps: impl Iterator<Item = i64>,
    workers: usize,
    mut run: impl FnMut(&[i64]) -> R,
    mut sink: impl FnMut(R) -> bool,
) {
    let block_len = STEP_BLOCK.max(workers * 64);
    let mut steps = steps.peekable();
    let mut block = Vec::with_capacity(block_len);
    while steps.peek().is_some() {
        block.clear();
        block.extend(steps.by_ref().take(block_len));
        if !sink(run(&block)) {
            return;
        }
    }
}

/// Maps every step of `block` through `f`, in parallel when asked, keeping
/// block order.
pub(crate) fn map_steps<T: Send>(
    block: &[i64],
    workers: usize,
    f: impl Fn(i64) -> Vec<T> + Sync,
) -> Vec<T> {
    if workers <= 1 {
        return block.iter().flat_map(|&k| f(k)).collect();
    }
    with_pool(workers, || {
        block
            .par_iter()
            .map(|&k| f(k))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    })
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// The divisor interval guaranteed by an order-1 sweep over `k ∈ [0, b]`:
/// `(½(A − √(A² − 4n)), √n]` with `A = ⌊2√n⌋ + b + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FermatInterval {
    pub lower: f64,
    pub upper: f64,
    n: Natural,
    a: Natural,
}

impl FermatInterval {
    /// Exact membership: `lower < p ≤ √n`.
    pub fn contains(&self, p: &Natural) -> bool {
        if p * p > self.n {
            return false;
        }
        let two_p = p << 1usize;
        if two_p > self.a {
            return true;
        }
        let gap = &self.a - two_p;
        let disc = &self.a * &self.a - (&self.n << 2usize);
        &gap * &gap < disc
    }
}

pub fn fermat_interval(n: &Natural, b: u64) -> FermatInterval {
    let a = isqrt(&(n << 2usize)) + b + 1u32;
    let disc = &a * &a - (n << 2usize);
    // ½(A − √D) = 2n / (A + √D), which keeps precision when √D ≈ A.
    let a_f = a.to_f64().unwrap_or(f64::INFINITY);
    let lower = 2.0 * n.to_f64().unwrap_or(f64::INFINITY) / (a_f + disc.to_f64().unwrap_or(f64::INFINITY).sqrt());
    FermatInterval {
        lower,
        upper: n.to_f64().unwrap_or(f64::INFINITY).sqrt(),
        n: n.clone(),
        a,
    }
}

/// Which constant the osculating-circle trap subtracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CircleConstant {
    /// `(x − c)² + (y − c)² = 2n + k`.
    #[default]
    Footnote,
    /// `(x − c)² + (y − c)² − 2n = ⌊2(√n − c)² − 2n⌋ + k`, offset by the
    /// value at the tangent point `x = y = √n`.
    TangentOffset,
}

/// Osculating-circle trap centred at `(c, c)` with `c = ⌊2√n⌋`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircleTrap {
    pub n: Natural,
    pub center: Natural,
    pub constant: BigInt,
    pub variant: CircleConstant,
}

impl CircleTrap {
    pub fn new(n: &Natural, variant: CircleConstant) -> Result<Self, TrapError> {
        let center = isqrt(&(n << 2usize));
        let constant = match variant {
            CircleConstant::Footnote => BigInt::zero(),
            CircleConstant::TangentOffset => {
                // 2(√n − c)² − 2n = 2c² − 4c·√n
                let c = BigInt::from(center.clone());
                let terms = [
                    RadicalTerm::integer(&c * &c * 2),
                    RadicalTerm::root(-(c * BigInt::from(4)), n.clone(), 2),
                ];
                floor_radical_sum(&terms)?
            }
        };
        Ok(CircleTrap {
            n: n.clone(),
            center,
            constant,
            variant,
        })
    }

    /// `x⁴ − 2c·x³ + (2c² − 2n − C − k)·x² − 2nc·x + n²`.
    pub fn step_polynomial(&self, k: i64) -> IntPolynomial {
        let n = BigInt::from(self.n.clone());
        let c = BigInt::from(self.center.clone());
        IntPolynomial::new(vec![
            &n * &n,
            -(&n * &c * BigInt::from(2)),
            &c * &c * 2 - &n * 2 - &self.constant - k,
            -(c * BigInt::from(2)),
            BigInt::one(),
        ])
    }

    /// The step at which the divisor `x` of `n` lies on the circle.
    pub fn step_of(&self, x: &Natural) -> Option<BigInt> {
        if x.is_zero() || !self.n.is_multiple_of(x) {
            return None;
        }
        let c = BigInt::from(self.center.clone());
        let dx = BigInt::from(x.clone()) - &c;
        let dy = BigInt::from(&self.n / x) - &c;
        Some(&dx * &dx + &dy * &dy - BigInt::from(self.n.clone()) * 2 - &self.constant)
    }

    pub fn hits_at(&self, k: i64) -> Vec<TrapHit> {
        let p = self.step_polynomial(k);
        integer_roots_in(&p, &BigInt::one(), &p.cauchy_bound())
            .iter()
            .filter_map(to_natural)
            .filter_map(|x| {
                let divisor = gcd(&x, &self.n);
                is_proper_divisor(&divisor, &self.n).then_some(TrapHit { k, x, divisor })
            })
            .collect()
    }
}

/// Osculating-circle sweep with the plain `2n + k` right-hand side.
pub fn circle_trap_scan(n: &Natural, k_lo: i64, k_hi: i64) -> Result<Vec<TrapHit>, TrapError> {
    circle_trap_scan_with(n, k_lo, k_hi, CircleConstant::Footnote)
}

pub fn circle_trap_scan_with(
    n: &Natural,
    k_lo: i64,
    k_hi: i64,
    variant: CircleConstant,
) -> Result<Vec<TrapHit>, TrapError> {
    TrapSpec::new(n.clone(), 1, Rational::one(), k_lo, k_hi).validate()?;
    let trap = CircleTrap::new(n, variant)?;
    let mut hits: Vec<TrapHit> = (k_lo..=k_hi).flat_map(|k| trap.hits_at(k)).collect();
    hits.sort();
    Ok(hits)
}

/// Which side of the anchor a coverage estimate describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Both,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Both => "both",
        })
    }
}

/// Closed-form estimate that produced a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageFormula {
    /// `2(b²n/s³)^{1/4}`
    Tangent,
    /// `(b³n/s⁴)^{1/9}` per side
    Quadratic,
    /// `2(b⁴n/s⁵)^{1/16}`
    Cubic,
    /// `2(bn)^{1/4}`
    Circle,
    /// `(b^M·n/s^{M+1})^{1/M²}` per side, `M = order + 1`; experimental.
    General(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveragePrediction {
    pub length_estimate: f64,
    pub side: Side,
    pub formula: CoverageFormula,
}

/// Predicted length of the divisor interval swept by `b` steps of the
/// trap in `spec`, for orders 1–3.
pub fn predict_coverage(spec: &TrapSpec, b: u64) -> Result<CoveragePrediction, TrapError> {
    if spec.order > 3 {
        return Err(TrapError::UnsupportedOrder(spec.order));
    }
    predict_coverage_general(spec, b)
}

/// Like [`predict_coverage`] but also extrapolates the pattern to any
/// order.
pub fn predict_coverage_general(spec: &TrapSpec, b: u64) -> Result<CoveragePrediction, TrapError> {
    validate_shape(spec.order, &spec.s)?;
    let m = f64::from(spec.order + 1);
    // With s = h/t each step moves the curve by 1/t, so b steps span b/t.
    let t = spec.s.denom().to_biguint().expect("denominator > 0");
    let ln_steps = (b as f64).ln() - ln_natural(&t);
    let per_side = ((m * ln_steps + ln_natural(&spec.n) - (m + 1.0) * ln_rational(&spec.s)) / (m * m)).exp();
    let formula = match spec.order {
        1 => CoverageFormula::Tangent,
        2 => CoverageFormula::Quadratic,
        3 => CoverageFormula::Cubic,
        o => CoverageFormula::General(o),
    };
    // Even-degree remainders are one-signed, so both sides fill at once;
    // odd-degree remainders change sign and k's sign picks the side.
    let (length_estimate, side) = if (spec.order + 1) % 2 == 0 {
        (2.0 * per_side, Side::Both)
    } else if spec.k_lo >= 1 {
        (per_side, Side::Left)
    } else if spec.k_hi <= 0 {
        (per_side, Side::Right)
    } else {
        (2.0 * per_side, Side::Both)
    };
    Ok(CoveragePrediction {
        length_estimate,
        side,
        formula,
    })
}

/// `2(bn)^{1/4}` for the osculating-circle trap.
pub fn predict_circle_coverage(n: &Natural, b: u64) -> CoveragePrediction {
    let b = b as f64;
    CoveragePrediction {
        length_estimate: 2.0 * ((b.ln() + ln_natural(n)) / 4.0).exp(),
        side: Side::Both,
        formula: CoverageFormula::Circle,
    }
}

/// Residue filter for factoring the Fermat number `F_m = 2^{2^m} + 1`:
/// modulus `2^{2(m+2)}` and residue `(2 − ⌊2√F_m⌋) mod 2^{2(m+2)}`.
///
/// Divisors of `F_m` have the form `r·2^{m+2} + 1`, so a factor pair
/// `p·q = F_m` has `p + q ≡ 2` modulo the square of that power.
pub fn fermat_number_filter(fermat_index: u32) -> Result<StepFilter, TrapError> {
    if fermat_index < 2 {
        return Err(TrapError::FermatIndexTooSmall(fermat_index));
    }
    let f = fermat_number(fermat_index);
    let modulus = Natural::one() << (2 * (fermat_index as usize + 2));
    let m = BigInt::from(modulus.clone());
    let residue = (BigInt::from(2) - BigInt::from(isqrt(&(f << 2usize)))).mod_floor(&m);
    Ok(StepFilter {
        modulus,
        residue: residue.to_biguint().expect("mod_floor is non-negative"),
    })
}

/// `2^{2^m} + 1`.
pub fn fermat_number(index: u32) -> Natural {
    (Natural::one() << (1usize << index)) + 1u32
}
