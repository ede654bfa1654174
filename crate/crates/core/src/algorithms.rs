//! Factorization drivers built on traps: Fermat, Lehman's multiplier sweep,
//! a multi-trap variant of it, and a planner that picks traps for a
//! suspected divisor location.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::exact_arith::{ceil_radical_sum, iroot, Natural, RadicalTerm, Rational};
use crate::traps::{
    build_trap, for_each_step_block, map_steps, predict_coverage, Parity, StepFilter, TrapEquation,
    TrapError, TrapHit, TrapSpec,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactorError {
    #[error("no factor found within {steps_used} steps")]
    NotFound { steps_used: u64 },
    #[error("global step budget exhausted after {steps_used} steps")]
    BudgetExhausted { steps_used: u64 },
    #[error(transparent)]
    Trap(#[from] TrapError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Fermat,
    Lehman,
    MultiTrap,
    TrialDivision,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Fermat => "fermat",
            Method::Lehman => "lehman",
            Method::MultiTrap => "multitrap",
            Method::TrialDivision => "trial-division",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One budgeted sweep attempted by a driver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub multiplier: Natural,
    pub order: u32,
    pub k_lo: i64,
    pub k_hi: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorReport {
    pub n: Natural,
    /// A divisor pair `[d, n/d]` with `d ≤ n/d`, or `[n]` when no factor
    /// was found.
    pub factors: Vec<Natural>,
    pub method: Method,
    /// Trap steps (values of `k`) actually tested.
    pub steps_used: u64,
    pub multiplier: Option<Natural>,
    /// Step at which the factor was trapped, if a trap found it.
    pub hit_k: Option<i64>,
    pub trap_trace: Vec<TraceEntry>,
    /// The driver exhausted a search that would have found any factor.
    /// This is the method's own claim, not a primality certificate.
    pub prime_asserted: bool,
}

impl FactorReport {
    fn new(n: &Natural, method: Method) -> Self {
        FactorReport {
            n: n.clone(),
            factors: Vec::new(),
            method,
            steps_used: 0,
            multiplier: None,
            hit_k: None,
            trap_trace: Vec::new(),
            prime_asserted: false,
        }
    }

    fn with_divisor(mut self, d: &Natural) -> Self {
        let other = &self.n / d;
        self.factors = if *d <= other {
            vec![d.clone(), other]
        } else {
            vec![other, d.clone()]
        };
        self
    }

    fn prime(mut self) -> Self {
        self.factors = vec![self.n.clone()];
        self.prime_asserted = true;
        self
    }

    pub fn found_factor(&self) -> bool {
        self.factors.len() == 2
    }
}

fn require_odd(n: &Natural) -> Result<(), TrapError> {
    if n < &Natural::from(3u32) {
        return Err(TrapError::TooSmall(n.clone()));
    }
    if n.is_even() {
        return Err(TrapError::EvenModulus(n.clone()));
    }
    Ok(())
}

/// Prime factors of `n` up to `bound`, with multiplicity, followed by the
/// remaining cofactor when it exceeds 1.
pub fn trial_division(n: &Natural, bound: &Natural) -> Vec<Natural> {
    let mut rest = n.clone();
    let mut out = Vec::new();
    let bound = bound.to_u64().unwrap_or(u64::MAX);
    let mut d: u64 = 2;
    while d <= bound && Natural::from(d) * d <= rest {
        while (&rest % d).is_zero() {
            out.push(Natural::from(d));
            rest /= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > Natural::one() {
        out.push(rest);
    }
    out
}

/// Smallest divisor `d` of `n` with `lo ≤ d ≤ hi` and `d < n`.
fn smallest_divisor_in(n: &Natural, lo: u64, hi: u64) -> Option<Natural> {
    let lo = lo.max(2);
    if lo <= 2 && hi >= 2 && n.is_even() && n > &Natural::from(2u32) {
        return Some(Natural::from(2u32));
    }
    let mut d = if lo % 2 == 0 { lo + 1 } else { lo };
    while d <= hi {
        let dn = Natural::from(d);
        if &dn >= n {
            break;
        }
        if (n % d).is_zero() {
            return Some(dn);
        }
        d += 2;
    }
    None
}

/// `⌈n^{1/m}⌉`.
fn ceil_root(n: &Natural, m: u32) -> Natural {
    let r = iroot(n, m);
    if r.pow(m) < *n {
        r + 1u32
    } else {
        r
    }
}

/// Fermat's method as the order-1 trap over `k ∈ [0, max_steps]`.
pub fn fermat_factor(n: &Natural, max_steps: u64) -> Result<FactorReport, FactorError> {
    fermat_factor_with(n, max_steps, 1)
}

/// [`fermat_factor`] with the step range partitioned over `workers`
/// threads. The report does not depend on `workers`.
pub fn fermat_factor_with(n: &Natural, max_steps: u64, workers: usize) -> Result<FactorReport, FactorError> {
    fermat_factor_filtered(n, max_steps, None, workers)
}

/// Fermat's method restricted to steps accepted by `filter`; `steps_used`
/// counts only the steps actually tested.
pub fn fermat_factor_filtered(
    n: &Natural,
    max_steps: u64,
    filter: Option<StepFilter>,
    workers: usize,
) -> Result<FactorReport, FactorError> {
    require_odd(n)?;
    let k_hi = i64::try_from(max_steps).unwrap_or(i64::MAX);
    let mut spec = TrapSpec::tangent(n.clone(), 0, k_hi);
    spec.residue_filter = filter;
    let equation = build_trap(&spec)?;

    let mut steps_used = 0u64;
    let mut found: Option<TrapHit> = None;
    for_each_step_block(
        spec.steps(),
        workers,
        |block| {
            let hits = map_steps(block, workers, |k| equation.hits_at(k, n, false));
            (block.to_vec(), hits)
        },
        |(block, hits)| match hits.into_iter().min() {
            Some(hit) => {
                steps_used += block.iter().take_while(|&&k| k <= hit.k).count() as u64;
                found = Some(hit);
                false
            }
            None => {
                steps_used += block.len() as u64;
                true
            }
        },
    );

    let mut report = FactorReport::new(n, Method::Fermat);
    report.steps_used = steps_used;
    report.trap_trace.push(TraceEntry {
        multiplier: Natural::one(),
        order: 1,
        k_lo: 0,
        k_hi,
    });
    match found {
        Some(hit) => {
            report.hit_k = Some(hit.k);
            Ok(report.with_divisor(&hit.divisor))
        }
        None => Err(FactorError::NotFound { steps_used }),
    }
}

/// `⌈n^{1/6} / (4√r)⌉`, the per-multiplier step budget of Lehman's method,
/// evaluated exactly as `⌈(n·r³)^{1/6} / (4r)⌉`.
pub fn lehman_budget(n: &Natural, r: &Natural) -> Result<u64, TrapError> {
    let term = RadicalTerm::new(
        1,
        n * r.pow(3),
        6,
        Rational::new(BigInt::one(), BigInt::from(r.clone()) * 4),
    );
    let b = ceil_radical_sum(&[term])?;
    Ok(b.to_u64().unwrap_or(u64::MAX))
}

// Sweeps one multiplier's tangent trap on r·n over k ∈ [0, budget],
// returning the first proper divisor of n and the steps tested.
fn tangent_sweep(
    n: &Natural,
    r: &Natural,
    budget: u64,
) -> Result<(Option<TrapHit>, u64), TrapError> {
    let target = n * r;
    let equation = TrapEquation::for_target(&target, 1, &Rational::one())?;
    // For odd r·n both roots are odd, so ⌊2√(rn)⌋ + k must be even.
    let parity = target.is_odd().then(|| {
        if equation.bracket_coeffs[0].is_even() {
            Parity::Even
        } else {
            Parity::Odd
        }
    });
    let k_hi = i64::try_from(budget).unwrap_or(i64::MAX);
    let mut steps = 0u64;
    for k in 0..=k_hi {
        if parity.is_some_and(|p| Parity::of(k) != p) {
            continue;
        }
        steps += 1;
        if let Some(hit) = equation.hits_at(k, n, false).into_iter().min() {
            return Ok((Some(hit), steps));
        }
    }
    Ok((None, steps))
}

/// Lehman's method: trial division to `⌈n^{1/3}⌉`, then for each
/// multiplier `r ≤ ⌈n^{1/3}⌉` the tangent trap on `r·n` with
/// `⌈n^{1/6}/(4√r)⌉` steps. Finds a factor of every odd composite; if
/// both phases come up empty the report is flagged `prime_asserted`.
pub fn lehman_factor(n: &Natural) -> Result<FactorReport, FactorError> {
    require_odd(n)?;
    let cube_root = ceil_root(n, 3);
    let limit = cube_root.to_u64().unwrap_or(u64::MAX);

    if let Some(d) = smallest_divisor_in(n, 3, limit) {
        return Ok(FactorReport::new(n, Method::TrialDivision).with_divisor(&d));
    }

    let mut report = FactorReport::new(n, Method::Lehman);
    let mut r = Natural::one();
    while r <= cube_root {
        let budget = lehman_budget(n, &r)?;
        report.trap_trace.push(TraceEntry {
            multiplier: r.clone(),
            order: 1,
            k_lo: 0,
            k_hi: i64::try_from(budget).unwrap_or(i64::MAX),
        });
        let (hit, steps) = tangent_sweep(n, &r, budget)?;
        report.steps_used += steps;
        if let Some(hit) = hit {
            report.multiplier = Some(r);
            report.hit_k = Some(hit.k);
            return Ok(report.with_divisor(&hit.divisor));
        }
        r += 1u32;
    }
    Ok(report.prime())
}

/// A trap registered with the multi-trap driver: order `o` is anchored at
/// `ω^{1/(o+1)}` for `ω = r·n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrapSlot {
    pub order: u32,
}

impl TrapSlot {
    /// `u(ω) = √ω`, Lehman's trap.
    pub const SQRT: TrapSlot = TrapSlot { order: 1 };
    /// `v(ω) = ω^{1/3}`.
    pub const CUBE_ROOT: TrapSlot = TrapSlot { order: 2 };

    pub fn anchor_tag(&self) -> String {
        match self.order {
            1 => "sqrt".to_string(),
            2 => "cbrt".to_string(),
            o => format!("root{}", o + 1),
        }
    }
}

pub fn default_slots() -> Vec<TrapSlot> {
    vec![TrapSlot::SQRT, TrapSlot::CUBE_ROOT]
}

/// Multiplier sweep with several traps per multiplier.
///
/// Phase 1 trial-divides to `⌈n^{1/4}⌉`. Then for `r = 1, 2, …, ⌈n^{1/3}⌉`
/// every slot gets the Lehman budget `b_r` on `r·n`, round-robin in slot
/// order; slots of even degree sweep `k ∈ [0, b_r]`, odd-degree slots sweep
/// `[1, b_r]` (left of the anchor) and then `[1 − b_r, 0]` (right). If all
/// multipliers fail, trial division over `(n^{1/4}, n^{1/3}]` restores
/// Lehman's guarantee. `step_cap` bounds the total trap steps.
pub fn multi_trap_factor(
    n: &Natural,
    slots: &[TrapSlot],
    step_cap: Option<u64>,
) -> Result<FactorReport, FactorError> {
    require_odd(n)?;
    let slots: Vec<TrapSlot> = if slots.is_empty() { default_slots() } else { slots.to_vec() };
    let fourth_root = ceil_root(n, 4).to_u64().unwrap_or(u64::MAX);
    let cube_root = ceil_root(n, 3);

    if let Some(d) = smallest_divisor_in(n, 3, fourth_root) {
        return Ok(FactorReport::new(n, Method::TrialDivision).with_divisor(&d));
    }

    let mut report = FactorReport::new(n, Method::MultiTrap);
    let cap = step_cap.unwrap_or(u64::MAX);
    let mut r = Natural::one();
    while r <= cube_root {
        let budget = i64::try_from(lehman_budget(n, &r)?).unwrap_or(i64::MAX);
        let target = n * &r;
        for slot in &slots {
            let equation = TrapEquation::for_target(&target, slot.order, &Rational::one())?;
            let ranges = if (slot.order + 1) % 2 == 0 {
                vec![(0, budget)]
            } else {
                vec![(1, budget), (1 - budget, 0)]
            };
            for (k_lo, k_hi) in ranges {
                report.trap_trace.push(TraceEntry {
                    multiplier: r.clone(),
                    order: slot.order,
                    k_lo,
                    k_hi,
                });
                for k in k_lo..=k_hi {
                    if report.steps_used >= cap {
                        return Err(FactorError::BudgetExhausted {
                            steps_used: report.steps_used,
                        });
                    }
                    report.steps_used += 1;
                    if let Some(hit) = equation.hits_at(k, n, false).into_iter().min() {
                        report.multiplier = Some(r);
                        report.hit_k = Some(hit.k);
                        return Ok(report.with_divisor(&hit.divisor));
                    }
                }
            }
        }
        r += 1u32;
    }

    let limit = cube_root.to_u64().unwrap_or(u64::MAX);
    if let Some(d) = smallest_divisor_in(n, fourth_root.saturating_add(1), limit) {
        report.method = Method::TrialDivision;
        return Ok(report.with_divisor(&d));
    }
    Ok(report.prime())
}

/// Where the planner switches from second- to first-order traps:
/// divisors above `(n / scale)^{exponent}` go to the tangent trap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannerPolicy {
    pub crossover_exponent: Rational,
    pub crossover_scale: u32,
}

impl Default for PlannerPolicy {
    fn default() -> Self {
        PlannerPolicy {
            crossover_exponent: Rational::new(3.into(), 7.into()),
            crossover_scale: 4,
        }
    }
}

impl PlannerPolicy {
    /// `x > (n/scale)^{p/q}`, decided exactly as `x^q·scale^p > n^p`.
    pub fn prefers_tangent(&self, x: &Natural, n: &Natural) -> bool {
        let p = self.crossover_exponent.numer().to_u32().unwrap_or(0);
        let q = self.crossover_exponent.denom().to_u32().unwrap_or(1);
        x.pow(q) * Natural::from(self.crossover_scale).pow(p) > n.pow(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Plan {
    /// Sweeps aimed at a hinted divisor region, in order.
    Targeted(Vec<TrapSpec>),
    /// No hint: run [`multi_trap_factor`] with these slots.
    MultiTrap(Vec<TrapSlot>),
}

pub fn plan_method(n: &Natural, hint_region: Option<(Natural, Natural)>) -> Result<Plan, TrapError> {
    plan_method_with(n, hint_region, &PlannerPolicy::default())
}

/// Chooses traps for a divisor believed to lie in `hint_region`. Regions
/// above `√n` are mirrored onto the cofactor region `n/x`.
pub fn plan_method_with(
    n: &Natural,
    hint_region: Option<(Natural, Natural)>,
    policy: &PlannerPolicy,
) -> Result<Plan, TrapError> {
    let Some((lo, hi)) = hint_region else {
        return Ok(Plan::MultiTrap(default_slots()));
    };
    require_odd(n)?;
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    lo = lo.max(Natural::one());
    hi = hi.max(Natural::one());
    let mut center: Natural = (&lo + &hi) >> 1usize;
    if &center * &center > *n {
        let (mlo, mhi) = (n / &hi, n / &lo);
        lo = mlo.max(Natural::one());
        hi = mhi.max(Natural::one());
        center = (n / center).max(Natural::one());
    }
    let width = (&hi - &lo).to_f64().unwrap_or(f64::MAX).max(2.0);

    if policy.prefers_tangent(&center, n) {
        // √(n/s) = center  ⇒  s = n / center²
        let s = round_ratio(n, &(&center * &center)).max(Natural::one());
        let s = Rational::from_integer(BigInt::from(s));
        let probe = TrapSpec::new(n.clone(), 1, s, 0, 0);
        let b = budget_for(&probe, width)?;
        let spec = TrapSpec { k_hi: b, ..probe };
        return Ok(Plan::Targeted(vec![spec]));
    }

    // (n·t)^{1/3} = center  ⇒  t = center³ / n; below n^{1/3} use s = n / center³.
    let cube = center.pow(3);
    let s = if cube >= *n {
        let t = round_ratio(&cube, n).max(Natural::one());
        Rational::new(BigInt::one(), BigInt::from(t))
    } else {
        Rational::from_integer(BigInt::from(round_ratio(n, &cube).max(Natural::one())))
    };
    let left = TrapSpec::new(n.clone(), 2, s, 1, 1);
    let b = budget_for(&left, width / 2.0)?;
    let right = TrapSpec { k_lo: 1 - b, k_hi: 0, ..left.clone() };
    Ok(Plan::Targeted(vec![TrapSpec { k_hi: b, ..left }, right]))
}

fn round_ratio(a: &Natural, b: &Natural) -> Natural {
    if b.is_zero() {
        return Natural::zero();
    }
    (a + (b >> 1usize)) / b
}

// Smallest power-of-two budget whose predicted coverage reaches `length`.
fn budget_for(spec: &TrapSpec, length: f64) -> Result<i64, TrapError> {
    let mut b: i64 = 1;
    while b < (1 << 40) {
        if predict_coverage(spec, b as u64)?.length_estimate >= length {
            break;
        }
        b *= 2;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat(v: u64) -> Natural {
        Natural::from(v)
    }

    fn nats(v: &[u64]) -> Vec<Natural> {
        v.iter().map(|&x| nat(x)).collect()
    }

    #[test]
    fn trial_division_examples() {
        assert_eq!(trial_division(&nat(8051), &nat(100)), nats(&[83, 97]));
        assert_eq!(trial_division(&nat(97), &nat(97)), nats(&[97]));
        assert_eq!(trial_division(&nat(27), &nat(3)), nats(&[3, 3, 3]));
        assert_eq!(trial_division(&nat(8051), &nat(10)), nats(&[8051]));
        assert_eq!(trial_division(&nat(360), &nat(5)), nats(&[2, 2, 2, 3, 3, 5]));
    }

    #[test]
    fn fermat_examples() {
        let r = fermat_factor(&nat(8051), 5).unwrap();
        assert_eq!((r.factors, r.hit_k, r.steps_used), (nats(&[83, 97]), Some(1), 1));
        let r = fermat_factor(&nat(10001), 12).unwrap();
        assert_eq!((r.factors, r.hit_k, r.steps_used), (nats(&[73, 137]), Some(10), 6));
        let r = fermat_factor(&nat(9), 1).unwrap();
        assert_eq!(r.factors, nats(&[3, 3]));
        assert_eq!(fermat_factor(&nat(97), 10), Err(FactorError::NotFound { steps_used: 5 }));
        assert!(matches!(fermat_factor(&nat(98), 10), Err(FactorError::Trap(TrapError::EvenModulus(_)))));
    }

    #[test]
    fn fermat_ignores_worker_count() {
        for n in [8051u64, 10001, 1_040_603, 4_294_967_297 % 1_000_000_007 | 1] {
            let base = fermat_factor_with(&nat(n), 3000, 1);
            for w in [2, 4, 8] {
                assert_eq!(fermat_factor_with(&nat(n), 3000, w), base, "n = {n}, workers = {w}");
            }
        }
    }

    #[test]
    fn lehman_examples() {
        let r = lehman_factor(&nat(8051)).unwrap();
        assert_eq!((r.factors.clone(), r.method, r.multiplier), (nats(&[83, 97]), Method::Lehman, Some(nat(1))));

        let r = lehman_factor(&nat(3 * 1_000_003)).unwrap();
        assert_eq!((r.factors, r.method), (nats(&[3, 1_000_003]), Method::TrialDivision));

        let r = lehman_factor(&nat(1009 * 4049)).unwrap();
        assert_eq!(r.factors, nats(&[1009, 4049]));
        assert!(r.multiplier.unwrap() <= nat(8));

        let r = lehman_factor(&nat(1_000_003)).unwrap();
        assert!(r.prime_asserted);
        assert_eq!(r.factors, nats(&[1_000_003]));
    }

    #[test]
    fn lehman_budget_matches_float_formula() {
        for (n, r) in [(10u64.pow(12) + 39, 1u64), (10u64.pow(12) + 39, 7), (8051, 3), (999_999_999_989, 100)] {
            let exact = lehman_budget(&nat(n), &nat(r)).unwrap();
            let approx = ((n as f64).powf(1.0 / 6.0) / (4.0 * (r as f64).sqrt())).ceil() as u64;
            assert_eq!(exact, approx, "n = {n}, r = {r}");
        }
    }

    #[test]
    fn multi_trap_uses_the_cube_root_trap() {
        let n = nat(101 * 10303);
        let r = multi_trap_factor(&n, &default_slots(), None).unwrap();
        assert_eq!(r.factors, nats(&[101, 10303]));
        assert_eq!(r.method, Method::MultiTrap);
        assert_eq!(r.multiplier, Some(nat(1)));
        assert_eq!(r.trap_trace.last().unwrap().order, 2);
        // The step is the one the trap equation assigns to x = 101.
        let eq = TrapEquation::for_target(&n, 2, &Rational::one()).unwrap();
        assert_eq!(Some(BigInt::from(r.hit_k.unwrap())), eq.step_of(&nat(101)));
    }

    #[test]
    fn multi_trap_tangent_first_for_balanced() {
        let r = multi_trap_factor(&nat(8051), &default_slots(), None).unwrap();
        assert_eq!(r.factors, nats(&[83, 97]));
        assert_eq!(r.trap_trace.len(), 1);
        assert_eq!(r.trap_trace[0].order, 1);
    }

    #[test]
    fn multi_trap_on_a_prime() {
        let p = nat(1_000_003);
        assert!(matches!(
            multi_trap_factor(&p, &default_slots(), Some(50)),
            Err(FactorError::BudgetExhausted { steps_used: 50 })
        ));
        assert!(multi_trap_factor(&p, &default_slots(), None).unwrap().prime_asserted);
    }

    #[test]
    fn planner_examples() {
        let n = nat(100_000_000_000_001);
        match plan_method(&n, Some((nat(10_000_000), nat(10_000_000)))).unwrap() {
            Plan::Targeted(specs) => {
                assert_eq!(specs.len(), 1);
                assert_eq!((specs[0].order, specs[0].s.clone()), (1, Rational::one()));
            }
            other => panic!("unexpected plan {other:?}"),
        }
        match plan_method(&n, Some((nat(100_000), nat(100_000)))).unwrap() {
            Plan::Targeted(specs) => {
                assert_eq!(specs.len(), 2);
                assert_eq!(specs[0].order, 2);
                assert_eq!(specs[0].s, Rational::new(1.into(), 10.into()));
                assert!(specs[0].k_lo >= 1 && specs[1].k_hi <= 0);
            }
            other => panic!("unexpected plan {other:?}"),
        }
        // A region above √n is planned as its cofactor region.
        let mirrored = plan_method(&n, Some((nat(1_000_000_000), nat(1_000_000_000)))).unwrap();
        let direct = plan_method(&n, Some((nat(100_000), nat(100_000)))).unwrap();
        assert_eq!(mirrored, direct);
        assert_eq!(plan_method(&n, None).unwrap(), Plan::MultiTrap(default_slots()));
    }

    #[test]
    fn crossover_threshold() {
        // (10¹⁴/4)^{3/7} ≈ 5.5·10⁵
        let n = nat(100_000_000_000_000);
        let policy = PlannerPolicy::default();
        assert!(!policy.prefers_tangent(&nat(540_000), &n));
        assert!(policy.prefers_tangent(&nat(560_000), &n));
    }
}
