//! Empirical check of the coverage estimates.
//!
//! For a sample `n` we plant odd divisors `d` around the trap's anchor,
//! turning each into a semiprime-like `n' = d·q` with `q` the odd integer
//! nearest `n/d`, and ask at which step the trap built for `n'` catches `d`.
//! The empirical length is the extent of the caught divisors: the full
//! span for two-sided traps, the distance from the anchor to the farthest
//! caught divisor for one-sided ones.
//!
//! CSV columns: `n,order,s_num,s_den,b,side,predicted,empirical,ratio`.
//! Order 0 is the osculating-circle trap. Reals use 6 significant digits
//! and an undefined ratio is left empty.

use std::io::{self, Write};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::exact_arith::{ln_natural, ln_rational, Natural, Rational};
use crate::traps::{
    predict_circle_coverage, predict_coverage_general, CircleConstant, CircleTrap, Side, TrapEquation,
    TrapSpec,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRecord {
    pub n: Natural,
    /// Trap order; 0 for the circle trap.
    pub order: u32,
    pub s: Rational,
    pub b: u64,
    pub side: Side,
    pub predicted_length: f64,
    pub empirical_length: f64,
    /// `empirical / predicted`, absent when nothing was predicted.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverageTrap {
    Taylor { order: u32, s: Rational },
    /// Osculating circle with the tangent-point constant, whose coverage
    /// the `2(bn)^{1/4}` estimate describes.
    Circle,
}

impl CoverageTrap {
    fn order(&self) -> u32 {
        match self {
            CoverageTrap::Taylor { order, .. } => *order,
            CoverageTrap::Circle => 0,
        }
    }

    fn s(&self) -> Rational {
        match self {
            CoverageTrap::Taylor { s, .. } => s.clone(),
            CoverageTrap::Circle => Rational::one(),
        }
    }

    fn one_sided(&self) -> bool {
        matches!(self, CoverageTrap::Taylor { order, .. } if order % 2 == 0)
    }

    /// `side` for one-sided traps, [`Side::Both`] otherwise.
    pub fn effective_side(&self, side: Side) -> Side {
        if self.one_sided() {
            side
        } else {
            Side::Both
        }
    }

    // Steps swept for a given side. Only odd-degree remainders have sides.
    pub fn k_range(&self, b: u64, side: Side) -> (i64, i64) {
        let b = i64::try_from(b).unwrap_or(i64::MAX);
        match self {
            CoverageTrap::Circle => (1, b),
            _ if !self.one_sided() => (0, b),
            _ => match side {
                Side::Left => (1, b),
                Side::Right => (1 - b, 0),
                Side::Both => (1 - b, b),
            },
        }
    }

    pub fn anchor(&self, n: &Natural) -> f64 {
        match self {
            CoverageTrap::Taylor { order, s } => {
                ((ln_natural(n) - ln_rational(s)) / f64::from(order + 1)).exp()
            }
            CoverageTrap::Circle => (ln_natural(n) / 2.0).exp(),
        }
    }

    pub fn predict(&self, n: &Natural, b: u64, side: Side) -> f64 {
        match self {
            CoverageTrap::Taylor { order, s } => {
                let (k_lo, k_hi) = self.k_range(b, side);
                let spec = TrapSpec::new(n.clone(), *order, s.clone(), k_lo, k_hi);
                predict_coverage_general(&spec, b).map_or(0.0, |p| p.length_estimate)
            }
            CoverageTrap::Circle => predict_circle_coverage(n, b).length_estimate,
        }
    }

    // Step at which the trap built for `planted` catches `d`.
    fn step_for(&self, planted: &Natural, d: &Natural) -> Option<BigInt> {
        match self {
            CoverageTrap::Taylor { order, s } => TrapEquation::for_target(planted, *order, s).ok()?.step_of(d),
            CoverageTrap::Circle => CircleTrap::new(planted, CircleConstant::TangentOffset).ok()?.step_of(d),
        }
    }
}

/// `d·q` with `q` the odd integer nearest `n/d` (ties and even values
/// move up).
pub fn plant(n: &Natural, d: &Natural) -> Natural {
    let mut q = (n + (d >> 1usize)) / d;
    if q.is_even() {
        q += 1u32;
    }
    d * q
}

/// The planted pairs `(d, n')` for every odd `d ≥ 3` within `radius` of
/// the anchor.
pub fn planting_plan(trap: &CoverageTrap, n: &Natural, radius: u64) -> Vec<(Natural, Natural)> {
    let center = trap.anchor(n).round() as u64;
    let lo = center.saturating_sub(radius).max(3) | 1;
    let hi = center.saturating_add(radius);
    (lo..=hi)
        .step_by(2)
        .map(|d| {
            let d = Natural::from(d);
            let planted = plant(n, &d);
            (d, planted)
        })
        .collect()
}

/// Half-width of the planting window for a predicted length.
pub fn plant_radius(predicted: f64) -> u64 {
    (2.5 * predicted).ceil() as u64 + 8
}

/// Divisors caught when planting every odd `d` within `radius` of the
/// anchor, sorted.
pub fn trapped_divisors(trap: &CoverageTrap, n: &Natural, b: u64, side: Side, radius: u64) -> Vec<Natural> {
    let (k_lo, k_hi) = trap.k_range(b, side);
    let (k_lo, k_hi) = (BigInt::from(k_lo), BigInt::from(k_hi));
    planting_plan(trap, n, radius)
        .into_iter()
        .filter_map(|(d, planted)| {
            let k = trap.step_for(&planted, &d)?;
            (k >= k_lo && k <= k_hi).then_some(d)
        })
        .collect()
}

fn empirical_length(trapped: &[Natural], anchor: f64, side: Side) -> f64 {
    let (Some(first), Some(last)) = (trapped.first(), trapped.last()) else {
        return 0.0;
    };
    let (first, last) = (first.to_f64().unwrap_or(f64::MAX), last.to_f64().unwrap_or(f64::MAX));
    match side {
        Side::Both => last - first,
        Side::Left => (anchor - first).max(0.0),
        Side::Right => (last - anchor).max(0.0),
    }
}

/// One record per sample for the given trap and side. Two-sided traps
/// ignore `side` and report [`Side::Both`].
pub fn measure_coverage_with(trap: &CoverageTrap, b: u64, side: Side, samples: &[Natural]) -> Vec<CoverageRecord> {
    let side = trap.effective_side(side);
    samples
        .par_iter()
        .map(|n| {
            let predicted = trap.predict(n, b, side);
            let radius = plant_radius(predicted);
            let trapped = trapped_divisors(trap, n, b, side, radius);
            let empirical = empirical_length(&trapped, trap.anchor(n), side);
            CoverageRecord {
                n: n.clone(),
                order: trap.order(),
                s: trap.s(),
                b,
                side,
                predicted_length: predicted,
                empirical_length: empirical,
                ratio: (predicted > 0.0).then(|| empirical / predicted),
            }
        })
        .collect()
}

/// Coverage of the order-`order` trap (0 for the circle trap). Order 2
/// is measured on its left side, `k ∈ [1, b]`.
pub fn measure_coverage(order: u32, s: &Rational, b: u64, samples: &[Natural]) -> Vec<CoverageRecord> {
    let trap = if order == 0 {
        CoverageTrap::Circle
    } else {
        CoverageTrap::Taylor { order, s: s.clone() }
    };
    measure_coverage_with(&trap, b, Side::Left, samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanPair {
    pub n: Natural,
    pub fermat: f64,
    pub circle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FermatCircleReport {
    pub b: u64,
    pub rows: Vec<SpanPair>,
    /// Samples where the circle trap covered more than Fermat's method.
    pub violations: Vec<Natural>,
    /// `(b²)^{1/4} / b^{1/4}`
    pub predicted_ratio: f64,
}

impl FermatCircleReport {
    pub fn fermat_win_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        1.0 - self.violations.len() as f64 / self.rows.len() as f64
    }

    /// Median of Fermat span over circle span, skipping empty circles.
    pub fn median_span_ratio(&self) -> Option<f64> {
        median(
            self.rows
                .iter()
                .filter(|r| r.circle > 0.0)
                .map(|r| r.fermat / r.circle)
                .collect(),
        )
    }
}

pub fn compare_fermat_vs_circle(samples: &[Natural], b: u64) -> FermatCircleReport {
    let fermat = measure_coverage(1, &Rational::one(), b, samples);
    let circle = measure_coverage(0, &Rational::one(), b, samples);
    let rows: Vec<SpanPair> = fermat
        .iter()
        .zip(&circle)
        .map(|(f, c)| SpanPair {
            n: f.n.clone(),
            fermat: f.empirical_length,
            circle: c.empirical_length,
        })
        .collect();
    let violations = rows.iter().filter(|r| r.fermat < r.circle).map(|r| r.n.clone()).collect();
    FermatCircleReport {
        b,
        rows,
        violations,
        predicted_ratio: (b as f64).powf(0.25),
    }
}

pub fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    })
}

pub fn median_ratio(records: &[CoverageRecord]) -> Option<f64> {
    median(records.iter().filter_map(|r| r.ratio).collect())
}

/// `count` odd integers drawn uniformly from `[lo, hi]`.
pub fn random_odd_samples(count: usize, lo: u64, hi: u64, seed: u64) -> Vec<Natural> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v = rng.gen_range(lo..=hi) | 1;
            Natural::from(if v > hi { v - 2 } else { v })
        })
        .collect()
}

/// `%g`-style formatting with 6 significant digits.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const CSV_HEADER: &str = "n,order,s_num,s_den,b,side,predicted,empirical,ratio";

pub fn write_csv<W: Write + ?Sized>(records: &[CoverageRecord], out: &mut W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.order,
            r.s.numer(),
            r.s.denom(),
            r.b,
            r.side,
            format_real(r.predicted_length),
            format_real(r.empirical_length),
            r.ratio.map(format_real).unwrap_or_default(),
        )?;
    }
    Ok(())
}
