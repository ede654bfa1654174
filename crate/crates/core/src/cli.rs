//! The `trapfactor` command line.
//!
//! Exit codes: 0 when a factor is found or a scan/coverage run completes,
//! 1 when no factor is found, 2 on usage errors. Integers that can exceed
//! 2⁵³ are printed as JSON strings.

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algorithms::{
    default_slots, fermat_factor_with, lehman_factor, multi_trap_factor, plan_method, FactorError, FactorReport,
    Plan,
};
use crate::coverage_lab::{measure_coverage_with, random_odd_samples, write_csv, CoverageTrap};
use crate::exact_arith::{Natural, Rational};
use crate::traps::{
    circle_trap_scan_with, fermat_number_filter, scan_with, CircleConstant, Parity, ScanOptions, Side, StepFilter,
    TrapHit, TrapSpec,
};

/// Largest `|k|` accepted on the command line, so every step prints as an
/// exact JSON number.
pub const MAX_ABS_K: i64 = 1 << 53;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty value")]
    Empty,
    #[error("invalid decimal integer {0:?}")]
    InvalidInteger(String),
    #[error("denominator must be positive")]
    ZeroDenominator,
    #[error("value must be positive")]
    NotPositive,
    #[error("expected {expected}, got {got:?}")]
    Malformed { expected: &'static str, got: String },
    #[error("|k| must not exceed 2^53, got {0}")]
    StepOutOfRange(String),
    #[error("empty range {0}..{1}")]
    EmptyRange(i64, i64),
}

/// A non-negative decimal integer without sign or separators.
pub fn parse_natural(s: &str) -> Result<Natural, ParseError> {
    if s.is_empty() {
        return Err(ParseError::Empty);
    }
    if !s.bytes().all(|c| c.is_ascii_digit()) {
        return Err(ParseError::InvalidInteger(s.to_string()));
    }
    Natural::parse_bytes(s.as_bytes(), 10).ok_or_else(|| ParseError::InvalidInteger(s.to_string()))
}

/// A positive rational written `h/t` or `h`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseError> {
    let (h, t) = match s.split_once('/') {
        Some((h, t)) => (parse_natural(h)?, parse_natural(t)?),
        None => (parse_natural(s)?, Natural::one()),
    };
    if t.is_zero() {
        return Err(ParseError::ZeroDenominator);
    }
    if h.is_zero() {
        return Err(ParseError::NotPositive);
    }
    Ok(Rational::new(BigInt::from(h), BigInt::from(t)))
}

fn parse_step(s: &str) -> Result<i64, ParseError> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    parse_natural(digits)?;
    match s.parse::<i64>() {
        Ok(k) if (-MAX_ABS_K..=MAX_ABS_K).contains(&k) => Ok(k),
        _ => Err(ParseError::StepOutOfRange(s.to_string())),
    }
}

/// An inclusive step range `a..b` with `a ≤ b` and `|a|, |b| ≤ 2⁵³`.
pub fn parse_k_range(s: &str) -> Result<(i64, i64), ParseError> {
    let (a, b) = s.split_once("..").ok_or_else(|| ParseError::Malformed {
        expected: "a range a..b",
        got: s.to_string(),
    })?;
    let (a, b) = (parse_step(a)?, parse_step(b)?);
    if a > b {
        return Err(ParseError::EmptyRange(a, b));
    }
    Ok((a, b))
}

/// A residue filter `modulus:residue`.
pub fn parse_residue_filter(s: &str) -> Result<StepFilter, ParseError> {
    let (m, r) = s.split_once(':').ok_or_else(|| ParseError::Malformed {
        expected: "modulus:residue",
        got: s.to_string(),
    })?;
    let modulus = parse_natural(m)?;
    if modulus.is_zero() {
        return Err(ParseError::NotPositive);
    }
    Ok(StepFilter {
        modulus,
        residue: parse_natural(r)?,
    })
}

fn parse_max_steps(s: &str) -> Result<u64, ParseError> {
    let v = parse_step(s)?;
    u64::try_from(v).map_err(|_| ParseError::StepOutOfRange(s.to_string()))
}

#[derive(Debug, Parser)]
#[command(name = "trapfactor", version, about = "Factor integers with divisor traps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor an odd integer.
    Factor(FactorArgs),
    /// Sweep one trap and print every hit.
    Scan(ScanArgs),
    /// Measure empirical coverage against the estimates.
    Coverage(CoverageArgs),
    /// Time the factoring methods on random semiprimes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Fermat,
    Lehman,
    Multitrap,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CircleArg {
    Footnote,
    TangentOffset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
    Both,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    #[arg(value_parser = parse_natural)]
    pub n: Natural,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
    /// Fermat: last step tried. Multi-trap: global step cap.
    #[arg(long, value_parser = parse_max_steps)]
    pub max_steps: Option<u64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub workers: u16,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(value_parser = parse_natural)]
    pub n: Natural,
    #[arg(long, default_value_t = 1, conflicts_with = "circle")]
    pub order: u32,
    #[arg(long, value_parser = parse_rational, conflicts_with = "circle")]
    pub s: Option<Rational>,
    #[arg(long, value_parser = parse_k_range, allow_hyphen_values = true)]
    pub k_range: (i64, i64),
    #[arg(long, value_enum, conflicts_with = "circle")]
    pub parity: Option<ParityArg>,
    #[arg(long, value_parser = parse_residue_filter, conflicts_with_all = ["fermat_index", "circle"])]
    pub residue_filter: Option<StepFilter>,
    /// Use the residue filter for the Fermat number F_m.
    #[arg(long, conflicts_with = "circle")]
    pub fermat_index: Option<u32>,
    /// Skip order-2 steps whose cubic fails the discriminant test.
    #[arg(long, conflicts_with = "circle")]
    pub prefilter: bool,
    /// Sweep the osculating-circle trap instead of a Taylor trap.
    #[arg(long, value_enum)]
    pub circle: Option<CircleArg>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub workers: u16,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    /// Trap order; 0 measures the osculating-circle trap.
    #[arg(long, default_value_t = 1)]
    pub order: u32,
    #[arg(long, value_parser = parse_rational, default_value = "1")]
    pub s: Rational,
    #[arg(long, default_value_t = 16)]
    pub b: u64,
    #[arg(long, value_enum, default_value = "left")]
    pub side: SideArg,
    /// Explicit sample values; replaces random sampling.
    #[arg(long = "n", value_parser = parse_natural, num_args = 1.., conflicts_with_all = ["samples", "seed", "lo", "hi"])]
    pub n: Vec<Natural>,
    #[arg(long, default_value_t = 30)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000_000)]
    pub lo: u64,
    #[arg(long, default_value_t = 10_000_000_000)]
    pub hi: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    /// Decimal digits of each generated semiprime.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(4..=18))]
    pub digits: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Step budget for Fermat's method.
    #[arg(long, value_parser = parse_max_steps, default_value = "1000000")]
    pub max_steps: u64,
}

#[derive(Debug, Error)]
enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<crate::traps::TrapError> for RunError {
    fn from(e: crate::traps::TrapError) -> Self {
        RunError::Usage(e.to_string())
    }
}

#[derive(Serialize)]
struct FactorJson {
    n: String,
    factors: Vec<String>,
    method: &'static str,
    steps: u64,
    multiplier: Option<String>,
    hit_k: Option<i64>,
    prime_asserted: bool,
}

impl FactorJson {
    fn from_report(r: &FactorReport) -> Self {
        FactorJson {
            n: r.n.to_string(),
            factors: r.factors.iter().map(|f| f.to_string()).collect(),
            method: r.method.as_str(),
            steps: r.steps_used,
            multiplier: r.multiplier.as_ref().map(|m| m.to_string()),
            hit_k: r.hit_k,
            prime_asserted: r.prime_asserted,
        }
    }
}

#[derive(Serialize)]
struct HitJson {
    k: i64,
    x: String,
    divisor: String,
}

impl From<&TrapHit> for HitJson {
    fn from(h: &TrapHit) -> Self {
        HitJson {
            k: h.k,
            x: h.x.to_string(),
            divisor: h.divisor.to_string(),
        }
    }
}

/// Parses `args` (including the program name) without running anything.
pub fn parse_args<I, T>(args: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(args)
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse_args(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let result = match cli.command {
        Command::Factor(a) => run_factor(&a, out),
        Command::Scan(a) => run_scan(&a, out),
        Command::Coverage(a) => run_coverage(&a, out),
        Command::Bench(a) => run_bench(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(RunError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(RunError::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn factor_with(method: MethodArg, n: &Natural, max_steps: Option<u64>, workers: usize) -> Result<FactorReport, FactorError> {
    match method {
        MethodArg::Fermat => fermat_factor_with(n, max_steps.unwrap_or(1_000_000), workers),
        MethodArg::Lehman => lehman_factor(n),
        MethodArg::Multitrap => multi_trap_factor(n, &default_slots(), max_steps),
        MethodArg::Auto => match plan_method(n, None)? {
            Plan::MultiTrap(slots) => multi_trap_factor(n, &slots, max_steps),
            Plan::Targeted(_) => unreachable!("no hint given"),
        },
    }
}

fn run_factor(a: &FactorArgs, out: &mut dyn Write) -> Result<i32, RunError> {
    if a.format == Format::Csv {
        return Err(RunError::Usage("factor supports --format json or text".into()));
    }
    if a.method == MethodArg::Lehman && a.max_steps.is_some() {
        return Err(RunError::Usage("--max-steps does not apply to --method lehman".into()));
    }
    let method_name = match a.method {
        MethodArg::Fermat => "fermat",
        MethodArg::Lehman => "lehman",
        MethodArg::Multitrap | MethodArg::Auto => "multitrap",
    };
    let report = match factor_with(a.method, &a.n, a.max_steps, usize::from(a.workers)) {
        Ok(r) => r,
        Err(FactorError::Trap(e)) => return Err(e.into()),
        Err(FactorError::NotFound { steps_used } | FactorError::BudgetExhausted { steps_used }) => {
            let json = FactorJson {
                n: a.n.to_string(),
                factors: Vec::new(),
                method: method_name,
                steps: steps_used,
                multiplier: None,
                hit_k: None,
                prime_asserted: false,
            };
            emit_factor(&json, a.format, out)?;
            return Ok(1);
        }
    };
    emit_factor(&FactorJson::from_report(&report), a.format, out)?;
    Ok(if report.found_factor() { 0 } else { 1 })
}

fn emit_factor(json: &FactorJson, format: Format, out: &mut dyn Write) -> Result<(), RunError> {
    match format {
        Format::Text if json.factors.len() == 2 => {
            writeln!(out, "{} = {} * {} ({}, {} steps)", json.n, json.factors[0], json.factors[1], json.method, json.steps)?
        }
        Format::Text if json.prime_asserted => writeln!(out, "{} is prime ({}, {} steps)", json.n, json.method, json.steps)?,
        Format::Text => writeln!(out, "{}: no factor found ({}, {} steps)", json.n, json.method, json.steps)?,
        _ => writeln!(out, "{}", serde_json::to_string(json).expect("serializable"))?,
    }
    Ok(())
}

fn run_scan(a: &ScanArgs, out: &mut dyn Write) -> Result<i32, RunError> {
    let (k_lo, k_hi) = a.k_range;
    let hits = match a.circle {
        Some(variant) => {
            let variant = match variant {
                CircleArg::Footnote => CircleConstant::Footnote,
                CircleArg::TangentOffset => CircleConstant::TangentOffset,
            };
            circle_trap_scan_with(&a.n, k_lo, k_hi, variant)?
        }
        None => {
            let s = a.s.clone().unwrap_or_else(Rational::one);
            let mut spec = TrapSpec::new(a.n.clone(), a.order, s, k_lo, k_hi);
            spec.parity_filter = a.parity.map(|p| match p {
                ParityArg::Even => Parity::Even,
                ParityArg::Odd => Parity::Odd,
            });
            spec.residue_filter = match (a.residue_filter.clone(), a.fermat_index) {
                (Some(f), _) => Some(f),
                (None, Some(m)) => Some(fermat_number_filter(m)?),
                (None, None) => None,
            };
            let options = ScanOptions {
                cubic_prefilter: a.prefilter,
                workers: usize::from(a.workers),
            };
            scan_with(&spec, &options)?
        }
    };
    match a.format {
        Format::Json => {
            for h in &hits {
                writeln!(out, "{}", serde_json::to_string(&HitJson::from(h)).expect("serializable"))?;
            }
        }
        Format::Csv => {
            writeln!(out, "k,x,divisor")?;
            for h in &hits {
                writeln!(out, "{},{},{}", h.k, h.x, h.divisor)?;
            }
        }
        Format::Text => {
            for h in &hits {
                writeln!(out, "k={} x={} divisor={}", h.k, h.x, h.divisor)?;
            }
        }
    }
    Ok(0)
}

fn run_coverage(a: &CoverageArgs, out: &mut dyn Write) -> Result<i32, RunError> {
    if a.lo > a.hi || a.hi < 3 {
        return Err(RunError::Usage(format!("empty sample range {}..{}", a.lo, a.hi)));
    }
    let samples = if a.n.is_empty() {
        random_odd_samples(a.samples, a.lo.max(3), a.hi, a.seed)
    } else {
        a.n.clone()
    };
    for n in &samples {
        TrapSpec::new(n.clone(), a.order.max(1), a.s.clone(), 0, 0).validate()?;
    }
    let trap = if a.order == 0 {
        CoverageTrap::Circle
    } else {
        CoverageTrap::Taylor {
            order: a.order,
            s: a.s.clone(),
        }
    };
    let side = match a.side {
        SideArg::Left => Side::Left,
        SideArg::Right => Side::Right,
        SideArg::Both => Side::Both,
    };
    let records = measure_coverage_with(&trap, a.b, side, &samples);
    match a.format {
        Format::Csv | Format::Text => write_csv(&records, out)?,
        Format::Json => {
            for r in &records {
                let row = serde_json::json!({
                    "n": r.n.to_string(),
                    "order": r.order,
                    "s": r.s.to_string(),
                    "b": r.b,
                    "side": r.side.to_string(),
                    "predicted": r.predicted_length,
                    "empirical": r.empirical_length,
                    "ratio": r.ratio,
                });
                writeln!(out, "{row}")?;
            }
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct BenchRow {
    method: &'static str,
    solved: usize,
    failed: usize,
    steps_total: u64,
    steps_max: u64,
    elapsed_ms: f64,
}

#[derive(Serialize)]
struct BenchJson {
    seed: u64,
    count: usize,
    digits: u32,
    methods: Vec<BenchRow>,
}

fn is_prime_small(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn random_prime(rng: &mut ChaCha8Rng, lo: u64, hi: u64) -> u64 {
    loop {
        let p = rng.gen_range(lo..hi) | 1;
        if is_prime_small(p) {
            return p;
        }
    }
}

/// Odd semiprimes with `digits` decimal digits and factors of
/// comparable size.
pub fn bench_semiprimes(count: usize, digits: u32, seed: u64) -> Vec<Natural> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (10u64.pow(digits - 1), 10u64.pow(digits));
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p_digits = digits / 2;
        let p = random_prime(&mut rng, 10u64.pow(p_digits - 1).max(3), 10u64.pow(p_digits));
        let q_lo = lo.div_ceil(p).max(3);
        let q_hi = hi / p;
        if q_lo >= q_hi {
            continue;
        }
        let q = random_prime(&mut rng, q_lo, q_hi);
        let n = u128::from(p) * u128::from(q);
        if (u128::from(lo)..u128::from(hi)).contains(&n) {
            out.push(Natural::from(n));
        }
    }
    out
}

fn run_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<i32, RunError> {
    let inputs = bench_semiprimes(a.count, a.digits, a.seed);
    let mut methods = Vec::new();
    for (name, method) in [
        ("fermat", MethodArg::Fermat),
        ("lehman", MethodArg::Lehman),
        ("multitrap", MethodArg::Multitrap),
    ] {
        let start = Instant::now();
        let mut row = BenchRow {
            method: name,
            solved: 0,
            failed: 0,
            steps_total: 0,
            steps_max: 0,
            elapsed_ms: 0.0,
        };
        let budget = (method == MethodArg::Fermat).then_some(a.max_steps);
        for n in &inputs {
            let steps = match factor_with(method, n, budget, 1) {
                Ok(r) if r.found_factor() => {
                    row.solved += 1;
                    r.steps_used
                }
                Ok(r) => {
                    row.failed += 1;
                    r.steps_used
                }
                Err(FactorError::NotFound { steps_used } | FactorError::BudgetExhausted { steps_used }) => {
                    row.failed += 1;
                    steps_used
                }
                Err(FactorError::Trap(e)) => return Err(e.into()),
            };
            row.steps_total += steps;
            row.steps_max = row.steps_max.max(steps);
        }
        row.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
        methods.push(row);
    }
    let json = BenchJson {
        seed: a.seed,
        count: a.count,
        digits: a.digits,
        methods,
    };
    writeln!(out, "{}", serde_json::to_string(&json).expect("serializable"))?;
    Ok(0)
}
