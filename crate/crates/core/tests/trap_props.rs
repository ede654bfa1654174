mod common;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use trapfactor::exact_arith::{as_square, isqrt};
use trapfactor::traps::{
    build_trap, fermat_interval, scan, scan_with, Parity, ScanOptions, TrapEquation, TrapSpec,
};
use trapfactor::{Natural, Rational};

fn nat(v: u64) -> Natural {
    Natural::from(v)
}

fn a_of(n: u64) -> u64 {
    isqrt(&nat(4 * n)).to_u64().unwrap()
}

#[test]
fn completeness_and_parity_on_small_semiprimes() {
    for (n, p, _) in common::odd_semiprimes(30_000) {
        let hits = scan(&TrapSpec::new(nat(n), 1, Rational::from_integer(1.into()), 0, 50)).unwrap();
        for h in &hits {
            assert!((nat(n) % &h.divisor).is_zero());
            assert_eq!(Parity::of(a_of(n) as i64 + h.k), Parity::Even, "n = {n}");
        }
        if fermat_interval(&nat(n), 50).contains(&nat(p)) {
            assert!(hits.iter().any(|h| h.divisor == nat(p) || h.divisor == nat(n / p)), "n = {n}");
        }
    }
}

#[test]
fn fermat_equivalence_on_random_n() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let n = rng.gen_range(3u64..1_000_000_000) | 1;
        let spec = TrapSpec::new(nat(n), 1, Rational::from_integer(1.into()), 0, 100);
        let mut got: Vec<i64> = scan(&spec).unwrap().iter().map(|h| h.k).collect();
        got.dedup();
        let a = a_of(n);
        let brute: Vec<i64> = (0..=100u64)
            .filter(|&k| {
                let Some(sq) = ((a + k) * (a + k)).checked_sub(4 * n) else {
                    return false;
                };
                match as_square(&nat(sq)) {
                    Some(d) => {
                        let d = d.to_u64().unwrap();
                        let x = (a + k - d) / 2;
                        x > 1 && x * ((a + k + d) / 2) == n
                    }
                    None => false,
                }
            })
            .map(|k| k as i64)
            .collect();
        assert_eq!(got, brute, "n = {n}");
    }
}

fn random_s(rng: &mut impl Rng) -> Rational {
    let h = rng.gen_range(1i64..=12);
    let t = if rng.gen_bool(0.5) { 1 } else { rng.gen_range(1i64..=12) };
    Rational::new(h.into(), t.into())
}

#[test]
fn second_order_coefficients_match_the_textbook_form() {
    // n/x − s x² + [3(s²n)^{1/3}] x − [3(sn²)^{1/3}] = ⌊[3(s²n)^{1/3}](n/s)^{1/3} − [3(sn²)^{1/3}]⌋ + k,
    // multiplied through by t·x.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.gen_range(1_000u64..10_000_000_000_000) | 1;
        let s = random_s(&mut rng);
        let Some((a, c)) = common::trap_constants(&nat(n), 2, &s) else { continue };
        let eq = build_trap(&TrapSpec::new(nat(n), 2, s.clone(), 0, 0)).unwrap();
        let (h, t) = (s.numer().clone(), s.denom().clone());
        assert_eq!(eq.bracket_coeffs, a);
        assert_eq!(eq.constant_c, c);
        let expected = vec![BigInt::from(n) * &t, -(&t * &a[1]), &t * &a[0], -h];
        assert_eq!(eq.poly_base.coeffs(), &expected[..], "n = {n}, s = {s}");
        checked += 1;
    }
}

#[test]
fn third_order_coefficients_match_the_textbook_form() {
    // n/x + s x³ − [4(s³n)^{1/4}] x² + [6(s²n²)^{1/4}] x − [4(sn³)^{1/4}] = C + k
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.gen_range(1_000u64..10_000_000_000_000) | 1;
        let s = random_s(&mut rng);
        let Some((a, c)) = common::trap_constants(&nat(n), 3, &s) else { continue };
        let eq = build_trap(&TrapSpec::new(nat(n), 3, s.clone(), 0, 0)).unwrap();
        let (h, t) = (s.numer().clone(), s.denom().clone());
        assert_eq!(eq.bracket_coeffs, a);
        assert_eq!(eq.constant_c, c);
        let expected = vec![BigInt::from(n) * &t, -(&t * &a[2]), &t * &a[1], -(&t * &a[0]), h];
        assert_eq!(eq.poly_base.coeffs(), &expected[..], "n = {n}, s = {s}");
        checked += 1;
    }
}

#[test]
fn exact_cube_anchor() {
    for w in (3u64..400).step_by(2) {
        let eq = build_trap(&TrapSpec::new(nat(w.pow(3)), 2, Rational::from_integer(1.into()), 0, 0)).unwrap();
        assert!(eq.roots_at(0, false).contains(&nat(w)), "w = {w}");
        assert_eq!(eq.step_of(&nat(w)), Some(BigInt::zero()));
    }
}

#[test]
fn step_of_agrees_with_roots() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let n = rng.gen_range(10_000u64..100_000_000) | 1;
        let order = rng.gen_range(1u32..=4);
        let eq = TrapEquation::for_target(&nat(n), order, &random_s(&mut rng)).unwrap();
        for d in (1..200u64).filter(|d| n % d == 0) {
            let k = eq.step_of(&nat(d)).unwrap();
            if let Some(k) = k.to_i64() {
                assert!(eq.roots_at(k, false).contains(&nat(d)), "n = {n}, order = {order}, d = {d}");
            }
        }
    }
}

fn odd_n() -> impl Strategy<Value = u64> {
    (1u64..5_000_000).prop_map(|v| 2 * v + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_hit_divides_n(n in odd_n(), order in 1u32..=3, lo in -30i64..30, len in 0i64..40) {
        let spec = TrapSpec::new(nat(n), order, Rational::from_integer(1.into()), lo, lo + len);
        for h in scan(&spec).unwrap() {
            prop_assert!(nat(n).is_multiple_of(&h.divisor));
            prop_assert!(h.divisor > nat(1) && h.divisor < nat(n));
        }
    }

    #[test]
    fn scan_output_is_independent_of_workers(n in odd_n(), order in 1u32..=2, workers in 2usize..9) {
        let spec = TrapSpec::new(nat(n), order, Rational::from_integer(1.into()), -300, 300);
        let one = scan(&spec).unwrap();
        let many = scan_with(&spec, &ScanOptions { workers, ..ScanOptions::default() }).unwrap();
        prop_assert_eq!(one, many);
    }
}
