mod common;

use proptest::prelude::*;
use trapfactor::algorithms::{
    default_slots, fermat_factor, lehman_factor, multi_trap_factor, plan_method, FactorError, FactorReport, Method,
};
use trapfactor::traps::fermat_interval;
use trapfactor::Natural;

fn nat(v: u64) -> Natural {
    Natural::from(v)
}

fn assert_pair(report: &FactorReport) {
    let [a, b] = &report.factors[..] else {
        panic!("expected a factor pair: {report:?}");
    };
    assert_eq!(a * b, report.n);
    assert!(*a > nat(1) && a <= b);
}

#[test]
fn fermat_succeeds_exactly_on_its_interval() {
    const B: u64 = 30;
    for (n, p, _) in common::odd_semiprimes(1_000_000) {
        let inside = fermat_interval(&nat(n), B).contains(&nat(p));
        match fermat_factor(&nat(n), B) {
            Ok(r) => {
                assert!(inside, "n = {n} found outside the interval");
                assert_pair(&r);
            }
            Err(FactorError::NotFound { .. }) => assert!(!inside, "n = {n} missed inside the interval"),
            Err(e) => panic!("n = {n}: {e}"),
        }
    }
}

#[test]
fn lehman_on_small_odd_numbers() {
    for n in (9u64..20_000).step_by(2) {
        let r = lehman_factor(&nat(n)).unwrap();
        if common::is_prime(n) {
            assert!(r.prime_asserted, "n = {n}");
        } else {
            assert_pair(&r);
        }
    }
}

#[test]
fn multi_trap_on_small_odd_numbers() {
    for n in (9u64..20_000).step_by(2) {
        let r = multi_trap_factor(&nat(n), &default_slots(), None).unwrap();
        if common::is_prime(n) {
            assert!(r.prime_asserted, "n = {n}");
        } else {
            assert_pair(&r);
            if r.method == Method::MultiTrap {
                assert!(r.hit_k.is_some());
            }
        }
    }
}

fn odd_composite() -> impl Strategy<Value = u64> {
    (3u64..1_000_000, 3u64..1_000_000).prop_map(|(a, b)| (a | 1) * (b | 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn factor_pairs_multiply_back(n in odd_composite()) {
        assert_pair(&lehman_factor(&nat(n)).unwrap());
        assert_pair(&multi_trap_factor(&nat(n), &default_slots(), None).unwrap());
        if let Ok(r) = fermat_factor(&nat(n), 200) {
            assert_pair(&r);
        }
    }

    #[test]
    fn planning_is_deterministic(n in odd_composite(), lo in 3u64..2_000_000, width in 0u64..10_000) {
        let hint = Some((nat(lo), nat(lo + width)));
        prop_assert_eq!(plan_method(&nat(n), hint.clone()), plan_method(&nat(n), hint));
    }
}
