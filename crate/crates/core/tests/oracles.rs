//! Published constants recomputed independently of the library code paths.

use binlab::construction::{k3_limit, lb_formula};
use binlab::delays::compute_rho;
use binlab::size::{decimal, q, to_f64, Size};
use binlab::weights::{builtin_cap, make_builtin, pi_sequence, WK4_DELTA, WK4_LAMBDA};
use num_traits::Zero;

fn lb_float(k: f64) -> f64 {
    let (a, b, c) = (k - 1.0, 2.0 * k - 1.0, 5.0 * k - 9.0);
    let tail = 1.0 / (6.0 * k - 5.0) + 1.0 / (42.0 * k - 41.0) + 1.0 / (1806.0 * k - 1805.0);
    k / a
        + k * (k - 2.0) / (a * b)
        + 2.0 * k * (k - 2.0) / (a * b * c)
        + k * (10.0 * k.powi(3) - 53.0 * k * k + 83.0 * k - 34.0) * tail / (a * b * c)
}

#[test]
fn lb_formula_agrees_with_float_evaluation() {
    for k in 4..=30u32 {
        let exact = to_f64(&lb_formula(k).unwrap());
        assert!((exact - lb_float(k as f64)).abs() < 1e-13, "k = {k}");
    }
}

#[test]
fn lb_formula_matches_printed_values() {
    let printed = [
        (4, 1.8781318, 5e-8),
        (5, 1.8410851, 5e-8),
        (6, 1.815945, 5e-7),
        (7, 1.7979, 5e-5),
        (8, 1.78437, 5e-6),
        (9, 1.77386, 5e-6),
        (10, 1.76546, 5e-6),
    ];
    for (k, value, half_ulp) in printed {
        let got = to_f64(&lb_formula(k).unwrap());
        assert!((got - value).abs() <= half_ulp, "k = {k}: {got}");
    }
}

#[test]
fn k3_limit_value() {
    let expected = q(19, 10) + q(2, 18065) + q(2, 425) + q(2, 65);
    assert_eq!(k3_limit(), expected);
    assert!((to_f64(&expected) - 1.9355858244424).abs() < 1e-10);
    assert_eq!(decimal(&expected, 5), "1.93558");
}

#[test]
fn harmonic_partial_sums() {
    let by_hand = q(1, 1) + q(1, 2) + q(1, 6) + q(1, 42) + q(1, 1806);
    assert_eq!(pi_sequence(5).partial_sum, Some(by_hand.clone()));
    assert_eq!(by_hand, q(509, 301));
    let c6: i64 = 1806 * 1807;
    assert_eq!(pi_sequence(6).partial_sum, Some(by_hand + q(1, c6)));
    assert!(pi_sequence(30).upper_rounded < q(1_691_030_207, 1_000_000_000));
}

#[test]
fn rho_solves_the_balance_equation() {
    let (rho, bound) = compute_rho(30).unwrap();
    let pi = 1.0 + 0.5 + 1.0 / 6.0 + 1.0 / 42.0 + 1.0 / 1806.0 + 1.0 / 3263442.0 + 1.0 / 10650056950806.0;
    assert!((1.0 / rho - (rho + pi)).abs() < 1e-12);
    assert!((rho - 0.4640251938).abs() < 1e-9);
    assert!((bound - 3.1550554008).abs() < 1e-9);
}

#[test]
fn wk3_cap_is_attained_by_a_tight_pair() {
    let wk3 = make_builtin("wk3").unwrap();
    // 21/13 + 997/3900 + 64/975 = 7553/3900.
    let bin = [Size::ratio(3, 5), Size::ratio(2, 5)];
    assert_eq!(wk3.total(&bin), q(7553, 3900));
    assert_eq!(builtin_cap(&wk3).unwrap(), q(581, 300));
}

#[test]
fn wk4_constants() {
    let wk4 = make_builtin("wk4").unwrap();
    assert_eq!(builtin_cap(&wk4).unwrap(), q(WK4_LAMBDA, WK4_DELTA));
    assert!((WK4_LAMBDA as f64 / WK4_DELTA as f64 - 1.880496112076).abs() < 1e-12);
    // Just above 1/2: 28/19 x plus 25124/77805.
    let x = q(1, 2) + q(1, 1000);
    let w = wk4.eval(&Size::new(x.clone()).unwrap());
    assert_eq!(w, q(28, 19) * x + q(25124, WK4_DELTA));
    assert!(wk4.eval(&Size::zero()).is_zero());
}
