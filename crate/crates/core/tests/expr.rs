mod common;

use common::*;
use gencontact::expr::{eval_at, parse, Evaluator};
use proptest::prelude::*;

fn xyz() -> Vec<String> {
    vec!["x".into(), "y".into(), "z".into()]
}

#[test]
fn sin_two_z_has_exact_jets() {
    let e = parse("sin(2*z)", &xyz()).unwrap();
    let p = [0.1, -0.2, 0.35];
    let j = Evaluator::new(&p).eval(&e, 2).to_jet2();
    assert!((j.value.re - (0.7f64).sin()).abs() < 1e-15);
    assert!((j.grad[2].re - 2.0 * (0.7f64).cos()).abs() < 1e-15);
    assert!((j.hess[2][2].re + 4.0 * (0.7f64).sin()).abs() < 1e-14);
    assert_eq!(j.grad[0].norm(), 0.0);
}

#[test]
fn unknown_coordinate_is_named() {
    let err = parse("sin(2*w)", &xyz()).unwrap_err();
    assert!(err.to_string().contains('w'), "{}", err);
    assert_eq!(err.offset, 6);
}

#[test]
fn positional_names_and_powers() {
    let e = parse("x1^2 - 3*x3/x2 + exp(-x1) + sqrt(4) + log(x2)", &xyz()).unwrap();
    let p = [0.5, 2.0, 1.0];
    let want = 0.25 - 1.5 + (-0.5f64).exp() + 2.0 + (2.0f64).ln();
    assert!((eval_at(&e, &p).re - want).abs() < 1e-14);
}

#[test]
fn malformed_input_reports_offset_and_expected_tokens() {
    let err = parse("x + * y", &xyz()).unwrap_err();
    assert_eq!(err.offset, 4);
    assert!(!err.expected.is_empty());
    assert!(parse("sin(x", &xyz()).is_err());
    assert!(parse("", &xyz()).is_err());
    assert!(parse("x y", &xyz()).is_err());
}

#[test]
fn whitespace_is_ignored() {
    let a = parse(" x*( y +2 ) ", &xyz()).unwrap();
    let b = parse("x*(y+2)", &xyz()).unwrap();
    assert_eq!(eval_at(&a, &[0.3, 0.4, 0.0]), eval_at(&b, &[0.3, 0.4, 0.0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn infix_round_trip(f in field(3), p in point(3)) {
        let s = f.to_infix(&xyz()).unwrap();
        let back = parse(&s, &xyz()).unwrap();
        let (a, b) = (eval_at(&f, &p), eval_at(&back, &p));
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()), "{} vs {} for {}", a, b, s);
    }
}
