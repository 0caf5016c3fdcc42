mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::Rng;
use shapemap_core::{DerivativeRequest, Error, Expression, ParseError, Scope, VariableLayout};

const CORPUS: [&str; 20] = [
    "a*b + u",
    "sin(a)*cos(b)",
    "exp(u_a)*u",
    "log(u + a)",
    "sqrt(a^2 + b^2 + u_b^2)",
    "tan(0.3*a) - cot(b + 0.2)",
    "u^3 - 2*u_a*u_b",
    "a^b",
    "(a + u)/(b + 2)",
    "abs(u_a - 3)*b",
    "exp(-a^2)*sin(u*b)",
    "1/(1 + u_a^2)",
    "log(1 + exp(u_b))",
    "u^2.5 + a^-2",
    "cos(a*u + b*u_a)^2",
    "sqrt(u)*log(b)",
    "u_a*u_b/u",
    "-a^2 + 2^u",
    "sin(cos(tan(0.5*b)))",
    "e^(a*b) - pi*u_b",
];

fn layout() -> VariableLayout {
    VariableLayout::new(["a", "b"], ["u"]).unwrap()
}

fn random_point(rng: &mut impl Rng) -> Vec<f64> {
    vec![
        rng.gen_range(0.5..1.5),
        rng.gen_range(0.5..1.5),
        rng.gen_range(0.5..1.5),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    ]
}

fn shifted(p: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut q = p.to_vec();
    for &(k, d) in moves {
        q[k] += d;
    }
    q
}

fn close(exact: f64, approx: f64, tol: f64) -> bool {
    (exact - approx).abs() <= tol * exact.abs().max(1.0)
}

#[test]
fn first_derivatives_match_central_differences() {
    let l = layout();
    let mut rng = common::rng(7);
    for text in CORPUS {
        let f = Expression::parse(text, &l).unwrap();
        for _ in 0..5 {
            let p = random_point(&mut rng);
            for k in 0..l.len() {
                let h = 1e-6;
                let fd = (f.evaluate(&shifted(&p, &[(k, h)])).unwrap() - f.evaluate(&shifted(&p, &[(k, -h)])).unwrap())
                    / (2.0 * h);
                let exact = f.derivative(&DerivativeRequest::new(p.clone(), vec![k]).unwrap()).unwrap();
                assert!(close(exact, fd, 1e-6), "{text} d/d{}: {exact} vs {fd}", l.name(k));
            }
        }
    }
}

#[test]
fn second_derivatives_match_central_differences() {
    let l = layout();
    let mut rng = common::rng(11);
    let h = 1e-4;
    for text in CORPUS {
        let f = Expression::parse(text, &l).unwrap();
        let at = |q: Vec<f64>| f.evaluate(&q).unwrap();
        let p = random_point(&mut rng);
        for i in 0..l.len() {
            for j in i..l.len() {
                let fd = if i == j {
                    (at(shifted(&p, &[(i, h)])) - 2.0 * at(p.clone()) + at(shifted(&p, &[(i, -h)]))) / (h * h)
                } else {
                    (at(shifted(&p, &[(i, h), (j, h)])) - at(shifted(&p, &[(i, h), (j, -h)]))
                        - at(shifted(&p, &[(i, -h), (j, h)]))
                        + at(shifted(&p, &[(i, -h), (j, -h)])))
                        / (4.0 * h * h)
                };
                let exact = f.derivative(&DerivativeRequest::new(p.clone(), vec![i, j]).unwrap()).unwrap();
                assert!(close(exact, fd, 1e-4), "{text} d2/d{}d{}: {exact} vs {fd}", l.name(i), l.name(j));
            }
        }
    }
}

#[test]
fn mixed_partials_commute() {
    let l = layout();
    let mut rng = common::rng(13);
    for text in CORPUS {
        let f = Expression::parse(text, &l).unwrap();
        let p = random_point(&mut rng);
        let d = |idx: Vec<usize>| f.derivative(&DerivativeRequest::new(p.clone(), idx).unwrap()).unwrap();
        for i in 0..l.len() {
            for j in 0..l.len() {
                let (ij, ji) = (d(vec![i, j]), d(vec![j, i]));
                assert!((ij - ji).abs() <= 1e-12 * ij.abs().max(1.0), "{text}: {ij} vs {ji}");
                for k in 0..l.len() {
                    let (ijk, kji) = (d(vec![i, j, k]), d(vec![k, j, i]));
                    assert!((ijk - kji).abs() <= 1e-12 * ijk.abs().max(1.0), "{text}: {ijk} vs {kji}");
                }
            }
        }
    }
}

#[test]
fn documented_values() {
    let l = common::lemniscate_layout();
    let z = Expression::parse("r*cot(t)", &l).unwrap();
    // t, theta, r, r_t, r_theta
    let at = |t: f64, r: f64| vec![t, 0.0, r, 0.0, 0.0];
    assert!(z.evaluate(&at(std::f64::consts::FRAC_PI_2, 2.0)).unwrap().abs() < 1e-15);
    assert_relative_eq!(z.evaluate(&at(std::f64::consts::FRAC_PI_4, 2.0)).unwrap(), 2.0, epsilon = 1e-15);
    let d = z.derivative(&DerivativeRequest::new(at(1.0, 2.0), vec![2]).unwrap()).unwrap();
    assert_relative_eq!(d, 0.642_092_615_934_330_7, epsilon = 1e-15);
    let d = z.derivative(&DerivativeRequest::new(at(std::f64::consts::FRAC_PI_4, 2.0), vec![0, 2]).unwrap()).unwrap();
    assert_relative_eq!(d, -2.0, epsilon = 1e-14);

    let f = Expression::parse("-2*r - r_theta^2/r", &l).unwrap();
    assert!(f.variables().contains(&4));
    let d = f.derivative(&DerivativeRequest::new(vec![0.0, 0.0, 2.0, 0.0, 5.0], vec![4, 4]).unwrap()).unwrap();
    assert_relative_eq!(d, -1.0, epsilon = 1e-15);
    assert_eq!(f.derivative(&DerivativeRequest::new(vec![0.0, 0.0, 2.0, 0.0, 5.0], vec![]).unwrap()).unwrap(), -16.5);
}

#[test]
fn derivative_order_is_bounded() {
    assert!(matches!(DerivativeRequest::new(vec![0.0], vec![0, 0, 0, 0]), Err(Error::Dimension(_))));
}

#[test]
fn parse_errors() {
    let l = common::lemniscate_layout();
    let err = Expression::parse("r +* 2", &l).unwrap_err();
    assert!(matches!(err, ParseError::Syntax { offset: 3, .. }), "{err:?}");
    assert!(matches!(Expression::parse("q + 1", &l), Err(ParseError::UnknownIdentifier { offset: 0, .. })));
    assert!(matches!(Expression::parse("sin(t, r)", &l), Err(ParseError::Arity { found: 2, .. })));
    assert!(matches!(Expression::parse("sin()", &l), Err(ParseError::Arity { found: 0, .. })));
    assert!(matches!(Expression::parse("   ", &l), Err(ParseError::Syntax { offset: 0, .. })));
    assert!(matches!(Expression::parse("2r", &l), Err(ParseError::Syntax { offset: 1, .. })));
    assert!(matches!(Expression::parse("(t + 1", &l), Err(ParseError::Syntax { offset: 6, .. })));
    assert!(matches!(Expression::parse("sin t", &l), Err(ParseError::Syntax { offset: 4, .. })));
    let base = l.restrict(Scope::Base);
    assert!(matches!(Expression::parse("r_t", &base), Err(ParseError::UnknownIdentifier { .. })));
}

#[test]
fn precedence() {
    let l = common::lemniscate_layout();
    let v = |text: &str| Expression::parse(text, &l).unwrap().evaluate(&[2.0, 3.0, 0.0, 0.0, 0.0]).unwrap();
    assert_eq!(v("-t^2"), -4.0);
    assert_relative_eq!(v("t^theta^2"), 512.0, max_relative = 1e-15);
    assert_eq!(v("2^-1^2"), 0.5);
    assert_eq!(v("t - theta - 1"), -2.0);
    assert_eq!(v("12/t/theta"), 2.0);
    assert_eq!(v("1.5e1 + .5"), 15.5);
}

#[test]
fn domain_errors_name_the_subexpression() {
    let l = common::lemniscate_layout();
    let fails = |text: &str, p: [f64; 5]| Expression::parse(text, &l).unwrap().evaluate(&p).unwrap_err();
    let zero = [0.0; 5];
    for (text, sub) in [
        ("1 + log(r)", "log(r)"),
        ("sqrt(r - 1)", "sqrt((r - 1.0))"),
        ("t/r", "(t / r)"),
        ("cot(r)", "cot(r)"),
        ("tan(pi/2 + r)", "tan(((3.141592653589793 / 2.0) + r))"),
        ("r^-1", "(r ^ (-1.0))"),
        ("(r - 1)^0.5", "((r - 1.0) ^ 0.5)"),
        ("r^t", "(r ^ t)"),
        ("exp(1000)", "exp(1000.0)"),
    ] {
        match fails(text, zero) {
            Error::Domain { source, .. } => assert_eq!(source.subexpression, sub, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
    let ok = |text: &str| Expression::parse(text, &l).unwrap().evaluate(&zero).unwrap();
    assert_eq!(ok("r^2"), 0.0);
    assert_eq!(ok("(r - 2)^3"), -8.0);
    assert_eq!(ok("abs(r - 2)"), 2.0);
}

fn expression_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0u32..1000).prop_map(|k| format!("{}", k as f64 / 8.0)),
        (1u32..50).prop_map(|k| format!("{k}e-2")),
        Just("t".to_string()),
        Just("theta".to_string()),
        Just("r".to_string()),
        Just("r_t".to_string()),
        Just("r_theta".to_string()),
        Just("pi".to_string()),
        Just("e".to_string()),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop_oneof![Just("+"), Just("-"), Just("*"), Just("/"), Just("^")])
                .prop_map(|(a, b, op)| format!("{a} {op} {b}")),
            (inner.clone(), inner.clone(), prop_oneof![Just("+"), Just("*"), Just("^")])
                .prop_map(|(a, b, op)| format!("({a}){op}({b})")),
            inner.clone().prop_map(|a| format!("-{a}")),
            (inner, prop_oneof![Just("sin"), Just("cos"), Just("tan"), Just("cot"), Just("exp"), Just("log"), Just("sqrt"), Just("abs")])
                .prop_map(|(a, f)| format!("{f}({a})")),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_round_trip(text in expression_text()) {
        let l = common::lemniscate_layout();
        let first = Expression::parse(&text, &l).unwrap();
        let printed = first.to_string();
        let second = Expression::parse(&printed, &l).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(printed, second.to_string());
    }
}
