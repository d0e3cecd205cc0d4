use std::collections::HashMap;

use proptest::prelude::*;
use semidae::expr::{parse, var_list, Expression};
use semidae::ExprError;

const VARS: [&str; 4] = ["t", "x1", "x2", "y1"];

/// Formulas that are defined everywhere on [-1, 1]^4.
fn formula() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        prop::sample::select(VARS.to_vec()).prop_map(str::to_string),
        (-3.0..3.0f64).prop_map(|c| format!("{c:.3}")),
        (1u32..5).prop_map(|c| c.to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/(1 + ({b})^2)")),
            (inner.clone(), 0i32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(sin({a}))")),
            inner.clone().prop_map(|a| format!("ln(2 + cos({a}))")),
            inner.clone().prop_map(|a| format!("sqrt(1 + ({a})^2)")),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, VARS.len())
}

fn parsed(src: &str) -> Expression {
    parse(src, var_list(VARS)).unwrap_or_else(|e| panic!("generated formula {src} failed: {e}"))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dual_derivative_matches_central_difference(src in formula(), z in point(), slot in 0usize..4) {
        let e = parsed(&src);
        let mut seed = vec![0.0; VARS.len()];
        seed[slot] = 1.0;
        let d = e.eval_dual(&z, &seed).unwrap();
        prop_assert_eq!(d.value, e.eval(&z).unwrap());
        let h = 1e-6;
        let (mut zp, mut zm) = (z.clone(), z.clone());
        zp[slot] += h;
        zm[slot] -= h;
        let fd = (e.eval(&zp).unwrap() - e.eval(&zm).unwrap()) / (2.0 * h);
        prop_assert!((d.derivative - fd).abs() <= 1e-6 * (1.0 + d.derivative.abs()),
            "{}: AD {} vs FD {}", src, d.derivative, fd);
    }

    #[test]
    fn symbolic_derivative_matches_dual(src in formula(), z in point(), slot in 0usize..4) {
        let e = parsed(&src);
        let mut seed = vec![0.0; VARS.len()];
        seed[slot] = 1.0;
        let d = e.eval_dual(&z, &seed).unwrap().derivative;
        let s = e.symbolic_diff(VARS[slot]).eval(&z).unwrap();
        prop_assert!(close(s, d, 1e-10), "{}: symbolic {} vs dual {}", src, s, d);
    }

    #[test]
    fn printing_round_trips(src in formula(), points in prop::collection::vec(point(), 100)) {
        let e = parsed(&src);
        let printed = e.to_string();
        let back = parsed(&printed);
        for z in &points {
            let (a, b) = (e.eval(z).unwrap(), back.eval(z).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{} vs {}: {} vs {}", src, printed, a, b);
        }
    }

    #[test]
    fn zero_seed_gives_zero_derivative(src in formula(), z in point()) {
        let e = parsed(&src);
        prop_assert_eq!(e.eval_dual(&z, &[0.0; 4]).unwrap().derivative, 0.0);
    }
}

#[test]
fn evaluation_examples() {
    let vars = var_list(["x1", "y1"]);
    let g = parse("y1^3+y1-x1^2", vars.clone()).unwrap();
    assert_eq!(g.eval(&[2.0, 1.0]).unwrap(), -2.0);
    assert_eq!(g.variable_leaf_count(), 3);

    let t = var_list(["t"]);
    assert_eq!(parse("sin(t)", t).unwrap().eval(&[0.0]).unwrap(), 0.0);

    let div = parse("x1/y1", vars.clone()).unwrap();
    assert!(matches!(div.eval(&[1.0, 0.0]), Err(ExprError::Domain { .. })));

    let env: HashMap<String, f64> = [("x1".to_string(), 3.0), ("y1".to_string(), 0.0)].into();
    let sq = parse("x1^2", vars.clone()).unwrap();
    let seed: HashMap<String, f64> = [("x1".to_string(), 1.0)].into();
    let d = sq.eval_dual_named(&env, &seed).unwrap();
    assert_eq!((d.value, d.derivative), (9.0, 6.0));

    let cubic = parse("y1^3+y1", vars.clone()).unwrap();
    let seed: HashMap<String, f64> = [("y1".to_string(), 1.0)].into();
    let env: HashMap<String, f64> = [("x1".to_string(), 0.0), ("y1".to_string(), 0.0)].into();
    let d = cubic.eval_dual_named(&env, &seed).unwrap();
    assert_eq!((d.value, d.derivative), (0.0, 1.0));
}

#[test]
fn symbolic_examples() {
    let vars = var_list(["t", "p", "q"]);
    let g = parse("q^3+q-p^2", vars.clone()).unwrap();
    let dq = g.symbolic_diff("q");
    assert_eq!(dq.eval(&[0.0, 5.0, 0.0]).unwrap(), 1.0);
    assert_eq!(dq.eval(&[0.0, 5.0, 2.0]).unwrap(), 13.0);
    assert_eq!(g.symbolic_diff("p").eval(&[0.0, 1.0, 7.0]).unwrap(), -2.0);
    let x = parse("p", vars).unwrap();
    assert!(x.symbolic_diff("t").is_zero());
}

#[test]
fn parse_errors_carry_location() {
    let vars = var_list(["x1"]);
    assert_eq!(
        parse("x1 +", vars.clone()),
        Err(ExprError::Syntax {
            pos: 4,
            message: "unexpected end of input".into()
        })
    );
    match parse("z1", vars) {
        Err(ExprError::UndeclaredVariable { name, .. }) => assert_eq!(name, "z1"),
        other => panic!("expected undeclared variable, got {other:?}"),
    }
}
