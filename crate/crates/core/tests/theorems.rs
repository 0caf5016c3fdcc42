//! The curvature identities and the evolution equations hold identically, so
//! their residuals must stay at rounding level at random regular points.

mod common;

use shapemap_core::curvature::{fn_bracket_11, fn_bracket_table, vertical_identity_residuals, ExprTensorField};
use shapemap_core::shape::{evolution_residual_directional, evolution_residual_total};
use shapemap_core::VariableLayout;

const POINTS: usize = 100;
const TOL: f64 = 1e-7;

#[test]
fn vertical_curvature_identities() {
    for case in common::cases() {
        let mut rng = common::rng(0xB0F);
        let mut worst: f64 = 0.0;
        for _ in 0..POINTS {
            let p = common::jet_point(&mut rng, &case, 0.5);
            let r = vertical_identity_residuals(&case.sys, &case.dir, &p).unwrap();
            worst = worst.max(r.max());
        }
        assert!(worst <= TOL, "{}: {worst:e}", case.name);
        if case.name == "exp2" {
            assert!(worst <= 1e-9, "{worst:e}");
        }
    }
}

#[test]
fn shape_evolution_equations() {
    for case in common::cases() {
        let mut rng = common::rng(0xB0F);
        let (mut directional, mut total): (f64, f64) = (0.0, 0.0);
        for _ in 0..POINTS {
            let b = common::base_point(&mut rng, &case);
            directional = directional.max(evolution_residual_directional(&case.sys, &case.z, &case.dir, &b).unwrap().max);
            total = total.max(evolution_residual_total(&case.sys, &case.z, &case.dir, &b).unwrap().max);
        }
        assert!(directional <= TOL, "{}: directional {directional:e}", case.name);
        assert!(total <= TOL, "{}: total {total:e}", case.name);
        if case.name == "exp2" {
            assert!(directional <= 1e-10 && total <= 1e-10);
        }
    }
}

#[test]
fn perturbed_system_keeps_its_identities_but_not_the_congruence() {
    let (sys, z, dir) = common::coupled();
    let other = shapemap_core::geometry::PdeSystem::parse(
        sys.layout(),
        &[("u", "x1", "x1", "u + 4*w + 0.3*(u_x2 - w) + 0.1*u_x1^2"), ("w", "x1", "x2", "sin(w_x1 - w)*u")],
    )
    .unwrap();
    let b = shapemap_core::geometry::BasePoint::new(vec![0.2, -0.3], vec![0.7, 1.1]);
    let p = z.jet_lift(&b).unwrap();
    assert!(vertical_identity_residuals(&other, &dir, &p).unwrap().max() <= TOL);
    assert!(evolution_residual_directional(&other, &z, &dir, &b).unwrap().max > 1e-3);
    assert!(evolution_residual_total(&other, &z, &dir, &b).unwrap().max > 1e-3);
    assert!(evolution_residual_directional(&sys, &z, &dir, &b).unwrap().max <= TOL);
}

fn quadratic_fields() -> (ExprTensorField, ExprTensorField) {
    let l = VariableLayout::new(["x1", "x2"], ["y"]).unwrap();
    let k = ExprTensorField::parse(
        &l,
        &[
            "x1*y", "0", "sin(x2)", "0", "1", //
            "0", "y_x1", "x1", "0", "0", //
            "1", "x2^2", "0", "y", "0", //
            "0", "0", "x1*x2", "1", "y_x2", //
            "exp(x1)", "0", "0", "0", "y*y_x1",
        ],
    )
    .unwrap();
    let m = ExprTensorField::parse(
        &l,
        &[
            "1", "y", "0", "0", "0", //
            "x2", "0", "0", "y_x2", "0", //
            "0", "0", "cos(x1)", "0", "x1", //
            "y_x1", "0", "0", "0", "0", //
            "0", "x1*y", "0", "1", "x2",
        ],
    )
    .unwrap();
    (k, m)
}

#[test]
fn frolicher_nijenhuis_bracket_is_symmetric_and_alternating() {
    let (k, l) = quadratic_fields();
    let mut rng = common::rng(5);
    for _ in 0..10 {
        let p: Vec<f64> = (0..5).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let kl = fn_bracket_table(&k, &l, &p).unwrap();
        let lk = fn_bracket_table(&l, &k, &p).unwrap();
        assert!(kl.max_abs_diff(&lk) <= 1e-10);
        for a in 0..5 {
            for b in 0..5 {
                for c in 0..5 {
                    assert!((kl[[a, b, c]] + kl[[a, c, b]]).abs() <= 1e-12);
                }
            }
        }
        assert_eq!(fn_bracket_11(&k, &l, &p, 1, 3).unwrap(), (0..5).map(|a| kl[[a, 1, 3]]).collect::<Vec<_>>());
    }
}

#[test]
fn frolicher_nijenhuis_bracket_against_vector_field_pairing() {
    // [[K,L]](X,Y) = [KX,LY] + [LX,KY] − K([LX,Y] + [X,LY]) − L([KX,Y] + [X,KY])
    // on coordinate fields, with the Lie brackets taken by central differences.
    let (k, l) = quadratic_fields();
    let p = [0.3, -0.2, 0.8, 0.1, -0.5];
    let eval = |f: &ExprTensorField, q: &[f64]| shapemap_core::curvature::TensorField::eval(f, q).unwrap();
    let column = |f: &ExprTensorField, q: &[f64], b: usize| -> Vec<f64> {
        let t = eval(f, q);
        (0..5).map(|a| t[[a, b]]).collect()
    };
    let h = 1e-5;
    let partial = |g: &dyn Fn(&[f64]) -> Vec<f64>, d: usize| -> Vec<f64> {
        let mut up = p.to_vec();
        let mut down = p.to_vec();
        up[d] += h;
        down[d] -= h;
        g(&up).iter().zip(g(&down)).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    };
    // [X, Y]^a = X^d ∂_d Y^a − Y^d ∂_d X^a
    let lie = |x: &dyn Fn(&[f64]) -> Vec<f64>, y: &dyn Fn(&[f64]) -> Vec<f64>| -> Vec<f64> {
        let (xv, yv) = (x(&p), y(&p));
        let mut out = vec![0.0; 5];
        for d in 0..5 {
            let (dy, dx) = (partial(y, d), partial(x, d));
            for a in 0..5 {
                out[a] += xv[d] * dy[a] - yv[d] * dx[a];
            }
        }
        out
    };
    let apply = |f: &ExprTensorField, w: Vec<f64>| -> Vec<f64> {
        let t = eval(f, &p);
        (0..5).map(|a| (0..5).map(|b| t[[a, b]] * w[b]).sum()).collect()
    };
    let unit = |b: usize| move |_: &[f64]| -> Vec<f64> { (0..5).map(|a| if a == b { 1.0 } else { 0.0 }).collect() };
    for (b, c) in [(0, 1), (2, 4), (3, 0)] {
        let kx = |q: &[f64]| column(&k, q, b);
        let lx = |q: &[f64]| column(&l, q, b);
        let ky = |q: &[f64]| column(&k, q, c);
        let ly = |q: &[f64]| column(&l, q, c);
        let (x, y) = (unit(b), unit(c));
        let t1 = lie(&kx, &ly);
        let t2 = lie(&lx, &ky);
        let s1: Vec<f64> = lie(&lx, &y).iter().zip(lie(&x, &ly)).map(|(a, b)| a + b).collect();
        let s2: Vec<f64> = lie(&kx, &y).iter().zip(lie(&x, &ky)).map(|(a, b)| a + b).collect();
        let (t3, t4) = (apply(&k, s1), apply(&l, s2));
        let exact = fn_bracket_11(&k, &l, &p, b, c).unwrap();
        for a in 0..5 {
            let oracle = t1[a] + t2[a] - t3[a] - t4[a];
            assert!((exact[a] - oracle).abs() <= 1e-7, "({b},{c})[{a}]: {} vs {oracle}", exact[a]);
        }
    }
}
