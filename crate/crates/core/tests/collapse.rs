mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use proptest::prelude::*;
use shapemap_core::collapse::{collapse_scan, integrate_curve, mu_factor, surface_sample, Reason, ScanOptions, SurfaceGrid};
use shapemap_core::curvature::jacobi_plus;
use shapemap_core::geometry::{BasePoint, Congruence, Direction, PdeSystem};
use shapemap_core::shape::shape_operator;
use shapemap_core::{Expression, Scope, VariableLayout};

fn lemniscate_t() -> (PdeSystem, Congruence, Direction) {
    let (sys, z) = common::lemniscate();
    let dir = Direction::coordinate(sys.layout(), 0).unwrap();
    (sys, z, dir)
}

/// Largest deviation of the curve from `r = r0 sin t / sin t0`.
fn curve_error(h: f64) -> f64 {
    let (_, z, dir) = lemniscate_t();
    let r0 = 1.3;
    let curve = integrate_curve(&z, &dir, &BasePoint::new(vec![FRAC_PI_2, 0.2], vec![r0]), 2.8 - FRAC_PI_2, h).unwrap();
    assert!(curve.error.is_none());
    curve.points.iter().map(|p| (p.y[0] - r0 * p.x[0].sin()).abs()).fold(0.0, f64::max)
}

#[test]
fn rk4_is_fourth_order() {
    let (coarse, fine) = (curve_error(0.1), curve_error(0.05));
    assert!(coarse / fine >= 14.0, "{coarse:e} / {fine:e}");
    assert!(curve_error(1e-3) <= 1e-12);
}

#[test]
fn curve_follows_the_transverse_coordinate() {
    let (_, z, dir) = lemniscate_t();
    let curve = integrate_curve(&z, &dir, &BasePoint::new(vec![1.0, -0.3], vec![0.9]), 1.0, 0.3).unwrap();
    assert_eq!(curve.s.len(), 5);
    assert!((curve.s[4] - 1.0).abs() < 1e-15);
    assert!(curve.points.iter().all(|p| p.x[1] == -0.3));
    assert!(integrate_curve(&z, &dir, &curve.points[0], 1.0, 0.0).is_err());
}

#[test]
fn log_volume_is_log_sine() {
    let (sys, z, dir) = lemniscate_t();
    for t0 in [1.0, FRAC_PI_2, 2.0] {
        let start = BasePoint::new(vec![t0, 0.1], vec![1.0]);
        let report = collapse_scan(&sys, &z, &dir, &start, 2.8 - t0, &ScanOptions::default()).unwrap();
        assert_eq!(report.reason, Reason::SpanExhausted);
        for sample in &report.samples {
            let t = sample.point.x[0];
            assert!((sample.log_volume.exp() - t.sin() / t0.sin()).abs() <= 1e-9, "t0 {t0}, t {t}");
        }
    }
}

#[test]
fn log_volume_derivative_is_the_trace() {
    let (sys, z, dir) = lemniscate_t();
    let h = 1e-3;
    let report = collapse_scan(&sys, &z, &dir, &BasePoint::new(vec![0.5, 0.0], vec![1.0]), 2.0, &ScanOptions::default()).unwrap();
    for w in report.samples.windows(3) {
        let slope = (w[2].log_volume - w[0].log_volume) / (2.0 * h);
        assert!((slope - w[1].c).abs() <= 10.0 * h * h, "s {}: {slope} vs {}", w[1].s, w[1].c);
    }
}

#[test]
fn mu_factor_matches_the_scan_and_the_closed_form() {
    let (sys, z) = common::lemniscate();
    let dir = Direction::coordinate(sys.layout(), 1).unwrap();
    let start = BasePoint::new(vec![1.2, 0.0], vec![0.8]);
    let curve = integrate_curve(&z, &dir, &start, 0.7, 1e-3).unwrap();
    let mu = mu_factor(&sys, &z, &dir, &curve, 1.0).unwrap();
    let report =
        collapse_scan(&sys, &z, &dir, &start, 0.7, &ScanOptions::default()).unwrap();
    assert_eq!(mu.len(), report.samples.len());
    for ((m, sample), p) in mu.iter().zip(&report.samples).zip(&curve.points) {
        assert!((m - sample.mu).abs() <= 1e-14);
        assert!((m - (2.0 * p.x[1]).cos().sqrt()).abs() <= 1e-8);
    }
}

#[test]
fn collapse_is_found_at_the_pole() {
    let (sys, z) = common::lemniscate();
    let opts = ScanOptions::default();
    let t_dir = Direction::coordinate(sys.layout(), 0).unwrap();
    let report = collapse_scan(&sys, &z, &t_dir, &BasePoint::new(vec![FRAC_PI_2, 0.1], vec![1.0]), 2.0, &opts).unwrap();
    assert!(report.detected);
    assert!((FRAC_PI_2 + report.s_extrapolated.unwrap() - PI).abs() <= 1e-3);

    let th_dir = Direction::coordinate(sys.layout(), 1).unwrap();
    let report = collapse_scan(&sys, &z, &th_dir, &BasePoint::new(vec![1.0, 0.0], vec![1.0]), 1.0, &opts).unwrap();
    assert!(report.detected);
    assert!((report.s_extrapolated.unwrap() - FRAC_PI_4).abs() <= 1e-3);
    let last = report.samples.last().unwrap();
    assert!(last.s <= report.s_detect.unwrap());
}

#[test]
fn smaller_volume_thresholds_detect_later() {
    let (sys, z, dir) = lemniscate_t();
    let start = BasePoint::new(vec![FRAC_PI_2, 0.0], vec![1.0]);
    let mut last = 0.0;
    for vol_min in [1e-1, 1e-2, 1e-3, 1e-4, 1e-6] {
        let opts = ScanOptions { vol_min, ..ScanOptions::default() };
        let report = collapse_scan(&sys, &z, &dir, &start, 2.0, &opts).unwrap();
        let s = report.s_detect.unwrap();
        assert!(s >= last, "{vol_min}: {s} < {last}");
        if report.reason == Reason::VolumeThreshold {
            let t = FRAC_PI_2 + s;
            assert!(t.sin() <= vol_min * 1.01, "{vol_min}: sin t = {}", t.sin());
        }
        last = s;
    }
}

#[test]
fn exp2_never_collapses() {
    let (sys, z) = common::exp2();
    let dir = Direction::parse(sys.layout(), "x1", &["1", "0.5"]).unwrap();
    let opts = ScanOptions { h: 1e-2, ..ScanOptions::default() };
    let report = collapse_scan(&sys, &z, &dir, &BasePoint::new(vec![0.0, 0.0], vec![1.0]), 10.0, &opts).unwrap();
    assert!(!report.detected);
    assert_eq!(report.reason, Reason::SpanExhausted);
    for sample in &report.samples {
        assert!((sample.log_volume - 2.0 * sample.s).abs() <= 1e-8);
        assert!(sample.mu == 1.0);
    }
}

#[test]
fn domain_errors_end_the_scan() {
    let (sys, _, dir) = lemniscate_t();
    // a sqrt in Z fails once r leaves its domain
    let l = sys.layout().clone();
    let bad = Congruence::parse(&l, &[("r", "t", "r*cot(t) + sqrt(2.5 - t)*0"), ("r", "theta", "-r*tan(2*theta)")]).unwrap();
    let report = collapse_scan(&sys, &bad, &dir, &BasePoint::new(vec![2.0, 0.0], vec![1.0]), 1.0, &ScanOptions::default()).unwrap();
    assert_eq!(report.reason, Reason::CurveDomainError);
    assert!(!report.detected);
    assert!(report.error.is_some());
    assert!(report.samples.last().unwrap().point.x[0] <= 2.5);
}

fn lemniscate_grid(labels: usize) -> SurfaceGrid {
    let l = common::lemniscate_layout().restrict(Scope::Independent);
    let starts = (0..labels)
        .map(|k| {
            let theta = -1.0 + 2.0 * k as f64 / (labels - 1) as f64;
            (theta, vec![FRAC_PI_2, theta])
        })
        .collect();
    SurfaceGrid {
        starts,
        initial: vec![Expression::parse("sqrt(cos(2*theta))", &l).unwrap()],
        s_min: -1.44,
        s_max: 1.5,
        h: 1e-3,
        stride: 60,
    }
}

#[test]
fn surface_reproduces_the_lemniscate() {
    let (_, z, dir) = lemniscate_t();
    let rows = surface_sample(&z, &dir, &lemniscate_grid(50)).unwrap();
    let mut labels: Vec<f64> = rows.iter().map(|r| r.label).collect();
    labels.dedup();
    assert!(labels.iter().all(|th| (2.0 * th).cos() >= 0.0));
    assert_eq!(labels.len(), (0..50).filter(|k| (2.0 * (-1.0 + 2.0 * *k as f64 / 49.0)).cos() >= 0.0).count());
    for row in &rows {
        let (t, th) = (row.point.x[0], row.point.x[1]);
        assert!((row.point.y[0] - t.sin() * (2.0 * th).cos().sqrt()).abs() <= 1e-6);
        assert!((row.s - (t - FRAC_PI_2)).abs() < 1e-12);
    }
    let per_label = rows.iter().filter(|r| r.label == labels[0]).count();
    assert_eq!(per_label, 50);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exp2_family_has_constant_shape(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0,
                                      x1 in -1.0f64..1.0, x2 in -1.0f64..1.0, y in 0.1f64..3.0) {
        let l = VariableLayout::new(["x1", "x2"], ["y"]).unwrap();
        let sys = PdeSystem::parse(&l, &[
            ("y", "x1", "x1", &format!("{:?}*y", a * a)),
            ("y", "x1", "x2", &format!("{:?}*y", a * b)),
            ("y", "x2", "x2", &format!("{:?}*y", b * b)),
        ]).unwrap();
        let z = Congruence::parse(&l, &[("y", "x1", &format!("{a:?}*y")), ("y", "x2", &format!("{b:?}*y"))]).unwrap();
        let dir = Direction::parse(&l, "x1", &["1", &format!("{c:?}")]).unwrap();
        let bp = BasePoint::new(vec![x1, x2], vec![y]);
        let shape = shape_operator(&sys, &z, &dir, &bp).unwrap();
        prop_assert!((shape.0[[0, 0]] - (a + c * b)).abs() <= 1e-12);
        let phi = jacobi_plus(&sys, &dir, &z.jet_lift(&bp).unwrap()).unwrap().0;
        prop_assert!((phi[[0, 0, 0]] + a * (a + c * b)).abs() <= 1e-10);
        prop_assert!((phi[[0, 1, 0]] + b * (a + c * b)).abs() <= 1e-10);
    }
}
