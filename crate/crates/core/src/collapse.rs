//! Curves of `Z_v`, the volume integral `∫ Tr A_Z` and collapse detection.
//!
//! Curves are integrated with classical fixed-step RK4 on the augmented state
//! `(x, y, log V, μ)`, where `d(log V)/ds = Tr A_Z` and
//! `dμ/ds = −μ Σ_σ v^i H̄_{σi}^σ`. The volume quadrature therefore uses the RK4
//! stage values, which is Simpson's rule on each step.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::{check_congruence, check_direction, z_v, BasePoint, Congruence, Direction, PdeSystem};
use crate::shape::{h_trace_raw, trace_raw};

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOptions {
    pub h: f64,
    pub vol_min: f64,
    pub c_big: f64,
    pub c_max: f64,
    pub mu0: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { h: 1e-3, vol_min: 1e-6, c_big: 1e3, c_max: 1e8, mu0: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveSample {
    pub s: f64,
    pub point: BasePoint,
    /// `Tr A_Z` at the point.
    pub c: f64,
    pub log_volume: f64,
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reason {
    VolumeThreshold,
    TraceBlowup,
    SpanExhausted,
    CurveDomainError,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::VolumeThreshold => "volume-threshold",
            Reason::TraceBlowup => "trace-blowup",
            Reason::SpanExhausted => "span-exhausted",
            Reason::CurveDomainError => "curve-domain-error",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseReport {
    pub detected: bool,
    pub reason: Reason,
    pub s_detect: Option<f64>,
    pub s_extrapolated: Option<f64>,
    pub samples: Vec<CurveSample>,
    /// The error that stopped the scan, for [`Reason::CurveDomainError`].
    pub error: Option<Error>,
}

/// Samples of an integral curve of `Z_v` at `s = 0, h, 2h, …`.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub h: f64,
    pub s: Vec<f64>,
    pub points: Vec<BasePoint>,
    /// Set when integration stopped early; the samples end at the last good point.
    pub error: Option<Error>,
}

/// Step sizes covering `[0, span]`: full steps of `h`, the last one shortened.
fn steps(span: f64, h: f64) -> Vec<f64> {
    let count = (span / h - 1e-9).ceil().max(0.0) as usize;
    (0..count).map(|k| if k + 1 < count { h } else { span - h * (count - 1) as f64 }).collect()
}

/// Right-hand side of the augmented flow; the volume and `μ` slots are only
/// filled when a system is given.
struct Flow<'a> {
    sys: Option<&'a PdeSystem>,
    z: &'a Congruence,
    dir: &'a Direction,
}

impl Flow<'_> {
    fn dim(&self) -> usize {
        self.z.n() + self.z.m()
    }

    /// Derivative of the augmented state, and `Tr A_Z` at `u`.
    fn rhs(&self, u: &[f64]) -> Result<(Vec<f64>, f64)> {
        let dim = self.dim();
        let b = &u[..dim];
        let mut du = z_v(self.z, self.dir, b)?;
        let mut c = 0.0;
        if let Some(sys) = self.sys {
            c = trace_raw(sys, self.z, self.dir, b)?;
            let div = h_trace_raw(sys, self.z, self.dir, b)?;
            du.push(c);
            du.push(-u[dim + 1] * div);
        }
        Ok((du, c))
    }

    fn rk4(&self, u: &[f64], h: f64, k1: &[f64]) -> Result<Vec<f64>> {
        let shift = |k: &[f64], f: f64| u.iter().zip(k).map(|(a, b)| a + f * h * b).collect::<Vec<_>>();
        let (k2, _) = self.rhs(&shift(k1, 0.5))?;
        let (k3, _) = self.rhs(&shift(&k2, 0.5))?;
        let (k4, _) = self.rhs(&shift(&k3, 1.0))?;
        Ok((0..u.len()).map(|j| u[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])).collect())
    }
}

fn point_of(u: &[f64], n: usize, m: usize) -> BasePoint {
    BasePoint::new(u[..n].to_vec(), u[n..n + m].to_vec())
}

fn integrate_signed(z: &Congruence, dir: &Direction, start: &BasePoint, span: f64, h: f64) -> Curve {
    let (n, m) = (z.n(), z.m());
    let flow = Flow { sys: None, z, dir };
    let mut u = start.to_vec();
    let mut s = 0.0;
    let mut curve = Curve { h, s: vec![0.0], points: vec![start.clone()], error: None };
    for dh in steps(span.abs(), h.abs()) {
        let dh = dh.copysign(h);
        let next = flow.rhs(&u).and_then(|(k1, _)| flow.rk4(&u, dh, &k1));
        match next {
            Ok(v) => u = v,
            Err(e) => {
                curve.error = Some(e);
                break;
            }
        }
        s += dh;
        curve.s.push(s);
        curve.points.push(point_of(&u, n, m));
    }
    curve
}

fn check_curve_args(z: &Congruence, dir: &Direction, start: &BasePoint, span: f64, h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Dimension(format!("step must be positive, got {h}")));
    }
    if !(span >= 0.0 && span.is_finite()) {
        return Err(Error::Dimension(format!("span must be nonnegative, got {span}")));
    }
    if start.x.len() != z.n() || start.y.len() != z.m() {
        return Err(Error::Dimension("start point does not match the congruence".into()));
    }
    if dir.adapted() >= z.n() {
        return Err(Error::Dimension("direction does not match the congruence".into()));
    }
    Ok(())
}

/// RK4 samples of `dx/ds = v(x)`, `dy^σ/ds = v^i Z_i^σ` on `[0, span]`.
pub fn integrate_curve(z: &Congruence, dir: &Direction, start: &BasePoint, span: f64, h: f64) -> Result<Curve> {
    check_curve_args(z, dir, start, span, h)?;
    Ok(integrate_signed(z, dir, start, span, h))
}

/// Augmented states `(s, u, C)` at the start and after each step in `step_sizes`.
fn augmented(
    sys: &PdeSystem,
    z: &Congruence,
    dir: &Direction,
    start: &BasePoint,
    mu0: f64,
    step_sizes: &[f64],
) -> (Vec<(f64, Vec<f64>, f64)>, Option<Error>) {
    let flow = Flow { sys: Some(sys), z, dir };
    let mut u = start.to_vec();
    u.push(0.0);
    u.push(mu0);
    let mut out = Vec::with_capacity(step_sizes.len() + 1);
    let (mut k1, c) = match flow.rhs(&u) {
        Ok(r) => r,
        Err(e) => return (out, Some(e)),
    };
    let mut s = 0.0;
    out.push((s, u.clone(), c));
    for &dh in step_sizes {
        let next = flow.rk4(&u, dh, &k1).and_then(|v| flow.rhs(&v).map(|r| (v, r)));
        match next {
            Ok((v, (k, c))) => {
                u = v;
                k1 = k;
                s += dh;
                out.push((s, u.clone(), c));
            }
            Err(e) => return (out, Some(e)),
        }
    }
    (out, None)
}

/// Solve `Z_v(μ) + μ v^i H̄_{σi}^σ = 0` along `curve` with `μ(0) = mu0`.
pub fn mu_factor(sys: &PdeSystem, z: &Congruence, dir: &Direction, curve: &Curve, mu0: f64) -> Result<Vec<f64>> {
    check_congruence(sys, z)?;
    check_direction(sys, dir)?;
    let start = curve.points.first().ok_or_else(|| Error::Dimension("empty curve".into()))?;
    let sizes: Vec<f64> = curve.s.windows(2).map(|w| w[1] - w[0]).collect();
    let (rows, error) = augmented(sys, z, dir, start, mu0, &sizes);
    if let Some(e) = error {
        return Err(e);
    }
    let dim = sys.n() + sys.m();
    Ok(rows.into_iter().map(|(_, u, _)| u[dim + 1]).collect())
}

/// Integrate from `start` over `[0, span]`, tracking `C = Tr A_Z` and the
/// volume factor, and stop at the first sign of collapse.
///
/// Collapse is declared when `exp(log V) ≤ vol_min`, when `C ≤ −c_max`, or when
/// `C` jumps from `≤ −c_big` to a positive value between two samples, which is
/// how a simple pole of `C` shows up at fixed step. Once `|C| ≥ c_big` the zero
/// of `w = 1/C` is extrapolated by a secant through the last two samples.
pub fn collapse_scan(
    sys: &PdeSystem,
    z: &Congruence,
    dir: &Direction,
    start: &BasePoint,
    span: f64,
    opts: &ScanOptions,
) -> Result<CollapseReport> {
    check_congruence(sys, z)?;
    check_direction(sys, dir)?;
    check_curve_args(z, dir, start, span, opts.h)?;
    let (n, m) = (sys.n(), sys.m());
    let flow = Flow { sys: Some(sys), z, dir };
    let mut report = CollapseReport {
        detected: false,
        reason: Reason::SpanExhausted,
        s_detect: None,
        s_extrapolated: None,
        samples: Vec::new(),
        error: None,
    };
    let fail = |mut report: CollapseReport, e: Error| {
        report.reason = Reason::CurveDomainError;
        report.error = Some(e);
        Ok(report)
    };

    let mut u = start.to_vec();
    u.push(0.0);
    u.push(opts.mu0);
    let (mut k1, c) = match flow.rhs(&u) {
        Ok(r) => r,
        Err(e) => return fail(report, e),
    };
    let sample = |s: f64, u: &[f64], c: f64| CurveSample {
        s,
        point: point_of(u, n, m),
        c,
        log_volume: u[n + m],
        mu: u[n + m + 1],
    };
    report.samples.push(sample(0.0, &u, c));
    let secant = |samples: &[CurveSample]| -> Option<f64> {
        let [.., a, b] = samples else { return None };
        let (w1, w2) = (1.0 / a.c, 1.0 / b.c);
        (w2 != w1).then(|| b.s - w2 * (b.s - a.s) / (w2 - w1))
    };
    if c <= -opts.c_max {
        report.detected = true;
        report.reason = Reason::TraceBlowup;
        report.s_detect = Some(0.0);
        report.s_extrapolated = Some(0.0);
        return Ok(report);
    }

    let mut s = 0.0;
    let mut c_prev = c;
    for dh in steps(span, opts.h) {
        let next = flow.rk4(&u, dh, &k1).and_then(|v| flow.rhs(&v).map(|r| (v, r)));
        let (v, (k, c)) = match next {
            Ok(r) => r,
            Err(e) => return fail(report, e),
        };
        s += dh;
        if c_prev <= -opts.c_big && c > 0.0 {
            report.detected = true;
            report.reason = Reason::TraceBlowup;
            report.s_detect = Some(s);
            report.s_extrapolated = secant(&report.samples);
            return Ok(report);
        }
        u = v;
        k1 = k;
        c_prev = c;
        report.samples.push(sample(s, &u, c));
        let reason = if u[n + m].exp() <= opts.vol_min {
            Some(Reason::VolumeThreshold)
        } else if c <= -opts.c_max {
            Some(Reason::TraceBlowup)
        } else {
            None
        };
        if let Some(reason) = reason {
            report.detected = true;
            report.reason = reason;
            report.s_detect = Some(s);
            report.s_extrapolated = if c.abs() >= opts.c_big { secant(&report.samples) } else { Some(s) };
            return Ok(report);
        }
    }
    Ok(report)
}

/// Initial data and sampling of a solution surface swept out by curves of `Z_v`.
#[derive(Clone, Debug)]
pub struct SurfaceGrid {
    /// Transverse label and the independent coordinates where each curve starts.
    pub starts: Vec<(f64, Vec<f64>)>,
    /// `y^σ` at the start, as expressions in the independent variables.
    pub initial: Vec<Expression>,
    pub s_min: f64,
    pub s_max: f64,
    pub h: f64,
    /// Emit every `stride`-th step.
    pub stride: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceRow {
    pub s: f64,
    pub label: f64,
    pub point: BasePoint,
}

/// Rows `(s, label, x, y)` sorted by label order then `s`.
///
/// A label whose initial data leaves the domain emits no rows; a curve that
/// leaves the domain is truncated at its last good sample.
pub fn surface_sample(z: &Congruence, dir: &Direction, grid: &SurfaceGrid) -> Result<Vec<SurfaceRow>> {
    let (n, m) = (z.n(), z.m());
    if grid.initial.len() != m {
        return Err(Error::Dimension(format!("expected {m} initial expressions, got {}", grid.initial.len())));
    }
    if let Some(e) = grid.initial.iter().find(|e| e.variables().iter().any(|&k| k >= n)) {
        return Err(Error::Dimension(format!("initial data {} depends on more than the independent variables", e.source())));
    }
    if !(grid.s_min <= 0.0 && grid.s_max >= 0.0) || grid.stride == 0 {
        return Err(Error::Dimension("surface range must contain 0 and stride must be positive".into()));
    }
    let mut rows = Vec::new();
    for (label, x0) in &grid.starts {
        if x0.len() != n {
            return Err(Error::Dimension("start point has the wrong number of coordinates".into()));
        }
        let Ok(y0) = grid.initial.iter().map(|e| e.eval(x0)).collect::<Result<Vec<f64>, _>>() else {
            continue;
        };
        let start = BasePoint::new(x0.clone(), y0);
        check_curve_args(z, dir, &start, grid.s_max, grid.h)?;
        let back = integrate_signed(z, dir, &start, -grid.s_min, -grid.h);
        let fwd = integrate_signed(z, dir, &start, grid.s_max, grid.h);
        let keep = |k: usize| k % grid.stride == 0;
        for k in (1..back.s.len()).rev().filter(|&k| keep(k)) {
            rows.push(SurfaceRow { s: back.s[k], label: *label, point: back.points[k].clone() });
        }
        for k in (0..fwd.s.len()).filter(|&k| keep(k)) {
            rows.push(SurfaceRow { s: fwd.s[k], label: *label, point: fwd.points[k].clone() });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Scope, VariableLayout};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn lemniscate() -> (PdeSystem, Congruence) {
        let l = VariableLayout::new(["t", "theta"], ["r"]).unwrap();
        let sys = PdeSystem::parse(
            &l,
            &[("r", "t", "t", "-r"), ("r", "t", "theta", "r_t*r_theta/r"), ("r", "theta", "theta", "-2*r - r_theta^2/r")],
        )
        .unwrap();
        let z = Congruence::parse(&l, &[("r", "t", "r*cot(t)"), ("r", "theta", "-r*tan(2*theta)")]).unwrap();
        (sys, z)
    }

    fn exp2() -> (PdeSystem, Congruence) {
        let l = VariableLayout::new(["x1", "x2"], ["y"]).unwrap();
        let sys = PdeSystem::parse(&l, &[("y", "x1", "x1", "y"), ("y", "x1", "x2", "2*y"), ("y", "x2", "x2", "4*y")]).unwrap();
        let z = Congruence::parse(&l, &[("y", "x1", "y"), ("y", "x2", "2*y")]).unwrap();
        (sys, z)
    }

    #[test]
    fn step_sizes_cover_the_span() {
        assert_eq!(steps(1.0, 0.25), vec![0.25; 4]);
        let s = steps(1.0, 0.3);
        assert_eq!(s.len(), 4);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(steps(0.0, 0.1).is_empty());
    }

    #[test]
    fn lemniscate_curve_follows_sine() {
        let (_, z) = lemniscate();
        let dir = Direction::coordinate(z.layout(), 0).unwrap();
        let r0 = 0.9;
        let curve = integrate_curve(&z, &dir, &BasePoint::new(vec![FRAC_PI_2, 0.2], vec![r0]), 1.0, 1e-3).unwrap();
        assert!(curve.error.is_none());
        for (s, p) in curve.s.iter().zip(&curve.points) {
            assert!((p.y[0] - r0 * (FRAC_PI_2 + s).sin()).abs() <= 1e-10);
        }
    }

    #[test]
    fn exp2_curve_is_exponential() {
        let (_, z) = exp2();
        let dir = Direction::coordinate(z.layout(), 0).unwrap();
        let curve = integrate_curve(&z, &dir, &BasePoint::new(vec![0.0, 0.0], vec![1.0]), 2.0, 1e-3).unwrap();
        let last = curve.points.last().unwrap();
        assert!((last.y[0] - 2f64.exp()).abs() <= 1e-10);
    }

    #[test]
    fn curve_stops_at_domain_error() {
        let (_, z) = lemniscate();
        let dir = Direction::coordinate(z.layout(), 0).unwrap();
        let curve = integrate_curve(&z, &dir, &BasePoint::new(vec![1.0, 0.2], vec![1.0]), 3.0, 0.25).unwrap();
        // no RK4 stage lands on the pole at t = pi
        assert!(curve.error.is_none());
        let curve = integrate_curve(&z, &dir, &BasePoint::new(vec![PI - 0.5, 0.2], vec![1.0]), 1.0, 0.25).unwrap();
        assert!(matches!(curve.error, Some(Error::Domain { .. })));
        assert_eq!(curve.s.len(), 2);
    }

    #[test]
    fn lemniscate_collapse_in_t() {
        let (sys, z) = lemniscate();
        let dir = Direction::coordinate(sys.layout(), 0).unwrap();
        let start = BasePoint::new(vec![FRAC_PI_2, 0.2], vec![0.8]);
        let report = collapse_scan(&sys, &z, &dir, &start, 2.0, &ScanOptions::default()).unwrap();
        assert!(report.detected);
        assert_eq!(report.reason, Reason::TraceBlowup);
        let t0 = report.s_extrapolated.unwrap() + FRAC_PI_2;
        assert!((t0 - PI).abs() <= 1e-3, "{t0}");
        for smp in report.samples.iter().filter(|smp| smp.s + FRAC_PI_2 <= 2.8) {
            assert!((smp.log_volume - (smp.s + FRAC_PI_2).sin().ln()).abs() <= 1e-6);
            assert_eq!(smp.mu, 1.0);
        }
    }

    #[test]
    fn lemniscate_collapse_in_theta() {
        let (sys, z) = lemniscate();
        let dir = Direction::coordinate(sys.layout(), 1).unwrap();
        let start = BasePoint::new(vec![1.0, 0.0], vec![0.8]);
        let report = collapse_scan(&sys, &z, &dir, &start, 1.0, &ScanOptions::default()).unwrap();
        assert!(report.detected);
        assert!((report.s_extrapolated.unwrap() - FRAC_PI_4).abs() <= 1e-3);
        for smp in report.samples.iter().filter(|smp| smp.s <= 0.7) {
            assert!((smp.mu - (2.0 * smp.s).cos().sqrt()).abs() <= 1e-8);
        }
    }

    #[test]
    fn exp2_does_not_collapse() {
        let (sys, z) = exp2();
        let dir = Direction::parse(sys.layout(), "x1", &["1", "0.5"]).unwrap();
        let opts = ScanOptions { h: 1e-2, ..ScanOptions::default() };
        let report = collapse_scan(&sys, &z, &dir, &BasePoint::new(vec![0.0, 0.0], vec![1.0]), 10.0, &opts).unwrap();
        assert!(!report.detected);
        assert_eq!(report.reason, Reason::SpanExhausted);
        assert_eq!(report.s_extrapolated, None);
        let last = report.samples.last().unwrap();
        assert!((last.s - 10.0).abs() < 1e-12);
        assert!((last.log_volume - 20.0).abs() <= 1e-8);
    }

    #[test]
    fn mu_matches_scan() {
        let (sys, z) = lemniscate();
        let dir = Direction::coordinate(sys.layout(), 1).unwrap();
        let start = BasePoint::new(vec![1.0, 0.0], vec![0.8]);
        let curve = integrate_curve(&z, &dir, &start, 0.5, 1e-2).unwrap();
        let mu = mu_factor(&sys, &z, &dir, &curve, 2.0).unwrap();
        assert_eq!(mu.len(), curve.s.len());
        for (s, mu) in curve.s.iter().zip(mu) {
            assert!((mu - 2.0 * (2.0 * s).cos().sqrt()).abs() <= 1e-8);
        }
    }

    #[test]
    fn surface_truncates_where_initial_data_fails() {
        let (_, z) = lemniscate();
        let dir = Direction::coordinate(z.layout(), 0).unwrap();
        let ind = z.layout().restrict(Scope::Independent);
        let grid = SurfaceGrid {
            starts: [-0.9, 0.0, 0.3].iter().map(|&th| (th, vec![FRAC_PI_2, th])).collect(),
            initial: vec![Expression::parse("sqrt(cos(2*theta))", &ind).unwrap()],
            s_min: -1.0,
            s_max: 1.0,
            h: 1e-3,
            stride: 100,
        };
        let rows = surface_sample(&z, &dir, &grid).unwrap();
        assert_eq!(rows.len(), 2 * 21);
        assert!(rows.iter().all(|r| r.label != -0.9));
        assert!(rows.windows(2).all(|w| w[0].label != w[1].label || w[0].s < w[1].s));
        for r in &rows {
            let t = r.point.x[0];
            assert!((r.point.y[0] - t.sin() * (2.0 * r.label).cos().sqrt()).abs() <= 1e-6);
        }
    }
}
