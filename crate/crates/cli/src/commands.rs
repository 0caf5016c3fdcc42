use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shapemap_core::collapse::{collapse_scan, surface_sample, SurfaceGrid};
use shapemap_core::curvature::{canonical_curvature, jacobi_plus, partial_canonical_curvature, r_plus, vertical_identity_residuals};
use shapemap_core::geometry::{commutator_residual, embedded_residual, BasePoint, JetPoint};
use shapemap_core::shape::{evolution_residual_directional, evolution_residual_total, shape_operator, total_shape, traces};
use shapemap_core::{Error, Expression, Scope};

use crate::args::{Common, Point, VerifyArgs};
use crate::config::{Config, Model, Source};
use crate::error::{CliError, Status};

pub const VALIDATE_TOL: f64 = 1e-8;
pub const VERIFY_TOL: f64 = 1e-6;

type Res = Result<Status, CliError>;

pub struct Context<'a> {
    pub config: &'a Config,
    pub source: &'a Source,
    pub model: &'a Model,
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

/// CSV cells use 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::Writer::from_writer(out)
}

impl Context<'_> {
    fn names(&self) -> Vec<String> {
        self.model.layout.restrict(Scope::Base).names().map(str::to_string).collect()
    }

    fn jet_names(&self) -> Vec<String> {
        self.model.layout.names().map(str::to_string).collect()
    }

    fn describe(&self, coords: &[f64]) -> String {
        let names = if coords.len() == self.model.layout.len() { self.jet_names() } else { self.names() };
        names.iter().zip(coords).map(|(k, v)| format!("{k} = {v}")).collect::<Vec<_>>().join(", ")
    }

    fn base_points(&self, given: &[Point]) -> Result<Vec<BasePoint>, CliError> {
        let dim = self.model.layout.n() + self.model.layout.m();
        let raw: Vec<Vec<f64>> = if !given.is_empty() {
            given.iter().map(|p| p.0.clone()).collect()
        } else if !self.config.run.points.is_empty() {
            self.config.run.points.clone()
        } else {
            vec![self.config.run.start.clone()]
        };
        raw.into_iter()
            .map(|p| {
                if p.len() != dim {
                    return Err(CliError::Usage(format!("points need {dim} coordinates ({})", self.names().join(", "))));
                }
                Ok(BasePoint::from_slice(self.model.layout.n(), &p))
            })
            .collect()
    }

    fn warn_if_not_embedded(&mut self, b: &BasePoint) -> Result<(), CliError> {
        let r = embedded_residual(&self.model.sys, &self.model.z, b)?;
        if r > VALIDATE_TOL {
            writeln!(self.err, "warning: congruence is not embedded at ({}): residual {r:e}", self.describe(&b.to_vec()))?;
        }
        Ok(())
    }
}

pub fn validate(cx: &mut Context, args: &Common) -> Res {
    let (n, m) = (cx.model.layout.n(), cx.model.layout.m());
    let dim = n + m;
    let step = cx.config.run.grid_step;
    let centre = &cx.config.run.start;
    let total = 5usize.pow(dim as u32);
    let mut worst = (0.0f64, centre.clone());
    let mut worst_commutator = (0.0f64, centre.clone());
    let mut rows = Vec::with_capacity(if args.csv { total } else { 0 });
    for k in 0..total {
        let mut digits = k;
        let coords: Vec<f64> = centre
            .iter()
            .map(|c| {
                let d = (digits % 5) as f64 - 2.0;
                digits /= 5;
                c + d * step
            })
            .collect();
        let b = BasePoint::from_slice(n, &coords);
        let embedded = embedded_residual(&cx.model.sys, &cx.model.z, &b)?;
        let commutator = commutator_residual(&cx.model.z, &b)?;
        if embedded > worst.0 {
            worst = (embedded, coords.clone());
        }
        if commutator > worst_commutator.0 {
            worst_commutator = (commutator, coords.clone());
        }
        if args.csv {
            rows.push((coords, embedded, commutator));
        }
    }
    let ok = worst.0 <= VALIDATE_TOL && worst_commutator.0 <= VALIDATE_TOL;
    if args.csv {
        let mut header = cx.names();
        let mut w = csv_writer(cx.out);
        header.extend(["embedded".to_string(), "commutator".to_string()]);
        w.write_record(&header)?;
        for (coords, e, c) in rows {
            w.write_record(coords.iter().chain([e, c].iter()).map(|&v| num(v)))?;
        }
        w.flush()?;
    } else {
        writeln!(cx.out, "grid points      {total} (step {step} around {})", cx.describe(centre))?;
        writeln!(cx.out, "embedded max     {:.3e} at ({})", worst.0, cx.describe(&worst.1))?;
        writeln!(cx.out, "commutator max   {:.3e} at ({})", worst_commutator.0, cx.describe(&worst_commutator.1))?;
        writeln!(cx.out, "status           {}", if ok { "ok" } else { "FAILED" })?;
    }
    if !ok {
        let (r, at) = if worst.0 > VALIDATE_TOL { ("embedded", &worst) } else { ("commutator", &worst_commutator) };
        writeln!(cx.err, "validation failed: {r} residual {:e} > {VALIDATE_TOL:e} at ({})", at.0, cx.describe(&at.1))?;
        return Ok(Status::ValidationFailed);
    }
    Ok(Status::Ok)
}

/// Rows `(point, quantity, component, value)` shared by `shape` and `curvature`.
struct Report {
    rows: Vec<(usize, String, String, f64)>,
}

impl Report {
    fn push(&mut self, point: usize, quantity: &str, component: Vec<&str>, value: f64) {
        self.rows.push((point, quantity.to_string(), component.join("."), value));
    }

    fn write(self, cx: &mut Context, csv: bool, headers: &[String]) -> Result<(), CliError> {
        if csv {
            let mut w = csv_writer(cx.out);
            w.write_record(["point", "quantity", "component", "value"])?;
            for (p, q, c, v) in self.rows {
                w.write_record([p.to_string(), q, c, num(v)])?;
            }
            w.flush()?;
            return Ok(());
        }
        let mut current = None;
        for (p, q, c, v) in self.rows {
            if current != Some(p) {
                writeln!(cx.out, "point {p}: {}", headers[p])?;
                current = Some(p);
            }
            let label = if c.is_empty() { q } else { format!("{q}[{}]", c.replace('.', "][")) };
            writeln!(cx.out, "  {label:<28} {v:>22.15e}")?;
        }
        Ok(())
    }
}

pub fn shape(cx: &mut Context, args: &Common) -> Res {
    let dir = cx.model.direction(args.direction.as_deref())?;
    let points = cx.base_points(&args.points)?;
    let ind = cx.model.layout.independent().to_vec();
    let dep = cx.model.layout.dependent().to_vec();
    let mut report = Report { rows: Vec::new() };
    let mut headers = Vec::new();
    for (k, b) in points.iter().enumerate() {
        cx.warn_if_not_embedded(b)?;
        headers.push(cx.describe(&b.to_vec()));
        let a = shape_operator(&cx.model.sys, &cx.model.z, &dir, b)?;
        let t = total_shape(&cx.model.sys, &cx.model.z, &dir, b)?;
        for (s, sn) in dep.iter().enumerate() {
            for (nu, nn) in dep.iter().enumerate() {
                report.push(k, "A", vec![sn, nn], a.0[[s, nu]]);
            }
        }
        for (s, sn) in dep.iter().enumerate() {
            for (nu, nn) in dep.iter().enumerate() {
                for (i, iname) in ind.iter().enumerate() {
                    report.push(k, "Ahat", vec![sn, nn, iname], t.0[[s, nu, i]]);
                }
            }
        }
        let (tr, form) = traces(&a, &t);
        report.push(k, "Tr", vec![], tr);
        for (i, iname) in ind.iter().enumerate() {
            report.push(k, "TrForm", vec![iname], form.0[i]);
        }
    }
    report.write(cx, args.csv, &headers)?;
    Ok(Status::Ok)
}

fn jet_points(cx: &Context, given: &[Point]) -> Result<Vec<JetPoint>, CliError> {
    let (n, m) = (cx.model.layout.n(), cx.model.layout.m());
    let raw: Vec<Vec<f64>> = if !given.is_empty() {
        given.iter().map(|p| p.0.clone()).collect()
    } else if !cx.config.run.points.is_empty() {
        cx.config.run.points.clone()
    } else {
        vec![cx.config.run.start.clone()]
    };
    raw.into_iter()
        .map(|p| {
            if p.len() == n + m + n * m {
                Ok(JetPoint::from_slice(n, m, &p))
            } else if p.len() == n + m {
                Ok(cx.model.z.jet_lift(&BasePoint::from_slice(n, &p))?)
            } else {
                Err(CliError::Usage(format!("points need {} (base) or {} (jet) coordinates", n + m, n + m + n * m)))
            }
        })
        .collect()
}

pub fn curvature(cx: &mut Context, args: &Common) -> Res {
    let dir = cx.model.direction(args.direction.as_deref())?;
    let points = jet_points(cx, &args.points)?;
    let ind = cx.model.layout.independent().to_vec();
    let dep = cx.model.layout.dependent().to_vec();
    let (n, a) = (ind.len(), dir.adapted());
    let mut report = Report { rows: Vec::new() };
    let mut headers = Vec::new();
    for (pt, p) in points.iter().enumerate() {
        headers.push(cx.describe(&p.to_vec()));
        let sys = &cx.model.sys;
        let b = canonical_curvature(sys, p)?.0;
        let rp = partial_canonical_curvature(sys, &dir, p)?;
        let phi = jacobi_plus(sys, &dir, p)?.0;
        let mixed = r_plus(sys, &dir, p)?;
        for (s, sn) in dep.iter().enumerate() {
            for (k, kn) in ind.iter().enumerate() {
                for i in 0..n {
                    for j in i + 1..n {
                        report.push(pt, "R", vec![sn, kn, &ind[i], &ind[j]], b[[s, k, i, j]]);
                    }
                }
            }
        }
        for (s, sn) in dep.iter().enumerate() {
            for i in 0..n {
                for j in i + 1..n {
                    report.push(pt, "Rplus", vec![sn, &ind[i], &ind[j]], rp[[s, i, j]]);
                }
            }
        }
        for (s, sn) in dep.iter().enumerate() {
            for (i, iname) in ind.iter().enumerate() {
                for (nu, nn) in dep.iter().enumerate() {
                    report.push(pt, "PhiPlus", vec![sn, iname, nn], phi[[s, i, nu]]);
                }
            }
        }
        for (s, sn) in dep.iter().enumerate() {
            for (i, iname) in ind.iter().enumerate() {
                for (q, qn) in ind.iter().enumerate().filter(|&(q, _)| q != a) {
                    for (nu, nn) in dep.iter().enumerate() {
                        report.push(pt, "rplus", vec![sn, iname, qn, nn], mixed.c[[s, i, q, nu]]);
                    }
                }
            }
        }
        for (i, iname) in ind.iter().enumerate() {
            for (q, qn) in ind.iter().enumerate().filter(|&(q, _)| q != a) {
                report.push(pt, "dv", vec![iname, qn], mixed.dv[[i, q]]);
            }
        }
    }
    report.write(cx, args.csv, &headers)?;
    Ok(Status::Ok)
}

pub fn collapse(cx: &mut Context, args: &Common) -> Res {
    let dir = cx.model.direction(args.direction.as_deref())?;
    let start = match args.points.first() {
        Some(p) => cx.base_points(std::slice::from_ref(p))?.remove(0),
        None => BasePoint::from_slice(cx.model.layout.n(), &cx.config.run.start),
    };
    cx.warn_if_not_embedded(&start)?;
    let report = collapse_scan(&cx.model.sys, &cx.model.z, &dir, &start, cx.config.run.span, &cx.config.scan_options())?;
    let a = dir.adapted();
    let adapted = cx.model.layout.independent()[a].clone();
    if args.csv {
        let mut w = csv_writer(cx.out);
        let mut header: Vec<String> = vec!["s".into()];
        header.extend(cx.model.layout.restrict(Scope::Base).names().map(str::to_string));
        header.extend(["C", "logVolume", "mu"].map(String::from));
        w.write_record(&header)?;
        for s in &report.samples {
            let mut row = vec![num(s.s)];
            row.extend(s.point.to_vec().into_iter().map(num));
            row.extend([num(s.c), num(s.log_volume), num(s.mu)]);
            w.write_record(&row)?;
        }
        w.flush()?;
    } else {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.9}"));
        writeln!(cx.out, "direction        {adapted}")?;
        writeln!(cx.out, "start            {}", cx.describe(&start.to_vec()))?;
        writeln!(cx.out, "reason           {}", report.reason)?;
        writeln!(cx.out, "detected         {}", report.detected)?;
        writeln!(cx.out, "s_detect         {}", opt(report.s_detect))?;
        writeln!(cx.out, "s_extrapolated   {}", opt(report.s_extrapolated))?;
        writeln!(cx.out, "{:<16} {}", format!("{adapted}_collapse"), opt(report.s_extrapolated.map(|s| start.x[a] + s)))?;
        writeln!(cx.out, "samples          {}", report.samples.len())?;
        if let Some(last) = report.samples.last() {
            writeln!(cx.out, "last sample      s = {:.9}, C = {:.6e}, logVolume = {:.9}", last.s, last.c, last.log_volume)?;
        }
    }
    if let Some(e) = &report.error {
        writeln!(cx.err, "error: curve stopped: {e}")?;
        return Ok(Status::DomainError);
    }
    Ok(Status::Ok)
}

pub fn verify(cx: &mut Context, args: &VerifyArgs) -> Res {
    let dir = cx.model.direction(args.common.direction.as_deref())?;
    let v = &cx.config.verify;
    let seed = args.seed.unwrap_or(v.seed);
    let count = args.samples.unwrap_or(v.points);
    let (n, sys, z) = (cx.model.layout.n(), &cx.model.sys, &cx.model.z);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = ["vertical", "partial", "evolution", "directional", "total"];
    let mut worst = [0.0f64; 5];
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for k in 0..count {
        let coords: Vec<f64> = v.bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
        let offsets: Vec<f64> = (0..n * cx.model.layout.m()).map(|_| rng.gen_range(-v.jet_spread..=v.jet_spread)).collect();
        let b = BasePoint::from_slice(n, &coords);
        let measured = (|| -> Result<[f64; 5], Error> {
            let mut p = z.jet_lift(&b)?;
            for (slot, d) in p.yx.iter_mut().flatten().zip(&offsets) {
                *slot += d;
            }
            let ids = vertical_identity_residuals(sys, &dir, &p)?;
            Ok([
                ids.vertical,
                ids.partial,
                ids.evolution,
                evolution_residual_directional(sys, z, &dir, &b)?.max,
                evolution_residual_total(sys, z, &dir, &b)?.max,
            ])
        })();
        match measured {
            Ok(r) => {
                for (w, x) in worst.iter_mut().zip(r) {
                    *w = w.max(x);
                }
                rows.push((k, coords, r));
            }
            Err(e @ Error::Domain { .. }) | Err(e @ Error::SingularFrame(_)) => skipped.push((k, e)),
            Err(e) => return Err(e.into()),
        }
    }
    if rows.is_empty() && count > 0 {
        let (_, e) = skipped.swap_remove(0);
        return Err(e.into());
    }
    let ok = worst.iter().all(|&w| w <= VERIFY_TOL);
    if args.common.csv {
        let mut header: Vec<String> = vec!["sample".into()];
        header.extend(cx.names());
        let mut w = csv_writer(cx.out);
        header.extend(labels.map(String::from));
        w.write_record(&header)?;
        for (k, coords, r) in &rows {
            let mut row = vec![k.to_string()];
            row.extend(coords.iter().chain(r).map(|&x| num(x)));
            w.write_record(&row)?;
        }
        w.flush()?;
    } else {
        writeln!(cx.out, "seed             {seed:#x}")?;
        writeln!(cx.out, "points           {} ({} skipped)", rows.len(), skipped.len())?;
        let titles = ["vertical identity", "partial identity", "Q+ evolution", "directional shape", "total shape"];
        for (title, w) in titles.iter().zip(worst) {
            writeln!(cx.out, "{title:<18} {w:.3e}")?;
        }
        writeln!(cx.out, "status           {}", if ok { "ok" } else { "FAILED" })?;
    }
    for (k, e) in &skipped {
        writeln!(cx.err, "warning: sample {k} skipped: {e}")?;
    }
    if !ok {
        writeln!(cx.err, "verification failed: residual above {VERIFY_TOL:e}")?;
        return Ok(Status::VerificationFailed);
    }
    Ok(Status::Ok)
}

pub fn surface(cx: &mut Context, args: &Common) -> Res {
    let Some(s) = &cx.config.surface else {
        return Err(cx.source.error("surface", "the surface command needs a [surface] section"));
    };
    let dir = cx.model.direction(args.direction.as_deref())?;
    let layout = &cx.model.layout;
    let label = layout.independent_index(&s.label).expect("checked on load");
    let starts = (0..s.count)
        .map(|k| {
            let value = s.from + (s.to - s.from) * k as f64 / (s.count - 1) as f64;
            let mut x = s.base.clone();
            x[label] = value;
            (value, x)
        })
        .collect();
    let ind = layout.restrict(Scope::Independent);
    let initial = s
        .initial
        .iter()
        .map(|text| Expression::parse(text, &ind).map_err(|e| cx.source.error("surface.initial", format!("surface.initial: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let grid = SurfaceGrid { starts, initial, s_min: s.s_min, s_max: s.s_max, h: s.h, stride: s.stride };
    let rows = surface_sample(&cx.model.z, &dir, &grid)?;
    let mut w = csv_writer(cx.out);
    let mut header: Vec<String> = vec!["s".into(), "label".into()];
    header.extend(layout.restrict(Scope::Base).names().map(str::to_string));
    w.write_record(&header)?;
    for row in rows {
        let mut record = vec![num(row.s), num(row.label)];
        record.extend(row.point.to_vec().into_iter().map(num));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(Status::Ok)
}
