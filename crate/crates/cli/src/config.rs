//! Configuration files.
//!
//! A configuration is a TOML document. Expressions are quoted strings; the
//! keys of `[pde]` and `[congruence]` may be written dotted (`F.r.t.theta`) or
//! quoted (`"F.r.t.theta"`). See the README for the full key list.

use std::collections::BTreeMap;
use std::fs;
use std::ops::Range;
use std::path::Path;

use shapemap_core::collapse::ScanOptions;
use shapemap_core::geometry::{Congruence, Direction, PdeSystem};
use shapemap_core::{Expression, Scope, VariableLayout};
use toml_edit::{Array, ImDocument, Item, Table, TableLike, Value};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub independent: Vec<String>,
    pub dependent: Vec<String>,
    /// Every `F.<dep>.<i>.<j>` with `i` not after `j`, in layout order; absent
    /// entries are filled with `"0"`.
    pub pde: Vec<(String, String, String, String)>,
    /// `Z.<dep>.<indep>` in layout order.
    pub congruence: Vec<(String, String, String)>,
    pub direction: DirectionConfig,
    pub run: RunConfig,
    pub verify: VerifyConfig,
    pub surface: Option<SurfaceConfig>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionConfig {
    pub adapted: String,
    pub v: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Base point `(x…, y…)` where curves start and the validation grid is centred.
    pub start: Vec<f64>,
    pub span: f64,
    pub h: f64,
    pub vol_min: f64,
    pub c_big: f64,
    pub c_max: f64,
    pub mu0: f64,
    /// Spacing of the validation grid.
    pub grid_step: f64,
    /// Points for `shape` and `curvature` when none are given on the command line.
    pub points: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub points: usize,
    /// Sampling box over `(x…, y…)`.
    pub bounds: Vec<(f64, f64)>,
    pub jet_spread: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceConfig {
    /// Independent coordinates of the curve starts; the label coordinate is overwritten.
    pub base: Vec<f64>,
    pub label: String,
    pub from: f64,
    pub to: f64,
    pub count: usize,
    /// `y` at the curve starts as functions of the independent variables.
    pub initial: Vec<String>,
    pub s_min: f64,
    pub s_max: f64,
    pub h: f64,
    pub stride: usize,
}

/// Where each key was found, for error messages.
#[derive(Clone, Debug, Default)]
pub struct Source {
    pub path: String,
    lines: BTreeMap<String, usize>,
}

impl Source {
    pub fn location(&self, key: &str) -> String {
        match self.lines.get(key) {
            Some(line) => format!("{}:{line}", self.path),
            None => self.path.clone(),
        }
    }

    pub fn error(&self, key: &str, message: impl Into<String>) -> CliError {
        CliError::Config { location: self.location(key), message: message.into() }
    }
}

struct Reader<'a> {
    text: &'a str,
    source: Source,
}

type Res<T> = Result<T, CliError>;

impl<'a> Reader<'a> {
    fn line(&self, span: Option<Range<usize>>) -> Option<usize> {
        span.map(|s| self.text[..s.start.min(self.text.len())].matches('\n').count() + 1)
    }

    fn fail(&self, span: Option<Range<usize>>, message: impl Into<String>) -> CliError {
        let location = match self.line(span) {
            Some(line) => format!("{}:{line}", self.source.path),
            None => self.source.path.clone(),
        };
        CliError::Config { location, message: message.into() }
    }

    fn record(&mut self, key: &str, span: Option<Range<usize>>) {
        if let Some(line) = self.line(span) {
            self.source.lines.insert(key.to_string(), line);
        }
    }

    fn section<'d>(&mut self, root: &'d Table, name: &str) -> Res<Option<&'d dyn TableLike>> {
        match root.get_key_value(name) {
            None => Ok(None),
            Some((key, item)) => {
                let table = item.as_table_like().ok_or_else(|| self.fail(key.span(), format!("[{name}] must be a table")))?;
                self.record(name, key.span());
                Ok(Some(table))
            }
        }
    }

    /// Keys of `table` must all be in `known`.
    fn check_keys(&self, table: &dyn TableLike, section: &str, known: &[&str]) -> Res<()> {
        for (k, _) in table.iter() {
            if !known.contains(&k) {
                let span = table.key(k).and_then(|key| key.span());
                return Err(self.fail(span, format!("unknown key {section}.{k}")));
            }
        }
        Ok(())
    }

    fn item<'d>(&mut self, table: &'d dyn TableLike, section: &str, name: &str) -> Option<(&'d Item, Option<Range<usize>>)> {
        let (key, item) = table.get_key_value(name)?;
        let span = item.span().or_else(|| key.span());
        self.record(&format!("{section}.{name}"), span.clone());
        Some((item, span))
    }

    fn float(&mut self, table: &dyn TableLike, section: &str, name: &str, default: Option<f64>) -> Res<f64> {
        match self.item(table, section, name) {
            None => default.ok_or_else(|| self.fail(None, format!("missing {section}.{name}"))),
            Some((item, span)) => {
                let value = item.as_value().and_then(as_float);
                match value {
                    Some(v) if v.is_finite() => Ok(v),
                    _ => Err(self.fail(span, format!("{section}.{name} must be a finite number"))),
                }
            }
        }
    }

    fn count(&mut self, table: &dyn TableLike, section: &str, name: &str, default: Option<u64>) -> Res<u64> {
        match self.item(table, section, name) {
            None => default.ok_or_else(|| self.fail(None, format!("missing {section}.{name}"))),
            Some((item, span)) => item
                .as_integer()
                .and_then(|v| u64::try_from(v).ok())
                .ok_or_else(|| self.fail(span, format!("{section}.{name} must be a nonnegative integer"))),
        }
    }

    fn string(&mut self, table: &dyn TableLike, section: &str, name: &str) -> Res<Option<String>> {
        match self.item(table, section, name) {
            None => Ok(None),
            Some((item, span)) => {
                item.as_str().map(|s| Some(s.to_string())).ok_or_else(|| self.fail(span, format!("{section}.{name} must be a string")))
            }
        }
    }

    fn array<'d>(&mut self, table: &'d dyn TableLike, section: &str, name: &str) -> Res<Option<(&'d Array, Option<Range<usize>>)>> {
        match self.item(table, section, name) {
            None => Ok(None),
            Some((item, span)) => match item.as_array() {
                Some(a) => Ok(Some((a, span))),
                None => Err(self.fail(span, format!("{section}.{name} must be an array"))),
            },
        }
    }

    fn strings(&mut self, table: &dyn TableLike, section: &str, name: &str) -> Res<Option<Vec<String>>> {
        let Some((array, span)) = self.array(table, section, name)? else { return Ok(None) };
        let values: Option<Vec<String>> = array.iter().map(|v| v.as_str().map(str::to_string)).collect();
        values.map(Some).ok_or_else(|| self.fail(span, format!("{section}.{name} must be an array of strings")))
    }

    fn floats(&mut self, table: &dyn TableLike, section: &str, name: &str) -> Res<Option<Vec<f64>>> {
        let Some((array, span)) = self.array(table, section, name)? else { return Ok(None) };
        float_list(array).map(Some).ok_or_else(|| self.fail(span, format!("{section}.{name} must be an array of numbers")))
    }

    fn float_rows(&mut self, table: &dyn TableLike, section: &str, name: &str) -> Res<Option<Vec<Vec<f64>>>> {
        let Some((array, span)) = self.array(table, section, name)? else { return Ok(None) };
        let rows: Option<Vec<Vec<f64>>> = array.iter().map(|row| row.as_array().and_then(float_list)).collect();
        rows.map(Some).ok_or_else(|| self.fail(span, format!("{section}.{name} must be an array of number arrays")))
    }

    /// Flatten nested dotted tables into `(path, text, span)`.
    fn leaves(&self, table: &dyn TableLike, prefix: &str, out: &mut Vec<(String, String, Option<Range<usize>>)>) -> Res<()> {
        for (k, item) in table.iter() {
            let path = if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
            if let Some(inner) = item.as_table_like() {
                self.leaves(inner, &path, out)?;
                continue;
            }
            let span = item.span().or_else(|| table.key(k).and_then(|key| key.span()));
            let text = item.as_str().ok_or_else(|| self.fail(span.clone(), format!("{path} must be an expression string")))?;
            out.push((path, text.to_string(), span));
        }
        Ok(())
    }
}

fn as_float(v: &Value) -> Option<f64> {
    v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
}

fn float_list(a: &Array) -> Option<Vec<f64>> {
    a.iter().map(as_float).collect::<Option<Vec<_>>>().filter(|v| v.iter().all(|x| x.is_finite()))
}

impl Config {
    pub fn load(path: &Path) -> Result<(Config, Source), CliError> {
        let display = path.display().to_string();
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config { location: display.clone(), message: format!("cannot read: {e}") })?;
        Config::parse(&text, &display)
    }

    /// Parse configuration text; `path` is only used in messages.
    pub fn parse(text: &str, path: &str) -> Result<(Config, Source), CliError> {
        let mut r = Reader { text, source: Source { path: path.to_string(), lines: BTreeMap::new() } };
        let doc = ImDocument::parse(text).map_err(|e| r.fail(e.span(), e.message().trim().to_string()))?;
        let root = doc.as_table();
        r.check_keys(root, "", &["space", "pde", "congruence", "direction", "run", "verify", "surface"])?;

        let space = r.section(root, "space")?.ok_or_else(|| r.fail(None, "missing [space]"))?;
        r.check_keys(space, "space", &["independent", "dependent"])?;
        let independent = r.strings(space, "space", "independent")?.ok_or_else(|| r.fail(None, "missing space.independent"))?;
        let dependent = r.strings(space, "space", "dependent")?.ok_or_else(|| r.fail(None, "missing space.dependent"))?;
        let layout = VariableLayout::new(independent.iter().map(String::as_str), dependent.iter().map(String::as_str))
            .map_err(|e| r.source.error("space.independent", e.to_string()))?;
        let (n, m) = (layout.n(), layout.m());
        if n < 2 {
            return Err(r.source.error("space.independent", "at least two independent variables are required"));
        }
        let ind = |name: &str| layout.independent_index(name);
        let dep = |name: &str| layout.dependent_index(name);

        let mut pde = vec![None; m * n * n];
        if let Some(table) = r.section(root, "pde")? {
            let mut leaves = Vec::new();
            r.leaves(table, "", &mut leaves)?;
            for (path, text, span) in leaves {
                let parts: Vec<&str> = path.split('.').collect();
                let [ "F", d, a, b ] = parts[..] else {
                    return Err(r.fail(span, format!("pde keys are F.<dependent>.<independent>.<independent>, found {path}")));
                };
                let (Some(s), Some(i), Some(j)) = (dep(d), ind(a), ind(b)) else {
                    return Err(r.fail(span, format!("{path}: unknown variable name")));
                };
                let (i, j) = (i.min(j), i.max(j));
                if pde[(s * n + i) * n + j].replace(text).is_some() {
                    return Err(r.fail(span, format!("{path}: entry given twice")));
                }
                r.record(&format!("pde.F.{d}.{}.{}", independent[i], independent[j]), span);
            }
        }
        let mut pde_entries = Vec::new();
        for s in 0..m {
            for i in 0..n {
                for j in i..n {
                    let text = pde[(s * n + i) * n + j].take().unwrap_or_else(|| "0".to_string());
                    pde_entries.push((dependent[s].clone(), independent[i].clone(), independent[j].clone(), text));
                }
            }
        }

        let table = r.section(root, "congruence")?.ok_or_else(|| r.fail(None, "missing [congruence]"))?;
        let mut z = vec![None; m * n];
        let mut leaves = Vec::new();
        r.leaves(table, "", &mut leaves)?;
        for (path, text, span) in leaves {
            let parts: Vec<&str> = path.split('.').collect();
            let ["Z", d, a] = parts[..] else {
                return Err(r.fail(span, format!("congruence keys are Z.<dependent>.<independent>, found {path}")));
            };
            let (Some(s), Some(i)) = (dep(d), ind(a)) else {
                return Err(r.fail(span, format!("{path}: unknown variable name")));
            };
            if z[s * n + i].replace(text).is_some() {
                return Err(r.fail(span, format!("{path}: entry given twice")));
            }
            r.record(&format!("congruence.{path}"), span);
        }
        let mut congruence = Vec::new();
        for s in 0..m {
            for i in 0..n {
                let text = z[s * n + i].take().ok_or_else(|| {
                    r.source.error("congruence", format!("missing Z.{}.{}", dependent[s], independent[i]))
                })?;
                congruence.push((dependent[s].clone(), independent[i].clone(), text));
            }
        }

        let direction = match r.section(root, "direction")? {
            None => DirectionConfig { adapted: independent[0].clone(), v: coordinate_v(n, 0) },
            Some(table) => {
                r.check_keys(table, "direction", &["adapted", "v"])?;
                let adapted = r.string(table, "direction", "adapted")?.unwrap_or_else(|| independent[0].clone());
                let a = ind(&adapted).ok_or_else(|| r.source.error("direction.adapted", format!("unknown coordinate {adapted:?}")))?;
                let v = r.strings(table, "direction", "v")?.unwrap_or_else(|| coordinate_v(n, a));
                if v.len() != n {
                    return Err(r.source.error("direction.v", format!("v needs {n} components, found {}", v.len())));
                }
                DirectionConfig { adapted, v }
            }
        };

        let empty = Table::new();
        let table: &dyn TableLike = r.section(root, "run")?.unwrap_or(&empty);
        r.check_keys(table, "run", &["start", "span", "h", "vol_min", "c_big", "c_max", "mu0", "grid_step", "points"])?;
        let defaults = ScanOptions::default();
        let start = r.floats(table, "run", "start")?.ok_or_else(|| r.fail(None, "missing run.start"))?;
        if start.len() != n + m {
            return Err(r.source.error("run.start", format!("run.start needs {} coordinates", n + m)));
        }
        let run = RunConfig {
            span: r.float(table, "run", "span", Some(1.0))?,
            h: r.float(table, "run", "h", Some(defaults.h))?,
            vol_min: r.float(table, "run", "vol_min", Some(defaults.vol_min))?,
            c_big: r.float(table, "run", "c_big", Some(defaults.c_big))?,
            c_max: r.float(table, "run", "c_max", Some(defaults.c_max))?,
            mu0: r.float(table, "run", "mu0", Some(defaults.mu0))?,
            grid_step: r.float(table, "run", "grid_step", Some(0.1))?,
            points: r.float_rows(table, "run", "points")?.unwrap_or_default(),
            start,
        };
        if !(run.h > 0.0) || run.span < 0.0 {
            return Err(r.source.error("run.h", "run.h must be positive and run.span nonnegative"));
        }

        let table: &dyn TableLike = r.section(root, "verify")?.unwrap_or(&empty);
        r.check_keys(table, "verify", &["seed", "points", "box", "jet_spread"])?;
        let bounds = match r.float_rows(table, "verify", "box")? {
            None => run.start.iter().map(|&c| (c - 0.5, c + 0.5)).collect(),
            Some(rows) => {
                if rows.len() != n + m || rows.iter().any(|row| row.len() != 2 || !(row[0] < row[1])) {
                    return Err(r.source.error("verify.box", format!("verify.box needs {} [lo, hi] pairs with lo < hi", n + m)));
                }
                rows.iter().map(|row| (row[0], row[1])).collect()
            }
        };
        let verify = VerifyConfig {
            seed: r.count(table, "verify", "seed", Some(0xB0F))?,
            points: r.count(table, "verify", "points", Some(100))? as usize,
            bounds,
            jet_spread: r.float(table, "verify", "jet_spread", Some(0.5))?,
        };

        let surface = match r.section(root, "surface")? {
            None => None,
            Some(table) => {
                let known = ["base", "label", "from", "to", "count", "initial", "s_min", "s_max", "h", "stride"];
                r.check_keys(table, "surface", &known)?;
                let base = r.floats(table, "surface", "base")?.unwrap_or_else(|| run.start[..n].to_vec());
                let label = r.string(table, "surface", "label")?.ok_or_else(|| r.fail(None, "missing surface.label"))?;
                let initial = r.strings(table, "surface", "initial")?.ok_or_else(|| r.fail(None, "missing surface.initial"))?;
                let s = SurfaceConfig {
                    from: r.float(table, "surface", "from", None)?,
                    to: r.float(table, "surface", "to", None)?,
                    count: r.count(table, "surface", "count", None)? as usize,
                    s_min: r.float(table, "surface", "s_min", None)?,
                    s_max: r.float(table, "surface", "s_max", None)?,
                    h: r.float(table, "surface", "h", Some(run.h))?,
                    stride: r.count(table, "surface", "stride", Some(1))? as usize,
                    base,
                    label,
                    initial,
                };
                if s.base.len() != n || ind(&s.label).is_none() || s.initial.len() != m {
                    return Err(r.source.error(
                        "surface",
                        format!("surface needs {n} base coordinates, an independent label and {m} initial expressions"),
                    ));
                }
                if s.count < 2 || s.stride == 0 || !(s.h > 0.0) || s.s_min > 0.0 || s.s_max < 0.0 {
                    return Err(r.source.error("surface", "surface needs count >= 2, stride >= 1, h > 0 and s_min <= 0 <= s_max"));
                }
                Some(s)
            }
        };

        let config = Config { independent, dependent, pde: pde_entries, congruence, direction, run, verify, surface };
        Ok((config, r.source))
    }

    /// The configuration as TOML, with every default made explicit.
    pub fn to_toml(&self) -> String {
        fn strings(v: &[String]) -> Item {
            toml_edit::value(v.iter().collect::<Array>())
        }
        fn floats(v: &[f64]) -> Item {
            toml_edit::value(v.iter().copied().collect::<Array>())
        }
        let mut doc = toml_edit::DocumentMut::new();
        let mut space = Table::new();
        space["independent"] = strings(&self.independent);
        space["dependent"] = strings(&self.dependent);
        doc["space"] = Item::Table(space);

        let mut pde = Table::new();
        for (d, i, j, text) in &self.pde {
            pde.insert(&format!("F.{d}.{i}.{j}"), toml_edit::value(text));
        }
        doc["pde"] = Item::Table(pde);
        let mut congruence = Table::new();
        for (d, i, text) in &self.congruence {
            congruence.insert(&format!("Z.{d}.{i}"), toml_edit::value(text));
        }
        doc["congruence"] = Item::Table(congruence);

        let mut direction = Table::new();
        direction["adapted"] = toml_edit::value(&self.direction.adapted);
        direction["v"] = strings(&self.direction.v);
        doc["direction"] = Item::Table(direction);

        let run = &self.run;
        let mut t = Table::new();
        t["start"] = floats(&run.start);
        for (k, v) in [
            ("span", run.span),
            ("h", run.h),
            ("vol_min", run.vol_min),
            ("c_big", run.c_big),
            ("c_max", run.c_max),
            ("mu0", run.mu0),
            ("grid_step", run.grid_step),
        ] {
            t[k] = toml_edit::value(v);
        }
        if !run.points.is_empty() {
            t["points"] = toml_edit::value(run.points.iter().map(|p| p.iter().copied().collect::<Array>()).collect::<Array>());
        }
        doc["run"] = Item::Table(t);

        let verify = &self.verify;
        let mut t = Table::new();
        t["seed"] = toml_edit::value(verify.seed as i64);
        t["points"] = toml_edit::value(verify.points as i64);
        t["box"] = toml_edit::value(verify.bounds.iter().map(|&(lo, hi)| [lo, hi].into_iter().collect::<Array>()).collect::<Array>());
        t["jet_spread"] = toml_edit::value(verify.jet_spread);
        doc["verify"] = Item::Table(t);

        if let Some(s) = &self.surface {
            let mut t = Table::new();
            t["base"] = floats(&s.base);
            t["label"] = toml_edit::value(&s.label);
            t["from"] = toml_edit::value(s.from);
            t["to"] = toml_edit::value(s.to);
            t["count"] = toml_edit::value(s.count as i64);
            t["initial"] = strings(&s.initial);
            t["s_min"] = toml_edit::value(s.s_min);
            t["s_max"] = toml_edit::value(s.s_max);
            t["h"] = toml_edit::value(s.h);
            t["stride"] = toml_edit::value(s.stride as i64);
            doc["surface"] = Item::Table(t);
        }
        doc.to_string()
    }

    pub fn scan_options(&self) -> ScanOptions {
        let r = &self.run;
        ScanOptions { h: r.h, vol_min: r.vol_min, c_big: r.c_big, c_max: r.c_max, mu0: r.mu0 }
    }
}

fn coordinate_v(n: usize, a: usize) -> Vec<String> {
    (0..n).map(|k| if k == a { "1" } else { "0" }.to_string()).collect()
}

/// The system, congruence and configured direction built from a [`Config`].
#[derive(Clone, Debug)]
pub struct Model {
    pub layout: VariableLayout,
    pub sys: PdeSystem,
    pub z: Congruence,
    pub direction: Direction,
}

impl Model {
    pub fn new(config: &Config, source: &Source) -> Result<Model, CliError> {
        let layout = VariableLayout::new(&config.independent, &config.dependent)
            .map_err(|e| source.error("space.independent", e.to_string()))?;
        let parse = |key: String, text: &str, scope: Scope| {
            Expression::parse(text, &layout.restrict(scope)).map_err(|e| source.error(&key, format!("{}: {e}", strip(&key))))
        };
        let upper = config
            .pde
            .iter()
            .map(|(d, i, j, text)| parse(format!("pde.F.{d}.{i}.{j}"), text, Scope::Jet))
            .collect::<Result<Vec<_>, _>>()?;
        let sys = PdeSystem::new(&layout, upper).map_err(|e| source.error("pde", e.to_string()))?;
        let z = config
            .congruence
            .iter()
            .map(|(d, i, text)| parse(format!("congruence.Z.{d}.{i}"), text, Scope::Base))
            .collect::<Result<Vec<_>, _>>()?;
        let z = Congruence::new(&layout, z).map_err(|e| source.error("congruence", e.to_string()))?;
        let d = &config.direction;
        let a = layout
            .independent_index(&d.adapted)
            .ok_or_else(|| source.error("direction.adapted", format!("unknown coordinate {:?}", d.adapted)))?;
        let v = d
            .v
            .iter()
            .map(|text| parse("direction.v".to_string(), text, Scope::Independent))
            .collect::<Result<Vec<_>, _>>()?;
        let direction = Direction::new(&layout, a, v).map_err(|e| source.error("direction.v", e.to_string()))?;
        Ok(Model { layout, sys, z, direction })
    }

    /// The configured direction, or `(dx^a, ∂/∂x^a)` when `name` picks another coordinate.
    pub fn direction(&self, name: Option<&str>) -> Result<Direction, CliError> {
        let Some(name) = name else { return Ok(self.direction.clone()) };
        let a = self
            .layout
            .independent_index(name)
            .ok_or_else(|| CliError::Usage(format!("--direction: unknown independent variable {name:?}")))?;
        if a == self.direction.adapted() {
            return Ok(self.direction.clone());
        }
        Ok(Direction::coordinate(&self.layout, a)?)
    }
}

fn strip(key: &str) -> &str {
    key.split_once('.').map_or(key, |(_, rest)| rest)
}
