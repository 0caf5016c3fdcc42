//! The system, its congruence and the direction pair.
//!
//! Points are dense vectors in the layout order `(x^i, y^σ, y_k^σ)`. Every
//! quantity here is computed by a function generic over [`Scalar`], so a
//! derivative of any of them along a vector field is obtained by evaluating
//! the same function on dual numbers (see [`crate::expr::dual::along`]).
//!
//! Adapted coordinates are expressed by an index rather than by permuting
//! the chart: the coordinate `x^a` named by [`Direction::adapted`] plays the
//! role of `x^1`, with `φ = dx^a` and `v^a = 1`. Tensors are therefore always
//! reported in the user's coordinate order.

use std::sync::Arc;

use crate::error::{DomainContext, Error, Result};
use crate::expr::dual::{along, seed};
use crate::expr::{Expression, Scalar, Scope, VariableLayout};
use crate::tensor::{determinant, Tensor};

/// Smallest admissible |det| of the adapted frame.
pub const FRAME_DET_MIN: f64 = 1e-12;

/// Point of the first jet bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `yx[σ][k]` is the value of `y_k^σ`.
    pub yx: Vec<Vec<f64>>,
}

impl JetPoint {
    pub fn from_slice(n: usize, m: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), n + m + n * m, "jet point has the wrong length");
        JetPoint {
            x: values[..n].to_vec(),
            y: values[n..n + m].to_vec(),
            yx: (0..m).map(|s| values[n + m + s * n..n + m + (s + 1) * n].to_vec()).collect(),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.y);
        for row in &self.yx {
            v.extend_from_slice(row);
        }
        v
    }
}

/// Point of the total space `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasePoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl BasePoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        BasePoint { x, y }
    }

    pub fn from_slice(n: usize, values: &[f64]) -> Self {
        BasePoint { x: values[..n].to_vec(), y: values[n..].to_vec() }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.y);
        v
    }
}

/// A connection-type system `y_ij^σ = F_ij^σ(x, y, y')`.
#[derive(Clone, Debug)]
pub struct PdeSystem {
    layout: VariableLayout,
    /// `[σ][i][j]`; `[σ][j][i]` shares the allocation of `[σ][i][j]`.
    table: Vec<Arc<Expression>>,
}

impl PdeSystem {
    /// Build from the upper triangle, ordered by `σ`, then `i`, then `j ≥ i`.
    pub fn new(layout: &VariableLayout, upper: Vec<Expression>) -> Result<Self> {
        let layout = layout.restrict(Scope::Jet);
        let (n, m) = (layout.n(), layout.m());
        if n < 2 || m < 1 {
            return Err(Error::Dimension(format!("need n >= 2 and m >= 1, got n = {n}, m = {m}")));
        }
        let expected = m * n * (n + 1) / 2;
        if upper.len() != expected {
            return Err(Error::Dimension(format!(
                "expected {expected} upper-triangular entries, got {}",
                upper.len()
            )));
        }
        let mut table: Vec<Option<Arc<Expression>>> = vec![None; m * n * n];
        let mut entries = upper.into_iter();
        for s in 0..m {
            for i in 0..n {
                for j in i..n {
                    let e = entries.next().expect("length checked");
                    if e.variables().iter().any(|&k| k >= layout.len()) || e.layout().n() != n {
                        return Err(Error::Dimension(format!(
                            "F.{}.{}.{} is not an expression over the jet layout",
                            layout.dependent()[s],
                            layout.independent()[i],
                            layout.independent()[j]
                        )));
                    }
                    let e = Arc::new(e);
                    table[(s * n + j) * n + i] = Some(Arc::clone(&e));
                    table[(s * n + i) * n + j] = Some(e);
                }
            }
        }
        Ok(PdeSystem { layout, table: table.into_iter().map(|e| e.expect("filled")).collect() })
    }

    /// Parse entries `(dependent, i, j, text)`; omitted entries are `0`.
    pub fn parse(layout: &VariableLayout, entries: &[(&str, &str, &str, &str)]) -> Result<Self> {
        let layout = layout.restrict(Scope::Jet);
        let (n, m) = (layout.n(), layout.m());
        let mut texts: Vec<Option<&str>> = vec![None; m * n * n];
        for &(dep, a, b, text) in entries {
            let key = || format!("F.{dep}.{a}.{b}");
            let s = layout.dependent_index(dep).ok_or_else(|| Error::Layout(format!("{}: unknown dependent {dep:?}", key())))?;
            let i = layout.independent_index(a).ok_or_else(|| Error::Layout(format!("{}: unknown independent {a:?}", key())))?;
            let j = layout.independent_index(b).ok_or_else(|| Error::Layout(format!("{}: unknown independent {b:?}", key())))?;
            let (i, j) = (i.min(j), i.max(j));
            let slot = &mut texts[(s * n + i) * n + j];
            if slot.is_some() {
                return Err(Error::Layout(format!("{}: entry given twice", key())));
            }
            *slot = Some(text);
        }
        let mut upper = Vec::with_capacity(m * n * (n + 1) / 2);
        for s in 0..m {
            for i in 0..n {
                for j in i..n {
                    let text = texts[(s * n + i) * n + j].unwrap_or("0");
                    let e = Expression::parse(text, &layout).map_err(|source| Error::Parse {
                        context: format!(
                            "F.{}.{}.{}",
                            layout.dependent()[s],
                            layout.independent()[i],
                            layout.independent()[j]
                        ),
                        source,
                    })?;
                    upper.push(e);
                }
            }
        }
        PdeSystem::new(&layout, upper)
    }

    pub fn n(&self) -> usize {
        self.layout.n()
    }

    pub fn m(&self) -> usize {
        self.layout.m()
    }

    /// Jet-scope layout.
    pub fn layout(&self) -> &VariableLayout {
        &self.layout
    }

    /// Dimension of the first jet bundle.
    pub fn jet_dim(&self) -> usize {
        self.layout.len()
    }

    pub fn f(&self, sigma: usize, i: usize, j: usize) -> &Arc<Expression> {
        let n = self.n();
        &self.table[(sigma * n + i) * n + j]
    }

    fn f_label(&self, sigma: usize, i: usize, j: usize) -> String {
        let l = &self.layout;
        format!("F.{}.{}.{}", l.dependent()[sigma], l.independent()[i], l.independent()[j])
    }

    /// All `F_ij^σ` at `p`, as `[σ][i][j]`.
    pub(crate) fn eval_f<S: Scalar>(&self, p: &[S]) -> Result<Tensor<S>> {
        let (n, m) = (self.n(), self.m());
        let mut out = Tensor::zeros(&[m, n, n]);
        for s in 0..m {
            for i in 0..n {
                for j in i..n {
                    let v = self.f(s, i, j).eval(p).at(|| self.f_label(s, i, j))?;
                    out[[s, i, j]] = v;
                    out[[s, j, i]] = v;
                }
            }
        }
        Ok(out)
    }

    /// Derivative of every `F_ij^σ` along the tangent vector `w` at `p`.
    pub(crate) fn f_along<S: Scalar>(&self, p: &[S], w: &[S]) -> Result<Tensor<S>> {
        Ok(self.eval_f(&along(p, w))?.map(|d| d.eps))
    }

    /// Partial derivatives `∂F_ij^σ/∂(var)`.
    pub(crate) fn f_partial<S: Scalar>(&self, p: &[S], var: usize) -> Result<Tensor<S>> {
        Ok(self.eval_f(&seed(p, var))?.map(|d| d.eps))
    }

    /// Components of `Γ_i = ∂/∂x^i + y_i^σ ∂/∂y^σ + F_ij^σ ∂/∂y_j^σ` given precomputed `F`.
    pub(crate) fn gamma_with<S: Scalar>(&self, i: usize, p: &[S], f: &Tensor<S>) -> Vec<S> {
        let (n, m) = (self.n(), self.m());
        let mut g = vec![S::zero(); self.jet_dim()];
        g[i] = S::one();
        for s in 0..m {
            g[n + s] = p[self.layout.jet_index(s, i)];
            for j in 0..n {
                g[self.layout.jet_index(s, j)] = f[[s, i, j]];
            }
        }
        g
    }

    pub(crate) fn gamma_vector<S: Scalar>(&self, i: usize, p: &[S]) -> Result<Vec<S>> {
        let f = self.eval_f(p)?;
        Ok(self.gamma_with(i, p, &f))
    }

    fn check_jet(&self, p: &JetPoint) -> Result<Vec<f64>> {
        let (n, m) = (self.n(), self.m());
        if p.x.len() != n || p.y.len() != m || p.yx.len() != m || p.yx.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("jet point does not match the system".into()));
        }
        Ok(p.to_vec())
    }

    pub(crate) fn check_base(&self, b: &BasePoint) -> Result<Vec<f64>> {
        if b.x.len() != self.n() || b.y.len() != self.m() {
            return Err(Error::Dimension("base point does not match the system".into()));
        }
        Ok(b.to_vec())
    }
}

/// A first-order connection `y_i^σ = Z_i^σ(x, y)` on `Y`.
#[derive(Clone, Debug)]
pub struct Congruence {
    layout: VariableLayout,
    /// `[σ][i]`, row-major.
    z: Vec<Expression>,
}

impl Congruence {
    pub fn new(layout: &VariableLayout, z: Vec<Expression>) -> Result<Self> {
        let layout = layout.restrict(Scope::Base);
        let (n, m) = (layout.n(), layout.m());
        if z.len() != n * m {
            return Err(Error::Dimension(format!("expected {} congruence components, got {}", n * m, z.len())));
        }
        for (k, e) in z.iter().enumerate() {
            if e.variables().iter().any(|&v| v >= n + m) {
                return Err(Error::Dimension(format!(
                    "Z.{}.{} references a jet variable",
                    layout.dependent()[k / n],
                    layout.independent()[k % n]
                )));
            }
        }
        Ok(Congruence { layout, z })
    }

    /// Parse entries `(dependent, independent, text)`; every component is required.
    pub fn parse(layout: &VariableLayout, entries: &[(&str, &str, &str)]) -> Result<Self> {
        let base = layout.restrict(Scope::Base);
        let (n, m) = (base.n(), base.m());
        let mut z: Vec<Option<Expression>> = vec![None; n * m];
        for &(dep, ind, text) in entries {
            let key = format!("Z.{dep}.{ind}");
            let s = base.dependent_index(dep).ok_or_else(|| Error::Layout(format!("{key}: unknown dependent")))?;
            let i = base.independent_index(ind).ok_or_else(|| Error::Layout(format!("{key}: unknown independent")))?;
            let e = Expression::parse(text, &base).map_err(|source| Error::Parse { context: key.clone(), source })?;
            if z[s * n + i].replace(e).is_some() {
                return Err(Error::Layout(format!("{key}: entry given twice")));
            }
        }
        let mut out = Vec::with_capacity(n * m);
        for (k, e) in z.into_iter().enumerate() {
            out.push(e.ok_or_else(|| {
                Error::Layout(format!("Z.{}.{} is missing", base.dependent()[k / n], base.independent()[k % n]))
            })?);
        }
        Congruence::new(&base, out)
    }

    pub fn n(&self) -> usize {
        self.layout.n()
    }

    pub fn m(&self) -> usize {
        self.layout.m()
    }

    pub fn layout(&self) -> &VariableLayout {
        &self.layout
    }

    pub fn component(&self, sigma: usize, i: usize) -> &Expression {
        &self.z[sigma * self.n() + i]
    }

    /// `Z_i^σ(b)` as `[σ][i]`.
    pub(crate) fn eval<S: Scalar>(&self, b: &[S]) -> Result<Tensor<S>> {
        let (n, m) = (self.n(), self.m());
        let mut out = Tensor::zeros(&[m, n]);
        for s in 0..m {
            for i in 0..n {
                out[[s, i]] = self.component(s, i).eval(b).at(|| {
                    format!("Z.{}.{}", self.layout.dependent()[s], self.layout.independent()[i])
                })?;
            }
        }
        Ok(out)
    }

    /// `∂Z_i^σ/∂y^ν` as `[σ][ν][i]`.
    pub(crate) fn dz_dy<S: Scalar>(&self, b: &[S]) -> Result<Tensor<S>> {
        let (n, m) = (self.n(), self.m());
        let mut out = Tensor::zeros(&[m, m, n]);
        for nu in 0..m {
            let d = self.eval(&seed(b, n + nu))?;
            for s in 0..m {
                for i in 0..n {
                    out[[s, nu, i]] = d[[s, i]].eps;
                }
            }
        }
        Ok(out)
    }

    /// Components on `Y` of `Z_i = ∂/∂x^i + Z_i^σ ∂/∂y^σ`, given `Z` values.
    pub(crate) fn z_vector_with<S: Scalar>(&self, i: usize, z: &Tensor<S>) -> Vec<S> {
        let (n, m) = (self.n(), self.m());
        let mut w = vec![S::zero(); n + m];
        w[i] = S::one();
        for s in 0..m {
            w[n + s] = z[[s, i]];
        }
        w
    }

    /// The jet point `Z(b)`: `y_i^σ := Z_i^σ(b)`.
    pub(crate) fn lift<S: Scalar>(&self, b: &[S]) -> Result<Vec<S>> {
        let z = self.eval(b)?;
        let mut p = b.to_vec();
        p.extend_from_slice(z.as_slice());
        Ok(p)
    }

    pub fn jet_lift(&self, b: &BasePoint) -> Result<JetPoint> {
        let v = self.lift(&b.to_vec())?;
        Ok(JetPoint::from_slice(self.n(), self.m(), &v))
    }
}

/// Adapted direction pair: `φ = dx^a` and `v` with `v^a = 1`.
#[derive(Clone, Debug)]
pub struct Direction {
    adapted: usize,
    v: Vec<Expression>,
}

/// Points in `[-2, 2]^n` from a Weyl sequence, used to check `v^a ≡ 1`.
fn probe_points(n: usize, count: usize) -> Vec<Vec<f64>> {
    const STEPS: [f64; 4] = [0.618_033_988_749_895, 0.414_213_562_373_095, 0.732_050_807_568_877, 0.236_067_977_499_79];
    (1..=count)
        .map(|k| (0..n).map(|i| 4.0 * ((k as f64 * STEPS[i % 4] + i as f64 * 0.1).fract()) - 2.0).collect())
        .collect()
}

impl Direction {
    pub fn new(layout: &VariableLayout, adapted: usize, v: Vec<Expression>) -> Result<Self> {
        let n = layout.n();
        if adapted >= n {
            return Err(Error::Direction(format!("adapted index {adapted} out of range")));
        }
        if v.len() != n {
            return Err(Error::Direction(format!("v has {} components, expected {n}", v.len())));
        }
        if let Some(k) = v.iter().position(|e| e.variables().iter().any(|&var| var >= n)) {
            return Err(Error::Direction(format!("v[{k}] depends on more than the independent variables")));
        }
        let va = &v[adapted];
        if va.constant_value() != Some(1.0) {
            for x in probe_points(n, 10) {
                let value = va.eval(&x).at(|| format!("v.{}", layout.independent()[adapted]))?;
                if (value - 1.0).abs() > 1e-12 {
                    return Err(Error::Direction(format!(
                        "v component of the adapted coordinate {} must be 1, found {value} at {x:?}",
                        layout.independent()[adapted]
                    )));
                }
            }
        }
        Ok(Direction { adapted, v })
    }

    /// `(dx^a, ∂/∂x^a)`.
    pub fn coordinate(layout: &VariableLayout, adapted: usize) -> Result<Self> {
        let ind = layout.restrict(Scope::Independent);
        let v = (0..layout.n())
            .map(|k| Expression::constant(if k == adapted { 1.0 } else { 0.0 }, &ind))
            .collect();
        Direction::new(layout, adapted, v)
    }

    /// Parse `v` component texts against the independent variables.
    pub fn parse(layout: &VariableLayout, adapted: &str, v: &[&str]) -> Result<Self> {
        let ind = layout.restrict(Scope::Independent);
        let a = ind
            .independent_index(adapted)
            .ok_or_else(|| Error::Direction(format!("unknown adapted coordinate {adapted:?}")))?;
        let v = v
            .iter()
            .enumerate()
            .map(|(k, text)| {
                Expression::parse(text, &ind).map_err(|source| Error::Parse {
                    context: format!("v.{}", ind.independent().get(k).map(String::as_str).unwrap_or("?")),
                    source,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Direction::new(layout, a, v)
    }

    pub fn adapted(&self) -> usize {
        self.adapted
    }

    pub fn component(&self, k: usize) -> &Expression {
        &self.v[k]
    }

    /// `v^k(x)`; only the first `n` entries of `x` are read.
    pub(crate) fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        self.v.iter().enumerate().map(|(k, e)| e.eval(x).at(|| format!("v[{k}]"))).collect()
    }

    /// `∂v^p/∂x^i` as `[i][p]`.
    pub(crate) fn jacobian<S: Scalar>(&self, x: &[S]) -> Result<Tensor<S>> {
        let n = self.v.len();
        let mut out = Tensor::zeros(&[n, n]);
        for i in 0..n {
            let d = self.eval(&seed(&x[..n], i))?;
            for p in 0..n {
                out[[i, p]] = d[p].eps;
            }
        }
        Ok(out)
    }
}

/// Semi-horizontal coefficients `H[ν][σ][k] = H_{σk}^ν` at a jet point.
#[derive(Clone, Debug, PartialEq)]
pub struct HTensor(pub Tensor<f64>);

/// `H_{σk}^ν` at a generic point, as `[ν][σ][k]`.
pub(crate) fn h_generic<S: Scalar>(sys: &PdeSystem, dir: &Direction, p: &[S]) -> Result<Tensor<S>> {
    let (n, m) = (sys.n(), sys.m());
    let a = dir.adapted;
    let v = dir.eval(&p[..n])?;
    let mut h = Tensor::zeros(&[m, m, n]);
    for sigma in 0..m {
        // ∂F_ij^ν / ∂y_a^σ
        let df = sys.f_partial(p, sys.layout().jet_index(sigma, a))?;
        for nu in 0..m {
            let mut transverse = S::zero();
            for pp in (0..n).filter(|&k| k != a) {
                for q in (0..n).filter(|&k| k != a) {
                    transverse = transverse + v[pp] * v[q] * df[[nu, pp, q]];
                }
            }
            h[[nu, sigma, a]] = (df[[nu, a, a]] - transverse).scale(0.5);
            for pp in (0..n).filter(|&k| k != a) {
                h[[nu, sigma, pp]] = (0..n).fold(S::zero(), |acc, k| acc + v[k] * df[[nu, pp, k]]);
            }
        }
    }
    Ok(h)
}

/// Components of `H_σ = ∂/∂y^σ + H_{σk}^ν ∂/∂y_k^ν` on the jet space.
pub(crate) fn h_vector<S: Scalar>(sys: &PdeSystem, h: &Tensor<S>, sigma: usize) -> Vec<S> {
    let (n, m) = (sys.n(), sys.m());
    let mut w = vec![S::zero(); sys.jet_dim()];
    w[n + sigma] = S::one();
    for nu in 0..m {
        for k in 0..n {
            w[sys.layout().jet_index(nu, k)] = h[[nu, sigma, k]];
        }
    }
    w
}

/// Apply the total derivative `Γ_i` to `f` at `p`.
pub fn gamma_apply(sys: &PdeSystem, i: usize, f: &Expression, p: &JetPoint) -> Result<f64> {
    if i >= sys.n() {
        return Err(Error::Dimension(format!("Γ index {i} out of range")));
    }
    let pv = sys.check_jet(p)?;
    if f.layout().n() != sys.n() || f.layout().m() != sys.m() {
        return Err(Error::Dimension("expression is not over the system's chart".into()));
    }
    let g = sys.gamma_vector(i, &pv)?;
    Ok(f.eval(&along(&pv, &g))?.eps)
}

/// Adapted semi-horizontal coefficients at `p`.
pub fn h_coeffs(sys: &PdeSystem, dir: &Direction, p: &JetPoint) -> Result<HTensor> {
    let pv = sys.check_jet(p)?;
    check_direction(sys, dir)?;
    Ok(HTensor(h_generic(sys, dir, &pv)?))
}

pub(crate) fn check_direction(sys: &PdeSystem, dir: &Direction) -> Result<()> {
    if dir.v.len() != sys.n() {
        return Err(Error::Dimension("direction does not match the system".into()));
    }
    Ok(())
}

/// Adapted frame `{Γ_i, H_σ, W_ν^p, ∂/∂y_a^σ}` as rows of `vectors`.
#[derive(Clone, Debug)]
pub struct SplittingFrame {
    /// `[row][component]`, rows ordered `Γ_1..Γ_n, H_1..H_m, W_ν^p (ν-major, p ≠ a), ∂/∂y_a^1..`.
    pub vectors: Tensor<f64>,
    pub determinant: f64,
}

pub fn splitting_frame(sys: &PdeSystem, dir: &Direction, p: &JetPoint) -> Result<SplittingFrame> {
    let pv = sys.check_jet(p)?;
    check_direction(sys, dir)?;
    let (n, m, dim) = (sys.n(), sys.m(), sys.jet_dim());
    let a = dir.adapted;
    let f = sys.eval_f(&pv)?;
    let h = h_generic(sys, dir, &pv)?;
    let v = dir.eval(&pv[..n])?;
    let mut rows: Vec<Vec<f64>> = (0..n).map(|i| sys.gamma_with(i, &pv, &f)).collect();
    rows.extend((0..m).map(|s| h_vector(sys, &h, s)));
    for nu in 0..m {
        for pp in (0..n).filter(|&k| k != a) {
            let mut w = vec![0.0; dim];
            w[sys.layout().jet_index(nu, pp)] = 1.0;
            w[sys.layout().jet_index(nu, a)] = -v[pp];
            rows.push(w);
        }
    }
    for s in 0..m {
        let mut w = vec![0.0; dim];
        w[sys.layout().jet_index(s, a)] = 1.0;
        rows.push(w);
    }
    let vectors = Tensor::from_fn([dim, dim], |[r, c]| rows[r][c]);
    let det = determinant(&vectors);
    if det.abs() < FRAME_DET_MIN {
        return Err(Error::SingularFrame(det.abs()));
    }
    Ok(SplittingFrame { vectors, determinant: det })
}

/// `Z_i(Z_j^σ)` at `b`, as `[σ][i][j]`.
pub(crate) fn second_z<S: Scalar>(z: &Congruence, b: &[S]) -> Result<Tensor<S>> {
    let (n, m) = (z.n(), z.m());
    let zb = z.eval(b)?;
    let mut out = Tensor::zeros(&[m, n, n]);
    for i in 0..n {
        let w = z.z_vector_with(i, &zb);
        let d = z.eval(&along(b, &w))?;
        for s in 0..m {
            for j in 0..n {
                out[[s, i, j]] = d[[s, j]].eps;
            }
        }
    }
    Ok(out)
}

/// `max |F_ij^σ(Z(b)) − Z_i(Z_j^σ)(b)|`; zero exactly when `Z` is embedded at `b`.
pub fn embedded_residual(sys: &PdeSystem, z: &Congruence, b: &BasePoint) -> Result<f64> {
    check_congruence(sys, z)?;
    let bv = sys.check_base(b)?;
    let lifted = z.lift(&bv)?;
    let f = sys.eval_f(&lifted)?;
    let zz = second_z(z, &bv)?;
    let diff = Tensor::from_fn([sys.m(), sys.n(), sys.n()], |idx| f[idx] - zz[idx]);
    Ok(diff.max_abs())
}

/// `max_{i<j,σ} |Z_i(Z_j^σ) − Z_j(Z_i^σ)|`.
pub fn commutator_residual(z: &Congruence, b: &BasePoint) -> Result<f64> {
    let bv = b.to_vec();
    if b.x.len() != z.n() || b.y.len() != z.m() {
        return Err(Error::Dimension("base point does not match the congruence".into()));
    }
    let zz = second_z(z, &bv)?;
    let mut worst: f64 = 0.0;
    for s in 0..z.m() {
        for i in 0..z.n() {
            for j in i + 1..z.n() {
                worst = worst.max((zz[[s, i, j]] - zz[[s, j, i]]).abs());
            }
        }
    }
    Ok(worst)
}

pub(crate) fn check_congruence(sys: &PdeSystem, z: &Congruence) -> Result<()> {
    if z.n() != sys.n() || z.m() != sys.m() {
        return Err(Error::Dimension("congruence does not match the system".into()));
    }
    Ok(())
}

/// Vector on `Y` of `Z_v = v^i Z_i`.
pub(crate) fn z_v<S: Scalar>(z: &Congruence, dir: &Direction, b: &[S]) -> Result<Vec<S>> {
    let (n, m) = (z.n(), z.m());
    let v = dir.eval(&b[..n])?;
    let zb = z.eval(b)?;
    let mut w = vec![S::zero(); n + m];
    w[..n].copy_from_slice(&v);
    for s in 0..m {
        w[n + s] = (0..n).fold(S::zero(), |acc, i| acc + v[i] * zb[[s, i]]);
    }
    Ok(w)
}
