//! Curvature of the system connection and the vertical curvature identities.
//!
//! The identities are checked by realising the projectors `G`, `P`, `Q` and
//! `Q_+` as (1,1) tensor fields on the jet chart and evaluating brackets and
//! Lie derivatives from exact component derivatives. Vector-valued forms are
//! evaluated on coordinate basis pairs with `(α∧β)(X, Y) = α(X)β(Y) − α(Y)β(X)`.

use crate::error::{Error, Result};
use crate::expr::dual::{along, seed};
use crate::expr::{Expression, Scalar, VariableLayout};
use crate::geometry::{check_direction, h_generic, h_vector, Direction, JetPoint, PdeSystem};
use crate::tensor::{matmul, Tensor};

/// `B[σ][k][i][j] = [Γ_i, Γ_j]_k^σ`, the coefficient of `∂/∂y_k^σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalCurvature(pub Tensor);

impl CanonicalCurvature {
    /// Partial contraction `R_+[σ][i][j] = v^k B[σ][k][i][j]`.
    pub fn contract(&self, v: &[f64]) -> Tensor {
        let &[m, n, _, _] = self.0.shape() else { unreachable!("rank 4") };
        Tensor::from_fn([m, n, n], |[s, i, j]| (0..n).map(|k| v[k] * self.0[[s, k, i, j]]).sum())
    }
}

/// `Φ[ν][i][σ][k] = Φ_{iσk}^ν`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiTensor(pub Tensor);

/// `Φ_+[σ][i][ν] = v^k Φ_{iνk}^σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiPlus(pub Tensor);

/// Coefficients of the mixed curvature `r_+`.
#[derive(Clone, Debug, PartialEq)]
pub struct RPlusMixed {
    /// `c[σ][i][p][ν]`, coefficient of `dx^i ∧ ψ_p^ν ⊗ ∂/∂y_a^σ`; zero for `p = a`.
    pub c: Tensor,
    /// `dv[i][p] = ∂v^p/∂x^i`, entering as `−dv[i][p] dx^i ∧ ψ_p^ν ⊗ ∂/∂y_a^ν`.
    pub dv: Tensor,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityResiduals {
    /// `Q∘[[G, Q]] + R^Γ + Φ`.
    pub vertical: f64,
    /// `Q_+∘[[G, Q_+]] + R_+ + Φ_+ + r_+`.
    pub partial: f64,
    /// `Q_+∘L_{Γ_v}Q_+ + i_{Γ_v}(½R_+ + Φ_+ + r_+)`.
    pub evolution: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.vertical.max(self.partial).max(self.evolution)
    }
}

fn jet_vec(sys: &PdeSystem, p: &JetPoint) -> Result<Vec<f64>> {
    let (n, m) = (sys.n(), sys.m());
    if p.x.len() != n || p.y.len() != m || p.yx.len() != m || p.yx.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("jet point does not match the system".into()));
    }
    Ok(p.to_vec())
}

pub(crate) fn canonical_raw(sys: &PdeSystem, p: &[f64]) -> Result<Tensor> {
    let (n, m) = (sys.n(), sys.m());
    let f = sys.eval_f(p)?;
    // gf[i][σ][j][k] = Γ_i(F_jk^σ)
    let gf = (0..n).map(|i| sys.f_along(p, &sys.gamma_with(i, p, &f))).collect::<Result<Vec<_>>>()?;
    let mut b = Tensor::zeros(&[m, n, n, n]);
    for s in 0..m {
        for k in 0..n {
            for i in 0..n {
                for j in i + 1..n {
                    let value = gf[i][[s, j, k]] - gf[j][[s, i, k]];
                    b[[s, k, i, j]] = value;
                    b[[s, k, j, i]] = -value;
                }
            }
        }
    }
    Ok(b)
}

pub fn canonical_curvature(sys: &PdeSystem, p: &JetPoint) -> Result<CanonicalCurvature> {
    Ok(CanonicalCurvature(canonical_raw(sys, &jet_vec(sys, p)?)?))
}

/// `R_+[σ][i][j]` in the direction of `dir`.
pub fn partial_canonical_curvature(sys: &PdeSystem, dir: &Direction, p: &JetPoint) -> Result<Tensor> {
    check_direction(sys, dir)?;
    let pv = jet_vec(sys, p)?;
    let v = dir.eval(&pv[..sys.n()])?;
    Ok(canonical_curvature(sys, p)?.contract(&v))
}

pub(crate) fn jacobi_raw(sys: &PdeSystem, dir: &Direction, p: &[f64]) -> Result<Tensor> {
    let (n, m) = (sys.n(), sys.m());
    let f = sys.eval_f(p)?;
    let h = h_generic(sys, dir, p)?;
    // gh[i][ν][σ][k] = Γ_i(H_{σk}^ν)
    let gh = (0..n)
        .map(|i| Ok(h_generic(sys, dir, &along(p, &sys.gamma_with(i, p, &f)))?.map(|d| d.eps)))
        .collect::<Result<Vec<_>>>()?;
    // hf[σ][ν][i][k] = H_σ(F_ik^ν)
    let hf = (0..m).map(|s| sys.f_along(p, &h_vector(sys, &h, s))).collect::<Result<Vec<_>>>()?;
    Ok(Tensor::from_fn([m, n, m, n], |[nu, i, s, k]| {
        let quadratic: f64 = (0..m).map(|r| h[[r, s, i]] * h[[nu, r, k]]).sum();
        gh[i][[nu, s, k]] - hf[s][[nu, i, k]] + quadratic
    }))
}

pub(crate) fn contract_jacobi(phi: &Tensor, v: &[f64]) -> Tensor {
    let &[m, n, _, _] = phi.shape() else { unreachable!("rank 4") };
    Tensor::from_fn([m, n, m], |[s, i, nu]| (0..n).map(|k| v[k] * phi[[s, i, nu, k]]).sum())
}

pub fn jacobi(sys: &PdeSystem, dir: &Direction, p: &JetPoint) -> Result<JacobiTensor> {
    check_direction(sys, dir)?;
    Ok(JacobiTensor(jacobi_raw(sys, dir, &jet_vec(sys, p)?)?))
}

pub fn jacobi_plus(sys: &PdeSystem, dir: &Direction, p: &JetPoint) -> Result<JacobiPlus> {
    check_direction(sys, dir)?;
    let pv = jet_vec(sys, p)?;
    let v = dir.eval(&pv[..sys.n()])?;
    Ok(JacobiPlus(contract_jacobi(&jacobi_raw(sys, dir, &pv)?, &v)))
}

pub(crate) fn r_plus_raw(sys: &PdeSystem, dir: &Direction, p: &[f64]) -> Result<RPlusMixed> {
    let (n, m) = (sys.n(), sys.m());
    let a = dir.adapted();
    let v = dir.eval(&p[..n])?;
    let h = h_generic(sys, dir, p)?;
    // df[q][ν][σ][i][k] = ∂F_ik^σ / ∂y_q^ν
    let df = (0..n)
        .map(|q| (0..m).map(|nu| sys.f_partial(p, sys.layout().jet_index(nu, q))).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let delta = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
    let c = Tensor::from_fn([m, n, n, m], |[s, i, pp, nu]| {
        if pp == a {
            return 0.0;
        }
        (0..n)
            .map(|k| {
                v[k] * (v[pp] * df[a][nu][[s, i, k]] - df[pp][nu][[s, i, k]]
                    - (v[pp] * delta(i, a) - delta(i, pp)) * h[[s, nu, k]])
            })
            .sum()
    });
    Ok(RPlusMixed { c, dv: dir.jacobian(&p[..n])? })
}

pub fn r_plus(sys: &PdeSystem, dir: &Direction, p: &JetPoint) -> Result<RPlusMixed> {
    check_direction(sys, dir)?;
    r_plus_raw(sys, dir, &jet_vec(sys, p)?)
}

/// A tensor field on a chart of dimension [`TensorField::dim`], evaluable on
/// any scalar so that exact component derivatives are available.
///
/// (1,1) tensors return shape `[dim, dim]` with `K[a][b] = K^a_b`; vector
/// fields return shape `[dim]`.
pub trait TensorField {
    fn dim(&self) -> usize;
    fn eval<S: Scalar>(&self, p: &[S]) -> Result<Tensor<S>>;
}

/// A (1,1) tensor field given by a table of expressions, row-major `[a][b]`.
#[derive(Clone, Debug)]
pub struct ExprTensorField {
    dim: usize,
    table: Vec<Expression>,
}

impl ExprTensorField {
    pub fn new(layout: &VariableLayout, table: Vec<Expression>) -> Result<Self> {
        let dim = layout.len();
        if table.len() != dim * dim {
            return Err(Error::Dimension(format!("expected {} components, got {}", dim * dim, table.len())));
        }
        Ok(ExprTensorField { dim, table })
    }

    pub fn parse(layout: &VariableLayout, table: &[&str]) -> Result<Self> {
        let exprs = table
            .iter()
            .enumerate()
            .map(|(k, text)| {
                Expression::parse(text, layout).map_err(|source| Error::Parse { context: format!("component {k}"), source })
            })
            .collect::<Result<Vec<_>>>()?;
        ExprTensorField::new(layout, exprs)
    }
}

impl TensorField for ExprTensorField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval<S: Scalar>(&self, p: &[S]) -> Result<Tensor<S>> {
        let mut out = Tensor::zeros(&[self.dim, self.dim]);
        for a in 0..self.dim {
            for b in 0..self.dim {
                out[[a, b]] = self.table[a * self.dim + b].eval(p)?;
            }
        }
        Ok(out)
    }
}

/// Value and all first partials `∂_d` of a field at `p`.
fn with_partials<F: TensorField>(field: &F, p: &[f64]) -> Result<(Tensor, Vec<Tensor>)> {
    let value = field.eval(p)?;
    let partials = (0..field.dim()).map(|d| Ok(field.eval(&seed(p, d))?.map(|x| x.eps))).collect::<Result<_>>()?;
    Ok((value, partials))
}

fn check_dims<F: TensorField>(field: &F, p: &[f64]) -> Result<()> {
    if p.len() != field.dim() {
        return Err(Error::Dimension(format!("point has {} coordinates, field needs {}", p.len(), field.dim())));
    }
    Ok(())
}

/// `[[K, L]](∂_b, ∂_c)^a` for all `a, b, c`.
fn bracket_table(k: &Tensor, dk: &[Tensor], l: &Tensor, dl: &[Tensor]) -> Tensor {
    let dim = k.shape()[0];
    Tensor::from_fn([dim, dim, dim], |[a, b, c]| {
        let mut sum = 0.0;
        for d in 0..dim {
            sum += k[[d, b]] * dl[d][[a, c]] - l[[d, c]] * dk[d][[a, b]] + l[[d, b]] * dk[d][[a, c]]
                - k[[d, c]] * dl[d][[a, b]];
        }
        for e in 0..dim {
            sum -= k[[a, e]] * (dl[b][[e, c]] - dl[c][[e, b]]) + l[[a, e]] * (dk[b][[e, c]] - dk[c][[e, b]]);
        }
        sum
    })
}

/// Frölicher–Nijenhuis bracket of two vector-valued 1-forms on all coordinate pairs,
/// as `[a][b][c] = [[K, L]](∂_b, ∂_c)^a`.
pub fn fn_bracket_table<K: TensorField, L: TensorField>(k: &K, l: &L, p: &[f64]) -> Result<Tensor> {
    check_dims(k, p)?;
    check_dims(l, p)?;
    let (kv, dk) = with_partials(k, p)?;
    let (lv, dl) = with_partials(l, p)?;
    Ok(bracket_table(&kv, &dk, &lv, &dl))
}

/// `[[K, L]](∂_b, ∂_c)` at `p`.
pub fn fn_bracket_11<K: TensorField, L: TensorField>(k: &K, l: &L, p: &[f64], b: usize, c: usize) -> Result<Vec<f64>> {
    if b >= p.len() || c >= p.len() {
        return Err(Error::Dimension("basis index out of range".into()));
    }
    let t = fn_bracket_table(k, l, p)?;
    Ok((0..p.len()).map(|a| t[[a, b, c]]).collect())
}

/// `(L_X K)^a_b = X^c ∂_c K^a_b − ∂_c X^a K^c_b + K^a_c ∂_b X^c`.
pub fn lie_derivative_11<X: TensorField, K: TensorField>(x: &X, k: &K, p: &[f64]) -> Result<Tensor> {
    check_dims(x, p)?;
    check_dims(k, p)?;
    let (xv, dx) = with_partials(x, p)?;
    let (kv, dk) = with_partials(k, p)?;
    let dim = p.len();
    Ok(Tensor::from_fn([dim, dim], |[a, b]| {
        (0..dim).map(|c| xv[[c]] * dk[c][[a, b]] - dx[c][[a]] * kv[[c, b]] + kv[[a, c]] * dx[b][[c]]).sum()
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Which {
    G,
    P,
    Q,
    QPlus,
}

/// One of the projector fields of the splitting.
struct Projector<'a> {
    sys: &'a PdeSystem,
    dir: &'a Direction,
    which: Which,
}

/// `ω^σ = dy^σ − y_j^σ dx^j` as `[σ][col]`.
fn omega<S: Scalar>(sys: &PdeSystem, p: &[S]) -> Vec<Vec<S>> {
    let (n, m) = (sys.n(), sys.m());
    (0..m)
        .map(|s| {
            let mut w = vec![S::zero(); sys.jet_dim()];
            w[n + s] = S::one();
            for j in 0..n {
                w[j] = -p[sys.layout().jet_index(s, j)];
            }
            w
        })
        .collect()
}

/// `ψ_k^ν = dy_k^ν − F_ki^ν dx^i − H_{σk}^ν ω^σ` as `[ν][k][col]`.
fn psi<S: Scalar>(sys: &PdeSystem, p: &[S], f: &Tensor<S>, h: &Tensor<S>) -> Vec<Vec<Vec<S>>> {
    let (n, m) = (sys.n(), sys.m());
    let om = omega(sys, p);
    (0..m)
        .map(|nu| {
            (0..n)
                .map(|k| {
                    let mut w = vec![S::zero(); sys.jet_dim()];
                    w[sys.layout().jet_index(nu, k)] = S::one();
                    for i in 0..n {
                        w[i] = w[i] - f[[nu, k, i]];
                    }
                    for s in 0..m {
                        for (slot, o) in w.iter_mut().zip(&om[s]) {
                            *slot = *slot - h[[nu, s, k]] * *o;
                        }
                    }
                    w
                })
                .collect()
        })
        .collect()
}

impl TensorField for Projector<'_> {
    fn dim(&self) -> usize {
        self.sys.jet_dim()
    }

    fn eval<S: Scalar>(&self, p: &[S]) -> Result<Tensor<S>> {
        let (sys, n, m, dim) = (self.sys, self.sys.n(), self.sys.m(), self.sys.jet_dim());
        let f = sys.eval_f(p)?;
        let mut out = Tensor::zeros(&[dim, dim]);
        if self.which == Which::G {
            for i in 0..n {
                for (row, g) in sys.gamma_with(i, p, &f).into_iter().enumerate() {
                    out[[row, i]] = g;
                }
            }
            return Ok(out);
        }
        let h = h_generic(sys, self.dir, p)?;
        match self.which {
            Which::P => {
                let om = omega(sys, p);
                for s in 0..m {
                    let hv = h_vector(sys, &h, s);
                    for row in 0..dim {
                        for col in 0..dim {
                            out[[row, col]] = out[[row, col]] + hv[row] * om[s][col];
                        }
                    }
                }
            }
            Which::Q => {
                let ps = psi(sys, p, &f, &h);
                for nu in 0..m {
                    for k in 0..n {
                        let row = sys.layout().jet_index(nu, k);
                        for col in 0..dim {
                            out[[row, col]] = ps[nu][k][col];
                        }
                    }
                }
            }
            Which::QPlus => {
                let ps = psi(sys, p, &f, &h);
                let v = self.dir.eval(&p[..n])?;
                for s in 0..m {
                    let row = sys.layout().jet_index(s, self.dir.adapted());
                    for col in 0..dim {
                        out[[row, col]] = (0..n).fold(S::zero(), |acc, k| acc + v[k] * ps[s][k][col]);
                    }
                }
            }
            Which::G => unreachable!(),
        }
        Ok(out)
    }
}

/// `Γ_v = v^i Γ_i` as a vector field on the jet chart.
struct GammaV<'a> {
    sys: &'a PdeSystem,
    dir: &'a Direction,
}

impl TensorField for GammaV<'_> {
    fn dim(&self) -> usize {
        self.sys.jet_dim()
    }

    fn eval<S: Scalar>(&self, p: &[S]) -> Result<Tensor<S>> {
        let (sys, n) = (self.sys, self.sys.n());
        let f = sys.eval_f(p)?;
        let v = self.dir.eval(&p[..n])?;
        let mut out = Tensor::zeros(&[sys.jet_dim()]);
        for i in 0..n {
            for (row, g) in sys.gamma_with(i, p, &f).into_iter().enumerate() {
                out[[row]] = out[[row]] + v[i] * g;
            }
        }
        Ok(out)
    }
}

/// The projectors `(G, P, Q, Q_+)` at `p`, as `[row][col]` matrices.
pub fn projectors(sys: &PdeSystem, dir: &Direction, p: &JetPoint) -> Result<[Tensor; 4]> {
    check_direction(sys, dir)?;
    let pv = jet_vec(sys, p)?;
    let field = |which| Projector { sys, dir, which };
    Ok([
        field(Which::G).eval(&pv)?,
        field(Which::P).eval(&pv)?,
        field(Which::Q).eval(&pv)?,
        field(Which::QPlus).eval(&pv)?,
    ])
}

/// Residuals of the vertical curvature identities, max-norm over every
/// component and coordinate basis pair.
pub fn vertical_identity_residuals(sys: &PdeSystem, dir: &Direction, p: &JetPoint) -> Result<IdentityResiduals> {
    check_direction(sys, dir)?;
    let pv = jet_vec(sys, p)?;
    let (n, m, dim, a) = (sys.n(), sys.m(), sys.jet_dim(), dir.adapted());
    let jet = |s: usize, k: usize| sys.layout().jet_index(s, k);

    let f = sys.eval_f(&pv)?;
    let h = h_generic(sys, dir, &pv)?;
    let v = dir.eval(&pv[..n])?;
    let om = omega(sys, &pv);
    let ps = psi(sys, &pv, &f, &h);
    let b = canonical_raw(sys, &pv)?;
    let phi = jacobi_raw(sys, dir, &pv)?;
    let r_plus_b = CanonicalCurvature(b.clone()).contract(&v);
    let phi_plus = contract_jacobi(&phi, &v);
    let rp = r_plus_raw(sys, dir, &pv)?;

    let dx = |i: usize, col: usize| if i == col { 1.0 } else { 0.0 };
    let wedge = |alpha: &dyn Fn(usize) -> f64, beta: &dyn Fn(usize) -> f64, x: usize, y: usize| {
        alpha(x) * beta(y) - alpha(y) * beta(x)
    };

    let g_field = Projector { sys, dir, which: Which::G };
    let q_field = Projector { sys, dir, which: Which::Q };
    let qp_field = Projector { sys, dir, which: Which::QPlus };
    let q = q_field.eval(&pv)?;
    let qp = qp_field.eval(&pv)?;

    // Q∘[[G, Q]] + R^Γ + Φ
    let br = fn_bracket_table(&g_field, &q_field, &pv)?;
    let mut vertical: f64 = 0.0;
    for x in 0..dim {
        for y in 0..dim {
            let mut out: Vec<f64> = (0..dim).map(|r| (0..dim).map(|e| q[[r, e]] * br[[e, x, y]]).sum()).collect();
            for nu in 0..m {
                for k in 0..n {
                    let mut extra = 0.0;
                    if x < n && y < n {
                        extra += 2.0 * b[[nu, k, x, y]];
                    }
                    for i in 0..n {
                        for s in 0..m {
                            extra += phi[[nu, i, s, k]] * wedge(&|c| dx(i, c), &|c| om[s][c], x, y);
                        }
                    }
                    out[jet(nu, k)] += extra;
                }
            }
            vertical = out.iter().fold(vertical, |acc, r| acc.max(r.abs()));
        }
    }

    // ½^ε R_+ + Φ_+ + r_+ on (∂_x, ∂_y)
    let plus_form = |x: usize, y: usize, r_scale: f64| -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for s in 0..m {
            let mut acc = 0.0;
            if x < n && y < n {
                acc += r_scale * 2.0 * r_plus_b[[s, x, y]];
            }
            for i in 0..n {
                for nu in 0..m {
                    acc += phi_plus[[s, i, nu]] * wedge(&|c| dx(i, c), &|c| om[nu][c], x, y);
                    for pp in (0..n).filter(|&q| q != a) {
                        let w = wedge(&|c| dx(i, c), &|c| ps[nu][pp][c], x, y);
                        acc += rp.c[[s, i, pp, nu]] * w;
                    }
                }
            }
            out[jet(s, a)] += acc;
        }
        for nu in 0..m {
            let mut acc = 0.0;
            for i in 0..n {
                for pp in (0..n).filter(|&q| q != a) {
                    acc -= rp.dv[[i, pp]] * wedge(&|c| dx(i, c), &|c| ps[nu][pp][c], x, y);
                }
            }
            out[jet(nu, a)] += acc;
        }
        out
    };

    // Q_+∘[[G, Q_+]] + R_+ + Φ_+ + r_+
    let brp = fn_bracket_table(&g_field, &qp_field, &pv)?;
    let mut partial: f64 = 0.0;
    for x in 0..dim {
        for y in 0..dim {
            let form = plus_form(x, y, 1.0);
            for r in 0..dim {
                let lhs: f64 = (0..dim).map(|e| qp[[r, e]] * brp[[e, x, y]]).sum();
                partial = partial.max((lhs + form[r]).abs());
            }
        }
    }

    // Q_+∘L_{Γ_v}Q_+ + i_{Γ_v}(½R_+ + Φ_+ + r_+)
    let gv_field = GammaV { sys, dir };
    let gv = gv_field.eval(&pv)?;
    let lie = matmul(&qp, &lie_derivative_11(&gv_field, &qp_field, &pv)?);
    let mut evolution: f64 = 0.0;
    let forms: Vec<Vec<Vec<f64>>> = (0..dim).map(|x| (0..dim).map(|y| plus_form(x, y, 0.5)).collect()).collect();
    for r in 0..dim {
        for y in 0..dim {
            let contracted: f64 = (0..dim).map(|x| gv[[x]] * forms[x][y][r]).sum();
            evolution = evolution.max((lie[[r, y]] + contracted).abs());
        }
    }

    Ok(IdentityResiduals { vertical, partial, evolution })
}
