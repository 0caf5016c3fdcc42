//! Directional and total shape operators of a congruence.
//!
//! Both operators are stored in the `(ω̄, ∂/∂y)` basis, where
//! `ω̄^ν = dy^ν − Z_j^ν dx^j`. Barred quantities are evaluated at the jet
//! lift `(x, y, Z(x, y))` of a base point.

use crate::curvature::{contract_jacobi, jacobi_raw, lie_derivative_11, r_plus_raw, TensorField};
use crate::error::Result;
use crate::expr::dual::along;
use crate::expr::Scalar;
use crate::geometry::{check_congruence, check_direction, h_generic, z_v, BasePoint, Congruence, Direction, PdeSystem};
use crate::tensor::{matmul, Tensor};

/// `A[σ][ν] = A_ν^σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeMatrix(pub Tensor);

/// `A[σ][ν][i] = A_{νi}^σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TotalShape(pub Tensor);

/// The 1-form `Tr Â_Z`, `T[i] = A_{σi}^σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceForm(pub Vec<f64>);

/// Residual of an evolution equation.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionResidual {
    /// Components in the `ω̄ ⊗ ∂/∂y` basis: `[σ][ν]` for the directional
    /// equation, `[ν][ρ][i][k]` on `dx^i ∧ dx^k ∧ ω̄^ρ ⊗ ∂/∂y^ν` for the total one.
    pub components: Tensor,
    /// Largest absolute entry, including any coordinate components outside the basis above.
    pub max: f64,
}

pub(crate) fn total_shape_raw<S: Scalar>(sys: &PdeSystem, z: &Congruence, dir: &Direction, b: &[S]) -> Result<Tensor<S>> {
    let (n, m) = (sys.n(), sys.m());
    let h = h_generic(sys, dir, &z.lift(b)?)?;
    let dz = z.dz_dy(b)?;
    Ok(Tensor::from_fn([m, m, n], |[s, nu, i]| dz[[s, nu, i]] - h[[s, nu, i]]))
}

pub(crate) fn shape_raw<S: Scalar>(sys: &PdeSystem, z: &Congruence, dir: &Direction, b: &[S]) -> Result<Tensor<S>> {
    let (n, m) = (sys.n(), sys.m());
    let t = total_shape_raw(sys, z, dir, b)?;
    let v = dir.eval(&b[..n])?;
    Ok(Tensor::from_fn([m, m], |[s, nu]| (0..n).fold(S::zero(), |acc, i| acc + v[i] * t[[s, nu, i]])))
}

/// `Tr A_Z` at a base point.
pub(crate) fn trace_raw(sys: &PdeSystem, z: &Congruence, dir: &Direction, b: &[f64]) -> Result<f64> {
    let a = shape_raw(sys, z, dir, b)?;
    Ok((0..sys.m()).map(|s| a[[s, s]]).sum())
}

/// `Σ_σ v^i H̄_{σi}^σ`, the divergence term of the volume-factor equation.
pub(crate) fn h_trace_raw(sys: &PdeSystem, z: &Congruence, dir: &Direction, b: &[f64]) -> Result<f64> {
    let n = sys.n();
    let h = h_generic(sys, dir, &z.lift(b)?)?;
    let v = dir.eval(&b[..n])?;
    Ok((0..sys.m()).flat_map(|s| (0..n).map(move |i| (s, i))).map(|(s, i)| v[i] * h[[s, s, i]]).sum())
}

fn checked(sys: &PdeSystem, z: &Congruence, dir: &Direction, b: &BasePoint) -> Result<Vec<f64>> {
    check_congruence(sys, z)?;
    check_direction(sys, dir)?;
    sys.check_base(b)
}

/// Directional shape operator `A_ν^σ = v^i(∂Z_i^σ/∂y^ν − H̄_{νi}^σ)`.
///
/// Embeddedness of `Z` is not enforced; see [`crate::geometry::embedded_residual`].
pub fn shape_operator(sys: &PdeSystem, z: &Congruence, dir: &Direction, b: &BasePoint) -> Result<ShapeMatrix> {
    let bv = checked(sys, z, dir, b)?;
    Ok(ShapeMatrix(shape_raw(sys, z, dir, &bv)?))
}

pub fn total_shape(sys: &PdeSystem, z: &Congruence, dir: &Direction, b: &BasePoint) -> Result<TotalShape> {
    let bv = checked(sys, z, dir, b)?;
    Ok(TotalShape(total_shape_raw(sys, z, dir, &bv)?))
}

/// `Tr A_Z` and the trace form of `Â_Z`.
pub fn traces(a: &ShapeMatrix, t: &TotalShape) -> (f64, TraceForm) {
    let m = a.0.shape()[0];
    let n = t.0.shape()[2];
    let tr = (0..m).map(|s| a.0[[s, s]]).sum();
    (tr, TraceForm((0..n).map(|i| (0..m).map(|s| t.0[[s, s, i]]).sum()).collect()))
}

/// `A2[ν][ρ][i][k] = ½(A_{ρk}^σ A_{σi}^ν − A_{ρi}^σ A_{σk}^ν)`.
pub fn a_squared(t: &TotalShape) -> Tensor {
    let a = &t.0;
    let &[m, _, n] = a.shape() else { unreachable!("rank 3") };
    Tensor::from_fn([m, m, n, n], |[nu, rho, i, k]| {
        0.5 * (0..m).map(|s| a[[s, rho, k]] * a[[nu, s, i]] - a[[s, rho, i]] * a[[nu, s, k]]).sum::<f64>()
    })
}

/// Coordinate matrix on `Y` of `Σ C[σ][ν] ω̄^ν ⊗ ∂/∂y^σ`, given `Z` values `[σ][j]`.
fn embed<S: Scalar>(c: &Tensor<S>, zb: &Tensor<S>, n: usize) -> Tensor<S> {
    let m = c.shape()[0];
    let dim = n + m;
    Tensor::from_fn([dim, dim], |[row, col]| {
        if row < n {
            return S::zero();
        }
        let s = row - n;
        if col >= n {
            c[[s, col - n]]
        } else {
            (0..m).fold(S::zero(), |acc, nu| acc - c[[s, nu]] * zb[[nu, col]])
        }
    })
}

/// `A_Z` as a (1,1) tensor field on `Y`.
struct ShapeField<'a> {
    sys: &'a PdeSystem,
    z: &'a Congruence,
    dir: &'a Direction,
}

impl TensorField for ShapeField<'_> {
    fn dim(&self) -> usize {
        self.sys.n() + self.sys.m()
    }

    fn eval<S: Scalar>(&self, b: &[S]) -> Result<Tensor<S>> {
        let a = shape_raw(self.sys, self.z, self.dir, b)?;
        Ok(embed(&a, &self.z.eval(b)?, self.sys.n()))
    }
}

/// `Z_v = v^i Z_i` as a vector field on `Y`.
struct ZvField<'a> {
    z: &'a Congruence,
    dir: &'a Direction,
}

impl TensorField for ZvField<'_> {
    fn dim(&self) -> usize {
        self.z.n() + self.z.m()
    }

    fn eval<S: Scalar>(&self, b: &[S]) -> Result<Tensor<S>> {
        let w = z_v(self.z, self.dir, b)?;
        Ok(Tensor::from_fn([w.len()], |[k]| w[k]))
    }
}

/// Residual of `L_{Z_v}A_Z + A_Z² + i_{Z_v}(Z^φΦ_+ + Z^φ r_+)`.
pub fn evolution_residual_directional(
    sys: &PdeSystem,
    z: &Congruence,
    dir: &Direction,
    b: &BasePoint,
) -> Result<EvolutionResidual> {
    let bv = checked(sys, z, dir, b)?;
    let (n, m, a) = (sys.n(), sys.m(), dir.adapted());
    let v = dir.eval(&bv[..n])?;
    let zb = z.eval(&bv)?;
    let lifted = z.lift(&bv)?;
    let t = total_shape_raw(sys, z, dir, &bv)?;

    let field = ShapeField { sys, z, dir };
    let k = field.eval(&bv)?;
    let lie = lie_derivative_11(&ZvField { z, dir }, &field, &bv)?;
    let square = matmul(&k, &k);

    let phi_plus = contract_jacobi(&jacobi_raw(sys, dir, &lifted)?, &v);
    let rp = r_plus_raw(sys, dir, &lifted)?;
    let transverse: Vec<usize> = (0..n).filter(|&p| p != a).collect();
    let source = Tensor::from_fn([m, m], |[s, rho]| {
        let mut acc = 0.0;
        for i in 0..n {
            acc += v[i] * phi_plus[[s, i, rho]];
            for nu in 0..m {
                for &p in &transverse {
                    acc += v[i] * rp.c[[s, i, p, nu]] * t[[nu, rho, p]];
                }
            }
            for &p in &transverse {
                acc -= v[i] * rp.dv[[i, p]] * t[[s, rho, p]];
            }
        }
        acc
    });
    let source = embed(&source, &zb, n);

    let dim = n + m;
    let full = Tensor::from_fn([dim, dim], |idx| lie[idx] + square[idx] + source[idx]);
    let components = Tensor::from_fn([m, m], |[s, nu]| full[[n + s, n + nu]]);
    Ok(EvolutionResidual { components, max: full.max_abs() })
}

/// Residual of `[[Z, Â_Z]] + A² + Z∧Φ` on `dx^i ∧ dx^k ∧ ω̄^ρ ⊗ ∂/∂y^ν`.
pub fn evolution_residual_total(
    sys: &PdeSystem,
    z: &Congruence,
    dir: &Direction,
    b: &BasePoint,
) -> Result<EvolutionResidual> {
    let bv = checked(sys, z, dir, b)?;
    let (n, m) = (sys.n(), sys.m());
    let t = total_shape_raw(sys, z, dir, &bv)?;
    let dz = z.dz_dy(&bv)?;
    let zb = z.eval(&bv)?;
    // Derivatives of Â along Z_i, indexed [i][ν][ρ][k].
    let mut zt = Vec::with_capacity(n);
    for i in 0..n {
        let moved = along(&bv, &z.z_vector_with(i, &zb));
        zt.push(total_shape_raw(sys, z, dir, &moved)?.map(|d| d.eps));
    }
    // Φ at the lift, [ν][i][ρ][k]; only its part antisymmetric in (i, k) enters.
    let phi = jacobi_raw(sys, dir, &z.lift(&bv)?)?;
    let bracket = |nu: usize, rho: usize, i: usize, k: usize| -> f64 {
        (0..m).map(|s| t[[nu, s, k]] * dz[[s, rho, i]] - t[[s, rho, k]] * dz[[nu, s, i]]).sum::<f64>()
            + zt[i][[nu, rho, k]]
    };
    let curvature = |nu: usize, rho: usize, i: usize, k: usize| -> f64 { phi[[nu, i, rho, k]] };
    let sq = a_squared(&TotalShape(t.clone()));
    let components = Tensor::from_fn([m, m, n, n], |[nu, rho, i, k]| {
        0.5 * (bracket(nu, rho, i, k) - bracket(nu, rho, k, i))
            + sq[[nu, rho, i, k]]
            + 0.5 * (curvature(nu, rho, i, k) - curvature(nu, rho, k, i))
    });
    let max = components.max_abs();
    Ok(EvolutionResidual { components, max })
}
