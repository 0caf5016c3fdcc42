//! Expression language for the component functions of a system.
//!
//! Expressions are parsed once against a [`VariableLayout`]; variables are
//! resolved to dense indices so evaluation is a plain tree walk over a slice.
//! Evaluation is generic over [`Scalar`], which is what gives exact mixed
//! partials through nested dual numbers.

pub mod dual;
pub mod layout;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

pub use dual::{Dual, Scalar};
pub use layout::{Scope, VariableLayout};

use crate::error::{DomainError, Error, ParseError};

/// Deepest supported derivative.
pub const MAX_ORDER: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Cot,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 8] =
        [Func::Sin, Func::Cos, Func::Tan, Func::Cot, Func::Exp, Func::Log, Func::Sqrt, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Cot => "cot",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Parse tree node. Variables hold their index in the owning layout.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Node::Const(_) => {}
            Node::Var(k) => {
                out.insert(*k);
            }
            Node::Neg(a) | Node::Call(_, a) => a.collect_vars(out),
            Node::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Value of a variable-free subtree.
    fn constant_value(&self) -> Option<f64> {
        match self {
            Node::Const(v) => Some(*v),
            Node::Var(_) => None,
            Node::Neg(a) => a.constant_value().map(|v| -v),
            _ => {
                let mut vars = BTreeSet::new();
                self.collect_vars(&mut vars);
                if vars.is_empty() {
                    eval_inner::<f64>(self, &[]).ok()
                } else {
                    None
                }
            }
        }
    }
}

/// An immutable parsed expression.
#[derive(Clone, Debug)]
pub struct Expression {
    root: Node,
    source: String,
    layout: VariableLayout,
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.layout == other.layout
    }
}

/// A point plus the variables to differentiate by.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeRequest {
    pub point: Vec<f64>,
    pub multi_index: Vec<usize>,
}

impl DerivativeRequest {
    pub fn new(point: Vec<f64>, multi_index: Vec<usize>) -> Result<Self, Error> {
        if multi_index.len() > MAX_ORDER {
            return Err(Error::Dimension(format!(
                "derivative order {} exceeds {MAX_ORDER}",
                multi_index.len()
            )));
        }
        Ok(DerivativeRequest { point, multi_index })
    }
}

impl Expression {
    pub fn parse(text: &str, layout: &VariableLayout) -> Result<Expression, ParseError> {
        let root = parse::Parser::new(text, layout)?.parse()?;
        Ok(Expression { root, source: text.to_string(), layout: layout.clone() })
    }

    pub fn constant(value: f64, layout: &VariableLayout) -> Expression {
        Expression { root: Node::Const(value), source: format!("{value:?}"), layout: layout.clone() }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn layout(&self) -> &VariableLayout {
        &self.layout
    }

    /// Sorted indices of every variable the expression mentions.
    pub fn variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.root.collect_vars(&mut out);
        out
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.root.constant_value()
    }

    /// Evaluate at a dense assignment in layout order.
    pub fn eval<S: Scalar>(&self, vars: &[S]) -> Result<S, DomainError> {
        eval_inner(&self.root, vars).map_err(|fault| DomainError {
            message: fault.message,
            subexpression: self.render(fault.node),
        })
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64, Error> {
        self.check_point(point)?;
        Ok(self.eval(point)?)
    }

    /// Exact mixed partial `∂^k f / ∂x_{a} ∂x_{b} ...` with `k ≤ 3`.
    pub fn derivative(&self, req: &DerivativeRequest) -> Result<f64, Error> {
        self.check_point(&req.point)?;
        if let Some(&bad) = req.multi_index.iter().find(|&&k| k >= self.layout.len()) {
            return Err(Error::Dimension(format!("variable index {bad} out of range")));
        }
        let p0 = req.point.as_slice();
        let idx = &req.multi_index;
        let value = match idx.len() {
            0 => self.eval(p0)?,
            1 => self.eval(&dual::seed(p0, idx[0]))?.eps,
            2 => {
                let p1 = dual::seed(p0, idx[0]);
                self.eval(&dual::seed(&p1, idx[1]))?.eps.eps
            }
            3 => {
                let p1 = dual::seed(p0, idx[0]);
                let p2 = dual::seed(&p1, idx[1]);
                self.eval(&dual::seed(&p2, idx[2]))?.eps.eps.eps
            }
            k => return Err(Error::Dimension(format!("derivative order {k} exceeds {MAX_ORDER}"))),
        };
        Ok(value)
    }

    fn check_point(&self, point: &[f64]) -> Result<(), Error> {
        if point.len() < self.layout.len() {
            return Err(Error::Dimension(format!(
                "assignment has {} values, layout needs {}",
                point.len(),
                self.layout.len()
            )));
        }
        Ok(())
    }

    fn render(&self, node: &Node) -> String {
        let mut s = String::new();
        write_node(&mut s, node, &self.layout).expect("writing to a String cannot fail");
        s
    }
}

impl fmt::Display for Expression {
    /// Fully parenthesised form; parses back to the identical tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, &self.layout)
    }
}

fn write_node<W: fmt::Write>(w: &mut W, node: &Node, layout: &VariableLayout) -> fmt::Result {
    match node {
        Node::Const(v) => write!(w, "{v:?}"),
        Node::Var(k) => w.write_str(layout.name(*k)),
        Node::Neg(a) => {
            w.write_str("(-")?;
            write_node(w, a, layout)?;
            w.write_char(')')
        }
        Node::Binary(op, a, b) => {
            w.write_char('(')?;
            write_node(w, a, layout)?;
            write!(w, " {} ", op.symbol())?;
            write_node(w, b, layout)?;
            w.write_char(')')
        }
        Node::Call(func, a) => {
            write!(w, "{}(", func.name())?;
            write_node(w, a, layout)?;
            w.write_char(')')
        }
    }
}

/// Offending node of a failed evaluation; rendered by the owning expression.
struct Fault<'n> {
    node: &'n Node,
    message: String,
}

fn fault<T>(node: &Node, message: impl Into<String>) -> Result<T, Fault<'_>> {
    Err(Fault { node, message: message.into() })
}

fn near_zero(value: f64, argument: f64) -> bool {
    value == 0.0 || value.abs() <= f64::EPSILON * argument.abs()
}

fn eval_inner<'n, S: Scalar>(node: &'n Node, vars: &[S]) -> Result<S, Fault<'n>> {
    let out = match node {
        Node::Const(v) => S::cst(*v),
        Node::Var(k) => vars[*k],
        Node::Neg(a) => -eval_inner(a, vars)?,
        Node::Binary(op, a, b) => {
            let lhs = eval_inner(a, vars)?;
            match op {
                BinOp::Add => lhs + eval_inner(b, vars)?,
                BinOp::Sub => lhs - eval_inner(b, vars)?,
                BinOp::Mul => lhs * eval_inner(b, vars)?,
                BinOp::Div => {
                    let rhs = eval_inner(b, vars)?;
                    if rhs.re() == 0.0 {
                        return fault(node, "division by zero");
                    }
                    lhs / rhs
                }
                BinOp::Pow => power(node, lhs, b, vars)?,
            }
        }
        Node::Call(func, a) => {
            let x = eval_inner(a, vars)?;
            let u = x.re();
            match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => {
                    if near_zero(u.cos(), u) {
                        return fault(node, "tan at an odd multiple of pi/2");
                    }
                    x.tan()
                }
                Func::Cot => {
                    if near_zero(u.sin(), u) {
                        return fault(node, "cot at a multiple of pi");
                    }
                    x.cos() / x.sin()
                }
                Func::Exp => x.exp(),
                Func::Log => {
                    if u <= 0.0 {
                        return fault(node, "log of a nonpositive value");
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if u < 0.0 {
                        return fault(node, "sqrt of a negative value");
                    }
                    x.sqrt()
                }
                Func::Abs => x.abs(),
            }
        }
    };
    if !out.re().is_finite() {
        return fault(node, "non-finite result");
    }
    Ok(out)
}

fn power<'n, S: Scalar>(node: &'n Node, base: S, exponent: &'n Node, vars: &[S]) -> Result<S, Fault<'n>> {
    let b = base.re();
    if let Some(c) = exponent.constant_value() {
        if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 {
            if c < 0.0 && b == 0.0 {
                return fault(node, "zero raised to a negative power");
            }
            return Ok(base.powi(c as i32));
        }
        if b < 0.0 {
            return fault(node, "negative base with a non-integer exponent");
        }
        if b == 0.0 && c < 0.0 {
            return fault(node, "zero raised to a negative power");
        }
        return Ok(base.powf(c));
    }
    if b <= 0.0 {
        return fault(node, "nonpositive base with a variable exponent");
    }
    let e = eval_inner(exponent, vars)?;
    Ok((e * base.ln()).exp())
}
