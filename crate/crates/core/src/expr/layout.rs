use std::collections::HashSet;
use std::sync::Arc;

use crate::error::Error;

/// Names that the expression language already claims.
pub const RESERVED: &[&str] = &["sin", "cos", "tan", "cot", "exp", "log", "sqrt", "abs", "pi", "e"];

/// Which variables of the fibred chart an expression may reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    /// `x^i` only.
    Independent,
    /// `(x^i, y^σ)`, coordinates on the total space.
    Base,
    /// `(x^i, y^σ, y_j^σ)`, coordinates on the first jet bundle.
    Jet,
}

#[derive(Debug, PartialEq, Eq)]
struct Names {
    independent: Vec<String>,
    dependent: Vec<String>,
    /// `<dep>_<indep>`, σ-major.
    jets: Vec<String>,
}

/// Ordered variable names of a chart, restricted to a [`Scope`].
///
/// Dense variable vectors follow the order `x^1..x^n, y^1..y^m, y_1^1..y_n^1, ..., y_n^m`,
/// so a base point is a prefix of a jet point and an independent point is a prefix of both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableLayout {
    names: Arc<Names>,
    scope: Scope,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => chars.all(|c| c.is_ascii_alphanumeric()),
        _ => false,
    }
}

impl VariableLayout {
    pub fn new<I, D>(independent: I, dependent: D) -> Result<Self, Error>
    where
        I: IntoIterator,
        I::Item: Into<String>,
        D: IntoIterator,
        D::Item: Into<String>,
    {
        let independent: Vec<String> = independent.into_iter().map(Into::into).collect();
        let dependent: Vec<String> = dependent.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for name in independent.iter().chain(&dependent) {
            if !valid_name(name) {
                return Err(Error::Layout(format!("invalid variable name {name:?}")));
            }
            if RESERVED.contains(&name.as_str()) {
                return Err(Error::Layout(format!("variable name {name:?} is reserved")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Layout(format!("duplicate variable name {name:?}")));
            }
        }
        let jets: Vec<String> = dependent
            .iter()
            .flat_map(|d| independent.iter().map(move |i| format!("{d}_{i}")))
            .collect();
        // Declared names never contain '_', so jet names cannot shadow them.
        debug_assert!(jets.iter().all(|j| !seen.contains(j.as_str())));
        Ok(VariableLayout {
            names: Arc::new(Names { independent, dependent, jets }),
            scope: Scope::Jet,
        })
    }

    /// Same chart, narrowed to `scope`.
    pub fn restrict(&self, scope: Scope) -> Self {
        VariableLayout { names: Arc::clone(&self.names), scope }
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn n(&self) -> usize {
        self.names.independent.len()
    }

    pub fn m(&self) -> usize {
        self.names.dependent.len()
    }

    pub fn independent(&self) -> &[String] {
        &self.names.independent
    }

    pub fn dependent(&self) -> &[String] {
        &self.names.dependent
    }

    /// Number of variables visible in the current scope.
    pub fn len(&self) -> usize {
        match self.scope {
            Scope::Independent => self.n(),
            Scope::Base => self.n() + self.m(),
            Scope::Jet => self.n() + self.m() + self.n() * self.m(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn name(&self, index: usize) -> &str {
        let (n, m) = (self.n(), self.m());
        if index < n {
            &self.names.independent[index]
        } else if index < n + m {
            &self.names.dependent[index - n]
        } else {
            &self.names.jets[index - n - m]
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        (0..self.len()).map(move |k| self.name(k))
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        (0..self.len()).find(|&k| self.name(k) == name)
    }

    pub fn independent_index(&self, name: &str) -> Option<usize> {
        self.names.independent.iter().position(|s| s == name)
    }

    pub fn dependent_index(&self, name: &str) -> Option<usize> {
        self.names.dependent.iter().position(|s| s == name)
    }

    /// Position of `y_k^σ` in a jet vector.
    pub fn jet_index(&self, sigma: usize, k: usize) -> usize {
        self.n() + self.m() + sigma * self.n() + k
    }
}
