//! Candidate-term dictionaries and the design matrices built from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::simulator::{Dataset, OscillatorParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum State {
    Displacement,
    Velocity,
}

/// A single dictionary column: a power of one state, or the constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    Power(State, u32),
    Constant,
}

impl Term {
    #[inline]
    pub fn eval<T: Real>(&self, y: T, ydot: T) -> T {
        match *self {
            Term::Constant => T::one(),
            Term::Power(State::Displacement, p) => y.powi(p as i32),
            Term::Power(State::Velocity, p) => ydot.powi(p as i32),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |s: &State| match s {
            State::Displacement => "y",
            State::Velocity => "ydot",
        };
        match self {
            Term::Constant => write!(f, "1"),
            Term::Power(s, 1) => write!(f, "{}", name(s)),
            Term::Power(s, p) => write!(f, "{}^{}", name(s), p),
        }
    }
}

impl FromStr for Term {
    type Err = Error;

    fn from_str(label: &str) -> Result<Self> {
        let label = label.trim();
        if label == "1" {
            return Ok(Term::Constant);
        }
        let (base, power) = match label.split_once('^') {
            Some((b, p)) => {
                let p: u32 = p
                    .parse()
                    .map_err(|_| Error::config(format!("unknown basis term '{label}'")))?;
                (b, p)
            }
            None => (label, 1),
        };
        let state = match base {
            "y" => State::Displacement,
            "ydot" | "ẏ" => State::Velocity,
            _ => return Err(Error::config(format!("unknown basis term '{label}'"))),
        };
        if power == 0 {
            return Err(Error::config(format!("use '1' for the constant term, not '{label}'")));
        }
        Ok(Term::Power(state, power))
    }
}

/// Ordered list of dictionary terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSpec {
    terms: Vec<Term>,
}

impl BasisSpec {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::config("basis must contain at least one term"));
        }
        for (i, t) in terms.iter().enumerate() {
            if terms[..i].contains(t) {
                return Err(Error::config(format!("duplicate basis term '{t}'")));
            }
        }
        Ok(Self { terms })
    }

    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        Self::new(labels.iter().map(|l| l.as_ref().parse()).collect::<Result<_>>()?)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.terms.iter().map(Term::to_string).collect()
    }

    pub fn position(&self, term: Term) -> Option<usize> {
        self.terms.iter().position(|&t| t == term)
    }
}

impl Default for BasisSpec {
    /// `[y, ẏ, y², ẏ², y³, ẏ³, 1]`.
    fn default() -> Self {
        use State::*;
        Self {
            terms: vec![
                Term::Power(Displacement, 1),
                Term::Power(Velocity, 1),
                Term::Power(Displacement, 2),
                Term::Power(Velocity, 2),
                Term::Power(Displacement, 3),
                Term::Power(Velocity, 3),
                Term::Constant,
            ],
        }
    }
}

impl Serialize for BasisSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.labels().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BasisSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let labels = Vec::<String>::deserialize(d)?;
        BasisSpec::from_labels(&labels).map_err(serde::de::Error::custom)
    }
}

/// Row-major `N x M` evaluation of a basis on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix<T> {
    values: Vec<T>,
    n_rows: usize,
    basis: BasisSpec,
    pub task_label: String,
}

impl<T: Real> DesignMatrix<T> {
    pub fn from_states(y: &[T], ydot: &[T], basis: &BasisSpec, task_label: impl Into<String>) -> Result<Self> {
        if y.len() != ydot.len() {
            return Err(Error::Dimension("state series lengths differ".into()));
        }
        let m = basis.len();
        let mut values = Vec::with_capacity(y.len() * m);
        for (&yi, &vi) in y.iter().zip(ydot) {
            values.extend(basis.terms().iter().map(|t| t.eval(yi, vi)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("design matrix contains non-finite entries"));
        }
        Ok(Self {
            values,
            n_rows: y.len(),
            basis: basis.clone(),
            task_label: task_label.into(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[T] {
        let m = self.n_cols();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n_rows).map(|i| self.row(i)[j]).collect()
    }

    /// `D w`.
    pub fn mul_vec(&self, w: &[T]) -> Vec<T> {
        (0..self.n_rows)
            .map(|i| self.row(i).iter().zip(w).map(|(&d, &x)| d * x).sum())
            .collect()
    }

    /// `Dᵀ v`.
    pub fn tr_mul_vec(&self, v: &[T]) -> Vec<T> {
        let m = self.n_cols();
        let mut out = vec![T::zero(); m];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &d) in out.iter_mut().zip(self.row(i)) {
                *o = *o + d * vi;
            }
        }
        out
    }

    /// `DᵀD`, row-major `M x M`.
    pub fn gram(&self) -> Vec<T> {
        let m = self.n_cols();
        let mut g = vec![T::zero(); m * m];
        for i in 0..self.n_rows {
            let r = self.row(i);
            for a in 0..m {
                for b in a..m {
                    g[a * m + b] = g[a * m + b] + r[a] * r[b];
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                g[a * m + b] = g[b * m + a];
            }
        }
        g
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stack(&self, other: &DesignMatrix<T>) -> Result<Self> {
        if self.basis != other.basis {
            return Err(Error::Dimension("cannot stack design matrices with different bases".into()));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(Self {
            values,
            n_rows: self.n_rows + other.n_rows,
            basis: self.basis.clone(),
            task_label: format!("{}+{}", self.task_label, other.task_label),
        })
    }
}

/// Evaluates `basis` on the states of `data`.
pub fn build_design_matrix<T: Real>(data: &Dataset<T>, basis: &BasisSpec) -> Result<DesignMatrix<T>> {
    data.validate()?;
    DesignMatrix::from_states(&data.y, &data.ydot, basis, data.label.clone())
}

/// Ground-truth weights aligned with `basis`: the equation of motion divided
/// through by the mass, `ÿ = F/m - (c/m) ẏ - (k1/m) y - (k3/m) y³`.
pub fn true_weight_vector<T: Real>(params: &OscillatorParams<T>, basis: &BasisSpec) -> Vec<T> {
    basis
        .terms()
        .iter()
        .map(|t| match t {
            Term::Power(State::Displacement, 1) => -params.k1 / params.m,
            Term::Power(State::Velocity, 1) => -params.c / params.m,
            Term::Power(State::Displacement, 3) => -params.k3 / params.m,
            _ => T::zero(),
        })
        .collect()
}
