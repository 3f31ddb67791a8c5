//! Approximation problem data: sample nodes, sampled values and the basis
//! spanning the approximation space.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cnorm2, orthogonalize, CMatrix};

/// A sample node or value, `re + i im`. Real-mode data keeps `im == 0`.
pub type Scalar = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Real,
    Complex,
}

/// The approximation space.
#[derive(Clone, Debug, PartialEq)]
pub enum BasisSpec {
    /// `span{1, x, ..., x^(n-1)}`; `n` counts basis functions.
    Monomial(usize),
    /// Basis functions evaluated at the nodes, `psi[i, j] = psi_j(x_i)`.
    Explicit(CMatrix),
}

impl BasisSpec {
    pub fn dim(&self) -> usize {
        match self {
            BasisSpec::Monomial(n) => *n,
            BasisSpec::Explicit(m) => m.cols(),
        }
    }
}

/// Validated approximation problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    nodes: Vec<Scalar>,
    values: Vec<Scalar>,
    basis: BasisSpec,
    mode: Mode,
}

impl Problem {
    /// Validates and packages problem data. Nodes keep their input order.
    pub fn new(nodes: Vec<Scalar>, values: Vec<Scalar>, basis: BasisSpec, mode: Mode) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::LengthMismatch { nodes: nodes.len(), values: values.len() });
        }
        let m = nodes.len();
        for (i, (x, f)) in nodes.iter().zip(&values).enumerate() {
            if !(x.re.is_finite() && x.im.is_finite() && f.re.is_finite() && f.im.is_finite()) {
                return Err(Error::NonFinite(i));
            }
            if mode == Mode::Real && (x.im != 0.0 || f.im != 0.0) {
                return Err(Error::NonRealData(i));
            }
        }
        if let Some((i, j)) = first_duplicate(&nodes) {
            return Err(Error::DuplicateNodes(i, j));
        }
        let n = basis.dim();
        if n == 0 {
            return Err(Error::InvalidConfig("basis dimension must be positive".into()));
        }
        if m < n + 1 {
            return Err(Error::TooFewNodes { m, n });
        }
        if let BasisSpec::Explicit(psi) = &basis {
            if psi.rows() != m {
                return Err(Error::LengthMismatch { nodes: m, values: psi.rows() });
            }
            if mode == Mode::Real && (0..n).any(|j| psi.col(j).iter().any(|z| z.im != 0.0)) {
                return Err(Error::NonRealData(0));
            }
            if !full_column_rank(psi) {
                return Err(Error::RankDeficientBasis);
            }
        }
        Ok(Self { nodes, values, basis, mode })
    }

    /// Real-mode convenience constructor.
    pub fn real(nodes: &[f64], values: &[f64], basis: BasisSpec) -> Result<Self> {
        Self::new(
            nodes.iter().map(|&x| Scalar::new(x, 0.0)).collect(),
            values.iter().map(|&f| Scalar::new(f, 0.0)).collect(),
            basis,
            Mode::Real,
        )
    }

    pub fn nodes(&self) -> &[Scalar] {
        &self.nodes
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of nodes.
    pub fn m(&self) -> usize {
        self.nodes.len()
    }

    /// Basis dimension.
    pub fn n(&self) -> usize {
        self.basis.dim()
    }

    /// Same data, different basis.
    pub fn with_basis(&self, basis: BasisSpec) -> Result<Self> {
        Self::new(self.nodes.clone(), self.values.clone(), basis, self.mode)
    }

    pub fn values_inf_norm(&self) -> f64 {
        self.values.iter().map(|f| f.norm()).fold(0.0, f64::max)
    }
}

fn first_duplicate(nodes: &[Scalar]) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| {
        nodes[a]
            .re
            .total_cmp(&nodes[b].re)
            .then(nodes[a].im.total_cmp(&nodes[b].im))
            .then(a.cmp(&b))
    });
    let mut best: Option<(usize, usize)> = None;
    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        // -0.0 and 0.0 compare equal as scalars
        if nodes[a] == nodes[b] {
            let pair = (a.min(b), a.max(b));
            if best.map_or(true, |p| pair < p) {
                best = Some(pair);
            }
        }
    }
    best
}

fn full_column_rank(psi: &CMatrix) -> bool {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(psi.cols());
    for j in 0..psi.cols() {
        let mut v = psi.col(j).to_vec();
        let scale = cnorm2(&v);
        if scale == 0.0 {
            return false;
        }
        let proj = orthogonalize(&basis, &mut v);
        if proj.residual_norm <= 1e-12 * scale {
            return false;
        }
        let inv = 1.0 / proj.residual_norm;
        v.iter_mut().for_each(|z| *z *= inv);
        basis.push(v);
    }
    true
}

/// A point of the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Validates nonnegativity and renormalizes onto the simplex.
    pub fn new(mut w: Vec<f64>) -> Result<Self> {
        if let Some(i) = w.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidWeights(format!("entry {i} is negative or non-finite")));
        }
        let s: f64 = w.iter().sum();
        if !(s > 0.0) {
            return Err(Error::InvalidWeights("weights sum to zero".into()));
        }
        w.iter_mut().for_each(|v| *v /= s);
        Ok(Self(w))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Indices carrying positive weight.
    pub fn support(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(i, _)| i).collect()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

/// Built-in test problems, each sampled on 2001 nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// `sin(20|x|x)` on 2001 equispaced nodes of `[-1, 1]`.
    F1,
    /// Runge function `1/(1+25x^2)` on the same grid.
    F2,
    /// `(2z+1)^(-1/2)` on the right unit semicircle.
    G1,
    /// `(1+z^4)^(1/2)` on `exp(i pi/4 tanh(-12 + 24(k-1)/2000))`.
    G2,
    /// `(1+z^4)^(1/2)` on `exp(i pi/4 tanh(-12 + 24(k-1)/1000))`; the
    /// tanh saturates, so repeated nodes are collapsed (1227 remain).
    G2Literal,
}

impl Builtin {
    pub const ALL: [Builtin; 5] = [Builtin::F1, Builtin::F2, Builtin::G1, Builtin::G2, Builtin::G2Literal];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::F1 => "f1",
            Builtin::F2 => "f2",
            Builtin::G1 => "g1",
            Builtin::G2 => "g2",
            Builtin::G2Literal => "g2-literal",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Builtin::F1 | Builtin::F2 => Mode::Real,
            _ => Mode::Complex,
        }
    }

    pub fn eval(self, x: Scalar) -> Scalar {
        match self {
            Builtin::F1 => Scalar::new((20.0 * x.re.abs() * x.re).sin(), 0.0),
            Builtin::F2 => Scalar::new(1.0 / (1.0 + 25.0 * x.re * x.re), 0.0),
            Builtin::G1 => (2.0 * x + 1.0).sqrt().inv(),
            Builtin::G2 | Builtin::G2Literal => (1.0 + x.powu(4)).sqrt(),
        }
    }

    /// The sample grid, as a pure function of the node index.
    pub fn nodes(self) -> Vec<Scalar> {
        const M: usize = 2001;
        let ks = 0..M;
        match self {
            Builtin::F1 | Builtin::F2 => ks.map(|i| Scalar::new(-1.0 + i as f64 / 1000.0, 0.0)).collect(),
            Builtin::G1 => ks
                .map(|k| Scalar::new(0.0, -PI / 2.0 + k as f64 * PI / 2000.0).exp())
                .collect(),
            Builtin::G2 => ks.map(|k| tanh_arc(-12.0 + 24.0 * k as f64 / 2000.0)).collect(),
            Builtin::G2Literal => {
                let mut out: Vec<Scalar> = Vec::with_capacity(M);
                for k in ks {
                    let z = tanh_arc(-12.0 + 24.0 * k as f64 / 1000.0);
                    // the grid is monotone in k, so duplicates are adjacent
                    if out.last() != Some(&z) {
                        out.push(z);
                    }
                }
                out
            }
        }
    }

    pub fn dataset(self) -> (Vec<Scalar>, Vec<Scalar>, Mode) {
        let nodes = self.nodes();
        let values = nodes.iter().map(|&x| self.eval(x)).collect();
        (nodes, values, self.mode())
    }

    /// The problem on `span{1, x, ..., x^(n-1)}`.
    pub fn problem(self, n: usize) -> Result<Problem> {
        let (nodes, values, mode) = self.dataset();
        Problem::new(nodes, values, BasisSpec::Monomial(n), mode)
    }
}

fn tanh_arc(t: f64) -> Scalar {
    Scalar::new(0.0, PI / 4.0 * t.tanh()).exp()
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

/// Looks up a built-in problem by name and attaches a monomial basis.
pub fn builtin_problem(name: &str, n: usize) -> Result<Problem> {
    name.parse::<Builtin>()?.problem(n)
}
