//! Exact finite probability spaces: trajectory enumeration, partition
//! σ-algebras, conditional expectation, and the structural verifiers built
//! on them.
//!
//! A [`FiniteSpace`] is a list of atoms with exact rational weights summing
//! to 1. Enumerated spaces label every atom with its trajectory, which makes
//! the filtrations concrete: the σ-algebra generated by a trajectory prefix
//! is just the partition of atoms sharing that prefix. Conditional
//! expectations are computed by weighted cell averages, with the convention
//! that they vanish on zero-weight cells.
//!
//! Everything here is rational-only: the point of the module is to certify
//! identities by literal equality, so there is no float realization.

mod verify;

pub use verify::{
    lemma_a1_check, oracle_posteriors, theorem_3_5_suite, verify_factorization, verify_markov,
    verify_output_properties, verify_splitting, CheckRecord, MarkovCheck, PosteriorKind,
    Posterior, Report, Theorem35Report,
};

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::{joint_index, Matrix, ProbVector};
use crate::models::{HmcModel, SigmaPModel, SigmaSModel};
use crate::scalar::{Rational, Scalar};

/// Default cap on the number of enumerated trajectories, `(nm)^(T+1)`.
pub const DEFAULT_ATOM_BUDGET: u128 = 1_000_000;

/// One realized trajectory used as an atom label. `y` may be one entry
/// shorter than `x` (shifted-output systems).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Trajectory {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

impl Trajectory {
    /// Human-readable prefix, 1-based like the file formats.
    pub fn render_prefix(x: &[usize], y: &[usize]) -> String {
        let xs: Vec<String> = x.iter().map(|&v| (v + 1).to_string()).collect();
        let ys: Vec<String> = y.iter().map(|&v| (v + 1).to_string()).collect();
        format!("x={} y={}", xs.join(","), ys.join(","))
    }
}

/// Atom label: a full trajectory for enumerated spaces, an opaque id for
/// abstract spaces (e.g. randomized conditional-expectation checks).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AtomLabel {
    Path(Trajectory),
    Id(usize),
}

#[derive(Clone, Debug)]
pub struct Atom {
    pub label: AtomLabel,
    pub weight: Rational,
}

/// Shape metadata for enumerated spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathMeta {
    pub n: usize,
    pub m: usize,
    /// States per atom: `x_0..x_{x_len-1}`.
    pub x_len: usize,
    /// Outputs per atom: equals `x_len` for synchronous systems, `x_len - 1`
    /// for shifted-output systems.
    pub y_len: usize,
}

/// A finite probability space: atoms with exact nonnegative weights that
/// sum to exactly 1.
#[derive(Clone, Debug)]
pub struct FiniteSpace {
    atoms: Vec<Atom>,
    meta: Option<PathMeta>,
}

impl FiniteSpace {
    /// Abstract space from bare weights (atom ids become labels). Weights
    /// may include zeros; they must be nonnegative and sum to exactly 1.
    pub fn from_weights(weights: Vec<Rational>) -> Result<Self> {
        let atoms = weights
            .into_iter()
            .enumerate()
            .map(|(i, weight)| Atom {
                label: AtomLabel::Id(i),
                weight,
            })
            .collect();
        let space = FiniteSpace { atoms, meta: None };
        space.validate()?;
        Ok(space)
    }

    /// Enumerated space from labelled atoms.
    pub fn from_path_atoms(atoms: Vec<Atom>, meta: PathMeta) -> Result<Self> {
        let space = FiniteSpace {
            atoms,
            meta: Some(meta),
        };
        space.validate()?;
        Ok(space)
    }

    fn validate(&self) -> Result<()> {
        let mut total = Rational::zero();
        for (i, atom) in self.atoms.iter().enumerate() {
            if atom.weight < Rational::zero() {
                return Err(Error::validation(
                    format!("atoms[{i}]"),
                    format!("negative weight {}", atom.weight.render()),
                ));
            }
            if let Some(meta) = &self.meta {
                match &atom.label {
                    AtomLabel::Path(tr) => {
                        if tr.x.len() != meta.x_len || tr.y.len() != meta.y_len {
                            return Err(Error::validation(
                                format!("atoms[{i}]"),
                                "trajectory length does not match space metadata",
                            ));
                        }
                        if tr.x.iter().any(|&v| v >= meta.n) || tr.y.iter().any(|&v| v >= meta.m) {
                            return Err(Error::validation(
                                format!("atoms[{i}]"),
                                "trajectory index out of range",
                            ));
                        }
                    }
                    AtomLabel::Id(_) => {
                        return Err(Error::validation(
                            format!("atoms[{i}]"),
                            "enumerated space must label atoms with trajectories",
                        ));
                    }
                }
            }
            total += &atom.weight;
        }
        if total != Rational::one() {
            return Err(Error::validation(
                "atoms",
                format!("weights sum to {}, expected exactly 1", total.render()),
            ));
        }
        Ok(())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn meta(&self) -> Option<&PathMeta> {
        self.meta.as_ref()
    }

    pub fn weight(&self, atom: usize) -> &Rational {
        &self.atoms[atom].weight
    }

    pub fn weights(&self) -> Vec<Rational> {
        self.atoms.iter().map(|a| a.weight.clone()).collect()
    }

    /// Trajectory label of an atom; panics on abstract spaces.
    pub fn path(&self, atom: usize) -> &Trajectory {
        match &self.atoms[atom].label {
            AtomLabel::Path(tr) => tr,
            AtomLabel::Id(_) => panic!("atom {atom} has no trajectory label"),
        }
    }

    fn expect_meta(&self) -> &PathMeta {
        self.meta
            .as_ref()
            .expect("operation requires an enumerated space")
    }

    /// σ(X_0..X_t, Y_0..Y_t): cells that share the full history up to `t`.
    pub fn f_partition(&self, t: usize) -> Partition {
        let meta = self.expect_meta();
        assert!(t < meta.x_len && t < meta.y_len, "F_t beyond the horizon");
        Partition::by_key(self, |tr| (tr.x[..=t].to_vec(), tr.y[..=t].to_vec()))
    }

    /// σ(X_0..X_t, Y_0..Y_{t-1}).
    pub fn g_partition(&self, t: usize) -> Partition {
        let meta = self.expect_meta();
        assert!(t < meta.x_len && t <= meta.y_len, "G_t beyond the horizon");
        Partition::by_key(self, |tr| (tr.x[..=t].to_vec(), tr.y[..t].to_vec()))
    }

    /// σ(X_t): cells by the value of the state at `t`.
    pub fn x_partition(&self, t: usize) -> Partition {
        let meta = self.expect_meta();
        assert!(t < meta.x_len);
        Partition::by_key(self, |tr| tr.x[t])
    }

    /// σ(Y_0..Y_t): cells by the observation record.
    pub fn y_prefix_partition(&self, t: usize) -> Partition {
        let meta = self.expect_meta();
        assert!(t < meta.y_len);
        Partition::by_key(self, |tr| tr.y[..=t].to_vec())
    }

    /// σ(Y_t): cells by the single output at `t`.
    pub fn y_partition(&self, t: usize) -> Partition {
        let meta = self.expect_meta();
        assert!(t < meta.y_len);
        Partition::by_key(self, |tr| tr.y[t])
    }

    /// Indicator vector of `X_t` (dimension n).
    pub fn x_indicator(&self, t: usize) -> RandVec {
        let meta = self.expect_meta();
        assert!(t < meta.x_len);
        RandVec::indicator(self, meta.n, |tr| tr.x[t])
    }

    /// Indicator vector of `Y_t` (dimension m).
    pub fn y_indicator(&self, t: usize) -> RandVec {
        let meta = self.expect_meta();
        assert!(t < meta.y_len);
        RandVec::indicator(self, meta.m, |tr| tr.y[t])
    }

    /// Indicator vector of `Z_t = Y_t ⊗ X_t` (dimension nm).
    pub fn z_indicator(&self, t: usize) -> RandVec {
        let meta = self.expect_meta();
        assert!(t < meta.x_len && t < meta.y_len);
        let n = meta.n;
        RandVec::indicator(self, meta.n * meta.m, move |tr| {
            joint_index(tr.x[t], tr.y[t], n)
        })
    }

    /// Indicator vector of `W_t = Y_{t-1} ⊗ X_t` (dimension nm, `t >= 1`).
    pub fn w_indicator(&self, t: usize) -> RandVec {
        let meta = self.expect_meta();
        assert!(t >= 1 && t < meta.x_len && t - 1 < meta.y_len);
        let n = meta.n;
        RandVec::indicator(self, meta.n * meta.m, move |tr| {
            joint_index(tr.x[t], tr.y[t - 1], n)
        })
    }

    /// Total weight of a cell given as atom indices.
    pub fn mass(&self, cell: &[usize]) -> Rational {
        let mut total = Rational::zero();
        for &a in cell {
            total += &self.atoms[a].weight;
        }
        total
    }
}

/// A partition of the atoms: disjoint, exhaustive, no empty cell. Realizes
/// a finitely generated σ-algebra extensionally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(cells: Vec<Vec<usize>>, atom_count: usize) -> Result<Self> {
        let mut seen = vec![false; atom_count];
        for (ci, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::validation(
                    format!("cells[{ci}]"),
                    "empty cell not allowed",
                ));
            }
            for &a in cell {
                if a >= atom_count {
                    return Err(Error::validation(
                        format!("cells[{ci}]"),
                        format!("atom index {a} out of range"),
                    ));
                }
                if seen[a] {
                    return Err(Error::validation(
                        format!("cells[{ci}]"),
                        format!("atom {a} appears in two cells"),
                    ));
                }
                seen[a] = true;
            }
        }
        if let Some(a) = seen.iter().position(|&s| !s) {
            return Err(Error::validation(
                "cells",
                format!("atom {a} not covered by any cell"),
            ));
        }
        Ok(Partition { cells })
    }

    /// The trivial σ-algebra: one cell holding everything.
    pub fn trivial(atom_count: usize) -> Self {
        Partition {
            cells: vec![(0..atom_count).collect()],
        }
    }

    /// The finest σ-algebra: one cell per atom.
    pub fn finest(atom_count: usize) -> Self {
        Partition {
            cells: (0..atom_count).map(|a| vec![a]).collect(),
        }
    }

    /// Group the atoms of an enumerated space by a trajectory key.
    pub fn by_key<K: Ord>(space: &FiniteSpace, key: impl Fn(&Trajectory) -> K) -> Self {
        let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
        for (i, _) in space.atoms.iter().enumerate() {
            groups.entry(key(space.path(i))).or_default().push(i);
        }
        Partition {
            cells: groups.into_values().collect(),
        }
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Common refinement: the σ-algebra generated by both partitions.
    pub fn join(&self, other: &Partition) -> Partition {
        let atom_count: usize = self.cells.iter().map(|c| c.len()).sum();
        let mut cell_of_other = vec![usize::MAX; atom_count];
        for (ci, cell) in other.cells.iter().enumerate() {
            for &a in cell {
                cell_of_other[a] = ci;
            }
        }
        let mut cells = Vec::new();
        for cell in &self.cells {
            let mut split: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &a in cell {
                split.entry(cell_of_other[a]).or_default().push(a);
            }
            cells.extend(split.into_values());
        }
        Partition { cells }
    }

    /// Index of the cell containing each atom.
    pub fn cell_index(&self, atom_count: usize) -> Vec<usize> {
        let mut idx = vec![usize::MAX; atom_count];
        for (ci, cell) in self.cells.iter().enumerate() {
            for &a in cell {
                idx[a] = ci;
            }
        }
        idx
    }
}

/// An atom-indexed vector quantity (a random vector on the space).
#[derive(Clone, Debug, PartialEq)]
pub struct RandVec {
    values: Vec<Vec<Rational>>,
}

impl RandVec {
    pub fn new(values: Vec<Vec<Rational>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("random vector needs atoms"));
        }
        let dim = values[0].len();
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return Err(Error::validation(
                "values",
                "all atoms must carry the same positive dimension",
            ));
        }
        Ok(RandVec { values })
    }

    /// Basis-vector indicator: atom `a` carries `e_{f(a)}`.
    pub fn indicator(space: &FiniteSpace, dim: usize, f: impl Fn(&Trajectory) -> usize) -> Self {
        let values = (0..space.len())
            .map(|a| {
                let mut v = vec![Rational::zero(); dim];
                v[f(space.path(a))] = Rational::one();
                v
            })
            .collect();
        RandVec { values }
    }

    /// Indicator of a cell (dimension 1).
    pub fn cell_indicator(atom_count: usize, cell: &[usize]) -> Self {
        let mut values = vec![vec![Rational::zero()]; atom_count];
        for &a in cell {
            values[a][0] = Rational::one();
        }
        RandVec { values }
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, atom: usize) -> &[Rational] {
        &self.values[atom]
    }

    /// Pointwise product with a scalar (dimension-1) random variable.
    pub fn mul_scalar_rv(&self, other: &RandVec) -> RandVec {
        assert_eq!(other.dim(), 1);
        assert_eq!(self.len(), other.len());
        RandVec {
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(v, s)| v.iter().map(|x| x * &s[0]).collect())
                .collect(),
        }
    }

    /// Linear combination `a * self + b * other`.
    pub fn linear(&self, a: &Rational, other: &RandVec, b: &Rational) -> RandVec {
        assert_eq!(self.dim(), other.dim());
        assert_eq!(self.len(), other.len());
        RandVec {
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(u, v)| {
                    u.iter()
                        .zip(v.iter())
                        .map(|(x, y)| a * x + b * y)
                        .collect()
                })
                .collect(),
        }
    }
}

/// Conditional expectation of `u` given the σ-algebra generated by `sigma`:
/// on each cell the weight-normalized average of `u`, and zero on
/// zero-weight cells.
pub fn cond_exp(space: &FiniteSpace, u: &RandVec, sigma: &Partition) -> RandVec {
    cond_exp_weights(&space.weights(), u, sigma)
}

pub(crate) fn cond_exp_weights(weights: &[Rational], u: &RandVec, sigma: &Partition) -> RandVec {
    assert_eq!(weights.len(), u.len(), "weights and values must align");
    let dim = u.dim();
    let mut values = vec![vec![Rational::zero(); dim]; weights.len()];
    for cell in sigma.cells() {
        let mut mass = Rational::zero();
        for &a in cell {
            mass += &weights[a];
        }
        if mass.is_zero() {
            continue; // zero on null cells
        }
        let mut avg = vec![Rational::zero(); dim];
        for &a in cell {
            if weights[a].is_zero() {
                continue;
            }
            for d in 0..dim {
                avg[d] += &weights[a] * &u.values[a][d];
            }
        }
        for v in avg.iter_mut() {
            *v /= &mass;
        }
        for &a in cell {
            values[a] = avg.clone();
        }
    }
    RandVec { values }
}

/// Conditional expectation under the conditional measure `P(· | H)` for the
/// cell `h_cell`; zero everywhere when the cell has zero probability.
pub(crate) fn cond_exp_given_cell(
    space: &FiniteSpace,
    u: &RandVec,
    sigma: &Partition,
    h_cell: &[usize],
) -> RandVec {
    let mass = space.mass(h_cell);
    let mut weights = vec![Rational::zero(); space.len()];
    if !mass.is_zero() {
        for &a in h_cell {
            weights[a] = space.weight(a) / &mass;
        }
    }
    cond_exp_weights(&weights, u, sigma)
}

fn checked_atom_budget(states: usize, steps: usize, budget: u128) -> Result<()> {
    let base = states as u128;
    let required = base.checked_pow(steps as u32).unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(())
}

fn checked_atom_budget_shifted(n: usize, m: usize, horizon: usize, budget: u128) -> Result<()> {
    // x_0 free, then (output, next state) pairs: n * (nm)^T atoms
    let required = (n as u128)
        .checked_mul(((n * m) as u128).checked_pow(horizon as u32).unwrap_or(u128::MAX))
        .unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(())
}

/// Enumerate every positive-probability trajectory of an HMC up to horizon
/// `t` (atoms are `(x_0..x_T, y_0..y_T)` with their exact weights).
pub fn enumerate_hmc(
    model: &HmcModel<Rational>,
    horizon: usize,
    budget: u128,
) -> Result<FiniteSpace> {
    let (n, m) = (model.n(), model.m());
    checked_atom_budget(n * m, horizon + 1, budget)?;
    let mut atoms = Vec::new();
    let mut x = Vec::with_capacity(horizon + 1);
    let mut y = Vec::with_capacity(horizon + 1);

    fn recurse(
        model: &HmcModel<Rational>,
        horizon: usize,
        weight: Rational,
        x: &mut Vec<usize>,
        y: &mut Vec<usize>,
        atoms: &mut Vec<Atom>,
    ) {
        let t = x.len();
        if t == horizon + 1 {
            atoms.push(Atom {
                label: AtomLabel::Path(Trajectory {
                    x: x.clone(),
                    y: y.clone(),
                }),
                weight,
            });
            return;
        }
        for xi in 0..model.n() {
            let step = if t == 0 {
                model.p0().get(xi).clone()
            } else {
                model.a()[(xi, x[t - 1])].clone()
            };
            if step.is_zero() {
                continue;
            }
            for yi in 0..model.m() {
                let emit = model.g()[(yi, xi)].clone();
                if emit.is_zero() {
                    continue;
                }
                x.push(xi);
                y.push(yi);
                recurse(model, horizon, &weight * &step * &emit, x, y, atoms);
                x.pop();
                y.pop();
            }
        }
    }

    recurse(model, horizon, Rational::one(), &mut x, &mut y, &mut atoms);
    FiniteSpace::from_path_atoms(
        atoms,
        PathMeta {
            n,
            m,
            x_len: horizon + 1,
            y_len: horizon + 1,
        },
    )
}

/// Enumerate a Σ_P system: `(x_0, y_0)` from the initial joint law, then
/// `(x_{t+1}, y_{t+1})` jointly from column `x_t` of the stacked kernel.
pub fn enumerate_sigma_p(
    model: &SigmaPModel<Rational>,
    horizon: usize,
    budget: u128,
) -> Result<FiniteSpace> {
    let (n, m) = (model.n(), model.m());
    checked_atom_budget(n * m, horizon + 1, budget)?;
    let stacked = model.stacked();
    let mut atoms = Vec::new();

    fn recurse(
        stacked: &Matrix<Rational>,
        n: usize,
        m: usize,
        horizon: usize,
        weight: Rational,
        x: &mut Vec<usize>,
        y: &mut Vec<usize>,
        atoms: &mut Vec<Atom>,
        q0: &ProbVector<Rational>,
    ) {
        let t = x.len();
        if t == horizon + 1 {
            atoms.push(Atom {
                label: AtomLabel::Path(Trajectory {
                    x: x.clone(),
                    y: y.clone(),
                }),
                weight,
            });
            return;
        }
        for xi in 0..n {
            for yi in 0..m {
                let k = joint_index(xi, yi, n);
                let step = if t == 0 {
                    q0.get(k).clone()
                } else {
                    stacked[(k, x[t - 1])].clone()
                };
                if step.is_zero() {
                    continue;
                }
                x.push(xi);
                y.push(yi);
                recurse(stacked, n, m, horizon, &weight * &step, x, y, atoms, q0);
                x.pop();
                y.pop();
            }
        }
    }

    let mut x = Vec::new();
    let mut y = Vec::new();
    recurse(
        &stacked,
        n,
        m,
        horizon,
        Rational::one(),
        &mut x,
        &mut y,
        &mut atoms,
        model.q0(),
    );
    FiniteSpace::from_path_atoms(
        atoms,
        PathMeta {
            n,
            m,
            x_len: horizon + 1,
            y_len: horizon + 1,
        },
    )
}

/// Enumerate a Σ_S system: `x_0` from `p0`, then `(y_t, x_{t+1})` jointly
/// from column `x_t`; atoms carry `y_0..y_{T-1}`.
pub fn enumerate_sigma_s(
    model: &SigmaSModel<Rational>,
    horizon: usize,
    budget: u128,
) -> Result<FiniteSpace> {
    let (n, m) = (model.n(), model.m());
    checked_atom_budget_shifted(n, m, horizon, budget)?;
    let stacked = model.stacked();
    let mut atoms = Vec::new();

    fn recurse(
        stacked: &Matrix<Rational>,
        n: usize,
        m: usize,
        horizon: usize,
        weight: Rational,
        x: &mut Vec<usize>,
        y: &mut Vec<usize>,
        atoms: &mut Vec<Atom>,
    ) {
        let t = x.len() - 1;
        if t == horizon {
            atoms.push(Atom {
                label: AtomLabel::Path(Trajectory {
                    x: x.clone(),
                    y: y.clone(),
                }),
                weight,
            });
            return;
        }
        let current = *x.last().unwrap();
        for next in 0..n {
            for out in 0..m {
                let step = stacked[(joint_index(next, out, n), current)].clone();
                if step.is_zero() {
                    continue;
                }
                x.push(next);
                y.push(out);
                recurse(stacked, n, m, horizon, &weight * &step, x, y, atoms);
                x.pop();
                y.pop();
            }
        }
    }

    for x0 in 0..n {
        let w0 = model.p0().get(x0).clone();
        if w0.is_zero() {
            continue;
        }
        let mut x = vec![x0];
        let mut y = Vec::new();
        recurse(&stacked, n, m, horizon, w0, &mut x, &mut y, &mut atoms);
    }
    FiniteSpace::from_path_atoms(
        atoms,
        PathMeta {
            n,
            m,
            x_len: horizon + 1,
            y_len: horizon,
        },
    )
}

/// A general synchronous joint chain on the `nm` pair states: transition
/// matrix `q` (column-stochastic, columns indexed by `y*n + x`) and initial
/// joint law `z0`. This is the most general input the structural verifiers
/// accept; the three model classes embed into it.
#[derive(Clone, Debug)]
pub struct JointChain {
    pub n: usize,
    pub m: usize,
    pub q: Matrix<Rational>,
    pub z0: Vec<Rational>,
}

impl JointChain {
    pub fn new(n: usize, m: usize, q: Matrix<Rational>, z0: Vec<Rational>) -> Result<Self> {
        let size = n * m;
        if q.rows() != size || q.cols() != size {
            return Err(Error::validation(
                "q",
                format!("must be {size}x{size}, got {}x{}", q.rows(), q.cols()),
            ));
        }
        if z0.len() != size {
            return Err(Error::validation(
                "z0",
                format!("length {} does not match n*m = {size}", z0.len()),
            ));
        }
        crate::matrix::StochMatrix::named(q.clone(), "q")?;
        ProbVector::named(z0.clone(), "z0")?;
        Ok(JointChain { n, m, q, z0 })
    }

    pub fn from_hmc(model: &HmcModel<Rational>) -> Self {
        JointChain {
            n: model.n(),
            m: model.m(),
            q: model.build_q(),
            z0: model.initial_joint(),
        }
    }

    pub fn from_sigma_p(model: &SigmaPModel<Rational>) -> Self {
        JointChain {
            n: model.n(),
            m: model.m(),
            q: model.joint_matrix(),
            z0: model.q0().as_slice().to_vec(),
        }
    }

    /// The pair process of a Σ_S system is also a synchronous joint chain:
    /// from `(x, y)` the next state follows `R_y` renormalized by the output
    /// mass, and the next output is drawn by the marginal channel at the
    /// next state. Pair states whose output mass is zero are unreachable;
    /// their columns are filled with an arbitrary valid law.
    pub fn from_sigma_s(model: &SigmaSModel<Rational>) -> Self {
        let (n, m) = (model.n(), model.m());
        let (_, g) = model.marginals();
        let g = g.into_matrix();
        let size = n * m;
        let mut q = Matrix::<Rational>::zeros(size, size);
        for x in 0..n {
            for y in 0..m {
                let col = joint_index(x, y, n);
                if g[(y, x)].is_zero() {
                    // unreachable pair state: uniform next state, marginal output
                    for nx in 0..n {
                        for ny in 0..m {
                            q[(joint_index(nx, ny, n), col)] =
                                Rational::from_ratio(1, n as i64) * &g[(ny, nx)];
                        }
                    }
                    continue;
                }
                for nx in 0..n {
                    let move_mass = &model.block(y)[(nx, x)] / &g[(y, x)];
                    if move_mass.is_zero() {
                        continue;
                    }
                    for ny in 0..m {
                        q[(joint_index(nx, ny, n), col)] = &move_mass * &g[(ny, nx)];
                    }
                }
            }
        }
        let z0 = (0..size)
            .map(|k| {
                let (x, y) = crate::matrix::joint_unpack(k, n);
                model.p0().get(x) * &g[(y, x)]
            })
            .collect();
        JointChain { n, m, q, z0 }
    }

    /// Enumerate all positive-probability synchronous trajectories.
    pub fn enumerate(&self, horizon: usize, budget: u128) -> Result<FiniteSpace> {
        checked_atom_budget(self.n * self.m, horizon + 1, budget)?;
        let mut atoms = Vec::new();
        let size = self.n * self.m;
        let mut flat: Vec<usize> = Vec::with_capacity(horizon + 1);

        fn recurse(
            chain: &JointChain,
            size: usize,
            horizon: usize,
            weight: Rational,
            flat: &mut Vec<usize>,
            atoms: &mut Vec<Atom>,
        ) {
            let t = flat.len();
            if t == horizon + 1 {
                let mut x = Vec::with_capacity(t);
                let mut y = Vec::with_capacity(t);
                for &k in flat.iter() {
                    let (xi, yi) = crate::matrix::joint_unpack(k, chain.n);
                    x.push(xi);
                    y.push(yi);
                }
                atoms.push(Atom {
                    label: AtomLabel::Path(Trajectory { x, y }),
                    weight,
                });
                return;
            }
            for k in 0..size {
                let step = if t == 0 {
                    chain.z0[k].clone()
                } else {
                    chain.q[(k, flat[t - 1])].clone()
                };
                if step.is_zero() {
                    continue;
                }
                flat.push(k);
                recurse(chain, size, horizon, &weight * &step, flat, atoms);
                flat.pop();
            }
        }

        recurse(self, size, horizon, Rational::one(), &mut flat, &mut atoms);
        FiniteSpace::from_path_atoms(
            atoms,
            PathMeta {
                n: self.n,
                m: self.m,
                x_len: horizon + 1,
                y_len: horizon + 1,
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::StochMatrix;

    type RMat = Matrix<Rational>;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn tiny_hmc() -> HmcModel<Rational> {
        HmcModel::new(
            StochMatrix::new(RMat::from_rows(vec![
                vec![r(1, 2), r(1, 3)],
                vec![r(1, 2), r(2, 3)],
            ]))
            .unwrap(),
            StochMatrix::new(RMat::from_rows(vec![
                vec![r(3, 4), r(1, 4)],
                vec![r(1, 4), r(3, 4)],
            ]))
            .unwrap(),
            ProbVector::new(vec![r(1, 3), r(2, 3)]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_state_space_is_one_atom() {
        let model = HmcModel::new(
            StochMatrix::new(RMat::identity(1)).unwrap(),
            StochMatrix::new(RMat::identity(1)).unwrap(),
            ProbVector::new(vec![r(1, 1)]).unwrap(),
        )
        .unwrap();
        let space = enumerate_hmc(&model, 2, DEFAULT_ATOM_BUDGET).unwrap();
        assert_eq!(space.len(), 1);
        assert_eq!(space.weight(0), &r(1, 1));
    }

    #[test]
    fn identity_chain_has_two_equal_atoms() {
        let model = HmcModel::new(
            StochMatrix::new(RMat::identity(2)).unwrap(),
            StochMatrix::new(RMat::identity(2)).unwrap(),
            ProbVector::uniform(2),
        )
        .unwrap();
        let space = enumerate_hmc(&model, 1, DEFAULT_ATOM_BUDGET).unwrap();
        assert_eq!(space.len(), 2);
        assert_eq!(space.weight(0), &r(1, 2));
        assert_eq!(space.weight(1), &r(1, 2));
    }

    #[test]
    fn enumeration_weights_sum_to_one() {
        let space = enumerate_hmc(&tiny_hmc(), 3, DEFAULT_ATOM_BUDGET).unwrap();
        let total: Rational = space.weights().into_iter().fold(r(0, 1), |a, b| a + b);
        assert_eq!(total, r(1, 1));
        // strictly positive model: all (nm)^(T+1) trajectories survive
        assert_eq!(space.len(), 4usize.pow(4));
    }

    #[test]
    fn budget_is_enforced() {
        let err = enumerate_hmc(&tiny_hmc(), 12, 1000).unwrap_err();
        match err {
            Error::BudgetExceeded { required, budget } => {
                assert_eq!(budget, 1000);
                assert_eq!(required, 4u128.pow(13));
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn sigma_p_enumeration_matches_hmc_law() {
        let model = tiny_hmc();
        let direct = enumerate_hmc(&model, 2, DEFAULT_ATOM_BUDGET).unwrap();
        let via_blocks =
            enumerate_sigma_p(&model.to_sigma_p(), 2, DEFAULT_ATOM_BUDGET).unwrap();
        assert_eq!(direct.len(), via_blocks.len());
        for a in 0..direct.len() {
            assert_eq!(direct.path(a), via_blocks.path(a));
            assert_eq!(direct.weight(a), via_blocks.weight(a));
        }
    }

    #[test]
    fn joint_chain_enumeration_matches_hmc_law() {
        let model = tiny_hmc();
        let direct = enumerate_hmc(&model, 2, DEFAULT_ATOM_BUDGET).unwrap();
        let via_joint = JointChain::from_hmc(&model)
            .enumerate(2, DEFAULT_ATOM_BUDGET)
            .unwrap();
        assert_eq!(direct.len(), via_joint.len());
        for a in 0..direct.len() {
            assert_eq!(direct.path(a), via_joint.path(a));
            assert_eq!(direct.weight(a), via_joint.weight(a));
        }
    }

    #[test]
    fn sigma_s_space_shape() {
        let model = tiny_hmc().to_sigma_s();
        let space = enumerate_sigma_s(&model, 2, DEFAULT_ATOM_BUDGET).unwrap();
        let meta = space.meta().unwrap();
        assert_eq!((meta.x_len, meta.y_len), (3, 2));
        let total: Rational = space.weights().into_iter().fold(r(0, 1), |a, b| a + b);
        assert_eq!(total, r(1, 1));
    }

    #[test]
    fn cond_exp_trivial_and_finest() {
        let space = FiniteSpace::from_weights(vec![r(1, 4), r(1, 4), r(1, 2)]).unwrap();
        let u = RandVec::new(vec![
            vec![r(1, 1)],
            vec![r(2, 1)],
            vec![r(4, 1)],
        ])
        .unwrap();
        // trivial partition -> constant EU = 1/4 + 2/4 + 4/2 = 11/4
        let ce = cond_exp(&space, &u, &Partition::trivial(3));
        for a in 0..3 {
            assert_eq!(ce.value(a), &[r(11, 4)]);
        }
        // finest partition -> u itself on positive atoms
        let ce = cond_exp(&space, &u, &Partition::finest(3));
        for a in 0..3 {
            assert_eq!(ce.value(a), u.value(a));
        }
    }

    #[test]
    fn cond_exp_zero_cell_convention() {
        let space = FiniteSpace::from_weights(vec![r(1, 2), r(1, 2), r(0, 1)]).unwrap();
        let u = RandVec::new(vec![vec![r(5, 1)], vec![r(7, 1)], vec![r(9, 1)]]).unwrap();
        let sigma = Partition::new(vec![vec![0, 1], vec![2]], 3).unwrap();
        let ce = cond_exp(&space, &u, &sigma);
        assert_eq!(ce.value(0), &[r(6, 1)]);
        assert_eq!(ce.value(2), &[r(0, 1)], "zero-weight cell gets value 0");
    }

    #[test]
    fn cond_exp_tower_property() {
        // coarse = by pairs, fine = finest; E[E[U|fine]|coarse] = E[U|coarse]
        let space = FiniteSpace::from_weights(vec![r(1, 8), r(3, 8), r(1, 8), r(3, 8)]).unwrap();
        let u = RandVec::new(vec![
            vec![r(1, 1), r(0, 1)],
            vec![r(2, 1), r(1, 2)],
            vec![r(3, 1), r(1, 3)],
            vec![r(4, 1), r(1, 4)],
        ])
        .unwrap();
        let coarse = Partition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let fine = coarse.join(&Partition::finest(4));
        let inner = cond_exp(&space, &u, &fine);
        let lhs = cond_exp(&space, &inner, &coarse);
        let rhs = cond_exp(&space, &u, &coarse);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![vec![0], vec![1]], 2).is_ok());
        assert!(Partition::new(vec![vec![0]], 2).is_err(), "not exhaustive");
        assert!(Partition::new(vec![vec![0, 1], vec![1]], 2).is_err(), "overlap");
        assert!(Partition::new(vec![vec![0, 1], vec![]], 2).is_err(), "empty cell");
    }

    #[test]
    fn space_validation_requires_exact_total() {
        assert!(FiniteSpace::from_weights(vec![r(1, 2), r(1, 3)]).is_err());
        assert!(FiniteSpace::from_weights(vec![r(1, 2), r(-1, 2), r(1, 1)]).is_err());
    }
}
