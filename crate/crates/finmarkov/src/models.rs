//! Model records for the three system classes and the matrix constructions
//! that tie them together.
//!
//! * [`HmcModel`]: hidden Markov chain `(A, G, p0)` — `A` drives the state,
//!   `G` is the observation channel, both column-stochastic.
//! * [`SigmaPModel`]: joint kernel blocks `Q_1..Q_m` with initial joint law
//!   `q0`; block `Q_i` maps the current state to the sub-probability of
//!   `(next state, next output = i)`.
//! * [`SigmaSModel`]: blocks `R_1..R_m` with initial state law `p0`; block
//!   `R_i` maps the current state to the sub-probability of
//!   `(next state, current output = i)`.
//!
//! An HMC is exactly a system that lives in both classes, with
//! `Q_i = diag(G_i.) A` and `R_i = A diag(G_i.)`; the recovery routines here
//! decide membership by reconstructing those factors.

use crate::error::{Error, Result};
use crate::matrix::{x_selector, y_selector, Matrix, ProbVector, StochMatrix};
use crate::scalar::{sum, Scalar};

/// Default entrywise tolerance for membership tests over floats. Exact
/// scalars ignore it.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

fn is_positive<S: Scalar>(v: &S, tol: f64) -> bool {
    if S::is_exact() {
        !v.is_zero()
    } else {
        v.to_f64().abs() > tol
    }
}

/// Hidden Markov chain: state transition `A` (n x n), observation channel
/// `G` (m x n, column i is the output law in state i), initial state law
/// `p0`.
#[derive(Clone, Debug)]
pub struct HmcModel<S: Scalar> {
    n: usize,
    m: usize,
    a: StochMatrix<S>,
    g: StochMatrix<S>,
    p0: ProbVector<S>,
}

impl<S: Scalar> HmcModel<S> {
    pub fn new(a: StochMatrix<S>, g: StochMatrix<S>, p0: ProbVector<S>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::validation(
                "A",
                format!("must be square, got {}x{}", a.rows(), a.cols()),
            ));
        }
        if g.cols() != n {
            return Err(Error::validation(
                "G",
                format!("must have {} columns to match A, got {}", n, g.cols()),
            ));
        }
        if p0.len() != n {
            return Err(Error::validation(
                "p0",
                format!("length {} does not match state count {}", p0.len(), n),
            ));
        }
        let m = g.rows();
        for i in 0..m {
            if g.row(i).iter().all(|v| v.is_zero()) {
                return Err(Error::validation(
                    format!("G row {i}"),
                    "all-zero row: output symbol can never occur",
                ));
            }
        }
        Ok(HmcModel { n, m, a, g, p0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn a(&self) -> &StochMatrix<S> {
        &self.a
    }

    pub fn g(&self) -> &StochMatrix<S> {
        &self.g
    }

    pub fn p0(&self) -> &ProbVector<S> {
        &self.p0
    }

    /// Transition matrix of the synchronous joint chain `Z = Y ⊗ X`:
    /// `Q = Δ(G) A (1ᵀ_m ⊗ I_n)`. Block `(i, j)` of the m x m block grid
    /// equals `diag(G_i.) A` for every `j`.
    pub fn build_q(&self) -> Matrix<S> {
        self.g
            .delta()
            .mul(self.a.matrix())
            .mul(&x_selector(self.n, self.m))
    }

    /// Transition matrix of the shifted joint chain `W_t = Y_{t-1} ⊗ X_t`:
    /// `R = (I_m ⊗ A) Δ(G) (1ᵀ_m ⊗ I_n)`.
    pub fn build_r(&self) -> Matrix<S> {
        Matrix::identity(self.m)
            .kron(self.a.matrix())
            .mul(&self.g.delta())
            .mul(&x_selector(self.n, self.m))
    }

    /// Initial law of the joint chain: `E Z_0 = Δ(G) p0`.
    pub fn initial_joint(&self) -> Vec<S> {
        self.g.delta().mul_vec(self.p0.as_slice())
    }

    /// Block view `Q_i = diag(G_i.) A` with joint initial law `q0 = Δ(G) p0`.
    pub fn to_sigma_p(&self) -> SigmaPModel<S> {
        let blocks = (0..self.m)
            .map(|i| Matrix::diag(self.g.row(i)).mul(self.a.matrix()))
            .collect();
        let q0 = ProbVector::named(self.initial_joint(), "q0")
            .expect("joint initial law of a valid model is a probability vector");
        SigmaPModel::new(blocks, q0).expect("conversion of a valid model preserves stochasticity")
    }

    /// Block view `R_i = A diag(G_i.)` with the state initial law carried
    /// over unchanged.
    pub fn to_sigma_s(&self) -> SigmaSModel<S> {
        let blocks = (0..self.m)
            .map(|i| self.a.matrix().mul(&Matrix::diag(self.g.row(i))))
            .collect();
        SigmaSModel::new(blocks, self.p0.clone())
            .expect("conversion of a valid model preserves stochasticity")
    }

    pub fn to_f64(&self) -> HmcModel<f64> {
        HmcModel {
            n: self.n,
            m: self.m,
            a: self.a.to_f64(),
            g: self.g.to_f64(),
            p0: self.p0.to_f64(),
        }
    }
}

/// Result of trying to factor a block kernel as a hidden Markov chain.
///
/// `transition` and `emission` are the recovered `(A, G)` candidates;
/// `ambiguous_states` lists states that are unreachable at every time, whose
/// emission column is unconstrained by the input (reported, not guessed:
/// they are filled uniformly).
#[derive(Clone, Debug)]
pub struct HmcRecovery<S: Scalar> {
    pub member: bool,
    pub transition: Matrix<S>,
    pub emission: Matrix<S>,
    pub ambiguous_states: Vec<usize>,
}

/// System given by the synchronous joint kernel: blocks `Q_1..Q_m` with
/// `Q_i x = (sub-law of next state on {next output = i})`, plus the initial
/// joint law `q0` over `(state, output)` pairs.
#[derive(Clone, Debug)]
pub struct SigmaPModel<S: Scalar> {
    n: usize,
    m: usize,
    blocks: Vec<Matrix<S>>,
    q0: ProbVector<S>,
}

impl<S: Scalar> SigmaPModel<S> {
    pub fn new(blocks: Vec<Matrix<S>>, q0: ProbVector<S>) -> Result<Self> {
        let (n, m) = validate_blocks(&blocks)?;
        if q0.len() != n * m {
            return Err(Error::validation(
                "q0",
                format!("length {} does not match n*m = {}", q0.len(), n * m),
            ));
        }
        Ok(SigmaPModel { n, m, blocks, q0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[Matrix<S>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Matrix<S> {
        &self.blocks[i]
    }

    pub fn q0(&self) -> &ProbVector<S> {
        &self.q0
    }

    /// The stacked kernel `Q̄ = [Q_1; ...; Q_m]` (nm x n, column-stochastic).
    pub fn stacked(&self) -> Matrix<S> {
        stack_blocks(&self.blocks)
    }

    /// Full transition matrix of `Z`: `Q = Q̄ (1ᵀ_m ⊗ I_n)` (nm x nm).
    pub fn joint_matrix(&self) -> Matrix<S> {
        self.stacked().mul(&x_selector(self.n, self.m))
    }

    /// State and output marginal kernels: `A = (1ᵀ_m ⊗ I_n) Q̄ = Σ_i Q_i`
    /// and `C = (I_m ⊗ 1ᵀ_n) Q̄` (row i sums block `Q_i` columnwise).
    pub fn marginals(&self) -> (StochMatrix<S>, StochMatrix<S>) {
        let q_bar = self.stacked();
        let a = x_selector(self.n, self.m).mul(&q_bar);
        let c = y_selector(self.n, self.m).mul(&q_bar);
        (
            StochMatrix::named(a, "A").expect("state marginal of a valid kernel is stochastic"),
            StochMatrix::named(c, "C").expect("output marginal of a valid kernel is stochastic"),
        )
    }

    /// Recover the `(A, G)` factors that would make this an HMC and check
    /// them against the kernel and the initial law.
    ///
    /// `G` column `k` is read off `Q̄` directly as
    /// `G[i][k] = Q_i[k][j] / A[k][j]` for a column `j` carrying mass in row
    /// `k`; states never entered by `A` fall back to the initial law, and
    /// states with no mass anywhere are reported as ambiguous.
    pub fn hmc_recovery(&self, tol: f64) -> HmcRecovery<S> {
        let (n, m) = (self.n, self.m);
        let a = sum_blocks(&self.blocks);
        // state marginal of the initial joint law
        let p0_marginal: Vec<S> = (0..n)
            .map(|k| sum((0..m).map(|i| self.q0.get(i * n + k).clone())))
            .collect();

        let mut emission = Matrix::zeros(m, n);
        let mut ambiguous = Vec::new();
        let mut member = true;

        for k in 0..n {
            // pick the heaviest column of A's row k for the ratio
            let pivot = (0..n)
                .filter(|&j| is_positive(&a[(k, j)], tol))
                .max_by(|&j1, &j2| {
                    a[(k, j1)]
                        .partial_cmp(&a[(k, j2)])
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
            if let Some(j0) = pivot {
                for i in 0..m {
                    emission[(i, k)] = self.blocks[i][(k, j0)].clone() / a[(k, j0)].clone();
                }
            } else if is_positive(&p0_marginal[k], tol) {
                for i in 0..m {
                    emission[(i, k)] = self.q0.get(i * n + k).clone() / p0_marginal[k].clone();
                }
            } else {
                ambiguous.push(k);
                for i in 0..m {
                    emission[(i, k)] = S::from_ratio(1, m as i64);
                }
            }
        }

        // kernel condition: Q_i = diag(G_i.) A entrywise
        'kernel: for i in 0..m {
            for k in 0..n {
                for j in 0..n {
                    let expect = emission[(i, k)].clone() * a[(k, j)].clone();
                    if !self.blocks[i][(k, j)].approx_eq(&expect, tol) {
                        member = false;
                        break 'kernel;
                    }
                }
            }
        }

        // initial-law condition: q0 = Δ(G) p0_marginal
        if member {
            let q0_expect = emission.delta().mul_vec(&p0_marginal);
            member = self
                .q0
                .as_slice()
                .iter()
                .zip(q0_expect.iter())
                .all(|(got, want)| got.approx_eq(want, tol));
        }

        HmcRecovery {
            member,
            transition: a,
            emission,
            ambiguous_states: ambiguous,
        }
    }

    /// True when the kernel and initial law are exactly those of some HMC.
    pub fn is_hmc(&self, tol: f64) -> bool {
        self.hmc_recovery(tol).member
    }

    pub fn to_f64(&self) -> SigmaPModel<f64> {
        SigmaPModel {
            n: self.n,
            m: self.m,
            blocks: self.blocks.iter().map(|b| b.to_f64()).collect(),
            q0: self.q0.to_f64(),
        }
    }
}

/// System given by the shifted joint kernel: blocks `R_1..R_m` with
/// `R_i x = (sub-law of next state on {current output = i})`, plus the
/// initial state law `p0`.
#[derive(Clone, Debug)]
pub struct SigmaSModel<S: Scalar> {
    n: usize,
    m: usize,
    blocks: Vec<Matrix<S>>,
    p0: ProbVector<S>,
}

impl<S: Scalar> SigmaSModel<S> {
    pub fn new(blocks: Vec<Matrix<S>>, p0: ProbVector<S>) -> Result<Self> {
        let (n, m) = validate_blocks(&blocks)?;
        if p0.len() != n {
            return Err(Error::validation(
                "p0",
                format!("length {} does not match state count {}", p0.len(), n),
            ));
        }
        Ok(SigmaSModel { n, m, blocks, p0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[Matrix<S>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Matrix<S> {
        &self.blocks[i]
    }

    pub fn p0(&self) -> &ProbVector<S> {
        &self.p0
    }

    /// The stacked kernel `R̄ = [R_1; ...; R_m]` (nm x n, column-stochastic).
    pub fn stacked(&self) -> Matrix<S> {
        stack_blocks(&self.blocks)
    }

    /// Full transition matrix of `W`: `R = R̄ (1ᵀ_m ⊗ I_n)` (nm x nm).
    pub fn joint_matrix(&self) -> Matrix<S> {
        self.stacked().mul(&x_selector(self.n, self.m))
    }

    /// State and output marginal kernels: `A = (1ᵀ_m ⊗ I_n) R̄ = Σ_i R_i`
    /// and `G = (I_m ⊗ 1ᵀ_n) R̄`.
    pub fn marginals(&self) -> (StochMatrix<S>, StochMatrix<S>) {
        let r_bar = self.stacked();
        let a = x_selector(self.n, self.m).mul(&r_bar);
        let g = y_selector(self.n, self.m).mul(&r_bar);
        (
            StochMatrix::named(a, "A").expect("state marginal of a valid kernel is stochastic"),
            StochMatrix::named(g, "G").expect("output marginal of a valid kernel is stochastic"),
        )
    }

    /// Recover `(A, G)` and test `R_i = A diag(G_i.)`. Here the factors are
    /// always determined (columns of `R̄` sum to 1), so no state is
    /// ambiguous.
    pub fn hmc_recovery(&self, tol: f64) -> HmcRecovery<S> {
        let (n, m) = (self.n, self.m);
        let a = sum_blocks(&self.blocks);
        let mut emission = Matrix::zeros(m, n);
        for i in 0..m {
            for k in 0..n {
                emission[(i, k)] = self.blocks[i].col_sum(k);
            }
        }
        let mut member = true;
        'kernel: for i in 0..m {
            for l in 0..n {
                for k in 0..n {
                    let expect = a[(l, k)].clone() * emission[(i, k)].clone();
                    if !self.blocks[i][(l, k)].approx_eq(&expect, tol) {
                        member = false;
                        break 'kernel;
                    }
                }
            }
        }
        HmcRecovery {
            member,
            transition: a,
            emission,
            ambiguous_states: Vec::new(),
        }
    }

    pub fn is_hmc(&self, tol: f64) -> bool {
        self.hmc_recovery(tol).member
    }

    pub fn to_f64(&self) -> SigmaSModel<f64> {
        SigmaSModel {
            n: self.n,
            m: self.m,
            blocks: self.blocks.iter().map(|b| b.to_f64()).collect(),
            p0: self.p0.to_f64(),
        }
    }
}

fn validate_blocks<S: Scalar>(blocks: &[Matrix<S>]) -> Result<(usize, usize)> {
    if blocks.is_empty() {
        return Err(Error::validation("blocks", "need at least one block"));
    }
    let n = blocks[0].rows();
    let m = blocks.len();
    for (i, b) in blocks.iter().enumerate() {
        if b.rows() != n || b.cols() != n {
            return Err(Error::validation(
                format!("blocks[{i}]"),
                format!("must be {n}x{n}, got {}x{}", b.rows(), b.cols()),
            ));
        }
        for r in 0..n {
            for c in 0..n {
                if b[(r, c)] < S::zero() {
                    return Err(Error::validation(
                        format!("blocks[{i}][{r}][{c}]"),
                        format!("negative entry {}", b[(r, c)].render()),
                    ));
                }
            }
        }
    }
    // stacked kernel must be column-stochastic
    let stacked = stack_blocks(blocks);
    StochMatrix::named(stacked, "stacked blocks")?;
    Ok((n, m))
}

fn stack_blocks<S: Scalar>(blocks: &[Matrix<S>]) -> Matrix<S> {
    let n = blocks[0].rows();
    let m = blocks.len();
    Matrix::from_fn(n * m, n, |r, c| blocks[r / n][(r % n, c)].clone())
}

fn sum_blocks<S: Scalar>(blocks: &[Matrix<S>]) -> Matrix<S> {
    let mut acc = blocks[0].clone();
    for b in &blocks[1..] {
        acc = acc.add(b);
    }
    acc
}

/// An invariant probability vector of a column-stochastic matrix, plus a
/// uniqueness flag. When the chain is reducible there are several invariant
/// vectors; the one returned is supported on the closed communicating class
/// containing the lowest state index, and `unique` is false.
#[derive(Clone, Debug)]
pub struct InvariantDistribution<S: Scalar> {
    pub pi: ProbVector<S>,
    pub unique: bool,
}

/// Solve `A π = π`, `π ≥ 0`, `Σ π = 1` by restricting to a closed
/// communicating class and solving the linear system there (exact over
/// rationals).
pub fn invariant_distribution<S: Scalar>(a: &StochMatrix<S>) -> InvariantDistribution<S> {
    let n = a.rows();
    // reachability closure on the support digraph (edge j -> i iff A[i][j] > 0)
    let mut reach = vec![vec![false; n]; n];
    for j in 0..n {
        reach[j][j] = true;
        for i in 0..n {
            if !a[(i, j)].is_zero() {
                reach[j][i] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    // communicating classes, then keep the closed ones
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if class_of[i] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let members: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &members {
            class_of[j] = id;
        }
        classes.push(members);
    }
    let closed: Vec<&Vec<usize>> = classes
        .iter()
        .filter(|c| {
            c.iter()
                .all(|&j| (0..n).all(|i| a[(i, j)].is_zero() || class_of[i] == class_of[j]))
        })
        .collect();
    let unique = closed.len() == 1;
    let class = closed
        .iter()
        .min_by_key(|c| c.iter().min().copied().unwrap())
        .expect("a stochastic matrix always has a closed class");

    // solve (A_C - I) pi = 0 with the last row replaced by the
    // normalization constraint
    let k = class.len();
    let mut system = Matrix::<S>::zeros(k, k);
    for (r, &i) in class.iter().enumerate() {
        for (c, &j) in class.iter().enumerate() {
            system[(r, c)] = a[(i, j)].clone();
            if r == c {
                system[(r, c)] = system[(r, c)].clone() - S::one();
            }
        }
    }
    for c in 0..k {
        system[(k - 1, c)] = S::one();
    }
    let mut rhs = vec![S::zero(); k];
    rhs[k - 1] = S::one();
    let solution = solve_linear(system, rhs);

    let mut pi = vec![S::zero(); n];
    for (r, &i) in class.iter().enumerate() {
        let mut v = solution[r].clone();
        // float round-off can leave a tiny negative residue
        if v < S::zero() && v.to_f64().abs() < 1e-9 {
            v = S::zero();
        }
        pi[i] = v;
    }
    let pi = ProbVector::normalize(pi).expect("invariant vector has positive mass");
    InvariantDistribution { pi, unique }
}

/// Gaussian elimination with partial pivoting; the callers only pass
/// nonsingular systems.
fn solve_linear<S: Scalar>(mut m: Matrix<S>, mut b: Vec<S>) -> Vec<S> {
    let k = b.len();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&r1, &r2| {
                m[(r1, col)]
                    .abs()
                    .partial_cmp(&m[(r2, col)].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        assert!(!m[(pivot, col)].is_zero(), "singular system");
        if pivot != col {
            for c in 0..k {
                let tmp = m[(pivot, c)].clone();
                m[(pivot, c)] = m[(col, c)].clone();
                m[(col, c)] = tmp;
            }
            b.swap(pivot, col);
        }
        let diag = m[(col, col)].clone();
        for r in (col + 1)..k {
            if m[(r, col)].is_zero() {
                continue;
            }
            let factor = m[(r, col)].clone() / diag.clone();
            for c in col..k {
                m[(r, c)] = m[(r, c)].clone() - factor.clone() * m[(col, c)].clone();
            }
            b[r] = b[r].clone() - factor * b[col].clone();
        }
    }
    let mut x = vec![S::zero(); k];
    for col in (0..k).rev() {
        let mut acc = b[col].clone();
        for c in (col + 1)..k {
            acc = acc - m[(col, c)].clone() * x[c].clone();
        }
        x[col] = acc / m[(col, col)].clone();
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type RMat = Matrix<Rational>;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn identity_chain() -> HmcModel<Rational> {
        // n = m = 2, A = I, G = I, p0 = (1/2, 1/2)
        HmcModel::new(
            StochMatrix::new(RMat::identity(2)).unwrap(),
            StochMatrix::new(RMat::identity(2)).unwrap(),
            ProbVector::new(vec![r(1, 2), r(1, 2)]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn build_q_single_state() {
        let model = HmcModel::new(
            StochMatrix::new(RMat::identity(1)).unwrap(),
            StochMatrix::new(RMat::identity(1)).unwrap(),
            ProbVector::new(vec![r(1, 1)]).unwrap(),
        )
        .unwrap();
        assert_eq!(model.build_q(), RMat::from_int_rows(&[&[1]]));
        assert_eq!(model.build_r(), RMat::from_int_rows(&[&[1]]));
    }

    #[test]
    fn build_q_identity_chain() {
        let q = identity_chain().build_q();
        let expect = RMat::from_int_rows(&[
            &[1, 0, 1, 0],
            &[0, 0, 0, 0],
            &[0, 0, 0, 0],
            &[0, 1, 0, 1],
        ]);
        assert_eq!(q, expect);
    }

    #[test]
    fn build_r_identity_chain() {
        let model = identity_chain();
        // A = I makes R̄ = Δ(I_2), so R = Δ(I_2)(1ᵀ_2 ⊗ I_2)
        let r_bar = RMat::identity(2).delta();
        let expect = r_bar.mul(&x_selector(2, 2));
        assert_eq!(model.build_r(), expect);
    }

    #[test]
    fn conversions_on_identity_chain() {
        let model = identity_chain();
        let sp = model.to_sigma_p();
        assert_eq!(sp.block(0), &RMat::from_int_rows(&[&[1, 0], &[0, 0]]));
        assert_eq!(sp.block(1), &RMat::from_int_rows(&[&[0, 0], &[0, 1]]));
        let ss = model.to_sigma_s();
        assert_eq!(ss.block(0), &RMat::from_int_rows(&[&[1, 0], &[0, 0]]));
        assert_eq!(ss.block(1), &RMat::from_int_rows(&[&[0, 0], &[0, 1]]));
    }

    #[test]
    fn zero_row_of_g_is_rejected() {
        let g = RMat::from_rows(vec![vec![r(1, 1), r(1, 1)], vec![r(0, 1), r(0, 1)]]);
        let err = HmcModel::new(
            StochMatrix::new(RMat::identity(2)).unwrap(),
            StochMatrix::new(g).unwrap(),
            ProbVector::new(vec![r(1, 2), r(1, 2)]).unwrap(),
        )
        .unwrap_err();
        assert!(format!("{err}").contains("G row 1"), "{err}");
    }

    #[test]
    fn sigma_p_marginals_single_output() {
        // m = 1: A = Q_1 and C is a single row of ones
        let q1 = RMat::from_rows(vec![vec![r(1, 3), r(1, 2)], vec![r(2, 3), r(1, 2)]]);
        let model = SigmaPModel::new(
            vec![q1.clone()],
            ProbVector::new(vec![r(1, 2), r(1, 2)]).unwrap(),
        )
        .unwrap();
        let (a, c) = model.marginals();
        assert_eq!(a.matrix(), &q1);
        assert_eq!(c.matrix(), &RMat::ones_row(2));
    }

    #[test]
    fn sigma_s_marginals_edge_dims() {
        // m = 1: A = R_1, G = 1ᵀ
        let r1 = RMat::from_rows(vec![vec![r(1, 4), r(3, 5)], vec![r(3, 4), r(2, 5)]]);
        let model = SigmaSModel::new(
            vec![r1.clone()],
            ProbVector::new(vec![r(1, 2), r(1, 2)]).unwrap(),
        )
        .unwrap();
        let (a, g) = model.marginals();
        assert_eq!(a.matrix(), &r1);
        assert_eq!(g.matrix(), &RMat::ones_row(2));
        assert!(model.is_hmc(MEMBERSHIP_TOL), "m=1 kernels always factor");

        // n = 1: A = [1], G = column of block scalars
        let blocks = vec![
            RMat::from_rows(vec![vec![r(1, 3)]]),
            RMat::from_rows(vec![vec![r(2, 3)]]),
        ];
        let model =
            SigmaSModel::new(blocks, ProbVector::new(vec![r(1, 1)]).unwrap()).unwrap();
        let (a, g) = model.marginals();
        assert_eq!(a.matrix(), &RMat::from_int_rows(&[&[1]]));
        assert_eq!(g.matrix(), &RMat::from_rows(vec![vec![r(1, 3)], vec![r(2, 3)]]));
    }

    #[test]
    fn invariant_of_identity_is_flagged_non_unique() {
        let inv = invariant_distribution(&StochMatrix::new(RMat::identity(2)).unwrap());
        assert!(!inv.unique);
        // a vertex solution: point mass on the first closed class
        assert_eq!(inv.pi.as_slice(), &[r(1, 1), r(0, 1)]);
    }

    #[test]
    fn invariant_of_swap_chain() {
        let swap = RMat::from_int_rows(&[&[0, 1], &[1, 0]]);
        let inv = invariant_distribution(&StochMatrix::new(swap).unwrap());
        assert!(inv.unique);
        assert_eq!(inv.pi.as_slice(), &[r(1, 2), r(1, 2)]);
    }

    #[test]
    fn invariant_float_backend_agrees() {
        let swap = Matrix::<f64>::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let inv = invariant_distribution(&StochMatrix::new(swap).unwrap());
        assert!(inv.unique);
        assert!((inv.pi.get(0) - 0.5).abs() < 1e-12);
    }
}
