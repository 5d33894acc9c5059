//! Finite hidden Markov chains and finite stochastic systems: construction,
//! seeded simulation, exact recursive filtering, and a brute-force
//! finite-probability-space oracle that certifies the structural identities
//! the whole stack relies on.
//!
//! # Conventions (read this first)
//!
//! * **Column-stochastic throughout.** Entry `(i, j)` of every kernel matrix
//!   is the probability of moving **to `i` from `j`**:
//!   `A[i][j] = P(X_{t+1} = e_i | X_t = e_j)`. This is the transpose of the
//!   row-stochastic convention most HMM texts use. The model file format
//!   carries an explicit `"column_stochastic": true` field so files cannot
//!   be silently misread.
//! * **Joint state ordering.** The joint chain `Z = Y ⊗ X` lives on `nm`
//!   states; the pair `(x, y)` sits at flat index `y * n + x` (0-based).
//! * **Indices.** States and outputs are 0-based in the API; the CSV and
//!   JSON file formats are 1-based.
//! * **Two scalar backends.** Every operation is generic over [`Scalar`]
//!   with two interchangeable realizations: [`Rational`]
//!   (arbitrary-precision, exact — identities are certified by literal
//!   equality) and `f64` (for long horizons and Monte Carlo work).
//!
//! # Layout
//!
//! * [`matrix`] — dense kernel: Kronecker products, column-stacking
//!   vectorization, the Δ-operator, stochastic newtypes.
//! * [`models`] — the three system records (`HmcModel`, `SigmaPModel`,
//!   `SigmaSModel`), joint-kernel constructions, conversions, membership
//!   tests, invariant distributions.
//! * [`simulate`] — seeded trajectory sampling and empirical kernels.
//! * [`filters`] — the three recursive inference routes and the
//!   `G_x` Bayes-correction operator.
//! * [`finprob`] — exact finite probability spaces: path enumeration,
//!   partition σ-algebras, conditional expectation, and the property
//!   verifiers (factorization, splitting, Markov structure, the five-clause
//!   equivalence suite, conditional-Bayes identities).
//! * [`io`] — model JSON and observation CSV formats shared with the CLI.
//! * [`testing`] — deterministic random generators used by the test suite
//!   and the examples.
//!
//! # Quick start
//!
//! ```
//! use finmarkov::prelude::*;
//!
//! // Two states, two outputs, exact rationals.
//! let a = StochMatrix::new(Matrix::from_rows(vec![
//!     vec![Rational::from_ratio(1, 2), Rational::from_ratio(1, 4)],
//!     vec![Rational::from_ratio(1, 2), Rational::from_ratio(3, 4)],
//! ]))
//! .unwrap();
//! let g = StochMatrix::new(Matrix::from_rows(vec![
//!     vec![Rational::from_ratio(3, 4), Rational::from_ratio(1, 4)],
//!     vec![Rational::from_ratio(1, 4), Rational::from_ratio(3, 4)],
//! ]))
//! .unwrap();
//! let model = HmcModel::new(a, g, ProbVector::uniform(2)).unwrap();
//!
//! // Filter a short observation record along all three routes; they agree
//! // exactly.
//! let ys = [0, 1, 1];
//! let native = run_hmc_route(&model, &ys, HmcRoute::Native).unwrap();
//! let via_p = run_hmc_route(&model, &ys, HmcRoute::SigmaP).unwrap();
//! assert_eq!(
//!     native.last().unwrap().x_filt.as_slice(),
//!     via_p.last().unwrap().x_filt.as_slice()
//! );
//! ```

pub mod error;
pub mod filters;
pub mod finprob;
pub mod io;
pub mod matrix;
pub mod models;
pub mod scalar;
pub mod simulate;
pub mod testing;

pub use error::{Error, Result};
pub use matrix::{joint_index, joint_unpack, x_selector, y_selector, Matrix, ProbVector, StochMatrix};
pub use scalar::{Rational, Scalar};

/// Common imports for examples and downstream code.
pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::filters::{
        g_map, run_filter, run_filter_with_policy, run_hmc_route, total_likelihood, FilterState,
        HmcRoute, Model, OnImpossible,
    };
    pub use crate::matrix::{
        joint_index, joint_unpack, x_selector, y_selector, Matrix, ProbVector, StochMatrix,
    };
    pub use crate::models::{
        invariant_distribution, HmcModel, SigmaPModel, SigmaSModel, MEMBERSHIP_TOL,
    };
    pub use crate::scalar::{Rational, Scalar};
    pub use crate::simulate::{
        empirical_kernel, sample_hmc, sample_sigma_p, sample_sigma_s, PathSample, RngState,
    };
}
