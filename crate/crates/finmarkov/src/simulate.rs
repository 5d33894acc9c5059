//! Seeded trajectory sampling for the three model classes, plus empirical
//! kernel estimation for Monte Carlo validation.
//!
//! Sampling is driven by a counter-based generator ([`RngState`]) so that a
//! `(seed, stream)` pair reproduces the same trajectory bit-for-bit across
//! runs and thread counts; parallel replicates draw from derived streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::matrix::{joint_index, joint_unpack, Matrix};
use crate::models::{HmcModel, SigmaPModel, SigmaSModel};
use crate::scalar::Scalar;

/// Reproducible generator state: a 64-bit seed plus a stream counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngState {
    pub seed: u64,
    pub stream: u64,
}

impl RngState {
    /// Identifier of the underlying algorithm (counter-based, splittable).
    pub const ALGORITHM: &'static str = "chacha12";

    pub fn new(seed: u64) -> Self {
        RngState { seed, stream: 0 }
    }

    /// Derived stream `k`: same seed, independent output sequence. Used for
    /// replicate fan-out.
    pub fn stream(&self, k: u64) -> Self {
        RngState {
            seed: self.seed,
            stream: self.stream.wrapping_add(k),
        }
    }

    fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// One realized trajectory. State indices are 0-based here; the CSV formats
/// emitted by the CLI are 1-based.
///
/// For HMC and Σ_P samples `y` has the same length as `x` (outputs
/// `y_0..y_T`); for Σ_S samples `y` is one shorter (`y_0..y_{T-1}`), since
/// output `t` is drawn together with state `t+1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSample {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

/// A sampled random map from states to outputs: `columns[i]` is the output
/// the map assigns to state `i`. One full map is drawn per time step,
/// independently of the state trajectory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomMapEmission {
    pub columns: Vec<usize>,
}

fn sample_categorical<S: Scalar>(rng: &mut ChaCha12Rng, weights: &[S]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w.to_f64();
        if u < acc {
            return i;
        }
    }
    // round-off residue: fall back to the last index carrying mass
    weights
        .iter()
        .rposition(|w| !w.is_zero())
        .expect("categorical weights must carry mass")
}

/// Sample an HMC trajectory of horizon `T` (states `x_0..x_T`, outputs
/// `y_0..y_T`). At every step the full random emission map is drawn — all
/// `n` columns, independent of the state — and the output reads off the
/// column at the current state.
pub fn sample_hmc<S: Scalar>(model: &HmcModel<S>, horizon: usize, rng: &RngState) -> PathSample {
    sample_hmc_with_maps(model, horizon, rng).0
}

/// Like [`sample_hmc`] but also returns the emission map drawn at each step,
/// which makes the independence of the channel from the trajectory testable.
pub fn sample_hmc_with_maps<S: Scalar>(
    model: &HmcModel<S>,
    horizon: usize,
    rng: &RngState,
) -> (PathSample, Vec<RandomMapEmission>) {
    let mut rng = rng.rng();
    let n = model.n();
    let mut x = Vec::with_capacity(horizon + 1);
    let mut y = Vec::with_capacity(horizon + 1);
    let mut maps = Vec::with_capacity(horizon + 1);

    let mut state = sample_categorical(&mut rng, model.p0().as_slice());
    for t in 0..=horizon {
        if t > 0 {
            state = sample_categorical(&mut rng, &model.a().col(state));
        }
        let map = RandomMapEmission {
            columns: (0..n)
                .map(|i| sample_categorical(&mut rng, &model.g().col(i)))
                .collect(),
        };
        x.push(state);
        y.push(map.columns[state]);
        maps.push(map);
    }
    (PathSample { x, y }, maps)
}

/// Sample a Σ_P trajectory: `(x_0, y_0)` from the initial joint law, then
/// `(x_{t+1}, y_{t+1})` jointly from column `x_t` of the stacked kernel.
pub fn sample_sigma_p<S: Scalar>(
    model: &SigmaPModel<S>,
    horizon: usize,
    rng: &RngState,
) -> PathSample {
    let mut rng = rng.rng();
    let n = model.n();
    let stacked = model.stacked();
    let mut x = Vec::with_capacity(horizon + 1);
    let mut y = Vec::with_capacity(horizon + 1);

    let k0 = sample_categorical(&mut rng, model.q0().as_slice());
    let (mut xi, mut yi) = joint_unpack(k0, n);
    x.push(xi);
    y.push(yi);
    for _ in 0..horizon {
        let k = sample_categorical(&mut rng, &stacked.col(xi));
        // stacked row index i*n + next_state encodes (next_state, next_output=i)
        (xi, yi) = joint_unpack(k, n);
        x.push(xi);
        y.push(yi);
    }
    PathSample { x, y }
}

/// Sample a Σ_S trajectory: `x_0` from `p0`, then `(y_t, x_{t+1})` jointly
/// from column `x_t` of the stacked kernel; `y` has length `T`.
pub fn sample_sigma_s<S: Scalar>(
    model: &SigmaSModel<S>,
    horizon: usize,
    rng: &RngState,
) -> PathSample {
    let mut rng = rng.rng();
    let n = model.n();
    let stacked = model.stacked();
    let mut x = Vec::with_capacity(horizon + 1);
    let mut y = Vec::with_capacity(horizon);

    let mut xi = sample_categorical(&mut rng, model.p0().as_slice());
    x.push(xi);
    for _ in 0..horizon {
        let k = sample_categorical(&mut rng, &stacked.col(xi));
        let (next, out) = joint_unpack(k, n);
        y.push(out);
        x.push(next);
        xi = next;
    }
    PathSample { x, y }
}

/// Column-normalized transition counts of the synchronous joint chain
/// `Z = Y ⊗ X`, estimated from sampled paths. Columns never visited are
/// flagged rather than invented.
#[derive(Clone, Debug)]
pub struct EmpiricalKernel {
    pub matrix: Matrix<f64>,
    pub visited: Vec<bool>,
}

pub fn empirical_kernel(samples: &[PathSample], n: usize, m: usize) -> Result<EmpiricalKernel> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("empirical_kernel needs at least one path"));
    }
    let size = n * m;
    let mut counts = vec![vec![0u64; size]; size];
    let mut col_totals = vec![0u64; size];
    for (pi, path) in samples.iter().enumerate() {
        if path.x.len() != path.y.len() {
            return Err(Error::validation(
                format!("samples[{pi}]"),
                "joint kernel estimation needs synchronous paths (|y| = |x|)",
            ));
        }
        for t in 1..path.x.len() {
            let from = joint_index(path.x[t - 1], path.y[t - 1], n);
            let to = joint_index(path.x[t], path.y[t], n);
            counts[to][from] += 1;
            col_totals[from] += 1;
        }
    }
    if col_totals.iter().all(|&c| c == 0) {
        return Err(Error::EmptyInput("paths contain no transitions"));
    }
    let matrix = Matrix::from_fn(size, size, |r, c| {
        if col_totals[c] == 0 {
            0.0
        } else {
            counts[r][c] as f64 / col_totals[c] as f64
        }
    });
    let visited = col_totals.iter().map(|&c| c > 0).collect();
    Ok(EmpiricalKernel { matrix, visited })
}
