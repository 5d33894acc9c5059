//! Exact recursive filtering and prediction for the three system classes.
//!
//! All three recursions condition on outputs only (never on states) and emit
//! normalized conditional laws at every step:
//!
//! * Σ_P systems: the filter is completely recursive,
//!   `X̂_t = Q_{y_t} X̂_{t-1} / (C X̂_{t-1})_{y_t}`, with the prediction read
//!   off as `A X̂_t`.
//! * Σ_S systems: the *predictor* is completely recursive,
//!   `X̂_{t+1|t} = R_{y_t} X̂_{t|t-1} / (G X̂_{t|t-1})_{y_t}`, with the filter
//!   read off the predictor by one Bayes correction.
//! * HMC: both forms collapse to the classical normalized forward step
//!   `X̂_t = diag(A X̂_{t-1}) Gᵀ diag(G A X̂_{t-1})^{-1} e_{y_t}`.
//!
//! On HMC inputs the three routes produce identical trajectories (exactly,
//! in rational arithmetic); `run_hmc_route` exposes all three for
//! cross-checking.
//!
//! A zero denominator means the model assigns the observed symbol
//! probability zero; that is a hard [`Error::ImpossibleObservation`] carrying
//! the time index. The run drivers can instead reset to the uniform law when
//! asked ([`OnImpossible::UniformReset`]), which is useful for exploratory
//! CLI runs but produces posteriors that no longer mean anything.

use crate::error::{Error, Result};
use crate::matrix::{Matrix, ProbVector};
use crate::models::{HmcModel, SigmaPModel, SigmaSModel};
use crate::scalar::{sum, Scalar};

/// Posterior snapshot at time `t`.
///
/// `loglik_inc` carries `log P(y_t | y_0..y_{t-1})` in float mode and the
/// raw probability increment itself in exact mode (so products of rational
/// increments stay exact); combine increments with [`total_likelihood`].
#[derive(Clone, Debug)]
pub struct FilterState<S: Scalar> {
    pub t: usize,
    /// `X̂_t = E[X_t | Y_0..Y_t]`.
    pub x_filt: ProbVector<S>,
    /// `X̂_{t+1|t} = E[X_{t+1} | Y_0..Y_t]`.
    pub x_pred: ProbVector<S>,
    /// `Ŷ_{t+1|t} = E[Y_{t+1} | Y_0..Y_t]`.
    pub y_pred: ProbVector<S>,
    pub loglik_inc: S,
}

/// Any of the three model records, for dispatching a filter run.
#[derive(Clone, Debug)]
pub enum Model<S: Scalar> {
    Hmc(HmcModel<S>),
    SigmaP(SigmaPModel<S>),
    SigmaS(SigmaSModel<S>),
}

impl<S: Scalar> Model<S> {
    pub fn n(&self) -> usize {
        match self {
            Model::Hmc(m) => m.n(),
            Model::SigmaP(m) => m.n(),
            Model::SigmaS(m) => m.n(),
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Model::Hmc(m) => m.m(),
            Model::SigmaP(m) => m.m(),
            Model::SigmaS(m) => m.m(),
        }
    }
}

/// Which algebraic route to use for an HMC input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HmcRoute {
    /// The normalized forward recursion.
    Native,
    /// Convert to blocks `Q_i = diag(G_i.) A` and run the Σ_P filter.
    SigmaP,
    /// Convert to blocks `R_i = A diag(G_i.)` and run the Σ_S predictor.
    SigmaS,
}

/// Policy for observations the model declares impossible.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OnImpossible {
    Error,
    UniformReset,
}

/// A completed filter run: one state per observation, plus the times at
/// which the posterior was reset (empty unless `UniformReset` fired).
#[derive(Clone, Debug)]
pub struct FilterRun<S: Scalar> {
    pub states: Vec<FilterState<S>>,
    pub resets: Vec<usize>,
}

fn check_symbol<S: Scalar>(m: usize, t: usize, y: usize) -> Result<()> {
    if y >= m {
        return Err(Error::validation(
            format!("ys[{t}]"),
            format!("output index {y} out of range (m = {m})"),
        ));
    }
    Ok(())
}

/// Initial Σ_P filter state from the observation `y0`: the `y0` sub-block
/// of the initial joint law, renormalized; the increment is that block's
/// mass `P(Y_0 = y0)`.
pub fn sigma_p_init<S: Scalar>(model: &SigmaPModel<S>, y0: usize) -> Result<FilterState<S>> {
    check_symbol::<S>(model.m(), 0, y0)?;
    let n = model.n();
    let block: Vec<S> = (0..n).map(|k| model.q0().get(y0 * n + k).clone()).collect();
    let mass = sum(block.iter().cloned());
    if mass.is_zero() {
        return Err(Error::ImpossibleObservation { t: 0 });
    }
    let x_filt = ProbVector::new(block.into_iter().map(|v| v / mass.clone()).collect())
        .expect("renormalized block is a probability vector");
    let (a, c) = model.marginals();
    Ok(FilterState {
        t: 0,
        x_pred: prob(a.mul_vec(x_filt.as_slice())),
        y_pred: prob(c.mul_vec(x_filt.as_slice())),
        x_filt,
        loglik_inc: S::lik_of_prob(&mass),
    })
}

/// One Σ_P filter step: `X̂_t = Q_{y} X̂_{t-1} / (C X̂_{t-1})_y`. The
/// denominator is read off the previous state's output prediction, which
/// equals `1ᵀ Q_y X̂_{t-1}`.
pub fn sigma_p_step<S: Scalar>(
    model: &SigmaPModel<S>,
    prev: &FilterState<S>,
    y: usize,
) -> Result<FilterState<S>> {
    let t = prev.t + 1;
    check_symbol::<S>(model.m(), t, y)?;
    let numer = model.block(y).mul_vec(prev.x_filt.as_slice());
    let denom = prev.y_pred.get(y).clone();
    if denom.is_zero() {
        return Err(Error::ImpossibleObservation { t });
    }
    let x_filt = ProbVector::new(numer.into_iter().map(|v| v / denom.clone()).collect())
        .expect("renormalized filter state is a probability vector");
    let (a, c) = model.marginals();
    Ok(FilterState {
        t,
        x_pred: prob(a.mul_vec(x_filt.as_slice())),
        y_pred: prob(c.mul_vec(x_filt.as_slice())),
        x_filt,
        loglik_inc: S::lik_of_prob(&denom),
    })
}

/// One Σ_S predictor step:
/// `X̂_{t+1|t} = R_{y} X̂_{t|t-1} / (G X̂_{t|t-1})_y`.
pub fn sigma_s_predict_step<S: Scalar>(
    model: &SigmaSModel<S>,
    x_pred_prev: &ProbVector<S>,
    y: usize,
) -> Result<ProbVector<S>> {
    check_symbol::<S>(model.m(), 0, y).map_err(|_| {
        Error::validation("y", format!("output index {y} out of range (m = {})", model.m()))
    })?;
    let numer = model.block(y).mul_vec(x_pred_prev.as_slice());
    let denom = sum(numer.iter().cloned());
    if denom.is_zero() {
        return Err(Error::ImpossibleObservation { t: 0 });
    }
    Ok(
        ProbVector::new(numer.into_iter().map(|v| v / denom.clone()).collect())
            .expect("renormalized predictor is a probability vector"),
    )
}

/// Bayes correction of a predictor by the output it predicted:
/// componentwise `X̂_i = x_i G[y, i] / (G x)_y`.
pub fn sigma_s_filter<S: Scalar>(
    g: &Matrix<S>,
    x_pred: &ProbVector<S>,
    y: usize,
) -> Result<ProbVector<S>> {
    assert_eq!(g.cols(), x_pred.len(), "G and predictor dimension mismatch");
    let numer: Vec<S> = (0..x_pred.len())
        .map(|i| x_pred.get(i).clone() * g[(y, i)].clone())
        .collect();
    let denom = sum(numer.iter().cloned());
    if denom.is_zero() {
        return Err(Error::ImpossibleObservation { t: 0 });
    }
    Ok(
        ProbVector::new(numer.into_iter().map(|v| v / denom.clone()).collect())
            .expect("Bayes correction yields a probability vector"),
    )
}

/// One HMC forward step. For `t = 0` pass `p0` as `x_filt_prev`: the prior
/// is then `p0` itself rather than `A p0`, matching the initial condition
/// `X̂_0 = diag(p0) Gᵀ diag(G p0)^{-1} Y_0`.
pub fn hmc_filter_step<S: Scalar>(
    model: &HmcModel<S>,
    x_filt_prev: &ProbVector<S>,
    t: usize,
    y: usize,
) -> Result<FilterState<S>> {
    check_symbol::<S>(model.m(), t, y)?;
    let prior = if t == 0 {
        x_filt_prev.clone()
    } else {
        prob(model.a().mul_vec(x_filt_prev.as_slice()))
    };
    let g = model.g().matrix();
    let numer: Vec<S> = (0..model.n())
        .map(|i| prior.get(i).clone() * g[(y, i)].clone())
        .collect();
    let denom = sum(numer.iter().cloned());
    if denom.is_zero() {
        return Err(Error::ImpossibleObservation { t });
    }
    let x_filt = ProbVector::new(numer.into_iter().map(|v| v / denom.clone()).collect())
        .expect("normalized forward step is a probability vector");
    let x_pred = prob(model.a().mul_vec(x_filt.as_slice()));
    let y_pred = prob(g.mul_vec(x_pred.as_slice()));
    Ok(FilterState {
        t,
        x_filt,
        x_pred,
        y_pred,
        loglik_inc: S::lik_of_prob(&denom),
    })
}

/// The Bayes-correction operator `G_x = diag(x) Gᵀ diag(Gx)^{-1}` (n x m).
/// When `G` is deterministic (all columns basis vectors) it is a right
/// pseudo-inverse: `G G_x = I_m`.
pub fn g_map<S: Scalar>(g: &Matrix<S>, x: &ProbVector<S>) -> Result<Matrix<S>> {
    assert_eq!(g.cols(), x.len(), "G and x dimension mismatch");
    let gx = g.mul_vec(x.as_slice());
    for (j, v) in gx.iter().enumerate() {
        if v.is_zero() {
            return Err(Error::SingularOutputMass { output: j });
        }
    }
    Ok(Matrix::from_fn(g.cols(), g.rows(), |i, j| {
        x.get(i).clone() * g[(j, i)].clone() / gx[j].clone()
    }))
}

/// Total accumulated likelihood of a run: the product of the raw increments
/// in exact mode, the sum of the log increments in float mode.
pub fn total_likelihood<S: Scalar>(states: &[FilterState<S>]) -> S {
    states
        .iter()
        .fold(S::lik_identity(), |acc, st| S::lik_combine(&acc, &st.loglik_inc))
}

/// Run the filter appropriate to the model class over a full observation
/// sequence, erroring at the first impossible observation.
pub fn run_filter<S: Scalar>(model: &Model<S>, ys: &[usize]) -> Result<Vec<FilterState<S>>> {
    Ok(run_filter_with_policy(model, ys, OnImpossible::Error)?.states)
}

/// Run an HMC filter along the requested algebraic route. All three routes
/// agree exactly on valid inputs.
pub fn run_hmc_route<S: Scalar>(
    model: &HmcModel<S>,
    ys: &[usize],
    route: HmcRoute,
) -> Result<Vec<FilterState<S>>> {
    let model = match route {
        HmcRoute::Native => Model::Hmc(model.clone()),
        HmcRoute::SigmaP => Model::SigmaP(model.to_sigma_p()),
        HmcRoute::SigmaS => Model::SigmaS(model.to_sigma_s()),
    };
    run_filter(&model, ys)
}

/// Run with an explicit impossible-observation policy.
pub fn run_filter_with_policy<S: Scalar>(
    model: &Model<S>,
    ys: &[usize],
    policy: OnImpossible,
) -> Result<FilterRun<S>> {
    if ys.is_empty() {
        return Err(Error::EmptyInput("observation sequence"));
    }
    let n = model.n();
    let m = model.m();
    for (t, &y) in ys.iter().enumerate() {
        check_symbol::<S>(m, t, y)?;
    }
    let mut states: Vec<FilterState<S>> = Vec::with_capacity(ys.len());
    let mut resets = Vec::new();

    match model {
        Model::Hmc(hmc) => {
            let mut x_prev = hmc.p0().clone();
            for (t, &y) in ys.iter().enumerate() {
                let state = match hmc_filter_step(hmc, &x_prev, t, y) {
                    Ok(st) => st,
                    Err(Error::ImpossibleObservation { .. }) => match policy {
                        OnImpossible::Error => {
                            return Err(Error::ImpossibleObservation { t });
                        }
                        OnImpossible::UniformReset => {
                            resets.push(t);
                            let x_filt = ProbVector::uniform(n);
                            let x_pred = prob(hmc.a().mul_vec(x_filt.as_slice()));
                            let y_pred = prob(hmc.g().mul_vec(x_pred.as_slice()));
                            FilterState {
                                t,
                                x_filt,
                                x_pred,
                                y_pred,
                                loglik_inc: S::lik_zero_prob(),
                            }
                        }
                    },
                    Err(e) => return Err(e),
                };
                x_prev = state.x_filt.clone();
                states.push(state);
            }
        }
        Model::SigmaP(sp) => {
            for (t, &y) in ys.iter().enumerate() {
                let step = if t == 0 {
                    sigma_p_init(sp, y)
                } else {
                    sigma_p_step(sp, states.last().unwrap(), y)
                };
                let state = match step {
                    Ok(st) => st,
                    Err(Error::ImpossibleObservation { .. }) => match policy {
                        OnImpossible::Error => {
                            return Err(Error::ImpossibleObservation { t });
                        }
                        OnImpossible::UniformReset => {
                            resets.push(t);
                            let (a, c) = sp.marginals();
                            let x_filt = ProbVector::uniform(n);
                            FilterState {
                                t,
                                x_pred: prob(a.mul_vec(x_filt.as_slice())),
                                y_pred: prob(c.mul_vec(x_filt.as_slice())),
                                x_filt,
                                loglik_inc: S::lik_zero_prob(),
                            }
                        }
                    },
                    Err(e) => return Err(e),
                };
                states.push(state);
            }
        }
        Model::SigmaS(ss) => {
            let (_, g) = ss.marginals();
            let mut pred = ss.p0().clone(); // X̂_{0|-1}
            for (t, &y) in ys.iter().enumerate() {
                let step = sigma_s_filter(g.matrix(), &pred, y)
                    .and_then(|x_filt| Ok((x_filt, sigma_s_predict_step(ss, &pred, y)?)));
                let state = match step {
                    Ok((x_filt, next_pred)) => {
                        let y_next = prob(g.mul_vec(next_pred.as_slice()));
                        let denom = sum(
                            (0..n).map(|i| pred.get(i).clone() * g[(y, i)].clone()),
                        );
                        FilterState {
                            t,
                            x_filt,
                            x_pred: next_pred,
                            y_pred: y_next,
                            loglik_inc: S::lik_of_prob(&denom),
                        }
                    }
                    Err(Error::ImpossibleObservation { .. }) => match policy {
                        OnImpossible::Error => {
                            return Err(Error::ImpossibleObservation { t });
                        }
                        OnImpossible::UniformReset => {
                            resets.push(t);
                            let x_filt = ProbVector::uniform(n);
                            let next_pred = ProbVector::uniform(n);
                            let y_next = prob(g.mul_vec(next_pred.as_slice()));
                            FilterState {
                                t,
                                x_filt,
                                x_pred: next_pred,
                                y_pred: y_next,
                                loglik_inc: S::lik_zero_prob(),
                            }
                        }
                    },
                    Err(e) => return Err(e),
                };
                pred = state.x_pred.clone();
                states.push(state);
            }
        }
    }
    Ok(FilterRun { states, resets })
}

fn prob<S: Scalar>(entries: Vec<S>) -> ProbVector<S> {
    ProbVector::new(entries).expect("stochastic image of a probability vector")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::StochMatrix;
    use crate::scalar::Rational;

    type RMat = Matrix<Rational>;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn hand_bayes_initial_posterior() {
        // P(X_0 = e_1 | Y_0 = f_1) = (1/2)(3/4) / (1/2) = 3/4
        let a = StochMatrix::new(RMat::from_rows(vec![
            vec![r(1, 2), r(1, 3)],
            vec![r(1, 2), r(2, 3)],
        ]))
        .unwrap();
        let g = StochMatrix::new(RMat::from_rows(vec![
            vec![r(3, 4), r(1, 4)],
            vec![r(1, 4), r(3, 4)],
        ]))
        .unwrap();
        let model = HmcModel::new(a, g, ProbVector::uniform(2)).unwrap();

        let st = hmc_filter_step(&model, model.p0(), 0, 0).unwrap();
        assert_eq!(st.x_filt.as_slice(), &[r(3, 4), r(1, 4)]);
        assert_eq!(st.loglik_inc, r(1, 2), "P(Y_0 = f_1) = 1/2 carried raw");

        // same posterior through the Σ_P initial step with q0 = Δ(G) p0
        let sp = model.to_sigma_p();
        let st_p = sigma_p_init(&sp, 0).unwrap();
        assert_eq!(st_p.x_filt.as_slice(), st.x_filt.as_slice());
        assert_eq!(st_p.loglik_inc, st.loglik_inc);
    }

    #[test]
    fn impossible_initial_observation() {
        // q0 has zero mass on output 2
        let q0 = ProbVector::new(vec![r(1, 2), r(1, 2), r(0, 1), r(0, 1)]).unwrap();
        let q1 = RMat::from_rows(vec![vec![r(1, 2), r(1, 2)], vec![r(1, 2), r(1, 2)]]);
        let sp = SigmaPModel::new(vec![q1, RMat::zeros(2, 2)], q0).unwrap();
        assert_eq!(
            sigma_p_init(&sp, 1).unwrap_err(),
            Error::ImpossibleObservation { t: 0 }
        );
    }

    #[test]
    fn perfect_observation_pins_the_state() {
        // G = I: the filter is the point mass at the observed symbol
        let a = StochMatrix::new(RMat::from_rows(vec![
            vec![r(1, 2), r(1, 4)],
            vec![r(1, 2), r(3, 4)],
        ]))
        .unwrap();
        let g = StochMatrix::new(RMat::identity(2)).unwrap();
        let model = HmcModel::new(a, g, ProbVector::uniform(2)).unwrap();
        let states =
            run_hmc_route(&model, &[0, 1, 1, 0], HmcRoute::Native).unwrap();
        for (st, &y) in states.iter().zip([0usize, 1, 1, 0].iter()) {
            assert_eq!(st.x_filt.as_slice(), ProbVector::point(2, y).as_slice());
        }
    }

    #[test]
    fn uniform_transition_erases_information() {
        let a = StochMatrix::new(RMat::from_rows(vec![
            vec![r(1, 2), r(1, 2)],
            vec![r(1, 2), r(1, 2)],
        ]))
        .unwrap();
        let g = StochMatrix::new(RMat::from_rows(vec![
            vec![r(3, 4), r(1, 4)],
            vec![r(1, 4), r(3, 4)],
        ]))
        .unwrap();
        let model = HmcModel::new(a, g, ProbVector::uniform(2)).unwrap();
        let states = run_hmc_route(&model, &[0, 0, 1], HmcRoute::Native).unwrap();
        for st in &states {
            assert_eq!(st.x_pred.as_slice(), &[r(1, 2), r(1, 2)]);
        }
    }

    #[test]
    fn single_output_filter_is_transition_propagation() {
        // m = 1: no information, the filter trajectory is A-powers of p0
        let a = StochMatrix::new(RMat::from_rows(vec![
            vec![r(1, 4), r(2, 3)],
            vec![r(3, 4), r(1, 3)],
        ]))
        .unwrap();
        let g = StochMatrix::new(RMat::ones_row(2)).unwrap();
        let p0 = ProbVector::new(vec![r(1, 3), r(2, 3)]).unwrap();
        let model = HmcModel::new(a.clone(), g, p0.clone()).unwrap();
        let states = run_hmc_route(&model, &[0, 0, 0], HmcRoute::Native).unwrap();

        let mut expect = p0.as_slice().to_vec();
        for (t, st) in states.iter().enumerate() {
            assert_eq!(st.x_filt.as_slice(), &expect[..], "t = {t}");
            assert_eq!(st.loglik_inc, r(1, 1), "P(y_t) = 1 with m = 1");
            expect = a.mul_vec(&expect);
        }
    }

    #[test]
    fn sigma_s_hand_bayes_correction() {
        let g = RMat::from_rows(vec![vec![r(3, 4), r(1, 4)], vec![r(1, 4), r(3, 4)]]);
        let x_pred = ProbVector::new(vec![r(3, 4), r(1, 4)]).unwrap();
        // (3/4·1/4, 1/4·3/4) / (6/16) = (1/2, 1/2)
        let x = sigma_s_filter(&g, &x_pred, 1).unwrap();
        assert_eq!(x.as_slice(), &[r(1, 2), r(1, 2)]);

        // m = 1: no information
        let flat = RMat::ones_row(2);
        let same = sigma_s_filter(&flat, &x_pred, 0).unwrap();
        assert_eq!(same.as_slice(), x_pred.as_slice());
    }

    #[test]
    fn g_map_trivial_and_singular() {
        let g1 = RMat::identity(1);
        let x1 = ProbVector::new(vec![r(1, 1)]).unwrap();
        assert_eq!(g_map(&g1, &x1).unwrap(), RMat::identity(1));

        // G x has a zero coordinate -> singular
        let g = RMat::from_int_rows(&[&[1, 1], &[0, 0]]);
        let x = ProbVector::uniform(2);
        assert_eq!(
            g_map(&g, &x).unwrap_err(),
            Error::SingularOutputMass { output: 1 }
        );
    }

    #[test]
    fn deterministic_channel_g_map_is_right_inverse() {
        // m = 2, n = 3, columns e_1, e_1, e_2
        let g = RMat::from_int_rows(&[&[1, 1, 0], &[0, 0, 1]]);
        let x = ProbVector::new(vec![r(1, 6), r(1, 3), r(1, 2)]).unwrap();
        let gx = g_map(&g, &x).unwrap();
        assert_eq!(g.mul(&gx), RMat::identity(2));
    }

    #[test]
    fn run_filter_reports_first_bad_time() {
        // A = I, G = I, start in state 0: observing symbol 1 at t = 2 is
        // impossible
        let model = HmcModel::new(
            StochMatrix::new(RMat::identity(2)).unwrap(),
            StochMatrix::new(RMat::identity(2)).unwrap(),
            ProbVector::point(2, 0),
        )
        .unwrap();
        let err = run_filter(&Model::Hmc(model.clone()), &[0, 0, 1, 0]).unwrap_err();
        assert_eq!(err, Error::ImpossibleObservation { t: 2 });

        let run = run_filter_with_policy(
            &Model::Hmc(model),
            &[0, 0, 1, 0],
            OnImpossible::UniformReset,
        )
        .unwrap();
        assert_eq!(run.resets, vec![2]);
        assert_eq!(run.states.len(), 4);
        assert_eq!(run.states[2].x_filt.as_slice(), &[r(1, 2), r(1, 2)]);
        assert_eq!(run.states[2].loglik_inc, r(0, 1));
    }

    #[test]
    fn out_of_range_symbol_is_a_validation_error() {
        let model = HmcModel::new(
            StochMatrix::new(RMat::identity(2)).unwrap(),
            StochMatrix::new(RMat::identity(2)).unwrap(),
            ProbVector::uniform(2),
        )
        .unwrap();
        let err = run_filter(&Model::Hmc(model), &[0, 3]).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }), "{err:?}");
    }
}
