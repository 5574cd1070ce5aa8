//! Belief-update mathematics.
//!
//! Beliefs are rows of natural-log probabilities. Agents start from a
//! Bayesian posterior on their round-0 signal, accumulate mixed
//! log-likelihoods ("potentials"), and decide round by round whether a
//! fresh private signal is informative by comparing the Bayes posterior
//! with their current belief in total variation.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{log_sum_exp, normalize_log, Matrix};
use crate::model::{LikelihoodModel, Prior};

/// Informativeness threshold `tau` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(tau: f64) -> Result<Self> {
        if tau > 0.0 && tau <= 1.0 {
            Ok(Self(tau))
        } else {
            Err(Error::InvalidThreshold(tau))
        }
    }

    /// `tau = 1`: every signal is uninformative, so agents always communicate.
    pub fn always_communicate() -> Self {
        Self(1.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Whether one agent's private signal moved its belief by at least `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InformativenessVerdict {
    pub agent: usize,
    /// Total variation between the Bayes posterior and the previous belief.
    pub tv: f64,
    pub informative: bool,
    pub threshold: f64,
}

/// Round-0 posterior `prior * l_i(s | .)`, normalized, in log domain.
pub fn initial_belief(prior: &Prior, lik: &LikelihoodModel, agent: usize, signal: usize) -> Result<Vec<f64>> {
    bayes_update(prior.log_mass(), lik, agent, signal)
}

/// One step of Bayes' rule on a log-belief row.
pub fn bayes_update(belief: &[f64], lik: &LikelihoodModel, agent: usize, signal: usize) -> Result<Vec<f64>> {
    let ll = lik.log_likelihoods(agent, signal)?;
    if ll.len() != belief.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "belief over {} states, likelihood over {}",
            belief.len(),
            ll.len()
        )));
    }
    let mut out: Vec<f64> = belief.iter().zip(ll).map(|(b, l)| b + l).collect();
    normalize_log(&mut out);
    Ok(out)
}

fn argmax(xs: &[f64]) -> usize {
    xs.iter()
        .enumerate()
        .fold(0, |best, (k, &x)| if x > xs[best] { k } else { best })
}

/// `exp(base + delta) - exp(base)` without cancellation.
fn signed_difference(base: f64, delta: f64) -> f64 {
    if delta <= 0.0 {
        libm::exp(base) * libm::expm1(delta)
    } else {
        -libm::exp(base + delta) * libm::expm1(-delta)
    }
}

/// TV distance from per-entry signed differences `diff(k)` against the
/// normalized log-row `base`. The entry with the largest base mass is
/// recovered from the zero-sum identity of two normalized distributions, so
/// only differences computed from log-ratios via `expm1` enter the sum and
/// the result stays accurate far below machine epsilon.
fn tv_from_differences(base: &[f64], diff: impl Fn(usize) -> f64) -> f64 {
    let dominant = argmax(base);
    let mut abs_sum = 0.0;
    let mut signed_sum = 0.0;
    for k in (0..base.len()).filter(|&k| k != dominant) {
        let d = diff(k);
        abs_sum += libm::fabs(d);
        signed_sum += d;
    }
    (0.5 * (abs_sum + libm::fabs(signed_sum))).clamp(0.0, 1.0)
}

/// Total variation `1/2 * sum |p - q|` between two normalized log-belief rows.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    tv_from_differences(q, |k| {
        if q[k] == f64::NEG_INFINITY {
            libm::exp(p[k])
        } else {
            signed_difference(q[k], p[k] - q[k])
        }
    })
}

/// Informativeness of `signal` for `agent` given its previous belief.
/// Ties `tv == tau` count as informative.
pub fn is_informative(
    belief_prev: &[f64],
    lik: &LikelihoodModel,
    agent: usize,
    signal: usize,
    tau: Threshold,
) -> Result<InformativenessVerdict> {
    let ll = lik.log_likelihoods(agent, signal)?;
    if ll.len() != belief_prev.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "belief over {} states, likelihood over {}",
            belief_prev.len(),
            ll.len()
        )));
    }
    // Likelihoods relative to the most-believed state, so a signal that is
    // equally likely under every state yields exactly zero change.
    let dominant = argmax(belief_prev);
    let rel: Vec<f64> = ll.iter().map(|l| l - ll[dominant]).collect();
    let shifted: Vec<f64> = belief_prev.iter().zip(&rel).map(|(b, c)| b + c).collect();
    let norm = log_sum_exp(&shifted) - log_sum_exp(belief_prev);
    // log posterior - log prior
    let tv = tv_from_differences(belief_prev, |k| signed_difference(belief_prev[k], rel[k] - norm));
    Ok(InformativenessVerdict {
        agent,
        tv,
        informative: tv >= tau.value(),
        threshold: tau.value(),
    })
}

/// Closed-form informativeness test for two states, where `epsilon_prev` is
/// the previous belief in state 2 and `ratio = l(s | 1) / l(s | 2)`.
pub fn binary_informative(epsilon_prev: f64, ratio: f64, tau: Threshold) -> Result<bool> {
    if !(epsilon_prev > 0.0 && epsilon_prev < 1.0) {
        return Err(Error::OutsideUnitInterval(epsilon_prev));
    }
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::InvalidRatio(ratio));
    }
    let eps = epsilon_prev;
    let tau = tau.value();
    let spread = eps * (1.0 - eps);
    if ratio >= 1.0 {
        if eps <= tau {
            return Ok(false);
        }
        Ok(ratio >= (tau * eps + spread) / (spread - tau * (1.0 - eps)))
    } else {
        if eps >= 1.0 - tau {
            return Ok(false);
        }
        Ok(ratio <= (spread - tau * eps) / (spread + tau * (1.0 - eps)))
    }
}

/// Mix previous potentials through `q` and add each agent's fresh log-likelihood:
/// `phi_i = sum_j q_ij phi_j + log l_i(s_i | .)`.
pub fn potential_update(
    potentials_prev: &Matrix,
    q: &Matrix,
    lik: &LikelihoodModel,
    signals: &[usize],
) -> Result<Matrix> {
    let n = potentials_prev.rows();
    if q.rows() != n || q.cols() != n || signals.len() != n || lik.agent_count() != n {
        return Err(Error::DimensionMismatch(alloc::format!(
            "potentials {}x{}, mixing {}x{}, {} signals, {} agents",
            n,
            potentials_prev.cols(),
            q.rows(),
            q.cols(),
            signals.len(),
            lik.agent_count()
        )));
    }
    if lik.state_count() != potentials_prev.cols() {
        return Err(Error::DimensionMismatch(
            "state count differs from likelihood model".into(),
        ));
    }
    let mut next = q.mul(potentials_prev)?;
    for (i, &s) in signals.iter().enumerate() {
        let ll = lik.log_likelihoods(i, s)?;
        for (x, l) in next.row_mut(i).iter_mut().zip(ll) {
            *x += l;
        }
    }
    Ok(next)
}

/// Beliefs `mu_i ~ mu_i0 * exp(phi_i)`, normalized per agent.
pub fn belief_from_potentials(initial: &Matrix, potentials: &Matrix) -> Result<Matrix> {
    if initial.rows() != potentials.rows() || initial.cols() != potentials.cols() {
        return Err(Error::DimensionMismatch(
            "initial beliefs and potentials differ in shape".into(),
        ));
    }
    let mut out = Matrix::zeros(initial.rows(), initial.cols());
    for i in 0..initial.rows() {
        // Centre the potentials first: they grow linearly in t, and adding
        // `initial` at that magnitude would cost absolute precision.
        let shift = potentials.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let row = out.row_mut(i);
        for ((o, a), b) in row.iter_mut().zip(initial.row(i)).zip(potentials.row(i)) {
            *o = a + (b - shift);
        }
        normalize_log(row);
    }
    Ok(out)
}
