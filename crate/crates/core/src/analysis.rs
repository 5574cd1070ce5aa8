//! Information-theoretic diagnostics: KL divergences, observational
//! equivalence, global identifiability, learning-rate estimates and
//! convergence of the mixing products.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{reachable_from_zero, LikelihoodModel, StateSpace};
use crate::protocol::Trajectory;
use crate::switching::SwitchingMatrix;

/// Two states are observationally equivalent for an agent when their
/// log-likelihood columns agree within this tolerance.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-12;

/// `D(p || q)` in nats.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    let mut sum = 0.0;
    for (index, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return Err(Error::KlUndefined { index, p: pi });
        }
        sum += pi * libm::log(pi / qi);
    }
    Ok(sum.max(0.0))
}

fn equivalent(table: &Matrix, a: usize, b: usize) -> bool {
    (0..table.rows()).all(|s| libm::fabs(table[(s, a)] - table[(s, b)]) <= EQUIVALENCE_TOLERANCE)
}

/// Partition of the states into classes `agent` cannot tell apart.
/// Classes are ordered by their smallest member.
pub fn equivalence_classes(lik: &LikelihoodModel, agent: usize) -> Vec<Vec<usize>> {
    let table = lik.log_table(agent);
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for k in 0..lik.state_count() {
        match classes.iter_mut().find(|c| equivalent(table, c[0], k)) {
            Some(class) => class.push(k),
            None => classes.push(vec![k]),
        }
    }
    classes
}

/// `D(l_i(. | true) || l_i(. | k))` for one agent; exactly zero for
/// observationally equivalent states.
fn agent_kl(lik: &LikelihoodModel, agent: usize, truth: usize, k: usize) -> f64 {
    let table = lik.log_table(agent);
    if equivalent(table, truth, k) {
        return 0.0;
    }
    let d: f64 = (0..table.rows())
        .map(|s| {
            let a = table[(s, truth)];
            libm::exp(a) * (a - table[(s, k)])
        })
        .sum();
    d.max(0.0)
}

/// `I(k, true) = -(1/n) sum_i D(l_i(. | true) || l_i(. | k))` for every state `k`.
pub fn network_divergence(lik: &LikelihoodModel, space: &StateSpace) -> Vec<f64> {
    let n = lik.agent_count() as f64;
    let truth = space.true_state();
    (0..lik.state_count())
        .map(|k| {
            if k == truth {
                return 0.0;
            }
            -(0..lik.agent_count()).map(|i| agent_kl(lik, i, truth, k)).sum::<f64>() / n
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentifiabilityReport {
    /// `kl[(i, k)] = D(l_i(. | true) || l_i(. | k))`, nats.
    pub kl: Matrix,
    /// `I(k, true)` per state, nats per round.
    pub network_divergence: Vec<f64>,
    /// Per agent, the partition of states into equivalence classes.
    pub equivalence_classes: Vec<Vec<Vec<usize>>>,
    pub globally_identifiable: bool,
    /// `min over false k of -I(k, true)`, nats per round.
    pub asymptotic_rate: f64,
}

pub fn identifiability_report(lik: &LikelihoodModel, space: &StateSpace) -> IdentifiabilityReport {
    let n = lik.agent_count();
    let m = lik.state_count();
    let truth = space.true_state();
    let mut kl = Matrix::zeros(n, m);
    for i in 0..n {
        for k in 0..m {
            kl[(i, k)] = agent_kl(lik, i, truth, k);
        }
    }
    let network_divergence = network_divergence(lik, space);
    let asymptotic_rate = network_divergence
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != truth)
        .map(|(_, &d)| -d)
        .fold(f64::INFINITY, f64::min);
    IdentifiabilityReport {
        kl,
        equivalence_classes: (0..n).map(|i| equivalence_classes(lik, i)).collect(),
        globally_identifiable: asymptotic_rate > 0.0,
        network_divergence,
        asymptotic_rate,
    }
}

/// Ordinary least-squares slope of `ys` on `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch("xs and ys differ in length".into()));
    }
    if xs.len() < 2 {
        return Err(Error::Empty);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok(sxy / sxx)
}

/// Slope of `log mu_i(k) - log mu_i(true)` against `t` over the stored
/// snapshots with rounds in `start..=end`. Estimates `I(k, true)`.
pub fn estimate_rate(trajectory: &Trajectory, agent: usize, false_state: usize, window: (usize, usize)) -> Result<f64> {
    let (start, end) = window;
    if start >= end || end > trajectory.rounds() {
        return Err(Error::InvalidWindow {
            start,
            end,
            rounds: trajectory.rounds(),
        });
    }
    if agent >= trajectory.agent_count() || false_state >= trajectory.state_count() {
        return Err(Error::OutOfRange {
            what: "agent or state",
            index: agent.max(false_state),
            len: trajectory.agent_count().max(trajectory.state_count()),
        });
    }
    let truth = trajectory.true_state();
    let (xs, ys): (Vec<f64>, Vec<f64>) = trajectory
        .snapshots()
        .iter()
        .filter(|s| s.round >= start && s.round <= end)
        .map(|s| {
            let row = s.log_belief.row(agent);
            (s.round as f64, row[false_state] - row[truth])
        })
        .unzip();
    if xs.len() < 2 {
        return Err(Error::InvalidWindow {
            start,
            end,
            rounds: trajectory.rounds(),
        });
    }
    least_squares_slope(&xs, &ys)
}

/// Running left product `Q_t Q_{t-1} ... Q_1`.
#[derive(Debug, Clone)]
pub struct LeftProduct {
    product: Matrix,
    target: Matrix,
}

impl LeftProduct {
    pub fn new(n: usize) -> Self {
        Self {
            product: Matrix::identity(n),
            target: Matrix::uniform_average(n),
        }
    }

    pub fn push(&mut self, q: &Matrix) -> Result<()> {
        self.product = q.mul(&self.product)?;
        Ok(())
    }

    pub fn product(&self) -> &Matrix {
        &self.product
    }

    /// `|| product - (1/n) 1 1^T ||_inf` (maximum absolute row sum).
    pub fn gap(&self) -> f64 {
        self.product.inf_norm_diff(&self.target)
    }
}

/// Gap of the accumulated left product of `qs` (applied in order) from the
/// uniform averaging matrix.
pub fn product_convergence_gap<'a>(qs: impl IntoIterator<Item = &'a Matrix>) -> Result<f64> {
    let mut iter = qs.into_iter();
    let first = iter.next().ok_or(Error::Empty)?;
    if !first.is_square() {
        return Err(Error::DimensionMismatch("mixing matrices must be square".into()));
    }
    let mut acc = LeftProduct::new(first.rows());
    acc.push(first)?;
    for q in iter {
        acc.push(q)?;
    }
    Ok(acc.gap())
}

/// Whether the union of off-diagonal supports connects all `n` agents.
pub fn supports_connected<I>(n: usize, supports: I) -> bool
where
    I: IntoIterator<Item = (usize, usize)>,
{
    let mut adjacent = vec![false; n * n];
    for (i, j) in supports {
        adjacent[i * n + j] = true;
        adjacent[j * n + i] = true;
    }
    reachable_from_zero(n, |i, j| adjacent[i * n + j])
}

/// Connectivity of the union graph of the matrices whose rounds fall in
/// `start..=end`.
pub fn check_interval_connectivity(qs: &[SwitchingMatrix], interval: (usize, usize)) -> Result<bool> {
    let (start, end) = interval;
    let chosen: Vec<&SwitchingMatrix> = qs.iter().filter(|q| q.round() >= start && q.round() <= end).collect();
    let first = chosen.first().ok_or(Error::Empty)?;
    let n = first.matrix().rows();
    Ok(supports_connected(n, chosen.iter().flat_map(|q| q.support())))
}
