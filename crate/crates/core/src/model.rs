//! Domain types: states, priors, signal structures, the communication
//! network, and per-agent belief state.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::analysis;
use crate::error::{Error, Result};
use crate::linalg::{exp_sum, Matrix};

/// Tolerance on probability sums supplied as input (priors, likelihood columns, weight rows).
pub const INPUT_TOLERANCE: f64 = 1e-12;
/// Tolerance on probability sums of evolved beliefs.
pub const BELIEF_TOLERANCE: f64 = 1e-10;

/// Ordered, labelled set of possible states plus the realized one.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    labels: Vec<String>,
    true_state: usize,
}

impl StateSpace {
    pub fn new(labels: Vec<String>, true_state: usize) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::TooFewStates(labels.len()));
        }
        for (k, label) in labels.iter().enumerate() {
            if labels[..k].contains(label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        if true_state >= labels.len() {
            return Err(Error::OutOfRange {
                what: "state space",
                index: true_state,
                len: labels.len(),
            });
        }
        Ok(Self { labels, true_state })
    }

    /// States labelled `theta_1 .. theta_m`.
    pub fn indexed(m: usize, true_state: usize) -> Result<Self> {
        Self::new((1..=m).map(|k| format!("theta_{k}")).collect(), true_state)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, k: usize) -> &str {
        &self.labels[k]
    }

    pub fn true_state(&self) -> usize {
        self.true_state
    }
}

/// Common prior over states, stored as log-probabilities. Every state has
/// positive mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    log_mass: Vec<f64>,
}

impl Prior {
    pub fn uniform(m: usize) -> Self {
        let lp = -libm::log(m as f64);
        Self { log_mass: vec![lp; m] }
    }

    pub fn from_probabilities(probs: &[f64]) -> Result<Self> {
        for &p in probs {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::InvalidProbability {
                    context: "prior".to_string(),
                    value: p,
                });
            }
        }
        Self::from_log(probs.iter().map(|&p| libm::log(p)).collect())
    }

    pub fn from_log(log_mass: Vec<f64>) -> Result<Self> {
        if log_mass.len() < 2 {
            return Err(Error::TooFewStates(log_mass.len()));
        }
        if let Some(&bad) = log_mass.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidProbability {
                context: "prior".to_string(),
                value: libm::exp(bad),
            });
        }
        let sum = exp_sum(&log_mass);
        if libm::fabs(sum - 1.0) > INPUT_TOLERANCE {
            return Err(Error::NotNormalized {
                context: "prior".to_string(),
                sum,
            });
        }
        Ok(Self { log_mass })
    }

    pub fn log_mass(&self) -> &[f64] {
        &self.log_mass
    }

    pub fn len(&self) -> usize {
        self.log_mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_mass.is_empty()
    }
}

/// Per-agent signal structures `l_i(s | state)` over finite alphabets,
/// stored in log domain. Every entry is finite, so the log bound `B` exists.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodModel {
    states: usize,
    // per agent: |S_i| x m
    tables: Vec<Matrix>,
    log_bound: f64,
}

impl LikelihoodModel {
    /// `tables[i][s][k]` is the probability of signal `s` for agent `i` when the state is `k`.
    pub fn from_probabilities(tables: &[Vec<Vec<f64>>]) -> Result<Self> {
        let mut logs = Vec::with_capacity(tables.len());
        for (i, table) in tables.iter().enumerate() {
            for (s, row) in table.iter().enumerate() {
                for (k, &p) in row.iter().enumerate() {
                    if !(p > 0.0 && p <= 1.0) {
                        return Err(Error::InvalidProbability {
                            context: format!("agent {i}, signal {s}, state {k}"),
                            value: p,
                        });
                    }
                }
            }
            let mut m = Matrix::from_rows(table)?;
            for s in 0..m.rows() {
                for x in m.row_mut(s) {
                    *x = libm::log(*x);
                }
            }
            logs.push(m);
        }
        Self::from_log_tables(logs)
    }

    /// Log-domain tables, one `|S_i| x m` matrix per agent.
    pub fn from_log_tables(tables: Vec<Matrix>) -> Result<Self> {
        let first = tables
            .first()
            .ok_or_else(|| Error::DimensionMismatch("no agents".into()))?;
        let states = first.cols();
        if states < 2 {
            return Err(Error::TooFewStates(states));
        }
        let mut log_bound: f64 = 0.0;
        for (i, t) in tables.iter().enumerate() {
            if t.cols() != states {
                return Err(Error::DimensionMismatch(format!(
                    "agent {i} has {} state columns, expected {states}",
                    t.cols()
                )));
            }
            if t.rows() == 0 {
                return Err(Error::DimensionMismatch(format!("agent {i} has an empty alphabet")));
            }
            for k in 0..states {
                let mut sum = 0.0;
                for s in 0..t.rows() {
                    let x = t[(s, k)];
                    if !x.is_finite() || x > 0.0 {
                        return Err(Error::InvalidProbability {
                            context: format!("agent {i}, signal {s}, state {k}"),
                            value: libm::exp(x),
                        });
                    }
                    log_bound = log_bound.max(libm::fabs(x));
                    sum += libm::exp(x);
                }
                if libm::fabs(sum - 1.0) > INPUT_TOLERANCE {
                    return Err(Error::NotNormalized {
                        context: format!("likelihood of agent {i} under state {k}"),
                        sum,
                    });
                }
            }
        }
        Ok(Self {
            states,
            tables,
            log_bound,
        })
    }

    /// Binary-signal family where agent `i` can only tell state `1 + i mod (m-1)`
    /// apart from the rest: `l_i(1 | k) = p_eq` for every other state and
    /// `p_diff` for the distinguished one. With `n >= m - 1` and state 0 true,
    /// every false state is detected by some agent.
    pub fn one_distinguishing_state(n: usize, m: usize, p_eq: f64, p_diff: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewStates(m));
        }
        let tables: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|i| {
                let special = Self::distinguished_state(i, m);
                let one: Vec<f64> = (0..m).map(|k| if k == special { p_diff } else { p_eq }).collect();
                let zero = one.iter().map(|p| 1.0 - p).collect();
                vec![zero, one]
            })
            .collect();
        Self::from_probabilities(&tables)
    }

    /// The state agent `i` distinguishes in [`Self::one_distinguishing_state`].
    pub fn distinguished_state(agent: usize, m: usize) -> usize {
        1 + agent % (m - 1)
    }

    pub fn agent_count(&self) -> usize {
        self.tables.len()
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn alphabet_size(&self, agent: usize) -> usize {
        self.tables[agent].rows()
    }

    pub fn log_table(&self, agent: usize) -> &Matrix {
        &self.tables[agent]
    }

    /// `log l_i(signal | .)` across all states.
    pub fn log_likelihoods(&self, agent: usize, signal: usize) -> Result<&[f64]> {
        let table = self.tables.get(agent).ok_or(Error::OutOfRange {
            what: "agents",
            index: agent,
            len: self.tables.len(),
        })?;
        if signal >= table.rows() {
            return Err(Error::UnknownSignal {
                agent,
                signal,
                size: table.rows(),
            });
        }
        Ok(table.row(signal))
    }

    /// Linear-domain distribution of agent `i`'s signal under `state`.
    pub fn signal_distribution(&self, agent: usize, state: usize) -> Vec<f64> {
        let t = &self.tables[agent];
        (0..t.rows()).map(|s| libm::exp(t[(s, state)])).collect()
    }

    /// Largest `|log l_i(s | k)|` over all agents, signals and states.
    pub fn log_bound(&self) -> f64 {
        self.log_bound
    }
}

/// Undirected weighted communication graph with a symmetric doubly stochastic
/// weight matrix and positive self-weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    weights: Matrix,
    connected: bool,
}

impl Network {
    /// Validates symmetry, row sums, non-negativity and positive diagonal.
    /// Disconnected graphs are accepted here and flagged by
    /// [`Network::is_strongly_connected`]; protocol runs reject them.
    pub fn from_weights(weights: Matrix) -> Result<Self> {
        if !weights.is_square() || weights.rows() == 0 {
            return Err(Error::InvalidWeights("matrix must be square and non-empty".into()));
        }
        let n = weights.rows();
        for i in 0..n {
            if weights[(i, i)].is_nan() || weights[(i, i)] <= 0.0 {
                return Err(Error::InvalidWeights(format!(
                    "self-weight of agent {i} is not positive"
                )));
            }
            let mut sum = 0.0;
            for j in 0..n {
                let w = weights[(i, j)];
                if !(w >= 0.0 && w.is_finite()) {
                    return Err(Error::InvalidWeights(format!("entry ({i},{j}) = {w}")));
                }
                if libm::fabs(w - weights[(j, i)]) > INPUT_TOLERANCE {
                    return Err(Error::InvalidWeights(format!("not symmetric at ({i},{j})")));
                }
                sum += w;
            }
            if libm::fabs(sum - 1.0) > INPUT_TOLERANCE {
                return Err(Error::InvalidWeights(format!("row {i} sums to {sum}")));
            }
        }
        let connected = reachable_from_zero(n, |i, j| weights[(i, j)] > 0.0);
        Ok(Self { weights, connected })
    }

    /// Metropolis weights `p_ij = 1 / (1 + max(d_i, d_j))` on the given
    /// undirected edge set, with the remaining mass on the diagonal.
    pub fn metropolis(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWeights("no agents".into()));
        }
        let mut adjacent = vec![false; n * n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::OutOfRange {
                    what: "agents",
                    index: a.max(b),
                    len: n,
                });
            }
            if a == b {
                return Err(Error::InvalidWeights(format!("self-loop at {a} in edge list")));
            }
            adjacent[a * n + b] = true;
            adjacent[b * n + a] = true;
        }
        if !reachable_from_zero(n, |i, j| adjacent[i * n + j]) {
            return Err(Error::Disconnected);
        }
        let degree: Vec<usize> = (0..n)
            .map(|i| (0..n).filter(|&j| adjacent[i * n + j]).count())
            .collect();
        let mut p = Matrix::zeros(n, n);
        for i in 0..n {
            let mut off = 0.0;
            for j in 0..n {
                if adjacent[i * n + j] {
                    let w = 1.0 / (1.0 + degree[i].max(degree[j]) as f64);
                    p[(i, j)] = w;
                    off += w;
                }
            }
            p[(i, i)] = 1.0 - off;
        }
        Self::from_weights(p)
    }

    pub fn agent_count(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.agent_count()).filter(move |&j| j != i && self.weights[(i, j)] > 0.0)
    }

    /// Undirected edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.agent_count();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.weights[(i, j)] > 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.connected
    }
}

/// Edges of the cycle `0 - 1 - ... - (n-1) - 0`.
pub fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
    }
}

pub fn complete_edges(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

/// BFS from node 0; for a symmetric adjacency this decides strong connectivity.
pub(crate) fn reachable_from_zero(n: usize, adjacent: impl Fn(usize, usize) -> bool) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for (j, s) in seen.iter_mut().enumerate() {
            if !*s && j != i && adjacent(i, j) {
                *s = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == n
}

/// Log-beliefs and potentials of every agent at one round.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    pub(crate) initial: Matrix,
    pub(crate) log_belief: Matrix,
    pub(crate) potentials: Matrix,
    pub(crate) round: usize,
}

impl BeliefState {
    /// Round-0 state: beliefs equal the given initial beliefs, potentials zero.
    pub fn new(initial_log_belief: Matrix) -> Self {
        let potentials = Matrix::zeros(initial_log_belief.rows(), initial_log_belief.cols());
        Self {
            log_belief: initial_log_belief.clone(),
            initial: initial_log_belief,
            potentials,
            round: 0,
        }
    }

    pub fn agent_count(&self) -> usize {
        self.log_belief.rows()
    }

    pub fn state_count(&self) -> usize {
        self.log_belief.cols()
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn log_belief(&self) -> &Matrix {
        &self.log_belief
    }

    pub fn initial_log_belief(&self) -> &Matrix {
        &self.initial
    }

    pub fn potentials(&self) -> &Matrix {
        &self.potentials
    }

    /// Linear-domain belief of `agent` in `state`.
    pub fn belief(&self, agent: usize, state: usize) -> f64 {
        libm::exp(self.log_belief[(agent, state)])
    }
}

/// Outcome of checking bounded log-likelihoods, global identifiability and
/// connectivity for a model.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Bound `B` on `|log l_i(s | k)|`. Always finite for a constructed model.
    pub log_bound: f64,
    /// `I(k, true)` for every state.
    pub network_divergence: Vec<f64>,
    /// False states no agent can tell apart from the true one.
    pub unidentified_states: Vec<usize>,
    pub connected: bool,
}

/// Which standing assumption failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    BoundedLogLikelihood,
    GlobalIdentifiability,
    StrongConnectivity,
}

impl core::fmt::Display for Assumption {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Assumption::BoundedLogLikelihood => "A1 (bounded log-likelihoods)",
            Assumption::GlobalIdentifiability => "A2 (global identifiability)",
            Assumption::StrongConnectivity => "A3 (strong connectivity)",
        })
    }
}

impl ValidationReport {
    pub fn bounded(&self) -> bool {
        self.log_bound.is_finite()
    }

    pub fn identifiable(&self) -> bool {
        self.unidentified_states.is_empty()
    }

    pub fn all_hold(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn first_failure(&self) -> Option<Assumption> {
        if !self.bounded() {
            Some(Assumption::BoundedLogLikelihood)
        } else if !self.identifiable() {
            Some(Assumption::GlobalIdentifiability)
        } else if !self.connected {
            Some(Assumption::StrongConnectivity)
        } else {
            None
        }
    }
}

/// Check the standing assumptions for a (likelihood, network, states) triple.
pub fn validate_assumptions(lik: &LikelihoodModel, net: &Network, space: &StateSpace) -> Result<ValidationReport> {
    if lik.agent_count() != net.agent_count() {
        return Err(Error::DimensionMismatch(format!(
            "likelihood model has {} agents, network has {}",
            lik.agent_count(),
            net.agent_count()
        )));
    }
    if lik.state_count() != space.len() {
        return Err(Error::DimensionMismatch(format!(
            "likelihood model has {} states, state space has {}",
            lik.state_count(),
            space.len()
        )));
    }
    let network_divergence = analysis::network_divergence(lik, space);
    let unidentified_states = network_divergence
        .iter()
        .enumerate()
        .filter(|&(k, &d)| k != space.true_state() && (d.is_nan() || d >= 0.0))
        .map(|(k, _)| k)
        .collect();
    Ok(ValidationReport {
        log_bound: lik.log_bound(),
        network_divergence,
        unidentified_states,
        connected: net.is_strongly_connected(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-15
    }

    #[test]
    fn metropolis_complete_three() {
        let net = Network::metropolis(3, &complete_edges(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(close(net.weight(i, j), 1.0 / 3.0));
            }
        }
    }

    #[test]
    fn metropolis_single_edge() {
        let net = Network::metropolis(2, &[(0, 1)]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(net.weight(i, j), 0.5));
            }
        }
    }

    #[test]
    fn metropolis_isolated_agent() {
        let net = Network::metropolis(1, &[]).unwrap();
        assert_eq!(net.weight(0, 0), 1.0);
        assert!(net.is_strongly_connected());
    }

    #[test]
    fn metropolis_path_uses_max_degree() {
        let net = Network::metropolis(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(close(net.weight(0, 1), 1.0 / 3.0));
        assert!(close(net.weight(0, 0), 2.0 / 3.0));
        assert!(close(net.weight(1, 1), 1.0 / 3.0));
        assert_eq!(net.weight(0, 2), 0.0);
    }

    #[test]
    fn metropolis_rejects_disconnected_and_self_loops() {
        assert_eq!(Network::metropolis(4, &[(0, 1), (2, 3)]), Err(Error::Disconnected));
        assert!(Network::metropolis(2, &[(0, 0), (0, 1)]).is_err());
    }

    #[test]
    fn weights_validation() {
        let asym = Matrix::from_rows(&[vec![0.5, 0.5], vec![0.4, 0.6]]).unwrap();
        assert!(Network::from_weights(asym).is_err());
        let zero_diag = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(Network::from_weights(zero_diag).is_err());
        let ok = Matrix::from_rows(&[vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        assert!(Network::from_weights(ok).unwrap().is_strongly_connected());
    }

    #[test]
    fn prior_rejects_degenerate() {
        assert!(Prior::from_probabilities(&[1.0, 0.0]).is_err());
        assert!(Prior::from_probabilities(&[0.6, 0.6]).is_err());
        assert!(Prior::from_probabilities(&[0.25, 0.75]).is_ok());
    }

    #[test]
    fn state_space_invariants() {
        assert!(StateSpace::indexed(1, 0).is_err());
        assert!(StateSpace::indexed(3, 3).is_err());
        assert!(StateSpace::new(vec!["a".into(), "a".into()], 0).is_err());
        assert_eq!(StateSpace::indexed(3, 1).unwrap().label(2), "theta_3");
    }

    #[test]
    fn likelihood_rejects_zero_and_unnormalized() {
        assert!(LikelihoodModel::from_probabilities(&[vec![vec![1.0, 0.5], vec![0.0, 0.5]]]).is_err());
        assert!(LikelihoodModel::from_probabilities(&[vec![vec![0.6, 0.5], vec![0.5, 0.5]]]).is_err());
    }

    #[test]
    fn log_bound_is_max_magnitude() {
        let lik = LikelihoodModel::from_probabilities(&[
            vec![vec![0.9, 0.5], vec![0.1, 0.5]],
            vec![vec![0.3, 0.2], vec![0.7, 0.8]],
        ])
        .unwrap();
        assert_eq!(lik.log_bound(), libm::fabs(libm::log(0.1)));
    }

    #[test]
    fn ring_edge_sets() {
        assert!(ring_edges(1).is_empty());
        assert_eq!(ring_edges(2), vec![(0, 1)]);
        assert_eq!(ring_edges(4).len(), 4);
    }

    #[test]
    fn reference_family_is_identifiable() {
        let lik = LikelihoodModel::one_distinguishing_state(15, 16, 0.5, 0.25).unwrap();
        let net = Network::metropolis(15, &ring_edges(15)).unwrap();
        let space = StateSpace::indexed(16, 0).unwrap();
        let report = validate_assumptions(&lik, &net, &space).unwrap();
        assert!(report.all_hold());
    }

    #[test]
    fn identical_likelihoods_fail_identifiability() {
        let col = vec![vec![0.3, 0.3, 0.6], vec![0.7, 0.7, 0.4]];
        let lik = LikelihoodModel::from_probabilities(&[col.clone(), col]).unwrap();
        let net = Network::metropolis(2, &[(0, 1)]).unwrap();
        let space = StateSpace::indexed(3, 0).unwrap();
        let report = validate_assumptions(&lik, &net, &space).unwrap();
        assert_eq!(report.unidentified_states, vec![1]);
        assert_eq!(report.first_failure(), Some(Assumption::GlobalIdentifiability));
    }

    #[test]
    fn disconnected_cliques_fail_connectivity() {
        let mut p = Matrix::zeros(6, 6);
        for block in [0usize, 3] {
            for i in block..block + 3 {
                for j in block..block + 3 {
                    p[(i, j)] = 1.0 / 3.0;
                }
            }
        }
        let net = Network::from_weights(p).unwrap();
        let lik = LikelihoodModel::one_distinguishing_state(6, 3, 0.5, 0.25).unwrap();
        let space = StateSpace::indexed(3, 0).unwrap();
        let report = validate_assumptions(&lik, &net, &space).unwrap();
        assert!(!report.connected);
        assert_eq!(report.first_failure(), Some(Assumption::StrongConnectivity));
    }

    #[test]
    fn validate_dimension_mismatch() {
        let lik = LikelihoodModel::one_distinguishing_state(3, 3, 0.5, 0.25).unwrap();
        let net = Network::metropolis(2, &[(0, 1)]).unwrap();
        let space = StateSpace::indexed(3, 0).unwrap();
        assert!(matches!(
            validate_assumptions(&lik, &net, &space),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
