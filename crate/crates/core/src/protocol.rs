//! The switching protocol round loop and trajectory recording.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::learning::{self, InformativenessVerdict, Threshold};
use crate::linalg::Matrix;
use crate::model::{BeliefState, LikelihoodModel, Network, Prior, StateSpace};
use crate::signals::SignalTable;
use crate::switching::{build_switching_matrix, CommLedger, SwitchingMatrix};

/// Full per-round belief storage is kept up to this many rounds.
pub const FULL_STORAGE_ROUNDS: usize = 10_000;

/// Round-0 beliefs: each agent's Bayesian posterior on its first private signal.
pub fn initialize(prior: &Prior, lik: &LikelihoodModel, signals: &[usize]) -> Result<BeliefState> {
    if signals.len() != lik.agent_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} signals for {} agents",
            signals.len(),
            lik.agent_count()
        )));
    }
    if prior.len() != lik.state_count() {
        return Err(Error::DimensionMismatch(
            "prior and likelihood state counts differ".into(),
        ));
    }
    let mut init = Matrix::zeros(lik.agent_count(), lik.state_count());
    for (i, &s) in signals.iter().enumerate() {
        let row = learning::initial_belief(prior, lik, i, s)?;
        init.row_mut(i).copy_from_slice(&row);
    }
    Ok(BeliefState::new(init))
}

/// Everything one round produces.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub state: BeliefState,
    pub switching: SwitchingMatrix,
    pub verdicts: Vec<InformativenessVerdict>,
}

/// Advance from round `t - 1` to `t`.
///
/// All verdicts are taken against the pre-round beliefs before any mixing;
/// agents with `tv < tau` form the uninformative set, which fixes `Q_t`;
/// potentials are then mixed and beliefs recomputed from them.
pub fn run_round(
    state: &BeliefState,
    net: &Network,
    lik: &LikelihoodModel,
    tau: Threshold,
    signals: &[usize],
) -> Result<RoundOutcome> {
    let n = state.agent_count();
    if net.agent_count() != n || lik.agent_count() != n || signals.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "state has {n} agents, network {}, likelihood {}, signals {}",
            net.agent_count(),
            lik.agent_count(),
            signals.len()
        )));
    }
    let verdicts = (0..n)
        .map(|i| learning::is_informative(state.log_belief.row(i), lik, i, signals[i], tau))
        .collect::<Result<Vec<_>>>()?;
    let uninformative: Vec<bool> = verdicts.iter().map(|v| !v.informative).collect();
    let round = state.round + 1;
    let switching = build_switching_matrix(net, &uninformative, round);
    let potentials = learning::potential_update(&state.potentials, switching.matrix(), lik, signals)?;
    let log_belief = learning::belief_from_potentials(&state.initial, &potentials)?;
    Ok(RoundOutcome {
        state: BeliefState {
            initial: state.initial.clone(),
            log_belief,
            potentials,
            round,
        },
        switching,
        verdicts,
    })
}

/// What to keep while simulating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordOptions {
    /// Keep every `thin_every`-th belief snapshot (plus rounds 0 and T).
    pub thin_every: usize,
    /// Learning is declared once every agent has `mu(true) > 1 - consensus_delta`.
    pub consensus_delta: f64,
}

impl Default for RecordOptions {
    fn default() -> Self {
        Self {
            thin_every: 1,
            consensus_delta: 1e-6,
        }
    }
}

impl RecordOptions {
    /// Full storage up to [`FULL_STORAGE_ROUNDS`], otherwise every `k`-th round.
    pub fn for_rounds(rounds: usize, k: usize, consensus_delta: f64) -> Self {
        Self {
            thin_every: if rounds <= FULL_STORAGE_ROUNDS { 1 } else { k.max(1) },
            consensus_delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeliefSnapshot {
    pub round: usize,
    pub log_belief: Matrix,
}

/// Recorded run of the protocol.
#[derive(Debug, Clone)]
pub struct Trajectory {
    agents: usize,
    states: usize,
    true_state: usize,
    rounds: usize,
    snapshots: Vec<BeliefSnapshot>,
    tv: Vec<f64>,
    uninformative: Vec<bool>,
    ledger: CommLedger,
    consensus_round: Option<usize>,
    final_state: BeliefState,
}

impl Trajectory {
    pub fn agent_count(&self) -> usize {
        self.agents
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn true_state(&self) -> usize {
        self.true_state
    }

    /// Number of update rounds `T`.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Stored beliefs in increasing round order, starting at round 0.
    pub fn snapshots(&self) -> &[BeliefSnapshot] {
        &self.snapshots
    }

    /// TV distance of `agent` at round `t` (1-based).
    pub fn tv(&self, t: usize, agent: usize) -> f64 {
        self.tv[(t - 1) * self.agents + agent]
    }

    /// Uninformative flags of round `t` (1-based).
    pub fn uninformative(&self, t: usize) -> &[bool] {
        &self.uninformative[(t - 1) * self.agents..t * self.agents]
    }

    pub fn ledger(&self) -> &CommLedger {
        &self.ledger
    }

    pub fn consensus_round(&self) -> Option<usize> {
        self.consensus_round
    }

    pub fn final_state(&self) -> &BeliefState {
        &self.final_state
    }

    /// Off-diagonal support of `Q_t`, read back from the ledger.
    pub fn q_support(&self, t: usize) -> Vec<(usize, usize)> {
        self.ledger.events_in(t, t).map(|e| (e.agent_i, e.agent_j)).collect()
    }

    /// Rebuild `Q_1, ..., Q_T` from the recorded uninformative sets.
    pub fn switching_matrices(&self, net: &Network) -> Vec<SwitchingMatrix> {
        (1..=self.rounds)
            .map(|t| build_switching_matrix(net, self.uninformative(t), t))
            .collect()
    }
}

fn reached_consensus(log_belief: &Matrix, true_state: usize, delta: f64) -> bool {
    let cut = libm::log1p(-delta);
    (0..log_belief.rows()).all(|i| log_belief[(i, true_state)] > cut)
}

/// Run the protocol for every round in `signals` (round 0 seeds the beliefs).
pub fn simulate(
    net: &Network,
    lik: &LikelihoodModel,
    prior: &Prior,
    space: &StateSpace,
    tau: Threshold,
    signals: &SignalTable,
    options: RecordOptions,
) -> Result<Trajectory> {
    let n = net.agent_count();
    if signals.agent_count() != n || lik.agent_count() != n {
        return Err(Error::DimensionMismatch(format!(
            "network has {n} agents, likelihood {}, signals {}",
            lik.agent_count(),
            signals.agent_count()
        )));
    }
    if space.len() != lik.state_count() {
        return Err(Error::DimensionMismatch("state space and likelihood differ".into()));
    }
    if !(options.consensus_delta > 0.0 && options.consensus_delta < 1.0) {
        return Err(Error::OutsideUnitInterval(options.consensus_delta));
    }
    let rounds = signals.rounds();
    let thin = options.thin_every.max(1);
    let true_state = space.true_state();

    let mut state = initialize(prior, lik, signals.round(0))?;
    let mut snapshots = alloc::vec![BeliefSnapshot {
        round: 0,
        log_belief: state.log_belief.clone(),
    }];
    let mut consensus_round = reached_consensus(&state.log_belief, true_state, options.consensus_delta).then_some(0);
    let mut tv = Vec::with_capacity(rounds * n);
    let mut uninformative = Vec::with_capacity(rounds * n);
    let mut ledger = CommLedger::new(n);

    for t in 1..=rounds {
        let out = run_round(&state, net, lik, tau, signals.round(t))?;
        for v in &out.verdicts {
            tv.push(v.tv);
            uninformative.push(!v.informative);
        }
        ledger.record_round(&out.switching);
        state = out.state;
        if consensus_round.is_none() && reached_consensus(&state.log_belief, true_state, options.consensus_delta) {
            consensus_round = Some(t);
        }
        if t % thin == 0 || t == rounds {
            snapshots.push(BeliefSnapshot {
                round: t,
                log_belief: state.log_belief.clone(),
            });
        }
    }

    Ok(Trajectory {
        agents: n,
        states: lik.state_count(),
        true_state,
        rounds,
        snapshots,
        tv,
        uninformative,
        ledger,
        consensus_round,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ring_edges;
    use crate::signals::generate_signals;

    fn small() -> (Network, LikelihoodModel, Prior, StateSpace) {
        let net = Network::metropolis(4, &ring_edges(4)).unwrap();
        let lik = LikelihoodModel::one_distinguishing_state(4, 3, 0.5, 0.2).unwrap();
        (net, lik, Prior::uniform(3), StateSpace::indexed(3, 0).unwrap())
    }

    #[test]
    fn single_agent_is_pure_bayes() {
        let lik =
            LikelihoodModel::from_probabilities(&[alloc::vec![alloc::vec![0.2, 0.6, 0.5], alloc::vec![0.8, 0.4, 0.5]]])
                .unwrap();
        let net = Network::metropolis(1, &[]).unwrap();
        let space = StateSpace::indexed(3, 0).unwrap();
        let prior = Prior::uniform(3);
        let signals = generate_signals(&lik, &space, 3, 50);
        for tau in [1e-17, 0.3, 1.0] {
            let traj = simulate(
                &net,
                &lik,
                &prior,
                &space,
                Threshold::new(tau).unwrap(),
                &signals,
                RecordOptions::default(),
            )
            .unwrap();
            let mut belief = learning::initial_belief(&prior, &lik, 0, signals.round(0)[0]).unwrap();
            for t in 1..=50 {
                belief = learning::bayes_update(&belief, &lik, 0, signals.round(t)[0]).unwrap();
            }
            let last = traj.final_state().log_belief();
            for k in 0..3 {
                assert!((last[(0, k)] - belief[k]).abs() < 1e-10);
            }
            assert!(traj.ledger().events().is_empty());
        }
    }

    #[test]
    fn tau_one_always_mixes_with_p() {
        let (net, lik, prior, space) = small();
        let signals = generate_signals(&lik, &space, 9, 30);
        let traj = simulate(
            &net,
            &lik,
            &prior,
            &space,
            Threshold::always_communicate(),
            &signals,
            RecordOptions::default(),
        )
        .unwrap();
        for q in traj.switching_matrices(&net) {
            assert_eq!(q.matrix(), net.weights());
        }
        assert_eq!(traj.ledger().mean_fraction(), 1.0);
    }

    #[test]
    fn thinning_keeps_endpoints() {
        let (net, lik, prior, space) = small();
        let signals = generate_signals(&lik, &space, 1, 25);
        let opts = RecordOptions {
            thin_every: 10,
            consensus_delta: 1e-6,
        };
        let traj = simulate(
            &net,
            &lik,
            &prior,
            &space,
            Threshold::new(1e-3).unwrap(),
            &signals,
            opts,
        )
        .unwrap();
        let rounds: Vec<usize> = traj.snapshots().iter().map(|s| s.round).collect();
        assert_eq!(rounds, alloc::vec![0, 10, 20, 25]);
        assert_eq!(RecordOptions::for_rounds(20_000, 10, 1e-6).thin_every, 10);
        assert_eq!(RecordOptions::for_rounds(10_000, 10, 1e-6).thin_every, 1);
    }

    #[test]
    fn ledger_matches_switching_support() {
        let (net, lik, prior, space) = small();
        let signals = generate_signals(&lik, &space, 5, 200);
        let traj = simulate(
            &net,
            &lik,
            &prior,
            &space,
            Threshold::new(1e-6).unwrap(),
            &signals,
            RecordOptions::default(),
        )
        .unwrap();
        for (t, q) in (1..).zip(traj.switching_matrices(&net)) {
            assert_eq!(traj.q_support(t), q.support());
        }
    }

    #[test]
    fn dimension_errors() {
        let (net, lik, prior, space) = small();
        let bad = SignalTable::from_rows(&[alloc::vec![0, 0], alloc::vec![1, 1]]).unwrap();
        assert!(simulate(
            &net,
            &lik,
            &prior,
            &space,
            Threshold::new(0.1).unwrap(),
            &bad,
            RecordOptions::default()
        )
        .is_err());
        assert!(initialize(&Prior::uniform(4), &lik, &[0, 0, 0, 0]).is_err());
    }
}
