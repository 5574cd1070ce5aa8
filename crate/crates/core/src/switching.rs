//! Round-by-round mixing matrices and the communication ledger.
//!
//! An agent whose private signal is uninformative exchanges with all of its
//! neighbors; an informative agent exchanges only with neighbors that ask
//! for it. In matrix terms, row and column `i` of `Q_t` copy those of `P`
//! for every uninformative `i`, and the diagonal absorbs the remaining mass.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::model::Network;

/// Mixing matrix for one round together with the set that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingMatrix {
    q: Matrix,
    uninformative: Vec<bool>,
    round: usize,
}

impl SwitchingMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.q
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Membership flags of the uninformative set, one per agent.
    pub fn uninformative(&self) -> &[bool] {
        &self.uninformative
    }

    pub fn uninformative_agents(&self) -> impl Iterator<Item = usize> + '_ {
        self.uninformative
            .iter()
            .enumerate()
            .filter_map(|(i, &u)| u.then_some(i))
    }

    /// Positive off-diagonal pairs `(i, j)`, `i < j`.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let n = self.q.rows();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.q[(i, j)] > 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.support().is_empty()
    }
}

/// Build `Q_t` from the network and the uninformative flags of round `round`.
///
/// Panics if `uninformative.len()` differs from the agent count.
pub fn build_switching_matrix(net: &Network, uninformative: &[bool], round: usize) -> SwitchingMatrix {
    let n = net.agent_count();
    assert_eq!(uninformative.len(), n, "one flag per agent");
    let p = net.weights();
    let mut q = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if uninformative[i] || uninformative[j] {
                let w = p[(i, j)];
                q[(i, j)] = w;
                q[(j, i)] = w;
            }
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| q[(i, j)]).sum();
        q[(i, i)] = 1.0 - off;
    }
    SwitchingMatrix {
        q,
        uninformative: uninformative.to_vec(),
        round,
    }
}

/// Convenience over [`build_switching_matrix`] taking agent indices.
pub fn build_from_agents(net: &Network, agents: &[usize], round: usize) -> SwitchingMatrix {
    let mut flags = vec![false; net.agent_count()];
    for &a in agents {
        flags[a] = true;
    }
    build_switching_matrix(net, &flags, round)
}

/// One undirected exchange between two agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CommEvent {
    pub round: usize,
    pub agent_i: usize,
    pub agent_j: usize,
}

/// Record of every exchange, plus how many rounds each agent talked in.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommLedger {
    events: Vec<CommEvent>,
    per_agent_rounds: Vec<usize>,
    rounds: usize,
}

impl CommLedger {
    pub fn new(agents: usize) -> Self {
        Self {
            events: Vec::new(),
            per_agent_rounds: vec![0; agents],
            rounds: 0,
        }
    }

    /// Append the exchanges implied by `q`.
    pub fn record_round(&mut self, q: &SwitchingMatrix) {
        let n = self.per_agent_rounds.len();
        let mut talked = vec![false; n];
        for (i, j) in q.support() {
            self.events.push(CommEvent {
                round: q.round(),
                agent_i: i,
                agent_j: j,
            });
            talked[i] = true;
            talked[j] = true;
        }
        for (count, t) in self.per_agent_rounds.iter_mut().zip(talked) {
            *count += usize::from(t);
        }
        self.rounds += 1;
    }

    pub fn events(&self) -> &[CommEvent] {
        &self.events
    }

    pub fn per_agent_rounds(&self) -> &[usize] {
        &self.per_agent_rounds
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Share of recorded rounds in which `agent` exchanged with anyone.
    pub fn fraction(&self, agent: usize) -> f64 {
        if self.rounds == 0 {
            return 0.0;
        }
        self.per_agent_rounds[agent] as f64 / self.rounds as f64
    }

    pub fn mean_fraction(&self) -> f64 {
        let n = self.per_agent_rounds.len();
        if n == 0 {
            return 0.0;
        }
        (0..n).map(|i| self.fraction(i)).sum::<f64>() / n as f64
    }

    /// Events whose round lies in `start..=end`.
    pub fn events_in(&self, start: usize, end: usize) -> impl Iterator<Item = &CommEvent> {
        let lo = self.events.partition_point(|e| e.round < start);
        let hi = self.events.partition_point(|e| e.round <= end);
        self.events[lo..hi].iter()
    }
}
