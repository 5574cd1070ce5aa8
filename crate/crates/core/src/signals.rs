//! Seeded private-signal generation.
//!
//! Each draw is keyed by `(seed, round, agent)`: the seed keys a ChaCha8
//! stream, the agent selects the stream id and the round selects the word
//! position. Any signal can be regenerated on its own, independent of the
//! order in which the table is filled.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::model::{LikelihoodModel, StateSpace, INPUT_TOLERANCE};

/// Name recorded in output headers.
pub const GENERATOR_NAME: &str = "chacha8-keyed(key=seed,stream=agent,word=2*round)";

/// Per-agent signal distributions with a keyed uniform source.
#[derive(Debug, Clone)]
pub struct SignalSource {
    cdfs: Vec<Vec<f64>>,
    seed: u64,
}

impl SignalSource {
    /// `distributions[i]` is agent `i`'s signal distribution. Zero entries are
    /// allowed here (point masses are useful in tests) even though protocol
    /// runs require strictly positive likelihoods.
    pub fn new(distributions: &[Vec<f64>], seed: u64) -> Result<Self> {
        let mut cdfs = Vec::with_capacity(distributions.len());
        for (i, dist) in distributions.iter().enumerate() {
            if dist.is_empty() {
                return Err(Error::DimensionMismatch(format!("agent {i} has an empty alphabet")));
            }
            let mut acc = 0.0;
            let mut cdf = Vec::with_capacity(dist.len());
            for &p in dist {
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(Error::InvalidProbability {
                        context: format!("signal distribution of agent {i}"),
                        value: p,
                    });
                }
                acc += p;
                cdf.push(acc);
            }
            if libm::fabs(acc - 1.0) > INPUT_TOLERANCE {
                return Err(Error::NotNormalized {
                    context: format!("signal distribution of agent {i}"),
                    sum: acc,
                });
            }
            cdfs.push(cdf);
        }
        Ok(Self { cdfs, seed })
    }

    /// Signals drawn from `l_i(. | true state)`.
    pub fn from_model(lik: &LikelihoodModel, space: &StateSpace, seed: u64) -> Self {
        let dists: Vec<Vec<f64>> = (0..lik.agent_count())
            .map(|i| lik.signal_distribution(i, space.true_state()))
            .collect();
        Self::new(&dists, seed).expect("likelihood columns are validated distributions")
    }

    pub fn agent_count(&self) -> usize {
        self.cdfs.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn stream(&self, agent: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(agent as u64);
        rng
    }

    fn pick(&self, agent: usize, word: u64) -> usize {
        // 53 high bits -> [0, 1)
        let u = (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let cdf = &self.cdfs[agent];
        cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
    }

    /// The signal of `agent` at `round`.
    pub fn signal(&self, round: usize, agent: usize) -> usize {
        let mut rng = self.stream(agent);
        rng.set_word_pos(2 * round as u128);
        self.pick(agent, rng.next_u64())
    }

    /// Signals for rounds `0..=rounds`.
    pub fn table(&self, rounds: usize) -> SignalTable {
        let n = self.agent_count();
        let mut data = alloc::vec![0usize; (rounds + 1) * n];
        for agent in 0..n {
            let mut rng = self.stream(agent);
            for t in 0..=rounds {
                data[t * n + agent] = self.pick(agent, rng.next_u64());
            }
        }
        SignalTable { agents: n, data }
    }
}

/// Signals indexed by round (from 0) and agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalTable {
    agents: usize,
    data: Vec<usize>,
}

impl SignalTable {
    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self> {
        let agents = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != agents) {
            return Err(Error::DimensionMismatch("ragged signal table".into()));
        }
        Ok(Self {
            agents,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn agent_count(&self) -> usize {
        self.agents
    }

    /// Number of update rounds after round 0.
    pub fn rounds(&self) -> usize {
        (self.data.len() / self.agents.max(1)).saturating_sub(1)
    }

    pub fn round(&self, t: usize) -> &[usize] {
        &self.data[t * self.agents..(t + 1) * self.agents]
    }
}

/// Draw `rounds + 1` rows of i.i.d. signals under the true state.
pub fn generate_signals(lik: &LikelihoodModel, space: &StateSpace, seed: u64, rounds: usize) -> SignalTable {
    SignalSource::from_model(lik, space, seed).table(rounds)
}
