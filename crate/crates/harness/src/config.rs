//! Experiment configuration (JSON).
//!
//! Every field has a default; an empty object `{}` describes the reference
//! scenario: 15 agents on a ring with Metropolis weights, 16 states, binary
//! signals where agent `i` only tells state `i + 1` apart from the truth,
//! `tau = 1e-17`, 1000 rounds and 20 replicas.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use switchlearn_core::model::{complete_edges, ring_edges};
use switchlearn_core::protocol::RecordOptions;
use switchlearn_core::{
    Assumption, Error as CoreError, LikelihoodModel, Matrix, Network, Prior, StateSpace, Threshold,
};

use crate::error::{io_err, HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Topology {
    Ring,
    Complete,
    Custom { edges: Vec<(usize, usize)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum Weights {
    Metropolis,
    /// Full `n x n` symmetric doubly stochastic matrix.
    Explicit {
        matrix: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Likelihood {
    /// Agent `i` sees signal 1 with probability `p_diff` under state
    /// `1 + i mod (m - 1)` and `p_eq` under every other state.
    OneDistinguishingState { p_eq: f64, p_diff: f64 },
    /// `tables[i][s][k]` = probability of signal `s` for agent `i` under state `k`.
    Tables { tables: Vec<Vec<Vec<f64>>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorSpec {
    Uniform,
    Probabilities { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub agents: usize,
    pub states: usize,
    /// Optional labels; defaults to `theta_1 .. theta_m`.
    pub state_labels: Option<Vec<String>>,
    pub true_state: usize,
    /// Required unless `weights` is explicit, in which case the edges are
    /// read from the matrix (and checked against this if given).
    pub topology: Option<Topology>,
    pub weights: Weights,
    pub likelihood: Likelihood,
    pub prior: PriorSpec,
    pub tau: f64,
    pub rounds: usize,
    pub seed: u64,
    pub replicas: usize,
    pub consensus_delta: f64,
    /// Snapshot spacing once `rounds` exceeds 10 000.
    pub thin_every: usize,
    /// Agent whose trajectories are paired in comparisons.
    pub designated_agent: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            agents: 15,
            states: 16,
            state_labels: None,
            true_state: 0,
            topology: Some(Topology::Ring),
            weights: Weights::Metropolis,
            likelihood: Likelihood::OneDistinguishingState {
                p_eq: 0.5,
                p_diff: 0.25,
            },
            prior: PriorSpec::Uniform,
            tau: 1e-17,
            rounds: 1000,
            seed: 1,
            replicas: 20,
            consensus_delta: 1e-6,
            thin_every: 10,
            designated_agent: 0,
        }
    }
}

/// Validated model objects built from a config.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub space: StateSpace,
    pub prior: Prior,
    pub likelihood: LikelihoodModel,
    pub network: Network,
    pub tau: Threshold,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text).map_err(|source| HarnessError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Scalar range checks that do not need the model objects.
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.agents == 0 {
            return bad("agents must be at least 1".into());
        }
        if self.states < 2 {
            return bad(format!("states must be at least 2, got {}", self.states));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must satisfy 0 < tau <= 1, got {}", self.tau));
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if self.replicas == 0 {
            return bad("replicas must be at least 1".into());
        }
        if !(self.consensus_delta > 0.0 && self.consensus_delta < 1.0) {
            return bad(format!(
                "consensus_delta must lie in (0, 1), got {}",
                self.consensus_delta
            ));
        }
        if self.thin_every == 0 {
            return bad("thin_every must be at least 1".into());
        }
        if self.designated_agent >= self.agents {
            return bad(format!(
                "designated_agent {} out of range for {} agents",
                self.designated_agent, self.agents
            ));
        }
        if let Some(labels) = &self.state_labels {
            if labels.len() != self.states {
                return bad(format!("{} state labels for {} states", labels.len(), self.states));
            }
            if let Some(l) = labels
                .iter()
                .find(|l| l.is_empty() || l.contains([',', '\n', '\r', '"']))
            {
                return bad(format!("state label {l:?} is empty or contains CSV metacharacters"));
            }
        }
        Ok(())
    }

    fn edges(&self) -> Result<Vec<(usize, usize)>> {
        match &self.topology {
            Some(Topology::Ring) => Ok(ring_edges(self.agents)),
            Some(Topology::Complete) => Ok(complete_edges(self.agents)),
            Some(Topology::Custom { edges }) => Ok(edges.clone()),
            None => Err(HarnessError::Config(
                "topology is required with metropolis weights".into(),
            )),
        }
    }

    /// Build and validate every model object (dimensions included). Of the
    /// learning assumptions only a disconnected Metropolis topology is caught
    /// here; see [`crate::experiment::validate`] for the full check.
    pub fn scenario(&self) -> Result<Scenario> {
        self.check()?;
        let n = self.agents;
        let space = match &self.state_labels {
            Some(labels) => StateSpace::new(labels.clone(), self.true_state)?,
            None => StateSpace::indexed(self.states, self.true_state)?,
        };
        let prior = match &self.prior {
            PriorSpec::Uniform => Prior::uniform(self.states),
            PriorSpec::Probabilities { values } => {
                if values.len() != self.states {
                    return Err(HarnessError::Config(format!(
                        "prior has {} entries for {} states",
                        values.len(),
                        self.states
                    )));
                }
                Prior::from_probabilities(values)?
            }
        };
        let likelihood = match &self.likelihood {
            Likelihood::OneDistinguishingState { p_eq, p_diff } => {
                LikelihoodModel::one_distinguishing_state(n, self.states, *p_eq, *p_diff)?
            }
            Likelihood::Tables { tables } => {
                if tables.len() != n {
                    return Err(HarnessError::Config(format!(
                        "{} likelihood tables for {n} agents",
                        tables.len()
                    )));
                }
                let lik = LikelihoodModel::from_probabilities(tables)?;
                if lik.state_count() != self.states {
                    return Err(HarnessError::Config(format!(
                        "likelihood tables cover {} states, config says {}",
                        lik.state_count(),
                        self.states
                    )));
                }
                lik
            }
        };
        let network = match &self.weights {
            Weights::Metropolis => Network::metropolis(n, &self.edges()?).map_err(|e| match e {
                CoreError::Disconnected => HarnessError::Assumption {
                    assumption: Assumption::StrongConnectivity,
                    detail: "the topology graph is not connected".into(),
                },
                other => other.into(),
            })?,
            Weights::Explicit { matrix } => {
                let p = Matrix::from_rows(matrix)?;
                if p.rows() != n {
                    return Err(HarnessError::Config(format!(
                        "weight matrix is {}x{} for {n} agents",
                        p.rows(),
                        p.cols()
                    )));
                }
                let net = Network::from_weights(p)?;
                if self.topology.is_some() {
                    let mut want: Vec<(usize, usize)> =
                        self.edges()?.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
                    want.sort_unstable();
                    want.dedup();
                    if want != net.edges() {
                        return Err(HarnessError::Config(
                            "explicit weights disagree with the topology edge set".into(),
                        ));
                    }
                }
                net
            }
        };
        Ok(Scenario {
            space,
            prior,
            likelihood,
            network,
            tau: Threshold::new(self.tau)?,
        })
    }

    pub fn record_options(&self) -> RecordOptions {
        RecordOptions::for_rounds(self.rounds, self.thin_every, self.consensus_delta)
    }

    /// Seed of replica `r`.
    pub fn replica_seed(&self, replica: usize) -> u64 {
        self.seed.wrapping_add(replica as u64)
    }
}
