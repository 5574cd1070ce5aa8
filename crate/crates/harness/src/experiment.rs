//! Replica orchestration and the always-communicate baseline.

use rayon::prelude::*;
use switchlearn_core::analysis::estimate_rate;
use switchlearn_core::signals::GENERATOR_NAME;
use switchlearn_core::{
    generate_signals, identifiability_report, simulate, validate_assumptions, Assumption, IdentifiabilityReport,
    SignalTable, Threshold, Trajectory, ValidationReport,
};

use crate::config::{ExperimentConfig, Scenario};
use crate::error::{HarnessError, Result};

/// Check the standing assumptions; the first violated one becomes an error.
pub fn validate(scenario: &Scenario) -> Result<ValidationReport> {
    let report = validate_assumptions(&scenario.likelihood, &scenario.network, &scenario.space)?;
    match report.first_failure() {
        None => Ok(report),
        Some(assumption) => {
            let detail = match assumption {
                Assumption::BoundedLogLikelihood => format!("log-likelihood bound is {}", report.log_bound),
                Assumption::GlobalIdentifiability => {
                    let labels: Vec<&str> = report
                        .unidentified_states
                        .iter()
                        .map(|&k| scenario.space.label(k))
                        .collect();
                    format!(
                        "no agent separates {} from the true state {}",
                        labels.join(", "),
                        scenario.space.label(scenario.space.true_state())
                    )
                }
                Assumption::StrongConnectivity => "the weight graph is not connected".to_string(),
            };
            Err(HarnessError::Assumption { assumption, detail })
        }
    }
}

/// One Monte Carlo replica.
#[derive(Debug, Clone)]
pub struct ReplicaResult {
    pub replica: usize,
    pub seed: u64,
    pub trajectory: Trajectory,
}

impl ReplicaResult {
    /// Whether every agent ends with `mu(true) > 1 - delta`.
    pub fn learned(&self, delta: f64) -> bool {
        let state = self.trajectory.final_state();
        let truth = self.trajectory.true_state();
        let cut = (-delta).ln_1p();
        (0..state.agent_count()).all(|i| state.log_belief()[(i, truth)] > cut)
    }
}

/// Everything a `run` produces.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub generator: &'static str,
    pub tau: f64,
    pub validation: ValidationReport,
    pub identifiability: IdentifiabilityReport,
    pub replicas: Vec<ReplicaResult>,
}

/// Estimation window `[T/2, T]`.
pub fn rate_window(rounds: usize) -> (usize, usize) {
    (rounds / 2, rounds)
}

impl RunReport {
    pub fn labels(&self) -> Vec<String> {
        match &self.config.state_labels {
            Some(l) => l.clone(),
            None => (1..=self.config.states).map(|k| format!("theta_{k}")).collect(),
        }
    }

    /// Replicas in which every agent ends above `1 - consensus_delta`.
    pub fn learned_count(&self) -> usize {
        let delta = self.config.consensus_delta;
        self.replicas.iter().filter(|r| r.learned(delta)).count()
    }

    /// Per-agent communication fraction averaged over replicas.
    pub fn agent_fractions(&self) -> Vec<f64> {
        let n = self.config.agents;
        let reps = self.replicas.len() as f64;
        (0..n)
            .map(|i| {
                self.replicas
                    .iter()
                    .map(|r| r.trajectory.ledger().fraction(i))
                    .sum::<f64>()
                    / reps
            })
            .collect()
    }

    pub fn mean_fraction(&self) -> f64 {
        let f = self.agent_fractions();
        f.iter().sum::<f64>() / f.len() as f64
    }

    /// Per false state, the designated agent's slope of
    /// `log mu(k) - log mu(true)` over `[T/2, T]`, averaged over replicas.
    pub fn estimated_divergence(&self) -> Result<Vec<Option<f64>>> {
        let truth = self.config.true_state;
        let window = rate_window(self.config.rounds);
        let agent = self.config.designated_agent;
        (0..self.config.states)
            .map(|k| {
                if k == truth {
                    return Ok(None);
                }
                let mut sum = 0.0;
                for r in &self.replicas {
                    sum += estimate_rate(&r.trajectory, agent, k, window)?;
                }
                Ok(Some(sum / self.replicas.len() as f64))
            })
            .collect()
    }

    /// `min over false k` of the negated estimated slope.
    pub fn estimated_rate(&self) -> Result<f64> {
        Ok(self
            .estimated_divergence()?
            .into_iter()
            .flatten()
            .map(|d| -d)
            .fold(f64::INFINITY, f64::min))
    }
}

fn replica_signals(cfg: &ExperimentConfig, scenario: &Scenario, replica: usize) -> SignalTable {
    generate_signals(
        &scenario.likelihood,
        &scenario.space,
        cfg.replica_seed(replica),
        cfg.rounds,
    )
}

fn run_one(
    cfg: &ExperimentConfig,
    scenario: &Scenario,
    tau: Threshold,
    replica: usize,
    signals: &SignalTable,
) -> Result<ReplicaResult> {
    let trajectory = simulate(
        &scenario.network,
        &scenario.likelihood,
        &scenario.prior,
        &scenario.space,
        tau,
        signals,
        cfg.record_options(),
    )?;
    Ok(ReplicaResult {
        replica,
        seed: cfg.replica_seed(replica),
        trajectory,
    })
}

fn report(
    cfg: &ExperimentConfig,
    scenario: &Scenario,
    validation: ValidationReport,
    tau: Threshold,
    replicas: Vec<ReplicaResult>,
) -> RunReport {
    RunReport {
        config: cfg.clone(),
        generator: GENERATOR_NAME,
        tau: tau.value(),
        validation,
        identifiability: identifiability_report(&scenario.likelihood, &scenario.space),
        replicas,
    }
}

/// Run every replica of `cfg` (replica `r` uses seed `seed + r`).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    let scenario = cfg.scenario()?;
    let validation = validate(&scenario)?;
    let replicas = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| run_one(cfg, &scenario, scenario.tau, r, &replica_signals(cfg, &scenario, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(report(cfg, &scenario, validation, scenario.tau, replicas))
}

/// Switching run and `tau = 1` baseline on the same signal streams.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub switching: RunReport,
    pub baseline: RunReport,
}

/// One row of the paired designated-agent trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedPoint {
    pub replica: usize,
    pub round: usize,
    pub switching: f64,
    pub baseline: f64,
}

impl Comparison {
    /// Belief of the designated agent in the true state, per stored round,
    /// under both protocols.
    pub fn paired(&self) -> Vec<PairedPoint> {
        let agent = self.switching.config.designated_agent;
        let truth = self.switching.config.true_state;
        let mut out = Vec::new();
        for (s, b) in self.switching.replicas.iter().zip(&self.baseline.replicas) {
            for (ss, bs) in s.trajectory.snapshots().iter().zip(b.trajectory.snapshots()) {
                debug_assert_eq!(ss.round, bs.round);
                out.push(PairedPoint {
                    replica: s.replica,
                    round: ss.round,
                    switching: ss.log_belief[(agent, truth)].exp(),
                    baseline: bs.log_belief[(agent, truth)].exp(),
                });
            }
        }
        out
    }
}

pub fn compare_baseline(cfg: &ExperimentConfig) -> Result<Comparison> {
    let scenario = cfg.scenario()?;
    let validation = validate(&scenario)?;
    let always = Threshold::always_communicate();
    let pairs = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| {
            let signals = replica_signals(cfg, &scenario, r);
            Ok((
                run_one(cfg, &scenario, scenario.tau, r, &signals)?,
                run_one(cfg, &scenario, always, r, &signals)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (switching, baseline): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let mut base_cfg = cfg.clone();
    base_cfg.tau = 1.0;
    Ok(Comparison {
        switching: report(cfg, &scenario, validation.clone(), scenario.tau, switching),
        baseline: report(&base_cfg, &scenario, validation, always, baseline),
    })
}
