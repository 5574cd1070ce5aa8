//! CSV and plain-text outputs.
//!
//! Every file starts with a `#` line naming the signal generator and seed.
//! Beliefs are written in the linear domain with 17 significant digits, which
//! is enough for an exact `f64` round trip.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use switchlearn_core::analysis::EQUIVALENCE_TOLERANCE;
use switchlearn_core::IdentifiabilityReport;

use crate::error::{io_err, HarnessError, Result};
use crate::experiment::{rate_window, Comparison, RunReport};

fn provenance(generator: &str, seed: u64) -> String {
    format!("# rng={generator} seed={seed}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn write_all(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

/// Write `beliefs.csv`, `comm.csv` and `summary.txt` into `dir`.
///
/// `stride` keeps every `stride`-th stored snapshot (plus the last one) in
/// `beliefs.csv`; 1 writes everything that was recorded.
pub fn write_run(report: &RunReport, dir: &Path, stride: usize) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_beliefs(report, &dir.join("beliefs.csv"), stride)?;
    write_comm(report, &dir.join("comm.csv"))?;
    write_all(&dir.join("summary.txt"), &summary(report)?)
}

pub fn write_beliefs(report: &RunReport, path: &Path, stride: usize) -> Result<()> {
    let stride = stride.max(1);
    let labels = report.labels();
    let mut w = create(path)?;
    let io = |e| io_err(path)(e);
    writeln!(w, "{}", provenance(report.generator, report.config.seed)).map_err(io)?;
    writeln!(w, "replica,t,agent,state_label,belief").map_err(io)?;
    for rep in &report.replicas {
        let snaps = rep.trajectory.snapshots();
        for (idx, snap) in snaps.iter().enumerate() {
            if idx % stride != 0 && idx + 1 != snaps.len() {
                continue;
            }
            let lb = &snap.log_belief;
            for i in 0..lb.rows() {
                for (k, label) in labels.iter().enumerate() {
                    writeln!(
                        w,
                        "{},{},{},{},{:.16e}",
                        rep.replica,
                        snap.round,
                        i,
                        label,
                        lb[(i, k)].exp()
                    )
                    .map_err(io)?;
                }
            }
        }
    }
    w.flush().map_err(io)
}

pub fn write_comm(report: &RunReport, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| io_err(path)(e);
    writeln!(w, "{}", provenance(report.generator, report.config.seed)).map_err(io)?;
    writeln!(w, "replica,t,agent_i,agent_j").map_err(io)?;
    for rep in &report.replicas {
        for e in rep.trajectory.ledger().events() {
            writeln!(w, "{},{},{},{}", rep.replica, e.round, e.agent_i, e.agent_j).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

fn opt_round(r: Option<usize>) -> String {
    r.map_or_else(|| "none".to_string(), |t| t.to_string())
}

/// `key = value` lines. Rates use shortest round-trip formatting.
pub fn summary(report: &RunReport) -> Result<String> {
    let cfg = &report.config;
    let labels = report.labels();
    let mut s = String::new();
    let (ws, we) = rate_window(cfg.rounds);
    writeln!(s, "{}", provenance(report.generator, cfg.seed)).unwrap();
    writeln!(s, "agents = {}", cfg.agents).unwrap();
    writeln!(s, "states = {}", cfg.states).unwrap();
    writeln!(s, "true_state = {}", labels[cfg.true_state]).unwrap();
    writeln!(s, "tau = {:e}", report.tau).unwrap();
    writeln!(s, "rounds = {}", cfg.rounds).unwrap();
    writeln!(s, "replicas = {}", report.replicas.len()).unwrap();
    writeln!(s, "consensus_delta = {:e}", cfg.consensus_delta).unwrap();
    writeln!(s, "learned_replicas = {}", report.learned_count()).unwrap();
    for rep in &report.replicas {
        writeln!(
            s,
            "consensus_round[{}] = {}",
            rep.replica,
            opt_round(rep.trajectory.consensus_round())
        )
        .unwrap();
    }
    writeln!(s, "mean_communication_fraction = {}", report.mean_fraction()).unwrap();
    for (i, f) in report.agent_fractions().iter().enumerate() {
        writeln!(s, "communication_fraction[{i}] = {f}").unwrap();
    }
    writeln!(s, "rate_agent = {}", cfg.designated_agent).unwrap();
    writeln!(s, "rate_window = {ws}..{we}").unwrap();
    writeln!(s, "theoretical_rate_nats = {}", report.identifiability.asymptotic_rate).unwrap();
    writeln!(s, "estimated_rate_nats = {}", report.estimated_rate()?).unwrap();
    for (k, est) in report.estimated_divergence()?.iter().enumerate() {
        if let Some(est) = est {
            writeln!(
                s,
                "divergence_nats[{}] = theoretical {} estimated {}",
                labels[k], report.identifiability.network_divergence[k], est
            )
            .unwrap();
        }
    }
    Ok(s)
}

/// Parsed row of `beliefs.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefRow {
    pub replica: usize,
    pub round: usize,
    pub agent: usize,
    pub state_label: String,
    pub belief: f64,
}

pub fn read_beliefs(path: &Path) -> Result<Vec<BeliefRow>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    let bad = |line: usize, reason: String| HarnessError::Format {
        file: "beliefs.csv",
        line,
        reason,
    };
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let lineno = idx + 1;
        if line.starts_with('#') || line.starts_with("replica,") || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad(lineno, format!("expected 5 fields, found {}", fields.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|e| bad(lineno, format!("{s:?}: {e}")));
        out.push(BeliefRow {
            replica: int(fields[0])?,
            round: int(fields[1])?,
            agent: int(fields[2])?,
            state_label: fields[3].to_string(),
            belief: fields[4]
                .parse()
                .map_err(|e| bad(lineno, format!("{:?}: {e}", fields[4])))?,
        });
    }
    Ok(out)
}

/// Human-readable identifiability report, one table per field.
pub fn format_identifiability(report: &IdentifiabilityReport, labels: &[String], true_state: usize) -> String {
    let mut s = String::new();
    let n = report.kl.rows();
    writeln!(s, "true state: {}", labels[true_state]).unwrap();
    writeln!(s, "globally identifiable: {}", report.globally_identifiable).unwrap();
    writeln!(s, "asymptotic rate (nats/round): {}", report.asymptotic_rate).unwrap();
    writeln!(s).unwrap();
    writeln!(s, "network divergence I(k, true) (nats/round)").unwrap();
    writeln!(s, "{:<16} {:>24}", "state", "divergence_nats").unwrap();
    for (label, d) in labels.iter().zip(&report.network_divergence) {
        writeln!(s, "{label:<16} {d:>24.17e}").unwrap();
    }
    writeln!(s).unwrap();
    writeln!(s, "per-agent KL divergence D(l_i(.|true) || l_i(.|k)) (nats)").unwrap();
    write!(s, "{:<8}", "agent").unwrap();
    for label in labels {
        write!(s, " {label:>12}").unwrap();
    }
    writeln!(s).unwrap();
    for i in 0..n {
        write!(s, "{i:<8}").unwrap();
        for k in 0..labels.len() {
            write!(s, " {:>12.5e}", report.kl[(i, k)]).unwrap();
        }
        writeln!(s).unwrap();
    }
    writeln!(s).unwrap();
    writeln!(
        s,
        "observational equivalence classes (tolerance {EQUIVALENCE_TOLERANCE:e})"
    )
    .unwrap();
    for (i, classes) in report.equivalence_classes.iter().enumerate() {
        let parts: Vec<String> = classes
            .iter()
            .map(|c| {
                let names: Vec<&str> = c.iter().map(|&k| labels[k].as_str()).collect();
                format!("{{{}}}", names.join(", "))
            })
            .collect();
        writeln!(s, "agent {i}: {}", parts.join(" ")).unwrap();
    }
    s
}

/// `kl.csv`, `network_divergence.csv` and `equivalence.csv`.
pub fn write_identifiability(report: &IdentifiabilityReport, labels: &[String], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut kl = String::from("agent,state_label,kl_nats\n");
    for i in 0..report.kl.rows() {
        for (k, label) in labels.iter().enumerate() {
            writeln!(kl, "{i},{label},{}", report.kl[(i, k)]).unwrap();
        }
    }
    write_all(&dir.join("kl.csv"), &kl)?;

    let mut nd = String::from("state_label,divergence_nats_per_round\n");
    for (label, d) in labels.iter().zip(&report.network_divergence) {
        writeln!(nd, "{label},{d}").unwrap();
    }
    write_all(&dir.join("network_divergence.csv"), &nd)?;

    let mut eq = String::from("agent,class,state_label\n");
    for (i, classes) in report.equivalence_classes.iter().enumerate() {
        for (c, members) in classes.iter().enumerate() {
            for &k in members {
                writeln!(eq, "{i},{c},{}", labels[k]).unwrap();
            }
        }
    }
    write_all(&dir.join("equivalence.csv"), &eq)
}

/// Side-by-side text summary of a comparison.
pub fn comparison_text(cmp: &Comparison) -> String {
    let (sw, base) = (&cmp.switching, &cmp.baseline);
    let truth = sw.config.true_state;
    let mut s = String::new();
    writeln!(s, "{}", provenance(sw.generator, sw.config.seed)).unwrap();
    writeln!(s, "switching_tau = {:e}", sw.tau).unwrap();
    writeln!(s, "baseline_tau = {:e}", base.tau).unwrap();
    writeln!(s, "designated_agent = {}", sw.config.designated_agent).unwrap();
    writeln!(
        s,
        "learned_replicas switching = {} baseline = {}",
        sw.learned_count(),
        base.learned_count()
    )
    .unwrap();
    writeln!(
        s,
        "mean_communication_fraction switching = {} baseline = {}",
        sw.mean_fraction(),
        base.mean_fraction()
    )
    .unwrap();
    for (i, (a, b)) in sw.agent_fractions().iter().zip(base.agent_fractions()).enumerate() {
        writeln!(s, "communication_fraction[{i}] switching = {a} baseline = {b}").unwrap();
    }
    for (a, b) in sw.replicas.iter().zip(&base.replicas) {
        writeln!(
            s,
            "consensus_round[{}] switching = {} baseline = {}",
            a.replica,
            opt_round(a.trajectory.consensus_round()),
            opt_round(b.trajectory.consensus_round())
        )
        .unwrap();
    }
    for (a, b) in sw.replicas.iter().zip(&base.replicas) {
        let (fa, fb) = (a.trajectory.final_state(), b.trajectory.final_state());
        for i in 0..fa.agent_count() {
            writeln!(
                s,
                "final_true_belief[{}][{i}] switching = {:.16e} baseline = {:.16e}",
                a.replica,
                fa.belief(i, truth),
                fb.belief(i, truth)
            )
            .unwrap();
        }
    }
    s
}

/// `switching/`, `baseline/`, `comparison.txt` and `paired.csv` under `dir`.
pub fn write_comparison(cmp: &Comparison, dir: &Path, stride: usize) -> Result<()> {
    write_run(&cmp.switching, &dir.join("switching"), stride)?;
    write_run(&cmp.baseline, &dir.join("baseline"), stride)?;
    write_all(&dir.join("comparison.txt"), &comparison_text(cmp))?;
    let path = dir.join("paired.csv");
    let mut w = create(&path)?;
    let io = |e| io_err(&path)(e);
    writeln!(w, "{}", provenance(cmp.switching.generator, cmp.switching.config.seed)).map_err(io)?;
    writeln!(w, "replica,t,agent,switching_belief,baseline_belief").map_err(io)?;
    let agent = cmp.switching.config.designated_agent;
    for p in cmp.paired() {
        writeln!(
            w,
            "{},{},{agent},{:.16e},{:.16e}",
            p.replica, p.round, p.switching, p.baseline
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}
