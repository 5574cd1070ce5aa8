#![allow(dead_code)]

use proptest::prelude::*;
use switchlearn_core::{LikelihoodModel, Network};

/// A probability vector of length `len` with entries bounded away from zero.
pub fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, len).prop_map(|w| {
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    })
}

/// `tables[i][s][k]` for `n` agents, `m` states and alphabets of size 2 or 3.
pub fn likelihood_tables(n: usize, m: usize) -> impl Strategy<Value = Vec<Vec<Vec<f64>>>> {
    prop::collection::vec(
        (2usize..=3).prop_flat_map(move |a| prop::collection::vec(distribution(a), m)),
        n,
    )
    .prop_map(|agents| {
        // columns were drawn per state; transpose to [signal][state]
        agents
            .into_iter()
            .map(|cols| {
                let a = cols[0].len();
                (0..a).map(|s| cols.iter().map(|c| c[s]).collect()).collect()
            })
            .collect()
    })
}

pub fn likelihood(n: usize, m: usize) -> impl Strategy<Value = LikelihoodModel> {
    likelihood_tables(n, m).prop_map(|t| LikelihoodModel::from_probabilities(&t).unwrap())
}

/// A connected graph on `n` nodes: a random spanning tree plus extra edges.
pub fn connected_edges(n: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    let tree = (1..n).map(|v| (0..v).prop_map(move |u| (u, v))).collect::<Vec<_>>();
    let extra = prop::collection::vec((0..n.max(1), 0..n.max(1)), 0..=n * 2);
    (tree, extra).prop_map(|(mut edges, extra)| {
        edges.extend(extra.into_iter().filter(|(a, b)| a != b));
        edges
    })
}

pub fn network(n: usize) -> impl Strategy<Value = Network> {
    connected_edges(n).prop_map(move |e| Network::metropolis(n, &e).unwrap())
}

pub fn log_row(p: &[f64]) -> Vec<f64> {
    p.iter().map(|x| x.ln()).collect()
}
