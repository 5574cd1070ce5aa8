mod common;

use common::*;
use proptest::prelude::*;
use switchlearn_core::learning::{
    bayes_update, belief_from_potentials, initial_belief, is_informative, potential_update, tv_distance,
};
use switchlearn_core::linalg::exp_sum;
use switchlearn_core::protocol::{initialize, run_round};
use switchlearn_core::switching::build_switching_matrix;
use switchlearn_core::{LikelihoodModel, Matrix, Network, Prior, Threshold};

fn sized_network() -> impl Strategy<Value = (usize, Network)> {
    (1usize..=9).prop_flat_map(|n| (Just(n), network(n)))
}

fn three_rows() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..6).prop_flat_map(|m| (distribution(m), distribution(m), distribution(m)))
}

/// Model, network, prior and a signal stream of `rounds + 1` rows.
fn instance(rounds: usize) -> impl Strategy<Value = (LikelihoodModel, Network, Prior, Vec<Vec<usize>>)> {
    (1usize..=5, 2usize..=4).prop_flat_map(move |(n, m)| {
        (
            likelihood(n, m),
            network(n),
            distribution(m).prop_map(|p| Prior::from_probabilities(&p).unwrap()),
            // alphabets have at least 2 symbols
            prop::collection::vec(prop::collection::vec(0usize..2, n), rounds + 1),
        )
    })
}

proptest! {
    #[test]
    fn tv_is_a_metric((p, q, r) in three_rows()) {
        let (p, q, r) = (log_row(&p), log_row(&q), log_row(&r));
        let pq = tv_distance(&p, &q);
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!((pq - tv_distance(&q, &p)).abs() < 1e-15);
        prop_assert_eq!(tv_distance(&p, &p), 0.0);
        prop_assert!(pq <= tv_distance(&p, &r) + tv_distance(&r, &q) + 1e-15);
        let direct: f64 = p.iter().zip(&q).map(|(a, b)| (a.exp() - b.exp()).abs()).sum::<f64>() / 2.0;
        prop_assert!((pq - direct).abs() < 1e-15);
    }

    #[test]
    fn metropolis_weights_are_symmetric_doubly_stochastic((n, net) in sized_network()) {
        let p = net.weights();
        for i in 0..n {
            prop_assert!(p[(i, i)] > 0.0);
            let row: f64 = p.row(i).iter().sum();
            prop_assert!((row - 1.0).abs() < 1e-12);
            for j in 0..n {
                prop_assert_eq!(p[(i, j)], p[(j, i)]);
                prop_assert!(p[(i, j)] >= 0.0);
            }
        }
        prop_assert!(net.is_strongly_connected());
    }

    #[test]
    fn switching_support_grows_with_the_uninformative_set(
        (n, net) in sized_network(),
        flags in prop::collection::vec(any::<bool>(), 9),
        extra in prop::collection::vec(any::<bool>(), 9),
    ) {
        let small: Vec<bool> = flags[..n].to_vec();
        let large: Vec<bool> = small.iter().zip(&extra).map(|(a, b)| *a || *b).collect();
        let qs = build_switching_matrix(&net, &small, 1);
        let ql = build_switching_matrix(&net, &large, 1);
        let sl = ql.support();
        for pair in qs.support() {
            prop_assert!(sl.contains(&pair));
        }
        for q in [&qs, &ql] {
            let m = q.matrix();
            for i in 0..n {
                prop_assert!(m[(i, i)] > 0.0);
                let row: f64 = m.row(i).iter().sum();
                prop_assert!((row - 1.0).abs() < 1e-12);
                for j in 0..n {
                    prop_assert_eq!(m[(i, j)], m[(j, i)]);
                }
            }
        }
        // an edge is active exactly when one endpoint is uninformative
        for (i, j) in net.edges() {
            prop_assert_eq!(sl.contains(&(i, j)), large[i] || large[j]);
        }
    }

    #[test]
    fn bayes_updates_stay_normalized((lik, _, prior, signals) in instance(60)) {
        let mut belief = initial_belief(&prior, &lik, 0, signals[0][0]).unwrap();
        prop_assert!((exp_sum(&belief) - 1.0).abs() < 1e-12);
        for row in &signals[1..] {
            belief = bayes_update(&belief, &lik, 0, row[0]).unwrap();
            prop_assert!((exp_sum(&belief) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn round_verdicts_use_pre_round_beliefs(
        (lik, net, prior, signals) in instance(8),
        tau_exp in -12i32..=0,
    ) {
        let tau = Threshold::new(10f64.powi(tau_exp)).unwrap();
        let mut state = initialize(&prior, &lik, &signals[0]).unwrap();
        for row in &signals[1..] {
            let out = run_round(&state, &net, &lik, tau, row).unwrap();
            for (i, v) in out.verdicts.iter().enumerate() {
                let expect = is_informative(state.log_belief().row(i), &lik, i, row[i], tau).unwrap();
                prop_assert_eq!(*v, expect);
                prop_assert_eq!(out.switching.uninformative()[i], !v.informative);
                prop_assert!((exp_sum(out.state.log_belief().row(i)) - 1.0).abs() < 1e-10);
            }
            prop_assert_eq!(out.state.round(), state.round() + 1);
            state = out.state;
        }
    }

    #[test]
    fn identity_mixing_is_iterated_bayes((lik, _, prior, signals) in instance(40)) {
        let n = lik.agent_count();
        let state = initialize(&prior, &lik, &signals[0]).unwrap();
        let mut bayes: Vec<Vec<f64>> = (0..n)
            .map(|i| initial_belief(&prior, &lik, i, signals[0][i]).unwrap())
            .collect();
        let mut potentials = Matrix::zeros(n, lik.state_count());
        for row in &signals[1..] {
            potentials = potential_update(&potentials, &Matrix::identity(n), &lik, row).unwrap();
            let beliefs = belief_from_potentials(state.initial_log_belief(), &potentials).unwrap();
            for (i, b) in bayes.iter_mut().enumerate() {
                *b = bayes_update(b, &lik, i, row[i]).unwrap();
                for (k, expect) in b.iter().enumerate() {
                    prop_assert!((beliefs[(i, k)] - expect).abs() < 1e-10);
                }
            }
        }
    }
}
