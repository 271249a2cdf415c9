mod common;

use apsched::dynamics::{QueueMatrix, RewardWeights, SystemState};
use apsched::mdp::{
    compute_gap, exact_value_iteration, initial_expectation, plan_schedule, ApproxSolver,
    MdpConfig, MemoKind, PlanMode, StateSpace, DEFAULT_STATE_CAP,
};
use apsched::policies::PolicyKind;
use apsched::scenario::Scenario;
use apsched::stochastics::{derive_seed, ArrivalLaw, ChannelChain, RunStreams};
use apsched::topology::{
    enumerate_transmission_sets, is_independent, ConflictGraph, Topology, TransmissionSet,
    TransmissionSetMatrix,
};
use apsched::harness::median;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{best_open_loop, close, deterministic_scenario, path_scenario, two_ap_scenario, Expectimax};

fn cfg(horizon: usize, discount: f64, weights: RewardWeights) -> MdpConfig {
    MdpConfig {
        horizon,
        discount,
        samples: 1,
        depth: horizon.max(1),
        weights,
    }
}

fn as_bits(actions: &TransmissionSetMatrix) -> Vec<Vec<bool>> {
    actions
        .iter()
        .map(|s| s.bits().iter().map(|&b| b == 1).collect())
        .collect()
}

#[test]
fn exact_matches_expectimax_on_small_models() {
    let models = [
        ("two aps", two_ap_scenario(5)),
        ("path", path_scenario(1, false)),
        ("path slot fill", path_scenario(1, true)),
    ];
    let weights = RewardWeights::default();
    for (name, sc) in &models {
        let actions = enumerate_transmission_sets(sc.topology.graph());
        assert!(actions.len() <= 2);
        let space = StateSpace::new(sc, DEFAULT_STATE_CAP).unwrap();
        for kind in PolicyKind::ALL {
            for discount in [1.0, 0.9] {
                let table =
                    exact_value_iteration(sc, &space, &actions, &cfg(4, discount, weights), kind)
                        .unwrap();
                let mut oracle = Expectimax::new(sc, as_bits(&actions), kind, weights, discount);
                for idx in 0..space.len() {
                    let state = space.state(idx);
                    for k in 1..=4 {
                        let want = oracle.value(&state, k);
                        let got = table.values_to_go(k)[idx];
                        assert!(
                            close(got, want, 1e-9),
                            "{name} {kind} discount {discount} state {idx} k {k}: {got} vs {want}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn exact_matches_best_action_sequence_without_randomness() {
    let sc = deterministic_scenario(&[1, 0, 2], 4);
    let actions = enumerate_transmission_sets(sc.topology.graph());
    assert_eq!(actions.len(), 2);
    let space = StateSpace::new(&sc, DEFAULT_STATE_CAP).unwrap();
    let weights = RewardWeights::new(1.0, 0.02).unwrap();
    for kind in [PolicyKind::MaxWeight, PolicyKind::MaxQueue, PolicyKind::MaxCsi] {
        for discount in [1.0, 0.8] {
            for t in 1..=4 {
                let table =
                    exact_value_iteration(&sc, &space, &actions, &cfg(t, discount, weights), kind)
                        .unwrap();
                for queues in [[0, 0, 0], [4, 1, 0], [2, 3, 4], [1, 1, 1]] {
                    let start = SystemState {
                        queues: QueueMatrix(queues.to_vec()),
                        ..sc.empty_state()
                    };
                    let want = best_open_loop(
                        &sc,
                        &as_bits(&actions),
                        kind,
                        weights,
                        discount,
                        &start,
                        t,
                    );
                    let got = table.value(0, space.index(&start));
                    assert!(close(got, want, 1e-9), "{kind} T={t} {queues:?}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn zero_discount_is_myopic_at_every_stage() {
    let sc = two_ap_scenario(3);
    let actions = enumerate_transmission_sets(sc.topology.graph());
    let space = StateSpace::new(&sc, DEFAULT_STATE_CAP).unwrap();
    let w = RewardWeights::default();
    for kind in PolicyKind::ALL {
        let table = exact_value_iteration(&sc, &space, &actions, &cfg(3, 0.0, w), kind).unwrap();
        let mut oracle = Expectimax::new(&sc, as_bits(&actions), kind, w, 0.0);
        for idx in 0..space.len() {
            let myopic = oracle.value(&space.state(idx), 1);
            for stage in 0..3 {
                assert!(close(table.value(stage, idx), myopic, 1e-12));
            }
        }
    }
}

#[test]
fn values_never_decrease_with_heavier_weights() {
    let sc = path_scenario(1, false);
    let actions = enumerate_transmission_sets(sc.topology.graph());
    let space = StateSpace::new(&sc, DEFAULT_STATE_CAP).unwrap();
    let light = RewardWeights::new(1.0, 0.01).unwrap();
    let heavy = RewardWeights::new(1.5, 0.02).unwrap();
    for kind in PolicyKind::ALL {
        let a = exact_value_iteration(&sc, &space, &actions, &cfg(3, 1.0, light), kind).unwrap();
        let b = exact_value_iteration(&sc, &space, &actions, &cfg(3, 1.0, heavy), kind).unwrap();
        for stage in 0..3 {
            for (x, y) in a.stage_values(stage).iter().zip(b.stage_values(stage)) {
                assert!(y + 1e-12 >= *x);
            }
        }
    }
}

#[test]
fn stored_actions_are_independent_and_attain_the_value() {
    let sc = path_scenario(1, true);
    let actions = enumerate_transmission_sets(sc.topology.graph());
    let space = StateSpace::new(&sc, DEFAULT_STATE_CAP).unwrap();
    let w = RewardWeights::default();
    for kind in PolicyKind::ALL {
        let table = exact_value_iteration(&sc, &space, &actions, &cfg(3, 1.0, w), kind).unwrap();
        let mut oracle = Expectimax::new(&sc, as_bits(&actions), kind, w, 1.0);
        for idx in 0..space.len() {
            let state = space.state(idx);
            for stage in 0..3 {
                let a = table.best_action(stage, idx);
                assert!(is_independent(sc.topology.graph(), actions.get(a)));
                let q = oracle.q_value(&state, a, 3 - stage);
                assert!(close(q, table.value(stage, idx), 1e-9));
            }
        }
    }
}

#[test]
fn sampled_recursion_is_exact_without_randomness() {
    let sc = deterministic_scenario(&[2, 1, 0], 3);
    let actions = enumerate_transmission_sets(sc.topology.graph());
    let space = StateSpace::new(&sc, DEFAULT_STATE_CAP).unwrap();
    let w = RewardWeights::default();
    for kind in [PolicyKind::MaxWeight, PolicyKind::MaxCsi] {
        let table = exact_value_iteration(&sc, &space, &actions, &cfg(4, 1.0, w), kind).unwrap();
        for samples in [1, 7] {
            let c = MdpConfig {
                samples,
                ..cfg(4, 1.0, w)
            };
            let mut solver = ApproxSolver::new(&sc, &actions, &c, kind).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for idx in (0..space.len()).step_by(7) {
                let state = space.state(idx);
                let (v, _) = solver.evaluate(&state, 4, &mut rng).unwrap();
                assert!(close(v, table.value(0, idx), 1e-12));
            }
        }
    }
}

#[test]
fn dense_and_sparse_memo_agree() {
    let sc = two_ap_scenario(2);
    let actions = enumerate_transmission_sets(sc.topology.graph());
    let c = MdpConfig {
        samples: 20,
        ..cfg(3, 1.0, RewardWeights::default())
    };
    for kind in PolicyKind::ALL {
        let mut dense = ApproxSolver::with_memo(&sc, &actions, &c, kind, MemoKind::Dense).unwrap();
        let mut sparse = ApproxSolver::with_memo(&sc, &actions, &c, kind, MemoKind::Sparse).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(11);
        let mut r2 = ChaCha8Rng::seed_from_u64(11);
        for start in sc.initial_states() {
            let a = dense.evaluate(&start, 3, &mut r1).unwrap();
            let b = sparse.evaluate(&start, 3, &mut r2).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn median_gap_shrinks_with_more_samples() {
    let sc = Scenario::small_exact();
    let actions = enumerate_transmission_sets(sc.topology.graph());
    let space = StateSpace::new(&sc, DEFAULT_STATE_CAP).unwrap();
    let base = cfg(2, 1.0, RewardWeights::default());
    let kind = PolicyKind::MaxWeight;
    let table = exact_value_iteration(&sc, &space, &actions, &base, kind).unwrap();
    let exact = initial_expectation(&sc, &space, table.values_to_go(2));
    let starts = sc.initial_states();

    let mut medians = Vec::new();
    for samples in [10, 100, 1000] {
        let c = MdpConfig { samples, ..base };
        let gaps: Vec<f64> = (0..20)
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(3, s));
                let mut solver = ApproxSolver::new(&sc, &actions, &c, kind).unwrap();
                let mean = starts
                    .iter()
                    .map(|y| solver.evaluate(y, 2, &mut rng).unwrap().0)
                    .sum::<f64>()
                    / starts.len() as f64;
                compute_gap(exact, mean).unwrap()
            })
            .collect();
        medians.push(median(&gaps).unwrap());
    }
    assert!(
        medians.windows(2).all(|w| w[1] <= w[0]),
        "medians {medians:?}"
    );
}

#[test]
fn single_action_schedule_repeats_it() {
    let topo =
        Topology::from_counts(ConflictGraph::edgeless(2).unwrap(), &[1, 1], &[1, 0]).unwrap();
    let sc = Scenario::homogeneous(
        topo,
        ChannelChain::uniform(vec![1.0, 2.0]).unwrap(),
        ChannelChain::uniform(vec![10.0]).unwrap(),
        ArrivalLaw::bernoulli(0.5, 1).unwrap(),
        Some(2),
    )
    .unwrap();
    let actions = enumerate_transmission_sets(sc.topology.graph());
    assert_eq!(actions.len(), 1);
    let c = cfg(5, 1.0, RewardWeights::default());
    let mut streams = RunStreams::from_seed(9);
    let start = sc.initial_state(&mut streams.channels);
    let s = plan_schedule(
        &sc,
        &actions,
        &start,
        &c,
        PolicyKind::MaxWeight,
        PlanMode::Approximate,
        &mut streams,
    )
    .unwrap();
    assert_eq!(s.sets, vec![TransmissionSet::from_bits(&[1, 1]); 5]);
}

#[test]
fn energy_only_reward_keeps_the_charging_ap_on() {
    let sc = path_scenario(2, true);
    let actions = enumerate_transmission_sets(sc.topology.graph());
    let w = RewardWeights::new(0.0, 0.01).unwrap();
    // verify the premise: the middle AP's set earns more in every state
    let space = StateSpace::new(&sc, DEFAULT_STATE_CAP).unwrap();
    let middle = actions
        .iter()
        .position(|s| *s == TransmissionSet::from_bits(&[0, 1, 0]))
        .unwrap();
    let mut oracle = Expectimax::new(&sc, as_bits(&actions), PolicyKind::MaxWeight, w, 1.0);
    for idx in 0..space.len() {
        let state = space.state(idx);
        let q_mid = oracle.q_value(&state, middle, 1);
        let q_out = oracle.q_value(&state, 1 - middle, 1);
        assert!(q_mid > q_out);
    }

    let c = cfg(6, 1.0, w);
    let table = exact_value_iteration(&sc, &space, &actions, &c, PolicyKind::MaxWeight).unwrap();
    for mode in ["exact", "approx"] {
        let mut streams = RunStreams::from_seed(4);
        let start = sc.initial_state(&mut streams.channels);
        let plan_mode = if mode == "exact" {
            PlanMode::Exact {
                table: &table,
                space: &space,
            }
        } else {
            PlanMode::Approximate
        };
        let c = MdpConfig {
            depth: 1,
            ..c
        };
        let s = plan_schedule(&sc, &actions, &start, &c, PolicyKind::MaxWeight, plan_mode, &mut streams)
            .unwrap();
        assert!(
            s.sets.iter().all(|x| *x == TransmissionSet::from_bits(&[0, 1, 0])),
            "{mode}"
        );
    }
}

#[test]
fn schedule_reward_matches_recorded_trajectory() {
    let sc = Scenario::small_exact();
    let actions = enumerate_transmission_sets(sc.topology.graph());
    let space = StateSpace::new(&sc, DEFAULT_STATE_CAP).unwrap();
    let c = cfg(4, 1.0, RewardWeights::default());
    let table = exact_value_iteration(&sc, &space, &actions, &c, PolicyKind::Random).unwrap();
    let mut streams = RunStreams::from_seed(2);
    let start = sc.initial_state(&mut streams.channels);
    let s = plan_schedule(
        &sc,
        &actions,
        &start,
        &c,
        PolicyKind::Random,
        PlanMode::Exact {
            table: &table,
            space: &space,
        },
        &mut streams,
    )
    .unwrap();
    assert_eq!(s.sets.len(), 4);
    assert_eq!(s.states[0], start);
    assert!((s.rewards.iter().sum::<f64>() - s.total_reward).abs() < 1e-12);
    for (t, state) in s.states.iter().enumerate() {
        assert_eq!(s.actions[t], table.best_action(t, space.index(state)));
    }
}

#[test]
fn max_weight_beats_random_in_expectation() {
    let sc = Scenario::small_exact();
    let actions = enumerate_transmission_sets(sc.topology.graph());
    let space = StateSpace::new(&sc, DEFAULT_STATE_CAP).unwrap();
    let c = cfg(6, 1.0, RewardWeights::default());
    let value = |kind| {
        let t = exact_value_iteration(&sc, &space, &actions, &c, kind).unwrap();
        initial_expectation(&sc, &space, t.values_to_go(6))
    };
    assert!(value(PolicyKind::MaxWeight) > value(PolicyKind::Random));
}
