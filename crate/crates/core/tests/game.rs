mod support;

use lcl_core::cc::{CcParams, CcPureStrategy, B, G, R};
use lcl_core::game::metric::outcome_metric;
use lcl_core::game::search::floored_uniform;
use lcl_core::game::{
    best_response, build_lcl_game, check_perfect_recall, check_round_coherence, check_well_rounded,
    equilibrium_gap, expected_payoff, induce_to_full, perturbed_equilibrium_search,
    realization_probability, strategy_metric_approx, BehaviorProfile, GameParams, LclGame,
    MarkovProfile, MarkovStrategy, NodeKind, PerturbationSpec, RoundModel, SearchMethod,
    SearchOutcome, TreeBuilder, DEFAULT_NODE_BUDGET,
};
use lcl_core::graph::{make_family, Family, Graph};
use lcl_core::lang::LclLanguage;
use lcl_core::pref::Preference;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cc_game(delta: f64, k: u32, horizon: usize) -> LclGame {
    let params = CcParams::new(delta, k).unwrap().game_params(horizon);
    build_lcl_game(&params, &[(make_family(&Family::K2).unwrap(), 1.0)], DEFAULT_NODE_BUDGET).unwrap()
}

fn game_on(lang: LclLanguage, pref: &str, graph: Graph, horizon: usize) -> LclGame {
    let params = GameParams {
        lang,
        pref: Preference::preset(pref, 0.5, 1).unwrap(),
        delta: 0.5,
        horizon,
    };
    build_lcl_game(&params, &[(graph, 1.0)], DEFAULT_NODE_BUDGET).unwrap()
}

fn mis_k2(horizon: usize) -> LclGame {
    game_on(LclLanguage::mis(), "mis", make_family(&Family::K2).unwrap(), horizon)
}

fn markov_pair(game: &LclGame, a: &CcPureStrategy, b: &CcPureStrategy) -> BehaviorProfile {
    let h = game.params.horizon;
    MarkovProfile {
        players: vec![a.to_markov(h), b.to_markov(h)],
    }
    .to_behavior(&game.tree)
}

#[test]
fn realization_examples() {
    let game = cc_game(0.5, 1, 2);
    let t = &game.tree;
    let uniform = BehaviorProfile::uniform(t);
    assert_eq!(realization_probability(t, &uniform, t.root()), 1.0);
    let gb = t.find(&[G, B]).unwrap();
    assert!((realization_probability(t, &uniform, gb) - 1.0 / 9.0).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = support::random_profile(t, &mut rng);
    let total: f64 = (0..3)
        .flat_map(|a| (0..3).map(move |b| [a, b]))
        .map(|h| realization_probability(t, &p, t.find(&h).unwrap()))
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
    for x in [gb, t.find(&[R, R, B]).unwrap()] {
        assert!((realization_probability(t, &p, x) - support::path_probability(t, &p, x)).abs() < 1e-15);
    }
}

#[test]
fn rounds_of_histories() {
    let game = cc_game(0.5, 1, 2);
    let t = &game.tree;
    assert_eq!(t.round_of(t.root()), 0);
    let x = t.find(&[G]).unwrap();
    assert_eq!((t.node(x).player(), t.round_of(x)), (Some(1), 0));
    let y = t.find(&[G, G, B]).unwrap();
    assert_eq!((t.node(y).player(), t.round_of(y)), (Some(1), 1));
}

#[test]
fn cc_payoffs_on_explicit_tree() {
    let game = cc_game(0.5, 1, 8);
    let s0 = CcPureStrategy::s(0);
    let r = expected_payoff(&game.tree, &markov_pair(&game, &s0, &s0), game.tail_bound());
    assert!((r.values[0] - 1.0).abs() <= r.tail_bound + 1e-9);
    assert!(r.horizon_mass > 0.0 && r.values[0] <= 1.0);
    let game = cc_game(0.5, 2, 8);
    let s2 = CcPureStrategy::s(2);
    let r = expected_payoff(&game.tree, &markov_pair(&game, &s2, &s0), game.tail_bound());
    assert!((r.values[0] - 0.25).abs() <= r.tail_bound + 1e-9);
}

#[test]
fn immediate_terminal_pays_exactly() {
    let mut b = TreeBuilder::new(1);
    let root = b.decision(None, 0, "only", 2).unwrap();
    b.terminal(Some((root, 0)), vec![0.37]).unwrap();
    b.terminal(Some((root, 1)), vec![0.0]).unwrap();
    let t = b.build().unwrap();
    let p = BehaviorProfile { local: vec![vec![1.0, 0.0]] };
    assert_eq!(expected_payoff(&t, &p, 0.0).values, vec![0.37]);
}

#[test]
fn lcl_games_are_well_structured() {
    let mut games: Vec<LclGame> = (0..=6).map(|t| cc_game(0.5, 2, t)).collect();
    games.extend((0..=6).map(mis_k2));
    games.push(game_on(LclLanguage::mis(), "mis", make_family(&Family::Path(3)).unwrap(), 3));
    games.push(game_on(LclLanguage::coloring(3).unwrap(), "unit", make_family(&Family::Path(3)).unwrap(), 2));
    for game in &games {
        check_well_rounded(&game.tree).unwrap();
        check_perfect_recall(&game.tree).unwrap();
        check_round_coherence(&game.tree).unwrap();
        for u in &game.tree.info_sets {
            assert!(u.round <= game.params.horizon);
        }
    }
}

#[test]
fn chance_over_graphs() {
    let params = GameParams {
        lang: LclLanguage::mis(),
        pref: Preference::preset("mis", 0.5, 1).unwrap(),
        delta: 0.5,
        horizon: 1,
    };
    let graphs = vec![
        (make_family(&Family::Path(3)).unwrap(), 0.25),
        (make_family(&Family::Complete(3)).unwrap(), 0.75),
    ];
    let game = build_lcl_game(&params, &graphs, DEFAULT_NODE_BUDGET).unwrap();
    assert!(matches!(game.tree.node(0).kind, NodeKind::Chance { .. }));
    check_well_rounded(&game.tree).unwrap();
    check_perfect_recall(&game.tree).unwrap();
    check_round_coherence(&game.tree).unwrap();
    let u = BehaviorProfile::uniform(&game.tree);
    let total: f64 = game.tree.node(0).children.iter().map(|&c| realization_probability(&game.tree, &u, c)).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn best_response_matches_pure_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut games: Vec<LclGame> = (0..=3).map(|t| cc_game(0.5, 2, t)).collect();
    games.extend((0..=5).map(mis_k2));
    games.push(game_on(LclLanguage::mis(), "mis", make_family(&Family::Path(3)).unwrap(), 1));
    for game in games {
        let t = &game.tree;
        assert!(t.info_sets.len() <= 200, "{}", t.info_sets.len());
        for _ in 0..3 {
            let profile = support::random_profile(t, &mut rng);
            for player in 0..t.players {
                let br = best_response(t, player, &profile, None).unwrap();
                let oracle = support::best_pure_value(t, &profile, player);
                assert!((br.value - oracle).abs() < 1e-12, "{} vs {}", br.value, oracle);
                let replay = expected_payoff(t, &br.profile, 0.0).values[player];
                assert!((replay - br.value).abs() < 1e-12);
                let zero = PerturbationSpec::uniform(0.0, 3).unwrap();
                let pbr = best_response(t, player, &profile, Some(&zero)).unwrap();
                assert_eq!(pbr.profile, br.profile);
            }
        }
    }
}

#[test]
fn round_model_matches_explicit_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for horizon in 0..=6 {
        for (delta, k) in [(0.5, 2), (0.9, 1), (0.3, 3)] {
            let cc = CcParams::new(delta, k).unwrap();
            let game = cc_game(delta, k, horizon);
            let model = cc.model(horizon).unwrap();
            let profile = MarkovProfile {
                players: (0..2)
                    .map(|_| MarkovStrategy::per_round((0..=horizon).map(|_| support::random_simplex(3, &mut rng)).collect()))
                    .collect(),
            };
            let explicit = expected_payoff(&game.tree, &profile.to_behavior(&game.tree), game.tail_bound());
            let merged = model.expected_payoff(&profile).unwrap();
            for p in 0..2 {
                assert!((explicit.values[p] - merged.values[p]).abs() < 1e-12);
            }
            assert!((explicit.horizon_mass - merged.horizon_mass).abs() < 1e-12);
            if horizon <= 4 {
                let spec = PerturbationSpec::uniform(0.05, 3).unwrap();
                for s in [None, Some(&spec)] {
                    for p in 0..2 {
                        let a = best_response(&game.tree, p, &profile.to_behavior(&game.tree), s).unwrap().value;
                        let b = model.best_response(p, &profile, s).unwrap().value;
                        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
                    }
                }
            }
        }
    }
}

#[test]
fn mis_round_model_matches_explicit_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for horizon in 0..=5 {
        let game = mis_k2(horizon);
        let model = RoundModel::new(game.params.clone(), make_family(&Family::K2).unwrap()).unwrap();
        let profile = MarkovProfile {
            players: (0..2)
                .map(|_| MarkovStrategy::per_round((0..=horizon).map(|_| support::random_simplex(2, &mut rng)).collect()))
                .collect(),
        };
        let explicit = expected_payoff(&game.tree, &profile.to_behavior(&game.tree), 0.0);
        let merged = model.expected_payoff(&profile).unwrap();
        for p in 0..2 {
            assert!((explicit.values[p] - merged.values[p]).abs() < 1e-12);
        }
    }
}

#[test]
fn outcome_metric_axioms_and_oracle() {
    let game = cc_game(0.5, 1, 3);
    let t = &game.tree;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let a = support::random_profile(t, &mut rng);
        let b = support::random_profile(t, &mut rng);
        let c = support::random_profile(t, &mut rng);
        let d = |x: &BehaviorProfile, y: &BehaviorProfile| outcome_metric(t, x, y, 3).value;
        assert_eq!(d(&a, &a), 0.0);
        assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-15);
        assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-15);
        let oracle = (0..t.len())
            .map(|x| 0.5f64.powi(t.round_of(x) as i32) * (support::path_probability(t, &a, x) - support::path_probability(t, &b, x)).abs())
            .fold(0.0, f64::max);
        assert!((d(&a, &b) - oracle).abs() < 1e-15);
    }
}

#[test]
fn metric_of_a_single_round_three_change() {
    let game = cc_game(0.5, 1, 4);
    let t = &game.tree;
    let base = BehaviorProfile::uniform(t);
    let u = t
        .info_sets
        .iter()
        .position(|s| s.round == 3 && s.player == 0)
        .unwrap();
    let mut changed = base.clone();
    changed.local[u] = vec![0.6, 0.2, 0.2];
    let m = outcome_metric(t, &base, &changed, 4);
    // the largest difference sits just below the changed set
    let reach = support::path_probability(t, &base, t.info_sets[u].nodes[0]);
    let expected = 0.125 * reach * (0.6 - 1.0 / 3.0);
    assert!((m.value - expected).abs() < 1e-15, "{} vs {}", m.value, expected);
    assert!(m.value <= 0.125 * reach * 0.4);
    assert_eq!(m.error_bound, 1.0 / 16.0);
    let approx = strategy_metric_approx(t, &base, &changed, 4, 100_000).unwrap();
    assert!(approx.value >= m.value);
}

#[test]
fn inducing_profiles() {
    let short = cc_game(0.5, 2, 0);
    let long = cc_game(0.5, 2, 2);
    let u = BehaviorProfile::uniform(&short.tree);
    assert_eq!(induce_to_full(&short.tree, &u, &long.tree), BehaviorProfile::uniform(&long.tree));
    let s2 = markov_pair(&short, &CcPureStrategy::s(2), &CcPureStrategy::s(2));
    let induced = induce_to_full(&short.tree, &s2, &long.tree);
    for (set, p) in long.tree.info_sets.iter().zip(&induced.local) {
        if set.round == 0 {
            assert_eq!(p, &vec![0.0, 1.0, 0.0]);
        } else {
            assert_eq!(p, &vec![1.0 / 3.0; 3]);
        }
    }
}

#[test]
fn tail_bound_soundness_against_shorter_truncation() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let long = cc_game(0.5, 1, 6);
    for short_h in [1, 2, 4] {
        let short = cc_game(0.5, 1, short_h);
        for _ in 0..20 {
            let p = support::random_profile(&short.tree, &mut rng);
            let induced = induce_to_full(&short.tree, &p, &long.tree);
            let a = expected_payoff(&short.tree, &p, short.tail_bound()).values;
            let b = expected_payoff(&long.tree, &induced, long.tail_bound()).values;
            for i in 0..2 {
                assert!((a[i] - b[i]).abs() <= short.tail_bound() + 1e-12);
            }
        }
    }
}

#[test]
fn gaps_on_the_cc_game() {
    let cc = CcParams::new(0.5, 2).unwrap();
    let model = cc.model(24).unwrap();
    let sk = CcPureStrategy::s(2).to_markov(24);
    let s0 = CcPureStrategy::s(0).to_markov(24);
    let nash = model
        .equilibrium_gap(&MarkovProfile { players: vec![sk.clone(), sk.clone()] }, None)
        .unwrap();
    assert!(nash.max_gap() <= nash.tail_bound + 1e-9);
    let off = model
        .equilibrium_gap(&MarkovProfile { players: vec![sk, s0.clone()] }, None)
        .unwrap();
    assert!((off.gaps[0] - 0.75).abs() <= 2.0 * off.tail_bound + 1e-9);
    let br = model.best_response(1, &MarkovProfile { players: vec![s0.clone(), s0.clone()] }, None).unwrap();
    assert!((br.value - 1.0).abs() <= cc.tail(24) + 1e-9);

    // the explicit engine agrees on a short horizon
    let game = cc_game(0.5, 2, 5);
    let profile = markov_pair(&game, &CcPureStrategy::s(2), &CcPureStrategy::s(2));
    let gap = equilibrium_gap(&game.tree, &profile, None, game.tail_bound()).unwrap();
    assert!(gap.max_gap() <= gap.tail_bound + 1e-9);
    let again = equilibrium_gap(&game.tree, &profile, None, game.tail_bound()).unwrap();
    assert_eq!(gap, again);
}

#[test]
fn perturbed_search_pins_red_to_floor() {
    let cc = CcParams::new(0.5, 2).unwrap();
    let model = cc.model(24).unwrap();
    for eta in [0.2, 0.05] {
        let spec = PerturbationSpec::uniform(eta, 3).unwrap();
        for method in [
            SearchMethod::IteratedBestResponse { damping: 1.0 },
            SearchMethod::SymmetricGrid { resolution: 20 },
        ] {
            let out = perturbed_equilibrium_search(&model, &spec, &method, 1000, 1e-9).unwrap();
            let SearchOutcome::Converged { profile, gap, .. } = out else {
                panic!("no convergence for {method:?}");
            };
            assert!(gap.max_gap() <= 1e-9);
            assert!(profile.respects(&spec));
            for p in &profile.players {
                assert!((p.distribution(0, "__", &[G, R, B])[1] - eta).abs() < 1e-12);
            }
        }
    }
    assert!(PerturbationSpec::uniform(0.4, 3).is_err());
    let spec = PerturbationSpec::uniform(0.1, 3).unwrap();
    assert!((floored_uniform(&spec, 3).iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn search_failure_reports_trajectory() {
    let cc = CcParams::new(0.5, 2).unwrap();
    let model = cc.model(10).unwrap();
    let spec = PerturbationSpec::uniform(0.1, 3).unwrap();
    // an odd grid cannot hit the symmetric G/B split exactly
    let out = perturbed_equilibrium_search(&model, &spec, &SearchMethod::SymmetricGrid { resolution: 3 }, 1000, 1e-12).unwrap();
    match out {
        SearchOutcome::Failed { trajectory, .. } => assert_eq!(trajectory.len(), 10),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn profiles_round_trip_through_keys() {
    let game = cc_game(0.5, 1, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = support::random_profile(&game.tree, &mut rng);
    let keyed = p.to_keyed(&game.tree);
    let json = serde_json::to_string(&keyed).unwrap();
    let back = BehaviorProfile::from_keyed(&game.tree, &serde_json::from_str(&json).unwrap()).unwrap();
    assert_eq!(p, back);
    let mut bad = keyed.clone();
    let first = bad.keys().next().unwrap().clone();
    bad.insert(first, vec![rng.gen(), 5.0, 0.0]);
    assert!(BehaviorProfile::from_keyed(&game.tree, &bad).is_err());
}

#[test]
fn round_model_needs_full_view() {
    let params = GameParams {
        lang: LclLanguage::mis(),
        pref: Preference::preset("mis", 0.5, 1).unwrap(),
        delta: 0.5,
        horizon: 2,
    };
    let model = RoundModel::new(params, make_family(&Family::Path(4)).unwrap()).unwrap();
    let profile = MarkovProfile::symmetric(MarkovStrategy::stationary(vec![0.5, 0.5]), 4);
    assert!(model.expected_payoff(&profile).is_ok());
    assert!(matches!(
        model.best_response(0, &profile, None),
        Err(lcl_core::game::GameError::NotFullyObservable(0))
    ));
}
