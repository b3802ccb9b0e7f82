mod support;

use std::sync::Arc;

use lcl_core::graph::{ball, make_family, parse_graph, BallView, Family, Graph, Labeling};
use lcl_core::lang::{check_greedy_constructible, GreedyOutcome, LclLanguage};
use lcl_core::sim::{builtin_strategy, run, SharedStrategy};
use lcl_core::Action;
use proptest::prelude::*;

fn random_graph(n: usize, seed: u64) -> Graph {
    make_family(&Family::RandomBounded { n, delta: 3, seed }).unwrap()
}

proptest! {
    #[test]
    fn ball_is_bfs_ball(n in 2usize..14, seed in any::<u64>(), t in 0usize..4, v_frac in 0.0f64..1.0) {
        let g = random_graph(n, seed);
        let v = ((n as f64) * v_frac) as usize % n;
        let b = ball(&g, &Labeling::undecided(n), v, t);
        let got: Vec<usize> = b.vertices().to_vec();
        let want: Vec<usize> = support::bfs_ball(&g, v, t).into_iter().collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn ball_ignores_far_labels(n in 3usize..14, seed in any::<u64>(), labels in prop::collection::vec(prop::option::of(0u8..3), 14), noise in prop::collection::vec(prop::option::of(0u8..3), 14)) {
        let g = random_graph(n, seed);
        let base = Labeling(labels[..n].to_vec());
        let inside = support::bfs_ball(&g, 0, 1);
        let mutated = Labeling((0..n).map(|w| if inside.contains(&w) { base.0[w] } else { noise[w] }).collect());
        prop_assert_eq!(ball(&g, &base, 0, 1).labels, ball(&g, &mutated, 0, 1).labels);
    }

    #[test]
    fn render_round_trips(n in 2usize..14, seed in any::<u64>()) {
        let g = random_graph(n, seed);
        let back = parse_graph(&g.render()).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
        prop_assert_eq!(back.n(), g.n());
    }

    #[test]
    fn partial_goodness_survives_unerasing(labels in prop::collection::vec(prop::option::of(0u8..3), 3), pick in 0usize..3) {
        let g = make_family(&Family::Complete(3)).unwrap();
        let lang = LclLanguage::coloring(3).unwrap();
        let b = ball(&g, &Labeling(labels.clone()), 0, 1);
        if lang.is_partially_good(&b.view()) {
            let holes: Vec<usize> = (0..3).filter(|&i| labels[i].is_none()).collect();
            if !holes.is_empty() {
                // a good completion by brute force
                let completion = (0..27u32).map(|code| {
                    let mut l = labels.clone();
                    for (k, &h) in holes.iter().enumerate() {
                        l[h] = Some(((code / 3u32.pow(k as u32)) % 3) as Action);
                    }
                    l
                }).find(|l| lang.is_good(&ball(&g, &Labeling(l.clone()), 0, 1).view()).unwrap()).unwrap();
                let h = holes[pick % holes.len()];
                let mut filled = labels.clone();
                filled[h] = completion[h];
                prop_assert!(lang.is_partially_good(&ball(&g, &Labeling(filled), 0, 1).view()));
            }
        }
    }
}

fn good_on(lang: &LclLanguage, g: &Graph, labels: &[Action]) -> bool {
    let l = Labeling(labels.iter().map(|&a| Some(a)).collect());
    lang.is_good(&ball(g, &l, 0, 1).view()).unwrap()
}

#[test]
fn mis_truth_tables() {
    let mis = LclLanguage::mis();
    let k2 = make_family(&Family::K2).unwrap();
    let good_k2 = [[1, 0], [0, 1]];
    for c in 0..2 {
        for n in 0..2 {
            assert_eq!(good_on(&mis, &k2, &[c, n]), good_k2.contains(&[c, n]), "{c}{n}");
        }
    }
    let tri = make_family(&Family::Complete(3)).unwrap();
    let good_tri = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 1, 1]];
    for code in 0..8u8 {
        let l = [code & 1, (code >> 1) & 1, (code >> 2) & 1];
        assert_eq!(good_on(&mis, &tri, &l), good_tri.contains(&l), "{l:?}");
    }
}

#[test]
fn coloring_truth_tables() {
    let c3 = LclLanguage::coloring(3).unwrap();
    let k2 = make_family(&Family::K2).unwrap();
    for c in 0..3 {
        for n in 0..3 {
            assert_eq!(good_on(&c3, &k2, &[c, n]), c != n);
        }
    }
    let tri = make_family(&Family::Complete(3)).unwrap();
    let mut good = 0;
    for code in 0..27u8 {
        let l = [code % 3, (code / 3) % 3, code / 9];
        let expect = l[0] != l[1] && l[0] != l[2];
        assert_eq!(good_on(&c3, &tri, &l), expect);
        good += usize::from(expect);
    }
    assert_eq!(good, 12);
}

#[test]
fn mis_partial_on_triangle() {
    let mis = LclLanguage::mis();
    let tri = make_family(&Family::Complete(3)).unwrap();
    let b = ball(&tri, &Labeling(vec![Some(0), Some(0), None]), 0, 1);
    let view: BallView<'_> = b.view();
    assert!(mis.is_partially_good(&view));
}

#[test]
fn greedy_languages_never_get_stuck() {
    let cases: Vec<(LclLanguage, Graph, &str)> = vec![
        (LclLanguage::coloring(3).unwrap(), make_family(&Family::Complete(3)).unwrap(), "uniform"),
        (LclLanguage::coloring(3).unwrap(), make_family(&Family::Cycle(4)).unwrap(), "be_coloring"),
        (LclLanguage::mis(), make_family(&Family::K2).unwrap(), "luby"),
        (LclLanguage::mis(), make_family(&Family::Path(3)).unwrap(), "uniform"),
    ];
    for (lang, g, strat) in cases {
        assert!(matches!(
            check_greedy_constructible(&lang, &g, 1 << 20).unwrap(),
            GreedyOutcome::Ok { .. }
        ));
        let s: SharedStrategy = builtin_strategy(strat, &lang).unwrap();
        let strategies: Vec<SharedStrategy> = (0..g.n()).map(|_| Arc::clone(&s)).collect();
        for seed in 0..500 {
            let res = run(&g, &lang, &strategies, seed, 200).expect("compatible actions exist");
            assert!(res.terminated);
        }
    }
}

#[test]
fn greedy_witness_for_two_coloring_cycle() {
    let lang = LclLanguage::coloring(2).unwrap();
    let g = make_family(&Family::Cycle(4)).unwrap();
    let GreedyOutcome::Witness(w) = check_greedy_constructible(&lang, &g, 1 << 20).unwrap() else {
        panic!("expected a witness");
    };
    assert!(w.replay(&lang, &g));
    assert!(w.partial.iter().any(Option::is_none));
}
