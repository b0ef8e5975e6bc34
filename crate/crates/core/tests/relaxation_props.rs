mod common;

use common::oracle::{bounded_relaxed, relaxed_step, Naive};
use common::tasks::{random_task, walk_states, Shape};
use common::{lnf_of, oracle::lift_state};
use lnfplan::model::{ActionId, GroundTask};
use lnfplan::relaxation::{decide_restricted, decide_strong, relaxed_apply, Verdict};
use lnfplan::rpg::{build_graph, GraphVerdict};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph_verdict(v: GraphVerdict) -> Option<Verdict> {
    match v {
        GraphVerdict::Reached => Some(Verdict::Solvable),
        GraphVerdict::Failed => Some(Verdict::Unsolvable),
        GraphVerdict::CapHit => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn relaxed_runs_dominate_real_runs(seed in any::<u64>()) {
        let t = random_task(seed, Shape::General);
        let Some(l) = lnf_of(&t) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut real = l.init.clone();
        let mut relaxed = l.init.clone();
        for _ in 0..12 {
            let options: Vec<ActionId> =
                (0..l.actions.len()).map(ActionId).filter(|&a| l.apply(&real, a).is_ok()).collect();
            let Some(&a) = options.choose(&mut rng) else { break };
            real = l.apply(&real, a).unwrap();
            let next = relaxed_apply(&l, &relaxed, a);
            prop_assert!(next.is_ok(), "relaxed step {:?} failed", a);
            let next = next.unwrap();
            // the library step agrees with the independent relaxed semantics
            let naive = relaxed_step(&l, &Naive::from_state(&relaxed, l.props.len()), a.0).unwrap();
            prop_assert!(naive.same_as(&next));
            relaxed = next;
            prop_assert!(real.props.is_subset(&relaxed.props));
            for (x, y) in real.vals.iter().zip(&relaxed.vals) {
                prop_assert!(x <= y);
            }
        }
    }

    #[test]
    fn strong_decider_matches_graph(seed in any::<u64>()) {
        let t = random_task(seed, Shape::General);
        let Some(l) = lnf_of(&t) else { return Ok(()) };
        for s in walk_states(&t, seed, 3) {
            let s = lift_state(&l, &s);
            let d = decide_strong(&l, &s).unwrap().verdict;
            let g = build_graph(&l, &s);
            prop_assert_eq!(Some(d), graph_verdict(g.verdict));
        }
    }

    #[test]
    fn restricted_decider_matches_strong_and_graph(seed in any::<u64>()) {
        let t = random_task(seed, Shape::Restricted);
        let l = lnf_of(&t).expect("restricted tasks normalize");
        for s in walk_states(&t, seed, 3) {
            let r = decide_restricted(&t, &s).unwrap().verdict;
            let ls = lift_state(&l, &s);
            prop_assert_eq!(r, decide_strong(&l, &ls).unwrap().verdict);
            prop_assert_eq!(Some(r), graph_verdict(build_graph(&l, &ls).verdict));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn strong_decider_matches_bounded_search(seed in any::<u64>()) {
        let t = random_task(seed, Shape::General);
        let Some(l) = lnf_of(&t) else { return Ok(()) };
        if let Some(expected) = bounded_relaxed(&l, &l.init, 12, 20_000) {
            let d = decide_strong(&l, &l.init).unwrap().verdict;
            prop_assert_eq!(d.is_solvable(), expected);
        }
    }
}

#[test]
fn real_goal_implies_relaxed_goal() {
    for seed in 0..200 {
        let t = random_task(seed, Shape::General);
        let Some(l) = lnf_of(&t) else { continue };
        if l.goal_holds(&l.init) {
            assert!(decide_strong(&l, &l.init).unwrap().verdict.is_solvable());
        }
    }
}
