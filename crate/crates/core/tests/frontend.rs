mod common;

use std::collections::BTreeSet;

use common::lifted::Interpreter;
use lnfplan::frontend::{ground_task, parse_task};
use lnfplan::gen::{generate, Family};
use lnfplan::model::{ActionId, GroundTask};
use rand::seq::IteratorRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random walks through the ground task, checked step by step against the
/// lifted interpreter: same applicable actions, same fluent values, same goal
/// status.
#[test]
fn grounding_agrees_with_lifted_semantics() {
    for family in Family::ALL {
        for size in 1..=3 {
            for seed in 0..3 {
                let inst = generate(family, size, seed);
                let parsed = parse_task(&inst.domain, &inst.problem).unwrap();
                let t = ground_task(&parsed).unwrap();
                let lifted = Interpreter::new(&parsed);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut s = t.init.clone();
                let mut ls = lifted.initial();
                for _ in 0..25 {
                    let ground: BTreeSet<String> = (0..t.actions.len())
                        .filter(|&a| t.apply(&s, ActionId(a)).is_ok())
                        .map(|a| t.actions[a].name.clone())
                        .collect();
                    let succ = lifted.successors(&ls);
                    let lifted_names: BTreeSet<String> = succ.keys().cloned().collect();
                    assert_eq!(ground, lifted_names, "{} {size} {seed}", family.name());
                    for v in &t.vars {
                        let atom = ls.values.iter().find(|(k, _)| k.name() == v.name).map(|(_, x)| x);
                        assert_eq!(atom, Some(&s.vals[v.id.0]), "{}", v.name);
                    }
                    assert_eq!(t.goal_holds(&s), lifted.goal(&ls));
                    let Some(name) = ground.iter().choose(&mut rng) else { break };
                    s = t.apply(&s, t.find_action(name).unwrap()).unwrap();
                    ls = succ[name].clone();
                }
            }
        }
    }
}

#[test]
fn witnesses_replay_in_lifted_semantics() {
    for family in Family::ALL {
        for size in 1..=6 {
            let inst = generate(family, size, 11);
            let parsed = parse_task(&inst.domain, &inst.problem).unwrap();
            let lifted = Interpreter::new(&parsed);
            let end = lifted.run(&inst.witness).expect("witness is executable");
            assert!(lifted.goal(&end));
        }
    }
}

#[test]
fn generated_text_is_stable() {
    let a = generate(Family::ZenoLite, 1, 0);
    let b = generate(Family::ZenoLite, 1, 0);
    assert_eq!((a.domain, a.problem, a.witness), (b.domain, b.problem, b.witness));
}
