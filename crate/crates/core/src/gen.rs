//! Benchmark instance generators. Each instance comes with a witness plan
//! built alongside it, so solvability is known by construction.

#![allow(clippy::needless_range_loop)]

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Family {
    ZenoLite,
    DepotLite,
}

impl Family {
    pub const ALL: [Family; 2] = [Family::ZenoLite, Family::DepotLite];

    pub fn name(self) -> &'static str {
        match self {
            Family::ZenoLite => "zeno-lite",
            Family::DepotLite => "depot-lite",
        }
    }

    pub fn parse(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub family: Family,
    pub size: usize,
    pub seed: u64,
    pub domain: String,
    pub problem: String,
    /// Action names of a valid plan.
    pub witness: Vec<String>,
}

impl Instance {
    pub fn witness_text(&self) -> String {
        crate::plan_io::format_plan(self.witness.iter().map(String::as_str), None)
    }
}

/// Deterministic in `(family, size, seed)`.
///
/// # Panics
///
/// If `size` is zero.
pub fn generate(family: Family, size: usize, seed: u64) -> Instance {
    assert!(size >= 1, "size must be at least 1");
    let mix = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((size as u64) << 32) ^ family as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(mix);
    let (domain, problem, witness) = match family {
        Family::ZenoLite => zeno(size, seed, &mut rng),
        Family::DepotLite => depot(size, seed, &mut rng),
    };
    Instance { family, size, seed, domain: domain.to_string(), problem, witness }
}

// ---------------------------------------------------------------------------

pub const ZENO_DOMAIN: &str = "(define (domain zeno-lite)
  (:requirements :strips :typing :fluents)
  (:types aircraft person - locatable city)
  (:predicates (at ?x - locatable ?c - city) (in ?p - person ?a - aircraft))
  (:functions (fuel ?a - aircraft) (capacity-fuel ?a - aircraft) (distance ?c1 ?c2 - city)
              (slow-burn ?a - aircraft) (fast-burn ?a - aircraft)
              (onboard ?a - aircraft) (capacity ?a - aircraft) (total-fuel-used))
  (:action board
    :parameters (?p - person ?a - aircraft ?c - city)
    :precondition (and (at ?p ?c) (at ?a ?c) (< (onboard ?a) (capacity ?a)))
    :effect (and (not (at ?p ?c)) (in ?p ?a) (increase (onboard ?a) 1)))
  (:action debark
    :parameters (?p - person ?a - aircraft ?c - city)
    :precondition (and (in ?p ?a) (at ?a ?c))
    :effect (and (not (in ?p ?a)) (at ?p ?c) (decrease (onboard ?a) 1)))
  (:action fly
    :parameters (?a - aircraft ?c1 ?c2 - city)
    :precondition (and (at ?a ?c1) (>= (fuel ?a) (* (distance ?c1 ?c2) (slow-burn ?a))))
    :effect (and (not (at ?a ?c1)) (at ?a ?c2)
                 (decrease (fuel ?a) (* (distance ?c1 ?c2) (slow-burn ?a)))
                 (increase (total-fuel-used) (* (distance ?c1 ?c2) (slow-burn ?a)))))
  (:action zoom
    :parameters (?a - aircraft ?c1 ?c2 - city)
    :precondition (and (at ?a ?c1) (>= (fuel ?a) (* (distance ?c1 ?c2) (fast-burn ?a))))
    :effect (and (not (at ?a ?c1)) (at ?a ?c2)
                 (decrease (fuel ?a) (* (distance ?c1 ?c2) (fast-burn ?a)))
                 (increase (total-fuel-used) (* (distance ?c1 ?c2) (fast-burn ?a)))))
  (:action refuel
    :parameters (?a - aircraft ?c - city)
    :precondition (and (at ?a ?c) (< (fuel ?a) (capacity-fuel ?a)))
    :effect (assign (fuel ?a) (capacity-fuel ?a))))
";

struct Plane {
    at: usize,
    fuel: i64,
    cap_fuel: i64,
    slow: i64,
}

fn zeno(size: usize, seed: u64, rng: &mut ChaCha8Rng) -> (&'static str, String, Vec<String>) {
    let cities = size + 1;
    let persons = size;
    let planes = 1 + size / 4;
    let mut dist = vec![vec![0i64; cities]; cities];
    for i in 0..cities {
        for j in i + 1..cities {
            let d = rng.gen_range(1..=9);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let max_dist = dist.iter().flatten().copied().max().unwrap_or(1).max(1);
    let mut ps = Vec::new();
    let mut p_text = String::new();
    for a in 0..planes {
        let slow: i64 = rng.gen_range(1..=2);
        let fast = slow + rng.gen_range(1..=2);
        let cap_fuel = max_dist * fast + rng.gen_range(0..=10);
        let fuel = rng.gen_range(0..=cap_fuel);
        let at = rng.gen_range(0..cities);
        let seats: i64 = rng.gen_range(1..=3);
        let _ = write!(
            p_text,
            "    (at plane{a} city{at}) (= (fuel plane{a}) {fuel}) (= (capacity-fuel plane{a}) {cap_fuel})\n    \
             (= (slow-burn plane{a}) {slow}) (= (fast-burn plane{a}) {fast}) (= (onboard plane{a}) 0) (= (capacity plane{a}) {seats})\n"
        );
        ps.push(Plane { at, fuel, cap_fuel, slow });
    }
    let mut person_at = Vec::new();
    let mut person_goal = Vec::new();
    for p in 0..persons {
        let from = rng.gen_range(0..cities);
        let mut to = rng.gen_range(0..cities - 1);
        if to >= from {
            to += 1;
        }
        let _ = writeln!(p_text, "    (at person{p} city{from})");
        person_at.push(from);
        person_goal.push(to);
    }
    let plane_goal: Vec<Option<usize>> =
        (0..planes).map(|_| rng.gen_bool(0.5).then(|| rng.gen_range(0..cities))).collect();
    for i in 0..cities {
        for j in 0..cities {
            let _ = writeln!(p_text, "    (= (distance city{i} city{j}) {})", dist[i][j]);
        }
    }

    // witness: every person is carried by plane (p mod planes), one at a time
    let mut witness = Vec::new();
    let fly = |pl: &mut Plane, a: usize, to: usize, witness: &mut Vec<String>| {
        if pl.at == to {
            return;
        }
        let burn = dist[pl.at][to] * pl.slow;
        if pl.fuel < burn {
            witness.push(format!("(refuel plane{a} city{})", pl.at));
            pl.fuel = pl.cap_fuel;
        }
        witness.push(format!("(fly plane{a} city{} city{to})", pl.at));
        pl.fuel -= burn;
        pl.at = to;
    };
    for p in 0..persons {
        let a = p % planes;
        let pl = &mut ps[a];
        fly(pl, a, person_at[p], &mut witness);
        witness.push(format!("(board person{p} plane{a} city{})", person_at[p]));
        fly(pl, a, person_goal[p], &mut witness);
        witness.push(format!("(debark person{p} plane{a} city{})", person_goal[p]));
    }
    for (a, g) in plane_goal.iter().enumerate() {
        if let Some(c) = g {
            fly(&mut ps[a], a, *c, &mut witness);
        }
    }

    let mut problem = format!("(define (problem zeno-lite-{size}-{seed})\n  (:domain zeno-lite)\n  (:objects");
    for a in 0..planes {
        let _ = write!(problem, " plane{a}");
    }
    problem.push_str(" - aircraft");
    for p in 0..persons {
        let _ = write!(problem, " person{p}");
    }
    problem.push_str(" - person");
    for c in 0..cities {
        let _ = write!(problem, " city{c}");
    }
    problem.push_str(" - city)\n  (:init\n    (= (total-fuel-used) 0)\n");
    problem.push_str(&p_text);
    problem.push_str("  )\n  (:goal (and");
    for p in 0..persons {
        let _ = write!(problem, " (at person{p} city{})", person_goal[p]);
    }
    for (a, g) in plane_goal.iter().enumerate() {
        if let Some(c) = g {
            let _ = write!(problem, " (at plane{a} city{c})");
        }
    }
    problem.push_str("))\n  (:metric minimize (total-fuel-used)))\n");
    (ZENO_DOMAIN, problem, witness)
}

// ---------------------------------------------------------------------------

pub const DEPOT_DOMAIN: &str = "(define (domain depot-lite)
  (:requirements :strips :typing :fluents)
  (:types place locatable - object
          truck hoist surface - locatable
          pallet crate - surface)
  (:predicates (at ?x - locatable ?p - place) (on ?c - crate ?s - surface) (in ?c - crate ?t - truck)
               (lifting ?h - hoist ?c - crate) (available ?h - hoist) (clear ?s - surface))
  (:functions (load ?t - truck) (capacity ?t - truck) (weight ?c - crate) (hoist-fuel ?h - hoist))
  (:action drive
    :parameters (?t - truck ?from ?to - place)
    :precondition (at ?t ?from)
    :effect (and (not (at ?t ?from)) (at ?t ?to)))
  (:action lift
    :parameters (?h - hoist ?c - crate ?s - surface ?p - place)
    :precondition (and (at ?h ?p) (available ?h) (at ?c ?p) (on ?c ?s) (clear ?c) (>= (hoist-fuel ?h) 1))
    :effect (and (not (at ?c ?p)) (lifting ?h ?c) (not (clear ?c)) (not (available ?h)) (clear ?s)
                 (not (on ?c ?s)) (decrease (hoist-fuel ?h) 1)))
  (:action drop
    :parameters (?h - hoist ?c - crate ?s - surface ?p - place)
    :precondition (and (at ?h ?p) (at ?s ?p) (clear ?s) (lifting ?h ?c))
    :effect (and (available ?h) (not (lifting ?h ?c)) (at ?c ?p) (not (clear ?s)) (clear ?c) (on ?c ?s)))
  (:action load
    :parameters (?h - hoist ?c - crate ?t - truck ?p - place)
    :precondition (and (at ?h ?p) (at ?t ?p) (lifting ?h ?c) (<= (+ (load ?t) (weight ?c)) (capacity ?t)))
    :effect (and (not (lifting ?h ?c)) (in ?c ?t) (available ?h) (increase (load ?t) (weight ?c))))
  (:action unload
    :parameters (?h - hoist ?c - crate ?t - truck ?p - place)
    :precondition (and (at ?h ?p) (at ?t ?p) (available ?h) (in ?c ?t) (>= (hoist-fuel ?h) 1))
    :effect (and (not (in ?c ?t)) (not (available ?h)) (lifting ?h ?c)
                 (decrease (load ?t) (weight ?c)) (decrease (hoist-fuel ?h) 1))))
";

// Every crate starts alone on its own pallet; each place also has a dock
// pallet where delivered crates are stacked.
fn depot(size: usize, seed: u64, rng: &mut ChaCha8Rng) -> (&'static str, String, Vec<String>) {
    let places = 2 + size / 3;
    let trucks = 1 + size / 4;
    let crates = size;
    let weights: Vec<i64> = (0..crates).map(|_| rng.gen_range(1..=9)).collect();
    let max_weight = *weights.iter().max().unwrap();
    // a truck smaller than the heaviest crate is enlarged to keep the task solvable
    let capacities: Vec<i64> = (0..trucks).map(|_| rng.gen_range(3..=15).max(max_weight)).collect();
    let truck_start: Vec<usize> = (0..trucks).map(|_| rng.gen_range(0..places)).collect();
    let crate_place: Vec<usize> = (0..crates).map(|_| rng.gen_range(0..places)).collect();
    let goal_place: Vec<usize> = crate_place
        .iter()
        .map(|&from| {
            let to = rng.gen_range(0..places - 1);
            if to >= from { to + 1 } else { to }
        })
        .collect();

    // witness: truck0 carries one crate at a time
    let mut witness = Vec::new();
    let mut hoist_uses = vec![0i64; places];
    let mut top: Vec<String> = (0..places).map(|p| format!("dock{p}")).collect();
    let mut truck = truck_start[0];
    for c in 0..crates {
        let (from, to) = (crate_place[c], goal_place[c]);
        if truck != from {
            witness.push(format!("(drive truck0 place{truck} place{from})"));
        }
        witness.push(format!("(lift hoist{from} crate{c} pallet{c} place{from})"));
        witness.push(format!("(load hoist{from} crate{c} truck0 place{from})"));
        witness.push(format!("(drive truck0 place{from} place{to})"));
        witness.push(format!("(unload hoist{to} crate{c} truck0 place{to})"));
        witness.push(format!("(drop hoist{to} crate{c} {} place{to})", top[to]));
        hoist_uses[from] += 1;
        hoist_uses[to] += 1;
        top[to] = format!("crate{c}");
        truck = to;
    }
    let hoist_fuel: Vec<i64> = hoist_uses.iter().map(|u| u + rng.gen_range(0..=2)).collect();

    let mut problem = format!("(define (problem depot-lite-{size}-{seed})\n  (:domain depot-lite)\n  (:objects");
    let mut objects = |prefix: &str, n: usize, ty: &str| {
        for i in 0..n {
            let _ = write!(problem, " {prefix}{i}");
        }
        let _ = write!(problem, " - {ty}");
    };
    objects("place", places, "place");
    objects("truck", trucks, "truck");
    objects("hoist", places, "hoist");
    objects("dock", places, "pallet");
    objects("pallet", crates, "pallet");
    objects("crate", crates, "crate");
    problem.push_str(")\n  (:init\n");
    for p in 0..places {
        let _ = writeln!(
            problem,
            "    (at dock{p} place{p}) (clear dock{p}) (at hoist{p} place{p}) (available hoist{p}) (= (hoist-fuel hoist{p}) {})",
            hoist_fuel[p]
        );
    }
    for t in 0..trucks {
        let _ = writeln!(
            problem,
            "    (at truck{t} place{}) (= (load truck{t}) 0) (= (capacity truck{t}) {})",
            truck_start[t], capacities[t]
        );
    }
    for c in 0..crates {
        let p = crate_place[c];
        let _ = writeln!(
            problem,
            "    (at pallet{c} place{p}) (at crate{c} place{p}) (on crate{c} pallet{c}) (clear crate{c}) (= (weight crate{c}) {})",
            weights[c]
        );
    }
    problem.push_str("  )\n  (:goal (and");
    for c in 0..crates {
        let _ = write!(problem, " (at crate{c} place{})", goal_place[c]);
    }
    problem.push_str(")))\n");
    (DEPOT_DOMAIN, problem, witness)
}
