//! End-to-end acceptance gate: ten numbered criteria, one printed line
//! each (visible under `--nocapture`; an assertion failure fails the
//! criterion's test). Runtime budgets are asserted where a criterion
//! carries one. All comparisons are exact rational equality — no floats,
//! no tolerances beyond the stated lower bounds.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num::traits::{Signed, Zero};

use mkot::duality::solve_dual;
use mkot::ext::{rat, ExtRat, PotVal, Rat};
use mkot::fixtures::{diag_sqrt, gen_random, remark2x2, staircase};
use mkot::instance::{
    cost_of_plan, marginal_denominator, pairing_integral, Instance, Plan, Potentials,
};
use mkot::monotonicity::{
    build_strong_potentials, check_cyclical, check_weak_certificate, evaluate_strong,
    minimal_certificate_spread, CyclicalResult,
};
use mkot::relaxation::{
    build_necessary_certificate, default_schedule, solve_relaxed, sweep_k, WeightMode, K_CAP,
};
use mkot::solver::{enumerate_couplings, finite_feasible, solve_primal, vertex_plans};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn assert_within(start: Instant, budget: Duration, what: &str) {
    let took = start.elapsed();
    assert!(
        took <= budget,
        "{} took {:?}, budget {:?}",
        what,
        took,
        budget
    );
}

/// Deterministic seeded batch: size pattern cycles through small shapes.
fn batch_instance(seed: u64, max_side: u64, density: Rat) -> Instance {
    let m = 1 + (seed % max_side) as usize;
    let n = 1 + ((seed / max_side) % max_side) as usize;
    gen_random(m, n, seed, density).expect("generator parameters are in range")
}

/// Forbid every arc out of the first positive-mass row, producing a
/// finitely infeasible instance with untouched marginals.
fn forbid_first_row(inst: &Instance) -> Instance {
    let a0 = (0..inst.m)
        .find(|&a| inst.mu[a].is_positive())
        .expect("marginals sum to one");
    let cost = inst
        .cost
        .iter()
        .enumerate()
        .map(|(a, row)| {
            if a == a0 {
                vec![ExtRat::PlusInf; inst.n]
            } else {
                row.clone()
            }
        })
        .collect();
    Instance::new(inst.mu.clone(), inst.nu.clone(), cost).unwrap()
}

#[test]
fn criterion_01_remark_values() {
    let start = Instant::now();
    let inst = remark2x2();
    assert_eq!(solve_primal(&inst).value, ExtRat::Fin(rat(1, 1)));
    let relaxed = solve_relaxed(&inst, 1, WeightMode::Raw).unwrap();
    assert_eq!(relaxed.value, rat(0, 1));
    assert_within(start, Duration::from_secs(1), "criterion 1");
    println!("criterion 1: pass (primal 1, raw k=1 relaxed 0)");
}

#[test]
fn criterion_02_dual_equality() {
    let start = Instant::now();
    let densities = [rat(0, 1), rat(3, 10), rat(3, 5)];
    let mut infeasible_seen = 0u32;
    for seed in 0..200u64 {
        let density = densities[(seed % 3) as usize].clone();
        let mut inst = batch_instance(seed, 6, density);
        if seed % 10 == 9 {
            inst = forbid_first_row(&inst);
        }
        let primal = solve_primal(&inst);
        let dual = solve_dual(&inst);
        assert_eq!(
            primal.value, dual.value,
            "primal/dual mismatch at seed {}",
            seed
        );
        if primal.value == ExtRat::PlusInf {
            infeasible_seen += 1;
        }
    }
    assert!(infeasible_seen >= 20, "infeasible coverage went missing");
    assert_within(start, Duration::from_secs(30), "criterion 2");
    println!(
        "criterion 2: pass (200 instances, {} infeasible with both values +inf)",
        infeasible_seen
    );
}

#[test]
fn criterion_03_oracle_equivalence() {
    let start = Instant::now();
    let mut checked = 0u32;
    let mut seed = 0u64;
    while checked < 50 {
        let inst = batch_instance(seed, 4, rat(3, 10));
        seed += 1;
        let denom = marginal_denominator(&inst);
        if denom > 3 {
            continue;
        }
        let oracle = mkot::solver::oracle_value(&inst, denom).unwrap();
        assert_eq!(
            oracle,
            solve_primal(&inst).value,
            "oracle mismatch at seed {}",
            seed - 1
        );
        checked += 1;
    }
    assert_within(start, Duration::from_secs(60), "criterion 3");
    println!(
        "criterion 3: pass (50 grid-enumerated instances, last seed {})",
        seed - 1
    );
}

#[test]
fn criterion_04_three_way_equivalence() {
    let start = Instant::now();
    let mut checked = 0u32;
    let mut seed = 0u64;
    let mut vertices_total = 0u32;
    while checked < 30 {
        let inst = gen_random(3, 3, seed, rat(0, 1)).unwrap();
        seed += 1;
        if inst.mu.iter().chain(&inst.nu).any(|x| x.is_zero()) {
            continue;
        }
        let optimum = solve_primal(&inst).value;
        for vertex in vertex_plans(&inst) {
            let optimal = cost_of_plan(&inst, &vertex) == optimum;
            let cyclical = check_cyclical(&inst, &vertex, usize::MAX) == CyclicalResult::Valid;
            let strong = build_strong_potentials(&inst, &vertex)
                .map(|c| c.is_valid())
                .unwrap_or(false);
            assert_eq!(optimal, cyclical, "optimal ≠ cyclical at seed {}", seed - 1);
            assert_eq!(optimal, strong, "optimal ≠ strong at seed {}", seed - 1);
            vertices_total += 1;
        }
        checked += 1;
    }
    assert_within(start, Duration::from_secs(60), "criterion 4");
    println!(
        "criterion 4: pass (30 all-finite instances, {} vertices, zero discrepancies)",
        vertices_total
    );
}

#[test]
fn criterion_05_monotone_vertices_with_forbidden_arcs() {
    let mut monotone_vertices = 0u32;
    for seed in 0..100u64 {
        let inst = batch_instance(seed, 4, rat(2, 5));
        if !finite_feasible(&inst) {
            continue;
        }
        let primal = solve_primal(&inst);
        let plan = primal.plan.as_ref().unwrap();
        assert_eq!(
            check_cyclical(&inst, plan, usize::MAX),
            CyclicalResult::Valid,
            "optimal plan not cyclically monotone at seed {}",
            seed
        );
        for vertex in vertex_plans(&inst) {
            if !vertex.is_finite(&inst) {
                continue;
            }
            if check_cyclical(&inst, &vertex, usize::MAX) == CyclicalResult::Valid {
                assert_eq!(
                    cost_of_plan(&inst, &vertex),
                    primal.value,
                    "monotone vertex off the optimum at seed {}",
                    seed
                );
                monotone_vertices += 1;
            }
        }
    }
    println!(
        "criterion 5: pass (100 seeds at density 2/5, {} monotone vertices all optimal)",
        monotone_vertices
    );
}

#[test]
fn criterion_06_weak_strictly_beats_strong() {
    let inst = staircase(3).unwrap();
    let pi = solve_primal(&inst).plan.unwrap();
    let phi = Potentials::from_rats(
        vec![rat(1, 1); 3],
        vec![rat(0, 1); 3],
    );
    let weak = check_weak_certificate(&inst, &pi, &phi).unwrap();
    assert!(weak.is_valid(), "weak certificate must hold");
    let strong = evaluate_strong(&inst, &pi, &phi);
    assert!(
        !strong.domination_everywhere,
        "f⊕g = 1 > 0 below the diagonal must break strong domination"
    );
    assert!(strong.tight_on_support);
    println!("criterion 6: pass (weak VALID, strong domination FAILS below the diagonal)");
}

#[test]
fn criterion_07_sweep_histogram() {
    let mut hist: BTreeMap<u64, u32> = BTreeMap::new();
    let mut found = 0u32;
    let mut seed = 0u64;
    while found < 50 {
        let inst = batch_instance(seed, 5, rat(3, 10));
        seed += 1;
        if !finite_feasible(&inst) {
            continue;
        }
        let sweep = sweep_k(&inst, &default_schedule()).unwrap();
        for pair in sweep.steps.windows(2) {
            assert!(pair[0].1 <= pair[1].1, "sweep values dipped at seed {}", seed - 1);
        }
        let k_star = sweep.k_star.expect("schedule must reach the plan optimum");
        assert!(k_star <= K_CAP);
        assert_eq!(sweep.steps.last().unwrap().1, sweep.primal);
        *hist.entry(k_star).or_insert(0) += 1;
        found += 1;
    }
    let hist_line: Vec<String> = hist.iter().map(|(k, c)| format!("{}:{}", k, c)).collect();
    println!(
        "criterion 7: pass (50 sweeps monotone, K_star histogram {{{}}})",
        hist_line.join(", ")
    );
}

#[test]
fn criterion_08_necessary_certificates() {
    for seed in 0..30u64 {
        let inst = gen_random(3, 3, seed, rat(3, 10)).unwrap();
        let pi = solve_primal(&inst).plan.unwrap();
        let cert = build_necessary_certificate(&inst, &pi, &pi.mass, &rat(1, 10)).unwrap();
        assert!(
            cert.all_pass(),
            "clauses {:?} at seed {} (k = {})",
            cert.clauses,
            seed,
            cert.k
        );
    }
    let inst = staircase(3).unwrap();
    let pi = solve_primal(&inst).plan.unwrap();
    let cert = build_necessary_certificate(&inst, &pi, &pi.mass, &rat(1, 2)).unwrap();
    assert_eq!(cert.u, vec![rat(0, 1), rat(-1, 1), rat(-2, 1)]);
    assert_eq!(cert.v, vec![rat(1, 1), rat(2, 1), rat(3, 1)]);
    assert!(cert.d.is_empty());
    assert!(cert.all_pass());
    println!(
        "criterion 8: pass (30 seeded pairs all-PASS at eps 1/10; staircase hand values exact)"
    );
}

#[test]
fn criterion_09_spread_scaling() {
    let start = Instant::now();
    for n in [3usize, 5, 8] {
        let inst = staircase(n).unwrap();
        let pi = solve_primal(&inst).plan.unwrap();
        let spread = minimal_certificate_spread(&inst, &pi).expect("certificates exist");
        assert_eq!(
            spread,
            rat(n as i64 - 1, 1),
            "staircase({}) spread must be exactly {}",
            n,
            n - 1
        );
    }
    for n in [4usize, 16, 64] {
        let inst = diag_sqrt(n).unwrap();
        let pi = solve_primal(&inst).plan.unwrap();
        let spread = minimal_certificate_spread(&inst, &pi).expect("certificates exist");
        // (N−1)·(N^{−1/2} − 10^{−3}), exact because N is a perfect square.
        let root = (1..).find(|r| r * r == n).unwrap() as i64;
        let bound = rat(n as i64 - 1, 1) * (rat(1, root) - rat(1, 1000));
        assert!(
            spread >= bound,
            "diag_sqrt({}) spread {} below bound {}",
            n,
            spread,
            bound
        );
    }
    assert_within(start, Duration::from_secs(120), "criterion 9");
    println!("criterion 9: pass (staircase spreads exact, diag-sqrt spreads above bound)");
}

/// When the instance has ≥ 2 finite plans, integrate 10 seeded admissible
/// potential pairs against all of them and insist on a common value.
/// Returns whether the instance offered a choice at all.
fn pairing_agrees_on(inst: &Instance, denom: u64, rng_seed: u64) -> bool {
    let finite_plans: Vec<Plan> = enumerate_couplings(inst, denom)
        .unwrap()
        .into_iter()
        .filter(|pl| pl.is_finite(inst))
        .collect();
    if finite_plans.len() < 2 {
        return false;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    for _ in 0..10 {
        // Random A-side values, then the largest admissible B-side.
        let f: Vec<Rat> = (0..inst.m)
            .map(|_| rat((rng.next_u64() % 11) as i64 - 5, 1 + (rng.next_u64() % 3) as i64))
            .collect();
        let g: Vec<PotVal> = (0..inst.n)
            .map(|b| {
                (0..inst.m)
                    .filter_map(|a| inst.cost[a][b].as_rat().map(|c| c - &f[a]))
                    .min()
                    .map(PotVal::Fin)
                    .unwrap_or(PotVal::NegInf)
            })
            .collect();
        let phi = Potentials::new(inst, f.into_iter().map(PotVal::Fin).collect(), g).unwrap();
        let first = pairing_integral(inst, &phi, &finite_plans[0]).unwrap();
        for plan in &finite_plans[1..] {
            assert_eq!(
                pairing_integral(inst, &phi, plan).unwrap(),
                first,
                "pairing diverged (rng seed {})",
                rng_seed
            );
        }
    }
    true
}

#[test]
fn criterion_10_pairing_common_value() {
    let mut instances_with_choice = 0u32;
    let mut checked = 0u32;
    let mut seed = 0u64;
    while checked < 50 {
        let inst = batch_instance(seed, 4, rat(3, 10));
        seed += 1;
        let denom = marginal_denominator(&inst);
        if denom > 3 {
            continue;
        }
        checked += 1;
        if pairing_agrees_on(&inst, denom, seed) {
            instances_with_choice += 1;
        }
    }
    assert!(instances_with_choice > 0, "batch never offered ≥ 2 finite plans");
    // A dense multi-plan instance on top of the batch: all-finite costs on
    // uniform thirds give 55 finite plans at denominator 3.
    let c = |v: i64| ExtRat::Fin(rat(v, 1));
    let dense = Instance::new(
        vec![rat(1, 3); 3],
        vec![rat(1, 3); 3],
        vec![
            vec![c(1), c(2), c(3)],
            vec![c(2), c(4), c(1)],
            vec![c(3), c(1), c(5)],
        ],
    )
    .unwrap();
    assert!(pairing_agrees_on(&dense, 3, 424242));
    println!(
        "criterion 10: pass ({} multi-plan batch instances plus a dense 3x3, 10 pairs each)",
        instances_with_choice
    );
}
