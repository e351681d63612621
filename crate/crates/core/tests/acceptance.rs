//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N [PASS|FAIL]` line before asserting.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::time::Instant;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rydfactor::bdd::{build_bdd, prune, BddError};
use rydfactor::cnf::{
    cnf_failed_paths, encode_generic, factor_projection, is_satisfiable, parse_clauses, to_three_sat, Clause,
    CnfError, CnfFormula, Literal, VariableId,
};
use rydfactor::decode::{classify, Classification};
use rydfactor::estimate::estimate;
use rydfactor::mis::builtin::{builtin, table_points, G15_EXP_TABLE, G35_EXP_TABLE};
use rydfactor::mis::{
    align_layout, decode_set, expand_wires, graph_from_clauses, graph_from_cnf, solve_mis_exact, validate_layout,
    BitStatus, GraphOptions, MisGraph,
};
use rydfactor::pipeline::{preset, run_pipeline};
use rydfactor::problem::create_instance;
use rydfactor::sim::sweep_schedule;
use rydfactor::sim::{evolve, ground_state, HamiltonianSpec, StateVector};

fn report(k: usize, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {k:>2} [{verdict}] {title}: {detail}");
}

fn clause_set(text: &str) -> BTreeSet<Clause> {
    parse_clauses(text).expect("clause text").into_iter().collect()
}

fn rename_dummies(clauses: &BTreeSet<Clause>, map: &BTreeMap<VariableId, Literal>) -> BTreeSet<Clause> {
    clauses
        .iter()
        .map(|c| {
            let lits = c.literals().iter().map(|l| match map.get(&l.var) {
                Some(target) if l.negated => target.negate(),
                Some(target) => target.clone(),
                None => l.clone(),
            });
            Clause::new(lits).expect("renaming keeps clauses consistent")
        })
        .collect()
}

/// Set equality up to renaming and sign-flipping of auxiliary variables.
fn equal_up_to_auxiliaries(got: &BTreeSet<Clause>, want: &BTreeSet<Clause>) -> bool {
    let aux = |s: &BTreeSet<Clause>| -> Vec<VariableId> {
        s.iter()
            .flat_map(|c| c.literals().iter().map(|l| l.var.clone()))
            .filter(|v| !v.is_factor_bit())
            .unique()
            .collect()
    };
    let (ga, wa) = (aux(got), aux(want));
    if ga.len() != wa.len() || ga.len() > 4 {
        return got == want;
    }
    for perm in wa.iter().permutations(wa.len()) {
        for signs in 0u32..(1 << ga.len()) {
            let map: BTreeMap<VariableId, Literal> = ga
                .iter()
                .zip(&perm)
                .enumerate()
                .map(|(k, (g, &w))| (g.clone(), Literal { var: w.clone(), negated: signs >> k & 1 == 1 }))
                .collect();
            if rename_dummies(got, &map) == *want {
                return true;
            }
        }
    }
    false
}

fn failed_path_clauses(n: u64, w: usize) -> BTreeSet<Clause> {
    let bdd = prune(build_bdd(&create_instance(n, Some((w, w))).unwrap())).unwrap();
    to_three_sat(&cnf_failed_paths(&bdd).unwrap()).clause_set()
}

#[test]
fn criterion_01_failed_path_clause_sets() {
    let start = Instant::now();
    let cases = [
        (6, 2, "(p1)(q1)(p0+q0)(¬p0+¬q0)"),
        (15, 3, "(p0)(q0)(p1+p2)(q1+q2)(p1+q1)(¬p1+¬q1)(p1+¬p2+¬q2)(q1+¬p2+¬q2)"),
        (35, 3, "(p0)(q0)(p1+p2)(p1+q1)(p1+q2)(¬p1+¬q1)(q1+q2+¬p1)(p2+q1+s1)(¬p1+¬q2+¬s1)"),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (n, w, text) in cases {
        let want = clause_set(text);
        let got = failed_path_clauses(n, w);
        let ok = equal_up_to_auxiliaries(&got, &want);
        pass &= ok;
        let shown: Vec<String> = got.iter().map(|c| c.to_string()).collect();
        parts.push(if ok {
            format!("n={n} ok ({} clauses)", want.len())
        } else {
            format!("n={n} mismatch, got {} clauses {}", got.len(), shown.join(""))
        });
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 1.0;
    report(1, "failed-path CNF equals the published clause sets", pass, &format!("{}; {elapsed:.3} s", parts.join("; ")));
    assert!(pass);
}

#[test]
fn criterion_02_encoders_match_trial_division() {
    let start = Instant::now();
    let (mut checked, mut fallback, mut primes, mut dead_roots) = (0, 0, 0, 0);
    let mut failures = Vec::new();
    for n in 4u64..512 {
        let inst = create_instance(n, None).unwrap();
        let want: BTreeSet<(u64, u64)> = inst.divisor_pairs().into_iter().collect();
        let is_prime = (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
        if is_prime {
            primes += 1;
            if !want.is_empty() {
                failures.push(format!("{n}: prime with a divisor pair inside the widths"));
            }
        }
        let bdd = match prune(build_bdd(&inst)) {
            Ok(bdd) => bdd,
            Err(BddError::FullyDeadDiagram { .. }) => {
                dead_roots += 1;
                if !want.is_empty() {
                    failures.push(format!("{n}: diagram died but divisors exist"));
                }
                continue;
            }
            Err(e) => panic!("{n}: {e}"),
        };
        let generic = encode_generic(&bdd);
        if factor_projection(&generic, &inst) != want {
            failures.push(format!("{n}: generic projection differs"));
        }
        match cnf_failed_paths(&bdd) {
            Ok(f) => {
                if factor_projection(&f, &inst) != want {
                    failures.push(format!("{n}: failed-path projection differs"));
                }
                if is_prime && is_satisfiable(&f, &[]) {
                    failures.push(format!("{n}: failed-path formula satisfiable for a prime"));
                }
            }
            Err(CnfError::TooManyEntryNodes { .. }) => fallback += 1,
            Err(e) => failures.push(format!("{n}: {e}")),
        }
        if is_prime && is_satisfiable(&generic, &[]) {
            failures.push(format!("{n}: generic formula satisfiable for a prime"));
        }
        checked += 1;
    }
    let pass = failures.is_empty();
    let detail = format!(
        "{checked} encoded, {dead_roots} pruned to nothing, {primes} primes unsatisfiable, \
         {fallback} routed to the generic encoder (more than two live entry nodes); {:.1} s{}",
        start.elapsed().as_secs_f64(),
        if pass { String::new() } else { format!("; {}", failures.join(", ")) }
    );
    report(2, "both encoders reproduce the divisor sets for n in [4, 512)", pass, &detail);
    assert!(pass);
}

fn random_formula(rng: &mut ChaCha8Rng) -> CnfFormula {
    let vars = [VariableId::p(0), VariableId::p(1), VariableId::p(2), VariableId::q(0), VariableId::q(1)];
    let count = rng.gen_range(1..=8);
    let clauses = (0..count).filter_map(|_| {
        let width = rng.gen_range(1..=3);
        let lits: Vec<Literal> = (0..width)
            .map(|_| Literal { var: vars[rng.gen_range(0..vars.len())].clone(), negated: rng.gen_bool(0.5) })
            .collect();
        Clause::new(lits)
    });
    let mut f = CnfFormula::from_clauses(clauses);
    if f.clauses.is_empty() {
        f.push(Clause::unit(VariableId::p(0).pos()));
    }
    f
}

#[test]
fn criterion_03_mis_correspondence() {
    let start = Instant::now();
    let g6 = builtin("G6").unwrap().graph;
    let s = solve_mis_exact(&g6).unwrap();
    let kets: BTreeSet<String> = s.sets.iter().map(|m| g6.ket(&s.mask_bits(m, g6.len()))).collect();
    let g6_ok = s.size == 4 && kets == BTreeSet::from(["|0111;10⟩".to_string(), "|1101;01⟩".to_string()]);

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut sat_count, mut failures) = (0, Vec::new());
    for k in 0..200 {
        let f = random_formula(&mut rng);
        let g = graph_from_cnf(&f, GraphOptions::default()).unwrap();
        let sat = is_satisfiable(&f, &[]);
        sat_count += usize::from(sat);
        let mis = solve_mis_exact(&g).unwrap();
        if (mis.size == g.clause_count) != sat {
            failures.push(format!("#{k}: size {} of {} clauses, satisfiable {sat}", mis.size, g.clause_count));
        }
        if sat {
            for set in &mis.sets {
                let status = decode_set(&g, &mis.mask_bits(set, g.len()));
                let value = |v: &VariableId| match status.get(v) {
                    Some(BitStatus::One) => Some(true),
                    Some(BitStatus::Zero) => Some(false),
                    _ => None,
                };
                if !f.all_clauses().iter().all(|c| c.satisfied_by(value)) {
                    failures.push(format!("#{k}: maximum set violates a clause"));
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = g6_ok && failures.is_empty() && elapsed < 60.0;
    let detail = format!(
        "G6 size {} sets {:?}; 200 random formulas ({sat_count} satisfiable), {} mismatches; {elapsed:.2} s",
        s.size,
        kets,
        failures.len()
    );
    report(3, "MIS size equals clause count iff satisfiable", pass, &detail);
    assert!(pass, "{failures:?}");
}

fn projections(g: &MisGraph) -> BTreeSet<Vec<(VariableId, BitStatus)>> {
    let plain = g.unwired();
    let mis = solve_mis_exact(g).unwrap();
    mis.sets
        .iter()
        .map(|m| {
            let bits = g.strip_wires(&mis.mask_bits(m, g.len()));
            decode_set(&plain, &bits).into_iter().collect()
        })
        .collect()
}

/// Best interior count of a wire with `2m` interior atoms for each endpoint
/// pattern, by enumerating the independent sets of the expanded graph.
fn wire_interior_optimum(m: usize) -> BTreeMap<(bool, bool), usize> {
    let base = graph_from_clauses(&parse_clauses("(p0)(¬p0)").unwrap(), Vec::new()).unwrap();
    let (a, b) = (base.find("p0").unwrap(), base.find("¬p0").unwrap());
    let g = expand_wires(&base, &[(a, b)], &[2 * m]).unwrap();
    assert!(!g.has_edge(a, b));
    let mut best = BTreeMap::new();
    for mask in 0u64..(1 << g.len()) {
        let bits: Vec<bool> = (0..g.len()).map(|u| mask >> u & 1 == 1).collect();
        if !g.is_independent(&bits) {
            continue;
        }
        let interior = (0..g.len()).filter(|&u| g.is_wire_vertex(u) && bits[u]).count();
        let e = best.entry((bits[a], bits[b])).or_insert(0);
        *e = (*e).max(interior);
    }
    best
}

#[test]
fn criterion_04_wire_fidelity() {
    let start = Instant::now();
    let g15 = builtin("G15").unwrap().graph;
    let exp = builtin("G15Exp").unwrap().graph;
    let (plain, wired) = (solve_mis_exact(&g15).unwrap(), solve_mis_exact(&exp).unwrap());
    let size_ok = wired.size == plain.size + 5;
    let proj_ok = projections(&g15) == projections(&exp);
    let mut penalty_ok = true;
    for m in 1..=4 {
        for (ends, best) in wire_interior_optimum(m) {
            let expect = if ends == (true, true) { m - 1 } else { m };
            penalty_ok &= best == expect;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = size_ok && proj_ok && penalty_ok && elapsed < 60.0;
    let detail = format!(
        "MIS {} vs {} + 5, projections equal {proj_ok}, wire penalty for m <= 4 {penalty_ok}; {elapsed:.2} s",
        wired.size, plain.size
    );
    report(4, "wired graph keeps MIS semantics with a fixed offset", pass, &detail);
    assert!(pass);
}

#[test]
fn criterion_05_layout_windows() {
    let start = Instant::now();
    let g15 = builtin("G15Exp").unwrap().graph;
    let r15 = validate_layout(&g15, &table_points(&g15, G15_EXP_TABLE), 0.0, f64::INFINITY);
    let g35 = builtin("G35Exp").unwrap().graph;
    let table35 = table_points(&g35, G35_EXP_TABLE);
    let literal35 = validate_layout(&g35, &table35, 0.0, f64::INFINITY);
    let aligned = align_layout(&g35, &table35, 0.0, f64::INFINITY);
    let fmt_window = |w: Option<(f64, f64)>| match w {
        Some((lo, hi)) => format!("({lo:.6}, {hi:.6})"),
        None => "empty".to_string(),
    };
    let moved: Vec<String> =
        aligned.iter().flat_map(|a| a.moved.iter().map(|&(u, s)| format!("{}<-{}", g35.label(u), g35.label(s)))).collect();
    let only_duplicates = aligned.as_ref().is_some_and(|a| {
        a.moved.iter().all(|&(u, s)| {
            let (x, y) = (&g35.vertices[u], &g35.vertices[s]);
            x.base == y.base && x.negated == y.negated && !x.is_wire()
        })
    });
    let w35 = aligned.as_ref().and_then(|a| a.report.window);
    let pass = r15.width() > 0.0
        && only_duplicates
        && w35.is_some_and(|(lo, hi)| hi > lo)
        && aligned.as_ref().map(|a| a.coordinates.clone()) == g35.coordinates;
    let detail = format!(
        "G15Exp window {}; G35Exp printed labels {}, after reassigning duplicate occurrences [{}] window {} \
         with {} deferred edges unrealized; {:.3} s",
        fmt_window(r15.window),
        fmt_window(literal35.window),
        moved.join(", "),
        fmt_window(w35),
        aligned.as_ref().map_or(0, |a| a.report.unrealized.len()),
        start.elapsed().as_secs_f64()
    );
    report(5, "experimental layouts admit a blockade-radius window", pass, &detail);
    assert!(pass);
}

fn mask_amplitudes(psi: &StateVector) -> Vec<(Vec<bool>, f64, f64)> {
    (0..psi.basis.len()).map(|k| (psi.basis.bits(k), psi.amplitudes[k].re, psi.amplitudes[k].im)).collect()
}

#[test]
fn criterion_06_ground_state() {
    let g = builtin("G6").unwrap().graph;
    let psi = ground_state(&HamiltonianSpec::blockade(g.clone()), TAU * 3.5).unwrap();
    let targets = [g.parse_ket("|0111;10⟩").unwrap(), g.parse_ket("|1101;01⟩").unwrap()];
    let mut worst: f64 = 0.0;
    for (bits, re, im) in mask_amplitudes(&psi) {
        let want = if targets.contains(&bits) { FRAC_1_SQRT_2 } else { 0.0 };
        worst = worst.max((re - want).hypot(im));
    }
    let pass = worst < 1e-9;
    report(6, "G6 ground state is the equal superposition of the two MIS kets", pass, &format!("max amplitude error {worst:.3e}"));
    assert!(pass);
}

fn g6_final(stretch: f64, dt: f64) -> StateVector {
    let g = builtin("G6").unwrap().graph;
    evolve(&HamiltonianSpec::blockade(g), &sweep_schedule(TAU * 3.5).stretch(stretch), dt).unwrap()
}

fn solution_mass(psi: &StateVector, targets: &[Vec<bool>]) -> f64 {
    (0..psi.basis.len()).filter(|&k| targets.contains(&psi.basis.bits(k))).map(|k| psi.amplitudes[k].norm_sqr()).sum()
}

#[test]
fn criterion_07_adiabatic_sweep() {
    let start = Instant::now();
    let g = builtin("G6").unwrap().graph;
    let targets = vec![g.parse_ket("|0111;10⟩").unwrap(), g.parse_ket("|1101;01⟩").unwrap()];
    let base = g6_final(1.0, 1e-3);
    let probs = base.probabilities();
    let top: Vec<Vec<bool>> = (0..probs.len())
        .sorted_by(|&a, &b| probs[b].total_cmp(&probs[a]))
        .take(2)
        .map(|k| base.basis.bits(k))
        .collect();
    let top_ok = targets.iter().all(|t| top.contains(t));
    let p1 = solution_mass(&base, &targets);
    let p8 = solution_mass(&g6_final(8.0, 1e-3), &targets);
    let half = g6_final(1.0, 5e-4).probabilities();
    let shift = probs.iter().zip(&half).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let pass = top_ok && p1 > 0.5 && p8 > 0.9 && shift < 1e-4;
    let detail = format!(
        "solutions are the two most probable {top_ok}, mass {p1:.6}; stretched x8 {p8:.6}; \
         dt halving shift {shift:.2e}; {:.2} s",
        start.elapsed().as_secs_f64()
    );
    report(7, "adiabatic sweep concentrates on the G6 solutions", pass, &detail);
    assert!(pass);
}

#[test]
fn criterion_08_blockade_subspace_matches_full_space() {
    let g = builtin("G6").unwrap().graph;
    let sched = sweep_schedule(TAU * 3.5);
    let max_detuning = sched
        .segments
        .iter()
        .flat_map(|s| [s.detuning.0.abs(), s.detuning.1.abs()])
        .fold(0.0, f64::max);
    let blockade = evolve(&HamiltonianSpec::blockade(g.clone()), &sched, 1e-3).unwrap().probability_map();
    let full = evolve(&HamiltonianSpec::full(g, 50.0 * max_detuning), &sched, 1e-3).unwrap().probability_map();
    let keys: BTreeSet<&String> = blockade.keys().chain(full.keys()).collect();
    let tv = 0.5
        * keys
            .iter()
            .map(|k| (blockade.get(*k).copied().unwrap_or(0.0) - full.get(*k).copied().unwrap_or(0.0)).abs())
            .sum::<f64>();
    let pass = tv < 0.05;
    report(8, "full-space and blockade distributions agree", pass, &format!("total variation {tv:.3e} with U = 50 max|detuning|"));
    assert!(pass);
}

#[test]
fn criterion_09_decoder_soundness() {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, want) in [("G15", [(3, 5), (5, 3)]), ("G35", [(5, 7), (7, 5)])] {
        let b = builtin(name).unwrap();
        let inst = create_instance(b.n, Some(b.widths)).unwrap();
        let mis = solve_mis_exact(&b.graph).unwrap();
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for set in &mis.sets {
            let d = classify(&b.graph, &b.formula, &inst, &mis.mask_bits(set, b.graph.len()));
            let key = match (d.classification, d.factor_pair) {
                (Classification::Solution, Some((p, q))) if want.contains(&(p, q)) => format!("({p},{q})"),
                (c, pair) => {
                    pass = false;
                    format!("{c:?} {pair:?}")
                }
            };
            *counts.entry(key).or_insert(0) += 1;
        }
        parts.push(format!("{name}: {} maximum sets -> {counts:?}", mis.sets.len()));
    }
    let g = builtin("G15Exp").unwrap();
    let inst = create_instance(15, Some(g.widths)).unwrap();
    // the printed microstate lists logical atoms only, so it is read on the wire-free graph
    let bits = g.graph.strip_wires(&g.graph.parse_ket("|000,1,111,0;1,00,0,10⟩").unwrap());
    let d = classify(&g.graph.unwired(), &g.formula, &inst, &bits);
    let micro_ok = d.classification == Classification::Solution && d.factor_pair == Some((0b101, 0b011));
    pass &= micro_ok;
    parts.push(format!("published G15Exp microstate -> {:?} {:?} (p=101, q=011 expected)", d.classification, d.factor_pair));
    report(9, "ideal MIS samples decode only to factor pairs", pass, &parts.join("; "));
    assert!(pass);
}

#[test]
fn criterion_10_estimator_arithmetic() {
    // (bits, N0, B lower, B upper) evaluated by hand with np = bits / 2
    let table: [(u64, f64, f64, f64); 4] = [
        (4, 8.0, 9.0, 13.0),
        (8, 64.0, 93.0, 117.0),
        (64, 32768.0, 63429.0, 65413.0),
        (2048, 1_073_741_824.0, 2_145_384_453.0, 2_147_479_557.0),
    ];
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let mut worst: f64 = 0.0;
    for (bits, n0, lo, hi) in table {
        let e = estimate(bits).unwrap();
        let nc = 10.0 * n0;
        let natom = 4.88 * (nc.ln() * 1.8).exp();
        for (got, want) in
            [(e.n0, n0), (e.bn_low, lo), (e.bn_high, hi), (e.nc, nc), (e.natom, natom), (e.steps, n0), (e.memory, n0)]
        {
            worst = worst.max(rel(got, want));
        }
    }
    let pass = worst < 1e-6;
    report(10, "resource estimates match hand evaluation", pass, &format!("worst relative error {worst:.2e} over bits 4, 8, 64, 2048"));
    assert!(pass);
}

#[test]
fn criterion_11_seeded_runs_are_byte_identical() {
    let start = Instant::now();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        run_pipeline(&preset("paper-15-exp", d.path()).unwrap()).unwrap();
    }
    let mut parts = Vec::new();
    let mut pass = true;
    for file in ["events.csv", "histogram.csv"] {
        let [a, b] = [0, 1].map(|k| std::fs::read(dirs[k].path().join(file)).unwrap());
        let same = a == b && !a.is_empty();
        pass &= same;
        parts.push(format!("{file} identical {same} ({} bytes)", a.len()));
    }
    report(11, "two seeded paper-15-exp runs agree byte for byte", pass, &format!("{}; {:.1} s", parts.join(", "), start.elapsed().as_secs_f64()));
    assert!(pass);
}
