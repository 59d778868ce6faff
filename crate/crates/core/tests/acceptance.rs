//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! non-zero if any fails.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};
use tile_upb::exec::{map_indexed, Execution};
use tile_upb::families::{all_tilings, example1, fig2, five_tile, prop2, prop3, random_tiling};
use tile_upb::locc::{build_lemma1_protocol, build_theorem3_protocol, candidates_for, verify_protocol};
use tile_upb::ppt::ppt_report;
use tile_upb::rect::{extension_witness, is_u_tile, Axis};
use tile_upb::state::{build_upb, ProductState};
use tile_upb::verify::{check_orthogonal_set, complement_basis, relative_residual, seesaw_search, SeesawConfig};
use tile_upb::{validate, TileStructure};

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn seesaw_default() -> SeesawConfig {
    SeesawConfig::default()
}

fn complement_of(ts: &TileStructure) -> Vec<tile_upb::BipartiteState> {
    let upb = build_upb(ts, false).unwrap();
    complement_basis(&upb.bipartite_states()).unwrap()
}

fn example1_reproduction() -> Outcome {
    let upb = build_upb(&example1(), true).unwrap();
    let states = upb.bipartite_states();
    let ortho = check_orthogonal_set(&states, 1e-12).unwrap();
    let comp = complement_basis(&states).unwrap();
    let search = seesaw_search(&comp, &seesaw_default());
    let pass = upb.len() == 11 && ortho.max_off_diagonal < 1e-12 && comp.len() == 5 && search.best_overlap < 1.0 - 1e-3;
    ok(
        pass,
        format!(
            "size {}, max |<i|j>| {:.2e}, complement {}, seesaw best {:.6}",
            upb.len(),
            ortho.max_off_diagonal,
            comp.len(),
            search.best_overlap
        ),
    )
}

fn parallel_up_to_scalar(p: &ProductState, q: &ProductState) -> bool {
    let (a, b) = (p.to_state(), q.to_state());
    let ip: Complex64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum();
    (ip.norm() / (a.norm_sqr() * b.norm_sqr()).sqrt() - 1.0).abs() < 1e-12
}

fn fig2_refutation() -> Outcome {
    let ts = fig2();
    let verdict = is_u_tile(&ts).unwrap();
    let Some(w) = verdict.witness.clone() else {
        return ok(false, "no witness");
    };
    let witness_ok = !verdict.is_u_tile && w.rectangle.tile_ids == vec![1, 2] && w.axis == Axis::Column;
    let psi = extension_witness(&ts, &verdict).unwrap();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let expected = ProductState::new(vec![one, zero, zero, zero], vec![one, one, -one, -one]).unwrap();
    let shape_ok = parallel_up_to_scalar(&psi, &expected);
    let comp = complement_of(&ts);
    let residual = relative_residual(&comp, &psi.to_state());
    let search = seesaw_search(&comp, &seesaw_default());
    let pass = witness_ok && shape_ok && residual < 1e-12 && search.best_overlap > 1.0 - 1e-9;
    ok(
        pass,
        format!(
            "witness {:?} on {:?}, state matches: {shape_ok}, residual {residual:.2e}, seesaw |1-best| {:.2e}",
            w.rectangle.tile_ids,
            w.axis,
            (1.0 - search.best_overlap).abs()
        ),
    )
}

fn prop2_table() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for m in 3..=8 {
        for n in m..=10 {
            let ts = prop2(m, n).unwrap();
            let size = build_upb(&ts, false).unwrap().len();
            let want = m * n - 4 * ((m - 1) / 2);
            if !validate(&ts).is_valid() || !is_u_tile(&ts).unwrap().is_u_tile || size != want {
                failures.push(format!("({m},{n})"));
            }
            checked += 1;
        }
    }
    ok(
        failures.is_empty(),
        format!("{checked} instances, failures: {failures:?}"),
    )
}

fn prop3_coverage() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for m in 4..=7 {
        for t in 5..=2 * m {
            let ts = prop3(m, t).unwrap();
            let size = build_upb(&ts, false).unwrap().len();
            if ts.tile_count() != t || !is_u_tile(&ts).unwrap().is_u_tile || size != m * m - t + 1 {
                failures.push(format!("prop3({m},{t})"));
            }
            checked += 1;
        }
    }
    for m in 3..=8 {
        for n in m..=8 {
            let ts = five_tile(m, n).unwrap();
            let size = build_upb(&ts, false).unwrap().len();
            if !validate(&ts).is_valid() || !is_u_tile(&ts).unwrap().is_u_tile || size != m * n - 4 {
                failures.push(format!("five_tile({m},{n})"));
            }
            checked += 1;
        }
    }
    ok(
        failures.is_empty(),
        format!("{checked} instances, failures: {failures:?}"),
    )
}

fn theorem1_sweep() -> Outcome {
    let mut structures = all_tilings(3, 3, 6);
    let exhaustive = structures.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    structures.extend((0..200).map(|_| random_tiling(4, 4, &mut rng)));
    // Restarts inside each search run sequentially; structures run in parallel.
    let cfg = SeesawConfig {
        execution: Execution::Sequential,
        ..seesaw_default()
    };
    let rows = map_indexed(structures.len(), Execution::Parallel, |i| {
        let ts = &structures[i];
        let u_tile = is_u_tile(ts).unwrap().is_u_tile;
        let best = seesaw_search(&complement_of(ts), &cfg).best_overlap;
        let agree = if u_tile { best < 1.0 - 1e-3 } else { best > 1.0 - 1e-6 };
        (u_tile, best, agree)
    });
    let disagreements: Vec<String> = rows
        .iter()
        .zip(&structures)
        .filter(|(r, _)| !r.2)
        .map(|(r, ts)| format!("u_tile={} best={:.6} grid={:?}", r.0, r.1, ts.cell_map()))
        .collect();
    let u_count = rows.iter().filter(|r| r.0).count();
    let max_u = rows.iter().filter(|r| r.0).map(|r| r.1).fold(0.0, f64::max);
    let min_non = rows.iter().filter(|r| !r.0).map(|r| r.1).fold(1.0, f64::min);
    ok(
        disagreements.is_empty(),
        format!(
            "{exhaustive} exhaustive 3x3 + 200 random 4x4; {u_count} U-tile (max overlap {max_u:.6}), \
             non-U-tile max |1-overlap| {:.2e}; disagreements: {disagreements:?}",
            (1.0 - min_non).abs()
        ),
    )
}

fn family_instances_up_to_49() -> Vec<(String, TileStructure)> {
    let mut out = vec![("example1".to_string(), example1())];
    for m in 3..=7 {
        for n in m..=49 / m {
            out.push((format!("prop2({m},{n})"), prop2(m, n).unwrap()));
            out.push((format!("five_tile({m},{n})"), five_tile(m, n).unwrap()));
        }
    }
    for m in 4..=7 {
        for t in 5..=2 * m {
            out.push((format!("prop3({m},{t})"), prop3(m, t).unwrap()));
        }
    }
    out
}

fn ppt_suite() -> Outcome {
    let instances = family_instances_up_to_49();
    let rows = map_indexed(instances.len(), Execution::Parallel, |i| {
        let (name, ts) = &instances[i];
        let r = ppt_report(&build_upb(ts, true).unwrap()).unwrap();
        let s = ts.tile_count();
        let pass = (r.trace - 1.0).abs() <= 1e-12
            && r.rank == s - 1
            && r.eigenvalue_gap.is_some_and(|g| g >= 1e-8)
            && r.min_eigenvalue >= -1e-10
            && r.min_eigenvalue_pt >= -1e-10;
        (name.clone(), pass, r.min_eigenvalue_pt)
    });
    let failures: Vec<&String> = rows.iter().filter(|r| !r.1).map(|r| &r.0).collect();
    let worst_pt = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    ok(
        failures.is_empty(),
        format!(
            "{} instances, min eig of partial transpose {worst_pt:.2e}, failures: {failures:?}",
            rows.len()
        ),
    )
}

fn lemma1_discrimination() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for n in 4..=6 {
        let upb = build_upb(&prop2(4, n).unwrap(), true).unwrap();
        let p = build_lemma1_protocol(n).unwrap();
        let r = verify_protocol(&p, &candidates_for(&upb, 2), Execution::Parallel).unwrap();
        let this = r.pass
            && r.max_completeness_defect <= 1e-12
            && r.states.len() == 4 * n - 4
            && (r.min_success_probability - 1.0).abs() <= 1e-9;
        pass &= this;
        parts.push(format!(
            "n={n}: {} states, min p {:.12}",
            r.states.len(),
            r.min_success_probability
        ));
    }
    ok(pass, parts.join("; "))
}

fn theorem3_discrimination() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (m, n) in [(4, 4), (4, 6), (6, 6), (6, 8)] {
        let upb = build_upb(&prop2(m, n).unwrap(), true).unwrap();
        let p = build_theorem3_protocol(m, n).unwrap();
        let r = verify_protocol(&p, &candidates_for(&upb, p.resource_dim), Execution::Parallel).unwrap();
        let this = r.pass && p.resource_dim == m.div_ceil(2) && (r.min_success_probability - 1.0).abs() <= 1e-9;
        pass &= this;
        parts.push(format!(
            "({m},{n}) d={}: {} states, min p {:.12}",
            p.resource_dim,
            r.states.len(),
            r.min_success_probability
        ));
    }
    ok(pass, parts.join("; "))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("Example 1 reproduction", Duration::from_secs(5), example1_reproduction),
        ("non-U-tile refutation", Duration::from_secs(5), fig2_refutation),
        ("ring family size table", Duration::from_secs(30), prop2_table),
        ("t-tile family coverage", Duration::from_secs(60), prop3_coverage),
        (
            "U-tile vs seesaw equivalence sweep",
            Duration::from_secs(600),
            theorem1_sweep,
        ),
        ("PPT state spectra", Duration::from_secs(60), ppt_suite),
        (
            "four-row discrimination",
            Duration::from_secs(60),
            lemma1_discrimination,
        ),
        (
            "even-m discrimination",
            Duration::from_secs(300),
            theorem3_discrimination,
        ),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed < *budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {} [{}] {}: {:.2}s (budget {}s) -- {}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            name,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            out.detail
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
