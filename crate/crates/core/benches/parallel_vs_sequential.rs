use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tile_upb::exec::Execution;
use tile_upb::families::{prop2, prop3};
use tile_upb::locc::{build_theorem3_protocol, candidates_for, verify_protocol};
use tile_upb::rect::{enumerate_with, RectConfig};
use tile_upb::state::build_upb;
use tile_upb::verify::{complement_basis, seesaw_search, SeesawConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn seesaw(c: &mut Criterion) {
    let mut g = c.benchmark_group("seesaw_search");
    g.sample_size(10);
    for (m, n) in [(4, 4), (5, 6)] {
        let upb = build_upb(&prop2(m, n).unwrap(), false).unwrap();
        let comp = complement_basis(&upb.bipartite_states()).unwrap();
        for (name, execution) in MODES {
            let cfg = SeesawConfig {
                restarts: 64,
                execution,
                ..SeesawConfig::default()
            };
            g.bench_with_input(BenchmarkId::new(name, format!("{m}x{n}")), &comp, |b, comp| {
                b.iter(|| black_box(seesaw_search(comp, &cfg).best_overlap))
            });
        }
    }
    g.finish();
}

fn rectangles(c: &mut Criterion) {
    let mut g = c.benchmark_group("special_rectangles");
    for (label, ts) in [
        ("prop2_8x8", prop2(8, 8).unwrap()),
        ("prop3_7_14", prop3(7, 14).unwrap()),
    ] {
        for (name, execution) in MODES {
            let cfg = RectConfig {
                execution,
                ..RectConfig::default()
            };
            g.bench_with_input(BenchmarkId::new(name, label), &ts, |b, ts| {
                b.iter(|| black_box(enumerate_with(ts, &cfg).unwrap().len()))
            });
        }
    }
    g.finish();
}

fn discrimination(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify_protocol");
    g.sample_size(10);
    let (m, n) = (6, 8);
    let upb = build_upb(&prop2(m, n).unwrap(), true).unwrap();
    let p = build_theorem3_protocol(m, n).unwrap();
    let cands = candidates_for(&upb, p.resource_dim);
    for (name, execution) in MODES {
        g.bench_function(BenchmarkId::new(name, format!("{m}x{n}")), |b| {
            b.iter(|| black_box(verify_protocol(&p, &cands, execution).unwrap().pass))
        });
    }
    g.finish();
}

criterion_group!(benches, seesaw, rectangles, discrimination);
criterion_main!(benches);
