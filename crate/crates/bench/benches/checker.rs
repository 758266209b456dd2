//! Benchmarks for the hot paths: greatest-simulation computation on a
//! moderate transition system, one probabilistic lifting evaluation,
//! and ingestion of a transition-file document.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hetsim_core::connectors::{connector_holds, ConnectorExpr, EvalCaps};
use hetsim_core::functors::{FunctorKind, FunctorTerm, Ratio};
use hetsim_core::gen::{gen_coalgebra, GenCfg};
use hetsim_core::ioformats::parse_aut;
use hetsim_core::rel::{FinSet, Rel};
use hetsim_core::simulation::greatest_simulation;

fn bench_gsim(c: &mut Criterion) {
    let labels = FinSet::new(["a", "b"]).unwrap();
    let kind = FunctorKind::plts(labels.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let gcfg = GenCfg {
        branching: 4,
        ..GenCfg::default()
    };
    let left = gen_coalgebra(&mut rng, &kind, 24, &gcfg).unwrap();
    let right = gen_coalgebra(&mut rng, &kind, 24, &gcfg).unwrap();
    let expr = ConnectorExpr::Id(kind);
    let caps = EvalCaps::default();
    c.bench_function("gsim_plts_24x24", |b| {
        b.iter(|| {
            greatest_simulation(black_box(&expr), &caps, &left, &right)
                .unwrap()
                .relation
                .card()
        })
    });
}

fn bench_coupling(c: &mut Criterion) {
    let labels = FinSet::new(["a"]).unwrap();
    let kind = FunctorKind::dlts(labels.clone());
    let x = FinSet::numbered("x", 4);
    let y = FinSet::numbered("y", 4);
    let mut r = Rel::empty(&x, &y);
    for i in 0..4u32 {
        for j in 0..4u32 {
            if i <= j {
                r.insert(i, j);
            }
        }
    }
    let quarters = |parts: [(u32, i64); 4]| {
        FunctorTerm::Dlts(
            parts
                .into_iter()
                .filter(|(_, n)| *n > 0)
                .map(|(s, n)| ((0u32, s), Ratio::new(n, 4)))
                .collect(),
        )
    };
    let a = quarters([(0, 1), (1, 1), (2, 1), (3, 1)]);
    let b = quarters([(0, 0), (1, 2), (2, 1), (3, 1)]);
    let expr = ConnectorExpr::Id(kind);
    let caps = EvalCaps::default();
    c.bench_function("coupling_lift_4x4", |bch| {
        bch.iter(|| connector_holds(black_box(&expr), &caps, &r, &a, &b).unwrap())
    });
}

fn bench_parse_aut(c: &mut Criterion) {
    let n = 100;
    let mut text = format!("des (0, {n}, {n})\n");
    for i in 0..n {
        text.push_str(&format!("({i}, \"a\", {})\n", (i + 1) % n));
    }
    c.bench_function("parse_aut_100_states", |b| {
        b.iter(|| parse_aut(black_box(&text), None).unwrap().coalgebra.states().size())
    });
}

criterion_group!(benches, bench_gsim, bench_coupling, bench_parse_aut);
criterion_main!(benches);
