//! The law suite at reduced sizes: every group must pass, and repeated
//! runs with one seed must agree byte for byte.

use hetsim_core::laws::{catalog, run_all, LawCfg};

fn small() -> LawCfg {
    LawCfg {
        cases: 6,
        max_states: 2,
        ..LawCfg::default()
    }
}

#[test]
fn catalog_nodes_are_well_kinded() {
    let nodes = catalog().expect("catalog builds");
    assert!(nodes.len() >= 20, "catalog has {} nodes", nodes.len());
    for e in &nodes {
        e.kinds().expect("catalog node has endpoint kinds");
    }
}

#[test]
fn suite_passes_at_small_sizes() {
    let reports = run_all(&small());
    assert_eq!(reports.len(), 18);
    let mut bad = Vec::new();
    for rep in &reports {
        assert!(rep.cases > 0, "{} ran no checks", rep.name);
        if !rep.ok() {
            bad.push(format!("{rep}"));
        }
    }
    assert!(bad.is_empty(), "failing groups:\n{}", bad.join("\n"));
}

#[test]
fn suite_is_deterministic() {
    let once: Vec<String> = run_all(&small()).iter().map(|r| r.to_string()).collect();
    let twice: Vec<String> = run_all(&small()).iter().map(|r| r.to_string()).collect();
    assert_eq!(once, twice);
}
