//! Greatest-fixpoint similarity and bisimilarity between coalgebras of
//! possibly different kinds, driven by a connector expression.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::connectors::{connector_holds, ConnectorExpr, EvalCaps};
use crate::err::{Error, Result};
use crate::functors::{enumerate_terms, Coalgebra, EnumCfg, FunctorTerm};
use crate::rel::{FinSet, Rel};

/// Result of a greatest-fixpoint computation, with enough structure to
/// replay every removal: `rounds[k]` is the relation at the start of
/// round `k`, and `removed_at` maps a deleted pair to the round whose
/// start relation it was checked against.
#[derive(Clone, Debug)]
pub struct SimResult {
    pub relation: Rel,
    pub rounds: Vec<Rel>,
    pub removed_at: BTreeMap<(u32, u32), usize>,
}

fn check_kinds(expr: &ConnectorExpr, c: &Coalgebra, d: &Coalgebra) -> Result<()> {
    let (f, g) = expr.kinds()?;
    if c.kind() != &f {
        return Err(Error::KindMismatch {
            context: "left system".into(),
            expected: f.to_string(),
            got: c.kind().to_string(),
        });
    }
    if d.kind() != &g {
        return Err(Error::KindMismatch {
            context: "right system".into(),
            expected: g.to_string(),
            got: d.kind().to_string(),
        });
    }
    Ok(())
}

/// Checks the transfer condition of `r` pair by pair; returns the first
/// violating pair in row-major order, or `None` if `r` is a simulation.
pub fn is_simulation(
    expr: &ConnectorExpr,
    caps: &EvalCaps,
    c: &Coalgebra,
    d: &Coalgebra,
    r: &Rel,
) -> Result<Option<(u32, u32)>> {
    check_kinds(expr, c, d)?;
    if !r.src().same(c.states()) || !r.dst().same(d.states()) {
        return Err(Error::CarrierMismatch {
            context: "simulation candidate".into(),
            expected: format!("{} / {}", c.states(), d.states()),
            got: format!("{} / {}", r.src(), r.dst()),
        });
    }
    for (x, y) in r.pairs() {
        if !connector_holds(expr, caps, r, c.gamma(x), d.gamma(y))? {
            return Ok(Some((x, y)));
        }
    }
    Ok(None)
}

/// The greatest simulation, by removal iteration from the full relation.
/// Each round checks every surviving pair against the round-start
/// relation, so the sequence of rounds is deterministic.
pub fn greatest_simulation(
    expr: &ConnectorExpr,
    caps: &EvalCaps,
    c: &Coalgebra,
    d: &Coalgebra,
) -> Result<SimResult> {
    check_kinds(expr, c, d)?;
    iterate(c, d, |r, x, y| {
        connector_holds(expr, caps, r, c.gamma(x), d.gamma(y))
    })
}

/// The greatest relation that is a simulation in both readings: `r` for
/// the connector and its converse for the same connector. Requires both
/// systems to share one kind.
pub fn greatest_bisimulation(
    expr: &ConnectorExpr,
    caps: &EvalCaps,
    c: &Coalgebra,
    d: &Coalgebra,
) -> Result<SimResult> {
    check_kinds(expr, c, d)?;
    let (f, g) = expr.kinds()?;
    if f != g {
        return Err(Error::KindMismatch {
            context: "bisimulation requires matching endpoint kinds".into(),
            expected: f.to_string(),
            got: g.to_string(),
        });
    }
    iterate(c, d, |r, x, y| {
        Ok(connector_holds(expr, caps, r, c.gamma(x), d.gamma(y))?
            && connector_holds(expr, caps, &r.converse(), d.gamma(y), c.gamma(x))?)
    })
}

fn iterate(
    c: &Coalgebra,
    d: &Coalgebra,
    keep: impl Fn(&Rel, u32, u32) -> Result<bool>,
) -> Result<SimResult> {
    let mut r = Rel::full(c.states(), d.states());
    let mut rounds = Vec::new();
    let mut removed_at = BTreeMap::new();
    loop {
        let snapshot = r.clone();
        let round = rounds.len();
        rounds.push(snapshot.clone());
        let mut removed_any = false;
        for (x, y) in snapshot.pairs() {
            if !keep(&snapshot, x, y)? {
                r.remove(x, y);
                removed_at.insert((x, y), round);
                removed_any = true;
            }
        }
        if !removed_any {
            break;
        }
    }
    Ok(SimResult {
        relation: r,
        rounds,
        removed_at,
    })
}

/// How to search for a counterexample to a connector inequality.
#[derive(Clone, Debug)]
pub enum LeqMode {
    /// Every relation between the carriers and every term pair.
    Exhaustive,
    /// Seeded random relations and term pairs.
    Sampled { cases: usize, seed: u64 },
}

/// A witness that the inequality fails: the left connector relates the
/// terms over `r` but the right one does not.
#[derive(Clone, Debug)]
pub struct LeqCounterexample {
    pub r: Rel,
    pub a: FunctorTerm,
    pub b: FunctorTerm,
}

/// Certifies `l <= k` pointwise over all relations between the two
/// carriers, or reports a counterexample. Both connectors must share
/// endpoint kinds.
pub fn connector_leq_on(
    l: &ConnectorExpr,
    k: &ConnectorExpr,
    caps: &EvalCaps,
    x: &FinSet,
    z: &FinSet,
    mode: &LeqMode,
    cfg: &EnumCfg,
) -> Result<Option<LeqCounterexample>> {
    let (f1, g1) = l.kinds()?;
    let (f2, g2) = k.kinds()?;
    if f1 != f2 || g1 != g2 {
        return Err(Error::KindMismatch {
            context: "connector inequality".into(),
            expected: format!("{f1} -> {g1}"),
            got: format!("{f2} -> {g2}"),
        });
    }
    let src_terms = enumerate_terms(&f1, x.size(), cfg)?;
    let dst_terms = enumerate_terms(&g1, z.size(), cfg)?;
    let bits = x.size() * z.size();
    if matches!(mode, LeqMode::Exhaustive) && bits > 20 {
        return Err(Error::CapExceeded {
            what: "exhaustive relation space".into(),
            needs: 1u128 << bits,
            cap: 1 << 20,
        });
    }
    let rel_from_mask = |mask: u64| {
        let mut r = Rel::empty(x, z);
        for i in 0..bits {
            if mask & (1 << i) != 0 {
                r.insert((i / z.size()) as u32, (i % z.size()) as u32);
            }
        }
        r
    };
    let check_rel = |r: &Rel,
                     pairs: &mut dyn Iterator<Item = (usize, usize)>|
     -> Result<Option<LeqCounterexample>> {
        for (i, j) in pairs {
            let a = &src_terms[i];
            let b = &dst_terms[j];
            if connector_holds(l, caps, r, a, b)? && !connector_holds(k, caps, r, a, b)? {
                return Ok(Some(LeqCounterexample {
                    r: r.clone(),
                    a: a.clone(),
                    b: b.clone(),
                }));
            }
        }
        Ok(None)
    };
    match mode {
        LeqMode::Exhaustive => {
            for mask in 0u64..(1u64 << bits) {
                let r = rel_from_mask(mask);
                let mut pairs = (0..src_terms.len())
                    .flat_map(|i| (0..dst_terms.len()).map(move |j| (i, j)));
                if let Some(ce) = check_rel(&r, &mut pairs)? {
                    return Ok(Some(ce));
                }
            }
            Ok(None)
        }
        LeqMode::Sampled { cases, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for _ in 0..*cases {
                let raw: u64 = rng.gen();
                let mask = if bits >= 64 { raw } else { raw & ((1u64 << bits) - 1) };
                let r = rel_from_mask(mask);
                let i = rng.gen_range(0..src_terms.len());
                let j = rng.gen_range(0..dst_terms.len());
                let mut pairs = std::iter::once((i, j));
                if let Some(ce) = check_rel(&r, &mut pairs)? {
                    return Ok(Some(ce));
                }
            }
            Ok(None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liftings::{LambdaRel, Lifting};
    use crate::rel::FinSet;
    use crate::FunctorKind;

    fn two_lts() -> (Coalgebra, Coalgebra) {
        // c: x0 -a-> x1, x0 -a-> x0 ; d: y0 -a-> y0
        let kind = FunctorKind::plts(FinSet::new(["a"]).unwrap());
        let c = Coalgebra::new(
            kind.clone(),
            FinSet::numbered("x", 2),
            vec![
                FunctorTerm::Plts([(0u32, 0u32), (0, 1)].into()),
                FunctorTerm::Plts([].into()),
            ],
        )
        .unwrap();
        let d = Coalgebra::new(
            kind,
            FinSet::numbered("y", 1),
            vec![FunctorTerm::Plts([(0u32, 0u32)].into())],
        )
        .unwrap();
        (c, d)
    }

    #[test]
    fn greatest_simulation_is_a_simulation_and_maximal() {
        let (c, d) = two_lts();
        let kind = c.kind().clone();
        let lam = LambdaRel::new(
            kind.clone(),
            kind,
            vec![(Lifting::Dia("a".into()), Lifting::Dia("a".into()))],
        )
        .unwrap();
        let expr = ConnectorExpr::Kant(lam);
        let caps = EvalCaps::default();
        let res = greatest_simulation(&expr, &caps, &c, &d).unwrap();
        assert!(is_simulation(&expr, &caps, &c, &d, &res.relation)
            .unwrap()
            .is_none());
        // brute force maximality over all relations
        let bits = 2 * 1;
        for mask in 0u64..(1 << bits) {
            let mut r = Rel::empty(c.states(), d.states());
            for i in 0..bits {
                if mask & (1 << i) != 0 {
                    r.insert((i / 1) as u32, (i % 1) as u32);
                }
            }
            if is_simulation(&expr, &caps, &c, &d, &r).unwrap().is_none() {
                assert!(r.is_subset(&res.relation).unwrap());
            }
        }
    }

    #[test]
    fn bisimulation_refines_simulation() {
        let (c, d) = two_lts();
        let kind = c.kind().clone();
        let lam = LambdaRel::new(
            kind.clone(),
            kind,
            vec![(Lifting::Dia("a".into()), Lifting::Dia("a".into()))],
        )
        .unwrap();
        let expr = ConnectorExpr::Kant(lam);
        let caps = EvalCaps::default();
        let sim = greatest_simulation(&expr, &caps, &c, &d).unwrap();
        let bis = greatest_bisimulation(&expr, &caps, &c, &d).unwrap();
        assert!(bis.relation.is_subset(&sim.relation).unwrap());
    }

    #[test]
    fn leq_exhaustive_finds_strictness() {
        // forward-only lifting is strictly below nothing here: compare
        // Lf with Id on step sets; Id also demands the backward clause,
        // so Lf <= Id must FAIL and Id <= Lf must hold.
        let labels = FinSet::new(["a"]).unwrap();
        let lf = ConnectorExpr::Lf(labels.clone());
        let id = ConnectorExpr::Id(FunctorKind::plts(labels));
        let caps = EvalCaps::default();
        let x = FinSet::numbered("x", 2);
        let z = FinSet::numbered("z", 2);
        let cfg = EnumCfg::default();
        let ce = connector_leq_on(&lf, &id, &caps, &x, &z, &LeqMode::Exhaustive, &cfg).unwrap();
        assert!(ce.is_some());
        let ok = connector_leq_on(&id, &lf, &caps, &x, &z, &LeqMode::Exhaustive, &cfg).unwrap();
        assert!(ok.is_none());
    }

    #[test]
    fn simulation_composes_along_composite_connector() {
        // a K-simulation followed by an L-simulation composes to an
        // L.K-simulation
        let labels = FinSet::new(["a"]).unwrap();
        let kind = FunctorKind::plts(labels.clone());
        let lf = ConnectorExpr::Lf(labels.clone());
        let c = Coalgebra::new(
            kind.clone(),
            FinSet::numbered("x", 2),
            vec![
                FunctorTerm::Plts([(0u32, 1u32)].into()),
                FunctorTerm::Plts([].into()),
            ],
        )
        .unwrap();
        let d = Coalgebra::new(
            kind.clone(),
            FinSet::numbered("y", 2),
            vec![
                FunctorTerm::Plts([(0u32, 1u32), (0, 0)].into()),
                FunctorTerm::Plts([(0u32, 1u32)].into()),
            ],
        )
        .unwrap();
        let e = Coalgebra::new(
            kind,
            FinSet::numbered("z", 1),
            vec![FunctorTerm::Plts([(0u32, 0u32)].into())],
        )
        .unwrap();
        let caps = EvalCaps::default();
        let r1 = greatest_simulation(&lf, &caps, &c, &d).unwrap().relation;
        let r2 = greatest_simulation(&lf, &caps, &d, &e).unwrap().relation;
        let composite = r1.then(&r2).unwrap();
        let comp_expr = ConnectorExpr::Comp(Box::new(lf.clone()), Box::new(lf.clone()));
        assert!(
            is_simulation(&comp_expr, &caps, &c, &e, &composite)
                .unwrap()
                .is_none(),
            "composite relation must pass the composite connector"
        );
    }

    #[test]
    fn morphism_graph_is_a_simulation() {
        // quotient map on a 4-state system: graph passes the identity
        // connector
        let labels = FinSet::new(["a"]).unwrap();
        let kind = FunctorKind::plts(labels);
        let c = Coalgebra::new(
            kind.clone(),
            FinSet::numbered("x", 4),
            vec![
                FunctorTerm::Plts([(0u32, 1u32)].into()),
                FunctorTerm::Plts([(0u32, 2u32), (0, 3)].into()),
                FunctorTerm::Plts([].into()),
                FunctorTerm::Plts([].into()),
            ],
        )
        .unwrap();
        // quotient identifying x2 and x3
        let d = Coalgebra::new(
            kind.clone(),
            FinSet::numbered("q", 3),
            vec![
                FunctorTerm::Plts([(0u32, 1u32)].into()),
                FunctorTerm::Plts([(0u32, 2u32)].into()),
                FunctorTerm::Plts([].into()),
            ],
        )
        .unwrap();
        let f = crate::rel::Map::from_pairs(
            c.states(),
            d.states(),
            &[("x0", "q0"), ("x1", "q1"), ("x2", "q2"), ("x3", "q2")],
        )
        .unwrap();
        let expr = ConnectorExpr::Id(kind);
        let caps = EvalCaps::default();
        assert!(
            is_simulation(&expr, &caps, &c, &d, &f.graph())
                .unwrap()
                .is_none()
        );
    }
}
