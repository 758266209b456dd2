//! Seeded random generation of systems, terms, and relations for law
//! suites and the self-test command. All generation is driven by a
//! caller-supplied RNG, so fixed seeds give byte-identical artifacts.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::connectors::{ConnectorExpr, NatTrans};
use crate::err::Result;
use crate::functors::{Coalgebra, FunctorKind, FunctorTerm, Ratio};
use crate::liftings::Lifting;
use crate::rel::{FinSet, Rel};

/// Tuning knobs for random generation.
#[derive(Clone, Debug)]
pub struct GenCfg {
    /// Upper bound on outgoing edges per state for nondeterministic
    /// kinds.
    pub branching: usize,
    /// Fixed denominator for probabilistic weights.
    pub denominator: i64,
    /// Probability that an optional transition is present.
    pub density: f64,
}

impl Default for GenCfg {
    fn default() -> Self {
        GenCfg {
            branching: 3,
            denominator: 4,
            density: 0.4,
        }
    }
}

/// A random term of the kind over a carrier of `n` states.
pub fn gen_term(rng: &mut impl Rng, kind: &FunctorKind, n: usize, cfg: &GenCfg) -> FunctorTerm {
    assert!(n > 0, "carrier must be non-empty");
    let n = n as u32;
    match kind {
        FunctorKind::Plts { labels } => {
            let la = labels.size() as u32;
            let mut set = BTreeSet::new();
            if la > 0 {
                let edges = rng.gen_range(0..=cfg.branching);
                for _ in 0..edges {
                    set.insert((rng.gen_range(0..la), rng.gen_range(0..n)));
                }
            }
            FunctorTerm::Plts(set)
        }
        FunctorKind::Dlts { labels } => {
            let la = labels.size() as u32;
            assert!(la > 0, "probabilistic kind needs labels");
            let d = cfg.denominator.max(1);
            let pairs = (la as usize) * (n as usize);
            let support = rng.gen_range(1..=pairs.min(d as usize));
            let mut chosen: BTreeSet<(u32, u32)> = BTreeSet::new();
            while chosen.len() < support {
                chosen.insert((rng.gen_range(0..la), rng.gen_range(0..n)));
            }
            // Distribute `d` units, at least one per support point.
            let mut units = vec![1i64; chosen.len()];
            for _ in 0..(d - chosen.len() as i64) {
                let i = rng.gen_range(0..units.len());
                units[i] += 1;
            }
            let map: BTreeMap<(u32, u32), Ratio> = chosen
                .into_iter()
                .zip(units)
                .map(|(k, u)| (k, Ratio::new(u, d)))
                .collect();
            FunctorTerm::Dlts(map)
        }
        FunctorKind::Det { labels } => {
            let la = labels.size() as u32;
            assert!(la > 0, "deterministic kind needs labels");
            FunctorTerm::Det(rng.gen_range(0..la), rng.gen_range(0..n))
        }
        FunctorKind::Susp { inputs, outputs } => {
            let mut inp = BTreeMap::new();
            for l in inputs.indices() {
                if rng.gen_bool(cfg.density) {
                    inp.insert(l, rng.gen_range(0..n));
                }
            }
            let out = gen_outputs(rng, outputs, n, cfg);
            FunctorTerm::Susp { inp, out }
        }
        FunctorKind::SuspIe { inputs, outputs } => {
            let mut inp = BTreeMap::new();
            for l in inputs.indices() {
                inp.insert(l, rng.gen_range(0..n));
            }
            let out = gen_outputs(rng, outputs, n, cfg);
            FunctorTerm::Susp { inp, out }
        }
        FunctorKind::Pair(k1, k2) => FunctorTerm::Pair(
            Box::new(gen_term(rng, k1, n as usize, cfg)),
            Box::new(gen_term(rng, k2, n as usize, cfg)),
        ),
    }
}

fn gen_outputs(
    rng: &mut impl Rng,
    outputs: &FinSet,
    n: u32,
    cfg: &GenCfg,
) -> BTreeMap<u32, u32> {
    assert!(!outputs.is_empty(), "suspension kind needs outputs");
    let mut out = BTreeMap::new();
    for l in outputs.indices() {
        if rng.gen_bool(cfg.density) {
            out.insert(l, rng.gen_range(0..n));
        }
    }
    if out.is_empty() {
        // Suspension terms must not block: force one output.
        let l = rng.gen_range(0..outputs.size() as u32);
        out.insert(l, rng.gen_range(0..n));
    }
    out
}

/// A random coalgebra of the kind with `n` states named `s0..`.
pub fn gen_coalgebra(
    rng: &mut impl Rng,
    kind: &FunctorKind,
    n: usize,
    cfg: &GenCfg,
) -> Result<Coalgebra> {
    let states = FinSet::numbered("s", n);
    let trans = (0..n).map(|_| gen_term(rng, kind, n, cfg)).collect();
    Coalgebra::new(kind.clone(), states, trans)
}

/// A random relation with the given density.
pub fn gen_rel(rng: &mut impl Rng, src: &FinSet, dst: &FinSet, density: f64) -> Rel {
    let mut r = Rel::empty(src, dst);
    for i in src.indices() {
        for j in dst.indices() {
            if rng.gen_bool(density) {
                r.insert(i, j);
            }
        }
    }
    r
}

/// A random subset of each possible (label, label) pair.
pub fn gen_label_rel(rng: &mut impl Rng, src: &FinSet, dst: &FinSet, density: f64) -> Rel {
    gen_rel(rng, src, dst, density)
}

/// The unary liftings that evaluate on terms of this kind, in a fixed
/// order.
pub fn unary_lifts(kind: &FunctorKind) -> Vec<Lifting> {
    let mut out = Vec::new();
    match kind {
        FunctorKind::Plts { labels } | FunctorKind::Det { labels } => {
            for l in labels.names() {
                out.push(Lifting::Dia(l.to_string()));
                out.push(Lifting::Box(l.to_string()));
            }
        }
        FunctorKind::Dlts { labels } => {
            for l in labels.names() {
                out.push(Lifting::PGe(l.to_string(), Ratio::new(1, 2)));
                out.push(Lifting::PGe(l.to_string(), Ratio::new(1, 4)));
                out.push(Lifting::PLt(l.to_string(), Ratio::new(1, 2)));
            }
        }
        FunctorKind::Susp { inputs, outputs } | FunctorKind::SuspIe { inputs, outputs } => {
            for l in inputs.names().iter().chain(outputs.names()) {
                out.push(Lifting::Dia(l.to_string()));
                out.push(Lifting::Box(l.to_string()));
            }
        }
        FunctorKind::Pair(..) => {}
    }
    out
}

/// The nullary liftings that evaluate on terms of this kind.
pub fn nullary_lifts(kind: &FunctorKind) -> Vec<Lifting> {
    let mut out = Vec::new();
    if let FunctorKind::Susp { inputs, outputs } | FunctorKind::SuspIe { inputs, outputs } = kind
    {
        for l in inputs.names().iter().chain(outputs.names()) {
            out.push(Lifting::Down(l.to_string()));
            out.push(Lifting::Def(l.to_string()));
        }
    }
    out
}

/// A random Kantorovich pair family between the kinds, or `None` when
/// no arity-matched pairs exist.
pub fn gen_lambda(
    rng: &mut impl Rng,
    f: &FunctorKind,
    g: &FunctorKind,
) -> Option<crate::liftings::LambdaRel> {
    let mut menus = Vec::new();
    let (uf, ug) = (unary_lifts(f), unary_lifts(g));
    if !uf.is_empty() && !ug.is_empty() {
        menus.push((uf, ug));
    }
    let (zf, zg) = (nullary_lifts(f), nullary_lifts(g));
    if !zf.is_empty() && !zg.is_empty() {
        menus.push((zf, zg));
    }
    if menus.is_empty() {
        return None;
    }
    let mut pairs = Vec::new();
    for _ in 0..rng.gen_range(1..=2usize) {
        let (mf, mg) = &menus[rng.gen_range(0..menus.len())];
        pairs.push((
            mf[rng.gen_range(0..mf.len())].clone(),
            mg[rng.gen_range(0..mg.len())].clone(),
        ));
    }
    crate::liftings::LambdaRel::new(f.clone(), g.clone(), pairs).ok()
}

fn gen_leaf(rng: &mut impl Rng, f: &FunctorKind, g: &FunctorKind) -> Option<ConnectorExpr> {
    let mut options: Vec<ConnectorExpr> = Vec::new();
    if f == g {
        options.push(ConnectorExpr::Id(f.clone()));
    }
    if let (FunctorKind::Plts { labels: la }, FunctorKind::Plts { labels: lb }) = (f, g) {
        let r = gen_rel(rng, la, lb, 0.6);
        options.push(ConnectorExpr::Kr(r.clone()));
        options.push(ConnectorExpr::Lr(r));
        if la.same(lb) {
            options.push(ConnectorExpr::Lf(la.clone()));
        }
    }
    if let (FunctorKind::Det { labels: la }, FunctorKind::Plts { labels: lb }) = (f, g) {
        if la.same(lb) {
            options.push(ConnectorExpr::Lt(la.clone()));
        }
    }
    if let (
        FunctorKind::Susp { inputs, outputs },
        FunctorKind::SuspIe {
            inputs: i2,
            outputs: o2,
        },
    ) = (f, g)
    {
        if inputs.same(i2) && outputs.same(o2) {
            options.push(ConnectorExpr::Ioco {
                inputs: inputs.clone(),
                outputs: outputs.clone(),
            });
        }
    }
    if let Some(lam) = gen_lambda(rng, f, g) {
        options.push(ConnectorExpr::Kant(lam));
    }
    if options.is_empty() {
        if let (FunctorKind::Pair(f1, f2), FunctorKind::Pair(g1, g2)) = (f, g) {
            let a = gen_expr(rng, f1, g1, 0)?;
            let b = gen_expr(rng, f2, g2, 0)?;
            return Some(ConnectorExpr::Prod(Box::new(a), Box::new(b)));
        }
        return None;
    }
    let i = rng.gen_range(0..options.len());
    Some(options.swap_remove(i))
}

fn gen_pull_left(
    rng: &mut impl Rng,
    f: &FunctorKind,
    g: &FunctorKind,
    depth: usize,
) -> Option<ConnectorExpr> {
    let (nat, cod) = gen_nat_from(rng, f)?;
    let inner = gen_expr(rng, &cod, g, depth - 1)?;
    Some(ConnectorExpr::PullLeft(Box::new(inner), nat))
}

fn gen_pull_right(
    rng: &mut impl Rng,
    f: &FunctorKind,
    g: &FunctorKind,
    depth: usize,
) -> Option<ConnectorExpr> {
    let (nat, cod) = gen_nat_from(rng, g)?;
    let inner = gen_expr(rng, f, &cod, depth - 1)?;
    Some(ConnectorExpr::PullRight(Box::new(inner), nat))
}

/// A random natural transformation whose domain is `dom`, together
/// with its codomain kind.
fn gen_nat_from(rng: &mut impl Rng, dom: &FunctorKind) -> Option<(NatTrans, FunctorKind)> {
    match dom {
        FunctorKind::Det { labels } => Some((NatTrans::Incl, FunctorKind::plts(labels.clone()))),
        FunctorKind::Plts { labels } => {
            let other = FinSet::new(["p", "q"]).unwrap();
            if rng.gen_bool(0.5) {
                let r = gen_rel(rng, labels, &other, 0.6);
                Some((NatTrans::Relabel(r), FunctorKind::plts(other)))
            } else {
                let r = gen_rel(rng, &other, labels, 0.6);
                Some((NatTrans::RelabelConv(r), FunctorKind::plts(other)))
            }
        }
        FunctorKind::Pair(k1, k2) => {
            if rng.gen_bool(0.5) {
                Some((NatTrans::Proj1(k1.clone(), k2.clone()), *k1.clone()))
            } else {
                Some((NatTrans::Proj2(k1.clone(), k2.clone()), *k2.clone()))
            }
        }
        _ => None,
    }
}

/// A random connector expression with endpoint kinds `(f, g)` and at
/// most `depth` nested combinators. Returns `None` when no connector
/// exists in the menu for this kind pair.
pub fn gen_expr(
    rng: &mut impl Rng,
    f: &FunctorKind,
    g: &FunctorKind,
    depth: usize,
) -> Option<ConnectorExpr> {
    if depth == 0 {
        return gen_leaf(rng, f, g);
    }
    let built = match rng.gen_range(0..6u32) {
        0 => gen_expr(rng, g, f, depth - 1).map(|e| ConnectorExpr::Conv(Box::new(e))),
        1 => match (gen_expr(rng, f, g, depth - 1), gen_expr(rng, f, g, depth - 1)) {
            (Some(a), Some(b)) => Some(ConnectorExpr::Meet(Box::new(a), Box::new(b))),
            _ => None,
        },
        2 => {
            let mid = if rng.gen_bool(0.5) { f.clone() } else { g.clone() };
            match (
                gen_expr(rng, &mid, g, depth - 1),
                gen_expr(rng, f, &mid, depth - 1),
            ) {
                (Some(k), Some(l)) => Some(ConnectorExpr::Comp(Box::new(k), Box::new(l))),
                _ => None,
            }
        }
        3 => match (f, g) {
            (FunctorKind::Pair(f1, f2), FunctorKind::Pair(g1, g2)) => {
                match (
                    gen_expr(rng, f1, g1, depth - 1),
                    gen_expr(rng, f2, g2, depth - 1),
                ) {
                    (Some(a), Some(b)) => Some(ConnectorExpr::Prod(Box::new(a), Box::new(b))),
                    _ => None,
                }
            }
            _ => None,
        },
        4 => gen_pull_left(rng, f, g, depth),
        _ => gen_pull_right(rng, f, g, depth),
    };
    built.or_else(|| gen_leaf(rng, f, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functors::term_validate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_artifacts_validate_and_are_deterministic() {
        let labels = FinSet::new(["a", "b"]).unwrap();
        let inputs = FinSet::new(["i"]).unwrap();
        let outputs = FinSet::new(["o", "delta"]).unwrap();
        let kinds = vec![
            FunctorKind::plts(labels.clone()),
            FunctorKind::dlts(labels.clone()),
            FunctorKind::det(labels.clone()).unwrap(),
            FunctorKind::susp(inputs.clone(), outputs.clone()).unwrap(),
            FunctorKind::susp_ie(inputs.clone(), outputs.clone()).unwrap(),
            FunctorKind::pair(
                FunctorKind::plts(labels.clone()),
                FunctorKind::dlts(labels.clone()),
            ),
        ];
        let cfg = GenCfg::default();
        for kind in &kinds {
            let mut r1 = ChaCha8Rng::seed_from_u64(11);
            let mut r2 = ChaCha8Rng::seed_from_u64(11);
            for n in 1..=4usize {
                let c1 = gen_coalgebra(&mut r1, kind, n, &cfg).unwrap();
                let c2 = gen_coalgebra(&mut r2, kind, n, &cfg).unwrap();
                assert_eq!(c1.terms(), c2.terms(), "determinism for {kind:?}");
                for t in c1.terms() {
                    term_validate(kind, t, n).unwrap();
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = gen_rel(&mut rng, &labels, &labels, 0.5);
        assert!(r.card() <= 4);
    }

    #[test]
    fn generated_expressions_have_requested_kinds_and_evaluate() {
        let labels = FinSet::new(["a", "b"]).unwrap();
        let inputs = FinSet::new(["i"]).unwrap();
        let outputs = FinSet::new(["o", "delta"]).unwrap();
        let pool = vec![
            FunctorKind::plts(labels.clone()),
            FunctorKind::dlts(labels.clone()),
            FunctorKind::det(labels.clone()).unwrap(),
            FunctorKind::susp(inputs.clone(), outputs.clone()).unwrap(),
            FunctorKind::susp_ie(inputs.clone(), outputs.clone()).unwrap(),
            FunctorKind::pair(
                FunctorKind::plts(labels.clone()),
                FunctorKind::dlts(labels.clone()),
            ),
        ];
        let caps = crate::connectors::EvalCaps::default();
        let cfg = GenCfg::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for round in 0..144 {
            let f = &pool[round % pool.len()];
            let g = &pool[(round / pool.len()) % pool.len()];
            let depth = round % 4;
            let Some(expr) = gen_expr(&mut rng, f, g, depth) else {
                // Pair kinds have no cross-kind leaf, so mixed
                // pair/non-pair endpoints may be infeasible.
                let mixed = matches!(f, FunctorKind::Pair(..)) != matches!(g, FunctorKind::Pair(..));
                assert!(mixed, "no expression for feasible pair {f:?} / {g:?}");
                continue;
            };
            let (kf, kg) = expr.kinds().unwrap();
            assert_eq!(&kf, f, "left kind of {expr:?}");
            assert_eq!(&kg, g, "right kind of {expr:?}");
            let x = FinSet::numbered("x", 2);
            let y = FinSet::numbered("y", 3);
            let r = gen_rel(&mut rng, &x, &y, 0.5);
            let a = gen_term(&mut rng, f, 2, &cfg);
            let b = gen_term(&mut rng, g, 3, &cfg);
            crate::connectors::connector_holds(&expr, &caps, &r, &a, &b)
                .unwrap_or_else(|e| panic!("evaluating {expr:?}: {e}"));
        }
    }
}
