//! Executable law suite. Every function here checks one family of
//! algebraic laws at a size chosen by [`LawCfg`] and reports how many
//! cases ran together with any counterexamples. The self-test command,
//! the integration tests, and the acceptance suite all drive these same
//! checks at different sizes, so a law has a single implementation no
//! matter where it is exercised.

use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::connectors::{connector_holds, weak_saturate, ConnectorExpr, EvalCaps, NatTrans};
use crate::err::Result;
use crate::functors::{
    enumerate_terms, fmap_vec, term_display, Coalgebra, EnumCfg, FunctorKind, FunctorTerm, Ratio,
};
use crate::gen::{gen_coalgebra, gen_expr, gen_rel, gen_term, GenCfg};
use crate::ioformats::{
    elaborate_connector, parse_aut, parse_chc, parse_connector, parse_relation, serialize_chc,
    serialize_connector, write_relation,
};
use crate::liftings::{InnerSkel, LambdaRel, Lifting, PosSkel};
use crate::logic::{distinguishing_formula_from, eval_formula, parse_formula, Formula, FormulaNode, SideTag};
use crate::oracle::{
    barr_set, formula_enum_theory, ioco_oracle, shared_trace_oracle, weak_sim_oracle,
    ComposeBrute, FormulaTheory,
};
use crate::rel::{FinSet, Map, Rel};
use crate::simulation::{
    connector_leq_on, greatest_bisimulation, greatest_simulation, is_simulation, LeqMode,
    SimResult,
};

/// Default seed for the law suite; the self-test command prints it.
pub const DEFAULT_SEED: u64 = 1729;

/// How many counterexamples and notes a report keeps verbatim.
const KEPT_EXAMPLES: usize = 6;

/// Size knobs for a law-suite run. `cases` counts seeded instances per
/// sampled law (derived laws scale from it), `max_states` bounds the
/// carriers that exhaustive laws enumerate.
#[derive(Clone, Debug)]
pub struct LawCfg {
    pub seed: u64,
    pub cases: usize,
    pub max_states: usize,
    pub caps: EvalCaps,
}

impl Default for LawCfg {
    fn default() -> Self {
        LawCfg {
            seed: DEFAULT_SEED,
            cases: 20,
            max_states: 3,
            caps: EvalCaps::default(),
        }
    }
}

impl LawCfg {
    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt)
    }

    /// Scales a size bound that means `full` at the default
    /// `max_states` of 3.
    fn scaled(&self, full: usize) -> usize {
        ((full * self.max_states) / 3).max(1)
    }

    fn carrier_cap(&self, full: usize) -> usize {
        self.max_states.clamp(1, full)
    }
}

/// Outcome of one law check: counts plus bounded counterexample and
/// note lists. `failure_count` is exact even when examples are dropped.
#[derive(Clone, Debug)]
pub struct LawReport {
    pub name: &'static str,
    pub cases: usize,
    pub failure_count: usize,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl LawReport {
    pub fn new(name: &'static str) -> LawReport {
        LawReport {
            name,
            cases: 0,
            failure_count: 0,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn ok(&self) -> bool {
        self.failure_count == 0
    }

    pub fn fail(&mut self, msg: String) {
        self.failure_count += 1;
        if self.failures.len() < KEPT_EXAMPLES {
            self.failures.push(msg);
        }
    }

    pub fn note(&mut self, msg: String) {
        if self.notes.len() < KEPT_EXAMPLES {
            self.notes.push(msg);
        }
    }

}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            write!(f, "{}: ok ({} checks)", self.name, self.cases)?;
        } else {
            write!(
                f,
                "{}: FAILED ({} of {} checks)",
                self.name, self.failure_count, self.cases
            )?;
        }
        for msg in &self.failures {
            write!(f, "\n    counterexample: {msg}")?;
        }
        for msg in &self.notes {
            write!(f, "\n    note: {msg}")?;
        }
        Ok(())
    }
}

fn rel_str(r: &Rel) -> String {
    let pairs: Vec<String> = r
        .named_pairs()
        .into_iter()
        .map(|(a, b)| format!("{a}~{b}"))
        .collect();
    format!("{{{}}}", pairs.join(", "))
}

fn rel_from_mask(x: &FinSet, z: &FinSet, mask: u64) -> Rel {
    let mut r = Rel::empty(x, z);
    let nz = z.size();
    for i in 0..x.size() * nz {
        if mask & (1 << i) != 0 {
            r.insert((i / nz) as u32, (i % nz) as u32);
        }
    }
    r
}

fn all_rels(x: &FinSet, z: &FinSet) -> Vec<Rel> {
    let bits = x.size() * z.size();
    assert!(bits <= 16, "exhaustive relation space too large");
    (0u64..(1 << bits)).map(|m| rel_from_mask(x, z, m)).collect()
}

fn letters(names: &[&str], n: usize) -> FinSet {
    FinSet::new(names[..n].to_vec()).expect("fixed alphabet")
}

// ---------------------------------------------------------------------
// Shared small vocabulary for catalogs
// ---------------------------------------------------------------------

fn dia(l: &str) -> Lifting {
    Lifting::Dia(l.into())
}

fn boxl(l: &str) -> Lifting {
    Lifting::Box(l.into())
}

fn pge(l: &str, num: i64, den: i64) -> Lifting {
    Lifting::PGe(l.into(), Ratio::new(num, den))
}

fn kant(f: &FunctorKind, g: &FunctorKind, pairs: Vec<(Lifting, Lifting)>) -> Result<ConnectorExpr> {
    Ok(ConnectorExpr::Kant(LambdaRel::new(
        f.clone(),
        g.clone(),
        pairs,
    )?))
}

struct Vocab {
    ab: FinSet,
    pq: FinSet,
    ins: FinSet,
    outs: FinSet,
    plts: FunctorKind,
    dlts: FunctorKind,
    det: FunctorKind,
    susp: FunctorKind,
    suspie: FunctorKind,
}

fn vocab() -> Result<Vocab> {
    let ab = FinSet::new(["a", "b"])?;
    let pq = FinSet::new(["p", "q"])?;
    let ins = FinSet::new(["i"])?;
    let outs = FinSet::new(["o", "delta"])?;
    Ok(Vocab {
        plts: FunctorKind::plts(ab.clone()),
        dlts: FunctorKind::dlts(ab.clone()),
        det: FunctorKind::det(ab.clone())?,
        susp: FunctorKind::susp(ins.clone(), outs.clone())?,
        suspie: FunctorKind::susp_ie(ins.clone(), outs.clone())?,
        ab,
        pq,
        ins,
        outs,
    })
}

/// One concrete connector per grammar node and lifting family: the
/// fixed part of the axiom checks.
pub fn catalog() -> Result<Vec<ConnectorExpr>> {
    let v = vocab()?;
    let pairk = FunctorKind::pair(v.plts.clone(), v.dlts.clone());
    let plts_pq = FunctorKind::plts(v.pq.clone());
    let r1 = Rel::from_pairs(&v.ab, &v.ab, &[("a", "a"), ("a", "b")])?;
    let rdiag = Rel::diagonal(&v.ab);
    let r_ab_pq = Rel::from_pairs(&v.ab, &v.pq, &[("a", "p"), ("b", "q"), ("b", "p")])?;
    let r_ab_pq2 = Rel::from_pairs(&v.ab, &v.pq, &[("a", "p"), ("b", "q")])?;
    let wl = FinSet::new(["a", "tau"])?;
    let pos_left = Lifting::Pos(PosSkel::Ap(
        Box::new(dia("a")),
        vec![InnerSkel::Ph(0)],
    ));
    let pos_right = Lifting::Pos(PosSkel::Or(
        Box::new(PosSkel::Ap(Box::new(dia("a")), vec![InnerSkel::Ph(0)])),
        Box::new(PosSkel::Ap(Box::new(dia("b")), vec![InnerSkel::Ph(0)])),
    ));
    Ok(vec![
        ConnectorExpr::Id(v.plts.clone()),
        ConnectorExpr::Id(v.dlts.clone()),
        ConnectorExpr::Id(v.det.clone()),
        ConnectorExpr::Id(v.susp.clone()),
        ConnectorExpr::Id(v.suspie.clone()),
        ConnectorExpr::Id(pairk),
        kant(
            &v.plts,
            &v.plts,
            vec![(dia("a"), dia("a")), (dia("b"), dia("b"))],
        )?,
        kant(
            &v.plts,
            &v.plts,
            vec![(dia("a"), dia("a")), (boxl("a"), boxl("a"))],
        )?,
        kant(
            &v.plts,
            &v.dlts,
            vec![(dia("a"), pge("a", 1, 2)), (dia("b"), pge("b", 1, 2))],
        )?,
        kant(&v.dlts, &v.dlts, vec![(pge("a", 1, 2), pge("a", 1, 4))])?,
        kant(&v.plts, &v.plts, vec![(Lifting::BigDia, Lifting::BigDia)])?,
        kant(&v.det, &v.plts, vec![(Lifting::BigBox, Lifting::BigBox)])?,
        kant(
            &v.susp,
            &v.suspie,
            vec![(dia("i"), dia("i")), (boxl("o"), boxl("o"))],
        )?,
        kant(
            &v.susp,
            &v.susp,
            vec![
                (Lifting::Down("o".into()), Lifting::Down("o".into())),
                (Lifting::Def("i".into()), Lifting::Def("i".into())),
            ],
        )?,
        kant(&v.plts, &v.plts, vec![(pos_left, pos_right)])?,
        ConnectorExpr::Kr(r1.clone()),
        ConnectorExpr::Lr(r1.clone()),
        ConnectorExpr::Lf(v.ab.clone()),
        ConnectorExpr::Lt(v.ab.clone()),
        ConnectorExpr::Ioco {
            inputs: v.ins.clone(),
            outputs: v.outs.clone(),
        },
        ConnectorExpr::Weak {
            labels: wl,
            tau: "tau".into(),
        },
        ConnectorExpr::Comp(
            Box::new(ConnectorExpr::Lr(rdiag)),
            Box::new(ConnectorExpr::Lr(r1.clone())),
        ),
        ConnectorExpr::Conv(Box::new(ConnectorExpr::Kr(r1.clone()))),
        ConnectorExpr::Meet(
            Box::new(ConnectorExpr::Kr(r1.clone())),
            Box::new(ConnectorExpr::Lr(r1.clone())),
        ),
        ConnectorExpr::Prod(
            Box::new(ConnectorExpr::Id(v.plts.clone())),
            Box::new(ConnectorExpr::Id(v.dlts.clone())),
        ),
        ConnectorExpr::PullLeft(
            Box::new(ConnectorExpr::Id(plts_pq.clone())),
            NatTrans::Relabel(r_ab_pq),
        ),
        ConnectorExpr::PullRight(
            Box::new(ConnectorExpr::Id(v.plts.clone())),
            NatTrans::RelabelConv(r_ab_pq2),
        ),
        ConnectorExpr::PullLeft(Box::new(ConnectorExpr::Lr(r1)), NatTrans::Incl),
    ])
}

/// The catalog plus `count` seeded random compound expressions.
pub fn catalog_and_compounds(
    cfg: &LawCfg,
    rng: &mut ChaCha8Rng,
    count: usize,
) -> Result<Vec<ConnectorExpr>> {
    let _ = cfg;
    let v = vocab()?;
    let pool = vec![
        v.plts.clone(),
        v.dlts.clone(),
        v.det.clone(),
        v.susp.clone(),
        v.suspie.clone(),
        FunctorKind::pair(v.plts.clone(), v.dlts.clone()),
    ];
    let mut out = catalog()?;
    let mut made = 0usize;
    let mut attempts = 0usize;
    while made < count && attempts < count * 20 {
        attempts += 1;
        let f = &pool[rng.gen_range(0..pool.len())];
        let g = &pool[rng.gen_range(0..pool.len())];
        let depth = rng.gen_range(1..=3usize);
        if let Some(e) = gen_expr(rng, f, g, depth) {
            out.push(e);
            made += 1;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Criterion: identity lifting equals the enumerated Barr lifting
// ---------------------------------------------------------------------

fn barr_agreement(
    rep: &mut LawReport,
    kind: &FunctorKind,
    nx: usize,
    nz: usize,
    caps: &EvalCaps,
) -> Result<()> {
    let x = FinSet::numbered("x", nx);
    let z = FinSet::numbered("z", nz);
    let ecfg = EnumCfg::default();
    let tx = enumerate_terms(kind, nx, &ecfg)?;
    let tz = enumerate_terms(kind, nz, &ecfg)?;
    let id = ConnectorExpr::Id(kind.clone());
    let bits = nx * nz;
    for mask in 0u64..(1 << bits) {
        let r = rel_from_mask(&x, &z, mask);
        let enumerated = barr_set(kind, &r, &ecfg)?;
        for a in &tx {
            for c in &tz {
                let lifted = connector_holds(&id, caps, &r, a, c)?;
                let brute = enumerated.contains(&(a.clone(), c.clone()));
                rep.cases += 1;
                if lifted != brute {
                    rep.fail(format!(
                        "{kind} at r={}: a={}, c={}: lift says {lifted}, enumeration says {brute}",
                        rel_str(&r),
                        term_display(kind, a, &x),
                        term_display(kind, c, &z),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// The step-set identity connector agrees with the enumerated relation
/// lifting on every relation over small carriers.
pub fn law_egli_milner(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("egli-milner-barr");
    let cap = cfg.carrier_cap(3);
    for la in 1..=2usize {
        let kind = FunctorKind::plts(letters(&["a", "b"], la));
        for nx in 1..=cap {
            for nz in 1..=cap {
                barr_agreement(&mut rep, &kind, nx, nz, &cfg.caps)?;
            }
        }
    }
    Ok(rep)
}

/// The probabilistic identity connector (coupling search by max-flow)
/// agrees with exhaustive coupling enumeration at denominator 4.
pub fn law_coupling(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("coupling-barr");
    let cap = cfg.carrier_cap(2);
    for la in 1..=2usize {
        let kind = FunctorKind::dlts(letters(&["a", "b"], la));
        for nx in 1..=cap {
            for nz in 1..=cap {
                barr_agreement(&mut rep, &kind, nx, nz, &cfg.caps)?;
            }
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------
// Criterion: monotonicity and pointwise naturality
// ---------------------------------------------------------------------

/// Monotonicity: growing the relation can only grow the lifted
/// relation, for every catalog node and seeded compound expressions.
pub fn law_monotonicity(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("monotonicity");
    let mut rng = cfg.rng(0xA1);
    let gcfg = GenCfg::default();
    let exprs = catalog_and_compounds(cfg, &mut rng, cfg.cases * 2)?;
    for expr in &exprs {
        let (f, g) = expr.kinds()?;
        for _ in 0..6 {
            let nx = rng.gen_range(1..=cfg.carrier_cap(3));
            let ny = rng.gen_range(1..=cfg.carrier_cap(3));
            let x = FinSet::numbered("x", nx);
            let y = FinSet::numbered("y", ny);
            let big = gen_rel(&mut rng, &x, &y, 0.7);
            let mut small = big.clone();
            for (i, j) in big.pairs() {
                if rng.gen_bool(0.4) {
                    small.remove(i, j);
                }
            }
            let a = gen_term(&mut rng, &f, nx, &gcfg);
            let b = gen_term(&mut rng, &g, ny, &gcfg);
            rep.cases += 1;
            let at_small = connector_holds(expr, &cfg.caps, &small, &a, &b)?;
            if at_small && !connector_holds(expr, &cfg.caps, &big, &a, &b)? {
                rep.fail(format!(
                    "{expr:?} holds at {} but not at the larger {}",
                    rel_str(&small),
                    rel_str(&big),
                ));
            }
        }
    }
    Ok(rep)
}

/// Pointwise naturality: pulling the relation back along functions on
/// both carriers commutes with renaming inside the terms.
pub fn law_naturality(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("naturality");
    let mut rng = cfg.rng(0xA2);
    let gcfg = GenCfg::default();
    let exprs = catalog_and_compounds(cfg, &mut rng, cfg.cases * 2)?;
    for expr in &exprs {
        let (f, g) = expr.kinds()?;
        for _ in 0..6 {
            let cap = cfg.carrier_cap(3);
            let nx1 = rng.gen_range(1..=cap);
            let nx = rng.gen_range(1..=cap);
            let ny1 = rng.gen_range(1..=cap);
            let ny = rng.gen_range(1..=cap);
            let x1 = FinSet::numbered("u", nx1);
            let x = FinSet::numbered("x", nx);
            let y1 = FinSet::numbered("v", ny1);
            let y = FinSet::numbered("y", ny);
            let fi: Vec<u32> = (0..nx1).map(|_| rng.gen_range(0..nx as u32)).collect();
            let gi: Vec<u32> = (0..ny1).map(|_| rng.gen_range(0..ny as u32)).collect();
            let fmapn = Map::new(&x1, &x, fi.clone())?;
            let gmapn = Map::new(&y1, &y, gi.clone())?;
            let r = gen_rel(&mut rng, &x, &y, 0.5);
            let pulled = fmapn.graph().then(&r)?.then(&gmapn.graph().converse())?;
            let a1 = gen_term(&mut rng, &f, nx1, &gcfg);
            let b1 = gen_term(&mut rng, &g, ny1, &gcfg);
            let a = fmap_vec(&a1, &fi)?;
            let b = fmap_vec(&b1, &gi)?;
            rep.cases += 1;
            let lhs = connector_holds(expr, &cfg.caps, &pulled, &a1, &b1)?;
            let rhs = connector_holds(expr, &cfg.caps, &r, &a, &b)?;
            if lhs != rhs {
                rep.fail(format!(
                    "{expr:?}: pulled-back {} disagrees with image reading at {} ({} vs {})",
                    rel_str(&pulled),
                    rel_str(&r),
                    lhs,
                    rhs,
                ));
            }
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------
// Criterion: identity and associativity of composition
// ---------------------------------------------------------------------

fn sample_connectors() -> Result<Vec<ConnectorExpr>> {
    let v = vocab()?;
    let r_ab = Rel::from_pairs(&v.ab, &v.ab, &[("a", "a"), ("b", "a")])?;
    Ok(vec![
        ConnectorExpr::Kr(r_ab.clone()),
        ConnectorExpr::Lr(r_ab),
        ConnectorExpr::Lt(v.ab.clone()),
        kant(
            &v.plts,
            &v.plts,
            vec![(dia("a"), dia("a")), (boxl("b"), boxl("b"))],
        )?,
        kant(&v.plts, &v.dlts, vec![(dia("a"), pge("a", 1, 2))])?,
    ])
}

/// Composing with the identity connector on either side changes
/// nothing, checked against the brute-force composition search.
pub fn law_comp_identity(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("composition-identity");
    let n = cfg.carrier_cap(2);
    let ecfg = EnumCfg::default();
    for l in sample_connectors()? {
        let (f, g) = l.kinds()?;
        let x = FinSet::numbered("x", n);
        let z = FinSet::numbered("z", n);
        let tx = enumerate_terms(&f, n, &ecfg)?;
        let tz = enumerate_terms(&g, n, &ecfg)?;
        let idf = ConnectorExpr::Id(f.clone());
        let idg = ConnectorExpr::Id(g.clone());
        let l_eval =
            |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| connector_holds(&l, &cfg.caps, r, a, b);
        let idf_eval =
            |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| connector_holds(&idf, &cfg.caps, r, a, b);
        let idg_eval =
            |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| connector_holds(&idg, &cfg.caps, r, a, b);
        let left_id = ComposeBrute {
            inner: &l_eval,
            outer: &idg_eval,
            mid_kind: g.clone(),
            cap: cfg.caps.middle_cap,
        };
        let right_id = ComposeBrute {
            inner: &idf_eval,
            outer: &l_eval,
            mid_kind: f.clone(),
            cap: cfg.caps.middle_cap,
        };
        for r in all_rels(&x, &z) {
            let li = left_id.compose_matrix(&r, &tx, &tz)?;
            let ri = right_id.compose_matrix(&r, &tx, &tz)?;
            for (i, a) in tx.iter().enumerate() {
                for (j, b) in tz.iter().enumerate() {
                    let direct = l_eval(&r, a, b)?;
                    rep.cases += 2;
                    if li[i][j] != direct {
                        rep.fail(format!(
                            "id.{l:?} at r={}: brute {} vs direct {} (a={}, b={})",
                            rel_str(&r),
                            li[i][j],
                            direct,
                            term_display(&f, a, &x),
                            term_display(&g, b, &z),
                        ));
                    }
                    if ri[i][j] != direct {
                        rep.fail(format!(
                            "{l:?}.id at r={}: brute {} vs direct {} (a={}, b={})",
                            rel_str(&r),
                            ri[i][j],
                            direct,
                            term_display(&f, a, &x),
                            term_display(&g, b, &z),
                        ));
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Associativity of composition, checked by nesting the brute-force
/// search both ways around.
pub fn law_comp_assoc(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("composition-associativity");
    let v = vocab()?;
    let r1 = Rel::from_pairs(&v.ab, &v.ab, &[("a", "a"), ("a", "b")])?;
    let r2 = Rel::from_pairs(&v.ab, &v.ab, &[("b", "b"), ("a", "b")])?;
    // Chains M : F -> G, K : G -> H, L : H -> I.
    let chains: Vec<(ConnectorExpr, ConnectorExpr, ConnectorExpr)> = vec![
        (
            ConnectorExpr::Lr(r1.clone()),
            ConnectorExpr::Kr(r2.clone()),
            ConnectorExpr::Lf(v.ab.clone()),
        ),
        (
            ConnectorExpr::Lt(v.ab.clone()),
            ConnectorExpr::Lr(r1.clone()),
            kant(&v.plts, &v.dlts, vec![(dia("a"), pge("a", 1, 2))])?,
        ),
    ];
    let n = cfg.carrier_cap(2);
    let ecfg = EnumCfg::default();
    let mut rng = cfg.rng(0xA3);
    for (m, k, l) in &chains {
        let (f, gk) = m.kinds()?;
        let (_, hk) = k.kinds()?;
        let (_, ik) = l.kinds()?;
        let x = FinSet::numbered("x", n);
        let w = FinSet::numbered("w", n);
        let tx = enumerate_terms(&f, n, &ecfg)?;
        let tw = enumerate_terms(&ik, n, &ecfg)?;
        let m_eval =
            |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| connector_holds(m, &cfg.caps, r, a, b);
        let k_eval =
            |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| connector_holds(k, &cfg.caps, r, a, b);
        let l_eval =
            |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| connector_holds(l, &cfg.caps, r, a, b);
        let km = ComposeBrute {
            inner: &m_eval,
            outer: &k_eval,
            mid_kind: gk.clone(),
            cap: cfg.caps.middle_cap,
        };
        let km_eval =
            |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| km.compose_couniv(r, a, b);
        let left_assoc = ComposeBrute {
            inner: &km_eval,
            outer: &l_eval,
            mid_kind: hk.clone(),
            cap: cfg.caps.middle_cap,
        };
        let lk = ComposeBrute {
            inner: &k_eval,
            outer: &l_eval,
            mid_kind: hk.clone(),
            cap: cfg.caps.middle_cap,
        };
        let lk_eval =
            |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| lk.compose_couniv(r, a, b);
        let right_assoc = ComposeBrute {
            inner: &m_eval,
            outer: &lk_eval,
            mid_kind: gk.clone(),
            cap: cfg.caps.middle_cap,
        };
        for r in all_rels(&x, &w) {
            for _ in 0..8 {
                let a = &tx[rng.gen_range(0..tx.len())];
                let d = &tw[rng.gen_range(0..tw.len())];
                rep.cases += 1;
                let la = left_assoc.compose_couniv(&r, a, d)?;
                let ra = right_assoc.compose_couniv(&r, a, d)?;
                if la != ra {
                    rep.fail(format!(
                        "(L.K).M={la} but L.(K.M)={ra} at r={} (a={}, d={})",
                        rel_str(&r),
                        term_display(&f, a, &x),
                        term_display(&ik, d, &w),
                    ));
                }
            }
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------
// Criterion: converse algebra
// ---------------------------------------------------------------------

/// `(L.K)~ = K~.L~` and involution of the converse, pointwise.
pub fn law_converse(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("converse-algebra");
    let v = vocab()?;
    let r1 = Rel::from_pairs(&v.ab, &v.ab, &[("a", "a"), ("a", "b")])?;
    // Pairs K : F -> G, L : G -> H.
    let pairs: Vec<(ConnectorExpr, ConnectorExpr)> = vec![
        (ConnectorExpr::Kr(r1.clone()), ConnectorExpr::Lr(r1.clone())),
        (
            kant(&v.plts, &v.dlts, vec![(dia("a"), pge("a", 1, 2))])?,
            ConnectorExpr::Id(v.dlts.clone()),
        ),
        (ConnectorExpr::Lt(v.ab.clone()), ConnectorExpr::Kr(r1.clone())),
        (
            ConnectorExpr::Ioco {
                inputs: v.ins.clone(),
                outputs: v.outs.clone(),
            },
            ConnectorExpr::Conv(Box::new(ConnectorExpr::Ioco {
                inputs: v.ins.clone(),
                outputs: v.outs.clone(),
            })),
        ),
    ];
    let n = cfg.carrier_cap(2);
    let ecfg = EnumCfg::default();
    let mut rng = cfg.rng(0xA4);
    for (kc, lc) in &pairs {
        let (f, _) = kc.kinds()?;
        let (_, h) = lc.kinds()?;
        let lhs = ConnectorExpr::Conv(Box::new(ConnectorExpr::Comp(
            Box::new(lc.clone()),
            Box::new(kc.clone()),
        )));
        let rhs = ConnectorExpr::Comp(
            Box::new(ConnectorExpr::Conv(Box::new(kc.clone()))),
            Box::new(ConnectorExpr::Conv(Box::new(lc.clone()))),
        );
        let wset = FinSet::numbered("w", n);
        let xset = FinSet::numbered("x", n);
        let tb = enumerate_terms(&h, n, &ecfg)?;
        let ta = enumerate_terms(&f, n, &ecfg)?;
        for r in all_rels(&wset, &xset) {
            for _ in 0..6 {
                let b = &tb[rng.gen_range(0..tb.len())];
                let a = &ta[rng.gen_range(0..ta.len())];
                rep.cases += 1;
                let lv = connector_holds(&lhs, &cfg.caps, &r, b, a)?;
                let rv = connector_holds(&rhs, &cfg.caps, &r, b, a)?;
                if lv != rv {
                    rep.fail(format!(
                        "(L.K)~ = {lv} but K~.L~ = {rv} at r={} (b={}, a={})",
                        rel_str(&r),
                        term_display(&h, b, &wset),
                        term_display(&f, a, &xset),
                    ));
                }
            }
        }
    }
    // Involution on a catalog sample.
    for e in catalog()? {
        let (f, g) = e.kinds()?;
        let twice = ConnectorExpr::Conv(Box::new(ConnectorExpr::Conv(Box::new(e.clone()))));
        let gcfg = GenCfg::default();
        for _ in 0..4 {
            let nx = rng.gen_range(1..=n);
            let ny = rng.gen_range(1..=n);
            let x = FinSet::numbered("x", nx);
            let y = FinSet::numbered("y", ny);
            let r = gen_rel(&mut rng, &x, &y, 0.5);
            let a = gen_term(&mut rng, &f, nx, &gcfg);
            let b = gen_term(&mut rng, &g, ny, &gcfg);
            rep.cases += 1;
            let once = connector_holds(&e, &cfg.caps, &r, &a, &b)?;
            let back = connector_holds(&twice, &cfg.caps, &r, &a, &b)?;
            if once != back {
                rep.fail(format!("double converse of {e:?} differs at {}", rel_str(&r)));
            }
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------
// Criterion: Kantorovich functoriality
// ---------------------------------------------------------------------

/// Lax functoriality of lifting families: composing Kantorovich
/// connectors is below the Kantorovich connector of the composed
/// family, and the converse is the Kantorovich connector of the
/// dualized transposed family (exactly).
pub fn law_kant_functorial(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("kantorovich-functorial");
    let v = vocab()?;
    // (Lambda : F -> G, Theta : G -> H) with syntactically matching
    // middles, so the composed family is non-empty.
    let lam1 = LambdaRel::new(
        v.plts.clone(),
        v.plts.clone(),
        vec![(dia("a"), dia("a")), (dia("b"), dia("b"))],
    )?;
    let th1 = LambdaRel::new(
        v.plts.clone(),
        v.dlts.clone(),
        vec![(dia("a"), pge("a", 1, 2)), (dia("b"), pge("b", 1, 2))],
    )?;
    let lam2 = LambdaRel::new(
        v.plts.clone(),
        v.plts.clone(),
        vec![(dia("a"), dia("a")), (boxl("a"), boxl("a"))],
    )?;
    let th2 = lam2.clone();
    let lam3 = LambdaRel::new(
        v.susp.clone(),
        v.susp.clone(),
        vec![
            (dia("i"), dia("i")),
            (Lifting::Down("o".into()), Lifting::Down("o".into())),
        ],
    )?;
    let th3 = LambdaRel::new(v.susp.clone(), v.susp.clone(), vec![(dia("i"), dia("i"))])?;
    let families = vec![(lam1, th1), (lam2, th2), (lam3, th3)];
    let gcfg = GenCfg::default();
    let mut rng = cfg.rng(0xA5);
    let nmax = cfg.carrier_cap(3);
    for (lam, th) in &families {
        let comp_family = lam.then(th)?;
        let comp_expr = ConnectorExpr::Comp(
            Box::new(ConnectorExpr::Kant(th.clone())),
            Box::new(ConnectorExpr::Kant(lam.clone())),
        );
        let closed = ConnectorExpr::Kant(comp_family);
        for _ in 0..cfg.cases.max(8) {
            let nx = rng.gen_range(1..=nmax);
            let nz = rng.gen_range(1..=nmax);
            let x = FinSet::numbered("x", nx);
            let z = FinSet::numbered("z", nz);
            let r = gen_rel(&mut rng, &x, &z, 0.5);
            let a = gen_term(&mut rng, lam.src_kind(), nx, &gcfg);
            let b = gen_term(&mut rng, th.dst_kind(), nz, &gcfg);
            rep.cases += 1;
            if connector_holds(&comp_expr, &cfg.caps, &r, &a, &b)?
                && !connector_holds(&closed, &cfg.caps, &r, &a, &b)?
            {
                rep.fail(format!(
                    "composite family not lax at r={}: composite holds, composed family fails",
                    rel_str(&r),
                ));
            }
        }
    }
    // Converse law, exact: Conv(Kant(Lambda)) = Kant(dual-transpose).
    let conv_families = vec![
        LambdaRel::new(
            v.plts.clone(),
            v.plts.clone(),
            vec![(dia("a"), dia("a")), (boxl("b"), dia("a"))],
        )?,
        LambdaRel::new(v.plts.clone(), v.dlts.clone(), vec![(dia("a"), pge("a", 1, 2))])?,
        LambdaRel::new(
            v.susp.clone(),
            v.suspie.clone(),
            vec![(dia("i"), dia("i")), (boxl("o"), boxl("o"))],
        )?,
    ];
    for lam in &conv_families {
        let lhs = ConnectorExpr::Conv(Box::new(ConnectorExpr::Kant(lam.clone())));
        let rhs = ConnectorExpr::Kant(lam.converse_dual());
        for _ in 0..cfg.cases.max(8) {
            let ny = rng.gen_range(1..=nmax);
            let nx = rng.gen_range(1..=nmax);
            let y = FinSet::numbered("y", ny);
            let x = FinSet::numbered("x", nx);
            let r = gen_rel(&mut rng, &y, &x, 0.5);
            let b = gen_term(&mut rng, lam.dst_kind(), ny, &gcfg);
            let a = gen_term(&mut rng, lam.src_kind(), nx, &gcfg);
            rep.cases += 1;
            let lv = connector_holds(&lhs, &cfg.caps, &r, &b, &a)?;
            let rv = connector_holds(&rhs, &cfg.caps, &r, &b, &a)?;
            if lv != rv {
                rep.fail(format!(
                    "converse of the lifted family disagrees with the dual transpose at r={} ({lv} vs {rv})",
                    rel_str(&r),
                ));
            }
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------
// Criterion: closed-form composites match brute-force composition
// ---------------------------------------------------------------------

/// The registered closed forms for composites agree with the
/// brute-force search, on seeded instances.
pub fn law_closed_forms(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("closed-form-composites");
    let mut rng = cfg.rng(0xA6);
    let gcfg = GenCfg::default();
    let nmax = cfg.carrier_cap(3);
    let names = ["a", "b"];
    let mid_names = ["m", "n"];
    let out_names = ["c", "d"];
    for _ in 0..cfg.cases.max(4) {
        // --- translation pair composite: Kr(Q) . Kr(R) vs Kr(R;Q) ---
        {
            let la = letters(&names, rng.gen_range(1..=2));
            let lb = letters(&mid_names, rng.gen_range(1..=2));
            let lc = letters(&out_names, rng.gen_range(1..=2));
            let rr = gen_rel(&mut rng, &la, &lb, 0.6);
            let q = gen_rel(&mut rng, &lb, &lc, 0.6);
            let kr_r = ConnectorExpr::Kr(rr.clone());
            let kr_q = ConnectorExpr::Kr(q.clone());
            let closed = ConnectorExpr::Kr(rr.then(&q)?);
            let inner = |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| {
                connector_holds(&kr_r, &cfg.caps, r, a, b)
            };
            let outer = |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| {
                connector_holds(&kr_q, &cfg.caps, r, a, b)
            };
            let brute = ComposeBrute {
                inner: &inner,
                outer: &outer,
                mid_kind: FunctorKind::plts(lb.clone()),
                cap: cfg.caps.middle_cap,
            };
            let nx = rng.gen_range(1..=nmax);
            let nz = rng.gen_range(1..=nmax);
            let x = FinSet::numbered("x", nx);
            let z = FinSet::numbered("z", nz);
            let r = gen_rel(&mut rng, &x, &z, 0.5);
            let a = gen_term(&mut rng, &FunctorKind::plts(la.clone()), nx, &gcfg);
            let b = gen_term(&mut rng, &FunctorKind::plts(lc.clone()), nz, &gcfg);
            rep.cases += 1;
            let bv = brute.compose_couniv(&r, &a, &b)?;
            let cv = connector_holds(&closed, &cfg.caps, &r, &a, &b)?;
            if bv && !cv {
                rep.fail(format!(
                    "translation composite exceeds the composed translation at r={} (R={}, Q={})",
                    rel_str(&r),
                    rel_str(&rr),
                    rel_str(&q),
                ));
            } else if cv && !bv {
                rep.note(format!(
                    "composed translation strictly above the composite at r={} (R={}, Q={})",
                    rel_str(&r),
                    rel_str(&rr),
                    rel_str(&q),
                ));
            }
        }
        // --- two-sided translation composite: Lr(Q) . Lr(R), exact ---
        {
            let la = letters(&names, rng.gen_range(1..=2));
            let lb = letters(&mid_names, rng.gen_range(1..=2));
            let lc = letters(&out_names, rng.gen_range(1..=2));
            let rr = gen_rel(&mut rng, &la, &lb, 0.6);
            let q = gen_rel(&mut rng, &lb, &lc, 0.6);
            let lr_r = ConnectorExpr::Lr(rr.clone());
            let lr_q = ConnectorExpr::Lr(q.clone());
            let composite = ConnectorExpr::Comp(Box::new(lr_q.clone()), Box::new(lr_r.clone()));
            let inner = |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| {
                connector_holds(&lr_r, &cfg.caps, r, a, b)
            };
            let outer = |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| {
                connector_holds(&lr_q, &cfg.caps, r, a, b)
            };
            let brute = ComposeBrute {
                inner: &inner,
                outer: &outer,
                mid_kind: FunctorKind::plts(lb.clone()),
                cap: cfg.caps.middle_cap,
            };
            let nx = rng.gen_range(1..=nmax);
            let nz = rng.gen_range(1..=nmax);
            let x = FinSet::numbered("x", nx);
            let z = FinSet::numbered("z", nz);
            let r = gen_rel(&mut rng, &x, &z, 0.5);
            let a = gen_term(&mut rng, &FunctorKind::plts(la.clone()), nx, &gcfg);
            let b = gen_term(&mut rng, &FunctorKind::plts(lc.clone()), nz, &gcfg);
            rep.cases += 1;
            let bv = brute.compose_couniv(&r, &a, &b)?;
            let cv = connector_holds(&composite, &cfg.caps, &r, &a, &b)?;
            if bv != cv {
                rep.fail(format!(
                    "two-sided translation closed form {cv} vs brute {bv} at r={} (R={}, Q={})",
                    rel_str(&r),
                    rel_str(&rr),
                    rel_str(&q),
                ));
            }
        }
        // --- shared-step composite: Lt . Lt~, exact ---
        {
            let la = letters(&names, rng.gen_range(1..=2));
            let lt = ConnectorExpr::Lt(la.clone());
            let composite = ConnectorExpr::Comp(
                Box::new(lt.clone()),
                Box::new(ConnectorExpr::Conv(Box::new(lt.clone()))),
            );
            let lt_eval = |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| {
                connector_holds(&lt, &cfg.caps, r, a, b)
            };
            let conv_lt = |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| {
                connector_holds(&lt, &cfg.caps, &r.converse(), b, a)
            };
            let brute = ComposeBrute {
                inner: &conv_lt,
                outer: &lt_eval,
                mid_kind: FunctorKind::det(la.clone())?,
                cap: cfg.caps.middle_cap,
            };
            let nx = rng.gen_range(1..=nmax);
            let nz = rng.gen_range(1..=nmax);
            let x = FinSet::numbered("x", nx);
            let z = FinSet::numbered("z", nz);
            let r = gen_rel(&mut rng, &x, &z, 0.5);
            let kind = FunctorKind::plts(la.clone());
            let a = gen_term(&mut rng, &kind, nx, &gcfg);
            let b = gen_term(&mut rng, &kind, nz, &gcfg);
            rep.cases += 1;
            let bv = brute.compose_couniv(&r, &a, &b)?;
            let cv = connector_holds(&composite, &cfg.caps, &r, &a, &b)?;
            if bv != cv {
                rep.fail(format!(
                    "shared-step closed form {cv} vs brute {bv} at r={}",
                    rel_str(&r),
                ));
            }
        }
        // --- conformance compatibility composite, exact ---
        {
            let v = vocab()?;
            let ioco = ConnectorExpr::Ioco {
                inputs: v.ins.clone(),
                outputs: v.outs.clone(),
            };
            let composite = ConnectorExpr::Comp(
                Box::new(ConnectorExpr::Conv(Box::new(ioco.clone()))),
                Box::new(ioco.clone()),
            );
            let ioco_eval = |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| {
                connector_holds(&ioco, &cfg.caps, r, a, b)
            };
            let conv_ioco = |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| {
                connector_holds(&ioco, &cfg.caps, &r.converse(), b, a)
            };
            let brute = ComposeBrute {
                inner: &ioco_eval,
                outer: &conv_ioco,
                mid_kind: v.suspie.clone(),
                cap: cfg.caps.middle_cap,
            };
            let nx = rng.gen_range(1..=nmax);
            let nz = rng.gen_range(1..=nmax);
            let x = FinSet::numbered("x", nx);
            let z = FinSet::numbered("z", nz);
            let r = gen_rel(&mut rng, &x, &z, 0.5);
            let a = gen_term(&mut rng, &v.susp, nx, &gcfg);
            let b = gen_term(&mut rng, &v.susp, nz, &gcfg);
            rep.cases += 1;
            let bv = brute.compose_couniv(&r, &a, &b)?;
            let cv = connector_holds(&composite, &cfg.caps, &r, &a, &b)?;
            if bv != cv {
                rep.fail(format!(
                    "compatibility closed form {cv} vs brute {bv} at r={}",
                    rel_str(&r),
                ));
            }
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------
// Criteria: expressiveness, distinguishing formulas, adequacy
// ---------------------------------------------------------------------

struct ExprInstance {
    lam: LambdaRel,
    c: Coalgebra,
    d: Coalgebra,
    sim: SimResult,
    theory: FormulaTheory,
}

fn expressiveness_instances(cfg: &LawCfg) -> Result<Vec<ExprInstance>> {
    let mut rng = cfg.rng(0xA7);
    let gcfg = GenCfg::default();
    let smax = cfg.scaled(6);
    let mut out = Vec::new();
    for case in 0..cfg.cases {
        let family = case % 3;
        {
            let la = rng.gen_range(1..=2usize);
            let labels = letters(&["a", "b"], la);
            let plts = FunctorKind::plts(labels.clone());
            let dkind = if family == 2 {
                FunctorKind::dlts(labels.clone())
            } else {
                plts.clone()
            };
            let mut pairs = Vec::new();
            for l in labels.names() {
                match family {
                    0 => pairs.push((dia(l), dia(l))),
                    1 => {
                        pairs.push((dia(l), dia(l)));
                        pairs.push((boxl(l), boxl(l)));
                    }
                    _ => pairs.push((dia(l), pge(l, 1, 2))),
                }
            }
            let lam = LambdaRel::new(plts.clone(), dkind.clone(), pairs)?;
            let nc = rng.gen_range(1..=smax);
            let nd = rng.gen_range(1..=smax);
            let c = gen_coalgebra(&mut rng, &plts, nc, &gcfg)?;
            let d = gen_coalgebra(&mut rng, &dkind, nd, &gcfg)?;
            let expr = ConnectorExpr::Kant(lam.clone());
            let sim = greatest_simulation(&expr, &cfg.caps, &c, &d)?;
            let theory = formula_enum_theory(&lam, &c, &d, None, 1 << 20)?;
            out.push(ExprInstance {
                lam,
                c,
                d,
                sim,
                theory,
            });
        }
    }
    Ok(out)
}

/// Greatest simulation equals the preorder induced by enumerating all
/// modal formulas of the lifting family.
pub fn law_expressiveness(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("expressiveness");
    for inst in expressiveness_instances(cfg)? {
        rep.cases += 1;
        if !inst.theory.stabilized {
            rep.note("formula enumeration hit its depth limit before stabilizing".into());
        }
        if inst.sim.relation != inst.theory.preorder {
            rep.fail(format!(
                "simulation {} differs from formula preorder {} ({} vs {} states)",
                rel_str(&inst.sim.relation),
                rel_str(&inst.theory.preorder),
                inst.c.states().size(),
                inst.d.states().size(),
            ));
        }
    }
    Ok(rep)
}

/// Every dissimilar pair yields a distinguishing formula that
/// model-checks true on the left state and false on the right state.
pub fn law_distinguishing(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("distinguishing-formulas");
    for inst in expressiveness_instances(cfg)? {
        for x in 0..inst.c.states().size() as u32 {
            for y in 0..inst.d.states().size() as u32 {
                if inst.sim.relation.contains(x, y) {
                    continue;
                }
                rep.cases += 1;
                match distinguishing_formula_from(
                    &inst.c, &inst.d, &inst.lam, &cfg.caps, &inst.sim, x, y,
                ) {
                    Ok(Some(phi)) => {
                        let at_left = eval_formula(&phi, &inst.c, SideTag::Left, x)?;
                        let at_right = eval_formula(&phi, &inst.d, SideTag::Right, y)?;
                        if !at_left || at_right {
                            rep.fail(format!(
                                "formula {phi} for ({x},{y}) checks left={at_left} right={at_right}",
                            ));
                        }
                    }
                    Ok(None) => rep.fail(format!(
                        "no formula for dissimilar pair ({x},{y})"
                    )),
                    Err(e) => rep.fail(format!(
                        "synthesis error for pair ({x},{y}): {e}"
                    )),
                }
            }
        }
    }
    Ok(rep)
}

/// Formulas of modal depth at most 3 are preserved along every pair of
/// every computed greatest simulation.
pub fn law_adequacy(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("adequacy");
    for inst in expressiveness_instances(cfg)? {
        let depth = inst.theory.by_depth.len().saturating_sub(1).min(3);
        let keys = &inst.theory.by_depth[depth];
        let pairs = inst.sim.relation.pairs();
        for (mc, md) in keys {
            rep.cases += 1;
            for &(x, y) in &pairs {
                if mc & (1u64 << x) != 0 && md & (1u64 << y) == 0 {
                    rep.fail(format!(
                        "formula key ({mc:#x},{md:#x}) true at left {x} but not at right {y} despite simulation",
                    ));
                    break;
                }
            }
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------
// Criterion: transfer of bisimilarity across alphabets
// ---------------------------------------------------------------------

/// Translation similarity transfers plain bisimilarity along right-total
/// label relations, and the composite inequality behind the transfer is
/// certified pointwise.
pub fn law_transfer(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("bisimilarity-transfer");
    let mut rng = cfg.rng(0xA8);
    let gcfg = GenCfg::default();
    let smax = cfg.scaled(4);
    for _ in 0..cfg.cases {
        let la = letters(&["a", "b"], rng.gen_range(1..=2));
        let lb = letters(&["p", "q"], rng.gen_range(1..=2));
        let mut rlab = gen_rel(&mut rng, &la, &lb, 0.5);
        for m in 0..lb.size() as u32 {
            if !(0..la.size() as u32).any(|l| rlab.contains(l, m)) {
                rlab.insert(rng.gen_range(0..la.size() as u32), m);
            }
        }
        let fkind = FunctorKind::plts(la.clone());
        let gkind = FunctorKind::plts(lb.clone());
        let n_c = rng.gen_range(1..=smax);
        let c = gen_coalgebra(&mut rng, &fkind, n_c, &gcfg)?;
        let n_d = rng.gen_range(1..=smax);
        let d = gen_coalgebra(&mut rng, &gkind, n_d, &gcfg)?;
        let rstar =
            greatest_simulation(&ConnectorExpr::Lr(rlab.clone()), &cfg.caps, &c, &d)?.relation;
        let simf =
            greatest_bisimulation(&ConnectorExpr::Id(fkind.clone()), &cfg.caps, &c, &c)?.relation;
        let simg =
            greatest_bisimulation(&ConnectorExpr::Id(gkind.clone()), &cfg.caps, &d, &d)?.relation;
        rep.cases += 1;
        'inst: for (cx, dx) in rstar.pairs() {
            for (cy, dy) in rstar.pairs() {
                if simf.contains(cx, cy) && !simg.contains(dx, dy) {
                    rep.fail(format!(
                        "R={}: states {cx}~{dx}, {cy}~{dy} translate but {dx},{dy} are not bisimilar",
                        rel_str(&rlab),
                    ));
                    break 'inst;
                }
            }
        }
    }
    // The inequality driving the transfer, certified pointwise. The
    // two-letter target alphabet is certified exhaustively on carriers
    // of size two and by sampling on size three; the one-letter target
    // is exhaustive on size three.
    let certs: [(&[&str], &[(&str, &str)], usize, LeqMode); 3] = [
        (
            &["p"],
            &[("a", "p")],
            3,
            LeqMode::Exhaustive,
        ),
        (
            &["p", "q"],
            &[("a", "p"), ("b", "q"), ("a", "q")],
            2,
            LeqMode::Exhaustive,
        ),
        (
            &["p", "q"],
            &[("a", "p"), ("b", "q"), ("a", "q")],
            3,
            LeqMode::Sampled {
                cases: cfg.cases.max(20),
                seed: cfg.seed ^ 0xA8,
            },
        ),
    ];
    for (bnames, rpairs, n, mode) in certs {
        let la = letters(&["a", "b"], rpairs.iter().map(|p| p.0).collect::<BTreeSet<_>>().len());
        let lb = FinSet::new(bnames.iter().copied())?;
        let rlab = Rel::from_pairs(&la, &lb, rpairs)?;
        let lr = ConnectorExpr::Lr(rlab.clone());
        let composite = ConnectorExpr::Comp(
            Box::new(lr.clone()),
            Box::new(ConnectorExpr::Conv(Box::new(lr))),
        );
        let idg = ConnectorExpr::Id(FunctorKind::plts(lb.clone()));
        let x = FinSet::numbered("x", n);
        let z = FinSet::numbered("z", n);
        rep.cases += 1;
        match connector_leq_on(
            &composite,
            &idg,
            &cfg.caps,
            &x,
            &z,
            &mode,
            &EnumCfg::default(),
        )? {
            None => {}
            Some(cex) => rep.fail(format!(
                "inequality fails for R={} at r={} ({} / {})",
                rel_str(&rlab),
                rel_str(&cex.r),
                term_display(&FunctorKind::plts(lb.clone()), &cex.a, &x),
                term_display(&FunctorKind::plts(lb.clone()), &cex.b, &z),
            )),
        }
        if matches!(mode, LeqMode::Sampled { .. }) {
            rep.note(format!(
                "carrier-{n} certificate over {} target letters is sampled",
                lb.size()
            ));
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------
// Criterion: shared traces via the determinization composite
// ---------------------------------------------------------------------

/// Bisimilarity for the shared-step composite coincides with the
/// existence of a common infinite trace.
pub fn law_trace_bisim(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("shared-traces");
    let mut rng = cfg.rng(0xA9);
    let gcfg = GenCfg::default();
    let smax = cfg.scaled(8);
    for _ in 0..cfg.cases / 2 {
        let labels = letters(&["a", "b"], rng.gen_range(1..=2));
        let kind = FunctorKind::plts(labels.clone());
        let n_c = rng.gen_range(1..=smax);
        let c = gen_coalgebra(&mut rng, &kind, n_c, &gcfg)?;
        let n_d = rng.gen_range(1..=smax);
        let d = gen_coalgebra(&mut rng, &kind, n_d, &gcfg)?;
        let lt = ConnectorExpr::Lt(labels.clone());
        let expr = ConnectorExpr::Comp(
            Box::new(lt.clone()),
            Box::new(ConnectorExpr::Conv(Box::new(lt))),
        );
        let bis = greatest_bisimulation(&expr, &cfg.caps, &c, &d)?.relation;
        let oracle = shared_trace_oracle(&c, &d)?;
        rep.cases += 1;
        if bis != oracle {
            rep.fail(format!(
                "bisimilarity {} vs trace oracle {} ({} vs {} states)",
                rel_str(&bis),
                rel_str(&oracle),
                c.states().size(),
                d.states().size(),
            ));
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------
// Criterion: weak similarity via saturation
// ---------------------------------------------------------------------

/// Similarity for the weak connector against the saturated right system
/// matches the double-arrow fixpoint oracle.
pub fn law_weak(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("weak-similarity");
    let mut rng = cfg.rng(0xAA);
    let gcfg = GenCfg::default();
    let smax = cfg.scaled(6);
    for _ in 0..cfg.cases / 2 {
        let labels = if rng.gen_bool(0.5) {
            FinSet::new(["a", "tau"])?
        } else {
            FinSet::new(["a", "b", "tau"])?
        };
        let kind = FunctorKind::plts(labels.clone());
        let n_c = rng.gen_range(1..=smax);
        let c = gen_coalgebra(&mut rng, &kind, n_c, &gcfg)?;
        let n_d = rng.gen_range(1..=smax);
        let d = gen_coalgebra(&mut rng, &kind, n_d, &gcfg)?;
        let dsat = weak_saturate(&d, "tau")?;
        let expr = ConnectorExpr::Weak {
            labels: labels.clone(),
            tau: "tau".into(),
        };
        let sim = greatest_simulation(&expr, &cfg.caps, &c, &dsat)?.relation;
        let oracle = weak_sim_oracle(&c, &d, "tau")?;
        rep.cases += 1;
        if sim.pairs() != oracle.pairs() {
            rep.fail(format!(
                "weak similarity {} vs oracle {} ({} vs {} states)",
                rel_str(&sim),
                rel_str(&oracle),
                c.states().size(),
                d.states().size(),
            ));
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------
// Criterion: input-output conformance
// ---------------------------------------------------------------------

/// Conformance similarity matches the coinductive oracle, and the
/// compatibility composite matches brute-force composition exhaustively
/// at carriers of size at most two.
pub fn law_ioco(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("ioco-conformance");
    let mut rng = cfg.rng(0xAB);
    let gcfg = GenCfg::default();
    let v = vocab()?;
    let smax = cfg.scaled(4);
    let ioco = ConnectorExpr::Ioco {
        inputs: v.ins.clone(),
        outputs: v.outs.clone(),
    };
    for _ in 0..cfg.cases / 2 {
        let n_spec = rng.gen_range(1..=smax);
        let spec = gen_coalgebra(&mut rng, &v.susp, n_spec, &gcfg)?;
        let n_imp = rng.gen_range(1..=smax);
        let imp = gen_coalgebra(&mut rng, &v.suspie, n_imp, &gcfg)?;
        let sim = greatest_simulation(&ioco, &cfg.caps, &spec, &imp)?.relation;
        let oracle = ioco_oracle(&spec, &imp)?;
        rep.cases += 1;
        if sim != oracle {
            rep.fail(format!(
                "conformance similarity {} vs oracle {}",
                rel_str(&sim),
                rel_str(&oracle),
            ));
        }
    }
    // Compatibility composite, exhaustive at carriers <= 2.
    let compat = ConnectorExpr::Comp(
        Box::new(ConnectorExpr::Conv(Box::new(ioco.clone()))),
        Box::new(ioco.clone()),
    );
    let ioco_eval =
        |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| connector_holds(&ioco, &cfg.caps, r, a, b);
    let conv_ioco = |r: &Rel, a: &FunctorTerm, b: &FunctorTerm| {
        connector_holds(&ioco, &cfg.caps, &r.converse(), b, a)
    };
    let ecfg = EnumCfg::default();
    let cap = cfg.carrier_cap(2);
    for nx in 1..=cap {
        for nz in 1..=cap {
            let x = FinSet::numbered("x", nx);
            let z = FinSet::numbered("z", nz);
            let terms_x = enumerate_terms(&v.susp, nx, &ecfg)?;
            let terms_z = enumerate_terms(&v.susp, nz, &ecfg)?;
            for r in all_rels(&x, &z) {
                let brute = ComposeBrute {
                    inner: &ioco_eval,
                    outer: &conv_ioco,
                    mid_kind: v.suspie.clone(),
                    cap: cfg.caps.middle_cap,
                };
                for a in &terms_x {
                    for b in &terms_z {
                        rep.cases += 1;
                        let bv = brute.compose_couniv(&r, a, b)?;
                        let cv = connector_holds(&compat, &cfg.caps, &r, a, b)?;
                        if bv != cv {
                            rep.fail(format!(
                                "compatibility closed form {cv} vs brute {bv} at r={} ({} / {})",
                                rel_str(&r),
                                term_display(&v.susp, a, &x),
                                term_display(&v.susp, b, &z),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------
// Criterion: formats and determinism
// ---------------------------------------------------------------------

/// Parse/serialize round-trips are identities, a 100-state transition
/// file ingests within a second, and generation is deterministic under
/// a fixed seed.
pub fn law_roundtrips(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("format-round-trips");
    let mut rng = cfg.rng(0xAC);
    let gcfg = GenCfg::default();
    let v = vocab()?;
    // Product kinds have no text format, so the system pool covers the
    // five serializable kinds.
    let kinds = [
        v.plts.clone(),
        v.dlts.clone(),
        v.det.clone(),
        v.susp.clone(),
        v.suspie.clone(),
    ];
    // System descriptions.
    for kind in &kinds {
        for _ in 0..(cfg.cases / 6).max(2) {
            let n = rng.gen_range(1..=3);
            let c = gen_coalgebra(&mut rng, kind, n, &gcfg)?;
            let text = serialize_chc(&c)?;
            let back = parse_chc(&text)?;
            rep.cases += 1;
            if back.kind() != kind {
                rep.fail(format!("parsed kind {} for {}", back.kind(), kind));
                continue;
            }
            let again = serialize_chc(&back)?;
            if text != again {
                rep.fail(format!("system text changed after one round trip:\n{text}"));
            }
        }
    }
    // Connector expressions.
    for e in catalog()? {
        let text = serialize_connector(&e);
        let (f, g) = e.kinds()?;
        rep.cases += 1;
        match parse_connector(&text).and_then(|ast| elaborate_connector(&ast, &f, &g)) {
            Ok(back) => {
                let again = serialize_connector(&back);
                if text != again {
                    rep.fail(format!("connector text changed: {text} vs {again}"));
                }
            }
            Err(err) => rep.fail(format!("connector {text} does not re-parse: {err}")),
        }
    }
    // Relation files.
    for _ in 0..(cfg.cases / 2).max(4) {
        let x = FinSet::numbered("x", rng.gen_range(1..=4));
        let z = FinSet::numbered("z", rng.gen_range(1..=4));
        let r = gen_rel(&mut rng, &x, &z, 0.5);
        let text = write_relation(&r);
        rep.cases += 1;
        match parse_relation(&text, &x, &z) {
            Ok(back) => {
                if back != r {
                    rep.fail(format!("relation changed after round trip: {text}"));
                }
            }
            Err(err) => rep.fail(format!("relation text does not re-parse: {err}")),
        }
    }
    // Formulas.
    {
        let lam = LambdaRel::new(
            v.plts.clone(),
            v.plts.clone(),
            vec![(dia("a"), dia("a")), (boxl("b"), boxl("b"))],
        )?;
        let lamp = LambdaRel::new(
            v.plts.clone(),
            v.dlts.clone(),
            vec![(dia("a"), pge("a", 1, 2))],
        )?;
        let top: Formula = Rc::new(FormulaNode::Top);
        let bot: Formula = Rc::new(FormulaNode::Bot);
        let md = |l: Lifting, m: Lifting, arg: &Formula| -> Formula {
            Rc::new(FormulaNode::Mod(l, m, vec![arg.clone()]))
        };
        let battery: Vec<(Formula, &LambdaRel)> = vec![
            (top.clone(), &lam),
            (bot.clone(), &lam),
            (md(dia("a"), dia("a"), &top), &lam),
            (
                Rc::new(FormulaNode::And(
                    md(boxl("b"), boxl("b"), &bot),
                    Rc::new(FormulaNode::Or(top.clone(), bot.clone())),
                )),
                &lam,
            ),
            (
                md(dia("a"), dia("a"), &md(boxl("b"), boxl("b"), &top)),
                &lam,
            ),
            (md(dia("a"), pge("a", 1, 2), &top), &lamp),
        ];
        for (phi, l) in battery {
            let text = phi.to_string();
            rep.cases += 1;
            match parse_formula(&text, l) {
                Ok(back) => {
                    if back != phi {
                        rep.fail(format!("formula changed after round trip: {text}"));
                    }
                }
                Err(err) => rep.fail(format!("formula {text} does not re-parse: {err}")),
            }
        }
    }
    // Transition-file ingestion speed.
    {
        let n = 100;
        let mut text = format!("des (0, {n}, {n})\n");
        for i in 0..n {
            text.push_str(&format!("({i}, \"a\", {})\n", (i + 1) % n));
        }
        let start = Instant::now();
        let doc = parse_aut(&text, None)?;
        let elapsed = start.elapsed();
        rep.cases += 1;
        if doc.coalgebra.states().size() != n {
            rep.fail(format!(
                "transition file parsed to {} states",
                doc.coalgebra.states().size()
            ));
        } else if elapsed.as_secs_f64() > 1.0 {
            rep.fail(format!(
                "100-state transition file took {:.3}s to ingest",
                elapsed.as_secs_f64()
            ));
        }
    }
    // Seeded generation is reproducible.
    {
        let mut r1 = cfg.rng(0xAD);
        let mut r2 = cfg.rng(0xAD);
        let c1 = gen_coalgebra(&mut r1, &v.plts, 3, &gcfg)?;
        let c2 = gen_coalgebra(&mut r2, &v.plts, 3, &gcfg)?;
        rep.cases += 1;
        if serialize_chc(&c1)? != serialize_chc(&c2)? {
            rep.fail("same seed produced different systems".into());
        }
        let x = FinSet::numbered("x", 3);
        let q1 = gen_rel(&mut r1, &x, &x, 0.5);
        let q2 = gen_rel(&mut r2, &x, &x, 0.5);
        rep.cases += 1;
        if write_relation(&q1) != write_relation(&q2) {
            rep.fail("same seed produced different relations".into());
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------
// Fixpoint properties of the similarity computation
// ---------------------------------------------------------------------

/// The computed similarity is itself a simulation, contains every other
/// simulation, composes along composite connectors, reverses along the
/// converse connector, and contains coalgebra-morphism graphs.
pub fn law_fixpoint(cfg: &LawCfg) -> Result<LawReport> {
    let mut rep = LawReport::new("fixpoint-properties");
    let mut rng = cfg.rng(0xAE);
    let gcfg = GenCfg::default();
    let nmax = cfg.carrier_cap(3);
    let v = vocab()?;
    // Maximality among all relations at tiny carriers.
    for _ in 0..4 {
        let labels = letters(&["a", "b"], rng.gen_range(1..=2));
        let kind = FunctorKind::plts(labels.clone());
        let n_c = rng.gen_range(1..=nmax);
        let c = gen_coalgebra(&mut rng, &kind, n_c, &gcfg)?;
        let n_d = rng.gen_range(1..=nmax);
        let d = gen_coalgebra(&mut rng, &kind, n_d, &gcfg)?;
        let expr = ConnectorExpr::Id(kind.clone());
        let sim = greatest_simulation(&expr, &cfg.caps, &c, &d)?;
        rep.cases += 1;
        if let Some((x, y)) = is_simulation(&expr, &cfg.caps, &c, &d, &sim.relation)? {
            rep.fail(format!("computed similarity violates transfer at ({x},{y})"));
        }
        for r in all_rels(c.states(), d.states()) {
            rep.cases += 1;
            if is_simulation(&expr, &cfg.caps, &c, &d, &r)?.is_none()
                && !r.is_subset(&sim.relation)?
            {
                rep.fail(format!(
                    "simulation {} is not below the computed greatest one {}",
                    rel_str(&r),
                    rel_str(&sim.relation),
                ));
            }
        }
    }
    // Similarity composes along the composite connector.
    for _ in 0..cfg.cases.min(10) {
        let r1 = gen_rel(&mut rng, &v.ab, &v.pq, 0.6);
        let r2 = gen_rel(&mut rng, &v.pq, &v.ab, 0.6);
        let l1 = ConnectorExpr::Lr(r1);
        let l2 = ConnectorExpr::Lr(r2);
        let n_c = rng.gen_range(1..=nmax);
        let c = gen_coalgebra(&mut rng, &v.plts, n_c, &gcfg)?;
        let n_d = rng.gen_range(1..=nmax);
        let d = gen_coalgebra(&mut rng, &FunctorKind::plts(v.pq.clone()), n_d, &gcfg)?;
        let n_e = rng.gen_range(1..=nmax);
        let e = gen_coalgebra(&mut rng, &v.plts, n_e, &gcfg)?;
        let s1 = greatest_simulation(&l1, &cfg.caps, &c, &d)?.relation;
        let s2 = greatest_simulation(&l2, &cfg.caps, &d, &e)?.relation;
        let comp = ConnectorExpr::Comp(Box::new(l2.clone()), Box::new(l1.clone()));
        rep.cases += 1;
        if let Some((x, y)) =
            is_simulation(&comp, &cfg.caps, &c, &e, &s1.then(&s2)?)?
        {
            rep.fail(format!(
                "composite of similarities is not a composite-connector simulation at ({x},{y})",
            ));
        }
        // Similarity reverses along the converse connector.
        rep.cases += 1;
        if let Some((y, x)) = is_simulation(
            &ConnectorExpr::Conv(Box::new(l1.clone())),
            &cfg.caps,
            &d,
            &c,
            &s1.converse(),
        )? {
            rep.fail(format!(
                "converse of a similarity is not a converse-connector simulation at ({y},{x})",
            ));
        }
    }
    // Morphism graphs are simulations in both directions.
    {
        let x = FinSet::new(["x0", "x1"])?;
        let y = FinSet::new(["y0"])?;
        let step = |t: u32| FunctorTerm::Plts(BTreeSet::from([(0u32, t)]));
        let c = Coalgebra::new(v.plts.clone(), x.clone(), vec![step(1), step(0)])?;
        let d = Coalgebra::new(
            v.plts.clone(),
            y.clone(),
            vec![FunctorTerm::Plts(BTreeSet::from([(0u32, 0u32)]))],
        )?;
        let h = Map::new(&x, &y, vec![0, 0])?;
        let expr = ConnectorExpr::Id(v.plts.clone());
        rep.cases += 1;
        if is_simulation(&expr, &cfg.caps, &c, &d, &h.graph())?.is_some() {
            rep.fail("morphism graph is not a forward simulation".into());
        }
        rep.cases += 1;
        if is_simulation(&expr, &cfg.caps, &d, &c, &h.graph().converse())?.is_some() {
            rep.fail("morphism graph converse is not a backward simulation".into());
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------
// Full suite
// ---------------------------------------------------------------------

type LawFn = fn(&LawCfg) -> Result<LawReport>;

/// Every law group in fixed order, with its stable display name.
pub const LAW_GROUPS: [(&str, LawFn); 18] = [
    ("egli-milner-barr", law_egli_milner),
    ("coupling-barr", law_coupling),
    ("monotonicity", law_monotonicity),
    ("naturality", law_naturality),
    ("composition-identity", law_comp_identity),
    ("composition-associativity", law_comp_assoc),
    ("converse-algebra", law_converse),
    ("kantorovich-functorial", law_kant_functorial),
    ("closed-form-composites", law_closed_forms),
    ("expressiveness", law_expressiveness),
    ("distinguishing-formulas", law_distinguishing),
    ("adequacy", law_adequacy),
    ("bisimilarity-transfer", law_transfer),
    ("shared-traces", law_trace_bisim),
    ("weak-similarity", law_weak),
    ("ioco-conformance", law_ioco),
    ("format-round-trips", law_roundtrips),
    ("fixpoint-properties", law_fixpoint),
];

/// Runs every law group with the given configuration. Errors inside a
/// group become a failing report for that group rather than aborting
/// the suite.
pub fn run_all(cfg: &LawCfg) -> Vec<LawReport> {
    LAW_GROUPS
        .iter()
        .map(|(name, f)| match f(cfg) {
            Ok(rep) => rep,
            Err(err) => {
                let mut rep = LawReport::new(name);
                rep.cases += 1;
                rep.fail(format!("suite error: {err}"));
                rep
            }
        })
        .collect()
}
