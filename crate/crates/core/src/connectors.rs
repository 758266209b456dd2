//! Relational connectors: monotone, natural transformations of relations
//! between carriers into relations between functor terms.
//!
//! Every expression node evaluates pointwise through [`connector_holds`].
//! Composition runs in tiers: a registered closed form when one applies,
//! otherwise an exact search over the factorization of the relation
//! through its maximal boxes. The search is exact or it reports a budget
//! error; it never silently approximates.

use num_integer::Integer;
use num_traits::Zero;

use crate::err::{Error, Result};
use crate::functors::{Coalgebra, FunctorKind, FunctorTerm, Ratio};
use crate::liftings::{eval_lifting, LambdaRel};
use crate::oracle::{restrict_to_supports, ComposeBrute};
use crate::rel::{max_boxes, FinSet, Rel, Subset};

/// Resource bounds for connector evaluation.
#[derive(Clone, Debug)]
pub struct EvalCaps {
    /// Maximum support size per side in Kantorovich evaluation.
    pub support_cap: usize,
    /// Maximum total bits (arity times support size) enumerated per
    /// lifting pair.
    pub kant_bits: u32,
    /// Maximum number of middle terms scanned per composition query.
    pub middle_cap: u128,
}

impl Default for EvalCaps {
    fn default() -> Self {
        EvalCaps {
            support_cap: 16,
            kant_bits: 20,
            middle_cap: 1 << 21,
        }
    }
}

/// A natural transformation usable in pullback nodes.
#[derive(Clone, PartialEq, Debug)]
pub enum NatTrans {
    /// Deterministic systems into nondeterministic ones: a single step
    /// becomes a singleton step set.
    Incl,
    /// Push labels forward along `R`: an `A`-labelled step set becomes a
    /// `B`-labelled one, one copy per related label.
    Relabel(Rel),
    /// Pull labels back along `R`: a `B`-labelled step set becomes an
    /// `A`-labelled one.
    RelabelConv(Rel),
    /// First projection out of a product kind; carries the discarded
    /// component's kind.
    Proj1(Box<FunctorKind>, Box<FunctorKind>),
    /// Second projection out of a product kind.
    Proj2(Box<FunctorKind>, Box<FunctorKind>),
}

impl NatTrans {
    /// The transformation's domain kind, given its codomain. Pullback
    /// nodes know the codomain from the connector they wrap.
    pub fn domain_given_codomain(&self, cod: &FunctorKind) -> Result<FunctorKind> {
        let fail = |expected: String| Error::KindMismatch {
            context: "natural transformation codomain".into(),
            expected,
            got: cod.to_string(),
        };
        match self {
            NatTrans::Incl => match cod {
                FunctorKind::Plts { labels } => FunctorKind::det(labels.clone()),
                _ => Err(fail("nondeterministic kind".into())),
            },
            NatTrans::Relabel(r) => match cod {
                FunctorKind::Plts { labels } if labels.same(r.dst()) => {
                    Ok(FunctorKind::plts(r.src().clone()))
                }
                _ => Err(fail(format!("step sets labelled over {}", r.dst()))),
            },
            NatTrans::RelabelConv(r) => match cod {
                FunctorKind::Plts { labels } if labels.same(r.src()) => {
                    Ok(FunctorKind::plts(r.dst().clone()))
                }
                _ => Err(fail(format!("step sets labelled over {}", r.src()))),
            },
            NatTrans::Proj1(k1, k2) => {
                if cod == k1.as_ref() {
                    Ok(FunctorKind::pair(*k1.clone(), *k2.clone()))
                } else {
                    Err(fail(k1.to_string()))
                }
            }
            NatTrans::Proj2(k1, k2) => {
                if cod == k2.as_ref() {
                    Ok(FunctorKind::pair(*k1.clone(), *k2.clone()))
                } else {
                    Err(fail(k2.to_string()))
                }
            }
        }
    }

    /// Applies the transformation's component at the term's carrier.
    pub fn apply(&self, term: &FunctorTerm) -> Result<FunctorTerm> {
        let fail = |expected: &str| Error::KindMismatch {
            context: "natural transformation application".into(),
            expected: expected.into(),
            got: format!("{term:?}"),
        };
        match self {
            NatTrans::Incl => match term {
                FunctorTerm::Det(l, x) => Ok(FunctorTerm::Plts([(*l, *x)].into())),
                _ => Err(fail("deterministic step")),
            },
            NatTrans::Relabel(r) => match term {
                FunctorTerm::Plts(set) => {
                    let mut out = std::collections::BTreeSet::new();
                    for (l, x) in set {
                        for m in r.row(*l).iter() {
                            out.insert((m, *x));
                        }
                    }
                    Ok(FunctorTerm::Plts(out))
                }
                _ => Err(fail("step set")),
            },
            NatTrans::RelabelConv(r) => match term {
                FunctorTerm::Plts(set) => {
                    let mut out = std::collections::BTreeSet::new();
                    for (m, y) in set {
                        for l in r.src().indices() {
                            if r.contains(l, *m) {
                                out.insert((l, *y));
                            }
                        }
                    }
                    Ok(FunctorTerm::Plts(out))
                }
                _ => Err(fail("step set")),
            },
            NatTrans::Proj1(..) => match term {
                FunctorTerm::Pair(a, _) => Ok(*a.clone()),
                _ => Err(fail("pair term")),
            },
            NatTrans::Proj2(..) => match term {
                FunctorTerm::Pair(_, b) => Ok(*b.clone()),
                _ => Err(fail("pair term")),
            },
        }
    }
}

/// Connector expression tree. `Comp(l, k)` applies `k` first.
#[derive(Clone, PartialEq, Debug)]
pub enum ConnectorExpr {
    /// The canonical relation lifting of the kind.
    Id(FunctorKind),
    /// Kantorovich connector of a lifting relation.
    Kant(LambdaRel),
    Comp(Box<ConnectorExpr>, Box<ConnectorExpr>),
    Conv(Box<ConnectorExpr>),
    Meet(Box<ConnectorExpr>, Box<ConnectorExpr>),
    Prod(Box<ConnectorExpr>, Box<ConnectorExpr>),
    /// Precompose the left argument with a natural transformation.
    PullLeft(Box<ConnectorExpr>, NatTrans),
    /// Precompose the right argument with a natural transformation.
    PullRight(Box<ConnectorExpr>, NatTrans),
    /// Universal label-translation connector over `R`: every related
    /// source step is answered on every related label.
    Kr(Rel),
    /// Two-sided label-translation connector over `R`.
    Lr(Rel),
    /// Forward simulation of step sets over a shared alphabet.
    Lf(FinSet),
    /// A deterministic step is answered by some equally-labelled step.
    Lt(FinSet),
    /// Input-output conformance between suspension kinds.
    Ioco { inputs: FinSet, outputs: FinSet },
    /// Weak simulation against the right side's saturation.
    Weak { labels: FinSet, tau: String },
}

pub const EPSILON_LABEL: &str = "ε";

/// The label relation driving weak simulation: visible labels map to
/// themselves, the silent label to itself or to the idle label of the
/// saturated alphabet.
pub fn weak_label_rel(labels: &FinSet, tau: &str) -> Result<(FinSet, Rel)> {
    if labels.index_of(EPSILON_LABEL).is_some() {
        return Err(Error::Validation(format!(
            "alphabet already contains the reserved idle label {EPSILON_LABEL}"
        )));
    }
    let tau_idx = labels.require(tau)?;
    let sat = labels.union(&FinSet::new([EPSILON_LABEL])?);
    let eps_idx = sat.require(EPSILON_LABEL)?;
    let mut r = Rel::empty(labels, &sat);
    for l in labels.indices() {
        r.insert(l, l); // saturated alphabet extends the original one
        if l == tau_idx {
            r.insert(l, eps_idx);
        }
    }
    Ok((sat, r))
}

/// The saturation of a system: visible steps become silent-padded
/// steps, and a fresh idle label records silent reachability.
pub fn weak_saturate(c: &Coalgebra, tau: &str) -> Result<Coalgebra> {
    let labels = c.kind().labels().ok_or_else(|| Error::KindMismatch {
        context: "saturation".into(),
        expected: "labelled step sets".into(),
        got: c.kind().to_string(),
    })?;
    if !matches!(c.kind(), FunctorKind::Plts { .. }) {
        return Err(Error::KindMismatch {
            context: "saturation".into(),
            expected: "nondeterministic kind".into(),
            got: c.kind().to_string(),
        });
    }
    if labels.index_of(EPSILON_LABEL).is_some() {
        return Err(Error::Validation(format!(
            "alphabet already contains the reserved idle label {EPSILON_LABEL}"
        )));
    }
    let sat_labels = labels.union(&FinSet::new([EPSILON_LABEL])?);
    let eps_idx = sat_labels.require(EPSILON_LABEL)?;
    let n = c.states().size();
    let tau_idx = labels.index_of(tau);
    // silent closure
    let mut star: Vec<Vec<bool>> = (0..n)
        .map(|x| {
            let mut row = vec![false; n];
            row[x] = true;
            row
        })
        .collect();
    let edges: Vec<Vec<(u32, u32)>> = (0..n)
        .map(|x| match c.gamma(x as u32) {
            FunctorTerm::Plts(set) => set.iter().copied().collect(),
            _ => Vec::new(),
        })
        .collect();
    loop {
        let mut changed = false;
        for x in 0..n {
            for y in 0..n {
                if !star[x][y] {
                    continue;
                }
                for (l, z) in &edges[y] {
                    if Some(*l) == tau_idx && !star[x][*z as usize] {
                        star[x][*z as usize] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut terms = Vec::with_capacity(n);
    for x in 0..n {
        let mut set: std::collections::BTreeSet<(u32, u32)> = std::collections::BTreeSet::new();
        for y in 0..n {
            if star[x][y] {
                set.insert((eps_idx, y as u32));
                for (l, z) in &edges[y] {
                    for w in 0..n {
                        if star[*z as usize][w] {
                            set.insert((*l, w as u32));
                        }
                    }
                }
            }
        }
        terms.push(FunctorTerm::Plts(set));
    }
    Coalgebra::new(
        FunctorKind::plts(sat_labels),
        c.states().clone(),
        terms,
    )
}

impl ConnectorExpr {
    /// Source and target kinds, checking the tree for well-formedness.
    pub fn kinds(&self) -> Result<(FunctorKind, FunctorKind)> {
        match self {
            ConnectorExpr::Id(k) => Ok((k.clone(), k.clone())),
            ConnectorExpr::Kant(lam) => Ok((lam.src_kind().clone(), lam.dst_kind().clone())),
            ConnectorExpr::Comp(l, k) => {
                let (f, g1) = k.kinds()?;
                let (g2, h) = l.kinds()?;
                if g1 != g2 {
                    return Err(Error::KindMismatch {
                        context: "composition middle kind".into(),
                        expected: g1.to_string(),
                        got: g2.to_string(),
                    });
                }
                Ok((f, h))
            }
            ConnectorExpr::Conv(l) => {
                let (f, g) = l.kinds()?;
                Ok((g, f))
            }
            ConnectorExpr::Meet(l, k) => {
                let (f1, g1) = l.kinds()?;
                let (f2, g2) = k.kinds()?;
                if f1 != f2 || g1 != g2 {
                    return Err(Error::KindMismatch {
                        context: "meet of connectors".into(),
                        expected: format!("{f1} -> {g1}"),
                        got: format!("{f2} -> {g2}"),
                    });
                }
                Ok((f1, g1))
            }
            ConnectorExpr::Prod(l, k) => {
                let (f1, g1) = l.kinds()?;
                let (f2, g2) = k.kinds()?;
                Ok((FunctorKind::pair(f1, f2), FunctorKind::pair(g1, g2)))
            }
            ConnectorExpr::PullLeft(l, alpha) => {
                let (f, g) = l.kinds()?;
                Ok((alpha.domain_given_codomain(&f)?, g))
            }
            ConnectorExpr::PullRight(l, beta) => {
                let (f, g) = l.kinds()?;
                Ok((f, beta.domain_given_codomain(&g)?))
            }
            ConnectorExpr::Kr(r) | ConnectorExpr::Lr(r) => Ok((
                FunctorKind::plts(r.src().clone()),
                FunctorKind::plts(r.dst().clone()),
            )),
            ConnectorExpr::Lf(a) => Ok((FunctorKind::plts(a.clone()), FunctorKind::plts(a.clone()))),
            ConnectorExpr::Lt(a) => Ok((FunctorKind::det(a.clone())?, FunctorKind::plts(a.clone()))),
            ConnectorExpr::Ioco { inputs, outputs } => Ok((
                FunctorKind::susp(inputs.clone(), outputs.clone())?,
                FunctorKind::susp_ie(inputs.clone(), outputs.clone())?,
            )),
            ConnectorExpr::Weak { labels, tau } => {
                let (sat, _) = weak_label_rel(labels, tau)?;
                Ok((FunctorKind::plts(labels.clone()), FunctorKind::plts(sat)))
            }
        }
    }
}

/// Pointwise evaluation: does `a L(r) b` hold? `a` lives over `r`'s
/// source carrier and `b` over its target carrier.
pub fn connector_holds(
    expr: &ConnectorExpr,
    caps: &EvalCaps,
    r: &Rel,
    a: &FunctorTerm,
    b: &FunctorTerm,
) -> Result<bool> {
    match expr {
        ConnectorExpr::Id(kind) => id_lift(kind, caps, r, a, b),
        ConnectorExpr::Kant(lam) => kant_lift(lam, caps, r, a, b),
        ConnectorExpr::Comp(l, k) => comp_lift(l, k, caps, r, a, b),
        ConnectorExpr::Conv(l) => connector_holds(l, caps, &r.converse(), b, a),
        ConnectorExpr::Meet(l, k) => {
            Ok(connector_holds(l, caps, r, a, b)? && connector_holds(k, caps, r, a, b)?)
        }
        ConnectorExpr::Prod(l, k) => match (a, b) {
            (FunctorTerm::Pair(a1, a2), FunctorTerm::Pair(b1, b2)) => {
                Ok(connector_holds(l, caps, r, a1, b1)?
                    && connector_holds(k, caps, r, a2, b2)?)
            }
            _ => Err(Error::KindMismatch {
                context: "product connector".into(),
                expected: "pair terms".into(),
                got: format!("{a:?} / {b:?}"),
            }),
        },
        ConnectorExpr::PullLeft(l, alpha) => {
            connector_holds(l, caps, r, &alpha.apply(a)?, b)
        }
        ConnectorExpr::PullRight(l, beta) => {
            connector_holds(l, caps, r, a, &beta.apply(b)?)
        }
        ConnectorExpr::Kr(rr) => kr_lift(rr, r, a, b),
        ConnectorExpr::Lr(rr) => lr_lift(rr, r, a, b),
        ConnectorExpr::Lf(_) => lf_lift(r, a, b),
        ConnectorExpr::Lt(_) => lt_lift(r, a, b),
        ConnectorExpr::Ioco { .. } => ioco_lift(r, a, b),
        ConnectorExpr::Weak { labels, tau } => {
            let (_, rhat) = weak_label_rel(labels, tau)?;
            weak_lift(&rhat, r, a, b)
        }
    }
}

// ---------------------------------------------------------------------
// Identity connector, one closed form per kind
// ---------------------------------------------------------------------

fn id_lift(
    kind: &FunctorKind,
    caps: &EvalCaps,
    r: &Rel,
    a: &FunctorTerm,
    b: &FunctorTerm,
) -> Result<bool> {
    match (kind, a, b) {
        (FunctorKind::Plts { .. }, FunctorTerm::Plts(_), FunctorTerm::Plts(_)) => {
            egli_milner_lift(r, a, b)
        }
        (FunctorKind::Dlts { .. }, FunctorTerm::Dlts(_), FunctorTerm::Dlts(_)) => {
            coupling_lift(r, a, b)
        }
        (FunctorKind::Det { .. }, FunctorTerm::Det(l, x), FunctorTerm::Det(m, y)) => {
            Ok(l == m && r.contains(*x, *y))
        }
        (
            FunctorKind::Susp { .. } | FunctorKind::SuspIe { .. },
            FunctorTerm::Susp { inp: ai, out: ao },
            FunctorTerm::Susp { inp: bi, out: bo },
        ) => {
            let dom_eq = ai.keys().eq(bi.keys()) && ao.keys().eq(bo.keys());
            Ok(dom_eq
                && ai.iter().all(|(k, x)| r.contains(*x, bi[k]))
                && ao.iter().all(|(k, x)| r.contains(*x, bo[k])))
        }
        (FunctorKind::Pair(k1, k2), FunctorTerm::Pair(a1, a2), FunctorTerm::Pair(b1, b2)) => {
            Ok(id_lift(k1, caps, r, a1, b1)? && id_lift(k2, caps, r, a2, b2)?)
        }
        _ => Err(Error::KindMismatch {
            context: "identity connector".into(),
            expected: kind.to_string(),
            got: format!("{a:?} / {b:?}"),
        }),
    }
}

/// Both directions of the step-set relation lifting.
pub fn egli_milner_lift(r: &Rel, a: &FunctorTerm, b: &FunctorTerm) -> Result<bool> {
    match (a, b) {
        (FunctorTerm::Plts(sa), FunctorTerm::Plts(sb)) => {
            let forth = sa
                .iter()
                .all(|(l, x)| sb.iter().any(|(m, y)| l == m && r.contains(*x, *y)));
            let back = sb
                .iter()
                .all(|(m, y)| sa.iter().any(|(l, x)| l == m && r.contains(*x, *y)));
            Ok(forth && back)
        }
        _ => Err(Error::KindMismatch {
            context: "step-set lifting".into(),
            expected: "step sets".into(),
            got: format!("{a:?} / {b:?}"),
        }),
    }
}

/// Forward half only.
pub fn lf_lift(r: &Rel, a: &FunctorTerm, b: &FunctorTerm) -> Result<bool> {
    match (a, b) {
        (FunctorTerm::Plts(sa), FunctorTerm::Plts(sb)) => Ok(sa
            .iter()
            .all(|(l, x)| sb.iter().any(|(m, y)| l == m && r.contains(*x, *y)))),
        _ => Err(Error::KindMismatch {
            context: "forward lifting".into(),
            expected: "step sets".into(),
            got: format!("{a:?} / {b:?}"),
        }),
    }
}

pub fn lt_lift(r: &Rel, a: &FunctorTerm, b: &FunctorTerm) -> Result<bool> {
    match (a, b) {
        (FunctorTerm::Det(l, x), FunctorTerm::Plts(sb)) => Ok(sb
            .iter()
            .any(|(m, y)| m == l && r.contains(*x, *y))),
        _ => Err(Error::KindMismatch {
            context: "determinization lifting".into(),
            expected: "deterministic step vs step set".into(),
            got: format!("{a:?} / {b:?}"),
        }),
    }
}

/// Universal translation: every source step must be answered on every
/// related label.
pub fn kr_lift(rr: &Rel, r: &Rel, a: &FunctorTerm, b: &FunctorTerm) -> Result<bool> {
    match (a, b) {
        (FunctorTerm::Plts(sa), FunctorTerm::Plts(sb)) => {
            for (l, m) in rr.pairs() {
                for (la, x) in sa {
                    if *la != l {
                        continue;
                    }
                    if !sb.iter().any(|(mb, y)| *mb == m && r.contains(*x, *y)) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        _ => Err(Error::KindMismatch {
            context: "translation connector".into(),
            expected: "step sets".into(),
            got: format!("{a:?} / {b:?}"),
        }),
    }
}

/// Two-sided translation: forward clause as in [`kr_lift`] plus the
/// symmetric backward clause inside each related label pair.
pub fn lr_lift(rr: &Rel, r: &Rel, a: &FunctorTerm, b: &FunctorTerm) -> Result<bool> {
    match (a, b) {
        (FunctorTerm::Plts(sa), FunctorTerm::Plts(sb)) => {
            for (l, m) in rr.pairs() {
                for (la, x) in sa {
                    if *la != l {
                        continue;
                    }
                    if !sb.iter().any(|(mb, y)| *mb == m && r.contains(*x, *y)) {
                        return Ok(false);
                    }
                }
                for (mb, y) in sb {
                    if *mb != m {
                        continue;
                    }
                    if !sa.iter().any(|(la, x)| *la == l && r.contains(*x, *y)) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        _ => Err(Error::KindMismatch {
            context: "translation connector".into(),
            expected: "step sets".into(),
            got: format!("{a:?} / {b:?}"),
        }),
    }
}

/// Weak answer clause: every left step finds a related-label step of the
/// saturated right term.
pub fn weak_lift(rhat: &Rel, r: &Rel, a: &FunctorTerm, b: &FunctorTerm) -> Result<bool> {
    match (a, b) {
        (FunctorTerm::Plts(sa), FunctorTerm::Plts(sb)) => Ok(sa.iter().all(|(l, x)| {
            sb.iter()
                .any(|(m, y)| rhat.contains(*l, *m) && r.contains(*x, *y))
        })),
        _ => Err(Error::KindMismatch {
            context: "weak connector".into(),
            expected: "step sets".into(),
            got: format!("{a:?} / {b:?}"),
        }),
    }
}

/// Conformance clause: inputs the specification offers must be matched
/// by the implementation, outputs the implementation produces must be
/// allowed by the specification.
pub fn ioco_lift(r: &Rel, a: &FunctorTerm, b: &FunctorTerm) -> Result<bool> {
    match (a, b) {
        (
            FunctorTerm::Susp { inp: si, out: so },
            FunctorTerm::Susp { inp: ii, out: io },
        ) => {
            for (k, xs) in si {
                match ii.get(k) {
                    Some(yi) if r.contains(*xs, *yi) => {}
                    _ => return Ok(false),
                }
            }
            for (k, yo) in io {
                match so.get(k) {
                    Some(xo) if r.contains(*xo, *yo) => {}
                    _ => return Ok(false),
                }
            }
            Ok(true)
        }
        _ => Err(Error::KindMismatch {
            context: "conformance connector".into(),
            expected: "suspension terms".into(),
            got: format!("{a:?} / {b:?}"),
        }),
    }
}

/// Closed form for conformance compatibility of two specifications:
/// shared inputs are related pointwise and some shared output is
/// related.
pub fn ioco_compat_lift(r: &Rel, a: &FunctorTerm, b: &FunctorTerm) -> Result<bool> {
    match (a, b) {
        (
            FunctorTerm::Susp { inp: ai, out: ao },
            FunctorTerm::Susp { inp: bi, out: bo },
        ) => {
            for (k, xa) in ai {
                if let Some(xb) = bi.get(k) {
                    if !r.contains(*xa, *xb) {
                        return Ok(false);
                    }
                }
            }
            Ok(ao
                .iter()
                .any(|(k, xa)| bo.get(k).is_some_and(|xb| r.contains(*xa, *xb))))
        }
        _ => Err(Error::KindMismatch {
            context: "compatibility connector".into(),
            expected: "suspension terms".into(),
            got: format!("{a:?} / {b:?}"),
        }),
    }
}

/// Exact coupling feasibility per label: marginal masses agree and an
/// integral transportation plan supported on `r` exists.
pub fn coupling_lift(r: &Rel, a: &FunctorTerm, b: &FunctorTerm) -> Result<bool> {
    let (ma, mb) = match (a, b) {
        (FunctorTerm::Dlts(ma), FunctorTerm::Dlts(mb)) => (ma, mb),
        _ => {
            return Err(Error::KindMismatch {
                context: "coupling lifting".into(),
                expected: "distribution terms".into(),
                got: format!("{a:?} / {b:?}"),
            })
        }
    };
    let labels: std::collections::BTreeSet<u32> = ma
        .keys()
        .map(|(l, _)| *l)
        .chain(mb.keys().map(|(l, _)| *l))
        .collect();
    for l in labels {
        let am: Vec<(u32, Ratio)> = ma
            .iter()
            .filter(|((la, _), _)| *la == l)
            .map(|((_, x), w)| (*x, *w))
            .collect();
        let bm: Vec<(u32, Ratio)> = mb
            .iter()
            .filter(|((lb, _), _)| *lb == l)
            .map(|((_, y), w)| (*y, *w))
            .collect();
        let ta: Ratio = am.iter().map(|(_, w)| *w).fold(Ratio::zero(), |p, q| p + q);
        let tb: Ratio = bm.iter().map(|(_, w)| *w).fold(Ratio::zero(), |p, q| p + q);
        if ta != tb {
            return Ok(false);
        }
        if ta.is_zero() {
            continue;
        }
        if !transport_feasible(r, &am, &bm)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Integer max-flow feasibility for one label's transportation problem.
fn transport_feasible(r: &Rel, am: &[(u32, Ratio)], bm: &[(u32, Ratio)]) -> Result<bool> {
    let scale = am
        .iter()
        .chain(bm)
        .fold(1i64, |acc, (_, w)| acc.lcm(w.denom()));
    let supply: Vec<i64> = am.iter().map(|(_, w)| (*w * scale).to_integer()).collect();
    let demand: Vec<i64> = bm.iter().map(|(_, w)| (*w * scale).to_integer()).collect();
    let n = am.len();
    let m = bm.len();
    // nodes: 0 = source, 1..=n supplies, n+1..=n+m demands, n+m+1 sink
    let nodes = n + m + 2;
    let sink = n + m + 1;
    let mut cap = vec![vec![0i64; nodes]; nodes];
    for (i, s) in supply.iter().enumerate() {
        cap[0][1 + i] = *s;
    }
    for (j, d) in demand.iter().enumerate() {
        cap[1 + n + j][sink] = *d;
    }
    let total: i64 = supply.iter().sum();
    for (i, (x, _)) in am.iter().enumerate() {
        for (j, (y, _)) in bm.iter().enumerate() {
            if r.contains(*x, *y) {
                cap[1 + i][1 + n + j] = total; // effectively unbounded
            }
        }
    }
    let mut flow = 0i64;
    loop {
        // BFS for an augmenting path
        let mut parent = vec![usize::MAX; nodes];
        parent[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for v in 0..nodes {
                if parent[v] == usize::MAX && cap[u][v] > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            break;
        }
        let mut bottleneck = i64::MAX;
        let mut v = sink;
        while v != 0 {
            let u = parent[v];
            bottleneck = bottleneck.min(cap[u][v]);
            v = u;
        }
        let mut v = sink;
        while v != 0 {
            let u = parent[v];
            cap[u][v] -= bottleneck;
            cap[v][u] += bottleneck;
            v = u;
        }
        flow += bottleneck;
    }
    Ok(flow == total)
}

// ---------------------------------------------------------------------
// Kantorovich connector
// ---------------------------------------------------------------------

/// `a` related to `b` over `r` iff for every lifting pair and every
/// argument tuple of subsets of `a`'s support, membership of `a` on the
/// left forces membership of `b` on the right at the direct images.
pub fn kant_lift(
    lam: &LambdaRel,
    caps: &EvalCaps,
    r: &Rel,
    a: &FunctorTerm,
    b: &FunctorTerm,
) -> Result<bool> {
    let (x0, _z0, r0, a0, b0) = restrict_to_supports(r, a, b)?;
    let nx = x0.size();
    if nx > caps.support_cap {
        return Err(Error::CapExceeded {
            what: "support size in Kantorovich evaluation".into(),
            needs: nx as u128,
            cap: caps.support_cap as u128,
        });
    }
    for (laml, mu) in lam.pairs() {
        let n = laml.arity(lam.src_kind())?;
        let bits = (n * nx) as u32;
        if bits > caps.kant_bits {
            return Err(Error::CapExceeded {
                what: format!("argument tuples for lifting pair ({laml},{mu})"),
                needs: 1u128 << bits,
                cap: 1u128 << caps.kant_bits,
            });
        }
        for mask in 0u64..(1u64 << bits) {
            let args: Vec<Subset> = (0..n)
                .map(|i| {
                    Subset::from_indices(
                        &x0,
                        x0.indices()
                            .filter(|x| mask & (1u64 << (i * nx + *x as usize)) != 0),
                    )
                })
                .collect();
            if !eval_lifting(laml, lam.src_kind(), &a0, &args)? {
                continue;
            }
            let images: Vec<Subset> = args
                .iter()
                .map(|s| r0.image(s))
                .collect::<Result<_>>()?;
            if !eval_lifting(mu, lam.dst_kind(), &b0, &images)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A refutation of a Kantorovich membership: the lifting pair and an
/// inclusion-minimal argument tuple on which the left term passes the
/// first lifting while the right term fails the second at the images.
#[derive(Clone, Debug)]
pub struct KantViolation {
    pub pair_index: usize,
    /// Argument subsets over the full source carrier of the relation.
    pub args: Vec<Subset>,
}

/// Finds a violation witness for `a Kant(lam)(r) b`, or `None` if the
/// membership holds. Deterministic: first lifting pair in declaration
/// order, first failing tuple in mask order, then shrunk to
/// inclusion-minimality one element at a time.
pub fn kant_violation(
    lam: &LambdaRel,
    caps: &EvalCaps,
    r: &Rel,
    a: &FunctorTerm,
    b: &FunctorTerm,
) -> Result<Option<KantViolation>> {
    let (x0, _z0, r0, a0, b0) = restrict_to_supports(r, a, b)?;
    let nx = x0.size();
    if nx > caps.support_cap {
        return Err(Error::CapExceeded {
            what: "support size in Kantorovich evaluation".into(),
            needs: nx as u128,
            cap: caps.support_cap as u128,
        });
    }
    for (pair_index, (laml, mu)) in lam.pairs().iter().enumerate() {
        let n = laml.arity(lam.src_kind())?;
        let bits = (n * nx) as u32;
        if bits > caps.kant_bits {
            return Err(Error::CapExceeded {
                what: format!("argument tuples for lifting pair ({laml},{mu})"),
                needs: 1u128 << bits,
                cap: 1u128 << caps.kant_bits,
            });
        }
        let violates = |args: &[Subset]| -> Result<bool> {
            if !eval_lifting(laml, lam.src_kind(), &a0, args)? {
                return Ok(false);
            }
            let images: Vec<Subset> = args
                .iter()
                .map(|s| r0.image(s))
                .collect::<Result<_>>()?;
            Ok(!eval_lifting(mu, lam.dst_kind(), &b0, &images)?)
        };
        for mask in 0u64..(1u64 << bits) {
            let mut args: Vec<Subset> = (0..n)
                .map(|i| {
                    Subset::from_indices(
                        &x0,
                        x0.indices()
                            .filter(|x| mask & (1u64 << (i * nx + *x as usize)) != 0),
                    )
                })
                .collect();
            if !violates(&args)? {
                continue;
            }
            // shrink to an inclusion-minimal witness
            let mut changed = true;
            while changed {
                changed = false;
                for i in 0..n {
                    for e in args[i].iter().collect::<Vec<u32>>() {
                        let mut smaller = args.clone();
                        let mut cut = smaller[i].clone();
                        let keep = Subset::from_indices(
                            &x0,
                            cut.iter().filter(|v| *v != e),
                        );
                        cut = keep;
                        smaller[i] = cut;
                        if violates(&smaller)? {
                            args = smaller;
                            changed = true;
                        }
                    }
                }
            }
            // map back to the full carrier by element names
            let full_args: Vec<Subset> = args
                .iter()
                .map(|s| {
                    Subset::from_indices(
                        r.src(),
                        s.iter().map(|i| {
                            r.src()
                                .index_of(x0.name(i))
                                .expect("restricted carrier keeps names")
                        }),
                    )
                })
                .collect();
            return Ok(Some(KantViolation {
                pair_index,
                args: full_args,
            }));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------

fn comp_lift(
    l: &ConnectorExpr,
    k: &ConnectorExpr,
    caps: &EvalCaps,
    r: &Rel,
    a: &FunctorTerm,
    b: &FunctorTerm,
) -> Result<bool> {
    // Tier 1: registered closed forms and identity absorption.
    match (l, k) {
        (ConnectorExpr::Id(_), _) => return connector_holds(k, caps, r, a, b),
        (_, ConnectorExpr::Id(_)) => return connector_holds(l, caps, r, a, b),
        (ConnectorExpr::Lr(q), ConnectorExpr::Lr(rr)) => {
            return lqlr_comp_lift(q, rr, r, a, b)
        }
        (ConnectorExpr::Conv(inner), ConnectorExpr::Ioco { .. }) => {
            if matches!(inner.as_ref(), ConnectorExpr::Ioco { .. }) {
                return ioco_compat_lift(r, a, b);
            }
        }
        (ConnectorExpr::Lt(_), ConnectorExpr::Conv(inner)) => {
            if matches!(inner.as_ref(), ConnectorExpr::Lt(_)) {
                return shared_step_lift(r, a, b);
            }
        }
        _ => {}
    }
    // Tier 2: exact search over the maximal-box factorization.
    let (_, mid_kind) = k.kinds()?;
    let inner_eval = |t: &Rel, x: &FunctorTerm, y: &FunctorTerm| connector_holds(k, caps, t, x, y);
    let outer_eval = |s: &Rel, x: &FunctorTerm, y: &FunctorTerm| connector_holds(l, caps, s, x, y);
    let brute = ComposeBrute {
        inner: &inner_eval,
        outer: &outer_eval,
        mid_kind,
        cap: caps.middle_cap,
    };
    brute.compose_couniv(r, a, b)
}

/// Closed form for the composite of two two-sided translations
/// `Lr(q) . Lr(rr)` (`rr` applied first): each clause asks for a box of
/// the relation supporting a virtual middle state.
pub fn lqlr_comp_lift(
    q: &Rel,
    rr: &Rel,
    r: &Rel,
    a: &FunctorTerm,
    b: &FunctorTerm,
) -> Result<bool> {
    let (sa, sb) = match (a, b) {
        (FunctorTerm::Plts(sa), FunctorTerm::Plts(sb)) => (sa, sb),
        _ => {
            return Err(Error::KindMismatch {
                context: "translation composite".into(),
                expected: "step sets".into(),
                got: format!("{a:?} / {b:?}"),
            })
        }
    };
    let boxes = max_boxes(r);
    let box_ok = |ax: &Subset, bz: &Subset, m: u32| -> bool {
        // (i) every label related to m from the left hits the box
        let left_ok = rr
            .pairs()
            .iter()
            .filter(|(_, mm)| *mm == m)
            .all(|(l, _)| sa.iter().any(|(la, x)| la == l && ax.contains(*x)));
        // (ii) every label m maps to on the right is answered inside
        let right_ok = q
            .pairs()
            .iter()
            .filter(|(mm, _)| *mm == m)
            .all(|(_, p)| sb.iter().any(|(pb, z)| pb == p && bz.contains(*z)));
        left_ok && right_ok
    };
    // forth: each left step on a label related to some middle label
    for (l, m) in rr.pairs() {
        for (la, x) in sa {
            if *la != l {
                continue;
            }
            if !boxes
                .iter()
                .any(|(ax, bz)| ax.contains(*x) && box_ok(ax, bz, m))
            {
                return Ok(false);
            }
        }
    }
    // back: symmetric clause through the right translation
    for (m, p) in q.pairs() {
        for (pb, z) in sb {
            if *pb != p {
                continue;
            }
            if !boxes
                .iter()
                .any(|(ax, bz)| bz.contains(*z) && box_ok(ax, bz, m))
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Closed form for `Lt . Conv(Lt)`: the two step sets share a label with
/// related targets.
pub fn shared_step_lift(r: &Rel, a: &FunctorTerm, b: &FunctorTerm) -> Result<bool> {
    match (a, b) {
        (FunctorTerm::Plts(sa), FunctorTerm::Plts(sb)) => Ok(sa.iter().any(|(l, x)| {
            sb.iter().any(|(m, y)| l == m && r.contains(*x, *y))
        })),
        _ => Err(Error::KindMismatch {
            context: "shared step composite".into(),
            expected: "step sets".into(),
            got: format!("{a:?} / {b:?}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functors::{enumerate_terms, EnumCfg};
    use crate::liftings::Lifting;
    use crate::oracle::barr_set;

    fn all_rels(x: &FinSet, z: &FinSet) -> Vec<Rel> {
        let bits = x.size() * z.size();
        (0u64..(1 << bits))
            .map(|m| {
                let mut r = Rel::empty(x, z);
                for i in 0..bits {
                    if m & (1 << i) != 0 {
                        r.insert((i / z.size()) as u32, (i % z.size()) as u32);
                    }
                }
                r
            })
            .collect()
    }

    #[test]
    fn id_plts_equals_barr_small() {
        let kind = FunctorKind::plts(FinSet::new(["a"]).unwrap());
        let x = FinSet::numbered("x", 2);
        let z = FinSet::numbered("z", 2);
        let cfg = EnumCfg::default();
        let terms = enumerate_terms(&kind, 2, &cfg).unwrap();
        let caps = EvalCaps::default();
        for r in all_rels(&x, &z) {
            let set = barr_set(&kind, &r, &cfg).unwrap();
            for a in &terms {
                for b in &terms {
                    let em = id_lift(&kind, &caps, &r, a, b).unwrap();
                    assert_eq!(em, set.contains(&(a.clone(), b.clone())));
                }
            }
        }
    }

    #[test]
    fn id_dlts_equals_barr_small() {
        let kind = FunctorKind::dlts(FinSet::new(["a"]).unwrap());
        let x = FinSet::numbered("x", 2);
        let z = FinSet::numbered("z", 2);
        let cfg = EnumCfg {
            cap: 1 << 20,
            dlts_denominator: 2,
        };
        let terms = enumerate_terms(&kind, 2, &cfg).unwrap();
        let caps = EvalCaps::default();
        for r in all_rels(&x, &z) {
            for a in &terms {
                for b in &terms {
                    let cp = id_lift(&kind, &caps, &r, a, b).unwrap();
                    let br = crate::oracle::brute_barr(&kind, &r, a, b, &cfg).unwrap();
                    assert_eq!(cp, br, "coupling vs search on {a:?} {b:?} over {r:?}");
                }
            }
        }
    }

    #[test]
    fn kr_as_pulled_forward_lifting() {
        // the universal translation connector factors through relabelling
        let a = FinSet::new(["a", "b"]).unwrap();
        let bl = FinSet::new(["u"]).unwrap();
        let mut rr = Rel::empty(&a, &bl);
        rr.insert(0, 0);
        rr.insert(1, 0);
        let kr = ConnectorExpr::Kr(rr.clone());
        let pulled = ConnectorExpr::PullLeft(
            Box::new(ConnectorExpr::Lf(bl.clone())),
            NatTrans::Relabel(rr),
        );
        let x = FinSet::numbered("x", 2);
        let z = FinSet::numbered("z", 2);
        let kind_a = FunctorKind::plts(a);
        let kind_b = FunctorKind::plts(bl);
        let cfg = EnumCfg::default();
        let ta = enumerate_terms(&kind_a, 2, &cfg).unwrap();
        let tb = enumerate_terms(&kind_b, 2, &cfg).unwrap();
        let caps = EvalCaps::default();
        for r in all_rels(&x, &z) {
            for s in &ta {
                for t in &tb {
                    assert_eq!(
                        connector_holds(&kr, &caps, &r, s, t).unwrap(),
                        connector_holds(&pulled, &caps, &r, s, t).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn lr_is_meet_of_kr_and_converse() {
        let a = FinSet::new(["a"]).unwrap();
        let bl = FinSet::new(["u", "v"]).unwrap();
        let mut rr = Rel::empty(&a, &bl);
        rr.insert(0, 0);
        rr.insert(0, 1);
        let lr = ConnectorExpr::Lr(rr.clone());
        let both = ConnectorExpr::Meet(
            Box::new(ConnectorExpr::Kr(rr.clone())),
            Box::new(ConnectorExpr::Conv(Box::new(ConnectorExpr::Kr(
                rr.converse(),
            )))),
        );
        let x = FinSet::numbered("x", 2);
        let z = FinSet::numbered("z", 2);
        let cfg = EnumCfg::default();
        let ta = enumerate_terms(&FunctorKind::plts(a), 2, &cfg).unwrap();
        let tb = enumerate_terms(&FunctorKind::plts(bl), 2, &cfg).unwrap();
        let caps = EvalCaps::default();
        for r in all_rels(&x, &z) {
            for s in &ta {
                for t in &tb {
                    assert_eq!(
                        connector_holds(&lr, &caps, &r, s, t).unwrap(),
                        connector_holds(&both, &caps, &r, s, t).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn weak_matches_pullback_construction() {
        let labels = FinSet::new(["a", "tau"]).unwrap();
        let (sat, rhat) = weak_label_rel(&labels, "tau").unwrap();
        let weak = ConnectorExpr::Weak {
            labels: labels.clone(),
            tau: "tau".into(),
        };
        let built = ConnectorExpr::PullRight(
            Box::new(ConnectorExpr::Lf(labels.clone())),
            NatTrans::RelabelConv(rhat),
        );
        let x = FinSet::numbered("x", 2);
        let z = FinSet::numbered("z", 2);
        let cfg = EnumCfg::default();
        let ta = enumerate_terms(&FunctorKind::plts(labels), 2, &cfg).unwrap();
        let tb = enumerate_terms(&FunctorKind::plts(sat), 2, &cfg).unwrap();
        let caps = EvalCaps::default();
        for r in all_rels(&x, &z).into_iter().step_by(3) {
            for s in ta.iter() {
                for t in tb.iter().step_by(2) {
                    assert_eq!(
                        connector_holds(&weak, &caps, &r, s, t).unwrap(),
                        connector_holds(&built, &caps, &r, s, t).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn saturation_of_silent_free_system_adds_idle_loops() {
        let labels = FinSet::new(["a", "tau"]).unwrap();
        let kind = FunctorKind::plts(labels);
        let c = Coalgebra::new(
            kind,
            FinSet::numbered("x", 2),
            vec![
                FunctorTerm::Plts([(0u32, 1u32)].into()),
                FunctorTerm::Plts([].into()),
            ],
        )
        .unwrap();
        let s = weak_saturate(&c, "tau").unwrap();
        let eps = s.kind().labels().unwrap().require(EPSILON_LABEL).unwrap();
        match s.gamma(0) {
            FunctorTerm::Plts(set) => {
                assert!(set.contains(&(eps, 0)));
                assert!(set.contains(&(0, 1)));
                assert!(!set.contains(&(eps, 1)));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn coupling_feasibility_examples() {
        let x = FinSet::numbered("x", 2);
        let z = FinSet::numbered("z", 2);
        let half = FunctorTerm::Dlts(
            [((0u32, 0u32), Ratio::new(1, 2)), ((0, 1), Ratio::new(1, 2))].into(),
        );
        let third = FunctorTerm::Dlts(
            [((0u32, 0u32), Ratio::new(1, 3)), ((0, 1), Ratio::new(2, 3))].into(),
        );
        let full = Rel::full(&x, &z);
        let diag = Rel::diagonal(&x);
        assert!(coupling_lift(&full, &half, &third).unwrap());
        assert!(!coupling_lift(&diag, &half, &third).unwrap());
        let mut cross = Rel::empty(&x, &z);
        cross.insert(0, 1);
        cross.insert(1, 0);
        assert!(coupling_lift(&cross, &half, &half).unwrap());
    }

    #[test]
    fn conv_is_involutive_pointwise() {
        let a = FinSet::new(["a"]).unwrap();
        let kind = FunctorKind::plts(a.clone());
        let lam = LambdaRel::new(
            kind.clone(),
            kind.clone(),
            vec![(Lifting::Dia("a".into()), Lifting::Dia("a".into()))],
        )
        .unwrap();
        let e = ConnectorExpr::Kant(lam);
        let twice = ConnectorExpr::Conv(Box::new(ConnectorExpr::Conv(Box::new(e.clone()))));
        let x = FinSet::numbered("x", 2);
        let z = FinSet::numbered("z", 2);
        let cfg = EnumCfg::default();
        let terms = enumerate_terms(&kind, 2, &cfg).unwrap();
        let caps = EvalCaps::default();
        for r in all_rels(&x, &z) {
            for s in &terms {
                for t in &terms {
                    assert_eq!(
                        connector_holds(&e, &caps, &r, s, t).unwrap(),
                        connector_holds(&twice, &caps, &r, s, t).unwrap()
                    );
                }
            }
        }
    }
}
