//! Monotone predicate liftings and lifting relations.
//!
//! A lifting turns predicates (subsets of the carrier) into a predicate on
//! functor terms. All catalog entries are monotone, and each comes with a
//! dual so that converses of Kantorovich connectors stay inside the
//! catalog. Applicability is per functor kind; asking for an undefined
//! combination is a typed error, never a silent default.

use std::fmt;

use num_traits::Zero;

use crate::err::{Error, Result};
use crate::functors::{FunctorKind, FunctorTerm, Ratio};
use crate::rel::Subset;

pub const BIGFAM_MAX_ARITY: usize = 8;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Lifting {
    /// Some `l`-successor lies in the argument set.
    Dia(String),
    /// Every `l`-successor lies in the argument set (dual of `Dia`).
    Box(String),
    /// `l` is undefined (0-ary; suspension kinds only).
    Down(String),
    /// `l` is defined (0-ary; dual of `Down`).
    Def(String),
    /// The mass reaching the argument set under label `l` is at least eps.
    PGe(String, Ratio),
    /// The mass escaping the argument set under `l` is strictly below eps
    /// (dual of `PGe`).
    PLt(String, Ratio),
    /// One argument set per alphabet label; every successor obeys its
    /// label's set.
    BigBox,
    /// One argument set per alphabet label; some successor hits its
    /// label's set.
    BigDia,
    /// A positive Boolean skeleton over atomic liftings whose arguments
    /// are positive combinations of placeholders.
    Pos(PosSkel),
}

/// Outer skeleton: positive combinations of atomic lifting applications.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum PosSkel {
    Top,
    Bot,
    And(Box<PosSkel>, Box<PosSkel>),
    Or(Box<PosSkel>, Box<PosSkel>),
    Ap(Box<Lifting>, Vec<InnerSkel>),
}

/// Inner skeleton: positive combinations of placeholder sets.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum InnerSkel {
    Top,
    Bot,
    And(Box<InnerSkel>, Box<InnerSkel>),
    Or(Box<InnerSkel>, Box<InnerSkel>),
    Ph(usize),
}

impl Lifting {
    /// The arity of this lifting when read against `kind`, checking
    /// applicability.
    pub fn arity(&self, kind: &FunctorKind) -> Result<usize> {
        match self {
            Lifting::Dia(l) | Lifting::Box(l) => {
                resolve_label(kind, l)?;
                Ok(1)
            }
            Lifting::Down(l) | Lifting::Def(l) => match resolve_label(kind, l)? {
                ResolvedLabel::SuspIn(..) | ResolvedLabel::SuspOut(..) => Ok(0),
                _ => Err(self.kind_error(kind)),
            },
            Lifting::PGe(l, _) | Lifting::PLt(l, _) => match kind {
                FunctorKind::Dlts { labels } => {
                    labels.require(l).map_err(|_| self.kind_error(kind))?;
                    Ok(1)
                }
                _ => Err(self.kind_error(kind)),
            },
            Lifting::BigBox | Lifting::BigDia => match kind {
                FunctorKind::Plts { labels } | FunctorKind::Det { labels } => {
                    if labels.size() > BIGFAM_MAX_ARITY {
                        return Err(Error::Arity {
                            context: format!("{self} over {kind}"),
                            expected: BIGFAM_MAX_ARITY,
                            got: labels.size(),
                        });
                    }
                    Ok(labels.size())
                }
                _ => Err(self.kind_error(kind)),
            },
            Lifting::Pos(skel) => {
                let mut max_ph = None;
                skel_arity(skel, kind, &mut max_ph)?;
                Ok(max_ph.map_or(0, |m| m + 1))
            }
        }
    }

    fn kind_error(&self, kind: &FunctorKind) -> Error {
        Error::LiftingKind {
            lifting: self.to_string(),
            kind: kind.to_string(),
        }
    }

    /// The De Morgan dual. Involutive: `dual(dual(l)) == l`.
    pub fn dual(&self) -> Lifting {
        match self {
            Lifting::Dia(l) => Lifting::Box(l.clone()),
            Lifting::Box(l) => Lifting::Dia(l.clone()),
            Lifting::Down(l) => Lifting::Def(l.clone()),
            Lifting::Def(l) => Lifting::Down(l.clone()),
            Lifting::PGe(l, e) => Lifting::PLt(l.clone(), *e),
            Lifting::PLt(l, e) => Lifting::PGe(l.clone(), *e),
            Lifting::BigBox => Lifting::BigDia,
            Lifting::BigDia => Lifting::BigBox,
            Lifting::Pos(s) => Lifting::Pos(dual_outer(s)),
        }
    }
}

fn dual_outer(s: &PosSkel) -> PosSkel {
    match s {
        PosSkel::Top => PosSkel::Bot,
        PosSkel::Bot => PosSkel::Top,
        PosSkel::And(a, b) => PosSkel::Or(Box::new(dual_outer(a)), Box::new(dual_outer(b))),
        PosSkel::Or(a, b) => PosSkel::And(Box::new(dual_outer(a)), Box::new(dual_outer(b))),
        PosSkel::Ap(l, args) => PosSkel::Ap(
            Box::new(l.dual()),
            args.iter().map(dual_inner).collect(),
        ),
    }
}

fn dual_inner(s: &InnerSkel) -> InnerSkel {
    match s {
        InnerSkel::Top => InnerSkel::Bot,
        InnerSkel::Bot => InnerSkel::Top,
        InnerSkel::And(a, b) => InnerSkel::Or(Box::new(dual_inner(a)), Box::new(dual_inner(b))),
        InnerSkel::Or(a, b) => InnerSkel::And(Box::new(dual_inner(a)), Box::new(dual_inner(b))),
        InnerSkel::Ph(i) => InnerSkel::Ph(*i),
    }
}

fn skel_arity(s: &PosSkel, kind: &FunctorKind, max_ph: &mut Option<usize>) -> Result<()> {
    match s {
        PosSkel::Top | PosSkel::Bot => Ok(()),
        PosSkel::And(a, b) | PosSkel::Or(a, b) => {
            skel_arity(a, kind, max_ph)?;
            skel_arity(b, kind, max_ph)
        }
        PosSkel::Ap(l, args) => {
            let want = l.arity(kind)?;
            if want != args.len() {
                return Err(Error::Arity {
                    context: format!("skeleton application of {l}"),
                    expected: want,
                    got: args.len(),
                });
            }
            for a in args {
                inner_phs(a, max_ph);
            }
            Ok(())
        }
    }
}

fn inner_phs(s: &InnerSkel, max_ph: &mut Option<usize>) {
    match s {
        InnerSkel::Top | InnerSkel::Bot => {}
        InnerSkel::And(a, b) | InnerSkel::Or(a, b) => {
            inner_phs(a, max_ph);
            inner_phs(b, max_ph);
        }
        InnerSkel::Ph(i) => {
            *max_ph = Some(max_ph.map_or(*i, |m: usize| m.max(*i)));
        }
    }
}

enum ResolvedLabel {
    Single(u32),
    SuspIn(u32),
    SuspOut(u32),
}

fn resolve_label(kind: &FunctorKind, l: &str) -> Result<ResolvedLabel> {
    match kind {
        FunctorKind::Plts { labels }
        | FunctorKind::Dlts { labels }
        | FunctorKind::Det { labels } => Ok(ResolvedLabel::Single(labels.require(l).map_err(
            |_| Error::LiftingKind {
                lifting: format!("label {l}"),
                kind: kind.to_string(),
            },
        )?)),
        FunctorKind::Susp { inputs, outputs } | FunctorKind::SuspIe { inputs, outputs } => {
            if let Some(i) = inputs.index_of(l) {
                Ok(ResolvedLabel::SuspIn(i))
            } else if let Some(o) = outputs.index_of(l) {
                Ok(ResolvedLabel::SuspOut(o))
            } else {
                Err(Error::LiftingKind {
                    lifting: format!("label {l}"),
                    kind: kind.to_string(),
                })
            }
        }
        FunctorKind::Pair(..) => Err(Error::LiftingKind {
            lifting: format!("label {l}"),
            kind: kind.to_string(),
        }),
    }
}

/// Evaluates a lifting on a term. `args` are subsets of the carrier the
/// term lives over; their number must match the lifting's arity.
pub fn eval_lifting(
    lift: &Lifting,
    kind: &FunctorKind,
    term: &FunctorTerm,
    args: &[Subset],
) -> Result<bool> {
    let want = lift.arity(kind)?;
    if args.len() != want {
        return Err(Error::Arity {
            context: format!("evaluating {lift} over {kind}"),
            expected: want,
            got: args.len(),
        });
    }
    eval_unchecked(lift, kind, term, args)
}

fn eval_unchecked(
    lift: &Lifting,
    kind: &FunctorKind,
    term: &FunctorTerm,
    args: &[Subset],
) -> Result<bool> {
    Ok(match lift {
        Lifting::Dia(l) => match (resolve_label(kind, l)?, term) {
            (ResolvedLabel::Single(li), FunctorTerm::Plts(set)) => {
                set.iter().any(|(m, x)| *m == li && args[0].contains(*x))
            }
            (ResolvedLabel::Single(li), FunctorTerm::Det(m, x)) => {
                *m == li && args[0].contains(*x)
            }
            (ResolvedLabel::SuspIn(li), FunctorTerm::Susp { inp, .. }) => {
                inp.get(&li).is_some_and(|x| args[0].contains(*x))
            }
            (ResolvedLabel::SuspOut(li), FunctorTerm::Susp { out, .. }) => {
                out.get(&li).is_some_and(|x| args[0].contains(*x))
            }
            _ => return Err(shape_error(lift, kind, term)),
        },
        Lifting::Box(l) => match (resolve_label(kind, l)?, term) {
            (ResolvedLabel::Single(li), FunctorTerm::Plts(set)) => set
                .iter()
                .all(|(m, x)| *m != li || args[0].contains(*x)),
            (ResolvedLabel::Single(li), FunctorTerm::Det(m, x)) => {
                *m != li || args[0].contains(*x)
            }
            (ResolvedLabel::SuspIn(li), FunctorTerm::Susp { inp, .. }) => {
                inp.get(&li).is_none_or(|x| args[0].contains(*x))
            }
            (ResolvedLabel::SuspOut(li), FunctorTerm::Susp { out, .. }) => {
                out.get(&li).is_none_or(|x| args[0].contains(*x))
            }
            _ => return Err(shape_error(lift, kind, term)),
        },
        Lifting::Down(l) => match (resolve_label(kind, l)?, term) {
            (ResolvedLabel::SuspIn(li), FunctorTerm::Susp { inp, .. }) => !inp.contains_key(&li),
            (ResolvedLabel::SuspOut(li), FunctorTerm::Susp { out, .. }) => !out.contains_key(&li),
            _ => return Err(shape_error(lift, kind, term)),
        },
        Lifting::Def(l) => match (resolve_label(kind, l)?, term) {
            (ResolvedLabel::SuspIn(li), FunctorTerm::Susp { inp, .. }) => inp.contains_key(&li),
            (ResolvedLabel::SuspOut(li), FunctorTerm::Susp { out, .. }) => out.contains_key(&li),
            _ => return Err(shape_error(lift, kind, term)),
        },
        Lifting::PGe(l, eps) => match (kind, term) {
            (FunctorKind::Dlts { labels }, FunctorTerm::Dlts(map)) => {
                let li = labels.require(l)?;
                let mass: Ratio = map
                    .iter()
                    .filter(|((m, x), _)| *m == li && args[0].contains(*x))
                    .map(|(_, w)| *w)
                    .fold(Ratio::zero(), |a, b| a + b);
                mass >= *eps
            }
            _ => return Err(shape_error(lift, kind, term)),
        },
        Lifting::PLt(l, eps) => match (kind, term) {
            (FunctorKind::Dlts { labels }, FunctorTerm::Dlts(map)) => {
                let li = labels.require(l)?;
                let mass: Ratio = map
                    .iter()
                    .filter(|((m, x), _)| *m == li && !args[0].contains(*x))
                    .map(|(_, w)| *w)
                    .fold(Ratio::zero(), |a, b| a + b);
                mass < *eps
            }
            _ => return Err(shape_error(lift, kind, term)),
        },
        Lifting::BigBox => match term {
            FunctorTerm::Plts(set) => set
                .iter()
                .all(|(l, x)| args[*l as usize].contains(*x)),
            FunctorTerm::Det(l, x) => args[*l as usize].contains(*x),
            _ => return Err(shape_error(lift, kind, term)),
        },
        Lifting::BigDia => match term {
            FunctorTerm::Plts(set) => set
                .iter()
                .any(|(l, x)| args[*l as usize].contains(*x)),
            FunctorTerm::Det(l, x) => args[*l as usize].contains(*x),
            _ => return Err(shape_error(lift, kind, term)),
        },
        Lifting::Pos(skel) => eval_outer(skel, kind, term, args)?,
    })
}

fn shape_error(lift: &Lifting, kind: &FunctorKind, term: &FunctorTerm) -> Error {
    Error::KindMismatch {
        context: format!("evaluating {lift}"),
        expected: kind.to_string(),
        got: format!("{term:?}"),
    }
}

fn eval_outer(
    s: &PosSkel,
    kind: &FunctorKind,
    term: &FunctorTerm,
    args: &[Subset],
) -> Result<bool> {
    Ok(match s {
        PosSkel::Top => true,
        PosSkel::Bot => false,
        PosSkel::And(a, b) => {
            eval_outer(a, kind, term, args)? && eval_outer(b, kind, term, args)?
        }
        PosSkel::Or(a, b) => eval_outer(a, kind, term, args)? || eval_outer(b, kind, term, args)?,
        PosSkel::Ap(l, inner) => {
            let sets: Vec<Subset> = inner.iter().map(|i| eval_inner(i, args)).collect();
            eval_lifting(l, kind, term, &sets)?
        }
    })
}

fn eval_inner(s: &InnerSkel, args: &[Subset]) -> Subset {
    let universe = args
        .first()
        .map(|a| a.universe().clone())
        .expect("inner skeletons occur only under applications with placeholders");
    match s {
        InnerSkel::Top => Subset::full(&universe),
        InnerSkel::Bot => Subset::empty(&universe),
        InnerSkel::And(a, b) => {
            let mut x = eval_inner(a, args);
            x.inter_with(&eval_inner(b, args));
            x
        }
        InnerSkel::Or(a, b) => {
            let mut x = eval_inner(a, args);
            x.union_with(&eval_inner(b, args));
            x
        }
        InnerSkel::Ph(i) => args[*i].clone(),
    }
}

impl fmt::Display for Lifting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lifting::Dia(l) => write!(f, "dia({l})"),
            Lifting::Box(l) => write!(f, "box({l})"),
            Lifting::Down(l) => write!(f, "down({l})"),
            Lifting::Def(l) => write!(f, "def({l})"),
            Lifting::PGe(l, e) => write!(f, "pge({l},{e})"),
            Lifting::PLt(l, e) => write!(f, "plt({l},{e})"),
            Lifting::BigBox => write!(f, "bigbox"),
            Lifting::BigDia => write!(f, "bigdia"),
            Lifting::Pos(s) => write!(f, "pos({})", show_outer(s)),
        }
    }
}

fn show_outer(s: &PosSkel) -> String {
    match s {
        PosSkel::Top => "top".into(),
        PosSkel::Bot => "bot".into(),
        PosSkel::And(a, b) => format!("(and {} {})", show_outer(a), show_outer(b)),
        PosSkel::Or(a, b) => format!("(or {} {})", show_outer(a), show_outer(b)),
        PosSkel::Ap(l, args) => {
            let inner: Vec<String> = args.iter().map(show_inner).collect();
            if inner.is_empty() {
                format!("(ap {l})")
            } else {
                format!("(ap {} {})", l, inner.join(" "))
            }
        }
    }
}

fn show_inner(s: &InnerSkel) -> String {
    match s {
        InnerSkel::Top => "top".into(),
        InnerSkel::Bot => "bot".into(),
        InnerSkel::And(a, b) => format!("(and {} {})", show_inner(a), show_inner(b)),
        InnerSkel::Or(a, b) => format!("(or {} {})", show_inner(a), show_inner(b)),
        InnerSkel::Ph(i) => format!("(ph {i})"),
    }
}

/// An arity-preserving relation between liftings of two kinds; the basis
/// of Kantorovich connectors and of the dual-purpose logic.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LambdaRel {
    src_kind: FunctorKind,
    dst_kind: FunctorKind,
    pairs: Vec<(Lifting, Lifting)>,
}

impl LambdaRel {
    pub fn new(
        src_kind: FunctorKind,
        dst_kind: FunctorKind,
        pairs: Vec<(Lifting, Lifting)>,
    ) -> Result<LambdaRel> {
        let mut seen: Vec<(Lifting, Lifting)> = Vec::new();
        for (lam, mu) in pairs {
            let al = lam.arity(&src_kind)?;
            let am = mu.arity(&dst_kind)?;
            if al != am {
                return Err(Error::Arity {
                    context: format!("lifting pair ({lam},{mu}) is not arity-preserving"),
                    expected: al,
                    got: am,
                });
            }
            if !seen.contains(&(lam.clone(), mu.clone())) {
                seen.push((lam, mu));
            }
        }
        Ok(LambdaRel {
            src_kind,
            dst_kind,
            pairs: seen,
        })
    }

    pub fn src_kind(&self) -> &FunctorKind {
        &self.src_kind
    }

    pub fn dst_kind(&self) -> &FunctorKind {
        &self.dst_kind
    }

    pub fn pairs(&self) -> &[(Lifting, Lifting)] {
        &self.pairs
    }

    /// `(dual of each pair, swapped)`: the lifting relation of the
    /// converse Kantorovich connector.
    pub fn converse_dual(&self) -> LambdaRel {
        LambdaRel {
            src_kind: self.dst_kind.clone(),
            dst_kind: self.src_kind.clone(),
            pairs: self
                .pairs
                .iter()
                .map(|(l, m)| (m.dual(), l.dual()))
                .collect(),
        }
    }

    /// Relation composition `other . self` (this one first): pairs
    /// `(lam, pi)` such that some middle lifting is shared syntactically.
    pub fn then(&self, other: &LambdaRel) -> Result<LambdaRel> {
        if self.dst_kind != other.src_kind {
            return Err(Error::KindMismatch {
                context: "lifting relation composition".into(),
                expected: self.dst_kind.to_string(),
                got: other.src_kind.to_string(),
            });
        }
        let mut pairs = Vec::new();
        for (lam, mu) in &self.pairs {
            for (mu2, pi) in &other.pairs {
                if mu == mu2 {
                    pairs.push((lam.clone(), pi.clone()));
                }
            }
        }
        LambdaRel::new(self.src_kind.clone(), other.dst_kind.clone(), pairs)
    }
}
