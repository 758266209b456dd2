//! Transition-type functors, their terms and coalgebras.
//!
//! A [`FunctorKind`] fixes the branching type of a system:
//! finitely-branching labelled transition systems (`Plts`), probabilistic
//! systems with exact rational weights (`Dlts`), deterministic systems
//! (`Det`), suspension automata over disjoint input/output alphabets
//! (`Susp`, input-enabled `SuspIe`), and binary products (`Pair`).
//!
//! A [`FunctorTerm`] is one transition structure over a carrier; a
//! [`Coalgebra`] assigns a validated term to every state.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::err::{Error, Result};
use crate::rel::FinSet;

pub type Ratio = Rational64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum FunctorKind {
    /// Finite powerset of labels x states.
    Plts { labels: FinSet },
    /// Finitely supported probability distributions over labels x states.
    Dlts { labels: FinSet },
    /// Exactly one labelled transition: labels x states.
    Det { labels: FinSet },
    /// Partial input map and non-empty partial output map.
    Susp { inputs: FinSet, outputs: FinSet },
    /// Total input map and non-empty partial output map.
    SuspIe { inputs: FinSet, outputs: FinSet },
    /// Binary product of two kinds.
    Pair(Box<FunctorKind>, Box<FunctorKind>),
}

impl FunctorKind {
    pub fn plts(labels: FinSet) -> FunctorKind {
        FunctorKind::Plts { labels }
    }

    pub fn dlts(labels: FinSet) -> FunctorKind {
        FunctorKind::Dlts { labels }
    }

    pub fn det(labels: FinSet) -> Result<FunctorKind> {
        if labels.is_empty() {
            return Err(Error::Validation(
                "deterministic kind needs a non-empty alphabet".into(),
            ));
        }
        Ok(FunctorKind::Det { labels })
    }

    pub fn susp(inputs: FinSet, outputs: FinSet) -> Result<FunctorKind> {
        check_disjoint(&inputs, &outputs)?;
        Ok(FunctorKind::Susp { inputs, outputs })
    }

    pub fn susp_ie(inputs: FinSet, outputs: FinSet) -> Result<FunctorKind> {
        check_disjoint(&inputs, &outputs)?;
        Ok(FunctorKind::SuspIe { inputs, outputs })
    }

    pub fn pair(k1: FunctorKind, k2: FunctorKind) -> FunctorKind {
        FunctorKind::Pair(Box::new(k1), Box::new(k2))
    }

    /// The single label alphabet of a non-product, non-suspension kind.
    pub fn labels(&self) -> Option<&FinSet> {
        match self {
            FunctorKind::Plts { labels }
            | FunctorKind::Dlts { labels }
            | FunctorKind::Det { labels } => Some(labels),
            _ => None,
        }
    }

    pub fn io_alphabets(&self) -> Option<(&FinSet, &FinSet)> {
        match self {
            FunctorKind::Susp { inputs, outputs } | FunctorKind::SuspIe { inputs, outputs } => {
                Some((inputs, outputs))
            }
            _ => None,
        }
    }

    /// Number of terms over a carrier of the given size, or `None` on
    /// overflow. `dlts_denominator` bounds the rationals enumerated.
    pub fn term_count(&self, carrier_size: usize, dlts_denominator: u32) -> Option<u128> {
        let n = carrier_size as u128;
        match self {
            FunctorKind::Plts { labels } => {
                let bits = (labels.size() as u128).checked_mul(n)?;
                if bits >= 128 {
                    return None;
                }
                Some(1u128 << bits)
            }
            FunctorKind::Dlts { labels } => {
                let k = (labels.size() as u128).checked_mul(n)?;
                if k == 0 {
                    return Some(0);
                }
                binomial(dlts_denominator as u128 + k - 1, k - 1)
            }
            FunctorKind::Det { labels } => (labels.size() as u128).checked_mul(n),
            FunctorKind::Susp { inputs, outputs } => {
                let pin = checked_pow(n + 1, inputs.size())?;
                let pout = checked_pow(n + 1, outputs.size())?.checked_sub(1)?;
                pin.checked_mul(pout)
            }
            FunctorKind::SuspIe { inputs, outputs } => {
                let pin = checked_pow(n, inputs.size())?;
                let pout = checked_pow(n + 1, outputs.size())?.checked_sub(1)?;
                pin.checked_mul(pout)
            }
            FunctorKind::Pair(k1, k2) => k1
                .term_count(carrier_size, dlts_denominator)?
                .checked_mul(k2.term_count(carrier_size, dlts_denominator)?),
        }
    }
}

fn check_disjoint(inputs: &FinSet, outputs: &FinSet) -> Result<()> {
    for n in inputs.names() {
        if outputs.index_of(n).is_some() {
            return Err(Error::Validation(format!(
                "input and output alphabets overlap on `{n}`"
            )));
        }
    }
    Ok(())
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    let mut acc = 1u128;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

impl fmt::Display for FunctorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctorKind::Plts { labels } => write!(f, "PLTS{labels}"),
            FunctorKind::Dlts { labels } => write!(f, "DLTS{labels}"),
            FunctorKind::Det { labels } => write!(f, "DET{labels}"),
            FunctorKind::Susp { inputs, outputs } => write!(f, "SUSP(in={inputs},out={outputs})"),
            FunctorKind::SuspIe { inputs, outputs } => {
                write!(f, "SUSPIE(in={inputs},out={outputs})")
            }
            FunctorKind::Pair(k1, k2) => write!(f, "PAIR({k1},{k2})"),
        }
    }
}

impl fmt::Debug for FunctorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// One transition structure over a carrier, indexed by `(label, state)`
/// positions into the kind's alphabets and the carrier.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctorTerm {
    Plts(BTreeSet<(u32, u32)>),
    Dlts(BTreeMap<(u32, u32), Ratio>),
    Det(u32, u32),
    Susp {
        inp: BTreeMap<u32, u32>,
        out: BTreeMap<u32, u32>,
    },
    Pair(Box<FunctorTerm>, Box<FunctorTerm>),
}

impl fmt::Debug for FunctorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctorTerm::Plts(s) => write!(f, "Plts{s:?}"),
            FunctorTerm::Dlts(m) => {
                let items: Vec<String> = m
                    .iter()
                    .map(|((l, x), w)| format!("({l},{x}):{w}"))
                    .collect();
                write!(f, "Dlts{{{}}}", items.join(","))
            }
            FunctorTerm::Det(l, x) => write!(f, "Det({l},{x})"),
            FunctorTerm::Susp { inp, out } => write!(f, "Susp{{in:{inp:?},out:{out:?}}}"),
            FunctorTerm::Pair(a, b) => write!(f, "Pair({a:?},{b:?})"),
        }
    }
}

/// Validates that `term` is a well-formed `kind`-term over a carrier of
/// `carrier_size` elements. Violation messages name the failing clause.
pub fn term_validate(kind: &FunctorKind, term: &FunctorTerm, carrier_size: usize) -> Result<()> {
    let n = carrier_size as u32;
    match (kind, term) {
        (FunctorKind::Plts { labels }, FunctorTerm::Plts(set)) => {
            for (l, x) in set {
                check_label(*l, labels)?;
                check_state(*x, n)?;
            }
            Ok(())
        }
        (FunctorKind::Dlts { labels }, FunctorTerm::Dlts(map)) => {
            let mut mass = Ratio::zero();
            for ((l, x), w) in map {
                check_label(*l, labels)?;
                check_state(*x, n)?;
                if *w <= Ratio::zero() {
                    return Err(Error::Validation(format!(
                        "weight {w} is not positive"
                    )));
                }
                mass += *w;
            }
            if !mass.is_one() {
                return Err(Error::Validation(format!("mass {mass} != 1")));
            }
            Ok(())
        }
        (FunctorKind::Det { labels }, FunctorTerm::Det(l, x)) => {
            check_label(*l, labels)?;
            check_state(*x, n)
        }
        (FunctorKind::Susp { inputs, outputs }, FunctorTerm::Susp { inp, out }) => {
            for (l, x) in inp {
                check_label(*l, inputs)?;
                check_state(*x, n)?;
            }
            for (l, x) in out {
                check_label(*l, outputs)?;
                check_state(*x, n)?;
            }
            if out.is_empty() {
                return Err(Error::Validation(
                    "suspension term is blocking: no output or quiescence transition".into(),
                ));
            }
            Ok(())
        }
        (FunctorKind::SuspIe { inputs, outputs }, FunctorTerm::Susp { inp, out }) => {
            for (l, x) in inp {
                check_label(*l, inputs)?;
                check_state(*x, n)?;
            }
            for (l, x) in out {
                check_label(*l, outputs)?;
                check_state(*x, n)?;
            }
            for l in inputs.indices() {
                if !inp.contains_key(&l) {
                    return Err(Error::Validation(format!(
                        "input {} undefined (kind is input-enabled)",
                        inputs.name(l)
                    )));
                }
            }
            if out.is_empty() {
                return Err(Error::Validation(
                    "suspension term is blocking: no output or quiescence transition".into(),
                ));
            }
            Ok(())
        }
        (FunctorKind::Pair(k1, k2), FunctorTerm::Pair(t1, t2)) => {
            term_validate(k1, t1, carrier_size)?;
            term_validate(k2, t2, carrier_size)
        }
        (kind, term) => Err(Error::KindMismatch {
            context: "term shape".into(),
            expected: kind.to_string(),
            got: format!("{term:?}"),
        }),
    }
}

fn check_label(l: u32, alphabet: &FinSet) -> Result<()> {
    if (l as usize) < alphabet.size() {
        Ok(())
    } else {
        Err(Error::StrayElement {
            element: format!("label#{l}"),
            carrier: alphabet.to_string(),
        })
    }
}

fn check_state(x: u32, n: u32) -> Result<()> {
    if x < n {
        Ok(())
    } else {
        Err(Error::StrayElement {
            element: format!("state#{x}"),
            carrier: format!("carrier of size {n}"),
        })
    }
}

/// The set of carrier indices a term mentions.
pub fn support(term: &FunctorTerm) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    collect_support(term, &mut out);
    out
}

fn collect_support(term: &FunctorTerm, out: &mut BTreeSet<u32>) {
    match term {
        FunctorTerm::Plts(set) => out.extend(set.iter().map(|(_, x)| *x)),
        FunctorTerm::Dlts(map) => out.extend(map.keys().map(|(_, x)| *x)),
        FunctorTerm::Det(_, x) => {
            out.insert(*x);
        }
        FunctorTerm::Susp { inp, out: om } => {
            out.extend(inp.values().copied());
            out.extend(om.values().copied());
        }
        FunctorTerm::Pair(a, b) => {
            collect_support(a, out);
            collect_support(b, out);
        }
    }
}

/// Applies a state map to a term. The map must be defined on the whole
/// support; probabilistic weights of merged pairs are summed.
pub fn fmap(term: &FunctorTerm, f: &BTreeMap<u32, u32>) -> Result<FunctorTerm> {
    let ap = |x: u32| -> Result<u32> {
        f.get(&x).copied().ok_or(Error::NotTotal {
            element: format!("state#{x}"),
        })
    };
    Ok(match term {
        FunctorTerm::Plts(set) => {
            let mut out = BTreeSet::new();
            for (l, x) in set {
                out.insert((*l, ap(*x)?));
            }
            FunctorTerm::Plts(out)
        }
        FunctorTerm::Dlts(map) => {
            let mut out: BTreeMap<(u32, u32), Ratio> = BTreeMap::new();
            for ((l, x), w) in map {
                *out.entry((*l, ap(*x)?)).or_insert_with(Ratio::zero) += *w;
            }
            FunctorTerm::Dlts(out)
        }
        FunctorTerm::Det(l, x) => FunctorTerm::Det(*l, ap(*x)?),
        FunctorTerm::Susp { inp, out } => {
            let mut ni = BTreeMap::new();
            for (l, x) in inp {
                ni.insert(*l, ap(*x)?);
            }
            let mut no = BTreeMap::new();
            for (l, x) in out {
                no.insert(*l, ap(*x)?);
            }
            FunctorTerm::Susp { inp: ni, out: no }
        }
        FunctorTerm::Pair(a, b) => FunctorTerm::Pair(Box::new(fmap(a, f)?), Box::new(fmap(b, f)?)),
    })
}

/// Applies a total map given as an image vector (index -> index).
pub fn fmap_vec(term: &FunctorTerm, img: &[u32]) -> Result<FunctorTerm> {
    let f: BTreeMap<u32, u32> = img
        .iter()
        .enumerate()
        .map(|(i, j)| (i as u32, *j))
        .collect();
    fmap(term, &f)
}

/// Enumeration limits for [`enumerate_terms`].
#[derive(Clone, Copy, Debug)]
pub struct EnumCfg {
    /// Hard cap on the number of terms materialized.
    pub cap: u128,
    /// Weights enumerated for probabilistic terms are multiples of
    /// `1/dlts_denominator`.
    pub dlts_denominator: u32,
}

impl Default for EnumCfg {
    fn default() -> Self {
        EnumCfg {
            cap: 1 << 20,
            dlts_denominator: 4,
        }
    }
}

/// All terms of a kind over a carrier of `carrier_size` elements, in a
/// fixed deterministic order.
pub fn enumerate_terms(
    kind: &FunctorKind,
    carrier_size: usize,
    cfg: &EnumCfg,
) -> Result<Vec<FunctorTerm>> {
    let count = kind
        .term_count(carrier_size, cfg.dlts_denominator)
        .ok_or_else(|| Error::CapExceeded {
            what: format!("enumerating {kind} terms"),
            needs: u128::MAX,
            cap: cfg.cap,
        })?;
    if count > cfg.cap {
        return Err(Error::CapExceeded {
            what: format!("enumerating {kind} terms"),
            needs: count,
            cap: cfg.cap,
        });
    }
    let n = carrier_size;
    Ok(match kind {
        FunctorKind::Plts { labels } => {
            let bits = labels.size() * n;
            let mut out = Vec::with_capacity(count as usize);
            for mask in 0..(1u128 << bits) {
                let mut set = BTreeSet::new();
                for l in 0..labels.size() {
                    for x in 0..n {
                        if (mask >> (l * n + x)) & 1 == 1 {
                            set.insert((l as u32, x as u32));
                        }
                    }
                }
                out.push(FunctorTerm::Plts(set));
            }
            out
        }
        FunctorKind::Dlts { labels } => {
            let k = labels.size() * n;
            let d = cfg.dlts_denominator;
            let mut out = Vec::with_capacity(count as usize);
            for comp in compositions(d, k) {
                let mut map = BTreeMap::new();
                for (idx, m) in comp.iter().enumerate() {
                    if *m > 0 {
                        let l = (idx / n) as u32;
                        let x = (idx % n) as u32;
                        map.insert((l, x), Ratio::new(*m as i64, d as i64));
                    }
                }
                out.push(FunctorTerm::Dlts(map));
            }
            out
        }
        FunctorKind::Det { labels } => {
            let mut out = Vec::with_capacity(count as usize);
            for l in 0..labels.size() {
                for x in 0..n {
                    out.push(FunctorTerm::Det(l as u32, x as u32));
                }
            }
            out
        }
        FunctorKind::Susp { inputs, outputs } => {
            let ins = partial_maps(inputs.size(), n, false);
            let outs = partial_maps(outputs.size(), n, true);
            let mut out = Vec::with_capacity(count as usize);
            for i in &ins {
                for o in &outs {
                    out.push(FunctorTerm::Susp {
                        inp: i.clone(),
                        out: o.clone(),
                    });
                }
            }
            out
        }
        FunctorKind::SuspIe { inputs, outputs } => {
            let ins = total_maps(inputs.size(), n);
            let outs = partial_maps(outputs.size(), n, true);
            let mut out = Vec::with_capacity(count as usize);
            for i in &ins {
                for o in &outs {
                    out.push(FunctorTerm::Susp {
                        inp: i.clone(),
                        out: o.clone(),
                    });
                }
            }
            out
        }
        FunctorKind::Pair(k1, k2) => {
            let t1 = enumerate_terms(k1, carrier_size, cfg)?;
            let t2 = enumerate_terms(k2, carrier_size, cfg)?;
            let mut out = Vec::with_capacity(count as usize);
            for a in &t1 {
                for b in &t2 {
                    out.push(FunctorTerm::Pair(Box::new(a.clone()), Box::new(b.clone())));
                }
            }
            out
        }
    })
}

/// All vectors of `parts` non-negative integers summing to `total`,
/// in lexicographic order.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0u32; parts];
    fn rec(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            rec(cur, pos + 1, left - v, out);
        }
    }
    rec(&mut cur, 0, total, &mut out);
    out
}

fn partial_maps(domain: usize, n: usize, require_nonempty: bool) -> Vec<BTreeMap<u32, u32>> {
    // mixed-radix over n+1 values per slot; value n means "undefined"
    let mut out = Vec::new();
    let radix = n + 1;
    let mut idx = vec![0usize; domain];
    loop {
        let mut m = BTreeMap::new();
        for (l, v) in idx.iter().enumerate() {
            if *v < n {
                m.insert(l as u32, *v as u32);
            }
        }
        if !(require_nonempty && m.is_empty()) {
            out.push(m);
        }
        // increment
        let mut pos = 0;
        loop {
            if pos == domain {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < radix {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn total_maps(domain: usize, n: usize) -> Vec<BTreeMap<u32, u32>> {
    if domain > 0 && n == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; domain];
    loop {
        let m: BTreeMap<u32, u32> = idx
            .iter()
            .enumerate()
            .map(|(l, v)| (l as u32, *v as u32))
            .collect();
        out.push(m);
        let mut pos = 0;
        loop {
            if pos == domain {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Renders a term with real label/state names, for reports.
pub fn term_display(kind: &FunctorKind, term: &FunctorTerm, carrier: &FinSet) -> String {
    match (kind, term) {
        (FunctorKind::Plts { labels }, FunctorTerm::Plts(set)) => {
            let items: Vec<String> = set
                .iter()
                .map(|(l, x)| format!("{}->{}", labels.name(*l), carrier.name(*x)))
                .collect();
            format!("{{{}}}", items.join(" "))
        }
        (FunctorKind::Dlts { labels }, FunctorTerm::Dlts(map)) => {
            let items: Vec<String> = map
                .iter()
                .map(|((l, x), w)| format!("{}->{}:{}", labels.name(*l), carrier.name(*x), w))
                .collect();
            format!("{{{}}}", items.join(" "))
        }
        (FunctorKind::Det { labels }, FunctorTerm::Det(l, x)) => {
            format!("{}->{}", labels.name(*l), carrier.name(*x))
        }
        (
            FunctorKind::Susp { inputs, outputs } | FunctorKind::SuspIe { inputs, outputs },
            FunctorTerm::Susp { inp, out },
        ) => {
            let pin: Vec<String> = inp
                .iter()
                .map(|(l, x)| format!("{}->{}", inputs.name(*l), carrier.name(*x)))
                .collect();
            let pout: Vec<String> = out
                .iter()
                .map(|(l, x)| format!("{}->{}", outputs.name(*l), carrier.name(*x)))
                .collect();
            format!("{{in:{} out:{}}}", pin.join(" "), pout.join(" "))
        }
        (FunctorKind::Pair(k1, k2), FunctorTerm::Pair(a, b)) => {
            format!(
                "({},{})",
                term_display(k1, a, carrier),
                term_display(k2, b, carrier)
            )
        }
        _ => format!("{term:?}"),
    }
}

/// A coalgebra: one validated term per state.
#[derive(Clone, PartialEq, Eq)]
pub struct Coalgebra {
    kind: FunctorKind,
    states: FinSet,
    trans: Vec<FunctorTerm>,
}

impl Coalgebra {
    pub fn new(kind: FunctorKind, states: FinSet, trans: Vec<FunctorTerm>) -> Result<Coalgebra> {
        if trans.len() != states.size() {
            return Err(Error::CarrierMismatch {
                context: "coalgebra structure map".into(),
                expected: format!("{} terms", states.size()),
                got: format!("{} terms", trans.len()),
            });
        }
        for (i, t) in trans.iter().enumerate() {
            term_validate(&kind, t, states.size()).map_err(|e| match e {
                Error::Validation(msg) => {
                    Error::Validation(format!("{msg} at {}", states.name(i as u32)))
                }
                other => other,
            })?;
        }
        Ok(Coalgebra {
            kind,
            states,
            trans,
        })
    }

    pub fn kind(&self) -> &FunctorKind {
        &self.kind
    }

    pub fn states(&self) -> &FinSet {
        &self.states
    }

    pub fn gamma(&self, x: u32) -> &FunctorTerm {
        &self.trans[x as usize]
    }

    pub fn terms(&self) -> &[FunctorTerm] {
        &self.trans
    }
}

impl fmt::Debug for Coalgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "coalgebra {} over {}", self.kind, self.states)?;
        for i in self.states.indices() {
            writeln!(
                f,
                "  {}: {}",
                self.states.name(i),
                term_display(&self.kind, self.gamma(i), &self.states)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc(n: usize) -> FinSet {
        FinSet::numbered("l", n)
    }

    // Frozen counts, computed by hand from the definitions:
    //   PLTS, 1 label, 2 states: 2^(1*2) = 4
    //   DLTS, 1 label, 2 states, denominator 2: compositions of 2 into 2 = 3
    //   DET,  2 labels, 2 states: 4
    //   SUSP, |I|=1,|O|=1, 2 states: 3 * (3-1) = 6
    //   SUSPIE, same: 2 * 2 = 4
    #[test]
    fn enumerate_counts_frozen() {
        let cfg2 = EnumCfg {
            cap: 1 << 20,
            dlts_denominator: 2,
        };
        let plts = FunctorKind::plts(abc(1));
        assert_eq!(enumerate_terms(&plts, 2, &cfg2).unwrap().len(), 4);
        let dlts = FunctorKind::dlts(abc(1));
        assert_eq!(enumerate_terms(&dlts, 2, &cfg2).unwrap().len(), 3);
        let det = FunctorKind::det(abc(2)).unwrap();
        assert_eq!(enumerate_terms(&det, 2, &cfg2).unwrap().len(), 4);
        let susp = FunctorKind::susp(
            FinSet::new(["i"]).unwrap(),
            FinSet::new(["o"]).unwrap(),
        )
        .unwrap();
        assert_eq!(enumerate_terms(&susp, 2, &cfg2).unwrap().len(), 6);
        let suspie = FunctorKind::susp_ie(
            FinSet::new(["i"]).unwrap(),
            FinSet::new(["o"]).unwrap(),
        )
        .unwrap();
        assert_eq!(enumerate_terms(&suspie, 2, &cfg2).unwrap().len(), 4);
    }

    #[test]
    fn enumerate_matches_term_count_and_validates() {
        let cfg = EnumCfg {
            cap: 1 << 20,
            dlts_denominator: 3,
        };
        let kinds = vec![
            FunctorKind::plts(abc(2)),
            FunctorKind::dlts(abc(1)),
            FunctorKind::det(abc(1)).unwrap(),
            FunctorKind::susp(FinSet::new(["i"]).unwrap(), FinSet::new(["o", "q"]).unwrap())
                .unwrap(),
            FunctorKind::pair(
                FunctorKind::plts(abc(1)),
                FunctorKind::det(abc(1)).unwrap(),
            ),
        ];
        for kind in kinds {
            for n in 0..3usize {
                let terms = enumerate_terms(&kind, n, &cfg).unwrap();
                assert_eq!(
                    terms.len() as u128,
                    kind.term_count(n, cfg.dlts_denominator).unwrap(),
                    "count mismatch for {kind} over {n}"
                );
                for t in &terms {
                    term_validate(&kind, t, n).unwrap();
                }
                // determinism: a second enumeration is identical
                assert_eq!(terms, enumerate_terms(&kind, n, &cfg).unwrap());
            }
        }
    }

    #[test]
    fn fmap_laws() {
        let cfg = EnumCfg::default();
        let kind = FunctorKind::pair(
            FunctorKind::plts(abc(1)),
            FunctorKind::dlts(abc(1)),
        );
        let terms = enumerate_terms(&kind, 2, &cfg).unwrap();
        let id: BTreeMap<u32, u32> = [(0, 0), (1, 1)].into();
        let f: BTreeMap<u32, u32> = [(0, 1), (1, 1)].into(); // into 2-element carrier
        let g: BTreeMap<u32, u32> = [(0, 0), (1, 2)].into(); // into 3-element carrier
        for t in &terms {
            assert_eq!(&fmap(t, &id).unwrap(), t, "identity law");
            let lhs = fmap(&fmap(t, &f).unwrap(), &g).unwrap();
            let comp: BTreeMap<u32, u32> = f.iter().map(|(k, v)| (*k, g[v])).collect();
            assert_eq!(lhs, fmap(t, &comp).unwrap(), "composition law");
        }
    }

    #[test]
    fn fmap_merges_probabilistic_mass() {
        let mut m = BTreeMap::new();
        m.insert((0u32, 0u32), Ratio::new(1, 2));
        m.insert((0u32, 1u32), Ratio::new(1, 2));
        let t = FunctorTerm::Dlts(m);
        let f: BTreeMap<u32, u32> = [(0, 0), (1, 0)].into();
        let ft = fmap(&t, &f).unwrap();
        match ft {
            FunctorTerm::Dlts(m) => {
                assert_eq!(m.len(), 1);
                assert_eq!(m[&(0, 0)], Ratio::one());
            }
            _ => panic!("kind changed under fmap"),
        }
    }

    #[test]
    fn fmap_requires_support_coverage() {
        let t = FunctorTerm::Det(0, 1);
        let f: BTreeMap<u32, u32> = [(0, 0)].into();
        assert!(matches!(fmap(&t, &f), Err(Error::NotTotal { .. })));
    }

    #[test]
    fn validation_messages() {
        let kind = FunctorKind::dlts(abc(1));
        let mut m = BTreeMap::new();
        m.insert((0u32, 0u32), Ratio::new(5, 6));
        let states = FinSet::new(["s0"]).unwrap();
        let err = Coalgebra::new(kind, states, vec![FunctorTerm::Dlts(m)]).unwrap_err();
        assert_eq!(
            err.to_string(),
            "invalid term: mass 5/6 != 1 at s0"
        );

        let susp = FunctorKind::susp_ie(
            FinSet::new(["i"]).unwrap(),
            FinSet::new(["o"]).unwrap(),
        )
        .unwrap();
        let t = FunctorTerm::Susp {
            inp: BTreeMap::new(),
            out: [(0u32, 0u32)].into(),
        };
        let err = term_validate(&susp, &t, 1).unwrap_err();
        assert!(err.to_string().contains("input i undefined"));
    }

    #[test]
    fn support_is_exact() {
        let t = FunctorTerm::Pair(
            Box::new(FunctorTerm::Plts([(0, 2)].into())),
            Box::new(FunctorTerm::Det(0, 1)),
        );
        let s: Vec<u32> = support(&t).into_iter().collect();
        assert_eq!(s, vec![1, 2]);
    }
}
