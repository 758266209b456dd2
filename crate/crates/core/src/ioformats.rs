//! Text formats: the native coalgebra format, the Aldebaran `.aut`
//! interchange format, the connector expression DSL, and relation
//! output. All parsers are newline-tolerant (LF and CRLF), report line
//! numbers on errors, and round-trip with their serializers.

use std::collections::{BTreeMap, BTreeSet};

use crate::connectors::{weak_label_rel, ConnectorExpr, NatTrans};
use crate::err::{Error, Result};
use crate::functors::{Coalgebra, FunctorKind, FunctorTerm, Ratio};
use crate::liftings::{InnerSkel, Lifting, PosSkel};
use crate::rel::{FinSet, Rel};

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

fn parse_ratio_str(s: &str, line: usize) -> Result<Ratio> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let n: i64 = match num.trim().parse() {
        Ok(n) => n,
        Err(_) => return perr(line, format!("invalid rational `{s}`")),
    };
    match den {
        None => Ok(Ratio::from_integer(n)),
        Some(d) => {
            let d: i64 = match d.trim().parse() {
                Ok(d) => d,
                Err(_) => return perr(line, format!("invalid rational `{s}`")),
            };
            if d == 0 {
                return perr(line, format!("zero denominator in `{s}`"));
            }
            Ok(Ratio::new(n, d))
        }
    }
}

/// Strips comments and splits into (1-based line number, content) pairs,
/// dropping blank lines. Tolerates CRLF endings.
fn content_lines(text: &str) -> Vec<(usize, String)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let no_comment = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let trimmed = no_comment.trim_end_matches('\r').trim();
            if trimmed.is_empty() {
                None
            } else {
                Some((i + 1, trimmed.to_string()))
            }
        })
        .collect()
}

// ---------------------------------------------------------------------
// Native coalgebra format
// ---------------------------------------------------------------------

fn check_name(name: &str, what: &str, line: usize) -> Result<()> {
    if name.is_empty() {
        return perr(line, format!("empty {what} name"));
    }
    if name.contains([':', ',', '=', '#']) || name.contains("->") {
        return perr(line, format!("{what} name `{name}` contains reserved characters"));
    }
    Ok(())
}

fn alphabet_from(csv: &str, what: &str, line: usize) -> Result<FinSet> {
    let mut names = Vec::new();
    if !csv.is_empty() {
        for n in csv.split(',') {
            let n = n.trim();
            check_name(n, what, line)?;
            names.push(n.to_string());
        }
    }
    FinSet::new(names).map_err(|e| Error::Parse {
        line,
        msg: e.to_string(),
    })
}

/// Parses the native format: a `functor` header, a `states` line, and
/// one transition line per state. `#` starts a comment; blank lines are
/// ignored.
pub fn parse_chc(text: &str) -> Result<Coalgebra> {
    let lines = content_lines(text);
    if lines.is_empty() {
        return perr(1, "empty document: expected a `functor` header");
    }

    // Header.
    let (hline, header) = &lines[0];
    let mut toks = header.split_whitespace();
    if toks.next() != Some("functor") {
        return perr(*hline, "expected `functor <KIND> ...`");
    }
    let kind_name = match toks.next() {
        Some(k) => k,
        None => return perr(*hline, "missing functor kind"),
    };
    let mut keys: BTreeMap<&str, &str> = BTreeMap::new();
    for t in toks {
        match t.split_once('=') {
            Some((k, v)) => {
                if keys.insert(k, v).is_some() {
                    return perr(*hline, format!("duplicate header key `{k}`"));
                }
            }
            None => return perr(*hline, format!("expected `key=values`, found `{t}`")),
        }
    }
    let take = |keys: &BTreeMap<&str, &str>, k: &str| -> Result<FinSet> {
        match keys.get(k) {
            Some(v) => alphabet_from(v, "label", *hline),
            None => perr(*hline, format!("missing header key `{k}`")),
        }
    };
    let kind = match kind_name {
        "PLTS" => FunctorKind::plts(take(&keys, "labels")?),
        "DLTS" => FunctorKind::dlts(take(&keys, "labels")?),
        "DET" => FunctorKind::det(take(&keys, "labels")?).map_err(|e| Error::Parse {
            line: *hline,
            msg: e.to_string(),
        })?,
        "SUSP" => FunctorKind::susp(take(&keys, "in")?, take(&keys, "out")?).map_err(|e| {
            Error::Parse {
                line: *hline,
                msg: e.to_string(),
            }
        })?,
        "SUSPIE" => {
            FunctorKind::susp_ie(take(&keys, "in")?, take(&keys, "out")?).map_err(|e| {
                Error::Parse {
                    line: *hline,
                    msg: e.to_string(),
                }
            })?
        }
        other => return perr(*hline, format!("unknown functor kind `{other}`")),
    };
    let expected_keys: &[&str] = match kind_name {
        "SUSP" | "SUSPIE" => &["in", "out"],
        _ => &["labels"],
    };
    for k in keys.keys() {
        if !expected_keys.contains(k) {
            return perr(*hline, format!("unexpected header key `{k}`"));
        }
    }

    // State declarations.
    if lines.len() < 2 {
        return perr(*hline + 1, "expected a `states` line");
    }
    let (sline, sdecl) = &lines[1];
    let mut toks = sdecl.split_whitespace();
    if toks.next() != Some("states") {
        return perr(*sline, "expected `states s0 s1 ...`");
    }
    let mut names = Vec::new();
    for n in toks {
        check_name(n, "state", *sline)?;
        names.push(n.to_string());
    }
    let states = FinSet::new(names).map_err(|e| Error::Parse {
        line: *sline,
        msg: e.to_string(),
    })?;

    // Transition lines, one per state.
    let mut terms: Vec<Option<FunctorTerm>> = vec![None; states.size()];
    for (lno, content) in &lines[2..] {
        let (name, rest) = match content.split_once(':') {
            Some(p) => p,
            None => return perr(*lno, "expected `state: transitions...`"),
        };
        let name = name.trim();
        let x = match states.index_of(name) {
            Some(x) => x,
            None => return perr(*lno, format!("undeclared state `{name}`")),
        };
        if terms[x as usize].is_some() {
            return perr(*lno, format!("duplicate transition line for `{name}`"));
        }
        let mut arrows: Vec<(String, String, Option<Ratio>)> = Vec::new();
        for tok in rest.split_whitespace() {
            let (label, target) = match tok.split_once("->") {
                Some(p) => p,
                None => return perr(*lno, format!("expected `label->state`, found `{tok}`")),
            };
            let (target, weight) = match kind {
                FunctorKind::Dlts { .. } => match target.split_once(':') {
                    Some((t, w)) => (t, Some(parse_ratio_str(w, *lno)?)),
                    None => return perr(*lno, format!("missing `:weight` in `{tok}`")),
                },
                _ => {
                    if target.contains(':') {
                        return perr(*lno, format!("unexpected `:weight` in `{tok}`"));
                    }
                    (target, None)
                }
            };
            arrows.push((label.to_string(), target.to_string(), weight));
        }
        let term = build_term(&kind, &states, &arrows, *lno)?;
        terms[x as usize] = Some(term);
    }
    let mut trans = Vec::with_capacity(states.size());
    for i in 0..states.size() {
        match terms[i].take() {
            Some(t) => trans.push(t),
            None => {
                return perr(
                    lines.last().map(|(l, _)| *l).unwrap_or(2) + 1,
                    format!("missing transition line for `{}`", states.name(i as u32)),
                )
            }
        }
    }
    Coalgebra::new(kind, states, trans).map_err(|e| match e {
        Error::Validation(msg) => Error::Validation(msg),
        other => other,
    })
}

fn build_term(
    kind: &FunctorKind,
    states: &FinSet,
    arrows: &[(String, String, Option<Ratio>)],
    lno: usize,
) -> Result<FunctorTerm> {
    let state_of = |name: &str| -> Result<u32> {
        states
            .index_of(name)
            .ok_or_else(|| Error::Parse {
                line: lno,
                msg: format!("undeclared target state `{name}`"),
            })
    };
    match kind {
        FunctorKind::Plts { labels } | FunctorKind::Dlts { labels } => {
            let label_of = |name: &str| -> Result<u32> {
                labels.index_of(name).ok_or_else(|| Error::Parse {
                    line: lno,
                    msg: format!("undeclared label `{name}`"),
                })
            };
            if matches!(kind, FunctorKind::Plts { .. }) {
                let mut set = BTreeSet::new();
                for (l, t, _) in arrows {
                    set.insert((label_of(l)?, state_of(t)?));
                }
                Ok(FunctorTerm::Plts(set))
            } else {
                let mut map = BTreeMap::new();
                for (l, t, w) in arrows {
                    let key = (label_of(l)?, state_of(t)?);
                    let w = w.expect("weight enforced by caller");
                    if map.insert(key, w).is_some() {
                        return perr(lno, format!("duplicate transition `{l}->{t}`"));
                    }
                }
                Ok(FunctorTerm::Dlts(map))
            }
        }
        FunctorKind::Det { labels } => {
            if arrows.len() != 1 {
                return perr(
                    lno,
                    format!(
                        "deterministic state needs exactly one transition, found {}",
                        arrows.len()
                    ),
                );
            }
            let (l, t, _) = &arrows[0];
            let li = labels.index_of(l).ok_or_else(|| Error::Parse {
                line: lno,
                msg: format!("undeclared label `{l}`"),
            })?;
            Ok(FunctorTerm::Det(li, state_of(t)?))
        }
        FunctorKind::Susp { inputs, outputs } | FunctorKind::SuspIe { inputs, outputs } => {
            let mut inp = BTreeMap::new();
            let mut out = BTreeMap::new();
            for (l, t, _) in arrows {
                let x = state_of(t)?;
                if let Some(li) = inputs.index_of(l) {
                    if inp.insert(li, x).is_some() {
                        return perr(lno, format!("duplicate transition on input `{l}`"));
                    }
                } else if let Some(li) = outputs.index_of(l) {
                    if out.insert(li, x).is_some() {
                        return perr(lno, format!("duplicate transition on output `{l}`"));
                    }
                } else {
                    return perr(lno, format!("undeclared label `{l}`"));
                }
            }
            Ok(FunctorTerm::Susp { inp, out })
        }
        FunctorKind::Pair(..) => perr(lno, "product kinds have no text format"),
    }
}

/// Serializes a coalgebra in the native format. Product kinds have no
/// text representation.
pub fn serialize_chc(c: &Coalgebra) -> Result<String> {
    let mut out = String::new();
    let header = match c.kind() {
        FunctorKind::Plts { labels } => format!("functor PLTS labels={}", csv(labels)),
        FunctorKind::Dlts { labels } => format!("functor DLTS labels={}", csv(labels)),
        FunctorKind::Det { labels } => format!("functor DET labels={}", csv(labels)),
        FunctorKind::Susp { inputs, outputs } => {
            format!("functor SUSP in={} out={}", csv(inputs), csv(outputs))
        }
        FunctorKind::SuspIe { inputs, outputs } => {
            format!("functor SUSPIE in={} out={}", csv(inputs), csv(outputs))
        }
        FunctorKind::Pair(..) => {
            return Err(Error::Validation(
                "product kinds have no text format".into(),
            ))
        }
    };
    out.push_str(&header);
    out.push('\n');
    out.push_str("states");
    for n in c.states().names() {
        out.push(' ');
        out.push_str(n);
    }
    out.push('\n');
    for x in c.states().indices() {
        out.push_str(c.states().name(x));
        out.push(':');
        match c.gamma(x) {
            FunctorTerm::Plts(set) => {
                let labels = c.kind().labels().expect("labelled kind");
                for (l, t) in set {
                    out.push_str(&format!(
                        " {}->{}",
                        labels.name(*l),
                        c.states().name(*t)
                    ));
                }
            }
            FunctorTerm::Dlts(map) => {
                let labels = c.kind().labels().expect("labelled kind");
                for ((l, t), w) in map {
                    out.push_str(&format!(
                        " {}->{}:{}",
                        labels.name(*l),
                        c.states().name(*t),
                        w
                    ));
                }
            }
            FunctorTerm::Det(l, t) => {
                let labels = c.kind().labels().expect("labelled kind");
                out.push_str(&format!(" {}->{}", labels.name(*l), c.states().name(*t)));
            }
            FunctorTerm::Susp { inp, out: om } => {
                let (inputs, outputs) = c.kind().io_alphabets().expect("suspension kind");
                for (l, t) in inp {
                    out.push_str(&format!(
                        " {}->{}",
                        inputs.name(*l),
                        c.states().name(*t)
                    ));
                }
                for (l, t) in om {
                    out.push_str(&format!(
                        " {}->{}",
                        outputs.name(*l),
                        c.states().name(*t)
                    ));
                }
            }
            FunctorTerm::Pair(..) => {
                return Err(Error::Validation(
                    "product kinds have no text format".into(),
                ))
            }
        }
        out.push('\n');
    }
    Ok(out)
}

fn csv(s: &FinSet) -> String {
    s.names().join(",")
}

// ---------------------------------------------------------------------
// Aldebaran .aut interchange format
// ---------------------------------------------------------------------

/// A parsed `.aut` document: the system, the declared initial state
/// (already renamed), and any non-fatal warnings.
#[derive(Clone, Debug)]
pub struct AutDocument {
    pub coalgebra: Coalgebra,
    pub init: u32,
    pub warnings: Vec<String>,
}

/// Parses the Aldebaran format: header `des (init, ntrans, nstates)`,
/// then one `(src,"label",dst)` line per transition. States are renamed
/// `s<i>`. Labels may be quoted or bare; bare labels end at the first
/// comma. A transition count mismatch is a warning, not an error.
pub fn parse_aut(text: &str, labels: Option<&FinSet>) -> Result<AutDocument> {
    let lines = content_lines(text);
    if lines.is_empty() {
        return perr(1, "empty document: expected a `des` header");
    }
    let (hline, header) = &lines[0];
    let body = header
        .strip_prefix("des")
        .ok_or_else(|| Error::Parse {
            line: *hline,
            msg: "expected `des (init, ntrans, nstates)`".into(),
        })?
        .trim();
    let body = body
        .strip_prefix('(')
        .and_then(|b| b.strip_suffix(')'))
        .ok_or_else(|| Error::Parse {
            line: *hline,
            msg: "expected parenthesized `des` header".into(),
        })?;
    let nums: Vec<&str> = body.split(',').collect();
    if nums.len() != 3 {
        return perr(*hline, "expected three comma-separated header fields");
    }
    let parse_num = |s: &str| -> Result<usize> {
        s.trim().parse().map_err(|_| Error::Parse {
            line: *hline,
            msg: format!("invalid number `{}`", s.trim()),
        })
    };
    let init = parse_num(nums[0])?;
    let ntrans = parse_num(nums[1])?;
    let nstates = parse_num(nums[2])?;
    if nstates == 0 {
        return perr(*hline, "state count must be positive");
    }
    if init >= nstates {
        return perr(*hline, format!("initial state {init} out of range"));
    }

    let mut triples: Vec<(usize, String, usize)> = Vec::new();
    for (lno, content) in &lines[1..] {
        let inner = content
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| Error::Parse {
                line: *lno,
                msg: "expected `(src,\"label\",dst)`".into(),
            })?;
        let (src_s, rest) = inner.split_once(',').ok_or_else(|| Error::Parse {
            line: *lno,
            msg: "missing label field".into(),
        })?;
        let rest = rest.trim_start();
        let (label, dst_s) = if let Some(q) = rest.strip_prefix('"') {
            let end = q.find('"').ok_or_else(|| Error::Parse {
                line: *lno,
                msg: "unterminated quoted label".into(),
            })?;
            let label = &q[..end];
            let after = q[end + 1..].trim_start();
            let dst_s = after.strip_prefix(',').ok_or_else(|| Error::Parse {
                line: *lno,
                msg: "missing destination field".into(),
            })?;
            (label.to_string(), dst_s)
        } else {
            let (label, dst_s) = rest.split_once(',').ok_or_else(|| Error::Parse {
                line: *lno,
                msg: "missing destination field".into(),
            })?;
            (label.trim().to_string(), dst_s)
        };
        let src: usize = src_s.trim().parse().map_err(|_| Error::Parse {
            line: *lno,
            msg: format!("invalid source state `{}`", src_s.trim()),
        })?;
        let dst: usize = dst_s.trim().parse().map_err(|_| Error::Parse {
            line: *lno,
            msg: format!("invalid destination state `{}`", dst_s.trim()),
        })?;
        if src >= nstates || dst >= nstates {
            return perr(*lno, format!("state out of range in `({src},...,{dst})`"));
        }
        triples.push((src, label, dst));
    }

    let mut warnings = Vec::new();
    if triples.len() != ntrans {
        warnings.push(format!(
            "declared {ntrans} transitions, found {}",
            triples.len()
        ));
    }

    let alphabet = match labels {
        Some(l) => {
            for (lno_idx, (_, label, _)) in triples.iter().enumerate() {
                if l.index_of(label).is_none() {
                    let lno = lines[1 + lno_idx].0;
                    return perr(lno, format!("label `{label}` not in the declared alphabet"));
                }
            }
            l.clone()
        }
        None => {
            let used: BTreeSet<&str> = triples.iter().map(|(_, l, _)| l.as_str()).collect();
            FinSet::new(used.into_iter().map(|s| s.to_string()))
                .expect("distinct by construction")
        }
    };
    let states = FinSet::numbered("s", nstates);
    let mut sets: Vec<BTreeSet<(u32, u32)>> = vec![BTreeSet::new(); nstates];
    for (src, label, dst) in &triples {
        let li = alphabet.index_of(label).expect("checked above");
        sets[*src].insert((li, *dst as u32));
    }
    let trans = sets.into_iter().map(FunctorTerm::Plts).collect();
    let coalgebra = Coalgebra::new(FunctorKind::plts(alphabet), states, trans)?;
    Ok(AutDocument {
        coalgebra,
        init: init as u32,
        warnings,
    })
}

// ---------------------------------------------------------------------
// Connector DSL
// ---------------------------------------------------------------------

/// Unelaborated connector syntax: label alphabets and endpoint kinds
/// are resolved later, once both systems are known.
#[derive(Clone, Debug, PartialEq)]
pub enum ConnectorSyntax {
    Id,
    Kant(Vec<(Lifting, Lifting)>),
    Comp(Box<ConnectorSyntax>, Box<ConnectorSyntax>),
    Conv(Box<ConnectorSyntax>),
    Meet(Box<ConnectorSyntax>, Box<ConnectorSyntax>),
    Prod(Box<ConnectorSyntax>, Box<ConnectorSyntax>),
    Kr(Vec<(String, String)>),
    Lr(Vec<(String, String)>),
    Lf,
    Lt,
    Ioco,
    Weak(String),
    PullLeft(Box<ConnectorSyntax>, NatSyntax),
    PullRight(NatSyntax, Box<ConnectorSyntax>),
}

/// Unelaborated natural-transformation syntax.
#[derive(Clone, Debug, PartialEq)]
pub enum NatSyntax {
    Incl,
    Relabel(Vec<(String, String)>),
    RelabelConv(Vec<(String, String)>),
    Proj1,
    Proj2,
}

#[derive(Debug)]
enum SExpr {
    Atom(String, usize),
    List(Vec<SExpr>, usize),
}

impl SExpr {
    fn line(&self) -> usize {
        match self {
            SExpr::Atom(_, l) | SExpr::List(_, l) => *l,
        }
    }
}

fn lex_sexpr(text: &str) -> Result<SExpr> {
    let mut stack: Vec<(Vec<SExpr>, usize)> = Vec::new();
    let mut top: Option<SExpr> = None;
    let mut line = 1usize;
    let mut atom = String::new();
    let mut atom_line = 1usize;
    let push = |stack: &mut Vec<(Vec<SExpr>, usize)>,
                    top: &mut Option<SExpr>,
                    e: SExpr|
     -> Result<()> {
        match stack.last_mut() {
            Some((items, _)) => {
                items.push(e);
                Ok(())
            }
            None => {
                if top.is_some() {
                    return perr(e.line(), "multiple top-level expressions");
                }
                *top = Some(e);
                Ok(())
            }
        }
    };
    for c in text.chars() {
        if c == '\n' {
            line += 1;
        }
        if c == '(' || c == ')' || c.is_whitespace() {
            if !atom.is_empty() {
                let a = SExpr::Atom(std::mem::take(&mut atom), atom_line);
                push(&mut stack, &mut top, a)?;
            }
            if c == '(' {
                stack.push((Vec::new(), line));
            } else if c == ')' {
                match stack.pop() {
                    Some((items, l)) => push(&mut stack, &mut top, SExpr::List(items, l))?,
                    None => return perr(line, "unbalanced `)`"),
                }
            }
        } else {
            if atom.is_empty() {
                atom_line = line;
            }
            atom.push(c);
        }
    }
    if !atom.is_empty() {
        let a = SExpr::Atom(atom, atom_line);
        push(&mut stack, &mut top, a)?;
    }
    if let Some((_, l)) = stack.last() {
        return perr(*l, "unbalanced `(`");
    }
    top.ok_or_else(|| Error::Parse {
        line,
        msg: "empty document: expected a connector expression".into(),
    })
}

fn want_atom<'e>(e: &'e SExpr, what: &str) -> Result<&'e str> {
    match e {
        SExpr::Atom(a, _) => Ok(a),
        SExpr::List(_, l) => perr(*l, format!("expected {what}, found a list")),
    }
}

fn parse_rel_pairs(e: &SExpr) -> Result<Vec<(String, String)>> {
    let items = match e {
        SExpr::List(items, l) => {
            if items.first().and_then(|h| match h {
                SExpr::Atom(a, _) => Some(a.as_str()),
                _ => None,
            }) != Some("rel")
            {
                return perr(*l, "expected `(rel (a b) ...)`");
            }
            &items[1..]
        }
        SExpr::Atom(_, l) => return perr(*l, "expected `(rel (a b) ...)`"),
    };
    let mut pairs = Vec::new();
    for p in items {
        match p {
            SExpr::List(ab, l) if ab.len() == 2 => {
                let a = want_atom(&ab[0], "a label")?;
                let b = want_atom(&ab[1], "a label")?;
                let pair = (a.to_string(), b.to_string());
                if !pairs.contains(&pair) {
                    pairs.push(pair); // duplicates are ignored
                }
            }
            other => return perr(other.line(), "expected a `(a b)` pair"),
        }
    }
    Ok(pairs)
}

fn parse_lifting_sexpr(e: &SExpr) -> Result<Lifting> {
    match e {
        SExpr::Atom(a, l) => match a.as_str() {
            "bigbox" => Ok(Lifting::BigBox),
            "bigdia" => Ok(Lifting::BigDia),
            other => perr(*l, format!("unknown lifting `{other}`")),
        },
        SExpr::List(items, l) => {
            if items.is_empty() {
                return perr(*l, "empty lifting expression");
            }
            let head = want_atom(&items[0], "a lifting name")?;
            let unary_label = |items: &[SExpr]| -> Result<String> {
                if items.len() != 2 {
                    return perr(*l, format!("`{head}` takes one label"));
                }
                Ok(want_atom(&items[1], "a label")?.to_string())
            };
            match head {
                "bigbox" if items.len() == 1 => Ok(Lifting::BigBox),
                "bigdia" if items.len() == 1 => Ok(Lifting::BigDia),
                "dia" => Ok(Lifting::Dia(unary_label(items)?)),
                "box" => Ok(Lifting::Box(unary_label(items)?)),
                "down" => Ok(Lifting::Down(unary_label(items)?)),
                "def" => Ok(Lifting::Def(unary_label(items)?)),
                "pge" | "plt" => {
                    if items.len() != 3 {
                        return perr(*l, format!("`{head}` takes a label and a rational"));
                    }
                    let label = want_atom(&items[1], "a label")?.to_string();
                    let eps = parse_ratio_str(want_atom(&items[2], "a rational")?, items[2].line())?;
                    Ok(if head == "pge" {
                        Lifting::PGe(label, eps)
                    } else {
                        Lifting::PLt(label, eps)
                    })
                }
                "pos" => {
                    if items.len() != 2 {
                        return perr(*l, "`pos` takes one skeleton");
                    }
                    Ok(Lifting::Pos(parse_outer_sexpr(&items[1])?))
                }
                other => perr(*l, format!("unknown lifting `{other}`")),
            }
        }
    }
}

fn parse_outer_sexpr(e: &SExpr) -> Result<PosSkel> {
    match e {
        SExpr::Atom(a, l) => match a.as_str() {
            "top" => Ok(PosSkel::Top),
            "bot" => Ok(PosSkel::Bot),
            other => perr(*l, format!("unknown skeleton atom `{other}`")),
        },
        SExpr::List(items, l) => {
            if items.is_empty() {
                return perr(*l, "empty skeleton expression");
            }
            match want_atom(&items[0], "a skeleton head")? {
                "and" | "or" => {
                    if items.len() != 3 {
                        return perr(*l, "binary skeleton node takes two arguments");
                    }
                    let a = parse_outer_sexpr(&items[1])?;
                    let b = parse_outer_sexpr(&items[2])?;
                    Ok(match want_atom(&items[0], "")? {
                        "and" => PosSkel::And(Box::new(a), Box::new(b)),
                        _ => PosSkel::Or(Box::new(a), Box::new(b)),
                    })
                }
                "ap" => {
                    if items.len() < 2 {
                        return perr(*l, "`ap` takes a lifting and placeholder arguments");
                    }
                    let lift = parse_lifting_sexpr(&items[1])?;
                    let inner = items[2..]
                        .iter()
                        .map(parse_inner_sexpr)
                        .collect::<Result<Vec<_>>>()?;
                    Ok(PosSkel::Ap(Box::new(lift), inner))
                }
                other => perr(*l, format!("unknown skeleton head `{other}`")),
            }
        }
    }
}

fn parse_inner_sexpr(e: &SExpr) -> Result<InnerSkel> {
    match e {
        SExpr::Atom(a, l) => match a.as_str() {
            "top" => Ok(InnerSkel::Top),
            "bot" => Ok(InnerSkel::Bot),
            other => perr(*l, format!("unknown skeleton atom `{other}`")),
        },
        SExpr::List(items, l) => {
            if items.is_empty() {
                return perr(*l, "empty skeleton expression");
            }
            match want_atom(&items[0], "a skeleton head")? {
                "and" | "or" => {
                    if items.len() != 3 {
                        return perr(*l, "binary skeleton node takes two arguments");
                    }
                    let a = parse_inner_sexpr(&items[1])?;
                    let b = parse_inner_sexpr(&items[2])?;
                    Ok(match want_atom(&items[0], "")? {
                        "and" => InnerSkel::And(Box::new(a), Box::new(b)),
                        _ => InnerSkel::Or(Box::new(a), Box::new(b)),
                    })
                }
                "ph" => {
                    if items.len() != 2 {
                        return perr(*l, "`ph` takes one index");
                    }
                    let idx = want_atom(&items[1], "an index")?;
                    match idx.parse::<usize>() {
                        Ok(i) => Ok(InnerSkel::Ph(i)),
                        Err(_) => perr(items[1].line(), format!("invalid index `{idx}`")),
                    }
                }
                other => perr(*l, format!("unknown skeleton head `{other}`")),
            }
        }
    }
}

fn parse_nat_sexpr(e: &SExpr) -> Result<NatSyntax> {
    match e {
        SExpr::List(items, l) => {
            if items.is_empty() {
                return perr(*l, "empty natural-transformation expression");
            }
            match want_atom(&items[0], "a transformation name")? {
                "incl" if items.len() == 1 => Ok(NatSyntax::Incl),
                "proj1" if items.len() == 1 => Ok(NatSyntax::Proj1),
                "proj2" if items.len() == 1 => Ok(NatSyntax::Proj2),
                "relabel" if items.len() == 2 => {
                    Ok(NatSyntax::Relabel(parse_rel_pairs(&items[1])?))
                }
                "relabel-conv" if items.len() == 2 => {
                    Ok(NatSyntax::RelabelConv(parse_rel_pairs(&items[1])?))
                }
                other => perr(*l, format!("unknown natural transformation `{other}`")),
            }
        }
        SExpr::Atom(_, l) => perr(*l, "expected a parenthesized natural transformation"),
    }
}

fn syntax_of(e: &SExpr) -> Result<ConnectorSyntax> {
    let (items, l) = match e {
        SExpr::List(items, l) => (items, *l),
        SExpr::Atom(_, l) => return perr(*l, "expected a parenthesized connector"),
    };
    if items.is_empty() {
        return perr(l, "empty connector expression");
    }
    let head = want_atom(&items[0], "a connector name")?;
    let arity = |n: usize| -> Result<()> {
        if items.len() != n + 1 {
            return perr(l, format!("`{head}` takes {n} argument(s)"));
        }
        Ok(())
    };
    match head {
        "id" => {
            arity(0)?;
            Ok(ConnectorSyntax::Id)
        }
        "lf" => {
            arity(0)?;
            Ok(ConnectorSyntax::Lf)
        }
        "lt" => {
            arity(0)?;
            Ok(ConnectorSyntax::Lt)
        }
        "ioco" => {
            arity(0)?;
            Ok(ConnectorSyntax::Ioco)
        }
        "weak" => {
            arity(1)?;
            Ok(ConnectorSyntax::Weak(
                want_atom(&items[1], "a label")?.to_string(),
            ))
        }
        "kr" => {
            arity(1)?;
            Ok(ConnectorSyntax::Kr(parse_rel_pairs(&items[1])?))
        }
        "lr" => {
            arity(1)?;
            Ok(ConnectorSyntax::Lr(parse_rel_pairs(&items[1])?))
        }
        "conv" => {
            arity(1)?;
            Ok(ConnectorSyntax::Conv(Box::new(syntax_of(&items[1])?)))
        }
        "comp" => {
            arity(2)?;
            Ok(ConnectorSyntax::Comp(
                Box::new(syntax_of(&items[1])?),
                Box::new(syntax_of(&items[2])?),
            ))
        }
        "meet" => {
            arity(2)?;
            Ok(ConnectorSyntax::Meet(
                Box::new(syntax_of(&items[1])?),
                Box::new(syntax_of(&items[2])?),
            ))
        }
        "prod" => {
            arity(2)?;
            Ok(ConnectorSyntax::Prod(
                Box::new(syntax_of(&items[1])?),
                Box::new(syntax_of(&items[2])?),
            ))
        }
        "kant" => {
            if items.len() < 2 {
                return perr(l, "`kant` takes at least one lifting pair");
            }
            let mut pairs = Vec::new();
            for p in &items[1..] {
                match p {
                    SExpr::List(lm, pl) if lm.len() == 2 => {
                        pairs.push((parse_lifting_sexpr(&lm[0])?, parse_lifting_sexpr(&lm[1])?));
                        let _ = pl;
                    }
                    other => {
                        return perr(
                            other.line(),
                            "expected a `(lifting lifting)` pair",
                        )
                    }
                }
            }
            Ok(ConnectorSyntax::Kant(pairs))
        }
        "pull-left" => {
            arity(2)?;
            Ok(ConnectorSyntax::PullLeft(
                Box::new(syntax_of(&items[1])?),
                parse_nat_sexpr(&items[2])?,
            ))
        }
        "pull-right" => {
            arity(2)?;
            Ok(ConnectorSyntax::PullRight(
                parse_nat_sexpr(&items[1])?,
                Box::new(syntax_of(&items[2])?),
            ))
        }
        other => perr(l, format!("unknown connector `{other}`")),
    }
}

/// Parses a connector expression in the DSL. Whitespace-insensitive;
/// kind checking is deferred to [`elaborate_connector`].
pub fn parse_connector(text: &str) -> Result<ConnectorSyntax> {
    // Comments behave as in the native format.
    let stripped: String = text
        .lines()
        .map(|l| match l.find('#') {
            Some(p) => &l[..p],
            None => l,
        })
        .collect::<Vec<_>>()
        .join("\n");
    syntax_of(&lex_sexpr(&stripped)?)
}

fn names_fin(names: impl IntoIterator<Item = String>) -> FinSet {
    let set: BTreeSet<String> = names.into_iter().collect();
    FinSet::new(set).expect("deduplicated")
}

fn rel_from_named_pairs(src: &FinSet, dst: &FinSet, pairs: &[(String, String)]) -> Result<Rel> {
    let borrowed: Vec<(&str, &str)> = pairs
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    Rel::from_pairs(src, dst, &borrowed)
}

fn build_nat(ns: &NatSyntax, dom: &FunctorKind) -> Result<(NatTrans, FunctorKind)> {
    let fail = |expected: &str| Error::KindMismatch {
        context: "natural transformation domain".into(),
        expected: expected.into(),
        got: dom.to_string(),
    };
    match ns {
        NatSyntax::Incl => match dom {
            FunctorKind::Det { labels } => {
                Ok((NatTrans::Incl, FunctorKind::plts(labels.clone())))
            }
            _ => Err(fail("deterministic kind")),
        },
        NatSyntax::Relabel(pairs) => match dom {
            FunctorKind::Plts { labels } => {
                let dst = names_fin(pairs.iter().map(|(_, b)| b.clone()));
                let r = rel_from_named_pairs(labels, &dst, pairs)?;
                Ok((NatTrans::Relabel(r), FunctorKind::plts(dst)))
            }
            _ => Err(fail("nondeterministic kind")),
        },
        NatSyntax::RelabelConv(pairs) => match dom {
            FunctorKind::Plts { labels } => {
                let src = names_fin(pairs.iter().map(|(a, _)| a.clone()));
                let r = rel_from_named_pairs(&src, labels, pairs)?;
                Ok((NatTrans::RelabelConv(r), FunctorKind::plts(src)))
            }
            _ => Err(fail("nondeterministic kind")),
        },
        NatSyntax::Proj1 => match dom {
            FunctorKind::Pair(k1, k2) => Ok((
                NatTrans::Proj1(k1.clone(), k2.clone()),
                k1.as_ref().clone(),
            )),
            _ => Err(fail("product kind")),
        },
        NatSyntax::Proj2 => match dom {
            FunctorKind::Pair(k1, k2) => Ok((
                NatTrans::Proj2(k1.clone(), k2.clone()),
                k2.as_ref().clone(),
            )),
            _ => Err(fail("product kind")),
        },
    }
}

fn synth_dst(s: &ConnectorSyntax, src: &FunctorKind) -> Option<FunctorKind> {
    match s {
        ConnectorSyntax::Id => Some(src.clone()),
        ConnectorSyntax::Kant(_) => None,
        ConnectorSyntax::Comp(l, k) => synth_dst(l, &synth_dst(k, src)?),
        ConnectorSyntax::Conv(c) => synth_src(c, src),
        ConnectorSyntax::Meet(a, b) => synth_dst(a, src).or_else(|| synth_dst(b, src)),
        ConnectorSyntax::Prod(a, b) => match src {
            FunctorKind::Pair(f1, f2) => Some(FunctorKind::pair(
                synth_dst(a, f1)?,
                synth_dst(b, f2)?,
            )),
            _ => None,
        },
        ConnectorSyntax::Kr(p) | ConnectorSyntax::Lr(p) => Some(FunctorKind::plts(names_fin(
            p.iter().map(|(_, b)| b.clone()),
        ))),
        ConnectorSyntax::Lf => match src {
            FunctorKind::Plts { .. } => Some(src.clone()),
            _ => None,
        },
        ConnectorSyntax::Lt => match src {
            FunctorKind::Det { labels } => Some(FunctorKind::plts(labels.clone())),
            _ => None,
        },
        ConnectorSyntax::Ioco => match src {
            FunctorKind::Susp { inputs, outputs } => {
                FunctorKind::susp_ie(inputs.clone(), outputs.clone()).ok()
            }
            _ => None,
        },
        ConnectorSyntax::Weak(tau) => match src {
            FunctorKind::Plts { labels } => {
                let (sat, _) = weak_label_rel(labels, tau).ok()?;
                Some(FunctorKind::plts(sat))
            }
            _ => None,
        },
        ConnectorSyntax::PullLeft(c, ns) => {
            let (_, cod) = build_nat(ns, src).ok()?;
            synth_dst(c, &cod)
        }
        ConnectorSyntax::PullRight(ns, c) => {
            let g = synth_dst(c, src)?;
            nat_dom_from_cod(ns, &g)
        }
    }
}

fn synth_src(s: &ConnectorSyntax, dst: &FunctorKind) -> Option<FunctorKind> {
    match s {
        ConnectorSyntax::Id => Some(dst.clone()),
        ConnectorSyntax::Kant(_) => None,
        ConnectorSyntax::Comp(l, k) => synth_src(k, &synth_src(l, dst)?),
        ConnectorSyntax::Conv(c) => synth_dst(c, dst),
        ConnectorSyntax::Meet(a, b) => synth_src(a, dst).or_else(|| synth_src(b, dst)),
        ConnectorSyntax::Prod(a, b) => match dst {
            FunctorKind::Pair(g1, g2) => Some(FunctorKind::pair(
                synth_src(a, g1)?,
                synth_src(b, g2)?,
            )),
            _ => None,
        },
        ConnectorSyntax::Kr(p) | ConnectorSyntax::Lr(p) => Some(FunctorKind::plts(names_fin(
            p.iter().map(|(a, _)| a.clone()),
        ))),
        ConnectorSyntax::Lf => match dst {
            FunctorKind::Plts { .. } => Some(dst.clone()),
            _ => None,
        },
        ConnectorSyntax::Lt => match dst {
            FunctorKind::Plts { labels } => FunctorKind::det(labels.clone()).ok(),
            _ => None,
        },
        ConnectorSyntax::Ioco => match dst {
            FunctorKind::SuspIe { inputs, outputs } => {
                FunctorKind::susp(inputs.clone(), outputs.clone()).ok()
            }
            _ => None,
        },
        ConnectorSyntax::Weak(_) => match dst {
            FunctorKind::Plts { labels } => {
                use crate::connectors::EPSILON_LABEL;
                labels.index_of(EPSILON_LABEL)?;
                let orig: Vec<String> = labels
                    .names()
                    .iter()
                    .filter(|n| n.as_str() != EPSILON_LABEL)
                    .cloned()
                    .collect();
                Some(FunctorKind::plts(FinSet::new(orig).ok()?))
            }
            _ => None,
        },
        ConnectorSyntax::PullLeft(c, ns) => {
            let f = synth_src(c, dst)?;
            nat_dom_from_cod(ns, &f)
        }
        ConnectorSyntax::PullRight(ns, c) => {
            let (_, cod) = build_nat(ns, dst).ok()?;
            synth_src(c, &cod)
        }
    }
}

/// Domain of a syntactic transformation given its codomain, where the
/// label relation determines the missing alphabet.
fn nat_dom_from_cod(ns: &NatSyntax, cod: &FunctorKind) -> Option<FunctorKind> {
    match ns {
        NatSyntax::Incl => match cod {
            FunctorKind::Plts { labels } => FunctorKind::det(labels.clone()).ok(),
            _ => None,
        },
        NatSyntax::Relabel(pairs) => match cod {
            FunctorKind::Plts { .. } => Some(FunctorKind::plts(names_fin(
                pairs.iter().map(|(a, _)| a.clone()),
            ))),
            _ => None,
        },
        NatSyntax::RelabelConv(pairs) => match cod {
            FunctorKind::Plts { .. } => Some(FunctorKind::plts(names_fin(
                pairs.iter().map(|(_, b)| b.clone()),
            ))),
            _ => None,
        },
        NatSyntax::Proj1 | NatSyntax::Proj2 => None,
    }
}

fn elaborate(s: &ConnectorSyntax, left: &FunctorKind, right: &FunctorKind) -> Result<ConnectorExpr> {
    let mismatch = |context: &str, expected: String, got: String| Error::KindMismatch {
        context: context.into(),
        expected,
        got,
    };
    match s {
        ConnectorSyntax::Id => {
            if left != right {
                return Err(mismatch(
                    "identity connector endpoints",
                    left.to_string(),
                    right.to_string(),
                ));
            }
            Ok(ConnectorExpr::Id(left.clone()))
        }
        ConnectorSyntax::Kant(pairs) => Ok(ConnectorExpr::Kant(crate::liftings::LambdaRel::new(
            left.clone(),
            right.clone(),
            pairs.clone(),
        )?)),
        ConnectorSyntax::Conv(c) => Ok(ConnectorExpr::Conv(Box::new(elaborate(
            c, right, left,
        )?))),
        ConnectorSyntax::Meet(a, b) => Ok(ConnectorExpr::Meet(
            Box::new(elaborate(a, left, right)?),
            Box::new(elaborate(b, left, right)?),
        )),
        ConnectorSyntax::Prod(a, b) => match (left, right) {
            (FunctorKind::Pair(f1, f2), FunctorKind::Pair(g1, g2)) => Ok(ConnectorExpr::Prod(
                Box::new(elaborate(a, f1, g1)?),
                Box::new(elaborate(b, f2, g2)?),
            )),
            _ => Err(mismatch(
                "product connector endpoints",
                "product kinds".into(),
                format!("{left} / {right}"),
            )),
        },
        ConnectorSyntax::Comp(l, k) => {
            // Both endpoints may constrain the middle kind; minimal
            // alphabets inferred from label relations are unioned so
            // that unused labels survive.
            let mid = match (synth_dst(k, left), synth_src(l, right)) {
                (Some(a), Some(b)) if a == b => Some(a),
                (
                    Some(FunctorKind::Plts { labels: la }),
                    Some(FunctorKind::Plts { labels: lb }),
                ) => Some(FunctorKind::plts(la.union(&lb))),
                (Some(a), Some(_)) | (Some(a), None) => Some(a),
                (None, Some(b)) => Some(b),
                (None, None) => None,
            }
            .ok_or_else(|| {
                Error::Validation("cannot infer the middle kind of a composition".into())
            })?;
            Ok(ConnectorExpr::Comp(
                Box::new(elaborate(l, &mid, right)?),
                Box::new(elaborate(k, left, &mid)?),
            ))
        }
        ConnectorSyntax::Kr(pairs) | ConnectorSyntax::Lr(pairs) => {
            let (la, lb) = match (left, right) {
                (FunctorKind::Plts { labels: la }, FunctorKind::Plts { labels: lb }) => (la, lb),
                _ => {
                    return Err(mismatch(
                        "label-translation connector endpoints",
                        "nondeterministic kinds".into(),
                        format!("{left} / {right}"),
                    ))
                }
            };
            let r = rel_from_named_pairs(la, lb, pairs)?;
            Ok(match s {
                ConnectorSyntax::Kr(_) => ConnectorExpr::Kr(r),
                _ => ConnectorExpr::Lr(r),
            })
        }
        ConnectorSyntax::Lf => match (left, right) {
            (FunctorKind::Plts { labels: la }, FunctorKind::Plts { labels: lb })
                if la.same(lb) =>
            {
                Ok(ConnectorExpr::Lf(la.clone()))
            }
            _ => Err(mismatch(
                "forward-simulation connector endpoints",
                "one shared nondeterministic kind".into(),
                format!("{left} / {right}"),
            )),
        },
        ConnectorSyntax::Lt => match (left, right) {
            (FunctorKind::Det { labels: la }, FunctorKind::Plts { labels: lb })
                if la.same(lb) =>
            {
                Ok(ConnectorExpr::Lt(la.clone()))
            }
            _ => Err(mismatch(
                "trace connector endpoints",
                "deterministic versus nondeterministic over one alphabet".into(),
                format!("{left} / {right}"),
            )),
        },
        ConnectorSyntax::Ioco => match (left, right) {
            (
                FunctorKind::Susp { inputs, outputs },
                FunctorKind::SuspIe {
                    inputs: i2,
                    outputs: o2,
                },
            ) if inputs.same(i2) && outputs.same(o2) => Ok(ConnectorExpr::Ioco {
                inputs: inputs.clone(),
                outputs: outputs.clone(),
            }),
            _ => Err(mismatch(
                "conformance connector endpoints",
                "suspension versus input-enabled suspension over shared alphabets".into(),
                format!("{left} / {right}"),
            )),
        },
        ConnectorSyntax::Weak(tau) => match left {
            FunctorKind::Plts { labels } => {
                let (sat, _) = weak_label_rel(labels, tau)?;
                let expected = FunctorKind::plts(sat);
                if *right != expected {
                    return Err(mismatch(
                        "weak connector right endpoint",
                        expected.to_string(),
                        right.to_string(),
                    ));
                }
                Ok(ConnectorExpr::Weak {
                    labels: labels.clone(),
                    tau: tau.clone(),
                })
            }
            _ => Err(mismatch(
                "weak connector left endpoint",
                "nondeterministic kind".into(),
                left.to_string(),
            )),
        },
        ConnectorSyntax::PullLeft(c, ns) => {
            let (nat, cod) = build_nat(ns, left)?;
            Ok(ConnectorExpr::PullLeft(
                Box::new(elaborate(c, &cod, right)?),
                nat,
            ))
        }
        ConnectorSyntax::PullRight(ns, c) => {
            let (nat, cod) = build_nat(ns, right)?;
            Ok(ConnectorExpr::PullRight(
                Box::new(elaborate(c, left, &cod)?),
                nat,
            ))
        }
    }
}

/// Resolves a parsed connector against the two endpoint kinds and
/// verifies that the result is well-kinded between exactly those kinds.
pub fn elaborate_connector(
    s: &ConnectorSyntax,
    left: &FunctorKind,
    right: &FunctorKind,
) -> Result<ConnectorExpr> {
    let expr = elaborate(s, left, right)?;
    let (f, g) = expr.kinds()?;
    if &f != left || &g != right {
        return Err(Error::KindMismatch {
            context: "elaborated connector endpoints".into(),
            expected: format!("{left} -> {right}"),
            got: format!("{f} -> {g}"),
        });
    }
    Ok(expr)
}

/// Parses and elaborates in one step.
pub fn parse_connector_with(
    text: &str,
    left: &FunctorKind,
    right: &FunctorKind,
) -> Result<ConnectorExpr> {
    elaborate_connector(&parse_connector(text)?, left, right)
}

fn show_rel(r: &Rel) -> String {
    let mut s = String::from("(rel");
    for (a, b) in r.named_pairs() {
        s.push_str(&format!(" ({a} {b})"));
    }
    s.push(')');
    s
}

fn show_lifting_sexpr(l: &Lifting) -> String {
    match l {
        Lifting::Dia(a) => format!("(dia {a})"),
        Lifting::Box(a) => format!("(box {a})"),
        Lifting::Down(a) => format!("(down {a})"),
        Lifting::Def(a) => format!("(def {a})"),
        Lifting::PGe(a, e) => format!("(pge {a} {e})"),
        Lifting::PLt(a, e) => format!("(plt {a} {e})"),
        Lifting::BigBox => "bigbox".into(),
        Lifting::BigDia => "bigdia".into(),
        Lifting::Pos(s) => format!("(pos {})", show_outer_sexpr(s)),
    }
}

fn show_outer_sexpr(s: &PosSkel) -> String {
    match s {
        PosSkel::Top => "top".into(),
        PosSkel::Bot => "bot".into(),
        PosSkel::And(a, b) => format!("(and {} {})", show_outer_sexpr(a), show_outer_sexpr(b)),
        PosSkel::Or(a, b) => format!("(or {} {})", show_outer_sexpr(a), show_outer_sexpr(b)),
        PosSkel::Ap(l, inner) => {
            let mut out = format!("(ap {}", show_lifting_sexpr(l));
            for i in inner {
                out.push(' ');
                out.push_str(&show_inner_sexpr(i));
            }
            out.push(')');
            out
        }
    }
}

fn show_inner_sexpr(s: &InnerSkel) -> String {
    match s {
        InnerSkel::Top => "top".into(),
        InnerSkel::Bot => "bot".into(),
        InnerSkel::And(a, b) => format!("(and {} {})", show_inner_sexpr(a), show_inner_sexpr(b)),
        InnerSkel::Or(a, b) => format!("(or {} {})", show_inner_sexpr(a), show_inner_sexpr(b)),
        InnerSkel::Ph(i) => format!("(ph {i})"),
    }
}

fn show_nat(n: &NatTrans) -> String {
    match n {
        NatTrans::Incl => "(incl)".into(),
        NatTrans::Relabel(r) => format!("(relabel {})", show_rel(r)),
        NatTrans::RelabelConv(r) => format!("(relabel-conv {})", show_rel(r)),
        NatTrans::Proj1(..) => "(proj1)".into(),
        NatTrans::Proj2(..) => "(proj2)".into(),
    }
}

/// Serializes a connector expression in the DSL. Elaborating the result
/// against the expression's own endpoint kinds reproduces it.
pub fn serialize_connector(e: &ConnectorExpr) -> String {
    match e {
        ConnectorExpr::Id(_) => "(id)".into(),
        ConnectorExpr::Kant(lam) => {
            let mut s = String::from("(kant");
            for (l, m) in lam.pairs() {
                s.push_str(&format!(
                    " ({} {})",
                    show_lifting_sexpr(l),
                    show_lifting_sexpr(m)
                ));
            }
            s.push(')');
            s
        }
        ConnectorExpr::Comp(l, k) => format!(
            "(comp {} {})",
            serialize_connector(l),
            serialize_connector(k)
        ),
        ConnectorExpr::Conv(c) => format!("(conv {})", serialize_connector(c)),
        ConnectorExpr::Meet(a, b) => format!(
            "(meet {} {})",
            serialize_connector(a),
            serialize_connector(b)
        ),
        ConnectorExpr::Prod(a, b) => format!(
            "(prod {} {})",
            serialize_connector(a),
            serialize_connector(b)
        ),
        ConnectorExpr::PullLeft(c, nat) => {
            format!("(pull-left {} {})", serialize_connector(c), show_nat(nat))
        }
        ConnectorExpr::PullRight(c, nat) => {
            format!("(pull-right {} {})", show_nat(nat), serialize_connector(c))
        }
        ConnectorExpr::Kr(r) => format!("(kr {})", show_rel(r)),
        ConnectorExpr::Lr(r) => format!("(lr {})", show_rel(r)),
        ConnectorExpr::Lf(_) => "(lf)".into(),
        ConnectorExpr::Lt(_) => "(lt)".into(),
        ConnectorExpr::Ioco { .. } => "(ioco)".into(),
        ConnectorExpr::Weak { tau, .. } => format!("(weak {tau})"),
    }
}

// ---------------------------------------------------------------------
// Relation output
// ---------------------------------------------------------------------

/// Renders a relation as tab-separated `x<TAB>y` lines, sorted
/// lexicographically, with a trailing newline per line. Byte-exact
/// across runs.
pub fn write_relation(r: &Rel) -> String {
    let mut pairs = r.named_pairs();
    pairs.sort();
    let mut out = String::new();
    for (a, b) in pairs {
        out.push_str(&a);
        out.push('\t');
        out.push_str(&b);
        out.push('\n');
    }
    out
}

/// Parses relation text produced by [`write_relation`] against known
/// carriers.
pub fn parse_relation(text: &str, src: &FinSet, dst: &FinSet) -> Result<Rel> {
    let mut r = Rel::empty(src, dst);
    for (lno, content) in content_lines(text) {
        let (a, b) = content.split_once('\t').ok_or_else(|| Error::Parse {
            line: lno,
            msg: "expected `x<TAB>y`".into(),
        })?;
        let i = src.index_of(a.trim()).ok_or_else(|| Error::Parse {
            line: lno,
            msg: format!("unknown source element `{}`", a.trim()),
        })?;
        let j = dst.index_of(b.trim()).ok_or_else(|| Error::Parse {
            line: lno,
            msg: format!("unknown target element `{}`", b.trim()),
        })?;
        r.insert(i, j);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liftings::LambdaRel;

    #[test]
    fn chc_round_trips_every_kind() {
        let docs = [
            "functor PLTS labels=a,b\nstates s0 s1\ns0: a->s1 b->s0\ns1:\n",
            "functor DLTS labels=a\nstates s0 s1\ns0: a->s0:1/2 a->s1:1/2\ns1: a->s1:1\n",
            "functor DET labels=a,b\nstates s0 s1\ns0: a->s1\ns1: b->s0\n",
            "functor SUSP in=coin out=coffee,delta\nstates s0 s1\ns0: coin->s1 delta->s0\ns1: coffee->s0\n",
            "functor SUSPIE in=coin out=coffee,delta\nstates s0 s1\ns0: coin->s1 delta->s0\ns1: coin->s1 coffee->s0\n",
        ];
        for doc in docs {
            let c = parse_chc(doc).unwrap_or_else(|e| panic!("{doc}: {e}"));
            let shown = serialize_chc(&c).unwrap();
            let again = parse_chc(&shown).unwrap();
            assert_eq!(c.kind(), again.kind());
            assert!(c.states().same(again.states()));
            assert_eq!(c.terms(), again.terms());
            assert_eq!(shown, serialize_chc(&again).unwrap());
        }
    }

    #[test]
    fn chc_tolerates_comments_blank_lines_and_crlf() {
        let doc = "# a system\r\nfunctor PLTS labels=a\r\n\r\nstates s0 # two states? no\r\ns0: a->s0\r\n";
        let c = parse_chc(doc).unwrap();
        assert_eq!(c.states().size(), 1);
    }

    #[test]
    fn chc_reports_errors_with_lines_and_states() {
        let doc = "functor DLTS labels=a\nstates s0\ns0: a->s0:5/6\n";
        let err = parse_chc(doc).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("5/6") && msg.contains("s0"), "{msg}");

        let doc = "functor SUSPIE in=i out=o\nstates s0\ns0: o->s0\n";
        let err = parse_chc(doc).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("input i undefined") && msg.contains("s0"), "{msg}");

        let doc = "functor PLTS labels=a\nstates s0\ns1: a->s0\n";
        let err = parse_chc(doc).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");

        let doc = "functor DET labels=a\nstates s0\ns0: a->s0 a->s0\n";
        let err = parse_chc(doc).unwrap_err();
        assert!(err.to_string().contains("exactly one"), "{err}");

        let doc = "functor PLTS labels=a\nstates s0 s1\ns0: a->s1\n";
        let err = parse_chc(doc).unwrap_err();
        assert!(err.to_string().contains("missing transition line"), "{err}");
    }

    #[test]
    fn aut_parses_quoted_and_bare_labels() {
        let doc = "des (0, 2, 3)\n(0,\"a b\",1)\n(1,tau,2)\n";
        let out = parse_aut(doc, None).unwrap();
        assert!(out.warnings.is_empty());
        assert_eq!(out.init, 0);
        assert_eq!(out.coalgebra.states().size(), 3);
        let labels = out.coalgebra.kind().labels().unwrap();
        assert_eq!(labels.names(), &["a b".to_string(), "tau".to_string()]);

        let deadlock = parse_aut("des (0,0,1)\n", None).unwrap();
        assert_eq!(deadlock.coalgebra.states().size(), 1);
        assert_eq!(
            deadlock.coalgebra.gamma(0),
            &FunctorTerm::Plts(Default::default())
        );
    }

    #[test]
    fn aut_count_mismatch_is_warning_and_labels_check() {
        let doc = "des (0, 5, 2)\n(0,a,1)\n";
        let out = parse_aut(doc, None).unwrap();
        assert_eq!(out.warnings.len(), 1);
        assert!(out.warnings[0].contains("declared 5"), "{:?}", out.warnings);

        let declared = FinSet::new(["a", "b"]).unwrap();
        let out = parse_aut(doc, Some(&declared)).unwrap();
        assert!(out.coalgebra.kind().labels().unwrap().same(&declared));

        let bad = FinSet::new(["b"]).unwrap();
        let err = parse_aut(doc, Some(&bad)).unwrap_err();
        assert!(err.to_string().contains("not in the declared alphabet"), "{err}");
    }

    #[test]
    fn connector_dsl_examples() {
        let a2 = FinSet::new(["a", "b"]).unwrap();
        let kind = FunctorKind::plts(a2.clone());
        let e = parse_connector_with("(id)", &kind, &kind).unwrap();
        assert_eq!(e, ConnectorExpr::Id(kind.clone()));

        let ka = FunctorKind::plts(FinSet::new(["a"]).unwrap());
        let kc = FunctorKind::plts(FinSet::new(["c"]).unwrap());
        let e = parse_connector_with("(comp (lr (rel (b c))) (lr (rel (a b))))", &ka, &kc)
            .unwrap();
        match &e {
            ConnectorExpr::Comp(l, k) => {
                assert!(matches!(l.as_ref(), ConnectorExpr::Lr(_)));
                assert!(matches!(k.as_ref(), ConnectorExpr::Lr(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
        let (f, g) = e.kinds().unwrap();
        assert_eq!((f, g), (ka.clone(), kc.clone()));

        let dl = FunctorKind::dlts(FinSet::new(["a"]).unwrap());
        let pl = FunctorKind::plts(FinSet::new(["a"]).unwrap());
        let e = parse_connector_with("(kant ((dia a) (pge a 1/3)))", &pl, &dl).unwrap();
        match &e {
            ConnectorExpr::Kant(lam) => {
                assert_eq!(
                    lam.pairs(),
                    &[(
                        Lifting::Dia("a".into()),
                        Lifting::PGe("a".into(), Ratio::new(1, 3))
                    )]
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn connector_round_trips() {
        let a = FinSet::new(["a", "b"]).unwrap();
        let kind = FunctorKind::plts(a.clone());
        let det = FunctorKind::det(a.clone()).unwrap();
        let susp = FunctorKind::susp(
            FinSet::new(["i"]).unwrap(),
            FinSet::new(["o", "delta"]).unwrap(),
        )
        .unwrap();
        let suspie = FunctorKind::susp_ie(
            FinSet::new(["i"]).unwrap(),
            FinSet::new(["o", "delta"]).unwrap(),
        )
        .unwrap();
        let lam = LambdaRel::new(
            kind.clone(),
            kind.clone(),
            vec![
                (Lifting::Dia("a".into()), Lifting::Dia("a".into())),
                (Lifting::BigBox, Lifting::BigBox),
            ],
        )
        .unwrap();
        let rr = Rel::from_pairs(&a, &a, &[("a", "a"), ("b", "a")]).unwrap();
        let exprs = vec![
            ConnectorExpr::Id(kind.clone()),
            ConnectorExpr::Kant(lam),
            ConnectorExpr::Lr(rr.clone()),
            ConnectorExpr::Kr(rr.clone()),
            ConnectorExpr::Lf(a.clone()),
            ConnectorExpr::Lt(a.clone()),
            ConnectorExpr::Ioco {
                inputs: FinSet::new(["i"]).unwrap(),
                outputs: FinSet::new(["o", "delta"]).unwrap(),
            },
            ConnectorExpr::Conv(Box::new(ConnectorExpr::Lr(rr.clone()))),
            ConnectorExpr::Meet(
                Box::new(ConnectorExpr::Lr(rr.clone())),
                Box::new(ConnectorExpr::Kr(rr.clone())),
            ),
            ConnectorExpr::Comp(
                Box::new(ConnectorExpr::Lr(rr.clone())),
                Box::new(ConnectorExpr::Lr(rr.clone())),
            ),
            ConnectorExpr::PullLeft(Box::new(ConnectorExpr::Lf(a.clone())), NatTrans::Incl),
            ConnectorExpr::Prod(
                Box::new(ConnectorExpr::Lf(a.clone())),
                Box::new(ConnectorExpr::Lt(a.clone())),
            ),
        ];
        let _ = (&susp, &suspie, &det);
        for e in exprs {
            let (f, g) = e.kinds().unwrap();
            let text = serialize_connector(&e);
            let again = parse_connector_with(&text, &f, &g)
                .unwrap_or_else(|err| panic!("{text}: {err}"));
            assert_eq!(again, e, "{text}");
        }
    }

    #[test]
    fn weak_round_trips_against_saturated_alphabet() {
        let a = FinSet::new(["a", "tau"]).unwrap();
        let e = ConnectorExpr::Weak {
            labels: a.clone(),
            tau: "tau".into(),
        };
        let (f, g) = e.kinds().unwrap();
        let text = serialize_connector(&e);
        assert_eq!(text, "(weak tau)");
        let again = parse_connector_with(&text, &f, &g).unwrap();
        assert_eq!(again, e);
    }

    #[test]
    fn connector_kind_errors() {
        let ka = FunctorKind::plts(FinSet::new(["a"]).unwrap());
        let kb = FunctorKind::plts(FinSet::new(["b"]).unwrap());
        let err = parse_connector_with("(id)", &ka, &kb).unwrap_err();
        assert!(matches!(err, Error::KindMismatch { .. }), "{err}");
        let err = parse_connector_with("(lr (rel (z b)))", &ka, &kb).unwrap_err();
        assert!(matches!(err, Error::StrayElement { .. }), "{err}");
        let err = parse_connector("(comp (id))").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
        let err = parse_connector("(frob)").unwrap_err();
        assert!(err.to_string().contains("unknown connector"), "{err}");
    }

    #[test]
    fn relation_output_is_sorted_with_tabs() {
        let src = FinSet::new(["s0", "s1"]).unwrap();
        let dst = FinSet::new(["t0", "t1"]).unwrap();
        let mut r = Rel::empty(&src, &dst);
        r.insert(1, 0);
        r.insert(0, 1);
        r.insert(0, 0);
        let text = write_relation(&r);
        assert_eq!(text, "s0\tt0\ns0\tt1\ns1\tt0\n");
        let back = parse_relation(&text, &src, &dst).unwrap();
        assert_eq!(back, r);
        assert_eq!(write_relation(&Rel::empty(&src, &dst)), "");
    }
}
