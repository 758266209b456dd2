//! Modal formulas over lifting pairs: parsing, evaluation over either
//! side of a lifting relation, and synthesis of distinguishing formulas
//! for dissimilar state pairs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use crate::connectors::{kant_violation, ConnectorExpr, EvalCaps};
use crate::err::{Error, Result};
use crate::functors::{Coalgebra, Ratio};
use crate::liftings::{eval_lifting, InnerSkel, LambdaRel, Lifting, PosSkel};
use crate::rel::Subset;
use crate::simulation::{greatest_simulation, SimResult};

/// A formula node. Formulas are reference-counted so that synthesized
/// certificates can share subformulas instead of duplicating them.
#[derive(Debug, PartialEq, Eq)]
pub enum FormulaNode {
    Top,
    Bot,
    And(Formula, Formula),
    Or(Formula, Formula),
    /// A modality: the first lifting is the left-hand reading, the
    /// second the right-hand reading. Arguments match the common arity.
    Mod(Lifting, Lifting, Vec<Formula>),
}

/// Shared-subterm formula handle.
pub type Formula = Rc<FormulaNode>;

/// Which reading of the modality pairs an evaluation uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideTag {
    /// Interpret each modality by its first lifting.
    Left,
    /// Interpret each modality by its second lifting.
    Right,
}

pub fn top() -> Formula {
    Rc::new(FormulaNode::Top)
}

pub fn bot() -> Formula {
    Rc::new(FormulaNode::Bot)
}

/// Deduplicates structurally equal parts (keeping first occurrences),
/// drops the identity element, and collapses on the absorbing element.
fn normalize(parts: Vec<Formula>, identity: &FormulaNode, absorbing: &FormulaNode) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    for p in parts {
        if p.as_ref() == absorbing {
            return vec![p];
        }
        if p.as_ref() == identity {
            continue;
        }
        if !out.iter().any(|q| q.as_ref() == p.as_ref()) {
            out.push(p);
        }
    }
    out
}

/// Conjunction of the parts; the empty conjunction is `T`.
pub fn and_of(parts: Vec<Formula>) -> Formula {
    let mut parts = normalize(parts, &FormulaNode::Top, &FormulaNode::Bot);
    match parts.len() {
        0 => top(),
        1 => parts.pop().unwrap(),
        _ => {
            let mut acc = parts.pop().unwrap();
            while let Some(p) = parts.pop() {
                acc = Rc::new(FormulaNode::And(p, acc));
            }
            acc
        }
    }
}

/// Disjunction of the parts; the empty disjunction is `F`.
pub fn or_of(parts: Vec<Formula>) -> Formula {
    let mut parts = normalize(parts, &FormulaNode::Bot, &FormulaNode::Top);
    match parts.len() {
        0 => bot(),
        1 => parts.pop().unwrap(),
        _ => {
            let mut acc = parts.pop().unwrap();
            while let Some(p) = parts.pop() {
                acc = Rc::new(FormulaNode::Or(p, acc));
            }
            acc
        }
    }
}

impl fmt::Display for FormulaNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaNode::Top => write!(f, "T"),
            FormulaNode::Bot => write!(f, "F"),
            FormulaNode::And(a, b) => write!(f, "({a} & {b})"),
            FormulaNode::Or(a, b) => write!(f, "({a} | {b})"),
            FormulaNode::Mod(l, m, args) => {
                write!(f, "<{l},{m}>")?;
                if args.len() == 1 {
                    write!(f, "{}", args[0])
                } else {
                    let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                    write!(f, "({})", parts.join(","))
                }
            }
        }
    }
}

/// Number of nodes, counting shared subterms once per occurrence.
pub fn formula_size(phi: &Formula) -> usize {
    match phi.as_ref() {
        FormulaNode::Top | FormulaNode::Bot => 1,
        FormulaNode::And(a, b) | FormulaNode::Or(a, b) => 1 + formula_size(a) + formula_size(b),
        FormulaNode::Mod(_, _, args) => 1 + args.iter().map(formula_size).sum::<usize>(),
    }
}

/// Modal nesting depth.
pub fn formula_depth(phi: &Formula) -> usize {
    match phi.as_ref() {
        FormulaNode::Top | FormulaNode::Bot => 0,
        FormulaNode::And(a, b) | FormulaNode::Or(a, b) => formula_depth(a).max(formula_depth(b)),
        FormulaNode::Mod(_, _, args) => {
            1 + args.iter().map(formula_depth).max().unwrap_or(0)
        }
    }
}

// ---------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------

/// The extension of `phi` in `m` under the chosen reading: the set of
/// states satisfying the formula. Computed bottom-up with one memo entry
/// per distinct (shared) subterm.
pub fn formula_extension(phi: &Formula, m: &Coalgebra, side: SideTag) -> Result<Subset> {
    let mut memo: HashMap<*const FormulaNode, Subset> = HashMap::new();
    extension(phi, m, side, &mut memo)
}

fn extension(
    phi: &Formula,
    m: &Coalgebra,
    side: SideTag,
    memo: &mut HashMap<*const FormulaNode, Subset>,
) -> Result<Subset> {
    let key = Rc::as_ptr(phi);
    if let Some(s) = memo.get(&key) {
        return Ok(s.clone());
    }
    let states = m.states();
    let out = match phi.as_ref() {
        FormulaNode::Top => Subset::full(states),
        FormulaNode::Bot => Subset::empty(states),
        FormulaNode::And(a, b) => {
            let mut s = extension(a, m, side, memo)?;
            s.inter_with(&extension(b, m, side, memo)?);
            s
        }
        FormulaNode::Or(a, b) => {
            let mut s = extension(a, m, side, memo)?;
            s.union_with(&extension(b, m, side, memo)?);
            s
        }
        FormulaNode::Mod(l, r, args) => {
            let lift = match side {
                SideTag::Left => l,
                SideTag::Right => r,
            };
            let mut exts = Vec::with_capacity(args.len());
            for a in args {
                exts.push(extension(a, m, side, memo)?);
            }
            let mut s = Subset::empty(states);
            for x in states.indices() {
                if eval_lifting(lift, m.kind(), m.gamma(x), &exts)? {
                    s.insert(x);
                }
            }
            s
        }
    };
    memo.insert(key, out.clone());
    Ok(out)
}

/// Satisfaction of `phi` at state `x` of `m`, reading modalities on the
/// chosen side.
pub fn eval_formula(phi: &Formula, m: &Coalgebra, side: SideTag, x: u32) -> Result<bool> {
    if x as usize >= m.states().size() {
        return Err(Error::UnknownState(format!("state index {x}")));
    }
    Ok(formula_extension(phi, m, side)?.contains(x))
}

// ---------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Parser<'a> {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            text,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let line = 1 + self.text.chars().take(self.pos).filter(|c| *c == '\n').count();
        Err(Error::Parse {
            line,
            msg: format!("{} (at offset {})", msg.into(), self.pos),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => self.err(format!("expected '{c}', found '{got}'")),
            None => self.err(format!("expected '{c}', found end of input")),
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '\'' || c == '.' || c == '-' {
                s.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        s
    }

    fn rational(&mut self) -> Result<Ratio> {
        self.skip_ws();
        let mut digits = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            digits.push(self.bump().unwrap());
        }
        if digits.is_empty() {
            return self.err("expected a rational number");
        }
        let numer: i64 = match digits.parse() {
            Ok(n) => n,
            Err(_) => return self.err("numerator out of range"),
        };
        if self.peek() == Some('/') {
            self.pos += 1;
            let mut den = String::new();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                den.push(self.bump().unwrap());
            }
            if den.is_empty() {
                return self.err("expected a denominator after '/'");
            }
            let denom: i64 = match den.parse() {
                Ok(n) => n,
                Err(_) => return self.err("denominator out of range"),
            };
            if denom == 0 {
                return self.err("denominator must be nonzero");
            }
            Ok(Ratio::new(numer, denom))
        } else {
            Ok(Ratio::from_integer(numer))
        }
    }

    // --- lifting surface syntax: dia(a), pge(a,1/2), bigbox, pos(...) ---

    fn lifting(&mut self) -> Result<Lifting> {
        self.skip_ws();
        let name = self.word();
        match name.as_str() {
            "bigbox" => Ok(Lifting::BigBox),
            "bigdia" => Ok(Lifting::BigDia),
            "dia" | "box" | "down" | "def" => {
                self.expect('(')?;
                let label = self.word();
                if label.is_empty() {
                    return self.err("expected a label");
                }
                self.expect(')')?;
                Ok(match name.as_str() {
                    "dia" => Lifting::Dia(label),
                    "box" => Lifting::Box(label),
                    "down" => Lifting::Down(label),
                    _ => Lifting::Def(label),
                })
            }
            "pge" | "plt" => {
                self.expect('(')?;
                let label = self.word();
                if label.is_empty() {
                    return self.err("expected a label");
                }
                self.expect(',')?;
                let eps = self.rational()?;
                self.expect(')')?;
                Ok(if name == "pge" {
                    Lifting::PGe(label, eps)
                } else {
                    Lifting::PLt(label, eps)
                })
            }
            "pos" => {
                self.expect('(')?;
                let skel = self.pos_outer()?;
                self.expect(')')?;
                Ok(Lifting::Pos(skel))
            }
            "" => self.err("expected a lifting"),
            other => self.err(format!("unknown lifting '{other}'")),
        }
    }

    fn pos_outer(&mut self) -> Result<PosSkel> {
        self.skip_ws();
        if self.peek() == Some('(') {
            self.pos += 1;
            let head = self.word();
            let out = match head.as_str() {
                "and" | "or" => {
                    let a = self.pos_outer()?;
                    let b = self.pos_outer()?;
                    if head == "and" {
                        PosSkel::And(Box::new(a), Box::new(b))
                    } else {
                        PosSkel::Or(Box::new(a), Box::new(b))
                    }
                }
                "ap" => {
                    let lift = self.lifting()?;
                    let mut inner = Vec::new();
                    loop {
                        self.skip_ws();
                        if self.peek() == Some(')') {
                            break;
                        }
                        inner.push(self.pos_inner()?);
                    }
                    PosSkel::Ap(Box::new(lift), inner)
                }
                other => return self.err(format!("unknown skeleton head '{other}'")),
            };
            self.expect(')')?;
            Ok(out)
        } else {
            match self.word().as_str() {
                "top" => Ok(PosSkel::Top),
                "bot" => Ok(PosSkel::Bot),
                other => self.err(format!("unknown skeleton atom '{other}'")),
            }
        }
    }

    fn pos_inner(&mut self) -> Result<InnerSkel> {
        self.skip_ws();
        if self.peek() == Some('(') {
            self.pos += 1;
            let head = self.word();
            let out = match head.as_str() {
                "and" | "or" => {
                    let a = self.pos_inner()?;
                    let b = self.pos_inner()?;
                    if head == "and" {
                        InnerSkel::And(Box::new(a), Box::new(b))
                    } else {
                        InnerSkel::Or(Box::new(a), Box::new(b))
                    }
                }
                "ph" => {
                    self.skip_ws();
                    let w = self.word();
                    match w.parse::<usize>() {
                        Ok(i) => InnerSkel::Ph(i),
                        Err(_) => return self.err("expected a placeholder index"),
                    }
                }
                other => return self.err(format!("unknown skeleton head '{other}'")),
            };
            self.expect(')')?;
            Ok(out)
        } else {
            match self.word().as_str() {
                "top" => Ok(InnerSkel::Top),
                "bot" => Ok(InnerSkel::Bot),
                other => self.err(format!("unknown skeleton atom '{other}'")),
            }
        }
    }

    // --- formula grammar: T | F | (a & b) | (a | b) | <l,m>args ---

    fn formula(&mut self, lam: &LambdaRel) -> Result<Formula> {
        self.skip_ws();
        match self.peek() {
            Some('T') => {
                self.pos += 1;
                Ok(top())
            }
            Some('F') => {
                self.pos += 1;
                Ok(bot())
            }
            Some('(') => {
                self.pos += 1;
                let a = self.formula(lam)?;
                self.skip_ws();
                let op = match self.bump() {
                    Some('&') => '&',
                    Some('|') => '|',
                    Some(c) => return self.err(format!("expected '&' or '|', found '{c}'")),
                    None => return self.err("expected '&' or '|', found end of input"),
                };
                let b = self.formula(lam)?;
                self.expect(')')?;
                Ok(Rc::new(if op == '&' {
                    FormulaNode::And(a, b)
                } else {
                    FormulaNode::Or(a, b)
                }))
            }
            Some('<') => {
                self.pos += 1;
                let l = self.lifting()?;
                self.expect(',')?;
                let m = self.lifting()?;
                self.expect('>')?;
                if !lam.pairs().iter().any(|(a, b)| *a == l && *b == m) {
                    return self.err(format!("pair ({l},{m}) not in the lifting relation"));
                }
                let arity = l.arity(lam.src_kind())?;
                self.skip_ws();
                let mut args = Vec::new();
                if self.peek() == Some('(') {
                    // A parenthesized group after a modality is an
                    // argument list; bare binary formulas never appear
                    // unparenthesized inside it.
                    self.pos += 1;
                    self.skip_ws();
                    if self.peek() != Some(')') {
                        loop {
                            args.push(self.formula(lam)?);
                            self.skip_ws();
                            match self.peek() {
                                Some(',') => {
                                    self.pos += 1;
                                }
                                Some(')') => break,
                                Some(c) => {
                                    return self
                                        .err(format!("expected ',' or ')', found '{c}'"))
                                }
                                None => {
                                    return self.err("expected ',' or ')', found end of input")
                                }
                            }
                        }
                    }
                    self.expect(')')?;
                } else {
                    args.push(self.formula(lam)?);
                }
                if args.len() != arity {
                    return Err(Error::Arity {
                        context: format!("modality <{l},{m}>"),
                        expected: arity,
                        got: args.len(),
                    });
                }
                Ok(Rc::new(FormulaNode::Mod(l, m, args)))
            }
            Some(c) => self.err(format!("expected a formula, found '{c}'")),
            None => self.err("expected a formula, found end of input"),
        }
    }
}

/// Parses `text` in the formula surface grammar, resolving every
/// modality pair against `lam` and checking arities against its source
/// kind.
pub fn parse_formula(text: &str, lam: &LambdaRel) -> Result<Formula> {
    let mut p = Parser::new(text);
    let phi = p.formula(lam)?;
    if !p.at_end() {
        return p.err("trailing input after formula");
    }
    Ok(phi)
}

/// Parses a single lifting in the surface syntax (`dia(a)`,
/// `pge(a,1/2)`, `bigbox`, `pos(...)`).
pub fn parse_lifting_str(text: &str) -> Result<Lifting> {
    let mut p = Parser::new(text);
    let l = p.lifting()?;
    if !p.at_end() {
        return p.err("trailing input after lifting");
    }
    Ok(l)
}

// ---------------------------------------------------------------------
// Distinguishing formulas
// ---------------------------------------------------------------------

/// If `(x, y)` is outside the greatest `Kant(lam)`-simulation from `c`
/// to `d`, synthesizes a formula satisfied at `x` on the left reading
/// and refuted at `y` on the right reading; returns `None` when the
/// pair is similar. The certificate is model-checked on both sides
/// before being returned; a verification failure is reported as an
/// internal error, never silently.
pub fn distinguishing_formula(
    c: &Coalgebra,
    d: &Coalgebra,
    lam: &LambdaRel,
    caps: &EvalCaps,
    x: u32,
    y: u32,
) -> Result<Option<Formula>> {
    let expr = ConnectorExpr::Kant(lam.clone());
    let sim = greatest_simulation(&expr, caps, c, d)?;
    distinguishing_formula_from(c, d, lam, caps, &sim, x, y)
}

/// Same as [`distinguishing_formula`], reusing an already-computed
/// greatest-simulation result for `Kant(lam)` between `c` and `d`.
pub fn distinguishing_formula_from(
    c: &Coalgebra,
    d: &Coalgebra,
    lam: &LambdaRel,
    caps: &EvalCaps,
    sim: &SimResult,
    x: u32,
    y: u32,
) -> Result<Option<Formula>> {
    if x as usize >= c.states().size() || y as usize >= d.states().size() {
        return Err(Error::UnknownState(format!("pair ({x},{y})")));
    }
    if sim.relation.contains(x, y) {
        return Ok(None);
    }
    let mut memo: BTreeMap<(u32, u32), Formula> = BTreeMap::new();
    let phi = synthesize(c, d, lam, caps, sim, x, y, &mut memo)?;
    if !eval_formula(&phi, c, SideTag::Left, x)? {
        return Err(Error::InternalVerification(format!(
            "synthesized formula {phi} is not satisfied at left state {}",
            c.states().name(x)
        )));
    }
    if eval_formula(&phi, d, SideTag::Right, y)? {
        return Err(Error::InternalVerification(format!(
            "synthesized formula {phi} is satisfied at right state {}",
            d.states().name(y)
        )));
    }
    Ok(Some(phi))
}

/// Builds the certificate for a removed pair by replaying its removal
/// round: a violating lifting pair plus witness arguments exist there,
/// and every pair absent from that round's relation was removed
/// earlier, so recursion terminates.
#[allow(clippy::too_many_arguments)]
fn synthesize(
    c: &Coalgebra,
    d: &Coalgebra,
    lam: &LambdaRel,
    caps: &EvalCaps,
    sim: &SimResult,
    x: u32,
    y: u32,
    memo: &mut BTreeMap<(u32, u32), Formula>,
) -> Result<Formula> {
    if let Some(f) = memo.get(&(x, y)) {
        return Ok(f.clone());
    }
    let round = *sim.removed_at.get(&(x, y)).ok_or_else(|| {
        Error::InternalVerification(format!(
            "pair ({},{}) is dissimilar but has no removal record",
            c.states().name(x),
            d.states().name(y)
        ))
    })?;
    let rk = &sim.rounds[round];
    let viol = kant_violation(lam, caps, rk, c.gamma(x), d.gamma(y))?.ok_or_else(|| {
        Error::InternalVerification(format!(
            "no lifting-pair violation found at the recorded removal round for ({},{})",
            c.states().name(x),
            d.states().name(y)
        ))
    })?;
    let (l, m) = &lam.pairs()[viol.pair_index];
    let mut args = Vec::with_capacity(viol.args.len());
    for aj in &viol.args {
        let mut disjuncts = Vec::new();
        for xp in aj.iter() {
            let mut conjuncts = Vec::new();
            for yp in d.states().indices() {
                if !rk.contains(xp, yp) {
                    conjuncts.push(synthesize(c, d, lam, caps, sim, xp, yp, memo)?);
                }
            }
            disjuncts.push(and_of(conjuncts));
        }
        args.push(or_of(disjuncts));
    }
    let phi: Formula = Rc::new(FormulaNode::Mod(l.clone(), m.clone(), args));
    memo.insert((x, y), phi.clone());
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functors::{FunctorKind, FunctorTerm};
    use crate::rel::FinSet;
    use std::collections::{BTreeMap as Map, BTreeSet};

    fn plts(states: &[&str], edges: &[(&str, &str, &str)]) -> Coalgebra {
        let labels: BTreeSet<String> = edges.iter().map(|(_, l, _)| l.to_string()).collect();
        let mut labels: Vec<String> = labels.into_iter().collect();
        if labels.is_empty() {
            labels.push("a".into());
        }
        let kind = FunctorKind::plts(FinSet::new(labels).unwrap());
        let sts = FinSet::new(states.iter().map(|s| s.to_string())).unwrap();
        let la = kind.labels().unwrap().clone();
        let mut trans = Vec::new();
        for s in states {
            let mut set = BTreeSet::new();
            for (src, l, dst) in edges {
                if src == s {
                    set.insert((la.require(l).unwrap(), sts.require(dst).unwrap()));
                }
            }
            trans.push(FunctorTerm::Plts(set));
        }
        Coalgebra::new(kind, sts, trans).unwrap()
    }

    fn dia_lam(kind: &FunctorKind, labels: &[&str]) -> LambdaRel {
        let pairs: Vec<(Lifting, Lifting)> = labels
            .iter()
            .map(|l| (Lifting::Dia(l.to_string()), Lifting::Dia(l.to_string())))
            .collect();
        LambdaRel::new(kind.clone(), kind.clone(), pairs).unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        let kind = FunctorKind::plts(FinSet::new(["a", "b"]).unwrap());
        let lam = LambdaRel::new(
            kind.clone(),
            kind.clone(),
            vec![
                (Lifting::Dia("a".into()), Lifting::Dia("a".into())),
                (Lifting::Dia("b".into()), Lifting::Box("b".into())),
            ],
        )
        .unwrap();
        for text in [
            "T",
            "F",
            "(T & F)",
            "(T | <dia(a),dia(a)>T)",
            "<dia(a), dia(a)> <dia(b),box(b)> T",
            "<dia(a),dia(a)>(T)",
        ] {
            let phi = parse_formula(text, &lam).unwrap();
            let shown = phi.to_string();
            let again = parse_formula(&shown, &lam).unwrap();
            assert_eq!(shown, again.to_string(), "round trip of {text}");
        }
        let phi = parse_formula("<dia(a), dia(a)> T", &lam).unwrap();
        assert_eq!(phi.to_string(), "<dia(a),dia(a)>T");
    }

    #[test]
    fn parse_rejects_unknown_pair_and_bad_arity() {
        let kind = FunctorKind::plts(FinSet::new(["a", "b"]).unwrap());
        let lam = dia_lam(&kind, &["a"]);
        let err = parse_formula("<dia(a),box(b)>T", &lam).unwrap_err();
        assert!(err.to_string().contains("not in the lifting relation"), "{err}");
        let err = parse_formula("<dia(a),dia(a)>(T,F)", &lam).unwrap_err();
        assert!(matches!(err, Error::Arity { .. }), "{err}");
        let err = parse_formula("(T &", &lam).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
        let err = parse_formula("T garbage", &lam).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn eval_matches_hand_computation() {
        let c = plts(&["s0", "s1", "s2"], &[("s0", "a", "s1"), ("s1", "b", "s2")]);
        let lam = dia_lam(c.kind(), &["a", "b"]);
        let phi = parse_formula("<dia(a),dia(a)><dia(b),dia(b)>T", &lam).unwrap();
        assert!(eval_formula(&phi, &c, SideTag::Left, 0).unwrap());
        assert!(!eval_formula(&phi, &c, SideTag::Right, 1).unwrap());
        let ext = formula_extension(&phi, &c, SideTag::Left).unwrap();
        assert_eq!(ext.iter().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn eval_uses_side_reading() {
        let c = plts(&["s0", "s1"], &[("s0", "a", "s1")]);
        let kind = c.kind().clone();
        let lam = LambdaRel::new(
            kind.clone(),
            kind,
            vec![(Lifting::Dia("a".into()), Lifting::Box("a".into()))],
        )
        .unwrap();
        let phi = parse_formula("<dia(a),box(a)>F", &lam).unwrap();
        // Left reading: some a-successor in the empty set — false at s0.
        assert!(!eval_formula(&phi, &c, SideTag::Left, 0).unwrap());
        // Right reading: every a-successor in the empty set — false at
        // s0 (it has a successor) but true at the deadlocked s1.
        assert!(!eval_formula(&phi, &c, SideTag::Right, 0).unwrap());
        assert!(eval_formula(&phi, &c, SideTag::Right, 1).unwrap());
    }

    #[test]
    fn distinguishing_simple_and_two_level() {
        let caps = EvalCaps::default();
        // s0 -a-> s1 versus a deadlocked t0.
        let c = plts(&["s0", "s1"], &[("s0", "a", "s1")]);
        let d = plts(&["t0"], &[]);
        let lam = dia_lam(c.kind(), &["a"]);
        let phi = distinguishing_formula(&c, &d, &lam, &caps, 0, 0)
            .unwrap()
            .expect("pair must be dissimilar");
        assert_eq!(phi.to_string(), "<dia(a),dia(a)>T");

        // Two-level recursion: s0 -a-> s1 -b-> s2 versus t0 -a-> t1.
        let c = plts(&["s0", "s1", "s2"], &[("s0", "a", "s1"), ("s1", "b", "s2")]);
        let d = plts(&["t0", "t1"], &[("t0", "a", "t1")]);
        let d = rebuild_with_alphabet(&d, &["a", "b"]);
        let lam = dia_lam(c.kind(), &["a", "b"]);
        let phi = distinguishing_formula(&c, &d, &lam, &caps, 0, 0)
            .unwrap()
            .expect("pair must be dissimilar");
        assert_eq!(phi.to_string(), "<dia(a),dia(a)><dia(b),dia(b)>T");
    }

    #[test]
    fn distinguishing_returns_none_on_similar() {
        let caps = EvalCaps::default();
        let c = plts(&["s0", "s1"], &[("s0", "a", "s1")]);
        let d = plts(&["t0", "t1", "t2"], &[("t0", "a", "t1"), ("t0", "a", "t2")]);
        let lam = dia_lam(c.kind(), &["a"]);
        assert!(distinguishing_formula(&c, &d, &lam, &caps, 0, 0)
            .unwrap()
            .is_none());
    }

    #[test]
    fn synthesized_formulas_always_verify() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let caps = EvalCaps::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..40 {
            let labels = ["a", "b"];
            let nc = rng.gen_range(1..=4usize);
            let nd = rng.gen_range(1..=4usize);
            let mut cedges = Vec::new();
            let mut dedges = Vec::new();
            let names: Vec<String> = (0..4).map(|i| format!("s{i}")).collect();
            for i in 0..nc {
                for j in 0..nc {
                    for l in labels {
                        if rng.gen_bool(0.3) {
                            cedges.push((names[i].clone(), l, names[j].clone()));
                        }
                    }
                }
            }
            for i in 0..nd {
                for j in 0..nd {
                    for l in labels {
                        if rng.gen_bool(0.3) {
                            dedges.push((names[i].clone(), l, names[j].clone()));
                        }
                    }
                }
            }
            let ce: Vec<(&str, &str, &str)> = cedges
                .iter()
                .map(|(a, l, b)| (a.as_str(), *l, b.as_str()))
                .collect();
            let de: Vec<(&str, &str, &str)> = dedges
                .iter()
                .map(|(a, l, b)| (a.as_str(), *l, b.as_str()))
                .collect();
            let cnames: Vec<&str> = names[..nc].iter().map(|s| s.as_str()).collect();
            let dnames: Vec<&str> = names[..nd].iter().map(|s| s.as_str()).collect();
            let mut call = plts(&cnames, &ce);
            let mut dall = plts(&dnames, &de);
            // Align alphabets: rebuild over the union alphabet.
            let union: BTreeSet<&str> = labels.iter().copied().collect();
            let _ = &union;
            call = rebuild_with_alphabet(&call, &labels);
            dall = rebuild_with_alphabet(&dall, &labels);
            let lam = dia_lam(call.kind(), &["a", "b"]);
            let expr = ConnectorExpr::Kant(lam.clone());
            let sim = greatest_simulation(&expr, &caps, &call, &dall).unwrap();
            for x in 0..nc as u32 {
                for y in 0..nd as u32 {
                    let out =
                        distinguishing_formula_from(&call, &dall, &lam, &caps, &sim, x, y)
                            .unwrap();
                    assert_eq!(
                        out.is_none(),
                        sim.relation.contains(x, y),
                        "case {case} pair ({x},{y})"
                    );
                }
            }
        }
    }

    fn rebuild_with_alphabet(c: &Coalgebra, labels: &[&str]) -> Coalgebra {
        let old = c.kind().labels().unwrap().clone();
        let kind = FunctorKind::plts(FinSet::new(labels.iter().map(|s| s.to_string())).unwrap());
        let new = kind.labels().unwrap().clone();
        let trans: Vec<FunctorTerm> = c
            .terms()
            .iter()
            .map(|t| match t {
                FunctorTerm::Plts(set) => FunctorTerm::Plts(
                    set.iter()
                        .map(|(l, x)| (new.require(old.name(*l)).unwrap(), *x))
                        .collect(),
                ),
                _ => unreachable!(),
            })
            .collect();
        Coalgebra::new(kind, c.states().clone(), trans).unwrap()
    }

    #[test]
    fn pos_lifting_round_trip() {
        let l = Lifting::Pos(PosSkel::Or(
            Box::new(PosSkel::Ap(
                Box::new(Lifting::Dia("a".into())),
                vec![InnerSkel::And(
                    Box::new(InnerSkel::Ph(0)),
                    Box::new(InnerSkel::Top),
                )],
            )),
            Box::new(PosSkel::Bot),
        ));
        let shown = l.to_string();
        let parsed = parse_lifting_str(&shown).unwrap();
        assert_eq!(parsed, l);
        let _ = Map::<u32, u32>::new();
    }
}
