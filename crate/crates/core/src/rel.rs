//! Finite carriers, subsets, maps and binary relations.
//!
//! Carriers are [`FinSet`]s: ordered lists of distinct interned names.
//! Relations are bit matrices keyed by the declared element order, so all
//! iteration (and therefore all output derived from it) is deterministic.
//!
//! The module also provides the couniversal factorization of a relation
//! `r : X -/-> Z` through the set of "boxes" `(A, B)` with `A x B <= r`,
//! which is what generic composition of connectors is evaluated on.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::err::{Error, Result};

/// An ordered finite set of distinct names. Cheap to clone.
#[derive(Clone)]
pub struct FinSet(Arc<FinSetInner>);

struct FinSetInner {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl FinSet {
    pub fn new<I, S>(names: I) -> Result<FinSet>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i as u32).is_some() {
                return Err(Error::DuplicateElement { element: n.clone() });
            }
        }
        Ok(FinSet(Arc::new(FinSetInner { names, index })))
    }

    /// Builds a set named `prefix0..prefix{n-1}`.
    pub fn numbered(prefix: &str, n: usize) -> FinSet {
        FinSet::new((0..n).map(|i| format!("{prefix}{i}"))).expect("numbered names are distinct")
    }

    pub fn empty() -> FinSet {
        FinSet::new(Vec::<String>::new()).expect("empty")
    }

    pub fn size(&self) -> usize {
        self.0.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.names.is_empty()
    }

    pub fn name(&self, i: u32) -> &str {
        &self.0.names[i as usize]
    }

    pub fn index_of(&self, name: &str) -> Option<u32> {
        self.0.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<u32> {
        self.index_of(name).ok_or_else(|| Error::StrayElement {
            element: name.to_string(),
            carrier: self.to_string(),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn indices(&self) -> impl Iterator<Item = u32> {
        0..self.size() as u32
    }

    /// Pointer-equality fast path, then name-sequence equality.
    pub fn same(&self, other: &FinSet) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.names == other.0.names
    }

    /// The union of two carriers: `self`'s names followed by the names of
    /// `other` not already present.
    pub fn union(&self, other: &FinSet) -> FinSet {
        let mut names = self.0.names.clone();
        for n in other.names() {
            if self.index_of(n).is_none() {
                names.push(n.clone());
            }
        }
        FinSet::new(names).expect("union preserves distinctness")
    }
}

impl PartialEq for FinSet {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}
impl Eq for FinSet {}

impl Hash for FinSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.names.hash(state);
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.names.join(","))
    }
}

impl fmt::Debug for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinSet{self}")
    }
}

fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// A subset of a [`FinSet`], stored as a bit vector.
#[derive(Clone, PartialEq, Eq)]
pub struct Subset {
    universe: FinSet,
    words: Vec<u64>,
}

impl Subset {
    pub fn empty(universe: &FinSet) -> Subset {
        Subset {
            universe: universe.clone(),
            words: vec![0; words_for(universe.size())],
        }
    }

    pub fn full(universe: &FinSet) -> Subset {
        let mut s = Subset::empty(universe);
        for i in universe.indices() {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(universe: &FinSet, idx: impl IntoIterator<Item = u32>) -> Subset {
        let mut s = Subset::empty(universe);
        for i in idx {
            s.insert(i);
        }
        s
    }

    pub fn from_names<'a>(
        universe: &FinSet,
        names: impl IntoIterator<Item = &'a str>,
    ) -> Result<Subset> {
        let mut s = Subset::empty(universe);
        for n in names {
            s.insert(universe.require(n)?);
        }
        Ok(s)
    }

    /// Builds the subset from a bit mask over the first 64 elements.
    pub fn from_mask(universe: &FinSet, mask: u64) -> Subset {
        debug_assert!(universe.size() <= 64);
        let mut s = Subset::empty(universe);
        if !s.words.is_empty() {
            s.words[0] = mask;
        }
        s
    }

    pub fn universe(&self) -> &FinSet {
        &self.universe
    }

    pub fn insert(&mut self, i: u32) {
        debug_assert!((i as usize) < self.universe.size());
        self.words[i as usize / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: u32) -> bool {
        (self.words[i as usize / 64] >> (i % 64)) & 1 == 1
    }

    pub fn card(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        let n = self.universe.size() as u32;
        (0..n).filter(move |i| self.contains(*i))
    }

    pub fn union_with(&mut self, other: &Subset) {
        debug_assert!(self.universe.same(&other.universe));
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn inter_with(&mut self, other: &Subset) {
        debug_assert!(self.universe.same(&other.universe));
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn complement(&self) -> Subset {
        let mut out = Subset::empty(&self.universe);
        for i in self.universe.indices() {
            if !self.contains(i) {
                out.insert(i);
            }
        }
        out
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        debug_assert!(self.universe.same(&other.universe));
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Deterministic name like `{x0,x2}`.
    pub fn label(&self) -> String {
        let names: Vec<&str> = self.iter().map(|i| self.universe.name(i)).collect();
        format!("{{{}}}", names.join(","))
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// A total map between carriers, `src -> dst`.
#[derive(Clone, PartialEq, Eq)]
pub struct Map {
    src: FinSet,
    dst: FinSet,
    img: Vec<u32>,
}

impl Map {
    pub fn new(src: &FinSet, dst: &FinSet, img: Vec<u32>) -> Result<Map> {
        if img.len() != src.size() {
            return Err(Error::NotTotal {
                element: src
                    .names()
                    .get(img.len())
                    .cloned()
                    .unwrap_or_else(|| "<extra image>".to_string()),
            });
        }
        for (i, j) in img.iter().enumerate() {
            if *j as usize >= dst.size() {
                return Err(Error::StrayElement {
                    element: format!("{}(image of {})", j, src.name(i as u32)),
                    carrier: dst.to_string(),
                });
            }
        }
        Ok(Map {
            src: src.clone(),
            dst: dst.clone(),
            img,
        })
    }

    pub fn from_pairs(src: &FinSet, dst: &FinSet, pairs: &[(&str, &str)]) -> Result<Map> {
        let mut img = vec![u32::MAX; src.size()];
        for (a, b) in pairs {
            let i = src.require(a)?;
            let j = dst.require(b)?;
            img[i as usize] = j;
        }
        if let Some(i) = img.iter().position(|j| *j == u32::MAX) {
            return Err(Error::NotTotal {
                element: src.name(i as u32).to_string(),
            });
        }
        Map::new(src, dst, img)
    }

    pub fn identity(set: &FinSet) -> Map {
        Map {
            src: set.clone(),
            dst: set.clone(),
            img: set.indices().collect(),
        }
    }

    pub fn src(&self) -> &FinSet {
        &self.src
    }

    pub fn dst(&self) -> &FinSet {
        &self.dst
    }

    pub fn apply(&self, i: u32) -> u32 {
        self.img[i as usize]
    }

    pub fn graph(&self) -> Rel {
        let mut r = Rel::empty(&self.src, &self.dst);
        for i in self.src.indices() {
            r.insert(i, self.apply(i));
        }
        r
    }
}

impl fmt::Debug for Map {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self
            .src
            .indices()
            .map(|i| format!("{}->{}", self.src.name(i), self.dst.name(self.apply(i))))
            .collect();
        write!(f, "Map[{}]", pairs.join(","))
    }
}

/// A binary relation `src -/-> dst` as a row-major bit matrix.
#[derive(Clone)]
pub struct Rel {
    src: FinSet,
    dst: FinSet,
    stride: usize,
    words: Vec<u64>,
}

impl Rel {
    pub fn empty(src: &FinSet, dst: &FinSet) -> Rel {
        let stride = words_for(dst.size());
        Rel {
            src: src.clone(),
            dst: dst.clone(),
            stride,
            words: vec![0; stride * src.size()],
        }
    }

    pub fn full(src: &FinSet, dst: &FinSet) -> Rel {
        let mut r = Rel::empty(src, dst);
        for i in src.indices() {
            for j in dst.indices() {
                r.insert(i, j);
            }
        }
        r
    }

    pub fn diagonal(set: &FinSet) -> Rel {
        let mut r = Rel::empty(set, set);
        for i in set.indices() {
            r.insert(i, i);
        }
        r
    }

    pub fn from_pairs(src: &FinSet, dst: &FinSet, pairs: &[(&str, &str)]) -> Result<Rel> {
        let mut r = Rel::empty(src, dst);
        for (a, b) in pairs {
            r.insert(src.require(a)?, dst.require(b)?);
        }
        Ok(r)
    }

    /// Builds the relation whose rows are given by a bit mask over `dst`
    /// (usable while `dst` has at most 64 elements).
    pub fn from_row_masks(src: &FinSet, dst: &FinSet, rows: &[u64]) -> Rel {
        debug_assert!(dst.size() <= 64 && rows.len() == src.size());
        let mut r = Rel::empty(src, dst);
        for (i, m) in rows.iter().enumerate() {
            if r.stride > 0 {
                r.words[i * r.stride] = *m;
            }
        }
        r
    }

    pub fn src(&self) -> &FinSet {
        &self.src
    }

    pub fn dst(&self) -> &FinSet {
        &self.dst
    }

    pub fn insert(&mut self, i: u32, j: u32) {
        debug_assert!((i as usize) < self.src.size() && (j as usize) < self.dst.size());
        self.words[i as usize * self.stride + j as usize / 64] |= 1 << (j % 64);
    }

    pub fn remove(&mut self, i: u32, j: u32) {
        self.words[i as usize * self.stride + j as usize / 64] &= !(1 << (j % 64));
    }

    pub fn contains(&self, i: u32, j: u32) -> bool {
        (self.words[i as usize * self.stride + j as usize / 64] >> (j % 64)) & 1 == 1
    }

    pub fn card(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty_rel(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// All pairs in declared order (row-major).
    pub fn pairs(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for i in self.src.indices() {
            for j in self.dst.indices() {
                if self.contains(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    fn row_words(&self, i: u32) -> &[u64] {
        &self.words[i as usize * self.stride..(i as usize + 1) * self.stride]
    }

    /// The row of `i` as a subset of `dst` (the relational image of `{i}`).
    pub fn row(&self, i: u32) -> Subset {
        Subset {
            universe: self.dst.clone(),
            words: self.row_words(i).to_vec(),
        }
    }

    /// `s . r` in applicative order: first `self : X -/-> Y`, then
    /// `other : Y -/-> Z`, giving `X -/-> Z`.
    pub fn then(&self, other: &Rel) -> Result<Rel> {
        if !self.dst.same(&other.src) {
            return Err(Error::CarrierMismatch {
                context: "relation composition".into(),
                expected: self.dst.to_string(),
                got: other.src.to_string(),
            });
        }
        let mut out = Rel::empty(&self.src, &other.dst);
        for i in self.src.indices() {
            for j in self.dst.indices() {
                if self.contains(i, j) {
                    let (lo, hi) = (
                        i as usize * out.stride,
                        (i as usize + 1) * out.stride,
                    );
                    for (w, v) in out.words[lo..hi].iter_mut().zip(other.row_words(j)) {
                        *w |= v;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn converse(&self) -> Rel {
        let mut out = Rel::empty(&self.dst, &self.src);
        for (i, j) in self.pairs() {
            out.insert(j, i);
        }
        out
    }

    pub fn meet(&self, other: &Rel) -> Result<Rel> {
        self.check_same_type(other, "relation meet")?;
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
        Ok(out)
    }

    pub fn join(&self, other: &Rel) -> Result<Rel> {
        self.check_same_type(other, "relation join")?;
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        Ok(out)
    }

    pub fn is_subset(&self, other: &Rel) -> Result<bool> {
        self.check_same_type(other, "relation inclusion")?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0))
    }

    fn check_same_type(&self, other: &Rel, context: &str) -> Result<()> {
        if !self.src.same(&other.src) || !self.dst.same(&other.dst) {
            return Err(Error::CarrierMismatch {
                context: context.into(),
                expected: format!("{} -/-> {}", self.src, self.dst),
                got: format!("{} -/-> {}", other.src, other.dst),
            });
        }
        Ok(())
    }

    /// Relational image `r[A]` of a subset of the source.
    pub fn image(&self, a: &Subset) -> Result<Subset> {
        if !a.universe().same(&self.src) {
            return Err(Error::StrayElement {
                element: a.label(),
                carrier: self.src.to_string(),
            });
        }
        let mut out = Subset::empty(&self.dst);
        for i in a.iter() {
            for (w, v) in out.words.iter_mut().zip(self.row_words(i)) {
                *w |= v;
            }
        }
        Ok(out)
    }

    /// Preimage `r~[B] = converse image`.
    pub fn preimage(&self, b: &Subset) -> Result<Subset> {
        if !b.universe().same(&self.dst) {
            return Err(Error::StrayElement {
                element: b.label(),
                carrier: self.dst.to_string(),
            });
        }
        let mut out = Subset::empty(&self.src);
        for i in self.src.indices() {
            let mut hit = false;
            for j in b.iter() {
                if self.contains(i, j) {
                    hit = true;
                    break;
                }
            }
            if hit {
                out.insert(i);
            }
        }
        Ok(out)
    }

    pub fn is_left_total(&self) -> bool {
        self.src.indices().all(|i| !self.row(i).is_empty())
    }

    pub fn is_right_total(&self) -> bool {
        let conv = self.converse();
        conv.is_left_total()
    }

    /// Restricts the relation to sub-carriers, producing fresh `FinSet`s
    /// that keep the original names and order.
    pub fn restrict(&self, keep_src: &Subset, keep_dst: &Subset) -> (FinSet, FinSet, Rel) {
        let src_names: Vec<&str> = keep_src.iter().map(|i| self.src.name(i)).collect();
        let dst_names: Vec<&str> = keep_dst.iter().map(|j| self.dst.name(j)).collect();
        let new_src = FinSet::new(src_names).expect("restriction keeps distinct names");
        let new_dst = FinSet::new(dst_names).expect("restriction keeps distinct names");
        let mut out = Rel::empty(&new_src, &new_dst);
        for (ni, oi) in keep_src.iter().enumerate() {
            for (nj, oj) in keep_dst.iter().enumerate() {
                if self.contains(oi, oj) {
                    out.insert(ni as u32, nj as u32);
                }
            }
        }
        (new_src, new_dst, out)
    }

    /// Lists pairs as name tuples, sorted lexicographically by name.
    pub fn named_pairs(&self) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = self
            .pairs()
            .into_iter()
            .map(|(i, j)| (self.src.name(i).to_string(), self.dst.name(j).to_string()))
            .collect();
        v.sort();
        v
    }
}

impl PartialEq for Rel {
    fn eq(&self, other: &Self) -> bool {
        self.src.same(&other.src) && self.dst.same(&other.dst) && self.words == other.words
    }
}
impl Eq for Rel {}

impl Hash for Rel {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.src.hash(state);
        self.dst.hash(state);
        self.words.hash(state);
    }
}

impl fmt::Debug for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self
            .named_pairs()
            .into_iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect();
        write!(f, "Rel{{{}}}", pairs.join(","))
    }
}

/// The couniversal factorization of `r : X -/-> Z`.
///
/// The middle carrier is the set of boxes `(A, B)` with `A x B <= r`;
/// `t` relates `x` to every box whose left side contains `x`, and `s`
/// relates a box to every element of its right side. Recomposing gives
/// back exactly `r`, and every other factorization maps into this one.
pub struct Couniv {
    pub mid: FinSet,
    pub t: Rel,
    pub s: Rel,
    /// For each mid element, the box as (left indices, right indices).
    pub boxes: Vec<(Vec<u32>, Vec<u32>)>,
    /// Set when the middle carrier exceeded the warning bound.
    pub oversized: bool,
}

pub const COUNIV_WARN_BOUND: usize = 1 << 16;

pub fn couniv_factorize(r: &Rel) -> Couniv {
    couniv_factorize_bounded(r, COUNIV_WARN_BOUND)
}

pub fn couniv_factorize_bounded(r: &Rel, warn_bound: usize) -> Couniv {
    let nx = r.src().size();
    let nz = r.dst().size();
    assert!(nx <= 20 && nz <= 20, "couniv factorization carriers must stay tiny");
    let mut boxes: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for am in 0..(1u64 << nx) {
        let a = Subset::from_mask(r.src(), am);
        for bm in 0..(1u64 << nz) {
            let b = Subset::from_mask(r.dst(), bm);
            if box_in(r, &a, &b) {
                names.push(format!("{}*{}", a.label(), b.label()));
                boxes.push((a.iter().collect(), b.iter().collect()));
            }
        }
    }
    let mid = FinSet::new(names).expect("box labels are distinct");
    let oversized = mid.size() > warn_bound;
    let mut t = Rel::empty(r.src(), &mid);
    let mut s = Rel::empty(&mid, r.dst());
    for (w, (a, b)) in boxes.iter().enumerate() {
        for x in a {
            t.insert(*x, w as u32);
        }
        for z in b {
            s.insert(w as u32, *z);
        }
    }
    Couniv {
        mid,
        t,
        s,
        boxes,
        oversized,
    }
}

fn box_in(r: &Rel, a: &Subset, b: &Subset) -> bool {
    a.iter().all(|x| b.iter().all(|z| r.contains(x, z)))
}

/// The maximal boxes of `r` (boxes not contained in any larger box).
///
/// Every box extends to a maximal one, so searches over middle carriers
/// may restrict themselves to subsets of this antichain.
pub fn max_boxes(r: &Rel) -> Vec<(Subset, Subset)> {
    let nx = r.src().size();
    assert!(nx <= 20, "maximal-box enumeration needs a tiny left carrier");
    let mut seen: Vec<(Subset, Subset)> = Vec::new();
    for am in 0..(1u64 << nx) {
        let a = Subset::from_mask(r.src(), am);
        // B(A): largest right side compatible with A.
        let mut b = Subset::full(r.dst());
        for x in a.iter() {
            b.inter_with(&r.row(x));
        }
        // A(B(A)): extent closure.
        let mut a2 = Subset::full(r.src());
        for z in b.iter() {
            let mut col = Subset::empty(r.src());
            for x in r.src().indices() {
                if r.contains(x, z) {
                    col.insert(x);
                }
            }
            a2.inter_with(&col);
        }
        if !seen.iter().any(|(pa, pb)| *pa == a2 && *pb == b) {
            seen.push((a2, b));
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> FinSet {
        FinSet::new(names.iter().copied()).unwrap()
    }

    #[test]
    fn finset_rejects_duplicates() {
        assert!(matches!(
            FinSet::new(["a", "a"]),
            Err(Error::DuplicateElement { .. })
        ));
    }

    #[test]
    fn compose_and_converse() {
        let x = set(&["x0", "x1"]);
        let y = set(&["y0", "y1"]);
        let z = set(&["z0"]);
        let r = Rel::from_pairs(&x, &y, &[("x0", "y0"), ("x1", "y1")]).unwrap();
        let s = Rel::from_pairs(&y, &z, &[("y1", "z0")]).unwrap();
        let c = r.then(&s).unwrap();
        assert_eq!(c.named_pairs(), vec![("x1".to_string(), "z0".to_string())]);
        let cc = c.converse().converse();
        assert_eq!(cc, c);
    }

    #[test]
    fn graph_laws() {
        let x = set(&["a", "b", "c"]);
        let y = set(&["u", "v"]);
        let f = Map::from_pairs(&x, &y, &[("a", "u"), ("b", "u"), ("c", "v")]).unwrap();
        let g = f.graph();
        let gf = g.converse().then(&g).unwrap(); // f . f~ over y? careful with order
        // totality: diag_X <= f~ . f  (first f, then f converse)
        let tot = g.then(&g.converse()).unwrap();
        assert!(Rel::diagonal(&x).is_subset(&tot).unwrap());
        // univalence: f~ ; f <= diag_Y
        assert!(gf.is_subset(&Rel::diagonal(&y)).unwrap());
    }

    // Frozen expected middle sizes for the couniversal factorization,
    // computed by hand from the definition before the implementation:
    //   empty r over {x} x {z}: boxes are ({},{}), ({x},{}), ({},{z})  -> 3
    //   r = {(x,z)} over 1x1:   all four boxes                          -> 4
    //   full r over 2x1:        all subsets pair up                     -> 8
    #[test]
    fn couniv_middle_sizes_frozen() {
        let x1 = set(&["x"]);
        let z1 = set(&["z"]);
        let r_empty = Rel::empty(&x1, &z1);
        assert_eq!(couniv_factorize(&r_empty).mid.size(), 3);

        let r_one = Rel::from_pairs(&x1, &z1, &[("x", "z")]).unwrap();
        assert_eq!(couniv_factorize(&r_one).mid.size(), 4);

        let x2 = set(&["x0", "x1"]);
        let r_full = Rel::full(&x2, &z1);
        assert_eq!(couniv_factorize(&r_full).mid.size(), 8);
    }

    #[test]
    fn couniv_recomposes() {
        let x = set(&["x0", "x1", "x2"]);
        let z = set(&["z0", "z1"]);
        for seedbits in 0..64u64 {
            let mut r = Rel::empty(&x, &z);
            for i in 0..3u32 {
                for j in 0..2u32 {
                    if (seedbits >> (i * 2 + j)) & 1 == 1 {
                        r.insert(i, j);
                    }
                }
            }
            let c = couniv_factorize(&r);
            let back = c.t.then(&c.s).unwrap();
            assert_eq!(back, r);
        }
    }

    #[test]
    fn couniv_decomposition_map() {
        // any factorization r = s'.t' maps into the couniversal one via
        // f(y) = (t'~[{y}], s'[{y}])
        let x = set(&["x0", "x1"]);
        let y = set(&["m0", "m1"]);
        let z = set(&["z0", "z1"]);
        let t1 = Rel::from_pairs(&x, &y, &[("x0", "m0"), ("x1", "m1")]).unwrap();
        let s1 = Rel::from_pairs(&y, &z, &[("m0", "z0"), ("m1", "z1"), ("m1", "z0")]).unwrap();
        let r = t1.then(&s1).unwrap();
        let c = couniv_factorize(&r);
        // build f
        let mut img = Vec::new();
        for m in y.indices() {
            let pre: Vec<u32> = x.indices().filter(|i| t1.contains(*i, m)).collect();
            let post: Vec<u32> = z.indices().filter(|j| s1.contains(m, *j)).collect();
            let w = c
                .boxes
                .iter()
                .position(|(a, b)| *a == pre && *b == post)
                .expect("image box exists in the couniversal middle");
            img.push(w as u32);
        }
        let f = Map::new(&y, &c.mid, img).unwrap();
        // s' = s . f  and  t' = f~ . t  (in applicative order)
        let fg = f.graph();
        let s_back = fg.then(&c.s).unwrap();
        assert_eq!(s_back, s1);
        let t_back = c.t.then(&fg.converse()).unwrap();
        assert_eq!(t_back, t1);
    }

    #[test]
    fn max_boxes_are_boxes_and_maximal() {
        let x = set(&["x0", "x1", "x2"]);
        let z = set(&["z0", "z1"]);
        let r = Rel::from_pairs(&x, &z, &[("x0", "z0"), ("x1", "z0"), ("x1", "z1")]).unwrap();
        let boxes = max_boxes(&r);
        for (a, b) in &boxes {
            assert!(box_in(&r, a, b));
        }
        // every box embeds in some maximal one
        for am in 0..8u64 {
            for bm in 0..4u64 {
                let a = Subset::from_mask(&x, am);
                let b = Subset::from_mask(&z, bm);
                if box_in(&r, &a, &b) {
                    assert!(
                        boxes
                            .iter()
                            .any(|(ma, mb)| a.is_subset_of(ma) && b.is_subset_of(mb)),
                        "box ({:?},{:?}) has no maximal extension",
                        a,
                        b
                    );
                }
            }
        }
    }
}
