//! Brute-force reference implementations.
//!
//! Everything in this module recomputes results by exhaustive search or by
//! an unrelated algorithm, so the optimized code paths elsewhere can be
//! tested against it. Nothing here is clever; the point is that each
//! function is short enough to audit by eye.

use std::collections::BTreeSet;

use num_integer::Integer;

use crate::err::{Error, Result};
use crate::functors::{enumerate_terms, fmap, support, EnumCfg, FunctorKind, FunctorTerm};
use crate::liftings::{eval_lifting, LambdaRel};
use crate::rel::{max_boxes, FinSet, Rel, Subset};
use crate::Coalgebra;

/// Denominator needed to enumerate middle/coupling terms that can witness
/// anything involving `t`: 1 for non-probabilistic terms.
pub fn term_denominator(t: &FunctorTerm) -> i64 {
    match t {
        FunctorTerm::Dlts(map) => map
            .values()
            .fold(1i64, |acc, w| acc.lcm(w.denom())),
        FunctorTerm::Pair(a, b) => term_denominator(a).lcm(&term_denominator(b)),
        _ => 1,
    }
}

/// Restricts `r`, `a`, `c` to the supports of the two terms, renumbering
/// carriers. Sound for any monotone natural operation by naturality along
/// the support inclusions.
pub fn restrict_to_supports(
    r: &Rel,
    a: &FunctorTerm,
    c: &FunctorTerm,
) -> Result<(FinSet, FinSet, Rel, FunctorTerm, FunctorTerm)> {
    let sa = support(a);
    let sc = support(c);
    let keep_src = Subset::from_indices(r.src(), sa.iter().copied());
    let keep_dst = Subset::from_indices(r.dst(), sc.iter().copied());
    let (x0, z0, r0) = r.restrict(&keep_src, &keep_dst);
    let amap: std::collections::BTreeMap<u32, u32> = sa
        .iter()
        .enumerate()
        .map(|(new, old)| (*old, new as u32))
        .collect();
    let cmap: std::collections::BTreeMap<u32, u32> = sc
        .iter()
        .enumerate()
        .map(|(new, old)| (*old, new as u32))
        .collect();
    let a0 = fmap(a, &amap)?;
    let c0 = fmap(c, &cmap)?;
    Ok((x0, z0, r0, a0, c0))
}

// ---------------------------------------------------------------------
// Barr lifting by enumeration
// ---------------------------------------------------------------------

/// All pairs `(Fp1(w), Fp2(w))` for terms `w` over the pairs of `r`: the
/// relation lifting of `r` as an explicit set.
pub fn barr_set(
    kind: &FunctorKind,
    r: &Rel,
    cfg: &EnumCfg,
) -> Result<BTreeSet<(FunctorTerm, FunctorTerm)>> {
    let pairs = r.pairs();
    if let FunctorKind::Plts { labels } = kind {
        let la = labels.size();
        let nx = r.src().size();
        let nz = r.dst().size();
        if la * (nx + nz) <= 24 {
            return Ok(barr_set_plts_fast(la, nx, nz, &pairs));
        }
    }
    let n = pairs.len();
    let cnt = kind
        .term_count(n, cfg.dlts_denominator)
        .ok_or_else(|| Error::Intractable("term count overflow in barr_set".into()))?;
    if cnt > cfg.cap {
        return Err(Error::CapExceeded {
            what: "barr_set terms over relation pairs".into(),
            needs: cnt,
            cap: cfg.cap,
        });
    }
    let carrier_kind = kind.clone();
    let terms = enumerate_terms(&carrier_kind, n, cfg)?;
    let p1: Vec<u32> = pairs.iter().map(|(x, _)| *x).collect();
    let p2: Vec<u32> = pairs.iter().map(|(_, z)| *z).collect();
    let mut out = BTreeSet::new();
    for w in terms {
        let a = crate::functors::fmap_vec(&w, &p1)?;
        let b = crate::functors::fmap_vec(&w, &p2)?;
        out.insert((a, b));
    }
    Ok(out)
}

/// PLTS terms are unions of singletons and `fmap` preserves unions, so
/// the image set is the OR-closure of the single-pair images.
fn barr_set_plts_fast(
    la: usize,
    nx: usize,
    nz: usize,
    pairs: &[(u32, u32)],
) -> BTreeSet<(FunctorTerm, FunctorTerm)> {
    let mut atoms: Vec<(u64, u64)> = Vec::new();
    for l in 0..la {
        for (x, z) in pairs {
            atoms.push((
                1u64 << (l * nx + *x as usize),
                1u64 << (l * nz + *z as usize),
            ));
        }
    }
    let mut seen = vec![false; 1usize << (la * (nx + nz))];
    let key = |u: u64, v: u64| ((u as usize) << (la * nz)) | v as usize;
    let mut queue = vec![(0u64, 0u64)];
    seen[0] = true;
    let mut reached: Vec<(u64, u64)> = vec![(0, 0)];
    while let Some((u, v)) = queue.pop() {
        for (du, dv) in &atoms {
            let (nu, nv) = (u | du, v | dv);
            let k = key(nu, nv);
            if !seen[k] {
                seen[k] = true;
                queue.push((nu, nv));
                reached.push((nu, nv));
            }
        }
    }
    let unmask = |m: u64, n: usize| {
        let mut s = BTreeSet::new();
        for l in 0..la {
            for x in 0..n {
                if m & (1u64 << (l * n + x)) != 0 {
                    s.insert((l as u32, x as u32));
                }
            }
        }
        FunctorTerm::Plts(s)
    };
    reached
        .into_iter()
        .map(|(u, v)| (unmask(u, nx), unmask(v, nz)))
        .collect()
}

/// Point query for the relation lifting: is `(a, c)` in the Barr
/// extension of `r`? Enumerates witnesses over the support-restricted
/// pair carrier with early exit.
pub fn brute_barr(
    kind: &FunctorKind,
    r: &Rel,
    a: &FunctorTerm,
    c: &FunctorTerm,
    cfg: &EnumCfg,
) -> Result<bool> {
    let (_, _, r0, a0, c0) = restrict_to_supports(r, a, c)?;
    let pairs = r0.pairs();
    let n = pairs.len();
    let denom = term_denominator(&a0)
        .lcm(&term_denominator(&c0))
        .max(cfg.dlts_denominator as i64) as u32;
    let cnt = kind
        .term_count(n, denom)
        .ok_or_else(|| Error::Intractable("term count overflow in brute_barr".into()))?;
    if cnt > cfg.cap {
        return Err(Error::CapExceeded {
            what: "brute_barr witness terms".into(),
            needs: cnt,
            cap: cfg.cap,
        });
    }
    let wcfg = EnumCfg {
        cap: cfg.cap,
        dlts_denominator: denom,
    };
    let p1: Vec<u32> = pairs.iter().map(|(x, _)| *x).collect();
    let p2: Vec<u32> = pairs.iter().map(|(_, z)| *z).collect();
    for w in enumerate_terms(kind, n, &wcfg)? {
        if crate::functors::fmap_vec(&w, &p1)? == a0
            && crate::functors::fmap_vec(&w, &p2)? == c0
        {
            return Ok(true);
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------------
// Composition by search over factorizations
// ---------------------------------------------------------------------

/// A pointwise connector evaluator: `holds(r, a, b)` decides `a L(r) b`.
pub type PairEval<'a> = dyn Fn(&Rel, &FunctorTerm, &FunctorTerm) -> Result<bool> + 'a;

/// Brute-force evaluation of a composite connector. `inner` is applied
/// first (source to middle), `outer` second (middle to target).
pub struct ComposeBrute<'a> {
    pub inner: &'a PairEval<'a>,
    pub outer: &'a PairEval<'a>,
    pub mid_kind: FunctorKind,
    pub cap: u128,
}

impl<'a> ComposeBrute<'a> {
    fn mid_factorization(&self, r0: &Rel) -> (FinSet, Rel, Rel) {
        let boxes = max_boxes(r0);
        let mid = FinSet::numbered("w", boxes.len());
        let mut t0 = Rel::empty(r0.src(), &mid);
        let mut s0 = Rel::empty(&mid, r0.dst());
        for (w, (ax, bz)) in boxes.iter().enumerate() {
            for x in ax.iter() {
                t0.insert(x, w as u32);
            }
            for z in bz.iter() {
                s0.insert(w as u32, z);
            }
        }
        (mid, t0, s0)
    }

    fn mid_terms(&self, mid_size: usize, denom: u32) -> Result<Vec<FunctorTerm>> {
        let cnt = self
            .mid_kind
            .term_count(mid_size, denom)
            .ok_or_else(|| Error::Intractable("middle term count overflow".into()))?;
        if cnt > self.cap {
            return Err(Error::CapExceeded {
                what: format!(
                    "enumerating composition middle terms over a {mid_size}-cell carrier"
                ),
                needs: cnt,
                cap: self.cap,
            });
        }
        enumerate_terms(
            &self.mid_kind,
            mid_size,
            &EnumCfg {
                cap: self.cap,
                dlts_denominator: denom,
            },
        )
    }

    /// Evaluates the composite at one pair. The join over all
    /// factorizations of `r` is reached at the factorization through the
    /// maximal boxes of the support-restricted relation: any middle
    /// witness transports there along a box-enlarging map by naturality.
    pub fn compose_couniv(&self, r: &Rel, a: &FunctorTerm, c: &FunctorTerm) -> Result<bool> {
        let (_, _, r0, a0, c0) = restrict_to_supports(r, a, c)?;
        let (mid, t0, s0) = self.mid_factorization(&r0);
        let denom = term_denominator(&a0).lcm(&term_denominator(&c0)) as u32;
        for b in self.mid_terms(mid.size(), denom)? {
            if (self.inner)(&t0, &a0, &b)? && (self.outer)(&s0, &b, &c0)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Evaluates the composite on many term pairs at once: entry `[i][j]`
    /// says whether `(gammas[i], deltas[j])` is in the composite over
    /// `r`. Shares the middle-term scan across all pairs. The terms live
    /// over `r`'s carriers but are otherwise arbitrary.
    pub fn compose_matrix(
        &self,
        r: &Rel,
        gammas: &[FunctorTerm],
        deltas: &[FunctorTerm],
    ) -> Result<Vec<Vec<bool>>> {
        let (mid, t0, s0) = self.mid_factorization(r);
        let denom = gammas
            .iter()
            .chain(deltas)
            .fold(1i64, |acc, t| acc.lcm(&term_denominator(t))) as u32;
        let mut out = vec![vec![false; deltas.len()]; gammas.len()];
        let mut remaining = gammas.len() * deltas.len();
        for b in self.mid_terms(mid.size(), denom)? {
            let mut s_ok: Vec<usize> = Vec::new();
            for (i, g) in gammas.iter().enumerate() {
                if (self.inner)(&t0, g, &b)? {
                    s_ok.push(i);
                }
            }
            if s_ok.is_empty() {
                continue;
            }
            let mut t_ok: Vec<usize> = Vec::new();
            for (j, d) in deltas.iter().enumerate() {
                if (self.outer)(&s0, &b, d)? {
                    t_ok.push(j);
                }
            }
            for i in &s_ok {
                for j in &t_ok {
                    if !out[*i][*j] {
                        out[*i][*j] = true;
                        remaining -= 1;
                    }
                }
            }
            if remaining == 0 {
                break;
            }
        }
        Ok(out)
    }

    /// Test-mode join over every factorization `r = s . t` through an
    /// anonymous middle carrier of size at most `max_mid`. Exponential;
    /// only for cross-checking `compose_couniv` at tiny carriers.
    pub fn compose_join_bounded(
        &self,
        r: &Rel,
        a: &FunctorTerm,
        c: &FunctorTerm,
        max_mid: usize,
    ) -> Result<bool> {
        let (x0, z0, r0, a0, c0) = restrict_to_supports(r, a, c)?;
        let denom = term_denominator(&a0).lcm(&term_denominator(&c0)) as u32;
        let nx = x0.size();
        let nz = z0.size();
        for k in 0..=max_mid {
            if (nx + nz) * k > 24 {
                return Err(Error::CapExceeded {
                    what: "bounded factorization search".into(),
                    needs: 1u128 << ((nx + nz) * k),
                    cap: 1 << 24,
                });
            }
            let y = FinSet::numbered("y", k);
            let mids = self.mid_terms(k, denom)?;
            for tmask in 0u64..(1u64 << (nx * k)) {
                let mut t = Rel::empty(&x0, &y);
                for x in 0..nx {
                    for yy in 0..k {
                        if tmask & (1 << (x * k + yy)) != 0 {
                            t.insert(x as u32, yy as u32);
                        }
                    }
                }
                's: for smask in 0u64..(1u64 << (k * nz)) {
                    let mut s = Rel::empty(&y, &z0);
                    for yy in 0..k {
                        for z in 0..nz {
                            if smask & (1 << (yy * nz + z)) != 0 {
                                s.insert(yy as u32, z as u32);
                            }
                        }
                    }
                    // skip middles that are a permutation of an
                    // already-seen factorization
                    for yy in 1..k {
                        let prev = (col_mask(&t, yy as u32 - 1), s.row(yy as u32 - 1));
                        let cur = (col_mask(&t, yy as u32), s.row(yy as u32));
                        if (prev.0, prev.1.iter().collect::<Vec<_>>())
                            > (cur.0, cur.1.iter().collect::<Vec<_>>())
                        {
                            continue 's;
                        }
                    }
                    if t.then(&s)? != r0 {
                        continue;
                    }
                    for b in &mids {
                        if (self.inner)(&t, &a0, b)? && (self.outer)(&s, b, &c0)? {
                            return Ok(true);
                        }
                    }
                }
            }
        }
        Ok(false)
    }
}

fn col_mask(t: &Rel, y: u32) -> u64 {
    let mut m = 0u64;
    for x in 0..t.src().size() as u32 {
        if t.contains(x, y) {
            m |= 1 << x;
        }
    }
    m
}

// ---------------------------------------------------------------------
// Formula enumeration
// ---------------------------------------------------------------------

/// The dual-purpose modal theory of a pair of systems: every
/// semantically distinct formula over the lifting relation, recorded as
/// its pair of extensions (left side read with the first lifting of each
/// pair, right side with the second).
pub struct FormulaTheory {
    /// Cumulative key sets by modal depth.
    pub by_depth: Vec<BTreeSet<(u64, u64)>>,
    /// x preorder y iff every formula true at x (left reading) is true
    /// at y (right reading).
    pub preorder: Rel,
    pub stabilized: bool,
}

pub fn formula_enum_theory(
    lam: &LambdaRel,
    sc: &Coalgebra,
    sd: &Coalgebra,
    max_depth: Option<usize>,
    key_cap: usize,
) -> Result<FormulaTheory> {
    let nc = sc.states().size();
    let nd = sd.states().size();
    if nc > 64 || nd > 64 {
        return Err(Error::Intractable(
            "formula enumeration supports at most 64 states per side".into(),
        ));
    }
    if sc.kind() != lam.src_kind() || sd.kind() != lam.dst_kind() {
        return Err(Error::KindMismatch {
            context: "formula enumeration".into(),
            expected: format!("{} / {}", lam.src_kind(), lam.dst_kind()),
            got: format!("{} / {}", sc.kind(), sd.kind()),
        });
    }
    let full = |n: usize| {
        if n == 64 {
            u64::MAX
        } else {
            (1u64 << n) - 1
        }
    };
    let depth_limit = max_depth.unwrap_or(nc * nd + 1);
    let mut keys: BTreeSet<(u64, u64)> = BTreeSet::new();
    keys.insert((full(nc), full(nd)));
    keys.insert((0, 0));
    bool_close(&mut keys, key_cap)?;
    let mut by_depth = vec![keys.clone()];
    let mut stabilized = false;
    for _ in 0..depth_limit {
        let prev = keys.clone();
        let mut new_keys: Vec<(u64, u64)> = Vec::new();
        for (laml, mu) in lam.pairs() {
            let n = laml.arity(sc.kind())?;
            let base: Vec<(u64, u64)> = prev.iter().copied().collect();
            let tuples = tuple_count(base.len(), n)?;
            if tuples > 1 << 22 {
                return Err(Error::Intractable(format!(
                    "formula enumeration needs {tuples} argument tuples"
                )));
            }
            let mut idx = vec![0usize; n];
            loop {
                let args_c: Vec<Subset> = idx
                    .iter()
                    .map(|i| subset_of_mask(sc.states(), base[*i].0))
                    .collect();
                let args_d: Vec<Subset> = idx
                    .iter()
                    .map(|i| subset_of_mask(sd.states(), base[*i].1))
                    .collect();
                let mut ext_c = 0u64;
                for x in 0..nc {
                    if eval_lifting(laml, sc.kind(), sc.gamma(x as u32), &args_c)? {
                        ext_c |= 1 << x;
                    }
                }
                let mut ext_d = 0u64;
                for y in 0..nd {
                    if eval_lifting(mu, sd.kind(), sd.gamma(y as u32), &args_d)? {
                        ext_d |= 1 << y;
                    }
                }
                new_keys.push((ext_c, ext_d));
                // next tuple
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    idx[i] += 1;
                    if idx[i] < base.len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if n == 0 || i == n {
                    break;
                }
            }
        }
        keys.extend(new_keys);
        bool_close(&mut keys, key_cap)?;
        by_depth.push(keys.clone());
        if keys == prev {
            stabilized = true;
            break;
        }
    }
    let mut preorder = Rel::full(sc.states(), sd.states());
    for (ec, ed) in &keys {
        for x in 0..nc as u32 {
            if ec & (1 << x) != 0 {
                for y in 0..nd as u32 {
                    if ed & (1 << y) == 0 {
                        preorder.remove(x, y);
                    }
                }
            }
        }
    }
    Ok(FormulaTheory {
        by_depth,
        preorder,
        stabilized,
    })
}

fn tuple_count(base: usize, arity: usize) -> Result<u128> {
    let mut c: u128 = 1;
    for _ in 0..arity {
        c = c
            .checked_mul(base as u128)
            .ok_or_else(|| Error::Intractable("tuple count overflow".into()))?;
    }
    Ok(c)
}

fn subset_of_mask(u: &FinSet, mask: u64) -> Subset {
    Subset::from_indices(u, u.indices().filter(|i| mask & (1 << i) != 0))
}

/// Closes a key set under pairwise conjunction and disjunction of
/// extensions (both sides at once).
fn bool_close(keys: &mut BTreeSet<(u64, u64)>, cap: usize) -> Result<()> {
    let mut work: Vec<(u64, u64)> = keys.iter().copied().collect();
    while let Some((a, b)) = work.pop() {
        let snapshot: Vec<(u64, u64)> = keys.iter().copied().collect();
        for (c, d) in snapshot {
            for cand in [(a & c, b & d), (a | c, b | d)] {
                if keys.insert(cand) {
                    work.push(cand);
                    if keys.len() > cap {
                        return Err(Error::Intractable(format!(
                            "formula theory exceeded {cap} semantic classes"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Behavioral oracles written against the textbook definitions
// ---------------------------------------------------------------------

fn plts_edges(c: &Coalgebra) -> Result<Vec<Vec<(u32, u32)>>> {
    let n = c.states().size();
    let mut out = vec![Vec::new(); n];
    for x in 0..n {
        match c.gamma(x as u32) {
            FunctorTerm::Plts(set) => {
                out[x] = set.iter().copied().collect();
            }
            _ => {
                return Err(Error::KindMismatch {
                    context: "labelled transition oracle".into(),
                    expected: "nondeterministic transition structure".into(),
                    got: c.kind().to_string(),
                })
            }
        }
    }
    Ok(out)
}

fn closure(adj: &[u64]) -> Vec<u64> {
    // reflexive-transitive closure of a one-step relation given as
    // per-state successor masks
    let n = adj.len();
    let mut star: Vec<u64> = (0..n).map(|x| (1u64 << x) | adj[x]).collect();
    loop {
        let mut changed = false;
        for x in 0..n {
            let mut m = star[x];
            let mut bits = m;
            while bits != 0 {
                let y = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                m |= star[y];
            }
            if m != star[x] {
                star[x] = m;
                changed = true;
            }
        }
        if !changed {
            return star;
        }
    }
}

/// Greatest weak simulation between two systems over the same alphabet:
/// a silent step may be answered by any number of silent steps
/// (including none), a visible step by that label padded with silent
/// steps on both sides.
pub fn weak_sim_oracle(c: &Coalgebra, d: &Coalgebra, tau: &str) -> Result<Rel> {
    let (la_c, la_d) = (
        c.kind().labels().ok_or_else(|| Error::KindMismatch {
            context: "weak simulation oracle".into(),
            expected: "labelled kind".into(),
            got: c.kind().to_string(),
        })?,
        d.kind().labels().ok_or_else(|| Error::KindMismatch {
            context: "weak simulation oracle".into(),
            expected: "labelled kind".into(),
            got: d.kind().to_string(),
        })?,
    );
    if !la_c.same(la_d) {
        return Err(Error::KindMismatch {
            context: "weak simulation oracle".into(),
            expected: la_c.to_string(),
            got: la_d.to_string(),
        });
    }
    let nc = c.states().size();
    let nd = d.states().size();
    if nc > 64 || nd > 64 {
        return Err(Error::Intractable("weak simulation oracle limit is 64 states".into()));
    }
    let ec = plts_edges(c)?;
    let ed = plts_edges(d)?;
    let tau_idx = la_c.index_of(tau);
    let tau_adj = |edges: &[Vec<(u32, u32)>]| -> Vec<u64> {
        edges
            .iter()
            .map(|es| {
                es.iter()
                    .filter(|(l, _)| Some(*l) == tau_idx)
                    .fold(0u64, |m, (_, y)| m | (1 << y))
            })
            .collect()
    };
    let d_tau_star = closure(&tau_adj(&ed));
    // weak answer sets on the right: label l from y
    let weak_post = |y: usize, l: u32| -> u64 {
        let mut from = d_tau_star[y];
        if Some(l) == tau_idx {
            return from; // silent step: tau-star, possibly staying put
        }
        let mut mid = 0u64;
        while from != 0 {
            let v = from.trailing_zeros() as usize;
            from &= from - 1;
            for (m, y2) in &ed[v] {
                if *m == l {
                    mid |= 1 << y2;
                }
            }
        }
        let mut out = 0u64;
        while mid != 0 {
            let v = mid.trailing_zeros() as usize;
            mid &= mid - 1;
            out |= d_tau_star[v];
        }
        out
    };
    let mut rel = vec![full_mask(nd); nc];
    loop {
        let prev = rel.clone();
        for x in 0..nc {
            for y in 0..nd {
                if prev[x] & (1 << y) == 0 {
                    continue;
                }
                let ok = ec[x].iter().all(|(l, x2)| {
                    let answers = weak_post(y, *l);
                    (0..nd).any(|y2| answers & (1 << y2) != 0 && prev[*x2 as usize] & (1 << y2) != 0)
                });
                if !ok {
                    rel[x] &= !(1 << y);
                }
            }
        }
        if rel == prev {
            break;
        }
    }
    masks_to_rel(c.states(), d.states(), &rel)
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn masks_to_rel(src: &FinSet, dst: &FinSet, rows: &[u64]) -> Result<Rel> {
    let mut r = Rel::empty(src, dst);
    for (x, m) in rows.iter().enumerate() {
        for y in 0..dst.size() {
            if m & (1 << y) != 0 {
                r.insert(x as u32, y as u32);
            }
        }
    }
    Ok(r)
}

/// Pairs of states admitting a common infinite trace, computed on the
/// synchronized product graph by repeatedly deleting sink nodes.
pub fn shared_trace_oracle(c: &Coalgebra, d: &Coalgebra) -> Result<Rel> {
    let ec = plts_edges(c)?;
    let ed = plts_edges(d)?;
    let nc = c.states().size();
    let nd = d.states().size();
    let mut alive = vec![true; nc * nd];
    loop {
        let mut changed = false;
        for x in 0..nc {
            for y in 0..nd {
                if !alive[x * nd + y] {
                    continue;
                }
                let has_step = ec[x].iter().any(|(l, x2)| {
                    ed[y]
                        .iter()
                        .any(|(m, y2)| m == l && alive[*x2 as usize * nd + *y2 as usize])
                });
                if !has_step {
                    alive[x * nd + y] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut r = Rel::empty(c.states(), d.states());
    for x in 0..nc {
        for y in 0..nd {
            if alive[x * nd + y] {
                r.insert(x as u32, y as u32);
            }
        }
    }
    Ok(r)
}

/// Greatest input-output conformance relation between a specification
/// with partial input behaviour and an input-enabled implementation,
/// computed directly from the transfer conditions.
pub fn ioco_oracle(spec: &Coalgebra, imp: &Coalgebra) -> Result<Rel> {
    let (si, so) = spec.kind().io_alphabets().ok_or_else(|| Error::KindMismatch {
        context: "conformance oracle".into(),
        expected: "suspension kind".into(),
        got: spec.kind().to_string(),
    })?;
    let (ii, io) = imp.kind().io_alphabets().ok_or_else(|| Error::KindMismatch {
        context: "conformance oracle".into(),
        expected: "suspension kind".into(),
        got: imp.kind().to_string(),
    })?;
    if !si.same(ii) || !so.same(io) {
        return Err(Error::KindMismatch {
            context: "conformance oracle alphabets".into(),
            expected: format!("in={si} out={so}"),
            got: format!("in={ii} out={io}"),
        });
    }
    let ns = spec.states().size();
    let ni = imp.states().size();
    fn term(
        c: &Coalgebra,
        x: usize,
    ) -> Result<(
        &std::collections::BTreeMap<u32, u32>,
        &std::collections::BTreeMap<u32, u32>,
    )> {
        match c.gamma(x as u32) {
            FunctorTerm::Susp { inp, out } => Ok((inp, out)),
            _ => Err(Error::KindMismatch {
                context: "conformance oracle".into(),
                expected: "suspension term".into(),
                got: c.kind().to_string(),
            }),
        }
    }
    let mut rel = vec![vec![true; ni]; ns];
    loop {
        let mut changed = false;
        for s in 0..ns {
            let (s_in, s_out) = term(spec, s)?;
            for i in 0..ni {
                if !rel[s][i] {
                    continue;
                }
                let (i_in, i_out) = term(imp, i)?;
                let mut ok = true;
                for (k, s_tgt) in s_in {
                    match i_in.get(k) {
                        Some(i_tgt) => {
                            if !rel[*s_tgt as usize][*i_tgt as usize] {
                                ok = false;
                                break;
                            }
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    for (k, i_tgt) in i_out {
                        match s_out.get(k) {
                            Some(s_tgt) => {
                                if !rel[*s_tgt as usize][*i_tgt as usize] {
                                    ok = false;
                                    break;
                                }
                            }
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                }
                if !ok {
                    rel[s][i] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut r = Rel::empty(spec.states(), imp.states());
    for s in 0..ns {
        for i in 0..ni {
            if rel[s][i] {
                r.insert(s as u32, i as u32);
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functors::Ratio;

    #[test]
    fn barr_set_fast_path_matches_generic() {
        let kind = FunctorKind::plts(FinSet::new(["a", "b"]).unwrap());
        let x = FinSet::numbered("x", 2);
        let z = FinSet::numbered("z", 2);
        let cfg = EnumCfg::default();
        for bits in 0u64..16 {
            let mut r = Rel::empty(&x, &z);
            for i in 0..4 {
                if bits & (1 << i) != 0 {
                    r.insert(i / 2, i % 2);
                }
            }
            let fast = barr_set(&kind, &r, &cfg).unwrap();
            // generic path via term enumeration over the pair carrier
            let pairs = r.pairs();
            let terms = enumerate_terms(&kind, pairs.len(), &cfg).unwrap();
            let p1: Vec<u32> = pairs.iter().map(|(a, _)| *a).collect();
            let p2: Vec<u32> = pairs.iter().map(|(_, b)| *b).collect();
            let mut slow = BTreeSet::new();
            for w in terms {
                slow.insert((
                    crate::functors::fmap_vec(&w, &p1).unwrap(),
                    crate::functors::fmap_vec(&w, &p2).unwrap(),
                ));
            }
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn barr_point_query_consistent_with_set() {
        let kind = FunctorKind::plts(FinSet::new(["a"]).unwrap());
        let x = FinSet::numbered("x", 2);
        let z = FinSet::numbered("z", 2);
        let mut r = Rel::empty(&x, &z);
        r.insert(0, 0);
        r.insert(1, 1);
        let cfg = EnumCfg::default();
        let set = barr_set(&kind, &r, &cfg).unwrap();
        let terms_x = enumerate_terms(&kind, 2, &cfg).unwrap();
        for a in &terms_x {
            for b in &terms_x {
                let q = brute_barr(&kind, &r, a, b, &cfg).unwrap();
                assert_eq!(q, set.contains(&(a.clone(), b.clone())));
            }
        }
    }

    #[test]
    fn barr_dlts_coupling_example() {
        // over the diagonal, the lifting is equality of distributions
        let kind = FunctorKind::dlts(FinSet::new(["a"]).unwrap());
        let x = FinSet::numbered("x", 2);
        let r = Rel::diagonal(&x);
        let cfg = EnumCfg {
            cap: 1 << 20,
            dlts_denominator: 2,
        };
        let half: FunctorTerm = FunctorTerm::Dlts(
            [((0u32, 0u32), Ratio::new(1, 2)), ((0, 1), Ratio::new(1, 2))].into(),
        );
        let point = FunctorTerm::Dlts([((0u32, 0u32), Ratio::new(1, 1))].into());
        assert!(brute_barr(&kind, &r, &half, &half, &cfg).unwrap());
        assert!(brute_barr(&kind, &r, &point, &point, &cfg).unwrap());
        assert!(!brute_barr(&kind, &r, &half, &point, &cfg).unwrap());
    }

    #[test]
    fn weak_oracle_silent_step_can_idle() {
        // x --tau--> x' (deadlock) is weakly below a deadlocked state
        let labels = FinSet::new(["tau"]).unwrap();
        let kind = FunctorKind::plts(labels);
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
            kind,
            FinSet::numbered("y", 1),
            vec![FunctorTerm::Plts([].into())],
        )
        .unwrap();
        let w = weak_sim_oracle(&c, &d, "tau").unwrap();
        assert!(w.contains(0, 0));
        assert!(w.contains(1, 0));
    }

    #[test]
    fn shared_trace_needs_a_loop() {
        let labels = FinSet::new(["a"]).unwrap();
        let kind = FunctorKind::plts(labels);
        // c: x0 -a-> x0 ; d: y0 -a-> y1 (y1 stuck)
        let c = Coalgebra::new(
            kind.clone(),
            FinSet::numbered("x", 1),
            vec![FunctorTerm::Plts([(0u32, 0u32)].into())],
        )
        .unwrap();
        let d = Coalgebra::new(
            kind,
            FinSet::numbered("y", 2),
            vec![
                FunctorTerm::Plts([(0u32, 1u32)].into()),
                FunctorTerm::Plts([].into()),
            ],
        )
        .unwrap();
        let r = shared_trace_oracle(&c, &d).unwrap();
        assert!(r.is_empty_rel(), "finite shared trace must not count");
        let r2 = shared_trace_oracle(&c, &c).unwrap();
        assert!(r2.contains(0, 0));
    }

    #[test]
    fn ioco_oracle_rejects_unexpected_output() {
        let i = FinSet::new(["coin"]).unwrap();
        let o = FinSet::new(["coffee"]).unwrap();
        let spec_kind = FunctorKind::susp(i.clone(), o.clone()).unwrap();
        let imp_kind = FunctorKind::susp_ie(i, o).unwrap();
        // spec state 0: no output allowed (quiescent via empty out? not
        // allowed; use self-loop output) — model: out {coffee -> 0}
        let spec = Coalgebra::new(
            spec_kind,
            FinSet::numbered("s", 1),
            vec![FunctorTerm::Susp {
                inp: [(0u32, 0u32)].into(),
                out: [(0u32, 0u32)].into(),
            }],
        )
        .unwrap();
        let imp = Coalgebra::new(
            imp_kind,
            FinSet::numbered("q", 1),
            vec![FunctorTerm::Susp {
                inp: [(0u32, 0u32)].into(),
                out: [(0u32, 0u32)].into(),
            }],
        )
        .unwrap();
        let r = ioco_oracle(&spec, &imp).unwrap();
        assert!(r.contains(0, 0));
    }
}
