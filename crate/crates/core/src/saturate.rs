//! Ground saturation: an independent check that `C(n)` is refutable.
//!
//! `C(n)` is instantiated over a finite universe of ladder terms and
//! refuted by propositional resolution with subsumption.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::clause_sets::{nia_clause_set, Clause};
use crate::error::Result;
use crate::resolution::ResolutionTree;
use crate::terms::{eval_m, match_atom, Atom, Subst, Term, VarKey};

/// Generated clauses allowed before giving up.
pub const DEFAULT_CLAUSE_BUDGET: usize = 5_000_000;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub n: u64,
    pub depth: u64,
    pub universe: usize,
    pub ground_instances: usize,
    pub pure_eliminated: usize,
    pub generated: usize,
    pub kept: usize,
    pub tautologies: usize,
    pub duplicates: usize,
    pub forward_subsumed: usize,
    pub backward_subsumed: usize,
    pub given: usize,
    pub found: bool,
    pub budget_exhausted: bool,
}

/// `{m(i) : i ≤ depth} ∪ {s(m(i)) : i < depth}`; the successors are needed
/// to instantiate the first argument of `max` in C2 and C3.
pub fn universe(depth: u64) -> Vec<Term> {
    let mut out: Vec<Term> = (0..=depth).map(eval_m).collect();
    out.extend((0..depth).map(|i| Term::s(eval_m(i))));
    out
}

fn ground_instances(c: &Clause, universe: &[Term]) -> Vec<Clause> {
    let vars: Vec<VarKey> = c.vars().into_iter().collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    loop {
        let mut s = Subst::new();
        for (v, &i) in vars.iter().zip(&idx) {
            s.bind(v.clone(), universe[i].clone());
        }
        out.push(c.apply(&s));
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < universe.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// A ground clause over atom ids, both sides sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Ground {
    neg: Vec<u32>,
    pos: Vec<u32>,
}

impl Ground {
    fn len(&self) -> usize {
        self.neg.len() + self.pos.len()
    }

    fn is_tautology(&self) -> bool {
        self.neg.iter().any(|a| self.pos.binary_search(a).is_ok())
    }

    fn subsumes(&self, other: &Ground) -> bool {
        let sub = |a: &[u32], b: &[u32]| a.iter().all(|x| b.binary_search(x).is_ok());
        sub(&self.neg, &other.neg) && sub(&self.pos, &other.pos)
    }
}

fn merge(a: &[u32], b: &[u32], skip: u32) -> Vec<u32> {
    let set: BTreeSet<u32> = a.iter().chain(b).copied().filter(|&x| x != skip).collect();
    set.into_iter().collect()
}

enum Origin {
    Input(Clause),
    /// `(positive premise, negative premise, pivot)`.
    Res(usize, usize, u32),
}

struct Store {
    atoms: Vec<Atom>,
    ids: HashMap<Atom, u32>,
    clauses: Vec<(Ground, Origin)>,
}

impl Store {
    fn atom(&mut self, a: &Atom) -> u32 {
        if let Some(&i) = self.ids.get(a) {
            return i;
        }
        let i = self.atoms.len() as u32;
        self.atoms.push(a.clone());
        self.ids.insert(a.clone(), i);
        i
    }

    fn tree(&self, i: usize, memo: &mut HashMap<usize, ResolutionTree>) -> Result<ResolutionTree> {
        if let Some(t) = memo.get(&i) {
            return Ok(t.clone());
        }
        let t = match &self.clauses[i].1 {
            Origin::Input(c) => ResolutionTree::leaf(c.clone()),
            Origin::Res(p, n, a) => {
                let l = self.tree(*p, memo)?;
                let r = self.tree(*n, memo)?;
                ResolutionTree::resolve(l, r, self.atoms[*a as usize].clone(), true)?
            }
        };
        memo.insert(i, t.clone());
        Ok(t)
    }
}

/// Every atom occurs with one polarity only in the clauses dropped here.
fn pure_literal_elimination(set: Vec<(Ground, Clause)>) -> (Vec<(Ground, Clause)>, usize) {
    let mut set = set;
    let mut removed = 0;
    loop {
        let mut neg = BTreeSet::new();
        let mut pos = BTreeSet::new();
        for (g, _) in &set {
            neg.extend(g.neg.iter().copied());
            pos.extend(g.pos.iter().copied());
        }
        let before = set.len();
        set.retain(|(g, _)| g.neg.iter().all(|a| pos.contains(a)) && g.pos.iter().all(|a| neg.contains(a)));
        removed += before - set.len();
        if set.len() == before {
            return (set, removed);
        }
    }
}

/// Searches for a ground refutation of `C(n)` over [`universe`]`(depth)`.
pub fn saturate(n: u64, depth: u64) -> Result<(Option<ResolutionTree>, Stats)> {
    saturate_with(n, depth, DEFAULT_CLAUSE_BUDGET)
}

pub fn saturate_with(n: u64, depth: u64, budget: usize) -> Result<(Option<ResolutionTree>, Stats)> {
    let u = universe(depth);
    let mut stats = Stats { n, depth, universe: u.len(), ..Stats::default() };
    let mut store = Store { atoms: Vec::new(), ids: HashMap::new(), clauses: Vec::new() };

    let mut input: BTreeMap<Ground, Clause> = BTreeMap::new();
    for c in nia_clause_set(n) {
        for g in ground_instances(&c, &u) {
            let g = g.normalize(&Default::default())?;
            stats.ground_instances += 1;
            let key = Ground {
                neg: g.ante.iter().map(|a| store.atom(a)).collect::<BTreeSet<_>>().into_iter().collect(),
                pos: g.succ.iter().map(|a| store.atom(a)).collect::<BTreeSet<_>>().into_iter().collect(),
            };
            if key.is_tautology() {
                stats.tautologies += 1;
                continue;
            }
            input.entry(key).or_insert(g);
        }
    }
    let (input, pure) = pure_literal_elimination(input.into_iter().collect());
    stats.pure_eliminated = pure;

    // Passive clauses ordered by (length, id); ids follow insertion order.
    let mut passive: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (g, c) in input {
        passive.insert((g.len(), store.clauses.len()));
        store.clauses.push((g, Origin::Input(c)));
    }
    let mut active: Vec<usize> = Vec::new();
    let mut seen: HashSet<Ground> = store.clauses.iter().map(|(g, _)| g.clone()).collect();

    while let Some((_, given)) = passive.pop_first() {
        let g = store.clauses[given].0.clone();
        if active.iter().any(|&a| store.clauses[a].0.subsumes(&g)) {
            stats.forward_subsumed += 1;
            continue;
        }
        stats.given += 1;
        if g.len() == 0 {
            stats.found = true;
            let tree = store.tree(given, &mut HashMap::new())?;
            return Ok((Some(tree), stats));
        }
        let before = active.len();
        active.retain(|&a| !g.subsumes(&store.clauses[a].0));
        stats.backward_subsumed += before - active.len();

        let mut new = Vec::new();
        for &a in &active {
            let h = &store.clauses[a].0;
            for &p in &g.pos {
                if h.neg.binary_search(&p).is_ok() {
                    new.push((given, a, p));
                }
            }
            for &p in &g.neg {
                if h.pos.binary_search(&p).is_ok() {
                    new.push((a, given, p));
                }
            }
        }
        active.push(given);
        for (l, r, p) in new {
            let (lg, rg) = (&store.clauses[l].0, &store.clauses[r].0);
            let res = Ground { neg: merge(&lg.neg, &rg.neg, p), pos: merge(&lg.pos, &rg.pos, p) };
            stats.generated += 1;
            if res.is_tautology() {
                stats.tautologies += 1;
                continue;
            }
            if stats.generated > budget {
                stats.budget_exhausted = true;
                return Ok((None, stats));
            }
            if !seen.insert(res.clone()) {
                stats.duplicates += 1;
                continue;
            }
            stats.kept += 1;
            passive.insert((res.len(), store.clauses.len()));
            store.clauses.push((res, Origin::Res(l, r, p)));
        }
    }
    Ok((None, stats))
}

/// Whether `c` is a ground instance of some clause of `C(n)`.
pub fn is_ground_instance(c: &Clause, n: u64) -> bool {
    nia_clause_set(n).iter().any(|b| {
        b.ante.len() == c.ante.len()
            && b.succ.len() == c.succ.len()
            && b.ante.iter().zip(&c.ante).chain(b.succ.iter().zip(&c.succ)).try_fold(Subst::new(), |mut s, (p, t)| {
                match_atom(p, t, &mut s).then_some(s)
            }).is_some()
    })
}
