//! Clauses, clause-set terms and the NiA clause set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::terms::{match_atom, Atom, Formula, Omega, OmegaEnv, Subst, Term, VarKey};

/// A sequent of atoms. Both sides are multisets kept in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    pub ante: Vec<Atom>,
    pub succ: Vec<Atom>,
}

impl Clause {
    pub fn new(ante: Vec<Atom>, succ: Vec<Atom>) -> Clause {
        Clause { ante, succ }
    }

    pub fn empty() -> Clause {
        Clause::default()
    }

    pub fn is_empty(&self) -> bool {
        self.ante.is_empty() && self.succ.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ante.len() + self.succ.len()
    }

    /// `C ∘ D`: multiset union of both sides, no deduplication.
    pub fn merge(&self, other: &Clause) -> Clause {
        let mut c = self.clone();
        c.ante.extend(other.ante.iter().cloned());
        c.succ.extend(other.succ.iter().cloned());
        c
    }

    pub fn is_tautology(&self) -> bool {
        self.ante.iter().any(|a| self.succ.contains(a))
    }

    pub fn apply(&self, s: &Subst) -> Clause {
        Clause {
            ante: self.ante.iter().map(|a| s.apply_atom(a)).collect(),
            succ: self.succ.iter().map(|a| s.apply_atom(a)).collect(),
        }
    }

    pub fn map_atoms(&self, mut g: impl FnMut(&Atom) -> Result<Atom>) -> Result<Clause> {
        Ok(Clause {
            ante: self.ante.iter().map(&mut g).collect::<Result<_>>()?,
            succ: self.succ.iter().map(&mut g).collect::<Result<_>>()?,
        })
    }

    pub fn normalize(&self, env: &OmegaEnv) -> Result<Clause> {
        self.map_atoms(|a| a.normalize(env))
    }

    pub fn vars(&self) -> BTreeSet<VarKey> {
        let mut out = BTreeSet::new();
        for a in self.ante.iter().chain(&self.succ) {
            a.vars(&mut out);
        }
        out
    }

    pub fn rename_vars(&self, f: &dyn Fn(&str) -> String) -> Clause {
        self.map_atoms(|a| Ok(a.map_terms(|t| t.rename_vars(f))))
            .expect("renaming is infallible")
    }

    /// Contraction on both sides: later duplicates are dropped.
    pub fn contract(&self) -> Clause {
        fn dedup(v: &[Atom]) -> Vec<Atom> {
            let mut out: Vec<Atom> = Vec::new();
            for a in v {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
            out
        }
        Clause { ante: dedup(&self.ante), succ: dedup(&self.succ) }
    }

    /// Both sides sorted; equal for clauses that differ only in atom order.
    pub fn sorted(&self) -> Clause {
        let mut c = self.clone();
        c.ante.sort();
        c.succ.sort();
        c
    }

    /// Both sides as sets.
    pub fn as_sets(&self) -> (BTreeSet<Atom>, BTreeSet<Atom>) {
        (self.ante.iter().cloned().collect(), self.succ.iter().cloned().collect())
    }

    pub fn size(&self) -> usize {
        self.ante.iter().chain(&self.succ).map(Atom::size).sum()
    }
}

fn write_side<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, a) in items.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{}", a)?;
    }
    Ok(())
}

fn write_sequent<T: fmt::Display>(f: &mut fmt::Formatter<'_>, ante: &[T], succ: &[T]) -> fmt::Result {
    write_side(f, ante)?;
    if !ante.is_empty() {
        write!(f, " ")?;
    }
    write!(f, "|-")?;
    if !succ.is_empty() {
        write!(f, " ")?;
    }
    write_side(f, succ)
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sequent(f, &self.ante, &self.succ)
    }
}

/// A sequent of arbitrary formulas, as found in clause-set term leaves
/// before normalization and clausal splitting.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequent {
    pub ante: Vec<Formula>,
    pub succ: Vec<Formula>,
}

impl Sequent {
    pub fn new(ante: Vec<Formula>, succ: Vec<Formula>) -> Sequent {
        Sequent { ante, succ }
    }

    pub fn merge(&self, other: &Sequent) -> Sequent {
        let mut s = self.clone();
        s.ante.extend(other.ante.iter().cloned());
        s.succ.extend(other.succ.iter().cloned());
        s
    }

    pub fn subst_omega(&self, map: &BTreeMap<String, Omega>) -> Sequent {
        Sequent {
            ante: self.ante.iter().map(|f| f.subst_omega(map)).collect(),
            succ: self.succ.iter().map(|f| f.subst_omega(map)).collect(),
        }
    }

    pub fn map_formulas(&self, mut g: impl FnMut(&Formula) -> Formula) -> Sequent {
        Sequent {
            ante: self.ante.iter().map(&mut g).collect(),
            succ: self.succ.iter().map(&mut g).collect(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for f in self.ante.iter().chain(&self.succ) {
            f.free_vars(&mut out);
        }
        out
    }

    /// Normalizes under `env`, then splits into clauses: `Γ ⊢ Δ` is read as
    /// `¬⋀Γ ∨ ⋁Δ` and brought into conjunctive normal form.
    pub fn clausify(&self, env: &OmegaEnv) -> Result<Vec<Clause>> {
        let mut acc: Vec<Vec<(bool, Atom)>> = vec![Vec::new()];
        for (pol, f) in self.ante.iter().map(|f| (false, f)).chain(self.succ.iter().map(|f| (true, f))) {
            let part = cnf(&f.normalize(env)?, pol)?;
            acc = product(&acc, &part);
        }
        Ok(acc
            .into_iter()
            .map(|lits| {
                let mut c = Clause::empty();
                for (pol, a) in lits {
                    if pol {
                        c.succ.push(a);
                    } else {
                        c.ante.push(a);
                    }
                }
                c
            })
            .collect())
    }

    /// The single clause of an atomic sequent.
    pub fn to_clause(&self, env: &OmegaEnv) -> Result<Clause> {
        let mut cs = self.clausify(env)?;
        if cs.len() != 1 {
            return Err(Error::NotAClause(self.to_string()));
        }
        Ok(cs.remove(0))
    }
}

impl From<&Clause> for Sequent {
    fn from(c: &Clause) -> Sequent {
        Sequent {
            ante: c.ante.iter().cloned().map(Formula::Atom).collect(),
            succ: c.succ.iter().cloned().map(Formula::Atom).collect(),
        }
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sequent(f, &self.ante, &self.succ)
    }
}

type Lits = Vec<(bool, Atom)>;

fn product(a: &[Lits], b: &[Lits]) -> Vec<Lits> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let mut c = x.clone();
            c.extend(y.iter().cloned());
            out.push(c);
        }
    }
    out
}

fn cnf(f: &Formula, pol: bool) -> Result<Vec<Lits>> {
    Ok(match (f, pol) {
        (Formula::Atom(a), _) => vec![vec![(pol, a.clone())]],
        (Formula::Not(a), _) => cnf(a, !pol)?,
        (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
            let mut v = cnf(a, pol)?;
            v.extend(cnf(b, pol)?);
            v
        }
        (Formula::Or(a, b), true) | (Formula::And(a, b), false) => product(&cnf(a, pol)?, &cnf(b, pol)?),
        (Formula::Imp(a, b), true) => product(&cnf(a, false)?, &cnf(b, true)?),
        (Formula::Imp(a, b), false) => {
            let mut v = cnf(a, true)?;
            v.extend(cnf(b, false)?);
            v
        }
        _ => return Err(Error::NotAClause(format!("quantified or unnormalized formula {}", f))),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Ante,
    Succ,
}

/// A formula occurrence in an end sequent, by side and index. Serialized as `A0`, `S1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub side: Side,
    pub index: usize,
}

impl Position {
    pub fn ante(index: usize) -> Position {
        Position { side: Side::Ante, index }
    }

    pub fn succ(index: usize) -> Position {
        Position { side: Side::Succ, index }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.side {
            Side::Ante => 'A',
            Side::Succ => 'S',
        };
        write!(f, "{}{}", s, self.index)
    }
}

pub type Configuration = BTreeSet<Position>;

pub fn config_string(c: &Configuration) -> String {
    format!("{{{}}}", c.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClauseSetTerm {
    Leaf(Vec<Sequent>),
    Plus(Box<ClauseSetTerm>, Box<ClauseSetTerm>),
    Times(Box<ClauseSetTerm>, Box<ClauseSetTerm>),
    /// `cl^{ψ,Ω}(a, ū)`.
    Symbol {
        name: String,
        config: Configuration,
        index: Omega,
        args: Vec<Term>,
    },
}

impl ClauseSetTerm {
    pub fn leaf(seqs: Vec<Sequent>) -> ClauseSetTerm {
        ClauseSetTerm::Leaf(seqs)
    }

    pub fn clauses(cs: &[Clause]) -> ClauseSetTerm {
        ClauseSetTerm::Leaf(cs.iter().map(Sequent::from).collect())
    }

    pub fn plus(a: ClauseSetTerm, b: ClauseSetTerm) -> ClauseSetTerm {
        ClauseSetTerm::Plus(Box::new(a), Box::new(b))
    }

    pub fn times(a: ClauseSetTerm, b: ClauseSetTerm) -> ClauseSetTerm {
        ClauseSetTerm::Times(Box::new(a), Box::new(b))
    }

    pub fn symbol(name: &str, config: Configuration, index: Omega) -> ClauseSetTerm {
        ClauseSetTerm::Symbol { name: name.to_string(), config, index, args: Vec::new() }
    }

    pub fn symbols(&self, out: &mut Vec<(String, Configuration)>) {
        match self {
            ClauseSetTerm::Leaf(_) => {}
            ClauseSetTerm::Plus(a, b) | ClauseSetTerm::Times(a, b) => {
                a.symbols(out);
                b.symbols(out);
            }
            ClauseSetTerm::Symbol { name, config, .. } => out.push((name.clone(), config.clone())),
        }
    }

    fn map_leaves(&self, g: &mut dyn FnMut(&Sequent) -> Sequent) -> ClauseSetTerm {
        match self {
            ClauseSetTerm::Leaf(s) => ClauseSetTerm::Leaf(s.iter().map(|q| g(q)).collect()),
            ClauseSetTerm::Plus(a, b) => ClauseSetTerm::plus(a.map_leaves(g), b.map_leaves(g)),
            ClauseSetTerm::Times(a, b) => ClauseSetTerm::times(a.map_leaves(g), b.map_leaves(g)),
            ClauseSetTerm::Symbol { .. } => self.clone(),
        }
    }

    /// A normal form for comparing terms: ⊕ chains flattened and sorted,
    /// leaf sequents with atom order normalized, tautological axiom leaves
    /// (sequents sharing a formula on both sides) dropped.
    pub fn canonical(&self) -> CanonTerm {
        match self {
            ClauseSetTerm::Leaf(s) => {
                let mut seqs: Vec<Sequent> = s
                    .iter()
                    .filter(|q| !q.ante.iter().any(|a| q.succ.contains(a)))
                    .map(|q| {
                        let mut q = q.clone();
                        q.ante.sort();
                        q.succ.sort();
                        q
                    })
                    .collect();
                seqs.sort();
                seqs.dedup();
                CanonTerm::Leaf(seqs)
            }
            ClauseSetTerm::Plus(..) => {
                let mut items = Vec::new();
                self.flatten_plus(&mut items);
                let mut items: Vec<CanonTerm> = items
                    .into_iter()
                    .map(|t| t.canonical())
                    .filter(|c| *c != CanonTerm::Leaf(Vec::new()))
                    .collect();
                items.sort();
                if items.len() == 1 {
                    items.remove(0)
                } else {
                    CanonTerm::Plus(items)
                }
            }
            ClauseSetTerm::Times(a, b) => CanonTerm::Times(Box::new(a.canonical()), Box::new(b.canonical())),
            ClauseSetTerm::Symbol { name, config, index, args } => CanonTerm::Symbol(
                name.clone(),
                config_string(config),
                index.to_string(),
                args.iter().map(|a| a.to_string()).collect(),
            ),
        }
    }

    fn flatten_plus<'a>(&'a self, out: &mut Vec<&'a ClauseSetTerm>) {
        match self {
            ClauseSetTerm::Plus(a, b) => {
                a.flatten_plus(out);
                b.flatten_plus(out);
            }
            _ => out.push(self),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CanonTerm {
    Leaf(Vec<Sequent>),
    Plus(Vec<CanonTerm>),
    Times(Box<CanonTerm>, Box<CanonTerm>),
    Symbol(String, String, String, Vec<String>),
}

impl fmt::Display for ClauseSetTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClauseSetTerm::Leaf(s) => {
                write!(f, "{{")?;
                for (i, q) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{}", q)?;
                }
                write!(f, "}}")
            }
            ClauseSetTerm::Plus(a, b) => write!(f, "({} (+) {})", a, b),
            ClauseSetTerm::Times(a, b) => write!(f, "({} (x) {})", a, b),
            ClauseSetTerm::Symbol { name, config, index, args } => {
                write!(f, "cl[{},{}]({}", name, config_string(config), index)?;
                for a in args {
                    write!(f, ",{}", a)?;
                }
                write!(f, ")")
            }
        }
    }
}

fn push_unique<T: PartialEq>(v: &mut Vec<T>, x: T) {
    if !v.contains(&x) {
        v.push(x);
    }
}

/// Evaluates a symbol-free term to its set of sequents.
pub fn evaluate(t: &ClauseSetTerm) -> Result<Vec<Sequent>> {
    match t {
        ClauseSetTerm::Leaf(s) => {
            let mut out = Vec::new();
            for q in s {
                push_unique(&mut out, q.clone());
            }
            Ok(out)
        }
        ClauseSetTerm::Plus(a, b) => {
            let mut out = evaluate(a)?;
            for q in evaluate(b)? {
                push_unique(&mut out, q);
            }
            Ok(out)
        }
        ClauseSetTerm::Times(a, b) => {
            let l = evaluate(a)?;
            let r = evaluate(b)?;
            let mut out = Vec::new();
            for x in &l {
                for y in &r {
                    push_unique(&mut out, x.merge(y));
                }
            }
            Ok(out)
        }
        ClauseSetTerm::Symbol { name, config, index, .. } => Err(Error::UnresolvedSymbol(format!(
            "cl[{},{}]({})",
            name,
            config_string(config),
            index
        ))),
    }
}

/// Evaluates a term whose leaves are atomic sequents.
pub fn evaluate_clauses(t: &ClauseSetTerm) -> Result<Vec<Clause>> {
    let mut out = Vec::new();
    for q in evaluate(t)? {
        for c in q.clausify(&OmegaEnv::new())? {
            push_unique(&mut out, c);
        }
    }
    Ok(out)
}

pub fn tautology_elim(s: &[Clause]) -> Vec<Clause> {
    s.iter().filter(|c| !c.is_tautology()).cloned().collect()
}

/// `c` subsumes `d` iff some σ maps every atom of `c` into the same side of `d`.
pub fn subsumes(c: &Clause, d: &Clause) -> bool {
    let lits: Vec<(bool, &Atom)> = c.ante.iter().map(|a| (false, a)).chain(c.succ.iter().map(|a| (true, a))).collect();
    fn go(lits: &[(bool, &Atom)], d: &Clause, s: &Subst) -> bool {
        let Some(((pol, a), rest)) = lits.split_first() else { return true };
        let side = if *pol { &d.succ } else { &d.ante };
        side.iter().any(|b| {
            let mut s2 = s.clone();
            match_atom(a, b, &mut s2) && go(rest, d, &s2)
        })
    }
    go(&lits, d, &Subst::new())
}

pub fn subsumption_reduce(s: &[Clause]) -> Vec<Clause> {
    let mut kept: Vec<Clause> = Vec::new();
    for c in s {
        if kept.iter().any(|k| subsumes(k, c)) {
            continue;
        }
        kept.retain(|k| !subsumes(c, k));
        kept.push(c.clone());
    }
    kept
}

fn v(name: &str) -> Term {
    Term::var(name)
}

pub fn c1() -> Clause {
    Clause::new(vec![], vec![Atom::le(v("α"), v("α"))])
}

pub fn c2() -> Clause {
    Clause::new(vec![Atom::le(Term::max(v("α"), v("β")), v("γ"))], vec![Atom::le(v("α"), v("γ"))])
}

pub fn c3() -> Clause {
    Clause::new(vec![Atom::le(Term::max(v("α"), v("β")), v("γ"))], vec![Atom::le(v("β"), v("γ"))])
}

pub fn c4(k: u64) -> Clause {
    Clause::new(
        vec![Atom::colour(v("β"), k), Atom::colour(v("α"), k), Atom::le(Term::s(v("β")), v("α"))],
        vec![],
    )
}

pub fn c5(n: u64) -> Clause {
    Clause::new(vec![], (0..=n).map(|i| Atom::colour(v("α"), i)).collect())
}

/// `C(n) = {C1, C2, C3} ∪ {C4(k) : k ≤ n} ∪ {C5}`.
pub fn nia_clause_set(n: u64) -> Vec<Clause> {
    let mut out = vec![c1(), c2(), c3()];
    out.extend((0..=n).map(c4));
    out.push(c5(n));
    out
}

/// True iff some bijective renaming of individual variables maps `c` onto
/// `d` up to atom order.
pub fn clause_variant(c: &Clause, d: &Clause) -> bool {
    if c.ante.len() != d.ante.len() || c.succ.len() != d.succ.len() {
        return false;
    }
    let lits: Vec<(bool, &Atom)> = c.ante.iter().map(|a| (false, a)).chain(c.succ.iter().map(|a| (true, a))).collect();
    let mut used_a = vec![false; d.ante.len()];
    let mut used_s = vec![false; d.succ.len()];
    variant_go(&lits, d, &mut used_a, &mut used_s, &BTreeMap::new())
}

fn variant_go(
    lits: &[(bool, &Atom)],
    d: &Clause,
    used_a: &mut Vec<bool>,
    used_s: &mut Vec<bool>,
    ren: &BTreeMap<String, String>,
) -> bool {
    let Some(((pol, a), rest)) = lits.split_first() else { return true };
    let side = if *pol { &d.succ } else { &d.ante };
    for i in 0..side.len() {
        let taken = if *pol { used_s[i] } else { used_a[i] };
        if taken {
            continue;
        }
        let mut r = ren.clone();
        if a.pred == side[i].pred && rename_match(&a.lhs, &side[i].lhs, &mut r) && rename_match(&a.rhs, &side[i].rhs, &mut r) {
            if *pol { used_s[i] = true } else { used_a[i] = true }
            let ok = variant_go(rest, d, used_a, used_s, &r);
            if *pol { used_s[i] = false } else { used_a[i] = false }
            if ok {
                return true;
            }
        }
    }
    false
}

fn rename_match(a: &Term, b: &Term, ren: &mut BTreeMap<String, String>) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => match ren.get(x) {
            Some(z) => z == y,
            None => {
                if ren.values().any(|z| z == y) {
                    return false;
                }
                ren.insert(x.clone(), y.clone());
                true
            }
        },
        (Term::Fn(f, xs), Term::Fn(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| rename_match(x, y, ren))
        }
        (Term::MIter(k1, x1, t1), Term::MIter(k2, x2, t2)) => k1 == k2 && x1 == x2 && rename_match(t1, t2, ren),
        _ => a == b,
    }
}

/// Removes clauses that are variants of earlier ones.
pub fn dedup_variants(s: &[Clause]) -> Vec<Clause> {
    let mut out: Vec<Clause> = Vec::new();
    for c in s {
        if !out.iter().any(|d| clause_variant(c, d)) {
            out.push(c.clone());
        }
    }
    out
}

/// Clauses of `a` with no variant in `b`, and clauses of `b` with no variant in `a`.
pub fn diff_modulo_renaming(a: &[Clause], b: &[Clause]) -> (Vec<Clause>, Vec<Clause>) {
    let a = dedup_variants(a);
    let b = dedup_variants(b);
    let only_a = a.iter().filter(|c| !b.iter().any(|d| clause_variant(c, d))).cloned().collect();
    let only_b = b.iter().filter(|c| !a.iter().any(|d| clause_variant(c, d))).cloned().collect();
    (only_a, only_b)
}

pub fn same_modulo_renaming(a: &[Clause], b: &[Clause]) -> bool {
    let (x, y) = diff_modulo_renaming(a, b);
    x.is_empty() && y.is_empty()
}

/// Rewrite rules for clause-set symbols: `cl^{ψ,Ω}(0) → base`, `cl^{ψ,Ω}(k+1) → step`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolRules {
    pub rules: BTreeMap<(String, Configuration), SymbolRule>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolRule {
    /// The step variable; the step body is read at `var = index - 1`.
    pub var: String,
    /// Names of schematic parameters replaced by the symbol's arguments.
    pub params: Vec<String>,
    pub base: ClauseSetTerm,
    pub step: ClauseSetTerm,
}

impl SymbolRules {
    pub fn insert(&mut self, name: &str, config: Configuration, rule: SymbolRule) {
        self.rules.insert((name.to_string(), config), rule);
    }

    pub fn get(&self, name: &str, config: &Configuration) -> Option<&SymbolRule> {
        self.rules.get(&(name.to_string(), config.clone()))
    }
}

impl fmt::Display for SymbolRules {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ((name, config), r) in &self.rules {
            let c = config_string(config);
            writeln!(f, "cl[{},{}](0) -> {}", name, c, r.base)?;
            writeln!(f, "cl[{},{}]({}+1) -> {}", name, c, r.var, r.step)?;
        }
        Ok(())
    }
}

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Rewrites all symbols of `t` at `n = gamma`, renaming variables apart per
/// unfolding, then evaluates and splits the result into clauses.
pub fn normalize_symbols(rules: &SymbolRules, t: &ClauseSetTerm, gamma: u64) -> Result<Vec<Clause>> {
    normalize_symbols_with(rules, t, gamma, DEFAULT_BUDGET)
}

pub fn normalize_symbols_with(rules: &SymbolRules, t: &ClauseSetTerm, gamma: u64, budget: u64) -> Result<Vec<Clause>> {
    let mut env = OmegaEnv::new();
    env.insert("n".to_string(), gamma);
    let mut st = Expander { rules, budget, steps: 0, counter: 0, chain: Vec::new() };
    let expanded = st.expand(t, &env)?;
    let mut out = Vec::new();
    for q in evaluate(&expanded)? {
        for c in q.clausify(&OmegaEnv::new())? {
            push_unique(&mut out, c);
        }
    }
    Ok(out)
}

struct Expander<'a> {
    rules: &'a SymbolRules,
    budget: u64,
    steps: u64,
    counter: u64,
    chain: Vec<String>,
}

impl Expander<'_> {
    fn expand(&mut self, t: &ClauseSetTerm, env: &OmegaEnv) -> Result<ClauseSetTerm> {
        match t {
            ClauseSetTerm::Leaf(s) => {
                let map: BTreeMap<String, Omega> = env.iter().map(|(k, v)| (k.clone(), Omega::num(*v))).collect();
                Ok(ClauseSetTerm::Leaf(s.iter().map(|q| q.subst_omega(&map)).collect()))
            }
            ClauseSetTerm::Plus(a, b) => Ok(ClauseSetTerm::plus(self.expand(a, env)?, self.expand(b, env)?)),
            ClauseSetTerm::Times(a, b) => Ok(ClauseSetTerm::times(self.expand(a, env)?, self.expand(b, env)?)),
            ClauseSetTerm::Symbol { name, config, index, args } => {
                let k = index.eval(env)?;
                let label = format!("cl[{},{}]({})", name, config_string(config), k);
                let rule = self.rules.get(name, config).ok_or_else(|| Error::MissingRule(label.clone()))?;
                self.steps += 1;
                if self.steps > self.budget {
                    return Err(Error::Budget { budget: self.budget, chain: self.chain_string(&label) });
                }
                self.counter += 1;
                let suffix = self.counter.to_string();
                let body = if k == 0 { &rule.base } else { &rule.step };
                let mut inner = OmegaEnv::new();
                if k > 0 {
                    inner.insert(rule.var.clone(), k - 1);
                }
                let mut s = Subst::new();
                for (p, a) in rule.params.iter().zip(args) {
                    s.bind(VarKey::Ind(p.clone()), a.clone());
                }
                let params = rule.params.clone();
                let renamed = body.map_leaves(&mut |q| {
                    let q = q.map_formulas(|f| f.rename_free(&|v| {
                        if params.iter().any(|p| p == v) {
                            v.to_string()
                        } else {
                            format!("{}{}", v, suffix)
                        }
                    }));
                    q.map_formulas(|f| s.apply_formula(f))
                });
                self.chain.push(label);
                let r = self.expand(&renamed, &inner);
                self.chain.pop();
                r
            }
        }
    }

    fn chain_string(&self, last: &str) -> String {
        let mut items: Vec<&str> = self.chain.iter().map(String::as_str).collect();
        items.push(last);
        let skip = items.len().saturating_sub(20);
        items[skip..].join(" -> ")
    }
}

pub fn clauses_to_text(s: &[Clause]) -> String {
    s.iter().map(|c| format!("{}\n", c)).collect()
}

pub fn clauses_to_json(s: &[Clause]) -> serde_json::Value {
    json!(s
        .iter()
        .map(|c| json!({
            "ante": c.ante.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
            "succ": c.succ.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        }))
        .collect::<Vec<_>>())
}

fn tptp_term(t: &Term, vars: &mut BTreeMap<String, String>) -> String {
    match t {
        Term::Var(v) => {
            let next = format!("X{}", vars.len());
            vars.entry(v.clone()).or_insert(next).clone()
        }
        Term::Idx(x, k) => format!("{}_{}", x, k),
        Term::Num(k) => format!("n{}", k),
        Term::Fn(f, args) if args.is_empty() => f.clone(),
        Term::Fn(f, args) => format!(
            "{}({})",
            f,
            args.iter().map(|a| tptp_term(a, vars)).collect::<Vec<_>>().join(",")
        ),
        Term::MIter(..) | Term::MLadder(_) => {
            let n = t.normalize(&OmegaEnv::new()).unwrap_or_else(|_| t.clone());
            if n == *t {
                format!("undefined_{}", t.to_string().replace(|c: char| !c.is_alphanumeric(), "_"))
            } else {
                tptp_term(&n, vars)
            }
        }
    }
}

fn tptp_atom(a: &Atom, vars: &mut BTreeMap<String, String>) -> String {
    format!("{}({},{})", a.pred.tptp_name(), tptp_term(&a.lhs, vars), tptp_term(&a.rhs, vars))
}

/// TPTP CNF, one annotated formula per clause; `≤`, `<`, `=` become
/// `leq`, `lt`, `eq` and numerals `k` become constants `nk`.
pub fn clauses_to_tptp(s: &[Clause]) -> String {
    let mut out = String::new();
    for (i, c) in s.iter().enumerate() {
        let mut vars = BTreeMap::new();
        let mut lits: Vec<String> = c.ante.iter().map(|a| format!("~{}", tptp_atom(a, &mut vars))).collect();
        lits.extend(c.succ.iter().map(|a| tptp_atom(a, &mut vars)));
        let body = if lits.is_empty() { "$false".to_string() } else { lits.join(" | ") };
        out.push_str(&format!("cnf(c{}, axiom, ({})).\n", i + 1, body));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f_eq(t: Term, k: u64) -> Atom {
        Atom::colour(t, k)
    }

    #[test]
    fn times_merges_pairwise() {
        let l = ClauseSetTerm::clauses(&[Clause::new(vec![Atom::le(Term::s(v("β")), v("α"))], vec![])]);
        let r = ClauseSetTerm::clauses(&[Clause::new(vec![f_eq(v("α"), 0), f_eq(v("β"), 0)], vec![])]);
        let out = evaluate_clauses(&ClauseSetTerm::times(l, r)).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].to_string(), "s(β)<=α, f(α)=0, f(β)=0 |-");
    }

    #[test]
    fn plus_with_empty_leaf() {
        let s = ClauseSetTerm::clauses(&[c1(), c2()]);
        let out = evaluate_clauses(&ClauseSetTerm::plus(s, ClauseSetTerm::leaf(vec![]))).unwrap();
        assert_eq!(out, vec![c1(), c2()]);
    }

    #[test]
    fn distributes_over_two_element_set() {
        let a = Atom::le(v("a"), v("a"));
        let b = Atom::le(v("b"), v("b"));
        let c = Atom::le(v("c"), v("c"));
        let t = ClauseSetTerm::times(
            ClauseSetTerm::plus(
                ClauseSetTerm::clauses(&[Clause::new(vec![], vec![a.clone()])]),
                ClauseSetTerm::clauses(&[Clause::new(vec![], vec![b.clone()])]),
            ),
            ClauseSetTerm::clauses(&[Clause::new(vec![c.clone()], vec![])]),
        );
        let out = evaluate_clauses(&t).unwrap();
        assert_eq!(out, vec![Clause::new(vec![c.clone()], vec![a]), Clause::new(vec![c], vec![b])]);
    }

    #[test]
    fn tautologies() {
        let t = Clause::new(vec![f_eq(v("α"), 0)], vec![f_eq(v("α"), 0)]);
        assert!(tautology_elim(&[t.clone()]).is_empty());
        assert_eq!(tautology_elim(&nia_clause_set(2)), nia_clause_set(2));
        let b = Clause::new(vec![], vec![Atom::le(v("b"), v("b"))]);
        assert_eq!(tautology_elim(&[t, b.clone()]), vec![b]);
    }

    #[test]
    fn subsumption_examples() {
        let ground = Clause::new(vec![], vec![Atom::le(Term::s(Term::num(0)), Term::s(Term::num(0)))]);
        assert!(subsumes(&c1(), &ground));
        assert!(!subsumes(&c4(0), &c4(1)));
        assert_eq!(subsumption_reduce(&[c1(), ground]), vec![c1()]);
    }

    #[test]
    fn clause_set_sizes() {
        assert_eq!(nia_clause_set(0).len(), 5);
        assert_eq!(nia_clause_set(2).len(), 7);
        for n in 0..6 {
            assert_eq!(nia_clause_set(n).len() as u64, n + 5);
        }
        let text: Vec<String> = nia_clause_set(0).iter().map(|c| c.to_string()).collect();
        assert_eq!(
            text,
            vec![
                "|- α<=α",
                "max(α,β)<=γ |- α<=γ",
                "max(α,β)<=γ |- β<=γ",
                "f(β)=0, f(α)=0, s(β)<=α |-",
                "|- f(α)=0",
            ]
        );
    }

    #[test]
    fn variants() {
        let r = c4(1).rename_vars(&|v| format!("{}7", v));
        assert!(clause_variant(&c4(1), &r));
        assert!(!clause_variant(&c4(1), &c4(0)));
        assert!(!clause_variant(&c2(), &c3()));
        let swapped = Clause::new(vec![Atom::le(Term::max(v("a"), v("a")), v("c"))], vec![Atom::le(v("a"), v("c"))]);
        assert!(!clause_variant(&c2(), &swapped));
    }

    #[test]
    fn missing_rule_is_reported() {
        let mut rules = SymbolRules::default();
        rules.insert(
            "phi",
            Configuration::new(),
            SymbolRule {
                var: "n".into(),
                params: vec![],
                base: ClauseSetTerm::clauses(&[c1()]),
                step: ClauseSetTerm::symbol("chi", Configuration::new(), Omega::var("n")),
            },
        );
        let top = ClauseSetTerm::symbol("phi", Configuration::new(), Omega::var("n"));
        assert!(normalize_symbols(&rules, &top, 0).is_ok());
        assert!(matches!(normalize_symbols(&rules, &top, 1), Err(Error::MissingRule(_))));
    }

    #[test]
    fn budget_guard_fires() {
        let mut rules = SymbolRules::default();
        let looping = ClauseSetTerm::symbol("phi", Configuration::new(), Omega::var("n").succ());
        rules.insert(
            "phi",
            Configuration::new(),
            SymbolRule { var: "n".into(), params: vec![], base: looping.clone(), step: looping.clone() },
        );
        let err = normalize_symbols_with(&rules, &looping, 0, 50).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }

    #[test]
    fn tptp_export() {
        let t = clauses_to_tptp(&nia_clause_set(0));
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "cnf(c1, axiom, (leq(X0,X0))).");
        assert_eq!(lines[3], "cnf(c4, axiom, (~eq(f(X0),n0) | ~eq(f(X1),n0) | ~leq(s(X0),X1))).");
        assert_eq!(clauses_to_tptp(&[Clause::empty()]), "cnf(c1, axiom, ($false)).\n");
    }
}
