//! The `res(σ,P)` step, resolution trees, resolution proof schemata over
//! numerals and CR lists, unfolding, and tree checking.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::clause_sets::Clause;
use crate::crlist::CrList;
use crate::error::{Error, Result};
use crate::syntax::{relocate, Parser};
use crate::terms::{match_atom, Atom, Omega, OmegaEnv, Subst, SubstSchema, Term, VarKey};

fn res_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Resolution(msg.into()))
}

fn term_vars(c: &Clause) -> BTreeSet<String> {
    c.vars()
        .into_iter()
        .filter_map(|k| match k {
            VarKey::Ind(v) => Some(v),
            VarKey::Idx(..) => None,
        })
        .collect()
}

/// `res(σ,P)`: `c1 = Π ⊢ Δ, P*` and `c2 = P**, Π' ⊢ Δ'` give
/// `Πσ, Π'σ ⊢ Δσ, Δ'σ`, where σ maps every designated atom onto `P` and
/// leaves `P` fixed. Every succedent atom of `c1` and every antecedent atom
/// of `c2` that σ can collapse onto `P` without moving `P` is designated. Variables of `c2`
/// shared with `c1` but not with `P` are renamed apart first.
pub fn res_step(c1: &Clause, c2: &Clause, pivot: &Atom) -> Result<(Clause, Subst)> {
    let mut pv = BTreeSet::new();
    pivot.vars(&mut pv);
    let shared: BTreeSet<String> = term_vars(c1)
        .intersection(&term_vars(c2))
        .filter(|v| !pv.contains(&VarKey::Ind((*v).clone())))
        .cloned()
        .collect();
    let taken: BTreeSet<String> = term_vars(c1).union(&term_vars(c2)).cloned().collect();
    let c2 = if shared.is_empty() {
        c2.clone()
    } else {
        let fresh = |v: &str| {
            if !shared.contains(v) {
                return v.to_string();
            }
            let mut name = format!("{}'", v);
            while taken.contains(&name) {
                name.push('\'');
            }
            name
        };
        c2.rename_vars(&fresh)
    };

    let mut sigma = Subst::new();
    let mut pos = vec![false; c1.succ.len()];
    let mut neg = vec![false; c2.ante.len()];
    for (atoms, marks) in [(&c1.succ, &mut pos), (&c2.ante, &mut neg)] {
        for (i, a) in atoms.iter().enumerate() {
            let mut trial = sigma.clone();
            if match_atom(a, pivot, &mut trial) && trial.apply_atom(pivot) == *pivot {
                sigma = trial;
                marks[i] = true;
            }
        }
    }
    if !pos.contains(&true) {
        return res_err(format!("no succedent atom of `{}` unifies with {}", c1, pivot));
    }
    if !neg.contains(&true) {
        return res_err(format!("no antecedent atom of `{}` unifies with {}", c2, pivot));
    }
    if sigma.apply_atom(pivot) != *pivot {
        return res_err(format!("unifier {} moves the pivot {}", sigma, pivot));
    }
    let keep = |atoms: &[Atom], marks: &[bool]| -> Vec<Atom> {
        atoms
            .iter()
            .zip(marks)
            .filter(|(_, m)| !**m)
            .map(|(a, _)| sigma.apply_atom(a))
            .filter(|a| a != pivot)
            .collect()
    };
    let mut ante: Vec<Atom> = c1.ante.iter().map(|a| sigma.apply_atom(a)).collect();
    ante.extend(keep(&c2.ante, &neg));
    let mut succ = keep(&c1.succ, &pos);
    succ.extend(c2.succ.iter().map(|a| sigma.apply_atom(a)));
    Ok((Clause::new(ante, succ), sigma))
}

#[derive(Debug, PartialEq, Eq)]
pub enum TreeNode {
    Leaf {
        clause: Clause,
    },
    /// `left` carries the pivot in its succedent, `right` in its antecedent.
    Res {
        left: ResolutionTree,
        right: ResolutionTree,
        pivot: Atom,
        sigma: Subst,
        contract: bool,
        conclusion: Clause,
    },
}

/// An immutable resolution derivation; subtrees are shared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolutionTree(Arc<TreeNode>);

impl ResolutionTree {
    pub fn leaf(clause: Clause) -> ResolutionTree {
        ResolutionTree(Arc::new(TreeNode::Leaf { clause }))
    }

    /// Resolves `left` (pivot in the succedent) with `right`.
    pub fn resolve(left: ResolutionTree, right: ResolutionTree, pivot: Atom, contract: bool) -> Result<ResolutionTree> {
        let (mut conclusion, sigma) = res_step(left.conclusion(), right.conclusion(), &pivot)?;
        if contract {
            conclusion = conclusion.contract();
        }
        Ok(ResolutionTree(Arc::new(TreeNode::Res { left, right, pivot, sigma, contract, conclusion })))
    }

    /// As [`ResolutionTree::resolve`], trying both orientations.
    pub fn resolve_auto(a: ResolutionTree, b: ResolutionTree, pivot: Atom, contract: bool) -> Result<ResolutionTree> {
        match ResolutionTree::resolve(a.clone(), b.clone(), pivot.clone(), contract) {
            Ok(t) => Ok(t),
            Err(first) => ResolutionTree::resolve(b, a, pivot, contract).map_err(|_| first),
        }
    }

    /// A node taken as given, e.g. from parsed input; `check_tree` re-verifies it.
    pub fn node_unchecked(
        left: ResolutionTree,
        right: ResolutionTree,
        pivot: Atom,
        contract: bool,
        conclusion: Clause,
    ) -> ResolutionTree {
        let sigma = res_step(left.conclusion(), right.conclusion(), &pivot).map(|r| r.1).unwrap_or_default();
        ResolutionTree(Arc::new(TreeNode::Res { left, right, pivot, sigma, contract, conclusion }))
    }

    pub fn node(&self) -> &TreeNode {
        &self.0
    }

    pub fn conclusion(&self) -> &Clause {
        match &*self.0 {
            TreeNode::Leaf { clause } => clause,
            TreeNode::Res { conclusion, .. } => conclusion,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(&*self.0, TreeNode::Leaf { .. })
    }

    fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// Number of inferences plus leaves, counting shared subtrees once per use.
    pub fn size(&self) -> u64 {
        fn go(t: &ResolutionTree, memo: &mut HashMap<usize, u64>) -> u64 {
            if let Some(&k) = memo.get(&t.key()) {
                return k;
            }
            let k = match t.node() {
                TreeNode::Leaf { .. } => 1,
                TreeNode::Res { left, right, .. } => 1 + go(left, memo) + go(right, memo),
            };
            memo.insert(t.key(), k);
            k
        }
        go(self, &mut HashMap::new())
    }

    pub fn depth(&self) -> usize {
        match self.node() {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Res { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Distinct nodes in pre-order of first visit.
    pub fn unique_nodes(&self) -> Vec<ResolutionTree> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            if !seen.insert(t.key()) {
                continue;
            }
            if let TreeNode::Res { left, right, .. } = t.node() {
                stack.push(right.clone());
                stack.push(left.clone());
            }
            out.push(t);
        }
        out
    }

    pub fn leaf_clauses(&self) -> Vec<Clause> {
        let mut out: Vec<Clause> = Vec::new();
        for t in self.unique_nodes() {
            if let TreeNode::Leaf { clause } = t.node() {
                if !out.contains(clause) {
                    out.push(clause.clone());
                }
            }
        }
        out
    }

    /// Conclusions of all distinct nodes, leaves included.
    pub fn conclusions(&self) -> Vec<Clause> {
        self.unique_nodes().iter().map(|t| t.conclusion().clone()).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out, 0);
        out
    }

    fn write_text(&self, out: &mut String, depth: usize) {
        let pad = "  ".repeat(depth);
        match self.node() {
            TreeNode::Leaf { clause } => out.push_str(&format!("{}leaf {}\n", pad, clause)),
            TreeNode::Res { left, right, pivot, contract, conclusion, .. } => {
                let c = if *contract { " [c]" } else { "" };
                out.push_str(&format!("{}res {}{} :: {}\n", pad, pivot, c, conclusion));
                left.write_text(out, depth + 1);
                right.write_text(out, depth + 1);
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self.node() {
            TreeNode::Leaf { clause } => json!({ "kind": "leaf", "clause": clause.to_string() }),
            TreeNode::Res { left, right, pivot, sigma, contract, conclusion } => {
                let s: serde_json::Map<String, Value> = sigma
                    .bindings()
                    .map(|(k, t)| (k.to_string(), Value::String(t.to_string())))
                    .collect();
                json!({
                    "kind": "res",
                    "pivot": pivot.to_string(),
                    "sigma": s,
                    "contract": contract,
                    "conclusion": conclusion.to_string(),
                    "left": left.to_json(),
                    "right": right.to_json(),
                })
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<ResolutionTree> {
        let field = |k: &str| -> Result<&str> {
            v.get(k).and_then(Value::as_str).ok_or_else(|| Error::Load(format!("tree node without `{}`", k)))
        };
        match field("kind")? {
            "leaf" => Ok(ResolutionTree::leaf(field("clause")?.parse()?)),
            "res" => {
                let sub = |k: &str| v.get(k).ok_or_else(|| Error::Load(format!("tree node without `{}`", k)));
                let left = ResolutionTree::from_json(sub("left")?)?;
                let right = ResolutionTree::from_json(sub("right")?)?;
                let contract = v.get("contract").and_then(Value::as_bool).unwrap_or(false);
                Ok(ResolutionTree::node_unchecked(left, right, field("pivot")?.parse()?, contract, field("conclusion")?.parse()?))
            }
            other => Err(Error::Load(format!("unknown tree node kind `{}`", other))),
        }
    }

    pub fn to_dot(&self) -> String {
        let nodes = self.unique_nodes();
        let ids: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, t)| (t.key(), i)).collect();
        let esc = |s: String| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("digraph refutation {\n  rankdir=BT;\n  node [shape=box, fontname=\"monospace\"];\n");
        for (i, t) in nodes.iter().enumerate() {
            let shape = if t.is_leaf() { ", style=rounded" } else { "" };
            out.push_str(&format!("  n{} [label=\"{}\"{}];\n", i, esc(t.conclusion().to_string()), shape));
        }
        for (i, t) in nodes.iter().enumerate() {
            if let TreeNode::Res { left, right, pivot, .. } = t.node() {
                let p = esc(pivot.to_string());
                out.push_str(&format!("  n{} -> n{} [label=\"{}\"];\n", ids[&left.key()], i, p));
                out.push_str(&format!("  n{} -> n{};\n", ids[&right.key()], i));
            }
        }
        out.push_str("}\n");
        out
    }
}

impl fmt::Display for ResolutionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Parses the indented text form written by [`ResolutionTree::to_text`].
pub fn parse_tree(src: &str) -> Result<ResolutionTree> {
    let lines: Vec<(usize, &str)> = src
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'))
        .collect();
    let mut i = 0;
    let t = parse_tree_at(&lines, &mut i, 0)?;
    if let Some((n, _)) = lines.get(i) {
        return Err(Error::Syntax { line: n + 1, col: 1, msg: "trailing tree lines".into() });
    }
    Ok(t)
}

fn parse_tree_at(lines: &[(usize, &str)], i: &mut usize, depth: usize) -> Result<ResolutionTree> {
    let Some(&(n, line)) = lines.get(*i) else {
        let last = lines.last().map_or(0, |l| l.0 + 1);
        return Err(Error::Syntax { line: last + 1, col: 1, msg: "missing subtree".into() });
    };
    let indent = line.len() - line.trim_start_matches(' ').len();
    if indent != 2 * depth {
        return Err(Error::Syntax { line: n + 1, col: indent + 1, msg: format!("expected indentation {}", 2 * depth) });
    }
    *i += 1;
    let mut p = Parser::new(line);
    if p.eat("leaf") {
        let c = p.clause().and_then(|c| p.expect_end().map(|_| c)).map_err(|e| relocate(e, n))?;
        return Ok(ResolutionTree::leaf(c));
    }
    if !p.eat("res") {
        return Err(relocate(p.error::<()>("expected `leaf` or `res`").unwrap_err(), n));
    }
    let head = (|| {
        let pivot = p.atom()?;
        let contract = p.eat("[c]");
        p.expect("::")?;
        let c = p.clause()?;
        p.expect_end()?;
        Ok((pivot, contract, c))
    })();
    let (pivot, contract, conclusion) = head.map_err(|e| relocate(e, n))?;
    let left = parse_tree_at(lines, i, depth + 1)?;
    let right = parse_tree_at(lines, i, depth + 1)?;
    Ok(ResolutionTree::node_unchecked(left, right, pivot, contract, conclusion))
}

/// Whether `leaf` is an instance of `base`: first by a substitution
/// alone, then by a substitution followed by contraction.
pub fn instance_of(base: &Clause, leaf: &Clause) -> Option<Subst> {
    for contract in [false, true] {
        if !contract && (base.ante.len() != leaf.ante.len() || base.succ.len() != leaf.succ.len()) {
            continue;
        }
        let lits: Vec<(bool, &Atom)> =
            base.ante.iter().map(|a| (false, a)).chain(base.succ.iter().map(|a| (true, a))).collect();
        let leaf = if contract { leaf.contract() } else { leaf.clone() };
        let mut hit_a = vec![0usize; leaf.ante.len()];
        let mut hit_s = vec![0usize; leaf.succ.len()];
        if let Some(s) = inst_go(&lits, &leaf, contract, &mut hit_a, &mut hit_s, Subst::new()) {
            return Some(s);
        }
    }
    None
}

fn inst_go(
    lits: &[(bool, &Atom)],
    leaf: &Clause,
    contract: bool,
    hit_a: &mut Vec<usize>,
    hit_s: &mut Vec<usize>,
    s: Subst,
) -> Option<Subst> {
    let Some(((pol, a), rest)) = lits.split_first() else {
        return (hit_a.iter().chain(hit_s.iter()).all(|&h| h > 0)).then_some(s);
    };
    let side = if *pol { &leaf.succ } else { &leaf.ante };
    for i in 0..side.len() {
        let hits = if *pol { &mut *hit_s } else { &mut *hit_a };
        if !contract && hits[i] > 0 {
            continue;
        }
        let mut trial = s.clone();
        if match_atom(a, &side[i], &mut trial) {
            hits[i] += 1;
            let r = inst_go(rest, leaf, contract, hit_a, hit_s, trial);
            let hits = if *pol { &mut *hit_s } else { &mut *hit_a };
            hits[i] -= 1;
            if r.is_some() {
                return r;
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    /// Pre-order number among distinct nodes; the root is 0.
    pub id: usize,
    pub clause: Clause,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub root: Clause,
    pub is_refutation: bool,
    pub distinct_nodes: usize,
    pub size: u64,
    pub leaf_failures: Vec<Failure>,
    pub node_failures: Vec<Failure>,
    /// How many distinct leaves instantiate each base clause, by base index.
    pub leaf_sources: BTreeMap<usize, usize>,
}

impl Verdict {
    /// Every leaf is a base instance and every step re-verifies.
    pub fn sound(&self) -> bool {
        self.leaf_failures.is_empty() && self.node_failures.is_empty()
    }

    pub fn passes(&self) -> bool {
        self.sound() && self.is_refutation
    }

    pub fn to_json(&self) -> Value {
        let f = |v: &[Failure]| -> Value {
            v.iter().map(|x| json!({"id": x.id, "clause": x.clause.to_string(), "reason": x.reason})).collect()
        };
        json!({
            "root": self.root.to_string(),
            "is_refutation": self.is_refutation,
            "sound": self.sound(),
            "distinct_nodes": self.distinct_nodes,
            "size": self.size,
            "leaf_failures": f(&self.leaf_failures),
            "node_failures": f(&self.node_failures),
        })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "root: {}", self.root)?;
        writeln!(f, "refutation: {}", self.is_refutation)?;
        writeln!(f, "size: {} ({} distinct nodes)", self.size, self.distinct_nodes)?;
        for x in &self.leaf_failures {
            writeln!(f, "leaf #{} `{}`: {}", x.id, x.clause, x.reason)?;
        }
        for x in &self.node_failures {
            writeln!(f, "node #{} `{}`: {}", x.id, x.clause, x.reason)?;
        }
        Ok(())
    }
}

fn same_clause(a: &Clause, b: &Clause, contract: bool) -> bool {
    if contract {
        a.as_sets() == b.as_sets()
    } else {
        a.sorted() == b.sorted()
    }
}

/// Re-verifies every leaf against `base` and every node by `res_step`.
pub fn check_tree(t: &ResolutionTree, base: &[Clause]) -> Verdict {
    let mut v = Verdict {
        root: t.conclusion().clone(),
        is_refutation: t.conclusion().is_empty(),
        distinct_nodes: 0,
        size: t.size(),
        leaf_failures: Vec::new(),
        node_failures: Vec::new(),
        leaf_sources: BTreeMap::new(),
    };
    let mut leaf_memo: HashMap<Clause, Option<usize>> = HashMap::new();
    let nodes = t.unique_nodes();
    v.distinct_nodes = nodes.len();
    for (id, n) in nodes.iter().enumerate() {
        match n.node() {
            TreeNode::Leaf { clause } => {
                let src = *leaf_memo
                    .entry(clause.clone())
                    .or_insert_with(|| base.iter().position(|b| instance_of(b, clause).is_some()));
                match src {
                    Some(i) => *v.leaf_sources.entry(i).or_default() += 1,
                    None => v.leaf_failures.push(Failure {
                        id,
                        clause: clause.clone(),
                        reason: "not an instance of any base clause".into(),
                    }),
                }
            }
            TreeNode::Res { left, right, pivot, contract, conclusion, .. } => {
                match res_step(left.conclusion(), right.conclusion(), pivot) {
                    Ok((c, _)) => {
                        let c = if *contract { c.contract() } else { c };
                        if !same_clause(&c, conclusion, *contract) {
                            v.node_failures.push(Failure {
                                id,
                                clause: conclusion.clone(),
                                reason: format!("premises resolve to `{}`", c),
                            });
                        }
                    }
                    Err(e) => v.node_failures.push(Failure { id, clause: conclusion.clone(), reason: e.to_string() }),
                }
            }
        }
    }
    v
}

/// Pseudo ω-variables bound to measures of the current CR list.
pub const CR_LEN: &str = "|C|";
pub const CR_MID: &str = "⌊C⌋";
pub const CR_LEN_RETURN: &str = "|C<<|";
pub const CR_LEN_SHIFT: &str = "|C>>|";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CrExpr {
    /// The list the rule was applied at.
    Arg,
    Shift(Box<CrExpr>),
    Return(Box<CrExpr>),
    Rotate(Box<CrExpr>),
    /// `CR_t`.
    Canonical(Omega),
}

impl CrExpr {
    pub fn shift(self) -> CrExpr {
        CrExpr::Shift(Box::new(self))
    }

    pub fn ret(self) -> CrExpr {
        CrExpr::Return(Box::new(self))
    }

    pub fn rotate(self) -> CrExpr {
        CrExpr::Rotate(Box::new(self))
    }

    fn eval(&self, arg: Option<&CrList>, env: &OmegaEnv) -> Result<CrList> {
        Ok(match self {
            CrExpr::Arg => arg.cloned().ok_or_else(|| Error::InvalidSchema("CR argument outside CR mode".into()))?,
            CrExpr::Shift(e) => e.eval(arg, env)?.shift(),
            CrExpr::Return(e) => e.eval(arg, env)?.carriage_return(),
            CrExpr::Rotate(e) => e.eval(arg, env)?.rotate(),
            CrExpr::Canonical(o) => CrList::canonical(o.eval(env)?),
        })
    }
}

impl fmt::Display for CrExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrExpr::Arg => write!(f, "C"),
            CrExpr::Shift(e) => write!(f, "{}>>", e),
            CrExpr::Return(e) => write!(f, "{}<<", e),
            CrExpr::Rotate(e) => write!(f, "rot({})", e),
            CrExpr::Canonical(o) => write!(f, "CR_{{{}}}", o),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexExpr {
    Num(Omega),
    Cr(CrExpr),
}

impl fmt::Display for IndexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexExpr::Num(o) => write!(f, "{}", o),
            IndexExpr::Cr(c) => write!(f, "{}", c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Index {
    Num(u64),
    Cr(CrList),
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Num(k) => write!(f, "{}", k),
            Index::Cr(c) => write!(f, "{}", c),
        }
    }
}

/// `X1 ∘ … ∘ Xk ∘ lits ∘ (⊢ f(t)=0, …, f(t)=hi)…`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClauseExpr {
    pub vars: Vec<String>,
    pub lits: Clause,
    /// Schematic colour covers `(t, hi)`.
    pub covers: Vec<(Term, Omega)>,
}

impl ClauseExpr {
    pub fn lits(c: Clause) -> ClauseExpr {
        ClauseExpr { lits: c, ..ClauseExpr::default() }
    }

    pub fn var(x: &str) -> ClauseExpr {
        ClauseExpr { vars: vec![x.to_string()], ..ClauseExpr::default() }
    }

    pub fn cover(t: Term, hi: Omega) -> ClauseExpr {
        ClauseExpr { covers: vec![(t, hi)], ..ClauseExpr::default() }
    }

    pub fn with(mut self, x: &str) -> ClauseExpr {
        self.vars.push(x.to_string());
        self
    }
}

impl fmt::Display for ClauseExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.lits.is_empty() || (self.covers.is_empty() && self.vars.is_empty()) {
            parts.push(self.lits.to_string());
        }
        parts.extend(self.covers.iter().map(|(t, hi)| format!("|- f({})=0..{}", t, hi)));
        parts.extend(self.vars.iter().cloned());
        write!(f, "{}", parts.join(" o "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RTerm {
    Leaf(ClauseExpr),
    Res { left: Box<RTerm>, right: Box<RTerm>, pivot: Atom, contract: bool },
    Call { symbol: String, index: IndexExpr, omega_args: Vec<Omega>, families: Vec<String>, clause_args: Vec<ClauseExpr> },
}

impl RTerm {
    pub fn leaf(c: ClauseExpr) -> RTerm {
        RTerm::Leaf(c)
    }

    pub fn res(left: RTerm, right: RTerm, pivot: Atom) -> RTerm {
        RTerm::Res { left: Box::new(left), right: Box::new(right), pivot, contract: true }
    }

    fn calls(&self, out: &mut Vec<(String, IndexExpr)>) {
        match self {
            RTerm::Leaf(_) => {}
            RTerm::Res { left, right, .. } => {
                left.calls(out);
                right.calls(out);
            }
            RTerm::Call { symbol, index, .. } => out.push((symbol.clone(), index.clone())),
        }
    }
}

impl fmt::Display for RTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RTerm::Leaf(c) => write!(f, "[{}]", c),
            RTerm::Res { left, right, pivot, .. } => write!(f, "r({}; {}; {})", left, right, pivot),
            RTerm::Call { symbol, index, omega_args, families, clause_args } => {
                let mut parts = vec![index.to_string()];
                parts.extend(omega_args.iter().map(|o| o.to_string()));
                parts.extend(families.iter().cloned());
                parts.extend(clause_args.iter().map(|c| c.to_string()));
                write!(f, "{}({})", symbol, parts.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rules {
    /// `ϱ(0) → base`, `ϱ(var+1) → step`.
    Numeral { var: String, base: RTerm, step: RTerm },
    /// `ϱ(<||>) → empty`, `ϱ(<F|m|>) → last`, `ϱ(<F|m|B>) → general`.
    Cr { empty: RTerm, last: RTerm, general: RTerm },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaSymbol {
    pub name: String,
    pub omega_params: Vec<String>,
    pub family_params: Vec<String>,
    pub clause_params: Vec<String>,
    pub rules: Rules,
}

impl SchemaSymbol {
    fn head(&self, index: &str) -> String {
        let mut parts = vec![index.to_string()];
        parts.extend(self.omega_params.iter().cloned());
        parts.extend(self.family_params.iter().cloned());
        parts.extend(self.clause_params.iter().cloned());
        format!("{}({})", self.name, parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolutionSchema {
    pub symbols: Vec<SchemaSymbol>,
}

impl fmt::Display for ResolutionSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            match &s.rules {
                Rules::Numeral { var, base, step } => {
                    writeln!(f, "{} -> {}", s.head("0"), base)?;
                    writeln!(f, "{} -> {}", s.head(&format!("{}+1", var)), step)?;
                }
                Rules::Cr { empty, last, general } => {
                    writeln!(f, "{} -> {}", s.head("<||>"), empty)?;
                    writeln!(f, "{} -> {}", s.head("<F|m|>"), last)?;
                    writeln!(f, "{} -> {}", s.head("<F|m|B>"), general)?;
                }
            }
        }
        Ok(())
    }
}

/// Bounds recursion depth independently of the step budget.
pub const MAX_DEPTH: usize = 2_000;

/// Unfolding recurses once per rewrite; it runs on a thread with this stack.
const UNFOLD_STACK: usize = 1 << 30;

impl ResolutionSchema {
    pub fn position(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    /// The call-ordering constraints of each mode.
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.symbols.iter().enumerate() {
            let bodies: Vec<(&str, &RTerm)> = match &s.rules {
                Rules::Numeral { base, step, .. } => vec![("base", base), ("step", step)],
                Rules::Cr { empty, last, general } => vec![("empty", empty), ("last", last), ("general", general)],
            };
            for (which, body) in bodies {
                let mut calls = Vec::new();
                body.calls(&mut calls);
                for (callee, index) in calls {
                    let j = self
                        .position(&callee)
                        .ok_or_else(|| Error::InvalidSchema(format!("{} calls unknown symbol {}", s.name, callee)))?;
                    if j > i {
                        continue;
                    }
                    let ok = match (&s.rules, which, &index) {
                        (Rules::Numeral { var, .. }, "step", IndexExpr::Num(o)) => j == i && *o == Omega::var(var),
                        (Rules::Cr { .. }, "last" | "general", IndexExpr::Cr(CrExpr::Return(e))) => **e == CrExpr::Arg,
                        (Rules::Cr { .. }, "general", IndexExpr::Cr(CrExpr::Shift(e))) => j == i && **e == CrExpr::Arg,
                        _ => false,
                    };
                    if !ok {
                        return Err(Error::InvalidSchema(format!(
                            "{} rule of {} may not call {}({})",
                            which, s.name, callee, index
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

type MemoKey = (usize, Index, Vec<u64>, Vec<String>, Vec<Clause>);

pub struct Unfolder<'a> {
    schema: &'a ResolutionSchema,
    vartheta: &'a SubstSchema,
    budget: u64,
    steps: u64,
    chain: Vec<String>,
    memo: HashMap<MemoKey, ResolutionTree>,
}

impl<'a> Unfolder<'a> {
    pub fn new(schema: &'a ResolutionSchema, vartheta: &'a SubstSchema, budget: u64) -> Unfolder<'a> {
        Unfolder { schema, vartheta, budget, steps: 0, chain: Vec::new(), memo: HashMap::new() }
    }

    /// Work spent so far: one per rewrite step plus the size of every clause built, in
    /// clause arguments, leaves and resolvents.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn budget_error(&self, label: &str) -> Error {
        let mut items: Vec<&str> = self.chain.iter().map(String::as_str).collect();
        items.push(label);
        let skip = items.len().saturating_sub(20);
        Error::Budget { budget: self.budget, chain: items[skip..].join(" -> ") }
    }

    /// The normal form of `entry(index, ν(w̄), ū, θ(X̄))` under ϑ.
    pub fn unfold(&mut self, entry: &str, index: Index, theta: &BTreeMap<String, Clause>, nu: &OmegaEnv) -> Result<ResolutionTree> {
        std::thread::scope(|scope| {
            std::thread::Builder::new()
                .stack_size(UNFOLD_STACK)
                .spawn_scoped(scope, || self.unfold_here(entry, index, theta, nu))
                .map_err(|e| Error::Resolution(format!("cannot start unfolding: {}", e)))?
                .join()
                .unwrap_or_else(|p| std::panic::resume_unwind(p))
        })
    }

    fn unfold_here(&mut self, entry: &str, index: Index, theta: &BTreeMap<String, Clause>, nu: &OmegaEnv) -> Result<ResolutionTree> {
        let i = self.schema.position(entry).ok_or_else(|| Error::UnknownSymbol(entry.into()))?;
        let s = &self.schema.symbols[i];
        let omegas =
            s.omega_params.iter().map(|w| nu.get(w).copied().ok_or_else(|| Error::UnboundOmegaVar(w.clone()))).collect::<Result<_>>()?;
        let clauses = s
            .clause_params
            .iter()
            .map(|x| theta.get(x).cloned().ok_or_else(|| Error::InvalidSchema(format!("θ does not bind {}", x))))
            .collect::<Result<_>>()?;
        self.call(i, index, omegas, s.family_params.clone(), clauses)
    }

    fn call(&mut self, i: usize, index: Index, omegas: Vec<u64>, families: Vec<String>, clauses: Vec<Clause>) -> Result<ResolutionTree> {
        let key = (i, index, omegas, families, clauses);
        if let Some(t) = self.memo.get(&key) {
            return Ok(t.clone());
        }
        let (i, index, omegas, families, clauses) = key;
        let sym = &self.schema.symbols[i];
        let label = format!(
            "{}({}{})",
            sym.name,
            index,
            omegas.iter().map(|k| format!(",{}", k)).collect::<String>()
        );
        // Clause sizes count as work too, so schemata that accumulate clauses
        // along a cycle stay within memory.
        self.steps += 1 + clauses.iter().map(|c| c.size() as u64).sum::<u64>();
        if self.steps > self.budget || self.chain.len() >= MAX_DEPTH {
            return Err(self.budget_error(&label));
        }
        let mut env: OmegaEnv = sym.omega_params.iter().cloned().zip(omegas.iter().copied()).collect();
        let body = match (&sym.rules, &index) {
            (Rules::Numeral { base, .. }, Index::Num(0)) => base,
            (Rules::Numeral { var, step, .. }, Index::Num(k)) => {
                env.insert(var.clone(), k - 1);
                step
            }
            (Rules::Cr { empty, last, general }, Index::Cr(c)) => {
                env.insert(CR_LEN.into(), c.len() as u64);
                env.insert(CR_LEN_RETURN.into(), c.carriage_return().len() as u64);
                env.insert(CR_LEN_SHIFT.into(), c.shift().len() as u64);
                if let Some(m) = c.focus() {
                    let m = m.as_num().ok_or_else(|| Error::NotGround(m.to_string()))?;
                    env.insert(CR_MID.into(), m);
                }
                if c.is_empty() {
                    empty
                } else if c.is_fully_shifted() {
                    last
                } else {
                    general
                }
            }
            _ => return Err(Error::MissingRule(label)),
        };
        let fam: BTreeMap<String, String> = sym.family_params.iter().cloned().zip(families.iter().cloned()).collect();
        let cenv: BTreeMap<String, Clause> = sym.clause_params.iter().cloned().zip(clauses.iter().cloned()).collect();
        let cr = match &index {
            Index::Cr(c) => Some(c.clone()),
            Index::Num(_) => None,
        };
        self.chain.push(label);
        let r = self.instantiate(body, cr.as_ref(), &env, &fam, &cenv);
        self.chain.pop();
        let t = r?;
        self.memo.insert((i, index, omegas, families, clauses), t.clone());
        Ok(t)
    }

    fn charge(&mut self, atoms: usize) -> Result<()> {
        self.steps += atoms as u64;
        if self.steps > self.budget {
            return Err(self.budget_error("…"));
        }
        Ok(())
    }

    fn ground_atom(&self, a: &Atom, env: &OmegaEnv, fam: &BTreeMap<String, String>) -> Result<Atom> {
        let a = a.map_terms(|t| t.rename_families(fam)).normalize(env)?;
        self.vartheta.apply_atom(&a)?.normalize(&OmegaEnv::new())
    }

    fn clause(&self, ce: &ClauseExpr, env: &OmegaEnv, fam: &BTreeMap<String, String>, cenv: &BTreeMap<String, Clause>) -> Result<Clause> {
        let mut c = ce.lits.map_atoms(|a| self.ground_atom(a, env, fam))?;
        for (t, hi) in &ce.covers {
            let hi = hi.eval(env)?;
            let succ = (0..=hi).map(|i| Atom::eq(Term::f(t.clone()), Term::num(i))).collect();
            c = c.merge(&Clause::new(vec![], succ).map_atoms(|a| self.ground_atom(a, env, fam))?);
        }
        for x in &ce.vars {
            let v = cenv.get(x).ok_or_else(|| Error::InvalidSchema(format!("unbound clause variable {}", x)))?;
            c = c.merge(v);
        }
        Ok(c)
    }

    fn instantiate(
        &mut self,
        t: &RTerm,
        cr: Option<&CrList>,
        env: &OmegaEnv,
        fam: &BTreeMap<String, String>,
        cenv: &BTreeMap<String, Clause>,
    ) -> Result<ResolutionTree> {
        match t {
            RTerm::Leaf(ce) => {
                let c = self.clause(ce, env, fam, cenv)?;
                self.charge(c.size())?;
                Ok(ResolutionTree::leaf(c))
            }
            RTerm::Res { left, right, pivot, contract } => {
                let l = self.instantiate(left, cr, env, fam, cenv)?;
                let r = self.instantiate(right, cr, env, fam, cenv)?;
                let p = self.ground_atom(pivot, env, fam)?;
                let t = ResolutionTree::resolve_auto(l, r, p, *contract).map_err(|e| {
                    let at = self.chain.last().cloned().unwrap_or_default();
                    Error::Resolution(format!("{} in {}", e, at))
                })?;
                self.charge(t.conclusion().size())?;
                Ok(t)
            }
            RTerm::Call { symbol, index, omega_args, families, clause_args } => {
                let j = self.schema.position(symbol).ok_or_else(|| Error::UnknownSymbol(symbol.clone()))?;
                let idx = match index {
                    IndexExpr::Num(o) => Index::Num(o.eval(env)?),
                    IndexExpr::Cr(e) => Index::Cr(e.eval(cr, env)?),
                };
                let omegas = omega_args.iter().map(|o| o.eval(env)).collect::<Result<Vec<_>>>()?;
                let fams = families.iter().map(|f| fam.get(f).cloned().unwrap_or_else(|| f.clone())).collect();
                let clauses = clause_args.iter().map(|c| self.clause(c, env, fam, cenv)).collect::<Result<Vec<_>>>()?;
                self.call(j, idx, omegas, fams, clauses)
            }
        }
    }
}

pub fn unfold(
    schema: &ResolutionSchema,
    entry: &str,
    index: Index,
    theta: &BTreeMap<String, Clause>,
    nu: &OmegaEnv,
    vartheta: &SubstSchema,
    budget: u64,
) -> Result<ResolutionTree> {
    Unfolder::new(schema, vartheta, budget).unfold(entry, index, theta, nu)
}

/// `t[x := s]` for an individual variable.
pub fn subst_var(x: &str, s: Term) -> Subst {
    let mut sub = Subst::new();
    sub.bind(VarKey::Ind(x.to_string()), s);
    sub
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clause_sets::{c3, nia_clause_set, DEFAULT_BUDGET};
    use crate::syntax::{parse_atom, parse_clause};

    fn cl(s: &str) -> Clause {
        parse_clause(s).unwrap()
    }

    fn at(s: &str) -> Atom {
        parse_atom(s).unwrap()
    }

    #[test]
    fn first_worked_step() {
        // ⊢ y1≤y1 against max(s(y0),y0)≤y1 ⊢ s(y0)≤y1, with y0 = 0, y1 = max(s(0),0).
        let y1 = "max(s(0),0)";
        let left = cl(&format!("|- {}<={}", y1, y1));
        let right = cl(&format!("max(s(0),0)<={} |- s(0)<={}", y1, y1));
        let (c, _) = res_step(&left, &right, &at(&format!("max(s(0),0)<={}", y1))).unwrap();
        assert_eq!(c.to_string(), format!("|- s(0)<={}", y1));
    }

    #[test]
    fn complementary_units_give_empty_clause() {
        let (c, s) = res_step(&cl("|- f(0)=1"), &cl("f(0)=1 |-"), &at("f(0)=1")).unwrap();
        assert!(c.is_empty());
        assert!(s.is_empty());
    }

    #[test]
    fn lemma_step_with_c3() {
        // ⊢ P against C3 on P = max(s(x_2),t) ≤ m(1,x,max(s(x_2),t)).
        let p = at("max(s(x_2),t)<=max(s(x_1),max(s(x_2),t))");
        let (c, s) = res_step(&Clause::new(vec![], vec![p.clone()]), &c3(), &p).unwrap();
        assert_eq!(c.to_string(), "|- t<=max(s(x_1),max(s(x_2),t))");
        assert_eq!(s.get(&VarKey::Ind("β".into())), Some(&Term::var("t")));
        assert_eq!(s.get(&VarKey::Ind("α".into())), Some(&parse_term_str("s(x_2)")));
    }

    fn parse_term_str(s: &str) -> Term {
        s.parse().unwrap()
    }

    #[test]
    fn all_occurrences_are_removed() {
        let (c, _) = res_step(&cl("|- f(0)=0, f(0)=0, f(1)=1"), &cl("f(0)=0, f(0)=0 |- f(2)=2"), &at("f(0)=0")).unwrap();
        assert_eq!(c.to_string(), "|- f(1)=1, f(2)=2");
    }

    #[test]
    fn missing_pivot_is_an_error() {
        assert!(matches!(res_step(&cl("|- f(0)=0"), &cl("f(1)=1 |-"), &at("f(0)=0")), Err(Error::Resolution(_))));
        assert!(matches!(res_step(&cl("f(0)=0 |-"), &cl("f(0)=0 |-"), &at("f(0)=0")), Err(Error::Resolution(_))));
    }

    #[test]
    fn shared_variables_are_renamed_apart() {
        let (c, _) = res_step(&cl("|- f(z)=0, z<=z"), &cl("f(0)=0 |- z<=a"), &at("f(0)=0")).unwrap();
        assert_eq!(c.to_string(), "|- 0<=0, z'<=a");
    }

    fn toy_schema() -> ResolutionSchema {
        let a = at("a<=a");
        ResolutionSchema {
            symbols: vec![SchemaSymbol {
                name: "rho".into(),
                omega_params: vec![],
                family_params: vec![],
                clause_params: vec![],
                rules: Rules::Numeral {
                    var: "k".into(),
                    base: RTerm::leaf(ClauseExpr::lits(Clause::new(vec![], vec![a.clone()]))),
                    step: RTerm::res(
                        RTerm::Call {
                            symbol: "rho".into(),
                            index: IndexExpr::Num(Omega::var("k")),
                            omega_args: vec![],
                            families: vec![],
                            clause_args: vec![],
                        },
                        RTerm::leaf(ClauseExpr::lits(Clause::new(vec![a.clone()], vec![]))),
                        a,
                    ),
                },
            }],
        }
    }

    #[test]
    fn numeral_schema_unfolds() {
        let s = toy_schema();
        s.validate().unwrap();
        let t = unfold(&s, "rho", Index::Num(1), &BTreeMap::new(), &OmegaEnv::new(), &SubstSchema::default(), DEFAULT_BUDGET)
            .unwrap();
        assert!(t.conclusion().is_empty());
        assert_eq!(t.leaf_clauses().len(), 2);
        assert_eq!(t.size(), 3);
    }

    #[test]
    fn budget_reports_call_chain() {
        let mut s = toy_schema();
        if let Rules::Numeral { base, .. } = &mut s.symbols[0].rules {
            *base = RTerm::Call {
                symbol: "rho".into(),
                index: IndexExpr::Num(Omega::num(0)),
                omega_args: vec![],
                families: vec![],
                clause_args: vec![],
            };
        }
        assert!(s.validate().is_err());
        let e = unfold(&s, "rho", Index::Num(0), &BTreeMap::new(), &OmegaEnv::new(), &SubstSchema::default(), 100)
            .unwrap_err();
        match e {
            Error::Budget { chain, .. } => assert!(chain.contains("rho(0) -> rho(0)")),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn cr_schema_terminates_through_shift_then_return() {
        // ϱ(<F|m|B>) → ϱ(C>>), ϱ(<F|m|>) → ϱ(C<<), ϱ(<||>) → ⊢.
        let call = |e: CrExpr| RTerm::Call {
            symbol: "rho".into(),
            index: IndexExpr::Cr(e),
            omega_args: vec![],
            families: vec![],
            clause_args: vec![],
        };
        let s = ResolutionSchema {
            symbols: vec![SchemaSymbol {
                name: "rho".into(),
                omega_params: vec![],
                family_params: vec![],
                clause_params: vec![],
                rules: Rules::Cr {
                    empty: RTerm::leaf(ClauseExpr::default()),
                    last: call(CrExpr::Arg.ret()),
                    general: call(CrExpr::Arg.shift()),
                },
            }],
        };
        s.validate().unwrap();
        let vt = SubstSchema::default();
        let mut u = Unfolder::new(&s, &vt, DEFAULT_BUDGET);
        let t = u.unfold("rho", Index::Cr(CrList::canonical(4)), &BTreeMap::new(), &OmegaEnv::new()).unwrap();
        assert!(t.conclusion().is_empty());
        assert_eq!(u.steps(), 5 + 4 + 3 + 2 + 1 + 1);
    }

    fn sample_tree() -> ResolutionTree {
        let a = at("f(0)=0");
        let l = ResolutionTree::leaf(cl("|- f(0)=0, f(0)=1"));
        let r = ResolutionTree::leaf(cl("f(0)=0, f(s(0))=0, s(0)<=s(0) |-"));
        let inner = ResolutionTree::resolve(l, r, a, true).unwrap();
        let u = ResolutionTree::leaf(cl("|- s(0)<=s(0)"));
        ResolutionTree::resolve(u, inner, at("s(0)<=s(0)"), false).unwrap()
    }

    #[test]
    fn text_round_trip() {
        let t = sample_tree();
        let text = t.to_text();
        let back = parse_tree(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back, t);
    }

    #[test]
    fn json_round_trip() {
        let t = sample_tree();
        let back = ResolutionTree::from_json(&t.to_json()).unwrap();
        assert_eq!(back.to_text(), t.to_text());
    }

    #[test]
    fn malformed_pivot_has_position() {
        let text = "res f(0)= [c] :: |-\n  leaf |- f(0)=0\n  leaf f(0)=0 |-\n";
        match parse_tree(text) {
            Err(Error::Syntax { line: 1, col, .. }) => assert_eq!(col, 11),
            other => panic!("{:?}", other),
        }
        let text = "res f(0)=0 :: |-\n  leaf |- f(0)=0\n  leaf f(0)=0 |- (\n";
        assert!(matches!(parse_tree(text), Err(Error::Syntax { line: 3, .. })));
    }

    #[test]
    fn checker_pinpoints_fabricated_node() {
        let good = sample_tree();
        let v = check_tree(&good, &[]);
        assert!(v.node_failures.is_empty());
        assert_eq!(v.leaf_failures.len(), 3);
        let text = good.to_text().replacen(":: f(s(0))=0 |- f(0)=1", ":: f(s(0))=0 |-", 1);
        let bad = parse_tree(&text).unwrap();
        let v = check_tree(&bad, &[]);
        assert_eq!(v.node_failures.len(), 1);
        assert_eq!(v.node_failures[0].id, 0);
    }

    #[test]
    fn leaf_instances_allow_contraction() {
        let c5 = nia_clause_set(1).pop().unwrap();
        assert!(instance_of(&c5, &cl("|- f(0)=0, f(0)=1")).is_some());
        let c4 = crate::clause_sets::c4(0);
        let contracted = cl("f(a)=0, s(a)<=a |-");
        assert!(instance_of(&c4, &contracted).is_some());
        let dup = cl("f(a)=0, f(b)=0, s(a)<=b, f(b)=0 |-");
        assert!(instance_of(&c4, &dup).is_some());
        assert!(instance_of(&c4, &cl("f(a)=0, f(b)=0, s(a)<=b, f(c)=0 |-")).is_none());
    }
}
