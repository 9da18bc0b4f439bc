//! Herbrand system of the NiA refutation: instance lists `w^Φ`, `w^Ψ` over
//! CR lists, the sequent `S(n)`, sps-schema shape checks and a ground
//! validity check (Tseitin encoding plus DPLL).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::clause_sets::Sequent;
use crate::crlist::CrList;
use crate::error::{Error, Result};
use crate::terms::{Atom, Formula, Omega, OmegaEnv, Pred, Term};

/// Ordered list of equal-arity term tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermTupleList {
    arity: usize,
    tuples: Vec<Vec<Term>>,
}

impl TermTupleList {
    pub fn new(arity: usize) -> TermTupleList {
        TermTupleList { arity, tuples: Vec::new() }
    }

    pub fn push(&mut self, tuple: Vec<Term>) -> Result<()> {
        if tuple.len() != self.arity {
            return Err(Error::Range(format!("tuple of arity {} in a list of arity {}", tuple.len(), self.arity)));
        }
        self.tuples.push(tuple);
        Ok(())
    }

    pub fn extend(&mut self, other: TermTupleList) -> Result<()> {
        other.tuples.into_iter().try_for_each(|t| self.push(t))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &[Vec<Term>] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn dedup(&self) -> BTreeSet<Vec<Term>> {
        self.tuples.iter().cloned().collect()
    }
}

impl fmt::Display for TermTupleList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, t) in self.tuples.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if self.arity == 1 {
                write!(f, "{}", t[0])?;
            } else {
                let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(", "))?;
            }
        }
        write!(f, "]")
    }
}

fn m(k: &Omega) -> Term {
    Term::MLadder(k.clone())
}

fn len_term(c: &CrList) -> Term {
    m(&Omega::num(c.len() as u64))
}

/// `w^Φ_1`: `m(|C|)` followed by the list for `C≪`, down to `<||>`.
pub fn w_phi(c: &CrList) -> TermTupleList {
    let mut out = TermTupleList::new(1);
    let mut cur = c.clone();
    loop {
        out.tuples.push(vec![len_term(&cur)]);
        if cur.is_empty() {
            return out;
        }
        cur = cur.carriage_return();
    }
}

/// Pairs `(m(⌊C⌋), m(|C|))` along the shifts of `C`; `|C|` does not change.
fn shift_chain(c: &CrList, out: &mut TermTupleList) {
    let mut cur = c.clone();
    while let Some(mid) = cur.focus() {
        out.tuples.push(vec![m(mid), len_term(&cur)]);
        if cur.is_fully_shifted() {
            return;
        }
        cur = cur.shift();
    }
}

/// `w^Ψ_1`. The shifted continuation `w^Ψ_1(C≫)_1` is read as the chain of
/// shifts alone; only the outer call recurses through `≪`.
pub fn w_psi(c: &CrList) -> TermTupleList {
    let mut out = TermTupleList::new(2);
    let mut cur = c.clone();
    while !cur.is_empty() {
        shift_chain(&cur, &mut out);
        cur = cur.carriage_return();
    }
    out
}

/// The table taken literally, with `≪` recursion inside the shifted branch
/// too. It produces pairs such as `(m(1), m(1))` that `S(n)` does not contain.
pub fn w_psi_literal(c: &CrList) -> TermTupleList {
    let mut out = TermTupleList::new(2);
    fn go(c: &CrList, out: &mut TermTupleList) {
        let Some(mid) = c.focus() else { return };
        out.tuples.push(vec![m(mid), len_term(c)]);
        if !c.is_fully_shifted() {
            go(&c.shift(), out);
        }
        go(&c.carriage_return(), out);
    }
    go(c, &mut out);
    out
}

/// Skolemized prenex sequent schema `Δ, ∀x̄ F_1, … ⊢ ∃ȳ E_1, …, Π`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpsSchema {
    pub param: String,
    pub delta: Vec<Formula>,
    pub phis: Vec<(Vec<String>, Formula)>,
    pub psis: Vec<(Vec<String>, Formula)>,
    pub pi: Vec<Formula>,
}

fn strip_prefix(f: &Formula, universal: bool) -> (Vec<String>, &Formula) {
    let mut vars = Vec::new();
    let mut cur = f;
    loop {
        match (cur, universal) {
            (Formula::Forall(v, body), true) | (Formula::Exists(v, body), false) => {
                vars.push(v.clone());
                cur = body;
            }
            _ => return (vars, cur),
        }
    }
}

impl SpsSchema {
    /// Splits a sequent into the sps shape; `None` when it does not fit.
    pub fn from_sequent(seq: &Sequent, param: &str) -> Option<SpsSchema> {
        let mut out = SpsSchema {
            param: param.to_string(),
            delta: Vec::new(),
            phis: Vec::new(),
            psis: Vec::new(),
            pi: Vec::new(),
        };
        for f in seq.ante.iter().chain(&seq.succ) {
            let mut free = BTreeSet::new();
            f.free_vars(&mut free);
            let mut omegas = BTreeSet::new();
            f.omega_vars(&mut omegas);
            if !free.is_empty() || omegas.iter().any(|v| v != param) {
                return None;
            }
        }
        for f in &seq.ante {
            let (vars, body) = strip_prefix(f, true);
            if !body.is_quantifier_free() {
                return None;
            }
            if vars.is_empty() {
                out.delta.push(f.clone());
            } else {
                out.phis.push((vars, body.clone()));
            }
        }
        for f in &seq.succ {
            let (vars, body) = strip_prefix(f, false);
            if !body.is_quantifier_free() {
                return None;
            }
            if vars.is_empty() {
                out.pi.push(f.clone());
            } else {
                out.psis.push((vars, body.clone()));
            }
        }
        Some(out)
    }

    /// Builds `Δ_γ, Φ_1(γ), … ⊢ Ψ_1(γ), …, Π_γ` from one instance list per
    /// quantified formula. Ladders and iterated disjunctions stay folded.
    pub fn instantiate(&self, gamma: u64, phi: &[TermTupleList], psi: &[TermTupleList]) -> Result<HerbrandSequent> {
        if phi.len() != self.phis.len() || psi.len() != self.psis.len() {
            return Err(Error::Range("one instance list per quantified formula is required".into()));
        }
        let map = BTreeMap::from([(self.param.clone(), Omega::num(gamma))]);
        let inst = |(vars, body): &(Vec<String>, Formula), list: &TermTupleList| -> Result<Vec<Formula>> {
            if list.arity() != vars.len() {
                return Err(Error::Range(format!("instance arity {} for a prefix of {}", list.arity(), vars.len())));
            }
            Ok(list
                .tuples()
                .iter()
                .map(|t| {
                    vars.iter().zip(t).fold(body.subst_omega(&map), |f, (v, term)| f.substitute_var(v, term))
                })
                .collect())
        };
        let mut ante: Vec<Formula> = self.delta.iter().map(|f| f.subst_omega(&map)).collect();
        for (q, l) in self.phis.iter().zip(phi) {
            ante.push(Formula::conj(inst(q, l)?).ok_or_else(|| Error::Range("empty Φ instance list".into()))?);
        }
        let mut succ = Vec::new();
        for (q, l) in self.psis.iter().zip(psi) {
            succ.push(Formula::disj(inst(q, l)?).ok_or_else(|| Error::Range("empty Ψ instance list".into()))?);
        }
        succ.extend(self.pi.iter().map(|f| f.subst_omega(&map)));
        Ok(HerbrandSequent { n: gamma, sequent: Sequent::new(ante, succ) })
    }
}

pub fn sps_match(seq: &Sequent) -> bool {
    SpsSchema::from_sequent(seq, "n").is_some()
}

/// `∀x ⋁_{i=0}^n f(x)=i ⊢ ∃x∃y (x<y ∧ f(x)=f(y))`.
pub fn nia_sequent() -> Sequent {
    let x = Term::var("x");
    let y = Term::var("y");
    let phi = Formula::forall(
        "x",
        Formula::big_or("i", Omega::var("n"), Formula::atom(Atom::eq(Term::f(x.clone()), Term::Num(Omega::var("i"))))),
    );
    let psi = Formula::exists(
        "x",
        Formula::exists(
            "y",
            Formula::and(
                Formula::atom(Atom::lt(x.clone(), y.clone())),
                Formula::atom(Atom::eq(Term::f(x), Term::f(y))),
            ),
        ),
    );
    Sequent::new(vec![phi], vec![psi])
}

pub fn nia_sps() -> SpsSchema {
    SpsSchema::from_sequent(&nia_sequent(), "n").expect("the NiA sequent is an sps-schema")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HerbrandSequent {
    pub n: u64,
    pub sequent: Sequent,
}

impl HerbrandSequent {
    /// Iterated disjunctions and ladders unfolded.
    pub fn normalized(&self) -> Result<Sequent> {
        let env: OmegaEnv = BTreeMap::from([("n".to_string(), self.n)]);
        Ok(Sequent::new(
            self.sequent.ante.iter().map(|f| f.normalize(&env)).collect::<Result<_>>()?,
            self.sequent.succ.iter().map(|f| f.normalize(&env)).collect::<Result<_>>()?,
        ))
    }

    pub fn to_text(&self) -> String {
        let side = |fs: &[Formula]| fs.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", ");
        format!("{} |- {}", side(&self.sequent.ante), side(&self.sequent.succ))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let side = |fs: &[Formula]| fs.iter().map(|f| f.to_string()).collect::<Vec<_>>();
        serde_json::json!({
            "n": self.n,
            "antecedent": side(&self.sequent.ante),
            "succedent": side(&self.sequent.succ),
        })
    }
}

impl fmt::Display for HerbrandSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// `S(n)` from `w^Φ_1(CR_n)` and `w^Ψ_1(CR_n)`.
pub fn herbrand_sequent(n: u64) -> HerbrandSequent {
    let c = CrList::canonical(n);
    nia_sps().instantiate(n, &[w_phi(&c)], &[w_psi(&c)]).expect("list arities match the NiA prefixes")
}

/// Which background axiom families are conjoined as premises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Axioms {
    /// `f(α)=i, f(β)=i ⊢ f(α)=f(β)`.
    pub equality: bool,
    /// `⊢ m(i) < m(j)` for `i < j`.
    pub order: bool,
}

impl Default for Axioms {
    fn default() -> Axioms {
        Axioms { equality: true, order: true }
    }
}

/// Propositional CNF; variables are 1-based, the first `atoms.len()` are atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cnf {
    pub atoms: Vec<Atom>,
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn to_dimacs(&self) -> String {
        let mut s = String::new();
        for (i, a) in self.atoms.iter().enumerate() {
            s.push_str(&format!("c {} {}\n", i + 1, a));
        }
        s.push_str(&format!("p cnf {} {}\n", self.num_vars, self.clauses.len()));
        for c in &self.clauses {
            for l in c {
                s.push_str(&format!("{} ", l));
            }
            s.push_str("0\n");
        }
        s
    }
}

/// `m(k)` in unfolded form, recognised structurally.
fn ladder_index(t: &Term) -> Option<u64> {
    match t {
        Term::Num(k) => (k.as_num() == Some(0)).then_some(0),
        Term::Fn(f, args) if f == "max" && args.len() == 2 => match &args[0] {
            Term::Fn(g, inner) if g == "s" && inner.len() == 1 && inner[0] == args[1] => {
                ladder_index(&args[1]).map(|k| k + 1)
            }
            _ => None,
        },
        _ => None,
    }
}

fn collect_atoms(f: &Formula, out: &mut BTreeSet<Atom>) {
    match f {
        Formula::Atom(a) => {
            out.insert(a.clone());
        }
        Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => collect_atoms(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            collect_atoms(a, out);
            collect_atoms(b, out);
        }
        Formula::BigOr { body, .. } => collect_atoms(body, out),
    }
}

struct Encoder {
    cnf: Cnf,
    ids: HashMap<Atom, i32>,
}

impl Encoder {
    fn atom(&mut self, a: &Atom) -> i32 {
        if let Some(&v) = self.ids.get(a) {
            return v;
        }
        self.cnf.atoms.push(a.clone());
        self.cnf.num_vars += 1;
        let v = self.cnf.num_vars as i32;
        self.ids.insert(a.clone(), v);
        v
    }

    fn fresh(&mut self) -> i32 {
        self.cnf.num_vars += 1;
        self.cnf.num_vars as i32
    }

    /// A literal equivalent to `f`.
    fn encode(&mut self, f: &Formula) -> Result<i32> {
        Ok(match f {
            Formula::Atom(a) => self.atom(a),
            Formula::Not(a) => -self.encode(a)?,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                let (mut x, y) = (self.encode(a)?, self.encode(b)?);
                if matches!(f, Formula::Imp(..)) {
                    x = -x;
                }
                let v = self.fresh();
                if matches!(f, Formula::And(..)) {
                    self.cnf.clauses.extend([vec![-v, x], vec![-v, y], vec![v, -x, -y]]);
                } else {
                    self.cnf.clauses.extend([vec![-v, x, y], vec![v, -x], vec![v, -y]]);
                }
                v
            }
            _ => return Err(Error::InvalidSchema(format!("not a ground propositional formula: {}", f))),
        })
    }
}

/// Encodes `axioms ∧ Γ ∧ ¬Δ`; the sequent is valid iff this is unsatisfiable.
pub fn herbrand_cnf(seq: &HerbrandSequent, axioms: Axioms) -> Result<Cnf> {
    let s = seq.normalized()?;
    let mut enc = Encoder { cnf: Cnf::default(), ids: HashMap::new() };
    let mut atoms = BTreeSet::new();
    for f in s.ante.iter().chain(&s.succ) {
        collect_atoms(f, &mut atoms);
    }
    for a in &atoms {
        enc.atom(a);
    }
    let mut args = BTreeSet::new();
    let mut colours = BTreeSet::new();
    for a in &atoms {
        for t in [&a.lhs, &a.rhs] {
            match t {
                Term::Fn(g, x) if g == "f" && x.len() == 1 => {
                    args.insert(x[0].clone());
                }
                Term::Num(k) if a.pred == Pred::Eq => {
                    colours.extend(k.as_num());
                }
                _ => {}
            }
        }
        for t in [&a.lhs, &a.rhs] {
            if ladder_index(t).is_some() {
                args.insert(t.clone());
            }
        }
    }
    if axioms.equality {
        for a in &args {
            for b in &args {
                if a == b {
                    continue;
                }
                for &i in &colours {
                    let fa = enc.atom(&Atom::colour(a.clone(), i));
                    let fb = enc.atom(&Atom::colour(b.clone(), i));
                    let eq = enc.atom(&Atom::eq(Term::f(a.clone()), Term::f(b.clone())));
                    enc.cnf.clauses.push(vec![-fa, -fb, eq]);
                }
            }
        }
    }
    if axioms.order {
        let ladder: BTreeMap<u64, &Term> = args.iter().filter_map(|t| ladder_index(t).map(|k| (k, t))).collect();
        for (i, a) in &ladder {
            for (j, b) in &ladder {
                if i < j {
                    let v = enc.atom(&Atom::lt((*a).clone(), (*b).clone()));
                    enc.cnf.clauses.push(vec![v]);
                }
            }
        }
    }
    for f in &s.ante {
        let l = enc.encode(f)?;
        enc.cnf.clauses.push(vec![l]);
    }
    for f in &s.succ {
        let l = enc.encode(f)?;
        enc.cnf.clauses.push(vec![-l]);
    }
    Ok(enc.cnf)
}

/// DPLL with unit propagation; returns a model as `model[v]` for `v ≥ 1`.
pub fn solve(cnf: &Cnf) -> Option<Vec<bool>> {
    let mut assign: Vec<Option<bool>> = vec![None; cnf.num_vars + 1];
    if dpll(&cnf.clauses, &mut assign) {
        Some(assign.into_iter().map(|v| v.unwrap_or(false)).collect())
    } else {
        None
    }
}

fn value(assign: &[Option<bool>], l: i32) -> Option<bool> {
    assign[l.unsigned_abs() as usize].map(|b| b == (l > 0))
}

fn dpll(clauses: &[Vec<i32>], assign: &mut Vec<Option<bool>>) -> bool {
    let mut trail = Vec::new();
    let ok = loop {
        let mut changed = false;
        let mut conflict = false;
        let mut branch: Option<(usize, i32)> = None;
        for c in clauses {
            let mut open = 0;
            let mut last = 0;
            let mut sat = false;
            for &l in c {
                match value(assign, l) {
                    Some(true) => {
                        sat = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        open += 1;
                        last = l;
                    }
                }
            }
            if sat {
                continue;
            }
            match open {
                0 => {
                    conflict = true;
                    break;
                }
                1 => {
                    assign[last.unsigned_abs() as usize] = Some(last > 0);
                    trail.push(last.unsigned_abs() as usize);
                    changed = true;
                }
                k => {
                    if branch.map_or(true, |(b, _)| k < b) {
                        branch = Some((k, last));
                    }
                }
            }
        }
        if conflict {
            break false;
        }
        if changed {
            continue;
        }
        match branch {
            None => break true,
            Some((_, l)) => {
                let v = l.unsigned_abs() as usize;
                for b in [l > 0, l < 0] {
                    assign[v] = Some(b);
                    if dpll(clauses, assign) {
                        return true;
                    }
                }
                assign[v] = None;
                break false;
            }
        }
    };
    if !ok {
        for v in trail {
            assign[v] = None;
        }
    }
    ok
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HerbrandVerdict {
    pub n: u64,
    pub valid: bool,
    pub axioms: Axioms,
    pub atoms: usize,
    pub vars: usize,
    pub clauses: usize,
    /// Truth values of the atoms when the sequent is not valid.
    pub countermodel: Option<BTreeMap<String, bool>>,
}

impl fmt::Display for HerbrandVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "n={} {} ({} atoms, {} vars, {} clauses)",
            self.n,
            if self.valid { "valid" } else { "invalid" },
            self.atoms,
            self.vars,
            self.clauses
        )?;
        if let Some(m) = &self.countermodel {
            writeln!(f, "countermodel:")?;
            for (a, b) in m {
                writeln!(f, "  {} = {}", a, b)?;
            }
        }
        Ok(())
    }
}

pub fn verify_sequent(seq: &HerbrandSequent, axioms: Axioms) -> Result<HerbrandVerdict> {
    let cnf = herbrand_cnf(seq, axioms)?;
    let model = solve(&cnf);
    let countermodel = model.map(|m| cnf.atoms.iter().enumerate().map(|(i, a)| (a.to_string(), m[i + 1])).collect());
    Ok(HerbrandVerdict {
        n: seq.n,
        valid: countermodel.is_none(),
        axioms,
        atoms: cnf.atoms.len(),
        vars: cnf.num_vars,
        clauses: cnf.clauses.len(),
        countermodel,
    })
}

pub fn verify_herbrand(n: u64) -> Result<HerbrandVerdict> {
    verify_herbrand_with(n, Axioms::default())
}

pub fn verify_herbrand_with(n: u64, axioms: Axioms) -> Result<HerbrandVerdict> {
    verify_sequent(&herbrand_sequent(n), axioms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_sequent;
    use crate::terms::eval_m;

    fn ms(ks: &[u64]) -> Vec<Vec<Term>> {
        ks.iter().map(|&k| vec![m(&Omega::num(k))]).collect()
    }

    #[test]
    fn w_phi_examples() {
        assert_eq!(w_phi(&CrList::empty()).tuples(), ms(&[0]));
        assert_eq!(w_phi(&CrList::canonical(2)).tuples(), ms(&[3, 2, 1, 0]));
    }

    #[test]
    fn w_psi_examples() {
        assert!(w_psi(&CrList::empty()).is_empty());
        let c = CrList::from_nums(&[2], 1, &[]);
        let l = w_psi(&c);
        assert_eq!(l.tuples()[0], vec![m(&Omega::num(1)), m(&Omega::num(2))]);
        let pairs = |l: &TermTupleList| {
            l.dedup()
                .into_iter()
                .map(|t| match (&t[0], &t[1]) {
                    (Term::MLadder(a), Term::MLadder(b)) => (a.as_num().unwrap(), b.as_num().unwrap()),
                    _ => unreachable!(),
                })
                .collect::<BTreeSet<_>>()
        };
        assert_eq!(pairs(&w_psi(&CrList::canonical(1))), BTreeSet::from([(0, 1), (0, 2), (1, 2)]));
        let lit = pairs(&w_psi_literal(&CrList::canonical(1)));
        assert!(lit.contains(&(1, 1)));
    }

    #[test]
    fn s0_shape() {
        let s = herbrand_sequent(0);
        let norm = s.normalized().unwrap();
        let f0 = Atom::colour(eval_m(0), 0);
        let f1 = Atom::colour(eval_m(1), 0);
        assert_eq!(norm.ante, vec![Formula::and(Formula::atom(f1), Formula::atom(f0))]);
        assert_eq!(norm.succ.len(), 1);
        assert!(norm.ante.iter().chain(&norm.succ).all(|f| f.is_quantifier_free() && !f.has_defined()));
    }

    #[test]
    fn validity_small() {
        for n in 0..=2 {
            assert!(verify_herbrand(n).unwrap().valid, "n={}", n);
        }
        let v = verify_herbrand_with(0, Axioms { equality: true, order: false }).unwrap();
        assert!(!v.valid);
        assert!(v.countermodel.unwrap().values().any(|b| !b));
    }

    #[test]
    fn sps_shapes() {
        assert!(sps_match(&nia_sequent()));
        assert!(sps_match(&Sequent::default()));
        let bad = parse_sequent("exists x. forall y. x<y |-").unwrap();
        assert!(!sps_match(&bad));
        let free = parse_sequent("x<y |-").unwrap();
        assert!(!sps_match(&free));
    }

    #[test]
    fn dimacs_header() {
        let cnf = herbrand_cnf(&herbrand_sequent(0), Axioms::default()).unwrap();
        let d = cnf.to_dimacs();
        assert!(d.contains(&format!("p cnf {} {}", cnf.num_vars, cnf.clauses.len())));
        assert_eq!(d.lines().filter(|l| l.ends_with(" 0")).count(), cnf.clauses.len());
    }
}
