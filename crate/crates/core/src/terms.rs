//! Two-sorted schematic terms and formulas.
//!
//! The ω sort holds numerals, parameters and index variables. The individual
//! sort holds everything that ends up inside atoms. Numerals are unary
//! internally and printed in decimal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Assignment of numerals to free ω-variables.
pub type OmegaEnv = BTreeMap<String, u64>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Omega {
    Zero,
    Succ(Box<Omega>),
    Var(String),
    /// Defined ω-symbol: `plus(a,b)` or `pred(a)`.
    App(String, Vec<Omega>),
}

impl Omega {
    pub fn num(k: u64) -> Omega {
        let mut o = Omega::Zero;
        for _ in 0..k {
            o = Omega::Succ(Box::new(o));
        }
        o
    }

    pub fn var(name: &str) -> Omega {
        Omega::Var(name.to_string())
    }

    pub fn succ(self) -> Omega {
        Omega::Succ(Box::new(self))
    }

    pub fn plus(self, k: u64) -> Omega {
        let mut o = self;
        for _ in 0..k {
            o = o.succ();
        }
        o
    }

    /// The value of a numeral, `None` when the term is not `s^k(0)`.
    pub fn as_num(&self) -> Option<u64> {
        let mut k = 0;
        let mut cur = self;
        loop {
            match cur {
                Omega::Zero => return Some(k),
                Omega::Succ(inner) => {
                    k += 1;
                    cur = inner;
                }
                _ => return None,
            }
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Omega::Zero => true,
            Omega::Succ(o) => o.is_ground(),
            Omega::Var(_) => false,
            Omega::App(_, args) => args.iter().all(Omega::is_ground),
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Omega::Zero => {}
            Omega::Succ(o) => o.vars(out),
            Omega::Var(v) => {
                out.insert(v.clone());
            }
            Omega::App(_, args) => args.iter().for_each(|a| a.vars(out)),
        }
    }

    pub fn eval(&self, env: &OmegaEnv) -> Result<u64> {
        match self {
            Omega::Zero => Ok(0),
            Omega::Succ(o) => Ok(o.eval(env)? + 1),
            Omega::Var(v) => env
                .get(v)
                .copied()
                .ok_or_else(|| Error::UnboundOmegaVar(v.clone())),
            Omega::App(f, args) => {
                let vals = args
                    .iter()
                    .map(|a| a.eval(env))
                    .collect::<Result<Vec<_>>>()?;
                match (f.as_str(), vals.as_slice()) {
                    ("plus", [a, b]) => Ok(a + b),
                    ("pred", [0]) => Err(Error::PredZero(self.to_string())),
                    ("pred", [a]) => Ok(a - 1),
                    _ => Err(Error::UnknownSymbol(f.clone())),
                }
            }
        }
    }

    pub fn normalize(&self, env: &OmegaEnv) -> Result<Omega> {
        self.eval(env).map(Omega::num)
    }

    /// Replaces bound ω-variables, leaving the rest untouched.
    pub fn subst(&self, map: &BTreeMap<String, Omega>) -> Omega {
        match self {
            Omega::Zero => Omega::Zero,
            Omega::Succ(o) => o.subst(map).succ(),
            Omega::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Omega::App(f, args) => Omega::App(f.clone(), args.iter().map(|a| a.subst(map)).collect()),
        }
    }

    fn split_succ(&self) -> (&Omega, u64) {
        let mut k = 0;
        let mut cur = self;
        while let Omega::Succ(inner) = cur {
            k += 1;
            cur = inner;
        }
        (cur, k)
    }
}

impl fmt::Display for Omega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (base, k) = self.split_succ();
        match base {
            Omega::Zero => return write!(f, "{}", k),
            Omega::Var(v) => write!(f, "{}", v)?,
            Omega::App(g, args) => {
                write!(f, "{}(", g)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")?;
            }
            Omega::Succ(_) => unreachable!(),
        }
        if k > 0 {
            write!(f, "+{}", k)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Free, bound or extra individual variable.
    Var(String),
    /// Schematic variable applied to an ω-term, `x_k`.
    Idx(String, Omega),
    /// Constant-function application such as `s`, `max`, `f`.
    Fn(String, Vec<Term>),
    /// An ω-term in individual position (the individual 0, colours).
    Num(Omega),
    /// `m(k,x,t)`.
    MIter(Omega, String, Box<Term>),
    /// The ladder `m(k)`.
    MLadder(Omega),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn idx(family: &str, k: u64) -> Term {
        Term::Idx(family.to_string(), Omega::num(k))
    }

    pub fn num(k: u64) -> Term {
        Term::Num(Omega::num(k))
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::Fn(f.to_string(), args)
    }

    pub fn s(t: Term) -> Term {
        Term::app("s", vec![t])
    }

    pub fn max(a: Term, b: Term) -> Term {
        Term::app("max", vec![a, b])
    }

    pub fn f(t: Term) -> Term {
        Term::app("f", vec![t])
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_) | Term::Idx(..))
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Idx(..) | Term::Num(_) | Term::MLadder(_) => 1,
            Term::Fn(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            Term::MIter(_, _, t) => 1 + t.size(),
        }
    }

    pub fn has_defined(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Idx(_, k) | Term::Num(k) => k.as_num().is_none(),
            Term::Fn(_, args) => args.iter().any(Term::has_defined),
            Term::MIter(..) | Term::MLadder(_) => true,
        }
    }

    /// Individual variables and ground schematic-variable applications.
    pub fn vars(&self, out: &mut BTreeSet<VarKey>) {
        match self {
            Term::Var(v) => {
                out.insert(VarKey::Ind(v.clone()));
            }
            Term::Idx(x, k) => {
                out.insert(VarKey::Idx(x.clone(), k.clone()));
            }
            Term::Fn(_, args) => args.iter().for_each(|a| a.vars(out)),
            Term::Num(_) | Term::MLadder(_) => {}
            Term::MIter(_, _, t) => t.vars(out),
        }
    }

    pub fn omega_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(_) => {}
            Term::Idx(_, k) | Term::Num(k) | Term::MLadder(k) => k.vars(out),
            Term::Fn(_, args) => args.iter().for_each(|a| a.omega_vars(out)),
            Term::MIter(k, _, t) => {
                k.vars(out);
                t.omega_vars(out);
            }
        }
    }

    pub fn normalize(&self, env: &OmegaEnv) -> Result<Term> {
        Ok(match self {
            Term::Var(_) => self.clone(),
            Term::Idx(x, k) => Term::Idx(x.clone(), k.normalize(env)?),
            Term::Fn(f, args) => Term::Fn(
                f.clone(),
                args.iter().map(|a| a.normalize(env)).collect::<Result<_>>()?,
            ),
            Term::Num(k) => Term::Num(k.normalize(env)?),
            Term::MIter(k, x, t) => eval_m_iter(k.eval(env)?, x, &t.normalize(env)?),
            Term::MLadder(k) => eval_m(k.eval(env)?),
        })
    }

    pub fn subst_omega(&self, map: &BTreeMap<String, Omega>) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::Idx(x, k) => Term::Idx(x.clone(), k.subst(map)),
            Term::Fn(f, args) => Term::Fn(f.clone(), args.iter().map(|a| a.subst_omega(map)).collect()),
            Term::Num(k) => Term::Num(k.subst(map)),
            Term::MIter(k, x, t) => Term::MIter(k.subst(map), x.clone(), Box::new(t.subst_omega(map))),
            Term::MLadder(k) => Term::MLadder(k.subst(map)),
        }
    }

    pub fn rename_vars(&self, f: &dyn Fn(&str) -> String) -> Term {
        match self {
            Term::Var(v) => Term::Var(f(v)),
            Term::Fn(g, args) => Term::Fn(g.clone(), args.iter().map(|a| a.rename_vars(f)).collect()),
            Term::MIter(k, x, t) => Term::MIter(k.clone(), x.clone(), Box::new(t.rename_vars(f))),
            _ => self.clone(),
        }
    }

    /// Renames schematic variable families (`x_k` to `y_k` etc.).
    pub fn rename_families(&self, map: &BTreeMap<String, String>) -> Term {
        let fam = |x: &String| map.get(x).cloned().unwrap_or_else(|| x.clone());
        match self {
            Term::Idx(x, k) => Term::Idx(fam(x), k.clone()),
            Term::Fn(g, args) => Term::Fn(g.clone(), args.iter().map(|a| a.rename_families(map)).collect()),
            Term::MIter(k, x, t) => Term::MIter(k.clone(), fam(x), Box::new(t.rename_families(map))),
            _ => self.clone(),
        }
    }

    fn occurs(&self, key: &VarKey) -> bool {
        match (self, key) {
            (Term::Var(v), VarKey::Ind(w)) => v == w,
            (Term::Idx(x, k), VarKey::Idx(y, j)) => x == y && k == j,
            (Term::Fn(_, args), _) => args.iter().any(|a| a.occurs(key)),
            (Term::MIter(_, _, t), _) => t.occurs(key),
            _ => false,
        }
    }

    fn key(&self) -> Option<VarKey> {
        match self {
            Term::Var(v) => Some(VarKey::Ind(v.clone())),
            Term::Idx(x, k) => Some(VarKey::Idx(x.clone(), k.clone())),
            _ => None,
        }
    }
}

/// `m(k,x,t)` fully unfolded: `max(s(x_1), max(s(x_2), … max(s(x_k), t)))`.
pub fn eval_m_iter(k: u64, family: &str, t: &Term) -> Term {
    let mut acc = t.clone();
    for j in (1..=k).rev() {
        acc = Term::max(Term::s(Term::idx(family, j)), acc);
    }
    acc
}

/// The ladder `m(0)=0`, `m(k)=max(s(m(k-1)),m(k-1))`.
pub fn eval_m(k: u64) -> Term {
    let mut acc = Term::num(0);
    for _ in 0..k {
        acc = Term::max(Term::s(acc.clone()), acc);
    }
    acc
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", v),
            Term::Idx(x, k) => match (k.as_num(), k) {
                (Some(n), _) => write!(f, "{}_{}", x, n),
                (None, Omega::Var(v)) => write!(f, "{}_{}", x, v),
                _ => write!(f, "{}_{{{}}}", x, k),
            },
            Term::Fn(g, args) => {
                write!(f, "{}(", g)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
            Term::Num(k) => write!(f, "{}", k),
            Term::MIter(k, x, t) => write!(f, "m({},{},{})", k, x, t),
            Term::MLadder(k) => write!(f, "m({})", k),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pred {
    Le,
    Lt,
    Eq,
}

impl Pred {
    pub fn symbol(self) -> &'static str {
        match self {
            Pred::Le => "<=",
            Pred::Lt => "<",
            Pred::Eq => "=",
        }
    }

    pub fn tptp_name(self) -> &'static str {
        match self {
            Pred::Le => "leq",
            Pred::Lt => "lt",
            Pred::Eq => "eq",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Pred,
    pub lhs: Term,
    pub rhs: Term,
}

impl Atom {
    pub fn new(pred: Pred, lhs: Term, rhs: Term) -> Atom {
        Atom { pred, lhs, rhs }
    }

    pub fn le(lhs: Term, rhs: Term) -> Atom {
        Atom::new(Pred::Le, lhs, rhs)
    }

    pub fn lt(lhs: Term, rhs: Term) -> Atom {
        Atom::new(Pred::Lt, lhs, rhs)
    }

    pub fn eq(lhs: Term, rhs: Term) -> Atom {
        Atom::new(Pred::Eq, lhs, rhs)
    }

    /// `f(t)=c` for a colour `c`.
    pub fn colour(t: Term, c: u64) -> Atom {
        Atom::eq(Term::f(t), Term::num(c))
    }

    pub fn map_terms(&self, mut g: impl FnMut(&Term) -> Term) -> Atom {
        Atom::new(self.pred, g(&self.lhs), g(&self.rhs))
    }

    pub fn try_map_terms(&self, mut g: impl FnMut(&Term) -> Result<Term>) -> Result<Atom> {
        Ok(Atom::new(self.pred, g(&self.lhs)?, g(&self.rhs)?))
    }

    pub fn normalize(&self, env: &OmegaEnv) -> Result<Atom> {
        self.try_map_terms(|t| t.normalize(env))
    }

    pub fn vars(&self, out: &mut BTreeSet<VarKey>) {
        self.lhs.vars(out);
        self.rhs.vars(out);
    }

    pub fn size(&self) -> usize {
        self.lhs.size() + self.rhs.size()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.lhs, self.pred.symbol(), self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
    /// `⋁_{var=0}^{hi} body`.
    BigOr {
        var: String,
        hi: Omega,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(body))
    }

    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(body))
    }

    pub fn big_or(var: &str, hi: Omega, body: Formula) -> Formula {
        Formula::BigOr { var: var.to_string(), hi, body: Box::new(body) }
    }

    /// Left-nested disjunction; `None` for an empty list.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(Formula::or)
    }

    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        items.into_iter().reduce(Formula::and)
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Forall(..) | Formula::Exists(..) => false,
            Formula::BigOr { body, .. } => body.is_quantifier_free(),
        }
    }

    pub fn has_defined(&self) -> bool {
        match self {
            Formula::Atom(a) => a.lhs.has_defined() || a.rhs.has_defined(),
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => a.has_defined(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => a.has_defined() || b.has_defined(),
            Formula::BigOr { .. } => true,
        }
    }

    pub fn subst_omega(&self, map: &BTreeMap<String, Omega>) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(a.map_terms(|t| t.subst_omega(map))),
            Formula::Not(a) => Formula::not(a.subst_omega(map)),
            Formula::And(a, b) => Formula::and(a.subst_omega(map), b.subst_omega(map)),
            Formula::Or(a, b) => Formula::or(a.subst_omega(map), b.subst_omega(map)),
            Formula::Imp(a, b) => Formula::imp(a.subst_omega(map), b.subst_omega(map)),
            Formula::Forall(v, a) => Formula::Forall(v.clone(), Box::new(a.subst_omega(map))),
            Formula::Exists(v, a) => Formula::Exists(v.clone(), Box::new(a.subst_omega(map))),
            Formula::BigOr { var, hi, body } => {
                let mut inner = map.clone();
                inner.remove(var);
                Formula::BigOr { var: var.clone(), hi: hi.subst(map), body: Box::new(body.subst_omega(&inner)) }
            }
        }
    }

    pub fn map_atoms(&self, g: &mut dyn FnMut(&Atom) -> Result<Atom>) -> Result<Formula> {
        Ok(match self {
            Formula::Atom(a) => Formula::Atom(g(a)?),
            Formula::Not(a) => Formula::not(a.map_atoms(g)?),
            Formula::And(a, b) => Formula::and(a.map_atoms(g)?, b.map_atoms(g)?),
            Formula::Or(a, b) => Formula::or(a.map_atoms(g)?, b.map_atoms(g)?),
            Formula::Imp(a, b) => Formula::imp(a.map_atoms(g)?, b.map_atoms(g)?),
            Formula::Forall(v, a) => Formula::Forall(v.clone(), Box::new(a.map_atoms(g)?)),
            Formula::Exists(v, a) => Formula::Exists(v.clone(), Box::new(a.map_atoms(g)?)),
            Formula::BigOr { var, hi, body } => {
                Formula::BigOr { var: var.clone(), hi: hi.clone(), body: Box::new(body.map_atoms(g)?) }
            }
        })
    }

    /// Unfolds iterated disjunctions and defined terms under `env`.
    pub fn normalize(&self, env: &OmegaEnv) -> Result<Formula> {
        Ok(match self {
            Formula::Atom(a) => Formula::Atom(a.normalize(env)?),
            Formula::Not(a) => Formula::not(a.normalize(env)?),
            Formula::And(a, b) => Formula::and(a.normalize(env)?, b.normalize(env)?),
            Formula::Or(a, b) => Formula::or(a.normalize(env)?, b.normalize(env)?),
            Formula::Imp(a, b) => Formula::imp(a.normalize(env)?, b.normalize(env)?),
            Formula::Forall(v, a) => Formula::Forall(v.clone(), Box::new(a.normalize(env)?)),
            Formula::Exists(v, a) => Formula::Exists(v.clone(), Box::new(a.normalize(env)?)),
            Formula::BigOr { var, hi, body } => {
                let gamma = hi.eval(env)?;
                let mut inner = env.clone();
                let mut acc: Option<Formula> = None;
                for i in 0..=gamma {
                    inner.insert(var.clone(), i);
                    let p = body.normalize(&inner)?;
                    acc = Some(match acc {
                        None => p,
                        Some(prev) => Formula::or(prev, p),
                    });
                }
                acc.expect("at least one disjunct")
            }
        })
    }

    /// Free individual variables.
    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Atom(a) => {
                    let mut vs = BTreeSet::new();
                    a.vars(&mut vs);
                    for v in vs {
                        if let VarKey::Ind(name) = v {
                            if !bound.contains(&name) {
                                out.insert(name);
                            }
                        }
                    }
                }
                Formula::Not(a) => go(a, bound, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Forall(v, a) | Formula::Exists(v, a) => {
                    bound.push(v.clone());
                    go(a, bound, out);
                    bound.pop();
                }
                Formula::BigOr { body, .. } => go(body, bound, out),
            }
        }
        go(self, &mut Vec::new(), out)
    }

    /// Free ω-variables (iterated-∨ indices are bound).
    pub fn omega_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => {
                a.lhs.omega_vars(out);
                a.rhs.omega_vars(out);
            }
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => a.omega_vars(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.omega_vars(out);
                b.omega_vars(out);
            }
            Formula::BigOr { var, hi, body } => {
                hi.vars(out);
                let mut inner = BTreeSet::new();
                body.omega_vars(&mut inner);
                inner.remove(var);
                out.extend(inner);
            }
        }
    }

    pub fn rename_vars(&self, f: &dyn Fn(&str) -> String) -> Formula {
        self.map_atoms(&mut |a| Ok(a.map_terms(|t| t.rename_vars(f))))
            .expect("renaming is infallible")
    }

    /// Renames free individual variables; bound ones are left alone.
    pub fn rename_free(&self, f: &dyn Fn(&str) -> String) -> Formula {
        fn go(x: &Formula, bound: &mut Vec<String>, f: &dyn Fn(&str) -> String) -> Formula {
            let g = |v: &str| if bound.iter().any(|b| b == v) { v.to_string() } else { f(v) };
            match x {
                Formula::Atom(a) => Formula::Atom(a.map_terms(|t| t.rename_vars(&g))),
                Formula::Not(a) => Formula::not(go(a, bound, f)),
                Formula::And(a, b) => Formula::and(go(a, bound, f), go(b, bound, f)),
                Formula::Or(a, b) => Formula::or(go(a, bound, f), go(b, bound, f)),
                Formula::Imp(a, b) => Formula::imp(go(a, bound, f), go(b, bound, f)),
                Formula::Forall(v, a) | Formula::Exists(v, a) => {
                    bound.push(v.clone());
                    let body = go(a, bound, f);
                    bound.pop();
                    if matches!(x, Formula::Forall(..)) {
                        Formula::Forall(v.clone(), Box::new(body))
                    } else {
                        Formula::Exists(v.clone(), Box::new(body))
                    }
                }
                Formula::BigOr { var, hi, body } => {
                    Formula::BigOr { var: var.clone(), hi: hi.clone(), body: Box::new(go(body, bound, f)) }
                }
            }
        }
        go(self, &mut Vec::new(), f)
    }

    pub fn substitute_var(&self, var: &str, t: &Term) -> Formula {
        let mut s = Subst::new();
        s.bind(VarKey::Ind(var.to_string()), t.clone());
        self.map_atoms(&mut |a| Ok(s.apply_atom(a))).expect("substitution is infallible")
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Imp(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Forall(..) | Formula::Exists(..) => 0,
            _ => 4,
        }
    }

    fn fmt_ctx(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let p = self.prec();
        let wrap = if p == 0 { ctx >= 2 } else { p < ctx };
        if wrap {
            write!(f, "(")?;
        }
        match self {
            Formula::Atom(a) => write!(f, "{}", a)?,
            Formula::Not(a) => {
                write!(f, "~")?;
                a.fmt_ctx(f, 4)?;
            }
            Formula::And(a, b) => {
                a.fmt_ctx(f, 3)?;
                write!(f, " & ")?;
                b.fmt_ctx(f, 4)?;
            }
            Formula::Or(a, b) => {
                a.fmt_ctx(f, 2)?;
                write!(f, " | ")?;
                b.fmt_ctx(f, 3)?;
            }
            Formula::Imp(a, b) => {
                a.fmt_ctx(f, 2)?;
                write!(f, " -> ")?;
                b.fmt_ctx(f, 1)?;
            }
            Formula::Forall(v, a) => {
                write!(f, "forall {}. ", v)?;
                a.fmt_ctx(f, 1)?;
            }
            Formula::Exists(v, a) => {
                write!(f, "exists {}. ", v)?;
                a.fmt_ctx(f, 1)?;
            }
            Formula::BigOr { var, hi, body } => {
                write!(f, "OR[{}=0..{}] ", var, hi)?;
                body.fmt_ctx(f, 4)?;
            }
        }
        if wrap {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_ctx(f, 0)
    }
}

/// Variables of the individual sort that substitutions may bind.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    Ind(String),
    Idx(String, Omega),
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKey::Ind(v) => write!(f, "{}", v),
            VarKey::Idx(x, k) => write!(f, "{}", Term::Idx(x.clone(), k.clone())),
        }
    }
}

/// A value for a substitution binding; ω-variables take ω-terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Term(Term),
    Omega(Omega),
}

/// Finite simultaneous substitution over both sorts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    ind: BTreeMap<VarKey, Term>,
    omega: BTreeMap<String, Omega>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn is_empty(&self) -> bool {
        self.ind.is_empty() && self.omega.is_empty()
    }

    /// Builds a substitution from mixed bindings, rejecting sort clashes.
    pub fn from_bindings(bindings: Vec<(String, Option<Omega>, Value)>) -> Result<Subst> {
        let mut s = Subst::new();
        for (name, index, value) in bindings {
            s.insert(&name, index, value)?;
        }
        Ok(s)
    }

    /// `index = Some(k)` addresses the schematic application `name_k`.
    /// A bare name with an ω value binds an ω-variable.
    pub fn insert(&mut self, name: &str, index: Option<Omega>, value: Value) -> Result<()> {
        match (index, value) {
            (None, Value::Omega(o)) => {
                self.omega.insert(name.to_string(), o);
            }
            (None, Value::Term(t)) => {
                self.ind.insert(VarKey::Ind(name.to_string()), t);
            }
            (Some(k), Value::Term(t)) => {
                self.ind.insert(VarKey::Idx(name.to_string(), k), t);
            }
            (Some(k), Value::Omega(o)) => {
                return Err(Error::SortMismatch {
                    var: Term::Idx(name.to_string(), k).to_string(),
                    value: format!("ω-term {}", o),
                })
            }
        }
        Ok(())
    }

    pub fn bind(&mut self, key: VarKey, t: Term) {
        self.ind.insert(key, t);
    }

    pub fn bind_omega(&mut self, name: &str, o: Omega) {
        self.omega.insert(name.to_string(), o);
    }

    pub fn get(&self, key: &VarKey) -> Option<&Term> {
        self.ind.get(key)
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&VarKey, &Term)> {
        self.ind.iter()
    }

    pub fn omega_bindings(&self) -> impl Iterator<Item = (&String, &Omega)> {
        self.omega.iter()
    }

    pub fn len(&self) -> usize {
        self.ind.len() + self.omega.len()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.ind.get(&VarKey::Ind(v.clone())).cloned().unwrap_or_else(|| t.clone()),
            Term::Idx(x, k) => {
                let k = if self.omega.is_empty() { k.clone() } else { k.subst(&self.omega) };
                self.ind
                    .get(&VarKey::Idx(x.clone(), k.clone()))
                    .cloned()
                    .unwrap_or(Term::Idx(x.clone(), k))
            }
            Term::Fn(g, args) => Term::Fn(g.clone(), args.iter().map(|a| self.apply_term(a)).collect()),
            Term::Num(k) => Term::Num(k.subst(&self.omega)),
            Term::MIter(k, x, inner) => {
                Term::MIter(k.subst(&self.omega), x.clone(), Box::new(self.apply_term(inner)))
            }
            Term::MLadder(k) => Term::MLadder(k.subst(&self.omega)),
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        a.map_terms(|t| self.apply_term(t))
    }

    pub fn apply_formula(&self, f: &Formula) -> Formula {
        let shifted = if self.omega.is_empty() { f.clone() } else { f.subst_omega(&self.omega) };
        let ind = Subst { ind: self.ind.clone(), omega: BTreeMap::new() };
        shifted
            .map_atoms(&mut |a| Ok(ind.apply_atom(a)))
            .expect("substitution is infallible")
    }

    /// `self` then `next`: applying the result equals applying both in order.
    pub fn compose(&self, next: &Subst) -> Subst {
        let mut out = Subst::new();
        for (k, t) in &self.ind {
            out.ind.insert(k.clone(), next.apply_term(t));
        }
        for (k, t) in &next.ind {
            out.ind.entry(k.clone()).or_insert_with(|| t.clone());
        }
        for (k, o) in &self.omega {
            out.omega.insert(k.clone(), o.subst(&next.omega));
        }
        for (k, o) in &next.omega {
            out.omega.entry(k.clone()).or_insert_with(|| o.clone());
        }
        out
    }

    pub fn is_idempotent(&self) -> bool {
        self.ind.values().all(|t| self.apply_term(t) == *t)
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (k, o) in &self.omega {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{}<-{}", k, o)?;
        }
        for (k, t) in &self.ind {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{}<-{}", k, t)?;
        }
        write!(f, "}}")
    }
}

/// Syntactic most general unifier of two atoms, with occurs check.
pub fn unify(a: &Atom, b: &Atom) -> Option<Subst> {
    if a.pred != b.pred {
        return None;
    }
    unify_pairs(&[(&a.lhs, &b.lhs), (&a.rhs, &b.rhs)])
}

pub fn unify_terms(a: &Term, b: &Term) -> Option<Subst> {
    unify_pairs(&[(a, b)])
}

fn unify_pairs(pairs: &[(&Term, &Term)]) -> Option<Subst> {
    let mut bind: BTreeMap<VarKey, Term> = BTreeMap::new();
    let mut stack: Vec<(Term, Term)> = pairs.iter().map(|(a, b)| ((*a).clone(), (*b).clone())).collect();
    stack.reverse();
    while let Some((l, r)) = stack.pop() {
        let l = walk(&bind, l);
        let r = walk(&bind, r);
        if l == r {
            continue;
        }
        match (l.key(), r.key()) {
            (Some(k), _) => {
                if occurs_resolved(&bind, &r, &k) {
                    return None;
                }
                bind.insert(k, r);
            }
            (None, Some(k)) => {
                if occurs_resolved(&bind, &l, &k) {
                    return None;
                }
                bind.insert(k, l);
            }
            (None, None) => match (l, r) {
                (Term::Fn(f, xs), Term::Fn(g, ys)) if f == g && xs.len() == ys.len() => {
                    for (x, y) in xs.into_iter().zip(ys).rev() {
                        stack.push((x, y));
                    }
                }
                (Term::MIter(k1, x1, t1), Term::MIter(k2, x2, t2)) if k1 == k2 && x1 == x2 => {
                    stack.push((*t1, *t2));
                }
                _ => return None,
            },
        }
    }
    let mut out = Subst::new();
    for k in bind.keys() {
        out.ind.insert(k.clone(), resolve(&bind, &Term::from_key(k)));
    }
    Some(out)
}

impl Term {
    fn from_key(k: &VarKey) -> Term {
        match k {
            VarKey::Ind(v) => Term::Var(v.clone()),
            VarKey::Idx(x, i) => Term::Idx(x.clone(), i.clone()),
        }
    }
}

fn walk(bind: &BTreeMap<VarKey, Term>, mut t: Term) -> Term {
    while let Some(k) = t.key() {
        match bind.get(&k) {
            Some(next) => t = next.clone(),
            None => break,
        }
    }
    t
}

fn occurs_resolved(bind: &BTreeMap<VarKey, Term>, t: &Term, k: &VarKey) -> bool {
    resolve(bind, t).occurs(k)
}

fn resolve(bind: &BTreeMap<VarKey, Term>, t: &Term) -> Term {
    match t {
        Term::Var(_) | Term::Idx(..) => {
            let w = walk(bind, t.clone());
            if w.is_var() {
                w
            } else {
                resolve(bind, &w)
            }
        }
        Term::Fn(g, args) => Term::Fn(g.clone(), args.iter().map(|a| resolve(bind, a)).collect()),
        Term::MIter(k, x, inner) => Term::MIter(k.clone(), x.clone(), Box::new(resolve(bind, inner))),
        _ => t.clone(),
    }
}

/// One-way matching: extends `s` so that `pattern·s = target`.
pub fn match_term(pattern: &Term, target: &Term, s: &mut Subst) -> bool {
    if let Some(k) = pattern.key() {
        return match s.ind.get(&k) {
            Some(bound) => bound == target,
            None => {
                s.ind.insert(k, target.clone());
                true
            }
        };
    }
    match (pattern, target) {
        (Term::Fn(f, xs), Term::Fn(g, ys)) if f == g && xs.len() == ys.len() => {
            xs.iter().zip(ys).all(|(x, y)| match_term(x, y, s))
        }
        (Term::MIter(k1, x1, t1), Term::MIter(k2, x2, t2)) if k1 == k2 && x1 == x2 => match_term(t1, t2, s),
        _ => pattern == target,
    }
}

pub fn match_atom(pattern: &Atom, target: &Atom, s: &mut Subst) -> bool {
    pattern.pred == target.pred && match_term(&pattern.lhs, &target.lhs, s) && match_term(&pattern.rhs, &target.rhs, s)
}

/// A substitution schema `u ← λk.t(k)`, instantiated per index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubstSchema {
    pub bindings: Vec<SchemaBinding>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaBinding {
    pub family: String,
    pub index_var: String,
    pub body: Term,
}

impl SubstSchema {
    /// `y(k) ← λk.m(k)`.
    pub fn ladder(family: &str) -> SubstSchema {
        SubstSchema {
            bindings: vec![SchemaBinding {
                family: family.to_string(),
                index_var: "k".to_string(),
                body: Term::MLadder(Omega::var("k")),
            }],
        }
    }

    /// The ground binding of `family_gamma`, if the schema covers the family.
    pub fn instance(&self, family: &str, gamma: u64) -> Option<Result<Term>> {
        self.bindings.iter().find(|b| b.family == family).map(|b| {
            let mut env = OmegaEnv::new();
            env.insert(b.index_var.clone(), gamma);
            b.body.normalize(&env)
        })
    }

    pub fn apply_term(&self, t: &Term) -> Result<Term> {
        Ok(match t {
            Term::Idx(x, k) => match k.as_num() {
                Some(g) => match self.instance(x, g) {
                    Some(r) => r?,
                    None => t.clone(),
                },
                None => t.clone(),
            },
            Term::Fn(g, args) => Term::Fn(g.clone(), args.iter().map(|a| self.apply_term(a)).collect::<Result<_>>()?),
            Term::MIter(k, x, inner) => Term::MIter(k.clone(), x.clone(), Box::new(self.apply_term(inner)?)),
            _ => t.clone(),
        })
    }

    pub fn apply_atom(&self, a: &Atom) -> Result<Atom> {
        a.try_map_terms(|t| self.apply_term(t))
    }

    /// The ground substitution on `family_0 … family_hi`.
    pub fn ground(&self, hi: u64) -> Result<Subst> {
        let mut s = Subst::new();
        for b in &self.bindings {
            for g in 0..=hi {
                let mut env = OmegaEnv::new();
                env.insert(b.index_var.clone(), g);
                s.bind(VarKey::Idx(b.family.clone(), Omega::num(g)), b.body.normalize(&env)?);
            }
        }
        Ok(s)
    }
}

/// Small-step rewriting of defined symbols, used to test that normal forms
/// do not depend on the order in which redexes are contracted.
pub mod rewrite {
    use super::*;

    /// Positions of redexes in a term; a position is a path of child indices.
    pub fn redexes(t: &Term) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        collect(t, &mut Vec::new(), &mut out);
        out
    }

    fn omega_redex(o: &Omega) -> bool {
        match o {
            Omega::Zero | Omega::Var(_) => false,
            Omega::Succ(i) => omega_redex(i),
            Omega::App(..) => true,
        }
    }

    fn collect(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        match t {
            Term::Var(_) => {}
            Term::Idx(_, k) | Term::Num(k) => {
                if omega_redex(k) {
                    out.push(path.clone());
                }
            }
            Term::Fn(_, args) => {
                for (i, a) in args.iter().enumerate() {
                    path.push(i);
                    collect(a, path, out);
                    path.pop();
                }
            }
            Term::MIter(k, _, inner) => {
                if k.as_num().is_some() {
                    out.push(path.clone());
                } else if omega_redex(k) {
                    out.push(path.clone());
                }
                path.push(0);
                collect(inner, path, out);
                path.pop();
            }
            Term::MLadder(k) => {
                if k.as_num().is_some() || omega_redex(k) {
                    out.push(path.clone());
                }
            }
        }
    }

    fn omega_step(o: &Omega) -> Omega {
        match o {
            Omega::Succ(i) => omega_step(i).succ(),
            Omega::App(f, args) => {
                if let Some(pos) = args.iter().position(|a| a.as_num().is_none()) {
                    let mut args = args.clone();
                    args[pos] = omega_step(&args[pos]);
                    return Omega::App(f.clone(), args);
                }
                match (f.as_str(), args.as_slice()) {
                    ("plus", [a, Omega::Zero]) => a.clone(),
                    ("plus", [a, Omega::Succ(b)]) => {
                        Omega::App("plus".into(), vec![a.clone(), (**b).clone()]).succ()
                    }
                    ("pred", [Omega::Succ(a)]) => (**a).clone(),
                    _ => o.clone(),
                }
            }
            _ => o.clone(),
        }
    }

    /// Contracts the redex at `path` by one rule application.
    pub fn step_at(t: &Term, path: &[usize]) -> Term {
        if let Some((&i, rest)) = path.split_first() {
            return match t {
                Term::Fn(g, args) => {
                    let mut args = args.clone();
                    args[i] = step_at(&args[i], rest);
                    Term::Fn(g.clone(), args)
                }
                Term::MIter(k, x, inner) => Term::MIter(k.clone(), x.clone(), Box::new(step_at(inner, rest))),
                _ => t.clone(),
            };
        }
        match t {
            Term::Idx(x, k) => Term::Idx(x.clone(), omega_step(k)),
            Term::Num(k) => Term::Num(omega_step(k)),
            Term::MIter(k, x, inner) => match k {
                Omega::Zero => (**inner).clone(),
                Omega::Succ(j) if k.as_num().is_some() => Term::MIter(
                    (**j).clone(),
                    x.clone(),
                    Box::new(Term::max(Term::s(Term::Idx(x.clone(), k.clone())), (**inner).clone())),
                ),
                _ => Term::MIter(omega_step(k), x.clone(), inner.clone()),
            },
            Term::MLadder(k) => match k {
                Omega::Zero => Term::num(0),
                Omega::Succ(j) if k.as_num().is_some() => {
                    let prev = Term::MLadder((**j).clone());
                    Term::max(Term::s(prev.clone()), prev)
                }
                _ => Term::MLadder(omega_step(k)),
            },
            _ => t.clone(),
        }
    }

    /// Rewrites to normal form, letting `choose(count)` pick the next redex.
    pub fn normalize_with(t: &Term, mut choose: impl FnMut(usize) -> usize) -> Term {
        let mut cur = t.clone();
        loop {
            let rs = redexes(&cur);
            if rs.is_empty() {
                return cur;
            }
            let i = choose(rs.len()) % rs.len();
            cur = step_at(&cur, &rs[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(k: u64) -> Term {
        Term::idx("x", k)
    }

    #[test]
    fn numerals_print_in_decimal() {
        assert_eq!(Omega::num(3).to_string(), "3");
        assert_eq!(Omega::var("n").succ().to_string(), "n+1");
        assert_eq!(Term::s(Term::s(Term::num(0))).to_string(), "s(s(0))");
    }

    #[test]
    fn m_iter_unfolds() {
        let t = Term::var("t");
        assert_eq!(eval_m_iter(0, "x", &t), t);
        assert_eq!(eval_m_iter(1, "x", &t), Term::max(Term::s(x(1)), t.clone()));
        assert_eq!(
            eval_m_iter(2, "x", &t),
            Term::max(Term::s(x(1)), Term::max(Term::s(x(2)), t.clone()))
        );
        // step law
        for k in 0..5 {
            let lhs = eval_m_iter(k + 1, "x", &t);
            let rhs = eval_m_iter(k, "x", &Term::max(Term::s(x(k + 1)), t.clone()));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn ladder_values() {
        assert_eq!(eval_m(0), Term::num(0));
        assert_eq!(eval_m(1).to_string(), "max(s(0),0)");
        assert_eq!(eval_m(2).to_string(), "max(s(max(s(0),0)),max(s(0),0))");
    }

    #[test]
    fn big_or_unfolds() {
        let body = Formula::atom(Atom::eq(Term::f(Term::var("α")), Term::Num(Omega::var("i"))));
        let f0 = Formula::big_or("i", Omega::num(0), body.clone());
        assert_eq!(f0.normalize(&OmegaEnv::new()).unwrap().to_string(), "f(α)=0");
        let fy = Formula::big_or("i", Omega::var("y").succ(), body);
        let mut env = OmegaEnv::new();
        env.insert("y".into(), 0);
        assert_eq!(fy.normalize(&env).unwrap().to_string(), "f(α)=0 | f(α)=1");
        assert_eq!(
            fy.normalize(&OmegaEnv::new()).unwrap_err(),
            Error::UnboundOmegaVar("y".into())
        );
    }

    #[test]
    fn unify_examples() {
        let a = Atom::le(Term::max(Term::var("β"), Term::var("δ")), Term::var("γ"));
        let m0 = Term::MIter(Omega::num(0), "x".into(), Box::new(Term::max(Term::s(x(1)), Term::var("t"))));
        let b = Atom::le(Term::max(Term::s(x(1)), Term::var("t")), m0.normalize(&OmegaEnv::new()).unwrap());
        let s = unify(&a, &b).unwrap();
        assert_eq!(s.get(&VarKey::Ind("β".into())), Some(&Term::s(x(1))));
        assert_eq!(s.get(&VarKey::Ind("δ".into())), Some(&Term::var("t")));
        assert_eq!(s.get(&VarKey::Ind("γ".into())), Some(&Term::max(Term::s(x(1)), Term::var("t"))));
        assert_eq!(s.apply_atom(&a), s.apply_atom(&b));

        let aa = Atom::le(Term::var("α"), Term::var("α"));
        assert!(unify(&aa, &aa).unwrap().is_empty());
        assert!(unify(&Atom::colour(Term::var("α"), 0), &aa).is_none());
    }

    #[test]
    fn occurs_check() {
        let a = Atom::le(Term::var("α"), Term::var("α"));
        let b = Atom::le(Term::var("β"), Term::s(Term::var("β")));
        assert!(unify(&a, &b).is_none());
    }

    #[test]
    fn apply_examples() {
        let mut s = Subst::new();
        s.bind(VarKey::Ind("β".into()), Term::s(Term::num(0)));
        let a = Atom::le(Term::var("β"), Term::var("γ"));
        assert_eq!(s.apply_atom(&a).to_string(), "s(0)<=γ");
        assert_eq!(Subst::new().apply_atom(&a), a);

        let theta = SubstSchema::ladder("y");
        let c = Atom::colour(Term::idx("y", 3), 2);
        assert_eq!(theta.apply_atom(&c).unwrap(), Atom::colour(eval_m(3), 2));
    }

    #[test]
    fn sort_mismatch_is_rejected() {
        let err = Subst::from_bindings(vec![("x".into(), Some(Omega::num(1)), Value::Omega(Omega::num(2)))]);
        assert!(matches!(err, Err(Error::SortMismatch { .. })));
    }

    #[test]
    fn small_step_matches_big_step() {
        let t = Term::MIter(
            Omega::App("plus".into(), vec![Omega::num(1), Omega::num(1)]),
            "x".into(),
            Box::new(Term::MLadder(Omega::num(2))),
        );
        let big = t.normalize(&OmegaEnv::new()).unwrap();
        assert_eq!(rewrite::normalize_with(&t, |_| 0), big);
        assert_eq!(rewrite::normalize_with(&t, |n| n - 1), big);
    }
}
