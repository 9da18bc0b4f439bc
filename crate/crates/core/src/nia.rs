//! The CR-list resolution proof schema ρ1–ρ4 refuting `C(n)`, with its
//! substitutions and the worked n=2 checkpoints.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::clause_sets::{nia_clause_set, Clause, DEFAULT_BUDGET};
use crate::crlist::CrList;
use crate::error::{Error, Result};
use crate::resolution::{
    check_tree, ClauseExpr, CrExpr, Index, IndexExpr, RTerm, ResolutionSchema, ResolutionTree, Rules, SchemaSymbol,
    Unfolder, Verdict, CR_LEN, CR_LEN_RETURN, CR_MID,
};
use crate::terms::{Atom, Omega, OmegaEnv, Subst, SubstSchema, Term};

/// How the undefined `X′` and the accumulating `Y` of the printed table are read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Reading {
    /// ρ2 walks `Rot(C)`, `X′` is the clause ρ1 was called with, and `Y`
    /// stays `⊢`. This is the reading that checks.
    #[default]
    Repaired,
    /// The table as printed: ρ2 walks `CR_{|C|}≫`, `X′ = X`, and `Y`
    /// collects `⊢ f(y_{|C|}) = …` at every recursive call.
    Printed,
}

impl FromStr for Reading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Reading> {
        match s {
            "repaired" => Ok(Reading::Repaired),
            "printed" => Ok(Reading::Printed),
            other => Err(Error::Load(format!("unknown reading `{}`", other))),
        }
    }
}

impl fmt::Display for Reading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reading::Repaired => "repaired",
            Reading::Printed => "printed",
        })
    }
}

fn o(v: &str) -> Omega {
    Omega::var(v)
}

fn pred(x: Omega) -> Omega {
    Omega::App("pred".into(), vec![x])
}

fn y(k: Omega) -> Term {
    Term::Idx("y".into(), k)
}

fn colour(t: Term, w: Omega) -> Atom {
    Atom::eq(Term::f(t), Term::Num(w))
}

fn ante(a: Vec<Atom>) -> Clause {
    Clause::new(a, vec![])
}

fn succ(a: Vec<Atom>) -> Clause {
    Clause::new(vec![], a)
}

/// `C1(t) = ⊢ t ≤ t`.
fn c1(t: Term) -> Clause {
    succ(vec![Atom::le(t.clone(), t)])
}

/// `C2(t,w) = max(s(t),t) ≤ w ⊢ s(t) ≤ w`.
fn c2(t: Term, w: Term) -> Clause {
    Clause::new(vec![Atom::le(Term::max(Term::s(t.clone()), t.clone()), w.clone())], vec![Atom::le(Term::s(t), w)])
}

/// `C3(t,w) = max(s(t),t) ≤ w ⊢ t ≤ w`.
fn c3(t: Term, w: Term) -> Clause {
    Clause::new(vec![Atom::le(Term::max(Term::s(t.clone()), t.clone()), w.clone())], vec![Atom::le(t, w)])
}

/// `C4(t,w,k) = f(t)=k, f(w)=k, s(t) ≤ w ⊢`.
fn c4(t: Term, w: Term, k: Omega) -> Clause {
    ante(vec![colour(t.clone(), k.clone()), colour(w.clone(), k), Atom::le(Term::s(t), w)])
}

fn max_step(p: Omega, q: Omega) -> Atom {
    Atom::le(Term::max(Term::s(y(p.clone())), y(p)), y(q))
}

fn call(symbol: &str, index: CrExpr, omegas: [Omega; 5], clauses: [ClauseExpr; 3]) -> RTerm {
    RTerm::Call {
        symbol: symbol.into(),
        index: IndexExpr::Cr(index),
        omega_args: omegas.to_vec(),
        families: vec!["y".into()],
        clause_args: clauses.to_vec(),
    }
}

fn leaf(c: Clause) -> RTerm {
    RTerm::leaf(ClauseExpr::lits(c))
}

fn symbol(name: &str, rules: Rules) -> SchemaSymbol {
    SchemaSymbol {
        name: name.into(),
        omega_params: ["n", "w", "t", "p", "q"].map(String::from).to_vec(),
        family_params: vec!["y".into()],
        clause_params: ["X", "X0", "Y"].map(String::from).to_vec(),
        rules,
    }
}

/// ρ1–ρ4 over `ρ(C, n, w, t, p, q, y, X, X0, Y)`. `X0` makes the printed
/// `X′` explicit; under [`Reading::Printed`] it is always passed `X`.
pub fn nia_schema(reading: Reading) -> ResolutionSchema {
    let printed = reading == Reading::Printed;
    let (n, w, t, p, q) = (o("n"), o("w"), o("t"), o("p"), o("q"));
    let (len, mid) = (o(CR_LEN), o(CR_MID));
    let x = || ClauseExpr::var("X");
    let yv = || ClauseExpr::var("Y");
    let z = Omega::num(0);
    let zeros = || [o("n"), Omega::num(0), Omega::num(0), Omega::num(0), Omega::num(0)];
    let same = || [o("n"), o("w"), o("t"), o("p"), o("q")];

    // ρ1
    let rho2_index = if printed { CrExpr::Canonical(len.clone()).shift() } else { CrExpr::Arg.rotate() };
    let rho2_call = call(
        "rho2",
        rho2_index,
        [n.clone(), mid.clone(), Omega::num(1), o(CR_LEN_RETURN), len.clone()],
        [
            ClauseExpr { lits: ante(vec![colour(y(len.clone()), mid.clone())]), ..x() },
            x(),
            yv(),
        ],
    );
    let y_step = |w: Omega| -> ClauseExpr {
        if printed {
            ClauseExpr { lits: succ(vec![colour(y(len.clone()), w)]), ..yv() }
        } else {
            yv()
        }
    };
    // The printed general rule omits this resolvent's pivot; it is
    // f(y_|C|) = ⌊C⌋, as in the rule for <F|m|>.
    let rho1 = Rules::Cr {
        empty: RTerm::leaf(ClauseExpr { covers: vec![(y(z.clone()), n.clone())], ..yv() }),
        last: RTerm::res(
            rho2_call.clone(),
            RTerm::leaf(ClauseExpr { covers: vec![(y(len.clone()), n.clone())], ..yv() }),
            colour(y(len.clone()), mid.clone()),
        ),
        general: RTerm::res(
            rho2_call,
            call("rho1", CrExpr::Arg.shift(), zeros(), [x(), x(), y_step(mid.clone())]),
            colour(y(len.clone()), mid.clone()),
        ),
    };

    // ρ2; both printed rules lack the pivot f(y_p) = w.
    let rho3_call = call(
        "rho3",
        CrExpr::Canonical(t.clone()),
        same(),
        [ClauseExpr { lits: ante(vec![colour(y(p.clone()), w.clone())]), ..x() }, x(), yv()],
    );
    let back = if printed { x() } else { ClauseExpr::var("X0") };
    let rho2 = Rules::Cr {
        empty: leaf(Clause::empty()),
        last: RTerm::res(
            rho3_call.clone(),
            call("rho1", CrExpr::Arg.ret(), zeros(), [back.clone(), back, y_step(w.clone())]),
            colour(y(p.clone()), w.clone()),
        ),
        general: RTerm::res(
            rho3_call,
            call(
                "rho2",
                CrExpr::Arg.shift(),
                [n.clone(), w.clone(), t.clone().succ(), pred(p.clone()), q.clone()],
                [x(), ClauseExpr::var("X0"), y_step(w.clone())],
            ),
            colour(y(p.clone()), w.clone()),
        ),
    };

    // ρ3
    let rho3_body = |index: CrExpr| {
        RTerm::res(
            RTerm::leaf(ClauseExpr { lits: c4(y(p.clone()), y(q.clone()), w.clone()), ..x() }),
            RTerm::res(
                call("rho4", index, [n.clone(), w.clone(), t.clone(), p.clone().succ(), q.clone()], [x(), x(), yv()]),
                leaf(c2(y(p.clone()), y(q.clone()))),
                max_step(p.clone(), q.clone()),
            ),
            Atom::le(Term::s(y(p.clone())), y(q.clone())),
        )
    };
    let rho3 = Rules::Cr {
        empty: leaf(Clause::empty()),
        last: rho3_body(CrExpr::Arg),
        general: rho3_body(CrExpr::Arg.shift()),
    };

    // ρ4
    let rho4 = Rules::Cr {
        empty: leaf(Clause::empty()),
        last: leaf(c1(y(q.clone()))),
        general: RTerm::res(
            call("rho4", CrExpr::Arg.shift(), [n.clone(), w.clone(), t.clone(), p.clone().succ(), q.clone()], [x(), x(), yv()]),
            leaf(c3(y(p.clone()), y(q.clone()))),
            max_step(p, q),
        ),
    };

    ResolutionSchema {
        symbols: vec![symbol("rho1", rho1), symbol("rho2", rho2), symbol("rho3", rho3), symbol("rho4", rho4)],
    }
}

/// θ, ν and ϑ: `X, Y ← ⊢`, `w, t, p, q ← 0`, `y(k) ← λk.m(k)`.
pub struct Bindings {
    pub theta: BTreeMap<String, Clause>,
    pub nu: OmegaEnv,
    pub vartheta: SubstSchema,
}

pub fn bindings(n: u64) -> Bindings {
    let theta = ["X", "X0", "Y"].iter().map(|x| (x.to_string(), Clause::empty())).collect();
    let mut nu: OmegaEnv = ["w", "t", "p", "q"].iter().map(|v| (v.to_string(), 0)).collect();
    nu.insert("n".into(), n);
    Bindings { theta, nu, vartheta: SubstSchema::ladder("y") }
}

/// The ground values of `y_0 … y_{n+1}`.
pub fn ground_bindings(n: u64) -> Result<Subst> {
    SubstSchema::ladder("y").ground(n + 1)
}

pub fn refute_with(n: u64, reading: Reading, budget: u64) -> Result<ResolutionTree> {
    refute_at(&CrList::canonical(n), n, reading, budget)
}

pub fn refute(n: u64) -> Result<ResolutionTree> {
    refute_with(n, Reading::Repaired, DEFAULT_BUDGET)
}

/// Unfolds ρ1 at `index`, which must be the canonical list `CR_n`.
pub fn refute_at(index: &CrList, n: u64, reading: Reading, budget: u64) -> Result<ResolutionTree> {
    if *index != CrList::canonical(n) {
        return Err(Error::InvalidSchema(format!("entry index {} is not CR_{}", index, n)));
    }
    let schema = nia_schema(reading);
    let b = bindings(n);
    Unfolder::new(&schema, &b.vartheta, budget).unfold("rho1", Index::Cr(index.clone()), &b.theta, &b.nu)
}

/// Unfolds and checks against `C(n)`.
pub fn refute_and_check(n: u64, reading: Reading, budget: u64) -> Result<(ResolutionTree, Verdict)> {
    let t = refute_with(n, reading, budget)?;
    let v = check_tree(&t, &nia_clause_set(n));
    Ok((t, v))
}

/// The clauses labelled (0)–(15) in the worked n=2 refutation, over `y_0 … y_3`.
/// Label (6) is printed there with colour 0 and label (14) is printed as a
/// second (12); both are corrected here to the clauses the derivation
/// actually produces.
pub fn worked_checkpoints() -> Vec<(u32, Clause)> {
    let f = |i: u64, c: u64| Atom::colour(Term::idx("y", i), c);
    let neg = |a: Vec<(u64, u64)>| ante(a.into_iter().map(|(i, c)| f(i, c)).collect());
    let pos = |a: Vec<(u64, u64)>| succ(a.into_iter().map(|(i, c)| f(i, c)).collect());
    vec![
        (0, neg(vec![(3, 2), (2, 2)])),
        (1, neg(vec![(3, 2), (1, 2)])),
        (2, neg(vec![(3, 2), (0, 2)])),
        (3, pos(vec![(3, 2)])),
        (4, neg(vec![(3, 1), (2, 1)])),
        (5, neg(vec![(3, 1), (1, 1)])),
        (6, neg(vec![(3, 1), (0, 1)])),
        (7, pos(vec![(3, 2), (3, 1)])),
        (8, neg(vec![(3, 0), (2, 0)])),
        (9, neg(vec![(3, 0), (1, 0)])),
        (10, neg(vec![(3, 0), (0, 0)])),
        (11, pos(vec![(2, 2), (1, 2), (0, 2)])),
        (12, neg(vec![(1, 0), (0, 0)])),
        (13, neg(vec![(2, 1), (0, 1)])),
        (14, neg(vec![(2, 1), (1, 1)])),
        (15, pos(vec![(1, 1), (0, 1), (1, 2), (0, 2)])),
    ]
}

/// Checkpoints missing from the tree's node conclusions, modulo atom order.
pub fn missing_checkpoints(tree: &ResolutionTree) -> Result<Vec<u32>> {
    let ground = ground_bindings(2)?;
    let have: Vec<_> = tree.conclusions().iter().map(|c| c.as_sets()).collect();
    Ok(worked_checkpoints()
        .into_iter()
        .filter(|(_, c)| !have.contains(&c.apply(&ground).as_sets()))
        .map(|(l, _)| l)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{eval_m, VarKey};

    #[test]
    fn schema_is_well_formed() {
        nia_schema(Reading::Repaired).validate().unwrap();
        nia_schema(Reading::Printed).validate().unwrap();
    }

    #[test]
    fn refutes_small_instances() {
        for n in 0..=3 {
            let (t, v) = refute_and_check(n, Reading::Repaired, DEFAULT_BUDGET).unwrap();
            assert!(v.passes(), "n={}: {}", n, v);
            assert!(t.conclusion().is_empty());
        }
    }

    #[test]
    fn n2_contains_checkpoints() {
        let t = refute(2).unwrap();
        assert_eq!(missing_checkpoints(&t).unwrap(), Vec::<u32>::new());
    }

    #[test]
    fn n2_bindings_are_the_ladder() {
        let g = ground_bindings(2).unwrap();
        for k in 0..=3 {
            assert_eq!(g.get(&VarKey::Idx("y".into(), Omega::num(k))), Some(&eval_m(k)));
        }
        assert_eq!(eval_m(1).to_string(), "max(s(0),0)");
    }

    #[test]
    fn n0_uses_only_base_clauses() {
        let (_, v) = refute_and_check(0, Reading::Repaired, DEFAULT_BUDGET).unwrap();
        assert!(v.passes());
        assert!(v.leaf_sources.keys().all(|&i| i < 5));
    }

    #[test]
    fn printed_reading_does_not_refute() {
        let r = refute_and_check(2, Reading::Printed, 10_000);
        assert!(!matches!(r, Ok((_, v)) if v.passes()));
    }

    #[test]
    fn non_canonical_entry_is_rejected() {
        let c = CrList::from_nums(&[], 0, &[1, 2]);
        assert!(matches!(refute_at(&c, 2, Reading::Repaired, DEFAULT_BUDGET), Err(Error::InvalidSchema(_))));
    }

    #[test]
    fn sizes_grow() {
        let sizes: Vec<u64> = (0..=3).map(|n| refute(n).unwrap().size()).collect();
        assert!(sizes.windows(2).all(|w| w[0] < w[1]), "{:?}", sizes);
    }
}
