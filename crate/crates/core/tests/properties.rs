use std::collections::BTreeMap;

use proptest::prelude::*;

use ceres_core::clause_sets::{nia_clause_set, Clause};
use ceres_core::crlist::CrList;
use ceres_core::herbrand::{w_phi, w_psi};
use ceres_core::nia::refute;
use ceres_core::resolution::{check_tree, parse_tree, res_step, ResolutionTree};
use ceres_core::saturate::{is_ground_instance, saturate};
use ceres_core::syntax::{parse_clause, parse_crlist, parse_term};
use ceres_core::terms::{eval_m, eval_m_iter, Atom, Omega, Term};

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["α", "β", "γ", "x"]).prop_map(Term::var),
        (0u64..4).prop_map(Term::num),
        (0u64..5).prop_map(|k| Term::idx("y", k)),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Term::s),
            inner.clone().prop_map(Term::f),
            (inner.clone(), inner).prop_map(|(a, b)| Term::max(a, b)),
        ]
    })
}

fn atom() -> impl Strategy<Value = Atom> {
    (0..3usize, term(), term()).prop_map(|(p, l, r)| match p {
        0 => Atom::le(l, r),
        1 => Atom::lt(l, r),
        _ => Atom::eq(l, r),
    })
}

/// Ground colour atoms `f(m(i))=c`. Schematic `y_i` would be variables.
fn ground_atom() -> impl Strategy<Value = Atom> {
    (0u64..3, 0u64..3).prop_map(|(i, c)| Atom::colour(eval_m(i), c))
}

fn ground_clause() -> impl Strategy<Value = Clause> {
    (prop::collection::vec(ground_atom(), 0..3), prop::collection::vec(ground_atom(), 0..3))
        .prop_map(|(a, s)| Clause::new(a, s))
}

fn crlist() -> impl Strategy<Value = CrList> {
    (0u64..7, prop::collection::vec(any::<bool>(), 0..12)).prop_map(|(n, ops)| {
        ops.into_iter().fold(CrList::canonical(n), |c, shift| if shift { c.shift() } else { c.carriage_return() })
    })
}

fn holds(c: &Clause, model: &BTreeMap<Atom, bool>) -> bool {
    c.ante.iter().any(|a| !model[a]) || c.succ.iter().any(|a| model[a])
}

proptest! {
    #[test]
    fn term_print_parse(t in term()) {
        let s = t.to_string();
        let back = parse_term(&s).unwrap();
        prop_assert_eq!(back.to_string(), s);
        prop_assert_eq!(back, t);
    }

    #[test]
    fn clause_print_parse(a in prop::collection::vec(atom(), 0..4), s in prop::collection::vec(atom(), 0..4)) {
        let c = Clause::new(a, s);
        let back = parse_clause(&c.to_string()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn normalize_is_idempotent(t in term()) {
        let env = BTreeMap::new();
        let once = t.normalize(&env).unwrap();
        prop_assert_eq!(once.normalize(&env).unwrap(), once);
    }

    #[test]
    fn ladder_matches_iterated_m(k in 0u64..6) {
        let folded = Term::MLadder(Omega::num(k)).normalize(&BTreeMap::new()).unwrap();
        prop_assert_eq!(&folded, &eval_m(k));
        prop_assert_eq!(eval_m_iter(0, "x", &folded), folded);
    }

    #[test]
    fn crlist_shift_keeps_denotation(c in crlist()) {
        prop_assert_eq!(c.shift().denotation(), c.denotation());
        prop_assert_eq!(c.shift().len(), c.len());
    }

    #[test]
    fn crlist_return_drops_focus(c in crlist()) {
        let r = c.carriage_return();
        if c.is_empty() {
            prop_assert!(r.is_empty());
        } else {
            let mut want = c.denotation();
            want.remove(c.front().len());
            prop_assert_eq!(r.denotation(), want);
            prop_assert_eq!(r.len() + 1, c.len());
        }
    }

    #[test]
    fn crlist_print_parse(c in crlist()) {
        prop_assert_eq!(parse_crlist(&c.to_string()).unwrap(), c);
    }

    /// Ground resolvents are entailed by their premises.
    #[test]
    fn res_step_is_sound(p in ground_atom(), c1 in ground_clause(), c2 in ground_clause(), bits in any::<u16>()) {
        let mut left = c1.clone();
        left.succ.push(p.clone());
        let mut right = c2.clone();
        right.ante.push(p.clone());
        let (r, _) = res_step(&left, &right, &p).unwrap();
        let atoms: Vec<Atom> = (0..3).flat_map(|i| (0..3).map(move |c| Atom::colour(eval_m(i), c))).collect();
        for mask in [bits as u32, !(bits as u32), (bits as u32) << 3] {
            let model: BTreeMap<Atom, bool> = atoms.iter().enumerate().map(|(i, a)| (a.clone(), mask >> i & 1 == 1)).collect();
            if holds(&left, &model) && holds(&right, &model) {
                prop_assert!(holds(&r, &model));
            }
        }
    }

    #[test]
    fn tree_text_round_trip(n in 0u64..3, pick in any::<prop::sample::Index>()) {
        let t = refute(n).unwrap();
        let nodes = t.unique_nodes();
        let sub: &ResolutionTree = &nodes[pick.index(nodes.len())];
        let back = parse_tree(&sub.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), sub.to_text());
        prop_assert!(check_tree(&back, &nia_clause_set(n)).sound());
    }

    #[test]
    fn herbrand_list_lengths(n in 0u64..8) {
        let c = CrList::canonical(n);
        prop_assert_eq!(w_phi(&c).len() as u64, n + 2);
        prop_assert_eq!(w_psi(&c).dedup().len() as u64, (n + 1) * (n + 2) / 2);
    }
}

#[test]
fn saturation_leaves_are_ground_instances() {
    for n in 0..=2 {
        let (t, _) = saturate(n, n + 1).unwrap();
        for leaf in t.unwrap().leaf_clauses() {
            assert!(is_ground_instance(&leaf, n), "{}", leaf);
        }
    }
}
