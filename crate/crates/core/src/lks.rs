//! Ancestor-annotated LKS proofs with links, characteristic clause-set
//! term extraction and the NiA proof schema fixture.
//!
//! Inferences are not checked for logical correctness. A proof tree only
//! carries what extraction needs: the axioms, the binary inferences with
//! the ancestor status of their auxiliary formulas, and the links.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clause_sets::{config_string, ClauseSetTerm, Configuration, Position, Sequent, Side, SymbolRule, SymbolRules};
use crate::error::{Error, Result};
use crate::syntax::parse_sequent;
use crate::terms::{Formula, Omega, Term};

/// Ancestor status of a formula occurrence: `cut` for cut-ancestors (`*`),
/// `omega` for the end-sequent occurrence it descends into (`**` when that
/// occurrence is in the configuration).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub cut: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Position>,
}

impl Flags {
    pub fn cut() -> Flags {
        Flags { cut: true, omega: None }
    }

    pub fn omega(p: Position) -> Flags {
        Flags { cut: false, omega: Some(p) }
    }

    fn check(&self) -> Result<()> {
        if self.cut && self.omega.is_some() {
            return Err(Error::InconsistentFlags(format!(
                "occurrence marked both as cut-ancestor and as ancestor of {}",
                self.omega.unwrap()
            )));
        }
        Ok(())
    }

    /// Whether the occurrence is a cut- or Ω-ancestor under `omega`.
    pub fn selected(&self, omega: &Configuration) -> bool {
        self.cut || self.omega.is_some_and(|p| omega.contains(&p))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    pub formula: Formula,
    #[serde(flatten)]
    pub flags: Flags,
}

impl Occurrence {
    pub fn new(formula: Formula, flags: Flags) -> Occurrence {
        Occurrence { formula, flags }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProofNode {
    Axiom {
        ante: Vec<Occurrence>,
        succ: Vec<Occurrence>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        reconstructed: bool,
    },
    Unary {
        rule: String,
        premise: Box<ProofNode>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        conclusion: Option<Sequent>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        reconstructed: bool,
    },
    Binary {
        rule: String,
        left: Box<ProofNode>,
        right: Box<ProofNode>,
        /// Ancestor status shared by the auxiliary formulas.
        aux: Flags,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        conclusion: Option<Sequent>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        reconstructed: bool,
    },
    Link {
        proof: String,
        index: Omega,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        args: Vec<Term>,
        ante: Vec<Occurrence>,
        succ: Vec<Occurrence>,
    },
    /// A rewrite by the equational theory.
    Epsilon { premise: Box<ProofNode>, sequent: Sequent },
}

impl ProofNode {
    pub fn axiom(ante: Vec<Occurrence>, succ: Vec<Occurrence>) -> ProofNode {
        ProofNode::Axiom { ante, succ, reconstructed: false }
    }

    pub fn unary(rule: &str, premise: ProofNode) -> ProofNode {
        ProofNode::Unary { rule: rule.into(), premise: Box::new(premise), conclusion: None, reconstructed: false }
    }

    pub fn binary(rule: &str, left: ProofNode, right: ProofNode, aux: Flags) -> ProofNode {
        ProofNode::Binary {
            rule: rule.into(),
            left: Box::new(left),
            right: Box::new(right),
            aux,
            conclusion: None,
            reconstructed: false,
        }
    }

    pub fn link(proof: &str, index: Omega, ante: Vec<Occurrence>, succ: Vec<Occurrence>) -> ProofNode {
        ProofNode::Link { proof: proof.into(), index, args: Vec::new(), ante, succ }
    }

    fn for_each(&self, g: &mut dyn FnMut(&ProofNode)) {
        g(self);
        match self {
            ProofNode::Axiom { .. } | ProofNode::Link { .. } => {}
            ProofNode::Unary { premise, .. } | ProofNode::Epsilon { premise, .. } => premise.for_each(g),
            ProofNode::Binary { left, right, .. } => {
                left.for_each(g);
                right.for_each(g);
            }
        }
    }

    /// `(proof, index)` of every link in the tree.
    pub fn links(&self) -> Vec<(String, Omega)> {
        let mut out = Vec::new();
        self.for_each(&mut |n| {
            if let ProofNode::Link { proof, index, .. } = n {
                out.push((proof.clone(), index.clone()));
            }
        });
        out
    }

    pub fn count_reconstructed(&self) -> usize {
        let mut k = 0;
        self.for_each(&mut |n| match n {
            ProofNode::Axiom { reconstructed: true, .. }
            | ProofNode::Unary { reconstructed: true, .. }
            | ProofNode::Binary { reconstructed: true, .. } => k += 1,
            _ => {}
        });
        k
    }

    fn check_flags(&self, arity: Option<(usize, usize)>) -> Result<()> {
        let mut err = None;
        self.for_each(&mut |n| {
            let mut occs: Vec<&Flags> = Vec::new();
            match n {
                ProofNode::Axiom { ante, succ, .. } | ProofNode::Link { ante, succ, .. } => {
                    occs.extend(ante.iter().chain(succ).map(|o| &o.flags));
                }
                ProofNode::Binary { aux, .. } => occs.push(aux),
                _ => {}
            }
            for f in occs {
                let r = f.check().and_then(|_| match (f.omega, arity) {
                    (Some(p), Some((a, s))) => {
                        let len = if p.side == Side::Ante { a } else { s };
                        if p.index >= len {
                            Err(Error::InconsistentFlags(format!("{} is not an end-sequent position", p)))
                        } else {
                            Ok(())
                        }
                    }
                    _ => Ok(()),
                });
                if let Err(e) = r {
                    err.get_or_insert(e);
                }
            }
        });
        err.map_or(Ok(()), Err)
    }
}

fn selected(occs: &[Occurrence], omega: &Configuration) -> Vec<Formula> {
    occs.iter().filter(|o| o.flags.selected(omega)).map(|o| o.formula.clone()).collect()
}

/// The characteristic clause-set term `Θ^{π,Ω}`.
pub fn extract_clause_term(p: &ProofNode, omega: &Configuration) -> Result<ClauseSetTerm> {
    p.check_flags(None)?;
    extract(p, omega)
}

fn extract(p: &ProofNode, omega: &Configuration) -> Result<ClauseSetTerm> {
    Ok(match p {
        ProofNode::Axiom { ante, succ, .. } => {
            ClauseSetTerm::leaf(vec![Sequent::new(selected(ante, omega), selected(succ, omega))])
        }
        ProofNode::Unary { premise, .. } | ProofNode::Epsilon { premise, .. } => extract(premise, omega)?,
        ProofNode::Binary { left, right, aux, .. } => {
            let (l, r) = (extract(left, omega)?, extract(right, omega)?);
            if aux.selected(omega) {
                ClauseSetTerm::plus(l, r)
            } else {
                ClauseSetTerm::times(l, r)
            }
        }
        ProofNode::Link { proof, index, args, ante, succ } => {
            let mut config = Configuration::new();
            for (side, occs) in [(Side::Ante, ante), (Side::Succ, succ)] {
                for (i, o) in occs.iter().enumerate() {
                    if o.flags.selected(omega) {
                        config.insert(Position { side, index: i });
                    }
                }
            }
            ClauseSetTerm::Symbol { name: proof.clone(), config, index: index.clone(), args: args.clone() }
        }
    })
}

/// One proof-schema pair `ψ ↦ (π, ν(var))`. The end sequent is stated at
/// index `var`; the step proof concludes it at `var+1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaPair {
    pub name: String,
    pub var: String,
    pub end_sequent: Sequent,
    pub base: ProofNode,
    pub step: ProofNode,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofSchema {
    pub proofs: Vec<SchemaPair>,
}

pub type Configs = BTreeMap<String, Vec<Configuration>>;

/// The on-disk fixture: a schema plus the configurations to extract at.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    #[serde(flatten)]
    pub schema: ProofSchema,
    pub configs: Configs,
}

impl ProofSchema {
    pub fn get(&self, name: &str) -> Option<(usize, &SchemaPair)> {
        self.proofs.iter().enumerate().find(|(_, p)| p.name == name)
    }

    /// The end sequent of `name` at `n = gamma`.
    pub fn end_sequent(&self, name: &str, gamma: u64) -> Result<Sequent> {
        let (_, p) = self.get(name).ok_or_else(|| Error::UnknownSymbol(name.into()))?;
        let map = BTreeMap::from([(p.var.clone(), Omega::num(gamma))]);
        let s = p.end_sequent.subst_omega(&map);
        let env = Default::default();
        Ok(Sequent::new(
            s.ante.iter().map(|f| f.normalize(&env)).collect::<Result<_>>()?,
            s.succ.iter().map(|f| f.normalize(&env)).collect::<Result<_>>()?,
        ))
    }

    /// Link ordering, link arities and flag positions.
    pub fn validate(&self) -> Result<()> {
        for (i, pair) in self.proofs.iter().enumerate() {
            let arity = (pair.end_sequent.ante.len(), pair.end_sequent.succ.len());
            for (is_step, proof) in [(false, &pair.base), (true, &pair.step)] {
                proof.check_flags(Some(arity))?;
                let mut err = None;
                proof.for_each(&mut |n| {
                    if let ProofNode::Link { proof: target, index, ante, succ, .. } = n {
                        let r = self.check_link(i, pair, is_step, target, index, ante.len(), succ.len());
                        if let Err(e) = r {
                            err.get_or_insert(e);
                        }
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn check_link(
        &self,
        i: usize,
        pair: &SchemaPair,
        is_step: bool,
        target: &str,
        index: &Omega,
        a: usize,
        s: usize,
    ) -> Result<()> {
        let (j, tp) = self
            .get(target)
            .ok_or_else(|| Error::InvalidSchema(format!("{} links to unknown proof {}", pair.name, target)))?;
        let self_ok = is_step && j == i && *index == Omega::var(&pair.var);
        if !(self_ok || j > i) {
            return Err(Error::InvalidSchema(format!(
                "{} may link to itself only at {} in its step proof, or to later proofs; found {}({})",
                pair.name, pair.var, target, index
            )));
        }
        if (a, s) != (tp.end_sequent.ante.len(), tp.end_sequent.succ.len()) {
            return Err(Error::InconsistentFlags(format!(
                "link to {}({}) has {}+{} occurrences, its end sequent has {}+{}",
                target,
                index,
                a,
                s,
                tp.end_sequent.ante.len(),
                tp.end_sequent.succ.len()
            )));
        }
        Ok(())
    }
}

/// Both rules `cl^{ψ,Ω}(0)` and `cl^{ψ,Ω}(var+1)` for every listed `(ψ, Ω)`.
pub fn char_term_schema(schema: &ProofSchema, configs: &Configs) -> Result<SymbolRules> {
    schema.validate()?;
    let mut rules = SymbolRules::default();
    for (name, cs) in configs {
        let (_, pair) = schema.get(name).ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
        for omega in cs {
            let base = extract_clause_term(&pair.base, omega)?;
            let step = extract_clause_term(&pair.step, omega)?;
            let mut used = Vec::new();
            base.symbols(&mut used);
            step.symbols(&mut used);
            for (target, config) in used {
                if !configs.get(&target).is_some_and(|v| v.contains(&config)) {
                    return Err(Error::MissingConfiguration { proof: target, config: config_string(&config) });
                }
            }
            rules.insert(name, omega.clone(), SymbolRule { var: pair.var.clone(), params: Vec::new(), base, step });
        }
    }
    Ok(rules)
}

/// The entry term `cl^{ψ,∅}(n)` of the first proof of the schema.
pub fn entry_term(schema: &ProofSchema) -> Result<ClauseSetTerm> {
    let first = schema.proofs.first().ok_or_else(|| Error::InvalidSchema("empty proof schema".into()))?;
    Ok(ClauseSetTerm::symbol(&first.name, Configuration::new(), Omega::var("n")))
}

pub const NIA_FIXTURE_JSON: &str = include_str!("../fixtures/nia.json");

pub fn load_fixture(json: &str) -> Result<Fixture> {
    let f: Fixture = serde_json::from_str(json).map_err(|e| Error::Load(format!("fixture: {}", e)))?;
    f.schema.validate()?;
    Ok(f)
}

/// The NiA proof schema `<(ω(0), ω(n+1)), (ψ(0), ψ(n+1))>` with its
/// configurations `ω ↦ ∅`, `ψ ↦ {A0}`.
pub fn nia_fixture() -> (ProofSchema, Configs) {
    let f = load_fixture(NIA_FIXTURE_JSON).expect("bundled fixture is valid");
    (f.schema, f.configs)
}

fn seq(s: &str) -> Sequent {
    parse_sequent(s).expect("well-formed sequent literal")
}

/// The hand-written characteristic term schema of the NiA proof, with
/// `n` as the step variable.
pub fn nia_rules_reference() -> SymbolRules {
    let leaf = |s: &str| ClauseSetTerm::leaf(vec![seq(s)]);
    let a0: Configuration = [Position::ante(0)].into();
    let psi = |o: Omega| ClauseSetTerm::symbol("psi", a0.clone(), o);
    let n1 = Omega::var("n").succ();
    let mut rules = SymbolRules::default();
    rules.insert(
        "omega",
        Configuration::new(),
        SymbolRule {
            var: "n".into(),
            params: Vec::new(),
            base: ClauseSetTerm::plus(ClauseSetTerm::plus(psi(Omega::num(0)), leaf("|- α<=α")), leaf("|- f(α)=0")),
            step: ClauseSetTerm::plus(
                ClauseSetTerm::plus(psi(n1.clone()), leaf("|- α<=α")),
                leaf("|- OR[i=0..n+1] f(α)=i"),
            ),
        },
    );
    rules.insert(
        "psi",
        a0.clone(),
        SymbolRule {
            var: "n".into(),
            params: Vec::new(),
            base: ClauseSetTerm::times(leaf("s(β)<=α |-"), leaf("f(α)=0, f(β)=0 |-")),
            step: ClauseSetTerm::plus(
                ClauseSetTerm::plus(
                    ClauseSetTerm::plus(
                        psi(Omega::var("n")),
                        ClauseSetTerm::times(leaf("s(β)<=α |-"), leaf("f(α)=n+1, f(β)=n+1 |-")),
                    ),
                    leaf("max(α,β)<=γ |- α<=γ"),
                ),
                leaf("max(α,β)<=γ |- β<=γ"),
            ),
        },
    );
    rules
}

/// Rule-by-rule comparison of two term schemata up to ⊕ reassociation,
/// atom order and tautological axiom leaves. Returns the differing keys.
pub fn compare_rules(a: &SymbolRules, b: &SymbolRules) -> Vec<String> {
    let mut out = Vec::new();
    let keys: std::collections::BTreeSet<_> = a.rules.keys().chain(b.rules.keys()).collect();
    for k in keys {
        let label = format!("cl[{},{}]", k.0, config_string(&k.1));
        match (a.rules.get(k), b.rules.get(k)) {
            (Some(x), Some(y)) => {
                if x.base.canonical() != y.base.canonical() {
                    out.push(format!("{}(0)", label));
                }
                let ys = rename_step_var(&y.step, &y.var, &x.var);
                if x.step.canonical() != ys.canonical() {
                    out.push(format!("{}({}+1)", label, x.var));
                }
            }
            _ => out.push(label),
        }
    }
    out
}

fn rename_step_var(t: &ClauseSetTerm, from: &str, to: &str) -> ClauseSetTerm {
    if from == to {
        return t.clone();
    }
    let map = BTreeMap::from([(from.to_string(), Omega::var(to))]);
    match t {
        ClauseSetTerm::Leaf(s) => ClauseSetTerm::Leaf(s.iter().map(|q| q.subst_omega(&map)).collect()),
        ClauseSetTerm::Plus(x, y) => ClauseSetTerm::plus(rename_step_var(x, from, to), rename_step_var(y, from, to)),
        ClauseSetTerm::Times(x, y) => ClauseSetTerm::times(rename_step_var(x, from, to), rename_step_var(y, from, to)),
        ClauseSetTerm::Symbol { name, config, index, args } => ClauseSetTerm::Symbol {
            name: name.clone(),
            config: config.clone(),
            index: index.subst(&map),
            args: args.clone(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clause_sets::{nia_clause_set, normalize_symbols, same_modulo_renaming, tautology_elim};

    fn occ(s: &str, flags: Flags) -> Occurrence {
        Occurrence::new(s.parse().unwrap(), flags)
    }

    #[test]
    fn axiom_leaf_keeps_flagged_occurrences() {
        let ax = ProofNode::axiom(
            vec![occ("f(β)=0", Flags::cut()), occ("f(α)=0", Flags::cut())],
            vec![occ("f(β)=f(α)", Flags::default())],
        );
        let t = extract_clause_term(&ax, &Configuration::new()).unwrap();
        assert_eq!(t.to_string(), "{f(β)=0, f(α)=0 |-}");
    }

    #[test]
    fn binary_on_ancestors_is_plus() {
        let l = ProofNode::axiom(vec![], vec![occ("α<=α", Flags::cut())]);
        let r = ProofNode::axiom(vec![occ("f(α)=0", Flags::default())], vec![occ("f(α)=0", Flags::cut())]);
        let t = extract_clause_term(&ProofNode::binary("and:r", l.clone(), r.clone(), Flags::cut()), &Configuration::new());
        assert!(matches!(t.unwrap(), ClauseSetTerm::Plus(..)));
        let t = extract_clause_term(&ProofNode::binary("and:r", l, r, Flags::default()), &Configuration::new());
        assert!(matches!(t.unwrap(), ClauseSetTerm::Times(..)));
    }

    #[test]
    fn both_flags_is_inconsistent() {
        let bad = Flags { cut: true, omega: Some(Position::ante(0)) };
        let ax = ProofNode::axiom(vec![occ("a<=a", bad)], vec![]);
        assert!(matches!(extract_clause_term(&ax, &Configuration::new()), Err(Error::InconsistentFlags(_))));
    }

    #[test]
    fn fixture_reproduces_reference_rules() {
        let (schema, configs) = nia_fixture();
        let rules = char_term_schema(&schema, &configs).unwrap();
        assert_eq!(rules.rules.len(), 2);
        assert_eq!(compare_rules(&rules, &nia_rules_reference()), Vec::<String>::new());
        let (_, psi) = schema.get("psi").unwrap();
        assert!(psi.step.count_reconstructed() > 0);
    }

    #[test]
    fn omega_base_matches_first_reference_line() {
        let (schema, _) = nia_fixture();
        let (_, omega) = schema.get("omega").unwrap();
        let t = extract_clause_term(&omega.base, &Configuration::new()).unwrap();
        let r = nia_rules_reference();
        assert_eq!(t.canonical(), r.get("omega", &Configuration::new()).unwrap().base.canonical());
    }

    #[test]
    fn missing_configuration_is_an_error() {
        let (schema, mut configs) = nia_fixture();
        configs.remove("psi");
        assert!(matches!(char_term_schema(&schema, &configs), Err(Error::MissingConfiguration { .. })));
    }

    #[test]
    fn end_sequent_at_one() {
        let (schema, _) = nia_fixture();
        let s = schema.end_sequent("omega", 1).unwrap();
        assert_eq!(s.to_string(), "forall x. f(x)=0 | f(x)=1 |- exists p. exists q. p<q & f(p)=f(q)");
    }

    #[test]
    fn extraction_normalizes_to_clause_set() {
        let (schema, configs) = nia_fixture();
        let rules = char_term_schema(&schema, &configs).unwrap();
        let top = entry_term(&schema).unwrap();
        for n in 1..4 {
            let got = tautology_elim(&normalize_symbols(&rules, &top, n).unwrap());
            assert!(same_modulo_renaming(&got, &nia_clause_set(n)), "n={}", n);
        }
    }

    #[test]
    fn base_case_has_no_max_projections() {
        // cl[omega,{}](0) only reaches cl[psi,{A0}](0), whose proof has no
        // max-projection axioms, so C2 and C3 are absent at n = 0.
        let (schema, configs) = nia_fixture();
        let rules = char_term_schema(&schema, &configs).unwrap();
        let got = tautology_elim(&normalize_symbols(&rules, &entry_term(&schema).unwrap(), 0).unwrap());
        let (extra, missing) = crate::clause_sets::diff_modulo_renaming(&got, &nia_clause_set(0));
        assert!(extra.is_empty());
        assert!(same_modulo_renaming(&missing, &[crate::clause_sets::c2(), crate::clause_sets::c3()]));
    }

    #[test]
    fn fixture_round_trips_through_json() {
        let f = load_fixture(NIA_FIXTURE_JSON).unwrap();
        let text = serde_json::to_string_pretty(&f).unwrap();
        assert_eq!(load_fixture(&text).unwrap(), f);
    }

    #[test]
    fn corrupted_fixture_fails_to_load() {
        assert!(matches!(load_fixture("{\"proofs\": 3}"), Err(Error::Load(_))));
        let broken = NIA_FIXTURE_JSON.replacen("s(β)<=α", "s(β)<=", 1);
        assert!(matches!(load_fixture(&broken), Err(Error::Load(_))));
    }
}
