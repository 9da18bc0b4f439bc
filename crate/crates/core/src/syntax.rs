//! Text grammar for ω-terms, terms, atoms, formulas, clauses, sequents and
//! CR lists. See `docs/formats.md` for the grammar.

use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::clause_sets::{Clause, Position, Sequent, Side};
use crate::crlist::CrList;
use crate::error::{Error, Result};
use crate::terms::{Atom, Formula, Omega, Pred, Term};

/// Identifiers read as ω-variables in term position unless told otherwise.
pub const DEFAULT_OMEGA_VARS: &[&str] = &["n", "k"];

pub struct Parser<'a> {
    src: &'a str,
    pos: usize,
    omega_vars: Vec<String>,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic()
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

impl<'a> Parser<'a> {
    pub fn new(src: &'a str) -> Parser<'a> {
        Parser { src, pos: 0, omega_vars: DEFAULT_OMEGA_VARS.iter().map(|s| s.to_string()).collect() }
    }

    pub fn with_omega_vars(mut self, vars: &[&str]) -> Parser<'a> {
        self.omega_vars = vars.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let consumed = &self.src[..self.pos];
        let line = consumed.matches('\n').count() + 1;
        let col = consumed.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) + 1;
        Err(Error::Syntax { line, col, msg: msg.into() })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    pub fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == ' ' || c == '\t' || c == '\r' {
                self.bump();
            } else {
                break;
            }
        }
    }

    pub fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.src.len()
    }

    pub fn expect_end(&mut self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.error(format!("unexpected `{}`", self.rest().chars().take(12).collect::<String>()))
        }
    }

    /// Consumes `tok` (after whitespace) if present.
    pub fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.error(format!("expected `{}`", tok))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        let r = self.rest();
        if r.starts_with(kw) && !r[kw.len()..].chars().next().is_some_and(is_ident_char) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        match self.peek() {
            Some(c) if is_ident_start(c) => {}
            _ => return self.error("expected identifier"),
        }
        let start = self.pos;
        while self.peek().is_some_and(is_ident_char) {
            self.bump();
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn digits(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        if start == self.pos {
            return self.error("expected numeral");
        }
        self.src[start..self.pos].parse().or_else(|_| self.error("numeral too large"))
    }

    fn peek_is_digit(&mut self) -> bool {
        self.skip_ws();
        self.peek().is_some_and(|c| c.is_ascii_digit())
    }

    fn plus_suffix(&mut self, o: Omega) -> Result<Omega> {
        let mut o = o;
        loop {
            let save = self.pos;
            if self.eat("+") {
                if self.peek_is_digit() {
                    let k = self.digits()?;
                    o = o.plus(k);
                    continue;
                }
                self.pos = save;
            }
            return Ok(o);
        }
    }

    pub fn omega(&mut self) -> Result<Omega> {
        self.skip_ws();
        let base = if self.peek_is_digit() {
            Omega::num(self.digits()?)
        } else if self.eat("(") {
            let o = self.omega()?;
            self.expect(")")?;
            o
        } else {
            let name = self.ident()?;
            if self.eat("(") {
                let mut args = vec![self.omega()?];
                while self.eat(",") {
                    args.push(self.omega()?);
                }
                self.expect(")")?;
                if name == "s" && args.len() == 1 {
                    args.remove(0).succ()
                } else {
                    Omega::App(name, args)
                }
            } else {
                Omega::Var(name)
            }
        };
        self.plus_suffix(base)
    }

    fn index(&mut self) -> Result<Omega> {
        if self.eat("{") {
            let o = self.omega()?;
            self.expect("}")?;
            Ok(o)
        } else if self.peek_is_digit() {
            Ok(Omega::num(self.digits()?))
        } else {
            Ok(Omega::Var(self.ident()?))
        }
    }

    pub fn term(&mut self) -> Result<Term> {
        self.skip_ws();
        if self.peek_is_digit() {
            let o = Omega::num(self.digits()?);
            return Ok(Term::Num(self.plus_suffix(o)?));
        }
        let name = self.ident()?;
        if self.rest().starts_with('_') {
            self.bump();
            return Ok(Term::Idx(name, self.index()?));
        }
        if self.rest().starts_with('(') {
            self.bump();
            if name == "m" {
                let k = self.omega()?;
                if self.eat(")") {
                    return Ok(Term::MLadder(k));
                }
                self.expect(",")?;
                let fam = self.ident()?;
                self.expect(",")?;
                let t = self.term()?;
                self.expect(")")?;
                return Ok(Term::MIter(k, fam, Box::new(t)));
            }
            let mut args = Vec::new();
            if !self.eat(")") {
                args.push(self.term()?);
                while self.eat(",") {
                    args.push(self.term()?);
                }
                self.expect(")")?;
            }
            return Ok(Term::Fn(name, args));
        }
        if self.omega_vars.contains(&name) {
            return Ok(Term::Num(self.plus_suffix(Omega::Var(name))?));
        }
        Ok(Term::Var(name))
    }

    pub fn atom(&mut self) -> Result<Atom> {
        let lhs = self.term()?;
        let pred = if self.eat("<=") || self.eat("≤") {
            Pred::Le
        } else if self.eat("<") {
            Pred::Lt
        } else if self.eat("=") {
            Pred::Eq
        } else {
            return self.error("expected `<=`, `<` or `=`");
        };
        let rhs = self.term()?;
        Ok(Atom::new(pred, lhs, rhs))
    }

    pub fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.eat("->") || self.eat("→") {
            let rhs = self.formula()?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut acc = self.conjunction()?;
        loop {
            self.skip_ws();
            if self.rest().starts_with("|-") {
                return Ok(acc);
            }
            if self.eat("|") || self.eat("∨") {
                acc = Formula::or(acc, self.conjunction()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut acc = self.unary()?;
        while self.eat("&") || self.eat("∧") {
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat("~") || self.eat("¬") {
            return Ok(Formula::not(self.unary()?));
        }
        for (kw, forall) in [("forall", true), ("∀", true), ("exists", false), ("∃", false)] {
            if self.eat_keyword(kw) {
                let v = self.ident()?;
                self.expect(".")?;
                let body = self.formula()?;
                return Ok(if forall { Formula::forall(&v, body) } else { Formula::exists(&v, body) });
            }
        }
        if self.eat("OR[") {
            let var = self.ident()?;
            self.expect("=")?;
            self.expect("0")?;
            self.expect("..")?;
            let hi = self.omega()?;
            self.expect("]")?;
            self.omega_vars.push(var.clone());
            let body = self.unary();
            self.omega_vars.pop();
            return Ok(Formula::big_or(&var, hi, body?));
        }
        if self.eat("(") {
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        Ok(Formula::Atom(self.atom()?))
    }

    fn turnstile(&mut self) -> bool {
        self.eat("|-") || self.eat("⊢")
    }

    fn at_turnstile_or_end(&mut self) -> bool {
        self.skip_ws();
        let r = self.rest();
        r.is_empty() || r.starts_with('\n') || r.starts_with("|-") || r.starts_with('⊢')
    }

    pub fn clause(&mut self) -> Result<Clause> {
        let mut c = Clause::empty();
        if !self.at_turnstile_or_end() {
            c.ante.push(self.atom()?);
            while self.eat(",") {
                c.ante.push(self.atom()?);
            }
        }
        if !self.turnstile() {
            return self.error("expected `|-`");
        }
        if !self.at_turnstile_or_end() {
            c.succ.push(self.atom()?);
            while self.eat(",") {
                c.succ.push(self.atom()?);
            }
        }
        Ok(c)
    }

    pub fn sequent(&mut self) -> Result<Sequent> {
        let mut s = Sequent::default();
        if !self.at_turnstile_or_end() {
            s.ante.push(self.formula()?);
            while self.eat(",") {
                s.ante.push(self.formula()?);
            }
        }
        if !self.turnstile() {
            return self.error("expected `|-`");
        }
        if !self.at_turnstile_or_end() {
            s.succ.push(self.formula()?);
            while self.eat(",") {
                s.succ.push(self.formula()?);
            }
        }
        Ok(s)
    }

    fn omega_list(&mut self, stop: char) -> Result<Vec<Omega>> {
        let mut out = Vec::new();
        self.skip_ws();
        if self.peek() == Some(stop) {
            return Ok(out);
        }
        out.push(self.omega()?);
        while self.eat(",") {
            out.push(self.omega()?);
        }
        Ok(out)
    }

    pub fn crlist(&mut self) -> Result<CrList> {
        self.expect("<")?;
        let front = self.omega_list('|')?;
        self.expect("|")?;
        self.skip_ws();
        let focus = if self.peek() == Some('|') { None } else { Some(self.omega()?) };
        self.expect("|")?;
        let back = self.omega_list('>')?;
        self.expect(">")?;
        match CrList::new(front, focus, back) {
            Ok(c) => Ok(c),
            Err(e) => self.error(e.to_string()),
        }
    }
}

fn whole<T>(src: &str, f: impl FnOnce(&mut Parser) -> Result<T>) -> Result<T> {
    let mut p = Parser::new(src);
    let v = f(&mut p)?;
    p.expect_end()?;
    Ok(v)
}

pub fn parse_omega(src: &str) -> Result<Omega> {
    whole(src, |p| p.omega())
}

pub fn parse_term(src: &str) -> Result<Term> {
    whole(src, |p| p.term())
}

pub fn parse_atom(src: &str) -> Result<Atom> {
    whole(src, |p| p.atom())
}

pub fn parse_formula(src: &str) -> Result<Formula> {
    whole(src, |p| p.formula())
}

pub fn parse_clause(src: &str) -> Result<Clause> {
    whole(src, |p| p.clause())
}

pub fn parse_sequent(src: &str) -> Result<Sequent> {
    whole(src, |p| p.sequent())
}

pub fn parse_crlist(src: &str) -> Result<CrList> {
    whole(src, |p| p.crlist())
}

/// One clause per line; blank lines and lines starting with `%` are skipped.
pub fn parse_clause_set(src: &str) -> Result<Vec<Clause>> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        out.push(parse_clause(line).map_err(|e| relocate(e, i))?);
    }
    Ok(out)
}

/// Shifts a single-line syntax error to line `offset + 1` of a larger input.
pub fn relocate(e: Error, offset: usize) -> Error {
    match e {
        Error::Syntax { line, col, msg } => Error::Syntax { line: line + offset, col, msg },
        other => other,
    }
}

macro_rules! from_str {
    ($t:ty, $f:ident) => {
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<$t> {
                $f(s)
            }
        }
    };
}

from_str!(Omega, parse_omega);
from_str!(Term, parse_term);
from_str!(Atom, parse_atom);
from_str!(Formula, parse_formula);
from_str!(Clause, parse_clause);
from_str!(Sequent, parse_sequent);
from_str!(CrList, parse_crlist);

impl FromStr for Position {
    type Err = Error;
    fn from_str(s: &str) -> Result<Position> {
        let t = s.trim();
        let side = match t.chars().next() {
            Some('A') => Side::Ante,
            Some('S') => Side::Succ,
            _ => return Err(Error::Syntax { line: 1, col: 1, msg: format!("bad position `{}`", s) }),
        };
        let index = t[1..]
            .parse()
            .map_err(|_| Error::Syntax { line: 1, col: 2, msg: format!("bad position `{}`", s) })?;
        Ok(Position { side, index })
    }
}

// Syntax objects travel through JSON in their text form.
macro_rules! serde_via_str {
    ($($t:ty),*) => {$(
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<$t, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(D::Error::custom)
            }
        }
    )*};
}

serde_via_str!(Omega, Term, Atom, Formula, Clause, Sequent, CrList, Position);

#[cfg(test)]
mod tests {
    use super::*;

    fn rt<T: FromStr<Err = Error> + ToString>(s: &str) {
        let v: T = s.parse().unwrap();
        assert_eq!(v.to_string(), s);
    }

    #[test]
    fn round_trips() {
        rt::<Term>("max(s(x_1),max(s(x_2),t))");
        rt::<Term>("x_{k+1}");
        rt::<Term>("y_k");
        rt::<Term>("m(k,x,max(s(x_3),t))");
        rt::<Term>("m(3)");
        rt::<Atom>("f(α)=n+1");
        rt::<Clause>("|- f(a)=0");
        rt::<Clause>("f(β)=0, f(α)=0, s(β)<=α |-");
        rt::<Clause>("|-");
        rt::<Clause>("max(α,β)<=γ |- α<=γ");
        rt::<Formula>("forall x. exists y. x<=y & OR[i=0..n] f(y)=i");
        rt::<Formula>("(forall x. x<=x) -> exists p. exists q. p<q & f(p)=f(q)");
        rt::<Formula>("~(a<=b | c<=d) & e<=e");
        rt::<CrList>("<4,3,2 | 1 | 0>");
        rt::<CrList>("<| 4 | 3,2,1,0>");
        rt::<CrList>("<||>");
    }

    #[test]
    fn omega_scope() {
        assert_eq!(parse_term("n").unwrap(), Term::Num(Omega::var("n")));
        assert_eq!(parse_term("α").unwrap(), Term::var("α"));
        let f = parse_formula("OR[i=0..2] f(z)=i").unwrap();
        assert!(matches!(f, Formula::BigOr { .. }));
        assert_eq!(f.normalize(&Default::default()).unwrap().to_string(), "f(z)=0 | f(z)=1 | f(z)=2");
    }

    #[test]
    fn errors_carry_positions() {
        match parse_clause("f(a)=0 |- f(b)") {
            Err(Error::Syntax { line: 1, col, .. }) => assert_eq!(col, 15),
            other => panic!("unexpected {:?}", other),
        }
        match parse_clause_set("|- a<=a\n\nf(a) |-") {
            Err(Error::Syntax { line: 3, .. }) => {}
            other => panic!("unexpected {:?}", other),
        }
    }
}
