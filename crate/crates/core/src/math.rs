//! Direct refutation of `C(n)` built from the m-term lemmas, indexed by
//! bijections on colours, and the ordering ⋖_n.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::clause_sets::{c2, c3, c4, c5, Clause};
use crate::error::{Error, Result};
use crate::resolution::ResolutionTree;
use crate::terms::{eval_m_iter, Atom, Term};

/// The family `x_1, x_2, …` of the m-terms.
pub const FAMILY: &str = "x";

/// A permutation `b` of `{0..n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bijection(Vec<u64>);

impl Bijection {
    pub fn identity(n: u64) -> Bijection {
        Bijection((0..=n).collect())
    }

    pub fn new(values: Vec<u64>) -> Result<Bijection> {
        let n = values.len() as u64;
        let distinct: BTreeSet<u64> = values.iter().copied().collect();
        if n == 0 || distinct.len() as u64 != n || values.iter().any(|&v| v >= n) {
            return Err(Error::Range(format!("{:?} is not a permutation of 0..{}", values, n.saturating_sub(1))));
        }
        Ok(Bijection(values))
    }

    /// The largest element `n` of the domain.
    pub fn n(&self) -> u64 {
        self.0.len() as u64 - 1
    }

    pub fn at(&self, i: u64) -> Result<u64> {
        self.0.get(i as usize).copied().ok_or_else(|| Error::Range(format!("b({}) with n = {}", i, self.n())))
    }

    /// `b ∘ (i j)`: the values at positions `i` and `j` exchanged.
    pub fn swap(&self, i: u64, j: u64) -> Result<Bijection> {
        self.at(i)?;
        self.at(j)?;
        let mut v = self.0.clone();
        v.swap(i as usize, j as usize);
        Ok(Bijection(v))
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }
}

impl fmt::Display for Bijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

fn x(i: u64) -> Term {
    Term::idx(FAMILY, i)
}

fn sx(i: u64) -> Term {
    Term::s(x(i))
}

/// `m(k,x,t)`, unfolded.
pub fn m_iter(k: u64, t: &Term) -> Term {
    eval_m_iter(k, FAMILY, t)
}

/// `m(k,x,s(x_{k+1}))`.
pub fn m_succ(k: u64) -> Term {
    m_iter(k, &sx(k + 1))
}

/// `f(x_1)=b(0), …, f(x_{k+1})=b(k)`.
fn pi(k: i64, b: &Bijection) -> Result<Vec<Atom>> {
    (0..=k).map(|i| Ok(Atom::colour(x(i as u64 + 1), b.at(i as u64)?))).collect()
}

/// `c_b(k,n,z) = f(x_1)=b(0), …, f(x_{k+1})=b(k) ⊢ f(m(k+1,x,z))=b(k+1), …, f(m(k+1,x,z))=b(n)`.
/// `c_b(-1,n,z)` is `⊢ f(z)=0, …, f(z)=n`.
pub fn c_clause(k: i64, b: &Bijection, z: &Term) -> Result<Clause> {
    let n = b.n() as i64;
    if k < -1 || k > n {
        return Err(Error::Range(format!("c_b({},{}) needs -1 <= k <= n", k, n)));
    }
    if k == -1 {
        return Ok(Clause::new(vec![], (0..=b.n()).map(|i| Atom::colour(z.clone(), i)).collect()));
    }
    let top = m_iter(k as u64 + 1, z);
    let succ = ((k + 1)..=n).map(|i| Ok(Atom::colour(top.clone(), b.at(i as u64)?))).collect::<Result<_>>()?;
    Ok(Clause::new(pi(k, b)?, succ))
}

/// `c'_b(k,j) = f(x_1)=b(0), …, f(x_{k+1})=b(k) ⊢ f(M_k)=b(k+1), …, f(M_k)=b(j)`
/// with `M_k = m(k,x,s(x_{k+1}))`.
pub fn cprime_clause(k: u64, j: u64, b: &Bijection) -> Result<Clause> {
    if k > j || j > b.n() {
        return Err(Error::Range(format!("c'_b({},{}) needs k <= j <= {}", k, j, b.n())));
    }
    let mk = m_succ(k);
    let succ = ((k + 1)..=j).map(|i| Ok(Atom::colour(mk.clone(), b.at(i)?))).collect::<Result<_>>()?;
    Ok(Clause::new(pi(k as i64, b)?, succ))
}

/// Builds derivations from fresh copies of the clauses of `C(n)`.
pub struct Builder {
    n: u64,
    fresh: usize,
    cprime: HashMap<(u64, u64, Bijection), ResolutionTree>,
}

impl Builder {
    pub fn new(n: u64) -> Builder {
        Builder { n, fresh: 0, cprime: HashMap::new() }
    }

    fn copy(&mut self, c: Clause) -> ResolutionTree {
        self.fresh += 1;
        let k = self.fresh;
        ResolutionTree::leaf(c.rename_vars(&|v| format!("{}{}", v, k)))
    }

    fn fresh_var(&mut self, base: &str) -> Term {
        self.fresh += 1;
        Term::var(&format!("{}{}", base, self.fresh))
    }

    fn colour(&self, i: u64) -> Result<u64> {
        if i > self.n {
            return Err(Error::Range(format!("colour {} exceeds n = {}", i, self.n)));
        }
        Ok(i)
    }

    /// `⊢ t ≤ m(k,x,t)`.
    pub fn leq(&mut self, k: u64, t: &Term) -> Result<ResolutionTree> {
        if k == 0 {
            return Ok(ResolutionTree::leaf(Clause::new(vec![], vec![Atom::le(t.clone(), t.clone())])));
        }
        let t2 = Term::max(sx(k), t.clone());
        let ih = self.leq(k - 1, &t2)?;
        let pivot = Atom::le(t2.clone(), m_iter(k - 1, &t2));
        let c = self.copy(c3());
        ResolutionTree::resolve(ih, c, pivot, false)
    }

    /// `⊢ s(x_{k+1}) ≤ m(k,x,max(s(x_{k+1}),t))`.
    pub fn succ_leq(&mut self, k: u64, t: &Term) -> Result<ResolutionTree> {
        let t2 = Term::max(sx(k + 1), t.clone());
        let ih = self.leq(k, &t2)?;
        let pivot = Atom::le(t2.clone(), m_iter(k, &t2));
        let c = self.copy(c2());
        ResolutionTree::resolve(ih, c, pivot, false)
    }

    /// `f(x_{k+1})=i, f(m(k,x,max(s(x_{k+1}),t)))=i ⊢`.
    pub fn pair_max(&mut self, k: u64, i: u64, t: &Term) -> Result<ResolutionTree> {
        let i = self.colour(i)?;
        let l = self.succ_leq(k, t)?;
        let pivot = Atom::le(sx(k + 1), m_iter(k, &Term::max(sx(k + 1), t.clone())));
        let c = self.copy(c4(i));
        ResolutionTree::resolve(l, c, pivot, false)
    }

    /// `f(x_{k+1})=i, f(m(k,x,s(x_{k+1})))=i ⊢`.
    pub fn pair_succ(&mut self, k: u64, i: u64) -> Result<ResolutionTree> {
        let i = self.colour(i)?;
        let l = self.leq(k, &sx(k + 1))?;
        let pivot = Atom::le(sx(k + 1), m_succ(k));
        let c = self.copy(c4(i));
        ResolutionTree::resolve(l, c, pivot, false)
    }

    fn check_b(&self, b: &Bijection) -> Result<()> {
        if b.n() != self.n {
            return Err(Error::Range(format!("bijection {} is not on 0..{}", b, self.n)));
        }
        Ok(())
    }

    /// Concludes `c_b(k,n,z)`.
    pub fn c(&mut self, k: i64, b: &Bijection, z: &Term) -> Result<ResolutionTree> {
        self.check_b(b)?;
        if k == -1 {
            return Ok(ResolutionTree::leaf(c_clause(-1, b, z)?));
        }
        if k < -1 || k > self.n as i64 {
            return Err(Error::Range(format!("c_b({},{}) needs -1 <= k <= n", k, self.n)));
        }
        let y = self.fresh_var("y");
        let ih = self.c(k - 1, b, &y)?;
        let ku = k as u64;
        let bk = b.at(ku)?;
        let pm = self.pair_max(ku, bk, z)?;
        let pivot = Atom::colour(m_iter(ku, &Term::max(sx(ku + 1), z.clone())), bk);
        ResolutionTree::resolve(ih, pm, pivot, false)
    }

    /// Concludes `c'_b(k,n)`: C5 is resolved against the pairs
    /// `f(x_{i+1})=b(i), f(M_k)=b(i) ⊢` for `i < k`, then against
    /// `f(x_{k+1})=b(k), f(M_k)=b(k) ⊢`.
    pub fn cprime(&mut self, k: u64, b: &Bijection) -> Result<ResolutionTree> {
        self.check_b(b)?;
        if k > self.n {
            return Err(Error::Range(format!("c'_b({},n) needs k <= n = {}", k, self.n)));
        }
        let mk = m_succ(k);
        let mut cur = self.copy(c5(self.n));
        for i in 0..k {
            // T_i = max(s(x_{i+2}), … max(s(x_k), s(x_{k+1}))), so that
            // m(i, x, max(s(x_{i+1}), T_i)) is M_k.
            let mut t = sx(k + 1);
            for j in ((i + 2)..=k).rev() {
                t = Term::max(sx(j), t);
            }
            let bi = b.at(i)?;
            let pm = self.pair_max(i, bi, &t)?;
            cur = ResolutionTree::resolve(cur, pm, Atom::colour(mk.clone(), bi), false)?;
        }
        let bk = b.at(k)?;
        let ps = self.pair_succ(k, bk)?;
        ResolutionTree::resolve(cur, ps, Atom::colour(mk, bk), false)
    }

    /// Concludes `c'_b(k,j)` by induction over `A_n`: `c'_b(k,j+1)` is
    /// resolved with `c'_{b'}(k+1,k+1)`, where `b'` agrees with `b` below
    /// `k+1` and `b'(k+1) = b(j+1)`, followed by contraction.
    pub fn cprime_general(&mut self, k: u64, j: u64, b: &Bijection) -> Result<ResolutionTree> {
        self.check_b(b)?;
        if k > j || j > self.n {
            return Err(Error::Range(format!("c'_b({},{}) needs k <= j <= {}", k, j, self.n)));
        }
        if j == self.n {
            return self.cprime(k, b);
        }
        let key = (k, j, b.clone());
        if let Some(t) = self.cprime.get(&key) {
            return Ok(t.clone());
        }
        let left = self.cprime_general(k, j + 1, b)?;
        let b2 = b.swap(k + 1, j + 1)?;
        let right = self.cprime_general(k + 1, k + 1, &b2)?;
        let pivot = Atom::colour(m_succ(k), b.at(j + 1)?);
        let t = ResolutionTree::resolve(left, right, pivot, true)?;
        self.cprime.insert(key, t.clone());
        Ok(t)
    }

    /// `f(x_1)=c ⊢` for every colour `c`, each resolved against C5.
    pub fn refute(&mut self) -> Result<ResolutionTree> {
        let mut cur = self.copy(c5(self.n));
        for c in 0..=self.n {
            let b = Bijection::identity(self.n).swap(0, c)?;
            let unit = self.cprime_general(0, 0, &b)?;
            cur = ResolutionTree::resolve(cur, unit, Atom::colour(x(1), c), false)?;
        }
        Ok(cur)
    }
}

pub fn derive_leq(k: u64, t: &Term) -> Result<ResolutionTree> {
    Builder::new(0).leq(k, t)
}

pub fn derive_succ_leq(k: u64, t: &Term) -> Result<ResolutionTree> {
    Builder::new(0).succ_leq(k, t)
}

pub fn derive_pair_max(n: u64, k: u64, i: u64, t: &Term) -> Result<ResolutionTree> {
    Builder::new(n).pair_max(k, i, t)
}

pub fn derive_pair_succ(n: u64, k: u64, i: u64) -> Result<ResolutionTree> {
    Builder::new(n).pair_succ(k, i)
}

/// `c_b(k,n,z)`; `c_b(-1,-1,z)` is the empty clause.
pub fn derive_c(k: i64, n: i64, b: &Bijection, z: &Term) -> Result<ResolutionTree> {
    match (k, n) {
        (-1, -1) => Ok(ResolutionTree::leaf(Clause::empty())),
        (_, n) if n < 0 => Err(Error::Range(format!("c_b({},{}) needs n >= 0 unless k = n = -1", k, n))),
        (k, n) => Builder::new(n as u64).c(k, b, z),
    }
}

pub fn derive_cprime(k: u64, n: u64, b: &Bijection) -> Result<ResolutionTree> {
    Builder::new(n).cprime(k, b)
}

pub fn derive_cprime_general(k: u64, j: u64, n: u64, b: &Bijection) -> Result<ResolutionTree> {
    Builder::new(n).cprime_general(k, j, b)
}

pub fn refute_math(n: u64) -> Result<ResolutionTree> {
    Builder::new(n).refute()
}

/// `A_n = {(i,j) : i ≤ j ≤ n}`.
pub fn a_n(n: u64) -> Vec<(u64, u64)> {
    (0..=n).flat_map(|i| (i..=n).map(move |j| (i, j))).collect()
}

/// `(i,j) ⋖_n (l,k)`, condition by condition.
pub fn less_dot(n: u64, p: (u64, u64), q: (u64, u64)) -> bool {
    let ((i, j), (l, k)) = (p, q);
    let in_a = |(a, b): (u64, u64)| a <= b && b <= n;
    in_a(p)
        && in_a(q)
        && i <= n
        && k <= n
        && l <= n
        && j < n
        && l <= i
        && k <= j
        && ((i == l) == (j != k))
        && ((j == k) == (i != l))
}

/// Triples of `A_n` on which ⋖_n fails to be transitive.
pub fn transitivity_violations(n: u64) -> Vec<[(u64, u64); 3]> {
    let a = a_n(n);
    let mut out = Vec::new();
    for &p in &a {
        for &q in &a {
            if !less_dot(n, p, q) {
                continue;
            }
            for &r in &a {
                if less_dot(n, q, r) && !less_dot(n, p, r) {
                    out.push([p, q, r]);
                }
            }
        }
    }
    out
}
