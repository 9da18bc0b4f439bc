//! ω-lists and carriage return lists.
//!
//! A CR list `<F | m | B>` denotes `F ⊛ <m|B>` with the focus on `m`. Shift
//! moves the focus right; carriage return deletes the focused element and
//! puts the focus back on the first remaining element.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::terms::Omega;

/// Entries are ω-terms; the NiA schema only ever stores numerals.
pub type OmegaList = Vec<Omega>;

pub fn concat(l: &[Omega], h: &[Omega]) -> OmegaList {
    l.iter().chain(h).cloned().collect()
}

pub fn length(l: &[Omega]) -> Omega {
    Omega::num(l.len() as u64)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CrList {
    front: OmegaList,
    focus: Option<Omega>,
    back: OmegaList,
}

impl CrList {
    pub fn empty() -> CrList {
        CrList::default()
    }

    /// Rejects a missing focus with nonempty sides; that shape is not a CR list.
    pub fn new(front: OmegaList, focus: Option<Omega>, back: OmegaList) -> Result<CrList> {
        if focus.is_none() && !(front.is_empty() && back.is_empty()) {
            return Err(Error::Range("a CR list without focus must be empty".into()));
        }
        Ok(CrList { front, focus, back })
    }

    pub fn from_nums(front: &[u64], focus: u64, back: &[u64]) -> CrList {
        CrList {
            front: front.iter().map(|&k| Omega::num(k)).collect(),
            focus: Some(Omega::num(focus)),
            back: back.iter().map(|&k| Omega::num(k)).collect(),
        }
    }

    /// `CR_n = <| n | n-1, …, 0>`.
    pub fn canonical(n: u64) -> CrList {
        CrList {
            front: Vec::new(),
            focus: Some(Omega::num(n)),
            back: (0..n).rev().map(Omega::num).collect(),
        }
    }

    pub fn front(&self) -> &[Omega] {
        &self.front
    }

    pub fn focus(&self) -> Option<&Omega> {
        self.focus.as_ref()
    }

    pub fn back(&self) -> &[Omega] {
        &self.back
    }

    pub fn is_empty(&self) -> bool {
        self.focus.is_none()
    }

    /// True for the `<F | m | >` shape.
    pub fn is_fully_shifted(&self) -> bool {
        self.focus.is_some() && self.back.is_empty()
    }

    /// The denoted ω-list `F ⊛ <m|B>`.
    pub fn denotation(&self) -> OmegaList {
        let mut out = self.front.clone();
        out.extend(self.focus.iter().cloned());
        out.extend(self.back.iter().cloned());
        out
    }

    /// `|C|`, the length of the denoted list.
    pub fn len(&self) -> usize {
        self.front.len() + usize::from(self.focus.is_some()) + self.back.len()
    }

    pub fn mid(&self) -> Result<&Omega> {
        self.focus.as_ref().ok_or(Error::EmptyList)
    }

    pub fn shift(&self) -> CrList {
        match (&self.focus, self.back.split_first()) {
            (Some(m), Some((b1, b2))) => {
                let mut front = self.front.clone();
                front.push(m.clone());
                CrList { front, focus: Some(b1.clone()), back: b2.to_vec() }
            }
            _ => self.clone(),
        }
    }

    pub fn carriage_return(&self) -> CrList {
        if self.focus.is_none() {
            return self.clone();
        }
        let rest = concat(&self.front, &self.back);
        match rest.split_first() {
            Some((h, t)) => CrList { front: Vec::new(), focus: Some(h.clone()), back: t.to_vec() },
            None => CrList::empty(),
        }
    }

    /// The list with the focused element moved to the end and the focus
    /// reset to the front: `<| (F ⊛ B ⊛ <m>).1 | (F ⊛ B ⊛ <m>).2>`.
    pub fn rotate(&self) -> CrList {
        let Some(m) = &self.focus else { return self.clone() };
        let mut all = concat(&self.front, &self.back);
        all.push(m.clone());
        let (h, t) = all.split_first().expect("nonempty");
        CrList { front: Vec::new(), focus: Some(h.clone()), back: t.to_vec() }
    }

    /// Every list reachable from `self` by shift and carriage return.
    pub fn closure(&self) -> BTreeSet<CrList> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([self.clone()]);
        while let Some(c) = queue.pop_front() {
            if seen.insert(c.clone()) {
                queue.push_back(c.shift());
                queue.push_back(c.carriage_return());
            }
        }
        seen
    }
}

impl fmt::Display for CrList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |l: &[Omega]| l.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(",");
        let Some(m) = &self.focus else { return write!(f, "<||>") };
        write!(f, "<")?;
        if !self.front.is_empty() {
            write!(f, "{} ", join(&self.front))?;
        }
        write!(f, "| {} |", m)?;
        if !self.back.is_empty() {
            write!(f, " {}", join(&self.back))?;
        }
        write!(f, ">")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nums(ks: &[u64]) -> OmegaList {
        ks.iter().map(|&k| Omega::num(k)).collect()
    }

    #[test]
    fn concat_and_length() {
        assert_eq!(concat(&[], &nums(&[3, 2])), nums(&[3, 2]));
        assert_eq!(concat(&nums(&[4]), &nums(&[3, 2])), nums(&[4, 3, 2]));
        assert_eq!(concat(&nums(&[4, 3]), &[]), nums(&[4, 3]));
        assert_eq!(length(&[]), Omega::num(0));
        assert_eq!(length(&nums(&[3, 2, 1, 0])), Omega::num(4));
        assert_eq!(CrList::canonical(4).len(), 5);
    }

    #[test]
    fn worked_example() {
        let c = CrList::canonical(4);
        let s3 = c.shift().shift().shift();
        assert_eq!(s3, CrList::from_nums(&[4, 3, 2], 1, &[0]));
        assert_eq!(s3.carriage_return(), CrList::from_nums(&[], 4, &[3, 2, 0]));
    }

    #[test]
    fn operator_table() {
        let full = CrList::from_nums(&[4, 3, 2, 1], 0, &[]);
        assert_eq!(full.shift(), full);
        assert_eq!(CrList::empty().shift(), CrList::empty());
        assert_eq!(CrList::from_nums(&[], 2, &[1, 0]).carriage_return(), CrList::from_nums(&[], 1, &[0]));
        assert_eq!(CrList::from_nums(&[], 0, &[]).carriage_return(), CrList::empty());
        assert_eq!(CrList::empty().carriage_return(), CrList::empty());
    }

    #[test]
    fn mid_access() {
        assert_eq!(CrList::from_nums(&[4, 3, 2], 1, &[0]).mid().unwrap(), &Omega::num(1));
        assert_eq!(CrList::canonical(7).mid().unwrap(), &Omega::num(7));
        assert_eq!(CrList::empty().mid(), Err(Error::EmptyList));
    }

    #[test]
    fn display_form() {
        assert_eq!(CrList::from_nums(&[4, 3, 2], 1, &[0]).to_string(), "<4,3,2 | 1 | 0>");
        assert_eq!(CrList::empty().to_string(), "<||>");
        assert_eq!(CrList::canonical(2).to_string(), "<| 2 | 1,0>");
        assert_eq!(CrList::from_nums(&[1], 0, &[]).to_string(), "<1 | 0 |>");
    }

    #[test]
    fn rotate_moves_focus_to_end() {
        let c = CrList::from_nums(&[2], 1, &[0]);
        assert_eq!(c.rotate(), CrList::from_nums(&[], 2, &[0, 1]));
        let r = c.rotate().shift().shift();
        assert!(r.is_fully_shifted());
        assert_eq!(r.carriage_return(), c.carriage_return());
    }
}
