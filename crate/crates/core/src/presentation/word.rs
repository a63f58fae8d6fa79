use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::PresentationError;

pub type Gen = u16;

/// A positive word; the empty word is the identity.
pub type Word = Vec<Gen>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub gen: Gen,
    pub inv: bool,
}

impl Letter {
    pub fn pos(gen: Gen) -> Self {
        Letter { gen, inv: false }
    }
    pub fn neg(gen: Gen) -> Self {
        Letter { gen, inv: true }
    }
    pub fn inverse(self) -> Self {
        Letter { gen: self.gen, inv: !self.inv }
    }
}

/// A word in generators and their inverses.
pub type GroupWord = Vec<Letter>;

pub fn free_reduce(w: &[Letter]) -> GroupWord {
    let mut out: GroupWord = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn group_inverse(w: &[Letter]) -> GroupWord {
    w.iter().rev().map(|l| l.inverse()).collect()
}

pub fn to_group_word(w: &[Gen]) -> GroupWord {
    w.iter().map(|&g| Letter::pos(g)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
    rank: Vec<usize>,
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, PresentationError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || !n.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'') {
                return Err(PresentationError::Parse(format!("bad generator name {n:?}")));
            }
            if n.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                return Err(PresentationError::Parse(format!("generator {n:?} starts with a digit")));
            }
            if names[..i].contains(n) {
                return Err(PresentationError::Parse(format!("duplicate generator {n:?}")));
            }
        }
        let rank = (0..names.len()).collect();
        Ok(Alphabet { names, rank })
    }

    /// Reorders the comparison rank; `order` lists every generator once.
    pub fn with_order<S: AsRef<str>>(mut self, order: &[S]) -> Result<Self, PresentationError> {
        if order.len() != self.names.len() {
            return Err(PresentationError::Parse("order must list every generator exactly once".into()));
        }
        let mut rank = vec![usize::MAX; self.names.len()];
        for (r, name) in order.iter().enumerate() {
            let g = self.index(name.as_ref())?;
            if rank[g as usize] != usize::MAX {
                return Err(PresentationError::Parse(format!("generator {} repeated in order", name.as_ref())));
            }
            rank[g as usize] = r;
        }
        self.rank = rank;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, g: Gen) -> &str {
        &self.names[g as usize]
    }

    pub fn rank(&self, g: Gen) -> usize {
        self.rank[g as usize]
    }

    pub fn gens(&self) -> impl Iterator<Item = Gen> + '_ {
        let mut v: Vec<Gen> = (0..self.names.len() as Gen).collect();
        v.sort_by_key(|&g| self.rank[g as usize]);
        v.into_iter()
    }

    pub fn index(&self, name: &str) -> Result<Gen, PresentationError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| i as Gen)
            .ok_or_else(|| PresentationError::Parse(format!("unknown generator {name:?}")))
    }

    /// Length-lexicographic comparison under the alphabet rank.
    pub fn cmp_words(&self, u: &[Gen], v: &[Gen]) -> Ordering {
        u.len().cmp(&v.len()).then_with(|| {
            for (a, b) in u.iter().zip(v) {
                let c = self.rank(*a).cmp(&self.rank(*b));
                if c != Ordering::Equal {
                    return c;
                }
            }
            Ordering::Equal
        })
    }

    fn compact(&self) -> bool {
        self.names.iter().all(|n| n.chars().count() == 1)
    }

    fn push_power(&self, out: &mut String, name: &str, e: i64) {
        if !out.is_empty() && !self.compact() {
            out.push(' ');
        }
        out.push_str(name);
        if e != 1 {
            let _ = write!(out, "^{e}");
        }
    }

    pub fn fmt_word(&self, w: &[Gen]) -> String {
        if w.is_empty() {
            return "1".into();
        }
        let mut out = String::new();
        let mut i = 0;
        while i < w.len() {
            let mut j = i;
            while j < w.len() && w[j] == w[i] {
                j += 1;
            }
            self.push_power(&mut out, self.name(w[i]), (j - i) as i64);
            i = j;
        }
        out
    }

    pub fn fmt_group_word(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return "1".into();
        }
        let mut out = String::new();
        let mut i = 0;
        while i < w.len() {
            let mut j = i;
            while j < w.len() && w[j] == w[i] {
                j += 1;
            }
            let n = (j - i) as i64;
            self.push_power(&mut out, self.name(w[i].gen), if w[i].inv { -n } else { n });
            i = j;
        }
        out
    }

    pub fn parse_word(&self, s: &str) -> Result<Word, PresentationError> {
        let gw = self.parse_group_word(s)?;
        if gw.iter().any(|l| l.inv) {
            return Err(PresentationError::Parse(format!("negative exponent in monoid word {s:?}")));
        }
        Ok(gw.into_iter().map(|l| l.gen).collect())
    }

    /// Parses a group word. The result is not freely reduced.
    pub fn parse_group_word(&self, s: &str) -> Result<GroupWord, PresentationError> {
        let chars: Vec<char> = s.chars().collect();
        let mut p = Parser { chars: &chars, pos: 0, alphabet: self };
        let w = p.sequence()?;
        p.skip_ws();
        if p.pos != chars.len() {
            return Err(PresentationError::Parse(format!("unexpected {:?} in {s:?}", chars[p.pos])));
        }
        Ok(w)
    }
}

struct Parser<'a> {
    chars: &'a [char],
    pos: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && matches!(self.chars[self.pos], ' ' | '\t' | '.' | '*' | '·') {
            self.pos += 1;
        }
    }

    fn sequence(&mut self) -> Result<GroupWord, PresentationError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            if self.pos >= self.chars.len() || self.chars[self.pos] == ')' {
                return Ok(out);
            }
            let c = self.chars[self.pos];
            if (c == '1' || c == 'ε') && !self.symbol_ahead() {
                self.pos += 1;
                let _ = self.exponent()?;
                continue;
            }
            let base = if c == '(' {
                self.pos += 1;
                let inner = self.sequence()?;
                if self.chars.get(self.pos) != Some(&')') {
                    return Err(PresentationError::Parse("unbalanced parenthesis".into()));
                }
                self.pos += 1;
                inner
            } else {
                vec![Letter::pos(self.symbol()?)]
            };
            let e = self.exponent()?;
            let unit = if e < 0 { group_inverse(&base) } else { base };
            for _ in 0..e.unsigned_abs() {
                out.extend_from_slice(&unit);
            }
        }
    }

    fn symbol_ahead(&self) -> bool {
        let rest: String = self.chars[self.pos..].iter().collect();
        self.alphabet.names.iter().any(|n| rest.starts_with(n.as_str()))
    }

    fn symbol(&mut self) -> Result<Gen, PresentationError> {
        let rest: String = self.chars[self.pos..].iter().collect();
        let best = self
            .alphabet
            .names
            .iter()
            .enumerate()
            .filter(|(_, n)| rest.starts_with(n.as_str()))
            .max_by_key(|(_, n)| n.len());
        match best {
            Some((i, n)) => {
                self.pos += n.chars().count();
                Ok(i as Gen)
            }
            None => Err(PresentationError::Parse(format!("no generator matches at {rest:?}"))),
        }
    }

    fn exponent(&mut self) -> Result<i64, PresentationError> {
        if self.chars.get(self.pos) != Some(&'^') {
            return Ok(1);
        }
        self.pos += 1;
        let mut neg = false;
        if self.chars.get(self.pos) == Some(&'-') {
            neg = true;
            self.pos += 1;
        }
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        let n: i64 = digits
            .parse()
            .map_err(|_| PresentationError::Parse("missing exponent digits".into()))?;
        Ok(if neg { -n } else { n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let a = Alphabet::new(&["a", "b"]).unwrap();
        let w = a.parse_word("ab^2").unwrap();
        assert_eq!(w, vec![0, 1, 1]);
        assert_eq!(a.fmt_word(&w), "ab^2");
        assert_eq!(a.parse_word("1").unwrap(), Vec::<Gen>::new());
        assert_eq!(a.parse_word("(ab)^2").unwrap(), vec![0, 1, 0, 1]);
        let g = a.parse_group_word("aba^-1").unwrap();
        assert_eq!(a.fmt_group_word(&g), "aba^-1");
        assert!(a.parse_word("a^-1").is_err());
    }

    #[test]
    fn multi_letter_names() {
        let a = Alphabet::new(&["x1", "x2", "y"]).unwrap();
        let w = a.parse_word("x1 x2^2 y").unwrap();
        assert_eq!(w, vec![0, 1, 1, 2]);
        assert_eq!(a.fmt_word(&w), "x1 x2^2 y");
    }

    #[test]
    fn length_lex_respects_custom_order() {
        let a = Alphabet::new(&["a", "b"]).unwrap().with_order(&["b", "a"]).unwrap();
        assert_eq!(a.cmp_words(&[1], &[0]), Ordering::Less);
        assert_eq!(a.cmp_words(&[0], &[1, 1]), Ordering::Less);
    }

    #[test]
    fn free_reduction() {
        let w = vec![Letter::pos(0), Letter::pos(1), Letter::neg(1), Letter::neg(0), Letter::pos(1)];
        assert_eq!(free_reduce(&w), vec![Letter::pos(1)]);
    }
}
