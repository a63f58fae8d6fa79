//! Finitely presented monoids, rewriting normal forms and the example families.

mod group;
mod preset;
mod rewrite;
mod word;

use serde::Serialize;
use thiserror::Error;

pub use group::{AbelianModel, BsModel, GroupElem, GroupModel, Member, Membership, RewriteModel};
pub use preset::{preset, ArtinPair, Preset, PresetSpec};
pub use rewrite::{complete_or_partial, knuth_bendix_bounded, KbBudget, RewritingSystem, RwStatus, DEFAULT_STEP_BUDGET};
pub use word::{free_reduce, group_inverse, to_group_word, Alphabet, Gen, GroupWord, Letter, Word};

#[derive(Debug, Error)]
pub enum PresentationError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("rewriting did not terminate within {steps} steps")]
    NonTerminating { steps: usize },
    #[error("completion budget exceeded with {} rules", partial.rules.len())]
    BudgetExceeded { partial: Box<RewritingSystem> },
}

#[derive(Clone, Debug, Serialize)]
pub struct MonoidPresentation {
    pub alphabet: Alphabet,
    pub relations: Vec<(Word, Word)>,
}

impl MonoidPresentation {
    pub fn new(alphabet: Alphabet, relations: Vec<(Word, Word)>) -> Self {
        MonoidPresentation { alphabet, relations }
    }

    /// Parses relations written as `u = v`.
    pub fn parse<S: AsRef<str>, T: AsRef<str>>(gens: &[S], rels: &[T]) -> Result<Self, PresentationError> {
        let alphabet = Alphabet::new(gens)?;
        Self::parse_with(alphabet, rels)
    }

    pub fn parse_with<T: AsRef<str>>(alphabet: Alphabet, rels: &[T]) -> Result<Self, PresentationError> {
        let mut relations = Vec::new();
        for r in rels {
            let r = r.as_ref();
            let (u, v) = r
                .split_once('=')
                .ok_or_else(|| PresentationError::Parse(format!("relation {r:?} lacks '='")))?;
            relations.push((alphabet.parse_word(u.trim())?, alphabet.parse_word(v.trim())?));
        }
        Ok(MonoidPresentation { alphabet, relations })
    }

    /// Whether every relation has two nonempty sides, which forces trivial units.
    pub fn sides_nonempty(&self) -> bool {
        self.relations.iter().all(|(u, v)| !u.is_empty() && !v.is_empty())
    }

    pub fn fmt_relations(&self) -> Vec<String> {
        self.relations
            .iter()
            .map(|(u, v)| format!("{} = {}", self.alphabet.fmt_word(u), self.alphabet.fmt_word(v)))
            .collect()
    }

    /// Presentation of the enveloping group on generators and formal inverses.
    ///
    /// Inverse of `x` is named `x'` and ranked right after `x`.
    pub fn group_presentation(&self) -> Result<MonoidPresentation, PresentationError> {
        let n = self.alphabet.len();
        let mut names: Vec<String> = self.alphabet.names().to_vec();
        names.extend(self.alphabet.names().iter().map(|s| format!("{s}'")));
        let mut order: Vec<String> = Vec::new();
        for g in self.alphabet.gens() {
            order.push(names[g as usize].clone());
            order.push(names[g as usize + n].clone());
        }
        let alphabet = Alphabet::new(&names)?.with_order(&order)?;
        let mut relations = self.relations.clone();
        for g in 0..n as Gen {
            let ig = g + n as Gen;
            relations.push((vec![g, ig], Vec::new()));
            relations.push((vec![ig, g], Vec::new()));
        }
        Ok(MonoidPresentation { alphabet, relations })
    }
}

pub fn normal_form(w: &[Gen], rs: &RewritingSystem) -> Result<Word, PresentationError> {
    rs.normal_form(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_relations() {
        let p = MonoidPresentation::parse(&["a", "b"], &["ab^2 = b^3a"]).unwrap();
        assert_eq!(p.relations, vec![(vec![0, 1, 1], vec![1, 1, 1, 0])]);
        assert_eq!(p.fmt_relations(), vec!["ab^2 = b^3a".to_string()]);
        assert!(MonoidPresentation::parse(&["a"], &["aa"]).is_err());
    }

    #[test]
    fn empty_word_is_fixed() {
        let p = MonoidPresentation::parse(&["a", "b"], &["ab = ba"]).unwrap();
        let rs = knuth_bendix_bounded(&p, KbBudget::default()).unwrap();
        assert!(normal_form(&[], &rs).unwrap().is_empty());
    }

    #[test]
    fn group_presentation_of_z2_completes() {
        let p = MonoidPresentation::parse(&["a", "b"], &["ab = ba"]).unwrap();
        let g = p.group_presentation().unwrap();
        let rs = knuth_bendix_bounded(&g, KbBudget::default()).unwrap();
        assert!(rs.is_complete());
        let w = g.alphabet.parse_word("b a' b' a").unwrap();
        assert!(rs.normal_form(&w).unwrap().is_empty());
    }
}
