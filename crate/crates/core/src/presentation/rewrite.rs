use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::Serialize;

use super::word::{Alphabet, Word};
use super::{MonoidPresentation, PresentationError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RwStatus {
    /// Every critical pair is joinable; the system is complete.
    Complete,
    /// Completion stopped inside its budget after this many passes.
    VerifiedToDepth { passes: usize },
    UserAssertedComplete,
}

#[derive(Clone, Debug, Serialize)]
pub struct RewritingSystem {
    pub rules: Vec<(Word, Word)>,
    pub status: RwStatus,
    #[serde(skip)]
    pub step_budget: usize,
}

pub const DEFAULT_STEP_BUDGET: usize = 100_000;

impl RewritingSystem {
    pub fn empty() -> Self {
        RewritingSystem { rules: Vec::new(), status: RwStatus::Complete, step_budget: DEFAULT_STEP_BUDGET }
    }

    /// Rules supplied by the user; each must decrease under the order.
    pub fn user(alphabet: &Alphabet, rules: Vec<(Word, Word)>) -> Result<Self, PresentationError> {
        for (l, r) in &rules {
            if alphabet.cmp_words(l, r) != Ordering::Greater {
                return Err(PresentationError::InvalidParams(format!(
                    "rule {} -> {} does not decrease in length-lex order",
                    alphabet.fmt_word(l),
                    alphabet.fmt_word(r)
                )));
            }
        }
        Ok(RewritingSystem { rules, status: RwStatus::UserAssertedComplete, step_budget: DEFAULT_STEP_BUDGET })
    }

    pub fn is_complete(&self) -> bool {
        matches!(self.status, RwStatus::Complete | RwStatus::UserAssertedComplete)
    }

    fn find_match(&self, w: &[u16]) -> Option<(usize, usize)> {
        for i in 0..w.len() {
            for (k, (l, _)) in self.rules.iter().enumerate() {
                if w.len() - i >= l.len() && &w[i..i + l.len()] == l.as_slice() {
                    return Some((i, k));
                }
            }
        }
        None
    }

    /// Leftmost reduction to an irreducible word.
    pub fn normal_form(&self, w: &[u16]) -> Result<Word, PresentationError> {
        let mut cur: Word = w.to_vec();
        let mut steps = 0usize;
        while let Some((i, k)) = self.find_match(&cur) {
            steps += 1;
            if steps > self.step_budget {
                return Err(PresentationError::NonTerminating { steps });
            }
            let (l, r) = &self.rules[k];
            cur.splice(i..i + l.len(), r.iter().copied());
        }
        Ok(cur)
    }

    pub fn is_irreducible(&self, w: &[u16]) -> bool {
        self.find_match(w).is_none()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct KbBudget {
    pub max_rules: usize,
    pub max_passes: usize,
}

impl Default for KbBudget {
    fn default() -> Self {
        KbBudget { max_rules: 200, max_passes: 20 }
    }
}

fn orient(alphabet: &Alphabet, u: Word, v: Word) -> Option<(Word, Word)> {
    match alphabet.cmp_words(&u, &v) {
        Ordering::Greater => Some((u, v)),
        Ordering::Less => Some((v, u)),
        Ordering::Equal => None,
    }
}

fn critical_pairs(rules: &[(Word, Word)]) -> Vec<(Word, Word)> {
    let mut out = Vec::new();
    for (l1, r1) in rules {
        for (l2, r2) in rules {
            // suffix of l1 overlaps prefix of l2
            for k in 1..l1.len().min(l2.len()) {
                if l1[l1.len() - k..] == l2[..k] {
                    let mut a = r1.clone();
                    a.extend_from_slice(&l2[k..]);
                    let mut b = l1[..l1.len() - k].to_vec();
                    b.extend_from_slice(r2);
                    out.push((a, b));
                }
            }
            // l2 inside l1
            if l2.len() <= l1.len() && (l1, r1) != (l2, r2) {
                for i in 0..=l1.len() - l2.len() {
                    if l1[i..i + l2.len()] == l2[..] {
                        let mut b = l1[..i].to_vec();
                        b.extend_from_slice(r2);
                        b.extend_from_slice(&l1[i + l2.len()..]);
                        out.push((r1.clone(), b));
                    }
                }
            }
        }
    }
    out
}

fn interreduce(alphabet: &Alphabet, rules: Vec<(Word, Word)>) -> Result<Vec<(Word, Word)>, PresentationError> {
    let mut rules = rules;
    loop {
        let mut changed = false;
        let mut kept: Vec<(Word, Word)> = Vec::new();
        let mut requeue: Vec<(Word, Word)> = Vec::new();
        for (idx, (l, r)) in rules.iter().enumerate() {
            let others = RewritingSystem {
                rules: rules
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != idx)
                    .map(|(_, x)| x.clone())
                    .collect(),
                status: RwStatus::Complete,
                step_budget: DEFAULT_STEP_BUDGET,
            };
            if !others.is_irreducible(l) {
                requeue.push((l.clone(), r.clone()));
                changed = true;
            } else {
                kept.push((l.clone(), r.clone()));
            }
        }
        if !changed {
            break;
        }
        // drop the first reducible rule only, then re-add it as an equation
        let (l, r) = requeue.remove(0);
        rules.retain(|x| x.0 != l || x.1 != r);
        let sys = RewritingSystem { rules: rules.clone(), status: RwStatus::Complete, step_budget: DEFAULT_STEP_BUDGET };
        let nl = sys.normal_form(&l)?;
        let nr = sys.normal_form(&r)?;
        if let Some(rule) = orient(alphabet, nl, nr) {
            rules.push(rule);
        }
    }
    // normalize right-hand sides
    let snapshot = rules.clone();
    for (i, rule) in rules.iter_mut().enumerate() {
        let others = RewritingSystem {
            rules: snapshot.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| x.clone()).collect(),
            status: RwStatus::Complete,
            step_budget: DEFAULT_STEP_BUDGET,
        };
        rule.1 = others.normal_form(&rule.1)?;
    }
    rules.sort_by(|a, b| alphabet.cmp_words(&a.0, &b.0).then_with(|| alphabet.cmp_words(&a.1, &b.1)));
    rules.dedup();
    Ok(rules)
}

/// Bounded Knuth-Bendix completion under length-lex order.
///
/// On budget exhaustion the partial system is returned inside the error.
pub fn knuth_bendix_bounded(
    p: &MonoidPresentation,
    budget: KbBudget,
) -> Result<RewritingSystem, PresentationError> {
    let alphabet = &p.alphabet;
    let mut rules: Vec<(Word, Word)> = Vec::new();
    let mut pending: Vec<(Word, Word)> = p.relations.clone();
    for pass in 0..budget.max_passes {
        let mut added = false;
        while let Some((u, v)) = pending.pop() {
            let sys = RewritingSystem { rules: rules.clone(), status: RwStatus::Complete, step_budget: DEFAULT_STEP_BUDGET };
            let nu = sys.normal_form(&u)?;
            let nv = sys.normal_form(&v)?;
            if let Some(rule) = orient(alphabet, nu, nv) {
                rules.push(rule);
                rules = interreduce(alphabet, rules)?;
                added = true;
                if rules.len() > budget.max_rules {
                    return Err(PresentationError::BudgetExceeded {
                        partial: Box::new(RewritingSystem {
                            rules,
                            status: RwStatus::VerifiedToDepth { passes: pass },
                            step_budget: DEFAULT_STEP_BUDGET,
                        }),
                    });
                }
            }
        }
        let sys = RewritingSystem { rules: rules.clone(), status: RwStatus::Complete, step_budget: DEFAULT_STEP_BUDGET };
        let mut seen = BTreeSet::new();
        for (a, b) in critical_pairs(&rules) {
            let na = sys.normal_form(&a)?;
            let nb = sys.normal_form(&b)?;
            if na != nb {
                let key = orient(alphabet, na.clone(), nb.clone()).unwrap();
                if seen.insert(key) {
                    pending.push((na, nb));
                }
            }
        }
        if pending.is_empty() {
            return Ok(RewritingSystem { rules, status: RwStatus::Complete, step_budget: DEFAULT_STEP_BUDGET });
        }
        let _ = added;
    }
    Err(PresentationError::BudgetExceeded {
        partial: Box::new(RewritingSystem {
            rules,
            status: RwStatus::VerifiedToDepth { passes: budget.max_passes },
            step_budget: DEFAULT_STEP_BUDGET,
        }),
    })
}

/// Completion that keeps the partial system when the budget runs out.
pub fn complete_or_partial(p: &MonoidPresentation, budget: KbBudget) -> Result<RewritingSystem, PresentationError> {
    match knuth_bendix_bounded(p, budget) {
        Ok(rs) => Ok(rs),
        Err(PresentationError::BudgetExceeded { partial }) => Ok(*partial),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pres(gens: &[&str], rels: &[&str]) -> MonoidPresentation {
        MonoidPresentation::parse(gens, rels).unwrap()
    }

    #[test]
    fn free_monoid_has_no_rules() {
        let rs = knuth_bendix_bounded(&pres(&["a", "b"], &[]), KbBudget::default()).unwrap();
        assert!(rs.rules.is_empty());
        assert_eq!(rs.status, RwStatus::Complete);
    }

    #[test]
    fn commutation_completes_to_single_rule() {
        let p = pres(&["a", "b"], &["ab = ba"]);
        let rs = knuth_bendix_bounded(&p, KbBudget::default()).unwrap();
        assert_eq!(rs.rules, vec![(vec![1, 0], vec![0, 1])]);
        let w = p.alphabet.parse_word("baba").unwrap();
        assert_eq!(p.alphabet.fmt_word(&rs.normal_form(&w).unwrap()), "a^2b^2");
    }

    #[test]
    fn bs23_completes_to_single_rule() {
        let p = pres(&["a", "b"], &["ab^2 = b^3a"]);
        let rs = knuth_bendix_bounded(&p, KbBudget::default()).unwrap();
        assert_eq!(rs.rules.len(), 1);
        let (l, r) = &rs.rules[0];
        assert_eq!(p.alphabet.fmt_word(l), "b^3a");
        assert_eq!(p.alphabet.fmt_word(r), "ab^2");
    }

    #[test]
    fn braid_relation_needs_more_rules() {
        let p = pres(&["a", "b"], &["aba = bab"]);
        let r = knuth_bendix_bounded(&p, KbBudget { max_rules: 6, max_passes: 3 });
        match r {
            Ok(rs) => assert!(rs.rules.len() > 1),
            Err(PresentationError::BudgetExceeded { partial }) => assert!(!partial.rules.is_empty()),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn step_budget_is_enforced() {
        let mut rs = RewritingSystem::empty();
        rs.rules = vec![(vec![0], vec![1]), (vec![1], vec![0])];
        rs.step_budget = 10;
        assert!(matches!(rs.normal_form(&[0]), Err(PresentationError::NonTerminating { .. })));
    }
}
