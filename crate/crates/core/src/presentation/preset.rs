use serde::{Deserialize, Serialize};

use super::group::{AbelianModel, BsModel, GroupModel, RewriteModel};
use super::rewrite::{complete_or_partial, KbBudget, RewritingSystem};
use super::word::{Alphabet, Gen, Word};
use super::{MonoidPresentation, PresentationError};

/// Pair entry of a Coxeter-type matrix; `m: None` means no relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtinPair {
    pub a: String,
    pub b: String,
    pub m: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum PresetSpec {
    Nat,
    FreeAbelian { n: usize },
    Free { n: usize },
    Numerical { gens: Vec<i64> },
    Artin { letters: Vec<String>, pairs: Vec<ArtinPair> },
    Bs { k: i64, l: i64 },
    OneRelator { letters: Vec<String>, u: String, v: String },
    /// Alphabet in length-lex order, relations `u = v`, optional rules `l -> r` taken as complete.
    Custom {
        letters: Vec<String>,
        #[serde(default)]
        relations: Vec<String>,
        #[serde(default)]
        rules: Vec<String>,
    },
}

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: String,
    pub spec: PresetSpec,
    pub presentation: MonoidPresentation,
    /// Monoid rewriting system; may be partial.
    pub monoid_rules: RewritingSystem,
    pub group: GroupModel,
    /// Units of P are trivial because every relation side is nonempty.
    pub trivial_units: bool,
    /// Right LCM established by a structural criterion rather than by search.
    pub right_lcm_by_criterion: Option<bool>,
    pub notes: Vec<String>,
}

const LETTERS: &str = "abcdefghijklmnopqrstuvwxyz";

fn default_letters(n: usize) -> Result<Vec<String>, PresentationError> {
    if n == 0 || n > LETTERS.len() {
        return Err(PresentationError::InvalidParams(format!("rank {n} outside 1..=26")));
    }
    Ok(LETTERS.chars().take(n).map(|c| c.to_string()).collect())
}

fn alternating(a: Gen, b: Gen, m: u32) -> Word {
    (0..m).map(|i| if i % 2 == 0 { a } else { b }).collect()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn pow(g: Gen, n: i64) -> Word {
    vec![g; n as usize]
}

fn group_budget() -> KbBudget {
    KbBudget { max_rules: 80, max_passes: 10 }
}

fn rewrite_group(p: &MonoidPresentation, member_depth: usize) -> Result<GroupModel, PresentationError> {
    let gp = p.group_presentation()?;
    let rs = complete_or_partial(&gp, group_budget())?;
    Ok(GroupModel::Rewrite(RewriteModel::new(p.alphabet.len(), rs, member_depth)))
}

fn monoid_rules(p: &MonoidPresentation) -> Result<RewritingSystem, PresentationError> {
    complete_or_partial(p, KbBudget::default())
}

pub fn preset(spec: &PresetSpec) -> Result<Preset, PresentationError> {
    let mut notes = Vec::new();
    let mut right_lcm = None;
    let (name, presentation, group) = match spec {
        PresetSpec::Nat => {
            right_lcm = Some(true);
            let p = MonoidPresentation::new(Alphabet::new(&["a"])?, vec![]);
            ("nat".to_string(), p, GroupModel::Abelian(AbelianModel { gens: vec![vec![1]] }))
        }
        PresetSpec::FreeAbelian { n } => {
            right_lcm = Some(true);
            let names = default_letters(*n)?;
            let mut rels = Vec::new();
            for i in 0..*n as Gen {
                for j in i + 1..*n as Gen {
                    rels.push((vec![i, j], vec![j, i]));
                }
            }
            let gens = (0..*n).map(|i| (0..*n).map(|j| (i == j) as i64).collect()).collect();
            let p = MonoidPresentation::new(Alphabet::new(&names)?, rels);
            (format!("free_abelian({n})"), p, GroupModel::Abelian(AbelianModel { gens }))
        }
        PresetSpec::Free { n } => {
            right_lcm = Some(true);
            let p = MonoidPresentation::new(Alphabet::new(&default_letters(*n)?)?, vec![]);
            (format!("free({n})"), p, GroupModel::free(*n))
        }
        PresetSpec::Numerical { gens } => {
            if gens.is_empty() || gens.iter().any(|&g| g <= 0) {
                return Err(PresentationError::InvalidParams("numerical generators must be positive".into()));
            }
            let mut sorted = gens.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != gens.len() {
                return Err(PresentationError::InvalidParams("numerical generators must be distinct".into()));
            }
            let names = default_letters(gens.len())?;
            let mut rels = Vec::new();
            for i in 0..gens.len() {
                for j in i + 1..gens.len() {
                    let (gi, gj) = (i as Gen, j as Gen);
                    rels.push((vec![gi, gj], vec![gj, gi]));
                    let d = gcd(gens[i], gens[j]);
                    rels.push((pow(gi, gens[j] / d), pow(gj, gens[i] / d)));
                }
            }
            if gens.len() > 2 {
                notes.push("relations are valid in the monoid but may not present it".into());
            }
            let p = MonoidPresentation::new(Alphabet::new(&names)?, rels);
            let model = GroupModel::Abelian(AbelianModel { gens: gens.iter().map(|&g| vec![g]).collect() });
            let label = gens.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(",");
            (format!("numerical({label})"), p, model)
        }
        PresetSpec::Artin { letters, pairs } => {
            let alphabet = Alphabet::new(letters)?;
            let n = letters.len();
            let mut m = vec![vec![None; n]; n];
            for pr in pairs {
                let (a, b) = (alphabet.index(&pr.a)?, alphabet.index(&pr.b)?);
                if a == b {
                    return Err(PresentationError::InvalidParams(format!("pair ({}, {}) is diagonal", pr.a, pr.b)));
                }
                if let Some(v) = pr.m {
                    if v < 2 {
                        return Err(PresentationError::InvalidParams(format!("m_{{{},{}}} = {v} < 2", pr.a, pr.b)));
                    }
                }
                if m[a as usize][b as usize].is_some() {
                    return Err(PresentationError::InvalidParams(format!("pair ({}, {}) given twice", pr.a, pr.b)));
                }
                m[a as usize][b as usize] = Some(pr.m);
                m[b as usize][a as usize] = Some(pr.m);
            }
            let mut rels = Vec::new();
            let mut all_two = true;
            for a in 0..n {
                for b in a + 1..n {
                    match m[a][b].flatten() {
                        Some(v) => {
                            all_two &= v == 2;
                            rels.push((alternating(a as Gen, b as Gen, v), alternating(b as Gen, a as Gen, v)));
                        }
                        None => all_two = false,
                    }
                }
            }
            let p = MonoidPresentation::new(alphabet, rels);
            let model = if all_two {
                right_lcm = Some(true);
                let gens = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
                GroupModel::Abelian(AbelianModel { gens })
            } else {
                notes.push("Artin monoids are right LCM (Brieskorn-Saito); lcm not computed here".into());
                right_lcm = Some(true);
                rewrite_group(&p, 8)?
            };
            (format!("artin({})", letters.join(",")), p, model)
        }
        PresetSpec::Bs { k, l } => {
            if *k == 0 || *l == 0 {
                return Err(PresentationError::InvalidParams("k and l must be nonzero".into()));
            }
            right_lcm = Some(true);
            let (a, b) = (0 as Gen, 1 as Gen);
            let cat = |parts: &[Word]| -> Word { parts.concat() };
            let rel = match (*k > 0, *l > 0) {
                (true, true) => (cat(&[vec![a], pow(b, *k)]), cat(&[pow(b, *l), vec![a]])),
                (false, true) => (vec![a], cat(&[pow(b, *l), vec![a], pow(b, -k)])),
                (true, false) => (cat(&[pow(b, -l), vec![a], pow(b, *k)]), vec![a]),
                (false, false) => (cat(&[pow(b, -l), vec![a]]), cat(&[vec![a], pow(b, -k)])),
            };
            let p = MonoidPresentation::new(Alphabet::new(&["a", "b"])?, vec![rel]);
            (format!("bs({k},{l})"), p, GroupModel::Bs(BsModel { k: *k, l: *l }))
        }
        PresetSpec::OneRelator { letters, u, v } => {
            let alphabet = Alphabet::new(letters)?;
            let p = MonoidPresentation::parse_with(alphabet, &[format!("{u} = {v}")])?;
            let (uw, vw) = p.relations[0].clone();
            if uw.is_empty() || vw.is_empty() {
                return Err(PresentationError::InvalidParams("relation sides must be nonempty".into()));
            }
            if uw[0] == vw[0] {
                return Err(PresentationError::InvalidParams(
                    "the first letter of u coincides with the first letter of v".into(),
                ));
            }
            for (x, y) in [(&uw, &vw), (&vw, &uw)] {
                if x.len() == 1 && !y.contains(&x[0]) {
                    return Err(PresentationError::InvalidParams(format!(
                        "generator {} is redundant",
                        p.alphabet.name(x[0])
                    )));
                }
            }
            right_lcm = Some(one_relator_right_lcm(&p.alphabet, &uw, &vw));
            if right_lcm == Some(false) {
                notes.push("length criterion for right LCM does not apply".into());
            }
            let model = rewrite_group(&p, 8)?;
            (format!("one_relator({} = {})", p.alphabet.fmt_word(&uw), p.alphabet.fmt_word(&vw)), p, model)
        }
        PresetSpec::Custom { letters, relations, .. } => {
            let p = MonoidPresentation::parse_with(Alphabet::new(letters)?, relations)?;
            notes.push("group word problem handled by bounded completion".into());
            let model = rewrite_group(&p, 8)?;
            ("custom".to_string(), p, model)
        }
    };
    let monoid_rules = match spec {
        PresetSpec::Custom { rules, .. } if !rules.is_empty() => {
            let parsed = rules
                .iter()
                .map(|r| {
                    let (l, rhs) = r
                        .split_once("->")
                        .ok_or_else(|| PresentationError::Parse(format!("rule {r:?} lacks '->'")))?;
                    Ok((presentation.alphabet.parse_word(l.trim())?, presentation.alphabet.parse_word(rhs.trim())?))
                })
                .collect::<Result<Vec<_>, PresentationError>>()?;
            RewritingSystem::user(&presentation.alphabet, parsed)?
        }
        _ => monoid_rules(&presentation)?,
    };
    let trivial_units = presentation.sides_nonempty();
    Ok(Preset {
        name,
        spec: spec.clone(),
        presentation,
        monoid_rules,
        group,
        trivial_units,
        right_lcm_by_criterion: right_lcm,
        notes,
    })
}

/// Equal lengths, or the shorter side has a letter occurring more often.
fn one_relator_right_lcm(alphabet: &Alphabet, u: &[Gen], v: &[Gen]) -> bool {
    if u.len() == v.len() {
        return true;
    }
    let (short, long) = if u.len() < v.len() { (u, v) } else { (v, u) };
    alphabet
        .gens()
        .any(|a| short.iter().filter(|&&x| x == a).count() > long.iter().filter(|&&x| x == a).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bs_presentations_follow_sign_cases() {
        let p = preset(&PresetSpec::Bs { k: -2, l: 3 }).unwrap();
        assert_eq!(p.presentation.fmt_relations(), vec!["a = b^3ab^2"]);
        let p = preset(&PresetSpec::Bs { k: 2, l: 3 }).unwrap();
        assert_eq!(p.presentation.fmt_relations(), vec!["ab^2 = b^3a"]);
        let p = preset(&PresetSpec::Bs { k: 2, l: -3 }).unwrap();
        assert_eq!(p.presentation.fmt_relations(), vec!["b^3ab^2 = a"]);
        let p = preset(&PresetSpec::Bs { k: -2, l: -3 }).unwrap();
        assert_eq!(p.presentation.fmt_relations(), vec!["b^3a = ab^2"]);
    }

    #[test]
    fn custom_with_rules() {
        let spec = PresetSpec::Custom {
            letters: vec!["a".into(), "b".into()],
            relations: vec!["ab = ba".into()],
            rules: vec!["ba -> ab".into()],
        };
        let p = preset(&spec).unwrap();
        assert_eq!(p.monoid_rules.rules.len(), 1);
        assert!(p.trivial_units);
        let bad = PresetSpec::Custom { letters: vec!["a".into(), "b".into()], relations: vec![], rules: vec!["ab -> ba".into()] };
        assert!(preset(&bad).is_err());
    }

    #[test]
    fn artin_m2_is_commutation() {
        let spec = PresetSpec::Artin {
            letters: vec!["a".into(), "b".into()],
            pairs: vec![ArtinPair { a: "a".into(), b: "b".into(), m: Some(2) }],
        };
        let p = preset(&spec).unwrap();
        assert_eq!(p.presentation.fmt_relations(), vec!["ab = ba"]);
        assert!(matches!(p.group, GroupModel::Abelian(_)));
    }

    #[test]
    fn one_relator_validation() {
        let ok = PresetSpec::OneRelator {
            letters: vec!["a".into(), "b".into(), "c".into()],
            u: "a^2".into(),
            v: "bc".into(),
        };
        let p = preset(&ok).unwrap();
        assert_eq!(p.presentation.fmt_relations(), vec!["a^2 = bc"]);
        assert_eq!(p.right_lcm_by_criterion, Some(true));
        let same_first = PresetSpec::OneRelator {
            letters: vec!["a".into(), "b".into()],
            u: "ab".into(),
            v: "ba^2".into(),
        };
        assert!(preset(&same_first).is_ok());
        let bad = PresetSpec::OneRelator { letters: vec!["a".into(), "b".into()], u: "ab".into(), v: "a".into() };
        assert!(matches!(preset(&bad), Err(PresentationError::InvalidParams(_))));
        let redundant =
            PresetSpec::OneRelator { letters: vec!["a".into(), "b".into(), "c".into()], u: "a".into(), v: "bc".into() };
        assert!(matches!(preset(&redundant), Err(PresentationError::InvalidParams(_))));
    }
}
