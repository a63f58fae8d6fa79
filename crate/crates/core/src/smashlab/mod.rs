//! Finite-dimensional stages of the smash-product algebras and exact checks of the maps between them.

mod algebra;
mod family;
mod maps;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

pub use algebra::{int, Alg, Elem, Lab, Scalar, Term, Unit};
pub use family::{
    apply, build_family, bullet, check_properties, check_redundant_factor, check_transport_identity, close_stage_one,
    close_stage_two, raw_from_seeds, Family, RedundancyReport, SigmaSet, Stage, DEFAULT_CAP,
};
pub use maps::{
    minimal_nilpotency, verify_conjugation, verify_equivariance, verify_i_rho, verify_neumann, verify_nilpotent,
    verify_phi, verify_psi,
};

use crate::paction::PartialAction;
use crate::report::{Check, Provenance};

#[derive(Debug, Error)]
pub enum SmashError {
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("action undefined: {0}")]
    ActionUndefined(String),
    #[error("closure exceeded the cap of {cap} family elements")]
    BudgetExceeded { cap: usize },
    #[error("algebra tag mismatch: {0}")]
    TagMismatch(String),
    #[error("unit set not closed: {0}")]
    NotClosed(String),
    #[error("invalid Sigma or F: {0}")]
    InvalidSigma(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verify {
    Phi,
    Psi,
    Irho,
    Nilpotent,
    Conjugation,
    Neumann,
    All,
}

impl std::str::FromStr for Verify {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "phi" => Verify::Phi,
            "psi" => Verify::Psi,
            "irho" => Verify::Irho,
            "nilpotent" => Verify::Nilpotent,
            "conjugation" => Verify::Conjugation,
            "neumann" => Verify::Neumann,
            "all" => Verify::All,
            _ => return Err(format!("unknown check {s}")),
        })
    }
}

#[derive(Clone, Debug)]
pub struct SmashOptions {
    pub sigma: Vec<usize>,
    pub subgroup: Vec<usize>,
    pub seeds: Vec<usize>,
    pub verify: BTreeSet<Verify>,
    pub f: Option<usize>,
    pub cap: usize,
    pub redundancy_factors: usize,
}

impl SmashOptions {
    /// Sigma = whole group, F trivial, every nonzero idempotent seeded, all checks.
    pub fn defaults(act: &PartialAction) -> Self {
        SmashOptions {
            sigma: (0..act.group.len()).collect(),
            subgroup: vec![act.group.identity],
            seeds: act.e.nonzero().collect(),
            verify: [Verify::All].into(),
            f: None,
            cap: DEFAULT_CAP,
            redundancy_factors: 4,
        }
    }

    fn wants(&self, v: Verify) -> bool {
        self.verify.contains(&Verify::All) || self.verify.contains(&v)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SmashReport {
    pub units: usize,
    pub rows: usize,
    pub family_elements: usize,
    pub chain_length: usize,
    pub minimal_nilpotency_power: Option<usize>,
    pub families: serde_json::Value,
    pub redundant_factor: RedundancyReport,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn run(act: &PartialAction, opts: &SmashOptions) -> Result<SmashReport, SmashError> {
    let sigma = SigmaSet::new(act, opts.sigma.clone(), opts.subgroup.clone())?;
    let [raw, one, two] = build_family(act, &sigma, &opts.seeds, opts.cap)?;
    let mut checks = Vec::new();
    checks.extend(
        check_properties(act, &one)?
            .into_iter()
            .filter(|c| !c.name.contains("bullet"))
            .map(|c| rename(c, "stage_one_")),
    );
    checks.extend(check_properties(act, &two)?);
    let seeds_kept = raw.sets.iter().all(|(k, s)| s.is_subset(&one.sets[k]) && one.sets[k].is_subset(&two.sets[k]));
    checks.push(Check::new("families_increase", seeds_kept, Provenance::VerifiedExact));
    let red = check_redundant_factor(act, &one, opts.redundancy_factors, 200_000)?;
    checks.push(
        Check::new("redundant_factor", red.failures.is_empty(), Provenance::bounded([("factors", red.max_factors as i64)]))
            .with_detail(json!({ "products": red.products_checked, "with_duplicates": red.with_duplicates })),
    );
    checks.push(check_transport_identity(act, &two, 200_000)?);

    let lab = Lab::new(act, &two)?;
    let union = two.union();
    let chain_length = act.e.longest_chain(&union);
    let mut power = None;
    if opts.wants(Verify::Phi) {
        checks.extend(verify_phi(&lab)?);
    }
    if opts.wants(Verify::Psi) {
        checks.extend(verify_psi(&lab)?);
    }
    if opts.wants(Verify::Irho) {
        checks.extend(verify_i_rho(&lab)?);
    }
    if opts.wants(Verify::Nilpotent) || opts.wants(Verify::Neumann) {
        let (c, p) = verify_nilpotent(&lab, chain_length)?;
        power = p;
        if opts.wants(Verify::Nilpotent) {
            checks.push(c);
        }
    }
    if opts.wants(Verify::Conjugation) {
        let f = opts.f.or_else(|| union.first().copied()).or_else(|| act.e.nonzero().next());
        if let Some(f) = f {
            checks.extend(verify_conjugation(&lab, f)?);
        }
    }
    if opts.wants(Verify::Neumann) {
        checks.push(verify_neumann(&lab, chain_length.max(1))?);
    }
    checks.push(verify_equivariance(&lab, &sigma.subgroup)?);
    let passed = checks.iter().all(|c| c.passed);
    Ok(SmashReport {
        units: lab.len(),
        rows: lab.rows().len(),
        family_elements: two.total(),
        chain_length,
        minimal_nilpotency_power: power,
        families: json!({
            "raw": raw.to_json(act),
            "stage_one": one.to_json(act),
            "stage_two": two.to_json(act),
        }),
        redundant_factor: red,
        checks,
        passed,
    })
}

fn rename(mut c: Check, prefix: &str) -> Check {
    c.name = format!("{prefix}{}", c.name);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paction::example;

    fn lab_report(name: &str) -> SmashReport {
        let ex = example(name).unwrap();
        run(&ex.action, &SmashOptions::defaults(&ex.action)).unwrap()
    }

    #[test]
    fn bullet_with_identity_is_meet() {
        let ex = example("diamond").unwrap();
        let a = &ex.action;
        let (e1, e2, e12) = (a.e.index("e1").unwrap(), a.e.index("e2").unwrap(), a.e.index("e12").unwrap());
        assert_eq!(bullet(a, e1, a.group.identity, e2).unwrap(), e12);
        assert_eq!(bullet(a, e1, a.group.identity, 0).unwrap(), 0);
    }

    #[test]
    fn chains_have_matching_nilpotency() {
        for n in 1..=3 {
            let r = lab_report(&format!("chain:{n}"));
            assert!(r.passed, "{:#?}", r.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
            assert_eq!(r.minimal_nilpotency_power, Some(n));
            assert_eq!(r.chain_length, n);
        }
    }

    #[test]
    fn diamond_passes() {
        let r = lab_report("diamond");
        assert!(r.passed, "{:#?}", r.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
        assert_eq!(r.minimal_nilpotency_power, Some(3));
        assert_eq!(r.units, 4);
    }

    #[test]
    fn z2swap_with_full_subgroup() {
        let ex = example("z2swap").unwrap();
        let mut o = SmashOptions::defaults(&ex.action);
        o.subgroup = vec![0, 1];
        let r = run(&ex.action, &o).unwrap();
        assert!(r.passed, "{:#?}", r.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
        assert_eq!(r.units, 10);
    }

    #[test]
    fn psi_matches_inclusion_exclusion() {
        let ex = example("diamond").unwrap();
        let a = &ex.action;
        let sigma = SigmaSet::new(a, vec![0], vec![0]).unwrap();
        let fam = build_family(a, &sigma, &a.e.nonzero().collect::<Vec<_>>(), DEFAULT_CAP).unwrap();
        let lab = Lab::new(a, &fam[2]).unwrap();
        let top = lab.index[&Unit { d: a.e.index("d").unwrap(), zeta: 0, eta: 0 }];
        let psi = lab.psi(&Elem::unit(Alg::Discrete, vec![], top)).unwrap();
        // d - e1 - e2 + e12
        let mut want = Elem::zero(Alg::Smash, 0);
        for (name, c) in [("d", 1), ("e1", -1), ("e2", -1), ("e12", 1)] {
            let u = lab.index[&Unit { d: a.e.index(name).unwrap(), zeta: 0, eta: 0 }];
            want.add_term(Term { k: vec![], unit: u }, int(c));
        }
        assert_eq!(psi, want);
    }
}

#[cfg(test)]
mod infinite_order {
    use super::*;
    use crate::hull::{generate_hull, HullSpace};
    use crate::paction::{example, from_hull};
    use crate::presentation::{preset, PresetSpec};

    #[test]
    fn nat_hull_seed_two() {
        let p = preset(&PresetSpec::Nat).unwrap();
        let space = HullSpace::new(p.presentation.alphabet.clone(), p.group.clone(), 8);
        let hull = generate_hull(&space, 4).unwrap();
        let (act, _) = from_hull(&space, &hull).unwrap();
        let g = &act.group;
        let (zero, one) = (g.identity, g.index("a").unwrap());
        let seed = act.e.index("a^2P").unwrap();
        let mut o = SmashOptions::defaults(&act);
        o.sigma = vec![zero, one];
        o.seeds = vec![seed];
        let r = run(&act, &o).unwrap();
        assert!(r.passed, "{:#?}", r.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
        let all: Vec<String> = r.families["stage_two"]["sets"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|s| s["elements"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()))
            .collect();
        assert!(all.contains(&"a^2P".to_string()) && all.contains(&"a^3P".to_string()));
    }

    #[test]
    fn nwindow_pairs() {
        let ex = example("nwindow:4").unwrap();
        let act = &ex.action;
        let mut o = SmashOptions::defaults(act);
        o.sigma = vec![act.group.index("0").unwrap(), act.group.index("1").unwrap()];
        let r = run(act, &o).unwrap();
        assert!(r.passed, "{:#?}", r.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
        assert_eq!(r.chain_length, 5);
        assert_eq!(r.minimal_nilpotency_power, Some(5));
    }

    #[test]
    fn larger_window_timing() {
        let ex = example("nwindow:6").unwrap();
        let act = &ex.action;
        let mut o = SmashOptions::defaults(act);
        o.sigma = ["-1", "0", "1"].iter().map(|n| act.group.index(n).unwrap()).collect();
        let t = std::time::Instant::now();
        let r = run(act, &o).unwrap();
        assert!(r.passed);
        assert!(r.units <= 200);
        assert!(t.elapsed().as_secs() < 30);
    }
}
