use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::json;

use super::SmashError;
use crate::paction::{PartialAction, Th};
use crate::report::{Check, Provenance};

pub const DEFAULT_CAP: usize = 100_000;

/// Finite F-invariant subset of the group together with the finite subgroup F.
#[derive(Clone, Debug)]
pub struct SigmaSet {
    pub elements: Vec<usize>,
    pub subgroup: Vec<usize>,
}

impl SigmaSet {
    pub fn new(act: &PartialAction, mut elements: Vec<usize>, mut subgroup: Vec<usize>) -> Result<Self, SmashError> {
        let g = &act.group;
        elements.sort_unstable();
        elements.dedup();
        subgroup.sort_unstable();
        subgroup.dedup();
        if !elements.contains(&g.identity) {
            return Err(SmashError::InvalidSigma("Sigma must contain the identity".into()));
        }
        if !subgroup.contains(&g.identity) {
            subgroup.insert(0, g.identity);
            subgroup.sort_unstable();
        }
        match g.generated(&subgroup) {
            Some(h) if h == subgroup => {}
            _ => return Err(SmashError::InvalidSigma("F is not a finite subgroup".into())),
        }
        for &c in &subgroup {
            for &z in &elements {
                match g.m(c, z) {
                    Some(x) if elements.contains(&x) => {}
                    _ => {
                        return Err(SmashError::InvalidSigma(format!(
                            "Sigma is not F-invariant: {} {}",
                            g.names[c], g.names[z]
                        )))
                    }
                }
            }
        }
        Ok(SigmaSet { elements, subgroup })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Raw,
    StageOne,
    StageTwo,
}

/// Sets indexed by pairs (zeta, eta) of Sigma, each inside E_{zeta^-1 eta}.
#[derive(Clone, Debug)]
pub struct Family {
    pub sigma: SigmaSet,
    pub stage: Stage,
    pub sets: BTreeMap<(usize, usize), BTreeSet<usize>>,
}

impl Family {
    pub fn get(&self, z: usize, e: usize) -> &BTreeSet<usize> {
        &self.sets[&(z, e)]
    }

    pub fn total(&self) -> usize {
        self.sets.values().map(|s| s.len()).sum()
    }

    pub fn union(&self) -> Vec<usize> {
        let u: BTreeSet<usize> = self.sets.values().flatten().copied().collect();
        u.into_iter().collect()
    }

    pub fn to_json(&self, act: &PartialAction) -> serde_json::Value {
        let g = &act.group;
        let sets: Vec<_> = self
            .sets
            .iter()
            .map(|(&(z, e), s)| {
                json!({
                    "zeta": g.names[z],
                    "eta": g.names[e],
                    "elements": s.iter().map(|&x| act.e.names[x].clone()).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({ "stage": self.stage, "sets": sets })
    }
}

/// Group product that must stay inside the window.
pub fn gm(act: &PartialAction, a: usize, b: usize) -> Result<usize, SmashError> {
    act.group
        .m(a, b)
        .ok_or_else(|| SmashError::ActionUndefined(format!("{} {} leaves the group window", act.group.names[a], act.group.names[b])))
}

/// zeta^-1 eta.
pub fn quot(act: &PartialAction, zeta: usize, eta: usize) -> Result<usize, SmashError> {
    gm(act, act.group.inv[zeta], eta)
}

pub fn apply(act: &PartialAction, g: usize, e: usize) -> Result<usize, SmashError> {
    if e == 0 {
        return Ok(0);
    }
    match act.theta[g][e] {
        Th::Val(x) => Ok(x),
        Th::Out => Err(SmashError::ActionUndefined(format!(
            "theta_{}({}) lies outside the recorded window",
            act.group.names[g], act.e.names[e]
        ))),
        Th::NotInDomain => Err(SmashError::ActionUndefined(format!(
            "{} is not in the domain of theta_{}",
            act.e.names[e], act.group.names[g]
        ))),
    }
}

/// e . (alpha^-1 f) = alpha^-1((alpha.e) f), for e in E_{alpha^-1}.
pub fn bullet(act: &PartialAction, e: usize, alpha: usize, f: usize) -> Result<usize, SmashError> {
    if e == 0 || f == 0 {
        return Ok(0);
    }
    if !act.in_dom(alpha, e) {
        if act.theta[alpha][e] == Th::Out {
            return Err(SmashError::ActionUndefined(format!("theta_{} at {}", act.group.names[alpha], act.e.names[e])));
        }
        return Err(SmashError::DomainViolation(format!(
            "{} is not in E_{{{}^-1}}",
            act.e.names[e], act.group.names[alpha]
        )));
    }
    let m = act.e.meet[apply(act, alpha, e)?][f];
    apply(act, act.group.inv[alpha], m)
}

/// Whether e lies in E_{zeta^-1 eta}, the domain of theta_{eta^-1 zeta}.
fn admissible(act: &PartialAction, zeta: usize, eta: usize, e: usize) -> Result<bool, SmashError> {
    let g = quot(act, eta, zeta)?;
    Ok(act.in_dom(g, e))
}

fn meet_closure(act: &PartialAction, set: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut out = set.clone();
    out.remove(&0);
    loop {
        let items: Vec<usize> = out.iter().copied().collect();
        let mut added = false;
        for (i, &a) in items.iter().enumerate() {
            for &b in &items[i + 1..] {
                let m = act.e.meet[a][b];
                if m != 0 && out.insert(m) {
                    added = true;
                }
            }
        }
        if !added {
            return out;
        }
    }
}

/// Seeds placed on every pair whose domain admits them.
pub fn raw_from_seeds(act: &PartialAction, sigma: &SigmaSet, seeds: &[usize]) -> Result<Family, SmashError> {
    let mut sets = BTreeMap::new();
    for &z in &sigma.elements {
        for &e in &sigma.elements {
            let mut s = BTreeSet::new();
            for &x in seeds {
                if x != 0 && admissible(act, z, e, x)? {
                    s.insert(x);
                }
            }
            sets.insert((z, e), s);
        }
    }
    Ok(Family { sigma: sigma.clone(), stage: Stage::Raw, sets })
}

pub fn close_stage_one(act: &PartialAction, raw: &Family) -> Result<Family, SmashError> {
    let sigma = &raw.sigma;
    let g = &act.group;
    let mut sets: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    for &z in &sigma.elements {
        for &e in &sigma.elements {
            if sets.contains_key(&(z, e)) {
                continue;
            }
            let mut same = Vec::new();
            let mut rev = Vec::new();
            for &c in &sigma.subgroup {
                same.push((gm(act, c, z)?, gm(act, c, e)?));
                rev.push((gm(act, c, e)?, gm(act, c, z)?));
            }
            let h = quot(act, e, z)?; // eta^-1 zeta
            let hi = g.inv[h];
            let mut pool = BTreeSet::new();
            for p in &same {
                pool.extend(raw.sets[p].iter().copied());
            }
            for p in &rev {
                for &x in &raw.sets[p] {
                    pool.insert(apply(act, hi, x)?);
                }
            }
            let (s, t) = match g.order(h) {
                Some(n) => {
                    let mut orbit = pool.clone();
                    let mut power = g.identity;
                    for _ in 1..n {
                        power = gm(act, power, h)?;
                        for &x in &pool {
                            orbit.insert(apply(act, power, x)?);
                        }
                    }
                    let s = meet_closure(act, &orbit);
                    for &x in &s {
                        if !act.in_dom(h, x) {
                            return Err(SmashError::ActionUndefined(format!(
                                "{} leaves E_{{{}}}",
                                act.e.names[x], g.names[hi]
                            )));
                        }
                    }
                    let moved: BTreeSet<usize> = s.iter().map(|&x| apply(act, h, x)).collect::<Result<_, _>>()?;
                    if moved != s {
                        return Err(SmashError::ActionUndefined(format!("orbit closure under {} is not invariant", g.names[h])));
                    }
                    (s.clone(), s)
                }
                None => {
                    let s = meet_closure(act, &pool);
                    let t: BTreeSet<usize> = s.iter().map(|&x| apply(act, h, x)).collect::<Result<_, _>>()?;
                    (s, t)
                }
            };
            for p in same {
                if let Some(prev) = sets.insert(p, s.clone()) {
                    if prev != s {
                        return Err(SmashError::ActionUndefined("stage one assignment is not well defined".into()));
                    }
                }
            }
            for p in rev {
                if let Some(prev) = sets.insert(p, t.clone()) {
                    if prev != t {
                        return Err(SmashError::ActionUndefined("stage one assignment is not well defined".into()));
                    }
                }
            }
        }
    }
    Ok(Family { sigma: sigma.clone(), stage: Stage::StageOne, sets })
}

/// Closure under bullet products along chains in Sigma, then under meets.
pub fn close_stage_two(act: &PartialAction, one: &Family, cap: usize) -> Result<Family, SmashError> {
    let sigma = &one.sigma;
    let mut pi: BTreeMap<(usize, usize), BTreeSet<usize>> = one.sets.clone();
    let mut queue: Vec<(usize, usize, usize)> = Vec::new();
    for (&(z, e), s) in &one.sets {
        for &x in s {
            queue.push((z, e, x));
        }
    }
    let mut total: usize = pi.values().map(|s| s.len()).sum();
    let mut qi = 0;
    while qi < queue.len() {
        let (z, e, x) = queue[qi];
        qi += 1;
        let alpha = quot(act, e, z)?;
        for &t in &sigma.elements {
            for &f in &one.sets[&(e, t)] {
                let y = bullet(act, x, alpha, f)?;
                if y != 0 && pi.get_mut(&(z, t)).unwrap().insert(y) {
                    total += 1;
                    if total > cap {
                        return Err(SmashError::BudgetExceeded { cap });
                    }
                    queue.push((z, t, y));
                }
            }
        }
    }
    let mut sets = BTreeMap::new();
    for (k, s) in pi {
        let c = meet_closure(act, &s);
        total += c.len() - s.len();
        if total > cap {
            return Err(SmashError::BudgetExceeded { cap });
        }
        sets.insert(k, c);
    }
    Ok(Family { sigma: sigma.clone(), stage: Stage::StageTwo, sets })
}

pub fn build_family(act: &PartialAction, sigma: &SigmaSet, seeds: &[usize], cap: usize) -> Result<[Family; 3], SmashError> {
    let raw = raw_from_seeds(act, sigma, seeds)?;
    let one = close_stage_one(act, &raw)?;
    let two = close_stage_two(act, &one, cap)?;
    Ok([raw, one, two])
}

fn fail_check(name: &str, fail: Option<String>, prov: Provenance) -> Check {
    let c = Check::new(name, fail.is_none(), prov);
    match fail {
        Some(f) => c.with_detail(json!(f)),
        None => c,
    }
}

/// Properties (a) F-invariance, (b) transport, and (c) bullet closure.
pub fn check_properties(act: &PartialAction, fam: &Family) -> Result<Vec<Check>, SmashError> {
    let sig = &fam.sigma.elements;
    let g = &act.group;
    let mut a = None;
    for &c in &fam.sigma.subgroup {
        for &z in sig {
            for &e in sig {
                if fam.get(gm(act, c, z)?, gm(act, c, e)?) != fam.get(z, e) {
                    a.get_or_insert(format!("gamma = {}, pair ({}, {})", g.names[c], g.names[z], g.names[e]));
                }
            }
        }
    }
    let mut b = None;
    for &z in sig {
        for &e in sig {
            let h = quot(act, e, z)?;
            let moved: BTreeSet<usize> = fam.get(z, e).iter().map(|&x| apply(act, h, x)).collect::<Result<_, _>>()?;
            if &moved != fam.get(e, z) {
                b.get_or_insert(format!("pair ({}, {})", g.names[z], g.names[e]));
            }
        }
    }
    let mut c = None;
    for &z in sig {
        for &e in sig {
            let alpha = quot(act, e, z)?;
            for &t in sig {
                for &d in fam.get(z, e) {
                    for &f in fam.get(e, t) {
                        let y = bullet(act, d, alpha, f)?;
                        if y != 0 && !fam.get(z, t).contains(&y) {
                            c.get_or_insert(format!(
                                "{} . {} not in E_({}, {})",
                                act.e.names[d], act.e.names[f], g.names[z], g.names[t]
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(vec![
        fail_check("property_a_invariance", a, Provenance::VerifiedExact),
        fail_check("property_b_transport", b, Provenance::VerifiedExact),
        fail_check("property_c_bullet_closure", c, Provenance::VerifiedExact),
    ])
}

#[derive(Clone, Debug, Serialize)]
pub struct RedundancyReport {
    pub max_factors: usize,
    pub products_checked: usize,
    pub with_duplicates: usize,
    pub failures: Vec<String>,
}

/// Products along chains with a repeated factor agree with the product omitting the later copy.
pub fn check_redundant_factor(act: &PartialAction, one: &Family, max_factors: usize, limit: usize) -> Result<RedundancyReport, SmashError> {
    let sig = &one.sigma.elements;
    let mut rep = RedundancyReport { max_factors, products_checked: 0, with_duplicates: 0, failures: Vec::new() };
    // factors as (eta_k, e_k), the first having eta_0 = zeta
    fn eval(act: &PartialAction, zeta: usize, factors: &[(usize, usize)]) -> Result<usize, SmashError> {
        let mut x = factors[0].1;
        for &(eta, e) in &factors[1..] {
            if x == 0 {
                return Ok(0);
            }
            let alpha = quot(act, eta, zeta)?;
            x = bullet(act, x, alpha, e)?;
        }
        Ok(x)
    }
    let mut stack: Vec<(usize, Vec<(usize, usize)>, usize)> = Vec::new();
    for &z in sig {
        for &e1 in sig {
            for &x in one.get(z, e1) {
                stack.push((z, vec![(z, x)], e1));
            }
        }
    }
    while let Some((z, factors, next)) = stack.pop() {
        if rep.products_checked >= limit {
            break;
        }
        rep.products_checked += 1;
        let full = eval(act, z, &factors)?;
        for kb in 1..factors.len() {
            if factors[..kb].contains(&factors[kb]) {
                rep.with_duplicates += 1;
                let mut short = factors.clone();
                short.remove(kb);
                match eval(act, z, &short) {
                    Ok(v) if v == full => {}
                    Ok(v) => rep.failures.push(format!("{:?}: {} vs {}", factors, full, v)),
                    Err(err) => rep.failures.push(format!("{:?}: {}", factors, err)),
                }
            }
        }
        if factors.len() < max_factors && full != 0 {
            for &t in sig {
                for &f in one.get(next, t) {
                    let mut nf = factors.clone();
                    nf.push((next, f));
                    stack.push((z, nf, t));
                }
            }
        }
    }
    Ok(rep)
}

/// e . (zeta^-1 theta (f . (theta^-1 mu f'))) = (e . (zeta^-1 theta f)) . (zeta^-1 mu f') on family triples.
pub fn check_transport_identity(act: &PartialAction, fam: &Family, limit: usize) -> Result<Check, SmashError> {
    let sig = &fam.sigma.elements;
    let mut count = 0usize;
    let mut fail = None;
    'outer: for &z in sig {
        for &t in sig {
            for &m in sig {
                for &n in sig {
                    for &e in fam.get(z, t) {
                        for &f in fam.get(t, m) {
                            for &f2 in fam.get(m, n) {
                                let inner = bullet(act, f, quot(act, m, t)?, f2)?;
                                let lhs = bullet(act, e, quot(act, t, z)?, inner)?;
                                let step = bullet(act, e, quot(act, t, z)?, f)?;
                                let rhs = bullet(act, step, quot(act, m, z)?, f2)?;
                                if lhs != rhs {
                                    fail.get_or_insert(format!(
                                        "{} {} {}",
                                        act.e.names[e], act.e.names[f], act.e.names[f2]
                                    ));
                                }
                                count += 1;
                                if count >= limit {
                                    break 'outer;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let prov = if count >= limit { Provenance::bounded([("triples", count as i64)]) } else { Provenance::VerifiedExact };
    Ok(fail_check("bullet_transport_identity", fail, prov).with_detail(json!({ "triples": count })))
}
