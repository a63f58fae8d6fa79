//! Orbits and stabilizers of a partial action on the nonzero idempotents, and the
//! index-level bijection Xi_d together with its cocycle w_g.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::paction::{FiniteInverseSemigroup, GroupTable, PartialAction, Th};
use crate::report::{Check, Provenance};

#[derive(Debug, Error)]
pub enum OrbitError {
    #[error("products leave the group window: {0}")]
    WindowEscape(String),
    #[error("{0} is not a nonzero idempotent")]
    NotNonzero(String),
}

/// Length-lex order on displayed names.
fn name_key(s: &str) -> (usize, &str) {
    (s.chars().count(), s)
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitPartition {
    /// Classes of nonzero idempotents, each sorted, listed by representative.
    pub classes: Vec<Vec<usize>>,
    pub representatives: Vec<usize>,
    /// Set when some move was undecided inside the window, so classes may be unmerged.
    pub possibly_unmerged: bool,
}

impl OrbitPartition {
    pub fn class_of(&self, e: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&e))
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

pub fn compute_orbits(act: &PartialAction) -> OrbitPartition {
    let n = act.e.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut undecided = false;
    for g in 0..act.group.len() {
        for e in act.e.nonzero() {
            match act.theta[g][e] {
                Th::Val(f) => {
                    let (a, b) = (find(&mut parent, e), find(&mut parent, f));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
                Th::Out => undecided = true,
                Th::NotInDomain => {}
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in act.e.nonzero() {
        let r = find(&mut parent, e);
        groups.entry(r).or_default().push(e);
    }
    let names = &act.e.names;
    let mut classes: Vec<(usize, Vec<usize>)> = groups
        .into_values()
        .map(|c| {
            let rep = *c.iter().min_by(|&&a, &&b| name_key(&names[a]).cmp(&name_key(&names[b]))).unwrap();
            (rep, c)
        })
        .collect();
    classes.sort_by(|a, b| name_key(&names[a.0]).cmp(&name_key(&names[b.0])));
    OrbitPartition {
        representatives: classes.iter().map(|c| c.0).collect(),
        classes: classes.into_iter().map(|c| c.1).collect(),
        possibly_unmerged: undecided || act.group.windowed,
    }
}

/// G(d), G_d and the section r of G -> G/G_d.
#[derive(Clone, Debug)]
pub struct StabilizerData {
    pub d: usize,
    /// G(d) = {g : d in E_{g^-1}}.
    pub big: Vec<usize>,
    /// G_d = {g in G(d) : g.d = d}.
    pub stab: Vec<usize>,
    pub generators: Vec<usize>,
    /// r(g): the minimal member of the coset g G_d.
    pub section: Vec<usize>,
    /// The transversal R = image of r.
    pub transversal: Vec<usize>,
    /// Set when the group is a window, so G_d is a lower bound.
    pub windowed: bool,
}

fn gm(g: &GroupTable, a: usize, b: usize) -> Result<usize, OrbitError> {
    g.m(a, b).ok_or_else(|| OrbitError::WindowEscape(format!("{} * {}", g.names[a], g.names[b])))
}

pub fn stabilizer(act: &PartialAction, d: usize) -> Result<StabilizerData, OrbitError> {
    if d == 0 || d >= act.e.len() {
        return Err(OrbitError::NotNonzero(d.to_string()));
    }
    let g = &act.group;
    let big: Vec<usize> = (0..g.len()).filter(|&x| act.in_dom(x, d)).collect();
    let stab: Vec<usize> = big.iter().copied().filter(|&x| act.theta[x][d] == Th::Val(d)).collect();
    let mut generators = Vec::new();
    let mut span = vec![g.identity];
    for &x in &stab {
        if !span.contains(&x) {
            generators.push(x);
            span = g.generated(&generators).unwrap_or_else(|| {
                let mut s = span.clone();
                s.push(x);
                s
            });
        }
    }
    let mut section = vec![usize::MAX; g.len()];
    let mut escaped = Vec::new();
    for x in 0..g.len() {
        let mut best = x;
        for &s in &stab {
            match g.m(x, s) {
                Some(y) => best = best.min(y),
                None => escaped.push(format!("{} * {}", g.names[x], g.names[s])),
            }
        }
        section[x] = best;
    }
    if !g.windowed && !escaped.is_empty() {
        return Err(OrbitError::WindowEscape(escaped.join(", ")));
    }
    let transversal: BTreeSet<usize> = section.iter().copied().collect();
    Ok(StabilizerData {
        d,
        big,
        stab,
        generators,
        section,
        transversal: transversal.into_iter().collect(),
        windowed: g.windowed,
    })
}

/// Point of G(d)/G_d x G/G_d x G_d, cosets named by their representative.
pub type Triple = (usize, usize, usize);

#[derive(Clone, Debug)]
pub struct XiTables {
    /// (gamma.d, zeta) -> ([gamma], [zeta gamma], mu).
    pub forward: BTreeMap<(usize, usize), Triple>,
    pub backward: BTreeMap<Triple, (usize, usize)>,
}

fn inv_r(g: &GroupTable, x: usize) -> usize {
    g.inv[x]
}

fn mul3(g: &GroupTable, a: usize, b: usize, c: usize) -> Result<usize, OrbitError> {
    gm(g, gm(g, a, b)?, c)
}

/// Builds both directions of Xi_d.
pub fn xi_tables(act: &PartialAction, st: &StabilizerData) -> Result<XiTables, OrbitError> {
    let g = &act.group;
    let r = &st.section;
    let mut forward = BTreeMap::new();
    for &gamma in &st.big {
        let Th::Val(e) = act.theta[gamma][st.d] else { continue };
        for zeta in 0..g.len() {
            let zg = gm(g, zeta, gamma)?;
            let mu = mul3(g, inv_r(g, r[zg]), zeta, r[gamma])?;
            forward.insert((e, zeta), (r[gamma], r[zg], mu));
        }
    }
    let mut backward = BTreeMap::new();
    let cos_big: BTreeSet<usize> = st.big.iter().map(|&x| r[x]).collect();
    for &c1 in &cos_big {
        let Th::Val(e) = act.theta[c1][st.d] else {
            return Err(OrbitError::WindowEscape(format!("{} not defined at d", g.names[c1])));
        };
        for &c2 in &st.transversal {
            for &mu in &st.stab {
                let zeta = mul3(g, c2, mu, inv_r(g, c1))?;
                backward.insert((c1, c2, mu), (e, zeta));
            }
        }
    }
    Ok(XiTables { forward, backward })
}

/// Xi_d is a bijection with the displayed inverse, checked on every point.
pub fn xi_bijection(act: &PartialAction, st: &StabilizerData) -> Result<(Vec<Check>, XiTables), OrbitError> {
    let t = xi_tables(act, st)?;
    let prov = if st.windowed { Provenance::bounded([("window", act.group.len() as i64)]) } else { Provenance::VerifiedExact };
    let stab: BTreeSet<usize> = st.stab.iter().copied().collect();
    let mu_in_stab = t.forward.values().all(|x| stab.contains(&x.2));
    let left = t.forward.iter().all(|(p, x)| t.backward.get(x) == Some(p));
    let right = t.backward.iter().all(|(x, p)| t.forward.get(p) == Some(x));
    let detail = json!({ "points": t.forward.len(), "triples": t.backward.len() });
    Ok((
        vec![
            Check::new("xi_lands_in_stabilizer", mu_in_stab, prov.clone()),
            Check::new("xi_inverse_after_xi", left, prov.clone()).with_detail(detail.clone()),
            Check::new("xi_after_inverse", right, prov).with_detail(detail),
        ],
        t,
    ))
}

/// w_g as a bijection on triples.
pub fn w_table(act: &PartialAction, st: &StabilizerData, g: usize) -> Result<BTreeMap<Triple, Triple>, OrbitError> {
    let grp = &act.group;
    let t = xi_tables(act, st)?;
    let r = &st.section;
    let mut w = BTreeMap::new();
    for &(c1, c2, mu) in t.backward.keys() {
        let gi_tau = gm(grp, grp.inv[g], c2)?;
        let m = gm(grp, mul3(grp, grp.inv[r[c2]], g, r[gi_tau])?, mu)?;
        w.insert((c1, c2, mu), (c1, c2, m));
    }
    Ok(w)
}

fn shift(act: &PartialAction, st: &StabilizerData, g: usize, x: Triple) -> Result<Triple, OrbitError> {
    Ok((x.0, st.section[gm(&act.group, g, x.1)?], x.2))
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleReport {
    pub pairs_checked: usize,
    pub points: usize,
    pub checks: Vec<Check>,
}

/// w_{gh} = w_g (id (x) l_g (x) id)(w_h) and Xi Ad(1 (x) lambda_g) Xi^-1 = w_g (id (x) l_g (x) id) w_g^*,
/// pointwise as bijections for all g, h.
pub fn cocycle_check(act: &PartialAction, st: &StabilizerData) -> Result<CocycleReport, OrbitError> {
    let grp = &act.group;
    let t = xi_tables(act, st)?;
    let n = grp.len();
    let ws = (0..n).map(|g| w_table(act, st, g)).collect::<Result<Vec<_>, _>>()?;
    let prov = if st.windowed { Provenance::bounded([("window", n as i64)]) } else { Provenance::VerifiedExact };
    let mut failures = Vec::new();
    let mut pairs = 0;
    for g in 0..n {
        for h in 0..n {
            let Some(gh) = grp.m(g, h) else { continue };
            pairs += 1;
            for &x in t.backward.keys() {
                // l_g w_h l_g^-1, then w_g
                let y = shift(act, st, grp.inv[g], x)?;
                let y = shift(act, st, g, ws[h][&y])?;
                if ws[g][&y] != ws[gh][&x] {
                    failures.push(format!("g={} h={} at {:?}", grp.names[g], grp.names[h], x));
                }
            }
        }
    }
    let mut conj_fail = Vec::new();
    for g in 0..n {
        // Ad(w_g) after id (x) l_g (x) id is Ad of the bijection w_g l_g
        for (&x, &(e, zeta)) in &t.backward {
            let lhs = t.forward.get(&(e, gm(grp, g, zeta)?)).copied();
            let rhs = ws[g][&shift(act, st, g, x)?];
            if lhs != Some(rhs) {
                conj_fail.push(format!("g={} at {:?}", grp.names[g], x));
            }
        }
    }
    let w_bij = ws.iter().all(|w| w.values().collect::<BTreeSet<_>>().len() == w.len());
    let detail = |f: &[String]| json!({ "failures": f.iter().take(5).collect::<Vec<_>>() });
    Ok(CocycleReport {
        pairs_checked: pairs,
        points: t.backward.len(),
        checks: vec![
            Check::new("w_is_bijection", w_bij, prov.clone()),
            Check::new("w_cocycle_identity", failures.is_empty(), prov.clone()).with_detail(detail(&failures)),
            Check::new("xi_conjugates_translation", conj_fail.is_empty(), prov).with_detail(detail(&conj_fail)),
        ],
    })
}

/// S_d = {s : s^-1 s = s s^-1 = d} is a group with identity d.
pub fn semigroup_stabilizer(s: &FiniteInverseSemigroup, d: usize) -> (Vec<usize>, Check) {
    let sd: Vec<usize> = (0..s.len()).filter(|&x| s.dom_idem(x) == d && s.range_idem(x) == d).collect();
    let closed = sd.iter().all(|&a| sd.iter().all(|&b| sd.contains(&s.mul[a][b])));
    let unit = sd.contains(&d) && sd.iter().all(|&a| s.mul[d][a] == a && s.mul[a][d] == a);
    let inverses = sd.iter().all(|&a| s.mul[a][s.inv(a)] == d);
    let ok = s.is_idempotent(d) && closed && unit && inverses;
    (sd, Check::new("semigroup_stabilizer_is_group", ok, Provenance::VerifiedExact))
}

/// Shape of a finite stabilizer, for the K-theory emitter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StabShape {
    Trivial,
    FiniteCyclic { n: usize },
    Finite { order: usize },
}

pub fn shape(g: &GroupTable, stab: &[usize]) -> StabShape {
    match stab.len() {
        1 => StabShape::Trivial,
        n if stab.iter().any(|&x| g.order(x) == Some(n)) => StabShape::FiniteCyclic { n },
        n => StabShape::Finite { order: n },
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub representative: String,
    pub members: Vec<String>,
    pub orbit_group: Vec<String>,
    pub stabilizer: Vec<String>,
    pub stabilizer_generators: Vec<String>,
    pub stabilizer_shape: StabShape,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitReport {
    pub classes: Vec<ClassReport>,
    pub possibly_unmerged: bool,
    pub provenance: Provenance,
    pub passed: bool,
}

/// Orbits, stabilizers and the Xi_d / w_g checks for every representative.
///
/// Windowed actions skip the bijection checks when the window cannot hold them.
pub fn orbit_report(act: &PartialAction, window_prov: Provenance) -> Result<OrbitReport, OrbitError> {
    let part = compute_orbits(act);
    let g = &act.group;
    let en = |v: &[usize]| v.iter().map(|&x| act.e.names[x].clone()).collect::<Vec<_>>();
    let gn = |v: &[usize]| v.iter().map(|&x| g.names[x].clone()).collect::<Vec<_>>();
    let mut classes = Vec::new();
    for (c, &d) in part.classes.iter().zip(&part.representatives) {
        let st = stabilizer(act, d)?;
        let mut checks = Vec::new();
        let sub_ok = g.generated(&st.generators).is_some_and(|s| s == {
            let mut v = st.stab.clone();
            v.sort_unstable();
            v
        });
        let sprov = if st.windowed { window_prov.clone() } else { Provenance::VerifiedExact };
        checks.push(
            Check::new("stabilizer_is_subgroup", sub_ok || (st.windowed && st.stab.len() == 1), sprov.clone())
                .with_detail(json!({ "order": st.stab.len() })),
        );
        if !g.windowed {
            let (xc, _) = xi_bijection(act, &st)?;
            checks.extend(xc);
            let cr = cocycle_check(act, &st)?;
            checks.extend(cr.checks.into_iter().map(|c| {
                let n = c.name.clone();
                c.with_detail(json!({ "pairs": cr.pairs_checked, "points": cr.points, "check": n }))
            }));
        }
        classes.push(ClassReport {
            representative: act.e.names[d].clone(),
            members: en(c),
            orbit_group: gn(&st.big),
            stabilizer: gn(&st.stab),
            stabilizer_generators: gn(&st.generators),
            stabilizer_shape: shape(g, &st.stab),
            checks,
        });
    }
    let passed = classes.iter().all(|c| c.checks.iter().all(|k| k.passed));
    let provenance = if part.possibly_unmerged { window_prov } else { Provenance::VerifiedExact };
    Ok(OrbitReport { classes, possibly_unmerged: part.possibly_unmerged, provenance, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paction::example;

    fn ex(name: &str) -> PartialAction {
        example(name).unwrap().action
    }

    #[test]
    fn trivial_action_has_singleton_classes() {
        let a = ex("diamond");
        let p = compute_orbits(&a);
        assert_eq!(p.classes.len(), 4);
        assert!(p.classes.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn z2swap_orbit_and_stabilizer() {
        let a = ex("z2swap");
        let p = compute_orbits(&a);
        let d = a.e.index("d").unwrap();
        let dd = a.e.index("d'").unwrap();
        assert!(p.classes.iter().any(|c| c == &vec![d, dd]));
        let st = stabilizer(&a, d).unwrap();
        assert_eq!(st.stab, vec![0]);
        assert_eq!(st.big, vec![0, 1]);
        let (checks, t) = xi_bijection(&a, &st).unwrap();
        assert!(checks.iter().all(|c| c.passed));
        assert_eq!(t.forward.len(), 4);
        let cr = cocycle_check(&a, &st).unwrap();
        assert_eq!(cr.pairs_checked, 4);
        assert!(cr.checks.iter().all(|c| c.passed), "{:?}", cr.checks);
    }

    #[test]
    fn z4pair_tables() {
        let a = ex("z4pair");
        let x = a.e.index("x").unwrap();
        let st = stabilizer(&a, x).unwrap();
        assert_eq!(st.stab, vec![0, 2]);
        let (checks, t) = xi_bijection(&a, &st).unwrap();
        assert!(checks.iter().all(|c| c.passed));
        assert_eq!(t.forward.len(), 8);
        let cr = cocycle_check(&a, &st).unwrap();
        assert_eq!(cr.pairs_checked, 16);
        assert!(cr.checks.iter().all(|c| c.passed));
    }

    #[test]
    fn full_stabilizer_gives_left_translation() {
        let a = ex("z4pair");
        let top = a.e.index("top").unwrap();
        let st = stabilizer(&a, top).unwrap();
        assert_eq!(st.stab.len(), 4);
        assert_eq!(st.transversal, vec![0]);
        for g in 0..4 {
            let w = w_table(&a, &st, g).unwrap();
            assert!(w.iter().all(|(x, y)| y.2 == a.group.m(g, x.2).unwrap()));
        }
    }

    #[test]
    fn s3_points_non_normal_stabilizer() {
        let a = ex("s3points");
        let p1 = a.e.index("p1").unwrap();
        let st = stabilizer(&a, p1).unwrap();
        assert_eq!(st.stab.len(), 2);
        assert_eq!(st.transversal.len(), 3);
        let (checks, t) = xi_bijection(&a, &st).unwrap();
        assert!(checks.iter().all(|c| c.passed));
        assert_eq!(t.forward.len(), 18);
        let cr = cocycle_check(&a, &st).unwrap();
        assert_eq!(cr.pairs_checked, 36);
        assert!(cr.checks.iter().all(|c| c.passed), "{:?}", cr.checks);
    }

    #[test]
    fn semigroup_side_stabilizer() {
        let s = example("z2swap").unwrap().semigroup.unwrap();
        for d in s.idempotents().into_iter().filter(|&d| d != 0) {
            let (sd, c) = semigroup_stabilizer(&s, d);
            assert!(c.passed);
            assert_eq!(sd, vec![d]);
        }
    }

    #[test]
    fn report_on_examples_passes() {
        for name in ["trivial", "z2swap", "z4pair", "s3points", "diamond"] {
            let r = orbit_report(&ex(name), Provenance::VerifiedExact).unwrap();
            assert!(r.passed, "{name}");
        }
    }
}
