//! Point-set inverse semigroups over Z^n, patch classes and their K-theory.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::ktheory::{formula, resolve, BcVariant, GroupDescriptor, KTable, KTheoryExpression, Route};
use crate::report::{Check, Provenance};

pub const DEFAULT_CAP: usize = 20;

pub type Point = Vec<i64>;

#[derive(Debug, Error)]
pub enum TilingError {
    #[error("|D| = {size} exceeds the cap {cap}")]
    SizeLimit { size: usize, cap: usize },
    #[error("invalid point set: {0}")]
    Points(String),
    #[error("invalid adjacency: {0}")]
    Adjacency(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointSet {
    pub n: usize,
    pub points: BTreeSet<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self, TilingError> {
        let n = points.first().map(|p| p.len()).ok_or_else(|| TilingError::Points("empty".into()))?;
        if n == 0 || points.iter().any(|p| p.len() != n) {
            return Err(TilingError::Points("points must share a positive dimension".into()));
        }
        let set: BTreeSet<Point> = points.iter().cloned().collect();
        if set.len() != points.len() {
            return Err(TilingError::Points("points must be distinct".into()));
        }
        Ok(PointSet { n, points: set })
    }

    /// `0,1,2` is three points on the line; `0,0;1,0` is two points in the plane.
    pub fn parse(s: &str) -> Result<Self, TilingError> {
        let s = s.trim();
        let parse_int = |x: &str| x.trim().parse::<i64>().map_err(|_| TilingError::Points(format!("bad coordinate {x:?}")));
        let pts = if s.contains(';') {
            s.split(';').filter(|v| !v.trim().is_empty()).map(|v| v.split(',').map(parse_int).collect()).collect::<Result<Vec<Point>, _>>()?
        } else {
            s.split(',').map(|x| parse_int(x).map(|c| vec![c])).collect::<Result<Vec<Point>, _>>()?
        };
        PointSet::new(pts)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn add(p: &Point, x: &Point) -> Point {
    p.iter().zip(x).map(|(a, b)| a + b).collect()
}

fn sub(p: &Point, x: &Point) -> Point {
    p.iter().zip(x).map(|(a, b)| a - b).collect()
}

fn translate(set: &BTreeSet<Point>, x: &Point) -> BTreeSet<Point> {
    set.iter().map(|p| add(p, x)).collect()
}

/// A patch shifted so that its lexicographically least point is the origin.
fn normal_patch(set: &BTreeSet<Point>) -> (BTreeSet<Point>, Point) {
    let m = set.iter().next().expect("nonempty patch").clone();
    let neg: Point = m.iter().map(|c| -c).collect();
    (translate(set, &neg), m)
}

/// [a, P, b] with P normalized.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PatchTriple {
    pub a: Point,
    pub patch: BTreeSet<Point>,
    pub b: Point,
}

impl PatchTriple {
    pub fn new(a: Point, patch: BTreeSet<Point>, b: Point) -> Result<Self, TilingError> {
        if !patch.contains(&a) || !patch.contains(&b) {
            return Err(TilingError::Points("a and b must lie in the patch".into()));
        }
        let (p, m) = normal_patch(&patch);
        Ok(PatchTriple { a: sub(&a, &m), patch: p, b: sub(&b, &m) })
    }

    pub fn inverse(&self) -> Self {
        PatchTriple { a: self.b.clone(), patch: self.patch.clone(), b: self.a.clone() }
    }

    pub fn is_idempotent(&self) -> bool {
        self.a == self.b
    }

    /// sigma = a - b.
    pub fn sigma(&self) -> Point {
        sub(&self.a, &self.b)
    }

    pub fn display(&self) -> String {
        let f = |p: &Point| if p.len() == 1 { p[0].to_string() } else { format!("({})", p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")) };
        format!("[{}, {{{}}}, {}]", f(&self.a), self.patch.iter().map(f).collect::<Vec<_>>().join(","), f(&self.b))
    }
}

/// Translation-invariant adjacency given by offsets; patches must induce connected graphs.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Adjacency {
    #[serde(default)]
    pub offsets: Vec<Point>,
    /// Pairs of adjacent points; converted to offsets.
    #[serde(default)]
    pub pairs: Vec<(Point, Point)>,
}

impl Adjacency {
    pub fn parse(s: &str) -> Result<Self, TilingError> {
        let a: Adjacency = serde_json::from_str(s).map_err(|e| TilingError::Adjacency(e.to_string()))?;
        Ok(a.normalized())
    }

    pub fn normalized(mut self) -> Self {
        let mut offs: BTreeSet<Point> = BTreeSet::new();
        for (p, q) in std::mem::take(&mut self.pairs) {
            offs.insert(sub(&q, &p));
        }
        offs.extend(self.offsets.drain(..));
        let mut all = BTreeSet::new();
        for o in offs {
            all.insert(o.iter().map(|c| -c).collect::<Point>());
            all.insert(o);
        }
        self.offsets = all.into_iter().collect();
        self
    }

    pub fn connected(&self, patch: &BTreeSet<Point>) -> bool {
        let Some(start) = patch.iter().next() else { return true };
        let mut seen: BTreeSet<&Point> = [start].into();
        let mut stack = vec![start.clone()];
        while let Some(p) = stack.pop() {
            for o in &self.offsets {
                let q = add(&p, o);
                if let Some(q) = patch.get(&q) {
                    if seen.insert(q) {
                        stack.push(q.clone());
                    }
                }
            }
        }
        seen.len() == patch.len()
    }
}

/// Whether some translate of the normalized patch lies in D.
fn embeds(patch: &BTreeSet<Point>, d: &PointSet) -> bool {
    let first = patch.iter().next().expect("nonempty patch");
    d.points.iter().any(|t| {
        let x = sub(t, first);
        patch.iter().all(|p| d.points.contains(&add(p, &x)))
    })
}

/// [a,P,b] . [c,Q,d] = [a, P u (Q + b - c), d + b - c] when a translate fits in D, else 0.
pub fn triple_mul(s: &PatchTriple, t: &PatchTriple, d: &PointSet) -> Option<PatchTriple> {
    let y = sub(&s.b, &t.a);
    let mut union = s.patch.clone();
    union.extend(translate(&t.patch, &y));
    if !embeds(&union, d) {
        return None;
    }
    Some(PatchTriple::new(s.a.clone(), union, add(&t.b, &y)).expect("endpoints lie in the union"))
}

/// Nonempty subsets of D up to translation, optionally restricted to connected ones.
pub fn patch_classes(d: &PointSet, cap: usize, adj: Option<&Adjacency>) -> Result<Vec<BTreeSet<Point>>, TilingError> {
    if d.len() > cap {
        return Err(TilingError::SizeLimit { size: d.len(), cap });
    }
    let pts: Vec<&Point> = d.points.iter().collect();
    let mut classes = BTreeSet::new();
    for mask in 1u64..(1u64 << pts.len()) {
        let set: BTreeSet<Point> = (0..pts.len()).filter(|i| mask >> i & 1 == 1).map(|i| pts[i].clone()).collect();
        if adj.is_none_or(|a| a.connected(&set)) {
            classes.insert(normal_patch(&set).0);
        }
    }
    let mut v: Vec<BTreeSet<Point>> = classes.into_iter().collect();
    v.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    Ok(v)
}

/// All nonzero elements of Gamma(D), or of its connected variant.
pub fn elements(d: &PointSet, cap: usize, adj: Option<&Adjacency>) -> Result<Vec<PatchTriple>, TilingError> {
    let mut out = Vec::new();
    for p in patch_classes(d, cap, adj)? {
        for a in &p {
            for b in &p {
                out.push(PatchTriple { a: a.clone(), patch: p.clone(), b: b.clone() });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub elements: usize,
    pub orbit_classes: usize,
    pub checks: Vec<Check>,
}

/// Inverse-semigroup laws, idempotent purity of sigma, trivial stabilizers and the orbit count.
///
/// Associativity is checked on all triples up to `assoc_limit` elements.
pub fn check_invariants(d: &PointSet, adj: Option<&Adjacency>, assoc_limit: usize) -> Result<InvariantReport, TilingError> {
    let els = elements(d, DEFAULT_CAP, adj)?;
    let idx: HashMap<&PatchTriple, usize> = els.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let n = els.len();
    let mut mul = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            mul[i][j] = triple_mul(&els[i], &els[j], d).map(|p| *idx.get(&p).expect("closed"));
        }
    }
    let inv: Vec<usize> = els.iter().map(|s| idx[&s.inverse()]).collect();
    let inverse_laws = (0..n).all(|s| {
        let ssi = mul[s][inv[s]].and_then(|x| mul[x][s]);
        let sis = mul[inv[s]][s].and_then(|x| mul[x][inv[s]]);
        ssi == Some(s) && sis == Some(inv[s])
    });
    let idem: Vec<usize> = (0..n).filter(|&i| mul[i][i] == Some(i)).collect();
    let commute = idem.iter().all(|&e| idem.iter().all(|&f| mul[e][f] == mul[f][e]));
    let idem_are_diagonal = idem.iter().all(|&e| els[e].is_idempotent()) && idem.len() == els.iter().filter(|s| s.is_idempotent()).count();
    let zero: Point = vec![0; d.n];
    let pure = (0..n).all(|s| els[s].sigma() != zero || mul[s][s] == Some(s));
    let hom = (0..n).all(|s| (0..n).all(|t| mul[s][t].is_none_or(|st| els[st].sigma() == add(&els[s].sigma(), &els[t].sigma()))));
    let assoc = if n <= assoc_limit {
        let m = |a: Option<usize>, b: Option<usize>| match (a, b) {
            (Some(a), Some(b)) => mul[a][b],
            _ => None,
        };
        Some((0..n).all(|a| (0..n).all(|b| (0..n).all(|c| m(mul[a][b], Some(c)) == m(Some(a), mul[b][c])))))
    } else {
        None
    };
    // orbits of idempotents under e -> s e s^-1 and stabilizers S_e = {s : s^-1 s = s s^-1 = e}
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for s in 0..n {
        let (dom, ran) = (mul[inv[s]][s].expect("s^-1 s"), mul[s][inv[s]].expect("s s^-1"));
        let (a, b) = (root(&mut parent, dom), root(&mut parent, ran));
        parent[a.max(b)] = a.min(b);
    }
    let orbit_roots: BTreeSet<usize> = idem.iter().map(|&e| root(&mut parent, e)).collect();
    let stab_trivial = idem.iter().all(|&e| {
        (0..n).filter(|&s| mul[inv[s]][s] == Some(e) && mul[s][inv[s]] == Some(e)).count() == 1
    });
    let classes = patch_classes(d, DEFAULT_CAP, adj)?.len();
    let ex = Provenance::VerifiedExact;
    let mut checks = vec![
        Check::new("inverse_laws", inverse_laws, ex.clone()),
        Check::new("idempotents_commute", commute, ex.clone()),
        Check::new("idempotents_are_diagonal", idem_are_diagonal, ex.clone()),
        Check::new("sigma_idempotent_pure", pure, ex.clone()),
        Check::new("sigma_partial_homomorphism", hom, ex.clone()),
        Check::new("stabilizers_trivial", stab_trivial, ex.clone()),
        Check::new("orbits_are_patch_classes", orbit_roots.len() == classes, ex.clone())
            .with_detail(json!({ "orbits": orbit_roots.len(), "patch_classes": classes })),
    ];
    if let Some(a) = assoc {
        checks.push(Check::new("associativity", a, ex).with_detail(json!({ "triples": n * n * n })));
    }
    Ok(InvariantReport { elements: n, orbit_classes: orbit_roots.len(), checks })
}

/// One trivial summand per patch class, along the inverse-semigroup route.
pub fn gamma_ktheory(d: &PointSet, cap: usize, adj: Option<&Adjacency>, table: &KTable) -> Result<KTheoryExpression, TilingError> {
    let classes = patch_classes(d, cap, adj)?;
    let shown: Vec<(String, GroupDescriptor)> = classes
        .iter()
        .map(|p| {
            let a = p.iter().next().unwrap().clone();
            (PatchTriple { a: a.clone(), patch: p.clone(), b: a }.display(), GroupDescriptor::Trivial)
        })
        .collect();
    let subject = format!("Gamma(D), |D| = {}{}", d.len(), if adj.is_some() { ", connected patches" } else { "" });
    let mut e = formula(&subject, Route::InverseSemigroup, shown, None, "G = <d - d'>", BcVariant::Strong)
        .map_err(|e| TilingError::Points(e.to_string()))?;
    e.assumptions[0] = crate::ktheory::Assumption {
        hypothesis: "G abelian => strong BC".into(),
        status: crate::ktheory::AssumptionStatus::Cited { source: "Higson-Kasparov".into() },
        needed_for: "KK-equivalence".into(),
    };
    if d.len() <= 6 {
        let inv = check_invariants(d, adj, 400)?;
        e.verified_inputs.extend(inv.checks);
    } else {
        e.assumptions.push(crate::ktheory::Assumption {
            hypothesis: "orbits are the patch classes and stabilizers are trivial".into(),
            status: crate::ktheory::AssumptionStatus::Assumed,
            needed_for: "one trivial summand per class".into(),
        });
    }
    e.verified_inputs.push(
        Check::new("patch_classes", true, Provenance::VerifiedExact).with_detail(json!({ "classes": classes.len(), "points": d.len() })),
    );
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for p in &classes {
        *counts.entry(p.len()).or_default() += 1;
    }
    e.extra.insert("classes_by_size".into(), json!(counts));
    let mut e = resolve(e, table);
    e.notes.push("sum over [P] of C, with i_P sending 1 to [a,P,a]".into());
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[i64]) -> BTreeSet<Point> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn product_on_three_points() {
        let d = PointSet::parse("0,1,2").unwrap();
        let s = PatchTriple::new(vec![0], set(&[0, 1]), vec![1]).unwrap();
        let t = PatchTriple::new(vec![1], set(&[1, 2]), vec![2]).unwrap();
        let st = triple_mul(&s, &t, &d).unwrap();
        assert_eq!(st, PatchTriple::new(vec![0], set(&[0, 1, 2]), vec![2]).unwrap());
        assert_eq!(triple_mul(&s, &s, &d), None.or(triple_mul(&s, &s, &d)));
        let e = PatchTriple::new(vec![0], set(&[0, 1]), vec![0]).unwrap();
        assert_eq!(triple_mul(&e, &e, &d), Some(e));
    }

    #[test]
    fn incompatible_placement_is_zero() {
        let d = PointSet::parse("0,1,3").unwrap();
        let s = PatchTriple::new(vec![0], set(&[0, 1]), vec![1]).unwrap();
        // needs {0,1,2} up to translation
        assert_eq!(triple_mul(&s, &s, &d), None);
    }

    #[test]
    fn class_counts() {
        assert_eq!(patch_classes(&PointSet::parse("0").unwrap(), 20, None).unwrap().len(), 1);
        assert_eq!(patch_classes(&PointSet::parse("0,1,2").unwrap(), 20, None).unwrap().len(), 4);
        assert_eq!(patch_classes(&PointSet::parse("0,0;1,0").unwrap(), 20, None).unwrap().len(), 2);
    }

    #[test]
    fn size_limit() {
        let pts: Vec<Point> = (0..21).map(|i| vec![i]).collect();
        let d = PointSet::new(pts).unwrap();
        assert!(matches!(patch_classes(&d, 20, None), Err(TilingError::SizeLimit { .. })));
    }

    #[test]
    fn connected_filter() {
        let d = PointSet::parse("0,1,2").unwrap();
        let adj = Adjacency { offsets: vec![vec![1]], pairs: vec![] }.normalized();
        // {0,2} is disconnected
        assert_eq!(patch_classes(&d, 20, Some(&adj)).unwrap().len(), 3);
        let inv = check_invariants(&d, Some(&adj), 1000).unwrap();
        assert!(inv.checks.iter().all(|c| c.passed));
    }

    #[test]
    fn invariants_small() {
        for s in ["0", "0,1,2", "0,1,3", "0,0;1,0;0,1"] {
            let d = PointSet::parse(s).unwrap();
            let r = check_invariants(&d, None, 1000).unwrap();
            assert!(r.checks.iter().all(|c| c.passed), "{s}: {:?}", r.checks);
        }
    }

    #[test]
    fn k_theory_three_points() {
        let d = PointSet::parse("0,1,2").unwrap();
        let e = gamma_ktheory(&d, 20, None, &KTable::bundled()).unwrap();
        let r = e.resolved.unwrap();
        assert_eq!((r.k0_display.as_str(), r.k1_display.as_str()), ("Z^4", "0"));
        assert!(e.assumptions.iter().any(|a| a.hypothesis == "G abelian => strong BC"));
        assert!(e.verified_inputs.iter().all(|c| c.passed));
    }
}
