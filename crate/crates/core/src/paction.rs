//! Partial actions of groups on semilattices with zero, and the two constructions
//! passing between them and strongly 0-E-unitary inverse semigroups.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::hull::{HullElement, HullSet, HullSpace, IdealEq};
use crate::presentation::GroupElem;
use crate::report::{Check, Provenance};

#[derive(Debug, Error)]
pub enum PactionError {
    #[error("sigma is not idempotent pure: {0}")]
    NotIdempotentPure(String),
    #[error("basis is not invariant: g = {g}, V = {v}")]
    NotInvariantBasis { g: String, v: String },
    #[error("invalid semilattice: {0}")]
    Semilattice(String),
    #[error("invalid group table: {0}")]
    Group(String),
    #[error("invalid action: {0}")]
    Action(String),
    #[error("invalid inverse semigroup: {0}")]
    Semigroup(String),
    #[error("product leaves the group window: {0}")]
    WindowExit(String),
}

/// A finite group, or a window of an infinite one where products may be undefined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupTable {
    pub names: Vec<String>,
    pub mul: Vec<Vec<Option<usize>>>,
    pub inv: Vec<usize>,
    pub identity: usize,
    pub windowed: bool,
}

impl GroupTable {
    pub fn trivial() -> Self {
        GroupTable { names: vec!["1".into()], mul: vec![vec![Some(0)]], inv: vec![0], identity: 0, windowed: false }
    }

    pub fn cyclic(n: usize) -> Self {
        let names = (0..n).map(|i| i.to_string()).collect();
        let mul = (0..n).map(|a| (0..n).map(|b| Some((a + b) % n)).collect()).collect();
        let inv = (0..n).map(|a| (n - a) % n).collect();
        GroupTable { names, mul, inv, identity: 0, windowed: false }
    }

    /// Permutations of {1,2,3} composed right to left.
    pub fn symmetric3() -> Self {
        let perms: [[usize; 3]; 6] = [[0, 1, 2], [1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]];
        let names = ["e", "(12)", "(13)", "(23)", "(123)", "(132)"].iter().map(|s| s.to_string()).collect();
        let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let mul = (0..6)
            .map(|a| (0..6).map(|b| Some(idx([perms[a][perms[b][0]], perms[a][perms[b][1]], perms[a][perms[b][2]]]))).collect())
            .collect();
        let mut t = GroupTable { names, mul, inv: vec![0; 6], identity: 0, windowed: false };
        t.inv = (0..6).map(|a| (0..6).find(|&b| t.mul[a][b] == Some(0)).unwrap()).collect();
        t
    }

    /// Integers in [-radius, radius]; sums outside the window are undefined.
    pub fn z_window(radius: i64) -> Self {
        let vals: Vec<i64> = (-radius..=radius).collect();
        let pos = |v: i64| (v + radius) as usize;
        let names = vals.iter().map(|v| v.to_string()).collect();
        let mul = vals
            .iter()
            .map(|&a| vals.iter().map(|&b| if (a + b).abs() <= radius { Some(pos(a + b)) } else { None }).collect())
            .collect();
        let inv = vals.iter().map(|&a| pos(-a)).collect();
        GroupTable { names, mul, inv, identity: pos(0), windowed: true }
    }

    pub fn from_table(names: Vec<String>, mul: Vec<Vec<usize>>) -> Result<Self, PactionError> {
        let n = names.len();
        if mul.len() != n || mul.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(PactionError::Group("table must be square over the listed names".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| mul[e][a] == a && mul[a][e] == a))
            .ok_or_else(|| PactionError::Group("no identity".into()))?;
        let mut inv = Vec::with_capacity(n);
        for a in 0..n {
            inv.push(
                (0..n)
                    .find(|&b| mul[a][b] == identity && mul[b][a] == identity)
                    .ok_or_else(|| PactionError::Group(format!("{} has no inverse", names[a])))?,
            );
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(PactionError::Group("not associative".into()));
                    }
                }
            }
        }
        let mul = mul.into_iter().map(|r| r.into_iter().map(Some).collect()).collect();
        Ok(GroupTable { names, mul, inv, identity, windowed: false })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn m(&self, a: usize, b: usize) -> Option<usize> {
        self.mul[a][b]
    }

    /// Order of an element; `None` when a power leaves the window.
    pub fn order(&self, g: usize) -> Option<usize> {
        let mut x = g;
        for k in 1..=self.len() {
            if x == self.identity {
                return Some(k);
            }
            x = self.m(x, g)?;
        }
        None
    }

    /// The subgroup generated by a set, if it closes inside the table.
    pub fn generated(&self, gens: &[usize]) -> Option<Vec<usize>> {
        let mut set = vec![self.identity];
        let mut i = 0;
        while i < set.len() {
            for &g in gens {
                let x = self.m(set[i], g)?;
                if !set.contains(&x) {
                    set.push(x);
                }
            }
            i += 1;
        }
        set.sort_unstable();
        Some(set)
    }
}

/// A finite meet-semilattice; index 0 is the zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Semilattice {
    pub names: Vec<String>,
    pub meet: Vec<Vec<usize>>,
}

impl Semilattice {
    /// Builds the meet table as greatest lower bounds of a partial order.
    pub fn from_leq(names: &[String], leq: &[(String, String)]) -> Result<Self, PactionError> {
        let mut all = vec!["0".to_string()];
        all.extend(names.iter().filter(|n| n.as_str() != "0").cloned());
        let n = all.len();
        let idx = |s: &str| all.iter().position(|x| x == s);
        let mut le = vec![vec![false; n]; n];
        for i in 0..n {
            le[i][i] = true;
            le[0][i] = true;
        }
        for (a, b) in leq {
            let (i, j) = (
                idx(a).ok_or_else(|| PactionError::Semilattice(format!("unknown element {a}")))?,
                idx(b).ok_or_else(|| PactionError::Semilattice(format!("unknown element {b}")))?,
            );
            le[i][j] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if le[i][k] && le[k][j] {
                        le[i][j] = true;
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && le[i][j] && le[j][i] {
                    return Err(PactionError::Semilattice(format!("{} and {} are equal in the order", all[i], all[j])));
                }
            }
        }
        let mut meet = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let lower: Vec<usize> = (0..n).filter(|&k| le[k][i] && le[k][j]).collect();
                let glb = lower.iter().copied().find(|&k| lower.iter().all(|&m| le[m][k]));
                meet[i][j] = glb.ok_or_else(|| {
                    PactionError::Semilattice(format!("{} and {} have no greatest lower bound", all[i], all[j]))
                })?;
            }
        }
        Ok(Semilattice { names: all, meet })
    }

    pub fn from_meet(names: Vec<String>, meet: Vec<Vec<usize>>) -> Result<Self, PactionError> {
        let s = Semilattice { names, meet };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), PactionError> {
        let n = self.len();
        for a in 0..n {
            if self.meet[a][a] != a || self.meet[0][a] != 0 {
                return Err(PactionError::Semilattice(format!("idempotence or zero fails at {}", self.names[a])));
            }
            for b in 0..n {
                if self.meet[a][b] != self.meet[b][a] {
                    return Err(PactionError::Semilattice("meet not commutative".into()));
                }
                for c in 0..n {
                    if self.meet[self.meet[a][b]][c] != self.meet[a][self.meet[b][c]] {
                        return Err(PactionError::Semilattice("meet not associative".into()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn leq(&self, e: usize, f: usize) -> bool {
        self.meet[e][f] == e
    }

    pub fn nonzero(&self) -> impl Iterator<Item = usize> {
        1..self.names.len()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Length of the longest strictly decreasing chain of nonzero elements within a set.
    pub fn longest_chain(&self, set: &[usize]) -> usize {
        let mut sorted: Vec<usize> = set.iter().copied().filter(|&e| e != 0).collect();
        // elements below others come first
        sorted.sort_by_key(|&e| set.iter().filter(|&&f| f != e && self.leq(f, e)).count());
        let mut best = vec![1usize; sorted.len()];
        for i in 0..sorted.len() {
            for j in 0..i {
                if sorted[j] != sorted[i] && self.leq(sorted[j], sorted[i]) {
                    best[i] = best[i].max(best[j] + 1);
                }
            }
        }
        best.into_iter().max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Th {
    Val(usize),
    NotInDomain,
    /// Undecided because the data were truncated to a window.
    Out,
}

impl Th {
    pub fn val(self) -> Option<usize> {
        match self {
            Th::Val(v) => Some(v),
            _ => None,
        }
    }
}

/// theta[g][e] for nonzero e; E_{g^-1} is the set where it is defined.
#[derive(Clone, Debug)]
pub struct PartialAction {
    pub group: GroupTable,
    pub e: Semilattice,
    pub theta: Vec<Vec<Th>>,
}

impl PartialAction {
    pub fn new(group: GroupTable, e: Semilattice) -> Self {
        let mut theta = vec![vec![Th::NotInDomain; e.len()]; group.len()];
        for x in e.nonzero() {
            theta[group.identity][x] = Th::Val(x);
        }
        PartialAction { group, e, theta }
    }

    pub fn th(&self, g: usize, e: usize) -> Th {
        if e == 0 {
            return Th::Val(0);
        }
        self.theta[g][e]
    }

    pub fn in_dom(&self, g: usize, e: usize) -> bool {
        e != 0 && matches!(self.theta[g][e], Th::Val(_))
    }

    /// E_{g^-1}.
    pub fn domain(&self, g: usize) -> Vec<usize> {
        self.e.nonzero().filter(|&e| self.in_dom(g, e)).collect()
    }

    /// E_g.
    pub fn range(&self, g: usize) -> Vec<usize> {
        let mut r: Vec<usize> = self.domain(g).into_iter().filter_map(|e| self.theta[g][e].val()).collect();
        r.sort_unstable();
        r
    }

    pub fn is_windowed(&self) -> bool {
        self.group.windowed || self.theta.iter().flatten().any(|t| *t == Th::Out)
    }

    pub fn check_axioms(&self) -> Vec<Check> {
        let g = &self.group;
        let e = &self.e;
        let prov = if self.is_windowed() {
            Provenance::bounded([("group_window", g.len() as i64)])
        } else {
            Provenance::VerifiedExact
        };
        let mut out = Vec::new();
        let mut fail: Option<String> = None;
        for x in e.nonzero() {
            if self.theta[g.identity][x] != Th::Val(x) {
                fail.get_or_insert(format!("theta_1({}) != {}", e.names[x], e.names[x]));
            }
        }
        out.push(check("theta_identity", &fail, prov.clone()));

        let mut fail = None;
        for a in 0..g.len() {
            for x in self.domain(a) {
                let y = self.theta[a][x].val().unwrap();
                if !matches!(self.theta[g.inv[a]][y], Th::Out) && self.theta[g.inv[a]][y] != Th::Val(x) {
                    fail.get_or_insert(format!("theta_{}^-1 at {}", g.names[a], e.names[x]));
                }
            }
        }
        out.push(check("theta_inverse", &fail, prov.clone()));

        let mut fail = None;
        for a in 0..g.len() {
            let dom = self.domain(a);
            for &x in &dom {
                for y in e.nonzero() {
                    if e.leq(y, x) && self.theta[a][y] == Th::NotInDomain {
                        fail.get_or_insert(format!("E_{{{}^-1}} not an order ideal at {}", g.names[a], e.names[y]));
                    }
                }
                for &y in &dom {
                    let (tx, ty) = (self.theta[a][x].val().unwrap(), self.theta[a][y].val().unwrap());
                    match self.th(a, e.meet[x][y]) {
                        Th::Val(v) if v == e.meet[tx][ty] => {}
                        Th::Out => {}
                        _ => {
                            fail.get_or_insert(format!("theta_{} does not preserve {}.{}", g.names[a], e.names[x], e.names[y]));
                        }
                    }
                }
            }
        }
        out.push(check("meet_preserving", &fail, prov.clone()));

        let mut fail = None;
        let mut set_fail = None;
        for a in 0..g.len() {
            for b in 0..g.len() {
                let Some(ab) = g.m(a, b) else { continue };
                for x in self.domain(b) {
                    let y = self.theta[b][x].val().unwrap();
                    if let Th::Val(z) = self.theta[a][y] {
                        match self.theta[ab][x] {
                            Th::Val(w) if w == z => {}
                            Th::Out => {}
                            _ => {
                                fail.get_or_insert(format!(
                                    "theta_{} theta_{} not contained in theta_{} at {}",
                                    g.names[a], g.names[b], g.names[ab], e.names[x]
                                ));
                            }
                        }
                    }
                }
                if self.theta[ab].contains(&Th::Out) || self.theta[b].contains(&Th::Out) || self.theta[g.inv[a]].contains(&Th::Out) {
                    continue;
                }
                // h.(E_{(gh)^-1} n E_{h^-1}) = E_h n E_{g^-1} with g = a, h = b
                let mut lhs: Vec<usize> = self
                    .domain(ab)
                    .into_iter()
                    .filter(|&x| self.in_dom(b, x))
                    .map(|x| self.theta[b][x].val().unwrap())
                    .collect();
                lhs.sort_unstable();
                let rhs: Vec<usize> = self.range(b).into_iter().filter(|&y| self.in_dom(a, y)).collect();
                if lhs != rhs {
                    set_fail.get_or_insert(format!("set identity fails for g = {}, h = {}", g.names[a], g.names[b]));
                }
            }
        }
        out.push(check("composition_contained", &fail, prov.clone()));
        out.push(check("domain_identity", &set_fail, prov));
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut theta = BTreeMap::new();
        for a in 0..self.group.len() {
            let mut m = BTreeMap::new();
            for x in self.e.nonzero() {
                match self.theta[a][x] {
                    Th::Val(y) => {
                        m.insert(self.e.names[x].clone(), json!(self.e.names[y]));
                    }
                    Th::Out => {
                        m.insert(self.e.names[x].clone(), json!(null));
                    }
                    Th::NotInDomain => {}
                }
            }
            theta.insert(self.group.names[a].clone(), m);
        }
        json!({
            "group": self.group.names,
            "group_windowed": self.group.windowed,
            "semilattice": self.e.names,
            "theta": theta,
        })
    }
}

fn check(name: &str, fail: &Option<String>, prov: Provenance) -> Check {
    let c = Check::new(name, fail.is_none(), prov);
    match fail {
        Some(f) => c.with_detail(json!(f)),
        None => c,
    }
}

/// A finite inverse semigroup with zero at index 0 and a partial homomorphism to a group.
#[derive(Clone, Debug)]
pub struct FiniteInverseSemigroup {
    pub names: Vec<String>,
    pub mul: Vec<Vec<usize>>,
    pub sigma: Vec<Option<usize>>,
    pub group: GroupTable,
    inv: Vec<usize>,
}

impl FiniteInverseSemigroup {
    pub fn new(
        names: Vec<String>,
        mul: Vec<Vec<usize>>,
        sigma: Vec<Option<usize>>,
        group: GroupTable,
    ) -> Result<Self, PactionError> {
        let n = names.len();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(PactionError::Semigroup(format!(
                            "not associative at ({}, {}, {})",
                            names[a], names[b], names[c]
                        )));
                    }
                }
            }
        }
        if (0..n).any(|a| mul[0][a] != 0 || mul[a][0] != 0) {
            return Err(PactionError::Semigroup("index 0 is not a zero".into()));
        }
        let mut inv = Vec::with_capacity(n);
        for s in 0..n {
            let cands: Vec<usize> = (0..n).filter(|&t| mul[mul[s][t]][s] == s && mul[mul[t][s]][t] == t).collect();
            if cands.len() != 1 {
                return Err(PactionError::Semigroup(format!("{} has {} inverses", names[s], cands.len())));
            }
            inv.push(cands[0]);
        }
        let s = FiniteInverseSemigroup { names, mul, sigma, group, inv };
        s.check_sigma()?;
        Ok(s)
    }

    fn check_sigma(&self) -> Result<(), PactionError> {
        for s in 1..self.len() {
            for t in 1..self.len() {
                let st = self.mul[s][t];
                if st == 0 {
                    continue;
                }
                let (a, b) = (self.sigma[s].unwrap(), self.sigma[t].unwrap());
                if self.group.m(a, b) != self.sigma[st] {
                    return Err(PactionError::Semigroup(format!(
                        "sigma not multiplicative at ({}, {})",
                        self.names[s], self.names[t]
                    )));
                }
            }
            if self.sigma[s] == Some(self.group.identity) && !self.is_idempotent(s) {
                return Err(PactionError::NotIdempotentPure(self.names[s].clone()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn inv(&self, s: usize) -> usize {
        self.inv[s]
    }

    pub fn is_idempotent(&self, s: usize) -> bool {
        self.mul[s][s] == s
    }

    pub fn idempotents(&self) -> Vec<usize> {
        (0..self.len()).filter(|&s| self.is_idempotent(s)).collect()
    }

    pub fn dom_idem(&self, s: usize) -> usize {
        self.mul[self.inv[s]][s]
    }

    pub fn range_idem(&self, s: usize) -> usize {
        self.mul[s][self.inv[s]]
    }

    /// Closure of partial bijections on finitely many points under composition and inverses.
    ///
    /// Each generator carries its group value; the empty map is the zero.
    pub fn from_partial_bijections(
        n_points: usize,
        gens: &[(String, Vec<Option<usize>>, usize)],
        group: GroupTable,
    ) -> Result<Self, PactionError> {
        type Map = Vec<Option<usize>>;
        let invert = |m: &Map| -> Map {
            let mut r = vec![None; n_points];
            for (x, y) in m.iter().enumerate() {
                if let Some(y) = y {
                    r[*y] = Some(x);
                }
            }
            r
        };
        let compose = |s: &Map, t: &Map| -> Map { t.iter().map(|y| y.and_then(|y| s[y])).collect() };
        let mut letters: Vec<(String, Map, usize)> = Vec::new();
        for (name, m, g) in gens {
            if m.len() != n_points || m.iter().flatten().any(|&y| y >= n_points) {
                return Err(PactionError::Semigroup(format!("generator {name} is not a map on the points")));
            }
            let mut img: Vec<usize> = m.iter().flatten().copied().collect();
            img.sort_unstable();
            if img.windows(2).any(|w| w[0] == w[1]) {
                return Err(PactionError::Semigroup(format!("generator {name} is not injective")));
            }
            letters.push((name.clone(), m.clone(), *g));
            let mi = invert(m);
            if mi != *m {
                letters.push((format!("{name}*"), mi, group.inv[*g]));
            }
        }
        let zero: Map = vec![None; n_points];
        let mut maps: Vec<Map> = vec![zero.clone()];
        let mut names = vec!["0".to_string()];
        let mut sigma: Vec<Option<usize>> = vec![None];
        let mut index: HashMap<Map, usize> = HashMap::new();
        index.insert(zero, 0);
        let mut queue = Vec::new();
        for (name, m, g) in &letters {
            if m.iter().all(|x| x.is_none()) {
                continue;
            }
            match index.get(m) {
                Some(&i) => {
                    if sigma[i] != Some(*g) {
                        return Err(PactionError::Semigroup(format!("sigma not well defined at {name}")));
                    }
                }
                None => {
                    index.insert(m.clone(), maps.len());
                    queue.push(maps.len());
                    maps.push(m.clone());
                    names.push(name.clone());
                    sigma.push(Some(*g));
                }
            }
        }
        let mut qi = 0;
        while qi < queue.len() {
            let i = queue[qi];
            qi += 1;
            for (lname, lm, lg) in &letters {
                let m = compose(lm, &maps[i]);
                if m.iter().all(|x| x.is_none()) {
                    continue;
                }
                let g = group
                    .m(*lg, sigma[i].unwrap())
                    .ok_or_else(|| PactionError::WindowExit(format!("{lname}.{}", names[i])))?;
                match index.get(&m) {
                    Some(&j) => {
                        if sigma[j] != Some(g) {
                            return Err(PactionError::Semigroup(format!(
                                "sigma not well defined: {lname}.{} vs {}",
                                names[i], names[j]
                            )));
                        }
                    }
                    None => {
                        index.insert(m.clone(), maps.len());
                        queue.push(maps.len());
                        maps.push(m);
                        names.push(format!("{lname}.{}", names[i]));
                        sigma.push(Some(g));
                    }
                }
            }
            if maps.len() > 20_000 {
                return Err(PactionError::Semigroup("closure exceeds 20000 elements".into()));
            }
        }
        let n = maps.len();
        let mut mul = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                let m = compose(&maps[a], &maps[b]);
                mul[a][b] = *index
                    .get(&m)
                    .ok_or_else(|| PactionError::Semigroup("closure is not closed".into()))?;
            }
        }
        FiniteInverseSemigroup::new(names, mul, sigma, group)
    }
}

/// The action of G on E from an inverse semigroup with idempotent pure sigma.
///
/// theta_g(e) = s e s^-1 for any s with sigma(s) = g and e <= s^-1 s.
pub fn star(s: &FiniteInverseSemigroup) -> Result<(PartialAction, Vec<usize>), PactionError> {
    s.check_sigma()?;
    let idem = s.idempotents();
    let pos: HashMap<usize, usize> = idem.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let names = idem.iter().map(|&e| s.names[e].clone()).collect();
    let meet = idem.iter().map(|&a| idem.iter().map(|&b| pos[&s.mul[a][b]]).collect()).collect();
    let e = Semilattice::from_meet(names, meet)?;
    let mut act = PartialAction::new(s.group.clone(), e);
    for t in 1..s.len() {
        let g = s.sigma[t].unwrap();
        let d = s.dom_idem(t);
        for (i, &x) in idem.iter().enumerate().skip(1) {
            if s.mul[x][d] != x {
                continue;
            }
            let y = pos[&s.mul[s.mul[t][x]][s.inv(t)]];
            match act.theta[g][i] {
                Th::Val(prev) if prev != y => {
                    return Err(PactionError::NotIdempotentPure(format!("theta not well defined at {}", s.names[t])));
                }
                _ => act.theta[g][i] = Th::Val(y),
            }
        }
    }
    Ok((act, idem))
}

/// The inverse semigroup of pairs (g, V), V in the basis and in E_{g^-1}.
///
/// (h, W)(g, V) = (hg, theta_{g^-1}(W theta_g(V))), or zero when the meet is zero.
pub fn starstar(act: &PartialAction, basis: &[usize]) -> Result<(FiniteInverseSemigroup, Vec<(usize, usize)>), PactionError> {
    let g = &act.group;
    let e = &act.e;
    let in_basis = |x: usize| basis.contains(&x);
    for a in 0..g.len() {
        let mut img: Vec<usize> = act
            .domain(a)
            .into_iter()
            .filter(|&v| in_basis(v))
            .map(|v| act.theta[a][v].val().unwrap())
            .collect();
        img.sort_unstable();
        let mut target: Vec<usize> = act.range(a).into_iter().filter(|&v| in_basis(v)).collect();
        target.sort_unstable();
        if img != target {
            let v = act.domain(a).into_iter().find(|&v| in_basis(v) != in_basis(act.theta[a][v].val().unwrap()));
            return Err(PactionError::NotInvariantBasis {
                g: g.names[a].clone(),
                v: v.map_or("?".into(), |v| e.names[v].clone()),
            });
        }
    }
    let mut pairs: Vec<(usize, usize)> = vec![(usize::MAX, 0)];
    for a in 0..g.len() {
        for &v in basis {
            if act.in_dom(a, v) {
                pairs.push((a, v));
            }
        }
    }
    let index: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let n = pairs.len();
    let mut mul = vec![vec![0; n]; n];
    for i in 1..n {
        for j in 1..n {
            let ((h, w), (gg, v)) = (pairs[i], pairs[j]);
            let tv = act.theta[gg][v].val().unwrap();
            let m = e.meet[w][tv];
            if m == 0 {
                continue;
            }
            let u = act.theta[g.inv[gg]][m]
                .val()
                .ok_or_else(|| PactionError::Action(format!("theta_{}^-1 undefined at {}", g.names[gg], e.names[m])))?;
            let hg = g.m(h, gg).ok_or_else(|| PactionError::WindowExit(format!("{} {}", g.names[h], g.names[gg])))?;
            mul[i][j] = *index.get(&(hg, u)).ok_or_else(|| PactionError::NotInvariantBasis {
                g: g.names[hg].clone(),
                v: e.names[u].clone(),
            })?;
        }
    }
    let names = pairs
        .iter()
        .map(|&(a, v)| if a == usize::MAX { "0".into() } else { format!("({},{})", g.names[a], e.names[v]) })
        .collect();
    let sigma = pairs.iter().map(|&(a, _)| if a == usize::MAX { None } else { Some(a) }).collect();
    let s = FiniteInverseSemigroup::new(names, mul, sigma, g.clone())?;
    Ok((s, pairs))
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTrip {
    pub verdict: String,
    pub size: usize,
    pub provenance: Provenance,
    pub checks: Vec<Check>,
}

/// S against the pairs built from its own action, via s -> (sigma(s), s^-1 s).
pub fn roundtrip_semigroup(s: &FiniteInverseSemigroup) -> Result<RoundTrip, PactionError> {
    let (act, idem) = star(s)?;
    let basis: Vec<usize> = act.e.nonzero().collect();
    let (st, pairs) = starstar(&act, &basis)?;
    let pos: HashMap<usize, usize> = idem.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let pidx: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let rho: Vec<Option<usize>> = (0..s.len())
        .map(|x| if x == 0 { Some(0) } else { pidx.get(&(s.sigma[x].unwrap(), pos[&s.dom_idem(x)])).copied() })
        .collect();
    let mut checks = Vec::new();
    let total = rho.iter().all(|r| r.is_some());
    let mut img: Vec<usize> = rho.iter().flatten().copied().collect();
    img.sort_unstable();
    img.dedup();
    let bijective = total && img.len() == s.len() && st.len() == s.len();
    checks.push(Check::new("rho_bijective", bijective, Provenance::VerifiedExact));
    let mut hom_fail = None;
    let mut mult_fail = None;
    if total {
        for a in 0..s.len() {
            for b in 0..s.len() {
                if rho[s.mul[a][b]] != Some(st.mul[rho[a].unwrap()][rho[b].unwrap()]) {
                    hom_fail.get_or_insert(format!("({}, {})", s.names[a], s.names[b]));
                }
                if a == 0 || b == 0 {
                    continue;
                }
                // sigma(t)^-1.(supp(s^-1 s) n sigma(t).supp(t^-1 t)) = supp((st)^-1 st)
                let gt = s.sigma[b].unwrap();
                let da = pos[&s.dom_idem(a)];
                let db = pos[&s.dom_idem(b)];
                let moved = act.theta[gt][db].val().unwrap();
                let m = act.e.meet[da][moved];
                let lhs = if m == 0 { 0 } else { act.theta[act.group.inv[gt]][m].val().unwrap_or(usize::MAX) };
                let ab = s.mul[a][b];
                let rhs = if ab == 0 { 0 } else { pos[&s.dom_idem(ab)] };
                if lhs != rhs {
                    mult_fail.get_or_insert(format!("({}, {})", s.names[a], s.names[b]));
                }
            }
        }
    }
    checks.push(check("rho_homomorphism", &hom_fail, Provenance::VerifiedExact));
    checks.push(check("rho_multiplicativity_identity", &mult_fail, Provenance::VerifiedExact));
    let sig_ok = total && (1..s.len()).all(|x| st.sigma[rho[x].unwrap()] == s.sigma[x]);
    checks.push(Check::new("sigma_compatible", sig_ok, Provenance::VerifiedExact));
    let ok = checks.iter().all(|c| c.passed);
    Ok(RoundTrip { verdict: if ok { "isomorphic".into() } else { "fails".into() }, size: s.len(), provenance: Provenance::VerifiedExact, checks })
}

/// The action against the one recovered from its pairs semigroup, via V -> (1, V).
pub fn roundtrip_action(act: &PartialAction) -> Result<RoundTrip, PactionError> {
    let basis: Vec<usize> = act.e.nonzero().collect();
    let (st, pairs) = starstar(act, &basis)?;
    let (back, idem) = star(&st)?;
    let id = act.group.identity;
    let mut checks = Vec::new();
    let corr: Vec<Option<usize>> = (0..act.e.len())
        .map(|v| {
            if v == 0 {
                return Some(0);
            }
            let p = pairs.iter().position(|&(a, w)| a == id && w == v)?;
            idem.iter().position(|&x| x == p)
        })
        .collect();
    let total = corr.iter().all(|c| c.is_some()) && back.e.len() == act.e.len();
    checks.push(Check::new("basis_correspondence_bijective", total, Provenance::VerifiedExact));
    let mut meet_fail = None;
    let mut theta_fail = None;
    if total {
        let c = |v: usize| corr[v].unwrap();
        for x in 0..act.e.len() {
            for y in 0..act.e.len() {
                if c(act.e.meet[x][y]) != back.e.meet[c(x)][c(y)] {
                    meet_fail.get_or_insert(format!("{} {}", act.e.names[x], act.e.names[y]));
                }
            }
        }
        for a in 0..act.group.len() {
            for x in act.e.nonzero() {
                let lhs = act.theta[a][x].val().map(c);
                let rhs = back.theta[a][c(x)].val();
                if lhs != rhs {
                    theta_fail.get_or_insert(format!("theta_{} at {}", act.group.names[a], act.e.names[x]));
                }
            }
        }
    }
    checks.push(check("meets_preserved", &meet_fail, Provenance::VerifiedExact));
    checks.push(check("actions_conjugate", &theta_fail, Provenance::VerifiedExact));
    let ok = checks.iter().all(|c| c.passed);
    Ok(RoundTrip { verdict: if ok { "isomorphic".into() } else { "fails".into() }, size: st.len(), provenance: Provenance::VerifiedExact, checks })
}

/// The action of the group window of a hull on its idempotent ideals.
///
/// Ideals produced outside the generated hull, moves whose domain cannot be
/// decided on the ball, and moves whose on-ball identifications contradict the
/// inverse or composition laws are recorded as `Th::Out`.
pub fn from_hull(space: &HullSpace, hull: &HullSet) -> Result<(PartialAction, Provenance), PactionError> {
    let mut ideals = hull.ideals(space);
    let mut prov = if space.exact() { Provenance::VerifiedExact } else { space.bound() };
    // an exact match wins over one that only agrees on the ball
    let find = |ideals: &[HullElement], x: &HullElement| -> Option<(usize, IdealEq)> {
        let mut loose = None;
        for (i, y) in ideals.iter().enumerate() {
            match space.ideal_equal(x, y) {
                IdealEq::Distinct(_) => {}
                IdealEq::Equal => return Some((i, IdealEq::Equal)),
                eq => {
                    loose.get_or_insert((i, eq));
                }
            }
        }
        loose
    };
    // close under intersections
    let mut i = 0;
    while i < ideals.len() {
        for j in 0..=i {
            let m = space.compose(&ideals[i], &ideals[j]);
            if m.is_zero() {
                continue;
            }
            if find(&ideals, &m).is_none() {
                ideals.push(m);
            }
        }
        i += 1;
        if ideals.len() > 2_000 {
            return Err(PactionError::Action("ideal closure exceeds 2000 elements".into()));
        }
    }
    let mut e_names = vec!["0".to_string()];
    e_names.extend(ideals.iter().map(|d| space.describe_ideal(d)));
    let n = e_names.len();
    let mut meet = vec![vec![0; n]; n];
    for a in 0..ideals.len() {
        for b in 0..ideals.len() {
            let m = space.compose(&ideals[a], &ideals[b]);
            if m.is_zero() {
                continue;
            }
            let (k, eq) = find(&ideals, &m).expect("closed under meets");
            if eq == IdealEq::EqualToRadius {
                prov = prov.and(space.bound());
            }
            meet[a + 1][b + 1] = k + 1;
        }
    }
    let e = Semilattice::from_meet(e_names, meet)?;

    let mut window: Vec<GroupElem> = Vec::new();
    for (_, s) in hull.nonzero() {
        if !window.contains(&s.sigma) {
            window.push(s.sigma.clone());
        }
    }
    let pos = |g: &GroupElem| window.iter().position(|h| h == g);
    let names = window.iter().map(|g| space.fmt_elem(g)).collect();
    let mul = window.iter().map(|a| window.iter().map(|b| pos(&space.model.mul(a, b))).collect()).collect();
    let inv = window
        .iter()
        .map(|g| pos(&space.model.inv(g)).ok_or_else(|| PactionError::Group("window not closed under inverses".into())))
        .collect::<Result<Vec<_>, _>>()?;
    let identity = pos(&space.model.identity()).ok_or_else(|| PactionError::Group("identity missing".into()))?;
    let group = GroupTable { names, mul, inv, identity, windowed: true };

    let mut act = PartialAction::new(group, e);
    for g in 0..window.len() {
        for x in 1..n {
            if g == identity {
                continue;
            }
            let d = &ideals[x - 1];
            let mut th = None;
            for (_, s) in hull.nonzero().filter(|(_, s)| s.sigma == window[g]) {
                let ds = space.domain_idempotent(s);
                if !matches!(space.ideal_equal(&space.compose(d, &ds), d), IdealEq::Distinct(_)) {
                    let img = space.compose(&space.compose(s, d), &space.inverse(s));
                    th = Some(match find(&ideals, &img) {
                        Some((k, _)) => Th::Val(k + 1),
                        None => Th::Out,
                    });
                    break;
                }
            }
            let th = th.unwrap_or_else(|| {
                let escapes = d.dom.iter().any(|i| !space.model.member(&space.model.mul(&window[g], &space.ball.points[i])).is_in());
                if escapes { Th::NotInDomain } else { Th::Out }
            });
            act.theta[g][x] = th;
        }
    }
    drop_conflicts(&mut act);
    Ok((act, prov))
}

/// Two distinct ideals can agree on the ball; moves built on such a merge show up as
/// violations of the inverse or composition laws and are made undecided.
fn drop_conflicts(act: &mut PartialAction) {
    let g = act.group.clone();
    loop {
        let mut changed = false;
        for a in 0..g.len() {
            for x in act.e.nonzero() {
                let Th::Val(y) = act.theta[a][x] else { continue };
                if let Th::Val(z) = act.theta[g.inv[a]][y] {
                    if z != x {
                        act.theta[a][x] = Th::Out;
                        act.theta[g.inv[a]][y] = Th::Out;
                        changed = true;
                    }
                }
            }
        }
        for a in 0..g.len() {
            for b in 0..g.len() {
                let Some(ab) = g.m(a, b) else { continue };
                for x in act.e.nonzero() {
                    let Th::Val(y) = act.theta[b][x] else { continue };
                    let Th::Val(z) = act.theta[a][y] else { continue };
                    match act.theta[ab][x] {
                        Th::Val(w) if w == z => {}
                        Th::Out => {}
                        Th::Val(_) => {
                            act.theta[ab][x] = Th::Out;
                            act.theta[a][y] = Th::Out;
                            changed = true;
                        }
                        Th::NotInDomain => {
                            act.theta[a][y] = Th::Out;
                            changed = true;
                        }
                    }
                }
            }
        }
        for a in 0..g.len() {
            let dom = act.domain(a);
            for &x in &dom {
                for &y in &dom {
                    let m = act.e.meet[x][y];
                    let (Th::Val(tx), Th::Val(ty)) = (act.theta[a][x], act.theta[a][y]) else { continue };
                    match act.th(a, m) {
                        Th::Val(v) if v != act.e.meet[tx][ty] => {
                            // a zero meet with overlapping images: the pair itself is suspect
                            let w = if m == 0 { x } else { m };
                            act.theta[a][w] = Th::Out;
                            changed = true;
                        }
                        _ => {}
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// A bundled finite example: the semigroup side when one is independently known, and the action.
pub struct Example {
    pub name: String,
    pub semigroup: Option<FiniteInverseSemigroup>,
    pub action: PartialAction,
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn leq(v: &[(&str, &str)]) -> Vec<(String, String)> {
    v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn set_theta(act: &mut PartialAction, g: &str, pairs: &[(&str, &str)]) {
    let gi = act.group.index(g).expect("group element");
    for (x, y) in pairs {
        let (xi, yi) = (act.e.index(x).expect("element"), act.e.index(y).expect("element"));
        act.theta[gi][xi] = Th::Val(yi);
    }
}

pub const EXAMPLES: &[&str] = &["trivial", "z2swap", "nwindow:3", "z4pair", "s3points", "chain:1", "chain:2", "chain:3", "diamond"];

pub fn example(spec: &str) -> Result<Example, PactionError> {
    let (name, param) = match spec.split_once(':') {
        Some((a, b)) => (a, Some(b.parse::<usize>().map_err(|_| PactionError::Action(format!("bad parameter in {spec}")))?)),
        None => (spec, None),
    };
    let ex = match name {
        "trivial" => {
            let g = GroupTable::trivial();
            let s = FiniteInverseSemigroup::new(names(&["0", "e"]), vec![vec![0, 0], vec![0, 1]], vec![None, Some(0)], g.clone())?;
            let act = PartialAction::new(g, Semilattice::from_leq(&names(&["e"]), &[])?);
            Example { name: spec.into(), semigroup: Some(s), action: act }
        }
        "z2swap" => {
            let g = GroupTable::cyclic(2);
            // points x, y; u = id on both, t: x -> y, t*: y -> x
            let gens = vec![
                ("u".to_string(), vec![Some(0), Some(1)], 0),
                ("t".to_string(), vec![Some(1), None], 1),
            ];
            let s = FiniteInverseSemigroup::from_partial_bijections(2, &gens, g.clone())?;
            let e = Semilattice::from_leq(&names(&["u", "d", "d'"]), &leq(&[("d", "u"), ("d'", "u")]))?;
            let mut act = PartialAction::new(g, e);
            set_theta(&mut act, "1", &[("d", "d'"), ("d'", "d")]);
            Example { name: spec.into(), semigroup: Some(s), action: act }
        }
        "nwindow" => {
            let m = param.unwrap_or(3);
            if m == 0 {
                return Err(PactionError::Action("nwindow needs M >= 1".into()));
            }
            let g = GroupTable::z_window(m as i64);
            let shift: Vec<Option<usize>> = (0..=m).map(|x| (x < m).then_some(x + 1)).collect();
            let gens = vec![
                ("1".to_string(), (0..=m).map(Some).collect(), g.index("0").unwrap()),
                ("s".to_string(), shift, g.index("1").unwrap()),
            ];
            let s = FiniteInverseSemigroup::from_partial_bijections(m + 1, &gens, g.clone())?;
            // intervals [a, b] of {0..m}, shifted by the window
            let mut iv = Vec::new();
            for a in 0..=m {
                for b in a..=m {
                    iv.push((a, b));
                }
            }
            let iname = |(a, b): (usize, usize)| format!("[{a},{b}]");
            let ns: Vec<String> = iv.iter().map(|&p| iname(p)).collect();
            let mut le = Vec::new();
            for &(a, b) in &iv {
                for &(c, d) in &iv {
                    if (a, b) != (c, d) && c <= a && b <= d {
                        le.push((iname((a, b)), iname((c, d))));
                    }
                }
            }
            let e = Semilattice::from_leq(&ns, &le)?;
            let mut act = PartialAction::new(g.clone(), e);
            for k in -(m as i64)..=(m as i64) {
                let gi = g.index(&k.to_string()).unwrap();
                for &(a, b) in &iv {
                    let (na, nb) = (a as i64 + k, b as i64 + k);
                    if na >= 0 && nb <= m as i64 {
                        let x = act.e.index(&iname((a, b))).unwrap();
                        let y = act.e.index(&iname((na as usize, nb as usize))).unwrap();
                        act.theta[gi][x] = Th::Val(y);
                    }
                }
            }
            Example { name: spec.into(), semigroup: Some(s), action: act }
        }
        "z4pair" => {
            let g = GroupTable::cyclic(4);
            let e = Semilattice::from_leq(&names(&["top", "x", "y"]), &leq(&[("x", "top"), ("y", "top")]))?;
            let mut act = PartialAction::new(g, e);
            for (gname, swap) in [("1", true), ("2", false), ("3", true)] {
                let (a, b) = if swap { ("y", "x") } else { ("x", "y") };
                set_theta(&mut act, gname, &[("top", "top"), ("x", a), ("y", b)]);
            }
            Example { name: spec.into(), semigroup: None, action: act }
        }
        "s3points" => {
            let g = GroupTable::symmetric3();
            let e = Semilattice::from_leq(
                &names(&["top", "p1", "p2", "p3"]),
                &leq(&[("p1", "top"), ("p2", "top"), ("p3", "top")]),
            )?;
            let perms: [[usize; 3]; 6] = [[0, 1, 2], [1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]];
            let mut act = PartialAction::new(g.clone(), e);
            for (gi, p) in perms.iter().enumerate() {
                let top = act.e.index("top").unwrap();
                act.theta[gi][top] = Th::Val(top);
                for i in 0..3 {
                    let x = act.e.index(&format!("p{}", i + 1)).unwrap();
                    let y = act.e.index(&format!("p{}", p[i] + 1)).unwrap();
                    act.theta[gi][x] = Th::Val(y);
                }
            }
            Example { name: spec.into(), semigroup: None, action: act }
        }
        "chain" => {
            let n = param.unwrap_or(2);
            if n == 0 {
                return Err(PactionError::Action("chain needs n >= 1".into()));
            }
            let ns: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
            let le: Vec<(String, String)> = (1..n).map(|i| (format!("e{}", i + 1), format!("e{i}"))).collect();
            let act = PartialAction::new(GroupTable::trivial(), Semilattice::from_leq(&ns, &le)?);
            Example { name: spec.into(), semigroup: None, action: act }
        }
        "diamond" => {
            let e = Semilattice::from_leq(
                &names(&["d", "e1", "e2", "e12"]),
                &leq(&[("e1", "d"), ("e2", "d"), ("e12", "e1"), ("e12", "e2")]),
            )?;
            Example { name: spec.into(), semigroup: None, action: PartialAction::new(GroupTable::trivial(), e) }
        }
        _ => return Err(PactionError::Action(format!("unknown example {spec}"))),
    };
    Ok(ex)
}

/// Action file: group, semilattice by order relations, and theta maps by name.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ActionFile {
    pub group: GroupSpec,
    pub semilattice: SemilatticeSpec,
    #[serde(default)]
    pub theta: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    Trivial,
    Cyclic { n: usize },
    Symmetric3,
    ZWindow { radius: i64 },
    Table { names: Vec<String>, mul: Vec<Vec<usize>> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SemilatticeSpec {
    pub elements: Vec<String>,
    #[serde(default)]
    pub leq: Vec<(String, String)>,
}

impl ActionFile {
    pub fn build(&self) -> Result<PartialAction, PactionError> {
        let group = match &self.group {
            GroupSpec::Trivial => GroupTable::trivial(),
            GroupSpec::Cyclic { n } if *n >= 1 => GroupTable::cyclic(*n),
            GroupSpec::Cyclic { .. } => return Err(PactionError::Group("cyclic order must be positive".into())),
            GroupSpec::Symmetric3 => GroupTable::symmetric3(),
            GroupSpec::ZWindow { radius } => GroupTable::z_window(*radius),
            GroupSpec::Table { names, mul } => GroupTable::from_table(names.clone(), mul.clone())?,
        };
        let e = Semilattice::from_leq(&self.semilattice.elements, &self.semilattice.leq)?;
        let mut act = PartialAction::new(group, e);
        for (g, map) in &self.theta {
            let gi = act.group.index(g).ok_or_else(|| PactionError::Action(format!("unknown group element {g}")))?;
            for (x, y) in map {
                let xi = act.e.index(x).filter(|&i| i != 0);
                let yi = act.e.index(y).filter(|&i| i != 0);
                match (xi, yi) {
                    (Some(xi), Some(yi)) => act.theta[gi][xi] = Th::Val(yi),
                    _ => return Err(PactionError::Action(format!("theta_{g}: unknown element in {x} -> {y}"))),
                }
            }
        }
        // the inverse maps are implied
        for a in 0..act.group.len() {
            for x in act.e.nonzero() {
                if let Th::Val(y) = act.theta[a][x] {
                    let ai = act.group.inv[a];
                    match act.theta[ai][y] {
                        Th::NotInDomain => act.theta[ai][y] = Th::Val(x),
                        Th::Val(z) if z != x => {
                            return Err(PactionError::Action(format!(
                                "theta_{} and its inverse disagree",
                                act.group.names[a]
                            )))
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(act)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_round_trips() {
        let ex = example("trivial").unwrap();
        let s = ex.semigroup.unwrap();
        let (act, _) = star(&s).unwrap();
        assert_eq!(act.domain(0), vec![1]);
        assert_eq!(roundtrip_semigroup(&s).unwrap().verdict, "isomorphic");
        assert_eq!(roundtrip_action(&ex.action).unwrap().verdict, "isomorphic");
    }

    #[test]
    fn z2swap_has_five_pairs() {
        let ex = example("z2swap").unwrap();
        let s = ex.semigroup.as_ref().unwrap();
        assert_eq!(s.len(), 6);
        let basis: Vec<usize> = ex.action.e.nonzero().collect();
        let (st, _) = starstar(&ex.action, &basis).unwrap();
        assert_eq!(st.len() - 1, 5);
        let (act, _) = star(s).unwrap();
        let t = act.group.index("1").unwrap();
        assert_eq!(act.domain(t).len(), 2);
        assert!(act.check_axioms().iter().all(|c| c.passed));
        assert_eq!(roundtrip_semigroup(s).unwrap().verdict, "isomorphic");
        assert_eq!(roundtrip_action(&ex.action).unwrap().verdict, "isomorphic");
    }

    #[test]
    fn nwindow_examples() {
        for m in 1..=4 {
            let ex = example(&format!("nwindow:{m}")).unwrap();
            assert!(ex.action.check_axioms().iter().all(|c| c.passed), "m = {m}");
            let s = ex.semigroup.as_ref().unwrap();
            assert_eq!(roundtrip_semigroup(s).unwrap().verdict, "isomorphic");
            assert_eq!(roundtrip_action(&ex.action).unwrap().verdict, "isomorphic");
        }
    }

    #[test]
    fn all_examples_satisfy_axioms() {
        for name in EXAMPLES {
            let ex = example(name).unwrap();
            for c in ex.action.check_axioms() {
                assert!(c.passed, "{name}: {}", c.name);
            }
            assert_eq!(roundtrip_action(&ex.action).unwrap().verdict, "isomorphic", "{name}");
        }
    }

    #[test]
    fn non_idempotent_pure_is_rejected() {
        // a nontrivial permutation with trivial sigma
        let g = GroupTable::trivial();
        let gens = vec![("t".to_string(), vec![Some(1), Some(0)], 0)];
        assert!(matches!(
            FiniteInverseSemigroup::from_partial_bijections(2, &gens, g),
            Err(PactionError::NotIdempotentPure(_))
        ));
    }

    #[test]
    fn non_invariant_basis_is_rejected() {
        let ex = example("z2swap").unwrap();
        let d = ex.action.e.index("d").unwrap();
        let u = ex.action.e.index("u").unwrap();
        assert!(matches!(starstar(&ex.action, &[u, d]), Err(PactionError::NotInvariantBasis { .. })));
    }

    #[test]
    fn action_file_parses() {
        let text = r#"{
            "group": {"kind": "cyclic", "n": 2},
            "semilattice": {"elements": ["u", "d", "d'"], "leq": [["d", "u"], ["d'", "u"]]},
            "theta": {"1": {"d": "d'"}}
        }"#;
        let f: ActionFile = serde_json::from_str(text).unwrap();
        let act = f.build().unwrap();
        assert!(act.check_axioms().iter().all(|c| c.passed));
        assert_eq!(act.domain(1).len(), 2);
    }

    #[test]
    fn nat_hull_action_shifts() {
        use crate::presentation::{preset, PresetSpec};
        let p = preset(&PresetSpec::Nat).unwrap();
        let space = HullSpace::new(p.presentation.alphabet.clone(), p.group.clone(), 6);
        let hull = crate::hull::generate_hull(&space, 3).unwrap();
        let (act, prov) = from_hull(&space, &hull).unwrap();
        assert!(prov.is_exact());
        assert_eq!(act.e.names, vec!["0", "1P", "aP", "a^2P", "a^3P"]);
        let one = act.group.index("a").unwrap();
        let minus = act.group.inv[one];
        assert_eq!(act.theta[one][2], Th::Val(3));
        assert_eq!(act.theta[one][4], Th::Out);
        assert_eq!(act.theta[minus][1], Th::NotInDomain);
        assert_eq!(act.theta[minus][2], Th::Val(1));
        assert!(act.check_axioms().iter().all(|c| c.passed));
    }

    #[test]
    fn longest_chain_lengths() {
        for n in 1..=3 {
            let ex = example(&format!("chain:{n}")).unwrap();
            let all: Vec<usize> = ex.action.e.nonzero().collect();
            assert_eq!(ex.action.e.longest_chain(&all), n);
        }
        let d = example("diamond").unwrap();
        let all: Vec<usize> = d.action.e.nonzero().collect();
        assert_eq!(d.action.e.longest_chain(&all), 3);
    }
}
