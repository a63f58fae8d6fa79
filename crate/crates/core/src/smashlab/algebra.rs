use std::collections::{BTreeMap, HashMap};

use num::{BigRational, Complex, One, Zero};

use super::family::{apply, bullet, quot, Family};
use super::SmashError;
use crate::paction::PartialAction;

/// Gaussian rationals.
pub type Scalar = Complex<BigRational>;

pub fn int(n: i64) -> Scalar {
    Complex::new(BigRational::from_integer(n.into()), BigRational::zero())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Alg {
    /// Units d delta_{zeta^-1 eta} (x) e_{zeta,eta}.
    Smash,
    /// Matrix units e_{(d,zeta),(eta^-1 zeta.d, eta)}.
    Discrete,
}

/// Label (d, zeta, eta) with d in E_{zeta,eta}; shared by both algebras.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Unit {
    pub d: usize,
    pub zeta: usize,
    pub eta: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    /// Matrix units of the K(l^2 E) tensor factors, outermost first.
    pub k: Vec<(usize, usize)>,
    pub unit: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elem {
    pub alg: Alg,
    pub depth: usize,
    pub terms: BTreeMap<Term, Scalar>,
}

impl Elem {
    pub fn zero(alg: Alg, depth: usize) -> Self {
        Elem { alg, depth, terms: BTreeMap::new() }
    }

    pub fn unit(alg: Alg, k: Vec<(usize, usize)>, unit: usize) -> Self {
        let depth = k.len();
        let mut e = Elem::zero(alg, depth);
        e.terms.insert(Term { k, unit }, Scalar::one());
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, t: Term, c: Scalar) {
        debug_assert_eq!(t.k.len(), self.depth);
        let entry = self.terms.entry(t.clone()).or_insert_with(Scalar::zero);
        *entry = &*entry + c;
        if entry.is_zero() {
            self.terms.remove(&t);
        }
    }

    fn check_same(&self, o: &Elem) -> Result<(), SmashError> {
        if self.alg != o.alg || self.depth != o.depth {
            return Err(SmashError::TagMismatch(format!(
                "{:?}/K^{} vs {:?}/K^{}",
                self.alg, self.depth, o.alg, o.depth
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Elem) -> Result<Elem, SmashError> {
        self.check_same(o)?;
        let mut r = self.clone();
        for (t, c) in &o.terms {
            r.add_term(t.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn scale(&self, c: &Scalar) -> Elem {
        let mut r = Elem::zero(self.alg, self.depth);
        for (t, x) in &self.terms {
            r.add_term(t.clone(), x * c);
        }
        r
    }

    pub fn sub(&self, o: &Elem) -> Result<Elem, SmashError> {
        self.add(&o.scale(&int(-1)))
    }
}

/// The finite-dimensional algebras A_i and their discrete versions on one stage-two family.
pub struct Lab<'a> {
    pub act: &'a PartialAction,
    pub family: &'a Family,
    pub units: Vec<Unit>,
    pub index: HashMap<Unit, usize>,
    /// Column label (eta^-1 zeta.d, eta) of each discrete unit.
    pub col: Vec<(usize, usize)>,
    mul_smash: Vec<Vec<Option<usize>>>,
    mul_disc: Vec<Vec<Option<usize>>>,
    star: Vec<usize>,
    /// Units (e, zeta, eta) with e strictly below d.
    pub below: Vec<Vec<usize>>,
    /// Moebius coefficients mu(e, d) over the lower set of d in E_{zeta,eta}.
    pub mobius: Vec<Vec<(usize, i64)>>,
}

impl<'a> Lab<'a> {
    pub fn new(act: &'a PartialAction, family: &'a Family) -> Result<Self, SmashError> {
        let mut units = Vec::new();
        for (&(zeta, eta), s) in &family.sets {
            for &d in s {
                units.push(Unit { d, zeta, eta });
            }
        }
        let index: HashMap<Unit, usize> = units.iter().enumerate().map(|(i, u)| (*u, i)).collect();
        let n = units.len();
        let mut col = Vec::with_capacity(n);
        let mut star = Vec::with_capacity(n);
        for u in &units {
            let h = quot(act, u.eta, u.zeta)?;
            let c = apply(act, h, u.d)?;
            col.push((c, u.eta));
            let s = Unit { d: c, zeta: u.eta, eta: u.zeta };
            star.push(*index.get(&s).ok_or_else(|| SmashError::NotClosed(format!("star of {}", fmt_unit(act, u))))?);
        }
        let mut mul_smash = vec![vec![None; n]; n];
        let mut mul_disc = vec![vec![None; n]; n];
        for (i, u) in units.iter().enumerate() {
            let alpha = quot(act, u.eta, u.zeta)?;
            for (j, v) in units.iter().enumerate() {
                if u.eta != v.zeta {
                    continue;
                }
                let p = bullet(act, u.d, alpha, v.d)?;
                if p != 0 {
                    let w = Unit { d: p, zeta: u.zeta, eta: v.eta };
                    mul_smash[i][j] = Some(*index.get(&w).ok_or_else(|| {
                        SmashError::NotClosed(format!("product {} {}", fmt_unit(act, u), fmt_unit(act, v)))
                    })?);
                }
                if col[i] == (v.d, v.zeta) {
                    let w = Unit { d: u.d, zeta: u.zeta, eta: v.eta };
                    let k = *index.get(&w).ok_or_else(|| {
                        SmashError::NotClosed(format!("matrix unit product {} {}", fmt_unit(act, u), fmt_unit(act, v)))
                    })?;
                    if col[k] != col[j] {
                        return Err(SmashError::NotClosed(format!("column mismatch in {}", fmt_unit(act, &w))));
                    }
                    mul_disc[i][j] = Some(k);
                }
            }
        }
        let mut below = vec![Vec::new(); n];
        for (i, u) in units.iter().enumerate() {
            for &e in family.get(u.zeta, u.eta) {
                if e != u.d && act.e.leq(e, u.d) {
                    below[i].push(index[&Unit { d: e, zeta: u.zeta, eta: u.eta }]);
                }
            }
        }
        let mut mobius = Vec::with_capacity(n);
        for i in 0..n {
            // mu(x, d) = -sum_{x < y <= d} mu(y, d)
            let mut lower: Vec<usize> = below[i].clone();
            lower.sort_by_key(|&j| std::cmp::Reverse(below[j].len()));
            let mut mu: Vec<(usize, i64)> = vec![(i, 1)];
            for &x in &lower {
                let s: i64 = mu.iter().filter(|(y, _)| below[*y].contains(&x)).map(|(_, m)| m).sum();
                mu.push((x, -s));
            }
            mu.retain(|(_, m)| *m != 0);
            mobius.push(mu);
        }
        Ok(Lab { act, family, units, index, col, mul_smash, mul_disc, star, below, mobius })
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn unit_mul(&self, alg: Alg, i: usize, j: usize) -> Option<usize> {
        match alg {
            Alg::Smash => self.mul_smash[i][j],
            Alg::Discrete => self.mul_disc[i][j],
        }
    }

    pub fn unit_star(&self, i: usize) -> usize {
        self.star[i]
    }

    pub fn row(&self, i: usize) -> (usize, usize) {
        (self.units[i].d, self.units[i].zeta)
    }

    /// Distinct row labels (d, zeta) of the discrete algebra.
    pub fn rows(&self) -> Vec<(usize, usize)> {
        let mut r: Vec<(usize, usize)> = (0..self.len()).map(|i| self.row(i)).collect();
        r.sort_unstable();
        r.dedup();
        r
    }

    pub fn diagonal(&self, row: (usize, usize)) -> Option<usize> {
        self.index.get(&Unit { d: row.0, zeta: row.1, eta: row.1 }).copied()
    }

    fn left_key(&self, alg: Alg, t: &Term) -> (Vec<usize>, (usize, usize)) {
        let ks = t.k.iter().map(|p| p.1).collect();
        let u = match alg {
            Alg::Smash => (usize::MAX, self.units[t.unit].eta),
            Alg::Discrete => self.col[t.unit],
        };
        (ks, u)
    }

    fn right_key(&self, alg: Alg, t: &Term) -> (Vec<usize>, (usize, usize)) {
        let ks = t.k.iter().map(|p| p.0).collect();
        let u = match alg {
            Alg::Smash => (usize::MAX, self.units[t.unit].zeta),
            Alg::Discrete => self.row(t.unit),
        };
        (ks, u)
    }

    pub fn mul(&self, x: &Elem, y: &Elem) -> Result<Elem, SmashError> {
        x.check_same(y)?;
        let mut idx: HashMap<(Vec<usize>, (usize, usize)), Vec<(&Term, &Scalar)>> = HashMap::new();
        for (t, c) in &y.terms {
            idx.entry(self.right_key(y.alg, t)).or_default().push((t, c));
        }
        let mut r = Elem::zero(x.alg, x.depth);
        for (s, a) in &x.terms {
            let Some(cands) = idx.get(&self.left_key(x.alg, s)) else { continue };
            for (t, b) in cands {
                if let Some(u) = self.unit_mul(x.alg, s.unit, t.unit) {
                    let k = s.k.iter().zip(&t.k).map(|(p, q)| (p.0, q.1)).collect();
                    r.add_term(Term { k, unit: u }, a * *b);
                }
            }
        }
        Ok(r)
    }

    pub fn star(&self, x: &Elem) -> Elem {
        let mut r = Elem::zero(x.alg, x.depth);
        for (t, c) in &x.terms {
            let k = t.k.iter().map(|p| (p.1, p.0)).collect();
            r.add_term(Term { k, unit: self.star[t.unit] }, c.conj());
        }
        r
    }

    /// The unit of K(l^2 E)^{(x) depth} (x) discrete algebra, over the nonzero elements of E.
    pub fn one(&self, depth: usize) -> Elem {
        let mut r = Elem::zero(Alg::Discrete, depth);
        let rows = self.rows();
        let es: Vec<usize> = self.act.e.nonzero().collect();
        let mut ks: Vec<Vec<(usize, usize)>> = vec![vec![]];
        for _ in 0..depth {
            ks = ks.into_iter().flat_map(|k| es.iter().map(move |&e| [k.clone(), vec![(e, e)]].concat())).collect();
        }
        for k in ks {
            for &row in &rows {
                if let Some(u) = self.diagonal(row) {
                    r.add_term(Term { k: k.clone(), unit: u }, Scalar::one());
                }
            }
        }
        r
    }

    pub fn fmt_unit(&self, i: usize) -> String {
        fmt_unit(self.act, &self.units[i])
    }

    /// Relabel under gamma in F: (d, zeta, eta) -> (d, gamma zeta, gamma eta).
    pub fn translate(&self, gamma: usize, x: &Elem) -> Result<Elem, SmashError> {
        let mut r = Elem::zero(x.alg, x.depth);
        for (t, c) in &x.terms {
            let u = self.units[t.unit];
            let w = Unit {
                d: u.d,
                zeta: super::family::gm(self.act, gamma, u.zeta)?,
                eta: super::family::gm(self.act, gamma, u.eta)?,
            };
            let j = *self.index.get(&w).ok_or_else(|| SmashError::NotClosed(format!("translate {}", self.fmt_unit(t.unit))))?;
            r.add_term(Term { k: t.k.clone(), unit: j }, c.clone());
        }
        Ok(r)
    }
}

pub fn fmt_unit(act: &PartialAction, u: &Unit) -> String {
    format!("({}, {}, {})", act.e.names[u.d], act.group.names[u.zeta], act.group.names[u.eta])
}
