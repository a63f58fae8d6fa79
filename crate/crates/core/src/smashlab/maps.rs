use num::One;
use serde_json::json;

use super::algebra::{int, Alg, Elem, Lab, Scalar, Term};
use super::SmashError;
use crate::report::{Check, Provenance};

impl Lab<'_> {
    fn k_of(&self, u: usize) -> (usize, usize) {
        (self.units[u].d, self.col[u].0)
    }

    fn expect(&self, x: &Elem, alg: Alg) -> Result<(), SmashError> {
        if x.alg != alg {
            return Err(SmashError::TagMismatch(format!("expected {:?}, got {:?}", alg, x.alg)));
        }
        Ok(())
    }

    /// e_{(d,zeta),(d',eta)} -> e_{d,d'} (x) (d delta (x) e_{zeta,eta}).
    pub fn phi(&self, x: &Elem) -> Result<Elem, SmashError> {
        self.expect(x, Alg::Discrete)?;
        let mut r = Elem::zero(Alg::Smash, x.depth + 1);
        for (t, c) in &x.terms {
            let mut k = t.k.clone();
            k.push(self.k_of(t.unit));
            r.add_term(Term { k, unit: t.unit }, c.clone());
        }
        Ok(r)
    }

    /// Matrix unit -> (d - join of e < d) delta (x) e, expanded by Moebius inversion.
    pub fn psi(&self, x: &Elem) -> Result<Elem, SmashError> {
        self.expect(x, Alg::Discrete)?;
        let mut r = Elem::zero(Alg::Smash, x.depth);
        for (t, c) in &x.terms {
            for &(e, m) in &self.mobius[t.unit] {
                r.add_term(Term { k: t.k.clone(), unit: e }, c * int(m));
            }
        }
        Ok(r)
    }

    /// d delta (x) e -> sum over e <= d of matrix units.
    pub fn psi_inv(&self, x: &Elem) -> Result<Elem, SmashError> {
        self.expect(x, Alg::Smash)?;
        let mut r = Elem::zero(Alg::Discrete, x.depth);
        for (t, c) in &x.terms {
            r.add_term(t.clone(), c.clone());
            for &e in &self.below[t.unit] {
                r.add_term(Term { k: t.k.clone(), unit: e }, c.clone());
            }
        }
        Ok(r)
    }

    /// id (x) I on the last tensor factor.
    pub fn i_map(&self, x: &Elem) -> Result<Elem, SmashError> {
        self.expect(x, Alg::Discrete)?;
        let mut r = Elem::zero(Alg::Discrete, x.depth + 1);
        for (t, c) in &x.terms {
            let mut k = t.k.clone();
            k.push(self.k_of(t.unit));
            r.add_term(Term { k, unit: t.unit }, c.clone());
        }
        Ok(r)
    }

    /// id (x) rho on the last tensor factor.
    pub fn rho(&self, x: &Elem) -> Result<Elem, SmashError> {
        self.expect(x, Alg::Discrete)?;
        let mut r = Elem::zero(Alg::Discrete, x.depth + 1);
        for (t, c) in &x.terms {
            let mut k = t.k.clone();
            k.push(self.k_of(t.unit));
            for &e in &self.below[t.unit] {
                r.add_term(Term { k: k.clone(), unit: e }, c.clone());
            }
        }
        Ok(r)
    }

    pub fn basis(&self, alg: Alg) -> Vec<Elem> {
        (0..self.len()).map(|i| Elem::unit(alg, vec![], i)).collect()
    }

    /// Units of the tensor factor K(l^2 E) (x) discrete algebra picked out by I.
    fn e_ff(&self, f: usize, x: &Elem) -> Elem {
        let mut r = Elem::zero(x.alg, x.depth + 1);
        for (t, c) in &x.terms {
            let mut k = vec![(f, f)];
            k.extend(t.k.iter().copied());
            r.add_term(Term { k, unit: t.unit }, c.clone());
        }
        r
    }

    /// The self-adjoint partial isometry W for a chosen nonzero idempotent f.
    pub fn w_elem(&self, f: usize) -> Elem {
        let mut w = Elem::zero(Alg::Discrete, 1);
        for row in self.rows() {
            let Some(u) = self.diagonal(row) else { continue };
            let d = row.0;
            if d == f {
                w.add_term(Term { k: vec![(f, f)], unit: u }, Scalar::one());
            } else {
                w.add_term(Term { k: vec![(f, d)], unit: u }, Scalar::one());
                w.add_term(Term { k: vec![(d, f)], unit: u }, Scalar::one());
            }
        }
        w
    }
}

fn check(name: &str, fail: Option<String>, prov: Provenance) -> Check {
    let c = Check::new(name, fail.is_none(), prov);
    match fail {
        Some(f) => c.with_detail(json!(f)),
        None => c,
    }
}

/// Phi multiplicative and *-preserving on all units.
pub fn verify_phi(lab: &Lab) -> Result<Vec<Check>, SmashError> {
    let b = lab.basis(Alg::Discrete);
    let mut mul = None;
    let mut star = None;
    for (i, x) in b.iter().enumerate() {
        let px = lab.phi(x)?;
        if lab.phi(&lab.star(x))? != lab.star(&px) {
            star.get_or_insert(lab.fmt_unit(i));
        }
        for (j, y) in b.iter().enumerate() {
            if lab.phi(&lab.mul(x, y)?)? != lab.mul(&px, &lab.phi(y)?)? {
                mul.get_or_insert(format!("{} {}", lab.fmt_unit(i), lab.fmt_unit(j)));
            }
        }
    }
    Ok(vec![
        check("phi_multiplicative", mul, Provenance::VerifiedExact),
        check("phi_star", star, Provenance::VerifiedExact),
    ])
}

/// Psi a *-homomorphism with the stated inverse on both sides.
pub fn verify_psi(lab: &Lab) -> Result<Vec<Check>, SmashError> {
    let bd = lab.basis(Alg::Discrete);
    let bs = lab.basis(Alg::Smash);
    let psis: Vec<Elem> = bd.iter().map(|x| lab.psi(x)).collect::<Result<_, _>>()?;
    let mut mul = None;
    let mut star = None;
    let mut left = None;
    let mut right = None;
    for (i, x) in bd.iter().enumerate() {
        if lab.psi(&lab.star(x))? != lab.star(&psis[i]) {
            star.get_or_insert(lab.fmt_unit(i));
        }
        if lab.psi_inv(&psis[i])? != *x {
            left.get_or_insert(lab.fmt_unit(i));
        }
        if lab.psi(&lab.psi_inv(&bs[i])?)? != bs[i] {
            right.get_or_insert(lab.fmt_unit(i));
        }
        for (j, y) in bd.iter().enumerate() {
            if lab.psi(&lab.mul(x, y)?)? != lab.mul(&psis[i], &psis[j])? {
                mul.get_or_insert(format!("{} {}", lab.fmt_unit(i), lab.fmt_unit(j)));
            }
        }
    }
    Ok(vec![
        check("psi_multiplicative", mul, Provenance::VerifiedExact),
        check("psi_star", star, Provenance::VerifiedExact),
        check("psi_inverse_left", left, Provenance::VerifiedExact),
        check("psi_inverse_right", right, Provenance::VerifiedExact),
    ])
}

/// (id (x) Psi^-1) Phi = I + rho, orthogonality, and multiplicativity of I and rho.
pub fn verify_i_rho(lab: &Lab) -> Result<Vec<Check>, SmashError> {
    let b = lab.basis(Alg::Discrete);
    let is: Vec<Elem> = b.iter().map(|x| lab.i_map(x)).collect::<Result<_, _>>()?;
    let rs: Vec<Elem> = b.iter().map(|x| lab.rho(x)).collect::<Result<_, _>>()?;
    let mut decomp = None;
    let mut orth = None;
    let mut ihom = None;
    let mut rhom = None;
    for (i, x) in b.iter().enumerate() {
        let comp = lab.psi_inv(&lab.phi(x)?)?;
        if comp != is[i].add(&rs[i])? {
            decomp.get_or_insert(lab.fmt_unit(i));
        }
        for (j, y) in b.iter().enumerate() {
            if !lab.mul(&is[i], &rs[j])?.is_zero() || !lab.mul(&rs[j], &is[i])?.is_zero() {
                orth.get_or_insert(format!("{} {}", lab.fmt_unit(i), lab.fmt_unit(j)));
            }
            let xy = lab.mul(x, y)?;
            if lab.i_map(&xy)? != lab.mul(&is[i], &is[j])? {
                ihom.get_or_insert(format!("{} {}", lab.fmt_unit(i), lab.fmt_unit(j)));
            }
            if lab.rho(&xy)? != lab.mul(&rs[i], &rs[j])? {
                rhom.get_or_insert(format!("{} {}", lab.fmt_unit(i), lab.fmt_unit(j)));
            }
        }
    }
    Ok(vec![
        check("decomposition_i_plus_rho", decomp, Provenance::VerifiedExact),
        check("i_rho_orthogonal", orth, Provenance::VerifiedExact),
        check("i_multiplicative", ihom, Provenance::VerifiedExact),
        check("rho_multiplicative", rhom, Provenance::VerifiedExact),
    ])
}

/// Smallest power of iterated rho vanishing on every unit.
pub fn minimal_nilpotency(lab: &Lab, max_power: usize) -> Result<Option<usize>, SmashError> {
    let mut cur: Vec<Elem> = lab.basis(Alg::Discrete);
    for p in 1..=max_power {
        cur = cur.iter().map(|x| lab.rho(x)).collect::<Result<_, _>>()?;
        if cur.iter().all(|x| x.is_zero()) {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

pub fn verify_nilpotent(lab: &Lab, chain_length: usize) -> Result<(Check, Option<usize>), SmashError> {
    let p = minimal_nilpotency(lab, chain_length.max(1) + 1)?;
    let ok = matches!(p, Some(m) if m <= chain_length.max(1));
    let c = Check::new("rho_nilpotent", ok, Provenance::VerifiedExact)
        .with_detail(json!({ "minimal_power": p, "chain_length": chain_length }));
    Ok((c, p))
}

/// U = W + (1 - W^2): self-adjoint, unitary, and U I(x) U = e_{f,f} (x) x on every unit.
pub fn verify_conjugation(lab: &Lab, f: usize) -> Result<Vec<Check>, SmashError> {
    let w = lab.w_elem(f);
    let one = lab.one(1);
    let w2 = lab.mul(&w, &w)?;
    let u = w.add(&one.sub(&w2)?)?;
    let pi = lab.mul(&w2, &w)? == w && lab.star(&w) == w;
    let sa = lab.star(&u) == u;
    let unitary = lab.mul(&u, &u)? == one;
    let mut conj = None;
    for (i, x) in lab.basis(Alg::Discrete).iter().enumerate() {
        let ix = lab.i_map(x)?;
        let lhs = lab.mul(&lab.mul(&u, &ix)?, &u)?;
        if lhs != lab.e_ff(f, x) {
            conj.get_or_insert(lab.fmt_unit(i));
        }
    }
    let fname = lab.act.e.names[f].clone();
    Ok(vec![
        Check::new("w_self_adjoint_partial_isometry", pi, Provenance::VerifiedExact).with_detail(json!({ "f": fname })),
        Check::new("u_self_adjoint", sa, Provenance::VerifiedExact),
        Check::new("u_unitary", unitary, Provenance::VerifiedExact),
        check("conjugation_u_i_u", conj, Provenance::VerifiedExact),
    ])
}

/// Elements of the graded space sum_m K^{(x) m} (x) discrete algebra, by degree above a base depth.
type Graded = Vec<Elem>;

fn graded_add(a: &Graded, b: &Graded) -> Result<Graded, SmashError> {
    let mut out = a.clone();
    for (i, x) in b.iter().enumerate() {
        if i < out.len() {
            out[i] = out[i].add(x)?;
        } else {
            out.push(x.clone());
        }
    }
    Ok(out)
}

fn graded_rho(lab: &Lab, a: &Graded) -> Result<Graded, SmashError> {
    let mut out = vec![Elem::zero(Alg::Discrete, a[0].depth)];
    for x in a {
        out.push(lab.rho(x)?);
    }
    Ok(out)
}

fn graded_is(a: &Graded, x: &Elem) -> bool {
    a[0] == *x && a[1..].iter().all(|e| e.is_zero())
}

/// sum_{l < L} (-1)^l rho^l inverts id + rho as a linear map on the graded tensor spaces,
/// checked on every unit and every nonzero image of a unit under rho.
pub fn verify_neumann(lab: &Lab, terms: usize) -> Result<Check, SmashError> {
    let series = |v: &Graded| -> Result<Graded, SmashError> {
        let mut acc = v.clone();
        let mut pw = v.clone();
        for l in 1..terms {
            pw = graded_rho(lab, &pw)?;
            let sign = if l % 2 == 1 { int(-1) } else { int(1) };
            let signed: Graded = pw.iter().map(|e| e.scale(&sign)).collect();
            acc = graded_add(&acc, &signed)?;
        }
        Ok(acc)
    };
    let one_plus = |v: &Graded| -> Result<Graded, SmashError> { graded_add(v, &graded_rho(lab, v)?) };
    let mut inputs = lab.basis(Alg::Discrete);
    let images: Vec<Elem> = inputs.iter().map(|x| lab.rho(x)).collect::<Result<_, _>>()?;
    inputs.extend(images.into_iter().filter(|x| !x.is_zero()));
    let mut fail = None;
    for x in &inputs {
        let v = vec![x.clone()];
        if !graded_is(&one_plus(&series(&v)?)?, x) || !graded_is(&series(&one_plus(&v)?)?, x) {
            fail.get_or_insert(format!("depth {} input", x.depth));
        }
    }
    Ok(check("neumann_inverse", fail, Provenance::VerifiedExact).with_detail(json!({ "terms": terms, "inputs": inputs.len() })))
}

/// Phi, Psi, I and rho commute with the F-relabelling.
pub fn verify_equivariance(lab: &Lab, subgroup: &[usize]) -> Result<Check, SmashError> {
    let mut fail = None;
    for &g in subgroup {
        for (i, x) in lab.basis(Alg::Discrete).iter().enumerate() {
            let gx = lab.translate(g, x)?;
            let pairs = [
                (lab.phi(&gx)?, lab.translate(g, &lab.phi(x)?)?),
                (lab.psi(&gx)?, lab.translate(g, &lab.psi(x)?)?),
                (lab.i_map(&gx)?, lab.translate(g, &lab.i_map(x)?)?),
                (lab.rho(&gx)?, lab.translate(g, &lab.rho(x)?)?),
            ];
            if pairs.iter().any(|(a, b)| a != b) {
                fail.get_or_insert(format!("{} at {}", lab.act.group.names[g], lab.fmt_unit(i)));
            }
        }
    }
    Ok(check("f_equivariance", fail, Provenance::VerifiedExact).with_detail(json!({ "subgroup_order": subgroup.len() })))
}
