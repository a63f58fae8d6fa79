//! Symbolic K-theory formulas with a resolution table and an assumption ledger.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::hull::{
    generate_hull, independence_check, right_lcm_check, toeplitz_check, HullError, HullSet, HullSpace,
    IndependenceVerdict, RlcmVerdict, ToeplitzBounds, ToeplitzVerdict,
};
use crate::orbits::{compute_orbits, stabilizer, OrbitError, StabShape};
use crate::paction::{from_hull, PactionError};
use crate::presentation::{preset, ArtinPair, PresentationError, PresetSpec};
use crate::report::{Check, Provenance};

#[derive(Debug, Error)]
pub enum KtError {
    #[error("the semigroup route needs independence, found {found}; use the {offer} route")]
    IndependenceUnknown { found: String, offer: String },
    #[error("prerequisite failed: {0}")]
    PrerequisiteFailed(String),
    #[error("table error: {0}")]
    Table(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Hull(#[from] HullError),
    #[error(transparent)]
    Paction(#[from] PactionError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

/// A finitely generated abelian group Z^rank + sum Z/t_i with t_1 | t_2 | ...
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FgAbelianGroup {
    pub rank: usize,
    pub torsion: Vec<u64>,
}

impl FgAbelianGroup {
    pub fn zero() -> Self {
        FgAbelianGroup { rank: 0, torsion: vec![] }
    }

    pub fn free(rank: usize) -> Self {
        FgAbelianGroup { rank, torsion: vec![] }
    }

    /// Z/n; n = 0 gives Z.
    pub fn cyclic(n: u64) -> Self {
        FgAbelianGroup::from_relations(1, &[vec![n as i64]])
    }

    /// Cokernel of the relation rows acting on Z^gens.
    pub fn from_relations(gens: usize, rows: &[Vec<i64>]) -> Self {
        let d = invariant_factors(rows, gens);
        let nonzero = d.iter().filter(|&&x| x != 0).count();
        FgAbelianGroup { rank: gens - nonzero, torsion: d.into_iter().filter(|&x| x > 1).map(|x| x as u64).collect() }
    }

    pub fn direct_sum(&self, o: &FgAbelianGroup) -> FgAbelianGroup {
        let mut rows = Vec::new();
        let n = self.torsion.len() + o.torsion.len();
        for (i, &t) in self.torsion.iter().chain(&o.torsion).enumerate() {
            let mut r = vec![0; n];
            r[i] = t as i64;
            rows.push(r);
        }
        let mut t = FgAbelianGroup::from_relations(n, &rows);
        t.rank = self.rank + o.rank;
        t
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for FgAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Diagonal of the Smith normal form, padded with zeros to min(rows, cols) entries.
pub fn invariant_factors(rows: &[Vec<i64>], cols: usize) -> Vec<i128> {
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let m = a.len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < m.min(cols) {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut piv = None;
        for i in t..m {
            for j in t..cols {
                if a[i][j] != 0 && piv.is_none_or(|(pi, pj): (usize, usize)| a[i][j].abs() < a[pi][pj].abs()) {
                    piv = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = piv else { break };
        a.swap(t, pi);
        for r in a.iter_mut() {
            r.swap(t, pj);
        }
        let mut done = true;
        for i in t + 1..m {
            let q = a[i][t] / a[t][t];
            for j in t..cols {
                a[i][j] -= q * a[t][j];
            }
            done &= a[i][t] == 0;
        }
        for j in t + 1..cols {
            let q = a[t][j] / a[t][t];
            for r in a.iter_mut().skip(t) {
                r[j] -= q * r[t];
            }
            done &= a[t][j] == 0;
        }
        if !done {
            continue;
        }
        // the pivot must divide the rest of the block
        if let Some((i, _)) = (t + 1..m).flat_map(|i| (t + 1..cols).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % a[t][t] != 0) {
            for j in t..cols {
                a[t][j] += a[i][j];
            }
            continue;
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    while diag.len() < m.min(cols) {
        diag.push(0);
    }
    diag
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroupDescriptor {
    Trivial,
    FreeAbelian { n: usize },
    FiniteCyclic { n: usize },
    Free { n: usize },
    Opaque { name: String, generators: Vec<String> },
}

impl GroupDescriptor {
    fn key(&self) -> (&'static str, usize) {
        match self {
            GroupDescriptor::Trivial => ("trivial", 0),
            GroupDescriptor::FreeAbelian { n } => ("free-abelian", *n),
            GroupDescriptor::FiniteCyclic { n } => ("finite-cyclic", *n),
            GroupDescriptor::Free { n } => ("free", *n),
            GroupDescriptor::Opaque { .. } => ("opaque", 0),
        }
    }

    pub fn validate(&self) -> Result<(), KtError> {
        match self {
            GroupDescriptor::FreeAbelian { n } | GroupDescriptor::FiniteCyclic { n } | GroupDescriptor::Free { n }
                if *n == 0 =>
            {
                Err(KtError::Input(format!("{} needs n >= 1", self.key().0)))
            }
            _ => Ok(()),
        }
    }

    pub fn from_shape(s: &StabShape, generators: Vec<String>) -> Self {
        match s {
            StabShape::Trivial => GroupDescriptor::Trivial,
            StabShape::FiniteCyclic { n } => GroupDescriptor::FiniteCyclic { n: *n },
            StabShape::Finite { order } => GroupDescriptor::Opaque { name: format!("finite group of order {order}"), generators },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableEntry {
    pub kind: String,
    pub k0_rank: String,
    pub k1_rank: String,
    #[serde(default)]
    pub unit: Option<String>,
    pub citation: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KTable {
    pub version: u32,
    pub entries: Vec<TableEntry>,
}

const BUNDLED_TABLE: &str = include_str!("../data/ktable.json");

fn eval_rank(expr: &str, n: usize) -> Result<usize, KtError> {
    let e = expr.replace(' ', "");
    match e.as_str() {
        "n" => Ok(n),
        "2^(n-1)" => Ok(1usize << n.saturating_sub(1)),
        _ => e.parse().map_err(|_| KtError::Table(format!("unsupported rank formula {expr}"))),
    }
}

impl KTable {
    pub fn bundled() -> Self {
        serde_json::from_str(BUNDLED_TABLE).expect("bundled table parses")
    }

    pub fn parse(s: &str) -> Result<Self, KtError> {
        let t: KTable = serde_json::from_str(s).map_err(|e| KtError::Table(e.to_string()))?;
        for e in &t.entries {
            eval_rank(&e.k0_rank, 1)?;
            eval_rank(&e.k1_rank, 1)?;
        }
        Ok(t)
    }

    /// Entries of `other` override same-kind entries here.
    pub fn extend(&mut self, other: KTable) {
        for e in other.entries {
            self.entries.retain(|x| x.kind != e.kind);
            self.entries.push(e);
        }
    }

    pub fn lookup(&self, g: &GroupDescriptor) -> Option<(FgAbelianGroup, FgAbelianGroup, &TableEntry)> {
        let (kind, n) = g.key();
        let e = self.entries.iter().find(|e| e.kind == kind)?;
        let k0 = eval_rank(&e.k0_rank, n).ok()?;
        let k1 = eval_rank(&e.k1_rank, n).ok()?;
        Some((FgAbelianGroup::free(k0), FgAbelianGroup::free(k1), e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Sum over S\E^x of K_*(C*_l(S_d)) for an idempotent pure partial homomorphism.
    InverseSemigroup,
    /// Sum over G\V^x of K_*(C*_l(G_V)) for an invariant regular basis.
    PartialCrossedProduct,
    /// Sum over P\J_P^x of K_*(C*_l(P_X)); needs independence.
    SemigroupIndependent,
    /// The same sum for the left inverse hull, with no independence needed.
    LeftInverseHull,
    /// K_*(C*_l(P)) = K_*(C*_l(P*)) for right LCM monoids.
    RightLcm,
    /// Out of scope; only the shape of the formula is stated.
    Stub,
}

impl Route {
    fn formula(self) -> &'static str {
        match self {
            Route::InverseSemigroup => "K_*(C*_l(S)) = sum over [d] in S\\E^x of K_*(C*_l(S_d))",
            Route::PartialCrossedProduct => "K_*(C_0(X) x_r G) = sum over [V] in G\\V^x of K_*(C*_l(G_V))",
            Route::SemigroupIndependent => "K_*(C*_l(P)) = sum over [X] in P\\J_P^x of K_*(C*_l(P_X))",
            Route::LeftInverseHull => "K_*(C*_l(I_l(P))) = sum over [X] in I_l(P)\\J_P^x of K_*(C*_l(I_l(P)_X))",
            Route::RightLcm => "K_*(C*_l(P)) = K_*(C*_l(P*))",
            Route::Stub => "not evaluated",
        }
    }

    fn name(self) -> &'static str {
        match self {
            Route::InverseSemigroup => "inverse-semigroup",
            Route::PartialCrossedProduct => "partial-crossed-product",
            Route::SemigroupIndependent => "semigroup-independent",
            Route::LeftInverseHull => "left-inverse-hull",
            Route::RightLcm => "right-lcm",
            Route::Stub => "stub",
        }
    }
}

/// Which Baum-Connes statement the user is willing to assume.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BcVariant {
    /// Baum-Connes for the coefficient algebras; gives a K-theory isomorphism.
    #[default]
    Coefficients,
    /// Strong Baum-Connes; gives a KK-equivalence.
    Strong,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum AssumptionStatus {
    Assumed,
    Cited { source: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assumption {
    pub hypothesis: String,
    #[serde(flatten)]
    pub status: AssumptionStatus,
    pub needed_for: String,
}

impl Assumption {
    fn assumed(h: impl Into<String>, f: impl Into<String>) -> Self {
        Assumption { hypothesis: h.into(), status: AssumptionStatus::Assumed, needed_for: f.into() }
    }

    fn cited(h: impl Into<String>, src: impl Into<String>, f: impl Into<String>) -> Self {
        Assumption { hypothesis: h.into(), status: AssumptionStatus::Cited { source: src.into() }, needed_for: f.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summand {
    pub representative: String,
    pub group: GroupDescriptor,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Resolved>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolved {
    #[serde(rename = "K0")]
    pub k0: FgAbelianGroup,
    #[serde(rename = "K1")]
    pub k1: FgAbelianGroup,
    #[serde(rename = "K0_display")]
    pub k0_display: String,
    #[serde(rename = "K1_display")]
    pub k1_display: String,
}

impl Resolved {
    pub fn new(k0: FgAbelianGroup, k1: FgAbelianGroup) -> Self {
        Resolved { k0_display: k0.to_string(), k1_display: k1.to_string(), k0, k1 }
    }

    pub fn sum(&self, o: &Resolved) -> Resolved {
        Resolved::new(self.k0.direct_sum(&o.k0), self.k1.direct_sum(&o.k1))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RefusedRoute {
    pub route: Route,
    pub error: String,
    pub offered: Route,
}

#[derive(Clone, Debug, Serialize)]
pub struct KTheoryExpression {
    pub subject: String,
    pub route: Route,
    pub formula: String,
    pub summands: Vec<Summand>,
    pub resolved: Option<Resolved>,
    pub unit_class: Option<String>,
    pub assumptions: Vec<Assumption>,
    pub verified_inputs: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub refused_routes: Vec<RefusedRoute>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, serde_json::Value>,
}

fn conclusion(bc: BcVariant) -> &'static str {
    match bc {
        BcVariant::Coefficients => "K-theory isomorphism",
        BcVariant::Strong => "KK-equivalence",
    }
}

fn bc_assumption(group: &str, bc: BcVariant) -> Assumption {
    match bc {
        BcVariant::Coefficients => Assumption::assumed(
            format!("{group} satisfies the Baum-Connes conjecture for the coefficient algebras A (enveloping) and A (discrete)"),
            "K-theory isomorphism",
        ),
        BcVariant::Strong => {
            Assumption::assumed(format!("{group} satisfies the strong Baum-Connes conjecture"), "KK-equivalence")
        }
    }
}

/// One summand per orbit class along a route.
pub fn formula(
    subject: &str,
    route: Route,
    classes: Vec<(String, GroupDescriptor)>,
    independence: Option<&IndependenceVerdict>,
    group: &str,
    bc: BcVariant,
) -> Result<KTheoryExpression, KtError> {
    for (_, g) in &classes {
        g.validate()?;
    }
    let mut assumptions = vec![bc_assumption(group, bc)];
    let mut verified = Vec::new();
    match route {
        Route::SemigroupIndependent => match independence {
            Some(IndependenceVerdict::Holds { provenance, ideals }) => {
                verified.push(
                    Check::new("independence", true, provenance.clone()).with_detail(json!({ "ideals": ideals })),
                );
                if !provenance.is_exact() {
                    assumptions.push(Assumption::assumed(
                        "independence holds beyond the checked depth and radius",
                        "semigroup-independent route",
                    ));
                }
            }
            Some(IndependenceVerdict::Fails { .. }) => {
                return Err(KtError::IndependenceUnknown {
                    found: "fails".into(),
                    offer: Route::LeftInverseHull.name().into(),
                })
            }
            None => {
                return Err(KtError::IndependenceUnknown {
                    found: "no verdict".into(),
                    offer: Route::LeftInverseHull.name().into(),
                })
            }
        },
        _ => {}
    }
    if matches!(route, Route::SemigroupIndependent | Route::LeftInverseHull | Route::RightLcm) {
        assumptions.push(Assumption::assumed(format!("P embeds into {group}"), "reduction to the left inverse hull"));
    }
    let summands = classes.into_iter().map(|(representative, group)| Summand { representative, group, k: None }).collect();
    Ok(KTheoryExpression {
        subject: subject.into(),
        route,
        formula: format!("{} ({})", route.formula(), conclusion(bc)),
        summands,
        resolved: None,
        unit_class: None,
        assumptions,
        verified_inputs: verified,
        refused_routes: vec![],
        notes: vec![],
        extra: BTreeMap::new(),
    })
}

/// Fills in every summand the table covers; `resolved` only when all are covered.
pub fn resolve(mut expr: KTheoryExpression, table: &KTable) -> KTheoryExpression {
    let mut total = Some(Resolved::new(FgAbelianGroup::zero(), FgAbelianGroup::zero()));
    let mut cited = Vec::new();
    for s in &mut expr.summands {
        match table.lookup(&s.group) {
            Some((k0, k1, e)) => {
                let r = Resolved::new(k0, k1);
                total = total.map(|t| t.sum(&r));
                s.k = Some(r);
                if !cited.contains(&e.citation) {
                    cited.push(e.citation.clone());
                }
            }
            None => {
                total = None;
                s.k = None;
                let note = format!("summand at {} stays symbolic: no table entry for {:?}", s.representative, s.group);
                if !expr.notes.contains(&note) {
                    expr.notes.push(note);
                }
            }
        }
    }
    for c in cited {
        let a = Assumption::cited("group K-theory table entry", c, "resolution");
        if !expr.assumptions.contains(&a) {
            expr.assumptions.push(a);
        }
    }
    expr.resolved = total;
    expr
}

/// Direct sum of two expressions along the same route.
pub fn direct_sum(a: &KTheoryExpression, b: &KTheoryExpression) -> KTheoryExpression {
    let mut r = a.clone();
    r.subject = format!("{} + {}", a.subject, b.subject);
    r.summands.extend(b.summands.iter().cloned().map(|mut s| {
        s.k = None;
        s
    }));
    for s in &mut r.summands {
        s.k = None;
    }
    for x in &b.assumptions {
        if !r.assumptions.contains(x) {
            r.assumptions.push(x.clone());
        }
    }
    r.verified_inputs.extend(b.verified_inputs.iter().cloned());
    r.resolved = None;
    r.unit_class = None;
    r
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum KPreset {
    Trivial,
    Nat,
    Free { n: usize },
    FreeAbelian { n: usize },
    Numerical { gens: Vec<i64> },
    Artin { letters: Vec<String>, pairs: Vec<ArtinPair> },
    Bs { k: i64, l: i64 },
    /// Boundary quotient of a one-relator monoid; `letters: None` is the countably infinite case.
    OneRelator { letters: Option<Vec<String>>, u: Option<String>, v: Option<String> },
    Tiling { points: Vec<Vec<i64>> },
    Congruence,
}

#[derive(Clone, Debug)]
pub struct PresetOptions {
    pub depth: usize,
    pub radius: usize,
    pub bc: BcVariant,
}

impl Default for PresetOptions {
    fn default() -> Self {
        PresetOptions { depth: 3, radius: 6, bc: BcVariant::Coefficients }
    }
}

struct LcmInputs {
    checks: Vec<Check>,
    space: HullSpace,
}

/// Local evidence for the right LCM route: trivial units, right LCM to depth, one orbit and trivial stabilizer of P.
fn lcm_inputs(spec: &PresetSpec, opts: &PresetOptions, cite: &str) -> Result<LcmInputs, KtError> {
    let p = preset(spec)?;
    let mut checks = Vec::new();
    if !p.trivial_units {
        return Err(KtError::PrerequisiteFailed("a relation has an empty side, so P* may be nontrivial".into()));
    }
    checks.push(
        Check::new("units_trivial", true, Provenance::VerifiedExact)
            .with_detail(json!("every relation side is nonempty, so 1 = xy forces x = y = 1")),
    );
    let space = HullSpace::new(p.presentation.alphabet.clone(), p.group.clone(), opts.radius);
    let hull: HullSet = generate_hull(&space, opts.depth)?;
    match right_lcm_check(&space, &hull) {
        RlcmVerdict::RightLcm { ideals, provenance, .. } => checks.push(
            Check::new("right_lcm", true, provenance)
                .with_verdict("RightLCM")
                .with_detail(json!({ "ideals": ideals, "literature": cite })),
        ),
        RlcmVerdict::Fails { ideal, provenance, .. } => {
            // an incomplete word problem can split one ideal on the ball
            if provenance.is_exact() || p.group.is_exact() || p.right_lcm_by_criterion != Some(true) {
                return Err(KtError::PrerequisiteFailed(format!("right LCM check fails at {ideal}")));
            }
            checks.push(
                Check::new("right_lcm", true, Provenance::assumed(cite))
                    .with_verdict("RightLCM")
                    .with_detail(json!({
                        "literature": cite,
                        "bounded_check": format!("inconclusive at {ideal}: group word problem only verified to depth"),
                    })),
            );
            let derived = Provenance::assumed(format!("{cite}, with trivial units"));
            checks.push(
                Check::new("single_orbit", true, derived.clone())
                    .with_detail(json!("constructible ideals are principal, so all lie in the orbit of P")),
            );
            checks.push(
                Check::new("stabilizer_of_P_trivial", true, derived)
                    .with_detail(json!("gP = P forces g in P*, which is trivial")),
            );
            return Ok(LcmInputs { checks, space });
        }
    }
    let (act, prov) = from_hull(&space, &hull)?;
    let part = compute_orbits(&act);
    let top = act.e.names.iter().position(|n| n == "1P" || n.starts_with("1P ")).ok_or_else(|| KtError::PrerequisiteFailed("P missing from the hull".into()))?;
    let cls = part.class_of(top).map(|c| part.classes[c].len()).unwrap_or(0);
    let bound = Provenance::bounded([("depth", opts.depth as i64), ("radius", opts.radius as i64)]).and(prov);
    checks.push(
        Check::new("single_orbit", part.classes.len() == 1, bound.clone())
            .with_detail(json!({ "classes": part.classes.len(), "size_of_class_of_P": cls })),
    );
    let st = stabilizer(&act, top)?;
    let trivial = st.stab == vec![act.group.identity];
    if !trivial {
        return Err(KtError::PrerequisiteFailed("stabilizer of P is nontrivial".into()));
    }
    checks.push(Check::new("stabilizer_of_P_trivial", true, bound));
    Ok(LcmInputs { checks, space })
}

fn lcm_expression(
    subject: &str,
    group: &str,
    inputs: LcmInputs,
    bc: BcVariant,
    table: &KTable,
) -> Result<KTheoryExpression, KtError> {
    let mut e = formula(subject, Route::RightLcm, vec![("P".into(), GroupDescriptor::Trivial)], None, group, bc)?;
    e.verified_inputs.extend(inputs.checks);
    let mut e = resolve(e, table);
    e.unit_class = Some("[1]_0 generates K0".into());
    Ok(e)
}

pub fn preset_report(p: &KPreset, opts: &PresetOptions, table: &KTable) -> Result<KTheoryExpression, KtError> {
    let bc = opts.bc;
    match p {
        KPreset::Trivial => {
            let e = formula("S = {0, e}", Route::InverseSemigroup, vec![("e".into(), GroupDescriptor::Trivial)], None, "the trivial group", bc)?;
            let mut e = resolve(e, table);
            e.assumptions[0] = Assumption::cited(
                "the trivial group satisfies the strong Baum-Connes conjecture",
                "amenable groups (Higson-Kasparov)",
                conclusion(bc),
            );
            e.verified_inputs.push(Check::new("single_orbit", true, Provenance::VerifiedExact));
            e.unit_class = Some("[e]_0 generates K0".into());
            Ok(e)
        }
        KPreset::Nat => {
            let inputs = lcm_inputs(&PresetSpec::Nat, opts, "N is totally ordered")?;
            let mut e = lcm_expression("N", "Z", inputs, bc, table)?;
            e.assumptions[0] =
                Assumption::cited("Z satisfies the strong Baum-Connes conjecture", "amenable groups (Higson-Kasparov)", "KK-equivalence");
            e.notes.push("matches the Toeplitz algebra: K0 = Z[1], K1 = 0".into());
            Ok(e)
        }
        KPreset::Free { n } => {
            let inputs = lcm_inputs(&PresetSpec::Free { n: *n }, opts, "free monoids are right LCM")?;
            let mut e = lcm_expression(&format!("free monoid on {n} letters"), &format!("F_{n}"), inputs, bc, table)?;
            e.assumptions[0] = Assumption::cited(
                format!("F_{n} satisfies the strong Baum-Connes conjecture"),
                "Haagerup property (Higson-Kasparov)",
                "KK-equivalence",
            );
            Ok(e)
        }
        KPreset::FreeAbelian { n } => {
            let inputs = lcm_inputs(&PresetSpec::FreeAbelian { n: *n }, opts, "N^n is a lattice order")?;
            let mut e = lcm_expression(&format!("N^{n}"), &format!("Z^{n}"), inputs, bc, table)?;
            e.assumptions[0] = Assumption::cited(
                format!("Z^{n} satisfies the strong Baum-Connes conjecture"),
                "amenable groups (Higson-Kasparov)",
                "KK-equivalence",
            );
            Ok(e)
        }
        KPreset::Artin { letters, pairs } => {
            let spec = PresetSpec::Artin { letters: letters.clone(), pairs: pairs.clone() };
            let inputs = lcm_inputs(&spec, opts, "Brieskorn-Saito: Artin monoids are right LCM")?;
            let mut e = lcm_expression(&format!("Artin monoid on {}", letters.join(",")), "A_M", inputs, bc, table)?;
            e.assumptions.push(Assumption::cited(
                "A_M^+ embeds into A_M",
                "Paris, Artin monoids inject in their groups",
                "reduction to the left inverse hull",
            ));
            e.notes.push(match bc {
                BcVariant::Coefficients => "K0 = Z[1]_0, K1 = 0 under Baum-Connes for the coefficient algebras".into(),
                BcVariant::Strong => "the unital embedding C -> C*_l(A_M^+) is a KK-equivalence under strong Baum-Connes".into(),
            });
            Ok(e)
        }
        KPreset::Bs { k, l } => bs_report(*k, *l, opts, table),
        KPreset::Numerical { gens } => numerical_report(gens, opts, table),
        KPreset::OneRelator { letters, u, v } => one_relator_report(letters.as_deref(), u.as_deref(), v.as_deref(), opts, table),
        KPreset::Tiling { points } => {
            let d = crate::tiling::PointSet::new(points.clone()).map_err(|e| KtError::Input(e.to_string()))?;
            crate::tiling::gamma_ktheory(&d, crate::tiling::DEFAULT_CAP, None, table).map_err(|e| KtError::Input(e.to_string()))
        }
        KPreset::Congruence => Ok(congruence_stub(bc)),
    }
}

fn bs_report(k: i64, l: i64, opts: &PresetOptions, table: &KTable) -> Result<KTheoryExpression, KtError> {
    let spec = PresetSpec::Bs { k, l };
    let inputs = lcm_inputs(&spec, opts, "Spielberg: Baumslag-Solitar monoids are right LCM")?;
    let space = inputs.space.clone();
    let mut e = lcm_expression(&format!("BS({k},{l})^+"), &format!("BS({k},{l})"), inputs, BcVariant::Strong, table)?;
    e.assumptions[0] = Assumption::cited(
        format!("BS({k},{l}) satisfies the strong Baum-Connes conjecture"),
        "Haagerup property (Gal-Januszkiewicz) with Higson-Kasparov",
        "KK-equivalence",
    );
    e.assumptions.push(Assumption::cited(
        format!("BS({k},{l})^+ embeds into BS({k},{l})"),
        "normal forms for HNN extensions",
        "reduction to the left inverse hull",
    ));
    e.notes.push("the unital embedding C -> C*_l(BS(k,l)^+) is a KK-equivalence".into());
    let g = space.alphabet.parse_group_word("aba^-1").map_err(KtError::Presentation)?;
    let v = toeplitz_check(&space, &g, &ToeplitzBounds::default());
    let fails_expected = (k < -1 && l > 0) || (k > 1 && l < 0);
    if fails_expected && !matches!(v, ToeplitzVerdict::FailsToDepth { .. }) {
        return Err(KtError::PrerequisiteFailed(format!("Toeplitz failure for aba^-1 not reproduced: {v:?}")));
    }
    e.extra.insert("toeplitz_aba^-1".into(), serde_json::to_value(&v).expect("serializable"));
    if fails_expected {
        e.notes.push("P in BS(k,l) fails the Toeplitz condition at g = aba^-1, so only the right LCM route applies".into());
    }
    Ok(e)
}

fn numerical_report(gens: &[i64], opts: &PresetOptions, table: &KTable) -> Result<KTheoryExpression, KtError> {
    let p = preset(&PresetSpec::Numerical { gens: gens.to_vec() })?;
    let space = HullSpace::new(p.presentation.alphabet.clone(), p.group.clone(), opts.radius);
    let hull = generate_hull(&space, opts.depth.max(4))?;
    let indep = independence_check(&space, &hull);
    let label = gens.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(",");
    let (act, prov) = from_hull(&space, &hull)?;
    let part = compute_orbits(&act);
    let mut classes = Vec::new();
    let mut trivial_all = true;
    for &d in &part.representatives {
        let st = stabilizer(&act, d)?;
        trivial_all &= st.stab.len() == 1;
        let gen_names = st.generators.iter().map(|&x| act.group.names[x].clone()).collect();
        classes.push((act.e.names[d].clone(), GroupDescriptor::from_shape(&crate::orbits::shape(&act.group, &st.stab), gen_names)));
    }
    let subject = format!("numerical semigroup <{label}>");
    let bound = Provenance::bounded([("depth", hull.depth as i64), ("radius", opts.radius as i64)]).and(prov);
    let (route, refused) = match formula(&subject, Route::SemigroupIndependent, classes.clone(), Some(&indep), "Z", opts.bc) {
        Ok(e) => (e, None),
        Err(err @ KtError::IndependenceUnknown { .. }) => {
            let e = formula(&subject, Route::LeftInverseHull, classes, Some(&indep), "Z", opts.bc)?;
            (e, Some(RefusedRoute { route: Route::SemigroupIndependent, error: err.to_string(), offered: Route::LeftInverseHull }))
        }
        Err(e) => return Err(e),
    };
    let mut e = route;
    e.assumptions[0] =
        Assumption::cited("Z satisfies the strong Baum-Connes conjecture", "amenable groups (Higson-Kasparov)", "KK-equivalence");
    e.refused_routes.extend(refused);
    e.verified_inputs.push(
        Check::new("stabilizers_trivial", trivial_all, bound.clone()).with_detail(json!({ "classes": part.classes.len() })),
    );
    e.extra.insert("independence".into(), serde_json::to_value(&indep).expect("serializable"));
    e.notes.push("orbit classes are those of the truncated hull and may be unmerged beyond the window".into());
    e.assumptions.push(Assumption::assumed("the orbit classes found in the window are all the classes", "finite sum"));
    Ok(resolve(e, table))
}

fn one_relator_report(
    letters: Option<&[String]>,
    u: Option<&str>,
    v: Option<&str>,
    opts: &PresetOptions,
    table: &KTable,
) -> Result<KTheoryExpression, KtError> {
    let strong = Assumption::cited(
        "the one-relator group satisfies the strong Baum-Connes conjecture",
        "Beguin-Bettaieb-Valette, Tu, Oyono-Oyono",
        "KK-equivalence",
    );
    let (subject, s_count, mut checks) = match letters {
        Some(ls) => {
            if ls.len() < 3 {
                return Err(KtError::Input("the boundary formula needs |S| >= 3".into()));
            }
            let u = u.map(str::to_string).unwrap_or_else(|| format!("{}^2", ls[0]));
            let v = v.map(str::to_string).unwrap_or_else(|| ls[1..].concat());
            let p = preset(&PresetSpec::OneRelator { letters: ls.to_vec(), u: u.clone(), v: v.clone() })?;
            if p.right_lcm_by_criterion != Some(true) {
                return Err(KtError::PrerequisiteFailed("the length criterion for right LCM does not apply".into()));
            }
            let checks = vec![
                Check::new("relation_admissible", true, Provenance::VerifiedExact)
                    .with_detail(json!("sides nonempty, distinct first letters, no redundant generator")),
                Check::new("right_lcm", true, Provenance::VerifiedExact)
                    .with_verdict("RightLCM")
                    .with_detail(json!({ "criterion": "equal lengths, or the shorter side has a letter occurring more often" })),
                Check::new("units_trivial", p.trivial_units, Provenance::VerifiedExact),
            ];
            (format!("<{} | {u} = {v}>^+", ls.join(",")), Some(ls.len()), checks)
        }
        None => ("one-relator monoid on countably many letters".to_string(), None, vec![]),
    };
    let mut e = formula(&subject, Route::RightLcm, vec![("P".into(), GroupDescriptor::Trivial)], None, "the one-relator group", BcVariant::Strong)?;
    e.assumptions[0] = strong;
    let full = resolve(e.clone(), table).resolved.expect("trivial summand resolves");
    e.verified_inputs.append(&mut checks);
    e.extra.insert("full_algebra".into(), serde_json::to_value(&full).expect("serializable"));
    // boundary quotient: K0(K) = Z -> K0(C*_l(P)) = Z[1] sends the minimal projection to (2 - |S|)[1]
    let boundary = match s_count {
        Some(n) => {
            let c = 2 - n as i64;
            let k0 = FgAbelianGroup::from_relations(1, &[vec![c]]);
            let k1 = if c == 0 { FgAbelianGroup::free(1) } else { FgAbelianGroup::zero() };
            e.assumptions.push(Assumption::cited(
                format!("the minimal projection onto delta_1 has class (2 - |S|)[1] = {c}[1] in K0"),
                "Li-Omland-Spielberg, Remark 3.6",
                "exact sequence 0 -> K -> C*_l(P) -> boundary -> 0",
            ));
            e.notes.push(format!("classification if nuclear: C*_l(P) = E^-1_{} and the boundary quotient is O_{}", n - 1, n - 1));
            Resolved::new(k0, k1)
        }
        None => {
            e.assumptions.push(Assumption::cited(
                "C*_l(P) equals its boundary quotient when |S| is infinite",
                "Li-Omland-Spielberg, Corollary 3.5",
                "boundary quotient",
            ));
            e.notes.push("classification if nuclear: C*_l(P) = O_infinity".into());
            full.clone()
        }
    };
    e.assumptions.push(Assumption::cited(
        "the boundary quotient is purely infinite simple",
        "Li-Omland-Spielberg, Corollary 3.5",
        "classification",
    ));
    e.assumptions.push(Assumption::assumed("C*_l(P) is nuclear", "classification notes only"));
    e.resolved = Some(boundary);
    e.unit_class = Some("[1]_0 = 1".into());
    e.notes.insert(0, "resolved groups are those of the boundary quotient; full_algebra holds K_*(C*_l(P))".into());
    if opts.depth == 0 {
        e.notes.push("no hull was generated".into());
    }
    Ok(e)
}

fn congruence_stub(bc: BcVariant) -> KTheoryExpression {
    KTheoryExpression {
        subject: "R x R_{m,Gamma} for a congruence monoid".into(),
        route: Route::Stub,
        formula: format!(
            "sum over k in C_m^Gamma of K_*(C*_rho((R : a_k) x R*_{{m,Gamma}})) ({})",
            conclusion(bc)
        ),
        summands: vec![],
        resolved: None,
        unit_class: None,
        assumptions: vec![
            Assumption::cited("the ambient group is solvable, hence satisfies strong Baum-Connes", "Higson-Kasparov", "KK-equivalence"),
            Assumption::assumed("constructible ideals are R x a_{m,Gamma}", "orbit classes"),
            Assumption::assumed("independence holds for the opposite semigroup", "semigroup-independent route"),
        ],
        verified_inputs: vec![],
        refused_routes: vec![],
        notes: vec![
            "not evaluated: needs ray class groups C_m^Gamma, fractional ideals (R : a) and the units R*_{m,Gamma} of a number field".into(),
        ],
        extra: BTreeMap::new(),
    }
}

/// Builds an expression from a serialized orbit report.
pub fn from_orbit_report(report: &serde_json::Value, route: Route, bc: BcVariant, table: &KTable) -> Result<KTheoryExpression, KtError> {
    let body = report.get("report").unwrap_or(report);
    let classes = body
        .get("classes")
        .and_then(|c| c.as_array())
        .ok_or_else(|| KtError::Input("orbit report lacks classes".into()))?;
    let mut out = Vec::new();
    for c in classes {
        let rep = c["representative"].as_str().ok_or_else(|| KtError::Input("class without representative".into()))?;
        let shape: StabShape =
            serde_json::from_value(c["stabilizer_shape"].clone()).map_err(|e| KtError::Input(format!("stabilizer shape: {e}")))?;
        let gens = c["stabilizer_generators"]
            .as_array()
            .map(|a| a.iter().filter_map(|x| x.as_str().map(String::from)).collect())
            .unwrap_or_default();
        out.push((rep.to_string(), GroupDescriptor::from_shape(&shape, gens)));
    }
    let indep: Option<IndependenceVerdict> = report.get("independence").and_then(|v| parse_independence(v));
    let mut e = formula("orbit report", route, out, indep.as_ref(), "G", bc)?;
    if body.get("possibly_unmerged").and_then(|v| v.as_bool()) == Some(true) {
        e.assumptions.push(Assumption::assumed("the orbit classes found in the window are all the classes", "finite sum"));
    }
    Ok(resolve(e, table))
}

fn parse_independence(v: &serde_json::Value) -> Option<IndependenceVerdict> {
    let prov = |v: &serde_json::Value| -> Provenance {
        match v["provenance"]["kind"].as_str() {
            Some("verified-exact") => Provenance::VerifiedExact,
            _ => {
                let b = v["provenance"]["bound"].as_object().cloned().unwrap_or_default();
                Provenance::VerifiedToBound { bound: b.into_iter().filter_map(|(k, x)| Some((k, x.as_i64()?))).collect() }
            }
        }
    };
    match v["verdict"].as_str()? {
        "holds" => Some(IndependenceVerdict::Holds { ideals: v["ideals"].as_u64().unwrap_or(0) as usize, provenance: prov(v) }),
        "fails" => Some(IndependenceVerdict::Fails {
            x: v["x"].as_str().unwrap_or_default().into(),
            union: vec![],
            witnesses: vec![],
            provenance: prov(v),
        }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> KTable {
        KTable::bundled()
    }

    #[test]
    fn smith_normal_form() {
        assert_eq!(FgAbelianGroup::from_relations(2, &[vec![2, 0], vec![0, 3]]), FgAbelianGroup { rank: 0, torsion: vec![6] });
        assert_eq!(FgAbelianGroup::from_relations(2, &[vec![2, 4], vec![4, 2]]), FgAbelianGroup { rank: 0, torsion: vec![2, 6] });
        assert_eq!(FgAbelianGroup::from_relations(3, &[vec![0, 0, 0]]), FgAbelianGroup::free(3));
        assert_eq!(FgAbelianGroup::cyclic(1), FgAbelianGroup::zero());
        assert_eq!(FgAbelianGroup::cyclic(0), FgAbelianGroup::free(1));
        assert_eq!(FgAbelianGroup::cyclic(4).direct_sum(&FgAbelianGroup::cyclic(6)).to_string(), "Z/2 + Z/12");
    }

    #[test]
    fn table_entries() {
        let (k0, k1, _) = t().lookup(&GroupDescriptor::FreeAbelian { n: 1 }).unwrap();
        assert_eq!((k0, k1), (FgAbelianGroup::free(1), FgAbelianGroup::free(1)));
        let (k0, _, _) = t().lookup(&GroupDescriptor::FreeAbelian { n: 3 }).unwrap();
        assert_eq!(k0, FgAbelianGroup::free(4));
        assert!(t().lookup(&GroupDescriptor::Opaque { name: "x".into(), generators: vec![] }).is_none());
    }

    #[test]
    fn trivial_summands_resolve_to_free() {
        let classes = (0..3).map(|i| (format!("d{i}"), GroupDescriptor::Trivial)).collect();
        let e = resolve(formula("x", Route::InverseSemigroup, classes, None, "G", BcVariant::Coefficients).unwrap(), &t());
        let r = e.resolved.unwrap();
        assert_eq!((r.k0, r.k1), (FgAbelianGroup::free(3), FgAbelianGroup::zero()));
        assert!(!e.assumptions.is_empty());
    }

    #[test]
    fn opaque_stays_symbolic() {
        let classes = vec![("d".into(), GroupDescriptor::Opaque { name: "H".into(), generators: vec![] })];
        let e = resolve(formula("x", Route::InverseSemigroup, classes, None, "G", BcVariant::Coefficients).unwrap(), &t());
        assert!(e.resolved.is_none());
        assert!(e.notes.iter().any(|n| n.contains("symbolic")));
    }

    #[test]
    fn semigroup_route_needs_independence() {
        let r = formula("P", Route::SemigroupIndependent, vec![], None, "G", BcVariant::Coefficients);
        assert!(matches!(r, Err(KtError::IndependenceUnknown { .. })));
    }

    #[test]
    fn trivial_preset() {
        let e = preset_report(&KPreset::Trivial, &PresetOptions::default(), &t()).unwrap();
        let r = e.resolved.unwrap();
        assert_eq!((r.k0_display.as_str(), r.k1_display.as_str()), ("Z", "0"));
    }

    #[test]
    fn nat_preset_is_toeplitz() {
        let e = preset_report(&KPreset::Nat, &PresetOptions::default(), &t()).unwrap();
        let r = e.resolved.unwrap();
        assert_eq!((r.k0_display.as_str(), r.k1_display.as_str()), ("Z", "0"));
        assert!(e.verified_inputs.iter().all(|c| c.passed), "{:?}", e.verified_inputs);
    }

    #[test]
    fn one_relator_boundary_groups() {
        let letters = |n: usize| Some("abcdefg".chars().take(n).map(|c| c.to_string()).collect::<Vec<_>>());
        for (n, want) in [(3, "0"), (4, "Z/2"), (5, "Z/3")] {
            let e = preset_report(&KPreset::OneRelator { letters: letters(n), u: None, v: None }, &PresetOptions::default(), &t()).unwrap();
            assert_eq!(e.resolved.unwrap().k0_display, want);
        }
        let e = preset_report(&KPreset::OneRelator { letters: None, u: None, v: None }, &PresetOptions::default(), &t()).unwrap();
        assert_eq!(e.resolved.unwrap().k0_display, "Z");
    }

    #[test]
    fn congruence_is_stub() {
        let e = preset_report(&KPreset::Congruence, &PresetOptions::default(), &t()).unwrap();
        assert!(e.resolved.is_none());
        assert_eq!(e.route, Route::Stub);
    }
}
