//! Command-line front end: configuration, dispatch and JSON reports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::hull::{
    check_idempotent_pure, check_inverse_laws, check_uniqueness, generate_hull, independence_check, right_lcm_check,
    toeplitz_check, HullSpace, IndependenceVerdict, RlcmVerdict, ToeplitzBounds, ToeplitzVerdict,
};
use crate::ktheory::{from_orbit_report, preset_report, BcVariant, KPreset, KTable, KTheoryExpression, PresetOptions, Route};
use crate::orbits::orbit_report;
use crate::paction::{example, from_hull, roundtrip_action, roundtrip_semigroup, ActionFile, FiniteInverseSemigroup, PartialAction, Th};
use crate::presentation::{preset, ArtinPair, PresetSpec};
use crate::report::{Check, Provenance, SCHEMA_VERSION, TOOL_VERSION};
use crate::smashlab::{self, SmashOptions, Verify};
use crate::tiling::{self, Adjacency, PointSet};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Tool(String),
}

fn cfg_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn tool_err(e: impl std::fmt::Display) -> CliError {
    let s = e.to_string();
    if s.contains("budget") || s.contains("cap") {
        CliError::Budget(s)
    } else {
        CliError::Tool(s)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bounds {
    pub depth: usize,
    pub radius: usize,
    pub window: i64,
    pub cap: usize,
    pub tiling_cap: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { depth: 3, radius: 6, window: 3, cap: smashlab::DEFAULT_CAP, tiling_cap: tiling::DEFAULT_CAP }
    }
}

/// Where a partial action comes from: a bundled example, an action file, or the hull of the presentation.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActionSource {
    pub example: Option<String>,
    pub file: Option<PathBuf>,
    pub from_hull: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HullOptions {
    pub checks: Vec<String>,
    pub element: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmashConfig {
    pub sigma: Option<Vec<String>>,
    pub subgroup: Option<Vec<String>>,
    pub seeds: Option<Vec<String>>,
    pub verify: Vec<String>,
    pub f: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KtConfig {
    pub preset: Option<KPreset>,
    pub from: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub route: Option<Route>,
    pub bc: BcVariant,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TilingConfig {
    pub points: Option<String>,
    pub adjacency: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Option<String>,
    pub presentation: Option<PresetSpec>,
    pub action: ActionSource,
    pub bounds: Bounds,
    pub seed_order: Option<Vec<String>>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub timing: bool,
    pub hull: HullOptions,
    pub smashlab: SmashConfig,
    pub ktheory: KtConfig,
    pub tiling: TilingConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(cfg_err)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let b = &self.bounds;
        if b.depth == 0 || b.radius == 0 || b.window <= 0 || b.cap == 0 || b.tiling_cap == 0 {
            return Err(cfg_err("all bounds must be positive"));
        }
        if self.threads == Some(0) {
            return Err(cfg_err("threads must be positive"));
        }
        if let (Some(order), Some(p)) = (&self.seed_order, &self.presentation) {
            let pres = preset(p).map_err(cfg_err)?;
            let mut a: Vec<&String> = order.iter().collect();
            let mut b: Vec<&String> = pres.presentation.alphabet.names().iter().collect();
            a.sort();
            b.sort();
            if a != b {
                return Err(cfg_err("seed order must list every generator exactly once"));
            }
        }
        Ok(())
    }
}

/// An assumption-ledger line: a finitely verified fact, or a hypothesis taken on trust.
#[derive(Clone, Debug, Serialize)]
pub struct LedgerEntry {
    pub kind: &'static str,
    pub statement: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub verdict: String,
    pub passed: bool,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: &'static str,
    pub subcommand: String,
    pub config: RunConfig,
    pub result: Value,
    pub verdicts: Vec<Verdict>,
    pub ledger: Vec<LedgerEntry>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

struct Outcome {
    result: Value,
    checks: Vec<Check>,
    assumptions: Vec<LedgerEntry>,
}

impl Outcome {
    fn new(result: Value, checks: Vec<Check>) -> Self {
        Outcome { result, checks, assumptions: Vec::new() }
    }
}

fn verdict_of(c: &Check) -> Verdict {
    Verdict { name: c.name.clone(), verdict: c.verdict.clone(), passed: c.passed, provenance: c.provenance.clone() }
}

pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let sub = config.subcommand.clone().ok_or_else(|| cfg_err("no subcommand given"))?;
    let start = Instant::now();
    let out = match sub.as_str() {
        "hull" => run_hull(config)?,
        "paction" => run_paction(config)?,
        "smashlab" => run_smashlab(config)?,
        "orbits" => run_orbits(config)?,
        "ktheory" => run_ktheory(config)?,
        "tiling" => run_tiling(config)?,
        other => return Err(cfg_err(format!("unknown subcommand {other}"))),
    };
    let mut ledger: Vec<LedgerEntry> = out
        .checks
        .iter()
        .filter(|c| c.passed)
        .map(|c| LedgerEntry {
            kind: "verified-finitely",
            statement: c.name.clone(),
            provenance: Some(c.provenance.clone()),
            source: None,
        })
        .collect();
    ledger.extend(out.assumptions);
    let passed = out.checks.iter().all(|c| c.passed);
    Ok(Report {
        tool: "kthull",
        version: TOOL_VERSION,
        schema_version: SCHEMA_VERSION,
        subcommand: sub,
        config: config.clone(),
        result: out.result,
        verdicts: out.checks.iter().map(verdict_of).collect(),
        ledger,
        passed,
        timing_ms: config.timing.then(|| start.elapsed().as_millis()),
    })
}

fn presentation_spec(config: &RunConfig) -> Result<PresetSpec, CliError> {
    config.presentation.clone().ok_or_else(|| cfg_err("a presentation is required (--preset or [presentation])"))
}

fn hull_space(config: &RunConfig) -> Result<(HullSpace, String, Vec<String>), CliError> {
    let p = preset(&presentation_spec(config)?).map_err(tool_err)?;
    let mut alphabet = p.presentation.alphabet.clone();
    if let Some(order) = &config.seed_order {
        alphabet = alphabet.with_order(order).map_err(cfg_err)?;
    }
    let rels = p.presentation.fmt_relations();
    Ok((HullSpace::new(alphabet, p.group, config.bounds.radius), p.name, rels))
}

fn law_check(name: &str, r: &crate::hull::LawReport) -> Check {
    Check::new(name, r.failures.is_empty(), r.provenance.clone())
        .with_detail(json!({ "checked": r.checked, "exact": r.exact, "to_radius": r.to_radius }))
}

fn independence_value(v: &IndependenceVerdict) -> (Value, Check) {
    let c = match v {
        IndependenceVerdict::Holds { provenance, ideals } => {
            Check::new("independence", true, provenance.clone()).with_detail(json!({ "ideals": ideals }))
        }
        IndependenceVerdict::Fails { x, union, provenance, .. } => Check::new("independence", false, provenance.clone())
            .with_detail(json!({ "x": x, "union": union })),
    };
    (serde_json::to_value(v).expect("serializable"), c)
}

fn run_hull(config: &RunConfig) -> Result<Outcome, CliError> {
    let (space, name, rels) = hull_space(config)?;
    let hull = generate_hull(&space, config.bounds.depth).map_err(tool_err)?;
    let laws = check_inverse_laws(&space, &hull);
    let pure = check_idempotent_pure(&space, &hull);
    let uniq = check_uniqueness(&space, &hull);
    let mut checks = vec![
        law_check("inverse_laws", &laws),
        law_check("idempotent_pure", &pure),
        Check::new("uniqueness", uniq.counterexamples.is_empty(), uniq.provenance.clone())
            .with_detail(json!({ "pairs": uniq.pairs, "counterexamples": uniq.counterexamples.len() })),
    ];
    let mut result = json!({
        "presentation": { "name": name, "relations": rels, "group_model": space.model.kind(), "exact": space.exact() },
        "hull": { "depth": config.bounds.depth, "radius": config.bounds.radius, "elements": hull.nonzero().count(), "ideals": hull.ideals(&space).len() },
        "inverse_laws": laws,
        "idempotent_pure": pure,
        "uniqueness": uniq,
    });
    for c in &config.hull.checks {
        match c.as_str() {
            "independence" => {
                let (v, chk) = independence_value(&independence_check(&space, &hull));
                result["independence"] = v;
                checks.push(chk);
            }
            "rlcm" => {
                let v = right_lcm_check(&space, &hull);
                let chk = match &v {
                    RlcmVerdict::RightLcm { provenance, .. } => {
                        Check::new("right_lcm", true, provenance.clone()).with_verdict("RightLCM")
                    }
                    RlcmVerdict::Fails { provenance, ideal, .. } => {
                        Check::new("right_lcm", false, provenance.clone()).with_detail(json!({ "ideal": ideal }))
                    }
                };
                result["rlcm"] = serde_json::to_value(&v).expect("serializable");
                checks.push(chk);
            }
            "toeplitz" => {
                let el = config.hull.element.clone().ok_or_else(|| cfg_err("--check toeplitz needs --element"))?;
                let g = space.alphabet.parse_group_word(&el).map_err(cfg_err)?;
                let v = toeplitz_check(&space, &g, &ToeplitzBounds::default());
                let verdict = match &v {
                    ToeplitzVerdict::Constructible { .. } => "Constructible",
                    ToeplitzVerdict::Empty { .. } => "Empty",
                    ToeplitzVerdict::FailsToDepth { .. } => "FailsToDepth",
                };
                let prov = match &v {
                    ToeplitzVerdict::Constructible { provenance, .. }
                    | ToeplitzVerdict::Empty { provenance }
                    | ToeplitzVerdict::FailsToDepth { provenance, .. } => provenance.clone(),
                };
                // a Toeplitz verdict is data, not a pass/fail of the tool
                checks.push(Check::new(format!("toeplitz({el})"), true, prov).with_verdict(verdict));
                result["toeplitz"] = json!({ "element": el, "result": v });
            }
            other => return Err(cfg_err(format!("unknown hull check {other}"))),
        }
    }
    Ok(Outcome::new(result, checks))
}

struct LoadedAction {
    act: PartialAction,
    semigroup: Option<FiniteInverseSemigroup>,
    provenance: Provenance,
    source: Value,
    independence: Option<IndependenceVerdict>,
}

fn load_action(config: &RunConfig) -> Result<LoadedAction, CliError> {
    let src = &config.action;
    if src.from_hull {
        let (space, name, rels) = hull_space(config)?;
        let hull = generate_hull(&space, config.bounds.depth).map_err(tool_err)?;
        let (act, prov) = from_hull(&space, &hull).map_err(tool_err)?;
        let indep = independence_check(&space, &hull);
        return Ok(LoadedAction {
            act,
            semigroup: None,
            provenance: prov,
            source: json!({ "kind": "hull", "presentation": name, "relations": rels, "depth": config.bounds.depth, "radius": config.bounds.radius }),
            independence: Some(indep),
        });
    }
    if let Some(path) = &src.file {
        let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        let file: ActionFile = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(cfg_err)?
        } else {
            toml::from_str(&text).map_err(cfg_err)?
        };
        let act = file.build().map_err(tool_err)?;
        return Ok(LoadedAction {
            act,
            semigroup: None,
            provenance: Provenance::VerifiedExact,
            source: json!({ "kind": "file", "path": path.display().to_string() }),
            independence: None,
        });
    }
    let name = src.example.clone().unwrap_or_else(|| "z2swap".into());
    let ex = example(&name).map_err(cfg_err)?;
    Ok(LoadedAction {
        act: ex.action,
        semigroup: ex.semigroup,
        provenance: Provenance::VerifiedExact,
        source: json!({ "kind": "example", "name": name }),
        independence: None,
    })
}

fn run_paction(config: &RunConfig) -> Result<Outcome, CliError> {
    let la = load_action(config)?;
    let mut checks = la.act.check_axioms();
    let mut result = json!({ "source": la.source, "action": la.act.to_json(), "provenance": la.provenance });
    if !la.act.theta.iter().any(|r| r.contains(&Th::Out)) {
        let rt = roundtrip_action(&la.act).map_err(tool_err)?;
        checks.push(Check::new("roundtrip_action", rt.verdict == "isomorphic", Provenance::VerifiedExact).with_verdict(rt.verdict.clone()));
        result["roundtrip_action"] = serde_json::to_value(&rt).expect("serializable");
    }
    if let Some(s) = &la.semigroup {
        let rt = roundtrip_semigroup(s).map_err(tool_err)?;
        checks.push(Check::new("roundtrip_semigroup", rt.verdict == "isomorphic", Provenance::VerifiedExact).with_verdict(rt.verdict.clone()));
        result["roundtrip_semigroup"] = serde_json::to_value(&rt).expect("serializable");
    }
    Ok(Outcome::new(result, checks))
}

fn group_indices(act: &PartialAction, names: &[String]) -> Result<Vec<usize>, CliError> {
    names.iter().map(|n| act.group.index(n).ok_or_else(|| cfg_err(format!("unknown group element {n}")))).collect()
}

fn idem_indices(act: &PartialAction, names: &[String]) -> Result<Vec<usize>, CliError> {
    names
        .iter()
        .map(|n| act.e.index(n).filter(|&i| i != 0).ok_or_else(|| cfg_err(format!("unknown nonzero idempotent {n}"))))
        .collect()
}

fn run_smashlab(config: &RunConfig) -> Result<Outcome, CliError> {
    let la = load_action(config)?;
    let act = &la.act;
    let sc = &config.smashlab;
    let mut opts = SmashOptions::defaults(act);
    opts.cap = config.bounds.cap;
    if let Some(s) = &sc.sigma {
        opts.sigma = group_indices(act, s)?;
    }
    if let Some(s) = &sc.subgroup {
        opts.subgroup = group_indices(act, s)?;
    }
    if let Some(s) = &sc.seeds {
        opts.seeds = idem_indices(act, s)?;
    }
    if let Some(f) = &sc.f {
        opts.f = Some(idem_indices(act, std::slice::from_ref(f))?[0]);
    }
    if !sc.verify.is_empty() {
        opts.verify = sc.verify.iter().map(|v| v.parse::<Verify>().map_err(cfg_err)).collect::<Result<_, _>>()?;
    }
    let r = smashlab::run(act, &opts).map_err(tool_err)?;
    let checks = r.checks.clone();
    Ok(Outcome::new(json!({ "source": la.source, "report": r }), checks))
}

fn run_orbits(config: &RunConfig) -> Result<Outcome, CliError> {
    let la = load_action(config)?;
    let r = orbit_report(&la.act, la.provenance.clone()).map_err(tool_err)?;
    let mut checks: Vec<Check> = r
        .classes
        .iter()
        .flat_map(|c| c.checks.iter().map(move |k| Check { name: format!("{}:{}", c.representative, k.name), ..k.clone() }))
        .collect();
    let mut result = json!({ "source": la.source, "report": r });
    if let Some(v) = &la.independence {
        let (val, chk) = independence_value(v);
        result["independence"] = val;
        // recorded for the K-theory step; a failure is a property of P, not of the orbit data
        checks.push(Check { passed: true, ..chk });
    }
    Ok(Outcome::new(result, checks))
}

fn load_table(config: &RunConfig) -> Result<KTable, CliError> {
    let mut t = KTable::bundled();
    if let Some(p) = &config.ktheory.table {
        let text = std::fs::read_to_string(p).map_err(|e| cfg_err(format!("{}: {e}", p.display())))?;
        t.extend(KTable::parse(&text).map_err(cfg_err)?);
    }
    Ok(t)
}

fn expression_outcome(e: KTheoryExpression) -> Outcome {
    let assumptions = e
        .assumptions
        .iter()
        .map(|a| {
            let (kind, source) = match &a.status {
                crate::ktheory::AssumptionStatus::Assumed => ("assumed", None),
                crate::ktheory::AssumptionStatus::Cited { source } => ("assumed-cited", Some(source.clone())),
            };
            LedgerEntry { kind, statement: format!("{} (for {})", a.hypothesis, a.needed_for), provenance: None, source }
        })
        .collect();
    let checks = e.verified_inputs.clone();
    Outcome { result: serde_json::to_value(&e).expect("serializable"), checks, assumptions }
}

fn run_ktheory(config: &RunConfig) -> Result<Outcome, CliError> {
    let kc = &config.ktheory;
    let table = load_table(config)?;
    let e = match (&kc.preset, &kc.from) {
        (Some(p), None) => {
            let opts = PresetOptions { depth: config.bounds.depth, radius: config.bounds.radius, bc: kc.bc };
            preset_report(p, &opts, &table).map_err(tool_err)?
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
            let v: Value = serde_json::from_str(&text).map_err(cfg_err)?;
            // accept a full report as written by `orbits`, or its bare result
            let body = v.get("result").cloned().unwrap_or(v);
            let route = kc.route.unwrap_or(Route::PartialCrossedProduct);
            match from_orbit_report(&body, route, kc.bc, &table) {
                Ok(e) => e,
                Err(crate::ktheory::KtError::IndependenceUnknown { found, offer }) => {
                    return Ok(Outcome::new(
                        json!({ "refused": { "route": route, "independence": found, "offered": offer } }),
                        vec![Check::new("route_admissible", false, Provenance::VerifiedExact)
                            .with_verdict("IndependenceUnknown")
                            .with_detail(json!({ "offered": offer }))],
                    ))
                }
                Err(e) => return Err(tool_err(e)),
            }
        }
        (Some(_), Some(_)) => return Err(cfg_err("--preset and --from are exclusive")),
        (None, None) => return Err(cfg_err("ktheory needs --preset or --from")),
    };
    Ok(expression_outcome(e))
}

fn run_tiling(config: &RunConfig) -> Result<Outcome, CliError> {
    let tc = &config.tiling;
    let pts = tc.points.as_deref().ok_or_else(|| cfg_err("tiling needs --points"))?;
    let d = PointSet::parse(pts).map_err(cfg_err)?;
    let adj = match &tc.adjacency {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| cfg_err(format!("{}: {e}", p.display())))?;
            Some(Adjacency::parse(&text).map_err(cfg_err)?)
        }
        None => None,
    };
    let table = load_table(config)?;
    let classes = tiling::patch_classes(&d, config.bounds.tiling_cap, adj.as_ref()).map_err(tool_err)?;
    let reps: Vec<String> = classes
        .iter()
        .map(|p| {
            let a = p.iter().next().expect("nonempty").clone();
            tiling::PatchTriple { a: a.clone(), patch: p.clone(), b: a }.display()
        })
        .collect();
    let e = tiling::gamma_ktheory(&d, config.bounds.tiling_cap, adj.as_ref(), &table).map_err(tool_err)?;
    let mut out = expression_outcome(e);
    out.result = json!({ "points": d.points, "classes": classes.len(), "representatives": reps, "ktheory": out.result });
    Ok(out)
}

// ---- argument parsing ----

#[derive(Parser, Debug)]
#[command(name = "kthull", version, about = "Left inverse hulls, partial actions and symbolic K-theory")]
pub struct Cli {
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Generator order for length-lex comparisons, e.g. b,a.
    #[arg(long, global = true, value_delimiter = ',')]
    pub seed_order: Option<Vec<String>>,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    pub timing: bool,
    /// Optional when the config names one.
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate the left inverse hull and run its checks.
    Hull {
        #[command(flatten)]
        preset: PresetArgs,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        check: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        element: Option<String>,
    },
    /// Build a partial action and verify its axioms and round trips.
    Paction {
        #[command(flatten)]
        source: ActionArgs,
    },
    /// Build the smash-product families and verify the algebra identities.
    Smashlab {
        #[command(flatten)]
        source: ActionArgs,
        #[arg(long, value_delimiter = ',')]
        sigma: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        subgroup: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        seed: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        verify: Vec<String>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Orbit classes, stabilizers and the Xi / w checks.
    Orbits {
        #[command(flatten)]
        source: ActionArgs,
    },
    /// Symbolic K-theory from a preset or an orbit report.
    Ktheory {
        #[command(flatten)]
        preset: PresetArgs,
        #[arg(long, conflicts_with = "preset")]
        from: Option<PathBuf>,
        #[arg(long)]
        table: Option<PathBuf>,
        /// inverse-semigroup, partial-crossed-product, semigroup-independent, left-inverse-hull, right-lcm
        #[arg(long)]
        route: Option<String>,
        /// coefficients or strong
        #[arg(long)]
        bc: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        radius: Option<usize>,
    },
    /// Patch classes of a finite point set and the K-theory of its inverse semigroup.
    Tiling {
        /// `0,1,2` on the line, `0,0;1,0` in the plane.
        #[arg(long, allow_hyphen_values = true)]
        points: Option<String>,
        #[arg(long)]
        adjacency: Option<PathBuf>,
        #[arg(long)]
        cap: Option<usize>,
    },
}

#[derive(Args, Debug, Default)]
pub struct PresetArgs {
    /// nat, free, free-abelian, numerical, artin, bs, one-relator, custom (ktheory also: trivial, tiling, congruence)
    #[arg(long)]
    pub preset: Option<String>,
    /// Presentation file (TOML, same keys as the [presentation] table).
    #[arg(long)]
    pub presentation: Option<PathBuf>,
    #[arg(short = 'k', allow_hyphen_values = true)]
    pub k: Option<i64>,
    #[arg(short = 'l', allow_hyphen_values = true)]
    pub l: Option<i64>,
    #[arg(short = 'n', long = "rank")]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub gens: Option<Vec<i64>>,
    #[arg(long, value_delimiter = ',')]
    pub letters: Option<Vec<String>>,
    /// Artin exponents as a:b:m, comma separated; m = inf drops the relation.
    #[arg(long, value_delimiter = ',')]
    pub pairs: Option<Vec<String>>,
    #[arg(short = 'u', long = "lhs")]
    pub u: Option<String>,
    #[arg(short = 'v', long = "rhs")]
    pub v: Option<String>,
    /// One-relator boundary over countably many letters.
    #[arg(long)]
    pub infinite: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct ActionArgs {
    /// Bundled example name (trivial, z2swap, nwindow:N, z4pair, s3points, chain:N, diamond) or action file.
    #[arg(long)]
    pub action: Option<String>,
    #[arg(long, conflicts_with = "action")]
    pub from_file: Option<PathBuf>,
    /// Presentation config whose hull provides the action.
    #[arg(long, conflicts_with_all = ["action", "from_file"])]
    pub from_hull: Option<PathBuf>,
    #[command(flatten)]
    pub preset: PresetArgs,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub radius: Option<usize>,
}

fn parse_pairs(v: &[String]) -> Result<Vec<ArtinPair>, CliError> {
    v.iter()
        .map(|s| {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(cfg_err(format!("pair {s:?} is not a:b:m")));
            }
            let m = match parts[2] {
                "inf" | "oo" | "infinity" => None,
                x => Some(x.parse::<u32>().map_err(|_| cfg_err(format!("bad exponent in {s:?}")))?),
            };
            Ok(ArtinPair { a: parts[0].into(), b: parts[1].into(), m })
        })
        .collect()
}

fn need<T: Clone>(x: &Option<T>, what: &str, preset: &str) -> Result<T, CliError> {
    x.clone().ok_or_else(|| cfg_err(format!("preset {preset} needs {what}")))
}

fn artin_args(a: &PresetArgs) -> Result<(Vec<String>, Vec<ArtinPair>), CliError> {
    let letters = a.letters.clone().unwrap_or_else(|| vec!["a".into(), "b".into()]);
    let pairs = match &a.pairs {
        Some(p) => parse_pairs(p)?,
        None => vec![ArtinPair { a: letters[0].clone(), b: letters[1].clone(), m: Some(2) }],
    };
    Ok((letters, pairs))
}

fn presentation_from_args(a: &PresetArgs) -> Result<Option<PresetSpec>, CliError> {
    if let Some(path) = &a.presentation {
        let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        return Ok(Some(toml::from_str(&text).map_err(cfg_err)?));
    }
    let Some(name) = a.preset.as_deref() else { return Ok(None) };
    Ok(Some(match name {
        "nat" => PresetSpec::Nat,
        "free" => PresetSpec::Free { n: a.n.unwrap_or(2) },
        "free-abelian" | "free_abelian" => PresetSpec::FreeAbelian { n: a.n.unwrap_or(2) },
        "numerical" => PresetSpec::Numerical { gens: need(&a.gens, "--gens", name)? },
        "artin" => {
            let (letters, pairs) = artin_args(a)?;
            PresetSpec::Artin { letters, pairs }
        }
        "bs" => PresetSpec::Bs { k: need(&a.k, "-k", name)?, l: need(&a.l, "-l", name)? },
        "one-relator" | "one_relator" => PresetSpec::OneRelator {
            letters: need(&a.letters, "--letters", name)?,
            u: need(&a.u, "-u", name)?,
            v: need(&a.v, "-v", name)?,
        },
        other => return Err(cfg_err(format!("unknown presentation preset {other}"))),
    }))
}

fn kpreset_from_args(a: &PresetArgs) -> Result<Option<KPreset>, CliError> {
    let Some(name) = a.preset.as_deref() else { return Ok(None) };
    Ok(Some(match name {
        "trivial" => KPreset::Trivial,
        "nat" => KPreset::Nat,
        "free" => KPreset::Free { n: a.n.unwrap_or(2) },
        "free-abelian" | "free_abelian" => KPreset::FreeAbelian { n: a.n.unwrap_or(2) },
        "numerical" => KPreset::Numerical { gens: need(&a.gens, "--gens", name)? },
        "artin" => {
            let (letters, pairs) = artin_args(a)?;
            KPreset::Artin { letters, pairs }
        }
        "bs" => KPreset::Bs { k: need(&a.k, "-k", name)?, l: need(&a.l, "-l", name)? },
        "one-relator" | "one_relator" => {
            let letters = if a.infinite {
                None
            } else {
                Some(match (&a.letters, a.n) {
                    (Some(l), _) => l.clone(),
                    (None, Some(n)) => (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect(),
                    (None, None) => return Err(cfg_err("one-relator needs --letters, -n or --infinite")),
                })
            };
            KPreset::OneRelator { letters, u: a.u.clone(), v: a.v.clone() }
        }
        "tiling" => {
            let d = PointSet::parse(&need(&a.points, "--points", name)?).map_err(cfg_err)?;
            KPreset::Tiling { points: d.points.into_iter().collect() }
        }
        "congruence" => KPreset::Congruence,
        other => return Err(cfg_err(format!("unknown ktheory preset {other}"))),
    }))
}

fn apply_action_args(cfg: &mut RunConfig, s: &ActionArgs) -> Result<(), CliError> {
    if let Some(a) = &s.action {
        if Path::new(a).is_file() {
            cfg.action = ActionSource { file: Some(a.into()), ..Default::default() };
        } else {
            cfg.action = ActionSource { example: Some(a.clone()), ..Default::default() };
        }
    }
    if let Some(f) = &s.from_file {
        cfg.action = ActionSource { file: Some(f.clone()), ..Default::default() };
    }
    if let Some(h) = &s.from_hull {
        let sub = RunConfig::load(h)?;
        if sub.presentation.is_none() {
            return Err(cfg_err(format!("{} has no [presentation] table", h.display())));
        }
        cfg.presentation = sub.presentation;
        cfg.bounds = sub.bounds;
        cfg.action = ActionSource { from_hull: true, ..Default::default() };
    }
    if let Some(p) = presentation_from_args(&s.preset)? {
        cfg.presentation = Some(p);
        if s.from_hull.is_none() && s.action.is_none() && s.from_file.is_none() {
            cfg.action = ActionSource { from_hull: true, ..Default::default() };
        }
    }
    if let Some(d) = s.depth {
        cfg.bounds.depth = d;
    }
    if let Some(r) = s.radius {
        cfg.bounds.radius = r;
    }
    Ok(())
}

/// The run configuration for parsed arguments: config file first, flags on top.
pub fn config_from_cli(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cli.seed_order.is_some() {
        cfg.seed_order = cli.seed_order.clone();
    }
    cfg.timing |= cli.timing;
    let Some(command) = &cli.command else {
        return match cfg.subcommand {
            Some(_) => Ok(cfg),
            None => Err(cfg_err("no subcommand given on the command line or in the config")),
        };
    };
    let name = match command {
        Command::Hull { preset, depth, radius, check, element } => {
            if let Some(p) = presentation_from_args(preset)? {
                cfg.presentation = Some(p);
            }
            if let Some(d) = depth {
                cfg.bounds.depth = *d;
            }
            if let Some(r) = radius {
                cfg.bounds.radius = *r;
            }
            if !check.is_empty() {
                cfg.hull.checks = check.clone();
            }
            if element.is_some() {
                cfg.hull.element = element.clone();
            }
            "hull"
        }
        Command::Paction { source } => {
            apply_action_args(&mut cfg, source)?;
            "paction"
        }
        Command::Smashlab { source, sigma, subgroup, seed, verify, f, cap } => {
            apply_action_args(&mut cfg, source)?;
            let sc = &mut cfg.smashlab;
            if sigma.is_some() {
                sc.sigma = sigma.clone();
            }
            if subgroup.is_some() {
                sc.subgroup = subgroup.clone();
            }
            if seed.is_some() {
                sc.seeds = seed.clone();
            }
            if !verify.is_empty() {
                sc.verify = verify.clone();
            }
            if f.is_some() {
                sc.f = f.clone();
            }
            if let Some(c) = cap {
                cfg.bounds.cap = *c;
            }
            "smashlab"
        }
        Command::Orbits { source } => {
            apply_action_args(&mut cfg, source)?;
            "orbits"
        }
        Command::Ktheory { preset, from, table, route, bc, depth, radius } => {
            if let Some(p) = kpreset_from_args(preset)? {
                cfg.ktheory.preset = Some(p);
                cfg.ktheory.from = None;
            }
            if from.is_some() {
                cfg.ktheory.from = from.clone();
                cfg.ktheory.preset = None;
            }
            if table.is_some() {
                cfg.ktheory.table = table.clone();
            }
            if let Some(r) = route {
                cfg.ktheory.route = Some(serde_json::from_value(json!(r)).map_err(|_| cfg_err(format!("unknown route {r}")))?);
            }
            if let Some(b) = bc {
                cfg.ktheory.bc = serde_json::from_value(json!(b)).map_err(|_| cfg_err(format!("unknown Baum-Connes variant {b}")))?;
            }
            if let Some(d) = depth {
                cfg.bounds.depth = *d;
            }
            if let Some(r) = radius {
                cfg.bounds.radius = *r;
            }
            "ktheory"
        }
        Command::Tiling { points, adjacency, cap } => {
            if points.is_some() {
                cfg.tiling.points = points.clone();
            }
            if adjacency.is_some() {
                cfg.tiling.adjacency = adjacency.clone();
            }
            if let Some(c) = cap {
                cfg.bounds.tiling_cap = *c;
            }
            "tiling"
        }
    };
    cfg.subcommand = Some(name.into());
    Ok(cfg)
}

/// Parses arguments, runs, writes the report; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = config_from_cli(&cli).and_then(|cfg| {
        #[cfg(feature = "parallel")]
        {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads.unwrap_or(1)).build_global();
        }
        let report = run(&cfg)?;
        let text = report.to_json();
        match &cfg.out {
            Some(p) => std::fs::write(p, text).map_err(|e| CliError::Tool(format!("{}: {e}", p.display())))?,
            None => print!("{text}"),
        }
        Ok(report)
    });
    match result {
        Ok(r) => {
            if !r.passed {
                eprintln!("note: some checks failed; see the report");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Config(_) => 2,
                CliError::Budget(_) => 3,
                CliError::Tool(_) => 1,
            }
        }
    }
}

/// Summary of a report keyed by verdict name, for quick inspection in tests.
pub fn verdict_map(r: &Report) -> BTreeMap<String, bool> {
    r.verdicts.iter().map(|v| (v.name.clone(), v.passed)).collect()
}
