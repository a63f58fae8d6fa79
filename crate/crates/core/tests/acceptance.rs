//! Acceptance criteria 1 to 9. Each criterion prints one PASS/FAIL line; the test fails if any does.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use kthull::cli::{run, RunConfig};
use kthull::hull::{
    check_idempotent_pure, check_inverse_laws, check_uniqueness, generate_hull, independence_check, HullSpace,
    IndependenceVerdict,
};
use kthull::ktheory::{formula, preset_report, BcVariant, KPreset, KTable, KtError, PresetOptions, Route};
use kthull::orbits::{cocycle_check, compute_orbits, stabilizer, xi_bijection};
use kthull::paction::{example, roundtrip_action, roundtrip_semigroup};
use kthull::presentation::{preset, ArtinPair, PresetSpec};
use kthull::report::Provenance;
use kthull::smashlab::{self, SmashError, SmashOptions};
use serde_json::Value;

const HULL_DEPTH: usize = 3;
const HULL_RADIUS: usize = 6;
const HULL_TIME_LIMIT: Duration = Duration::from_secs(10);
const SMASH_TIME_LIMIT: Duration = Duration::from_secs(30);
const SMASH_UNIT_LIMIT: usize = 200;
const ORACLE_DEPTH: usize = 4;
const ORACLE_WINDOW: i64 = 80;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn hull_presets() -> Vec<(&'static str, PresetSpec)> {
    vec![
        ("N", PresetSpec::Nat),
        ("N^2", PresetSpec::FreeAbelian { n: 2 }),
        ("{a,b}*", PresetSpec::Free { n: 2 }),
        ("BS(2,3)^+", PresetSpec::Bs { k: 2, l: 3 }),
    ]
}

fn inverse_laws() -> Outcome {
    let mut notes = Vec::new();
    for (name, spec) in hull_presets() {
        let start = Instant::now();
        let p = preset(&spec).map_err(|e| e.to_string())?;
        let space = HullSpace::new(p.presentation.alphabet, p.group, HULL_RADIUS);
        for depth in 1..=HULL_DEPTH {
            let hull = generate_hull(&space, depth).map_err(|e| e.to_string())?;
            let r = check_inverse_laws(&space, &hull);
            ensure(r.failures.is_empty(), || format!("{name} depth {depth}: {:?}", r.failures))?;
            ensure(r.to_radius == 0 && r.provenance.is_exact(), || {
                format!("{name} depth {depth}: {} laws only hold to radius", r.to_radius)
            })?;
            if depth == HULL_DEPTH {
                notes.push(format!("{name} {} elements", hull.elements.len()));
            }
        }
        let took = start.elapsed();
        ensure(took < HULL_TIME_LIMIT, || format!("{name} took {took:?}"))?;
    }
    Ok(notes.join(", "))
}

fn uniqueness() -> Outcome {
    let mut pairs = 0;
    for (name, spec) in hull_presets() {
        let p = preset(&spec).map_err(|e| e.to_string())?;
        let space = HullSpace::new(p.presentation.alphabet, p.group, HULL_RADIUS);
        let hull = generate_hull(&space, HULL_DEPTH).map_err(|e| e.to_string())?;
        let u = check_uniqueness(&space, &hull);
        ensure(u.counterexamples.is_empty(), || format!("{name}: {:?}", u.counterexamples))?;
        let pure = check_idempotent_pure(&space, &hull);
        ensure(pure.failures.is_empty(), || format!("{name}: {:?}", pure.failures))?;
        pairs += u.pairs;
    }
    Ok(format!("{pairs} pairs, 0 counterexamples"))
}

fn round_trip() -> Outcome {
    let mut done = Vec::new();
    for name in ["trivial", "z2swap", "nwindow:3"] {
        let ex = example(name).map_err(|e| e.to_string())?;
        let r = roundtrip_action(&ex.action).map_err(|e| e.to_string())?;
        ensure(r.verdict == "isomorphic" && r.provenance == Provenance::VerifiedExact, || format!("{name}: {r:?}"))?;
        if let Some(s) = &ex.semigroup {
            let r = roundtrip_semigroup(s).map_err(|e| e.to_string())?;
            ensure(r.verdict == "isomorphic", || format!("{name} semigroup side: {r:?}"))?;
        }
        done.push(name);
    }
    Ok(done.join(", "))
}

fn check_named(report: &smashlab::SmashReport, name: &str) -> Result<(), String> {
    let c = report.checks.iter().find(|c| c.name == name).ok_or_else(|| format!("no check {name}"))?;
    ensure(c.passed, || format!("{name} failed: {:?}", c.detail))
}

fn stage_two() -> Outcome {
    let mut seen = 0;
    for name in ["trivial", "z2swap", "z4pair", "s3points", "chain:1", "chain:2", "chain:3", "diamond"] {
        let ex = example(name).map_err(|e| e.to_string())?;
        let r = smashlab::run(&ex.action, &SmashOptions::defaults(&ex.action)).map_err(|e| format!("{name}: {e}"))?;
        for c in ["property_a_invariance", "property_b_transport", "property_c_bullet_closure", "redundant_factor"] {
            check_named(&r, c).map_err(|e| format!("{name}: {e}"))?;
        }
        ensure(r.redundant_factor.with_duplicates > 0, || format!("{name}: no duplicated products compared"))?;
        seen += 1;
    }
    // the cap is a hard stop, not a truncation
    let ex = example("chain:3").map_err(|e| e.to_string())?;
    let mut o = SmashOptions::defaults(&ex.action);
    o.cap = 1;
    match smashlab::run(&ex.action, &o) {
        Err(SmashError::BudgetExceeded { cap: 1 }) => {}
        other => return Err(format!("cap 1 not enforced: {:?}", other.map(|r| r.family_elements))),
    }
    Ok(format!("{seen} examples, cap enforced"))
}

fn identities() -> Outcome {
    let mut notes = Vec::new();
    for (n, expected) in [(1, 1), (2, 2), (3, 3)] {
        let ex = example(&format!("chain:{n}")).map_err(|e| e.to_string())?;
        let r = smashlab::run(&ex.action, &SmashOptions::defaults(&ex.action)).map_err(|e| e.to_string())?;
        let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        ensure(failed.is_empty(), || format!("chain:{n}: {failed:?}"))?;
        ensure(r.minimal_nilpotency_power == Some(expected) && r.chain_length == expected, || {
            format!("chain:{n}: power {:?}, chain {}", r.minimal_nilpotency_power, r.chain_length)
        })?;
        notes.push(format!("chain:{n} -> {expected}"));
    }
    let ex = example("nwindow:6").map_err(|e| e.to_string())?;
    let act = &ex.action;
    let mut o = SmashOptions::defaults(act);
    o.sigma = ["-1", "0", "1"].iter().map(|n| act.group.index(n).expect("window element")).collect();
    let start = Instant::now();
    let r = smashlab::run(act, &o).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    ensure(failed.is_empty(), || format!("nwindow:6: {failed:?}"))?;
    ensure(r.units == 198 && r.units <= SMASH_UNIT_LIMIT, || format!("nwindow:6 has {} units", r.units))?;
    ensure(took < SMASH_TIME_LIMIT, || format!("nwindow:6 took {took:?}"))?;
    notes.push(format!("nwindow:6 {} units", r.units));
    Ok(notes.join(", "))
}

fn cocycle() -> Outcome {
    let mut pairs = 0;
    let mut cases = 0;
    for name in ["trivial", "z2swap", "z4pair", "s3points", "chain:1", "chain:2", "chain:3", "diamond"] {
        let ex = example(name).map_err(|e| e.to_string())?;
        let act = &ex.action;
        if act.group.windowed || act.group.len() > 8 {
            continue;
        }
        for d in act.e.nonzero() {
            let st = stabilizer(act, d).map_err(|e| e.to_string())?;
            let (checks, _) = xi_bijection(act, &st).map_err(|e| e.to_string())?;
            ensure(checks.iter().all(|c| c.passed), || format!("{name} Xi at {}: {checks:?}", act.e.names[d]))?;
            let cr = cocycle_check(act, &st).map_err(|e| e.to_string())?;
            let n = act.group.len();
            ensure(cr.pairs_checked == n * n, || format!("{name}: {} of {} pairs", cr.pairs_checked, n * n))?;
            ensure(cr.checks.iter().all(|c| c.passed), || format!("{name} cocycle at {}: {:?}", act.e.names[d], cr.checks))?;
            pairs += cr.pairs_checked;
            cases += 1;
        }
    }
    Ok(format!("{cases} stabilizers, {pairs} pairs"))
}

fn k_of(e: &kthull::ktheory::KTheoryExpression) -> (String, String) {
    let r = e.resolved.as_ref().expect("resolved");
    (r.k0_display.clone(), r.k1_display.clone())
}

fn pair(a: &str, b: &str, m: Option<u32>) -> ArtinPair {
    ArtinPair { a: a.into(), b: b.into(), m }
}

fn reproduced_results() -> Outcome {
    let table = KTable::bundled();
    let opts = PresetOptions::default();
    let z0 = ("Z".to_string(), "0".to_string());
    let letters = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();

    let artins = [
        (letters(&["a", "b"]), vec![pair("a", "b", Some(2))]),
        (letters(&["a", "b", "c"]), vec![pair("a", "b", Some(3)), pair("b", "c", Some(2)), pair("a", "c", None)]),
    ];
    for (ls, pairs) in artins {
        let e = preset_report(&KPreset::Artin { letters: ls, pairs }, &opts, &table).map_err(|e| e.to_string())?;
        ensure(k_of(&e) == z0, || format!("artin: {:?}", k_of(&e)))?;
        ensure(e.unit_class.as_deref() == Some("[1]_0 generates K0"), || format!("artin unit {:?}", e.unit_class))?;
    }

    let mut toeplitz = None;
    for (k, l) in [(2, 3), (-2, 3), (2, -3), (-2, -3)] {
        let e = preset_report(&KPreset::Bs { k, l }, &opts, &table).map_err(|e| e.to_string())?;
        ensure(k_of(&e) == z0, || format!("bs({k},{l}): {:?}", k_of(&e)))?;
        ensure(e.notes.iter().any(|n| n.contains("KK-equivalence")), || format!("bs({k},{l}) has no KK note"))?;
        if (k, l) == (-2, 3) {
            toeplitz = e.extra.get("toeplitz_aba^-1").cloned();
        }
    }

    let t = &toeplitz.ok_or("bs(-2,3) has no Toeplitz evidence")?;
    ensure(t["verdict"] == "fails-to-depth", || format!("toeplitz verdict {}", t["verdict"]))?;
    let pat = &t["evidence"]["pattern"];
    let details = pat["b^i_a_b^j_details"].as_array().ok_or("no b^i a b^j details")?;
    let is: BTreeSet<i64> = details.iter().filter_map(|d| d["i"].as_i64()).collect();
    ensure(is == (0..3).collect(), || format!("i covers {is:?}"))?;
    ensure(pat["b^i_a_b^j_unrefuted"].as_array().is_some_and(|v| v.is_empty()), || "unrefuted candidates".into())?;
    ensure(pat["b^m_candidates_refuted"] == pat["b^m_candidates_total"], || "b^m candidates survive".into())?;

    let cases: [(Option<Vec<String>>, &str, &str); 3] = [
        (Some(letters(&["a", "b", "c"])), "0", "O_2"),
        (Some(letters(&["a", "b", "c", "d", "e"])), "Z/3", "O_4"),
        (None, "Z", "O_infinity"),
    ];
    for (ls, k0, algebra) in cases {
        let n = ls.as_ref().map_or("inf".to_string(), |v| v.len().to_string());
        let e = preset_report(&KPreset::OneRelator { letters: ls, u: None, v: None }, &opts, &table)
            .map_err(|e| e.to_string())?;
        ensure(k_of(&e).0 == k0, || format!("|S| = {n}: K0 {:?}", k_of(&e)))?;
        ensure(e.unit_class.as_deref() == Some("[1]_0 = 1"), || format!("|S| = {n}: unit {:?}", e.unit_class))?;
        ensure(e.notes.iter().any(|x| x.contains(algebra)), || format!("|S| = {n}: notes {:?}", e.notes))?;
        if n != "inf" {
            ensure(e.notes.iter().any(|x| x.contains("E^-1_")), || format!("|S| = {n}: no E^-1 note"))?;
        }
    }

    let e = preset_report(&KPreset::Tiling { points: vec![vec![0], vec![1], vec![2]] }, &opts, &table)
        .map_err(|e| e.to_string())?;
    // subsets of {0,1,2} up to translation: {0}, {0,1}, {0,2}, {0,1,2}
    ensure(k_of(&e) == ("Z^4".to_string(), "0".to_string()), || format!("tiling {:?}", k_of(&e)))?;
    ensure(e.summands.len() == 4, || format!("{} patch classes", e.summands.len()))?;
    Ok("artin, bs x4, toeplitz, one-relator x3, tiling".into())
}

fn configs() -> Vec<(&'static str, String)> {
    let c = |s: &str| s.to_string();
    vec![
        ("hull nat", c("subcommand = \"hull\"\n[presentation]\nname = \"nat\"\n")),
        ("hull bs(2,3)", c("subcommand = \"hull\"\n[presentation]\nname = \"bs\"\nk = 2\nl = 3\n")),
        ("hull bs(-2,3)", c("subcommand = \"hull\"\n[presentation]\nname = \"bs\"\nk = -2\nl = 3\n")),
        ("paction z2swap", c("subcommand = \"paction\"\n[action]\nexample = \"z2swap\"\n")),
        ("paction nwindow", c("subcommand = \"paction\"\n[action]\nexample = \"nwindow:3\"\n")),
        ("orbits s3points", c("subcommand = \"orbits\"\n[action]\nexample = \"s3points\"\n")),
        ("orbits <2,3>", c("subcommand = \"orbits\"\n[presentation]\nname = \"numerical\"\ngens = [2, 3]\n[action]\nfrom_hull = true\n")),
        ("smashlab chain:3", c("subcommand = \"smashlab\"\n[action]\nexample = \"chain:3\"\n[smashlab]\nverify = [\"all\"]\n")),
        ("ktheory bs(-2,3)", c("subcommand = \"ktheory\"\n[ktheory.preset]\nname = \"bs\"\nk = -2\nl = 3\n")),
        ("ktheory artin", c("subcommand = \"ktheory\"\n[ktheory.preset]\nname = \"artin\"\nletters = [\"a\", \"b\", \"c\"]\npairs = [{ a = \"a\", b = \"b\", m = 3 }, { a = \"b\", b = \"c\", m = 2 }, { a = \"a\", b = \"c\" }]\n")),
        ("ktheory <2,3>", c("subcommand = \"ktheory\"\n[ktheory.preset]\nname = \"numerical\"\ngens = [2, 3]\n")),
        ("tiling", c("subcommand = \"tiling\"\n[tiling]\npoints = \"0,1,2\"\n")),
    ]
}

const CLAIMS: &[&str] = &["holds", "RightLCM", "EqualToRadius", "equal-to-radius", "isomorphic", "constructible"];

/// Every claim carries a provenance; bounded provenances name their bounds; counts to radius are never exact.
fn walk(v: &Value, path: &str, bad: &mut Vec<String>, claims: &mut usize) {
    match v {
        Value::Object(m) => {
            let prov = m.get("provenance");
            if let Some(Value::String(verdict)) = m.get("verdict") {
                if CLAIMS.contains(&verdict.as_str()) {
                    *claims += 1;
                    match prov.and_then(|p| p["kind"].as_str()) {
                        Some("verified-exact" | "verified-to-bound" | "assumed") => {}
                        _ => bad.push(format!("{path}: {verdict} without provenance")),
                    }
                    if verdict.contains("adius") && prov.and_then(|p| p["kind"].as_str()) == Some("verified-exact") {
                        bad.push(format!("{path}: {verdict} claimed exact"));
                    }
                }
            }
            if let Some(p) = prov {
                if p["kind"] == "verified-to-bound" && p["bound"].as_object().is_none_or(|b| b.is_empty()) {
                    bad.push(format!("{path}: bounded provenance without a bound"));
                }
            }
            if m.get("to_radius").and_then(Value::as_u64).is_some_and(|n| n > 0)
                && prov.and_then(|p| p["kind"].as_str()) == Some("verified-exact")
            {
                bad.push(format!("{path}: checks to radius reported exact"));
            }
            for (k, x) in m {
                walk(x, &format!("{path}.{k}"), bad, claims);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                walk(x, &format!("{path}[{i}]"), bad, claims);
            }
        }
        _ => {}
    }
}

fn bounded_honesty() -> Outcome {
    let mut bad = Vec::new();
    let mut claims = 0;
    for (name, text) in configs() {
        let cfg = RunConfig::parse(&text).map_err(|e| format!("{name}: {e}"))?;
        let report = run(&cfg).map_err(|e| format!("{name}: {e}"))?;
        let json: Value = serde_json::from_str(&report.to_json()).map_err(|e| e.to_string())?;
        walk(&json, name, &mut bad, &mut claims);
        // BS(-2,3) has no exact ideal equality, so no hull law there may be exact
        if name == "hull bs(-2,3)" {
            for v in &report.verdicts {
                if v.provenance.is_exact() {
                    bad.push(format!("{name}: {} claimed exact", v.name));
                }
            }
        }
    }
    ensure(bad.is_empty(), || bad.join("; "))?;
    Ok(format!("{claims} claims across {} reports", configs().len()))
}

/// Constructible ideals of <2,3> as integer sets below a window, from zigzags of length <= depth.
fn integer_ideals(gens: &[i64], depth: usize, window: i64) -> BTreeSet<BTreeSet<i64>> {
    let member = |x: i64| x >= 0 && in_semigroup(x, gens);
    let p: BTreeSet<i64> = (0..window).filter(|&x| member(x)).collect();
    let steps: Vec<i64> = gens.iter().flat_map(|&g| [g, -g]).collect();
    let mut out = BTreeSet::new();
    let mut frontier = vec![Vec::<i64>::new()];
    for _ in 0..=depth {
        let mut next = Vec::new();
        for z in &frontier {
            // x lies in the domain when every partial sum, read right to left, stays in P
            let dom: BTreeSet<i64> = p
                .iter()
                .copied()
                .filter(|&x| {
                    let mut y = x;
                    z.iter().rev().all(|&d| {
                        y += d;
                        member(y)
                    })
                })
                .collect();
            out.insert(dom);
            for &s in &steps {
                let mut z2 = z.clone();
                z2.push(s);
                next.push(z2);
            }
        }
        frontier = next;
    }
    out.remove(&BTreeSet::new());
    out
}

fn in_semigroup(x: i64, gens: &[i64]) -> bool {
    let mut ok = vec![false; x as usize + 1];
    ok[0] = true;
    for y in 1..=x as usize {
        ok[y] = gens.iter().any(|&g| y as i64 >= g && ok[y - g as usize]);
    }
    ok[x as usize]
}

fn negative_control() -> Outcome {
    let spec = PresetSpec::Numerical { gens: vec![2, 3] };
    let p = preset(&spec).map_err(|e| e.to_string())?;
    let space = HullSpace::new(p.presentation.alphabet, p.group, HULL_RADIUS);
    let hull = generate_hull(&space, ORACLE_DEPTH).map_err(|e| e.to_string())?;
    let verdict = independence_check(&space, &hull);
    let IndependenceVerdict::Fails { x, union, provenance, .. } = &verdict else {
        return Err(format!("independence did not fail: {verdict:?}"));
    };
    ensure(x == "aP u bP" && union == &["aP", "bP"] && provenance.is_exact(), || format!("witness {x} = {union:?}"))?;

    // oracle: X = (2 + P) u (3 + P) is constructible, and both parts are strictly smaller constructible ideals
    let ideals = integer_ideals(&[2, 3], ORACLE_DEPTH, ORACLE_WINDOW);
    let cut = ORACLE_WINDOW - 2 * ORACLE_DEPTH as i64 * 3;
    let trim = |s: &BTreeSet<i64>| s.iter().copied().filter(|&v| v < cut).collect::<BTreeSet<i64>>();
    let shift = |g: i64| (0..cut).filter(|&v| v >= g && (v == g || in_semigroup(v - g, &[2, 3]))).collect::<BTreeSet<i64>>();
    let (a, b) = (shift(2), shift(3));
    let union_ab: BTreeSet<i64> = a.union(&b).copied().collect();
    let trimmed: BTreeSet<BTreeSet<i64>> = ideals.iter().map(trim).collect();
    ensure(trimmed.contains(&union_ab), || "X is not constructible in the oracle".into())?;
    ensure(trimmed.contains(&a) && trimmed.contains(&b), || "2 + P or 3 + P missing in the oracle".into())?;
    ensure(a != union_ab && b != union_ab, || "a part equals X".into())?;

    let table = KTable::bundled();
    let e = preset_report(&KPreset::Numerical { gens: vec![2, 3] }, &PresetOptions::default(), &table)
        .map_err(|e| e.to_string())?;
    let refused = e.refused_routes.first().ok_or("no refused route")?;
    ensure(refused.route == Route::SemigroupIndependent && refused.offered == Route::LeftInverseHull, || {
        format!("refused {:?}", refused)
    })?;
    ensure(e.route == Route::LeftInverseHull, || format!("route {:?}", e.route))?;
    let direct = formula("<2,3>", Route::SemigroupIndependent, vec![], Some(&verdict), "Z", BcVariant::Coefficients);
    ensure(matches!(direct, Err(KtError::IndependenceUnknown { .. })), || format!("{direct:?}"))?;
    let orbits = compute_orbits(&kthull::paction::from_hull(&space, &hull).map_err(|e| e.to_string())?.0);
    Ok(format!("witness {x}, {} oracle ideals, {} orbit classes", ideals.len(), orbits.classes.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: Vec<(usize, &str, fn() -> Outcome)> = vec![
        (1, "inverse laws on hulls", inverse_laws),
        (2, "idempotent-pure uniqueness", uniqueness),
        (3, "round trip", round_trip),
        (4, "stage-two closure", stage_two),
        (5, "exact identities", identities),
        (6, "Xi and the w-cocycle", cocycle),
        (7, "reproduced results", reproduced_results),
        (8, "bounded-verification honesty", bounded_honesty),
        (9, "independence negative control", negative_control),
    ];
    let mut failed = Vec::new();
    for (n, name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS {name} ({detail}; {ms} ms)"),
            Err(why) => {
                println!("criterion {n}: FAIL {name} ({why}; {ms} ms)");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
