use std::path::PathBuf;

use kthull::cli::{main_with, run, verdict_map, RunConfig};
use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kthull-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn kthull(args: &[&str]) -> i32 {
    main_with(std::iter::once("kthull").chain(args.iter().copied()))
}

fn report_of(args: &[&str], name: &str) -> (i32, String) {
    let out = scratch(name);
    let mut full = vec!["--out", out.to_str().unwrap()];
    full.extend_from_slice(args);
    let code = kthull(&full);
    (code, std::fs::read_to_string(&out).unwrap_or_default())
}

#[test]
fn identical_configs_give_identical_bytes() {
    for (i, args) in [
        vec!["tiling", "--points", "0,1,2"],
        vec!["ktheory", "--preset", "bs", "-k", "-2", "-l", "3"],
        vec!["orbits", "--action", "s3points"],
        vec!["hull", "--preset", "free-abelian", "-n", "2", "--depth", "2"],
    ]
    .iter()
    .enumerate()
    {
        let (c1, a) = report_of(args, &format!("same{i}.json"));
        let (c2, b) = report_of(args, &format!("same{i}.json"));
        assert_eq!((c1, c2), (0, 0), "{args:?}");
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn threads_do_not_change_the_report() {
    let (_, one) = report_of(&["--threads", "1", "hull", "--preset", "bs", "-k", "2", "-l", "3"], "t1.json");
    let (_, four) = report_of(&["--threads", "4", "hull", "--preset", "bs", "-k", "2", "-l", "3"], "t4.json");
    let strip = |s: &str| {
        let mut v: Value = serde_json::from_str(s).unwrap();
        v["config"]["threads"] = Value::Null;
        v["config"]["out"] = Value::Null;
        v
    };
    assert_eq!(strip(&one), strip(&four));
}

#[test]
fn exit_codes() {
    // a completed run with failing checks still exits 0
    assert_eq!(kthull(&["--out", scratch("ind.json").to_str().unwrap(), "orbits", "--preset", "numerical", "--gens", "2,3"]), 0);
    let bad = scratch("bad.toml");
    std::fs::write(&bad, "subcommand = \"tiling\"\nnonsense = 1\n").unwrap();
    assert_eq!(kthull(&["--config", bad.to_str().unwrap()]), 2);
    assert_eq!(kthull(&["tiling", "--points", "0,1,2", "--cap", "2"]), 3);
    assert_eq!(kthull(&["smashlab", "--action", "chain:3", "--cap", "1"]), 3);
    // Sigma = the whole window leaves the window
    assert_eq!(kthull(&["smashlab", "--action", "nwindow:3"]), 1);
}

#[test]
fn config_file_matches_flags() {
    let cfg = scratch("tiling.toml");
    std::fs::write(&cfg, "subcommand = \"tiling\"\n\n[tiling]\npoints = \"0,1,2\"\n").unwrap();
    let (c1, from_file) = report_of(&["--config", cfg.to_str().unwrap()], "cfg.json");
    let (c2, from_flags) = report_of(&["tiling", "--points", "0,1,2"], "flags.json");
    assert_eq!((c1, c2), (0, 0));
    let a: Value = serde_json::from_str(&from_file).unwrap();
    let b: Value = serde_json::from_str(&from_flags).unwrap();
    assert_eq!(a["result"], b["result"]);
    assert_eq!(a["verdicts"], b["verdicts"]);
}

#[test]
fn shipped_data_files_run() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    for name in ["bs-hull.toml", "z2swap-smash.toml", "tiling-l.toml"] {
        let cfg = RunConfig::load(&root.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let r = run(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(r.passed, "{name}: {:?}", verdict_map(&r));
    }
    let act = root.join("z3-rotation.json");
    let (code, out) = report_of(&["paction", "--from-file", act.to_str().unwrap()], "file.json");
    assert_eq!(code, 0);
    assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["passed"], true);
}

#[test]
fn report_shape() {
    let (_, s) = report_of(&["tiling", "--points", "0,1,2"], "shape.json");
    let v: Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["tool"], "kthull");
    assert_eq!(v["schema_version"], "1.0.0");
    assert_eq!(v["subcommand"], "tiling");
    assert_eq!(v["result"]["ktheory"]["resolved"]["K0_display"], "Z^4");
    assert!(v["verdicts"].as_array().unwrap().iter().all(|x| x["provenance"].is_object()));
    assert!(v.get("timing_ms").is_none());
}

#[test]
fn reports_match_the_shipped_schema() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schema/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    for (i, args) in [
        vec!["hull", "--preset", "bs", "-k", "-2", "-l", "3", "--depth", "2"],
        vec!["paction", "--action", "z2swap"],
        vec!["smashlab", "--action", "chain:2"],
        vec!["orbits", "--preset", "numerical", "--gens", "2,3"],
        vec!["ktheory", "--preset", "one-relator", "-n", "3"],
        vec!["tiling", "--points", "0,0;1,0", "--timing"],
    ]
    .iter()
    .enumerate()
    {
        let (code, s) = report_of(args, &format!("schema{i}.json"));
        assert_eq!(code, 0, "{args:?}");
        let v: Value = serde_json::from_str(&s).unwrap();
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| format!("{} at {}", e, e.instance_path)).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
        let mut stripped = v.clone();
        stripped["verdicts"][0].as_object_mut().unwrap().remove("provenance");
        assert!(!validator.is_valid(&stripped));
    }
}
