//! Browser bindings: patch classes of a point set, monoid normal forms, and nilpotency of the smash-product maps.

use kthull::ktheory::KTable;
use kthull::paction::example;
use kthull::presentation::{normal_form as reduce, preset, PresetSpec};
use kthull::smashlab::{self, SmashOptions, Verify};
use kthull::tiling::{gamma_ktheory, PointSet, DEFAULT_CAP};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn error(e: impl std::fmt::Display) -> String {
    json!({ "error": e.to_string() }).to_string()
}

/// Patch classes and K-theory of Gamma(D) for points like `0,1,2` or `0,0;1,0`.
#[wasm_bindgen]
pub fn tiling_classes(points: &str) -> String {
    let d = match PointSet::parse(points) {
        Ok(d) => d,
        Err(e) => return error(e),
    };
    match gamma_ktheory(&d, DEFAULT_CAP.min(12), None, &KTable::bundled()) {
        Ok(e) => {
            let reps: Vec<&String> = e.summands.iter().map(|s| &s.representative).collect();
            let r = e.resolved.as_ref();
            json!({
                "classes": reps.len(),
                "representatives": reps,
                "K0": r.map(|r| r.k0_display.clone()),
                "K1": r.map(|r| r.k1_display.clone()),
            })
            .to_string()
        }
        Err(e) => error(e),
    }
}

/// Normal form of a positive word in BS(k,l)^+ (or N^2 when k = l = 0).
#[wasm_bindgen]
pub fn normal_form(k: i32, l: i32, word: &str) -> String {
    let spec = if k == 0 && l == 0 { PresetSpec::FreeAbelian { n: 2 } } else { PresetSpec::Bs { k: k as i64, l: l as i64 } };
    let p = match preset(&spec) {
        Ok(p) => p,
        Err(e) => return error(e),
    };
    let alphabet = &p.presentation.alphabet;
    let w = match alphabet.parse_word(word) {
        Ok(w) => w,
        Err(e) => return error(e),
    };
    match reduce(&w, &p.monoid_rules) {
        Ok(nf) => json!({
            "presentation": p.presentation.fmt_relations(),
            "input": alphabet.fmt_word(&w),
            "normal_form": alphabet.fmt_word(&nf),
            "complete": p.monoid_rules.is_complete(),
        })
        .to_string(),
        Err(e) => error(e),
    }
}

/// Chain length and minimal vanishing power of rho on a bundled chain action.
#[wasm_bindgen]
pub fn nilpotency(chain: u32) -> String {
    if !(1..=4).contains(&chain) {
        return error("chain length must be between 1 and 4");
    }
    let ex = match example(&format!("chain:{chain}")) {
        Ok(e) => e,
        Err(e) => return error(e),
    };
    let mut opts = SmashOptions::defaults(&ex.action);
    opts.verify = [Verify::Nilpotent].into();
    match smashlab::run(&ex.action, &opts) {
        Ok(r) => json!({
            "units": r.units,
            "chain_length": r.chain_length,
            "minimal_power": r.minimal_nilpotency_power,
            "passed": r.passed,
        })
        .to_string(),
        Err(e) => error(e),
    }
}
