use std::collections::BTreeSet;

use kthull::hull::{check_inverse_laws, generate_hull, HullSpace};
use kthull::ktheory::{
    direct_sum, formula, invariant_factors, resolve, BcVariant, FgAbelianGroup, GroupDescriptor, KTable, Route,
};
use kthull::orbits::compute_orbits;
use kthull::paction::{example, EXAMPLES};
use kthull::presentation::{normal_form, preset, PresetSpec};
use kthull::tiling::{check_invariants, patch_classes, triple_mul, PatchTriple, PointSet};
use proptest::prelude::*;

fn presets() -> Vec<PresetSpec> {
    vec![
        PresetSpec::Nat,
        PresetSpec::FreeAbelian { n: 2 },
        PresetSpec::Free { n: 2 },
        PresetSpec::Bs { k: 2, l: 3 },
        PresetSpec::Bs { k: -2, l: 3 },
        PresetSpec::Numerical { gens: vec![2, 3] },
    ]
}

proptest! {
    #[test]
    fn normal_form_is_idempotent(which in 0usize..6, word in proptest::collection::vec(0u16..3, 0..=8)) {
        let p = preset(&presets()[which]).unwrap();
        let n = p.presentation.alphabet.len() as u16;
        let w: Vec<u16> = word.into_iter().filter(|&g| g < n).collect();
        let nf = normal_form(&w, &p.monoid_rules).unwrap();
        prop_assert_eq!(normal_form(&nf, &p.monoid_rules).unwrap(), nf.clone());
        prop_assert!(p.monoid_rules.is_irreducible(&nf));
    }

    #[test]
    fn relation_sides_share_a_normal_form(which in 0usize..6) {
        let p = preset(&presets()[which]).unwrap();
        if p.monoid_rules.is_complete() {
            for (u, v) in &p.presentation.relations {
                prop_assert_eq!(normal_form(u, &p.monoid_rules).unwrap(), normal_form(v, &p.monoid_rules).unwrap());
            }
        }
        for g in p.presentation.alphabet.gens() {
            prop_assert!(!normal_form(&[g], &p.monoid_rules).unwrap().is_empty());
        }
    }

    #[test]
    fn invariant_factors_multiply_to_the_determinant(m in proptest::collection::vec(-9i64..=9, 4)) {
        let rows = vec![vec![m[0], m[1]], vec![m[2], m[3]]];
        let det = (m[0] * m[3] - m[1] * m[2]).abs() as i128;
        let d = invariant_factors(&rows, 2);
        prop_assert_eq!(d.iter().product::<i128>().abs(), det);
        if d.len() == 2 && d[0] != 0 {
            prop_assert_eq!(d[1] % d[0], 0);
        }
        // order of the cokernel equals |det| when finite
        let g = FgAbelianGroup::from_relations(2, &rows);
        if det != 0 {
            prop_assert_eq!(g.rank, 0);
            prop_assert_eq!(g.torsion.iter().map(|&t| t as i128).product::<i128>(), det);
        }
    }

    #[test]
    fn resolve_is_additive(a in proptest::collection::vec(0usize..4, 1..4), b in proptest::collection::vec(0usize..4, 1..4), n in 1usize..4) {
        let desc = |k: usize| match k {
            0 => GroupDescriptor::Trivial,
            1 => GroupDescriptor::FreeAbelian { n },
            2 => GroupDescriptor::FiniteCyclic { n },
            _ => GroupDescriptor::Free { n },
        };
        let mk = |v: &[usize], tag: &str| {
            let cls = v.iter().enumerate().map(|(i, &k)| (format!("{tag}{i}"), desc(k))).collect();
            formula("x", Route::InverseSemigroup, cls, None, "G", BcVariant::Coefficients).unwrap()
        };
        let t = KTable::bundled();
        let (ea, eb) = (mk(&a, "a"), mk(&b, "b"));
        let ra = resolve(ea.clone(), &t).resolved.unwrap();
        let rb = resolve(eb.clone(), &t).resolved.unwrap();
        let rs = resolve(direct_sum(&ea, &eb), &t).resolved.unwrap();
        prop_assert_eq!(rs, ra.sum(&rb));
    }

    #[test]
    fn hull_laws_hold_on_random_presets(which in 0usize..4, depth in 1usize..=3) {
        let p = preset(&presets()[which]).unwrap();
        let space = HullSpace::new(p.presentation.alphabet.clone(), p.group.clone(), 5);
        let hull = generate_hull(&space, depth).unwrap();
        prop_assert!(check_inverse_laws(&space, &hull).failures.is_empty());
    }

    #[test]
    fn tiling_invariants(pts in proptest::collection::btree_set((0i64..4, 0i64..3), 1..=5)) {
        let d = PointSet::new(pts.into_iter().map(|(x, y)| vec![x, y]).collect()).unwrap();
        let r = check_invariants(&d, None, 0).unwrap();
        for c in &r.checks {
            prop_assert!(c.passed, "{}", c.name);
        }
    }

    #[test]
    fn patch_classes_match_brute_force(pts in proptest::collection::btree_set(-5i64..6, 1..=7)) {
        let v: Vec<i64> = pts.iter().copied().collect();
        let d = PointSet::new(v.iter().map(|&x| vec![x]).collect()).unwrap();
        // oracle: subsets shifted to start at 0, collected as sorted vectors
        let mut seen = BTreeSet::new();
        for mask in 1u32..(1 << v.len()) {
            let s: Vec<i64> = (0..v.len()).filter(|i| mask >> i & 1 == 1).map(|i| v[i]).collect();
            seen.insert(s.iter().map(|x| x - s[0]).collect::<Vec<_>>());
        }
        prop_assert_eq!(patch_classes(&d, 20, None).unwrap().len(), seen.len());
    }

    #[test]
    fn tiling_products_associate(pts in proptest::collection::btree_set(0i64..7, 2..=7), picks in proptest::collection::vec(any::<prop::sample::Index>(), 3)) {
        let d = PointSet::new(pts.into_iter().map(|x| vec![x]).collect()).unwrap();
        let els: Vec<PatchTriple> = kthull::tiling::elements(&d, 20, None).unwrap();
        let [s, t, u] = [0, 1, 2].map(|i| &els[picks[i].index(els.len())]);
        let left = triple_mul(s, t, &d).and_then(|st| triple_mul(&st, u, &d));
        let right = triple_mul(t, u, &d).and_then(|tu| triple_mul(s, &tu, &d));
        prop_assert_eq!(left, right);
    }
}

#[test]
fn orbit_classes_partition_the_nonzero_idempotents() {
    for name in EXAMPLES {
        let ex = example(name).unwrap();
        let part = compute_orbits(&ex.action);
        let mut all: Vec<usize> = part.classes.iter().flatten().copied().collect();
        all.sort_unstable();
        let expected: Vec<usize> = ex.action.e.nonzero().collect();
        assert_eq!(all, expected, "{name}");
        for (c, r) in part.classes.iter().zip(&part.representatives) {
            assert!(c.contains(r));
        }
    }
}
