//! Property tests over seeded random molecules and random finite posets.

use dcx_core::fixtures::random_molecules;
use dcx_core::homology::{poset_report, FinitePoset};
use dcx_core::io::{certificate_from_json, certificate_to_json, ogposet_from_json, ogposet_to_json};
use dcx_core::iso::{canonical_key, find_iso};
use dcx_core::{Molecule, OgPoset, Sign, Validation};
use proptest::prelude::*;

/// Relabels the elements of each dimension by a rotation.
fn rotate(p: &OgPoset, shift: usize) -> OgPoset {
    let counts = p.counts();
    let perm = |d: usize, i: usize| (i + shift) % counts[d];
    let raw = p.raw_faces();
    let mut out: Vec<Vec<[Vec<usize>; 2]>> = counts.iter().map(|&c| vec![[vec![], vec![]]; c]).collect();
    for (d, layer) in raw.into_iter().enumerate() {
        for (i, faces) in layer.into_iter().enumerate() {
            out[d][perm(d, i)] = faces.map(|fs| {
                let mut v: Vec<usize> = fs.into_iter().map(|f| perm(d - 1, f)).collect();
                v.sort();
                v
            });
        }
    }
    OgPoset::new(out, Validation::Plain).unwrap()
}

fn molecule(seed: u64, pick: usize) -> Molecule {
    let pool = random_molecules(seed, 12, 3, 18);
    pool[pick % pool.len()].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_key_ignores_labels(seed in 0u64..1000, pick in 0usize..12, shift in 1usize..5) {
        let m = molecule(seed, pick);
        let q = rotate(m.poset(), shift);
        prop_assert_eq!(canonical_key(m.poset()), canonical_key(&q));
        prop_assert!(find_iso(m.poset(), &q).is_some());
        prop_assert!(Molecule::recognize(q).is_ok());
    }

    #[test]
    fn boundaries_are_globular_molecules(seed in 0u64..1000, pick in 0usize..12) {
        let m = molecule(seed, pick);
        let p = m.poset();
        for k in 0..m.dim() {
            let minus = p.boundary(&m.full(), k, Sign::Minus);
            let plus = p.boundary(&m.full(), k, Sign::Plus);
            let both = p.full_boundary(&m.full(), k - 1);
            let meet: Vec<usize> = minus.intersection(&plus).collect();
            prop_assert!(both.ones().all(|x| meet.contains(&x)));
            let b = m.boundary(k as usize, Sign::Plus);
            prop_assert_eq!(b.dim(), k);
        }
    }

    #[test]
    fn formats_roundtrip(seed in 0u64..1000, pick in 0usize..12) {
        let m = molecule(seed, pick);
        let v = ogposet_to_json(m.poset());
        prop_assert_eq!(&ogposet_from_json(&v).unwrap(), m.poset());
        let c = certificate_from_json(&certificate_to_json(m.certificate())).unwrap();
        prop_assert!(find_iso(c.replay().unwrap().poset(), m.poset()).is_some());
    }

    #[test]
    fn posets_with_a_top_are_contractible(n in 1usize..9, bits in any::<u64>()) {
        // Random relation on 0..n pointing upward, closed transitively, with a top n.
        let mut reach = vec![vec![false; n + 1]; n + 1];
        for (a, row) in reach.iter_mut().enumerate() {
            for (b, r) in row.iter_mut().enumerate() {
                *r = a == b || b == n || (a < b && bits >> ((a * 8 + b) % 64) & 1 == 1);
            }
        }
        for m in 0..=n {
            for a in 0..=n {
                for b in 0..=n {
                    if reach[a][m] && reach[m][b] {
                        reach[a][b] = true;
                    }
                }
            }
        }
        let closed = FinitePoset::from_relation(n + 1, |a, b| reach[a][b]);
        prop_assert!(closed.is_partial_order());
        let r = poset_report(&closed);
        prop_assert!(r.connected && r.is_acyclic() && r.dismantlable);
    }
}
