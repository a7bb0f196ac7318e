//! Named example molecules, non-molecules and complexes, and a seeded
//! generator of random small molecules.

use std::collections::HashSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{Cell, CellId, DirectedComplex};
use crate::molecule::{Molecule, PlanarTree};
use crate::ogposet::{OgPoset, Validation};

/// Small molecules with names, all built from constructors.
pub fn named_molecules() -> Vec<(&'static str, Molecule)> {
    let o2 = Molecule::oriental(2);
    let g2 = Molecule::globe(2);
    let path2 = Molecule::path(2);
    vec![
        ("point", Molecule::point()),
        ("arrow", Molecule::arrow()),
        ("path2", path2.clone()),
        ("path3", Molecule::path(3)),
        ("globe2", g2.clone()),
        ("globe3", Molecule::globe(3)),
        ("oriental2", o2.clone()),
        ("oriental3", Molecule::oriental(3)),
        ("theta_2_1", Molecule::theta(&PlanarTree::parse("((),())").unwrap())),
        ("globes_side_by_side", Molecule::paste(&g2, &g2, 0).unwrap()),
        ("globes_stacked", Molecule::paste(&g2, &g2, 1).unwrap()),
        ("orientals_side_by_side", Molecule::paste(&o2, &o2, 0).unwrap()),
        ("atom_path2_path2", Molecule::atom(&path2, &path2).unwrap()),
        ("suspended_path2", path2.suspension()),
        ("join_arrow_point", Molecule::join(&Molecule::arrow(), &Molecule::point())),
    ]
}

/// The boundary of the 2-simplex: a triangle of arrows with no 2-cell.
pub fn triangle_boundary() -> OgPoset {
    OgPoset::new(
        vec![
            vec![[vec![], vec![]]; 3],
            vec![[vec![0], vec![1]], [vec![1], vec![2]], [vec![0], vec![2]]],
        ],
        Validation::Plain,
    )
    .unwrap()
}

/// Two parallel arrows with nothing between them.
pub fn parallel_pair() -> OgPoset {
    OgPoset::new(
        vec![
            vec![[vec![], vec![]]; 2],
            vec![[vec![0], vec![1]], [vec![0], vec![1]]],
        ],
        Validation::Plain,
    )
    .unwrap()
}

fn point_cell(i: usize) -> Cell {
    Cell {
        shape: Arc::new(Molecule::point()),
        attach: vec![CellId::new(0, i)],
    }
}

fn arrow_cell(src: usize, tgt: usize, i: usize) -> Cell {
    Cell {
        shape: Arc::new(Molecule::arrow()),
        attach: vec![CellId::new(0, src), CellId::new(0, tgt), CellId::new(1, i)],
    }
}

/// A directed graph as a 1-dimensional complex.
pub fn graph_complex(vertices: usize, edges: &[(usize, usize)]) -> DirectedComplex {
    DirectedComplex::new(vec![
        (0..vertices).map(point_cell).collect(),
        edges.iter().enumerate().map(|(i, &(s, t))| arrow_cell(s, t, i)).collect(),
    ])
    .expect("graph complexes are valid")
}

/// Vertices x, y with edges x -> y and y -> x.
pub fn loop_graph() -> DirectedComplex {
    graph_complex(2, &[(0, 1), (1, 0)])
}

/// One vertex with one edge from it to itself.
pub fn one_loop() -> DirectedComplex {
    graph_complex(1, &[(0, 0)])
}

/// The molecule itself as a complex, one cell per element.
pub fn molecule_complex(m: &Molecule) -> DirectedComplex {
    let p = m.poset();
    let cells = (0..=p.dim().max(-1))
        .map(|d| {
            p.of_dim(d as usize)
                .map(|x| {
                    let (sub, emb) = p.restrict(&p.closure_of(x));
                    Cell {
                        shape: Arc::new(Molecule::recognize(sub).expect("closures of elements are atoms")),
                        attach: emb.iter().map(|&y| p.id(y)).collect(),
                    }
                })
                .collect()
        })
        .collect();
    DirectedComplex::new(cells).expect("molecules are regular complexes")
}

/// Deterministic random molecules with `dim ≤ max_dim` and at most
/// `max_len` elements, pairwise non-isomorphic, built from globes by random
/// pastings, atoms over parallel round pairs and suspensions.
pub fn random_molecules(seed: u64, count: usize, max_dim: usize, max_len: usize) -> Vec<Molecule> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<Molecule> = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |m: Molecule, pool: &mut Vec<Molecule>| {
        if m.dim() <= max_dim as isize && m.len() <= max_len && seen.insert(m.canonical_key()) {
            pool.push(m);
        }
    };
    for d in 0..=max_dim {
        push(Molecule::globe(d), &mut pool);
    }
    let mut attempts = 0;
    while pool.len() < count && attempts < count * 2000 {
        attempts += 1;
        let u = pool.choose(&mut rng).unwrap().clone();
        match rng.gen_range(0..10) {
            0..=5 => {
                let v = pool.choose(&mut rng).unwrap();
                let top = u.dim().max(v.dim());
                if top <= 0 {
                    continue;
                }
                let k = rng.gen_range(0..top as usize);
                if let Ok(w) = Molecule::paste(&u, v, k) {
                    push(w, &mut pool);
                }
            }
            6..=8 => {
                if u.dim() >= max_dim as isize || !u.is_round() {
                    continue;
                }
                // Any round molecule of the same dimension may be parallel.
                let same: Vec<&Molecule> = pool.iter().filter(|v| v.dim() == u.dim()).collect();
                let v = same.choose(&mut rng).unwrap();
                if u.len() + v.len() > max_len + 1 {
                    continue;
                }
                if let Ok(w) = Molecule::atom(&u, v) {
                    push(w, &mut pool);
                }
            }
            _ => {
                if u.dim() < max_dim as isize && u.len() + 2 <= max_len {
                    push(u.suspension(), &mut pool);
                }
            }
        }
    }
    pool.sort_by_key(|m| (m.len(), m.canonical_key()));
    pool
}
