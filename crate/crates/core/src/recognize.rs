//! Molecule recognition, splits and submolecules inside a fixed ambient poset.
//!
//! Every proper `k`-split `A #k B` of a closed subset `U` has
//! `A = cl(X) ∪ ∂_k^- U` where `X` is a nonempty proper subset of the maximal
//! elements of `U` of dimension above `k` (the maximal elements of `A` of
//! dimension at most `k` all lie in `∂_k^- A = ∂_k^- U`). So splits are found by
//! enumerating such `X` rather than all closed subsets.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::molecule::{is_round_set, Certificate};
use crate::ogposet::{ClosedSubset, OgPoset, Sign};

/// A proper split `U = left #k right`, both factors molecules.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Split {
    pub k: usize,
    pub left: ClosedSubset,
    pub right: ClosedSubset,
}

/// One step in a chain of pasting inclusions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WitnessStep {
    /// Take the left or right factor of the `index`-th `k`-split.
    Factor { k: usize, index: usize, right: bool },
    /// Take a `k`-boundary, a degenerate pasting factor.
    Boundary { k: usize, sign: Sign },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Submolecule {
    pub subset: ClosedSubset,
    /// Steps from the ambient molecule down to `subset`.
    pub witness: Vec<WitnessStep>,
}

/// Receives a split with certificates for both factors; returning true stops the scan.
type SplitVisitor<'v> = dyn FnMut(&Split, Arc<Certificate>, Arc<Certificate>) -> bool + 'v;

/// Memoizing recognizer for closed subsets of one poset.
pub struct MoleculeContext<'a> {
    p: &'a OgPoset,
    certs: HashMap<ClosedSubset, Option<Arc<Certificate>>>,
    splits: HashMap<(ClosedSubset, usize), Arc<Vec<Split>>>,
}

impl<'a> MoleculeContext<'a> {
    pub fn new(p: &'a OgPoset) -> Self {
        MoleculeContext {
            p,
            certs: HashMap::new(),
            splits: HashMap::new(),
        }
    }

    pub fn poset(&self) -> &'a OgPoset {
        self.p
    }

    pub fn is_molecule(&mut self, a: &ClosedSubset) -> bool {
        self.certificate(a).is_some()
    }

    /// A certificate for `a` as a molecule, if it is one. `a` must be closed.
    pub fn certificate(&mut self, a: &ClosedSubset) -> Option<Arc<Certificate>> {
        if a.is_clear() {
            return None;
        }
        if let Some(c) = self.certs.get(a) {
            return c.clone();
        }
        let maxima = self.p.maximal(a);
        let cert = if let [x] = maxima[..] {
            self.atom_certificate(a, x)
        } else {
            self.first_split(a).map(|(s, l, r)| Arc::new(Certificate::Paste(s, l, r)))
        };
        self.certs.insert(a.clone(), cert.clone());
        cert
    }

    fn atom_certificate(&mut self, a: &ClosedSubset, x: usize) -> Option<Arc<Certificate>> {
        let p = self.p;
        let n = p.dim_of(x) as isize;
        if n == 0 {
            return Some(Arc::new(Certificate::Point));
        }
        let input = p.boundary(a, n - 1, Sign::Minus);
        let output = p.boundary(a, n - 1, Sign::Plus);
        if p.set_dim(&input) != n - 1 || p.set_dim(&output) != n - 1 {
            return None;
        }
        let mut cover = input.clone();
        cover.union_with(&output);
        cover.insert(x);
        if cover != *a {
            return None;
        }
        for s in Sign::BOTH {
            if p.boundary(&input, n - 2, s) != p.boundary(&output, n - 2, s) {
                return None;
            }
        }
        let mut meet = input.clone();
        meet.intersect_with(&output);
        if meet != p.full_boundary(&input, n - 2) {
            return None;
        }
        if !is_round_set(p, &input) || !is_round_set(p, &output) {
            return None;
        }
        let ci = self.certificate(&input)?;
        let co = self.certificate(&output)?;
        Some(Arc::new(Certificate::Atom(ci, co)))
    }

    /// Split orders to try: the frame dimension first, then the others.
    fn split_levels(&self, a: &ClosedSubset) -> Vec<usize> {
        let dim = self.p.set_dim(a);
        let fr = crate::flow::frame_dim(self.p, a);
        let mut levels: Vec<usize> = Vec::new();
        if fr >= 0 && fr < dim {
            levels.push(fr as usize);
        }
        levels.extend((0..dim.max(0) as usize).filter(|&k| k as isize != fr));
        levels
    }

    fn first_split(
        &mut self,
        a: &ClosedSubset,
    ) -> Option<(usize, Arc<Certificate>, Arc<Certificate>)> {
        for k in self.split_levels(a) {
            let mut found = None;
            self.scan_splits(a, k, &mut |_, l, r| {
                found = Some((l, r));
                true
            });
            if let Some((l, r)) = found {
                return Some((k, l, r));
            }
        }
        None
    }

    /// Candidate factor pair for the split generated by `xs`, if it is one
    /// structurally (molecularity of the factors not checked).
    fn candidate(&self, a: &ClosedSubset, k: usize, xs: &[usize]) -> Option<(ClosedSubset, ClosedSubset)> {
        let p = self.p;
        let ki = k as isize;
        let mut left = p.closure(xs.iter().copied());
        left.union_with(&p.boundary(a, ki, Sign::Minus));
        let glue = p.boundary(&left, ki, Sign::Plus);
        let mut right = a.clone();
        right.difference_with(&left);
        right.union_with(&glue);
        if !p.is_closed(&right) || p.set_dim(&right) <= ki {
            return None;
        }
        if p.boundary(&right, ki, Sign::Minus) != glue {
            return None;
        }
        Some((left, right))
    }

    /// Visits every proper `k`-split of `a` into molecules, in a fixed order,
    /// until `visit` returns true.
    fn scan_splits(
        &mut self,
        a: &ClosedSubset,
        k: usize,
        visit: &mut SplitVisitor<'_>,
    ) {
        let p = self.p;
        let high: Vec<usize> = p
            .maximal(a)
            .into_iter()
            .filter(|&x| p.dim_of(x) > k)
            .collect();
        let h = high.len();
        if h < 2 {
            return;
        }
        assert!(h < 31, "too many maximal elements to enumerate splits");
        // Subsets in order of size, then lexicographically.
        let mut masks: Vec<u32> = (1..(1u32 << h) - 1).collect();
        masks.sort_by_key(|m| (m.count_ones(), m.reverse_bits()));
        for mask in masks {
            let xs: Vec<usize> = (0..h).filter(|i| mask >> i & 1 == 1).map(|i| high[i]).collect();
            let Some((left, right)) = self.candidate(a, k, &xs) else {
                continue;
            };
            let Some(cl) = self.certificate(&left) else {
                continue;
            };
            let Some(cr) = self.certificate(&right) else {
                continue;
            };
            let split = Split { k, left, right };
            if visit(&split, cl, cr) {
                return;
            }
        }
    }

    /// All proper `k`-splits of `a` into molecules.
    pub fn splits(&mut self, a: &ClosedSubset, k: usize) -> Arc<Vec<Split>> {
        let key = (a.clone(), k);
        if let Some(s) = self.splits.get(&key) {
            return s.clone();
        }
        let mut out = Vec::new();
        self.scan_splits(a, k, &mut |s, _, _| {
            out.push(s.clone());
            false
        });
        out.sort();
        let out = Arc::new(out);
        self.splits.insert(key, out.clone());
        out
    }

    /// All submolecules of the molecule `a`: iterated split factors and
    /// boundaries, each with a witness chain. Sorted by subset.
    pub fn submolecules(&mut self, a: &ClosedSubset) -> Vec<Submolecule> {
        let p = self.p;
        let mut found: BTreeMap<ClosedSubset, Vec<WitnessStep>> = BTreeMap::new();
        found.insert(a.clone(), Vec::new());
        let mut queue = vec![a.clone()];
        while let Some(s) = queue.pop() {
            let path = found[&s].clone();
            let dim = p.set_dim(&s);
            let mut next: Vec<(ClosedSubset, WitnessStep)> = Vec::new();
            for k in 0..dim.max(0) as usize {
                for sign in Sign::BOTH {
                    next.push((p.boundary(&s, k as isize, sign), WitnessStep::Boundary { k, sign }));
                }
                for (index, split) in self.splits(&s, k).iter().enumerate() {
                    next.push((split.left.clone(), WitnessStep::Factor { k, index, right: false }));
                    next.push((split.right.clone(), WitnessStep::Factor { k, index, right: true }));
                }
            }
            for (t, step) in next {
                if !found.contains_key(&t) {
                    let mut w = path.clone();
                    w.push(step);
                    found.insert(t.clone(), w);
                    queue.push(t);
                }
            }
        }
        found
            .into_iter()
            .map(|(subset, witness)| Submolecule { subset, witness })
            .collect()
    }

    /// Replays a witness chain from `a`, returning the subset it reaches.
    pub fn replay_witness(&mut self, a: &ClosedSubset, witness: &[WitnessStep]) -> Option<ClosedSubset> {
        let mut cur = a.clone();
        for step in witness {
            cur = match *step {
                WitnessStep::Boundary { k, sign } => self.p.boundary(&cur, k as isize, sign),
                WitnessStep::Factor { k, index, right } => {
                    let splits = self.splits(&cur, k);
                    let s = splits.get(index)?;
                    if right {
                        s.right.clone()
                    } else {
                        s.left.clone()
                    }
                }
            };
        }
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molecule::Molecule;
    use crate::ogposet::Validation;

    fn sub_count(m: &Molecule) -> usize {
        MoleculeContext::new(m.poset()).submolecules(&m.full()).len()
    }

    #[test]
    fn recognizes_constructed_molecules() {
        for m in [
            Molecule::point(),
            Molecule::path(3),
            Molecule::oriental(3),
            Molecule::paste(&Molecule::globe(2), &Molecule::globe(2), 0).unwrap(),
        ] {
            let cert = MoleculeContext::new(m.poset()).certificate(&m.full()).unwrap();
            let replayed = cert.replay().unwrap();
            assert!(crate::iso::find_iso(replayed.poset(), m.poset()).is_some());
        }
        let tri = Molecule::oriental(2);
        let cert = MoleculeContext::new(tri.poset()).certificate(&tri.full()).unwrap();
        assert!(matches!(*cert, Certificate::Atom(..)));
        let p3 = Molecule::path(3);
        let cert = MoleculeContext::new(p3.poset()).certificate(&p3.full()).unwrap();
        assert!(matches!(*cert, Certificate::Paste(0, ..)));
    }

    #[test]
    fn rejects_triangle_sphere() {
        let sphere = OgPoset::new(
            vec![
                vec![[vec![], vec![]]; 3],
                vec![[vec![0], vec![1]], [vec![1], vec![2]], [vec![0], vec![2]]],
            ],
            Validation::RegularCandidate,
        )
        .unwrap();
        assert!(!MoleculeContext::new(&sphere).is_molecule(&sphere.full_set()));
        let parallel = OgPoset::new(
            vec![vec![[vec![], vec![]]; 2], vec![[vec![0], vec![1]]; 2]],
            Validation::RegularCandidate,
        )
        .unwrap();
        assert!(!MoleculeContext::new(&parallel).is_molecule(&parallel.full_set()));
    }

    #[test]
    fn split_examples() {
        let p3 = Molecule::path(3);
        let mut ctx = MoleculeContext::new(p3.poset());
        let splits = ctx.splits(&p3.full(), 0);
        let shapes: Vec<(usize, usize)> = splits
            .iter()
            .map(|s| (s.left.count_ones(..), s.right.count_ones(..)))
            .collect();
        assert_eq!(shapes.len(), 2);
        assert!(shapes.contains(&(3, 5)) && shapes.contains(&(5, 3)));
        let tri = Molecule::oriental(2);
        assert!(MoleculeContext::new(tri.poset()).splits(&tri.full(), 0).is_empty());
        let column = Molecule::paste(&Molecule::globe(2), &Molecule::globe(2), 1).unwrap();
        let mut ctx = MoleculeContext::new(column.poset());
        assert!(ctx.splits(&column.full(), 0).is_empty());
        assert_eq!(ctx.splits(&column.full(), 1).len(), 1);
    }

    #[test]
    fn submolecule_counts() {
        assert_eq!(sub_count(&Molecule::path(3)), 10);
        assert_eq!(sub_count(&Molecule::path(2)), 6);
        // Boundaries of an atom are submolecules too.
        assert_eq!(sub_count(&Molecule::arrow()), 3);
        assert_eq!(sub_count(&Molecule::globe(2)), 5);
    }

    #[test]
    fn witnesses_replay() {
        let m = Molecule::paste(&Molecule::path(2), &Molecule::globe(1), 0).unwrap();
        let mut ctx = MoleculeContext::new(m.poset());
        for sub in ctx.submolecules(&m.full()) {
            let reached = ctx.replay_witness(&m.full(), &sub.witness).unwrap();
            assert_eq!(reached, sub.subset);
        }
    }
}
