//! Subdivision posets of a molecule.
//!
//! A subdivision is a tree: a leaf is the big cell of a submolecule `V`, a
//! node at level `k` is a `k`-pre-layering with at least two layers whose
//! children only use levels above `k`. Each tree is realized as a theta with
//! an image subset for every element; realizations are compared through their
//! images, since interchange lets different trees describe the same map.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::flow::pre_layerings;
use crate::homology::{poset_report, FinitePoset, HomologyReport};
use crate::molecule::Molecule;
use crate::ogposet::{ClosedSubset, OgPoset, Sign};
use crate::recognize::MoleculeContext;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SubdivTree {
    Leaf(ClosedSubset),
    Node { k: usize, children: Vec<SubdivTree> },
}

impl SubdivTree {
    /// The submolecule this tree decomposes.
    pub fn support(&self) -> ClosedSubset {
        match self {
            SubdivTree::Leaf(v) => v.clone(),
            SubdivTree::Node { children, .. } => {
                let mut s = children[0].support();
                for c in &children[1..] {
                    s.union_with(&c.support());
                }
                s
            }
        }
    }

    pub fn levels(&self) -> BTreeSet<usize> {
        match self {
            SubdivTree::Leaf(_) => BTreeSet::new(),
            SubdivTree::Node { k, children } => {
                let mut s: BTreeSet<usize> = children.iter().flat_map(|c| c.levels()).collect();
                s.insert(*k);
                s
            }
        }
    }

    /// Collapses every subtree whose root level is outside `keep` to a leaf.
    pub fn restrict_levels(&self, keep: &BTreeSet<usize>) -> SubdivTree {
        match self {
            SubdivTree::Leaf(_) => self.clone(),
            SubdivTree::Node { k, children } => {
                if keep.contains(k) {
                    SubdivTree::Node {
                        k: *k,
                        children: children.iter().map(|c| c.restrict_levels(keep)).collect(),
                    }
                } else {
                    SubdivTree::Leaf(self.support())
                }
            }
        }
    }

    pub fn display<'a>(&'a self, p: &'a OgPoset) -> impl fmt::Display + 'a {
        TreeDisplay { tree: self, p }
    }
}

struct TreeDisplay<'a> {
    tree: &'a SubdivTree,
    p: &'a OgPoset,
}

impl fmt::Display for TreeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tree {
            SubdivTree::Leaf(v) => {
                let maxima: Vec<String> = self.p.maximal(v).iter().map(|&x| self.p.id(x).to_string()).collect();
                write!(f, "<{}>", maxima.join(","))
            }
            SubdivTree::Node { k, children } => {
                write!(f, "#{k}(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{}", TreeDisplay { tree: c, p: self.p })?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A subdivision realized as a theta with the image of each of its elements.
#[derive(Clone, Debug)]
pub struct Realized {
    pub tree: SubdivTree,
    pub theta: Molecule,
    pub images: Vec<ClosedSubset>,
}

/// Identifies a realized subdivision up to isomorphism of thetas over `U`:
/// the image of every element together with the images of its faces.
pub type SdKey = Vec<(ClosedSubset, Vec<ClosedSubset>, Vec<ClosedSubset>)>;

impl Realized {
    pub fn key(&self) -> SdKey {
        let tp = self.theta.poset();
        let mut key: SdKey = (0..tp.len())
            .map(|x| {
                let faces = |s| {
                    let mut v: Vec<ClosedSubset> = tp.faces(x, s).iter().map(|&y| self.images[y].clone()).collect();
                    v.sort();
                    v
                };
                (self.images[x].clone(), faces(Sign::Minus), faces(Sign::Plus))
            })
            .collect();
        key.sort();
        key
    }

    /// Distinct elements have distinct images and every image has the
    /// dimension of its element.
    pub fn is_mono(&self, ambient: &OgPoset) -> bool {
        let tp = self.theta.poset();
        let distinct: HashSet<&ClosedSubset> = self.images.iter().collect();
        distinct.len() == self.images.len()
            && (0..tp.len()).all(|x| ambient.set_dim(&self.images[x]) == tp.dim_of(x) as isize)
    }
}

/// Realizes a tree inside the molecule `ambient`.
pub fn realize(ambient: &OgPoset, tree: &SubdivTree) -> Realized {
    let (theta, images) = realize_parts(ambient, tree);
    Realized {
        tree: tree.clone(),
        theta,
        images,
    }
}

fn realize_parts(ambient: &OgPoset, tree: &SubdivTree) -> (Molecule, Vec<ClosedSubset>) {
    match tree {
        SubdivTree::Leaf(v) => {
            let n = ambient.set_dim(v).max(0) as usize;
            let globe = Molecule::globe(n);
            let gp = globe.poset();
            let full = globe.full();
            let images = (0..gp.len())
                .map(|x| {
                    let d = gp.dim_of(x);
                    if d == n {
                        return v.clone();
                    }
                    let sign = if gp.delta(&full, d, Sign::Minus).contains(&x) {
                        Sign::Minus
                    } else {
                        Sign::Plus
                    };
                    ambient.boundary(v, d as isize, sign)
                })
                .collect();
            (globe, images)
        }
        SubdivTree::Node { k, children } => {
            let (mut theta, mut images) = realize_parts(ambient, &children[0]);
            for child in &children[1..] {
                let (t2, i2) = realize_parts(ambient, child);
                let glued = Molecule::paste_with_embeddings(&theta, &t2, *k)
                    .expect("layers of a pre-layering realize to composable thetas");
                let mut merged = vec![None; glued.molecule.len()];
                for (x, &g) in glued.left.iter().enumerate() {
                    merged[g] = Some(images[x].clone());
                }
                for (y, &g) in glued.right.iter().enumerate() {
                    match &merged[g] {
                        Some(prev) => debug_assert_eq!(*prev, i2[y], "images disagree on the glued boundary"),
                        None => merged[g] = Some(i2[y].clone()),
                    }
                }
                theta = glued.molecule;
                images = merged.into_iter().map(Option::unwrap).collect();
            }
            (theta, images)
        }
    }
}

/// Enumerates subdivision trees of one molecule.
pub struct SdEnumerator<'a> {
    ctx: MoleculeContext<'a>,
    levels: BTreeSet<usize>,
    memo: HashMap<(ClosedSubset, usize), Arc<Vec<SubdivTree>>>,
}

impl<'a> SdEnumerator<'a> {
    pub fn new(ambient: &'a OgPoset, levels: BTreeSet<usize>) -> Self {
        SdEnumerator {
            ctx: MoleculeContext::new(ambient),
            levels,
            memo: HashMap::new(),
        }
    }

    /// All trees for the submolecule `v` using levels at least `min_level`.
    pub fn trees(&mut self, v: &ClosedSubset, min_level: usize) -> Arc<Vec<SubdivTree>> {
        let key = (v.clone(), min_level);
        if let Some(t) = self.memo.get(&key) {
            return t.clone();
        }
        let dim = self.ctx.poset().set_dim(v);
        let mut out = vec![SubdivTree::Leaf(v.clone())];
        let levels: Vec<usize> = self
            .levels
            .iter()
            .copied()
            .filter(|&k| k >= min_level && (k as isize) < dim)
            .collect();
        for k in levels {
            for pl in pre_layerings(&mut self.ctx, v, k as isize) {
                if pl.layers.len() < 2 {
                    continue;
                }
                let options: Vec<Arc<Vec<SubdivTree>>> =
                    pl.layers.iter().map(|l| self.trees(l, k + 1)).collect();
                let mut choice = vec![0; options.len()];
                loop {
                    out.push(SubdivTree::Node {
                        k,
                        children: choice.iter().zip(&options).map(|(&i, o)| o[i].clone()).collect(),
                    });
                    // Odometer over the children's options.
                    let mut pos = 0;
                    while pos < choice.len() {
                        choice[pos] += 1;
                        if choice[pos] < options[pos].len() {
                            break;
                        }
                        choice[pos] = 0;
                        pos += 1;
                    }
                    if pos == choice.len() {
                        break;
                    }
                }
            }
        }
        let out = Arc::new(out);
        self.memo.insert(key, out.clone());
        out
    }
}

/// The poset of subdivisions of a molecule with node levels in a given set.
#[derive(Clone, Debug)]
pub struct SdPoset {
    pub elements: Vec<Realized>,
    pub order: FinitePoset,
    /// Index of the big cell, the minimum.
    pub bottom: usize,
}

impl SdPoset {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The poset without the big cell.
    pub fn without_bottom(&self) -> FinitePoset {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| i != self.bottom).collect();
        self.order.induced(&keep)
    }
}

/// `a ≤ b`: every image of `a` is the image of a submolecule of `b`'s theta,
/// given the set of such images for `b`.
pub fn factors_through(a: &Realized, b_sub_images: &HashSet<ClosedSubset>) -> bool {
    a.images.iter().all(|img| b_sub_images.contains(img))
}

/// Images of all submolecules of the theta of `b`.
pub fn submolecule_images(ambient: &OgPoset, b: &Realized) -> HashSet<ClosedSubset> {
    let tp = b.theta.poset();
    let mut ctx = MoleculeContext::new(tp);
    ctx.submolecules(&tp.full_set())
        .into_iter()
        .map(|w| {
            let mut img = ambient.empty_set();
            for x in w.subset.ones() {
                img.union_with(&b.images[x]);
            }
            img
        })
        .collect()
}

pub fn tree_leq(ambient: &OgPoset, a: &Realized, b: &Realized) -> bool {
    factors_through(a, &submolecule_images(ambient, b))
}

/// Enumerates all subdivisions of `u` with node levels in `levels`,
/// deduplicated and sorted by key.
pub fn enumerate_sd(u: &Molecule, levels: &BTreeSet<usize>) -> SdPoset {
    let p = u.poset();
    let full = u.full();
    let trees = SdEnumerator::new(p, levels.clone()).trees(&full, 0);
    let mut by_key: HashMap<SdKey, Realized> = HashMap::new();
    for t in trees.iter() {
        let r = realize(p, t);
        by_key.entry(r.key()).or_insert(r);
    }
    let mut keyed: Vec<(SdKey, Realized)> = by_key.into_iter().collect();
    keyed.sort_by(|x, y| x.0.cmp(&y.0));
    let elements: Vec<Realized> = keyed.into_iter().map(|(_, r)| r).collect();
    let subs: Vec<HashSet<ClosedSubset>> = elements.iter().map(|r| submolecule_images(p, r)).collect();
    let order = FinitePoset::from_relation(elements.len(), |a, b| factors_through(&elements[a], &subs[b]));
    let bottom = elements
        .iter()
        .position(|r| matches!(r.tree, SubdivTree::Leaf(_)))
        .expect("the big cell is always present");
    SdPoset {
        elements,
        order,
        bottom,
    }
}

/// All levels below the dimension of `u`.
pub fn all_levels(u: &Molecule) -> BTreeSet<usize> {
    (0..u.dim().max(0) as usize).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SdReport {
    pub molecule: String,
    pub sd_size: usize,
    #[serde(flatten)]
    pub homology: HomologyReport,
}

/// Contractibility evidence for `Sd(u)`: the subdivision poset over all
/// levels without its big cell.
pub fn contractibility_report(u: &Molecule) -> SdReport {
    let sd = enumerate_sd(u, &all_levels(u));
    let poset = sd.without_bottom();
    SdReport {
        molecule: u.canonical_key().to_string(),
        sd_size: poset.len(),
        homology: poset_report(&poset),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::pre_layerings;

    fn levels(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    fn wide() -> Molecule {
        Molecule::paste(&Molecule::globe(2), &Molecule::globe(2), 0).unwrap()
    }

    #[test]
    fn paths_give_compositions() {
        for k in 1..=5 {
            let sd = enumerate_sd(&Molecule::path(k), &levels(&[0]));
            assert_eq!(sd.len(), 1 << (k - 1));
            assert!(sd.order.is_partial_order());
        }
    }

    #[test]
    fn atom_has_only_big_cell() {
        let o = Molecule::oriental(3);
        let sd = enumerate_sd(&o, &all_levels(&o));
        assert_eq!(sd.len(), 1);
        assert!(contractibility_report(&o).homology.empty);
    }

    #[test]
    fn whiskered_pair() {
        let w = wide();
        let sd = enumerate_sd(&w, &levels(&[0, 1]));
        // Big cell, the identity, and the two whiskered 1-layerings.
        assert_eq!(sd.len(), 4);
        let rest = sd.without_bottom();
        assert!(rest.maximum().is_some());
        for r in &sd.elements {
            assert!(r.is_mono(w.poset()));
        }
    }

    #[test]
    fn path_order() {
        let p3 = Molecule::path(3);
        let sd = enumerate_sd(&p3, &levels(&[0]));
        let find = |sizes: &[usize]| {
            sd.elements
                .iter()
                .position(|r| {
                    let layers: Vec<usize> = match &r.tree {
                        SubdivTree::Leaf(_) => vec![p3.len()],
                        SubdivTree::Node { children, .. } => children
                            .iter()
                            .map(|c| p3.poset().maximal(&c.support()).len())
                            .collect(),
                    };
                    layers == sizes
                })
                .unwrap()
        };
        let (a, b, top) = (find(&[2, 1]), find(&[1, 2]), find(&[1, 1, 1]));
        assert!(sd.order.leq(a, top) && sd.order.leq(b, top));
        assert!(!sd.order.leq(a, b) && !sd.order.leq(b, a));
        assert!((0..sd.len()).all(|x| sd.order.leq(sd.bottom, x)));
        let r = contractibility_report(&p3);
        assert!(r.homology.connected && r.homology.is_acyclic() && r.homology.dismantlable);
        assert_eq!(r.sd_size, 3);
    }

    #[test]
    fn single_level_matches_pre_layerings() {
        let w = wide();
        let sd = enumerate_sd(&w, &levels(&[1]));
        let mut ctx = MoleculeContext::new(w.poset());
        let pls = pre_layerings(&mut ctx, &w.full(), 1);
        assert_eq!(sd.len(), pls.len());
    }

    #[test]
    fn restricting_levels() {
        let w = wide();
        let sd = enumerate_sd(&w, &levels(&[0, 1]));
        for r in &sd.elements {
            assert_eq!(r.tree.restrict_levels(&levels(&[0, 1])), r.tree);
            assert!(matches!(r.tree.restrict_levels(&levels(&[])), SubdivTree::Leaf(_)));
        }
    }
}
