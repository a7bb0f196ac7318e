//! Oriented graded posets.
//!
//! Elements are stored dimension-major: every element has a global index, and
//! the elements of dimension `d` occupy the contiguous range
//! `offsets[d]..offsets[d + 1]`. Public identifiers are [`ElementId`]s
//! (`dim`, `index` within that dimension); most algorithms work on global
//! indices and [`ElementSet`] bitsets over them.

use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

/// A set of elements of one [`OgPoset`], indexed globally.
pub type ElementSet = FixedBitSet;

/// An [`ElementSet`] that is downward closed. The alias documents intent only;
/// [`OgPoset::is_closed`] checks it.
pub type ClosedSubset = FixedBitSet;

/// Orientation of a face: input (`-`) or output (`+`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Minus, Sign::Plus];

    pub fn flip(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    pub(crate) fn slot(self) -> usize {
        match self {
            Sign::Minus => 0,
            Sign::Plus => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Minus => "-",
            Sign::Plus => "+",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// An element addressed by its dimension and its position within that dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementId {
    pub dim: usize,
    pub index: usize,
}

impl ElementId {
    pub fn new(dim: usize, index: usize) -> Self {
        ElementId { dim, index }
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.dim, self.index)
    }
}

impl FromStr for ElementId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (d, i) = s
            .split_once('.')
            .ok_or_else(|| format!("expected \"dim.index\", got {s:?}"))?;
        let dim = d.trim().parse().map_err(|_| format!("bad dimension in {s:?}"))?;
        let index = i.trim().parse().map_err(|_| format!("bad index in {s:?}"))?;
        Ok(ElementId { dim, index })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OgError {
    #[error("element {element} has {face} among both its input and output faces")]
    Overlap { element: ElementId, face: usize },
    #[error("element {element} references face index {face}, but dimension {} has {count} elements", element.dim - 1)]
    DanglingIndex {
        element: ElementId,
        face: usize,
        count: usize,
    },
    #[error("element {element} has an empty {sign} face set")]
    EmptyFaceSet { element: ElementId, sign: Sign },
    #[error("element {element} lists face {face} twice")]
    DuplicateFace { element: ElementId, face: usize },
    #[error("0-dimensional element {element} cannot have faces")]
    FacesOnPoint { element: ElementId },
}

/// How strictly [`OgPoset::new`] validates its input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Validation {
    /// Input and output faces are disjoint and every positive-dimensional
    /// element has at least one face.
    #[default]
    Plain,
    /// Additionally both face sets of every positive-dimensional element are
    /// nonempty, as needed for closures of elements to be round.
    RegularCandidate,
}

/// Face data of one element, as local indices into the previous dimension.
pub type RawFaces = [Vec<usize>; 2];

/// A finite oriented graded poset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OgPoset {
    offsets: Vec<usize>,
    dims: Vec<usize>,
    faces: Vec<[Vec<usize>; 2]>,
    cofaces: Vec<[Vec<usize>; 2]>,
}

impl OgPoset {
    /// Validates per-dimension face data: `raw[d][i]` holds the input and
    /// output faces of element `d.i`, as indices into dimension `d - 1`.
    pub fn new(raw: Vec<Vec<RawFaces>>, mode: Validation) -> Result<Self, OgError> {
        let mut raw = raw;
        while raw.last().is_some_and(|layer| layer.is_empty()) {
            raw.pop();
        }
        for (d, layer) in raw.iter().enumerate() {
            for (i, entry) in layer.iter().enumerate() {
                let element = ElementId::new(d, i);
                if d == 0 {
                    if !entry[0].is_empty() || !entry[1].is_empty() {
                        return Err(OgError::FacesOnPoint { element });
                    }
                    continue;
                }
                let count = raw[d - 1].len();
                for sign in Sign::BOTH {
                    let list = &entry[sign.slot()];
                    if mode == Validation::RegularCandidate && list.is_empty() {
                        return Err(OgError::EmptyFaceSet { element, sign });
                    }
                    let mut seen = FixedBitSet::with_capacity(count);
                    for &face in list {
                        if face >= count {
                            return Err(OgError::DanglingIndex {
                                element,
                                face,
                                count,
                            });
                        }
                        if seen.put(face) {
                            return Err(OgError::DuplicateFace { element, face });
                        }
                    }
                }
                if let Some(&face) = entry[0].iter().find(|f| entry[1].contains(f)) {
                    return Err(OgError::Overlap { element, face });
                }
                if entry[0].is_empty() && entry[1].is_empty() {
                    return Err(OgError::EmptyFaceSet {
                        element,
                        sign: Sign::Minus,
                    });
                }
            }
        }
        let mut offsets = vec![0];
        for layer in &raw {
            offsets.push(offsets.last().unwrap() + layer.len());
        }
        let mut dims = Vec::new();
        let mut faces = Vec::new();
        for (d, layer) in raw.into_iter().enumerate() {
            for entry in layer {
                dims.push(d);
                let base = if d == 0 { 0 } else { offsets[d - 1] };
                let [mut inp, mut out] = entry;
                inp.iter_mut().for_each(|f| *f += base);
                out.iter_mut().for_each(|f| *f += base);
                inp.sort_unstable();
                out.sort_unstable();
                faces.push([inp, out]);
            }
        }
        Ok(Self::assemble(offsets, dims, faces))
    }

    /// Builds from global data that is already known to be valid.
    pub(crate) fn assemble(
        offsets: Vec<usize>,
        dims: Vec<usize>,
        faces: Vec<[Vec<usize>; 2]>,
    ) -> Self {
        let mut cofaces = vec![[Vec::new(), Vec::new()]; dims.len()];
        for (x, fs) in faces.iter().enumerate() {
            for s in 0..2 {
                for &y in &fs[s] {
                    cofaces[y][s].push(x);
                }
            }
        }
        OgPoset {
            offsets,
            dims,
            faces,
            cofaces,
        }
    }

    pub fn empty() -> Self {
        Self::assemble(vec![0], Vec::new(), Vec::new())
    }

    pub fn point() -> Self {
        Self::assemble(vec![0, 1], vec![0], vec![[Vec::new(), Vec::new()]])
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Largest dimension of an element, or -1 when empty.
    pub fn dim(&self) -> isize {
        self.offsets.len() as isize - 2
    }

    /// Number of elements per dimension.
    pub fn counts(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn count(&self, d: usize) -> usize {
        if d + 1 < self.offsets.len() {
            self.offsets[d + 1] - self.offsets[d]
        } else {
            0
        }
    }

    /// Global indices of the elements of dimension `d`.
    pub fn of_dim(&self, d: usize) -> std::ops::Range<usize> {
        if d + 1 < self.offsets.len() {
            self.offsets[d]..self.offsets[d + 1]
        } else {
            0..0
        }
    }

    pub fn dim_of(&self, x: usize) -> usize {
        self.dims[x]
    }

    pub fn id(&self, x: usize) -> ElementId {
        let d = self.dims[x];
        ElementId::new(d, x - self.offsets[d])
    }

    pub fn global(&self, id: ElementId) -> Option<usize> {
        (id.index < self.count(id.dim)).then(|| self.offsets[id.dim] + id.index)
    }

    pub fn faces(&self, x: usize, sign: Sign) -> &[usize] {
        &self.faces[x][sign.slot()]
    }

    pub fn cofaces(&self, x: usize, sign: Sign) -> &[usize] {
        &self.cofaces[x][sign.slot()]
    }

    pub fn all_faces(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.faces[x][0].iter().chain(&self.faces[x][1]).copied()
    }

    pub fn all_cofaces(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.cofaces[x][0].iter().chain(&self.cofaces[x][1]).copied()
    }

    /// Face data in the local-index form accepted by [`OgPoset::new`].
    pub fn raw_faces(&self) -> Vec<Vec<RawFaces>> {
        self.counts()
            .iter()
            .enumerate()
            .map(|(d, _)| {
                self.of_dim(d)
                    .map(|x| {
                        let base = if d == 0 { 0 } else { self.offsets[d - 1] };
                        let local = |v: &Vec<usize>| v.iter().map(|f| f - base).collect();
                        [local(&self.faces[x][0]), local(&self.faces[x][1])]
                    })
                    .collect()
            })
            .collect()
    }

    pub fn empty_set(&self) -> ElementSet {
        FixedBitSet::with_capacity(self.len())
    }

    pub fn full_set(&self) -> ElementSet {
        let mut s = self.empty_set();
        s.insert_range(..);
        s
    }

    pub fn set_of(&self, elements: impl IntoIterator<Item = usize>) -> ElementSet {
        let mut s = self.empty_set();
        s.extend(elements);
        s
    }

    /// Smallest downward closed set containing `seeds`.
    pub fn closure(&self, seeds: impl IntoIterator<Item = usize>) -> ClosedSubset {
        let mut set = self.empty_set();
        let mut stack: Vec<usize> = seeds.into_iter().collect();
        while let Some(x) = stack.pop() {
            if set.put(x) {
                continue;
            }
            stack.extend(self.all_faces(x).filter(|&y| !set.contains(y)));
        }
        set
    }

    pub fn closure_of(&self, x: usize) -> ClosedSubset {
        self.closure([x])
    }

    pub fn is_closed(&self, set: &ElementSet) -> bool {
        set.ones().all(|x| self.all_faces(x).all(|y| set.contains(y)))
    }

    /// Dimension of a set of elements, -1 when empty.
    pub fn set_dim(&self, set: &ElementSet) -> isize {
        // Highest global index has the highest dimension.
        set.maximum().map_or(-1, |x| self.dims[x] as isize)
    }

    /// Elements of `set` that are not below another element of `set`.
    pub fn maximal(&self, set: &ElementSet) -> Vec<usize> {
        set.ones()
            .filter(|&x| !self.all_cofaces(x).any(|z| set.contains(z)))
            .collect()
    }

    /// The greatest element of a closed set, if there is one.
    pub fn greatest(&self, set: &ClosedSubset) -> Option<usize> {
        match self.maximal(set).as_slice() {
            [x] => Some(*x),
            _ => None,
        }
    }

    /// The `k`-dimensional elements of `set` that are not a `(-sign)`-face of
    /// any element of `set`.
    pub fn delta(&self, set: &ClosedSubset, k: usize, sign: Sign) -> Vec<usize> {
        let opposite = sign.flip();
        self.of_dim(k)
            .filter(|&y| set.contains(y))
            .filter(|&y| !self.cofaces(y, opposite).iter().any(|&z| set.contains(z)))
            .collect()
    }

    /// The `k`-boundary of a closed set in direction `sign`; empty for `k < 0`.
    pub fn boundary(&self, set: &ClosedSubset, k: isize, sign: Sign) -> ClosedSubset {
        if k < 0 {
            return self.empty_set();
        }
        let k = k as usize;
        let low = self.maximal(set).into_iter().filter(|&x| self.dims[x] < k);
        self.closure(self.delta(set, k, sign).into_iter().chain(low))
    }

    /// Union of the input and output `k`-boundaries.
    pub fn full_boundary(&self, set: &ClosedSubset, k: isize) -> ClosedSubset {
        let mut b = self.boundary(set, k, Sign::Minus);
        b.union_with(&self.boundary(set, k, Sign::Plus));
        b
    }

    /// The sub-poset on `set`, with the embedding from its global indices into
    /// ours. Relative order of elements is preserved.
    pub fn restrict(&self, set: &ElementSet) -> (OgPoset, Vec<usize>) {
        let embedding: Vec<usize> = set.ones().collect();
        let mut local = vec![usize::MAX; self.len()];
        for (i, &x) in embedding.iter().enumerate() {
            local[x] = i;
        }
        let mut offsets = vec![0];
        let mut dims = Vec::with_capacity(embedding.len());
        let mut faces = Vec::with_capacity(embedding.len());
        for &x in &embedding {
            let d = self.dims[x];
            while offsets.len() <= d + 1 {
                offsets.push(*offsets.last().unwrap());
            }
            offsets[d + 1] += 1;
            dims.push(d);
            let map = |v: &Vec<usize>| -> Vec<usize> {
                v.iter().filter(|&&y| set.contains(y)).map(|&y| local[y]).collect()
            };
            faces.push([map(&self.faces[x][0]), map(&self.faces[x][1])]);
        }
        (OgPoset::assemble(offsets, dims, faces), embedding)
    }

    /// The oriented Hasse diagram: an edge `x -> y` whenever `x` is an input
    /// face of `y` or `y` is an output face of `x`.
    pub fn oriented_hasse(&self) -> DiGraph<ElementId, ()> {
        let mut g = DiGraph::with_capacity(self.len(), 0);
        for x in 0..self.len() {
            g.add_node(self.id(x));
        }
        for y in 0..self.len() {
            for &x in self.faces(y, Sign::Minus) {
                g.add_edge(NodeIndex::new(x), NodeIndex::new(y), ());
            }
            for &z in self.faces(y, Sign::Plus) {
                g.add_edge(NodeIndex::new(y), NodeIndex::new(z), ());
            }
        }
        g
    }

    pub fn is_hasse_acyclic(&self) -> bool {
        !petgraph::algo::is_cyclic_directed(&self.oriented_hasse())
    }

    /// A directed cycle of the oriented Hasse diagram, if there is one.
    pub fn hasse_cycle(&self) -> Option<Vec<usize>> {
        let g = self.oriented_hasse();
        let comp = petgraph::algo::kosaraju_scc(&g).into_iter().find(|c| c.len() > 1)?;
        let inside: std::collections::HashSet<NodeIndex> = comp.iter().copied().collect();
        // Every node of a strong component has a successor inside it.
        let mut path = vec![comp[0]];
        loop {
            let last = *path.last().unwrap();
            let next = g.neighbors(last).find(|n| inside.contains(n)).unwrap();
            if let Some(pos) = path.iter().position(|&n| n == next) {
                return Some(path[pos..].iter().map(|n| n.index()).collect());
            }
            path.push(next);
        }
    }

    /// Whether the poset is a regular candidate: every positive-dimensional
    /// element has nonempty input and output faces.
    pub fn is_regular_candidate(&self) -> bool {
        (0..self.len())
            .filter(|&x| self.dims[x] > 0)
            .all(|x| !self.faces[x][0].is_empty() && !self.faces[x][1].is_empty())
    }

    pub fn format_set(&self, set: &ElementSet) -> String {
        let ids: Vec<String> = set.ones().map(|x| self.id(x).to_string()).collect();
        format!("{{{}}}", ids.join(","))
    }
}

/// Incremental construction of an [`OgPoset`] from elements given in any
/// order; elements are re-sorted by dimension, stably.
#[derive(Default)]
pub(crate) struct PosetBuilder {
    dims: Vec<usize>,
    faces: Vec<[Vec<usize>; 2]>,
}

impl PosetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an element whose faces are given as builder handles.
    pub fn add(&mut self, dim: usize, inputs: Vec<usize>, outputs: Vec<usize>) -> usize {
        self.dims.push(dim);
        self.faces.push([inputs, outputs]);
        self.dims.len() - 1
    }

    /// Finishes the poset; returns it with the map from handles to global indices.
    pub fn finish(self) -> (OgPoset, Vec<usize>) {
        let n = self.dims.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&h| self.dims[h]);
        let mut position = vec![0; n];
        for (g, &h) in order.iter().enumerate() {
            position[h] = g;
        }
        let top = self.dims.iter().copied().max();
        let mut offsets = vec![0];
        if let Some(top) = top {
            for d in 0..=top {
                let c = self.dims.iter().filter(|&&e| e == d).count();
                offsets.push(offsets.last().unwrap() + c);
            }
        }
        let dims = order.iter().map(|&h| self.dims[h]).collect();
        let faces = order
            .iter()
            .map(|&h| {
                let map = |v: &Vec<usize>| {
                    let mut out: Vec<usize> = v.iter().map(|&f| position[f]).collect();
                    out.sort_unstable();
                    out
                };
                [map(&self.faces[h][0]), map(&self.faces[h][1])]
            })
            .collect();
        (OgPoset::assemble(offsets, dims, faces), position)
    }
}
