//! Directed complexes as cell complexes over atoms, and pasting diagrams in them.
//!
//! A cell of dimension `n` has an atom of dimension `n` as its shape and an
//! attachment sending each element of the shape to a cell, with the top
//! element sent to the cell itself. Attachments need not be injective; the
//! complex is regular when they all are.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::flow::frame_acyclicity;
use crate::iso::{self, CanonicalKey};
use crate::molecule::{Molecule, MoleculeError};
use crate::ogposet::{ElementId, OgPoset, Sign};
use crate::recognize::MoleculeContext;

/// Cells are addressed like elements: dimension and index within it.
pub type CellId = ElementId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub shape: Arc<Molecule>,
    /// Target cell of every element of the shape, by global index.
    pub attach: Vec<CellId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("cell {cell}: shape is not an atom of dimension {}", cell.dim)]
    ShapeNotAtom { cell: CellId },
    #[error("cell {cell}: attachment has {got} entries, shape has {expected} elements")]
    AttachmentLength { cell: CellId, got: usize, expected: usize },
    #[error("cell {cell}: element {element} is attached to {target}, which is missing or of the wrong dimension")]
    BadTarget { cell: CellId, element: ElementId, target: CellId },
    #[error("cell {cell}: the top element must be attached to the cell itself")]
    TopNotSelf { cell: CellId },
    #[error("cell {cell}: attachment at {element} disagrees with cell {target}")]
    IncompatibleAttachment { cell: CellId, element: ElementId, target: CellId },
    #[error("simplex {simplex}: semi-simplicial identity fails for faces {i} < {j}")]
    IdentityViolation { simplex: CellId, i: usize, j: usize },
    #[error("simplex {simplex}: face index out of range")]
    BadFace { simplex: CellId },
    #[error("pasting diagram labels do not match along the shared boundary")]
    LabelMismatch,
    #[error("pasting diagram labelling is inconsistent at element {element}")]
    InconsistentLabels { element: ElementId },
    #[error(transparent)]
    Molecule(#[from] MoleculeError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DirectedComplex {
    cells: Vec<Vec<Cell>>,
}

/// For element `x` of `p`, an isomorphism from `shape` onto `cl(x)`, as a map
/// from shape indices to indices of `p`.
fn closure_iso(p: &OgPoset, x: usize, shape: &OgPoset) -> Option<Vec<usize>> {
    let (sub, emb) = p.restrict(&p.closure_of(x));
    let f = iso::find_iso(shape, &sub)?;
    Some(f.forward.iter().map(|&i| emb[i]).collect())
}

impl DirectedComplex {
    /// Validates shapes, attachment targets and compatibility.
    pub fn new(cells: Vec<Vec<Cell>>) -> Result<Self, ComplexError> {
        let mut cells = cells;
        while cells.last().is_some_and(Vec::is_empty) {
            cells.pop();
        }
        let x = DirectedComplex { cells };
        for (d, layer) in x.cells.iter().enumerate() {
            for (i, c) in layer.iter().enumerate() {
                x.check_cell(CellId::new(d, i), c)?;
            }
        }
        Ok(x)
    }

    fn check_cell(&self, id: CellId, c: &Cell) -> Result<(), ComplexError> {
        let p = c.shape.poset();
        let top = p
            .greatest(&p.full_set())
            .filter(|&t| p.dim_of(t) == id.dim)
            .ok_or(ComplexError::ShapeNotAtom { cell: id })?;
        if c.attach.len() != p.len() {
            return Err(ComplexError::AttachmentLength {
                cell: id,
                got: c.attach.len(),
                expected: p.len(),
            });
        }
        for (x, &t) in c.attach.iter().enumerate() {
            if t.dim != p.dim_of(x) || self.cell(t).is_none() {
                return Err(ComplexError::BadTarget {
                    cell: id,
                    element: p.id(x),
                    target: t,
                });
            }
        }
        if c.attach[top] != id {
            return Err(ComplexError::TopNotSelf { cell: id });
        }
        for x in (0..p.len()).filter(|&x| x != top) {
            let target = c.attach[x];
            let q = self.cell(target).unwrap();
            let incompatible = ComplexError::IncompatibleAttachment {
                cell: id,
                element: p.id(x),
                target,
            };
            let phi = closure_iso(p, x, q.shape.poset()).ok_or(incompatible.clone())?;
            if phi.iter().enumerate().any(|(y, &px)| c.attach[px] != q.attach[y]) {
                return Err(incompatible);
            }
        }
        Ok(())
    }

    pub fn cell(&self, id: CellId) -> Option<&Cell> {
        self.cells.get(id.dim)?.get(id.index)
    }

    pub fn cells(&self) -> &[Vec<Cell>] {
        &self.cells
    }

    pub fn cell_ids(&self) -> impl Iterator<Item = CellId> + '_ {
        self.cells
            .iter()
            .enumerate()
            .flat_map(|(d, l)| (0..l.len()).map(move |i| CellId::new(d, i)))
    }

    pub fn dim(&self) -> isize {
        self.cells.len() as isize - 1
    }

    pub fn len(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cells of dimension at most `n`; empty for negative `n`.
    pub fn skeleton(&self, n: isize) -> DirectedComplex {
        let keep = (n + 1).max(0) as usize;
        DirectedComplex {
            cells: self.cells.iter().take(keep).cloned().collect(),
        }
    }

    /// Whether every attachment is injective.
    pub fn is_regular(&self) -> bool {
        self.cells.iter().flatten().all(|c| {
            let distinct: HashSet<&CellId> = c.attach.iter().collect();
            distinct.len() == c.attach.len()
        })
    }

    /// Whether every cell shape has an acyclic oriented Hasse diagram.
    pub fn atoms_acyclic(&self) -> bool {
        self.cells.iter().flatten().all(|c| c.shape.poset().is_hasse_acyclic())
    }

    fn global_index(&self, id: CellId) -> u32 {
        (self.cells[..id.dim].iter().map(Vec::len).sum::<usize>() + id.index) as u32
    }

    /// The diagram consisting of a single cell.
    pub fn cell_diagram(&self, id: CellId) -> PastingDiagram {
        let c = self.cell(id).expect("cell exists");
        PastingDiagram {
            shape: (*c.shape).clone(),
            labels: c.attach.clone(),
        }
    }

    /// Checks that a labelling agrees with the attachments of its cells.
    pub fn check_diagram(&self, d: &PastingDiagram) -> Result<(), ComplexError> {
        let p = d.shape.poset();
        for x in 0..p.len() {
            let bad = ComplexError::InconsistentLabels { element: p.id(x) };
            let q = self.cell(d.labels[x]).ok_or(bad.clone())?;
            if d.labels[x].dim != p.dim_of(x) {
                return Err(bad);
            }
            let phi = closure_iso(p, x, q.shape.poset()).ok_or(bad.clone())?;
            if phi.iter().enumerate().any(|(y, &px)| d.labels[px] != q.attach[y]) {
                return Err(bad);
            }
        }
        Ok(())
    }

    pub fn diagram_key(&self, d: &PastingDiagram) -> CanonicalKey {
        let labels: Vec<u32> = d.labels.iter().map(|&c| self.global_index(c)).collect();
        iso::canonical_form(d.shape.poset(), Some(&labels)).0
    }

    /// All pasting diagrams with at most `max_cells` maximal elements, up to
    /// labelled isomorphism: cells closed under pasting. Sorted by size, then key.
    pub fn enumerate_molecules(&self, max_cells: usize) -> Vec<PastingDiagram> {
        let mut all: Vec<PastingDiagram> = Vec::new();
        let mut keys: HashMap<CanonicalKey, usize> = HashMap::new();
        // (k, sign, boundary key) -> diagrams with that boundary
        let mut by_boundary: HashMap<(usize, Sign, CanonicalKey), Vec<usize>> = HashMap::new();
        let mut queue: Vec<usize> = Vec::new();
        let mut add = |d: PastingDiagram, all: &mut Vec<PastingDiagram>, queue: &mut Vec<usize>| {
            let key = self.diagram_key(&d);
            if let std::collections::hash_map::Entry::Vacant(e) = keys.entry(key) {
                e.insert(all.len());
                queue.push(all.len());
                all.push(d);
            }
        };
        if max_cells == 0 {
            return all;
        }
        for id in self.cell_ids().collect::<Vec<_>>() {
            add(self.cell_diagram(id), &mut all, &mut queue);
        }
        let mut head = 0;
        while head < queue.len() {
            let f = queue[head];
            head += 1;
            let fd = all[f].shape.dim().max(0) as usize;
            // Index f before pairing so that f can be pasted with itself.
            let mut fkeys = Vec::new();
            for k in 0..fd {
                for s in Sign::BOTH {
                    let b = all[f].boundary(k, s).expect("boundaries of diagrams exist");
                    let key = (k, s, self.diagram_key(&b));
                    by_boundary.entry(key.clone()).or_default().push(f);
                    fkeys.push(key);
                }
            }
            let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
            for (k, s, key) in fkeys {
                let partners = by_boundary.get(&(k, s.flip(), key)).cloned().unwrap_or_default();
                for g in partners {
                    if s == Sign::Plus {
                        candidates.push((f, g, k));
                    } else {
                        candidates.push((g, f, k));
                    }
                }
            }
            // Pasting along k >= dim of either factor returns the other, so
            // only k below both dimensions needs pairing.
            for (a, b, k) in candidates {
                let Ok(d) = all[a].paste(&all[b], k) else { continue };
                if d.maximal_count() <= max_cells {
                    add(d, &mut all, &mut queue);
                }
            }
        }
        let mut out = all;
        out.sort_by_cached_key(|d| (d.maximal_count(), d.shape.dim(), self.diagram_key(d)));
        out
    }

    /// Whether every molecule over the complex is frame-acyclic, proved when
    /// possible and otherwise checked up to `budget` maximal elements.
    pub fn has_frame_acyclic_molecules(&self, budget: usize) -> Verdict {
        if self.atoms_acyclic() {
            return Verdict::ProvenByAcyclicAtoms;
        }
        if self.dim() <= 3 {
            return Verdict::ProvenByDimension;
        }
        for d in self.enumerate_molecules(budget) {
            let p = d.shape.poset();
            if frame_acyclicity(&mut MoleculeContext::new(p), &p.full_set()).is_err() {
                return Verdict::Counterexample(Box::new(d));
            }
        }
        Verdict::CheckedUpToBudget(budget)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    ProvenByAcyclicAtoms,
    ProvenByDimension,
    CheckedUpToBudget(usize),
    Counterexample(Box<PastingDiagram>),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        !matches!(self, Verdict::Counterexample(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::ProvenByAcyclicAtoms => "proven-by-acyclic-atoms",
            Verdict::ProvenByDimension => "proven-by-dimension",
            Verdict::CheckedUpToBudget(_) => "checked-up-to-budget",
            Verdict::Counterexample(_) => "counterexample",
        }
    }
}

/// A molecule labelled by cells of a complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PastingDiagram {
    pub shape: Molecule,
    pub labels: Vec<CellId>,
}

impl PastingDiagram {
    pub fn maximal_count(&self) -> usize {
        self.shape.poset().maximal(&self.shape.full()).len()
    }

    /// Restriction to the `k`-boundary of the shape.
    pub fn boundary(&self, k: usize, sign: Sign) -> Result<PastingDiagram, ComplexError> {
        let p = self.shape.poset();
        let set = p.boundary(&self.shape.full(), k as isize, sign);
        let (sub, emb) = p.restrict(&set);
        let shape = Molecule::recognize(sub)?;
        Ok(PastingDiagram {
            shape,
            labels: emb.iter().map(|&x| self.labels[x]).collect(),
        })
    }

    /// Pastes along matching labelled boundaries.
    pub fn paste(&self, other: &PastingDiagram, k: usize) -> Result<PastingDiagram, ComplexError> {
        let glued = Molecule::paste_with_embeddings(&self.shape, &other.shape, k)?;
        let mut labels: Vec<Option<CellId>> = vec![None; glued.molecule.len()];
        for (x, &g) in glued.left.iter().enumerate() {
            labels[g] = Some(self.labels[x]);
        }
        for (y, &g) in glued.right.iter().enumerate() {
            match labels[g] {
                Some(l) if l != other.labels[y] => return Err(ComplexError::LabelMismatch),
                _ => labels[g] = Some(other.labels[y]),
            }
        }
        Ok(PastingDiagram {
            shape: glued.molecule,
            labels: labels.into_iter().map(Option::unwrap).collect(),
        })
    }

    /// Whether the labelling is injective on the closure of every element.
    pub fn is_locally_injective(&self) -> bool {
        let p = self.shape.poset();
        (0..p.len()).all(|x| {
            let cl: Vec<usize> = p.closure_of(x).ones().collect();
            let distinct: HashSet<CellId> = cl.iter().map(|&y| self.labels[y]).collect();
            distinct.len() == cl.len()
        })
    }
}

/// A semi-simplicial set: `counts[n]` simplices in dimension `n`, and for
/// `n ≥ 1` the faces of each simplex, face `j` omitting vertex `j`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SemiSimplicialSet {
    pub counts: Vec<usize>,
    pub faces: Vec<Vec<Vec<usize>>>,
}

impl SemiSimplicialSet {
    /// The standard `n`-simplex: simplices are the nonempty subsets of `0..=n`.
    pub fn standard(n: usize) -> Self {
        let mut by_dim: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n + 1];
        for mask in 1u32..(1 << (n + 1)) {
            let s: Vec<usize> = (0..=n).filter(|i| mask >> i & 1 == 1).collect();
            by_dim[s.len() - 1].push(s);
        }
        for l in &mut by_dim {
            l.sort();
        }
        let mut faces = vec![Vec::new()];
        for d in 1..=n {
            let lower = &by_dim[d - 1];
            faces.push(
                by_dim[d]
                    .iter()
                    .map(|s| {
                        (0..s.len())
                            .map(|j| {
                                let mut f = s.clone();
                                f.remove(j);
                                lower.binary_search(&f).unwrap()
                            })
                            .collect()
                    })
                    .collect(),
            );
        }
        SemiSimplicialSet {
            counts: by_dim.iter().map(Vec::len).collect(),
            faces,
        }
    }

    /// The face of simplex `s` of dimension `d` obtained by dropping the
    /// vertices not in `keep` (positions, sorted).
    fn face_by_vertices(&self, d: usize, s: usize, keep: &[usize]) -> (usize, usize) {
        let mut cur = s;
        let mut dim = d;
        for j in (0..=d).rev().filter(|j| !keep.contains(j)) {
            cur = self.faces[dim][cur][j];
            dim -= 1;
        }
        (dim, cur)
    }

    pub fn check(&self) -> Result<(), ComplexError> {
        for d in 1..self.counts.len() {
            for s in 0..self.counts[d] {
                let simplex = CellId::new(d, s);
                let f = self.faces.get(d).and_then(|l| l.get(s)).ok_or(ComplexError::BadFace { simplex })?;
                if f.len() != d + 1 || f.iter().any(|&t| t >= self.counts[d - 1]) {
                    return Err(ComplexError::BadFace { simplex });
                }
            }
        }
        for d in 2..self.counts.len() {
            for s in 0..self.counts[d] {
                for j in 0..=d {
                    for i in 0..j {
                        let lhs = self.faces[d - 1][self.faces[d][s][j]][i];
                        let rhs = self.faces[d - 1][self.faces[d][s][i]][j - 1];
                        if lhs != rhs {
                            return Err(ComplexError::IdentityViolation {
                                simplex: CellId::new(d, s),
                                i,
                                j,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Each `n`-simplex becomes a cell shaped like the oriented `n`-simplex.
    pub fn to_complex(&self) -> Result<DirectedComplex, ComplexError> {
        self.check()?;
        let mut shapes: Vec<(Arc<Molecule>, Vec<Vec<usize>>)> = Vec::new();
        let mut cells = Vec::new();
        for (d, &count) in self.counts.iter().enumerate() {
            let (m, verts) = Molecule::oriental_with_vertices(d);
            shapes.push((Arc::new(m), verts));
            let (shape, verts) = &shapes[d];
            let layer = (0..count)
                .map(|s| Cell {
                    shape: shape.clone(),
                    attach: verts
                        .iter()
                        .map(|t| {
                            let (fd, fi) = self.face_by_vertices(d, s, t);
                            CellId::new(fd, fi)
                        })
                        .collect(),
                })
                .collect();
            cells.push(layer);
        }
        DirectedComplex::new(cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two vertices with an edge each way.
    fn loop_graph() -> DirectedComplex {
        let arrow = Arc::new(Molecule::arrow());
        let v = CellId::new;
        let point = Arc::new(Molecule::point());
        DirectedComplex::new(vec![
            vec![
                Cell { shape: point.clone(), attach: vec![v(0, 0)] },
                Cell { shape: point, attach: vec![v(0, 1)] },
            ],
            vec![
                Cell { shape: arrow.clone(), attach: vec![v(0, 0), v(0, 1), v(1, 0)] },
                Cell { shape: arrow, attach: vec![v(0, 1), v(0, 0), v(1, 1)] },
            ],
        ])
        .unwrap()
    }

    fn one_loop() -> DirectedComplex {
        let v = CellId::new;
        DirectedComplex::new(vec![
            vec![Cell { shape: Arc::new(Molecule::point()), attach: vec![v(0, 0)] }],
            vec![Cell { shape: Arc::new(Molecule::arrow()), attach: vec![v(0, 0), v(0, 0), v(1, 0)] }],
        ])
        .unwrap()
    }

    #[test]
    fn validation() {
        assert!(loop_graph().is_regular());
        assert!(!one_loop().is_regular());
        let single = DirectedComplex::new(vec![vec![Cell {
            shape: Arc::new(Molecule::point()),
            attach: vec![CellId::new(0, 0)],
        }]])
        .unwrap();
        assert_eq!(single.len(), 1);
        let not_atom = DirectedComplex::new(vec![
            vec![Cell { shape: Arc::new(Molecule::point()), attach: vec![CellId::new(0, 0)] }],
            vec![Cell { shape: Arc::new(Molecule::path(2)), attach: vec![CellId::new(0, 0); 5] }],
        ]);
        assert!(matches!(not_atom, Err(ComplexError::ShapeNotAtom { .. })));
    }

    #[test]
    fn incompatible_attachment_rejected() {
        // A 2-cell whose boundary edges are attached inconsistently with the
        // endpoints of the edges they name.
        let v = CellId::new;
        let point = Arc::new(Molecule::point());
        let arrow = Arc::new(Molecule::arrow());
        let globe = Arc::new(Molecule::globe(2));
        let base = vec![
            vec![
                Cell { shape: point.clone(), attach: vec![v(0, 0)] },
                Cell { shape: point, attach: vec![v(0, 1)] },
            ],
            vec![
                Cell { shape: arrow.clone(), attach: vec![v(0, 0), v(0, 1), v(1, 0)] },
                Cell { shape: arrow, attach: vec![v(0, 1), v(0, 0), v(1, 1)] },
            ],
        ];
        let mut bad = base.clone();
        bad.push(vec![Cell { shape: globe.clone(), attach: vec![v(0, 0), v(0, 1), v(1, 0), v(1, 1), v(2, 0)] }]);
        assert!(matches!(
            DirectedComplex::new(bad),
            Err(ComplexError::IncompatibleAttachment { .. })
        ));
        let mut good = base;
        good.push(vec![Cell { shape: globe, attach: vec![v(0, 0), v(0, 1), v(1, 0), v(1, 0), v(2, 0)] }]);
        assert!(DirectedComplex::new(good).is_ok());
    }

    #[test]
    fn skeleta() {
        let x = loop_graph();
        assert!(x.skeleton(-1).is_empty());
        assert_eq!(x.skeleton(0).len(), 2);
        assert_eq!(x.skeleton(x.dim()), x);
    }

    #[test]
    fn loop_graph_diagrams() {
        let x = loop_graph();
        let a = x.cell_diagram(CellId::new(1, 0));
        let b = x.cell_diagram(CellId::new(1, 1));
        let ab = a.paste(&b, 0).unwrap();
        assert_eq!(ab.shape.poset().counts(), vec![3, 2]);
        let aba = ab.paste(&a, 0).unwrap();
        let edges: Vec<CellId> = aba.shape.poset().of_dim(1).map(|e| aba.labels[e]).collect();
        assert_eq!(edges, vec![CellId::new(1, 0), CellId::new(1, 1), CellId::new(1, 0)]);
        assert!(matches!(a.paste(&a, 0), Err(ComplexError::LabelMismatch)));
        assert!(x.check_diagram(&aba).is_ok());
        assert!(aba.is_locally_injective());
        let all = x.enumerate_molecules(3);
        assert_eq!(all.len(), 2 + 6);
        assert_eq!(x.has_frame_acyclic_molecules(3), Verdict::ProvenByAcyclicAtoms);
    }

    #[test]
    fn one_loop_is_not_locally_injective() {
        let x = one_loop();
        let e = x.cell_diagram(CellId::new(1, 0));
        assert!(!e.is_locally_injective());
        let ee = e.paste(&e, 0).unwrap();
        assert_eq!(ee.shape.poset().counts(), vec![3, 2]);
        assert_eq!(x.enumerate_molecules(5).len(), 1 + 5);
    }

    #[test]
    fn path_complex_diagrams_are_intervals() {
        for k in 1..=4usize {
            let x = crate::fixtures::molecule_complex(&Molecule::path(k));
            let arrows = x.enumerate_molecules(k).into_iter().filter(|d| d.shape.dim() == 1).count();
            assert_eq!(arrows, k * (k + 1) / 2);
        }
    }

    #[test]
    fn diagram_boundaries_follow_shapes() {
        let x = SemiSimplicialSet::standard(3).to_complex().unwrap();
        for d in x.enumerate_molecules(2) {
            assert!(x.check_diagram(&d).is_ok());
            for k in 0..d.shape.dim().max(0) as usize {
                for s in Sign::BOTH {
                    let b = d.boundary(k, s).unwrap();
                    assert_eq!(b.shape.canonical_key(), d.shape.boundary(k, s).canonical_key());
                    assert!(x.check_diagram(&b).is_ok());
                    // Pasting with its own boundary gives the diagram back.
                    let back = if s == Sign::Minus { b.paste(&d, k) } else { d.paste(&b, k) }.unwrap();
                    assert_eq!(x.diagram_key(&back), x.diagram_key(&d));
                }
            }
        }
    }

    #[test]
    fn simplices_import() {
        for n in 0..=3 {
            let s = SemiSimplicialSet::standard(n);
            let x = s.to_complex().unwrap();
            assert_eq!(x.len(), (1 << (n + 1)) - 1);
            assert!(x.atoms_acyclic());
            assert!(x.is_regular());
        }
        let mut broken = SemiSimplicialSet::standard(2);
        broken.faces[2][0].swap(0, 1);
        assert!(matches!(broken.to_complex(), Err(ComplexError::IdentityViolation { .. })));
        assert!(SemiSimplicialSet::default().to_complex().unwrap().is_empty());
    }
}
