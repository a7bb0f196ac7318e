//! Molecules: the inductive class generated by the point, pasting along
//! matching boundaries, and atoms over parallel round molecules.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::iso::{self, AmbiguityError, CanonicalKey};
use crate::ogposet::{ClosedSubset, OgPoset, PosetBuilder, Sign};
use crate::recognize::MoleculeContext;

/// A construction witnessing that a poset is a molecule.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Certificate {
    Point,
    Atom(Arc<Certificate>, Arc<Certificate>),
    Paste(usize, Arc<Certificate>, Arc<Certificate>),
}

impl Certificate {
    /// Rebuilds the molecule this certificate describes.
    pub fn replay(&self) -> Result<Molecule, MoleculeError> {
        match self {
            Certificate::Point => Ok(Molecule::point()),
            Certificate::Atom(a, b) => Molecule::atom(&a.replay()?, &b.replay()?),
            Certificate::Paste(k, a, b) => Molecule::paste(&a.replay()?, &b.replay()?, *k),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Certificate::Point => 0,
            Certificate::Atom(a, b) | Certificate::Paste(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::Point => write!(f, "pt"),
            Certificate::Atom(a, b) => write!(f, "({a} => {b})"),
            Certificate::Paste(k, a, b) => write!(f, "({a} #{k} {b})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoleculeError {
    #[error("boundaries do not match for pasting at {k}")]
    BoundaryMismatch { k: usize },
    #[error("{which} molecule is not round")]
    NotRound { which: &'static str },
    #[error("molecules are not parallel: {reason}")]
    NotParallel { reason: String },
    #[error("not a molecule")]
    NotAMolecule,
    #[error(transparent)]
    Ambiguous(#[from] AmbiguityError),
}

/// An oriented graded poset together with a certificate of molecularity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Molecule {
    poset: OgPoset,
    cert: Arc<Certificate>,
}

/// The result of a pasting, with the embeddings of both factors.
#[derive(Clone, Debug)]
pub struct Pasting {
    pub molecule: Molecule,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

/// Which factor an element of a join comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JoinPart {
    Left(usize),
    Right(usize),
    Both(usize, usize),
}

impl Molecule {
    /// Pairs a poset with a certificate without checking it; see
    /// [`Molecule::recognize`] for the checked route.
    pub fn from_parts_unchecked(poset: OgPoset, cert: Arc<Certificate>) -> Self {
        Molecule { poset, cert }
    }

    /// Recognizes `poset` as a molecule.
    pub fn recognize(poset: OgPoset) -> Result<Self, MoleculeError> {
        let cert = MoleculeContext::new(&poset)
            .certificate(&poset.full_set())
            .ok_or(MoleculeError::NotAMolecule)?;
        Ok(Molecule { poset, cert })
    }

    pub fn poset(&self) -> &OgPoset {
        &self.poset
    }

    pub fn certificate(&self) -> &Arc<Certificate> {
        &self.cert
    }

    pub fn into_poset(self) -> OgPoset {
        self.poset
    }

    pub fn dim(&self) -> isize {
        self.poset.dim()
    }

    pub fn len(&self) -> usize {
        self.poset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poset.is_empty()
    }

    pub fn full(&self) -> ClosedSubset {
        self.poset.full_set()
    }

    pub fn is_atom(&self) -> bool {
        self.poset.greatest(&self.full()).is_some()
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        iso::canonical_key(&self.poset)
    }

    pub fn boundary_set(&self, k: isize, sign: Sign) -> ClosedSubset {
        self.poset.boundary(&self.full(), k, sign)
    }

    /// The boundary as a molecule of its own (boundaries of molecules are molecules).
    pub fn boundary(&self, k: usize, sign: Sign) -> Molecule {
        if k as isize >= self.dim() {
            return self.clone();
        }
        let (sub, _) = self.poset.restrict(&self.boundary_set(k as isize, sign));
        Molecule::recognize(sub).expect("boundaries of molecules are molecules")
    }

    pub fn point() -> Self {
        Molecule {
            poset: OgPoset::point(),
            cert: Arc::new(Certificate::Point),
        }
    }

    pub fn arrow() -> Self {
        Self::globe(1)
    }

    pub fn globe(k: usize) -> Self {
        let mut g = Self::point();
        for _ in 0..k {
            g = Self::atom(&g, &g).expect("globes are parallel");
        }
        g
    }

    /// The path of `k` arrows; the point when `k = 0`.
    pub fn path(k: usize) -> Self {
        let mut p = Self::point();
        for i in 0..k {
            p = if i == 0 {
                Self::arrow()
            } else {
                Self::paste(&p, &Self::arrow(), 0).expect("paths compose")
            };
        }
        p
    }

    pub fn paste(u: &Molecule, v: &Molecule, k: usize) -> Result<Self, MoleculeError> {
        Ok(Self::paste_with_embeddings(u, v, k)?.molecule)
    }

    /// The pushout of `u` and `v` along `∂_k^+ u ≅ ∂_k^- v`.
    pub fn paste_with_embeddings(
        u: &Molecule,
        v: &Molecule,
        k: usize,
    ) -> Result<Pasting, MoleculeError> {
        let ki = k as isize;
        let bu = u.boundary_set(ki, Sign::Plus);
        let bv = v.boundary_set(ki, Sign::Minus);
        let (pu, eu) = u.poset.restrict(&bu);
        let (pv, ev) = v.poset.restrict(&bv);
        let f = iso::find_unique_iso(&pu, &pv)?.ok_or(MoleculeError::BoundaryMismatch { k })?;
        let mut v_to_u = vec![usize::MAX; v.len()];
        for (i, &j) in f.forward.iter().enumerate() {
            v_to_u[ev[j]] = eu[i];
        }
        let mut b = PosetBuilder::new();
        let mut left = Vec::with_capacity(u.len());
        for x in 0..u.len() {
            let h = b.add(
                u.poset.dim_of(x),
                u.poset.faces(x, Sign::Minus).iter().map(|&y| left[y]).collect(),
                u.poset.faces(x, Sign::Plus).iter().map(|&y| left[y]).collect(),
            );
            left.push(h);
        }
        let mut right = vec![usize::MAX; v.len()];
        for y in 0..v.len() {
            if v_to_u[y] != usize::MAX {
                right[y] = left[v_to_u[y]];
                continue;
            }
            right[y] = b.add(
                v.poset.dim_of(y),
                v.poset.faces(y, Sign::Minus).iter().map(|&z| right[z]).collect(),
                v.poset.faces(y, Sign::Plus).iter().map(|&z| right[z]).collect(),
            );
        }
        let (poset, pos) = b.finish();
        let left = left.into_iter().map(|h| pos[h]).collect();
        let right = right.into_iter().map(|h| pos[h]).collect();
        let cert = Arc::new(Certificate::Paste(k, u.cert.clone(), v.cert.clone()));
        Ok(Pasting {
            molecule: Molecule { poset, cert },
            left,
            right,
        })
    }

    /// The atom with input boundary `u` and output boundary `v`.
    pub fn atom(u: &Molecule, v: &Molecule) -> Result<Self, MoleculeError> {
        if u.dim() != v.dim() {
            return Err(MoleculeError::NotParallel {
                reason: format!("dimensions {} and {}", u.dim(), v.dim()),
            });
        }
        if !u.is_round() {
            return Err(MoleculeError::NotRound { which: "input" });
        }
        if !v.is_round() {
            return Err(MoleculeError::NotRound { which: "output" });
        }
        let n = u.dim() as usize;
        // Map the sphere ∂v into ∂u, one sign at a time.
        let mut v_to_u = vec![usize::MAX; v.len()];
        if n > 0 {
            for s in Sign::BOTH {
                let bu = u.boundary_set(n as isize - 1, s);
                let bv = v.boundary_set(n as isize - 1, s);
                let (pu, eu) = u.poset.restrict(&bu);
                let (pv, ev) = v.poset.restrict(&bv);
                let f = iso::find_unique_iso(&pu, &pv)?.ok_or_else(|| MoleculeError::NotParallel {
                    reason: format!("{}-boundaries differ", s.symbol()),
                })?;
                for (i, &j) in f.forward.iter().enumerate() {
                    let (x, y) = (eu[i], ev[j]);
                    if v_to_u[y] != usize::MAX && v_to_u[y] != x {
                        return Err(MoleculeError::NotParallel {
                            reason: "boundary identifications disagree".into(),
                        });
                    }
                    v_to_u[y] = x;
                }
            }
            let mut hit = vec![false; u.len()];
            for &x in v_to_u.iter().filter(|&&x| x != usize::MAX) {
                if std::mem::replace(&mut hit[x], true) {
                    return Err(MoleculeError::NotParallel {
                        reason: "boundary identifications are not injective".into(),
                    });
                }
            }
        }
        let mut b = PosetBuilder::new();
        let mut left = Vec::with_capacity(u.len());
        for x in 0..u.len() {
            let h = b.add(
                u.poset.dim_of(x),
                u.poset.faces(x, Sign::Minus).iter().map(|&y| left[y]).collect(),
                u.poset.faces(x, Sign::Plus).iter().map(|&y| left[y]).collect(),
            );
            left.push(h);
        }
        let mut right = vec![usize::MAX; v.len()];
        for y in 0..v.len() {
            if v_to_u[y] != usize::MAX {
                right[y] = left[v_to_u[y]];
                continue;
            }
            right[y] = b.add(
                v.poset.dim_of(y),
                v.poset.faces(y, Sign::Minus).iter().map(|&z| right[z]).collect(),
                v.poset.faces(y, Sign::Plus).iter().map(|&z| right[z]).collect(),
            );
        }
        let inputs = u.poset.of_dim(n).map(|x| left[x]).collect();
        let outputs = v.poset.of_dim(n).map(|y| right[y]).collect();
        b.add(n + 1, inputs, outputs);
        let (poset, _) = b.finish();
        let cert = Arc::new(Certificate::Atom(u.cert.clone(), v.cert.clone()));
        Ok(Molecule { poset, cert })
    }

    /// The suspension: two new points, everything else shifted up a dimension.
    pub fn suspension(&self) -> Molecule {
        let mut b = PosetBuilder::new();
        let south = b.add(0, vec![], vec![]);
        let north = b.add(0, vec![], vec![]);
        let mut handle = Vec::with_capacity(self.len());
        for x in 0..self.len() {
            let h = if self.poset.dim_of(x) == 0 {
                b.add(1, vec![south], vec![north])
            } else {
                b.add(
                    self.poset.dim_of(x) + 1,
                    self.poset.faces(x, Sign::Minus).iter().map(|&y| handle[y]).collect(),
                    self.poset.faces(x, Sign::Plus).iter().map(|&y| handle[y]).collect(),
                )
            };
            handle.push(h);
        }
        let (poset, _) = b.finish();
        Molecule {
            poset,
            cert: Arc::new(suspend_certificate(&self.cert)),
        }
    }

    pub fn join(u: &Molecule, v: &Molecule) -> Molecule {
        Self::join_with_parts(u, v).0
    }

    /// The join, with the provenance of every element.
    pub fn join_with_parts(u: &Molecule, v: &Molecule) -> (Molecule, Vec<JoinPart>) {
        let (pu, pv) = (&u.poset, &v.poset);
        let mut b = PosetBuilder::new();
        let mut parts = Vec::new();
        let mut hu = vec![0; pu.len()];
        let mut hv = vec![0; pv.len()];
        for x in 0..pu.len() {
            hu[x] = b.add(
                pu.dim_of(x),
                pu.faces(x, Sign::Minus).iter().map(|&y| hu[y]).collect(),
                pu.faces(x, Sign::Plus).iter().map(|&y| hu[y]).collect(),
            );
            parts.push(JoinPart::Left(x));
        }
        for y in 0..pv.len() {
            hv[y] = b.add(
                pv.dim_of(y),
                pv.faces(y, Sign::Minus).iter().map(|&z| hv[z]).collect(),
                pv.faces(y, Sign::Plus).iter().map(|&z| hv[z]).collect(),
            );
            parts.push(JoinPart::Right(y));
        }
        // Pairs are added in increasing dimension so faces exist already.
        let mut pairs: Vec<(usize, usize)> = (0..pu.len())
            .flat_map(|x| (0..pv.len()).map(move |y| (x, y)))
            .collect();
        pairs.sort_by_key(|&(x, y)| pu.dim_of(x) + pv.dim_of(y));
        let mut hp = vec![vec![0; pv.len()]; pu.len()];
        for (x, y) in pairs {
            let mut faces = [Vec::new(), Vec::new()];
            for s in Sign::BOTH {
                let out = &mut faces[s.slot()];
                out.extend(pu.faces(x, s).iter().map(|&x2| hp[x2][y]));
                if pu.dim_of(x) == 0 && s == Sign::Plus {
                    out.push(hv[y]);
                }
                let s2 = if pu.dim_of(x) % 2 == 1 { s } else { s.flip() };
                out.extend(pv.faces(y, s2).iter().map(|&y2| hp[x][y2]));
                if pv.dim_of(y) == 0 && s2 == Sign::Plus {
                    out.push(hu[x]);
                }
            }
            let [inputs, outputs] = faces;
            hp[x][y] = b.add(pu.dim_of(x) + pv.dim_of(y) + 1, inputs, outputs);
            parts.push(JoinPart::Both(x, y));
        }
        let (poset, pos) = b.finish();
        let mut ordered = vec![JoinPart::Left(0); parts.len()];
        for (h, part) in parts.into_iter().enumerate() {
            ordered[pos[h]] = part;
        }
        let m = Molecule::recognize(poset).expect("joins of molecules are molecules");
        (m, ordered)
    }

    /// The oriented `n`-simplex.
    pub fn oriental(n: usize) -> Molecule {
        Self::oriental_with_vertices(n).0
    }

    /// The oriented simplex with, for each element, its sorted vertex set.
    pub fn oriental_with_vertices(n: usize) -> (Molecule, Vec<Vec<usize>>) {
        let mut m = Self::point();
        let mut vertices = vec![vec![0]];
        for i in 1..=n {
            let (j, parts) = Self::join_with_parts(&m, &Self::point());
            vertices = parts
                .iter()
                .map(|p| match *p {
                    JoinPart::Left(x) => vertices[x].clone(),
                    JoinPart::Right(_) => vec![i],
                    JoinPart::Both(x, _) => {
                        let mut v = vertices[x].clone();
                        v.push(i);
                        v
                    }
                })
                .collect();
            m = j;
        }
        (m, vertices)
    }

    pub fn theta(tree: &PlanarTree) -> Molecule {
        if tree.children.is_empty() {
            return Self::point();
        }
        let mut acc: Option<Molecule> = None;
        for child in &tree.children {
            let s = Self::theta(child).suspension();
            acc = Some(match acc {
                None => s,
                Some(a) => Self::paste(&a, &s, 0).expect("suspensions compose at 0"),
            });
        }
        acc.unwrap()
    }

    /// Whether lower boundaries collapse: for all `k < dim`,
    /// `∂_{k-1}^- ∪ ∂_{k-1}^+ = ∂_k^- ∩ ∂_k^+`.
    pub fn is_round(&self) -> bool {
        is_round_set(&self.poset, &self.full())
    }

    /// Whether `v` lies in the closure of a single element.
    pub fn factors_through_atom(&self, v: &ClosedSubset) -> bool {
        factors_through_atom(&self.poset, v)
    }
}

pub(crate) fn is_round_set(p: &OgPoset, a: &ClosedSubset) -> bool {
    let n = p.set_dim(a);
    (0..n).all(|k| {
        let low = p.full_boundary(a, k - 1);
        let mut meet = p.boundary(a, k, Sign::Minus);
        meet.intersect_with(&p.boundary(a, k, Sign::Plus));
        low == meet
    })
}

pub fn factors_through_atom(p: &OgPoset, v: &ClosedSubset) -> bool {
    (0..p.len()).any(|x| v.is_subset(&p.closure_of(x)))
}

fn suspend_certificate(c: &Certificate) -> Certificate {
    match c {
        Certificate::Point => Certificate::Atom(
            Arc::new(Certificate::Point),
            Arc::new(Certificate::Point),
        ),
        Certificate::Atom(a, b) => Certificate::Atom(
            Arc::new(suspend_certificate(a)),
            Arc::new(suspend_certificate(b)),
        ),
        Certificate::Paste(k, a, b) => Certificate::Paste(
            k + 1,
            Arc::new(suspend_certificate(a)),
            Arc::new(suspend_certificate(b)),
        ),
    }
}

/// A planar rooted tree, written as nested parentheses: `()` is a leaf.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlanarTree {
    pub children: Vec<PlanarTree>,
}

impl PlanarTree {
    pub fn leaf() -> Self {
        PlanarTree { children: vec![] }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let tree = Self::parse_at(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(format!("trailing input at position {pos}"));
        }
        Ok(tree)
    }

    fn parse_at(chars: &[char], pos: &mut usize) -> Result<Self, String> {
        if chars.get(*pos) != Some(&'(') {
            return Err(format!("expected '(' at position {pos}"));
        }
        *pos += 1;
        let mut children = Vec::new();
        loop {
            match chars.get(*pos) {
                Some(')') => {
                    *pos += 1;
                    return Ok(PlanarTree { children });
                }
                Some('(') => children.push(Self::parse_at(chars, pos)?),
                Some(',') if !children.is_empty() => *pos += 1,
                Some(c) => return Err(format!("unexpected {c:?} at position {pos}")),
                None => return Err("unbalanced parentheses".into()),
            }
        }
    }
}

impl fmt::Display for PlanarTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.children.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
