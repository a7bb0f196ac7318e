//! Colour refinement, canonical keys and isomorphism search.
//!
//! Canonical keys use individualization/refinement: colour classes are refined
//! from dimension and face/coface colour multisets until stable, then the first
//! non-singleton class is split on each of its members in turn and the
//! lexicographically least serialization wins. Automorphism-rich inputs make
//! this exponential, which is fine at the sizes we handle (molecules have no
//! nontrivial automorphisms at all).

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::ogposet::{OgPoset, Sign};

/// Canonical serialization of an oriented graded poset (optionally labelled).
/// Two posets have equal keys iff they are isomorphic (preserving labels).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(pub Vec<u32>);

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let words: Vec<String> = self.0.iter().map(|w| format!("{w:x}")).collect();
        f.write_str(&words.join("."))
    }
}

/// An orientation-preserving isomorphism, as a map of global indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OgIso {
    pub forward: Vec<usize>,
}

impl OgIso {
    pub fn identity(n: usize) -> Self {
        OgIso {
            forward: (0..n).collect(),
        }
    }

    pub fn apply(&self, x: usize) -> usize {
        self.forward[x]
    }

    pub fn inverse(&self) -> OgIso {
        let mut back = vec![0; self.forward.len()];
        for (x, &y) in self.forward.iter().enumerate() {
            back[y] = x;
        }
        OgIso { forward: back }
    }

    /// Checks that this really is an isomorphism `p -> q`.
    pub fn is_valid(&self, p: &OgPoset, q: &OgPoset) -> bool {
        if p.len() != q.len() || self.forward.len() != p.len() {
            return false;
        }
        let mut hit = vec![false; q.len()];
        for (x, &y) in self.forward.iter().enumerate() {
            if y >= q.len() || hit[y] || p.dim_of(x) != q.dim_of(y) {
                return false;
            }
            hit[y] = true;
            for s in Sign::BOTH {
                let mut image: Vec<usize> = p.faces(x, s).iter().map(|&f| self.forward[f]).collect();
                image.sort_unstable();
                if image != q.faces(y, s) {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("found two distinct isomorphisms between posets that were expected to be molecules")]
pub struct AmbiguityError;

fn rank<T: Ord + Clone>(values: &[T]) -> Vec<u32> {
    let mut sorted: Vec<T> = values.to_vec();
    sorted.sort();
    sorted.dedup();
    values
        .iter()
        .map(|v| sorted.binary_search(v).unwrap() as u32)
        .collect()
}

fn class_count(colors: &[u32]) -> usize {
    let mut seen = colors.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Refines `colors` to the coarsest equitable partition below it. Colours are
/// dense ranks and the refinement is isomorphism-invariant.
fn refine(p: &OgPoset, mut colors: Vec<u32>) -> Vec<u32> {
    let mut classes = class_count(&colors);
    loop {
        let signatures: Vec<Vec<u32>> = (0..p.len())
            .map(|x| {
                let mut sig = vec![colors[x]];
                let groups = [
                    p.faces(x, Sign::Minus),
                    p.faces(x, Sign::Plus),
                    p.cofaces(x, Sign::Minus),
                    p.cofaces(x, Sign::Plus),
                ];
                for g in groups {
                    let mut c: Vec<u32> = g.iter().map(|&y| colors[y]).collect();
                    c.sort_unstable();
                    sig.push(u32::MAX);
                    sig.extend(c);
                }
                sig
            })
            .collect();
        colors = rank(&signatures);
        let next = class_count(&colors);
        if next == classes {
            return colors;
        }
        classes = next;
    }
}

fn initial_colors(p: &OgPoset, labels: Option<&[u32]>) -> Vec<u32> {
    let base: Vec<(usize, u32)> = (0..p.len())
        .map(|x| (p.dim_of(x), labels.map_or(0, |l| l[x])))
        .collect();
    rank(&base)
}

/// Serializes `p` relabelled by the discrete colouring `order`.
fn serialize(p: &OgPoset, order: &[u32], labels: Option<&[u32]>) -> Vec<u32> {
    let n = p.len();
    let mut by_pos = vec![0usize; n];
    for (x, &c) in order.iter().enumerate() {
        by_pos[c as usize] = x;
    }
    let mut out = vec![n as u32];
    out.extend(p.counts().iter().map(|&c| c as u32));
    for &x in &by_pos {
        for s in Sign::BOTH {
            let mut f: Vec<u32> = p.faces(x, s).iter().map(|&y| order[y]).collect();
            f.sort_unstable();
            out.push(f.len() as u32);
            out.extend(f);
        }
        if let Some(l) = labels {
            out.push(l[x]);
        }
    }
    out
}

fn individualize(colors: &[u32], target: u32, pick: usize) -> Vec<u32> {
    let doubled: Vec<(u32, u32)> = colors
        .iter()
        .enumerate()
        .map(|(x, &c)| (c, u32::from(c == target && x != pick)))
        .collect();
    rank(&doubled)
}

fn search(
    p: &OgPoset,
    colors: Vec<u32>,
    labels: Option<&[u32]>,
    best: &mut Option<(Vec<u32>, Vec<u32>)>,
) {
    let colors = refine(p, colors);
    let mut members: HashMap<u32, Vec<usize>> = HashMap::new();
    for (x, &c) in colors.iter().enumerate() {
        members.entry(c).or_default().push(x);
    }
    let target = members
        .iter()
        .filter(|(_, v)| v.len() > 1)
        .map(|(&c, _)| c)
        .min();
    match target {
        None => {
            let key = serialize(p, &colors, labels);
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                *best = Some((key, colors));
            }
        }
        Some(c) => {
            for &pick in &members[&c] {
                search(p, individualize(&colors, c, pick), labels, best);
            }
        }
    }
}

/// Canonical labelling: returns the key and, for each element, its position
/// in canonical order.
pub fn canonical_form(p: &OgPoset, labels: Option<&[u32]>) -> (CanonicalKey, Vec<u32>) {
    let mut best = None;
    search(p, initial_colors(p, labels), labels, &mut best);
    let (key, order) = best.unwrap_or_default();
    (CanonicalKey(key), order)
}

pub fn canonical_key(p: &OgPoset) -> CanonicalKey {
    canonical_form(p, None).0
}

fn disjoint_union(p: &OgPoset, q: &OgPoset) -> OgPoset {
    let mut raw = p.raw_faces();
    for (d, layer) in q.raw_faces().into_iter().enumerate() {
        if raw.len() <= d {
            raw.push(Vec::new());
        }
        let shift = if d == 0 { 0 } else { p.count(d - 1) };
        raw[d].extend(
            layer
                .into_iter()
                .map(|[a, b]| [a.iter().map(|f| f + shift).collect(), b.iter().map(|f| f + shift).collect()]),
        );
    }
    OgPoset::new(raw, crate::ogposet::Validation::Plain).expect("union of valid posets")
}

/// All isomorphisms `p -> q` (up to `limit`), preserving labels when given.
pub fn isomorphisms(
    p: &OgPoset,
    q: &OgPoset,
    labels: Option<(&[u32], &[u32])>,
    limit: usize,
) -> Vec<OgIso> {
    if p.counts() != q.counts() || limit == 0 {
        return Vec::new();
    }
    let n = p.len();
    if n == 0 {
        return vec![OgIso::identity(0)];
    }
    // Refine both posets jointly so their colours are comparable.
    let u = disjoint_union(p, q);
    let to_u_p: Vec<usize> = (0..n)
        .map(|x| {
            let id = p.id(x);
            u.global(id).unwrap()
        })
        .collect();
    let to_u_q: Vec<usize> = (0..n)
        .map(|y| {
            let id = q.id(y);
            u.global(crate::ogposet::ElementId::new(id.dim, id.index + p.count(id.dim)))
                .unwrap()
        })
        .collect();
    let mut joint_labels = vec![0u32; u.len()];
    if let Some((lp, lq)) = labels {
        for x in 0..n {
            joint_labels[to_u_p[x]] = lp[x];
            joint_labels[to_u_q[x]] = lq[x];
        }
    }
    let colors = refine(&u, initial_colors(&u, labels.map(|_| joint_labels.as_slice())));
    let cp: Vec<u32> = to_u_p.iter().map(|&i| colors[i]).collect();
    let cq: Vec<u32> = to_u_q.iter().map(|&i| colors[i]).collect();
    let mut hist_p = cp.clone();
    let mut hist_q = cq.clone();
    hist_p.sort_unstable();
    hist_q.sort_unstable();
    if hist_p != hist_q {
        return Vec::new();
    }
    // Assign top-down, so that each element's cofaces are already mapped.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| std::cmp::Reverse(p.dim_of(x)));
    let mut state = Backtrack {
        p,
        q,
        cp: &cp,
        cq: &cq,
        order: &order,
        map: vec![usize::MAX; n],
        used: vec![false; n],
        found: Vec::new(),
        limit,
    };
    state.extend(0);
    state.found
}

struct Backtrack<'a> {
    p: &'a OgPoset,
    q: &'a OgPoset,
    cp: &'a [u32],
    cq: &'a [u32],
    order: &'a [usize],
    map: Vec<usize>,
    used: Vec<bool>,
    found: Vec<OgIso>,
    limit: usize,
}

impl Backtrack<'_> {
    fn consistent(&self, x: usize, y: usize) -> bool {
        for s in Sign::BOTH {
            let mapped = self.p.cofaces(x, s).iter().map(|&z| self.map[z]);
            if mapped.clone().any(|fz| !self.q.faces(fz, s).contains(&y)) {
                return false;
            }
            if self.p.cofaces(x, s).len() != self.q.cofaces(y, s).len() {
                return false;
            }
        }
        true
    }

    fn extend(&mut self, pos: usize) {
        if self.found.len() >= self.limit {
            return;
        }
        if pos == self.order.len() {
            self.found.push(OgIso {
                forward: self.map.clone(),
            });
            return;
        }
        let x = self.order[pos];
        // Candidates: faces of an already mapped coface if there is one.
        let candidates: Vec<usize> = match Sign::BOTH
            .iter()
            .find_map(|&s| self.p.cofaces(x, s).first().map(|&z| (s, z)))
        {
            Some((s, z)) => self.q.faces(self.map[z], s).to_vec(),
            None => self.q.of_dim(self.p.dim_of(x)).collect(),
        };
        for y in candidates {
            if self.used[y] || self.cq[y] != self.cp[x] || !self.consistent(x, y) {
                continue;
            }
            self.map[x] = y;
            self.used[y] = true;
            self.extend(pos + 1);
            self.used[y] = false;
            self.map[x] = usize::MAX;
        }
    }
}

/// Some isomorphism `p -> q`, if any.
pub fn find_iso(p: &OgPoset, q: &OgPoset) -> Option<OgIso> {
    isomorphisms(p, q, None, 1).pop()
}

/// Isomorphism between posets expected to be molecules; errors if it is not unique.
pub fn find_unique_iso(p: &OgPoset, q: &OgPoset) -> Result<Option<OgIso>, AmbiguityError> {
    let mut found = isomorphisms(p, q, None, 2);
    match found.len() {
        0 => Ok(None),
        1 => Ok(found.pop()),
        _ => Err(AmbiguityError),
    }
}
