//! Finite posets, order complexes and reduced integral homology.
//!
//! Boundary matrices are reduced with sparse unit-pivot elimination in
//! checked `i64` arithmetic; whatever is left (or everything, on overflow)
//! goes through a dense Smith normal form over `BigInt`.

use std::collections::{BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

/// A finite poset on `0..n`, stored as up-sets: `up[a]` holds every `b ≥ a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePoset {
    up: Vec<FixedBitSet>,
}

impl FinitePoset {
    /// Builds a poset from a relation that must already be a partial order.
    pub fn from_relation(n: usize, leq: impl Fn(usize, usize) -> bool) -> Self {
        let up = (0..n)
            .map(|a| {
                let mut s = FixedBitSet::with_capacity(n);
                s.extend((0..n).filter(|&b| a == b || leq(a, b)));
                s
            })
            .collect();
        FinitePoset { up }
    }

    /// Whether the stored relation is reflexive, antisymmetric and transitive.
    pub fn is_partial_order(&self) -> bool {
        let n = self.len();
        (0..n).all(|a| self.leq(a, a))
            && (0..n).all(|a| (0..n).all(|b| a == b || !(self.leq(a, b) && self.leq(b, a))))
            && (0..n).all(|a| self.up[a].ones().all(|b| self.up[b].is_subset(&self.up[a])))
    }

    pub fn len(&self) -> usize {
        self.up.len()
    }

    pub fn is_empty(&self) -> bool {
        self.up.is_empty()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.up[a].contains(b)
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    /// Covering pairs `(a, b)` with `a < b` and nothing strictly between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in self.up[a].ones().filter(|&b| b != a) {
                if !(0..n).any(|c| c != a && c != b && self.lt(a, c) && self.lt(c, b)) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// The induced subposet on `keep`, renumbered in the given order.
    pub fn induced(&self, keep: &[usize]) -> FinitePoset {
        FinitePoset::from_relation(keep.len(), |i, j| self.leq(keep[i], keep[j]))
    }

    pub fn maximum(&self) -> Option<usize> {
        (0..self.len()).find(|&m| (0..self.len()).all(|a| self.leq(a, m)))
    }

    pub fn minimum(&self) -> Option<usize> {
        (0..self.len()).find(|&m| self.up[m].count_ones(..) == self.len())
    }

    /// Number of connected components of the comparability graph.
    pub fn components(&self) -> usize {
        let n = self.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut y = x;
            while parent[y] != r {
                let next = parent[y];
                parent[y] = r;
                y = next;
            }
            r
        }
        for a in 0..n {
            for b in self.up[a].ones() {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
        (0..n).filter(|&x| find(&mut parent, x) == x).count()
    }

    /// A beat point of the subposet on `alive`: an element whose strict
    /// up-set has a minimum or whose strict down-set has a maximum.
    fn beat_point(&self, alive: &[usize]) -> Option<usize> {
        alive.iter().copied().find(|&x| {
            let above: Vec<usize> = alive.iter().copied().filter(|&y| self.lt(x, y)).collect();
            let below: Vec<usize> = alive.iter().copied().filter(|&y| self.lt(y, x)).collect();
            above.iter().any(|&m| above.iter().all(|&y| self.leq(m, y)))
                || below.iter().any(|&m| below.iter().all(|&y| self.leq(y, m)))
        })
    }

    /// The core left after removing beat points one at a time, as a list of
    /// surviving elements. Its order complex is homotopy equivalent to ours.
    pub fn core(&self) -> Vec<usize> {
        let mut alive: Vec<usize> = (0..self.len()).collect();
        while alive.len() > 1 {
            match self.beat_point(&alive) {
                Some(x) => alive.retain(|&y| y != x),
                None => break,
            }
        }
        alive
    }

    /// Whether beat-point removal reaches a single point.
    pub fn is_dismantlable(&self) -> bool {
        self.core().len() == 1
    }

    /// A linear extension of the order.
    fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        // Fewer elements above means later; ties broken by index.
        order.sort_by_key(|&a| (std::cmp::Reverse(self.up[a].count_ones(..)), a));
        order
    }

    /// The order complex: simplices are chains, as sorted lists of elements
    /// read bottom to top. Grouped by dimension.
    pub fn nerve(&self) -> SimplicialComplex {
        let ext = self.linear_extension();
        let mut rank = vec![0; self.len()];
        for (i, &a) in ext.iter().enumerate() {
            rank[a] = i;
        }
        let mut simplices: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut chain = Vec::new();
        for &a in &ext {
            self.extend_chains(a, &ext, &rank, &mut chain, &mut simplices);
        }
        SimplicialComplex { simplices }
    }

    fn extend_chains(
        &self,
        a: usize,
        ext: &[usize],
        rank: &[usize],
        chain: &mut Vec<usize>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        chain.push(a);
        let d = chain.len() - 1;
        if out.len() <= d {
            out.push(Vec::new());
        }
        out[d].push(chain.iter().map(|&x| rank[x]).collect());
        for &b in &ext[rank[a] + 1..] {
            if self.lt(a, b) {
                self.extend_chains(b, ext, rank, chain, out);
            }
        }
        chain.pop();
    }
}

/// An abstract simplicial complex; each simplex is a sorted vertex list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimplicialComplex {
    pub simplices: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    /// Closes a family of simplices under faces.
    pub fn from_facets(facets: &[Vec<usize>]) -> Self {
        let mut by_dim: Vec<BTreeSet<Vec<usize>>> = Vec::new();
        for f in facets {
            let mut f = f.clone();
            f.sort_unstable();
            f.dedup();
            let n = f.len();
            for mask in 1u64..(1 << n) {
                let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| f[i]).collect();
                let d = s.len() - 1;
                while by_dim.len() <= d {
                    by_dim.push(BTreeSet::new());
                }
                by_dim[d].insert(s);
            }
        }
        SimplicialComplex {
            simplices: by_dim.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.first().is_none_or(|v| v.is_empty())
    }

    pub fn count(&self) -> usize {
        self.simplices.iter().map(Vec::len).sum()
    }
}

/// Reduced integral homology.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Homology {
    /// Free rank of reduced `H_i`, for `i` from 0 to the top dimension.
    pub reduced_betti: Vec<usize>,
    /// Invariant factors greater than one of reduced `H_i`.
    pub torsion: Vec<Vec<String>>,
}

impl Homology {
    pub fn is_acyclic(&self) -> bool {
        self.reduced_betti.iter().all(|&b| b == 0) && self.torsion.iter().all(Vec::is_empty)
    }
}

/// Reduced homology of a nonempty complex (the empty complex has reduced
/// homology in degree -1, which is not represented here).
pub fn homology(k: &SimplicialComplex) -> Homology {
    let top = k.simplices.len();
    let counts: Vec<usize> = k.simplices.iter().map(Vec::len).collect();
    // rank[i] and torsion[i] for the boundary map C_i -> C_{i-1}, i in 0..=top.
    let mut ranks = vec![0usize; top + 1];
    let mut tors: Vec<Vec<BigInt>> = vec![Vec::new(); top + 1];
    if top > 0 {
        // The augmentation has rank one on a nonempty complex.
        ranks[0] = usize::from(counts[0] > 0);
    }
    for d in 1..top {
        let index: HashMap<&[usize], usize> = k.simplices[d - 1]
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i))
            .collect();
        let mut entries = Vec::new();
        for (j, s) in k.simplices[d].iter().enumerate() {
            for i in 0..s.len() {
                let mut face = s.clone();
                face.remove(i);
                let sign = if i % 2 == 0 { 1 } else { -1 };
                entries.push((j, index[face.as_slice()], sign));
            }
        }
        let (r, t) = smith_rank_torsion(counts[d], counts[d - 1], entries);
        ranks[d] = r;
        tors[d] = t;
    }
    let reduced_betti = (0..top)
        .map(|i| counts[i] - ranks[i] - ranks[i + 1])
        .collect();
    let torsion = (0..top)
        .map(|i| tors[i + 1].iter().map(|t| t.to_string()).collect())
        .collect();
    Homology {
        reduced_betti,
        torsion,
    }
}

/// Rank and nontrivial invariant factors of a sparse integer matrix given by
/// `(row, col, value)` triples (duplicates are summed).
pub fn smith_rank_torsion(rows: usize, cols: usize, entries: Vec<(usize, usize, i64)>) -> (usize, Vec<BigInt>) {
    let mut row_data: Vec<Vec<(usize, i64)>> = vec![Vec::new(); rows];
    for (r, c, v) in entries {
        row_data[r].push((c, v));
    }
    for row in &mut row_data {
        row.sort_unstable();
        let mut merged: Vec<(usize, i64)> = Vec::with_capacity(row.len());
        for &(c, v) in row.iter() {
            match merged.last_mut() {
                Some((lc, lv)) if *lc == c => *lv += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0);
        *row = merged;
    }
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); cols];
    for (r, row) in row_data.iter().enumerate() {
        for &(c, _) in row {
            col_rows[c].insert(r);
        }
    }
    let mut alive = vec![true; rows];
    let mut rank = 0;
    let mut overflow = false;
    let mut progress = true;
    while progress && !overflow {
        progress = false;
        for c in 0..cols {
            let pivot = col_rows[c]
                .iter()
                .copied()
                .filter(|&r| entry(&row_data[r], c).abs() == 1)
                .min_by_key(|&r| row_data[r].len());
            let Some(p) = pivot else { continue };
            let prow = row_data[p].clone();
            let pc = entry(&prow, c);
            let targets: Vec<usize> = col_rows[c].iter().copied().filter(|&r| r != p).collect();
            let mut updates = Vec::with_capacity(targets.len());
            for &r in &targets {
                let factor = entry(&row_data[r], c) * pc;
                match axpy(&row_data[r], &prow, factor) {
                    Some(new) => updates.push((r, new)),
                    None => {
                        overflow = true;
                        break;
                    }
                }
            }
            if overflow {
                break;
            }
            for (r, new) in updates {
                for &(cc, _) in &row_data[r] {
                    col_rows[cc].remove(&r);
                }
                for &(cc, _) in &new {
                    col_rows[cc].insert(r);
                }
                row_data[r] = new;
            }
            for &(cc, _) in &prow {
                col_rows[cc].remove(&p);
            }
            alive[p] = false;
            row_data[p].clear();
            rank += 1;
            progress = true;
        }
    }
    // Dense remainder.
    let rest: Vec<usize> = (0..rows).filter(|&r| alive[r] && !row_data[r].is_empty()).collect();
    if rest.is_empty() {
        return (rank, Vec::new());
    }
    let used: BTreeSet<usize> = rest.iter().flat_map(|&r| row_data[r].iter().map(|&(c, _)| c)).collect();
    let col_index: HashMap<usize, usize> = used.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut dense = vec![vec![BigInt::zero(); used.len()]; rest.len()];
    for (i, &r) in rest.iter().enumerate() {
        for &(c, v) in &row_data[r] {
            dense[i][col_index[&c]] = BigInt::from(v);
        }
    }
    let diag = dense_smith(dense);
    let torsion: Vec<BigInt> = diag.iter().filter(|d| !d.is_one()).cloned().collect();
    (rank + diag.len(), torsion)
}

fn entry(row: &[(usize, i64)], c: usize) -> i64 {
    row.binary_search_by_key(&c, |&(cc, _)| cc).map_or(0, |i| row[i].1)
}

/// `row - factor * pivot`, or `None` on overflow.
fn axpy(row: &[(usize, i64)], pivot: &[(usize, i64)], factor: i64) -> Option<Vec<(usize, i64)>> {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let take_row = j >= pivot.len() || (i < row.len() && row[i].0 < pivot[j].0);
        let take_piv = i >= row.len() || (j < pivot.len() && pivot[j].0 < row[i].0);
        let (c, v) = if take_row {
            i += 1;
            row[i - 1]
        } else if take_piv {
            j += 1;
            (pivot[j - 1].0, factor.checked_mul(pivot[j - 1].1)?.checked_neg()?)
        } else {
            i += 1;
            j += 1;
            let v = row[i - 1].1.checked_sub(factor.checked_mul(pivot[j - 1].1)?)?;
            (row[i - 1].0, v)
        };
        if v != 0 {
            out.push((c, v));
        }
    }
    Some(out)
}

/// Nonzero diagonal of the Smith normal form, up to sign (all positive).
#[allow(clippy::needless_range_loop)]
pub fn dense_smith(mut m: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest nonzero entry of the remaining block as pivot.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[i][j].is_zero()
                    && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if m[i][t].is_zero() {
                    continue;
                }
                let q = &m[i][t] / &m[t][t];
                for j in t..cols {
                    let v = &q * &m[t][j];
                    m[i][j] -= v;
                }
                if !m[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if m[t][j].is_zero() {
                    continue;
                }
                let q = &m[t][j] / &m[t][t];
                for i in t..rows {
                    let v = &q * &m[i][t];
                    m[i][j] -= v;
                }
                if !m[t][j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                // Divisibility: fold any offending row into row t.
                let offending = (t + 1..rows).find(|&i| {
                    (t + 1..cols).any(|j| !(&m[i][j] % &m[t][t]).is_zero())
                });
                match offending {
                    None => break,
                    Some(i) => {
                        for j in t..cols {
                            let v = m[i][j].clone();
                            m[t][j] += v;
                        }
                        continue;
                    }
                }
            }
            // Move the smallest nonzero entry of row/column t to the pivot.
            let mut best = (t, t);
            for i in t..rows {
                if !m[i][t].is_zero() && m[i][t].abs() < m[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if !m[t][j].is_zero() && m[t][j].abs() < m[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            m.swap(t, best.0);
            for row in m.iter_mut() {
                row.swap(t, best.1);
            }
        }
        diag.push(m[t][t].abs());
        t += 1;
    }
    diag
}

/// Contractibility evidence for a finite poset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyReport {
    pub empty: bool,
    pub size: usize,
    pub connected: bool,
    pub components: usize,
    pub reduced_betti: Vec<usize>,
    pub torsion: Vec<Vec<String>>,
    pub dismantlable: bool,
    /// Size of the poset whose order complex was actually reduced; beat
    /// points are removed first, which does not change the homotopy type.
    pub core_size: usize,
}

impl HomologyReport {
    pub fn is_acyclic(&self) -> bool {
        self.reduced_betti.iter().all(|&b| b == 0) && self.torsion.iter().all(Vec::is_empty)
    }
}

/// Homology of the order complex of `p`, computed on its beat-point core.
pub fn poset_report(p: &FinitePoset) -> HomologyReport {
    if p.is_empty() {
        return HomologyReport {
            empty: true,
            size: 0,
            connected: false,
            components: 0,
            reduced_betti: Vec::new(),
            torsion: Vec::new(),
            dismantlable: false,
            core_size: 0,
        };
    }
    let core = p.core();
    let h = homology(&p.induced(&core).nerve());
    let components = p.components();
    HomologyReport {
        empty: false,
        size: p.len(),
        connected: components == 1,
        components,
        reduced_betti: h.reduced_betti,
        torsion: h.torsion,
        dismantlable: core.len() == 1,
        core_size: core.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn antichain(n: usize) -> FinitePoset {
        FinitePoset::from_relation(n, |_, _| false)
    }

    /// {a, b} < {c, d}, every lower element below every upper one.
    fn crown() -> FinitePoset {
        FinitePoset::from_relation(4, |a, b| a < 2 && b >= 2)
    }

    #[test]
    fn nerve_examples() {
        let k = antichain(2).nerve();
        assert_eq!(k.simplices.len(), 1);
        assert_eq!(k.simplices[0].len(), 2);
        let k = crown().nerve();
        assert_eq!(k.simplices.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 4]);
    }

    #[test]
    fn homology_examples() {
        let h = homology(&antichain(2).nerve());
        assert_eq!(h.reduced_betti, vec![1]);
        let h = homology(&crown().nerve());
        assert_eq!(h.reduced_betti, vec![0, 1]);
        // A cone: a maximum above an antichain.
        let cone = FinitePoset::from_relation(4, |a, b| b == 3 && a < 3);
        let h = homology(&cone.nerve());
        assert!(h.is_acyclic());
        assert!(cone.is_dismantlable());
        assert!(!crown().is_dismantlable());
    }

    #[test]
    fn torsion_of_projective_plane() {
        // The standard 6-vertex triangulation of the real projective plane.
        let facets: Vec<Vec<usize>> = [
            [0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 5, 1],
            [1, 2, 4], [2, 3, 5], [3, 4, 1], [4, 5, 2], [5, 1, 3],
        ]
        .iter()
        .map(|f| f.to_vec())
        .collect();
        let h = homology(&SimplicialComplex::from_facets(&facets));
        assert_eq!(h.reduced_betti, vec![0, 0, 0]);
        assert_eq!(h.torsion, vec![vec![], vec!["2".to_string()], vec![]]);
    }

    #[test]
    fn sphere_homology() {
        // Boundary of a tetrahedron.
        let facets: Vec<Vec<usize>> = vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]];
        let h = homology(&SimplicialComplex::from_facets(&facets));
        assert_eq!(h.reduced_betti, vec![0, 0, 1]);
    }

    #[test]
    fn dense_smith_examples() {
        let m = |v: Vec<Vec<i64>>| v.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
        assert_eq!(dense_smith(m(vec![vec![2, 4], vec![6, 8]])), vec![BigInt::from(2), BigInt::from(4)]);
        assert_eq!(dense_smith(m(vec![vec![2, 0], vec![0, 3]])), vec![BigInt::from(1), BigInt::from(6)]);
        assert_eq!(dense_smith(m(vec![vec![0, 0]])), Vec::<BigInt>::new());
    }

    #[test]
    fn report_uses_core() {
        let chain = FinitePoset::from_relation(5, |a, b| a <= b);
        let r = poset_report(&chain);
        assert!(r.connected && r.dismantlable && r.is_acyclic());
        assert_eq!(r.core_size, 1);
        let r = poset_report(&crown());
        assert_eq!(r.reduced_betti, vec![0, 1]);
        assert!(poset_report(&antichain(0)).empty);
    }
}
