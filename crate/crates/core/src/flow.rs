//! Frame dimension, maximal flow graphs, pre-layerings and pre-orderings.
//!
//! Everything here works on a closed subset `a` of an ambient poset, so the
//! same code serves whole molecules and their submolecules.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::ogposet::{ClosedSubset, OgPoset, Sign};
use crate::recognize::MoleculeContext;

/// Dimension of the union of `cl x ∩ cl y` over distinct maximal `x, y`;
/// -1 when there is at most one maximal element.
pub fn frame_dim(p: &OgPoset, a: &ClosedSubset) -> isize {
    let maxima = p.maximal(a);
    let closures: Vec<ClosedSubset> = maxima.iter().map(|&x| p.closure_of(x)).collect();
    let mut best = -1;
    for i in 0..closures.len() {
        for j in i + 1..closures.len() {
            let mut meet = closures[i].clone();
            meet.intersect_with(&closures[j]);
            best = best.max(p.set_dim(&meet));
        }
    }
    best
}

/// Maximal elements of `a` of dimension above `k`, in index order.
pub fn high_maxima(p: &OgPoset, a: &ClosedSubset, k: isize) -> Vec<usize> {
    p.maximal(a)
        .into_iter()
        .filter(|&x| p.dim_of(x) as isize > k)
        .collect()
}

/// The maximal `k`-flow graph. Vertices and edge endpoints are global indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlowGraph {
    pub k: isize,
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl FlowGraph {
    pub fn new(p: &OgPoset, a: &ClosedSubset, k: isize) -> Self {
        let vertices = high_maxima(p, a, k);
        let mut edges = Vec::new();
        if k >= 0 {
            let ku = k as usize;
            let frames: Vec<[Vec<usize>; 2]> = vertices
                .iter()
                .map(|&x| {
                    let cl = p.closure_of(x);
                    [p.delta(&cl, ku, Sign::Minus), p.delta(&cl, ku, Sign::Plus)]
                })
                .collect();
            for (i, &x) in vertices.iter().enumerate() {
                for (j, &y) in vertices.iter().enumerate() {
                    if i != j && frames[i][1].iter().any(|e| frames[j][0].contains(e)) {
                        edges.push((x, y));
                    }
                }
            }
        }
        FlowGraph { k, vertices, edges }
    }

    fn local_edges(&self) -> Vec<(usize, usize)> {
        let pos: HashMap<usize, usize> = self.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        self.edges.iter().map(|(x, y)| (pos[x], pos[y])).collect()
    }

    /// A directed cycle, as a list of vertices, if there is one.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for (i, j) in self.local_edges() {
            adj[i].push(j);
        }
        // 0 = new, 1 = on stack, 2 = done
        let mut state = vec![0u8; n];
        let mut stack: Vec<usize> = Vec::new();
        fn dfs(v: usize, adj: &[Vec<usize>], state: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
            state[v] = 1;
            stack.push(v);
            for &w in &adj[v] {
                if state[w] == 1 {
                    let start = stack.iter().position(|&u| u == w).unwrap();
                    return Some(stack[start..].to_vec());
                }
                if state[w] == 0 {
                    if let Some(c) = dfs(w, adj, state, stack) {
                        return Some(c);
                    }
                }
            }
            stack.pop();
            state[v] = 2;
            None
        }
        for v in 0..n {
            if state[v] == 0 {
                if let Some(c) = dfs(v, &adj, &mut state, &mut stack) {
                    return Some(c.into_iter().map(|i| self.vertices[i]).collect());
                }
            }
        }
        None
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Ordered partitions of the vertices with every edge going weakly forward.
    pub fn pre_orderings(&self) -> Vec<OrderedPartition> {
        let n = self.vertices.len();
        assert!(n < 64, "flow graph too large to enumerate");
        let mut into = vec![0u64; n];
        for (i, j) in self.local_edges() {
            into[j] |= 1 << i;
        }
        let mut out = Vec::new();
        let mut blocks = Vec::new();
        let all = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
        self.partitions_from(all, &into, &mut blocks, &mut out);
        out
    }

    fn partitions_from(
        &self,
        remaining: u64,
        into: &[u64],
        blocks: &mut Vec<u64>,
        out: &mut Vec<OrderedPartition>,
    ) {
        if remaining == 0 {
            out.push(OrderedPartition {
                blocks: blocks
                    .iter()
                    .map(|&b| bits(b).map(|i| self.vertices[i]).collect())
                    .collect(),
            });
            return;
        }
        // Enumerate nonempty submasks of `remaining`, ascending.
        let mut sub: u64 = 0;
        loop {
            sub = (sub.wrapping_sub(remaining)) & remaining;
            if sub == 0 {
                break;
            }
            let rest = remaining & !sub;
            if bits(sub).all(|i| into[i] & rest == 0) {
                blocks.push(sub);
                self.partitions_from(rest, into, blocks, out);
                blocks.pop();
            }
        }
    }

    /// Topological sorts, as partitions into singletons.
    pub fn orderings(&self) -> Vec<OrderedPartition> {
        self.pre_orderings()
            .into_iter()
            .filter(|o| o.blocks.iter().all(|b| b.len() == 1))
            .collect()
    }
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// A linearly ordered partition; each block is sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OrderedPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl OrderedPartition {
    /// `self ≤ other`: `other` refines `self`, i.e. each block of `self` is the
    /// union of a run of consecutive blocks of `other`.
    pub fn leq(&self, other: &OrderedPartition) -> bool {
        let mut theirs = other.blocks.iter();
        for block in &self.blocks {
            let mut acc: Vec<usize> = Vec::new();
            while acc.len() < block.len() {
                let Some(b) = theirs.next() else { return false };
                if !b.iter().all(|v| block.contains(v)) {
                    return false;
                }
                acc.extend(b);
            }
        }
        theirs.next().is_none()
    }

    pub fn is_compatible(&self, graph: &FlowGraph) -> bool {
        let mut index = HashMap::new();
        for (i, b) in self.blocks.iter().enumerate() {
            for &v in b {
                index.insert(v, i);
            }
        }
        index.len() == graph.vertices.len()
            && graph.vertices.iter().all(|v| index.contains_key(v))
            && graph.edges.iter().all(|(x, y)| index[x] <= index[y])
    }
}

/// A decomposition of `a` as a `k`-pasting of submolecules of dimension above `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PreLayering {
    pub k: isize,
    pub layers: Vec<ClosedSubset>,
}

impl PreLayering {
    /// `self ≤ other`: `other` refines `self`.
    pub fn leq(&self, other: &PreLayering) -> bool {
        let mut theirs = other.layers.iter();
        for layer in &self.layers {
            let Some(first) = theirs.next() else { return false };
            if !first.is_subset(layer) {
                return false;
            }
            let mut acc = first.clone();
            while acc != *layer {
                let Some(next) = theirs.next() else { return false };
                if !next.is_subset(layer) {
                    return false;
                }
                acc.union_with(next);
            }
        }
        theirs.next().is_none()
    }

    /// The associated pre-ordering: block `i` holds the high maximal elements
    /// lying in layer `i`.
    pub fn to_ordering(&self, p: &OgPoset, a: &ClosedSubset) -> OrderedPartition {
        let high = high_maxima(p, a, self.k);
        OrderedPartition {
            blocks: self
                .layers
                .iter()
                .map(|l| high.iter().copied().filter(|&x| l.contains(x)).collect())
                .collect(),
        }
    }
}

/// All `k`-pre-layerings of the molecule `a`, in a deterministic order.
pub fn pre_layerings(ctx: &mut MoleculeContext<'_>, a: &ClosedSubset, k: isize) -> Vec<PreLayering> {
    if k < 0 {
        return vec![PreLayering {
            k,
            layers: vec![a.clone()],
        }];
    }
    let mut memo = HashMap::new();
    let mut seqs: Vec<PreLayering> = sequences(ctx, a, k as usize, &mut memo)
        .iter()
        .map(|layers| PreLayering {
            k,
            layers: layers.clone(),
        })
        .collect();
    seqs.sort_by(|x, y| x.layers.len().cmp(&y.layers.len()).then_with(|| x.cmp(y)));
    seqs
}

type Sequences = Arc<Vec<Vec<ClosedSubset>>>;

fn sequences(
    ctx: &mut MoleculeContext<'_>,
    a: &ClosedSubset,
    k: usize,
    memo: &mut HashMap<ClosedSubset, Sequences>,
) -> Sequences {
    if let Some(s) = memo.get(a) {
        return s.clone();
    }
    let mut out = vec![vec![a.clone()]];
    for split in ctx.splits(a, k).iter() {
        for rest in sequences(ctx, &split.right, k, memo).iter() {
            let mut seq = vec![split.left.clone()];
            seq.extend(rest.iter().cloned());
            out.push(seq);
        }
    }
    let out = Arc::new(out);
    memo.insert(a.clone(), out.clone());
    out
}

/// Pre-layerings with one layer per high maximal element.
pub fn layerings(ctx: &mut MoleculeContext<'_>, a: &ClosedSubset, k: isize) -> Vec<PreLayering> {
    let m = high_maxima(ctx.poset(), a, k).len();
    pre_layerings(ctx, a, k)
        .into_iter()
        .filter(|l| l.layers.len() == m)
        .collect()
}

/// A submolecule whose flow graph at its own frame dimension has a cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameCycle {
    pub submolecule: ClosedSubset,
    pub r: isize,
    pub cycle: Vec<usize>,
}

/// Checks frame-acyclicity of the molecule `a`, returning an offending
/// submolecule on failure.
pub fn frame_acyclicity(ctx: &mut MoleculeContext<'_>, a: &ClosedSubset) -> Result<(), FrameCycle> {
    let p = ctx.poset();
    for sub in ctx.submolecules(a) {
        let r = frame_dim(p, &sub.subset);
        if let Some(cycle) = FlowGraph::new(p, &sub.subset, r).find_cycle() {
            return Err(FrameCycle {
                submolecule: sub.subset,
                r,
                cycle,
            });
        }
    }
    Ok(())
}

pub fn is_frame_acyclic(ctx: &mut MoleculeContext<'_>, a: &ClosedSubset) -> bool {
    frame_acyclicity(ctx, a).is_ok()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// Outcome of comparing pre-layerings with pre-orderings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayeringReport {
    pub k: isize,
    pub layerings: usize,
    pub orderings: usize,
    pub pre_layerings: usize,
    pub pre_orderings: usize,
    pub iso: bool,
    pub counterexample: Option<String>,
}

/// Checks that the comparison map from pre-layerings to pre-orderings is
/// injective and order-preserving, and that its values are pre-orderings.
/// Needs no frame-acyclicity.
pub fn check_comparison_map(ctx: &mut MoleculeContext<'_>, a: &ClosedSubset, k: isize) -> Result<(), String> {
    let p = ctx.poset();
    let graph = FlowGraph::new(p, a, k);
    let pls = pre_layerings(ctx, a, k);
    let images: Vec<OrderedPartition> = pls.iter().map(|l| l.to_ordering(p, a)).collect();
    for (l, o) in pls.iter().zip(&images) {
        if !o.is_compatible(&graph) || o.blocks.iter().any(|b| b.is_empty()) {
            return Err(format!("image of {} is not a pre-ordering", describe(p, l)));
        }
    }
    let mut seen = HashMap::new();
    for (i, o) in images.iter().enumerate() {
        if let Some(j) = seen.insert(o.clone(), i) {
            return Err(format!(
                "pre-layerings {} and {} have the same image",
                describe(p, &pls[j]),
                describe(p, &pls[i])
            ));
        }
    }
    for i in 0..pls.len() {
        for j in 0..pls.len() {
            if pls[i].leq(&pls[j]) && !images[i].leq(&images[j]) {
                return Err(format!(
                    "{} <= {} but images are not ordered",
                    describe(p, &pls[i]),
                    describe(p, &pls[j])
                ));
            }
        }
    }
    Ok(())
}

pub fn describe(p: &OgPoset, l: &PreLayering) -> String {
    let layers: Vec<String> = l.layers.iter().map(|s| p.format_set(s)).collect();
    format!("[{}]", layers.join(&format!(" #{} ", l.k)))
}

/// Compares layerings with orderings at `k` for a frame-acyclic molecule
/// with `frame_dim ≤ k < dim`.
pub fn check_layering_theory(
    ctx: &mut MoleculeContext<'_>,
    a: &ClosedSubset,
    k: usize,
) -> Result<LayeringReport, FlowError> {
    let p = ctx.poset();
    let ki = k as isize;
    let fr = frame_dim(p, a);
    let dim = p.set_dim(a);
    if ki < fr || ki >= dim {
        return Err(FlowError::PreconditionViolated(format!(
            "k = {k} is outside [{fr}, {}]",
            dim - 1
        )));
    }
    if let Err(c) = frame_acyclicity(ctx, a) {
        return Err(FlowError::PreconditionViolated(format!(
            "not frame-acyclic: submolecule {} has a flow cycle",
            p.format_set(&c.submolecule)
        )));
    }
    let graph = FlowGraph::new(p, a, ki);
    let pls = pre_layerings(ctx, a, ki);
    let pos = graph.pre_orderings();
    let lays: Vec<&PreLayering> = pls.iter().filter(|l| l.layers.len() == graph.vertices.len()).collect();
    let ords: Vec<&OrderedPartition> = pos.iter().filter(|o| o.blocks.iter().all(|b| b.len() == 1)).collect();
    let mut report = LayeringReport {
        k: ki,
        layerings: lays.len(),
        orderings: ords.len(),
        pre_layerings: pls.len(),
        pre_orderings: pos.len(),
        iso: false,
        counterexample: None,
    };
    let fail = |mut r: LayeringReport, why: String| {
        r.counterexample = Some(why);
        Ok(r)
    };
    if lays.is_empty() {
        return fail(report, "no layering exists".into());
    }
    let images: Vec<OrderedPartition> = pls.iter().map(|l| l.to_ordering(p, a)).collect();
    let index: HashMap<&OrderedPartition, usize> = pos.iter().enumerate().map(|(i, o)| (o, i)).collect();
    let mut hit = vec![false; pos.len()];
    for (l, o) in pls.iter().zip(&images) {
        match index.get(o) {
            None => return fail(report, format!("image of {} is not a pre-ordering", describe(p, l))),
            Some(&i) if hit[i] => {
                return fail(report, format!("image of {} is hit twice", describe(p, l)))
            }
            Some(&i) => hit[i] = true,
        }
    }
    if let Some(i) = hit.iter().position(|h| !h) {
        return fail(report, format!("pre-ordering {:?} has no pre-layering", pos[i].blocks));
    }
    for i in 0..pls.len() {
        for j in 0..pls.len() {
            if pls[i].leq(&pls[j]) != images[i].leq(&images[j]) {
                return fail(
                    report,
                    format!(
                        "order not reflected between {} and {}",
                        describe(p, &pls[i]),
                        describe(p, &pls[j])
                    ),
                );
            }
        }
    }
    for o in &pos {
        if !ords.iter().any(|t| o.leq(t)) {
            return fail(report, format!("pre-ordering {:?} is refined by no ordering", o.blocks));
        }
    }
    report.iso = true;
    Ok(report)
}
