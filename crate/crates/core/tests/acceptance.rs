//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::{BTreeSet, HashSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dcx_core::complex::{SemiSimplicialSet, Verdict};
use dcx_core::fixtures::{self, named_molecules, random_molecules};
use dcx_core::flow::{check_comparison_map, check_layering_theory, frame_dim, is_frame_acyclic};
use dcx_core::homology::poset_report;
use dcx_core::iso::{find_iso, find_unique_iso};
use dcx_core::subdivision::{all_levels, enumerate_sd, SdPoset};
use dcx_core::{Molecule, MoleculeContext, OgPoset, Sign};

const SEED: u64 = 20_240_611;
const RANDOM_COUNT: usize = 240;
const MIN_RANDOM: usize = 200;
const MAX_LEN: usize = 25;
const SD_MAX_LEN: usize = 20;
const BUDGET_FRAME: Duration = Duration::from_secs(5 * 60);
const BUDGET_SD: Duration = Duration::from_secs(10 * 60);

type Outcome = Result<String, String>;

struct Corpus {
    random: Vec<Molecule>,
    all: Vec<(String, Molecule)>,
    /// Subdivision posets of the random fixtures small enough to enumerate.
    sd: Vec<(usize, SdPoset)>,
}

impl Corpus {
    fn build() -> Self {
        let random = random_molecules(SEED, RANDOM_COUNT, 3, MAX_LEN);
        let mut all: Vec<(String, Molecule)> =
            named_molecules().into_iter().map(|(n, m)| (n.to_string(), m)).collect();
        all.extend(random.iter().enumerate().map(|(i, m)| (format!("random#{i}"), m.clone())));
        Corpus { random, all, sd: Vec::new() }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn frame_acyclicity_low_dim(c: &Corpus) -> Outcome {
    let start = Instant::now();
    ensure(c.random.len() >= MIN_RANDOM, || {
        format!("only {} random molecules generated", c.random.len())
    })?;
    for (i, m) in c.random.iter().enumerate() {
        ensure(m.dim() <= 3 && m.len() <= MAX_LEN, || format!("random#{i} out of bounds"))?;
        let p = m.poset();
        ensure(is_frame_acyclic(&mut MoleculeContext::new(p), &m.full()), || {
            format!("random#{i} is not frame-acyclic: {}", m.certificate())
        })?;
    }
    let t = start.elapsed();
    ensure(t < BUDGET_FRAME, || format!("took {t:?}"))?;
    Ok(format!("{} molecules, {:.1}s", c.random.len(), t.as_secs_f64()))
}

fn sd_contractible(c: &mut Corpus) -> Outcome {
    let start = Instant::now();
    let (mut atoms, mut others) = (0, 0);
    for (i, m) in c.random.iter().enumerate() {
        if m.len() > SD_MAX_LEN {
            continue;
        }
        let sd = enumerate_sd(m, &all_levels(m));
        let report = poset_report(&sd.without_bottom());
        if m.is_atom() {
            atoms += 1;
            ensure(report.empty, || format!("atom random#{i} has nonempty Sd"))?;
        } else {
            others += 1;
            ensure(!report.empty && report.connected && report.is_acyclic(), || {
                format!("random#{i}: {report:?}")
            })?;
        }
        c.sd.push((i, sd));
    }
    let t = start.elapsed();
    ensure(t < BUDGET_SD, || format!("took {t:?}"))?;
    Ok(format!("{others} non-atoms contractible, {atoms} atoms empty, {:.1}s", t.as_secs_f64()))
}

/// Compositions of k ordered by refinement, compared through cut points.
fn ordered_partitions() -> Outcome {
    for k in 1..=6usize {
        let u = Molecule::path(k);
        let p = u.poset();
        let sd = enumerate_sd(&u, &BTreeSet::from([0]));
        ensure(sd.len() == 1 << (k - 1), || format!("k={k}: {} elements", sd.len()))?;
        let ends: HashSet<usize> = p.boundary(&u.full(), 0, Sign::Minus).ones()
            .chain(p.boundary(&u.full(), 0, Sign::Plus).ones())
            .collect();
        let cuts: Vec<BTreeSet<usize>> = sd
            .elements
            .iter()
            .map(|r| {
                let tp = r.theta.poset();
                tp.of_dim(0)
                    .flat_map(|x| r.images[x].ones())
                    .filter(|v| !ends.contains(v))
                    .collect()
            })
            .collect();
        let distinct: HashSet<&BTreeSet<usize>> = cuts.iter().collect();
        ensure(distinct.len() == cuts.len(), || format!("k={k}: two subdivisions share cut points"))?;
        for a in 0..sd.len() {
            for b in 0..sd.len() {
                ensure(sd.order.leq(a, b) == cuts[a].is_subset(&cuts[b]), || {
                    format!("k={k}: order disagrees with refinement at ({a},{b})")
                })?;
            }
        }
    }
    Ok("k = 1..6, sizes 1,2,4,8,16,32".into())
}

fn layering_comparison(c: &Corpus) -> Outcome {
    let (mut theory, mut maps) = (0, 0);
    for (name, m) in &c.all {
        let p = m.poset();
        let full = m.full();
        let mut ctx = MoleculeContext::new(p);
        let fd = frame_dim(p, &full);
        for k in fd.max(0)..m.dim() {
            let report = check_layering_theory(&mut ctx, &full, k as usize)
                .map_err(|e| format!("{name}, k={k}: {e}"))?;
            ensure(report.iso, || format!("{name}, k={k}: {:?}", report.counterexample))?;
            theory += 1;
        }
        for k in -1..m.dim() {
            check_comparison_map(&mut ctx, &full, k).map_err(|e| format!("{name}, k={k}: {e}"))?;
            maps += 1;
        }
    }
    Ok(format!("{theory} theory checks, {maps} comparison maps"))
}

fn orientals() -> Outcome {
    let atom = Molecule::atom(&Molecule::arrow(), &Molecule::path(2)).map_err(|e| e.to_string())?;
    ensure(find_iso(Molecule::oriental(2).poset(), atom.poset()).is_some(), || {
        "oriental(2) is not atom(arrow, path2)".into()
    })?;
    for n in 0..=5 {
        let o = Molecule::oriental(n);
        ensure(o.poset().is_hasse_acyclic(), || format!("oriental({n}) has a Hasse cycle"))?;
        ensure(o.len() == (1 << (n + 1)) - 1, || format!("oriental({n}) has {} elements", o.len()))?;
    }
    Ok("n = 0..5".into())
}

fn delta_complexes() -> Outcome {
    for n in 0..=4 {
        let x = SemiSimplicialSet::standard(n).to_complex().map_err(|e| e.to_string())?;
        ensure(x.atoms_acyclic(), || format!("Δ^{n}: cyclic atom"))?;
        let v = x.has_frame_acyclic_molecules(2);
        ensure(v == Verdict::ProvenByAcyclicAtoms, || format!("Δ^{n}: {}", v.name()))?;
        let top: Vec<_> = x
            .enumerate_molecules(2)
            .into_iter()
            .filter(|d| d.shape.dim() == n as isize)
            .collect();
        ensure(top.len() == 1, || format!("Δ^{n}: {} top diagrams", top.len()))?;
        ensure(find_iso(top[0].shape.poset(), Molecule::oriental(n).poset()).is_some(), || {
            format!("Δ^{n}: top diagram is not oriental({n})")
        })?;
    }
    Ok("n = 0..4".into())
}

fn loop_graph() -> Outcome {
    const BUDGET: usize = 5;
    let x = fixtures::loop_graph();
    let v = x.has_frame_acyclic_molecules(BUDGET);
    ensure(v == Verdict::ProvenByAcyclicAtoms, || v.name().to_string())?;
    let diagrams = x.enumerate_molecules(BUDGET);
    // Walks of each length from the adjacency matrix of x <-> y.
    let adj = [[0u64, 1], [1, 0]];
    let mut walks = [[1u64, 0], [0, 1]];
    let mut expected = vec![2u64];
    for _ in 1..=BUDGET {
        let mut next = [[0u64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                next[i][j] = (0..2).map(|m| walks[i][m] * adj[m][j]).sum();
            }
        }
        walks = next;
        expected.push(walks.iter().flatten().sum());
    }
    let mut got = vec![0u64; BUDGET + 1];
    for d in &diagrams {
        let p = d.shape.poset();
        let len = if p.dim() <= 0 { 0 } else { p.count(1) };
        got[len] += 1;
        let edges: Vec<usize> = edge_order(p).into_iter().map(|e| d.labels[e].index).collect();
        ensure(edges.windows(2).all(|w| w[0] != w[1]), || format!("labels do not alternate: {edges:?}"))?;
    }
    ensure(got == expected, || format!("counts {got:?}, oracle {expected:?}"))?;
    Ok(format!("{} diagrams, per length {got:?}", diagrams.len()))
}

/// Edges of a path-shaped 1-molecule in order from source to target.
fn edge_order(p: &OgPoset) -> Vec<usize> {
    if p.dim() < 1 {
        return Vec::new();
    }
    let full = p.full_set();
    let mut v = p.boundary(&full, 0, Sign::Minus).ones().next().unwrap();
    let mut out = Vec::new();
    while let Some(&e) = p.cofaces(v, Sign::Minus).first() {
        out.push(e);
        v = p.faces(e, Sign::Plus)[0];
    }
    out
}

fn recognition(c: &Corpus) -> Outcome {
    for (name, m) in &c.all {
        let r = Molecule::recognize(m.poset().clone()).map_err(|e| format!("{name}: {e}"))?;
        let replayed = r.certificate().replay().map_err(|e| format!("{name}: {e}"))?;
        ensure(find_iso(replayed.poset(), m.poset()).is_some(), || {
            format!("{name}: certificate replays to a different shape")
        })?;
    }
    for (name, p) in [("triangle boundary", fixtures::triangle_boundary()), ("parallel pair", fixtures::parallel_pair())] {
        ensure(Molecule::recognize(p).is_err(), || format!("{name} accepted"))?;
    }
    Ok(format!("{} accepted, 2 rejected", c.all.len()))
}

fn monomorphisms(c: &Corpus) -> Outcome {
    let mut count = 0;
    for (i, sd) in &c.sd {
        let ambient = c.random[*i].poset();
        for r in &sd.elements {
            ensure(r.is_mono(ambient), || format!("random#{i}: {} is not mono", r.tree.display(ambient)))?;
            count += 1;
        }
    }
    Ok(format!("{count} realized subdivisions"))
}

fn same_shape(a: &OgPoset, b: &OgPoset) -> bool {
    matches!(find_unique_iso(a, b), Ok(Some(_)))
}

fn globularity(c: &Corpus) -> Outcome {
    let mut checks = 0;
    for (name, m) in &c.all {
        let p = m.poset();
        let full = m.full();
        for k in 0..m.dim() {
            for b in Sign::BOTH {
                let inner = p.boundary(&full, k, b);
                for j in 0..k {
                    for a in Sign::BOTH {
                        ensure(p.boundary(&inner, j, a) == p.boundary(&full, j, a), || {
                            format!("{name}: boundary law fails at j={j}, k={k}")
                        })?;
                        checks += 1;
                    }
                }
            }
            let k = k as usize;
            let unit_l = Molecule::paste(&m.boundary(k, Sign::Minus), m, k).map_err(|e| e.to_string())?;
            let unit_r = Molecule::paste(m, &m.boundary(k, Sign::Plus), k).map_err(|e| e.to_string())?;
            ensure(same_shape(unit_l.poset(), p) && same_shape(unit_r.poset(), p), || {
                format!("{name}: unit law fails at k={k}")
            })?;
            checks += 2;
        }
    }
    let small: Vec<&Molecule> = c.all.iter().map(|(_, m)| m).filter(|m| m.len() <= 12).take(40).collect();
    for u in &small {
        for v in &small {
            for k in 0..u.dim().max(v.dim()).max(0) as usize {
                let Ok(uv) = Molecule::paste(u, v, k) else { continue };
                for w in &small {
                    let Ok(left) = Molecule::paste(&uv, w, k) else { continue };
                    let vw = Molecule::paste(v, w, k).map_err(|e| format!("v#w undefined: {e}"))?;
                    let right = Molecule::paste(u, &vw, k).map_err(|e| format!("u#(v#w) undefined: {e}"))?;
                    ensure(same_shape(left.poset(), right.poset()), || format!("associativity fails at k={k}"))?;
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} instances"))
}

fn main() -> ExitCode {
    let mut corpus = Corpus::build();
    let mut failures = 0;
    let mut report = |n: usize, name: &str, outcome: Outcome| {
        match &outcome {
            Ok(detail) => println!("criterion {n:>2} {name}: PASS ({detail})"),
            Err(why) => {
                failures += 1;
                println!("criterion {n:>2} {name}: FAIL ({why})");
            }
        }
    };
    report(1, "frame-acyclicity in dimension <= 3", frame_acyclicity_low_dim(&corpus));
    report(2, "subdivision posets contractible", sd_contractible(&mut corpus));
    report(3, "ordered partitions of paths", ordered_partitions());
    report(4, "layerings versus orderings", layering_comparison(&corpus));
    report(5, "orientals", orientals());
    report(6, "simplex complexes", delta_complexes());
    report(7, "loop graph", loop_graph());
    report(8, "molecule recognition", recognition(&corpus));
    report(9, "subdivisions are monomorphisms", monomorphisms(&corpus));
    report(10, "globularity and pasting laws", globularity(&corpus));
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
