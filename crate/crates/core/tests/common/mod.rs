//! Reference implementations and instance generators shared by the
//! integration suites. Nothing here calls the sparse kernels under test:
//! path counts come from walking the adjacency lists directly.
#![allow(dead_code)]

use std::collections::BTreeSet;

use hinfraud::hin::{Cardinality, Hin, HinSchema, LinkId, LinkTypeDef, NodeRole, NodeTypeDef, NodeTypeId};
use hinfraud::metapath::PathTrace;
use rand::seq::SliceRandom;
use rand::Rng;

/// Dense `n × m` walk counts along `links`, starting from every target node.
pub fn walk_counts(hin: &Hin, links: &[LinkId]) -> Vec<Vec<f64>> {
    let schema = hin.schema();
    let n = hin.n_targets();
    let end = links.last().map_or(schema.target(), |&l| schema.endpoints(l).1);
    let m = hin.node_count(end);
    let mut out = vec![vec![0.0; m]; n];
    for (i, row) in out.iter_mut().enumerate() {
        let mut stack = vec![(i, 0usize)];
        while let Some((node, depth)) = stack.pop() {
            if depth == links.len() {
                row[node] += 1.0;
                continue;
            }
            for &next in hin.adjacency(links[depth]).row(node) {
                stack.push((next, depth + 1));
            }
        }
    }
    out
}

fn column_lists(p: &[Vec<f64>]) -> Vec<Vec<(usize, f64)>> {
    let m = p.first().map_or(0, Vec::len);
    let mut cols = vec![Vec::new(); m];
    for (i, row) in p.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            if v != 0.0 {
                cols[k].push((i, v));
            }
        }
    }
    cols
}

/// `Σₖ a[i,k] · w[k] · b[j,k]` as a dense `n × n` array.
fn weighted_outer(a: &[Vec<f64>], b: &[Vec<f64>], w: &[f64]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    let (ca, cb) = (column_lists(a), column_lists(b));
    for k in 0..w.len() {
        if w[k] == 0.0 {
            continue;
        }
        for &(i, x) in &ca[k] {
            for &(j, y) in &cb[k] {
                out[i][j] += x * w[k] * y;
            }
        }
    }
    out
}

fn row_normalize(m: &[Vec<f64>], y: &[f64], fallback: f64, exclude_self: bool) -> Vec<f64> {
    m.iter()
        .enumerate()
        .map(|(i, row)| {
            let (mut num, mut den) = (0.0, 0.0);
            for (j, &w) in row.iter().enumerate() {
                if exclude_self && i == j {
                    continue;
                }
                num += w * y[j];
                den += w;
            }
            if den > 0.0 {
                num / den
            } else {
                fallback
            }
        })
        .collect()
}

/// Literal row-normalized `D · P · y` with `P = P₁ P₂ᵀ`.
pub fn literal_fraction(p1: &[Vec<f64>], p2: &[Vec<f64>], y: &[f64], fallback: f64, exclude_self: bool) -> Vec<f64> {
    let m = p1.first().map_or(0, Vec::len);
    let p = weighted_outer(p1, p2, &vec![1.0; m]);
    row_normalize(&p, y, fallback, exclude_self)
}

/// `D₁ P₁ D₂ P₂ᵀ y` with `D₂ = diag(1 / column sums of P₂)` (zero for empty
/// columns) and `D₁` normalizing the rows of `P₁ D₂ P₂ᵀ`.
pub fn end_normalized_fraction(p1: &[Vec<f64>], p2: &[Vec<f64>], y: &[f64], fallback: f64, exclude_self: bool) -> Vec<f64> {
    let m = p1.first().map_or(0, Vec::len);
    let d2: Vec<f64> = (0..m)
        .map(|k| {
            let s: f64 = p2.iter().map(|row| row[k]).sum();
            if s > 0.0 {
                1.0 / s
            } else {
                0.0
            }
        })
        .collect();
    let mm = weighted_outer(p1, p2, &d2);
    row_normalize(&mm, y, fallback, exclude_self)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Link sequence of a trace as comparable tuples.
pub fn link_key(links: &[LinkId]) -> Vec<(usize, bool)> {
    links.iter().map(|l| (l.index, l.inverted)).collect()
}

/// Every link sequence from the target whose node-type counts strictly
/// decrease: all strictly decreasing type sequences first, then every way
/// of realizing each step with a declared link in either direction.
pub fn brute_force_traces(schema: &HinSchema, counts: &[usize]) -> BTreeSet<Vec<(usize, bool)>> {
    let k = schema.node_type_count();
    let mut type_seqs: Vec<Vec<usize>> = Vec::new();
    let mut stack = vec![vec![schema.target().0]];
    while let Some(seq) = stack.pop() {
        let last = *seq.last().unwrap();
        for t in 0..k {
            if counts[t] < counts[last] {
                let mut next = seq.clone();
                next.push(t);
                stack.push(next);
            }
        }
        type_seqs.push(seq);
    }
    let mut out = BTreeSet::new();
    for seq in type_seqs {
        let mut realizations: Vec<Vec<(usize, bool)>> = vec![Vec::new()];
        for w in seq.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut steps = Vec::new();
            for (idx, lt) in schema.link_types().iter().enumerate() {
                let src = schema.node_type(&lt.source).unwrap().0;
                let dst = schema.node_type(&lt.target).unwrap().0;
                if (src, dst) == (a, b) {
                    steps.push((idx, false));
                }
                if (dst, src) == (a, b) {
                    steps.push((idx, true));
                }
            }
            realizations = realizations
                .into_iter()
                .flat_map(|r| {
                    steps.iter().map(move |&s| {
                        let mut r = r.clone();
                        r.push(s);
                        r
                    })
                })
                .collect();
        }
        out.extend(realizations);
    }
    out
}

pub fn trace_keys(traces: &[PathTrace]) -> BTreeSet<Vec<(usize, bool)>> {
    traces.iter().map(|t| link_key(t.links())).collect()
}

/// Ordered same-end pairs excluding `(0, 0)`, counted from end types alone.
pub fn brute_force_pair_count(traces: &[PathTrace]) -> usize {
    let ends: Vec<NodeTypeId> = traces.iter().map(|t| t.end_type()).collect();
    let mut c = 0;
    for i in 0..ends.len() {
        for j in 0..ends.len() {
            if (i, j) != (0, 0) && ends[i] == ends[j] {
                c += 1;
            }
        }
    }
    c
}

pub fn toy_schema() -> HinSchema {
    let node = |name: &str, role| NodeTypeDef { name: name.into(), role };
    let link = |name: &str, s: &str, t: &str| LinkTypeDef {
        name: name.into(),
        source: s.into(),
        target: t.into(),
        cardinality: Cardinality::ManyToOne,
    };
    HinSchema::new(
        vec![
            node("T", NodeRole::Target),
            node("U", NodeRole::Attribute),
            node("C", NodeRole::Attribute),
            node("S", NodeRole::Attribute),
        ],
        vec![link("byU", "T", "U"), link("inC", "U", "C"), link("fromS", "T", "S")],
    )
    .unwrap()
}

pub const TOY_COUNTS: [usize; 4] = [100, 10, 3, 5];

/// Four transactions over three items under two titles:
/// t0 = {i0, i1}, t1 = {i0}, t2 = {i1, i2}, t3 = {i2}; i0, i1 → g0; i2 → g1.
pub fn title_fixture() -> Hin {
    let schema = HinSchema::new(
        vec![
            NodeTypeDef { name: "T".into(), role: NodeRole::Target },
            NodeTypeDef { name: "Item".into(), role: NodeRole::Attribute },
            NodeTypeDef { name: "Title".into(), role: NodeRole::Attribute },
        ],
        vec![
            LinkTypeDef {
                name: "containsItem".into(),
                source: "T".into(),
                target: "Item".into(),
                cardinality: Cardinality::ManyToMany,
            },
            LinkTypeDef {
                name: "isTitle".into(),
                source: "Item".into(),
                target: "Title".into(),
                cardinality: Cardinality::ManyToOne,
            },
        ],
    )
    .unwrap();
    Hin::with_counts(
        schema,
        &[4, 3, 2],
        vec![vec![(0, 0), (0, 1), (1, 0), (2, 1), (2, 2), (3, 2)], vec![(0, 0), (1, 0), (2, 1)]],
    )
    .unwrap()
}

#[derive(Debug, Clone, Copy)]
pub struct RandomHinSpec {
    pub min_types: usize,
    pub max_types: usize,
    pub min_n: usize,
    pub max_n: usize,
    /// Probability that a link is many-to-many.
    pub many_to_many: f64,
}

impl RandomHinSpec {
    pub const MEDIUM: RandomHinSpec = RandomHinSpec { min_types: 2, max_types: 6, min_n: 20, max_n: 500, many_to_many: 0.3 };
    pub const SMALL_COMPLEX: RandomHinSpec =
        RandomHinSpec { min_types: 3, max_types: 5, min_n: 8, max_n: 60, many_to_many: 0.6 };
}

fn random_cardinality<R: Rng>(rng: &mut R, p_mm: f64) -> Cardinality {
    if rng.random_bool(p_mm) {
        return Cardinality::ManyToMany;
    }
    match rng.random_range(0..6) {
        0 => Cardinality::OneToOne,
        1 => Cardinality::OneToMany,
        _ => Cardinality::ManyToOne,
    }
}

fn random_edges<R: Rng>(rng: &mut R, ns: usize, nd: usize, card: Cardinality) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    match card {
        Cardinality::ManyToOne => {
            for s in 0..ns {
                if rng.random_bool(0.9) {
                    edges.push((s, rng.random_range(0..nd)));
                }
            }
        }
        Cardinality::OneToMany => {
            for d in 0..nd {
                if rng.random_bool(0.9) {
                    edges.push((rng.random_range(0..ns), d));
                }
            }
        }
        Cardinality::OneToOne => {
            let mut dst: Vec<usize> = (0..nd).collect();
            dst.shuffle(rng);
            for (s, d) in (0..ns).zip(dst) {
                if rng.random_bool(0.8) {
                    edges.push((s, d));
                }
            }
        }
        Cardinality::ManyToMany => {
            for s in 0..ns {
                let k = rng.random_range(0..=3.min(nd));
                let mut dst: Vec<usize> = (0..nd).collect();
                dst.shuffle(rng);
                edges.extend(dst[..k].iter().map(|&d| (s, d)));
            }
        }
    }
    edges
}

/// Random connected schema and instance. Type 0 is the target and holds the
/// most nodes; other counts are drawn below it with occasional ties.
pub fn random_hin<R: Rng>(rng: &mut R, spec: RandomHinSpec) -> Hin {
    let k = rng.random_range(spec.min_types..=spec.max_types);
    let n = rng.random_range(spec.min_n..=spec.max_n);
    let mut counts = vec![n];
    for t in 1..k {
        let c = if t > 1 && rng.random_bool(0.15) { counts[rng.random_range(1..t)] } else { rng.random_range(1..n) };
        counts.push(c);
    }
    let names: Vec<String> = (0..k).map(|t| if t == 0 { "T".to_string() } else { format!("A{t}") }).collect();
    let node_types = names
        .iter()
        .enumerate()
        .map(|(t, name)| NodeTypeDef {
            name: name.clone(),
            role: if t == 0 { NodeRole::Target } else { NodeRole::Attribute },
        })
        .collect();
    let mut ends: Vec<(usize, usize)> = (1..k).map(|t| (rng.random_range(0..t), t)).collect();
    for _ in 0..rng.random_range(0..=k) {
        let a = rng.random_range(0..k);
        let b = rng.random_range(0..k);
        if a != b {
            ends.push((a, b));
        }
    }
    let mut links = Vec::new();
    let mut edges = Vec::new();
    for (idx, (a, b)) in ends.into_iter().enumerate() {
        let (src, dst) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
        let card = random_cardinality(rng, spec.many_to_many);
        links.push(LinkTypeDef {
            name: format!("l{idx}"),
            source: names[src].clone(),
            target: names[dst].clone(),
            cardinality: card,
        });
        edges.push(random_edges(rng, counts[src], counts[dst], card));
    }
    let schema = HinSchema::new(node_types, links).unwrap();
    Hin::with_counts(schema, &counts, edges).unwrap()
}

/// Hard labels with a random fraud rate.
pub fn random_labels<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let rate = rng.random_range(0.05..0.6);
    (0..n).map(|_| rng.random_bool(rate) as u8 as f64).collect()
}
