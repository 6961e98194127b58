//! Downsized meta-paths: breadth-first enumeration over the schema,
//! materialization as sparse chain products, and pairing into full
//! transaction-to-transaction meta-paths.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::hin::{Hin, HinSchema, LinkId, NodeTypeId};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

/// Node- and link-type sequence of a downsized meta-path starting at the
/// target type. Node counts strictly decrease along the sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathTrace {
    node_types: Vec<NodeTypeId>,
    links: Vec<LinkId>,
}

impl PathTrace {
    /// The length-zero path at the target type.
    pub fn trivial(target: NodeTypeId) -> Self {
        PathTrace { node_types: vec![target], links: Vec::new() }
    }

    pub fn extend(&self, link: LinkId, to: NodeTypeId) -> Self {
        let mut next = self.clone();
        next.links.push(link);
        next.node_types.push(to);
        next
    }

    pub fn node_types(&self) -> &[NodeTypeId] {
        &self.node_types
    }

    pub fn links(&self) -> &[LinkId] {
        &self.links
    }

    pub fn end_type(&self) -> NodeTypeId {
        *self.node_types.last().expect("trace has at least the start type")
    }

    pub fn is_trivial(&self) -> bool {
        self.links.is_empty()
    }

    /// True when every link is single-valued (many-to-one or one-to-one).
    pub fn is_simple(&self, schema: &HinSchema) -> bool {
        self.links.iter().all(|&l| schema.cardinality(l).is_single_valued())
    }

    pub fn render(&self, schema: &HinSchema) -> String {
        let mut s = schema.node_type_name(self.node_types[0]).to_string();
        for (link, node) in self.links.iter().zip(&self.node_types[1..]) {
            s.push('→');
            s.push_str(&schema.link_name(*link));
            s.push('→');
            s.push_str(schema.node_type_name(*node));
        }
        s
    }
}

/// Breadth-first search from the target type along every declared link and
/// its inverse, keeping only strictly count-decreasing steps. Index 0 is the
/// trivial trace.
pub fn enumerate_downsized(schema: &HinSchema, node_counts: &[usize]) -> Vec<PathTrace> {
    assert_eq!(node_counts.len(), schema.node_type_count(), "one count per node type");
    let links: Vec<LinkId> = schema.directed_links().collect();
    let mut traces = vec![PathTrace::trivial(schema.target())];
    let mut frontier = VecDeque::from([0usize]);
    while let Some(p) = frontier.pop_front() {
        let end = traces[p].end_type();
        for &link in &links {
            let (src, dst) = schema.endpoints(link);
            if src == end && node_counts[src.0] > node_counts[dst.0] {
                traces.push(traces[p].extend(link, dst));
                frontier.push_back(traces.len() - 1);
            }
        }
    }
    traces
}

/// A trace with its materialized transaction-to-end-type matrix.
#[derive(Debug, Clone)]
pub struct DownsizedPath<T> {
    pub trace: PathTrace,
    pub matrix: CsrMatrix<T>,
    pub is_simple: bool,
}

/// Chain product of the trace's adjacency matrices, left to right. Entries
/// count the instance paths between a transaction and an end node.
pub fn materialize<T: Scalar>(hin: &Hin, trace: &PathTrace) -> DownsizedPath<T> {
    let schema = hin.schema();
    let matrix = match trace.links().split_first() {
        None => CsrMatrix::identity(hin.n_targets()),
        Some((first, rest)) => rest.iter().fold(hin.adjacency(*first).to_matrix(), |acc, link| {
            acc.matmul(&hin.adjacency(*link).to_matrix())
        }),
    };
    DownsizedPath { trace: trace.clone(), matrix, is_simple: trace.is_simple(schema) }
}

/// Ordered pair of downsized paths sharing an end type, standing for the
/// meta-path `P₁ × P₂ᵀ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaPathPair {
    pub left: usize,
    pub right: usize,
    pub end_type: NodeTypeId,
    pub semantics: String,
}

/// All ordered pairs `(i, j)` whose traces end at the same node type, except
/// the identity pair `(0, 0)`.
pub fn pair_paths(traces: &[PathTrace], schema: &HinSchema) -> Vec<MetaPathPair> {
    let mut pairs = Vec::new();
    for (i, a) in traces.iter().enumerate() {
        for (j, b) in traces.iter().enumerate() {
            if (i, j) == (0, 0) || a.end_type() != b.end_type() {
                continue;
            }
            pairs.push(MetaPathPair {
                left: i,
                right: j,
                end_type: a.end_type(),
                semantics: render_semantics(a, b, schema),
            });
        }
    }
    pairs
}

/// Arrow rendering: the left trace forward, then the right trace reversed
/// with each link inverted.
pub fn render_semantics(left: &PathTrace, right: &PathTrace, schema: &HinSchema) -> String {
    let mut s = left.render(schema);
    let nodes = right.node_types();
    for (k, link) in right.links().iter().enumerate().rev() {
        s.push('→');
        s.push_str(&schema.link_name(link.inverse()));
        s.push('→');
        s.push_str(schema.node_type_name(nodes[k]));
    }
    s
}

/// Full link sequence of the meta-path a pair stands for.
pub fn pair_link_sequence(pair: &MetaPathPair, traces: &[PathTrace]) -> Vec<LinkId> {
    let mut seq = traces[pair.left].links().to_vec();
    seq.extend(traces[pair.right].links().iter().rev().map(|l| l.inverse()));
    seq
}

/// Materialized downsized paths and their pairings for one graph.
#[derive(Debug, Clone)]
pub struct MetaPaths<T> {
    pub paths: Vec<DownsizedPath<T>>,
    pub pairs: Vec<MetaPathPair>,
}

impl<T: Scalar> MetaPaths<T> {
    pub fn build(hin: &Hin) -> Self {
        let traces = enumerate_downsized(hin.schema(), &hin.node_counts());
        let paths = traces.par_iter().map(|t| materialize(hin, t)).collect();
        let pairs = pair_paths(&traces, hin.schema());
        MetaPaths { paths, pairs }
    }

    pub fn traces(&self) -> Vec<PathTrace> {
        self.paths.iter().map(|p| p.trace.clone()).collect()
    }

    /// Number of meta-path feature columns.
    pub fn c(&self) -> usize {
        self.pairs.len()
    }
}
