use std::collections::HashMap;
use std::sync::OnceLock;

use log::warn;

use super::schema::{HinSchema, LinkId, NodeTypeId};
use crate::error::{Error, Result};
use crate::sparse::SparsePattern;

/// Immutable typed graph: one binary adjacency matrix per declared link type.
/// Inverse adjacencies are transposes built on first use.
#[derive(Debug)]
pub struct Hin {
    schema: HinSchema,
    node_ids: Vec<Vec<String>>,
    node_index: Vec<HashMap<String, usize>>,
    adjacency: Vec<SparsePattern>,
    transposed: Vec<OnceLock<SparsePattern>>,
}

impl Hin {
    /// Assembles a graph from per-type id lists (index = list position) and
    /// per-link index pairs. Duplicate edges collapse with a warning.
    pub fn from_parts(
        schema: HinSchema,
        node_ids: Vec<Vec<String>>,
        edges: Vec<Vec<(usize, usize)>>,
    ) -> Result<Self> {
        if node_ids.len() != schema.node_type_count() {
            return Err(Error::SchemaMismatch(format!(
                "{} node id lists for {} node types",
                node_ids.len(),
                schema.node_type_count()
            )));
        }
        if edges.len() != schema.link_types().len() {
            return Err(Error::SchemaMismatch(format!(
                "{} edge lists for {} link types",
                edges.len(),
                schema.link_types().len()
            )));
        }
        let mut node_index = Vec::with_capacity(node_ids.len());
        for (t, ids) in node_ids.iter().enumerate() {
            let mut map = HashMap::with_capacity(ids.len());
            for (i, id) in ids.iter().enumerate() {
                if map.insert(id.clone(), i).is_some() {
                    return Err(Error::SchemaMismatch(format!(
                        "duplicate id {id:?} for node type {}",
                        schema.node_types()[t].name
                    )));
                }
            }
            node_index.push(map);
        }
        let mut adjacency = Vec::with_capacity(edges.len());
        for (k, pairs) in edges.iter().enumerate() {
            let link = LinkId::forward(k);
            let (src, dst) = schema.endpoints(link);
            let (nr, nc) = (node_ids[src.0].len(), node_ids[dst.0].len());
            if let Some(&(r, c)) = pairs.iter().find(|&&(r, c)| r >= nr || c >= nc) {
                let id = if r >= nr { r } else { c };
                return Err(Error::UnknownNodeId { link: schema.link_name(link), id: id.to_string() });
            }
            let (pattern, dropped) = SparsePattern::from_pairs(nr, nc, pairs);
            if dropped > 0 {
                warn!("link {}: collapsed {dropped} duplicate edges", schema.link_name(link));
            }
            if schema.cardinality(link).is_single_valued() {
                check_single_valued(&schema, link, &pattern, &node_ids[src.0])?;
                if schema.cardinality(link.inverse()).is_single_valued() {
                    check_single_valued(&schema, link.inverse(), &pattern.transpose(), &node_ids[dst.0])?;
                }
            }
            adjacency.push(pattern);
        }
        let transposed = (0..adjacency.len()).map(|_| OnceLock::new()).collect();
        Ok(Hin { schema, node_ids, node_index, adjacency, transposed })
    }

    /// Graph whose node ids are the decimal indices `0..count`.
    pub fn with_counts(schema: HinSchema, counts: &[usize], edges: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        let ids = counts.iter().map(|&n| (0..n).map(|i| i.to_string()).collect()).collect();
        Hin::from_parts(schema, ids, edges)
    }

    pub fn schema(&self) -> &HinSchema {
        &self.schema
    }

    pub fn node_count(&self, t: NodeTypeId) -> usize {
        self.node_ids[t.0].len()
    }

    pub fn node_counts(&self) -> Vec<usize> {
        self.node_ids.iter().map(Vec::len).collect()
    }

    /// Number of target (transaction) nodes.
    pub fn n_targets(&self) -> usize {
        self.node_count(self.schema.target())
    }

    pub fn node_ids(&self, t: NodeTypeId) -> &[String] {
        &self.node_ids[t.0]
    }

    pub fn node_position(&self, t: NodeTypeId, id: &str) -> Option<usize> {
        self.node_index[t.0].get(id).copied()
    }

    /// Adjacency of a link; the transpose for inverted links.
    pub fn adjacency(&self, link: LinkId) -> &SparsePattern {
        let forward = &self.adjacency[link.index];
        if link.inverted {
            self.transposed[link.index].get_or_init(|| forward.transpose())
        } else {
            forward
        }
    }

    /// Row sums of a link's adjacency.
    pub fn degree_vector(&self, link: LinkId) -> Vec<usize> {
        self.adjacency(link).degrees()
    }

    /// Induced subgraph on the listed target nodes, in the given order.
    /// Attribute nodes are all kept.
    pub fn restrict_targets(&self, keep: &[usize]) -> Result<Hin> {
        let target = self.schema.target();
        let n = self.n_targets();
        let mut new_pos = vec![usize::MAX; n];
        for (k, &i) in keep.iter().enumerate() {
            if i >= n {
                return Err(Error::UnknownNodeId { link: String::new(), id: i.to_string() });
            }
            new_pos[i] = k;
        }
        let remap = |t: NodeTypeId, i: usize| if t == target { new_pos[i] } else { i };
        let mut node_ids = self.node_ids.clone();
        node_ids[target.0] = keep.iter().map(|&i| self.node_ids[target.0][i].clone()).collect();
        let edges = self
            .adjacency
            .iter()
            .enumerate()
            .map(|(k, pattern)| {
                let (src, dst) = self.schema.endpoints(LinkId::forward(k));
                let mut pairs = Vec::new();
                for r in 0..pattern.nrows() {
                    let r2 = remap(src, r);
                    if r2 == usize::MAX {
                        continue;
                    }
                    for &c in pattern.row(r) {
                        let c2 = remap(dst, c);
                        if c2 != usize::MAX {
                            pairs.push((r2, c2));
                        }
                    }
                }
                pairs
            })
            .collect();
        Hin::from_parts(self.schema.clone(), node_ids, edges)
    }
}

fn check_single_valued(schema: &HinSchema, link: LinkId, pattern: &SparsePattern, ids: &[String]) -> Result<()> {
    for (row, id) in ids.iter().enumerate() {
        let count = pattern.row_nnz(row);
        if count > 1 {
            return Err(Error::CardinalityViolation { link: schema.link_name(link), row: id.clone(), count });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hin::schema::{Cardinality, LinkTypeDef, NodeRole, NodeTypeDef};

    fn schema() -> HinSchema {
        HinSchema::new(
            vec![
                NodeTypeDef { name: "t".into(), role: NodeRole::Target },
                NodeTypeDef { name: "u".into(), role: NodeRole::Attribute },
                NodeTypeDef { name: "i".into(), role: NodeRole::Attribute },
            ],
            vec![
                LinkTypeDef { name: "byU".into(), source: "t".into(), target: "u".into(), cardinality: Cardinality::ManyToOne },
                LinkTypeDef { name: "has".into(), source: "t".into(), target: "i".into(), cardinality: Cardinality::ManyToMany },
            ],
        )
        .unwrap()
    }

    #[test]
    fn degree_vector_counts_rows() {
        let hin = Hin::with_counts(
            schema(),
            &[4, 2, 3],
            vec![vec![(0, 0), (1, 1), (2, 0)], vec![(0, 0), (1, 1), (2, 1), (2, 2)]],
        )
        .unwrap();
        let has = hin.schema().link("has").unwrap();
        assert_eq!(hin.degree_vector(has), vec![1, 1, 2, 0]);
        let by_u = hin.schema().link("byU").unwrap();
        assert_eq!(hin.degree_vector(by_u), vec![1, 1, 1, 0]);
        assert_eq!(hin.degree_vector(by_u.inverse()), vec![2, 1]);
    }

    #[test]
    fn restrict_keeps_induced_edges() {
        let hin = Hin::with_counts(
            schema(),
            &[4, 2, 3],
            vec![vec![(0, 0), (1, 1), (2, 0)], vec![(0, 0), (1, 1), (2, 1), (2, 2)]],
        )
        .unwrap();
        let sub = hin.restrict_targets(&[2, 0]).unwrap();
        assert_eq!(sub.node_counts(), vec![2, 2, 3]);
        assert_eq!(sub.node_ids(NodeTypeId(0)), ["2", "0"]);
        let has = sub.schema().link("has").unwrap();
        assert_eq!(sub.adjacency(has).row(0), [1, 2]);
        assert_eq!(sub.adjacency(has).row(1), [0]);
        assert!(hin.restrict_targets(&[9]).is_err());
    }

    #[test]
    fn transpose_round_trip() {
        let hin = Hin::with_counts(schema(), &[3, 2, 3], vec![vec![(0, 1)], vec![(0, 2), (1, 0), (2, 2)]]).unwrap();
        let has = hin.schema().link("has").unwrap();
        assert_eq!(&hin.adjacency(has.inverse()).transpose(), hin.adjacency(has));
    }

    #[test]
    fn many_to_one_violation() {
        let err = Hin::with_counts(schema(), &[2, 2, 1], vec![vec![(0, 0), (0, 1)], vec![]]).unwrap_err();
        assert!(matches!(err, Error::CardinalityViolation { ref row, count: 2, .. } if row == "0"));
    }

    #[test]
    fn duplicates_collapse() {
        let hin = Hin::with_counts(schema(), &[2, 2, 1], vec![vec![(0, 0), (0, 0)], vec![]]).unwrap();
        assert_eq!(hin.adjacency(LinkId::forward(0)).nnz(), 1);
    }
}
