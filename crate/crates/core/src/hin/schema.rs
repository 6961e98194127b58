use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Suffix marking the inverse of a declared link type.
pub const INVERSE_SUFFIX: &str = "⁻¹";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Target,
    Attribute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cardinality {
    ManyToOne,
    OneToOne,
    OneToMany,
    ManyToMany,
}

impl Cardinality {
    /// Cardinality of the inverse relation.
    pub fn mirror(self) -> Self {
        match self {
            Cardinality::ManyToOne => Cardinality::OneToMany,
            Cardinality::OneToMany => Cardinality::ManyToOne,
            other => other,
        }
    }

    /// At most one target per source node.
    pub fn is_single_valued(self) -> bool {
        matches!(self, Cardinality::ManyToOne | Cardinality::OneToOne)
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Cardinality::ManyToOne => "many_to_one",
            Cardinality::OneToOne => "one_to_one",
            Cardinality::OneToMany => "one_to_many",
            Cardinality::ManyToMany => "many_to_many",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTypeDef {
    pub name: String,
    pub role: NodeRole,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkTypeDef {
    pub name: String,
    pub source: String,
    pub target: String,
    pub cardinality: Cardinality,
}

/// Index of a node type within its schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeTypeId(pub usize);

/// A declared link type or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkId {
    pub index: usize,
    pub inverted: bool,
}

impl LinkId {
    pub fn forward(index: usize) -> Self {
        LinkId { index, inverted: false }
    }

    pub fn inverse(self) -> Self {
        LinkId { index: self.index, inverted: !self.inverted }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SchemaFile {
    #[serde(default)]
    target_type: Option<String>,
    node_types: Vec<NodeTypeDef>,
    #[serde(default)]
    link_types: Vec<LinkTypeDef>,
}

/// Type-level description of a heterogeneous information network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HinSchema {
    node_types: Vec<NodeTypeDef>,
    link_types: Vec<LinkTypeDef>,
    target: NodeTypeId,
    link_endpoints: Vec<(NodeTypeId, NodeTypeId)>,
}

impl HinSchema {
    /// Validates and indexes a schema. The target type is the single node
    /// type with role `target`.
    pub fn new(node_types: Vec<NodeTypeDef>, link_types: Vec<LinkTypeDef>) -> Result<Self> {
        let mut seen = HashSet::new();
        for nt in &node_types {
            if nt.name.is_empty() || !seen.insert(nt.name.as_str()) {
                return Err(Error::SchemaMismatch(format!("duplicate or empty node type {:?}", nt.name)));
            }
        }
        let targets: Vec<usize> = node_types
            .iter()
            .enumerate()
            .filter(|(_, nt)| nt.role == NodeRole::Target)
            .map(|(i, _)| i)
            .collect();
        if targets.len() != 1 {
            return Err(Error::SchemaMismatch(format!(
                "exactly one target node type required, found {}",
                targets.len()
            )));
        }
        let find = |name: &str| -> Result<NodeTypeId> {
            node_types
                .iter()
                .position(|nt| nt.name == name)
                .map(NodeTypeId)
                .ok_or_else(|| Error::UnknownNodeType(name.to_string()))
        };
        let mut link_names = HashSet::new();
        let mut link_endpoints = Vec::with_capacity(link_types.len());
        for lt in &link_types {
            if lt.name.is_empty() || lt.name.ends_with(INVERSE_SUFFIX) {
                return Err(Error::SchemaMismatch(format!(
                    "link name {:?} is empty or uses the reserved inverse suffix",
                    lt.name
                )));
            }
            if !link_names.insert(lt.name.as_str()) {
                return Err(Error::SchemaMismatch(format!("duplicate link type {}", lt.name)));
            }
            link_endpoints.push((find(&lt.source)?, find(&lt.target)?));
        }
        Ok(HinSchema { node_types, link_types, target: NodeTypeId(targets[0]), link_endpoints })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SchemaFile =
            toml::from_str(text).map_err(|e| Error::SchemaMismatch(format!("schema file: {e}")))?;
        let schema = HinSchema::new(file.node_types, file.link_types)?;
        if let Some(t) = file.target_type {
            if t != schema.node_type_name(schema.target) {
                return Err(Error::SchemaMismatch(format!(
                    "target_type {t} is not the node type marked as target"
                )));
            }
        }
        Ok(schema)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let file = SchemaFile {
            target_type: Some(self.node_type_name(self.target).to_string()),
            node_types: self.node_types.clone(),
            link_types: self.link_types.clone(),
        };
        toml::to_string(&file).expect("schema serializes")
    }

    pub fn node_types(&self) -> &[NodeTypeDef] {
        &self.node_types
    }

    pub fn link_types(&self) -> &[LinkTypeDef] {
        &self.link_types
    }

    pub fn target(&self) -> NodeTypeId {
        self.target
    }

    pub fn node_type_count(&self) -> usize {
        self.node_types.len()
    }

    pub fn node_type(&self, name: &str) -> Result<NodeTypeId> {
        self.node_types
            .iter()
            .position(|nt| nt.name == name)
            .map(NodeTypeId)
            .ok_or_else(|| Error::UnknownNodeType(name.to_string()))
    }

    pub fn node_type_name(&self, id: NodeTypeId) -> &str {
        &self.node_types[id.0].name
    }

    /// Resolves a link name, accepting the inverse suffix.
    pub fn link(&self, name: &str) -> Result<LinkId> {
        let (base, inverted) = match name.strip_suffix(INVERSE_SUFFIX) {
            Some(base) => (base, true),
            None => (name, false),
        };
        self.link_types
            .iter()
            .position(|lt| lt.name == base)
            .map(|index| LinkId { index, inverted })
            .ok_or_else(|| Error::UnknownLink(name.to_string()))
    }

    pub fn link_name(&self, link: LinkId) -> String {
        let base = &self.link_types[link.index].name;
        if link.inverted {
            format!("{base}{INVERSE_SUFFIX}")
        } else {
            base.clone()
        }
    }

    /// `(source, target)` node types of a possibly inverted link.
    pub fn endpoints(&self, link: LinkId) -> (NodeTypeId, NodeTypeId) {
        let (s, t) = self.link_endpoints[link.index];
        if link.inverted {
            (t, s)
        } else {
            (s, t)
        }
    }

    pub fn cardinality(&self, link: LinkId) -> Cardinality {
        let c = self.link_types[link.index].cardinality;
        if link.inverted {
            c.mirror()
        } else {
            c
        }
    }

    /// Every declared link followed by its inverse, in declaration order.
    pub fn directed_links(&self) -> impl Iterator<Item = LinkId> + '_ {
        (0..self.link_types.len()).flat_map(|i| [LinkId::forward(i), LinkId::forward(i).inverse()])
    }

    /// Name of the inverse of `link`.
    pub fn invert_link(&self, link: &str) -> Result<String> {
        Ok(self.link_name(self.link(link)?.inverse()))
    }
}
