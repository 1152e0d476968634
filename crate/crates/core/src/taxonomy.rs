//! Rooted concept taxonomies and the four taxonomic relations.
//!
//! Taxonomies arrive as line-delimited JSON records:
//!
//! ```text
//! {"taxonomy_id":"t1","nodes":[{"id":"R","name":"animal","definition":""},...],"edges":[["a1","R"],...]}
//! ```
//!
//! Edges are `[child_id, parent_id]` pairs. A record may also carry an
//! optional `root` field; when absent the root is the unique parentless node.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A concept: surface term plus gloss.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConceptNode {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub definition: String,
}

impl ConceptNode {
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        definition: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            definition: definition.into(),
        }
    }
}

/// The four relations a node can hold to another node of its taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationKind {
    Parent,
    Ancestor,
    Sibling,
    FarRelative,
}

impl RelationKind {
    /// Edge distances a node at this relation can have from the fixed node.
    pub fn distances(self) -> &'static [usize] {
        match self {
            RelationKind::Parent => &[1],
            RelationKind::Ancestor | RelationKind::Sibling => &[2],
            RelationKind::FarRelative => &[3, 4],
        }
    }

    pub fn letter(self) -> char {
        match self {
            RelationKind::Parent => 'P',
            RelationKind::Ancestor => 'A',
            RelationKind::Sibling => 'S',
            RelationKind::FarRelative => 'F',
        }
    }
}

/// Relations of one node, materialized as id lists sorted by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSet {
    pub node: String,
    pub parent: Option<String>,
    pub ancestor: Option<String>,
    pub siblings: Vec<String>,
    pub far_relatives: Vec<String>,
}

impl RelationSet {
    pub fn members(&self, kind: RelationKind) -> Vec<&str> {
        match kind {
            RelationKind::Parent => self.parent.iter().map(String::as_str).collect(),
            RelationKind::Ancestor => self.ancestor.iter().map(String::as_str).collect(),
            RelationKind::Sibling => self.siblings.iter().map(String::as_str).collect(),
            RelationKind::FarRelative => self.far_relatives.iter().map(String::as_str).collect(),
        }
    }
}

/// A single structural problem in a taxonomy record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyTaxonomy,
    EmptyId,
    DuplicateNodeId(String),
    EmptyName(String),
    UnknownNodeInEdge { child: String, parent: String },
    ChildHasTwoParents { child: String, parents: [String; 2] },
    CycleDetected(String),
    MultipleRoots(Vec<String>),
    UnknownRoot(String),
    RootHasParent(String),
    Disconnected(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyTaxonomy => write!(f, "taxonomy has no nodes"),
            Violation::EmptyId => write!(f, "node with empty id"),
            Violation::DuplicateNodeId(id) => write!(f, "duplicate node id `{id}`"),
            Violation::EmptyName(id) => write!(f, "node `{id}` has an empty name"),
            Violation::UnknownNodeInEdge { child, parent } => {
                write!(f, "edge [{child}, {parent}] references an unknown node")
            }
            Violation::ChildHasTwoParents { child, parents } => write!(
                f,
                "node `{child}` has two parents `{}` and `{}`",
                parents[0], parents[1]
            ),
            Violation::CycleDetected(id) => write!(f, "cycle through node `{id}`"),
            Violation::MultipleRoots(ids) => write!(f, "multiple roots: {}", ids.join(", ")),
            Violation::UnknownRoot(id) => write!(f, "declared root `{id}` is not a node"),
            Violation::RootHasParent(id) => write!(f, "declared root `{id}` has a parent"),
            Violation::Disconnected(id) => write!(f, "node `{id}` is not reachable from the root"),
        }
    }
}

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("line {line}: malformed taxonomy record: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("taxonomy `{taxonomy_id}`: {violation}")]
    Invalid {
        taxonomy_id: String,
        violation: Violation,
    },
    #[error("duplicate taxonomy id `{0}`")]
    DuplicateTaxonomyId(String),
    #[error("taxonomy `{taxonomy_id}`: unknown node `{id}`")]
    UnknownNode { taxonomy_id: String, id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Unchecked taxonomy, as read from or written to a taxonomy file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyRecord {
    pub taxonomy_id: String,
    pub nodes: Vec<ConceptNode>,
    pub edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
}

#[derive(Deserialize)]
struct WireRecord {
    #[serde(flatten)]
    record: TaxonomyRecord,
    #[serde(flatten)]
    extra: BTreeMap<String, serde_json::Value>,
}

impl TaxonomyRecord {
    /// Every invariant violation in the record. Empty when the record forms a tree.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            out.push(Violation::EmptyTaxonomy);
            return out;
        }

        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id.is_empty() {
                out.push(Violation::EmptyId);
                continue;
            }
            if index.insert(node.id.as_str(), i).is_some() {
                out.push(Violation::DuplicateNodeId(node.id.clone()));
            }
        }
        for node in &self.nodes {
            if !node.id.is_empty() && node.name.trim().is_empty() {
                out.push(Violation::EmptyName(node.id.clone()));
            }
        }

        let mut parent: HashMap<&str, &str> = HashMap::new();
        for (child, par) in &self.edges {
            if !index.contains_key(child.as_str()) || !index.contains_key(par.as_str()) {
                out.push(Violation::UnknownNodeInEdge {
                    child: child.clone(),
                    parent: par.clone(),
                });
                continue;
            }
            match parent.get(child.as_str()) {
                Some(existing) if *existing != par.as_str() => {
                    out.push(Violation::ChildHasTwoParents {
                        child: child.clone(),
                        parents: [existing.to_string(), par.clone()],
                    });
                }
                Some(_) => {}
                None => {
                    parent.insert(child.as_str(), par.as_str());
                }
            }
        }

        // Cycle detection over the (functional) parent map.
        let mut state: HashMap<&str, u8> = HashMap::new(); // 1 = on stack, 2 = done
        let mut in_cycle: HashSet<&str> = HashSet::new();
        for node in &self.nodes {
            let start = node.id.as_str();
            if state.contains_key(start) {
                continue;
            }
            let mut path = Vec::new();
            let mut cur = Some(start);
            while let Some(c) = cur {
                match state.get(c) {
                    Some(1) => {
                        let pos = path.iter().position(|p| *p == c).unwrap_or(0);
                        let cycle = &path[pos..];
                        in_cycle.extend(cycle.iter().copied());
                        let smallest = cycle.iter().min().copied().unwrap_or(c);
                        out.push(Violation::CycleDetected(smallest.to_string()));
                        break;
                    }
                    Some(_) => break,
                    None => {
                        state.insert(c, 1);
                        path.push(c);
                        cur = parent.get(c).copied();
                    }
                }
            }
            for p in path {
                state.insert(p, 2);
            }
        }

        let parentless: Vec<&str> = self
            .nodes
            .iter()
            .map(|n| n.id.as_str())
            .filter(|id| !id.is_empty() && !parent.contains_key(id))
            .collect();
        let root = match &self.root {
            Some(declared) => {
                if !index.contains_key(declared.as_str()) {
                    out.push(Violation::UnknownRoot(declared.clone()));
                    None
                } else if parent.contains_key(declared.as_str()) {
                    out.push(Violation::RootHasParent(declared.clone()));
                    None
                } else {
                    Some(declared.as_str())
                }
            }
            None => match parentless.as_slice() {
                [only] => Some(*only),
                [] => None, // every node has a parent, so a cycle was already reported
                many => {
                    out.push(Violation::MultipleRoots(
                        many.iter().map(|s| s.to_string()).collect(),
                    ));
                    None
                }
            },
        };

        if let Some(root) = root {
            let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
            for (c, p) in &parent {
                children.entry(p).or_default().push(c);
            }
            let mut seen: HashSet<&str> = HashSet::new();
            let mut stack = vec![root];
            while let Some(n) = stack.pop() {
                if seen.insert(n) {
                    if let Some(cs) = children.get(n) {
                        stack.extend(cs.iter().copied());
                    }
                }
            }
            let mut reported = HashSet::new();
            for node in &self.nodes {
                let id = node.id.as_str();
                if id.is_empty() || seen.contains(id) || in_cycle.contains(id) {
                    continue;
                }
                if reported.insert(id) {
                    out.push(Violation::Disconnected(id.to_string()));
                }
            }
        }
        out
    }
}

/// A validated rooted tree of concepts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    id: String,
    nodes: Vec<ConceptNode>,
    index: HashMap<String, usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    root: usize,
}

/// Index-level relations used by the probe generator.
#[derive(Debug, Clone, Default)]
pub(crate) struct RelationIdx {
    pub parent: Option<usize>,
    pub ancestor: Option<usize>,
    pub siblings: Vec<usize>,
    pub far_relatives: Vec<usize>,
}

impl RelationIdx {
    pub fn members(&self, kind: RelationKind) -> &[usize] {
        match kind {
            RelationKind::Parent => self.parent.as_slice(),
            RelationKind::Ancestor => self.ancestor.as_slice(),
            RelationKind::Sibling => &self.siblings,
            RelationKind::FarRelative => &self.far_relatives,
        }
    }
}

impl TryFrom<TaxonomyRecord> for Taxonomy {
    type Error = TaxonomyError;

    fn try_from(record: TaxonomyRecord) -> Result<Self, Self::Error> {
        if let Some(violation) = record.validate().into_iter().next() {
            return Err(TaxonomyError::Invalid {
                taxonomy_id: record.taxonomy_id,
                violation,
            });
        }
        let index: HashMap<String, usize> = record
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();
        let mut parent = vec![None; record.nodes.len()];
        for (c, p) in &record.edges {
            parent[index[c]] = Some(index[p]);
        }
        let mut children = vec![Vec::new(); record.nodes.len()];
        for (c, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(c);
            }
        }
        for cs in &mut children {
            cs.sort_by(|a, b| record.nodes[*a].id.cmp(&record.nodes[*b].id));
        }
        let root = parent
            .iter()
            .position(Option::is_none)
            .expect("validated taxonomy has a root");
        let mut depth = vec![0; record.nodes.len()];
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            for &c in &children[n] {
                depth[c] = depth[n] + 1;
                stack.push(c);
            }
        }
        Ok(Taxonomy {
            id: record.taxonomy_id,
            nodes: record.nodes,
            index,
            parent,
            children,
            depth,
            root,
        })
    }
}

impl Taxonomy {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn root(&self) -> &ConceptNode {
        &self.nodes[self.root]
    }

    /// Nodes in their original file order.
    pub fn nodes(&self) -> &[ConceptNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: &str) -> Option<&ConceptNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn parent_of(&self, id: &str) -> Result<Option<&ConceptNode>, TaxonomyError> {
        let i = self.idx(id)?;
        Ok(self.parent[i].map(|p| &self.nodes[p]))
    }

    pub fn children_of(&self, id: &str) -> Result<Vec<&ConceptNode>, TaxonomyError> {
        let i = self.idx(id)?;
        Ok(self.children[i].iter().map(|&c| &self.nodes[c]).collect())
    }

    pub fn depth(&self, id: &str) -> Result<usize, TaxonomyError> {
        Ok(self.depth[self.idx(id)?])
    }

    /// Longest root-to-leaf path, in edges.
    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Number of edges on the unique path between `a` and `b`.
    pub fn edge_distance(&self, a: &str, b: &str) -> Result<usize, TaxonomyError> {
        Ok(self.distance_idx(self.idx(a)?, self.idx(b)?))
    }

    pub fn relations_of(&self, n: &str) -> Result<RelationSet, TaxonomyError> {
        let rel = self.relations_idx(self.idx(n)?);
        let id = |i: usize| self.nodes[i].id.clone();
        Ok(RelationSet {
            node: n.to_string(),
            parent: rel.parent.map(id),
            ancestor: rel.ancestor.map(id),
            siblings: rel.siblings.iter().map(|&i| id(i)).collect(),
            far_relatives: rel.far_relatives.iter().map(|&i| id(i)).collect(),
        })
    }

    /// Re-checks the tree invariants; always empty for a constructed taxonomy.
    pub fn validate(&self) -> Vec<Violation> {
        self.to_record().validate()
    }

    pub fn to_record(&self) -> TaxonomyRecord {
        let edges = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (self.nodes[c].id.clone(), self.nodes[p].id.clone())))
            .collect();
        TaxonomyRecord {
            taxonomy_id: self.id.clone(),
            nodes: self.nodes.clone(),
            edges,
            root: None,
        }
    }

    pub(crate) fn idx(&self, id: &str) -> Result<usize, TaxonomyError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| TaxonomyError::UnknownNode {
                taxonomy_id: self.id.clone(),
                id: id.to_string(),
            })
    }

    pub(crate) fn node_at(&self, i: usize) -> &ConceptNode {
        &self.nodes[i]
    }

    /// Node indices sorted by node id.
    pub(crate) fn sorted_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.nodes.len()).collect();
        idx.sort_by(|a, b| self.nodes[*a].id.cmp(&self.nodes[*b].id));
        idx
    }

    pub(crate) fn distance_idx(&self, a: usize, b: usize) -> usize {
        let (mut x, mut y) = (a, b);
        let mut dist = 0;
        while self.depth[x] > self.depth[y] {
            x = self.parent[x].expect("non-root");
            dist += 1;
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y].expect("non-root");
            dist += 1;
        }
        while x != y {
            x = self.parent[x].expect("non-root");
            y = self.parent[y].expect("non-root");
            dist += 2;
        }
        dist
    }

    /// Far relatives are restricted to the ancestor's descendants at most as
    /// deep as `n` (edge distance 3 or 4), outside the parent's subtree.
    pub(crate) fn relations_idx(&self, n: usize) -> RelationIdx {
        let Some(parent) = self.parent[n] else {
            return RelationIdx::default();
        };
        let siblings: Vec<usize> = self.children[parent]
            .iter()
            .copied()
            .filter(|&s| s != n)
            .collect();
        let ancestor = self.parent[parent];
        let mut far_relatives = Vec::new();
        if let Some(a) = ancestor {
            for &uncle in self.children[a].iter().filter(|&&u| u != parent) {
                far_relatives.push(uncle);
                far_relatives.extend(self.children[uncle].iter().copied());
            }
            far_relatives.sort_by(|x, y| self.nodes[*x].id.cmp(&self.nodes[*y].id));
        }
        RelationIdx {
            parent: Some(parent),
            ancestor,
            siblings,
            far_relatives,
        }
    }
}

/// Reads every taxonomy record of a line-delimited file, in file order.
pub fn parse_taxonomies<R: BufRead>(input: R) -> Result<Vec<Taxonomy>, TaxonomyError> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let wire: WireRecord =
            serde_json::from_str(&line).map_err(|e| TaxonomyError::MalformedRecord {
                line: i + 1,
                message: e.to_string(),
            })?;
        for key in wire.extra.keys() {
            log::warn!("line {}: ignoring unknown field `{key}`", i + 1);
        }
        let record = wire.record;
        if !ids.insert(record.taxonomy_id.clone()) {
            return Err(TaxonomyError::DuplicateTaxonomyId(record.taxonomy_id));
        }
        out.push(Taxonomy::try_from(record)?);
    }
    Ok(out)
}

pub fn write_taxonomies<W: Write>(
    mut out: W,
    taxonomies: &[Taxonomy],
) -> Result<(), TaxonomyError> {
    for tax in taxonomies {
        let line = serde_json::to_string(&tax.to_record()).map_err(std::io::Error::other)?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}
