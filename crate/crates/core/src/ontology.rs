//! Rooted concept taxonomy (the shared vocabulary tree) with depth,
//! lowest-common-ancestor, distance, and similarity queries.
//!
//! The taxonomy is a strict tree: one root, every other concept has exactly
//! one parent, labels are unique among siblings. Concept ids are dense
//! integers assigned in insertion order, which makes the serialized document
//! canonical. Depths are 1-based (the root has depth 1) so that the
//! similarity of two distinct top-level concepts is strictly positive.
//!
//! Distance is the edge count of the unique tree path between two concepts;
//! similarity is `2·depth(lca) / (depth(a) + depth(b))`, which is 1 exactly
//! when the two concepts are the same.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stable identifier of one concept within one [`Taxonomy`].
///
/// Ids are dense indices assigned in insertion order and are never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptId(pub u32);

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaxonomyError {
    #[error("unknown parent concept {0}")]
    UnknownParent(ConceptId),
    #[error("label {label:?} already exists under parent {parent}")]
    DuplicateSiblingLabel { parent: ConceptId, label: String },
    #[error("unknown concept {0}")]
    UnknownConcept(ConceptId),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cycle or orphan at line {line}: {message}")]
    CycleOrOrphan { line: usize, message: String },
    #[error("no concept with path {0:?}")]
    UnknownPath(String),
}

#[derive(Debug, Clone)]
struct ConceptNode {
    label: String,
    parent: Option<ConceptId>,
    children: Vec<ConceptId>,
    depth: u32,
}

/// Rooted tree of named concepts.
///
/// Immutable after construction in normal use; all queries take `&self`.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    nodes: Vec<ConceptNode>,
}

impl Taxonomy {
    /// Creates a taxonomy containing only the root concept.
    pub fn new(root_label: impl Into<String>) -> Self {
        Taxonomy {
            nodes: vec![ConceptNode {
                label: root_label.into(),
                parent: None,
                children: Vec::new(),
                depth: 1,
            }],
        }
    }

    pub fn root(&self) -> ConceptId {
        ConceptId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a taxonomy always has a root
    }

    pub fn contains(&self, c: ConceptId) -> bool {
        (c.0 as usize) < self.nodes.len()
    }

    fn node(&self, c: ConceptId) -> Result<&ConceptNode, TaxonomyError> {
        self.nodes
            .get(c.0 as usize)
            .ok_or(TaxonomyError::UnknownConcept(c))
    }

    /// Adds a new leaf concept under `parent`.
    ///
    /// Labels must be unique among siblings (case-sensitive).
    pub fn add_concept(
        &mut self,
        parent: ConceptId,
        label: impl Into<String>,
    ) -> Result<ConceptId, TaxonomyError> {
        let label = label.into();
        let parent_node = self
            .nodes
            .get(parent.0 as usize)
            .ok_or(TaxonomyError::UnknownParent(parent))?;
        if parent_node
            .children
            .iter()
            .any(|&c| self.nodes[c.0 as usize].label == label)
        {
            return Err(TaxonomyError::DuplicateSiblingLabel { parent, label });
        }
        let id = ConceptId(self.nodes.len() as u32);
        let depth = parent_node.depth + 1;
        self.nodes.push(ConceptNode {
            label,
            parent: Some(parent),
            children: Vec::new(),
            depth,
        });
        self.nodes[parent.0 as usize].children.push(id);
        Ok(id)
    }

    pub fn label(&self, c: ConceptId) -> Result<&str, TaxonomyError> {
        Ok(&self.node(c)?.label)
    }

    pub fn parent(&self, c: ConceptId) -> Result<Option<ConceptId>, TaxonomyError> {
        Ok(self.node(c)?.parent)
    }

    pub fn children(&self, c: ConceptId) -> Result<&[ConceptId], TaxonomyError> {
        Ok(&self.node(c)?.children)
    }

    /// Depth of a concept; the root has depth 1.
    pub fn depth(&self, c: ConceptId) -> Result<u32, TaxonomyError> {
        Ok(self.node(c)?.depth)
    }

    /// Deepest concept that is an ancestor-or-self of both `a` and `b`.
    pub fn lca(&self, a: ConceptId, b: ConceptId) -> Result<ConceptId, TaxonomyError> {
        let mut x = a;
        let mut y = b;
        let mut dx = self.depth(x)?;
        let mut dy = self.depth(y)?;
        while dx > dy {
            x = self.nodes[x.0 as usize].parent.expect("depth > 1 has parent");
            dx -= 1;
        }
        while dy > dx {
            y = self.nodes[y.0 as usize].parent.expect("depth > 1 has parent");
            dy -= 1;
        }
        while x != y {
            x = self.nodes[x.0 as usize].parent.expect("distinct at depth 1 impossible");
            y = self.nodes[y.0 as usize].parent.expect("distinct at depth 1 impossible");
        }
        Ok(x)
    }

    /// Edge count of the unique tree path between `a` and `b`.
    pub fn concept_distance(&self, a: ConceptId, b: ConceptId) -> Result<u32, TaxonomyError> {
        let da = self.depth(a)?;
        let db = self.depth(b)?;
        let dl = self.depth(self.lca(a, b)?)?;
        Ok(da + db - 2 * dl)
    }

    /// Depth-of-common-ancestor ratio in [0, 1]; 1 exactly when `a == b`.
    pub fn concept_similarity(&self, a: ConceptId, b: ConceptId) -> Result<f64, TaxonomyError> {
        let da = self.depth(a)? as f64;
        let db = self.depth(b)? as f64;
        let dl = self.depth(self.lca(a, b)?)? as f64;
        Ok(2.0 * dl / (da + db))
    }

    /// Resolves a concept by its full path of labels below the root,
    /// components joined by `/` (for example `Music/Jazz`). The root's own
    /// label resolves to the root.
    pub fn resolve_path(&self, path: &str) -> Result<ConceptId, TaxonomyError> {
        if path == self.nodes[0].label {
            return Ok(self.root());
        }
        let mut current = self.root();
        for component in path.split('/') {
            let next = self.nodes[current.0 as usize]
                .children
                .iter()
                .copied()
                .find(|&c| self.nodes[c.0 as usize].label == component);
            match next {
                Some(c) => current = c,
                None => return Err(TaxonomyError::UnknownPath(path.to_string())),
            }
        }
        Ok(current)
    }

    /// Full path of labels below the root for `c`; the root yields its own label.
    pub fn path_of(&self, c: ConceptId) -> Result<String, TaxonomyError> {
        let node = self.node(c)?;
        if node.parent.is_none() {
            return Ok(node.label.clone());
        }
        let mut parts = vec![node.label.as_str()];
        let mut cur = node.parent;
        while let Some(p) = cur {
            let pn = &self.nodes[p.0 as usize];
            if pn.parent.is_none() {
                break; // root label is not part of the path
            }
            parts.push(pn.label.as_str());
            cur = pn.parent;
        }
        parts.reverse();
        Ok(parts.join("/"))
    }

    /// Iterates all concept ids in insertion order.
    pub fn concepts(&self) -> impl Iterator<Item = ConceptId> + '_ {
        (0..self.nodes.len() as u32).map(ConceptId)
    }

    /// Serializes to the taxonomy document format: one node per line,
    /// `<id>TAB<parent-id-or-dash>TAB<label>`, ids in insertion order.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for (i, node) in self.nodes.iter().enumerate() {
            match node.parent {
                None => out.push_str(&format!("{}\t-\t{}\n", i, node.label)),
                Some(p) => out.push_str(&format!("{}\t{}\t{}\n", i, p.0, node.label)),
            }
        }
        out
    }
}

/// Parses a taxonomy document.
///
/// One node per line, `<id>TAB<parent-id-or-dash>TAB<label>`. The first line
/// must be the root (parent `-`). Ids must be the dense sequence 0, 1, 2, ...
/// in line order, and every parent must refer to an earlier line; anything
/// else is a [`TaxonomyError::CycleOrOrphan`]. Blank lines are not allowed.
pub fn load_taxonomy(text: &str) -> Result<Taxonomy, TaxonomyError> {
    let mut taxonomy: Option<Taxonomy> = None;
    let mut count = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut fields = raw.split('\t');
        let (id_s, parent_s, label) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), Some(c)) if fields.next().is_none() => (a, b, c),
            _ => {
                return Err(TaxonomyError::Parse {
                    line: line_no,
                    message: format!("expected 3 tab-separated fields, got {:?}", raw),
                })
            }
        };
        let id: u32 = id_s.parse().map_err(|_| TaxonomyError::Parse {
            line: line_no,
            message: format!("invalid concept id {:?}", id_s),
        })?;
        if id as usize != idx {
            return Err(TaxonomyError::Parse {
                line: line_no,
                message: format!("ids must be dense and in order; expected {}, got {}", idx, id),
            });
        }
        if label.is_empty() {
            return Err(TaxonomyError::Parse {
                line: line_no,
                message: "empty label".to_string(),
            });
        }
        if parent_s == "-" {
            if idx != 0 {
                return Err(TaxonomyError::CycleOrOrphan {
                    line: line_no,
                    message: "second root (parent `-` after line 1)".to_string(),
                });
            }
            taxonomy = Some(Taxonomy::new(label));
        } else {
            let parent: u32 = parent_s.parse().map_err(|_| TaxonomyError::Parse {
                line: line_no,
                message: format!("invalid parent id {:?}", parent_s),
            })?;
            let t = taxonomy.as_mut().ok_or(TaxonomyError::CycleOrOrphan {
                line: line_no,
                message: "first line must be the root (parent `-`)".to_string(),
            })?;
            if parent as usize >= idx {
                return Err(TaxonomyError::CycleOrOrphan {
                    line: line_no,
                    message: format!("parent {} not defined before line {}", parent, line_no),
                });
            }
            t.add_concept(ConceptId(parent), label)
                .map_err(|e| match e {
                    TaxonomyError::DuplicateSiblingLabel { .. } => TaxonomyError::Parse {
                        line: line_no,
                        message: format!("duplicate sibling label {:?}", label),
                    },
                    other => other,
                })?;
        }
        count = line_no;
    }
    match taxonomy {
        Some(t) => {
            debug_assert_eq!(t.len(), count);
            Ok(t)
        }
        None => Err(TaxonomyError::Parse {
            line: 0,
            message: "empty document; a root line is required".to_string(),
        }),
    }
}
