//! Polytope serialization: JSON (all dimensions), OFF meshes, CSV vertex lists.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::search::{SearchStats, VertexSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeDoc {
    pub task_dim: usize,
    pub axes: Vec<String>,
    pub kind: String,
    pub vertices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<Vec<usize>>>,
    pub stats: SearchStats,
    /// Inputs echoed back (robot, configuration, flags).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
    /// Joints whose residual limits no longer bracket zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PolytopeDoc {
    pub fn new(set: &VertexSet, axes: Vec<String>, kind: impl Into<String>) -> Self {
        PolytopeDoc {
            task_dim: set.task_dim,
            axes,
            kind: kind.into(),
            vertices: set.vertices.clone(),
            facets: None,
            stats: set.stats,
            params: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn with_facets(mut self, polytope: &Polytope) -> Self {
        self.vertices = polytope.vertices.clone();
        self.facets = polytope.facets.clone();
        self
    }

    pub fn vertex_set(&self) -> VertexSet {
        VertexSet {
            task_dim: self.task_dim,
            vertices: self.vertices.clone(),
            stats: self.stats,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("finite values serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: Self = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        if let Some(v) = doc.vertices.iter().find(|v| v.len() != doc.task_dim) {
            return Err(Error::Validation(format!(
                "vertex has {} coordinates but task_dim is {}",
                v.len(),
                doc.task_dim
            )));
        }
        Ok(doc)
    }
}

/// OFF mesh of a three-dimensional polytope (vertices and outward triangles).
pub fn to_off(polytope: &Polytope) -> Result<String> {
    if polytope.dim != 3 {
        return Err(Error::Input(format!("OFF export needs a 3-dimensional polytope, got {}", polytope.dim)));
    }
    let Some(facets) = &polytope.facets else {
        return Err(Error::Degenerate("polytope is flat; no facets to export".into()));
    };
    let mut out = format!("OFF\n{} {} 0\n", polytope.vertices.len(), facets.len());
    for v in &polytope.vertices {
        let _ = writeln!(out, "{} {} {}", v[0], v[1], v[2]);
    }
    for f in facets {
        let idx: Vec<String> = f.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{} {}", f.len(), idx.join(" "));
    }
    Ok(out)
}

/// One vertex per row, with the axis names as header.
pub fn to_csv(axes: &[String], vertices: &[Vec<f64>]) -> String {
    let mut out = axes.join(",");
    out.push('\n');
    for v in vertices {
        let row: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
