//! Coloring, sizing and serialization of the mapper graph.
//!
//! Node color comes solely from the node's mean lens value mapped through a
//! piecewise-linear color map; node radius is proportional to the square
//! root of the member count. Every serializer here is deterministic: fixed
//! inputs produce byte-identical bytes.

mod html;

pub use html::to_html_report;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nerve::{LabelStats, SimplicialComplex};
use crate::pipeline::RunMetadata;

/// Piecewise-linear RGB gradient over `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorMap {
    anchors: Vec<(f64, [u8; 3])>,
}

impl Default for ColorMap {
    /// Dark purple at 0 through blue-violet midpoints to bright yellow at 1.
    fn default() -> Self {
        ColorMap {
            anchors: vec![
                (0.0, [48, 0, 72]),
                (0.25, [62, 74, 137]),
                (0.5, [38, 130, 142]),
                (0.75, [109, 205, 89]),
                (1.0, [253, 231, 37]),
            ],
        }
    }
}

impl ColorMap {
    pub fn new(anchors: Vec<(f64, [u8; 3])>) -> Result<Self> {
        if anchors.len() < 2 || anchors[0].0 != 0.0 || anchors.last().unwrap().0 != 1.0 {
            return Err(Error::InvalidParam(
                "color map anchors must start at 0 and end at 1".into(),
            ));
        }
        if anchors.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidParam(
                "color map anchor positions must be strictly increasing".into(),
            ));
        }
        Ok(ColorMap { anchors })
    }

    pub fn anchors(&self) -> &[(f64, [u8; 3])] {
        &self.anchors
    }

    /// Componentwise linear interpolation at `t` in `[0, 1]`.
    pub fn sample(&self, t: f64) -> [u8; 3] {
        let t = t.clamp(0.0, 1.0);
        let mut window = (self.anchors[0], self.anchors[1]);
        for w in self.anchors.windows(2) {
            if t >= w[0].0 {
                window = (w[0], w[1]);
            }
        }
        let ((p0, c0), (p1, c1)) = window;
        let f = if p1 > p0 { (t - p0) / (p1 - p0) } else { 0.0 };
        let mut rgb = [0u8; 3];
        for i in 0..3 {
            let v = c0[i] as f64 + f * (c1[i] as f64 - c0[i] as f64);
            rgb[i] = v.round() as u8;
        }
        rgb
    }
}

/// How node mean-lens values map onto the color map's `[0, 1]` axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColorScale {
    /// Normalize to the observed range of node means (full-gradient usage).
    Observed,
    /// Pin the axis to a fixed range (e.g. `[-1, 1]` for cosine lenses) so
    /// colors are comparable across runs.
    Pinned { lo: f64, hi: f64 },
}

impl ColorScale {
    pub fn name(&self) -> &'static str {
        match self {
            ColorScale::Observed => "observed",
            ColorScale::Pinned { .. } => "pinned",
        }
    }
}

/// Position of `mean` on the color axis `[lo, hi]`; degenerate ranges map
/// everything to 0.5.
pub fn colormap_position(mean: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        ((mean - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.5
    }
}

const RADIUS_COEFF: f64 = 0.3;

/// Node radius: `0.3 · sqrt(size)`.
pub fn node_radius(size: usize) -> f64 {
    RADIUS_COEFF * (size as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedNode {
    pub node_id: usize,
    pub interval_index: usize,
    pub cluster_index: usize,
    pub label: String,
    pub size: usize,
    pub mean_lens: f64,
    pub radius: f64,
    pub color: [u8; 3],
    pub members: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label_stats: Option<LabelStats>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedEdge {
    pub source: usize,
    pub target: usize,
    /// Number of shared records.
    pub weight: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HigherSimplex {
    pub vertices: Vec<usize>,
    pub weight: usize,
}

/// The canonical machine-readable output of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedGraph {
    pub metadata: RunMetadata,
    pub nodes: Vec<RenderedNode>,
    pub edges: Vec<RenderedEdge>,
    /// Simplices of dimension >= 2, present when max_dim > 1.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub higher_simplices: Vec<HigherSimplex>,
}

impl RenderedGraph {
    /// Observed range of node mean-lens values.
    pub fn mean_lens_range(&self) -> Option<(f64, f64)> {
        let mut it = self.nodes.iter().map(|n| n.mean_lens);
        let first = it.next()?;
        let mut lo = first;
        let mut hi = first;
        for m in it {
            lo = lo.min(m);
            hi = hi.max(m);
        }
        Some((lo, hi))
    }
}

fn scale_bounds(scale: ColorScale, observed: Option<(f64, f64)>) -> (f64, f64) {
    match scale {
        ColorScale::Pinned { lo, hi } => (lo, hi),
        ColorScale::Observed => observed.unwrap_or((0.0, 0.0)),
    }
}

/// Colors and sizes the complex into a serializable graph.
pub fn colorize(
    complex: &SimplicialComplex,
    metadata: RunMetadata,
    cmap: &ColorMap,
    scale: ColorScale,
) -> RenderedGraph {
    let observed = {
        let mut it = complex.nodes.iter().map(|n| n.mean_lens);
        it.next().map(|first| {
            complex
                .nodes
                .iter()
                .map(|n| n.mean_lens)
                .fold((first, first), |(lo, hi), m| (lo.min(m), hi.max(m)))
        })
    };
    let (lo, hi) = scale_bounds(scale, observed);
    let nodes = complex
        .nodes
        .iter()
        .map(|n| RenderedNode {
            node_id: n.node_id,
            interval_index: n.interval_index,
            cluster_index: n.cluster_index,
            label: format!("{} ({})", n.node_id, n.size),
            size: n.size,
            mean_lens: n.mean_lens,
            radius: node_radius(n.size),
            color: cmap.sample(colormap_position(n.mean_lens, lo, hi)),
            members: n.members.clone(),
            label_stats: n.label_stats,
        })
        .collect();
    let edges = complex
        .edges()
        .iter()
        .map(|e| RenderedEdge {
            source: e.vertices[0],
            target: e.vertices[1],
            weight: e.weight,
        })
        .collect();
    let higher_simplices = complex
        .simplices
        .iter()
        .skip(1)
        .flatten()
        .map(|s| HigherSimplex {
            vertices: s.vertices.clone(),
            weight: s.weight,
        })
        .collect();
    RenderedGraph {
        metadata,
        nodes,
        edges,
        higher_simplices,
    }
}

/// Recomputes node colors from stored mean-lens values.
pub fn recolor(graph: &mut RenderedGraph, cmap: &ColorMap, scale: ColorScale) {
    let (lo, hi) = scale_bounds(scale, graph.mean_lens_range());
    for node in &mut graph.nodes {
        node.color = cmap.sample(colormap_position(node.mean_lens, lo, hi));
    }
    graph.metadata.color_scale = scale.name().to_string();
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Emits an undirected Graphviz document: nodes in ascending id order, edges
/// in lexicographic (source, target) order, metadata as a comment header.
pub fn to_dot(graph: &RenderedGraph) -> String {
    let mut out = String::new();
    out.push_str("graph mapper {\n");
    out.push_str(&format!("  // {}\n", graph.metadata.tool));
    let meta = serde_json::to_string(&graph.metadata).expect("metadata serializes");
    out.push_str(&format!("  // metadata: {meta}\n"));
    out.push_str("  node [shape=circle style=filled fixedsize=true fontsize=10];\n");
    for n in &graph.nodes {
        let hex = format!("#{:02x}{:02x}{:02x}", n.color[0], n.color[1], n.color[2]);
        out.push_str(&format!(
            "  n{} [label=\"{}\" width={:.4} fillcolor=\"{}\" tooltip=\"{}\"];\n",
            n.node_id,
            dot_escape(&n.label),
            n.radius,
            hex,
            dot_escape(&format!(
                "interval {} cluster {} mean_lens {:.6}",
                n.interval_index, n.cluster_index, n.mean_lens
            )),
        ));
    }
    for e in &graph.edges {
        let penwidth = 1.0 + (e.weight as f64).ln();
        out.push_str(&format!(
            "  n{} -- n{} [weight={} penwidth={:.4}];\n",
            e.source, e.target, e.weight, penwidth
        ));
    }
    out.push_str("}\n");
    out
}

/// Serializes the canonical graph document (pretty JSON, trailing newline).
pub fn to_graph_file(graph: &RenderedGraph) -> String {
    let mut s = serde_json::to_string_pretty(graph).expect("graph serializes");
    s.push('\n');
    s
}

/// Parses a graph document produced by [`to_graph_file`].
pub fn from_graph_str(s: &str) -> Result<RenderedGraph> {
    serde_json::from_str(s).map_err(|e| Error::Parse {
        path: "<graph>".into(),
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn load_graph_file(path: &Path) -> Result<RenderedGraph> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_graph_str(&raw).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.display().to_string(),
            line,
            message,
        },
        other => other,
    })
}

pub fn save_graph_file(graph: &RenderedGraph, path: &Path) -> Result<()> {
    std::fs::write(path, to_graph_file(graph)).map_err(|e| Error::io(path, e))
}

/// Reconstructs the complex a graph document describes, so topology and
/// separation reports can run on loaded files.
pub fn to_complex(graph: &RenderedGraph) -> SimplicialComplex {
    let nodes = graph
        .nodes
        .iter()
        .map(|n| crate::nerve::MapperNode {
            node_id: n.node_id,
            interval_index: n.interval_index,
            cluster_index: n.cluster_index,
            members: n.members.clone(),
            size: n.size,
            mean_lens: n.mean_lens,
            label_stats: n.label_stats,
        })
        .collect();
    let max_dim = graph.metadata.max_dim.max(1);
    let mut simplices: Vec<Vec<crate::nerve::Simplex>> = vec![Vec::new(); max_dim];
    simplices[0] = graph
        .edges
        .iter()
        .map(|e| crate::nerve::Simplex {
            vertices: vec![e.source, e.target],
            weight: e.weight,
        })
        .collect();
    for s in &graph.higher_simplices {
        let dim = s.vertices.len() - 1;
        if dim >= 2 && dim <= max_dim {
            simplices[dim - 1].push(crate::nerve::Simplex {
                vertices: s.vertices.clone(),
                weight: s.weight,
            });
        }
    }
    SimplicialComplex {
        nodes,
        simplices,
        max_dim,
    }
}
