//! JSON input files (graphs with an optional measure, functions, partitions), SHA-256
//! input digests and DOT export.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{GraphPoint, GraphSpec, MetricGraph};
use crate::measure::{DensityPiece, Measure, Piece, PiecewiseFunction};
use crate::subset::{ConnectedSubset, Interval, Partition};

/// A point named by a vertex, or by an edge and an offset from its `from` end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Vertex { vertex: String },
    OnEdge { edge: String, offset: f64 },
}

impl PointSpec {
    pub fn resolve(&self, g: &MetricGraph) -> Result<GraphPoint> {
        match self {
            PointSpec::Vertex { vertex } => Ok(GraphPoint::Vertex(g.vertex_by_name(vertex)?)),
            PointSpec::OnEdge { edge, offset } => {
                let e = g.edge_by_name(edge)?;
                let len = g.edge(e).length;
                if !(offset.is_finite() && *offset >= 0.0 && *offset <= len) {
                    return Err(Error::PointNotOnGraph(format!("offset {offset} on edge `{edge}` of length {len}")));
                }
                Ok(g.point(e, *offset))
            }
        }
    }

    pub fn describe(g: &MetricGraph, p: &GraphPoint) -> Self {
        match *p {
            GraphPoint::Vertex(v) => PointSpec::Vertex { vertex: g.vertex_name(v).to_string() },
            GraphPoint::OnEdge { edge, offset } => PointSpec::OnEdge { edge: g.edge_name(edge).to_string(), offset },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    #[serde(flatten)]
    pub at: PointSpec,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPieceSpec {
    pub from: f64,
    pub to: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDensitySpec {
    pub edge: String,
    pub pieces: Vec<DensityPieceSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub density: Vec<EdgeDensitySpec>,
}

impl MeasureSpec {
    pub fn build(&self, g: &MetricGraph) -> Result<Measure> {
        let atoms = self.atoms.iter().map(|a| Ok((a.at.resolve(g)?, a.mass))).collect::<Result<Vec<_>>>()?;
        let mut density = Vec::new();
        for d in &self.density {
            let e = g.edge_by_name(&d.edge)?;
            density.extend(d.pieces.iter().map(|p| (e, DensityPiece { from: p.from, to: p.to, value: p.value })));
        }
        Measure::new(g, atoms, density)
    }

    pub fn describe(g: &MetricGraph, m: &Measure) -> Self {
        MeasureSpec {
            atoms: m.atoms().iter().map(|(p, mass)| AtomSpec { at: PointSpec::describe(g, p), mass: *mass }).collect(),
            density: g
                .edge_ids()
                .filter(|&e| !m.density(e).is_empty())
                .map(|e| EdgeDensitySpec {
                    edge: g.edge_name(e).to_string(),
                    pieces: m
                        .density(e)
                        .iter()
                        .map(|p| DensityPieceSpec { from: p.from, to: p.to, value: p.value })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Graph file: `{"vertices": [...], "edges": [{"id", "from", "to", "length"}], "measure": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    #[serde(flatten)]
    pub graph: GraphSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
}

/// One piece of a function on an edge: either `value` (constant) or `start`/`end`
/// (linear), over the offsets `from..to`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionPieceSpec {
    pub edge: String,
    pub from: f64,
    pub to: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<f64>,
}

/// Function file: `{"constant": c}` or `{"pieces": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Constant { constant: f64 },
    Pieces { pieces: Vec<FunctionPieceSpec> },
}

impl FunctionSpec {
    pub fn build(&self, g: &MetricGraph) -> Result<PiecewiseFunction> {
        match self {
            FunctionSpec::Constant { constant } => Ok(PiecewiseFunction::constant(g, *constant)),
            FunctionSpec::Pieces { pieces } => {
                let mut per_edge = vec![Vec::new(); g.edge_count()];
                for p in pieces {
                    let e = g.edge_by_name(&p.edge)?;
                    let (start, end) = match (p.value, p.start, p.end) {
                        (Some(v), None, None) => (v, v),
                        (None, Some(s), Some(t)) => (s, t),
                        _ => {
                            return Err(Error::InvalidParameter(format!(
                                "piece on edge `{}` needs either `value` or both `start` and `end`",
                                p.edge
                            )))
                        }
                    };
                    per_edge[e.0].push(Piece { from: p.from, to: p.to, start, end });
                }
                for ps in &mut per_edge {
                    ps.sort_by(|a, b| a.from.total_cmp(&b.from));
                }
                PiecewiseFunction::new(g, per_edge)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpec {
    pub edge: String,
    pub from: f64,
    pub to: f64,
}

/// A connected subset: closed intervals, extra isolated vertices of the closure, and
/// removed points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartSpec {
    #[serde(default)]
    pub intervals: Vec<IntervalSpec>,
    #[serde(default)]
    pub vertices: Vec<String>,
    #[serde(default)]
    pub excluded: Vec<PointSpec>,
}

impl PartSpec {
    pub fn build(&self, g: &MetricGraph) -> Result<ConnectedSubset> {
        let intervals = self
            .intervals
            .iter()
            .map(|iv| Ok(Interval { edge: g.edge_by_name(&iv.edge)?, lo: iv.from, hi: iv.to }))
            .collect::<Result<Vec<_>>>()?;
        let vertices = self.vertices.iter().map(|v| g.vertex_by_name(v)).collect::<Result<Vec<_>>>()?;
        let excluded = self.excluded.iter().map(|p| p.resolve(g)).collect::<Result<Vec<_>>>()?;
        Ok(ConnectedSubset::from_parts(g, intervals, vertices, excluded))
    }

    pub fn describe(g: &MetricGraph, s: &ConnectedSubset) -> Self {
        PartSpec {
            intervals: s
                .intervals()
                .iter()
                .map(|iv| IntervalSpec { edge: g.edge_name(iv.edge).to_string(), from: iv.lo, to: iv.hi })
                .collect(),
            vertices: s.closure_vertices().iter().map(|&v| g.vertex_name(v).to_string()).collect(),
            excluded: s.excluded().iter().map(|p| PointSpec::describe(g, p)).collect(),
        }
    }
}

/// Parts file: `{"parts": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartsFile {
    pub parts: Vec<PartSpec>,
}

impl PartsFile {
    pub fn build(&self, g: &MetricGraph) -> Result<Partition> {
        Ok(Partition::new(self.parts.iter().map(|p| p.build(g)).collect::<Result<_>>()?))
    }
}

/// A parsed file together with the hex SHA-256 of its bytes.
#[derive(Clone, Debug)]
pub struct Loaded<T> {
    pub value: T,
    pub digest: String,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads and parses a JSON file; syntax errors carry the line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Loaded<T>> {
    let file = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| Error::Parse { file: file.clone(), message: e.to_string() })?;
    let value = serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
        file,
        message: format!("line {}, column {}: {}", e.line(), e.column(), e),
    })?;
    Ok(Loaded { value, digest: digest(&bytes) })
}

/// Attaches the file name to a semantic error found while building from a parsed file.
pub fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::Parse { file: path.display().to_string(), message: other.to_string() },
    })
}

pub fn load_graph(path: &Path) -> Result<(MetricGraph, Option<Measure>, String)> {
    let loaded: Loaded<GraphFile> = read_json(path)?;
    let g = in_file(path, MetricGraph::from_spec(&loaded.value.graph))?;
    let mu = match &loaded.value.measure {
        Some(m) => Some(in_file(path, m.build(&g))?),
        None => None,
    };
    Ok((g, mu, loaded.digest))
}

pub fn load_function(path: &Path, g: &MetricGraph) -> Result<(PiecewiseFunction, String)> {
    let loaded: Loaded<FunctionSpec> = read_json(path)?;
    Ok((in_file(path, loaded.value.build(g))?, loaded.digest))
}

pub fn load_parts(path: &Path, g: &MetricGraph) -> Result<(Partition, String)> {
    let loaded: Loaded<PartsFile> = read_json(path)?;
    Ok((in_file(path, loaded.value.build(g))?, loaded.digest))
}

const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

/// DOT rendering with one line per part interval, coloured by part. Interval ends
/// inside an edge become small point nodes.
pub fn to_dot(g: &MetricGraph, parts: &Partition) -> String {
    let mut out = String::from("graph metgraph {\n  node [shape=circle, fontsize=10];\n");
    for v in g.vertices() {
        let _ = writeln!(out, "  \"{}\";", g.vertex_name(v));
    }
    let node = |e: crate::graph::EdgeId, t: f64, out: &mut String| -> String {
        let edge = g.edge(e);
        if t <= 0.0 {
            g.vertex_name(edge.from).to_string()
        } else if t >= edge.length {
            g.vertex_name(edge.to).to_string()
        } else {
            let name = format!("{}@{}", g.edge_name(e), t);
            let _ = writeln!(out, "  \"{name}\" [shape=point];");
            name
        }
    };
    for (j, part) in parts.parts.iter().enumerate() {
        let colour = PALETTE[j % PALETTE.len()];
        for iv in part.intervals() {
            let a = node(iv.edge, iv.lo, &mut out);
            let b = node(iv.edge, iv.hi, &mut out);
            let _ = writeln!(
                out,
                "  \"{a}\" -- \"{b}\" [color=\"{colour}\", penwidth=2, label=\"{} part {j}\"];",
                g.edge_name(iv.edge)
            );
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_file_round_trip() {
        let text = r#"{
            "vertices": ["a", "b"],
            "edges": [{"id": "e", "from": "a", "to": "b", "length": 2.0}],
            "measure": {"atoms": [{"vertex": "b", "mass": 1.5}, {"edge": "e", "offset": 0.5, "mass": 1}],
                        "density": [{"edge": "e", "pieces": [{"from": 0, "to": 1, "value": 3}]}]}
        }"#;
        let file: GraphFile = serde_json::from_str(text).unwrap();
        let g = MetricGraph::from_spec(&file.graph).unwrap();
        let mu = file.measure.as_ref().unwrap().build(&g).unwrap();
        assert_eq!(mu.total(&g), 5.5);
        let back = MeasureSpec::describe(&g, &mu);
        assert_eq!(back.build(&g).unwrap().total(&g), 5.5);
    }

    #[test]
    fn function_and_parts() {
        let g = MetricGraph::segment(1.0).unwrap();
        let f: FunctionSpec =
            serde_json::from_str(r#"{"pieces": [{"edge": "e0", "from": 0, "to": 1, "start": 0, "end": 2}]}"#).unwrap();
        let u = f.build(&g).unwrap();
        assert_eq!(u.value_on_edge(crate::graph::EdgeId(0), 0.25), 0.5);
        let parts: PartsFile = serde_json::from_str(
            r#"{"parts": [{"intervals": [{"edge": "e0", "from": 0, "to": 0.5}], "excluded": [{"edge": "e0", "offset": 0.5}]},
                          {"intervals": [{"edge": "e0", "from": 0.5, "to": 1}]}]}"#,
        )
        .unwrap();
        let p = parts.build(&g).unwrap();
        assert!(p.check_exact_cover(&g).is_ok());
        let spec = PartSpec::describe(&g, &p.parts[0]);
        assert_eq!(spec.build(&g).unwrap(), p.parts[0]);
    }

    #[test]
    fn syntax_error_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\n  \"edges\": [\n    {\"id\": 1,}\n").unwrap();
        match load_graph(&path) {
            Err(Error::Parse { message, .. }) => assert!(message.starts_with("line 3"), "{message}"),
            other => panic!("{other:?}"),
        }
    }
}
