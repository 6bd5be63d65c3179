//! Source features from serialized program graphs.
//!
//! A corpus file lists functions, each with up to one graph per kind:
//!
//! ```json
//! {"functions": [{"function_id": "f", "label": 1,
//!   "graphs": [{"kind": "AST",
//!               "nodes": [{"id": 0, "type": "CallExpression"}, {"id": 1, "type": "BinaryOperator"}],
//!               "edges": [{"src": 0, "dst": 1, "label": "argument"}]}]}]}
//! ```
//!
//! `label` is optional and only used when the features are written as a
//! dataset. Feature keys per graph kind `K`:
//!
//! - `K:<src type>---<edge label>---<dst type>` edge transitions
//! - `K:nodecount:<type>`
//! - `K:edgecount:<label>`
//! - `K:outdeg:<type>:<0|1|2|3+>`

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::BimodalDataset;
use crate::error::{Error, Result};
use crate::exec::{map_jobs, Execution};
use crate::nn::Matrix;

pub const SCHEMA_VERSION: &str = "graph-features/1";

pub type FeatureMap = BTreeMap<String, u64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphKind {
    Ast,
    Cfg,
    Icfg,
    Scope,
    Udg,
    Type,
}

impl GraphKind {
    pub const ALL: [GraphKind; 6] = [
        GraphKind::Ast,
        GraphKind::Cfg,
        GraphKind::Icfg,
        GraphKind::Scope,
        GraphKind::Udg,
        GraphKind::Type,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Ast => "AST",
            GraphKind::Cfg => "CFG",
            GraphKind::Icfg => "ICFG",
            GraphKind::Scope => "SCOPE",
            GraphKind::Udg => "UDG",
            GraphKind::Type => "TYPE",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        GraphKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown graph kind `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: i64,
    #[serde(rename = "type")]
    pub node_type: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub src: i64,
    pub dst: i64,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramGraph {
    pub function_id: String,
    pub kind: GraphKind,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

/// All graphs of one function plus its optional flaw label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionGraphs {
    pub function_id: String,
    pub label: Option<u8>,
    pub graphs: Vec<ProgramGraph>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    kind: String,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    function_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<u8>,
    graphs: Vec<RawGraph>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorpus {
    functions: Vec<RawFunction>,
}

fn graph_err(function_id: &str, msg: String) -> Error {
    Error::Graph {
        function_id: function_id.to_string(),
        msg,
    }
}

impl ProgramGraph {
    /// Checks unique node ids and edge endpoints.
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::with_capacity(self.nodes.len());
        for n in &self.nodes {
            if !ids.insert(n.id) {
                return Err(graph_err(&self.function_id, format!("{}: duplicate node id {}", self.kind, n.id)));
            }
        }
        for e in &self.edges {
            for end in [e.src, e.dst] {
                if !ids.contains(&end) {
                    return Err(graph_err(
                        &self.function_id,
                        format!("{}: edge {}→{} references missing node {end}", self.kind, e.src, e.dst),
                    ));
                }
            }
        }
        Ok(())
    }

    fn types(&self) -> HashMap<i64, &str> {
        self.nodes.iter().map(|n| (n.id, n.node_type.as_str())).collect()
    }
}

pub fn parse_graph_corpus(text: &str) -> Result<Vec<FunctionGraphs>> {
    let raw: RawCorpus = serde_json::from_str(text).map_err(|e| Error::Format(format!("graph JSON: {e}")))?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(raw.functions.len());
    for f in raw.functions {
        if !seen.insert(f.function_id.clone()) {
            return Err(graph_err(&f.function_id, "function listed twice".into()));
        }
        if let Some(l) = f.label.filter(|&l| l > 1) {
            return Err(graph_err(&f.function_id, format!("label {l} is not 0 or 1")));
        }
        let mut kinds = HashSet::new();
        let mut graphs = Vec::with_capacity(f.graphs.len());
        for g in f.graphs {
            let kind: GraphKind = g.kind.parse().map_err(|m| graph_err(&f.function_id, m))?;
            if !kinds.insert(kind) {
                return Err(graph_err(&f.function_id, format!("more than one {kind} graph")));
            }
            let pg = ProgramGraph {
                function_id: f.function_id.clone(),
                kind,
                nodes: g.nodes,
                edges: g.edges,
            };
            pg.validate()?;
            graphs.push(pg);
        }
        out.push(FunctionGraphs {
            function_id: f.function_id,
            label: f.label,
            graphs,
        });
    }
    Ok(out)
}

pub fn load_graph_corpus(path: &Path) -> Result<Vec<FunctionGraphs>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph_corpus(&text)
}

/// Every graph in the file, in file order.
pub fn parse_graph_json(path: &Path) -> Result<Vec<ProgramGraph>> {
    Ok(load_graph_corpus(path)?.into_iter().flat_map(|f| f.graphs).collect())
}

pub fn graph_corpus_to_json(corpus: &[FunctionGraphs]) -> Result<String> {
    let raw = RawCorpus {
        functions: corpus
            .iter()
            .map(|f| RawFunction {
                function_id: f.function_id.clone(),
                label: f.label,
                graphs: f
                    .graphs
                    .iter()
                    .map(|g| RawGraph {
                        kind: g.kind.to_string(),
                        nodes: g.nodes.clone(),
                        edges: g.edges.clone(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_graph_json(corpus: &[FunctionGraphs], path: &Path) -> Result<()> {
    std::fs::write(path, graph_corpus_to_json(corpus)?).map_err(|e| Error::io(path, e))
}

pub fn transition_key(kind: GraphKind, src_type: &str, label: &str, dst_type: &str) -> String {
    format!("{kind}:{src_type}---{label}---{dst_type}")
}

/// Edge multiplicities per `(source type, label, destination type)`.
pub fn count_transitions(g: &ProgramGraph) -> FeatureMap {
    let types = g.types();
    let mut out = FeatureMap::new();
    for e in &g.edges {
        *out.entry(transition_key(g.kind, types[&e.src], &e.label, types[&e.dst]))
            .or_default() += 1;
    }
    out
}

pub fn outdeg_bucket(deg: usize) -> &'static str {
    match deg {
        0 => "0",
        1 => "1",
        2 => "2",
        _ => "3+",
    }
}

/// Node counts per type, edge counts per label, and out-degree histograms
/// per node type, for every graph of one function.
pub fn statistical_counts(graphs: &[ProgramGraph]) -> Result<FeatureMap> {
    let mut out = FeatureMap::new();
    let Some(first) = graphs.first() else {
        return Ok(out);
    };
    for g in graphs {
        if g.function_id != first.function_id {
            return Err(graph_err(
                &first.function_id,
                format!("statistics mix graphs of `{}` and `{}`", first.function_id, g.function_id),
            ));
        }
        let k = g.kind;
        let mut outdeg: HashMap<i64, usize> = HashMap::new();
        for e in &g.edges {
            *out.entry(format!("{k}:edgecount:{}", e.label)).or_default() += 1;
            *outdeg.entry(e.src).or_default() += 1;
        }
        for n in &g.nodes {
            *out.entry(format!("{k}:nodecount:{}", n.node_type)).or_default() += 1;
            let d = outdeg.get(&n.id).copied().unwrap_or(0);
            *out.entry(format!("{k}:outdeg:{}:{}", n.node_type, outdeg_bucket(d)))
                .or_default() += 1;
        }
    }
    Ok(out)
}

/// Transition and statistical features of one function.
pub fn featurize_function(f: &FunctionGraphs) -> Result<FeatureMap> {
    let mut map = statistical_counts(&f.graphs)?;
    for g in &f.graphs {
        for (k, v) in count_transitions(g) {
            *map.entry(k).or_default() += v;
        }
    }
    Ok(map)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    /// Sorted, unique.
    pub keys: Vec<String>,
    pub version: String,
}

/// Aligns feature maps to the sorted union of their keys; missing keys are 0.
pub fn vectorize(maps: &[FeatureMap]) -> Result<(FeatureSchema, Matrix)> {
    if maps.is_empty() {
        return Err(Error::Argument("cannot vectorize an empty corpus".into()));
    }
    let keys: Vec<String> = maps
        .iter()
        .flat_map(|m| m.keys().cloned())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: HashMap<&str, usize> = keys.iter().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
    let mut m = Matrix::zeros(maps.len(), keys.len());
    for (r, map) in maps.iter().enumerate() {
        for (k, &v) in map {
            m.set(r, index[k.as_str()], v as f64);
        }
    }
    Ok((
        FeatureSchema {
            keys,
            version: SCHEMA_VERSION.to_string(),
        },
        m,
    ))
}

/// Featurizes a whole corpus into a source-only dataset. Functions without a
/// label get 0 (reported through the returned count).
pub fn featurize_corpus(corpus: &[FunctionGraphs], exec: Execution) -> Result<(FeatureSchema, BimodalDataset, usize)> {
    let maps = map_jobs(exec, corpus, |_, f| featurize_function(f)).into_iter().collect::<Result<Vec<_>>>()?;
    let (schema, x) = vectorize(&maps)?;
    let unlabeled = corpus.iter().filter(|f| f.label.is_none()).count();
    let n = corpus.len();
    let ds = BimodalDataset {
        ids: corpus.iter().map(|f| f.function_id.clone()).collect(),
        x,
        y: Matrix::zeros(n, 0),
        labels: corpus.iter().map(|f| f.label.unwrap_or(0)).collect(),
        x_names: schema.keys.clone(),
        y_names: Vec::new(),
    };
    Ok((schema, ds, unlabeled))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: i64, t: &str) -> Node {
        Node {
            id,
            node_type: t.into(),
        }
    }

    fn edge(src: i64, dst: i64, label: &str) -> Edge {
        Edge {
            src,
            dst,
            label: label.into(),
        }
    }

    #[test]
    fn ast_transition_key() {
        let g = ProgramGraph {
            function_id: "f".into(),
            kind: GraphKind::Ast,
            nodes: vec![node(0, "CallExpression"), node(1, "BinaryOperator")],
            edges: vec![edge(0, 1, "argument")],
        };
        let m = count_transitions(&g);
        assert_eq!(m.len(), 1);
        assert_eq!(m["AST:CallExpression---argument---BinaryOperator"], 1);
    }

    #[test]
    fn else_statement_and_isolated_node() {
        let g = ProgramGraph {
            function_id: "f".into(),
            kind: GraphKind::Ast,
            nodes: vec![node(3, "ElseStatement")],
            edges: vec![],
        };
        assert!(count_transitions(&g).is_empty());
        let s = statistical_counts(&[g]).unwrap();
        assert_eq!(s["AST:nodecount:ElseStatement"], 1);
        assert_eq!(s["AST:outdeg:ElseStatement:0"], 1);
    }

    #[test]
    fn parse_errors_name_the_function() {
        let dangling = r#"{"functions":[{"function_id":"bad_fn","graphs":[{"kind":"CFG","nodes":[{"id":1,"type":"B"}],"edges":[{"src":1,"dst":2,"label":"next"}]}]}]}"#;
        match parse_graph_corpus(dangling) {
            Err(Error::Graph { function_id, msg }) => {
                assert_eq!(function_id, "bad_fn");
                assert!(msg.contains("missing node 2"));
            }
            other => panic!("{other:?}"),
        }
        let dup = r#"{"functions":[{"function_id":"g","graphs":[{"kind":"AST","nodes":[{"id":1,"type":"A"},{"id":1,"type":"B"}],"edges":[]}]}]}"#;
        assert!(matches!(parse_graph_corpus(dup), Err(Error::Graph { .. })));
        let kind = r#"{"functions":[{"function_id":"h","graphs":[{"kind":"PDG","nodes":[],"edges":[]}]}]}"#;
        assert!(matches!(parse_graph_corpus(kind), Err(Error::Graph { msg, .. }) if msg.contains("PDG")));
        assert!(parse_graph_corpus(r#"{"functions":[]}"#).unwrap().is_empty());
    }

    #[test]
    fn disjoint_keys_union() {
        let a = FeatureMap::from([("a".to_string(), 3)]);
        let b = FeatureMap::from([("b".to_string(), 5)]);
        let (schema, m) = vectorize(&[a, b]).unwrap();
        assert_eq!(schema.keys, ["a", "b"]);
        assert_eq!(m, Matrix::from_rows(&[[3.0, 0.0], [0.0, 5.0]]).unwrap());
    }

    #[test]
    fn mixed_functions_rejected() {
        let g = |id: &str| ProgramGraph {
            function_id: id.into(),
            kind: GraphKind::Cfg,
            nodes: vec![],
            edges: vec![],
        };
        assert!(statistical_counts(&[g("a"), g("b")]).is_err());
    }
}
