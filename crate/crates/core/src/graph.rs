//! Finite connected trivalent multigraphs.
//!
//! Loops and parallel edges are allowed. A loop contributes two branches to
//! its vertex, so every vertex carries exactly three branches counted with
//! multiplicity.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::GraphError;

/// Largest genus accepted by [`generate_trivalent`].
pub const MAX_GENERATED_GENUS: u32 = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    /// Unordered pair of endpoints; equal ids encode a loop.
    pub ends: [String; 2],
}

impl Edge {
    pub fn new(id: impl Into<String>, a: impl Into<String>, b: impl Into<String>) -> Self {
        Edge {
            id: id.into(),
            ends: [a.into(), b.into()],
        }
    }

    pub fn is_loop(&self) -> bool {
        self.ends[0] == self.ends[1]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrivalentGraph {
    pub name: String,
    pub vertices: Vec<String>,
    pub edges: Vec<Edge>,
}

/// Index-based view of a validated graph used by the counting code.
#[derive(Clone, Debug)]
pub struct IndexedGraph {
    /// Endpoint vertex indices of each edge, in the order of `TrivalentGraph::edges`.
    pub edge_ends: Vec<(usize, usize)>,
    /// The three branch edges at each vertex; a loop appears twice.
    pub branches: Vec<[usize; 3]>,
}

impl IndexedGraph {
    pub fn vertex_count(&self) -> usize {
        self.branches.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_ends.len()
    }
}

impl TrivalentGraph {
    pub fn new(name: impl Into<String>, vertices: Vec<String>, edges: Vec<Edge>) -> Self {
        TrivalentGraph {
            name: name.into(),
            vertices,
            edges,
        }
    }

    /// Checks id uniqueness, endpoint resolution, 3-regularity and connectivity.
    pub fn validate(&self) -> Result<(), GraphError> {
        self.indexed().map(|_| ())
    }

    /// First Betti number `|E| - |V| + 1`.
    pub fn genus(&self) -> Result<u32, GraphError> {
        self.validate()?;
        Ok((self.edges.len() + 1 - self.vertices.len()) as u32)
    }

    /// Edge ids of the three branches at `v`, a loop listed twice.
    pub fn vertex_triple(&self, v: &str) -> Result<[String; 3], GraphError> {
        if !self.vertices.iter().any(|x| x == v) {
            return Err(GraphError::UnknownVertex(v.to_string()));
        }
        let mut out = Vec::with_capacity(3);
        for e in &self.edges {
            for end in &e.ends {
                if end == v {
                    out.push(e.id.clone());
                }
            }
        }
        out.try_into()
            .map_err(|_| GraphError::NotTrivalent(v.to_string()))
    }

    pub fn vertex_index(&self, v: &str) -> Option<usize> {
        self.vertices.iter().position(|x| x == v)
    }

    /// Validates and converts to index form.
    pub fn indexed(&self) -> Result<IndexedGraph, GraphError> {
        let mut vindex = HashMap::with_capacity(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            if vindex.insert(v.as_str(), i).is_some() {
                return Err(GraphError::DuplicateId(v.clone()));
            }
        }
        let mut seen_edges = HashSet::with_capacity(self.edges.len());
        let mut edge_ends = Vec::with_capacity(self.edges.len());
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (k, e) in self.edges.iter().enumerate() {
            if !seen_edges.insert(e.id.as_str()) {
                return Err(GraphError::DuplicateId(e.id.clone()));
            }
            let a = *vindex
                .get(e.ends[0].as_str())
                .ok_or_else(|| GraphError::UnknownVertex(e.ends[0].clone()))?;
            let b = *vindex
                .get(e.ends[1].as_str())
                .ok_or_else(|| GraphError::UnknownVertex(e.ends[1].clone()))?;
            incident[a].push(k);
            incident[b].push(k);
            edge_ends.push((a, b));
        }
        let mut branches = Vec::with_capacity(self.vertices.len());
        for (i, inc) in incident.iter().enumerate() {
            match inc.as_slice() {
                &[x, y, z] => branches.push([x, y, z]),
                _ => return Err(GraphError::NotTrivalent(self.vertices[i].clone())),
            }
        }
        if self.vertices.is_empty() || !is_connected(self.vertices.len(), &edge_ends) {
            return Err(GraphError::NotConnected);
        }
        Ok(IndexedGraph {
            edge_ends,
            branches,
        })
    }

    /// Same graph with vertices and edges renamed and reordered by the given
    /// permutations (`vertex_perm[i]` is the new position of vertex `i`).
    pub fn relabeled(&self, vertex_perm: &[usize], edge_perm: &[usize]) -> TrivalentGraph {
        let vname = |i: usize| format!("x{}", vertex_perm[i]);
        let mut vertices = vec![String::new(); self.vertices.len()];
        for i in 0..self.vertices.len() {
            vertices[vertex_perm[i]] = vname(i);
        }
        let pos: HashMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let mut edges = vec![Edge::new("", "", ""); self.edges.len()];
        for (k, e) in self.edges.iter().enumerate() {
            let a = vname(pos[e.ends[0].as_str()]);
            let b = vname(pos[e.ends[1].as_str()]);
            // swap the endpoint order too, it must not matter
            edges[edge_perm[k]] = Edge::new(format!("f{}", edge_perm[k]), b, a);
        }
        TrivalentGraph::new(format!("{}~", self.name), vertices, edges)
    }
}

fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

// ---------------------------------------------------------------------------
// Catalog

/// Names understood by [`catalog`] besides the `chain:g` family.
pub const CATALOG_FIXED: [&str; 3] = ["theta", "dumbbell", "k4"];

/// Looks up a named graph: `theta`, `dumbbell`, `k4` or `chain:g` (g >= 2).
pub fn catalog(name: &str) -> Result<TrivalentGraph, GraphError> {
    let unknown = || GraphError::UnknownCatalogName(name.to_string());
    let graph = match name {
        "theta" => TrivalentGraph::new(
            "theta",
            vec!["u".into(), "v".into()],
            vec![
                Edge::new("e1", "u", "v"),
                Edge::new("e2", "u", "v"),
                Edge::new("e3", "u", "v"),
            ],
        ),
        "dumbbell" => TrivalentGraph::new(
            "dumbbell",
            vec!["u".into(), "v".into()],
            vec![
                Edge::new("l1", "u", "u"),
                Edge::new("b", "u", "v"),
                Edge::new("l2", "v", "v"),
            ],
        ),
        "k4" => {
            let names = ["A", "B", "C", "D"];
            let mut edges = Vec::new();
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push(Edge::new(
                        format!("{}{}", names[i], names[j]),
                        names[i],
                        names[j],
                    ));
                }
            }
            TrivalentGraph::new("k4", names.iter().map(|s| s.to_string()).collect(), edges)
        }
        _ => {
            let g: u32 = name
                .strip_prefix("chain:")
                .and_then(|s| s.parse().ok())
                .ok_or_else(unknown)?;
            if g < 2 {
                return Err(unknown());
            }
            chain(g)
        }
    };
    debug_assert!(graph.validate().is_ok());
    Ok(graph)
}

/// Caterpillar of genus `g`: loops at both ends, alternating single and
/// double edges between `2g - 2` consecutive vertices. Sweeping the vertices
/// left to right keeps at most two edges open.
fn chain(g: u32) -> TrivalentGraph {
    let n = 2 * g as usize - 2;
    let vertices: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    let mut edges = vec![Edge::new("l1", "v1", "v1")];
    for i in 1..n {
        let (a, b) = (&vertices[i - 1], &vertices[i]);
        if i % 2 == 1 {
            edges.push(Edge::new(format!("s{i}"), a, b));
        } else {
            edges.push(Edge::new(format!("d{i}a"), a, b));
            edges.push(Edge::new(format!("d{i}b"), a, b));
        }
    }
    edges.push(Edge::new("l2", &vertices[n - 1], &vertices[n - 1]));
    TrivalentGraph::new(format!("chain:{g}"), vertices, edges)
}

// ---------------------------------------------------------------------------
// Exhaustive generation

/// Multigraph as loop counts plus an upper-triangular multiplicity matrix.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Multigraph {
    n: usize,
    loops: Vec<u8>,
    mult: Vec<Vec<u8>>,
}

impl Multigraph {
    fn m(&self, i: usize, j: usize) -> u8 {
        if i < j {
            self.mult[i][j]
        } else {
            self.mult[j][i]
        }
    }

    /// Code of the graph after placing vertex `order[k]` at position `k`:
    /// for each position the loop count, then multiplicities to earlier
    /// positions. Prefixes of the code depend only on prefixes of `order`.
    fn code_row(&self, order: &[usize], k: usize, out: &mut Vec<u8>) {
        let v = order[k];
        out.push(self.loops[v]);
        for &w in &order[..k] {
            out.push(self.m(w, v));
        }
    }

    /// Lexicographically largest code over all vertex orders.
    fn canonical_code(&self) -> Vec<u8> {
        let mut best: Vec<u8> = Vec::new();
        let mut order = Vec::with_capacity(self.n);
        let mut used = vec![false; self.n];
        let mut code = Vec::new();
        self.search(&mut order, &mut used, &mut code, &mut best);
        best
    }

    fn search(&self, order: &mut Vec<usize>, used: &mut [bool], code: &mut Vec<u8>, best: &mut Vec<u8>) {
        if order.len() == self.n {
            if best.is_empty() || code.as_slice() > best.as_slice() {
                *best = code.clone();
            }
            return;
        }
        for v in 0..self.n {
            if used[v] {
                continue;
            }
            let mark = code.len();
            order.push(v);
            self.code_row(order, order.len() - 1, code);
            if best.is_empty() || code.as_slice() >= &best[..code.len()] {
                used[v] = true;
                self.search(order, used, code, best);
                used[v] = false;
            }
            code.truncate(mark);
            order.pop();
        }
    }

    fn to_graph(&self, name: String) -> TrivalentGraph {
        let vertices: Vec<String> = (0..self.n).map(|i| format!("v{i}")).collect();
        let mut edges = Vec::new();
        for i in 0..self.n {
            for _ in 0..self.loops[i] {
                edges.push(Edge::new(
                    format!("e{}", edges.len()),
                    &vertices[i],
                    &vertices[i],
                ));
            }
            for j in i + 1..self.n {
                for _ in 0..self.mult[i][j] {
                    edges.push(Edge::new(
                        format!("e{}", edges.len()),
                        &vertices[i],
                        &vertices[j],
                    ));
                }
            }
        }
        TrivalentGraph::new(name, vertices, edges)
    }
}

/// All connected trivalent multigraphs of genus `g` (on `2g - 2` vertices),
/// one representative per isomorphism class, in a deterministic order.
pub fn generate_trivalent(g: u32) -> Result<Vec<TrivalentGraph>, GraphError> {
    if g > MAX_GENERATED_GENUS {
        return Err(GraphError::GenusTooLarge(g));
    }
    if g < 2 {
        return Err(GraphError::UnsupportedGenus(g));
    }
    let n = 2 * g as usize - 2;
    let mut state = Multigraph {
        n,
        loops: vec![0; n],
        mult: vec![vec![0; n]; n],
    };
    let mut classes: BTreeMap<Vec<u8>, Multigraph> = BTreeMap::new();
    let mut remaining = vec![3u8; n];
    fill_vertex(&mut state, &mut remaining, 0, &mut classes);
    Ok(classes
        .into_values()
        .rev()
        .enumerate()
        .map(|(k, mg)| mg.to_graph(format!("gen:{g}:{k}")))
        .collect())
}

/// Chooses the loop count and multiplicities to later vertices for vertex `i`.
fn fill_vertex(
    state: &mut Multigraph,
    remaining: &mut [u8],
    i: usize,
    out: &mut BTreeMap<Vec<u8>, Multigraph>,
) {
    if i == state.n {
        let edges: Vec<(usize, usize)> = (0..state.n)
            .flat_map(|a| (a + 1..state.n).map(move |b| (a, b)))
            .filter(|&(a, b)| state.mult[a][b] > 0)
            .collect();
        if is_connected(state.n, &edges) {
            out.entry(state.canonical_code()).or_insert_with(|| state.clone());
        }
        return;
    }
    // every vertex after the first must touch an earlier one
    if i > 0 && remaining[i] == 3 {
        return;
    }
    let max_loops = remaining[i] / 2;
    for l in 0..=max_loops {
        state.loops[i] = l;
        remaining[i] -= 2 * l;
        fill_pairs(state, remaining, i, i + 1, out);
        remaining[i] += 2 * l;
        state.loops[i] = 0;
    }
}

fn fill_pairs(
    state: &mut Multigraph,
    remaining: &mut [u8],
    i: usize,
    j: usize,
    out: &mut BTreeMap<Vec<u8>, Multigraph>,
) {
    if j == state.n {
        if remaining[i] == 0 {
            fill_vertex(state, remaining, i + 1, out);
        }
        return;
    }
    let cap = remaining[i].min(remaining[j]);
    for m in 0..=cap {
        state.mult[i][j] = m;
        remaining[i] -= m;
        remaining[j] -= m;
        fill_pairs(state, remaining, i, j + 1, out);
        remaining[i] += m;
        remaining[j] += m;
    }
    state.mult[i][j] = 0;
}

// ---------------------------------------------------------------------------
// JSON

pub fn serialize_graph(graph: &TrivalentGraph) -> String {
    serde_json::to_string_pretty(graph).expect("graph serialization is infallible")
}

/// Parses the graph JSON schema and validates the result. Schema errors
/// carry a JSON path such as `edges[2].ends`.
pub fn parse_graph(text: &str) -> Result<TrivalentGraph, GraphError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| GraphError::Schema {
        path: "$".into(),
        message: e.to_string(),
    })?;
    let graph = graph_from_value(&doc)?;
    graph.validate()?;
    Ok(graph)
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> GraphError {
    GraphError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str, GraphError> {
    v.as_str().ok_or_else(|| schema(path, "expected a string"))
}

fn graph_from_value(doc: &Value) -> Result<TrivalentGraph, GraphError> {
    let obj = doc
        .as_object()
        .ok_or_else(|| schema("$", "expected an object"))?;
    let name = as_str(obj.get("name").ok_or_else(|| schema("name", "missing"))?, "name")?;
    let vertices = obj
        .get("vertices")
        .ok_or_else(|| schema("vertices", "missing"))?
        .as_array()
        .ok_or_else(|| schema("vertices", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, v)| as_str(v, &format!("vertices[{i}]")).map(str::to_string))
        .collect::<Result<Vec<_>, _>>()?;
    let edges_val = obj
        .get("edges")
        .ok_or_else(|| schema("edges", "missing"))?
        .as_array()
        .ok_or_else(|| schema("edges", "expected an array"))?;
    let mut edges = Vec::with_capacity(edges_val.len());
    for (i, e) in edges_val.iter().enumerate() {
        let path = format!("edges[{i}]");
        let eo = e
            .as_object()
            .ok_or_else(|| schema(&path, "expected an object"))?;
        let id = as_str(
            eo.get("id")
                .ok_or_else(|| schema(format!("{path}.id"), "missing"))?,
            &format!("{path}.id"),
        )?;
        let ends_path = format!("{path}.ends");
        let ends = eo
            .get("ends")
            .ok_or_else(|| schema(&ends_path, "missing"))?
            .as_array()
            .ok_or_else(|| schema(&ends_path, "expected an array"))?;
        if ends.len() != 2 {
            return Err(schema(
                &ends_path,
                format!("expected 2 endpoints, found {}", ends.len()),
            ));
        }
        let a = as_str(&ends[0], &format!("{ends_path}[0]"))?;
        let b = as_str(&ends[1], &format!("{ends_path}[1]"))?;
        edges.push(Edge::new(id, a, b));
    }
    Ok(TrivalentGraph::new(name, vertices, edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: [String; 3]) -> [String; 3] {
        v.sort();
        v
    }

    #[test]
    fn validate_catalog_and_failures() {
        assert!(catalog("theta").unwrap().validate().is_ok());
        let path = TrivalentGraph::new(
            "path",
            vec!["a".into(), "b".into(), "c".into()],
            vec![Edge::new("x", "a", "b"), Edge::new("y", "b", "c")],
        );
        assert!(matches!(path.validate(), Err(GraphError::NotTrivalent(_))));

        let t = catalog("theta").unwrap();
        let mut two = t.clone();
        for v in &t.vertices {
            two.vertices.push(format!("{v}'"));
        }
        for e in &t.edges {
            two.edges.push(Edge::new(
                format!("{}'", e.id),
                format!("{}'", e.ends[0]),
                format!("{}'", e.ends[1]),
            ));
        }
        assert_eq!(two.validate(), Err(GraphError::NotConnected));

        let mut dup = catalog("theta").unwrap();
        dup.edges[1].id = "e1".into();
        assert_eq!(dup.validate(), Err(GraphError::DuplicateId("e1".into())));
    }

    #[test]
    fn genus_values() {
        assert_eq!(catalog("theta").unwrap().genus().unwrap(), 2);
        assert_eq!(catalog("k4").unwrap().genus().unwrap(), 3);
        let c4 = catalog("chain:4").unwrap();
        assert_eq!((c4.vertices.len(), c4.edges.len()), (6, 9));
        assert_eq!(c4.genus().unwrap(), 4);
        for g in 2..=12 {
            assert_eq!(catalog(&format!("chain:{g}")).unwrap().genus().unwrap(), g);
        }
    }

    #[test]
    fn vertex_triples() {
        let t = catalog("theta").unwrap();
        assert_eq!(
            sorted(t.vertex_triple("u").unwrap()),
            ["e1".to_string(), "e2".into(), "e3".into()]
        );
        let d = catalog("dumbbell").unwrap();
        assert_eq!(
            sorted(d.vertex_triple("u").unwrap()),
            ["b".to_string(), "l1".into(), "l1".into()]
        );
        let k = catalog("k4").unwrap();
        assert_eq!(
            sorted(k.vertex_triple("A").unwrap()),
            ["AB".to_string(), "AC".into(), "AD".into()]
        );
        assert_eq!(
            t.vertex_triple("w"),
            Err(GraphError::UnknownVertex("w".into()))
        );
    }

    #[test]
    fn catalog_names() {
        let c3 = catalog("chain:3").unwrap();
        assert_eq!((c3.vertices.len(), c3.edges.len()), (4, 6));
        assert_eq!(
            catalog("chain:1"),
            Err(GraphError::UnknownCatalogName("chain:1".into()))
        );
        assert!(catalog("petersen").is_err());
        assert!(catalog("chain:x").is_err());
        let c2 = catalog("chain:2").unwrap();
        let d = catalog("dumbbell").unwrap();
        assert_eq!(c2.edges.len(), d.edges.len());
        assert_eq!(c2.edges.iter().filter(|e| e.is_loop()).count(), 2);
    }

    #[test]
    fn schema_errors() {
        let bad = r#"{"name":"x","vertices":["u","v"],"edges":[{"id":"a","ends":["u","v","u"]}]}"#;
        match parse_graph(bad) {
            Err(GraphError::Schema { path, .. }) => assert_eq!(path, "edges[0].ends"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_graph(r#"{"name":"x","vertices":"u"}"#),
            Err(GraphError::Schema { .. })
        ));
        assert!(matches!(parse_graph("not json"), Err(GraphError::Schema { .. })));
    }

    #[test]
    fn loop_document() {
        let doc = r#"{"name":"db","vertices":["u","v"],
            "edges":[{"id":"a","ends":["u","u"]},{"id":"b","ends":["u","v"]},{"id":"c","ends":["v","v"]}]}"#;
        let g = parse_graph(doc).unwrap();
        assert!(g.edges[0].is_loop());
        assert_eq!(g.genus().unwrap(), 2);
    }

    #[test]
    fn roundtrip_catalog() {
        for name in ["theta", "dumbbell", "k4", "chain:2", "chain:3", "chain:5"] {
            let g = catalog(name).unwrap();
            assert_eq!(parse_graph(&serialize_graph(&g)).unwrap(), g);
        }
    }

    #[test]
    fn generation_genus_2() {
        let gs = generate_trivalent(2).unwrap();
        assert_eq!(gs.len(), 2);
        let loops: Vec<usize> = gs
            .iter()
            .map(|g| g.edges.iter().filter(|e| e.is_loop()).count())
            .collect();
        // theta has none, dumbbell two
        let mut l = loops.clone();
        l.sort();
        assert_eq!(l, vec![0, 2]);
    }

    #[test]
    fn generation_guards() {
        assert_eq!(generate_trivalent(6), Err(GraphError::GenusTooLarge(6)));
        assert!(generate_trivalent(1).is_err());
    }

    #[test]
    fn relabel_preserves_validity() {
        let k = catalog("k4").unwrap();
        let r = k.relabeled(&[2, 0, 3, 1], &[5, 4, 3, 2, 1, 0]);
        assert_eq!(r.genus().unwrap(), 3);
    }
}
