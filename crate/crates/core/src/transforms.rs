//! Graph-to-graph constructions: latent projection, node splitting for
//! intervened worlds, extended graphs with copy vertices, and the
//! treatment-edge assignment with its edge-consistency check.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, MixedGraph, VertexId, VertexSet};

/// A symbolic state token, e.g. `a`, `a'`, `c`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Value(pub String);

impl Value {
    pub fn new(s: impl Into<String>) -> Self {
        Value(s.into())
    }

    /// Default token for a vertex: its name lowercased.
    pub fn token_for(v: &VertexId) -> Value {
        Value(v.as_str().to_lowercase())
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::new(s)
    }
}

/// An assignment of values to vertices.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct Intervention(pub BTreeMap<VertexId, Value>);

impl Intervention {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, v: impl Into<VertexId>, val: impl Into<Value>) -> Self {
        self.0.insert(v.into(), val.into());
        self
    }

    pub fn keys(&self) -> VertexSet {
        self.0.keys().cloned().collect()
    }

    pub fn get(&self, v: &VertexId) -> Option<&Value> {
        self.0.get(v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexId),
    #[error("path re-enters the treatment set at `{0}`")]
    ImproperPath(VertexId),
    #[error("path step `{0} -> {1}` is not an edge of the graph")]
    MissingEdge(VertexId, VertexId),
    #[error("treatment value maps disagree on their key sets")]
    MismatchedTreatments,
    #[error("edge-inconsistent counterfactual: `{witness}` is required under conflicting values of `{treatment}`")]
    EdgeInconsistent { witness: VertexId, treatment: VertexId },
    #[error("copy name `{0}` collides with a declared vertex")]
    CopyNameCollision(VertexId),
    #[error("treatment `{0}` has a hidden child; project before extending")]
    HiddenChild(VertexId),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Split graph for one intervened world: the graph itself plus the
/// counterfactual labels of random vertices and the value carried by
/// each fixed half.
#[derive(Clone, Debug)]
pub struct Swig {
    pub graph: MixedGraph,
    pub labels: BTreeMap<VertexId, String>,
    pub fixed_values: BTreeMap<VertexId, Value>,
    /// Original vertex -> its fixed half.
    pub split_map: BTreeMap<VertexId, VertexId>,
    pub origin: (MixedGraph, Intervention),
}

/// Latent projection: drops the hidden vertices, adding a directed edge
/// for every directed path routed through hiddens and a bidirected edge
/// for every hidden-channelled path with arrowheads at both visible ends
/// and no collider at any hidden vertex.
pub fn latent_project(g: &MixedGraph) -> Result<MixedGraph, TransformError> {
    let hidden = g.hidden().clone();
    if hidden.is_empty() {
        return Ok(g.clone());
    }
    let visible_random: Vec<VertexId> = g
        .random()
        .iter()
        .filter(|v| !hidden.contains(*v))
        .cloned()
        .collect();
    let visible: VertexSet = visible_random
        .iter()
        .cloned()
        .chain(g.fixed().iter().cloned())
        .collect();

    // up(v): hidden vertices with a directed path to v through hidden
    // intermediates.
    let up = |v: &VertexId| -> VertexSet {
        let mut out = VertexSet::new();
        let mut stack: Vec<VertexId> = g
            .parents_of(v)
            .into_iter()
            .filter(|p| hidden.contains(p))
            .collect();
        while let Some(h) = stack.pop() {
            if out.insert(h.clone()) {
                for p in g.parents_of(&h) {
                    if hidden.contains(&p) {
                        stack.push(p);
                    }
                }
            }
        }
        out
    };
    let ups: BTreeMap<VertexId, VertexSet> = visible
        .iter()
        .map(|v| (v.clone(), up(v)))
        .collect();

    let mut directed: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    for (t, h) in g.directed_edges() {
        if visible.contains(t) && visible.contains(h) {
            directed.insert((t.clone(), h.clone()));
        }
    }
    for head in visible.iter().filter(|v| !g.is_fixed(v)) {
        for tail in &visible {
            if tail == head {
                continue;
            }
            // tail -> h -> ... -> head with hidden intermediates.
            if ups[head].iter().any(|h| g.has_directed(tail, h)) {
                directed.insert((tail.clone(), head.clone()));
            }
        }
    }

    let mut bidirected: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    let mut add_bi = |a: &VertexId, b: &VertexId| {
        let key = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        bidirected.insert(key);
    };
    let randoms: Vec<&VertexId> = visible_random.iter().collect();
    for i in 0..randoms.len() {
        for j in (i + 1)..randoms.len() {
            let (a, b) = (randoms[i], randoms[j]);
            // Sources on either side: the endpoint itself or any hidden
            // above it; an arrowhead-to-arrowhead connection is either a
            // shared hidden source or a bidirected edge linking the two
            // source sets.
            let sa: VertexSet = ups[a].iter().cloned().chain([a.clone()]).collect();
            let sb: VertexSet = ups[b].iter().cloned().chain([b.clone()]).collect();
            let shared_source = ups[a].intersection(&ups[b]).next().is_some();
            let bridge = sa
                .iter()
                .any(|x| sb.iter().any(|y| x != y && g.has_bidirected(x, y)));
            if shared_source || bridge {
                add_bi(a, b);
            }
        }
    }

    let det = g
        .det_edges()
        .iter()
        .filter(|(t, h)| visible.contains(t) && visible.contains(h))
        .cloned()
        .collect();
    Ok(MixedGraph::from_parts(
        visible_random,
        g.fixed().to_vec(),
        directed.into_iter().collect(),
        bidirected.into_iter().collect(),
        VertexSet::new(),
        det,
    )?)
}

/// Fixed-half id for a split vertex: `name=value`.
fn fixed_half_id(v: &VertexId, val: &Value) -> VertexId {
    VertexId::new(format!("{}={}", v.as_str(), val.0))
}

/// Node splitting: each intervened vertex separates into a random half
/// (keeping all incoming directed and bidirected edges, under its
/// original name) and a fixed half (inheriting the outgoing directed
/// edges, named `vertex=value`). Random vertices are relabelled with the
/// values of their split ancestors.
pub fn split(g: &MixedGraph, iv: &Intervention) -> Result<Swig, TransformError> {
    for v in iv.0.keys() {
        if !g.is_random(v) {
            return Err(TransformError::UnknownVertex(v.clone()));
        }
    }
    let mut split_map: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut fixed_values = BTreeMap::new();
    let mut fixed = g.fixed().to_vec();
    for (v, val) in &iv.0 {
        let half = fixed_half_id(v, val);
        split_map.insert(v.clone(), half.clone());
        fixed_values.insert(half.clone(), val.clone());
        fixed.push(half);
    }
    let reroute = |t: &VertexId| split_map.get(t).cloned().unwrap_or_else(|| t.clone());
    let directed: Vec<(VertexId, VertexId)> = g
        .directed_edges()
        .map(|(t, h)| (reroute(t), h.clone()))
        .collect();
    let det = g
        .det_edges()
        .iter()
        .map(|(t, h)| (reroute(t), h.clone()))
        .collect();
    let graph = MixedGraph::from_parts(
        g.random().to_vec(),
        fixed,
        directed,
        g.bidirected_edges().cloned().collect(),
        g.hidden().clone(),
        det,
    )?;

    // Label each random vertex with the values of its split ancestors in
    // the split graph.
    let mut labels = BTreeMap::new();
    for v in graph.random() {
        let an = graph.ancestors(&VertexSet::from([v.clone()]));
        let mut vals: Vec<(usize, &Value)> = Vec::new();
        for (orig, half) in &split_map {
            if an.contains(half) {
                vals.push((g.canonical_pos(orig), &fixed_values[half]));
            }
        }
        vals.sort_by_key(|(pos, _)| *pos);
        let label = if vals.is_empty() {
            v.to_string()
        } else {
            format!(
                "{}({})",
                v,
                vals.iter()
                    .map(|(_, t)| t.0.clone())
                    .collect::<Vec<_>>()
                    .join(",")
            )
        };
        labels.insert(v.clone(), label);
    }

    Ok(Swig {
        graph,
        labels,
        fixed_values,
        split_map,
        origin: (g.clone(), iv.clone()),
    })
}

/// Extended graph: for each treatment edge `A -> V` the copy vertex
/// `A^V` is interposed (`A -> A^V -> V`) with the first hop marked
/// deterministic. Bidirected and non-treatment edges are untouched.
/// Hidden vertices may be present as long as no treatment has a hidden
/// child, so the construction commutes with latent projection.
pub fn extend(g: &MixedGraph, treatments: &VertexSet) -> Result<MixedGraph, TransformError> {
    for t in treatments {
        if !g.is_random(t) {
            return Err(TransformError::UnknownVertex(t.clone()));
        }
    }
    let mut random = g.random().to_vec();
    let mut directed: Vec<(VertexId, VertexId)> = Vec::new();
    let mut det: BTreeSet<(VertexId, VertexId)> = g.det_edges().clone();
    for (t, h) in g.directed_edges() {
        if treatments.contains(t) {
            if g.hidden().contains(h) {
                return Err(TransformError::HiddenChild(t.clone()));
            }
            let copy = VertexId::copy_for_edge(t, h);
            if g.contains(&copy) {
                return Err(TransformError::CopyNameCollision(copy));
            }
            random.push(copy.clone());
            directed.push((t.clone(), copy.clone()));
            directed.push((copy.clone(), h.clone()));
            det.insert((t.clone(), copy));
        } else {
            directed.push((t.clone(), h.clone()));
        }
    }
    Ok(MixedGraph::from_parts(
        random,
        g.fixed().to_vec(),
        directed,
        g.bidirected_edges().cloned().collect(),
        g.hidden().clone(),
        det,
    )?)
}

/// Inverse of [`extend`]: contracts every copy vertex back onto its
/// treatment edge.
pub fn contract_copies(g: &MixedGraph) -> Result<MixedGraph, TransformError> {
    let copies: VertexSet = g
        .det_edges()
        .iter()
        .map(|(_, c)| c.clone())
        .collect();
    if copies.is_empty() {
        return Ok(g.clone());
    }
    let mut directed: Vec<(VertexId, VertexId)> = Vec::new();
    for (t, h) in g.directed_edges() {
        if copies.contains(h) {
            continue; // A -> A^V hop
        }
        if copies.contains(t) {
            let base = g
                .parents_of(t)
                .into_iter()
                .next()
                .ok_or_else(|| TransformError::UnknownVertex(t.clone()))?;
            directed.push((base, h.clone()));
        } else {
            directed.push((t.clone(), h.clone()));
        }
    }
    let random = g
        .random()
        .iter()
        .filter(|v| !copies.contains(*v))
        .cloned()
        .collect();
    Ok(MixedGraph::from_parts(
        random,
        g.fixed().to_vec(),
        directed,
        g.bidirected_edges().cloned().collect(),
        g.hidden().clone(),
        BTreeSet::new(),
    )?)
}

/// A set of proper causal paths out of a treatment set: directed paths
/// that touch the treatments only at their source.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct PathSet {
    paths: Vec<Vec<VertexId>>,
}

impl PathSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates explicit paths against the graph and treatment set.
    pub fn from_paths(
        g: &MixedGraph,
        treatments: &VertexSet,
        paths: Vec<Vec<VertexId>>,
    ) -> Result<Self, TransformError> {
        for path in &paths {
            if path.len() < 2 {
                return Err(TransformError::ImproperPath(
                    path.first().cloned().unwrap_or_else(|| VertexId::new("?")),
                ));
            }
            if !treatments.contains(&path[0]) {
                return Err(TransformError::ImproperPath(path[0].clone()));
            }
            let mut seen = VertexSet::new();
            seen.insert(path[0].clone());
            for w in path.windows(2) {
                if !g.has_directed(&w[0], &w[1]) {
                    return Err(TransformError::MissingEdge(w[0].clone(), w[1].clone()));
                }
                if treatments.contains(&w[1]) {
                    return Err(TransformError::ImproperPath(w[1].clone()));
                }
                if !seen.insert(w[1].clone()) {
                    return Err(TransformError::ImproperPath(w[1].clone()));
                }
            }
        }
        let mut paths = paths;
        paths.sort();
        paths.dedup();
        Ok(PathSet { paths })
    }

    /// Every proper causal path out of the treatment set.
    pub fn all_paths(g: &MixedGraph, treatments: &VertexSet) -> Self {
        let mut paths = Vec::new();
        for t in treatments {
            let mut prefix = vec![t.clone()];
            collect_paths(g, treatments, &mut prefix, &mut paths);
        }
        paths.sort();
        PathSet { paths }
    }

    /// The closure of a set of first edges: every proper causal path that
    /// begins with one of them.
    pub fn from_first_edges(
        g: &MixedGraph,
        treatments: &VertexSet,
        edges: &BTreeSet<(VertexId, VertexId)>,
    ) -> Result<Self, TransformError> {
        let mut paths = Vec::new();
        for (t, h) in edges {
            if !treatments.contains(t) {
                return Err(TransformError::ImproperPath(t.clone()));
            }
            if !g.has_directed(t, h) {
                return Err(TransformError::MissingEdge(t.clone(), h.clone()));
            }
            if treatments.contains(h) {
                return Err(TransformError::ImproperPath(h.clone()));
            }
            let mut prefix = vec![t.clone(), h.clone()];
            paths.push(prefix.clone());
            collect_paths(g, treatments, &mut prefix, &mut paths);
        }
        paths.sort();
        paths.dedup();
        Ok(PathSet { paths })
    }

    pub fn paths(&self) -> &[Vec<VertexId>] {
        &self.paths
    }

    /// Union of the edges lying on any path of the set.
    pub fn edges(&self) -> BTreeSet<(VertexId, VertexId)> {
        let mut out = BTreeSet::new();
        for p in &self.paths {
            for w in p.windows(2) {
                out.insert((w[0].clone(), w[1].clone()));
            }
        }
        out
    }

    pub fn contains_edge(&self, tail: &VertexId, head: &VertexId) -> bool {
        self.paths
            .iter()
            .any(|p| p.windows(2).any(|w| &w[0] == tail && &w[1] == head))
    }
}

fn collect_paths(
    g: &MixedGraph,
    treatments: &VertexSet,
    prefix: &mut Vec<VertexId>,
    out: &mut Vec<Vec<VertexId>>,
) {
    let last = prefix.last().unwrap().clone();
    for c in g.children_of(&last) {
        if treatments.contains(&c) || prefix.contains(&c) || g.hidden().contains(&c) {
            continue;
        }
        prefix.push(c.clone());
        out.push(prefix.clone());
        collect_paths(g, treatments, prefix, out);
        prefix.pop();
    }
}

/// Value map for the copy vertices of an extended graph, together with
/// the treatment data it was derived from.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ExtendedAssignment {
    /// Copy vertex (`A^V`) -> value it is set to.
    pub copy_values: BTreeMap<VertexId, Value>,
    pub treatments: VertexSet,
    pub active: Intervention,
    pub baseline: Intervention,
    pub pi: PathSet,
}

impl ExtendedAssignment {
    /// The copy map read directly off first edges, without consistency
    /// checking; used internally when enlarging the treatment set where
    /// both value sides coincide for the new treatments.
    pub(crate) fn unchecked(
        g: &MixedGraph,
        pi: PathSet,
        active: Intervention,
        baseline: Intervention,
    ) -> Self {
        let treatments = active.keys();
        let mut copy_values = BTreeMap::new();
        for t in &treatments {
            for child in g.children_of(t) {
                let copy = VertexId::copy_for_edge(t, &child);
                let val = if pi.contains_edge(t, &child) {
                    active.get(t).unwrap().clone()
                } else {
                    baseline.get(t).unwrap().clone()
                };
                copy_values.insert(copy, val);
            }
        }
        ExtendedAssignment {
            copy_values,
            treatments,
            active,
            baseline,
            pi,
        }
    }

    /// Copy map as an intervention, for splitting the extended graph.
    pub fn as_intervention(&self) -> Intervention {
        Intervention(self.copy_values.clone())
    }
}

/// Derives the copy-vertex value map for a path set, failing with the
/// recanting witness when the requested counterfactual is edge
/// inconsistent.
///
/// Every vertex is expanded in the on-path world; a vertex additionally
/// enters the baseline world when some vertex needs it through an
/// off-path edge. A vertex required in both worlds whose direct
/// treatment assignments differ is the witness.
pub fn pathwise_assignment(
    g: &MixedGraph,
    pi: &PathSet,
    active: &Intervention,
    baseline: &Intervention,
) -> Result<ExtendedAssignment, TransformError> {
    if active.keys() != baseline.keys() {
        return Err(TransformError::MismatchedTreatments);
    }
    let treatments = active.keys();
    for t in &treatments {
        if !g.is_random(t) {
            return Err(TransformError::UnknownVertex(t.clone()));
        }
    }
    // Re-validate the paths against this graph and treatment set.
    let pi = PathSet::from_paths(g, &treatments, pi.paths().to_vec())?;
    let pi_edges = pi.edges();

    // Baseline world: vertices pulled in through any off-path edge,
    // closed under ancestry through non-treatments.
    let mut baseline_ctx = VertexSet::new();
    let mut stack: Vec<VertexId> = Vec::new();
    for v in g.random() {
        if treatments.contains(v) || g.hidden().contains(v) {
            continue;
        }
        for p in g.parents_of(v) {
            if treatments.contains(&p) {
                continue;
            }
            if !pi_edges.contains(&(p.clone(), v.clone())) && baseline_ctx.insert(p.clone()) {
                stack.push(p.clone());
            }
        }
    }
    while let Some(v) = stack.pop() {
        for p in g.parents_of(&v) {
            if !treatments.contains(&p) && baseline_ctx.insert(p.clone()) {
                stack.push(p);
            }
        }
    }

    // Conflict: a vertex in both worlds with an on-path treatment edge
    // whose two values differ.
    for v in g.sort_canonical(&baseline_ctx) {
        for t in g.parents_of(&v) {
            if !treatments.contains(&t) {
                continue;
            }
            if pi_edges.contains(&(t.clone(), v.clone()))
                && active.get(&t) != baseline.get(&t)
            {
                return Err(TransformError::EdgeInconsistent {
                    witness: v,
                    treatment: t,
                });
            }
        }
    }

    Ok(ExtendedAssignment::unchecked(
        g,
        pi,
        active.clone(),
        baseline.clone(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, vset, GraphDecl};

    fn fig_hidden() -> MixedGraph {
        // H1 -> C, H1 -> M, H2 -> C, H2 -> Y over C -> A -> M -> Y, A -> Y
        build_graph(
            &GraphDecl::new()
                .hidden("H1")
                .hidden("H2")
                .vertex("C")
                .vertex("A")
                .vertex("M")
                .vertex("Y")
                .edge("H1", "C")
                .edge("H1", "M")
                .edge("H2", "C")
                .edge("H2", "Y")
                .edge("C", "A")
                .edge("A", "M")
                .edge("M", "Y")
                .edge("A", "Y"),
        )
        .unwrap()
    }

    fn fig_triangle() -> MixedGraph {
        build_graph(
            &GraphDecl::new()
                .vertex("C")
                .vertex("A")
                .vertex("M")
                .vertex("Y")
                .edge("C", "A")
                .edge("C", "M")
                .edge("C", "Y")
                .edge("A", "M")
                .edge("A", "Y")
                .edge("M", "Y"),
        )
        .unwrap()
    }

    #[test]
    fn projection_of_paired_latents() {
        let g = latent_project(&fig_hidden()).unwrap();
        assert_eq!(g.random().len(), 4);
        assert!(g.has_bidirected(&"C".into(), &"M".into()));
        assert!(g.has_bidirected(&"C".into(), &"Y".into()));
        assert!(!g.has_bidirected(&"M".into(), &"Y".into()));
        assert!(g.has_directed(&"C".into(), &"A".into()));
        assert!(g.has_directed(&"A".into(), &"M".into()));
        assert!(g.has_directed(&"M".into(), &"Y".into()));
        assert!(g.has_directed(&"A".into(), &"Y".into()));
        assert_eq!(g.directed_edges().count(), 4);
    }

    #[test]
    fn projection_without_hidden_is_identity() {
        let g = fig_triangle();
        assert!(latent_project(&g).unwrap().same_structure(&g));
    }

    #[test]
    fn projection_of_chain_latent() {
        let g = build_graph(
            &GraphDecl::new()
                .vertex("A")
                .hidden("H")
                .vertex("B")
                .edge("A", "H")
                .edge("H", "B"),
        )
        .unwrap();
        let p = latent_project(&g).unwrap();
        assert!(p.has_directed(&"A".into(), &"B".into()));
        assert_eq!(p.bidirected_edges().count(), 0);
    }

    #[test]
    fn split_on_triangle() {
        let g = fig_triangle();
        let swig = split(&g, &Intervention::new().set("A", "a")).unwrap();
        let half: VertexId = "A=a".into();
        assert!(swig.graph.is_fixed(&half));
        assert!(swig.graph.has_directed(&half, &"M".into()));
        assert!(swig.graph.has_directed(&half, &"Y".into()));
        assert!(swig.graph.has_directed(&"C".into(), &"A".into()));
        assert!(!swig.graph.has_directed(&"A".into(), &"M".into()));
        assert_eq!(swig.labels[&"M".into()], "M(a)");
        assert_eq!(swig.labels[&"Y".into()], "Y(a)");
        assert_eq!(swig.labels[&"A".into()], "A");
        assert_eq!(swig.labels[&"C".into()], "C");
    }

    #[test]
    fn split_empty_is_identity() {
        let g = fig_triangle();
        let swig = split(&g, &Intervention::new()).unwrap();
        assert!(swig.graph.same_structure(&g));
        assert!(swig.labels.values().all(|l| !l.contains('(')));
    }

    #[test]
    fn split_bow_keeps_incoming_on_random_half() {
        let g = build_graph(
            &GraphDecl::new()
                .vertex("A")
                .vertex("Y")
                .edge("A", "Y")
                .bi("A", "Y"),
        )
        .unwrap();
        let swig = split(&g, &Intervention::new().set("Y", "y")).unwrap();
        assert!(swig.graph.has_directed(&"A".into(), &"Y".into()));
        assert!(swig.graph.has_bidirected(&"A".into(), &"Y".into()));
        let half: VertexId = "Y=y".into();
        assert!(swig.graph.is_fixed(&half));
        assert!(swig.graph.children_of(&half).is_empty());
    }

    #[test]
    fn extend_triangle_with_all_treatments() {
        let g = fig_triangle();
        let e = extend(&g, &vset(["C", "A", "M"])).unwrap();
        let copies: Vec<&VertexId> = e.random().iter().filter(|v| v.is_copy()).collect();
        assert_eq!(copies.len(), 6);
        assert!(e.has_directed(&"C".into(), &"C^A".into()));
        assert!(e.has_directed(&"C^A".into(), &"A".into()));
        assert!(e.det_edges().contains(&("C".into(), "C^A".into())));
        assert!(!e.has_directed(&"C".into(), &"A".into()));
    }

    #[test]
    fn extend_empty_is_identity() {
        let g = fig_triangle();
        assert!(extend(&g, &VertexSet::new()).unwrap().same_structure(&g));
    }

    #[test]
    fn extend_projection_keeps_bidirected() {
        let g = latent_project(&fig_hidden()).unwrap();
        let e = extend(&g, &vset(["A"])).unwrap();
        assert!(e.has_bidirected(&"C".into(), &"Y".into()));
        assert!(e.has_directed(&"A^M".into(), &"M".into()));
        assert!(e.has_directed(&"A^Y".into(), &"Y".into()));
    }

    #[test]
    fn contract_undoes_extend() {
        let g = latent_project(&fig_hidden()).unwrap();
        let e = extend(&g, &vset(["A", "C"])).unwrap();
        assert!(contract_copies(&e).unwrap().same_structure(&g));
    }

    #[test]
    fn pathwise_recanting_witness() {
        // Treatment C along the path C -> A -> Y only: A is needed both
        // on-path (under c) and off-path (under c').
        let g = fig_triangle();
        let pi = PathSet::from_paths(
            &g,
            &vset(["C"]),
            vec![vec!["C".into(), "A".into(), "Y".into()]],
        )
        .unwrap();
        let a = Intervention::new().set("C", "c");
        let b = Intervention::new().set("C", "c'");
        let err = pathwise_assignment(&g, &pi, &a, &b).unwrap_err();
        assert_eq!(
            err,
            TransformError::EdgeInconsistent {
                witness: "A".into(),
                treatment: "C".into()
            }
        );
    }

    #[test]
    fn pathwise_direct_edge_assignment() {
        let g = fig_triangle();
        let pi = PathSet::from_paths(&g, &vset(["A"]), vec![vec!["A".into(), "Y".into()]]).unwrap();
        let a = Intervention::new().set("A", "a");
        let b = Intervention::new().set("A", "a'");
        let apx = pathwise_assignment(&g, &pi, &a, &b).unwrap();
        assert_eq!(apx.copy_values[&"A^Y".into()], Value::new("a"));
        assert_eq!(apx.copy_values[&"A^M".into()], Value::new("a'"));
    }

    #[test]
    fn pathwise_total_intervention() {
        let g = fig_triangle();
        let pi = PathSet::all_paths(&g, &vset(["A"]));
        let a = Intervention::new().set("A", "a");
        let b = Intervention::new().set("A", "a'");
        let apx = pathwise_assignment(&g, &pi, &a, &b).unwrap();
        assert!(apx.copy_values.values().all(|v| v == &Value::new("a")));
    }

    #[test]
    fn first_edge_closure_is_consistent_where_literal_path_is_not() {
        // pi = {A -> M} alone is inconsistent (Y needs M both ways), but
        // the closure {A -> M, continuing to Y} is consistent.
        let g = fig_triangle();
        let a = Intervention::new().set("A", "a");
        let b = Intervention::new().set("A", "a'");
        let literal =
            PathSet::from_paths(&g, &vset(["A"]), vec![vec!["A".into(), "M".into()]]).unwrap();
        assert!(pathwise_assignment(&g, &literal, &a, &b).is_err());
        let closure = PathSet::from_first_edges(
            &g,
            &vset(["A"]),
            &BTreeSet::from([("A".into(), "M".into())]),
        )
        .unwrap();
        let apx = pathwise_assignment(&g, &closure, &a, &b).unwrap();
        assert_eq!(apx.copy_values[&"A^M".into()], Value::new("a"));
        assert_eq!(apx.copy_values[&"A^Y".into()], Value::new("a'"));
    }

    #[test]
    fn improper_paths_rejected() {
        let g = fig_triangle();
        // Re-enters the treatment set.
        assert!(matches!(
            PathSet::from_paths(
                &g,
                &vset(["C", "A"]),
                vec![vec!["C".into(), "A".into(), "Y".into()]]
            ),
            Err(TransformError::ImproperPath(_))
        ));
        // Not an edge.
        assert!(matches!(
            PathSet::from_paths(&g, &vset(["A"]), vec![vec!["A".into(), "C".into()]]),
            Err(TransformError::MissingEdge(_, _))
        ));
    }

    #[test]
    fn equal_values_never_conflict() {
        let g = fig_triangle();
        let pi = PathSet::from_paths(
            &g,
            &vset(["C"]),
            vec![vec!["C".into(), "A".into(), "Y".into()]],
        )
        .unwrap();
        let a = Intervention::new().set("C", "c");
        let apx = pathwise_assignment(&g, &pi, &a, &a).unwrap();
        assert!(apx.copy_values.values().all(|v| v == &Value::new("c")));
    }
}
