//! Mixed graphs with a random/fixed vertex partition.
//!
//! One value-semantic graph type covers every graph the engine touches:
//! plain DAGs (possibly with hidden-variable markers), acyclic directed
//! mixed graphs produced by latent projection, conditional graphs produced
//! by fixing, split graphs produced by intervention, and extended graphs
//! with deterministic copy vertices. All values are immutable after
//! construction; every operation returns a fresh graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of a vertex. Copy vertices created for treatment edges carry a
/// `^` suffix (`A^M` is the copy of `A` feeding `M`); user declarations
/// normally stay within letters, digits and underscores.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(name: impl Into<String>) -> Self {
        VertexId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Copy-vertex name for the treatment edge `base -> child`.
    pub fn copy_for_edge(base: &VertexId, child: &VertexId) -> VertexId {
        VertexId(format!("{}^{}", base.0, child.0))
    }

    /// True when the name carries a copy suffix.
    pub fn is_copy(&self) -> bool {
        self.0.contains('^')
    }

    /// Base name of a copy vertex (`A^M` -> `A`); identity otherwise.
    pub fn copy_base(&self) -> VertexId {
        match self.0.split_once('^') {
            Some((base, _)) => VertexId(base.to_string()),
            None => self.clone(),
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId::new(s)
    }
}

/// A set of vertices. `BTreeSet` keeps iteration deterministic.
pub type VertexSet = BTreeSet<VertexId>;

/// Convenience constructor for vertex sets.
pub fn vset<I, T>(names: I) -> VertexSet
where
    I: IntoIterator<Item = T>,
    T: Into<VertexId>,
{
    names.into_iter().map(Into::into).collect()
}

/// One-step or transitive relative kinds for [`MixedGraph::relatives`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Relation {
    Parents,
    Children,
    Ancestors,
    Descendants,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("directed cycle through `{0}`")]
    Cycle(VertexId),
    #[error("edge endpoint `{0}` is not declared")]
    DanglingEdge(VertexId),
    #[error("fixed vertex `{0}` has an incoming or bidirected edge")]
    FixedViolation(VertexId),
    #[error("vertex `{0}` declared twice")]
    DuplicateVertex(VertexId),
    #[error("self edge at `{0}`")]
    SelfEdge(VertexId),
    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(VertexId, VertexId),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexId),
    #[error("hidden marker on `{0}` is invalid (hidden vertices must be random)")]
    HiddenViolation(VertexId),
    #[error("deterministic edge into `{0}` violates copy-vertex shape")]
    DetEdgeViolation(VertexId),
    #[error("empty vertex name")]
    EmptyName,
}

/// Declaration consumed by [`build_graph`]: vertex list with hidden
/// markers, plus directed and bidirected edges.
#[derive(Clone, Debug, Default)]
pub struct GraphDecl {
    pub vertices: Vec<(VertexId, bool)>,
    pub directed: Vec<(VertexId, VertexId)>,
    pub bidirected: Vec<(VertexId, VertexId)>,
}

impl GraphDecl {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, name: impl Into<VertexId>) -> Self {
        self.vertices.push((name.into(), false));
        self
    }

    pub fn hidden(mut self, name: impl Into<VertexId>) -> Self {
        self.vertices.push((name.into(), true));
        self
    }

    pub fn edge(mut self, tail: impl Into<VertexId>, head: impl Into<VertexId>) -> Self {
        self.directed.push((tail.into(), head.into()));
        self
    }

    pub fn bi(mut self, a: impl Into<VertexId>, b: impl Into<VertexId>) -> Self {
        self.bidirected.push((a.into(), b.into()));
        self
    }
}

/// Acyclic mixed graph with random and fixed vertices.
///
/// Invariants held by every constructed value:
/// - `random` and `fixed` are disjoint; all edge endpoints are declared;
/// - the directed part is acyclic; `random` is stored in a canonical
///   topological order (declaration order breaking ties);
/// - fixed vertices have no incoming directed edges and no bidirected
///   edges;
/// - `hidden` is a subset of `random`;
/// - deterministic edge heads have exactly one parent and no bidirected
///   edges (the copy-vertex shape of extended graphs);
/// - no self edges, no duplicate edges. A directed and a bidirected edge
///   may connect the same pair (bow pattern).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct MixedGraph {
    random: Vec<VertexId>,
    fixed: Vec<VertexId>,
    directed: BTreeSet<(VertexId, VertexId)>,
    bidirected: BTreeSet<(VertexId, VertexId)>,
    hidden: VertexSet,
    det_edges: BTreeSet<(VertexId, VertexId)>,
}

/// Validated construction from a declaration. The canonical order of
/// `random` is the topological order of the directed part, ties broken
/// by declaration order.
pub fn build_graph(decl: &GraphDecl) -> Result<MixedGraph, GraphError> {
    let hidden: VertexSet = decl
        .vertices
        .iter()
        .filter(|(_, h)| *h)
        .map(|(v, _)| v.clone())
        .collect();
    MixedGraph::from_parts(
        decl.vertices.iter().map(|(v, _)| v.clone()).collect(),
        Vec::new(),
        decl.directed.clone(),
        decl.bidirected.clone(),
        hidden,
        BTreeSet::new(),
    )
}

impl MixedGraph {
    /// Full constructor used by every transform. Validates all graph
    /// invariants and computes the canonical vertex order.
    pub fn from_parts(
        random: Vec<VertexId>,
        fixed: Vec<VertexId>,
        directed: Vec<(VertexId, VertexId)>,
        bidirected: Vec<(VertexId, VertexId)>,
        hidden: VertexSet,
        det_edges: BTreeSet<(VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let mut seen = BTreeSet::new();
        for v in random.iter().chain(fixed.iter()) {
            if v.as_str().is_empty() {
                return Err(GraphError::EmptyName);
            }
            if !seen.insert(v.clone()) {
                return Err(GraphError::DuplicateVertex(v.clone()));
            }
        }
        let random_set: VertexSet = random.iter().cloned().collect();
        let fixed_set: VertexSet = fixed.iter().cloned().collect();

        let mut dset = BTreeSet::new();
        for (t, h) in &directed {
            for e in [t, h] {
                if !seen.contains(e) {
                    return Err(GraphError::DanglingEdge(e.clone()));
                }
            }
            if t == h {
                return Err(GraphError::SelfEdge(t.clone()));
            }
            if fixed_set.contains(h) {
                return Err(GraphError::FixedViolation(h.clone()));
            }
            if !dset.insert((t.clone(), h.clone())) {
                return Err(GraphError::DuplicateEdge(t.clone(), h.clone()));
            }
        }
        let mut bset = BTreeSet::new();
        for (a, b) in &bidirected {
            for e in [a, b] {
                if !seen.contains(e) {
                    return Err(GraphError::DanglingEdge(e.clone()));
                }
                if fixed_set.contains(e) {
                    return Err(GraphError::FixedViolation(e.clone()));
                }
            }
            if a == b {
                return Err(GraphError::SelfEdge(a.clone()));
            }
            let key = if a <= b {
                (a.clone(), b.clone())
            } else {
                (b.clone(), a.clone())
            };
            if !bset.insert(key) {
                return Err(GraphError::DuplicateEdge(a.clone(), b.clone()));
            }
        }
        for h in &hidden {
            if !random_set.contains(h) {
                return Err(GraphError::HiddenViolation(h.clone()));
            }
        }
        for (t, h) in &det_edges {
            if !dset.contains(&(t.clone(), h.clone())) {
                return Err(GraphError::DanglingEdge(h.clone()));
            }
            // Copy-vertex shape: single parent, no bidirected edges.
            let parents = dset.iter().filter(|(_, hd)| hd == h).count();
            let bi = bset.iter().any(|(a, b)| a == h || b == h);
            if parents != 1 || bi {
                return Err(GraphError::DetEdgeViolation(h.clone()));
            }
        }

        // Kahn's algorithm over the random part; fixed vertices have no
        // incoming edges so they never constrain the order.
        let decl_pos: BTreeMap<&VertexId, usize> =
            random.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut indeg: BTreeMap<&VertexId, usize> = random.iter().map(|v| (v, 0)).collect();
        for (t, h) in &dset {
            if random_set.contains(t) && random_set.contains(h) {
                *indeg.get_mut(h).unwrap() += 1;
            }
        }
        let mut order: Vec<VertexId> = Vec::with_capacity(random.len());
        let mut ready: Vec<&VertexId> = indeg
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(v, _)| *v)
            .collect();
        ready.sort_by_key(|v| decl_pos[v]);
        while let Some(&v) = ready.first() {
            ready.remove(0);
            order.push(v.clone());
            let mut newly: Vec<&VertexId> = Vec::new();
            for (t, h) in &dset {
                if t == v && random_set.contains(h) {
                    let d = indeg.get_mut(h).unwrap();
                    *d -= 1;
                    if *d == 0 {
                        newly.push(indeg.get_key_value(h).unwrap().0);
                    }
                }
            }
            ready.extend(newly);
            ready.sort_by_key(|v| decl_pos[v]);
            ready.dedup();
        }
        if order.len() != random.len() {
            let stuck = random
                .iter()
                .find(|v| !order.contains(v))
                .expect("cycle vertex");
            return Err(GraphError::Cycle(stuck.clone()));
        }

        Ok(MixedGraph {
            random: order,
            fixed,
            directed: dset,
            bidirected: bset,
            hidden,
            det_edges,
        })
    }

    pub fn random(&self) -> &[VertexId] {
        &self.random
    }

    pub fn fixed(&self) -> &[VertexId] {
        &self.fixed
    }

    pub fn random_set(&self) -> VertexSet {
        self.random.iter().cloned().collect()
    }

    pub fn fixed_set(&self) -> VertexSet {
        self.fixed.iter().cloned().collect()
    }

    pub fn hidden(&self) -> &VertexSet {
        &self.hidden
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = &(VertexId, VertexId)> {
        self.directed.iter()
    }

    pub fn bidirected_edges(&self) -> impl Iterator<Item = &(VertexId, VertexId)> {
        self.bidirected.iter()
    }

    pub fn det_edges(&self) -> &BTreeSet<(VertexId, VertexId)> {
        &self.det_edges
    }

    pub fn is_random(&self, v: &VertexId) -> bool {
        self.random.contains(v)
    }

    pub fn is_fixed(&self, v: &VertexId) -> bool {
        self.fixed.contains(v)
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.is_random(v) || self.is_fixed(v)
    }

    pub fn has_directed(&self, tail: &VertexId, head: &VertexId) -> bool {
        self.directed.contains(&(tail.clone(), head.clone()))
    }

    pub fn has_bidirected(&self, a: &VertexId, b: &VertexId) -> bool {
        let key = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        self.bidirected.contains(&key)
    }

    /// Position in the canonical order (random first, then fixed).
    pub fn canonical_pos(&self, v: &VertexId) -> usize {
        if let Some(i) = self.random.iter().position(|x| x == v) {
            i
        } else {
            self.random.len() + self.fixed.iter().position(|x| x == v).unwrap_or(usize::MAX / 2)
        }
    }

    /// Sorts a set into canonical vertex order.
    pub fn sort_canonical(&self, s: &VertexSet) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = s.iter().cloned().collect();
        out.sort_by_key(|v| self.canonical_pos(v));
        out
    }

    pub fn parents_of(&self, v: &VertexId) -> VertexSet {
        self.directed
            .iter()
            .filter(|(_, h)| h == v)
            .map(|(t, _)| t.clone())
            .collect()
    }

    pub fn children_of(&self, v: &VertexId) -> VertexSet {
        self.directed
            .iter()
            .filter(|(t, _)| t == v)
            .map(|(_, h)| h.clone())
            .collect()
    }

    pub fn siblings_of(&self, v: &VertexId) -> VertexSet {
        self.bidirected
            .iter()
            .filter_map(|(a, b)| {
                if a == v {
                    Some(b.clone())
                } else if b == v {
                    Some(a.clone())
                } else {
                    None
                }
            })
            .collect()
    }

    fn check_known(&self, s: &VertexSet) -> Result<(), GraphError> {
        for v in s {
            if !self.contains(v) {
                return Err(GraphError::UnknownVertex(v.clone()));
            }
        }
        Ok(())
    }

    /// Structural relatives of a set. Ancestors and descendants are
    /// reflexive; parents and children are one-step and non-reflexive.
    pub fn relatives(&self, s: &VertexSet, kind: Relation) -> Result<VertexSet, GraphError> {
        self.check_known(s)?;
        match kind {
            Relation::Parents => Ok(s.iter().flat_map(|v| self.parents_of(v)).collect()),
            Relation::Children => Ok(s.iter().flat_map(|v| self.children_of(v)).collect()),
            Relation::Ancestors => Ok(self.closure(s, |v| self.parents_of(v))),
            Relation::Descendants => Ok(self.closure(s, |v| self.children_of(v))),
        }
    }

    /// Reflexive transitive closure under `step`.
    fn closure(&self, s: &VertexSet, step: impl Fn(&VertexId) -> VertexSet) -> VertexSet {
        let mut out: VertexSet = s.clone();
        let mut frontier: Vec<VertexId> = s.iter().cloned().collect();
        while let Some(v) = frontier.pop() {
            for next in step(&v) {
                if out.insert(next.clone()) {
                    frontier.push(next);
                }
            }
        }
        out
    }

    pub fn ancestors(&self, s: &VertexSet) -> VertexSet {
        self.relatives(s, Relation::Ancestors).expect("known vertices")
    }

    pub fn descendants(&self, s: &VertexSet) -> VertexSet {
        self.relatives(s, Relation::Descendants).expect("known vertices")
    }

    /// Connected components of the bidirected part restricted to random
    /// vertices, as a partition in canonical order. Fixed vertices belong
    /// to no district.
    pub fn districts(&self) -> Vec<Vec<VertexId>> {
        let mut assigned: BTreeMap<VertexId, usize> = BTreeMap::new();
        let mut blocks: Vec<Vec<VertexId>> = Vec::new();
        for v in &self.random {
            if assigned.contains_key(v) {
                continue;
            }
            let id = blocks.len();
            let mut block = Vec::new();
            let mut stack = vec![v.clone()];
            assigned.insert(v.clone(), id);
            while let Some(u) = stack.pop() {
                block.push(u.clone());
                for s in self.siblings_of(&u) {
                    if self.is_random(&s) && !assigned.contains_key(&s) {
                        assigned.insert(s.clone(), id);
                        stack.push(s);
                    }
                }
            }
            block.sort_by_key(|x| self.canonical_pos(x));
            blocks.push(block);
        }
        blocks
    }

    /// District containing `v` (random vertices only).
    pub fn district_of(&self, v: &VertexId) -> VertexSet {
        let mut out = VertexSet::new();
        if !self.is_random(v) {
            return out;
        }
        let mut stack = vec![v.clone()];
        out.insert(v.clone());
        while let Some(u) = stack.pop() {
            for s in self.siblings_of(&u) {
                if self.is_random(&s) && out.insert(s.clone()) {
                    stack.push(s);
                }
            }
        }
        out
    }

    /// Induced subgraph on a set of random vertices. Fixed vertices are
    /// dropped; only edges with both endpoints inside survive.
    pub fn induced_subgraph(&self, s: &VertexSet) -> Result<MixedGraph, GraphError> {
        self.check_known(s)?;
        for v in s {
            if !self.is_random(v) {
                return Err(GraphError::UnknownVertex(v.clone()));
            }
        }
        let keep: Vec<VertexId> = self
            .random
            .iter()
            .filter(|v| s.contains(*v))
            .cloned()
            .collect();
        let directed = self
            .directed
            .iter()
            .filter(|(t, h)| s.contains(t) && s.contains(h))
            .cloned()
            .collect();
        let bidirected = self
            .bidirected
            .iter()
            .filter(|(a, b)| s.contains(a) && s.contains(b))
            .cloned()
            .collect();
        let hidden = self.hidden.intersection(s).cloned().collect();
        let det = self
            .det_edges
            .iter()
            .filter(|(t, h)| s.contains(t) && s.contains(h))
            .cloned()
            .collect();
        MixedGraph::from_parts(keep, Vec::new(), directed, bidirected, hidden, det)
    }

    /// Edge deletion for do-calculus graphs: removes every edge with an
    /// arrowhead at a member of `remove_into` (directed heads and
    /// bidirected endpoints) and every directed edge whose tail lies in
    /// `remove_out_of`. Vertices are unchanged.
    pub fn mutilate(
        &self,
        remove_into: &VertexSet,
        remove_out_of: &VertexSet,
    ) -> Result<MixedGraph, GraphError> {
        self.check_known(remove_into)?;
        self.check_known(remove_out_of)?;
        let directed: Vec<_> = self
            .directed
            .iter()
            .filter(|(t, h)| !remove_into.contains(h) && !remove_out_of.contains(t))
            .cloned()
            .collect();
        let bidirected: Vec<_> = self
            .bidirected
            .iter()
            .filter(|(a, b)| !remove_into.contains(a) && !remove_into.contains(b))
            .cloned()
            .collect();
        let det = self
            .det_edges
            .iter()
            .filter(|e| directed.contains(e))
            .cloned()
            .collect();
        MixedGraph::from_parts(
            self.random.clone(),
            self.fixed.clone(),
            directed,
            bidirected,
            self.hidden.clone(),
            det,
        )
    }

    /// Equality up to declaration order: same vertex sets, same edges,
    /// same markers. The canonical order itself may differ when the two
    /// graphs were declared differently.
    pub fn same_structure(&self, other: &MixedGraph) -> bool {
        self.random_set() == other.random_set()
            && self.fixed_set() == other.fixed_set()
            && self.directed == other.directed
            && self.bidirected == other.bidirected
            && self.hidden == other.hidden
            && self.det_edges == other.det_edges
    }
}
