//! m-separation on mixed graphs.
//!
//! The test extends plain m-separation so that fixed vertices may appear
//! as one endpoint of a statement (the left side). Fixed vertices have
//! only outgoing directed edges, participate through those edges when
//! they are endpoints, and always block as interior vertices.
//!
//! `m_separated` runs a walk-reachability search over (vertex, incoming
//! mark) states; a collider on the walk passes only when it has a
//! descendant inside the conditioning set, a non-collider only when it is
//! outside it. The exhaustive path enumerator used to validate this
//! search lives in the test suites, independent of this module.

use thiserror::Error;

use crate::graph::{MixedGraph, VertexId, VertexSet};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SeparationError {
    #[error("query sets overlap at `{0}`")]
    Overlap(VertexId),
    #[error("fixed vertex `{0}` may only appear on the left side")]
    FixedOutsideLeft(VertexId),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexId),
}

/// A separation statement `left ⫫ right | given` over a graph.
#[derive(Clone, Debug)]
pub struct SeparationQuery<'g> {
    pub graph: &'g MixedGraph,
    pub left: VertexSet,
    pub right: VertexSet,
    pub given: VertexSet,
}

/// Orientation mark at one end of an edge.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Mark {
    Tail,
    Head,
}

/// An open path certifying m-connection: vertices joined by edges, with
/// the mark each edge carries at its two endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathWitness {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(Mark, Mark)>,
}

impl std::fmt::Display for PathWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                let arrow = match self.edges[i - 1] {
                    (Mark::Tail, Mark::Head) => " -> ",
                    (Mark::Head, Mark::Tail) => " <- ",
                    (Mark::Head, Mark::Head) => " <-> ",
                    (Mark::Tail, Mark::Tail) => " - ",
                };
                f.write_str(arrow)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl<'g> SeparationQuery<'g> {
    pub fn new(
        graph: &'g MixedGraph,
        left: VertexSet,
        right: VertexSet,
        given: VertexSet,
    ) -> Result<Self, SeparationError> {
        for (a, b) in [(&left, &right), (&left, &given), (&right, &given)] {
            if let Some(v) = a.intersection(b).next() {
                return Err(SeparationError::Overlap(v.clone()));
            }
        }
        for v in left.iter().chain(right.iter()).chain(given.iter()) {
            if !graph.contains(v) {
                return Err(SeparationError::UnknownVertex(v.clone()));
            }
        }
        for v in right.iter().chain(given.iter()) {
            if graph.is_fixed(v) {
                return Err(SeparationError::FixedOutsideLeft(v.clone()));
            }
        }
        Ok(SeparationQuery {
            graph,
            left,
            right,
            given,
        })
    }
}

/// Steps available from `v`: (neighbour, mark at v, mark at neighbour).
fn steps(g: &MixedGraph, v: &VertexId) -> Vec<(VertexId, Mark, Mark)> {
    let mut out = Vec::new();
    for c in g.children_of(v) {
        out.push((c, Mark::Tail, Mark::Head));
    }
    for p in g.parents_of(v) {
        out.push((p, Mark::Head, Mark::Tail));
    }
    for s in g.siblings_of(v) {
        out.push((s, Mark::Head, Mark::Head));
    }
    out.sort_by_key(|(n, mv, mn)| (g.canonical_pos(n), *mv, *mn));
    out
}

/// True when every path from `left` to `right` is blocked by `given`.
pub fn m_separated(q: &SeparationQuery) -> bool {
    let g = q.graph;
    if q.left.is_empty() || q.right.is_empty() {
        return true;
    }
    // Colliders pass when they have a descendant in the conditioning set.
    let collider_open: VertexSet = g
        .random()
        .iter()
        .filter(|v| {
            g.descendants(&VertexSet::from([(*v).clone()]))
                .intersection(&q.given)
                .next()
                .is_some()
        })
        .cloned()
        .collect();

    // Reachable (vertex, arrived-with-arrowhead) states.
    let mut seen: std::collections::BTreeSet<(VertexId, bool)> = Default::default();
    let mut stack: Vec<(VertexId, bool)> = Vec::new();
    for l in &q.left {
        // A fixed source participates only through its outgoing edges; a
        // random source may leave through any edge. Both are encoded by
        // the steps out of the start vertex.
        for (n, _mv, mn) in steps(g, l) {
            if g.is_fixed(l) && _mv != Mark::Tail {
                continue;
            }
            let state = (n, mn == Mark::Head);
            if seen.insert(state.clone()) {
                stack.push(state);
            }
        }
    }
    while let Some((v, head_in)) = stack.pop() {
        if q.right.contains(&v) {
            return false;
        }
        // Interior blocking rules.
        for (n, mv, mn) in steps(g, &v) {
            let collider = head_in && mv == Mark::Head;
            let passes = if collider {
                collider_open.contains(&v)
            } else {
                !q.given.contains(&v) && !g.is_fixed(&v)
            };
            if !passes {
                continue;
            }
            if q.left.contains(&n) {
                continue;
            }
            let state = (n, mn == Mark::Head);
            if seen.insert(state.clone()) {
                stack.push(state);
            }
        }
    }
    true
}

/// Whether a concrete path is open given the conditioning set, using the
/// blocking rules directly (non-collider in `given` blocks; collider
/// blocks unless it has a descendant in `given`; interior fixed vertices
/// block).
pub fn path_is_open(g: &MixedGraph, w: &PathWitness, given: &VertexSet) -> bool {
    for i in 1..w.vertices.len().saturating_sub(1) {
        let v = &w.vertices[i];
        if g.is_fixed(v) {
            return false;
        }
        let into = w.edges[i - 1].1 == Mark::Head;
        let outof = w.edges[i].0 == Mark::Head;
        let collider = into && outof;
        if collider {
            let open = g
                .descendants(&VertexSet::from([v.clone()]))
                .intersection(given)
                .next()
                .is_some();
            if !open {
                return false;
            }
        } else if given.contains(v) {
            return false;
        }
    }
    true
}

/// Returns an open path when the query is m-connected, `None` otherwise.
/// Deterministic tie-break: shortest path, then lexicographic by
/// canonical vertex positions, then directed edges before bidirected.
pub fn connecting_witness(q: &SeparationQuery) -> Option<PathWitness> {
    let g = q.graph;
    let mut best: Option<PathWitness> = None;
    let mut rank = |w: &PathWitness| -> (usize, Vec<usize>, Vec<(Mark, Mark)>) {
        (
            w.vertices.len(),
            w.vertices.iter().map(|v| g.canonical_pos(v)).collect(),
            w.edges.clone(),
        )
    };
    for l in &q.left {
        let mut path = PathWitness {
            vertices: vec![l.clone()],
            edges: Vec::new(),
        };
        walk(g, q, &mut path, &mut best, &mut rank);
    }
    best
}

fn walk(
    g: &MixedGraph,
    q: &SeparationQuery,
    path: &mut PathWitness,
    best: &mut Option<PathWitness>,
    rank: &mut impl FnMut(&PathWitness) -> (usize, Vec<usize>, Vec<(Mark, Mark)>),
) {
    let last = path.vertices.last().unwrap().clone();
    if let Some(b) = best {
        // Paths only grow; anything longer than the best cannot win.
        if path.vertices.len() > b.vertices.len() {
            return;
        }
    }
    if q.right.contains(&last) {
        if path_is_open(g, path, &q.given) {
            let better = match best {
                None => true,
                Some(b) => rank(path) < rank(b),
            };
            if better {
                *best = Some(path.clone());
            }
        }
        return;
    }
    let start_fixed = path.vertices.len() == 1 && g.is_fixed(&last);
    for (n, mv, mn) in steps(g, &last) {
        if start_fixed && mv != Mark::Tail {
            continue;
        }
        if path.vertices.contains(&n) {
            continue;
        }
        // Interior vertices must be random; endpoints beyond the start
        // are always in `right`, checked above.
        if g.is_fixed(&n) {
            continue;
        }
        path.vertices.push(n);
        path.edges.push((mv, mn));
        walk(g, q, path, best, rank);
        path.vertices.pop();
        path.edges.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, vset, GraphDecl};

    fn chain() -> MixedGraph {
        build_graph(
            &GraphDecl::new()
                .vertex("X")
                .vertex("B")
                .vertex("Y")
                .edge("X", "B")
                .edge("B", "Y"),
        )
        .unwrap()
    }

    fn collider() -> MixedGraph {
        build_graph(
            &GraphDecl::new()
                .vertex("X")
                .vertex("B")
                .vertex("Y")
                .edge("X", "B")
                .edge("Y", "B"),
        )
        .unwrap()
    }

    fn bow() -> MixedGraph {
        build_graph(
            &GraphDecl::new()
                .vertex("A")
                .vertex("Y")
                .edge("A", "Y")
                .bi("A", "Y"),
        )
        .unwrap()
    }

    #[test]
    fn chain_blocks_on_middle() {
        let g = chain();
        let sep = |given: VertexSet| {
            m_separated(&SeparationQuery::new(&g, vset(["X"]), vset(["Y"]), given).unwrap())
        };
        assert!(sep(vset(["B"])));
        assert!(!sep(VertexSet::new()));
    }

    #[test]
    fn collider_opens_on_middle() {
        let g = collider();
        let sep = |given: VertexSet| {
            m_separated(&SeparationQuery::new(&g, vset(["X"]), vset(["Y"]), given).unwrap())
        };
        assert!(sep(VertexSet::new()));
        assert!(!sep(vset(["B"])));
    }

    #[test]
    fn collider_descendant_opens() {
        let g = build_graph(
            &GraphDecl::new()
                .vertex("X")
                .vertex("B")
                .vertex("Y")
                .vertex("D")
                .edge("X", "B")
                .edge("Y", "B")
                .edge("B", "D"),
        )
        .unwrap();
        let q = SeparationQuery::new(&g, vset(["X"]), vset(["Y"]), vset(["D"])).unwrap();
        assert!(!m_separated(&q));
    }

    #[test]
    fn bidirected_counts_as_two_arrowheads() {
        // X <-> B <-> Y: B is a collider on the only path.
        let g = build_graph(
            &GraphDecl::new()
                .vertex("X")
                .vertex("B")
                .vertex("Y")
                .bi("X", "B")
                .bi("B", "Y"),
        )
        .unwrap();
        let open = SeparationQuery::new(&g, vset(["X"]), vset(["Y"]), vset(["B"])).unwrap();
        assert!(!m_separated(&open));
        let closed = SeparationQuery::new(&g, vset(["X"]), vset(["Y"]), VertexSet::new()).unwrap();
        assert!(m_separated(&closed));
    }

    #[test]
    fn malformed_queries_rejected() {
        let g = chain();
        assert!(matches!(
            SeparationQuery::new(&g, vset(["X"]), vset(["X"]), VertexSet::new()),
            Err(SeparationError::Overlap(_))
        ));
        assert!(matches!(
            SeparationQuery::new(&g, vset(["X"]), vset(["Q"]), VertexSet::new()),
            Err(SeparationError::UnknownVertex(_))
        ));
    }

    #[test]
    fn witness_on_chain() {
        let g = chain();
        let q = SeparationQuery::new(&g, vset(["X"]), vset(["Y"]), VertexSet::new()).unwrap();
        let w = connecting_witness(&q).unwrap();
        assert_eq!(
            w.vertices.iter().map(|v| v.as_str()).collect::<Vec<_>>(),
            vec!["X", "B", "Y"]
        );
        let q2 = SeparationQuery::new(&g, vset(["X"]), vset(["Y"]), vset(["B"])).unwrap();
        assert!(connecting_witness(&q2).is_none());
    }

    #[test]
    fn witness_prefers_directed_edge_on_bow() {
        let g = bow();
        let q = SeparationQuery::new(&g, vset(["A"]), vset(["Y"]), VertexSet::new()).unwrap();
        let w = connecting_witness(&q).unwrap();
        assert_eq!(w.edges, vec![(Mark::Tail, Mark::Head)]);
    }

    #[test]
    fn witness_agrees_with_msep() {
        let g = bow();
        let q = SeparationQuery::new(&g, vset(["A"]), vset(["Y"]), VertexSet::new()).unwrap();
        assert_eq!(m_separated(&q), connecting_witness(&q).is_none());
    }

    #[test]
    fn fixed_endpoint_uses_outgoing_edges_only() {
        // fixed a -> Y, plus X -> a is illegal; instead: a -> M -> Y.
        let g = MixedGraph::from_parts(
            vec!["M".into(), "Y".into()],
            vec!["a".into()],
            vec![("a".into(), "M".into()), ("M".into(), "Y".into())],
            vec![],
            VertexSet::new(),
            Default::default(),
        )
        .unwrap();
        let q = SeparationQuery::new(&g, vset(["a"]), vset(["Y"]), VertexSet::new()).unwrap();
        assert!(!m_separated(&q));
        let q2 = SeparationQuery::new(&g, vset(["a"]), vset(["Y"]), vset(["M"])).unwrap();
        assert!(m_separated(&q2));
    }

    #[test]
    fn interior_fixed_vertex_blocks() {
        // Y <- a -> Z with a fixed: path Y..Z through a is never open.
        let g = MixedGraph::from_parts(
            vec!["Y".into(), "Z".into()],
            vec!["a".into()],
            vec![("a".into(), "Y".into()), ("a".into(), "Z".into())],
            vec![],
            VertexSet::new(),
            Default::default(),
        )
        .unwrap();
        let q = SeparationQuery::new(&g, vset(["Y"]), vset(["Z"]), VertexSet::new()).unwrap();
        assert!(m_separated(&q));
    }

    #[test]
    fn symmetry_for_random_sides() {
        let g = bow();
        let ab = SeparationQuery::new(&g, vset(["A"]), vset(["Y"]), VertexSet::new()).unwrap();
        let ba = SeparationQuery::new(&g, vset(["Y"]), vset(["A"]), VertexSet::new()).unwrap();
        assert_eq!(m_separated(&ab), m_separated(&ba));
    }
}
