//! Built-in graph families and truncation of the periodic one.
//!
//! Three deterministic families are provided:
//!
//! * `cycle(n)` — the directed `n`-cycle with unit weights; truncation at any
//!   radius returns the cycle itself.
//! * `mixed-cycles(a,b)` — two directed cycles of lengths `a` and `b` sharing
//!   a hub vertex that splits its outgoing weight `1/2 + 1/2`; its
//!   imprimitivity index is `gcd(a, b)`.
//! * `ladder` — a periodic two-rail template truncated at radius `r` to `r`
//!   cells.  Cell `i` has an upper vertex `u_i = 2i` and a lower vertex
//!   `w_i = 2i + 1` and owns four edges (all weights `1/2`):
//!   `u_i -> u_{i+1}`, `u_i -> w_i`, `w_i -> w_{i+1}`, `w_i -> u_i`.
//!   Truncation closes the boundary by redirecting the two rail edges of the
//!   last cell onto *wrap edges* `u_{r-1} -> u_0` and `w_{r-1} -> w_0`, so the
//!   truncated graph stays non-degenerate and strongly connected.  Interior
//!   cells agree between radii `r` and `r + 1` (same ids, same edges); only
//!   the wrap edges differ.
//!
//! A fourth, seeded family `random(n)` draws a strongly connected valid graph
//! with roughly `n` edges; it backs randomized exploration from the CLI.

use std::str::FromStr;

use crate::error::Error;
use crate::graph::{Edge, EdgeId, GraphSpec, VertexId};
use crate::random::{random_strongly_connected, RandomGraphConfig};
use crate::ratio::{q, qi};

/// A graph family that [`truncate`] instantiates at a given radius.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphTemplate {
    /// Directed `n`-cycle, unit weights.
    Cycle(usize),
    /// Two cycles of lengths `a` and `b` sharing a hub vertex.
    MixedCycles(usize, usize),
    /// Periodic two-rail ladder; the radius picks the number of cells.
    Ladder,
    /// Seeded random strongly connected graph with about `n` edges; the seed
    /// is supplied at truncation time through [`truncate_seeded`].
    Random(usize),
}

impl FromStr for GraphTemplate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let text = s.trim();
        let unknown = || Error::UnknownTemplate { name: s.to_string() };
        if text == "ladder" {
            return Ok(Self::Ladder);
        }
        let (name, rest) = text.split_once('(').ok_or_else(unknown)?;
        let args = rest.strip_suffix(')').ok_or_else(unknown)?;
        let params: Vec<usize> = args
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| unknown())?;
        match (name.trim(), params.as_slice()) {
            ("cycle", [n]) => Ok(Self::Cycle(*n)),
            ("mixed-cycles", [a, b]) => Ok(Self::MixedCycles(*a, *b)),
            ("random", [n]) => Ok(Self::Random(*n)),
            _ => Err(unknown()),
        }
    }
}

/// Instantiates `template` truncated at `radius`.
///
/// The finite families (`cycle`, `mixed-cycles`) ignore the radius — their
/// truncation is the graph itself.  `ladder` uses the radius as its cell
/// count (at least 2).  `random(n)` requires [`truncate_seeded`].
pub fn truncate(template: &GraphTemplate, radius: usize) -> Result<GraphSpec, Error> {
    match template {
        GraphTemplate::Cycle(n) => cycle(*n),
        GraphTemplate::MixedCycles(a, b) => mixed_cycles(*a, *b),
        GraphTemplate::Ladder => ladder(radius),
        GraphTemplate::Random(_) => Err(Error::InvalidTemplateParameter {
            reason: "random(n) needs a seed; use truncate_seeded".into(),
        }),
    }
}

/// Like [`truncate`], with a seed for the `random(n)` family (other families
/// ignore the seed).
pub fn truncate_seeded(template: &GraphTemplate, radius: usize, seed: u64) -> Result<GraphSpec, Error> {
    match template {
        GraphTemplate::Random(n) => {
            let cfg = RandomGraphConfig { max_edges: (*n).max(2), ..RandomGraphConfig::default() };
            Ok(random_strongly_connected(seed, &cfg))
        }
        other => truncate(other, radius),
    }
}

fn cycle(n: usize) -> Result<GraphSpec, Error> {
    if n < 2 {
        return Err(Error::InvalidTemplateParameter { reason: format!("cycle({n}) needs n >= 2") });
    }
    let vertices = (0..n).map(VertexId).collect();
    let edges = (0..n)
        .map(|i| Edge {
            id: EdgeId(i),
            tail: VertexId(i),
            head: VertexId((i + 1) % n),
            weight: qi(1),
            velocity: None,
        })
        .collect();
    Ok(GraphSpec { vertices, edges })
}

fn mixed_cycles(a: usize, b: usize) -> Result<GraphSpec, Error> {
    if a < 2 || b < 2 {
        return Err(Error::InvalidTemplateParameter {
            reason: format!("mixed-cycles({a},{b}) needs a, b >= 2"),
        });
    }
    // Hub is vertex 0; cycle A uses vertices 1..a-1, cycle B uses a..a+b-2.
    let n = a + b - 1;
    let vertices = (0..n).map(VertexId).collect();
    let mut edges = Vec::new();
    let mut push = |tail: usize, head: usize| {
        let weight = if tail == 0 { q(1, 2) } else { qi(1) };
        let id = EdgeId(edges.len());
        edges.push(Edge { id, tail: VertexId(tail), head: VertexId(head), weight, velocity: None });
    };
    let mut prev = 0;
    for v in 1..a {
        push(prev, v);
        prev = v;
    }
    push(prev, 0);
    prev = 0;
    for v in a..a + b - 1 {
        push(prev, v);
        prev = v;
    }
    push(prev, 0);
    Ok(GraphSpec { vertices, edges })
}

fn ladder(r: usize) -> Result<GraphSpec, Error> {
    if r < 2 {
        return Err(Error::InvalidTemplateParameter {
            reason: format!("ladder radius {r} needs r >= 2 cells"),
        });
    }
    let vertices = (0..2 * r).map(VertexId).collect();
    let mut edges = Vec::new();
    for i in 0..r {
        // The last cell's rail edges wrap to cell 0; interior cells point to i+1.
        let next = (i + 1) % r;
        let u = 2 * i;
        let w = 2 * i + 1;
        for (tail, head) in [(u, 2 * next), (u, w), (w, 2 * next + 1), (w, u)] {
            edges.push(Edge {
                id: EdgeId(edges.len()),
                tail: VertexId(tail),
                head: VertexId(head),
                weight: q(1, 2),
                velocity: None,
            });
        }
    }
    Ok(GraphSpec { vertices, edges })
}
