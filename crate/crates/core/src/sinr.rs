//! Interference sums, the SINR reception test and the directed SINR graph.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Coloring, NodeSet, SinrParams, TIE_TOLERANCE};

/// Outcome of the reception test for one ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeEvaluation {
    pub sender: usize,
    pub receiver: usize,
    /// `1 / d(sender, receiver)^α`.
    pub signal: f64,
    /// Power received from every other node sharing the sender's color.
    pub interference: f64,
    /// `signal / interference`, `+∞` when there is no interference.
    pub ratio: f64,
    pub is_edge: bool,
}

impl EdgeEvaluation {
    /// The ratio sits within the tie tolerance of `β`.
    pub fn is_near_tie(&self, params: &SinrParams) -> bool {
        is_near_tie(self.ratio, params)
    }
}

fn is_near_tie(ratio: f64, params: &SinrParams) -> bool {
    ratio.is_finite() && (ratio - params.beta()).abs() <= params.beta() * TIE_TOLERANCE
}

fn check_pair(nodes: &NodeSet, coloring: &Coloring, sender: usize, receiver: usize) -> Result<()> {
    coloring.check_covers(nodes)?;
    nodes.check_index(sender)?;
    nodes.check_index(receiver)?;
    if sender == receiver {
        return Err(Error::SameEndpoint(sender));
    }
    Ok(())
}

/// Total power at `receiver` from every node other than `sender` that shares
/// the sender's color, summed in ascending node order.
///
/// If the receiver itself has the sender's color it contributes a term at
/// distance zero and the result is `+∞`.
pub fn interference_at(
    nodes: &NodeSet,
    coloring: &Coloring,
    sender: usize,
    receiver: usize,
    params: &SinrParams,
) -> Result<f64> {
    check_pair(nodes, coloring, sender, receiver)?;
    Ok(interference_unchecked(
        nodes, coloring, sender, receiver, params,
    ))
}

fn interference_unchecked(
    nodes: &NodeSet,
    coloring: &Coloring,
    sender: usize,
    receiver: usize,
    params: &SinrParams,
) -> f64 {
    let color = coloring.color(sender);
    (0..nodes.len())
        .filter(|&w| w != sender && coloring.color(w) == color)
        .map(|w| nodes.gain(w, receiver, params))
        .sum()
}

/// Evaluate the reception test for the ordered pair `(sender, receiver)`.
pub fn sinr_edge(
    nodes: &NodeSet,
    coloring: &Coloring,
    sender: usize,
    receiver: usize,
    params: &SinrParams,
) -> Result<EdgeEvaluation> {
    check_pair(nodes, coloring, sender, receiver)?;
    let signal = nodes.gain(sender, receiver, params);
    let interference = interference_unchecked(nodes, coloring, sender, receiver, params);
    let ratio = if interference == 0.0 {
        f64::INFINITY
    } else {
        signal / interference
    };
    Ok(EdgeEvaluation {
        sender,
        receiver,
        signal,
        interference,
        ratio,
        is_edge: params.decodes(signal, interference),
    })
}

/// Directed graph on `n` nodes, stored as sorted out-neighbor lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GraphData", into = "GraphData")]
pub struct SinrGraph {
    out: Vec<Vec<usize>>,
    near_ties: usize,
}

impl PartialEq for SinrGraph {
    fn eq(&self, other: &Self) -> bool {
        self.out == other.out
    }
}

/// JSON adjacency list `{"n": n, "edges": [[u,v],…]}` with 1-based indices.
#[derive(Debug, Serialize, Deserialize)]
struct GraphData {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphData> for SinrGraph {
    type Error = Error;

    fn try_from(data: GraphData) -> Result<Self> {
        let mut edges = Vec::with_capacity(data.edges.len());
        for [u, v] in data.edges {
            if u == 0 || v == 0 {
                return Err(Error::IndexOutOfRange {
                    index: 0,
                    n: data.n,
                });
            }
            edges.push((u - 1, v - 1));
        }
        SinrGraph::from_edges(data.n, edges)
    }
}

impl From<SinrGraph> for GraphData {
    fn from(g: SinrGraph) -> Self {
        GraphData {
            n: g.n(),
            edges: g.edges().map(|(u, v)| [u + 1, v + 1]).collect(),
        }
    }
}

impl SinrGraph {
    /// Graph from 0-based ordered pairs. Self-loops are rejected; duplicates
    /// collapse.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = vec![Vec::new(); n];
        for (u, v) in edges {
            for index in [u, v] {
                if index >= n {
                    return Err(Error::IndexOutOfRange { index, n });
                }
            }
            if u == v {
                return Err(Error::SameEndpoint(u));
            }
            out[u].push(v);
        }
        for list in &mut out {
            list.sort_unstable();
            list.dedup();
        }
        Ok(SinrGraph { out, near_ties: 0 })
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out.get(u).is_some_and(|l| l.binary_search(&v).is_ok())
    }

    /// All edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().map(move |&v| (u, v)))
    }

    /// Number of evaluated pairs whose ratio landed within the tie tolerance
    /// of `β`. Only populated by [`build_graph`].
    pub fn near_ties(&self) -> usize {
        self.near_ties
    }

    fn reversed(&self) -> Vec<Vec<usize>> {
        let mut rev = vec![Vec::new(); self.n()];
        for (u, v) in self.edges() {
            rev[v].push(u);
        }
        rev
    }
}

/// Build the SINR graph: `(u, v)` is an edge iff `v` decodes `u` when every
/// node of `u`'s color transmits.
///
/// Receivers are processed independently. For each receiver the per-color
/// power totals give a cheap lower bound on every sender's interference;
/// pairs that the bound cannot rule out are decided by the exact ascending
/// sum, so the edge set is identical to evaluating [`sinr_edge`] on all
/// pairs.
pub fn build_graph(nodes: &NodeSet, coloring: &Coloring, params: &SinrParams) -> Result<SinrGraph> {
    coloring.check_covers(nodes)?;
    let n = nodes.len();
    let classes = coloring.classes();
    let colors = coloring.colors();
    let threshold = params.beta() * (1.0 - TIE_TOLERANCE);
    // Relative error bound on a sum of at most n positive terms, with headroom.
    let slack = 4.0 * (n as f64 + 1.0) * f64::EPSILON;

    let incoming: Vec<(Vec<usize>, usize)> = (0..n)
        .into_par_iter()
        .with_min_len(16)
        .map_init(
            || (vec![0.0f64; n], vec![0.0f64; coloring.k()]),
            |(gains, totals), v| {
                let own = colors[v];
                totals.iter_mut().for_each(|t| *t = 0.0);
                for w in 0..n {
                    if w != v {
                        let g = nodes.gain(w, v, params);
                        gains[w] = g;
                        totals[colors[w] as usize - 1] += g;
                    }
                }

                let mut senders = Vec::new();
                let mut ties = 0;
                for u in 0..n {
                    if u == v || colors[u] == own {
                        continue;
                    }
                    let class = colors[u] as usize - 1;
                    let signal = gains[u];
                    let lower = (totals[class] - signal) - totals[class] * slack;
                    if lower > 0.0 && signal < threshold * lower * (1.0 - 1e-12) {
                        continue;
                    }
                    let interference: f64 = classes[class]
                        .iter()
                        .filter(|&&w| w != u)
                        .map(|&w| gains[w])
                        .sum();
                    if interference != 0.0 && is_near_tie(signal / interference, params) {
                        ties += 1;
                    }
                    if params.decodes(signal, interference) {
                        senders.push(u);
                    }
                }
                (senders, ties)
            },
        )
        .collect();

    let mut out = vec![Vec::new(); n];
    let mut near_ties = 0;
    for (v, (senders, ties)) in incoming.into_iter().enumerate() {
        near_ties += ties;
        for u in senders {
            out[u].push(v);
        }
    }
    Ok(SinrGraph { out, near_ties })
}

fn reaches_all(adjacency: &[Vec<usize>]) -> bool {
    let n = adjacency.len();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

/// Every ordered pair is joined by a directed path. Graphs with at most one
/// node are strongly connected.
pub fn is_strongly_connected(graph: &SinrGraph) -> bool {
    if graph.n() <= 1 {
        return true;
    }
    reaches_all(&graph.out) && reaches_all(&graph.reversed())
}
