//! Instance families and colorings: unit grids on the line and in the plane,
//! uniform random points in [0,1], round-robin and sublattice colorings, and
//! permutation-reduced enumeration of all colorings for small instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Coloring, ColoringKind, Layout, NodeSet};

/// Identifier of the random stream construction, recorded in experiment
/// metadata. Bump the suffix if the derivation below ever changes.
pub const RNG_ID: &str = "chacha8(seed=seed_from_u64(seed), stream=trial)/uniform-f64/v1";

/// Largest instance [`enumerate_colorings`] accepts.
pub const ENUMERATION_MAX_NODES: usize = 10;

/// Seed material for one random trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub n: usize,
    pub seed: u64,
    pub trial: u64,
}

impl RandomSpec {
    pub fn new(n: usize, seed: u64, trial: u64) -> Self {
        RandomSpec { n, seed, trial }
    }

    /// Independent, replayable stream for this trial.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.trial);
        rng
    }
}

/// `p_i = i` for `i = 1..=n`.
pub fn grid_1d(n: usize) -> Result<NodeSet> {
    if n == 0 {
        return Err(Error::param("n", "grid needs at least one node"));
    }
    Ok(NodeSet::line((1..=n).map(|i| i as f64).collect())?.with_layout(Layout::Grid1d))
}

/// Integer square root if `n` is a perfect square.
pub fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// The `√n × √n` unit lattice with corner (0,0), stored x-major: node
/// `x·side + y` sits at `(x, y)`.
pub fn grid_2d(n: usize) -> Result<NodeSet> {
    let side = exact_sqrt(n)
        .filter(|&s| s > 0)
        .ok_or_else(|| Error::param("n", format!("{n} is not a positive perfect square")))?;
    let points = (0..n)
        .map(|i| [(i / side) as f64, (i % side) as f64])
        .collect();
    Ok(NodeSet::plane(points)?.with_layout(Layout::Grid2d { side }))
}

/// `n` independent uniform points in [0,1], sorted. Deterministic in
/// `(seed, trial)`.
pub fn sample_uniform_1d(spec: RandomSpec) -> Result<NodeSet> {
    if spec.n == 0 {
        return Err(Error::param("n", "need at least one node"));
    }
    let mut rng = spec.rng();
    let mut xs: Vec<f64> = (0..spec.n).map(|_| rng.gen::<f64>()).collect();
    xs.sort_by(f64::total_cmp);
    // Coincident draws are possible in principle; redraw until distinct.
    loop {
        let before = xs.len();
        xs.dedup();
        if xs.len() == before {
            break;
        }
        while xs.len() < spec.n {
            xs.push(rng.gen::<f64>());
        }
        xs.sort_by(f64::total_cmp);
    }
    NodeSet::line(xs)
}

/// Round-robin coloring `c(p_i) = (i mod k) + 1` over the 1-based node order.
pub fn regular_coloring_1d(n: usize, k: usize) -> Result<Coloring> {
    if k == 0 {
        return Err(Error::param("k", "need at least one color"));
    }
    let colors = (1..=n).map(|i| (i % k) as u32 + 1).collect();
    Coloring::with_kind(k, colors, ColoringKind::Regular1d)
}

/// Sublattice coloring of a `side × side` grid with `k²` colors:
/// `c(x, y) = (x mod k)·k + (y mod k) + 1`. Same-colored nodes form a lattice
/// of spacing `k`.
pub fn regular_coloring_2d(side: usize, k: usize) -> Result<Coloring> {
    if k == 0 || k > side {
        return Err(Error::param(
            "k",
            format!("must lie in 1..={side}, got {k}"),
        ));
    }
    let colors = (0..side * side)
        .map(|i| {
            let (x, y) = (i / side, i % side);
            ((x % k) * k + (y % k) + 1) as u32
        })
        .collect();
    Coloring::with_kind(k * k, colors, ColoringKind::Regular2d)
}

/// Every coloring of `n` nodes with at most `k` colors, up to relabeling.
///
/// Colorings are produced as restricted growth strings: node 1 gets color 1
/// and each later node either reuses a color already seen or opens the next
/// one. The count is `Σ_{j ≤ k} S(n, j)` (Stirling numbers of the second
/// kind).
pub fn enumerate_colorings(n: usize, k: usize) -> Result<ColoringEnumerator> {
    if n > ENUMERATION_MAX_NODES {
        return Err(Error::LimitsExceeded(format!(
            "enumeration supports at most {ENUMERATION_MAX_NODES} nodes, got {n}"
        )));
    }
    if k == 0 || k > n.max(1) {
        return Err(Error::LimitsExceeded(format!(
            "k must lie in 1..={n}, got {k}"
        )));
    }
    Ok(ColoringEnumerator {
        k,
        current: (n > 0).then(|| vec![1; n]),
    })
}

/// Iterator returned by [`enumerate_colorings`].
#[derive(Debug, Clone)]
pub struct ColoringEnumerator {
    k: usize,
    current: Option<Vec<u32>>,
}

impl Iterator for ColoringEnumerator {
    type Item = Coloring;

    fn next(&mut self) -> Option<Coloring> {
        let colors = self.current.take()?;
        let item = Coloring::with_kind(self.k, colors.clone(), ColoringKind::Explicit)
            .expect("restricted growth strings stay within 1..=k");

        // Advance: bump the rightmost position that may grow, reset the tail.
        let mut next = colors;
        let mut prefix_max = vec![0u32; next.len()];
        let mut m = 0;
        for (i, &c) in next.iter().enumerate() {
            prefix_max[i] = m;
            m = m.max(c);
        }
        for i in (1..next.len()).rev() {
            let limit = (prefix_max[i] + 1).min(self.k as u32);
            if next[i] < limit {
                next[i] += 1;
                next[i + 1..].iter_mut().for_each(|c| *c = 1);
                self.current = Some(next);
                break;
            }
        }
        Some(item)
    }
}
