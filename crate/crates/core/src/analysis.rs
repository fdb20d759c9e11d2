//! Color-count analysis: minimum-color searches over regular and arbitrary
//! colorings, closed-form sufficient color counts for grids, interference
//! profiles, the two disconnection witnesses for nodes in [0,1], and
//! scaling fits for min-color data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{
    enumerate_colorings, regular_coloring_1d, regular_coloring_2d, ENUMERATION_MAX_NODES,
};
use crate::model::{Coloring, Dimension, NodeSet, SinrParams};
use crate::sinr::{build_graph, is_strongly_connected};

// ---------------------------------------------------------------------------
// Closed-form constants
// ---------------------------------------------------------------------------

/// Upper bound on `ζ(α) = Σ_{j≥1} j^{-α}` from the first `terms` terms plus an
/// integral bound on the tail.
///
/// The tail uses `Σ_{j>T} j^{-α} ≤ ∫_{T+½}^∞ x^{-α} dx`, which holds because
/// `x^{-α}` is convex (each term is at most the integral over the unit
/// interval centred on it). The overshoot is roughly `α (T+½)^{-α-1} / 24`.
pub fn zeta_partial(alpha: f64, terms: usize) -> Result<f64> {
    if alpha.is_nan() || alpha <= 1.0 {
        return Err(Error::param(
            "alpha",
            format!("series diverges for alpha = {alpha} <= 1"),
        ));
    }
    if terms == 0 {
        return Err(Error::param("terms", "need at least one term"));
    }
    // Smallest terms first.
    let head: f64 = (1..=terms).rev().map(|j| (j as f64).powf(-alpha)).sum();
    let t = terms as f64 + 0.5;
    Ok(head + t.powf(1.0 - alpha) / (alpha - 1.0))
}

/// [`zeta_partial`] with enough terms that the overshoot stays below 1e-10
/// (so the result is within 1e-9 of `ζ(α)` for `α ≥ 1.1`).
pub fn zeta_upper(alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 1.0 {
        return Err(Error::param(
            "alpha",
            format!("series diverges for alpha = {alpha} <= 1"),
        ));
    }
    let terms = (alpha / (24.0 * 1e-10)).powf(1.0 / (alpha + 1.0)).ceil();
    zeta_partial(alpha, terms.clamp(16.0, 5e6) as usize)
}

/// Colors that make a regular coloring of the 1D unit grid strongly
/// connected: `⌈1 + (2 β ζ(α))^{1/α}⌉`.
pub fn sufficient_k_1d(params: &SinrParams) -> Result<usize> {
    let g = zeta_upper(params.alpha())?;
    Ok((1.0 + (2.0 * params.beta() * g).powf(1.0 / params.alpha())).ceil() as usize)
}

/// Sublattice spacing `k` that makes the regular `k²`-coloring of the 2D unit
/// grid strongly connected for `α > 2`: the smallest integer strictly above
/// `(3·2^{α-1} β (α-1)/(α-2))^{1/α}`. The coloring uses `k²` colors.
pub fn sufficient_k_2d(params: &SinrParams) -> Result<usize> {
    let a = params.alpha();
    if a.is_nan() || a <= 2.0 {
        return Err(Error::param("alpha", format!("needs alpha > 2, got {a}")));
    }
    let bound = (3.0 * 2f64.powf(a - 1.0) * params.beta() * (a - 1.0) / (a - 2.0)).powf(1.0 / a);
    Ok(bound.floor() as usize + 1)
}

/// Which form of the `γ` threshold to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaVariant {
    /// `(1+ε)/(1−3ε)` inside the power, as obtained when bounding the
    /// interferer distances. Smaller, hence the safer trigger.
    Derived,
    /// `(1−ε)/(1−3ε)` inside the power.
    Stated,
}

/// `γ = β / (β + (1 + (1+ε)/(1−3ε))^α)`: an exponential sequence of `h` nodes
/// colored with fewer than `γ·h` colors disconnects the SINR graph.
pub fn gamma_threshold(params: &SinrParams, epsilon: f64) -> Result<f64> {
    gamma_threshold_variant(params, epsilon, GammaVariant::Derived)
}

pub fn gamma_threshold_variant(
    params: &SinrParams,
    epsilon: f64,
    variant: GammaVariant,
) -> Result<f64> {
    check_epsilon(epsilon)?;
    let numerator = match variant {
        GammaVariant::Derived => 1.0 + epsilon,
        GammaVariant::Stated => 1.0 - epsilon,
    };
    let spread = (1.0 + numerator / (1.0 - 3.0 * epsilon)).powf(params.alpha());
    Ok(params.beta() / (params.beta() + spread))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 / 3.0 {
        Ok(())
    } else {
        Err(Error::param(
            "epsilon",
            format!("must lie in (0, 1/3), got {epsilon}"),
        ))
    }
}

// ---------------------------------------------------------------------------
// Minimum-color searches
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Regular1d,
    Regular2d,
    Exhaustive,
}

/// Feasibility of each searched `k` and the smallest feasible one.
///
/// Connectivity is not assumed monotone in `k`: `k_min` is the smallest
/// feasible value, not a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinColorResult {
    pub family: Family,
    pub k_max: usize,
    pub feasibility: BTreeMap<usize, bool>,
    pub k_min: Option<usize>,
    /// For exhaustive searches, a strongly connected coloring with `k_min`
    /// colors.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub example: Option<Coloring>,
}

impl MinColorResult {
    /// Number of colors used by parameter `k` in this family.
    pub fn colors_for(&self, k: usize) -> usize {
        match self.family {
            Family::Regular2d => k * k,
            _ => k,
        }
    }

    pub fn min_colors(&self) -> Option<usize> {
        self.k_min.map(|k| self.colors_for(k))
    }
}

/// Regular coloring families searchable by [`min_k_regular`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularFamily {
    Regular1d,
    Regular2d,
}

impl From<RegularFamily> for Family {
    fn from(f: RegularFamily) -> Self {
        match f {
            RegularFamily::Regular1d => Family::Regular1d,
            RegularFamily::Regular2d => Family::Regular2d,
        }
    }
}

/// The regular coloring with parameter `k` for `nodes`.
pub fn regular_coloring(nodes: &NodeSet, family: RegularFamily, k: usize) -> Result<Coloring> {
    match family {
        RegularFamily::Regular1d => {
            if nodes.dimension() != Dimension::One {
                return Err(Error::WrongInstance(
                    "regular-1d",
                    "nodes must lie on a line".into(),
                ));
            }
            regular_coloring_1d(nodes.len(), k)
        }
        RegularFamily::Regular2d => {
            let side = nodes.grid_side().ok_or_else(|| {
                Error::WrongInstance("regular-2d", "nodes must form a 2D unit grid".into())
            })?;
            regular_coloring_2d(side, k)
        }
    }
}

/// Strong connectivity of the SINR graph under the regular coloring `k`.
pub fn regular_feasible(
    nodes: &NodeSet,
    params: &SinrParams,
    family: RegularFamily,
    k: usize,
) -> Result<bool> {
    let coloring = regular_coloring(nodes, family, k)?;
    Ok(is_strongly_connected(&build_graph(
        nodes, &coloring, params,
    )?))
}

fn check_regular_range(nodes: &NodeSet, family: RegularFamily, k_max: usize) -> Result<()> {
    let limit = match family {
        RegularFamily::Regular1d => nodes.len(),
        RegularFamily::Regular2d => nodes.grid_side().unwrap_or(0),
    };
    if k_max == 0 || k_max > limit {
        return Err(Error::param(
            "k_max",
            format!("must lie in 1..={limit}, got {k_max}"),
        ));
    }
    Ok(())
}

/// Evaluate every regular coloring `k = 1..=k_max` and report the full
/// feasibility vector.
pub fn min_k_regular(
    nodes: &NodeSet,
    params: &SinrParams,
    family: RegularFamily,
    k_max: usize,
) -> Result<MinColorResult> {
    search_regular(nodes, params, family, k_max, false)
}

/// Like [`min_k_regular`] but stops at the first feasible `k`.
pub fn first_feasible_k_regular(
    nodes: &NodeSet,
    params: &SinrParams,
    family: RegularFamily,
    k_max: usize,
) -> Result<MinColorResult> {
    search_regular(nodes, params, family, k_max, true)
}

fn search_regular(
    nodes: &NodeSet,
    params: &SinrParams,
    family: RegularFamily,
    k_max: usize,
    stop_at_first: bool,
) -> Result<MinColorResult> {
    regular_coloring(nodes, family, 1)?;
    check_regular_range(nodes, family, k_max)?;
    let mut feasibility = BTreeMap::new();
    let mut k_min = None;
    for k in 1..=k_max {
        let ok = regular_feasible(nodes, params, family, k)?;
        feasibility.insert(k, ok);
        if ok && k_min.is_none() {
            k_min = Some(k);
            if stop_at_first {
                break;
            }
        }
    }
    Ok(MinColorResult {
        family: family.into(),
        k_max,
        feasibility,
        k_min,
        example: None,
    })
}

/// Smallest number of colors for which any coloring makes the SINR graph
/// strongly connected, by exhaustive search over colorings up to relabeling.
/// Limited to `n ≤ 10`.
pub fn min_colors_exhaustive(
    nodes: &NodeSet,
    params: &SinrParams,
    k_max: usize,
) -> Result<MinColorResult> {
    let n = nodes.len();
    if n > ENUMERATION_MAX_NODES {
        return Err(Error::LimitsExceeded(format!(
            "exhaustive search supports at most {ENUMERATION_MAX_NODES} nodes, got {n}"
        )));
    }
    if k_max == 0 || k_max > n {
        return Err(Error::param(
            "k_max",
            format!("must lie in 1..={n}, got {k_max}"),
        ));
    }
    let mut feasibility = BTreeMap::new();
    let mut example: Option<Coloring> = None;
    for k in 1..=k_max {
        // Colorings with fewer than k colors were already tried for smaller k.
        if example.is_none() {
            for coloring in enumerate_colorings(n, k)?.filter(|c| c.used_colors() == k) {
                if is_strongly_connected(&build_graph(nodes, &coloring, params)?) {
                    example = Some(coloring);
                    break;
                }
            }
        }
        feasibility.insert(k, example.is_some());
    }
    let k_min = example.as_ref().map(|c| c.used_colors());
    Ok(MinColorResult {
        family: Family::Exhaustive,
        k_max,
        feasibility,
        k_min,
        example,
    })
}

// ---------------------------------------------------------------------------
// Interference profile
// ---------------------------------------------------------------------------

/// Interference one color class produces at a fixed receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassInterference {
    pub color: u32,
    /// Class members other than the receiver.
    pub members: usize,
    /// Whether the receiver belongs to this class (any sender of the class
    /// then faces infinite interference).
    pub contains_receiver: bool,
    /// Power at the receiver from all members other than the receiver.
    pub total: f64,
    /// Largest interference any single sender of the class faces at the
    /// receiver: `total` minus the weakest member's contribution.
    pub max_interference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceProfile {
    pub receiver: usize,
    pub classes: Vec<ClassInterference>,
}

impl InterferenceProfile {
    pub fn class(&self, color: u32) -> Option<&ClassInterference> {
        self.classes.iter().find(|c| c.color == color)
    }
}

/// Per-color interference totals at `receiver`.
pub fn interference_profile(
    nodes: &NodeSet,
    coloring: &Coloring,
    params: &SinrParams,
    receiver: usize,
) -> Result<InterferenceProfile> {
    coloring.check_covers(nodes)?;
    nodes.check_index(receiver)?;
    let classes = coloring
        .classes()
        .into_iter()
        .enumerate()
        .filter(|(_, members)| !members.is_empty())
        .map(|(c, members)| {
            let gains: Vec<f64> = members
                .iter()
                .filter(|&&w| w != receiver)
                .map(|&w| nodes.gain(w, receiver, params))
                .collect();
            let total: f64 = gains.iter().sum();
            let weakest = gains.iter().copied().fold(f64::INFINITY, f64::min);
            let contains_receiver = members.contains(&receiver);
            let max_interference = if contains_receiver {
                f64::INFINITY
            } else if gains.is_empty() {
                0.0
            } else {
                total - weakest
            };
            ClassInterference {
                color: c as u32 + 1,
                members: gains.len(),
                contains_receiver,
                total,
                max_interference,
            }
        })
        .collect();
    Ok(InterferenceProfile { receiver, classes })
}

// ---------------------------------------------------------------------------
// Gap witness
// ---------------------------------------------------------------------------

/// Three adjacent intervals of length `ell` starting at `x`: a dense one
/// (`[x, x+ℓ]` holds at least `(4/β)k` nodes), an empty one (`[x+ℓ, x+2ℓ]`)
/// and an occupied one (`[x+2ℓ, x+3ℓ]`). Under a regular `k`-coloring such a
/// configuration leaves the SINR graph disconnected at `α = 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapWitness {
    pub x: f64,
    pub ell: f64,
    pub counts: [usize; 3],
    pub k: usize,
    pub beta: f64,
}

fn check_unit_line(nodes: &NodeSet, what: &'static str) -> Result<Vec<f64>> {
    if nodes.dimension() != Dimension::One {
        return Err(Error::WrongInstance(
            what,
            "nodes must lie on a line".into(),
        ));
    }
    let xs: Vec<f64> = (0..nodes.len()).map(|i| nodes.position(i)[0]).collect();
    if xs.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::WrongInstance(
            what,
            "nodes must lie in [0, 1]".into(),
        ));
    }
    Ok(xs)
}

const MIN_GAP_LENGTH: f64 = 1e-6;

/// Number of sorted positions in the closed interval `[lo, hi]`.
fn count_closed(xs: &[f64], lo: f64, hi: f64) -> usize {
    if hi < lo {
        return 0;
    }
    xs.partition_point(|&p| p <= hi) - xs.partition_point(|&p| p < lo)
}

impl GapWitness {
    fn interval_counts(xs: &[f64], x: f64, ell: f64) -> [usize; 3] {
        [
            count_closed(xs, x, x + ell),
            count_closed(xs, x + ell, x + 2.0 * ell),
            count_closed(xs, x + 2.0 * ell, x + 3.0 * ell),
        ]
    }

    /// Re-check every condition against `nodes`.
    pub fn holds_for(&self, nodes: &NodeSet) -> bool {
        let Ok(xs) = check_unit_line(nodes, "gap witness") else {
            return false;
        };
        let counts = Self::interval_counts(&xs, self.x, self.ell);
        counts == self.counts
            && self.ell > 0.0
            && self.ell < 1.0 / 3.0
            && self.x >= 0.0
            && self.x <= 1.0 - 3.0 * self.ell
            && counts[0] as f64 >= 4.0 * self.k as f64 / self.beta
            && counts[1] == 0
            && counts[2] >= 1
    }
}

/// [`detect_gap_condition_from`] without a lower limit on the length.
pub fn detect_gap_condition(nodes: &NodeSet, k: usize, beta: f64) -> Result<Option<GapWitness>> {
    detect_gap_condition_from(nodes, k, beta, 0.0)
}

/// Search for a [`GapWitness`] with `ℓ ≥ min_ell`.
///
/// Lengths run over a geometric grid (ratio 1.1) from `max(1e-6, min_ell)` up
/// to 1/3, plus `ℓ = (4/β)(k/n)`; they are tried longest first. For each
/// length and each gap between consecutive nodes wide enough to hold the
/// empty interval, the leftmost admissible `x` is computed directly (either a
/// node position or the point that puts the gap's right node at the end of
/// the third interval), which maximises the dense count. The search is sound
/// but not exhaustive over `ℓ`.
pub fn detect_gap_condition_from(
    nodes: &NodeSet,
    k: usize,
    beta: f64,
    min_ell: f64,
) -> Result<Option<GapWitness>> {
    let xs = check_unit_line(nodes, "gap detector")?;
    if k == 0 {
        return Err(Error::param("k", "need at least one color"));
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::param(
            "beta",
            format!("must be positive, got {beta}"),
        ));
    }
    let n = xs.len();
    let required = 4.0 * k as f64 / beta;
    let third = 1.0 / 3.0;

    let mut lengths = Vec::new();
    let mut ell = min_ell.max(MIN_GAP_LENGTH);
    while ell < third {
        lengths.push(ell);
        ell *= 1.1;
    }
    let canonical = required / n as f64;
    if canonical >= min_ell && canonical < third {
        lengths.push(canonical);
    }
    lengths.sort_by(|a, b| b.total_cmp(a));
    lengths.dedup();

    for &ell in &lengths {
        for i in 0..n.saturating_sub(1) {
            let (left, right) = (xs[i], xs[i + 1]);
            if right - left <= ell {
                continue;
            }
            let reach = (right - 3.0 * ell).max(0.0);
            let x = if reach > left - ell {
                reach
            } else {
                xs[xs.partition_point(|&p| p <= left - ell)]
            };
            if x + 2.0 * ell >= right || x > 1.0 - 3.0 * ell {
                continue;
            }
            let witness = GapWitness {
                x,
                ell,
                counts: GapWitness::interval_counts(&xs, x, ell),
                k,
                beta,
            };
            if witness.holds_for(nodes) {
                return Ok(Some(witness));
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Exponential-sequence witness
// ---------------------------------------------------------------------------

/// A run `q_1 < … < q_h` of consecutive nodes with
/// `(1−ε)2^i/n ≤ q_i − a ≤ (1+ε)2^i/n`, and no other node in `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpSeqWitness {
    pub a: f64,
    pub b: f64,
    /// Node indices of `q_1..q_h`.
    pub indices: Vec<usize>,
    pub epsilon: f64,
    pub h: usize,
    pub n: usize,
}

impl ExpSeqWitness {
    /// Re-check the definition against `nodes`.
    pub fn holds_for(&self, nodes: &NodeSet) -> bool {
        let Ok(xs) = check_unit_line(nodes, "exponential sequence") else {
            return false;
        };
        let n = xs.len();
        if self.n != n
            || self.h != self.indices.len()
            || self.h == 0
            || self.h >= usize::BITS as usize
        {
            return false;
        }
        if (n as u128) < (1u128 << self.h) || !(self.epsilon > 0.0 && self.epsilon < 1.0 / 3.0) {
            return false;
        }
        let first = self.indices[0];
        let consecutive = self.indices.windows(2).all(|w| w[1] == w[0] + 1);
        let last = *self.indices.last().unwrap();
        if !consecutive
            || last >= n
            || self.b != xs[last]
            || self.a.is_nan()
            || self.a < 0.0
            || self.b > 1.0
        {
            return false;
        }
        // Nothing else in [a, b].
        if first > 0 && xs[first - 1] >= self.a {
            return false;
        }
        self.indices.iter().enumerate().all(|(j, &q)| {
            let scale = 2f64.powi(j as i32 + 1) / n as f64;
            let offset = xs[q] - self.a;
            (1.0 - self.epsilon) * scale <= offset && offset <= (1.0 + self.epsilon) * scale
        })
    }
}

/// Feasible anchors for the run of `len` nodes starting at `start`, as the
/// interval `[lo, hi]` together with the strict lower bound `floor`
/// (the preceding node, which must stay outside `[a, b]`).
fn anchor_interval(xs: &[f64], start: usize, len: usize, epsilon: f64) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for j in 0..len {
        let scale = 2f64.powi(j as i32 + 1) / n;
        let q = xs[start + j];
        lo = lo.max(q - (1.0 + epsilon) * scale);
        hi = hi.min(q - (1.0 - epsilon) * scale);
    }
    let floor = if start > 0 {
        xs[start - 1]
    } else {
        f64::NEG_INFINITY
    };
    (lo, hi, floor)
}

fn anchor_candidates(lo: f64, hi: f64, floor: f64) -> Vec<f64> {
    if lo > hi || hi <= floor {
        return Vec::new();
    }
    let lower = lo.max(floor);
    let mut out = vec![0.5 * (lower + hi), hi];
    if lo > floor {
        out.push(lo);
    }
    out
}

/// Find the longest exponential sequence with `h ≥ h_min`.
///
/// Every node is tried as `q_1`. The set of anchors `a` compatible with the
/// first `i` nodes of the run is an interval (the intersection of the
/// per-node bands), so the run is extended greedily until that interval
/// empties, `2^i` exceeds `n`, or the anchor would swallow the preceding
/// node. Returned witnesses are re-verified.
pub fn detect_exponential_sequence(
    nodes: &NodeSet,
    epsilon: f64,
    h_min: usize,
) -> Result<Option<ExpSeqWitness>> {
    check_epsilon(epsilon)?;
    let xs = check_unit_line(nodes, "exponential-sequence detector")?;
    let n = xs.len();
    if h_min < 2 {
        return Err(Error::param(
            "h_min",
            format!("must be at least 2, got {h_min}"),
        ));
    }
    let h_cap = (usize::BITS - 1 - n.leading_zeros()) as usize; // floor(log2 n)
    if h_min > h_cap {
        return Err(Error::param(
            "h_min",
            format!("n = {n} is smaller than 2^{h_min}"),
        ));
    }

    let mut best: Option<ExpSeqWitness> = None;
    for start in 0..n {
        let mut len = 0;
        while len < h_cap && start + len < n {
            let (lo, hi, floor) = anchor_interval(&xs, start, len + 1, epsilon);
            if lo > hi || hi <= floor {
                break;
            }
            len += 1;
        }
        if len < h_min || best.as_ref().is_some_and(|b| b.h >= len) {
            continue;
        }
        // Rounding can make the chosen anchor miss a band by an ulp; fall back
        // to shorter runs if no candidate verifies.
        'lengths: for h in (h_min..=len).rev() {
            if best.as_ref().is_some_and(|b| b.h >= h) {
                break;
            }
            let (lo, hi, floor) = anchor_interval(&xs, start, h, epsilon);
            for a in anchor_candidates(lo, hi, floor) {
                let witness = ExpSeqWitness {
                    a,
                    b: xs[start + h - 1],
                    indices: (start..start + h).collect(),
                    epsilon,
                    h,
                    n,
                };
                if witness.holds_for(nodes) {
                    best = Some(witness);
                    break 'lengths;
                }
            }
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Scaling fits
// ---------------------------------------------------------------------------

/// `k ≈ prefactor · n^exponent`, fitted by least squares on `(ln n, ln k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub prefactor: f64,
    /// `k − prediction`, in the units of `k`.
    pub residuals: Vec<f64>,
    /// `ln k − ln prediction`.
    pub log_residuals: Vec<f64>,
}

/// `k ≈ intercept + coefficient · ln n`, fitted by least squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub coefficient: f64,
    pub coefficient_stderr: f64,
    pub intercept: f64,
    /// `k − prediction`.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub power_law: PowerLawFit,
    pub logarithmic: LogFit,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|r| r * r).sum::<f64>().sqrt()
}

impl PowerLawFit {
    /// Euclidean norm of [`PowerLawFit::residuals`].
    pub fn residual_norm(&self) -> f64 {
        norm(&self.residuals)
    }
}

impl LogFit {
    pub fn residual_norm(&self) -> f64 {
        norm(&self.residuals)
    }
}

impl ScalingFit {
    /// Both models are compared in the units of `k`.
    pub fn prefers_logarithmic(&self) -> bool {
        self.logarithmic.residual_norm() < self.power_law.residual_norm()
    }
}

struct Ols {
    intercept: f64,
    slope: f64,
    slope_stderr: f64,
}

fn ols(x: &[f64], y: &[f64]) -> Ols {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_stderr = if x.len() > 2 {
        (rss / (m - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ols {
        intercept,
        slope,
        slope_stderr,
    }
}

/// Fit `(n, k)` data with a power law and with a logarithmic model.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points
        .iter()
        .any(|&(n, k)| !(n > 0.0 && k > 0.0 && n.is_finite() && k.is_finite()))
    {
        return Err(Error::param(
            "points",
            "n and k must be positive and finite",
        ));
    }
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::param(
            "points",
            "need at least three distinct n values",
        ));
    }
    let ln_n: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ks: Vec<f64> = points.iter().map(|p| p.1).collect();
    let ln_k: Vec<f64> = ks.iter().map(|k| k.ln()).collect();

    let pl = ols(&ln_n, &ln_k);
    let predicted: Vec<f64> = ln_n.iter().map(|x| pl.intercept + pl.slope * x).collect();
    let power_law = PowerLawFit {
        exponent: pl.slope,
        exponent_stderr: pl.slope_stderr,
        prefactor: pl.intercept.exp(),
        residuals: ks
            .iter()
            .zip(&predicted)
            .map(|(k, p)| k - p.exp())
            .collect(),
        log_residuals: ln_k.iter().zip(&predicted).map(|(k, p)| k - p).collect(),
    };

    let lg = ols(&ln_n, &ks);
    let logarithmic = LogFit {
        coefficient: lg.slope,
        coefficient_stderr: lg.slope_stderr,
        intercept: lg.intercept,
        residuals: ks
            .iter()
            .zip(&ln_n)
            .map(|(k, x)| k - (lg.intercept + lg.slope * x))
            .collect(),
    };
    Ok(ScalingFit {
        power_law,
        logarithmic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{grid_1d, grid_2d, regular_coloring_2d};

    fn params(alpha: f64, beta: f64) -> SinrParams {
        SinrParams::new(alpha, beta).unwrap()
    }

    #[test]
    fn zeta_against_known_values() {
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        let z2 = zeta_upper(2.0).unwrap();
        assert!(z2 >= pi2_6 && z2 - pi2_6 < 1e-9, "{z2}");
        assert!((zeta_partial(2.0, 1000).unwrap() - pi2_6).abs() < 1e-6);

        // Apéry's constant and ζ(1.1).
        let z3 = zeta_upper(3.0).unwrap();
        assert!(z3 >= 1.202_056_903_159_594_2 && z3 - 1.202_056_903_159_594_2 < 1e-9);
        let z11 = zeta_upper(1.1).unwrap();
        assert!(
            z11 >= 10.584_448_464_950_81 && z11 - 10.584_448_464_950_81 < 1e-9,
            "{z11}"
        );

        let z20 = zeta_upper(20.0).unwrap();
        assert!((z20 - (1.0 + 2f64.powi(-20))).abs() < 1e-8);

        assert!(zeta_partial(1.0, 10).is_err());
        assert!(zeta_upper(0.5).is_err());
        assert!(zeta_partial(2.0, 0).is_err());
    }

    #[test]
    fn zeta_partial_is_an_upper_bound_for_any_term_count() {
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        for terms in [1, 2, 5, 17, 100] {
            assert!(zeta_partial(2.0, terms).unwrap() >= pi2_6);
        }
    }

    #[test]
    fn sufficient_k_examples() {
        assert_eq!(sufficient_k_1d(&params(2.0, 1.0)).unwrap(), 3);
        assert_eq!(sufficient_k_1d(&params(3.0, 1.0)).unwrap(), 3);
        assert!(sufficient_k_1d(&params(1.0, 1.0)).is_err());
        // Grows like β^{1/α}.
        let big = sufficient_k_1d(&params(2.0, 400.0)).unwrap();
        assert_eq!(
            big,
            (1.0 + (800.0 * std::f64::consts::PI.powi(2) / 6.0).sqrt()).ceil() as usize
        );

        assert_eq!(sufficient_k_2d(&params(4.0, 1.0)).unwrap(), 3);
        assert_eq!(sufficient_k_2d(&params(3.0, 1.0)).unwrap(), 3);
        assert!(sufficient_k_2d(&params(2.0, 1.0)).is_err());
    }

    #[test]
    fn gamma_examples() {
        let p = params(2.0, 1.0);
        assert!((gamma_threshold(&p, 1e-12).unwrap() - 0.2).abs() < 1e-9);
        let g = gamma_threshold(&p, 0.1).unwrap();
        let spread: f64 = 1.0 + 1.1 / 0.7;
        assert!((g - 1.0 / (1.0 + spread * spread)).abs() < 1e-15);
        assert!((g - 0.1314).abs() < 1e-4);
        let stated = gamma_threshold_variant(&p, 0.1, GammaVariant::Stated).unwrap();
        assert!(stated > g);
        for eps in [0.0, 1.0 / 3.0, -0.1, 0.5] {
            assert!(gamma_threshold(&p, eps).is_err());
        }
    }

    #[test]
    fn gamma_is_decreasing_in_epsilon_and_alpha() {
        for beta in [1.0, 2.0, 10.0] {
            for i in 1..60 {
                let (e1, e2) = (i as f64 / 200.0, (i + 1) as f64 / 200.0);
                for alpha in [1.0, 2.0, 3.5] {
                    let p = params(alpha, beta);
                    let (g1, g2) = (
                        gamma_threshold(&p, e1).unwrap(),
                        gamma_threshold(&p, e2).unwrap(),
                    );
                    assert!(g2 < g1);
                    assert!(g1 > 0.0 && g1 < 1.0);
                    let q = params(alpha + 0.25, beta);
                    assert!(gamma_threshold(&q, e1).unwrap() < g1);
                }
            }
        }
    }

    #[test]
    fn min_k_regular_small_grid() {
        let p = params(2.0, 1.0);
        let r = min_k_regular(&grid_1d(3).unwrap(), &p, RegularFamily::Regular1d, 3).unwrap();
        assert_eq!(r.k_min, Some(2));
        assert!(!r.feasibility[&1]);
        assert_eq!(r.feasibility.len(), 3);

        for n in 2..12 {
            assert!(
                !regular_feasible(&grid_1d(n).unwrap(), &p, RegularFamily::Regular1d, 1).unwrap()
            );
        }

        let r = first_feasible_k_regular(&grid_1d(64).unwrap(), &p, RegularFamily::Regular1d, 10)
            .unwrap();
        assert_eq!(r.k_min, Some(3));
        assert_eq!(r.feasibility.len(), 3);

        assert!(min_k_regular(&grid_1d(3).unwrap(), &p, RegularFamily::Regular1d, 4).is_err());
        assert!(min_k_regular(&grid_1d(4).unwrap(), &p, RegularFamily::Regular2d, 1).is_err());
        let g = grid_2d(16).unwrap();
        assert!(min_k_regular(&g, &p, RegularFamily::Regular2d, 5).is_err());
        assert!(min_k_regular(&g, &p, RegularFamily::Regular1d, 2).is_err());
    }

    #[test]
    fn min_k_regular_reports_none_found() {
        let r = min_k_regular(
            &grid_1d(40).unwrap(),
            &params(2.0, 1.0),
            RegularFamily::Regular1d,
            2,
        )
        .unwrap();
        assert_eq!(r.k_min, None);
        assert_eq!(r.min_colors(), None);
    }

    #[test]
    fn exhaustive_examples() {
        let pair = NodeSet::line(vec![0.1, 0.4]).unwrap();
        for (a, b) in [(1.0, 1.0), (2.0, 5.0)] {
            let r = min_colors_exhaustive(&pair, &params(a, b), 2).unwrap();
            assert_eq!(r.k_min, Some(2));
            assert_eq!(r.example.unwrap().colors(), &[1, 2]);
        }
        let r = min_colors_exhaustive(&grid_1d(3).unwrap(), &params(2.0, 1.0), 3).unwrap();
        assert_eq!(r.k_min, Some(2));
        assert_eq!(
            r.feasibility.values().copied().collect::<Vec<_>>(),
            vec![false, true, true]
        );
        assert!(min_colors_exhaustive(&grid_1d(11).unwrap(), &params(2.0, 1.0), 2).is_err());
        assert!(min_colors_exhaustive(&grid_1d(3).unwrap(), &params(2.0, 1.0), 4).is_err());
    }

    #[test]
    fn profile_single_member_class() {
        let nodes = NodeSet::line(vec![0.0, 0.25, 1.0]).unwrap();
        let c = Coloring::explicit(2, vec![1, 1, 2]).unwrap();
        let p = params(3.0, 1.0);
        let prof = interference_profile(&nodes, &c, &p, 1).unwrap();
        let other = prof.class(2).unwrap();
        assert_eq!(other.total, 0.75f64.powi(-3));
        assert_eq!(other.max_interference, 0.0);
        assert_eq!(other.members, 1);
        let own = prof.class(1).unwrap();
        assert!(own.contains_receiver);
        assert_eq!(own.max_interference, f64::INFINITY);
        assert_eq!(own.total, 0.25f64.powi(-3));
    }

    #[test]
    fn grid_profile_within_partial_sum_envelopes() {
        let p = params(2.0, 1.0);
        for side in [8usize, 16, 32, 64, 128] {
            let nodes = grid_2d(side * side).unwrap();
            for k in 2..=6usize {
                let coloring = regular_coloring_2d(side, k).unwrap();
                let prof = interference_profile(&nodes, &coloring, &p, 1).unwrap();
                // Class of (0,0), without the sender's own unit contribution.
                let i = prof.class(coloring.color(0)).unwrap().total - 1.0;
                let kf = k as f64;
                // Ring r around the origin holds 2r+1 same-color nodes, all at
                // distance between kr-1 and sqrt(2)kr from (0,1).
                let upper: f64 = (1..=side)
                    .map(|r| (2 * r + 1) as f64 / (kf * r as f64 - 1.0).powi(2))
                    .sum();
                let rings = (side - 1) / k;
                let lower: f64 = (1..=rings)
                    .map(|r| (2 * r + 1) as f64 / (2.0 * (kf * r as f64).powi(2)))
                    .sum();
                assert!(
                    lower <= i && i <= upper,
                    "side {side} k {k}: {lower} <= {i} <= {upper}"
                );
            }
        }
    }

    #[test]
    fn doubling_spacing_quarters_the_profile() {
        let side = 1024;
        let nodes = grid_2d(side * side).unwrap();
        let p = params(2.0, 1.0);
        let at = |k: usize| {
            let c = regular_coloring_2d(side, k).unwrap();
            interference_profile(&nodes, &c, &p, 1)
                .unwrap()
                .class(c.color(0))
                .unwrap()
                .total
                - 1.0
        };
        let ratio = at(4) / at(8);
        assert!((ratio / 4.0 - 1.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn gap_examples() {
        let nodes = NodeSet::line(vec![0.05, 0.25]).unwrap();
        let w = detect_gap_condition(&nodes, 1, 4.0)
            .unwrap()
            .expect("witness");
        assert!(w.holds_for(&nodes));
        assert_eq!(w.counts, [1, 0, 1]);

        // The constructed witness from the example is valid as well.
        let manual = GapWitness {
            x: 0.0,
            ell: 0.1,
            counts: [1, 0, 1],
            k: 1,
            beta: 4.0,
        };
        assert!(manual.holds_for(&nodes));

        let even = NodeSet::line((0..100).map(|i| i as f64 / 99.0).collect()).unwrap();
        assert_eq!(
            detect_gap_condition_from(&even, 1, 4.0, 0.02).unwrap(),
            None
        );

        let plane = grid_2d(4).unwrap();
        assert!(detect_gap_condition(&plane, 1, 1.0).is_err());
        assert!(detect_gap_condition(&grid_1d(3).unwrap(), 1, 1.0).is_err());
    }

    #[test]
    fn gap_detector_respects_dense_count() {
        // Two nodes left of a wide gap, one right of it.
        let nodes = NodeSet::line(vec![0.10, 0.11, 0.60]).unwrap();
        let w = detect_gap_condition(&nodes, 1, 2.0)
            .unwrap()
            .expect("witness");
        assert!(w.counts[0] >= 2 && w.holds_for(&nodes));
        // Needs 8 nodes for k = 2, β = 1: impossible with three.
        assert_eq!(detect_gap_condition(&nodes, 2, 1.0).unwrap(), None);
    }

    #[test]
    fn exp_sequence_examples() {
        let mut xs = vec![0.125, 0.25, 0.5];
        xs.extend((0..13).map(|i| 0.55 + 0.01 * i as f64));
        let nodes = NodeSet::line(xs).unwrap();
        let w = detect_exponential_sequence(&nodes, 0.25, 2)
            .unwrap()
            .expect("witness");
        assert_eq!(w.h, 3);
        assert_eq!(w.indices, vec![0, 1, 2]);
        assert!((0.0..=0.03125).contains(&w.a));
        assert!(w.holds_for(&nodes));

        let at_zero = ExpSeqWitness {
            a: 0.0,
            b: 0.5,
            indices: vec![0, 1, 2],
            epsilon: 0.25,
            h: 3,
            n: 16,
        };
        assert!(at_zero.holds_for(&nodes));

        assert!(detect_exponential_sequence(&nodes, 0.4, 2).is_err());
        assert!(detect_exponential_sequence(&nodes, 0.1, 1).is_err());
        assert!(detect_exponential_sequence(&nodes, 0.1, 5).is_err());
    }

    #[test]
    fn evenly_spaced_nodes_have_no_long_sequence() {
        for n in 8..=64usize {
            let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let nodes = NodeSet::line(xs.clone()).unwrap();
            for eps in [0.01, 0.05, 0.1] {
                // Brute force over every anchor node run: three consecutive nodes
                // need gaps growing by a factor 2(1-3e)/(1+3e) > 1.
                let spacing_ok = |i: usize| {
                    let scale = 2f64.powi(i as i32 + 1) / n as f64;
                    move |d: f64| (1.0 - 3.0 * eps) * scale <= d && d <= (1.0 + 3.0 * eps) * scale
                };
                let brute = (0..n - 2).any(|s| {
                    spacing_ok(0)(xs[s + 1] - xs[s]) && spacing_ok(1)(xs[s + 2] - xs[s + 1])
                });
                assert!(!brute);
                assert_eq!(
                    detect_exponential_sequence(&nodes, eps, 3).unwrap(),
                    None,
                    "n {n} eps {eps}"
                );
            }
        }
    }

    #[test]
    fn exp_sequence_excludes_foreign_nodes_in_range() {
        // A node between a and q_1 breaks the sequence for that anchor.
        let mut xs = vec![0.05, 0.125, 0.25, 0.5];
        xs.extend((0..12).map(|i| 0.55 + 0.01 * i as f64));
        let nodes = NodeSet::line(xs).unwrap();
        if let Some(w) = detect_exponential_sequence(&nodes, 0.05, 3).unwrap() {
            assert!(w.holds_for(&nodes));
            assert!(w.a > 0.05);
        }
    }

    #[test]
    fn fit_examples() {
        let cube: Vec<(f64, f64)> = [64.0f64, 512.0, 4096.0]
            .iter()
            .map(|&n| (n, n.cbrt()))
            .collect();
        let f = fit_scaling(&cube).unwrap();
        assert!((f.power_law.exponent - 1.0 / 3.0).abs() < 1e-9);
        assert!(f.power_law.residual_norm() < 1e-9);

        let logs: Vec<(f64, f64)> = [16.0f64, 64.0, 256.0, 1024.0, 4096.0]
            .iter()
            .map(|&n| (n, 2.0 * n.ln()))
            .collect();
        let f = fit_scaling(&logs).unwrap();
        assert!((f.logarithmic.coefficient - 2.0).abs() < 1e-9);
        assert!(f.logarithmic.intercept.abs() < 1e-9);
        assert!(f.power_law.residual_norm() > 100.0 * f.logarithmic.residual_norm().max(1e-12));
        assert!(f.prefers_logarithmic());

        let flat: Vec<(f64, f64)> = [10.0, 100.0, 1000.0].iter().map(|&n| (n, 5.0)).collect();
        assert!(fit_scaling(&flat).unwrap().power_law.exponent.abs() < 1e-12);

        assert!(fit_scaling(&[(8.0, 1.0), (8.0, 2.0), (8.0, 3.0)]).is_err());
        assert!(fit_scaling(&[(8.0, 1.0), (16.0, 2.0)]).is_err());
        assert!(fit_scaling(&[(8.0, 0.0), (16.0, 2.0), (32.0, 3.0)]).is_err());
    }
}
