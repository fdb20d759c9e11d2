//! Domain types shared by every other module: node sets, SINR parameters and
//! colorings, plus the Euclidean metric and input validation.
//!
//! Node indices in the Rust API are 0-based. The 1-based convention (`p_1 ..
//! p_n`) only shows up where it matters: the round-robin coloring formula and
//! the JSON graph format.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the reception threshold: a link whose ratio is at
/// least `β·(1 − TIE_TOLERANCE)` is decoded.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dimension {
    One,
    Two,
}

impl Dimension {
    pub fn arity(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Two => 2,
        }
    }
}

impl TryFrom<u8> for Dimension {
    type Error = String;

    fn try_from(d: u8) -> std::result::Result<Self, String> {
        match d {
            1 => Ok(Dimension::One),
            2 => Ok(Dimension::Two),
            other => Err(format!("dimension must be 1 or 2, got {other}")),
        }
    }
}

impl From<Dimension> for u8 {
    fn from(d: Dimension) -> u8 {
        d.arity() as u8
    }
}

/// How a node set was laid out. Grid layouts enable the regular colorings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Scattered,
    /// `p_i = i` for `i = 1..n`.
    Grid1d,
    /// `side × side` unit lattice anchored at (0,0), stored x-major.
    Grid2d {
        side: usize,
    },
}

/// A problem found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    WrongArity {
        index: usize,
        expected: usize,
        found: usize,
    },
    NonFinite {
        index: usize,
    },
    Duplicate {
        first: usize,
        second: usize,
    },
    Unsorted {
        index: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "no nodes"),
            Violation::WrongArity {
                index,
                expected,
                found,
            } => write!(
                f,
                "position {index} has {found} coordinates, expected {expected}"
            ),
            Violation::NonFinite { index } => write!(f, "position {index} is not finite"),
            Violation::Duplicate { first, second } => {
                write!(f, "positions {first} and {second} coincide")
            }
            Violation::Unsorted { index } => {
                write!(f, "1D position {index} is smaller than its predecessor")
            }
        }
    }
}

/// Serialized form of a node set: `{"dimension": d, "positions": [[x],[x,y],…]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSetData {
    pub dimension: Dimension,
    pub positions: Vec<Vec<f64>>,
}

/// Check raw positions for the node-set invariants: finite coordinates of the
/// right arity, pairwise distinct points, and ascending order in 1D.
pub fn validate(data: &NodeSetData) -> std::result::Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    if data.positions.is_empty() {
        violations.push(Violation::Empty);
    }
    let arity = data.dimension.arity();
    for (index, p) in data.positions.iter().enumerate() {
        if p.len() != arity {
            violations.push(Violation::WrongArity {
                index,
                expected: arity,
                found: p.len(),
            });
        } else if p.iter().any(|c| !c.is_finite()) {
            violations.push(Violation::NonFinite { index });
        }
    }
    if !violations.is_empty() {
        return Err(violations);
    }

    if data.dimension == Dimension::One {
        for i in 1..data.positions.len() {
            if data.positions[i][0] < data.positions[i - 1][0] {
                violations.push(Violation::Unsorted { index: i });
            }
        }
    }

    let mut order: Vec<usize> = (0..data.positions.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&data.positions[a], &data.positions[b]).then(a.cmp(&b)));
    for w in order.windows(2) {
        if data.positions[w[0]] == data.positions[w[1]] {
            violations.push(Violation::Duplicate {
                first: w[0],
                second: w[1],
            });
        }
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Positions of `n` pairwise distinct nodes on the line or in the plane.
///
/// Immutable once built. 1D node sets are always sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NodeSetData", into = "NodeSetData")]
pub struct NodeSet {
    dimension: Dimension,
    // 1D sets keep y = 0.
    coords: Vec<[f64; 2]>,
    #[serde(skip)]
    layout: Layout,
}

impl NodeSet {
    /// Nodes on the line. Positions must be finite, distinct and ascending.
    pub fn line(positions: Vec<f64>) -> Result<Self> {
        let data = NodeSetData {
            dimension: Dimension::One,
            positions: positions.iter().map(|&x| vec![x]).collect(),
        };
        Self::try_from(data)
    }

    /// Nodes in the plane. Points must be finite and distinct; order is kept.
    pub fn plane(points: Vec<[f64; 2]>) -> Result<Self> {
        let data = NodeSetData {
            dimension: Dimension::Two,
            positions: points.iter().map(|p| p.to_vec()).collect(),
        };
        Self::try_from(data)
    }

    pub(crate) fn with_layout(mut self, layout: Layout) -> Self {
        self.layout = layout;
        self
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Side length of a 2D grid instance.
    pub fn grid_side(&self) -> Option<usize> {
        match self.layout {
            Layout::Grid2d { side } => Some(side),
            _ => None,
        }
    }

    /// Coordinates of node `i` (one entry in 1D, two in 2D).
    pub fn position(&self, i: usize) -> &[f64] {
        &self.coords[i][..self.dimension.arity()]
    }

    /// Index of the node at exactly `point`, if any.
    pub fn find(&self, point: &[f64]) -> Option<usize> {
        (0..self.len()).find(|&i| self.position(i) == point)
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                n: self.len(),
            })
        }
    }

    /// Euclidean distance between nodes `u` and `v`.
    pub fn distance(&self, u: usize, v: usize) -> Result<f64> {
        self.check_index(u)?;
        self.check_index(v)?;
        let (a, b) = (self.coords[u], self.coords[v]);
        Ok(match self.dimension {
            Dimension::One => (a[0] - b[0]).abs(),
            Dimension::Two => (a[0] - b[0]).hypot(a[1] - b[1]),
        })
    }

    /// Received power at `v` from a unit-power transmission by `u`:
    /// `1 / d(u,v)^α`, infinite when `u == v`. Indices are not checked.
    pub(crate) fn gain(&self, u: usize, v: usize, params: &SinrParams) -> f64 {
        let (a, b) = (self.coords[u], self.coords[v]);
        match self.dimension {
            Dimension::One => params.decay((a[0] - b[0]).abs()),
            Dimension::Two => {
                let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
                params.decay_squared(dx * dx + dy * dy)
            }
        }
    }

    pub fn to_data(&self) -> NodeSetData {
        NodeSetData {
            dimension: self.dimension,
            positions: (0..self.len()).map(|i| self.position(i).to_vec()).collect(),
        }
    }

    fn detect_layout(&self) -> Layout {
        let n = self.len();
        match self.dimension {
            Dimension::One => {
                if self
                    .coords
                    .iter()
                    .enumerate()
                    .all(|(i, p)| p[0] == (i + 1) as f64)
                {
                    Layout::Grid1d
                } else {
                    Layout::Scattered
                }
            }
            Dimension::Two => {
                let side = (n as f64).sqrt().round() as usize;
                let is_grid = side * side == n
                    && self
                        .coords
                        .iter()
                        .enumerate()
                        .all(|(i, p)| p[0] == (i / side) as f64 && p[1] == (i % side) as f64);
                if is_grid {
                    Layout::Grid2d { side }
                } else {
                    Layout::Scattered
                }
            }
        }
    }
}

impl TryFrom<NodeSetData> for NodeSet {
    type Error = Error;

    fn try_from(data: NodeSetData) -> Result<Self> {
        validate(&data).map_err(Error::InvalidNodes)?;
        let coords = data
            .positions
            .iter()
            .map(|p| [p[0], p.get(1).copied().unwrap_or(0.0)])
            .collect();
        let mut nodes = NodeSet {
            dimension: data.dimension,
            coords,
            layout: Layout::Scattered,
        };
        nodes.layout = nodes.detect_layout();
        Ok(nodes)
    }
}

impl From<NodeSet> for NodeSetData {
    fn from(nodes: NodeSet) -> Self {
        nodes.to_data()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Exponent {
    Integer(i32),
    Real(f64),
}

/// Path-loss exponent `α` and reception threshold `β`. Noise is fixed at 0 and
/// every node transmits with power 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct SinrParams {
    alpha: f64,
    beta: f64,
    exponent: Exponent,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawParams> for SinrParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        SinrParams::new(raw.alpha, raw.beta)
    }
}

impl From<SinrParams> for RawParams {
    fn from(p: SinrParams) -> Self {
        RawParams {
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

impl SinrParams {
    pub const NOISE: f64 = 0.0;
    pub const POWER: f64 = 1.0;

    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 1.0) {
            return Err(Error::param(
                "alpha",
                format!("must be a finite value >= 1, got {alpha}"),
            ));
        }
        if !(beta.is_finite() && beta >= 1.0) {
            return Err(Error::param(
                "beta",
                format!("must be a finite value >= 1, got {beta}"),
            ));
        }
        let exponent = if alpha.fract() == 0.0 && alpha <= 64.0 {
            Exponent::Integer(alpha as i32)
        } else {
            Exponent::Real(alpha)
        };
        Ok(SinrParams {
            alpha,
            beta,
            exponent,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `1 / d^α`.
    pub fn decay(&self, d: f64) -> f64 {
        match self.exponent {
            Exponent::Integer(a) => 1.0 / d.powi(a),
            Exponent::Real(a) => 1.0 / (a * d.ln()).exp(),
        }
    }

    /// `1 / d^α` given the squared distance, avoiding the square root for
    /// even integer exponents.
    pub fn decay_squared(&self, d2: f64) -> f64 {
        match self.exponent {
            Exponent::Integer(a) if a % 2 == 0 => 1.0 / d2.powi(a / 2),
            Exponent::Integer(a) => 1.0 / d2.sqrt().powi(a),
            Exponent::Real(a) => 1.0 / (0.5 * a * d2.ln()).exp(),
        }
    }

    /// Reception rule shared by every edge test.
    pub fn decodes(&self, signal: f64, interference: f64) -> bool {
        interference == 0.0 || signal / interference >= self.beta * (1.0 - TIE_TOLERANCE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColoringKind {
    Regular1d,
    Regular2d,
    Explicit,
}

/// Serialized form of a coloring: `{"k": k, "colors": [c_1, …, c_n]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringData {
    pub k: usize,
    pub colors: Vec<u32>,
}

/// Assignment of every node to one of `k` colors, numbered `1..=k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ColoringData", into = "ColoringData")]
pub struct Coloring {
    k: usize,
    colors: Vec<u32>,
    #[serde(skip)]
    kind: ColoringKind,
}

impl Coloring {
    /// An arbitrary coloring; every entry must lie in `1..=k`.
    pub fn explicit(k: usize, colors: Vec<u32>) -> Result<Self> {
        Self::with_kind(k, colors, ColoringKind::Explicit)
    }

    pub(crate) fn with_kind(k: usize, colors: Vec<u32>, kind: ColoringKind) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidColoring("k must be at least 1".into()));
        }
        if let Some((i, c)) = colors
            .iter()
            .enumerate()
            .find(|(_, &c)| c == 0 || c as usize > k)
        {
            return Err(Error::InvalidColoring(format!(
                "node {i} has color {c}, outside 1..={k}"
            )));
        }
        Ok(Coloring { k, colors, kind })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> ColoringKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// Color of node `i`, in `1..=k`.
    pub fn color(&self, i: usize) -> u32 {
        self.colors[i]
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    /// Node indices of every color class in ascending order; entry `c - 1`
    /// holds the class of color `c`.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut classes = vec![Vec::new(); self.k];
        for (i, &c) in self.colors.iter().enumerate() {
            classes[c as usize - 1].push(i);
        }
        classes
    }

    /// Number of colors actually used.
    pub fn used_colors(&self) -> usize {
        self.classes().iter().filter(|c| !c.is_empty()).count()
    }

    pub(crate) fn check_covers(&self, nodes: &NodeSet) -> Result<()> {
        if self.len() != nodes.len() {
            return Err(Error::SizeMismatch {
                coloring: self.len(),
                nodes: nodes.len(),
            });
        }
        Ok(())
    }
}

impl TryFrom<ColoringData> for Coloring {
    type Error = Error;

    fn try_from(data: ColoringData) -> Result<Self> {
        Coloring::explicit(data.k, data.colors)
    }
}

impl From<Coloring> for ColoringData {
    fn from(c: Coloring) -> Self {
        ColoringData {
            k: c.k,
            colors: c.colors,
        }
    }
}
