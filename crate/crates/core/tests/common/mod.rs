//! Helpers shared by the integration tests: an exact-arithmetic evaluation of
//! the decoding rule and instance generators.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sinr_connectivity::{Coloring, NodeSet};

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}

/// Squared distance, exactly.
fn exact_dist2(nodes: &NodeSet, u: usize, v: usize) -> BigRational {
    nodes
        .position(u)
        .iter()
        .zip(nodes.position(v))
        .map(|(&a, &b)| {
            let d = exact(a) - exact(b);
            &d * &d
        })
        .fold(BigRational::zero(), |acc, t| acc + t)
}

/// `d(u,v)^α` for `α ∈ {2, 3}`; `α = 3` requires 1D nodes so that the
/// distance itself is rational.
fn exact_power(nodes: &NodeSet, u: usize, v: usize, alpha: u32) -> BigRational {
    match alpha {
        2 => exact_dist2(nodes, u, v),
        3 => {
            assert_eq!(
                nodes.position(u).len(),
                1,
                "alpha = 3 needs rational distances"
            );
            let d = (exact(nodes.position(u)[0]) - exact(nodes.position(v)[0])).abs();
            &d * &d * &d
        }
        _ => panic!("unsupported exponent {alpha}"),
    }
}

/// The edge rule in exact arithmetic, with the same relative tie tolerance
/// (1e-9, as an exact rational) the floating-point code applies.
pub fn exact_edge(
    nodes: &NodeSet,
    coloring: &Coloring,
    alpha: u32,
    beta: f64,
    u: usize,
    v: usize,
) -> bool {
    if coloring.color(u) == coloring.color(v) {
        return false;
    }
    let signal = BigRational::one() / exact_power(nodes, u, v, alpha);
    let mut interference = BigRational::zero();
    for w in 0..nodes.len() {
        if w != u && w != v && coloring.color(w) == coloring.color(u) {
            interference += BigRational::one() / exact_power(nodes, w, v, alpha);
        }
    }
    if interference.is_zero() {
        return true;
    }
    let tolerance = BigRational::new(BigInt::from(1), BigInt::from(1_000_000_000u64));
    let threshold = exact(beta) * (BigRational::one() - tolerance);
    signal >= threshold * interference
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Distinct points: either on a coarse integer lattice (which produces exact
/// ties) or continuous in [0,1].
pub fn random_nodes(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> NodeSet {
    if rng.gen_bool(0.5) {
        let span = 2 * n + 4;
        let cells = if dim == 1 { span } else { span * span };
        let mut picks = rand::seq::index::sample(rng, cells, n).into_vec();
        if dim == 1 {
            picks.sort_unstable();
            return NodeSet::line(picks.into_iter().map(|p| p as f64).collect()).unwrap();
        }
        return NodeSet::plane(
            picks
                .into_iter()
                .map(|p| [(p / span) as f64, (p % span) as f64])
                .collect(),
        )
        .unwrap();
    }
    loop {
        if dim == 1 {
            let mut xs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            if xs.len() == n {
                return NodeSet::line(xs).unwrap();
            }
        } else if let Ok(nodes) = NodeSet::plane(
            (0..n)
                .map(|_| [rng.gen::<f64>(), rng.gen::<f64>()])
                .collect(),
        ) {
            return nodes;
        }
    }
}

pub fn random_coloring(rng: &mut ChaCha8Rng, n: usize) -> Coloring {
    let k = rng.gen_range(1..=n);
    Coloring::explicit(k, (0..n).map(|_| rng.gen_range(1..=k as u32)).collect()).unwrap()
}
