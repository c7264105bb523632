use crate::channel::SymmetricChannel;
use crate::error::{Error, Result};
use crate::index_set::IndexSet;

use super::decoder::{hard_decision, ScState};
use super::frozen::FrozenPattern;

/// Per-step metric increment used when a path takes a zero-probability bit.
const IMPOSSIBLE_STEP: f64 = 1e9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultipathConfig {
    /// Maximum number of surviving paths `M`.
    pub max_paths: usize,
    /// A path is discarded once its implied channel log-loss exceeds the
    /// expected log-loss by this many standard deviations.
    pub sigma: f64,
}

impl MultipathConfig {
    pub fn new(max_paths: usize) -> Self {
        Self {
            max_paths,
            sigma: 6.0,
        }
    }
}

impl Default for MultipathConfig {
    fn default() -> Self {
        Self::new(4)
    }
}

/// A complete or partial decision path.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodePath {
    pub decisions: Vec<u8>,
    /// `-ln P(v_1..v_i | y)` under a uniform input, in nats.
    pub metric: f64,
}

struct Candidate {
    state: ScState,
    metric: f64,
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn step_cost(llr: f64, bit: u8) -> f64 {
    let signed = if bit == 0 { -llr } else { llr };
    let cost = softplus(signed);
    if cost.is_finite() {
        cost
    } else {
        IMPOSSIBLE_STEP
    }
}

/// Discard level for the path metric.
///
/// Summed over all `n` bits the metric equals
/// `-ln W^n(y|x) + n ln 2 + ln P(y)`; a path is dropped once its metric implies
/// a channel log-loss above `n h + sigma sqrt(n) s`, where `h` and `s` are the
/// mean and standard deviation of `-ln W(Z|X)`.
fn prune_threshold(y: &[usize], ch: &SymmetricChannel, sigma: f64) -> f64 {
    let n = y.len() as f64;
    let ln_joint: f64 = y
        .iter()
        .map(|&z| (ch.transition(0, z) + ch.transition(1, z)).ln())
        .sum();
    let (h, s) = ch.log_loss_moments();
    ln_joint + n * h + sigma * n.sqrt() * s
}

/// Successive cancellation that follows both values of every bit in
/// `branch_set`, keeps at most `max_paths` paths, and returns the survivors
/// sorted by increasing metric.
pub fn multipath_decode_paths(
    y: &[usize],
    main: &SymmetricChannel,
    pattern: &FrozenPattern,
    branch_set: &IndexSet,
    config: MultipathConfig,
) -> Result<Vec<DecodePath>> {
    let n = y.len();
    if n != pattern.n() {
        return Err(Error::DimensionMismatch {
            context: "received word versus frozen pattern",
            expected: pattern.n(),
            actual: n,
        });
    }
    if config.max_paths == 0 {
        return Err(Error::InvalidParameter("max_paths must be at least 1".into()));
    }
    if !branch_set.is_disjoint(pattern.frozen_set()) || branch_set.max().is_some_and(|i| i >= n) {
        return Err(Error::InvalidParameter(
            "branch set must be a subset of the free positions".into(),
        ));
    }

    let threshold = prune_threshold(y, main, config.sigma);
    let mut paths = vec![Candidate {
        state: ScState::new(y, main)?,
        metric: 0.0,
    }];

    for i in 0..n {
        let branching = branch_set.contains(i);
        let mut next = Vec::with_capacity(if branching { 2 * paths.len() } else { paths.len() });
        for mut path in paths {
            let llr = path.state.leaf_llr();
            if branching {
                let mut other = path.state.clone();
                other.commit(1, llr);
                next.push(Candidate {
                    metric: path.metric + step_cost(llr, 1),
                    state: other,
                });
                path.state.commit(0, llr);
                path.metric += step_cost(llr, 0);
                // Keep the 0-branch ahead of the 1-branch on equal metrics.
                let at = next.len() - 1;
                next.insert(at, path);
            } else {
                let bit = pattern
                    .value(i)
                    .or_else(|| hard_decision(llr, path.state.is_dead()))
                    .unwrap_or(0);
                path.state.commit(bit, llr);
                path.metric += step_cost(llr, bit);
                next.push(path);
            }
        }
        next.sort_by(|a, b| a.metric.total_cmp(&b.metric));
        next.truncate(config.max_paths);
        // The best path always survives.
        let keep = 1 + next[1..].iter().take_while(|c| c.metric <= threshold).count();
        next.truncate(keep);
        paths = next;
    }

    Ok(paths
        .into_iter()
        .map(|c| DecodePath {
            metric: c.metric,
            decisions: c.state.into_decisions(),
        })
        .collect())
}

/// Decision vector of the best surviving path.
pub fn multipath_decode(
    y: &[usize],
    main: &SymmetricChannel,
    pattern: &FrozenPattern,
    branch_set: &IndexSet,
    config: MultipathConfig,
) -> Result<Vec<u8>> {
    let mut paths = multipath_decode_paths(y, main, pattern, branch_set, config)?;
    Ok(paths.swap_remove(0).decisions)
}
