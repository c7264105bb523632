use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_set::IndexSet;

use super::quality::BitChannelQuality;

/// `log2` of the good-channel threshold `2^{-n^beta} / n`.
pub fn good_threshold_log2(n: usize, beta: f64) -> f64 {
    -(n as f64).powf(beta) - (n as f64).log2()
}

/// True when `z < 2^{-n^beta} / n`, compared in the log domain.
pub fn is_below_good_threshold(z: f64, n: usize, beta: f64) -> bool {
    z.log2() < good_threshold_log2(n, beta)
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "beta must satisfy 0 < beta < 1/2, got {beta}"
        )))
    }
}

/// Indices certified good: `z_upper < 2^{-n^beta} / n`.
pub fn good_set(q: &BitChannelQuality, beta: f64) -> IndexSet {
    let n = q.n();
    IndexSet::filter(n, |i| is_below_good_threshold(q.get(i).z_upper, n, beta))
}

/// Indices whose bounds straddle the good threshold.
pub fn unresolved_good_set(q: &BitChannelQuality, beta: f64) -> IndexSet {
    let n = q.n();
    let below = |z: f64| is_below_good_threshold(z, n, beta);
    IndexSet::filter(n, |i| below(q.get(i).z_lower) && !below(q.get(i).z_upper))
}

/// Indices certified `delta`-poor: `c_upper <= delta`.
pub fn poor_set(q: &BitChannelQuality, delta: f64) -> IndexSet {
    IndexSet::filter(q.n(), |i| q.get(i).c_upper <= delta)
}

/// Index sets of one quality table. Unresolved indices are never counted as
/// good, poor or `Z`-poor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetReport {
    pub n: usize,
    pub beta: f64,
    pub delta: f64,
    pub gamma: Option<f64>,
    /// Certified `Z(W_i) < 2^{-n^beta} / n`.
    pub good: IndexSet,
    /// Complement of `good`.
    pub bad: IndexSet,
    /// Certified `C(W_i) <= delta`.
    pub poor: IndexSet,
    /// Certified `Z(W_i) >= 1 - gamma`, when `gamma` is given.
    pub poor_z: Option<IndexSet>,
    pub unresolved_good: IndexSet,
    pub unresolved_poor: IndexSet,
    pub unresolved_poor_z: Option<IndexSet>,
}

pub fn select_sets(
    q: &BitChannelQuality,
    beta: f64,
    delta: f64,
    gamma: Option<f64>,
) -> Result<SetReport> {
    check_beta(beta)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must satisfy 0 < delta < 1, got {delta}"
        )));
    }
    if let Some(g) = gamma {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in [0, 1], got {g}"
            )));
        }
    }
    let n = q.n();
    let b = q.bounds();
    let good = good_set(q, beta);
    let unresolved_good = unresolved_good_set(q, beta);
    let poor = poor_set(q, delta);
    let unresolved_poor = IndexSet::filter(n, |i| b[i].c_lower <= delta && b[i].c_upper > delta);
    let (poor_z, unresolved_poor_z) = match gamma {
        Some(g) => (
            Some(IndexSet::filter(n, |i| b[i].gap_upper <= g)),
            Some(IndexSet::filter(n, |i| b[i].gap_lower <= g && b[i].gap_upper > g)),
        ),
        None => (None, None),
    };
    Ok(SetReport {
        n,
        beta,
        delta,
        gamma,
        bad: good.complement(n),
        good,
        poor,
        poor_z,
        unresolved_good,
        unresolved_poor,
        unresolved_poor_z,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    /// Good set of the wiretap channel is inside the good set of the main one.
    pub holds: bool,
    /// Wiretap-good indices that are not main-good.
    pub violating: IndexSet,
    /// Indices where the bounds certify `Z(W_i) < Z(W*_i)`.
    pub z_order_violations: IndexSet,
}

/// Checks `G_n(W, beta) ⊆ G_n(W*, beta)` and the index-wise ordering
/// `Z(W_i) >= Z(W*_i)` on certified bounds.
pub fn degradation_inclusion_check(
    q_main: &BitChannelQuality,
    q_wiretap: &BitChannelQuality,
    beta: f64,
) -> Result<InclusionReport> {
    check_beta(beta)?;
    let n = q_main.n();
    if q_wiretap.n() != n {
        return Err(Error::DimensionMismatch {
            context: "quality tables",
            expected: n,
            actual: q_wiretap.n(),
        });
    }
    let below = |z: f64| is_below_good_threshold(z, n, beta);
    let (bm, bw) = (q_main.bounds(), q_wiretap.bounds());
    let violating = IndexSet::filter(n, |i| below(bw[i].z_upper) && !below(bm[i].z_upper));
    let z_order_violations = IndexSet::filter(n, |i| bw[i].z_upper < bm[i].z_lower);
    Ok(InclusionReport {
        holds: violating.is_empty(),
        violating,
        z_order_violations,
    })
}
