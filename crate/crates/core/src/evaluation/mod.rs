//! Exact oracles, bounds, Monte Carlo harness and reporting.

mod bounds;
mod induced;
mod leakage;
mod montecarlo;
mod report;

pub use bounds::{strong_bound, weak_bound, StrongBound, WeakBound};
pub use induced::{
    build_induced_channel, check_induced_symmetry, induced_capacity_check, InducedCapacity,
    InducedChannel, SymmetryVerdict,
};
pub use leakage::{
    exact_leakage, noiseless_main_identity, IdentityCheck, JointDistribution, MessagePrior,
    Randomization,
};
pub use montecarlo::{
    attack_trial, clopper_pearson_upper, compare_decoders, reliability_trial, AttackReport,
    PairedComparison, PriorOutcome, ReliabilityReport, TrialConfig, CONFIDENCE, PASS_FLOOR,
};
pub use report::{secrecy_report, Provenance, SecrecyReport, Tagged};

use crate::error::{Error, Result};

/// Largest joint table the enumeration oracles will build.
pub const ENUMERATION_LIMIT: u128 = 100_000_000;

/// Absolute tolerance for identities checked by the oracles.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

pub(crate) fn enumeration_guard(n: usize, outputs: usize) -> Result<()> {
    let terms = (outputs as u128)
        .checked_pow(n as u32)
        .and_then(|t| t.checked_mul(1u128 << n.min(127)))
        .unwrap_or(u128::MAX);
    if n >= 64 || terms > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            terms,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// `I(X; Y)` in bits for input law `prior` and channel rows `rows[x][y]`.
pub(crate) fn mutual_information(prior: &[f64], rows: &[Vec<f64>]) -> f64 {
    let width = rows.first().map_or(0, Vec::len);
    let mut output = vec![0.0; width];
    for (&p, row) in prior.iter().zip(rows) {
        for (o, &w) in output.iter_mut().zip(row) {
            *o += p * w;
        }
    }
    let mut info = 0.0;
    for (&p, row) in prior.iter().zip(rows) {
        if p == 0.0 {
            continue;
        }
        for (&w, &o) in row.iter().zip(&output) {
            if w > 0.0 {
                info += p * w * (w / o).log2();
            }
        }
    }
    info.max(0.0)
}
