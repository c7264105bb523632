use serde::{Deserialize, Serialize};

use crate::channel::{h2, ChannelMeasures};
use crate::construction::{good_set, poor_set, BitChannelQuality};
use crate::error::{Error, Result};
use crate::wiretap::{Scheme, WiretapCodeSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakBound {
    /// `n eps_n + h2(2^{-n^beta}) + (n - k) 2^{-n^beta}`.
    pub value: f64,
    /// `value / n`.
    pub normalized: f64,
    /// `eps_n = C(W) - |R| / n`.
    pub epsilon_n: f64,
    pub n_epsilon_n: f64,
    /// Whether `R` is inside the certified good set of the wiretap channel,
    /// which the bound assumes.
    pub r_certified_good: bool,
}

fn check_tables(spec: &WiretapCodeSpec, q: &BitChannelQuality) -> Result<()> {
    if q.n() != spec.n {
        return Err(Error::DimensionMismatch {
            context: "wiretap quality table",
            expected: spec.n,
            actual: q.n(),
        });
    }
    Ok(())
}

pub fn weak_bound(
    spec: &WiretapCodeSpec,
    q_wiretap: &BitChannelQuality,
    measures: &ChannelMeasures,
) -> Result<WeakBound> {
    if spec.scheme != Scheme::Weak {
        return Err(Error::Inconsistent("weak_bound needs a weak-scheme spec".into()));
    }
    check_tables(spec, q_wiretap)?;
    let n = spec.n as f64;
    let tail = (-n.powf(spec.beta)).exp2();
    let n_epsilon_n = n * measures.capacity_bits - spec.r_len() as f64;
    let value = n_epsilon_n + h2(tail) + (n - spec.k() as f64) * tail;
    Ok(WeakBound {
        value,
        normalized: value / n,
        epsilon_n: n_epsilon_n / n,
        n_epsilon_n,
        r_certified_good: spec.r.is_subset(&good_set(q_wiretap, spec.beta)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongBound {
    /// `delta_n |P_n(W, delta_n)|`.
    pub value: f64,
    pub delta: f64,
    /// `|P_n(W, delta_n)|` from certified capacities.
    pub poor: usize,
    /// Whether `A ∪ B` is inside the certified poor set, which the bound
    /// assumes.
    pub complement_is_poor: bool,
}

pub fn strong_bound(spec: &WiretapCodeSpec, q_wiretap: &BitChannelQuality) -> Result<StrongBound> {
    let (Scheme::Strong, Some(delta)) = (spec.scheme, spec.delta_n) else {
        return Err(Error::Inconsistent(
            "strong_bound needs a strong-scheme spec with delta_n".into(),
        ));
    };
    check_tables(spec, q_wiretap)?;
    let poor = poor_set(q_wiretap, delta);
    Ok(StrongBound {
        value: delta * poor.len() as f64,
        delta,
        poor: poor.len(),
        complement_is_poor: spec.a.union(&spec.b).is_subset(&poor),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_bec, make_bsc};
    use crate::construction::{evolve_bec, evolve_quantized};
    use crate::wiretap::{build_spec, BuildOptions, DeltaSpec, DeltaWindow};

    #[test]
    fn epsilon_zero_leaves_tail_terms() {
        // BEC(0.5) at n = 4 with |R| = 2 = n C(W).
        let q = evolve_bec(0.5, 2).unwrap();
        let mut spec = build_spec(&evolve_bec(0.0, 2).unwrap(), &q, BuildOptions::weak(0.3)).unwrap();
        spec.r = crate::index_set::IndexSet::from_indices([2, 3]);
        spec.a = crate::index_set::IndexSet::from_indices([0, 1]);
        spec.b = crate::index_set::IndexSet::new();
        let b = weak_bound(&spec, &q, &make_bec(0.5).unwrap().measures()).unwrap();
        let tail = (-(4f64).powf(0.3)).exp2();
        assert_eq!(b.n_epsilon_n, 0.0);
        assert!((b.value - (h2(tail) + 2.0 * tail)).abs() < 1e-15);
    }

    #[test]
    fn regression_anchor_n1024() {
        let main = evolve_quantized(&make_bsc(0.01).unwrap(), 10, 64).unwrap();
        let eve = evolve_quantized(&make_bsc(0.2).unwrap(), 10, 64).unwrap();
        let spec = build_spec(&main, &eve, BuildOptions::weak(0.3)).unwrap();
        let b = weak_bound(&spec, &eve, &make_bsc(0.2).unwrap().measures()).unwrap();
        assert!(b.value.is_finite() && b.value > 0.0);
        assert!(b.r_certified_good);
        assert!((b.normalized * 1024.0 - b.value).abs() < 1e-9);
    }

    #[test]
    fn strong_bound_cases() {
        let main = evolve_bec(0.0, 4).unwrap();
        let perfect = evolve_bec(0.0, 4).unwrap();
        let opts = BuildOptions::strong(0.3, DeltaSpec::Literal(0.2))
            .with_window(DeltaWindow { c1: 1e-3, c2: 0.01 });
        let spec = build_spec(&main, &perfect, opts).unwrap();
        let b = strong_bound(&spec, &perfect).unwrap();
        assert_eq!((b.poor, b.value), (0, 0.0));

        let n = 1024usize;
        let delta = (-(n as f64).powf(0.3)).exp2();
        let main = evolve_bec(0.1, 10).unwrap();
        let eve = evolve_bec(0.6, 10).unwrap();
        let spec = build_spec(&main, &eve, BuildOptions::strong(0.3, DeltaSpec::Auto)).unwrap();
        let b = strong_bound(&spec, &eve).unwrap();
        assert!(b.value <= n as f64 * delta);
        assert!(b.complement_is_poor);
        assert!(weak_bound(&spec, &eve, &make_bec(0.6).unwrap().measures()).is_err());
    }
}
