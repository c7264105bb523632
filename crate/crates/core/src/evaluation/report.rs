use serde::{Deserialize, Serialize};

use crate::channel::SymmetricChannel;
use crate::construction::{good_set, poor_set, BitChannelQuality};
use crate::error::{Error, Result};
use crate::wiretap::{Scheme, WiretapCodeSpec};

use super::bounds::{strong_bound, weak_bound};

/// Where a reported number comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Bound,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tagged {
    pub value: f64,
    pub provenance: Provenance,
}

impl Tagged {
    pub fn exact(value: f64) -> Self {
        Self { value, provenance: Provenance::Exact }
    }

    pub fn bound(value: f64) -> Self {
        Self { value, provenance: Provenance::Bound }
    }

    pub fn monte_carlo(value: f64) -> Self {
        Self { value, provenance: Provenance::MonteCarlo }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSizes {
    pub r: usize,
    pub a: usize,
    pub b: usize,
    pub x: usize,
    pub y: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecrecyReport {
    pub n: usize,
    pub scheme: Scheme,
    pub main: String,
    pub wiretap: String,
    /// Wiretap crossover or erasure parameter, for tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    pub rate: Tagged,
    /// `C(W*) - C(W)`.
    pub secrecy_capacity: Tagged,
    /// `100 rate / C_s`, absent when `C_s = 0`.
    pub percent_of_secrecy_capacity: Option<Tagged>,
    /// `sum z_upper(W*_i)` over `A ∪ R`.
    pub reliability_bound: Tagged,
    pub leakage_bound_weak: Option<Tagged>,
    pub leakage_bound_strong: Option<Tagged>,
    /// `n C(W) - |R|`.
    pub n_epsilon_n: Tagged,
    pub sizes: SetSizes,
    /// `k = |P| - |B(W*)| + |X|` recomputed from the quality tables; strong
    /// scheme only.
    pub rate_identity_holds: Option<bool>,
    pub block_error_rate: Option<Tagged>,
    pub empirical_lambda: Option<Tagged>,
    pub exact_leakage: Option<Tagged>,
}

impl SecrecyReport {
    pub fn with_p2(mut self, p2: f64) -> Self {
        self.p2 = Some(p2);
        self
    }

    pub fn with_block_error_rate(mut self, fer: f64) -> Self {
        self.block_error_rate = Some(Tagged::monte_carlo(fer));
        self
    }

    pub fn with_empirical_lambda(mut self, lambda: f64) -> Self {
        self.empirical_lambda = Some(Tagged::monte_carlo(lambda));
        self
    }

    pub fn with_exact_leakage(mut self, bits: f64) -> Self {
        self.exact_leakage = Some(Tagged::exact(bits));
        self
    }

    pub const CSV_HEADER: &'static str = "p2,Rate,%C_s,C_s,reliability_bound,leakage_bound_weak,leakage_bound_strong,n_epsilon_n,R,A,B,X";

    pub fn csv_row(&self) -> String {
        fn cell(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        // Bounds span many decades; scientific notation keeps them legible.
        fn sci(v: Option<f64>) -> String {
            v.map(|x| format!("{x:e}")).unwrap_or_default()
        }
        [
            cell(self.p2),
            self.rate.value.to_string(),
            cell(self.percent_of_secrecy_capacity.map(|t| t.value)),
            self.secrecy_capacity.value.to_string(),
            sci(Some(self.reliability_bound.value)),
            sci(self.leakage_bound_weak.map(|t| t.value)),
            sci(self.leakage_bound_strong.map(|t| t.value)),
            self.n_epsilon_n.value.to_string(),
            self.sizes.r.to_string(),
            self.sizes.a.to_string(),
            self.sizes.b.to_string(),
            self.sizes.x.to_string(),
        ]
        .join(",")
    }
}

pub fn secrecy_report(
    spec: &WiretapCodeSpec,
    main: &SymmetricChannel,
    wiretap: &SymmetricChannel,
    q_main: &BitChannelQuality,
    q_wiretap: &BitChannelQuality,
) -> Result<SecrecyReport> {
    spec.validate()?;
    for (q, context) in [(q_main, "main quality table"), (q_wiretap, "wiretap quality table")] {
        if q.n() != spec.n {
            return Err(Error::DimensionMismatch {
                context,
                expected: spec.n,
                actual: q.n(),
            });
        }
    }
    let n = spec.n;
    let secrecy_capacity = main.capacity() - wiretap.capacity();
    let rate = spec.rate();
    let measures = wiretap.measures();
    let (leakage_bound_weak, leakage_bound_strong, rate_identity_holds) = match spec.scheme {
        Scheme::Weak => (
            Some(Tagged::bound(weak_bound(spec, q_wiretap, &measures)?.value)),
            None,
            None,
        ),
        Scheme::Strong => {
            let delta = spec.delta_n.expect("validated strong spec");
            let poor = poor_set(q_wiretap, delta).len() as i64;
            let bad_main = n as i64 - good_set(q_main, spec.beta).len() as i64;
            let identity = spec.k() as i64 == poor - bad_main + spec.x.len() as i64;
            (
                None,
                Some(Tagged::bound(strong_bound(spec, q_wiretap)?.value)),
                Some(identity),
            )
        }
    };
    Ok(SecrecyReport {
        n,
        scheme: spec.scheme,
        main: main.label().to_string(),
        wiretap: wiretap.label().to_string(),
        p2: None,
        rate: Tagged::exact(rate),
        secrecy_capacity: Tagged::exact(secrecy_capacity),
        percent_of_secrecy_capacity: (secrecy_capacity > 0.0)
            .then(|| Tagged::exact(100.0 * rate / secrecy_capacity)),
        reliability_bound: Tagged::bound(q_main.sum_z_upper(spec.free_set().iter())),
        leakage_bound_weak,
        leakage_bound_strong,
        n_epsilon_n: Tagged::exact(n as f64 * measures.capacity_bits - spec.r_len() as f64),
        sizes: SetSizes {
            r: spec.r_len(),
            a: spec.k(),
            b: spec.b.len(),
            x: spec.x.len(),
            y: spec.y.len(),
        },
        rate_identity_holds,
        block_error_rate: None,
        empirical_lambda: None,
        exact_leakage: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{h2, make_bsc};
    use crate::construction::evolve_quantized;
    use crate::wiretap::{build_spec, BuildOptions, DeltaSpec};

    #[test]
    fn secrecy_capacity_closed_form() {
        let (p1, p2) = (0.001, 0.45);
        let main = make_bsc(p1).unwrap();
        let eve = make_bsc(p2).unwrap();
        let qm = evolve_quantized(&main, 8, 32).unwrap();
        let qe = evolve_quantized(&eve, 8, 32).unwrap();
        let spec = build_spec(&qm, &qe, BuildOptions::strong(0.3, DeltaSpec::Auto)).unwrap();
        let rep = secrecy_report(&spec, &main, &eve, &qm, &qe).unwrap().with_p2(p2);
        let cs = h2(p2) - h2(p1);
        assert!((rep.secrecy_capacity.value - cs).abs() < 1e-12);
        // h2(0.45) = 0.99277, h2(0.001) = 0.01141.
        assert!((cs - 0.98136).abs() < 1e-4);
        // The published row reads rate 0.933 at 95.1% of C_s.
        assert!((0.933 / 0.951 - cs).abs() < 1e-3);
        assert_eq!(rep.rate_identity_holds, Some(true));
        assert!(rep.rate.value >= 0.0 && rep.rate.value <= 1.0);
        assert_eq!(rep.secrecy_capacity.provenance, Provenance::Exact);
        assert_eq!(rep.reliability_bound.provenance, Provenance::Bound);
        let row = rep.csv_row();
        assert_eq!(row.split(',').count(), SecrecyReport::CSV_HEADER.split(',').count());
        assert!(row.starts_with("0.45,"));
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains(r#""provenance":"exact""#));
    }

    #[test]
    fn identical_channels() {
        let ch = make_bsc(0.1).unwrap();
        let q = evolve_quantized(&ch, 6, 32).unwrap();
        for opts in [BuildOptions::weak(0.3), BuildOptions::strong(0.3, DeltaSpec::Auto)] {
            let spec = build_spec(&q, &q, opts).unwrap();
            let rep = secrecy_report(&spec, &ch, &ch, &q, &q).unwrap();
            assert_eq!(rep.secrecy_capacity.value, 0.0);
            assert_eq!(rep.rate.value, 0.0);
            assert!(rep.percent_of_secrecy_capacity.is_none());
        }
    }

    #[test]
    fn mismatched_tables() {
        let ch = make_bsc(0.1).unwrap();
        let q = evolve_quantized(&ch, 6, 32).unwrap();
        let spec = build_spec(&q, &q, BuildOptions::weak(0.3)).unwrap();
        let small = evolve_quantized(&ch, 5, 32).unwrap();
        assert!(secrecy_report(&spec, &ch, &ch, &q, &small).is_err());
    }
}
