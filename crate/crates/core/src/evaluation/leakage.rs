use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::SymmetricChannel;
use crate::construction::{product_row, vector_channel_table};
use crate::error::{Error, Result};
use crate::polar::{apply_transform, log2_len};
use crate::wiretap::WiretapCodeSpec;

use super::{enumeration_guard, mutual_information, ORACLE_TOLERANCE};

/// Distribution of the message `u` over `{0,1}^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MessagePrior {
    Uniform,
    /// All mass on one message; all zeros when `message` is absent.
    PointMass {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        message: Option<Vec<u8>>,
    },
    /// Independent bits with `Pr{u_j = 1} = p_one`.
    Product { p_one: f64 },
}

impl MessagePrior {
    /// `Pr{1}` of the skewed test prior.
    pub const SKEWED_P_ONE: f64 = 0.2;

    pub fn point_mass() -> Self {
        MessagePrior::PointMass { message: None }
    }

    pub fn skewed() -> Self {
        MessagePrior::Product {
            p_one: Self::SKEWED_P_ONE,
        }
    }

    /// The three priors used by the test suites.
    pub fn standard() -> Vec<Self> {
        vec![Self::Uniform, Self::point_mass(), Self::skewed()]
    }

    pub fn name(&self) -> String {
        match self {
            MessagePrior::Uniform => "uniform".into(),
            MessagePrior::PointMass { .. } => "point_mass".into(),
            MessagePrior::Product { p_one } => format!("product({p_one})"),
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        match self {
            MessagePrior::Uniform => Ok(()),
            MessagePrior::PointMass { message: None } => Ok(()),
            MessagePrior::PointMass { message: Some(m) } => {
                if m.len() != k {
                    return Err(Error::DimensionMismatch {
                        context: "point-mass message",
                        expected: k,
                        actual: m.len(),
                    });
                }
                if m.iter().any(|&b| b > 1) {
                    return Err(Error::InvalidParameter("message bits must be 0 or 1".into()));
                }
                Ok(())
            }
            MessagePrior::Product { p_one } => {
                if (0.0..=1.0).contains(p_one) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "p_one must lie in [0, 1], got {p_one}"
                    )))
                }
            }
        }
    }

    fn fixed_message(&self, k: usize) -> Option<Vec<u8>> {
        match self {
            MessagePrior::PointMass { message } => {
                Some(message.clone().unwrap_or_else(|| vec![0; k]))
            }
            _ => None,
        }
    }

    /// `Pr{u}` for every `u`, bit `j` of the index being `u_j`.
    pub fn probabilities(&self, k: usize) -> Result<Vec<f64>> {
        self.validate(k)?;
        if k >= usize::BITS as usize - 1 {
            return Err(Error::TooLarge {
                terms: 1u128 << k.min(127),
                limit: super::ENUMERATION_LIMIT,
            });
        }
        let size = 1usize << k;
        Ok(match self {
            MessagePrior::Uniform => vec![1.0 / size as f64; size],
            MessagePrior::PointMass { .. } => {
                let m = self.fixed_message(k).expect("point mass");
                let word = m.iter().enumerate().fold(0usize, |w, (j, &b)| w | ((b as usize) << j));
                let mut p = vec![0.0; size];
                p[word] = 1.0;
                p
            }
            MessagePrior::Product { p_one } => (0..size)
                .map(|word| {
                    let ones = word.count_ones() as i32;
                    p_one.powi(ones) * (1.0 - p_one).powi(k as i32 - ones)
                })
                .collect(),
        })
    }

    /// Draws one message.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Vec<u8> {
        match self {
            MessagePrior::Uniform => (0..k).map(|_| rng.gen::<bool>() as u8).collect(),
            MessagePrior::PointMass { .. } => self.fixed_message(k).expect("point mass"),
            MessagePrior::Product { p_one } => {
                (0..k).map(|_| rng.gen_bool(*p_one) as u8).collect()
            }
        }
    }
}

/// How the encoder fills the randomized positions.
#[derive(Clone, Debug, PartialEq)]
pub enum Randomization {
    /// `e` uniform over `{0,1}^r`, as in the scheme.
    Uniform,
    /// `e` pinned to one value.
    Fixed(Vec<u8>),
}

/// Joint law of the message `U` and Eve's output `Z`, marginalized over `e`.
#[derive(Clone, Debug)]
pub struct JointDistribution {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    prior: Vec<f64>,
    /// Number of distinct output vectors, `|Z|^n`.
    columns: usize,
    /// `Pr{U = u, Z = z}` at `u * columns + z`.
    table: Vec<f64>,
}

impl JointDistribution {
    pub fn build(
        spec: &WiretapCodeSpec,
        wiretap: &SymmetricChannel,
        prior: &MessagePrior,
        randomization: &Randomization,
    ) -> Result<Self> {
        spec.validate()?;
        let (n, k, r) = (spec.n, spec.k(), spec.r_len());
        enumeration_guard(n, wiretap.output_size())?;
        let prior_p = prior.probabilities(k)?;
        let e_words: Vec<(usize, f64)> = match randomization {
            Randomization::Uniform => {
                let w = 1.0 / (1usize << r) as f64;
                (0..1usize << r).map(|e| (e, w)).collect()
            }
            Randomization::Fixed(e) => {
                if e.len() != r {
                    return Err(Error::DimensionMismatch {
                        context: "fixed randomization",
                        expected: r,
                        actual: e.len(),
                    });
                }
                let word = e.iter().enumerate().fold(0usize, |w, (j, &b)| w | (((b & 1) as usize) << j));
                vec![(word, 1.0)]
            }
        };
        let columns = wiretap.output_size().pow(n as u32);
        let mut table = vec![0.0; prior_p.len() * columns];
        let mut v = vec![0u8; n];
        for (u, &pu) in prior_p.iter().enumerate() {
            if pu == 0.0 {
                continue;
            }
            let slot = &mut table[u * columns..(u + 1) * columns];
            for &(e, pe) in &e_words {
                v.iter_mut().for_each(|b| *b = 0);
                for (j, i) in spec.a.iter().enumerate() {
                    v[i] = ((u >> j) & 1) as u8;
                }
                for (j, i) in spec.r.iter().enumerate() {
                    v[i] = ((e >> j) & 1) as u8;
                }
                let row = product_row(wiretap, &apply_transform(&v)?);
                for (t, w) in slot.iter_mut().zip(row) {
                    *t += pu * pe * w;
                }
            }
        }
        Ok(Self {
            n,
            k,
            r,
            prior: prior_p,
            columns,
            table,
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.table.iter().sum()
    }

    /// `Pr{U = u}` recovered from the table.
    pub fn message_marginal(&self) -> Vec<f64> {
        self.table.chunks(self.columns).map(|row| row.iter().sum()).collect()
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    /// Checks that the table sums to 1 and reproduces the prior, within 1e-10.
    pub fn check_invariants(&self) -> Result<()> {
        const TOL: f64 = 1e-10;
        let total = self.total_mass();
        if (total - 1.0).abs() > TOL {
            return Err(Error::Inconsistent(format!("joint table sums to {total}")));
        }
        for (u, (&got, &want)) in self.message_marginal().iter().zip(&self.prior).enumerate() {
            if (got - want).abs() > TOL {
                return Err(Error::Inconsistent(format!(
                    "message marginal at {u} is {got}, prior says {want}"
                )));
            }
        }
        Ok(())
    }

    /// `I(U; Z)` in bits.
    pub fn mutual_information(&self) -> f64 {
        let rows: Vec<Vec<f64>> = self
            .table
            .chunks(self.columns)
            .zip(&self.prior)
            .map(|(row, &p)| {
                if p > 0.0 {
                    row.iter().map(|x| x / p).collect()
                } else {
                    vec![0.0; self.columns]
                }
            })
            .collect();
        mutual_information(&self.prior, &rows)
    }
}

/// Exact `I(U; Z)` in bits under the scheme's encoder (uniform `e`).
pub fn exact_leakage(
    spec: &WiretapCodeSpec,
    wiretap: &SymmetricChannel,
    prior: &MessagePrior,
) -> Result<f64> {
    Ok(JointDistribution::build(spec, wiretap, prior, &Randomization::Uniform)?.mutual_information())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub n: usize,
    /// `I(X; Z)` by enumeration.
    pub computed: f64,
    /// `n C(W)`.
    pub expected: f64,
    pub holds: bool,
}

/// With `V` uniform, `I(V G_n; Z)` by enumeration against `n C(W)`.
pub fn noiseless_main_identity(wiretap: &SymmetricChannel, n: usize) -> Result<IdentityCheck> {
    log2_len(n)?;
    enumeration_guard(n, wiretap.output_size())?;
    let rows = vector_channel_table(wiretap, n);
    let prior = vec![1.0 / rows.len() as f64; rows.len()];
    let computed = mutual_information(&prior, &rows);
    let expected = n as f64 * wiretap.capacity();
    Ok(IdentityCheck {
        n,
        computed,
        expected,
        holds: (computed - expected).abs() <= ORACLE_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{h2, make_bec, make_bsc};
    use crate::index_set::IndexSet;
    use crate::wiretap::Scheme;

    fn spec(n: usize, r: &[usize], a: &[usize]) -> WiretapCodeSpec {
        let r = IndexSet::from_indices(r.iter().copied());
        let a = IndexSet::from_indices(a.iter().copied());
        let b = r.union(&a).complement(n);
        WiretapCodeSpec {
            n,
            beta: 0.3,
            scheme: Scheme::Weak,
            delta_n: None,
            r,
            a,
            b,
            x: IndexSet::new(),
            y: IndexSet::new(),
            binding: None,
        }
    }

    #[test]
    fn prior_probabilities() {
        let p = MessagePrior::skewed().probabilities(2).unwrap();
        let want = [0.64, 0.16, 0.16, 0.04];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let pm = MessagePrior::PointMass { message: Some(vec![0, 1]) };
        assert_eq!(pm.probabilities(2).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
        assert!(pm.probabilities(3).is_err());
        let json = serde_json::to_string(&MessagePrior::skewed()).unwrap();
        assert_eq!(json, r#"{"kind":"product","p_one":0.2}"#);
    }

    #[test]
    fn pure_noise_leaks_nothing() {
        let useless = make_bsc(0.5).unwrap();
        let s = spec(4, &[0], &[1, 3]);
        assert!(exact_leakage(&s, &useless, &MessagePrior::Uniform).unwrap().abs() < 1e-12);
    }

    #[test]
    fn point_mass_leaks_nothing() {
        let ch = make_bsc(0.1).unwrap();
        let s = spec(4, &[], &[0, 1, 2, 3]);
        let v = exact_leakage(&s, &ch, &MessagePrior::point_mass()).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn joint_invariants() {
        let ch = make_bec(0.5).unwrap();
        let s = spec(4, &[3], &[1, 2]);
        for prior in MessagePrior::standard() {
            let j = JointDistribution::build(&s, &ch, &prior, &Randomization::Uniform).unwrap();
            j.check_invariants().unwrap();
        }
    }

    #[test]
    fn frozen_randomness_leaks_at_least_k_capacities() {
        let ch = make_bsc(0.3).unwrap();
        let s = spec(4, &[3], &[1, 2]);
        let j = JointDistribution::build(&s, &ch, &MessagePrior::Uniform, &Randomization::Fixed(vec![0]))
            .unwrap();
        assert!(j.mutual_information() >= 2.0 * ch.capacity() - 1e-9);
    }

    #[test]
    fn no_randomness_single_position() {
        // One message bit on the last position: x = (u, u, u, u) is a
        // repetition code over BSC(p).
        let p: f64 = 0.2;
        let ch = make_bsc(p).unwrap();
        let s = spec(4, &[], &[3]);
        let got = exact_leakage(&s, &ch, &MessagePrior::Uniform).unwrap();
        let mut hz = 0.0;
        let mut hz_given_x = 0.0;
        for ones in 0..=4i32 {
            let mult = [1.0, 4.0, 6.0, 4.0, 1.0][ones as usize];
            let a = p.powi(ones) * (1.0 - p).powi(4 - ones);
            let b = p.powi(4 - ones) * (1.0 - p).powi(ones);
            let pz = 0.5 * (a + b);
            hz -= mult * pz * pz.log2();
            hz_given_x -= mult * a * a.log2();
        }
        assert!((got - (hz - hz_given_x)).abs() < 1e-12);
    }

    #[test]
    fn noiseless_identity() {
        for n in [1, 2, 4, 8] {
            for ch in [make_bsc(0.25).unwrap(), make_bec(0.5).unwrap()] {
                let c = noiseless_main_identity(&ch, n).unwrap();
                assert!(c.holds, "{} n={n}: {c:?}", ch.label());
            }
        }
        let c = noiseless_main_identity(&make_bsc(0.25).unwrap(), 4).unwrap();
        assert!((c.computed - 4.0 * (1.0 - h2(0.25))).abs() < 1e-9);
        let c = noiseless_main_identity(&make_bec(0.5).unwrap(), 4).unwrap();
        assert!((c.computed - 2.0).abs() < 1e-9);
    }

    #[test]
    fn guard() {
        let ch = make_bec(0.5).unwrap();
        assert!(matches!(
            noiseless_main_identity(&ch, 16),
            Err(Error::TooLarge { .. })
        ));
    }
}
