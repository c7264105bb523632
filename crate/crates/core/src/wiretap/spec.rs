use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::channel::ChannelDescriptor;
use crate::construction::{
    check_beta, degradation_inclusion_check, good_set, poor_set, unresolved_good_set,
    BitChannelQuality,
};
use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::polar::{log2_len, FrozenPattern};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Weak,
    Strong,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Weak => "weak",
            Scheme::Strong => "strong",
        })
    }
}

/// Security-function value for the strong scheme: a literal number or the
/// default `2^{-n^beta}` (written `"2^-n^beta"` in JSON).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum DeltaSpec {
    #[default]
    Auto,
    Literal(f64),
}

impl DeltaSpec {
    pub const AUTO_TEXT: &'static str = "2^-n^beta";

    pub fn resolve(&self, n: usize, beta: f64) -> f64 {
        match *self {
            DeltaSpec::Auto => (-(n as f64).powf(beta)).exp2(),
            DeltaSpec::Literal(d) => d,
        }
    }
}

impl Serialize for DeltaSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DeltaSpec::Auto => s.serialize_str(Self::AUTO_TEXT),
            DeltaSpec::Literal(d) => s.serialize_f64(*d),
        }
    }
}

impl<'de> Deserialize<'de> for DeltaSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = DeltaSpec;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a number or \"{}\"", DeltaSpec::AUTO_TEXT)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<DeltaSpec, E> {
                Ok(DeltaSpec::Literal(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<DeltaSpec, E> {
                Ok(DeltaSpec::Literal(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<DeltaSpec, E> {
                Ok(DeltaSpec::Literal(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<DeltaSpec, E> {
                if v.replace(' ', "") == DeltaSpec::AUTO_TEXT {
                    Ok(DeltaSpec::Auto)
                } else {
                    Err(E::custom(format!(
                        "unknown delta_n `{v}`, expected a number or \"{}\"",
                        DeltaSpec::AUTO_TEXT
                    )))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Admissible range `c1 2^{-n^beta} <= delta_n <= 1 - c2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaWindow {
    pub c1: f64,
    pub c2: f64,
}

impl Default for DeltaWindow {
    fn default() -> Self {
        Self { c1: 1.0, c2: 0.01 }
    }
}

impl DeltaWindow {
    pub fn check(&self, delta: f64, n: usize, beta: f64) -> Result<()> {
        let lower = self.c1 * (-(n as f64).powf(beta)).exp2();
        let upper = 1.0 - self.c2;
        if delta >= lower && delta <= upper && delta > 0.0 {
            Ok(())
        } else {
            Err(Error::DeltaOutOfWindow {
                delta,
                lower,
                upper,
            })
        }
    }
}

/// Ties a spec to the channels and construction parameters that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecBinding {
    pub main: ChannelDescriptor,
    pub wiretap: ChannelDescriptor,
    pub m: u32,
    pub mu: usize,
    /// Hex SHA-256 over the spec body, both descriptors, `m` and `mu`.
    pub content_hash: String,
}

/// Index sets of a wiretap code. Indices are 0-based in memory and 1-based in
/// JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WiretapCodeSpec {
    pub n: usize,
    pub beta: f64,
    pub scheme: Scheme,
    /// Security value; `None` for the weak scheme.
    pub delta_n: Option<f64>,
    /// Randomized positions.
    #[serde(rename = "R")]
    pub r: IndexSet,
    /// Message positions.
    #[serde(rename = "A")]
    pub a: IndexSet,
    /// Frozen (zero) positions.
    #[serde(rename = "B")]
    pub b: IndexSet,
    /// Randomized positions that are bad for the main channel (strong scheme).
    #[serde(rename = "X", default)]
    pub x: IndexSet,
    /// Randomized positions that are good for the main channel (strong scheme).
    #[serde(rename = "Y", default)]
    pub y: IndexSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binding: Option<SpecBinding>,
}

impl WiretapCodeSpec {
    /// Message length `k = |A|`.
    pub fn k(&self) -> usize {
        self.a.len()
    }

    /// Number of random bits `r = |R|`.
    pub fn r_len(&self) -> usize {
        self.r.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    /// `A ∪ R`, the positions Bob decodes.
    pub fn free_set(&self) -> IndexSet {
        self.a.union(&self.r)
    }

    /// Frozen pattern for Bob's decoder: `B` at zero.
    pub fn frozen_pattern(&self) -> FrozenPattern {
        FrozenPattern::zeros(self.n, self.b.clone()).expect("validated spec")
    }

    /// Positions Bob branches on during multi-path decoding.
    pub fn branch_set(&self) -> &IndexSet {
        &self.x
    }

    pub fn validate(&self) -> Result<()> {
        log2_len(self.n)?;
        check_beta(self.beta)?;
        let bad = |msg: String| Err(Error::Inconsistent(msg));
        for (name, set) in [("R", &self.r), ("A", &self.a), ("B", &self.b), ("X", &self.x), ("Y", &self.y)] {
            if set.max().is_some_and(|i| i >= self.n) {
                return bad(format!("{name} has an index beyond n = {}", self.n));
            }
        }
        if !self.r.is_disjoint(&self.a) || !self.r.is_disjoint(&self.b) || !self.a.is_disjoint(&self.b) {
            return bad("R, A and B are not pairwise disjoint".into());
        }
        if self.r.len() + self.a.len() + self.b.len() != self.n {
            return bad("R, A and B do not cover [n]".into());
        }
        match self.scheme {
            Scheme::Weak => {
                if !self.x.is_empty() || !self.y.is_empty() {
                    return bad("X and Y are only defined for the strong scheme".into());
                }
            }
            Scheme::Strong => {
                if !self.x.is_disjoint(&self.y) || self.x.union(&self.y) != self.r {
                    return bad("X and Y must partition R".into());
                }
                match self.delta_n {
                    Some(d) if d > 0.0 && d < 1.0 => {}
                    _ => return bad("strong scheme needs 0 < delta_n < 1".into()),
                }
            }
        }
        Ok(())
    }

    fn body_hash(&self, main: &ChannelDescriptor, wiretap: &ChannelDescriptor, m: u32, mu: usize) -> Result<String> {
        let body = Self {
            binding: None,
            ..self.clone()
        };
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&body)?);
        h.update(serde_json::to_vec(main)?);
        h.update(serde_json::to_vec(wiretap)?);
        h.update(m.to_le_bytes());
        h.update((mu as u64).to_le_bytes());
        Ok(hex::encode(h.finalize()))
    }

    pub fn bind(&mut self, main: ChannelDescriptor, wiretap: ChannelDescriptor, m: u32, mu: usize) -> Result<()> {
        let content_hash = self.body_hash(&main, &wiretap, m, mu)?;
        self.binding = Some(SpecBinding {
            main,
            wiretap,
            m,
            mu,
            content_hash,
        });
        Ok(())
    }

    /// Recomputes the content hash; errors if it does not match.
    pub fn verify_binding(&self) -> Result<()> {
        let Some(b) = &self.binding else {
            return Err(Error::Inconsistent("spec carries no binding".into()));
        };
        if self.body_hash(&b.main, &b.wiretap, b.m, b.mu)? != b.content_hash {
            return Err(Error::Inconsistent(
                "content hash does not match the spec body".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        if spec.binding.is_some() {
            spec.verify_binding()?;
        }
        Ok(spec)
    }
}

/// Parameters for [`build_spec`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildOptions {
    pub beta: f64,
    pub scheme: Scheme,
    pub delta: DeltaSpec,
    pub window: DeltaWindow,
}

impl BuildOptions {
    pub fn weak(beta: f64) -> Self {
        Self {
            beta,
            scheme: Scheme::Weak,
            delta: DeltaSpec::Auto,
            window: DeltaWindow::default(),
        }
    }

    pub fn strong(beta: f64, delta: DeltaSpec) -> Self {
        Self {
            beta,
            scheme: Scheme::Strong,
            delta,
            window: DeltaWindow::default(),
        }
    }

    pub fn with_window(self, window: DeltaWindow) -> Self {
        Self { window, ..self }
    }
}

/// Builds the index sets from the main (`W*`) and wiretap (`W`) tables.
///
/// Weak scheme: `R = G(W)`, `A = G(W*) \ G(W)`, `B` the rest. Strong scheme:
/// `P = P(W, delta_n)`, `R = [n] \ P`, `A = P ∩ G(W*)`, `B = P \ G(W*)`,
/// `X = R \ G(W*)`, `Y = R ∩ G(W*)`.
///
/// Only certified memberships count. Indices whose wiretap goodness is
/// unresolved are frozen in the weak scheme; indices not certified poor are
/// randomized in the strong scheme.
pub fn build_spec(
    q_main: &BitChannelQuality,
    q_wiretap: &BitChannelQuality,
    options: BuildOptions,
) -> Result<WiretapCodeSpec> {
    let n = q_main.n();
    if q_wiretap.n() != n {
        return Err(Error::DimensionMismatch {
            context: "main and wiretap quality tables",
            expected: n,
            actual: q_wiretap.n(),
        });
    }
    let beta = options.beta;
    check_beta(beta)?;
    let good_main = good_set(q_main, beta);

    let spec = match options.scheme {
        Scheme::Weak => {
            let inclusion = degradation_inclusion_check(q_main, q_wiretap, beta)?;
            if !inclusion.holds {
                return Err(Error::DegradationViolation(inclusion.violating.one_based()));
            }
            let r = good_set(q_wiretap, beta);
            let a = good_main
                .difference(&r)
                .difference(&unresolved_good_set(q_wiretap, beta));
            let b = r.union(&a).complement(n);
            WiretapCodeSpec {
                n,
                beta,
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
        Scheme::Strong => {
            let delta = options.delta.resolve(n, beta);
            options.window.check(delta, n, beta)?;
            let poor = poor_set(q_wiretap, delta);
            let r = poor.complement(n);
            let a = poor.intersection(&good_main);
            let b = poor.difference(&good_main);
            let y = r.intersection(&good_main);
            let x = r.difference(&good_main);
            WiretapCodeSpec {
                n,
                beta,
                scheme: Scheme::Strong,
                delta_n: Some(delta),
                r,
                a,
                b,
                x,
                y,
                binding: None,
            }
        }
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::evolve_bec;

    #[test]
    fn extreme_channels_weak() {
        let main = evolve_bec(0.0, 4).unwrap();
        let eve = evolve_bec(1.0, 4).unwrap();
        let s = build_spec(&main, &eve, BuildOptions::weak(0.3)).unwrap();
        assert_eq!(s.a, IndexSet::full(16));
        assert!(s.r.is_empty() && s.b.is_empty());
        assert_eq!(s.rate(), 1.0);

        let same = build_spec(&main, &main, BuildOptions::weak(0.3)).unwrap();
        assert_eq!(same.k(), 0);
    }

    #[test]
    fn weak_rejects_inverted_pair() {
        let main = evolve_bec(0.6, 8).unwrap();
        let eve = evolve_bec(0.1, 8).unwrap();
        assert!(matches!(
            build_spec(&main, &eve, BuildOptions::weak(0.3)),
            Err(Error::DegradationViolation(_))
        ));
    }

    #[test]
    fn strong_partitions() {
        let main = evolve_bec(0.1, 10).unwrap();
        let eve = evolve_bec(0.6, 10).unwrap();
        let s = build_spec(&main, &eve, BuildOptions::strong(0.3, DeltaSpec::Literal(0.01))).unwrap();
        let poor = poor_set(&eve, 0.01);
        let bad_main = good_set(&main, 0.3).complement(1024);
        assert_eq!(s.a.union(&s.b), poor);
        assert_eq!(s.x.union(&s.b), bad_main);
        // Rate identity.
        let lhs = s.k() as f64;
        let rhs = poor.len() as f64 - bad_main.len() as f64 + s.x.len() as f64;
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn delta_window() {
        let main = evolve_bec(0.1, 6).unwrap();
        let eve = evolve_bec(0.6, 6).unwrap();
        let opts = BuildOptions::strong(0.3, DeltaSpec::Literal(0.995));
        assert!(matches!(
            build_spec(&main, &eve, opts),
            Err(Error::DeltaOutOfWindow { .. })
        ));
        let opts = BuildOptions::strong(0.3, DeltaSpec::Literal(1e-12));
        assert!(build_spec(&main, &eve, opts).is_err());
        let relaxed = opts.with_window(DeltaWindow { c1: 0.0, c2: 0.01 });
        assert!(build_spec(&main, &eve, relaxed).is_ok());
    }

    #[test]
    fn delta_spec_json() {
        let auto: DeltaSpec = serde_json::from_str("\"2^-n^beta\"").unwrap();
        assert_eq!(auto, DeltaSpec::Auto);
        let lit: DeltaSpec = serde_json::from_str("0.05").unwrap();
        assert_eq!(lit, DeltaSpec::Literal(0.05));
        assert!(serde_json::from_str::<DeltaSpec>("\"half\"").is_err());
        assert_eq!(serde_json::to_string(&DeltaSpec::Auto).unwrap(), "\"2^-n^beta\"");
        assert!((DeltaSpec::Auto.resolve(1 << 20, 0.25) - 2f64.powi(-32)).abs() < 1e-20);
    }

    #[test]
    fn json_round_trip_and_binding() {
        let main = evolve_bec(0.1, 5).unwrap();
        let eve = evolve_bec(0.6, 5).unwrap();
        let mut s = build_spec(&main, &eve, BuildOptions::strong(0.3, DeltaSpec::Literal(0.2))).unwrap();
        s.bind(ChannelDescriptor::bec(0.1), ChannelDescriptor::bec(0.6), 5, 256).unwrap();
        let text = s.to_json().unwrap();
        assert!(text.contains("\"R\""));
        let back = WiretapCodeSpec::from_json(&text).unwrap();
        assert_eq!(back, s);

        let tampered = text.replacen("\"beta\": 0.3", "\"beta\": 0.31", 1);
        assert!(WiretapCodeSpec::from_json(&tampered).is_err());
    }

    #[test]
    fn validation_catches_overlap() {
        let spec = WiretapCodeSpec {
            n: 4,
            beta: 0.3,
            scheme: Scheme::Weak,
            delta_n: None,
            r: IndexSet::from_indices([0, 1]),
            a: IndexSet::from_indices([1, 2]),
            b: IndexSet::from_indices([3]),
            x: IndexSet::new(),
            y: IndexSet::new(),
            binding: None,
        };
        assert!(spec.validate().is_err());
    }
}
