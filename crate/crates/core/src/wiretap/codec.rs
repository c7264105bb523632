use rand::rngs::StdRng;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::SymmetricChannel;
use crate::error::{Error, Result};
use crate::polar::{
    multipath_decode, sc_decode, sc_decode_genie, transform_in_place, MultipathConfig, TieBreak,
};

use super::spec::WiretapCodeSpec;

/// Source of the encoder's random bits `e`.
pub trait RandomnessSource {
    /// Fills `out` with bits (one per byte, values 0 or 1).
    fn fill_bits(&mut self, out: &mut [u8]);

    /// Whether the stream is suitable for real use.
    fn is_secure(&self) -> bool;
}

/// Operating-system seeded CSPRNG. The default for encoding.
pub struct SecureRandomness(StdRng);

impl SecureRandomness {
    pub fn new() -> Self {
        Self(StdRng::from_entropy())
    }
}

impl Default for SecureRandomness {
    fn default() -> Self {
        Self::new()
    }
}

impl RandomnessSource for SecureRandomness {
    fn fill_bits(&mut self, out: &mut [u8]) {
        fill_from(&mut self.0, out);
    }

    fn is_secure(&self) -> bool {
        true
    }
}

/// Reproducible stream for tests and experiments. INSECURE: anyone who knows
/// the seed knows `e`, and a known `e` leaks the message.
pub struct InsecureSeededRandomness(ChaCha8Rng);

impl InsecureSeededRandomness {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }
}

impl RandomnessSource for InsecureSeededRandomness {
    fn fill_bits(&mut self, out: &mut [u8]) {
        fill_from(&mut self.0, out);
    }

    fn is_secure(&self) -> bool {
        false
    }
}

fn fill_from<R: RngCore>(rng: &mut R, out: &mut [u8]) {
    for chunk in out.chunks_mut(64) {
        let word = rng.next_u64();
        for (k, b) in chunk.iter_mut().enumerate() {
            *b = ((word >> k) & 1) as u8;
        }
    }
}

/// All vectors of one encoding: `v_A = u`, `v_R = e`, `v_B = 0`, `x = v G_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodewordFrame {
    pub u: Vec<u8>,
    pub e: Vec<u8>,
    pub v: Vec<u8>,
    pub x: Vec<u8>,
}

/// Encodes with explicitly supplied random bits.
pub fn encode_with(spec: &WiretapCodeSpec, u: &[u8], e: &[u8]) -> Result<CodewordFrame> {
    if u.len() != spec.k() {
        return Err(Error::MessageLength {
            expected: spec.k(),
            actual: u.len(),
        });
    }
    if e.len() != spec.r_len() {
        return Err(Error::DimensionMismatch {
            context: "random bits",
            expected: spec.r_len(),
            actual: e.len(),
        });
    }
    let mut v = vec![0u8; spec.n];
    for (i, &bit) in spec.a.iter().zip(u) {
        v[i] = bit & 1;
    }
    for (i, &bit) in spec.r.iter().zip(e) {
        v[i] = bit & 1;
    }
    let mut x = v.clone();
    transform_in_place(&mut x)?;
    Ok(CodewordFrame {
        u: u.iter().map(|b| b & 1).collect(),
        e: e.iter().map(|b| b & 1).collect(),
        v,
        x,
    })
}

/// Encodes `u` with `e` drawn from `rng`.
pub fn encode(
    spec: &WiretapCodeSpec,
    u: &[u8],
    rng: &mut dyn RandomnessSource,
) -> Result<CodewordFrame> {
    if u.len() != spec.k() {
        return Err(Error::MessageLength {
            expected: spec.k(),
            actual: u.len(),
        });
    }
    let mut e = vec![0u8; spec.r_len()];
    rng.fill_bits(&mut e);
    encode_with(spec, u, &e)
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum DecodeStrategy {
    #[default]
    Sc,
    /// Branch on `X` keeping at most the configured number of paths.
    Multipath(MultipathConfig),
}

/// Bob's estimate of the whole vector `v`.
pub fn decode_vector(
    spec: &WiretapCodeSpec,
    y: &[usize],
    main: &SymmetricChannel,
    strategy: DecodeStrategy,
) -> Result<Vec<u8>> {
    if y.len() != spec.n {
        return Err(Error::DimensionMismatch {
            context: "received word",
            expected: spec.n,
            actual: y.len(),
        });
    }
    let pattern = spec.frozen_pattern();
    match strategy {
        DecodeStrategy::Sc => sc_decode(y, main, &pattern, TieBreak::DeterministicZero),
        DecodeStrategy::Multipath(cfg) => multipath_decode(y, main, &pattern, spec.branch_set(), cfg),
    }
}

/// Bob's message estimate `v_A`.
pub fn decode(
    spec: &WiretapCodeSpec,
    y: &[usize],
    main: &SymmetricChannel,
    strategy: DecodeStrategy,
) -> Result<Vec<u8>> {
    let v = decode_vector(spec, y, main, strategy)?;
    Ok(spec.a.iter().map(|i| v[i]).collect())
}

/// Eve's genie-aided estimate of `e` from `z` when `v_A` is revealed to her.
pub fn eve_attack(
    spec: &WiretapCodeSpec,
    z: &[usize],
    wiretap: &SymmetricChannel,
    revealed_u: &[u8],
) -> Result<Vec<u8>> {
    if z.len() != spec.n {
        return Err(Error::DimensionMismatch {
            context: "wiretap output",
            expected: spec.n,
            actual: z.len(),
        });
    }
    if revealed_u.len() != spec.k() {
        return Err(Error::DimensionMismatch {
            context: "revealed message",
            expected: spec.k(),
            actual: revealed_u.len(),
        });
    }
    let mut message = revealed_u.iter();
    let genie: Vec<u8> = spec
        .r
        .complement(spec.n)
        .iter()
        .map(|i| {
            if spec.a.contains(i) {
                *message.next().expect("k message bits") & 1
            } else {
                0
            }
        })
        .collect();
    sc_decode_genie(z, wiretap, &spec.r, &genie)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_bec, make_bsc};
    use crate::construction::evolve_bec;
    use crate::polar::apply_transform;
    use crate::wiretap::{build_spec, BuildOptions, DeltaSpec};
    use crate::IndexSet;
    use rand::Rng;
    use std::collections::BTreeSet;

    fn weak_spec(m: u32) -> WiretapCodeSpec {
        build_spec(&evolve_bec(0.1, m).unwrap(), &evolve_bec(0.6, m).unwrap(), BuildOptions::weak(0.3)).unwrap()
    }

    fn as_symbols(x: &[u8]) -> Vec<usize> {
        x.iter().map(|&b| b as usize).collect()
    }

    #[test]
    fn zero_message_and_zero_randomness() {
        let spec = weak_spec(6);
        let f = encode_with(&spec, &vec![0; spec.k()], &vec![0; spec.r_len()]).unwrap();
        assert!(f.x.iter().all(|&b| b == 0));
    }

    #[test]
    fn frame_invariants() {
        let spec = weak_spec(8);
        let mut src = InsecureSeededRandomness::new(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u: Vec<u8> = (0..spec.k()).map(|_| rng.gen_range(0..2)).collect();
        let f = encode(&spec, &u, &mut src).unwrap();
        assert_eq!(spec.a.iter().map(|i| f.v[i]).collect::<Vec<_>>(), u);
        assert_eq!(spec.r.iter().map(|i| f.v[i]).collect::<Vec<_>>(), f.e);
        assert!(spec.b.iter().all(|i| f.v[i] == 0));
        assert_eq!(apply_transform(&f.x).unwrap(), f.v);
    }

    #[test]
    fn wrong_message_length() {
        let spec = weak_spec(4);
        let mut src = InsecureSeededRandomness::new(0);
        assert!(matches!(
            encode(&spec, &vec![0; spec.k() + 1], &mut src),
            Err(Error::MessageLength { .. })
        ));
    }

    #[test]
    fn noiseless_round_trip() {
        let spec = weak_spec(8);
        let ch = make_bsc(0.0).unwrap();
        let mut src = SecureRandomness::new();
        assert!(src.is_secure());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let u: Vec<u8> = (0..spec.k()).map(|_| rng.gen_range(0..2)).collect();
            let f = encode(&spec, &u, &mut src).unwrap();
            let y = as_symbols(&f.x);
            assert_eq!(decode(&spec, &y, &ch, DecodeStrategy::Sc).unwrap(), u);
            let mp = DecodeStrategy::Multipath(MultipathConfig::new(4));
            assert_eq!(decode(&spec, &y, &ch, mp).unwrap(), u);
        }
    }

    #[test]
    fn codewords_form_a_coset() {
        // For fixed u, {x(u, e)} = x(u, 0) + span{rows of G_n indexed by R}.
        let spec = weak_spec(3);
        let n = spec.n;
        let u: Vec<u8> = (0..spec.k()).map(|i| (i % 2) as u8).collect();
        let base = encode_with(&spec, &u, &vec![0; spec.r_len()]).unwrap().x;
        let rows: Vec<Vec<u8>> = spec
            .r
            .iter()
            .map(|i| {
                let mut unit = vec![0u8; n];
                unit[i] = 1;
                apply_transform(&unit).unwrap()
            })
            .collect();
        let mut coset = BTreeSet::new();
        for mask in 0..1usize << rows.len() {
            let mut x = base.clone();
            for (k, row) in rows.iter().enumerate() {
                if (mask >> k) & 1 == 1 {
                    x.iter_mut().zip(row).for_each(|(a, b)| *a ^= b);
                }
            }
            coset.insert(x);
        }
        let mut produced = BTreeSet::new();
        for word in 0..1usize << spec.r_len() {
            let e: Vec<u8> = (0..spec.r_len()).map(|k| ((word >> k) & 1) as u8).collect();
            produced.insert(encode_with(&spec, &u, &e).unwrap().x);
        }
        assert_eq!(produced, coset);
        assert_eq!(produced.len(), 1 << spec.r_len());
    }

    #[test]
    fn eve_with_perfect_channel_recovers_e() {
        let spec = weak_spec(6);
        let eve = make_bec(0.0).unwrap();
        let mut src = InsecureSeededRandomness::new(8);
        let u = vec![1; spec.k()];
        let f = encode(&spec, &u, &mut src).unwrap();
        let z: Vec<usize> = f.x.iter().map(|&b| 2 * b as usize).collect();
        assert_eq!(eve_attack(&spec, &z, &eve, &u).unwrap(), f.e);
    }

    #[test]
    fn eve_attack_with_empty_r() {
        let main = evolve_bec(0.0, 3).unwrap();
        let eve = evolve_bec(1.0, 3).unwrap();
        let spec = build_spec(&main, &eve, BuildOptions::weak(0.3)).unwrap();
        assert!(spec.r.is_empty());
        let z = vec![1usize; 8];
        assert!(eve_attack(&spec, &z, &make_bec(1.0).unwrap(), &vec![0; spec.k()]).unwrap().is_empty());
    }

    #[test]
    fn strong_scheme_without_x_matches_sc() {
        let m = 8;
        let main = evolve_bec(0.05, m).unwrap();
        let eve = evolve_bec(0.5, m).unwrap();
        let spec = build_spec(&main, &eve, BuildOptions::strong(0.3, DeltaSpec::Literal(0.05))).unwrap();
        let spec = WiretapCodeSpec {
            x: IndexSet::new(),
            y: spec.r.clone(),
            ..spec
        };
        let ch = make_bec(0.05).unwrap();
        let mut src = InsecureSeededRandomness::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let u: Vec<u8> = (0..spec.k()).map(|_| rng.gen_range(0..2)).collect();
            let f = encode(&spec, &u, &mut src).unwrap();
            let y: Vec<usize> = f.x.iter().map(|&b| ch.sample(b, &mut rng)).collect();
            let a = decode(&spec, &y, &ch, DecodeStrategy::Sc).unwrap();
            let b = decode(&spec, &y, &ch, DecodeStrategy::Multipath(MultipathConfig::new(4))).unwrap();
            assert_eq!(a, b);
        }
    }
}
