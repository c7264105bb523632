use rand::RngCore;

use crate::channel::SymmetricChannel;
use crate::error::{Error, Result};
use crate::index_set::IndexSet;

use super::frozen::FrozenPattern;
use super::transform::{bit_reverse, log2_len};

/// Leaf LLRs with `|L|` at most this are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// How a tie in the likelihood decision is resolved.
pub enum TieBreak<'a> {
    /// Decide 0. Makes the decoder a pure function of its inputs.
    DeterministicZero,
    /// Decide with a fair coin drawn from the given stream.
    Random(&'a mut dyn RngCore),
}

impl TieBreak<'_> {
    fn resolve(&mut self) -> u8 {
        match self {
            TieBreak::DeterministicZero => 0,
            TieBreak::Random(rng) => (rng.next_u32() & 1) as u8,
        }
    }
}

/// Check-node combination: LLR of `a xor b`.
fn f(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        return f64::NAN;
    }
    let (x, y) = (a.abs(), b.abs());
    let mag = if x.is_infinite() && y.is_infinite() {
        f64::INFINITY
    } else {
        let d = if x.is_infinite() || y.is_infinite() {
            f64::INFINITY
        } else {
            (x - y).abs()
        };
        (x.min(y) + (-(x + y)).exp().ln_1p() - (-d).exp().ln_1p()).max(0.0)
    };
    if (a < 0.0) != (b < 0.0) {
        -mag
    } else {
        mag
    }
}

/// Variable-node combination given the left decision `s`.
fn g(a: f64, b: f64, s: u8) -> f64 {
    if s == 0 {
        b + a
    } else {
        b - a
    }
}

/// `Some(bit)` for a confident decision, `None` for a tie.
pub(crate) fn hard_decision(llr: f64, dead: bool) -> Option<u8> {
    if dead || llr.is_nan() || llr.abs() <= TIE_TOLERANCE {
        None
    } else if llr > 0.0 {
        Some(0)
    } else {
        Some(1)
    }
}

/// Successive-cancellation state over one received word.
///
/// The word is bit-reversed on entry so that `v` is decoded in natural order
/// against `G^{(x)m}`. `llr[d]` holds the `n >> d` LLRs of the current node at
/// depth `d`; `left[d]` holds the re-encoded bits of the last left child at
/// depth `d`.
#[derive(Clone, Debug)]
pub(crate) struct ScState {
    m: u32,
    llr: Vec<Vec<f64>>,
    left: Vec<Vec<u8>>,
    scratch: Vec<Vec<u8>>,
    decisions: Vec<u8>,
    dead: bool,
}

impl ScState {
    pub(crate) fn new(y: &[usize], ch: &SymmetricChannel) -> Result<Self> {
        let m = log2_len(y.len())?;
        let n = y.len();
        if let Some(&z) = y.iter().find(|&&z| z >= ch.output_size()) {
            return Err(Error::InvalidParameter(format!(
                "output symbol {z} is outside the alphabet of {}",
                ch.label()
            )));
        }
        let mut llr: Vec<Vec<f64>> = (0..=m).map(|d| vec![0.0; n >> d]).collect();
        for (j, l) in llr[0].iter_mut().enumerate() {
            *l = ch.llr(y[bit_reverse(j, m)]);
        }
        Ok(Self {
            m,
            llr,
            left: (0..=m).map(|d| vec![0; n >> d]).collect(),
            scratch: (0..=m).map(|d| vec![0; n >> d]).collect(),
            decisions: Vec::with_capacity(n),
            dead: false,
        })
    }

    pub(crate) fn n(&self) -> usize {
        1 << self.m
    }

    pub(crate) fn into_decisions(self) -> Vec<u8> {
        self.decisions
    }

    /// True once a committed bit had zero probability given the past.
    pub(crate) fn is_dead(&self) -> bool {
        self.dead
    }

    /// LLR of the next undecided bit given all earlier decisions.
    pub(crate) fn leaf_llr(&mut self) -> f64 {
        let i = self.decisions.len();
        let m = self.m as usize;
        let n = self.n();
        let start = if i == 0 {
            1
        } else {
            let d = m - i.trailing_zeros() as usize;
            let h = n >> d;
            let (lo, hi) = self.llr.split_at_mut(d);
            let parent = &lo[d - 1];
            let left = &self.left[d];
            for (j, out) in hi[0].iter_mut().enumerate().take(h) {
                *out = g(parent[j], parent[j + h], left[j]);
            }
            d + 1
        };
        for d in start..=m {
            let h = n >> d;
            let (lo, hi) = self.llr.split_at_mut(d);
            let parent = &lo[d - 1];
            for (j, out) in hi[0].iter_mut().enumerate().take(h) {
                *out = f(parent[j], parent[j + h]);
            }
        }
        self.llr[m][0]
    }

    /// Records the decision for the current bit, whose LLR was `llr`.
    pub(crate) fn commit(&mut self, bit: u8, llr: f64) {
        let impossible = llr.is_nan()
            || (bit == 0 && llr == f64::NEG_INFINITY)
            || (bit == 1 && llr == f64::INFINITY);
        self.dead |= impossible;

        let i = self.decisions.len();
        self.decisions.push(bit);
        let m = self.m as usize;
        let n = self.n();
        self.scratch[m][0] = bit;
        let mut d = m;
        while d > 0 {
            let right = (i >> (m - d)) & 1 == 1;
            if !right {
                self.left[d].copy_from_slice(&self.scratch[d]);
                return;
            }
            let h = n >> d;
            let (lo, hi) = self.scratch.split_at_mut(d);
            let parent = &mut lo[d - 1];
            let left = &self.left[d];
            for j in 0..h {
                parent[j] = left[j] ^ hi[0][j];
                parent[j + h] = hi[0][j];
            }
            d -= 1;
        }
    }
}

fn check_pattern(y: &[usize], pattern: &FrozenPattern) -> Result<()> {
    if y.len() != pattern.n() {
        return Err(Error::DimensionMismatch {
            context: "received word versus frozen pattern",
            expected: pattern.n(),
            actual: y.len(),
        });
    }
    Ok(())
}

/// Successive-cancellation estimate of `v` from `y`.
///
/// Frozen positions take their frozen value. A free bit takes the value with
/// the larger bit-channel likelihood; ties (including the case where both
/// likelihoods vanish) are resolved by `tie_break`.
pub fn sc_decode(
    y: &[usize],
    main: &SymmetricChannel,
    pattern: &FrozenPattern,
    mut tie_break: TieBreak<'_>,
) -> Result<Vec<u8>> {
    check_pattern(y, pattern)?;
    let mut state = ScState::new(y, main)?;
    for i in 0..y.len() {
        let llr = state.leaf_llr();
        let bit = match pattern.value(i) {
            Some(b) => b,
            None => hard_decision(llr, state.is_dead()).unwrap_or_else(|| tie_break.resolve()),
        };
        state.commit(bit, llr);
    }
    Ok(state.into_decisions())
}

/// Successive cancellation with the bits outside `free_set` supplied by a
/// genie; returns the estimates on `free_set` in increasing index order.
pub fn sc_decode_genie(
    y: &[usize],
    main: &SymmetricChannel,
    free_set: &IndexSet,
    genie_values: &[u8],
) -> Result<Vec<u8>> {
    let n = y.len();
    let pattern = FrozenPattern::new(n, free_set.complement(n), genie_values)?;
    let v = sc_decode(y, main, &pattern, TieBreak::DeterministicZero)?;
    Ok(free_set.iter().map(|i| v[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_bec, make_bsc, BEC_ERASURE};
    use crate::polar::apply_transform;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Decides bit by bit from `W_i(y, v^{i-1} | b)` computed by summing
    /// `W^n(y | v G_n)` over all continuations.
    fn brute_force_decode(y: &[usize], ch: &SymmetricChannel, pattern: &FrozenPattern) -> Vec<u8> {
        let n = y.len();
        let likelihood = |v: &[u8]| -> f64 {
            let x = apply_transform(v).unwrap();
            x.iter()
                .zip(y)
                .map(|(&xj, &yj)| ch.transition(xj, yj))
                .product()
        };
        let mut v = vec![0u8; n];
        for i in 0..n {
            let tail = n - i - 1;
            let mut p = [0.0f64; 2];
            for (b, pb) in p.iter_mut().enumerate() {
                v[i] = b as u8;
                for rest in 0..1usize << tail {
                    for k in 0..tail {
                        v[i + 1 + k] = ((rest >> k) & 1) as u8;
                    }
                    *pb += likelihood(&v);
                }
            }
            v[i] = match pattern.value(i) {
                Some(b) => b,
                None => {
                    if p[0] == 0.0 && p[1] == 0.0 {
                        0
                    } else {
                        let l = p[0].ln() - p[1].ln();
                        if l.abs() <= TIE_TOLERANCE || l > 0.0 {
                            0
                        } else {
                            1
                        }
                    }
                }
            };
        }
        v
    }

    fn patterns(n: usize) -> Vec<FrozenPattern> {
        let mut out = vec![FrozenPattern::none(n)];
        let frozen: IndexSet = (0..n / 2).collect();
        out.push(FrozenPattern::zeros(n, frozen.clone()).unwrap());
        let ones = vec![1; frozen.len()];
        out.push(FrozenPattern::new(n, frozen, &ones).unwrap());
        out
    }

    #[test]
    fn f_handles_infinities() {
        assert_eq!(f(f64::INFINITY, f64::INFINITY), f64::INFINITY);
        assert_eq!(f(f64::INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(f(f64::INFINITY, 2.5), 2.5);
        assert_eq!(f(-3.0, f64::INFINITY), -3.0);
        assert_eq!(f(0.0, 5.0), 0.0);
        assert!(f(f64::NAN, 1.0).is_nan());
        // 2 atanh(tanh(a/2) tanh(b/2)) on moderate values.
        let (a, b) = (1.3f64, -0.7f64);
        let exact = 2.0 * ((a / 2.0).tanh() * (b / 2.0).tanh()).atanh();
        assert!((f(a, b) - exact).abs() < 1e-14);
    }

    #[test]
    fn sc_matches_brute_force_on_bsc_exhaustively() {
        for m in 1..=3u32 {
            let n = 1usize << m;
            for p in [0.1, 0.3] {
                let ch = make_bsc(p).unwrap();
                for pattern in patterns(n) {
                    for word in 0..1usize << n {
                        let y: Vec<usize> = (0..n).map(|j| (word >> j) & 1).collect();
                        let got = sc_decode(&y, &ch, &pattern, TieBreak::DeterministicZero).unwrap();
                        assert_eq!(got, brute_force_decode(&y, &ch, &pattern), "p={p} y={y:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn sc_matches_brute_force_on_bec_erasure_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 1..=3u32 {
            let n = 1usize << m;
            let ch = make_bec(0.5).unwrap();
            for pattern in patterns(n) {
                for _ in 0..4 {
                    let v: Vec<u8> = (0..n)
                        .map(|i| pattern.value(i).unwrap_or_else(|| rng.gen_range(0..2)))
                        .collect();
                    let x = apply_transform(&v).unwrap();
                    for erasures in 0..1usize << n {
                        let y: Vec<usize> = (0..n)
                            .map(|j| {
                                if (erasures >> j) & 1 == 1 {
                                    BEC_ERASURE
                                } else {
                                    2 * x[j] as usize
                                }
                            })
                            .collect();
                        let got = sc_decode(&y, &ch, &pattern, TieBreak::DeterministicZero).unwrap();
                        assert_eq!(got, brute_force_decode(&y, &ch, &pattern), "y={y:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn sc_matches_brute_force_on_all_ternary_words() {
        // Includes words that no codeword can produce.
        let ch = make_bec(0.3).unwrap();
        let n = 4;
        for pattern in patterns(n) {
            for word in 0..81usize {
                let y: Vec<usize> = (0..n).map(|j| (word / 3usize.pow(j as u32)) % 3).collect();
                let got = sc_decode(&y, &ch, &pattern, TieBreak::DeterministicZero).unwrap();
                assert_eq!(got, brute_force_decode(&y, &ch, &pattern), "y={y:?}");
            }
        }
    }

    #[test]
    fn noiseless_channel_inverts_the_transform() {
        let ch = make_bsc(0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in 0..=10u32 {
            let n = 1usize << m;
            let v: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let y: Vec<usize> = apply_transform(&v).unwrap().iter().map(|&b| b as usize).collect();
            let got = sc_decode(&y, &ch, &FrozenPattern::none(n), TieBreak::DeterministicZero).unwrap();
            assert_eq!(got, v);
        }
    }

    #[test]
    fn random_ties_use_the_stream() {
        // Everything erased: every free bit is a tie.
        let ch = make_bec(1.0).unwrap();
        let y = vec![BEC_ERASURE; 64];
        let pattern = FrozenPattern::none(64);
        let zero = sc_decode(&y, &ch, &pattern, TieBreak::DeterministicZero).unwrap();
        assert!(zero.iter().all(|&b| b == 0));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let random = sc_decode(&y, &ch, &pattern, TieBreak::Random(&mut rng)).unwrap();
        assert!(random.contains(&1));
    }

    #[test]
    fn genie_decoder() {
        let ch = make_bsc(0.0).unwrap();
        let v = [1u8, 0, 1, 1, 0, 0, 1, 0];
        let y: Vec<usize> = apply_transform(&v).unwrap().iter().map(|&b| b as usize).collect();
        let free = IndexSet::from_indices([2, 5, 7]);
        let genie: Vec<u8> = free.complement(8).iter().map(|i| v[i]).collect();
        assert_eq!(sc_decode_genie(&y, &ch, &free, &genie).unwrap(), vec![1, 0, 0]);

        let all = IndexSet::full(8);
        let empty = IndexSet::new();
        assert!(sc_decode_genie(&y, &ch, &empty, &v).unwrap().is_empty());
        assert!(matches!(
            sc_decode_genie(&y, &ch, &empty, &v[..3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(sc_decode_genie(&y, &ch, &all, &[]).unwrap(), v.to_vec());
    }

    #[test]
    fn dimension_errors() {
        let ch = make_bsc(0.1).unwrap();
        assert!(sc_decode(&[0; 4], &ch, &FrozenPattern::none(8), TieBreak::DeterministicZero).is_err());
        assert!(sc_decode(&[0, 2], &ch, &FrozenPattern::none(2), TieBreak::DeterministicZero).is_err());
    }
}
