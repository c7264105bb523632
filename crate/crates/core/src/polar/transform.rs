use crate::error::{Error, Result};

/// Block length `n = 2^m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransformSpec {
    m: u32,
}

impl TransformSpec {
    pub fn new(m: u32) -> Self {
        Self { m }
    }

    pub fn from_len(n: usize) -> Result<Self> {
        log2_len(n).map(Self::new)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        1 << self.m
    }

    pub fn apply(&self, v: &[u8]) -> Result<Vec<u8>> {
        if v.len() != self.n() {
            return Err(Error::DimensionMismatch {
                context: "transform input",
                expected: self.n(),
                actual: v.len(),
            });
        }
        apply_transform(v)
    }
}

/// `m` with `n = 2^m`, or an error if `n` is not a power of two.
pub fn log2_len(n: usize) -> Result<u32> {
    if n.is_power_of_two() {
        Ok(n.trailing_zeros())
    } else {
        Err(Error::NotPowerOfTwo(n))
    }
}

/// Reverses the low `m` bits of `i`.
pub fn bit_reverse(i: usize, m: u32) -> usize {
    if m == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - m)
    }
}

pub fn bit_reversal_permutation(m: u32) -> Vec<usize> {
    (0..1usize << m).map(|i| bit_reverse(i, m)).collect()
}

/// `x = v P_n G^{(x)m}` over GF(2), in place.
pub fn transform_in_place(w: &mut [u8]) -> Result<()> {
    let m = log2_len(w.len())?;
    let n = w.len();
    for i in 0..n {
        let r = bit_reverse(i, m);
        if i < r {
            w.swap(i, r);
        }
    }
    let mut h = 1;
    while h < n {
        for block in w.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        h *= 2;
    }
    Ok(())
}

/// `x = v G_n`. Applying it twice returns `v`.
pub fn apply_transform(v: &[u8]) -> Result<Vec<u8>> {
    let mut w = v.to_vec();
    transform_in_place(&mut w)?;
    Ok(w)
}
