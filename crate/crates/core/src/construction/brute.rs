use crate::channel::SymmetricChannel;
use crate::error::{Error, Result};
use crate::polar::apply_transform;

use super::quality::{BitChannelBounds, BitChannelQuality, QualityMethod};

/// Largest `2^n |Z|^n` table the enumeration will build.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

/// `W^n(y | x)` for every `y`, as base-`|Z|` digits with `y_0` least
/// significant.
pub(crate) fn product_row(ch: &SymmetricChannel, x: &[u8]) -> Vec<f64> {
    let outputs = ch.output_size();
    // Kronecker product of the rows W(.|x_k), built from the last coordinate
    // down so that y_0 varies fastest.
    let mut row = vec![1.0];
    for &xk in x.iter().rev() {
        row = row
            .iter()
            .flat_map(|&acc| (0..outputs).map(move |z| (acc, z)))
            .map(|(acc, z)| acc * ch.transition(xk, z))
            .collect();
    }
    row
}

/// `W^n(y | v G_n)` for every `v` (rows, bit `k` of the row index is `v_k`)
/// and every `y` (columns, see [`product_row`]).
pub(crate) fn vector_channel_table(ch: &SymmetricChannel, n: usize) -> Vec<Vec<f64>> {
    (0..1usize << n)
        .map(|word| product_row(ch, &apply_transform(&word_bits(word, n)).expect("power-of-two length")))
        .collect()
}

/// The low `n` bits of `word`, bit `k` at position `k`.
pub(crate) fn word_bits(word: usize, n: usize) -> Vec<u8> {
    (0..n).map(|k| ((word >> k) & 1) as u8).collect()
}

/// Exact `Z(W_i)` and `C(W_i)` by summing the bit-channel definition
/// `W_i(y, v_1..v_{i-1} | v_i) = 2^{-(n-1)} sum_{v_{i+1}..v_n} W^n(y | v G_n)`.
pub fn brute_force_bitchannels(ch: &SymmetricChannel, m: u32) -> Result<BitChannelQuality> {
    if m > 3 {
        return Err(Error::InvalidParameter(format!(
            "brute-force enumeration supports m <= 3, got {m}"
        )));
    }
    let n = 1usize << m;
    let terms = (1u128 << n) * (ch.output_size() as u128).pow(n as u32);
    if terms > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            terms,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let table = vector_channel_table(ch, n);
    let columns = table[0].len();
    let scale = 0.5f64.powi(n as i32 - 1);

    let mut bounds = Vec::with_capacity(n);
    for i in 0..n {
        // w[prefix][b][y] = W_i(y, prefix | b)
        let prefixes = 1usize << i;
        let mut w = vec![[vec![0.0; columns], vec![0.0; columns]]; prefixes];
        for (word, row) in table.iter().enumerate() {
            let prefix = word & (prefixes - 1);
            let b = (word >> i) & 1;
            for (acc, p) in w[prefix][b].iter_mut().zip(row) {
                *acc += scale * p;
            }
        }
        let mut z = 0.0;
        let mut info = 0.0;
        for [w0, w1] in &w {
            for (&a, &b) in w0.iter().zip(w1) {
                z += (a * b).sqrt();
                let mid = 0.5 * (a + b);
                for p in [a, b] {
                    if p > 0.0 {
                        info += 0.5 * p * (p / mid).log2();
                    }
                }
            }
        }
        let z = z.clamp(0.0, 1.0);
        let c = info.clamp(0.0, 1.0);
        bounds.push(BitChannelBounds::exact(z, c, 1.0 - z));
    }
    Ok(BitChannelQuality::new_unchecked(bounds, QualityMethod::BruteForce))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_bec, make_bsc, SymmetricChannel};

    #[test]
    fn single_use_is_the_channel() {
        let ch = make_bsc(0.2).unwrap();
        let q = brute_force_bitchannels(&ch, 0).unwrap();
        assert!((q.get(0).z_upper - ch.bhattacharyya()).abs() < 1e-15);
        assert!((q.get(0).c_upper - ch.capacity()).abs() < 1e-15);
    }

    #[test]
    fn plus_branch_squares_z() {
        let ch = make_bsc(0.1).unwrap();
        let q = brute_force_bitchannels(&ch, 1).unwrap();
        let z = ch.bhattacharyya();
        assert!((q.get(1).z_upper - z * z).abs() < 1e-15);
        // BSC^- is BSC(2p(1-p)).
        let pm: f64 = 2.0 * 0.1 * 0.9;
        assert!((q.get(0).z_upper - 2.0 * (pm * (1.0 - pm)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn capacity_is_conserved() {
        let ch = make_bsc(0.3).unwrap();
        let q = brute_force_bitchannels(&ch, 3).unwrap();
        let (total, _) = q.total_capacity();
        assert!((total - 8.0 * ch.capacity()).abs() < 1e-12);
    }

    #[test]
    fn guard_trips() {
        let wide = SymmetricChannel::from_matrix(
            vec![vec![0.4, 0.3, 0.2, 0.1], vec![0.1, 0.2, 0.3, 0.4]],
            "four",
        )
        .unwrap();
        assert!(matches!(
            brute_force_bitchannels(&wide, 3),
            Err(Error::TooLarge { .. })
        ));
        assert!(brute_force_bitchannels(&make_bec(0.5).unwrap(), 4).is_err());
    }
}
