use crate::error::{Error, Result};

use super::quality::{BitChannelBounds, BitChannelQuality, QualityMethod};

/// Exact Bhattacharyya parameters of the bit-channels of `BEC(eps)`.
///
/// Each bit-channel is itself an erasure channel, so `C(W_i) = 1 - Z(W_i)`.
/// Index `2j` is the minus transform of index `j` at the previous level and
/// `2j + 1` the plus transform.
pub fn evolve_bec(eps: f64, m: u32) -> Result<BitChannelQuality> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "erasure probability {eps} is outside [0, 1]"
        )));
    }
    // (z, 1 - z) pairs; both are tracked to keep precision at either end.
    let mut level = vec![(eps, 1.0 - eps)];
    for _ in 0..m {
        level = level
            .iter()
            .flat_map(|&(z, g)| [(z * (1.0 + g), g * g), (z * z, g * (1.0 + z))])
            .collect();
    }
    let bounds = level
        .into_iter()
        .map(|(z, g)| BitChannelBounds::exact(z.min(1.0), g.min(1.0), g.min(1.0)))
        .collect();
    Ok(BitChannelQuality::new_unchecked(bounds, QualityMethod::Exact))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_level() {
        let q = evolve_bec(0.5, 1).unwrap();
        assert_eq!(q.get(0).z_upper, 0.75);
        assert_eq!(q.get(1).z_upper, 0.25);
    }

    #[test]
    fn perfect_channel_stays_perfect() {
        let q = evolve_bec(0.0, 6).unwrap();
        assert!(q.bounds().iter().all(|b| b.z_upper == 0.0 && b.c_lower == 1.0));
    }

    #[test]
    fn capacity_is_conserved() {
        for m in [0, 4, 10, 16] {
            let q = evolve_bec(0.3, m).unwrap();
            let (total, _) = q.total_capacity();
            assert!((total / q.n() as f64 - 0.7).abs() < 1e-9, "m={m}");
        }
    }

    #[test]
    fn two_level_closed_form() {
        // minus: 2z - z^2, plus: z^2, applied twice from z = 0.5.
        let minus = |z: f64| 2.0 * z - z * z;
        let plus = |z: f64| z * z;
        let z = 0.5;
        let expected = [minus(minus(z)), plus(minus(z)), minus(plus(z)), plus(plus(z))];
        let q = evolve_bec(z, 2).unwrap();
        for (b, e) in q.bounds().iter().zip(expected) {
            assert!((b.z_upper - e).abs() < 1e-15);
        }
    }
}
