use serde::{Deserialize, Serialize};

use crate::channel::{is_strongly_symmetric, SymmetricChannel};
use crate::construction::{product_row, BitChannelQuality};
use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::polar::{apply_transform, log2_len};

use super::{enumeration_guard, mutual_information, ORACLE_TOLERANCE};

/// Entrywise tolerance for the symmetry checks.
const ENTRY_TOLERANCE: f64 = 1e-12;

/// The channel from `v_{R^c}` to Eve's output when `v_R` is uniform.
#[derive(Clone, Debug, PartialEq)]
pub struct InducedChannel {
    pub n: usize,
    /// Randomized positions.
    pub r: IndexSet,
    /// Input positions `R^c`; bit `j` of a row index is `v` at `inputs[j]`.
    pub inputs: IndexSet,
    /// Output alphabet size of one wiretap use.
    pub symbol_outputs: usize,
    /// Involution `pi_1` of the wiretap channel.
    pub involution: Vec<usize>,
    /// `q[x][z]`, columns as base-`|Z|` digits with `z_0` least significant.
    pub q: Vec<Vec<f64>>,
}

impl InducedChannel {
    fn embed(&self, x: usize) -> Vec<u8> {
        let mut v = vec![0u8; self.n];
        for (j, i) in self.inputs.iter().enumerate() {
            v[i] = ((x >> j) & 1) as u8;
        }
        v
    }

    /// `a ∘ z`: applies `pi_1` to `z_j` wherever `(a; 0) G_n` has a one.
    pub fn act(&self, a: usize, z: usize) -> usize {
        let x = apply_transform(&self.embed(a)).expect("power-of-two length");
        let base = self.symbol_outputs;
        let mut rest = z;
        let mut out = 0;
        let mut place = 1;
        for &xj in &x {
            let digit = rest % base;
            rest /= base;
            let mapped = if xj == 1 { self.involution[digit] } else { digit };
            out += mapped * place;
            place *= base;
        }
        out
    }
}

pub fn build_induced_channel(
    wiretap: &SymmetricChannel,
    r: &IndexSet,
    n: usize,
) -> Result<InducedChannel> {
    log2_len(n)?;
    if r.max().is_some_and(|i| i >= n) {
        return Err(Error::InvalidParameter(format!("R has an index beyond n = {n}")));
    }
    enumeration_guard(n, wiretap.output_size())?;
    let inputs = r.complement(n);
    let mut induced = InducedChannel {
        n,
        r: r.clone(),
        inputs,
        symbol_outputs: wiretap.output_size(),
        involution: wiretap.involution().to_vec(),
        q: Vec::new(),
    };
    let weight = 1.0 / (1usize << r.len()) as f64;
    let columns = wiretap.output_size().pow(n as u32);
    induced.q = (0..1usize << induced.inputs.len())
        .map(|x| {
            let mut row = vec![0.0; columns];
            for e in 0..1usize << r.len() {
                let mut v = induced.embed(x);
                for (j, i) in r.iter().enumerate() {
                    v[i] = ((e >> j) & 1) as u8;
                }
                let w = product_row(wiretap, &apply_transform(&v).expect("power-of-two length"));
                for (acc, p) in row.iter_mut().zip(w) {
                    *acc += weight * p;
                }
            }
            row
        })
        .collect();
    Ok(induced)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryVerdict {
    pub symmetric: bool,
    pub row_stochastic: bool,
    /// `Q(z | a + x) = Q(a ∘ z | x)` on every triple.
    pub covariance_holds: bool,
    pub max_covariance_error: f64,
    /// Output columns grouped into orbits of the action.
    pub orbits: Vec<Vec<usize>>,
    /// Positions in `orbits` whose submatrix is not strongly symmetric.
    pub asymmetric_orbits: Vec<usize>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Verifies that `Q` is symmetric under the action `a ∘ z`.
pub fn check_induced_symmetry(q: &InducedChannel) -> SymmetryVerdict {
    let rows = q.q.len();
    let columns = q.q.first().map_or(0, Vec::len);
    let row_stochastic = q.q.iter().all(|row| {
        row.iter().all(|&p| p >= 0.0) && (row.iter().sum::<f64>() - 1.0).abs() <= ENTRY_TOLERANCE
    });

    let action: Vec<Vec<usize>> = (0..rows)
        .map(|a| (0..columns).map(|z| q.act(a, z)).collect())
        .collect();
    let mut max_covariance_error: f64 = 0.0;
    for a in 0..rows {
        for x in 0..rows {
            for z in 0..columns {
                let err = (q.q[a ^ x][z] - q.q[x][action[a][z]]).abs();
                max_covariance_error = max_covariance_error.max(err);
            }
        }
    }
    let covariance_holds = max_covariance_error <= ENTRY_TOLERANCE;

    let mut parent: Vec<usize> = (0..columns).collect();
    for j in 0..q.inputs.len() {
        for z in 0..columns {
            let (p, r) = (find(&mut parent, z), find(&mut parent, action[1 << j][z]));
            if p != r {
                parent[p.max(r)] = p.min(r);
            }
        }
    }
    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); columns];
    for z in 0..columns {
        let root = find(&mut parent, z);
        by_root[root].push(z);
    }
    let orbits: Vec<Vec<usize>> = by_root.into_iter().filter(|o| !o.is_empty()).collect();
    let asymmetric_orbits: Vec<usize> = orbits
        .iter()
        .enumerate()
        .filter(|(_, orbit)| {
            let sub: Vec<Vec<f64>> = q.q.iter().map(|row| orbit.iter().map(|&z| row[z]).collect()).collect();
            !is_strongly_symmetric(&sub, ENTRY_TOLERANCE)
        })
        .map(|(i, _)| i)
        .collect();

    SymmetryVerdict {
        symmetric: row_stochastic && covariance_holds && asymmetric_orbits.is_empty(),
        row_stochastic,
        covariance_holds,
        max_covariance_error,
        orbits,
        asymmetric_orbits,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedCapacity {
    /// `C(Q)` from the uniform input.
    pub capacity: f64,
    /// `sum_{i in R^c} C(W_i)` from certified upper bounds.
    pub bound: f64,
    pub holds: bool,
}

pub fn induced_capacity_check(
    q: &InducedChannel,
    q_wiretap: &BitChannelQuality,
) -> Result<InducedCapacity> {
    if q_wiretap.n() != q.n {
        return Err(Error::DimensionMismatch {
            context: "wiretap quality table",
            expected: q.n,
            actual: q_wiretap.n(),
        });
    }
    let prior = vec![1.0 / q.q.len() as f64; q.q.len()];
    let capacity = mutual_information(&prior, &q.q);
    let bound: f64 = q.inputs.iter().map(|i| q_wiretap.get(i).c_upper).sum();
    Ok(InducedCapacity {
        capacity,
        bound,
        holds: capacity <= bound + ORACLE_TOLERANCE,
    })
}
