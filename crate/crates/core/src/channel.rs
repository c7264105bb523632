//! Binary-input symmetric memoryless channels.
//!
//! A [`SymmetricChannel`] stores its 2 x |Z| transition matrix together with the
//! output involution `pi_1` satisfying `W(z|0) = W(pi_1(z)|1)`. The involution
//! is what the decoders, the channel sampler and the induced-channel group
//! action are built on.

use std::cmp::Ordering;
use std::f64::consts::LN_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row sums must be within this distance of one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Entries closer than this are considered equal when recovering symmetry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Binary entropy in bits, with `h2(0) = h2(1) = 0`.
pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

fn xlog2x_ratio(p: f64, q: f64) -> f64 {
    if p > 0.0 {
        p * (p / q).log2()
    } else {
        0.0
    }
}

/// A row-stochastic matrix over arbitrary finite input and output alphabets.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    /// Validates and (within [`ROW_SUM_TOLERANCE`]) renormalizes the rows.
    pub fn new(mut rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || width == 0 {
            return Err(Error::InvalidParameter("transition matrix is empty".into()));
        }
        for (r, row) in rows.iter_mut().enumerate() {
            if row.len() != width {
                return Err(Error::DimensionMismatch {
                    context: "transition matrix row",
                    expected: width,
                    actual: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::InvalidParameter(format!(
                    "transition probability {bad} in row {r} is outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RowSum {
                    row: r,
                    sum,
                    tolerance: ROW_SUM_TOLERANCE,
                });
            }
            if sum != 1.0 {
                row.iter_mut().for_each(|p| *p /= sum);
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, x: usize, z: usize) -> f64 {
        self.rows[x][z]
    }

    /// `I(X; Z)` in bits for the given input distribution.
    pub fn mutual_information(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.inputs() {
            return Err(Error::DimensionMismatch {
                context: "input distribution",
                expected: self.inputs(),
                actual: input.len(),
            });
        }
        let mut output = vec![0.0; self.outputs()];
        for (px, row) in input.iter().zip(&self.rows) {
            for (q, w) in output.iter_mut().zip(row) {
                *q += px * w;
            }
        }
        let mut info = 0.0;
        for (px, row) in input.iter().zip(&self.rows) {
            if *px == 0.0 {
                continue;
            }
            for (w, q) in row.iter().zip(&output) {
                info += px * xlog2x_ratio(*w, *q);
            }
        }
        Ok(info.max(0.0))
    }
}

/// Output-symmetry certificate of a binary-input channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputSymmetry {
    /// `pi_1`, an involution on the output alphabet.
    pub involution: Vec<usize>,
    /// Orbits `{z, pi_1(z)}`, each a strongly symmetric column block.
    pub orbits: Vec<Vec<usize>>,
}

/// Searches for an involution `pi_1` with `W(z|0) = W(pi_1(z)|1)`.
///
/// Returns `None` when the matrix does not have two rows or no such pairing of
/// the columns exists.
pub fn verify_output_symmetric(matrix: &TransitionMatrix) -> Option<OutputSymmetry> {
    if matrix.inputs() != 2 {
        return None;
    }
    let w0 = &matrix.rows[0];
    let w1 = &matrix.rows[1];
    let outputs = matrix.outputs();
    let close = |a: f64, b: f64| (a - b).abs() <= SYMMETRY_TOLERANCE;

    let mut order: Vec<usize> = (0..outputs).collect();
    order.sort_by(|&a, &b| {
        w0[a]
            .total_cmp(&w0[b])
            .then_with(|| w1[a].total_cmp(&w1[b]))
    });
    let sorted_w0: Vec<f64> = order.iter().map(|&z| w0[z]).collect();

    let mut involution = vec![usize::MAX; outputs];
    for &z in &order {
        if involution[z] != usize::MAX {
            continue;
        }
        if close(w0[z], w1[z]) {
            involution[z] = z;
            continue;
        }
        // Partner z' must satisfy W(z'|0) = W(z|1) and W(z'|1) = W(z|0).
        let start = sorted_w0.partition_point(|&a| a < w1[z] - SYMMETRY_TOLERANCE);
        let partner = order[start..]
            .iter()
            .take_while(|&&c| w0[c] <= w1[z] + SYMMETRY_TOLERANCE)
            .copied()
            .find(|&c| c != z && involution[c] == usize::MAX && close(w1[c], w0[z]));
        {
            let c = partner?;
            involution[z] = c;
            involution[c] = z;
        }
    }

    let mut orbits = Vec::new();
    for z in 0..outputs {
        let p = involution[z];
        match p.cmp(&z) {
            Ordering::Equal => orbits.push(vec![z]),
            Ordering::Greater => orbits.push(vec![z, p]),
            Ordering::Less => {}
        }
    }
    Some(OutputSymmetry { involution, orbits })
}

/// True when all rows are permutations of each other and all columns are
/// permutations of each other, entrywise within `tolerance`.
pub fn is_strongly_symmetric(rows: &[Vec<f64>], tolerance: f64) -> bool {
    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }
    fn same(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }
    let Some(first) = rows.first() else {
        return true;
    };
    let width = first.len();
    if rows.iter().any(|r| r.len() != width) {
        return false;
    }
    let reference_row = sorted(first.clone());
    if !rows
        .iter()
        .all(|r| same(&sorted(r.clone()), &reference_row, tolerance))
    {
        return false;
    }
    let column = |c: usize| sorted(rows.iter().map(|r| r[c]).collect());
    let reference_col = column(0);
    (1..width).all(|c| same(&column(c), &reference_col, tolerance))
}

/// Capacity and Bhattacharyya parameter of a channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelMeasures {
    pub capacity_bits: f64,
    pub bhattacharyya: f64,
}

/// A finite binary-input output-symmetric memoryless channel.
#[derive(Clone, Debug)]
pub struct SymmetricChannel {
    label: String,
    matrix: TransitionMatrix,
    involution: Vec<usize>,
    cumulative: [Vec<f64>; 2],
    llr: Vec<f64>,
}

impl PartialEq for SymmetricChannel {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix && self.involution == other.involution
    }
}

impl SymmetricChannel {
    /// Builds a channel from a 2 x |Z| matrix, recovering `pi_1`.
    pub fn from_matrix(rows: Vec<Vec<f64>>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let matrix = TransitionMatrix::new(rows)?;
        if matrix.inputs() != 2 {
            return Err(Error::DimensionMismatch {
                context: "binary-input channel rows",
                expected: 2,
                actual: matrix.inputs(),
            });
        }
        let symmetry =
            verify_output_symmetric(&matrix).ok_or_else(|| Error::NotSymmetric(label.clone()))?;
        Ok(Self::assemble(label, matrix, symmetry.involution))
    }

    fn assemble(label: String, matrix: TransitionMatrix, involution: Vec<usize>) -> Self {
        let cumulative = [0, 1].map(|x| {
            let mut acc = 0.0;
            matrix.rows[x]
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect()
        });
        let llr = (0..matrix.outputs())
            .map(|z| {
                let (a, b) = (matrix.rows[0][z], matrix.rows[1][z]);
                if a == 0.0 && b == 0.0 {
                    f64::NAN
                } else {
                    a.ln() - b.ln()
                }
            })
            .collect();
        Self {
            label,
            matrix,
            involution,
            cumulative,
            llr,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &TransitionMatrix {
        &self.matrix
    }

    pub fn output_size(&self) -> usize {
        self.matrix.outputs()
    }

    /// `W(z|x)`.
    pub fn transition(&self, x: u8, z: usize) -> f64 {
        self.matrix.rows[x as usize][z]
    }

    pub fn involution(&self) -> &[usize] {
        &self.involution
    }

    /// The group action `x.z = pi_x(z)` of `F_2` on the output alphabet.
    pub fn act(&self, x: u8, z: usize) -> usize {
        if x == 0 {
            z
        } else {
            self.involution[z]
        }
    }

    /// Natural log-likelihood ratio `ln W(z|0)/W(z|1)`; NaN for a symbol that
    /// has probability zero under both inputs.
    pub fn llr(&self, z: usize) -> f64 {
        self.llr[z]
    }

    pub fn capacity(&self) -> f64 {
        self.matrix
            .mutual_information(&[0.5, 0.5])
            .expect("binary input")
            .min(1.0)
    }

    pub fn bhattacharyya(&self) -> f64 {
        let w = &self.matrix.rows;
        w[0].iter()
            .zip(&w[1])
            .map(|(a, b)| (a * b).sqrt())
            .sum::<f64>()
            .min(1.0)
    }

    pub fn measures(&self) -> ChannelMeasures {
        ChannelMeasures {
            capacity_bits: self.capacity(),
            bhattacharyya: self.bhattacharyya(),
        }
    }

    /// Draws an output symbol from row `x`.
    pub fn sample<R: Rng + ?Sized>(&self, x: u8, rng: &mut R) -> usize {
        let cum = &self.cumulative[x as usize];
        let u: f64 = rng.gen();
        let z = cum.partition_point(|&c| c <= u);
        if z < cum.len() {
            z
        } else {
            // u landed in the rounding slack above the last partial sum.
            let row = &self.matrix.rows[x as usize];
            row.iter().rposition(|&p| p > 0.0).unwrap_or(0)
        }
    }

    /// Draws a noise symbol `N ~ W(.|0)`; the output for input `x` is
    /// `act(x, N)`, which is distributed as `W(.|x)`.
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sample(0, rng)
    }

    /// Mean and standard deviation (nats) of the per-symbol log-loss
    /// `-ln W(Z|X)` under uniform input.
    pub fn log_loss_moments(&self) -> (f64, f64) {
        let mut mean = 0.0;
        let mut second = 0.0;
        for row in &self.matrix.rows {
            for &p in row.iter().filter(|&&p| p > 0.0) {
                let loss = -p.ln();
                mean += 0.5 * p * loss;
                second += 0.5 * p * loss * loss;
            }
        }
        (mean, (second - mean * mean).max(0.0).sqrt())
    }
}

/// `BSC(p)` with outputs `{0, 1}`.
pub fn make_bsc(p: f64) -> Result<SymmetricChannel> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "BSC crossover probability {p} is outside [0, 1/2]"
        )));
    }
    let matrix = TransitionMatrix::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])?;
    Ok(SymmetricChannel::assemble(
        format!("BSC({p})"),
        matrix,
        vec![1, 0],
    ))
}

/// `BEC(eps)` with outputs `{0, erasure, 1}` at indices 0, 1, 2.
pub fn make_bec(eps: f64) -> Result<SymmetricChannel> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "BEC erasure probability {eps} is outside [0, 1]"
        )));
    }
    let matrix = TransitionMatrix::new(vec![
        vec![1.0 - eps, eps, 0.0],
        vec![0.0, eps, 1.0 - eps],
    ])?;
    Ok(SymmetricChannel::assemble(
        format!("BEC({eps})"),
        matrix,
        vec![2, 1, 0],
    ))
}

/// Index of the erasure symbol produced by [`make_bec`].
pub const BEC_ERASURE: usize = 1;

pub fn capacity(ch: &SymmetricChannel) -> f64 {
    ch.capacity()
}

pub fn bhattacharyya(ch: &SymmetricChannel) -> f64 {
    ch.bhattacharyya()
}

/// `W_2(z|x) = sum_y W_1(y|x) W_3(z|y)`.
pub fn cascade(c1: &SymmetricChannel, c3: &TransitionMatrix) -> Result<SymmetricChannel> {
    if c3.inputs() != c1.output_size() {
        return Err(Error::DimensionMismatch {
            context: "cascade inner alphabet",
            expected: c1.output_size(),
            actual: c3.inputs(),
        });
    }
    let rows = (0..2u8)
        .map(|x| {
            (0..c3.outputs())
                .map(|z| {
                    (0..c1.output_size())
                        .map(|y| c1.transition(x, y) * c3.get(y, z))
                        .sum::<f64>()
                        .clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect();
    SymmetricChannel::from_matrix(rows, format!("cascade({}, ..)", c1.label()))
}

/// Draws one output of `ch` for input `x`.
pub fn sample<R: Rng + ?Sized>(ch: &SymmetricChannel, x: u8, rng: &mut R) -> usize {
    ch.sample(x, rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Bsc,
    Bec,
    Matrix,
}

/// JSON channel descriptor:
/// `{"kind": "bsc"|"bec"|"matrix", "param": number, "matrix": [[..],[..]], "label": string}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDescriptor {
    pub kind: ChannelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl ChannelDescriptor {
    pub fn bsc(p: f64) -> Self {
        Self {
            kind: ChannelKind::Bsc,
            param: Some(p),
            matrix: None,
            label: None,
        }
    }

    pub fn bec(eps: f64) -> Self {
        Self {
            kind: ChannelKind::Bec,
            param: Some(eps),
            matrix: None,
            label: None,
        }
    }

    pub fn matrix(rows: Vec<Vec<f64>>, label: impl Into<String>) -> Self {
        Self {
            kind: ChannelKind::Matrix,
            param: None,
            matrix: Some(rows),
            label: Some(label.into()),
        }
    }

    /// The same descriptor with its parameter replaced (used by sweeps).
    pub fn with_param(&self, param: f64) -> Result<Self> {
        if self.kind == ChannelKind::Matrix {
            return Err(Error::InvalidParameter(
                "a matrix channel has no sweepable parameter".into(),
            ));
        }
        Ok(Self {
            param: Some(param),
            label: None,
            ..self.clone()
        })
    }

    pub fn build(&self) -> Result<SymmetricChannel> {
        let param = || {
            self.param.ok_or_else(|| {
                Error::InvalidParameter(format!("{:?} descriptor needs `param`", self.kind))
            })
        };
        let mut ch = match self.kind {
            ChannelKind::Bsc => make_bsc(param()?)?,
            ChannelKind::Bec => make_bec(param()?)?,
            ChannelKind::Matrix => {
                let rows = self.matrix.clone().ok_or_else(|| {
                    Error::InvalidParameter("matrix descriptor needs `matrix`".into())
                })?;
                SymmetricChannel::from_matrix(rows, "matrix")?
            }
        };
        if let Some(label) = &self.label {
            ch.label = label.clone();
        }
        Ok(ch)
    }
}

/// Capacity in bits of a symbol pair with `t = tanh(llr/2)` and `u = 1 - t`.
///
/// Accurate in relative terms for both nearly useless (`t -> 0`) and nearly
/// perfect (`u -> 0`) pairs.
pub(crate) fn pair_capacity(t: f64, u: f64) -> f64 {
    if t < 0.1 {
        // (1/2)[(1+t)ln(1+t) + (1-t)ln(1-t)] = sum_k t^{2k} / (2k(2k-1))
        let t2 = t * t;
        let mut power = t2;
        let mut sum = 0.0;
        let mut k = 1.0;
        loop {
            let term = power / (2.0 * k * (2.0 * k - 1.0));
            sum += term;
            if term <= sum * 1e-18 || term == 0.0 {
                break;
            }
            power *= t2;
            k += 1.0;
        }
        sum / LN_2
    } else {
        let ulnu = if u > 0.0 { u * u.ln() } else { 0.0 };
        (((2.0 - u) * (2.0 - u).ln() + ulnu) / (2.0 * LN_2)).clamp(0.0, 1.0)
    }
}
