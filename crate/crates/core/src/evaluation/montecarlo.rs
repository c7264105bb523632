use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::channel::SymmetricChannel;
use crate::construction::BitChannelQuality;
use crate::error::{Error, Result};
use crate::wiretap::{decode, encode_with, eve_attack, DecodeStrategy, WiretapCodeSpec};

use super::leakage::MessagePrior;

/// One-sided confidence level of the upper limits.
pub const CONFIDENCE: f64 = 0.99;

/// Absolute slack added to a bound before comparing it with an upper limit.
pub const PASS_FLOOR: f64 = 1e-6;

/// Trials per seeded stream. Fixed so that results do not depend on the
/// number of worker threads.
const CHUNK: usize = 256;

/// Upper limit `p` of the one-sided Clopper–Pearson interval:
/// `Pr{Bin(trials, p) <= errors} = 1 - confidence`.
pub fn clopper_pearson_upper(errors: u64, trials: u64, confidence: f64) -> f64 {
    assert!(trials > 0 && errors <= trials, "need 0 <= errors <= trials, trials > 0");
    let alpha = 1.0 - confidence;
    if errors == trials {
        return 1.0;
    }
    if errors == 0 {
        return 1.0 - alpha.powf(1.0 / trials as f64);
    }
    // The limit is the (1 - alpha) quantile of Beta(errors + 1, trials - errors).
    let (a, b) = ((errors + 1) as f64, (trials - errors) as f64);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta_reg(a, b, mid) < confidence {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialConfig {
    pub trials: usize,
    pub seed: u64,
    pub priors: Vec<MessagePrior>,
    pub strategy: DecodeStrategy,
}

impl TrialConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            priors: vec![MessagePrior::Uniform],
            strategy: DecodeStrategy::Sc,
        }
    }

    pub fn with_priors(mut self, priors: Vec<MessagePrior>) -> Self {
        self.priors = priors;
        self
    }

    pub fn with_strategy(mut self, strategy: DecodeStrategy) -> Self {
        self.strategy = strategy;
        self
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<u8> {
    (0..len).map(|_| rng.gen::<bool>() as u8).collect()
}

/// Runs `per_trial` over `trials` trials split into seeded chunks and sums
/// the per-trial count vectors.
fn run_chunks<F>(trials: usize, seed: u64, width: usize, per_trial: F) -> Result<Vec<u64>>
where
    F: Fn(&mut ChaCha8Rng, &mut [u64]) -> Result<()> + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut counts = vec![0u64; width];
            let len = CHUNK.min(trials - c * CHUNK);
            for _ in 0..len {
                per_trial(&mut rng, &mut counts)?;
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;
    Ok(partial.into_iter().fold(vec![0u64; width], |mut acc, p| {
        acc.iter_mut().zip(p).for_each(|(a, b)| *a += b);
        acc
    }))
}

fn noise<R: Rng + ?Sized>(ch: &SymmetricChannel, n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| ch.sample_noise(rng)).collect()
}

fn through(ch: &SymmetricChannel, x: &[u8], noise: &[usize]) -> Vec<usize> {
    x.iter().zip(noise).map(|(&xj, &nj)| ch.act(xj, nj)).collect()
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    Ok(())
}

fn check_table(spec: &WiretapCodeSpec, q: &BitChannelQuality, context: &'static str) -> Result<()> {
    if q.n() != spec.n {
        return Err(Error::DimensionMismatch {
            context,
            expected: spec.n,
            actual: q.n(),
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorOutcome {
    pub prior: MessagePrior,
    pub errors: u64,
    pub fer: f64,
    pub upper_confidence: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub trials: u64,
    /// `sum z_upper(W*_i)` over the decoded positions.
    pub bound: f64,
    pub outcomes: Vec<PriorOutcome>,
    pub verdicts_agree: bool,
}

impl ReliabilityReport {
    pub fn pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }
}

/// Block-error rate of Bob's decoder for each configured prior. All priors
/// see the same channel noise in each trial.
pub fn reliability_trial(
    spec: &WiretapCodeSpec,
    main: &SymmetricChannel,
    q_main: &BitChannelQuality,
    cfg: &TrialConfig,
) -> Result<ReliabilityReport> {
    check_trials(cfg.trials)?;
    check_table(spec, q_main, "main quality table")?;
    spec.validate()?;
    let (n, k, r) = (spec.n, spec.k(), spec.r_len());
    for p in &cfg.priors {
        p.validate(k)?;
    }
    let errors = run_chunks(cfg.trials, cfg.seed, cfg.priors.len(), |rng, counts| {
        let nz = noise(main, n, rng);
        for (slot, prior) in counts.iter_mut().zip(&cfg.priors) {
            let u = prior.sample(k, rng);
            let e = random_bits(r, rng);
            let frame = encode_with(spec, &u, &e)?;
            let y = through(main, &frame.x, &nz);
            if decode(spec, &y, main, cfg.strategy)? != u {
                *slot += 1;
            }
        }
        Ok(())
    })?;
    let bound = q_main.sum_z_upper(spec.free_set().iter());
    let trials = cfg.trials as u64;
    let outcomes: Vec<PriorOutcome> = cfg
        .priors
        .iter()
        .zip(errors)
        .map(|(prior, errors)| {
            let upper_confidence = clopper_pearson_upper(errors, trials, CONFIDENCE);
            PriorOutcome {
                prior: prior.clone(),
                errors,
                fer: errors as f64 / trials as f64,
                upper_confidence,
                pass: upper_confidence <= bound + PASS_FLOOR,
            }
        })
        .collect();
    let verdicts_agree = outcomes.windows(2).all(|w| w[0].pass == w[1].pass);
    Ok(ReliabilityReport {
        trials,
        bound,
        outcomes,
        verdicts_agree,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub trials: u64,
    pub failures: u64,
    /// Empirical probability that Eve's genie-aided estimate of `e` is wrong.
    pub empirical_lambda: f64,
    pub upper_confidence: f64,
    /// `sum z_upper(W_i)` over `R`.
    pub bound: f64,
    pub pass: bool,
}

/// Eve's genie-aided recovery of `e` with the message revealed.
pub fn attack_trial(
    spec: &WiretapCodeSpec,
    wiretap: &SymmetricChannel,
    q_wiretap: &BitChannelQuality,
    trials: usize,
    seed: u64,
) -> Result<AttackReport> {
    check_trials(trials)?;
    check_table(spec, q_wiretap, "wiretap quality table")?;
    spec.validate()?;
    let (n, k, r) = (spec.n, spec.k(), spec.r_len());
    let failures = run_chunks(trials, seed, 1, |rng, counts| {
        let u = random_bits(k, rng);
        let e = random_bits(r, rng);
        let frame = encode_with(spec, &u, &e)?;
        let z = through(wiretap, &frame.x, &noise(wiretap, n, rng));
        if eve_attack(spec, &z, wiretap, &u)? != e {
            counts[0] += 1;
        }
        Ok(())
    })?[0];
    let bound = q_wiretap.sum_z_upper(spec.r.iter());
    let upper_confidence = clopper_pearson_upper(failures, trials as u64, CONFIDENCE);
    Ok(AttackReport {
        trials: trials as u64,
        failures,
        empirical_lambda: failures as f64 / trials as f64,
        upper_confidence,
        bound,
        pass: upper_confidence <= bound + PASS_FLOOR,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub trials: u64,
    pub errors_first: u64,
    pub errors_second: u64,
}

/// Block errors of two decoding strategies on identical transmissions.
pub fn compare_decoders(
    spec: &WiretapCodeSpec,
    main: &SymmetricChannel,
    first: DecodeStrategy,
    second: DecodeStrategy,
    trials: usize,
    seed: u64,
) -> Result<PairedComparison> {
    check_trials(trials)?;
    spec.validate()?;
    let (n, k, r) = (spec.n, spec.k(), spec.r_len());
    let counts = run_chunks(trials, seed, 2, |rng, counts| {
        let u = random_bits(k, rng);
        let e = random_bits(r, rng);
        let frame = encode_with(spec, &u, &e)?;
        let y = through(main, &frame.x, &noise(main, n, rng));
        for (slot, strategy) in counts.iter_mut().zip([first, second]) {
            if decode(spec, &y, main, strategy)? != u {
                *slot += 1;
            }
        }
        Ok(())
    })?;
    Ok(PairedComparison {
        trials: trials as u64,
        errors_first: counts[0],
        errors_second: counts[1],
    })
}
