use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wiretap_polar::bits::{pack_bits, pack_symbols, unpack_bits, unpack_symbols};
use wiretap_polar::channel::{make_bec, make_bsc, ChannelDescriptor, SymmetricChannel};
use wiretap_polar::construction::cache::{cache_key, read_cache, write_cache};
use wiretap_polar::construction::{brute_force_bitchannels, construct as build_table, BitChannelQuality};
use wiretap_polar::evaluation::{
    attack_trial, build_induced_channel, check_induced_symmetry, exact_leakage,
    induced_capacity_check, noiseless_main_identity, reliability_trial, secrecy_report,
    strong_bound, weak_bound, JointDistribution, MessagePrior, Randomization, SecrecyReport,
    TrialConfig, ORACLE_TOLERANCE,
};
use wiretap_polar::polar::MultipathConfig;
use wiretap_polar::wiretap::{
    build_spec, decode as decode_block, encode as encode_block, BuildOptions, DecodeStrategy,
    DeltaSpec, DeltaWindow, InsecureSeededRandomness, RandomnessSource, SecureRandomness,
    WiretapCodeSpec,
};
use wiretap_polar::{Error, IndexSet};

use crate::config::Loaded;
use crate::{CliError, Which};

type CliResult<T = ()> = Result<T, CliError>;

pub fn set_workers(workers: usize) -> CliResult {
    if workers == 0 {
        return Err(CliError::config("--workers must be at least 1"));
    }
    // Only the first call in a process takes effect.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    Ok(())
}

fn apply_config_workers(loaded: &Loaded, flag_given: bool) -> CliResult {
    match loaded.config.workers {
        Some(w) if !flag_given => set_workers(w),
        _ => Ok(()),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bytes)
        .map_err(|e| CliError::other(format!("cannot write {}: {e}", path.display())))
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::other(format!("cannot read {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn read_spec(path: &Path) -> CliResult<WiretapCodeSpec> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read spec {}: {e}", path.display())))?;
    Ok(WiretapCodeSpec::from_json(&text)?)
}

fn bound_channel(spec: &WiretapCodeSpec, which: Which) -> CliResult<SymmetricChannel> {
    let binding = spec
        .binding
        .as_ref()
        .ok_or_else(|| CliError::config("spec carries no channel binding"))?;
    Ok(match which {
        Which::Main => binding.main.build()?,
        Which::Wiretap => binding.wiretap.build()?,
    })
}

/// Quality table for `desc`, read from or written to the cache directory
/// when one is configured.
fn quality(loaded: &Loaded, desc: &ChannelDescriptor) -> CliResult<BitChannelQuality> {
    let cfg = &loaded.config;
    let Some(dir) = loaded.output(|o| o.cache_dir.as_ref()) else {
        return Ok(build_table(desc, cfg.m, cfg.mu)?);
    };
    let key = cache_key(desc, cfg.m, cfg.mu)?;
    let path = dir.join(format!("{}.wpq", hex::encode(key)));
    if let Ok(file) = File::open(&path) {
        if let Some(q) = read_cache(BufReader::new(file), &key)? {
            return Ok(q);
        }
    }
    let q = build_table(desc, cfg.m, cfg.mu)?;
    fs::create_dir_all(&dir)?;
    let mut out = BufWriter::new(File::create(&path)?);
    write_cache(&mut out, &key, &q)?;
    out.flush()?;
    Ok(q)
}

struct Built {
    main: SymmetricChannel,
    wiretap: SymmetricChannel,
    q_main: BitChannelQuality,
    q_wiretap: BitChannelQuality,
    spec: WiretapCodeSpec,
}

fn build(loaded: &Loaded, wiretap: &ChannelDescriptor) -> CliResult<Built> {
    let cfg = &loaded.config;
    let main_ch = cfg.main.build()?;
    let wiretap_ch = wiretap.build()?;
    let q_main = quality(loaded, &cfg.main)?;
    let q_wiretap = quality(loaded, wiretap)?;
    let mut spec = build_spec(&q_main, &q_wiretap, cfg.build_options())?;
    spec.bind(cfg.main.clone(), wiretap.clone(), cfg.m, cfg.mu)?;
    Ok(Built {
        main: main_ch,
        wiretap: wiretap_ch,
        q_main,
        q_wiretap,
        spec,
    })
}

fn summary(spec: &WiretapCodeSpec) -> String {
    format!(
        "n={} k={} |R|={} |A|={} |B|={} |X|={} |Y|={} rate={:.6}",
        spec.n,
        spec.k(),
        spec.r_len(),
        spec.a.len(),
        spec.b.len(),
        spec.x.len(),
        spec.y.len(),
        spec.rate()
    )
}

pub fn construct(config: &Path) -> CliResult {
    let loaded = Loaded::load(config)?;
    let built = build(&loaded, &loaded.config.wiretap)?;
    let path = loaded
        .output(|o| o.spec.as_ref())
        .unwrap_or_else(|| loaded.resolve(Path::new("spec.json")));
    let mut text = built.spec.to_json()?;
    text.push('\n');
    write_file(&path, text.as_bytes())?;
    if built.spec.k() == 0 {
        eprintln!("warning: the spec carries no message bits (k = 0)");
    }
    println!("{}", summary(&built.spec));
    println!("spec written to {}", path.display());
    Ok(())
}

pub fn encode(
    spec_path: &Path,
    input: &Path,
    output: &Path,
    insecure_seed: Option<u64>,
    allow_insecure_seed: bool,
) -> CliResult {
    let spec = read_spec(spec_path)?;
    let mut source: Box<dyn RandomnessSource> = match insecure_seed {
        Some(_) if !allow_insecure_seed => {
            return Err(CliError::config(
                "--insecure-seed requires --allow-insecure-seed",
            ))
        }
        Some(seed) => Box::new(InsecureSeededRandomness::new(seed)),
        None => Box::new(SecureRandomness::new()),
    };
    let bits = unpack_bits(&read_file(input)?)?;
    let k = spec.k();
    if bits.is_empty() {
        return write_file(output, &pack_bits(&[]));
    }
    if k == 0 || bits.len() % k != 0 {
        return Err(Error::MessageLength {
            expected: k,
            actual: bits.len(),
        }
        .into());
    }
    let mut codewords = Vec::with_capacity(bits.len() / k * spec.n);
    for block in bits.chunks(k) {
        codewords.extend(encode_block(&spec, block, source.as_mut())?.x);
    }
    write_file(output, &pack_bits(&codewords))
}

pub fn decode(spec_path: &Path, input: &Path, output: &Path, max_paths: Option<usize>) -> CliResult {
    let spec = read_spec(spec_path)?;
    let main = bound_channel(&spec, Which::Main)?;
    let symbols = unpack_symbols(&read_file(input)?)?;
    if symbols.len() % spec.n != 0 {
        return Err(CliError::other(format!(
            "wrong received length: expected a multiple of n = {} symbols, got {}",
            spec.n,
            symbols.len()
        )));
    }
    if let Some(&s) = symbols.iter().find(|&&s| s >= main.output_size()) {
        return Err(CliError::other(format!(
            "symbol {s} is outside the main channel's output alphabet of size {}",
            main.output_size()
        )));
    }
    let strategy = match max_paths {
        Some(m) => DecodeStrategy::Multipath(MultipathConfig::new(m)),
        None => DecodeStrategy::Sc,
    };
    let mut message = Vec::with_capacity(symbols.len() / spec.n * spec.k());
    for block in symbols.chunks(spec.n) {
        message.extend(decode_block(&spec, block, &main, strategy)?);
    }
    write_file(output, &pack_bits(&message))
}

pub fn transmit(spec_path: &Path, input: &Path, output: &Path, which: Which, seed: u64) -> CliResult {
    let spec = read_spec(spec_path)?;
    let ch = bound_channel(&spec, which)?;
    let bits = unpack_bits(&read_file(input)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols: Vec<usize> = bits.iter().map(|&x| ch.sample(x, &mut rng)).collect();
    write_file(output, &pack_symbols(&symbols)?)
}

fn emit<T: Serialize>(loaded: &Loaded, value: &T) -> CliResult {
    println!("{}", serde_json::to_string_pretty(value).map_err(Error::from)?);
    if let Some(path) = loaded.output(|o| o.report.as_ref()) {
        write_json(&path, value)?;
    }
    Ok(())
}

pub fn simulate(config: &Path, workers_flag: bool) -> CliResult {
    let loaded = Loaded::load(config)?;
    apply_config_workers(&loaded, workers_flag)?;
    let cfg = &loaded.config;
    let built = build(&loaded, &cfg.wiretap)?;
    let trial = TrialConfig::new(cfg.trials, cfg.seed)
        .with_priors(cfg.priors.clone())
        .with_strategy(cfg.decoder.strategy());
    let report = reliability_trial(&built.spec, &built.main, &built.q_main, &trial)?;
    eprintln!(
        "{}: {}",
        summary(&built.spec),
        if report.pass() { "PASS" } else { "FAIL" }
    );
    emit(&loaded, &report)
}

pub fn attack(config: &Path, workers_flag: bool) -> CliResult {
    let loaded = Loaded::load(config)?;
    apply_config_workers(&loaded, workers_flag)?;
    let cfg = &loaded.config;
    let built = build(&loaded, &cfg.wiretap)?;
    let report = attack_trial(&built.spec, &built.wiretap, &built.q_wiretap, cfg.trials, cfg.seed)?;
    emit(&loaded, &report)
}

pub fn report(config: &Path, simulate: bool, workers_flag: bool) -> CliResult {
    let loaded = Loaded::load(config)?;
    apply_config_workers(&loaded, workers_flag)?;
    let cfg = &loaded.config;
    let points: Vec<Option<f64>> = match &cfg.sweep {
        Some(list) => list.iter().map(|&p| Some(p)).collect(),
        None => vec![cfg.wiretap.param],
    };
    let mut reports: Vec<SecrecyReport> = Vec::new();
    for p2 in points {
        let desc = match p2 {
            Some(p) => cfg.wiretap.with_param(p)?,
            None => cfg.wiretap.clone(),
        };
        let built = build(&loaded, &desc)?;
        let mut rep = secrecy_report(
            &built.spec,
            &built.main,
            &built.wiretap,
            &built.q_main,
            &built.q_wiretap,
        )?;
        if let Some(p) = p2 {
            rep = rep.with_p2(p);
        }
        if simulate {
            let trial = TrialConfig::new(cfg.trials, cfg.seed).with_strategy(cfg.decoder.strategy());
            let rel = reliability_trial(&built.spec, &built.main, &built.q_main, &trial)?;
            rep = rep.with_block_error_rate(rel.outcomes[0].fer);
        }
        reports.push(rep);
    }

    println!("{:>8} {:>8} {:>8} {:>5}", "p2", "Rate", "%C_s", "|X|");
    for rep in &reports {
        let p2 = rep.p2.map(|p| p.to_string()).unwrap_or_else(|| "-".into());
        let pct = rep
            .percent_of_secrecy_capacity
            .map(|t| format!("{:.1}%", t.value))
            .unwrap_or_else(|| "-".into());
        println!("{p2:>8} {:>8.3} {pct:>8} {:>5}", rep.rate.value, rep.sizes.x);
    }
    if let Some(path) = loaded.output(|o| o.csv.as_ref()) {
        let mut csv = String::from(SecrecyReport::CSV_HEADER);
        csv.push('\n');
        for rep in &reports {
            csv.push_str(&rep.csv_row());
            csv.push('\n');
        }
        write_file(&path, csv.as_bytes())?;
    }
    if let Some(path) = loaded.output(|o| o.report.as_ref()) {
        write_json(&path, &reports)?;
    }
    Ok(())
}

/// One line of `verify` output.
fn check(name: &str, ok: bool, detail: String, failures: &mut usize) {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    if !ok {
        *failures += 1;
    }
}

pub fn verify(quick: bool) -> CliResult {
    let mut failures = 0;
    let bsc = |p| make_bsc(p).expect("valid BSC");
    let bec = |e| make_bec(e).expect("valid BEC");

    for ch in [bsc(0.25), bec(0.5)] {
        for n in [1, 2, 4, 8] {
            let c = noiseless_main_identity(&ch, n)?;
            check(
                "noiseless-main identity",
                c.holds,
                format!("{} n={n}: I(X;Z)={:.12} nC={:.12}", ch.label(), c.computed, c.expected),
                &mut failures,
            );
        }
    }

    for ch in [bsc(0.3), bec(0.5)] {
        for m in [1u32, 2] {
            let n = 1usize << m;
            let table = brute_force_bitchannels(&ch, m)?;
            let mut ok = true;
            for mask in 0..1usize << n {
                let r = IndexSet::filter(n, |i| (mask >> i) & 1 == 1);
                let q = build_induced_channel(&ch, &r, n)?;
                ok &= check_induced_symmetry(&q).symmetric && induced_capacity_check(&q, &table)?.holds;
            }
            check(
                "induced channel",
                ok,
                format!("{} n={n}: all {} choices of R", ch.label(), 1 << n),
                &mut failures,
            );
        }
    }

    let ms: &[u32] = if quick { &[2] } else { &[2, 3] };
    for &m in ms {
        let pairs = [
            (bsc(0.3), brute_force_bitchannels(&bsc(0.01), m)?, brute_force_bitchannels(&bsc(0.3), m)?),
            (bec(0.5), build_table(&ChannelDescriptor::bec(0.1), m, 2)?, build_table(&ChannelDescriptor::bec(0.5), m, 2)?),
        ];
        for (wiretap, q_main, q_wiretap) in &pairs {
            let n = 1usize << m;
            let spec = build_spec(q_main, q_wiretap, BuildOptions::weak(0.3))?;
            let leak = exact_leakage(&spec, wiretap, &MessagePrior::Uniform)?;
            let bound = weak_bound(&spec, q_wiretap, &wiretap.measures())?.value;
            check(
                "weak leakage bound",
                leak <= bound + ORACLE_TOLERANCE,
                format!("{} n={n}: I={leak:.6} bound={bound:.6}", wiretap.label()),
                &mut failures,
            );
            let frozen = JointDistribution::build(
                &spec,
                wiretap,
                &MessagePrior::Uniform,
                &Randomization::Fixed(vec![0; spec.r_len()]),
            )?
            .mutual_information();
            let floor = spec.k() as f64 * wiretap.capacity();
            check(
                "fixed-randomness lower bound",
                frozen >= floor - ORACLE_TOLERANCE,
                format!("{} n={n}: I={frozen:.6} kC={floor:.6}", wiretap.label()),
                &mut failures,
            );
            for delta in [0.05, 0.2] {
                let opts = BuildOptions::strong(0.3, DeltaSpec::Literal(delta))
                    .with_window(DeltaWindow { c1: 0.1, c2: 0.01 });
                let spec = build_spec(q_main, q_wiretap, opts)?;
                let bound = strong_bound(&spec, q_wiretap)?.value;
                let mut worst: f64 = 0.0;
                for prior in MessagePrior::standard() {
                    worst = worst.max(exact_leakage(&spec, wiretap, &prior)?);
                }
                check(
                    "strong leakage bound",
                    worst <= bound + ORACLE_TOLERANCE,
                    format!("{} n={n} delta={delta}: max I={worst:.3e} bound={bound:.3}", wiretap.label()),
                    &mut failures,
                );
                let rep = secrecy_report(&spec, wiretap, wiretap, q_main, q_wiretap)?;
                check(
                    "rate identity",
                    rep.rate_identity_holds == Some(true),
                    format!("{} n={n} delta={delta}: k={}", wiretap.label(), spec.k()),
                    &mut failures,
                );
            }
        }
    }

    if failures > 0 {
        return Err(CliError::constraint(format!("{failures} invariant check(s) failed")));
    }
    println!("all invariant checks passed");
    Ok(())
}
