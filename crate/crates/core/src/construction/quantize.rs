//! Two-sided bit-channel bounds by output-alphabet quantization.
//!
//! A symmetric binary-input channel is a mixture of binary symmetric
//! components. Each component is stored as a [`Pair`]: its probability mass
//! `q`, `t = tanh(llr/2) = 1 - 2p` and `u = 1 - t = 2p`, where `p` is the
//! crossover probability. After every polarization step the mixture is cut
//! back to `mu/2` components twice: once by merging neighbours (a degraded
//! channel, giving `z_upper`, `c_lower`) and once by splitting a component
//! onto its neighbours (an upgraded channel, giving `z_lower`, `c_upper`).
//! `z_upper` is further capped by the recursion `Z(W+) = Z(W)^2`,
//! `Z(W-) <= 2Z(W) - Z(W)^2`, which merging near `t = 1` can lose.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::channel::{pair_capacity, SymmetricChannel};
use crate::error::{Error, Result};

use super::quality::{BitChannelBounds, BitChannelQuality, QualityMethod};

/// Subtrees at least this large are evolved with `rayon::join`.
const PARALLEL_LEAVES: usize = 1 << 10;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Pair {
    q: f64,
    t: f64,
    u: f64,
}

impl Pair {
    fn new(q: f64, t: f64, u: f64) -> Self {
        Self {
            q,
            t: t.clamp(0.0, 1.0),
            u: u.clamp(0.0, 1.0),
        }
    }

    fn capacity(&self) -> f64 {
        pair_capacity(self.t, self.u)
    }

    fn high(&self) -> bool {
        self.t >= 0.5
    }
}

/// Order by reliability; near `t = 1` the comparison is done on `u`.
fn key_cmp(a: &Pair, b: &Pair) -> Ordering {
    match (a.high(), b.high()) {
        (false, false) => a.t.total_cmp(&b.t),
        (true, true) => b.u.total_cmp(&a.u),
        (false, true) => Ordering::Less,
        (true, false) => Ordering::Greater,
    }
}

/// `hi.t - lo.t` for `lo <= hi`.
fn t_diff(lo: &Pair, hi: &Pair) -> f64 {
    if lo.high() && hi.high() {
        (lo.u - hi.u).max(0.0)
    } else {
        (hi.t - lo.t).max(0.0)
    }
}

fn from_channel(ch: &SymmetricChannel) -> Vec<Pair> {
    let mut pairs = Vec::new();
    for z in 0..ch.output_size() {
        let p = ch.involution()[z];
        if p < z {
            continue;
        }
        let (a, b) = (ch.transition(0, z), ch.transition(1, z));
        if p == z {
            if a > 0.0 {
                pairs.push(Pair::new(a, 0.0, 1.0));
            }
        } else {
            let q = a + b;
            if q > 0.0 {
                pairs.push(Pair::new(q, (a - b).abs() / q, 2.0 * a.min(b) / q));
            }
        }
    }
    normalize(pairs)
}

/// Sorts and merges components with identical keys.
fn normalize(mut pairs: Vec<Pair>) -> Vec<Pair> {
    pairs.retain(|p| p.q > 0.0);
    pairs.sort_by(key_cmp);
    let mut out: Vec<Pair> = Vec::with_capacity(pairs.len());
    for p in pairs {
        match out.last_mut() {
            Some(last) if key_cmp(last, &p) == Ordering::Equal => last.q += p.q,
            _ => out.push(p),
        }
    }
    out
}

fn minus(pairs: &[Pair]) -> Vec<Pair> {
    let mut out = Vec::with_capacity(pairs.len() * (pairs.len() + 1) / 2);
    for (i, a) in pairs.iter().enumerate() {
        for (j, b) in pairs.iter().enumerate().skip(i) {
            let mult = if i == j { 1.0 } else { 2.0 };
            out.push(Pair::new(mult * a.q * b.q, a.t * b.t, a.u + a.t * b.u));
        }
    }
    normalize(out)
}

fn plus(pairs: &[Pair]) -> Vec<Pair> {
    let mut out = Vec::with_capacity(pairs.len() * (pairs.len() + 1));
    for (i, a) in pairs.iter().enumerate() {
        for (j, b) in pairs.iter().enumerate().skip(i) {
            let mass = if i == j { a.q * b.q } else { 2.0 * a.q * b.q };
            let agree = 1.0 + a.t * b.t;
            let disagree = a.u + a.t * b.u;
            out.push(Pair::new(
                mass * agree / 2.0,
                (a.t + b.t) / agree,
                a.u * b.u / agree,
            ));
            if disagree > 0.0 {
                let (lo, hi) = if key_cmp(a, b) == Ordering::Greater {
                    (b, a)
                } else {
                    (a, b)
                };
                out.push(Pair::new(
                    mass * disagree / 2.0,
                    t_diff(lo, hi) / disagree,
                    hi.u * (1.0 + lo.t) / disagree,
                ));
            }
        }
    }
    normalize(out)
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    cost: f64,
    idx: usize,
    version: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Reversed so that `BinaryHeap` pops the cheapest, lowest-index entry.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// Doubly linked view over a sorted list of components.
struct Chain {
    pairs: Vec<Pair>,
    caps: Vec<f64>,
    prev: Vec<usize>,
    next: Vec<usize>,
    alive: Vec<bool>,
    version: Vec<u32>,
    count: usize,
}

impl Chain {
    fn new(pairs: Vec<Pair>) -> Self {
        let n = pairs.len();
        Self {
            caps: pairs.iter().map(Pair::capacity).collect(),
            pairs,
            prev: (0..n).map(|i| if i == 0 { NONE } else { i - 1 }).collect(),
            next: (0..n).map(|i| if i + 1 == n { NONE } else { i + 1 }).collect(),
            alive: vec![true; n],
            version: vec![0; n],
            count: n,
        }
    }

    fn unlink(&mut self, j: usize) {
        let (p, nx) = (self.prev[j], self.next[j]);
        if p != NONE {
            self.next[p] = nx;
        }
        if nx != NONE {
            self.prev[nx] = p;
        }
        self.alive[j] = false;
        self.count -= 1;
    }

    fn is_current(&self, e: &Entry) -> bool {
        self.alive[e.idx] && self.version[e.idx] == e.version
    }

    fn into_pairs(self) -> Vec<Pair> {
        self.pairs
            .into_iter()
            .zip(self.alive)
            .filter_map(|(p, a)| a.then_some(p))
            .collect()
    }
}

fn merged(a: &Pair, b: &Pair) -> Pair {
    let q = a.q + b.q;
    Pair::new(q, (a.q * a.t + b.q * b.t) / q, (a.q * a.u + b.q * b.u) / q)
}

/// Greedy merging of adjacent components, cheapest capacity loss first.
fn degrade(pairs: Vec<Pair>, cap: usize) -> Vec<Pair> {
    if pairs.len() <= cap {
        return pairs;
    }
    let mut chain = Chain::new(pairs);
    let cost = |c: &Chain, a: usize| -> Option<Entry> {
        let b = c.next[a];
        if b == NONE {
            return None;
        }
        let m = merged(&c.pairs[a], &c.pairs[b]);
        Some(Entry {
            cost: c.pairs[a].q * c.caps[a] + c.pairs[b].q * c.caps[b] - m.q * m.capacity(),
            idx: a,
            version: c.version[a],
        })
    };
    let mut heap: BinaryHeap<Entry> = (0..chain.pairs.len()).filter_map(|a| cost(&chain, a)).collect();
    while chain.count > cap {
        let Some(e) = heap.pop() else { break };
        if !chain.is_current(&e) || chain.next[e.idx] == NONE {
            continue;
        }
        let a = e.idx;
        let b = chain.next[a];
        chain.pairs[a] = merged(&chain.pairs[a], &chain.pairs[b]);
        chain.caps[a] = chain.pairs[a].capacity();
        chain.unlink(b);
        chain.version[a] += 1;
        heap.extend(cost(&chain, a));
        let p = chain.prev[a];
        if p != NONE {
            chain.version[p] += 1;
            heap.extend(cost(&chain, p));
        }
    }
    chain.into_pairs()
}

/// Greedy removal of interior components by splitting their mass onto the
/// two neighbours, cheapest capacity gain first.
fn upgrade(pairs: Vec<Pair>, cap: usize) -> Vec<Pair> {
    if pairs.len() <= cap {
        return pairs;
    }
    let mut chain = Chain::new(pairs);
    // (cost, share to prev, share to next)
    let split = |c: &Chain, j: usize| -> Option<(f64, f64, f64)> {
        let (i, k) = (c.prev[j], c.next[j]);
        if i == NONE || k == NONE {
            return None;
        }
        let (pi, pj, pk) = (&c.pairs[i], &c.pairs[j], &c.pairs[k]);
        let span = t_diff(pi, pk);
        // Both shares as products: `pj.q - xk` cancels when `xk ~ pj.q`.
        let (xi, xk) = if span > 0.0 {
            (pj.q * t_diff(pj, pk) / span, pj.q * t_diff(pi, pj) / span)
        } else {
            (pj.q, 0.0)
        };
        Some((xi * c.caps[i] + xk * c.caps[k] - pj.q * c.caps[j], xi, xk))
    };
    let entry = |c: &Chain, j: usize| {
        split(c, j).map(|(cost, _, _)| Entry {
            cost,
            idx: j,
            version: c.version[j],
        })
    };
    let mut heap: BinaryHeap<Entry> = (0..chain.pairs.len()).filter_map(|j| entry(&chain, j)).collect();
    while chain.count > cap.max(2) {
        let Some(e) = heap.pop() else { break };
        if !chain.is_current(&e) {
            continue;
        }
        let j = e.idx;
        let Some((_, xi, xk)) = split(&chain, j) else {
            continue;
        };
        let (i, k) = (chain.prev[j], chain.next[j]);
        chain.pairs[i].q += xi;
        chain.pairs[k].q += xk;
        chain.unlink(j);
        for x in [i, k] {
            chain.version[x] += 1;
            heap.extend(entry(&chain, x));
        }
    }
    let mut pairs = chain.into_pairs();
    if pairs.len() > cap {
        // Only the two extremes are left: raising the worse one is an upgrade.
        let low = pairs.remove(0);
        pairs[0].q += low.q;
    }
    pairs
}

struct Summary {
    z: f64,
    gap: f64,
    capacity: f64,
}

fn summarize(pairs: &[Pair]) -> Summary {
    let mut s = Summary {
        z: 0.0,
        gap: 0.0,
        capacity: 0.0,
    };
    for p in pairs {
        let root = (p.u * (2.0 - p.u)).sqrt();
        s.z += p.q * root;
        s.gap += p.q * p.t * p.t / (1.0 + root);
        s.capacity += p.q * p.capacity();
    }
    s
}

fn leaf_bounds(degraded: &[Pair], upgraded: &[Pair], z_cap: f64) -> BitChannelBounds {
    let d = summarize(degraded);
    let u = summarize(upgraded);
    let clamp = |x: f64| x.clamp(0.0, 1.0);
    let (z_upper, z_lower) = (clamp(d.z.min(z_cap)), clamp(u.z));
    let (c_lower, c_upper) = (clamp(d.capacity), clamp(u.capacity));
    let (gap_lower, gap_upper) = (clamp(d.gap), clamp(u.gap));
    BitChannelBounds {
        z_lower: z_lower.min(z_upper),
        z_upper: z_upper.max(z_lower),
        c_lower: c_lower.min(c_upper),
        c_upper: c_upper.max(c_lower),
        gap_lower: gap_lower.min(gap_upper),
        gap_upper: gap_upper.max(gap_lower),
    }
}

fn evolve(degraded: &[Pair], upgraded: &[Pair], z_cap: f64, cap: usize, out: &mut [BitChannelBounds]) {
    if out.len() == 1 {
        out[0] = leaf_bounds(degraded, upgraded, z_cap);
        return;
    }
    let z = summarize(degraded).z.min(z_cap).clamp(0.0, 1.0);
    let len = out.len();
    let (lo, hi) = out.split_at_mut(len / 2);
    let minus_branch = |slot: &mut [BitChannelBounds]| {
        let d = degrade(minus(degraded), cap);
        let u = upgrade(minus(upgraded), cap);
        evolve(&d, &u, z * (2.0 - z), cap, slot);
    };
    let plus_branch = |slot: &mut [BitChannelBounds]| {
        let d = degrade(plus(degraded), cap);
        let u = upgrade(plus(upgraded), cap);
        evolve(&d, &u, z * z, cap, slot);
    };
    if len >= PARALLEL_LEAVES {
        rayon::join(|| minus_branch(lo), || plus_branch(hi));
    } else {
        minus_branch(lo);
        plus_branch(hi);
    }
}

/// Certified bounds on `Z(W_i)` and `C(W_i)` for all `2^m` bit-channels,
/// with at most `mu` output symbols per intermediate channel.
pub fn evolve_quantized(ch: &SymmetricChannel, m: u32, mu: usize) -> Result<BitChannelQuality> {
    if mu < 2 || !mu.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "mu must be an even number of at least 2, got {mu}"
        )));
    }
    if m >= usize::BITS - 1 {
        return Err(Error::InvalidParameter(format!("m = {m} is too large")));
    }
    let cap = mu / 2;
    let base = from_channel(ch);
    let z = summarize(&base).z;
    let degraded = degrade(base.clone(), cap);
    let upgraded = upgrade(base, cap);
    let mut out = vec![BitChannelBounds::exact(0.0, 0.0, 0.0); 1 << m];
    evolve(&degraded, &upgraded, z, cap, &mut out);
    Ok(BitChannelQuality::new_unchecked(out, QualityMethod::Quantized { mu }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{h2, make_bec, make_bsc};
    use crate::construction::evolve_bec;

    fn total_mass(p: &[Pair]) -> f64 {
        p.iter().map(|x| x.q).sum()
    }

    #[test]
    fn bsc_decomposes_into_one_component() {
        let pairs = from_channel(&make_bsc(0.1).unwrap());
        assert_eq!(pairs.len(), 1);
        assert!((pairs[0].t - 0.8).abs() < 1e-15);
        let s = summarize(&pairs);
        assert!((s.z - 2.0 * (0.09f64).sqrt()).abs() < 1e-15);
        assert!((s.capacity - (1.0 - h2(0.1))).abs() < 1e-14);
    }

    #[test]
    fn one_step_matches_the_closed_forms_for_bsc() {
        let p = 0.1;
        let base = from_channel(&make_bsc(p).unwrap());
        // W^- is BSC(2p(1-p)).
        let m = minus(&base);
        let pm = 2.0 * p * (1.0 - p);
        assert_eq!(m.len(), 1);
        assert!((summarize(&m).z - 2.0 * (pm * (1.0 - pm)).sqrt()).abs() < 1e-15);
        // Z(W^+) = Z(W)^2 and capacities add up.
        let pl = plus(&base);
        let z = 2.0 * (p * (1.0 - p)).sqrt();
        assert!((summarize(&pl).z - z * z).abs() < 1e-15);
        let c = 1.0 - h2(p);
        assert!((summarize(&m).capacity + summarize(&pl).capacity - 2.0 * c).abs() < 1e-14);
        assert!((total_mass(&pl) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reductions_bracket_the_exact_channel() {
        let mut exact = from_channel(&make_bsc(0.11).unwrap());
        for _ in 0..3 {
            exact = plus(&minus(&exact));
        }
        let s = summarize(&exact);
        for cap in [1, 2, 4, 8] {
            let d = summarize(&degrade(exact.clone(), cap));
            let u = summarize(&upgrade(exact.clone(), cap));
            assert!(d.z >= s.z - 1e-15 && u.z <= s.z + 1e-15, "cap={cap}");
            assert!(d.capacity <= s.capacity + 1e-15 && u.capacity >= s.capacity - 1e-15);
        }
    }

    #[test]
    fn reductions_respect_the_cap_and_mass() {
        let mut list = from_channel(&make_bsc(0.2).unwrap());
        for _ in 0..2 {
            list = plus(&list);
        }
        for cap in [1, 2, 3] {
            let d = degrade(list.clone(), cap);
            let u = upgrade(list.clone(), cap);
            assert!(d.len() <= cap && u.len() <= cap);
            assert!((total_mass(&d) - 1.0).abs() < 1e-14);
            assert!((total_mass(&u) - 1.0).abs() < 1e-14);
            assert!(d.windows(2).all(|w| key_cmp(&w[0], &w[1]) == Ordering::Less));
        }
    }

    #[test]
    fn bec_is_exact() {
        for mu in [4, 16] {
            let q = evolve_quantized(&make_bec(0.4).unwrap(), 8, mu).unwrap();
            let e = evolve_bec(0.4, 8).unwrap();
            for (a, b) in q.bounds().iter().zip(e.bounds()) {
                assert!((a.z_lower - b.z_lower).abs() < 1e-9 && (a.z_upper - b.z_upper).abs() < 1e-9);
                assert!((a.c_lower - b.c_lower).abs() < 1e-9 && (a.c_upper - b.c_upper).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn z_upper_never_exceeds_the_bec_recursion() {
        let ch = make_bsc(1e-3).unwrap();
        let z0 = 2.0 * (1e-3f64 * 0.999).sqrt();
        let q = evolve_quantized(&ch, 12, 8).unwrap();
        let bec = evolve_bec(z0, 12).unwrap();
        for (a, b) in q.bounds().iter().zip(bec.bounds()) {
            assert!(a.z_upper <= b.z_upper * (1.0 + 1e-12), "{} {}", a.z_upper, b.z_upper);
        }
    }

    #[test]
    fn all_plus_index_brackets_exact_z() {
        // Z(W+) = Z(W)^2 exactly, so the last index has Z = z0^(2^m).
        let z0 = 2.0 * (1e-3f64 * 0.999).sqrt();
        for (m, mu) in [(5, 8), (6, 8), (8, 16)] {
            let q = evolve_quantized(&make_bsc(1e-3).unwrap(), m, mu).unwrap();
            let exact = z0.powi(1 << m);
            let b = q.get(q.n() - 1);
            assert!(b.z_lower <= exact * (1.0 + 1e-9) && exact <= b.z_upper * (1.0 + 1e-9));
        }
    }

    #[test]
    fn noiseless_channel() {
        let q = evolve_quantized(&make_bsc(0.0).unwrap(), 6, 8).unwrap();
        assert!(q.bounds().iter().all(|b| b.z_upper == 0.0 && b.c_lower == 1.0));
    }

    #[test]
    fn rejects_odd_mu() {
        let ch = make_bsc(0.1).unwrap();
        assert!(evolve_quantized(&ch, 3, 3).is_err());
        assert!(evolve_quantized(&ch, 3, 0).is_err());
    }

    #[test]
    fn bounds_are_ordered() {
        let q = evolve_quantized(&make_bsc(0.05).unwrap(), 10, 16).unwrap();
        assert!(BitChannelQuality::new(q.bounds().to_vec(), q.method()).is_ok());
        for b in q.bounds() {
            assert!(b.c_upper <= (1.0 - b.z_lower * b.z_lower).sqrt() + 1e-9);
        }
    }

    #[test]
    fn larger_mu_tightens() {
        let ch = make_bsc(0.11).unwrap();
        let coarse = evolve_quantized(&ch, 8, 4).unwrap();
        let fine = evolve_quantized(&ch, 8, 32).unwrap();
        for (c, f) in coarse.bounds().iter().zip(fine.bounds()) {
            assert!(c.z_upper >= f.z_upper - 1e-12 && c.z_lower <= f.z_lower + 1e-12);
            assert!(c.c_upper >= f.c_upper - 1e-12 && c.c_lower <= f.c_lower + 1e-12);
        }
    }
}
