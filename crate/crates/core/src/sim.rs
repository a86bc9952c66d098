//! Finite-blocklength random-binning simulator.
//!
//! Bin maps are drawn from a seeded generator. Every sequence of a layer's
//! domain receives a random 64-bit tag and its bin is the top bits of that
//! tag, so a lower-rate binning is always a coarsening of a higher-rate one
//! for the same seed. Once the requested index space covers the whole
//! domain the map becomes a random injection.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxiliary::AuxSystem;
use crate::error::{Error, Result};
use crate::model::vars::*;
use crate::model::{FunctionClass, SourceModel};
use crate::prob::JointDist;

/// Upper bound on `(|X| |X1| |X2| |Y| |Z|)^n` for exact simulation.
pub const EXACT_STATE_LIMIT: f64 = 1e8;
/// Upper bound on the number of sequences of one binned layer.
pub const LAYER_DOMAIN_LIMIT: usize = 1 << 24;

const TRIAL_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const CHUNK: usize = 64;

/// Public-randomness (`f`) and stored-message (`w`) rates of one layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerRate {
    pub f: f64,
    pub w: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BinRates {
    pub v1: LayerRate,
    pub u1: LayerRate,
    pub v2: LayerRate,
    pub u2: LayerRate,
}

impl BinRates {
    /// Direct binning of `X1^n` and `X2^n` with stored rates `w1`, `w2`.
    pub fn invertible(w1: f64, w2: f64) -> Self {
        BinRates {
            u1: LayerRate { f: 0.0, w: w1 },
            u2: LayerRate { f: 0.0, w: w2 },
            ..Default::default()
        }
    }

    /// Total stored rate of each transmitter.
    pub fn storage_rates(&self) -> (f64, f64) {
        (self.v1.w + self.u1.w, self.v2.w + self.u2.w)
    }

    fn layers(&self) -> [LayerRate; 4] {
        [self.v1, self.u1, self.v2, self.u2]
    }

    fn validate(&self) -> Result<()> {
        for r in self.layers() {
            for v in [r.f, r.w] {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::OutOfDomain(format!("bin rate {v} must be finite and >= 0")));
                }
            }
        }
        Ok(())
    }

    fn is_invertible_shape(&self) -> bool {
        self.v1 == LayerRate::default()
            && self.v2 == LayerRate::default()
            && self.u1.f == 0.0
            && self.u2.f == 0.0
    }
}

/// Bin map for one layer over sequences of length `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerBins {
    alphabet: usize,
    n: usize,
    f_bits: u32,
    w_bits: u32,
    injective: bool,
    codes: Vec<u64>,
}

fn bits_for(n: usize, rate: f64) -> u32 {
    (n as f64 * rate).ceil().max(0.0) as u32
}

fn ceil_log2(d: usize) -> u32 {
    usize::BITS - (d.max(1) - 1).leading_zeros()
}

impl LayerBins {
    fn draw(n: usize, alphabet: usize, rate: LayerRate, rng: &mut ChaCha8Rng) -> Result<Self> {
        let domain = alphabet
            .checked_pow(n as u32)
            .filter(|&d| d <= LAYER_DOMAIN_LIMIT)
            .ok_or_else(|| Error::Guard(format!("layer domain {alphabet}^{n} exceeds {LAYER_DOMAIN_LIMIT}")))?;
        let mut f_bits = bits_for(n, rate.f);
        let mut w_bits = bits_for(n, rate.w);
        let cap = ceil_log2(domain);
        let tags: Vec<u64> = (0..domain).map(|_| rng.gen()).collect();
        let total = f_bits + w_bits;
        if total > cap {
            if domain > 1 {
                log::warn!("bin index space 2^{total} exceeds {domain} sequences; capping at an injective map");
            }
            f_bits = f_bits.min(cap);
            w_bits = cap - f_bits;
        }
        let total = f_bits + w_bits;
        let injective = total >= cap && domain > 1;
        let codes = if injective {
            let mut perm: Vec<u64> = (0..domain as u64).collect();
            perm.shuffle(rng);
            perm
        } else if total == 0 {
            vec![0; domain]
        } else {
            tags.iter().map(|t| t >> (64 - total)).collect()
        };
        Ok(LayerBins {
            alphabet,
            n,
            f_bits,
            w_bits,
            injective,
            codes,
        })
    }

    pub fn domain(&self) -> usize {
        self.codes.len()
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn f_bits(&self) -> u32 {
        self.f_bits
    }

    pub fn w_bits(&self) -> u32 {
        self.w_bits
    }

    pub fn is_injective(&self) -> bool {
        self.injective
    }

    /// Combined `(F, W)` index of sequence `s`.
    pub fn code(&self, s: usize) -> u64 {
        self.codes[s]
    }

    pub fn f_index(&self, s: usize) -> u64 {
        self.codes[s] >> self.w_bits
    }

    pub fn w_index(&self, s: usize) -> u64 {
        self.codes[s] & ((1u64 << self.w_bits) - 1)
    }

    /// Number of distinct combined codes.
    fn code_space(&self) -> usize {
        (1usize << (self.f_bits + self.w_bits)).max(self.domain())
    }

    /// Sequences grouped by combined code, each group in lexicographic order.
    fn members(&self) -> Vec<Vec<u32>> {
        let mut groups = vec![Vec::new(); self.code_space()];
        for (s, &c) in self.codes.iter().enumerate() {
            groups[c as usize].push(s as u32);
        }
        groups
    }

    fn storage(&self) -> f64 {
        self.w_bits as f64 / self.n as f64
    }
}

/// Bin maps for the four layers `V1, U1, V2, U2`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinAssignment {
    pub n: usize,
    pub seed: u64,
    pub v1: LayerBins,
    pub u1: LayerBins,
    pub v2: LayerBins,
    pub u2: LayerBins,
}

impl BinAssignment {
    /// Realized storage rates `(W1, W2)` in bits/symbol.
    pub fn storage(&self) -> (f64, f64) {
        (
            self.v1.storage() + self.u1.storage(),
            self.v2.storage() + self.u2.storage(),
        )
    }
}

/// Draw bin maps. Without `aux` the `U` layers bin `X1^n` and `X2^n`
/// directly and the `V` layers are trivial.
pub fn make_binning(
    n: usize,
    rates: &BinRates,
    model: &SourceModel,
    aux: Option<&AuxSystem>,
    seed: u64,
) -> Result<BinAssignment> {
    if n == 0 {
        return Err(Error::OutOfDomain("blocklength must be >= 1".into()));
    }
    rates.validate()?;
    let sizes = match aux {
        None => [1, model.alphabets().x1.len(), 1, model.alphabets().x2.len()],
        Some(a) => {
            a.check_compatible(model)?;
            let c = a.cardinalities();
            [c.v1, c.u1, c.v2, c.u2]
        }
    };
    let mut layers = Vec::with_capacity(4);
    for (i, (rate, size)) in rates.layers().into_iter().zip(sizes).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        layers.push(LayerBins::draw(n, size, rate, &mut rng)?);
    }
    let mut it = layers.into_iter();
    Ok(BinAssignment {
        n,
        seed,
        v1: it.next().unwrap(),
        u1: it.next().unwrap(),
        v2: it.next().unwrap(),
        u2: it.next().unwrap(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    Exact,
    MonteCarlo,
}

/// Operational measurements of one simulation run. Leakages are in
/// bits/symbol and present only in exact mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub seed: u64,
    pub mode: SimMode,
    pub rates: BinRates,
    pub error_prob: f64,
    pub secrecy_leak: Option<f64>,
    pub priv_dec: Option<f64>,
    pub priv_eve: Option<f64>,
    pub storage1: f64,
    pub storage2: f64,
    pub trials: Option<usize>,
    /// 95% Wilson interval `(lo, hi)` around `error_prob`.
    pub error_ci: Option<(f64, f64)>,
    pub confidence_radius: Option<f64>,
}

/// Neumaier compensated sum.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn digits_of(mut s: usize, k: usize, out: &mut [usize]) {
    for d in out.iter_mut().rev() {
        *d = s % k;
        s /= k;
    }
}

/// Every sequence of `k^n` expanded to digits, most significant first.
fn all_digits(k: usize, n: usize) -> Vec<Vec<usize>> {
    let total = k.pow(n as u32);
    (0..total)
        .map(|s| {
            let mut d = vec![0; n];
            digits_of(s, k, &mut d);
            d
        })
        .collect()
}

fn seq_index(digits: &[usize], k: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * k + d)
}

/// Dense per-letter table over `axes`, indexed row-major.
struct Table {
    data: Vec<f64>,
    strides: Vec<usize>,
}

impl Table {
    fn new(joint: &JointDist, axes: &[&str]) -> Result<Self> {
        let m = joint.marginalize(axes)?;
        Ok(Table {
            strides: crate::prob::strides(&m.shape()),
            data: m.mass().to_vec(),
        })
    }

    fn ln(mut self) -> Self {
        self.data.iter_mut().for_each(|p| *p = p.ln());
        self
    }

    fn at(&self, idx: &[usize]) -> f64 {
        self.data[idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum::<usize>()]
    }
}

fn require_invertible(model: &SourceModel) -> Result<()> {
    if model.classify_function()? != FunctionClass::Invertible {
        return Err(Error::Precondition("not invertible".into()));
    }
    Ok(())
}

/// `H(W1, W2 | C^n)` and, for `C = Y`, the MAP error probability.
struct ContextPass {
    cond_entropy: f64,
    error: f64,
}

#[allow(clippy::too_many_arguments)]
fn context_pass(
    model: &SourceModel,
    table: &Table,
    kc: usize,
    n: usize,
    x1s: &[Vec<usize>],
    x2s: &[Vec<usize>],
    w1: &[usize],
    w2: &[usize],
    nb2: usize,
    nb: usize,
    with_error: bool,
) -> ContextPass {
    let total = kc.pow(n as u32);
    let chunks: Vec<(f64, f64)> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut h = CompensatedSum::default();
            let mut err = CompensatedSum::default();
            let mut acc = vec![0.0; nb];
            let mut best: Vec<(f64, usize, usize)> = vec![(-1.0, 0, 0); nb];
            let mut probs = vec![0.0; x1s.len() * x2s.len()];
            let mut c = vec![0; n];
            for ci in chunk * CHUNK..((chunk + 1) * CHUNK).min(total) {
                digits_of(ci, kc, &mut c);
                acc.iter_mut().for_each(|a| *a = 0.0);
                if with_error {
                    best.iter_mut().for_each(|b| *b = (-1.0, 0, 0));
                }
                for (i1, a) in x1s.iter().enumerate() {
                    for (i2, b) in x2s.iter().enumerate() {
                        let mut p = 1.0;
                        for t in 0..n {
                            p *= table.at(&[a[t], b[t], c[t]]);
                        }
                        let w = w1[i1] * nb2 + w2[i2];
                        acc[w] += p;
                        if with_error {
                            probs[i1 * x2s.len() + i2] = p;
                            if p > best[w].0 {
                                best[w] = (p, i1, i2);
                            }
                        }
                    }
                }
                let pc: f64 = acc.iter().sum();
                for &a in &acc {
                    if a > 0.0 {
                        h.add(-a * (a / pc).log2());
                    }
                }
                if with_error {
                    for (i1, a) in x1s.iter().enumerate() {
                        for (i2, b) in x2s.iter().enumerate() {
                            let p = probs[i1 * x2s.len() + i2];
                            if p == 0.0 {
                                continue;
                            }
                            let (_, h1, h2) = best[w1[i1] * nb2 + w2[i2]];
                            let wrong = (0..n).any(|t| {
                                model.f(a[t], b[t], c[t]) != model.f(x1s[h1][t], x2s[h2][t], c[t])
                            });
                            if wrong {
                                err.add(p);
                            }
                        }
                    }
                }
            }
            (h.value(), err.value())
        })
        .collect();
    let mut h = CompensatedSum::default();
    let mut e = CompensatedSum::default();
    for (a, b) in chunks {
        h.add(a);
        e.add(b);
    }
    ContextPass {
        cond_entropy: h.value(),
        error: e.value(),
    }
}

/// Exact error probability and leakages for invertible `f`, binning
/// `X1^n` and `X2^n` directly. The decoder is the exact MAP rule over
/// `(x1^n, x2^n)` given `(W1, W2, y^n)`, ties to the lexicographically
/// first pair.
pub fn simulate_exact(model: &SourceModel, n: usize, rates: &BinRates, seed: u64) -> Result<SimReport> {
    require_invertible(model)?;
    if !rates.is_invertible_shape() {
        return Err(Error::Precondition(
            "exact mode bins X1, X2 directly: only the U-layer W rates may be nonzero".into(),
        ));
    }
    let a = model.alphabets();
    let per_letter = (a.x.len() * a.x1.len() * a.x2.len() * a.y.len() * a.z.len()) as f64;
    let states = per_letter.powi(n as i32);
    if states > EXACT_STATE_LIMIT {
        return Err(Error::Guard(format!(
            "exact enumeration needs {states:.3e} states, limit {EXACT_STATE_LIMIT:e}"
        )));
    }
    let bins = make_binning(n, rates, model, None, seed)?;
    let joint = model.build_joint()?;
    let x1s = all_digits(a.x1.len(), n);
    let x2s = all_digits(a.x2.len(), n);
    let w1: Vec<usize> = (0..x1s.len()).map(|s| bins.u1.w_index(s) as usize).collect();
    let w2: Vec<usize> = (0..x2s.len()).map(|s| bins.u2.w_index(s) as usize).collect();
    let nb1 = w1.iter().max().map_or(1, |m| m + 1);
    let nb2 = w2.iter().max().map_or(1, |m| m + 1);
    let nb = nb1 * nb2;

    let run = |ctx: &str, kc: usize, with_error: bool| -> Result<ContextPass> {
        let table = Table::new(&joint, &[X1, X2, ctx])?;
        Ok(context_pass(model, &table, kc, n, &x1s, &x2s, &w1, &w2, nb2, nb, with_error))
    };
    let y = run(Y, a.y.len(), true)?;
    let z = run(Z, a.z.len(), false)?;
    let x = run(X, a.x.len(), false)?;

    let tol = model.tolerances();
    let nf = n as f64;
    let secrecy = tol.clamp(z.cond_entropy / nf, "secrecy leakage")?;
    let priv_dec = tol.clamp((y.cond_entropy - x.cond_entropy) / nf, "decoder privacy leakage")?;
    let priv_eve = tol.clamp((z.cond_entropy - x.cond_entropy) / nf, "eavesdropper privacy leakage")?;
    let (storage1, storage2) = bins.storage();
    Ok(SimReport {
        n,
        seed,
        mode: SimMode::Exact,
        rates: *rates,
        error_prob: y.error.clamp(0.0, 1.0),
        secrecy_leak: Some(secrecy),
        priv_dec: Some(priv_dec),
        priv_eve: Some(priv_eve),
        storage1,
        storage2,
        trials: None,
        error_ci: None,
        confidence_radius: None,
    })
}

/// 95% Wilson score interval for `k` successes in `trials`.
pub fn wilson_interval(k: u64, trials: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    let nt = trials as f64;
    let p = k as f64 / nt;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / nt;
    let center = (p + z2 / (2.0 * nt)) / denom;
    let half = Z / denom * (p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)).sqrt();
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

fn sample(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Lexicographically first maximiser of `score` over `members`.
fn map_decode(members: &[u32], k: usize, n: usize, mut score: impl FnMut(&[usize]) -> f64) -> Vec<usize> {
    let mut best = f64::NEG_INFINITY;
    let mut best_seq = vec![0; n];
    let mut d = vec![0; n];
    let mut first = true;
    for &s in members {
        digits_of(s as usize, k, &mut d);
        let v = score(&d);
        if first || v > best {
            best = v;
            best_seq.copy_from_slice(&d);
            first = false;
        }
    }
    best_seq
}

struct Letters {
    x1: Vec<usize>,
    x2: Vec<usize>,
    y: Vec<usize>,
}

fn sample_letters(model: &SourceModel, n: usize, rng: &mut ChaCha8Rng) -> Letters {
    let nz = model.alphabets().z.len();
    let mut l = Letters {
        x1: Vec::with_capacity(n),
        x2: Vec::with_capacity(n),
        y: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let x = sample(model.p_x(), rng);
        l.x1.push(sample(model.ch1().row(x), rng));
        l.x2.push(sample(model.ch2().row(x), rng));
        l.y.push(sample(model.ch_yz().row(x), rng) / nz);
    }
    l
}

/// Monte Carlo estimate of the error probability. Without `aux` the
/// transmitters bin their observations directly and the decoder is joint
/// MAP; with `aux` (one time-sharing branch) the decoder runs the
/// successive order `V1, V2, U1, U2` by MAP over each bin, then
/// reconstructs `f` letter-wise by MAP given `(u1, u2, y)`.
pub fn simulate_mc(
    model: &SourceModel,
    n: usize,
    rates: &BinRates,
    seed: u64,
    trials: usize,
    aux: Option<&AuxSystem>,
) -> Result<SimReport> {
    if trials == 0 {
        return Err(Error::OutOfDomain("trials must be >= 1".into()));
    }
    let bins = make_binning(n, rates, model, aux, seed)?;
    let run_trial: Box<dyn Fn(&mut ChaCha8Rng) -> bool + Sync> = match aux {
        None => {
            require_invertible(model)?;
            if !rates.is_invertible_shape() {
                return Err(Error::Precondition(
                    "invertible mode bins X1, X2 directly: only the U-layer W rates may be nonzero".into(),
                ));
            }
            let logp = Table::new(&model.build_joint()?, &[X1, X2, Y])?.ln();
            let (k1, k2) = (model.alphabets().x1.len(), model.alphabets().x2.len());
            let m1 = bins.u1.members();
            let m2 = bins.u2.members();
            let bins = &bins;
            Box::new(move |rng: &mut ChaCha8Rng| {
                let l = sample_letters(model, n, rng);
                let g1 = &m1[bins.u1.code(seq_index(&l.x1, k1)) as usize];
                let g2 = &m2[bins.u2.code(seq_index(&l.x2, k2)) as usize];
                let mut best = f64::NEG_INFINITY;
                let mut best_pair = (0, 0);
                let mut first = true;
                let (mut a, mut b) = (vec![0; n], vec![0; n]);
                for &s1 in g1 {
                    digits_of(s1 as usize, k1, &mut a);
                    for &s2 in g2 {
                        digits_of(s2 as usize, k2, &mut b);
                        let v: f64 = (0..n).map(|t| logp.at(&[a[t], b[t], l.y[t]])).sum();
                        if first || v > best {
                            best = v;
                            best_pair = (s1, s2);
                            first = false;
                        }
                    }
                }
                digits_of(best_pair.0 as usize, k1, &mut a);
                digits_of(best_pair.1 as usize, k2, &mut b);
                (0..n).any(|t| model.f(a[t], b[t], l.y[t]) != model.f(l.x1[t], l.x2[t], l.y[t]))
            })
        }
        Some(aux) => {
            if aux.weights().len() != 1 {
                return Err(Error::Precondition(
                    "auxiliary simulation requires a single time-sharing branch".into(),
                ));
            }
            return simulate_mc_aux(model, n, rates, seed, trials, aux, bins);
        }
    };
    finish_mc(n, seed, rates, trials, &bins, run_trial.as_ref())
}

fn finish_mc(
    n: usize,
    seed: u64,
    rates: &BinRates,
    trials: usize,
    bins: &BinAssignment,
    run_trial: &(dyn Fn(&mut ChaCha8Rng) -> bool + Sync),
) -> Result<SimReport> {
    let errors: u64 = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut e = 0u64;
            for t in chunk * CHUNK..((chunk + 1) * CHUNK).min(trials) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ TRIAL_SALT);
                rng.set_stream(t as u64);
                e += u64::from(run_trial(&mut rng));
            }
            e
        })
        .sum();
    let (lo, hi) = wilson_interval(errors, trials as u64);
    let (storage1, storage2) = bins.storage();
    Ok(SimReport {
        n,
        seed,
        mode: SimMode::MonteCarlo,
        rates: *rates,
        error_prob: errors as f64 / trials as f64,
        secrecy_leak: None,
        priv_dec: None,
        priv_eve: None,
        storage1,
        storage2,
        trials: Some(trials),
        error_ci: Some((lo, hi)),
        confidence_radius: Some((hi - lo) / 2.0),
    })
}

fn simulate_mc_aux(
    model: &SourceModel,
    n: usize,
    rates: &BinRates,
    seed: u64,
    trials: usize,
    aux: &AuxSystem,
    bins: BinAssignment,
) -> Result<SimReport> {
    let joint = aux.induced_joint_with_f(model)?;
    let t1 = Table::new(&joint, &[V1, Y])?.ln();
    let t2 = Table::new(&joint, &[V2, V1, Y])?.ln();
    let t3 = Table::new(&joint, &[U1, V1, V2, Y])?.ln();
    let t4 = Table::new(&joint, &[U2, U1, V1, V2, Y])?;
    let t4 = t4.ln();
    let tf = Table::new(&joint, &[F, U1, U2, Y])?;
    let c = aux.cardinalities();
    let nf = model.alphabets().f.len();
    let ny = model.alphabets().y.len();
    // Letter-wise reconstruction g(u1, u2, y).
    let mut g = vec![0; c.u1 * c.u2 * ny];
    for u1 in 0..c.u1 {
        for u2 in 0..c.u2 {
            for y in 0..ny {
                let mut best = (0, -1.0);
                for f in 0..nf {
                    let p = tf.at(&[f, u1, u2, y]);
                    if p > best.1 {
                        best = (f, p);
                    }
                }
                g[(u1 * c.u2 + u2) * ny + y] = best.0;
            }
        }
    }
    let members = [bins.v1.members(), bins.u1.members(), bins.v2.members(), bins.u2.members()];
    let br = &aux.branches()[0];
    let run = |rng: &mut ChaCha8Rng| -> bool {
        let l = sample_letters(model, n, rng);
        let u1: Vec<usize> = l.x1.iter().map(|&x| sample(br.u1.row(x), rng)).collect();
        let v1: Vec<usize> = u1.iter().map(|&u| sample(br.v1.row(u), rng)).collect();
        let u2: Vec<usize> = l.x2.iter().map(|&x| sample(br.u2.row(x), rng)).collect();
        let v2: Vec<usize> = u2.iter().map(|&u| sample(br.v2.row(u), rng)).collect();
        let y = &l.y;
        let g1 = &members[0][bins.v1.code(seq_index(&v1, c.v1)) as usize];
        let hv1 = map_decode(g1, c.v1, n, |s| (0..n).map(|t| t1.at(&[s[t], y[t]])).sum());
        let g2 = &members[2][bins.v2.code(seq_index(&v2, c.v2)) as usize];
        let hv2 = map_decode(g2, c.v2, n, |s| (0..n).map(|t| t2.at(&[s[t], hv1[t], y[t]])).sum());
        let g3 = &members[1][bins.u1.code(seq_index(&u1, c.u1)) as usize];
        let hu1 = map_decode(g3, c.u1, n, |s| {
            (0..n).map(|t| t3.at(&[s[t], hv1[t], hv2[t], y[t]])).sum()
        });
        let g4 = &members[3][bins.u2.code(seq_index(&u2, c.u2)) as usize];
        let hu2 = map_decode(g4, c.u2, n, |s| {
            (0..n).map(|t| t4.at(&[s[t], hu1[t], hv1[t], hv2[t], y[t]])).sum()
        });
        (0..n).any(|t| g[(hu1[t] * c.u2 + hu2[t]) * ny + y[t]] != model.f(l.x1[t], l.x2[t], y[t]))
    };
    finish_mc(n, seed, rates, trials, &bins, &run)
}

/// Bin rates of the achievability scheme for a given `epsilon > 0`,
/// negative values clamped to zero. Without `aux` the transmitters bin
/// their observations at the decoding-order corner `H(X1|Y) + 4 eps`,
/// `H(X2|X1,Y) + 4 eps`.
pub fn default_rates(model: &SourceModel, aux: Option<&AuxSystem>, epsilon: f64) -> Result<BinRates> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::OutOfDomain(format!("epsilon = {epsilon} must be > 0")));
    }
    let e = epsilon;
    let pos = |v: f64| v.max(0.0);
    match aux {
        None => {
            let j = model.build_joint()?;
            let w1 = j.conditional_entropy(&[X1], &[Y])? + 4.0 * e;
            let w2 = j.conditional_entropy(&[X2], &[X1, Y])? + 4.0 * e;
            Ok(BinRates::invertible(w1, w2))
        }
        Some(aux) => {
            if aux.weights().len() != 1 {
                return Err(Error::Precondition(
                    "bin rates need a single time-sharing branch".into(),
                ));
            }
            let j = aux.induced_joint(model)?;
            let c = crate::prob::InfoCalc::new(&j);
            Ok(BinRates {
                v1: LayerRate {
                    f: pos(c.hc(&[V1], &[X1])? - e),
                    w: pos(c.mi(&[V1], &[X1], &[])? - c.mi(&[V1], &[Y], &[])? + 2.0 * e),
                },
                v2: LayerRate {
                    f: pos(c.hc(&[V2], &[X2])? - e),
                    w: pos(c.mi(&[V2], &[X2], &[])? - c.mi(&[V2], &[V1, Y], &[])? + 2.0 * e),
                },
                u1: LayerRate {
                    f: pos(c.hc(&[U1], &[V1, X1])? - e),
                    w: pos(c.mi(&[U1], &[X1], &[V1])? - c.mi(&[U1], &[V2, Y], &[V1])? + 2.0 * e),
                },
                u2: LayerRate {
                    f: pos(c.hc(&[U2], &[V2, X2])? - e),
                    w: pos(c.mi(&[U2], &[X2], &[V2])? - c.mi(&[U2], &[U1, Y], &[V2])? + 2.0 * e),
                },
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelAlphabets;
    use crate::prob::Alphabet;
    use crate::regions::eval_lemma4;

    fn example() -> SourceModel {
        SourceModel::bernoulli_example(0.2, 0.11, 0.3, 0.25).unwrap()
    }

    fn copy_model() -> SourceModel {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let yz = vec![vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![vec![0.0, 0.0], vec![0.0, 1.0]]];
        SourceModel::new(ModelAlphabets::binary(), vec![0.4, 0.6], &id, &id, &yz, vec![0; 8], None)
            .unwrap()
            .with_function_fn(Alphabet::indexed(F, 4).unwrap(), |a, b, _| a * 2 + b)
            .unwrap()
    }

    #[test]
    fn binning_basics() {
        let m = example();
        let b = make_binning(1, &BinRates::invertible(1.0, 0.0), &m, None, 3).unwrap();
        assert!(b.u1.is_injective());
        assert_ne!(b.u1.w_index(0), b.u1.w_index(1));
        assert_eq!(b.u2.w_index(0), b.u2.w_index(1));
        assert_eq!(b, make_binning(1, &BinRates::invertible(1.0, 0.0), &m, None, 3).unwrap());
        let big = make_binning(2, &BinRates::invertible(5.0, 0.5), &m, None, 3).unwrap();
        assert!(big.u1.is_injective());
        assert_eq!(big.storage(), (1.0, 0.5));
        assert!(make_binning(0, &BinRates::default(), &m, None, 0).is_err());
    }

    #[test]
    fn binning_is_nested() {
        let m = example();
        for seed in 0..5 {
            let coarse = make_binning(4, &BinRates::invertible(0.5, 0.25), &m, None, seed).unwrap();
            let fine = make_binning(4, &BinRates::invertible(0.75, 0.5), &m, None, seed).unwrap();
            for s in 0..16 {
                assert_eq!(fine.u1.w_index(s) >> 1, coarse.u1.w_index(s));
                assert_eq!(fine.u2.w_index(s) >> 1, coarse.u2.w_index(s));
            }
        }
    }

    #[test]
    fn exact_n1_injective_matches_single_letter() {
        let m = example();
        let r = simulate_exact(&m, 1, &BinRates::invertible(1.0, 1.0), 7).unwrap();
        let l4 = eval_lemma4(&m).unwrap();
        assert!((r.secrecy_leak.unwrap() - l4.r_s).abs() < 1e-9);
        assert!((r.priv_dec.unwrap() - l4.r_l_dec).abs() < 1e-9);
        assert!((r.priv_eve.unwrap() - l4.r_l_eve).abs() < 1e-9);
        assert_eq!(r.error_prob, 0.0);
        assert_eq!((r.storage1, r.storage2), (1.0, 1.0));
    }

    #[test]
    fn zero_rate_has_zero_privacy_leakage() {
        let r = simulate_exact(&example(), 2, &BinRates::invertible(0.0, 0.0), 1).unwrap();
        assert_eq!(r.priv_dec, Some(0.0));
        assert_eq!(r.priv_eve, Some(0.0));
        assert!(r.error_prob > 0.0);
    }

    #[test]
    fn decoder_knows_inputs_never_errs() {
        let m = copy_model();
        for w in [0.0, 0.5, 1.0] {
            assert_eq!(simulate_exact(&m, 2, &BinRates::invertible(w, w), 4).unwrap().error_prob, 0.0);
            let mc = simulate_mc(&m, 3, &BinRates::invertible(w, w), 4, 50, None).unwrap();
            assert_eq!(mc.error_prob, 0.0);
        }
    }

    #[test]
    fn exact_guard_and_preconditions() {
        let m = example();
        assert!(matches!(
            simulate_exact(&m, 6, &BinRates::invertible(1.0, 1.0), 0),
            Err(Error::Guard(_))
        ));
        let c = m.clone().with_function(Alphabet::binary(F), vec![0; 8]).unwrap();
        assert!(matches!(
            simulate_exact(&c, 1, &BinRates::default(), 0),
            Err(Error::Precondition(_))
        ));
        let mut r = BinRates::invertible(1.0, 1.0);
        r.v1.w = 0.5;
        assert!(simulate_exact(&m, 1, &r, 0).is_err());
    }

    #[test]
    fn mc_full_rate_and_determinism() {
        let m = example();
        let full = BinRates::invertible(1.0, 1.0);
        let r = simulate_mc(&m, 4, &full, 2, 200, None).unwrap();
        assert_eq!(r.error_prob, 0.0);
        let half = BinRates::invertible(0.5, 0.5);
        let a = simulate_mc(&m, 4, &half, 2, 300, None).unwrap();
        let b = simulate_mc(&m, 4, &half, 2, 300, None).unwrap();
        assert_eq!(a, b);
        let (lo, hi) = a.error_ci.unwrap();
        assert!(lo <= a.error_prob && a.error_prob <= hi);
    }

    #[test]
    fn default_rates_examples() {
        let m = example();
        let r = default_rates(&m, None, 1e-9).unwrap();
        let (w1, w2) = r.storage_rates();
        assert!((w1 + w2 - 0.7686).abs() < 5e-5);
        let aux = default_rates(&m, Some(&AuxSystem::identity(&m)), 1e-9).unwrap();
        let (a1, a2) = aux.storage_rates();
        assert!((a1 - w1).abs() < 1e-9 && (a2 - w2).abs() < 1e-9);
        let d = default_rates(&copy_model(), None, 1e-12).unwrap().storage_rates();
        assert!(d.0 < 1e-9 && d.1 < 1e-9);
        assert!(default_rates(&m, None, 0.0).is_err());
    }

    #[test]
    fn aux_mode_identity_full_rate_is_error_free() {
        let m = example();
        let aux = AuxSystem::identity(&m);
        let r = simulate_mc(&m, 3, &BinRates::invertible(1.0, 1.0), 5, 100, Some(&aux)).unwrap();
        assert_eq!(r.error_prob, 0.0);
    }

    #[test]
    fn exact_and_mc_agree() {
        let m = example();
        let rates = BinRates::invertible(0.5, 0.5);
        let e = simulate_exact(&m, 2, &rates, 9).unwrap();
        let mc = simulate_mc(&m, 2, &rates, 9, 4000, None).unwrap();
        let (lo, hi) = mc.error_ci.unwrap();
        assert!(lo <= e.error_prob && e.error_prob <= hi, "{e:?} {mc:?}");
    }

    #[test]
    fn wilson_edges() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }
}
