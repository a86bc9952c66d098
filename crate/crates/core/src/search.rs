//! Random-restart search over auxiliary systems, producing a Pareto front of
//! inner-bound points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxiliary::{AuxSystem, Cardinalities};
use crate::error::{Error, Result};
use crate::model::SourceModel;
use crate::regions::{eval_inner_lossy, inner_bounds_unchecked, RateBounds};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "FUNCOMP_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Lossless,
    Lossy,
}

impl SearchMode {
    /// Number of objectives scored in this mode.
    pub fn objective_count(self) -> usize {
        match self {
            SearchMode::Lossless => 6,
            SearchMode::Lossy => 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub card: Cardinalities,
    pub restarts: usize,
    pub iterations: usize,
    pub scale: f64,
    pub seed: u64,
    pub mode: SearchMode,
    pub weights: Vec<f64>,
    /// Weight on `H(f|U1,U2,Y,Q)` added to the score in lossless mode.
    pub penalty: f64,
    /// Thread count; `None` reads [`WORKERS_ENV`] and falls back to rayon's
    /// default.
    pub workers: Option<usize>,
}

/// Largest allowed cardinalities for one mode.
pub fn cardinality_caps(model: &SourceModel, mode: SearchMode) -> Cardinalities {
    let extra = match mode {
        SearchMode::Lossless => 6,
        SearchMode::Lossy => 7,
    };
    let (n1, n2) = (model.alphabets().x1.len(), model.alphabets().x2.len());
    Cardinalities {
        q: 2,
        u1: (n1 + extra) * (n1 + extra),
        v1: n1 + extra,
        u2: (n2 + extra) * (n2 + extra),
        v2: n2 + extra,
    }
}

impl SearchConfig {
    /// Small default cardinalities, uniform weights.
    pub fn new(model: &SourceModel, mode: SearchMode, seed: u64) -> Self {
        let (n1, n2) = (model.alphabets().x1.len(), model.alphabets().x2.len());
        let caps = cardinality_caps(model, mode);
        let n = mode.objective_count();
        SearchConfig {
            card: Cardinalities {
                q: 2,
                u1: (n1 + 1).min(caps.u1),
                v1: 2,
                u2: (n2 + 1).min(caps.u2),
                v2: 2,
            },
            restarts: 8,
            iterations: 200,
            scale: 0.3,
            seed,
            mode,
            weights: vec![1.0 / n as f64; n],
            penalty: 10.0,
            workers: None,
        }
    }

    pub fn validate(&self, model: &SourceModel) -> Result<()> {
        let caps = cardinality_caps(model, self.mode);
        let c = self.card;
        let pairs = [
            ("Q", c.q, caps.q),
            ("U1", c.u1, caps.u1),
            ("V1", c.v1, caps.v1),
            ("U2", c.u2, caps.u2),
            ("V2", c.v2, caps.v2),
        ];
        for (name, v, cap) in pairs {
            if v == 0 || v > cap {
                return Err(Error::Precondition(format!(
                    "infeasible cardinality |{name}| = {v}, allowed 1..={cap}"
                )));
            }
        }
        if self.weights.len() != self.mode.objective_count() {
            return Err(Error::ShapeMismatch {
                expected: self.mode.objective_count(),
                got: self.weights.len(),
            });
        }
        if self.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) || self.weights.iter().all(|w| *w == 0.0) {
            return Err(Error::OutOfDomain("weights must be >= 0 and not all zero".into()));
        }
        if !(self.scale > 0.0) || !(self.penalty >= 0.0) {
            return Err(Error::OutOfDomain("scale must be > 0 and penalty >= 0".into()));
        }
        if self.mode == SearchMode::Lossy && model.distortion().is_none() {
            return Err(Error::Precondition("lossy search requires a distortion metric".into()));
        }
        Ok(())
    }
}

/// Weighted sum of the objectives; lower is better.
pub fn scalarize(bounds: &RateBounds, weights: &[f64]) -> Result<f64> {
    let obj = bounds.objectives();
    if obj.len() != weights.len() {
        return Err(Error::ShapeMismatch {
            expected: obj.len(),
            got: weights.len(),
        });
    }
    Ok(obj.iter().zip(weights).map(|(o, w)| o * w).sum())
}

/// Move one conditional row (or the time-sharing weights) a fraction
/// `min(scale, 1)` of the way towards a uniformly random simplex point.
pub fn local_step<R: Rng + ?Sized>(aux: &AuxSystem, scale: f64, rng: &mut R) -> AuxSystem {
    let mut out = aux.clone();
    let s = scale.clamp(0.0, 1.0);
    let (weights, branches) = out.parts_mut();
    let q = weights.len();
    let pick = rng.gen_range(0..4 * q + usize::from(q > 1));
    let row: &mut [f64] = if pick == 4 * q {
        weights.as_mut_slice()
    } else {
        let b = &mut branches[pick / 4];
        let m = match pick % 4 {
            0 => &mut b.u1,
            1 => &mut b.v1,
            2 => &mut b.u2,
            _ => &mut b.v2,
        };
        let r = rng.gen_range(0..m.rows());
        m.row_mut(r)
    };
    let dir: Vec<f64> = (0..row.len()).map(|_| -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
    let total: f64 = dir.iter().sum();
    for (v, d) in row.iter_mut().zip(&dir) {
        *v = (1.0 - s) * *v + s * d / total;
    }
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|v| *v /= sum);
    out
}

/// One front member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    pub fingerprint: String,
    pub hash: String,
    pub aux: AuxSystem,
    pub bounds: RateBounds,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub points: Vec<FrontPoint>,
}

fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

impl ParetoFront {
    /// Insert `p` unless it is dominated or duplicates a point with a
    /// smaller fingerprint; evict points it dominates.
    pub fn insert(&mut self, p: FrontPoint) {
        let obj = p.bounds.objectives();
        for q in &mut self.points {
            let other = q.bounds.objectives();
            if dominates(&other, &obj) {
                return;
            }
            if other == obj {
                if p.fingerprint < q.fingerprint {
                    *q = p;
                }
                return;
            }
        }
        self.points.retain(|q| !dominates(&obj, &q.bounds.objectives()));
        self.points.push(p);
    }

    /// Union followed by domination filtering.
    pub fn merge(&mut self, other: ParetoFront) {
        for p in other.points {
            self.insert(p);
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn sort(&mut self) {
        self.points.sort_by(|a, b| {
            a.bounds
                .objectives()
                .partial_cmp(&b.bounds.objectives())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.fingerprint.cmp(&b.fingerprint))
        });
    }
}

struct Scored {
    bounds: RateBounds,
    residual: f64,
    score: f64,
}

fn score(model: &SourceModel, cfg: &SearchConfig, aux: &AuxSystem) -> Result<Scored> {
    let (bounds, residual) = match cfg.mode {
        SearchMode::Lossless => {
            let (_, residual) = model.check_admissible(aux)?;
            (inner_bounds_unchecked(model, aux)?, residual)
        }
        SearchMode::Lossy => (eval_inner_lossy(model, aux, None)?, 0.0),
    };
    let score = scalarize(&bounds, &cfg.weights)? + cfg.penalty * residual;
    Ok(Scored { bounds, residual, score })
}

fn offer(front: &mut ParetoFront, model: &SourceModel, aux: &AuxSystem, s: &Scored) {
    if s.residual <= model.tolerances().adm {
        let fingerprint = aux.fingerprint();
        front.insert(FrontPoint {
            hash: aux.fingerprint_hash(),
            fingerprint,
            aux: aux.clone(),
            bounds: s.bounds,
        });
    }
}

fn run_restart(model: &SourceModel, cfg: &SearchConfig, index: usize) -> Result<ParetoFront> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let mut front = ParetoFront::default();
    let mut cur = AuxSystem::random(model, cfg.card, &mut rng);
    let mut cur_s = score(model, cfg, &cur)?;
    offer(&mut front, model, &cur, &cur_s);
    for _ in 0..cfg.iterations {
        let cand = local_step(&cur, cfg.scale, &mut rng);
        let snapped = cand.snapped();
        for aux in [cand, snapped] {
            let s = score(model, cfg, &aux)?;
            offer(&mut front, model, &aux, &s);
            if s.score < cur_s.score {
                cur = aux;
                cur_s = s;
            }
        }
    }
    Ok(front)
}

fn worker_count(cfg: &SearchConfig) -> Result<Option<usize>> {
    if let Some(w) = cfg.workers {
        return Ok(Some(w));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::Parse(format!("{WORKERS_ENV} = `{v}` is not a worker count"))),
        Err(_) => Ok(None),
    }
}

/// Search the inner bound's union over auxiliary systems.
///
/// The identity and constant systems are always candidates, so in lossless
/// mode the front is never empty. Restarts run in parallel; their fronts are
/// merged in restart order so the result does not depend on scheduling.
pub fn search_inner(model: &SourceModel, cfg: &SearchConfig) -> Result<ParetoFront> {
    cfg.validate(model)?;
    let mut front = ParetoFront::default();
    for seed in [AuxSystem::identity(model), AuxSystem::constant(model)] {
        let s = score(model, cfg, &seed)?;
        offer(&mut front, model, &seed, &s);
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = worker_count(cfg)? {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let fronts: Vec<ParetoFront> = pool.install(|| {
        (0..cfg.restarts)
            .into_par_iter()
            .map(|i| run_restart(model, cfg, i))
            .collect::<Result<Vec<_>>>()
    })?;
    for f in fronts {
        front.merge(f);
    }
    if cfg.mode == SearchMode::Lossless {
        for p in &front.points {
            let (ok, r) = model.check_admissible(&p.aux)?;
            if !ok {
                return Err(Error::Internal(format!("front point {} not admissible ({r:e})", p.hash)));
            }
        }
    }
    front.sort();
    log::info!("search finished with {} front points", front.len());
    Ok(front)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{vars::F, Distortion};
    use crate::prob::Alphabet;
    use crate::regions::eval_lemma4;

    fn example() -> SourceModel {
        SourceModel::bernoulli_example(0.2, 0.11, 0.3, 0.25).unwrap()
    }

    fn quick(model: &SourceModel, mode: SearchMode, seed: u64) -> SearchConfig {
        SearchConfig {
            restarts: 3,
            iterations: 30,
            ..SearchConfig::new(model, mode, seed)
        }
    }

    #[test]
    fn scalarize_examples() {
        let b = eval_lemma4(&example()).unwrap();
        let mut w = vec![0.0; 6];
        w[0] = 1.0;
        assert_eq!(scalarize(&b, &w).unwrap(), b.r_s);
        let uniform = scalarize(&b, &[1.0 / 6.0; 6]).unwrap();
        assert!((uniform - 0.4326).abs() < 5e-5);
        assert!(scalarize(&b, &[1.0; 7]).is_err());
        let zero = RateBounds { r_s: 0.0, r_w1: 0.0, r_w2: 0.0, r_w_sum: 0.0, r_l_dec: 0.0, r_l_eve: 0.0, ..b };
        assert_eq!(scalarize(&zero, &[1.0; 6]).unwrap(), 0.0);
    }

    #[test]
    fn local_step_properties() {
        let m = example();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let card = Cardinalities { q: 2, u1: 3, v1: 2, u2: 3, v2: 2 };
        let aux = AuxSystem::random(&m, card, &mut rng);
        let tiny = local_step(&aux, 1e-15, &mut rng);
        for (a, b) in aux.branches().iter().zip(tiny.branches()) {
            for (x, y) in a.u1.data().iter().zip(b.u1.data()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        let (mut a1, mut a2) = (aux.clone(), aux.clone());
        for _ in 0..20 {
            a1 = local_step(&a1, 0.5, &mut r1);
            a2 = local_step(&a2, 0.5, &mut r2);
            assert_eq!(a1, a2);
            // Re-validation checks every row sums to 1.
            AuxSystem::new(a1.weights().to_vec(), a1.branches().to_vec()).unwrap();
        }
        assert_ne!(a1, aux);
    }

    #[test]
    fn front_is_non_dominated_and_contains_identity_corner() {
        let m = example();
        let front = search_inner(&m, &quick(&m, SearchMode::Lossless, 5)).unwrap();
        let target = eval_lemma4(&m).unwrap().objectives();
        assert!(front.points.iter().any(|p| p
            .bounds
            .objectives()
            .iter()
            .zip(&target)
            .all(|(a, b)| (a - b).abs() <= 1e-6)));
        for a in &front.points {
            for b in &front.points {
                assert!(!dominates(&a.bounds.objectives(), &b.bounds.objectives()));
            }
            assert!(m.check_admissible(&a.aux).unwrap().0);
        }
    }

    #[test]
    fn constant_function_collapses_to_zero() {
        let m = example().with_function(Alphabet::binary(F), vec![0; 8]).unwrap();
        let front = search_inner(&m, &quick(&m, SearchMode::Lossless, 2)).unwrap();
        assert_eq!(front.len(), 1);
        assert!(front.points[0].bounds.objectives().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lossy_front_has_zero_distortion_point() {
        let m = example();
        let m = m.clone().with_distortion(Distortion::hamming(&m.alphabets().f)).unwrap();
        let mut cfg = quick(&m, SearchMode::Lossy, 4);
        cfg.weights = vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        let front = search_inner(&m, &cfg).unwrap();
        assert!(front.points.iter().any(|p| p.bounds.d == Some(0.0)));
        let m2 = example();
        assert!(search_inner(&m2, &SearchConfig::new(&m2, SearchMode::Lossy, 0)).is_err());
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let m = example();
        let mut cfg = quick(&m, SearchMode::Lossless, 11);
        cfg.workers = Some(1);
        let a = search_inner(&m, &cfg).unwrap();
        cfg.workers = Some(3);
        let b = search_inner(&m, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_configs() {
        let m = example();
        let mut cfg = SearchConfig::new(&m, SearchMode::Lossless, 0);
        cfg.card.q = 3;
        assert!(matches!(search_inner(&m, &cfg), Err(Error::Precondition(_))));
        let mut cfg = SearchConfig::new(&m, SearchMode::Lossless, 0);
        cfg.card.v1 = 9;
        assert!(cfg.validate(&m).is_err());
        cfg.card.v1 = 8;
        cfg.validate(&m).unwrap();
        cfg.weights = vec![0.0; 6];
        assert!(cfg.validate(&m).is_err());
    }

    #[test]
    fn merge_keeps_previous_non_dominated_points() {
        let m = example();
        let small = search_inner(&m, &quick(&m, SearchMode::Lossless, 8)).unwrap();
        let mut cfg = quick(&m, SearchMode::Lossless, 8);
        cfg.restarts = 5;
        let big = search_inner(&m, &cfg).unwrap();
        for p in &small.points {
            let o = p.bounds.objectives();
            assert!(big.points.iter().any(|q| q.bounds.objectives() == o
                || dominates(&q.bounds.objectives(), &o)));
        }
    }
}
