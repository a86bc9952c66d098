//! Single-letter rate-region bounds.
//!
//! Every evaluator returns a [`RateBounds`]: component-wise lower bounds on
//! `(R_s, R_w1, R_w2, R_w1 + R_w2, R_l,Dec, R_l,Eve)` and, for lossy
//! evaluators, the achievable distortion `D`. Regions are unions of such
//! bound tuples over auxiliary systems.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auxiliary::{AuxSystem, Stochastic};
use crate::error::{Error, Result};
use crate::model::vars::*;
use crate::model::{verify_markov_given, SourceModel};
use crate::prob::{neg_part, Alphabet, Bits, Channel, InfoCalc, JointDist, Tolerances};

/// Which bound produced a [`RateBounds`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Thm1Inner,
    Thm1Outer,
    Thm2Inner,
    Thm2Outer,
    Lemma1,
    Lemma2,
    Lemma3,
    Lemma4,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Thm1Inner => "thm1_inner",
            Origin::Thm1Outer => "thm1_outer",
            Origin::Thm2Inner => "thm2_inner",
            Origin::Thm2Outer => "thm2_outer",
            Origin::Lemma1 => "lemma1",
            Origin::Lemma2 => "lemma2",
            Origin::Lemma3 => "lemma3",
            Origin::Lemma4 => "lemma4",
        }
    }
}

impl std::fmt::Display for Origin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lower bounds in bits/symbol, plus optional distortion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateBounds {
    pub origin: Origin,
    pub r_s: Bits,
    pub r_w1: Bits,
    pub r_w2: Bits,
    pub r_w_sum: Bits,
    pub r_l_dec: Bits,
    pub r_l_eve: Bits,
    pub d: Option<f64>,
}

impl RateBounds {
    /// The six rate coordinates, followed by `d` when present.
    pub fn objectives(&self) -> Vec<f64> {
        let mut v = vec![self.r_s, self.r_w1, self.r_w2, self.r_w_sum, self.r_l_dec, self.r_l_eve];
        if let Some(d) = self.d {
            v.push(d);
        }
        v
    }

    /// Reject bounds that are negative beyond tolerance.
    fn checked(self, tol: &Tolerances) -> Result<Self> {
        let names = ["r_s", "r_w1", "r_w2", "r_w_sum", "r_l_dec", "r_l_eve"];
        for (name, v) in names.iter().zip(self.objectives()) {
            if v < -tol.num || !v.is_finite() {
                return Err(Error::Internal(format!("{} bound {name} = {v}", self.origin)));
            }
        }
        Ok(self)
    }
}

/// Successive decoding order of a corner point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CornerOrder {
    /// `V1, V2, U1, U2`.
    Order12,
    /// `V2, V1, U2, U1`.
    Order21,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerPoint {
    pub which: CornerOrder,
    pub bounds: RateBounds,
}

/// Reconstruction map `g(u1, u2, y) -> f_hat`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconstructionMap {
    n_u1: usize,
    n_u2: usize,
    n_y: usize,
    table: Vec<usize>,
}

impl ReconstructionMap {
    pub fn new(n_u1: usize, n_u2: usize, n_y: usize, table: Vec<usize>) -> Result<Self> {
        if table.len() != n_u1 * n_u2 * n_y {
            return Err(Error::ShapeMismatch {
                expected: n_u1 * n_u2 * n_y,
                got: table.len(),
            });
        }
        Ok(ReconstructionMap { n_u1, n_u2, n_y, table })
    }

    pub fn get(&self, u1: usize, u2: usize, y: usize) -> usize {
        self.table[(u1 * self.n_u2 + u2) * self.n_y + y]
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n_u1, self.n_u2, self.n_y)
    }
}

/// Information terms conditioned additionally on the time-sharing variable
/// whenever the joint carries one: `Q` is known to every party, so each
/// branch contributes its own conditional terms.
struct Shared<'c, 'a> {
    c: &'c InfoCalc<'a>,
    q: bool,
}

impl<'c, 'a> Shared<'c, 'a> {
    fn new(c: &'c InfoCalc<'a>) -> Self {
        Shared { c, q: c.dist().has_axis(Q) }
    }

    fn given<'n>(&self, given: &[&'n str]) -> Vec<&'n str> {
        let mut g = given.to_vec();
        if self.q && !g.contains(&Q) {
            g.push(Q);
        }
        g
    }

    fn mi(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<Bits> {
        self.c.mi(a, b, &self.given(given))
    }

    fn hc(&self, a: &[&str], given: &[&str]) -> Result<Bits> {
        self.c.hc(a, &self.given(given))
    }
}

/// The six inner-bound expressions on a joint carrying all ten axes.
fn inner_terms(c: &InfoCalc) -> Result<RateBounds> {
    let c = Shared::new(c);
    let bracket = neg_part(c.mi(&[U1, U2], &[Z], &[V1, V2, Q])? - c.mi(&[U1, U2], &[Y], &[V1, V2, Q])?);
    Ok(RateBounds {
        origin: Origin::Thm1Inner,
        r_s: bracket + c.mi(&[U1, U2], &[X1, X2], &[Z])?,
        r_w1: c.mi(&[V1], &[X1], &[V2, Y])? + c.mi(&[U1], &[X1], &[V1, U2, Y])?,
        r_w2: c.mi(&[V2], &[X2], &[V1, Y])? + c.mi(&[U2], &[X2], &[U1, V2, Y])?,
        r_w_sum: c.mi(&[U2], &[X2], &[U1, V2, Y])?
            + c.mi(&[U1], &[X1], &[V1, V2, Y])?
            + c.mi(&[V2], &[X2], &[V1, Y])?
            + c.mi(&[V1], &[X1], &[Y])?,
        r_l_dec: c.mi(&[U1, U2], &[X], &[Y])?,
        r_l_eve: bracket + c.mi(&[U1, U2], &[X], &[Z])?,
        d: None,
    })
}

/// Inner-bound expressions without the admissibility precondition. Used by
/// the search, which filters admissibility separately.
pub fn inner_bounds_unchecked(model: &SourceModel, aux: &AuxSystem) -> Result<RateBounds> {
    let j = aux.induced_joint(model)?;
    inner_terms(&InfoCalc::new(&j))?.checked(&model.tolerances())
}

/// Lossless inner bound for an admissible auxiliary system.
pub fn eval_inner_lossless(model: &SourceModel, aux: &AuxSystem) -> Result<RateBounds> {
    let (ok, residual) = model.check_admissible(aux)?;
    if !ok {
        return Err(Error::Precondition(format!(
            "aux not admissible: H(f|U1,U2,Y,Q) = {residual:.3e}"
        )));
    }
    inner_bounds_unchecked(model, aux)
}

/// Markov chains the outer bound requires, checked within each time-sharing
/// branch.
pub fn outer_markov_residual(joint: &JointDist) -> Result<Bits> {
    let given: &[&str] = if joint.has_axis(Q) { &[Q] } else { &[] };
    let c1 = verify_markov_given(joint, &[&[V1], &[U1], &[X1], &[X], &[X2, Y, Z]], given)?;
    let c2 = verify_markov_given(joint, &[&[V2], &[U2], &[X2], &[X], &[X1, Y, Z]], given)?;
    Ok(c1.max(c2))
}

fn outer_terms(c: &InfoCalc) -> Result<RateBounds> {
    let mut b = inner_terms(c)?;
    b.origin = Origin::Thm1Outer;
    let c = Shared::new(c);
    b.r_w1 -= c.mi(&[V1], &[V2], &[X1, Y])? + c.mi(&[U1], &[U2], &[X1, Y, V1])?;
    b.r_w2 -= c.mi(&[V2], &[V1], &[X2, Y])? + c.mi(&[U2], &[U1], &[X2, Y, V2])?;
    Ok(b)
}

/// Lossless outer bound evaluated on a joint over all ten axes.
pub fn eval_outer_lossless(joint: &JointDist, tol: Bits) -> Result<RateBounds> {
    let residual = outer_markov_residual(joint)?;
    if residual > tol {
        return Err(Error::Precondition(format!(
            "Markov chain violated: residual {residual:.3e} > {tol:e}"
        )));
    }
    outer_terms(&InfoCalc::new(joint))?.checked(&joint.tolerances())
}

fn require_distortion(model: &SourceModel) -> Result<&crate::model::Distortion> {
    model
        .distortion()
        .ok_or_else(|| Error::Precondition("model has no distortion metric".into()))
}

/// `p(u1, u2, y, f)` flattened row-major.
fn cell_function_mass(model: &SourceModel, aux: &AuxSystem) -> Result<(Vec<f64>, (usize, usize, usize, usize))> {
    let j = aux.induced_joint_with_f(model)?;
    let m = j.marginalize(&[U1, U2, Y, F])?;
    let s = m.shape();
    Ok((m.mass().to_vec(), (s[0], s[1], s[2], s[3])))
}

/// Distortion-minimising reconstruction `g(u1, u2, y)`; zero-probability
/// cells map to symbol 0 and ties go to the smallest index.
pub fn optimal_reconstruction(model: &SourceModel, aux: &AuxSystem) -> Result<ReconstructionMap> {
    let dist = require_distortion(model)?;
    let (mass, (n1, n2, ny, nf)) = cell_function_mass(model, aux)?;
    let n_hat = dist.f_hat().len();
    let mut table = Vec::with_capacity(n1 * n2 * ny);
    for cell in mass.chunks(nf) {
        if cell.iter().sum::<f64>() <= 0.0 {
            table.push(0);
            continue;
        }
        let mut best = 0;
        let mut best_cost = f64::INFINITY;
        for fh in 0..n_hat {
            let cost: f64 = cell.iter().enumerate().map(|(f, p)| p * dist.d(f, fh)).sum();
            if cost < best_cost {
                best = fh;
                best_cost = cost;
            }
        }
        table.push(best);
    }
    ReconstructionMap::new(n1, n2, ny, table)
}

/// `E[d(f(X1, X2, Y), g(U1, U2, Y))]`.
pub fn expected_distortion(model: &SourceModel, aux: &AuxSystem, g: &ReconstructionMap) -> Result<f64> {
    let dist = require_distortion(model)?;
    let (mass, (n1, n2, ny, nf)) = cell_function_mass(model, aux)?;
    if g.dims() != (n1, n2, ny) {
        return Err(Error::AlphabetMismatch("reconstruction map dimensions".into()));
    }
    if g.table.iter().any(|&v| v >= dist.f_hat().len()) {
        return Err(Error::AlphabetMismatch("reconstruction symbol outside F_hat".into()));
    }
    Ok(mass
        .chunks(nf)
        .zip(&g.table)
        .map(|(cell, &fh)| cell.iter().enumerate().map(|(f, p)| p * dist.d(f, fh)).sum::<f64>())
        .sum())
}

/// Lossy inner bound: the lossless expressions plus the distortion of `g`
/// (the optimal reconstruction when `g` is `None`). Admissibility is not
/// required.
pub fn eval_inner_lossy(model: &SourceModel, aux: &AuxSystem, g: Option<&ReconstructionMap>) -> Result<RateBounds> {
    require_distortion(model)?;
    let mut b = inner_bounds_unchecked(model, aux)?;
    let owned;
    let g = match g {
        Some(g) => g,
        None => {
            owned = optimal_reconstruction(model, aux)?;
            &owned
        }
    };
    b.d = Some(expected_distortion(model, aux, g)?);
    b.origin = Origin::Thm2Inner;
    Ok(b)
}

/// Lossy outer bound: outer storage expressions plus optimal-`g` distortion.
pub fn eval_outer_lossy(model: &SourceModel, aux: &AuxSystem, tol: Bits) -> Result<RateBounds> {
    require_distortion(model)?;
    let j = aux.induced_joint(model)?;
    let mut b = eval_outer_lossless(&j, tol)?;
    let g = optimal_reconstruction(model, aux)?;
    b.d = Some(expected_distortion(model, aux, &g)?);
    b.origin = Origin::Thm2Outer;
    Ok(b)
}

/// Both successive-decoding corner points of the inner bound.
pub fn corner_points(model: &SourceModel, aux: &AuxSystem) -> Result<(CornerPoint, CornerPoint)> {
    let base = eval_inner_lossless(model, aux)?;
    let j = aux.induced_joint(model)?;
    let c = InfoCalc::new(&j);
    let c = Shared::new(&c);
    let tol = model.tolerances();
    let order12 = RateBounds {
        r_w1: c.mi(&[V1], &[X1], &[Y])? + c.mi(&[U1], &[X1], &[V1, V2, Y])?,
        r_w2: c.mi(&[V2], &[X2], &[V1, Y])? + c.mi(&[U2], &[X2], &[U1, V2, Y])?,
        ..base
    };
    let order21 = RateBounds {
        r_w1: c.mi(&[V1], &[X1], &[V2, Y])? + c.mi(&[U1], &[X1], &[U2, V1, Y])?,
        r_w2: c.mi(&[V2], &[X2], &[Y])? + c.mi(&[U2], &[X2], &[V1, V2, Y])?,
        r_w_sum: c.mi(&[U1], &[X1], &[U2, V1, Y])?
            + c.mi(&[U2], &[X2], &[V1, V2, Y])?
            + c.mi(&[V1], &[X1], &[V2, Y])?
            + c.mi(&[V2], &[X2], &[Y])?,
        ..base
    };
    Ok((
        CornerPoint {
            which: CornerOrder::Order12,
            bounds: order12.checked(&tol)?,
        },
        CornerPoint {
            which: CornerOrder::Order21,
            bounds: order21.checked(&tol)?,
        },
    ))
}

/// Bounds for `f` partially invertible with respect to `X1`; `U1` is
/// replaced by `X1` itself.
pub fn eval_lemma1(model: &SourceModel, aux: &AuxSystem) -> Result<RateBounds> {
    if !model.classify_function()?.partially_invertible_wrt_1() {
        return Err(Error::Precondition("not partially invertible wrt X1".into()));
    }
    let aux = aux.with_u1_identity();
    let j = aux.induced_joint_with_f(model)?;
    let c = InfoCalc::new(&j);
    let c = Shared::new(&c);
    let residual = c.hc(&[F], &[X1, U2, Y, Q])?;
    if residual > model.tolerances().adm {
        return Err(Error::Precondition(format!(
            "U2 not admissible: H(f|X1,U2,Y,Q) = {residual:.3e}"
        )));
    }
    let bracket = neg_part(c.mi(&[X1, U2], &[Z], &[V1, V2, Q])? - c.mi(&[X1, U2], &[Y], &[V1, V2, Q])?);
    RateBounds {
        origin: Origin::Lemma1,
        r_s: bracket + c.hc(&[X1], &[Z])? + c.mi(&[U2], &[X2], &[X1, Z])?,
        r_w1: c.hc(&[X1], &[V2, Y])? - c.mi(&[X1], &[U2], &[V1, V2, Y])?,
        r_w2: c.mi(&[V2], &[X2], &[V1, Y])? + c.mi(&[U2], &[X2], &[X1, V2, Y])?,
        r_w_sum: c.mi(&[U2], &[X2], &[X1, V2, Y])?
            + c.hc(&[X1], &[V1, V2, Y])?
            + c.mi(&[V2], &[X2], &[V1, Y])?
            + c.mi(&[V1], &[X1], &[Y])?,
        r_l_dec: c.mi(&[X1, U2], &[X], &[Y])?,
        r_l_eve: bracket + c.mi(&[X1, U2], &[X], &[Z])?,
        d: None,
    }
    .checked(&model.tolerances())
}

fn require_invertible(model: &SourceModel) -> Result<()> {
    if model.classify_function()? != crate::model::FunctionClass::Invertible {
        return Err(Error::Precondition("not invertible".into()));
    }
    Ok(())
}

/// Storage and decoder-privacy terms shared by the invertible lemmas.
fn invertible_common(c: &InfoCalc, origin: Origin) -> Result<RateBounds> {
    Ok(RateBounds {
        origin,
        r_s: 0.0,
        r_w1: c.hc(&[X1], &[X2, Y])?,
        r_w2: c.hc(&[X2], &[X1, Y])?,
        r_w_sum: c.hc(&[X1, X2], &[Y])?,
        r_l_dec: c.mi(&[X1, X2], &[X], &[Y])?,
        r_l_eve: 0.0,
        d: None,
    })
}

/// Bounds for invertible `f`. `q_channel`, when given, is a time-sharing
/// channel `(X1, X2) -> Q` with `|Q| <= 2`; otherwise `Q` is constant.
pub fn eval_lemma2(model: &SourceModel, q_channel: Option<&Channel>) -> Result<RateBounds> {
    require_invertible(model)?;
    let mut j = model.build_joint()?;
    let given: &[&str] = if let Some(ch) = q_channel {
        if ch.to_axes().len() != 1 || ch.to_axes()[0].name() != Q || ch.to_size() > 2 {
            return Err(Error::Precondition("time-sharing channel must output Q with |Q| <= 2".into()));
        }
        let names: Vec<&str> = ch.from_axes().iter().map(Alphabet::name).collect();
        if names != [X1, X2] {
            return Err(Error::AlphabetMismatch("time-sharing channel must take (X1, X2)".into()));
        }
        j = crate::auxiliary::compose_relabelled(&j, ch)?;
        &[Q]
    } else {
        &[]
    };
    let c = InfoCalc::new(&j);
    let a = [X1, X2];
    let bracket = neg_part(c.mi(&a, &[Z], given)? - c.mi(&a, &[Y], given)?);
    let mut b = invertible_common(&c, Origin::Lemma2)?;
    b.r_s = bracket + c.hc(&a, &[Z])?;
    b.r_l_eve = bracket + c.mi(&a, &[X], &[Z])?;
    b.checked(&model.tolerances())
}

/// Search time-sharing channels `(X1, X2) -> Q` for Lemma 2: the constant
/// channel, every deterministic binary map (when there are at most 2^12),
/// and `random` randomised binary channels. Returns the channel minimising
/// the bracket together with its bounds.
pub fn search_lemma2_q(model: &SourceModel, random: usize, seed: u64) -> Result<(Option<Channel>, RateBounds)> {
    let mut best = (None, eval_lemma2(model, None)?);
    let a = model.alphabets();
    let from = vec![a.x1.clone(), a.x2.clone()];
    let to = vec![Alphabet::binary(Q)];
    let cells = a.x1.len() * a.x2.len();
    let better = |cand: &RateBounds, cur: &RateBounds| (cand.r_s, cand.r_l_eve) < (cur.r_s, cur.r_l_eve);
    if cells <= 12 {
        for mask in 1u32..(1u32 << cells) - 1 {
            let ch = Channel::deterministic(from.clone(), to.clone(), |i| {
                ((mask >> (i[0] * a.x2.len() + i[1])) & 1) as usize
            })?;
            let b = eval_lemma2(model, Some(&ch))?;
            if better(&b, &best.1) {
                best = (Some(ch), b);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        let m = Stochastic::random(cells, 2, &mut rng);
        let ch = Channel::new(from.clone(), to.clone(), m.data().to_vec())?;
        let b = eval_lemma2(model, Some(&ch))?;
        if better(&b, &best.1) {
            best = (Some(ch), b);
        }
    }
    Ok(best)
}

/// Bounds for invertible `f` when Eve's observation is degraded.
pub fn eval_lemma3(model: &SourceModel) -> Result<RateBounds> {
    require_invertible(model)?;
    if !model.check_degradedness()?.eve_degraded {
        return Err(Error::Precondition("not eve-degraded".into()));
    }
    let j = model.build_joint()?;
    let c = InfoCalc::new(&j);
    let mut b = invertible_common(&c, Origin::Lemma3)?;
    b.r_s = c.hc(&[X1, X2], &[Y])?;
    b.r_l_eve = c.mi(&[X1, X2], &[X], &[Y])?;
    b.checked(&model.tolerances())
}

/// Bounds for invertible `f` when the fusion center's observation is
/// degraded.
pub fn eval_lemma4(model: &SourceModel) -> Result<RateBounds> {
    require_invertible(model)?;
    if !model.check_degradedness()?.fusion_degraded {
        return Err(Error::Precondition("not fusion-degraded".into()));
    }
    let j = model.build_joint()?;
    let c = InfoCalc::new(&j);
    let mut b = invertible_common(&c, Origin::Lemma4)?;
    b.r_s = c.hc(&[X1, X2], &[Z])?;
    b.r_l_eve = c.mi(&[X1, X2], &[X], &[Z])?;
    b.checked(&model.tolerances())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Distortion, ModelAlphabets};
    use crate::prob::binary_entropy;

    fn example() -> SourceModel {
        SourceModel::bernoulli_example(0.2, 0.11, 0.3, 0.25).unwrap()
    }

    fn assert_close(a: &RateBounds, b: &RateBounds, tol: f64) {
        for (x, y) in a.objectives().iter().zip(b.objectives()) {
            assert!((x - y).abs() <= tol, "{a:?}\n{b:?}");
        }
    }

    #[test]
    fn lemma4_example_values() {
        let b = eval_lemma4(&example()).unwrap();
        let expected = [0.7579, 0.4626, 0.3021, 0.7686, 0.1577, 0.1469];
        for (v, e) in b.objectives().iter().zip(expected) {
            assert!((v - e).abs() <= 5e-5, "{v} vs {e}");
        }
        assert!(b.r_w_sum - (b.r_w1 + b.r_w2) > 1e-3);
    }

    #[test]
    fn lemma4_noiseless_observations() {
        let (b1, b2) = (0.2, 0.11);
        let m = SourceModel::bernoulli_example(b1, b2, 1.0, 1.0).unwrap();
        let b = eval_lemma4(&m).unwrap();
        assert_eq!(b.r_l_eve, 0.0);
        let expected = 0.5 * (binary_entropy(b1).unwrap() + binary_entropy(b2).unwrap());
        assert!((b.r_s - expected).abs() < 1e-12);
    }

    #[test]
    fn identity_inner_matches_lemma4_and_lemma2() {
        let m = example();
        let inner = eval_inner_lossless(&m, &AuxSystem::identity(&m)).unwrap();
        assert_close(&inner, &eval_lemma4(&m).unwrap(), 1e-12);
        assert_close(&inner, &eval_lemma2(&m, None).unwrap(), 1e-12);
    }

    #[test]
    fn constant_everything_is_zero() {
        let m = example().with_function(Alphabet::binary(F), vec![0; 8]).unwrap();
        let b = eval_inner_lossless(&m, &AuxSystem::constant(&m)).unwrap();
        assert!(b.objectives().iter().all(|&v| v == 0.0));
        let o = eval_outer_lossless(&AuxSystem::constant(&m).induced_joint(&m).unwrap(), 1e-9).unwrap();
        assert!(o.objectives().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn inadmissible_aux_rejected() {
        let m = example();
        let err = eval_inner_lossless(&m, &AuxSystem::constant(&m)).unwrap_err();
        assert!(err.to_string().contains("aux not admissible"));
    }

    #[test]
    fn lemma_preconditions() {
        let m = example();
        assert!(matches!(eval_lemma3(&m), Err(Error::Precondition(_))));
        let general = m.clone().with_function(Alphabet::binary(F), vec![0; 8]).unwrap();
        assert!(eval_lemma2(&general, None).unwrap_err().to_string().contains("not invertible"));
        assert!(eval_lemma1(&general, &AuxSystem::identity(&general)).is_err());
    }

    #[test]
    fn decoder_knows_inputs() {
        // X1 = X2 = Y = X, so the decoder already holds both inputs.
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let yz = vec![vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![vec![0.0, 0.0], vec![0.0, 1.0]]];
        let m = SourceModel::new(ModelAlphabets::binary(), vec![0.4, 0.6], &id, &id, &yz, vec![0; 8], None)
            .unwrap()
            .with_function_fn(Alphabet::indexed(F, 4).unwrap(), |x1, x2, _| x1 * 2 + x2)
            .unwrap();
        let b = eval_inner_lossless(&m, &AuxSystem::identity(&m)).unwrap();
        assert_eq!((b.r_w1, b.r_w2, b.r_w_sum), (0.0, 0.0, 0.0));
        let l2 = eval_lemma2(&m, None).unwrap();
        assert_eq!((l2.r_w1, l2.r_w2, l2.r_w_sum), (0.0, 0.0, 0.0));
    }

    #[test]
    fn lossy_identity_has_zero_distortion() {
        let m = example();
        let d = Distortion::hamming(&m.alphabets().f);
        let m = m.with_distortion(d).unwrap();
        let b = eval_inner_lossy(&m, &AuxSystem::identity(&m), None).unwrap();
        assert_eq!(b.d, Some(0.0));
        let g = optimal_reconstruction(&m, &AuxSystem::identity(&m)).unwrap();
        assert_eq!(g.get(1, 1, 1), m.f(1, 1, 1));
        assert_eq!(g.get(1, 0, 0), m.f(1, 0, 0));
    }

    #[test]
    fn lossy_constant_reconstruction() {
        let m = example();
        let m = m.clone().with_distortion(Distortion::hamming(&m.alphabets().f)).unwrap();
        let aux = AuxSystem::constant(&m);
        let g = ReconstructionMap::new(1, 1, 2, vec![3, 3]).unwrap();
        let b = eval_inner_lossy(&m, &aux, Some(&g)).unwrap();
        // P(f != "11") = 1 - P(X1 = 1, X2 = 1) = 1 - 0.5 * 0.2 * 0.11.
        assert!((b.d.unwrap() - (1.0 - 0.011)).abs() < 1e-12);
        assert!(matches!(
            eval_inner_lossy(&example(), &aux, None),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn corner_points_identity() {
        let m = example();
        let (a, b) = corner_points(&m, &AuxSystem::identity(&m)).unwrap();
        let h = m.build_joint().unwrap().conditional_entropy(&[X1, X2], &[Y]).unwrap();
        assert!((a.bounds.r_w_sum - h).abs() < 1e-12);
        assert!((b.bounds.r_w_sum - h).abs() < 1e-12);
        assert!((a.bounds.r_w1 + a.bounds.r_w2 - h).abs() < 1e-9);
        assert!((b.bounds.r_w1 + b.bounds.r_w2 - h).abs() < 1e-9);
        assert_eq!(a.bounds.r_s, b.bounds.r_s);
        assert_eq!(a.bounds.r_l_eve, b.bounds.r_l_eve);
        let c = m.clone().with_function(Alphabet::binary(F), vec![0; 8]).unwrap();
        let (a, b) = corner_points(&c, &AuxSystem::constant(&c)).unwrap();
        assert_eq!(a.bounds, b.bounds);
        assert!(a.bounds.objectives().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lemma2_q_search_never_worse_than_constant() {
        let m = example();
        let (_, best) = search_lemma2_q(&m, 4, 3).unwrap();
        let base = eval_lemma2(&m, None).unwrap();
        assert!(best.r_s <= base.r_s + 1e-12);
        assert!((best.r_w_sum - base.r_w_sum).abs() < 1e-12);
    }

    #[test]
    fn time_shared_relabelling_changes_nothing() {
        let m = example();
        let id = AuxSystem::identity(&m);
        let mut flipped = id.branches()[0].clone();
        flipped.u1 = Stochastic::from_map(2, &[1, 0]).unwrap();
        let shared = AuxSystem::new(vec![0.5, 0.5], vec![id.branches()[0].clone(), flipped]).unwrap();
        let a = eval_inner_lossless(&m, &id).unwrap().objectives();
        let b = eval_inner_lossless(&m, &shared).unwrap().objectives();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }
}
