//! Auxiliary-variable systems `(Q, V1, V2, U1, U2)`.
//!
//! `Q` is an explicit time-sharing variable: for each branch `q` the
//! transmitters use their own chain `X1 -> U1 -> V1` and `X2 -> U2 -> V2`.
//! Given `Q = q` the induced joint therefore satisfies
//! `V1 - U1 - X1 - X - (X2, Y, Z)` and `V2 - U2 - X2 - X - (X1, Y, Z)`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::vars::*;
use crate::model::SourceModel;
use crate::prob::{Alphabet, Channel, JointDist, Tolerances};

/// Row-stochastic matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Stochastic {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Stochastic {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        let tol = Tolerances::default().norm;
        for (r, row) in data.chunks(cols).enumerate() {
            if row.iter().any(|&p| !(p >= 0.0)) {
                return Err(Error::OutOfDomain(format!("row {r} has a negative entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > tol {
                return Err(Error::NotStochastic {
                    context: "auxiliary channel".into(),
                    row: r,
                    sum: s,
                });
            }
        }
        Ok(Stochastic { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged matrix".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let data = (0..n * n).map(|i| if i / n == i % n { 1.0 } else { 0.0 }).collect();
        Stochastic { rows: n, cols: n, data }
    }

    /// Every row maps to output symbol 0 of a single-symbol alphabet.
    pub fn constant(rows: usize) -> Self {
        Stochastic {
            rows,
            cols: 1,
            data: vec![1.0; rows],
        }
    }

    /// Rows drawn uniformly from the simplex.
    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let row: Vec<f64> = (0..cols).map(|_| -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
            let s: f64 = row.iter().sum();
            data.extend(row.iter().map(|v| v / s));
        }
        Stochastic { rows, cols, data }
    }

    /// Deterministic matrix sending row `r` to column `map[r]`.
    pub fn from_map(cols: usize, map: &[usize]) -> Result<Self> {
        let mut data = vec![0.0; map.len() * cols];
        for (r, &c) in map.iter().enumerate() {
            if c >= cols {
                return Err(Error::OutOfDomain(format!("column {c} >= {cols}")));
            }
            data[r * cols + c] = 1.0;
        }
        Self::new(map.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    /// Each row replaced by the one-hot vector of its first maximum.
    pub fn snapped(&self) -> Self {
        let mut out = self.clone();
        for r in 0..self.rows {
            let row = out.row_mut(r);
            let best = argmax(row);
            row.iter_mut().enumerate().for_each(|(i, v)| *v = if i == best { 1.0 } else { 0.0 });
        }
        out
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Auxiliary channels used while time-sharing branch `q` is active.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxBranch {
    /// `P_{U1|X1}`, rows indexed by `x1`.
    pub u1: Stochastic,
    /// `P_{V1|U1}`.
    pub v1: Stochastic,
    /// `P_{U2|X2}`.
    pub u2: Stochastic,
    /// `P_{V2|U2}`.
    pub v2: Stochastic,
}

impl AuxBranch {
    pub(crate) fn matrices_mut(&mut self) -> [&mut Stochastic; 4] {
        [&mut self.u1, &mut self.v1, &mut self.u2, &mut self.v2]
    }
}

/// Alphabet sizes of the auxiliary variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cardinalities {
    pub q: usize,
    pub u1: usize,
    pub v1: usize,
    pub u2: usize,
    pub v2: usize,
}

/// Time-shared auxiliary system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AuxFile", into = "AuxFile")]
pub struct AuxSystem {
    weights: Vec<f64>,
    branches: Vec<AuxBranch>,
}

impl AuxSystem {
    pub fn new(weights: Vec<f64>, branches: Vec<AuxBranch>) -> Result<Self> {
        if weights.is_empty() || weights.len() != branches.len() {
            return Err(Error::ShapeMismatch {
                expected: weights.len(),
                got: branches.len(),
            });
        }
        JointDist::new(vec![Alphabet::indexed(Q, weights.len())?], weights.clone())?;
        let first = &branches[0];
        for (q, b) in branches.iter().enumerate() {
            let dims_match = b.u1.rows == first.u1.rows
                && b.u1.cols == first.u1.cols
                && b.v1.cols == first.v1.cols
                && b.u2.rows == first.u2.rows
                && b.u2.cols == first.u2.cols
                && b.v2.cols == first.v2.cols;
            if !dims_match || b.v1.rows != b.u1.cols || b.v2.rows != b.u2.cols {
                return Err(Error::AlphabetMismatch(format!(
                    "auxiliary branch {q} has inconsistent dimensions"
                )));
            }
        }
        Ok(AuxSystem { weights, branches })
    }

    /// `U_i = X_i`, constant `V_i` and `Q`.
    pub fn identity(model: &SourceModel) -> Self {
        let (n1, n2) = (model.alphabets().x1.len(), model.alphabets().x2.len());
        AuxSystem {
            weights: vec![1.0],
            branches: vec![AuxBranch {
                u1: Stochastic::identity(n1),
                v1: Stochastic::constant(n1),
                u2: Stochastic::identity(n2),
                v2: Stochastic::constant(n2),
            }],
        }
    }

    /// Every auxiliary variable constant.
    pub fn constant(model: &SourceModel) -> Self {
        let (n1, n2) = (model.alphabets().x1.len(), model.alphabets().x2.len());
        AuxSystem {
            weights: vec![1.0],
            branches: vec![AuxBranch {
                u1: Stochastic::constant(n1),
                v1: Stochastic::constant(1),
                u2: Stochastic::constant(n2),
                v2: Stochastic::constant(1),
            }],
        }
    }

    /// Uniformly random channels and weights with the given sizes.
    pub fn random<R: Rng + ?Sized>(model: &SourceModel, card: Cardinalities, rng: &mut R) -> Self {
        let (n1, n2) = (model.alphabets().x1.len(), model.alphabets().x2.len());
        let weights = Stochastic::random(1, card.q, rng).data;
        let branches = (0..card.q)
            .map(|_| AuxBranch {
                u1: Stochastic::random(n1, card.u1, rng),
                v1: Stochastic::random(card.u1, card.v1, rng),
                u2: Stochastic::random(n2, card.u2, rng),
                v2: Stochastic::random(card.u2, card.v2, rng),
            })
            .collect();
        AuxSystem { weights, branches }
    }

    /// Same system with `U1` forced to the identity on `X1`; `V1` is kept
    /// when its input size already matches, otherwise it becomes constant.
    pub fn with_u1_identity(&self) -> Self {
        let mut out = self.clone();
        for b in &mut out.branches {
            let n1 = b.u1.rows;
            if b.v1.rows != n1 {
                b.v1 = Stochastic::constant(n1);
            }
            b.u1 = Stochastic::identity(n1);
        }
        out
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn branches(&self) -> &[AuxBranch] {
        &self.branches
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Vec<f64>, &mut Vec<AuxBranch>) {
        (&mut self.weights, &mut self.branches)
    }

    pub fn cardinalities(&self) -> Cardinalities {
        let b = &self.branches[0];
        Cardinalities {
            q: self.weights.len(),
            u1: b.u1.cols,
            v1: b.v1.cols,
            u2: b.u2.cols,
            v2: b.v2.cols,
        }
    }

    pub fn check_compatible(&self, model: &SourceModel) -> Result<()> {
        let b = &self.branches[0];
        let (n1, n2) = (model.alphabets().x1.len(), model.alphabets().x2.len());
        if b.u1.rows != n1 || b.u2.rows != n2 {
            return Err(Error::AlphabetMismatch(format!(
                "auxiliary channels expect |X1| = {}, |X2| = {}; model has {n1}, {n2}",
                b.u1.rows, b.u2.rows
            )));
        }
        Ok(())
    }

    /// Same system with every channel row snapped to a vertex of the simplex.
    pub fn snapped(&self) -> Self {
        let mut out = self.clone();
        for b in &mut out.branches {
            for m in b.matrices_mut() {
                *m = m.snapped();
            }
        }
        out
    }

    fn q_channel(&self, kind: Layer) -> Result<Channel> {
        let c = self.cardinalities();
        let q = Alphabet::indexed(Q, c.q)?;
        let (name, rows, cols, input) = match kind {
            Layer::U1 => (U1, self.branches[0].u1.rows, c.u1, X1),
            Layer::V1 => (V1, c.u1, c.v1, U1),
            Layer::U2 => (U2, self.branches[0].u2.rows, c.u2, X2),
            Layer::V2 => (V2, c.u2, c.v2, U2),
        };
        let mut kernel = Vec::with_capacity(c.q * rows * cols);
        for b in &self.branches {
            let m = match kind {
                Layer::U1 => &b.u1,
                Layer::V1 => &b.v1,
                Layer::U2 => &b.u2,
                Layer::V2 => &b.v2,
            };
            kernel.extend_from_slice(&m.data);
        }
        Channel::new(
            vec![q, Alphabet::indexed(input, rows)?],
            vec![Alphabet::indexed(name, cols)?],
            kernel,
        )
    }

    /// Joint over `(X, X1, X2, Y, Z, Q, U1, V1, U2, V2)`.
    pub fn induced_joint(&self, model: &SourceModel) -> Result<JointDist> {
        self.check_compatible(model)?;
        // The base alphabets carry the model's symbol labels; the auxiliary
        // channels are indexed, so relabel inputs to match.
        let base = model.build_joint()?;
        let q = Channel::new(vec![], vec![Alphabet::indexed(Q, self.weights.len())?], self.weights.clone())?;
        let mut j = base.compose(&q)?;
        for layer in [Layer::U1, Layer::V1, Layer::U2, Layer::V2] {
            let ch = self.q_channel(layer)?;
            j = compose_relabelled(&j, &ch)?;
        }
        Ok(j)
    }

    /// `induced_joint` extended by the function axis `F`.
    pub fn induced_joint_with_f(&self, model: &SourceModel) -> Result<JointDist> {
        self.induced_joint(model)?.compose(&model.f_channel()?)
    }

    /// Canonical serialisation used to identify systems.
    pub fn fingerprint(&self) -> String {
        serde_json::to_string(&AuxFile::from(self.clone())).expect("aux system serialises")
    }

    /// Short stable hash of [`fingerprint`](Self::fingerprint).
    pub fn fingerprint_hash(&self) -> String {
        let digest = Sha256::digest(self.fingerprint().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Copy)]
enum Layer {
    U1,
    V1,
    U2,
    V2,
}

/// Compose a channel whose input alphabets are index-labelled onto a joint
/// whose matching axes may carry other labels of the same size.
pub(crate) fn compose_relabelled(joint: &JointDist, ch: &Channel) -> Result<JointDist> {
    let mut from = Vec::with_capacity(ch.from_axes().len());
    for a in ch.from_axes() {
        let base = joint.axis(a.name())?;
        if base.len() != a.len() {
            return Err(Error::AlphabetMismatch(format!(
                "axis `{}` has {} symbols, channel expects {}",
                a.name(),
                base.len(),
                a.len()
            )));
        }
        from.push(base.clone());
    }
    let relabelled = Channel::new(from, ch.to_axes().to_vec(), ch.kernel().to_vec())?;
    joint.compose(&relabelled)
}

/// Serialised form of an [`AuxSystem`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuxFile {
    pub schema_version: u32,
    pub q_weights: Vec<f64>,
    pub branches: Vec<AuxBranchFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuxBranchFile {
    pub u1: Vec<Vec<f64>>,
    pub v1: Vec<Vec<f64>>,
    pub u2: Vec<Vec<f64>>,
    pub v2: Vec<Vec<f64>>,
}

pub const AUX_SCHEMA_VERSION: u32 = 1;

impl From<AuxSystem> for AuxFile {
    fn from(a: AuxSystem) -> Self {
        AuxFile {
            schema_version: AUX_SCHEMA_VERSION,
            q_weights: a.weights,
            branches: a
                .branches
                .iter()
                .map(|b| AuxBranchFile {
                    u1: b.u1.to_rows(),
                    v1: b.v1.to_rows(),
                    u2: b.u2.to_rows(),
                    v2: b.v2.to_rows(),
                })
                .collect(),
        }
    }
}

impl TryFrom<AuxFile> for AuxSystem {
    type Error = Error;

    fn try_from(f: AuxFile) -> Result<Self> {
        if f.schema_version != AUX_SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported aux schema_version {}",
                f.schema_version
            )));
        }
        let branches = f
            .branches
            .iter()
            .map(|b| {
                Ok(AuxBranch {
                    u1: Stochastic::from_rows(&b.u1)?,
                    v1: Stochastic::from_rows(&b.v1)?,
                    u2: Stochastic::from_rows(&b.u2)?,
                    v2: Stochastic::from_rows(&b.v2)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        AuxSystem::new(f.q_weights, branches)
    }
}

impl std::fmt::Display for AuxFile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&serde_json::to_string_pretty(self).map_err(|_| std::fmt::Error)?)
    }
}
