//! The problem instance: a hidden remote source `X`, two noisy measurements
//! `X1`, `X2` held by the transmitters, the fusion center's observation `Y`,
//! the eavesdropper's observation `Z`, and the per-letter target function
//! `f(x1, x2, y)`.

use serde::Serialize;

use crate::auxiliary::AuxSystem;
use crate::error::{Error, Result};
use crate::prob::{Alphabet, Bits, Channel, InfoCalc, JointDist, Tolerances};

/// Canonical axis names used in every joint distribution.
pub mod vars {
    pub const X: &str = "X";
    pub const X1: &str = "X1";
    pub const X2: &str = "X2";
    pub const Y: &str = "Y";
    pub const Z: &str = "Z";
    pub const F: &str = "F";
    pub const Q: &str = "Q";
    pub const U1: &str = "U1";
    pub const U2: &str = "U2";
    pub const V1: &str = "V1";
    pub const V2: &str = "V2";
}

use vars::*;

/// Per-letter distortion metric `d(f, f_hat)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Distortion {
    f_hat: Alphabet,
    /// Row-major `[f][f_hat]`.
    table: Vec<f64>,
}

impl Distortion {
    pub fn new(f_hat: Alphabet, f_size: usize, table: Vec<f64>) -> Result<Self> {
        if table.len() != f_size * f_hat.len() {
            return Err(Error::ShapeMismatch {
                expected: f_size * f_hat.len(),
                got: table.len(),
            });
        }
        if let Some((i, &v)) = table.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::OutOfDomain(format!("distortion entry {i} = {v} must be >= 0")));
        }
        Ok(Distortion {
            f_hat: f_hat.renamed("F_hat"),
            table,
        })
    }

    /// Hamming distortion with reconstruction alphabet equal to `f_alphabet`.
    pub fn hamming(f_alphabet: &Alphabet) -> Self {
        let n = f_alphabet.len();
        let table = (0..n * n).map(|i| if i / n == i % n { 0.0 } else { 1.0 }).collect();
        Distortion {
            f_hat: f_alphabet.renamed("F_hat"),
            table,
        }
    }

    pub fn f_hat(&self) -> &Alphabet {
        &self.f_hat
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn d(&self, f: usize, f_hat: usize) -> f64 {
        self.table[f * self.f_hat.len() + f_hat]
    }
}

/// Alphabets of the observable variables and the function output.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelAlphabets {
    pub x: Alphabet,
    pub x1: Alphabet,
    pub x2: Alphabet,
    pub y: Alphabet,
    pub z: Alphabet,
    pub f: Alphabet,
}

impl ModelAlphabets {
    /// All-binary alphabets (function output binary too).
    pub fn binary() -> Self {
        ModelAlphabets {
            x: Alphabet::binary(X),
            x1: Alphabet::binary(X1),
            x2: Alphabet::binary(X2),
            y: Alphabet::binary(Y),
            z: Alphabet::binary(Z),
            f: Alphabet::binary(F),
        }
    }

    fn canonical(self) -> Self {
        ModelAlphabets {
            x: self.x.renamed(X),
            x1: self.x1.renamed(X1),
            x2: self.x2.renamed(X2),
            y: self.y.renamed(Y),
            z: self.z.renamed(Z),
            f: self.f.renamed(F),
        }
    }
}

/// A validated source model.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceModel {
    alphabets: ModelAlphabets,
    p_x: Vec<f64>,
    ch1: Channel,
    ch2: Channel,
    ch_yz: Channel,
    /// Row-major `[x1][x2][y]` function output indices.
    f_table: Vec<usize>,
    distortion: Option<Distortion>,
    tol: Tolerances,
}

impl SourceModel {
    /// Build and validate a model.
    ///
    /// `ch1` and `ch2` have one row per `x`; `ch_yz` is indexed `[x][y][z]`;
    /// `f_table` is row-major over `(x1, x2, y)`.
    pub fn new(
        alphabets: ModelAlphabets,
        p_x: Vec<f64>,
        ch1: &[Vec<f64>],
        ch2: &[Vec<f64>],
        ch_yz: &[Vec<Vec<f64>>],
        f_table: Vec<usize>,
        distortion: Option<Distortion>,
    ) -> Result<Self> {
        let a = alphabets.canonical();
        let nx = a.x.len();
        // Validates p_x.
        JointDist::new(vec![a.x.clone()], p_x.clone())?;
        let check_rows = |name: &str, rows: usize| -> Result<()> {
            if rows != nx {
                return Err(Error::AlphabetMismatch(format!(
                    "{name} has {rows} rows, alphabet X has {nx} symbols"
                )));
            }
            Ok(())
        };
        check_rows("ch1", ch1.len())?;
        check_rows("ch2", ch2.len())?;
        check_rows("ch_yz", ch_yz.len())?;
        let ch1 = channel_rows("ch1", &a.x, &a.x1, ch1)?;
        let ch2 = channel_rows("ch2", &a.x, &a.x2, ch2)?;
        let ny = a.y.len();
        let nz = a.z.len();
        let mut yz = Vec::with_capacity(nx * ny * nz);
        for (x, plane) in ch_yz.iter().enumerate() {
            if plane.len() != ny || plane.iter().any(|r| r.len() != nz) {
                return Err(Error::AlphabetMismatch(format!(
                    "ch_yz[{x}] must be a {ny}x{nz} matrix"
                )));
            }
            yz.extend(plane.iter().flatten().copied());
        }
        let ch_yz = Channel::new(vec![a.x.clone()], vec![a.y.clone(), a.z.clone()], yz).map_err(|e| match e {
            Error::NotStochastic { row, sum, .. } => Error::NotStochastic {
                context: format!("ch_yz[{row}]"),
                row,
                sum,
            },
            other => other,
        })?;
        let cells = a.x1.len() * a.x2.len() * ny;
        if f_table.len() != cells {
            return Err(Error::ShapeMismatch {
                expected: cells,
                got: f_table.len(),
            });
        }
        if let Some(&bad) = f_table.iter().find(|&&v| v >= a.f.len()) {
            return Err(Error::AlphabetMismatch(format!(
                "function output index {bad} outside F alphabet of size {}",
                a.f.len()
            )));
        }
        if let Some(d) = &distortion {
            if d.table.len() != a.f.len() * d.f_hat.len() {
                return Err(Error::AlphabetMismatch(
                    "distortion table does not match F alphabet".into(),
                ));
            }
        }
        Ok(SourceModel {
            alphabets: a,
            p_x,
            ch1,
            ch2,
            ch_yz,
            f_table,
            distortion,
            tol: Tolerances::default(),
        })
    }

    /// Binary model with multiplicative Bernoulli noise:
    /// `X1 = S1 X`, `X2 = S2 X`, `Z = SZ X`, `Y = SY X`, `P_X(1) = 1/2`,
    /// `P(S1=1) = beta1`, `P(S2=1) = beta2`,
    /// `P(SZ,SY) = (0,0): 1-q, (1,1): q alpha, (1,0): q (1-alpha)`.
    /// The function is the identity pair `f = (x1, x2)`.
    pub fn bernoulli_example(beta1: f64, beta2: f64, alpha: f64, q: f64) -> Result<Self> {
        for (name, v) in [("beta1", beta1), ("beta2", beta2), ("alpha", alpha), ("q", q)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfDomain(format!("{name} = {v} not in [0,1]")));
            }
        }
        let mult = |beta: f64| vec![vec![1.0, 0.0], vec![1.0 - beta, beta]];
        // (SZ, SY) joint; (0, 1) has zero mass.
        let s = [[1.0 - q, 0.0], [q * (1.0 - alpha), q * alpha]];
        let mut given_one = vec![vec![0.0; 2]; 2];
        for (sz, row) in s.iter().enumerate() {
            for (sy, &p) in row.iter().enumerate() {
                given_one[sy][sz] += p;
            }
        }
        let ch_yz = vec![vec![vec![1.0, 0.0], vec![0.0, 0.0]], given_one];
        let mut alphabets = ModelAlphabets::binary();
        alphabets.f = Alphabet::new(F, vec!["00".into(), "01".into(), "10".into(), "11".into()])?;
        let f_table = (0..8).map(|i| i >> 1).collect();
        SourceModel::new(
            alphabets,
            vec![0.5, 0.5],
            &mult(beta1),
            &mult(beta2),
            &ch_yz,
            f_table,
            None,
        )
    }

    pub fn alphabets(&self) -> &ModelAlphabets {
        &self.alphabets
    }

    pub fn p_x(&self) -> &[f64] {
        &self.p_x
    }

    pub fn ch1(&self) -> &Channel {
        &self.ch1
    }

    pub fn ch2(&self) -> &Channel {
        &self.ch2
    }

    pub fn ch_yz(&self) -> &Channel {
        &self.ch_yz
    }

    pub fn f_table(&self) -> &[usize] {
        &self.f_table
    }

    pub fn distortion(&self) -> Option<&Distortion> {
        self.distortion.as_ref()
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    /// Replace the target function.
    pub fn with_function(mut self, f: Alphabet, f_table: Vec<usize>) -> Result<Self> {
        let cells = self.alphabets.x1.len() * self.alphabets.x2.len() * self.alphabets.y.len();
        if f_table.len() != cells {
            return Err(Error::ShapeMismatch {
                expected: cells,
                got: f_table.len(),
            });
        }
        if f_table.iter().any(|&v| v >= f.len()) {
            return Err(Error::AlphabetMismatch("function output outside F alphabet".into()));
        }
        self.alphabets.f = f.renamed(F);
        self.f_table = f_table;
        self.distortion = None;
        Ok(self)
    }

    /// Replace the target function by `f(x1, x2, y)` over symbol indices.
    pub fn with_function_fn(self, f: Alphabet, func: impl Fn(usize, usize, usize) -> usize) -> Result<Self> {
        let (n1, n2, ny) = (self.alphabets.x1.len(), self.alphabets.x2.len(), self.alphabets.y.len());
        let mut table = Vec::with_capacity(n1 * n2 * ny);
        for a in 0..n1 {
            for b in 0..n2 {
                for y in 0..ny {
                    table.push(func(a, b, y));
                }
            }
        }
        self.with_function(f, table)
    }

    pub fn with_distortion(mut self, d: Distortion) -> Result<Self> {
        if d.table.len() != self.alphabets.f.len() * d.f_hat.len() {
            return Err(Error::AlphabetMismatch(
                "distortion table does not match F alphabet".into(),
            ));
        }
        self.distortion = Some(d);
        Ok(self)
    }

    /// Function value index for `(x1, x2, y)`.
    pub fn f(&self, x1: usize, x2: usize, y: usize) -> usize {
        let (n2, ny) = (self.alphabets.x2.len(), self.alphabets.y.len());
        self.f_table[(x1 * n2 + x2) * ny + y]
    }

    /// Deterministic channel `(X1, X2, Y) -> F`.
    pub fn f_channel(&self) -> Result<Channel> {
        let a = &self.alphabets;
        Channel::deterministic(
            vec![a.x1.clone(), a.x2.clone(), a.y.clone()],
            vec![a.f.clone()],
            |i| self.f(i[0], i[1], i[2]),
        )
    }

    /// Single-letter joint over `(X, X1, X2, Y, Z)`.
    pub fn build_joint(&self) -> Result<JointDist> {
        let base = JointDist::with_tolerances(vec![self.alphabets.x.clone()], self.p_x.clone(), self.tol)?;
        base.compose(&self.ch1)?.compose(&self.ch2)?.compose(&self.ch_yz)
    }

    /// `build_joint` extended by the function axis `F`.
    pub fn joint_with_f(&self) -> Result<JointDist> {
        self.build_joint()?.compose(&self.f_channel()?)
    }

    /// `(H(X1,X2|F,Y), H(X1|F,Y), H(X2|F,Y))`.
    pub fn invertibility_residuals(&self) -> Result<(Bits, Bits, Bits)> {
        let j = self.joint_with_f()?;
        let c = InfoCalc::new(&j);
        Ok((
            c.hc(&[X1, X2], &[F, Y])?,
            c.hc(&[X1], &[F, Y])?,
            c.hc(&[X2], &[F, Y])?,
        ))
    }

    /// Classify `f` by which inputs it lets the fusion center recover.
    /// Only input triples with positive probability matter.
    pub fn classify_function(&self) -> Result<FunctionClass> {
        let (both, one, two) = self.invertibility_residuals()?;
        let t = self.tol.num;
        Ok(if both <= t {
            FunctionClass::Invertible
        } else if one <= t {
            FunctionClass::PartiallyInvertibleWrt1
        } else if two <= t {
            FunctionClass::PartiallyInvertibleWrt2
        } else {
            FunctionClass::General
        })
    }

    /// Degradedness of `P_{YZ|X}` tested as conditional independence.
    pub fn check_degradedness(&self) -> Result<DegradednessReport> {
        let j = self.build_joint()?;
        let c = InfoCalc::new(&j);
        let residual_eve = c.mi(&[X], &[Z], &[Y])?;
        let residual_fusion = c.mi(&[X], &[Y], &[Z])?;
        Ok(DegradednessReport {
            eve_degraded: residual_eve <= self.tol.num,
            fusion_degraded: residual_fusion <= self.tol.num,
            residual_eve,
            residual_fusion,
        })
    }

    /// Admissibility residual `H(f | U1, U2, Y, Q)` and whether it is within
    /// `tol.adm`.
    pub fn check_admissible(&self, aux: &AuxSystem) -> Result<(bool, Bits)> {
        let j = aux.induced_joint_with_f(self)?;
        let r = InfoCalc::new(&j).hc(&[F], &[U1, U2, Y, Q])?;
        Ok((r <= self.tol.adm, r))
    }
}

fn channel_rows(name: &str, from: &Alphabet, to: &Alphabet, rows: &[Vec<f64>]) -> Result<Channel> {
    if let Some((x, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != to.len()) {
        return Err(Error::AlphabetMismatch(format!(
            "{name}[{x}] has {} entries, alphabet {} has {}",
            r.len(),
            to.name(),
            to.len()
        )));
    }
    Channel::from_rows(vec![from.clone()], vec![to.clone()], rows).map_err(|e| match e {
        Error::NotStochastic { row, sum, .. } => Error::NotStochastic {
            context: format!("{name}[{row}]"),
            row,
            sum,
        },
        Error::NegativeMass { index, value } => Error::OutOfDomain(format!(
            "{name}[{}][{}] = {value} is negative",
            index / to.len(),
            index % to.len()
        )),
        other => other,
    })
}

/// What `f` reveals about the transmitters' inputs given `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionClass {
    Invertible,
    PartiallyInvertibleWrt1,
    PartiallyInvertibleWrt2,
    General,
}

impl FunctionClass {
    pub fn partially_invertible_wrt_1(self) -> bool {
        matches!(self, FunctionClass::Invertible | FunctionClass::PartiallyInvertibleWrt1)
    }

    pub fn partially_invertible_wrt_2(self) -> bool {
        matches!(self, FunctionClass::Invertible | FunctionClass::PartiallyInvertibleWrt2)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FunctionClass::Invertible => "invertible",
            FunctionClass::PartiallyInvertibleWrt1 => "partially_invertible_wrt_1",
            FunctionClass::PartiallyInvertibleWrt2 => "partially_invertible_wrt_2",
            FunctionClass::General => "general",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegradednessReport {
    /// `P_{YZ|X} = P_{Y|X} P_{Z|Y}`.
    pub eve_degraded: bool,
    /// `P_{YZ|X} = P_{Z|X} P_{Y|Z}`.
    pub fusion_degraded: bool,
    /// `I(X; Z | Y)`.
    pub residual_eve: Bits,
    /// `I(X; Y | Z)`.
    pub residual_fusion: Bits,
}

/// Largest violation of the Markov chain `A1 - A2 - ... - Am`: the maximum
/// over interior positions `k` of `I(A1..A(k-1); A(k+1)..Am | Ak)`.
pub fn verify_markov(joint: &JointDist, chain: &[&[&str]]) -> Result<Bits> {
    verify_markov_given(joint, chain, &[])
}

/// As [`verify_markov`] with every term additionally conditioned on `given`.
pub fn verify_markov_given(joint: &JointDist, chain: &[&[&str]], given: &[&str]) -> Result<Bits> {
    if chain.len() < 3 {
        return Err(Error::OutOfDomain(format!(
            "Markov chain needs at least 3 links, got {}",
            chain.len()
        )));
    }
    let mut seen: Vec<&str> = given.to_vec();
    for set in chain {
        if set.is_empty() {
            return Err(Error::EmptyVariableSet);
        }
        for v in set.iter() {
            if seen.contains(v) {
                return Err(Error::OverlappingSets(v.to_string()));
            }
            seen.push(v);
        }
    }
    let calc = InfoCalc::new(joint);
    let mut worst: Bits = 0.0;
    for k in 1..chain.len() - 1 {
        let past: Vec<&str> = chain[..k].iter().flat_map(|s| s.iter().copied()).collect();
        let future: Vec<&str> = chain[k + 1..].iter().flat_map(|s| s.iter().copied()).collect();
        let mid: Vec<&str> = chain[k].iter().chain(given).copied().collect();
        worst = worst.max(calc.mi(&past, &future, &mid)?);
    }
    Ok(worst)
}
