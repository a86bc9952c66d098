//! Exact discrete probability and information calculus over named finite
//! variables.
//!
//! Every distribution is a dense tensor in a fixed axis order; axes are
//! addressed by name. All logarithms are base 2, so every information
//! quantity is in bits.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{Error, Result};

/// Information quantity in bits.
pub type Bits = f64;

/// Masses below this are treated as exact zeros inside logarithms.
pub const ZERO_MASS: f64 = 1e-15;

/// Numerical tolerances shared by the calculus and the region evaluators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Information identities and clamping.
    pub num: f64,
    /// Normalisation of distributions and channel rows.
    pub norm: f64,
    /// Admissibility residual `H(f | U1, U2, Y, Q)`.
    pub adm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            num: 1e-9,
            norm: 1e-12,
            adm: 1e-9,
        }
    }
}

impl Tolerances {
    /// Clamp an information quantity to zero if it lies in `[-num, 0)`.
    pub fn clamp(&self, value: f64, what: &str) -> Result<Bits> {
        if value >= 0.0 {
            Ok(value)
        } else if value >= -self.num {
            Ok(0.0)
        } else {
            Err(Error::Internal(format!("{what} = {value} is negative")))
        }
    }
}

/// `[a]^- = min(a, 0)`.
pub fn neg_part(a: f64) -> f64 {
    a.min(0.0)
}

fn plogp(p: f64) -> f64 {
    if p > ZERO_MASS {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Binary entropy `Hb(c)` in bits.
pub fn binary_entropy(c: f64) -> Result<Bits> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::OutOfDomain(format!("binary entropy argument {c} not in [0,1]")));
    }
    Ok(plogp(c) + plogp(1.0 - c))
}

/// Shannon entropy of a probability vector, in bits.
pub fn entropy_of(probs: &[f64]) -> Bits {
    probs.iter().map(|&p| plogp(p)).sum()
}

/// A named finite alphabet with ordered, unique symbol labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    name: String,
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new(name: impl Into<String>, symbols: Vec<String>) -> Result<Self> {
        let name = name.into();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet {
                name,
                reason: "no symbols".into(),
            });
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::InvalidAlphabet {
                    name,
                    reason: format!("duplicate symbol `{s}`"),
                });
            }
        }
        Ok(Alphabet { name, symbols })
    }

    /// Alphabet with symbols `"0"`, `"1"`, ..., `"size-1"`.
    pub fn indexed(name: impl Into<String>, size: usize) -> Result<Self> {
        Self::new(name, (0..size).map(|i| i.to_string()).collect())
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self::indexed(name, 2).expect("binary alphabet is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// Same symbols under a different axis name.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Alphabet {
            name: name.into(),
            symbols: self.symbols.clone(),
        }
    }
}

fn check_unique(axes: &[Alphabet]) -> Result<()> {
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].iter().any(|b| b.name == a.name) {
            return Err(Error::DuplicateAxis(a.name.clone()));
        }
    }
    Ok(())
}

fn check_stochastic(mass: &[f64], row_len: usize, tol: f64, context: &str) -> Result<()> {
    for (row, chunk) in mass.chunks(row_len).enumerate() {
        if let Some(pos) = chunk.iter().position(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::NegativeMass {
                index: row * row_len + pos,
                value: chunk[pos],
            });
        }
        let sum: f64 = chunk.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::NotStochastic {
                context: context.to_string(),
                row,
                sum,
            });
        }
    }
    Ok(())
}

/// Iterate the multi-indices of a row-major tensor, calling `visit` with the
/// flat index and the running offset into a secondary index space whose
/// per-axis strides are `contrib`.
fn for_each_offset(shape: &[usize], contrib: &[usize], mut visit: impl FnMut(usize, usize)) {
    let total: usize = shape.iter().product();
    let mut digits = vec![0usize; shape.len()];
    let mut off = 0usize;
    for flat in 0..total {
        visit(flat, off);
        let mut ax = shape.len();
        while ax > 0 {
            ax -= 1;
            digits[ax] += 1;
            off += contrib[ax];
            if digits[ax] < shape[ax] {
                break;
            }
            off -= contrib[ax] * shape[ax];
            digits[ax] = 0;
        }
    }
}

/// Row-major strides for a shape.
pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Probability mass function over a named tuple of finite variables.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDist {
    axes: Vec<Alphabet>,
    mass: Vec<f64>,
    tol: Tolerances,
}

impl JointDist {
    pub fn new(axes: Vec<Alphabet>, mass: Vec<f64>) -> Result<Self> {
        Self::with_tolerances(axes, mass, Tolerances::default())
    }

    pub fn with_tolerances(axes: Vec<Alphabet>, mass: Vec<f64>, tol: Tolerances) -> Result<Self> {
        check_unique(&axes)?;
        let expected: usize = axes.iter().map(Alphabet::len).product();
        if mass.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                got: mass.len(),
            });
        }
        if let Some((index, &value)) = mass.iter().enumerate().find(|(_, &p)| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::NegativeMass { index, value });
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > tol.norm {
            return Err(Error::NotNormalized { sum });
        }
        Ok(JointDist { axes, mass, tol })
    }

    /// Build from a function of the multi-index.
    pub fn from_fn(axes: Vec<Alphabet>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let shape: Vec<usize> = axes.iter().map(Alphabet::len).collect();
        let total: usize = shape.iter().product();
        let mut mass = Vec::with_capacity(total);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..total {
            mass.push(f(&idx));
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Self::new(axes, mass)
    }

    pub fn axes(&self) -> &[Alphabet] {
        &self.axes
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn set_tolerances(&mut self, tol: Tolerances) {
        self.tol = tol;
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Alphabet::len).collect()
    }

    pub fn axis(&self, name: &str) -> Result<&Alphabet> {
        Ok(&self.axes[self.axis_index(name)?])
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn has_axis(&self, name: &str) -> bool {
        self.axes.iter().any(|a| a.name == name)
    }

    fn indices(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let i = self.axis_index(n)?;
            if out.contains(&i) {
                return Err(Error::OverlappingSets(n.to_string()));
            }
            out.push(i);
        }
        Ok(out)
    }

    /// Probability of one full multi-index.
    pub fn prob(&self, index: &[usize]) -> f64 {
        let st = strides(&self.shape());
        self.mass[index.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>()]
    }

    /// Marginal mass over the given axis positions, row-major in that order.
    pub(crate) fn marginal_mass(&self, idx: &[usize]) -> Vec<f64> {
        let shape = self.shape();
        let out_shape: Vec<usize> = idx.iter().map(|&i| shape[i]).collect();
        let out_strides = strides(&out_shape);
        let mut contrib = vec![0usize; shape.len()];
        for (k, &ax) in idx.iter().enumerate() {
            contrib[ax] = out_strides[k];
        }
        let mut out = vec![0.0; out_shape.iter().product()];
        for_each_offset(&shape, &contrib, |flat, off| out[off] += self.mass[flat]);
        out
    }

    pub(crate) fn entropy_axes(&self, idx: &[usize]) -> Bits {
        if idx.is_empty() {
            return 0.0;
        }
        entropy_of(&self.marginal_mass(idx))
    }

    /// Marginal distribution over `keep`, axes in the order given.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointDist> {
        if keep.is_empty() {
            return Err(Error::EmptyVariableSet);
        }
        let idx = self.indices(keep)?;
        let mut mass = self.marginal_mass(&idx);
        let sum: f64 = mass.iter().sum();
        mass.iter_mut().for_each(|p| *p /= sum);
        let axes = idx.iter().map(|&i| self.axes[i].clone()).collect();
        JointDist::with_tolerances(axes, mass, self.tol)
    }

    /// `H(vars)`.
    pub fn entropy(&self, vars: &[&str]) -> Result<Bits> {
        if vars.is_empty() {
            return Err(Error::EmptyVariableSet);
        }
        let idx = self.indices(vars)?;
        self.tol.clamp(self.entropy_axes(&idx), "entropy")
    }

    /// `H(vars | given)`; an empty `given` reduces to `H(vars)`.
    pub fn conditional_entropy(&self, vars: &[&str], given: &[&str]) -> Result<Bits> {
        if vars.is_empty() {
            return Err(Error::EmptyVariableSet);
        }
        let all: Vec<&str> = vars.iter().chain(given).copied().collect();
        let idx = self.indices(&all)?;
        let joint = self.entropy_axes(&idx);
        let cond = self.entropy_axes(&idx[vars.len()..]);
        self.tol.clamp(joint - cond, "conditional entropy")
    }

    /// `I(a; b | given)`.
    pub fn mutual_information(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<Bits> {
        InfoCalc::new(self).mi(a, b, given)
    }

    /// Extend `self` by the outputs of `channel`: `p(base) k(to | from)`.
    pub fn compose(&self, channel: &Channel) -> Result<JointDist> {
        let mut from_idx = Vec::with_capacity(channel.from_axes.len());
        for a in &channel.from_axes {
            let i = self
                .axis_index(&a.name)
                .map_err(|_| Error::MissingAxis(a.name.clone()))?;
            if self.axes[i].symbols != a.symbols {
                return Err(Error::AlphabetMismatch(format!(
                    "channel input `{}` does not match base alphabet",
                    a.name
                )));
            }
            from_idx.push(i);
        }
        for a in &channel.to_axes {
            if self.has_axis(&a.name) {
                return Err(Error::AxisCollision(a.name.clone()));
            }
        }
        let shape = self.shape();
        let from_shape: Vec<usize> = channel.from_axes.iter().map(Alphabet::len).collect();
        let from_strides = strides(&from_shape);
        let mut contrib = vec![0usize; shape.len()];
        for (k, &ax) in from_idx.iter().enumerate() {
            contrib[ax] = from_strides[k];
        }
        let to_size = channel.to_size();
        let mut mass = vec![0.0; self.mass.len() * to_size];
        for_each_offset(&shape, &contrib, |flat, row| {
            let p = self.mass[flat];
            if p == 0.0 {
                return;
            }
            let k = &channel.kernel[row * to_size..(row + 1) * to_size];
            let out = &mut mass[flat * to_size..(flat + 1) * to_size];
            for (o, &q) in out.iter_mut().zip(k) {
                *o = p * q;
            }
        });
        let axes = self.axes.iter().chain(&channel.to_axes).cloned().collect();
        JointDist::with_tolerances(axes, mass, self.tol)
    }

    /// Conditional distribution given `name = symbol`; the conditioned axis
    /// is kept (as a point mass) so that variable names stay valid.
    pub fn condition_on(&self, name: &str, symbol: usize) -> Result<JointDist> {
        let ax = self.axis_index(name)?;
        let shape = self.shape();
        if symbol >= shape[ax] {
            return Err(Error::OutOfDomain(format!("symbol {symbol} for axis `{name}`")));
        }
        let mut contrib = vec![0usize; shape.len()];
        contrib[ax] = 1;
        let mut mass = self.mass.clone();
        for_each_offset(&shape, &contrib, |flat, s| {
            if s != symbol {
                mass[flat] = 0.0;
            }
        });
        let total: f64 = mass.iter().sum();
        if total <= ZERO_MASS {
            return Err(Error::Precondition(format!("P({name} = {symbol}) = 0")));
        }
        mass.iter_mut().for_each(|p| *p /= total);
        JointDist::with_tolerances(self.axes.clone(), mass, self.tol)
    }

    /// Same distribution with one axis renamed.
    pub fn rename_axis(&self, from: &str, to: &str) -> Result<JointDist> {
        let i = self.axis_index(from)?;
        if from != to && self.has_axis(to) {
            return Err(Error::AxisCollision(to.to_string()));
        }
        let mut axes = self.axes.clone();
        axes[i] = axes[i].renamed(to);
        JointDist::with_tolerances(axes, self.mass.clone(), self.tol)
    }
}

/// Conditional distribution `k(to_axes | from_axes)` stored as a dense
/// row-stochastic tensor, one row per joint conditioning symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    from_axes: Vec<Alphabet>,
    to_axes: Vec<Alphabet>,
    kernel: Vec<f64>,
}

impl Channel {
    pub fn new(from_axes: Vec<Alphabet>, to_axes: Vec<Alphabet>, kernel: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(from_axes, to_axes, kernel, Tolerances::default().norm)
    }

    pub fn with_tolerance(
        from_axes: Vec<Alphabet>,
        to_axes: Vec<Alphabet>,
        kernel: Vec<f64>,
        tol: f64,
    ) -> Result<Self> {
        if to_axes.is_empty() {
            return Err(Error::EmptyVariableSet);
        }
        let all: Vec<Alphabet> = from_axes.iter().chain(&to_axes).cloned().collect();
        check_unique(&all)?;
        let rows: usize = from_axes.iter().map(Alphabet::len).product();
        let cols: usize = to_axes.iter().map(Alphabet::len).product();
        if kernel.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: rows * cols,
                got: kernel.len(),
            });
        }
        let context = format!(
            "channel to ({})",
            to_axes.iter().map(|a| a.name.as_str()).collect::<Vec<_>>().join(",")
        );
        check_stochastic(&kernel, cols, tol, &context)?;
        Ok(Channel {
            from_axes,
            to_axes,
            kernel,
        })
    }

    /// Build from explicit rows (one per joint conditioning symbol).
    pub fn from_rows(from_axes: Vec<Alphabet>, to_axes: Vec<Alphabet>, rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(from_axes, to_axes, rows.concat())
    }

    /// Deterministic channel: `to = map(from)` as a flat output index.
    pub fn deterministic(
        from_axes: Vec<Alphabet>,
        to_axes: Vec<Alphabet>,
        map: impl Fn(&[usize]) -> usize,
    ) -> Result<Self> {
        let from_shape: Vec<usize> = from_axes.iter().map(Alphabet::len).collect();
        let rows: usize = from_shape.iter().product();
        let cols: usize = to_axes.iter().map(Alphabet::len).product();
        let mut kernel = vec![0.0; rows * cols];
        let mut idx = vec![0usize; from_shape.len()];
        for r in 0..rows {
            let out = map(&idx);
            if out >= cols {
                return Err(Error::OutOfDomain(format!("deterministic map output {out} >= {cols}")));
            }
            kernel[r * cols + out] = 1.0;
            for ax in (0..from_shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < from_shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Self::new(from_axes, to_axes, kernel)
    }

    /// Copy channel `to = from` under a new name.
    pub fn identity(from: &Alphabet, to_name: &str) -> Result<Self> {
        Self::deterministic(vec![from.clone()], vec![from.renamed(to_name)], |i| i[0])
    }

    pub fn from_axes(&self) -> &[Alphabet] {
        &self.from_axes
    }

    pub fn to_axes(&self) -> &[Alphabet] {
        &self.to_axes
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn to_size(&self) -> usize {
        self.to_axes.iter().map(Alphabet::len).product()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.to_size();
        &self.kernel[r * c..(r + 1) * c]
    }
}

/// Entropy calculator over one distribution that memoises marginal
/// entropies by axis set. Region formulas reuse the same marginals many
/// times, so evaluators go through this type.
pub struct InfoCalc<'a> {
    dist: &'a JointDist,
    cache: RefCell<HashMap<u64, Bits>>,
}

impl<'a> InfoCalc<'a> {
    pub fn new(dist: &'a JointDist) -> Self {
        InfoCalc {
            dist,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn dist(&self) -> &JointDist {
        self.dist
    }

    fn mask(&self, set: &[&str]) -> Result<u64> {
        let mut mask = 0u64;
        for n in set {
            let i = self.dist.axis_index(n)?;
            if i >= 64 {
                return Err(Error::OutOfDomain("more than 64 axes".into()));
            }
            let bit = 1u64 << i;
            if mask & bit != 0 {
                return Err(Error::OverlappingSets(n.to_string()));
            }
            mask |= bit;
        }
        Ok(mask)
    }

    fn h_mask(&self, mask: u64) -> Bits {
        if mask == 0 {
            return 0.0;
        }
        if let Some(&h) = self.cache.borrow().get(&mask) {
            return h;
        }
        let idx: Vec<usize> = (0..64).filter(|i| mask & (1u64 << i) != 0).collect();
        let h = self.dist.entropy_axes(&idx);
        self.cache.borrow_mut().insert(mask, h);
        h
    }

    pub fn h(&self, vars: &[&str]) -> Result<Bits> {
        if vars.is_empty() {
            return Err(Error::EmptyVariableSet);
        }
        let m = self.mask(vars)?;
        self.dist.tol.clamp(self.h_mask(m), "entropy")
    }

    /// `H(vars | given)`.
    pub fn hc(&self, vars: &[&str], given: &[&str]) -> Result<Bits> {
        if vars.is_empty() {
            return Err(Error::EmptyVariableSet);
        }
        let mv = self.mask(vars)?;
        let mg = self.mask(given)?;
        if mv & mg != 0 {
            return Err(Error::OverlappingSets(format!("{vars:?} / {given:?}")));
        }
        self.dist
            .tol
            .clamp(self.h_mask(mv | mg) - self.h_mask(mg), "conditional entropy")
    }

    /// `I(a; b | given)` via `H(a|given) - H(a|b,given)`.
    pub fn mi(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<Bits> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptyVariableSet);
        }
        let ma = self.mask(a)?;
        let mb = self.mask(b)?;
        let mg = self.mask(given)?;
        if ma & mb != 0 || ma & mg != 0 || mb & mg != 0 {
            return Err(Error::OverlappingSets(format!("{a:?} / {b:?} / {given:?}")));
        }
        let v = self.h_mask(ma | mg) - self.h_mask(mg) - self.h_mask(ma | mb | mg) + self.h_mask(mb | mg);
        self.dist.tol.clamp(v, "mutual information")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(names: &[&str]) -> Vec<Alphabet> {
        names.iter().map(|n| Alphabet::binary(*n)).collect()
    }

    fn bsc(cross: f64) -> JointDist {
        JointDist::new(
            bits(&["A", "B"]),
            vec![0.5 * (1.0 - cross), 0.5 * cross, 0.5 * cross, 0.5 * (1.0 - cross)],
        )
        .unwrap()
    }

    #[test]
    fn entropy_examples() {
        let uni = JointDist::new(bits(&["A"]), vec![0.5, 0.5]).unwrap();
        assert!((uni.entropy(&["A"]).unwrap() - 1.0).abs() < 1e-15);
        let point = JointDist::new(bits(&["A"]), vec![1.0, 0.0]).unwrap();
        assert_eq!(point.entropy(&["A"]).unwrap(), 0.0);
        let b = JointDist::new(bits(&["A"]), vec![0.75, 0.25]).unwrap();
        // -0.25 log2 0.25 - 0.75 log2 0.75
        assert!((b.entropy(&["A"]).unwrap() - 0.811_278_124_459_132_9).abs() < 1e-12);
    }

    #[test]
    fn entropy_errors() {
        let d = bsc(0.1);
        assert!(matches!(d.entropy(&[]), Err(Error::EmptyVariableSet)));
        assert!(matches!(d.entropy(&["C"]), Err(Error::UnknownVariable(_))));
        assert!(matches!(
            d.conditional_entropy(&["A"], &["A"]),
            Err(Error::OverlappingSets(_))
        ));
        assert!(matches!(
            d.mutual_information(&["A"], &["A"], &[]),
            Err(Error::OverlappingSets(_))
        ));
    }

    #[test]
    fn conditional_entropy_examples() {
        let indep = JointDist::new(bits(&["A", "B"]), vec![0.25; 4]).unwrap();
        assert!((indep.conditional_entropy(&["A"], &["B"]).unwrap() - 1.0).abs() < 1e-12);
        let copy = bsc(0.0);
        assert_eq!(copy.conditional_entropy(&["A"], &["B"]).unwrap(), 0.0);
        let sym = bsc(0.25);
        assert!((sym.conditional_entropy(&["A"], &["B"]).unwrap() - 0.811_278_124_459_132_9).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let indep = JointDist::new(bits(&["A", "B"]), vec![0.25; 4]).unwrap();
        assert_eq!(indep.mutual_information(&["A"], &["B"], &[]).unwrap(), 0.0);
        let copy = bsc(0.0);
        assert!((copy.mutual_information(&["A"], &["B"], &[]).unwrap() - 1.0).abs() < 1e-12);
        // A - B - C built by composition.
        let c = Channel::from_rows(
            vec![Alphabet::binary("B")],
            vec![Alphabet::binary("C")],
            &[vec![0.7, 0.3], vec![0.2, 0.8]],
        )
        .unwrap();
        let chain = bsc(0.3).compose(&c).unwrap();
        assert_eq!(chain.mutual_information(&["A"], &["C"], &["B"]).unwrap(), 0.0);
    }

    #[test]
    fn marginalize_examples() {
        let indep = JointDist::new(bits(&["A", "B"]), vec![0.25; 4]).unwrap();
        let m = indep.marginalize(&["B"]).unwrap();
        assert_eq!(m.mass(), &[0.5, 0.5]);
        let same = indep.marginalize(&["A", "B"]).unwrap();
        assert_eq!(same, indep);
        assert!(matches!(indep.marginalize(&[]), Err(Error::EmptyVariableSet)));
        // Reordered marginal transposes the tensor.
        let d = JointDist::new(bits(&["A", "B"]), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let t = d.marginalize(&["B", "A"]).unwrap();
        assert_eq!(t.mass(), &[0.1, 0.3, 0.2, 0.4]);
    }

    #[test]
    fn compose_examples() {
        let x = JointDist::new(bits(&["X"]), vec![0.5, 0.5]).unwrap();
        let copy = x.compose(&Channel::identity(&Alphabet::binary("X"), "Xc").unwrap()).unwrap();
        let i = copy.mutual_information(&["X"], &["Xc"], &[]).unwrap();
        assert!((i - x.entropy(&["X"]).unwrap()).abs() < 1e-12);

        // X1 = S1 * X with P(S1 = 1) = 0.2.
        let mult = Channel::from_rows(
            vec![Alphabet::binary("X")],
            vec![Alphabet::binary("X1")],
            &[vec![1.0, 0.0], vec![0.8, 0.2]],
        )
        .unwrap();
        let j = x.compose(&mult).unwrap();
        let m = j.marginalize(&["X1"]).unwrap();
        assert!((m.mass()[1] - 0.1).abs() < 1e-15);
        assert_eq!(j.marginalize(&["X"]).unwrap(), x);
    }

    #[test]
    fn compose_errors() {
        let x = JointDist::new(bits(&["X"]), vec![0.5, 0.5]).unwrap();
        let clash = Channel::identity(&Alphabet::binary("W"), "X").unwrap();
        assert!(matches!(x.compose(&clash), Err(Error::MissingAxis(_))));
        let collide = Channel::identity(&Alphabet::binary("X"), "X2").unwrap();
        let twice = x.compose(&collide).unwrap();
        assert!(matches!(twice.compose(&collide), Err(Error::AxisCollision(_))));
    }

    #[test]
    fn validation() {
        assert!(Alphabet::new("A", vec![]).is_err());
        assert!(Alphabet::new("A", vec!["a".into(), "a".into()]).is_err());
        assert!(matches!(
            JointDist::new(bits(&["A"]), vec![0.6, 0.5]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            JointDist::new(bits(&["A"]), vec![1.5, -0.5]),
            Err(Error::NegativeMass { .. })
        ));
        assert!(matches!(
            JointDist::new(bits(&["A", "A"]), vec![0.25; 4]),
            Err(Error::DuplicateAxis(_))
        ));
        assert!(matches!(
            Channel::from_rows(
                vec![Alphabet::binary("A")],
                vec![Alphabet::binary("B")],
                &[vec![0.5, 0.5], vec![0.5, 0.4]]
            ),
            Err(Error::NotStochastic { row: 1, .. })
        ));
    }

    #[test]
    fn neg_part_and_binary_entropy() {
        assert_eq!(neg_part(0.3), 0.0);
        assert_eq!(neg_part(-0.2), -0.2);
        assert_eq!(neg_part(0.0), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // high-precision value of Hb(0.11)
        assert!((binary_entropy(0.11).unwrap() - 0.499_915_958_164_528_4).abs() < 1e-12);
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn clamping_policy() {
        let tol = Tolerances::default();
        assert_eq!(tol.clamp(-1e-10, "x").unwrap(), 0.0);
        assert_eq!(tol.clamp(0.4, "x").unwrap(), 0.4);
        assert!(matches!(tol.clamp(-1e-6, "x"), Err(Error::Internal(_))));
    }

    #[test]
    fn condition_on_keeps_axis() {
        let d = JointDist::new(bits(&["A", "B"]), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let c = d.condition_on("A", 1).unwrap();
        assert!((c.prob(&[1, 0]) - 0.3 / 0.7).abs() < 1e-15);
        assert_eq!(c.entropy(&["A"]).unwrap(), 0.0);
    }
}
