//! Independent oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use funcomp::{Alphabet, JointDist, ModelAlphabets, SourceModel};
use rand::Rng;

/// Raw row-major joint (last axis fastest) kept separate from the library
/// so that the oracle does not depend on its indexing code.
#[derive(Clone, Debug)]
pub struct RawJoint {
    pub shape: Vec<usize>,
    pub mass: Vec<f64>,
}

pub const NAMES: [&str; 4] = ["A", "B", "C", "D"];

impl RawJoint {
    pub fn random<R: Rng>(rng: &mut R, max_axes: usize, max_size: usize) -> Self {
        let axes = rng.gen_range(1..=max_axes);
        let shape: Vec<usize> = (0..axes).map(|_| rng.gen_range(1..=max_size)).collect();
        let cells: usize = shape.iter().product();
        let sparse = rng.gen_bool(0.3);
        let mut mass: Vec<f64> = (0..cells)
            .map(|_| {
                if sparse && rng.gen_bool(0.4) {
                    0.0
                } else {
                    -rng.gen::<f64>().max(1e-300).ln()
                }
            })
            .collect();
        if mass.iter().all(|&p| p == 0.0) {
            mass[rng.gen_range(0..cells)] = 1.0;
        }
        let s: f64 = mass.iter().sum();
        mass.iter_mut().for_each(|p| *p /= s);
        RawJoint { shape, mass }
    }

    pub fn names(&self) -> Vec<&'static str> {
        NAMES[..self.shape.len()].to_vec()
    }

    pub fn to_dist(&self) -> JointDist {
        let axes = self
            .shape
            .iter()
            .zip(NAMES)
            .map(|(&n, name)| Alphabet::indexed(name, n).unwrap())
            .collect();
        JointDist::new(axes, self.mass.clone()).unwrap()
    }

    fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for k in (0..self.shape.len()).rev() {
            idx[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        idx
    }

    /// `H(vars)` by enumerating every cell into a hash map keyed by the
    /// projected index.
    pub fn entropy(&self, vars: &[usize]) -> f64 {
        let mut marg: HashMap<Vec<usize>, f64> = HashMap::new();
        for (flat, &p) in self.mass.iter().enumerate() {
            let idx = self.unflatten(flat);
            let key: Vec<usize> = vars.iter().map(|&v| idx[v]).collect();
            *marg.entry(key).or_default() += p;
        }
        marg.values().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
    }

    /// `I(A;B|C)` from the textbook sum `sum p(abc) log p(abc)p(c)/(p(ac)p(bc))`.
    pub fn mutual_information(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        let proj = |vars: &[usize]| {
            let mut m: HashMap<Vec<usize>, f64> = HashMap::new();
            for (flat, &p) in self.mass.iter().enumerate() {
                let idx = self.unflatten(flat);
                *m.entry(vars.iter().map(|&v| idx[v]).collect()).or_default() += p;
            }
            m
        };
        let abc: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
        let ac: Vec<usize> = a.iter().chain(c).copied().collect();
        let bc: Vec<usize> = b.iter().chain(c).copied().collect();
        let (p_abc, p_ac, p_bc, p_c) = (proj(&abc), proj(&ac), proj(&bc), proj(c));
        let mut total = 0.0;
        for (key, &p) in &p_abc {
            if p <= 0.0 {
                continue;
            }
            let ka: Vec<usize> = key[..a.len()].to_vec();
            let kb: Vec<usize> = key[a.len()..a.len() + b.len()].to_vec();
            let kc: Vec<usize> = key[a.len() + b.len()..].to_vec();
            let k_ac: Vec<usize> = ka.iter().chain(&kc).copied().collect();
            let k_bc: Vec<usize> = kb.iter().chain(&kc).copied().collect();
            total += p * (p * p_c[&kc] / (p_ac[&k_ac] * p_bc[&k_bc])).log2();
        }
        total
    }
}

/// Random split of the axes into three disjoint (possibly empty) sets,
/// with `a` and `b` nonempty when enough axes exist.
pub fn random_split<R: Rng>(rng: &mut R, axes: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let (mut a, mut b, mut c) = (vec![], vec![], vec![]);
    for i in 0..axes {
        match rng.gen_range(0..3) {
            0 => a.push(i),
            1 => b.push(i),
            _ => c.push(i),
        }
    }
    (a, b, c)
}

pub fn names_of(ix: &[usize]) -> Vec<&'static str> {
    ix.iter().map(|&i| NAMES[i]).collect()
}

pub fn random_row<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut r: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = r.iter().sum();
    r.iter_mut().for_each(|p| *p /= s);
    r
}

/// How `P_{YZ|X}` is drawn for [`random_binary_model`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Noise {
    General,
    /// `Z` is a noisy copy of `Y`.
    EveDegraded,
    /// `Y` is a noisy copy of `Z`.
    FusionDegraded,
}

/// Binary model with `f = (x1, x2)` taking four values.
pub fn random_binary_model<R: Rng>(rng: &mut R, noise: Noise) -> SourceModel {
    let p_x = random_row(rng, 2);
    let ch1: Vec<Vec<f64>> = (0..2).map(|_| random_row(rng, 2)).collect();
    let ch2: Vec<Vec<f64>> = (0..2).map(|_| random_row(rng, 2)).collect();
    let ch_yz: Vec<Vec<Vec<f64>>> = match noise {
        Noise::General => (0..2)
            .map(|_| {
                let r = random_row(rng, 4);
                vec![r[..2].to_vec(), r[2..].to_vec()]
            })
            .collect(),
        Noise::EveDegraded | Noise::FusionDegraded => {
            let first: Vec<Vec<f64>> = (0..2).map(|_| random_row(rng, 2)).collect();
            let second: Vec<Vec<f64>> = (0..2).map(|_| random_row(rng, 2)).collect();
            (0..2)
                .map(|x| {
                    (0..2)
                        .map(|y| {
                            (0..2)
                                .map(|z| {
                                    if noise == Noise::EveDegraded {
                                        first[x][y] * second[y][z]
                                    } else {
                                        first[x][z] * second[z][y]
                                    }
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        }
    };
    let alphabets = ModelAlphabets {
        f: Alphabet::indexed("F", 4).unwrap(),
        ..ModelAlphabets::binary()
    };
    let f_table = (0..8).map(|i| i >> 1).collect();
    SourceModel::new(alphabets, p_x, &ch1, &ch2, &ch_yz, f_table, None).unwrap()
}

/// Random model with alphabets of at most `max` symbols and an arbitrary
/// function into an alphabet of at most `max` symbols.
pub fn random_small_model<R: Rng>(rng: &mut R, max: usize) -> SourceModel {
    let mut size = |name: &str| Alphabet::indexed(name, rng.gen_range(2..=max)).unwrap();
    let a = ModelAlphabets {
        x: size("X"),
        x1: size("X1"),
        x2: size("X2"),
        y: size("Y"),
        z: size("Z"),
        f: size("F"),
    };
    let (nx, n1, n2, ny, nz, nf) = (a.x.len(), a.x1.len(), a.x2.len(), a.y.len(), a.z.len(), a.f.len());
    let p_x = random_row(rng, nx);
    let ch1: Vec<Vec<f64>> = (0..nx).map(|_| random_row(rng, n1)).collect();
    let ch2: Vec<Vec<f64>> = (0..nx).map(|_| random_row(rng, n2)).collect();
    let ch_yz: Vec<Vec<Vec<f64>>> = (0..nx)
        .map(|_| {
            let r = random_row(rng, ny * nz);
            r.chunks(nz).map(<[f64]>::to_vec).collect()
        })
        .collect();
    let f_table = (0..n1 * n2 * ny).map(|_| rng.gen_range(0..nf)).collect();
    SourceModel::new(a, p_x, &ch1, &ch2, &ch_yz, f_table, None).unwrap()
}

pub fn example_model() -> SourceModel {
    SourceModel::bernoulli_example(0.2, 0.11, 0.3, 0.25).unwrap()
}
