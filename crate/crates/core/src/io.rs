//! Model files and result writers.
//!
//! Models are JSON documents:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "alphabets": {"X": ["0","1"], "X1": [...], "X2": [...], "Y": [...], "Z": [...], "F": [...]},
//!   "p_x": [0.5, 0.5],
//!   "ch1": [[...], ...],
//!   "ch2": [[...], ...],
//!   "ch_yz": [[[...]]],
//!   "f": [[["label", ...]]],
//!   "distortion": {"f_hat_alphabet": [...], "d": [[...]]}
//! }
//! ```
//!
//! `ch_yz` is indexed `[x][y][z]` and `f` `[x1][x2][y]`, with entries naming
//! symbols of the `F` alphabet. `distortion` is optional.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::vars::*;
use crate::model::{Distortion, ModelAlphabets, SourceModel};
use crate::prob::{Alphabet, Channel, JointDist};
use crate::regions::RateBounds;
use crate::search::ParetoFront;
use crate::sim::SimReport;

pub const MODEL_SCHEMA_VERSION: u32 = 1;
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

/// Column order of bound tables.
pub const BOUND_COLUMNS: [&str; 8] = ["origin", "r_s", "r_w1", "r_w2", "r_w_sum", "r_l_dec", "r_l_eve", "d"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionFile {
    pub f_hat_alphabet: Vec<String>,
    /// `d[f][f_hat]`.
    pub d: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub alphabets: BTreeMap<String, Vec<String>>,
    pub p_x: Vec<f64>,
    pub ch1: Vec<Vec<f64>>,
    pub ch2: Vec<Vec<f64>>,
    pub ch_yz: Vec<Vec<Vec<f64>>>,
    pub f: Vec<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<DistortionFile>,
}

/// Line of the first occurrence of `"key"` in `text`, 1-based.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

fn anchored(text: &str, key: &str, err: Error) -> Error {
    match key_line(text, key) {
        Some(line) => Error::Parse(format!("{err} (in `{key}` at line {line})")),
        None => Error::Parse(format!("{err} (in `{key}`)")),
    }
}

impl ModelFile {
    pub fn from_model(model: &SourceModel) -> Self {
        let a = model.alphabets();
        let mut alphabets = BTreeMap::new();
        for al in [&a.x, &a.x1, &a.x2, &a.y, &a.z, &a.f] {
            alphabets.insert(al.name().to_string(), al.symbols().to_vec());
        }
        let rows = |ch: &Channel| (0..a.x.len()).map(|x| ch.row(x).to_vec()).collect::<Vec<_>>();
        let nz = a.z.len();
        let ch_yz = (0..a.x.len())
            .map(|x| model.ch_yz().row(x).chunks(nz).map(<[f64]>::to_vec).collect())
            .collect();
        let f = (0..a.x1.len())
            .map(|x1| {
                (0..a.x2.len())
                    .map(|x2| (0..a.y.len()).map(|y| a.f.symbols()[model.f(x1, x2, y)].clone()).collect())
                    .collect()
            })
            .collect();
        let distortion = model.distortion().map(|d| DistortionFile {
            f_hat_alphabet: d.f_hat().symbols().to_vec(),
            d: d.table().chunks(d.f_hat().len()).map(<[f64]>::to_vec).collect(),
        });
        ModelFile {
            schema_version: MODEL_SCHEMA_VERSION,
            alphabets,
            p_x: model.p_x().to_vec(),
            ch1: rows(model.ch1()),
            ch2: rows(model.ch2()),
            ch_yz,
            f,
            distortion,
        }
    }

    /// Validate into a model. `text`, when given, is the source document and
    /// is used to anchor diagnostics to line numbers.
    pub fn to_model(&self, text: Option<&str>) -> Result<SourceModel> {
        let text = text.unwrap_or("");
        if self.schema_version != MODEL_SCHEMA_VERSION {
            return Err(anchored(
                text,
                "schema_version",
                Error::Parse(format!(
                    "unsupported schema_version {}, expected {MODEL_SCHEMA_VERSION}",
                    self.schema_version
                )),
            ));
        }
        let alpha = |name: &str| -> Result<Alphabet> {
            let symbols = self
                .alphabets
                .get(name)
                .ok_or_else(|| anchored(text, "alphabets", Error::MissingAxis(name.to_string())))?;
            Alphabet::new(name, symbols.clone()).map_err(|e| anchored(text, "alphabets", e))
        };
        if let Some(extra) = self.alphabets.keys().find(|k| ![X, X1, X2, Y, Z, F].contains(&k.as_str())) {
            return Err(anchored(text, "alphabets", Error::UnknownVariable(extra.clone())));
        }
        let a = ModelAlphabets {
            x: alpha(X)?,
            x1: alpha(X1)?,
            x2: alpha(X2)?,
            y: alpha(Y)?,
            z: alpha(Z)?,
            f: alpha(F)?,
        };
        JointDist::new(vec![a.x.clone()], self.p_x.clone()).map_err(|e| anchored(text, "p_x", e))?;

        let (n1, n2, ny) = (a.x1.len(), a.x2.len(), a.y.len());
        let shape_err = |msg: String| anchored(text, "f", Error::AlphabetMismatch(msg));
        if self.f.len() != n1 {
            return Err(shape_err(format!("f has {} entries, X1 has {n1} symbols", self.f.len())));
        }
        let mut table = Vec::with_capacity(n1 * n2 * ny);
        for (i, plane) in self.f.iter().enumerate() {
            if plane.len() != n2 {
                return Err(shape_err(format!("f[{i}] has {} entries, X2 has {n2} symbols", plane.len())));
            }
            for (j, row) in plane.iter().enumerate() {
                if row.len() != ny {
                    return Err(shape_err(format!("f[{i}][{j}] has {} entries, Y has {ny} symbols", row.len())));
                }
                for (k, label) in row.iter().enumerate() {
                    let idx = a.f.index_of(label).ok_or_else(|| {
                        shape_err(format!("f[{i}][{j}][{k}] = `{label}` is not a declared F label"))
                    })?;
                    table.push(idx);
                }
            }
        }

        let distortion = match &self.distortion {
            None => None,
            Some(d) => {
                let f_hat = Alphabet::new("F_hat", d.f_hat_alphabet.clone()).map_err(|e| anchored(text, "distortion", e))?;
                if d.d.len() != a.f.len() || d.d.iter().any(|r| r.len() != f_hat.len()) {
                    return Err(anchored(
                        text,
                        "distortion",
                        Error::AlphabetMismatch(format!("d must be a {}x{} matrix", a.f.len(), f_hat.len())),
                    ));
                }
                Some(Distortion::new(f_hat, a.f.len(), d.d.concat()).map_err(|e| anchored(text, "distortion", e))?)
            }
        };

        SourceModel::new(a, self.p_x.clone(), &self.ch1, &self.ch2, &self.ch_yz, table, distortion).map_err(|e| {
            let msg = e.to_string();
            let key = ["ch_yz", "ch1", "ch2"].into_iter().find(|k| msg.contains(k)).unwrap_or("p_x");
            anchored(text, key, e)
        })
    }
}

/// Parse and validate a model document.
pub fn parse_model(text: &str) -> Result<SourceModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("model file: {e}")))?;
    file.to_model(Some(text))
}

pub fn read_model(path: &std::path::Path) -> Result<SourceModel> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

pub fn model_to_json(model: &SourceModel) -> String {
    serde_json::to_string_pretty(&ModelFile::from_model(model)).expect("model serialises")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse(format!("unknown format `{other}`"))),
        }
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn bound_fields(b: &RateBounds) -> Vec<String> {
    vec![
        b.origin.as_str().to_string(),
        num(b.r_s),
        num(b.r_w1),
        num(b.r_w2),
        num(b.r_w_sum),
        num(b.r_l_dec),
        num(b.r_l_eve),
        opt(b.d),
    ]
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    rows: T,
}

fn write_json<T: Serialize>(out: &mut dyn Write, kind: &str, rows: T) -> Result<()> {
    serde_json::to_writer_pretty(
        &mut *out,
        &Envelope {
            schema_version: OUTPUT_SCHEMA_VERSION,
            kind,
            rows,
        },
    )?;
    writeln!(out)?;
    Ok(())
}

/// Bound rows with columns [`BOUND_COLUMNS`].
pub fn write_bounds(out: &mut dyn Write, format: Format, rows: &[RateBounds]) -> Result<()> {
    match format {
        Format::Json => write_json(out, "bounds", rows),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(BOUND_COLUMNS)?;
            for b in rows {
                w.write_record(bound_fields(b))?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct FrontRow<'a> {
    #[serde(flatten)]
    bounds: &'a RateBounds,
    hash: &'a str,
    aux: &'a crate::auxiliary::AuxSystem,
}

/// One row per front point: bound columns followed by the aux hash.
pub fn write_front(out: &mut dyn Write, format: Format, front: &ParetoFront) -> Result<()> {
    match format {
        Format::Json => {
            let rows: Vec<FrontRow> = front
                .points
                .iter()
                .map(|p| FrontRow {
                    bounds: &p.bounds,
                    hash: &p.hash,
                    aux: &p.aux,
                })
                .collect();
            write_json(out, "pareto_front", rows)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let mut header: Vec<&str> = BOUND_COLUMNS.to_vec();
            header.push("hash");
            w.write_record(&header)?;
            for p in &front.points {
                let mut rec = bound_fields(&p.bounds);
                rec.push(p.hash.clone());
                w.write_record(rec)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

pub const SIM_COLUMNS: [&str; 22] = [
    "n",
    "seed",
    "mode",
    "rate_v1_f",
    "rate_v1_w",
    "rate_u1_f",
    "rate_u1_w",
    "rate_v2_f",
    "rate_v2_w",
    "rate_u2_f",
    "rate_u2_w",
    "error_prob",
    "ci_lo",
    "ci_hi",
    "confidence_radius",
    "trials",
    "secrecy_leak",
    "priv_dec",
    "priv_eve",
    "storage1",
    "storage2",
    "schema_version",
];

pub fn write_sim(out: &mut dyn Write, format: Format, rows: &[SimReport]) -> Result<()> {
    match format {
        Format::Json => write_json(out, "simulation", rows),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(SIM_COLUMNS)?;
            for r in rows {
                let q = r.rates;
                let mode = match r.mode {
                    crate::sim::SimMode::Exact => "exact",
                    crate::sim::SimMode::MonteCarlo => "monte_carlo",
                };
                w.write_record([
                    r.n.to_string(),
                    r.seed.to_string(),
                    mode.to_string(),
                    num(q.v1.f),
                    num(q.v1.w),
                    num(q.u1.f),
                    num(q.u1.w),
                    num(q.v2.f),
                    num(q.v2.w),
                    num(q.u2.f),
                    num(q.u2.w),
                    num(r.error_prob),
                    opt(r.error_ci.map(|c| c.0)),
                    opt(r.error_ci.map(|c| c.1)),
                    opt(r.confidence_radius),
                    r.trials.map(|t| t.to_string()).unwrap_or_default(),
                    opt(r.secrecy_leak),
                    opt(r.priv_dec),
                    opt(r.priv_eve),
                    num(r.storage1),
                    num(r.storage2),
                    OUTPUT_SCHEMA_VERSION.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let m = SourceModel::bernoulli_example(0.2, 0.11, 0.3, 0.25).unwrap();
        let m = m.clone().with_distortion(Distortion::hamming(&m.alphabets().f)).unwrap();
        let back = parse_model(&model_to_json(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_model("{\n  \"schema_version\": 1,\n  \"p_x\": [0.5,\n}").unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }

    #[test]
    fn validation_errors_are_entry_level() {
        let m = SourceModel::bernoulli_example(0.2, 0.11, 0.3, 0.25).unwrap();
        let mut file = ModelFile::from_model(&m);
        file.ch2[1] = vec![0.5, 0.6];
        let text = serde_json::to_string_pretty(&file).unwrap();
        let err = parse_model(&text).unwrap_err().to_string();
        assert!(err.contains("ch2[1]"), "{err}");
        assert!(err.contains("line"), "{err}");

        let mut file = ModelFile::from_model(&m);
        file.f[0][1][0] = "zz".into();
        let err = parse_model(&serde_json::to_string(&file).unwrap()).unwrap_err().to_string();
        assert!(err.contains("f[0][1][0]"), "{err}");

        let mut file = ModelFile::from_model(&m);
        file.p_x = vec![0.5, 0.6];
        assert!(parse_model(&serde_json::to_string(&file).unwrap()).is_err());

        let mut file = ModelFile::from_model(&m);
        file.schema_version = 2;
        assert!(parse_model(&serde_json::to_string(&file).unwrap()).is_err());
    }

    #[test]
    fn bounds_csv_header() {
        let m = SourceModel::bernoulli_example(0.2, 0.11, 0.3, 0.25).unwrap();
        let b = crate::regions::eval_lemma4(&m).unwrap();
        let mut out = Vec::new();
        write_bounds(&mut out, Format::Csv, &[b]).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "origin,r_s,r_w1,r_w2,r_w_sum,r_l_dec,r_l_eve,d");
        assert!(lines.next().unwrap().starts_with("lemma4,0.757"));
    }
}
