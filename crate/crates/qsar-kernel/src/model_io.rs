//! Versioned text records for trained models.
//!
//! Each line is a key followed by space-separated values; floats use 17
//! significant digits so a reload reproduces decision values bit for bit.
//! The kernel configuration is embedded as a JSON value.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use qsar_kernel_core::eval::Label;
use qsar_kernel_core::regression::{BasisSpec, RegModel};
use qsar_kernel_core::svm::SvmModel;
use qsar_kernel_core::KernelConfig;

use crate::csv_io::{format_label, parse_label};
use crate::error::{AppError, AppResult};
use crate::gram_io::fmt17;

pub const FORMAT_TAG: &str = "qsar-kernel-model";
pub const FORMAT_VERSION: u32 = 1;

const STAGE: &str = "model-io";

#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Svm(SvmModel),
    Reg(RegModel),
}

impl SavedModel {
    pub fn predict(&self, x: &[f64]) -> qsar_kernel_core::Result<Label> {
        match self {
            SavedModel::Svm(m) => m.predict(x),
            SavedModel::Reg(m) => m.predict_label(x),
        }
    }
}

fn floats(v: &[f64]) -> String {
    v.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(" ")
}

pub fn model_to_string(model: &SavedModel) -> AppResult<String> {
    let mut s = format!("{FORMAT_TAG} v{FORMAT_VERSION}\n");
    match model {
        SavedModel::Svm(m) => {
            let kernel = serde_json::to_string(&m.kernel_config)
                .map_err(|e| AppError::invalid(STAGE, e.to_string()))?;
            s += "type svm\n";
            s += &format!("kernel {kernel}\n");
            s += &format!("c {}\n", fmt17(m.c));
            s += &format!("bias {}\n", fmt17(m.bias));
            s += &format!("converged {}\n", m.converged);
            s += &format!("iterations {}\n", m.iterations);
            s += &format!("shape {} {}\n", m.alphas.len(), m.dim());
            for i in 0..m.alphas.len() {
                s += &format!(
                    "sv {} {} {}\n",
                    format_label(m.labels[i]),
                    fmt17(m.alphas[i]),
                    floats(&m.training_features[i])
                );
            }
        }
        SavedModel::Reg(m) => {
            let basis = match m.basis {
                BasisSpec::Affine => "affine",
                BasisSpec::Poly2 => "poly2",
            };
            s += "type reg\n";
            s += &format!("basis {basis}\n");
            s += &format!("threshold {}\n", fmt17(m.threshold));
            s += &format!("ridge {}\n", fmt17(m.ridge));
            s += &format!("rank_deficient {}\n", m.rank_deficient);
            s += &format!("coefficients {}\n", floats(&m.coefficients));
        }
    }
    s += "end\n";
    Ok(s)
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn expect(&mut self, key: &str) -> AppResult<&'a str> {
        let (n, line) = self
            .it
            .next()
            .ok_or_else(|| AppError::invalid(STAGE, format!("missing '{key}' line")))?;
        match line.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest),
            _ if line == key => Ok(""),
            _ => Err(AppError::invalid(
                STAGE,
                format!("line {}: expected '{key}'", n + 1),
            )),
        }
    }
}

fn parse<T: std::str::FromStr>(v: &str, what: &str) -> AppResult<T> {
    v.trim()
        .parse()
        .map_err(|_| AppError::invalid(STAGE, format!("bad {what} '{v}'")))
}

fn parse_floats(v: &str, what: &str) -> AppResult<Vec<f64>> {
    v.split_whitespace().map(|t| parse(t, what)).collect()
}

pub fn model_from_str(s: &str) -> AppResult<SavedModel> {
    let mut lines = Lines {
        it: s.lines().enumerate(),
    };
    let version = lines.expect(FORMAT_TAG)?;
    if version != format!("v{FORMAT_VERSION}") {
        return Err(AppError::invalid(STAGE, format!("unsupported model version '{version}'")));
    }
    let model = match lines.expect("type")? {
        "svm" => {
            let kernel: KernelConfig = serde_json::from_str(lines.expect("kernel")?)
                .map_err(|e| AppError::invalid(STAGE, format!("kernel: {e}")))?;
            let c = parse(lines.expect("c")?, "c")?;
            let bias = parse(lines.expect("bias")?, "bias")?;
            let converged = parse(lines.expect("converged")?, "converged")?;
            let iterations = parse(lines.expect("iterations")?, "iterations")?;
            let shape: Vec<usize> = lines
                .expect("shape")?
                .split_whitespace()
                .map(|t| parse(t, "shape"))
                .collect::<AppResult<_>>()?;
            let [n, dim] = shape[..] else {
                return Err(AppError::invalid(STAGE, "shape needs two values"));
            };
            let mut alphas = Vec::with_capacity(n);
            let mut labels = Vec::with_capacity(n);
            let mut features = Vec::with_capacity(n);
            for _ in 0..n {
                let rest = lines.expect("sv")?;
                let (l, rest) = rest.split_once(' ').unwrap_or((rest, ""));
                labels.push(
                    parse_label(l).ok_or_else(|| AppError::invalid(STAGE, format!("bad label '{l}'")))?,
                );
                let vals = parse_floats(rest, "support vector")?;
                if vals.len() != dim + 1 {
                    return Err(AppError::invalid(STAGE, "support vector width mismatch"));
                }
                alphas.push(vals[0]);
                features.push(vals[1..].to_vec());
            }
            let support_indices = (0..n).filter(|&i| alphas[i] > 0.0).collect();
            SavedModel::Svm(SvmModel {
                alphas,
                bias,
                labels,
                support_indices,
                kernel_config: kernel,
                training_features: features,
                c,
                converged,
                iterations,
            })
        }
        "reg" => {
            let basis = match lines.expect("basis")? {
                "affine" => BasisSpec::Affine,
                "poly2" => BasisSpec::Poly2,
                other => return Err(AppError::invalid(STAGE, format!("unknown basis '{other}'"))),
            };
            SavedModel::Reg(RegModel {
                basis,
                threshold: parse(lines.expect("threshold")?, "threshold")?,
                ridge: parse(lines.expect("ridge")?, "ridge")?,
                rank_deficient: parse(lines.expect("rank_deficient")?, "rank_deficient")?,
                coefficients: parse_floats(lines.expect("coefficients")?, "coefficient")?,
            })
        }
        other => return Err(AppError::invalid(STAGE, format!("unknown model type '{other}'"))),
    };
    lines.expect("end")?;
    Ok(model)
}

pub fn save_model(path: &Path, model: &SavedModel) -> AppResult<()> {
    let s = model_to_string(model)?;
    File::create(path)
        .and_then(|mut f| f.write_all(s.as_bytes()))
        .map_err(|e| AppError::io(STAGE, path, e))
}

pub fn load_model(path: &Path) -> AppResult<SavedModel> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| AppError::io(STAGE, path, e))?;
    model_from_str(&s)
}
