//! Operator-model envelope around the densenet block format: a variant tag,
//! p, the variable list, the Pre-Net layout, input scalers, and (for SVD
//! assemblies) the training-time preprocessing vectors.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};
use nn_core::{format_f64, read_densenet, write_densenet, LineReader, MinMaxScaler};
use svd_core::Preprocessing;

use crate::error::{OperatorError, Result};
use crate::flex::{FlexDeepONet, FlexVar};
use crate::prenet::PreNet;
use crate::scaling::{InputScaling, UniformScaler};
use crate::svd_onet::{SvdAssembly, SvdGroup, SvdVar};
use crate::vanilla::{VanillaDeepONet, VanillaVar};

pub const OPERATOR_FORMAT_VERSION: u32 = 1;

/// A trained surrogate of any of the four architectures.
#[derive(Debug, Clone)]
pub enum OperatorModel {
    Vanilla(VanillaDeepONet),
    /// Vanilla-shaped model produced by the frozen-trunk paradigm.
    Pod(VanillaDeepONet),
    Svd(SvdAssembly),
    Flex(FlexDeepONet),
}

impl OperatorModel {
    pub fn variant(&self) -> &'static str {
        match self {
            OperatorModel::Vanilla(_) => "vanilla",
            OperatorModel::Pod(_) => "pod",
            OperatorModel::Svd(_) => "svd",
            OperatorModel::Flex(_) => "flex",
        }
    }

    pub fn p(&self) -> usize {
        match self {
            OperatorModel::Vanilla(m) | OperatorModel::Pod(m) => m.p(),
            OperatorModel::Svd(m) => m.p(),
            OperatorModel::Flex(m) => m.p(),
        }
    }

    pub fn variables(&self) -> Vec<String> {
        match self {
            OperatorModel::Vanilla(m) | OperatorModel::Pod(m) => {
                m.variables().iter().map(|s| s.to_string()).collect()
            }
            OperatorModel::Svd(m) => m.variables().iter().map(|s| s.to_string()).collect(),
            OperatorModel::Flex(m) => m.variables().iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            OperatorModel::Vanilla(m) | OperatorModel::Pod(m) => m.param_count(),
            OperatorModel::Svd(m) => m.param_count(),
            OperatorModel::Flex(m) => m.param_count(),
        }
    }

    pub fn predict_batch(&self, u: &Array2<f64>, y: &Array2<f64>) -> Result<Array2<f64>> {
        match self {
            OperatorModel::Vanilla(m) | OperatorModel::Pod(m) => m.forward_batch(u, y),
            OperatorModel::Svd(m) => m.forward_batch(u, y),
            OperatorModel::Flex(m) => m.forward_batch(u, y),
        }
    }
}

fn write_scaling(out: &mut String, s: &InputScaling) {
    match &s.u {
        Some(m) => {
            let (min, max) = m.bounds();
            let _ = writeln!(out, "u-scaler minmax {}", min.len());
            let _ = writeln!(out, "{}", join(min.iter()));
            let _ = writeln!(out, "{}", join(max.iter()));
        }
        None => {
            let _ = writeln!(out, "u-scaler none");
        }
    }
    match &s.y {
        Some(u) => {
            let _ = writeln!(out, "y-scaler uniform {} {}", u.offsets().len(), format_f64(u.scale()));
            let _ = writeln!(out, "{}", join(u.offsets().iter()));
        }
        None => {
            let _ = writeln!(out, "y-scaler none");
        }
    }
}

fn join<'a>(vals: impl Iterator<Item = &'a f64>) -> String {
    vals.map(|&v| format_f64(v)).collect::<Vec<_>>().join(" ")
}

fn read_vector(r: &mut LineReader, expected: usize) -> Result<Vec<f64>> {
    let line = r.next_line().map_err(OperatorError::Nn)?;
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| r.parse_f64(t))
        .collect::<nn_core::Result<_>>()
        .map_err(OperatorError::Nn)?;
    if vals.len() != expected {
        return Err(OperatorError::ParseError {
            line: r.line,
            message: format!("expected {expected} values, found {}", vals.len()),
        });
    }
    Ok(vals)
}

fn read_scaling(r: &mut LineReader) -> Result<InputScaling> {
    let fields = r.tagged("u-scaler").map_err(OperatorError::Nn)?;
    let u = match fields.first() {
        Some(&"none") => None,
        Some(&"minmax") => {
            let d = r
                .parse_usize(fields.get(1).ok_or_else(|| parse_err(r, "missing width"))?)
                .map_err(OperatorError::Nn)?;
            let min = read_vector(r, d)?;
            let max = read_vector(r, d)?;
            Some(
                MinMaxScaler::from_bounds(Array1::from_vec(min), Array1::from_vec(max))
                    .map_err(OperatorError::Nn)?,
            )
        }
        other => return Err(parse_err(r, &format!("unknown u-scaler {other:?}"))),
    };
    let fields = r.tagged("y-scaler").map_err(OperatorError::Nn)?;
    let y = match fields.first() {
        Some(&"none") => None,
        Some(&"uniform") => {
            let d = r
                .parse_usize(fields.get(1).ok_or_else(|| parse_err(r, "missing width"))?)
                .map_err(OperatorError::Nn)?;
            let scale = r
                .parse_f64(fields.get(2).ok_or_else(|| parse_err(r, "missing scale"))?)
                .map_err(OperatorError::Nn)?;
            let offsets = read_vector(r, d)?;
            Some(UniformScaler::new(offsets, scale)?)
        }
        other => return Err(parse_err(r, &format!("unknown y-scaler {other:?}"))),
    };
    Ok(InputScaling { u, y })
}

fn parse_err(r: &LineReader, message: &str) -> OperatorError {
    OperatorError::ParseError { line: r.line, message: message.into() }
}

pub fn model_to_string(model: &OperatorModel) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "operator-model {OPERATOR_FORMAT_VERSION}");
    let _ = writeln!(out, "variant {}", model.variant());
    let _ = writeln!(out, "p {}", model.p());
    for name in model.variables() {
        if name.chars().any(char::is_whitespace) || name.is_empty() {
            return Err(OperatorError::InvalidSpec(format!("unencodable variable name '{name}'")));
        }
    }
    match model {
        OperatorModel::Vanilla(m) | OperatorModel::Pod(m) => {
            write_scaling(&mut out, m.scaling());
            let _ = writeln!(out, "variables {} {}", m.vars().len(), model.variables().join(" "));
            for v in m.vars() {
                let _ = writeln!(out, "var {}", v.name);
                let _ = writeln!(out, "bias {}", format_f64(v.bias));
                write_densenet(&mut out, &v.branch);
                write_densenet(&mut out, &v.trunk);
            }
        }
        OperatorModel::Svd(m) => {
            write_scaling(&mut out, m.scaling());
            let _ = writeln!(out, "groups {}", m.groups().len());
            for g in m.groups() {
                let names: Vec<&str> = g.members.iter().map(|v| v.name.as_str()).collect();
                let _ = writeln!(out, "group {} {}", g.members.len(), names.join(" "));
                let _ = writeln!(out, "prep {}", g.preprocessing.centering().len());
                let _ = writeln!(out, "{}", join(g.preprocessing.centering().iter()));
                let _ = writeln!(out, "{}", join(g.preprocessing.scaling().iter()));
                write_densenet(&mut out, &g.trunk);
                for member in &g.members {
                    let _ = writeln!(out, "member {}", member.name);
                    write_densenet(&mut out, &member.branch);
                }
            }
        }
        OperatorModel::Flex(m) => {
            write_scaling(&mut out, m.scaling());
            let pn = m.prenet();
            let _ = writeln!(out, "n-y {}", pn.n_y());
            let _ = writeln!(out, "stretch-per-variable {}", u8::from(pn.stretch_per_variable()));
            for (tag, net) in
                [("rotation", &pn.rotation), ("stretch", &pn.stretch), ("shift", &pn.shift)]
            {
                match net {
                    Some(n) => {
                        let _ = writeln!(out, "{tag} 1");
                        write_densenet(&mut out, n);
                    }
                    None => {
                        let _ = writeln!(out, "{tag} 0");
                    }
                }
            }
            let _ = writeln!(out, "variables {} {}", m.vars().len(), model.variables().join(" "));
            for v in m.vars() {
                let _ = writeln!(out, "var {}", v.name);
                write_densenet(&mut out, &v.trunk);
                write_densenet(&mut out, &v.branch);
            }
        }
    }
    Ok(out)
}

pub fn model_from_str(text: &str) -> Result<OperatorModel> {
    let r = &mut LineReader::new(text);
    let fields = r.tagged("operator-model").map_err(OperatorError::Nn)?;
    let version = fields
        .first()
        .map(|t| r.parse_usize(t))
        .transpose()
        .map_err(OperatorError::Nn)?
        .unwrap_or(0);
    if version != OPERATOR_FORMAT_VERSION as usize {
        return Err(parse_err(r, &format!("unsupported operator format version {version}")));
    }
    let variant = r
        .tagged("variant")
        .map_err(OperatorError::Nn)?
        .first()
        .map(|s| s.to_string())
        .ok_or_else(|| parse_err(r, "missing variant"))?;
    let p_fields = r.tagged("p").map_err(OperatorError::Nn)?;
    let p = r
        .parse_usize(p_fields.first().ok_or_else(|| parse_err(r, "missing p"))?)
        .map_err(OperatorError::Nn)?;
    let scaling = read_scaling(r)?;

    match variant.as_str() {
        "vanilla" | "pod" => {
            let fields = r.tagged("variables").map_err(OperatorError::Nn)?;
            let count = r
                .parse_usize(fields.first().ok_or_else(|| parse_err(r, "missing count"))?)
                .map_err(OperatorError::Nn)?;
            let mut vars = Vec::with_capacity(count);
            for _ in 0..count {
                let vf = r.tagged("var").map_err(OperatorError::Nn)?;
                let name =
                    vf.first().ok_or_else(|| parse_err(r, "missing var name"))?.to_string();
                let bf = r.tagged("bias").map_err(OperatorError::Nn)?;
                let bias = r
                    .parse_f64(bf.first().ok_or_else(|| parse_err(r, "missing bias"))?)
                    .map_err(OperatorError::Nn)?;
                let branch = read_densenet(r).map_err(OperatorError::Nn)?;
                let trunk = read_densenet(r).map_err(OperatorError::Nn)?;
                vars.push(VanillaVar { name, branch, trunk, bias });
            }
            let model = VanillaDeepONet::new(vars, p, scaling)?;
            Ok(if variant == "pod" {
                OperatorModel::Pod(model)
            } else {
                OperatorModel::Vanilla(model)
            })
        }
        "svd" => {
            let gf = r.tagged("groups").map_err(OperatorError::Nn)?;
            let n_groups = r
                .parse_usize(gf.first().ok_or_else(|| parse_err(r, "missing group count"))?)
                .map_err(OperatorError::Nn)?;
            let mut groups = Vec::with_capacity(n_groups);
            for _ in 0..n_groups {
                let fields = r.tagged("group").map_err(OperatorError::Nn)?;
                let n_members = r
                    .parse_usize(fields.first().ok_or_else(|| parse_err(r, "missing member count"))?)
                    .map_err(OperatorError::Nn)?;
                let pf = r.tagged("prep").map_err(OperatorError::Nn)?;
                let len = r
                    .parse_usize(pf.first().ok_or_else(|| parse_err(r, "missing prep length"))?)
                    .map_err(OperatorError::Nn)?;
                let c = read_vector(r, len)?;
                let d = read_vector(r, len)?;
                let preprocessing =
                    Preprocessing::from_vectors(Array1::from_vec(c), Array1::from_vec(d))?;
                let trunk = read_densenet(r).map_err(OperatorError::Nn)?;
                let mut members = Vec::with_capacity(n_members);
                for _ in 0..n_members {
                    let mf = r.tagged("member").map_err(OperatorError::Nn)?;
                    let name =
                        mf.first().ok_or_else(|| parse_err(r, "missing member name"))?.to_string();
                    let branch = read_densenet(r).map_err(OperatorError::Nn)?;
                    members.push(SvdVar { name, branch });
                }
                groups.push(SvdGroup { trunk, members, preprocessing });
            }
            Ok(OperatorModel::Svd(SvdAssembly { groups, p, scaling }))
        }
        "flex" => {
            let nf = r.tagged("n-y").map_err(OperatorError::Nn)?;
            let n_y = r
                .parse_usize(nf.first().ok_or_else(|| parse_err(r, "missing n-y"))?)
                .map_err(OperatorError::Nn)?;
            let sf = r.tagged("stretch-per-variable").map_err(OperatorError::Nn)?;
            let spv = matches!(sf.first(), Some(&"1"));
            let mut blocks = [None, None, None];
            for (slot, tag) in ["rotation", "stretch", "shift"].iter().enumerate() {
                let f = r.tagged(tag).map_err(OperatorError::Nn)?;
                if matches!(f.first(), Some(&"1")) {
                    blocks[slot] = Some(read_densenet(r).map_err(OperatorError::Nn)?);
                }
            }
            let [rotation, stretch, shift] = blocks;
            let prenet = PreNet { rotation, stretch, shift, stretch_per_variable: spv, n_y };
            let fields = r.tagged("variables").map_err(OperatorError::Nn)?;
            let count = r
                .parse_usize(fields.first().ok_or_else(|| parse_err(r, "missing count"))?)
                .map_err(OperatorError::Nn)?;
            let mut vars = Vec::with_capacity(count);
            for _ in 0..count {
                let vf = r.tagged("var").map_err(OperatorError::Nn)?;
                let name =
                    vf.first().ok_or_else(|| parse_err(r, "missing var name"))?.to_string();
                let trunk = read_densenet(r).map_err(OperatorError::Nn)?;
                let branch = read_densenet(r).map_err(OperatorError::Nn)?;
                vars.push(FlexVar { name, trunk, branch });
            }
            Ok(OperatorModel::Flex(FlexDeepONet::new(prenet, vars, p, scaling)?))
        }
        other => Err(parse_err(r, &format!("unknown variant '{other}'"))),
    }
}

pub fn save_model(path: &Path, model: &OperatorModel) -> Result<()> {
    std::fs::write(path, model_to_string(model)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<OperatorModel> {
    let text = std::fs::read_to_string(path)?;
    model_from_str(&text)
}
