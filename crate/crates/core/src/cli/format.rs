//! JSON interchange format for channels and states.
//!
//! Complex numbers are `[re, im]` pairs (plain numbers are accepted as real
//! on input); matrices are row-major nested arrays.

use serde::{Deserialize, Serialize};

use crate::channels::{
    choi_of, cq_channel, dephasing, depolarizing, identity_channel, point_channel, qc_channel,
    Channel, ChoiMatrix, HolevoChannel, KrausChannel,
};
use crate::error::{Error, Result};
use crate::extremality::{tetrahedron_channel, trine_block_channel};
use crate::linalg::{basis_vector, c64, ComplexMatrix, ComplexVector, C64};
use crate::states::{validate_povm, DensityMatrix, PureState};

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "NumberRepr", into = "[f64; 2]")]
pub struct Cx(pub f64, pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum NumberRepr {
    Real(f64),
    Complex([f64; 2]),
}

impl From<NumberRepr> for Cx {
    fn from(n: NumberRepr) -> Self {
        match n {
            NumberRepr::Real(x) => Cx(x, 0.0),
            NumberRepr::Complex([re, im]) => Cx(re, im),
        }
    }
}

impl From<Cx> for [f64; 2] {
    fn from(c: Cx) -> Self {
        [c.0, c.1]
    }
}

impl From<C64> for Cx {
    fn from(z: C64) -> Self {
        Cx(z.re, z.im)
    }
}

pub type MatrixJson = Vec<Vec<Cx>>;
pub type VectorJson = Vec<Cx>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    m.to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(Cx::from).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = rows
        .iter()
        .map(|r| r.iter().map(|c| c64(c.0, c.1)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows)
}

pub fn vector_from_json(v: &VectorJson) -> ComplexVector {
    ComplexVector::from_iterator(v.len(), v.iter().map(|c| c64(c.0, c.1)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolevoPairJson {
    pub state: MatrixJson,
    pub effect: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ChannelSpec {
    Kraus {
        operators: Vec<MatrixJson>,
    },
    Holevo {
        pairs: Vec<HolevoPairJson>,
    },
    /// States prepared on measuring in `basis` (standard basis when absent).
    Cq {
        states: Vec<MatrixJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        basis: Option<Vec<VectorJson>>,
    },
    /// POVM outcomes recorded in `basis` (standard basis when absent).
    Qc {
        povm: Vec<MatrixJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        basis: Option<Vec<VectorJson>>,
    },
    Point {
        state: MatrixJson,
        dim_in: usize,
    },
    Builtin {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state: Option<MatrixJson>,
    },
    Choi {
        dim_in: usize,
        dim_out: usize,
        matrix: MatrixJson,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpecFile {
    #[serde(rename = "ebtkit-spec")]
    pub version: u32,
    #[serde(flatten)]
    pub channel: ChannelSpec,
}

/// Input state file: either a density `matrix` or a ket `vector`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<VectorJson>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn parse_spec(text: &str) -> Result<ChannelSpecFile> {
    let file: ChannelSpecFile = serde_json::from_str(text).map_err(parse_error)?;
    if file.version != SPEC_VERSION {
        return Err(Error::Parse {
            line: 0,
            column: 0,
            message: format!(
                "unsupported ebtkit-spec version {} (expected {SPEC_VERSION})",
                file.version
            ),
        });
    }
    Ok(file)
}

pub fn parse_state(text: &str) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(text).map_err(parse_error)?;
    match (&file.matrix, &file.vector) {
        (Some(m), None) => {
            DensityMatrix::new(matrix_from_json(m).map_err(|e| e.in_field("matrix"))?)
                .map_err(|e| e.in_field("matrix"))
        }
        (None, Some(v)) => Ok(DensityMatrix::pure(
            &PureState::normalized(vector_from_json(v)).map_err(|e| e.in_field("vector"))?,
        )),
        _ => Err(Error::Parse {
            line: 0,
            column: 0,
            message: "state file needs exactly one of 'matrix' or 'vector'".into(),
        }),
    }
}

/// Canonical text: two-space indentation with matrix rows on one line.
/// Stable under parse and re-serialization.
pub fn to_canonical_json(file: &ChannelSpecFile) -> String {
    let value = serde_json::to_value(file).expect("spec files serialize");
    let mut s = String::new();
    write_value(&mut s, &value, 0);
    s.push('\n');
    s
}

/// Arrays nested at most two deep without objects are written inline.
fn inline_depth(v: &serde_json::Value) -> Option<usize> {
    match v {
        serde_json::Value::Array(items) => {
            let inner = items
                .iter()
                .map(inline_depth)
                .try_fold(0, |acc, d| d.map(|d| acc.max(d)))?;
            (inner < 2).then_some(inner + 1)
        }
        serde_json::Value::Object(_) => None,
        _ => Some(0),
    }
}

fn write_value(s: &mut String, v: &serde_json::Value, indent: usize) {
    use serde_json::Value;
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Array(items) if items.is_empty() => s.push_str("[]"),
        Value::Array(items) if inline_depth(v).is_some() => {
            s.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write_value(s, item, indent);
            }
            s.push(']');
        }
        Value::Array(items) => {
            s.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                s.push_str(&pad(indent + 1));
                write_value(s, item, indent + 1);
                s.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            s.push_str(&pad(indent));
            s.push(']');
        }
        Value::Object(map) if map.is_empty() => s.push_str("{}"),
        Value::Object(map) => {
            s.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                s.push_str(&pad(indent + 1));
                s.push_str(&Value::String(k.clone()).to_string());
                s.push_str(": ");
                write_value(s, item, indent + 1);
                s.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            s.push_str(&pad(indent));
            s.push('}');
        }
        scalar => s.push_str(&scalar.to_string()),
    }
}

fn matrices(ms: &[MatrixJson], field: &str) -> Result<Vec<ComplexMatrix>> {
    ms.iter()
        .enumerate()
        .map(|(i, m)| matrix_from_json(m).map_err(|e| e.in_field(format!("{field}[{i}]"))))
        .collect()
}

fn densities(ms: &[MatrixJson], field: &str) -> Result<Vec<DensityMatrix>> {
    matrices(ms, field)?
        .into_iter()
        .enumerate()
        .map(|(i, m)| DensityMatrix::new(m).map_err(|e| e.in_field(format!("{field}[{i}]"))))
        .collect()
}

fn basis_states(basis: &Option<Vec<VectorJson>>, n: usize) -> Result<Vec<PureState>> {
    match basis {
        None => Ok((0..n)
            .map(|k| PureState::new(basis_vector(n, k)).expect("unit vector"))
            .collect()),
        Some(vs) => vs
            .iter()
            .enumerate()
            .map(|(i, v)| {
                PureState::new(vector_from_json(v)).map_err(|e| e.in_field(format!("basis[{i}]")))
            })
            .collect(),
    }
}

impl ChannelSpec {
    /// Builds and validates the channel.
    pub fn build(&self) -> Result<Channel> {
        match self {
            ChannelSpec::Kraus { operators } => {
                Ok(KrausChannel::new(matrices(operators, "operators")?)
                    .map_err(|e| e.in_field("operators"))?
                    .into())
            }
            ChannelSpec::Holevo { pairs } => {
                let mut built = Vec::with_capacity(pairs.len());
                for (i, p) in pairs.iter().enumerate() {
                    let state = matrix_from_json(&p.state)
                        .and_then(DensityMatrix::new)
                        .map_err(|e| e.in_field(format!("pairs[{i}].state")))?;
                    let effect = matrix_from_json(&p.effect)
                        .map_err(|e| e.in_field(format!("pairs[{i}].effect")))?;
                    built.push((state, effect));
                }
                Ok(HolevoChannel::new(built)
                    .map_err(|e| e.in_field("pairs"))?
                    .into())
            }
            ChannelSpec::Cq { states, basis } => {
                let states = densities(states, "states")?;
                let dim_in = basis
                    .as_ref()
                    .map_or(states.len(), |b| b.first().map_or(0, Vec::len));
                let basis = basis_states(basis, dim_in)?;
                Ok(cq_channel(states, &basis)
                    .map_err(|e| e.in_field("basis"))?
                    .into())
            }
            ChannelSpec::Qc { povm, basis } => {
                let povm =
                    validate_povm(matrices(povm, "povm")?).map_err(|e| e.in_field("povm"))?;
                let dim_out = basis
                    .as_ref()
                    .map_or(povm.len(), |b| b.first().map_or(0, Vec::len));
                let basis = basis_states(basis, dim_out)?;
                Ok(qc_channel(&povm, &basis)
                    .map_err(|e| e.in_field("basis"))?
                    .into())
            }
            ChannelSpec::Point { state, dim_in } => {
                let r = matrix_from_json(state)
                    .and_then(DensityMatrix::new)
                    .map_err(|e| e.in_field("state"))?;
                Ok(point_channel(r, *dim_in)
                    .map_err(|e| e.in_field("dim_in"))?
                    .into())
            }
            ChannelSpec::Builtin { name, state } => {
                let state = state
                    .as_ref()
                    .map(|s| matrix_from_json(s).and_then(DensityMatrix::new))
                    .transpose()
                    .map_err(|e| e.in_field("state"))?;
                builtin(name, state).map_err(|e| e.in_field("name"))
            }
            ChannelSpec::Choi {
                dim_in,
                dim_out,
                matrix,
            } => {
                let m = matrix_from_json(matrix).map_err(|e| e.in_field("matrix"))?;
                Ok(ChoiMatrix::new(m, *dim_in, *dim_out)
                    .map_err(|e| e.in_field("matrix"))?
                    .into())
            }
        }
    }

    /// Kraus, Holevo and Choi channels map to their own representation.
    pub fn from_channel(channel: &Channel) -> ChannelSpec {
        match channel {
            Channel::Kraus(k) => ChannelSpec::Kraus {
                operators: k.operators().iter().map(matrix_to_json).collect(),
            },
            Channel::Holevo(h) => ChannelSpec::Holevo {
                pairs: h
                    .pairs()
                    .iter()
                    .map(|p| HolevoPairJson {
                        state: matrix_to_json(p.state.matrix()),
                        effect: matrix_to_json(&p.effect),
                    })
                    .collect(),
            },
            Channel::Choi(c) => {
                let dims = c.dims();
                ChannelSpec::Choi {
                    dim_in: dims.dim_a,
                    dim_out: dims.dim_b,
                    matrix: matrix_to_json(c.matrix()),
                }
            }
        }
    }
}

impl ChannelSpecFile {
    pub fn new(channel: ChannelSpec) -> Self {
        ChannelSpecFile {
            version: SPEC_VERSION,
            channel,
        }
    }
}

/// Names accepted by [`builtin`], with parameter syntax.
pub const BUILTINS: &[(&str, &str)] = &[
    ("identity:d", "identity channel on C^d"),
    (
        "depolarizing:d:lambda",
        "rho -> lambda rho + (1 - lambda) I/d",
    ),
    (
        "dephasing:d",
        "complete dephasing in the standard basis of C^d",
    ),
    (
        "point[:d]",
        "constant channel onto the given state (default |0><0|, d = 2)",
    ),
    (
        "tetrahedron",
        "measure-and-prepare along four tetrahedron directions in C^3",
    ),
    (
        "trine4",
        "trine plus block projection on C^4, outcomes in the standard basis",
    ),
];

fn parse_param<T: std::str::FromStr>(name: &str, value: Option<&str>, what: &str) -> Result<T> {
    value
        .ok_or_else(|| Error::InvalidParameter(format!("builtin '{name}' needs {what}")))?
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("builtin '{name}': cannot parse {what}")))
}

/// Looks up a builtin channel such as `depolarizing:2:0.5`.
pub fn builtin(name: &str, state: Option<DensityMatrix>) -> Result<Channel> {
    let mut parts = name.split(':');
    let head = parts.next().unwrap_or_default();
    let (p1, p2) = (parts.next(), parts.next());
    if parts.next().is_some() {
        return Err(Error::InvalidParameter(format!(
            "too many parameters in builtin '{name}'"
        )));
    }
    let dim = |p: Option<&str>| -> Result<usize> {
        let d: usize = parse_param(name, p, "a dimension")?;
        if d == 0 {
            return Err(Error::InvalidDimension(format!(
                "builtin '{name}' needs d >= 1"
            )));
        }
        Ok(d)
    };
    let no_more = |p: Option<&str>| -> Result<()> {
        match p {
            None => Ok(()),
            Some(_) => Err(Error::InvalidParameter(format!(
                "builtin '{name}' takes fewer parameters"
            ))),
        }
    };
    match head {
        "identity" => {
            no_more(p2)?;
            Ok(identity_channel(dim(p1)?).into())
        }
        "depolarizing" => {
            let d = dim(p1)?;
            let lambda: f64 = parse_param(name, p2, "lambda")?;
            Ok(depolarizing(d, lambda)?.into())
        }
        "dephasing" => {
            no_more(p2)?;
            Ok(dephasing(dim(p1)?)?.into())
        }
        "point" => {
            no_more(p2)?;
            let r = match (state, p1) {
                (Some(r), _) => r,
                (None, p) => {
                    let d = if p.is_some() { dim(p)? } else { 2 };
                    DensityMatrix::pure(&PureState::new(basis_vector(d, 0))?)
                }
            };
            let d_in = if p1.is_some() { dim(p1)? } else { r.dim() };
            Ok(point_channel(r, d_in)?.into())
        }
        "tetrahedron" => {
            no_more(p1)?;
            Ok(tetrahedron_channel().into())
        }
        "trine4" => {
            no_more(p1)?;
            Ok(trine_block_channel().into())
        }
        _ => Err(Error::InvalidParameter(format!("unknown builtin '{name}'"))),
    }
}

/// Serializes the Choi matrix of any channel.
pub fn choi_spec(channel: &Channel) -> ChannelSpec {
    ChannelSpec::from_channel(&Channel::Choi(choi_of(channel)))
}
