//! JSON material files and CSV sampling.
//!
//! ```json
//! {"kind": "relaxation", "dimension": "scalar", "dirac": 0, "equilibrium": 1,
//!  "modes": [{"rate": 1, "weight": 1}]}
//! ```
//!
//! Creep documents carry `instantaneous` and `fluidity` instead of `dirac`
//! and `equilibrium`. Matrix coefficients are 6×6 row-major arrays in Voigt
//! order. A relaxation kernel with no continuous part must say
//! `"pure_newtonian": true`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::eigenstress::EigenstressBasis;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::matrix6::Matrix6;
use crate::verify::{KernelKind, RawAny, RawKernel};

/// Largest asymmetry accepted in a matrix, relative to its largest entry.
pub const TOL_SYMMETRY: f64 = 1e-12;

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum Coef {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeDoc {
    rate: f64,
    weight: Coef,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    kind: String,
    dimension: String,
    dirac: Option<Coef>,
    equilibrium: Option<Coef>,
    instantaneous: Option<Coef>,
    fluidity: Option<Coef>,
    #[serde(default)]
    pure_newtonian: bool,
    #[serde(default)]
    modes: Vec<ModeDoc>,
    #[serde(default)]
    metadata: Metadata,
}

/// A parsed material file.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialDocument {
    pub kernel: Kernel,
    pub metadata: Metadata,
    /// Non-fatal findings, e.g. modes merged during canonicalization.
    pub warnings: Vec<String>,
}

trait FromCoef: Sized + Copy {
    fn from_coef(c: &Coef, what: &str) -> Result<Self>;
    fn zero() -> Self;
}

impl FromCoef for f64 {
    fn from_coef(c: &Coef, what: &str) -> Result<Self> {
        match c {
            Coef::Scalar(x) => Ok(*x),
            Coef::Matrix(_) => Err(schema(format!("{what} must be a number for dimension \"scalar\""))),
        }
    }
    fn zero() -> Self {
        0.0
    }
}

impl FromCoef for Matrix6 {
    fn from_coef(c: &Coef, what: &str) -> Result<Self> {
        let rows = match c {
            Coef::Matrix(rows) => rows,
            Coef::Scalar(_) => return Err(schema(format!("{what} must be a 6x6 array for dimension \"matrix6\""))),
        };
        if rows.len() != 6 || rows.iter().any(|r| r.len() != 6) {
            return Err(schema(format!("{what} must be a 6x6 array")));
        }
        let mut a = [[0.0; 6]; 6];
        for i in 0..6 {
            a[i].copy_from_slice(&rows[i]);
        }
        Matrix6::from_rows(&a, TOL_SYMMETRY).map_err(|e| schema(format!("{what}: {e}")))
    }
    fn zero() -> Self {
        Matrix6::zeros()
    }
}

fn field<T: FromCoef>(c: &Option<Coef>, what: &str, required: bool) -> Result<T> {
    match c {
        Some(c) => T::from_coef(c, what),
        None if required => Err(schema(format!("missing field \"{what}\""))),
        None => Ok(T::zero()),
    }
}

fn raw_from_doc<T: FromCoef>(doc: &Doc, kind: KernelKind) -> Result<RawKernel<T>> {
    let modes = doc
        .modes
        .iter()
        .enumerate()
        .map(|(i, m)| Ok((m.rate, T::from_coef(&m.weight, &format!("modes[{i}].weight"))?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(match kind {
        KernelKind::Relaxation => {
            if doc.instantaneous.is_some() || doc.fluidity.is_some() {
                return Err(schema("relaxation documents take \"dirac\" and \"equilibrium\", not creep fields"));
            }
            RawKernel {
                kind,
                newtonian: field(&doc.dirac, "dirac", false)?,
                constant: field(&doc.equilibrium, "equilibrium", !doc.pure_newtonian)?,
                fluidity: T::zero(),
                modes,
            }
        }
        KernelKind::Creep => {
            if doc.dirac.is_some() || doc.equilibrium.is_some() || doc.pure_newtonian {
                return Err(schema("creep documents take \"instantaneous\" and \"fluidity\", not relaxation fields"));
            }
            RawKernel {
                kind,
                newtonian: T::zero(),
                constant: field(&doc.instantaneous, "instantaneous", true)?,
                fluidity: field(&doc.fluidity, "fluidity", false)?,
                modes,
            }
        }
    })
}

fn parse_doc(text: &str) -> Result<Doc> {
    serde_json::from_str(text).map_err(|e| schema(e.to_string()))
}

fn doc_kind(doc: &Doc) -> Result<KernelKind> {
    match doc.kind.as_str() {
        "relaxation" => Ok(KernelKind::Relaxation),
        "creep" => Ok(KernelKind::Creep),
        other => Err(schema(format!("kind must be \"relaxation\" or \"creep\" (got \"{other}\")"))),
    }
}

fn raw_of(doc: &Doc) -> Result<RawAny> {
    let kind = doc_kind(doc)?;
    match doc.dimension.as_str() {
        "scalar" => Ok(RawAny::Scalar(raw_from_doc(doc, kind)?)),
        "matrix6" => Ok(RawAny::Matrix(raw_from_doc(doc, kind)?)),
        other => Err(schema(format!("dimension must be \"scalar\" or \"matrix6\" (got \"{other}\")"))),
    }
}

/// Schema-checked but unvalidated kernel data, for well-formedness reports.
pub fn parse_raw(text: &str) -> Result<RawAny> {
    raw_of(&parse_doc(text)?)
}

/// Parses and validates a material file.
pub fn parse_document(text: &str) -> Result<MaterialDocument> {
    let doc = parse_doc(text)?;
    let raw = raw_of(&doc)?;
    let kernel = raw.to_kernel()?;
    if let Kernel::ScalarRelaxation(k) = &kernel {
        if k.is_pure_newtonian() != doc.pure_newtonian {
            return Err(pure_newtonian_mismatch(doc.pure_newtonian));
        }
    }
    if let Kernel::MatrixRelaxation(k) = &kernel {
        if k.is_pure_newtonian() != doc.pure_newtonian {
            return Err(pure_newtonian_mismatch(doc.pure_newtonian));
        }
    }
    let stats = kernel.canonicalize_stats();
    let mut warnings = Vec::new();
    if stats.merged > 0 {
        warnings.push(format!("{} mode(s) merged into a neighbour with a coincident rate", stats.merged));
    }
    if stats.dropped > 0 {
        warnings.push(format!("{} mode(s) with negligible weight dropped", stats.dropped));
    }
    Ok(MaterialDocument { kernel, metadata: doc.metadata, warnings })
}

fn pure_newtonian_mismatch(flagged: bool) -> Error {
    if flagged {
        Error::Invalid("\"pure_newtonian\" is set but the kernel has a continuous part".into())
    } else {
        Error::Invalid(
            "relaxation kernel has no continuous part; set \"pure_newtonian\": true for a dashpot".into(),
        )
    }
}

pub fn parse_material(text: &str) -> Result<Kernel> {
    Ok(parse_document(text)?.kernel)
}

/// 17 significant digits; `-0` is written as `0`.
pub fn format_number(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn write_matrix(out: &mut String, m: &Matrix6, indent: &str) {
    out.push('[');
    for (i, row) in m.to_rows().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "\n{indent}  [");
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            out.push_str(&format_number(*x));
        }
        out.push(']');
    }
    let _ = write!(out, "\n{indent}]");
}

trait Emit {
    fn emit(&self, out: &mut String, indent: &str);
}

impl Emit for f64 {
    fn emit(&self, out: &mut String, _: &str) {
        out.push_str(&format_number(*self));
    }
}

impl Emit for Matrix6 {
    fn emit(&self, out: &mut String, indent: &str) {
        write_matrix(out, self, indent);
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

fn emit_kernel<T: Emit>(
    out: &mut String,
    kind: &str,
    dimension: &str,
    fields: [(&str, T); 2],
    pure_newtonian: bool,
    modes: &[(f64, T)],
) {
    let _ = write!(out, "{{\n  \"kind\": \"{kind}\",\n  \"dimension\": \"{dimension}\"");
    for (name, value) in fields {
        let _ = write!(out, ",\n  \"{name}\": ");
        value.emit(out, "  ");
    }
    if pure_newtonian {
        out.push_str(",\n  \"pure_newtonian\": true");
    }
    out.push_str(",\n  \"modes\": [");
    for (i, (rate, w)) in modes.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "\n    {{\"rate\": {}, \"weight\": ", format_number(*rate));
        w.emit(out, "    ");
        out.push('}');
    }
    if !modes.is_empty() {
        out.push_str("\n  ");
    }
    out.push(']');
}

/// Canonical text: fixed key order, modes sorted by rate, 17 significant
/// digits, LF line endings, trailing newline.
pub fn serialize_document(doc: &MaterialDocument) -> String {
    let mut out = String::new();
    match &doc.kernel {
        Kernel::ScalarRelaxation(k) => emit_kernel(
            &mut out,
            "relaxation",
            "scalar",
            [("dirac", k.newtonian()), ("equilibrium", k.equilibrium())],
            k.is_pure_newtonian(),
            &k.modes().iter().map(|m| (m.rate, m.weight)).collect::<Vec<_>>(),
        ),
        Kernel::ScalarCreep(c) => emit_kernel(
            &mut out,
            "creep",
            "scalar",
            [("instantaneous", c.instantaneous()), ("fluidity", c.fluidity())],
            false,
            &c.modes().iter().map(|m| (m.rate, m.weight)).collect::<Vec<_>>(),
        ),
        Kernel::MatrixRelaxation(k) => emit_kernel(
            &mut out,
            "relaxation",
            "matrix6",
            [("dirac", k.newtonian()), ("equilibrium", k.equilibrium())],
            k.is_pure_newtonian(),
            &k.modes().iter().map(|m| (m.rate, m.weight)).collect::<Vec<_>>(),
        ),
        Kernel::MatrixCreep(c) => emit_kernel(
            &mut out,
            "creep",
            "matrix6",
            [("instantaneous", c.instantaneous()), ("fluidity", c.fluidity())],
            false,
            &c.modes().iter().map(|m| (m.rate, m.weight)).collect::<Vec<_>>(),
        ),
    }
    let meta = &doc.metadata;
    if meta.name.is_some() || meta.units.is_some() {
        out.push_str(",\n  \"metadata\": {");
        let mut parts = Vec::new();
        if let Some(n) = &meta.name {
            parts.push(format!("\"name\": {}", json_string(n)));
        }
        if let Some(u) = &meta.units {
            parts.push(format!("\"units\": {}", json_string(u)));
        }
        out.push_str(&parts.join(", "));
        out.push('}');
    }
    out.push_str("\n}\n");
    out
}

pub fn serialize_material(kernel: &Kernel) -> String {
    serialize_document(&MaterialDocument { kernel: kernel.clone(), metadata: Metadata::default(), warnings: Vec::new() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

pub fn sample_times(t_start: f64, t_end: f64, count: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::Invalid("count must be at least 2".into()));
    }
    if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
        return Err(Error::Invalid(format!("invalid range [{t_start}, {t_end}]")));
    }
    let n = (count - 1) as f64;
    Ok(match spacing {
        Spacing::Linear => {
            if t_start < 0.0 {
                return Err(Error::Invalid("linear sampling needs t_start >= 0".into()));
            }
            (0..count)
                .map(|i| if i + 1 == count { t_end } else { t_start + (t_end - t_start) * i as f64 / n })
                .collect()
        }
        Spacing::Log => {
            if t_start <= 0.0 {
                return Err(Error::Invalid("log sampling needs t_start > 0".into()));
            }
            let ratio = (t_end / t_start).ln();
            (0..count)
                .map(|i| if i + 1 == count { t_end } else { t_start * (ratio * i as f64 / n).exp() })
                .collect()
        }
    })
}

/// Upper-triangle column names `v11, v12, …, v66`.
pub fn upper_headers() -> Vec<String> {
    let mut h = Vec::with_capacity(21);
    for i in 0..6 {
        for j in i..6 {
            h.push(format!("v{}{}", i + 1, j + 1));
        }
    }
    h
}

/// Kernel values on a grid as CSV. Relaxation kernels report the
/// continuous part, with `F(0⁺)` at `t = 0`.
pub fn sample_to_csv(kernel: &Kernel, t_start: f64, t_end: f64, count: usize, spacing: Spacing) -> Result<String> {
    let times = sample_times(t_start, t_end, count, spacing)?;
    let mut out = String::new();
    if kernel.is_matrix() {
        out.push_str("t,");
        out.push_str(&upper_headers().join(","));
        out.push('\n');
    } else {
        out.push_str("t,value\n");
    }
    for &t in &times {
        out.push_str(&format_number(t));
        match kernel {
            Kernel::ScalarRelaxation(k) => {
                let _ = write!(out, ",{}", format_number(k.eval_continuous(t)));
            }
            Kernel::ScalarCreep(c) => {
                let _ = write!(out, ",{}", format_number(c.eval(t)?));
            }
            Kernel::MatrixRelaxation(k) => write_upper(&mut out, &k.eval_continuous(t)),
            Kernel::MatrixCreep(c) => write_upper(&mut out, &c.eval(t)?),
        }
        out.push('\n');
    }
    Ok(out)
}

fn write_upper(out: &mut String, m: &Matrix6) {
    for x in m.upper() {
        out.push(',');
        out.push_str(&format_number(*x));
    }
}

/// Parses an eigenstress basis file:
/// `{"mass": m, "directions": [{"direction": [6], "modes": [{"rate", "lambda"}]}],
///   "equilibrium": 6x6 (optional)}`.
pub fn parse_eigenstress(text: &str) -> Result<(EigenstressBasis, Matrix6)> {
    #[derive(Deserialize)]
    struct File {
        #[serde(flatten)]
        basis: EigenstressBasis,
        equilibrium: Option<Vec<Vec<f64>>>,
    }
    let f: File = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    let eq = match &f.equilibrium {
        Some(rows) => Matrix6::from_coef(&Coef::Matrix(rows.clone()), "equilibrium")?,
        None => Matrix6::zeros(),
    };
    Ok((f.basis, eq))
}
