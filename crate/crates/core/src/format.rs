//! The JSON system-file schema.
//!
//! A system file stores one relay system: ambient dimension, the local
//! systems with their subspace bases (as column lists), operators (row-major
//! matrices) and nested measure atoms, plus an optional `transforms` section
//! carrying the operators consumed by the dual and transform commands.
//! Numbers are decimal doubles; serialization uses the shortest
//! representation that round-trips exactly, so a save/load cycle reproduces
//! every float bitwise.
//!
//! Non-orthonormal bases in input files are accepted: they are treated as
//! spanning sets and orthonormalized at load, with a notice recorded for the
//! caller to surface.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::measure::MeasureAtom;
use crate::model::{InnerAtom, LocalSystem, RelaySystem, Subspace, BASIS_ORTHO_TOL};
use crate::numerics::{DenseMatrix, Vector, ORTHO_DROP_TOL};

/// Current schema version string.
pub const SCHEMA_VERSION: &str = "1";

/// Top-level system file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    pub schema_version: String,
    /// Scalar field; only `"real"` is supported.
    pub field: String,
    pub ambient_dim: usize,
    pub locals: Vec<LocalEntry>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub transforms: Option<TransformsEntry>,
}

/// One outer atom with its subspace, operator and inner family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalEntry {
    pub id: String,
    pub mu: f64,
    /// Basis (or raw spanning set) of `W` as a list of columns.
    #[serde(rename = "W_basis")]
    pub w_basis: Vec<Vec<f64>>,
    /// Dimension of the local space `K`.
    #[serde(rename = "K_dim")]
    pub k_dim: usize,
    /// Operator `Lambda` as rows (`K_dim` rows of `ambient_dim` entries).
    #[serde(rename = "Lambda")]
    pub lambda: Vec<Vec<f64>>,
    pub inner: Vec<InnerEntry>,
}

/// One inner atom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InnerEntry {
    pub id: String,
    pub mu: f64,
    pub alpha: f64,
    /// Basis (or raw spanning set) of `V` as a list of columns.
    #[serde(rename = "V_basis")]
    pub v_basis: Vec<Vec<f64>>,
    /// Per-atom operator override as rows; written by dual constructions
    /// whose operators depend on the inner index.
    #[serde(rename = "Lambda", skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<Vec<Vec<f64>>>,
}

/// Optional transform operators consumed by dual/transform commands.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TransformsEntry {
    /// Ambient invertible operator as rows.
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none", default)]
    pub q: Option<Vec<Vec<f64>>>,
    /// Per-local invertible operators on the local spaces, keyed by local id.
    #[serde(rename = "Q_locals", skip_serializing_if = "Option::is_none", default)]
    pub q_locals: Option<BTreeMap<String, Vec<Vec<f64>>>>,
    /// Per-local SPD operators, keyed by local id.
    #[serde(rename = "G_locals", skip_serializing_if = "Option::is_none", default)]
    pub g_locals: Option<BTreeMap<String, Vec<Vec<f64>>>>,
    /// Per-local spanning families (lists of vectors), keyed by local id.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub local_frames: Option<BTreeMap<String, Vec<Vec<f64>>>>,
}

/// Parsed transform operators, aligned with a system on demand.
#[derive(Debug, Clone, Default)]
pub struct SystemTransforms {
    pub q: Option<DenseMatrix>,
    pub q_locals: Option<BTreeMap<String, DenseMatrix>>,
    pub g_locals: Option<BTreeMap<String, DenseMatrix>>,
    pub local_frames: Option<BTreeMap<String, Vec<Vector>>>,
}

impl SystemTransforms {
    fn per_local<'a, T>(
        map: &'a Option<BTreeMap<String, T>>,
        sys: &RelaySystem,
        what: &str,
    ) -> Result<Vec<&'a T>> {
        let map = map.as_ref().ok_or_else(|| {
            FrameError::MissingTransforms(format!("no {what} section in system file"))
        })?;
        sys.locals
            .iter()
            .map(|l| {
                map.get(&l.atom.id).ok_or_else(|| {
                    FrameError::MissingTransforms(format!("{what} entry for local '{}'", l.atom.id))
                })
            })
            .collect()
    }

    /// Ambient transform, required.
    pub fn ambient_q(&self) -> Result<&DenseMatrix> {
        self.q
            .as_ref()
            .ok_or_else(|| FrameError::MissingTransforms("no Q in system file".into()))
    }

    /// Per-local invertible transforms in system order.
    pub fn q_locals_for(&self, sys: &RelaySystem) -> Result<Vec<DenseMatrix>> {
        Ok(Self::per_local(&self.q_locals, sys, "Q_locals")?
            .into_iter()
            .cloned()
            .collect())
    }

    /// Per-local SPD transforms in system order.
    pub fn g_locals_for(&self, sys: &RelaySystem) -> Result<Vec<DenseMatrix>> {
        Ok(Self::per_local(&self.g_locals, sys, "G_locals")?
            .into_iter()
            .cloned()
            .collect())
    }

    /// Per-local spanning families in system order.
    pub fn local_frames_for(&self, sys: &RelaySystem) -> Result<Vec<Vec<Vector>>> {
        Ok(Self::per_local(&self.local_frames, sys, "local_frames")?
            .into_iter()
            .cloned()
            .collect())
    }
}

/// A system parsed from a file, with any load-time notices.
#[derive(Debug, Clone)]
pub struct LoadedSystem {
    pub system: RelaySystem,
    pub transforms: Option<SystemTransforms>,
    /// Human-readable notes, e.g. bases that had to be orthonormalized.
    pub notices: Vec<String>,
}

impl SystemFile {
    /// Parse JSON text, checking schema version and scalar field.
    pub fn parse(text: &str) -> Result<SystemFile> {
        let file: SystemFile = serde_json::from_str(text).map_err(|e| {
            FrameError::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(FrameError::Parse(format!(
                "unsupported schema_version '{}', expected '{SCHEMA_VERSION}'",
                file.schema_version
            )));
        }
        if file.field != "real" {
            return Err(FrameError::Parse(format!(
                "unsupported field '{}', expected 'real'",
                file.field
            )));
        }
        Ok(file)
    }

    /// Serialize with stable field order and two-space indentation.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system file serialization cannot fail")
    }

    /// Snapshot a system (no transforms) into the file schema.
    pub fn from_system(sys: &RelaySystem) -> SystemFile {
        SystemFile {
            schema_version: SCHEMA_VERSION.to_string(),
            field: "real".to_string(),
            ambient_dim: sys.ambient_dim,
            locals: sys
                .locals
                .iter()
                .map(|l| LocalEntry {
                    id: l.atom.id.clone(),
                    mu: l.atom.weight,
                    w_basis: l.w.basis().to_columns(),
                    k_dim: l.local_dim,
                    lambda: l.lambda.to_rows(),
                    inner: l
                        .inner
                        .iter()
                        .map(|i| InnerEntry {
                            id: i.atom.id.clone(),
                            mu: i.atom.weight,
                            alpha: i.alpha,
                            v_basis: i.v.basis().to_columns(),
                            lambda: i.lambda.as_ref().map(|m| m.to_rows()),
                        })
                        .collect(),
                })
                .collect(),
            transforms: None,
        }
    }

    /// Build the runtime system, orthonormalizing raw bases with notices,
    /// and validate it.
    pub fn into_loaded(self) -> Result<LoadedSystem> {
        let mut notices = Vec::new();
        let locals = self
            .locals
            .iter()
            .map(|entry| {
                let w = load_basis(
                    &entry.w_basis,
                    self.ambient_dim,
                    &format!("W basis of local '{}'", entry.id),
                    &mut notices,
                )?;
                let lambda = matrix_from_rows(
                    &entry.lambda,
                    entry.k_dim,
                    self.ambient_dim,
                    &format!("Lambda of local '{}'", entry.id),
                )?;
                let inner = entry
                    .inner
                    .iter()
                    .map(|ie| {
                        let v = load_basis(
                            &ie.v_basis,
                            entry.k_dim,
                            &format!("V basis of inner '{}' in '{}'", ie.id, entry.id),
                            &mut notices,
                        )?;
                        let lambda = ie
                            .lambda
                            .as_ref()
                            .map(|rows| {
                                matrix_from_rows(
                                    rows,
                                    entry.k_dim,
                                    self.ambient_dim,
                                    &format!(
                                        "per-atom Lambda of inner '{}' in '{}'",
                                        ie.id, entry.id
                                    ),
                                )
                            })
                            .transpose()?;
                        Ok(InnerAtom {
                            atom: MeasureAtom::new(ie.id.clone(), ie.mu),
                            alpha: ie.alpha,
                            v,
                            lambda,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(LocalSystem {
                    atom: MeasureAtom::new(entry.id.clone(), entry.mu),
                    w,
                    local_dim: entry.k_dim,
                    lambda,
                    inner,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let system = RelaySystem {
            ambient_dim: self.ambient_dim,
            locals,
        };
        system.validate()?;

        let transforms = self.transforms.as_ref().map(load_transforms).transpose()?;
        Ok(LoadedSystem {
            system,
            transforms,
            notices,
        })
    }
}

/// Parse JSON text straight into a validated runtime system.
pub fn load_system_str(text: &str) -> Result<LoadedSystem> {
    SystemFile::parse(text)?.into_loaded()
}

/// Serialize a runtime system to JSON text.
pub fn system_to_json(sys: &RelaySystem) -> String {
    SystemFile::from_system(sys).to_json()
}

fn matrix_from_rows(
    rows: &[Vec<f64>],
    expected_rows: usize,
    expected_cols: usize,
    what: &str,
) -> Result<DenseMatrix> {
    if rows.len() != expected_rows || rows.iter().any(|r| r.len() != expected_cols) {
        return Err(FrameError::DimensionMismatch(format!(
            "{what}: expected {expected_rows}x{expected_cols} rows"
        )));
    }
    DenseMatrix::from_rows(rows)
}

fn load_basis(
    columns: &[Vec<f64>],
    expected_dim: usize,
    what: &str,
    notices: &mut Vec<String>,
) -> Result<Subspace> {
    if columns.is_empty() {
        return Err(FrameError::EmptyInnerSpace(format!(
            "{what} has no columns"
        )));
    }
    if columns.iter().any(|c| c.len() != expected_dim) {
        return Err(FrameError::DimensionMismatch(format!(
            "{what}: columns must have length {expected_dim}"
        )));
    }
    let raw = DenseMatrix::from_columns(columns)?;
    if raw.cols() <= raw.rows() {
        let gram = raw.transpose().mul(&raw)?;
        let defect = gram.max_abs_diff(&DenseMatrix::identity(raw.cols()))?;
        if defect <= BASIS_ORTHO_TOL {
            // Already orthonormal: keep the entries bitwise for exact
            // round trips.
            return Subspace::new(raw);
        }
    }
    let sub = Subspace::from_spanning(&raw, ORTHO_DROP_TOL)?;
    notices.push(format!(
        "{what}: supplied spanning set was not orthonormal; orthonormalized to rank {}",
        sub.dim()
    ));
    Ok(sub)
}

fn load_transforms(entry: &TransformsEntry) -> Result<SystemTransforms> {
    let q = entry
        .q
        .as_ref()
        .map(|rows| {
            let cols = rows.first().map_or(0, |r| r.len());
            matrix_from_rows(rows, rows.len(), cols, "Q")
        })
        .transpose()?;
    let parse_map = |map: &Option<BTreeMap<String, Vec<Vec<f64>>>>,
                     what: &str|
     -> Result<Option<BTreeMap<String, DenseMatrix>>> {
        map.as_ref()
            .map(|m| {
                m.iter()
                    .map(|(k, rows)| {
                        let n = rows.len();
                        let cols = rows.first().map_or(0, |r| r.len());
                        Ok((
                            k.clone(),
                            matrix_from_rows(rows, n, cols, &format!("{what}['{k}']"))?,
                        ))
                    })
                    .collect::<Result<BTreeMap<_, _>>>()
            })
            .transpose()
    };
    let q_locals = parse_map(&entry.q_locals, "Q_locals")?;
    let g_locals = parse_map(&entry.g_locals, "G_locals")?;
    let local_frames = entry
        .local_frames
        .as_ref()
        .map(|m| {
            m.iter()
                .map(|(k, vectors)| {
                    let parsed = vectors
                        .iter()
                        .map(|v| Vector::new(v.clone()))
                        .collect::<Result<Vec<_>>>()?;
                    Ok((k.clone(), parsed))
                })
                .collect::<Result<BTreeMap<_, _>>>()
        })
        .transpose()?;
    Ok(SystemTransforms {
        q,
        q_locals,
        g_locals,
        local_frames,
    })
}

/// Snapshot a system together with a transforms section.
pub fn system_file_with_transforms(
    sys: &RelaySystem,
    transforms: Option<&SystemTransforms>,
) -> SystemFile {
    let mut file = SystemFile::from_system(sys);
    file.transforms = transforms.map(|t| TransformsEntry {
        q: t.q.as_ref().map(|m| m.to_rows()),
        q_locals: t
            .q_locals
            .as_ref()
            .map(|m| m.iter().map(|(k, v)| (k.clone(), v.to_rows())).collect()),
        g_locals: t
            .g_locals
            .as_ref()
            .map(|m| m.iter().map(|(k, v)| (k.clone(), v.to_rows())).collect()),
        local_frames: t.local_frames.as_ref().map(|m| {
            m.iter()
                .map(|(k, vs)| (k.clone(), vs.iter().map(|v| v.to_vec()).collect()))
                .collect()
        }),
    });
    file
}
