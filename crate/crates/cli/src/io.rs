//! JSON artifacts: algebras, representations, functionals, models and vectors.
//!
//! Every file carries `schema_version` and `kind` next to its payload. Complex
//! numbers are `[re, im]`, matrices are row-major nested arrays, and `omega`
//! multiplicities are the string `"omega"`. References to other artifacts
//! (`algebra_ref`, `model_ref`) are paths relative to the referencing file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hilbmod_core::{
    Algebra, CMatrix, Error as CoreError, ExtendedModel, Functional, ModelVector, Multiplicity, Representation,
    Tolerance, C64,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("{path}: unsupported schema_version {found:?}, expected \"{SCHEMA_VERSION}\"")]
    SchemaVersionUnsupported { path: String, found: String },
    #[error("{path}: expected kind {expected:?}, found {found:?}")]
    WrongKind { path: String, expected: &'static str, found: String },
    #[error("{path}: {source}")]
    Validation { path: String, source: CoreError },
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
}

impl IoError {
    fn validation(path: &Path, source: CoreError) -> Self {
        Self::Validation { path: path.display().to_string(), source }
    }

    /// The core error behind a validation failure, if any.
    pub fn core(&self) -> Option<&CoreError> {
        match self {
            Self::Validation { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;

pub fn complex_out(z: C64) -> Complex {
    [z.re, z.im]
}

pub fn complex_in(z: &Complex) -> C64 {
    C64::new(z[0], z[1])
}

pub fn matrix_out(m: &CMatrix) -> Matrix {
    (0..m.rows()).map(|i| m.row(i).iter().copied().map(complex_out).collect()).collect()
}

pub fn matrix_in(rows: &Matrix, what: &str) -> Result<CMatrix, CoreError> {
    let converted: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(complex_in).collect()).collect();
    if converted.is_empty() {
        return Ok(CMatrix::zeros(0, 0));
    }
    CMatrix::from_rows(&converted).ok_or_else(|| CoreError::DimensionMismatch(format!("{what}: ragged matrix rows")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MultiplicityRepr {
    Finite(usize),
    Symbolic(String),
}

impl MultiplicityRepr {
    pub fn from_core(m: Multiplicity) -> Self {
        match m {
            Multiplicity::Finite(k) => Self::Finite(k),
            Multiplicity::Omega => Self::Symbolic("omega".into()),
        }
    }

    pub fn to_core(&self) -> Result<Multiplicity, CoreError> {
        match self {
            Self::Finite(k) => Ok(Multiplicity::Finite(*k)),
            Self::Symbolic(s) if s == "omega" => Ok(Multiplicity::Omega),
            Self::Symbolic(s) => {
                Err(CoreError::Invalid(format!("multiplicity {s:?} is neither an integer nor \"omega\"")))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub ambient_dim: usize,
    pub generators: Vec<Matrix>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepresentationFile {
    pub algebra_ref: String,
    pub images: Vec<Matrix>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionalFile {
    pub algebra_ref: String,
    pub values: Vec<Complex>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockFile {
    pub dim: usize,
    pub rep_images: Vec<Matrix>,
    pub multiplicity: MultiplicityRepr,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub algebra_ref: String,
    pub blocks: Vec<BlockFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryFile {
    pub block: usize,
    pub copy: usize,
    pub coeffs: Vec<Complex>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VectorFile {
    pub model_ref: String,
    pub entries: Vec<EntryFile>,
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    schema_version: String,
    kind: String,
    #[serde(flatten)]
    payload: T,
}

#[derive(Deserialize)]
struct Header {
    schema_version: String,
    kind: String,
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

fn parse_error(path: &Path, e: serde_json::Error) -> IoError {
    IoError::Parse { path: path.display().to_string(), line: e.line(), column: e.column(), message: e.to_string() }
}

/// Parses a manifest of the expected kind, checking the header first.
pub fn read_manifest<T: DeserializeOwned>(path: &Path, kind: &'static str) -> Result<T, IoError> {
    let text = read_text(path)?;
    let header: Header = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(IoError::SchemaVersionUnsupported {
            path: path.display().to_string(),
            found: header.schema_version,
        });
    }
    if header.kind != kind {
        return Err(IoError::WrongKind { path: path.display().to_string(), expected: kind, found: header.kind });
    }
    let env: Envelope<T> = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    Ok(env.payload)
}

/// Serializes a manifest and writes it through a temporary file and a rename.
pub fn write_manifest<T: Serialize>(path: &Path, kind: &str, payload: &T) -> Result<(), IoError> {
    let env = Envelope { schema_version: SCHEMA_VERSION.to_string(), kind: kind.to_string(), payload };
    let mut text = crate::report::to_canonical_string(&serde_json::to_value(&env).expect("manifests serialize"));
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let file_err = |source| IoError::File { path: path.display().to_string(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(file_err)?;
    tmp.write_all(bytes).map_err(file_err)?;
    tmp.persist(path).map_err(|e| file_err(e.error))?;
    Ok(())
}

/// `reference` resolved against the directory of `from`.
pub fn resolve(from: &Path, reference: &str) -> PathBuf {
    let r = Path::new(reference);
    if r.is_absolute() {
        return r.to_path_buf();
    }
    from.parent().map_or_else(|| r.to_path_buf(), |d| d.join(r))
}

/// A path from the directory of `from` to `target`, falling back to `target`
/// itself when no relative form exists.
pub fn relative_ref(from: &Path, target: &Path) -> String {
    let base = from.parent().unwrap_or_else(|| Path::new(""));
    let (Ok(b), Ok(t)) = (absolute(base), absolute(target)) else {
        return target.display().to_string();
    };
    let bc: Vec<_> = b.components().collect();
    let tc: Vec<_> = t.components().collect();
    let common = bc.iter().zip(&tc).take_while(|(x, y)| x == y).count();
    if common == 0 {
        return t.display().to_string();
    }
    let mut out = PathBuf::new();
    for _ in common..bc.len() {
        out.push("..");
    }
    for c in &tc[common..] {
        out.push(c);
    }
    out.display().to_string()
}

fn absolute(p: &Path) -> std::io::Result<PathBuf> {
    if p.is_absolute() {
        Ok(p.to_path_buf())
    } else {
        Ok(std::env::current_dir()?.join(p))
    }
}

pub fn load_algebra(path: &Path, tol: &Tolerance) -> Result<Arc<Algebra>, IoError> {
    let file: AlgebraFile = read_manifest(path, "algebra")?;
    let gens = file
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| matrix_in(g, &format!("generator {i}")))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| IoError::validation(path, e))?;
    Algebra::generate(file.ambient_dim, &gens, tol).map_err(|e| IoError::validation(path, e))
}

pub fn algebra_file(alg: &Arc<Algebra>) -> AlgebraFile {
    let gens: Vec<Matrix> = alg
        .generator_coords()
        .iter()
        .map(|c| matrix_out(&alg.element(c.clone()).expect("generator coordinates fit the basis").to_matrix()))
        .collect();
    AlgebraFile { ambient_dim: alg.ambient_dim(), generators: gens }
}

pub fn load_representation(path: &Path, tol: &Tolerance) -> Result<Representation, IoError> {
    let file: RepresentationFile = read_manifest(path, "representation")?;
    let alg = load_algebra(&resolve(path, &file.algebra_ref), tol)?;
    let images = file
        .images
        .iter()
        .enumerate()
        .map(|(i, m)| matrix_in(m, &format!("image {i}")))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| IoError::validation(path, e))?;
    Representation::new(alg, images, tol).map_err(|e| IoError::validation(path, e))
}

pub fn representation_file(rep: &Representation, algebra_ref: String) -> RepresentationFile {
    RepresentationFile { algebra_ref, images: rep.images().iter().map(matrix_out).collect() }
}

pub fn load_functional(path: &Path, tol: &Tolerance) -> Result<Functional, IoError> {
    let file: FunctionalFile = read_manifest(path, "functional")?;
    let alg = load_algebra(&resolve(path, &file.algebra_ref), tol)?;
    Functional::new(alg, file.values.iter().map(complex_in).collect()).map_err(|e| IoError::validation(path, e))
}

pub fn functional_file(phi: &Functional, algebra_ref: String) -> FunctionalFile {
    FunctionalFile { algebra_ref, values: phi.values().iter().copied().map(complex_out).collect() }
}

pub fn load_model(path: &Path, tol: &Tolerance) -> Result<ExtendedModel, IoError> {
    let file: ModelFile = read_manifest(path, "model")?;
    let alg = load_algebra(&resolve(path, &file.algebra_ref), tol)?;
    let mut blocks = Vec::with_capacity(file.blocks.len());
    for (i, b) in file.blocks.iter().enumerate() {
        let images = b
            .rep_images
            .iter()
            .map(|m| matrix_in(m, &format!("block {i}")))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| IoError::validation(path, e))?;
        if images.iter().any(|m| m.rows() != b.dim || m.cols() != b.dim) {
            return Err(IoError::validation(
                path,
                CoreError::DimensionMismatch(format!("block {i}: images are not {0} x {0}", b.dim)),
            ));
        }
        let rep = Representation::new(alg.clone(), images, tol).map_err(|e| IoError::validation(path, e))?;
        let m = b.multiplicity.to_core().map_err(|e| IoError::validation(path, e))?;
        blocks.push((rep, m));
    }
    ExtendedModel::new(alg, blocks, tol).map_err(|e| IoError::validation(path, e))
}

pub fn model_file(model: &ExtendedModel, algebra_ref: String) -> ModelFile {
    let blocks = model
        .blocks()
        .iter()
        .map(|b| BlockFile {
            dim: b.dim(),
            rep_images: b.rep.images().iter().map(matrix_out).collect(),
            multiplicity: MultiplicityRepr::from_core(b.multiplicity),
        })
        .collect();
    ModelFile { algebra_ref, blocks }
}

/// Reads the entries of a vector file and validates them against `model`.
pub fn load_vector(path: &Path, model: &ExtendedModel) -> Result<ModelVector, IoError> {
    let file: VectorFile = read_manifest(path, "vector")?;
    vector_from_entries(&file.entries, model).map_err(|e| IoError::validation(path, e))
}

pub fn vector_from_entries(entries: &[EntryFile], model: &ExtendedModel) -> Result<ModelVector, CoreError> {
    model.vector(entries.iter().map(|e| (e.block, e.copy, e.coeffs.iter().map(complex_in).collect())).collect())
}

pub fn vector_entries(v: &ModelVector) -> Vec<EntryFile> {
    v.entries()
        .map(|(block, copy, coeffs)| EntryFile {
            block,
            copy,
            coeffs: coeffs.iter().copied().map(complex_out).collect(),
        })
        .collect()
}

pub fn vector_file(v: &ModelVector, model_ref: String) -> VectorFile {
    VectorFile { model_ref, entries: vector_entries(v) }
}
