use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use hilbmod_core::model::{average, elementarily_equivalent, monster};
use hilbmod_core::states::{
    dominates, functional_norm, gns, norm_orthogonal, operator_norm_sq, orthogonal, orthogonality_witness,
    radon_nikodym_witness, support_overlap, vector_state,
};
use hilbmod_core::{
    decompose, sample, unitary_equivalent, Algebra, CMatrix, Error as CoreError, ExtendedModel, Functional, ModelRank,
    ModelVector, Multiplicity, Tolerance, C64,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::io::{self, IoError};
use crate::report::Report;

const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Parser)]
#[command(
    name = "hilbmod",
    version,
    about = "Representations, GNS and model-theoretic predicates over finite-dimensional C*-algebras"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Relative singular-value cutoff for numerical rank.
    #[arg(long, global = true, default_value_t = Tolerance::default().rank_rel)]
    pub tol_rank: f64,
    /// Absolute tolerance for equality of operators and functionals.
    #[arg(long, global = true, default_value_t = Tolerance::default().eq_abs)]
    pub tol_eq: f64,
    /// Relative eigenvalue gap separating clusters.
    #[arg(long, global = true, default_value_t = Tolerance::default().gap_rel)]
    pub tol_gap: f64,
    /// Seed for every randomized step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Re-run the brute-force oracle and report its verdict alongside.
    #[arg(long, global = true)]
    pub verify: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or inspect algebras.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Representations: random instances, validation, decomposition, equivalence, ranks.
    #[command(subcommand)]
    Rep(RepCmd),
    /// GNS representation of a positive functional.
    Gns {
        #[arg(long)]
        algebra: Option<PathBuf>,
        #[arg(long)]
        functional: PathBuf,
    },
    /// Positive functionals: random instances, norms, orthogonality, domination.
    #[command(subcommand)]
    State(StateCmd),
    /// Models, types and independence.
    #[command(subcommand)]
    Model(ModelCmd),
}

#[derive(Debug, Subcommand)]
pub enum AlgebraCmd {
    /// Random algebra `sum M_n (tensor) I_m` in a random basis.
    Gen {
        /// Blocks as `NxM` pairs, e.g. `2x1,1x2`; random when omitted.
        #[arg(long)]
        shape: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    Show {
        #[arg(long)]
        algebra: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum RepCmd {
    Gen {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long, default_value_t = 16)]
        max_dim: usize,
        #[arg(long)]
        out: PathBuf,
    },
    Check {
        #[arg(long)]
        rep: PathBuf,
    },
    Decompose {
        #[arg(long)]
        rep: PathBuf,
        /// Also write the blocks and multiplicities as a model file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Equiv {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        other: PathBuf,
    },
    /// Rank of the image of every basis element.
    Rank {
        #[arg(long)]
        rep: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum StateCmd {
    Gen {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Norm {
        #[arg(long)]
        functional: PathBuf,
    },
    Orth {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
    },
    /// Smallest `gamma` with `gamma psi - phi` positive.
    Dominate {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
    },
    /// Intertwining `S: H_psi -> H_phi` sending the cyclic vector to the cyclic vector.
    RnWitness {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum ModelCmd {
    /// Random model over an algebra, with random multiplicities.
    Gen {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random vector on the first `copies` copies of each block.
    Vector {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 4)]
        copies: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// From a representation's decomposition, or from an algebra and one
    /// multiplicity per algebra block (`0`, `3`, `omega`, ...).
    Build {
        #[arg(long, conflicts_with = "algebra")]
        rep: Option<PathBuf>,
        #[arg(long)]
        omega: bool,
        #[arg(long, requires = "mults")]
        algebra: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        mults: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Saturated model elementarily equivalent to the given one.
    Monster {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Whether two models are elementarily equivalent.
    ElemEquiv {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        other: PathBuf,
    },
    /// Whether `tp(v / E) = tp(w / E)`.
    TypeEq {
        #[command(flatten)]
        ctx: ModelCtx,
        #[arg(long)]
        w: PathBuf,
    },
    /// Whether `v` is independent from the side set over `E`.
    Fork {
        #[command(flatten)]
        ctx: ModelCtx,
        #[arg(long)]
        side: Vec<PathBuf>,
    },
    /// A realization of `tp(v / E)` independent from the side set.
    Nfext {
        #[command(flatten)]
        ctx: ModelCtx,
        #[arg(long)]
        side: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Canonical base of `tp(v / E)`.
    Cb {
        #[command(flatten)]
        ctx: ModelCtx,
    },
    /// Morley sequence of length `k` in `tp(v / E)` and how far its average lies from the canonical base.
    Morley {
        #[command(flatten)]
        ctx: ModelCtx,
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// Whether `tp(v / E)` and `tp(w / E)` are orthogonal.
    Orth {
        #[command(flatten)]
        ctx: ModelCtx,
        #[arg(long)]
        w: PathBuf,
    },
    /// Whether `tp(v / E)` dominates `tp(w / F)` over `G`.
    Dominate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long)]
        e: Vec<PathBuf>,
        #[arg(long)]
        w: PathBuf,
        #[arg(long)]
        f: Vec<PathBuf>,
        #[arg(long)]
        g: Vec<PathBuf>,
    },
    /// Finite part of `E` whose closure projects `v` like `E` does, up to `eps`.
    EpsBase {
        #[command(flatten)]
        ctx: ModelCtx,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// An automorphism fixing `E` and sending `v` to `w`.
    AutoWitness {
        #[command(flatten)]
        ctx: ModelCtx,
        #[arg(long)]
        w: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ModelCtx {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub v: PathBuf,
    /// Base set, one vector file per flag.
    #[arg(long)]
    pub base: Vec<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 3 for numerical degeneracy, 2 for every other failure.
    pub fn exit_code(&self) -> i32 {
        let core = match self {
            Self::Io(e) => e.core(),
            Self::Core(e) => Some(e),
            Self::Usage(_) => None,
        };
        match core {
            Some(CoreError::NumericalDegeneracy(_)) => 3,
            _ => 2,
        }
    }

    /// Name of the underlying core error, e.g. `Degenerate`.
    pub fn reason(&self) -> Option<String> {
        let core = match self {
            Self::Io(e) => e.core()?,
            Self::Core(e) => e,
            Self::Usage(_) => return None,
        };
        let debug = format!("{core:?}");
        Some(debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Io(IoError::Parse { .. }) => "ParseError",
            Self::Io(IoError::SchemaVersionUnsupported { .. }) => "SchemaVersionUnsupported",
            Self::Io(IoError::File { .. }) => "FileError",
            Self::Usage(_) => "UsageError",
            _ if self.exit_code() == 3 => "NumericalDegeneracy",
            _ => "ValidationError",
        }
    }
}

type Outcome = Result<Report, CliError>;

fn path_str(p: &Path) -> Value {
    Value::String(p.display().to_string())
}

fn c_json(z: C64) -> Value {
    json!([z.re, z.im])
}

fn matrix_json(m: &CMatrix) -> Value {
    serde_json::to_value(io::matrix_out(m)).expect("matrices serialize")
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rank_json(r: ModelRank) -> Value {
    match r {
        ModelRank::Finite(k) => json!(k),
        ModelRank::Infinite => json!("infinite"),
    }
}

/// Command name as written on the command line.
pub fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Algebra(AlgebraCmd::Gen { .. }) => "algebra gen",
        Command::Algebra(AlgebraCmd::Show { .. }) => "algebra show",
        Command::Rep(RepCmd::Gen { .. }) => "rep gen",
        Command::Rep(RepCmd::Check { .. }) => "rep check",
        Command::Rep(RepCmd::Decompose { .. }) => "rep decompose",
        Command::Rep(RepCmd::Equiv { .. }) => "rep equiv",
        Command::Rep(RepCmd::Rank { .. }) => "rep rank",
        Command::Gns { .. } => "gns",
        Command::State(StateCmd::Gen { .. }) => "state gen",
        Command::State(StateCmd::Norm { .. }) => "state norm",
        Command::State(StateCmd::Orth { .. }) => "state orth",
        Command::State(StateCmd::Dominate { .. }) => "state dominate",
        Command::State(StateCmd::RnWitness { .. }) => "state rn-witness",
        Command::Model(m) => match m {
            ModelCmd::Gen { .. } => "model gen",
            ModelCmd::Vector { .. } => "model vector",
            ModelCmd::Build { .. } => "model build",
            ModelCmd::Monster { .. } => "model monster",
            ModelCmd::ElemEquiv { .. } => "model elem-equiv",
            ModelCmd::TypeEq { .. } => "model type-eq",
            ModelCmd::Fork { .. } => "model fork",
            ModelCmd::Nfext { .. } => "model nfext",
            ModelCmd::Cb { .. } => "model cb",
            ModelCmd::Morley { .. } => "model morley",
            ModelCmd::Orth { .. } => "model orth",
            ModelCmd::Dominate { .. } => "model dominate",
            ModelCmd::EpsBase { .. } => "model eps-base",
            ModelCmd::AutoWitness { .. } => "model auto-witness",
        },
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let g = &cli.global;
    let tol = Tolerance { rank_rel: g.tol_rank, eq_abs: g.tol_eq, gap_rel: g.tol_gap };
    if !tol.is_valid() {
        return Err(CliError::Usage("tolerances must be finite and strictly positive".into()));
    }
    let name = command_name(&cli.command);
    let cx = Ctx { name, tol, seed: g.seed, verify: g.verify };
    match &cli.command {
        Command::Algebra(c) => cx.algebra(c),
        Command::Rep(c) => cx.rep(c),
        Command::Gns { algebra, functional } => cx.gns(algebra.as_deref(), functional),
        Command::State(c) => cx.state(c),
        Command::Model(c) => cx.model(c),
    }
}

struct Ctx {
    name: &'static str,
    tol: Tolerance,
    seed: Option<u64>,
    verify: bool,
}

impl Ctx {
    fn report(&self) -> Report {
        Report::new(self.name, &self.tol, self.seed)
    }

    /// Report for a randomized command; records the seed actually used.
    fn seeded(&self) -> (Report, u64) {
        let seed = self.seed.unwrap_or(DEFAULT_SEED);
        (Report::new(self.name, &self.tol, Some(seed)), seed)
    }

    fn algebra(&self, cmd: &AlgebraCmd) -> Outcome {
        match cmd {
            AlgebraCmd::Gen { shape, out } => {
                let (mut rep, seed) = self.seeded();
                let mut r = rng(seed);
                let shape = match shape {
                    Some(s) => parse_shape(s)?,
                    None => sample::random_shape(6, 9, &mut r),
                };
                let alg = sample::random_algebra_with_shape(&shape, &self.tol, &mut r)?;
                io::write_manifest(out, "algebra", &io::algebra_file(&alg))?;
                rep.input("shape", json!(shape)).input("out", path_str(out));
                rep.result = describe_algebra(&alg)?;
                Ok(rep)
            }
            AlgebraCmd::Show { algebra } => {
                let mut rep = self.report();
                let alg = io::load_algebra(algebra, &self.tol)?;
                rep.input("algebra", path_str(algebra));
                rep.result = describe_algebra(&alg)?;
                Ok(rep)
            }
        }
    }

    fn rep(&self, cmd: &RepCmd) -> Outcome {
        match cmd {
            RepCmd::Gen { algebra, max_dim, out } => {
                let (mut rep, seed) = self.seeded();
                let alg = io::load_algebra(algebra, &self.tol)?;
                let r = sample::random_representation(&alg, *max_dim, &mut rng(seed))?;
                let file = io::representation_file(&r, io::relative_ref(out, algebra));
                io::write_manifest(out, "representation", &file)?;
                rep.input("algebra", path_str(algebra)).input("out", path_str(out));
                rep.result = json!({ "dim": r.dim() });
                Ok(rep)
            }
            RepCmd::Check { rep: path } => {
                let mut rep = self.report();
                let r = io::load_representation(path, &self.tol)?;
                rep.input("rep", path_str(path));
                rep.residual("star", r.star_residual())
                    .residual("homomorphism", r.homomorphism_residual())
                    .residual("degeneracy", r.degeneracy_residual());
                rep.result = json!({ "valid": true, "dim": r.dim(), "algebra_dim": r.algebra().dim() });
                Ok(rep)
            }
            RepCmd::Decompose { rep: path, out } => {
                let (mut rep, seed) = self.seeded();
                let r = io::load_representation(path, &self.tol)?;
                let dec = decompose(&r, &self.tol, seed)?;
                rep.input("rep", path_str(path));
                rep.residual("intertwining", dec.intertwining_residual());
                let u = dec.assembly_unitary();
                rep.residual("unitarity", u.adjoint_mul(&u).max_abs_diff(&CMatrix::identity(u.cols())));
                let schur = dec.schur_dims(&self.tol);
                let blocks: Vec<Value> = dec
                    .blocks
                    .iter()
                    .zip(&schur)
                    .map(|(b, s)| json!({ "dim": b.block.dim(), "multiplicity": b.multiplicity, "commutant_dim": s }))
                    .collect();
                let mut result = json!({ "blocks": blocks, "kernel_dim": dec.kernel_basis.cols() });
                if self.verify {
                    let eq = unitary_equivalent(&r, &dec.reassemble(), &self.tol, seed)?;
                    result["verify"] = json!({ "reassembled_equivalent": eq.is_some() });
                }
                if let Some(out) = out {
                    let model = ExtendedModel::from_decomposition(&dec, false, &self.tol)?;
                    let alg_ref = algebra_ref_of(path)?;
                    let file = io::model_file(&model, io::relative_ref(out, &io::resolve(path, &alg_ref)));
                    io::write_manifest(out, "model", &file)?;
                    rep.input("out", path_str(out));
                }
                rep.result = result;
                Ok(rep)
            }
            RepCmd::Equiv { rep: p1, other: p2 } => {
                let (mut rep, seed) = self.seeded();
                let r1 = io::load_representation(p1, &self.tol)?;
                let r2 = io::load_representation(p2, &self.tol)?;
                rep.input("rep", path_str(p1)).input("other", path_str(p2));
                let u = unitary_equivalent(&r1, &r2, &self.tol, seed)?;
                let mut result = json!({ "equivalent": u.is_some() });
                if let Some(u) = &u {
                    rep.residual("equivalence", hilbmod_core::decomp::equivalence_residual(&r1, &r2, u));
                }
                if self.verify {
                    let same = r1.dim() == r2.dim() && {
                        let h = r1.intertwiners(&r2, &self.tol)?.dim();
                        h == r1.commutant(&self.tol).dim() && h == r2.commutant(&self.tol).dim()
                    };
                    result["verify"] = json!({ "intertwiner_dims_match": same });
                }
                rep.result = result;
                Ok(rep)
            }
            RepCmd::Rank { rep: path } => {
                let mut rep = self.report();
                let r = io::load_representation(path, &self.tol)?;
                rep.input("rep", path_str(path));
                let alg = r.algebra();
                let ranks = (0..alg.dim())
                    .map(|k| hilbmod_core::rank_profile(&r, &alg.basis_element(k), &self.tol))
                    .collect::<Result<Vec<_>, _>>()?;
                rep.result = json!({ "basis_ranks": ranks });
                Ok(rep)
            }
        }
    }

    fn gns(&self, algebra: Option<&Path>, functional: &Path) -> Outcome {
        let mut rep = self.report();
        let phi = io::load_functional(functional, &self.tol)?;
        if let Some(a) = algebra {
            io::load_algebra(a, &self.tol)?.check_same(phi.algebra())?;
            rep.input("algebra", path_str(a));
        }
        rep.input("functional", path_str(functional));
        let (r, v) = gns(&phi, &self.tol)?;
        let back = vector_state(&r, &v)?;
        rep.residual("vector_state", back.max_abs_diff(&phi));
        rep.residual("homomorphism", r.homomorphism_residual());
        rep.residual("star", r.star_residual());
        rep.result = json!({
            "carrier_dim": r.dim(),
            "gram_rank": hilbmod_core::linalg::numerical_rank(&phi.gram(), &self.tol),
            "cyclic_vector": v.iter().copied().map(c_json).collect::<Vec<_>>(),
            "images": r.images().iter().map(matrix_json).collect::<Vec<_>>(),
        });
        Ok(rep)
    }

    fn state(&self, cmd: &StateCmd) -> Outcome {
        match cmd {
            StateCmd::Gen { algebra, out } => {
                let (mut rep, seed) = self.seeded();
                let alg = io::load_algebra(algebra, &self.tol)?;
                let phi = sample::random_positive_functional(&alg, &mut rng(seed))?;
                io::write_manifest(out, "functional", &io::functional_file(&phi, io::relative_ref(out, algebra)))?;
                rep.input("algebra", path_str(algebra)).input("out", path_str(out));
                rep.result = json!({ "at_unit": c_json(phi.at_unit()) });
                Ok(rep)
            }
            StateCmd::Norm { functional } => {
                let mut rep = self.report();
                let phi = io::load_functional(functional, &self.tol)?;
                rep.input("functional", path_str(functional));
                rep.residual("hermitian", phi.hermitian_deviation());
                rep.result = json!({
                    "norm": functional_norm(&phi, &self.tol)?,
                    "positive": phi.is_positive(&self.tol),
                    "at_unit": c_json(phi.at_unit()),
                });
                Ok(rep)
            }
            StateCmd::Orth { phi, psi } => {
                let mut rep = self.report();
                let (f, g) = self.two_functionals(phi, psi, &mut rep)?;
                let orth = orthogonal(&f, &g, &self.tol)?;
                rep.residual("support_overlap", support_overlap(&f, &g, &self.tol)?);
                let mut result = json!({ "orthogonal": orth });
                if orth {
                    let a = orthogonality_witness(&f, &g, &self.tol)?;
                    let e_minus_a = f.algebra().unit().sub(&a)?;
                    rep.residual("phi_e_minus_a", f.eval(&e_minus_a)?.norm());
                    rep.residual("psi_a", g.eval(&a)?.norm());
                    result["witness"] = matrix_json(&a.to_matrix());
                }
                if self.verify {
                    result["verify"] = json!({ "norm_criterion": norm_orthogonal(&f, &g, &self.tol)? });
                }
                rep.result = result;
                Ok(rep)
            }
            StateCmd::Dominate { phi, psi } => {
                let mut rep = self.report();
                let (f, g) = self.two_functionals(phi, psi, &mut rep)?;
                let gamma = dominates(&f, &g, &self.tol)?;
                let mut result = json!({ "dominated": gamma.is_some(), "gamma": gamma });
                if self.verify {
                    let s = rn_witness(&f, &g, &self.tol)?;
                    result["verify"] = json!({ "rn_witness_feasible": s.is_some() });
                }
                rep.result = result;
                Ok(rep)
            }
            StateCmd::RnWitness { phi, psi } => {
                let mut rep = self.report();
                let (f, g) = self.two_functionals(phi, psi, &mut rep)?;
                let s = rn_witness(&f, &g, &self.tol)?;
                rep.result = match &s {
                    Some(s) => {
                        let n = operator_norm_sq(s);
                        json!({ "feasible": true, "witness": matrix_json(s), "norm_sq": n })
                    }
                    None => json!({ "feasible": false }),
                };
                Ok(rep)
            }
        }
    }

    fn two_functionals(&self, phi: &Path, psi: &Path, rep: &mut Report) -> Result<(Functional, Functional), CliError> {
        let f = io::load_functional(phi, &self.tol)?;
        let g = io::load_functional(psi, &self.tol)?;
        f.algebra().check_same(g.algebra())?;
        rep.input("phi", path_str(phi)).input("psi", path_str(psi));
        Ok((f, g))
    }

    fn load_ctx(
        &self,
        ctx: &ModelCtx,
        rep: &mut Report,
    ) -> Result<(ExtendedModel, ModelVector, Vec<ModelVector>), CliError> {
        let model = io::load_model(&ctx.model, &self.tol)?;
        let v = io::load_vector(&ctx.v, &model)?;
        let base = load_vectors(&ctx.base, &model)?;
        rep.input("model", path_str(&ctx.model)).input("v", path_str(&ctx.v));
        rep.input("base", paths_json(&ctx.base));
        Ok((model, v, base))
    }

    fn model(&self, cmd: &ModelCmd) -> Outcome {
        match cmd {
            ModelCmd::Gen { algebra, out } => {
                let (mut rep, seed) = self.seeded();
                let alg = io::load_algebra(algebra, &self.tol)?;
                let model = sample::random_model(&alg, &self.tol, &mut rng(seed))?;
                io::write_manifest(out, "model", &io::model_file(&model, io::relative_ref(out, algebra)))?;
                rep.input("algebra", path_str(algebra)).input("out", path_str(out));
                rep.result = describe_model(&model);
                Ok(rep)
            }
            ModelCmd::Vector { model: path, copies, out } => {
                let (mut rep, seed) = self.seeded();
                let model = io::load_model(path, &self.tol)?;
                let v = sample::random_model_vector(&model, (*copies).max(1), 2, &mut rng(seed));
                io::write_manifest(out, "vector", &io::vector_file(&v, io::relative_ref(out, path)))?;
                rep.input("model", path_str(path)).input("out", path_str(out));
                rep.result = json!({ "norm": v.norm(), "entries": io::vector_entries(&v) });
                Ok(rep)
            }
            ModelCmd::Build { rep: rep_path, omega, algebra, mults, out } => {
                let (mut rep, seed) = self.seeded();
                let (model, alg_path) = match (rep_path, algebra) {
                    (Some(p), _) => {
                        let r = io::load_representation(p, &self.tol)?;
                        let dec = decompose(&r, &self.tol, seed)?;
                        rep.input("rep", path_str(p));
                        (
                            ExtendedModel::from_decomposition(&dec, *omega, &self.tol)?,
                            io::resolve(p, &algebra_ref_of(p)?),
                        )
                    }
                    (None, Some(a)) => {
                        let alg = io::load_algebra(a, &self.tol)?;
                        let ms = mults.iter().map(|m| parse_multiplicity(m)).collect::<Result<Vec<_>, _>>()?;
                        rep.input("algebra", path_str(a)).input("mults", json!(mults));
                        (model_from_mults(&alg, &ms, &self.tol)?, a.clone())
                    }
                    (None, None) => {
                        return Err(CliError::Usage("model build needs --rep or --algebra with --mults".into()))
                    }
                };
                io::write_manifest(out, "model", &io::model_file(&model, io::relative_ref(out, &alg_path)))?;
                rep.input("out", path_str(out));
                rep.result = describe_model(&model);
                Ok(rep)
            }
            ModelCmd::Monster { model: path, out } => {
                let mut rep = self.report();
                let model = io::load_model(path, &self.tol)?;
                let big = monster(&model);
                rep.input("model", path_str(path));
                if let Some(out) = out {
                    let alg_ref: io::ModelFile = io::read_manifest(path, "model")?;
                    let alg_path = io::resolve(path, &alg_ref.algebra_ref);
                    io::write_manifest(out, "model", &io::model_file(&big, io::relative_ref(out, &alg_path)))?;
                    rep.input("out", path_str(out));
                }
                let mut result = describe_model(&big);
                result["elementarily_equivalent_to_reference"] = json!(elementarily_equivalent(&model, &big)?);
                rep.result = result;
                Ok(rep)
            }
            ModelCmd::ElemEquiv { model: p1, other: p2 } => {
                let mut rep = self.report();
                let m1 = io::load_model(p1, &self.tol)?;
                let m2 = io::load_model(p2, &self.tol)?;
                rep.input("model", path_str(p1)).input("other", path_str(p2));
                let eq = elementarily_equivalent(&m1, &m2)?;
                let mut result = json!({ "elementarily_equivalent": eq });
                if self.verify {
                    let alg = m1.algebra();
                    let mut agree = true;
                    for k in 0..alg.dim() {
                        let x = alg.basis_element(k);
                        agree &= m1.rank(&x)? == m2.rank(&x)?;
                    }
                    let s = alg.structure()?;
                    for i in 0..s.blocks.len() {
                        let p = alg.element(s.central_projection(i))?;
                        agree &= m1.rank(&p)? == m2.rank(&p)?;
                    }
                    result["verify"] = json!({ "rank_profiles_equal": agree });
                }
                rep.result = result;
                Ok(rep)
            }
            ModelCmd::TypeEq { ctx, w } => {
                let mut rep = self.report();
                let (model, v, base) = self.load_ctx(ctx, &mut rep)?;
                let wv = io::load_vector(w, &model)?;
                rep.input("w", path_str(w));
                let eq = model.type_equal(&v, &wv, &base)?;
                let pv = model.dcl_project(&base, &v);
                let pw = model.dcl_project(&base, &wv);
                rep.residual("projection_difference", pv.max_abs_diff(&pw));
                let fv = model.vector_state(&v.sub(&pv));
                let fw = model.vector_state(&wv.sub(&pw));
                rep.residual("state_difference", fv.max_abs_diff(&fw));
                let mut result = json!({ "type_equal": eq });
                if self.verify {
                    let ok = match model.automorphism_witness(&v, &wv, &base) {
                        Ok(a) => a.residual <= self.tol.eq_abs,
                        Err(CoreError::TypesDiffer) => false,
                        Err(e) => return Err(e.into()),
                    };
                    result["verify"] = json!({ "automorphism_found": ok });
                }
                rep.result = result;
                Ok(rep)
            }
            ModelCmd::Fork { ctx, side } => {
                let mut rep = self.report();
                let (model, v, base) = self.load_ctx(ctx, &mut rep)?;
                let f = load_vectors(side, &model)?;
                rep.input("side", paths_json(side));
                let defect = model.forking_defect(&v, &base, &f);
                rep.residual("forking_defect", defect);
                let mut result = json!({ "independent": model.independent(&v, &base, &f) });
                if self.verify {
                    result["verify"] = json!({ "pairwise": model.independent_pairwise(&v, &base, &f) });
                }
                rep.result = result;
                Ok(rep)
            }
            ModelCmd::Nfext { ctx, side, out } => {
                let (mut rep, seed) = self.seeded();
                let (model, v, base) = self.load_ctx(ctx, &mut rep)?;
                let f = load_vectors(side, &model)?;
                rep.input("side", paths_json(side));
                let w = model.nonforking_extension(&v, &base, &f, Some(seed))?;
                rep.residual("forking_defect", model.forking_defect(&w, &base, &f));
                let same = model.type_equal(&v, &w, &base)?;
                if let Some(out) = out {
                    io::write_manifest(out, "vector", &io::vector_file(&w, io::relative_ref(out, &ctx.model)))?;
                    rep.input("out", path_str(out));
                }
                rep.result = json!({
                    "entries": io::vector_entries(&w),
                    "type_equal": same,
                    "independent": model.independent(&w, &base, &f),
                });
                Ok(rep)
            }
            ModelCmd::Cb { ctx } => {
                let mut rep = self.report();
                let (model, v, base) = self.load_ctx(ctx, &mut rep)?;
                let cb = model.canonical_base(std::slice::from_ref(&v), &base);
                rep.result = json!({ "canonical_base": io::vector_entries(&cb[0]), "norm": cb[0].norm() });
                Ok(rep)
            }
            ModelCmd::Morley { ctx, k } => {
                let (mut rep, seed) = self.seeded();
                let (model, v, base) = self.load_ctx(ctx, &mut rep)?;
                rep.input("k", json!(k));
                let seq = model.morley_sequence(&v, &base, *k, Some(seed))?;
                let target = model.acl_project(&base, &v);
                let perp = v.sub(&target).norm();
                let deviations: Vec<f64> =
                    (1..=seq.len()).map(|j| average(&seq[..j]).expect("nonempty prefix").sub(&target).norm()).collect();
                if let Some(&last) = deviations.last() {
                    let expected = perp / (*k as f64).sqrt();
                    rep.residual("deviation_vs_expected", (last - expected).abs());
                }
                rep.result = json!({
                    "length": seq.len(),
                    "perp_norm": perp,
                    "average_deviation": deviations,
                    "canonical_base": io::vector_entries(&model.dcl_project(&base, &v)),
                });
                Ok(rep)
            }
            ModelCmd::Orth { ctx, w } => {
                let mut rep = self.report();
                let (model, v, base) = self.load_ctx(ctx, &mut rep)?;
                let wv = io::load_vector(w, &model)?;
                rep.input("w", path_str(w));
                let orth = model.types_orthogonal(&v, &wv, &base)?;
                let mut result = json!({ "orthogonal": orth });
                if self.verify {
                    result["verify"] = json!({ "acl_variant": model.types_orthogonal_acl(&v, &wv, &base)? });
                }
                rep.result = result;
                Ok(rep)
            }
            ModelCmd::Dominate { model: path, v, e, w, f, g } => {
                let (mut rep, seed) = self.seeded();
                let model = io::load_model(path, &self.tol)?;
                let vv = io::load_vector(v, &model)?;
                let wv = io::load_vector(w, &model)?;
                let (ev, fv, gv) = (load_vectors(e, &model)?, load_vectors(f, &model)?, load_vectors(g, &model)?);
                rep.input("model", path_str(path)).input("v", path_str(v)).input("w", path_str(w));
                rep.input("e", paths_json(e)).input("f", paths_json(f)).input("g", paths_json(g));
                let d = model.type_dominates(&vv, &ev, &wv, &fv, &gv, Some(seed))?;
                let mut result = json!({ "dominates": d });
                if self.verify {
                    let again = model.type_dominates(&vv, &ev, &wv, &fv, &gv, Some(seed.wrapping_add(1)))?;
                    result["verify"] = json!({ "other_transplant_agrees": again == d });
                }
                rep.result = result;
                Ok(rep)
            }
            ModelCmd::EpsBase { ctx, eps } => {
                let mut rep = self.report();
                let (model, v, base) = self.load_ctx(ctx, &mut rep)?;
                let eps = eps.unwrap_or(self.tol.eq_abs);
                rep.input("eps", json!(eps));
                let idx = model.epsilon_finite_base(&v, &base, eps);
                let sub: Vec<ModelVector> = idx.iter().map(|&i| base[i].clone()).collect();
                rep.residual("defect", model.acl_project(&sub, &v).sub(&model.acl_project(&base, &v)).norm());
                rep.result = json!({ "indices": idx });
                Ok(rep)
            }
            ModelCmd::AutoWitness { ctx, w } => {
                let mut rep = self.report();
                let (model, v, base) = self.load_ctx(ctx, &mut rep)?;
                let wv = io::load_vector(w, &model)?;
                rep.input("w", path_str(w));
                rep.result = match model.automorphism_witness(&v, &wv, &base) {
                    Ok(a) => {
                        rep.residual("witness", a.residual);
                        let blocks: Vec<Value> = a
                            .blocks
                            .iter()
                            .map(
                                |b| json!({ "block": b.block, "copies": b.copies, "unitary": matrix_json(&b.unitary) }),
                            )
                            .collect();
                        json!({ "types_equal": true, "blocks": blocks })
                    }
                    Err(CoreError::TypesDiffer) => json!({ "types_equal": false, "blocks": null }),
                    Err(e) => return Err(e.into()),
                };
                Ok(rep)
            }
        }
    }
}

fn paths_json(paths: &[PathBuf]) -> Value {
    Value::Array(paths.iter().map(|p| path_str(p)).collect())
}

fn load_vectors(paths: &[PathBuf], model: &ExtendedModel) -> Result<Vec<ModelVector>, CliError> {
    Ok(paths.iter().map(|p| io::load_vector(p, model)).collect::<Result<Vec<_>, _>>()?)
}

fn algebra_ref_of(rep_path: &Path) -> Result<String, CliError> {
    let file: io::RepresentationFile = io::read_manifest(rep_path, "representation")?;
    Ok(file.algebra_ref)
}

/// `S` with `S pi(a) v_psi = pi(a) v_phi`, on `GNS(phi) (+) GNS(psi)`.
pub fn rn_witness(phi: &Functional, psi: &Functional, tol: &Tolerance) -> Result<Option<CMatrix>, CoreError> {
    let (r1, v1) = gns(phi, tol)?;
    let (r2, v2) = gns(psi, tol)?;
    let joint = r1.direct_sum(&r2)?;
    let zero1 = vec![C64::new(0.0, 0.0); r1.dim()];
    let zero2 = vec![C64::new(0.0, 0.0); r2.dim()];
    let w: Vec<C64> = zero1.iter().chain(&v2).copied().collect();
    let v: Vec<C64> = v1.iter().chain(&zero2).copied().collect();
    radon_nikodym_witness(&joint, &w, &v, tol)
}

fn parse_shape(s: &str) -> Result<Vec<(usize, usize)>, CliError> {
    s.split(',')
        .map(|part| {
            let (n, m) = part
                .split_once('x')
                .ok_or_else(|| CliError::Usage(format!("shape entry {part:?} is not of the form NxM")))?;
            let n: usize = n.trim().parse().map_err(|_| CliError::Usage(format!("bad block size in {part:?}")))?;
            let m: usize = m.trim().parse().map_err(|_| CliError::Usage(format!("bad multiplicity in {part:?}")))?;
            if n == 0 || m == 0 {
                return Err(CliError::Usage(format!("shape entry {part:?} must be positive")));
            }
            Ok((n, m))
        })
        .collect()
}

fn parse_multiplicity(s: &str) -> Result<Multiplicity, CliError> {
    let t = s.trim();
    if t == "omega" {
        return Ok(Multiplicity::Omega);
    }
    t.parse()
        .map(Multiplicity::Finite)
        .map_err(|_| CliError::Usage(format!("multiplicity {t:?} is not an integer or omega")))
}

fn model_from_mults(alg: &Arc<Algebra>, mults: &[Multiplicity], tol: &Tolerance) -> Result<ExtendedModel, CliError> {
    let count = alg.structure()?.blocks.len();
    if mults.len() != count {
        return Err(CliError::Usage(format!("{} multiplicities given, the algebra has {count} blocks", mults.len())));
    }
    Ok(ExtendedModel::from_canonical(alg, mults, tol)?)
}

fn describe_algebra(alg: &Arc<Algebra>) -> Result<Value, CliError> {
    let s = alg.structure()?;
    let blocks: Vec<Value> =
        s.blocks.iter().map(|b| json!({ "dim": b.dim, "ambient_multiplicity": b.ambient_multiplicity })).collect();
    Ok(json!({
        "ambient_dim": alg.ambient_dim(),
        "dim": alg.dim(),
        "generators": alg.generator_coords().len(),
        "blocks": blocks,
    }))
}

fn describe_model(model: &ExtendedModel) -> Value {
    let blocks: Vec<Value> = model
        .blocks()
        .iter()
        .map(|b| {
            json!({
                "dim": b.dim(),
                "multiplicity": io::MultiplicityRepr::from_core(b.multiplicity),
                "algebra_block": b.canonical(),
            })
        })
        .collect();
    let alg = model.algebra();
    let ranks: Vec<Value> = match alg.structure() {
        Ok(s) => (0..s.blocks.len())
            .map(|i| alg.element(s.central_projection(i)).and_then(|p| model.rank(&p)).map_or(Value::Null, rank_json))
            .collect(),
        Err(_) => Vec::new(),
    };
    json!({ "blocks": blocks, "central_projection_ranks": ranks })
}
