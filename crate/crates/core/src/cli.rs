//! Command-line surface: argument parsing, group loading, and report emission.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cohomology::{inflation_h2_surjective, Cochain, DEFAULT_MAX_ORDER};
use crate::error::{Error, Result};
use crate::fingroup::{make_extension, CatalogParams, FinGroup, GroupSpec};
use crate::obstruction::{
    psi_closed_form, psi_cocycle, psi_generic, psi_m2_formula, verify_theorem, Context, Limits, Mode, PhiMap,
    DEFAULT_MAX_GAMMAS, DEFAULT_MAX_MAPS,
};
use crate::zmodlin::{RingConfig, ZMat};

/// Exit codes.
pub const EXIT_OK: i32 = 0;
/// Internal failure: a computed object violated an identity it must satisfy.
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
/// `G` is not free over `Z/l^n`.
pub const EXIT_NOT_FREE: i32 = 3;
pub const EXIT_SIZE_BOUND: i32 = 4;
pub const EXIT_EQUIVARIANCE: i32 = 5;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::InvalidRing(_)
        | Error::DimensionMismatch(_)
        | Error::NotAGroup { .. }
        | Error::NotEllGroup { .. }
        | Error::GeneratorsDontGenerate { .. }
        | Error::InconsistentPresentation(_)
        | Error::UnknownCatalogEntry(_)
        | Error::InvalidModule(_)
        | Error::GammaNotInSocleLevel { .. }
        | Error::WrongLevel(_) => EXIT_PARSE,
        Error::QuotientNotFree { .. } | Error::NotFreeModule(_) => EXIT_NOT_FREE,
        Error::SizeBound(_) => EXIT_SIZE_BOUND,
        Error::NotEquivariant { .. } => EXIT_EQUIVARIANCE,
        Error::NotNormal { .. }
        | Error::NotACocycle
        | Error::SectionNotLinear
        | Error::PairingMismatch(_)
        | Error::NormalityFailure { .. } => EXIT_INTERNAL,
    }
}

#[derive(Debug, Parser)]
#[command(name = "galmod", version, about = "Socle series, cohomology and the obstruction Psi for finite l-groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Socle series of J = Hom(H, Z/l^n).
    Socle(RunConfig),
    /// Psi for maps read from a file, enumerated, or sampled.
    Obstruction(RunConfig),
    /// Both directions of the theorem, with the hypothesis check.
    Verify(RunConfig),
    /// Whether inflation H^2(G) -> H^2(𝒢) is surjective.
    Hypothesis(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Routes {
    Generic,
    Closed,
    M2,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Catalog group name.
    #[arg(long, conflicts_with = "group_file", required_unless_present = "group_file")]
    pub catalog: Option<String>,
    /// Group JSON file.
    #[arg(long)]
    pub group_file: Option<PathBuf>,
    /// Catalog parameters, e.g. `d=2,ell=2,n=1` or `orders=2:4`.
    #[arg(long, default_value = "")]
    pub params: String,
    /// Defaults to the prime of the group.
    #[arg(long)]
    pub ell: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, conflicts_with = "samples")]
    pub exhaustive: bool,
    /// Number of seeded draws; requires `--seed`.
    #[arg(long, requires = "seed")]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    pub max_order: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_MAPS)]
    pub max_maps: u64,
    #[arg(long, value_enum, default_value_t = Routes::All)]
    pub routes: Routes,
    /// φ JSON file `{"m": m, "matrix": [[..], ..]}`.
    #[arg(long)]
    pub phi_file: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub dump_cochains: bool,
}

impl RunConfig {
    fn mode(&self) -> Mode {
        match self.samples {
            Some(count) => Mode::Sampled { seed: self.seed.unwrap_or(0), count },
            None => Mode::Exhaustive,
        }
    }
}

/// `k=v,k=v` into catalog parameters.
pub fn parse_params(s: &str) -> Result<CatalogParams> {
    s.split(',')
        .filter(|kv| !kv.trim().is_empty())
        .map(|kv| match kv.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
            _ => Err(Error::Parse(format!("expected key=value, got {kv:?}"))),
        })
        .collect()
}

/// The group and a stable display name for reports.
pub fn load_group(config: &RunConfig) -> Result<(FinGroup, String)> {
    let mut params = parse_params(&config.params)?;
    match (&config.catalog, &config.group_file) {
        (Some(name), _) => {
            if let Some(ell) = config.ell {
                params.entry("ell".into()).or_insert_with(|| ell.to_string());
            }
            let label = if params.is_empty() {
                name.clone()
            } else {
                let kv: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                format!("{name}({})", kv.join(","))
            };
            let spec = GroupSpec::Catalog { catalog: name.clone(), params };
            Ok((spec.build(config.ell.unwrap_or(2))?, label))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let spec = GroupSpec::parse(&text)?;
            Ok((spec.build(config.ell.unwrap_or(2))?, path.display().to_string()))
        }
        (None, None) => Err(Error::Parse("one of --catalog or --group-file is required".into())),
    }
}

fn context(config: &RunConfig) -> Result<(Context, String)> {
    let (group, label) = load_group(config)?;
    let ring = RingConfig::new(config.ell.unwrap_or(group.ell()), config.n)?;
    let ext = make_extension(&group, ring)?;
    Ok((Context::new(ext, config.m)?, label))
}

#[derive(Debug, Deserialize)]
struct PhiFile {
    m: usize,
    matrix: Vec<Vec<u64>>,
}

/// Reads and validates a φ file against the context.
pub fn read_phi(ctx: &Context, path: &PathBuf) -> Result<PhiMap> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let file: PhiFile = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.m != ctx.m {
        return Err(Error::Parse(format!("phi file is for m = {}, run uses m = {}", file.m, ctx.m)));
    }
    let cols = ctx.j.rank();
    if file.matrix.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch(format!("phi rows must have {cols} entries")));
    }
    PhiMap::new(ctx, ZMat::from_rows(&file.matrix, cols, ctx.ext.ring)?)
}

/// SHA-256 of the cochain's JSON dump.
pub fn cocycle_hash(c: &Cochain) -> String {
    let digest = Sha256::digest(c.to_json().to_string().as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Runs one command and returns the rendered report.
pub fn run(command: &Command) -> Result<String> {
    match command {
        Command::Socle(c) => render(c, socle(c)?),
        Command::Obstruction(c) => render(c, obstruction(c)?),
        Command::Verify(c) => render(c, verify(c)?),
        Command::Hypothesis(c) => render(c, hypothesis(c)?),
    }
}

fn render(config: &RunConfig, report: Value) -> Result<String> {
    let body = match config.format {
        Format::Json => serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))? + "\n",
        Format::Text => text_summary(&report),
    };
    match &config.out {
        Some(path) => {
            std::fs::write(path, &body).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(body),
    }
}

/// `key: value` lines for the scalar fields, one level of nesting flattened.
fn text_summary(report: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = report {
        for (k, v) in map {
            match v {
                Value::Object(inner) => {
                    for (k2, v2) in inner {
                        let _ = writeln!(out, "{k}.{k2}: {v2}");
                    }
                }
                Value::Array(items) if items.iter().any(|x| x.is_object()) => {
                    let _ = writeln!(out, "{k}: {} entries", items.len());
                }
                _ => {
                    let _ = writeln!(out, "{k}: {v}");
                }
            }
        }
    }
    out
}

fn socle(config: &RunConfig) -> Result<Value> {
    let (group, label) = load_group(config)?;
    let ring = RingConfig::new(config.ell.unwrap_or(group.ell()), config.n)?;
    let ext = make_extension(&group, ring)?;
    let j = crate::gmodule::module_j(&ext)?;
    let gr = crate::gmodule::GroupRing::new(ext.quotient.clone(), ring)?;
    let chain = crate::gmodule::socle_series(&j, &gr)?;
    Ok(json!({
        "group": label,
        "ell": ring.ell(),
        "n": ring.n(),
        "order": group.order(),
        "h_order": ext.kernel.order(),
        "d": ext.d(),
        "j_orders": j.orders(),
        "socle_ranks": chain.ranks,
        "stabilization": chain.stabilization,
    }))
}

#[derive(Debug, Serialize)]
struct RouteBits {
    generic_equals_closed: Option<bool>,
    m2_cohomologous: Option<bool>,
}

fn obstruction(config: &RunConfig) -> Result<Value> {
    let (ctx, label) = context(config)?;
    let ring = ctx.ext.ring;
    let phis: Vec<PhiMap> = match (&config.phi_file, config.mode()) {
        (Some(path), _) => vec![read_phi(&ctx, path)?],
        (None, Mode::Exhaustive) => {
            let sq = ctx.hom_g_structure()?;
            let size = (ring.ell() as f64).powi(sq.log_order() as i32);
            if size > config.max_maps as f64 {
                return Err(Error::SizeBound(format!("{size} maps exceed --max-maps {}", config.max_maps)));
            }
            sq.enumerate()
                .iter()
                .map(|c| PhiMap::new(&ctx, ctx.hom.to_matrix(&ctx.hom.module.reduce(c))))
                .collect::<Result<_>>()?
        }
        (None, Mode::Sampled { seed, count }) => {
            let sq = ctx.hom_g_structure()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let c = crate::obstruction::random_element(&sq, &mut rng, ring, ctx.hom.module.rank());
                    PhiMap::new(&ctx, ctx.hom.to_matrix(&ctx.hom.module.reduce(&c)))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut records = vec![];
    let mut zero_class_count = 0;
    for phi in &phis {
        let (psi, witness, bits) = match config.routes {
            Routes::All => {
                let r = psi_generic(&ctx, phi)?;
                let bits = RouteBits {
                    generic_equals_closed: Some(r.routes.generic_equals_closed),
                    m2_cohomologous: r.routes.m2_formula.as_ref().map(|_| r.routes.m2_difference_witness.is_some()),
                };
                (r.psi_cocycle, r.witness, bits)
            }
            route => {
                let psi = match route {
                    Routes::Generic => psi_cocycle(&ctx, phi)?,
                    Routes::Closed => psi_closed_form(&ctx, phi),
                    _ => psi_m2_formula(&ctx, phi)?,
                };
                let witness = ctx.h3_solver().witness(&psi)?;
                (psi, witness, RouteBits { generic_equals_closed: None, m2_cohomologous: None })
            }
        };
        zero_class_count += usize::from(witness.is_some());
        let mut record = json!({
            "phi": phi.rows(),
            "psi_hash": cocycle_hash(&psi),
            "is_zero_class": witness.is_some(),
            "routes": bits,
        });
        if config.dump_cochains {
            record["psi"] = psi.to_json();
            record["witness"] = witness.map_or(Value::Null, |w| w.to_json());
        }
        records.push(record);
    }
    Ok(json!({
        "group": label,
        "ell": ring.ell(),
        "n": ring.n(),
        "m": ctx.m,
        "d": ctx.ext.d(),
        "routes": format!("{:?}", config.routes).to_lowercase(),
        "records": records,
        "zero_class_count": zero_class_count,
    }))
}

fn verify(config: &RunConfig) -> Result<Value> {
    let (ctx, label) = context(config)?;
    let limits = Limits { max_order: config.max_order, max_maps: config.max_maps, max_gammas: DEFAULT_MAX_GAMMAS };
    let report = verify_theorem(&ctx, &label, config.mode(), limits)?;
    serde_json::to_value(report).map_err(|e| Error::Parse(e.to_string()))
}

fn hypothesis(config: &RunConfig) -> Result<Value> {
    let (group, label) = load_group(config)?;
    let ring = RingConfig::new(config.ell.unwrap_or(group.ell()), config.n)?;
    let ext = make_extension(&group, ring)?;
    let r = inflation_h2_surjective(&ext, config.max_order)?;
    Ok(json!({
        "group": label,
        "ell": ring.ell(),
        "n": ring.n(),
        "d": ext.d(),
        "holds": r.holds,
        "h2_total_dim": r.h2_total_dim,
        "inflated_dim": r.inflated_dim,
    }))
}

/// Entry point for the binary: returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    match run(&cli.command) {
        Ok(out) => {
            print!("{out}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
