use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use lowzero_core::bessel::{bessel_j_with, bessel_size_bound, methods};
use lowzero_core::classifier::{classify_pair, FormDescriptor};
use lowzero_core::explicit_formula::{
    admissible_u, conductor_term, family_average, nonvanishing_bounds, prime_sum, read_zeros, source_factories,
    zeros_side, CoefficientSource, FamilyKind, LDescriptor, SourceSpec, SupportTheorem,
};
use lowzero_core::kloosterman::{kloosterman_classical, kloosterman_nf, weil_ratio, weil_ratio_classical, weil_sweep, KloostermanInput};
use lowzero_core::nf::{Integral, QuadField};
use lowzero_core::petersson::{delta_prime_truncated, geometric_delta, kf_constant, size_of_newspace_main, PeterssonParams};
use lowzero_core::rmt::{ensemble, one_level_statistic, sample_eigenangles, ChainConfig};
use lowzero_core::testfn::{integral_against_kernel, Fejer};
use lowzero_core::{Error, Result};

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kloosterman sum and Weil ratio, or a sweep over moduli.
    Kloosterman(KloostermanArgs),
    /// J_nu(x) with a chosen evaluation method.
    Bessel(BesselArgs),
    /// Geometric side of the Petersson formula, term by term.
    Petersson(PeterssonArgs),
    /// Main term of the newspace size.
    Size(SizeArgs),
    /// One-level statistic of a random matrix ensemble.
    DensityRmt(DensityRmtArgs),
    /// One-level density averaged over a synthetic family.
    DensityFamily(DensityFamilyArgs),
    /// Both sides of the explicit formula for one form.
    Explicit(ExplicitArgs),
    /// Pole order for pairs of form descriptors read from JSON.
    DeltaClassify(DeltaClassifyArgs),
    /// Non-vanishing bounds and admissible support.
    Bounds(BoundsArgs),
}

#[derive(Debug, Args)]
pub struct KloostermanArgs {
    /// 1 for the rationals, otherwise squarefree d for Q(sqrt d).
    #[arg(long, default_value_t = 1)]
    pub field: i64,
    /// Integral element as `x` or `x,y` in the basis {1, w}.
    #[arg(long, default_value = "1")]
    pub alpha: String,
    #[arg(long, default_value = "1")]
    pub beta: String,
    /// Single modulus; exclusive with --bound.
    #[arg(long, conflicts_with = "bound", required_unless_present = "bound")]
    pub c: Option<String>,
    /// Sweep all moduli with |N(c)| up to this bound.
    #[arg(long)]
    pub bound: Option<u64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BesselArgs {
    #[arg(long)]
    pub nu: u32,
    #[arg(long)]
    pub x: f64,
    #[arg(long, default_value = "auto")]
    pub method: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PeterssonArgs {
    #[arg(long, default_value_t = 1)]
    pub field: i64,
    /// Weights, one per real embedding, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<u32>,
    /// Norm of a squarefree level.
    #[arg(long, default_value_t = 1)]
    pub level: u64,
    #[arg(long = "B")]
    pub b: u64,
    #[arg(long, default_value = "1")]
    pub alpha: String,
    #[arg(long, default_value = "1")]
    pub beta: String,
    /// Truncations of the level-sieved sum; both or neither.
    #[arg(long = "X", requires = "y_trunc")]
    pub x_trunc: Option<f64>,
    #[arg(long = "Y", requires = "x_trunc")]
    pub y_trunc: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SizeArgs {
    #[arg(long, default_value_t = 1)]
    pub field: i64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    pub level: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DensityRmtArgs {
    /// Ensemble name: U, SOeven, SOodd or Sp.
    #[arg(long)]
    pub kind: String,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long)]
    pub u: f64,
    #[arg(long)]
    pub seed: u64,
    /// Total recorded samples over all chains.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DensityFamilyArgs {
    /// O for the orthogonal family, Sp for the Rankin-Selberg family.
    #[arg(long)]
    pub kind: String,
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long)]
    pub u: f64,
    #[arg(long, default_value_t = 1)]
    pub field: i64,
    #[arg(long = "Q")]
    pub q: u64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ExplicitArgs {
    #[arg(long, default_value_t = 1)]
    pub field: i64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    pub level: u64,
    #[arg(long)]
    pub u: f64,
    #[arg(long = "R")]
    pub r: f64,
    /// Prime cutoff; defaults to ceil(R^u).
    #[arg(long = "Q")]
    pub q: Option<u64>,
    /// Coefficient source: file, sato-tate or zero.
    #[arg(long, default_value = "file")]
    pub source: String,
    /// `prime_norm,lambda` file for the file source.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Zero ordinates, one per line.
    #[arg(long)]
    pub zeros: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DeltaClassifyArgs {
    /// JSON array of `{"f": descriptor, "g": descriptor}` objects.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub u: f64,
    /// With --level, also report the admissible support.
    #[arg(long, value_delimiter = ',', requires = "level")]
    pub k: Option<Vec<u32>>,
    #[arg(long, requires = "k")]
    pub level: Option<u64>,
    #[command(flatten)]
    pub output: Output,
}

/// A table inside `result` rendered as CSV rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableSpec {
    pub key: &'static str,
    pub columns: &'static [&'static str],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: RunConfig,
    pub result: Value,
    #[serde(skip)]
    pub table: Option<TableSpec>,
}

fn path_string(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.display().to_string())
}

fn base(subcommand: &str, output: &Output) -> RunConfig {
    RunConfig { subcommand: subcommand.into(), out: path_string(&output.out), format: output.format, ..Default::default() }
}

fn parse_integral(field: &QuadField, s: &str) -> Result<Integral> {
    let bad = || Error::InvalidInput(format!("`{s}` is not an integral element `x` or `x,y`"));
    let mut parts = s.split(',').map(|p| p.trim().parse::<i64>());
    let x = parts.next().ok_or_else(bad)?.map_err(|_| bad())?;
    let y = match parts.next() {
        Some(v) => v.map_err(|_| bad())?,
        None => 0,
    };
    if parts.next().is_some() || (field.is_rational() && y != 0) {
        return Err(bad());
    }
    Ok(Integral::new(x, y))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

impl Command {
    pub fn output(&self) -> &Output {
        match self {
            Command::Kloosterman(a) => &a.output,
            Command::Bessel(a) => &a.output,
            Command::Petersson(a) => &a.output,
            Command::Size(a) => &a.output,
            Command::DensityRmt(a) => &a.output,
            Command::DensityFamily(a) => &a.output,
            Command::Explicit(a) => &a.output,
            Command::DeltaClassify(a) => &a.output,
            Command::Bounds(a) => &a.output,
        }
    }

    pub fn config(&self) -> RunConfig {
        match self {
            Command::Kloosterman(a) => RunConfig {
                field: Some(a.field),
                alpha: Some(a.alpha.clone()),
                beta: Some(a.beta.clone()),
                c: a.c.clone(),
                bound: a.bound,
                ..base("kloosterman", &a.output)
            },
            Command::Bessel(a) => RunConfig {
                nu: Some(a.nu),
                x: Some(a.x),
                method: Some(a.method.clone()),
                ..base("bessel", &a.output)
            },
            Command::Petersson(a) => RunConfig {
                field: Some(a.field),
                k: Some(a.k.clone()),
                level: Some(a.level),
                b: Some(a.b),
                alpha: Some(a.alpha.clone()),
                beta: Some(a.beta.clone()),
                x_trunc: a.x_trunc,
                y_trunc: a.y_trunc,
                ..base("petersson", &a.output)
            },
            Command::Size(a) => RunConfig {
                field: Some(a.field),
                k: Some(a.k.clone()),
                level: Some(a.level),
                ..base("size", &a.output)
            },
            Command::DensityRmt(a) => RunConfig {
                kind: Some(a.kind.clone()),
                n: Some(a.n),
                u: Some(a.u),
                seed: Some(a.seed),
                samples: Some(a.samples),
                chains: Some(a.chains),
                ..base("density-rmt", &a.output)
            },
            Command::DensityFamily(a) => RunConfig {
                kind: Some(a.kind.clone()),
                m: Some(a.m),
                u: Some(a.u),
                field: Some(a.field),
                q: Some(a.q),
                seed: Some(a.seed),
                ..base("density-family", &a.output)
            },
            Command::Explicit(a) => RunConfig {
                field: Some(a.field),
                k: Some(a.k.clone()),
                level: Some(a.level),
                u: Some(a.u),
                r: Some(a.r),
                q: a.q,
                source: Some(a.source.clone()),
                input: path_string(&a.input),
                seed: a.seed,
                zeros: path_string(&a.zeros),
                ..base("explicit", &a.output)
            },
            Command::DeltaClassify(a) => RunConfig {
                input: Some(a.input.display().to_string()),
                ..base("delta-classify", &a.output)
            },
            Command::Bounds(a) => RunConfig {
                u: Some(a.u),
                k: a.k.clone(),
                level: a.level,
                ..base("bounds", &a.output)
            },
        }
    }

    pub fn execute(&self) -> Result<Report> {
        let (result, table) = match self {
            Command::Kloosterman(a) => kloosterman(a)?,
            Command::Bessel(a) => (bessel(a)?, None),
            Command::Petersson(a) => petersson(a)?,
            Command::Size(a) => (size(a)?, None),
            Command::DensityRmt(a) => (density_rmt(a)?, None),
            Command::DensityFamily(a) => (density_family(a)?, None),
            Command::Explicit(a) => (explicit(a)?, None),
            Command::DeltaClassify(a) => delta_classify(a)?,
            Command::Bounds(a) => (bounds(a)?, None),
        };
        Ok(Report { config: self.config(), result, table })
    }
}

type Outcome = (Value, Option<TableSpec>);

fn kloosterman(a: &KloostermanArgs) -> Result<Outcome> {
    let field = QuadField::new(a.field)?;
    let alpha = parse_integral(&field, &a.alpha)?;
    let beta = parse_integral(&field, &a.beta)?;
    if let Some(bound) = a.bound {
        let rows = weil_sweep(&field, alpha, beta, bound)?;
        let max = rows.iter().map(|r| r.2).fold(0.0, f64::max);
        let rows: Vec<Value> = rows.iter().map(|(n, s, w)| json!({"c_norm": n, "value": s, "weil_ratio": w})).collect();
        let table = TableSpec { key: "sums", columns: &["c_norm", "value", "weil_ratio"] };
        return Ok((json!({"max_weil_ratio": max, "sums": rows}), Some(table)));
    }
    let c = parse_integral(&field, a.c.as_deref().unwrap_or_default())?;
    let (value, ratio) = if field.is_rational() {
        if c.x <= 0 {
            return Err(Error::InvalidInput("modulus must be positive".into()));
        }
        let c = c.x as u64;
        (kloosterman_classical(alpha.x, beta.x, c), weil_ratio_classical(alpha.x, beta.x, c))
    } else {
        let input = KloostermanInput { field: &field, alpha, beta, c };
        (kloosterman_nf(&input)?, weil_ratio(&input)?)
    };
    Ok((json!({"value": value, "weil_ratio": ratio}), None))
}

fn bessel(a: &BesselArgs) -> Result<Value> {
    let method = methods().get(&a.method)?;
    let value = bessel_j_with(method.as_ref(), a.nu, a.x)?;
    Ok(json!({"value": value, "size_bound": bessel_size_bound(a.nu, a.x)}))
}

fn petersson(a: &PeterssonArgs) -> Result<Outcome> {
    let field = QuadField::new(a.field)?;
    let alpha = parse_integral(&field, &a.alpha)?;
    let beta = parse_integral(&field, &a.beta)?;
    let level = field.level_ideal_of_norm(a.level)?;
    let mut params = PeterssonParams::new(field.clone(), a.k.clone(), level, a.b)?;
    let g = geometric_delta(&params, alpha, beta)?;
    let terms: Vec<Value> = g
        .terms
        .iter()
        .map(|t| {
            json!({
                "c_norm": t.c_norm,
                "c": t.c.to_string(),
                "epsilon": t.epsilon.to_string(),
                "kloosterman": t.kloosterman,
                "bessel": t.bessel,
                "term": t.term,
                "envelope": t.envelope,
            })
        })
        .collect();
    let mut result = json!({
        "diagonal": g.diagonal,
        "correction": g.correction,
        "total": g.value(),
        "envelope": g.envelope,
        "order": g.order,
        "terms": terms,
    });
    if let (Some(x), Some(y)) = (a.x_trunc, a.y_trunc) {
        params = params.with_xy(x, y)?;
        let ideal = field.principal_ideal(beta)?;
        result["delta_prime"] = to_value(&delta_prime_truncated(&params, &ideal)?);
    }
    let table = TableSpec { key: "terms", columns: &["c_norm", "c", "epsilon", "kloosterman", "bessel", "term", "envelope"] };
    Ok((result, Some(table)))
}

fn size(a: &SizeArgs) -> Result<Value> {
    let field = QuadField::new(a.field)?;
    let level = field.level_ideal_of_norm(a.level)?;
    let value = size_of_newspace_main(&field, &a.k, &level)?;
    Ok(json!({"main_term": value, "kf_constant": kf_constant(&field)}))
}

fn density_rmt(a: &DensityRmtArgs) -> Result<Value> {
    let ens = ensemble(&a.kind)?;
    let phi = Fejer::new(a.u)?;
    let cfg = ChainConfig::standard(a.n, a.samples, a.chains, a.seed);
    let chains = sample_eigenangles(ens.as_ref(), a.n, &cfg)?;
    let stat = one_level_statistic(&chains, &phi, ens.as_ref())?;
    let acceptance: Vec<f64> = chains.iter().map(|c| c.acceptance).collect();
    Ok(json!({
        "mean": stat.mean,
        "stderr": stat.stderr,
        "samples": stat.samples,
        "prediction": integral_against_kernel(a.u, &a.kind)?,
        "acceptance": acceptance,
        "chain": to_value(&cfg),
    }))
}

fn density_family(a: &DensityFamilyArgs) -> Result<Value> {
    let kind = match a.kind.as_str() {
        "O" => FamilyKind::Orthogonal,
        "Sp" => FamilyKind::RsSymplectic,
        other => return Err(Error::UnknownName { kind: "family", name: other.into() }),
    };
    let field = QuadField::new(a.field)?;
    Ok(to_value(&family_average(kind, a.m, a.u, &field, a.seed, a.q)?))
}

fn explicit(a: &ExplicitArgs) -> Result<Value> {
    let field = QuadField::new(a.field)?;
    let phi = Fejer::new(a.u)?;
    if !(a.r > 1.0) {
        return Err(Error::InvalidInput("R must exceed 1".into()));
    }
    let q = a.q.unwrap_or_else(|| a.r.powf(a.u).ceil() as u64);
    let level = field.level_ideal_of_norm(a.level)?;
    let desc = LDescriptor::hmf(&field, &a.k, level)?;
    let spec = SourceSpec { field: field.clone(), cutoff: q, seed: a.seed, path: a.input.clone() };
    let source: Arc<dyn CoefficientSource> = source_factories().get(&a.source)?.build(&spec)?;
    let cond = conductor_term(&desc, &phi, a.r)?;
    let delta_term = -(desc.delta as f64) / 2.0 * phi.eval(0.0);
    let ps = prime_sum(&desc, &phi, a.r, source.as_ref(), &field, q)?;
    let mut result = json!({
        "conductor_term": cond,
        "delta_term": delta_term,
        "prime_sum": ps,
        "prime_side": cond + delta_term - ps,
        "prime_cutoff": q,
    });
    if let Some(path) = &a.zeros {
        let zeros = read_zeros(path)?;
        result["zeros_side"] = json!(zeros_side(&zeros, &phi, a.r)?);
        result["zero_count"] = json!(zeros.len());
    }
    Ok(result)
}

#[derive(Deserialize)]
struct Pair {
    f: FormDescriptor,
    g: FormDescriptor,
}

fn delta_classify(a: &DeltaClassifyArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&a.input)?;
    let pairs: Vec<Pair> = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut rows = Vec::with_capacity(pairs.len());
    for p in &pairs {
        let case = classify_pair(&p.f, &p.g)?;
        rows.push(json!({"f": p.f.id, "g": p.g.id, "delta": case.value(), "case": case.label()}));
    }
    let table = TableSpec { key: "pairs", columns: &["f", "g", "delta", "case"] };
    Ok((json!({"pairs": rows}), Some(table)))
}

fn bounds(a: &BoundsArgs) -> Result<Value> {
    let mut result = to_value(&nonvanishing_bounds(a.u)?);
    if let (Some(k), Some(level)) = (&a.k, a.level) {
        result["admissible_u_hmf"] = json!(admissible_u(SupportTheorem::Hmf, k, level)?);
        result["admissible_u_rankin_selberg"] = json!(admissible_u(SupportTheorem::RankinSelberg, k, level)?);
    }
    Ok(result)
}
