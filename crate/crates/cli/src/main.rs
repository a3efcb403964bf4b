//! Command-line front end: catalog queries, degree and stability reports,
//! exact pullback invariants, Green potential iteration, and wedge-pairing
//! experiments, emitting deterministic JSON/CSV artifacts for a fixed seed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use pseudodyn_core::degrees::degrees_csv;
use pseudodyn_core::rational::format_rat;
use pseudodyn_core::spectral::PairMethod;
use pseudodyn_core::wedge::Region;
use pseudodyn_core::{
    catalog, catalog_map, check_log_concavity, check_pseudo_identities, degree_sequence,
    dyn_degree_estimate, dynamical_lambdas, green_iterate, invariance_residual,
    involution_experiment, pair_left, pair_right, perron_pair, perron_pair_cesaro,
    positivity_scan, slice_experiment, stability_report, CoreError, InvariantPair, RationalMap,
    VERSION,
};

#[derive(Parser)]
#[command(name = "pseudodyn", version = VERSION)]
struct Cli {
    /// Write the artifact to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 keeps the library default, 1 forces sequential runs.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the built-in map catalog.
    Catalog,
    /// Degree sequence of the reduced iterates, as CSV.
    Degrees(DegreesArgs),
    /// Compare iterate degrees against d1^n and the certified spectral radius.
    Stability(StabilityArgs),
    /// Exact pullback/pushforward identities and the invariant class pair.
    Invariants(InvariantsArgs),
    /// Green potential iteration over unit-sphere samples.
    Green(GreenArgs),
    /// Monte Carlo wedge-pairing experiment from a JSON experiment file.
    Wedge(WedgeArgs),
    /// Combined degrees/stability/invariants report for one map.
    Report(ReportArgs),
}

#[derive(Args)]
struct DegreesArgs {
    /// Catalog name or path to a map JSON file.
    #[arg(long)]
    map: String,
    /// Number of iterates, 1..=8.
    #[arg(long, default_value_t = 4)]
    nmax: u32,
}

#[derive(Args)]
struct StabilityArgs {
    #[arg(long)]
    map: String,
    #[arg(long, default_value_t = 6)]
    nmax: u32,
}

#[derive(Args)]
struct InvariantsArgs {
    #[arg(long)]
    map: String,
    /// Cesàro terms used when the dominant eigenvalue is not simple, 2..=100.
    #[arg(long = "N", default_value_t = 64)]
    n: u32,
}

#[derive(Args)]
struct GreenArgs {
    #[arg(long)]
    map: String,
    /// Recursion depth, 2..=100.
    #[arg(long = "N", default_value_t = 12)]
    n: u32,
    /// Sphere samples, 1..=65536.
    #[arg(long, default_value_t = 512)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct WedgeArgs {
    /// Path to the experiment JSON file.
    #[arg(long)]
    exp: PathBuf,
    /// Override the experiment file's eps schedule (comma separated, strictly decreasing).
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Override the experiment file's sample count, 1..=65536.
    #[arg(long)]
    samples: Option<usize>,
    /// Override the experiment file's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    map: String,
    #[arg(long, default_value_t = 4)]
    nmax: u32,
    #[arg(long = "N", default_value_t = 64)]
    n: u32,
}

/// Experiment file: a named preset plus knob overrides.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpSpec {
    preset: String,
    #[serde(default)]
    n_samples: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    eps_schedule: Option<Vec<f64>>,
    #[serde(default)]
    region: Option<RegionSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionSpec {
    lo: [f64; 6],
    hi: [f64; 6],
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        Self {
            code: if e.is_numerical_guard() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let text = match &cli.command {
        Cmd::Catalog => {
            let config = json!({ "command": "catalog", "threads": cli.threads });
            envelope(config, cmd_catalog())
        }
        Cmd::Degrees(args) => {
            let config = json!({
                "command": "degrees", "map": args.map, "nmax": args.nmax,
                "threads": cli.threads,
            });
            csv_with_header(&config, &cmd_degrees(args)?)
        }
        Cmd::Stability(args) => {
            let config = json!({
                "command": "stability", "map": args.map, "nmax": args.nmax,
                "threads": cli.threads,
            });
            envelope(config, cmd_stability(args)?)
        }
        Cmd::Invariants(args) => {
            let config = json!({
                "command": "invariants", "map": args.map, "N": args.n,
                "threads": cli.threads,
            });
            envelope(config, cmd_invariants(args)?)
        }
        Cmd::Green(args) => {
            let config = json!({
                "command": "green", "map": args.map, "N": args.n,
                "samples": args.samples, "seed": args.seed, "threads": cli.threads,
            });
            envelope(config, cmd_green(args)?)
        }
        Cmd::Wedge(args) => {
            let config = json!({
                "command": "wedge", "exp": args.exp.display().to_string(),
                "eps": args.eps, "samples": args.samples, "seed": args.seed,
                "threads": cli.threads,
            });
            envelope(config, cmd_wedge(args)?)
        }
        Cmd::Report(args) => {
            let config = json!({
                "command": "report", "map": args.map, "nmax": args.nmax,
                "N": args.n, "threads": cli.threads,
            });
            envelope(config, cmd_report(args)?)
        }
    };
    emit(cli.out.as_deref(), &text)
}

fn envelope(config: Value, result: Value) -> String {
    let doc = json!({ "version": VERSION, "config": config, "result": result });
    let mut s = serde_json::to_string_pretty(&doc).expect("report is serializable");
    s.push('\n');
    s
}

fn csv_with_header(config: &Value, body: &str) -> String {
    format!("# version: {VERSION}\n# config: {config}\n{body}")
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::validation(format!("out: cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_nmax(nmax: u32) -> Result<(), CliError> {
    if !(1..=8).contains(&nmax) {
        return Err(CliError::validation("nmax: must be between 1 and 8"));
    }
    Ok(())
}

fn check_samples(samples: usize) -> Result<(), CliError> {
    if !(1..=65536).contains(&samples) {
        return Err(CliError::validation("samples: must be between 1 and 65536"));
    }
    Ok(())
}

fn check_depth(n: u32) -> Result<(), CliError> {
    if !(2..=100).contains(&n) {
        return Err(CliError::validation("N: must be between 2 and 100"));
    }
    Ok(())
}

/// Looks `name_or_path` up in the catalog, then falls back to reading it as a map
/// JSON file.
fn resolve_map(name_or_path: &str) -> Result<RationalMap, CliError> {
    if let Some(m) = catalog_map(name_or_path) {
        return Ok(m);
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("map: cannot read {name_or_path}: {e}")))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("map: {name_or_path}: {e}")))?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .map(str::to_owned);
        return Ok(RationalMap::from_json(&v, name)?);
    }
    let names: Vec<&str> = catalog().iter().map(|e| e.name).collect();
    Err(CliError::validation(format!(
        "map: '{name_or_path}' is neither a catalog name nor a file; catalog: {}",
        names.join(", ")
    )))
}

fn cmd_catalog() -> Value {
    let rows: Vec<Value> = catalog()
        .iter()
        .map(|e| {
            json!({
                "name": e.name,
                "summary": e.summary,
                "degree": e.map.degree,
                "pseudo_automorphism": e.map.flags.is_pseudo_automorphism,
                "one_stable_downstairs": e.map.flags.is_1_stable_downstairs,
                "has_inverse": e.map.inverse.is_some(),
                "has_action": e.map.action.is_some(),
                "monomial": e.map.monomial_matrix.is_some(),
            })
        })
        .collect();
    json!({ "maps": rows })
}

fn cmd_degrees(args: &DegreesArgs) -> Result<String, CliError> {
    check_nmax(args.nmax)?;
    let f = resolve_map(&args.map)?;
    let seq = degree_sequence(&f, args.nmax)?;
    let rho = dynamical_lambdas(&f).ok().map(|l| l[1]);
    Ok(degrees_csv(&seq, rho))
}

fn cmd_stability(args: &StabilityArgs) -> Result<Value, CliError> {
    check_nmax(args.nmax)?;
    let f = resolve_map(&args.map)?;
    let rep = stability_report(&f, args.nmax)?;
    serde_json::to_value(&rep).map_err(|e| CliError::validation(e.to_string()))
}

fn invariant_pair_json(pair: &InvariantPair) -> Value {
    let method = match pair.method {
        PairMethod::ExactKernel => "exact_kernel",
        PairMethod::InverseIteration => "inverse_iteration",
        PairMethod::Cesaro => "cesaro",
    };
    json!({
        "method": method,
        "lambda1": pair.lambda1_f64(),
        "lambda1_enclosure": [format_rat(&pair.lambda1.0), format_rat(&pair.lambda1.1)],
        "theta_plus": pair.theta_plus.to_json_value(),
        "eta_minus": pair.eta_minus.to_json_value(),
        "normalized": pair.normalized,
    })
}

fn invariants_payload(f: &RationalMap, map_arg: &str, n_terms: u32) -> Result<Value, CliError> {
    let action = f.action.as_ref().ok_or_else(|| {
        CliError::validation(format!("map: '{map_arg}' carries no cohomology action"))
    })?;
    let identities = check_pseudo_identities(action);
    let pair = match perron_pair(action) {
        Ok(p) => p,
        Err(CoreError::NonsimpleDominant) => perron_pair_cesaro(action, n_terms)?,
        Err(e) => return Err(e.into()),
    };
    Ok(json!({
        "identities": {
            "pass": identities.pass,
            "pushforward_pullback": identities.pushforward_pullback_identity,
            "pairing_invariant": identities.pairing_invariant,
            "violations": identities.violations,
        },
        "invariant_pair": invariant_pair_json(&pair),
        "cesaro_terms": n_terms,
    }))
}

fn cmd_invariants(args: &InvariantsArgs) -> Result<Value, CliError> {
    check_depth(args.n)?;
    let f = resolve_map(&args.map)?;
    let mut payload = invariants_payload(&f, &args.map, args.n)?;
    payload["map"] = json!(f.id_string());
    Ok(payload)
}

fn cmd_green(args: &GreenArgs) -> Result<Value, CliError> {
    check_depth(args.n)?;
    check_samples(args.samples)?;
    let f = resolve_map(&args.map)?;
    let lambda = f64::from(f.degree);
    let key = cache_key(&[
        "green",
        &f.id_string(),
        &args.n.to_string(),
        &args.samples.to_string(),
        &args.seed.to_string(),
        VERSION,
    ]);
    if let Some(v) = cache_read(&key) {
        return Ok(v);
    }
    let field = green_iterate(&f, lambda, args.n, args.samples, args.seed)?;
    let residual = match invariance_residual(&field, &f, lambda) {
        Ok(r) => Some(r),
        Err(CoreError::NotConverged { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let finals: Vec<f64> = field.final_values().iter().flatten().copied().collect();
    let masked: Vec<usize> = (0..field.n_iters()).map(|m| field.masked_count(m)).collect();
    let extremum = |init: f64, f: fn(f64, f64) -> f64| {
        if finals.is_empty() {
            Value::Null
        } else {
            json!(finals.iter().copied().fold(init, f))
        }
    };
    let result = json!({
        "map": field.map_id,
        "lambda": field.lambda,
        "n_iters": field.n_iters(),
        "samples": field.samples.len(),
        "seed": field.seed,
        "shift": field.shift,
        "sup_deltas": field.sup_deltas,
        "masked_counts": masked,
        "final_defined": finals.len(),
        "final_min": extremum(f64::INFINITY, f64::min),
        "final_max": extremum(f64::NEG_INFINITY, f64::max),
        "converged": residual.is_some(),
        "invariance_residual": residual,
        "csv": field.csv(),
    });
    cache_write(&key, &result);
    Ok(result)
}

fn cmd_wedge(args: &WedgeArgs) -> Result<Value, CliError> {
    let text = fs::read_to_string(&args.exp).map_err(|e| {
        CliError::validation(format!("exp: cannot read {}: {e}", args.exp.display()))
    })?;
    let file: ExpSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("exp: {e}")))?;
    let n_samples = args.samples.or(file.n_samples).unwrap_or(20_000);
    check_samples(n_samples)?;
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let mut exp = match file.preset.as_str() {
        "slice" => slice_experiment(n_samples, seed),
        "involution" => involution_experiment(n_samples, seed),
        other => {
            return Err(CliError::validation(format!(
                "preset: unknown '{other}' (expected 'slice' or 'involution')"
            )))
        }
    };
    if let Some(eps) = args.eps.clone().or(file.eps_schedule) {
        exp.eps_schedule = eps;
    }
    if let Some(r) = file.region {
        exp.region = Region { lo: r.lo, hi: r.hi };
    }
    exp.validate()?;
    let schedule = exp.eps_schedule.clone();
    let mut rows = Vec::new();
    for &eps in &schedule {
        let left = pair_left(&exp, eps)?;
        let right = pair_right(&exp, eps)?;
        let scan = positivity_scan(&exp, eps)?;
        let gap = (left.value - right.value).abs();
        let scale = left.value.abs().max(right.value.abs());
        let sigma = left.std_error.hypot(right.std_error);
        rows.push(json!({
            "eps": eps,
            "left": left,
            "right": right,
            "positivity": scan,
            "rel_gap": if scale > 0.0 { gap / scale } else { 0.0 },
            "sigma_gap": if sigma > 0.0 { gap / sigma } else { 0.0 },
            "lost_mass": left.masked_fraction.max(right.masked_fraction),
        }));
    }
    Ok(json!({
        "preset": file.preset,
        "n_samples": n_samples,
        "seed": seed,
        "min_guard_distance": exp.min_guard_distance(),
        "rows": rows,
    }))
}

fn cmd_report(args: &ReportArgs) -> Result<Value, CliError> {
    check_nmax(args.nmax)?;
    check_depth(args.n)?;
    let f = resolve_map(&args.map)?;
    let seq = degree_sequence(&f, args.nmax)?;
    let estimate = dyn_degree_estimate(&seq)
        .ok()
        .map(|e| serde_json::to_value(&e).expect("serializable estimate"));
    let stab = stability_report(&f, args.nmax)?;
    let lambdas = dynamical_lambdas(&f)?;
    let logc = check_log_concavity(&lambdas)?;
    let invariants = if f.action.is_some() {
        Some(invariants_payload(&f, &args.map, args.n)?)
    } else {
        None
    };
    Ok(json!({
        "map": f.id_string(),
        "degrees": serde_json::to_value(&seq).expect("serializable sequence"),
        "estimate": estimate,
        "stability": serde_json::to_value(&stab).expect("serializable report"),
        "log_concavity": serde_json::to_value(&logc).expect("serializable report"),
        "invariants": invariants,
    }))
}

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("PSEUDODYN_CACHE").map(PathBuf::from)
}

/// FNV-1a over the run configuration; keys green-iterate memoization files.
fn cache_key(parts: &[&str]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn cache_read(key: &str) -> Option<Value> {
    let p = cache_dir()?.join(format!("green-{key}.json"));
    let text = fs::read_to_string(p).ok()?;
    serde_json::from_str(&text).ok()
}

fn cache_write(key: &str, v: &Value) {
    if let Some(dir) = cache_dir() {
        if fs::create_dir_all(&dir).is_ok() {
            let _ = fs::write(dir.join(format!("green-{key}.json")), v.to_string());
        }
    }
}
