use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use critorbit::equidist::{normalization_integral, potential_discrepancy, GreenSpec, NORMALIZATION_PAIRS};
use critorbit::family::AnyFamily;
use critorbit::per1::{per1_measures, per1_pcf_search, per1_robin, Per1Family, Per1SearchOptions, Sign};
use critorbit::plane::{bif_measure, bounded_fraction, connectedness_locus, field_l1_distance, render_green, FieldKind, ScalarField, Window};
use critorbit::preperiodic::{all_drivers, find_pcf, solve_orbit_zero, PcfSearch, VerdictOptions};
use critorbit::relations::{check_orbit_relation, estimate_zeta, find_affine_symmetry, functional_root, SymmetryCandidate};
use critorbit::{Coeff, Family};

/// Config keys that never affect results and are left out of the hash.
const UNHASHED: [&str; 1] = ["out"];

#[derive(Parser)]
#[command(name = "critorbit", version, about = "Critical orbits of one-parameter polynomial families")]
struct Cli {
    /// Worker threads (default: logical cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file with default values for the subcommand's flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize a parameter-plane field to PGM with a JSON sidecar.
    Render(RenderArgs),
    /// Solve the preperiodicity equations of one marked point and classify the roots.
    Solve(SolveArgs),
    /// Search for symmetries, functional roots and orbit relations.
    Relate(RelateArgs),
    /// Robin constants, bifurcation measures and PCF search on Per_1(λ).
    Per1(Per1Args),
    /// Potential and energy diagnostics for a set of parameters.
    Equidist(EquidistArgs),
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RenderArgs {
    /// Family fixture (JSON).
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// re_min,re_max,im_min,im_max
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Pixels along the real axis.
    #[arg(long)]
    res: Option<usize>,
    /// max-green, green, mass, locus or gray.
    #[arg(long)]
    field: Option<String>,
    /// Marked point for green and mass.
    #[arg(long)]
    marked: Option<usize>,
    /// Iteration cap.
    #[arg(long)]
    cap: Option<usize>,
    /// Also write a CSV of the field.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    csv: bool,
    /// Output path prefix.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct SolveArgs {
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Marked point whose equations are solved.
    #[arg(long)]
    driver: Option<usize>,
    /// Largest n in f^n(a) = f^m(a).
    #[arg(long)]
    nmax: Option<usize>,
    /// Close-return tolerance for the verdicts.
    #[arg(long)]
    tol: Option<f64>,
    /// Keep only PCF candidates.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pcf_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RelateArgs {
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Largest iterate for the affine search.
    #[arg(long)]
    kmax: Option<usize>,
    /// Largest n, m tried in orbit relations.
    #[arg(long)]
    nmax: Option<usize>,
    /// Iterates applied to the marked points before estimating ζ.
    #[arg(long)]
    zeta_iterate: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct Per1Args {
    /// Multiplier, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Search window, re_min,re_max,im_min,im_max.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Grid pixels along the real axis.
    #[arg(long)]
    res: Option<usize>,
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pcf_search: bool,
    /// Rasterize both bifurcation measures (needs --out).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    measures: bool,
    /// Radius of the ring used for the Robin constants.
    #[arg(long)]
    robin_radius: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct EquidistArgs {
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Marked point defining the Green's function.
    #[arg(long)]
    marked: Option<usize>,
    /// The set is the roots of f^n(a) = 0 for this marked point (default: --marked).
    #[arg(long)]
    set_marked: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Probe points `re,im;re,im;...`.
    #[arg(long, allow_hyphen_values = true)]
    probes: Option<String>,
    /// Monte-Carlo check of the normalization on this window.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(long)]
    res: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Configuration problems (exit 2) versus computation failures (exit 3).
enum Failure {
    Config(anyhow::Error),
    Compute(anyhow::Error),
}

type Outcome<T> = std::result::Result<T, Failure>;

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn compute_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Compute(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Outcome<()> {
    let mut file_cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display())).map_err(config_err)?;
            match serde_json::from_str::<Value>(&text).map_err(config_err)? {
                Value::Object(m) => m,
                _ => return Err(config_err(anyhow!("config file must hold a JSON object"))),
            }
        }
        None => Map::new(),
    };
    let threads = match (cli.threads, file_cfg.remove("threads")) {
        (Some(n), _) => Some(n),
        (None, Some(v)) => Some(v.as_u64().ok_or_else(|| config_err(anyhow!("threads must be a positive integer")))? as usize),
        (None, None) => None,
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(config_err(anyhow!("threads must be positive")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(compute_err)?;
    }
    match cli.command {
        Command::Render(a) => {
            let (a, ctx) = merge("render", &a, file_cfg)?;
            render(a, ctx)
        }
        Command::Solve(a) => {
            let (a, ctx) = merge("solve", &a, file_cfg)?;
            solve(a, ctx)
        }
        Command::Relate(a) => {
            let (a, ctx) = merge("relate", &a, file_cfg)?;
            relate(a, ctx)
        }
        Command::Per1(a) => {
            let (a, ctx) = merge("per1", &a, file_cfg)?;
            per1(a, ctx)
        }
        Command::Equidist(a) => {
            let (a, ctx) = merge("equidist", &a, file_cfg)?;
            equidist(a, ctx)
        }
    }
}

/// Effective configuration and its hash, echoed into every output.
struct RunContext {
    command: &'static str,
    config: Value,
    hash: String,
}

impl RunContext {
    fn comment(&self) -> String {
        format!("critorbit {} {} config-sha256={}", critorbit::VERSION, self.command, self.hash)
    }

    fn header(&self) -> Value {
        json!({
            "command": self.command,
            "version": critorbit::VERSION,
            "config": self.config,
            "config_sha256": self.hash,
        })
    }
}

/// Overlay the flags on the config file and re-validate the result, rejecting unknown keys.
fn merge<T: Serialize + DeserializeOwned>(command: &'static str, flags: &T, file: Map<String, Value>) -> Outcome<(T, RunContext)> {
    let mut merged = file;
    if let Value::Object(f) = serde_json::to_value(flags).map_err(config_err)? {
        for (k, v) in f {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    let args: T = serde_json::from_value(Value::Object(merged)).map_err(config_err)?;
    let mut config = serde_json::to_value(&args).map_err(config_err)?;
    if let Value::Object(m) = &mut config {
        m.retain(|_, v| !v.is_null());
    }
    let mut hashed = config.clone();
    if let Value::Object(m) = &mut hashed {
        for k in UNHASHED {
            m.remove(k);
        }
    }
    let canonical = format!("{command}\n{}", serde_json::to_string(&hashed).map_err(config_err)?);
    let hash = hex::encode(Sha256::digest(canonical.as_bytes()));
    Ok((args, RunContext { command, config, hash }))
}

fn parse_floats(s: &str, what: &str) -> Outcome<Vec<f64>> {
    s.split(',')
        .map(|x| {
            let v: f64 = x.trim().parse().map_err(|_| config_err(anyhow!("{what}: {x:?} is not a number")))?;
            if !v.is_finite() {
                return Err(config_err(anyhow!("{what}: {x:?} is not finite")));
            }
            Ok(v)
        })
        .collect()
}

/// A window with `res` columns and square pixels; the imaginary extent is adjusted to a whole
/// number of rows about its centre.
fn parse_window(s: &str, res: usize) -> Outcome<Window> {
    let v = parse_floats(s, "window")?;
    let [re_min, re_max, im_min, im_max] = v[..] else {
        return Err(config_err(anyhow!("window needs re_min,re_max,im_min,im_max")));
    };
    if res < 2 {
        return Err(config_err(anyhow!("res must be at least 2")));
    }
    if !(re_max > re_min && im_max > im_min) {
        return Err(config_err(anyhow!("window must have positive extent")));
    }
    let h = (re_max - re_min) / res as f64;
    let ny = (((im_max - im_min) / h).round() as usize).max(2);
    let mid = 0.5 * (im_min + im_max);
    let half = 0.5 * ny as f64 * h;
    Window::new(re_min, re_max, mid - half, mid + half, res, ny).map_err(config_err)
}

fn positive(v: Option<usize>, default: usize, what: &str) -> Outcome<usize> {
    let v = v.unwrap_or(default);
    if v == 0 {
        return Err(config_err(anyhow!("{what} must be positive")));
    }
    Ok(v)
}

fn positive_f64(v: Option<f64>, default: f64, what: &str) -> Outcome<f64> {
    let v = v.unwrap_or(default);
    if !(v.is_finite() && v > 0.0) {
        return Err(config_err(anyhow!("{what} must be positive and finite")));
    }
    Ok(v)
}

fn load_fixture(p: &Option<PathBuf>) -> Outcome<AnyFamily> {
    let p = p.as_ref().ok_or_else(|| config_err(anyhow!("--fixture is required")))?;
    AnyFamily::load(p).with_context(|| format!("loading fixture {}", p.display())).map_err(config_err)
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn write(path: &Path, bytes: &[u8]) -> Outcome<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(compute_err)?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display())).map_err(compute_err)
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

/// Write `text` to `<out>.<ext>`, or to standard output without `--out`.
fn emit(out: &Option<PathBuf>, ext: &str, text: &[u8]) -> Outcome<()> {
    match out {
        Some(p) => write(&with_ext(p, ext), text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text).map_err(compute_err)
        }
    }
}

fn render(a: RenderArgs, ctx: RunContext) -> Outcome<()> {
    let out = a.out.clone().ok_or_else(|| config_err(anyhow!("--out is required for render")))?;
    let fam = load_fixture(&a.fixture)?.to_float();
    let res = positive(a.res, 256, "res")?;
    let w = parse_window(a.window.as_deref().ok_or_else(|| config_err(anyhow!("--window is required")))?, res)?;
    let cap = positive(a.cap, 256, "cap")?;
    let field_name = a.field.clone().unwrap_or_else(|| "max-green".into());
    let marked = a.marked.unwrap_or(0);
    let needs_marked = matches!(field_name.as_str(), "green" | "mass");
    if needs_marked && marked >= fam.marked().len() {
        return Err(config_err(anyhow!("no marked point with index {marked}")));
    }
    if fam.marked().is_empty() {
        return Err(config_err(anyhow!("the fixture has no marked points")));
    }
    let mut extra = json!({ "field": field_name, "family": fam.label() });
    let field = match field_name.as_str() {
        "max-green" => max_green(&fam, w, cap),
        "green" => render_green(&fam, marked, w, cap),
        "mass" => render_green(&fam, marked, w, cap).map(|g| {
            let m = bif_measure(&g);
            extra["total_mass"] = json!(m.total_mass);
            extra["border_positive"] = json!(m.border_positive);
            m.density
        }),
        "locus" => connectedness_locus(&fam, w, cap),
        "gray" => bounded_fraction(&fam, w, cap),
        other => return Err(config_err(anyhow!("unknown field {other:?}"))),
    }
    .map_err(|e| match e {
        critorbit::Error::MarkedNotCritical => config_err(e),
        e => compute_err(e),
    })?;
    write(&with_ext(&out, "pgm"), &field.to_pgm(Some(&ctx.comment())))?;
    if a.csv {
        write(&with_ext(&out, "csv"), field.to_csv(Some(&ctx.comment())).as_bytes())?;
    }
    let mut side = ctx.header();
    side["raster"] = field.sidecar(cap, extra);
    write(&with_ext(&out, "json"), &pretty(&side))
}

/// `max_i G_t(a_i(t))`, which vanishes exactly where every marked orbit is bounded.
fn max_green(fam: &Family, w: Window, cap: usize) -> critorbit::Result<ScalarField> {
    let num = fam.numeric();
    ScalarField::sample(w, FieldKind::Green, |t| {
        let map = num.map_at(t);
        (0..num.marked_count())
            .map(|i| critorbit::escape::escape_rate_map(&map, num.marked_at(i, t).0, cap).g)
            .fold(0.0, f64::max)
    })
}

fn search_csv(search: &PcfSearch, pcf_only: bool, comment: &str) -> String {
    let mut s = format!("# {comment}\nre,im,multiplicity,residual,pcf,verdicts,sources\n");
    for c in search.candidates.iter().filter(|c| c.pcf || !pcf_only) {
        let verdicts: Vec<String> = c.verdicts.iter().map(|(i, v)| format!("a{i}:{}", v.name())).collect();
        s.push_str(&format!(
            "{:.17e},{:.17e},{},{:.3e},{},{},{}\n",
            c.value.re,
            c.value.im,
            c.multiplicity,
            c.residual,
            c.pcf,
            verdicts.join(" "),
            c.sources.join(";").replace(',', " ")
        ));
    }
    s
}

fn solve(a: SolveArgs, ctx: RunContext) -> Outcome<()> {
    let fam = load_fixture(&a.fixture)?;
    let driver = a.driver.unwrap_or(0);
    let nmax = positive(a.nmax, 4, "nmax")?;
    let opts = VerdictOptions { tol: positive_f64(a.tol, VerdictOptions::default().tol, "tol")?, ..Default::default() };
    let drivers = all_drivers(driver, nmax);
    let result = match &fam {
        AnyFamily::Exact(f) => check_marked(f, driver).and_then(|_| find_pcf(f, &drivers, &opts).map_err(compute_err)),
        AnyFamily::Float(f) => check_marked(f, driver).and_then(|_| find_pcf(f, &drivers, &opts).map_err(compute_err)),
    }?;
    emit(&a.out, "csv", search_csv(&result, a.pcf_only, &ctx.comment()).as_bytes())?;
    if let Some(p) = &a.out {
        let mut summary = ctx.header();
        summary["candidates"] = json!(result.candidates.len());
        summary["pcf"] = json!(result.pcf_count());
        summary["passive"] = json!(result.passive);
        summary["identities"] = json!(result.identities);
        write(&with_ext(p, "json"), &pretty(&summary))?;
    }
    Ok(())
}

fn check_marked<C: Coeff>(fam: &Family<C>, i: usize) -> Outcome<()> {
    if i >= fam.marked().len() {
        return Err(config_err(anyhow!("no marked point with index {i}")));
    }
    Ok(())
}

fn relate(a: RelateArgs, ctx: RunContext) -> Outcome<()> {
    let fam = load_fixture(&a.fixture)?;
    let kmax = positive(a.kmax, 2, "kmax")?;
    let nmax = a.nmax.unwrap_or(2);
    let zeta_iterate = a.zeta_iterate.unwrap_or(1);
    let body = match &fam {
        AnyFamily::Exact(f) => relate_family(f, kmax, nmax, zeta_iterate),
        AnyFamily::Float(f) => relate_family(f, kmax, nmax, zeta_iterate),
    }
    .map_err(compute_err)?;
    let mut v = ctx.header();
    v["family"] = json!(fam.label());
    v["exact"] = json!(fam.is_exact());
    for (k, x) in body {
        v[k] = x;
    }
    emit(&a.out, "json", &pretty(&v))
}

fn relate_family<C: Coeff>(fam: &Family<C>, kmax: usize, nmax: usize, zeta_iterate: usize) -> anyhow::Result<Map<String, Value>> {
    let mut cands: Vec<SymmetryCandidate<C>> = find_affine_symmetry(fam, kmax, 0);
    let d = fam.degree();
    let mut log = Vec::new();
    for e in 2..=d {
        match functional_root(fam, e) {
            Ok(g) => cands.push(g),
            Err(critorbit::Error::NoIntegerRootDegree) => {}
            Err(err) => log.push(format!("functional root of order {e}: {err}")),
        }
    }
    let k = fam.marked().len();
    let mut symmetries = Vec::new();
    for h in &cands {
        let mut relations = Vec::new();
        for i in 0..k {
            for j in 0..k {
                for n in 0..=nmax {
                    for m in 0..=nmax {
                        if i == j && n == m {
                            continue;
                        }
                        if check_orbit_relation(fam, h, i, j, n, m)? {
                            relations.push(json!({ "i": i, "j": j, "n": n, "m": m }));
                        }
                    }
                }
            }
        }
        let mut v = h.to_json();
        v["verified"] = json!(h.verify(fam));
        v["relations"] = json!(relations);
        symmetries.push(v);
    }
    let mut zetas = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let a1 = critorbit::orbit::iterate_symbolic(fam, &fam.marked()[i], zeta_iterate)?;
            let a2 = critorbit::orbit::iterate_symbolic(fam, &fam.marked()[j], zeta_iterate)?;
            let entry = match estimate_zeta(fam, &a1, &a2) {
                Ok(z) => json!({ "i": i, "j": j, "iterate": zeta_iterate, "estimate": z }),
                Err(err) => json!({ "i": i, "j": j, "iterate": zeta_iterate, "error": err.to_string() }),
            };
            zetas.push(entry);
        }
    }
    let mut out = Map::new();
    out.insert("symmetries".into(), json!(symmetries));
    out.insert("zeta".into(), json!(zetas));
    out.insert("log".into(), json!(log));
    Ok(out)
}

fn parse_complex(s: &str, what: &str) -> Outcome<Complex64> {
    let v = parse_floats(s, what)?;
    match v[..] {
        [re] => Ok(Complex64::new(re, 0.0)),
        [re, im] => Ok(Complex64::new(re, im)),
        _ => Err(config_err(anyhow!("{what} must be `re` or `re,im`"))),
    }
}

fn per1(a: Per1Args, ctx: RunContext) -> Outcome<()> {
    let lambda = parse_complex(a.lambda.as_deref().ok_or_else(|| config_err(anyhow!("--lambda is required")))?, "lambda")?;
    let fam = Per1Family::new(lambda).map_err(config_err)?;
    let res = positive(a.res, 800, "res")?;
    let w = parse_window(a.window.as_deref().unwrap_or("-2,2,-0.5,0.5"), res)?;
    let cap = positive(a.cap, 256, "cap")?;
    let radius = positive_f64(a.robin_radius, 1e4, "robin-radius")?;
    if a.measures && a.out.is_none() {
        return Err(config_err(anyhow!("--measures needs --out")));
    }
    let mut summary = ctx.header();
    summary["lambda"] = json!([lambda.re, lambda.im]);
    summary["robin"] = json!({
        "radius": radius,
        "plus": per1_robin(&fam, Sign::Plus, radius, cap),
        "formula": fam.robin_formula(),
    });
    summary["window"] = json!(w);
    if a.pcf_search {
        let search = per1_pcf_search(&fam, w, &Per1SearchOptions::default()).map_err(compute_err)?;
        summary["pcf"] = json!(search.pcf_count());
        emit(&a.out, "csv", search_csv(&search, true, &ctx.comment()).as_bytes())?;
    }
    if a.measures {
        let out = a.out.as_ref().expect("checked");
        let m = per1_measures(&fam, w, cap).map_err(|e| match e {
            critorbit::Error::WindowContainsOrigin => config_err(e),
            e => compute_err(e),
        })?;
        let dist = field_l1_distance(&m.plus.density, &m.minus.density, true).map_err(compute_err)?;
        for (name, meas) in [("plus", &m.plus), ("minus", &m.minus)] {
            let prefix = PathBuf::from(format!("{}_{name}", out.display()));
            write(&with_ext(&prefix, "pgm"), &meas.density.to_pgm(Some(&ctx.comment())))?;
            summary[format!("mass_{name}")] = json!(meas.total_mass);
        }
        summary["normalized_l1_distance"] = json!(dist);
    }
    if let Some(p) = &a.out {
        write(&with_ext(p, "json"), &pretty(&summary))?;
    } else if !a.pcf_search {
        emit(&None, "json", &pretty(&summary))?;
    }
    Ok(())
}

fn equidist(a: EquidistArgs, ctx: RunContext) -> Outcome<()> {
    let fam = load_fixture(&a.fixture)?.to_float();
    let marked = a.marked.unwrap_or(0);
    let set_marked = a.set_marked.unwrap_or(marked);
    check_marked(&fam, marked)?;
    check_marked(&fam, set_marked)?;
    let n = positive(a.n, 8, "n")?;
    let probes: Vec<Complex64> = match &a.probes {
        Some(s) => s.split(';').map(|p| parse_complex(p, "probe")).collect::<Outcome<_>>()?,
        None => vec![Complex64::new(2.0, 0.0)],
    };
    let spec = GreenSpec::from_family(&fam, marked).map_err(compute_err)?;
    let set = solve_orbit_zero(&fam, &fam.marked()[set_marked], n).map_err(compute_err)?;
    let report = potential_discrepancy(&spec, &set, &probes).map_err(compute_err)?;
    let mut v = ctx.header();
    v["q"] = json!(spec.q);
    v["gamma"] = json!(spec.gamma);
    v["max_discrepancy"] = json!(report.max_discrepancy());
    v["report"] = json!(report);
    if let Some(ws) = &a.window {
        let res = positive(a.res, 256, "res")?;
        let w = parse_window(ws, res)?;
        let density = bif_measure(&render_green(&fam, marked, w, 256).map_err(compute_err)?).density;
        let pairs = positive(a.pairs, NORMALIZATION_PAIRS, "pairs")?;
        let seed = a.seed.unwrap_or(critorbit::equidist::NORMALIZATION_SEED);
        let integral = normalization_integral(&spec, &density, pairs, seed).map_err(compute_err)?;
        v["normalization"] = json!({ "integral": integral, "pairs": pairs, "seed": seed });
    }
    emit(&a.out, "json", &pretty(&v))
}
