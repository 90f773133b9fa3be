//! `race`: command-line entry point for prime-race experiments.
//!
//! Subcommands: cov, mc, sieve, predict, check, harmonic, zeros. Options come
//! from flags or a `key = value` config file (flags win); the resolved config
//! is echoed into every output header. Exit codes: 0 success, 2 validation
//! error with a one-line diagnostic.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use race_core::analytics::{bound_value, random_near_identity, near_identity_analysis, BoundSpec};
use race_core::characters::CharacterTable;
use race_core::covariance::{correlation_matrix, shift_vector};
use race_core::harmonic::{g_function, pair_sum_report, SpacedPoints};
use race_core::sampler::{mc_event_probability, Model, OrderingEvent, XSampler, ZSampler};
use race_core::sieve::{exact_log_density, exact_log_density_unguarded};
use race_core::zeros::ZeroSet;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(name = "race", version, about = "prime-race simulators and validators")]
struct Cli {
    /// `key = value` config file; explicit flags override its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// output path (default stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Correlation matrix, variance and shift vector for a residue tuple
    Cov(CovArgs),
    /// Monte Carlo ordering probability under the X or Z model
    Mc(McArgs),
    /// Exact logarithmic density of an ordering event by sieving
    Sieve(SieveArgs),
    /// Evaluate an error-bound expression with explicit constants
    Predict(PredictArgs),
    /// Built-in numerical self-checks
    Check(CheckArgs),
    /// G-function values and pair-sum reports
    Harmonic(HarmonicArgs),
    /// Synthesize or validate zero files
    Zeros(ZerosArgs),
}

#[derive(Args)]
struct CovArgs {
    #[arg(long)]
    q: Option<u64>,
    /// comma-separated residues, e.g. 1,3
    #[arg(long)]
    residues: Option<String>,
    /// zero file path (omit to use synthetic zeros)
    #[arg(long)]
    zeros: Option<PathBuf>,
    /// synthetic zeros per character when no file is given
    #[arg(long)]
    zero_count: Option<usize>,
    /// synthesis seed
    #[arg(long)]
    zero_seed: Option<u64>,
}

#[derive(Args)]
struct McArgs {
    /// x (oscillatory sums) or z (Gaussian)
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    residues: Option<String>,
    /// event spec: full:i1,...,in | leader:i | firstk:k (1-based positions)
    #[arg(long)]
    event: Option<String>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    zeros: Option<PathBuf>,
    #[arg(long)]
    zero_count: Option<usize>,
    #[arg(long)]
    zero_seed: Option<u64>,
    /// include the -C_q(a)/sqrt(Var) mean shifts
    #[arg(long)]
    include_shifts: bool,
}

#[derive(Args)]
struct SieveArgs {
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    residues: Option<String>,
    #[arg(long)]
    event: Option<String>,
    #[arg(long)]
    x: Option<u64>,
}

#[derive(Args)]
struct PredictArgs {
    /// probleader | fullrace | leader | firstk | ncr2
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    r1_sum: Option<f64>,
    #[arg(long)]
    rij_sum: Option<f64>,
    #[arg(long)]
    log_q: Option<f64>,
    #[arg(long)]
    phi_q: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// the explicit constant substituted for every implicit one
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args)]
struct CheckArgs {
    /// matrix sizes to exercise
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct HarmonicArgs {
    /// evaluate G at one point instead of a pair-sum report
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    big_q: Option<u64>,
    #[arg(long)]
    x: Option<f64>,
    /// grid sizes for the pair-sum report
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
}

#[derive(Args)]
struct ZerosArgs {
    /// parse and validate this file instead of synthesizing
    #[arg(long)]
    validate: Option<PathBuf>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Resolved `key = value` pairs: config-file defaults overridden by flags.
struct Resolver {
    file: BTreeMap<String, String>,
    echo: BTreeMap<String, String>,
}

impl Resolver {
    fn new(path: &Option<PathBuf>) -> Result<Resolver, String> {
        let mut file = BTreeMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("--config: cannot read {}: {e}", p.display()))?;
            for (i, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| format!("--config: line {} is not `key = value`", i + 1))?;
                file.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Resolver {
            file,
            echo: BTreeMap::new(),
        })
    }

    /// Flag value if present, else config-file value, else default; the chosen
    /// value is recorded for the output header.
    fn get<T: std::str::FromStr + std::fmt::Display + Clone>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: Option<T>,
    ) -> Result<T, String> {
        let v = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(raw) => raw
                    .parse::<T>()
                    .map_err(|_| format!("--{key}: cannot parse config value `{raw}`"))?,
                None => default.ok_or_else(|| format!("--{key} is required"))?,
            },
        };
        self.echo.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    fn get_opt<T: std::str::FromStr + std::fmt::Display + Clone>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>, String> {
        match self.get(key, flag, None) {
            Ok(v) => Ok(Some(v)),
            Err(e) if e.ends_with("is required") => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.echo.insert(key.to_string(), value.to_string());
    }

    fn header_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.echo {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }

    fn header_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.echo
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect(),
        )
    }
}

/// 17 significant digits: round-trips through parse exactly.
fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_residues(raw: &str) -> Result<Vec<u64>, String> {
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("--residues: bad entry `{t}`"))
        })
        .collect()
}

/// Event grammar over 1-based tuple positions.
fn parse_event(raw: &str, n: usize) -> Result<OrderingEvent, String> {
    let (kind, rest) = raw
        .split_once(':')
        .ok_or_else(|| format!("--event: `{raw}` is not kind:args"))?;
    let nums: Result<Vec<usize>, String> = rest
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("--event: bad index `{t}`"))
        })
        .collect();
    let nums = nums?;
    let event = match kind {
        "full" => OrderingEvent::FullOrdering(
            nums.iter()
                .map(|&i| {
                    i.checked_sub(1)
                        .ok_or_else(|| "--event: positions are 1-based".to_string())
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
        "leader" => {
            if nums.len() != 1 {
                return Err("--event: leader takes one index".into());
            }
            OrderingEvent::Leader(
                nums[0]
                    .checked_sub(1)
                    .ok_or_else(|| "--event: positions are 1-based".to_string())?,
            )
        }
        "firstk" => {
            if nums.len() != 1 {
                return Err("--event: firstk takes one count".into());
            }
            OrderingEvent::FirstK(nums[0])
        }
        other => return Err(format!("--event: unknown kind `{other}`")),
    };
    event
        .validate(n)
        .map_err(|e| format!("--event: {e}"))?;
    Ok(event)
}

fn load_zeros(
    r: &mut Resolver,
    q: u64,
    zeros: &Option<PathBuf>,
    zero_count: Option<usize>,
    zero_seed: Option<u64>,
) -> Result<ZeroSet, String> {
    if let Some(path) = zeros {
        r.note("zeros", path.display());
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("--zeros: cannot read {}: {e}", path.display()))?;
        let zs = ZeroSet::parse(&text).map_err(|e| format!("--zeros: {e}"))?;
        if zs.modulus != q {
            return Err(format!(
                "--zeros: file has modulus {}, expected {q}",
                zs.modulus
            ));
        }
        Ok(zs)
    } else {
        let count = r.get("zero_count", zero_count, Some(100))?;
        let seed = r.get("zero_seed", zero_seed, Some(1))?;
        let table = CharacterTable::new(q).map_err(|e| format!("--q: {e}"))?;
        ZeroSet::synthesize(&table, count, seed).map_err(|e| e.to_string())
    }
}

fn guard_override() -> bool {
    std::env::var("RACE_GUARD_OVERRIDE").as_deref() == Ok("1")
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("--out: cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run() -> Result<(), String> {
    let cli = Cli::parse();
    let mut r = Resolver::new(&cli.config)?;
    let format_flag = cli.format.or_else(|| {
        r.file.get("format").and_then(|v| match v.as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        })
    });

    let text = match &cli.cmd {
        Cmd::Cov(args) => cmd_cov(&mut r, args, format_flag)?,
        Cmd::Mc(args) => cmd_mc(&mut r, args, format_flag)?,
        Cmd::Sieve(args) => cmd_sieve(&mut r, args, format_flag)?,
        Cmd::Predict(args) => cmd_predict(&mut r, args, format_flag)?,
        Cmd::Check(args) => cmd_check(&mut r, args, format_flag)?,
        Cmd::Harmonic(args) => cmd_harmonic(&mut r, args, format_flag)?,
        Cmd::Zeros(args) => cmd_zeros(&mut r, args, format_flag)?,
    };
    emit(&cli.out, &text)
}

fn resolve_format(r: &mut Resolver, flag: Option<Format>, default: Format) -> Format {
    let f = flag.unwrap_or(default);
    r.note("format", if f == Format::Csv { "csv" } else { "json" });
    f
}

fn cmd_cov(r: &mut Resolver, args: &CovArgs, format: Option<Format>) -> Result<String, String> {
    let format = resolve_format(r, format, Format::Csv);
    let q = r.get("q", args.q, None)?;
    let residues = parse_residues(&r.get("residues", args.residues.clone(), None)?)?;
    let zs = load_zeros(r, q, &args.zeros, args.zero_count, args.zero_seed)?;
    let table = CharacterTable::new(q).map_err(|e| format!("--q: {e}"))?;
    let cm = correlation_matrix(&zs, &table, &residues).map_err(|e| e.to_string())?;
    let shifts = shift_vector(q, &residues).map_err(|e| e.to_string())?;

    match format {
        Format::Csv => {
            let mut s = r.header_csv();
            let _ = writeln!(s, "# var_q = {}", fmt_f(cm.var_q));
            let _ = writeln!(s, "# complete = {}", cm.complete);
            for (a, c) in residues.iter().zip(&shifts.c) {
                let _ = writeln!(s, "# c_{a} = {c}");
            }
            let _ = writeln!(s, "i,j,residue_i,residue_j,r");
            for i in 0..residues.len() {
                for j in 0..residues.len() {
                    let _ = writeln!(
                        s,
                        "{i},{j},{},{},{}",
                        residues[i],
                        residues[j],
                        fmt_f(cm.r[(i, j)])
                    );
                }
            }
            Ok(s)
        }
        Format::Json => {
            let n = residues.len();
            let matrix: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| cm.r[(i, j)]).collect())
                .collect();
            let v = serde_json::json!({
                "config": r.header_json(),
                "q": q,
                "residues": residues,
                "var_q": cm.var_q,
                "shifts": shifts.c,
                "complete": cm.complete,
                "r": matrix,
            });
            Ok(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
        }
    }
}

fn cmd_mc(r: &mut Resolver, args: &McArgs, format: Option<Format>) -> Result<String, String> {
    let format = resolve_format(r, format, Format::Csv);
    let model_name = r.get("model", args.model.clone(), None)?;
    let q = r.get("q", args.q, None)?;
    let residues = parse_residues(&r.get("residues", args.residues.clone(), None)?)?;
    let event_raw = r.get("event", args.event.clone(), None)?;
    let event = parse_event(&event_raw, residues.len())?;
    let samples = r.get("samples", args.samples, None)?;
    let seed = r.get("seed", args.seed, Some(0))?;
    let workers = r.get("workers", args.workers, Some(1))?;
    let include_shifts = args.include_shifts
        || r.file.get("include_shifts").map(String::as_str) == Some("true");
    r.note("include_shifts", include_shifts);

    let zs = load_zeros(r, q, &args.zeros, args.zero_count, args.zero_seed)?;
    let table = CharacterTable::new(q).map_err(|e| format!("--q: {e}"))?;
    let shifts = shift_vector(q, &residues).map_err(|e| e.to_string())?;

    let xs;
    let zsamp;
    let model = match model_name.as_str() {
        "x" => {
            xs = XSampler::new(&zs, &table, &shifts, include_shifts)
                .map_err(|e| e.to_string())?;
            Model::X(&xs)
        }
        "z" => {
            let cm = correlation_matrix(&zs, &table, &residues).map_err(|e| e.to_string())?;
            let mean = if include_shifts {
                let inv = 1.0 / cm.var_q.sqrt();
                Some(shifts.c.iter().map(|&c| -(c as f64) * inv).collect())
            } else {
                None
            };
            zsamp = ZSampler::new(&cm.r, mean).map_err(|e| e.to_string())?;
            Model::Z(&zsamp)
        }
        other => return Err(format!("--model: `{other}` is not x or z")),
    };

    let mut est = mc_event_probability(&model, &event, samples, seed, workers)
        .map_err(|e| e.to_string())?;
    est.prediction = Some(event.symmetric_prediction(residues.len()));

    match format {
        Format::Csv => {
            let mut s = r.header_csv();
            let _ = writeln!(
                s,
                "model,q,event,samples,seed,workers,value,stderr,hits,ties,prediction"
            );
            let _ = writeln!(
                s,
                "{model_name},{q},\"{event_raw}\",{samples},{seed},{workers},{},{},{},{},{}",
                fmt_f(est.value),
                fmt_f(est.stderr),
                est.hits,
                est.ties,
                fmt_f(est.prediction.unwrap()),
            );
            Ok(s)
        }
        Format::Json => {
            let v = serde_json::json!({
                "config": r.header_json(),
                "model": model_name,
                "q": q,
                "event": event_raw,
                "samples": samples,
                "seed": seed,
                "workers": workers,
                "value": est.value,
                "stderr": est.stderr,
                "hits": est.hits,
                "ties": est.ties,
                "prediction": est.prediction,
            });
            Ok(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
        }
    }
}

fn cmd_sieve(r: &mut Resolver, args: &SieveArgs, format: Option<Format>) -> Result<String, String> {
    let format = resolve_format(r, format, Format::Csv);
    let q = r.get("q", args.q, None)?;
    let residues = parse_residues(&r.get("residues", args.residues.clone(), None)?)?;
    let event_raw = r.get("event", args.event.clone(), None)?;
    let event = parse_event(&event_raw, residues.len())?;
    let x = r.get("x", args.x, None)?;

    let res = if guard_override() {
        exact_log_density_unguarded(q, &residues, &event, x)
    } else {
        exact_log_density(q, &residues, &event, x)
    }
    .map_err(|e| e.to_string())?;

    match format {
        Format::Csv => {
            let mut s = r.header_csv();
            let _ = writeln!(s, "# density_unshifted = {}", fmt_f(res.density_unshifted));
            let _ = writeln!(s, "# tie_measure = {}", fmt_f(res.tie_measure));
            let _ = writeln!(s, "q,event,X,measure,density,boundary_count");
            let _ = writeln!(
                s,
                "{q},\"{event_raw}\",{x},{},{},{}",
                fmt_f(res.measure),
                fmt_f(res.density),
                res.boundary_count
            );
            Ok(s)
        }
        Format::Json => {
            let v = serde_json::json!({
                "config": r.header_json(),
                "q": q,
                "event": event_raw,
                "X": x,
                "measure": res.measure,
                "density": res.density,
                "density_unshifted": res.density_unshifted,
                "tie_measure": res.tie_measure,
                "boundary_count": res.boundary_count,
            });
            Ok(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
        }
    }
}

fn cmd_predict(
    r: &mut Resolver,
    args: &PredictArgs,
    format: Option<Format>,
) -> Result<String, String> {
    let format = resolve_format(r, format, Format::Json);
    let kind = r.get("kind", args.kind.clone(), None)?;
    let c = r.get("c", args.c, Some(1.0))?;
    let spec = match kind.as_str() {
        "probleader" => BoundSpec::ProbLeader {
            n: r.get("n", args.n, None)?,
            r1_abs_sum: r.get("r1_sum", args.r1_sum, None)?,
            rij_abs_sum: r.get("rij_sum", args.rij_sum, None)?,
        },
        "fullrace" => BoundSpec::FullRaceError {
            n: r.get("n", args.n, None)?,
            log_q: r.get("log_q", args.log_q, None)?,
        },
        "leader" => BoundSpec::LeaderError {
            n: r.get("n", args.n, None)?,
            phi_q: r.get("phi_q", args.phi_q, None)?,
            log_q: r.get("log_q", args.log_q, None)?,
        },
        "firstk" => BoundSpec::FirstKError {
            n: r.get("n", args.n, None)?,
            k: r.get("k", args.k, None)?,
            log_q: r.get("log_q", args.log_q, None)?,
        },
        "ncr2" => BoundSpec::Ncr2 {
            n: r.get("n", args.n, None)?,
            epsilon: r.get("epsilon", args.epsilon, None)?,
            a: r.get("a", args.a, None)?,
            b: r.get("b", args.b, None)?,
        },
        other => return Err(format!("--kind: unknown bound `{other}`")),
    };
    let rep = bound_value(&spec, c);

    match format {
        Format::Csv => {
            let mut s = r.header_csv();
            let _ = writeln!(s, "kind,value,constant_c,shape_only");
            let _ = writeln!(
                s,
                "{},{},{},{}",
                rep.kind,
                fmt_f(rep.value),
                fmt_f(rep.constant_c),
                rep.shape_only
            );
            Ok(s)
        }
        Format::Json => {
            let v = serde_json::json!({
                "config": r.header_json(),
                "kind": rep.kind,
                "value": rep.value,
                "constant_c": rep.constant_c,
                "shape_only": rep.shape_only,
            });
            Ok(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
        }
    }
}

fn cmd_check(r: &mut Resolver, args: &CheckArgs, format: Option<Format>) -> Result<String, String> {
    let format = resolve_format(r, format, Format::Csv);
    let n = r.get("n", args.n, Some(16))?;
    let trials = r.get("trials", args.trials, Some(50))?;
    let seed = r.get("seed", args.seed, Some(1))?;

    let mut rows: Vec<(String, bool, String)> = Vec::new();

    // near-identity matrices against the exact LU oracle
    let mut worst_det = 0.0f64;
    let mut worst_inv = 0.0f64;
    for t in 0..trials {
        let a = random_near_identity(n, 1.0 / (2.0 * n as f64), seed ^ t);
        let rep = near_identity_analysis(&a).map_err(|e| e.to_string())?;
        worst_det = worst_det.max(rep.det_bound_ratio);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst_inv = worst_inv.max(rep.inv_offdiag_ratios[(i, j)]);
                }
            }
        }
    }
    rows.push((
        "near_identity_det".into(),
        worst_det <= 3.0,
        format!("max ratio {worst_det:.4}"),
    ));
    rows.push((
        "near_identity_inverse".into(),
        worst_inv <= 10.0,
        format!("max ratio {worst_inv:.4}"),
    ));

    // character orthogonality for a small modulus
    let table = CharacterTable::new(8).map_err(|e| e.to_string())?;
    let mut worst_orth = 0.0f64;
    for &i in table.conrey_indices() {
        let sum: num_complex::Complex64 = table
            .units()
            .iter()
            .map(|&a| table.eval(i, a).unwrap())
            .sum();
        let expect = if i == 1 { table.phi() as f64 } else { 0.0 };
        worst_orth = worst_orth.max((sum.re - expect).abs().max(sum.im.abs()));
    }
    rows.push((
        "character_orthogonality".into(),
        worst_orth <= 1e-12,
        format!("max defect {worst_orth:.2e}"),
    ));

    // quadrature identity
    let defect = (race_core::analytics::delta2_quadrature(0.0, 10)
        .map_err(|e| e.to_string())?
        * 90.0
        - 1.0)
        .abs();
    rows.push((
        "delta2_independence".into(),
        defect <= 1e-4,
        format!("defect {defect:.2e}"),
    ));

    let all = rows.iter().all(|(_, ok, _)| *ok);
    let out = match format {
        Format::Csv => {
            let mut s = r.header_csv();
            let _ = writeln!(s, "check,pass,detail");
            for (name, ok, detail) in &rows {
                let _ = writeln!(s, "{name},{ok},{detail}");
            }
            s
        }
        Format::Json => {
            let v = serde_json::json!({
                "config": r.header_json(),
                "checks": rows.iter().map(|(name, ok, detail)| serde_json::json!({
                    "name": name, "pass": ok, "detail": detail,
                })).collect::<Vec<_>>(),
                "all_pass": all,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
        }
    };
    if all {
        Ok(out)
    } else {
        // still emit the report, then fail
        print!("{out}");
        Err("self-checks failed".into())
    }
}

fn cmd_harmonic(
    r: &mut Resolver,
    args: &HarmonicArgs,
    format: Option<Format>,
) -> Result<String, String> {
    let format = resolve_format(r, format, Format::Csv);
    let big_q = r.get("big_q", args.big_q, Some(50))?;
    let x = r.get("x", args.x, Some(1e5))?;

    if let Some(theta) = r.get_opt("theta", args.theta)? {
        let v = g_function(theta, big_q, x).map_err(|e| e.to_string())?;
        return Ok(match format {
            Format::Csv => {
                let mut s = r.header_csv();
                let _ = writeln!(s, "theta,big_q,x,g");
                let _ = writeln!(s, "{},{big_q},{},{}", fmt_f(theta), fmt_f(x), fmt_f(v));
                s
            }
            Format::Json => {
                let v = serde_json::json!({
                    "config": r.header_json(),
                    "theta": theta, "big_q": big_q, "x": x, "g": v,
                });
                format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
            }
        });
    }

    let rr = r.get("r", args.r, Some(30))?;
    let ss = r.get("s", args.s, Some(30))?;
    let grid = |count: usize| -> Result<SpacedPoints, String> {
        let pts: Vec<f64> = (0..count).map(|i| i as f64 / count as f64).collect();
        SpacedPoints::new(pts, x).map_err(|e| e.to_string())
    };
    let rep = pair_sum_report(&grid(rr)?, &grid(ss)?, big_q, x).map_err(|e| e.to_string())?;

    Ok(match format {
        Format::Csv => {
            let mut s = r.header_csv();
            let _ = writeln!(s, "sum,reference_form,ratio");
            let _ = writeln!(
                s,
                "{},{},{}",
                fmt_f(rep.sum),
                fmt_f(rep.reference_form),
                fmt_f(rep.ratio)
            );
            s
        }
        Format::Json => {
            let v = serde_json::json!({
                "config": r.header_json(),
                "sum": rep.sum,
                "reference_form": rep.reference_form,
                "ratio": rep.ratio,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
        }
    })
}

fn cmd_zeros(r: &mut Resolver, args: &ZerosArgs, format: Option<Format>) -> Result<String, String> {
    if let Some(path) = &args.validate {
        let format = resolve_format(r, format, Format::Csv);
        r.note("validate", path.display());
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("--validate: cannot read {}: {e}", path.display()))?;
        let zs = ZeroSet::parse(&text).map_err(|e| format!("--validate: {e}"))?;
        let table = CharacterTable::new(zs.modulus).map_err(|e| e.to_string())?;
        return Ok(match format {
            Format::Csv => {
                let mut s = r.header_csv();
                let _ = writeln!(s, "q,blocks,total_zeros,complete");
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    zs.modulus,
                    zs.blocks.len(),
                    zs.total_zeros(),
                    zs.is_complete(&table)
                );
                s
            }
            Format::Json => {
                let v = serde_json::json!({
                    "config": r.header_json(),
                    "q": zs.modulus,
                    "blocks": zs.blocks.len(),
                    "total_zeros": zs.total_zeros(),
                    "complete": zs.is_complete(&table),
                });
                format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
            }
        });
    }

    // synthesis mode always emits the wire format (a zero file)
    let q = r.get("q", args.q, None)?;
    let count = r.get("count", args.count, Some(100))?;
    let seed = r.get("seed", args.seed, Some(1))?;
    let table = CharacterTable::new(q).map_err(|e| format!("--q: {e}"))?;
    let zs = ZeroSet::synthesize(&table, count, seed).map_err(|e| e.to_string())?;
    Ok(format!("{}{}", r.header_csv(), zs.serialize()))
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
