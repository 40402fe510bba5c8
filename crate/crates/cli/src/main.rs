use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use hyperalg::algdep::{
    apply_polynomial_exact, dependence_upto_exact, expand_compose, find_relation, parse_exact_expsum, parse_poly,
    AlgDepError, ExactExpSum,
};
use hyperalg::complex::parse_complex;
use hyperalg::engine::{demo_data, hypercyclic_step, translation_transport, EngineError, StepParams};
use hyperalg::geometry::{
    build_theorem_data, strictly_convex_subarc, trace_both_ways, trace_level_curve, SearchParams, TraceError,
};
use hyperalg::indexcraft::is_admissible;
use hyperalg::algdep::Field;
use hyperalg::{ExpSum, Grid, MPoly, MultiIndexSet, Symbol, C64};

#[derive(Parser)]
#[command(name = "hyperalg", version, about = "Hypercyclic algebra constructions for convolution operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace |Φ| = r from a seed and report curvature and the longest convex run
    Levelset(LevelsetArgs),
    /// Certify the geometry and run the perturbation scheme for P(f)
    Construct(ConstructArgs),
    /// Find or rule out algebraic relations
    Algdep(AlgdepArgs),
}

#[derive(clap::Args, Serialize)]
struct LevelsetArgs {
    /// symbol: poly:c0,c1,..., exp:a, sin:a or cos:a
    #[arg(long)]
    phi: String,
    #[arg(long)]
    r: f64,
    /// starting point as re,im
    #[arg(long, allow_hyphen_values = true)]
    seed: String,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, default_value_t = 2000)]
    max_points: usize,
    /// trace in both directions from the seed
    #[arg(long)]
    both_ways: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(clap::Args, Serialize)]
struct ConstructArgs {
    #[arg(long)]
    phi: String,
    /// polynomial P over t1..tN without constant term
    #[arg(long)]
    poly: String,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    r_disk: f64,
    #[arg(long, default_value_t = 512)]
    n_max: u32,
    /// target coefficients, spread along the certified arc
    #[arg(long, default_value = "0.5-0.5i", allow_hyphen_values = true)]
    target: String,
    /// coefficient of the base tuple terms on Λ
    #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
    base: String,
    #[arg(long, default_value_t = 40)]
    density: usize,
    /// translation steps for exp symbols
    #[arg(long, default_value_t = 4)]
    shift_steps: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    /// relation among polynomials with N > k
    Relation,
    /// dependence test for exact exponential sums up to degree m
    Test,
}

#[derive(clap::Args, Serialize)]
struct AlgdepArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// polynomial in t1..tk (relation) or exp-sum `c@λ,...` (test); repeatable
    #[arg(long = "input", required = true, allow_hyphen_values = true)]
    inputs: Vec<String>,
    /// read further inputs from a file, one per line
    #[arg(long)]
    input_file: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    m: u32,
    /// allow a constant term in the relation
    #[arg(long)]
    unital: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Serialize)]
struct RunManifest<'a, A: Serialize> {
    command: &'a str,
    version: &'a str,
    args: &'a A,
    out: &'a Path,
    seed: u64,
}

struct Failure {
    code: u8,
    err: anyhow::Error,
}

fn fail(code: u8) -> impl FnOnce(anyhow::Error) -> Failure {
    move |err| Failure { code, err }
}

fn malformed(err: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 1, err: err.into() }
}

type Outcome = Result<(), Failure>;

fn manifest<A: Serialize>(command: &str, args: &A, out: &Path, seed: u64) -> Value {
    serde_json::to_value(RunManifest { command, version: env!("CARGO_PKG_VERSION"), args, out, seed })
        .expect("manifest serializes")
}

fn write(out: &Path, name: &str, body: &str) -> Outcome {
    let path = out.join(name);
    fs::write(&path, body).with_context(|| format!("writing {}", path.display())).map_err(fail(1))
}

fn write_json(out: &Path, name: &str, v: &Value) -> Outcome {
    let mut body = serde_json::to_string_pretty(v).expect("json value");
    body.push('\n');
    write(out, name, &body)
}

fn prepare(out: &Path) -> Outcome {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display())).map_err(fail(1))
}

fn parse_symbol(s: &str) -> Result<Symbol, Failure> {
    let phi: Symbol = s.parse().map_err(malformed)?;
    if phi.is_constant() {
        return Err(malformed(anyhow!("symbol {s} is constant")));
    }
    Ok(phi)
}

fn parse_point(s: &str) -> Result<C64, Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| malformed(anyhow!("bad point `{s}`")));
    match parts.as_slice() {
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        [z] => parse_complex(z).map_err(|e| malformed(anyhow!(e))),
        _ => Err(malformed(anyhow!("bad point `{s}`, expected re,im"))),
    }
}

fn parse_coeffs(s: &str) -> Result<Vec<C64>, Failure> {
    s.split(',').map(|t| parse_complex(t).map_err(|e| malformed(anyhow!(e)))).collect()
}

fn levelset(args: &LevelsetArgs) -> Outcome {
    let phi = parse_symbol(&args.phi)?;
    let seed = parse_point(&args.seed)?;
    if !(args.r > 0.0 && args.step > 0.0) {
        return Err(malformed(anyhow!("r and step must be positive")));
    }
    prepare(&args.out)?;
    let traced = if args.both_ways {
        trace_both_ways(&phi, args.r, seed, args.step, args.max_points / 2)
    } else {
        trace_level_curve(&phi, args.r, seed, args.step, args.max_points)
    };
    let arc = match traced {
        Ok(arc) => arc,
        Err(TraceError::BadParameters) => return Err(malformed(anyhow!(TraceError::BadParameters))),
        Err(e) => return Err(Failure { code: 2, err: e.into() }),
    };
    let convex = strictly_convex_subarc(&arc, 7).ok().map(|run| {
        let start = arc.points.iter().position(|z| *z == run.first()).unwrap_or(0);
        json!({ "start": start, "len": run.len() })
    });
    write(&args.out, "arc.csv", &arc.to_csv())?;
    let report = json!({
        "manifest": manifest("levelset", args, &args.out, 0),
        "phi": phi.to_string(),
        "max_residual": arc.max_residual(&phi),
        "convex_run": convex,
        "arc": arc,
    });
    write_json(&args.out, "levelset.json", &report)?;
    eprintln!("traced {} points, termination {:?}", arc.len(), arc.termination);
    Ok(())
}

fn engine_failure(e: EngineError) -> Failure {
    let code = match e {
        EngineError::NotConverged { .. } => 4,
        _ => 1,
    };
    Failure { code, err: e.into() }
}

fn construct(args: &ConstructArgs) -> Outcome {
    let phi = parse_symbol(&args.phi)?;
    let p = parse_poly(&args.poly, None).map_err(malformed)?;
    let support = p.support();
    if p.has_constant_term() || !is_admissible(&support) {
        return Err(malformed(anyhow!("P must be nonzero without constant term")));
    }
    let target = parse_coeffs(&args.target)?;
    let base = parse_complex(&args.base).map_err(|e| malformed(anyhow!(e)))?;
    if !(args.eps > 0.0 && args.r_disk > 0.0) || args.n_max == 0 || args.density == 0 {
        return Err(malformed(anyhow!("eps, r_disk, n_max and density must be positive")));
    }
    prepare(&args.out)?;
    let man = manifest("construct", args, &args.out, args.seed);

    if let Symbol::Exp { a } = phi {
        return translation(args, &p, a, base, man);
    }

    let a = MultiIndexSet::new(p.nvars(), support).map_err(malformed)?;
    let params = SearchParams { density: args.density, ..SearchParams::default() };
    let geometry = build_theorem_data(&phi, a.d_a(), a.m_a(), &params).map_err(|e| fail(3)(e.into()))?;
    write_json(&args.out, "geometry.json", &json!({ "manifest": man, "geometry": geometry }))?;

    let (g, l) = demo_data(&geometry, p.nvars(), &target, base);
    let step = StepParams { eps: args.eps, r_disk: args.r_disk, n_max: args.n_max, grid: Grid::default(), seed: args.seed };
    let res = hypercyclic_step(&p, &g, &l, &geometry, &step).map_err(engine_failure)?;

    write(&args.out, "orbit.csv", &res.report.to_csv())?;
    let report = json!({
        "manifest": man,
        "poly": p.to_string(),
        "target": g,
        "base": l,
        "q": res.q,
        "distance": res.distance,
        "history": res.history,
        "f": res.f,
        "config": res.config,
        "report": res.report,
    });
    write_json(&args.out, "construct.json", &report)?;
    eprintln!("q = {}, distance {:.3e}, r = {:.6}", res.q, res.distance, geometry.r);
    Ok(())
}

fn translation<K: Field>(
    args: &ConstructArgs,
    p: &MPoly<K>,
    a: C64,
    base: C64,
    man: Value,
) -> Outcome {
    let f: Vec<ExpSum> = (0..p.nvars())
        .map(|i| {
            let k = (i + 1) as f64;
            ExpSum::from_pairs([(base, C64::new(0.25 * k, 0.0)), (base * C64::new(0.0, 1.0), C64::new(0.0, -0.5 * k))])
        })
        .collect();
    let xs: Vec<f64> = (0..=40).map(|j| -1.0 + 0.05 * j as f64).collect();
    let rep = translation_transport(a, p, &f, args.shift_steps, &xs).map_err(engine_failure)?;
    let mut csv = String::from("x,re,im\n");
    for (x, z) in xs.iter().zip(&rep.restricted) {
        csv.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", x, z.re, z.im));
    }
    write(&args.out, "translation.csv", &csv)?;
    write_json(&args.out, "translation.json", &json!({ "manifest": man, "f": f, "report": rep }))?;
    eprintln!("shift mismatch {:.3e}, multiplicative gap {:.3e}", rep.shift_mismatch, rep.multiplicative_gap);
    Ok(())
}

fn algdep_failure(e: AlgDepError) -> Failure {
    let code = match e {
        AlgDepError::PreconditionViolated { .. } => 5,
        _ => 1,
    };
    Failure { code, err: e.into() }
}

fn algdep(args: &AlgdepArgs) -> Outcome {
    let mut inputs = args.inputs.clone();
    if let Some(path) = &args.input_file {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(malformed)?;
        inputs.extend(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from));
    }
    prepare(&args.out)?;
    let man = manifest("algdep", args, &args.out, 0);
    let report = match args.mode {
        Mode::Relation => {
            let k = inputs
                .iter()
                .map(|s| parse_poly(s, None).map(|p| p.nvars()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(malformed)?
                .into_iter()
                .max()
                .unwrap_or(0);
            let polys = inputs.iter().map(|s| parse_poly(s, Some(k))).collect::<Result<Vec<_>, _>>().map_err(malformed)?;
            let rel = find_relation(&polys).map_err(algdep_failure)?;
            let certificate = expand_compose(&rel.poly, &polys).map_err(algdep_failure)?;
            json!({
                "manifest": man,
                "relation": rel.poly.to_string(),
                "relation_terms": rel.poly.to_json(),
                "d": rel.d,
                "q": rel.q,
                "columns": rel.columns,
                "certificate": certificate.to_json(),
                "certificate_zero": certificate.is_zero(),
            })
        }
        Mode::Test => {
            let f = inputs.iter().map(|s| parse_exact_expsum(s)).collect::<Result<Vec<ExactExpSum>, _>>().map_err(|e| malformed(anyhow!(e)))?;
            match dependence_upto_exact(&f, args.m, args.unital).map_err(algdep_failure)? {
                Some(r) => {
                    let certificate = apply_polynomial_exact(&r, &f).map_err(algdep_failure)?;
                    json!({
                        "manifest": man,
                        "relation": r.to_string(),
                        "relation_terms": r.to_json(),
                        "certificate": certificate.to_string(),
                        "certificate_zero": certificate.is_zero(),
                    })
                }
                None => json!({
                    "manifest": man,
                    "relation": Value::Null,
                    "independent_up_to": args.m,
                }),
            }
        }
    };
    write_json(&args.out, "relation.json", &report)?;
    match report.get("relation").and_then(Value::as_str) {
        Some(r) => eprintln!("R = {r}"),
        None => eprintln!("independent up to degree {}", args.m),
    }
    Ok(())
}

fn configure_threads() {
    if let Some(n) = std::env::var("HYPERALG_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    // clap exits 2 on usage errors, which would collide with the trace-failure code
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    configure_threads();
    let outcome = match &cli.command {
        Command::Levelset(a) => levelset(a),
        Command::Construct(a) => construct(a),
        Command::Algdep(a) => algdep(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, err }) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
