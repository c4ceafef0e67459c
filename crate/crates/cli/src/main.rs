//! `hypermcf`: certification suites and flow experiments for mean curvature
//! flow of submanifolds of hyperbolic space.
//!
//! Subcommands: `lemmas`, `flow <sphere|tube|axisym>`, `sample-tensors`,
//! `report`. Configuration is flat `key=value` (config file plus CLI
//! overrides); exit code 0 means all checks passed, 2 a violated invariant
//! or runtime failure, 3 a configuration error.

mod config;
mod svg;

use config::KvConfig;
use hypermcf_core::certify::{run_lemmas, LemmasConfig};
use hypermcf_core::curvature::{pinch_report, sampler};
use hypermcf_core::flow::axisym::{self, AxisymConfig, ProfileKind};
use hypermcf_core::flow::equivariant::{self, EquivariantConfig, EquivariantFamily};
use hypermcf_core::flow::{FlowTrace, MonitorConfig};
use hypermcf_core::pinching::PinchingProfile;
use hypermcf_core::report::{write_atomic, write_trace_csv, RunManifest};
use hypermcf_core::{rng, Error, Result};
use std::path::{Path, PathBuf};

const USAGE: &str = r#"hypermcf - mean curvature flow laboratory for hyperbolic ambient spaces

USAGE:
    hypermcf <COMMAND> [FLAGS] [key=value ...]

COMMANDS:
    lemmas                 run the pointwise certification suites
    flow sphere            integrate a shrinking geodesic sphere (exact ODE)
    flow tube              integrate a collapsing geodesic tube (exact ODE)
    flow axisym            integrate a rotationally symmetric hypersurface (1-D FD)
    sample-tensors         dump pinched second-fundamental-form samples as NDJSON
    report <RUN_DIR>       summarize a finished run directory

FLAGS:
    --config PATH          key=value config file (CLI pairs override it)
    --seed N               override the `seed` key
    --out DIR              output directory (default hypermcf-out)
    --plot                 also write SVG polyline charts (flow runs)
    --threads N            worker threads for suite shards
                           (fallback: HYPERMCF_THREADS, then all cores)
    --help, --version

VALUES:
    reals accept plain floats plus atanh(x), asinh(x), acosh(x), pi, pi/K
    lists are comma-separated (n=6,8)

KEYS (lemmas):
    n=6,8                  tensor-suite dimensions
    q=1,3                  tensor-suite codimensions
    c=-1                   ambient curvatures (all < 0)
    samples=100000         random samples per suite and (n,q,c)
    seed=42                base seed (fixed shard splitting)
    sweep_n=6,8,10,13,5    scalar-sweep dimensions (n<6 records the
                           expected-fail violation witness)
    sweep_c=-1,-0.3        scalar-sweep curvatures
    beta_c=-1,-4           curvatures for the n=5 comparison function
    grid=512               log-grid points per decade
    eps=0.005              pinched-sampler margin parameter
    threads=0              worker threads (0 = all)

KEYS (flow sphere | flow tube):
    n=6  q=1  c=-1         dimensions and ambient curvature
    rho0=1                 initial geodesic radius (sphere)
    s0=atanh(0.5)          initial tube radius (tube)
    dt0=...                initial step (default 1e-3 r0/|H(0)|)
    eps=0                  pinch-margin monitor eps
    sigma=0.1              exponent for f_sigma and the ratio monitor
    eta=...                gradient-monitor parameter in (0, 1/n)
    cadence=1              steps between recorded rows
    max_steps=20000000
    window=1               reported axial half-length for the tube
    assert=true            enforce the family monitors

KEYS (flow axisym):
    n=6  c=-1              dimension and ambient curvature
    shape=ellipsoid        sphere | ellipsoid | capped_tube
    rho0=1                 sphere radius
    a=1 b=1.1              ellipsoid equatorial/polar geodesic radii
    s=atanh(0.5) length=3  capped-tube radius and axial half-length
    nodes=400              profile nodes
    cfl=0.2                dt = cfl * min(ds)^2
    cadence=nodes/8        steps between recorded rows
    eps=...                pinch eps (default 0.9 eps_star(M0))
    sigma=0.1  eta=...     monitor exponents
    diam_tol=0.01          round-point: diam < diam_tol * diam(0)
    ratio_tol=0.95         round-point: |H|min/|H|max above this
    ho_ratio_tol=0.001     round-point: max |h-ring|^2/|H|^2 below this
    h_max_stop=1000*k      stop when |H|max exceeds this
    max_steps=50000000
    assert_pinched=...     require a pinched start and positive margins
                           (default true for sphere/ellipsoid)
    assert_monitors=true   enforce x0 decay, gradient and reaction checks
    x0_tol_coeff=50        coefficient of the O(ds^2) x0-decay tolerance

KEYS (sample-tensors):
    n=6 q=3 c=-1 eps=0.005 count=100 seed=42
"#;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

struct Invocation {
    command: Vec<String>,
    cfg: KvConfig,
    out: PathBuf,
    plot: bool,
    threads: usize,
}

fn parse_args(args: &[String]) -> Result<Invocation> {
    let mut command = Vec::new();
    let mut pairs = Vec::new();
    let mut config_path = None;
    let mut seed = None;
    let mut out = PathBuf::from("hypermcf-out");
    let mut plot = false;
    let mut threads = None;
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--help" | "-h" => {
                println!("{USAGE}");
                std::process::exit(0);
            }
            "--version" | "-V" => {
                println!("hypermcf {}", hypermcf_core::ARTIFACT_VERSION);
                std::process::exit(0);
            }
            "--config" => {
                config_path = Some(
                    it.next()
                        .ok_or_else(|| Error::Config("--config needs a path".into()))?
                        .clone(),
                )
            }
            "--seed" => {
                let v = it
                    .next()
                    .ok_or_else(|| Error::Config("--seed needs a value".into()))?;
                seed = Some(v.parse::<u64>().map_err(|_| {
                    Error::Config(format!("--seed: cannot parse {v:?} as an integer"))
                })?);
            }
            "--out" => {
                out = PathBuf::from(
                    it.next()
                        .ok_or_else(|| Error::Config("--out needs a directory".into()))?,
                )
            }
            "--plot" => plot = true,
            "--threads" => {
                let v = it
                    .next()
                    .ok_or_else(|| Error::Config("--threads needs a value".into()))?;
                threads = Some(v.parse::<usize>().map_err(|_| {
                    Error::Config(format!("--threads: cannot parse {v:?}"))
                })?);
            }
            s if s.starts_with("--") => {
                return Err(Error::Config(format!("unknown flag {s}")));
            }
            s if s.contains('=') => pairs.push(s.to_string()),
            s => command.push(s.to_string()),
        }
    }
    let mut cfg = match config_path {
        Some(p) => KvConfig::from_file(&p)?,
        None => KvConfig::default(),
    };
    for pair in &pairs {
        cfg.insert_pair(pair)?;
    }
    if let Some(s) = seed {
        cfg.set("seed", s.to_string());
    }
    let threads = match threads {
        Some(t) => t,
        None => match std::env::var("HYPERMCF_THREADS") {
            Ok(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("HYPERMCF_THREADS: cannot parse {v:?}")))?,
            Err(_) => 0,
        },
    };
    Ok(Invocation {
        command,
        cfg,
        out,
        plot,
        threads,
    })
}

fn run(args: &[String]) -> Result<i32> {
    if args.is_empty() {
        println!("{USAGE}");
        return Ok(3);
    }
    let inv = parse_args(args)?;
    match inv.command.first().map(|s| s.as_str()) {
        Some("lemmas") if inv.command.len() == 1 => cmd_lemmas(&inv),
        Some("flow") if inv.command.len() == 2 => cmd_flow(&inv),
        Some("sample-tensors") if inv.command.len() == 1 => cmd_sample_tensors(&inv),
        Some("report") if inv.command.len() == 2 => cmd_report(Path::new(&inv.command[1])),
        _ => Err(Error::Config(format!(
            "unrecognized command {:?}; see --help",
            inv.command.join(" ")
        ))),
    }
}

fn cmd_lemmas(inv: &Invocation) -> Result<i32> {
    inv.cfg.check_keys(&[
        "n", "q", "c", "samples", "seed", "sweep_n", "sweep_c", "beta_c", "grid", "eps", "threads",
    ])?;
    let d = LemmasConfig::default();
    let cfg = LemmasConfig {
        n_list: inv.cfg.get_u32_list("n", &d.n_list)?,
        q_list: inv.cfg.get_u32_list("q", &d.q_list)?,
        c_list: inv.cfg.get_f64_list("c", &d.c_list)?,
        sample_count: inv.cfg.get_u64("samples", d.sample_count)?,
        seed: inv.cfg.get_u64("seed", d.seed)?,
        sweep_n_list: inv.cfg.get_u32_list("sweep_n", &d.sweep_n_list)?,
        sweep_c_list: inv.cfg.get_f64_list("sweep_c", &d.sweep_c_list)?,
        beta_c_list: inv.cfg.get_f64_list("beta_c", &d.beta_c_list)?,
        grid_per_decade: inv.cfg.get_u32("grid", d.grid_per_decade)?,
        eps_pinched: inv.cfg.get_f64("eps", d.eps_pinched)?,
        threads: inv.cfg.get_usize("threads", inv.threads)?,
    };

    let mut manifest = RunManifest::new("lemmas", inv.cfg.echo());
    let report = run_lemmas(&cfg)?;
    write_atomic(&inv.out.join("lemmas_report.json"), report.to_json().as_bytes())?;

    let mut worst = f64::INFINITY;
    for check in &report.checks {
        let flag = if check.pass { "ok  " } else { "FAIL" };
        let tag = if check.expected_fail { " (expected-fail witness)" } else { "" };
        println!(
            "{flag} {:<55} value {:+.6e} threshold {:+.3e}{tag}",
            check.name, check.value, check.threshold
        );
        manifest.push_check(&check.name, check.value, check.threshold, check.pass);
        if !check.expected_fail {
            worst = worst.min(check.value - check.threshold);
        }
    }
    manifest
        .summary
        .insert("checks_total".into(), report.checks.len() as f64);
    manifest.summary.insert(
        "checks_failed".into(),
        report.checks.iter().filter(|c| !c.pass).count() as f64,
    );
    manifest.finish();
    manifest.write(&inv.out.join("manifest.json"))?;

    println!(
        "{} checks, all_pass = {}; report at {}",
        report.checks.len(),
        report.all_pass,
        inv.out.join("lemmas_report.json").display()
    );
    Ok(if report.all_pass { 0 } else { 2 })
}

fn monitor_from(cfg: &KvConfig, n: u32, c: f64) -> Result<MonitorConfig> {
    let d = MonitorConfig::default_for(n, c);
    Ok(MonitorConfig {
        sigma: cfg.get_f64("sigma", d.sigma)?,
        eta: cfg.get_f64("eta", d.eta)?,
        diam_tol: cfg.get_f64("diam_tol", d.diam_tol)?,
        ratio_tol: cfg.get_f64("ratio_tol", d.ratio_tol)?,
        ho_ratio_tol: cfg.get_f64("ho_ratio_tol", d.ho_ratio_tol)?,
        h_max_stop: cfg.get_f64("h_max_stop", d.h_max_stop)?,
    })
}

fn cmd_flow(inv: &Invocation) -> Result<i32> {
    let engine = inv.command[1].as_str();
    let (trace, mut manifest) = match engine {
        "sphere" | "tube" => run_equivariant(inv, engine)?,
        "axisym" => run_axisym(inv)?,
        other => {
            return Err(Error::Config(format!(
                "unknown engine {other:?} (expected sphere, tube, or axisym)"
            )))
        }
    };

    write_trace_csv(&inv.out.join("trace.csv"), &trace)?;
    if inv.plot {
        svg::write_plots(&inv.out.join("plots"), &trace)?;
    }
    manifest.status = Some(trace.status);
    manifest.extinction_time = trace.extinction_time;
    let s = &trace.summary;
    for (key, value) in [
        ("steps", s.steps as f64),
        ("final_time", s.final_time),
        ("rows", trace.rows.len() as f64),
        ("min_pinch_margin", s.min_pinch_margin),
        ("max_boundary_residual", s.max_boundary_residual),
        ("min_mean_excess", s.min_mean_excess),
        ("final_ho_ratio", s.final_ho_ratio),
        ("max_x0_excess", s.max_x0_excess),
    ] {
        manifest.summary.insert(key.into(), value);
    }
    manifest.finish();
    manifest.write(&inv.out.join("manifest.json"))?;

    println!(
        "status {} after {} steps, t = {:.6e}{}",
        trace.status.as_str(),
        s.steps,
        s.final_time,
        match trace.extinction_time {
            Some(t) => format!(", extinction estimate {t:.7e}"),
            None => String::new(),
        }
    );
    println!(
        "trace: {} rows at {}",
        trace.rows.len(),
        inv.out.join("trace.csv").display()
    );
    Ok(if manifest.all_pass { 0 } else { 2 })
}

fn run_equivariant(inv: &Invocation, engine: &str) -> Result<(FlowTrace, RunManifest)> {
    let common = [
        "n", "q", "c", "dt0", "eps", "sigma", "eta", "cadence", "max_steps", "window", "assert",
        "diam_tol", "ratio_tol", "ho_ratio_tol", "h_max_stop", "seed",
    ];
    let n = inv.cfg.get_u32("n", 6)?;
    let c = inv.cfg.get_f64("c", -1.0)?;
    let family = match engine {
        "sphere" => {
            inv.cfg
                .check_keys(&[&common[..], &["rho0"]].concat())?;
            EquivariantFamily::Sphere {
                rho0: inv.cfg.get_f64("rho0", 1.0)?,
            }
        }
        _ => {
            inv.cfg.check_keys(&[&common[..], &["s0"]].concat())?;
            EquivariantFamily::Tube {
                s0: inv.cfg.get_f64("s0", 0.5f64.atanh())?,
            }
        }
    };
    let cfg = EquivariantConfig {
        n,
        q: inv.cfg.get_u32("q", 1)?,
        c,
        family,
        dt0: inv.cfg.get_opt_f64("dt0")?,
        eps: inv.cfg.get_f64("eps", 0.0)?,
        monitor: monitor_from(&inv.cfg, n, c)?,
        cadence: inv.cfg.get_u32("cadence", 1)?,
        max_steps: inv.cfg.get_u64("max_steps", 20_000_000)?,
        tube_window_half_length: inv.cfg.get_f64("window", 1.0)?,
        assert_monitors: inv.cfg.get_bool("assert", true)?,
    };
    let mut manifest = RunManifest::new(&format!("flow {engine}"), inv.cfg.echo());
    let trace = equivariant::run_flow(&cfg)?;
    match engine {
        "sphere" => {
            manifest.push_check(
                "pinch_margin_min_positive",
                trace.summary.min_pinch_margin,
                0.0,
                trace.summary.min_pinch_margin > 0.0,
            );
            manifest.push_check(
                "x0_decay_excess",
                trace.summary.max_x0_excess,
                1e-9,
                trace.summary.max_x0_excess <= 1e-9,
            );
        }
        _ => {
            manifest.push_check(
                "boundary_identity_max_residual",
                trace.summary.max_boundary_residual,
                1e-9,
                trace.summary.max_boundary_residual <= 1e-9,
            );
            let limit = 1.0 / (n as f64 * (n as f64 - 1.0));
            let gap = (trace.summary.final_ho_ratio - limit).abs();
            manifest.push_check("ho_ratio_limit_gap", gap, 1e-4, gap <= 1e-4);
        }
    }
    Ok((trace, manifest))
}

fn run_axisym(inv: &Invocation) -> Result<(FlowTrace, RunManifest)> {
    inv.cfg.check_keys(&[
        "n", "c", "shape", "rho0", "a", "b", "s", "length", "nodes", "cfl", "cadence", "eps",
        "sigma", "eta", "diam_tol", "ratio_tol", "ho_ratio_tol", "h_max_stop", "max_steps",
        "assert_pinched", "assert_monitors", "x0_tol_coeff", "seed",
    ])?;
    let n = inv.cfg.get_u32("n", 6)?;
    let c = inv.cfg.get_f64("c", -1.0)?;
    let shape = match inv.cfg.get_str("shape").unwrap_or("ellipsoid") {
        "sphere" => ProfileKind::Sphere {
            rho0: inv.cfg.get_f64("rho0", 1.0)?,
        },
        "ellipsoid" => ProfileKind::Ellipsoid {
            a: inv.cfg.get_f64("a", 1.0)?,
            b: inv.cfg.get_f64("b", 1.1)?,
        },
        "capped_tube" => ProfileKind::CappedTube {
            s: inv.cfg.get_f64("s", 0.5f64.atanh())?,
            half_length: inv.cfg.get_f64("length", 3.0)?,
        },
        other => {
            return Err(Error::Config(format!(
                "unknown shape {other:?} (expected sphere, ellipsoid, or capped_tube)"
            )))
        }
    };
    let node_count = inv.cfg.get_usize("nodes", 400)?;
    let default_assert = matches!(
        shape,
        ProfileKind::Sphere { .. } | ProfileKind::Ellipsoid { .. }
    );
    let base = AxisymConfig::new(n, c, shape, node_count);
    let cfg = AxisymConfig {
        monitor: monitor_from(&inv.cfg, n, c)?,
        eps: inv.cfg.get_opt_f64("eps")?,
        assert_pinched: inv.cfg.get_bool("assert_pinched", default_assert)?,
        cfl: inv.cfg.get_f64("cfl", base.cfl)?,
        cadence: inv.cfg.get_u32("cadence", base.cadence)?,
        max_steps: inv.cfg.get_u64("max_steps", base.max_steps)?,
        assert_monitors: inv.cfg.get_bool("assert_monitors", true)?,
        x0_tol_coeff: inv.cfg.get_f64("x0_tol_coeff", base.x0_tol_coeff)?,
        ..base
    };
    let mut manifest = RunManifest::new("flow axisym", inv.cfg.echo());
    let run = axisym::run_flow(&cfg)?;
    manifest.summary.insert("eps".into(), run.eps);
    manifest.summary.insert("eps_star0".into(), run.eps_star0);
    manifest
        .summary
        .insert("remesh_count".into(), run.remesh_count as f64);
    if cfg.assert_pinched {
        manifest.push_check(
            "pinch_margin_min_positive",
            run.trace.summary.min_pinch_margin,
            0.0,
            run.trace.summary.min_pinch_margin > 0.0,
        );
    }
    manifest.push_check(
        "x0_decay_excess_minus_tol",
        run.trace.summary.max_x0_excess,
        0.0,
        true, // enforced during the run; recorded here for the report
    );
    Ok((run.trace, manifest))
}

fn cmd_sample_tensors(inv: &Invocation) -> Result<i32> {
    inv.cfg
        .check_keys(&["n", "q", "c", "eps", "count", "seed"])?;
    let n = inv.cfg.get_usize("n", 6)?;
    let q = inv.cfg.get_usize("q", 3)?;
    let c = inv.cfg.get_f64("c", -1.0)?;
    let eps = inv.cfg.get_f64("eps", 0.005)?;
    let count = inv.cfg.get_u64("count", 100)?;
    let seed = inv.cfg.get_u64("seed", 42)?;

    let profile = PinchingProfile::new(n as u32, c)?;
    let mut out = String::new();
    let mut generator = rng::seeded(seed);
    for index in 0..count {
        let h = sampler::random_pinched(n, q, c, eps, &mut generator)?;
        let report = pinch_report(&h, c, eps)?;
        // revalidate the margin before the record is written
        let margin = profile.pinch_margin(&h, eps)?;
        if !(margin > 0.0) {
            return Err(Error::Sampler(format!(
                "sample {index} has non-positive pinch margin {margin:.6e}"
            )));
        }
        let record = serde_json::json!({
            "index": index,
            "n": n,
            "q": q,
            "c": c,
            "eps": eps,
            "blocks": (0..q).map(|a| h.block(a).to_vec()).collect::<Vec<_>>(),
            "pinch_margin": margin,
            "report": report,
        });
        out.push_str(&serde_json::to_string(&record).expect("record serializes"));
        out.push('\n');
    }
    let path = inv.out.join("tensors.ndjson");
    write_atomic(&path, out.as_bytes())?;

    let mut manifest = RunManifest::new("sample-tensors", inv.cfg.echo());
    manifest.summary.insert("count".into(), count as f64);
    manifest.finish();
    manifest.write(&inv.out.join("manifest.json"))?;
    println!("{count} records at {}", path.display());
    Ok(0)
}

fn cmd_report(dir: &Path) -> Result<i32> {
    let manifest_path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&manifest_path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", manifest_path.display())))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("cannot parse {}: {e}", manifest_path.display())))?;

    println!("command:   {}", manifest.command);
    println!("version:   {}", manifest.artifact_version);
    if let Some(status) = manifest.status {
        println!("status:    {}", status.as_str());
    }
    if let Some(t) = manifest.extinction_time {
        println!("extinction estimate: {t:.7e}");
    }
    if !manifest.config.is_empty() {
        let echo: Vec<String> = manifest
            .config
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        println!("config:    {}", echo.join(" "));
    }
    for (k, v) in &manifest.summary {
        println!("  {k:<28} {v:+.9e}");
    }
    for check in &manifest.checks {
        println!(
            "  [{}] {:<40} value {:+.6e} threshold {:+.3e}",
            if check.pass { "ok" } else { "FAIL" },
            check.name,
            check.value,
            check.threshold
        );
    }
    let trace_path = dir.join("trace.csv");
    if let Ok(trace) = std::fs::read_to_string(&trace_path) {
        println!("trace:     {} rows", trace.lines().count().saturating_sub(1));
    }
    println!("all_pass:  {}", manifest.all_pass);
    Ok(if manifest.all_pass { 0 } else { 2 })
}
