use std::fs;
use std::path::Path;
use std::sync::Arc;

use bmclab_core::criterion::{criterion_value, ct_brw_critical_lambda, CriterionOptions, Graph};
use bmclab_core::kernel::{EnvironmentSpec, Window};
use bmclab_core::simulate::{simulate, write_replica_csv, SimulationConfig};
use bmclab_core::spectral::{spectral_radius_sup, write_trace};
use bmclab_core::{Error, Result};
use serde::Serialize;

use crate::args::{ClassifyArgs, CtbrwArgs, Format, SimulateArgs, SpectralArgs};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<Arc<EnvironmentSpec>> {
    let text = read(path)?;
    let spec = EnvironmentSpec::from_json(&text).map_err(|e| match e {
        Error::Json(j) => Error::Config(format!("{}: {j}", path.display())),
        other => other,
    })?;
    Ok(Arc::new(spec))
}

fn positive(name: &str, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("--{name} must be positive")))
    }
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable report");
    out.push(b'\n');
    out
}

pub fn classify(args: &ClassifyArgs) -> Result<Vec<u8>> {
    positive("tol", args.tol > 0.0)?;
    positive("boundary-tol", args.boundary_tol > 0.0)?;
    let spec = load_spec(&args.spec)?;
    let report = criterion_value(
        &spec,
        CriterionOptions {
            tol: args.tol,
            boundary_tol: args.boundary_tol,
        },
    )?;
    Ok(match args.format {
        Format::Json => json(&report),
        Format::Csv => {
            let theta: Vec<String> = report.theta_star.iter().map(|t| format!("{t:e}")).collect();
            let active: Vec<String> = report.active_laws.iter().map(|i| i.to_string()).collect();
            format!(
                "c,theta_star,active_laws,verdict,boundary_flag\n{:e},{},{},{:?},{}\n",
                report.c,
                theta.join(";"),
                active.join(";"),
                report.verdict,
                report.boundary_flag
            )
            .into_bytes()
        }
    })
}

#[derive(Serialize)]
struct SpectralRow {
    window: Option<i64>,
    estimate: f64,
    residual: f64,
    iterations: usize,
    converged: bool,
}

pub fn spectral(args: &SpectralArgs) -> Result<Vec<u8>> {
    positive("tol", args.tol > 0.0)?;
    positive("max-iter", args.max_iter > 0)?;
    if args.schedule.iter().any(|&l| l < 0) {
        return Err(Error::InvalidArgument("window half-widths must be >= 0".into()));
    }
    if args.schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("--schedule must be strictly increasing".into()));
    }
    let spec = load_spec(&args.spec)?;
    let l_max = *args.schedule.last().expect("clap requires a schedule");
    let env = spec.sample(Window::new(spec.dimension(), l_max)?, args.seed)?;
    let estimates = spectral_radius_sup(&env, &args.schedule, args.tol, args.max_iter)?;
    for e in estimates.iter().filter(|e| !e.converged) {
        eprintln!(
            "warning: L={} not converged after {} iterations (residual {:e})",
            e.window_size.unwrap_or(-1),
            e.iterations,
            e.residual
        );
    }
    Ok(match args.format {
        Format::Csv => {
            let mut out = Vec::new();
            write_trace(&estimates, &mut out)?;
            out
        }
        Format::Json => json(
            &estimates
                .iter()
                .map(|e| SpectralRow {
                    window: e.window_size,
                    estimate: e.value,
                    residual: e.residual,
                    iterations: e.iterations,
                    converged: e.converged,
                })
                .collect::<Vec<_>>(),
        ),
    })
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<Vec<u8>> {
    positive("replicas", args.replicas > 0)?;
    positive("horizon", args.horizon > 0)?;
    positive("cap", args.cap > 0)?;
    let spec = load_spec(&args.spec)?;
    let reach = spec.generator().max_reach();
    let half_width = match args.box_half_width {
        Some(l) if l < 0 => return Err(Error::InvalidArgument("--box must be >= 0".into())),
        Some(l) => l,
        None => (args.horizon as i64).saturating_mul(reach).saturating_add(1),
    };
    let window = Window::new(spec.dimension(), half_width)?;
    let env = spec.sample(window, args.seed)?;
    let cfg = SimulationConfig {
        origin: window.origin_rank(),
        replicas: args.replicas,
        horizon: args.horizon,
        cap: args.cap,
        seed: args.seed,
    };
    let (records, summary) = simulate(&env, &cfg)?;
    if summary.exhausted_fraction > 0.0 {
        eprintln!(
            "warning: {:.2}% of replicas left the box of half-width {half_width}",
            100.0 * summary.exhausted_fraction
        );
    }
    if let Some(path) = &args.runs {
        write_replica_csv(&records, fs::File::create(path)?)?;
    }
    Ok(match args.format {
        Format::Json => json(&summary),
        Format::Csv => {
            let mut out = Vec::new();
            write_replica_csv(&records, &mut out)?;
            out
        }
    })
}

#[derive(Serialize)]
struct CtbrwReport {
    vertices: usize,
    lambda_critical: f64,
    rho: f64,
}

pub fn ctbrw(args: &CtbrwArgs) -> Result<Vec<u8>> {
    positive("tol", args.tol > 0.0)?;
    let graph = Graph::parse_edge_list(&read(&args.graph)?)?;
    let r = ct_brw_critical_lambda(&graph, args.tol, args.max_iter)?;
    let report = CtbrwReport {
        vertices: graph.vertex_count(),
        lambda_critical: r.lambda_critical,
        rho: r.rho,
    };
    Ok(match args.format {
        Format::Json => json(&report),
        Format::Csv => format!(
            "vertices,lambda_critical,rho\n{},{:e},{:e}\n",
            report.vertices, report.lambda_critical, report.rho
        )
        .into_bytes(),
    })
}
