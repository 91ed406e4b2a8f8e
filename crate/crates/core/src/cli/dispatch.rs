use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Command, RunConfig, DEFAULT_OUTPUT_DIR};
use super::export::{expansion_table, hawking_table, leaves_table, write_json, write_text, Table};
use crate::landscape::{
    coordinate_sphere_hawking, expansion_diagnostics, find_critical_point, foliate_sweep,
    foliation_diagnostics, hessian_index, scalar_critical_point, FoliationOptions, SearchOptions,
    SPECTRAL_FLOOR,
};
use crate::metric::{
    curvature_bundle, scalar_hessian, ChartPoint, MetricProvider, ProviderRegistry,
    DEFAULT_GEODESIC_STEPS,
};
use crate::reduction::{ReducedFunctional, SolverOptions, FLOOR_SLACK, FLOOR_STALLS};
use crate::spectral::SphereGrid;
use crate::{Error, Mat3, Result, Vec3};

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub operation: String,
    pub seconds: f64,
}

/// Record of one run, written as `manifest.json` next to the outputs.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Canonical text of the configuration.
    pub config: String,
    pub version: String,
    pub output_dir: String,
    pub timings: Vec<Timing>,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
}

struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn timed<T>(&mut self, operation: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f();
        self.manifest.timings.push(Timing {
            operation: operation.to_string(),
            seconds: t.elapsed().as_secs_f64(),
        });
        out
    }

    fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        write_text(&self.dir, name, &table.to_csv())?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        write_json(&self.dir, name, value)?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }
}

fn mat(m: &Mat3) -> [[f64; 3]; 3] {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
}

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn metric_echo(provider: &dyn MetricProvider) -> Value {
    json!({ "name": provider.name(), "params": provider.params() })
}

fn solver_options(config: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol: config.tol,
        max_iter: config.max_iter.unwrap_or(SolverOptions::default().max_iter),
        polish: false,
    }
}

fn search_options(config: &RunConfig) -> SearchOptions {
    SearchOptions {
        tol: config.cp_tol,
        ..SearchOptions::default()
    }
}

fn tolerances(config: &RunConfig, scales: &[f64]) -> Value {
    let solver = solver_options(config);
    let search = search_options(config);
    json!({
        "correction": scales.iter().map(|e| solver.tolerance(*e)).collect::<Vec<_>>(),
        "correction_max_iter": solver.max_iter,
        "correction_floor_slack": FLOOR_SLACK,
        "correction_floor_stalls": FLOOR_STALLS,
        "gradient": scales.iter().map(|e| search.tolerance(*e)).collect::<Vec<_>>(),
        "hessian_step": search.hessian_step,
        "max_condition": search.max_condition,
        "spectral_floor": SPECTRAL_FLOOR,
    })
}

/// Runs `config` with the built-in providers.
pub fn dispatch(config: &RunConfig) -> Result<RunManifest> {
    dispatch_with(config, &ProviderRegistry::builtin())
}

/// Runs the pipeline selected by `config.command`, writes its tables and
/// `manifest.json` into the output directory and returns the manifest.
pub fn dispatch_with(config: &RunConfig, registry: &ProviderRegistry) -> Result<RunManifest> {
    config.validate(registry)?;
    let provider = registry.create(&config.metric, &config.params)?;
    let dir = PathBuf::from(config.output_dir.as_deref().unwrap_or(DEFAULT_OUTPUT_DIR));
    std::fs::create_dir_all(&dir)?;
    let mut run = Run {
        manifest: RunManifest {
            command: config.command.to_string(),
            config: config.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            output_dir: dir.display().to_string(),
            timings: Vec::new(),
            warnings: Vec::new(),
            outputs: Vec::new(),
        },
        dir,
    };
    let total = Instant::now();
    match config.command {
        Command::Curvature => curvature(&mut run, config, provider.as_ref())?,
        Command::Hawking => hawking(&mut run, config, provider)?,
        cmd => {
            let grid = run.timed("grid", || SphereGrid::new(config.band))?;
            let mut f =
                ReducedFunctional::new(&grid, provider).with_options(solver_options(config));
            f.steps = config.geodesic_steps.unwrap_or(DEFAULT_GEODESIC_STEPS);
            match cmd {
                Command::Expand => expand(&mut run, config, &f)?,
                Command::Solve => solve(&mut run, config, &f)?,
                Command::Landscape => landscape(&mut run, config, &f)?,
                Command::Foliate => foliate(&mut run, config, &f)?,
                Command::Curvature | Command::Hawking => unreachable!("handled above"),
            }
        }
    }
    run.manifest.timings.push(Timing {
        operation: "total".into(),
        seconds: total.elapsed().as_secs_f64(),
    });
    run.manifest.outputs.push("manifest.json".into());
    write_json(&run.dir, "manifest.json", &run.manifest)?;
    Ok(run.manifest)
}

fn curvature(run: &mut Run, config: &RunConfig, provider: &dyn MetricProvider) -> Result<()> {
    let p = Vec3::from(config.base_point());
    let b = run.timed("curvature", || curvature_bundle(provider, &p))?;
    let report = json!({
        "metric": metric_echo(provider),
        "P": arr(&p),
        "g": mat(&b.metric),
        "ricci": mat(&b.ricci),
        "scalar": b.scalar,
        "einstein": mat(&b.einstein),
        "grad_scalar": arr(&b.grad_scalar),
        "hess_scalar": mat(&b.hess_scalar),
        "riemann_norm": b.riemann_norm(),
        "symmetry_residual": b.symmetry_residual(),
        "route_deviation": b.route_deviation,
    });
    run.json("report.json", &report)
}

fn hawking(run: &mut Run, config: &RunConfig, provider: Arc<dyn MetricProvider>) -> Result<()> {
    let grid = SphereGrid::new(config.band)?;
    let center = Vec3::from(config.base_point());
    let radii = config.radii.as_deref().unwrap_or_default();
    let samples = run.timed("hawking", || {
        radii
            .iter()
            .map(|r| coordinate_sphere_hawking(&grid, provider.clone(), center, *r))
            .collect::<Result<Vec<_>>>()
    })?;
    run.csv("hawking.csv", &hawking_table(&samples))?;
    let report = json!({
        "metric": metric_echo(provider.as_ref()),
        "center": arr(&center),
        "samples": samples,
    });
    run.json("report.json", &report)
}

fn expand(run: &mut Run, config: &RunConfig, f: &ReducedFunctional) -> Result<()> {
    let eps = config.eps_grid.as_deref().unwrap_or_default();
    let p = ChartPoint(Vec3::from(config.base_point()));
    let r = run.timed("expansion_diagnostics", || expansion_diagnostics(f, p, eps))?;
    for (name, s) in [
        ("res_WE", &r.slopes.we),
        ("res_WEdiff", &r.slopes.wediff),
        ("res_H", &r.slopes.h),
        ("res_area_element", &r.slopes.area_element),
        ("res_Eq41", &r.slopes.reduced),
    ] {
        if !s.reliable {
            run.manifest.warnings.push(format!(
                "{name} reaches the spectral floor; its slope is not meaningful"
            ));
        }
    }
    run.csv("expand.csv", &expansion_table(&r.rows))?;
    let report = json!({
        "metric": metric_echo(f.provider().as_ref()),
        "L": config.band,
        "P": r.p,
        "scalar": r.scalar,
        "slopes": r.slopes,
        "sc_coefficient": r.rows.iter().map(|row| row.sc_coefficient).collect::<Vec<_>>(),
        "tolerances": tolerances(config, eps),
    });
    run.json("report.json", &report)
}

fn solve(run: &mut Run, config: &RunConfig, f: &ReducedFunctional) -> Result<()> {
    let eps = config.eps.expect("validated");
    let p = ChartPoint(Vec3::from(config.base_point()));
    let c = run.timed("solve_correction", || f.correction(eps, p, None))?;
    let chart = f.chart(eps, p)?;
    let mut t = Table::new(&["qx", "qy", "qz", "phi", "x", "y", "z"]);
    for ((q, phi), y) in f
        .grid
        .unit_points
        .iter()
        .zip(c.phi.values())
        .zip(&c.positions)
    {
        let x = chart.to_background(y);
        t.push_floats(&[q.x, q.y, q.z, *phi, x.x, x.y, x.z]);
    }
    run.csv("surface.csv", &t)?;
    let report = json!({
        "metric": metric_echo(f.provider().as_ref()),
        "L": config.band,
        "eps": eps,
        "P": p.to_array(),
        "energy": c.energy,
        "betas": c.betas,
        "residual": c.residual,
        "multiplier_residual": c.multiplier_residual(f.grid),
        "iterations": c.iterations,
        "history": c.history,
        "area_in_g_eps": c.area_in_g_eps,
        "orthogonality": c.orthogonality,
        "phi_sup": c.phi.sup_norm(),
        "tolerances": tolerances(config, &[eps]),
    });
    run.json("report.json", &report)
}

fn landscape(run: &mut Run, config: &RunConfig, f: &ReducedFunctional) -> Result<()> {
    let eps = config.eps.expect("validated");
    let start = ChartPoint(Vec3::from(config.start_point()));
    let provider = f.provider().clone();
    let cp = run.timed("find_critical_point", || {
        find_critical_point(f, eps, start, &search_options(config))
    })?;
    let p0 = match scalar_critical_point(provider.as_ref(), start) {
        Ok(p) => Some(p),
        Err(e) => {
            run.manifest
                .warnings
                .push(format!("no critical point of Sc near start: {e}"));
            None
        }
    };
    let at = p0.unwrap_or(cp.p_eps);
    let index = hessian_index(&cp.hessian, &scalar_hessian(provider.as_ref(), &at.0)?, eps);
    if index.inconclusive {
        run.manifest
            .warnings
            .push("index comparison inconclusive".into());
    }
    let mut t = Table::new(&["step", "Px", "Py", "Pz"]);
    for (k, x) in cp.trajectory.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(x.map(super::export::float));
        t.rows.push(row);
    }
    run.csv("trajectory.csv", &t)?;
    let report = json!({
        "metric": metric_echo(provider.as_ref()),
        "L": config.band,
        "eps": eps,
        "start": start.to_array(),
        "P_eps": cp.p_eps.to_array(),
        "P0": p0.map(|p| p.to_array()),
        "value": cp.value(),
        "grad": cp.sample.grad,
        "fd_grad": cp.sample.fd_grad,
        "grad_norm": cp.grad_norm,
        "hessian": mat(&cp.hessian),
        "eigenvalues": cp.eigenvalues,
        "index": cp.index,
        "betas": cp.betas,
        "iterations": cp.iterations,
        "index_report": index,
        "tolerances": tolerances(config, &[eps]),
    });
    run.json("report.json", &report)
}

fn foliate(run: &mut Run, config: &RunConfig, f: &ReducedFunctional) -> Result<()> {
    let eps = config.eps_grid.as_deref().unwrap_or_default();
    let start = ChartPoint(Vec3::from(config.start_point()));
    let options = FoliationOptions {
        search: search_options(config),
        pin_center: config.pin_center,
    };
    let sweep = run.timed("foliate_sweep", || foliate_sweep(f, start, eps, &options))?;
    if let Some(why) = &sweep.truncated {
        run.manifest
            .warnings
            .push(format!("sweep truncated: {why}"));
    }
    run.csv("leaves.csv", &leaves_table(&sweep.leaves))?;
    if sweep.leaves.len() < 3 {
        return Err(Error::Domain(format!(
            "foliation needs at least 3 leaves, sweep produced {}",
            sweep.leaves.len()
        )));
    }
    let rep = run.timed("foliation_diagnostics", || {
        foliation_diagnostics(f, &sweep.leaves)
    })?;
    let provider = f.provider();
    let hess_sc = scalar_hessian(provider.as_ref(), &sweep.p0.0)?;
    let indices: Vec<_> = sweep
        .leaves
        .iter()
        .filter_map(|l| {
            l.critical
                .as_ref()
                .map(|c| hessian_index(&c.hessian, &hess_sc, l.eps))
        })
        .collect();
    let report = json!({
        "metric": metric_echo(provider.as_ref()),
        "L": config.band,
        "verdict": rep.verdict,
        "verified": rep.verified,
        "eps_range": rep.eps_range,
        "violations": rep.violations,
        "P0": sweep.p0.to_array(),
        "scalar_at_P0": crate::metric::scalar_curvature(provider.as_ref(), &sweep.p0.0)?,
        "slopes": {
            "speed_deviation": rep.deviation_slope,
            "center_drift": rep.drift_slope,
            "phi_sup": rep.phi_slope,
        },
        "pairs": rep.pairs,
        "index": indices,
        "area_residual": sweep.leaves.iter().map(|l| l.area_residual).collect::<Vec<_>>(),
        "orthogonality": sweep.leaves.iter().map(|l| l.orthogonality).collect::<Vec<_>>(),
        "hawking_positive": sweep.leaves.iter().all(|l| l.hawking > 0.0),
        "truncated": sweep.truncated,
        "tolerances": tolerances(config, eps),
    });
    run.json("report.json", &report)
}

/// Shorthand used by the binary: resolves the output directory override.
pub fn with_output_dir(config: &RunConfig, dir: Option<&Path>) -> RunConfig {
    let mut c = config.clone();
    if let Some(d) = dir {
        c.output_dir = Some(d.display().to_string());
    }
    c
}
