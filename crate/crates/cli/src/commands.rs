use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use dirlab::cantor::{
    carleson_integral, growth_constant_audit, growth_exponent_fit, kset_lower_bound_audit, lambda_and_mu,
    CantorLevel, CantorSpec,
};
use dirlab::capacity::{cantor_capacity_zero_test, equilibrium_measure, LadderParams};
use dirlab::circle::{Arc, CircleGrid};
use dirlab::cyclicity::{cyclicity_run, necessary_condition_check, CampaignParams};
use dirlab::dirichlet::{
    carleson_substitute_audit, kset_constant, local_dirichlet_area, local_dirichlet_boundary, AuditRow,
    DistancePowerWeight,
};
use dirlab::disk::{DiskGrid, DiskGridParams};
use dirlab::frank_wolfe::SolverParams;
use dirlab::outer::{korenblum_audit, modulus_from_weight, BoundaryModulus, OuterFunction, SpectralOuter};
use dirlab::weight::PowerWeight;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{self, Config, SCHEMA_VERSION};
use crate::{CapacityMode, CliError, Common};

/// Depth of the level whose distance function stands in for `d(·, E)`.
const DEEP_LEVEL: usize = 40;
const GATE_DEPTH: usize = 12;
const KSET_TRIALS: usize = 2000;

/// Flags layered over the config file.
struct Ctx {
    cfg: Config,
    alphas: Vec<f64>,
    depth: Option<usize>,
    out: PathBuf,
    seed: u64,
    tolerance: Option<f64>,
}

impl Ctx {
    fn new(c: &Common) -> Result<Self, CliError> {
        let cfg = match &c.config {
            Some(p) => config::load(p)?,
            None => Config::new(),
        };
        let alphas = if c.alphas.is_empty() { cfg.alphas.clone() } else { c.alphas.clone() };
        if let Some(a) = alphas.iter().find(|a| !a.is_finite()) {
            return Err(CliError::Usage(format!("α = {a} is not finite")));
        }
        let depth = c.depth.or(cfg.resolution.depth);
        let out = c.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("dirlab-out"));
        let tolerance = c.tolerance.or(cfg.tolerance);
        if let Some(t) = tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("tolerance {t} must be finite and non-negative")));
            }
        }
        if let Some(n) = cfg.resolution.circle_n {
            if n < 8 || !n.is_power_of_two() {
                return Err(CliError::Usage(format!("resolution.circle_n = {n} must be a power of two ≥ 8")));
            }
        }
        Ok(Self { cfg, alphas, depth, out, seed: c.seed, tolerance })
    }

    fn alphas_or(&self, default: &[f64]) -> Vec<f64> {
        if self.alphas.is_empty() {
            default.to_vec()
        } else {
            self.alphas.clone()
        }
    }

    /// Configured set (middle thirds by default) at the requested depth.
    fn spec(&self, default_depth: usize) -> Result<CantorSpec<f64>, CliError> {
        let depth = self.depth.unwrap_or(default_depth);
        Ok(match &self.cfg.set {
            Some(s) if self.depth.is_some() => s.with_depth(depth)?,
            Some(s) => s.clone(),
            None => CantorSpec::middle_thirds(depth)?,
        })
    }

    /// Same set extended as deep as its description allows, up to `depth`.
    fn deep_spec(&self, spec: &CantorSpec<f64>, depth: usize) -> Result<CantorSpec<f64>, CliError> {
        Ok(spec.with_depth(depth.min(max_depth(spec)))?)
    }

    fn disk(&self, default: DiskGridParams) -> DiskGridParams {
        self.cfg.resolution.disk.unwrap_or(default)
    }

    fn circle_n(&self, default: usize) -> usize {
        self.cfg.resolution.circle_n.unwrap_or(default)
    }

    fn oversample(&self, default: usize) -> usize {
        self.cfg.resolution.oversample.unwrap_or(default)
    }

    fn prepare_out(&self) -> Result<&Path, CliError> {
        fs::create_dir_all(&self.out).map_err(|e| CliError::Io(format!("{}: {e}", self.out.display())))?;
        Ok(&self.out)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.prepare_out()?.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    fn write_json<S: Serialize>(&self, name: &str, value: &S) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn envelope(&self, command: &str, resolution: Value, report: Value) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "seed": self.seed,
            "resolution": resolution,
            "report": report,
        })
    }
}

fn max_depth(spec: &CantorSpec<f64>) -> usize {
    match spec.repr() {
        dirlab::cantor::CantorSpecRepr::Geometric(_) => dirlab::cantor::MAX_DEPTH,
        dirlab::cantor::CantorSpecRepr::Explicit(e) => e.ratios.len(),
    }
}

fn to_value<S: Serialize>(v: &S) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

fn sci(x: f64) -> String {
    format!("{x:.17e}")
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Failed(e.to_string());
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Failed(e.to_string()))
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if (0.0..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("α = {alpha} outside [0, 1)")))
    }
}

pub fn cantor(c: &Common) -> Result<(), CliError> {
    let ctx = Ctx::new(c)?;
    let spec = ctx.spec(12)?;
    let level = spec.level(spec.depth())?;
    let profile = level.gap_profile();
    let lo = level.arc_length() / 2.0;
    let mut ts = profile.breakpoints(lo, PI);
    ts.extend((0..64).map(|i| (lo.ln() + (PI.ln() - lo.ln()) * i as f64 / 63.0).exp()));
    ts.retain(|t| *t >= lo && *t <= PI);
    ts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs());
    let rows: Vec<Vec<String>> = ts
        .iter()
        .map(|&t| vec![sci(t), sci(level.neighborhood_measure(t)), level.counting_function(t).to_string()])
        .collect();
    ctx.write("cantor.csv", &csv_bytes(&["t", "measure", "count"], &rows)?)?;

    let lm = lambda_and_mu(&spec).ok();
    let mut kset = Vec::new();
    if lm.is_some() {
        for a in ctx.alphas_or(&[0.5]) {
            check_alpha(a)?;
            kset.push(kset_lower_bound_audit(&level, a, KSET_TRIALS, ctx.seed)?);
        }
    }
    let report = json!({
        "set": spec,
        "depth": spec.depth(),
        "lambda": lm.map(|p| p.0),
        "mu": lm.map(|p| p.1),
        "growth_exponent_fit": growth_exponent_fit(&level, 64).ok(),
        "carleson_integral": carleson_integral(&level),
        "growth_audit": lm.and_then(|_| growth_constant_audit(&level, 256).ok()),
        "kset_audits": kset,
    });
    let resolution = json!({ "depth": spec.depth(), "table_rows": rows.len(), "kset_trials": KSET_TRIALS });
    ctx.write_json("cantor.json", &ctx.envelope("cantor", resolution, report))
}

pub fn capacity(c: &Common, mode: CapacityMode) -> Result<(), CliError> {
    let ctx = Ctx::new(c)?;
    let alphas = ctx.alphas_or(&[0.5, 0.7]);
    for &a in &alphas {
        check_alpha(a)?;
    }
    match mode {
        CapacityMode::Criterion => {
            let spec = ctx.spec(ctx.cfg.resolution.capacity_depth.unwrap_or(16))?;
            lambda_and_mu(&spec)?;
            let params = LadderParams::default();
            let results = alphas
                .iter()
                .map(|&a| cantor_capacity_zero_test(&spec, a, &params))
                .collect::<dirlab::Result<Vec<_>>>()?;
            let report = json!({ "set": spec, "tests": results });
            let resolution = json!({ "depth": spec.depth(), "ladder": params });
            ctx.write_json("capacity.json", &ctx.envelope("capacity", resolution, report))
        }
        CapacityMode::Equilibrium => {
            let spec = ctx.spec(8)?;
            let level = spec.level(spec.depth())?;
            let support: Vec<f64> = level.arcs()?.iter().map(Arc::midpoint).collect();
            let params = SolverParams::default();
            for &a in &alphas {
                let eq = equilibrium_measure(&support, a, &params)?;
                let mut buf = Vec::new();
                eq.measure.write_csv(&mut buf)?;
                ctx.write(&format!("equilibrium_alpha{a}.csv"), &buf)?;
                let report = json!({
                    "alpha": a,
                    "energy": eq.energy,
                    "capacity_estimate": eq.capacity_estimate(),
                    "fw_gap": eq.fw_gap,
                    "spread": eq.spread,
                    "iterations": eq.iterations,
                    "converged": eq.converged,
                    "polished": eq.polished,
                    "trace_nonincreasing": eq.trace_nonincreasing(),
                    "trace": eq.trace,
                });
                let resolution = json!({ "depth": spec.depth(), "support_points": support.len(), "solver": params });
                ctx.write_json(&format!("equilibrium_alpha{a}.json"), &ctx.envelope("capacity", resolution, report))?;
            }
            Ok(())
        }
    }
}

pub fn outer(c: &Common) -> Result<(), CliError> {
    let ctx = Ctx::new(c)?;
    let tol = ctx.tolerance.unwrap_or(1e-2);
    let grid = CircleGrid::new(ctx.circle_n(1024))?;
    let opts = &ctx.cfg.outer;
    let (mut modulus, source, depth) = match &opts.modulus_csv {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let m = BoundaryModulus::read_csv(file, opts.floor)?;
            (m, json!({ "modulus_csv": path }), None)
        }
        None => {
            let beta = opts.weight_power.unwrap_or(4.0);
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(CliError::Usage(format!("weight_power = {beta} must be positive")));
            }
            let spec = ctx.spec(6)?;
            let level = spec.level(spec.depth())?;
            let m = modulus_from_weight(&PowerWeight::new(beta), &level, grid)?;
            (m, json!({ "weight_power": beta, "set": spec }), Some(spec.depth()))
        }
    };
    let shift = modulus.normalize();
    let mut buf = Vec::new();
    modulus.write_csv(&mut buf)?;
    ctx.write("modulus.csv", &buf)?;

    let disk_params = ctx.disk(DiskGridParams { boundary_layers: 12, ..DiskGridParams::default() });
    let disk = DiskGrid::<f64>::new(disk_params)?;
    let gammas: [(&str, Vec<Arc<f64>>); 3] =
        [("circle", vec![Arc::full()]), ("half", vec![Arc::new(0.0, PI)?]), ("empty", vec![])];
    let mut audits = Vec::new();
    let mut failed = Vec::new();
    for (name, gamma) in &gammas {
        let a = korenblum_audit(&modulus, gamma, &disk, tol)?;
        if !a.pass {
            failed.push(*name);
        }
        audits.push(json!({ "gamma": name, "audit": a }));
    }
    let mut necessary = Vec::new();
    for &a in &ctx.alphas {
        check_alpha(a)?;
        necessary.push(necessary_condition_check(&modulus, a, 0.1, 10, 256)?);
    }
    let report = json!({
        "source": source,
        "normalization_shift": shift,
        "clip": modulus.clip_report(),
        "f0_abs": OuterFunction::new(&modulus).value_at_zero(),
        "korenblum": audits,
        "necessary_condition": necessary,
    });
    let resolution = json!({ "circle_n": grid.len(), "depth": depth, "disk": disk_params });
    ctx.write_json("outer.json", &ctx.envelope("outer", resolution, report))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("Γ-localization audit failed for Γ ∈ {failed:?}")))
    }
}

pub fn dirichlet_audit(c: &Common) -> Result<(), CliError> {
    let ctx = Ctx::new(c)?;
    let tol = ctx.tolerance.unwrap_or(1e-3);
    let alphas = ctx.alphas_or(&[0.3, 0.5, 0.7]);
    for &a in &alphas {
        check_alpha(a)?;
    }
    let n = ctx.circle_n(2048);
    let oversample = ctx.oversample(4);
    let spec = ctx.spec(6)?;
    let (lambda, _) = lambda_and_mu(&spec)?;
    let level = spec.level(spec.depth())?;
    let deep_spec = ctx.deep_spec(&spec, DEEP_LEVEL)?;
    let deep = deep_spec.level(deep_spec.depth())?;
    let disk_params = ctx.disk(DiskGridParams::default());
    let disk = DiskGrid::<f64>::new(disk_params)?;
    let zetas: Vec<f64> = (0..8).map(|k| 0.1 + 2.0 * PI * k as f64 / 8.0).collect();

    let mut corpus: Vec<(String, SpectralOuter<f64>)> = vec![("1-z".into(), one_minus_z(n, oversample)?)];
    for beta in [1.0, 2.0, 4.0] {
        corpus.push((format!("f_w[t^{beta}]"), weight_outer(beta, &level, n, oversample)?));
    }

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut skipped = 0usize;
    let mut carleson = Vec::new();
    for (name, f) in &corpus {
        let usable: Vec<f64> = zetas.iter().copied().filter(|&z| !f.clipped_near(z)).collect();
        skipped += zetas.len() - usable.len();
        let area = local_dirichlet_area(f, &usable, &disk)?;
        for (&z, &a) in usable.iter().zip(&area) {
            let b = local_dirichlet_boundary(f, z, 16)?;
            let case = format!("local/{name}/zeta={z}");
            if (a - b).abs() > tol * a.abs().max(b.abs()) {
                failures.push(case.clone());
            }
            rows.push(AuditRow { case, lhs: a, rhs: b, ratio: a / b, resolution: n });
        }
        for &alpha in &alphas {
            let h = DistancePowerWeight { level: &deep, alpha, scale: 1.0 / kset_constant(lambda, alpha) };
            let audit = carleson_substitute_audit(f, &h, alpha, &disk, GATE_DEPTH, tol)?;
            let case = format!("carleson/{name}/alpha={alpha}");
            if !audit.pass {
                failures.push(case.clone());
            }
            rows.push(AuditRow { case: case.clone(), lhs: audit.lhs, rhs: audit.rhs, ratio: audit.ratio, resolution: n });
            carleson.push(json!({ "case": case, "audit": audit }));
        }
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.case.clone(), sci(r.lhs), sci(r.rhs), sci(r.ratio), r.resolution.to_string()])
        .collect();
    ctx.write("dirichlet_audit.csv", &csv_bytes(&["case", "lhs", "rhs", "ratio", "resolution"], &table)?)?;
    let report = json!({
        "set": spec,
        "tolerance": tol,
        "boundary_points_skipped": skipped,
        "taylor_tail": corpus.iter().map(|(n, f)| json!({ "case": n, "tail_fraction": f.tail_fraction() })).collect::<Vec<_>>(),
        "carleson": carleson,
        "failures": failures,
    });
    let resolution = json!({
        "circle_n": n,
        "oversample": oversample,
        "depth": spec.depth(),
        "h_depth": deep.level(),
        "gate_depth": GATE_DEPTH,
        "disk": disk_params,
    });
    ctx.write_json("dirichlet_audit.json", &ctx.envelope("dirichlet-audit", resolution, report))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{} audit case(s) failed: {}", failures.len(), failures.join(", "))))
    }
}

fn one_minus_z(n: usize, oversample: usize) -> Result<SpectralOuter<f64>, CliError> {
    let grid = CircleGrid::new(n)?;
    let floor = (2.0 * (PI / (2.0 * n as f64)).sin()).ln();
    let m = BoundaryModulus::from_fn(grid, |t: f64| (2.0 * (t / 2.0).sin().abs()).ln(), Some(floor))?;
    Ok(SpectralOuter::new(&OuterFunction::new(&m), oversample)?)
}

fn weight_outer(beta: f64, level: &CantorLevel<f64>, n: usize, oversample: usize) -> Result<SpectralOuter<f64>, CliError> {
    let m = modulus_from_weight(&PowerWeight::new(beta), level, CircleGrid::new(n)?)?;
    Ok(SpectralOuter::new(&OuterFunction::new(&m), oversample)?)
}

pub fn cyclicity(c: &Common) -> Result<(), CliError> {
    let ctx = Ctx::new(c)?;
    let alphas = ctx.alphas_or(&[0.7]);
    for &a in &alphas {
        check_alpha(a)?;
    }
    let mut params = CampaignParams::default();
    let r = &ctx.cfg.resolution;
    if let Some(d) = &ctx.cfg.deltas {
        if d.is_empty() || d.iter().any(|x| !(*x > 0.0 && *x < PI)) {
            return Err(CliError::Usage("deltas must be non-empty and lie in (0, π)".into()));
        }
        params.deltas = d.clone();
    }
    params.level_depth = ctx.depth.unwrap_or(params.level_depth);
    params.psi_depth = r.psi_depth.unwrap_or(params.psi_depth);
    params.capacity_depth = r.capacity_depth.unwrap_or(params.capacity_depth);
    params.samples_per_decade = r.samples_per_decade.unwrap_or(params.samples_per_decade);
    params.fw.grid_size = ctx.circle_n(params.fw.grid_size);
    params.fw.oversample = ctx.oversample(params.fw.oversample);
    params.fw.disk = ctx.disk(params.fw.disk);
    let spec = match &ctx.cfg.set {
        Some(s) => s.clone(),
        None => CantorSpec::middle_thirds(params.level_depth.max(params.psi_depth))?,
    };

    let mut failed = Vec::new();
    for &a in &alphas {
        let report = cyclicity_run(&spec, a, &params)?;
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        ctx.write(&format!("cyclicity_alpha{a}.csv"), &buf)?;
        let pass = report.verdicts.all_pass();
        ctx.write_json(
            &format!("cyclicity_alpha{a}.json"),
            &ctx.envelope("cyclicity", to_value(&params), json!({ "all_pass": pass, "campaign": report })),
        )?;
        if !pass {
            failed.push(a);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("cyclicity surrogates failed for α ∈ {failed:?}")))
    }
}
