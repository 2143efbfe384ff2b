//! Command implementations. Each resolves its defaults in place (so the
//! echoed config reproduces the run) and returns an [`Outcome`].

use std::path::Path;

use serde_json::{json, Map, Value};
use weylsim::asymptotics::{k_r_estimate, k_r_series, regime_report, GrowthRegime, KrConfig};
use weylsim::ensemble::{self, cached_dz, default_k_list, estimate_dz, lln_check, rate_function, sample_h_ensemble, EmpiricalMeasure, McmcConfig};
use weylsim::kmgr::{default_quadrature_order, survival_kmgr, Kernel1D, KernelMethod};
use weylsim::spectral::{enumerate_indices, principal_eigenvalue, survival_spectral_series, SeriesBudget};
use weylsim::stochastic::{discretisation_allowance, sample_conditioned_endpoints, simulate_survival, McConfig};
use weylsim::{ChamberPoint, WeylError, WeylType};

use crate::args::*;
use crate::render::{float_value, fmt_f64, opt_f64, Table};

#[derive(Debug)]
pub enum CliError {
    Weyl(WeylError),
    /// unreadable or malformed input files
    Input(String),
}

impl From<WeylError> for CliError {
    fn from(e: WeylError) -> Self {
        CliError::Weyl(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Weyl(e) => write!(f, "{e}"),
            CliError::Input(m) => write!(f, "input: {m}"),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// How a completed run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// the routes of `survival --method all` disagree beyond their bounds
    Disagreement,
    /// fewer samples than requested
    Shortfall,
}

pub struct Outcome {
    pub body: Map<String, Value>,
    pub table: Table,
    pub status: Status,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn new(body: Value, table: Table) -> Self {
        let Value::Object(body) = body else { unreachable!("bodies are objects") };
        Self {
            body,
            table,
            status: Status::Ok,
            warnings: Vec::new(),
        }
    }
}

/// Fill in defaults that depend on other arguments.
pub fn resolve(cmd: &mut Command, g: &Global) -> CliResult<()> {
    match cmd {
        Command::Survival(a) => {
            let spec = a.chamber.spec()?;
            let (spectral, kmgr, mc) = routes(a.method);
            if spectral && a.cutoff.is_none() {
                a.cutoff = Some(SeriesBudget::default_cutoff(&spec, a.t));
            }
            if kmgr {
                let d = Kernel1D::with_defaults(a.t, spec.r)?;
                let kernel = a.kernel.unwrap_or(match d.method {
                    KernelMethod::EigenSeries => KernelArg::Eigen,
                    KernelMethod::ImageSeries => KernelArg::Image,
                });
                a.kernel = Some(kernel);
                a.truncation
                    .get_or_insert(weylsim::kmgr::default_truncation(kernel_method(kernel), a.t, spec.r));
                a.order.get_or_insert(default_quadrature_order(&spec, a.t));
            }
            if mc {
                resolve_mc(&mut a.mc, a.t, g.seed);
            }
        }
        Command::Endpoints(a) => resolve_mc(&mut a.mc, a.t, g.seed),
        Command::Kr(a) => {
            a.dt.get_or_insert(KrConfig::new(a.paths, g.seed).dt);
        }
        Command::Ensemble(a) => {
            let d = McmcConfig::defaults(a.k, g.seed);
            a.steps.get_or_insert(d.steps);
            a.burnin.get_or_insert(d.burnin);
            a.proposal_scale.get_or_insert(d.proposal_scale);
            a.chains.get_or_insert(d.chains);
        }
        Command::Dz(a) => {
            a.k_list.get_or_insert_with(default_k_list);
        }
        _ => {}
    }
    Ok(())
}

fn resolve_mc(mc: &mut McArgs, t: f64, seed: u64) {
    let d = McConfig::for_horizon(t, seed);
    mc.paths.get_or_insert(d.paths);
    mc.dt.get_or_insert(d.dt);
}

fn mc_config(mc: &McArgs, seed: u64) -> McConfig {
    McConfig {
        paths: mc.paths.expect("resolved"),
        dt: mc.dt.expect("resolved"),
        seed,
        bridge_correction: !mc.no_bridge,
        antithetic: mc.antithetic,
    }
}

fn routes(m: RouteArg) -> (bool, bool, bool) {
    match m {
        RouteArg::Spectral => (true, false, false),
        RouteArg::Kmgr => (false, true, false),
        RouteArg::Mc => (false, false, true),
        RouteArg::All => (true, true, true),
    }
}

fn kernel_method(k: KernelArg) -> KernelMethod {
    match k {
        KernelArg::Eigen => KernelMethod::EigenSeries,
        KernelArg::Image => KernelMethod::ImageSeries,
    }
}

fn require_tolerance(tol: Option<f64>) -> CliResult<Option<f64>> {
    match tol {
        Some(t) if !(t.is_finite() && t > 0.0) => Err(WeylError::Parameter {
            name: "tolerance",
            value: t,
            constraint: "must be finite and > 0".into(),
        }
        .into()),
        other => Ok(other),
    }
}

pub fn run(cmd: &Command, g: &Global) -> CliResult<Outcome> {
    match cmd {
        Command::Spectrum(a) => spectrum(a),
        Command::Survival(a) => survival(a, g),
        Command::Asymptotics(a) => asymptotics(a),
        Command::Kr(a) => kr(a, g),
        Command::Ensemble(a) => ensemble_cmd(a, g),
        Command::Rate(a) => rate(a),
        Command::Lln(a) => lln(a),
        Command::Endpoints(a) => endpoints(a, g),
        Command::Dz(a) => dz(a),
        Command::Replay(_) => unreachable!("replay is unpacked before dispatch"),
    }
}

fn indices_str(l: &[u32]) -> String {
    l.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

fn spectrum(a: &SpectrumArgs) -> CliResult<Outcome> {
    weylsim::ChamberSpec::new(a.weyl_type, a.k, 1.0)?;
    let idx = enumerate_indices(a.weyl_type, a.k, a.cutoff);
    let mut levels: Vec<(f64, Vec<Vec<u32>>)> = Vec::new();
    for m in &idx {
        match levels.last_mut() {
            Some((lam, group)) if *lam == m.lambda() => group.push(m.indices().to_vec()),
            _ => levels.push((m.lambda(), vec![m.indices().to_vec()])),
        }
    }
    let mut table = Table::new(["level", "lambda", "multiplicity", "indices"]);
    for (i, (lam, group)) in levels.iter().enumerate() {
        for l in group {
            table.push(vec![(i + 1).to_string(), fmt_f64(*lam), group.len().to_string(), indices_str(l)]);
        }
    }
    let body = json!({
        "principal_eigenvalue": principal_eigenvalue(a.weyl_type, a.k),
        "levels": levels.iter().map(|(lam, group)| json!({
            "lambda": lam,
            "multiplicity": group.len(),
            "indices": group,
        })).collect::<Vec<_>>(),
    });
    let mut out = Outcome::new(body, table);
    if levels.is_empty() {
        out.warnings.push(format!(
            "cutoff {} is below the principal eigenvalue {}; nothing to list",
            a.cutoff,
            principal_eigenvalue(a.weyl_type, a.k)
        ));
    }
    Ok(out)
}

/// Smallest cutoff `λ₁ + 2^j (cutoff - λ₁)` whose bound meets the tolerance.
fn spectral_to_tolerance(spec: &weylsim::ChamberSpec, t: f64, x: &ChamberPoint, cutoff: f64, tol: Option<f64>) -> CliResult<weylsim::spectral::SeriesValue> {
    let lam = principal_eigenvalue(spec.weyl_type, spec.k);
    let mut c = cutoff;
    for _ in 0..12 {
        let s = survival_spectral_series(spec, t, x, c)?;
        match tol {
            Some(tol) if s.error_bound > tol => c = lam + 2.0 * (c - lam).max(1.0),
            _ => return Ok(s),
        }
    }
    Err(WeylError::Budget(format!("spectral bound did not reach tolerance {} (last cutoff {c})", tol.unwrap_or(0.0))).into())
}

fn kmgr_to_tolerance(
    spec: &weylsim::ChamberSpec,
    t: f64,
    x: &ChamberPoint,
    kern: &Kernel1D,
    order: usize,
    tol: Option<f64>,
) -> CliResult<(weylsim::SurvivalResult, usize)> {
    let mut n = order;
    for _ in 0..4 {
        let s = survival_kmgr(spec, t, x, kern, n)?;
        match tol {
            Some(tol) if s.error_bound > tol => n *= 2,
            _ => return Ok((s, n)),
        }
    }
    Err(WeylError::Budget(format!(
        "determinant-route bound did not reach tolerance {} (last order {n})",
        tol.unwrap_or(0.0)
    ))
    .into())
}

fn survival(a: &SurvivalArgs, g: &Global) -> CliResult<Outcome> {
    let tol = require_tolerance(g.tolerance)?;
    let spec = a.chamber.spec()?;
    let x = ChamberPoint::new(spec, a.x.clone())?;
    let (do_spectral, do_kmgr, do_mc) = routes(a.method);
    let mut results = Vec::new();
    let mut table = Table::new(["method", "value", "error_bound", "std_error"]);

    let spectral = if do_spectral {
        let s = spectral_to_tolerance(&spec, a.t, &x, a.cutoff.expect("resolved"), tol)?;
        results.push(json!({
            "method": "spectral",
            "value": s.value,
            "error_bound": s.error_bound,
            "energy_cutoff": s.budget.energy_cutoff,
            "terms_used": s.budget.terms_used,
        }));
        table.push(vec!["spectral".into(), fmt_f64(s.value), fmt_f64(s.error_bound), String::new()]);
        Some(s)
    } else {
        None
    };
    let kmgr = if do_kmgr {
        let kern = Kernel1D::new(a.t, spec.r, kernel_method(a.kernel.expect("resolved")), a.truncation.expect("resolved"))?;
        let (s, order) = kmgr_to_tolerance(&spec, a.t, &x, &kern, a.order.expect("resolved"), tol)?;
        results.push(json!({
            "method": "kmgr",
            "value": s.value,
            "error_bound": s.error_bound,
            "quadrature_order": order,
        }));
        table.push(vec!["kmgr".into(), fmt_f64(s.value), fmt_f64(s.error_bound), String::new()]);
        Some(s)
    } else {
        None
    };
    let mc = if do_mc {
        let cfg = mc_config(&a.mc, g.seed);
        let m = simulate_survival(&spec, a.t, &x, &cfg)?;
        // documented only for the bridge-corrected estimator
        let allowance = cfg.bridge_correction.then(|| discretisation_allowance(cfg.dt, spec.r));
        results.push(json!({
            "method": "mc",
            "value": m.value,
            "std_error": m.std_error,
            "ci95_halfwidth": 1.96 * m.std_error,
            "bias_allowance": allowance,
            "paths": m.paths,
            "survivors": m.survivors,
        }));
        table.push(vec!["mc".into(), fmt_f64(m.value), String::new(), fmt_f64(m.std_error)]);
        Some((m, allowance))
    } else {
        None
    };

    let mut body = json!({ "results": results });
    let mut status = Status::Ok;
    if a.method == RouteArg::All {
        let (s, k, (m, allowance)) = (spectral.unwrap(), kmgr.unwrap(), mc.unwrap());
        let check = |name: &str, diff: f64, allowed: f64| json!({ "pair": name, "difference": diff, "allowed": float_value(allowed), "ok": diff <= allowed });
        let exact_allowed = s.error_bound + k.error_bound;
        let mc_allowed = 3.0 * m.std_error + allowance.unwrap_or(0.0) + s.error_bound;
        let checks = vec![
            check("spectral-kmgr", (s.value - k.value).abs(), exact_allowed),
            check("mc-spectral", (m.value - s.value).abs(), mc_allowed),
        ];
        let agree = checks.iter().all(|c| c["ok"] == Value::Bool(true));
        if !agree {
            status = Status::Disagreement;
        }
        body["agreement"] = json!({ "agree": agree, "checks": checks });
    }
    let mut out = Outcome::new(body, table);
    out.status = status;
    if status == Status::Disagreement {
        out.warnings.push("routes disagree beyond their reported bounds".into());
    }
    Ok(out)
}

fn asymptotics(a: &AsymptoticsArgs) -> CliResult<Outcome> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Weyl(WeylError::Config(format!("regime {:?} needs --{flag}", a.regime))));
    let regime = match a.regime {
        RegimeArg::ConstantR => GrowthRegime::ConstantR { r: need(a.r, "r")? },
        RegimeArg::Intermediate => GrowthRegime::Intermediate { beta: need(a.beta, "beta")? },
        RegimeArg::Diffusive => GrowthRegime::Diffusive { c: need(a.c, "c")? },
        RegimeArg::Superdiffusive => GrowthRegime::Superdiffusive,
    };
    let rep = regime_report(a.weyl_type, a.k, regime, &a.times, &a.x)?;
    let mut table = Table::new(["t", "r", "predicted", "observed", "observed_error", "ratio", "uniform_bound"]);
    for row in &rep.rows {
        table.push(vec![
            fmt_f64(row.t),
            fmt_f64(row.r),
            fmt_f64(row.predicted),
            fmt_f64(row.observed),
            fmt_f64(row.observed_error),
            fmt_f64(row.ratio),
            opt_f64(row.uniform_bound),
        ]);
    }
    let body = json!({
        "regime": regime.name(),
        "alpha": rep.alpha,
        "lambda_principal": rep.lambda_principal,
        "constants": rep.constants,
        "rows": rep.rows,
    });
    Ok(Outcome::new(body, table))
}

fn kr(a: &KrArgs, g: &Global) -> CliResult<Outcome> {
    let cfg = KrConfig {
        paths: a.paths,
        seed: g.seed,
        dt: a.dt.expect("resolved"),
        delta: a.delta,
    };
    let e = k_r_estimate(a.weyl_type, a.k, a.r, &cfg)?;
    let series = k_r_series(a.weyl_type, a.k, a.r).ok();
    let mut table = Table::new(["value", "ci95_halfwidth", "series", "k_infinity"]);
    table.push(vec![fmt_f64(e.value), fmt_f64(e.ci_halfwidth), opt_f64(series), fmt_f64(e.k_infinity)]);
    let body = json!({
        "estimate": e,
        "series": series,
    });
    Ok(Outcome::new(body, table))
}

fn measures_table(k: usize, samples: &[EmpiricalMeasure]) -> Table {
    let mut table = Table::new((1..=k).map(|i| format!("x{i}")));
    for s in samples {
        table.push(s.atoms.iter().map(|&v| fmt_f64(v)).collect());
    }
    table
}

fn ensemble_cmd(a: &EnsembleArgs, g: &Global) -> CliResult<Outcome> {
    let cfg = McmcConfig {
        steps: a.steps.expect("resolved"),
        burnin: a.burnin.expect("resolved"),
        proposal_scale: a.proposal_scale.expect("resolved"),
        seed: g.seed,
        chains: a.chains.expect("resolved"),
    };
    let samples = sample_h_ensemble(a.weyl_type, a.k, a.n, &cfg)?;
    let body = json!({
        "support": ensemble::support(a.weyl_type),
        "samples": samples.iter().map(|s| &s.atoms).collect::<Vec<_>>(),
    });
    Ok(Outcome::new(body, measures_table(a.k, &samples)))
}

/// Empirical measures from a CSV with a header row, one measure per row.
pub fn read_measures(path: &Path, weyl_type: WeylType) -> CliResult<Vec<EmpiricalMeasure>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let atoms = rec
            .iter()
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| CliError::Input(format!("{} row {}: {e}", path.display(), i + 1)))?;
        out.push(EmpiricalMeasure::new(weyl_type, atoms)?);
    }
    if out.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    Ok(out)
}

fn rate(a: &RateArgs) -> CliResult<Outcome> {
    let measures = read_measures(&a.file, a.weyl_type)?;
    let d_z = match a.dz {
        Some(v) => v,
        None => cached_dz(a.weyl_type)?.value,
    };
    let mut table = Table::new(["type", "k", "energy", "external_field", "d_Z", "rate"]);
    let mut records = Vec::new();
    for m in &measures {
        let v = rate_function(a.weyl_type, m, d_z)?;
        table.push(vec![
            a.weyl_type.to_string(),
            m.k().to_string(),
            fmt_f64(v.energy),
            fmt_f64(v.external_field),
            fmt_f64(v.d_z),
            fmt_f64(v.rate),
        ]);
        records.push(json!({
            "type": a.weyl_type,
            "k": m.k(),
            "energy": float_value(v.energy),
            "external_field": float_value(v.external_field),
            "d_Z": v.d_z,
            "rate": float_value(v.rate),
        }));
    }
    Ok(Outcome::new(json!({ "records": records }), table))
}

fn lln(a: &LlnArgs) -> CliResult<Outcome> {
    let mut samples = Vec::new();
    for f in &a.files {
        samples.extend(read_measures(f, a.weyl_type)?);
    }
    let rep = lln_check(a.weyl_type, &samples)?;
    let limit = match a.weyl_type {
        WeylType::A => "arcsine",
        _ => "mu_C",
    };
    let mut table = Table::new(["limit", "samples", "atoms", "ks_to_limit", "wasserstein1"]);
    table.push(vec![
        limit.into(),
        samples.len().to_string(),
        rep.atoms.to_string(),
        fmt_f64(rep.ks_to_limit),
        fmt_f64(rep.wasserstein1),
    ]);
    let body = json!({
        "limit": limit,
        "samples": samples.len(),
        "report": rep,
    });
    Ok(Outcome::new(body, table))
}

fn endpoints(a: &EndpointsArgs, g: &Global) -> CliResult<Outcome> {
    let spec = a.chamber.spec()?;
    let x = ChamberPoint::new(spec, a.x.clone())?;
    let cfg = mc_config(&a.mc, g.seed);
    let s = sample_conditioned_endpoints(&spec, a.t, &x, &cfg, a.n)?;
    let mut table = Table::new((1..=spec.k).map(|i| format!("y{i}")));
    for p in &s.points {
        table.push(p.iter().map(|&v| fmt_f64(v)).collect());
    }
    let body = json!({
        "attempted": s.attempted,
        "survivors": s.survivors,
        "returned": s.points.len(),
        "points": s.points,
    });
    let mut out = Outcome::new(body, table);
    if let Some(w) = s.warning {
        out.status = Status::Shortfall;
        out.warnings.push(w);
    }
    Ok(out)
}

fn dz(a: &DzArgs) -> CliResult<Outcome> {
    let types = match a.weyl_type {
        Some(t) => vec![t],
        None => vec![WeylType::A, WeylType::C],
    };
    let k_list = a.k_list.as_ref().expect("resolved");
    let estimates = types.iter().map(|&t| estimate_dz(t, k_list)).collect::<weylsim::Result<Vec<_>>>()?;
    if let Some(path) = &a.write_cache {
        let text = serde_json::to_string_pretty(&estimates).expect("estimates serialize");
        std::fs::write(path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    let mut table = Table::new(["type", "d_Z", "spread"]);
    for e in &estimates {
        table.push(vec![e.weyl_type.to_string(), fmt_f64(e.value), fmt_f64(e.spread)]);
    }
    Ok(Outcome::new(json!({ "estimates": estimates }), table))
}
