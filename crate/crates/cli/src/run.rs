use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use anyhow::Context;
use dirac_core::bvp::{
    manufactured_case, measure_estimate_constants, random_first_order_family, residual_check, sample_points, EstimateParams,
    EstimateReport, Order, ResidualReport, Solution,
};
use dirac_core::catalog::named_field;
use dirac_core::clifford::{blade_product, multiplication_table_csv};
use dirac_core::norms::{default_test_family, dual_norm_lower_bound, holder_norm, slobodeckij_norm, sobolev_norm, NormSpec, DEFAULT_STEP};
use dirac_core::transforms::{borel_pompeiu_residual, BorelPompeiuReport};
use dirac_core::{BladeIndex, BoundaryMesh, Domain, VolumeMesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig};

/// `<crate version>-<git describe>`.
pub fn version() -> String {
    format!("{}-{}", env!("CARGO_PKG_VERSION"), env!("DIRAC_LAB_GIT_DESCRIBE"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `value ≤ threshold`, or `value ≥ threshold` for lower bars.
    pub at_least: bool,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, at_least: false, passed: value <= threshold }
    }

    fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, at_least: true, passed: value >= threshold }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshInfo {
    pub kind: &'static str,
    pub domain: &'static str,
    pub dim: usize,
    pub resolution: usize,
    pub nodes: usize,
    pub max_diameter: f64,
}

impl MeshInfo {
    fn volume(m: &VolumeMesh<f64>) -> Self {
        MeshInfo {
            kind: "volume",
            domain: m.domain().tag().name(),
            dim: m.dim(),
            resolution: m.resolution(),
            nodes: m.len(),
            max_diameter: m.max_diameter(),
        }
    }

    fn boundary(m: &BoundaryMesh<f64>) -> Self {
        MeshInfo {
            kind: "boundary",
            domain: m.domain().tag().name(),
            dim: m.dim(),
            resolution: m.resolution(),
            nodes: m.len(),
            max_diameter: m.max_diameter(),
        }
    }
}

/// The JSON report. Everything except `timings` is a function of the config.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub version: String,
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub meshes: Vec<MeshInfo>,
    pub outputs: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// Seconds per stage.
    pub timings: BTreeMap<String, f64>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    pub files: Vec<PathBuf>,
}

struct Ctx {
    meshes: Vec<MeshInfo>,
    checks: Vec<Check>,
    timings: BTreeMap<String, f64>,
    csv: Vec<(String, String)>,
}

impl Ctx {
    fn time<R>(&mut self, stage: &str, f: impl FnOnce() -> R) -> R {
        let t = Instant::now();
        let r = f();
        *self.timings.entry(stage.to_string()).or_default() += t.elapsed().as_secs_f64();
        r
    }
}

/// Runs the experiment named in `cfg` and writes `<experiment>.json` plus
/// its CSV tables to `cfg.out_dir`.
pub fn run_experiment(cfg: ExperimentConfig) -> anyhow::Result<RunOutcome> {
    let cfg = cfg.resolve()?;
    let start = Instant::now();
    let mut ctx = Ctx { meshes: Vec::new(), checks: Vec::new(), timings: BTreeMap::new(), csv: Vec::new() };
    let outputs = match cfg.experiment {
        Experiment::VerifyAlgebra => verify_algebra(&cfg, &mut ctx)?,
        Experiment::BorelPompeiu => borel_pompeiu(&cfg, &mut ctx)?,
        Experiment::Solve => solve(&cfg, &mut ctx)?,
        Experiment::Norm => norm(&cfg, &mut ctx)?,
        Experiment::EstimateConstants => estimate_constants(&cfg, &mut ctx)?,
        Experiment::Convergence => convergence(&cfg, &mut ctx)?,
    };
    ctx.timings.insert("total".into(), start.elapsed().as_secs_f64());
    let report = Report {
        version: version(),
        experiment: cfg.experiment,
        passed: ctx.checks.iter().all(|c| c.passed),
        config: cfg.clone(),
        meshes: ctx.meshes,
        outputs,
        checks: ctx.checks,
        timings: ctx.timings,
    };
    std::fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let mut files = Vec::new();
    let json_path = cfg.out_dir.join(format!("{}.json", cfg.experiment.name()));
    std::fs::write(&json_path, serde_json::to_string_pretty(&report)? + "\n")
        .with_context(|| format!("writing {}", json_path.display()))?;
    files.push(json_path);
    for (name, body) in ctx.csv {
        let path = cfg.out_dir.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        files.push(path);
    }
    Ok(RunOutcome { report, files })
}

fn domain(cfg: &ExperimentConfig) -> anyhow::Result<Domain<f64>> {
    Ok(Domain::from_tag(cfg.domain, cfg.dim())?)
}

fn meshes(cfg: &ExperimentConfig, res: usize, bres: usize, ctx: &mut Ctx) -> anyhow::Result<(Arc<VolumeMesh<f64>>, Arc<BoundaryMesh<f64>>)> {
    let d = domain(cfg)?;
    let (v, b) = ctx.time("mesh", || -> anyhow::Result<_> {
        Ok((Arc::new(VolumeMesh::new(&d, res)?), Arc::new(BoundaryMesh::new(&d, bres)?)))
    })?;
    ctx.meshes.push(MeshInfo::volume(&v));
    ctx.meshes.push(MeshInfo::boundary(&b));
    if cfg.dump_mesh {
        ctx.csv.push((format!("volume_mesh_{res}.csv"), v.to_csv()));
        ctx.csv.push((format!("boundary_mesh_{bres}.csv"), b.to_csv()));
    }
    Ok((v, b))
}

/// Sign and blade of `e_A e_B` by sorting the concatenated index word with
/// adjacent transpositions and cancelling `e_j e_j = −1`.
pub fn symbol_sort_product(a: u32, b: u32, n: usize) -> (i8, u32) {
    let mut word: Vec<usize> = (0..n).filter(|j| a >> j & 1 == 1).chain((0..n).filter(|j| b >> j & 1 == 1)).collect();
    let mut sign = 1i8;
    for i in 0..word.len() {
        for j in 0..word.len() - 1 - i {
            if word[j] > word[j + 1] {
                word.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    let mut blade = 0u32;
    let mut i = 0;
    while i < word.len() {
        if i + 1 < word.len() && word[i] == word[i + 1] {
            sign = -sign;
            i += 2;
        } else {
            blade |= 1 << word[i];
            i += 1;
        }
    }
    (sign, blade)
}

/// Exhaustive below this dimension, seeded random pairs above.
const EXHAUSTIVE_MAX_N: usize = 6;
const SAMPLED_PAIRS: usize = 1 << 20;

fn verify_algebra(cfg: &ExperimentConfig, ctx: &mut Ctx) -> anyhow::Result<Value> {
    let n = cfg.n;
    let size = 1u32 << n;
    let check = |a: u32, b: u32| -> anyhow::Result<bool> {
        let (s, c) = blade_product(BladeIndex(a as u16), BladeIndex(b as u16), n)?;
        Ok((s, u32::from(c.0)) == symbol_sort_product(a, b, n))
    };
    let (pairs, mismatches) = ctx.time("products", || -> anyhow::Result<(usize, usize)> {
        let mut bad = 0;
        if n <= EXHAUSTIVE_MAX_N {
            for a in 0..size {
                for b in 0..size {
                    bad += usize::from(!check(a, b)?);
                }
            }
            Ok((size as usize * size as usize, bad))
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for _ in 0..SAMPLED_PAIRS {
                bad += usize::from(!check(rng.gen_range(0..size), rng.gen_range(0..size))?);
            }
            Ok((SAMPLED_PAIRS, bad))
        }
    })?;
    ctx.checks.push(Check::at_most("blade product mismatches", mismatches as f64, 0.0));
    let table = if n <= 4 { Some(multiplication_table_csv(n)?) } else { None };
    if let Some(t) = &table {
        ctx.csv.push((format!("cl{n}_table.csv"), t.clone()));
    }
    Ok(json!({
        "n": n,
        "pairs_checked": pairs,
        "exhaustive": n <= EXHAUSTIVE_MAX_N,
        "mismatches": mismatches,
        "table": table,
    }))
}

/// Bar for the Borel–Pompeiu residual of a named field.
pub fn borel_pompeiu_bar(field: &str) -> f64 {
    if field == "monogenic_linear" {
        0.01
    } else {
        0.02
    }
}

fn bp_at(cfg: &ExperimentConfig, res: usize, ctx: &mut Ctx) -> anyhow::Result<Vec<(String, BorelPompeiuReport)>> {
    let bres = if Some(res) == cfg.resolution {
        cfg.boundary_resolution.expect("resolved")
    } else {
        dirac_core::mesh::boundary_resolution_for(cfg.domain, res)
    };
    let (v, b) = meshes(cfg, res, bres, ctx)?;
    let pts = sample_points(v.domain(), cfg.points, cfg.margin, cfg.seed)?;
    cfg.fields
        .iter()
        .map(|name| {
            let f = named_field::<f64>(name, cfg.dim())?;
            let r = ctx.time("borel_pompeiu", || borel_pompeiu_residual(&f, &v, &b, &pts, &cfg.transform))?;
            log::info!("{name} at resolution {res}: relative residual {:.3e}", r.relative_max);
            Ok((name.clone(), r))
        })
        .collect()
}

fn borel_pompeiu(cfg: &ExperimentConfig, ctx: &mut Ctx) -> anyhow::Result<Value> {
    let res = cfg.resolution.expect("resolved");
    let reports = bp_at(cfg, res, ctx)?;
    let mut csv = String::from("field,resolution,boundary_resolution,residual_max,residual_mean,f_sup,relative_max\n");
    for (name, r) in &reports {
        let _ = writeln!(
            csv,
            "{name},{res},{},{},{},{},{}",
            cfg.boundary_resolution.expect("resolved"),
            r.residual_max,
            r.residual_mean,
            r.f_sup,
            r.relative_max
        );
        ctx.checks.push(Check::at_most(format!("{name} relative residual"), r.relative_max, borel_pompeiu_bar(name)));
    }
    ctx.csv.push(("borel_pompeiu.csv".into(), csv));
    Ok(json!({ "fields": reports.iter().map(|(n, r)| json!({ "field": n, "report": r })).collect::<Vec<_>>() }))
}

#[derive(Serialize)]
struct SolveOutput {
    case: String,
    order: Order,
    reproduction_error: f64,
    residuals: ResidualReport,
    interior_relative: f64,
    boundary_relative: f64,
    flagged: usize,
    estimate: Option<EstimateReport>,
}

/// Bar for the sup-relative reproduction error.
pub fn reproduction_bar(order: Order) -> f64 {
    match order {
        Order::First => 0.02,
        Order::Second => 0.03,
    }
}

fn solve_at(cfg: &ExperimentConfig, res: usize, with_estimate: bool, ctx: &mut Ctx) -> anyhow::Result<(SolveOutput, Arc<Solution<f64>>)> {
    let order = cfg.order();
    let mut case = manufactured_case::<f64>(&cfg.case, order, domain(cfg)?, res)?;
    case.spec.k = if order == Order::First { cfg.k.max(1) } else { cfg.k };
    case.spec.p = cfg.p;
    case.spec.transform = cfg.transform.clone();
    if Some(res) == cfg.resolution {
        case.spec.boundary_resolution = cfg.boundary_resolution.expect("resolved");
    }
    let sol = Arc::new(ctx.time("prepare", || Solution::new(&case.spec))?);
    ctx.meshes.push(MeshInfo::volume(sol.volume_mesh()));
    ctx.meshes.push(MeshInfo::boundary(sol.boundary_mesh()));
    if cfg.dump_mesh {
        ctx.csv.push((format!("volume_mesh_{res}.csv"), sol.volume_mesh().to_csv()));
        ctx.csv.push((format!("boundary_mesh_{}.csv", case.spec.boundary_resolution), sol.boundary_mesh().to_csv()));
    }
    let pts = sample_points(&case.spec.domain, cfg.points, cfg.margin, cfg.seed)?;
    let reproduction_error = ctx.time("reproduction", || case.reproduction_error(&sol, &pts))?;
    let residuals = ctx.time("residual_check", || residual_check(&sol, &pts))?;
    let estimate = if with_estimate {
        let params = EstimateParams {
            norm_resolution: cfg.norm_resolution,
            holder: cfg.holder,
            holder_pairs: cfg.holder_pairs,
            seed: cfg.seed,
        };
        ctx.time("estimate", || measure_estimate_constants(std::slice::from_ref(&case.spec), &params))?.pop()
    } else {
        None
    };
    Ok((
        SolveOutput {
            case: cfg.case.clone(),
            order,
            reproduction_error,
            interior_relative: residuals.interior_relative(),
            boundary_relative: residuals.boundary_relative(),
            residuals,
            flagged: sol.flagged_count(),
            estimate,
        },
        sol,
    ))
}

/// Interior residual bar: 5% of the residual scale plus an absolute floor.
pub fn interior_bar(r: &ResidualReport) -> f64 {
    0.05 * r.interior_scale + 1e-3
}

fn solve(cfg: &ExperimentConfig, ctx: &mut Ctx) -> anyhow::Result<Value> {
    let res = cfg.resolution.expect("resolved");
    let (out, sol) = solve_at(cfg, res, cfg.estimate.expect("resolved"), ctx)?;
    ctx.checks.push(Check::at_most("reproduction error", out.reproduction_error, reproduction_bar(out.order)));
    ctx.checks.push(Check::at_most("interior residual", out.residuals.interior_residual, interior_bar(&out.residuals)));
    ctx.checks.push(Check::at_most("boundary mismatch (relative)", out.boundary_relative, 0.01));
    let mut csv = String::from(
        "case,order,resolution,boundary_resolution,reproduction_error,interior_residual,interior_relative,boundary_mismatch,boundary_relative,flagged,empirical_constant\n",
    );
    let _ = writeln!(
        csv,
        "{},{},{res},{},{},{},{},{},{},{},{}",
        out.case,
        cfg.order,
        sol.boundary_mesh().resolution(),
        out.reproduction_error,
        out.residuals.interior_residual,
        out.interior_relative,
        out.residuals.boundary_mismatch,
        out.boundary_relative,
        out.flagged,
        out.estimate.as_ref().and_then(|e| e.empirical_constant).map(|c| c.to_string()).unwrap_or_default()
    );
    ctx.csv.push(("solve.csv".into(), csv));
    if cfg.dump_field {
        let body = ctx.time("dump_field", || field_csv(&sol))?;
        ctx.csv.push(("solve_field.csv".into(), body));
    }
    Ok(serde_json::to_value(out)?)
}

/// `x_1..x_n` and the blade coefficients of `u` at every cell centre.
fn field_csv(sol: &Solution<f64>) -> anyhow::Result<String> {
    let v = sol.volume_mesh();
    let n = v.dim();
    let pts: Vec<_> = v.centers().map(smallvec_point).collect();
    let vals = sol.eval_many(&pts)?;
    let mut s = (1..=n).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",");
    for b in 0..1u32 << n {
        let _ = write!(s, ",{}", BladeIndex(b as u16).name());
    }
    s.push('\n');
    for (x, u) in pts.iter().zip(&vals) {
        let row: Vec<String> = x.iter().chain(u.coeffs()).map(|c| c.to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    Ok(s)
}

fn smallvec_point(x: &[f64]) -> dirac_core::mesh::Point<f64> {
    x.iter().copied().collect()
}

fn norm(cfg: &ExperimentConfig, ctx: &mut Ctx) -> anyhow::Result<Value> {
    let res = cfg.resolution.expect("resolved");
    let (v, b) = meshes(cfg, res, cfg.boundary_resolution.expect("resolved"), ctx)?;
    let f = named_field::<f64>(&cfg.field, cfg.dim())?.with_support(v.domain().clone());
    let report = ctx.time("norm", || -> anyhow::Result<_> {
        Ok(match &cfg.norm {
            NormSpec::Sobolev { k, p } => sobolev_norm(&f, &v, *k, *p, DEFAULT_STEP)?,
            NormSpec::Slobodeckij { lambda, p, form } => slobodeckij_norm(&f, &b, *lambda, *p, *form)?,
            NormSpec::DualLower { p } => {
                let family = default_test_family(v.domain(), cfg.margin)?;
                dual_norm_lower_bound(&f, &v, *p, &family)?
            }
            NormSpec::Holder { lambda_h, sample_pairs, seed } => holder_norm(&f, &v, *lambda_h, *sample_pairs, *seed)?,
        })
    })?;
    ctx.checks.push(Check::at_most("norm is finite", if report.value.is_finite() { 0.0 } else { 1.0 }, 0.0));
    let kind = serde_json::to_value(&report.spec)?["kind"].as_str().unwrap_or_default().to_string();
    ctx.csv.push((
        "norm.csv".into(),
        format!(
            "field,kind,value,resolution,nodes,lower_bound\n{},{kind},{},{},{},{}\n",
            cfg.field, report.value, report.resolution, report.nodes, report.lower_bound
        ),
    ));
    Ok(json!({ "field": cfg.field, "report": report }))
}

fn estimate_constants(cfg: &ExperimentConfig, ctx: &mut Ctx) -> anyhow::Result<Value> {
    let res = cfg.resolution.expect("resolved");
    let d = domain(cfg)?;
    let specs: Vec<_> = random_first_order_family(&d, cfg.count, cfg.seed, res)
        .into_iter()
        .map(|mut s| {
            s.k = cfg.k.max(1);
            s.p = cfg.p;
            s.boundary_resolution = cfg.boundary_resolution.expect("resolved");
            s.transform = cfg.transform.clone();
            s
        })
        .collect();
    let (v, b) = specs[0].meshes()?;
    ctx.meshes.push(MeshInfo::volume(&v));
    ctx.meshes.push(MeshInfo::boundary(&b));
    let params =
        EstimateParams { norm_resolution: cfg.norm_resolution, holder: cfg.holder, holder_pairs: cfg.holder_pairs, seed: cfg.seed };
    let reports = ctx.time("estimate", || measure_estimate_constants(&specs, &params))?;
    let mut csv = String::from("instance,lhs,rhs_g,rhs_f,rhs_total,empirical_constant\n");
    for r in &reports {
        let g = r.rhs_terms.first().map(|t| t.value).unwrap_or(0.0);
        let f = r.rhs_terms.get(1).map(|t| t.value).unwrap_or(0.0);
        let total: f64 = r.rhs_terms.iter().map(|t| t.weight * t.value).sum();
        let c = r.empirical_constant.map(|c| c.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{},{},{g},{f},{total},{c}", r.instance, r.lhs);
    }
    ctx.csv.push(("estimate_constants.csv".into(), csv));
    let measured: Vec<f64> = reports.iter().filter_map(|r| r.empirical_constant).collect();
    let max = measured.iter().copied().fold(f64::NAN, f64::max);
    let all_finite = measured.len() == reports.iter().filter(|r| r.skipped.is_none()).count() && measured.iter().all(|c| c.is_finite());
    ctx.checks.push(Check::at_most("non-finite constants", if all_finite { 0.0 } else { 1.0 }, 0.0));
    Ok(json!({ "max_constant": max, "instances": reports }))
}

/// `log₂(e_{i−1}/e_i) / log₂(r_i/r_{i−1})` between successive levels.
pub fn observed_orders(resolutions: &[usize], errors: &[f64]) -> Vec<Option<f64>> {
    (0..errors.len())
        .map(|i| {
            (i > 0 && errors[i] > 0.0 && errors[i - 1] > 0.0)
                .then(|| (errors[i - 1] / errors[i]).ln() / (resolutions[i] as f64 / resolutions[i - 1] as f64).ln())
        })
        .collect()
}

/// Errors below this are at rounding level and carry no order.
const EXACT_LEVEL: f64 = 1e-12;

fn convergence(cfg: &ExperimentConfig, ctx: &mut Ctx) -> anyhow::Result<Value> {
    let levels = &cfg.resolutions;
    let mut per_field: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut totals = Vec::new();
    for &res in levels {
        match cfg.study {
            Experiment::BorelPompeiu => {
                let reps = bp_at(cfg, res, ctx)?;
                totals.push(reps.iter().map(|(_, r)| r.relative_max).fold(0.0, f64::max));
                for (name, r) in reps {
                    per_field.entry(name).or_default().push(r.relative_max);
                }
            }
            _ => {
                let (out, _) = solve_at(cfg, res, false, ctx)?;
                totals.push(out.reproduction_error);
                per_field.entry(cfg.case.clone()).or_default().push(out.reproduction_error);
            }
        }
    }
    let orders = observed_orders(levels, &totals);
    let fmt = |o: &Option<f64>| o.map(|v| v.to_string()).unwrap_or_default();
    let mut csv = String::from("resolution,residual_max,observed_order\n");
    for i in 0..levels.len() {
        let _ = writeln!(csv, "{},{},{}", levels[i], totals[i], fmt(&orders[i]));
    }
    ctx.csv.push(("convergence.csv".into(), csv));
    let mut by_field = String::from("field,resolution,residual_max,observed_order\n");
    let mut field_orders = BTreeMap::new();
    for (name, errs) in &per_field {
        let o = observed_orders(levels, errs);
        for i in 0..levels.len() {
            let _ = writeln!(by_field, "{name},{},{},{}", levels[i], errs[i], fmt(&o[i]));
        }
        field_orders.insert(name.clone(), o.last().copied().flatten());
    }
    ctx.csv.push(("convergence_by_field.csv".into(), by_field));
    let last = orders.last().copied().flatten();
    if totals.last().is_some_and(|&e| e > EXACT_LEVEL) {
        ctx.checks.push(Check::at_least("observed order", last.unwrap_or(f64::NAN), 0.8));
    }
    Ok(json!({
        "study": cfg.study,
        "resolutions": levels,
        "residual_max": totals,
        "observed_orders": orders,
        "observed_order": last,
        "fields": per_field,
        "field_orders": field_orders,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_sort_examples() {
        assert_eq!(symbol_sort_product(0b01, 0b01, 2), (-1, 0));
        assert_eq!(symbol_sort_product(0b10, 0b01, 2), (-1, 0b11));
        assert_eq!(symbol_sort_product(0b11, 0b11, 2), (-1, 0));
    }

    #[test]
    fn orders_from_halving_errors() {
        let o = observed_orders(&[32, 64, 128], &[4e-2, 1e-2, 2.5e-3]);
        assert_eq!(o[0], None);
        assert!((o[2].unwrap() - 2.0).abs() < 1e-12);
    }
}
