//! Experiment drivers. Each command returns its CSV as a string.
//!
//! Every table starts with a `schema` column naming the table and its
//! version. Numbers are printed with six significant digits, so a rerun on
//! the same configuration reproduces the file byte for byte.
//!
//! Long-format tables (`simulate`, `sweep`, `compare`) have the columns
//! `schema, num_satellites, altitude_km, theta_deg, source, num_hops, metric,
//! value, std_error`, where `source` is `analytic`, `ideal_bound` or a
//! strategy name and `std_error` is empty for analytic values.

use std::f64::consts::FRAC_PI_2;

use satroute_core::error::{Error, InfeasibleCase};
use satroute_core::metrics::{MetricsReport, RouteAnalysis, RouteSpec};
use satroute_core::planner::{algorithm1, default_method2_cap, ideal_route, method2_hop_search, HopSearchOutcome};
use satroute_core::sim::{EmpiricalReport, SimulationConfig, Simulator, Strategy};
use satroute_core::sphere::ConstellationGeometry;
use satroute_core::stats::Estimate;
use thiserror::Error as ThisError;

use crate::config::{ConfigError, ExperimentConfig, Method};

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status: 2 configuration, 3 infeasible, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(Error::InvalidParameter { .. }) => 2,
            CliError::Core(Error::Infeasible(_) | Error::Unroutable { .. } | Error::DeadEnd { .. }) => 3,
            CliError::Core(Error::Quadrature(_)) => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// `%g` with six significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Table { writer }
    }

    fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    fn finish(self) -> String {
        let bytes = self.writer.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("CSV fields are UTF-8")
    }
}

const LONG_HEADER: [&str; 9] = [
    "schema",
    "num_satellites",
    "altitude_km",
    "theta_deg",
    "source",
    "num_hops",
    "metric",
    "value",
    "std_error",
];

struct GridPoint {
    geometry: ConstellationGeometry,
    theta: f64,
}

impl GridPoint {
    fn prefix(&self, schema: &str) -> Vec<String> {
        vec![
            schema.to_string(),
            self.geometry.num_satellites().to_string(),
            fmt_num(self.geometry.altitude_m() / 1e3),
            fmt_num(self.theta.to_degrees()),
        ]
    }
}

#[allow(clippy::too_many_arguments)]
fn long_row(
    t: &mut Table,
    p: &GridPoint,
    schema: &str,
    source: &str,
    hops: &str,
    metric: &str,
    value: String,
    se: String,
) {
    let mut fields = p.prefix(schema);
    fields.extend([source.to_string(), hops.to_string(), metric.to_string(), value, se]);
    t.row(fields);
}

fn hop_search(
    cfg: &ExperimentConfig,
    geometry: &ConstellationGeometry,
    theta: f64,
    method: Method,
) -> CliResult<HopSearchOutcome> {
    Ok(match method {
        Method::One => algorithm1(geometry, &cfg.channel, theta, cfg.epsilon, cfg.alpha2_mode)?,
        Method::Two => {
            let cap = default_method2_cap(geometry, &cfg.channel, theta)?;
            method2_hop_search(geometry, &cfg.channel, theta, cap, None)?
        }
    })
}

/// Route hop count: the configured override, else the configured method's optimum.
fn route_hops(cfg: &ExperimentConfig, geometry: &ConstellationGeometry, theta: f64) -> CliResult<u32> {
    match cfg.num_hops {
        Some(n) => Ok(n),
        None => Ok(hop_search(cfg, geometry, theta, cfg.method)?.into_result()?.0),
    }
}

fn analytic(
    cfg: &ExperimentConfig,
    geometry: &ConstellationGeometry,
    theta: f64,
    n: u32,
) -> CliResult<(f64, MetricsReport)> {
    let spec = RouteSpec::new(*geometry, cfg.channel, theta, n, cfg.alpha2_mode)?;
    let analysis = RouteAnalysis::new(&spec)?;
    Ok((analysis.alpha1(), analysis.report()?))
}

fn simulate_strategy(
    cfg: &ExperimentConfig,
    geometry: &ConstellationGeometry,
    theta: f64,
    strategy: Strategy,
    n: u32,
) -> CliResult<EmpiricalReport> {
    let sim = SimulationConfig {
        num_realizations: cfg.num_realizations,
        base_seed: cfg.base_seed,
        min_stepsize_cone_rad: cfg.min_stepsize_cone_rad,
        epsilon: cfg.epsilon,
        speed_of_light_mps: cfg.speed_of_light_mps,
        ..SimulationConfig::new(*geometry, cfg.channel, theta, strategy, n)
    };
    Ok(Simulator::new(&sim)?.run())
}

fn analytic_metrics(r: &MetricsReport, alpha1: f64) -> [(&'static str, f64); 8] {
    [
        ("alpha1", alpha1),
        ("availability", r.availability),
        ("routing_coverage", r.routing_coverage),
        ("avail_and_coverage", r.avail_and_coverage),
        ("t_tx_exact_s", r.t_tx_exact_s),
        ("t_tx_approx_s", r.t_tx_approx_s),
        ("t_arq_exact_s", r.t_arq_exact_s),
        ("t_arq_approx_s", r.t_arq_approx_s),
    ]
}

fn mean_hops(r: &EmpiricalReport) -> f64 {
    let (sum, count) = r
        .hop_histogram
        .iter()
        .fold((0.0, 0usize), |(s, c), (h, k)| (s + (*h as f64) * (*k as f64), c + k));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

fn empirical_metrics(r: &EmpiricalReport) -> Vec<(&'static str, Estimate)> {
    let exact = |v: f64| Estimate {
        mean: v,
        std_error: 0.0,
        count: r.num_realizations,
    };
    vec![
        ("availability", r.availability),
        ("routing_coverage", r.routing_coverage),
        ("avail_and_coverage", r.avail_and_coverage),
        ("t_tx_s", r.t_tx),
        ("t_tx_kernel_s", r.t_tx_kernel),
        ("t_arq_s", r.t_arq),
        ("t_arq_kernel_s", r.t_arq_kernel),
        ("t_prop_s", r.t_prop),
        ("mean_hops", exact(mean_hops(r))),
        ("failure_rate", exact(r.failures as f64 / r.num_realizations as f64)),
        ("repair_rate", exact(r.repaired as f64 / r.num_realizations as f64)),
        ("communication_range_km", exact(r.communication_range_m / 1e3)),
    ]
}

fn write_empirical(t: &mut Table, p: &GridPoint, schema: &str, hops: &str, r: &EmpiricalReport) {
    for (metric, e) in empirical_metrics(r) {
        long_row(
            t,
            p,
            schema,
            r.strategy.name(),
            hops,
            metric,
            fmt_num(e.mean),
            fmt_num(e.std_error),
        );
    }
}

/// Analytic metrics of one route (`analyze/v1`, one wide row).
pub fn cmd_analyze(cfg: &ExperimentConfig) -> CliResult<String> {
    let g = &cfg.geometry;
    let n = route_hops(cfg, g, cfg.theta_total_rad)?;
    let (a1, r) = analytic(cfg, g, cfg.theta_total_rad, n)?;
    let metrics = analytic_metrics(&r, a1);
    let mut header = vec!["schema", "num_satellites", "altitude_km", "theta_deg", "num_hops"];
    header.extend(metrics.iter().map(|(k, _)| *k));
    let mut t = Table::new(&header);
    let p = GridPoint {
        geometry: *g,
        theta: cfg.theta_total_rad,
    };
    let mut row = p.prefix("analyze/v1");
    row.push(n.to_string());
    row.extend(metrics.iter().map(|(_, v)| fmt_num(*v)));
    t.row(row);
    Ok(t.finish())
}

/// Candidate tables of both hop searches (`optimize/v1`).
///
/// Fails as infeasible only when the configured method finds no hop count.
pub fn cmd_optimize(cfg: &ExperimentConfig) -> CliResult<String> {
    let mut t = Table::new(&[
        "schema",
        "method",
        "num_hops",
        "predicted_latency_s",
        "feasible",
        "selected",
    ]);
    for (method, label) in [(Method::One, "1"), (Method::Two, "2")] {
        let outcome = hop_search(cfg, &cfg.geometry, cfg.theta_total_rad, method)?;
        if method == cfg.method && outcome.optimal_hops.is_none() {
            return Err(Error::Infeasible(outcome.infeasible.unwrap_or(InfeasibleCase::NoCandidate)).into());
        }
        for c in &outcome.candidate_table {
            t.row([
                "optimize/v1".to_string(),
                label.to_string(),
                c.num_hops.to_string(),
                fmt_num(c.predicted_latency_s),
                (c.feasible as u8).to_string(),
                ((outcome.optimal_hops == Some(c.num_hops)) as u8).to_string(),
            ]);
        }
    }
    Ok(t.finish())
}

/// Monte Carlo metrics for every configured strategy (`simulate/v1`).
pub fn cmd_simulate(cfg: &ExperimentConfig) -> CliResult<String> {
    let g = &cfg.geometry;
    let n = route_hops(cfg, g, cfg.theta_total_rad)?;
    let p = GridPoint {
        geometry: *g,
        theta: cfg.theta_total_rad,
    };
    let mut t = Table::new(&LONG_HEADER);
    for &s in &cfg.strategies {
        let r = simulate_strategy(cfg, g, cfg.theta_total_rad, s, n)?;
        let hops = if s == Strategy::Proposed {
            n.to_string()
        } else {
            String::new()
        };
        write_empirical(&mut t, &p, "simulate/v1", &hops, &r);
    }
    Ok(t.finish())
}

/// Reference constellations: name, satellites, altitude and the published
/// propagation latency shown next to the simulated one.
pub const REFERENCE_CONSTELLATIONS: [(&str, usize, f64, f64); 3] = [
    ("starlink", 11_927, 550e3, 0.071),
    ("kuiper", 3_236, 610e3, 0.072),
    ("oneweb", 648, 1_200e3, 0.079),
];

/// Reference constellations at a quarter-circle separation (`table2/v1`).
///
/// Analytic columns use the configured method's hop count (or the override);
/// Monte Carlo columns use the proposed strategy at that hop count.
pub fn cmd_table2(cfg: &ExperimentConfig) -> CliResult<String> {
    let theta = FRAC_PI_2;
    let mc = [
        "availability",
        "routing_coverage",
        "avail_and_coverage",
        "t_tx_s",
        "t_tx_kernel_s",
        "t_arq_s",
        "t_arq_kernel_s",
        "t_prop_s",
    ];
    let mut header: Vec<String> = [
        "schema",
        "constellation",
        "num_satellites",
        "altitude_km",
        "theta_deg",
        "num_hops_method1",
        "num_hops_method2",
        "num_hops",
        "alpha1",
        "availability",
        "routing_coverage",
        "avail_and_coverage",
        "t_tx_exact_s",
        "t_tx_approx_s",
        "t_arq_exact_s",
        "t_arq_approx_s",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for m in mc {
        header.push(format!("mc_{m}"));
        header.push(format!("mc_{m}_se"));
    }
    header.push("t_prop_reference_s".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(&header_refs);

    for (name, n_sat, alt, t_prop_ref) in REFERENCE_CONSTELLATIONS {
        let g = ConstellationGeometry::from_altitude(alt, cfg.geometry.earth_radius_m(), n_sat)?;
        let n1 = hop_search(cfg, &g, theta, Method::One)?.optimal_hops;
        let n2 = hop_search(cfg, &g, theta, Method::Two)?.optimal_hops;
        let chosen = match (cfg.num_hops, cfg.method) {
            (Some(n), _) => Some(n),
            (None, Method::One) => n1,
            (None, Method::Two) => n2,
        };
        let n = chosen.ok_or(Error::Infeasible(InfeasibleCase::NoCandidate))?;
        let (a1, r) = analytic(cfg, &g, theta, n)?;
        let e = simulate_strategy(cfg, &g, theta, Strategy::Proposed, n)?;
        let opt = |v: Option<u32>| v.map_or(String::new(), |n| n.to_string());
        let mut row = vec![
            "table2/v1".to_string(),
            name.to_string(),
            n_sat.to_string(),
            fmt_num(alt / 1e3),
            fmt_num(theta.to_degrees()),
            opt(n1),
            opt(n2),
            n.to_string(),
        ];
        row.extend(analytic_metrics(&r, a1).iter().map(|(_, v)| fmt_num(*v)));
        for est in [
            e.availability,
            e.routing_coverage,
            e.avail_and_coverage,
            e.t_tx,
            e.t_tx_kernel,
            e.t_arq,
            e.t_arq_kernel,
            e.t_prop,
        ] {
            row.push(fmt_num(est.mean));
            row.push(fmt_num(est.std_error));
        }
        row.push(fmt_num(t_prop_ref));
        t.row(row);
    }
    Ok(t.finish())
}

fn grid(cfg: &ExperimentConfig) -> CliResult<Vec<GridPoint>> {
    let mut points = Vec::new();
    for &n_sat in &cfg.sweep_num_satellites {
        for &alt in &cfg.sweep_altitudes_m {
            let geometry = ConstellationGeometry::from_altitude(alt, cfg.geometry.earth_radius_m(), n_sat)?;
            for &theta in &cfg.sweep_theta_rad {
                points.push(GridPoint { geometry, theta });
            }
        }
    }
    Ok(points)
}

/// Hop count at a grid point, or `None` (with an `infeasible` row written)
/// when no hop count satisfies the constraints there.
fn grid_hops(cfg: &ExperimentConfig, t: &mut Table, p: &GridPoint, schema: &str) -> CliResult<Option<u32>> {
    match route_hops(cfg, &p.geometry, p.theta) {
        Ok(n) => Ok(Some(n)),
        Err(CliError::Core(Error::Infeasible(_))) => {
            long_row(t, p, schema, "analytic", "", "infeasible", "1".into(), String::new());
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Analytic metrics and proposed-strategy Monte Carlo over the sweep grid
/// (`sweep/v1`).
pub fn cmd_sweep(cfg: &ExperimentConfig) -> CliResult<String> {
    let mut t = Table::new(&LONG_HEADER);
    for p in grid(cfg)? {
        let Some(n) = grid_hops(cfg, &mut t, &p, "sweep/v1")? else {
            continue;
        };
        let hops = n.to_string();
        let (a1, r) = analytic(cfg, &p.geometry, p.theta, n)?;
        for (metric, v) in analytic_metrics(&r, a1) {
            long_row(
                &mut t,
                &p,
                "sweep/v1",
                "analytic",
                &hops,
                metric,
                fmt_num(v),
                String::new(),
            );
        }
        let e = simulate_strategy(cfg, &p.geometry, p.theta, Strategy::Proposed, n)?;
        write_empirical(&mut t, &p, "sweep/v1", &hops, &e);
    }
    Ok(t.finish())
}

/// Strategy comparison over the sweep grid, with the ideal-placement
/// latency bound as a reference row (`compare/v1`).
pub fn cmd_compare(cfg: &ExperimentConfig) -> CliResult<String> {
    let mut t = Table::new(&LONG_HEADER);
    for p in grid(cfg)? {
        let Some(n) = grid_hops(cfg, &mut t, &p, "compare/v1")? else {
            continue;
        };
        let hops = n.to_string();
        let ideal = ideal_route(&p.geometry, &cfg.channel, p.theta, n);
        long_row(
            &mut t,
            &p,
            "compare/v1",
            "ideal_bound",
            &hops,
            "t_tx_kernel_s",
            fmt_num(ideal.latency_bound_s),
            String::new(),
        );
        for &s in &cfg.strategies {
            let e = simulate_strategy(cfg, &p.geometry, p.theta, s, n)?;
            let h = if s == Strategy::Proposed { hops.as_str() } else { "" };
            write_empirical(&mut t, &p, "compare/v1", h, &e);
        }
    }
    Ok(t.finish())
}
