//! Python bindings: `import satroute`.

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use satroute_core::channel::{self as ch, ChannelParams};
use satroute_core::error::Error;
use satroute_core::metrics::{RouteAnalysis, RouteSpec};
use satroute_core::planner::{self, HopSearchOutcome};
use satroute_core::sim::{SimulationConfig, Simulator, Strategy};
use satroute_core::sphere::{self, Alpha2Mode, ConstellationGeometry};
use satroute_core::stats::Estimate;

create_exception!(
    satroute,
    InfeasibleError,
    PyRuntimeError,
    "No hop count satisfies the constraints."
);
create_exception!(
    satroute,
    RoutingError,
    PyRuntimeError,
    "A route could not be built on the sampled topology."
);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter { .. } => PyValueError::new_err(e.to_string()),
        Error::Quadrature(_) => PyArithmeticError::new_err(e.to_string()),
        Error::Infeasible(_) => InfeasibleError::new_err(e.to_string()),
        Error::Unroutable { .. } | Error::DeadEnd { .. } => RoutingError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

/// Satellites uniformly distributed on a sphere concentric with the Earth.
#[pyclass(name = "Geometry", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyGeometry(ConstellationGeometry);

#[pymethods]
impl PyGeometry {
    #[new]
    fn new(sphere_radius_m: f64, earth_radius_m: f64, num_satellites: usize) -> PyResult<Self> {
        ConstellationGeometry::new(sphere_radius_m, earth_radius_m, num_satellites)
            .map(PyGeometry)
            .map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (altitude_m, num_satellites, earth_radius_m = 6_371e3))]
    fn from_altitude(altitude_m: f64, num_satellites: usize, earth_radius_m: f64) -> PyResult<Self> {
        ConstellationGeometry::from_altitude(altitude_m, earth_radius_m, num_satellites)
            .map(PyGeometry)
            .map_err(to_py)
    }

    #[getter]
    fn sphere_radius_m(&self) -> f64 {
        self.0.sphere_radius_m()
    }

    #[getter]
    fn earth_radius_m(&self) -> f64 {
        self.0.earth_radius_m()
    }

    #[getter]
    fn num_satellites(&self) -> usize {
        self.0.num_satellites()
    }

    #[getter]
    fn max_available_chord_m(&self) -> f64 {
        self.0.max_available_chord_m()
    }

    fn chord_for_angle(&self, angle_rad: f64) -> f64 {
        self.0.chord_for_angle(angle_rad)
    }

    fn __repr__(&self) -> String {
        format!(
            "Geometry(sphere_radius_m={}, earth_radius_m={}, num_satellites={})",
            self.0.sphere_radius_m(),
            self.0.earth_radius_m(),
            self.0.num_satellites()
        )
    }
}

/// Free-space optical link parameters in SI units.
#[pyclass(name = "Channel", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyChannel(ChannelParams);

#[pymethods]
impl PyChannel {
    #[new]
    #[pyo3(signature = (**overrides))]
    fn new(overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut p = ChannelParams::default();
        if let Some(kw) = overrides {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                let v: f64 = v.extract()?;
                let slot = match key.as_str() {
                    "tx_power_w" => &mut p.tx_power_w,
                    "antenna_gain" => &mut p.antenna_gain,
                    "wavelength_m" => &mut p.wavelength_m,
                    "bandwidth_hz" => &mut p.bandwidth_hz,
                    "noise_power_w" => &mut p.noise_power_w,
                    "eta_s" => &mut p.eta_s,
                    "a0" => &mut p.a0,
                    "jitter_sigma_rad" => &mut p.jitter_sigma_rad,
                    "coverage_threshold" => &mut p.coverage_threshold,
                    "packet_bits" => &mut p.packet_bits,
                    other => return Err(PyValueError::new_err(format!("unknown channel parameter `{other}`"))),
                };
                *slot = v;
            }
        }
        p.validate().map_err(to_py)?;
        Ok(PyChannel(p))
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let p = &self.0;
        let d = PyDict::new(py);
        for (k, v) in [
            ("tx_power_w", p.tx_power_w),
            ("antenna_gain", p.antenna_gain),
            ("wavelength_m", p.wavelength_m),
            ("bandwidth_hz", p.bandwidth_hz),
            ("noise_power_w", p.noise_power_w),
            ("eta_s", p.eta_s),
            ("a0", p.a0),
            ("jitter_sigma_rad", p.jitter_sigma_rad),
            ("coverage_threshold", p.coverage_threshold),
            ("packet_bits", p.packet_bits),
        ] {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    /// SNR at a given hop chord and fading gain.
    fn snr(&self, hop_chord_m: f64, gain: f64) -> f64 {
        ch::snr(&self.0, hop_chord_m, gain)
    }

    /// Probability that a hop is both outage-free and above the SNR threshold.
    fn coverage(&self, hop_chord_m: f64) -> f64 {
        ch::conditional_coverage(&self.0, hop_chord_m)
    }

    /// Packet latency at the mean fading gain.
    fn latency_kernel(&self, hop_chord_m: f64) -> f64 {
        ch::single_hop_latency_kernel(&self.0, hop_chord_m)
    }

    /// Packet latency averaged over non-outage fading.
    fn expected_latency(&self, hop_chord_m: f64) -> PyResult<f64> {
        ch::expected_latency_over_fading(&self.0, hop_chord_m).map_err(|e| to_py(e.into()))
    }
}

/// Endpoint-hop distance scaling factor at a given ideal hop angle.
#[pyfunction]
fn alpha1(geometry: PyGeometry, hop_angle_rad: f64) -> PyResult<f64> {
    sphere::alpha1(&geometry.0, hop_angle_rad).map_err(to_py)
}

/// CDF of the polar angle of the satellite nearest to a pole.
#[pyfunction]
fn nearest_neighbor_cdf(geometry: PyGeometry, angle_rad: f64) -> f64 {
    sphere::nn_polar_cdf(&geometry.0, angle_rad)
}

/// Analytic metrics of a route with `num_hops` equally spaced ideal relays.
#[pyfunction]
#[pyo3(signature = (geometry, channel, theta_rad, num_hops, alpha2 = "additive"))]
fn analyze<'py>(
    py: Python<'py>,
    geometry: PyGeometry,
    channel: PyChannel,
    theta_rad: f64,
    num_hops: u32,
    alpha2: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let mode: Alpha2Mode = parse(alpha2)?;
    let spec = RouteSpec::new(geometry.0, channel.0, theta_rad, num_hops, mode).map_err(to_py)?;
    let a = RouteAnalysis::new(&spec).map_err(to_py)?;
    let r = a.report().map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("num_hops", r.num_hops)?;
    for (k, v) in [
        ("alpha1", a.alpha1()),
        ("availability", r.availability),
        ("routing_coverage", r.routing_coverage),
        ("avail_and_coverage", r.avail_and_coverage),
        ("t_tx_exact_s", r.t_tx_exact_s),
        ("t_tx_approx_s", r.t_tx_approx_s),
        ("t_arq_exact_s", r.t_arq_exact_s),
        ("t_arq_approx_s", r.t_arq_approx_s),
    ] {
        d.set_item(k, v)?;
    }
    Ok(d)
}

/// `(num_hops, predicted_latency_s, feasible)`.
type CandidateRow = (u32, f64, bool);

/// Hop-count search. Returns `(optimal_hops, [(num_hops, latency_s, feasible), ...])`.
#[pyfunction]
#[pyo3(signature = (geometry, channel, theta_rad, epsilon = 0.1, method = 1, alpha2 = "additive"))]
fn optimize(
    geometry: PyGeometry,
    channel: PyChannel,
    theta_rad: f64,
    epsilon: f64,
    method: u8,
    alpha2: &str,
) -> PyResult<(u32, Vec<CandidateRow>)> {
    let mode: Alpha2Mode = parse(alpha2)?;
    let (g, c) = (geometry.0, channel.0);
    let outcome: HopSearchOutcome = match method {
        1 => planner::algorithm1(&g, &c, theta_rad, epsilon, mode),
        2 => planner::default_method2_cap(&g, &c, theta_rad)
            .and_then(|cap| planner::method2_hop_search(&g, &c, theta_rad, cap, None)),
        _ => return Err(PyValueError::new_err("method must be 1 or 2")),
    }
    .map_err(to_py)?;
    let table = outcome
        .candidate_table
        .iter()
        .map(|c| (c.num_hops, c.predicted_latency_s, c.feasible))
        .collect();
    let (n, _) = outcome.into_result().map_err(to_py)?;
    Ok((n, table))
}

/// Satellite positions `(polar_rad, azimuth_rad)` of one sampled constellation.
#[pyfunction]
fn sample_topology(geometry: PyGeometry, seed: u64) -> Vec<(f64, f64)> {
    sphere::sample_topology(&geometry.0, seed)
        .satellites()
        .iter()
        .map(|p| (p.polar_rad, p.azimuth_rad))
        .collect()
}

/// Nearest-relay route with blockage repair on one sampled constellation.
#[pyfunction]
fn plan_route<'py>(
    py: Python<'py>,
    geometry: PyGeometry,
    seed: u64,
    theta_rad: f64,
    num_hops: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let topo = sphere::sample_topology(&geometry.0, seed);
    let plan = planner::algorithm2(&topo, theta_rad, num_hops).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("num_hops", plan.num_hops)?;
    d.set_item("relay_indices", plan.relay_indices.clone())?;
    d.set_item("hop_chords_m", plan.hop_chords_m.clone())?;
    d.set_item("raw_hop_chords_m", plan.raw_hop_chords_m.clone())?;
    d.set_item("blockage_flags", plan.blockage_flags.clone())?;
    d.set_item("inserted_extra_relays", plan.inserted_extra_relays.clone())?;
    Ok(d)
}

/// Monte Carlo estimates as `{metric: (mean, std_error)}`.
#[pyfunction]
#[pyo3(signature = (geometry, channel, theta_rad, num_hops, strategy = "proposed", realizations = 10_000, seed = 0, epsilon = 0.1))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    geometry: PyGeometry,
    channel: PyChannel,
    theta_rad: f64,
    num_hops: u32,
    strategy: &str,
    realizations: usize,
    seed: u64,
    epsilon: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let strategy: Strategy = parse(strategy)?;
    let cfg = SimulationConfig {
        num_realizations: realizations,
        base_seed: seed,
        epsilon,
        ..SimulationConfig::new(geometry.0, channel.0, theta_rad, strategy, num_hops)
    };
    let sim = Simulator::new(&cfg).map_err(to_py)?;
    let r = py.detach(|| sim.run());
    let d = PyDict::new(py);
    let pair = |e: Estimate| (e.mean, e.std_error);
    for (k, e) in [
        ("availability", r.availability),
        ("routing_coverage", r.routing_coverage),
        ("avail_and_coverage", r.avail_and_coverage),
        ("t_tx_s", r.t_tx),
        ("t_tx_kernel_s", r.t_tx_kernel),
        ("t_arq_s", r.t_arq),
        ("t_arq_kernel_s", r.t_arq_kernel),
        ("t_prop_s", r.t_prop),
    ] {
        d.set_item(k, pair(e))?;
    }
    d.set_item("failures", r.failures)?;
    d.set_item("communication_range_m", r.communication_range_m)?;
    Ok(d)
}

#[pymodule]
fn satroute(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGeometry>()?;
    m.add_class::<PyChannel>()?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add("RoutingError", m.py().get_type::<RoutingError>())?;
    m.add_function(wrap_pyfunction!(alpha1, m)?)?;
    m.add_function(wrap_pyfunction!(nearest_neighbor_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(sample_topology, m)?)?;
    m.add_function(wrap_pyfunction!(plan_route, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
