//! Monte Carlo evaluation of routing strategies on sampled constellations.
//!
//! Realization `r` draws its topology and its fading from two streams of a
//! ChaCha8 generator seeded with `mix(base_seed) ^ r`, so each realization is
//! reproducible on its own and the batch result does not depend on thread
//! scheduling. Aggregation runs over realizations in index order.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    conditional_coverage, covered_gain_from_uniform, gain_from_uniform, latency_at_gain, single_hop_latency_kernel,
    snr, ChannelParams,
};
use crate::error::{Error, Result};
use crate::metrics::{MetricErrors, MetricSource, MetricsReport, ARQ_COVERAGE_FLOOR};
use crate::planner::{
    algorithm2, communication_range, nearest_relay_route, plan_greedy, solve_ideal, GreedyRule, RoutePlan,
};
use crate::sphere::{sample_topology, ConstellationGeometry, SphericalPoint, Topology};
use crate::stats::Estimate;

pub const SPEED_OF_LIGHT_MPS: f64 = 3e8;

const FADING_STREAM: u64 = 1;

/// SplitMix64 finalizer. A bijection, so distinct base seeds never share a
/// realization seed set the way nearby raw seeds would under `^ r`.
pub fn mix_seed(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Transmission attempts until the first success, each succeeding with
/// probability `p`, from a uniform `u ∈ (0, 1]` (geometric inverse CDF).
pub fn arq_attempts(p: f64, u: f64) -> f64 {
    if p >= 1.0 {
        1.0
    } else {
        (u.ln() / (-p).ln_1p()).ceil().max(1.0)
    }
}

/// Seed of realization `index` under `base_seed`.
pub fn realization_seed(base_seed: u64, index: u64) -> u64 {
    mix_seed(base_seed) ^ index
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// Nearest relays to the equally spaced ideal positions.
    Proposed,
    MinDeflection,
    MaxStepsize,
    MinStepsize,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Proposed,
        Strategy::MinDeflection,
        Strategy::MaxStepsize,
        Strategy::MinStepsize,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Proposed => "proposed",
            Strategy::MinDeflection => "min_deflection",
            Strategy::MaxStepsize => "max_stepsize",
            Strategy::MinStepsize => "min_stepsize",
        }
    }

    fn greedy_rule(&self) -> Option<GreedyRule> {
        match self {
            Strategy::Proposed => None,
            Strategy::MinDeflection => Some(GreedyRule::MinDeflection),
            Strategy::MaxStepsize => Some(GreedyRule::MaxStepsize),
            Strategy::MinStepsize => Some(GreedyRule::MinStepsize),
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s.trim())
            .ok_or_else(|| format!("unknown strategy `{}`", s.trim()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub geometry: ConstellationGeometry,
    pub channel: ChannelParams,
    pub theta_total: f64,
    pub strategy: Strategy,
    pub num_realizations: usize,
    pub base_seed: u64,
    pub min_stepsize_cone_rad: f64,
    /// Hop count of the proposed strategy's ideal spacing.
    pub num_hops: u32,
    /// Interruption tolerance that fixes the baselines' communication range.
    pub epsilon: f64,
    pub speed_of_light_mps: f64,
}

impl SimulationConfig {
    pub fn new(
        geometry: ConstellationGeometry,
        channel: ChannelParams,
        theta_total: f64,
        strategy: Strategy,
        num_hops: u32,
    ) -> Self {
        SimulationConfig {
            geometry,
            channel,
            theta_total,
            strategy,
            num_realizations: 10_000,
            base_seed: 0,
            min_stepsize_cone_rad: PI / 6.0,
            num_hops,
            epsilon: 0.1,
            speed_of_light_mps: SPEED_OF_LIGHT_MPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        if !(self.theta_total > 0.0 && self.theta_total <= PI) {
            return Err(Error::invalid(
                "theta_total",
                format!("must lie in (0, π], got {}", self.theta_total),
            ));
        }
        if self.num_realizations == 0 {
            return Err(Error::invalid("num_realizations", "must be at least 1"));
        }
        let c = self.min_stepsize_cone_rad;
        if !(c > 0.0 && c <= PI / 2.0) {
            return Err(Error::invalid(
                "min_stepsize_cone",
                format!("must lie in (0, π/2], got {c}"),
            ));
        }
        if self.num_hops == 0 {
            return Err(Error::invalid("num_hops", "must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid(
                "epsilon",
                format!("must lie in (0, 1), got {}", self.epsilon),
            ));
        }
        if !(self.speed_of_light_mps > 0.0 && self.speed_of_light_mps.is_finite()) {
            return Err(Error::invalid("speed_of_light", "must be positive"));
        }
        Ok(())
    }
}

/// Outcome of one realization. Latencies are NaN when no route was built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Realization {
    pub routed: bool,
    pub available: bool,
    pub covered: bool,
    pub num_hops: u32,
    pub repaired: bool,
    /// Packet latency at sampled non-outage gains.
    pub t_tx_s: f64,
    /// Packet latency at the mean fading gain.
    pub t_tx_kernel_s: f64,
    /// Geometric retries times the latency at the successful attempt's gain.
    pub t_arq_s: f64,
    /// Mean-gain latency weighted by the mean retry count.
    pub t_arq_kernel_s: f64,
    pub t_prop_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalReport {
    pub strategy: Strategy,
    pub num_realizations: usize,
    pub availability: Estimate,
    pub routing_coverage: Estimate,
    pub avail_and_coverage: Estimate,
    pub t_tx: Estimate,
    pub t_tx_kernel: Estimate,
    pub t_arq: Estimate,
    pub t_arq_kernel: Estimate,
    pub t_prop: Estimate,
    /// Final hop count → number of routed realizations.
    pub hop_histogram: BTreeMap<u32, usize>,
    /// Realizations with no route (unroutable or dead end).
    pub failures: usize,
    /// Realizations whose nearest-relay route needed extra relays.
    pub repaired: usize,
    /// Longest hop the greedy baselines may use.
    pub communication_range_m: f64,
}

impl EmpiricalReport {
    /// Empirical means in the analytic report layout; approximations are NaN.
    pub fn to_metrics_report(&self) -> MetricsReport {
        let mode = self
            .hop_histogram
            .iter()
            .max_by_key(|(_, c)| **c)
            .map_or(0, |(h, _)| *h);
        MetricsReport {
            num_hops: mode,
            availability: self.availability.mean,
            routing_coverage: self.routing_coverage.mean,
            avail_and_coverage: self.avail_and_coverage.mean,
            t_tx_exact_s: self.t_tx.mean,
            t_tx_approx_s: f64::NAN,
            t_arq_exact_s: self.t_arq.mean,
            t_arq_approx_s: f64::NAN,
            source: MetricSource::Empirical,
            std_errors: Some(MetricErrors {
                availability: self.availability.std_error,
                routing_coverage: self.routing_coverage.std_error,
                avail_and_coverage: self.avail_and_coverage.std_error,
                t_tx_s: self.t_tx.std_error,
                t_arq_s: self.t_arq.std_error,
            }),
        }
    }
}

/// Greedy baseline route on a topology.
pub fn plan_benchmark(
    topology: &Topology,
    theta_total: f64,
    strategy: Strategy,
    range_m: f64,
    cone_rad: f64,
) -> Result<RoutePlan> {
    let rule = strategy
        .greedy_rule()
        .ok_or_else(|| Error::invalid("strategy", "the proposed strategy is not a greedy baseline"))?;
    plan_greedy(topology, theta_total, rule, range_m, cone_rad)
}

/// A validated configuration with its derived constants.
#[derive(Debug, Clone, Copy)]
pub struct Simulator {
    config: SimulationConfig,
    range_m: f64,
}

impl Simulator {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        let range_m = match solve_ideal(&config.geometry, &config.channel, config.theta_total, config.epsilon) {
            Ok(ideal) => communication_range(&config.geometry, &config.channel, config.epsilon, ideal.num_hops)?,
            Err(Error::Infeasible(_)) => config.geometry.max_available_chord_m(),
            Err(e) => return Err(e),
        };
        Ok(Simulator {
            config: *config,
            range_m,
        })
    }

    pub fn communication_range_m(&self) -> f64 {
        self.range_m
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    /// Realization `index`, a pure function of its realization seed.
    pub fn realization(&self, index: u64) -> Realization {
        let cfg = &self.config;
        let seed = realization_seed(cfg.base_seed, index);
        let topology = sample_topology(&cfg.geometry, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(FADING_STREAM);
        let ch = &cfg.channel;

        let (measured, delivered) = match cfg.strategy {
            Strategy::Proposed => {
                let raw = nearest_relay_route(&topology, cfg.theta_total, cfg.num_hops)
                    .expect("validated configuration yields a nearest-relay route");
                let repaired = algorithm2(&topology, cfg.theta_total, cfg.num_hops).ok();
                (Some(raw), repaired)
            }
            s => match plan_benchmark(&topology, cfg.theta_total, s, self.range_m, cfg.min_stepsize_cone_rad) {
                Ok(p) => (Some(p.clone()), Some(p)),
                Err(_) => (None, None),
            },
        };

        let mut out = Realization {
            routed: delivered.is_some(),
            available: false,
            covered: false,
            num_hops: 0,
            repaired: false,
            t_tx_s: f64::NAN,
            t_tx_kernel_s: f64::NAN,
            t_arq_s: f64::NAN,
            t_arq_kernel_s: f64::NAN,
            t_prop_s: f64::NAN,
        };
        let Some(measured) = measured else {
            return out;
        };

        // Per-hop uniforms: outage, gain, retry count.
        let draws: Vec<[f64; 3]> = measured
            .hop_chords_m
            .iter()
            .map(|_| [rng.random(), 1.0 - rng.random::<f64>(), 1.0 - rng.random::<f64>()])
            .collect();
        let j2 = ch.jitter_sigma_rad * ch.jitter_sigma_rad;
        out.available = measured.is_available();
        out.covered = measured
            .hop_chords_m
            .iter()
            .zip(&draws)
            .all(|(&l, d)| d[0] >= j2 && snr(ch, l, gain_from_uniform(ch, d[1])) >= ch.coverage_threshold);
        out.t_tx_s = measured
            .hop_chords_m
            .iter()
            .zip(&draws)
            .map(|(&l, d)| latency_at_gain(ch, l, gain_from_uniform(ch, d[1])))
            .sum();
        out.t_tx_kernel_s = measured
            .hop_chords_m
            .iter()
            .map(|&l| single_hop_latency_kernel(ch, l))
            .sum();

        let Some(delivered) = delivered else {
            return out;
        };
        out.num_hops = delivered.num_hops;
        out.repaired = !delivered.inserted_extra_relays.is_empty();
        // A repaired route gets fresh draws; otherwise the measured hops are the delivered hops.
        let arq_draws: Vec<[f64; 3]> = if delivered.hop_chords_m == measured.hop_chords_m {
            draws
        } else {
            delivered
                .hop_chords_m
                .iter()
                .map(|_| [rng.random(), 1.0 - rng.random::<f64>(), 1.0 - rng.random::<f64>()])
                .collect()
        };
        let mut t_arq = 0.0;
        let mut t_arq_kernel = 0.0;
        for (&l, d) in delivered.hop_chords_m.iter().zip(&arq_draws) {
            let p = conditional_coverage(ch, l).max(ARQ_COVERAGE_FLOOR);
            let attempts = arq_attempts(p, d[2]);
            t_arq += attempts * latency_at_gain(ch, l, covered_gain_from_uniform(ch, l, d[1]));
            t_arq_kernel += single_hop_latency_kernel(ch, l) / p;
        }
        out.t_arq_s = t_arq;
        out.t_arq_kernel_s = t_arq_kernel;
        out.t_prop_s = delivered.total_chord_m() / cfg.speed_of_light_mps;
        out
    }

    /// Realizations `0..num_realizations`, in index order.
    pub fn realizations(&self) -> Vec<Realization> {
        (0..self.config.num_realizations as u64)
            .into_par_iter()
            .map(|i| self.realization(i))
            .collect()
    }

    pub fn run(&self) -> EmpiricalReport {
        self.summarize(&self.realizations())
    }

    pub fn summarize(&self, rs: &[Realization]) -> EmpiricalReport {
        let ind = |f: fn(&Realization) -> bool| Estimate::from_samples(rs.iter().map(move |r| f(r) as u8 as f64));
        let measured = |f: fn(&Realization) -> f64| Estimate::from_samples(rs.iter().map(f).filter(|v| !v.is_nan()));
        let delivered = |f: fn(&Realization) -> f64| Estimate::from_samples(rs.iter().filter(|r| r.routed).map(f));
        let mut hop_histogram = BTreeMap::new();
        for r in rs.iter().filter(|r| r.routed) {
            *hop_histogram.entry(r.num_hops).or_insert(0) += 1;
        }
        EmpiricalReport {
            strategy: self.config.strategy,
            num_realizations: rs.len(),
            availability: ind(|r| r.available),
            routing_coverage: ind(|r| r.covered),
            avail_and_coverage: ind(|r| r.available && r.covered),
            t_tx: measured(|r| r.t_tx_s),
            t_tx_kernel: measured(|r| r.t_tx_kernel_s),
            t_arq: delivered(|r| r.t_arq_s),
            t_arq_kernel: delivered(|r| r.t_arq_kernel_s),
            t_prop: delivered(|r| r.t_prop_s),
            hop_histogram,
            failures: rs.iter().filter(|r| !r.routed).count(),
            repaired: rs.iter().filter(|r| r.repaired).count(),
            communication_range_m: self.range_m,
        }
    }
}

pub fn run(config: &SimulationConfig) -> Result<EmpiricalReport> {
    Ok(Simulator::new(config)?.run())
}

/// Central angles of endpoint and middle hops from fresh topologies.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralAngleSamples {
    pub hop_angle_rad: f64,
    /// Transmitter at the pole to the satellite nearest `(h, 0)`.
    pub endpoint: Vec<f64>,
    /// Satellite nearest `(h, 0)` to the satellite nearest `(2h, 0)`.
    pub middle: Vec<f64>,
}

impl CentralAngleSamples {
    /// Mean endpoint chord over the ideal chord.
    pub fn endpoint_chord_ratio(&self) -> f64 {
        let s = (0.5 * self.hop_angle_rad).sin();
        Estimate::from_samples(self.endpoint.iter().map(|a| (0.5 * a).sin() / s)).mean
    }
}

pub fn empirical_central_angle_samples(
    geometry: &ConstellationGeometry,
    hop_angle: f64,
    num_samples: usize,
    seed: u64,
) -> Result<CentralAngleSamples> {
    if num_samples == 0 {
        return Err(Error::invalid("num_samples", "must be at least 1"));
    }
    if !(0.0..=PI / 2.0).contains(&hop_angle) {
        return Err(Error::invalid(
            "hop_angle",
            format!("must lie in [0, π/2], got {hop_angle}"),
        ));
    }
    let pole = SphericalPoint::on_meridian(0.0);
    let first = SphericalPoint::on_meridian(hop_angle);
    let second = SphericalPoint::on_meridian(2.0 * hop_angle);
    let pairs: Vec<(f64, f64)> = (0..num_samples as u64)
        .into_par_iter()
        .map(|i| {
            let topo = sample_topology(geometry, realization_seed(seed, i));
            let a = topo.satellites()[topo.nearest(&first)];
            let b = topo.satellites()[topo.nearest(&second)];
            (
                crate::sphere::central_angle(&pole, &a),
                crate::sphere::central_angle(&a, &b),
            )
        })
        .collect();
    let (endpoint, middle) = pairs.into_iter().unzip();
    Ok(CentralAngleSamples {
        hop_angle_rad: hop_angle,
        endpoint,
        middle,
    })
}
