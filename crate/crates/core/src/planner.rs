//! Hop-count optimization and relay selection.
//!
//! The hop count is chosen on the analytic model (ideal equal spacing,
//! scaled by the distance factors), then realized on a concrete topology by
//! picking the satellite nearest to each ideal relay position.

use std::f64::consts::PI;

use crate::channel::{conditional_coverage, single_hop_latency_kernel, ChannelParams};
use crate::error::{Error, InfeasibleCase, Result};
use crate::metrics::{RouteAnalysis, RouteSpec};
use crate::sphere::{alpha1, alpha2, dist_sq, Alpha2Mode, ConstellationGeometry, SphericalPoint, Topology};

/// Hop counts scanned past `n_min` when the jitter bound is infinite (no jitter).
pub const UNBOUNDED_SCAN: u32 = 4096;

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon", format!("must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

fn check_angle(theta_total: f64) -> Result<()> {
    if !(theta_total > 0.0 && theta_total <= PI) {
        return Err(Error::invalid(
            "total_angle",
            format!("must lie in (0, π], got {theta_total}"),
        ));
    }
    Ok(())
}

/// Feasible hop-count range `[n_min, n_max]`.
///
/// `n_min` is the fewest hops whose equal-spacing chords clear the Earth;
/// `n_max` is the largest count for which the jitter outage alone keeps the
/// route's interruption probability below `epsilon`. `n_min > n_max` means
/// no hop count can work. Without jitter `n_max` saturates at `u32::MAX`.
pub fn hop_bounds(
    geometry: &ConstellationGeometry,
    channel: &ChannelParams,
    theta_total: f64,
    epsilon: f64,
) -> Result<(u32, u32)> {
    check_epsilon(epsilon)?;
    check_angle(theta_total)?;
    let half_max = (geometry.earth_radius_m() / geometry.sphere_radius_m()).acos();
    let n_min = (theta_total / (2.0 * half_max)).ceil().max(1.0) as u32;
    let j2 = channel.jitter_sigma_rad * channel.jitter_sigma_rad;
    let n_max = if j2 == 0.0 {
        u32::MAX
    } else {
        let r = (-epsilon).ln_1p() / (-j2).ln_1p();
        let f = r.floor();
        let below = if f == r { f - 1.0 } else { f };
        below.clamp(0.0, u32::MAX as f64) as u32
    };
    Ok((n_min, n_max))
}

fn scan_end(n_min: u32, n_max: u32) -> u32 {
    if n_max == u32::MAX {
        n_min.saturating_add(UNBOUNDED_SCAN)
    } else {
        n_max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdealSolution {
    pub num_hops: u32,
    /// Relay positions `iΘ/N_l`, `i = 1..N_l−1`, on the zero-azimuth meridian.
    pub relay_polar_angles_rad: Vec<f64>,
    pub hop_chord_m: f64,
    /// `N_l · T*(chord)`: the latency with relays exactly at the ideal positions.
    pub latency_bound_s: f64,
}

/// Equal-spacing optimum when a relay can be placed anywhere.
///
/// Scans the feasible range for hop counts whose per-hop coverage meets
/// `(1−ε)^{1/N_l}` and returns the one with the smallest total kernel latency.
pub fn solve_ideal(
    geometry: &ConstellationGeometry,
    channel: &ChannelParams,
    theta_total: f64,
    epsilon: f64,
) -> Result<IdealSolution> {
    channel.validate()?;
    let (n_min, n_max) = hop_bounds(geometry, channel, theta_total, epsilon)?;
    if n_min > n_max {
        return Err(Error::Infeasible(InfeasibleCase::EmptyRange));
    }
    let mut best: Option<(u32, f64)> = None;
    for n in n_min..=scan_end(n_min, n_max) {
        let l = geometry.chord_for_angle(theta_total / n as f64);
        if conditional_coverage(channel, l) < (1.0 - epsilon).powf(1.0 / n as f64) {
            continue;
        }
        let t = n as f64 * single_hop_latency_kernel(channel, l);
        if best.is_none_or(|(_, bt)| t < bt) {
            best = Some((n, t));
        }
    }
    let (num_hops, latency_bound_s) = best.ok_or(Error::Infeasible(InfeasibleCase::NoCandidate))?;
    Ok(ideal_for(geometry, channel, theta_total, num_hops, latency_bound_s))
}

fn ideal_for(
    geometry: &ConstellationGeometry,
    channel: &ChannelParams,
    theta_total: f64,
    num_hops: u32,
    latency: f64,
) -> IdealSolution {
    let h = theta_total / num_hops as f64;
    let hop_chord_m = geometry.chord_for_angle(h);
    IdealSolution {
        num_hops,
        relay_polar_angles_rad: (1..num_hops).map(|i| i as f64 * h).collect(),
        hop_chord_m,
        latency_bound_s: if latency.is_finite() {
            latency
        } else {
            num_hops as f64 * single_hop_latency_kernel(channel, hop_chord_m)
        },
    }
}

/// Ideal-scenario geometry and latency for a given hop count.
pub fn ideal_route(
    geometry: &ConstellationGeometry,
    channel: &ChannelParams,
    theta_total: f64,
    num_hops: u32,
) -> IdealSolution {
    ideal_for(geometry, channel, theta_total, num_hops.max(1), f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    /// Scaled-chord feasibility check and kernel-latency objective.
    MethodI,
    /// Approximate ARQ latency objective over a capped range.
    MethodII,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub num_hops: u32,
    pub predicted_latency_s: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopSearchOutcome {
    pub optimal_hops: Option<u32>,
    pub candidate_table: Vec<Candidate>,
    pub method: SearchMethod,
    pub infeasible: Option<InfeasibleCase>,
}

impl HopSearchOutcome {
    pub fn into_result(self) -> Result<(u32, Self)> {
        match (self.optimal_hops, self.infeasible) {
            (Some(n), _) => Ok((n, self)),
            (None, case) => Err(Error::Infeasible(case.unwrap_or(InfeasibleCase::NoCandidate))),
        }
    }
}

/// Source of the distance scaling factors used by the hop searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling {
    /// Integrate the endpoint factor; derive the middle one with the given rule.
    Analytic(Alpha2Mode),
    /// Use fixed factors (1, 1 recovers the ideal scenario).
    Fixed { alpha1: f64, alpha2: f64 },
}

/// Pick the lowest-latency feasible row; equal latencies go to the later row.
fn select(table: &[Candidate]) -> Option<u32> {
    let mut best: Option<Candidate> = None;
    for c in table.iter().filter(|c| c.feasible) {
        if best.is_none_or(|b| b.predicted_latency_s >= c.predicted_latency_s) {
            best = Some(*c);
        }
    }
    best.map(|c| c.num_hops)
}

/// Method I hop-count search with analytically integrated scaling factors.
pub fn algorithm1(
    geometry: &ConstellationGeometry,
    channel: &ChannelParams,
    theta_total: f64,
    epsilon: f64,
    alpha2_mode: Alpha2Mode,
) -> Result<HopSearchOutcome> {
    algorithm1_with(geometry, channel, theta_total, epsilon, Scaling::Analytic(alpha2_mode))
}

/// Method I hop-count search.
///
/// A candidate is feasible when the scaled chords meet the coverage target
/// `P(α₁ℓ)²·P(α₂ℓ)^{N_l−2} ≥ 1−ε` and the scaled middle chord is available
/// (the endpoint chord for two hops). Its score is `2T*(α₁ℓ) + (N_l−2)T*(α₂ℓ)`.
/// A one-hop candidate is the direct link, with no scaling.
pub fn algorithm1_with(
    geometry: &ConstellationGeometry,
    channel: &ChannelParams,
    theta_total: f64,
    epsilon: f64,
    scaling: Scaling,
) -> Result<HopSearchOutcome> {
    channel.validate()?;
    let (n_min, n_max) = hop_bounds(geometry, channel, theta_total, epsilon)?;
    if n_min > n_max {
        return Ok(HopSearchOutcome {
            optimal_hops: None,
            candidate_table: Vec::new(),
            method: SearchMethod::MethodI,
            infeasible: Some(InfeasibleCase::EmptyRange),
        });
    }
    let l_avail = geometry.max_available_chord_m();
    let mut table = Vec::new();
    for n in n_min..=scan_end(n_min, n_max) {
        let h = theta_total / n as f64;
        let l = geometry.chord_for_angle(h);
        let (a1, a2) = if n == 1 {
            (1.0, 1.0)
        } else {
            match scaling {
                Scaling::Analytic(mode) => {
                    let a1 = alpha1(geometry, h)?;
                    (a1, alpha2(a1, mode))
                }
                Scaling::Fixed { alpha1, alpha2 } => (alpha1, alpha2),
            }
        };
        let (l1, l2) = (a1 * l, a2 * l);
        let candidate = if n == 1 {
            Candidate {
                num_hops: 1,
                predicted_latency_s: single_hop_latency_kernel(channel, l),
                feasible: conditional_coverage(channel, l) >= 1.0 - epsilon && l < l_avail,
            }
        } else {
            let middle = n as f64 - 2.0;
            let cov = conditional_coverage(channel, l1).powi(2) * conditional_coverage(channel, l2).powf(middle);
            let guard = if n == 2 { l1 } else { l2 };
            Candidate {
                num_hops: n,
                predicted_latency_s: 2.0 * single_hop_latency_kernel(channel, l1)
                    + middle * single_hop_latency_kernel(channel, l2),
                feasible: cov >= 1.0 - epsilon && guard < l_avail,
            }
        };
        table.push(candidate);
    }
    let optimal_hops = select(&table);
    Ok(HopSearchOutcome {
        optimal_hops,
        infeasible: optimal_hops.is_none().then_some(InfeasibleCase::NoCandidate),
        candidate_table: table,
        method: SearchMethod::MethodI,
    })
}

/// Default upper hop count for Method II: `min(n_max at ε = 0.1, 4·n_min)`.
pub fn default_method2_cap(geometry: &ConstellationGeometry, channel: &ChannelParams, theta_total: f64) -> Result<u32> {
    let (n_min, n_max) = hop_bounds(geometry, channel, theta_total, 0.1)?;
    Ok(n_max.min(n_min.saturating_mul(4)).max(n_min))
}

/// Method II: the hop count in `[n_min, n_max_cap]` minimizing the
/// approximate ARQ latency. `alpha1_override` replaces the integrated
/// endpoint factor (e.g. 1 for the ideal scenario).
pub fn method2_hop_search(
    geometry: &ConstellationGeometry,
    channel: &ChannelParams,
    theta_total: f64,
    n_max_cap: u32,
    alpha1_override: Option<f64>,
) -> Result<HopSearchOutcome> {
    channel.validate()?;
    let (n_min, _) = hop_bounds(geometry, channel, theta_total, 0.1)?;
    if n_max_cap < n_min {
        return Err(Error::invalid(
            "n_max_cap",
            format!("must be at least the minimum hop count {n_min}, got {n_max_cap}"),
        ));
    }
    let mut table = Vec::new();
    for n in n_min..=n_max_cap {
        let spec = RouteSpec::new(*geometry, *channel, theta_total, n, Alpha2Mode::Additive)?;
        let analysis = match alpha1_override {
            Some(a) => RouteAnalysis::with_alpha1(&spec, a),
            None => RouteAnalysis::new(&spec)?,
        };
        let t = analysis.t_arq_approx()?;
        table.push(Candidate {
            num_hops: n,
            predicted_latency_s: t,
            feasible: t.is_finite() && t > 0.0,
        });
    }
    let optimal_hops = select(&table);
    Ok(HopSearchOutcome {
        optimal_hops,
        infeasible: optimal_hops.is_none().then_some(InfeasibleCase::NoCandidate),
        candidate_table: table,
        method: SearchMethod::MethodII,
    })
}

/// Relay route realized on a topology.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutePlan {
    /// Hops of the final route.
    pub num_hops: u32,
    /// Satellites in route order, including inserted extra relays.
    pub relay_indices: Vec<usize>,
    pub hop_chords_m: Vec<f64>,
    /// Chords of the nearest-relay route before any repair.
    pub raw_hop_chords_m: Vec<f64>,
    /// Per raw hop: chord exceeds the available chord (line of sight blocked).
    pub blockage_flags: Vec<bool>,
    pub inserted_extra_relays: Vec<usize>,
}

impl RoutePlan {
    pub fn is_available(&self) -> bool {
        !self.blockage_flags.iter().any(|&b| b)
    }

    pub fn total_chord_m(&self) -> f64 {
        self.hop_chords_m.iter().sum()
    }
}

/// A node of a route: the fixed transmitter/receiver or a satellite.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Node {
    Endpoint([f64; 3]),
    Satellite(usize),
}

struct RouteGeometry<'a> {
    topology: &'a Topology,
    radius: f64,
}

impl RouteGeometry<'_> {
    fn unit(&self, n: Node) -> [f64; 3] {
        match n {
            Node::Endpoint(u) => u,
            Node::Satellite(i) => self.topology.unit_vectors()[i],
        }
    }

    fn chord(&self, a: Node, b: Node) -> f64 {
        self.radius * dist_sq(&self.unit(a), &self.unit(b)).sqrt()
    }
}

/// Spherical angle at `at` between the great circles towards `a` and `b`.
fn bearing_angle(at: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let tangent = |x: &[f64; 3]| {
        let d = at[0] * x[0] + at[1] * x[1] + at[2] * x[2];
        [x[0] - d * at[0], x[1] - d * at[1], x[2] - d * at[2]]
    };
    let (ta, tb) = (tangent(a), tangent(b));
    let dot = ta[0] * tb[0] + ta[1] * tb[1] + ta[2] * tb[2];
    let cross = [
        ta[1] * tb[2] - ta[2] * tb[1],
        ta[2] * tb[0] - ta[0] * tb[2],
        ta[0] * tb[1] - ta[1] * tb[0],
    ];
    let c = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    c.atan2(dot)
}

/// Satellites within `range_m` of `from` that end strictly closer to `target`.
fn advancing<'a>(
    topology: &'a Topology,
    from: &'a [f64; 3],
    target: &'a [f64; 3],
    range_m: f64,
) -> impl Iterator<Item = usize> + 'a {
    let r = topology.geometry().sphere_radius_m();
    let reach = (range_m / r).powi(2);
    let here = dist_sq(from, target);
    topology
        .unit_vectors()
        .iter()
        .enumerate()
        .filter(move |(_, u)| dist_sq(u, from) <= reach && dist_sq(u, target) < here)
        .map(|(i, _)| i)
}

fn argmin_by<I: Iterator<Item = usize>>(it: I, mut key: impl FnMut(usize) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in it {
        let k = key(i);
        if best.is_none_or(|(_, bk)| k < bk) {
            best = Some((i, k));
        }
    }
    best.map(|(i, _)| i)
}

/// Nearest-relay route without blockage repair.
///
/// Relay `i` is the satellite nearest to the ideal position `(iΘ/N_l, 0)`;
/// ties go to the lowest index and consecutive duplicates are merged.
pub fn nearest_relay_route(topology: &Topology, theta_total: f64, n_hops: u32) -> Result<RoutePlan> {
    let (g, raw) = raw_route(topology, theta_total, n_hops)?;
    let chords: Vec<f64> = raw.windows(2).map(|w| g.chord(w[0], w[1])).collect();
    let l_avail = topology.geometry().max_available_chord_m();
    let flags = chords.iter().map(|&l| l > l_avail).collect();
    Ok(finish_plan(&g, raw, chords, flags, Vec::new()))
}

fn raw_route(topology: &Topology, theta_total: f64, n_hops: u32) -> Result<(RouteGeometry<'_>, Vec<Node>)> {
    check_angle(theta_total)?;
    if n_hops == 0 {
        return Err(Error::invalid("n_hops", "must be at least 1"));
    }
    if topology.is_empty() {
        return Err(Error::invalid("topology", "has no satellites"));
    }
    let g = RouteGeometry {
        topology,
        radius: topology.geometry().sphere_radius_m(),
    };
    let mut raw = vec![Node::Endpoint(SphericalPoint::on_meridian(0.0).unit_vector())];
    for i in 1..n_hops {
        let target = SphericalPoint::on_meridian(i as f64 * theta_total / n_hops as f64);
        let s = Node::Satellite(topology.nearest(&target));
        if raw.last() != Some(&s) {
            raw.push(s);
        }
    }
    raw.push(Node::Endpoint(SphericalPoint::on_meridian(theta_total).unit_vector()));
    Ok((g, raw))
}

/// Nearest-relay route with blockage repair.
///
/// Starts from [`nearest_relay_route`]. Each blocked hop is repaired by
/// repeatedly stepping to the available satellite with the smallest
/// deflection from the bearing to the hop's far end. The blockage flags
/// describe the route before repair.
pub fn algorithm2(topology: &Topology, theta_total: f64, n_hops: u32) -> Result<RoutePlan> {
    let (g, raw) = raw_route(topology, theta_total, n_hops)?;
    let l_avail = topology.geometry().max_available_chord_m();
    let raw_hop_chords_m: Vec<f64> = raw.windows(2).map(|w| g.chord(w[0], w[1])).collect();
    let blockage_flags: Vec<bool> = raw_hop_chords_m.iter().map(|&l| l > l_avail).collect();

    let mut route = vec![raw[0]];
    let mut inserted = Vec::new();
    for (hop, w) in raw.windows(2).enumerate() {
        let (mut at, to) = (w[0], w[1]);
        let mut steps = 0;
        while g.chord(at, to) > l_avail {
            if steps >= topology.len() {
                return Err(Error::Unroutable { hop });
            }
            let (ua, ut) = (g.unit(at), g.unit(to));
            let next = argmin_by(advancing(topology, &ua, &ut, l_avail), |i| {
                bearing_angle(&ua, &topology.unit_vectors()[i], &ut)
            })
            .ok_or(Error::Unroutable { hop })?;
            at = Node::Satellite(next);
            route.push(at);
            inserted.push(next);
            steps += 1;
        }
        route.push(to);
    }
    Ok(finish_plan(&g, route, raw_hop_chords_m, blockage_flags, inserted))
}

fn finish_plan(
    g: &RouteGeometry<'_>,
    route: Vec<Node>,
    raw_hop_chords_m: Vec<f64>,
    blockage_flags: Vec<bool>,
    inserted_extra_relays: Vec<usize>,
) -> RoutePlan {
    let hop_chords_m: Vec<f64> = route.windows(2).map(|w| g.chord(w[0], w[1])).collect();
    let relay_indices = route
        .iter()
        .filter_map(|n| match n {
            Node::Satellite(i) => Some(*i),
            Node::Endpoint(_) => None,
        })
        .collect();
    RoutePlan {
        num_hops: hop_chords_m.len() as u32,
        relay_indices,
        hop_chords_m,
        raw_hop_chords_m,
        blockage_flags,
        inserted_extra_relays,
    }
}

/// Greedy hop-by-hop relay selection rules used as baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyRule {
    /// Smallest deflection from the bearing to the receiver.
    MinDeflection,
    /// Candidate closest to the receiver.
    MaxStepsize,
    /// Candidate closest to the current node within a cone around the bearing to the receiver.
    MinStepsize,
}

/// Build a route greedily: from the transmitter, repeatedly step to an
/// in-range satellite that gets strictly closer to the receiver, until the
/// receiver itself is in range.
pub fn plan_greedy(
    topology: &Topology,
    theta_total: f64,
    rule: GreedyRule,
    range_m: f64,
    cone_rad: f64,
) -> Result<RoutePlan> {
    check_angle(theta_total)?;
    if range_m.is_nan() || range_m <= 0.0 {
        return Err(Error::invalid("range", format!("must be positive, got {range_m}")));
    }
    let g = RouteGeometry {
        topology,
        radius: topology.geometry().sphere_radius_m(),
    };
    let tx = Node::Endpoint(SphericalPoint::on_meridian(0.0).unit_vector());
    let rx = Node::Endpoint(SphericalPoint::on_meridian(theta_total).unit_vector());
    let ut = g.unit(rx);
    let mut route = vec![tx];
    let mut at = tx;
    while g.chord(at, rx) > range_m {
        if route.len() > topology.len() + 1 {
            return Err(Error::DeadEnd { hops: route.len() - 1 });
        }
        let ua = g.unit(at);
        let units = topology.unit_vectors();
        let cands = advancing(topology, &ua, &ut, range_m);
        let next = match rule {
            GreedyRule::MinDeflection => argmin_by(cands, |i| bearing_angle(&ua, &units[i], &ut)),
            GreedyRule::MaxStepsize => argmin_by(cands, |i| dist_sq(&units[i], &ut)),
            GreedyRule::MinStepsize => {
                argmin_by(cands.filter(|&i| bearing_angle(&ua, &units[i], &ut) <= cone_rad), |i| {
                    dist_sq(&units[i], &ua)
                })
            }
        }
        .ok_or(Error::DeadEnd { hops: route.len() - 1 })?;
        at = Node::Satellite(next);
        route.push(at);
    }
    route.push(rx);
    let chords: Vec<f64> = route.windows(2).map(|w| g.chord(w[0], w[1])).collect();
    let l_avail = topology.geometry().max_available_chord_m();
    let flags = chords.iter().map(|&l| l > l_avail).collect();
    Ok(finish_plan(&g, route, chords, flags, Vec::new()))
}

/// Longest hop a greedy baseline may use: available, and meeting the
/// per-hop coverage target `(1−ε)^{1/N}` of an `N`-hop route.
pub fn communication_range(
    geometry: &ConstellationGeometry,
    channel: &ChannelParams,
    epsilon: f64,
    reference_hops: u32,
) -> Result<f64> {
    check_epsilon(epsilon)?;
    let l_avail = geometry.max_available_chord_m();
    let target = (1.0 - epsilon).powf(1.0 / reference_hops.max(1) as f64);
    let slack = 1.0 - target / channel.non_outage_probability();
    if slack <= 0.0 {
        return Ok(0.0);
    }
    if channel.coverage_threshold == 0.0 {
        return Ok(l_avail);
    }
    // P(l) = (1 − (c l²)^{η²})(1 − ς²) with c the threshold gain ratio per unit l².
    let c = channel.coverage_threshold / (channel.a0 * channel.snr_per_gain(1.0));
    let l = (slack.powf(1.0 / (channel.eta_s * channel.eta_s)) / c).sqrt();
    Ok(l.min(l_avail))
}
