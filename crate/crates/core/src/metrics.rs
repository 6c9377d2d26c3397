//! Route-level availability, coverage and latency from the central-angle laws.
//!
//! A route of `N_l ≥ 2` hops has two endpoint hops (type-I law) and `N_l − 2`
//! middle hops (type-II law). Hops are treated as independent, so
//! probabilities multiply and latencies add. A one-hop route is the direct
//! transmitter-receiver link and is deterministic.

use std::f64::consts::PI;

use crate::channel::{conditional_coverage, expected_latency_over_fading, single_hop_latency_kernel, ChannelParams};
use crate::error::{Error, QuadratureError, Result};
use crate::quadrature::{self, Tolerance};
use crate::sphere::{alpha1, Alpha2Mode, CentralAngleLaw, ConstellationGeometry, LawKind};

/// Floor on the coverage probability inside ARQ retry weights.
pub const ARQ_COVERAGE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteSpec {
    pub geometry: ConstellationGeometry,
    pub channel: ChannelParams,
    pub total_angle_rad: f64,
    pub num_hops: u32,
    pub alpha2_mode: Alpha2Mode,
}

impl RouteSpec {
    pub fn new(
        geometry: ConstellationGeometry,
        channel: ChannelParams,
        total_angle_rad: f64,
        num_hops: u32,
        alpha2_mode: Alpha2Mode,
    ) -> Result<Self> {
        let spec = RouteSpec {
            geometry,
            channel,
            total_angle_rad,
            num_hops,
            alpha2_mode,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        if !(self.total_angle_rad > 0.0 && self.total_angle_rad <= PI) {
            return Err(Error::invalid(
                "total_angle",
                format!("must lie in (0, π], got {}", self.total_angle_rad),
            ));
        }
        if self.num_hops == 0 {
            return Err(Error::invalid("num_hops", "must be at least 1"));
        }
        Ok(())
    }

    pub fn ideal_hop_angle_rad(&self) -> f64 {
        self.total_angle_rad / self.num_hops as f64
    }

    pub fn ideal_hop_chord_m(&self) -> f64 {
        self.geometry.chord_for_angle(self.ideal_hop_angle_rad())
    }

    pub fn with_num_hops(&self, num_hops: u32) -> Self {
        RouteSpec { num_hops, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricSource {
    Analytic,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricErrors {
    pub availability: f64,
    pub routing_coverage: f64,
    pub avail_and_coverage: f64,
    pub t_tx_s: f64,
    pub t_arq_s: f64,
}

/// Route metrics. Empirical reports carry one measured latency per kind in
/// the `*_exact_s` fields and leave the approximations as NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub num_hops: u32,
    pub availability: f64,
    pub routing_coverage: f64,
    pub avail_and_coverage: f64,
    pub t_tx_exact_s: f64,
    pub t_tx_approx_s: f64,
    pub t_arq_exact_s: f64,
    pub t_arq_approx_s: f64,
    pub source: MetricSource,
    pub std_errors: Option<MetricErrors>,
}

/// A route specification with its central-angle laws built once.
#[derive(Debug, Clone, Copy)]
pub struct RouteAnalysis {
    spec: RouteSpec,
    endpoint: Option<CentralAngleLaw>,
    middle: Option<CentralAngleLaw>,
}

impl RouteAnalysis {
    pub fn new(spec: &RouteSpec) -> Result<Self> {
        spec.validate()?;
        if spec.num_hops == 1 {
            return Ok(RouteAnalysis {
                spec: *spec,
                endpoint: None,
                middle: None,
            });
        }
        let a1 = alpha1(&spec.geometry, spec.ideal_hop_angle_rad())?;
        Ok(Self::with_alpha1(spec, a1))
    }

    /// Uses a given endpoint scaling factor instead of integrating it.
    pub fn with_alpha1(spec: &RouteSpec, alpha1: f64) -> Self {
        let h = spec.ideal_hop_angle_rad();
        let law = |kind| CentralAngleLaw::with_alpha1(kind, spec.geometry, h, alpha1, spec.alpha2_mode);
        RouteAnalysis {
            spec: *spec,
            endpoint: (spec.num_hops >= 2).then(|| law(LawKind::TypeI)),
            middle: (spec.num_hops >= 3).then(|| law(LawKind::TypeII)),
        }
    }

    pub fn spec(&self) -> &RouteSpec {
        &self.spec
    }

    /// Endpoint scaling factor, or NaN for a direct link.
    pub fn alpha1(&self) -> f64 {
        self.endpoint.map_or(f64::NAN, |l| l.alpha1())
    }

    fn theta_max(&self) -> f64 {
        self.spec.geometry.max_hop_angle_rad()
    }

    fn chord(&self, angle: f64) -> f64 {
        self.spec.geometry.chord_for_angle(angle)
    }

    fn direct_angle(&self) -> f64 {
        self.spec.total_angle_rad
    }

    fn product(&self, endpoint: f64, middle: f64) -> f64 {
        let n = self.spec.num_hops as i32;
        (endpoint * endpoint * middle.powi(n - 2)).clamp(0.0, 1.0)
    }

    fn sum(&self, endpoint: f64, middle: f64) -> f64 {
        2.0 * endpoint + (self.spec.num_hops as f64 - 2.0) * middle
    }

    /// `(E_I[g], E_II[g])` over `[0, upper]`; the middle term is zero without middle hops.
    fn per_hop<G>(&self, g: G, upper: f64, tol: Tolerance) -> Result<(f64, f64)>
    where
        G: Fn(f64) -> std::result::Result<f64, QuadratureError>,
    {
        let endpoint = self.endpoint.expect("multi-hop route has endpoint law");
        let e = endpoint.try_expect(&g, upper, tol)?;
        let m = match &self.middle {
            Some(law) => law.try_expect(&g, upper, tol)?,
            None => 0.0,
        };
        Ok((e, m))
    }

    fn probability<G>(&self, g: G, upper: f64) -> Result<f64>
    where
        G: Fn(f64) -> f64,
    {
        let (e, m) = self.per_hop(|t| Ok(g(t)), upper, quadrature::PROBABILITY)?;
        Ok(self.product(e, m))
    }

    fn latency<G>(&self, g: G, upper: f64) -> Result<f64>
    where
        G: Fn(f64) -> std::result::Result<f64, QuadratureError>,
    {
        let (e, m) = self.per_hop(g, upper, quadrature::LATENCY)?;
        Ok(self.sum(e, m))
    }

    /// Probability that every hop clears the Earth.
    pub fn availability(&self) -> Result<f64> {
        let tm = self.theta_max();
        if self.spec.num_hops == 1 {
            return Ok(if self.direct_angle() <= tm { 1.0 } else { 0.0 });
        }
        let f1 = self.endpoint.unwrap().cdf(tm)?;
        let f2 = match &self.middle {
            Some(law) => law.cdf(tm)?,
            None => 1.0,
        };
        Ok(self.product(f1, f2))
    }

    fn coverage_up_to(&self, upper: f64) -> Result<f64> {
        let ch = self.spec.channel;
        if self.spec.num_hops == 1 {
            let a = self.direct_angle();
            return Ok(if a <= upper {
                conditional_coverage(&ch, self.chord(a))
            } else {
                0.0
            });
        }
        self.probability(|t| conditional_coverage(&ch, self.chord(t)), upper)
    }

    /// Probability that every hop meets the SNR threshold, ignoring blockage.
    pub fn routing_coverage(&self) -> Result<f64> {
        self.coverage_up_to(PI)
    }

    /// Probability that every hop is both available and covered.
    pub fn avail_and_coverage(&self) -> Result<f64> {
        self.coverage_up_to(self.theta_max())
    }

    fn exact_hop_latency(&self, angle: f64) -> std::result::Result<f64, QuadratureError> {
        let ch = &self.spec.channel;
        Ok(ch.non_outage_probability() * expected_latency_over_fading(ch, self.chord(angle))?)
    }

    fn arq_weight(&self, angle: f64) -> f64 {
        1.0 / conditional_coverage(&self.spec.channel, self.chord(angle)).max(ARQ_COVERAGE_FLOOR)
    }

    /// Mean end-to-end transmission latency, averaging over fading.
    pub fn t_tx_exact(&self) -> Result<f64> {
        if self.spec.num_hops == 1 {
            return Ok(self.exact_hop_latency(self.direct_angle())?);
        }
        self.latency(|t| self.exact_hop_latency(t), PI)
    }

    /// Transmission latency with each hop evaluated at the mean fading gain.
    pub fn t_tx_approx(&self) -> Result<f64> {
        let ch = self.spec.channel;
        if self.spec.num_hops == 1 {
            return Ok(single_hop_latency_kernel(&ch, self.chord(self.direct_angle())));
        }
        self.latency(|t| Ok(single_hop_latency_kernel(&ch, self.chord(t))), PI)
    }

    /// ARQ latency: the exact hop latency weighted by the mean retry count,
    /// restricted to available hops.
    pub fn t_arq_exact(&self) -> Result<f64> {
        let tm = self.theta_max();
        if self.spec.num_hops == 1 {
            let a = self.direct_angle();
            return Ok(if a <= tm {
                self.exact_hop_latency(a)? * self.arq_weight(a)
            } else {
                0.0
            });
        }
        self.latency(|t| Ok(self.exact_hop_latency(t)? * self.arq_weight(t)), tm)
    }

    /// ARQ latency with each hop evaluated at the mean fading gain.
    pub fn t_arq_approx(&self) -> Result<f64> {
        let ch = self.spec.channel;
        let tm = self.theta_max();
        let g = |a: f64| single_hop_latency_kernel(&ch, self.chord(a)) * self.arq_weight(a);
        if self.spec.num_hops == 1 {
            let a = self.direct_angle();
            return Ok(if a <= tm { g(a) } else { 0.0 });
        }
        self.latency(|t| Ok(g(t)), tm)
    }

    /// All metrics that need no fading-averaged latency.
    pub fn report_without_exact(&self) -> Result<MetricsReport> {
        Ok(MetricsReport {
            num_hops: self.spec.num_hops,
            availability: self.availability()?,
            routing_coverage: self.routing_coverage()?,
            avail_and_coverage: self.avail_and_coverage()?,
            t_tx_exact_s: f64::NAN,
            t_tx_approx_s: self.t_tx_approx()?,
            t_arq_exact_s: f64::NAN,
            t_arq_approx_s: self.t_arq_approx()?,
            source: MetricSource::Analytic,
            std_errors: None,
        })
    }

    pub fn report(&self) -> Result<MetricsReport> {
        let mut r = self.report_without_exact()?;
        r.t_tx_exact_s = self.t_tx_exact()?;
        r.t_arq_exact_s = self.t_arq_exact()?;
        Ok(r)
    }
}

pub fn availability(spec: &RouteSpec) -> Result<f64> {
    RouteAnalysis::new(spec)?.availability()
}

pub fn routing_coverage(spec: &RouteSpec) -> Result<f64> {
    RouteAnalysis::new(spec)?.routing_coverage()
}

pub fn avail_and_coverage(spec: &RouteSpec) -> Result<f64> {
    RouteAnalysis::new(spec)?.avail_and_coverage()
}

pub fn t_tx_exact(spec: &RouteSpec) -> Result<f64> {
    RouteAnalysis::new(spec)?.t_tx_exact()
}

pub fn t_tx_approx(spec: &RouteSpec) -> Result<f64> {
    RouteAnalysis::new(spec)?.t_tx_approx()
}

pub fn t_arq_exact(spec: &RouteSpec) -> Result<f64> {
    RouteAnalysis::new(spec)?.t_arq_exact()
}

pub fn t_arq_approx(spec: &RouteSpec) -> Result<f64> {
    RouteAnalysis::new(spec)?.t_arq_approx()
}

/// Every analytic metric for `spec`, sharing one scaling-factor evaluation.
pub fn evaluate(spec: &RouteSpec) -> Result<MetricsReport> {
    RouteAnalysis::new(spec)?.report()
}
