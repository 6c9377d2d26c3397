//! Multi-hop relay routing over satellites scattered uniformly on a sphere.
//!
//! - [`sphere`]: constellation geometry, sampled topologies and the
//!   central-angle laws of relays chosen nearest to ideal positions.
//! - [`channel`]: optical link budget, pointing-error fading and per-hop latency.
//! - [`metrics`]: analytic availability, coverage and latency of a route.
//! - [`planner`]: hop-count searches, nearest-relay routing and greedy baselines.
//! - [`sim`]: Monte Carlo evaluation of routing strategies.

pub mod channel;
pub mod error;
pub mod metrics;
pub mod planner;
pub mod quadrature;
pub mod sim;
pub mod sphere;
pub mod stats;

pub use channel::ChannelParams;
pub use error::{Error, InfeasibleCase, QuadratureError, Result};
pub use metrics::{evaluate, MetricsReport, RouteAnalysis, RouteSpec};
pub use planner::{algorithm1, algorithm2, method2_hop_search, solve_ideal, HopSearchOutcome, RoutePlan};
pub use sim::{EmpiricalReport, SimulationConfig, Simulator, Strategy};
pub use sphere::{Alpha2Mode, CentralAngleLaw, ConstellationGeometry, LawKind, SphericalPoint, Topology};
