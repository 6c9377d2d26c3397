//! Spherical geometry and the binomial point process of relay satellites.
//!
//! Satellites are `N_s` i.i.d. uniform points on a sphere of radius `R_s`.
//! The transmitter sits at the north pole and the receiver at polar angle
//! `Θ` on the zero-azimuth meridian; a route with `N_l` hops aims its relays
//! at the equally spaced points `iΘ/N_l` on that meridian.
//!
//! Everything here is pure and immutable; laws cache their expensive
//! scaling factor at construction.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, QuadratureError, Result};
use crate::quadrature::{self, breakpoints, Tolerance};

/// Log-weight below which the nearest-neighbour density is treated as zero.
/// `e^-60` is far below every tolerance used by the metrics.
const LOG_CUTOFF: f64 = 60.0;

const INNER: Tolerance = Tolerance::new(1e-10, 1e-300);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationGeometry {
    sphere_radius_m: f64,
    earth_radius_m: f64,
    num_satellites: usize,
}

impl ConstellationGeometry {
    pub fn new(sphere_radius_m: f64, earth_radius_m: f64, num_satellites: usize) -> Result<Self> {
        if !(earth_radius_m.is_finite() && earth_radius_m > 0.0) {
            return Err(Error::invalid("earth_radius", "must be positive and finite"));
        }
        if !(sphere_radius_m.is_finite() && sphere_radius_m > earth_radius_m) {
            return Err(Error::invalid(
                "sphere_radius",
                format!("must exceed the earth radius ({earth_radius_m} m), got {sphere_radius_m} m"),
            ));
        }
        if num_satellites == 0 {
            return Err(Error::invalid("num_satellites", "must be at least 1"));
        }
        Ok(ConstellationGeometry {
            sphere_radius_m,
            earth_radius_m,
            num_satellites,
        })
    }

    /// Shell at `altitude_m` above a spherical Earth of radius `earth_radius_m`.
    pub fn from_altitude(altitude_m: f64, earth_radius_m: f64, num_satellites: usize) -> Result<Self> {
        Self::new(earth_radius_m + altitude_m, earth_radius_m, num_satellites)
    }

    pub fn sphere_radius_m(&self) -> f64 {
        self.sphere_radius_m
    }

    pub fn earth_radius_m(&self) -> f64 {
        self.earth_radius_m
    }

    pub fn altitude_m(&self) -> f64 {
        self.sphere_radius_m - self.earth_radius_m
    }

    pub fn num_satellites(&self) -> usize {
        self.num_satellites
    }

    pub fn with_num_satellites(&self, num_satellites: usize) -> Result<Self> {
        Self::new(self.sphere_radius_m, self.earth_radius_m, num_satellites)
    }

    /// Longest chord that clears the Earth: `2·sqrt(R_s² − R_⊕²)`.
    pub fn max_available_chord_m(&self) -> f64 {
        let (rs, re) = (self.sphere_radius_m, self.earth_radius_m);
        2.0 * ((rs - re) * (rs + re)).sqrt()
    }

    /// Largest central angle of an available hop, `2·asin(sqrt(R_s² − R_⊕²)/R_s)`.
    pub fn max_hop_angle_rad(&self) -> f64 {
        let s = (0.5 * self.max_available_chord_m() / self.sphere_radius_m).min(1.0);
        2.0 * s.asin()
    }

    /// Chord subtending `angle` at the Earth's centre.
    pub fn chord_for_angle(&self, angle: f64) -> f64 {
        2.0 * self.sphere_radius_m * (0.5 * angle).sin()
    }

    /// Inverse of [`Self::chord_for_angle`]; chords beyond the diameter map to π.
    pub fn angle_for_chord(&self, chord_m: f64) -> f64 {
        2.0 * (0.5 * chord_m / self.sphere_radius_m).clamp(0.0, 1.0).asin()
    }
}

/// A point on the satellite sphere; the radius is implied by the geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    pub polar_rad: f64,
    pub azimuth_rad: f64,
}

impl SphericalPoint {
    /// Normalizes into polar ∈ [0, π], azimuth ∈ [0, 2π).
    pub fn new(polar_rad: f64, azimuth_rad: f64) -> Self {
        let mut polar = polar_rad.rem_euclid(2.0 * PI);
        let mut azimuth = azimuth_rad;
        if polar > PI {
            polar = 2.0 * PI - polar;
            azimuth += PI;
        }
        let mut azimuth = azimuth.rem_euclid(2.0 * PI);
        if azimuth >= 2.0 * PI {
            azimuth = 0.0;
        }
        SphericalPoint {
            polar_rad: polar,
            azimuth_rad: azimuth,
        }
    }

    /// Point on the zero-azimuth meridian.
    pub fn on_meridian(polar_rad: f64) -> Self {
        Self::new(polar_rad, 0.0)
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (sp, cp) = self.polar_rad.sin_cos();
        let (sa, ca) = self.azimuth_rad.sin_cos();
        [sp * ca, sp * sa, cp]
    }
}

/// `sin²(β/2)` for the central angle β between two points.
///
/// Algebraically identical to `(1 − cosψ₁cosψ₂ − sinψ₁sinψ₂cos Δφ)/2`, but free
/// of cancellation for nearby points.
pub fn half_angle_sin_sq(p1: &SphericalPoint, p2: &SphericalPoint) -> f64 {
    haversine(p1.polar_rad, p2.polar_rad, p1.azimuth_rad - p2.azimuth_rad)
}

#[inline]
fn haversine(psi1: f64, psi2: f64, dphi: f64) -> f64 {
    let a = (0.5 * (psi1 - psi2)).sin();
    let b = (0.5 * dphi).sin();
    (a * a + psi1.sin() * psi2.sin() * b * b).clamp(0.0, 1.0)
}

/// Euclidean distance between two points of the satellite sphere.
pub fn chord_distance(p1: &SphericalPoint, p2: &SphericalPoint, geometry: &ConstellationGeometry) -> f64 {
    2.0 * geometry.sphere_radius_m * half_angle_sin_sq(p1, p2).sqrt()
}

/// Angle at the Earth's centre between the rays to `p1` and `p2`, in [0, π].
pub fn central_angle(p1: &SphericalPoint, p2: &SphericalPoint) -> f64 {
    2.0 * half_angle_sin_sq(p1, p2).sqrt().min(1.0).asin()
}

/// One realization of the satellite point process.
#[derive(Debug, Clone)]
pub struct Topology {
    geometry: ConstellationGeometry,
    satellites: Vec<SphericalPoint>,
    unit: Vec<[f64; 3]>,
}

impl Topology {
    pub fn from_points(geometry: ConstellationGeometry, satellites: Vec<SphericalPoint>) -> Result<Self> {
        if satellites.len() != geometry.num_satellites() {
            return Err(Error::invalid(
                "satellites",
                format!(
                    "expected {} points, got {}",
                    geometry.num_satellites(),
                    satellites.len()
                ),
            ));
        }
        let unit = satellites.iter().map(SphericalPoint::unit_vector).collect();
        Ok(Topology {
            geometry,
            satellites,
            unit,
        })
    }

    pub fn geometry(&self) -> &ConstellationGeometry {
        &self.geometry
    }

    pub fn satellites(&self) -> &[SphericalPoint] {
        &self.satellites
    }

    pub fn len(&self) -> usize {
        self.satellites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.satellites.is_empty()
    }

    pub(crate) fn unit_vectors(&self) -> &[[f64; 3]] {
        &self.unit
    }

    /// Index of the satellite closest to `target`; ties go to the lowest index.
    pub fn nearest(&self, target: &SphericalPoint) -> usize {
        let t = target.unit_vector();
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, u) in self.unit.iter().enumerate() {
            let d = dist_sq(u, &t);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

#[inline]
pub(crate) fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Draw `N_s` i.i.d. uniform points on the sphere.
///
/// Uses inverse-CDF sampling, `ψ = acos(1 − 2u)` and `φ = 2πv`, so the
/// realization is a deterministic function of `seed`.
pub fn sample_topology(geometry: &ConstellationGeometry, seed: u64) -> Topology {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let satellites = (0..geometry.num_satellites())
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            SphericalPoint::new((1.0 - 2.0 * u).clamp(-1.0, 1.0).acos(), 2.0 * PI * v)
        })
        .collect();
    Topology::from_points(*geometry, satellites).expect("sampled point count matches geometry")
}

/// `(N−1)·ln((1+cos β)/2)` written through `sin²(β/2)`.
#[inline]
fn log_void_weight(n_minus_one: f64, half_sin_sq: f64) -> f64 {
    if n_minus_one == 0.0 {
        0.0
    } else {
        n_minus_one * (-half_sin_sq).ln_1p()
    }
}

/// Angular radius beyond which the nearest-neighbour density is negligible.
fn nn_cutoff_angle(num_satellites: usize) -> f64 {
    if num_satellites <= 1 {
        return PI;
    }
    let s2 = -(-LOG_CUTOFF / (num_satellites as f64 - 1.0)).exp_m1();
    2.0 * s2.sqrt().min(1.0).asin()
}

/// CDF of the polar angle of the nearest satellite to a reference point:
/// `1 − ((1+cos θ)/2)^{N_s}`.
pub fn nn_polar_cdf(geometry: &ConstellationGeometry, theta: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    if theta >= PI {
        return 1.0;
    }
    let s = (0.5 * theta).sin();
    let n = geometry.num_satellites() as f64;
    -(n * (-s * s).ln_1p()).exp_m1()
}

/// Density of [`nn_polar_cdf`]: `(N_s sin θ / 2)·((1+cos θ)/2)^{N_s−1}`.
pub fn nn_polar_pdf(geometry: &ConstellationGeometry, theta: f64) -> f64 {
    if !(0.0..=PI).contains(&theta) {
        return 0.0;
    }
    let n = geometry.num_satellites() as f64;
    let s = (0.5 * theta).sin();
    0.5 * n * theta.sin() * log_void_weight(n - 1.0, s * s).exp()
}

/// Which middle-hop scaling estimate to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Alpha2Mode {
    /// `2α₁ − 1`
    #[default]
    Additive,
    /// `α₁²`
    Multiplicative,
}

impl std::str::FromStr for Alpha2Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "additive" => Ok(Alpha2Mode::Additive),
            "multiplicative" => Ok(Alpha2Mode::Multiplicative),
            other => Err(format!(
                "unknown alpha2 mode `{other}` (expected additive or multiplicative)"
            )),
        }
    }
}

/// Distance scaling factor of an endpoint hop.
///
/// Mean chord from the reference point at `(hop_angle, 0)` to the nearest
/// satellite of the pole, divided by the ideal chord `2R_s sin(hop_angle/2)`.
/// The azimuth of the nearest neighbour is uniform, which reduces the inner
/// integral to `[0, π]`.
pub fn alpha1(geometry: &ConstellationGeometry, hop_angle: f64) -> Result<f64> {
    if !(hop_angle > 0.0 && hop_angle <= PI) {
        return Err(Error::invalid(
            "hop_angle",
            format!("must lie in (0, π], got {hop_angle}"),
        ));
    }
    let n = geometry.num_satellites();
    let cutoff = nn_cutoff_angle(n);
    let typical = (2.0 / n as f64).sqrt().min(cutoff);
    let pts = breakpoints(0.0, cutoff, &[typical, hop_angle]);
    let sh = hop_angle.sin();
    let mean_half_sin = quadrature::try_integrate_pts(
        |xi| {
            let w = nn_polar_pdf(geometry, xi);
            if w == 0.0 {
                return Ok(0.0);
            }
            let a = (0.5 * (xi - hop_angle)).sin();
            let a2 = a * a;
            let b = xi.sin() * sh;
            let inner = quadrature::integrate(
                |phi| {
                    let s = (0.5 * phi).sin();
                    (a2 + b * s * s).max(0.0).sqrt()
                },
                0.0,
                PI,
                INNER,
            )?;
            Ok(w * inner / PI)
        },
        &pts,
        quadrature::PROBABILITY,
    )?;
    Ok(mean_half_sin / (0.5 * hop_angle).sin())
}

/// Middle-hop scaling factor estimated from the endpoint factor.
pub fn alpha2(alpha1_value: f64, mode: Alpha2Mode) -> f64 {
    match mode {
        Alpha2Mode::Additive => 2.0 * alpha1_value - 1.0,
        Alpha2Mode::Multiplicative => alpha1_value * alpha1_value,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawKind {
    /// Endpoint hop: fixed endpoint to the nearest neighbour of an ideal relay position.
    TypeI,
    /// Middle hop: between the nearest neighbours of two consecutive ideal positions.
    TypeII,
}

/// Distribution of a single hop's central angle under nearest-relay matching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralAngleLaw {
    kind: LawKind,
    geometry: ConstellationGeometry,
    ideal_hop_angle_rad: f64,
    alpha1: f64,
    alpha2_mode: Alpha2Mode,
}

impl CentralAngleLaw {
    /// Builds the law and evaluates `α^{(1)}(hop_angle)` once.
    pub fn new(
        kind: LawKind,
        geometry: ConstellationGeometry,
        ideal_hop_angle_rad: f64,
        alpha2_mode: Alpha2Mode,
    ) -> Result<Self> {
        let a1 = alpha1(&geometry, ideal_hop_angle_rad)?;
        Ok(Self::with_alpha1(kind, geometry, ideal_hop_angle_rad, a1, alpha2_mode))
    }

    /// Builds the law from an already computed (or injected) `α^{(1)}`.
    pub fn with_alpha1(
        kind: LawKind,
        geometry: ConstellationGeometry,
        ideal_hop_angle_rad: f64,
        alpha1: f64,
        alpha2_mode: Alpha2Mode,
    ) -> Self {
        CentralAngleLaw {
            kind,
            geometry,
            ideal_hop_angle_rad,
            alpha1,
            alpha2_mode,
        }
    }

    /// The pair of laws for a route of `num_hops` equal ideal hops spanning `total_angle`.
    pub fn pair_for_route(
        geometry: ConstellationGeometry,
        total_angle: f64,
        num_hops: u32,
        alpha2_mode: Alpha2Mode,
    ) -> Result<(Self, Self)> {
        let h = total_angle / num_hops as f64;
        let a1 = alpha1(&geometry, h)?;
        Ok((
            Self::with_alpha1(LawKind::TypeI, geometry, h, a1, alpha2_mode),
            Self::with_alpha1(LawKind::TypeII, geometry, h, a1, alpha2_mode),
        ))
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn geometry(&self) -> &ConstellationGeometry {
        &self.geometry
    }

    pub fn ideal_hop_angle_rad(&self) -> f64 {
        self.ideal_hop_angle_rad
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        alpha2(self.alpha1, self.alpha2_mode)
    }

    pub fn alpha2_mode(&self) -> Alpha2Mode {
        self.alpha2_mode
    }

    fn type1_support(&self) -> (f64, f64) {
        let cut = nn_cutoff_angle(self.geometry.num_satellites());
        let h = self.ideal_hop_angle_rad;
        ((h - cut).max(0.0), (h + cut).min(PI))
    }

    fn type1_breaks(&self, upper: f64) -> Vec<f64> {
        let (lo, hi) = self.type1_support();
        let hi = hi.min(upper);
        if hi <= lo {
            return vec![lo, lo];
        }
        let h = self.ideal_hop_angle_rad;
        let w = (2.0 / self.geometry.num_satellites() as f64).sqrt();
        breakpoints(lo, hi, &[h - 3.0 * w, h - w, h, h + w, h + 3.0 * w])
    }

    /// Type-I density: the azimuth integral of the nearest-neighbour
    /// location density around the ideal relay position.
    fn type1_pdf(&self, theta: f64) -> std::result::Result<f64, QuadratureError> {
        if !(0.0..=PI).contains(&theta) {
            return Ok(0.0);
        }
        let n = self.geometry.num_satellites();
        let nm1 = n as f64 - 1.0;
        let h = self.ideal_hop_angle_rad;
        let st = theta.sin();
        if st == 0.0 {
            return Ok(0.0);
        }
        let a = (0.5 * (theta - h)).sin();
        let hav0 = a * a;
        let b = st * h.sin();
        let log_peak = log_void_weight(nm1, hav0);
        if log_peak < -745.0 {
            return Ok(0.0);
        }
        // Integrate over φ ∈ [0, φ_c] where the weight relative to φ = 0 is above e^{-cutoff}.
        let phi_c = if nm1 == 0.0 || b <= 0.0 {
            PI
        } else {
            let s2 = (1.0 - hav0) * -(-LOG_CUTOFF / nm1).exp_m1() / b;
            if s2 >= 1.0 {
                PI
            } else {
                2.0 * s2.sqrt().asin()
            }
        };
        let rel = quadrature::try_integrate_pts(
            |phi| {
                let s = (0.5 * phi).sin();
                let hav = (hav0 + b * s * s).min(1.0);
                Ok((log_void_weight(nm1, hav) - log_peak).exp())
            },
            &breakpoints(0.0, phi_c, &[0.25 * phi_c]),
            INNER,
        )?;
        Ok(n as f64 * st / (4.0 * PI) * 2.0 * rel * log_peak.exp())
    }

    /// Map a type-II angle back to the type-I angle it is scaled from.
    fn to_type1_angle(self, theta: f64) -> Option<f64> {
        let r = (0.5 * theta).sin() / self.alpha1;
        if r > 1.0 {
            None
        } else {
            Some(2.0 * r.asin())
        }
    }

    fn type1_angle_to_native(self, t: f64) -> f64 {
        2.0 * (self.alpha1 * (0.5 * t).sin()).min(1.0).asin()
    }

    /// CDF at `xi`.
    pub fn cdf(&self, xi: f64) -> Result<f64> {
        if xi <= 0.0 {
            return Ok(0.0);
        }
        match self.kind {
            LawKind::TypeI => {
                if xi >= PI {
                    return Ok(1.0);
                }
                Ok(self.type1_cdf(xi)?)
            }
            LawKind::TypeII => match self.to_type1_angle(xi.min(PI)) {
                None => Ok(1.0),
                Some(t) => Ok(self.type1_cdf(t)?),
            },
        }
    }

    fn type1_cdf(&self, xi: f64) -> std::result::Result<f64, QuadratureError> {
        let pts = self.type1_breaks(xi);
        if pts[0] >= pts[pts.len() - 1] {
            return Ok(if xi >= self.type1_support().1 { 1.0 } else { 0.0 });
        }
        let v = quadrature::try_integrate_pts(|t| self.type1_pdf(t), &pts, quadrature::PROBABILITY)?;
        Ok(v.clamp(0.0, 1.0))
    }

    /// Density at `theta`.
    pub fn pdf(&self, theta: f64) -> Result<f64> {
        if !(0.0..=PI).contains(&theta) {
            return Ok(0.0);
        }
        match self.kind {
            LawKind::TypeI => Ok(self.type1_pdf(theta)?),
            LawKind::TypeII => {
                let a1 = self.alpha1;
                let mut th = theta;
                if a1 < 1.0 {
                    let edge = 2.0 * a1.asin();
                    if th >= edge {
                        return Ok(0.0);
                    }
                    th = th.min(edge * (1.0 - 1e-6));
                }
                let half = 0.5 * th;
                let denom = (a1 * a1 - half.sin().powi(2)).max(0.0).sqrt();
                let Some(t) = self.to_type1_angle(th) else {
                    return Ok(0.0);
                };
                if denom == 0.0 {
                    return Ok(0.0);
                }
                Ok(self.type1_pdf(t)? * half.cos() / denom)
            }
        }
    }

    /// `∫₀^upper f(θ) g(θ) dθ` for this law's density `f`.
    ///
    /// Type-II integrals are carried out in the type-I variable, which
    /// removes the `1/sqrt(α₁² − sin²(θ/2))` singularity of the density.
    pub fn expect<G>(&self, mut g: G, upper: f64, tol: Tolerance) -> Result<f64>
    where
        G: FnMut(f64) -> f64,
    {
        self.try_expect(|t| Ok(g(t)), upper, tol)
    }

    /// [`Self::expect`] for an integrand that may itself fail (e.g. an inner quadrature).
    pub fn try_expect<G>(&self, mut g: G, upper: f64, tol: Tolerance) -> Result<f64>
    where
        G: FnMut(f64) -> std::result::Result<f64, QuadratureError>,
    {
        let upper = upper.min(PI);
        if upper <= 0.0 {
            return Ok(0.0);
        }
        let t_upper = match self.kind {
            LawKind::TypeI => upper,
            LawKind::TypeII => self.to_type1_angle(upper).unwrap_or(PI),
        };
        let pts = self.type1_breaks(t_upper);
        if pts[0] >= pts[pts.len() - 1] {
            return Ok(0.0);
        }
        let kind = self.kind;
        let v = quadrature::try_integrate_pts(
            |t| {
                let f = self.type1_pdf(t)?;
                if f == 0.0 {
                    return Ok(0.0);
                }
                let theta = match kind {
                    LawKind::TypeI => t,
                    LawKind::TypeII => self.type1_angle_to_native(t),
                };
                Ok(f * g(theta)?)
            },
            &pts,
            tol,
        )?;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(n: usize) -> ConstellationGeometry {
        ConstellationGeometry::new(7_371e3, 6_371e3, n).unwrap()
    }

    #[test]
    fn geometry_invariants() {
        assert!(ConstellationGeometry::new(7_371e3, 6_371e3, 0).is_err());
        assert!(ConstellationGeometry::new(6_000e3, 6_371e3, 10).is_err());
        assert!(ConstellationGeometry::new(7_371e3, -1.0, 10).is_err());
        let g = geom(10);
        let lmax = g.max_available_chord_m();
        assert!((lmax - 2.0 * (7_371e3f64.powi(2) - 6_371e3f64.powi(2)).sqrt()).abs() < 1e-6);
        assert!((g.chord_for_angle(g.max_hop_angle_rad()) - lmax).abs() < 1e-6);
        assert!((g.max_hop_angle_rad() - 2.0 * (6_371.0f64 / 7_371.0).acos()).abs() < 1e-12);
    }

    #[test]
    fn chord_examples() {
        let g = geom(1);
        let pole = SphericalPoint::new(0.0, 0.0);
        let anti = SphericalPoint::new(PI, 1.234);
        assert!((chord_distance(&pole, &anti, &g) - 14_742e3).abs() < 1e-6);
        assert_eq!(chord_distance(&pole, &pole, &g), 0.0);
        let a = SphericalPoint::new(PI / 2.0, 0.0);
        let b = SphericalPoint::new(PI / 2.0, PI / 2.0);
        assert!((chord_distance(&a, &b, &g) - 7_371e3 * 2f64.sqrt()).abs() < 1e-6);
        assert!((central_angle(&a, &b) - PI / 2.0).abs() < 1e-15);
        assert!((central_angle(&pole, &SphericalPoint::on_meridian(0.7)) - 0.7).abs() < 1e-15);
        assert_eq!(central_angle(&a, &a), 0.0);
    }

    #[test]
    fn chord_matches_cosine_form() {
        let g = geom(1);
        let p1 = SphericalPoint::new(0.4, 1.1);
        let p2 = SphericalPoint::new(2.2, 5.0);
        let rs = g.sphere_radius_m();
        let direct = (2.0
            * rs
            * rs
            * (1.0
                - p1.polar_rad.cos() * p2.polar_rad.cos()
                - p1.polar_rad.sin() * p2.polar_rad.sin() * (p1.azimuth_rad - p2.azimuth_rad).cos()))
        .sqrt();
        assert!((chord_distance(&p1, &p2, &g) - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn point_normalization() {
        let p = SphericalPoint::new(-0.3, 7.0);
        assert!((p.polar_rad - 0.3).abs() < 1e-15);
        assert!((0.0..2.0 * PI).contains(&p.azimuth_rad));
        let q = SphericalPoint::new(0.3, 7.0 - 2.0 * PI + PI);
        assert!((central_angle(&p, &q)).abs() < 1e-12);
    }

    #[test]
    fn topology_is_seed_deterministic() {
        let g = geom(100);
        let a = sample_topology(&g, 7);
        let b = sample_topology(&g, 7);
        let c = sample_topology(&g, 8);
        assert_eq!(a.satellites(), b.satellites());
        assert_ne!(a.satellites(), c.satellites());
        assert_eq!(a.len(), 100);
    }

    #[test]
    fn nn_law_endpoints_and_single_point() {
        let g1 = geom(1);
        assert!((nn_polar_cdf(&g1, PI / 2.0) - 0.5).abs() < 1e-15);
        assert_eq!(nn_polar_cdf(&g1, PI), 1.0);
        assert_eq!(nn_polar_cdf(&g1, 0.0), 0.0);
        assert!((nn_polar_pdf(&g1, PI / 2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn nn_cdf_has_no_premature_underflow() {
        let g = geom(100_000);
        // Mass near the typical nearest-neighbour angle stays resolvable.
        let v = nn_polar_cdf(&g, 0.005);
        assert!(v > 0.4 && v < 0.6, "{v}");
        assert!(nn_polar_pdf(&g, 0.005) > 1.0);
    }

    #[test]
    fn alpha2_identities() {
        assert_eq!(alpha2(1.0, Alpha2Mode::Additive), 1.0);
        assert_eq!(alpha2(1.0, Alpha2Mode::Multiplicative), 1.0);
        assert!((alpha2(1.01, Alpha2Mode::Additive) - 1.02).abs() < 1e-15);
        assert!((alpha2(1.01, Alpha2Mode::Multiplicative) - 1.0201).abs() < 1e-15);
        let d = alpha2(1.01, Alpha2Mode::Multiplicative) - alpha2(1.01, Alpha2Mode::Additive);
        assert!((d - 1e-4).abs() < 1e-15);
    }

    #[test]
    fn alpha1_rejects_zero_angle() {
        assert!(alpha1(&geom(10), 0.0).is_err());
    }

    #[test]
    fn alpha1_single_uniform_point_below_one() {
        // Mean chord to a uniform point is 4R/3, shorter than the quarter-circle chord.
        let a = alpha1(&geom(1), PI / 2.0).unwrap();
        let expected = (4.0 / 3.0) / 2f64.sqrt();
        assert!((a - expected).abs() < 1e-8, "{a} vs {expected}");
    }

    #[test]
    fn alpha1_large_constellation_is_near_one() {
        let a = alpha1(&geom(1_000_000), PI / 10.0).unwrap();
        assert!((1.0..=1.01).contains(&a), "{a}");
    }

    #[test]
    fn type2_clamp_boundary() {
        // α₁ < 1 exposes the clamp: CDF is 1 once sin(ξ/2) ≥ α₁.
        let g = geom(50);
        let law = CentralAngleLaw::with_alpha1(LawKind::TypeII, g, 0.4, 0.9, Alpha2Mode::Additive);
        let edge = 2.0 * 0.9f64.asin();
        assert_eq!(law.cdf(edge + 1e-9).unwrap(), 1.0);
        assert_eq!(law.pdf(edge + 1e-9).unwrap(), 0.0);
        assert!(law.pdf(edge * (1.0 - 1e-9)).unwrap().is_finite());
    }

    #[test]
    fn type1_with_zero_hop_is_nn_law() {
        let g = geom(40);
        let law = CentralAngleLaw::with_alpha1(LawKind::TypeI, g, 0.0, 1.0, Alpha2Mode::Additive);
        for &t in &[0.05, 0.2, 0.4] {
            let a = law.pdf(t).unwrap();
            let b = nn_polar_pdf(&g, t);
            assert!((a - b).abs() < 1e-9 * b.max(1e-12), "{t}: {a} vs {b}");
        }
    }
}
