//! Synthetic dual-frame polarimetric B-scans of a thin elongated
//! scatterer plus configurable antenna coupling, ground-surface clutter,
//! and seeded noise.
//!
//! The scattered amplitudes follow the ideal rotated scattering matrix of
//! an elongated object: frame I sees `(cos²θ, ½sin2θ, sin²θ)` scaled by
//! the reflection sign, frame II the same triple with θ shifted by 45°
//! (its cross-pol term reduces to `½cos2θ`). Travel time is the usual
//! two-way hyperbola in a single effective medium.
//!
//! Determinism contract: every random stream is derived from
//! `(seed, frame, channel, trace, purpose)`, so identical seeds reproduce
//! bitwise regardless of evaluation order or worker count.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{GprError, Result};
use crate::model::{cos_deg, sin_deg, Bscan, Channel, Frame, PolarimetricScan, SurveyGrid, TargetModel};
use crate::preprocess::TargetWindow;

/// Two-way delay of the (trace-constant) antenna direct-coupling return, ns.
pub const COUPLING_DELAY_NS: f64 = 0.15;
/// Range at which the 1/r spreading loss equals one, m. Chosen as the
/// shallow bench-test burial so a unit-amplitude target at 3 cm returns a
/// unit apex pulse; deeper targets return strictly weaker apex pulses.
pub const SPREADING_REFERENCE_M: f64 = 0.03;
/// Nominal two-way delay of the flat ground-surface return, ns.
pub const SURFACE_DELAY_NS: f64 = 0.5;

/// Transmit pulse surrogate. The band center of a 0.4–4.0 GHz antenna
/// puts the default Ricker at 2.0 GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveletSpec {
    pub center_frequency_ghz: f64,
}

impl Default for WaveletSpec {
    fn default() -> Self {
        WaveletSpec { center_frequency_ghz: 2.0 }
    }
}

impl WaveletSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.center_frequency_ghz > 0.0) || !self.center_frequency_ghz.is_finite() {
            return Err(GprError::Domain(format!(
                "center_frequency_ghz must be positive, got {}",
                self.center_frequency_ghz
            )));
        }
        Ok(())
    }

    /// Half-width of the pulse support in ns; the Ricker amplitude at this
    /// offset is below f64 resolution of the peak.
    pub fn half_support_ns(&self) -> f64 {
        2.0 / self.center_frequency_ghz
    }
}

/// Antenna coupling, ground-surface clutter, and noise configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClutterSpec {
    /// Amplitude of the trace-constant direct-coupling return.
    pub coupling_amplitude: f64,
    /// Amplitude of the flat ground-surface return.
    pub surface_amplitude: f64,
    /// One scalar controls the per-trace surface jitter: delay jitter
    /// ~ N(0, roughness_std·dt) and multiplicative amplitude jitter
    /// ~ N(1, roughness_std).
    pub roughness_std: f64,
    /// Additive white Gaussian noise, every channel.
    pub noise_std: f64,
    /// Fraction of the coupling/surface terms leaking into the cross-pol
    /// channel (finite port isolation).
    pub cross_pol_leakage: f64,
    /// Seed for all random streams.
    pub seed: u64,
}

impl Default for ClutterSpec {
    fn default() -> Self {
        ClutterSpec {
            coupling_amplitude: 0.0,
            surface_amplitude: 0.0,
            roughness_std: 0.0,
            noise_std: 0.0,
            cross_pol_leakage: 0.02,
            seed: 0,
        }
    }
}

impl ClutterSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("coupling_amplitude", self.coupling_amplitude),
            ("surface_amplitude", self.surface_amplitude),
            ("roughness_std", self.roughness_std),
            ("noise_std", self.noise_std),
            ("cross_pol_leakage", self.cross_pol_leakage),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(GprError::Domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Full scene description: one elongated target in one medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub target: TargetModel,
    pub grid: SurveyGrid,
    #[serde(default)]
    pub wavelet: WaveletSpec,
    #[serde(default)]
    pub clutter: ClutterSpec,
    /// Scalar exponential attenuation, nepers per meter of two-way path.
    #[serde(default)]
    pub attenuation_np_per_m: f64,
    /// Per-trace uniform orientation perturbation half-width in degrees;
    /// approximates a small root curvature without geometric modeling.
    #[serde(default)]
    pub theta_jitter_deg: f64,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        self.target.validate()?;
        self.grid.validate()?;
        self.wavelet.validate()?;
        self.clutter.validate()?;
        if !(self.attenuation_np_per_m >= 0.0) || !self.attenuation_np_per_m.is_finite() {
            return Err(GprError::Domain(format!(
                "attenuation_np_per_m must be >= 0, got {}",
                self.attenuation_np_per_m
            )));
        }
        if !(self.theta_jitter_deg >= 0.0) || !self.theta_jitter_deg.is_finite() {
            return Err(GprError::Domain(format!(
                "theta_jitter_deg must be >= 0, got {}",
                self.theta_jitter_deg
            )));
        }
        Ok(())
    }
}

/// Scattered amplitude triple of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterTriple {
    pub hh: f64,
    pub hv: f64,
    pub vv: f64,
}

/// Ideal scattering amplitudes of a thin elongated object at azimuth
/// `theta` (degrees) seen by the given frame, scaled by the reflection
/// sign.
pub fn scattering_amplitudes(theta_deg: f64, frame: Frame, reflection_sign: i8) -> ScatterTriple {
    let s = reflection_sign as f64;
    match frame {
        Frame::I | Frame::Both => {
            let c = cos_deg(theta_deg);
            let sn = sin_deg(theta_deg);
            ScatterTriple {
                hh: s * c * c,
                hv: s * 0.5 * sin_deg(2.0 * theta_deg),
                vv: s * sn * sn,
            }
        }
        Frame::II => {
            let c = cos_deg(theta_deg + 45.0);
            let sn = sin_deg(theta_deg + 45.0);
            ScatterTriple {
                hh: s * c * c,
                hv: s * 0.5 * cos_deg(2.0 * theta_deg),
                vv: s * sn * sn,
            }
        }
    }
}

/// Ricker wavelet `(1 − 2π²fc²t²)·exp(−π²fc²t²)`, `t` in ns relative to
/// the pulse center, `fc` in GHz.
pub fn ricker(t_ns: f64, fc_ghz: f64) -> f64 {
    let u = std::f64::consts::PI * fc_ghz * t_ns;
    let u2 = u * u;
    (1.0 - 2.0 * u2) * (-u2).exp()
}

/// Two-way hyperbolic travel time in ns for an antenna at position `x`.
pub fn travel_time(x_m: f64, target: &TargetModel, grid: &SurveyGrid) -> f64 {
    let r = (x_m - target.x0_m).hypot(target.depth_m);
    2.0 * r / grid.velocity_m_per_ns()
}

// Stream identifiers for derived RNGs.
const KIND_NOISE: u64 = 1;
const KIND_SURFACE: u64 = 2;
const KIND_THETA: u64 = 3;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn frame_tag(frame: Frame) -> u64 {
    match frame {
        Frame::I => 1,
        Frame::II => 2,
        Frame::Both => 3,
    }
}

fn channel_tag(channel: Channel) -> u64 {
    match channel {
        Channel::Hh => 1,
        Channel::Hv => 2,
        Channel::Vv => 3,
        Channel::Ccp => 4,
    }
}

/// RNG for one `(seed, frame, channel, trace, purpose)` stream.
fn stream_rng(seed: u64, frame: u64, channel: u64, trace: usize, kind: u64) -> ChaCha8Rng {
    let mut s = splitmix64(seed);
    for tag in [frame, channel, trace as u64, kind] {
        s = splitmix64(s ^ tag);
    }
    ChaCha8Rng::seed_from_u64(s)
}

fn sample_range(t_center_ns: f64, half_support_ns: f64, grid: &SurveyGrid) -> (usize, usize) {
    let lo = ((t_center_ns - half_support_ns) / grid.dt_ns).floor().max(0.0) as usize;
    let hi = (((t_center_ns + half_support_ns) / grid.dt_ns).ceil() as usize + 1).min(grid.n_samples);
    (lo.min(grid.n_samples), hi)
}

/// Generate the {HH, HV, VV} triple of one frame for the given scene.
pub fn synthesize_scan(scene: &Scene, frame: Frame) -> Result<PolarimetricScan> {
    scene.validate()?;
    if frame == Frame::Both {
        return Err(GprError::Config("synthesize one frame at a time".into()));
    }
    let grid = scene.grid;
    let target = &scene.target;
    let fc = scene.wavelet.center_frequency_ghz;
    let half_support = scene.wavelet.half_support_ns();

    if target.x0_m < 0.0 || target.x0_m > grid.line_length_m() {
        return Err(GprError::Config(format!(
            "target x0 {} m is outside the scanned extent [0, {}] m",
            target.x0_m,
            grid.line_length_m()
        )));
    }
    let apex_tt = travel_time(target.x0_m, target, &grid);
    if apex_tt + half_support > grid.time_window_ns() {
        return Err(GprError::Config(format!(
            "apex travel time {apex_tt:.3} ns plus wavelet support {half_support:.3} ns \
             exceeds the {:.3} ns time window",
            grid.time_window_ns()
        )));
    }

    let mut hh = DMatrix::zeros(grid.n_samples, grid.n_traces);
    let mut hv = DMatrix::zeros(grid.n_samples, grid.n_traces);
    let mut vv = DMatrix::zeros(grid.n_samples, grid.n_traces);

    let clutter = &scene.clutter;
    let leak = clutter.cross_pol_leakage;
    let ftag = frame_tag(frame);

    for j in 0..grid.n_traces {
        let x = grid.position_at(j);

        // Target reflection.
        let theta = if scene.theta_jitter_deg > 0.0 {
            // Curvature jitter is a property of the buried object: shared by
            // both frames and all channels, hence frame/channel tags 0.
            let mut rng = stream_rng(clutter.seed, 0, 0, j, KIND_THETA);
            target.theta_deg + rng.gen_range(-scene.theta_jitter_deg..=scene.theta_jitter_deg)
        } else {
            target.theta_deg
        };
        let amps = scattering_amplitudes(theta, frame, target.reflection_sign);
        let tt = travel_time(x, target, &grid);
        let r = (x - target.x0_m).hypot(target.depth_m);
        let geom = SPREADING_REFERENCE_M / r; // 1/r spreading
        let atten = (-scene.attenuation_np_per_m * 2.0 * r).exp();
        let scale = target.amplitude * geom * atten;
        let (i0, i1) = sample_range(tt, half_support, &grid);
        for i in i0..i1 {
            let w = scale * ricker(grid.time_at(i) - tt, fc);
            hh[(i, j)] += amps.hh * w;
            hv[(i, j)] += amps.hv * w;
            vv[(i, j)] += amps.vv * w;
        }

        // Direct coupling: identical on every trace, co-pol at full
        // amplitude, cross-pol at the leakage fraction.
        if clutter.coupling_amplitude > 0.0 {
            let (i0, i1) = sample_range(COUPLING_DELAY_NS, half_support, &grid);
            for i in i0..i1 {
                let w = clutter.coupling_amplitude * ricker(grid.time_at(i) - COUPLING_DELAY_NS, fc);
                hh[(i, j)] += w;
                vv[(i, j)] += w;
                hv[(i, j)] += leak * w;
            }
        }

        // Ground-surface return with per-trace roughness jitter. The
        // surface is one physical interface, so the jitter stream is
        // shared by the three channels of a frame.
        if clutter.surface_amplitude > 0.0 {
            let mut rng = stream_rng(clutter.seed, ftag, 0, j, KIND_SURFACE);
            let (delay_jitter, amp_jitter) = if clutter.roughness_std > 0.0 {
                let delay = Normal::new(0.0, clutter.roughness_std * grid.dt_ns)
                    .expect("roughness_std validated")
                    .sample(&mut rng);
                let amp = Normal::new(1.0, clutter.roughness_std)
                    .expect("roughness_std validated")
                    .sample(&mut rng);
                (delay, amp)
            } else {
                (0.0, 1.0)
            };
            let t_surf = SURFACE_DELAY_NS + delay_jitter;
            let (i0, i1) = sample_range(t_surf, half_support, &grid);
            for i in i0..i1 {
                let w = clutter.surface_amplitude * amp_jitter * ricker(grid.time_at(i) - t_surf, fc);
                hh[(i, j)] += w;
                vv[(i, j)] += w;
                hv[(i, j)] += leak * w;
            }
        }

        // Additive white noise, independent per channel.
        if clutter.noise_std > 0.0 {
            let noise = Normal::new(0.0, clutter.noise_std).expect("noise_std validated");
            for (ch, m) in [
                (Channel::Hh, &mut hh),
                (Channel::Hv, &mut hv),
                (Channel::Vv, &mut vv),
            ] {
                let mut rng = stream_rng(clutter.seed, ftag, channel_tag(ch), j, KIND_NOISE);
                for i in 0..grid.n_samples {
                    m[(i, j)] += noise.sample(&mut rng);
                }
            }
        }
    }

    PolarimetricScan::new(
        frame,
        Bscan::new(grid, Channel::Hh, frame, hh)?,
        Bscan::new(grid, Channel::Hv, frame, hv)?,
        Bscan::new(grid, Channel::Vv, frame, vv)?,
    )
}

/// Ground-truth target window: apex ± wavelet support in time, apex trace
/// ± 5 traces, clamped to the grid.
pub fn ground_truth_window(scene: &Scene) -> Result<TargetWindow> {
    scene.validate()?;
    let grid = &scene.grid;
    let tt = travel_time(scene.target.x0_m, &scene.target, grid);
    let half = scene.wavelet.half_support_ns();
    let t_lo = (((tt - half) / grid.dt_ns).floor().max(0.0)) as usize;
    let t_hi = ((((tt + half) / grid.dt_ns).ceil() as usize) + 1).min(grid.n_samples);
    let apex_trace = (scene.target.x0_m / grid.dx_m).round() as usize;
    let x_lo = apex_trace.saturating_sub(5);
    let x_hi = (apex_trace + 6).min(grid.n_traces);
    TargetWindow::new(t_lo, t_hi.max(t_lo + 1), x_lo, x_hi.max(x_lo + 1))
}

/// Index of the trace closest to the target apex.
pub fn apex_trace(scene: &Scene) -> usize {
    ((scene.target.x0_m / scene.grid.dx_m).round() as usize).min(scene.grid.n_traces - 1)
}
