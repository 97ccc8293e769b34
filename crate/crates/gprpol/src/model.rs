//! Shared domain types and the angle algebra used by every other module.
//!
//! Angles are stored and reported in degrees throughout; radians appear
//! only transiently inside trig evaluation. The reciprocal cross-pol
//! component is never materialized separately: only HV is stored.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GprError, Result};

/// Speed of light in m/ns.
pub const C_M_PER_NS: f64 = 0.299792458;

/// Polarization channel of a B-scan. `Ccp` labels the derived
/// dual-cross-polarized combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    #[serde(rename = "HH")]
    Hh,
    #[serde(rename = "HV")]
    Hv,
    #[serde(rename = "VV")]
    Vv,
    #[serde(rename = "CCP")]
    Ccp,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Channel::Hh => "HH",
            Channel::Hv => "HV",
            Channel::Vv => "VV",
            Channel::Ccp => "CCP",
        };
        f.write_str(s)
    }
}

/// Antenna frame. Frame II is frame I rotated 45° counterclockwise about
/// its center. `Both` labels derived products that combine the frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
    #[serde(rename = "both")]
    Both,
}

impl std::fmt::Display for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Frame::I => "I",
            Frame::II => "II",
            Frame::Both => "both",
        };
        f.write_str(s)
    }
}

/// Sampling geometry of a survey line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyGrid {
    /// Time step in nanoseconds.
    pub dt_ns: f64,
    /// Trace spacing in meters.
    pub dx_m: f64,
    /// Number of time samples per trace.
    pub n_samples: usize,
    /// Number of traces along the line.
    pub n_traces: usize,
    /// Relative permittivity of the medium.
    pub epsilon_r: f64,
}

impl SurveyGrid {
    pub fn new(dt_ns: f64, dx_m: f64, n_samples: usize, n_traces: usize, epsilon_r: f64) -> Result<Self> {
        let grid = SurveyGrid { dt_ns, dx_m, n_samples, n_traces, epsilon_r };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_ns > 0.0) || !self.dt_ns.is_finite() {
            return Err(GprError::Domain(format!("dt_ns must be positive, got {}", self.dt_ns)));
        }
        if !(self.dx_m > 0.0) || !self.dx_m.is_finite() {
            return Err(GprError::Domain(format!("dx_m must be positive, got {}", self.dx_m)));
        }
        if self.n_samples < 2 {
            return Err(GprError::Domain(format!("n_samples must be >= 2, got {}", self.n_samples)));
        }
        if self.n_traces < 2 {
            return Err(GprError::Domain(format!("n_traces must be >= 2, got {}", self.n_traces)));
        }
        if !(self.epsilon_r >= 1.0) || !self.epsilon_r.is_finite() {
            return Err(GprError::Domain(format!("epsilon_r must be >= 1, got {}", self.epsilon_r)));
        }
        Ok(())
    }

    /// Two-way time of sample `i` in ns.
    pub fn time_at(&self, i: usize) -> f64 {
        i as f64 * self.dt_ns
    }

    /// Along-line position of trace `j` in meters.
    pub fn position_at(&self, j: usize) -> f64 {
        j as f64 * self.dx_m
    }

    /// Time of the last sample in ns.
    pub fn time_window_ns(&self) -> f64 {
        (self.n_samples - 1) as f64 * self.dt_ns
    }

    /// Position of the last trace in meters.
    pub fn line_length_m(&self) -> f64 {
        (self.n_traces - 1) as f64 * self.dx_m
    }

    /// Wave speed in the medium in m/ns.
    pub fn velocity_m_per_ns(&self) -> f64 {
        C_M_PER_NS / self.epsilon_r.sqrt()
    }
}

/// A time-samples × traces real-valued B-scan with grid metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Bscan {
    pub grid: SurveyGrid,
    pub channel: Channel,
    pub frame: Frame,
    /// `[n_samples × n_traces]` amplitude matrix, arbitrary linear units.
    pub data: DMatrix<f64>,
}

impl Bscan {
    pub fn new(grid: SurveyGrid, channel: Channel, frame: Frame, data: DMatrix<f64>) -> Result<Self> {
        grid.validate()?;
        if data.nrows() != grid.n_samples || data.ncols() != grid.n_traces {
            return Err(GprError::Dimension(format!(
                "data is {}x{} but grid says {}x{}",
                data.nrows(),
                data.ncols(),
                grid.n_samples,
                grid.n_traces
            )));
        }
        if let Some((i, j)) = first_nonfinite(&data) {
            return Err(GprError::Domain(format!(
                "non-finite value {} at sample {}, trace {}",
                data[(i, j)],
                i,
                j
            )));
        }
        Ok(Bscan { grid, channel, frame, data })
    }

    pub fn zeros(grid: SurveyGrid, channel: Channel, frame: Frame) -> Result<Self> {
        let data = DMatrix::zeros(grid.n_samples, grid.n_traces);
        Bscan::new(grid, channel, frame, data)
    }

    /// Maximum absolute amplitude over the whole scan.
    pub fn max_abs(&self) -> f64 {
        self.data.amax()
    }

    /// Replace the data matrix, keeping grid/channel/frame metadata.
    pub fn with_data(&self, data: DMatrix<f64>) -> Result<Self> {
        Bscan::new(self.grid, self.channel, self.frame, data)
    }
}

fn first_nonfinite(m: &DMatrix<f64>) -> Option<(usize, usize)> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Some((i, j));
            }
        }
    }
    None
}

/// The {HH, HV, VV} triple of one antenna frame over one survey line.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarimetricScan {
    pub frame: Frame,
    pub hh: Bscan,
    pub hv: Bscan,
    pub vv: Bscan,
}

impl PolarimetricScan {
    pub fn new(frame: Frame, hh: Bscan, hv: Bscan, vv: Bscan) -> Result<Self> {
        if frame == Frame::Both {
            return Err(GprError::Config("a polarimetric scan belongs to frame I or II".into()));
        }
        for (b, ch) in [(&hh, Channel::Hh), (&hv, Channel::Hv), (&vv, Channel::Vv)] {
            if b.channel != ch {
                return Err(GprError::Alignment(format!(
                    "field {} holds channel {}",
                    ch, b.channel
                )));
            }
            if b.frame != frame {
                return Err(GprError::Alignment(format!(
                    "channel {} is frame {} but the scan is frame {}",
                    ch, b.frame, frame
                )));
            }
            if b.grid != hh.grid {
                return Err(GprError::Alignment("channels have differing grids".into()));
            }
        }
        Ok(PolarimetricScan { frame, hh, hv, vv })
    }
}

/// Elongated-scatterer parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetModel {
    /// Along-line position in meters.
    pub x0_m: f64,
    /// Burial depth in meters (air gap folded in).
    pub depth_m: f64,
    /// Azimuth angle in degrees, `[0, 180)`, clockwise from the survey line.
    pub theta_deg: f64,
    /// −1 when the target permittivity exceeds the medium's (metal/root in
    /// sand), +1 otherwise.
    pub reflection_sign: i8,
    /// Positive linear scale factor.
    pub amplitude: f64,
}

impl TargetModel {
    pub fn validate(&self) -> Result<()> {
        if !self.x0_m.is_finite() {
            return Err(GprError::Domain("x0_m must be finite".into()));
        }
        if !(self.depth_m > 0.0) || !self.depth_m.is_finite() {
            return Err(GprError::Domain(format!("depth_m must be positive, got {}", self.depth_m)));
        }
        if !self.theta_deg.is_finite() || self.theta_deg < 0.0 || self.theta_deg >= 180.0 {
            return Err(GprError::Domain(format!(
                "theta_deg must lie in [0, 180), got {}",
                self.theta_deg
            )));
        }
        if self.reflection_sign != -1 && self.reflection_sign != 1 {
            return Err(GprError::Domain(format!(
                "reflection_sign must be -1 or +1, got {}",
                self.reflection_sign
            )));
        }
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(GprError::Domain(format!(
                "amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }
}

/// Result of an orientation estimation run (DCPOE or the Alford baseline).
#[derive(Debug, Clone)]
pub struct OrientationEstimate {
    /// Final estimate in degrees, `[0, 180)` for DCPOE, `[0, 90)` for Alford.
    pub theta_cal_deg: f64,
    /// Average of the per-sample angles before ambiguity resolution, `[0, 90)`.
    pub theta_base_deg: f64,
    /// Per-sample angles in degrees; unmasked entries are NaN.
    pub angle_map: DMatrix<f64>,
    /// Samples whose selection metric exceeded the threshold.
    pub mask: DMatrix<bool>,
    /// Signed value of the first input at its own max-magnitude masked sample.
    pub sm1: f64,
    /// Signed value of the second input at its own max-magnitude masked sample.
    pub sm2: f64,
    /// Number of samples used (true count of `mask`).
    pub n_selected: usize,
    /// Whether the 90° shift of the ambiguity rules was applied.
    pub shift_applied: bool,
    /// True when `theta_base < 45°` (Rule 1 zone), false for Rule 2 zone.
    pub rule_one_zone: bool,
    /// Mean absolute deviation of masked angles from `theta_base` on the
    /// 90°-periodic circle; diagnostic only.
    pub angle_spread_deg: f64,
}

/// Smallest separation of two azimuths on the 180°-periodic circle.
///
/// Returns `min(|Δ|, 180 − |Δ|)` with `Δ = (a − b) mod 180`; the result
/// lies in `[0, 90]`.
pub fn angle_error(theta_a_deg: f64, theta_b_deg: f64) -> Result<f64> {
    periodic_error(theta_a_deg, theta_b_deg, 180.0)
}

/// Smallest separation on a circle of the given period in degrees.
pub fn periodic_error(a_deg: f64, b_deg: f64, period_deg: f64) -> Result<f64> {
    if !a_deg.is_finite() || !b_deg.is_finite() {
        return Err(GprError::Domain(format!(
            "angles must be finite, got {} and {}",
            a_deg, b_deg
        )));
    }
    if !(period_deg > 0.0) {
        return Err(GprError::Domain(format!("period must be positive, got {}", period_deg)));
    }
    let d = (a_deg - b_deg).rem_euclid(period_deg);
    Ok(d.min(period_deg - d))
}

/// Scale a scan by the inverse of its maximum absolute value so the
/// output's max magnitude is exactly 1.
pub fn normalize_bscan(b: &Bscan) -> Result<Bscan> {
    let m = b.max_abs();
    if m == 0.0 {
        return Err(GprError::DegenerateInput("cannot normalize an all-zero B-scan".into()));
    }
    b.with_data(b.data.map(|v| v / m))
}

/// Sine of an angle in degrees, exact at multiples of 90°.
///
/// The ideal scattering model has hard zeros at right angles; going
/// through radians would leave ~1e−16 residues whose sign leaks into the
/// ambiguity rules.
pub fn sin_deg(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 || r == 180.0 {
        0.0
    } else if r == 90.0 {
        1.0
    } else if r == 270.0 {
        -1.0
    } else {
        r.to_radians().sin()
    }
}

/// Cosine of an angle in degrees, exact at multiples of 90°.
pub fn cos_deg(deg: f64) -> f64 {
    sin_deg(deg + 90.0)
}
