//! Dual-cross-polarized orientation estimation: per-sample angle
//! computation from the cross-pol ratio, thresholded averaging, and 90°
//! ambiguity resolution for both permittivity-contrast signs.
//!
//! The per-sample angle is `½·arctan(s1/s2)` shifted into `[0, 90)`. The
//! masked angles are averaged on the 90°-periodic circle (mean direction
//! of 4θ): at orientations near 0° or 90° the weak channel's sign is pure
//! noise and the shifted angles straddle the 0/90 wrap, so an arithmetic
//! mean would collapse toward 45°. The circular mean coincides with the
//! arithmetic mean whenever the angles share a branch, which covers the
//! noise-free case exactly.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dcpd;
use crate::error::{GprError, Result};
use crate::model::{angle_error, periodic_error, Bscan, OrientationEstimate};

/// Which side of the permittivity contrast the target sits on; selects
/// the variant of the ambiguity rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContrastMode {
    /// Target permittivity greater than the medium's (reflection sign −1).
    #[serde(rename = "denser")]
    TargetDenser,
    /// Target permittivity smaller than the medium's (reflection sign +1).
    #[serde(rename = "rarer")]
    TargetRarer,
}

impl std::fmt::Display for ContrastMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ContrastMode::TargetDenser => f.write_str("denser"),
            ContrastMode::TargetRarer => f.write_str("rarer"),
        }
    }
}

/// `½·arctan(s1/s2)` in degrees, shifted into `[0, 90)`.
///
/// `s2 = 0` resolves to 45° (the arctan(±∞) limit); `(0, 0)` is
/// undefined and must be pre-filtered by the CCP mask.
pub fn per_sample_angle(s1: f64, s2: f64) -> Result<f64> {
    if s1 == 0.0 && s2 == 0.0 {
        return Err(GprError::Domain("angle undefined for a (0, 0) sample".into()));
    }
    if s2 == 0.0 {
        return Ok(45.0);
    }
    let mut a = 0.5 * (s1 / s2).atan().to_degrees();
    if a < 0.0 {
        a += 90.0;
    }
    Ok(a)
}

/// Mean of angles on the 90°-periodic circle, in `[0, 90)`.
///
/// Falls back to the arithmetic mean if the resultant vanishes.
fn circular_mean_90(angles: &[f64]) -> f64 {
    let mut c = 0.0;
    let mut s = 0.0;
    for &a in angles {
        let r = (4.0 * a).to_radians();
        c += r.cos();
        s += r.sin();
    }
    if c == 0.0 && s == 0.0 {
        let m = angles.iter().sum::<f64>() / angles.len() as f64;
        return m.rem_euclid(90.0);
    }
    let mut m = s.atan2(c).to_degrees() / 4.0;
    if m < 0.0 {
        m += 90.0;
    }
    if m >= 90.0 {
        m -= 90.0;
    }
    m
}

/// Run the full orientation estimation on the two aligned cross-pol
/// scans.
///
/// 1. CCP, normalized by its maximum; mask = samples above `th`.
/// 2. Per-sample angles over the mask, averaged to `theta_base ∈ [0, 90)`.
/// 3. `sm1`/`sm2` = signed values of `s1`/`s2` at their own max-magnitude
///    masked samples.
/// 4. Ambiguity rules: in `TargetDenser` mode add 90° when
///    `theta_base < 45°` and the larger-magnitude of {sm1, sm2} is
///    positive (Rule 1), or when `theta_base ≥ 45°` and `sm1 > sm2`
///    (Rule 2, signed comparison). `TargetRarer` flips both tests.
pub fn estimate_orientation(
    s1: &Bscan,
    s2: &Bscan,
    th: f64,
    contrast: ContrastMode,
) -> Result<OrientationEstimate> {
    if !(th > 0.0 && th < 1.0) {
        return Err(GprError::Domain(format!("TH must lie in (0, 1), got {th}")));
    }
    let ccp = dcpd::ccp(s1, s2)?;
    let ccp_max = ccp.max_abs();
    if ccp_max == 0.0 {
        return Err(GprError::NoSignal("both cross-pol scans are identically zero".into()));
    }

    let (n_samples, n_traces) = (ccp.data.nrows(), ccp.data.ncols());
    let mut mask = DMatrix::from_element(n_samples, n_traces, false);
    let mut angle_map = DMatrix::from_element(n_samples, n_traces, f64::NAN);
    let mut angles = Vec::new();
    let mut sm1 = 0.0f64;
    let mut sm2 = 0.0f64;
    // Row-major traversal fixes the summation and tie-break order.
    for i in 0..n_samples {
        for j in 0..n_traces {
            // Comparison in multiplied form keeps the mask exactly
            // invariant under power-of-two rescaling of both inputs.
            if ccp.data[(i, j)] > th * ccp_max {
                mask[(i, j)] = true;
                let a = per_sample_angle(s1.data[(i, j)], s2.data[(i, j)])?;
                angle_map[(i, j)] = a;
                angles.push(a);
                if s1.data[(i, j)].abs() > sm1.abs() {
                    sm1 = s1.data[(i, j)];
                }
                if s2.data[(i, j)].abs() > sm2.abs() {
                    sm2 = s2.data[(i, j)];
                }
            }
        }
    }
    if angles.is_empty() {
        return Err(GprError::NoSignal(format!(
            "no sample has normalized CCP above TH = {th}"
        )));
    }

    let theta_base = circular_mean_90(&angles);
    let n_selected = angles.len();
    let angle_spread = angles
        .iter()
        .map(|&a| periodic_error(a, theta_base, 90.0).expect("finite"))
        .sum::<f64>()
        / n_selected as f64;

    let rule_one_zone = theta_base < 45.0;
    let shift_applied = if rule_one_zone {
        // Algorithm line 19 compares magnitudes to pick the robust value.
        let max_value = if sm1.abs() > sm2.abs() { sm1 } else { sm2 };
        match contrast {
            ContrastMode::TargetDenser => max_value > 0.0,
            ContrastMode::TargetRarer => max_value < 0.0,
        }
    } else {
        match contrast {
            ContrastMode::TargetDenser => sm1 > sm2,
            ContrastMode::TargetRarer => sm1 < sm2,
        }
    };
    let theta_cal = if shift_applied { theta_base + 90.0 } else { theta_base };

    Ok(OrientationEstimate {
        theta_cal_deg: theta_cal,
        theta_base_deg: theta_base,
        angle_map,
        mask,
        sm1,
        sm2,
        n_selected,
        shift_applied,
        rule_one_zone,
        angle_spread_deg: angle_spread,
    })
}

/// One entry of a threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub th: f64,
    pub theta_cal_deg: Option<f64>,
    /// `None` flags a TH whose mask came up empty.
    pub angle_error_deg: Option<f64>,
}

/// Run `estimate_orientation` at each threshold and score against the
/// known orientation. Empty-mask thresholds are flagged, not fatal.
pub fn threshold_sweep(
    s1: &Bscan,
    s2: &Bscan,
    th_values: &[f64],
    contrast: ContrastMode,
    theta_real_deg: f64,
) -> Result<Vec<SweepPoint>> {
    if th_values.is_empty() {
        return Err(GprError::Config("th_values must be nonempty".into()));
    }
    let mut out = Vec::with_capacity(th_values.len());
    for &th in th_values {
        match estimate_orientation(s1, s2, th, contrast) {
            Ok(est) => out.push(SweepPoint {
                th,
                theta_cal_deg: Some(est.theta_cal_deg),
                angle_error_deg: Some(angle_error(est.theta_cal_deg, theta_real_deg)?),
            }),
            Err(GprError::NoSignal(_)) => {
                out.push(SweepPoint { th, theta_cal_deg: None, angle_error_deg: None })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
