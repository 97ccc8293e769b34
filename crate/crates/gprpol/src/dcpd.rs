//! Dual-cross-polarized detection: the rotationally invariant combined
//! cross-polarized value `CCP = sqrt(S1² + S2²)` and a threshold rule to
//! locate the target.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GprError, Result};
use crate::model::{Bscan, Channel, Frame};

/// Outcome of the detection rule on a CCP scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub detected: bool,
    pub trace_index: Option<usize>,
    pub sample_index: Option<usize>,
    /// Global maximum of the CCP scan.
    pub ccp_peak: f64,
    /// Robust noise-floor estimate used by the rule.
    pub noise_floor: f64,
}

/// Elementwise `sqrt(s1² + s2²)` of the two aligned cross-pol scans.
///
/// `s1` must be the frame-I HV scan and `s2` the frame-II HV scan on the
/// same grid. The output is labeled channel CCP, frame `Both`.
pub fn ccp(s1: &Bscan, s2: &Bscan) -> Result<Bscan> {
    if s1.channel != Channel::Hv || s2.channel != Channel::Hv {
        return Err(GprError::Alignment(format!(
            "CCP combines HV channels, got {} and {}",
            s1.channel, s2.channel
        )));
    }
    if s1.frame != Frame::I || s2.frame != Frame::II {
        return Err(GprError::Alignment(format!(
            "CCP expects frame I then frame II, got {} and {}",
            s1.frame, s2.frame
        )));
    }
    if s1.grid != s2.grid {
        return Err(GprError::Alignment("the two cross-pol scans have differing grids".into()));
    }
    let data = DMatrix::from_fn(s1.data.nrows(), s1.data.ncols(), |i, j| {
        let a = s1.data[(i, j)];
        let b = s2.data[(i, j)];
        (a * a + b * b).sqrt()
    });
    Bscan::new(s1.grid, Channel::Ccp, Frame::Both, data)
}

/// Threshold detection on a nonnegative CCP scan.
///
/// The noise floor is the median of the per-trace maxima after dropping
/// the top decile of traces (which hold the target response). A target is
/// declared when `detect_threshold × global max` exceeds that floor, i.e.
/// the peak must stand at least `1/detect_threshold` above the floor.
/// Ties resolve to the smallest trace index, then the smallest sample
/// index.
pub fn detect(ccp_scan: &Bscan, detect_threshold: f64) -> Result<Detection> {
    if !(detect_threshold > 0.0 && detect_threshold < 1.0) {
        return Err(GprError::Domain(format!(
            "detect_threshold must lie in (0, 1), got {detect_threshold}"
        )));
    }
    if ccp_scan.data.iter().any(|&v| v < 0.0) {
        return Err(GprError::Domain("CCP scan must be nonnegative".into()));
    }

    let (n_samples, n_traces) = (ccp_scan.data.nrows(), ccp_scan.data.ncols());
    let mut global = 0.0f64;
    let mut arg = None;
    let mut per_trace_max = vec![0.0f64; n_traces];
    for j in 0..n_traces {
        for i in 0..n_samples {
            let v = ccp_scan.data[(i, j)];
            per_trace_max[j] = per_trace_max[j].max(v);
            if v > global {
                global = v;
                arg = Some((i, j));
            }
        }
    }
    if global == 0.0 {
        return Ok(Detection {
            detected: false,
            trace_index: None,
            sample_index: None,
            ccp_peak: 0.0,
            noise_floor: 0.0,
        });
    }

    per_trace_max.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let drop = (n_traces as f64 / 10.0).ceil() as usize;
    let kept = &per_trace_max[..n_traces.saturating_sub(drop).max(1)];
    let noise_floor = kept[kept.len() / 2];

    let detected = detect_threshold * global > noise_floor;
    let (sample_index, trace_index) = match arg {
        Some((i, j)) if detected => (Some(i), Some(j)),
        _ => (None, None),
    };
    Ok(Detection { detected, trace_index, sample_index, ccp_peak: global, noise_floor })
}
