//! Seeded Monte-Carlo experiment harness: orientation sweeps, depth
//! sweeps, CCP-constancy measurements, and estimator comparisons over a
//! declarative experiment plan.

use serde::{Deserialize, Serialize};

use crate::alford::alford_estimate;
use crate::dcpd;
use crate::dcpoe::{estimate_orientation, ContrastMode};
use crate::error::{GprError, Result};
use crate::model::{angle_error, periodic_error, Frame, PolarimetricScan, SurveyGrid, TargetModel};
use crate::preprocess::mean_subtract;
use crate::simulate::{ground_truth_window, synthesize_scan, ClutterSpec, Scene, WaveletSpec};

/// Estimators an experiment plan may run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    #[serde(rename = "dcpoe")]
    Dcpoe,
    #[serde(rename = "alford")]
    Alford,
}

/// Target parameters shared by every cell of a plan; depth and
/// orientation come from the sweep lists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanTarget {
    pub x0_m: f64,
    pub reflection_sign: i8,
    pub amplitude: f64,
}

impl Default for PlanTarget {
    fn default() -> Self {
        PlanTarget { x0_m: 0.5, reflection_sign: -1, amplitude: 1.0 }
    }
}

/// The default desk-scale grid: 0.01 ns × 0.01 m sampling, 512 × 101
/// cells, sand-like medium.
pub fn default_grid() -> SurveyGrid {
    SurveyGrid { dt_ns: 0.01, dx_m: 0.01, n_samples: 512, n_traces: 101, epsilon_r: 3.0 }
}

fn default_theta_list() -> Vec<f64> {
    vec![0.0, 20.0, 40.0, 60.0, 80.0, 90.0, 100.0, 120.0, 140.0, 160.0]
}

fn default_depth_list() -> Vec<f64> {
    vec![0.03, 0.21]
}

fn default_n_seeds() -> usize {
    20
}

fn default_th() -> f64 {
    0.8
}

fn default_trace_threshold() -> f64 {
    0.5
}

fn default_contrast() -> ContrastMode {
    ContrastMode::TargetDenser
}

fn default_estimators() -> Vec<Estimator> {
    vec![Estimator::Dcpoe]
}

/// Declarative description of an experiment matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    #[serde(default = "default_theta_list")]
    pub theta_list_deg: Vec<f64>,
    #[serde(default = "default_depth_list")]
    pub depth_list_m: Vec<f64>,
    #[serde(default = "default_n_seeds")]
    pub n_seeds: usize,
    #[serde(default = "default_grid")]
    pub grid: SurveyGrid,
    #[serde(default)]
    pub wavelet: WaveletSpec,
    #[serde(default)]
    pub clutter: ClutterSpec,
    #[serde(default)]
    pub target: PlanTarget,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<Estimator>,
    #[serde(default = "default_th")]
    pub th: f64,
    #[serde(default = "default_trace_threshold")]
    pub trace_threshold: f64,
    #[serde(default = "default_contrast")]
    pub contrast: ContrastMode,
    #[serde(default)]
    pub attenuation_np_per_m: f64,
    #[serde(default)]
    pub theta_jitter_deg: f64,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            theta_list_deg: default_theta_list(),
            depth_list_m: default_depth_list(),
            n_seeds: default_n_seeds(),
            grid: default_grid(),
            wavelet: WaveletSpec::default(),
            clutter: ClutterSpec::default(),
            target: PlanTarget::default(),
            estimators: default_estimators(),
            th: default_th(),
            trace_threshold: default_trace_threshold(),
            contrast: default_contrast(),
            attenuation_np_per_m: 0.0,
            theta_jitter_deg: 0.0,
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.theta_list_deg.is_empty() || self.depth_list_m.is_empty() {
            return Err(GprError::Config("theta and depth lists must be nonempty".into()));
        }
        if self.theta_list_deg.iter().any(|&t| !(0.0..180.0).contains(&t)) {
            return Err(GprError::Config("every theta must lie in [0, 180)".into()));
        }
        if self.depth_list_m.iter().any(|&d| !(d > 0.0)) {
            return Err(GprError::Config("every depth must be positive".into()));
        }
        if self.n_seeds < 1 {
            return Err(GprError::Config("n_seeds must be >= 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(GprError::Config("the estimator set must be nonempty".into()));
        }
        Ok(())
    }

    /// The scene of one plan cell.
    pub fn scene(&self, theta_deg: f64, depth_m: f64, seed_index: usize) -> Scene {
        let mut clutter = self.clutter;
        clutter.seed = self.clutter.seed.wrapping_add(seed_index as u64);
        Scene {
            target: TargetModel {
                x0_m: self.target.x0_m,
                depth_m,
                theta_deg,
                reflection_sign: self.target.reflection_sign,
                amplitude: self.target.amplitude,
            },
            grid: self.grid,
            wavelet: self.wavelet,
            clutter,
            attenuation_np_per_m: self.attenuation_np_per_m,
            theta_jitter_deg: self.theta_jitter_deg,
        }
    }
}

/// One (θ, depth, seed) cell of a result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub theta_deg: f64,
    pub depth_m: f64,
    pub seed_index: usize,
    pub ccp_peak: Option<f64>,
    pub theta_dcpoe_deg: Option<f64>,
    pub err_dcpoe_deg: Option<f64>,
    pub theta_alford_deg: Option<f64>,
    pub err_alford_deg: Option<f64>,
    /// "ok" or the failure message; a failed cell never aborts the run.
    pub status: String,
}

/// Mean/max aggregates of one (θ, depth) pair over its seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub theta_deg: f64,
    pub depth_m: f64,
    pub n_ok: usize,
    pub mean_ccp_peak: Option<f64>,
    pub mean_err_dcpoe_deg: Option<f64>,
    pub max_err_dcpoe_deg: Option<f64>,
    pub mean_err_alford_deg: Option<f64>,
    pub max_err_alford_deg: Option<f64>,
}

/// Full result of a plan run: per-seed rows plus per-(θ, depth) summary,
/// both in plan order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<CellResult>,
    pub summary: Vec<SummaryRow>,
}

fn run_cell(plan: &ExperimentPlan, scene: &Scene) -> Result<(f64, Option<f64>, Option<f64>)> {
    let scan1 = synthesize_scan(scene, Frame::I)?;
    let scan2 = synthesize_scan(scene, Frame::II)?;
    let hv1 = mean_subtract(&scan1.hv, None)?;
    let hv2 = mean_subtract(&scan2.hv, None)?;
    let ccp_peak = dcpd::ccp(&hv1, &hv2)?.max_abs();

    let theta_dcpoe = if plan.estimators.contains(&Estimator::Dcpoe) {
        Some(estimate_orientation(&hv1, &hv2, plan.th, plan.contrast)?.theta_cal_deg)
    } else {
        None
    };
    let theta_alford = if plan.estimators.contains(&Estimator::Alford) {
        let triple = PolarimetricScan::new(
            Frame::I,
            mean_subtract(&scan1.hh, None)?,
            hv1,
            mean_subtract(&scan1.vv, None)?,
        )?;
        let window = ground_truth_window(scene)?;
        Some(alford_estimate(&triple, plan.trace_threshold, Some(&window))?.theta_cal_deg)
    } else {
        None
    };
    Ok((ccp_peak, theta_dcpoe, theta_alford))
}

/// Run the full experiment matrix. Deterministic for a fixed plan: the
/// cell order is (θ outer, depth, seed inner) and every random stream is
/// keyed by the plan's base seed plus the seed index.
pub fn run_plan(plan: &ExperimentPlan) -> Result<ResultTable> {
    plan.validate()?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &theta in &plan.theta_list_deg {
        for &depth in &plan.depth_list_m {
            let mut ccp_peaks = Vec::new();
            let mut errs_d = Vec::new();
            let mut errs_a = Vec::new();
            let mut n_ok = 0;
            for seed_index in 0..plan.n_seeds {
                let scene = plan.scene(theta, depth, seed_index);
                match run_cell(plan, &scene) {
                    Ok((ccp_peak, theta_d, theta_a)) => {
                        n_ok += 1;
                        ccp_peaks.push(ccp_peak);
                        let err_d = match theta_d {
                            Some(t) => {
                                let e = angle_error(t, theta)?;
                                errs_d.push(e);
                                Some(e)
                            }
                            None => None,
                        };
                        let err_a = match theta_a {
                            Some(t) => {
                                let e = periodic_error(t, theta, 90.0)?;
                                errs_a.push(e);
                                Some(e)
                            }
                            None => None,
                        };
                        rows.push(CellResult {
                            theta_deg: theta,
                            depth_m: depth,
                            seed_index,
                            ccp_peak: Some(ccp_peak),
                            theta_dcpoe_deg: theta_d,
                            err_dcpoe_deg: err_d,
                            theta_alford_deg: theta_a,
                            err_alford_deg: err_a,
                            status: "ok".into(),
                        });
                    }
                    Err(e) => rows.push(CellResult {
                        theta_deg: theta,
                        depth_m: depth,
                        seed_index,
                        ccp_peak: None,
                        theta_dcpoe_deg: None,
                        err_dcpoe_deg: None,
                        theta_alford_deg: None,
                        err_alford_deg: None,
                        status: e.to_string(),
                    }),
                }
            }
            let mean = |v: &[f64]| {
                if v.is_empty() {
                    None
                } else {
                    Some(v.iter().sum::<f64>() / v.len() as f64)
                }
            };
            let max = |v: &[f64]| v.iter().cloned().reduce(f64::max);
            summary.push(SummaryRow {
                theta_deg: theta,
                depth_m: depth,
                n_ok,
                mean_ccp_peak: mean(&ccp_peaks),
                mean_err_dcpoe_deg: mean(&errs_d),
                max_err_dcpoe_deg: max(&errs_d),
                mean_err_alford_deg: mean(&errs_a),
                max_err_alford_deg: max(&errs_a),
            });
        }
    }
    Ok(ResultTable { rows, summary })
}

/// Relative spread `(max − min) / mean` of the per-orientation mean CCP
/// peaks at one depth.
pub fn ccp_constancy(table: &ResultTable, depth_m: f64) -> Result<f64> {
    let peaks: Vec<f64> = table
        .summary
        .iter()
        .filter(|r| r.depth_m == depth_m)
        .filter_map(|r| r.mean_ccp_peak)
        .collect();
    if peaks.len() < 2 {
        return Err(GprError::Config(format!(
            "need at least two orientation cells at depth {depth_m}, found {}",
            peaks.len()
        )));
    }
    let max = peaks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = peaks.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = peaks.iter().sum::<f64>() / peaks.len() as f64;
    Ok((max - min) / mean)
}
