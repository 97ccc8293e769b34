//! `gprpol`: command-line front end for the polarimetric GPR toolkit.
//!
//! Every JSON report carries the format version, the full effective
//! configuration, and SHA-256 digests of its input files, so any result
//! can be re-derived from the report alone.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::Serialize;

use gprpol::alford::alford_estimate;
use gprpol::dcpd::{ccp, detect, Detection};
use gprpol::dcpoe::{estimate_orientation, threshold_sweep, ContrastMode, SweepPoint};
use gprpol::evaluate::{run_plan, ExperimentPlan};
use gprpol::io::{
    atomic_write, read_scan, sha256_hex, write_scan, ScanFilePair, FORMAT_VERSION,
};
use gprpol::preprocess::{mean_subtract, svd_remove_largest, TargetWindow};
use gprpol::simulate::{apex_trace, ground_truth_window, synthesize_scan, travel_time, Scene};
use gprpol::{Bscan, Frame, GprError, PolarimetricScan, Result};

#[derive(Parser)]
#[command(name = "gprpol", version, about = "Polarimetric GPR simulation, detection, and orientation estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize both antenna frames of a scene into CSV+JSON scan pairs.
    Simulate(SimulateArgs),
    /// Suppress background clutter in one scan.
    Preprocess(PreprocessArgs),
    /// Combine the two cross-polarized scans into a CCP scan.
    Ccp(CcpArgs),
    /// Run the detection rule on a CCP scan.
    Detect(DetectArgs),
    /// Estimate the target azimuth from the dual-frame cross-pol pair.
    Estimate(EstimateArgs),
    /// Alford-rotation baseline estimate from a frame-I triple.
    Alford(AlfordArgs),
    /// Sweep the selection threshold and score each estimate.
    Sweep(SweepArgs),
    /// Run a Monte-Carlo experiment plan.
    Plan(PlanArgs),
    /// Re-export a scan as a plain dense CSV grid for external plotting.
    ExportHeatmap(ExportHeatmapArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scene description (JSON).
    scene: PathBuf,
    /// Output directory for the six scan pairs and truth.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Override the seed in the scene file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Input scan stem (reads stem.csv + stem.json).
    input: PathBuf,
    /// Output scan stem.
    output: PathBuf,
    /// mean: subtract the average trace; svd: remove leading singular values.
    #[arg(long, value_parser = ["mean", "svd"])]
    method: String,
    /// Reference background scan stem (mean method only).
    #[arg(long)]
    background: Option<PathBuf>,
    /// Number of leading singular values to remove (svd method only).
    #[arg(long, default_value_t = 1)]
    k: usize,
}

#[derive(Args)]
struct CcpArgs {
    /// Frame-I HV scan stem.
    s1: PathBuf,
    /// Frame-II HV scan stem.
    s2: PathBuf,
    /// Output CCP scan stem.
    output: PathBuf,
    /// Integer trace shift applied to the frame-II scan before combining
    /// (positive moves traces toward higher indices; vacated traces are
    /// zero-filled).
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    shift: i64,
}

#[derive(Args)]
struct DetectArgs {
    /// CCP scan stem.
    input: PathBuf,
    /// Detection threshold in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Report output path (JSON); stdout if omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Frame-I HV scan stem.
    s1: PathBuf,
    /// Frame-II HV scan stem.
    s2: PathBuf,
    /// Selection threshold TH in (0, 1) on the normalized CCP.
    #[arg(long, default_value_t = 0.8)]
    th: f64,
    /// Permittivity contrast of the target relative to the medium.
    #[arg(long, default_value = "denser", value_parser = parse_contrast)]
    contrast: ContrastMode,
    /// Report output path (JSON); stdout if omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Optional CSV export of the per-sample angle map (unmasked = nan).
    #[arg(long)]
    angle_map: Option<PathBuf>,
}

#[derive(Args)]
struct AlfordArgs {
    /// Frame-I HH scan stem.
    #[arg(long)]
    hh: PathBuf,
    /// Frame-I HV scan stem.
    #[arg(long)]
    hv: PathBuf,
    /// Frame-I VV scan stem.
    #[arg(long)]
    vv: PathBuf,
    /// Selection threshold in (0, 1) on the normalized |HH + VV|.
    #[arg(long, default_value_t = 0.5)]
    trace_threshold: f64,
    /// Restrict selection to a window "t_lo,t_hi,x_lo,x_hi" (hi exclusive).
    #[arg(long, value_parser = parse_window)]
    window: Option<TargetWindow>,
    /// Report output path (JSON); stdout if omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Frame-I HV scan stem.
    s1: PathBuf,
    /// Frame-II HV scan stem.
    s2: PathBuf,
    /// Comma-separated list of TH values.
    #[arg(long, default_value = "0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    th_list: String,
    /// Known target azimuth in degrees used for scoring.
    #[arg(long)]
    theta_real: f64,
    /// Permittivity contrast of the target relative to the medium.
    #[arg(long, default_value = "denser", value_parser = parse_contrast)]
    contrast: ContrastMode,
    /// Output CSV path (columns: th, theta_cal_deg, angle_error_deg).
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct PlanArgs {
    /// Experiment plan (JSON).
    plan: PathBuf,
    /// Per-cell results CSV output path.
    #[arg(long)]
    rows: PathBuf,
    /// Summary report JSON output path.
    #[arg(long)]
    summary: PathBuf,
}

#[derive(Args)]
struct ExportHeatmapArgs {
    /// Input scan stem.
    input: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    output: PathBuf,
    /// Scale values so the maximum magnitude is 1.
    #[arg(long)]
    normalize: bool,
}

fn parse_contrast(s: &str) -> std::result::Result<ContrastMode, String> {
    match s {
        "denser" => Ok(ContrastMode::TargetDenser),
        "rarer" => Ok(ContrastMode::TargetRarer),
        other => Err(format!("unknown contrast {other:?} (expected denser or rarer)")),
    }
}

fn parse_window(s: &str) -> std::result::Result<TargetWindow, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err("window must be t_lo,t_hi,x_lo,x_hi".into());
    }
    let mut v = [0usize; 4];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.trim().parse().map_err(|_| format!("not an index: {p:?}"))?;
    }
    TargetWindow::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

fn digest_pair(pair: &ScanFilePair) -> Result<Vec<InputDigest>> {
    Ok(vec![
        InputDigest {
            path: pair.data_path.display().to_string(),
            sha256: sha256_hex(&pair.data_path)?,
        },
        InputDigest {
            path: pair.meta_path.display().to_string(),
            sha256: sha256_hex(&pair.meta_path)?,
        },
    ])
}

fn load(stem: &Path) -> Result<(Bscan, ScanFilePair)> {
    let pair = ScanFilePair::from_stem(stem);
    let scan = read_scan(&pair)?;
    Ok((scan, pair))
}

fn emit_report<T: Serialize>(report: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    match path {
        Some(p) => atomic_write(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.scene)?;
    let mut scene: Scene = serde_json::from_str(&text).map_err(|e| GprError::Parse {
        location: args.scene.display().to_string(),
        message: e.to_string(),
    })?;
    if let Some(seed) = args.seed {
        scene.clutter.seed = seed;
    }
    scene.validate()?;

    let mut outputs = Vec::new();
    for frame in [Frame::I, Frame::II] {
        let scan = synthesize_scan(&scene, frame)?;
        let prefix = match frame {
            Frame::I => "i",
            _ => "ii",
        };
        for (suffix, b) in [("hh", &scan.hh), ("hv", &scan.hv), ("vv", &scan.vv)] {
            let pair = ScanFilePair::from_stem(args.out_dir.join(format!("{prefix}_{suffix}")));
            write_scan(b, &pair)?;
            outputs.extend(digest_pair(&pair)?);
        }
    }

    #[derive(Serialize)]
    struct Truth {
        format_version: u32,
        scene: Scene,
        apex_trace: usize,
        apex_time_ns: f64,
        window: TargetWindow,
        outputs: Vec<InputDigest>,
    }
    let truth = Truth {
        format_version: FORMAT_VERSION,
        scene,
        apex_trace: apex_trace(&scene),
        apex_time_ns: travel_time(scene.target.x0_m, &scene.target, &scene.grid),
        window: ground_truth_window(&scene)?,
        outputs,
    };
    emit_report(&truth, Some(&args.out_dir.join("truth.json")))
}

fn cmd_preprocess(args: &PreprocessArgs) -> Result<()> {
    let (scan, _) = load(&args.input)?;
    let out = match args.method.as_str() {
        "mean" => {
            let background = match &args.background {
                Some(stem) => Some(load(stem)?.0),
                None => None,
            };
            mean_subtract(&scan, background.as_ref())?
        }
        "svd" => {
            if args.background.is_some() {
                return Err(GprError::Config("--background applies to --method mean only".into()));
            }
            svd_remove_largest(&scan, args.k)?
        }
        other => return Err(GprError::Config(format!("unknown method {other:?}"))),
    };
    write_scan(&out, &ScanFilePair::from_stem(&args.output))
}

fn shift_traces(b: &Bscan, shift: i64) -> Result<Bscan> {
    if shift == 0 {
        return Ok(b.clone());
    }
    let n = b.data.ncols() as i64;
    if shift.abs() >= n {
        return Err(GprError::Domain(format!(
            "trace shift {shift} empties the {n}-trace scan"
        )));
    }
    let mut out = DMatrix::zeros(b.data.nrows(), b.data.ncols());
    for j in 0..n {
        let src = j - shift;
        if (0..n).contains(&src) {
            out.set_column(j as usize, &b.data.column(src as usize));
        }
    }
    b.with_data(out)
}

fn cmd_ccp(args: &CcpArgs) -> Result<()> {
    let (s1, _) = load(&args.s1)?;
    let (s2, _) = load(&args.s2)?;
    let s2 = shift_traces(&s2, args.shift)?;
    let out = ccp(&s1, &s2)?;
    write_scan(&out, &ScanFilePair::from_stem(&args.output))
}

fn cmd_detect(args: &DetectArgs) -> Result<()> {
    let (scan, pair) = load(&args.input)?;
    let detection = detect(&scan, args.threshold)?;

    #[derive(Serialize)]
    struct Report {
        format_version: u32,
        threshold: f64,
        inputs: Vec<InputDigest>,
        detection: Detection,
    }
    emit_report(
        &Report {
            format_version: FORMAT_VERSION,
            threshold: args.threshold,
            inputs: digest_pair(&pair)?,
            detection,
        },
        args.report.as_deref(),
    )
}

fn cmd_estimate(args: &EstimateArgs) -> Result<()> {
    let (s1, p1) = load(&args.s1)?;
    let (s2, p2) = load(&args.s2)?;
    let est = estimate_orientation(&s1, &s2, args.th, args.contrast)?;
    if let Some(path) = &args.angle_map {
        atomic_write(path, matrix_to_csv(&est.angle_map).as_bytes())?;
    }

    #[derive(Serialize)]
    struct Report {
        format_version: u32,
        th: f64,
        contrast: ContrastMode,
        inputs: Vec<InputDigest>,
        theta_cal_deg: f64,
        theta_base_deg: f64,
        sm1: f64,
        sm2: f64,
        n_selected: usize,
        shift_applied: bool,
        rule_one_zone: bool,
        angle_spread_deg: f64,
    }
    let mut inputs = digest_pair(&p1)?;
    inputs.extend(digest_pair(&p2)?);
    emit_report(
        &Report {
            format_version: FORMAT_VERSION,
            th: args.th,
            contrast: args.contrast,
            inputs,
            theta_cal_deg: est.theta_cal_deg,
            theta_base_deg: est.theta_base_deg,
            sm1: est.sm1,
            sm2: est.sm2,
            n_selected: est.n_selected,
            shift_applied: est.shift_applied,
            rule_one_zone: est.rule_one_zone,
            angle_spread_deg: est.angle_spread_deg,
        },
        args.report.as_deref(),
    )
}

fn cmd_alford(args: &AlfordArgs) -> Result<()> {
    let (hh, ph) = load(&args.hh)?;
    let (hv, pv) = load(&args.hv)?;
    let (vv, pw) = load(&args.vv)?;
    let scan = PolarimetricScan::new(Frame::I, hh, hv, vv)?;
    let est = alford_estimate(&scan, args.trace_threshold, args.window.as_ref())?;

    #[derive(Serialize)]
    struct Report {
        format_version: u32,
        trace_threshold: f64,
        window: Option<TargetWindow>,
        inputs: Vec<InputDigest>,
        theta_cal_deg: f64,
        n_selected: usize,
        angle_spread_deg: f64,
    }
    let mut inputs = digest_pair(&ph)?;
    inputs.extend(digest_pair(&pv)?);
    inputs.extend(digest_pair(&pw)?);
    emit_report(
        &Report {
            format_version: FORMAT_VERSION,
            trace_threshold: args.trace_threshold,
            window: args.window,
            inputs,
            theta_cal_deg: est.theta_cal_deg,
            n_selected: est.n_selected,
            angle_spread_deg: est.angle_spread_deg,
        },
        args.report.as_deref(),
    )
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let th_values: Vec<f64> = args
        .th_list
        .split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| GprError::Config(format!("bad TH value {s:?}")))
        })
        .collect::<Result<_>>()?;
    let (s1, _) = load(&args.s1)?;
    let (s2, _) = load(&args.s2)?;
    let points = threshold_sweep(&s1, &s2, &th_values, args.contrast, args.theta_real)?;

    let mut csv = String::from("th,theta_cal_deg,angle_error_deg\n");
    for SweepPoint { th, theta_cal_deg, angle_error_deg } in points {
        let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        csv.push_str(&format!("{th},{},{}\n", fmt(theta_cal_deg), fmt(angle_error_deg)));
    }
    atomic_write(&args.output, csv.as_bytes())
}

fn cmd_plan(args: &PlanArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.plan)?;
    let plan: ExperimentPlan = serde_json::from_str(&text).map_err(|e| GprError::Parse {
        location: args.plan.display().to_string(),
        message: e.to_string(),
    })?;
    let table = run_plan(&plan)?;

    let mut csv = String::from(
        "theta_deg,depth_m,seed_index,ccp_peak,theta_dcpoe_deg,err_dcpoe_deg,\
         theta_alford_deg,err_alford_deg,status\n",
    );
    for r in &table.rows {
        let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.theta_deg,
            r.depth_m,
            r.seed_index,
            fmt(r.ccp_peak),
            fmt(r.theta_dcpoe_deg),
            fmt(r.err_dcpoe_deg),
            fmt(r.theta_alford_deg),
            fmt(r.err_alford_deg),
            r.status
        ));
    }
    atomic_write(&args.rows, csv.as_bytes())?;

    #[derive(Serialize)]
    struct Summary<'a> {
        format_version: u32,
        plan: &'a ExperimentPlan,
        plan_sha256: String,
        summary: &'a [gprpol::evaluate::SummaryRow],
    }
    emit_report(
        &Summary {
            format_version: FORMAT_VERSION,
            plan: &plan,
            plan_sha256: sha256_hex(&args.plan)?,
            summary: &table.summary,
        },
        Some(&args.summary),
    )
}

fn cmd_export_heatmap(args: &ExportHeatmapArgs) -> Result<()> {
    let (scan, _) = load(&args.input)?;
    let scan = if args.normalize { gprpol::model::normalize_bscan(&scan)? } else { scan };
    atomic_write(&args.output, matrix_to_csv(&scan.data).as_bytes())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Ccp(a) => cmd_ccp(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Alford(a) => cmd_alford(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Plan(a) => cmd_plan(a),
        Command::ExportHeatmap(a) => cmd_export_heatmap(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
