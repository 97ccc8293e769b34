//! Polarimetric ground-penetrating-radar processing toolkit.
//!
//! The crate covers the full desk-scale pipeline for buried elongated
//! objects:
//!
//! 1. **Simulation** ([`simulate`]) — synthetic dual-frame polarimetric
//!    B-scans of a thin elongated scatterer (hyperbolic travel time,
//!    Ricker wavelet) with configurable antenna coupling, ground-surface
//!    clutter, and seeded noise.
//! 2. **Clutter suppression** ([`preprocess`]) — mean subtraction,
//!    SVD largest-singular-value removal, signal-to-clutter ratio.
//! 3. **Detection** ([`dcpd`]) — the dual-cross-polarized combination
//!    `CCP = sqrt(S1² + S2²)`, rotationally invariant for an ideal
//!    elongated scatterer, plus a robust peak-detection rule.
//! 4. **Orientation estimation** ([`dcpoe`]) — per-sample angle
//!    computation from the cross-pol ratio, thresholded averaging, and
//!    90° ambiguity resolution for both permittivity-contrast signs.
//! 5. **Baseline** ([`alford`]) — the Alford-rotation estimator on a
//!    single frame's full scattering triple, for comparison.
//! 6. **Evaluation** ([`evaluate`]) — seeded Monte-Carlo experiment
//!    harness over orientation/depth sweeps.
//! 7. **I/O** ([`io`]) — bit-exact CSV + JSON sidecar scan files and
//!    report schemas used by the `gprpol` CLI.

pub mod alford;
pub mod dcpd;
pub mod dcpoe;
pub mod error;
pub mod evaluate;
pub mod io;
pub mod model;
pub mod preprocess;
pub mod simulate;

pub use error::{GprError, Result};
pub use model::{Bscan, Channel, Frame, OrientationEstimate, PolarimetricScan, SurveyGrid, TargetModel};
