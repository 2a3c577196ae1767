//! Measurement chain and photon statistics: polarization routing, fiber
//! delay, beamsplitter and lossy detectors; intensity-correlation
//! histograms; two-photon interference visibility.

pub mod clicks;
pub mod config;
pub mod histogram;
pub mod hom;
pub mod scan;

pub use clicks::{detect, Click, ClickRecord, Detector};
pub use config::{DetectionConfig, WaveplateMode};
pub use histogram::{hbt_histogram, CoincidenceHistogram, HistogramTag, PeakSummary};
pub use hom::{
    hom_coincidence_density, hom_visibility, photon_surfaces, visibility, CoincidenceDensity, HomOutcome, PhotonPair,
    RelativePolarization, HOM_GRID_POINTS,
};
pub use scan::{point_seed, visibility_scan, ScanPoint, ScanSettings, ScanTable};
