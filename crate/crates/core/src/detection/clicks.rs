use std::fmt::{self, Write as _};

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::detection::config::{DetectionConfig, WaveplateMode};
use crate::dynamics::{trajectory_rng, EmissionRecord};
use crate::error::DetectionError;
use crate::model::hamiltonian::Channel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Detector {
    D1,
    D2,
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detector::D1 => "D1",
            Detector::D2 => "D2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Click {
    pub time: f64,
    pub detector: Detector,
    /// False for dark counts.
    pub photon: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClickRecord {
    clicks: Vec<Click>,
}

impl ClickRecord {
    /// Sorts by time; ties keep input order.
    pub fn new(mut clicks: Vec<Click>) -> Self {
        clicks.sort_by(|a, b| a.time.total_cmp(&b.time));
        Self { clicks }
    }

    pub fn clicks(&self) -> &[Click] {
        &self.clicks
    }

    pub fn len(&self) -> usize {
        self.clicks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clicks.is_empty()
    }

    pub fn times(&self, detector: Detector) -> Vec<f64> {
        self.clicks
            .iter()
            .filter(|c| c.detector == detector)
            .map(|c| c.time)
            .collect()
    }

    pub fn count(&self, detector: Detector) -> usize {
        self.clicks.iter().filter(|c| c.detector == detector).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("time_s,detector\n");
        for c in &self.clicks {
            let _ = writeln!(s, "{:e},{}", c.time, c.detector);
        }
        s
    }
}

/// Passes output-mirror emissions through the fiber routing, detector
/// thinning and a 50:50 beamsplitter, and adds Poisson dark counts on
/// [window.0, window.1]. Other channels are ignored.
pub fn detect(
    emissions: &EmissionRecord,
    config: &DetectionConfig,
    window: (f64, f64),
    seed: u64,
) -> Result<ClickRecord, DetectionError> {
    config.validate()?;
    let (t0, t1) = window;
    if !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(DetectionError::InvalidParameter {
            name: "window",
            reason: format!("[{t0}, {t1}] is not an interval"),
        });
    }
    let mut rng = trajectory_rng(seed, 0);
    let mut clicks = Vec::new();
    for e in emissions.outputs() {
        let long = match config.waveplate_mode {
            WaveplateMode::Polarizing => e.channel == Channel::OutputMinus,
            WaveplateMode::Balanced => rng.gen_bool(0.5),
        };
        if long && !config.long_fiber_open {
            continue;
        }
        if !rng.gen_bool(config.detector_efficiency) {
            continue;
        }
        let detector = if rng.gen_bool(0.5) { Detector::D1 } else { Detector::D2 };
        let time = if long { e.time + config.delay_long } else { e.time };
        clicks.push(Click {
            time,
            detector,
            photon: true,
        });
    }
    let mean = config.dark_rate * (t1 - t0);
    if mean > 0.0 {
        let poisson = Poisson::new(mean).expect("positive mean");
        for detector in [Detector::D1, Detector::D2] {
            let n = poisson.sample(&mut rng) as usize;
            for _ in 0..n {
                clicks.push(Click {
                    time: t0 + rng.gen::<f64>() * (t1 - t0),
                    detector,
                    photon: false,
                });
            }
        }
    }
    Ok(ClickRecord::new(clicks))
}
