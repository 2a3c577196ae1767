//! Detection-time difference histograms between the two detectors.

use std::fmt::Write as _;

use serde::Serialize;

use crate::detection::clicks::{ClickRecord, Detector};
use crate::error::DetectionError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramTag {
    Parallel,
    Perpendicular,
    UnpolarizedHbt,
}

/// Counts of τ = t_D2 − t_D1. Bins are centred on multiples of the bin
/// width, so τ = 0 falls in the middle of a bin.
#[derive(Clone, Debug, PartialEq)]
pub struct CoincidenceHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub tag: HistogramTag,
}

impl CoincidenceHistogram {
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Sum of bins whose centre lies in [lo, hi).
    pub fn area(&self, lo: f64, hi: f64) -> u64 {
        self.centers()
            .iter()
            .zip(&self.counts)
            .filter(|(c, _)| **c >= lo && **c < hi)
            .map(|(_, n)| *n)
            .sum()
    }

    /// Peak areas in windows of one period centred on τ = k·period.
    pub fn peaks(&self, period: f64) -> PeakSummary {
        let span = self.edges.last().copied().unwrap_or(0.0);
        // Only peaks whose full window lies inside the histogram.
        let k_max = ((span - 0.5 * period) / period).floor().max(0.0) as i64;
        let area = |k: i64| {
            let c = k as f64 * period;
            self.area(c - 0.5 * period, c + 0.5 * period) as f64
        };
        let center = area(0);
        let nearest = if k_max >= 1 { 0.5 * (area(1) + area(-1)) } else { 0.0 };
        let outer = (2..=k_max)
            .flat_map(|k| [area(k), area(-k)])
            .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));
        PeakSummary {
            center,
            nearest,
            outer,
            center_ratio: (nearest > 0.0).then(|| center / nearest),
            nearest_to_outer: outer.filter(|&o| o > 0.0).map(|o| nearest / o),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_left_s,bin_right_s,count\n");
        for (w, n) in self.edges.windows(2).zip(&self.counts) {
            let _ = writeln!(s, "{:e},{:e},{n}", w[0], w[1]);
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PeakSummary {
    /// Counts in |τ| < period/2.
    pub center: f64,
    /// Mean of the k = ±1 peaks.
    pub nearest: f64,
    /// Largest peak with |k| ≥ 2.
    pub outer: Option<f64>,
    pub center_ratio: Option<f64>,
    pub nearest_to_outer: Option<f64>,
}

/// All D1-D2 time differences within ±tau_max, binned.
pub fn hbt_histogram(
    clicks: &ClickRecord,
    bin_width: f64,
    tau_max: f64,
) -> Result<CoincidenceHistogram, DetectionError> {
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(DetectionError::InvalidParameter {
            name: "bin_width",
            reason: format!("must be > 0, got {bin_width}"),
        });
    }
    if !(tau_max > 0.0) || !tau_max.is_finite() {
        return Err(DetectionError::InvalidParameter {
            name: "tau_max",
            reason: format!("must be > 0, got {tau_max}"),
        });
    }
    let d1 = clicks.times(Detector::D1);
    let d2 = clicks.times(Detector::D2);
    if d1.is_empty() || d2.is_empty() {
        return Ok(CoincidenceHistogram {
            edges: Vec::new(),
            counts: Vec::new(),
            tag: HistogramTag::UnpolarizedHbt,
        });
    }
    let half_bins = (tau_max / bin_width - 0.5).ceil().max(0.0) as i64;
    let n_bins = (2 * half_bins + 1) as usize;
    let lo = -(half_bins as f64 + 0.5) * bin_width;
    let edges: Vec<f64> = (0..=n_bins).map(|k| lo + k as f64 * bin_width).collect();
    let mut counts = vec![0u64; n_bins];
    let mut start = 0;
    for &t1 in &d1 {
        while start < d2.len() && d2[start] - t1 < -tau_max {
            start += 1;
        }
        for &t2 in &d2[start..] {
            let tau = t2 - t1;
            if tau > tau_max {
                break;
            }
            let k = ((tau - lo) / bin_width).floor();
            if k >= 0.0 && (k as usize) < n_bins {
                counts[k as usize] += 1;
            }
        }
    }
    Ok(CoincidenceHistogram {
        edges,
        counts,
        tag: HistogramTag::UnpolarizedHbt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::clicks::Click;

    fn clicks(d1: &[f64], d2: &[f64]) -> ClickRecord {
        let mut v = Vec::new();
        for &t in d1 {
            v.push(Click {
                time: t,
                detector: Detector::D1,
                photon: true,
            });
        }
        for &t in d2 {
            v.push(Click {
                time: t,
                detector: Detector::D2,
                photon: true,
            });
        }
        ClickRecord::new(v)
    }

    #[test]
    fn differences_land_in_centred_bins() {
        let h = hbt_histogram(&clicks(&[1.0], &[1.0, 1.3, 0.8]), 0.1, 0.5).unwrap();
        assert_eq!(h.counts.len(), 11);
        assert_eq!(h.total(), 3);
        assert_eq!(h.counts[5], 1);
        assert_eq!(h.counts[8], 1);
        assert_eq!(h.counts[3], 1);
    }

    #[test]
    fn empty_detector_gives_empty_histogram() {
        let h = hbt_histogram(&clicks(&[1.0], &[]), 0.1, 0.5).unwrap();
        assert!(h.is_empty());
    }

    #[test]
    fn peak_summary_of_pulsed_pattern() {
        // D1 on even periods, D2 on odd: only odd k peaks.
        let t = 1.0;
        let d1: Vec<f64> = (0..50).map(|k| 2.0 * k as f64 * t).collect();
        let d2: Vec<f64> = (0..50).map(|k| (2.0 * k as f64 + 1.0) * t).collect();
        let h = hbt_histogram(&clicks(&d1, &d2), 0.1, 4.0).unwrap();
        let p = h.peaks(t);
        assert_eq!(p.center, 0.0);
        assert!(p.nearest > 0.0);
        // |k| = 3 is the largest outer peak
        assert_eq!(p.outer, Some(h.area(2.5, 3.5).max(h.area(-3.5, -2.5)) as f64));
        assert_eq!(p.center_ratio, Some(0.0));
    }

    #[test]
    fn csv_layout() {
        let h = hbt_histogram(&clicks(&[0.0], &[0.0]), 1.0, 0.4).unwrap();
        assert_eq!(h.to_csv(), "bin_left_s,bin_right_s,count\n-5e-1,5e-1,1\n");
    }
}
