//! Quantum-jump records and their line-based text form.
//!
//! ```text
//! # polsource emission record v1
//! # columns: time_s channel_label
//! 3.1415e-7 output_plus
//! ```

use std::fmt::Write as _;

use crate::model::hamiltonian::Channel;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Emission {
    pub time: f64,
    pub channel: Channel,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EmissionRecord {
    events: Vec<Emission>,
}

pub const RECORD_HEADER: &str = "# polsource emission record v1\n# columns: time_s channel_label\n";

impl EmissionRecord {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an event; times must increase strictly.
    pub fn push(&mut self, time: f64, channel: Channel) -> Result<(), String> {
        if let Some(last) = self.events.last() {
            if !(time > last.time) {
                return Err(format!("event time {time:e} does not follow {:e}", last.time));
            }
        }
        self.events.push(Emission { time, channel });
        Ok(())
    }

    pub fn events(&self) -> &[Emission] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Emission> {
        self.events.iter()
    }

    /// Output-mirror events only.
    pub fn outputs(&self) -> impl Iterator<Item = &Emission> {
        self.events.iter().filter(|e| e.channel.is_output())
    }

    /// Copy with every time shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            events: self
                .events
                .iter()
                .map(|e| Emission {
                    time: e.time + offset,
                    channel: e.channel,
                })
                .collect(),
        }
    }

    /// Merges records from independent emitters into one time-ordered record.
    /// Ties keep input order.
    pub fn merge<I: IntoIterator<Item = EmissionRecord>>(records: I) -> Self {
        let mut events: Vec<Emission> = records.into_iter().flat_map(|r| r.events).collect();
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Self { events }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from(RECORD_HEADER);
        for e in &self.events {
            let _ = writeln!(s, "{:e} {}", e.time, e.channel);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut events = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(t), Some(c), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(format!("line {}: expected `time_s channel_label`", n + 1));
            };
            let time: f64 = t.parse().map_err(|_| format!("line {}: bad time `{t}`", n + 1))?;
            let channel: Channel = c.parse().map_err(|e| format!("line {}: {e}", n + 1))?;
            if let Some(last) = events.last() {
                let last: &Emission = last;
                if time < last.time {
                    return Err(format!("line {}: times not ordered", n + 1));
                }
            }
            events.push(Emission { time, channel });
        }
        Ok(Self { events })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn push_requires_increasing_times() {
        let mut r = EmissionRecord::new();
        r.push(1.0, Channel::OutputPlus).unwrap();
        assert!(r.push(1.0, Channel::OutputMinus).is_err());
        assert!(r.push(0.5, Channel::OutputMinus).is_err());
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(EmissionRecord::from_text("1e-6\n").is_err());
        assert!(EmissionRecord::from_text("x output_plus\n").is_err());
        assert!(EmissionRecord::from_text("1e-6 photon\n").is_err());
        assert!(EmissionRecord::from_text("2e-6 output_plus\n1e-6 output_plus\n").is_err());
    }

    #[test]
    fn merge_orders_events() {
        let mut a = EmissionRecord::new();
        a.push(1.0, Channel::OutputPlus).unwrap();
        a.push(3.0, Channel::OutputPlus).unwrap();
        let mut b = EmissionRecord::new();
        b.push(2.0, Channel::OutputMinus).unwrap();
        let m = EmissionRecord::merge([a, b]);
        let times: Vec<f64> = m.iter().map(|e| e.time).collect();
        assert_eq!(times, vec![1.0, 2.0, 3.0]);
    }

    proptest! {
        #[test]
        fn text_roundtrip(mut times in proptest::collection::vec(0.0f64..1e-3, 0..40), kinds in proptest::collection::vec(0u16..6, 40)) {
            times.sort_by(f64::total_cmp);
            times.dedup();
            let mut r = EmissionRecord::new();
            for (t, k) in times.iter().zip(&kinds) {
                let ch = match k {
                    0 => Channel::OutputPlus,
                    1 => Channel::OutputMinus,
                    2 => Channel::LossPlus,
                    3 => Channel::LossMinus,
                    n => Channel::Spontaneous { excited: *n, ground: n - 2 },
                };
                r.push(*t, ch).unwrap();
            }
            let back = EmissionRecord::from_text(&r.to_text()).unwrap();
            prop_assert_eq!(back, r);
        }
    }
}
