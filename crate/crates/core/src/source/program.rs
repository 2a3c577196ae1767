use crate::error::SourceError;
use crate::model::pulse::PumpPulse;

/// Pulses played in order, one per slot of length `period`, the whole list
/// repeated `repetitions` times.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseProgram {
    pub pulses: Vec<PumpPulse>,
    /// Slot length, s. Must be ≥ every pulse's t_p.
    pub period: f64,
    pub repetitions: usize,
}

impl PulseProgram {
    pub fn new(pulses: Vec<PumpPulse>, period: f64, repetitions: usize) -> Result<Self, SourceError> {
        let p = Self {
            pulses,
            period,
            repetitions,
        };
        p.validate()?;
        Ok(p)
    }

    /// ω₊ (Δ_pc = +2Δ_B) then ω₋ (Δ_pc = −2Δ_B), butt-jointed.
    pub fn alternating(omega0: f64, t_p: f64, zeeman: f64, repetitions: usize) -> Self {
        Self {
            pulses: vec![
                PumpPulse::linear(omega0, t_p, 2.0 * zeeman),
                PumpPulse::linear(omega0, t_p, -2.0 * zeeman),
            ],
            period: t_p,
            repetitions,
        }
    }

    pub fn single(pulse: PumpPulse) -> Self {
        Self {
            period: pulse.t_p,
            pulses: vec![pulse],
            repetitions: 1,
        }
    }

    pub fn validate(&self) -> Result<(), SourceError> {
        if self.pulses.is_empty() {
            return Err(SourceError::Program("no pulses".into()));
        }
        if self.repetitions == 0 {
            return Err(SourceError::Program("repetitions must be >= 1".into()));
        }
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(SourceError::Program(format!("period must be > 0, got {}", self.period)));
        }
        for p in &self.pulses {
            p.validate()?;
            if p.t_p > self.period * (1.0 + 1e-12) {
                return Err(SourceError::Program(format!(
                    "pulse length {} exceeds period {}",
                    p.t_p, self.period
                )));
            }
        }
        Ok(())
    }

    /// Total number of slots.
    pub fn len(&self) -> usize {
        self.pulses.len() * self.repetitions
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 * self.period
    }

    pub fn slot_start(&self, slot: usize) -> f64 {
        slot as f64 * self.period
    }

    pub fn pulse(&self, slot: usize) -> &PumpPulse {
        &self.pulses[slot % self.pulses.len()]
    }

    /// Slot containing `t`; the last slot also owns t = duration.
    pub fn slot_of(&self, t: f64) -> Option<usize> {
        if !(t >= 0.0) || t > self.duration() {
            return None;
        }
        Some(((t / self.period).floor() as usize).min(self.len() - 1))
    }

    /// Same program with every pulse's Ω₀ replaced.
    pub fn with_omega0(&self, omega0: f64) -> Self {
        let mut p = self.clone();
        p.pulses.iter_mut().for_each(|x| x.omega0 = omega0);
        p
    }

    /// Same program with every pulse's t_p replaced and the period scaled
    /// to keep the same gap ratio.
    pub fn with_t_p(&self, t_p: f64) -> Self {
        let longest = self.pulses.iter().map(|x| x.t_p).fold(0.0, f64::max);
        let mut p = self.clone();
        p.period = self.period * t_p / longest;
        p.pulses.iter_mut().for_each(|x| x.t_p = t_p);
        p
    }
}

/// Maps global time to pulse-local time for pulse `index` of the list.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SlotClock {
    pub period: f64,
    pub t_p: f64,
    pub n_pulses: usize,
    pub n_slots: usize,
    pub index: usize,
}

impl SlotClock {
    pub fn local(&self, t: f64) -> Option<f64> {
        if t < 0.0 {
            return None;
        }
        let k = (t / self.period).floor();
        let mut slot = k as usize;
        let mut tau = t - k * self.period;
        // The end point of a slot belongs to the pulse that just finished.
        if tau == 0.0 && slot > 0 {
            slot -= 1;
            tau = self.period;
        }
        if slot >= self.n_slots || slot % self.n_pulses != self.index || tau > self.t_p {
            return None;
        }
        Some(tau)
    }
}

impl PulseProgram {
    pub(crate) fn clocks(&self) -> Vec<SlotClock> {
        self.pulses
            .iter()
            .enumerate()
            .map(|(index, p)| SlotClock {
                period: self.period,
                t_p: p.t_p,
                n_pulses: self.pulses.len(),
                n_slots: self.len(),
                index,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_slots() {
        let p = PulseProgram::alternating(1.0, 2.0, 5.0, 3);
        assert_eq!(p.len(), 6);
        assert_eq!(p.duration(), 12.0);
        assert!(p.pulse(0).generates_sigma_plus());
        assert!(!p.pulse(1).generates_sigma_plus());
        assert!(p.pulse(4).generates_sigma_plus());
        assert_eq!(p.slot_of(12.0), Some(5));
        assert_eq!(p.slot_of(12.5), None);
        let clocks = p.clocks();
        assert_eq!(clocks[1].local(3.0), Some(1.0));
        assert_eq!(clocks[0].local(3.0), None);
        assert_eq!(clocks[0].local(2.0), Some(2.0));
        assert_eq!(clocks[1].local(13.0), None);
    }

    #[test]
    fn rejects_overlong_pulse() {
        let mut p = PulseProgram::alternating(1.0, 2.0, 5.0, 1);
        p.period = 1.0;
        assert!(p.validate().is_err());
        p.period = 2.0;
        p.repetitions = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn rescaled_program_keeps_gap_ratio() {
        let mut p = PulseProgram::alternating(1.0, 2.0, 5.0, 1);
        p.period = 3.0;
        let q = p.with_t_p(1.0);
        assert_eq!(q.period, 1.5);
        assert!(q.pulses.iter().all(|x| x.t_p == 1.0));
    }
}
