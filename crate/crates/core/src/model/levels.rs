//! Atomic level schemes for the 5S₁/₂ F=1 ↔ 5P₃/₂ photon-generation
//! transitions of ⁸⁷Rb.
//!
//! Coupling coefficients are signed and normalized to the generation
//! transition |±1⟩ ↔ |F'=1, m=0⟩, which carries unit magnitude. Decay
//! branching ratios are the squared, unnormalized dipole matrix elements
//! (each excited state's branchings sum to one, including decay out of the
//! tracked manifold).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, ModelError};
use crate::model::units::mhz_to_rad;

/// Photon helicity relative to the quantization axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    SigmaPlus,
    SigmaMinus,
    Pi,
}

impl Polarization {
    /// q in m_F(excited) = m_F(ground) + q.
    pub fn helicity(self) -> i32 {
        match self {
            Polarization::SigmaPlus => 1,
            Polarization::SigmaMinus => -1,
            Polarization::Pi => 0,
        }
    }

    pub fn from_helicity(q: i32) -> Option<Self> {
        match q {
            1 => Some(Polarization::SigmaPlus),
            -1 => Some(Polarization::SigmaMinus),
            0 => Some(Polarization::Pi),
            _ => None,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::SigmaPlus => "sigma+",
            Polarization::SigmaMinus => "sigma-",
            Polarization::Pi => "pi",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelKind {
    Ground,
    Excited,
    /// Absorbing bookkeeping level for population leaving F=1.
    Lost,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub label: String,
    pub kind: LevelKind,
    pub f: i32,
    pub mf: i32,
    /// Energy in the cavity-rotating frame, rad/s.
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    pub ground: usize,
    pub excited: usize,
    pub polarization: Polarization,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayChannel {
    pub excited: usize,
    pub ground: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelScheme {
    levels: Vec<Level>,
    couplings: Vec<Coupling>,
    decays: Vec<DecayChannel>,
}

/// Which scheme to construct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// |−1⟩, |0⟩, |+1⟩ and |F'=1, m=0⟩.
    Minimal,
    /// Minimal plus |F'=0, m=0⟩.
    Extended,
}

/// Construction options for the ⁸⁷Rb schemes.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeOptions {
    pub kind: SchemeKind,
    /// Zeeman shift Δ_B, rad/s. |±1⟩ sit at ∓Δ_B.
    pub zeeman: f64,
    /// Position of F'=0 relative to F'=1, rad/s.
    pub f0_offset: f64,
    /// Adds an absorbing level collecting decay to F=2.
    pub lost_level: bool,
    /// Sign of the |−1⟩ ↔ |F'=1⟩ (σ⁺) coefficient.
    pub sign_sigma_plus: f64,
    /// Sign of the |+1⟩ ↔ |F'=1⟩ (σ⁻) coefficient.
    pub sign_sigma_minus: f64,
}

/// F'=1 − F'=0 hyperfine interval of 5P₃/₂, MHz.
pub const F0_OFFSET_MHZ: f64 = -72.2;

// Squared dipole elements (decay branching) for 5P₃/₂ → 5S₁/₂ in ⁸⁷Rb.
const B_F1_TO_PM1: f64 = 5.0 / 12.0;
const B_F0_TO_EACH: f64 = 1.0 / 3.0;

impl SchemeOptions {
    pub fn new(kind: SchemeKind, zeeman: f64) -> Self {
        Self {
            kind,
            zeeman,
            f0_offset: mhz_to_rad(F0_OFFSET_MHZ),
            lost_level: false,
            sign_sigma_plus: 1.0,
            sign_sigma_minus: -1.0,
        }
    }
}

impl LevelScheme {
    /// Builds a scheme from explicit parts, checking selection rules and
    /// branching sums.
    pub fn new(levels: Vec<Level>, couplings: Vec<Coupling>, decays: Vec<DecayChannel>) -> Result<Self, ModelError> {
        let scheme = Self {
            levels,
            couplings,
            decays,
        };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn minimal(zeeman: f64) -> Self {
        Self::build(&SchemeOptions::new(SchemeKind::Minimal, zeeman)).expect("built-in minimal scheme is valid")
    }

    pub fn extended(zeeman: f64) -> Self {
        Self::build(&SchemeOptions::new(SchemeKind::Extended, zeeman)).expect("built-in extended scheme is valid")
    }

    pub fn build(opts: &SchemeOptions) -> Result<Self, ModelError> {
        if !opts.zeeman.is_finite() {
            return Err(invalid("zeeman", "must be finite"));
        }
        for (name, s) in [
            ("sign_sigma_plus", opts.sign_sigma_plus),
            ("sign_sigma_minus", opts.sign_sigma_minus),
        ] {
            if s.abs() != 1.0 {
                return Err(invalid(name, format!("must be +1 or -1, got {s}")));
            }
        }
        let mut levels = vec![
            Level {
                label: "g-1".into(),
                kind: LevelKind::Ground,
                f: 1,
                mf: -1,
                energy: opts.zeeman,
            },
            Level {
                label: "g0".into(),
                kind: LevelKind::Ground,
                f: 1,
                mf: 0,
                energy: 0.0,
            },
            Level {
                label: "g+1".into(),
                kind: LevelKind::Ground,
                f: 1,
                mf: 1,
                energy: -opts.zeeman,
            },
            Level {
                label: "e1".into(),
                kind: LevelKind::Excited,
                f: 1,
                mf: 0,
                energy: 0.0,
            },
        ];
        let (gm1, g0, gp1, e1) = (0, 1, 2, 3);
        let mut couplings = vec![
            Coupling {
                ground: gm1,
                excited: e1,
                polarization: Polarization::SigmaPlus,
                coefficient: opts.sign_sigma_plus,
            },
            Coupling {
                ground: gp1,
                excited: e1,
                polarization: Polarization::SigmaMinus,
                coefficient: opts.sign_sigma_minus,
            },
        ];
        let mut decays = Vec::new();
        let extended = opts.kind == SchemeKind::Extended;
        let lost = if opts.lost_level {
            levels.push(Level {
                label: "lost".into(),
                kind: LevelKind::Lost,
                f: 2,
                mf: 0,
                energy: 0.0,
            });
            Some(levels.len() - 1)
        } else {
            None
        };
        match lost {
            Some(l) => {
                decays.push(DecayChannel {
                    excited: e1,
                    ground: gm1,
                    weight: B_F1_TO_PM1,
                });
                decays.push(DecayChannel {
                    excited: e1,
                    ground: gp1,
                    weight: B_F1_TO_PM1,
                });
                decays.push(DecayChannel {
                    excited: e1,
                    ground: l,
                    weight: 1.0 - 2.0 * B_F1_TO_PM1,
                });
            }
            None => {
                // Without a sink for F=2, the tracked channels are renormalized.
                decays.push(DecayChannel {
                    excited: e1,
                    ground: gm1,
                    weight: 0.5,
                });
                decays.push(DecayChannel {
                    excited: e1,
                    ground: gp1,
                    weight: 0.5,
                });
            }
        }
        if extended {
            levels.push(Level {
                label: "e0".into(),
                kind: LevelKind::Excited,
                f: 0,
                mf: 0,
                energy: opts.f0_offset,
            });
            let e0 = levels.len() - 1;
            // |F'=0⟩ couples to each F=1 sublevel with √(1/3) against √(5/12)
            // for the generation transition; the F'=0 matrix elements share
            // one sign.
            let ratio = (B_F0_TO_EACH / B_F1_TO_PM1).sqrt();
            couplings.push(Coupling {
                ground: gm1,
                excited: e0,
                polarization: Polarization::SigmaPlus,
                coefficient: ratio,
            });
            couplings.push(Coupling {
                ground: g0,
                excited: e0,
                polarization: Polarization::Pi,
                coefficient: ratio,
            });
            couplings.push(Coupling {
                ground: gp1,
                excited: e0,
                polarization: Polarization::SigmaMinus,
                coefficient: ratio,
            });
            for g in [gm1, g0, gp1] {
                decays.push(DecayChannel {
                    excited: e0,
                    ground: g,
                    weight: B_F0_TO_EACH,
                });
            }
        }
        Self::new(levels, couplings, decays)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.levels.is_empty() {
            return Err(invalid("levels", "scheme has no levels"));
        }
        let n = self.levels.len();
        for c in &self.couplings {
            let g = self.levels.get(c.ground).ok_or(ModelError::LevelIndex(c.ground))?;
            let e = self.levels.get(c.excited).ok_or(ModelError::LevelIndex(c.excited))?;
            if g.kind != LevelKind::Ground
                || e.kind != LevelKind::Excited
                || e.mf != g.mf + c.polarization.helicity()
                || !c.coefficient.is_finite()
            {
                return Err(ModelError::SelectionRule {
                    ground: g.label.clone(),
                    excited: e.label.clone(),
                    polarization: c.polarization.to_string(),
                });
            }
        }
        for (i, level) in self.levels.iter().enumerate() {
            if !level.energy.is_finite() {
                return Err(invalid("energy", format!("level {} is not finite", level.label)));
            }
            if level.kind != LevelKind::Excited {
                continue;
            }
            let mut sum = 0.0;
            for d in self.decays.iter().filter(|d| d.excited == i) {
                if d.ground >= n {
                    return Err(ModelError::LevelIndex(d.ground));
                }
                if d.weight < 0.0 {
                    return Err(invalid("decay weight", "must be nonnegative"));
                }
                sum += d.weight;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(ModelError::Branching {
                    excited: level.label.clone(),
                    sum,
                });
            }
        }
        for d in &self.decays {
            match self.levels.get(d.excited) {
                Some(l) if l.kind == LevelKind::Excited => {}
                _ => return Err(invalid("decay", "source level must be excited")),
            }
        }
        Ok(())
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn decays(&self) -> &[DecayChannel] {
        &self.decays
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.levels.iter().position(|l| l.label == label)
    }

    /// Index of the F=1 ground sublevel with the given m_F.
    pub fn ground(&self, mf: i32) -> Option<usize> {
        self.levels
            .iter()
            .position(|l| l.kind == LevelKind::Ground && l.f == 1 && l.mf == mf)
    }

    pub fn has_level(&self, kind: LevelKind, f: i32) -> bool {
        self.levels.iter().any(|l| l.kind == kind && l.f == f)
    }

    /// Copy with every coupling coefficient set to zero.
    pub fn without_couplings(&self) -> Self {
        let mut s = self.clone();
        for c in &mut s.couplings {
            c.coefficient = 0.0;
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scheme_layout() {
        let s = LevelScheme::minimal(1.0);
        assert_eq!(s.len(), 4);
        assert_eq!(s.levels()[0].energy, 1.0);
        assert_eq!(s.levels()[2].energy, -1.0);
        assert_eq!(s.ground(-1), Some(0));
        assert_eq!(s.ground(1), Some(2));
        assert_eq!(s.index_of("e1"), Some(3));
    }

    #[test]
    fn extended_adds_f0() {
        let s = LevelScheme::extended(1.0);
        assert_eq!(s.len(), 5);
        let e0 = s.index_of("e0").unwrap();
        assert_eq!(s.levels()[e0].f, 0);
        assert!((s.levels()[e0].energy - mhz_to_rad(-72.2)).abs() < 1e-6);
    }

    #[test]
    fn every_coupling_obeys_selection_rule() {
        for kind in [SchemeKind::Minimal, SchemeKind::Extended] {
            for lost in [false, true] {
                let mut o = SchemeOptions::new(kind, 2.0);
                o.lost_level = lost;
                let s = LevelScheme::build(&o).unwrap();
                for c in s.couplings() {
                    let g = &s.levels()[c.ground];
                    let e = &s.levels()[c.excited];
                    assert_eq!(e.mf, g.mf + c.polarization.helicity());
                }
            }
        }
    }

    #[test]
    fn branching_sums_to_one() {
        let mut o = SchemeOptions::new(SchemeKind::Extended, 2.0);
        o.lost_level = true;
        let s = LevelScheme::build(&o).unwrap();
        let lost = s.index_of("lost").unwrap();
        let w: f64 = s.decays().iter().filter(|d| d.ground == lost).map(|d| d.weight).sum();
        assert!((w - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn selection_rule_violation_rejected() {
        let s = LevelScheme::minimal(1.0);
        let mut couplings = s.couplings().to_vec();
        couplings[0].polarization = Polarization::SigmaMinus;
        let err = LevelScheme::new(s.levels().to_vec(), couplings, s.decays().to_vec());
        assert!(matches!(err, Err(ModelError::SelectionRule { .. })));
    }

    #[test]
    fn bad_branching_rejected() {
        let s = LevelScheme::minimal(1.0);
        let mut decays = s.decays().to_vec();
        decays[0].weight = 0.6;
        let err = LevelScheme::new(s.levels().to_vec(), s.couplings().to_vec(), decays);
        assert!(matches!(err, Err(ModelError::Branching { .. })));
    }

    #[test]
    fn sign_override() {
        let mut o = SchemeOptions::new(SchemeKind::Minimal, 1.0);
        o.sign_sigma_minus = 1.0;
        let s = LevelScheme::build(&o).unwrap();
        assert!(s.couplings().iter().all(|c| c.coefficient == 1.0));
        o.sign_sigma_minus = 0.5;
        assert!(LevelScheme::build(&o).is_err());
    }
}
