//! Hamiltonian and collapse-operator assembly in the frame rotating at the
//! cavity frequency.
//!
//! H/ħ = Σ_g E_g P_g + Σ_e (E_e + δ_c) P_e
//!     + g_max Σ_q Σ_(g,e) c·(a_q† |g⟩⟨e| + h.c.)
//!     + (Ω(t)/2) Σ_q w_q Σ_(g,e) c·(e^{−iΔ_pc t} |e⟩⟨g| + h.c.)
//!
//! The σ⁺ cavity mode and the σ⁺ pump component both act on couplings with
//! helicity +1 (|−1⟩ ↔ |e⟩), the σ⁻ ones on helicity −1 (|+1⟩ ↔ |e⟩).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{invalid, ModelError};
use crate::model::cavity::CavityConfig;
use crate::model::levels::{LevelKind, LevelScheme, Polarization};
use crate::model::operator::Operator;
use crate::model::pulse::PumpPulse;
use crate::model::space::CompositeSpace;

/// Scalar time dependence of one operator term.
#[derive(Clone)]
pub enum Coefficient {
    Constant(C64),
    Function(Arc<dyn Fn(f64) -> C64 + Send + Sync>),
}

impl Coefficient {
    pub fn function<F>(f: F) -> Self
    where
        F: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        Coefficient::Function(Arc::new(f))
    }

    #[inline]
    pub fn at(&self, t: f64) -> C64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Function(f) => f(t),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// A(t) = Σ_k c_k(t) A_k.
#[derive(Clone, Debug)]
pub struct TimeDependentOperator {
    dim: usize,
    terms: Vec<(Operator, Coefficient)>,
}

impl TimeDependentOperator {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn constant(op: Operator) -> Self {
        let mut s = Self::new(op.dim());
        s.push(op, Coefficient::Constant(C64::new(1.0, 0.0)));
        s
    }

    pub fn push(&mut self, op: Operator, coefficient: Coefficient) {
        assert_eq!(op.dim(), self.dim, "term dimension mismatch");
        if !op.is_zero() {
            self.terms.push((op, coefficient));
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Operator, Coefficient)] {
        &self.terms
    }

    /// Merges all constant terms into one.
    pub fn simplified(&self) -> Self {
        let mut constant = Operator::zeros(self.dim);
        let mut out = Self::new(self.dim);
        for (op, c) in &self.terms {
            match c {
                Coefficient::Constant(v) => constant = constant.add(&op.scale(*v)),
                Coefficient::Function(_) => out.terms.push((op.clone(), c.clone())),
            }
        }
        if !constant.is_zero() {
            out.terms
                .insert(0, (constant, Coefficient::Constant(C64::new(1.0, 0.0))));
        }
        out
    }

    pub fn at(&self, t: f64) -> Operator {
        let mut out = Operator::zeros(self.dim);
        for (op, c) in &self.terms {
            let v = c.at(t);
            if v != C64::new(0.0, 0.0) {
                out = out.add(&op.scale(v));
            }
        }
        out
    }

    /// Evaluates all coefficients at t into `buf`.
    #[inline]
    pub fn coefficients_into(&self, t: f64, buf: &mut Vec<C64>) {
        buf.clear();
        buf.extend(self.terms.iter().map(|(_, c)| c.at(t)));
    }

    /// y = alpha · A(t) x, given coefficients from [`coefficients_into`].
    #[inline]
    pub fn apply_with(&self, coeffs: &[C64], alpha: C64, x: &[C64], y: &mut [C64]) {
        for ((op, _), &c) in self.terms.iter().zip(coeffs) {
            if c != C64::new(0.0, 0.0) {
                op.apply_add(alpha * c, x, y);
            }
        }
    }

    /// Upper bound on ‖A(t)‖ over t, using |c_k(t)| at the given sample times.
    pub fn norm_bound(&self, sample_times: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(op, c)| {
                let cmax = match c {
                    Coefficient::Constant(v) => v.norm(),
                    Coefficient::Function(f) => sample_times.iter().map(|&t| f(t).norm()).fold(0.0, f64::max),
                };
                cmax * op.norm_bound()
            })
            .sum()
    }
}

/// Constant building blocks of the atom-cavity Hamiltonian.
#[derive(Clone, Debug)]
pub struct HamiltonianParts {
    space: CompositeSpace,
    /// Bare level energies (diagonal).
    pub bare: Operator,
    /// Atom-cavity coupling at full g_max.
    pub cavity: Operator,
    /// Σ c |e⟩⟨g| over σ⁺ couplings.
    pub raise_plus: Operator,
    /// Σ c |e⟩⟨g| over σ⁻ couplings.
    pub raise_minus: Operator,
}

impl HamiltonianParts {
    pub fn new(space: &CompositeSpace, scheme: &LevelScheme, cavity: &CavityConfig) -> Result<Self, ModelError> {
        scheme.validate()?;
        cavity.validate()?;
        if space.n_atom() != scheme.len() || space.n_max() != cavity.n_max {
            return Err(ModelError::Dimension {
                expected: scheme.len() * (cavity.n_max + 1).pow(2),
                found: space.dim(),
            });
        }
        let mut diag = Vec::with_capacity(space.dim());
        for s in space.basis() {
            let level = &scheme.levels()[s.atom];
            let e = match level.kind {
                LevelKind::Excited => level.energy + cavity.detuning_c,
                _ => level.energy,
            };
            diag.push(C64::new(e, 0.0));
        }
        let bare = Operator::diagonal(&diag);

        let a_dag_plus = space.a_plus().adjoint();
        let a_dag_minus = space.a_minus().adjoint();
        let mut cavity_op = Operator::zeros(space.dim());
        let mut raise_plus = Operator::zeros(space.dim());
        let mut raise_minus = Operator::zeros(space.dim());
        for c in scheme.couplings() {
            let lower = space.atom_transition(c.ground, c.excited);
            let raise = space.atom_transition(c.excited, c.ground);
            let coef = C64::new(c.coefficient, 0.0);
            match c.polarization {
                Polarization::SigmaPlus => {
                    let emit = a_dag_plus.matmul(&lower).scale(coef * cavity.g_max);
                    cavity_op = cavity_op.add(&emit).add(&emit.adjoint());
                    raise_plus = raise_plus.add(&raise.scale(coef));
                }
                Polarization::SigmaMinus => {
                    let emit = a_dag_minus.matmul(&lower).scale(coef * cavity.g_max);
                    cavity_op = cavity_op.add(&emit).add(&emit.adjoint());
                    raise_minus = raise_minus.add(&raise.scale(coef));
                }
                // Neither the cavity nor the pump carries π light.
                Polarization::Pi => {}
            }
        }
        Ok(Self {
            space: *space,
            bare,
            cavity: cavity_op,
            raise_plus,
            raise_minus,
        })
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    /// Σ_q w_q Σ c |e⟩⟨g| for the pulse's polarization content.
    pub fn pump_raising(&self, pulse: &PumpPulse) -> Operator {
        self.raise_plus
            .scale(pulse.weights.0)
            .add(&self.raise_minus.scale(pulse.weights.1))
    }

    /// H(t) for a single pulse in pulse-local time, with constant coupling.
    pub fn single_pulse(&self, pulse: &PumpPulse) -> TimeDependentOperator {
        let mut h = TimeDependentOperator::constant(self.bare.add(&self.cavity));
        self.push_pump(&mut h, pulse, Some);
        h
    }

    /// Adds the two drive terms of `pulse`; `local_time` maps global time to
    /// pulse-local time, or `None` when the pulse is inactive.
    pub fn push_pump<F>(&self, h: &mut TimeDependentOperator, pulse: &PumpPulse, local_time: F)
    where
        F: Fn(f64) -> Option<f64> + Send + Sync + Clone + 'static,
    {
        let raising = self.pump_raising(pulse);
        let lowering = raising.adjoint();
        let p1 = pulse.clone();
        let lt1 = local_time.clone();
        h.push(
            raising,
            Coefficient::function(move |t| match lt1(t) {
                Some(tau) => p1.raising_coefficient(tau),
                None => C64::new(0.0, 0.0),
            }),
        );
        let p2 = pulse.clone();
        h.push(
            lowering,
            Coefficient::function(move |t| match local_time(t) {
                Some(tau) => p2.raising_coefficient(tau).conj(),
                None => C64::new(0.0, 0.0),
            }),
        );
    }
}

/// H(t)/ħ in rad/s for a single pulse at pulse-local time t.
pub fn build_hamiltonian(
    space: &CompositeSpace,
    scheme: &LevelScheme,
    cavity: &CavityConfig,
    pulse: &PumpPulse,
    t: f64,
) -> Result<Operator, ModelError> {
    pulse.validate()?;
    if !(0.0..=pulse.t_p).contains(&t) {
        return Err(invalid("t", format!("must lie in [0, t_p], got {t}")));
    }
    let parts = HamiltonianParts::new(space, scheme, cavity)?;
    Ok(parts.single_pulse(pulse).at(t))
}

/// Where a quantum jump deposits its quantum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    OutputPlus,
    OutputMinus,
    LossPlus,
    LossMinus,
    Spontaneous { excited: u16, ground: u16 },
}

impl Channel {
    pub fn is_output(self) -> bool {
        matches!(self, Channel::OutputPlus | Channel::OutputMinus)
    }

    /// Polarization of a cavity photon, `None` for free-space decay.
    pub fn polarization(self) -> Option<Polarization> {
        match self {
            Channel::OutputPlus | Channel::LossPlus => Some(Polarization::SigmaPlus),
            Channel::OutputMinus | Channel::LossMinus => Some(Polarization::SigmaMinus),
            Channel::Spontaneous { .. } => None,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::OutputPlus => f.write_str("output_plus"),
            Channel::OutputMinus => f.write_str("output_minus"),
            Channel::LossPlus => f.write_str("loss_plus"),
            Channel::LossMinus => f.write_str("loss_minus"),
            Channel::Spontaneous { excited, ground } => {
                write!(f, "spontaneous_{excited}_{ground}")
            }
        }
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "output_plus" => Ok(Channel::OutputPlus),
            "output_minus" => Ok(Channel::OutputMinus),
            "loss_plus" => Ok(Channel::LossPlus),
            "loss_minus" => Ok(Channel::LossMinus),
            _ => {
                let rest = s
                    .strip_prefix("spontaneous_")
                    .ok_or_else(|| format!("unknown channel label `{s}`"))?;
                let (e, g) = rest
                    .split_once('_')
                    .ok_or_else(|| format!("malformed channel label `{s}`"))?;
                Ok(Channel::Spontaneous {
                    excited: e.parse().map_err(|_| format!("bad level in `{s}`"))?,
                    ground: g.parse().map_err(|_| format!("bad level in `{s}`"))?,
                })
            }
        }
    }
}

/// C = √rate · L with its channel tag.
#[derive(Clone, Debug)]
pub struct CollapseOperator {
    pub channel: Channel,
    pub rate: f64,
    pub op: Operator,
}

/// Output-mirror, cavity-loss and spontaneous-emission jump operators.
/// Zero-rate channels are omitted.
pub fn collapse_operators(
    space: &CompositeSpace,
    scheme: &LevelScheme,
    cavity: &CavityConfig,
    gamma: f64,
) -> Result<Vec<CollapseOperator>, ModelError> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", format!("must be >= 0, got {gamma}")));
    }
    scheme.validate()?;
    cavity.validate()?;
    let mut out = Vec::new();
    let a_plus = space.a_plus();
    let a_minus = space.a_minus();
    let mut push = |channel, rate: f64, base: &Operator| {
        if rate > 0.0 {
            out.push(CollapseOperator {
                channel,
                rate,
                op: base.scale(C64::new(rate.sqrt(), 0.0)),
            });
        }
    };
    push(Channel::OutputPlus, 2.0 * cavity.kappa_out(), &a_plus);
    push(Channel::OutputMinus, 2.0 * cavity.kappa_out(), &a_minus);
    push(Channel::LossPlus, 2.0 * cavity.kappa_loss(), &a_plus);
    push(Channel::LossMinus, 2.0 * cavity.kappa_loss(), &a_minus);
    for d in scheme.decays() {
        let channel = Channel::Spontaneous {
            excited: d.excited as u16,
            ground: d.ground as u16,
        };
        push(
            channel,
            2.0 * gamma * d.weight,
            &space.atom_transition(d.ground, d.excited),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::units::mhz_to_rad;

    fn setup(extended: bool) -> (CompositeSpace, LevelScheme, CavityConfig) {
        let db = mhz_to_rad(14.0);
        let scheme = if extended {
            LevelScheme::extended(db)
        } else {
            LevelScheme::minimal(db)
        };
        let cavity = CavityConfig::reference();
        let space = CompositeSpace::build(&scheme, &cavity).unwrap();
        (space, scheme, cavity)
    }

    #[test]
    fn hermitian_at_sampled_times() {
        for ext in [false, true] {
            let (space, scheme, cavity) = setup(ext);
            let pulse = PumpPulse::linear(mhz_to_rad(24.0), 1.42e-6, mhz_to_rad(28.0));
            for k in 0..=20 {
                let t = pulse.t_p * k as f64 / 20.0;
                let h = build_hamiltonian(&space, &scheme, &cavity, &pulse, t).unwrap();
                assert!(h.hermiticity_residual() <= 1e-12 * h.max_abs());
            }
        }
    }

    #[test]
    fn pump_prefactor_at_half_pulse() {
        let (space, scheme, cavity) = setup(false);
        let pulse = PumpPulse::linear(mhz_to_rad(24.0), 1.42e-6, 0.0);
        let h = build_hamiltonian(&space, &scheme, &cavity, &pulse, pulse.t_p / 2.0).unwrap();
        let e = space.ket(3, 0, 0).iter().position(|v| v.re == 1.0).unwrap();
        let g = space.ket(2, 0, 0).iter().position(|v| v.re == 1.0).unwrap();
        // σ⁻ coupling coefficient is -1 by default
        assert!((h.get(e, g) - C64::new(-pulse.omega0 / 2.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn zero_couplings_leave_bare_energies() {
        let (space, scheme, mut cavity) = setup(false);
        cavity.detuning_c = 0.37;
        let bare = scheme.without_couplings();
        let pulse = PumpPulse::linear(1.0e8, 1e-6, 3.0e7);
        let h = build_hamiltonian(&space, &bare, &cavity, &pulse, 0.3e-6).unwrap();
        let db = mhz_to_rad(14.0);
        let expected = [db, 0.0, -db, 0.37];
        for (i, s) in space.basis().enumerate() {
            for j in 0..space.dim() {
                let v = h.get(i, j);
                if i == j {
                    assert!((v.re - expected[s.atom]).abs() < 1e-6);
                } else {
                    assert_eq!(v, C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn raman_resonance_at_twice_zeeman() {
        // |+1,0,0⟩ + pump photon (Δ_pc) must be degenerate with |−1,1,0⟩.
        let (space, scheme, cavity) = setup(false);
        let parts = HamiltonianParts::new(&space, &scheme, &cavity).unwrap();
        let start = space.index(crate::model::space::BasisState {
            atom: 2,
            n_plus: 0,
            n_minus: 0,
        });
        let end = space.index(crate::model::space::BasisState {
            atom: 0,
            n_plus: 1,
            n_minus: 0,
        });
        let delta_pc = parts.bare.get(end, end).re - parts.bare.get(start, start).re;
        assert!((delta_pc - mhz_to_rad(28.0)).abs() < 1e-3);
    }

    #[test]
    fn selection_rules_conserve_angular_momentum() {
        let (space, scheme, cavity) = setup(true);
        let parts = HamiltonianParts::new(&space, &scheme, &cavity).unwrap();
        let total = |i: usize| {
            let s = space.state(i);
            scheme.levels()[s.atom].mf + s.n_plus as i32 - s.n_minus as i32
        };
        for (r, c, _) in parts.cavity.entries() {
            assert_eq!(total(r), total(c));
        }
        // the pump carries ±1 per absorbed σ± photon
        for (r, c, _) in parts.raise_plus.entries() {
            assert_eq!(total(r), total(c) + 1);
        }
        for (r, c, _) in parts.raise_minus.entries() {
            assert_eq!(total(r), total(c) - 1);
        }
    }

    #[test]
    fn rejects_time_outside_pulse() {
        let (space, scheme, cavity) = setup(false);
        let pulse = PumpPulse::linear(1.0, 1e-6, 0.0);
        assert!(build_hamiltonian(&space, &scheme, &cavity, &pulse, 2e-6).is_err());
    }

    #[test]
    fn collapse_rates() {
        let (space, scheme, cavity) = setup(false);
        let ops = collapse_operators(&space, &scheme, &cavity, mhz_to_rad(3.0)).unwrap();
        let out = ops.iter().find(|c| c.channel == Channel::OutputPlus).unwrap();
        assert!((out.rate - 2.0 * 0.93 * cavity.kappa).abs() < 1e-6);
        assert_eq!(ops.len(), 6);

        let none = collapse_operators(&space, &scheme, &cavity, 0.0).unwrap();
        assert!(none.iter().all(|c| !matches!(c.channel, Channel::Spontaneous { .. })));

        let mut full = cavity.clone();
        full.kappa_out_fraction = 1.0;
        let ops = collapse_operators(&space, &scheme, &full, 1.0).unwrap();
        assert!(ops
            .iter()
            .all(|c| !matches!(c.channel, Channel::LossPlus | Channel::LossMinus)));
        assert!(collapse_operators(&space, &scheme, &cavity, -1.0).is_err());
    }

    #[test]
    fn spontaneous_rates_sum_to_two_gamma() {
        let (space, scheme, cavity) = setup(true);
        let gamma = 5.0;
        let ops = collapse_operators(&space, &scheme, &cavity, gamma).unwrap();
        for e in [3usize, 4] {
            let total: f64 = ops
                .iter()
                .filter(|c| matches!(c.channel, Channel::Spontaneous { excited, .. } if excited as usize == e))
                .map(|c| c.rate)
                .sum();
            assert!((total - 2.0 * gamma).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_labels_roundtrip() {
        for c in [
            Channel::OutputPlus,
            Channel::OutputMinus,
            Channel::LossPlus,
            Channel::LossMinus,
            Channel::Spontaneous { excited: 4, ground: 1 },
        ] {
            assert_eq!(c.to_string().parse::<Channel>().unwrap(), c);
        }
        assert!("spontaneous_x".parse::<Channel>().is_err());
        assert!("photon".parse::<Channel>().is_err());
    }
}
