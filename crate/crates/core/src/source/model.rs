use num_complex::Complex64 as C64;
use rand::Rng;

use crate::dynamics::{DensityState, IntegratorOptions, OpenSystem};
use crate::error::{invalid, ModelError, SourceError};
use crate::model::cavity::CavityConfig;
use crate::model::hamiltonian::{collapse_operators, Coefficient, HamiltonianParts, TimeDependentOperator};
use crate::model::levels::{LevelScheme, SchemeKind, SchemeOptions};
use crate::model::space::CompositeSpace;
use crate::model::units::mhz_to_rad;
use crate::source::program::PulseProgram;
use crate::source::transit::{TransitMode, TransitModel};

/// Zeeman shift used by the built-in parameter set, MHz.
pub const REFERENCE_ZEEMAN_MHZ: f64 = 14.0;
/// Atomic field decay rate of the built-in parameter set, MHz.
pub const REFERENCE_GAMMA_MHZ: f64 = 3.0;
/// Peak pump Rabi frequency of the built-in parameter set, MHz.
pub const REFERENCE_OMEGA0_MHZ: f64 = 24.0;
/// Pulse length of the built-in parameter set, s.
pub const REFERENCE_T_P: f64 = 1.42e-6;

/// Atom, cavity and integration settings shared by every driver.
#[derive(Clone, Debug)]
pub struct SourceModel {
    pub scheme: LevelScheme,
    pub cavity: CavityConfig,
    /// Atomic field decay rate γ, rad/s. Spontaneous emission runs at 2γ.
    pub gamma: f64,
    pub integrator: IntegratorOptions,
    /// Output samples per pulse slot.
    pub samples_per_pulse: usize,
}

impl SourceModel {
    pub fn new(scheme: LevelScheme, cavity: CavityConfig, gamma: f64) -> Result<Self, SourceError> {
        let m = Self {
            scheme,
            cavity,
            gamma,
            integrator: IntegratorOptions::default(),
            samples_per_pulse: 142,
        };
        m.validate()?;
        Ok(m)
    }

    /// Built-in ⁸⁷Rb parameters with the chosen scheme.
    pub fn reference(kind: SchemeKind) -> Self {
        let scheme = LevelScheme::build(&SchemeOptions::new(kind, mhz_to_rad(REFERENCE_ZEEMAN_MHZ)))
            .expect("built-in scheme is valid");
        Self::new(scheme, CavityConfig::reference(), mhz_to_rad(REFERENCE_GAMMA_MHZ))
            .expect("built-in parameters are valid")
    }

    pub fn validate(&self) -> Result<(), SourceError> {
        self.scheme.validate()?;
        self.cavity.validate()?;
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(invalid("gamma", format!("must be >= 0, got {}", self.gamma)).into());
        }
        if self.samples_per_pulse == 0 {
            return Err(invalid("samples_per_pulse", "must be >= 1").into());
        }
        for g in [-1, 1] {
            if self.scheme.ground(g).is_none() {
                return Err(invalid("scheme", format!("missing ground level mF = {g}")).into());
            }
        }
        Ok(())
    }

    /// Δ_B, read from the |−1⟩ level energy.
    pub fn zeeman(&self) -> f64 {
        let i = self.scheme.ground(-1).expect("validated");
        self.scheme.levels()[i].energy
    }

    pub fn space(&self) -> CompositeSpace {
        CompositeSpace::build(&self.scheme, &self.cavity).expect("validated")
    }

    pub fn with_g_max(&self, g_max: f64) -> Self {
        let mut m = self.clone();
        m.cavity.g_max = g_max;
        m
    }

    /// Open system for `program` with the transit profile centered at
    /// `center` (global time, s).
    pub fn system(
        &self,
        program: &PulseProgram,
        transit: &TransitModel,
        center: f64,
    ) -> Result<OpenSystem, SourceError> {
        program.validate()?;
        transit.validate()?;
        let space = self.space();
        let parts = HamiltonianParts::new(&space, &self.scheme, &self.cavity)?;
        let mut h = TimeDependentOperator::constant(parts.bare.clone());
        match transit.mode {
            TransitMode::Constant => h.push(
                parts.cavity.clone(),
                Coefficient::Constant(C64::new(transit.g_scale, 0.0)),
            ),
            TransitMode::Gaussian => {
                let tr = transit.clone();
                h.push(
                    parts.cavity.clone(),
                    Coefficient::function(move |t| C64::new(tr.scale_at(t - center), 0.0)),
                );
            }
        }
        for (pulse, clock) in program.pulses.iter().zip(program.clocks()) {
            parts.push_pump(&mut h, pulse, move |t| clock.local(t));
        }
        let collapse = collapse_operators(&space, &self.scheme, &self.cavity, self.gamma)?;
        Ok(OpenSystem::new(h.simplified(), collapse))
    }

    /// Output grid with `samples_per_pulse` intervals per slot.
    pub fn time_grid(&self, program: &PulseProgram) -> Vec<f64> {
        let n = self.samples_per_pulse;
        let mut grid = Vec::with_capacity(program.len() * n + 1);
        grid.push(0.0);
        for slot in 0..program.len() {
            let start = program.slot_start(slot);
            for k in 1..=n {
                grid.push(start + program.period * k as f64 / n as f64);
            }
        }
        grid
    }
}

/// Incoherent mixture over the F=1 ground sublevels.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialState {
    weights: Vec<(i32, f64)>,
}

impl Default for InitialState {
    /// Equal mixture of |−1⟩ and |+1⟩.
    fn default() -> Self {
        Self {
            weights: vec![(-1, 0.5), (1, 0.5)],
        }
    }
}

impl InitialState {
    /// Weights are normalized; each mF must be −1, 0 or +1.
    pub fn new(weights: Vec<(i32, f64)>) -> Result<Self, ModelError> {
        if weights.is_empty() {
            return Err(invalid("initial_state", "no components"));
        }
        let mut total = 0.0;
        for &(mf, w) in &weights {
            if !(-1..=1).contains(&mf) {
                return Err(invalid("initial_state", format!("mF = {mf} is outside F=1")));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(invalid("initial_state", format!("weight {w} for mF = {mf}")));
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(invalid("initial_state", "weights sum to zero"));
        }
        Ok(Self {
            weights: weights.into_iter().map(|(m, w)| (m, w / total)).collect(),
        })
    }

    pub fn ground(mf: i32) -> Result<Self, ModelError> {
        Self::new(vec![(mf, 1.0)])
    }

    pub fn weights(&self) -> &[(i32, f64)] {
        &self.weights
    }

    /// |mF; 0, 0⟩ in the model space.
    pub fn ket(model: &SourceModel, mf: i32) -> Result<Vec<C64>, ModelError> {
        let level = model
            .scheme
            .ground(mf)
            .ok_or_else(|| invalid("initial_state", format!("scheme lacks mF = {mf}")))?;
        Ok(model.space().ket(level, 0, 0))
    }

    pub fn density(&self, model: &SourceModel, time: f64) -> Result<DensityState, ModelError> {
        let mut parts = Vec::with_capacity(self.weights.len());
        for &(mf, w) in &self.weights {
            if w > 0.0 {
                parts.push((Self::ket(model, mf)?, w));
            }
        }
        Ok(DensityState::mixture(&parts, time))
    }

    /// Draws one component's mF.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> i32 {
        let mut u: f64 = rng.gen();
        for &(mf, w) in &self.weights {
            if u < w {
                return mf;
            }
            u -= w;
        }
        self.weights.last().map(|x| x.0).unwrap_or(0)
    }
}
