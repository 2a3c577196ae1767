//! Classical fourth-order Runge-Kutta with drift-based step rejection.
//!
//! The Hamiltonian is sampled analytically at t, t+h/2 and t+h; nothing is
//! interpolated. Between two requested output times the interval is split
//! into equal substeps no longer than the nominal step.

use num_complex::Complex64 as C64;

use crate::dynamics::system::OpenSystem;
use crate::error::DynamicsError;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorOptions {
    /// Upper bound on the step, s.
    pub max_step: f64,
    /// Steps are also limited to `step_safety / ‖K‖`.
    pub step_safety: f64,
    /// Steps are halved on drift failure down to this size, s.
    pub min_step: f64,
    /// Allowed per-step change of the conserved quantity (trace, or norm for
    /// closed evolution).
    pub drift_tolerance: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            max_step: 1e-9,
            step_safety: 0.25,
            min_step: 1e-15,
            drift_tolerance: 1e-9,
        }
    }
}

impl IntegratorOptions {
    /// Fixed nominal step `h`, independent of the generator norm.
    pub fn fixed(h: f64) -> Self {
        Self {
            max_step: h,
            step_safety: f64::INFINITY,
            ..Self::default()
        }
    }

    /// Nominal step for `system` over [t0, t1].
    pub fn nominal_step(&self, system: &OpenSystem, t0: f64, t1: f64) -> f64 {
        let mut h = self.max_step;
        if self.step_safety.is_finite() {
            let samples: Vec<f64> = (0..=64).map(|k| t0 + (t1 - t0) * k as f64 / 64.0).collect();
            let bound = system.generator_norm_bound(&samples);
            if bound > 0.0 {
                h = h.min(self.step_safety / bound);
            }
        }
        h
    }
}

/// Right-hand side of a linear ODE dx/dt = f(t, x) whose time dependence is
/// carried by a coefficient vector.
pub(crate) trait Rhs {
    fn len(&self) -> usize;
    fn coefficients(&self, t: f64, buf: &mut Vec<C64>);
    fn eval(&mut self, coeffs: &[C64], x: &[C64], out: &mut [C64]);
}

pub(crate) struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
    c0: Vec<C64>,
    c_mid: Vec<C64>,
    c1: Vec<C64>,
    /// End time of the previous step; its coefficients are still in c1.
    last_end: Option<f64>,
}

impl Rk4 {
    pub fn new(len: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); len];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
            c0: Vec::new(),
            c_mid: Vec::new(),
            c1: Vec::new(),
            last_end: None,
        }
    }

    /// One step of size h from (t, x) into `out`.
    pub fn step<R: Rhs>(&mut self, rhs: &mut R, t: f64, h: f64, x: &[C64], out: &mut [C64]) {
        if self.last_end == Some(t) {
            std::mem::swap(&mut self.c0, &mut self.c1);
        } else {
            rhs.coefficients(t, &mut self.c0);
        }
        rhs.coefficients(t + 0.5 * h, &mut self.c_mid);
        rhs.coefficients(t + h, &mut self.c1);
        self.last_end = Some(t + h);

        rhs.eval(&self.c0, x, &mut self.k1);
        axpy_into(&mut self.tmp, x, 0.5 * h, &self.k1);
        rhs.eval(&self.c_mid, &self.tmp, &mut self.k2);
        axpy_into(&mut self.tmp, x, 0.5 * h, &self.k2);
        rhs.eval(&self.c_mid, &self.tmp, &mut self.k3);
        axpy_into(&mut self.tmp, x, h, &self.k3);
        rhs.eval(&self.c1, &self.tmp, &mut self.k4);

        let w = h / 6.0;
        for i in 0..x.len() {
            out[i] = x[i] + w * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

#[inline]
fn axpy_into(out: &mut [C64], x: &[C64], a: f64, k: &[C64]) {
    for ((o, &xi), &ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + a * ki;
    }
}

/// Drives an [`Rk4`] across intervals with drift-checked substeps.
pub(crate) struct Stepper<R: Rhs> {
    pub rhs: R,
    rk: Rk4,
    trial: Vec<C64>,
    pub opts: IntegratorOptions,
    pub nominal: f64,
}

impl<R: Rhs> Stepper<R> {
    pub fn new(rhs: R, opts: IntegratorOptions, nominal: f64) -> Self {
        let len = rhs.len();
        Self {
            rhs,
            rk: Rk4::new(len),
            trial: vec![C64::new(0.0, 0.0); len],
            opts,
            nominal,
        }
    }

    /// Single unchecked step from (t, x) into `out`.
    pub fn raw_step(&mut self, t: f64, h: f64, x: &[C64], out: &mut [C64]) {
        self.rk.step(&mut self.rhs, t, h, x, out);
    }

    /// Number of equal substeps covering [t0, t1].
    pub fn substeps(&self, t0: f64, t1: f64) -> usize {
        (((t1 - t0) / self.nominal) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }

    /// Advances x from t0 to t1; `drift(before, after)` is compared against
    /// the tolerance and rejected steps are halved.
    pub fn advance<D>(&mut self, x: &mut [C64], t0: f64, t1: f64, drift: &D) -> Result<(), DynamicsError>
    where
        D: Fn(&[C64], &[C64]) -> f64,
    {
        if t1 <= t0 {
            return Ok(());
        }
        let n = self.substeps(t0, t1);
        let h = (t1 - t0) / n as f64;
        for i in 0..n {
            let t = t0 + h * i as f64;
            let h_i = if i + 1 == n { t1 - t } else { h };
            self.checked_step(x, t, h_i, drift)?;
        }
        Ok(())
    }

    pub fn checked_step<D>(&mut self, x: &mut [C64], t: f64, h: f64, drift: &D) -> Result<(), DynamicsError>
    where
        D: Fn(&[C64], &[C64]) -> f64,
    {
        self.rk.step(&mut self.rhs, t, h, x, &mut self.trial);
        let d = drift(x, &self.trial);
        if d <= self.opts.drift_tolerance {
            x.copy_from_slice(&self.trial);
            return Ok(());
        }
        let half = 0.5 * h;
        if half < self.opts.min_step {
            return Err(DynamicsError::StepFailure { time: t, drift: d });
        }
        self.checked_step(x, t, half, drift)?;
        self.checked_step(x, t + half, half, drift)
    }
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<(), DynamicsError> {
    for (i, w) in t_grid.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(DynamicsError::TimeGrid(i + 1));
        }
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(DynamicsError::TimeGrid(0));
    }
    Ok(())
}
