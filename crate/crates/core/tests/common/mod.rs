#![allow(dead_code)]

use polsource::dynamics::OpenSystem;
use polsource::model::hamiltonian::{Channel, CollapseOperator, TimeDependentOperator};
use polsource::model::operator::Operator;
use polsource::model::space::CompositeSpace;
use polsource::C64;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Two-level atom (0 = g, 1 = e) with a single cavity mode (the σ⁺ slot),
/// resonant coupling `g`, field decay `kappa`.
pub struct Toy {
    pub space: CompositeSpace,
    pub system: OpenSystem,
    pub a: Operator,
    pub excited: Operator,
}

pub fn toy(g: f64, kappa: f64, n_max: usize) -> Toy {
    let space = CompositeSpace::new(2, n_max).unwrap();
    let a = space.a_plus();
    let lower = space.atom_transition(0, 1);
    let emit = a.adjoint().matmul(&lower).scale(c(g));
    let h = TimeDependentOperator::constant(emit.add(&emit.adjoint()));
    let mut collapse = Vec::new();
    if kappa > 0.0 {
        collapse.push(CollapseOperator {
            channel: Channel::OutputPlus,
            rate: 2.0 * kappa,
            op: a.scale(c((2.0 * kappa).sqrt())),
        });
    }
    Toy {
        excited: space.atom_projector(1),
        system: OpenSystem::new(h, collapse),
        space,
        a,
    }
}

pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64).collect()
}
