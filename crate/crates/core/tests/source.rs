use polsource::model::cavity::CavityConfig;
use polsource::model::levels::SchemeKind;
use polsource::model::pulse::PumpPulse;
use polsource::model::units::mhz_to_rad;
use polsource::source::{
    conditional_probabilities, peak_flux_times, run_sequence, run_sequence_position_averaged, run_sequence_with_state,
    InitialState, PulseProgram, SourceModel, TransitModel,
};

const T_P: f64 = 1.42e-6;

fn omega_plus(model: &SourceModel, omega0_mhz: f64) -> PulseProgram {
    PulseProgram::single(PumpPulse::linear(mhz_to_rad(omega0_mhz), T_P, 2.0 * model.zeeman()))
}

fn no_decay(kind: SchemeKind) -> SourceModel {
    let mut m = SourceModel::reference(kind);
    m.gamma = 0.0;
    m
}

#[test]
fn omega_plus_from_plus_one_emits_sigma_plus() {
    let model = SourceModel::reference(SchemeKind::Minimal);
    let env = run_sequence(
        &model,
        &omega_plus(&model, 24.0),
        &TransitModel::default(),
        &InitialState::ground(1).unwrap(),
    )
    .unwrap();
    let s = &env.slots[0];
    assert!(s.plus >= 10.0 * s.minus, "plus {} minus {}", s.plus, s.minus);
    assert!(s.plus > 0.5, "plus {}", s.plus);
}

#[test]
fn omega_plus_from_minus_one_leaks_little_without_scattering() {
    let model = no_decay(SchemeKind::Minimal);
    let env = run_sequence(
        &model,
        &omega_plus(&model, 24.0),
        &TransitModel::default(),
        &InitialState::ground(-1).unwrap(),
    )
    .unwrap();
    assert!(env.slots[0].plus < 0.02, "leakage {}", env.slots[0].plus);
}

#[test]
fn zero_drive_gives_zero_flux() {
    let model = SourceModel::reference(SchemeKind::Extended);
    let program = PulseProgram::alternating(0.0, T_P, model.zeeman(), 1);
    let env = run_sequence(&model, &program, &TransitModel::default(), &InitialState::default()).unwrap();
    assert!(env.flux_plus.iter().chain(&env.flux_minus).all(|&f| f.abs() < 1e-12));
}

#[test]
fn per_pulse_output_bounded_by_one() {
    for kind in [SchemeKind::Minimal, SchemeKind::Extended] {
        let model = no_decay(kind);
        let program = PulseProgram::alternating(mhz_to_rad(24.0), T_P, model.zeeman(), 3);
        for mf in [-1, 1] {
            let env = run_sequence(
                &model,
                &program,
                &TransitModel::default(),
                &InitialState::ground(mf).unwrap(),
            )
            .unwrap();
            for s in &env.slots {
                assert!(
                    s.plus + s.minus <= 1.0 + 1e-6,
                    "{kind:?} mF={mf} slot {}: {}",
                    s.slot,
                    s.plus + s.minus
                );
                assert!(env.flux_plus.iter().chain(&env.flux_minus).all(|&f| f >= 0.0));
            }
        }
    }
}

#[test]
fn minimal_population_stays_in_manifold() {
    let model = SourceModel::reference(SchemeKind::Minimal);
    let program = PulseProgram::alternating(mhz_to_rad(24.0), T_P, model.zeeman(), 4);
    let out = run_sequence_with_state(&model, &program, &TransitModel::default(), &InitialState::default()).unwrap();
    let space = model.space();
    let inside: f64 = (0..model.scheme.levels().len())
        .map(|l| out.final_state.expectation(&space.atom_projector(l)).re)
        .sum();
    assert!((inside - 1.0).abs() < 1e-8, "{inside}");
}

#[test]
fn first_pulse_emission_grows_with_drive() {
    let model = SourceModel::reference(SchemeKind::Minimal);
    let initial = InitialState::ground(1).unwrap();
    let totals: Vec<f64> = [2.0, 4.0, 8.0]
        .iter()
        .map(|&w| {
            let env = run_sequence(&model, &omega_plus(&model, w), &TransitModel::default(), &initial).unwrap();
            env.slots[0].plus
        })
        .collect();
    assert!(totals[0] < totals[1] && totals[1] < totals[2], "{totals:?}");
}

#[test]
fn minimal_scheme_peaks_coincide() {
    let model = SourceModel::reference(SchemeKind::Minimal);
    let program = PulseProgram::alternating(mhz_to_rad(24.0), T_P, model.zeeman(), 1);
    let env = run_sequence(&model, &program, &TransitModel::default(), &InitialState::default()).unwrap();
    let p = peak_flux_times(&env);
    let step = T_P / model.samples_per_pulse as f64;
    let (a, b) = (p.plus.unwrap(), p.minus.unwrap());
    assert!((a - b).abs() < step, "plus {a:e} minus {b:e}");
}

#[test]
fn mirrored_start_gives_mirrored_slots() {
    let model = SourceModel::reference(SchemeKind::Minimal);
    let transit = TransitModel::default();
    let plus = PulseProgram::single(PumpPulse::linear(mhz_to_rad(18.0), T_P, 2.0 * model.zeeman()));
    let minus = PulseProgram::single(PumpPulse::linear(mhz_to_rad(18.0), T_P, -2.0 * model.zeeman()));
    let a = run_sequence(&model, &plus, &transit, &InitialState::ground(1).unwrap()).unwrap();
    let b = run_sequence(&model, &minus, &transit, &InitialState::ground(-1).unwrap()).unwrap();
    assert!((a.slots[0].plus - b.slots[0].minus).abs() < 1e-6);
    assert!((a.slots[0].minus - b.slots[0].plus).abs() < 1e-6);
}

#[test]
fn photon_cutoff_converged() {
    let base = SourceModel::reference(SchemeKind::Minimal);
    let mut wide = base.clone();
    wide.cavity = CavityConfig {
        n_max: 3,
        ..base.cavity.clone()
    };
    let program = PulseProgram::alternating(mhz_to_rad(24.0), T_P, base.zeeman(), 1);
    let t = TransitModel::default();
    let i = InitialState::default();
    let a = run_sequence(&base, &program, &t, &i).unwrap();
    let b = run_sequence(&wide, &program, &t, &i).unwrap();
    for (x, y) in a.slots.iter().zip(&b.slots) {
        assert!((x.plus - y.plus).abs() < 1e-3 && (x.minus - y.minus).abs() < 1e-3);
    }
}

#[test]
fn weaker_coupling_emits_less() {
    let model = SourceModel::reference(SchemeKind::Minimal);
    let program = omega_plus(&model, 24.0);
    let i = InitialState::ground(1).unwrap();
    let full = run_sequence(&model, &program, &TransitModel::constant(1.0), &i).unwrap();
    let weak = run_sequence(&model, &program, &TransitModel::constant(0.3), &i).unwrap();
    let none = run_sequence(&model, &program, &TransitModel::constant(0.0), &i).unwrap();
    assert!(weak.slots[0].plus < full.slots[0].plus);
    assert!(none.total_plus() + none.total_minus() < 1e-12);
    let avg = run_sequence_position_averaged(&model, &program, &TransitModel::constant(1.0), &i).unwrap();
    assert!(avg.slots[0].plus < full.slots[0].plus && avg.slots[0].plus > none.slots[0].plus);
}

#[test]
fn uncoupled_atom_never_conditions() {
    let model = SourceModel::reference(SchemeKind::Minimal);
    let program = PulseProgram::alternating(mhz_to_rad(24.0), T_P, model.zeeman(), 2);
    let c = conditional_probabilities(
        &model,
        &program,
        &TransitModel::constant(0.0),
        &InitialState::default(),
        200,
        3,
    )
    .unwrap();
    for e in [&c.plus_given_minus, &c.minus_given_plus] {
        assert_eq!(e.probability, 0.0);
        assert_eq!(e.successes, 0);
        assert!(e.low_statistics);
    }
}

#[test]
fn conditionals_reproducible() {
    let model = SourceModel::reference(SchemeKind::Minimal);
    let program = PulseProgram::alternating(mhz_to_rad(24.0), T_P, model.zeeman(), 2);
    let run = |seed| {
        conditional_probabilities(
            &model,
            &program,
            &TransitModel::default(),
            &InitialState::default(),
            64,
            seed,
        )
        .unwrap()
    };
    assert_eq!(run(9), run(9));
}
