mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use chargecav::device::{ej_effective, n_bar_for_bias};
use chargecav::gates::cnot::{pair_vacuum_indices, CnotVariant, VERIFIED_Z_ANGLE};
use chargecav::gates::phase::{conditional_phase, phase_nontriviality, wrap_angle};
use chargecav::gates::report::cz_matrix;
use chargecav::gates::schedule::{
    run_schedule, sideband_pulse, swap_pulse, InitialState, Method, PulseSegment, Schedule,
};
use chargecav::gates::sideband::{r_sideband, swap_qubit_photon, swap_qubit_qubit, swap_qubit_qubit_literal};
use chargecav::gates::single::u_from_params;
use chargecav::gates::{cnot_beta_sweep, cnot_composition};
use chargecav::hamiltonian::{ApproximationLevel, Frame, Sideband};
use chargecav::linalg::metrics::{extract_block, makhlin_invariants, phase_invariant_fidelity};
use chargecav::sampling::{bloch_grid, Halton, BLOCH_GRID_SEED};
use chargecav::{Error, Operator, StateVector, C64};
use common::*;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

#[test]
fn sideband_zero_angle_is_identity() {
    let d = device(vec![qubit(4.0, 0.3, 0.2, 0.5, 0.1)], 0.05, 4, None);
    for branch in [Sideband::Blue, Sideband::Red] {
        let u = r_sideband(0.0, 0.4, branch, 0, &d).unwrap();
        assert!(max_diff(&u, &Operator::identity(8)) < 1e-15);
    }
}

#[test]
fn blue_pi_pulse_block_oracle() {
    let d = device(vec![qubit(4.0, 0.3, 0.2, 0.5, 0.1)], 0.05, 4, None);
    let s = d.space().unwrap();
    let u = r_sideband(PI, 0.0, Sideband::Blue, 0, &d).unwrap();
    // exp(−i(π/2)σy) on {|0,1⟩, |1,0⟩} sends |0,1⟩ to +|1,0⟩.
    let amp = u.get(s.index(&[1], 0), s.index(&[0], 1));
    assert!((amp - one()).norm() < 1e-14);
}

#[test]
fn red_full_turn_flips_sign_in_lowest_block() {
    let d = device(vec![qubit(4.0, 0.3, 0.2, 0.5, 0.1)], 0.05, 4, None);
    let s = d.space().unwrap();
    let u = r_sideband(2.0 * PI, 0.7, Sideband::Red, 0, &d).unwrap();
    for (bit, n) in [(0u8, 0usize), (1, 1)] {
        let i = s.index(&[bit], n);
        assert!((u.get(i, i) + one()).norm() < 1e-14);
    }
}

#[test]
fn red_pi_pulse_moves_ground_charge_state_into_photon_sector() {
    let d = device(
        vec![qubit(4.0, 0.3, 0.2, 0.5, 0.1), qubit(4.0, 0.3, 0.2, 0.5, 0.1)],
        0.05,
        4,
        None,
    );
    let s = d.space().unwrap();
    for beta in [0.0, 0.9] {
        let u = r_sideband(PI, beta, Sideband::Red, 0, &d).unwrap();
        let from = s.index(&[0, 0], 0);
        let photon_pop: f64 = (0..s.dim())
            .filter(|&r| s.photons(r) > 0)
            .map(|r| u.get(r, from).norm_sqr())
            .sum();
        assert!((photon_pop - 1.0).abs() < 1e-14);
        assert!((u.get(s.index(&[1, 0], 1), from).norm_sqr() - 1.0).abs() < 1e-14);
        // |1_j, 0⟩ is dark for σ⁺a†.
        let dark = s.index(&[1, 0], 0);
        assert!((u.get(dark, dark) - one()).norm() < 1e-14);
    }
}

fn cnot_device() -> chargecav::device::DeviceModel {
    device(
        vec![qubit(4.0, 0.3, 0.2, 0.5, 0.15), qubit(4.0, 0.3, 0.2, 0.5, 0.35)],
        0.05,
        4,
        None,
    )
}

#[test]
fn verified_cnot_is_cnot_for_every_beta() {
    let d = cnot_device();
    let sweep = cnot_beta_sweep(0, 1, &d, CnotVariant::Verified, &[0.0, PI / 4.0, PI / 2.0]).unwrap();
    for (beta, r) in sweep {
        assert!(
            r.invariant_distance(C64::new(0.0, 0.0), 1.0) < 1e-6,
            "β = {beta}: {r:?}"
        );
        assert!(r.leakage < 1e-8);
        assert!((r.fidelity - 1.0).abs() < 1e-12, "β = {beta}: {}", r.fidelity);
    }
    assert!((VERIFIED_Z_ANGLE - PI * (1.0 - FRAC_1_SQRT_2)).abs() < 1e-15);
}

#[test]
fn verified_cnot_reversed_roles() {
    let d = cnot_device();
    let (u, r) = cnot_composition(1, 0, &d, CnotVariant::Verified).unwrap();
    assert!((r.fidelity - 1.0).abs() < 1e-12);
    assert!(u.is_unitary(1e-10));
}

/// Regression baseline for the composition with the printed phase angles.
#[test]
fn literal_cnot_report_baseline() {
    let d = cnot_device();
    let sweep = cnot_beta_sweep(0, 1, &d, CnotVariant::Literal, &[0.0, PI / 4.0, PI / 2.0]).unwrap();
    for (_, r) in &sweep {
        assert!(r.leakage < 1e-8);
        assert!(r.invariant_distance(C64::new(0.0, 0.0), 1.0) < 1e-6);
        assert!((r.fidelity - LITERAL_CNOT_FIDELITY).abs() < 1e-6, "{}", r.fidelity);
    }
}

const LITERAL_CNOT_FIDELITY: f64 = 0.277_992_079_836_893;

#[test]
fn cnot_rejects_small_fock_space_and_same_qubit() {
    let d = device(vec![qubit(4.0, 0.3, 0.2, 0.5, 0.15); 2], 0.05, 2, None);
    assert!(cnot_composition(0, 1, &d, CnotVariant::Verified).is_err());
    assert!(cnot_composition(0, 0, &cnot_device(), CnotVariant::Verified).is_err());
}

fn cphase_device(n1: f64, n2: f64, ec: f64) -> chargecav::device::DeviceModel {
    device(
        vec![qubit(4.0, 0.3, 0.3, n1, 0.5), qubit(5.0, 0.3, 0.3, n2, 1.5)],
        0.05,
        2,
        Some(ec),
    )
}

#[test]
fn conditional_phase_identity_at_zero_time() {
    let u = conditional_phase(0.0, &cphase_device(0.3, 0.8, 0.7)).unwrap();
    assert!(max_diff(&u, &Operator::identity(4)) < 1e-16);
}

#[test]
fn conditional_phase_nontriviality_is_capacitive_only() {
    let mut seq = Halton::new(4, 41);
    for _ in 0..50 {
        let p = seq.next_in(&[(-1.0, 2.0), (-1.0, 2.0), (0.0, 3.0), (0.0, 10.0)]);
        let d = cphase_device(p[0], p[1], p[2]);
        let u = conditional_phase(p[3], &d).unwrap();
        let got = phase_nontriviality(&u).unwrap();
        let want = wrap_angle(-p[2] * p[3]);
        let err = wrap_angle(got - want).abs();
        assert!(err < 1e-10, "{got} vs {want}");
    }
}

#[test]
fn conditional_phase_at_pi_is_cz_class() {
    let ec = 0.8;
    let d = cphase_device(0.5, 0.5, ec);
    let u = conditional_phase(PI / ec, &d).unwrap();
    let (g1, g2) = makhlin_invariants(&u).unwrap();
    assert!(g1.norm() < 1e-10 && (g2 - 1.0).abs() < 1e-10);
    let (cz_g1, cz_g2) = makhlin_invariants(&cz_matrix()).unwrap();
    assert!((g1 - cz_g1).norm() < 1e-10 && (g2 - cz_g2).abs() < 1e-10);
}

#[test]
fn conditional_phase_preconditions() {
    let mut d = cphase_device(0.5, 0.5, 0.8);
    d.qubits[0].flux_ratio = 0.4;
    assert!(conditional_phase(1.0, &d).is_err());
    let mut d = cphase_device(0.5, 0.5, 0.8);
    d.capacitive_ec = None;
    assert!(conditional_phase(1.0, &d).is_err());
    let mut d = cphase_device(0.5, 0.5, 0.8);
    d.qubits[1].e_j2 = 0.1;
    assert!(conditional_phase(1.0, &d).is_err());
}

fn ideal_swap_device(n_qubits: usize) -> chargecav::device::DeviceModel {
    device(vec![qubit(4.0, 0.3, 0.3, 0.5, 0.2); n_qubits], 0.05, 4, None)
}

#[test]
fn swap_qubit_photon_examples() {
    let d = ideal_swap_device(1);
    let s = d.space().unwrap();
    for n in [1, 2, -1] {
        let u = swap_qubit_photon(0, n, &d).unwrap();
        assert!(u.is_unitary(1e-10));
        let i00 = s.index(&[0], 0);
        assert!((u.get(i00, i00) - one()).norm() < 1e-14);
        let moved = u.get(s.index(&[0], 1), s.index(&[1], 0));
        assert!((moved - one()).norm() < 1e-13, "n = {n}: {moved}");
    }
}

#[test]
fn swap_qubit_photon_bloch_grid() {
    let d = ideal_swap_device(1);
    let s = d.space().unwrap();
    let u = swap_qubit_photon(0, 1, &d).unwrap();
    for (a, b) in bloch_grid(20, BLOCH_GRID_SEED) {
        let input = superpose(&s, &[(a, &[0], 0), (b, &[1], 0)]);
        let target = superpose(&s, &[(a, &[0], 0), (b, &[0], 1)]);
        let f = u.apply(&input).unwrap().fidelity(&target).unwrap();
        assert!(f >= 1.0 - 1e-9);
    }
}

#[test]
fn swap_requires_coupling() {
    let d = device(vec![qubit(4.0, 0.3, 0.3, 0.5, 0.5)], 0.05, 4, None);
    assert!(matches!(
        swap_qubit_photon(0, 1, &d),
        Err(Error::Decoupled { qubit: 0 })
    ));
}

#[test]
fn swap_qubit_qubit_examples() {
    let d = ideal_swap_device(2);
    let s = d.space().unwrap();
    // Qubit order (j = 0, k = 1).
    let u = swap_qubit_qubit(0, 1, &d).unwrap();
    assert!(u.is_unitary(1e-10));
    let vac = s.index(&[0, 0], 0);
    assert!((u.get(vac, vac) - one()).norm() < 1e-13);
    let moved = u.get(s.index(&[1, 0], 0), s.index(&[0, 1], 0));
    assert!((moved.norm() - 1.0).abs() < 1e-13);
    for (a, b) in bloch_grid(20, BLOCH_GRID_SEED) {
        let input = superpose(&s, &[(a, &[0, 0], 0), (b, &[0, 1], 0)]);
        let target = superpose(&s, &[(a, &[0, 0], 0), (b, &[1, 0], 0)]);
        let f = u.apply(&input).unwrap().fidelity(&target).unwrap();
        assert!(f >= 1.0 - 1e-9);
    }
}

#[test]
fn literal_qubit_swap_leaves_relative_sign() {
    let d = ideal_swap_device(2);
    let s = d.space().unwrap();
    let u = swap_qubit_qubit_literal(0, 1, &d).unwrap();
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let input = superpose(&s, &[(h, &[0, 0], 0), (h, &[0, 1], 0)]);
    let plus = superpose(&s, &[(h, &[0, 0], 0), (h, &[1, 0], 0)]);
    let minus = superpose(&s, &[(h, &[0, 0], 0), (-h, &[1, 0], 0)]);
    let out = u.apply(&input).unwrap();
    assert!(out.fidelity(&plus).unwrap() < 1e-12);
    assert!((out.fidelity(&minus).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn schedule_reproduces_single_qubit_rotation() {
    // H_int at g = 0 carries half the Josephson energy of the decoupled-qubit form.
    let q = qubit(4.0, 0.3, 0.2, 0.7, 0.2);
    let doubled = qubit(4.0, 0.6, 0.4, 0.7, 0.2);
    let d = device(vec![doubled], 0.0, 3, None);
    let t = 2.3;
    let seg = PulseSegment::new(t, Frame::Lab, ApproximationLevel::Exact).with_control(0, 0.7, 0.2);
    let (out, diag) = run_schedule(&Schedule::new(vec![seg]), &d).unwrap();
    let u = out.propagator().unwrap();
    let s = d.space().unwrap();
    let (block, leak) = extract_block(u, &[s.index(&[0], 0), s.index(&[1], 0)]).unwrap();
    assert!(leak < 1e-14);
    let block = block.scale(C64::from_polar(1.0, 0.5 * t));
    let err = max_diff(&block, &u_from_params(&q, t).unwrap());
    assert!(
        err < 1e-9,
        "{err:e}\n{}\n{}",
        block.matrix(),
        u_from_params(&q, t).unwrap().matrix()
    );
    assert!(diag.norm_drift < 1e-10);
    assert_eq!(diag.segments.len(), 1);
}

#[test]
fn idle_schedule_is_identity_in_rotating_frame() {
    let d = device(vec![qubit(4.0, 0.3, 0.3, 0.5, 0.5); 2], 0.05, 3, None);
    let segs = vec![
        PulseSegment::new(3.0, Frame::Rotating, ApproximationLevel::Exact),
        PulseSegment::new(1.7, Frame::Rotating, ApproximationLevel::LambDickeFirstOrder),
        PulseSegment::new(2.0, Frame::Rotating, ApproximationLevel::SidebandRwa),
    ];
    let (out, _) = run_schedule(&Schedule::new(segs), &d).unwrap();
    assert!(max_diff(out.propagator().unwrap(), &Operator::identity(d.space().unwrap().dim())) < 1e-10);
}

fn simulated_swap_worst_fidelity(g: f64, n_ph: usize) -> f64 {
    let d = swap_device(1, g, n_ph);
    let s = d.space().unwrap();
    let seg = swap_pulse(&d, 0, 1, Frame::Rotating, ApproximationLevel::Exact).unwrap();
    let (out, _) = run_schedule(&Schedule::new(vec![seg]), &d).unwrap();
    let u = out.propagator().unwrap();
    bloch_grid(20, BLOCH_GRID_SEED)
        .into_iter()
        .map(|(a, b)| {
            let input = superpose(&s, &[(a, &[0], 0), (b, &[1], 0)]);
            let target = superpose(&s, &[(a, &[0], 0), (b, &[0], 1)]);
            u.apply(&input).unwrap().fidelity(&target).unwrap()
        })
        .fold(1.0, f64::min)
}

#[test]
fn simulated_swap_pulse_meets_mapping_fidelity() {
    let f = simulated_swap_worst_fidelity(0.05, 6);
    assert!(f >= 0.995, "{f}");
}

#[test]
fn swap_infidelity_grows_with_coupling() {
    let infid: Vec<f64> = [0.02, 0.05, 0.1, 0.2]
        .iter()
        .map(|&g| 1.0 - simulated_swap_worst_fidelity(g, 6))
        .collect();
    eprintln!("swap infidelity vs g: {infid:?}");
    assert!(infid.windows(2).all(|w| w[1] > w[0]), "{infid:?}");
}

#[test]
fn sideband_pulse_matches_ideal_rotation_at_rwa() {
    let d = device(vec![qubit(2.0, 0.3, 0.2, 0.5, 0.3)], 0.05, 4, None);
    let seg = sideband_pulse(
        &d,
        0,
        Sideband::Red,
        PI,
        Frame::Rotating,
        ApproximationLevel::SidebandRwa,
    )
    .unwrap();
    let (out, diag) = run_schedule(&Schedule::new(vec![seg]), &d).unwrap();
    let beta = chargecav::device::beta_mixing(&d.qubits[0]).unwrap();
    let ideal = r_sideband(PI, beta, Sideband::Red, 0, &d).unwrap();
    let f = phase_invariant_fidelity(out.propagator().unwrap(), &ideal).unwrap();
    assert!((f - 1.0).abs() < 1e-12);
    let r = diag.segments[0].resonances[0];
    assert_eq!(r.nearest, chargecav::gates::schedule::Resonance::Red);
    assert!(r.residual.abs() < 1e-12);
}

#[test]
fn tdse_method_agrees_with_expm() {
    let d = device(vec![qubit(4.0, 0.3, 0.2, 0.5, 0.3)], 0.1, 4, None);
    let n_bar = n_bar_for_bias(4.0, -0.5);
    let seg = PulseSegment::new(40.0, Frame::Rotating, ApproximationLevel::Exact).with_control(0, n_bar, 0.3);
    let base =
        Schedule::new(vec![seg.clone(), seg.with_control(0, 0.6, 0.1)]).with_initial_state(InitialState::Basis {
            qubits: vec![1],
            photons: 0,
        });
    let (a, _) = run_schedule(&base, &d).unwrap();
    let (b, diag) = run_schedule(&base.clone().with_method(Method::Tdse { tol: 1e-10 }), &d).unwrap();
    let (a, b) = (a.state().unwrap(), b.state().unwrap());
    assert!(a.fidelity(b).unwrap() > 1.0 - 1e-8);
    assert!(diag.norm_drift < 1e-8);
}

#[test]
fn schedule_json_round_trip_and_errors() {
    let d = ideal_swap_device(2);
    let s = Schedule::new(vec![
        PulseSegment::new(1.0, Frame::Lab, ApproximationLevel::Exact).with_control(1, 0.2, 0.3),
        PulseSegment::new(2.0, Frame::Rotating, ApproximationLevel::SidebandRwa),
    ])
    .with_initial_state(InitialState::Amplitudes(
        (0..d.space().unwrap().dim())
            .map(|i| if i == 0 { [1.0, 0.0] } else { [0.0, 0.0] })
            .collect(),
    ));
    let back = Schedule::from_json_str(&s.to_json()).unwrap();
    assert_eq!(back, s);
    assert!(run_schedule(&back, &d).is_ok());

    let bad = Schedule::new(vec![
        PulseSegment::new(1.0, Frame::Lab, ApproximationLevel::Exact),
        PulseSegment::new(-1.0, Frame::Lab, ApproximationLevel::Exact),
    ]);
    match run_schedule(&bad, &d) {
        Err(Error::Segment { segment: 1, .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
    assert!(run_schedule(&Schedule::new(vec![]), &d).is_err());
    let parsed = Schedule::from_json_str(
        r#"{"segments":[{"duration":1.5,"settings":{"0":{"n_bar":0.5,"flux_ratio":0.2}},"frame":"lab","level":"sideband_rwa"}],
            "initial_state":{"basis":{"qubits":[1,0],"photons":0}},"method":{"tdse":{"tol":1e-9}}}"#,
    )
    .unwrap();
    assert_eq!(parsed.segments[0].settings[&0].flux_ratio, 0.2);
    assert!(Schedule::from_json_str(r#"{"segments":[],"bogus":1}"#).is_err());
}

#[test]
fn ideal_gates_are_unitary() {
    let d = cnot_device();
    let mut seq = Halton::new(2, 3);
    for _ in 0..5 {
        let p = seq.next_in(&[(-PI, PI), (0.0, PI)]);
        for b in [Sideband::Blue, Sideband::Red] {
            assert!(r_sideband(p[0], p[1], b, 1, &d).unwrap().is_unitary(1e-10));
        }
    }
    let keep = pair_vacuum_indices(&d.space().unwrap(), 0, 1).unwrap();
    let (u, _) = cnot_composition(0, 1, &d, CnotVariant::Literal).unwrap();
    assert!(u.is_unitary(1e-10));
    assert_eq!(keep.len(), 4);
    let _ = StateVector::basis(4, 0).unwrap();
    let _ = ej_effective(&d.qubits[0]);
}
