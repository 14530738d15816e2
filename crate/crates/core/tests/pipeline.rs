//! End-to-end checks through the public API: plan, realize, evolve, score.

use std::f64::consts::PI;

use proptest::prelude::*;

use dotbus::entangle::{cluster_schedule, hardware_cz_schedule, DecoherenceStudy, LatticeSpec};
use dotbus::evolve::{BlockEngine, DecayModel, OdeOptions};
use dotbus::gates::phase::phase_distance;
use dotbus::gates::{cz_truth_table, plan_scz, smallest_k, GateOptions};
use dotbus::model::{validate_regime, DotParams, RegimeThresholds, Tier, HBAR};

const L0: f64 = 0.0024981;

fn dot_a() -> DotParams {
    DotParams::symmetric(0.1, 10.0, 200.0, 200.3)
}

fn dot_b_prime() -> DotParams {
    DotParams::symmetric(0.11, 10.0, 220.0, 220.3)
}

fn opts() -> OdeOptions {
    OdeOptions::with_tolerances(1e-10, 1e-12)
}

// [DERIVED] k = 5000 from √(2k) ≥ 100, δ₀ = λ₀√(2k), t = kπħ/δ₀
#[test]
fn planned_gate_time() {
    let s = plan_scz(2, &[vec![(0, 1)]], L0, 100.0).unwrap();
    assert_eq!(smallest_k(100.0), 5000);
    let expected = 5000.0 * PI * HBAR / (L0 * 100.0);
    assert!((s.t_end() - expected).abs() < 1e-9 * expected);
    assert!((s.t_end() - 41388.131946).abs() < 1e-5, "{}", s.t_end());
}

// [PAPER] the cross-validation hardware satisfies every regime condition
#[test]
fn cross_validation_pair_is_in_regime() {
    let r = validate_regime(&[dot_a(), dot_b_prime()], &RegimeThresholds::default());
    assert!(r.passed(), "{:?}", r.failures());
}

// [DERIVED] eff1 adds only O(λ/δ) photon corrections to the diagonal tier
#[test]
fn eff1_cz_tracks_eff_cz() {
    let s = plan_scz(2, &[vec![(0, 1)]], L0, 100.0).unwrap();
    let go = GateOptions::default();
    let eff = cz_truth_table(&s, Tier::Eff, None, &go).unwrap();
    let eff1 = cz_truth_table(&s, Tier::Eff1, Some(&[dot_a(), dot_b_prime()]), &go).unwrap();
    assert!(phase_distance(eff.conditional_phase, -PI) < 1e-9);
    assert!(phase_distance(eff1.conditional_phase, eff.conditional_phase) < 1e-2, "{}", eff1.conditional_phase);
    assert!(eff1.leakage < 1e-2);
}

// [TRIVIAL] without loss the decayed and reference registers coincide
#[test]
fn no_decay_is_unit_fidelity() {
    let hw = [dot_a(), dot_b_prime()];
    let study = DecoherenceStudy::new(&[hardware_cz_schedule(&hw).unwrap()], Some(&hw), BlockEngine::Exact, &opts()).unwrap();
    let f = study.evaluate(&DecayModel::none()).unwrap();
    assert!((f.fidelity - 1.0).abs() < 1e-12);
}

// [DERIVED] exact and Fock-block engines agree on a physical pair
#[test]
fn engines_agree_on_hardware_pair() {
    let hw = [dot_a(), dot_b_prime()];
    let s = [plan_scz(2, &[vec![(0, 1)]], 0.02, 30.0).unwrap()];
    let decay = DecayModel::from_gamma(0.002).unwrap();
    let exact = DecoherenceStudy::new(&s, Some(&hw), BlockEngine::Exact, &opts()).unwrap().evaluate(&decay).unwrap();
    let fock = DecoherenceStudy::new(&s, Some(&hw), BlockEngine::Fock { cutoff: 8 }, &opts()).unwrap().evaluate(&decay).unwrap();
    assert!((exact.fidelity - fock.fidelity).abs() < 1e-6, "{} vs {}", exact.fidelity, fock.fidelity);
}

fn cluster_fidelity(rows: usize, cols: usize, gamma: f64) -> f64 {
    let lattice = LatticeSpec { rows, cols };
    let s = cluster_schedule(lattice, L0, 100.0).unwrap();
    let hw = vec![dot_a(); lattice.num_qubits()];
    let study = DecoherenceStudy::new(&s, Some(&hw), BlockEngine::Exact, &opts()).unwrap();
    study.evaluate(&DecayModel::from_gamma(gamma).unwrap()).unwrap().fidelity
}

// [PAPER] a chain needs fewer layers than a square of the same size
#[test]
fn chain_beats_square() {
    let (chain, square) = (cluster_fidelity(1, 4, 0.05), cluster_fidelity(2, 2, 0.05));
    assert!(chain > square, "{chain} vs {square}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    // [DERIVED] an M×N lattice runs its N×M schedule on relabeled dots
    #[test]
    fn transposed_lattices_agree(rows in 1usize..=3, cols in 1usize..=3, gamma in 0.001f64..1.0) {
        prop_assume!(rows * cols >= 2);
        let a = cluster_fidelity(rows, cols, gamma);
        let b = cluster_fidelity(cols, rows, gamma);
        prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
        prop_assert!(a > 0.0 && a <= 1.0 + 1e-12);
    }
}
