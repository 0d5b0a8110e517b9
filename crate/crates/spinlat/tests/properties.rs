//! Property-based invariants of the dressed-lattice, open-system, and gate
//! machinery, checked over randomized parameters.

use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

use spinlat::gate::{
    blockade_protocol_state, process_fidelity, truth_table, BlockadeModel, BlockadeVariant,
    PairState,
};
use spinlat::lattice::{
    adiabatic_potentials, resonant_potentials, LatticeConfig, Qubit, StarkShifts,
};
use spinlat::lindblad::{
    build_loss_model, evolve, survival_probability, survival_probability_nojump,
    DensityMatrix, IntegratorParams, LossSystem,
};
use spinlat::register::ZeemanConfig;
use spinlat::units::hz_to_angular;
use spinlat::{C64, Species};

fn bare_config(rabi: f64, detuning: f64) -> LatticeConfig {
    LatticeConfig::symmetric(Species::sr87(), rabi, detuning, StarkShifts::default(), false)
}

fn stark_config(rabi: f64, detuning: f64, ground: f64, excited: f64) -> LatticeConfig {
    LatticeConfig {
        stark: StarkShifts {
            ground_peak: ground,
            excited_peak: excited,
        },
        include_offresonant: true,
        ..bare_config(rabi, detuning)
    }
}

fn spin_of(flag: bool) -> Qubit {
    if flag {
        Qubit::One
    } else {
        Qubit::Zero
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Without off-resonant shifts the diagonalized potentials must equal
    /// the closed form (-delta -+ sqrt(delta^2 + Omega(x)^2)) / 2 exactly
    /// up to rounding, for either spin and any position.
    #[test]
    fn potentials_match_closed_form(
        rabi_khz in 1.0f64..500.0,
        det_ratio in -2.0f64..2.0,
        frac in -2.0f64..2.0,
        spin_flag in any::<bool>(),
    ) {
        let rabi = hz_to_angular(rabi_khz * 1e3);
        let cfg = bare_config(rabi, det_ratio * rabi);
        let spin = spin_of(spin_flag);
        let x = frac * cfg.period();
        let sample = adiabatic_potentials(&cfg, spin, x).unwrap();
        let (lo, hi) = resonant_potentials(cfg.field(spin), x);
        let scale = rabi.max(cfg.field(spin).detuning.abs());
        prop_assert!((sample.v_lower - lo).abs() <= 1e-12 * scale);
        prop_assert!((sample.v_upper - hi).abs() <= 1e-12 * scale);
    }

    /// The two adiabatic branches never cross and the metastable admixture
    /// is a weight in [0, 1].
    #[test]
    fn branch_ordering_and_admixture_bounds(
        rabi_khz in 1.0f64..500.0,
        det_ratio in -2.0f64..2.0,
        ground_ratio in -0.5f64..0.5,
        excited_ratio in -0.5f64..0.5,
        phi in 0.0f64..PI,
        frac in 0.0f64..1.0,
        spin_flag in any::<bool>(),
    ) {
        let rabi = hz_to_angular(rabi_khz * 1e3);
        let cfg = stark_config(rabi, det_ratio * rabi, ground_ratio * rabi, excited_ratio * rabi)
            .with_relative_phase(phi);
        let spin = spin_of(spin_flag);
        let sample = adiabatic_potentials(&cfg, spin, frac * cfg.period()).unwrap();
        prop_assert!(sample.v_lower <= sample.v_upper);
        prop_assert!((0.0..=1.0).contains(&sample.admixture_e));
    }

    /// Everything is periodic in one lattice period.
    #[test]
    fn potentials_are_periodic(
        rabi_khz in 1.0f64..500.0,
        det_ratio in -2.0f64..2.0,
        phi in 0.0f64..PI,
        frac in 0.0f64..1.0,
        spin_flag in any::<bool>(),
    ) {
        let rabi = hz_to_angular(rabi_khz * 1e3);
        let cfg = stark_config(rabi, det_ratio * rabi, 0.25 * rabi, 0.75 * rabi)
            .with_relative_phase(phi);
        let spin = spin_of(spin_flag);
        let period = cfg.period();
        let x = frac * period;
        let here = adiabatic_potentials(&cfg, spin, x).unwrap();
        let there = adiabatic_potentials(&cfg, spin, x + period).unwrap();
        prop_assert!((here.v_lower - there.v_lower).abs() <= 1e-10 * rabi);
        prop_assert!((here.v_upper - there.v_upper).abs() <= 1e-10 * rabi);
        prop_assert!((here.admixture_e - there.admixture_e).abs() <= 1e-10);
    }

    /// At relative phase pi/2 the two standing-wave intensities sum to a
    /// constant, so the off-resonant shifts reduce to a uniform offset plus
    /// an effective detuning: the lower potential must equal the bare
    /// closed form evaluated at delta_eff = delta - (s_e - s_g), shifted
    /// by s_g.
    #[test]
    fn quadrature_phase_restores_closed_form(
        rabi_khz in 1.0f64..500.0,
        det_ratio in -2.0f64..2.0,
        ground_ratio in -0.5f64..0.5,
        excited_ratio in -0.5f64..0.5,
        frac in 0.0f64..1.0,
        spin_flag in any::<bool>(),
    ) {
        let rabi = hz_to_angular(rabi_khz * 1e3);
        let detuning = det_ratio * rabi;
        let s_g = ground_ratio * rabi;
        let s_e = excited_ratio * rabi;
        let cfg = stark_config(rabi, detuning, s_g, s_e).with_relative_phase(0.5 * PI);
        let spin = spin_of(spin_flag);
        let x = frac * cfg.period();
        let sample = adiabatic_potentials(&cfg, spin, x).unwrap();

        let delta_eff = detuning - (s_e - s_g);
        let local_rabi = cfg.field(spin).rabi_at(x);
        let expected = s_g + 0.5 * (-delta_eff - f64::hypot(delta_eff, local_rabi));
        let scale = rabi.max(detuning.abs()).max(s_g.abs()).max(s_e.abs());
        prop_assert!((sample.v_lower - expected).abs() <= 1e-10 * scale);
    }

    /// Zeeman resonance offsets are linear in both the projection and the
    /// field.
    #[test]
    fn zeeman_offsets_are_linear(
        field in 1.0f64..5000.0,
        scale in 0.1f64..4.0,
        m_twice in (-9i32..=9).prop_filter("half-integer ladder", |m| (m - 9) % 2 == 0),
    ) {
        use spinlat::register::HalfInt;
        let z1 = ZeemanConfig {
            species: Species::sr87(),
            field_gauss: field,
            qubit_pair: (HalfInt::new_twice(9), HalfInt::new_twice(7)),
        };
        let z2 = ZeemanConfig { field_gauss: scale * field, ..z1 };
        let m = HalfInt::new_twice(m_twice);
        let f1 = z1.resonance_offset(m).unwrap();
        let f2 = z2.resonance_offset(m).unwrap();
        prop_assert!((f2 - scale * f1).abs() <= 1e-9 * f1.abs().max(1.0));
        // Linearity in the projection: the offset is m times the
        // neighbour spacing.
        let per_step = z1.neighbour_spacing_hz();
        prop_assert!((f1 - m.value() * per_step).abs() <= 1e-9 * f1.abs().max(1.0));
    }

    /// The overlap fidelity ignores a global phase of the truth table.
    #[test]
    fn fidelity_is_global_phase_invariant(
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        alpha in 0.0f64..TAU,
    ) {
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        for (k, (re, im)) in entries.iter().enumerate() {
            m[k / 4][k % 4] = C64::new(*re, *im);
        }
        let phase = C64::new(0.0, alpha).exp();
        let mut rotated = m;
        for row in rotated.iter_mut() {
            for z in row.iter_mut() {
                *z *= phase;
            }
        }
        prop_assert!((process_fidelity(&m) - process_fidelity(&rotated)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// The protocol never gains norm, and the reported loss probability is
    /// exactly the norm deficit.
    #[test]
    fn protocol_norm_never_increases(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)
            .prop_filter("nonzero state", |v| {
                v.iter().map(|(re, im)| re * re + im * im).sum::<f64>() > 1e-3
            }),
        delta_ratio in -50.0f64..50.0,
        gamma_ratio in 0.0f64..200.0,
    ) {
        let rabi = TAU * 1e3;
        let model = BlockadeModel {
            rabi,
            variant: BlockadeVariant::Combined {
                delta: delta_ratio * rabi,
                gamma: gamma_ratio * rabi,
            },
        };
        let mut logical = [C64::new(0.0, 0.0); 4];
        for (slot, (re, im)) in logical.iter_mut().zip(coeffs.iter()) {
            *slot = C64::new(*re, *im);
        }
        let input = PairState::from_logical_amplitudes(&logical).unwrap();
        let trace = blockade_protocol_state(&model, input).unwrap();
        let norm = trace.final_state.norm_sqr();
        prop_assert!(norm <= 1.0 + 1e-10);
        prop_assert!((trace.final_state.loss_probability() - (1.0 - norm).max(0.0)).abs() <= 1e-10);
    }

    /// The combined variant with one mechanism switched off reproduces the
    /// single-mechanism variants bit for bit.
    #[test]
    fn combined_variant_degenerates_exactly(
        delta_ratio in -50.0f64..50.0,
        gamma_ratio in 0.0f64..200.0,
    ) {
        let rabi = TAU * 1e3;
        let shift_only = truth_table(&BlockadeModel {
            rabi,
            variant: BlockadeVariant::Interaction { delta: delta_ratio * rabi },
        }).unwrap();
        let shift_combined = truth_table(&BlockadeModel {
            rabi,
            variant: BlockadeVariant::Combined { delta: delta_ratio * rabi, gamma: 0.0 },
        }).unwrap();
        let loss_only = truth_table(&BlockadeModel {
            rabi,
            variant: BlockadeVariant::Lossy { gamma: gamma_ratio * rabi },
        }).unwrap();
        let loss_combined = truth_table(&BlockadeModel {
            rabi,
            variant: BlockadeVariant::Combined { delta: 0.0, gamma: gamma_ratio * rabi },
        }).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                prop_assert_eq!(shift_only[i][j], shift_combined[i][j]);
                prop_assert_eq!(loss_only[i][j], loss_combined[i][j]);
            }
        }
    }

    /// With the blockade switched off entirely, the protocol factorizes
    /// into independent single-atom pulse sequences.
    #[test]
    fn unblocked_protocol_is_a_tensor_product(
        q1_flag in any::<bool>(),
        q2_flag in any::<bool>(),
    ) {
        let rabi = TAU * 1e3;
        let model = BlockadeModel {
            rabi,
            variant: BlockadeVariant::Combined { delta: 0.0, gamma: 0.0 },
        };
        let (q1, q2) = (spin_of(q1_flag), spin_of(q2_flag));
        let trace = blockade_protocol_state(&model, PairState::from_logical(q1, q2)).unwrap();

        // Single-atom reference: the same three pulses on a 5-level atom.
        let single = |q: Qubit| -> [C64; 5] {
            let mut v = [C64::new(0.0, 0.0); 5];
            v[q.index()] = C64::new(1.0, 0.0);
            for (lo, hi, area) in [(0usize, 2usize, PI), (1, 3, TAU), (0, 2, PI)] {
                let (s, c) = (0.5 * area).sin_cos();
                let (a, b) = (v[lo], v[hi]);
                v[lo] = C64::new(c, 0.0) * a - C64::i() * s * b;
                v[hi] = -C64::i() * s * a + C64::new(c, 0.0) * b;
            }
            v
        };
        let left = single(q1);
        let right = single(q2);
        for (i, &l) in left.iter().enumerate() {
            for (j, &r) in right.iter().enumerate() {
                let expected = l * r;
                let got = trace.final_state.amplitudes[5 * i + j];
                prop_assert!((got - expected).norm() <= 1e-12);
            }
        }
    }

    /// Zeno suppression: deep in the strong-loss regime, raising the loss
    /// rate further increases survival.
    #[test]
    fn stronger_loss_survives_longer_in_zeno_regime(
        gamma_lo in 10.0f64..1e4,
        factor in 1.5f64..100.0,
    ) {
        let omega = 1.0;
        let t = TAU / omega;
        let survive = |gamma: f64| {
            survival_probability_nojump(
                &LossSystem { rabi: omega, detuning: 0.0, loss_rate: gamma },
                t,
            )
            .unwrap()
        };
        prop_assert!(survive(factor * gamma_lo) >= survive(gamma_lo) - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// The sink-model integration and the closed-form no-jump propagator
    /// are independent routes to the same survival probability.
    #[test]
    fn survival_routes_always_agree(
        det_ratio in -3.0f64..3.0,
        gamma_ratio in 0.0f64..30.0,
        periods in 0.2f64..2.0,
    ) {
        let omega = TAU * 1e3;
        let sys = LossSystem {
            rabi: omega,
            detuning: det_ratio * omega,
            loss_rate: gamma_ratio * omega,
        };
        let t = periods * TAU / omega;
        let via_sink = survival_probability(&sys, t, None).unwrap();
        let via_nojump = survival_probability_nojump(&sys, t).unwrap();
        prop_assert!((via_sink - via_nojump).abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Every sampled state along a master-equation trajectory stays a
    /// physical density matrix: unit trace, Hermitian, positive.
    #[test]
    fn trajectories_stay_physical(
        det_ratio in -2.0f64..2.0,
        gamma_ratio in 0.0f64..10.0,
    ) {
        let omega = TAU * 1e3;
        let sys = LossSystem {
            rabi: omega,
            detuning: det_ratio * omega,
            loss_rate: gamma_ratio * omega,
        };
        let model = build_loss_model(&sys, true).unwrap();
        let t = TAU / omega;
        let mut params = IntegratorParams::default_for(&sys, t);
        params.sample_stride = params.sample_stride.max(50);
        let traj = evolve(&model, &DensityMatrix::basis_state(3, 0).unwrap(), &params).unwrap();
        for (_, rho) in &traj.samples {
            prop_assert!((rho.trace() - 1.0).norm() <= 1e-8);
            prop_assert!(rho.hermiticity_defect() <= 1e-10);
            prop_assert!(rho.min_eigenvalue() >= -1e-8);
        }
    }
}
