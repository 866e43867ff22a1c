use super::*;
use crate::field::FieldMatrix;
use crate::rng::root_stream;
use crate::TOLERANCE;

fn params(q: u8, lambda: usize) -> FieldParams {
    FieldParams::new(q, lambda).unwrap()
}

fn span(p: FieldParams, rows: &[&[u8]]) -> Subspace {
    let rows: alloc::vec::Vec<alloc::vec::Vec<u8>> = rows.iter().map(|r| r.to_vec()).collect();
    Subspace::from_generators(&FieldMatrix::new(p, rows).unwrap())
}

#[test]
fn subspace_state_axis_span_has_two_amplitudes() {
    let p = params(2, 2);
    let a = span(p, &[&[1, 0]]);
    let s = subspace_state(&a).unwrap();
    let w = 1.0 / 2.0f64.sqrt();
    // members: (0,0) -> index 0, (1,0) -> index 2
    assert!((s.amplitudes()[0].re - w).abs() < TOLERANCE);
    assert!((s.amplitudes()[2].re - w).abs() < TOLERANCE);
    assert!(s.amplitudes()[1].norm() < TOLERANCE);
    assert!(s.amplitudes()[3].norm() < TOLERANCE);
}

#[test]
fn subspace_state_full_space_is_uniform() {
    let p = params(2, 2);
    let s = subspace_state(&Subspace::full(p)).unwrap();
    for amp in s.amplitudes() {
        assert!((amp.re - 0.5).abs() < TOLERANCE && amp.im.abs() < TOLERANCE);
    }
}

#[test]
fn subspace_state_random_dim3_in_z2_6() {
    let p = params(2, 6);
    let mut rng = root_stream(21);
    let a = Subspace::random(p, 3, &mut rng).unwrap();
    let s = subspace_state(&a).unwrap();
    let support: usize = s.amplitudes().iter().filter(|x| x.norm() > TOLERANCE).count();
    assert_eq!(support, 8);
    let w = 1.0 / 8.0f64.sqrt();
    for amp in s.amplitudes().iter().filter(|x| x.norm() > TOLERANCE) {
        assert!((amp.re - w).abs() < TOLERANCE);
    }
    let norm: f64 = s.amplitudes().iter().map(|x| x.norm_sqr()).sum();
    assert!((norm - 1.0).abs() < TOLERANCE);
}

#[test]
fn subspace_state_respects_cap() {
    // 7^24 far exceeds 2^20.
    let p = params(7, 24);
    let err = subspace_state(&Subspace::zero(p)).unwrap_err();
    assert!(matches!(err, SimError::CapExceeded { .. }));
}

#[test]
fn qft_on_single_bit_zero_is_hadamard() {
    let p = params(2, 1);
    let zero = PureState::basis_state(&FieldVector::zero(p)).unwrap();
    let h = qft(&zero, false);
    let w = 1.0 / 2.0f64.sqrt();
    assert!((h.amplitudes()[0].re - w).abs() < TOLERANCE);
    assert!((h.amplitudes()[1].re - w).abs() < TOLERANCE);
}

#[test]
fn qft_fixes_self_dual_subspace_state() {
    let p = params(2, 2);
    let a = span(p, &[&[1, 1]]);
    let s = subspace_state(&a).unwrap();
    let t = qft(&s, false);
    assert!(s.l2_distance(&t).unwrap() < TOLERANCE);
}

#[test]
fn qft_q3_zero_state_is_uniform() {
    let p = params(3, 1);
    let zero = PureState::basis_state(&FieldVector::zero(p)).unwrap();
    let t = qft(&zero, false);
    let w = 1.0 / 3.0f64.sqrt();
    for amp in t.amplitudes() {
        assert!((amp.re - w).abs() < TOLERANCE && amp.im.abs() < TOLERANCE);
    }
}

#[test]
fn qft_is_unitary_and_inverse_round_trips() {
    for (q, lambda) in [(2u8, 4usize), (3, 3), (5, 2)] {
        let p = params(q, lambda);
        let mut rng = root_stream(23 + q as u64);
        for _ in 0..5 {
            let s = PureState::random(p, &mut rng).unwrap();
            let t = qft(&s, false);
            let norm: f64 = t.amplitudes().iter().map(|x| x.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < TOLERANCE);
            let back = qft(&t, true);
            assert!(s.l2_distance(&back).unwrap() < TOLERANCE);
        }
    }
}

#[test]
fn fourier_dual_identity_across_fields() {
    for (q, lambda, dim) in [(2u8, 4usize, 2usize), (3, 4, 2), (5, 3, 1)] {
        let p = params(q, lambda);
        let mut rng = root_stream(29 + q as u64);
        for _ in 0..10 {
            let a = Subspace::random(p, dim, &mut rng).unwrap();
            let lhs = qft(&subspace_state(&a).unwrap(), false);
            let rhs = subspace_state(&a.dual()).unwrap();
            assert!(lhs.l2_distance(&rhs).unwrap() <= TOLERANCE);
        }
    }
}

#[test]
fn measure_membership_subspace_support_is_certain() {
    let p = params(2, 4);
    let mut rng = root_stream(31);
    let a = Subspace::random(p, 2, &mut rng).unwrap();
    let s = subspace_state(&a).unwrap();
    let out = measure_membership(&s, |v| a.contains(v).unwrap(), &mut rng);
    assert_eq!(out.outcome, 1);
    assert!((out.probability - 1.0).abs() < TOLERANCE);
    assert!(out.post_state.l2_distance(&s).unwrap() < TOLERANCE);
}

#[test]
fn measure_membership_outside_vector_is_certain_zero() {
    let p = params(2, 4);
    let mut rng = root_stream(32);
    let a = span(p, &[&[1, 0, 0, 0]]);
    let v = FieldVector::new(p, alloc::vec![0, 1, 0, 0]).unwrap();
    assert!(!a.contains(&v).unwrap());
    let s = PureState::basis_state(&v).unwrap();
    let out = measure_membership(&s, |x| a.contains(x).unwrap(), &mut rng);
    assert_eq!(out.outcome, 0);
    assert!((out.probability - 1.0).abs() < TOLERANCE);
}

#[test]
fn measure_membership_bell_like_state_splits_evenly() {
    // s = (|00⟩ + |11⟩)/√2, A = span{(0,1)}: (0,0) ∈ A, (1,1) ∉ A.
    let p = params(2, 2);
    let a = span(p, &[&[0, 1]]);
    let w = Complex64::new(1.0 / 2.0f64.sqrt(), 0.0);
    let mut amps = alloc::vec![Complex64::ZERO; 4];
    amps[0] = w; // (0,0)
    amps[3] = w; // (1,1)
    let s = PureState::from_amplitudes(p, amps).unwrap();

    let forced = measure_membership_forced(&s, |v| a.contains(v).unwrap(), 1).unwrap();
    assert!((forced.probability - 0.5).abs() < TOLERANCE);
    let zero = PureState::basis_state(&FieldVector::zero(p)).unwrap();
    assert!(forced.post_state.l2_distance(&zero).unwrap() < TOLERANCE);

    // Branch probabilities sum to 1.
    let other = measure_membership_forced(&s, |v| a.contains(v).unwrap(), 0).unwrap();
    assert!((forced.probability + other.probability - 1.0).abs() < TOLERANCE);
}

#[test]
fn forcing_a_zero_probability_branch_errors() {
    let p = params(2, 2);
    let a = Subspace::full(p);
    let s = subspace_state(&a).unwrap();
    let err = measure_membership_forced(&s, |v| a.contains(v).unwrap(), 0).unwrap_err();
    assert!(matches!(err, SimError::ZeroProbabilityBranch { .. }));
}

#[test]
fn projection_of_subspace_state_always_succeeds() {
    let p = params(2, 4);
    let mut rng = root_stream(33);
    let a = Subspace::random(p, 2, &mut rng).unwrap();
    let s = subspace_state(&a).unwrap();
    let out = project_onto_subspace_state(&s, &a, &mut rng).unwrap();
    assert!(out.success);
    assert!((out.success_probability - 1.0).abs() < TOLERANCE);
    assert!(out.post_state.approx_eq_up_to_phase(&s, TOLERANCE));
}

#[test]
fn projection_of_member_basis_state_has_inverse_size_probability() {
    let p = params(2, 6);
    let mut rng = root_stream(34);
    let a = Subspace::random(p, 3, &mut rng).unwrap();
    let member = a.random_element(&mut rng);
    let s = PureState::basis_state(&member).unwrap();
    // |⟨A|a⟩|² = 1/|A| = q^{-λ/2}, confirmed by direct inner product.
    let direct = subspace_state(&a).unwrap().inner_product(&s).unwrap().norm_sqr();
    assert!((direct - 0.125).abs() < TOLERANCE);
    let out = project_onto_subspace_state(&s, &a, &mut rng).unwrap();
    assert!((out.success_probability - 0.125).abs() < TOLERANCE);
}

#[test]
fn projection_of_orthogonal_coset_state_never_succeeds() {
    let p = params(2, 4);
    let mut rng = root_stream(35);
    let a = Subspace::random(p, 2, &mut rng).unwrap();
    let v = loop {
        let v = FieldVector::random(p, &mut rng);
        if !a.contains(&v).unwrap() {
            break v;
        }
    };
    let s = PureState::coset_state(&a, &v).unwrap();
    assert!(subspace_state(&a).unwrap().inner_product(&s).unwrap().norm() < TOLERANCE);
    let out = project_onto_subspace_state(&s, &a, &mut rng).unwrap();
    assert!(out.success_probability < TOLERANCE);
    assert!(!out.success);
}

#[test]
fn projector_pipeline_equals_overlap_times_subspace_state() {
    for (q, lambda, dim) in [(2u8, 4usize, 2usize), (3, 3, 1)] {
        let p = params(q, lambda);
        let mut rng = root_stream(61 + q as u64);
        for _ in 0..10 {
            let a = Subspace::random(p, dim, &mut rng).unwrap();
            let psi = PureState::random(p, &mut rng).unwrap();
            let target = subspace_state(&a).unwrap();
            let c = target.inner_product(&psi).unwrap();
            let pipeline = projector_pipeline_unnormalized(&psi, &a);
            for (i, out) in pipeline.iter().enumerate() {
                let expect = c * target.amplitudes()[i];
                assert!((out - expect).norm() <= TOLERANCE);
            }
        }
    }
}

#[test]
fn trace_distance_identical_orthogonal_and_overlapping() {
    let p = params(2, 3);
    let mut rng = root_stream(37);
    let s = PureState::random(p, &mut rng).unwrap();
    let x = DensityOperator::from_pure(&s);
    assert!(trace_distance(&x, &x).unwrap() < TOLERANCE);

    let v0 = PureState::basis_state(&FieldVector::from_index(p, 0)).unwrap();
    let v1 = PureState::basis_state(&FieldVector::from_index(p, 1)).unwrap();
    let d = trace_distance(&DensityOperator::from_pure(&v0), &DensityOperator::from_pure(&v1)).unwrap();
    assert!((d - 1.0).abs() < TOLERANCE);

    // Pure-state closed form √(1−|c|²) as the independent oracle.
    for _ in 0..10 {
        let u = PureState::random(p, &mut rng).unwrap();
        let w = PureState::random(p, &mut rng).unwrap();
        let c = u.inner_product(&w).unwrap().norm_sqr();
        let expected = (1.0 - c).max(0.0).sqrt();
        let got =
            trace_distance(&DensityOperator::from_pure(&u), &DensityOperator::from_pure(&w)).unwrap();
        assert!((got - expected).abs() < 1e-9, "got {}, expected {}", got, expected);
    }
}

#[test]
fn trace_distance_rejects_dimension_mismatch() {
    let a = DensityOperator::from_pure(
        &PureState::basis_state(&FieldVector::zero(params(2, 2))).unwrap(),
    );
    let b = DensityOperator::from_pure(
        &PureState::basis_state(&FieldVector::zero(params(2, 3))).unwrap(),
    );
    assert!(matches!(trace_distance(&a, &b), Err(SimError::DimensionMismatch)));
}

#[test]
fn partial_trace_of_product_state_is_first_factor() {
    let p = params(2, 2);
    let mut rng = root_stream(38);
    let u = PureState::random(p, &mut rng).unwrap();
    let v = PureState::random(p, &mut rng).unwrap();
    let s = BipartiteState::product(&u, &v).unwrap();
    let rho = partial_trace_second(&s);
    let expect = DensityOperator::from_pure(&u);
    assert!(trace_distance(&rho, &expect).unwrap() < TOLERANCE);
}

#[test]
fn partial_trace_of_maximally_entangled_pair_is_maximally_mixed() {
    let p = params(2, 2);
    let d = 4usize;
    let w = Complex64::new(0.5, 0.0);
    let mut amps = alloc::vec![Complex64::ZERO; d * d];
    for i in 0..d {
        amps[i * d + i] = w;
    }
    let s = BipartiteState::from_amplitudes(p, amps).unwrap();
    let rho = partial_trace_second(&s);
    for i in 0..d {
        for j in 0..d {
            let expect = if i == j { 0.25 } else { 0.0 };
            assert!((rho.entry(i, j).re - expect).abs() < TOLERANCE);
            assert!(rho.entry(i, j).im.abs() < TOLERANCE);
        }
    }
}

#[test]
fn partial_trace_of_random_state_has_unit_trace_and_is_psd() {
    let p = params(2, 3);
    let mut rng = root_stream(39);
    let s = BipartiteState::random(p, &mut rng).unwrap();
    let rho = partial_trace_second(&s);
    assert!((rho.trace().re - 1.0).abs() < TOLERANCE);
    rho.check_invariants().unwrap();
}

#[test]
fn conditional_second_register_product_state_accepts_certainly() {
    let p = params(2, 4);
    let mut rng = root_stream(40);
    let a = Subspace::random(p, 2, &mut rng).unwrap();
    let v = PureState::random(p, &mut rng).unwrap();
    let s = BipartiteState::product(&subspace_state(&a).unwrap(), &v).unwrap();
    let out = conditional_second_register(&s, &a, &mut rng).unwrap();
    assert!(out.accepted);
    assert!((out.accept_probability - 1.0).abs() < TOLERANCE);
    assert!(trace_distance(&out.post, &DensityOperator::from_pure(&v)).unwrap() < TOLERANCE);
}

#[test]
fn conditional_second_register_orthogonal_branches() {
    // (|A⟩⊗|u⟩ + |B⟩⊗|w⟩)/√2 with ⟨A|B⟩ = 0: accept probability 1/2,
    // post state |u⟩⟨u|.
    let p = params(2, 2);
    let a = span(p, &[&[1, 0]]);
    let b_coset = FieldVector::new(p, alloc::vec![0, 1]).unwrap();
    let a_state = subspace_state(&a).unwrap();
    let b_state = PureState::coset_state(&a, &b_coset).unwrap();
    assert!(a_state.inner_product(&b_state).unwrap().norm() < TOLERANCE);

    let mut rng = root_stream(41);
    let u = PureState::random(p, &mut rng).unwrap();
    let w = PureState::random(p, &mut rng).unwrap();
    let half = Complex64::new(1.0, 0.0);
    let s = BipartiteState::superposition(&[
        (half, a_state, u.clone()),
        (half, b_state, w),
    ])
    .unwrap();

    let out = conditional_second_register_forced(&s, &a).unwrap();
    assert!((out.accept_probability - 0.5).abs() < TOLERANCE);
    assert!(trace_distance(&out.post, &DensityOperator::from_pure(&u)).unwrap() < TOLERANCE);
}

#[test]
fn conditional_accept_probability_matches_monte_carlo() {
    let p = params(2, 3);
    let mut rng = root_stream(42);
    let s = BipartiteState::random(p, &mut rng).unwrap();
    let a = Subspace::random(p, 1, &mut rng).unwrap();
    let (analytic, _) = project_first_register(&s, &a).unwrap();

    let trials = 100_000u32;
    let mut hits = 0u32;
    for _ in 0..trials {
        let out = conditional_second_register(&s, &a, &mut rng).unwrap();
        if out.accepted {
            hits += 1;
        }
    }
    let freq = hits as f64 / trials as f64;
    let se = (analytic * (1.0 - analytic) / trials as f64).sqrt();
    assert!(
        (freq - analytic).abs() <= 3.0 * se,
        "freq {} vs analytic {} (se {})",
        freq,
        analytic,
        se
    );
}

#[test]
fn forced_conditional_on_zero_probability_errors() {
    let p = params(2, 2);
    let a = span(p, &[&[1, 0]]);
    let v = FieldVector::new(p, alloc::vec![0, 1]).unwrap();
    let orth = PureState::coset_state(&a, &v).unwrap();
    let mut rng = root_stream(43);
    let other = PureState::random(p, &mut rng).unwrap();
    let s = BipartiteState::product(&orth, &other).unwrap();
    assert!(matches!(
        conditional_second_register_forced(&s, &a),
        Err(SimError::ZeroProbabilityBranch { .. })
    ));
}

#[test]
fn gentle_bound_deterministic_accept_gives_zero_distance() {
    let p = params(2, 3);
    let mut rng = root_stream(44);
    let a = Subspace::random(p, 1, &mut rng).unwrap();
    let s = subspace_state(&a).unwrap();
    let check = gentle_measurement_bound_check(&s, &s).unwrap();
    assert!(check.epsilon.abs() < TOLERANCE);
    assert!(check.trace_distance < TOLERANCE);
}

#[test]
fn gentle_bound_for_tilted_state() {
    // s = cos θ |A⟩ + sin θ |v+A⟩ with v ∉ A: ε = sin²θ, distance ≤ sin θ.
    let p = params(2, 4);
    let mut rng = root_stream(45);
    let a = Subspace::random(p, 2, &mut rng).unwrap();
    let v = loop {
        let v = FieldVector::random(p, &mut rng);
        if !a.contains(&v).unwrap() {
            break v;
        }
    };
    let theta: f64 = 0.3;
    let a_state = subspace_state(&a).unwrap();
    let coset = PureState::coset_state(&a, &v).unwrap();
    let amps: alloc::vec::Vec<Complex64> = a_state
        .amplitudes()
        .iter()
        .zip(coset.amplitudes())
        .map(|(x, y)| x * theta.cos() + y * theta.sin())
        .collect();
    let s = PureState::from_amplitudes(p, amps).unwrap();

    let check = gentle_measurement_bound_check(&s, &a_state).unwrap();
    assert!((check.epsilon - theta.sin().powi(2)).abs() < TOLERANCE);
    assert!(check.trace_distance <= theta.sin() + TOLERANCE);
}

#[test]
fn gentle_bound_holds_over_random_cases() {
    let p = params(2, 3);
    let mut rng = root_stream(46);
    for _ in 0..100 {
        let s = PureState::random(p, &mut rng).unwrap();
        let t = PureState::random(p, &mut rng).unwrap();
        // Errors only when the bound is violated; unwrap is the assertion.
        gentle_measurement_bound_check(&s, &t).unwrap();
        let a = Subspace::random(p, 1, &mut rng).unwrap();
        gentle_measurement_bound_check_membership(&s, |v| a.contains(v).unwrap()).unwrap();
    }
}
