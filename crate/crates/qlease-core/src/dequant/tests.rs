use super::*;
use crate::circuits::is_functionally_equal;
use crate::field::FieldParams;
use crate::rng::{root_stream, substream};
use crate::sim::{trace_distance, DensityOperator};
use crate::TOLERANCE;

fn fresh_family(seed: u64, lambda_bits: usize) -> (DequantContext, DequantumizableCircuit) {
    let mut rng = root_stream(seed);
    let mut ctx = DequantContext::new();
    let circuit = ctx.sample_family(lambda_bits, OracleMode::Ideal, &mut rng).unwrap();
    (ctx, circuit)
}

#[test]
fn fhe_round_trips_many_messages() {
    let mut rng = root_stream(120);
    let mut fhe = ToyFhe::new();
    let kp = fhe.keygen(&mut rng);
    for i in 0..10_000u64 {
        let len = 1 + (i % 80) as usize;
        let msg = Bits::random(len, &mut rng);
        let ct = fhe.encrypt(kp.pk, &msg, i).unwrap();
        assert_eq!(fhe_decrypt(&kp.sk, &ct).unwrap(), msg);
    }
}

#[test]
fn fhe_rejects_unknown_keys_and_tampering() {
    let mut rng = root_stream(121);
    let mut fhe = ToyFhe::new();
    let kp = fhe.keygen(&mut rng);
    assert!(matches!(
        fhe.encrypt(kp.pk ^ 1, &Bits::zeros(4), 0),
        Err(DequantError::UnknownKey { .. })
    ));
    let ct = fhe.encrypt(kp.pk, &Bits::from_u64(0b1011, 4), 7).unwrap();
    let mut bad = ct.clone();
    let mut sealed = bad.sealed.clone();
    sealed.set(100, 1 - sealed.get(100));
    bad.sealed = sealed;
    assert!(matches!(fhe_decrypt(&kp.sk, &bad), Err(DequantError::TagFailure)));
}

#[test]
fn fhe_eval_with_identity_evaluator_preserves_plaintext() {
    let mut rng = root_stream(122);
    let mut fhe = ToyFhe::new();
    let kp = fhe.keygen(&mut rng);
    let msg = Bits::random(12, &mut rng);
    let ct = fhe.encrypt(kp.pk, &msg, 1).unwrap();
    let ct2 = fhe.eval(&mut |pt| Ok(pt.clone()), &ct, 2).unwrap();
    assert_eq!(fhe_decrypt(&kp.sk, &ct2).unwrap(), msg);
    assert_ne!(ct.sealed, ct2.sealed);
}

#[test]
fn family_member_branches_match_definition() {
    let (_, circuit) = fresh_family(123, 6);
    // Branch 1: ct₁ | O-token | pk.
    let out0 = circuit.eval(&Bits::zeros(6)).unwrap();
    assert_eq!(out0.len(), circuit.m());
    let token_start = ToyCiphertext::bit_len(6);
    assert_eq!(out0.slice(token_start, token_start + 64).to_u64(), circuit.lo().token());
    assert_eq!(out0.slice(circuit.m() - 64, circuit.m()).to_u64(), circuit.pk());

    // Branch 2: the accepting point returns the padded b.
    assert_eq!(
        circuit.eval(circuit.a()).unwrap(),
        circuit.b().padded_to(circuit.m())
    );

    // Branch 3: everything else is the zero string (whp over x).
    let mut rng = root_stream(124);
    for _ in 0..10_000 {
        let x = Bits::random(6, &mut rng);
        if x.is_zero() || x == *circuit.a() {
            continue;
        }
        assert!(circuit.eval(&x).unwrap().is_zero());
    }
}

#[test]
fn family_trigger_never_collides_with_zero() {
    for seed in 0..50u64 {
        let (_, circuit) = fresh_family(300 + seed, 4);
        assert!(!circuit.a().is_zero());
    }
}

#[test]
fn extraction_recovers_parameters_componentwise_and_functionally() {
    let mut rng = root_stream(125);
    for trial in 0..25u64 {
        let mut ctx = DequantContext::new();
        let circuit = ctx.sample_family(6, OracleMode::Ideal, &mut rng).unwrap();
        let program = DirectProgram { circuit: &circuit };
        let mut implementation = QuantumImplementation::new(program, substream(125, trial));

        let extraction = attack_extract(&mut implementation, &ctx, &mut rng).unwrap();
        let rebuilt = &extraction.circuit;

        // Componentwise equality of (a, b, r, pk, O).
        assert_eq!(rebuilt.a(), circuit.a());
        assert_eq!(rebuilt.b(), circuit.b());
        assert_eq!(rebuilt.r(), circuit.r());
        assert_eq!(rebuilt.pk(), circuit.pk());
        assert_eq!(rebuilt.lo(), circuit.lo());
        assert_eq!(rebuilt, &circuit);

        // Exhaustive functional equality at n = 6.
        let ea = |x: &Bits| circuit.eval(x).unwrap();
        let eb = |x: &Bits| rebuilt.eval(x).unwrap();
        assert!(is_functionally_equal(ea, eb, 6).unwrap());

        // Non-black-box discipline: only the zero string was ever queried
        // directly, and in particular never the accepting point.
        let log = implementation.log();
        assert!(log.only_zero_direct_queries());
        assert!(log.direct_queries().iter().all(|x| x != circuit.a()));
        assert!(log.homomorphic_evals() >= 1);
        assert!(extraction.recovered_state_ok);
    }
}

#[test]
fn extraction_with_noise_fails_at_the_noise_rate() {
    let mut rng = root_stream(126);
    let trials = 1500;
    let mut misses = 0;
    for trial in 0..trials {
        let mut ctx = DequantContext::new();
        let circuit = ctx.sample_family(6, OracleMode::Ideal, &mut rng).unwrap();
        let program = DirectProgram { circuit: &circuit };
        let mut implementation = QuantumImplementation::with_noise(
            program,
            0.3,
            circuit.a().clone(),
            substream(126, trial),
        );
        match attack_extract(&mut implementation, &ctx, &mut rng) {
            Ok(_) => {}
            Err(DequantError::LockMiss) => misses += 1,
            Err(other) => panic!("unexpected failure mode: {:?}", other),
        }
    }
    let expected = 0.3 * trials as f64;
    let sigma = (trials as f64 * 0.3 * 0.7).sqrt();
    assert!(
        ((misses as f64) - expected).abs() <= 3.5 * sigma,
        "misses {} expected {} ± {}",
        misses,
        expected,
        3.0 * sigma
    );
}

#[test]
fn pirate_against_non_family_circuit_fails_cleanly() {
    let mut rng = root_stream(127);
    let params = FieldParams::new(2, 6).unwrap();
    let mut scheme = SslScheme::setup(params, OracleMode::Ideal, &mut rng).unwrap();
    let sk = scheme.gen(&mut rng).unwrap();
    let circuit = crate::circuits::CncCircuit::point(Bits::random(6, &mut rng));
    let mut lease = scheme.lessor(&sk, &circuit, &mut rng).unwrap();

    let ctx = DequantContext::new();
    let program = CncLeaseProgram { scheme: &scheme, lease: &mut lease, rng: substream(127, 0) };
    let mut implementation = QuantumImplementation::new(program, substream(127, 1));
    assert!(matches!(
        attack_extract(&mut implementation, &ctx, &mut rng),
        Err(DequantError::NotFamilyShaped)
    ));
}

#[test]
fn family_lease_round_trip() {
    let mut rng = root_stream(128);
    let params = FieldParams::new(2, 6).unwrap();
    let mut scheme = SslScheme::setup(params, OracleMode::Ideal, &mut rng).unwrap();
    enable_family_leasing(&mut scheme);
    let mut ctx = DequantContext::new();
    let circuit = ctx.sample_family(6, OracleMode::Ideal, &mut rng).unwrap();
    let sk = scheme.gen(&mut rng).unwrap();
    let mut lease = family_lessor(&mut scheme, &sk, &circuit, &mut rng).unwrap();

    assert_eq!(family_check(&scheme, &sk, &mut lease, &mut rng).unwrap(), 1);
    for x in Bits::enumerate_all(6) {
        let out = family_run(&scheme, &mut lease, &x, &mut rng).unwrap();
        assert_eq!(out.output.unwrap(), circuit.eval(&x).unwrap());
    }
    assert_eq!(family_check(&scheme, &sk, &mut lease, &mut rng).unwrap(), 1);
}

#[test]
fn family_lease_with_foreign_proof_rejects() {
    let mut rng = root_stream(129);
    let params = FieldParams::new(2, 6).unwrap();
    let mut scheme = SslScheme::setup(params, OracleMode::Ideal, &mut rng).unwrap();
    enable_family_leasing(&mut scheme);
    let mut ctx = DequantContext::new();
    let c1 = ctx.sample_family(6, OracleMode::Ideal, &mut rng).unwrap();
    let c2 = ctx.sample_family(6, OracleMode::Ideal, &mut rng).unwrap();
    let sk = scheme.gen(&mut rng).unwrap();
    let lease1 = family_lessor(&mut scheme, &sk, &c1, &mut rng).unwrap();
    let mut lease2 = family_lessor(&mut scheme, &sk, &c2, &mut rng).unwrap();
    // Graft lease1's proof onto lease2: the statement differs, Run is ⊥.
    lease2.proof = lease1.proof.clone();
    let out = family_run(&scheme, &mut lease2, &Bits::zeros(6), &mut rng).unwrap();
    assert!(out.output.is_none());
    assert!(!out.proof_ok);
}

#[test]
fn pirate_breaks_the_family_lease_end_to_end() {
    let mut rng = root_stream(130);
    let params = FieldParams::new(2, 6).unwrap();
    let mut scheme = SslScheme::setup(params, OracleMode::Ideal, &mut rng).unwrap();
    enable_family_leasing(&mut scheme);
    let mut ctx = DequantContext::new();

    for _ in 0..10 {
        let circuit = ctx.sample_family(6, OracleMode::Ideal, &mut rng).unwrap();
        let lessor_sk = scheme.gen(&mut rng).unwrap();
        let mut lease = family_lessor(&mut scheme, &lessor_sk, &circuit, &mut rng).unwrap();
        let pre = DensityOperator::from_pure(&lease.quantum);

        let broken = ssl_breaking_pirate(&mut scheme, &ctx, &mut lease, &mut rng).unwrap();
        assert_eq!(broken.reconstructed, circuit);
        assert!(broken.recovered_state_ok);

        // The original still passes the lessor's Check and was disturbed
        // by at most numerical noise.
        let post = DensityOperator::from_pure(&lease.quantum);
        assert!(trace_distance(&pre, &post).unwrap() <= TOLERANCE);
        assert_eq!(family_check(&scheme, &lessor_sk, &mut lease, &mut rng).unwrap(), 1);

        // The fresh copy passes Run on all inputs and Check under the
        // pirate's key.
        let mut fresh = broken.fresh_lease;
        for x in Bits::enumerate_all(6) {
            let out = family_run(&scheme, &mut fresh, &x, &mut rng).unwrap();
            assert_eq!(out.output.unwrap(), circuit.eval(&x).unwrap());
        }
        assert_eq!(family_check(&scheme, &broken.fresh_sk, &mut fresh, &mut rng).unwrap(), 1);
    }
}

#[test]
fn oracle_learner_misses_wide_triggers() {
    let mut rng = root_stream(131);
    let mut ctx = DequantContext::new();
    let mut successes = 0;
    for _ in 0..100 {
        let circuit = ctx.sample_family(32, OracleMode::Ideal, &mut rng).unwrap();
        if oracle_learner_baseline(&circuit, 1 << 10, None, &mut rng).unwrap().is_some() {
            successes += 1;
        }
    }
    assert_eq!(successes, 0);
}

#[test]
fn oracle_learner_succeeds_with_planted_query_and_equality_checks() {
    let mut rng = root_stream(132);
    let (_, circuit) = fresh_family(133, 6);
    let learned = oracle_learner_baseline(&circuit, 2, Some(circuit.a().clone()), &mut rng)
        .unwrap()
        .expect("planted query hits");
    let ea = |x: &Bits| circuit.eval(x).unwrap();
    let eb = |x: &Bits| learned.eval(x);
    assert!(is_functionally_equal(ea, eb, 6).unwrap());

    // A partial guess (wrong accepting point) fails the equality check.
    let mut wrong = learned.clone();
    wrong.a = Bits::from_bits(circuit.a().iter().map(|&b| 1 - b).collect());
    let ew = |x: &Bits| wrong.eval(x);
    assert!(!is_functionally_equal(ea, ew, 6).unwrap());

    // Zero budget: immediate failure.
    assert!(oracle_learner_baseline(&circuit, 0, None, &mut rng).unwrap().is_none());
}
