use countercollusion::crypto::selftest::{self, BUILTIN_VECTORS};
use countercollusion::crypto::toy::{ToyElement, ToyScalar, MODULUS, ORDER};
use countercollusion::crypto::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Scalar multiplication by repeated group addition, nothing clever.
fn naive_mul(e: u32, k: u32) -> u32 {
    (0..k % ORDER).fold(1, |acc, _| acc * e % MODULUS)
}

fn toy_gp() -> GroupParams<Toy> {
    GroupParams::setup(&[0x01])
}

#[test]
fn builtin_vectors_pass() {
    let report = selftest::run(BUILTIN_VECTORS, 200, 1).unwrap();
    assert!(report.failed_vectors().is_empty(), "{:?}", report.failed_vectors());
    assert!(report.vectors.len() >= 15);
}

#[test]
fn corrupted_vector_is_named() {
    let corrupted = BUILTIN_VECTORS.replacen("\"c\": 361", "\"c\": 362", 1);
    assert_ne!(corrupted, BUILTIN_VECTORS, "fixture moved; update the corruption");
    let report = selftest::run(&corrupted, 10, 1).unwrap();
    assert_eq!(report.failed_vectors(), vec!["toy-commit-3-5"]);
    assert!(!report.passed);
}

#[test]
fn toy_setup_seed01() {
    let gp = toy_gp();
    assert_eq!(gp.q.value(), 20);
    assert_eq!(gp.counter, 0);
    assert_eq!(GroupParams::<Toy>::setup(&[0x03]).q.value(), 89);
}

#[test]
fn toy_commit_matches_repeated_addition() {
    let gp = toy_gp();
    for m in (0..ORDER).step_by(7) {
        for s in (0..ORDER).step_by(31) {
            let expect = naive_mul(4, m) * naive_mul(20, s) % MODULUS;
            assert_eq!(commit(&gp, ToyScalar::new(m as u64), ToyScalar::new(s as u64)).0.value(), expect);
        }
    }
}

#[test]
fn toy_exactly_one_blinding_opens_for_fixed_message() {
    let gp = toy_gp();
    let (m, s) = (ToyScalar::new(123), ToyScalar::new(45));
    let c = commit(&gp, m, s);
    for m_try in [m, ToyScalar::new(0), ToyScalar::new(500)] {
        let hits: Vec<u32> = (0..ORDER as u64)
            .map(ToyScalar::new)
            .filter(|s2| open(&gp, &c, &Opening::new(m_try, *s2)))
            .map(|s2| s2.value())
            .collect();
        assert_eq!(hits.len(), 1, "message {m_try:?}");
        if m_try == m {
            assert_eq!(hits, vec![45]);
        }
    }
}

/// In a group this small the discrete log of Q is easy to find, so binding can
/// only be checked relative to it: every collision found by brute force must
/// reveal log_P(Q), and without a collision none is known.
#[test]
fn toy_collisions_reveal_the_discrete_log() {
    let gp = toy_gp();
    let x = (0..ORDER).find(|&k| naive_mul(4, k) == gp.q.value()).unwrap();
    let (m, s) = (ToyScalar::new(3), ToyScalar::new(5));
    let c = commit(&gp, m, s);
    let mut collisions = 0;
    for m2 in 0..16u64 {
        for s2 in 0..16u64 {
            let (m2, s2) = (ToyScalar::new(m2), ToyScalar::new(s2));
            if m2 != m && open(&gp, &c, &Opening::new(m2, s2)) {
                collisions += 1;
                // m + xs = m2 + x s2  ⇒  x = (m − m2)/(s2 − s)
                assert_eq!((m - m2).value() % ORDER, (ToyScalar::new(x as u64) * (s2 - s)).value());
            }
        }
    }
    // And the honest enumeration with s fixed finds nothing.
    for m2 in 0..ORDER as u64 {
        let m2 = ToyScalar::new(m2);
        assert_eq!(open(&gp, &c, &Opening::new(m2, s)), m2 == m);
    }
    assert!(collisions <= 16);
}

#[test]
fn toy_eq_proof_hand_vector() {
    let gp = toy_gp();
    let m = digest::<Toy>(b"result");
    assert_eq!(m.value(), 12);
    let (o1, o2) = (Opening::new(m, ToyScalar::new(11)), Opening::new(m, ToyScalar::new(200)));
    let (c1, c2) = (commit(&gp, o1.m, o1.s), commit(&gp, o2.m, o2.s));
    assert_eq!((c1.0.value(), c2.0.value()), (436, 505));
    let p = prove_eq_with_nonce(&gp, &c1, &c2, &o1, &o2, ToyScalar::new(77)).unwrap();
    assert_eq!(p.t.value(), 134);
    assert_eq!(eq_challenge(&gp, &c1, &c2, &p.t).value(), 374);
    assert_eq!(p.eta.value(), 142);
}

#[test]
fn secp256k1_trials() {
    let gp = GroupParams::<Secp256k1>::default_setup();
    for r in selftest::completeness_trials(&gp, 200, 11) {
        assert_eq!(r.failures, 0, "{r:?}");
    }
    for r in selftest::soundness_trials(&gp, 200, 12, 0) {
        assert_eq!(r.failures, 0, "{r:?}");
    }
}

#[test]
fn proofs_are_bound_to_their_statement() {
    let gp = GroupParams::<Secp256k1>::default_setup();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let (a, b) = (Opening::random(digest::<Secp256k1>(b"a"), &mut rng), Opening::random(digest::<Secp256k1>(b"b"), &mut rng));
    let (ca, cb) = (commit(&gp, a.m, a.s), commit(&gp, b.m, b.s));
    let p = prove_neq(&gp, &ca, &cb, &a, &b, &mut rng).unwrap();
    assert!(verify_neq(&gp, &ca, &cb, &p));
    assert!(!verify_neq(&gp, &cb, &ca, &p));
    let a2 = Opening::random(a.m, &mut rng);
    let ca2 = commit(&gp, a2.m, a2.s);
    let e = prove_eq(&gp, &ca, &ca2, &a, &a2, &mut rng).unwrap();
    assert!(verify_eq(&gp, &ca, &ca2, &e));
    assert!(!verify_eq(&gp, &ca, &cb, &e));
}

#[test]
fn toy_soundness_rate_is_about_one_in_q() {
    let gp = toy_gp();
    let [eq, neq] = selftest::soundness_trials(&gp, 20_000, 13, usize::MAX);
    // 20000/509 ≈ 39; allow a generous band either side
    assert!((10..90).contains(&eq.failures), "{eq:?}");
    assert!(neq.failures < 90, "{neq:?}");
}

#[test]
fn proof_sizes_at_256_bits() {
    let sizes = selftest::secp256k1_sizes();
    assert_eq!(sizes.commitment_bits, 512);
    assert_eq!(sizes.eq_proof_bits, 768);
    assert_eq!(sizes.neq_proof_bits, 1536);
}

fn toy_scalar() -> impl Strategy<Value = ToyScalar> {
    (0u64..ORDER as u64).prop_map(ToyScalar::new)
}

proptest! {
    #[test]
    fn toy_completeness(m in toy_scalar(), m2 in toy_scalar(), s1 in toy_scalar(), s2 in toy_scalar(), seed: u64) {
        let gp = toy_gp();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (o1, o2) = (Opening::new(m, s1), Opening::new(m, s2));
        let (c1, c2) = (commit(&gp, m, s1), commit(&gp, m, s2));
        let p = prove_eq(&gp, &c1, &c2, &o1, &o2, &mut rng).unwrap();
        prop_assert!(verify_eq(&gp, &c1, &c2, &p));
        prop_assert_eq!(eq_challenge(&gp, &c1, &c2, &p.t), eq_challenge(&gp, &c1, &c2, &p.t));
        if m2 != m {
            let o3 = Opening::new(m2, s2);
            let c3 = commit(&gp, m2, s2);
            let p = prove_neq(&gp, &c1, &c3, &o1, &o3, &mut rng).unwrap();
            prop_assert!(verify_neq(&gp, &c1, &c3, &p));
            // swapping the commitments is only rejected with probability
            // 1 − 1/q here; see proofs_are_bound_to_their_statement
        }
    }

    #[test]
    fn secp_roundtrips(a: u64, b: u64, c: u64) {
        let gp = GroupParams::<Secp256k1>::default_setup();
        let mut rng = ChaCha20Rng::seed_from_u64(a ^ b);
        let m = digest::<Secp256k1>(&a.to_be_bytes());
        let o1 = Opening::<Secp256k1>::new(m, Secp256k1::scalar_from_u64(b));
        let o2 = Opening::<Secp256k1>::new(m, Secp256k1::scalar_from_u64(c));
        let o3 = Opening::<Secp256k1>::new(m + Secp256k1::scalar_one(), Secp256k1::scalar_from_u64(c));
        let (c1, c2, c3) = (commit(&gp, o1.m, o1.s), commit(&gp, o2.m, o2.s), commit(&gp, o3.m, o3.s));
        prop_assert_eq!(Commitment::from_bytes(&c1.to_bytes()).unwrap(), c1);
        prop_assert_eq!(Opening::from_bytes(&o1.to_bytes()).unwrap(), o1);
        let eq = prove_eq(&gp, &c1, &c2, &o1, &o2, &mut rng).unwrap();
        prop_assert_eq!(EqProof::from_bytes(&eq.to_bytes()).unwrap(), eq);
        let neq = prove_neq(&gp, &c1, &c3, &o1, &o3, &mut rng).unwrap();
        prop_assert_eq!(NeqProof::from_bytes(&neq.to_bytes()).unwrap(), neq);
        let json = serde_json::to_string(&neq).unwrap();
        prop_assert_eq!(serde_json::from_str::<NeqProof<Secp256k1>>(&json).unwrap(), neq);
        let json = serde_json::to_string(&o1).unwrap();
        prop_assert_eq!(serde_json::from_str::<Opening<Secp256k1>>(&json).unwrap(), o1);
    }

    #[test]
    fn toy_element_roundtrip(k in 0u64..509) {
        let e: ToyElement = Toy::generator() * ToyScalar::new(k);
        prop_assert_eq!(Toy::decode_element(&Toy::encode_element(&e)), Some(e));
        let s = ToyScalar::new(k);
        prop_assert_eq!(Toy::decode_scalar(&Toy::encode_scalar(&s)), Some(s));
    }
}
