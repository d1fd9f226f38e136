//! Known-answer vectors plus randomized completeness/soundness trials.
//!
//! The vectors in `vectors/kat.json` were produced by an independent script
//! (`vectors/gen_vectors.py`, integers and `hashlib` only) before this crate
//! existed. A vector file can be supplied at runtime to check that a corrupted
//! vector is reported by name.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::toy::{ToyElement, ToyScalar};
use super::*;

pub const BUILTIN_VECTORS: &str = include_str!("../../vectors/kat.json");

#[derive(Debug, thiserror::Error)]
#[error("vector file: {0}")]
pub struct VectorFileError(#[from] serde_json::Error);

#[derive(Debug, Deserialize)]
struct VectorFile {
    toy: ToyVectors,
    secp256k1: SecpVectors,
}

#[derive(Debug, Deserialize)]
struct ToyVectors {
    p: u32,
    q: u32,
    generator: u32,
    setup: Vec<ToySetup>,
    commit: Vec<ToyCommit>,
    digest: Vec<DigestVector<u32>>,
    eq_proof: Vec<ToyEq>,
    neq_proof: Vec<ToyNeq>,
}

#[derive(Debug, Deserialize)]
struct ToySetup {
    name: String,
    seed: String,
    q_point: u32,
    counter: Option<u32>,
}

#[derive(Debug, Deserialize)]
struct ToyCommit {
    name: String,
    m: u64,
    s: u64,
    c: u32,
}

#[derive(Debug, Deserialize)]
struct DigestVector<T> {
    name: String,
    input: String,
    scalar: T,
}

#[derive(Debug, Deserialize)]
struct ToyEq {
    name: String,
    m: u64,
    s1: u64,
    s2: u64,
    gamma: u64,
    c1: u32,
    c2: u32,
    t: u32,
    delta: u32,
    eta: u32,
}

#[derive(Debug, Deserialize)]
struct ToyNeq {
    name: String,
    m1: u64,
    m2: u64,
    s1: u64,
    s2: u64,
    gamma1: u64,
    gamma2: u64,
    c1: u32,
    c2: u32,
    t1: u32,
    t2: u32,
    delta: u32,
    eta1: u32,
    eta2: u32,
}

#[derive(Debug, Deserialize)]
struct SecpVectors {
    setup: Vec<SecpSetup>,
    digest: Vec<DigestVector<String>>,
}

#[derive(Debug, Deserialize)]
struct SecpSetup {
    name: String,
    seed: String,
    q_point: String,
    counter: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VectorResult {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialResult {
    pub group: GroupId,
    pub kind: String,
    pub trials: usize,
    /// Completeness: rejected honest proofs. Soundness: accepted random proofs.
    pub failures: usize,
    /// Largest failure count that still passes.
    pub allowed: usize,
}

impl TrialResult {
    pub fn passed(&self) -> bool {
        self.failures <= self.allowed
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProofSizes {
    pub commitment_bits: usize,
    pub eq_proof_bits: usize,
    pub neq_proof_bits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub vectors: Vec<VectorResult>,
    pub trials: Vec<TrialResult>,
    pub secp256k1_sizes: ProofSizes,
    pub passed: bool,
}

impl SelftestReport {
    pub fn failed_vectors(&self) -> Vec<&str> {
        self.vectors.iter().filter(|v| !v.passed).map(|v| v.name.as_str()).collect()
    }
}

fn check(name: &str, ok: bool, detail: impl FnOnce() -> String) -> VectorResult {
    VectorResult { name: name.to_string(), passed: ok, detail: (!ok).then(detail) }
}

fn te(v: u32) -> Option<ToyElement> {
    ToyElement::new(v)
}

fn ts(v: u64) -> ToyScalar {
    ToyScalar::new(v)
}

fn unhex(s: &str) -> Vec<u8> {
    hex::decode(s).unwrap_or_default()
}

fn toy_vectors(v: &ToyVectors) -> Vec<VectorResult> {
    let mut out = vec![check(
        "toy-group-constants",
        v.p == toy::MODULUS && v.q == toy::ORDER && v.generator == toy::GENERATOR,
        || format!("file has p={} q={} P={}", v.p, v.q, v.generator),
    )];
    let gp = GroupParams::<Toy>::setup(&[0x01]);
    for s in &v.setup {
        let ours = GroupParams::<Toy>::setup(&unhex(&s.seed));
        let ok = ours.q.value() == s.q_point && s.counter.map_or(true, |c| c == ours.counter);
        out.push(check(&s.name, ok, || format!("computed Q={} counter={}", ours.q.value(), ours.counter)));
    }
    for c in &v.commit {
        let got = commit(&gp, ts(c.m), ts(c.s)).0.value();
        out.push(check(&c.name, got == c.c, || format!("computed {got}")));
    }
    for d in &v.digest {
        let got = digest::<Toy>(&unhex(&d.input)).value();
        out.push(check(&d.name, got == d.scalar, || format!("computed {got}")));
    }
    for e in &v.eq_proof {
        let (o1, o2) = (Opening::<Toy>::new(ts(e.m), ts(e.s1)), Opening::new(ts(e.m), ts(e.s2)));
        let (c1, c2) = (commit(&gp, o1.m, o1.s), commit(&gp, o2.m, o2.s));
        let res = prove_eq_with_nonce(&gp, &c1, &c2, &o1, &o2, ts(e.gamma));
        let ok = match &res {
            Ok(p) => {
                Some(c1.0) == te(e.c1)
                    && Some(c2.0) == te(e.c2)
                    && p.t.value() == e.t
                    && eq_challenge(&gp, &c1, &c2, &p.t).value() == e.delta
                    && p.eta.value() == e.eta
                    && verify_eq(&gp, &c1, &c2, p)
            }
            Err(_) => false,
        };
        out.push(check(&e.name, ok, || format!("computed c1={} c2={} proof={res:?}", c1.0.value(), c2.0.value())));
    }
    for n in &v.neq_proof {
        let (o1, o2) = (Opening::<Toy>::new(ts(n.m1), ts(n.s1)), Opening::new(ts(n.m2), ts(n.s2)));
        let (c1, c2) = (commit(&gp, o1.m, o1.s), commit(&gp, o2.m, o2.s));
        let res = prove_neq_with_nonces(&gp, &c1, &c2, &o1, &o2, ts(n.gamma1), ts(n.gamma2));
        let ok = match &res {
            Ok(p) => {
                Some(c1.0) == te(n.c1)
                    && Some(c2.0) == te(n.c2)
                    && p.t1.value() == n.t1
                    && p.t2.value() == n.t2
                    && neq_challenge(&gp, &c1, &c2, &p.t1, &p.t2).value() == n.delta
                    && p.eta1.value() == n.eta1
                    && p.eta2.value() == n.eta2
                    && verify_neq(&gp, &c1, &c2, p)
            }
            Err(_) => false,
        };
        out.push(check(&n.name, ok, || format!("computed proof={res:?}")));
    }
    out
}

fn secp_vectors(v: &SecpVectors) -> Vec<VectorResult> {
    let mut out = Vec::new();
    for s in &v.setup {
        let ours = GroupParams::<Secp256k1>::setup(&unhex(&s.seed));
        let got = hex::encode(Secp256k1::encode_element(&ours.q));
        let ok = got == s.q_point.to_ascii_lowercase() && ours.counter == s.counter;
        out.push(check(&s.name, ok, || format!("computed Q={got} counter={}", ours.counter)));
    }
    for d in &v.digest {
        let got = hex::encode(Secp256k1::encode_scalar(&digest::<Secp256k1>(&unhex(&d.input))));
        out.push(check(&d.name, got == d.scalar.to_ascii_lowercase(), || format!("computed {got}")));
    }
    out
}

/// Honest proofs over random messages; counts rejections.
pub fn completeness_trials<G: Group>(gp: &GroupParams<G>, trials: usize, seed: u64) -> [TrialResult; 2] {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (mut eq_fail, mut neq_fail) = (0, 0);
    for i in 0..trials {
        let m1 = digest::<G>(&(i as u64).to_be_bytes());
        let mut m2 = G::random_scalar(&mut rng);
        while m2 == m1 {
            m2 = G::random_scalar(&mut rng);
        }
        let (a, b, c) = (Opening::random(m1, &mut rng), Opening::random(m1, &mut rng), Opening::random(m2, &mut rng));
        let (ca, cb, cc) = (commit(gp, a.m, a.s), commit(gp, b.m, b.s), commit(gp, c.m, c.s));
        match prove_eq(gp, &ca, &cb, &a, &b, &mut rng) {
            Ok(p) if verify_eq(gp, &ca, &cb, &p) => {}
            _ => eq_fail += 1,
        }
        match prove_neq(gp, &ca, &cc, &a, &c, &mut rng) {
            Ok(p) if verify_neq(gp, &ca, &cc, &p) => {}
            _ => neq_fail += 1,
        }
    }
    [
        TrialResult { group: G::ID, kind: "completeness/eq".into(), trials, failures: eq_fail, allowed: 0 },
        TrialResult { group: G::ID, kind: "completeness/neq".into(), trials, failures: neq_fail, allowed: 0 },
    ]
}

/// Random commitments against random proofs; counts acceptances.
///
/// A forged equality proof passes with probability about 1/q, so on the toy
/// group a handful of acceptances per thousand trials is expected; `allowed`
/// is the caller's bound.
pub fn soundness_trials<G: Group>(gp: &GroupParams<G>, trials: usize, seed: u64, allowed: usize) -> [TrialResult; 2] {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let rand_elem = |rng: &mut ChaCha20Rng| gp.p * G::random_scalar(rng) + gp.q * G::random_scalar(rng);
    let (mut eq_acc, mut neq_acc) = (0, 0);
    for _ in 0..trials {
        let (c1, c2) = (Commitment(rand_elem(&mut rng)), Commitment(rand_elem(&mut rng)));
        let eq = EqProof::<G> { t: rand_elem(&mut rng), eta: G::random_scalar(&mut rng) };
        if verify_eq(gp, &c1, &c2, &eq) {
            eq_acc += 1;
        }
        let neq = NeqProof::<G> {
            t1: rand_elem(&mut rng),
            t2: rand_elem(&mut rng),
            eta1: G::random_scalar(&mut rng),
            eta2: G::random_scalar(&mut rng),
        };
        if verify_neq(gp, &c1, &c2, &neq) {
            neq_acc += 1;
        }
    }
    [
        TrialResult { group: G::ID, kind: "soundness/eq".into(), trials, failures: eq_acc, allowed },
        TrialResult { group: G::ID, kind: "soundness/neq".into(), trials, failures: neq_acc, allowed },
    ]
}

pub fn secp256k1_sizes() -> ProofSizes {
    let gp = GroupParams::<Secp256k1>::default_setup();
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    let (a, b) = (Opening::random(digest::<Secp256k1>(b"y"), &mut rng), Opening::random(digest::<Secp256k1>(b"y"), &mut rng));
    let c = Opening::random(digest::<Secp256k1>(b"z"), &mut rng);
    let (ca, cb, cc) = (commit(&gp, a.m, a.s), commit(&gp, b.m, b.s), commit(&gp, c.m, c.s));
    let eq = prove_eq(&gp, &ca, &cb, &a, &b, &mut rng).expect("honest equality proof");
    let neq = prove_neq(&gp, &ca, &cc, &a, &c, &mut rng).expect("honest inequality proof");
    ProofSizes {
        commitment_bits: ca.to_bytes().len() * 8,
        eq_proof_bits: eq.to_bytes().len() * 8,
        neq_proof_bits: neq.to_bytes().len() * 8,
    }
}

/// Toy-group soundness bound: P[Binomial(n, 1/509) > bound] < 1e-6 for n = 1000.
pub const TOY_SOUNDNESS_ALLOWANCE: usize = 12;

pub fn run(vector_json: &str, trials: usize, seed: u64) -> Result<SelftestReport, VectorFileError> {
    let file: VectorFile = serde_json::from_str(vector_json)?;
    let mut vectors = toy_vectors(&file.toy);
    vectors.extend(secp_vectors(&file.secp256k1));

    let toy = GroupParams::<Toy>::default_setup();
    let secp = GroupParams::<Secp256k1>::default_setup();
    let mut trials_out = Vec::new();
    trials_out.extend(completeness_trials(&secp, trials, seed));
    trials_out.extend(soundness_trials(&secp, trials, seed ^ 0x5eed, 0));
    trials_out.extend(completeness_trials(&toy, trials, seed));
    let toy_allowed = if trials == 1000 { TOY_SOUNDNESS_ALLOWANCE } else { trials / 509 * 6 + 6 };
    trials_out.extend(soundness_trials(&toy, trials, seed ^ 0x5eed, toy_allowed));

    let sizes = secp256k1_sizes();
    let sizes_ok = sizes == ProofSizes { commitment_bits: 512, eq_proof_bits: 768, neq_proof_bits: 1536 };
    let passed = sizes_ok && vectors.iter().all(|v| v.passed) && trials_out.iter().all(TrialResult::passed);
    Ok(SelftestReport { vectors, trials: trials_out, secp256k1_sizes: sizes, passed })
}
