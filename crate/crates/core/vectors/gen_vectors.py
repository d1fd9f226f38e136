#!/usr/bin/env python3
"""Independent reference computation of the known-answer vectors in kat.json.

Uses only hashlib and integer arithmetic; shares no code with the Rust crate.
Run from this directory: python3 gen_vectors.py > kat.json
"""
import hashlib
import json

DST_H2G = b"countercollusion/v1/hash-to-group"
DST_DIGEST = b"countercollusion/v1/digest"
DST_EQ = b"countercollusion/v1/nizk-eq"
DST_NEQ = b"countercollusion/v1/nizk-neq"


def sha(*parts):
    h = hashlib.sha256()
    for part in parts:
        h.update(part)
    return h.digest()


def be32(n):
    return n.to_bytes(4, "big")


# ---------------------------------------------------------------- toy group
# Quadratic residues mod the safe prime 1019, order 509, written additively.
TP, TQ = 1019, 509
TOY_P = 4


def toy_add(a, b):
    return a * b % TP


def toy_neg(a):
    return pow(a, TP - 2, TP)


def toy_mul(e, k):
    # repeated addition, deliberately naive
    acc = 1
    for _ in range(k % TQ):
        acc = toy_add(acc, e)
    return acc


def toy_enc(e):
    return e.to_bytes(2, "big")


def toy_h2g(seed):
    ctr = 0
    while True:
        u = int.from_bytes(sha(DST_H2G, be32(len(seed)), seed, be32(ctr)), "big") % TP
        if u != 0:
            e = u * u % TP
            if e not in (1, TOY_P):
                return e, ctr
        ctr += 1


def toy_reduce(b):
    return int.from_bytes(b, "big") % TQ


def toy_digest(data):
    return toy_reduce(sha(DST_DIGEST, data))


def toy_commit(Q, m, s):
    return toy_add(toy_mul(TOY_P, m), toy_mul(Q, s))


def toy_vectors():
    seed = bytes([0x01])
    Q, ctr = toy_h2g(seed)
    Q3, _ = toy_h2g(bytes([0x03]))
    out = {
        "group": "toy",
        "p": TP,
        "q": TQ,
        "generator": TOY_P,
        "setup": [
            {"name": "toy-setup-seed01", "seed": "01", "q_point": Q, "counter": ctr},
            {"name": "toy-setup-seed03", "seed": "03", "q_point": Q3},
        ],
        "commit": [
            {"name": "toy-commit-0-0", "m": 0, "s": 0, "c": toy_commit(Q, 0, 0)},
            {"name": "toy-commit-1-0", "m": 1, "s": 0, "c": toy_commit(Q, 1, 0)},
            {"name": "toy-commit-3-5", "m": 3, "s": 5, "c": toy_commit(Q, 3, 5)},
            {"name": "toy-commit-508-507", "m": 508, "s": 507, "c": toy_commit(Q, 508, 507)},
        ],
        "digest": [
            {"name": "toy-digest-empty", "input": "", "scalar": toy_digest(b"")},
            {"name": "toy-digest-a", "input": "61", "scalar": toy_digest(b"a")},
            {"name": "toy-digest-abc", "input": "616263", "scalar": toy_digest(b"abc")},
        ],
    }

    # equality proof with fixed nonce
    m = toy_digest(b"result")
    s1, s2, gamma = 11, 200, 77
    c1, c2 = toy_commit(Q, m, s1), toy_commit(Q, m, s2)
    t = toy_mul(Q, gamma)
    delta = toy_reduce(sha(DST_EQ, toy_enc(TOY_P), toy_enc(Q), toy_enc(c1), toy_enc(c2), toy_enc(t)))
    eta = ((s1 - s2) * delta + gamma) % TQ
    lhs = toy_mul(Q, eta)
    rhs = toy_add(toy_mul(toy_add(c1, toy_neg(c2)), delta), t)
    assert lhs == rhs
    out["eq_proof"] = [{
        "name": "toy-eq-proof",
        "m": m, "s1": s1, "s2": s2, "gamma": gamma,
        "c1": c1, "c2": c2, "t": t, "delta": delta, "eta": eta,
    }]

    # inequality proof with fixed nonces
    m1, m2 = toy_digest(b"result"), toy_digest(b"forged")
    assert m1 != m2
    s1, s2, g1, g2 = 42, 7, 123, 321
    c1, c2 = toy_commit(Q, m1, s1), toy_commit(Q, m2, s2)
    t1, t2 = toy_mul(TOY_P, g1), toy_mul(Q, g2)
    delta = toy_reduce(sha(DST_NEQ, toy_enc(TOY_P), toy_enc(Q), toy_enc(c1), toy_enc(c2), toy_enc(t1), toy_enc(t2)))
    assert delta != 0
    eta1 = ((m1 - m2) * delta + g1) % TQ
    eta2 = ((s1 - s2) * delta + g2) % TQ
    diff = toy_mul(toy_add(c1, toy_neg(c2)), delta)
    assert toy_add(toy_mul(TOY_P, eta1), toy_mul(Q, eta2)) == toy_add(toy_add(diff, t1), t2)
    assert toy_mul(Q, eta2) != toy_add(diff, t2)
    out["neq_proof"] = [{
        "name": "toy-neq-proof",
        "m1": m1, "m2": m2, "s1": s1, "s2": s2, "gamma1": g1, "gamma2": g2,
        "c1": c1, "c2": c2, "t1": t1, "t2": t2, "delta": delta, "eta1": eta1, "eta2": eta2,
    }]
    return out


# ---------------------------------------------------------------- secp256k1
FP = 2**256 - 2**32 - 977
GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141


def secp_h2g(seed):
    ctr = 0
    while True:
        x = int.from_bytes(sha(DST_H2G, be32(len(seed)), seed, be32(ctr)), "big") % FP
        rhs = (pow(x, 3, FP) + 7) % FP
        y = pow(rhs, (FP + 1) // 4, FP)
        if y * y % FP == rhs and x != GX:
            if y % 2 == 1:
                y = FP - y
            return x, y, ctr
        ctr += 1


def secp_vectors():
    x, y, ctr = secp_h2g(bytes([0x01]))
    return {
        "group": "secp256k1",
        "setup": [{
            "name": "secp256k1-setup-seed01",
            "seed": "01",
            "q_point": "%064x%064x" % (x, y),
            "counter": ctr,
        }],
        "digest": [
            {"name": "secp256k1-digest-empty", "input": "",
             "scalar": "%064x" % (int.from_bytes(sha(DST_DIGEST, b""), "big") % N)},
            {"name": "secp256k1-digest-abc", "input": "616263",
             "scalar": "%064x" % (int.from_bytes(sha(DST_DIGEST, b"abc"), "big") % N)},
        ],
    }


if __name__ == "__main__":
    print(json.dumps({"toy": toy_vectors(), "secp256k1": secp_vectors()}, indent=2))
