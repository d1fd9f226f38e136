//! Prime-order groups, Pedersen commitments and the Fiat–Shamir equality /
//! inequality proofs that let a contract compare committed results without
//! learning them.
//!
//! # Encodings
//!
//! Every hash input is domain separated. Transcripts for the challenge are the
//! DST followed by the *compressed* encodings of `P, Q, C1, C2` and the prover's
//! first-move elements, in that order, with no length prefixes (every field is
//! fixed length). Compressed means 33-byte SEC1 on secp256k1 (33 zero bytes for
//! the identity) and 2-byte big-endian on the toy group.
//!
//! Hex strings in reports use the canonical encoding instead: 64-byte `x ‖ y`
//! on secp256k1, 2 bytes on the toy group; scalars are 32 / 2 bytes
//! big-endian.

mod group;
mod nizk;
mod params;
mod pedersen;
pub mod selftest;
pub mod secp256k1;
pub mod toy;

pub use group::{Group, GroupId};
pub use nizk::{
    eq_challenge, neq_challenge, prove_eq, prove_eq_with_nonce, prove_neq, prove_neq_with_nonces,
    verify_eq, verify_neq, EqProof, NeqProof,
};
pub use params::{digest, hash_to_group, GroupParams, DEFAULT_SETUP_SEED};
pub use pedersen::{commit, open, Commitment, Opening};
pub use secp256k1::Secp256k1;
pub use toy::Toy;

pub const DST_HASH_TO_GROUP: &[u8] = b"countercollusion/v1/hash-to-group";
pub const DST_DIGEST: &[u8] = b"countercollusion/v1/digest";
pub const DST_NIZK_EQ: &[u8] = b"countercollusion/v1/nizk-eq";
pub const DST_NIZK_NEQ: &[u8] = b"countercollusion/v1/nizk-neq";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CryptoError {
    #[error("unknown group `{0}` (expected `toy` or `secp256k1`)")]
    UnknownGroup(String),
    #[error("witness mismatch: {0}")]
    WitnessMismatch(&'static str),
    #[error("the challenge hashed to zero; retry with fresh nonces")]
    DegenerateChallenge,
    #[error("malformed {0} encoding")]
    Decode(&'static str),
}

/// Serde helpers: group values as hex of their canonical encoding.
pub(crate) mod hexser {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Group;

    pub fn element<G: Group, S: Serializer>(e: &G::Element, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(G::encode_element(e)))
    }

    pub fn de_element<'de, G: Group, D: Deserializer<'de>>(d: D) -> Result<G::Element, D::Error> {
        let text = String::deserialize(d)?;
        let bytes = hex::decode(&text).map_err(D::Error::custom)?;
        G::decode_element(&bytes).ok_or_else(|| D::Error::custom("not a group element"))
    }

    pub fn scalar<G: Group, S: Serializer>(v: &G::Scalar, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(G::encode_scalar(v)))
    }

    pub fn de_scalar<'de, G: Group, D: Deserializer<'de>>(d: D) -> Result<G::Scalar, D::Error> {
        let text = String::deserialize(d)?;
        let bytes = hex::decode(&text).map_err(D::Error::custom)?;
        G::decode_scalar(&bytes).ok_or_else(|| D::Error::custom("scalar not reduced"))
    }

    pub fn bytes<S: Serializer>(v: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(v))
    }

    pub fn de_bytes<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        hex::decode(text).map_err(D::Error::custom)
    }
}
