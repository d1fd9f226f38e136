use std::fmt::Debug;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::CryptoError;

/// Which backend a set of parameters lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupId {
    /// Order-509 subgroup of quadratic residues mod 1019. Tests only.
    Toy,
    /// secp256k1.
    Secp256k1,
}

impl GroupId {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupId::Toy => "toy",
            GroupId::Secp256k1 => "secp256k1",
        }
    }
}

impl std::fmt::Display for GroupId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GroupId {
    type Err = CryptoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "toy" => Ok(GroupId::Toy),
            "secp256k1" | "k256" | "production" => Ok(GroupId::Secp256k1),
            other => Err(CryptoError::UnknownGroup(other.to_string())),
        }
    }
}

/// A prime-order group written additively.
///
/// Implementors are zero-sized markers; all state lives in the associated
/// element and scalar types.
pub trait Group: Copy + Clone + Debug + Default + PartialEq + Eq + Hash + Send + Sync + 'static {
    type Scalar: Copy
        + Debug
        + Eq
        + Send
        + Sync
        + Add<Output = Self::Scalar>
        + Sub<Output = Self::Scalar>
        + Mul<Output = Self::Scalar>
        + Neg<Output = Self::Scalar>;

    type Element: Copy
        + Debug
        + Eq
        + Send
        + Sync
        + Add<Output = Self::Element>
        + Sub<Output = Self::Element>
        + Neg<Output = Self::Element>
        + Mul<Self::Scalar, Output = Self::Element>;

    const ID: GroupId;
    /// Length of the canonical (uncompressed) element encoding.
    const ELEMENT_BYTES: usize;
    /// Length of the compressed encoding fed to the hash.
    const COMPRESSED_BYTES: usize;
    const SCALAR_BYTES: usize;

    fn generator() -> Self::Element;
    fn identity() -> Self::Element;

    fn scalar_from_u64(v: u64) -> Self::Scalar;
    fn scalar_zero() -> Self::Scalar {
        Self::scalar_from_u64(0)
    }
    fn scalar_one() -> Self::Scalar {
        Self::scalar_from_u64(1)
    }
    /// Interpret 32 bytes big-endian and reduce mod q.
    fn reduce_hash(h: &[u8; 32]) -> Self::Scalar;
    fn random_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Self::Scalar;

    /// One try-and-increment attempt: map a hash output to an element, or
    /// `None` if the attempt must be retried with the next counter.
    fn map_candidate(h: &[u8; 32]) -> Option<Self::Element>;

    fn encode_element(e: &Self::Element) -> Vec<u8>;
    fn decode_element(bytes: &[u8]) -> Option<Self::Element>;
    fn encode_compressed(e: &Self::Element) -> Vec<u8>;
    fn encode_scalar(s: &Self::Scalar) -> Vec<u8>;
    fn decode_scalar(bytes: &[u8]) -> Option<Self::Scalar>;
}
