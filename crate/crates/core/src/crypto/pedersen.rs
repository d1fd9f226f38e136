use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::{hexser, CryptoError, Group, GroupParams};

/// `C = mP + sQ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "", transparent)]
pub struct Commitment<G: Group>(
    #[serde(serialize_with = "hexser::element::<G, _>", deserialize_with = "hexser::de_element::<G, _>")]
    pub G::Element,
);

impl<G: Group> Commitment<G> {
    pub fn to_bytes(&self) -> Vec<u8> {
        G::encode_element(&self.0)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        G::decode_element(bytes).map(Commitment).ok_or(CryptoError::Decode("commitment"))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Opening<G: Group> {
    #[serde(serialize_with = "hexser::scalar::<G, _>", deserialize_with = "hexser::de_scalar::<G, _>")]
    pub m: G::Scalar,
    #[serde(serialize_with = "hexser::scalar::<G, _>", deserialize_with = "hexser::de_scalar::<G, _>")]
    pub s: G::Scalar,
}

impl<G: Group> Opening<G> {
    pub fn new(m: G::Scalar, s: G::Scalar) -> Self {
        Opening { m, s }
    }

    pub fn random<R: RngCore + CryptoRng>(m: G::Scalar, rng: &mut R) -> Self {
        Opening { m, s: G::random_scalar(rng) }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        [G::encode_scalar(&self.m), G::encode_scalar(&self.s)].concat()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != 2 * G::SCALAR_BYTES {
            return Err(CryptoError::Decode("opening"));
        }
        let (m, s) = bytes.split_at(G::SCALAR_BYTES);
        match (G::decode_scalar(m), G::decode_scalar(s)) {
            (Some(m), Some(s)) => Ok(Opening { m, s }),
            _ => Err(CryptoError::Decode("opening")),
        }
    }
}

pub fn commit<G: Group>(gp: &GroupParams<G>, m: G::Scalar, s: G::Scalar) -> Commitment<G> {
    Commitment(gp.p * m + gp.q * s)
}

pub fn open<G: Group>(gp: &GroupParams<G>, c: &Commitment<G>, o: &Opening<G>) -> bool {
    commit(gp, o.m, o.s) == *c
}
