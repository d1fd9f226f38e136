use k256::elliptic_curve::ff::{Field, PrimeField};
use k256::elliptic_curve::ops::Reduce;
use k256::elliptic_curve::point::DecompressPoint;
use k256::elliptic_curve::sec1::{FromEncodedPoint, ToEncodedPoint};
use k256::elliptic_curve::subtle::Choice;
use k256::{AffinePoint, EncodedPoint, FieldBytes, ProjectivePoint, Scalar, U256};
use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};

use super::group::{Group, GroupId};

/// secp256k1 via `k256`.
///
/// Canonical element encoding is 64 bytes, `x ‖ y` big-endian, with the point
/// at infinity as all zeroes. That is the size the proof lengths are quoted
/// in (an equality proof is 768 bits). The hash transcript instead uses 33-byte
/// SEC1 compressed points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Secp256k1;

const FIELD_PRIME_HEX: &str = "fffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc2f";

impl Group for Secp256k1 {
    type Scalar = Scalar;
    type Element = ProjectivePoint;

    const ID: GroupId = GroupId::Secp256k1;
    const ELEMENT_BYTES: usize = 64;
    const COMPRESSED_BYTES: usize = 33;
    const SCALAR_BYTES: usize = 32;

    fn generator() -> ProjectivePoint {
        ProjectivePoint::GENERATOR
    }

    fn identity() -> ProjectivePoint {
        ProjectivePoint::IDENTITY
    }

    fn scalar_from_u64(v: u64) -> Scalar {
        Scalar::from(v)
    }

    fn reduce_hash(h: &[u8; 32]) -> Scalar {
        <Scalar as Reduce<U256>>::reduce_bytes(&FieldBytes::from(*h))
    }

    fn random_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
        Scalar::random(rng)
    }

    fn map_candidate(h: &[u8; 32]) -> Option<ProjectivePoint> {
        let p = BigUint::parse_bytes(FIELD_PRIME_HEX.as_bytes(), 16).expect("constant");
        let x = BigUint::from_bytes_be(h) % p;
        let mut xb = [0u8; 32];
        let raw = x.to_bytes_be();
        xb[32 - raw.len()..].copy_from_slice(&raw);
        let affine: Option<AffinePoint> =
            AffinePoint::decompress(&FieldBytes::from(xb), Choice::from(0)).into();
        affine.map(ProjectivePoint::from)
    }

    fn encode_element(e: &ProjectivePoint) -> Vec<u8> {
        let ep = e.to_affine().to_encoded_point(false);
        match (ep.x(), ep.y()) {
            (Some(x), Some(y)) => [&x[..], &y[..]].concat(),
            _ => vec![0u8; 64],
        }
    }

    fn decode_element(bytes: &[u8]) -> Option<ProjectivePoint> {
        if bytes.len() != 64 {
            return None;
        }
        if bytes.iter().all(|&b| b == 0) {
            return Some(ProjectivePoint::IDENTITY);
        }
        let mut sec1 = [0u8; 65];
        sec1[0] = 0x04;
        sec1[1..].copy_from_slice(bytes);
        let ep = EncodedPoint::from_bytes(sec1).ok()?;
        let affine: Option<AffinePoint> = AffinePoint::from_encoded_point(&ep).into();
        affine.map(ProjectivePoint::from)
    }

    fn encode_compressed(e: &ProjectivePoint) -> Vec<u8> {
        let ep = e.to_affine().to_encoded_point(true);
        if ep.is_identity() {
            vec![0u8; 33]
        } else {
            ep.as_bytes().to_vec()
        }
    }

    fn encode_scalar(s: &Scalar) -> Vec<u8> {
        s.to_bytes().to_vec()
    }

    fn decode_scalar(bytes: &[u8]) -> Option<Scalar> {
        let raw: [u8; 32] = bytes.try_into().ok()?;
        Scalar::from_repr(FieldBytes::from(raw)).into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn element_roundtrip_including_identity() {
        let g = Secp256k1::generator();
        for e in [g, g * Scalar::from(12345u64), Secp256k1::identity()] {
            let bytes = Secp256k1::encode_element(&e);
            assert_eq!(bytes.len(), 64);
            assert_eq!(Secp256k1::decode_element(&bytes), Some(e));
            assert_eq!(Secp256k1::encode_compressed(&e).len(), 33);
        }
    }

    #[test]
    fn off_curve_rejected() {
        let mut bytes = Secp256k1::encode_element(&Secp256k1::generator());
        bytes[63] ^= 1;
        assert!(Secp256k1::decode_element(&bytes).is_none());
        assert!(Secp256k1::decode_scalar(&[0xff; 32]).is_none());
    }
}
