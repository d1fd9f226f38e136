//! A deliberately tiny group: the quadratic residues modulo the safe prime
//! 1019, of prime order 509, generated by 4. Small enough to brute-force, which
//! is the whole point — never use it for anything but tests.

use std::ops::{Add, Mul, Neg, Sub};

use rand::{CryptoRng, RngCore};

use super::group::{Group, GroupId};

pub const MODULUS: u32 = 1019;
pub const ORDER: u32 = 509;
pub const GENERATOR: u32 = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Toy;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ToyScalar(u16);

impl ToyScalar {
    pub fn new(v: u64) -> Self {
        ToyScalar((v % ORDER as u64) as u16)
    }

    pub fn value(self) -> u32 {
        self.0 as u32
    }
}

impl Add for ToyScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        ToyScalar(((self.0 as u32 + rhs.0 as u32) % ORDER) as u16)
    }
}

impl Sub for ToyScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        ToyScalar(((self.0 as u32 + ORDER - rhs.0 as u32) % ORDER) as u16)
    }
}

impl Mul for ToyScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        ToyScalar(((self.0 as u32 * rhs.0 as u32) % ORDER) as u16)
    }
}

impl Neg for ToyScalar {
    type Output = Self;
    fn neg(self) -> Self {
        ToyScalar(((ORDER - self.0 as u32) % ORDER) as u16)
    }
}

/// A residue in `[1, 1019)`. "Addition" is multiplication mod p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ToyElement(u16);

impl ToyElement {
    /// Returns `None` unless `v` is a non-zero quadratic residue mod p.
    pub fn new(v: u32) -> Option<Self> {
        if v == 0 || v >= MODULUS {
            return None;
        }
        // Euler's criterion; the subgroup is exactly the residues.
        (pow_mod(v, (MODULUS - 1) / 2) == 1).then_some(ToyElement(v as u16))
    }

    pub fn value(self) -> u32 {
        self.0 as u32
    }
}

fn pow_mod(mut base: u32, mut exp: u32) -> u32 {
    let mut acc = 1u32;
    base %= MODULUS;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % MODULUS;
        }
        base = base * base % MODULUS;
        exp >>= 1;
    }
    acc
}

impl Add for ToyElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        ToyElement((self.0 as u32 * rhs.0 as u32 % MODULUS) as u16)
    }
}

impl Neg for ToyElement {
    type Output = Self;
    fn neg(self) -> Self {
        ToyElement(pow_mod(self.0 as u32, MODULUS - 2) as u16)
    }
}

impl Sub for ToyElement {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul<ToyScalar> for ToyElement {
    type Output = Self;
    fn mul(self, k: ToyScalar) -> Self {
        ToyElement(pow_mod(self.0 as u32, k.0 as u32) as u16)
    }
}

impl Group for Toy {
    type Scalar = ToyScalar;
    type Element = ToyElement;

    const ID: GroupId = GroupId::Toy;
    const ELEMENT_BYTES: usize = 2;
    const COMPRESSED_BYTES: usize = 2;
    const SCALAR_BYTES: usize = 2;

    fn generator() -> ToyElement {
        ToyElement(GENERATOR as u16)
    }

    fn identity() -> ToyElement {
        ToyElement(1)
    }

    fn scalar_from_u64(v: u64) -> ToyScalar {
        ToyScalar::new(v)
    }

    fn reduce_hash(h: &[u8; 32]) -> ToyScalar {
        ToyScalar(reduce_be(h, ORDER) as u16)
    }

    fn random_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> ToyScalar {
        // rejection sampling keeps it exactly uniform
        loop {
            let v = rng.next_u32() & 0x1ff;
            if v < ORDER {
                return ToyScalar(v as u16);
            }
        }
    }

    fn map_candidate(h: &[u8; 32]) -> Option<ToyElement> {
        let u = reduce_be(h, MODULUS);
        if u == 0 {
            return None;
        }
        let e = u * u % MODULUS;
        (e != 1).then_some(ToyElement(e as u16))
    }

    fn encode_element(e: &ToyElement) -> Vec<u8> {
        e.0.to_be_bytes().to_vec()
    }

    fn decode_element(bytes: &[u8]) -> Option<ToyElement> {
        let raw: [u8; 2] = bytes.try_into().ok()?;
        ToyElement::new(u16::from_be_bytes(raw) as u32)
    }

    fn encode_compressed(e: &ToyElement) -> Vec<u8> {
        Self::encode_element(e)
    }

    fn encode_scalar(s: &ToyScalar) -> Vec<u8> {
        s.0.to_be_bytes().to_vec()
    }

    fn decode_scalar(bytes: &[u8]) -> Option<ToyScalar> {
        let raw: [u8; 2] = bytes.try_into().ok()?;
        let v = u16::from_be_bytes(raw);
        ((v as u32) < ORDER).then_some(ToyScalar(v))
    }
}

fn reduce_be(bytes: &[u8], modulus: u32) -> u32 {
    bytes
        .iter()
        .fold(0u64, |acc, &b| (acc * 256 + b as u64) % modulus as u64) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_has_prime_order() {
        let g = Toy::generator();
        assert_ne!(g, Toy::identity());
        assert_eq!(g * ToyScalar::new(ORDER as u64), Toy::identity());
        assert_eq!(g * ToyScalar::new(0), Toy::identity());
    }

    #[test]
    fn group_laws() {
        let g = Toy::generator();
        let a = g * ToyScalar::new(17);
        let b = g * ToyScalar::new(300);
        assert_eq!(a + b, g * ToyScalar::new(317));
        assert_eq!(a - a, Toy::identity());
        assert_eq!(a + (-a), Toy::identity());
        assert_eq!(g * (ToyScalar::new(5) * ToyScalar::new(7)), (g * ToyScalar::new(5)) * ToyScalar::new(7));
    }

    #[test]
    fn only_residues_decode() {
        assert!(ToyElement::new(4).is_some());
        // 2 is a non-residue mod 1019 (1019 ≡ 3 mod 8)
        assert!(ToyElement::new(2).is_none());
        assert!(ToyElement::new(0).is_none());
        assert!(Toy::decode_element(&[0x03, 0xfb]).is_none());
        assert!(Toy::decode_scalar(&509u16.to_be_bytes()).is_none());
    }

    #[test]
    fn reduce_matches_small_integers() {
        let mut h = [0u8; 32];
        h[31] = 200;
        h[30] = 2;
        assert_eq!(Toy::reduce_hash(&h).value(), 712 % ORDER);
    }
}
