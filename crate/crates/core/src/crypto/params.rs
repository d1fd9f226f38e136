use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{hexser, Group, GroupId, DST_DIGEST, DST_HASH_TO_GROUP};

/// Seed used for simulations unless a config overrides it.
pub const DEFAULT_SETUP_SEED: &[u8] = b"countercollusion default setup";

/// Public parameters: the two generators of a prime-order group.
///
/// `p` is the group's fixed generator; `q` comes out of try-and-increment
/// hash-to-group on a public seed, so its discrete log base `p` is unknown to
/// everybody (in the toy group it is of course trivially computable).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GroupParams<G: Group> {
    pub group: GroupId,
    #[serde(serialize_with = "hexser::element::<G, _>", deserialize_with = "hexser::de_element::<G, _>")]
    pub p: G::Element,
    #[serde(serialize_with = "hexser::element::<G, _>", deserialize_with = "hexser::de_element::<G, _>")]
    pub q: G::Element,
    #[serde(serialize_with = "hexser::bytes", deserialize_with = "hexser::de_bytes")]
    pub seed: Vec<u8>,
    /// Counter value at which hash-to-group succeeded.
    pub counter: u32,
}

impl<G: Group> GroupParams<G> {
    pub fn setup(seed: &[u8]) -> Self {
        let (q, counter) = hash_to_group::<G>(seed);
        GroupParams { group: G::ID, p: G::generator(), q, seed: seed.to_vec(), counter }
    }

    pub fn default_setup() -> Self {
        Self::setup(DEFAULT_SETUP_SEED)
    }
}

/// Try-and-increment: hash `DST ‖ be32(len(seed)) ‖ seed ‖ be32(ctr)` until the
/// backend accepts the candidate.
pub fn hash_to_group<G: Group>(seed: &[u8]) -> (G::Element, u32) {
    let seed_len = u32::try_from(seed.len()).expect("seed longer than 4 GiB");
    for ctr in 0u32.. {
        let h: [u8; 32] = Sha256::new()
            .chain_update(DST_HASH_TO_GROUP)
            .chain_update(seed_len.to_be_bytes())
            .chain_update(seed)
            .chain_update(ctr.to_be_bytes())
            .finalize()
            .into();
        if let Some(e) = G::map_candidate(&h) {
            if e != G::identity() && e != G::generator() {
                return (e, ctr);
            }
        }
    }
    unreachable!("hash-to-group exhausted the counter")
}

/// Collision-resistant map from arbitrary bytes into the scalar field.
pub fn digest<G: Group>(data: &[u8]) -> G::Scalar {
    let h: [u8; 32] = Sha256::new().chain_update(DST_DIGEST).chain_update(data).finalize().into();
    G::reduce_hash(&h)
}
