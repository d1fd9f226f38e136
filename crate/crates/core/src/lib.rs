//! Simulator and equilibrium checker for counter-collusion contracts in
//! two-cloud verifiable computation.
//!
//! A client outsources `f(x)` to two clouds and cross-checks the answers. Three
//! contracts make honesty the rational choice: the *Prisoner's* contract pays
//! honest clouds and forfeits cheaters' deposits, the *Colluder's* contract is
//! the side deal that clouds could use to agree on a wrong answer, and the
//! *Traitor's* contract lets one colluder betray the other for a reward.
//!
//! - [`crypto`]: Pedersen commitments and equality/inequality NIZKs.
//! - [`ledger`]: deterministic mock chain with escrow and a logical clock.
//! - [`contracts`]: the three contract state machines.
//! - [`protocol`]: client, cloud and TTP drivers that run a whole scenario.
//! - [`gametheory`]: extensive-form games and sequential-equilibrium checks.

pub mod crypto;
pub mod ledger;
pub mod contracts;
pub mod protocol;
pub mod gametheory;
