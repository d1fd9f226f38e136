//! A deterministic stand-in for a blockchain: accounts with integer balances,
//! value transfer, a logical clock and an append-only transcript.
//!
//! Supply is minted once, before the first transfer, and conserved afterwards.
//! Contracts (see [`crate::contracts`]) own accounts of kind
//! [`AccountKind::Contract`] and move escrow through [`Ledger::transfer`].

mod params;

use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use serde::{Deserialize, Serialize};

pub use params::{validate_params, Params, Violation};

/// Abstract currency units. Never negative; all arithmetic exact.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Money(pub u64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn checked_sub(self, rhs: Money) -> Option<Money> {
        self.0.checked_sub(rhs.0).map(Money)
    }

    pub fn as_i64(self) -> i64 {
        i64::try_from(self.0).expect("amount exceeds i64")
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0.checked_add(rhs.0).expect("money overflow"))
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        *self = *self + rhs;
    }
}

impl Mul<u64> for Money {
    type Output = Money;
    fn mul(self, k: u64) -> Money {
        Money(self.0.checked_mul(k).expect("money overflow"))
    }
}

impl std::iter::Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccountKind {
    External,
    Contract,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AccountId {
    index: u32,
    kind: AccountKind,
}

impl AccountId {
    pub fn kind(self) -> AccountKind {
        self.kind
    }

    pub fn index(self) -> u32 {
        self.index
    }
}

impl PartialOrd for AccountKind {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AccountKind {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (*self as u8).cmp(&(*other as u8))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("insufficient funds in {account}: balance {balance}, needed {needed}")]
    InsufficientFunds { account: String, balance: Money, needed: Money },
    #[error("clock must advance by at least 1")]
    ZeroAdvance,
    #[error("supply can only be minted before the first transfer")]
    MintAfterStart,
    #[error("unknown account #{0}")]
    UnknownAccount(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub from: String,
    pub to: String,
    pub amount: Money,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordKind {
    /// A contract transition that succeeded.
    Tx,
    /// A contract call that was refused.
    Rejected,
    /// A timer-driven transition.
    Timer,
    /// An off-chain message between parties.
    Message,
    /// A party evaluated the task.
    Compute,
    Mint,
}

/// One transcript line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub seq: usize,
    pub time: u64,
    pub kind: RecordKind,
    pub actor: String,
    pub operation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub amounts: Vec<TransferRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_before: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_after: Option<String>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub detail: serde_json::Value,
}

/// What a caller hands to [`Ledger::log`]; transfers made since the previous
/// log call are attached automatically.
#[derive(Debug, Clone)]
pub struct Entry {
    kind: RecordKind,
    actor: String,
    operation: String,
    clause: Option<String>,
    states: Option<(String, String)>,
    detail: serde_json::Value,
}

impl Entry {
    pub fn new(kind: RecordKind, actor: impl Into<String>, operation: impl Into<String>) -> Self {
        Entry {
            kind,
            actor: actor.into(),
            operation: operation.into(),
            clause: None,
            states: None,
            detail: serde_json::Value::Null,
        }
    }

    pub fn clause(mut self, tag: impl Into<String>) -> Self {
        self.clause = Some(tag.into());
        self
    }

    pub fn states(mut self, before: impl fmt::Display, after: impl fmt::Display) -> Self {
        self.states = Some((before.to_string(), after.to_string()));
        self
    }

    pub fn detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = detail;
        self
    }
}

#[derive(Debug, Clone)]
struct Account {
    name: String,
    kind: AccountKind,
    balance: Money,
}

#[derive(Debug, Clone, Default)]
pub struct Ledger {
    accounts: Vec<Account>,
    clock: u64,
    minted: u128,
    started: bool,
    pending: Vec<TransferRecord>,
    transcript: Vec<Record>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn open_account(&mut self, name: impl Into<String>, kind: AccountKind) -> AccountId {
        let index = u32::try_from(self.accounts.len()).expect("too many accounts");
        self.accounts.push(Account { name: name.into(), kind, balance: Money::ZERO });
        AccountId { index, kind }
    }

    fn account(&self, id: AccountId) -> Result<&Account, LedgerError> {
        self.accounts.get(id.index as usize).ok_or(LedgerError::UnknownAccount(id.index))
    }

    pub fn name(&self, id: AccountId) -> &str {
        self.account(id).map(|a| a.name.as_str()).unwrap_or("?")
    }

    pub fn accounts(&self) -> impl Iterator<Item = (AccountId, &str, Money)> + '_ {
        self.accounts.iter().enumerate().map(|(i, a)| {
            (AccountId { index: i as u32, kind: a.kind }, a.name.as_str(), a.balance)
        })
    }

    /// Credits new supply. Only allowed while setting up, before any transfer.
    pub fn mint(&mut self, id: AccountId, amount: Money) -> Result<(), LedgerError> {
        if self.started {
            return Err(LedgerError::MintAfterStart);
        }
        self.account(id)?;
        let acct = &mut self.accounts[id.index as usize];
        acct.balance += amount;
        self.minted += amount.0 as u128;
        let to = acct.name.clone();
        self.log(
            Entry::new(RecordKind::Mint, "ledger", "mint")
                .detail(serde_json::json!({ "to": to, "amount": amount })),
        );
        Ok(())
    }

    pub fn balance(&self, id: AccountId) -> Money {
        self.account(id).map(|a| a.balance).unwrap_or_default()
    }

    pub fn transfer(&mut self, from: AccountId, to: AccountId, amount: Money) -> Result<(), LedgerError> {
        self.account(to)?;
        let src = self.account(from)?;
        let Some(left) = src.balance.checked_sub(amount) else {
            return Err(LedgerError::InsufficientFunds {
                account: src.name.clone(),
                balance: src.balance,
                needed: amount,
            });
        };
        self.started = true;
        self.accounts[from.index as usize].balance = left;
        self.accounts[to.index as usize].balance += amount;
        self.pending.push(TransferRecord {
            from: self.accounts[from.index as usize].name.clone(),
            to: self.accounts[to.index as usize].name.clone(),
            amount,
        });
        Ok(())
    }

    pub fn total_supply(&self) -> u128 {
        self.accounts.iter().map(|a| a.balance.0 as u128).sum()
    }

    pub fn minted(&self) -> u128 {
        self.minted
    }

    pub fn now(&self) -> u64 {
        self.clock
    }

    /// Moves the clock forward. Contracts are ticked by the chain wrapper,
    /// not here.
    pub fn advance_clock(&mut self, dt: u64) -> Result<u64, LedgerError> {
        if dt == 0 {
            return Err(LedgerError::ZeroAdvance);
        }
        self.started = true;
        self.clock += dt;
        Ok(self.clock)
    }

    pub fn log(&mut self, entry: Entry) {
        let (state_before, state_after) = match entry.states {
            Some((b, a)) => (Some(b), Some(a)),
            None => (None, None),
        };
        self.transcript.push(Record {
            seq: self.transcript.len(),
            time: self.clock,
            kind: entry.kind,
            actor: entry.actor,
            operation: entry.operation,
            clause: entry.clause,
            amounts: std::mem::take(&mut self.pending),
            state_before,
            state_after,
            detail: entry.detail,
        });
    }

    pub fn transcript(&self) -> &[Record] {
        &self.transcript
    }

    /// Transfers made since the last [`Ledger::log`] call.
    pub fn unlogged_transfers(&self) -> &[TransferRecord] {
        &self.pending
    }
}
