//! The three contracts as explicit state machines over the mock ledger.
//!
//! - [`PrisonersContract`] (CTP): client ↔ two clouds. Escrows wages and
//!   deposits, settles on matching results or through the TTP.
//! - [`ColludersContract`] (CTC): the clouds' side agreement to both deliver a
//!   wrong value `r`, with deposits that punish whoever deviates.
//! - [`TraitorsContract`] (CTT): client ↔ the first cloud to report a
//!   collusion; refunds its CTP penalty if it delivers the correct result here.
//!
//! Contracts never call each other; the [`Chain`] owns all of them and passes
//! read-only views where one contract inspects another. Every call, accepted or
//! refused, lands in the ledger transcript with a clause tag of the form
//! `contract/operation/clause`.

mod colluders;
mod prisoners;
mod traitors;
pub mod fuzz;

use serde::{Deserialize, Serialize};

pub use colluders::{ColludersContract, ColludersCreate, ColludersState, EnforceBranch};
pub use prisoners::{
    DisputeRecord, PrisonersContract, PrisonersCreate, PrisonersState, ResolutionProof,
};
pub use traitors::{CheckBranch, TraitorsContract, TraitorsState};

use crate::crypto::{EqProof, Group, GroupParams, Commitment};
use crate::ledger::{AccountId, AccountKind, Entry, Ledger, LedgerError, Money, RecordKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContractError {
    #[error("{contract}: wrong state {found} (needs {expected})")]
    WrongState { contract: String, expected: &'static str, found: String },
    #[error("{contract}: deadline {deadline} has passed (now {now})")]
    DeadlinePassed { contract: String, deadline: u64, now: u64 },
    #[error("{contract}: too early, allowed from {from} (now {now})")]
    TooEarly { contract: String, from: u64, now: u64 },
    #[error("bad deadlines: {0}")]
    BadDeadlines(String),
    #[error("bad terms: {0}")]
    BadTerms(String),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("{0}: caller is not the client")]
    NotClient(String),
    #[error("{0}: caller is not the TTP")]
    NotTtp(String),
    #[error("{0}: caller is not a worker")]
    NotAWorker(String),
    #[error("{0}: cloud already bid")]
    DoubleBid(String),
    #[error("{0}: cloud already delivered")]
    DoubleDeliver(String),
    #[error("{contract}: {who} is not a party to this contract")]
    NotParty { contract: String, who: String },
    #[error("{0}: the Prisoner's contract has not concluded")]
    EnforceBeforeSettlement(String),
    #[error("{0}: the Prisoner's contract was not settled by dispute")]
    NoDisputeRecord(String),
    #[error("{contract}: TTP supplied a proof for cloud {cloud} that does not verify")]
    TtpProofRejected { contract: String, cloud: usize },
    #[error("{0}: referenced contract is not in a usable state")]
    BadReference(String),
    #[error("no such contract {0}")]
    UnknownContract(String),
}

/// Contract balance bookkeeping: what was paid in, what was paid out.
#[derive(Debug, Clone)]
pub struct Escrow {
    account: AccountId,
    deposits: Vec<(AccountId, Money)>,
    paid_out: Money,
}

impl Escrow {
    fn new(account: AccountId) -> Self {
        Escrow { account, deposits: Vec::new(), paid_out: Money::ZERO }
    }

    pub fn account(&self) -> AccountId {
        self.account
    }

    pub fn deposits(&self) -> &[(AccountId, Money)] {
        &self.deposits
    }

    pub fn has_deposit_from(&self, who: AccountId) -> bool {
        self.deposits.iter().any(|(a, _)| *a == who)
    }

    pub fn total_deposited(&self) -> Money {
        self.deposits.iter().map(|(_, m)| *m).sum()
    }

    pub fn paid_out(&self) -> Money {
        self.paid_out
    }

    /// What the contract should hold right now.
    pub fn held(&self) -> Money {
        self.total_deposited().checked_sub(self.paid_out).expect("paid out more than deposited")
    }

    fn deposit(&mut self, ledger: &mut Ledger, from: AccountId, amount: Money) -> Result<(), ContractError> {
        ledger.transfer(from, self.account, amount)?;
        self.deposits.push((from, amount));
        Ok(())
    }

    fn pay(&mut self, ledger: &mut Ledger, to: AccountId, amount: Money) {
        if amount == Money::ZERO {
            return;
        }
        ledger.transfer(self.account, to, amount).expect("escrow covers every payout");
        self.paid_out += amount;
    }

    fn pay_rest(&mut self, ledger: &mut Ledger, to: AccountId) {
        let rest = self.held();
        self.pay(ledger, to, rest);
    }

    /// Returns every deposit to its depositor. Only valid before any payout.
    fn refund(&mut self, ledger: &mut Ledger) {
        assert_eq!(self.paid_out, Money::ZERO, "refund after partial payout");
        for (who, amount) in self.deposits.clone() {
            self.pay(ledger, who, amount);
        }
    }
}

fn wrong_state(contract: &str, expected: &'static str, found: impl std::fmt::Display) -> ContractError {
    ContractError::WrongState { contract: contract.to_string(), expected, found: found.to_string() }
}

fn before(contract: &str, deadline: u64, now: u64) -> Result<(), ContractError> {
    if now < deadline {
        Ok(())
    } else {
        Err(ContractError::DeadlinePassed { contract: contract.to_string(), deadline, now })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CtpId(pub usize);
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CtcId(pub usize);
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CttId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Registered {
    Prisoners(usize),
    Colluders(usize),
    Traitors(usize),
}

/// The mock chain: a ledger plus every deployed contract.
#[derive(Debug, Clone)]
pub struct Chain<G: Group> {
    pub ledger: Ledger,
    gp: GroupParams<G>,
    prisoners: Vec<PrisonersContract<G>>,
    colluders: Vec<ColludersContract<G>>,
    traitors: Vec<TraitorsContract<G>>,
    registry: Vec<Registered>,
}

impl<G: Group> Chain<G> {
    pub fn new(gp: GroupParams<G>) -> Self {
        Chain {
            ledger: Ledger::new(),
            gp,
            prisoners: Vec::new(),
            colluders: Vec::new(),
            traitors: Vec::new(),
            registry: Vec::new(),
        }
    }

    pub fn group(&self) -> &GroupParams<G> {
        &self.gp
    }

    pub fn now(&self) -> u64 {
        self.ledger.now()
    }

    pub fn open_account(&mut self, name: &str) -> AccountId {
        self.ledger.open_account(name, AccountKind::External)
    }

    fn deployed(&mut self, name: &str, reg: Registered) -> AccountId {
        let account = self.ledger.open_account(name, AccountKind::Contract);
        self.registry.push(reg);
        self.ledger.log(Entry::new(RecordKind::Tx, name, "deploy").states("-", "INIT"));
        account
    }

    pub fn deploy_prisoners(&mut self) -> CtpId {
        let id = self.prisoners.len();
        let name = format!("CTP#{id}");
        let account = self.deployed(&name, Registered::Prisoners(id));
        self.prisoners.push(PrisonersContract::new(name, account));
        CtpId(id)
    }

    pub fn deploy_colluders(&mut self) -> CtcId {
        let id = self.colluders.len();
        let name = format!("CTC#{id}");
        let account = self.deployed(&name, Registered::Colluders(id));
        self.colluders.push(ColludersContract::new(name, account));
        CtcId(id)
    }

    pub fn deploy_traitors(&mut self) -> CttId {
        let id = self.traitors.len();
        let name = format!("CTT#{id}");
        let account = self.deployed(&name, Registered::Traitors(id));
        self.traitors.push(TraitorsContract::new(name, account));
        CttId(id)
    }

    pub fn prisoners(&self, id: CtpId) -> &PrisonersContract<G> {
        &self.prisoners[id.0]
    }

    pub fn colluders(&self, id: CtcId) -> &ColludersContract<G> {
        &self.colluders[id.0]
    }

    pub fn traitors(&self, id: CttId) -> &TraitorsContract<G> {
        &self.traitors[id.0]
    }

    pub fn prisoners_ids(&self) -> impl Iterator<Item = CtpId> {
        (0..self.prisoners.len()).map(CtpId)
    }

    pub fn colluders_ids(&self) -> impl Iterator<Item = CtcId> {
        (0..self.colluders.len()).map(CtcId)
    }

    pub fn traitors_ids(&self) -> impl Iterator<Item = CttId> {
        (0..self.traitors.len()).map(CttId)
    }

    fn check_ctp(&self, id: CtpId) -> Result<(), ContractError> {
        (id.0 < self.prisoners.len()).then_some(()).ok_or(ContractError::UnknownContract(format!("CTP#{}", id.0)))
    }

    fn check_ctc(&self, id: CtcId) -> Result<(), ContractError> {
        (id.0 < self.colluders.len()).then_some(()).ok_or(ContractError::UnknownContract(format!("CTC#{}", id.0)))
    }

    fn check_ctt(&self, id: CttId) -> Result<(), ContractError> {
        (id.0 < self.traitors.len()).then_some(()).ok_or(ContractError::UnknownContract(format!("CTT#{}", id.0)))
    }

    fn book<T>(&mut self, caller: AccountId, op: &str, contract: &str, r: Result<T, ContractError>) -> Result<T, ContractError> {
        if let Err(e) = &r {
            let actor = self.ledger.name(caller).to_string();
            self.ledger.log(
                Entry::new(RecordKind::Rejected, actor, format!("{contract}/{op}"))
                    .detail(serde_json::json!({ "error": e.to_string() })),
            );
        }
        r
    }

    // ---- Prisoner's contract

    pub fn ctp_create(&mut self, id: CtpId, caller: AccountId, args: PrisonersCreate<G>) -> Result<(), ContractError> {
        self.check_ctp(id)?;
        let r = self.prisoners[id.0].create(&mut self.ledger, caller, args);
        self.book(caller, "create", "ctp", r)
    }

    pub fn ctp_bid(&mut self, id: CtpId, caller: AccountId) -> Result<(), ContractError> {
        self.check_ctp(id)?;
        let r = self.prisoners[id.0].bid(&mut self.ledger, caller);
        self.book(caller, "bid", "ctp", r)
    }

    pub fn ctp_deliver(&mut self, id: CtpId, caller: AccountId, com_y: Commitment<G>) -> Result<(), ContractError> {
        self.check_ctp(id)?;
        let r = self.prisoners[id.0].deliver(&mut self.ledger, caller, com_y);
        self.book(caller, "deliver", "ctp", r)
    }

    pub fn ctp_pay(&mut self, id: CtpId, caller: AccountId, proof: Option<EqProof<G>>) -> Result<PrisonersState, ContractError> {
        self.check_ctp(id)?;
        let r = self.prisoners[id.0].pay(&mut self.ledger, &self.gp, caller, proof);
        self.book(caller, "pay", "ctp", r)
    }

    pub fn ctp_dispute(
        &mut self,
        id: CtpId,
        caller: AccountId,
        com_yt: Commitment<G>,
        proofs: [ResolutionProof<G>; 2],
    ) -> Result<DisputeRecord<G>, ContractError> {
        self.check_ctp(id)?;
        let r = self.prisoners[id.0].dispute(&mut self.ledger, &self.gp, caller, com_yt, proofs);
        self.book(caller, "dispute", "ctp", r)
    }

    // ---- Colluder's contract

    pub fn ctc_create(&mut self, id: CtcId, caller: AccountId, args: ColludersCreate<G>) -> Result<(), ContractError> {
        self.check_ctc(id)?;
        self.check_ctp(args.ctp)?;
        let ctp = &self.prisoners[args.ctp.0];
        let r = self.colluders[id.0].create(&mut self.ledger, ctp, caller, args);
        self.book(caller, "create", "ctc", r)
    }

    pub fn ctc_join(&mut self, id: CtcId, caller: AccountId) -> Result<(), ContractError> {
        self.check_ctc(id)?;
        let ctp = self.colluders[id.0].ctp().map(|c| &self.prisoners[c.0]);
        let r = self.colluders[id.0].join(&mut self.ledger, ctp, caller);
        self.book(caller, "join", "ctc", r)
    }

    pub fn ctc_enforce(&mut self, id: CtcId, caller: AccountId) -> Result<EnforceBranch, ContractError> {
        self.check_ctc(id)?;
        let ctp = self.colluders[id.0].ctp().map(|c| &self.prisoners[c.0]);
        let r = self.colluders[id.0].enforce(&mut self.ledger, ctp, caller);
        self.book(caller, "enforce", "ctc", r)
    }

    // ---- Traitor's contract

    pub fn ctt_create(
        &mut self,
        id: CttId,
        caller: AccountId,
        ctp: CtpId,
        ctc: Option<CtcId>,
        traitor: AccountId,
    ) -> Result<(), ContractError> {
        self.check_ctt(id)?;
        self.check_ctp(ctp)?;
        if let Some(c) = ctc {
            self.check_ctc(c)?;
        }
        let ctc_view = ctc.map(|c| (c, &self.colluders[c.0]));
        let r = self.traitors[id.0].create(&mut self.ledger, (ctp, &self.prisoners[ctp.0]), ctc_view, caller, traitor);
        self.book(caller, "create", "ctt", r)
    }

    pub fn ctt_join(&mut self, id: CttId, caller: AccountId) -> Result<(), ContractError> {
        self.check_ctt(id)?;
        let ctp = self.traitors[id.0].ctp().map(|c| &self.prisoners[c.0]);
        let r = self.traitors[id.0].join(&mut self.ledger, ctp, caller);
        self.book(caller, "join", "ctt", r)
    }

    pub fn ctt_deliver(&mut self, id: CttId, caller: AccountId, com_y: Commitment<G>) -> Result<(), ContractError> {
        self.check_ctt(id)?;
        let ctp = self.traitors[id.0].ctp().map(|c| &self.prisoners[c.0]);
        let r = self.traitors[id.0].deliver(&mut self.ledger, ctp, caller, com_y);
        self.book(caller, "deliver", "ctt", r)
    }

    pub fn ctt_check(&mut self, id: CttId, caller: AccountId, proof: Option<EqProof<G>>) -> Result<CheckBranch, ContractError> {
        self.check_ctt(id)?;
        let ctp = self.traitors[id.0].ctp().map(|c| &self.prisoners[c.0]);
        let r = self.traitors[id.0].check(&mut self.ledger, &self.gp, ctp, caller, proof);
        self.book(caller, "check", "ctt", r)
    }

    // ---- time

    /// Advances the clock by `dt` and delivers timer ticks to every contract
    /// in deployment order, repeating until a full pass changes nothing.
    pub fn advance_time(&mut self, dt: u64) -> Result<u64, ContractError> {
        let now = self.ledger.advance_clock(dt)?;
        self.run_timers();
        Ok(now)
    }

    /// Advances in unit steps until the clock reads `target` (no-op if it
    /// already does or has passed it).
    pub fn advance_to(&mut self, target: u64, step: u64) -> Result<u64, ContractError> {
        let step = step.max(1);
        while self.now() < target {
            let dt = step.min(target - self.now());
            self.advance_time(dt)?;
        }
        Ok(self.now())
    }

    fn run_timers(&mut self) {
        loop {
            let mut changed = false;
            for reg in self.registry.clone() {
                changed |= match reg {
                    Registered::Prisoners(i) => self.prisoners[i].timer(&mut self.ledger),
                    Registered::Colluders(i) => self.colluders[i].timer(&mut self.ledger),
                    Registered::Traitors(i) => {
                        let ctp = self.traitors[i].ctp().map(|c| &self.prisoners[c.0]);
                        self.traitors[i].timer(&mut self.ledger, ctp)
                    }
                };
            }
            if !changed {
                break;
            }
        }
    }

    /// Every contract's account balance against its own bookkeeping.
    pub fn escrow_mismatches(&self) -> Vec<String> {
        let mut out = Vec::new();
        let escrows = self
            .prisoners
            .iter()
            .map(|c| (c.name(), c.escrow()))
            .chain(self.colluders.iter().map(|c| (c.name(), c.escrow())))
            .chain(self.traitors.iter().map(|c| (c.name(), c.escrow())));
        for (name, e) in escrows {
            let actual = self.ledger.balance(e.account());
            if actual != e.held() {
                out.push(format!("{name}: balance {actual}, bookkeeping {}", e.held()));
            }
        }
        out
    }

    /// Contracts in a terminal state must hold nothing.
    pub fn terminal_escrow_leftovers(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |name: &str, terminal: bool, account: AccountId| {
            let bal = self.ledger.balance(account);
            if terminal && bal != Money::ZERO {
                out.push(format!("{name} is terminal but holds {bal}"));
            }
        };
        for c in &self.prisoners {
            check(c.name(), c.state().is_terminal(), c.escrow().account());
        }
        for c in &self.colluders {
            check(c.name(), c.state().is_terminal(), c.escrow().account());
        }
        for c in &self.traitors {
            check(c.name(), c.state().is_terminal(), c.escrow().account());
        }
        out
    }
}
