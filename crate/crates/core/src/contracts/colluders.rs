use std::fmt;

use serde::{Deserialize, Serialize};

use super::{before, wrong_state, ContractError, CtpId, Escrow, PrisonersContract, PrisonersState};
use crate::crypto::{Commitment, Group};
use crate::ledger::{AccountId, Entry, Ledger, Money, RecordKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ColludersState {
    Init,
    Created,
    Colluded,
    Done,
    Aborted,
}

impl ColludersState {
    pub fn is_terminal(self) -> bool {
        matches!(self, ColludersState::Done | ColludersState::Aborted)
    }
}

impl fmt::Display for ColludersState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColludersState::Init => "INIT",
            ColludersState::Created => "CREATED",
            ColludersState::Colluded => "COLLUDED",
            ColludersState::Done => "DONE",
            ColludersState::Aborted => "ABORTED",
        })
    }
}

/// The ringleader's `create` message.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ColludersCreate<G: Group> {
    pub ctp: CtpId,
    pub follower: AccountId,
    /// Commitment to `r` the ringleader will deliver.
    pub com_r_leader: Commitment<G>,
    /// Commitment to `r` the follower must deliver.
    pub com_r_follower: Commitment<G>,
    pub t: Money,
    pub b: Money,
    pub t4: u64,
    pub t5: u64,
}

/// Which settlement rule `enforce` applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnforceBranch {
    BothFollow,
    FollowerDeviates,
    LeaderDeviates,
    BothDeviate,
}

#[derive(Debug, Clone)]
pub struct ColludersContract<G: Group> {
    name: String,
    state: ColludersState,
    escrow: Escrow,
    leader: Option<AccountId>,
    terms: Option<ColludersCreate<G>>,
    branch: Option<EnforceBranch>,
}

const C: &str = "ctc";

impl<G: Group> ColludersContract<G> {
    pub(super) fn new(name: String, account: AccountId) -> Self {
        ColludersContract { name, state: ColludersState::Init, escrow: Escrow::new(account), leader: None, terms: None, branch: None }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state(&self) -> ColludersState {
        self.state
    }

    pub fn escrow(&self) -> &Escrow {
        &self.escrow
    }

    pub fn ctp(&self) -> Option<CtpId> {
        self.terms.map(|t| t.ctp)
    }

    pub fn leader(&self) -> Option<AccountId> {
        self.leader
    }

    pub fn follower(&self) -> Option<AccountId> {
        self.terms.map(|t| t.follower)
    }

    pub fn terms(&self) -> Option<&ColludersCreate<G>> {
        self.terms.as_ref()
    }

    pub fn branch(&self) -> Option<EnforceBranch> {
        self.branch
    }

    fn log(&self, ledger: &mut Ledger, kind: RecordKind, actor: String, op: &str, clause: &str, from: ColludersState) {
        ledger.log(
            Entry::new(kind, actor, format!("{C}/{op}"))
                .clause(format!("{C}/{op}/{clause}"))
                .states(from, self.state)
                .detail(serde_json::json!({ "contract": self.name })),
        );
    }

    pub(super) fn create(
        &mut self,
        ledger: &mut Ledger,
        ctp: &PrisonersContract<G>,
        caller: AccountId,
        args: ColludersCreate<G>,
    ) -> Result<(), ContractError> {
        if self.state != ColludersState::Init {
            return Err(wrong_state(&self.name, "INIT", self.state));
        }
        if ctp.state() != PrisonersState::Compute {
            return Err(ContractError::BadReference(format!("{}: {} is {}", self.name, ctp.name(), ctp.state())));
        }
        let ctp_terms = ctp.terms().expect("COMPUTE implies created");
        let now = ledger.now();
        if !(now < args.t4 && args.t4 < ctp_terms.t2 && ctp_terms.t2 < ctp_terms.t3 && ctp_terms.t3 < args.t5) {
            return Err(ContractError::BadDeadlines(format!(
                "need now < T4 < CTP.T2 < CTP.T3 < T5, got {now} / {} / {} / {} / {}",
                args.t4, ctp_terms.t2, ctp_terms.t3, args.t5
            )));
        }
        for who in [caller, args.follower] {
            if ctp.worker_index(who).is_none() {
                return Err(ContractError::NotParty { contract: self.name.clone(), who: ledger.name(who).into() });
            }
        }
        if caller == args.follower {
            return Err(ContractError::NotParty { contract: self.name.clone(), who: "leader as follower".into() });
        }
        self.escrow.deposit(ledger, caller, args.t + args.b)?;
        self.leader = Some(caller);
        self.terms = Some(args);
        let from = self.state;
        self.state = ColludersState::Created;
        let actor = ledger.name(caller).to_string();
        self.log(ledger, RecordKind::Tx, actor, "create", "clause-3", from);
        Ok(())
    }

    pub(super) fn join(&mut self, ledger: &mut Ledger, ctp: Option<&PrisonersContract<G>>, caller: AccountId) -> Result<(), ContractError> {
        if self.state != ColludersState::Created {
            return Err(wrong_state(&self.name, "CREATED", self.state));
        }
        let terms = self.terms.expect("created");
        before(&self.name, terms.t4, ledger.now())?;
        if caller != terms.follower {
            return Err(ContractError::NotParty { contract: self.name.clone(), who: ledger.name(caller).into() });
        }
        let ctp = ctp.expect("created");
        if ctp.state() != PrisonersState::Compute {
            return Err(ContractError::BadReference(format!("{}: {} is {}", self.name, ctp.name(), ctp.state())));
        }
        self.escrow.deposit(ledger, caller, terms.t)?;
        let from = self.state;
        self.state = ColludersState::Colluded;
        let actor = ledger.name(caller).to_string();
        self.log(ledger, RecordKind::Tx, actor, "join", "clause-3", from);
        Ok(())
    }

    pub(super) fn enforce(
        &mut self,
        ledger: &mut Ledger,
        ctp: Option<&PrisonersContract<G>>,
        caller: AccountId,
    ) -> Result<EnforceBranch, ContractError> {
        if self.state != ColludersState::Colluded {
            return Err(wrong_state(&self.name, "COLLUDED", self.state));
        }
        let terms = self.terms.expect("colluded");
        let leader = self.leader.expect("colluded");
        if caller != leader && caller != terms.follower {
            return Err(ContractError::NotParty { contract: self.name.clone(), who: ledger.name(caller).into() });
        }
        let now = ledger.now();
        if now < terms.t5 {
            return Err(ContractError::TooEarly { contract: self.name.clone(), from: terms.t5, now });
        }
        let ctp = ctp.expect("colluded");
        if ctp.state() != PrisonersState::Done {
            return Err(ContractError::EnforceBeforeSettlement(self.name.clone()));
        }
        // Deviation is judged purely on the public commitments.
        let leader_follows = ctp.result_of(leader) == Some(terms.com_r_leader);
        let follower_follows = ctp.result_of(terms.follower) == Some(terms.com_r_follower);
        let (t, b) = (terms.t, terms.b);
        let (branch, clause) = match (leader_follows, follower_follows) {
            (true, true) => {
                self.escrow.pay(ledger, leader, t);
                self.escrow.pay(ledger, terms.follower, t + b);
                (EnforceBranch::BothFollow, "clause-5a")
            }
            (true, false) => {
                self.escrow.pay(ledger, leader, t * 2 + b);
                (EnforceBranch::FollowerDeviates, "clause-5b")
            }
            (false, true) => {
                self.escrow.pay(ledger, terms.follower, t * 2 + b);
                (EnforceBranch::LeaderDeviates, "clause-5c")
            }
            (false, false) => {
                self.escrow.refund(ledger);
                (EnforceBranch::BothDeviate, "clause-5d")
            }
        };
        self.branch = Some(branch);
        let from = self.state;
        self.state = ColludersState::Done;
        let actor = ledger.name(caller).to_string();
        self.log(ledger, RecordKind::Tx, actor, "enforce", clause, from);
        Ok(branch)
    }

    pub(super) fn timer(&mut self, ledger: &mut Ledger) -> bool {
        let Some(terms) = self.terms else { return false };
        if self.state == ColludersState::Created && ledger.now() >= terms.t4 {
            self.escrow.refund(ledger);
            let from = self.state;
            self.state = ColludersState::Aborted;
            self.log(ledger, RecordKind::Timer, self.name.clone(), "timer", "clause-4", from);
            return true;
        }
        false
    }
}
