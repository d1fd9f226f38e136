use std::fmt;

use serde::{Deserialize, Serialize};

use super::{before, wrong_state, ColludersContract, ColludersState, ContractError, CtcId, CtpId, Escrow, PrisonersContract, PrisonersState};
use crate::crypto::{verify_eq, Commitment, EqProof, Group, GroupParams};
use crate::ledger::{AccountId, Entry, Ledger, Money, RecordKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TraitorsState {
    Init,
    Created,
    Joined,
    Computed,
    Done,
    Aborted,
}

impl TraitorsState {
    pub fn is_terminal(self) -> bool {
        matches!(self, TraitorsState::Done | TraitorsState::Aborted)
    }
}

impl fmt::Display for TraitorsState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraitorsState::Init => "INIT",
            TraitorsState::Created => "CREATED",
            TraitorsState::Joined => "JOINED",
            TraitorsState::Computed => "COMPUTED",
            TraitorsState::Done => "DONE",
            TraitorsState::Aborted => "ABORTED",
        })
    }
}

/// Which settlement rule `check` applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckBranch {
    /// Nobody cheated: the report was false.
    NoneCheated,
    /// Only the traitor cheated in CTP and it delivered the right value here.
    TraitorBetrayed,
    /// Both cheated and the traitor delivered the right value here.
    BothCheated,
    Otherwise,
}

#[derive(Debug, Clone)]
pub struct TraitorsContract<G: Group> {
    name: String,
    state: TraitorsState,
    escrow: Escrow,
    ctp: Option<CtpId>,
    ctc: Option<CtcId>,
    client: Option<AccountId>,
    traitor: Option<AccountId>,
    w: Money,
    d: Money,
    ch: Money,
    com_y: Option<Commitment<G>>,
    branch: Option<CheckBranch>,
}

const C: &str = "ctt";

impl<G: Group> TraitorsContract<G> {
    pub(super) fn new(name: String, account: AccountId) -> Self {
        TraitorsContract {
            name,
            state: TraitorsState::Init,
            escrow: Escrow::new(account),
            ctp: None,
            ctc: None,
            client: None,
            traitor: None,
            w: Money::ZERO,
            d: Money::ZERO,
            ch: Money::ZERO,
            com_y: None,
            branch: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state(&self) -> TraitorsState {
        self.state
    }

    pub fn escrow(&self) -> &Escrow {
        &self.escrow
    }

    pub fn ctp(&self) -> Option<CtpId> {
        self.ctp
    }

    pub fn ctc(&self) -> Option<CtcId> {
        self.ctc
    }

    pub fn client(&self) -> Option<AccountId> {
        self.client
    }

    pub fn traitor(&self) -> Option<AccountId> {
        self.traitor
    }

    /// The traitor's commitment to what it claims is `f(x)`.
    pub fn delivered(&self) -> Option<Commitment<G>> {
        self.com_y
    }

    pub fn branch(&self) -> Option<CheckBranch> {
        self.branch
    }

    fn log(&self, ledger: &mut Ledger, kind: RecordKind, actor: String, op: &str, clause: &str, from: TraitorsState) {
        ledger.log(
            Entry::new(kind, actor, format!("{C}/{op}"))
                .clause(format!("{C}/{op}/{clause}"))
                .states(from, self.state)
                .detail(serde_json::json!({ "contract": self.name })),
        );
    }

    fn ctp_view<'a>(&self, ctp: Option<&'a PrisonersContract<G>>) -> &'a PrisonersContract<G> {
        ctp.expect("created contracts reference a CTP")
    }

    /// `ctc` is `None` for a report with no Colluder's contract behind it
    /// (a misreport); the client signs regardless.
    pub(super) fn create(
        &mut self,
        ledger: &mut Ledger,
        (ctp_id, ctp): (CtpId, &PrisonersContract<G>),
        ctc: Option<(CtcId, &ColludersContract<G>)>,
        caller: AccountId,
        traitor: AccountId,
    ) -> Result<(), ContractError> {
        if self.state != TraitorsState::Init {
            return Err(wrong_state(&self.name, "INIT", self.state));
        }
        let Some(terms) = ctp.terms() else {
            return Err(ContractError::BadReference(format!("{}: {} has no terms", self.name, ctp.name())));
        };
        before(&self.name, terms.t2, ledger.now())?;
        if ctp.client() != Some(caller) {
            return Err(ContractError::NotClient(self.name.clone()));
        }
        if ctp.worker_index(traitor).is_none() {
            return Err(ContractError::NotAWorker(self.name.clone()));
        }
        if let Some((_, ctc)) = ctc {
            let usable = matches!(ctc.state(), ColludersState::Created | ColludersState::Colluded);
            if !usable || ctc.ctp() != Some(ctp_id) {
                return Err(ContractError::BadReference(format!("{}: {} is {}", self.name, ctc.name(), ctc.state())));
            }
        }
        if terms.d * 2 < terms.ch {
            // clause 8b would pay the client 2d − ch
            return Err(ContractError::BadTerms("2d < ch".into()));
        }
        let amount = (terms.w + terms.d * 2).checked_sub(terms.ch).expect("CTP creation enforces w + 2d >= ch");
        self.escrow.deposit(ledger, caller, amount)?;
        self.ctp = Some(ctp_id);
        self.ctc = ctc.map(|(id, _)| id);
        self.client = Some(caller);
        self.traitor = Some(traitor);
        (self.w, self.d, self.ch) = (terms.w, terms.d, terms.ch);
        let from = self.state;
        self.state = TraitorsState::Created;
        let actor = ledger.name(caller).to_string();
        self.log(ledger, RecordKind::Tx, actor, "create", "clause-4", from);
        Ok(())
    }

    pub(super) fn join(&mut self, ledger: &mut Ledger, ctp: Option<&PrisonersContract<G>>, caller: AccountId) -> Result<(), ContractError> {
        if self.state != TraitorsState::Created {
            return Err(wrong_state(&self.name, "CREATED", self.state));
        }
        if Some(caller) != self.traitor {
            return Err(ContractError::NotParty { contract: self.name.clone(), who: ledger.name(caller).into() });
        }
        let ctp = self.ctp_view(ctp);
        if ctp.state() != PrisonersState::Compute {
            return Err(wrong_state(ctp.name(), "COMPUTE", ctp.state()));
        }
        before(&self.name, ctp.terms().expect("created").t2, ledger.now())?;
        self.escrow.deposit(ledger, caller, self.ch)?;
        let from = self.state;
        self.state = TraitorsState::Joined;
        let actor = ledger.name(caller).to_string();
        self.log(ledger, RecordKind::Tx, actor, "join", "clause-4", from);
        Ok(())
    }

    pub(super) fn deliver(
        &mut self,
        ledger: &mut Ledger,
        ctp: Option<&PrisonersContract<G>>,
        caller: AccountId,
        com_y: Commitment<G>,
    ) -> Result<(), ContractError> {
        if self.state != TraitorsState::Joined {
            return Err(wrong_state(&self.name, "JOINED", self.state));
        }
        if Some(caller) != self.traitor {
            return Err(ContractError::NotParty { contract: self.name.clone(), who: ledger.name(caller).into() });
        }
        let ctp = self.ctp_view(ctp);
        before(&self.name, ctp.terms().expect("created").t2, ledger.now())?;
        if ctp.state() != PrisonersState::Compute {
            return Err(wrong_state(ctp.name(), "COMPUTE", ctp.state()));
        }
        self.com_y = Some(com_y);
        let from = self.state;
        self.state = TraitorsState::Computed;
        let actor = ledger.name(caller).to_string();
        self.log(ledger, RecordKind::Tx, actor, "deliver", "clause-6", from);
        Ok(())
    }

    pub(super) fn check(
        &mut self,
        ledger: &mut Ledger,
        gp: &GroupParams<G>,
        ctp: Option<&PrisonersContract<G>>,
        caller: AccountId,
        proof: Option<EqProof<G>>,
    ) -> Result<CheckBranch, ContractError> {
        if self.state != TraitorsState::Computed {
            return Err(wrong_state(&self.name, "COMPUTED", self.state));
        }
        if Some(caller) != self.client {
            return Err(ContractError::NotClient(self.name.clone()));
        }
        let ctp = self.ctp_view(ctp);
        if ctp.state() != PrisonersState::Done {
            return Err(wrong_state(ctp.name(), "DONE", ctp.state()));
        }
        let Some(record) = ctp.dispute_record() else {
            return Err(ContractError::NoDisputeRecord(self.name.clone()));
        };
        let traitor = self.traitor.expect("computed");
        let client = self.client.expect("computed");
        let me = ctp.worker_index(traitor).expect("traitor is a worker");
        let other = 1 - me;
        let com_y = self.com_y.expect("computed");
        let correct = proof.is_some_and(|p| verify_eq(gp, &com_y, &record.com_yt, &p));
        let (tra_cheated, other_cheated) = (record.cheated[me], record.cheated[other]);

        let (branch, clause) = if !tra_cheated && !other_cheated {
            self.escrow.pay_rest(ledger, client);
            (CheckBranch::NoneCheated, "clause-8a")
        } else if !other_cheated && tra_cheated && correct {
            self.escrow.pay(ledger, traitor, self.w + self.ch);
            self.escrow.pay_rest(ledger, client);
            (CheckBranch::TraitorBetrayed, "clause-8b")
        } else if other_cheated && tra_cheated && correct {
            self.escrow.pay_rest(ledger, traitor);
            (CheckBranch::BothCheated, "clause-8c")
        } else {
            self.escrow.refund(ledger);
            (CheckBranch::Otherwise, "clause-8d")
        };
        self.branch = Some(branch);
        let from = self.state;
        self.state = TraitorsState::Done;
        let actor = ledger.name(caller).to_string();
        self.log(ledger, RecordKind::Tx, actor, "check", clause, from);
        Ok(branch)
    }

    pub(super) fn timer(&mut self, ledger: &mut Ledger, ctp: Option<&PrisonersContract<G>>) -> bool {
        let Some(ctp) = ctp else { return false };
        let Some(terms) = ctp.terms() else { return false };
        let now = ledger.now();
        let from = self.state;
        let clause = match self.state {
            TraitorsState::Created if now >= terms.t2 => {
                self.escrow.refund(ledger);
                self.state = TraitorsState::Aborted;
                "clause-5"
            }
            TraitorsState::Joined if now >= terms.t2 => {
                // signed but never delivered
                self.escrow.pay_rest(ledger, self.client.expect("joined"));
                self.state = TraitorsState::Done;
                "clause-6"
            }
            TraitorsState::Computed if now >= terms.t3 => {
                self.escrow.pay_rest(ledger, self.traitor.expect("computed"));
                self.state = TraitorsState::Done;
                "clause-9"
            }
            _ => return false,
        };
        self.log(ledger, RecordKind::Timer, self.name.clone(), "timer", clause, from);
        true
    }
}
