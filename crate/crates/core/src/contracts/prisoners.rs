use std::fmt;

use serde::{Deserialize, Serialize};

use super::{before, wrong_state, ContractError, Escrow};
use crate::crypto::{verify_eq, verify_neq, Commitment, EqProof, Group, GroupParams, NeqProof};
use crate::ledger::{AccountId, Entry, Ledger, Money, RecordKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PrisonersState {
    Init,
    Created,
    Compute,
    Pay,
    Error,
    Done,
    Aborted,
}

impl PrisonersState {
    pub fn is_terminal(self) -> bool {
        matches!(self, PrisonersState::Done | PrisonersState::Aborted)
    }
}

impl fmt::Display for PrisonersState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PrisonersState::Init => "INIT",
            PrisonersState::Created => "CREATED",
            PrisonersState::Compute => "COMPUTE",
            PrisonersState::Pay => "PAY",
            PrisonersState::Error => "ERROR",
            PrisonersState::Done => "DONE",
            PrisonersState::Aborted => "ABORTED",
        };
        f.write_str(s)
    }
}

/// Arguments of the client's `create` message.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrisonersCreate<G: Group> {
    pub com_f: Commitment<G>,
    pub com_x: Commitment<G>,
    pub w: Money,
    pub d: Money,
    pub ch: Money,
    pub t1: u64,
    pub t2: u64,
    pub t3: u64,
    pub ttp: AccountId,
}

/// The TTP's evidence about one cloud's result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResolutionProof<G: Group> {
    /// The cloud's result equals the TTP's.
    Equal(EqProof<G>),
    /// The cloud's result differs from the TTP's.
    Unequal(NeqProof<G>),
    /// Nothing delivered, or the delivered opening was bad.
    Absent,
    /// Bytes that do not decode as either proof; treated as absent, flagged.
    Malformed(Vec<u8>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(bound = "")]
pub struct DisputeRecord<G: Group> {
    pub com_yt: Commitment<G>,
    /// Indexed by worker order (first bidder first).
    pub cheated: [bool; 2],
    pub malformed: [bool; 2],
}

#[derive(Debug, Clone)]
pub struct PrisonersContract<G: Group> {
    name: String,
    state: PrisonersState,
    escrow: Escrow,
    client: Option<AccountId>,
    ttp: Option<AccountId>,
    terms: Option<PrisonersCreate<G>>,
    workers: Vec<AccountId>,
    results: Vec<(AccountId, Commitment<G>)>,
    dispute: Option<DisputeRecord<G>>,
}

const C: &str = "ctp";

impl<G: Group> PrisonersContract<G> {
    pub(super) fn new(name: String, account: AccountId) -> Self {
        PrisonersContract {
            name,
            state: PrisonersState::Init,
            escrow: Escrow::new(account),
            client: None,
            ttp: None,
            terms: None,
            workers: Vec::new(),
            results: Vec::new(),
            dispute: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state(&self) -> PrisonersState {
        self.state
    }

    pub fn escrow(&self) -> &Escrow {
        &self.escrow
    }

    pub fn client(&self) -> Option<AccountId> {
        self.client
    }

    pub fn ttp(&self) -> Option<AccountId> {
        self.ttp
    }

    pub fn terms(&self) -> Option<&PrisonersCreate<G>> {
        self.terms.as_ref()
    }

    pub fn workers(&self) -> &[AccountId] {
        &self.workers
    }

    pub fn worker_index(&self, who: AccountId) -> Option<usize> {
        self.workers.iter().position(|w| *w == who)
    }

    /// Delivered commitments in delivery order.
    pub fn results(&self) -> &[(AccountId, Commitment<G>)] {
        &self.results
    }

    pub fn result_of(&self, who: AccountId) -> Option<Commitment<G>> {
        self.results.iter().find(|(a, _)| *a == who).map(|(_, c)| *c)
    }

    pub fn dispute_record(&self) -> Option<&DisputeRecord<G>> {
        self.dispute.as_ref()
    }

    fn log(&self, ledger: &mut Ledger, kind: RecordKind, actor: AccountId, op: &str, clause: &str, from: PrisonersState) {
        let actor = ledger.name(actor).to_string();
        ledger.log(
            Entry::new(kind, actor, format!("{C}/{op}"))
                .clause(format!("{C}/{op}/{clause}"))
                .states(from, self.state)
                .detail(serde_json::json!({ "contract": self.name })),
        );
    }

    fn log_with(&self, ledger: &mut Ledger, actor: AccountId, op: &str, clause: &str, from: PrisonersState, detail: serde_json::Value) {
        let actor = ledger.name(actor).to_string();
        let mut detail = detail;
        detail["contract"] = serde_json::Value::String(self.name.clone());
        ledger.log(
            Entry::new(RecordKind::Tx, actor, format!("{C}/{op}"))
                .clause(format!("{C}/{op}/{clause}"))
                .states(from, self.state)
                .detail(detail),
        );
    }

    pub(super) fn create(&mut self, ledger: &mut Ledger, caller: AccountId, args: PrisonersCreate<G>) -> Result<(), ContractError> {
        if self.state != PrisonersState::Init {
            return Err(wrong_state(&self.name, "INIT", self.state));
        }
        let now = ledger.now();
        if !(now < args.t1 && args.t1 < args.t2 && args.t2 < args.t3) {
            return Err(ContractError::BadDeadlines(format!(
                "need now < T1 < T2 < T3, got {now} / {} / {} / {}",
                args.t1, args.t2, args.t3
            )));
        }
        if args.w + args.d * 2 < args.ch {
            // the honest cloud's payout w + 2d − ch would be negative
            return Err(ContractError::BadTerms("w + 2d < ch".into()));
        }
        if caller == args.ttp {
            return Err(ContractError::NotParty { contract: self.name.clone(), who: "client as TTP".into() });
        }
        self.escrow.deposit(ledger, caller, args.w * 2 + args.ch)?;
        self.client = Some(caller);
        self.ttp = Some(args.ttp);
        self.terms = Some(args);
        let from = self.state;
        self.state = PrisonersState::Created;
        self.log_with(
            ledger,
            caller,
            "create",
            "clause-5",
            from,
            serde_json::json!({
                "com_f": args.com_f.to_hex(),
                "com_x": args.com_x.to_hex(),
                "w": args.w, "d": args.d, "ch": args.ch,
                "T1": args.t1, "T2": args.t2, "T3": args.t3,
            }),
        );
        Ok(())
    }

    pub(super) fn bid(&mut self, ledger: &mut Ledger, caller: AccountId) -> Result<(), ContractError> {
        if self.state != PrisonersState::Created {
            return Err(wrong_state(&self.name, "CREATED", self.state));
        }
        let terms = self.terms.expect("created");
        before(&self.name, terms.t1, ledger.now())?;
        if Some(caller) == self.client || Some(caller) == self.ttp {
            return Err(ContractError::NotParty { contract: self.name.clone(), who: ledger.name(caller).into() });
        }
        if self.escrow.has_deposit_from(caller) {
            return Err(ContractError::DoubleBid(self.name.clone()));
        }
        self.escrow.deposit(ledger, caller, terms.d)?;
        self.workers.push(caller);
        let from = self.state;
        if self.workers.len() == 2 {
            self.state = PrisonersState::Compute;
        }
        self.log(ledger, RecordKind::Tx, caller, "bid", "clause-5", from);
        Ok(())
    }

    pub(super) fn deliver(&mut self, ledger: &mut Ledger, caller: AccountId, com_y: Commitment<G>) -> Result<(), ContractError> {
        if self.state != PrisonersState::Compute {
            return Err(wrong_state(&self.name, "COMPUTE", self.state));
        }
        let terms = self.terms.expect("created");
        before(&self.name, terms.t2, ledger.now())?;
        if !self.workers.contains(&caller) {
            return Err(ContractError::NotAWorker(self.name.clone()));
        }
        if self.result_of(caller).is_some() {
            return Err(ContractError::DoubleDeliver(self.name.clone()));
        }
        self.results.push((caller, com_y));
        let from = self.state;
        if self.results.len() == 2 {
            self.state = PrisonersState::Pay;
        }
        self.log_with(ledger, caller, "deliver", "clause-7", from, serde_json::json!({ "com_y": com_y.to_hex() }));
        Ok(())
    }

    /// Result commitment of worker `i`, if it delivered.
    fn worker_result(&self, i: usize) -> Option<Commitment<G>> {
        self.workers.get(i).and_then(|w| self.result_of(*w))
    }

    pub(super) fn pay(
        &mut self,
        ledger: &mut Ledger,
        gp: &GroupParams<G>,
        caller: AccountId,
        proof: Option<EqProof<G>>,
    ) -> Result<PrisonersState, ContractError> {
        if self.state != PrisonersState::Pay {
            return Err(wrong_state(&self.name, "PAY", self.state));
        }
        let terms = self.terms.expect("created");
        before(&self.name, terms.t3, ledger.now())?;
        let client = self.client.expect("created");
        if caller != client {
            return Err(ContractError::NotClient(self.name.clone()));
        }
        let from = self.state;
        if self.results.is_empty() {
            // 8a: nobody delivered, the client takes everything.
            self.escrow.pay_rest(ledger, client);
            self.state = PrisonersState::Done;
            self.log(ledger, RecordKind::Tx, caller, "pay", "clause-8a", from);
            return Ok(self.state);
        }
        let matching = match (self.worker_result(0), self.worker_result(1), proof) {
            (Some(c1), Some(c2), Some(p)) => verify_eq(gp, &c1, &c2, &p),
            _ => false,
        };
        if matching {
            // 8b: wages plus deposit to each cloud, the unused fee back.
            for w in self.workers.clone() {
                self.escrow.pay(ledger, w, terms.w + terms.d);
            }
            self.escrow.pay(ledger, client, terms.ch);
            self.state = PrisonersState::Done;
            self.log(ledger, RecordKind::Tx, caller, "pay", "clause-8b", from);
        } else {
            self.state = PrisonersState::Error;
            self.log(ledger, RecordKind::Tx, caller, "pay", "clause-8c", from);
        }
        Ok(self.state)
    }

    pub(super) fn dispute(
        &mut self,
        ledger: &mut Ledger,
        gp: &GroupParams<G>,
        caller: AccountId,
        com_yt: Commitment<G>,
        proofs: [ResolutionProof<G>; 2],
    ) -> Result<DisputeRecord<G>, ContractError> {
        if !matches!(self.state, PrisonersState::Pay | PrisonersState::Error) {
            return Err(wrong_state(&self.name, "PAY or ERROR", self.state));
        }
        if Some(caller) != self.ttp {
            return Err(ContractError::NotTtp(self.name.clone()));
        }
        let terms = self.terms.expect("created");
        let client = self.client.expect("created");

        let mut cheated = [false; 2];
        let mut malformed = [false; 2];
        for (i, proof) in proofs.iter().enumerate() {
            let Some(com_y) = self.worker_result(i) else {
                // 9a: no delivery is cheating whatever the TTP sends.
                cheated[i] = true;
                continue;
            };
            cheated[i] = match proof {
                ResolutionProof::Absent => true,
                ResolutionProof::Malformed(_) => {
                    malformed[i] = true;
                    true
                }
                ResolutionProof::Equal(p) => {
                    if !verify_eq(gp, &com_y, &com_yt, p) {
                        return Err(ContractError::TtpProofRejected { contract: self.name.clone(), cloud: i });
                    }
                    false
                }
                ResolutionProof::Unequal(p) => {
                    if !verify_neq(gp, &com_y, &com_yt, p) {
                        return Err(ContractError::TtpProofRejected { contract: self.name.clone(), cloud: i });
                    }
                    true
                }
            };
        }

        let (w, d, ch) = (terms.w, terms.d, terms.ch);
        let clause = match cheated {
            [true, true] => {
                self.escrow.pay(ledger, client, (w + d) * 2);
                "clause-10b"
            }
            [false, false] => {
                for wk in self.workers.clone() {
                    self.escrow.pay(ledger, wk, w + d);
                }
                "clause-10a"
            }
            [false, true] | [true, false] => {
                let honest = if cheated[0] { 1 } else { 0 };
                // the worker list is complete: an honest cloud delivered, so it bid
                self.escrow.pay(ledger, self.workers[honest], (w + d * 2).checked_sub(ch).expect("d > ch/2"));
                self.escrow.pay(ledger, client, w + ch);
                "clause-10c"
            }
        };
        self.escrow.pay(ledger, self.ttp.expect("created"), ch);
        let record = DisputeRecord { com_yt, cheated, malformed };
        self.dispute = Some(record);
        let from = self.state;
        self.state = PrisonersState::Done;
        debug_assert_eq!(self.escrow.held(), Money::ZERO);
        self.log_with(
            ledger,
            caller,
            "dispute",
            clause,
            from,
            serde_json::json!({ "com_yt": com_yt.to_hex(), "cheated": cheated, "malformed": malformed }),
        );
        Ok(record)
    }

    /// Returns whether anything changed.
    pub(super) fn timer(&mut self, ledger: &mut Ledger) -> bool {
        let Some(terms) = self.terms else { return false };
        let client = self.client.expect("created");
        let now = ledger.now();
        let from = self.state;
        let clause = match self.state {
            PrisonersState::Created if now >= terms.t1 => {
                self.escrow.refund(ledger);
                self.state = PrisonersState::Aborted;
                "clause-6"
            }
            PrisonersState::Compute if now >= terms.t2 => {
                self.state = PrisonersState::Pay;
                "clause-8"
            }
            // ERROR is included so escrow can never be locked if the TTP never
            // shows up; an honest client always disputes before T3.
            PrisonersState::Pay | PrisonersState::Error if now >= terms.t3 => {
                for (who, _) in self.results.clone() {
                    self.escrow.pay(ledger, who, terms.w + terms.d);
                }
                self.escrow.pay_rest(ledger, client);
                self.state = PrisonersState::Done;
                "clause-11"
            }
            _ => return false,
        };
        let name = self.name.clone();
        ledger.log(
            Entry::new(RecordKind::Timer, name, format!("{C}/timer"))
                .clause(format!("{C}/timer/{clause}"))
                .states(from, self.state),
        );
        true
    }
}
