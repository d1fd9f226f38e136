//! Party drivers: the client, two clouds with configurable strategies and the
//! TTP, run the three contract protocols end-to-end over a [`Chain`] with real
//! commitments and proofs.
//!
//! A scenario follows a fixed round schedule so transcripts replay exactly:
//!
//! | time | step |
//! |------|------|
//! | 0 | client creates the Prisoner's contract, sends openings of `f`, `x` |
//! | 1 | bids, C1 first |
//! | 2 | the ringleader (if any) creates the Colluder's contract and messages the follower |
//! | 3 | reports: the follower first, then the ringleader |
//! | 4 | the follower signs the Colluder's contract |
//! | 5 | computation, Traitor's-contract delivery, Prisoner's-contract deliveries |
//! | T2 | client settles or disputes; Traitor's contract checked |
//! | T3, T5 | remaining timers; the ringleader enforces the Colluder's contract |
//!
//! Randomness (blinding factors, proof nonces, the wrong values `r` and
//! `other`) comes from one `ChaCha20Rng` seeded with the scenario seed.

mod strategy;
mod task;

use std::collections::BTreeMap;
use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

pub use strategy::{CloudStrategy, CoalitionRole, CtpAction, ReportChoice};
pub use task::{Task, TaskFunction};

use crate::contracts::{
    Chain, ColludersCreate, ColludersState, ContractError, CtcId, CtpId, CttId, PrisonersCreate, PrisonersState,
    ResolutionProof, TraitorsState,
};
use crate::crypto::{
    commit, digest, open, prove_eq, prove_neq, Commitment, CryptoError, Group, GroupParams, Opening, Secp256k1,
};
use crate::ledger::{AccountId, Entry, Money, Params, Record, RecordKind, Violation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("invalid parameters: {}", .0.iter().map(|v| v.relation()).collect::<Vec<_>>().join(", "))]
    InvalidParams(Vec<Violation>),
    #[error("inconsistent strategies: {0}")]
    InconsistentStrategies(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("client evidence does not open the on-chain commitment to {0}")]
    BadOpenings(&'static str),
    #[error("{0} is not the first reporter")]
    NotFirstReporter(String),
    #[error("task: {0}")]
    Task(String),
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error("invariant breach: {}", .0.join("; "))]
    InvariantBreach(Vec<String>),
}

/// Deadlines of the three contracts, plus the clock granularity used while
/// waiting for them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schedule {
    pub t1: u64,
    pub t2: u64,
    pub t3: u64,
    pub t4: u64,
    pub t5: u64,
    pub tick_step: u64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { t1: 10, t2: 20, t3: 30, t4: 15, t5: 40, tick_step: 1 }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        let Schedule { t1, t2, t3, t4, t5, tick_step } = *self;
        let ok = t1 > 1 && t4 > 4 && t4 < t2 && t2 > 5 && t2 < t3 && t3 < t5 && tick_step > 0;
        if ok {
            Ok(())
        } else {
            Err(ProtocolError::InvalidSchedule(format!(
                "need 1 < T1, 4 < T4 < T2, 5 < T2 < T3 < T5, tick > 0; got T1={t1} T2={t2} T3={t3} T4={t4} T5={t5} tick={tick_step}"
            )))
        }
    }
}

/// How strictly [`run`] checks the monetary parameters before starting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamCheck {
    /// All five relations must hold.
    #[default]
    Strict,
    /// Only `w >= c` and `ch > 2w`; used to compute payoffs for parameter
    /// sets that deliberately break the design constraints.
    Structural,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub params: Params,
    #[serde(default)]
    pub task: Task,
    pub strategy_c1: CloudStrategy,
    pub strategy_c2: CloudStrategy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub schedule: Schedule,
    /// Initial balance minted to every party.
    #[serde(default = "default_funds")]
    pub funds: Money,
    #[serde(default)]
    pub param_check: ParamCheck,
}

fn default_funds() -> Money {
    Money(1_000_000)
}

impl Scenario {
    pub fn new(params: Params, strategy_c1: CloudStrategy, strategy_c2: CloudStrategy, seed: u64) -> Self {
        Scenario {
            params,
            task: Task::default(),
            strategy_c1,
            strategy_c2,
            seed,
            schedule: Schedule::default(),
            funds: default_funds(),
            param_check: ParamCheck::Strict,
        }
    }

    fn strategies(&self) -> [CloudStrategy; 2] {
        [self.strategy_c1, self.strategy_c2]
    }
}

/// A terminal node of one of the four games, e.g. `G2:v10`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TerminalLabel {
    pub game: u8,
    pub node: u32,
}

impl fmt::Display for TerminalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}:v{}", self.game, self.node)
    }
}

impl Serialize for TerminalLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub const PARTIES: [&str; 4] = ["CLT", "TTP", "C1", "C2"];

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    /// `None` when the strategy profile is not a path of any of the games
    /// (e.g. the ringleader reporting its own coalition).
    pub terminal_label: Option<TerminalLabel>,
    /// Game roles of C1 and C2 where they apply (LDR/FLR, TRA/OTH).
    pub roles: BTreeMap<String, String>,
    /// Final minus initial balance. Sums to zero.
    pub balance_deltas: BTreeMap<String, i64>,
    /// Computation cost `c`, charged once to every cloud that evaluated `f(x)`.
    pub costs: BTreeMap<String, i64>,
    /// `balance_deltas − costs`: the utilities of the payoff tables.
    pub payoffs: BTreeMap<String, i64>,
    pub ttp_invoked: bool,
    pub final_states: BTreeMap<String, String>,
    /// Clause tags of the accepted transitions, in order.
    pub clauses: Vec<String>,
    pub transcript: Vec<Record>,
}

impl Outcome {
    pub fn payoff(&self, party: &str) -> i64 {
        self.payoffs[party]
    }

    pub fn delta(&self, party: &str) -> i64 {
        self.balance_deltas[party]
    }

    /// What the client paid out in total (negative if it gained).
    pub fn client_outlay(&self) -> i64 {
        -self.balance_deltas["CLT"]
    }

    pub fn label(&self) -> String {
        self.terminal_label.map_or_else(|| "unmapped".to_string(), |l| l.to_string())
    }
}

/// A value together with its opening, as sent over a private channel.
#[derive(Clone, Debug)]
pub struct Revealed<G: Group> {
    pub value: Vec<u8>,
    pub opening: Opening<G>,
    pub commitment: Commitment<G>,
}

impl<G: Group> Revealed<G> {
    fn new(gp: &GroupParams<G>, value: Vec<u8>, s: G::Scalar) -> Self {
        let opening = Opening::new(digest::<G>(&value), s);
        Revealed { commitment: commit(gp, opening.m, opening.s), value, opening }
    }

    /// The opening matches both the commitment and the revealed value.
    pub fn verifies(&self, gp: &GroupParams<G>, c: &Commitment<G>) -> bool {
        open(gp, c, &self.opening) && digest::<G>(&self.value) == self.opening.m
    }
}

/// What the TTP knows about one cloud's delivery.
#[derive(Clone, Debug)]
pub struct Delivered<G: Group> {
    pub commitment: Option<Commitment<G>>,
    pub revealed: Option<Revealed<G>>,
}

#[derive(Clone, Debug)]
pub struct Resolution<G: Group> {
    pub yt: Revealed<G>,
    pub proofs: [ResolutionProof<G>; 2],
}

/// The TTP recomputes `y_t = f(x)` from the client's evidence and proves, per
/// cloud, equality or inequality against it. A cloud with no delivery or an
/// opening that does not match gets no proof.
pub fn ttp_resolve<G: Group, R: RngCore + rand::CryptoRng>(
    gp: &GroupParams<G>,
    task: &Task,
    com_f: &Commitment<G>,
    com_x: &Commitment<G>,
    f_open: &Opening<G>,
    x_open: &Opening<G>,
    delivered: &[Delivered<G>; 2],
    rng: &mut R,
) -> Result<Resolution<G>, ProtocolError> {
    if !open(gp, com_f, f_open) || f_open.m != digest::<G>(&task.function_bytes()) {
        return Err(ProtocolError::BadOpenings("f"));
    }
    if !open(gp, com_x, x_open) || x_open.m != digest::<G>(&task.input_bytes()) {
        return Err(ProtocolError::BadOpenings("x"));
    }
    let yt = Revealed::new(gp, task.evaluate()?, G::random_scalar(rng));
    let mut proofs = [ResolutionProof::Absent, ResolutionProof::Absent];
    for (i, d) in delivered.iter().enumerate() {
        let (Some(c), Some(rev)) = (&d.commitment, &d.revealed) else { continue };
        if !rev.verifies(gp, c) {
            continue;
        }
        proofs[i] = if rev.opening.m == yt.opening.m {
            ResolutionProof::Equal(prove_eq(gp, c, &yt.commitment, &rev.opening, &yt.opening, rng)?)
        } else {
            ResolutionProof::Unequal(prove_neq(gp, c, &yt.commitment, &rev.opening, &yt.opening, rng)?)
        };
    }
    Ok(Resolution { yt, proofs })
}

#[derive(Clone, Debug)]
struct CloudState<G: Group> {
    /// `(s_i, com_r,i)` offered to or chosen by this cloud.
    offer: Option<(G::Scalar, Commitment<G>)>,
    /// Created or signed the Colluder's contract.
    colluding: bool,
    computed: bool,
    traitor_value: Option<Revealed<G>>,
}

impl<G: Group> Default for CloudState<G> {
    fn default() -> Self {
        CloudState { offer: None, colluding: false, computed: false, traitor_value: None }
    }
}

/// One protocol run in progress. The individual steps are public so tests can
/// drive them one at a time; [`Session::run`] strings them together.
pub struct Session<G: Group> {
    pub chain: Chain<G>,
    pub clt: AccountId,
    pub ttp: AccountId,
    pub clouds: [AccountId; 2],
    pub ctp: CtpId,
    pub ctc: Option<CtcId>,
    params: Params,
    task: Task,
    schedule: Schedule,
    strategies: [CloudStrategy; 2],
    funds: Money,
    rng: ChaCha20Rng,
    f_open: Opening<G>,
    x_open: Opening<G>,
    com_f: Commitment<G>,
    com_x: Commitment<G>,
    fx: Vec<u8>,
    r: Vec<u8>,
    others: [Vec<u8>; 2],
    leader: Option<usize>,
    clouds_state: [CloudState<G>; 2],
    /// Openings the clouds sent the client, by cloud.
    received: [Option<Revealed<G>>; 2],
    traitor: Option<(usize, CttId)>,
    ttp_invoked: bool,
}

impl<G: Group> Session<G> {
    pub fn new(gp: GroupParams<G>, sc: &Scenario) -> Result<Self, ProtocolError> {
        let violations = match sc.param_check {
            ParamCheck::Strict => sc.params.validate(),
            ParamCheck::Structural => sc.params.structural_violations(),
        };
        if !violations.is_empty() {
            return Err(ProtocolError::InvalidParams(violations));
        }
        sc.schedule.validate()?;
        let strategies = sc.strategies();
        let initiators: Vec<usize> =
            (0..2).filter(|&i| strategies[i].coalition_role == CoalitionRole::Initiate).collect();
        if initiators.len() > 1 {
            return Err(ProtocolError::InconsistentStrategies("both clouds initiate a coalition".into()));
        }

        let mut rng = ChaCha20Rng::seed_from_u64(sc.seed);
        let mut chain = Chain::new(gp);
        let accounts = PARTIES.map(|n| chain.open_account(n));
        for a in accounts {
            chain.ledger.mint(a, sc.funds).map_err(ContractError::from)?;
        }
        let ctp = chain.deploy_prisoners();

        // plausible wrong answers; in the toy group digests can collide, so
        // resample until every value maps to a distinct scalar
        let fx = sc.task.evaluate()?;
        let mut taken = vec![digest::<G>(&fx)];
        let mut wrong = |rng: &mut ChaCha20Rng| loop {
            let mut v = vec![0u8; 32];
            rng.fill_bytes(&mut v);
            let d = digest::<G>(&v);
            if !taken.contains(&d) {
                taken.push(d);
                return v;
            }
        };
        let r = wrong(&mut rng);
        let others = [wrong(&mut rng), wrong(&mut rng)];

        let gp = chain.group().clone();
        let f_open = Opening::random(digest::<G>(&sc.task.function_bytes()), &mut rng);
        let x_open = Opening::random(digest::<G>(&sc.task.input_bytes()), &mut rng);
        Ok(Session {
            com_f: commit(&gp, f_open.m, f_open.s),
            com_x: commit(&gp, x_open.m, x_open.s),
            chain,
            clt: accounts[0],
            ttp: accounts[1],
            clouds: [accounts[2], accounts[3]],
            ctp,
            ctc: None,
            params: sc.params,
            task: sc.task.clone(),
            schedule: sc.schedule,
            strategies,
            funds: sc.funds,
            rng,
            f_open,
            x_open,
            fx,
            r,
            others,
            leader: initiators.first().copied(),
            clouds_state: Default::default(),
            received: [None, None],
            traitor: None,
            ttp_invoked: false,
        })
    }

    fn name(i: usize) -> &'static str {
        PARTIES[2 + i]
    }

    fn message(&mut self, from: &str, to: &str, what: &str) {
        self.chain
            .ledger
            .log(Entry::new(RecordKind::Message, from, format!("msg/{what}")).detail(serde_json::json!({ "to": to })));
    }

    fn tick(&mut self) -> Result<(), ProtocolError> {
        self.chain.advance_time(1)?;
        Ok(())
    }

    fn gp(&self) -> GroupParams<G> {
        self.chain.group().clone()
    }

    /// t = 0: the client opens the Prisoner's contract and sends both clouds
    /// the openings of `com_f` and `com_x`.
    pub fn outsource(&mut self) -> Result<(), ProtocolError> {
        let (p, s) = (self.params, self.schedule);
        let args = PrisonersCreate {
            com_f: self.com_f,
            com_x: self.com_x,
            w: p.w,
            d: p.d,
            ch: p.ch,
            t1: s.t1,
            t2: s.t2,
            t3: s.t3,
            ttp: self.ttp,
        };
        self.chain.ctp_create(self.ctp, self.clt, args)?;
        for to in ["C1", "C2"] {
            self.message("CLT", to, "openings-f-x");
        }
        Ok(())
    }

    pub fn bid(&mut self) -> Result<(), ProtocolError> {
        self.tick()?;
        for c in self.clouds {
            self.chain.ctp_bid(self.ctp, c)?;
        }
        Ok(())
    }

    /// The ringleader funds a Colluder's contract and sends the follower
    /// `(CTC, t, b, r, s_l, s_f)`.
    pub fn attempt(&mut self) -> Result<(), ProtocolError> {
        self.tick()?;
        let Some(l) = self.leader else { return Ok(()) };
        let f = 1 - l;
        let gp = self.gp();
        let m = digest::<G>(&self.r);
        let (sl, sf) = (G::random_scalar(&mut self.rng), G::random_scalar(&mut self.rng));
        let (cl, cf) = (commit(&gp, m, sl), commit(&gp, m, sf));
        let ctc = self.chain.deploy_colluders();
        let args = ColludersCreate {
            ctp: self.ctp,
            follower: self.clouds[f],
            com_r_leader: cl,
            com_r_follower: cf,
            t: self.params.t,
            b: self.params.b,
            t4: self.schedule.t4,
            t5: self.schedule.t5,
        };
        self.chain.ctc_create(ctc, self.clouds[l], args)?;
        self.ctc = Some(ctc);
        self.clouds_state[l] = CloudState { offer: Some((sl, cl)), colluding: true, ..Default::default() };
        self.clouds_state[f].offer = Some((sf, cf));
        self.message(Self::name(l), Self::name(f), "collusion-offer");
        Ok(())
    }

    /// Reports in order: non-initiators first, then the ringleader. Later
    /// reporters are turned away by the client and logged.
    pub fn report(&mut self) -> Result<(), ProtocolError> {
        self.tick()?;
        let mut order: Vec<usize> = (0..2).filter(|&i| Some(i) != self.leader).collect();
        order.extend(self.leader);
        for i in order {
            if !self.strategies[i].report_choice.reports() {
                continue;
            }
            match self.traitor_report_procedure(i) {
                Ok(_) | Err(ProtocolError::NotFirstReporter(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }

    /// Cloud `i` reports collusion: the client creates a Traitor's contract
    /// for it and the cloud signs. Only the first reporter is accepted.
    pub fn traitor_report_procedure(&mut self, i: usize) -> Result<CttId, ProtocolError> {
        let who = Self::name(i);
        self.message(who, "CLT", "report");
        if let Some((first, _)) = self.traitor {
            self.chain.ledger.log(
                Entry::new(RecordKind::Rejected, "CLT", "clt/report")
                    .detail(serde_json::json!({ "reporter": who, "first": Self::name(first) })),
            );
            return Err(ProtocolError::NotFirstReporter(who.into()));
        }
        let ctt = self.chain.deploy_traitors();
        self.chain.ctt_create(ctt, self.clt, self.ctp, self.ctc, self.clouds[i])?;
        self.message("CLT", who, "traitor-contract");
        self.chain.ctt_join(ctt, self.clouds[i])?;
        self.traitor = Some((i, ctt));
        Ok(ctt)
    }

    /// The follower signs (or declines) the Colluder's contract.
    pub fn agree(&mut self) -> Result<(), ProtocolError> {
        self.tick()?;
        let (Some(l), Some(ctc)) = (self.leader, self.ctc) else { return Ok(()) };
        let f = 1 - l;
        if self.strategies[f].coalition_role == CoalitionRole::Accept {
            self.chain.ctc_join(ctc, self.clouds[f])?;
            self.clouds_state[f].colluding = true;
        } else {
            self.message(Self::name(f), Self::name(l), "collusion-decline");
        }
        Ok(())
    }

    fn evaluate(&mut self, who: &str) {
        let cost = if who == "TTP" { 0 } else { self.params.c.0 };
        self.chain
            .ledger
            .log(Entry::new(RecordKind::Compute, who, "compute").detail(serde_json::json!({ "cost": cost })));
    }

    fn fresh(&mut self, value: Vec<u8>) -> Revealed<G> {
        let gp = self.gp();
        let taboo: Vec<Commitment<G>> = self.clouds_state.iter().filter_map(|c| c.offer.map(|o| o.1)).collect();
        loop {
            let rev = Revealed::new(&gp, value.clone(), G::random_scalar(&mut self.rng));
            // never hit a collusion commitment by accident
            if !taboo.contains(&rev.commitment) {
                return rev;
            }
        }
    }

    fn ctp_value(&mut self, i: usize) -> Option<Revealed<G>> {
        match self.strategies[i].ctp_action {
            CtpAction::Withhold => None,
            CtpAction::Fx => Some(self.fresh(self.fx.clone())),
            CtpAction::Other => Some(self.fresh(self.others[i].clone())),
            CtpAction::R => {
                let st = &self.clouds_state[i];
                match (st.colluding, st.offer) {
                    (true, Some((s, _))) => Some(Revealed::new(&self.gp(), self.r.clone(), s)),
                    _ => Some(self.fresh(self.r.clone())),
                }
            }
        }
    }

    /// Clouds compute (if their strategy needs `f(x)`), the traitor delivers
    /// to its contract, then both deliver to the Prisoner's contract.
    pub fn deliver(&mut self) -> Result<(), ProtocolError> {
        self.tick()?;
        for i in 0..2 {
            if self.strategies[i].computes() {
                self.evaluate(Self::name(i));
                self.clouds_state[i].computed = true;
            }
        }
        if let Some((i, ctt)) = self.traitor {
            let value = match self.strategies[i].report_choice {
                ReportChoice::ReportCorrect => self.fx.clone(),
                _ => self.others[i].clone(),
            };
            let rev = self.fresh(value);
            self.chain.ctt_deliver(ctt, self.clouds[i], rev.commitment)?;
            self.message(Self::name(i), "CLT", "traitor-opening");
            self.clouds_state[i].traitor_value = Some(rev);
        }
        for i in 0..2 {
            let Some(rev) = self.ctp_value(i) else { continue };
            self.chain.ctp_deliver(self.ctp, self.clouds[i], rev.commitment)?;
            self.message(Self::name(i), "CLT", "result-opening");
            self.received[i] = Some(rev);
        }
        Ok(())
    }

    /// At T2 the client settles: pay on agreement, otherwise dispute through
    /// the TTP. With a Traitor's contract in place it always disputes, then
    /// checks the traitor's delivery.
    pub fn client_drive(&mut self) -> Result<(), ProtocolError> {
        let gp = self.gp();
        self.chain.advance_to(self.schedule.t2, self.schedule.tick_step)?;
        let ctp = self.chain.prisoners(self.ctp);
        if ctp.state() != PrisonersState::Pay {
            // aborted at T1; nothing to settle
            return Ok(());
        }
        if self.traitor.is_none() {
            if ctp.results().is_empty() {
                self.chain.ctp_pay(self.ctp, self.clt, None)?;
                return Ok(());
            }
            let valid: Vec<&Revealed<G>> = (0..2)
                .filter_map(|i| {
                    let c = ctp.result_of(self.clouds[i])?;
                    self.received[i].as_ref().filter(|r| r.verifies(&gp, &c))
                })
                .collect();
            if let [a, b] = valid[..] {
                if a.opening.m == b.opening.m {
                    let proof = prove_eq(&gp, &a.commitment, &b.commitment, &a.opening, &b.opening, &mut self.rng)?;
                    self.chain.ctp_pay(self.ctp, self.clt, Some(proof))?;
                    return Ok(());
                }
            }
            self.chain.ctp_pay(self.ctp, self.clt, None)?;
        }

        let delivered = self.delivered();
        self.message("CLT", "TTP", "arbitration-request");
        self.evaluate("TTP");
        let res = ttp_resolve(&gp, &self.task, &self.com_f, &self.com_x, &self.f_open, &self.x_open, &delivered, &mut self.rng)?;
        self.chain.ctp_dispute(self.ctp, self.ttp, res.yt.commitment, res.proofs)?;
        self.ttp_invoked = true;
        self.message("TTP", "CLT", "y_t-opening");

        if let Some((i, ctt)) = self.traitor {
            if self.chain.traitors(ctt).state() == TraitorsState::Computed {
                let proof = match &self.clouds_state[i].traitor_value {
                    Some(y) if y.opening.m == res.yt.opening.m => Some(prove_eq(
                        &gp,
                        &y.commitment,
                        &res.yt.commitment,
                        &y.opening,
                        &res.yt.opening,
                        &mut self.rng,
                    )?),
                    _ => None,
                };
                self.chain.ctt_check(ctt, self.clt, proof)?;
            }
        }
        Ok(())
    }

    /// Per worker slot of the Prisoner's contract: the on-chain commitment
    /// and whatever opening the client received for it.
    fn delivered(&self) -> [Delivered<G>; 2] {
        let ctp = self.chain.prisoners(self.ctp);
        let mut out = [Delivered { commitment: None, revealed: None }, Delivered { commitment: None, revealed: None }];
        for (slot, w) in ctp.workers().iter().enumerate().take(2) {
            let i = self.clouds.iter().position(|c| c == w).expect("workers are the clouds");
            out[slot] = Delivered { commitment: ctp.result_of(*w), revealed: self.received[i].clone() };
        }
        out
    }

    /// Remaining timers, then the ringleader enforces the Colluder's contract.
    pub fn conclude(&mut self) -> Result<(), ProtocolError> {
        let step = self.schedule.tick_step;
        self.chain.advance_to(self.schedule.t3, step)?;
        self.chain.advance_to(self.schedule.t5, step)?;
        if let (Some(l), Some(ctc)) = (self.leader, self.ctc) {
            if self.chain.colluders(ctc).state() == ColludersState::Colluded {
                self.chain.ctc_enforce(ctc, self.clouds[l])?;
            }
        }
        Ok(())
    }

    pub fn run(mut self) -> Result<Outcome, ProtocolError> {
        self.outsource()?;
        self.bid()?;
        self.attempt()?;
        self.report()?;
        self.agree()?;
        self.deliver()?;
        self.client_drive()?;
        self.conclude()?;
        self.finish()
    }

    fn formed(&self) -> bool {
        self.ctc
            .is_some_and(|c| matches!(self.chain.colluders(c).state(), ColludersState::Colluded | ColludersState::Done))
    }

    /// Where the strategy profile sits in the four games.
    pub fn terminal_label(&self) -> Option<TerminalLabel> {
        let a = |i: usize| self.strategies[i].ctp_action.game_index() as u32;
        let label = |game, node| Some(TerminalLabel { game, node });
        match (self.formed(), self.traitor, self.leader) {
            (false, None, _) => label(1, 4 + 3 * a(0) + a(1)),
            (true, None, Some(l)) => label(2, 6 + 3 * a(l) + a(1 - l)),
            (false, Some((tra, _)), _) => {
                let j = self.strategies[tra].report_choice.game_index() as u32;
                label(3, 13 + 9 * j + 3 * a(1 - tra) + a(tra))
            }
            (true, Some((tra, _)), Some(l)) if tra != l => {
                let j = self.strategies[tra].report_choice.game_index() as u32;
                label(4, 15 + 9 * j + 3 * a(l) + a(tra))
            }
            _ => None,
        }
    }

    fn roles(&self) -> BTreeMap<String, String> {
        let mut roles = BTreeMap::new();
        if let Some(l) = self.leader {
            roles.insert(Self::name(l).to_string(), "LDR".to_string());
            roles.insert(Self::name(1 - l).to_string(), "FLR".to_string());
        }
        if let Some((t, _)) = self.traitor {
            roles.entry(Self::name(t).to_string()).or_insert_with(|| "TRA".to_string());
            roles.entry(Self::name(1 - t).to_string()).or_insert_with(|| "OTH".to_string());
        }
        roles
    }

    fn invariant_breaches(&self) -> Vec<String> {
        let mut out = self.chain.escrow_mismatches();
        out.extend(self.chain.terminal_escrow_leftovers());
        let ledger = &self.chain.ledger;
        if !ledger.unlogged_transfers().is_empty() {
            out.push(format!("{} transfers missing from the transcript", ledger.unlogged_transfers().len()));
        }
        if ledger.total_supply() != ledger.minted() {
            out.push(format!("supply {} != minted {}", ledger.total_supply(), ledger.minted()));
        }
        for (name, state, terminal) in self.states() {
            if !terminal {
                out.push(format!("{name} left in {state}"));
            }
        }
        out
    }

    fn states(&self) -> Vec<(String, String, bool)> {
        let c = &self.chain;
        let mut v = Vec::new();
        for id in c.prisoners_ids() {
            let k = c.prisoners(id);
            v.push((k.name().to_string(), k.state().to_string(), k.state().is_terminal()));
        }
        for id in c.colluders_ids() {
            let k = c.colluders(id);
            v.push((k.name().to_string(), k.state().to_string(), k.state().is_terminal()));
        }
        for id in c.traitors_ids() {
            let k = c.traitors(id);
            v.push((k.name().to_string(), k.state().to_string(), k.state().is_terminal()));
        }
        v
    }

    pub fn finish(self) -> Result<Outcome, ProtocolError> {
        let mut breaches = self.invariant_breaches();
        let accounts = [self.clt, self.ttp, self.clouds[0], self.clouds[1]];
        let mut balance_deltas = BTreeMap::new();
        let mut costs = BTreeMap::new();
        let mut payoffs = BTreeMap::new();
        for (k, (name, acct)) in PARTIES.iter().zip(accounts).enumerate() {
            let delta = self.chain.ledger.balance(acct).as_i64() - self.funds.as_i64();
            let cost = if k >= 2 && self.clouds_state[k - 2].computed { self.params.c.as_i64() } else { 0 };
            balance_deltas.insert(name.to_string(), delta);
            costs.insert(name.to_string(), cost);
            payoffs.insert(name.to_string(), delta - cost);
        }
        let sum: i64 = balance_deltas.values().sum();
        if sum != 0 {
            breaches.push(format!("deltas sum to {sum}"));
        }
        if !breaches.is_empty() {
            return Err(ProtocolError::InvariantBreach(breaches));
        }
        let transcript = self.chain.ledger.transcript().to_vec();
        let clauses = transcript
            .iter()
            .filter(|r| matches!(r.kind, RecordKind::Tx | RecordKind::Timer))
            .filter_map(|r| r.clause.clone())
            .collect();
        Ok(Outcome {
            terminal_label: self.terminal_label(),
            roles: self.roles(),
            balance_deltas,
            costs,
            payoffs,
            ttp_invoked: self.ttp_invoked,
            final_states: self.states().into_iter().map(|(n, s, _)| (n, s)).collect(),
            clauses,
            transcript,
        })
    }
}

/// Runs one scenario end-to-end on the given group.
pub fn run<G: Group>(gp: GroupParams<G>, scenario: &Scenario) -> Result<Outcome, ProtocolError> {
    Session::new(gp, scenario)?.run()
}

/// The canonical entry point: default group setup, default schedule, all
/// parameter constraints enforced.
pub fn run_scenario<G: Group>(
    params: Params,
    task: Task,
    strat1: CloudStrategy,
    strat2: CloudStrategy,
    seed: u64,
) -> Result<Outcome, ProtocolError> {
    let sc = Scenario { task, ..Scenario::new(params, strat1, strat2, seed) };
    run(GroupParams::<G>::default_setup(), &sc)
}

/// [`run_scenario`] on secp256k1.
pub fn run_default(params: Params, strat1: CloudStrategy, strat2: CloudStrategy, seed: u64) -> Result<Outcome, ProtocolError> {
    run_scenario::<Secp256k1>(params, Task::default(), strat1, strat2, seed)
}
