//! Random message schedules against all three contracts at once.
//!
//! Each run opens four funded accounts (some deliberately underfunded), fires a
//! random sequence of contract calls from random senders interleaved with clock
//! ticks, and checks after every step that no money was created or destroyed,
//! every escrow equals what its contract thinks it holds, and every transfer is
//! in the transcript. Once all timers expire nothing may be left in escrow.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::{Chain, ColludersCreate, PrisonersCreate, ResolutionProof};
use crate::crypto::{commit, prove_eq, prove_neq, Commitment, Group, GroupParams, Opening, Toy};
use crate::ledger::{AccountId, Money, Params};

#[derive(Debug, Clone, Copy, Serialize)]
pub enum Msg {
    Create,
    Bid(usize),
    Deliver(usize, u64),
    Pay(bool),
    Dispute,
    CtcCreate,
    CtcJoin(usize),
    Enforce(usize),
    CttCreate(usize),
    CttJoin(usize),
    CttDeliver(usize, u64),
    CttCheck,
    Tick(u64),
}

fn random_msg(rng: &mut ChaCha20Rng) -> Msg {
    let who = rng.gen_range(0..4);
    let value = rng.gen_range(0..3);
    match rng.gen_range(0..13) {
        0 => Msg::Create,
        1 => Msg::Bid(who),
        2 => Msg::Deliver(who, value),
        3 => Msg::Pay(rng.gen()),
        4 => Msg::Dispute,
        5 => Msg::CtcCreate,
        6 => Msg::CtcJoin(who),
        7 => Msg::Enforce(who),
        8 => Msg::CttCreate(who),
        9 => Msg::CttJoin(who),
        10 => Msg::CttDeliver(who, value),
        11 => Msg::CttCheck,
        _ => Msg::Tick(rng.gen_range(1..8)),
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FuzzRun {
    pub seed: u64,
    pub messages: usize,
    pub accepted: usize,
    pub violations: Vec<String>,
}

impl FuzzRun {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// One random schedule, fully determined by `seed`.
pub fn random_schedule(gp: &GroupParams<Toy>, seed: u64) -> FuzzRun {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut chain = Chain::new(gp.clone());
    let names = ["CLT", "TTP", "C1", "C2"];
    let acct: Vec<AccountId> = names.iter().map(|n| chain.open_account(n)).collect();
    let mut out = FuzzRun { seed, ..FuzzRun::default() };
    for a in &acct {
        let f = if rng.gen_bool(0.2) { rng.gen_range(0..500) } else { 5_000 };
        if let Err(e) = chain.ledger.mint(*a, Money(f)) {
            out.violations.push(format!("mint: {e}"));
            return out;
        }
    }
    let p = Params::example();
    let (ctp, ctc, ctt) = (chain.deploy_prisoners(), chain.deploy_colluders(), chain.deploy_traitors());
    let opening = |m: u64, rng: &mut ChaCha20Rng| {
        let o = Opening::<Toy>::random(Toy::scalar_from_u64(m), rng);
        (o, commit(gp, o.m, o.s))
    };
    let mut delivered: Vec<(AccountId, Opening<Toy>)> = Vec::new();
    let mut yprime: Option<(Opening<Toy>, Commitment<Toy>)> = None;
    let f = opening(1, &mut rng);
    let yt = opening(0, &mut rng);
    let r = opening(2, &mut rng);

    let books = |chain: &Chain<Toy>, after: &str, out: &mut FuzzRun| {
        if chain.ledger.total_supply() != chain.ledger.minted() {
            out.violations.push(format!("conservation after {after}"));
        }
        for m in chain.escrow_mismatches() {
            out.violations.push(format!("escrow after {after}: {m:?}"));
        }
        if !chain.ledger.unlogged_transfers().is_empty() {
            out.violations.push(format!("transfer outside the transcript after {after}"));
        }
    };

    for _ in 0..rng.gen_range(5..40) {
        let msg = random_msg(&mut rng);
        out.messages += 1;
        let res = match msg {
            Msg::Create => chain
                .ctp_create(ctp, acct[0], PrisonersCreate { com_f: f.1, com_x: f.1, w: p.w, d: p.d, ch: p.ch, t1: 10, t2: 20, t3: 30, ttp: acct[1] })
                .map(drop),
            Msg::Bid(i) => chain.ctp_bid(ctp, acct[i]),
            Msg::Deliver(i, v) => {
                let y = opening(v, &mut rng);
                let res = chain.ctp_deliver(ctp, acct[i], y.1);
                if res.is_ok() {
                    delivered.push((acct[i], y.0));
                }
                res
            }
            Msg::Pay(with_proof) => {
                let proof = if with_proof && delivered.len() == 2 && delivered[0].1.m == delivered[1].1.m {
                    let (a, b) = (delivered[0].1, delivered[1].1);
                    prove_eq(gp, &commit(gp, a.m, a.s), &commit(gp, b.m, b.s), &a, &b, &mut rng).ok()
                } else {
                    None
                };
                chain.ctp_pay(ctp, acct[0], proof).map(drop)
            }
            Msg::Dispute => {
                let workers = chain.prisoners(ctp).workers().to_vec();
                let proofs = [0, 1].map(|i| {
                    let Some(w) = workers.get(i) else { return ResolutionProof::Absent };
                    let Some((_, o)) = delivered.iter().find(|(a, _)| a == w) else { return ResolutionProof::Absent };
                    let c = commit(gp, o.m, o.s);
                    let proof = if o.m == yt.0.m {
                        prove_eq(gp, &c, &yt.1, o, &yt.0, &mut rng).map(ResolutionProof::Equal)
                    } else {
                        prove_neq(gp, &c, &yt.1, o, &yt.0, &mut rng).map(ResolutionProof::Unequal)
                    };
                    proof.unwrap_or(ResolutionProof::Absent)
                });
                chain.ctp_dispute(ctp, acct[1], yt.1, proofs).map(drop)
            }
            Msg::CtcCreate => chain
                .ctc_create(ctc, acct[2], ColludersCreate { ctp, follower: acct[3], com_r_leader: r.1, com_r_follower: r.1, t: p.t, b: p.b, t4: 15, t5: 40 })
                .map(drop),
            Msg::CtcJoin(i) => chain.ctc_join(ctc, acct[i]),
            Msg::Enforce(i) => chain.ctc_enforce(ctc, acct[i]).map(drop),
            Msg::CttCreate(i) => chain.ctt_create(ctt, acct[0], ctp, Some(ctc), acct[i]),
            Msg::CttJoin(i) => chain.ctt_join(ctt, acct[i]),
            Msg::CttDeliver(i, v) => {
                let y = opening(v, &mut rng);
                let res = chain.ctt_deliver(ctt, acct[i], y.1);
                if res.is_ok() {
                    yprime = Some(y);
                }
                res
            }
            Msg::CttCheck => {
                let proof = yprime
                    .filter(|y| y.0.m == yt.0.m)
                    .and_then(|y| prove_eq(gp, &y.1, &yt.1, &y.0, &yt.0, &mut rng).ok());
                chain.ctt_check(ctt, acct[0], proof).map(drop)
            }
            Msg::Tick(dt) => chain.advance_time(dt).map(drop),
        };
        if res.is_ok() {
            out.accepted += 1;
        }
        books(&chain, &format!("{msg:?}"), &mut out);
    }
    // drain every timer
    if let Err(e) = chain.advance_to(100, 10) {
        out.violations.push(format!("draining timers: {e}"));
    }
    let _ = chain.ctc_enforce(ctc, acct[2]);
    for l in chain.terminal_escrow_leftovers() {
        out.violations.push(format!("left in escrow: {l:?}"));
    }
    books(&chain, "drain", &mut out);
    out
}

/// `runs` schedules with seeds `0..runs`.
pub fn random_schedules(runs: u64) -> Vec<FuzzRun> {
    let gp = GroupParams::<Toy>::setup(&[0x01]);
    (0..runs).map(|s| random_schedule(&gp, s)).collect()
}
