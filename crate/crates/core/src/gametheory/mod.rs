//! Extensive-form games induced by the contracts, and verifiers for the
//! claimed sequential equilibria.
//!
//! Terminal utilities come from running the matching scenario through
//! [`crate::protocol`] (on the toy group, which is fast and gives the same
//! balances as any other group). The symbolic payoff tables in [`tables`] are
//! an independent statement of the same numbers; [`payoff_crosscheck`]
//! compares the two.
//!
//! Node and information-set names follow the payoff tables: `v0`, `v1`, … and
//! `I1`, `I2.2`, …. Player 0 is C1 (the ringleader in games 2 and 4, the other
//! cloud in game 3); player 1 is C2.

mod game;
mod solve;
pub mod tables;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub use game::{q, ratio, Assessment, Beliefs, Game, GameBuilder, GameError, InfoSet, Node, NodeKind, Profile, Realisation, Q};
pub use solve::{
    check_consistency, check_sequential_rationality, induced_beliefs, ConsistencyReport, NodeGain, RationalityReport,
    ResidualPoint, SetReport,
};
pub use tables::{Crosscheck, CrosscheckRow, Formula};

use crate::crypto::{GroupParams, Toy};
use crate::ledger::{Params, Violation};
use crate::protocol::{self, CloudStrategy, CoalitionRole, CtpAction, ParamCheck, ReportChoice, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GameId {
    G1,
    G2,
    G3,
    G4,
}

impl GameId {
    pub const ALL: [GameId; 4] = [GameId::G1, GameId::G2, GameId::G3, GameId::G4];

    /// The outcome forward play of the claimed equilibrium should reach.
    pub fn predicted(self) -> &'static str {
        match self {
            GameId::G1 => "G1:v4",
            GameId::G2 => "G2:v10",
            GameId::G3 => "G3:v13",
            GameId::G4 => "G3:v13",
        }
    }

    fn players(self) -> [&'static str; 2] {
        match self {
            GameId::G1 => ["C1", "C2"],
            GameId::G2 | GameId::G4 => ["LDR", "FLR"],
            GameId::G3 => ["OTH", "TRA"],
        }
    }
}

impl fmt::Display for GameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for GameId {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, GameError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g1" | "1" => Ok(GameId::G1),
            "g2" | "2" => Ok(GameId::G2),
            "g3" | "3" => Ok(GameId::G3),
            "g4" | "4" => Ok(GameId::G4),
            _ => Err(GameError::Unknown(format!("game {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UtilitySource {
    /// Run every terminal's scenario through the contracts.
    #[default]
    Simulation,
    /// Evaluate the symbolic payoff tables.
    Table,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Replace the collapsed `not-init` / `not-collude` terminals of games 2
    /// and 4 by full copies of game 1 / game 3.
    pub expand: bool,
    pub source: UtilitySource,
    pub param_check: ParamCheck,
}

const ACTIONS: [&str; 3] = ["f(x)", "r", "other"];
const REPORTS: [&str; 3] = ["not-report", "report y'=f(x)", "report y'!=f(x)"];

fn strat(role: CoalitionRole, report: usize, action: usize) -> CloudStrategy {
    CloudStrategy::new(role, ReportChoice::from_game_index(report), CtpAction::from_game_index(action))
}

struct Utilities {
    params: Params,
    source: UtilitySource,
    check: ParamCheck,
    gp: Option<GroupParams<Toy>>,
    cache: HashMap<(CloudStrategy, CloudStrategy), [i64; 2]>,
}

impl Utilities {
    fn new(params: Params, opts: BuildOptions) -> Self {
        Utilities { params, source: opts.source, check: opts.param_check, gp: None, cache: HashMap::new() }
    }

    fn get(&mut self, game: GameId, local: &str, real: Realisation) -> Result<[i64; 2], GameError> {
        match self.source {
            UtilitySource::Table => {
                let [a, b] = tables::total_formulas(game, local)
                    .ok_or_else(|| GameError::Unknown(format!("table entry {game}:{local}")))?;
                Ok([a.eval(&self.params), b.eval(&self.params)])
            }
            UtilitySource::Simulation => {
                let key = (real.strategy_c1, real.strategy_c2);
                if let Some(u) = self.cache.get(&key) {
                    return Ok(*u);
                }
                let gp = self.gp.get_or_insert_with(GroupParams::<Toy>::default_setup).clone();
                let sc = Scenario {
                    param_check: self.check,
                    ..Scenario::new(self.params, real.strategy_c1, real.strategy_c2, 0)
                };
                let o = protocol::run(gp, &sc)
                    .map_err(|e| GameError::Simulation { node: format!("{game}:{local}"), err: e.to_string() })?;
                let u = [o.payoff("C1"), o.payoff("C2")];
                self.cache.insert(key, u);
                Ok(u)
            }
        }
    }
}

struct Ctx<'a> {
    b: GameBuilder,
    u: &'a mut Utilities,
}

impl Ctx<'_> {
    fn label(prefix: &str, local: &str) -> String {
        if prefix.is_empty() {
            local.to_string()
        } else {
            format!("{prefix}/{local}")
        }
    }

    fn set(&mut self, origin: GameId, prefix: &str, local: &str, player: usize, actions: &[&str]) -> usize {
        self.b.info_set_in(origin.to_string(), Self::label(prefix, local), local, player, actions)
    }

    fn attach(&mut self, at: Option<(usize, usize)>, child: usize) {
        if let Some((p, a)) = at {
            self.b.edge(p, a, child);
        }
    }

    fn leaf(&mut self, game: GameId, prefix: &str, local: &str, real: Realisation) -> Result<usize, GameError> {
        let u = self.u.get(game, local, real)?;
        Ok(self.b.terminal(Self::label(prefix, local), format!("{game}:{local}"), u, real))
    }

    /// A collapsed branch standing for the reachable outcome of a sub-game.
    fn collapsed(&mut self, host: GameId, local: &str, outcome: &str, real: Realisation) -> Result<usize, GameError> {
        let u = self.u.get(host, local, real)?;
        Ok(self.b.terminal(local, outcome, u, real))
    }

    fn g1(&mut self, prefix: &str, roles: [CoalitionRole; 2], at: Option<(usize, usize)>) -> Result<usize, GameError> {
        let g = GameId::G1;
        let i1 = self.set(g, prefix, "I1", 0, &ACTIONS);
        let i2 = self.set(g, prefix, "I2", 1, &ACTIONS);
        let v0 = self.b.choice(Self::label(prefix, "v0"), i1);
        self.attach(at, v0);
        for a1 in 0..3 {
            let h = self.b.choice(Self::label(prefix, &format!("v{}", 1 + a1)), i2);
            self.b.edge(v0, a1, h);
            for a2 in 0..3 {
                let real = Realisation { strategy_c1: strat(roles[0], 0, a1), strategy_c2: strat(roles[1], 0, a2) };
                let z = self.leaf(g, prefix, &format!("v{}", 4 + 3 * a1 + a2), real)?;
                self.b.edge(h, a2, z);
            }
        }
        Ok(v0)
    }

    fn g3(&mut self, prefix: &str, roles: [CoalitionRole; 2], at: Option<(usize, usize)>) -> Result<usize, GameError> {
        let g = GameId::G3;
        let i21 = self.set(g, prefix, "I2.1", 1, &REPORTS);
        let i1 = self.set(g, prefix, "I1", 0, &ACTIONS);
        let tra: Vec<usize> = (0..3).map(|j| self.set(g, prefix, &format!("I2.{}", j + 2), 1, &ACTIONS)).collect();
        let v0 = self.b.choice(Self::label(prefix, "v0"), i21);
        self.attach(at, v0);
        for j in 0..3 {
            let oth = self.b.choice(Self::label(prefix, &format!("v{}", 1 + j)), i1);
            self.b.edge(v0, j, oth);
            for ao in 0..3 {
                let h = self.b.choice(Self::label(prefix, &format!("v{}", 4 + 3 * j + ao)), tra[j]);
                self.b.edge(oth, ao, h);
                for at in 0..3 {
                    let real = Realisation { strategy_c1: strat(roles[0], 0, ao), strategy_c2: strat(roles[1], j, at) };
                    let z = self.leaf(g, prefix, &format!("v{}", 13 + 9 * j + 3 * ao + at), real)?;
                    self.b.edge(h, at, z);
                }
            }
        }
        Ok(v0)
    }

    fn g2(&mut self, expand: bool) -> Result<(), GameError> {
        use CoalitionRole::*;
        let g = GameId::G2;
        let i11 = self.set(g, "", "I1.1", 0, &["not-init", "init"]);
        let i21 = self.set(g, "", "I2.1", 1, &["not-collude", "collude"]);
        let i12 = self.set(g, "", "I1.2", 0, &ACTIONS);
        let i22 = self.set(g, "", "I2.2", 1, &ACTIONS);
        let v0 = self.b.choice("v0", i11);
        if expand {
            self.g1("not-init", [Honest, Honest], Some((v0, 0)))?;
        } else {
            let real = Realisation { strategy_c1: CloudStrategy::HONEST, strategy_c2: CloudStrategy::HONEST };
            let z = self.collapsed(g, "not-init", "G1:v4", real)?;
            self.b.edge(v0, 0, z);
        }
        let v1 = self.b.choice("v1", i21);
        self.b.edge(v0, 1, v1);
        if expand {
            self.g1("not-collude", [Initiate, Reject], Some((v1, 0)))?;
        } else {
            let real = Realisation { strategy_c1: strat(Initiate, 0, 0), strategy_c2: strat(Reject, 0, 0) };
            let z = self.collapsed(g, "not-collude", "G1:v4", real)?;
            self.b.edge(v1, 0, z);
        }
        let v2 = self.b.choice("v2", i12);
        self.b.edge(v1, 1, v2);
        for al in 0..3 {
            let h = self.b.choice(format!("v{}", 3 + al), i22);
            self.b.edge(v2, al, h);
            for af in 0..3 {
                let real = Realisation { strategy_c1: strat(Initiate, 0, al), strategy_c2: strat(Accept, 0, af) };
                let z = self.leaf(g, "", &format!("v{}", 6 + 3 * al + af), real)?;
                self.b.edge(h, af, z);
            }
        }
        Ok(())
    }

    fn g4(&mut self, expand: bool) -> Result<(), GameError> {
        use CoalitionRole::*;
        let g = GameId::G4;
        let i11 = self.set(g, "", "I1.1", 0, &["not-init", "init"]);
        let i21 = self.set(g, "", "I2.1", 1, &["not-collude", "collude"]);
        let i22 = self.set(g, "", "I2.2", 1, &REPORTS);
        let i12 = self.set(g, "", "I1.2", 0, &ACTIONS);
        let flr: Vec<usize> = (0..3).map(|j| self.set(g, "", &format!("I2.{}", j + 3), 1, &ACTIONS)).collect();
        let v0 = self.b.choice("v0", i11);
        if expand {
            self.g3("not-init", [Honest, Honest], Some((v0, 0)))?;
        } else {
            let real = Realisation { strategy_c1: CloudStrategy::HONEST, strategy_c2: CloudStrategy::HONEST };
            let z = self.collapsed(g, "not-init", "G3:v13", real)?;
            self.b.edge(v0, 0, z);
        }
        let v1 = self.b.choice("v1", i21);
        self.b.edge(v0, 1, v1);
        if expand {
            self.g3("not-collude", [Initiate, Reject], Some((v1, 0)))?;
        } else {
            let real = Realisation { strategy_c1: strat(Initiate, 0, 0), strategy_c2: strat(Reject, 0, 0) };
            let z = self.collapsed(g, "not-collude", "G3:v13", real)?;
            self.b.edge(v1, 0, z);
        }
        let v2 = self.b.choice("v2", i22);
        self.b.edge(v1, 1, v2);
        for j in 0..3 {
            let ldr = self.b.choice(format!("v{}", 3 + j), i12);
            self.b.edge(v2, j, ldr);
            for al in 0..3 {
                let h = self.b.choice(format!("v{}", 6 + 3 * j + al), flr[j]);
                self.b.edge(ldr, al, h);
                for af in 0..3 {
                    let real = Realisation { strategy_c1: strat(Initiate, 0, al), strategy_c2: strat(Accept, j, af) };
                    let z = self.leaf(g, "", &format!("v{}", 15 + 9 * j + 3 * al + af), real)?;
                    self.b.edge(h, af, z);
                }
            }
        }
        Ok(())
    }
}

fn params_error(v: &[Violation]) -> GameError {
    GameError::InvalidParams(v.iter().map(|v| v.relation()).collect::<Vec<_>>().join(", "))
}

/// Builds one of the four games with every design constraint enforced.
pub fn build_game(id: GameId, params: Params) -> Result<Game, GameError> {
    build_game_with(id, params, BuildOptions::default())
}

pub fn build_game_with(id: GameId, params: Params, opts: BuildOptions) -> Result<Game, GameError> {
    let violations = match opts.param_check {
        ParamCheck::Strict => params.validate(),
        ParamCheck::Structural => params.structural_violations(),
    };
    if !violations.is_empty() {
        return Err(params_error(&violations));
    }
    let mut u = Utilities::new(params, opts);
    let mut ctx = Ctx { b: GameBuilder::new(id.to_string(), id.players()), u: &mut u };
    match id {
        GameId::G1 => {
            ctx.g1("", [CoalitionRole::Honest; 2], None)?;
        }
        GameId::G2 => ctx.g2(opts.expand)?,
        GameId::G3 => {
            ctx.g3("", [CoalitionRole::Honest; 2], None)?;
        }
        GameId::G4 => ctx.g4(opts.expand)?,
    }
    ctx.b.build()
}

fn origin(set: &InfoSet) -> GameId {
    set.origin.parse().expect("sets are tagged with a game id")
}

/// Index of the prescribed action, and the prescribed belief, at an
/// information set of game `g` as stated by the equilibrium claims.
fn claimed(g: GameId, local: &str) -> (usize, Option<usize>) {
    match (g, local) {
        (GameId::G1, _) | (GameId::G3, _) => (0, Some(0)),
        (GameId::G2, "I1.1" | "I2.1") => (1, Some(0)),
        (GameId::G2, "I1.2") => (1, Some(0)),
        (GameId::G2, "I2.2") => (1, Some(1)),
        (GameId::G4, "I1.1") => (0, Some(0)),
        (GameId::G4, "I2.1" | "I2.2") => (1, Some(0)),
        (GameId::G4, _) => (1, Some(1)),
        _ => (0, None),
    }
}

fn point(n: usize, at: usize) -> Vec<Q> {
    (0..n).map(|i| if i == at { Q::one() } else { Q::zero() }).collect()
}

/// The assessment claimed to be the unique sequential equilibrium: pure
/// strategies and point-mass beliefs. Sub-games embedded by an expanded build
/// get the claim for that sub-game.
pub fn claimed_equilibrium(game: &Game) -> Assessment {
    let mut profile = Vec::new();
    let mut beliefs = Vec::new();
    for s in &game.info_sets {
        let (a, b) = claimed(origin(s), &s.local);
        profile.push(point(s.actions.len(), a));
        let b = if s.nodes.len() == 1 { 0 } else { b.unwrap_or(0) };
        beliefs.push(point(s.nodes.len(), b));
    }
    Assessment { profile: Profile(profile), beliefs: Beliefs(beliefs) }
}

/// The explicit completely mixed profile `s^k` converging to the claimed
/// equilibrium.
pub fn sequence_profile(game: &Game, k: u64) -> Result<Profile, GameError> {
    if k < 3 {
        return Err(GameError::NoSequence(format!("k = {k}")));
    }
    let k = k as i64;
    let (lo, hi2, hi1) = (ratio(1, k), ratio(k - 2, k), ratio(k - 1, k));
    let three_first = vec![hi2.clone(), lo.clone(), lo.clone()];
    let three_mid = vec![lo.clone(), hi2.clone(), lo.clone()];
    Ok(Profile(
        game.info_sets
            .iter()
            .map(|s| match (origin(s), s.local.as_str()) {
                (GameId::G1 | GameId::G3, _) => three_first.clone(),
                (GameId::G2 | GameId::G4, "I2.1") => vec![lo.clone(), hi1.clone()],
                (GameId::G2, "I1.1") => vec![lo.clone(), hi1.clone()],
                (GameId::G4, "I1.1") => vec![hi1.clone(), lo.clone()],
                (GameId::G2 | GameId::G4, _) => three_mid.clone(),
            })
            .collect(),
    ))
}

/// `(s^k, β^k)` with `β^k` from Bayes' rule.
pub fn consistency_sequence(game: &Game, k: u64) -> Result<Assessment, GameError> {
    let profile = sequence_profile(game, k)?;
    let beliefs = induced_beliefs(game, &profile)?;
    Ok(Assessment { profile, beliefs })
}

/// Nodes where the claimed strategy is optimal but not strictly: in game 3,
/// after a report with `y′ = f(x)`, the traitor's payoff is the same whatever it
/// delivers once the other cloud has cheated.
pub fn strict_exemptions(game: &Game) -> Vec<String> {
    game.info_sets
        .iter()
        .filter(|s| origin(s) == GameId::G3 && s.local == "I2.3")
        .flat_map(|s| s.nodes.iter().skip(1).map(|&h| game.nodes[h].label.clone()))
        .collect()
}

fn table_entry(game: &Game, host: GameId, node: usize) -> Option<[Formula; 2]> {
    let label = &game.nodes[node].label;
    if let Some(f) = tables::total_formulas(host, label) {
        return Some(f);
    }
    let (g, local) = game.outcome(node)?.split_once(':')?;
    tables::total_formulas(g.parse().ok()?, local)
}

/// Compares every terminal's simulated payoffs with the symbolic table.
pub fn payoff_crosscheck(id: GameId, params: Params) -> Result<Crosscheck, GameError> {
    payoff_crosscheck_with(id, params, BuildOptions::default())
}

pub fn payoff_crosscheck_with(id: GameId, params: Params, opts: BuildOptions) -> Result<Crosscheck, GameError> {
    let game = build_game_with(id, params, BuildOptions { source: UtilitySource::Simulation, ..opts })?;
    Ok(crosscheck_built(&game, id, params))
}

fn crosscheck_built(game: &Game, id: GameId, params: Params) -> Crosscheck {
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    for z in game.terminals() {
        let node = game.nodes[z].label.clone();
        let simulated = game.utility(z).expect("terminal");
        let Some([a, b]) = table_entry(game, id, z) else {
            mismatches.push(format!("{node}: no table entry"));
            continue;
        };
        let table = [a.eval(&params), b.eval(&params)];
        let matches = table == simulated;
        if !matches {
            mismatches.push(format!("{node}: table {table:?} vs simulated {simulated:?}"));
        }
        rows.push(CrosscheckRow {
            node,
            outcome: game.outcome(z).expect("terminal").to_string(),
            table,
            formulas: [a.source, b.source],
            simulated,
            matches,
        });
    }
    Crosscheck { game: id, params, rows, mismatches }
}

#[derive(Clone, Debug, Serialize)]
pub struct RestatedSet {
    pub info_set: String,
    pub player: String,
    pub strategy: BTreeMap<String, String>,
    pub beliefs: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Checks {
    pub rational: bool,
    pub strict: bool,
    pub consistent: bool,
    /// `None` when the simulation refused the parameters and the tables were
    /// used instead.
    pub crosscheck: Option<bool>,
    pub outcome: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub game: GameId,
    pub params: Params,
    pub violations: Vec<Violation>,
    pub z: i64,
    pub utility_source: UtilitySource,
    pub utility_note: Option<String>,
    pub equilibrium: Vec<RestatedSet>,
    pub rationality: RationalityReport,
    pub strict_failures: Vec<String>,
    pub consistency: ConsistencyReport,
    pub crosscheck: Option<Crosscheck>,
    pub predicted: String,
    pub played: BTreeMap<String, String>,
    pub checks: Checks,
    pub ok: bool,
}

pub const K_MAX: u64 = 10_000_000;
pub const TOL: f64 = 1e-6;

/// Everything `analyze` reports for one game. Accepts parameter sets that
/// break the design constraints (only the structural ones are required), so
/// the effect of each constraint can be observed.
pub fn analyze(id: GameId, params: Params, expand: bool) -> Result<Analysis, GameError> {
    let structural = params.structural_violations();
    if !structural.is_empty() {
        return Err(params_error(&structural));
    }
    let opts = BuildOptions { expand, source: UtilitySource::Simulation, param_check: ParamCheck::Structural };
    let (game, source, note) = match build_game_with(id, params, opts) {
        Ok(g) => (g, UtilitySource::Simulation, None),
        Err(GameError::Simulation { node, err }) => {
            let g = build_game_with(id, params, BuildOptions { source: UtilitySource::Table, ..opts })?;
            (g, UtilitySource::Table, Some(format!("contracts refuse these terms ({node}: {err}); payoff tables used")))
        }
        Err(e) => return Err(e),
    };
    let a = claimed_equilibrium(&game);
    let rationality = check_sequential_rationality(&game, &a)?;
    let exempt = strict_exemptions(&game);
    let exempt: Vec<&str> = exempt.iter().map(String::as_str).collect();
    let strict_failures = rationality.strict_failures(&exempt);
    let consistency = check_consistency(&game, &a, |k| sequence_profile(&game, k), K_MAX, TOL)?;
    let crosscheck = match source {
        UtilitySource::Simulation => Some(crosscheck_built(&game, id, params)),
        UtilitySource::Table => None,
    };
    let dist = game.play(&a.profile);
    let outcome = dist.len() == 1 && dist.get(id.predicted()).is_some_and(|p| p.is_one());
    let checks = Checks {
        rational: rationality.is_rational(),
        strict: strict_failures.is_empty(),
        consistent: consistency.consistent,
        crosscheck: crosscheck.as_ref().map(|c| c.mismatches.is_empty()),
        outcome,
    };
    let ok = checks.rational && checks.strict && checks.consistent && checks.crosscheck != Some(false) && checks.outcome;
    let equilibrium = game
        .info_sets
        .iter()
        .enumerate()
        .map(|(i, s)| RestatedSet {
            info_set: s.name.clone(),
            player: game.players[s.player].clone(),
            strategy: s.actions.iter().cloned().zip(a.profile.0[i].iter().map(|p| p.to_string())).collect(),
            beliefs: s
                .nodes
                .iter()
                .map(|&h| game.nodes[h].label.clone())
                .zip(a.beliefs.0[i].iter().map(|p| p.to_string()))
                .collect(),
        })
        .collect();
    Ok(Analysis {
        game: id,
        params,
        violations: params.validate(),
        z: params.z(),
        utility_source: source,
        utility_note: note,
        equilibrium,
        rationality,
        strict_failures,
        consistency,
        crosscheck,
        predicted: id.predicted().to_string(),
        played: dist.into_iter().map(|(k, v)| (k, v.to_string())).collect(),
        checks,
        ok,
    })
}
