use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::protocol::CloudStrategy;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("node {0} is reached by more than one edge")]
    NotInjective(String),
    #[error("node {0} is not reachable from the root")]
    Unreachable(String),
    #[error("choice node {node} has no successor for action {action}")]
    MissingEdge { node: String, action: String },
    #[error("information set {set}: {why}")]
    BadInfoSet { set: String, why: String },
    #[error("duplicate node label {0}")]
    DuplicateLabel(String),
    #[error("unknown {0}")]
    Unknown(String),
    #[error("distribution at {0} does not sum to 1 or has negative entries")]
    BadDistribution(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no explicit consistency sequence for {0}")]
    NoSequence(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("simulating {node}: {err}")]
    Simulation { node: String, err: String },
    #[error("formula {0:?}: {1}")]
    Formula(String, String),
}

/// The scenario that realises a terminal node, used to obtain its utility
/// from the contract simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Realisation {
    pub strategy_c1: CloudStrategy,
    pub strategy_c2: CloudStrategy,
}

#[derive(Clone, Debug, Serialize)]
pub enum NodeKind {
    Choice { info_set: usize, children: Vec<usize> },
    Terminal { utility: [i64; 2], outcome: String, realisation: Realisation },
}

#[derive(Clone, Debug, Serialize)]
pub struct Node {
    pub label: String,
    pub parent: Option<(usize, usize)>,
    pub kind: NodeKind,
}

#[derive(Clone, Debug, Serialize)]
pub struct InfoSet {
    pub name: String,
    /// The game this set belongs to, and its name there; differs from the
    /// host game only inside an expanded sub-game.
    pub origin: String,
    pub local: String,
    pub player: usize,
    pub actions: Vec<String>,
    pub nodes: Vec<usize>,
}

/// A finite two-player extensive-form game with imperfect information.
/// Node 0 is the root.
#[derive(Clone, Debug, Serialize)]
pub struct Game {
    pub name: String,
    pub players: [String; 2],
    pub nodes: Vec<Node>,
    pub info_sets: Vec<InfoSet>,
}

/// Collects nodes and edges; [`GameBuilder::build`] checks the result is a
/// well-formed tree.
#[derive(Debug)]
pub struct GameBuilder {
    name: String,
    players: [String; 2],
    nodes: Vec<(String, Option<usize>, Option<([i64; 2], String, Realisation)>)>,
    info_sets: Vec<(String, String, String, usize, Vec<String>)>,
    edges: Vec<(usize, usize, usize)>,
}

impl GameBuilder {
    pub fn new(name: impl Into<String>, players: [&str; 2]) -> Self {
        GameBuilder {
            name: name.into(),
            players: players.map(String::from),
            nodes: Vec::new(),
            info_sets: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn info_set(&mut self, name: impl Into<String>, player: usize, actions: &[&str]) -> usize {
        let name = name.into();
        let origin = self.name.clone();
        self.info_set_in(origin, name.clone(), name, player, actions)
    }

    /// An information set of an embedded sub-game `origin`, known there as `local`.
    pub fn info_set_in(
        &mut self,
        origin: impl Into<String>,
        name: impl Into<String>,
        local: impl Into<String>,
        player: usize,
        actions: &[&str],
    ) -> usize {
        self.info_sets.push((
            name.into(),
            origin.into(),
            local.into(),
            player,
            actions.iter().map(|a| a.to_string()).collect(),
        ));
        self.info_sets.len() - 1
    }

    pub fn choice(&mut self, label: impl Into<String>, info_set: usize) -> usize {
        self.nodes.push((label.into(), Some(info_set), None));
        self.nodes.len() - 1
    }

    pub fn terminal(&mut self, label: impl Into<String>, outcome: impl Into<String>, utility: [i64; 2], realisation: Realisation) -> usize {
        self.nodes.push((label.into(), None, Some((utility, outcome.into(), realisation))));
        self.nodes.len() - 1
    }

    pub fn edge(&mut self, parent: usize, action: usize, child: usize) {
        self.edges.push((parent, action, child));
    }

    pub fn build(self) -> Result<Game, GameError> {
        let n = self.nodes.len();
        let mut seen = BTreeSet::new();
        for (label, _, _) in &self.nodes {
            if !seen.insert(label.clone()) {
                return Err(GameError::DuplicateLabel(label.clone()));
            }
        }
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut children: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); n];
        for &(p, a, c) in &self.edges {
            // σ(h1, a1) = σ(h2, a2) ⇒ h1 = h2 (and a1 = a2)
            if parent[c].is_some() || c == 0 {
                return Err(GameError::NotInjective(self.nodes[c].0.clone()));
            }
            let Some(set) = self.nodes[p].1 else {
                return Err(GameError::Unknown(format!("edge out of terminal {}", self.nodes[p].0)));
            };
            if a >= self.info_sets[set].4.len() {
                return Err(GameError::Unknown(format!("action {a} at {}", self.nodes[p].0)));
            }
            if children[p].insert(a, c).is_some() {
                return Err(GameError::NotInjective(self.nodes[c].0.clone()));
            }
            parent[c] = Some((p, a));
        }

        let mut set_nodes: Vec<Vec<usize>> = vec![Vec::new(); self.info_sets.len()];
        let mut nodes = Vec::with_capacity(n);
        for (i, (label, set, term)) in self.nodes.into_iter().enumerate() {
            let kind = match (set, term) {
                (Some(s), None) => {
                    let actions = &self.info_sets[s].4;
                    let kids: Vec<usize> = (0..actions.len())
                        .map(|a| {
                            children[i]
                                .get(&a)
                                .copied()
                                .ok_or_else(|| GameError::MissingEdge { node: label.clone(), action: actions[a].clone() })
                        })
                        .collect::<Result<_, _>>()?;
                    set_nodes[s].push(i);
                    NodeKind::Choice { info_set: s, children: kids }
                }
                (None, Some((utility, outcome, realisation))) => NodeKind::Terminal { utility, outcome, realisation },
                _ => unreachable!("builder creates either kind"),
            };
            if i != 0 && parent[i].is_none() {
                return Err(GameError::Unreachable(label));
            }
            nodes.push(Node { label, parent: parent[i], kind });
        }
        let info_sets: Vec<InfoSet> = self
            .info_sets
            .into_iter()
            .zip(set_nodes)
            .map(|((name, origin, local, player, actions), nodes)| InfoSet { name, origin, local, player, actions, nodes })
            .collect();
        for s in &info_sets {
            if s.nodes.is_empty() {
                return Err(GameError::BadInfoSet { set: s.name.clone(), why: "no nodes".into() });
            }
            if s.player > 1 {
                return Err(GameError::BadInfoSet { set: s.name.clone(), why: "unknown player".into() });
            }
        }
        let game = Game { name: self.name, players: self.players, nodes, info_sets };
        // parent links form a tree rooted at 0: walking up always terminates
        for i in 0..game.nodes.len() {
            let mut steps = 0;
            let mut cur = i;
            while let Some((p, _)) = game.nodes[cur].parent {
                cur = p;
                steps += 1;
                if steps > game.nodes.len() {
                    return Err(GameError::Unreachable(game.nodes[i].label.clone()));
                }
            }
            if cur != 0 {
                return Err(GameError::Unreachable(game.nodes[i].label.clone()));
            }
        }
        Ok(game)
    }
}

/// One probability distribution per information set, over its actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile(pub Vec<Vec<Q>>);

/// One probability distribution per information set, over its nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Beliefs(pub Vec<Vec<Q>>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assessment {
    pub profile: Profile,
    pub beliefs: Beliefs,
}

fn is_distribution(v: &[Q]) -> bool {
    v.iter().all(|p| *p >= Q::zero()) && v.iter().sum::<Q>() == Q::one()
}

impl Profile {
    pub fn is_completely_mixed(&self) -> bool {
        self.0.iter().flatten().all(|p| *p > Q::zero())
    }

    /// Point mass on the given action index at every information set.
    pub fn pure(game: &Game, choice: &[usize]) -> Self {
        Profile(
            game.info_sets
                .iter()
                .zip(choice)
                .map(|(s, &a)| (0..s.actions.len()).map(|i| if i == a { Q::one() } else { Q::zero() }).collect())
                .collect(),
        )
    }
}

impl Game {
    pub fn root(&self) -> usize {
        0
    }

    pub fn node(&self, label: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.label == label)
    }

    pub fn info_set(&self, name: &str) -> Option<usize> {
        self.info_sets.iter().position(|s| s.name == name)
    }

    pub fn terminals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| matches!(self.nodes[i].kind, NodeKind::Terminal { .. }))
    }

    pub fn utility(&self, node: usize) -> Option<[i64; 2]> {
        match &self.nodes[node].kind {
            NodeKind::Terminal { utility, .. } => Some(*utility),
            NodeKind::Choice { .. } => None,
        }
    }

    pub fn outcome(&self, node: usize) -> Option<&str> {
        match &self.nodes[node].kind {
            NodeKind::Terminal { outcome, .. } => Some(outcome),
            NodeKind::Choice { .. } => None,
        }
    }

    pub fn set_of(&self, node: usize) -> Option<usize> {
        match &self.nodes[node].kind {
            NodeKind::Choice { info_set, .. } => Some(*info_set),
            NodeKind::Terminal { .. } => None,
        }
    }

    pub fn check_profile(&self, p: &Profile) -> Result<(), GameError> {
        if p.0.len() != self.info_sets.len() {
            return Err(GameError::Dimension(format!("{} distributions for {} information sets", p.0.len(), self.info_sets.len())));
        }
        for (s, d) in self.info_sets.iter().zip(&p.0) {
            if d.len() != s.actions.len() {
                return Err(GameError::Dimension(format!("{}: {} probabilities for {} actions", s.name, d.len(), s.actions.len())));
            }
            if !is_distribution(d) {
                return Err(GameError::BadDistribution(s.name.clone()));
            }
        }
        Ok(())
    }

    pub fn check_assessment(&self, a: &Assessment) -> Result<(), GameError> {
        self.check_profile(&a.profile)?;
        if a.beliefs.0.len() != self.info_sets.len() {
            return Err(GameError::Dimension("belief system".into()));
        }
        for (s, b) in self.info_sets.iter().zip(&a.beliefs.0) {
            if b.len() != s.nodes.len() {
                return Err(GameError::Dimension(format!("{}: {} beliefs for {} nodes", s.name, b.len(), s.nodes.len())));
            }
            if !is_distribution(b) {
                return Err(GameError::BadDistribution(s.name.clone()));
            }
        }
        Ok(())
    }

    /// Expected utilities of both players from `node` on, under `p`.
    pub fn value(&self, p: &Profile, node: usize) -> [Q; 2] {
        match &self.nodes[node].kind {
            NodeKind::Terminal { utility, .. } => [q(utility[0]), q(utility[1])],
            NodeKind::Choice { info_set, children } => {
                let mut acc = [Q::zero(), Q::zero()];
                for (prob, &c) in p.0[*info_set].iter().zip(children) {
                    if prob.is_zero() {
                        continue;
                    }
                    let [a, b] = self.value(p, c);
                    acc[0] += prob * a;
                    acc[1] += prob * b;
                }
                acc
            }
        }
    }

    /// `u_i(s; I, β) = Σ_h β(h) · u_i(s; h)`.
    pub fn expected_payoff(&self, a: &Assessment, player: usize, info_set: usize) -> Q {
        let s = &self.info_sets[info_set];
        s.nodes
            .iter()
            .zip(&a.beliefs.0[info_set])
            .filter(|(_, b)| !b.is_zero())
            .map(|(&h, b)| b * &self.value(&a.profile, h)[player])
            .sum()
    }

    /// Probability of reaching `node` from the root, as a product of the edge
    /// probabilities along its path.
    pub fn reach(&self, p: &Profile, node: usize) -> Q {
        let mut prob = Q::one();
        let mut cur = node;
        while let Some((parent, a)) = self.nodes[cur].parent {
            let set = self.set_of(parent).expect("parents are choice nodes");
            prob *= &p.0[set][a];
            if prob.is_zero() {
                break;
            }
            cur = parent;
        }
        prob
    }

    /// Root value by summing over every terminal path; independent of the
    /// recursive [`Game::value`].
    pub fn value_by_enumeration(&self, p: &Profile) -> [Q; 2] {
        let mut acc = [Q::zero(), Q::zero()];
        for z in self.terminals() {
            let pr = self.reach(p, z);
            let u = self.utility(z).expect("terminal");
            acc[0] += &pr * q(u[0]);
            acc[1] += &pr * q(u[1]);
        }
        acc
    }

    /// Forward play: the distribution over outcomes (terminal outcome labels;
    /// collapsed sub-games carry the label of the sub-game terminal they stand
    /// for).
    pub fn play(&self, p: &Profile) -> BTreeMap<String, Q> {
        let mut out: BTreeMap<String, Q> = BTreeMap::new();
        for z in self.terminals() {
            let pr = self.reach(p, z);
            if !pr.is_zero() {
                *out.entry(self.outcome(z).expect("terminal").to_string()).or_insert_with(Q::zero) += pr;
            }
        }
        out
    }

    /// Bayes-rule beliefs induced by `p`; an information set reached with
    /// probability zero gets `None`.
    pub fn bayes_beliefs(&self, p: &Profile) -> Vec<Option<Vec<Q>>> {
        self.info_sets
            .iter()
            .map(|s| {
                let reach: Vec<Q> = s.nodes.iter().map(|&h| self.reach(p, h)).collect();
                let total: Q = reach.iter().sum();
                if total.is_zero() {
                    None
                } else {
                    Some(reach.into_iter().map(|r| r / &total).collect())
                }
            })
            .collect()
    }

    /// Whether `node` lies in the subtree of `ancestor` (inclusive).
    pub fn is_descendant(&self, node: usize, ancestor: usize) -> bool {
        let mut cur = node;
        loop {
            if cur == ancestor {
                return true;
            }
            match self.nodes[cur].parent {
                Some((p, _)) => cur = p,
                None => return false,
            }
        }
    }

    /// Information sets of `player` with a node at or below some node of `set`.
    pub fn sets_at_or_below(&self, set: usize) -> Vec<usize> {
        let player = self.info_sets[set].player;
        let tops = &self.info_sets[set].nodes;
        (0..self.info_sets.len())
            .filter(|&j| {
                self.info_sets[j].player == player
                    && self.info_sets[j].nodes.iter().any(|&h| tops.iter().any(|&t| self.is_descendant(h, t)))
            })
            .collect()
    }
}
