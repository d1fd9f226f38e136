use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::game::{Assessment, Beliefs, Game, GameError, Profile, Q};

pub(crate) fn ser_q<S: Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn ser_opt_q<S: Serializer>(v: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeGain {
    pub node: String,
    /// Best gain, conditional on being at this node, of a deviation that
    /// changes the action taken here.
    #[serde(serialize_with = "ser_q")]
    pub strict_gain: Q,
}

#[derive(Clone, Debug, Serialize)]
pub struct SetReport {
    pub info_set: String,
    pub player: String,
    #[serde(serialize_with = "ser_q")]
    pub expected_payoff: Q,
    /// `max_{s′_i} u_i((s′_i, s_−i); I, β) − u_i(s; I, β)` over pure `s′_i`.
    #[serde(serialize_with = "ser_q")]
    pub gain: Q,
    pub best_deviation: Vec<(String, String)>,
    /// The same maximum restricted to deviations that change the action at
    /// this set; `None` when the assessment mixes here.
    #[serde(serialize_with = "ser_opt_q")]
    pub strict_gain: Option<Q>,
    pub nodes: Vec<NodeGain>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RationalityReport {
    pub sets: Vec<SetReport>,
}

impl RationalityReport {
    /// Sequential rationality: no deviation gains anything anywhere.
    pub fn is_rational(&self) -> bool {
        self.sets.iter().all(|s| !s.gain.is_positive())
    }

    pub fn max_gain(&self) -> Q {
        self.sets.iter().map(|s| s.gain.clone()).max().unwrap_or_else(Q::zero)
    }

    /// Every place a deviation from the prescribed action does not lose
    /// strictly: per information set (under the beliefs) and per node,
    /// skipping the `exempt` node labels.
    pub fn strict_failures(&self, exempt: &[&str]) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.sets {
            match &s.strict_gain {
                Some(g) if !g.is_negative() => out.push(format!("{}: gain {}", s.info_set, g)),
                None => out.push(format!("{}: mixed", s.info_set)),
                _ => {}
            }
            for n in &s.nodes {
                if !exempt.contains(&n.node.as_str()) && !n.strict_gain.is_negative() {
                    out.push(format!("{} at {}: gain {}", s.info_set, n.node, n.strict_gain));
                }
            }
        }
        out
    }
}

fn pure_action(dist: &[Q]) -> Option<usize> {
    dist.iter().position(|p| p.is_one())
}

/// Brute force over player `i`'s pure behaviour strategies on the
/// information sets at or below each of its sets. Expected payoff is
/// multilinear in the per-set action probabilities, so a pure deviation attains
/// the maximum over all behaviour strategies.
pub fn check_sequential_rationality(game: &Game, a: &Assessment) -> Result<RationalityReport, GameError> {
    game.check_assessment(a)?;
    let mut sets = Vec::new();
    for (idx, set) in game.info_sets.iter().enumerate() {
        let player = set.player;
        let below = game.sets_at_or_below(idx);
        let sizes: Vec<usize> = below.iter().map(|&j| game.info_sets[j].actions.len()).collect();
        let base = game.expected_payoff(a, player, idx);
        let base_nodes: Vec<Q> = set.nodes.iter().map(|&h| game.value(&a.profile, h)[player].clone()).collect();
        let prescribed = pure_action(&a.profile.0[idx]);
        let pos_here = below.iter().position(|&j| j == idx).expect("a set is at or below itself");

        let mut gain: Option<(Q, Vec<usize>)> = None;
        let mut strict: Option<Q> = None;
        let mut node_strict: Vec<Option<Q>> = vec![None; set.nodes.len()];
        let mut choice = vec![0usize; below.len()];
        loop {
            let mut p = a.profile.clone();
            for (k, &j) in below.iter().enumerate() {
                p.0[j] = (0..sizes[k]).map(|x| if x == choice[k] { Q::one() } else { Q::zero() }).collect();
            }
            let dev = Assessment { profile: p, beliefs: a.beliefs.clone() };
            let g = game.expected_payoff(&dev, player, idx) - &base;
            if gain.as_ref().is_none_or(|(best, _)| g > *best) {
                gain = Some((g.clone(), choice.clone()));
            }
            if prescribed.is_some_and(|pa| choice[pos_here] != pa) {
                if strict.as_ref().is_none_or(|s| g > *s) {
                    strict = Some(g);
                }
                for (n, &h) in set.nodes.iter().enumerate() {
                    let gn = game.value(&dev.profile, h)[player].clone() - &base_nodes[n];
                    if node_strict[n].as_ref().is_none_or(|s| gn > *s) {
                        node_strict[n] = Some(gn);
                    }
                }
            }
            // odometer
            let mut k = 0;
            while k < choice.len() {
                choice[k] += 1;
                if choice[k] < sizes[k] {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == choice.len() {
                break;
            }
        }
        let (gain, best) = gain.expect("at least one pure strategy");
        let best_deviation = if gain.is_positive() {
            below
                .iter()
                .zip(&best)
                .map(|(&j, &x)| (game.info_sets[j].name.clone(), game.info_sets[j].actions[x].clone()))
                .collect()
        } else {
            Vec::new()
        };
        let nodes = if prescribed.is_some() {
            set.nodes
                .iter()
                .zip(node_strict)
                .map(|(&h, g)| NodeGain { node: game.nodes[h].label.clone(), strict_gain: g.unwrap_or_else(Q::zero) })
                .collect()
        } else {
            Vec::new()
        };
        sets.push(SetReport {
            info_set: set.name.clone(),
            player: game.players[player].clone(),
            expected_payoff: base,
            gain,
            best_deviation,
            strict_gain: if set.actions.len() > 1 { strict } else { None },
            nodes,
        });
    }
    Ok(RationalityReport { sets })
}

fn sup_distance(a: &[Vec<Q>], b: &[Vec<Q>]) -> Q {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .max()
        .unwrap_or_else(Q::zero)
}

/// The belief system induced by a completely mixed profile.
pub fn induced_beliefs(game: &Game, p: &Profile) -> Result<Beliefs, GameError> {
    game.bayes_beliefs(p)
        .into_iter()
        .zip(&game.info_sets)
        .map(|(b, s)| b.ok_or_else(|| GameError::Dimension(format!("{} unreachable under a mixed profile", s.name))))
        .collect::<Result<Vec<_>, _>>()
        .map(Beliefs)
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualPoint {
    pub k: u64,
    #[serde(serialize_with = "ser_q")]
    pub strategy_residual: Q,
    #[serde(serialize_with = "ser_q")]
    pub belief_residual: Q,
    pub residual: f64,
    /// `k · residual`; bounded when the residual is O(1/k).
    pub scaled: f64,
    pub completely_mixed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub points: Vec<ResidualPoint>,
    pub tol: f64,
    pub final_residual: f64,
    pub max_scaled: f64,
    /// `k · residual` never grows past twice its first value.
    pub order_one_over_k: bool,
    pub consistent: bool,
}

/// Evaluates the sequence at `k = 10, 100, …, k_max` and checks that both the
/// strategies and the Bayes beliefs they induce converge to the assessment.
pub fn check_consistency(
    game: &Game,
    a: &Assessment,
    sequence: impl Fn(u64) -> Result<Profile, GameError>,
    k_max: u64,
    tol: f64,
) -> Result<ConsistencyReport, GameError> {
    game.check_assessment(a)?;
    let mut points = Vec::new();
    let mut k = 10u64;
    while k <= k_max {
        let pk = sequence(k)?;
        game.check_profile(&pk)?;
        let bk = induced_beliefs(game, &pk)?;
        let sr = sup_distance(&pk.0, &a.profile.0);
        let br = sup_distance(&bk.0, &a.beliefs.0);
        let r = sr.clone().max(br.clone());
        let residual = r.to_f64().unwrap_or(f64::INFINITY);
        points.push(ResidualPoint {
            k,
            strategy_residual: sr,
            belief_residual: br,
            residual,
            scaled: residual * k as f64,
            completely_mixed: pk.is_completely_mixed(),
        });
        match k.checked_mul(10) {
            Some(n) => k = n,
            None => break,
        }
    }
    let final_residual = points.last().map_or(f64::INFINITY, |p| p.residual);
    let max_scaled = points.iter().map(|p| p.scaled).fold(0.0, f64::max);
    let first = points.first().map_or(0.0, |p| p.scaled);
    let order_one_over_k = points.iter().all(|p| p.scaled <= 2.0 * first + f64::EPSILON);
    let mixed = points.iter().all(|p| p.completely_mixed);
    Ok(ConsistencyReport {
        consistent: !points.is_empty() && mixed && final_residual <= tol && order_one_over_k,
        points,
        tol,
        final_residual,
        max_scaled,
        order_one_over_k,
    })
}
