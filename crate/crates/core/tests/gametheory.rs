use countercollusion::gametheory::*;
use countercollusion::ledger::Params;
use countercollusion::protocol::{CloudStrategy, ParamCheck};
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

fn example(id: GameId) -> Game {
    build_game(id, Params::example()).unwrap()
}

fn utility(g: &Game, label: &str) -> [i64; 2] {
    g.utility(g.node(label).unwrap()).unwrap()
}

fn set<'a>(r: &'a RationalityReport, name: &str) -> &'a SetReport {
    r.sets.iter().find(|s| s.info_set == name).unwrap()
}

/// Valid parameter sets probing each design constraint from just inside.
fn near_boundary() -> Vec<Params> {
    // the example already has d = c + ch + 1
    let mut out = vec![Params::example()];
    // b = c − 1
    out.push(Params::new(100, 10, 201, 212, 309, 9));
    // t = z + d − b + 1
    let mut q = Params::new(100, 10, 201, 230, 0, 5);
    q.t = countercollusion::ledger::Money((q.z() + 230 - 5 + 1) as u64);
    out.push(q);
    out.push(Params::new(50, 7, 101, 150, 400, 3));
    for p in &out {
        assert!(p.validate().is_empty(), "{p:?}");
    }
    out
}

#[test]
fn trees_have_the_table_shapes() {
    let want = [(GameId::G1, 13, 9, 2), (GameId::G2, 17, 11, 4), (GameId::G3, 40, 27, 5), (GameId::G4, 44, 29, 7)];
    for (id, nodes, terminals, sets) in want {
        let g = example(id);
        assert_eq!(g.nodes.len(), nodes, "{id}");
        assert_eq!(g.terminals().count(), terminals, "{id}");
        assert_eq!(g.info_sets.len(), sets, "{id}");
        // every terminal has a table row
        for z in g.terminals() {
            assert!(tables::total_formulas(id, &g.nodes[z].label).is_some(), "{id} {}", g.nodes[z].label);
        }
    }
    let g4 = example(GameId::G4);
    let i23 = &g4.info_sets[g4.info_set("I2.3").unwrap()];
    let labels: Vec<&str> = i23.nodes.iter().map(|&h| g4.nodes[h].label.as_str()).collect();
    assert_eq!(labels, ["v6", "v7", "v8"]);
}

#[test]
fn expanded_trees_embed_the_sub_games() {
    let opts = BuildOptions { expand: true, ..BuildOptions::default() };
    let g2 = build_game_with(GameId::G2, Params::example(), opts).unwrap();
    assert_eq!(g2.terminals().count(), 9 + 9 + 9);
    assert!(g2.info_set("not-collude/I2").is_some());
    let g4 = build_game_with(GameId::G4, Params::example(), opts).unwrap();
    assert_eq!(g4.terminals().count(), 27 + 27 + 27);
    assert_eq!(g4.outcome(g4.node("not-init/v22").unwrap()), Some("G3:v22"));
}

#[test]
fn example_payoffs() {
    let p = Params::example();
    assert_eq!(p.z(), 101);
    assert_eq!(utility(&example(GameId::G1), "v4"), [90, 90]);
    assert_eq!(utility(&example(GameId::G1), "v5"), [101, -212]);
    // w − c + d − ch − t − b, −d + t + b
    assert_eq!(utility(&example(GameId::G2), "v7"), [-213, 102]);
    assert_eq!(utility(&example(GameId::G2), "v10"), [95, 105]);
    // TRA = w − c − ch
    assert_eq!(utility(&example(GameId::G3), "v22"), [90, -111]);
    // FLR = w − c + d − ch + b
    assert_eq!(utility(&example(GameId::G4), "v28"), [-217, 106]);
    // −d − t − b, w − c + d − ch + t + b
    assert_eq!(utility(&example(GameId::G4), "v31"), [-526, 415]);
    assert_eq!(utility(&example(GameId::G4), "v38"), [97, -521]);
}

#[test]
fn table_formulas_agree_with_the_contracts() {
    for p in near_boundary() {
        for id in GameId::ALL {
            let x = payoff_crosscheck(id, p).unwrap();
            assert!(x.mismatches.is_empty(), "{id} {p:?}: {:?}", x.mismatches);
            assert_eq!(x.rows.len(), tables::totals(id).len());
        }
    }
}

#[test]
fn expanded_sub_games_agree_with_their_own_tables() {
    let opts = BuildOptions { expand: true, ..BuildOptions::default() };
    for id in [GameId::G2, GameId::G4] {
        let x = payoff_crosscheck_with(id, Params::example(), opts).unwrap();
        assert!(x.mismatches.is_empty(), "{id}: {:?}", x.mismatches);
        assert_eq!(x.rows.len(), if id == GameId::G2 { 27 } else { 81 });
    }
}

#[test]
fn table_source_reproduces_simulated_utilities() {
    let opts = BuildOptions { source: UtilitySource::Table, ..BuildOptions::default() };
    for id in GameId::ALL {
        let sim = example(id);
        let tab = build_game_with(id, Params::example(), opts).unwrap();
        for z in sim.terminals() {
            assert_eq!(sim.utility(z), tab.utility(z), "{id} {}", sim.nodes[z].label);
        }
    }
}

#[test]
fn claimed_assessments_restated() {
    let g1 = example(GameId::G1);
    let a = claimed_equilibrium(&g1);
    assert_eq!(a.profile, Profile::pure(&g1, &[0, 0]));
    assert_eq!(a.beliefs.0[g1.info_set("I2").unwrap()], vec![q(1), q(0), q(0)]);

    let g2 = example(GameId::G2);
    let a = claimed_equilibrium(&g2);
    let names = ["I1.1", "I2.1", "I1.2", "I2.2"];
    let pure: Vec<usize> = names.iter().map(|n| a.profile.0[g2.info_set(n).unwrap()].iter().position(|p| p.is_one()).unwrap()).collect();
    assert_eq!(pure, [1, 1, 1, 1]);
    assert_eq!(a.beliefs.0[g2.info_set("I2.2").unwrap()], vec![q(0), q(1), q(0)]);

    let g4 = example(GameId::G4);
    let a = claimed_equilibrium(&g4);
    let act = |n: &str| {
        let s = g4.info_set(n).unwrap();
        g4.info_sets[s].actions[a.profile.0[s].iter().position(|p| p.is_one()).unwrap()].clone()
    };
    assert_eq!(act("I1.1"), "not-init");
    assert_eq!(act("I2.1"), "collude");
    assert_eq!(act("I2.2"), "report y'=f(x)");
    for n in ["I1.2", "I2.3", "I2.4", "I2.5"] {
        assert_eq!(act(n), "r", "{n}");
    }
}

#[test]
fn first_three_games_are_strict_equilibria() {
    for id in [GameId::G1, GameId::G2, GameId::G3] {
        let g = example(id);
        let a = claimed_equilibrium(&g);
        let r = check_sequential_rationality(&g, &a).unwrap();
        assert!(r.is_rational(), "{id}");
        let exempt = strict_exemptions(&g);
        let exempt: Vec<&str> = exempt.iter().map(String::as_str).collect();
        assert!(r.strict_failures(&exempt).is_empty(), "{id}: {:?}", r.strict_failures(&exempt));
        for s in &r.sets {
            assert!(s.strict_gain.as_ref().unwrap().is_negative(), "{id} {}", s.info_set);
        }
    }
}

#[test]
fn g1_strict_margins() {
    let g = example(GameId::G1);
    let r = check_sequential_rationality(&g, &claimed_equilibrium(&g)).unwrap();
    // honest v dishonest at I2 under β = (1,0,0): (w − c) − (−d)
    assert_eq!(set(&r, "I2").strict_gain, Some(q(-302)));
    // at v2 (C1 sent r): z beats the best of w and −d by z − w
    let v2 = set(&r, "I2").nodes.iter().find(|n| n.node == "v2").unwrap();
    assert_eq!(v2.strict_gain, q(-1));
}

#[test]
fn g3_exempt_nodes_are_ties() {
    let g = example(GameId::G3);
    let r = check_sequential_rationality(&g, &claimed_equilibrium(&g)).unwrap();
    assert_eq!(strict_exemptions(&g), ["v8", "v9"]);
    let i23 = set(&r, "I2.3");
    for n in &i23.nodes[1..] {
        assert!(n.strict_gain.is_zero(), "{}", n.node);
    }
    assert!(i23.nodes[0].strict_gain.is_negative());
}

#[test]
fn g4_ringleader_profits_from_cheating_after_a_correct_report() {
    // At I1.2 the ringleader expects r from the follower. Delivering r loses
    // its Colluder's deposit share as well (−d − b); delivering f(x) instead
    // nets z − t − b. The claim needs t > z + d, which the design constraints
    // do not imply.
    let p = Params::example();
    let g = example(GameId::G4);
    let r = check_sequential_rationality(&g, &claimed_equilibrium(&g)).unwrap();
    assert!(!r.is_rational());
    let i12 = set(&r, "I1.2");
    let expected = q(p.z() + p.d.as_i64() - p.t.as_i64());
    assert_eq!(i12.gain, expected);
    assert_eq!(i12.gain, q(4));
    assert_eq!(i12.best_deviation, vec![("I1.2".to_string(), "f(x)".to_string())]);
    for s in &r.sets {
        if s.info_set != "I1.2" {
            assert!(!s.gain.is_positive(), "{}", s.info_set);
        }
    }
    // the outcome prediction is unaffected: the ringleader never initiates
    assert_eq!(g.play(&claimed_equilibrium(&g).profile).keys().collect::<Vec<_>>(), ["G3:v13"]);

    // with t > z + d it holds strictly
    let g = build_game(GameId::G4, Params::new(100, 10, 201, 212, 314, 5)).unwrap();
    let r = check_sequential_rationality(&g, &claimed_equilibrium(&g)).unwrap();
    assert!(r.is_rational());
    let exempt = strict_exemptions(&g);
    let exempt: Vec<&str> = exempt.iter().map(String::as_str).collect();
    assert!(r.strict_failures(&exempt).is_empty(), "{:?}", r.strict_failures(&exempt));
}

#[test]
fn boundary_parameters_break_strictness() {
    // d = c + ch: C2 at v2 is indifferent between f(x) and r
    let a = analyze(GameId::G1, Params::new(100, 10, 201, 211, 309, 5), false).unwrap();
    assert!(!a.ok);
    assert!(a.strict_failures.iter().any(|f| f.contains("v2")), "{:?}", a.strict_failures);
    // d = 1 is refused by the contracts; the tables stand in
    let a = analyze(GameId::G1, Params::new(100, 10, 201, 1, 309, 5), false).unwrap();
    assert!(!a.ok);
    assert_eq!(a.utility_source, UtilitySource::Table);
    assert!(a.utility_note.is_some());
    // t = z + d − b: FLR at v5 is indifferent
    let a = analyze(GameId::G2, Params::new(100, 10, 201, 212, 308, 5), false).unwrap();
    assert!(!a.ok);
    assert!(a.strict_failures.iter().any(|f| f.contains("v5")), "{:?}", a.strict_failures);
    // b = c: not initiating is as good as initiating; b > c makes it better
    let a = analyze(GameId::G2, Params::new(100, 10, 201, 212, 309, 10), false).unwrap();
    assert!(!a.checks.strict && a.checks.rational);
    let a = analyze(GameId::G2, Params::new(100, 10, 201, 212, 309, 12), false).unwrap();
    assert!(!a.checks.rational);
    assert_eq!(a.rationality.max_gain(), q(2));
}

#[test]
fn structural_violations_are_refused() {
    assert!(matches!(analyze(GameId::G1, Params::new(100, 10, 200, 212, 309, 5), false), Err(GameError::InvalidParams(_))));
    assert!(matches!(build_game(GameId::G1, Params::new(100, 10, 201, 211, 309, 5)), Err(GameError::InvalidParams(_))));
    let opts = BuildOptions { param_check: ParamCheck::Structural, ..BuildOptions::default() };
    assert!(build_game_with(GameId::G1, Params::new(100, 10, 201, 211, 309, 5), opts).is_ok());
}

#[test]
fn consistency_of_every_claim() {
    for id in GameId::ALL {
        for expand in [false, true] {
            let g = build_game_with(id, Params::example(), BuildOptions { expand, ..BuildOptions::default() }).unwrap();
            let a = claimed_equilibrium(&g);
            let r = check_consistency(&g, &a, |k| sequence_profile(&g, k), K_MAX, TOL).unwrap();
            assert!(r.consistent, "{id} expand={expand}: {r:?}");
            assert!(r.final_residual <= 1e-6);
            assert!(r.order_one_over_k);
            assert_eq!(r.points.len(), 7);
            // exact: 2/k
            assert_eq!(r.points[0].strategy_residual, ratio(2, 10), "{id}");
        }
    }
}

#[test]
fn consistency_beliefs_follow_bayes() {
    let g = example(GameId::G2);
    let a = consistency_sequence(&g, 10).unwrap();
    let set = g.info_set("I2.2").unwrap();
    assert_eq!(a.beliefs.0[set], vec![ratio(1, 10), ratio(8, 10), ratio(1, 10)]);
    assert!(a.profile.is_completely_mixed());
    assert!(consistency_sequence(&g, 2).is_err());
}

#[test]
fn wrong_belief_is_inconsistent() {
    let g = example(GameId::G1);
    let mut a = claimed_equilibrium(&g);
    a.beliefs.0[g.info_set("I2").unwrap()] = vec![q(0), q(1), q(0)];
    let r = check_consistency(&g, &a, |k| sequence_profile(&g, k), K_MAX, TOL).unwrap();
    assert!(!r.consistent);
    assert!(r.final_residual > 0.99);
}

#[test]
fn forward_play_reaches_the_predicted_outcomes() {
    for id in GameId::ALL {
        for expand in [false, true] {
            let g = build_game_with(id, Params::example(), BuildOptions { expand, ..BuildOptions::default() }).unwrap();
            let dist = g.play(&claimed_equilibrium(&g).profile);
            assert_eq!(dist.len(), 1, "{id}");
            assert!(dist[id.predicted()].is_one(), "{id}: {dist:?}");
        }
    }
    assert_eq!(GameId::G4.predicted(), "G3:v13");
}

#[test]
fn analysis_reports() {
    for id in [GameId::G1, GameId::G2, GameId::G3] {
        let a = analyze(id, Params::example(), false).unwrap();
        assert!(a.ok, "{id}");
        assert_eq!(a.crosscheck.as_ref().unwrap().mismatches.len(), 0);
        let json = serde_json::to_value(&a).unwrap();
        for key in ["game", "params", "equilibrium", "rationality", "consistency", "crosscheck", "predicted"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
    let a = analyze(GameId::G4, Params::example(), false).unwrap();
    assert!(!a.ok);
    assert!(a.checks.consistent && a.checks.outcome && a.checks.crosscheck == Some(true));
    assert!(!a.checks.rational);
}

#[test]
fn game_ids_parse() {
    assert_eq!("g3".parse::<GameId>().unwrap(), GameId::G3);
    assert_eq!("G4".parse::<GameId>().unwrap(), GameId::G4);
    assert!("g5".parse::<GameId>().is_err());
    assert_eq!(GameId::G2.to_string(), "G2");
}

fn honest() -> Realisation {
    Realisation { strategy_c1: CloudStrategy::HONEST, strategy_c2: CloudStrategy::HONEST }
}

#[test]
fn builder_rejects_malformed_trees() {
    // two actions leading to the same node
    let mut b = GameBuilder::new("x", ["A", "B"]);
    let s = b.info_set("I", 0, &["l", "r"]);
    let root = b.choice("v0", s);
    let z = b.terminal("v1", "x:v1", [0, 0], honest());
    b.edge(root, 0, z);
    b.edge(root, 1, z);
    assert!(matches!(b.build(), Err(GameError::NotInjective(_))));

    // an action without a successor
    let mut b = GameBuilder::new("x", ["A", "B"]);
    let s = b.info_set("I", 0, &["l", "r"]);
    let root = b.choice("v0", s);
    let z = b.terminal("v1", "x:v1", [0, 0], honest());
    b.edge(root, 0, z);
    assert!(matches!(b.build(), Err(GameError::MissingEdge { .. })));

    // a node nobody reaches
    let mut b = GameBuilder::new("x", ["A", "B"]);
    let s = b.info_set("I", 0, &["l"]);
    let root = b.choice("v0", s);
    let z = b.terminal("v1", "x:v1", [0, 0], honest());
    b.terminal("v2", "x:v2", [0, 0], honest());
    b.edge(root, 0, z);
    assert!(matches!(b.build(), Err(GameError::Unreachable(_))));

    // repeated label
    let mut b = GameBuilder::new("x", ["A", "B"]);
    let s = b.info_set("I", 0, &["l"]);
    let root = b.choice("v0", s);
    let z = b.terminal("v0", "x:v0", [0, 0], honest());
    b.edge(root, 0, z);
    assert!(matches!(b.build(), Err(GameError::DuplicateLabel(_))));
}

#[test]
fn profiles_are_checked() {
    let g = example(GameId::G1);
    let mut p = claimed_equilibrium(&g).profile;
    p.0[0] = vec![ratio(1, 2), ratio(1, 3), q(0)];
    assert!(g.check_profile(&p).is_err());
    p.0.pop();
    assert!(g.check_profile(&p).is_err());
}

fn valid_params() -> impl Strategy<Value = Params> {
    (1u64..40, 0u64..60, 1u64..40, 1u64..40, 1u64..40, 0u64..40).prop_map(|(c, dw, dch, dd, dt, bseed)| {
        let w = c + dw;
        let ch = 2 * w + dch;
        let d = c + ch + dd;
        let b = bseed % c;
        let z = w as i64 - c as i64 + d as i64 - ch as i64;
        let t = (z + d as i64 - b as i64).max(0) as u64 + dt;
        Params::new(w, c, ch, d, t, b)
    })
}

fn random_profile(g: &Game, seeds: &[u32]) -> Profile {
    let mut it = seeds.iter().cycle();
    Profile(
        g.info_sets
            .iter()
            .map(|s| {
                let raw: Vec<i64> = s.actions.iter().map(|_| i64::from(*it.next().unwrap() % 7)).collect();
                let total: i64 = raw.iter().sum();
                if total == 0 {
                    vec![ratio(1, s.actions.len() as i64); s.actions.len()]
                } else {
                    raw.iter().map(|&r| ratio(r, total)).collect()
                }
            })
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn root_value_is_the_path_sum(gi in 0usize..4, expand: bool, seeds in prop::collection::vec(any::<u32>(), 1..40)) {
        let id = GameId::ALL[gi];
        let opts = BuildOptions { expand, source: UtilitySource::Table, ..BuildOptions::default() };
        let g = build_game_with(id, Params::example(), opts).unwrap();
        let p = random_profile(&g, &seeds);
        g.check_profile(&p).unwrap();
        prop_assert_eq!(g.value(&p, g.root()), g.value_by_enumeration(&p));
        let mass: Q = g.play(&p).values().cloned().sum();
        prop_assert!(mass.is_one());
    }

    #[test]
    fn claims_hold_for_valid_params(p in valid_params()) {
        prop_assume!(p.validate().is_empty());
        for id in [GameId::G1, GameId::G2, GameId::G3] {
            let a = analyze(id, p, false).unwrap();
            prop_assert!(a.ok, "{} {:?}: {:?} {:?}", id, p, a.checks, a.strict_failures);
        }
        // the one gap: the ringleader's incentive after a correct report
        let a = analyze(GameId::G4, p, false).unwrap();
        prop_assert_eq!(a.checks.crosscheck, Some(true));
        prop_assert!(a.checks.consistent && a.checks.outcome);
        let r = &a.rationality;
        let lever = p.z() + p.d.as_i64() - p.t.as_i64();
        let gain = r.sets.iter().find(|s| s.info_set == "I1.2").unwrap().strict_gain.clone().unwrap();
        prop_assert_eq!(gain.to_i64(), Some(lever));
        prop_assert_eq!(r.is_rational(), lever <= 0);
        prop_assert_eq!(r.max_gain(), q(lever.max(0)));
    }
}
