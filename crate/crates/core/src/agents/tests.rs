use super::*;
use crate::game::{init_game, Missile, Vec2};
use crate::params::{decode, default_search_space, Genome, MissileType};
use crate::seed;

fn quiet_rules() -> Rules {
    let space = default_search_space();
    let mut p = decode(&Genome::zeros(&space), &space).unwrap();
    p.resource_cooldown = 300;
    Rules::new(p, WorldConfig::default())
}

#[test]
fn fixed_agents() {
    let rules = quiet_rules();
    let s = rules.init(1);
    let b = AgentBudgets::default();
    let mut rng = seed::rng(0);
    assert_eq!(
        act(AgentId::DoNothing, &rules, &s, 0, &b, &mut rng).unwrap(),
        Action::NOOP
    );
    for _ in 0..5 {
        let a = act(AgentId::Ras, &rules, &s, 1, &b, &mut rng).unwrap();
        assert_eq!(
            a,
            Action {
                turn: Turn::Clockwise,
                thrust: false,
                shoot: true
            }
        );
    }
}

#[test]
fn agent_ids() {
    assert_eq!(AgentId::from_index(4).unwrap(), AgentId::Mcts);
    assert!(matches!(AgentId::from_index(6), Err(Error::UnknownAgent(6))));
    assert_eq!("mcts".parse::<AgentId>().unwrap(), AgentId::Mcts);
    assert_eq!("5".parse::<AgentId>().unwrap(), AgentId::Mea);
    assert!("alphago".parse::<AgentId>().is_err());
}

#[test]
fn heuristic_is_score_difference() {
    let rules = quiet_rules();
    let mut s = rules.init(1);
    s.ships[0].score = 300;
    s.ships[1].score = 100;
    assert_eq!(heuristic_value(&s, 0, &rules.world), 200.0);
    assert_eq!(heuristic_value(&s, 1, &rules.world), -200.0);
    s.tick = rules.world.max_ticks;
    let win = heuristic_value(&s, 0, &rules.world);
    assert!(win > 10_000.0 * 100.0);
    assert_eq!(heuristic_value(&s, 1, &rules.world), -win);
}

#[test]
fn ucb1_examples() {
    let even = [ArmStats { q: 0.5, n: 1 }, ArmStats { q: 0.5, n: 1 }];
    assert_eq!(ucb1_select(&even, 2, std::f64::consts::SQRT_2).unwrap(), 0);

    let arms = [
        ArmStats { q: 0.2, n: 50 },
        ArmStats { q: 0.9, n: 1 },
        ArmStats { q: 0.4, n: 3 },
    ];
    assert_eq!(ucb1_select(&arms, 54, 0.0).unwrap(), 1);

    // 0 + sqrt(ln 101 / 100) = 0.2148 against 0 + sqrt(ln 101 / 1) = 2.148
    let arms = [ArmStats { q: 0.0, n: 100 }, ArmStats { q: 0.0, n: 1 }];
    assert_eq!(ucb1_select(&arms, 101, 1.0).unwrap(), 1);

    let arms = [ArmStats { q: 9.0, n: 10 }, ArmStats { q: 0.0, n: 0 }];
    assert_eq!(ucb1_select(&arms, 10, 1.0).unwrap(), 1);
    assert!(matches!(ucb1_select(&[], 1, 1.0), Err(Error::EmptyChildren)));
}

#[test]
fn osla_idles_without_a_shot() {
    let rules = quiet_rules();
    let s = rules.init(1);
    assert_eq!(one_step_lookahead(&rules, &s, 0).unwrap(), Action::NOOP);
    assert_eq!(one_step_lookahead(&rules, &s, 1).unwrap(), Action::NOOP);
}

#[test]
fn osla_fires_point_blank() {
    let rules = quiet_rules();
    let mut s = rules.init(1);
    s.ships[1].position = s.ships[0].position + Vec2::new(rules.world.ship_radius + 1.0, 0.0);
    let a = one_step_lookahead(&rules, &s, 0).unwrap();
    assert!(a.shoot);
    assert_eq!(a.index(), 1);
}

#[test]
fn mcts_root_visits_sum_to_budget() {
    let rules = quiet_rules();
    let s = rules.init(2);
    let cfg = MctsConfig {
        iterations: 137,
        ..MctsConfig::default()
    };
    let r = mcts_search(&rules, &s, 0, &cfg, &mut seed::rng(4)).unwrap();
    assert_eq!(r.root_visits.iter().sum::<u32>(), 137);
}

/// Player one drifts forward at 1 px/tick with an enemy missile parked just
/// behind it. Only thrusting straight ahead clears the hit radius this tick.
fn dodge_state(rules: &Rules) -> GameState {
    let mut s = rules.init(3);
    s.ships[0].position = Vec2::new(300.0, 240.0);
    s.ships[0].velocity = Vec2::new(1.0, 0.0);
    s.ships[0].heading = 0.0;
    s.ships[0].missiles_left = 0;
    s.ships[1].missiles_left = 0;
    // straight thrust lands the ship at x = 301.188, 12.0005 px from the missile
    s.missiles.push(Missile {
        owner: 1,
        position: Vec2::new(289.1875, 240.0),
        velocity: Vec2::ZERO,
        ttl: 30,
        kind: MissileType::Normal,
        radius: 2.0,
    });
    s
}

#[test]
fn dodge_state_has_single_escape() {
    let rules = quiet_rules();
    let s = dodge_state(&rules);
    let escapes: Vec<usize> = Action::all()
        .into_iter()
        .filter(|&a| {
            let mut n = s.clone();
            rules.step_in_place(&mut n, [a, Action::NOOP]).unwrap();
            n.ships[0].lives == s.ships[0].lives
        })
        .map(Action::index)
        .collect();
    // indices 2 and 3 differ only by a shot that the empty magazine ignores
    assert_eq!(escapes, vec![2, 3]);
}

#[test]
fn mcts_dodges_the_missile() {
    let rules = quiet_rules();
    let s = dodge_state(&rules);
    let cfg = MctsConfig::default();
    let dodged = (0..100)
        .filter(|&k| {
            let r = mcts_search(&rules, &s, 0, &cfg, &mut seed::rng(1000 + k)).unwrap();
            r.action.turn == Turn::None && r.action.thrust
        })
        .count();
    assert!(dodged >= 95, "dodged {dodged}/100");
}

#[test]
fn mea_is_seeded_and_legal() {
    let rules = quiet_rules();
    let s = rules.init(2);
    let b = AgentBudgets {
        mea: MeaConfig {
            evals: 60,
            ..MeaConfig::default()
        },
        ..AgentBudgets::default()
    };
    let a = act(AgentId::Mea, &rules, &s, 1, &b, &mut seed::rng(8)).unwrap();
    let a2 = act(AgentId::Mea, &rules, &s, 1, &b, &mut seed::rng(8)).unwrap();
    assert_eq!(a, a2);
}

#[test]
fn mea_takes_the_point_blank_shot() {
    let rules = quiet_rules();
    let mut s = rules.init(1);
    s.ships[1].position = s.ships[0].position + Vec2::new(rules.world.ship_radius + 1.0, 0.0);
    let b = AgentBudgets::default();
    let a = act(AgentId::Mea, &rules, &s, 0, &b, &mut seed::rng(2)).unwrap();
    assert!(a.shoot);
}

#[test]
fn acting_on_finished_game_fails() {
    let rules = quiet_rules();
    let mut s = init_game(&rules.params, &rules.world, 1);
    s.tick = rules.world.max_ticks;
    let r = act(
        AgentId::Random,
        &rules,
        &s,
        0,
        &AgentBudgets::default(),
        &mut seed::rng(1),
    );
    assert!(matches!(r, Err(Error::TerminalState { .. })));
}
