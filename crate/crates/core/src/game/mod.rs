//! Deterministic simulation of Space Battle Evolved.
//!
//! Two ships fight on a toroidal map. Each tick both players act at once;
//! black holes pull bodies towards their centres and charge a per-tick score
//! penalty, missiles come in three types, and a missile pack respawns at
//! random positions. [`GameState`] is a plain value, so cloning it gives an
//! independent forward model.

mod snapshot;
mod vec2;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use snapshot::{ShipView, Snapshot};
pub use vec2::Vec2;

use crate::params::{GameParams, MissileType};
use crate::{seed, Error, Result, Rng};

pub const PLAYER_ONE: usize = 0;
pub const PLAYER_TWO: usize = 1;

/// Where a black hole's penalty-free area sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SafeZonePlacement {
    /// A disc of radius `safe_zone` around the centre.
    Center,
    /// A band of width `safe_zone` just inside the outer radius.
    Border,
}

/// Fixed rules of the world that are not evolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub width: f64,
    pub height: f64,
    pub max_ticks: u32,
    pub start_lives: u32,
    pub start_missiles: u32,
    /// Radians per tick.
    pub rotation_rate: f64,
    /// Pixels per tick².
    pub thrust_accel: f64,
    /// Per-tick velocity multiplier applied to ships.
    pub friction: f64,
    pub ship_radius: f64,
    pub hit_score: i64,
    pub win_bonus: f64,
    pub resource_pack_size: u32,
    pub resource_radius: f64,
    pub score_divisor: f64,
    /// Pixels per tick for one unit of `MISSILE_MAX_SPEED`.
    pub missile_speed_unit: f64,
    /// Pull acceleration (pixels per tick²) for one unit of `BLACKHOLE_FORCE`.
    pub blackhole_accel_unit: f64,
    pub safe_zone: SafeZonePlacement,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            width: 640.0,
            height: 480.0,
            max_ticks: 2000,
            start_lives: 1000,
            start_missiles: 100,
            rotation_rate: std::f64::consts::PI / 30.0,
            thrust_accel: 0.2,
            friction: 0.99,
            ship_radius: 10.0,
            hit_score: 100,
            win_bonus: 1000.0,
            resource_pack_size: 20,
            resource_radius: 10.0,
            score_divisor: 100.0,
            missile_speed_unit: 4.0,
            blackhole_accel_unit: 0.05,
            safe_zone: SafeZonePlacement::Center,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(Error::Config("world width and height must be positive".into()));
        }
        if self.max_ticks == 0 {
            return Err(Error::Config("max_ticks must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Turn {
    None,
    Clockwise,
    Anticlockwise,
}

impl Turn {
    /// Wire encoding: -1 anticlockwise, 0 none, 1 clockwise.
    pub fn from_sign(sign: i8) -> Option<Self> {
        match sign {
            -1 => Some(Turn::Anticlockwise),
            0 => Some(Turn::None),
            1 => Some(Turn::Clockwise),
            _ => None,
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Turn::None => 0,
            Turn::Clockwise => 1,
            Turn::Anticlockwise => -1,
        }
    }
}

/// One tick of input for one player; rotation, thrust and shooting combine freely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub turn: Turn,
    pub thrust: bool,
    pub shoot: bool,
}

impl Action {
    pub const NOOP: Action = Action {
        turn: Turn::None,
        thrust: false,
        shoot: false,
    };

    pub const COUNT: usize = 12;

    /// All actions ordered by [`Action::index`].
    pub fn all() -> [Action; Action::COUNT] {
        std::array::from_fn(Action::from_index)
    }

    /// `turn * 4 + thrust * 2 + shoot`, with turn ordered none, clockwise,
    /// anticlockwise. Index 0 is the no-op.
    pub fn index(self) -> usize {
        let t = match self.turn {
            Turn::None => 0,
            Turn::Clockwise => 1,
            Turn::Anticlockwise => 2,
        };
        t * 4 + usize::from(self.thrust) * 2 + usize::from(self.shoot)
    }

    pub fn from_index(i: usize) -> Action {
        let turn = match (i / 4) % 3 {
            0 => Turn::None,
            1 => Turn::Clockwise,
            _ => Turn::Anticlockwise,
        };
        Action {
            turn,
            thrust: i & 2 != 0,
            shoot: i & 1 != 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ship {
    pub position: Vec2,
    pub velocity: Vec2,
    pub heading: f64,
    pub lives: u32,
    pub missiles_left: u32,
    pub score: i64,
    pub cooldown: u32,
    /// Shots taken (a twin shot counts once).
    pub fired: u32,
    pub packs_collected: u32,
    pub hits: u32,
    pub penalized_ticks: u32,
}

impl Ship {
    pub fn forward(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Missile {
    pub owner: usize,
    pub position: Vec2,
    pub velocity: Vec2,
    pub ttl: u32,
    pub kind: MissileType,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlackHole {
    pub center: Vec2,
    pub radius: f64,
    pub force: f64,
    pub safe_zone: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resource {
    pub position: Vec2,
    pub ttl: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub tick: u32,
    pub ships: [Ship; 2],
    pub missiles: Vec<Missile>,
    pub black_holes: Vec<BlackHole>,
    pub resource: Option<Resource>,
    pub respawn_countdown: u32,
    #[serde(skip, default = "default_rng")]
    pub rng: Rng,
}

fn default_rng() -> Rng {
    seed::rng(0)
}

impl GameState {
    pub fn ship(&self, player: usize) -> &Ship {
        &self.ships[player]
    }
}

/// How a finished game ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Winner(usize),
    Draw,
}

impl Outcome {
    pub fn winner(self) -> Option<usize> {
        match self {
            Outcome::Winner(p) => Some(p),
            Outcome::Draw => None,
        }
    }
}

/// The evolved parameters together with the fixed world rules; everything
/// needed to advance a [`GameState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rules {
    pub params: GameParams,
    pub world: WorldConfig,
}

impl Rules {
    pub fn new(params: GameParams, world: WorldConfig) -> Self {
        Self { params, world }
    }

    pub fn init(&self, seed: u64) -> GameState {
        init_game(&self.params, &self.world, seed)
    }

    pub fn outcome(&self, state: &GameState) -> Option<Outcome> {
        is_terminal(state, &self.world)
    }

    pub fn step_in_place(&self, state: &mut GameState, actions: [Action; 2]) -> Result<()> {
        step_in_place(state, actions, &self.params, &self.world)
    }
}

/// Start state: ships mirrored left and right facing each other, black holes
/// at the centres of the enabled expressed grid cells.
pub fn init_game(params: &GameParams, world: &WorldConfig, seed: u64) -> GameState {
    let mid_y = world.height / 2.0;
    let ship = |x: f64, heading: f64| Ship {
        position: Vec2::new(x, mid_y),
        velocity: Vec2::ZERO,
        heading,
        lives: world.start_lives,
        missiles_left: world.start_missiles,
        score: 0,
        cooldown: 0,
        fired: 0,
        packs_collected: 0,
        hits: 0,
        penalized_ticks: 0,
    };
    let g = params.grid_size as f64;
    let (cw, ch) = (world.width / g, world.height / g);
    let black_holes = params
        .expressed_cells()
        .map(|(row, col)| BlackHole {
            center: Vec2::new((col as f64 + 0.5) * cw, (row as f64 + 0.5) * ch),
            radius: params.blackhole_radius,
            force: params.blackhole_force,
            safe_zone: params.safe_zone,
        })
        .collect();
    GameState {
        tick: 0,
        ships: [
            ship(world.width * 0.2, 0.0),
            ship(world.width * 0.8, std::f64::consts::PI),
        ],
        missiles: Vec::new(),
        black_holes,
        resource: None,
        respawn_countdown: params.resource_cooldown,
        rng: seed::rng(seed),
    }
}

/// `Some(outcome)` once a ship has no lives left or the tick limit is reached.
/// The higher score wins; equal scores draw.
pub fn is_terminal(state: &GameState, world: &WorldConfig) -> Option<Outcome> {
    let over = state.tick >= world.max_ticks || state.ships.iter().any(|s| s.lives == 0);
    if !over {
        return None;
    }
    let (a, b) = (state.ships[0].score, state.ships[1].score);
    Some(match a.cmp(&b) {
        std::cmp::Ordering::Greater => Outcome::Winner(PLAYER_ONE),
        std::cmp::Ordering::Less => Outcome::Winner(PLAYER_TWO),
        std::cmp::Ordering::Equal => Outcome::Draw,
    })
}

/// Deep copy; the forward model's entry point.
pub fn copy(state: &GameState) -> GameState {
    state.clone()
}

/// Functional form of [`step_in_place`].
pub fn step(state: &GameState, a1: Action, a2: Action, params: &GameParams, world: &WorldConfig) -> Result<GameState> {
    let mut next = state.clone();
    step_in_place(&mut next, [a1, a2], params, world)?;
    Ok(next)
}

/// Advances one tick: rotate, thrust and move, shoot, black-hole pull,
/// missile hits, black-hole penalty, resource pack, missile expiry.
pub fn step_in_place(
    state: &mut GameState,
    actions: [Action; 2],
    params: &GameParams,
    world: &WorldConfig,
) -> Result<()> {
    if is_terminal(state, world).is_some() {
        return Err(Error::TerminalState { tick: state.tick });
    }
    let (w, h) = (world.width, world.height);

    for (ship, action) in state.ships.iter_mut().zip(actions) {
        ship.heading += f64::from(action.turn.sign()) * world.rotation_rate;
    }

    for (ship, action) in state.ships.iter_mut().zip(actions) {
        if action.thrust {
            ship.velocity += ship.forward() * world.thrust_accel;
        }
        ship.velocity = ship.velocity * world.friction;
        ship.position = (ship.position + ship.velocity).wrap(w, h);
    }
    for m in &mut state.missiles {
        m.position = (m.position + m.velocity).wrap(w, h);
    }

    for (owner, action) in actions.iter().enumerate() {
        if action.shoot {
            fire(state, owner, params, world);
        }
    }

    if !state.black_holes.is_empty() {
        let accel = world.blackhole_accel_unit;
        for ship in &mut state.ships {
            ship.velocity += pull(&state.black_holes, ship.position, accel, w, h);
        }
        for m in &mut state.missiles {
            m.velocity += pull(&state.black_holes, m.position, accel, w, h);
        }
    }

    resolve_hits(state, params, world);

    if params.blackhole_penalty > 0.0 || !state.black_holes.is_empty() {
        for ship in &mut state.ships {
            if penalized(&state.black_holes, ship.position, world) {
                ship.penalized_ticks += 1;
                ship.score -= params.blackhole_penalty as i64;
            }
        }
    }

    update_resource(state, params, world);

    let mut i = 0;
    while i < state.missiles.len() {
        let m = &mut state.missiles[i];
        m.ttl = m.ttl.saturating_sub(1);
        if m.ttl == 0 {
            let m = state.missiles.swap_remove(i);
            if m.kind == MissileType::Bomb {
                explode(state, &m, params, world);
            }
        } else {
            i += 1;
        }
    }
    for ship in &mut state.ships {
        ship.cooldown = ship.cooldown.saturating_sub(1);
    }

    state.tick += 1;
    Ok(())
}

fn fire(state: &mut GameState, owner: usize, params: &GameParams, world: &WorldConfig) {
    let ship = &mut state.ships[owner];
    if ship.cooldown > 0 || ship.missiles_left == 0 {
        return;
    }
    ship.missiles_left -= 1;
    ship.fired += 1;
    ship.cooldown = params.missile_cooldown;
    let nose = (ship.position + ship.forward() * world.ship_radius).wrap(world.width, world.height);
    let speed = params.missile_max_speed * world.missile_speed_unit;
    let spawn = |angle: f64| Missile {
        owner,
        position: nose,
        velocity: Vec2::from_angle(angle) * speed,
        ttl: params.missile_max_ttl,
        kind: params.missile_type,
        radius: params.missile_radius,
    };
    let heading = ship.heading;
    match params.missile_type {
        MissileType::Twin => {
            let quarter = std::f64::consts::FRAC_PI_4;
            state.missiles.push(spawn(heading + quarter));
            state.missiles.push(spawn(heading - quarter));
        }
        MissileType::Normal | MissileType::Bomb => state.missiles.push(spawn(heading)),
    }
}

fn pull(holes: &[BlackHole], at: Vec2, accel_unit: f64, w: f64, h: f64) -> Vec2 {
    let mut total = Vec2::ZERO;
    for hole in holes {
        let d = at.delta_to(hole.center, w, h);
        let dist_sq = d.length_sq();
        if dist_sq < hole.radius * hole.radius && dist_sq > 0.0 {
            total += d * (hole.force * accel_unit / dist_sq.sqrt());
        }
    }
    total
}

fn penalized(holes: &[BlackHole], at: Vec2, world: &WorldConfig) -> bool {
    holes.iter().any(|hole| {
        let dist_sq = at.delta_to(hole.center, world.width, world.height).length_sq();
        if dist_sq >= hole.radius * hole.radius {
            return false;
        }
        let dist = dist_sq.sqrt();
        let safe = match world.safe_zone {
            SafeZonePlacement::Center => dist < hole.safe_zone,
            SafeZonePlacement::Border => dist > hole.radius - hole.safe_zone,
        };
        !safe
    })
}

fn resolve_hits(state: &mut GameState, params: &GameParams, world: &WorldConfig) {
    let mut i = 0;
    while i < state.missiles.len() {
        let m = &state.missiles[i];
        let target = 1 - m.owner;
        let reach = world.ship_radius + m.radius;
        let d_sq = m
            .position
            .delta_to(state.ships[target].position, world.width, world.height)
            .length_sq();
        if d_sq >= reach * reach {
            i += 1;
            continue;
        }
        let m = state.missiles.swap_remove(i);
        match m.kind {
            MissileType::Bomb => explode(state, &m, params, world),
            MissileType::Normal | MissileType::Twin => damage(state, m.owner, target, world),
        }
    }
}

/// Bomb blast: every ship touching the blast radius loses a life, the owner included.
fn explode(state: &mut GameState, bomb: &Missile, params: &GameParams, world: &WorldConfig) {
    let reach = params.bomb_radius + world.ship_radius;
    for target in [PLAYER_ONE, PLAYER_TWO] {
        let d = bomb
            .position
            .delta_to(state.ships[target].position, world.width, world.height)
            .length();
        if d < reach {
            damage(state, bomb.owner, target, world);
        }
    }
}

fn damage(state: &mut GameState, owner: usize, target: usize, world: &WorldConfig) {
    let t = &mut state.ships[target];
    t.lives = t.lives.saturating_sub(1);
    if owner != target {
        let o = &mut state.ships[owner];
        o.score += world.hit_score;
        o.hits += 1;
    }
}

fn update_resource(state: &mut GameState, params: &GameParams, world: &WorldConfig) {
    match state.resource.as_mut() {
        Some(res) => {
            let reach = world.ship_radius + world.resource_radius;
            let pos = res.position;
            let dists = state
                .ships
                .each_ref()
                .map(|s| s.position.delta_to(pos, world.width, world.height).length());
            // nearest ship collects; player one on exact ties
            let taker = if dists[0] < reach && dists[0] <= dists[1] {
                Some(PLAYER_ONE)
            } else if dists[1] < reach {
                Some(PLAYER_TWO)
            } else {
                None
            };
            if let Some(p) = taker {
                let ship = &mut state.ships[p];
                ship.missiles_left += world.resource_pack_size;
                ship.packs_collected += 1;
                state.resource = None;
                state.respawn_countdown = params.resource_cooldown;
            } else {
                res.ttl = res.ttl.saturating_sub(1);
                if res.ttl == 0 {
                    state.resource = None;
                    state.respawn_countdown = params.resource_cooldown;
                }
            }
        }
        None => {
            state.respawn_countdown = state.respawn_countdown.saturating_sub(1);
            if state.respawn_countdown == 0 {
                let x = state.rng.random_range(0.0..world.width);
                let y = state.rng.random_range(0.0..world.height);
                state.resource = Some(Resource {
                    position: Vec2::new(x, y),
                    ttl: params.resource_ttl,
                });
            }
        }
    }
}
