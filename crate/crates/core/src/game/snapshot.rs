use serde::{Deserialize, Serialize};

use super::{GameState, WorldConfig};
use crate::params::MissileType;

/// Flat, render-oriented view of a [`GameState`]. Players are numbered 1 and 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Snapshot {
    pub tick: u32,
    pub width: f64,
    pub height: f64,
    pub ships: Vec<ShipView>,
    pub missiles: Vec<MissileView>,
    pub black_holes: Vec<BlackHoleView>,
    pub resource: Option<ResourceView>,
    pub scores: [i64; 2],
    pub lives: [u32; 2],
    pub missiles_left: [u32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ShipView {
    pub player: u8,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub heading: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MissileView {
    pub owner: u8,
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub kind: MissileType,
    pub ttl: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BlackHoleView {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub force: f64,
    pub safe_zone: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResourceView {
    pub x: f64,
    pub y: f64,
    pub ttl: u32,
}

impl Snapshot {
    pub fn of(state: &GameState, world: &WorldConfig) -> Self {
        Snapshot {
            tick: state.tick,
            width: world.width,
            height: world.height,
            ships: state
                .ships
                .iter()
                .enumerate()
                .map(|(i, s)| ShipView {
                    player: i as u8 + 1,
                    x: s.position.x,
                    y: s.position.y,
                    vx: s.velocity.x,
                    vy: s.velocity.y,
                    heading: s.heading,
                    radius: world.ship_radius,
                })
                .collect(),
            missiles: state
                .missiles
                .iter()
                .map(|m| MissileView {
                    owner: m.owner as u8 + 1,
                    x: m.position.x,
                    y: m.position.y,
                    radius: m.radius,
                    kind: m.kind,
                    ttl: m.ttl,
                })
                .collect(),
            black_holes: state
                .black_holes
                .iter()
                .map(|b| BlackHoleView {
                    x: b.center.x,
                    y: b.center.y,
                    radius: b.radius,
                    force: b.force,
                    safe_zone: b.safe_zone,
                })
                .collect(),
            resource: state.resource.as_ref().map(|r| ResourceView {
                x: r.position.x,
                y: r.position.y,
                ttl: r.ttl,
            }),
            scores: [state.ships[0].score, state.ships[1].score],
            lives: [state.ships[0].lives, state.ships[1].lives],
            missiles_left: [state.ships[0].missiles_left, state.ships[1].missiles_left],
        }
    }
}
