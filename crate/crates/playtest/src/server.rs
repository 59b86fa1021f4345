//! HTTP and websocket front end.
//!
//! `GET /games` lists evolved games; `GET /ws` upgrades to the session socket.
//! Each connection drives at most one session loop at a time.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use skilldepth::agents::AgentId;
use skilldepth::params::{default_search_space, Genome, SearchSpace};
use skilldepth::seed;
use tokio::net::TcpListener;
use tokio::time::{interval, MissedTickBehavior};

use crate::protocol::{ClientMessage, ServerMessage};
use crate::registry::Registry;
use crate::session::{Session, SessionConfig, TickOutput};
use crate::{games, Error, Result};

pub struct AppState {
    pub registry: Registry,
    pub config: SessionConfig,
    pub space: SearchSpace,
    /// Game used when a start message carries no genome.
    pub default_genome: Option<Genome>,
    pub results_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(config: SessionConfig) -> Self {
        Self {
            registry: Registry::new(config.grace),
            config,
            space: default_search_space(),
            default_genome: None,
            results_dir: None,
        }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/games", get(list_games))
        .route("/ws", get(upgrade))
        .with_state(state)
}

/// Serves until the listener fails. Parked sessions are swept once per grace period.
pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> Result<()> {
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut t = interval(sweeper.config.grace.max(std::time::Duration::from_secs(1)));
        loop {
            t.tick().await;
            sweeper.registry.sweep();
        }
    });
    axum::serve(listener, router(state)).await?;
    Ok(())
}

async fn list_games(State(state): State<Arc<AppState>>) -> Response {
    let Some(dir) = state.results_dir.clone() else {
        return Json(Vec::<games::GameEntry>::new()).into_response();
    };
    match tokio::task::spawn_blocking(move || games::list_games(&dir)).await {
        Ok(Ok(list)) => Json(list).into_response(),
        Ok(Err(e)) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<Arc<AppState>>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, state))
}

struct Attached {
    id: String,
    session: Session,
}

async fn send(socket: &mut WebSocket, msg: &ServerMessage) -> bool {
    socket.send(Message::Text(msg.to_json().into())).await.is_ok()
}

/// Runs one tick off the async workers, since the enemy may search for a while.
async fn advance(mut session: Session) -> (Session, Result<TickOutput>) {
    tokio::task::spawn_blocking(move || {
        let out = session.advance();
        (session, out)
    })
    .await
    .expect("tick task panicked")
}

enum Flow {
    Continue,
    Finished,
    Closed,
}

async fn connection(mut socket: WebSocket, state: Arc<AppState>) {
    let mut current: Option<Attached> = None;
    let mut ticker = interval(state.config.tick_interval.max(std::time::Duration::from_millis(1)));
    ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);
    let lockstep = state.config.lockstep;

    loop {
        let flow = tokio::select! {
            msg = socket.recv() => match msg {
                Some(Ok(Message::Text(text))) => on_text(&mut socket, &state, &mut current, text.as_str()).await,
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => Flow::Closed,
                Some(Ok(_)) => Flow::Continue,
            },
            _ = ticker.tick(), if current.is_some() && !lockstep => step(&mut socket, &mut current).await,
        };
        match flow {
            Flow::Continue => {}
            Flow::Finished => {
                if let Some(a) = current.take() {
                    state.registry.close(&a.id);
                }
                let _ = socket.send(Message::Close(None)).await;
                break;
            }
            Flow::Closed => break,
        }
    }
    if let Some(a) = current {
        state.registry.park(&a.id, a.session);
    }
}

async fn step(socket: &mut WebSocket, current: &mut Option<Attached>) -> Flow {
    let Some(a) = current.take() else { return Flow::Continue };
    let (session, out) = advance(a.session).await;
    *current = Some(Attached { id: a.id, session });
    match out {
        Ok(out) => {
            for m in out.messages() {
                if !send(socket, &m).await {
                    return Flow::Closed;
                }
            }
            if out.result.is_some() {
                Flow::Finished
            } else {
                Flow::Continue
            }
        }
        Err(e) => {
            send(socket, &ServerMessage::error(&e)).await;
            Flow::Finished
        }
    }
}

async fn on_text(socket: &mut WebSocket, state: &AppState, current: &mut Option<Attached>, text: &str) -> Flow {
    let reply = match ClientMessage::parse(text) {
        Err(e) => Err(e),
        Ok(ClientMessage::Action(w)) => match (w.to_action(), current.as_mut()) {
            (Err(e), _) => Err(e),
            (Ok(_), None) => Err(Error::Protocol("no session; send start first".into())),
            (Ok(a), Some(att)) => {
                att.session.submit(a);
                if state.config.lockstep {
                    return step(socket, current).await;
                }
                return Flow::Continue;
            }
        },
        Ok(_) if current.is_some() => Err(Error::Protocol("this connection already has a session".into())),
        Ok(ClientMessage::Start {
            genome,
            human_side,
            enemy,
            seed: game_seed,
        }) => start(state, genome, human_side, enemy, game_seed),
        Ok(ClientMessage::Resume { session_id }) => state.registry.attach(&session_id).map(|session| Attached {
            id: session_id,
            session,
        }),
    };
    match reply {
        Ok(att) => {
            let hello = ServerMessage::Session {
                session_id: att.id.clone(),
                human_side: att.session.human_side(),
                enemy: att.session.enemy().index(),
                tick_interval_ms: state.config.tick_interval.as_millis() as u64,
                seed: att.session.seed(),
            };
            let snapshot = ServerMessage::State(att.session.snapshot());
            *current = Some(att);
            if send(socket, &hello).await && send(socket, &snapshot).await {
                Flow::Continue
            } else {
                Flow::Closed
            }
        }
        Err(e) => {
            if send(socket, &ServerMessage::error(&e)).await {
                Flow::Continue
            } else {
                Flow::Closed
            }
        }
    }
}

fn start(
    state: &AppState,
    genome: Option<Vec<u8>>,
    human_side: u8,
    enemy: Option<u8>,
    game_seed: Option<u64>,
) -> Result<Attached> {
    let genome = match genome {
        Some(levels) => Genome::new(levels),
        None => state
            .default_genome
            .clone()
            .ok_or_else(|| Error::Protocol("no genome given and the server has no default game".into()))?,
    };
    let enemy = enemy.map(AgentId::from_index).transpose()?;
    let id = state.registry.create();
    let game_seed = game_seed.unwrap_or_else(|| seed::derive(&[seed::label(&id)]));
    match Session::new(&genome, &state.space, human_side, enemy, game_seed, &state.config) {
        Ok(session) => Ok(Attached { id, session }),
        Err(e) => {
            state.registry.close(&id);
            Err(e)
        }
    }
}
