use std::sync::Arc;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use playtest::{serve, AppState, ServerMessage, Session, SessionConfig, WireAction};
use skilldepth::agents::AgentId;
use skilldepth::game::Action;
use skilldepth::params::{default_search_space, GameParams, Genome, ENEMY_ID};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Socket = WebSocketStream<MaybeTlsStream<TcpStream>>;

fn config(max_ticks: u32, lockstep: bool) -> SessionConfig {
    let mut cfg = SessionConfig::default();
    cfg.world.max_ticks = max_ticks;
    cfg.budgets.mcts.iterations = 20;
    cfg.budgets.mcts.rollout_depth = 5;
    cfg.tick_interval = Duration::from_millis(2);
    cfg.lockstep = lockstep;
    cfg
}

fn evolved() -> Genome {
    let mut g = GameParams::mid_range().encode().unwrap();
    g.levels[ENEMY_ID] = AgentId::Ras.index();
    g
}

async fn start_server(state: AppState) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve(listener, Arc::new(state)));
    addr.to_string()
}

async fn connect(addr: &str) -> Socket {
    connect_async(format!("ws://{addr}/ws")).await.unwrap().0
}

async fn send(ws: &mut Socket, json: String) {
    ws.send(Message::Text(json.into())).await.unwrap();
}

async fn next(ws: &mut Socket) -> Option<ServerMessage> {
    loop {
        match tokio::time::timeout(Duration::from_secs(30), ws.next())
            .await
            .expect("server went quiet")
        {
            Some(Ok(Message::Text(t))) => return Some(serde_json::from_str(t.as_str()).unwrap()),
            Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return None,
            Some(Ok(_)) => {}
        }
    }
}

fn script(n: usize) -> Vec<Action> {
    (0..n)
        .map(|i| Action::from_index((i * 5 + i / 7) % Action::COUNT))
        .collect()
}

fn action_json(a: Action) -> String {
    let mut v = serde_json::to_value(WireAction::from(a)).unwrap();
    v["type"] = "action".into();
    v.to_string()
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn scripted_client_matches_offline_replay() {
    let cfg = config(200, true);
    let addr = start_server(AppState::new(cfg.clone())).await;
    let mut ws = connect(&addr).await;
    let genome = evolved();
    send(
        &mut ws,
        serde_json::json!({"type": "start", "genome": genome.levels, "humanSide": 1, "enemy": 4, "seed": 11})
            .to_string(),
    )
    .await;
    let Some(ServerMessage::Session { enemy, human_side, .. }) = next(&mut ws).await else {
        panic!("no session frame")
    };
    assert_eq!((enemy, human_side), (AgentId::Mcts.index(), 1));
    assert!(matches!(next(&mut ws).await, Some(ServerMessage::State(s)) if s.tick == 0));

    let actions = script(200);
    let mut states = Vec::new();
    let mut result = None;
    for &a in &actions {
        send(&mut ws, action_json(a)).await;
        match next(&mut ws).await {
            Some(ServerMessage::State(s)) => states.push(s),
            other => panic!("expected a state, got {other:?}"),
        }
    }
    if let Some(m @ ServerMessage::Result { .. }) = next(&mut ws).await {
        result = Some(m);
    }
    assert_eq!(states.len(), 200);
    assert!(states.windows(2).all(|w| w[1].tick == w[0].tick + 1));
    assert_eq!(states[0].tick, 1);

    let mut offline = Session::new(&genome, &default_search_space(), 1, Some(AgentId::Mcts), 11, &cfg).unwrap();
    let expected = offline.play_script(&actions).unwrap();
    assert_eq!(states, expected.iter().map(|o| o.state.clone()).collect::<Vec<_>>());
    assert_eq!(result, expected.last().unwrap().result);
    assert!(next(&mut ws).await.is_none(), "socket should close after the result");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn timed_loop_coasts_to_the_end() {
    let mut state = AppState::new(config(40, false));
    state.default_genome = Some(evolved());
    let addr = start_server(state).await;
    let mut ws = connect(&addr).await;
    send(&mut ws, r#"{"type":"start","humanSide":2}"#.into()).await;
    assert!(matches!(
        next(&mut ws).await,
        Some(ServerMessage::Session { enemy: 3, .. })
    ));
    let mut ticks = Vec::new();
    let mut winner = None;
    while let Some(m) = next(&mut ws).await {
        match m {
            ServerMessage::State(s) => ticks.push(s.tick),
            ServerMessage::Result { tick, .. } => winner = Some(tick),
            other => panic!("{other:?}"),
        }
    }
    assert_eq!(ticks, (0..=40).collect::<Vec<_>>());
    assert_eq!(winner, Some(40));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn disconnect_parks_and_resume_continues() {
    let addr = start_server(AppState::new(config(100, true))).await;
    let mut ws = connect(&addr).await;
    let genome = evolved();
    send(
        &mut ws,
        serde_json::json!({"type": "start", "genome": genome.levels}).to_string(),
    )
    .await;
    let Some(ServerMessage::Session { session_id, .. }) = next(&mut ws).await else {
        panic!()
    };
    next(&mut ws).await;
    for a in script(5) {
        send(&mut ws, action_json(a)).await;
        next(&mut ws).await;
    }
    ws.close(None).await.unwrap();
    drop(ws);

    let mut ws = connect(&addr).await;
    let resume = serde_json::json!({"type": "resume", "sessionId": session_id}).to_string();
    let mut attached = false;
    for _ in 0..50 {
        send(&mut ws, resume.clone()).await;
        match next(&mut ws).await {
            Some(ServerMessage::Session { .. }) => {
                attached = true;
                break;
            }
            Some(ServerMessage::Error { .. }) => tokio::time::sleep(Duration::from_millis(20)).await,
            other => panic!("{other:?}"),
        }
    }
    assert!(attached);
    assert!(matches!(next(&mut ws).await, Some(ServerMessage::State(s)) if s.tick == 5));
    send(&mut ws, action_json(Action::NOOP)).await;
    assert!(matches!(next(&mut ws).await, Some(ServerMessage::State(s)) if s.tick == 6));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn bad_messages_get_errors_not_sessions() {
    let addr = start_server(AppState::new(config(100, true))).await;
    let mut ws = connect(&addr).await;
    for bad in [
        r#"{"type":"start","genome":[1,2,3]}"#.to_string(),
        r#"{"type":"start"}"#.to_string(),
        r#"{"type":"action","turn":0,"thrust":true,"shoot":false}"#.to_string(),
        r#"{"type":"resume","sessionId":"nope"}"#.to_string(),
        "garbage".to_string(),
    ] {
        send(&mut ws, bad.clone()).await;
        assert!(
            matches!(next(&mut ws).await, Some(ServerMessage::Error { .. })),
            "{bad}"
        );
    }
}

async fn http_get(addr: &str, path: &str) -> (String, String) {
    let mut s = TcpStream::connect(addr).await.unwrap();
    s.write_all(format!("GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").as_bytes())
        .await
        .unwrap();
    let mut buf = String::new();
    s.read_to_string(&mut buf).await.unwrap();
    let (head, body) = buf.split_once("\r\n\r\n").unwrap();
    (head.lines().next().unwrap().to_string(), body.to_string())
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn games_endpoint_lists_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let g = evolved();
    std::fs::write(
        dir.path().join("report.csv"),
        format!("algo,trial,mean,stderr,n,genome\nntbea,3,0.125,0.01,100,\"{g}\"\n"),
    )
    .unwrap();
    let mut state = AppState::new(config(100, true));
    state.results_dir = Some(dir.path().to_path_buf());
    let addr = start_server(state).await;
    let (status, body) = http_get(&addr, "/games").await;
    assert!(status.contains("200"), "{status}");
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 1);
    assert_eq!(arr[0]["id"], "ntbea-3");
    assert_eq!(arr[0]["algo"], "ntbea");
    assert_eq!(arr[0]["meanFitness"], 0.125);
    assert_eq!(arr[0]["genome"].as_array().unwrap().len(), 30);
}
