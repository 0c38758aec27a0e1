//! Game sessions behind a JSON message protocol, and the HTTP/WebSocket
//! server that hosts them.
//!
//! [`Session`] is synchronous and owns one [`GameState`]; it is what the
//! protocol tests drive. [`serve`] wraps one session per WebSocket
//! connection and supplies the clock: it sends `Tick` events when the
//! engine's next deadline passes.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{Html, IntoResponse};
use axum::routing::get;
use axum::Router;
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::time::Instant;
use tower_http::services::ServeDir;

use crate::diagram::{FourCell, PrimeInterval};
use crate::game::{EffectRecord, GameConfig, GameError, GameEvent, GameState, Snapshot};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    ClickCell { cell: FourCell },
    ChooseStart { edge: PrimeInterval },
    NewGame {
        #[serde(default)]
        config: Option<GameConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Snapshot(Snapshot),
    Effect(EffectRecord),
    Error { reason: String },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

/// One game session. Every client message is answered with its effects and
/// a fresh snapshot, or with a single error.
#[derive(Debug, Clone)]
pub struct Session {
    state: GameState,
    config: GameConfig,
    games: u64,
    seq: u64,
}

impl Session {
    pub fn new(config: GameConfig) -> Result<Self, GameError> {
        Ok(Session {
            state: GameState::new(config.clone())?,
            config,
            games: 1,
            seq: 0,
        })
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    /// The snapshot, stamped with the session's own sequence number, which
    /// keeps increasing across games.
    pub fn snapshot(&mut self) -> ServerMessage {
        self.seq += 1;
        let mut s = self.state.snapshot();
        s.seq = self.seq;
        ServerMessage::Snapshot(s)
    }

    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![ServerMessage::Error {
                reason: format!("malformed message: {e}"),
            }],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        let event = match msg {
            ClientMessage::ClickCell { cell } => GameEvent::ClickCell { cell },
            ClientMessage::ChooseStart { edge } => GameEvent::ChooseStartEdge { edge },
            ClientMessage::NewGame { config } => {
                // Later games in a session get fresh seeds derived from the first.
                let mut config = config.unwrap_or_else(|| self.config.clone());
                config.rng_seed = config.rng_seed.wrapping_add(self.games);
                return match GameState::new(config) {
                    Ok(state) => {
                        self.state = state;
                        self.games += 1;
                        vec![self.snapshot()]
                    }
                    Err(e) => vec![ServerMessage::Error {
                        reason: e.to_string(),
                    }],
                };
            }
        };
        self.apply(event, true)
    }

    /// Advances the clock by `ms`. Returns nothing if no rule fired.
    pub fn tick(&mut self, ms: u64) -> Vec<ServerMessage> {
        self.apply(GameEvent::Tick { ms }, false)
    }

    fn apply(&mut self, event: GameEvent, always_answer: bool) -> Vec<ServerMessage> {
        let effects = self.state.handle_event(&event);
        let mut out = Vec::new();
        for effect in effects {
            if let crate::game::Effect::Rejected { reason } = effect {
                out.push(ServerMessage::Error { reason });
                return out;
            }
            out.push(ServerMessage::Effect(EffectRecord {
                move_count: self.state.move_count(),
                effect,
            }));
        }
        if always_answer || !out.is_empty() {
            out.push(self.snapshot());
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub addr: SocketAddr,
    /// Directory with the browser client; a placeholder page otherwise.
    pub assets: Option<PathBuf>,
    pub config: GameConfig,
}

#[derive(Clone)]
struct AppState {
    config: GameConfig,
    connections: Arc<AtomicU64>,
}

pub fn router(config: GameConfig, assets: Option<PathBuf>) -> Router {
    let state = AppState {
        config,
        connections: Arc::new(AtomicU64::new(0)),
    };
    let app = Router::new().route("/ws", get(ws_handler)).with_state(state);
    match assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(get(placeholder)),
    }
}

/// Binds and serves until the process ends.
pub async fn serve(opts: ServeOptions) -> std::io::Result<()> {
    let listener = TcpListener::bind(opts.addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    serve_on(listener, opts.config, opts.assets).await
}

pub async fn serve_on(listener: TcpListener, config: GameConfig, assets: Option<PathBuf>) -> std::io::Result<()> {
    axum::serve(listener, router(config, assets)).await
}

async fn placeholder() -> Html<&'static str> {
    Html(PLACEHOLDER_PAGE)
}

async fn ws_handler(ws: WebSocketUpgrade, State(app): State<AppState>) -> impl IntoResponse {
    let n = app.connections.fetch_add(1, Ordering::Relaxed);
    let mut config = app.config.clone();
    // Each connection plays its own game.
    config.rng_seed = config.rng_seed.wrapping_add(n.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    ws.on_upgrade(move |socket| run_session(socket, config, n))
}

async fn send_all(socket: &mut WebSocket, msgs: Vec<ServerMessage>) -> bool {
    for m in msgs {
        if socket.send(Message::Text(m.to_json().into())).await.is_err() {
            return false;
        }
    }
    true
}

async fn run_session(mut socket: WebSocket, config: GameConfig, id: u64) {
    log::debug!("session {id} opened with seed {}", config.rng_seed);
    let mut session = match Session::new(config) {
        Ok(s) => s,
        Err(e) => {
            let _ = send_all(&mut socket, vec![ServerMessage::Error { reason: e.to_string() }]).await;
            return;
        }
    };
    // The engine clock runs from `origin`; a new game restarts it.
    let mut origin = Instant::now();
    let first = session.snapshot();
    if !send_all(&mut socket, vec![first]).await {
        return;
    }
    loop {
        let deadline = session
            .state()
            .next_deadline_ms()
            .map(|ms| origin + Duration::from_millis(ms))
            .unwrap_or_else(|| Instant::now() + Duration::from_secs(3600));
        tokio::select! {
            incoming = socket.recv() => {
                let text = match incoming {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                let is_new_game = matches!(
                    serde_json::from_str::<ClientMessage>(&text),
                    Ok(ClientMessage::NewGame { .. })
                );
                let out = session.handle_text(&text);
                if is_new_game {
                    origin = Instant::now();
                }
                if !send_all(&mut socket, out).await {
                    break;
                }
            }
            _ = tokio::time::sleep_until(deadline) => {
                let now = origin.elapsed().as_millis() as u64;
                let ms = now.saturating_sub(session.state().clock_ms());
                let out = session.tick(ms);
                if !send_all(&mut socket, out).await {
                    break;
                }
            }
        }
    }
    log::debug!("session {id} closed");
}

const PLACEHOLDER_PAGE: &str = r#"<!doctype html>
<html>
<head><meta charset="utf-8"><title>Swing Lattice Game</title></head>
<body>
<h1>Swing Lattice Game</h1>
<p>No client assets were given (start the server with <code>--assets DIR</code>).
This page shows the raw session messages.</p>
<pre id="log"></pre>
<script>
const log = document.getElementById("log");
const ws = new WebSocket(`ws://${location.host}/ws`);
ws.onmessage = (m) => {
  const msg = JSON.parse(m.data);
  const line = msg.type === "snapshot"
    ? `snapshot seq=${msg.seq} phase=${msg.phase} lives=${msg.lives} move=${msg.move_count} monkey=${JSON.stringify(msg.monkey_current)}`
    : JSON.stringify(msg);
  log.textContent = (line + "\n" + log.textContent).slice(0, 20000);
};
</script>
</body>
</html>
"#;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Phase;

    #[test]
    fn messages_roundtrip() {
        let c: ClientMessage = serde_json::from_str(r#"{"type":"click_cell","cell":[0,1,2,3]}"#).unwrap();
        assert_eq!(c, ClientMessage::ClickCell { cell: FourCell::new(0, 1, 2, 3) });
        let c: ClientMessage = serde_json::from_str(r#"{"type":"new_game"}"#).unwrap();
        assert_eq!(c, ClientMessage::NewGame { config: None });

        let mut s = Session::new(GameConfig::with_seed(2)).unwrap();
        let snap = s.snapshot();
        let back: ServerMessage = serde_json::from_str(&snap.to_json()).unwrap();
        assert_eq!(back, snap);
        let e = ServerMessage::Effect(EffectRecord {
            move_count: 1,
            effect: crate::game::Effect::GameOver,
        });
        assert_eq!(e.to_json(), r#"{"type":"effect","move":1,"effect":"game_over"}"#);
        assert_eq!(serde_json::from_str::<ServerMessage>(&e.to_json()).unwrap(), e);
    }

    #[test]
    fn every_message_is_answered() {
        let mut s = Session::new(GameConfig::with_seed(2)).unwrap();
        let out = s.handle_text("{not json");
        assert!(matches!(out[..], [ServerMessage::Error { .. }]));
        let out = s.handle_text(r#"{"type":"choose_start","edge":[0,0]}"#);
        assert!(matches!(out[..], [ServerMessage::Error { .. }]));
        let edge = s.state().base().edges()[0];
        let out = s.handle(ClientMessage::ChooseStart { edge });
        let ServerMessage::Snapshot(snap) = out.last().unwrap() else { panic!() };
        assert_eq!(snap.phase, Phase::Running);
        assert_eq!(snap.monkey_current, Some(edge));
        assert!(s.tick(1).is_empty());
        let out = s.handle(ClientMessage::NewGame { config: None });
        let ServerMessage::Snapshot(snap) = &out[0] else { panic!() };
        assert_eq!(snap.phase, Phase::ChoosingStart);
        assert_eq!(snap.seq, 2);
    }
}
