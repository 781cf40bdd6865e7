//! WebSocket session service. Each connection to `/session` gets its own
//! engine; frames and the 50 ms scan timer feed one ordered loop.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use gridpilot_core::harness::protocol::{Connection, ServerMessage};
use gridpilot_core::harness::Driver;
use gridpilot_core::{SessionConfig, Workbook};

const TICK: Duration = Duration::from_millis(50);

struct Shared {
    workbook: Workbook,
    config: SessionConfig,
    log_dir: PathBuf,
    next_id: AtomicU64,
}

pub fn run(workbook: Workbook, config: SessionConfig, host: &str, port: u16, log_dir: PathBuf) -> Result<()> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let shared = Arc::new(Shared {
            workbook,
            config,
            log_dir,
            next_id: AtomicU64::new(1),
        });
        let app = Router::new().route("/session", get(upgrade)).with_state(shared);
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .with_context(|| format!("binding {host}:{port}"))?;
        let addr: SocketAddr = listener.local_addr()?;
        println!("listening on ws://{addr}/session");
        axum::serve(listener, app).await?;
        Ok(())
    })
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Arc<Shared>>) -> Response {
    ws.on_upgrade(move |socket| session(socket, shared))
}

async fn send(socket: &mut WebSocket, messages: Vec<ServerMessage>) -> bool {
    for m in messages {
        if socket.send(Message::Text(m.to_json().into())).await.is_err() {
            return false;
        }
    }
    true
}

async fn session(mut socket: WebSocket, shared: Arc<Shared>) {
    let id = format!("session-{}", shared.next_id.fetch_add(1, Ordering::Relaxed));
    let driver = Driver::new(shared.workbook.clone(), id.clone(), shared.config.clone());
    let mut conn = Connection::new(driver);
    let start = Instant::now();
    let now = || start.elapsed().as_millis() as u64;
    let mut timer = tokio::time::interval(TICK);
    let mut ended = false;
    loop {
        tokio::select! {
            frame = socket.recv() => {
                let text = match frame {
                    Some(Ok(Message::Text(t))) => t.to_string(),
                    Some(Ok(Message::Binary(_))) => {
                        let err = ServerMessage::error("MalformedMessage", "binary frames are not supported");
                        if !send(&mut socket, vec![err]).await { break; }
                        continue;
                    }
                    Some(Ok(_)) => continue,
                    _ => break,
                };
                let reply = conn.handle(&text, now());
                if !send(&mut socket, reply.messages).await { break; }
                if reply.end {
                    conn.tick(now());
                    let path = persist(&shared, &id, &conn);
                    let _ = send(&mut socket, vec![ServerMessage::Ended { log: path }]).await;
                    ended = true;
                    break;
                }
            }
            _ = timer.tick() => {
                let messages = conn.tick(now());
                if !send(&mut socket, messages).await { break; }
            }
        }
    }
    if !ended {
        persist(&shared, &id, &conn);
    }
    let _ = socket.send(Message::Close(None)).await;
}

fn persist(shared: &Shared, id: &str, conn: &Connection) -> Option<String> {
    let path = shared.log_dir.join(format!("{id}.jsonl"));
    match std::fs::write(&path, conn.driver().log().to_jsonl()) {
        Ok(()) => Some(path.display().to_string()),
        Err(e) => {
            eprintln!("could not write {}: {e}", path.display());
            None
        }
    }
}
