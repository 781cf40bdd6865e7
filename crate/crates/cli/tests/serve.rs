use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

struct Server {
    child: Child,
    url: String,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn start(log_dir: &Path) -> Server {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gridpilot"))
        .arg("serve")
        .arg(fixture("retail.json"))
        .args(["--port", "0", "--log-dir"])
        .arg(log_dir)
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let url = line.trim().strip_prefix("listening on ").expect("banner").to_string();
    Server { child, url }
}

type Ws = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn recv(ws: &mut Ws) -> Value {
    let msg = tokio::time::timeout(Duration::from_secs(10), ws.next())
        .await
        .expect("reply in time")
        .expect("open")
        .expect("frame");
    serde_json::from_str(msg.to_text().unwrap()).unwrap()
}

/// Collect frames up to and including the next one of type `until`.
async fn recv_until(ws: &mut Ws, until: &str) -> Vec<Value> {
    let mut out = Vec::new();
    loop {
        let v = recv(ws).await;
        let done = v["type"] == until;
        out.push(v);
        if done {
            return out;
        }
    }
}

async fn send(ws: &mut Ws, v: Value) {
    ws.send(Message::text(v.to_string())).await.unwrap();
}

// Client times sit far ahead of the server clock so the 50 ms timer never
// overtakes a scripted command.
const SCRIPT: &[(u64, &str)] = &[
    (60_100, "scan down"),
    (64_500, "stop"),
    (65_000, "mark error"),
    (66_000, "jump right"),
    (66_500, "speed up"),
    (67_000, "scan right"),
    (69_000, "jump back"),
    (69_500, "jump purple"),
    (70_000, "show colours"),
];

#[tokio::test(flavor = "multi_thread")]
async fn session_over_websocket() {
    let dir = tempfile::tempdir().unwrap();
    let server = start(dir.path());
    let (mut ws, _) = tokio_tungstenite::connect_async(server.url.clone()).await.unwrap();

    send(&mut ws, json!({"type": "load"})).await;
    let wb = recv(&mut ws).await;
    assert_eq!(wb["type"], "workbook");
    assert_eq!(wb["sheets"][0]["name"], "Opening Stock");
    let state = recv(&mut ws).await;
    assert_eq!(state["type"], "state");
    assert_eq!(state["cursor"], "Opening Stock!A1");

    ws.send(Message::text("{not json")).await.unwrap();
    let err = recv(&mut ws).await;
    assert_eq!(err["type"], "error");
    assert_eq!(err["code"], "MalformedMessage");

    send(&mut ws, json!({"type": "command", "text": "scan down", "t": 60_100})).await;
    let reply = recv_until(&mut ws, "state").await;
    assert_eq!(reply[0]["type"], "event");
    assert_eq!(reply[0]["k"], "command");
    assert_eq!(reply[1]["k"], "scan_start");

    // stop at 64 500 first delivers the steps due at 61 100 .. 64 100
    send(&mut ws, json!({"type": "command", "text": "stop", "t": 64_500})).await;
    let reply = recv_until(&mut ws, "state").await;
    let enters: Vec<(u64, String)> = reply
        .iter()
        .filter(|v| v["k"] == "enter")
        .map(|v| (v["t"].as_u64().unwrap(), v["cell"].as_str().unwrap().to_string()))
        .collect();
    assert_eq!(
        enters,
        [(61_100, "A2".into()), (62_100, "A3".into()), (63_100, "A4".into()), (64_100, "A5".into())]
    );
    assert_eq!(reply.last().unwrap()["cursor"], "Opening Stock!A5");

    send(&mut ws, json!({"type": "command", "text": "jump purple", "t": 65_000})).await;
    let reply = recv_until(&mut ws, "state").await;
    let err = reply.iter().find(|v| v["type"] == "error").unwrap();
    assert_eq!(err["code"], "NoSuchColor");

    send(&mut ws, json!({"type": "end"})).await;
    let ended = recv(&mut ws).await;
    assert_eq!(ended["type"], "ended");
    let log_path = PathBuf::from(ended["log"].as_str().unwrap());
    assert!(log_path.starts_with(dir.path()));
    let out = Command::new(env!("CARGO_BIN_EXE_gridpilot"))
        .arg("replay")
        .arg(&log_path)
        .arg(fixture("retail.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[tokio::test(flavor = "multi_thread")]
async fn server_clock_drives_scans() {
    let dir = tempfile::tempdir().unwrap();
    let server = start(dir.path());
    let (mut ws, _) = tokio_tungstenite::connect_async(server.url.clone()).await.unwrap();
    send(&mut ws, json!({"type": "command", "text": "scan down"})).await;
    recv_until(&mut ws, "state").await;
    // no further commands: the timer must deliver the first step unprompted
    let pushed = recv_until(&mut ws, "state").await;
    let enter = pushed
        .iter()
        .find(|v| v["k"] == "enter")
        .unwrap_or_else(|| panic!("{pushed:?}"));
    assert_eq!(enter["cell"], "A2");
}

fn strip_session(log: &str) -> String {
    let (header, rest) = log.split_once('\n').unwrap();
    let mut header: Value = serde_json::from_str(header).unwrap();
    header.as_object_mut().unwrap().remove("session");
    format!("{header}\n{rest}")
}

#[tokio::test(flavor = "multi_thread")]
async fn websocket_and_repl_logs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let server = start(dir.path());
    let (mut ws, _) = tokio_tungstenite::connect_async(server.url.clone()).await.unwrap();
    for (t, text) in SCRIPT {
        send(&mut ws, json!({"type": "command", "text": text, "t": t})).await;
        recv_until(&mut ws, "state").await;
    }
    send(&mut ws, json!({"type": "end"})).await;
    let ended = recv(&mut ws).await;
    let ws_log = std::fs::read_to_string(ended["log"].as_str().unwrap()).unwrap();

    let repl_log = dir.path().join("repl.jsonl");
    let mut child = Command::new(env!("CARGO_BIN_EXE_gridpilot"))
        .arg("audit")
        .arg(fixture("retail.json"))
        .args(["--manual-clock", "--no-grid", "--log"])
        .arg(&repl_log)
        .stdin(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    {
        let mut stdin = child.stdin.take().unwrap();
        for (t, text) in SCRIPT {
            writeln!(stdin, "@{t} {text}").unwrap();
        }
    }
    assert!(child.wait().unwrap().success());
    let repl_log = std::fs::read_to_string(&repl_log).unwrap();

    assert!(ws_log.lines().count() > 30);
    assert_eq!(strip_session(&ws_log), strip_session(&repl_log));
}
