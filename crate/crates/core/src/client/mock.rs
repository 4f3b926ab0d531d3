//! A scripted in-process chat endpoint for offline tests.
//!
//! Each request is answered by a user closure that sees the request number
//! (0-based, in arrival order) and the decoded prompt. The server records a
//! transcript and the peak number of requests it was handling at once.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde_json::{json, Value};

/// What the mock saw for one request.
#[derive(Debug, Clone)]
pub struct MockRequest {
    pub index: usize,
    pub authorization: Option<String>,
    pub model: String,
    pub prompt: String,
    /// The raw data URL of the image part.
    pub image_url: String,
}

/// How the mock answers one request.
#[derive(Debug, Clone)]
pub struct MockReply {
    pub status: u16,
    pub body: String,
    pub delay: Duration,
}

impl MockReply {
    /// A successful chat completion with `content` as the assistant text.
    pub fn text(content: &str) -> Self {
        MockReply {
            status: 200,
            body: json!({
                "choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]
            })
            .to_string(),
            delay: Duration::ZERO,
        }
    }

    pub fn status(status: u16) -> Self {
        MockReply {
            status,
            body: json!({"error": {"message": "scripted failure"}}).to_string(),
            delay: Duration::ZERO,
        }
    }

    pub fn raw(status: u16, body: &str) -> Self {
        MockReply {
            status,
            body: body.to_string(),
            delay: Duration::ZERO,
        }
    }

    pub fn delayed(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }
}

type Handler = dyn Fn(&MockRequest) -> MockReply + Send + Sync;

struct State {
    handler: Box<Handler>,
    requests: AtomicUsize,
    in_flight: AtomicUsize,
    peak: AtomicUsize,
    transcript: Mutex<Vec<MockRequest>>,
    stop: AtomicBool,
}

pub struct MockEndpoint {
    addr: SocketAddr,
    state: Arc<State>,
    acceptor: Option<JoinHandle<()>>,
}

impl MockEndpoint {
    pub fn start(
        handler: impl Fn(&MockRequest) -> MockReply + Send + Sync + 'static,
    ) -> std::io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let state = Arc::new(State {
            handler: Box::new(handler),
            requests: AtomicUsize::new(0),
            in_flight: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
            transcript: Mutex::new(Vec::new()),
            stop: AtomicBool::new(false),
        });
        let shared = Arc::clone(&state);
        let acceptor = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if shared.stop.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let conn_state = Arc::clone(&shared);
                std::thread::spawn(move || {
                    let _ = serve(stream, &conn_state);
                });
            }
        });
        Ok(MockEndpoint {
            addr,
            state,
            acceptor: Some(acceptor),
        })
    }

    /// Base URL to put in an endpoint config.
    pub fn base_url(&self) -> String {
        format!("http://{}/v1", self.addr)
    }

    pub fn request_count(&self) -> usize {
        self.state.requests.load(Ordering::SeqCst)
    }

    pub fn peak_in_flight(&self) -> usize {
        self.state.peak.load(Ordering::SeqCst)
    }

    pub fn transcript(&self) -> Vec<MockRequest> {
        self.state
            .transcript
            .lock()
            .expect("transcript lock")
            .clone()
    }
}

impl Drop for MockEndpoint {
    fn drop(&mut self) {
        self.state.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept so the thread can observe the flag.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.acceptor.take() {
            let _ = handle.join();
        }
    }
}

fn reason_phrase(status: u16) -> &'static str {
    match status {
        200 => "OK",
        400 => "Bad Request",
        401 => "Unauthorized",
        403 => "Forbidden",
        404 => "Not Found",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        503 => "Service Unavailable",
        _ => "Status",
    }
}

fn decode(body: &[u8], index: usize, authorization: Option<String>) -> MockRequest {
    let value: Value = serde_json::from_slice(body).unwrap_or(Value::Null);
    let part = |i: usize| {
        value
            .pointer(&format!("/messages/0/content/{i}"))
            .cloned()
            .unwrap_or(Value::Null)
    };
    MockRequest {
        index,
        authorization,
        model: value["model"].as_str().unwrap_or_default().to_string(),
        prompt: part(0)["text"].as_str().unwrap_or_default().to_string(),
        image_url: part(1)["image_url"]["url"]
            .as_str()
            .unwrap_or_default()
            .to_string(),
    }
}

fn serve(stream: TcpStream, state: &State) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut content_length = 0usize;
    let mut authorization = None;
    let mut line = String::new();
    reader.read_line(&mut line)?;
    if line.trim().is_empty() {
        return Ok(());
    }
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 || line == "\r\n" || line == "\n" {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            let value = value.trim();
            match name.trim().to_ascii_lowercase().as_str() {
                "content-length" => content_length = value.parse().unwrap_or(0),
                "authorization" => authorization = Some(value.to_string()),
                _ => {}
            }
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;

    let index = state.requests.fetch_add(1, Ordering::SeqCst);
    let now = state.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    state.peak.fetch_max(now, Ordering::SeqCst);

    let request = decode(&body, index, authorization);
    let reply = (state.handler)(&request);
    state
        .transcript
        .lock()
        .expect("transcript lock")
        .push(request);
    if !reply.delay.is_zero() {
        std::thread::sleep(reply.delay);
    }
    state.in_flight.fetch_sub(1, Ordering::SeqCst);

    let mut stream = stream;
    let head = format!(
        "HTTP/1.1 {} {}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        reply.status,
        reason_phrase(reply.status),
        reply.body.len()
    );
    stream.write_all(head.as_bytes())?;
    stream.write_all(reply.body.as_bytes())?;
    stream.flush()
}
