//! HTTP host for the topic explorer: the static UI bundle plus
//! `GET /api/vis`, `GET /api/labels` and `PUT /api/labels`.
//!
//! The labels file is the only thing the server writes. Writes are
//! serialised and land through a temp-file rename.

use std::io::Read;
use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use tiny_http::{Header, Method, Request, Response, Server};

use crate::error::{Error, Result};
use crate::report::{write_atomic, TopicLabelSet};
use crate::topicmodel::VisData;

const MAX_BODY: usize = 1 << 20;

const PLACEHOLDER_INDEX: &str = "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>framescope explorer</title></head>\n<body><p>No UI bundle configured. Data endpoints: <a href=\"/api/vis\">/api/vis</a>, <a href=\"/api/labels\">/api/labels</a>.</p></body></html>\n";

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub vis_path: PathBuf,
    pub labels_path: PathBuf,
    pub static_dir: Option<PathBuf>,
    /// e.g. `127.0.0.1:8080`; port 0 picks a free port.
    pub addr: String,
    pub workers: usize,
}

struct State {
    vis_bytes: Vec<u8>,
    topics: usize,
    labels_path: PathBuf,
    static_dir: Option<PathBuf>,
    write_lock: Mutex<()>,
}

pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    workers: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }

    /// Blocks until the workers exit.
    pub fn join(mut self) {
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

pub fn start(cfg: &ServeConfig) -> Result<ServerHandle> {
    let vis_bytes = std::fs::read(&cfg.vis_path).map_err(|e| Error::io(&cfg.vis_path, e))?;
    let vis: VisData = serde_json::from_slice(&vis_bytes).map_err(|e| Error::Corrupt {
        path: cfg.vis_path.clone(),
        reason: e.to_string(),
    })?;
    if cfg.labels_path.exists() {
        TopicLabelSet::load(&cfg.labels_path, vis.topics.len())?;
    }
    if let Some(dir) = &cfg.static_dir {
        if !dir.is_dir() {
            return Err(Error::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "static directory not found"),
            ));
        }
    }

    let server = Server::http(cfg.addr.as_str())
        .map_err(|e| Error::InvalidArgument(format!("cannot bind {}: {e}", cfg.addr)))?;
    let addr = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| Error::InvalidArgument("server has no IP address".into()))?;
    let server = Arc::new(server);
    let state = Arc::new(State {
        vis_bytes,
        topics: vis.topics.len(),
        labels_path: cfg.labels_path.clone(),
        static_dir: cfg.static_dir.clone(),
        write_lock: Mutex::new(()),
    });
    let stop = Arc::new(AtomicBool::new(false));

    let workers = (0..cfg.workers.max(1))
        .map(|_| {
            let server = Arc::clone(&server);
            let state = Arc::clone(&state);
            let stop = Arc::clone(&stop);
            std::thread::spawn(move || {
                while !stop.load(Ordering::SeqCst) {
                    match server.recv_timeout(Duration::from_millis(100)) {
                        Ok(Some(req)) => handle(&state, req),
                        Ok(None) => {}
                        Err(e) => {
                            log::error!("accept failed: {e}");
                            break;
                        }
                    }
                }
            })
        })
        .collect();
    log::info!("serving on http://{addr}");
    Ok(ServerHandle {
        addr,
        stop,
        workers,
    })
}

fn content_type(value: &str) -> Header {
    Header::from_bytes(&b"Content-Type"[..], value.as_bytes()).expect("static header")
}

fn json(status: u16, body: Vec<u8>) -> Response<std::io::Cursor<Vec<u8>>> {
    Response::from_data(body)
        .with_status_code(status)
        .with_header(content_type("application/json"))
}

fn text(status: u16, body: &str) -> Response<std::io::Cursor<Vec<u8>>> {
    Response::from_data(body.as_bytes().to_vec())
        .with_status_code(status)
        .with_header(content_type("text/plain; charset=utf-8"))
}

fn handle(state: &State, mut req: Request) {
    let path = req.url().split('?').next().unwrap_or("/").to_owned();
    let method = req.method().clone();
    let response = match (&method, path.as_str()) {
        (Method::Get, "/api/vis") => json(200, state.vis_bytes.clone()),
        (Method::Get, "/api/labels") => get_labels(state),
        (Method::Put, "/api/labels") => put_labels(state, &mut req),
        (_, "/api/vis") | (_, "/api/labels") => text(405, "method not allowed\n"),
        (Method::Get, _) => static_file(state, &path),
        _ => text(405, "method not allowed\n"),
    };
    if let Err(e) = req.respond(response) {
        log::warn!("{method} {path}: {e}");
    }
}

fn get_labels(state: &State) -> Response<std::io::Cursor<Vec<u8>>> {
    let loaded = if state.labels_path.exists() {
        TopicLabelSet::load(&state.labels_path, state.topics)
    } else {
        Ok(TopicLabelSet::default())
    };
    match loaded.and_then(|set| Ok(serde_json::to_vec(&set)?)) {
        Ok(body) => json(200, body),
        Err(e) => text(500, &format!("{e}\n")),
    }
}

fn put_labels(state: &State, req: &mut Request) -> Response<std::io::Cursor<Vec<u8>>> {
    if req.body_length().is_some_and(|n| n > MAX_BODY) {
        return text(413, "labels body too large\n");
    }
    let mut body = Vec::new();
    if let Err(e) = req.as_reader().take(MAX_BODY as u64 + 1).read_to_end(&mut body) {
        return text(400, &format!("cannot read body: {e}\n"));
    }
    if body.len() > MAX_BODY {
        return text(413, "labels body too large\n");
    }
    let set = match TopicLabelSet::parse(&body, state.topics) {
        Ok(set) => set,
        Err(e) => return text(400, &format!("{e}\n")),
    };
    let _guard = state.write_lock.lock().unwrap_or_else(|p| p.into_inner());
    let saved = serde_json::to_vec_pretty(&set)
        .map_err(Error::from)
        .and_then(|mut bytes| {
            bytes.push(b'\n');
            write_atomic(&state.labels_path, &bytes)
        });
    match saved {
        Ok(()) => json(200, serde_json::to_vec(&set).unwrap_or_default()),
        Err(e) => text(500, &format!("{e}\n")),
    }
}

fn static_file(state: &State, url_path: &str) -> Response<std::io::Cursor<Vec<u8>>> {
    let rel = url_path.trim_start_matches('/');
    let rel = if rel.is_empty() { "index.html" } else { rel };
    let Some(dir) = &state.static_dir else {
        return if rel == "index.html" {
            Response::from_data(PLACEHOLDER_INDEX.as_bytes().to_vec())
                .with_header(content_type("text/html; charset=utf-8"))
        } else {
            text(404, "not found\n")
        };
    };
    let rel_path = Path::new(rel);
    if rel_path.components().any(|c| !matches!(c, Component::Normal(_))) {
        return text(400, "bad path\n");
    }
    match std::fs::read(dir.join(rel_path)) {
        Ok(bytes) => Response::from_data(bytes).with_header(content_type(mime_for(rel_path))),
        Err(_) => text(404, "not found\n"),
    }
}

fn mime_for(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") | Some("mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        _ => "application/octet-stream",
    }
}
