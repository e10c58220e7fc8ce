//! Network service: the TCP control port, the WebSocket bridge with static
//! console assets, the frame loop and the rover task.
//!
//! Tasks talk over queues only. Sessions feed an engine task that owns the
//! [`Centre`]; the engine sends encoded packets to the rover task, which
//! publishes snapshots of the platform state on a watch channel. Each
//! connection has an [`Outbox`] where control messages are never dropped and
//! frames are dropped oldest-first beyond [`FRAME_QUEUE_DEPTH`].

use std::collections::{BTreeMap, VecDeque};
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use thiserror::Error;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{mpsc, oneshot, watch, Notify};
use tokio::task::JoinHandle;
use tokio::time::Instant;
use tower_http::services::ServeDir;
use vmd_core::protocol::{encode_message, ControlMessage, MessageDecoder};
use vmd_core::rover::{RoverState, PACKET_LEN};

use crate::config::CentreConfig;
use crate::engine::{Centre, EngineError, FrameSource, Outgoing, SessionId};
use crate::rover_link::{LocalRover, RoverLink};

pub const FRAME_QUEUE_DEPTH: usize = 4;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct ServerOptions {
    pub bind: IpAddr,
    /// Latency added to every packet on its way to the rover.
    pub link_delay: Duration,
    /// Rover physics and watchdog period.
    pub rover_tick: Duration,
}

impl Default for ServerOptions {
    fn default() -> Self {
        ServerOptions {
            bind: IpAddr::V4(Ipv4Addr::UNSPECIFIED),
            link_delay: Duration::ZERO,
            rover_tick: Duration::from_millis(20),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoverSnapshot {
    pub state: RoverState,
    pub received: usize,
    pub rejected: usize,
}

#[derive(Default)]
struct OutboxState {
    control: VecDeque<ControlMessage>,
    frames: VecDeque<ControlMessage>,
    dropped_frames: u64,
    closed: bool,
}

/// Per-connection send queue.
#[derive(Default)]
pub struct Outbox {
    state: Mutex<OutboxState>,
    notify: Notify,
}

impl Outbox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&self, msg: ControlMessage) {
        {
            let mut s = self.state.lock().expect("outbox lock");
            if s.closed {
                return;
            }
            if matches!(msg, ControlMessage::Frame(_)) {
                s.frames.push_back(msg);
                while s.frames.len() > FRAME_QUEUE_DEPTH {
                    s.frames.pop_front();
                    s.dropped_frames += 1;
                }
            } else {
                s.control.push_back(msg);
            }
        }
        self.notify.notify_one();
    }

    /// Queued messages are still delivered after close.
    pub fn close(&self) {
        self.state.lock().expect("outbox lock").closed = true;
        self.notify.notify_one();
    }

    pub fn dropped_frames(&self) -> u64 {
        self.state.lock().expect("outbox lock").dropped_frames
    }

    pub fn try_pop(&self) -> Option<ControlMessage> {
        let mut s = self.state.lock().expect("outbox lock");
        s.control.pop_front().or_else(|| s.frames.pop_front())
    }

    /// Next message, or `None` once closed and drained.
    pub async fn pop(&self) -> Option<ControlMessage> {
        loop {
            {
                let mut s = self.state.lock().expect("outbox lock");
                if let Some(m) = s.control.pop_front().or_else(|| s.frames.pop_front()) {
                    return Some(m);
                }
                if s.closed {
                    return None;
                }
            }
            self.notify.notified().await;
        }
    }
}

enum EngineInput {
    Connect {
        outbox: Arc<Outbox>,
        reply: oneshot::Sender<SessionId>,
    },
    Message(SessionId, ControlMessage),
    Disconnect(SessionId),
}

/// Centre-side handle on the rover task.
struct ChannelRover {
    tx: mpsc::UnboundedSender<[u8; PACKET_LEN]>,
    state: watch::Receiver<RoverSnapshot>,
}

impl RoverLink for ChannelRover {
    fn transmit(&mut self, packet: [u8; PACKET_LEN], _now_ms: u64) {
        let _ = self.tx.send(packet);
    }

    fn state(&self) -> RoverState {
        self.state.borrow().state.clone()
    }
}

pub struct ServerHandle {
    pub control_addr: SocketAddr,
    pub bridge_addr: SocketAddr,
    rover: watch::Receiver<RoverSnapshot>,
    shutdown: watch::Sender<bool>,
    tasks: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn rover(&self) -> RoverSnapshot {
        self.rover.borrow().clone()
    }

    pub fn rover_watch(&self) -> watch::Receiver<RoverSnapshot> {
        self.rover.clone()
    }

    pub async fn shutdown(self) {
        let _ = self.shutdown.send(true);
        for t in self.tasks {
            let _ = tokio::time::timeout(Duration::from_secs(2), t).await;
        }
    }
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

/// Binds both ports and spawns every task.
pub async fn start(cfg: &CentreConfig, opts: ServerOptions) -> Result<ServerHandle, ServerError> {
    let source = FrameSource::load(cfg)?;
    let centre = Centre::new(cfg, source)?;

    let bind = |port: u16| async move {
        let addr = SocketAddr::new(opts.bind, port);
        TcpListener::bind(addr)
            .await
            .map_err(|source| ServerError::Bind { addr, source })
    };
    let control = bind(cfg.listen_port).await?;
    let bridge = bind(cfg.bridge_port()).await?;
    let control_addr = control.local_addr().expect("bound socket");
    let bridge_addr = bridge.local_addr().expect("bound socket");

    let start = Instant::now();
    let (shutdown_tx, shutdown_rx) = watch::channel(false);
    let (packet_tx, packet_rx) = mpsc::unbounded_channel();
    let (rover_tx, rover_rx) = watch::channel(RoverSnapshot {
        state: RoverState::default(),
        received: 0,
        rejected: 0,
    });
    let (engine_tx, engine_rx) = mpsc::unbounded_channel();

    let mut tasks = Vec::new();
    tasks.push(tokio::spawn(rover_task(
        LocalRover::new(RoverState::default(), cfg.watchdog_timeout_ms),
        packet_rx,
        rover_tx,
        opts.clone(),
        start,
        shutdown_rx.clone(),
    )));
    let link = ChannelRover {
        tx: packet_tx,
        state: rover_rx.clone(),
    };
    tasks.push(tokio::spawn(engine_task(
        centre,
        link,
        engine_rx,
        Duration::from_millis(cfg.frame_interval_ms()),
        start,
        shutdown_rx.clone(),
    )));
    tasks.push(tokio::spawn(accept_tcp(
        control,
        engine_tx.clone(),
        shutdown_rx.clone(),
    )));

    let mut app = Router::new().route("/ws", get(ws_upgrade)).with_state(engine_tx);
    if let Some(dir) = &cfg.console_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    let mut stop = shutdown_rx;
    tasks.push(tokio::spawn(async move {
        let served = axum::serve(bridge, app).with_graceful_shutdown(async move {
            let _ = stop.wait_for(|s| *s).await;
        });
        if let Err(e) = served.await {
            tracing::error!("bridge stopped: {e}");
        }
    }));

    tracing::info!(%control_addr, %bridge_addr, "control centre listening");
    Ok(ServerHandle {
        control_addr,
        bridge_addr,
        rover: rover_rx,
        shutdown: shutdown_tx,
        tasks,
    })
}

async fn rover_task(
    mut rover: LocalRover,
    mut packets: mpsc::UnboundedReceiver<[u8; PACKET_LEN]>,
    publish: watch::Sender<RoverSnapshot>,
    opts: ServerOptions,
    start: Instant,
    mut shutdown: watch::Receiver<bool>,
) {
    let mut pending: VecDeque<(Instant, [u8; PACKET_LEN])> = VecDeque::new();
    let mut tick = tokio::time::interval(opts.rover_tick);
    tick.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);
    loop {
        tokio::select! {
            _ = shutdown.changed() => break,
            p = packets.recv() => match p {
                Some(p) => pending.push_back((Instant::now() + opts.link_delay, p)),
                None => break,
            },
            _ = tick.tick() => {}
        }
        let now = Instant::now();
        while pending.front().is_some_and(|(due, _)| *due <= now) {
            let (_, p) = pending.pop_front().expect("non-empty");
            if let Err(e) = rover.receive(&p, elapsed_ms(start)) {
                tracing::warn!("rover rejected packet {p:02x?}: {e}");
            }
        }
        rover.advance(elapsed_ms(start));
        publish.send_if_modified(|snap| {
            let next = RoverSnapshot {
                state: rover.state().clone(),
                received: rover.received().len(),
                rejected: rover.rejected().len(),
            };
            let changed = *snap != next;
            *snap = next;
            changed
        });
    }
}

async fn engine_task(
    mut centre: Centre,
    mut rover: ChannelRover,
    mut inputs: mpsc::UnboundedReceiver<EngineInput>,
    frame_interval: Duration,
    start: Instant,
    mut shutdown: watch::Receiver<bool>,
) {
    let mut outboxes: BTreeMap<SessionId, Arc<Outbox>> = BTreeMap::new();
    let mut frames = tokio::time::interval(frame_interval);
    frames.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);

    let dispatch = |outboxes: &mut BTreeMap<SessionId, Arc<Outbox>>, out: Vec<Outgoing>| {
        for o in out {
            match o {
                Outgoing::Send(id, m) => {
                    if let Some(b) = outboxes.get(&id) {
                        b.push(m);
                    }
                }
                Outgoing::Close(id) => {
                    if let Some(b) = outboxes.remove(&id) {
                        b.close();
                    }
                }
            }
        }
    };

    loop {
        tokio::select! {
            _ = shutdown.changed() => break,
            input = inputs.recv() => {
                let Some(input) = input else { break };
                let now = elapsed_ms(start);
                match input {
                    EngineInput::Connect { outbox, reply } => {
                        let id = centre.connect();
                        outboxes.insert(id, outbox);
                        let _ = reply.send(id);
                    }
                    EngineInput::Message(id, msg) => {
                        let out = centre.handle(id, &msg, now, &mut rover);
                        dispatch(&mut outboxes, out);
                    }
                    EngineInput::Disconnect(id) => {
                        centre.disconnect(id, now, &mut rover);
                        if let Some(b) = outboxes.remove(&id) {
                            b.close();
                        }
                    }
                }
            }
            _ = frames.tick() => {
                match centre.tick(elapsed_ms(start), &mut rover) {
                    Ok(t) => {
                        if let Some(rec) = &t.record {
                            tracing::trace!(seq = rec.seq, mode = %rec.mode, "frame");
                        }
                        dispatch(&mut outboxes, t.outgoing);
                    }
                    Err(e) => tracing::warn!("frame loop: {e}"),
                }
            }
        }
    }
    for b in outboxes.values() {
        b.push(ControlMessage::Bye);
        b.close();
    }
}

async fn register(engine: &mpsc::UnboundedSender<EngineInput>, outbox: Arc<Outbox>) -> Option<SessionId> {
    let (reply, rx) = oneshot::channel();
    engine.send(EngineInput::Connect { outbox, reply }).ok()?;
    rx.await.ok()
}

/// Feeds bytes into the decoder and forwards complete messages. Returns
/// false on a framing error.
fn forward(
    decoder: &mut MessageDecoder,
    bytes: &[u8],
    id: SessionId,
    engine: &mpsc::UnboundedSender<EngineInput>,
) -> bool {
    decoder.feed(bytes);
    loop {
        match decoder.next_message() {
            Ok(Some(m)) => {
                let _ = engine.send(EngineInput::Message(id, m));
            }
            Ok(None) => return true,
            Err(e) => {
                tracing::info!(session = id, "framing error: {e}");
                return false;
            }
        }
    }
}

async fn accept_tcp(
    listener: TcpListener,
    engine: mpsc::UnboundedSender<EngineInput>,
    mut shutdown: watch::Receiver<bool>,
) {
    loop {
        tokio::select! {
            _ = shutdown.changed() => break,
            conn = listener.accept() => match conn {
                Ok((stream, peer)) => {
                    tracing::debug!(%peer, "tcp connection");
                    tokio::spawn(tcp_session(stream, engine.clone()));
                }
                Err(e) => tracing::warn!("accept failed: {e}"),
            }
        }
    }
}

/// Writes queued messages until the outbox closes. Runs apart from the
/// reader so a peer that stops reading cannot stall incoming commands.
fn spawn_writer<W, F>(outbox: Arc<Outbox>, mut sink: W, mut write: F) -> JoinHandle<()>
where
    W: Send + 'static,
    F: for<'a> FnMut(&'a mut W, Vec<u8>) -> futures_util::future::BoxFuture<'a, bool> + Send + 'static,
{
    tokio::spawn(async move {
        while let Some(m) = outbox.pop().await {
            if !write(&mut sink, encode_message(&m)).await {
                break;
            }
        }
        let _ = write(&mut sink, Vec::new()).await;
    })
}

/// Reader side ended: release the session and give the writer a moment to
/// flush before dropping it.
async fn finish(
    id: SessionId,
    engine: &mpsc::UnboundedSender<EngineInput>,
    outbox: &Outbox,
    mut writer: JoinHandle<()>,
    writer_done: bool,
) {
    let _ = engine.send(EngineInput::Disconnect(id));
    outbox.close();
    if !writer_done && tokio::time::timeout(Duration::from_secs(1), &mut writer).await.is_err() {
        writer.abort();
    }
}

async fn tcp_session(stream: TcpStream, engine: mpsc::UnboundedSender<EngineInput>) {
    let _ = stream.set_nodelay(true);
    let outbox = Arc::new(Outbox::new());
    let Some(id) = register(&engine, outbox.clone()).await else {
        return;
    };
    let (mut rd, wr) = stream.into_split();
    // an empty buffer marks the end of the stream
    let mut writer = spawn_writer(outbox.clone(), wr, |wr, bytes| {
        Box::pin(async move {
            if bytes.is_empty() {
                wr.shutdown().await.is_ok()
            } else {
                wr.write_all(&bytes).await.is_ok()
            }
        })
    });
    let mut decoder = MessageDecoder::new();
    let mut buf = vec![0u8; 64 * 1024];
    let mut writer_done = false;
    loop {
        tokio::select! {
            _ = &mut writer => {
                writer_done = true;
                break;
            }
            n = rd.read(&mut buf) => match n {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    if !forward(&mut decoder, &buf[..n], id, &engine) {
                        outbox.push(ControlMessage::Bye);
                        break;
                    }
                }
            },
        }
    }
    finish(id, &engine, &outbox, writer, writer_done).await;
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(engine): State<mpsc::UnboundedSender<EngineInput>>) -> Response {
    ws.on_upgrade(move |socket| ws_session(socket, engine))
}

async fn ws_session(socket: WebSocket, engine: mpsc::UnboundedSender<EngineInput>) {
    let outbox = Arc::new(Outbox::new());
    let Some(id) = register(&engine, outbox.clone()).await else {
        return;
    };
    let (tx, mut rx) = socket.split();
    let mut writer = spawn_writer(outbox.clone(), tx, |tx, bytes| {
        Box::pin(async move {
            let msg = if bytes.is_empty() {
                Message::Close(None)
            } else {
                Message::Binary(bytes.into())
            };
            tx.send(msg).await.is_ok()
        })
    });
    let mut decoder = MessageDecoder::new();
    let mut writer_done = false;
    loop {
        tokio::select! {
            _ = &mut writer => {
                writer_done = true;
                break;
            }
            incoming = rx.next() => match incoming {
                Some(Ok(Message::Binary(bytes))) => {
                    if !forward(&mut decoder, &bytes, id, &engine) {
                        outbox.push(ControlMessage::Bye);
                        break;
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
    finish(id, &engine, &outbox, writer, writer_done).await;
}
