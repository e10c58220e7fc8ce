#![allow(dead_code)]

use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::Path;
use std::time::Duration;

use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpStream;
use vmd_centre::config::{CentreConfig, FrameSourceConfig};
use vmd_centre::server::{start, ServerHandle, ServerOptions};
use vmd_core::protocol::{encode_message, ControlMessage, MessageDecoder};

pub const SECRET: &str = "letmein";
pub const PASSWORD: &str = "open sesame";

/// Config for a server on ephemeral loopback ports rendering `scene_text`.
pub fn scene_config(dir: &Path, scene_text: &str) -> CentreConfig {
    let path = dir.join("world.scene");
    std::fs::write(&path, scene_text).unwrap();
    let mut cfg = CentreConfig::new(FrameSourceConfig::Scene(path), SECRET, PASSWORD);
    cfg.listen_port = 0;
    cfg.bridge_port = Some(0);
    cfg.frame_rate = 20.0;
    cfg
}

pub fn loopback() -> ServerOptions {
    ServerOptions {
        bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
        ..ServerOptions::default()
    }
}

pub async fn serve(cfg: &CentreConfig, opts: ServerOptions) -> ServerHandle {
    start(cfg, opts).await.expect("server starts")
}

pub struct Client {
    stream: TcpStream,
    decoder: MessageDecoder,
    buf: Vec<u8>,
}

impl Client {
    pub async fn connect(addr: SocketAddr) -> Client {
        let stream = TcpStream::connect(addr).await.expect("connect");
        stream.set_nodelay(true).unwrap();
        Client {
            stream,
            decoder: MessageDecoder::new(),
            buf: vec![0; 64 * 1024],
        }
    }

    pub async fn send(&mut self, m: &ControlMessage) {
        self.stream.write_all(&encode_message(m)).await.expect("send");
    }

    pub async fn send_raw(&mut self, bytes: &[u8]) {
        self.stream.write_all(bytes).await.expect("send");
    }

    /// Next message; `None` on EOF or after `wait`.
    pub async fn recv_within(&mut self, wait: Duration) -> Option<ControlMessage> {
        let deadline = tokio::time::Instant::now() + wait;
        loop {
            if let Some(m) = self.decoder.next_message().expect("valid framing") {
                return Some(m);
            }
            let read = tokio::time::timeout_at(deadline, self.stream.read(&mut self.buf)).await;
            match read {
                Ok(Ok(0)) | Ok(Err(_)) | Err(_) => return None,
                Ok(Ok(n)) => self.decoder.feed(&self.buf[..n]),
            }
        }
    }

    pub async fn recv(&mut self) -> Option<ControlMessage> {
        self.recv_within(Duration::from_secs(5)).await
    }

    /// Next message that is not a FRAME.
    pub async fn recv_control(&mut self) -> Option<ControlMessage> {
        loop {
            match self.recv().await? {
                ControlMessage::Frame(_) => continue,
                m => return Some(m),
            }
        }
    }

    /// HELLO with the right secret; returns the mode announced after HELLO_OK.
    pub async fn login(addr: SocketAddr) -> (Client, ControlMessage) {
        let mut c = Client::connect(addr).await;
        c.send(&ControlMessage::Hello { secret: SECRET.into() }).await;
        assert_eq!(c.recv_control().await, Some(ControlMessage::HelloOk));
        let mode = c.recv_control().await.expect("mode announcement");
        (c, mode)
    }
}

/// Polls `check` every 10 ms until it holds or `wait` passes.
pub async fn eventually(wait: Duration, mut check: impl FnMut() -> bool) -> bool {
    let deadline = tokio::time::Instant::now() + wait;
    while tokio::time::Instant::now() < deadline {
        if check() {
            return true;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    check()
}
