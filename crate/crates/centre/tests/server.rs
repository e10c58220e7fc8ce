mod common;

use std::time::Duration;

use common::*;
use futures_util::{SinkExt, StreamExt};
use tokio_tungstenite::tungstenite::Message;
use vmd_core::protocol::{encode_message, ControlMessage, MessageDecoder, Mode};
use vmd_core::rover::{AuxCommand, DriveCommand};

const SCENE: &str = "background 80\nobject_polar 6 0 0.5 255 0 0\n";

#[tokio::test]
async fn hello_drive_forward() {
    let dir = tempfile::tempdir().unwrap();
    let server = serve(&scene_config(dir.path(), SCENE), loopback()).await;
    let (mut c, mode) = Client::login(server.control_addr).await;
    assert_eq!(mode, ControlMessage::ModeOk(Mode::PcControl));
    c.send(&ControlMessage::ModeSet(Mode::PcControl)).await;
    assert_eq!(c.recv_control().await, Some(ControlMessage::ModeOk(Mode::PcControl)));
    c.send(&ControlMessage::Drive(DriveCommand::Forward)).await;
    let watch = server.rover_watch();
    assert!(
        eventually(Duration::from_secs(2), || watch.borrow().state.active_drive
            == DriveCommand::Forward)
        .await
    );
    server.shutdown().await;
}

#[tokio::test]
async fn wrong_secret_is_rejected_and_closed() {
    let dir = tempfile::tempdir().unwrap();
    let server = serve(&scene_config(dir.path(), SCENE), loopback()).await;
    let mut c = Client::connect(server.control_addr).await;
    c.send(&ControlMessage::Hello { secret: "guess".into() }).await;
    assert_eq!(c.recv().await, Some(ControlMessage::HelloErr { reason: "auth".into() }));
    assert_eq!(c.recv().await, None);
    server.shutdown().await;
}

#[tokio::test]
async fn second_session_is_busy() {
    let dir = tempfile::tempdir().unwrap();
    let server = serve(&scene_config(dir.path(), SCENE), loopback()).await;
    let (mut first, _) = Client::login(server.control_addr).await;
    let mut second = Client::connect(server.control_addr).await;
    second.send(&ControlMessage::Hello { secret: SECRET.into() }).await;
    assert_eq!(
        second.recv().await,
        Some(ControlMessage::HelloErr { reason: "busy".into() })
    );
    assert_eq!(second.recv().await, None);
    first.send(&ControlMessage::Ping).await;
    assert_eq!(first.recv_control().await, Some(ControlMessage::Pong));
    server.shutdown().await;
}

#[tokio::test]
async fn frames_stream_to_ready_session() {
    let dir = tempfile::tempdir().unwrap();
    let server = serve(&scene_config(dir.path(), SCENE), loopback()).await;
    let (mut c, _) = Client::login(server.control_addr).await;
    let mut seqs = Vec::new();
    while seqs.len() < 3 {
        if let Some(ControlMessage::Frame(p)) = c.recv().await {
            assert_eq!((p.width, p.height), (320, 240));
            seqs.push(p.seq);
        }
    }
    assert!(seqs.windows(2).all(|w| w[0] < w[1]));
    c.send(&ControlMessage::SnapshotReq).await;
    assert!(matches!(c.recv_control().await, Some(ControlMessage::Snapshot(_))));
    server.shutdown().await;
}

#[tokio::test]
async fn garbage_tag_gets_bye() {
    let dir = tempfile::tempdir().unwrap();
    let server = serve(&scene_config(dir.path(), SCENE), loopback()).await;
    let (mut c, _) = Client::login(server.control_addr).await;
    c.send_raw(&[0, 0, 0, 0, 0x7f]).await;
    assert_eq!(c.recv_control().await, Some(ControlMessage::Bye));
    server.shutdown().await;
}

#[tokio::test]
async fn disconnect_stops_rover() {
    let dir = tempfile::tempdir().unwrap();
    let server = serve(&scene_config(dir.path(), SCENE), loopback()).await;
    let watch = server.rover_watch();
    {
        let (mut c, _) = Client::login(server.control_addr).await;
        c.send(&ControlMessage::Drive(DriveCommand::Left)).await;
        assert!(
            eventually(Duration::from_secs(2), || watch.borrow().state.active_drive
                == DriveCommand::Left)
            .await
        );
    }
    assert!(
        eventually(Duration::from_secs(2), || watch.borrow().state.active_drive
            == DriveCommand::Stop)
        .await
    );
    // the slot is free again
    let (_c, _) = Client::login(server.control_addr).await;
    server.shutdown().await;
}

#[tokio::test]
async fn websocket_bridge_carries_the_same_framing() {
    let dir = tempfile::tempdir().unwrap();
    let console = dir.path().join("console");
    std::fs::create_dir(&console).unwrap();
    std::fs::write(console.join("index.html"), "<h1>console</h1>").unwrap();
    let mut cfg = scene_config(dir.path(), SCENE);
    cfg.console_dir = Some(console);
    let server = serve(&cfg, loopback()).await;

    let url = format!("ws://{}/ws", server.bridge_addr);
    let (mut ws, _) = tokio_tungstenite::connect_async(url).await.unwrap();
    ws.send(Message::Binary(
        encode_message(&ControlMessage::Hello { secret: SECRET.into() }).into(),
    ))
    .await
    .unwrap();
    let mut decoder = MessageDecoder::new();
    let mut got = Vec::new();
    while got.len() < 2 {
        let Some(Ok(Message::Binary(b))) = ws.next().await else {
            panic!("bridge closed")
        };
        decoder.feed(&b);
        let m = decoder
            .next_message()
            .unwrap()
            .expect("one message per websocket payload");
        assert_eq!(decoder.buffered(), 0);
        if !matches!(m, ControlMessage::Frame(_)) {
            got.push(m);
        }
    }
    assert_eq!(
        got,
        vec![ControlMessage::HelloOk, ControlMessage::ModeOk(Mode::PcControl)]
    );
    ws.send(Message::Binary(
        encode_message(&ControlMessage::Aux(AuxCommand::LightsOn.into())).into(),
    ))
    .await
    .unwrap();
    let watch = server.rover_watch();
    assert!(eventually(Duration::from_secs(2), || watch.borrow().state.lights).await);

    // static assets on the same port
    let mut s = tokio::net::TcpStream::connect(server.bridge_addr).await.unwrap();
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    s.write_all(b"GET /index.html HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut body = String::new();
    s.read_to_string(&mut body).await.unwrap();
    assert!(body.starts_with("HTTP/1.1 200"), "{body}");
    assert!(body.ends_with("<h1>console</h1>"));
    server.shutdown().await;
}

#[tokio::test]
async fn port_in_use_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let mut cfg = scene_config(dir.path(), SCENE);
    cfg.listen_port = taken.local_addr().unwrap().port();
    assert!(matches!(
        vmd_centre::server::start(&cfg, loopback()).await,
        Err(vmd_centre::server::ServerError::Bind { .. })
    ));
}
