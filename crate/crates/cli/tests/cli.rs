use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use riskreg::golden::{SCA_LAYOUT, SCA_REGISTER_CSV};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_riskreg"));
    cmd.env_remove("RISKREG_CATALOG").env("RISKREG_LOG", "warn");
    cmd
}

fn riskreg(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn golden_dir(with_layout: bool) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sca.csv");
    std::fs::write(&path, SCA_REGISTER_CSV).unwrap();
    if with_layout {
        std::fs::write(dir.path().join("sca.layout.toml"), SCA_LAYOUT).unwrap();
    }
    (dir, path)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_golden_with_layout_warns_once() {
    let (_dir, path) = golden_dir(true);
    let out = riskreg(&["validate", s(&path)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("0 error(s), 1 warning(s)"), "{text}");
    assert!(text.contains("entry 39: PartitionMismatch"), "{text}");

    let out = riskreg(&["validate", "--no-layout", s(&path)]);
    assert!(stdout(&out).contains("0 error(s), 0 warning(s)"));
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let header = "id,asset,category,owner,asset_value,threat,threat_likelihood,vulnerability,vulnerability_likelihood";

    let range = dir.path().join("range.csv");
    std::fs::write(
        &range,
        format!("{header}\n1,Laptop,Software,CIO,5,Theft,11,Unlocked,3\n"),
    )
    .unwrap();
    let out = riskreg(&["validate", s(&range)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("RangeError"));

    let label = dir.path().join("label.csv");
    std::fs::write(
        &label,
        format!("{header}\n1,Laptop,Furniture,CIO,5,Theft,1,Unlocked,3\n"),
    )
    .unwrap();
    assert_eq!(riskreg(&["validate", s(&label)]).status.code(), Some(1));

    let garbage = dir.path().join("garbage.csv");
    std::fs::write(
        &garbage,
        format!("{header}\n1,Laptop,Software,CIO,five,Theft,1,Unlocked,3\n"),
    )
    .unwrap();
    let out = riskreg(&["validate", s(&garbage)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    assert_eq!(riskreg(&["validate", "/no/such/file.csv"]).status.code(), Some(2));
    assert_eq!(riskreg(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(riskreg(&["--help"]).status.code(), Some(0));
}

#[test]
fn assess_headline_and_anchors() {
    let (_dir, path) = golden_dir(false);
    let out = riskreg(&["assess", s(&path)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("appetite = 150; 25 above / 20 below"), "{text}");
    assert!(text.contains("RISK APPETITE LINE: 150"));

    let out = riskreg(&["assess", s(&path), "--appetite-anchors", "1,10,10:3,10,10"]);
    assert!(
        stdout(&out).contains("appetite = 200; 12 above / 33 below"),
        "{}",
        stdout(&out)
    );

    let out = riskreg(&["assess", s(&path), "--appetite", "300"]);
    assert!(stdout(&out).contains("appetite = 300; 3 above / 42 below"));

    let out = riskreg(&[
        "assess",
        s(&path),
        "--appetite",
        "150",
        "--appetite-anchors",
        "1,10,10:2,10,10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = riskreg(&["assess", s(&path), "--appetite-anchors", "6,10,10:2,10,10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = riskreg(&["assess", s(&path), "--bands", "1,1/3,2/3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn assess_is_byte_identical_across_runs() {
    let (_dir, path) = golden_dir(false);
    let a = riskreg(&["assess", s(&path), "--heatmap"]).stdout;
    let b = riskreg(&["assess", s(&path), "--heatmap"]).stdout;
    assert_eq!(a, b);
}

#[test]
fn whatif_reports_deltas_and_defense() {
    let (_dir, path) = golden_dir(false);
    let out = riskreg(&["whatif", s(&path), "--apply", "16:C-ADM-01,C-TEC-09"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("16: 360 → 175 (RED → RED)"), "{text}");
    assert!(text.contains("total: 7250 → 7065 (-185)"), "{text}");
    assert!(text.contains("defense in depth 16: satisfied"), "{text}");

    let out = riskreg(&["whatif", s(&path), "--apply", "16:C-TEC-09"]);
    assert!(stdout(&out).contains("defense in depth 16: NOT satisfied"));

    let out = riskreg(&["whatif", s(&path), "--apply", "99:C-ADM-01"]);
    assert_eq!(out.status.code(), Some(1));
    let out = riskreg(&["whatif", s(&path), "--apply", "16:C-NOPE"]);
    assert_eq!(out.status.code(), Some(1));
    let out = riskreg(&["whatif", s(&path), "--apply", "16:C-PHY-01"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("C-PHY-01"));
    let out = riskreg(&["whatif", s(&path), "--apply", "sixteen"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn whatif_catalog_from_env() {
    let (dir, path) = golden_dir(false);
    let catalog = dir.path().join("catalog.toml");
    std::fs::write(
        &catalog,
        r#"
[[control]]
id = "X-1"
name = "Training"
category = "administrative"
functions = ["prevent"]
applies_to = []
threat_reduction = 3
vulnerability_reduction = 2
"#,
    )
    .unwrap();
    let out = bin()
        .args(["whatif", s(&path), "--apply", "16:X-1"])
        .env("RISKREG_CATALOG", &catalog)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("16: 360 → 175 (RED → RED)"));

    let out = bin()
        .args(["whatif", s(&path)])
        .env("RISKREG_CATALOG", &catalog)
        .output()
        .unwrap();
    assert!(stdout(&out).contains("16: 360 X-1"), "{}", stdout(&out));
}

#[test]
fn heatmap_outputs() {
    let (dir, path) = golden_dir(false);
    let svg = dir.path().join("map.svg");
    let out = riskreg(&["heatmap", s(&path), "-o", s(&svg)]);
    assert_eq!(out.status.code(), Some(0));
    let bytes = std::fs::read(&svg).unwrap();
    let text = String::from_utf8(bytes.clone()).unwrap();
    assert!(text.starts_with("<svg") || text.starts_with("<?xml"));
    assert_eq!(text.matches("class=\"marker\"").count(), 45);

    let again = riskreg(&["heatmap", s(&path)]).stdout;
    assert_eq!(again, bytes);

    let out = riskreg(&["heatmap", s(&path), "--format", "ascii"]);
    assert!(stdout(&out).contains("45 entries"));

    let out = riskreg(&["heatmap", s(&path), "-o", "/no/such/dir/map.svg"]);
    assert_eq!(out.status.code(), Some(2));
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn http_get(port: u16, path: &str) -> String {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).unwrap();
    stream.set_read_timeout(Some(Duration::from_secs(10))).unwrap();
    write!(
        stream,
        "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
    )
    .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    response
}

#[test]
fn serve_answers_http() {
    let (_dir, path) = golden_dir(false);
    let port = free_port();
    let mut child = bin()
        .args(["serve", s(&path), "--port", &port.to_string()])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let deadline = Instant::now() + Duration::from_secs(20);
    loop {
        let line = lines.next().expect("server exited").unwrap();
        if line.contains("listening on") {
            break;
        }
        assert!(Instant::now() < deadline, "server did not start");
    }

    let response = http_get(port, "/api/register");
    let _ = child.kill();
    let _ = child.wait();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    let body = &response[response.find("\r\n\r\n").unwrap() + 4..];
    let doc: serde_json::Value = serde_json::from_str(body).unwrap();
    assert_eq!(doc["entries"].as_array().unwrap().len(), 45);
}

#[test]
fn serve_port_in_use_exits_2() {
    let (_dir, path) = golden_dir(false);
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let out = riskreg(&["serve", s(&path), "--port", &port]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot bind"));
}

#[test]
fn serve_rejects_invalid_register() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(
        &path,
        "id,asset,category,owner,asset_value,threat,threat_likelihood,vulnerability,vulnerability_likelihood\n\
         1,Laptop,Software,CIO,9,Theft,1,Unlocked,3\n",
    )
    .unwrap();
    let out = riskreg(&["serve", s(&path), "--port", &free_port().to_string()]);
    assert_eq!(out.status.code(), Some(1));
}
