use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use amrc::codec::{CompressedVariable, Layout, Mode};
use amrc::synth::generators;
use amrc::{write_artifact, Artifact, Criterion, GridShape, ValueKind};
use tempfile::TempDir;

fn amrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amrc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: TempDir::new().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write_raw(&self, name: &str, kind: ValueKind, values: &[f64]) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, kind.encode_all(values)).unwrap();
        p
    }

    fn write_meta(&self, text: &str) -> PathBuf {
        let p = self.path("meta.txt");
        fs::write(&p, text).unwrap();
        p
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_raw(path: &Path, kind: ValueKind) -> Vec<f64> {
    kind.decode_all(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn constant_field_collapses_to_one_value() {
    let ws = Workspace::new();
    let input = ws.write_raw("c.raw", ValueKind::F32, &vec![3.5; 64 * 64]);
    let meta = ws.write_meta("dims=64,64\nvalue_kind=f32\n");
    let art = ws.path("c.amrc");
    let out = amrc(&[
        "compress", "--input", s(&input), "--meta", s(&meta), "--abs", "0.1", "--output", s(&art),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let line = stdout(&out);
    assert!(line.contains("leaves=1 "), "{line}");
    let ratio: f64 = line
        .split_whitespace()
        .find_map(|w| w.strip_prefix("ratio="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio > 200.0, "{line}");
    let info = stdout(&amrc(&["info", "--input", s(&art)]));
    assert!(info.contains("levels: {0:1}"), "{info}");
    assert!(info.contains("payload_bytes=4"), "{info}");
    let back = ws.path("c.out");
    assert!(amrc(&["decompress", "--input", s(&art), "--output", s(&back)]).status.success());
    assert_eq!(fs::read(&back).unwrap(), fs::read(&input).unwrap());
}

#[test]
fn zero_bound_on_noise_keeps_every_value() {
    let ws = Workspace::new();
    let shape = GridShape::new(&[32, 32]).unwrap();
    let data = generators().get("noise").unwrap().generate(&shape, 7);
    let input = ws.write_raw("n.raw", ValueKind::F64, &data);
    let meta = ws.write_meta("dims=32,32\nvalue_kind=f64\n");
    let art = ws.path("n.amrc");
    let out = amrc(&[
        "compress", "--input", s(&input), "--meta", s(&meta), "--abs", "0", "--output", s(&art),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(fs::metadata(&art).unwrap().len() >= fs::metadata(&input).unwrap().len());
    let back = ws.path("n.out");
    assert!(amrc(&["decompress", "--input", s(&art), "--output", s(&back)]).status.success());
    assert_eq!(fs::read(&back).unwrap(), fs::read(&input).unwrap());
}

#[test]
fn zero_bound_corner_is_bit_exact() {
    let ws = Workspace::new();
    let shape = GridShape::new(&[40, 48]).unwrap();
    let data = generators().get("smooth").unwrap().generate(&shape, 3);
    let input = ws.write_raw("s.raw", ValueKind::F64, &data);
    let meta = ws.write_meta("dims=40,48\nvalue_kind=f64\n");
    let art = ws.path("s.amrc");
    let out = amrc(&[
        "compress", "--input", s(&input), "--meta", s(&meta), "--abs", "5.0", "--domain", "0:8,0:8=0.0",
        "--output", s(&art),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(fs::metadata(&art).unwrap().len() < fs::metadata(&input).unwrap().len() / 4);
    let back = ws.path("s.out");
    assert!(amrc(&["decompress", "--input", s(&art), "--output", s(&back)]).status.success());
    let got = read_raw(&back, ValueKind::F64);
    for (i, (a, b)) in data.iter().zip(&got).enumerate() {
        let (r, c) = (i / 48, i % 48);
        if r < 8 && c < 8 {
            assert_eq!(a.to_bits(), b.to_bits(), "cell ({r},{c})");
        } else {
            assert!((a - b).abs() <= 5.0);
        }
    }
}

#[test]
fn lossless_round_trip_for_every_kind() {
    let shape = GridShape::new(&[9, 13]).unwrap();
    let smooth = generators().get("smooth").unwrap().generate(&shape, 11);
    for kind in ValueKind::ALL {
        let ws = Workspace::new();
        let data: Vec<f64> = smooth.iter().map(|v| kind.quantize(v * 37.0)).collect();
        let input = ws.write_raw("k.raw", kind, &data);
        let meta = ws.write_meta(&format!("dims=9,13\nvalue_kind={kind}\norder=row-major-last-fastest\n"));
        let art = ws.path("k.amrc");
        let out = amrc(&[
            "compress", "--input", s(&input), "--meta", s(&meta), "--abs", "0", "--output", s(&art),
        ]);
        assert!(out.status.success(), "{kind}: {}", stderr(&out));
        let back = ws.path("k.out");
        assert!(amrc(&["decompress", "--input", s(&art), "--output", s(&back)]).status.success());
        assert_eq!(fs::read(&back).unwrap(), fs::read(&input).unwrap(), "{kind}");
    }
}

#[test]
fn lossy_round_trip_respects_bounds() {
    let shape = GridShape::new(&[30, 20]).unwrap();
    let data = generators().get("smooth").unwrap().generate(&shape, 5);
    for (flag, bound) in [("--abs", 0.5), ("--rel", 0.01)] {
        let ws = Workspace::new();
        let input = ws.write_raw("l.raw", ValueKind::F64, &data);
        let meta = ws.write_meta("dims=30,20\nvalue_kind=f64\n");
        let art = ws.path("l.amrc");
        let b = bound.to_string();
        let out = amrc(&[
            "compress", "--input", s(&input), "--meta", s(&meta), flag, &b, "--output", s(&art),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let back = ws.path("l.out");
        assert!(amrc(&["decompress", "--input", s(&art), "--output", s(&back)]).status.success());
        let got = read_raw(&back, ValueKind::F64);
        for (a, b) in data.iter().zip(&got) {
            let err = if flag == "--abs" { (a - b).abs() } else { (a - b).abs() / a.abs() };
            assert!(err <= bound, "{flag} {a} {b}");
        }
    }
}

#[test]
fn packed_i16_round_trip() {
    let ws = Workspace::new();
    let shape = GridShape::new(&[16, 16]).unwrap();
    let phys = generators().get("smooth").unwrap().generate(&shape, 2);
    let packed: Vec<f64> = phys.iter().map(|v| ((v - 100.0) / 0.01).round()).collect();
    let input = ws.write_raw("p.raw", ValueKind::I16, &packed);
    let meta = ws.write_meta("dims=16,16\nvalue_kind=i16\nscale_factor=0.01\noffset=100\n");
    let art = ws.path("p.amrc");
    let out = amrc(&[
        "compress", "--input", s(&input), "--meta", s(&meta), "--abs", "0.5", "--output", s(&art),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let back = ws.path("p.out");
    assert!(amrc(&["decompress", "--input", s(&art), "--output", s(&back)]).status.success());
    let got = read_raw(&back, ValueKind::I16);
    for (a, b) in packed.iter().zip(&got) {
        assert!(((a - b) * 0.01).abs() <= 0.5 + 1e-12);
    }
    let info = stdout(&amrc(&["info", "--input", s(&art)]));
    assert!(info.contains("packing: scale_factor=0.01 offset=100"), "{info}");
}

#[test]
fn multi_variable_one_for_all() {
    let ws = Workspace::new();
    let shape = GridShape::new(&[16, 16]).unwrap();
    let a = generators().get("smooth").unwrap().generate(&shape, 1);
    let b = generators().get("smooth").unwrap().generate(&shape, 2);
    let ia = ws.write_raw("a.raw", ValueKind::F64, &a);
    let ib = ws.write_raw("b.raw", ValueKind::F64, &b);
    let meta = ws.write_meta("dims=16,16\nvalue_kind=f64\n");
    let art = ws.path("ab.amrc");
    let out = amrc(&[
        "compress", "--input", s(&ia), "--input", s(&ib), "--meta", s(&meta), "--abs", "1", "--mode",
        "one-for-all", "--output", s(&art),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let info = stdout(&amrc(&["info", "--input", s(&art)]));
    assert!(info.contains("mode: one-for-all"), "{info}");
    assert!(info.contains("variable 0:") && info.contains("variable 1:"), "{info}");
    let back = ws.path("ab.out");
    assert!(amrc(&["decompress", "--input", s(&art), "--output", s(&back)]).status.success());
    let got = read_raw(&back, ValueKind::F64);
    assert_eq!(got.len(), 512);
    for (x, y) in a.iter().chain(&b).zip(&got) {
        assert!((x - y).abs() <= 1.0);
    }
}

#[test]
fn split_axis_round_trip() {
    let ws = Workspace::new();
    let shape = GridShape::new(&[8, 8, 4]).unwrap();
    let data = generators().get("layered").unwrap().generate(&shape, 4);
    let input = ws.write_raw("z.raw", ValueKind::F64, &data);
    let meta = ws.write_meta("dims=8,8,4\nvalue_kind=f64\n");
    let art = ws.path("z.amrc");
    let out = amrc(&[
        "compress", "--input", s(&input), "--meta", s(&meta), "--abs", "1", "--split-axis", "2", "--output",
        s(&art),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let info = stdout(&amrc(&["info", "--input", s(&art)]));
    assert!(info.contains("original_dims: 8,8,4"), "{info}");
    let back = ws.path("z.out");
    assert!(amrc(&["decompress", "--input", s(&art), "--output", s(&back)]).status.success());
    for (x, y) in data.iter().zip(&read_raw(&back, ValueKind::F64)) {
        assert!((x - y).abs() <= 1.0);
    }
}

#[test]
fn usage_and_data_errors() {
    let ws = Workspace::new();
    let input = ws.write_raw("e.raw", ValueKind::F32, &[1.0; 15]);
    let meta = ws.write_meta("dims=4,4\nvalue_kind=f32\n");
    let art = ws.path("e.amrc");
    let base = ["compress", "--input", s(&input), "--meta", s(&meta), "--output", s(&art)];

    let size = amrc(&[&base[..], &["--abs", "1"]].concat());
    assert_eq!(size.status.code(), Some(3), "{}", stderr(&size));

    let both = amrc(&[&base[..], &["--abs", "1", "--rel", "0.1"]].concat());
    assert_eq!(both.status.code(), Some(2));
    let none = amrc(&base);
    assert_eq!(none.status.code(), Some(2));

    ws.write_raw("e.raw", ValueKind::F32, &[1.0; 16]);
    let bad_box = amrc(&[&base[..], &["--abs", "1", "--domain", "0:9,0:2=0"]].concat());
    assert_eq!(bad_box.status.code(), Some(2), "{}", stderr(&bad_box));
    let bad_syntax = amrc(&[&base[..], &["--abs", "1", "--domain", "0:2=zero"]].concat());
    assert_eq!(bad_syntax.status.code(), Some(2));
    let bad_mode = amrc(&[&base[..], &["--abs", "1", "--mode", "sideways"]].concat());
    assert_eq!(bad_mode.status.code(), Some(2));
    let rel_too_big = amrc(&[&base[..], &["--rel", "1.5"]].concat());
    assert_eq!(rel_too_big.status.code(), Some(2));

    ws.write_meta("dims=4,4\nvalue_kind=f32\nmissing_value=-9999\n");
    let missing = amrc(&[&base[..], &["--abs", "1"]].concat());
    assert_eq!(missing.status.code(), Some(2));

    let sweep = amrc(&["sweep", "--generator", "fractal"]);
    assert_eq!(sweep.status.code(), Some(2));
    assert!(stderr(&sweep).contains("smooth"));
}

#[test]
fn truncated_artifact_reports_offset() {
    let ws = Workspace::new();
    let shape = GridShape::new(&[16, 16]).unwrap();
    let data = generators().get("smooth").unwrap().generate(&shape, 9);
    let input = ws.write_raw("t.raw", ValueKind::F64, &data);
    let meta = ws.write_meta("dims=16,16\nvalue_kind=f64\n");
    let art = ws.path("t.amrc");
    assert!(amrc(&[
        "compress", "--input", s(&input), "--meta", s(&meta), "--abs", "0.2", "--output", s(&art),
    ])
    .status
    .success());
    let bytes = fs::read(&art).unwrap();
    let cut = bytes.len() - 5;
    fs::write(&art, &bytes[..cut]).unwrap();
    let out = amrc(&["decompress", "--input", s(&art), "--output", s(&ws.path("t.out"))]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("offset"), "{}", stderr(&out));

    fs::write(&art, b"NOPE").unwrap();
    let out = amrc(&["info", "--input", s(&art)]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn info_shows_ten_leaf_mesh() {
    let ws = Workspace::new();
    let artifact = Artifact {
        shape: GridShape::new(&[8, 8]).unwrap(),
        value_kind: ValueKind::F64,
        criterion: Criterion::absolute(1.0).unwrap(),
        layout: Layout::Single(Mode::OneForOne),
        packing: None,
        post_pass: 0,
        variables: vec![CompressedVariable {
            refinement: vec![0x01, 0x01, 0x08],
            payload: (0..10).map(f64::from).collect(),
        }],
    };
    let art = ws.path("f.amrc");
    fs::write(&art, write_artifact(&artifact).unwrap()).unwrap();
    let out = amrc(&["info", "--input", s(&art)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let info = stdout(&out);
    assert!(info.contains("leaves=10"), "{info}");
    assert!(info.contains("levels: {1:3, 2:3, 3:4}"), "{info}");
    assert!(info.contains("bitfield_bytes=3"), "{info}");
    assert!(info.contains("payload_bytes=80"), "{info}");
}

fn sweep_rows(args: &[&str]) -> Vec<Vec<f64>> {
    let out = amrc(&[&["sweep"], args].concat());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("error,bytes,ratio,max_observed_error"));
    lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn sweep_smooth_is_monotone_and_bounded() {
    let rows = sweep_rows(&["--generator", "smooth", "--dims", "48,40", "--errors", "0,0.05,0.5,2,10"]);
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!(r[3] <= r[0], "{r:?}");
    }
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1]));
    let rel = sweep_rows(&["--criterion", "rel", "--errors", "0.001,0.01,0.05"]);
    for r in &rel {
        assert!(r[3] <= r[0], "{r:?}");
    }
}

#[test]
fn sweep_noise_at_tiny_bound_keeps_the_data() {
    let rows = sweep_rows(&["--generator", "noise", "--dims", "32,32", "--errors", "1e-12"]);
    assert!(rows[0][1] >= 32.0 * 32.0 * 8.0);
}

#[test]
fn split_beats_full_3d_on_layers() {
    let args = ["--generator", "layered", "--dims", "16,16,8", "--errors", "1"];
    let full = sweep_rows(&args);
    let split = sweep_rows(&[&args[..], &["--split-axis", "2"]].concat());
    assert!(split[0][1] < full[0][1], "split {} full {}", split[0][1], full[0][1]);
    assert!(split[0][3] <= 1.0 && full[0][3] <= 1.0);
}
