use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn birank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_birank"))
        .args(args)
        .env("BIRANK_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_pgm(path: &Path, w: usize, h: usize, maxval: u16) {
    let mut bytes = format!("P5\n{w} {h}\n{maxval}\n").into_bytes();
    for i in 0..h {
        for j in 0..w {
            let v = ((i * 37 + j * 11) % (maxval as usize + 1)) as u16;
            if maxval < 256 {
                bytes.push(v as u8);
            } else {
                bytes.extend_from_slice(&v.to_be_bytes());
            }
        }
    }
    fs::write(path, bytes).unwrap();
}

#[test]
fn build_latin_writes_all_grids() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fam");
    let o = birank(&["build-latin", "--out", p(&out), "--latex"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let wavelets = (1..=4).filter(|k| out.join(format!("psi_{k}.csv")).exists()).count();
    let details = ["psi_a_1", "psi_a_2", "psi_b_1", "psi_b_2"]
        .iter()
        .filter(|n| out.join(format!("{n}.csv")).exists())
        .count();
    assert_eq!((wavelets, details), (4, 4));
    assert!(out.join("family.json").exists());
    let tex = fs::read_to_string(out.join("family.tex")).unwrap();
    assert!(tex.contains("\\psi_4 &= \\frac{\\sqrt{10}}{10}"), "{tex}");
}

#[test]
fn build_haar_rejects_small_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let o = birank(&["build-haar", "--alpha", "1", "--beta", "3", "--out", p(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("alpha must be ≥ 2"), "{}", stderr(&o));
}

#[test]
fn build_haar_two_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = birank(&["--json", "build-haar", "--alpha", "2", "--beta", "3", "--out", p(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_out(&o);
    assert_eq!(v["schema"], 1);
    assert!(v["family"]["orthogonality_deviation"].as_f64().unwrap() <= 1e-12);
    assert!(dir.path().join("psi_2.csv").exists());
    assert!(!dir.path().join("psi_3.csv").exists());
}

#[test]
fn verify_latin_detects_tampering() {
    let o = birank(&["verify-latin"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&birank(&["build-latin", "--out", p(dir.path())])), 0);
    assert_eq!(code(&birank(&["verify-latin", "--family", p(dir.path())])), 0);
    let psi = dir.path().join("psi_2.csv");
    let text = fs::read_to_string(&psi).unwrap();
    fs::write(&psi, text.replacen("0", "0.01", 1)).unwrap();
    let o = birank(&["verify-latin", "--family", p(dir.path())]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("orthogonality"), "{}", stderr(&o));
}

#[test]
fn transform_inverse_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (maxval, alpha, beta, w, h) in [(255u16, "3", "3", 27, 27), (65535, "2", "3", 27, 8)] {
        let img = dir.path().join(format!("in{maxval}.pgm"));
        let bands = dir.path().join(format!("bands{maxval}"));
        let back = dir.path().join(format!("out{maxval}.pgm"));
        write_pgm(&img, w, h, maxval);
        let o = birank(&[
            "transform", "--input", p(&img), "--out", p(&bands), "--depth", "3", "--alpha", alpha, "--beta", beta,
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(bands.join("manifest.json").exists());
        let o = birank(&["inverse", "--input", p(&bands), "--out", p(&back)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert_eq!(fs::read(&img).unwrap(), fs::read(&back).unwrap());
    }
}

#[test]
fn transform_rejects_indivisible_shape() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("odd.pgm");
    write_pgm(&img, 10, 9, 255);
    let o = birank(&["transform", "--input", p(&img), "--out", p(&dir.path().join("b")), "--depth", "2"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("divisible by 9"), "{}", stderr(&o));
}

#[test]
fn threshold_reports_retained_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("in.pgm");
    let bands = dir.path().join("bands");
    write_pgm(&img, 27, 27, 255);
    assert_eq!(code(&birank(&["transform", "--input", p(&img), "--out", p(&bands)])), 0);
    let o = birank(&[
        "--json", "inverse", "--input", p(&bands), "--out", p(&dir.path().join("t.pgm")), "--threshold", "1e9",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_out(&o);
    assert_eq!(v["threshold"]["retained"], 0);
    assert_eq!(v["threshold"]["retained_fraction"], 0.0);
    assert_eq!(v["threshold"]["detail_total"], 27 * 27 - 1);
}

#[test]
fn plot_ramp_and_constants() {
    let dir = tempfile::tempdir().unwrap();
    let ramp = dir.path().join("ramp.csv");
    let row: Vec<String> = (0..256).map(|k| format!("{}", k as f64 / 255.0)).collect();
    fs::write(&ramp, row.join(",") + "\n").unwrap();
    let out = dir.path().join("ramp.pgm");
    assert_eq!(code(&birank(&["plot", "--input", p(&ramp), "--out", p(&out), "--bits", "8"])), 0);
    let bytes = fs::read(&out).unwrap();
    let header = b"P5\n256 1\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(&bytes[header.len()..], (0..=255u8).collect::<Vec<_>>().as_slice());

    let zero = dir.path().join("zero.csv");
    fs::write(&zero, "0,0\n0,0\n").unwrap();
    let out = dir.path().join("zero.pgm");
    assert_eq!(code(&birank(&["plot", "--input", p(&zero), "--out", p(&out), "--bits", "8"])), 0);
    assert!(fs::read(&out).unwrap().ends_with(&[0, 0, 0, 0]));

    let flat = dir.path().join("flat.csv");
    fs::write(&flat, "3,3\n3,3\n").unwrap();
    let out = dir.path().join("flat.pgm");
    assert_eq!(code(&birank(&["plot", "--input", p(&flat), "--out", p(&out), "--bits", "8"])), 0);
    assert!(fs::read(&out).unwrap().ends_with(&[128, 128, 128, 128]));
}

#[test]
fn verify_meyer_reports_residuals() {
    let o = birank(&["--json", "verify-meyer", "--a", "1.58e-3", "--d", "1.58e-3", "--grid", "192"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_out(&o);
    assert_eq!(v["schema"], 1);
    assert!(v["report"]["commuting_lattice_residual"].as_f64().unwrap() <= 1e-9);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn broken_profile_fails_verification_and_synthesis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    // (g) fails: b and a exchanged
    fs::write(
        &cfg,
        r#"{"mode":"explicit","a":0.02216,"b":0.0015831,"c":0.0001131,"d":0.0015831,"grid_n":96}"#,
    )
    .unwrap();
    let o = birank(&["verify-meyer", "--config", p(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("corner_product_residual"), "{}", stderr(&o));
    let o = birank(&["synthesize-wavelet", "--config", p(&cfg), "--out", p(&dir.path().join("w"))]);
    assert_eq!(code(&o), 1);

    let o = birank(&["verify-meyer", "--a", "0.01", "--d", "0.01", "--grid", "96"]);
    assert_eq!(code(&o), 2);
    let o = birank(&["verify-meyer", "--grid", "30"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn meyer_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let prof = dir.path().join("profile");
    let o = birank(&["build-meyer", "--mode", "triangular", "--grid", "96", "--out", p(&prof)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["profile.csv", "profile.pgm", "regions.pgm", "quotient_a.csv", "manifest.json"] {
        assert!(prof.join(f).exists(), "{f}");
    }
    let wav = dir.path().join("wavelet");
    let o = birank(&["--json", "synthesize-wavelet", "--grid", "96", "--samples", "9", "--out", p(&wav)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_out(&o);
    assert!((v["norm"].as_f64().unwrap() - 1.0).abs() < 1e-2);
    assert!(wav.join("psi_re.csv").exists() && wav.join("psi_hat_abs.pgm").exists());
}

#[test]
fn fuzzing_is_deterministic() {
    let a = birank(&["--json", "fuzz-intertwining", "--seed", "9", "--trials", "400"]);
    let b = birank(&["--json", "fuzz-intertwining", "--seed", "9", "--trials", "400"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json_out(&a)["fuzz"]["trials"], 400);
}
