use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nptmark::io::{load_gray, save_gray};
use nptmark::sweep::CSV_HEADER;
use nptmark_core::synthetic::{logo_pattern, natural_scene};
use nptmark_core::Matrix;

fn nptmark(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nptmark"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn setup(n: usize) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    save_gray(&dir.path().join("host.pgm"), &natural_scene(n, 3)).unwrap();
    save_gray(&dir.path().join("logo.pgm"), &logo_pattern(16, 8, 3)).unwrap();
    dir
}

fn field<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {report}"))
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

const EMBED: &[&str] = &[
    "embed", "--host", "host.pgm", "--logo", "logo.pgm", "--alpha", "0.991", "--placement",
    "bottom", "--out", "wm.pfm", "--meta", "wm.meta", "--known-rows-out", "known.pgm",
];

#[test]
fn clean_round_trip_reports_unit_ncorr() {
    let dir = setup(64);
    let out = nptmark(dir.path(), EMBED);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = nptmark(
        dir.path(),
        &[
            "extract", "--watermarked", "wm.pfm", "--alpha", "0.991", "--mode", "nonblind",
            "--host", "host.pgm", "--meta", "wm.meta", "--logo", "logo.pgm", "--out-logo",
            "got.pgm",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report = stdout(&out);
    assert_eq!(field(&report, "ncorr"), "1.000000");
    assert_eq!(field(&report, "mode"), "nonblind");
    assert_eq!(field(&report, "region"), "62,0,2,64");
    let keys: Vec<&str> = report.lines().map(|l| l.split('=').next().unwrap()).collect();
    assert_eq!(
        keys,
        ["mode", "placement", "alpha", "logo_rows", "logo_cols", "region", "ncorr", "psnr_db", "solver_residual", "degenerate"]
    );
    let got = load_gray(&dir.path().join("got.pgm")).unwrap();
    let logo = load_gray(&dir.path().join("logo.pgm")).unwrap();
    assert_eq!(got.to_bytes(), logo.to_bytes());
}

#[test]
fn quasiblind_from_known_rows() {
    let dir = setup(64);
    assert!(nptmark(dir.path(), EMBED).status.success());
    let out = nptmark(
        dir.path(),
        &[
            "extract", "--watermarked", "wm.pfm", "--alpha", "0.991", "--mode", "quasiblind",
            "--known-rows", "known.pgm", "--meta", "wm.meta", "--logo", "logo.pgm",
            "--out-logo", "got.pgm", "--out-host", "host_back.pfm", "--report", "qb.txt",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report = fs::read_to_string(dir.path().join("qb.txt")).unwrap();
    assert_eq!(field(&report, "ncorr"), "1.000000");
    let host = load_gray(&dir.path().join("host.pgm")).unwrap().into_pixels();
    let back = load_gray(&dir.path().join("host_back.pfm")).unwrap().into_pixels();
    assert!(back.block(0, 0, 62, 64).max_abs_diff(&host.block(0, 0, 62, 64)) < 1e-5);
}

#[test]
fn geometry_flags_replace_the_sidecar() {
    let dir = setup(64);
    assert!(nptmark(dir.path(), EMBED).status.success());
    let out = nptmark(
        dir.path(),
        &[
            "extract", "--watermarked", "wm.pfm", "--alpha", "0.991", "--mode", "nonblind",
            "--host", "host.pgm", "--placement", "bottom", "--logo-dims", "16x8", "--logo",
            "logo.pgm", "--out-logo", "got.pgm",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(field(&stdout(&out), "ncorr"), "1.000000");

    let out = nptmark(
        dir.path(),
        &[
            "extract", "--watermarked", "wm.pfm", "--alpha", "0.991", "--mode", "nonblind",
            "--host", "host.pgm", "--out-logo", "other.pgm",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("other.pgm").exists());
}

#[test]
fn optimum_region_is_detected_without_a_sidecar() {
    let dir = setup(64);
    let out = nptmark(
        dir.path(),
        &[
            "embed", "--host", "host.pgm", "--logo", "logo.pgm", "--alpha", "0.95",
            "--placement", "optimum", "--out", "wm.pfm",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let out = nptmark(
        dir.path(),
        &[
            "extract", "--watermarked", "wm.pfm", "--alpha", "0.95", "--mode", "nonblind",
            "--host", "host.pgm", "--placement", "optimum", "--logo-dims", "16x8", "--logo",
            "logo.pgm", "--out-logo", "got.pgm",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(field(&stdout(&out), "ncorr"), "1.000000");
}

#[test]
fn missing_alpha_is_a_usage_error_and_writes_nothing() {
    let dir = setup(32);
    let before = listing(dir.path());
    let out = nptmark(
        dir.path(),
        &["embed", "--host", "host.pgm", "--logo", "logo.pgm", "--placement", "bottom", "--out", "wm.pgm", "--meta", "m"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(listing(dir.path()), before);
}

#[test]
fn usage_errors_exit_two_with_one_line() {
    let dir = setup(32);
    let cases: &[&[&str]] = &[
        &["embed", "--host", "host.pgm", "--logo", "logo.pgm", "--alpha", "0.4", "--placement", "bottom", "--out", "wm.pgm"],
        &["embed", "--host", "host.pgm", "--logo", "logo.pgm", "--alpha", "0.9", "--placement", "bottom", "--out", "wm.jpg"],
        &["embed", "--host", "nope.pgm", "--logo", "logo.pgm", "--alpha", "0.9", "--placement", "bottom", "--out", "wm.pgm"],
        &["embed", "--host", "logo.pgm", "--logo", "logo.pgm", "--alpha", "0.9", "--placement", "bottom", "--out", "wm.pgm"],
        &["extract", "--watermarked", "host.pgm", "--alpha", "0.9", "--mode", "nonblind", "--out-logo", "x.pgm"],
        &["attack", "--in", "host.pgm", "--kind", "noise", "--out", "x.pgm"],
        &["attack", "--in", "host.pgm", "--kind", "crop", "--rect", "1,2,3", "--out", "x.pgm"],
        &["attack", "--in", "host.pgm", "--kind", "crop", "--rect", "30,30,5,5", "--out", "x.pgm"],
        &["attack", "--in", "host.pgm", "--kind", "compress", "--quality", "0", "--out", "x.pgm"],
    ];
    let before = listing(dir.path());
    for args in cases {
        let out = nptmark(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        let err = stderr(&out);
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert_eq!(listing(dir.path()), before, "{args:?}");
    }
}

#[test]
fn wrong_host_is_rejected_by_digest() {
    let dir = setup(64);
    assert!(nptmark(dir.path(), EMBED).status.success());
    save_gray(&dir.path().join("other.pgm"), &natural_scene(64, 4)).unwrap();
    let out = nptmark(
        dir.path(),
        &[
            "extract", "--watermarked", "wm.pfm", "--alpha", "0.991", "--mode", "nonblind",
            "--host", "other.pgm", "--meta", "wm.meta", "--out-logo", "got.pgm",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not the host"));

    let out = nptmark(
        dir.path(),
        &[
            "extract", "--watermarked", "wm.pfm", "--alpha", "0.95", "--mode", "nonblind",
            "--host", "host.pgm", "--meta", "wm.meta", "--out-logo", "got.pgm",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("got.pgm").exists());
}

#[test]
fn heavy_crop_over_the_payload() {
    let dir = setup(64);
    assert!(nptmark(dir.path(), EMBED).status.success());
    let out = nptmark(
        dir.path(),
        &["attack", "--in", "wm.pfm", "--kind", "crop", "--rect", "0,0,40,64", "--out", "cropped.pfm"],
    );
    assert!(out.status.success(), "{}", stderr(&out));

    let out = nptmark(
        dir.path(),
        &[
            "extract", "--watermarked", "cropped.pfm", "--alpha", "0.991", "--mode", "nonblind",
            "--host", "host.pgm", "--meta", "wm.meta", "--logo", "logo.pgm", "--out-logo",
            "nb.pgm",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let nc: f64 = field(&stdout(&out), "ncorr").parse().unwrap();
    assert!(nc < 1.0, "{nc}");

    let out = nptmark(
        dir.path(),
        &[
            "extract", "--watermarked", "cropped.pfm", "--alpha", "0.991", "--mode",
            "quasiblind", "--known-rows", "known.pgm", "--meta", "wm.meta", "--out-logo",
            "qb.pgm", "--report", "qb.txt",
        ],
    );
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(!dir.path().join("qb.pgm").exists());
    assert!(!dir.path().join("qb.txt").exists());
}

#[test]
fn attacks_write_clamped_images() {
    let dir = setup(32);
    for (args, name) in [
        (vec!["--kind", "noise", "--sigma", "0.3", "--seed", "4"], "n.pgm"),
        (vec!["--kind", "crop", "--rect", "2,3,4,5", "--fill", "mean"], "c.pgm"),
        (vec!["--kind", "compress", "--quality", "20"], "q.pfm"),
    ] {
        let mut full = vec!["attack", "--in", "host.pgm", "--out", name];
        full.extend(args);
        let out = nptmark(dir.path(), &full);
        assert!(out.status.success(), "{}", stderr(&out));
        let img = load_gray(&dir.path().join(name)).unwrap().into_pixels();
        assert_eq!(img.shape(), (32, 32));
        assert!(img.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let dir = setup(32);
    fs::write(
        dir.path().join("cfg.toml"),
        "placements = [\"bottom\", \"topleft\"]\n\n[[attack]]\nkind = \"noise\"\nsigma = [0.0, 0.02]\nseed = [0, 1, 2]\n\n[[attack]]\nkind = \"compress\"\nquality = 80\n",
    )
    .unwrap();
    let out = nptmark(
        dir.path(),
        &["sweep", "--host", "host.pgm", "--logo", "logo.pgm", "--alpha", "0.95", "--config", "cfg.toml", "--out-csv", "out.csv"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    // Two placements, each with a baseline, six noise cells and one compression.
    assert_eq!(lines.len(), 1 + 2 * (1 + 6 + 1));
    assert!(lines[1].starts_with("bottom,none,,0,1,"), "{}", lines[1]);

    fs::write(dir.path().join("bad.toml"), "placements = [\"bottom\"]\nspeed = 3\n").unwrap();
    let out = nptmark(
        dir.path(),
        &["sweep", "--host", "host.pgm", "--logo", "logo.pgm", "--alpha", "0.95", "--config", "bad.toml", "--out-csv", "bad.csv"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("bad.csv").exists());
}

fn face_dataset(dir: &Path) {
    let mut split = String::new();
    for id in 0..4u64 {
        let sub = dir.join("faces").join(format!("person{id}"));
        fs::create_dir_all(&sub).unwrap();
        for k in 0..3u64 {
            let base = natural_scene(100, 70 + id);
            let img = nptmark_core::attacks::attack_noise(&base, 0.02, id * 10 + k).unwrap();
            save_gray(&sub.join(format!("img{k}.pgm")), &img).unwrap();
            split.push_str(&format!("person{id}/img{k}.pgm {}\n", if k == 0 { "train" } else { "test" }));
        }
    }
    fs::write(dir.join("faces").join("notes.txt"), "not an image").unwrap();
    fs::write(dir.join("split.txt"), split).unwrap();
}

#[test]
fn recognize_enroll_match_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    face_dataset(dir.path());
    let out = nptmark(
        dir.path(),
        &["recognize", "enroll", "--dir", "faces", "--corner-size", "6", "--gallery", "g"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let out = nptmark(
        dir.path(),
        &["recognize", "match", "--image", "faces/person2/img1.pgm", "--gallery", "g"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(field(&text, "label"), "person2");
    assert_eq!(field(&text, "distance"), "0.000000");

    let out = nptmark(
        dir.path(),
        &["recognize", "eval", "--dir", "faces", "--split", "split.txt", "--sizes", "2,8"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "corner_size,correct,total,accuracy\n2,8,8,1.000000\n8,8,8,1.000000\n"
    );

    let out = nptmark(
        dir.path(),
        &["recognize", "eval", "--dir", "faces", "--split", "split.txt", "--sizes", "8", "--npt-alpha", "0.991"],
    );
    assert!(out.status.success(), "{}", stderr(&out));

    fs::write(dir.path().join("orphan.txt"), "person0/img0.pgm train\nperson1/img1.pgm test\n").unwrap();
    let out = nptmark(
        dir.path(),
        &["recognize", "eval", "--dir", "faces", "--split", "orphan.txt", "--sizes", "4"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pgm_bytes_survive_the_attack_identity() {
    // Crop of an empty rectangle is the identity; PGM in, PGM out.
    let dir = tempfile::tempdir().unwrap();
    let img = Matrix::from_fn(5, 7, |i, j| ((i * 7 + j) * 7 % 256) as f64 / 255.0);
    save_gray(&dir.path().join("a.pgm"), &img).unwrap();
    let out = nptmark(
        dir.path(),
        &["attack", "--in", "a.pgm", "--kind", "crop", "--rect", "0,0,0,0", "--out", "b.pgm"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        fs::read(dir.path().join("a.pgm")).unwrap(),
        fs::read(dir.path().join("b.pgm")).unwrap()
    );
}
