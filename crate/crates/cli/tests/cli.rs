use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use inharmo::audio::{write_wav, AudioClip, WavEncoding};
use inharmo::synthlab::{add_noise, render, ToneSpec};
use inharmo_cli::table::{FeatureTable, Variant};

fn inharmo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inharmo")).args(args).env_remove("INHARM_CACHE_DIR").output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn clip(i: usize) -> AudioClip<f64> {
    let spec = ToneSpec::harmonic(110.0 * (1.0 + 0.25 * i as f64), 6 + i % 4, 0.7).with_duration(1.5);
    add_noise(&render::<f64>(&spec).unwrap(), 10.0 + 5.0 * (i % 4) as f64, i as u64).unwrap()
}

struct Corpus {
    dir: tempfile::TempDir,
    manifest: PathBuf,
}

impl Corpus {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

/// Writes `n` Float32 WAVs and a CSV manifest; `extra` rows are appended verbatim.
fn corpus(n: usize, extra: &[&str]) -> Corpus {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("track_id,path,dataset,year,artist,title,group_id\n");
    for i in 0..n {
        let name = format!("t{i}.wav");
        write_wav(dir.path().join(&name), &clip(i), WavEncoding::Float32).unwrap();
        text.push_str(&format!("t{i},{name},synthetic,{},a{},title {i},g{i}\n", 1970 + 10 * (i % 3), i % 2));
    }
    for row in extra {
        text.push_str(row);
        text.push('\n');
    }
    let manifest = dir.path().join("manifest.csv");
    fs::write(&manifest, text).unwrap();
    Corpus { dir, manifest }
}

fn extract(c: &Corpus, out: &str, extra: &[&str]) -> Output {
    let out = c.path(out);
    let mut args = vec!["extract", "--manifest", s(&c.manifest), "--out", s(&out)];
    args.extend_from_slice(extra);
    inharmo(&args)
}

#[test]
fn rerun_hits_the_cache_and_reproduces_the_table() {
    let c = corpus(4, &[]);
    let cache = c.path("cache");
    let first = extract(&c, "a.csv", &["--cache-dir", s(&cache)]);
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(stderr(&first).contains("4 computed, 0 from cache"), "{}", stderr(&first));
    let second = extract(&c, "b.csv", &["--cache-dir", s(&cache)]);
    assert!(stderr(&second).contains("0 computed, 4 from cache"), "{}", stderr(&second));
    assert_eq!(fs::read(c.path("a.csv")).unwrap(), fs::read(c.path("b.csv")).unwrap());
}

#[test]
fn cache_dir_can_come_from_the_environment() {
    let c = corpus(2, &[]);
    let cache = c.path("envcache");
    for _ in 0..2 {
        let o = Command::new(env!("CARGO_BIN_EXE_inharmo"))
            .args(["extract", "--manifest", s(&c.manifest), "--out", s(&c.path("t.csv"))])
            .env("INHARM_CACHE_DIR", &cache)
            .output()
            .unwrap();
        assert!(o.status.success());
    }
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 2);
}

#[test]
fn gain_change_misses_the_cache_with_equal_features() {
    let c = corpus(1, &["half,half.wav,synthetic,1970,a0,title half,gh"]);
    write_wav(c.path("half.wav"), &clip(0).scaled(0.5), WavEncoding::Float32).unwrap();
    let cache = c.path("cache");
    let o = extract(&c, "f.csv", &["--cache-dir", s(&cache)]);
    assert!(stderr(&o).contains("2 computed"), "{}", stderr(&o));
    let t = FeatureTable::read(&c.path("f.csv")).unwrap();
    for v in Variant::ALL {
        let a = t.rows[0].features(v).unwrap();
        let b = t.rows[1].features(v).unwrap();
        assert!((a.hr_inharmonicity - b.hr_inharmonicity).abs() < 1e-9);
        assert!((a.noisiness - b.noisiness).abs() < 1e-9);
    }
}

#[test]
fn unreadable_track_is_reported_and_skipped() {
    let c = corpus(3, &["gone,missing.wav,synthetic,1990,a1,gone,gx"]);
    let o = extract(&c, "f.csv", &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let t = FeatureTable::read(&c.path("f.csv")).unwrap();
    assert_eq!(t.rows.iter().map(|r| r.meta.track_id.as_str()).collect::<Vec<_>>(), ["t0", "t1", "t2"]);
    let errors = fs::read_to_string(c.path("errors.csv")).unwrap();
    assert!(errors.lines().skip(1).all(|l| l.starts_with("gone,")), "{errors}");
    assert_eq!(errors.lines().count(), 2);
}

#[test]
fn bad_manifest_is_fatal() {
    let c = corpus(2, &["t0,t1.wav,synthetic,1980,a0,dup,g9"]);
    let o = extract(&c, "f.csv", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("t0"), "{}", stderr(&o));
    assert!(!c.path("f.csv").exists());
}

#[test]
fn variant_flags_select_columns() {
    let c = corpus(2, &[]);
    extract(&c, "w.csv", &["--weighted"]);
    let header = fs::read_to_string(c.path("w.csv")).unwrap().lines().next().unwrap().to_string();
    assert!(header.contains("noisiness_weighted") && !header.contains("_raw"), "{header}");
    assert_eq!(inharmo(&["extract", "--manifest", s(&c.manifest), "--out", "x.csv", "--raw", "--weighted"]).status.code(), Some(1));
}

#[test]
fn projection_fit_and_apply_agree() {
    let c = corpus(6, &[]);
    extract(&c, "f.csv", &[]);
    let proj = c.path("proj.json");
    let fit = inharmo(&["project", "--input", s(&c.path("f.csv")), "--out", s(&c.path("p1.csv")), "--projection", s(&proj), "--fit"]);
    assert!(fit.status.success(), "{}", stderr(&fit));
    let apply = inharmo(&["project", "--input", s(&c.path("f.csv")), "--out", s(&c.path("p2.csv")), "--projection", s(&proj)]);
    assert!(apply.status.success(), "{}", stderr(&apply));
    let p1 = fs::read(c.path("p1.csv")).unwrap();
    assert_eq!(p1, fs::read(c.path("p2.csv")).unwrap());
    let t = FeatureTable::read(&c.path("p1.csv")).unwrap();
    assert!(t.rows.iter().all(|r| r.pcs(Variant::Raw).is_some() && r.pcs(Variant::Weighted).is_some()));
}

#[test]
fn projection_edge_cases() {
    let c = corpus(4, &[]);
    extract(&c, "f.csv", &[]);
    let missing =
        inharmo(&["project", "--input", s(&c.path("f.csv")), "--out", s(&c.path("p.csv")), "--projection", s(&c.path("none.json"))]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("--fit"));

    let proj = c.path("proj.json");
    inharmo(&["project", "--input", s(&c.path("f.csv")), "--out", s(&c.path("p.csv")), "--projection", s(&proj), "--fit"]);
    let header = fs::read_to_string(c.path("f.csv")).unwrap().lines().next().unwrap().to_string();
    fs::write(c.path("empty.csv"), format!("{header}\n")).unwrap();
    let empty = inharmo(&["project", "--input", s(&c.path("empty.csv")), "--out", s(&c.path("pe.csv")), "--projection", s(&proj)]);
    assert_eq!(empty.status.code(), Some(0), "{}", stderr(&empty));
    assert_eq!(FeatureTable::read(&c.path("pe.csv")).unwrap().rows.len(), 0);
}

#[test]
fn report_writes_grouped_outputs_and_notices() {
    let c = corpus(6, &[]);
    extract(&c, "f.csv", &[]);
    let proj = c.path("proj.json");
    inharmo(&["project", "--input", s(&c.path("f.csv")), "--out", s(&c.path("p.csv")), "--projection", s(&proj), "--fit"]);
    let out = c.path("report");
    let o = inharmo(&["report", "--input", s(&c.path("p.csv")), "--out", s(&out), "--group-by", "artist"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("fewer than 10 tracks"), "{}", stderr(&o));
    for f in ["group_stats.csv", "percentiles.csv", "centroids_raw.csv", "contours_weighted.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(!out.join("conditional_median_raw.csv").exists());
    assert!(stderr(&o).contains("6 tracks for 20 bins"), "{}", stderr(&o));
    let stats = fs::read_to_string(out.join("group_stats.csv")).unwrap();
    assert!(stats.lines().any(|l| l.starts_with("a0,3,noisiness_raw,")), "{stats}");
    assert!(stats.lines().any(|l| l.starts_with("a1,3,pc1_weighted,")), "{stats}");

    let unprojected = inharmo(&["report", "--input", s(&c.path("f.csv")), "--out", s(&c.path("r2")), "--group-by", "year"]);
    assert!(unprojected.status.success());
    assert!(stderr(&unprojected).contains("notice"), "{}", stderr(&unprojected));
}

#[test]
fn compare_pairs_by_group() {
    let c = corpus(3, &[]);
    extract(&c, "a.csv", &[]);
    let same = inharmo(&["compare", "--a", s(&c.path("a.csv")), "--b", s(&c.path("a.csv")), "--out", s(&c.path("d.csv"))]);
    assert!(same.status.success());
    let summary = String::from_utf8(same.stdout).unwrap();
    assert!(summary.lines().skip(1).all(|l| l.ends_with(",3,0.00000000e0")), "{summary}");

    let table = fs::read_to_string(c.path("a.csv")).unwrap();
    let trimmed: Vec<&str> = table.lines().take(3).collect();
    fs::write(c.path("b.csv"), trimmed.join("\n") + "\n").unwrap();
    let partial = inharmo(&["compare", "--a", s(&c.path("a.csv")), "--b", s(&c.path("b.csv")), "--out", s(&c.path("d.csv"))]);
    assert_eq!(partial.status.code(), Some(2));
    assert!(stderr(&partial).contains("g2"), "{}", stderr(&partial));
}

#[test]
fn synth_is_seeded() {
    let run = |seed: &str| inharmo(&["synth", "--seed", seed, "inharmonic-partials", "--trials", "3"]).stdout;
    let a = run("3");
    assert!(!a.is_empty());
    assert_eq!(a, run("3"));
    assert_ne!(a, run("4"));
}

#[test]
fn synth_render_writes_a_wav() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tone.wav");
    let o = inharmo(&["synth", "render", "--f0", "330", "--duration", "0.5", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let clip: AudioClip<f64> = inharmo::audio::load_audio(&out).unwrap();
    assert_eq!(clip.frames(), 11025);
    assert_eq!(inharmo(&["synth", "render"]).status.code(), Some(1));
}

#[test]
fn weights_lists_the_contour() {
    let o = inharmo(&["weights"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "frequency,gain_db,linear_gain");
    assert_eq!(lines.len(), 30);
    assert!(lines.iter().any(|l| l.starts_with("1.00000000e3,0.00000000e0,1.00000000e0")), "{text}");
}
