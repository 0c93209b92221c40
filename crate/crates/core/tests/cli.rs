use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn hiaer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hiaer")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = hiaer(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> (i32, String) {
    let out = hiaer(args);
    let stderr = String::from_utf8(out.stderr).unwrap();
    (out.status.code().unwrap(), stderr)
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_str().unwrap().to_string()
    }

    fn compile_demo(&self, name: &str, extra: &[&str]) -> String {
        let out = self.path(name);
        let net = data("demo_network.json");
        let mut args = vec!["compile", "--net", net.to_str().unwrap(), "--out", &out];
        args.extend_from_slice(extra);
        ok(&args);
        out
    }
}

fn demo_args<'a>(net: &'a str, spikes: &'a str) -> [&'a str; 4] {
    ["--net", net, "--spikes", spikes]
}

#[test]
fn demo_compile_run_simulate_diff() {
    let fx = Fixture::new();
    let img = fx.compile_demo("demo.img", &[]);
    let spikes = data("demo_spikes.txt");
    let spikes = spikes.to_str().unwrap();
    let net = data("demo_network.json");
    let net = net.to_str().unwrap();

    let run = ok(&["run", "--img", &img, "--spikes", spikes, "--steps", "3", "--membranes"]);
    assert_eq!(run, "1 a\n1 b\n# membrane a 0\n# membrane b 1\n# membrane c 0\n# membrane d 1\n");

    let mut args = vec!["simulate"];
    args.extend(demo_args(net, spikes));
    args.extend(["--steps", "3", "--membranes"]);
    assert_eq!(ok(&args), run);

    let diff = ok(&["diff", "--net", net, "--img", &img, "--spikes", spikes, "--steps", "3"]);
    assert_eq!(diff, "no divergence over 3 steps\n");
}

#[test]
fn multi_core_container_runs_identically() {
    let fx = Fixture::new();
    let cfg = data("config.toml");
    let cfg = cfg.to_str().unwrap();
    let single = fx.compile_demo("one.img", &[]);
    let split = fx.compile_demo("two.img", &["--cores", "2", "--config", cfg]);
    let spikes = data("demo_spikes.txt");
    let spikes = spikes.to_str().unwrap();
    let a = ok(&["run", "--img", &single, "--spikes", spikes, "--steps", "20", "--membranes"]);
    let b = ok(&["run", "--img", &split, "--spikes", spikes, "--steps", "20", "--membranes", "--config", cfg]);
    assert_eq!(a, b);
    let stats = ok(&["stats", "--img", &split]);
    assert!(stats.contains("cores = 2\n"), "{stats}");
}

#[test]
fn counters_report_is_commented_and_written() {
    let fx = Fixture::new();
    let img = fx.compile_demo("demo.img", &[]);
    let report = fx.path("report.toml");
    let cfg = data("config.toml");
    let spikes = data("demo_spikes.txt");
    let out = ok(&[
        "run", "--img", &img, "--spikes", spikes.to_str().unwrap(), "--steps", "3", "--counters", "--report", &report,
        "--config", cfg.to_str().unwrap(),
    ]);
    assert!(out.starts_with("1 a\n1 b\n# [network]\n"), "{out}");
    assert!(out.lines().skip(2).all(|l| l.starts_with('#')));
    let written = std::fs::read_to_string(&report).unwrap();
    // 21 accesses at the configured 50 pJ
    assert!(written.contains("total = 21\n"), "{written}");
    assert!(written.contains("energy_pj = 1050\n"), "{written}");
}

#[test]
fn inspect_shows_placeholder_segment() {
    let fx = Fixture::new();
    let img = fx.compile_demo("demo.img", &[]);
    let out = ok(&["inspect-memory", "--img", &img, "--neuron", "b"]);
    assert!(out.contains("flags=valid,placeholder"), "{out}");
    let entries: Vec<&str> = out.lines().filter(|l| l.trim_start().starts_with("row ")).collect();
    assert_eq!(entries.len(), 16);
    assert!(entries.iter().all(|l| l.contains("weight=0 ")));
    // b is an output, so the first entry carries the flag
    assert!(entries[0].contains(" output "));

    let axon = ok(&["inspect-memory", "--img", &img, "--axon", "alpha"]);
    assert!(axon.contains("weight=3") && axon.contains("-> a"), "{axon}");
}

#[test]
fn zero_steps_gives_empty_raster() {
    let fx = Fixture::new();
    let img = fx.compile_demo("demo.img", &[]);
    let spikes = data("demo_spikes.txt");
    assert_eq!(ok(&["run", "--img", &img, "--spikes", spikes.to_str().unwrap(), "--steps", "0"]), "");
}

#[test]
fn synapse_rewrite_changes_behaviour() {
    let fx = Fixture::new();
    let img = fx.compile_demo("demo.img", &[]);
    let edited = fx.path("edited.img");
    assert_eq!(ok(&["synapse", "--img", &img, "--pre", "alpha", "--post", "a"]), "weight = 3\n");
    ok(&["synapse", "--img", &img, "--pre", "alpha", "--post", "a", "--set", "-5", "--out", &edited]);
    assert_eq!(ok(&["synapse", "--img", &edited, "--pre", "alpha", "--post", "a"]), "weight = -5\n");

    let net = data("demo_network.json");
    let spikes = data("demo_spikes.txt");
    let out = hiaer(&[
        "diff", "--net", net.to_str().unwrap(), "--img", &edited, "--spikes", spikes.to_str().unwrap(), "--steps", "3",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("divergence at step 0"));
}

#[test]
fn exit_codes() {
    let fx = Fixture::new();
    let img = fx.compile_demo("demo.img", &[]);
    let net = data("demo_network.json");
    let net = net.to_str().unwrap();

    let (c, err) = code(&["run", "--img", &fx.path("missing.img"), "--steps", "1"]);
    assert_eq!(c, 1);
    assert!(err.starts_with("error[io]: ") && err.lines().count() == 1, "{err}");

    std::fs::write(fx.path("junk.img"), b"not an image").unwrap();
    assert_eq!(code(&["stats", "--img", &fx.path("junk.img")]).0, 1);

    assert_eq!(code(&["run", "--img", &img, "--steps", "many"]).0, 2);
    assert_eq!(code(&["frobnicate"]).0, 2);
    std::fs::write(fx.path("bad.toml"), "[cost]\nenergy_per_row_access_pj = 1.0\nwatts = 3\n").unwrap();
    assert_eq!(code(&["run", "--img", &img, "--steps", "1", "--config", &fx.path("bad.toml")]).0, 2);

    std::fs::write(fx.path("dangling.json"), r#"{"models":[],"axons":{"x":[["nope",1]]},"neurons":{},"outputs":[]}"#)
        .unwrap();
    let (c, err) = code(&["compile", "--net", &fx.path("dangling.json"), "--out", &fx.path("x.img")]);
    assert_eq!(c, 3, "{err}");
    std::fs::write(fx.path("spikes.txt"), "0 gamma\n").unwrap();
    assert_eq!(code(&["run", "--img", &img, "--spikes", &fx.path("spikes.txt"), "--steps", "1"]).0, 3);
    std::fs::write(fx.path("spikes.txt"), "zero alpha\n").unwrap();
    assert_eq!(code(&["run", "--img", &img, "--spikes", &fx.path("spikes.txt"), "--steps", "1"]).0, 3);
    assert_eq!(code(&["synapse", "--img", &img, "--pre", "alpha", "--post", "b"]).0, 3);

    assert_eq!(code(&["compile", "--net", net, "--out", &fx.path("x.img"), "--capacity", "1"]).0, 4);
    assert_eq!(code(&["compile", "--net", net, "--out", &fx.path("x.img"), "--geometry", "rows=4"]).0, 4);

    assert_eq!(code(&["--help"]).0, 0);
}

#[test]
fn assignment_file_places_neurons() {
    let fx = Fixture::new();
    let assignment = fx.path("assign.txt");
    std::fs::write(&assignment, "# key core\na 1\nb 0\nc 1\nd 0\n").unwrap();
    let img = fx.compile_demo("placed.img", &["--cores", "2", "--assignment", &assignment]);
    let out = ok(&["inspect-memory", "--img", &img, "--neuron", "a"]);
    assert!(out.starts_with("core = 1\n"), "{out}");

    std::fs::write(&assignment, "a 0\n").unwrap();
    let net = data("demo_network.json");
    let (c, _) = code(&[
        "compile", "--net", net.to_str().unwrap(), "--out", &fx.path("x.img"), "--cores", "2", "--assignment", &assignment,
    ]);
    assert_eq!(c, 2);
}

#[test]
fn footprint_and_generate() {
    let out = ok(&["footprint"]);
    assert!(out.contains("neurons = 4000000\n") && out.contains("fits = "), "{out}");

    let fx = Fixture::new();
    let net = fx.path("g.json");
    let spikes = fx.path("g.txt");
    ok(&["generate", "--seed", "4", "--out", &net, "--spikes", &spikes, "--steps", "30"]);
    let img = fx.path("g.img");
    ok(&["compile", "--net", &net, "--out", &img, "--cores", "3"]);
    ok(&["diff", "--net", &net, "--img", &img, "--spikes", &spikes, "--steps", "30", "--seed", "9"]);
}
