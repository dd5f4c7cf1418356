use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fmrl_cli::output::OUTPUT_ROOT_ENV;

const MINIMAL: &str = r#"
name = "minimal"
geometry = "euclidean"
set = "ball"
radius = 1.0
variants = ["fal"]
meta = "ftl"
within = "omd"
guess = "doubling"
epsilon = 0.1
gamma = 2.0
source = "quadratic"
d = 3
tasks = 2
m = 1
seeds = [7]
center_norm = 0.3
task_spread = 0.1
sample_spread = 0.3
scale = 0.5
"#;

/// `base` with the given keys replaced (or added when absent) and `drop`
/// keys removed.
fn config(base: &str, set: &[(&str, &str)], drop: &[&str]) -> String {
    let key = |line: &str| line.split('=').next().unwrap_or("").trim().to_string();
    let mut out: Vec<String> = base
        .lines()
        .filter(|l| {
            let k = key(l);
            !drop.contains(&k.as_str()) && !set.iter().any(|(s, _)| *s == k)
        })
        .map(str::to_string)
        .collect();
    for (k, v) in set {
        out.push(format!("{k} = {v}"));
    }
    out.join("\n") + "\n"
}

struct Sandbox {
    dir: tempfile::TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Sandbox {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn root(&self) -> PathBuf {
        self.dir.path().join("runs")
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path
    }

    fn fmrl(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_fmrl"))
            .args(args)
            .env(OUTPUT_ROOT_ENV, self.root())
            .current_dir(self.dir.path())
            .output()
            .unwrap()
    }

    fn run_ok(&self, command: &str, cfg: &Path) -> PathBuf {
        let out = self.fmrl(&[command, cfg.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{command} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out
            .stdout
            .split(|b| *b == b'\n')
            .filter_map(|l| std::str::from_utf8(l).ok()?.strip_prefix("wrote ").map(PathBuf::from))
            .next()
            .expect("output directory reported")
    }
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn minimal_config_writes_one_ledger_row_per_task() {
    let sb = Sandbox::new();
    let dir = sb.run_ok("run", &sb.write("min.toml", MINIMAL));
    assert_eq!(dir, sb.root().join("minimal"));
    let rows = csv_rows(&dir.join("ledger.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "1");
    assert_eq!(rows[1][0], "2");
    assert!(dir.join("timing.json").exists());
}

#[test]
fn tar_is_the_mean_of_the_regret_column() {
    let sb = Sandbox::new();
    let cfg = config(MINIMAL, &[("tasks", "25"), ("m", "5")], &[]);
    let dir = sb.run_ok("run", &sb.write("c.toml", &cfg));
    let header = std::fs::read_to_string(dir.join("ledger.csv")).unwrap();
    let col = header.lines().next().unwrap().split(',').position(|h| h == "regret").unwrap();
    let rows = csv_rows(&dir.join("ledger.csv"));
    assert_eq!(rows.len(), 25);
    let mean = rows.iter().map(|r| r[col].parse::<f64>().unwrap()).sum::<f64>() / rows.len() as f64;
    let tar = summary(&dir)["cells"][0]["tar"].as_f64().unwrap();
    assert!((tar - mean).abs() <= 1e-12, "{tar} vs {mean}");
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = config(MINIMAL, &[("tasks", "10"), ("m_sweep", "[1, 3]"), ("seeds", "[1, 2, 3]")], &["m"]);
    let a = Sandbox::new();
    let b = Sandbox::new();
    let da = a.run_ok("run", &a.write("c.toml", &cfg));
    let db = b.run_ok("run", &b.write("c.toml", &cfg));
    for file in ["summary.json", "tar_vs_m.csv"] {
        assert_eq!(
            std::fs::read(da.join(file)).unwrap(),
            std::fs::read(db.join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn sweep_writes_the_tar_table() {
    let sb = Sandbox::new();
    let cfg = config(
        MINIMAL,
        &[
            ("variants", r#"["fal", "fli-batch", "strawman"]"#),
            ("tasks", "6"),
            ("m_sweep", "[1, 2, 4]"),
            ("seeds", "[1, 2]"),
        ],
        &["m"],
    );
    let dir = sb.run_ok("run", &sb.write("c.toml", &cfg));
    let text = std::fs::read_to_string(dir.join("tar_vs_m.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "variant,m,seed,TAR");
    let rows = csv_rows(&dir.join("tar_vs_m.csv"));
    assert_eq!(rows.len(), 3 * 3 * 2);
    for r in &rows {
        let ledger = dir.join("cells").join(format!("{}_m{}_s{}", r[0], r[1], r[2])).join("ledger.csv");
        assert_eq!(csv_rows(&ledger).len(), 6);
    }
}

#[test]
fn compare_of_identical_summaries_has_zero_deltas() {
    let sb = Sandbox::new();
    let cfg = config(MINIMAL, &[("tasks", "5"), ("m_sweep", "[1, 2]"), ("seeds", "[1, 2]")], &["m"]);
    let a = sb.run_ok("run", &sb.write("a.toml", &cfg));
    let b = sb.run_ok("run", &sb.write("b.toml", &config(&cfg, &[("name", r#""again""#)], &[])));
    let out = sb.fmrl(&[
        "compare",
        a.join("summary.json").to_str().unwrap(),
        b.join("summary.json").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(out.stderr.is_empty(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let (aligned, deltas) = text.split_once("\n\n").unwrap();
    assert_eq!(aligned.lines().count(), 1 + 4);
    let deltas: Vec<&str> = deltas.lines().collect();
    assert_eq!(deltas[0], "m,again/fal:median_delta_tar");
    assert_eq!(deltas.len(), 3);
    for line in &deltas[1..] {
        let d: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(d, 0.0);
    }
}

#[test]
fn compare_needs_two_summaries_and_warns_on_partial_grids() {
    let sb = Sandbox::new();
    let a = sb.run_ok(
        "run",
        &sb.write("a.toml", &config(MINIMAL, &[("m_sweep", "[1, 2]")], &["m"])),
    );
    let b = sb.run_ok(
        "run",
        &sb.write("b.toml", &config(MINIMAL, &[("name", r#""b""#), ("m_sweep", "[2, 4]")], &["m"])),
    );
    let sa = a.join("summary.json");
    let sb_path = b.join("summary.json");

    let single = sb.fmrl(&["compare", sa.to_str().unwrap()]);
    assert_eq!(exit_code(&single), 1);
    assert_eq!(String::from_utf8_lossy(&single.stderr).trim().lines().count(), 1);

    let partial = sb.fmrl(&["compare", sa.to_str().unwrap(), sb_path.to_str().unwrap()]);
    assert_eq!(exit_code(&partial), 0);
    let warn = String::from_utf8_lossy(&partial.stderr);
    assert!(warn.contains("warning"), "{warn}");
    let text = String::from_utf8(partial.stdout).unwrap();
    let aligned = text.split_once("\n\n").unwrap().0;
    assert_eq!(aligned.lines().count(), 2, "only m = 2 is shared");
}

#[test]
fn invalid_configs_exit_one_with_a_single_line() {
    let cases = [
        config(MINIMAL, &[("colour", r#""blue""#)], &[]),
        config(MINIMAL, &[], &["epsilon"]),
        config(MINIMAL, &[("gamma", "1.0")], &[]),
        config(MINIMAL, &[("variants", r#"["fast"]"#)], &[]),
        config(MINIMAL, &[("geometry", r#""entropic""#)], &[]),
        config(MINIMAL, &[("meta", r#""aogd""#), ("geometry", r#""entropic""#), ("set", r#""simplex""#), ("simplex_floor", "0.0")], &[]),
        config(MINIMAL, &[("seeds", "[]")], &[]),
        config(MINIMAL, &[("m_sweep", "[1]")], &[]),
        config(MINIMAL, &[("guess", r#""tuned""#)], &[]),
        "name = \n".to_string(),
    ];
    let sb = Sandbox::new();
    for (i, text) in cases.iter().enumerate() {
        let path = sb.write(&format!("bad{i}.toml"), text);
        let out = sb.fmrl(&["run", path.to_str().unwrap()]);
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert_eq!(exit_code(&out), 1, "case {i}: {stderr}");
        assert_eq!(stderr.trim_end().lines().count(), 1, "case {i}: {stderr}");
        assert!(!sb.root().exists(), "case {i} wrote output");
    }
    let missing = sb.fmrl(&["run", "does-not-exist.toml"]);
    assert_eq!(exit_code(&missing), 1);
    assert_eq!(exit_code(&sb.fmrl(&["frobnicate"])), 1);
    assert_eq!(exit_code(&sb.fmrl(&["--help"])), 0);
}

#[test]
fn commands_reject_sources_they_cannot_run() {
    let sb = Sandbox::new();
    let path = sb.write("c.toml", MINIMAL);
    for command in ["adversary", "qg"] {
        let out = sb.fmrl(&[command, path.to_str().unwrap()]);
        assert_eq!(exit_code(&out), 1, "{command}");
    }
}

#[test]
fn qg_writes_alpha_table() {
    let sb = Sandbox::new();
    let cfg = config(
        MINIMAL,
        &[
            ("name", r#""qg""#),
            ("source", r#""clustered_logistic""#),
            ("d", "4"),
            ("classes", "2"),
            ("cluster_radius", "0.1"),
            ("feature_scale", "1.0"),
            ("seeds", "[1, 2]"),
            ("qg_estimator", r#""relaxed""#),
            ("qg_deltas", "[0.1, 0.3]"),
            ("qg_m", "[4, 8]"),
        ],
        &["tasks", "m", "task_spread", "sample_spread", "scale"],
    );
    let dir = sb.run_ok("qg", &sb.write("qg.toml", &cfg));
    let text = std::fs::read_to_string(dir.join("alpha_vs_m.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "m,seed,delta,eps,alpha,fw_gap");
    let rows = csv_rows(&dir.join("alpha_vs_m.csv"));
    assert_eq!(rows.len(), 2 * 2 * 2);
    for r in &rows {
        let eps: f64 = r[3].parse().unwrap();
        assert!(eps >= 0.0);
    }
    let s = summary(&dir);
    assert_eq!(s["command"], "qg");
    assert_eq!(s["points"].as_array().unwrap().len(), 2);
}

#[test]
fn adversary_forces_the_lower_bound() {
    let sb = Sandbox::new();
    let cfg = config(
        MINIMAL,
        &[
            ("name", r#""adv""#),
            ("variants", r#"["single-task", "fal"]"#),
            ("source", r#""adversary""#),
            ("tasks", "5"),
            ("m", "9"),
            ("diameter", "1.0"),
            ("lipschitz", "1.0"),
        ],
        &["task_spread", "sample_spread", "scale", "center_norm"],
    );
    let dir = sb.run_ok("adversary", &sb.write("adv.toml", &cfg));
    let s = summary(&dir);
    let cells = s["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 2);
    for c in cells {
        let tar = c["tar"].as_f64().unwrap();
        let bound = c["lower_bound"].as_f64().unwrap();
        assert!((bound - 0.25 * 3.0).abs() < 1e-12);
        assert!(tar >= bound - 1e-9, "{tar} < {bound}");
        let id = format!("{}_m9_s7", c["variant"].as_str().unwrap());
        assert_eq!(csv_rows(&dir.join("cells").join(id).join("ledger.csv")).len(), 5);
    }
}

#[test]
fn csv_paths_resolve_next_to_the_config() {
    let sb = Sandbox::new();
    sb.write(
        "data.csv",
        "task_id,label,f1,f2\na,0,1.0,2.0\nb,1,0.5,0.5\na,1,-1.0,0.0\nb,0,0.0,1.0\na,0,2.0,2.0\nb,1,1.0,1.0\n",
    );
    let cfg = config(
        MINIMAL,
        &[
            ("name", r#""csv""#),
            ("source", r#""csv""#),
            ("csv_path", r#""data.csv""#),
            ("d", "2"),
            ("radius", "2.0"),
        ],
        &["tasks", "m", "task_spread", "sample_spread", "scale", "center_norm"],
    );
    let dir = sb.run_ok("run", &sb.write("csv.toml", &cfg));
    let rows = csv_rows(&dir.join("ledger.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[1] == "3"));
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let registry = fmrl_core::registry::Registry::builtin();
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let stem = path.file_stem().unwrap().to_str().unwrap();
        let command = match stem {
            "adversary" => fmrl_cli::Command::Adversary,
            "qg" => fmrl_cli::Command::Qg,
            _ => fmrl_cli::Command::Run,
        };
        if let Err(e) = fmrl_cli::load_plan(&path, command, &registry) {
            panic!("{}: {e}", path.display());
        }
        seen += 1;
    }
    assert!(seen >= 5);
}
