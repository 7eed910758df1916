use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "\
# three cells, short run
cells = 3
users_per_cell = 4
antennas = 16
scheme = reuse1, reuse3
precoders = mrt, zf
drops = 3
blocks = 100
seed = 4
";

fn pcsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcsim"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("net.cfg"), config).unwrap();
    dir
}

#[test]
fn run_writes_csv() {
    let dir = setup(SMALL);
    let out = pcsim(dir.path(), &["run", "--config", "net.cfg", "--out", "res"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("res/results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "sweep_var,value,scheme,precoder,mean_rate_bps_hz,mean_sinr_db,ci95,drops,blocks"
    );
    // One value, two schemes, two precoders.
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("m,16,reuse1,mrt,"));
    assert!(lines[4].starts_with("m,16,reuse3,zf,"));
    assert!(lines[1].ends_with(",3,100"));
}

#[test]
fn seed_flag_changes_results() {
    let dir = setup(SMALL);
    let a = pcsim(dir.path(), &["run", "--config", "net.cfg", "--out", "a"]);
    let b = pcsim(dir.path(), &["run", "--config", "net.cfg", "--seed", "99", "--out", "b"]);
    assert!(a.status.success() && b.status.success());
    let read = |d: &str| std::fs::read(dir.path().join(d).join("results.csv")).unwrap();
    assert_ne!(read("a"), read("b"));
}

#[test]
fn sweep_emits_plots_per_family() {
    let dir = setup(&SMALL.replace("reuse1, reuse3", "reuse1, grouping"));
    let out = pcsim(
        dir.path(),
        &["sweep", "--config", "net.cfg", "--var", "m", "--values", "16,32", "--emit-plots", "--out", "res"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for family in ["reuse", "grouping"] {
        let svg = std::fs::read_to_string(dir.path().join(format!("res/plot_{family}.svg"))).unwrap();
        assert_eq!(svg.matches(r#"class="series""#).count(), 2, "{family}");
        assert_eq!(svg.matches(r#"class="legend""#).count(), 2, "{family}");
    }
    let csv = std::fs::read_to_string(dir.path().join("res/results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2);
}

#[test]
fn csv_is_identical_across_thread_counts() {
    let dir = setup(SMALL);
    let run = |threads: &str, out: &str| {
        let o = pcsim(
            dir.path(),
            &["--threads", threads, "sweep", "--config", "net.cfg", "--var", "tau", "--values", "0.5,1", "--out", out],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(dir.path().join(out).join("results.csv")).unwrap()
    };
    let one = run("1", "one");
    assert_eq!(one, run("3", "three"));
    assert_eq!(one, run("1", "again"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = setup("cells = 5\n");
    let out = pcsim(dir.path(), &["run", "--config", "net.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cells"));

    let dir = setup(SMALL);
    let out = pcsim(dir.path(), &["sweep", "--config", "net.cfg", "--var", "m", "--values", "32,16"]);
    assert_eq!(out.status.code(), Some(2));
    let out = pcsim(dir.path(), &["sweep", "--config", "net.cfg", "--var", "k", "--values", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = pcsim(dir.path(), &["sweep", "--config", "net.cfg", "--var", "reuse", "--values", "1,7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_three() {
    // No pilot power leaves every estimate at zero.
    let dir = setup(&format!("{SMALL}pilot_snr_db = -inf\n"));
    let out = pcsim(dir.path(), &["run", "--config", "net.cfg"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
