use std::path::PathBuf;

use binlab_cli::report::without_wall_time;
use binlab_cli::{run_command, Outcome, EXIT_PASS, EXIT_USAGE, EXIT_VIOLATION};

fn run(args: &[&str]) -> Outcome {
    run_command(std::iter::once("binlab").chain(args.iter().copied()))
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("binlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn value_line<'a>(out: &'a Outcome, name: &str) -> &'a str {
    out.stdout
        .lines()
        .find(|l| l.starts_with(&format!("{name} = ")))
        .unwrap_or_else(|| panic!("no `{name}` in\n{}", out.stdout))
}

#[test]
fn lb_formula_for_four() {
    let out = run(&["lb-formula", "--k", "4"]);
    assert_eq!(out.code, EXIT_PASS);
    assert!(value_line(&out, "lb(4)").starts_with("lb(4) = 1.8781318"));
}

#[test]
fn k3_limit_value() {
    let out = run(&["k3-limit"]);
    assert_eq!(out.code, EXIT_PASS);
    assert_eq!(
        value_line(&out, "k3_limit"),
        "k3_limit = 1.9355858244424 (exact 77275651/39923650)"
    );
}

#[test]
fn rho_with_thirty_terms() {
    let out = run(&["rho", "--terms", "30"]);
    assert_eq!(out.code, EXIT_PASS);
    assert!(value_line(&out, "rho").contains("0.464025193"));
    assert!(value_line(&out, "ratio_bound").contains("3.155055400"));
}

#[test]
fn pi_five_terms_is_exact() {
    let out = run(&["pi", "--terms", "5"]);
    assert!(value_line(&out, "partial_sum").ends_with("(exact 509/301)"));
}

#[test]
fn pack_reports_bins_and_checks() {
    let f = scratch(
        "plain.txt",
        "instance plain\nitem 1/2 count=3\nitem 1/3 count=2 # pair\nitem 1/5\n",
    );
    for alg in ["ff", "ffd", "exact"] {
        let out = run(&["pack", f.to_str().unwrap(), "--algorithm", alg]);
        assert_eq!(out.code, EXIT_PASS, "{alg}: {}", out.stderr);
        assert_eq!(value_line(&out, "bins"), "bins = 3");
    }
}

#[test]
fn parse_errors_exit_two_with_line_number() {
    let f = scratch("bad.txt", "instance plain\n\nitem 5/4\n");
    let out = run(&["pack", f.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("size exceeds 1 at line 3"), "{}", out.stderr);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["pack"]).code, EXIT_USAGE);
    assert_eq!(run(&["no-such-command"]).code, EXIT_USAGE);
    assert_eq!(run(&["verify-weights", "--trials", "5"]).code, EXIT_USAGE);
    assert_eq!(run(&["suite"]).code, EXIT_USAGE);
    assert_eq!(run(&["lb-formula", "--k", "3"]).code, EXIT_USAGE);
    assert_eq!(run(&["--help"]).code, EXIT_PASS);
}

#[test]
fn gen_lb_emit_then_verify() {
    let dir = std::env::temp_dir().join(format!("binlab-gen-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let inst = dir.join("k3.txt");
    let out = run(&[
        "gen-lb",
        "--k",
        "3",
        "--N",
        "90",
        "--M",
        "1",
        "--families",
        "2,3",
        "--emit",
        inst.to_str().unwrap(),
    ]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stdout);
    assert!(value_line(&out, "ratio").ends_with("(exact 29/18)"));
    let cert = dir.join("k3.txt.cert");
    let verify = run(&[
        "verify-lb",
        inst.to_str().unwrap(),
        "--certificate",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(verify.code, EXIT_PASS, "{}", verify.stdout);
    assert_eq!(value_line(&verify, "sum_cluster_opt"), "sum_cluster_opt = 145");
    let price = run(&["price", inst.to_str().unwrap(), "--certificate", cert.to_str().unwrap()]);
    assert_eq!(price.code, EXIT_PASS);
    assert_eq!(value_line(&price, "global_opt"), "global_opt = 90");
}

#[test]
fn tampered_certificate_is_a_violation() {
    let dir = std::env::temp_dir().join(format!("binlab-tamper-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let inst = dir.join("k3.txt");
    run(&["gen-lb", "--N", "90", "--no-verify", "--emit", inst.to_str().unwrap()]);
    let cert = dir.join("k3.txt.cert");
    let text = std::fs::read_to_string(&cert).unwrap();
    let line = text.lines().find(|l| l.starts_with("predicted ")).unwrap().to_string();
    let (head, cost) = line.rsplit_once(' ').unwrap();
    let bumped = format!("{head} {}", cost.parse::<u64>().unwrap() + 1);
    std::fs::write(&cert, text.replacen(&line, &bumped, 1)).unwrap();
    let out = run(&[
        "verify-lb",
        inst.to_str().unwrap(),
        "--certificate",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(out.code, EXIT_VIOLATION, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.contains("FAIL cluster optima match predictions"));
}

#[test]
fn clustered_instance_below_k_is_a_violation() {
    let f = scratch(
        "small.txt",
        "instance clustered k=2\nitem 1/2 cluster=a\nitem 1/2 cluster=b count=3\n",
    );
    let out = run(&["price", f.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_VIOLATION, "{}", out.stdout);
    assert!(out.stdout.contains("below k: a"));
}

#[test]
fn timed_commands_agree() {
    let f = scratch(
        "timed.txt",
        "instance timed\nitem 3/10 count=2 arrive=0/1 delay=linear:1\nitem 1/2 arrive=1/4 delay=linear:2\n",
    );
    let path = f.to_str().unwrap();
    let sim = run(&["simulate", path]);
    assert_eq!(sim.code, EXIT_PASS, "{}", sim.stderr);
    let oracle = run(&["oracle", path]);
    assert_eq!(oracle.code, EXIT_PASS);
    let check = run(&["check-bound", path]);
    assert_eq!(check.code, EXIT_PASS);
    assert!(check.stdout.contains("(exact)"));
    assert_eq!(value_line(&sim, "online_cost"), value_line(&check, "online_cost"));
    assert_eq!(value_line(&oracle, "offline_cost"), value_line(&check, "offline_cost"));
}

#[test]
fn bounded_delay_needs_horizon() {
    let f = scratch("bounded.txt", "instance timed\nitem 1/2 arrive=0 delay=table:1:1/10\n");
    let path = f.to_str().unwrap();
    assert_eq!(run(&["simulate", path]).code, EXIT_USAGE);
    let out = run(&["simulate", path, "--horizon", "5"]);
    assert_eq!(out.code, EXIT_PASS);
    assert!(out.stdout.contains("(horizon flush)"));
}

#[test]
fn oracle_limit_is_enforced() {
    let body: String = std::iter::once("instance timed\n".to_string())
        .chain((0..5).map(|i| format!("item 1/10 arrive={i} delay=linear:1\n")))
        .collect();
    let f = scratch("many.txt", &body);
    assert_eq!(run(&["oracle", f.to_str().unwrap(), "--limit", "4"]).code, EXIT_USAGE);
    assert_eq!(run(&["oracle", f.to_str().unwrap(), "--limit", "5"]).code, EXIT_PASS);
}

#[test]
fn seeded_reports_are_deterministic() {
    let args = [
        "verify-weights",
        "--trials",
        "300",
        "--seed",
        "11",
        "--exhaustive-grid",
        "--grid-den",
        "24",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.code, EXIT_PASS, "{}", a.stdout);
    assert_eq!(without_wall_time(&a.stdout), without_wall_time(&b.stdout));
    assert!(a.stdout.contains("seed: 11"));
    let c = run(&[
        "verify-weights",
        "--trials",
        "300",
        "--seed",
        "12",
        "--exhaustive-grid",
        "--grid-den",
        "24",
    ]);
    assert_ne!(without_wall_time(&a.stdout), without_wall_time(&c.stdout));
}

#[test]
fn tsv_carries_exact_and_decimal_columns() {
    let out = run(&["--format", "tsv", "k3-limit"]);
    assert!(out
        .stdout
        .lines()
        .any(|l| l == "value\tk3_limit\t77275651/39923650\t1.9355858244424"));
    let out = run(&["lb-formula", "--k", "5", "--format=tsv"]);
    let row: Vec<&str> = out
        .stdout
        .lines()
        .find(|l| l.starts_with("value\t"))
        .unwrap()
        .split('\t')
        .collect();
    assert_eq!(row.len(), 4);
    assert!(row[2].contains('/'));
    assert!(out.stdout.lines().last().unwrap().starts_with("wall_time\t"));
}

#[test]
fn quick_suite_subset() {
    let out = run(&["suite", "--seed", "3", "--quick", "--only", "1,3,7"]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stdout);
    assert_eq!(out.stdout.lines().filter(|l| l.starts_with("PASS [")).count(), 3);
}
