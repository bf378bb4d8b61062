//! End-to-end tests of the `falsetheta` binary.

use std::process::{Command, Output};

use falsetheta::cli::output::OutputRecord;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_falsetheta"));
    for v in ["FALSETHETA_ORDER", "FALSETHETA_EXP_DENOM", "FALSETHETA_N_MAX"] {
        c.env_remove(v);
    }
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn identity_json_round_trips_byte_identically() {
    let o = run(&["verify", "1.2", "--order", "60", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let line = text.trim_end();
    let recs: Vec<OutputRecord> = serde_json::from_str(line).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].subject, "1.2");
    assert!(recs[0].equal);
    assert_eq!(serde_json::to_string(&recs).unwrap(), line);
}

#[test]
fn mismatch_record_is_exact_and_round_trips() {
    let o = run(&["verify", "1.5", "--order", "40", "--format", "json", "--inject-fault", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let line = text.trim_end();
    let recs: Vec<OutputRecord> = serde_json::from_str(line).unwrap();
    let m = recs[0].first_mismatch.as_ref().expect("mismatch reported");
    assert_ne!(m.lhs, m.rhs);
    assert_eq!(serde_json::to_string(&recs).unwrap(), line);
    assert!(all_integers(&serde_json::from_str(line).unwrap()), "numbers must be integers: {line}");
}

fn all_integers(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Number(n) => n.to_string().chars().all(|c| c == '-' || c.is_ascii_digit()),
        serde_json::Value::Array(a) => a.iter().all(all_integers),
        serde_json::Value::Object(o) => o.values().all(all_integers),
        _ => true,
    }
}

#[test]
fn excluded_steps_exit_two() {
    for s in ["3.10", "3.11"] {
        let o = run(&["verify", s]);
        assert_eq!(o.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&o.stderr).contains("formal divergence"));
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["verify", "4.1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "1.1", "--exp-denom", "9"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "2.1", "--param", "zz=q"]).status.code(), Some(2));
    assert_eq!(run(&["expand", "phi", "--upper", "q", "--lower", "q"]).status.code(), Some(2));
}

#[test]
fn environment_defaults_and_flag_precedence() {
    let o = bin().args(["verify", "1.1", "--format", "json"]).env("FALSETHETA_ORDER", "33").output().unwrap();
    assert!(stdout(&o).contains("\"order\":33"));
    let o = bin()
        .args(["verify", "1.1", "--format", "json", "--order", "21"])
        .env("FALSETHETA_ORDER", "33")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("\"order\":21"));
    let o = run(&["verify", "1.1", "--format", "json"]);
    assert!(stdout(&o).contains("\"order\":100"));
}

#[test]
fn list_shows_everything() {
    let o = run(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("3.13  Eq. (3.13)  closed-form 3φ2"));
    assert!(text.contains("3.10  Eq. (3.10)  EXCLUDED (formal divergence)"));
    assert!(text.contains("3.11  Eq. (3.11)  EXCLUDED (formal divergence)"));
    let count = |p: &str| text.lines().filter(|l| l.starts_with(p)).count();
    assert_eq!((count("1."), count("2."), count("3.")), (5, 6, 28));
}

#[test]
fn expand_formats() {
    let o = run(&["expand", "false-theta", "--s", "2", "--order", "12", "--format", "csv"]);
    assert_eq!(stdout(&o), "exp_num,exp_den,coef_num,coef_den\n0,1,1,1\n2,1,-1,1\n6,1,1,1\n12,1,-1,1\n");
    let o = run(&["expand", "poch-inf", "--a", "q", "--order", "7"]);
    assert_eq!(stdout(&o).trim(), "1 - 1*q^1 - 1*q^2 + 1*q^5 + 1*q^7");
    // (-q; q^2)_inf = 1 + q + q^3 + q^4 + q^5 + ... (partitions into distinct odd parts)
    let o = run(&["expand", "poch-inf", "--a", "-q", "--base", "q^2", "--order", "6"]);
    assert_eq!(stdout(&o).trim(), "1 + 1*q^1 + 1*q^3 + 1*q^4 + 1*q^5 + 1*q^6");
    let o = run(&[
        "expand", "phi", "--upper", "q^-2,q,0", "--lower", "-q^2,-q^3", "--base", "q^2", "--arg", "q^2",
        "--order", "10", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("[{\"exp_num\":1,\"exp_den\":1,\"coef_num\":1,\"coef_den\":1}"));
    let o = run(&["expand", "lhs", "--id", "1.3", "--order", "9", "--exp-denom", "1"]);
    assert_eq!(stdout(&o).trim(), "1 - 1*q^3 + 1*q^9");
}

#[test]
fn single_transform_with_params() {
    let o = run(&[
        "verify", "2.1", "--param", "a=q", "--param", "b=q", "--param", "c=q^3", "--param", "z=q^2",
        "--order", "40",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["verify", "2.6", "--param", "alpha=1", "--param", "a=q", "--param", "b=q", "--param", "beta=q",
        "--param", "c=q", "--param", "d=q", "--order", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_all_and_its_mutation() {
    let o = run(&["verify", "all", "--order", "24", "--n-max", "6", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let recs: Vec<OutputRecord> = serde_json::from_str(stdout(&o).trim_end()).unwrap();
    let subjects: Vec<&str> = recs.iter().map(|r| r.subject.as_str()).collect();
    assert_eq!(recs.len(), 5 + 6 + 26);
    assert!(!subjects.contains(&"3.10") && !subjects.contains(&"3.11"));
    assert!(recs.iter().all(|r| r.equal));
    for target in ["1.4", "2.3", "3.21"] {
        let o = run(&["verify", "all", "--order", "24", "--n-max", "6", "--inject-fault", target]);
        assert_eq!(o.status.code(), Some(1), "fault in {target} must be detected");
        let text = stdout(&o);
        let bad: Vec<&str> = text.lines().filter(|l| l.contains("MISMATCH")).collect();
        assert_eq!(bad.len(), 1);
        assert!(bad[0].starts_with(target));
    }
}
