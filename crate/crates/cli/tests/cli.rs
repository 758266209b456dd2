//! End-to-end command tests: exit codes, report shapes, and output
//! determinism, driving the same entry points as the binary.

use clap::Parser;
use hetsim_cli::{run, Cli};
use std::path::{Path, PathBuf};

struct Files {
    dir: tempfile::TempDir,
}

impl Files {
    fn new() -> Files {
        Files {
            dir: tempfile::tempdir().expect("temp dir"),
        }
    }

    fn put(&self, name: &str, content: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, content).expect("write fixture");
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn exec(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["hetsim"];
    argv.extend_from_slice(args);
    let cli = Cli::try_parse_from(&argv).expect("argument parse");
    let mut out = Vec::new();
    let status = run(&cli, &mut out);
    (status, String::from_utf8(out).expect("utf8 output"))
}

fn s(p: &Path) -> String {
    p.to_str().expect("utf8 path").to_string()
}

const SELFLOOP: &str = "functor PLTS labels=a\nstates s0\ns0: a->s0\n";
const SELFLOOP_T: &str = "functor PLTS labels=a\nstates t0\nt0: a->t0\n";
const DEADLOCK_T: &str = "functor PLTS labels=a\nstates t0\nt0:\n";
const DIA_KANT: &str = "(kant ((dia a) (dia a)))\n";

#[test]
fn gsim_identity_on_identical_selfloops_is_similar() {
    let f = Files::new();
    let left = f.put("l.chc", SELFLOOP);
    let right = f.put("r.chc", SELFLOOP_T);
    let conn = f.put("c.txt", "(id)\n");
    let (status, out) = exec(&[
        "gsim",
        "--left",
        &s(&left),
        "--right",
        &s(&right),
        "--connector",
        &s(&conn),
        "--pair",
        "s0",
        "t0",
    ]);
    assert_eq!(status, 0, "output:\n{out}");
    assert!(out.contains("verdict: similar"), "output:\n{out}");
}

#[test]
fn gsim_deadlock_pair_fails_with_counterexample_block() {
    let f = Files::new();
    let left = f.put("l.chc", SELFLOOP);
    let right = f.put("r.chc", DEADLOCK_T);
    let conn = f.put("c.txt", DIA_KANT);
    let (status, out) = exec(&[
        "gsim",
        "--left",
        &s(&left),
        "--right",
        &s(&right),
        "--connector",
        &s(&conn),
        "--pair",
        "s0",
        "t0",
    ]);
    assert_eq!(status, 1, "output:\n{out}");
    assert!(out.contains("verdict: dissimilar"), "output:\n{out}");
    assert!(out.contains("counterexample:"), "output:\n{out}");
    assert!(out.contains("  pair: s0 t0"), "output:\n{out}");
    assert!(out.contains("  round: "), "output:\n{out}");
    assert!(
        out.contains("  clause: (kant ((dia a) (dia a)))"),
        "output:\n{out}"
    );
}

#[test]
fn gsim_missing_file_is_a_usage_error() {
    let f = Files::new();
    let right = f.put("r.chc", SELFLOOP_T);
    let conn = f.put("c.txt", "(id)\n");
    let (status, out) = exec(&[
        "gsim",
        "--left",
        &s(&f.path("absent.chc")),
        "--right",
        &s(&right),
        "--connector",
        &s(&conn),
    ]);
    assert_eq!(status, 2, "output:\n{out}");
    assert!(out.starts_with("error:"), "output:\n{out}");
}

#[test]
fn gsim_writes_sorted_relation_to_out_file() {
    let f = Files::new();
    let left = f.put(
        "l.chc",
        "functor PLTS labels=a\nstates s1 s0\ns1: a->s1\ns0: a->s0\n",
    );
    let right = f.put("r.chc", SELFLOOP_T);
    let conn = f.put("c.txt", "(id)\n");
    let outfile = f.path("sim.tsv");
    let (status, out) = exec(&[
        "gsim",
        "--left",
        &s(&left),
        "--right",
        &s(&right),
        "--connector",
        &s(&conn),
        "--out",
        &s(&outfile),
    ]);
    assert_eq!(status, 0, "output:\n{out}");
    assert!(out.contains("pairs: 2"), "output:\n{out}");
    let written = std::fs::read_to_string(&outfile).expect("out file");
    assert_eq!(written, "s0\tt0\ns1\tt0\n");
}

#[test]
fn gsim_weak_connector_saturates_the_right_system() {
    let f = Files::new();
    let left = f.put(
        "l.chc",
        "functor PLTS labels=a,tau\nstates s0\ns0: a->s0\n",
    );
    let right = f.put(
        "r.chc",
        "functor PLTS labels=a,tau\nstates t0 t1\nt0: tau->t1\nt1: a->t0\n",
    );
    let conn = f.put("c.txt", "(weak tau)\n");
    let (status, out) = exec(&[
        "gsim",
        "--left",
        &s(&left),
        "--right",
        &s(&right),
        "--connector",
        &s(&conn),
        "--pair",
        "s0",
        "t0",
    ]);
    assert_eq!(status, 0, "output:\n{out}");
    assert!(out.contains("verdict: similar"), "output:\n{out}");
}

#[test]
fn gsim_tiny_middle_cap_is_intractable() {
    let f = Files::new();
    let left = f.put(
        "l.chc",
        "functor PLTS labels=a,b\nstates s0 s1\ns0: a->s1 b->s0\ns1: a->s0\n",
    );
    let right = f.put(
        "r.chc",
        "functor PLTS labels=a,b\nstates t0 t1\nt0: a->t1 b->t0\nt1: a->t0\n",
    );
    let conn = f.put(
        "c.txt",
        "(comp (kr (rel (a a) (b b))) (kr (rel (a a) (b b))))\n",
    );
    let (status, out) = exec(&[
        "gsim",
        "--left",
        &s(&left),
        "--right",
        &s(&right),
        "--connector",
        &s(&conn),
        "--middle-cap",
        "1",
    ]);
    assert_eq!(status, 3, "output:\n{out}");
    assert!(out.contains("error:"), "output:\n{out}");
}

#[test]
fn distinguish_prints_a_formula_for_a_dissimilar_pair() {
    let f = Files::new();
    let left = f.put("l.chc", SELFLOOP);
    let right = f.put("r.chc", DEADLOCK_T);
    let conn = f.put("c.txt", DIA_KANT);
    let (status, out) = exec(&[
        "distinguish",
        "--left",
        &s(&left),
        "--right",
        &s(&right),
        "--connector-lambda",
        &s(&conn),
        "--pair",
        "s0",
        "t0",
    ]);
    assert_eq!(status, 1, "output:\n{out}");
    assert_eq!(out, "<dia(a),dia(a)>T\n");
}

#[test]
fn distinguish_reports_similar_pairs() {
    let f = Files::new();
    let left = f.put("l.chc", SELFLOOP);
    let right = f.put("r.chc", SELFLOOP_T);
    let conn = f.put("c.txt", DIA_KANT);
    let (status, out) = exec(&[
        "distinguish",
        "--left",
        &s(&left),
        "--right",
        &s(&right),
        "--connector-lambda",
        &s(&conn),
        "--pair",
        "s0",
        "t0",
    ]);
    assert_eq!(status, 0, "output:\n{out}");
    assert_eq!(out, "similar\n");
}

#[test]
fn distinguish_rejects_non_kantorovich_connectors() {
    let f = Files::new();
    let left = f.put("l.chc", SELFLOOP);
    let right = f.put("r.chc", SELFLOOP_T);
    let conn = f.put("c.txt", "(id)\n");
    let (status, out) = exec(&[
        "distinguish",
        "--left",
        &s(&left),
        "--right",
        &s(&right),
        "--connector-lambda",
        &s(&conn),
        "--pair",
        "s0",
        "t0",
    ]);
    assert_eq!(status, 2, "output:\n{out}");
    assert!(out.contains("Kantorovich"), "output:\n{out}");
}

const VENDING_SPEC: &str = "functor SUSP in=coin out=coffee,delta\nstates p0 p1\np0: coin->p1 delta->p0\np1: coffee->p0\n";

#[test]
fn ioco_accepts_a_conforming_implementation() {
    let f = Files::new();
    let spec = f.put("spec.chc", VENDING_SPEC);
    let imp = f.put(
        "imp.chc",
        "functor SUSPIE in=coin out=coffee,delta\nstates q0 q1\nq0: coin->q1 delta->q0\nq1: coin->q1 coffee->q0\n",
    );
    let (status, out) = exec(&["ioco", "--impl", &s(&imp), "--spec", &s(&spec)]);
    assert_eq!(status, 0, "output:\n{out}");
    assert!(out.starts_with("verdict: conforms\n"), "output:\n{out}");
    assert!(out.contains("p0\tq0"), "output:\n{out}");
}

#[test]
fn ioco_flags_an_unspecified_output() {
    let f = Files::new();
    let spec = f.put("spec.chc", VENDING_SPEC);
    // The implementation may pour coffee before any coin arrives.
    let imp = f.put(
        "imp.chc",
        "functor SUSPIE in=coin out=coffee,delta\nstates q0\nq0: coin->q0 coffee->q0 delta->q0\n",
    );
    let (status, out) = exec(&["ioco", "--impl", &s(&imp), "--spec", &s(&spec)]);
    assert_eq!(status, 1, "output:\n{out}");
    assert!(out.starts_with("verdict: fails\n"), "output:\n{out}");
    assert!(out.contains("  pair: p0 q0"), "output:\n{out}");
}

#[test]
fn ioco_compat_rejects_specs_with_disjoint_root_outputs() {
    let f = Files::new();
    let one = f.put(
        "one.chc",
        "functor SUSP in=coin out=coffee,tea\nstates p0\np0: coffee->p0\n",
    );
    let two = f.put(
        "two.chc",
        "functor SUSP in=coin out=coffee,tea\nstates q0\nq0: tea->q0\n",
    );
    let (status, out) = exec(&["ioco", "--spec", &s(&one), "--compat", &s(&two)]);
    assert_eq!(status, 1, "output:\n{out}");
    assert!(out.starts_with("verdict: incompatible\n"), "output:\n{out}");
    assert!(out.contains("  pair: p0 q0"), "output:\n{out}");
}

#[test]
fn ioco_compat_accepts_a_spec_against_itself() {
    let f = Files::new();
    let spec = f.put("spec.chc", VENDING_SPEC);
    let (status, out) = exec(&["ioco", "--spec", &s(&spec), "--compat", &s(&spec)]);
    assert_eq!(status, 0, "output:\n{out}");
    assert!(out.starts_with("verdict: compatible\n"), "output:\n{out}");
}

#[test]
fn ioco_requires_exactly_one_mode() {
    let f = Files::new();
    let spec = f.put("spec.chc", VENDING_SPEC);
    let (status, out) = exec(&["ioco", "--spec", &s(&spec)]);
    assert_eq!(status, 2, "output:\n{out}");
    assert!(out.contains("--impl"), "output:\n{out}");
}

#[test]
fn selftest_small_run_passes_and_reports_every_group() {
    let (status, out) = exec(&["selftest", "--cases", "4", "--max-states", "2"]);
    assert_eq!(status, 0, "output:\n{out}");
    assert!(
        out.starts_with("selftest seed=1729 cases=4 max-states=2\n"),
        "output:\n{out}"
    );
    let groups = out.lines().filter(|l| l.contains(": ok (")).count();
    assert!(groups >= 14, "only {groups} groups reported:\n{out}");
    assert!(out.trim_end().ends_with("suite: ok (18 groups)"), "output:\n{out}");
}

#[test]
fn selftest_is_byte_identical_for_a_fixed_seed() {
    let (s1, o1) = exec(&["selftest", "--seed", "7", "--cases", "4", "--max-states", "2"]);
    let (s2, o2) = exec(&["selftest", "--seed", "7", "--cases", "4", "--max-states", "2"]);
    assert_eq!(s1, 0);
    assert_eq!(s2, 0);
    assert_eq!(o1, o2);
}

#[test]
fn selftest_degenerate_sizes_still_pass() {
    let (status, out) = exec(&["selftest", "--cases", "2", "--max-states", "1"]);
    assert_eq!(status, 0, "output:\n{out}");
}
