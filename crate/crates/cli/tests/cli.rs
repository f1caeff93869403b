use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qcpolar(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcpolar"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = qcpolar(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn design_small(dir: &Path) {
    ok(
        dir,
        &["design", "--n", "3", "--q", "4", "--shifts", "hill", "--budget", "200", "--out", "code.spec"],
    );
}

fn noiseless_llrs(codewords: &str) -> Vec<Vec<f32>> {
    codewords
        .lines()
        .map(|l| l.chars().map(|c| if c == '1' { -8.0 } else { 8.0 }).collect())
        .collect()
}

#[test]
fn encode_then_decode_recovers_data() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    design_small(dir);
    ok(dir, &["encode", "--spec", "code.spec", "--random", "5", "--seed", "3", "--data-out", "data.txt", "--out", "cw.txt"]);
    let data = fs::read_to_string(dir.join("data.txt")).unwrap();
    let cw = fs::read_to_string(dir.join("cw.txt")).unwrap();
    assert_eq!(data.lines().count(), 5);
    assert!(data.lines().all(|l| l.len() == 16));
    assert!(cw.lines().all(|l| l.len() == 32));

    let llrs = noiseless_llrs(&cw);
    let csv: String = llrs
        .iter()
        .map(|f| f.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    fs::write(dir.join("llr.csv"), csv).unwrap();
    let raw: Vec<u8> = llrs.iter().flatten().flat_map(|x| x.to_le_bytes()).collect();
    fs::write(dir.join("llr.f32"), raw).unwrap();

    for args in [
        vec!["--llrs", "llr.csv", "--decoder", "bp", "--iters", "4"],
        vec!["--llrs", "llr.f32", "--llr-format", "f32", "--decoder", "bp", "--mode", "minsum", "--early-stop"],
    ] {
        let mut full = vec!["decode", "--spec", "code.spec"];
        full.extend(args);
        let out = ok(dir, &full);
        let mut lines = out.lines();
        assert_eq!(lines.next().unwrap(), "frame,decisions,boxplus,additions,unit_updates,ops,iterations,converged");
        for (row, want) in lines.zip(data.lines()) {
            let cols: Vec<&str> = row.split(',').collect();
            assert_eq!(cols[1], want);
            assert!(cols[4].parse::<u64>().unwrap() > 0);
        }
    }
}

#[test]
fn encode_formats_agree() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    design_small(dir);
    ok(dir, &["encode", "--spec", "code.spec", "--random", "3", "--data-out", "d.bits", "--out", "c.bits"]);
    ok(dir, &["encode", "--spec", "code.spec", "--random", "3", "--format", "hex", "--data-out", "d.hex", "--out", "c.hex"]);
    ok(dir, &["encode", "--spec", "code.spec", "--input", "d.hex", "--format", "hex", "--out", "c2.hex"]);
    assert_eq!(fs::read(dir.join("c.hex")).unwrap(), fs::read(dir.join("c2.hex")).unwrap());
    let bits = fs::read_to_string(dir.join("c.bits")).unwrap();
    let hex = fs::read_to_string(dir.join("c.hex")).unwrap();
    for (b, h) in bits.lines().zip(hex.lines()) {
        assert_eq!(u32::from_str_radix(b, 2).unwrap(), u32::from_str_radix(h, 16).unwrap());
    }
}

#[test]
fn scl_decodes_a_standard_code() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["design", "--n", "4", "--method", "bhatta", "--param", "0.5", "--out", "std.spec"]);
    assert!(fs::read_to_string(dir.join("std.spec")).unwrap().contains("frozen = 1111111010000000"));
    ok(dir, &["encode", "--spec", "std.spec", "--random", "4", "--data-out", "d.txt", "--out", "c.txt"]);
    let cw = fs::read_to_string(dir.join("c.txt")).unwrap();
    let csv: String = noiseless_llrs(&cw)
        .iter()
        .map(|f| f.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    fs::write(dir.join("llr.csv"), csv).unwrap();
    let data = fs::read_to_string(dir.join("d.txt")).unwrap();
    for dec in ["sc", "scl"] {
        let out = ok(dir, &["decode", "--spec", "std.spec", "--llrs", "llr.csv", "--decoder", dec, "--list", "2"]);
        let got: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
        assert_eq!(got, data.lines().collect::<Vec<_>>());
    }
}

#[test]
fn analyze_output_shape() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("z.spec"), "n = 2\nQ = 4\nfrozen = 1100\nshifts =\n  0 0\n  0 0\n").unwrap();
    let out = ok(dir, &["analyze", "--spec", "z.spec", "--c-max", "6"]);
    let lines: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "length,class_count,girth");
    assert_eq!(lines.len(), 1 + 5);
    assert!(lines[1..].iter().all(|l| l.ends_with(",4")), "{out}");
    assert!(out.lines().last().unwrap().starts_with("# witness: "));
}

#[test]
fn simulate_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    design_small(dir);
    let args = [
        "simulate", "--spec", "code.spec", "--decoder", "bp", "--iters", "8", "--snr-start", "0", "--snr-stop", "1",
        "--snr-step", "0.5", "--max-frames", "400", "--max-frame-errors", "30", "--seed", "7", "--out",
    ];
    let mut a = args.to_vec();
    a.push("a.csv");
    let mut b = args.to_vec();
    b.push("b.csv");
    ok(dir, &a);
    ok(dir, &b);
    let strip = |f: &str| -> Vec<String> {
        fs::read_to_string(dir.join(f))
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').map_or(l, |(h, _)| h).to_string())
            .collect()
    };
    let (ta, tb) = (strip("a.csv"), strip("b.csv"));
    assert_eq!(ta, tb);
    assert!(ta[0].starts_with("# config_hash="));
    assert_eq!(ta.len(), 2 + 3);

    let stdout = ok(dir, &["simulate", "--spec", "code.spec", "--snr-start", "2", "--snr-stop", "2", "--max-frames", "50", "--czero", "--snr-convention", "esn0"]);
    assert!(stdout.lines().nth(1).unwrap().starts_with("snr_db,frames,bit_errs,frame_errs,ber,fer,ci95,ops_mean,seconds"));
}

#[test]
fn design_log_lists_pruned_units() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(
        dir,
        &[
            "design", "--n", "3", "--q", "4", "--shifts", "random", "--prune", "0.25", "--evaluator", "proxy", "--out",
            "p.spec", "--log", "log.csv",
        ],
    );
    let log = fs::read_to_string(dir.join("log.csv")).unwrap();
    let rows: Vec<&str> = log.lines().collect();
    assert_eq!(rows[0], "step,pruned_unit,metric");
    assert!(rows[1].starts_with("0,,"));
    assert_eq!(rows.len(), 2 + 3);
    let spec = fs::read_to_string(dir.join("p.spec")).unwrap();
    assert_eq!(spec.matches("-1").count(), 3);
}

#[test]
fn errors_exit_nonzero() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("bad.spec"), "n = 2\nQ = 4\nfrozen = 110\n").unwrap();
    assert!(!qcpolar(dir, &["analyze", "--spec", "bad.spec"]).status.success());
    assert!(!qcpolar(dir, &["analyze", "--spec", "missing.spec"]).status.success());
    design_small(dir);
    fs::write(dir.join("short.csv"), "1,2,3\n").unwrap();
    assert!(!qcpolar(dir, &["decode", "--spec", "code.spec", "--llrs", "short.csv"]).status.success());
    assert!(!qcpolar(dir, &["simulate", "--spec", "code.spec", "--decoder", "sc"]).status.success());
    assert!(!qcpolar(dir, &["design", "--n", "3", "--rate", "0"]).status.success());
}
