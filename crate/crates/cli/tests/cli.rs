use std::path::Path;
use std::process::{Command, Output};

fn ksamc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksamc"))
        .args(args)
        .output()
        .expect("run ksamc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_iq_csv(path: &Path, points: &[(f64, f64)]) {
    let mut s = String::from("re,im\n");
    for (re, im) in points {
        s.push_str(&format!("{re},{im}\n"));
    }
    std::fs::write(path, s).unwrap();
}

/// Noiseless-ish QPSK burst, cycling through the four points.
fn qpsk(n: usize) -> Vec<(f64, f64)> {
    let a = 0.5f64.sqrt();
    (0..n)
        .map(|k| {
            let jitter = 0.01 * ((k * 7919 % 101) as f64 / 101.0 - 0.5);
            let re = if k % 2 == 0 { a } else { -a };
            let im = if (k / 2) % 2 == 0 { a } else { -a };
            (re + jitter, im - jitter)
        })
        .collect()
}

#[test]
fn sweep_writes_csv() {
    let o = ksamc(&["pcc-vs-snr", "--trials", "20", "--set", "snr_grid_db=0,10", "--set", "methods=ks,cumulant"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "experiment,method,variable,value,metric,trials,seed");
    assert_eq!(lines.len(), 1 + 4);
    assert!(lines[1].starts_with("pcc-vs-snr,cumulant,0,"));
    assert!(lines[1].ends_with(",pcc,20,2011"));
}

#[test]
fn rerun_and_worker_count_do_not_change_output() {
    let args = |w: &'static str| {
        vec![
            "ber-sweep", "--seed", "5", "--workers", w, "--set", "snr_grid_db=8,16", "--set", "subcarriers=64",
            "--set", "frames=6",
        ]
    };
    let a = ksamc(&args("1"));
    let b = ksamc(&args("1"));
    let c = ksamc(&args("3"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn config_file_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# small sweep\ntrials = 10\nsample_size_grid = 20, 50\nmethods = cumulant\n",
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let o = ksamc(&[
        "pcc-vs-samples",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("pcc-vs-samples,cumulant,50,"));
}

#[test]
fn build_table_then_classify() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("cdf.tbl");
    let o = ksamc(&[
        "build-table",
        "--set",
        "snr_grid_db=10:1:20",
        "--set",
        "granularity_db=1",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(&table).unwrap();
    assert!(bytes.starts_with(b"KSAMC-CDF v1\n"));

    let iq = dir.path().join("burst.csv");
    write_iq_csv(&iq, &qpsk(200));
    for (method, extra) in [("ks", None), ("ks-table", Some(table.to_str().unwrap()))] {
        let mut args = vec!["classify", "--input", iq.to_str().unwrap(), "--method", method, "--snr-db", "15"];
        if let Some(t) = extra {
            args.extend(["--table", t]);
        }
        let o = ksamc(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "format,d_hat,alpha_hat,q,decided");
        assert_eq!(lines.len(), 4);
        let decided: Vec<&str> = lines[1..].iter().filter(|l| l.ends_with(",1")).copied().collect();
        assert_eq!(decided.len(), 1);
        assert!(decided[0].starts_with("QAM4,"), "{method}: {text}");
    }

    let o = ksamc(&["classify", "--input", iq.to_str().unwrap(), "--method", "cumulant", "--snr-db", "30"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("decided,c42\nQAM4,"), "{text}");
}

#[test]
fn bad_configuration_exits_1() {
    for args in [
        vec!["pcc-vs-snr", "--set", "no_such_key=1"],
        vec!["pcc-vs-snr", "--set", "trials"],
        vec!["pcc-vs-snr", "--trials", "0"],
        vec!["ber-sweep", "--set", "desired=QAM8"],
        vec!["classify", "--method", "ks", "--snr-db", "10"],
        vec!["no-such-command"],
    ] {
        let o = ksamc(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn missing_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let o = ksamc(&["classify", "--input", missing.to_str().unwrap(), "--snr-db", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ksamc(&["pcc-vs-snr", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = ksamc(&[
        "pcc-vs-snr",
        "--trials",
        "5",
        "--set",
        "snr_grid_db=10",
        "--out",
        dir.path().join("nope/out.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corrupt_table_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("bad.tbl");
    std::fs::write(&table, b"KSAMC-CDF v9\n\n").unwrap();
    let iq = dir.path().join("burst.csv");
    write_iq_csv(&iq, &qpsk(50));
    let o = ksamc(&[
        "classify",
        "--input",
        iq.to_str().unwrap(),
        "--method",
        "ks-table",
        "--snr-db",
        "15",
        "--table",
        table.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}
