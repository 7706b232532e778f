use std::path::Path;
use std::process::{Command, Output};

fn wavemod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavemod"))
        .args(args)
        .env_remove("WAVEMOD_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn ber_writes_csv_with_theory_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ber.csv");
    let o = wavemod(&[
        "ber", "--waveform", "ofdm", "--ebn0", "0,6", "--frames", "64", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().next().unwrap().contains("waveform=ofdm"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][0], rows[1][0]), (0.0, 6.0));
    assert!(rows[0][1] > rows[1][1]);
    assert!((rows[0][1] / rows[0][2] - 1.0).abs() < 0.1);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = wavemod(&["papr", "--waveform", "fbmc", "--frames", "500", "--seed", "8", "--out", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# short sweep\nwaveform = linear_gfdm\nebn0 = 2:2:6\nframes = 8\n").unwrap();
    let out = dir.path().join("ber.csv");
    let o = wavemod(&[
        "ber", "--waveform", "ofdm", "--ebn0", "30", "--config", cfg.to_str().unwrap(), "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let header = std::fs::read_to_string(&out).unwrap();
    assert!(header.lines().next().unwrap().contains("waveform=linear_gfdm"));
    let x: Vec<f64> = csv_rows(&out).iter().map(|r| r[0]).collect();
    assert_eq!(x, vec![2.0, 4.0, 6.0]);
}

#[test]
fn plot_data_sits_next_to_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("psd.csv");
    let o = wavemod(&["psd", "--waveform", "fbmc", "--frames", "20", "--out", out.to_str().unwrap(), "--emit-plot-data"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("suppression"));
    let csv = csv_rows(&out);
    let dat = std::fs::read_to_string(dir.path().join("psd.dat")).unwrap();
    let cols: Vec<Vec<f64>> = dat
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(cols, csv);
}

#[test]
fn csv_goes_to_stdout_without_out() {
    let o = wavemod(&["papr", "--waveform", "ofdm", "--frames", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with('#'));
    assert_eq!(text.lines().nth(1), Some("abscissa,value"));
    // 6..15 dB in 0.5 dB steps
    assert_eq!(text.lines().count(), 2 + 19);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = dir.path().join("bad.cfg");
    std::fs::write(&bad_key, "frames = 10\ncolour = blue\n").unwrap();
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["ber", "--waveform", "wifi"], "waveform"),
        (vec!["ber", "--frames", "0"], "frames"),
        (vec!["ber", "--ebn0", "4,2"], "ebn0_grid_db"),
        (vec!["psd", "--config", bad_key.to_str().unwrap()], "colour"),
        (vec!["papr", "--config", "/nonexistent/run.cfg"], "config"),
        (vec!["ber", "--waveform", "ofdm", "--channel", "tifs", "--set", "cp_len=3"], "cp_len"),
    ];
    for (args, field) in cases {
        let o = wavemod(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains(&format!("`{field}`")), "{args:?}: {}", stderr(&o));
    }
    let o = wavemod(&["ber", "--unknown-flag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn singular_modulation_matrix_exits_with_3() {
    // an even subsymbol count makes the PHYDYAS-shaped GFDM matrix singular
    let o = wavemod(&["ber", "--waveform", "gfdm", "--set", "gfdm_subsymbols=4", "--frames", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("singular"));
}

#[test]
fn thread_cap_is_honored_and_checked() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_wavemod"))
            .args(["ber", "--waveform", "fbmc", "--channel", "tvfs", "--ebn0", "8", "--frames", "100"])
            .env("WAVEMOD_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let three = run("3");
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
    let bad = run("lots");
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("WAVEMOD_THREADS"));
}
