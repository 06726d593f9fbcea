use std::path::Path;
use std::process::Command;

use coopdec_sim::{read_csv, run_sweep, write_csv, CodeSpec, DecoderKind, SimConfig, CSV_HEADER};

fn coopdec(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_coopdec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn sweep_to(dir: &Path, name: &str, workers: &str) -> (Vec<u8>, Vec<u8>) {
    let out = dir.join(format!("{name}.csv"));
    let status = coopdec(&[
        "sweep",
        "--code",
        "product:4:2",
        "--decoders",
        "cooperative,sum_product",
        "--ebn0",
        "1:1:3",
        "--frames",
        "400",
        "--target-errors",
        "none",
        "--seed",
        "7",
        "--workers",
        workers,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    (
        std::fs::read(&out).unwrap(),
        std::fs::read(out.with_extension("plotdata")).unwrap(),
    )
}

#[test]
fn sweep_outputs_are_identical_for_any_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let one = sweep_to(dir.path(), "one", "1");
    let four = sweep_to(dir.path(), "four", "4");
    assert_eq!(one, four);
    let rows = read_csv(&one.0[..]).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.mean_ms.is_none() && r.frames == 400));
    let plot = String::from_utf8(one.1).unwrap();
    assert!(plot.contains("# decoder cooperative") && plot.contains("# decoder sum_product"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("r.csv");
    std::fs::write(
        &cfg,
        format!(
            "code = hamming74\ndecoders = hard\nebn0 = 2,4\nframes = 50\nseed = 3\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let o = coopdec(&["sweep", "--config", cfg.to_str().unwrap(), "--frames", "80", "--timing"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.frames == 80 && r.decoder == "hard" && r.mean_ms.is_some()));
}

#[test]
fn gen_then_rank() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.alist");
    let o = coopdec(&["gen", "--code", "product:8:2", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let o = coopdec(&["rank", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("n = 64"), "{text}");
    assert!(text.contains("rank = 15"));
    assert!(text.contains("dimension = 49"));
}

#[test]
fn errors_exit_nonzero() {
    assert!(!coopdec(&["sweep", "--code", "turbo:1"]).status.success());
    assert!(!coopdec(&["sweep", "--lambda", "1.5"]).status.success());
    assert!(!coopdec(&["rank", "/nonexistent.alist"]).status.success());
    assert!(!coopdec(&["sweep", "--config", "/nonexistent.cfg"]).status.success());
}

#[test]
fn csv_round_trip_recovers_every_field() {
    let config = SimConfig {
        code: CodeSpec::Hamming74,
        decoders: vec![DecoderKind::Cooperative, DecoderKind::Hard],
        ebn0_grid: vec![0.5, 3.25],
        frames: 300,
        target_errors: None,
        ..SimConfig::default()
    };
    let result = run_sweep(&config).unwrap();
    let mut buf = Vec::new();
    write_csv(&result, &mut buf).unwrap();
    assert!(String::from_utf8_lossy(&buf).starts_with(&CSV_HEADER.join(",")));
    let rows = read_csv(&buf[..]).unwrap();
    assert_eq!(rows.len(), result.cells.len());
    for (row, cell) in rows.iter().zip(&result.cells) {
        let (lo, hi) = cell.fer_interval();
        assert_eq!(row.decoder, cell.decoder.name());
        assert_eq!(row.ebn0_db, cell.ebn0_db);
        assert_eq!((row.frames, row.bit_errors, row.frame_errors), (cell.frames, cell.bit_errors, cell.frame_errors));
        assert_eq!((row.ber, row.fer), (cell.ber(result.n), cell.fer()));
        assert_eq!((row.ci_low, row.ci_high), (lo, hi));
        assert_eq!(row.mean_iters, cell.mean_iterations());
        assert_eq!(row.consensus_rate, cell.consensus_rate());
        assert_eq!(row.mean_gap, cell.mean_gap());
        assert_eq!(row.info_ber, cell.info_ber(result.k));
        assert!(row.fer >= row.ber);
    }
}

#[test]
fn zero_error_cell_interval() {
    let config = SimConfig {
        code: CodeSpec::Hamming74,
        decoders: vec![DecoderKind::SumProduct],
        ebn0_grid: vec![60.0],
        frames: 100,
        target_errors: None,
        ..SimConfig::default()
    };
    let result = run_sweep(&config).unwrap();
    let mut buf = Vec::new();
    write_csv(&result, &mut buf).unwrap();
    let row = &read_csv(&buf[..]).unwrap()[0];
    assert_eq!((row.ber, row.fer, row.ci_low), (0.0, 0.0, 0.0));
    assert!((row.ci_high - 0.036_993_498).abs() < 1e-8);
}
