use std::process::Command;

use mimopnc::cli::{parse_csv, read_csv, to_csv, write_csv, CSV_HEADER};
use mimopnc::{BerRecord, DetectorId};
use proptest::prelude::*;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mimopnc"))
}

fn sweep(dir: &std::path::Path, name: &str, threads: &str) -> Vec<u8> {
    let out = dir.join(name);
    let status = bin()
        .args([
            "sweep",
            "--snr",
            "0:4:12",
            "--symbols",
            "20000",
            "--seed",
            "42",
            "--out",
        ])
        .arg(&out)
        .env("MIMOPNC_THREADS", threads)
        .status()
        .unwrap();
    assert!(status.success());
    std::fs::read(out).unwrap()
}

#[test]
fn csv_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = sweep(dir.path(), "a.csv", "1");
    let b = sweep(dir.path(), "b.csv", "8");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with(&format!("{CSV_HEADER}\n")));
    assert!(text.ends_with('\n'));
    assert_eq!(text.lines().count(), 1 + 6 * 4);
}

#[test]
fn gap_subcommand_reads_sweep_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let recs: Vec<BerRecord> = [(0.0, 100_000), (10.0, 10_000), (20.0, 1000)]
        .iter()
        .flat_map(|&(s, e)| {
            [
                BerRecord::new(DetectorId::VblastNc, s, 2_000_000, e, 0),
                BerRecord::new(DetectorId::VblastPnc, s, 2_000_000, e / 2, 0),
            ]
        })
        .collect();
    write_csv(&recs, &path).unwrap();
    let out = bin()
        .args(["gap", "--in"])
        .arg(&path)
        .args(["--a", "vblast-pnc", "--b", "vblast-nc", "--at-ber", "1e-3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let gap: f64 = String::from_utf8(out.stdout)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    // One decade per 10 dB, PNC at half the BER: 10·log10(2) dB.
    assert!((gap - 10.0 * 2f64.log10()).abs() < 1e-3, "{gap}");
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(
        code(&["sweep", "--snr", "5:0:5", "--out", "x.csv"]),
        Some(2)
    );
    assert_eq!(code(&["bogus"]), Some(2));
    assert_eq!(
        code(&[
            "gap",
            "--in",
            "/nonexistent/r.csv",
            "--a",
            "vblast-pnc",
            "--b",
            "vblast-nc",
            "--at-ber",
            "1e-3"
        ]),
        Some(3)
    );
    let bad_env = bin()
        .args([
            "sweep",
            "--snr",
            "0:1:1",
            "--symbols",
            "10",
            "--out",
            "/tmp/unused.csv",
        ])
        .env("MIMOPNC_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(2));
}

#[test]
fn write_read_round_trip_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let recs = vec![
        BerRecord::new(DetectorId::VblastPnc, 10.0, 2_000_000, 1234, 0),
        BerRecord::new(DetectorId::MlOracle, 2.5, 20, 7, 1),
    ];
    write_csv(&recs, &path).unwrap();
    let back = read_csv(&path).unwrap();
    assert_eq!(back, vec![recs[0], recs[1]]);
}

fn record() -> impl Strategy<Value = BerRecord> {
    (
        0usize..6,
        -2000i64..4000,
        1u64..10_000_000,
        any::<u64>(),
        0u64..1000,
    )
        .prop_map(|(d, snr_centi, total, e, deg)| {
            BerRecord::new(
                DetectorId::ALL[d],
                snr_centi as f64 / 100.0,
                total,
                e % (total + 1),
                deg,
            )
        })
}

proptest! {
    #[test]
    fn csv_round_trip_is_identity(mut recs in proptest::collection::vec(record(), 1..20)) {
        mimopnc::harness::sort_records(&mut recs);
        let back = parse_csv(&to_csv(&recs)).unwrap();
        prop_assert_eq!(back, recs);
    }
}
