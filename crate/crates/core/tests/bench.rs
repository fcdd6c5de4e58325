//! The live-element counter is process-wide, so every test here takes the
//! same lock.

use std::sync::Mutex;

use flasep::attention::{AttentionKind, AttentionMode};
use flasep::bench::{
    fit_slope, parse_csv, run_suite, strip_timing, time_forward, write_csv, BenchConfig, Cell,
    CsvRow, HEADER,
};
use flasep::tensor::memory;
use flasep::{Error, Tensor};

static COUNTER: Mutex<()> = Mutex::new(());

fn lock() -> std::sync::MutexGuard<'static, ()> {
    COUNTER.lock().unwrap_or_else(|e| e.into_inner())
}

fn gated(kind: AttentionKind) -> AttentionMode {
    AttentionMode::gated(kind)
}

#[test]
fn counter_tracks_allocation_and_release() {
    let _g = lock();
    let before = memory::live_elements();
    let t = Tensor::zeros(&[100, 10]);
    assert_eq!(memory::live_elements(), before + 1000);
    let u = t.clone();
    assert_eq!(memory::live_elements(), before + 2000);
    drop(t);
    drop(u);
    assert_eq!(memory::live_elements(), before);
}

#[test]
fn limit_turns_large_allocations_into_errors() {
    let _g = lock();
    let live = memory::live_elements();
    memory::set_limit(Some(live + 500));
    let small = Tensor::try_zeros(&[10, 10]);
    let big = Tensor::try_zeros(&[100, 10]);
    memory::set_limit(None);
    assert!(small.is_ok());
    assert!(matches!(
        big,
        Err(Error::OutOfMemory {
            requested: 1000,
            ..
        })
    ));
}

#[test]
fn too_few_repetitions_is_a_config_error() {
    let _g = lock();
    let res = time_forward(gated(AttentionKind::Fla), 128, 32, 4, 2, 7);
    assert!(matches!(res, Err(Error::Config(_))));
}

#[test]
fn records_satisfy_their_invariants() {
    let _g = lock();
    for kind in AttentionKind::ALL {
        let r = time_forward(gated(kind), 256, 32, 4, 3, 7).unwrap();
        assert!(r.median_seconds > 0.0);
        assert!(r.peak_elements >= 256 * 32);
    }
}

#[test]
fn peak_memory_is_deterministic() {
    let _g = lock();
    for kind in AttentionKind::ALL {
        let a = time_forward(gated(kind), 512, 32, 4, 3, 7).unwrap();
        let b = time_forward(gated(kind), 512, 32, 4, 3, 7).unwrap();
        assert_eq!(a.peak_elements, b.peak_elements, "{kind}");
    }
}

#[test]
fn softmax_peak_grows_quadratically() {
    let _g = lock();
    let mode = gated(AttentionKind::Softmax);
    let small = time_forward(mode, 2048, 32, 4, 3, 7).unwrap();
    let large = time_forward(mode, 4096, 32, 4, 3, 7).unwrap();
    let ratio = large.peak_elements as f64 / small.peak_elements as f64;
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn linear_peaks_grow_linearly() {
    let _g = lock();
    for kind in [AttentionKind::Vla, AttentionKind::Fla] {
        let small = time_forward(gated(kind), 4096, 32, 4, 3, 7).unwrap();
        let large = time_forward(gated(kind), 8192, 32, 4, 3, 7).unwrap();
        let ratio = large.peak_elements as f64 / small.peak_elements as f64;
        assert!((1.8..=2.2).contains(&ratio), "{kind}: ratio {ratio}");
    }
}

fn small_config() -> BenchConfig {
    BenchConfig {
        lengths: vec![128, 256, 512],
        reps: 3,
        ..BenchConfig::default()
    }
}

#[test]
fn suite_emits_one_row_per_cell_plus_slopes() {
    let _g = lock();
    let mut seen = 0;
    let result = run_suite(&small_config(), |_| seen += 1).unwrap();
    assert_eq!(seen, 9);
    assert!(result.all_ok());
    let csv = write_csv(&result);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 1 + 9 + 3);
    assert_eq!(lines.iter().filter(|l| l.contains(",SLOPE,")).count(), 3);
    let rows = parse_csv(&csv).unwrap();
    assert_eq!(
        rows.iter().filter(|r| matches!(r, CsvRow::Cell(_))).count(),
        9
    );
}

#[test]
fn csv_is_reproducible_apart_from_timings() {
    let _g = lock();
    let a = write_csv(&run_suite(&small_config(), |_| {}).unwrap());
    let b = write_csv(&run_suite(&small_config(), |_| {}).unwrap());
    assert_eq!(strip_timing(&a), strip_timing(&b));
}

#[test]
fn out_of_memory_cells_are_recorded_and_the_suite_continues() {
    let _g = lock();
    let config = BenchConfig {
        lengths: vec![256, 2048],
        reps: 3,
        memory_limit: Some(2_000_000),
        ..BenchConfig::default()
    };
    let result = run_suite(&config, |_| {}).unwrap();
    assert_eq!(result.cells.len(), 6);
    assert!(!result.all_ok());
    match result.cell(AttentionKind::Softmax, 2048).unwrap() {
        Cell::Failed { reason, .. } => assert_eq!(reason, "out-of-memory"),
        other => panic!("expected a failure, got {other:?}"),
    }
    assert!(result.record(AttentionKind::Fla, 2048).is_some());
    assert!(write_csv(&result).contains("softmax,2048,32,4,3,FAILED,out-of-memory"));
    assert_eq!(memory::limit(), None);
}

#[test]
fn slope_examples() {
    let linear: Vec<(f64, f64)> = [1000.0, 2000.0, 4000.0, 8000.0]
        .iter()
        .map(|&n| (n, 3e-6 * n))
        .collect();
    let fit = fit_slope(&linear).unwrap();
    assert!((fit.exponent - 1.0).abs() < 1e-12 && (fit.r2 - 1.0).abs() < 1e-12);
    let quad: Vec<(f64, f64)> = [1000.0, 2000.0, 4000.0]
        .iter()
        .map(|&n| (n, 1e-9 * n * n))
        .collect();
    let fit = fit_slope(&quad).unwrap();
    assert!((fit.exponent - 2.0).abs() < 1e-12 && (fit.r2 - 1.0).abs() < 1e-12);
    let hand = fit_slope(&[(1000.0, 0.01), (2000.0, 0.021), (4000.0, 0.0405)]).unwrap();
    assert!((hand.exponent - 1.009).abs() < 5e-4, "{}", hand.exponent);
    assert!(matches!(
        fit_slope(&[(1000.0, 0.01), (2000.0, -1.0), (3000.0, 0.1)]),
        Err(Error::Domain(_))
    ));
    assert!(fit_slope(&linear[..2]).is_err());
}
