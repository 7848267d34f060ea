use blocked_fw::bench::{annotate_barrier_ratios, emit_table, run_bench, write_csv, BenchCase, BenchOptions};
use blocked_fw::{ElemKind, GraphSpec, KernelTier, Mode, SolveConfig, SyncKind};

fn case(n: usize, bs: usize, tier: KernelTier, mode: Mode, sync: SyncKind) -> BenchCase {
    BenchCase {
        n,
        elem_kind: ElemKind::F32,
        solve: SolveConfig::new(bs, 2).with_tier(tier).with_mode(mode, sync),
    }
}

#[test]
fn records_every_repetition() {
    let cases = [case(128, 32, KernelTier::Unrolled, Mode::Barrier, SyncKind::Semaphore)];
    let recs = run_bench(&cases, &GraphSpec::new(0, 1), &BenchOptions::default()).unwrap();
    assert_eq!(recs.len(), 1);
    let r = &recs[0];
    assert_eq!(r.repetitions.len(), 8);
    assert!(r.gflops > 0.0);
    assert_eq!(r.verified, Some(true));
    let mean = r.repetitions.iter().sum::<f64>() / 8.0;
    assert!((mean - r.mean_seconds).abs() < 1e-12);
}

#[test]
fn every_schedule_is_verified_and_ratioed() {
    let mut cases = Vec::new();
    for (mode, sync) in [
        (Mode::Barrier, SyncKind::Semaphore),
        (Mode::DepDriven, SyncKind::Semaphore),
        (Mode::DepDriven, SyncKind::CondVar),
    ] {
        cases.push(case(256, 64, KernelTier::Unrolled, mode, sync));
    }
    let opts = BenchOptions {
        reps: 2,
        ..Default::default()
    };
    let mut recs = run_bench(&cases, &GraphSpec::new(0, 2), &opts).unwrap();
    annotate_barrier_ratios(&mut recs);
    assert!(recs.iter().all(|r| r.verified == Some(true)));
    assert!(recs[0].barrier_ratio.is_none());
    assert!(recs[1..].iter().all(|r| r.barrier_ratio.is_some_and(|x| x > 0.0)));

    let mut csv = Vec::new();
    write_csv(&recs, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(emit_table(&recs).contains("256"));
}

#[test]
fn verification_cap_skips_the_oracle() {
    let cases = [case(128, 64, KernelTier::Baseline, Mode::Barrier, SyncKind::Semaphore)];
    let opts = BenchOptions {
        reps: 1,
        warmup: false,
        verify_cap: 64,
    };
    let recs = run_bench(&cases, &GraphSpec::new(0, 3), &opts).unwrap();
    assert_eq!(recs[0].verified, None);
}
