use hankelnet::config::ConfigError;
use hankelnet::sweep::SweepError;
use hankelnet::{run_sweep, write_sweep, IntegrandKind, SweepConfig};
use hankelnet_core::{DesignKind, PrimeBase, RMode};

fn small() -> SweepConfig {
    SweepConfig {
        designs: vec![DesignKind::Urd, DesignKind::Hrd],
        bases: vec![PrimeBase::new(2).unwrap()],
        m_min: 3,
        m_max: 5,
        s: 3,
        integrand: IntegrandKind::TExp,
        c: 1.5,
        r_mode: RMode::Fixed(3),
        batches: 4,
        seed: 11,
        ..SweepConfig::default()
    }
}

#[test]
fn empty_m_range_is_rejected() {
    let cfg = SweepConfig { m_min: 7, m_max: 6, ..small() };
    assert!(matches!(run_sweep(&cfg), Err(SweepError::Config(ConfigError::Invalid(_)))));
}

#[test]
fn one_cell_two_batches_gives_two_rows() {
    let cfg = SweepConfig { designs: vec![DesignKind::Hrd], m_min: 4, m_max: 4, batches: 2, ..small() };
    let result = run_sweep(&cfg).unwrap();
    assert_eq!(result.records.len(), 2);
    assert_eq!(result.summary.len(), 1);
    assert_eq!(result.summary[0].log2_slope, None);
    assert_eq!(result.records.iter().map(|r| r.batch).collect::<Vec<_>>(), vec![0, 1]);
}

#[test]
fn rows_sorted_by_design_base_m_batch() {
    let cfg = SweepConfig { bases: vec![PrimeBase::new(3).unwrap(), PrimeBase::new(2).unwrap()], ..small() };
    let result = run_sweep(&cfg).unwrap();
    assert_eq!(result.records.len(), 2 * 2 * 3 * 4);
    let keys: Vec<_> = result.records.iter().map(|r| (r.design.name(), r.b, r.m, r.batch)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(keys[0], ("hrd", 2, 3, 0));
    assert_eq!(result.summary.len(), 2 * 2 * 3);
    assert!(result.summary.iter().all(|row| row.log2_slope.is_some_and(f64::is_finite)));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let summary = write_sweep(&run_sweep(&small()).unwrap(), &path).unwrap();
        files.push((std::fs::read(&path).unwrap(), std::fs::read(summary).unwrap()));
    }
    assert_eq!(files[0], files[1]);
    let text = String::from_utf8(files[0].0.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), "design,b,m,s,integrand,c,weight_mode,r,batch,estimate,sq_error,seed");
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 4);
}

#[test]
fn adding_cells_leaves_existing_cells_unchanged() {
    let narrow = run_sweep(&SweepConfig { designs: vec![DesignKind::Hrd], ..small() }).unwrap();
    let wide = run_sweep(&small()).unwrap();
    let from_wide: Vec<_> = wide.records.into_iter().filter(|r| r.design == DesignKind::Hrd).collect();
    assert_eq!(narrow.records, from_wide);
}

#[test]
fn unwritable_output_is_an_error() {
    let result = run_sweep(&SweepConfig { m_min: 3, m_max: 3, batches: 1, ..small() }).unwrap();
    let err = write_sweep(&result, std::path::Path::new("/nonexistent-dir/sweep.csv")).unwrap_err();
    assert!(matches!(err, SweepError::Output { .. }));
}

#[test]
fn hankel_errors_decay_faster_than_monte_carlo_rate() {
    let cfg = SweepConfig {
        designs: vec![DesignKind::Hrd],
        m_min: 4,
        m_max: 9,
        s: 2,
        integrand: IntegrandKind::ProductPower,
        r_mode: RMode::Fixed(5),
        batches: 9,
        ..small()
    };
    let result = run_sweep(&cfg).unwrap();
    let slope = result.summary[0].log2_slope.unwrap();
    assert!(slope < -1.5, "slope {slope}");
}
