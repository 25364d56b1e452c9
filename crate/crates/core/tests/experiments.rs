use czlab::experiment::{run, Experiment, ExperimentConfig};

fn cfg(experiment: Experiment, sets: &[&str]) -> ExperimentConfig {
    let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    ExperimentConfig::resolve(experiment, None, &sets).unwrap()
}

fn column(report: &czlab::experiment::ExperimentReport, table: &str, col: &str) -> Vec<String> {
    let t = report.table(table).unwrap();
    let i = t.header.iter().position(|h| h == col).unwrap();
    t.rows.iter().map(|r| r[i].clone()).collect()
}

#[test]
fn constant_symbol_is_degenerate() {
    let c = cfg(
        Experiment::Boundedness,
        &["corpus.symbols=constant,heaviside", "morrey.p=2", "morrey.lambda=0.5", "grid.lo=-4", "grid.hi=4", "grid.step=0.0625", "run.refine=false"],
    );
    let r = run(&c).unwrap();
    let degenerate = column(&r, "ratios", "degenerate");
    assert_eq!(degenerate, vec!["true", "false"]);
    let ops: Vec<f64> = column(&r, "ratios", "op_lower_estimate").iter().map(|s| s.parse().unwrap()).collect();
    assert!(ops[0].abs() < 1e-12);
}

#[test]
fn doubling_the_symbol_keeps_the_ratio() {
    let c = cfg(
        Experiment::Boundedness,
        &["corpus.symbols=heaviside,heaviside*2", "morrey.p=2", "morrey.lambda=0.5", "grid.lo=-4", "grid.hi=4", "grid.step=0.0625", "run.refine=false"],
    );
    let r = run(&c).unwrap();
    let get = |col: &str| -> Vec<f64> { column(&r, "ratios", col).iter().map(|s| s.parse().unwrap()).collect() };
    let (op, bmo, ratio) = (get("op_lower_estimate"), get("bmo"), get("ratio"));
    assert!((op[1] - 2.0 * op[0]).abs() <= 1e-9 * op[1]);
    assert!((bmo[1] - 2.0 * bmo[0]).abs() <= 1e-12 * bmo[1]);
    assert!((ratio[1] - ratio[0]).abs() <= 1e-6 * ratio[0]);
}

#[test]
fn zero_rounds_report_only_the_input() {
    let r = run(&cfg(Experiment::Factorization, &["factorization.rounds=0"])).unwrap();
    assert!(r.table("input").is_some());
    assert!(r.table("rounds").is_none());
    assert!(r.passed());
}

#[test]
fn constant_symbol_gives_zero_operator() {
    let r = run(&cfg(
        Experiment::Compactness,
        &[
            "corpus.symbols=constant",
            "grid.lo=-16",
            "grid.hi=16",
            "grid.step=0.0625",
            "compactness.alpha_list=2,4",
            "compactness.family_size=3",
        ],
    ))
    .unwrap();
    assert!(r.passed());
    assert!(r.checks.iter().any(|c| c.name.contains("zero operator")));
}

#[test]
fn kernelcheck_on_flat_curve() {
    let r = run(&cfg(Experiment::Kernelcheck, &["curve.kind=flat", "kernelcheck.samples=2000"])).unwrap();
    assert!(r.passed(), "{:?}", r.checks);
}

#[test]
fn reports_are_deterministic() {
    let c = cfg(
        Experiment::Boundedness,
        &["corpus.symbols=random-step", "corpus.random_count=2", "morrey.p=2", "morrey.lambda=0.5", "grid.lo=-4", "grid.hi=4", "grid.step=0.0625"],
    );
    let a = serde_json::to_string(&run(&c).unwrap()).unwrap();
    let b = serde_json::to_string(&run(&c).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn window_overflow_is_reported() {
    let err = run(&cfg(Experiment::Lowerbound, &["lowerbound.k_max=12"])).unwrap_err();
    assert!(czlab::experiment::is_setup_error(&err));
}
