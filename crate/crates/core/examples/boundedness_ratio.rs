//! Ratio of the commutator operator-norm estimate to the BMO norm of the
//! symbol over a small corpus, through the experiment API.

use czlab::experiment::{run, Experiment, ExperimentConfig};

fn main() -> czlab::Result<()> {
    let sets: Vec<String> = [
        "corpus.symbols=heaviside,clipped-log,sawtooth-bmo,heaviside*3",
        "morrey.p=2",
        "morrey.lambda=0.5",
        "grid.lo=-4",
        "grid.hi=4",
        "grid.step=0.03125",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let cfg = ExperimentConfig::resolve(Experiment::Boundedness, None, &sets)?;
    let report = run(&cfg)?;
    let t = report.table("ratios").expect("ratios table");
    println!("{}", t.header.join("  "));
    for row in &t.rows {
        println!("{}", row.join("  "));
    }
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(())
}
