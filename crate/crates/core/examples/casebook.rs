//! Two-hypothesis casebook: closed forms next to a grid oracle and a Monte
//! Carlo run of minimax ERM.
//!
//!     cargo run --release --example casebook -- [trials]

use wdro::casebook::{self, IllustrativeInstance};

fn main() -> wdro::Result<()> {
    let trials: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20_000);
    println!("alpha=10 p=1 trials={trials}");
    println!("{:>4} {:>6} {:>10} {:>10} {:>10} {:>10} {:>8}", "n", "rho", "analytic", "oracle", "P(f1)", "freq", "in_regime");
    for &n in &[5usize, 10, 20] {
        for &rho in &[0.02, 0.05] {
            let inst = IllustrativeInstance::new(10.0, 1.0, n, rho, 0.01)?;
            let analytic = casebook::analytic_population_worst_case(&inst);
            let oracle = casebook::population_oracle(&inst, casebook::POPULATION_GRID)?;
            let prob = casebook::selection_probability(&inst);
            let runs = casebook::simulate(&inst, trials, 1)?;
            let freq = casebook::selection_frequency(&runs);
            println!(
                "{n:>4} {rho:>6} {:>10.5} {:>10.5} {:>10.6} {:>10.6} {:>8}",
                analytic.value, oracle.value, prob.value, freq, analytic.regime.in_regime()
            );
        }
    }
    let inst = IllustrativeInstance::new(10.0, 1.0, 5, 0.05, 0.01)?;
    let runs = casebook::simulate(&inst, trials, 2)?;
    println!(
        "excess profile at n=5 rho=0.05: analytic {:.4}, simulated 0.99-quantile {:.4}",
        casebook::excess_risk_profile(&inst),
        casebook::excess_quantile(&runs, 0.99)
    );
    Ok(())
}
