//! Ordinary ERM against local minimax ERM on the two-hypothesis step
//! problem: as the radius grows the minimax rule stops trusting the step
//! that looks free on the sample.
//!
//!     cargo run --example minimax_erm

use wdro::casebook;
use wdro::erm::{minimax_erm, ordinary_erm};
use wdro::space::sample_uniform_interval;
use wdro::AmbiguityBall;

fn main() -> wdro::Result<()> {
    let class = casebook::class(10.0);
    let sample = sample_uniform_interval(10, 42)?;
    let ord = ordinary_erm(&class, &sample)?;
    println!("ordinary ERM: {} (risk {:.4})", ord.selected_id, ord.objective);
    for rho in [0.0, 0.005, 0.01, 0.02, 0.05, 0.1] {
        let ball = AmbiguityBall::new(1.0, rho)?;
        let mm = minimax_erm(&class, &sample, &ball, &[casebook::step_point()], &casebook::space())?;
        let table: Vec<String> = mm
            .per_hypothesis
            .iter()
            .map(|h| format!("{}={:.4}", h.id, h.value))
            .collect();
        println!("rho={rho:<6} minimax ERM: {} [{}]", mm.selected_id, table.join(" "));
    }
    Ok(())
}
