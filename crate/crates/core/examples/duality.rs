//! Worst-case risk of a squared loss computed twice: by the transport
//! linear program over couplings and by the one-dimensional dual in lambda.
//!
//!     cargo run --example duality

use wdro::classes::{linear_predictors, make_quadratic_class};
use wdro::dual::local_worst_case_risk;
use wdro::rng;
use wdro::transport::primal_worst_case_risk;
use wdro::{AmbiguityBall, EmpiricalDistribution, InstanceSpace, Point};

fn main() -> wdro::Result<()> {
    let space = InstanceSpace::lp_product(1, 1.0, 1.0, 2.0)?;
    let mut r = rng::seeded(3);
    let sample = EmpiricalDistribution::uniform((0..8).map(|_| space.sample_point(&mut r)).collect())?;
    let grid: Vec<Point> = (0..=10)
        .flat_map(|i| (0..=10).map(move |j| Point::labeled(vec![-1.0 + 0.2 * i as f64], -1.0 + 0.2 * j as f64)))
        .collect();
    let class = make_quadratic_class(linear_predictors(&[(vec![0.7], 0.1)]), &space)?;
    let f = class.get(0);

    println!("{:>6} {:>12} {:>12} {:>12} {:>10}", "rho", "plain", "primal", "dual", "lambda*");
    for rho in [0.0, 0.05, 0.1, 0.2, 0.4] {
        let ball = AmbiguityBall::new(2.0, rho)?;
        let primal = primal_worst_case_risk(f, &sample, &ball, &grid, &space)?;
        let dual = local_worst_case_risk(f, &sample, &ball, &grid, &space)?;
        println!(
            "{rho:>6} {:>12.6} {:>12.6} {:>12.6} {:>10.4}",
            sample.expect(|z| f.eval(z)),
            primal.value,
            dual.value,
            dual.lambda_star
        );
    }
    Ok(())
}
