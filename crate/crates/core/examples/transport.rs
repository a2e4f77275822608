//! Exact W_p between two small point clouds in the plane, with the optimal
//! coupling printed as a matrix.
//!
//!     cargo run --example transport

use wdro::transport::wasserstein;
use wdro::{EmpiricalDistribution, InstanceSpace, Point};

fn main() -> wdro::Result<()> {
    let space = InstanceSpace::feature_only(2, 2.0, 2.0)?;
    let a = EmpiricalDistribution::new(
        vec![
            Point::unlabeled(vec![0.0, 0.0]),
            Point::unlabeled(vec![1.0, 0.0]),
            Point::unlabeled(vec![0.0, 1.0]),
        ],
        vec![0.5, 0.25, 0.25],
    )?;
    let b = EmpiricalDistribution::uniform(vec![
        Point::unlabeled(vec![0.5, 0.5]),
        Point::unlabeled(vec![1.0, 1.0]),
    ])?;
    for p in [1.0, 2.0] {
        let (w, plan) = wasserstein(p, &a, &b, &space)?;
        plan.verify(a.weights(), b.weights(), &space, 1e-12)?;
        println!("W_{p} = {w:.6}");
        print!("{}", plan.to_csv());
    }
    Ok(())
}
