//! Generalization bound calculators: the Lipschitz and anchored excess-risk
//! bounds across radii, and the constants of the network and Gaussian RKHS
//! classes.
//!
//!     cargo run --example bounds

use wdro::bounds::{corollary_constants, theorem2_bound, theorem3_bound, CorollaryParams};

fn main() -> wdro::Result<()> {
    let (comp, l, c0, diam, m, n, delta) = (1.0, 1.0, 1.0, 2.0, 4.0, 10_000, 0.05);
    println!("{:>6} {:>5} {:>14} {:>14}", "rho", "p", "lipschitz", "anchored");
    for p in [1.0, 2.0] {
        for rho in [0.05, 0.1, 0.5, 1.0] {
            let t2 = theorem2_bound(comp, l, diam, rho, p, m, n, delta)?;
            let t3 = theorem3_bound(comp, c0, diam, rho, p, m, n, delta)?;
            println!("{rho:>6} {p:>5} {:>14.4} {:>14.4}", t2.value, t3.value);
        }
    }
    let net = CorollaryParams::Network {
        d: 5,
        r0: 1.0,
        b: 1.0,
        s_sup: 1.0,
        s_prime_sup: 0.25,
    };
    let rkhs = CorollaryParams::Rkhs {
        d: 2,
        r0: 1.0,
        b: 1.0,
        sigma: 1.0,
        r: 1.0,
    };
    for (name, params) in [("network", net), ("rkhs", rkhs)] {
        let c = corollary_constants(&params, n, delta)?;
        println!(
            "{name}: L={:.4} M={:.4} C1={:.4e} bound(n={n})={:.4}",
            c.l, c.m, c.c1, c.bound.value
        );
    }
    Ok(())
}
