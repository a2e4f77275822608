//! Prints the built-in shift-trap adaptation scenario as TOML, the format
//! read by `wdro adapt --config`.
//!
//!     cargo run --example write_scenario > scenario.toml

use wdro::adaptation::AdaptationConfig;

fn main() -> wdro::Result<()> {
    print!("{}", AdaptationConfig::shift_trap().to_toml()?);
    Ok(())
}
