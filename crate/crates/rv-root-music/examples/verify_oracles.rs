//! Run the self-verification oracle suite from library code. Each check
//! recomputes a pipeline quantity by an independent route (identity,
//! finite difference, deflation, Monte Carlo) and compares it against
//! its tolerance. Pass "full" for the acceptance-strength version.
//!
//! Run with: cargo run --release --example verify_oracles [full]

use rv_root_music::oracles::{run_suite, VerifyLevel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let level = match std::env::args().nth(1).as_deref() {
        Some("full") => VerifyLevel::Full,
        _ => VerifyLevel::Quick,
    };
    let checks = run_suite(level)?;
    let mut failed = 0;
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        println!(
            "{status} {:<70} measured {:>10.3e}  tolerance {:>8.1e}",
            c.name, c.measured, c.tolerance
        );
        if !c.passed() {
            failed += 1;
        }
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(3);
    }
    Ok(())
}
