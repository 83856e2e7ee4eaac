//! Show the even/odd element-count dichotomy: an even-element array
//! always puts a reciprocal root pair on the real axis, an odd-element
//! array at full source capacity never does.
//!
//! Run with: cargo run --release --example root_parity

use rv_root_music::array_model::UlaConfig;
use rv_root_music::experiments::{root_locus, RootClass};

fn print_locus(l: usize, angles: &[f64]) -> Result<(), Box<dyn std::error::Error>> {
    let array = UlaConfig::new(l, 0.5)?;
    let points = root_locus(&array, angles)?;
    println!("L = {l}, sources {angles:?}: {} roots", points.len());
    for p in &points {
        println!(
            "  {:>+12.6} {:>+12.6}i  |z| = {:>9.6}  {}",
            p.root.re,
            p.root.im,
            p.root.norm(),
            p.class.name()
        );
    }
    let real_count = points.iter().filter(|p| p.class == RootClass::RealAxis).count();
    println!("  -> real-axis roots: {real_count}\n");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // even element count: the rooting polynomial leaves an odd number of
    // non-signal root pairs, which forces one pair onto the real axis
    print_locus(8, &[30.0, 50.0])?;
    // odd element count at full capacity: every root is a signal double
    print_locus(9, &[15.0, 30.0, 45.0, 60.0])?;
    Ok(())
}
