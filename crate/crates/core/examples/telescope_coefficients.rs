//! Derives the BDF3 telescope coefficients and prints them in fixture
//! format, next to the committed fixture.

use llg_bdf3::lemmas::TelescopeCoefficients;

fn main() -> llg_bdf3::Result<()> {
    let derived = TelescopeCoefficients::derive()?;
    println!("{}", derived.to_json());
    match TelescopeCoefficients::pinned() {
        Ok(p) => {
            let diff = derived.alpha.iter().zip(&p.alpha).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            eprintln!("fixture residual {:.3e}, max difference from derived {diff:.3e}", p.residual());
        }
        Err(e) => eprintln!("fixture rejected: {e}"),
    }
    Ok(())
}
