//! Runs the lemma suite and prints one line per check.

use llg_bdf3::lemmas::check_all;

fn main() -> llg_bdf3::Result<()> {
    let trials = std::env::args().nth(1).map_or(200, |s| s.parse().expect("trials must be an integer"));
    let reports = check_all(trials, 7)?;
    for r in &reports {
        println!(
            "{} {:<24} {:.3e} <= {:.0e}  {}",
            if r.pass { "ok  " } else { "FAIL" },
            r.id,
            r.max_violation,
            r.tolerance,
            r.detail.as_deref().unwrap_or("")
        );
    }
    if reports.iter().any(|r| !r.pass) {
        std::process::exit(1);
    }
    Ok(())
}
