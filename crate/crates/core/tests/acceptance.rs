//! Runs every acceptance criterion and prints one line per criterion.

use torus_nls::acceptance::{run_criterion, CRITERIA};

fn main() {
    let seed = std::env::var("ACCEPTANCE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let mut failed = 0;
    for &(id, _) in &CRITERIA {
        let r = run_criterion(id, seed);
        println!("{r}");
        failed += usize::from(!r.pass);
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
