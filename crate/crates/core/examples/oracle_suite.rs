// The built-in validation checks, plus one run against a perturbed model.

use magnav::hemodynamics::CarreauModel;
use magnav::validate::{check_carreau, run_validation};

pub fn run() -> magnav::Result<()> {
    let report = run_validation(&CarreauModel::default());
    println!("{report}");

    let tampered = CarreauModel { eta_inf: 1.1 * CarreauModel::default().eta_inf, ..CarreauModel::default() };
    println!("\nwith eta_inf +10%: {}", check_carreau(&tampered));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
