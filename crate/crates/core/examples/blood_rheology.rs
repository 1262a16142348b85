// Carreau viscosity, the inlet profile and the relaxation time it implies.

use magnav::dynamics::{relaxation_time, settling_velocity, Microrobot};
use magnav::hemodynamics::{inlet_profile, profile_flux, CarreauModel, BLOOD_DENSITY, PROFILE_EXPONENT};

pub fn run() -> magnav::Result<()> {
    let blood = CarreauModel::default();
    println!("{:>12} {:>14}", "shear [1/s]", "viscosity [Pa s]");
    for k in -2..=4 {
        let g = 10f64.powi(k);
        println!("{g:>12} {:>14.6}", blood.apparent_viscosity(g)?);
    }

    let (u_max, radius) = (0.45, 1e-3);
    println!("\ninlet profile, R = 1 mm, u_max = {u_max} m/s");
    for i in 0..=5 {
        let r = radius * i as f64 / 5.0;
        println!("r = {:.1} mm  u = {:.4} m/s", r * 1e3, inlet_profile(u_max, r, radius, PROFILE_EXPONENT)?);
    }
    println!("flux {:.4e} m^3/s", profile_flux(u_max, radius, PROFILE_EXPONENT));

    for d in [50e-6, 500e-6, 1000e-6] {
        let robot = Microrobot::new(d)?;
        println!(
            "d = {:>4} um  tau = {:.3e} s  settling = {:.3e} m/s",
            d * 1e6,
            relaxation_time(&robot, blood.eta_inf)?,
            settling_velocity(&robot, BLOOD_DENSITY, blood.eta_inf)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
