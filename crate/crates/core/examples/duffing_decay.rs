//! Undriven Duffing in both dissipative formalisms.
//!
//! Integrates the contact and metriplectic realizations of the same
//! Hamiltonian and prints the energy bookkeeping side by side: the
//! contact energy decays as H0·exp(-delta·t) while the metriplectic
//! energy is conserved and its entropy grows.
//!
//! Run with:
//!   cargo run --example duffing_decay

use metriplectic::integrators::{integrate, IntegratorOptions, Sampling};
use metriplectic::systems::{duffing_contact, duffing_metriplectic, DuffingParams};
use metriplectic::Point;

fn main() -> Result<(), metriplectic::Error> {
    let params = DuffingParams::decay_demo();
    let x0 = Point::new3(1.0, 0.0, 0.0);
    let opts = IntegratorOptions::dp45(1e-10, 1e-10, 0.0, 20.0)
        .with_sampling(Sampling::Uniform { dt: 2.0 });

    let contact = integrate(&duffing_contact(&params).build_field()?, &x0, &opts)?;
    let met = integrate(&duffing_metriplectic(&params).build_field()?, &x0, &opts)?;

    let h0 = contact.monitors[0].hamiltonian;
    println!("delta = {}, H0 = {h0}", params.delta);
    println!(
        "{:>6} {:>14} {:>14} {:>14} {:>12}",
        "t", "H_contact", "H0*exp(-dt)", "H_metriplectic", "z_met"
    );
    for k in 0..contact.len() {
        let t = contact.times[k];
        println!(
            "{t:>6.1} {:>14.9} {:>14.9} {:>14.9} {:>12.6}",
            contact.monitors[k].hamiltonian,
            h0 * (-params.delta * t).exp(),
            met.monitors[k].hamiltonian,
            met.states[k].z(),
        );
    }

    let drift = met.step_energy_drift;
    println!("\nmetriplectic energy drift over the run: {drift:.3e}");
    Ok(())
}
