// Analytic coverage probability against the SIR threshold for the three
// service schemes, printed as a table. The curves do not depend on the
// station intensity, only on the path-loss exponent and antenna count.

use tricomp::analytic::coverage_value;
use tricomp::montecarlo::db_to_linear;
use tricomp::{ModelParams, SchemeId};

fn main() -> tricomp::Result<()> {
    let p = ModelParams::default_network();
    println!("coverage probability, alpha = {}, {} antenna(s)", p.alpha, p.antennas);
    println!("{:>8} {:>10} {:>10} {:>10}", "gamma_dB", "coherent", "selection", "random");
    for db in (-10..=20).step_by(3) {
        let g = db_to_linear(db as f64);
        let jt = coverage_value(SchemeId::Jt, g, &p)?;
        let ops = coverage_value(SchemeId::Ops, g, &p)?;
        let rps = coverage_value(SchemeId::Rps, g, &p)?;
        assert!(jt >= ops && ops >= rps);
        println!("{db:>8} {jt:>10.4} {ops:>10.4} {rps:>10.4}");
    }

    // intensity drops out: the same curve at three very different densities
    let g = db_to_linear(0.0);
    let v: Vec<f64> = [0.002, 0.02, 0.2]
        .iter()
        .map(|&l| {
            let p = ModelParams::new(l, 4.0, 1)?;
            coverage_value(SchemeId::Jt, g, &p)
        })
        .collect::<tricomp::Result<_>>()?;
    println!(
        "\ncoherent coverage at 0 dB for intensities 0.002 / 0.02 / 0.2: {:.6} / {:.6} / {:.6}",
        v[0], v[1], v[2]
    );
    Ok(())
}
