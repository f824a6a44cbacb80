// Runs the seeded simulation for each scheme at desk scale and compares the
// empirical coverage with the analytic curve at a few thresholds.

use tricomp::analytic::coverage_value;
use tricomp::montecarlo::{db_to_linear, simulate, SimConfig};
use tricomp::{InterferenceMode, ModelParams, SchemeId};

fn main() -> tricomp::Result<()> {
    let mut cfg = SimConfig::desk_scale(ModelParams::default_network());
    cfg.drops = 4000;
    cfg.realizations = 40;
    cfg.gamma_grid = [-6.0, 0.0, 6.0, 12.0].iter().map(|&d| db_to_linear(d)).collect();

    for scheme in [SchemeId::Jt, SchemeId::Ops, SchemeId::Rps] {
        cfg.scheme = scheme;
        // match the interference accounting the analysis assumes
        cfg.interference_mode = match scheme {
            SchemeId::Jt => InterferenceMode::Grouped19,
            _ => InterferenceMode::PerBs,
        };
        let res = simulate(&cfg)?;
        println!("{scheme} ({} drops in {:.1}s):", res.drops, res.wall_secs);
        for gp in &res.coverage {
            let a = coverage_value(scheme, gp.gamma, &cfg.params)?;
            println!(
                "  {:>5.1} dB  analytic {:.4}  mc {:.4} [{:.4}, {:.4}]",
                10.0 * gp.gamma.log10(),
                a,
                gp.coverage,
                gp.ci_lo,
                gp.ci_hi
            );
        }
        println!("  mean rate {:.4} [{:.4}, {:.4}] nats", res.se.mean, res.se.lo(), res.se.hi());
    }
    Ok(())
}
