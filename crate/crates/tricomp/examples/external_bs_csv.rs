// Feeds an externally supplied station layout into the geometry engine.
// The input is a CSV with an x,y header; here we synthesize a perturbed
// grid, write it out, read it back, and query the resulting network.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tricomp::geometry::{read_bs_csv, NetworkRealization, Point2D, Window};
use tricomp::UeType;

fn main() -> tricomp::Result<()> {
    let dir = std::env::temp_dir().join("tricomp_external_bs");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("stations.csv");

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "# perturbed 12x12 grid on a 600 m window")?;
    writeln!(f, "x,y")?;
    for i in 0..12 {
        for j in 0..12 {
            let x = 25.0 + 50.0 * i as f64 + rng.gen_range(-12.0..12.0);
            let y = 25.0 + 50.0 * j as f64 + rng.gen_range(-12.0..12.0);
            writeln!(f, "{x:.3},{y:.3}")?;
        }
    }
    drop(f);

    let bs = read_bs_csv(&path)?;
    let net = NetworkRealization::build(bs, Window::new(600.0)?, 40.0)?;
    println!(
        "read {} stations from {}: {} triangles, {} eligible",
        net.bs.len(),
        path.display(),
        net.tris.len(),
        net.eligible_tris.len()
    );

    let probe = Point2D::new(300.0, 300.0);
    let coop = net.coop_set_for(probe)?;
    println!(
        "probe (300, 300): serving stations {:?} at {:.1} / {:.1} / {:.1} m, class {}",
        coop.bs, coop.dist[0], coop.dist[1], coop.dist[2], coop.ue_type
    );

    for ue in [UeType::TypeI, UeType::TypeII, UeType::TypeIII] {
        let (p, c) = net.place_typical_ue(ue, &mut rng)?;
        println!(
            "placed {ue} at ({:.1}, {:.1}), nearest serving distance {:.1} m",
            p.x, p.y, c.dist[0]
        );
    }

    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
