// Builds one Poisson station layout, triangulates it, and shows the
// structural facts the rest of the crate relies on: the dual-vertex
// nearest-three property and the link-distance law of equidistant points.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tricomp::geometry::{sample_ppp, NetworkRealization, Window};
use tricomp::montecarlo::ks_vs_cdf;
use tricomp::UeType;

fn main() -> tricomp::Result<()> {
    let window = Window::new(400.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bs = sample_ppp(0.02, &window, &mut rng)?;
    let net = NetworkRealization::build(bs, window, 35.0)?;

    println!(
        "{} stations, {} triangles, {} eligible in the guard interior",
        net.bs.len(),
        net.tris.len(),
        net.eligible_tris.len()
    );

    // each circumcenter is equidistant from its triangle's three stations,
    // and those three are its nearest stations overall
    let mut checked = 0;
    for &t in net.eligible_tris.iter().take(200) {
        let c = net.circumcenters[t as usize];
        let mut near: Vec<u32> = net.k_nearest_bs(c, 3).into_iter().map(|(i, _)| i).collect();
        near.sort_unstable();
        let mut v = net.tris[t as usize];
        v.sort_unstable();
        assert_eq!(near, v, "dual vertex of triangle {t} is not served by its own corners");
        checked += 1;
    }
    println!("nearest-three duality verified at {checked} circumcenters");

    // distance from an equidistant point to its serving stations follows
    // a size-biased law with a known closed form
    let lambda = net.bs.len() as f64 / window.area();
    let mut ds = Vec::with_capacity(5000);
    for _ in 0..5000 {
        let (_, coop) = net.place_typical_ue(UeType::TypeI, &mut rng)?;
        ds.push(coop.dist[0]);
    }
    let cdf = |x: f64| {
        let u = lambda * std::f64::consts::PI * x * x;
        if x <= 0.0 { 0.0 } else { 1.0 - (1.0 + u) * (-u).exp() }
    };
    let ks = ks_vs_cdf(&ds, &cdf)?;
    println!("link-distance law over one layout: KS {ks:.4} at n={}", ds.len());

    let (p, coop) = net.place_typical_ue(UeType::TypeII, &mut rng)?;
    println!(
        "a TypeII placement at ({:.1}, {:.1}): distances {:.2} / {:.2} / {:.2}",
        p.x, p.y, coop.dist[0], coop.dist[1], coop.dist[2]
    );
    Ok(())
}
