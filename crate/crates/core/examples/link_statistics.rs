//! Nonlinearity parameters of common links, closed form against Monte
//! Carlo, and the concentration probe used to pick η.

use shrinkage::gaussian::RngSeed;
use shrinkage::links::{eta_grid, link_stats, link_stats_analytic, link_stats_mc, ConcentrationSamples, Link};

fn main() -> shrinkage::Result<()> {
    println!("{:<18} {:>10} {:>10} {:>10}  source", "link", "mu", "sigma^2", "gamma^2");
    for link in [
        Link::Linear,
        Link::Sign,
        Link::Cubic,
        Link::TanhScale { c: 2.0 },
        Link::Quantize { levels: 8, clip: 2.5 },
        Link::custom("relu", |z| z.max(0.0)),
    ] {
        let st = link_stats(&link, 200_000, RngSeed(1))?;
        let source = if st.std_errors().is_some() { "monte carlo" } else { "analytic" };
        println!("{:<18} {:>10.5} {:>10.5} {:>10.5}  {source}", link.name(), st.mu, st.sigma_sq, st.gamma_sq);
    }

    let exact = link_stats_analytic(&Link::Cubic)?;
    let mc = link_stats_mc(&Link::Cubic, 1_000_000, RngSeed(2))?;
    let se = mc.std_errors().unwrap();
    println!("\ncubic gamma^2: exact {} vs MC {:.3} +- {:.3}", exact.gamma_sq, mc.gamma_sq, se[2]);

    let stats = link_stats_analytic(&Link::Sign)?;
    let probe = ConcentrationSamples::draw(&Link::Sign, &stats, 500, 4000, RngSeed(3))?;
    for eta in [1.0, 1.5, 2.0, 3.0] {
        let e = probe.estimate(eta);
        println!("sign, n = 500: p_hat({eta}) = {:.4} +- {:.4}", e.p_hat, e.std_error);
    }
    let eta = probe.smallest_eta(0.05, &eta_grid(0.05, 10.0, 0.05));
    println!("smallest eta with p_hat <= 0.05: {eta:?}");
    Ok(())
}
