//! Sample a synthetic bundle and write it as COVB v1.
//!
//! cargo run --example simulate_bundle -- [out.covb]

use covreg::io::write_bundle;
use covreg::simgen::{sample_bundle, GenerativeConfig, Link};

fn main() -> covreg::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "example.covb".into());
    let cfg = GenerativeConfig { n: 50, sigma: 0.1, link: Link::Log, seed: 7, ..Default::default() };
    let sample = sample_bundle(&cfg)?;
    let (mean, std) = sample.bundle.label_mean_std();
    println!("{} subjects, {} sensors, {} sources", sample.bundle.len(), cfg.p, cfg.q);
    println!("alpha = {:?}", sample.alpha);
    println!("labels: mean {mean:.4}, std {std:.4}");
    let c0 = &sample.bundle.matrices()[0];
    println!("first covariance: trace {:.4}, eigenvalues {:.4?}", c0.trace(), c0.eigh()?.values.as_slice());
    write_bundle(out.as_ref(), &sample.bundle)?;
    println!("wrote {out}");
    Ok(())
}
