//! Closed-form guarantees written as `iter,bound` CSV.

use shrinkage::bounds::{check_rate_condition, PgdBound, PsgdBound};

fn main() -> shrinkage::Result<()> {
    let (sigma, gamma) = ((1.0 - 2.0 / std::f64::consts::PI).sqrt(), (1.0 - 2.0 / std::f64::consts::PI).sqrt());
    let n0 = 49.2;
    for n in [300.0, 400.0, 1000.0, 4000.0] {
        let c = check_rate_condition(n, n0, 1.0)?;
        println!("n = {n:>6}: condition {}, n/(8 n0) = {:.3}", c.holds, c.margin);
    }
    let pgd = PgdBound { n: 1000.0, n0, kappa: 1.0, eta: 2.0, sigma, gamma, init_error: 0.8 }.curve(8)?;
    println!("\nPGD rate {:.4}, floor {:.4}", pgd.rate, pgd.floor);
    pgd.write_csv(std::io::stdout().lock())?;

    let psgd = PsgdBound { n: 400.0, n0: 35.7, p: 100.0, eta: 2.0, sigma, init_error_sq: 0.64 }.curve(4)?;
    println!("\nPSGD rate {:.6}, floor {:.4}", psgd.rate, psgd.floor);
    psgd.write_csv(std::io::stdout().lock())?;
    println!("\ninputs: {}", psgd.inputs);
    Ok(())
}
