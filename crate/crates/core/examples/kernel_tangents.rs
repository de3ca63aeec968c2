//! Closed-form tangent maps of the two retractions against finite differences.

use forced_ep::oracle::{fd_dltau, fd_dltau_inv, ORACLE_STEP};
use forced_ep::{AlgebraVector, Retraction};

fn main() -> forced_ep::Result<()> {
    let xi = AlgebraVector::new(0.4, -0.9, 0.3);
    let eta = AlgebraVector::new(0.2, 0.1, -0.5);
    let delta = AlgebraVector::new(-0.3, 0.6, 0.1);

    for r in [Retraction::exponential(), Retraction::cayley()] {
        let g = r.tau(&xi);
        println!("{} retraction, |xi| = {:.3}", r.kind, xi.norm());
        println!("  orthogonality defect of tau(xi): {:.2e}", g.orthogonality_defect());
        println!("  |tau_inv(tau(xi)) - xi|:        {:.2e}", (r.tau_inv(&g)? - xi).norm());

        let d = r.dltau(&xi, &eta)?;
        println!("  dltau vs difference:            {:.2e}", (d - fd_dltau(&r, &xi, &eta, ORACLE_STEP)).norm());
        let di = r.dltau_inv(&xi, &eta)?;
        println!("  dltau_inv vs difference:        {:.2e}", (di - fd_dltau_inv(&r, &xi, &eta, ORACLE_STEP)?).norm());
        println!("  ddltau(xi, eta, delta):         {:?}", r.ddltau(&xi, &eta, &delta)?.as_array());
    }
    Ok(())
}
