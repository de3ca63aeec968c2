//! The discrete flow of the doubled gauss1 Lagrangian on G x G x G, started on
//! the identities, keeps U at the identity and moves V like the integrator.

use forced_ep::discrete::{discrete_flow_step, DiscreteState, FlowOptions};
use forced_ep::rkmk::{ButcherTableau, Rkmk, RkmkDiscreteLagrangian, StepRecord};
use forced_ep::systems::{rigid_body_llg, RigidBodyParams};
use forced_ep::{AlgebraVector, GroupElement, Retraction};

fn main() -> forced_ep::Result<()> {
    let sys = rigid_body_llg(RigidBodyParams::new([0.5, 2.0, 1.0], 1.0))?;
    let r = Retraction::cayley();
    let method = Rkmk::new(ButcherTableau::by_name("gauss1")?, r, 0.01)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;

    let mut rec = StepRecord::initial(&sys, 0.0, GroupElement::identity(), AlgebraVector::new(s, 0.0, s));
    let mut increments = Vec::new();
    for _ in 0..20 {
        let next = method.step(&sys, &rec, None)?;
        increments.push(&rec.g.inverse() * &next.g);
        rec = next;
    }

    let ld = RkmkDiscreteLagrangian::new(sys, method);
    let mut state = DiscreteState::on_identities(increments[0]);
    for (k, expected) in increments.iter().enumerate().skip(1) {
        state = discrete_flow_step(&ld, &state, &state, &r, &FlowOptions::default())?;
        if k % 5 == 0 {
            println!(
                "step {k:>2}: |tau_inv(U)| = {:.2e}, |V - integrator| = {:.2e}",
                r.tau_inv(&state.u)?.norm(),
                state.v.distance(expected)
            );
        }
    }
    Ok(())
}
