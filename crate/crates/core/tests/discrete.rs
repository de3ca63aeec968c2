use forced_ep::discrete::{
    discrete_el_residual, discrete_ep_check, discrete_flow_step, discrete_legendre, trivialized_derivatives,
    DiscreteLagrangian, DiscreteState, FlowOptions, FnDiscreteLagrangian, LegendreSign,
};
use forced_ep::lie::{ad_star_group, Vec3};
use forced_ep::rkmk::{ButcherTableau, Rkmk, RkmkDiscreteLagrangian, StepRecord};
use forced_ep::systems::{free_rigid_body, relaxed_rigid_body, rigid_body_llg, ForcedEpSystem, RigidBody, RigidBodyParams};
use forced_ep::{AlgebraVector, Error, GroupElement, Retraction};
use proptest::prelude::*;

const INERTIA: [f64; 3] = [0.5, 2.0, 1.0];
const H: f64 = 0.01;

fn omega0() -> AlgebraVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    AlgebraVector::new(s, 0.0, s)
}

fn bodies() -> [RigidBody; 3] {
    [
        free_rigid_body(INERTIA).unwrap(),
        rigid_body_llg(RigidBodyParams::new(INERTIA, 1.0)).unwrap(),
        relaxed_rigid_body(RigidBodyParams::new(INERTIA, 0.1)).unwrap(),
    ]
}

fn method(name: &str, r: Retraction) -> Rkmk {
    Rkmk::new(ButcherTableau::by_name(name).unwrap(), r, H).unwrap()
}

fn small_group(r: Retraction, radius: f64) -> impl Strategy<Value = GroupElement> {
    prop::array::uniform3(-radius..radius).prop_map(move |a| r.tau(&AlgebraVector(Vec3::from(a))))
}

/// Increments `tau(xi_k)` of the variational integrator.
fn integrator_increments(sys: &RigidBody, m: &Rkmk, steps: usize) -> Vec<GroupElement> {
    let mut state = StepRecord::initial(sys, 0.0, GroupElement::identity(), omega0());
    let mut out = Vec::new();
    for _ in 0..steps {
        let next = m.step(sys, &state, None).unwrap();
        out.push(&state.g.inverse() * &next.g);
        state = next;
    }
    out
}

#[test]
fn flow_started_on_the_identities_stays_there() {
    for r in [Retraction::cayley(), Retraction::exponential()] {
        for sys in bodies() {
            let opts = FlowOptions::default();
            let ld = RkmkDiscreteLagrangian::new(sys, method("gauss1", r));
            let mut state = DiscreteState::on_identities(r.tau(&(omega0() * H)));
            let mut moved = 0.0_f64;
            for _ in 0..100 {
                let next = discrete_flow_step(&ld, &state, &state, &r, &opts).unwrap();
                assert!(r.tau_inv(&next.u).unwrap().norm() <= 10.0 * opts.tol);
                moved = moved.max(next.v.distance(&state.v));
                state = next;
            }
            assert!(moved > 1e-6);
        }
    }
}

#[test]
fn restricted_flow_reproduces_the_integrator() {
    let r = Retraction::cayley();
    for sys in bodies() {
        let m = method("gauss1", r);
        let inc = integrator_increments(&sys, &m, 6);
        let ld = RkmkDiscreteLagrangian::new(sys, m);
        let mut state = DiscreteState::on_identities(inc[0]);
        for expected in &inc[1..] {
            let next = discrete_flow_step(&ld, &state, &state, &r, &FlowOptions::default()).unwrap();
            assert!(next.v.distance(expected) <= 1e-9, "{:e}", next.v.distance(expected));
            assert!(next.w.distance(expected) <= 1e-9);
            state = next;
        }
    }
}

#[test]
fn integrator_steps_solve_the_discrete_equations() {
    let r = Retraction::cayley();
    for sys in bodies() {
        let m = method("gauss1", r);
        let inc = integrator_increments(&sys, &m, 3);
        let ld = RkmkDiscreteLagrangian::new(sys, m);
        for w in inc.windows(2) {
            let prev = DiscreteState::on_identities(w[0]);
            let next = DiscreteState::on_identities(w[1]);
            let res = discrete_el_residual(&ld, &prev, &next, &r).unwrap();
            assert!(res.momentum_norm() <= 1e-9, "{:e}", res.momentum_norm());
            assert!(res.res3.distance(&GroupElement::identity()) <= 1e-15);
        }
    }
}

#[test]
fn slot_derivatives_mirror_under_the_symmetry() {
    let r = Retraction::cayley();
    let ld = RkmkDiscreteLagrangian::new(bodies()[1], method("gauss1", r));
    let s = DiscreteState::on_identities(r.tau(&AlgebraVector::new(0.01, -0.004, 0.007)));
    assert_eq!(s.relabeled().v, s.v);
    let d = trivialized_derivatives(&ld, &s, &r).unwrap();
    assert!((d.d1_left + d.d3_left).norm() <= 1e-9);
    assert!((d.d1_right + d.d3_right).norm() <= 1e-9);
}

#[test]
fn zero_lagrangian_has_a_singular_flow() {
    let r = Retraction::cayley();
    let ld = FnDiscreteLagrangian::new(H, |_, _, _| Ok(0.0));
    let s = DiscreteState::on_identities(r.tau(&(omega0() * H)));
    let out = discrete_flow_step(&ld, &s, &s, &r, &FlowOptions::default());
    assert!(matches!(out, Err(Error::SingularJacobian)));
}

#[test]
fn constant_single_lagrangian_has_zero_momenta() {
    let r = Retraction::exponential();
    let w = r.tau(&AlgebraVector::new(0.2, 0.1, 0.3));
    for sign in [LegendreSign::Plus, LegendreSign::Minus] {
        assert_eq!(discrete_legendre(|_: &GroupElement| Ok(3.0), &w, sign, &r).unwrap().norm(), 0.0);
    }
}

#[test]
fn free_discrete_lie_poisson_preserves_the_orbit() {
    let r = Retraction::cayley();
    let sys = bodies()[0];
    let m = method("gauss1", r);
    let inc = integrator_increments(&sys, &m, 20);
    let ld = RkmkDiscreteLagrangian::new(sys, m);
    let single = |w: &GroupElement| ld.single(w);
    let mut casimirs = Vec::new();
    for w in inc.windows(2) {
        assert!(discrete_ep_check(single, &w[0], &w[1], &r).unwrap() <= 1e-9);
        let plus = discrete_legendre(single, &w[0], LegendreSign::Plus, &r).unwrap();
        let minus = discrete_legendre(single, &w[1], LegendreSign::Minus, &r).unwrap();
        assert!((plus - minus).norm() <= 1e-10);
        casimirs.push(minus.norm_squared());
    }
    let c0 = casimirs[0];
    assert!(casimirs.iter().all(|c| (c - c0).abs() <= 1e-10));
    assert!((c0 - sys.dl(&omega0()).norm_squared()).abs() <= 1e-3);
}

#[test]
fn generic_pairs_fail_the_discrete_check() {
    let r = Retraction::cayley();
    let ld = RkmkDiscreteLagrangian::new(bodies()[0], method("gauss1", r));
    let single = |w: &GroupElement| ld.single(w);
    let w1 = r.tau(&AlgebraVector::new(0.01, 0.0, 0.002));
    let w2 = r.tau(&AlgebraVector::new(-0.004, 0.006, 0.0));
    assert!(discrete_ep_check(single, &w1, &w2, &r).unwrap() > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn doubled_lagrangian_is_antisymmetric(v in small_group(Retraction::cayley(), 0.02), u in small_group(Retraction::cayley(), 0.3), w in small_group(Retraction::cayley(), 0.02)) {
        let r = Retraction::cayley();
        for sys in bodies() {
            let ld = RkmkDiscreteLagrangian::new(sys, method("gauss1", r));
            prop_assert!(ld.is_antisymmetric());
            let a = ld.eval(&v, &u, &w).unwrap();
            let b = ld.eval(&w, &u.inverse(), &v).unwrap();
            prop_assert!((a + b).abs() <= 1e-12);
        }
    }

    #[test]
    fn composition_rule_gives_identity_residual(v in small_group(Retraction::cayley(), 0.5), u in small_group(Retraction::cayley(), 0.5), w in small_group(Retraction::cayley(), 0.5)) {
        let r = Retraction::cayley();
        let ld = FnDiscreteLagrangian::new(H, |_, _, _| Ok(0.0));
        let prev = DiscreteState::new(v, u, w);
        let next = DiscreteState::new(w, prev.next_u(), v);
        let res = discrete_el_residual(&ld, &prev, &next, &r).unwrap();
        prop_assert!(res.res3.distance(&GroupElement::identity()) <= 1e-14);
    }

    #[test]
    fn plus_momentum_is_transported_minus_momentum(w in small_group(Retraction::exponential(), 0.03)) {
        let r = Retraction::exponential();
        let ld = RkmkDiscreteLagrangian::new(bodies()[1], method("gauss1", r));
        let single = |x: &GroupElement| ld.single(x);
        let plus = discrete_legendre(single, &w, LegendreSign::Plus, &r).unwrap();
        let minus = discrete_legendre(single, &w, LegendreSign::Minus, &r).unwrap();
        prop_assert!((plus - ad_star_group(&w, &minus)).norm() <= 1e-9);
    }
}
