use approx::assert_relative_eq;
use forced_ep::harness::{integrate, MethodSpec};
use forced_ep::lie::{ad_star, pairing, Vec3};
use forced_ep::rkmk::ButcherTableau;
use forced_ep::systems::{
    free_rigid_body, lie_poisson_rhs, reconstruct, relaxed_rigid_body, rigid_body_llg, ForcedEpSystem,
    NumericSystem, OrbitPreservingForce, RigidBodyParams,
};
use forced_ep::{AlgebraVector, DualVector, Error, GroupElement, Retraction};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INERTIA: [f64; 3] = [0.5, 2.0, 1.0];

fn omega0() -> AlgebraVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    AlgebraVector::new(s, 0.0, s)
}

fn llg(alpha: f64) -> forced_ep::systems::RigidBody {
    rigid_body_llg(RigidBodyParams::new(INERTIA, alpha)).unwrap()
}

fn relaxed(beta: f64) -> forced_ep::systems::RigidBody {
    relaxed_rigid_body(RigidBodyParams::new(INERTIA, beta)).unwrap()
}

fn alg(r: f64) -> impl Strategy<Value = AlgebraVector> {
    prop::array::uniform3(-r..r).prop_map(|a| AlgebraVector(Vec3::from(a)))
}

#[test]
fn momentum_is_inertia_times_velocity() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m = llg(1.0).dl(&omega0());
    assert_relative_eq!(m.0, Vec3::new(0.5 * s, 0.0, s), epsilon = 1e-15);
    assert_eq!(llg(1.0).casimirs(&m), vec![m.norm_squared()]);
}

#[test]
fn forces_vanish_on_principal_axes() {
    let axis = AlgebraVector::new(0.0, 1.3, 0.0);
    assert_eq!(llg(1.0).force(&axis), DualVector::zeros());
    assert_eq!(relaxed(0.1).force(&axis), DualVector::zeros());
}

#[test]
fn nonpositive_inertia_is_rejected() {
    assert!(matches!(free_rigid_body([1.0, 0.0, 2.0]), Err(Error::Parameter(_))));
    assert!(matches!(
        rigid_body_llg(RigidBodyParams::new([1.0, -1.0, 2.0], 1.0)),
        Err(Error::Parameter(_))
    ));
    assert!(relaxed_rigid_body(RigidBodyParams::new([1.0, 1.0, f64::NAN], 1.0)).is_err());
}

#[test]
fn free_rhs_vanishes_on_an_axis() {
    let sys = free_rigid_body(INERTIA).unwrap();
    let mu = DualVector::new(0.0, 1.0, 0.0);
    assert_eq!(sys.legendre_inv(&mu), AlgebraVector::new(0.0, 0.5, 0.0));
    assert_eq!(lie_poisson_rhs(&sys, &mu), DualVector::zeros());
    let aligned = llg(1.0).dl(&AlgebraVector::new(0.0, 0.0, 2.0));
    assert_eq!(lie_poisson_rhs(&llg(1.0), &aligned), DualVector::zeros());
}

#[test]
fn legendre_round_trip_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sys = llg(1.0);
    for _ in 0..1000 {
        let eta = AlgebraVector::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        assert!((sys.legendre_inv(&sys.dl(&eta)) - eta).norm() <= 1e-12);
    }
}

#[test]
fn reconstruction_substeps() {
    let r = Retraction::exponential();
    let g = r.tau(&AlgebraVector::new(0.1, 0.2, 0.3));
    assert_eq!(reconstruct(&g, &omega0(), 0.0, &r).unwrap(), g);

    let (theta, h) = (0.4_f64, 0.1);
    let rot = reconstruct(&GroupElement::identity(), &AlgebraVector::new(theta / h, 0.0, 0.0), h, &r).unwrap();
    let (s, c) = theta.sin_cos();
    let rodrigues = forced_ep::lie::Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c);
    assert_relative_eq!(rot.0, rodrigues, epsilon = 1e-14);
    assert!(rot.orthogonality_defect() <= 1e-12);

    let too_far = AlgebraVector::new(100.0, 0.0, 0.0);
    assert!(matches!(reconstruct(&g, &too_far, 1.0, &r), Err(Error::Domain(_))));
}

#[test]
fn numeric_system_matches_the_closed_form_body() {
    let body = llg(1.0);
    let numeric = NumericSystem::new(move |e| body.lagrangian(e), move |e| body.force(e))
        .with_casimir(|m| m.norm_squared());
    let eta = AlgebraVector::new(0.3, -0.7, 1.1);
    assert_relative_eq!(numeric.dl(&eta).0, body.dl(&eta).0, epsilon = 1e-9);
    assert_relative_eq!(numeric.d2l(&eta), body.d2l(&eta), epsilon = 1e-6);
    let mu = body.dl(&eta);
    assert_relative_eq!(numeric.legendre_inv(&mu).0, eta.0, epsilon = 1e-8);
    assert_relative_eq!(numeric.force_jacobian(&eta), body.force_jacobian(&eta), epsilon = 1e-7);
    assert_eq!(numeric.casimirs(&mu), body.casimirs(&mu));
}

#[test]
fn orbit_preserving_wrapper_keeps_the_casimir_rate_zero() {
    let sys = OrbitPreservingForce::new(free_rigid_body(INERTIA).unwrap(), |e: &AlgebraVector| *e * 0.3);
    let mu = DualVector::new(0.4, -0.2, 0.9);
    let rhs = lie_poisson_rhs(&sys, &mu);
    assert!(pairing(&rhs, &AlgebraVector(mu.0 * 2.0)).abs() <= 1e-14);
    let eta = sys.legendre_inv(&mu);
    assert_eq!(sys.force(&eta), ad_star(&(eta * 0.3), &mu));
}

fn reference_run(sys: &forced_ep::systems::RigidBody, steps: usize) -> Vec<forced_ep::rkmk::StepRecord> {
    let gauss3 = MethodSpec::Tableau(ButcherTableau::by_name("gauss3").unwrap());
    integrate(sys, &gauss3, Retraction::cayley(), 1e-5, steps, &omega0()).unwrap()
}

#[test]
fn continuous_llg_flow_dissipates_on_its_orbit() {
    let recs = reference_run(&llg(1.0), 2000);
    for w in recs.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-10);
    }
    let c0 = recs[0].casimirs[0];
    assert!(recs.iter().all(|r| (r.casimirs[0] - c0).abs() <= 1e-8));
    assert!(recs.last().unwrap().energy < recs[0].energy);
}

#[test]
fn continuous_relaxed_flow_conserves_energy_and_raises_the_casimir() {
    let recs = reference_run(&relaxed(0.1), 2000);
    let e0 = recs[0].energy;
    for w in recs.windows(2) {
        assert!((w[1].energy - e0).abs() <= 1e-8);
        assert!(w[1].casimirs[0] >= w[0].casimirs[0] - 1e-10);
    }
}

proptest! {
    #[test]
    fn llg_force_dissipates(omega in alg(3.0), alpha in 0.01..5.0f64) {
        let sys = llg(alpha);
        let m = sys.dl(&omega).0;
        let expected = alpha * (m.dot(&omega.0).powi(2) - m.norm_squared() * omega.0.norm_squared());
        let power = pairing(&sys.force(&omega), &omega);
        prop_assert!((power - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
        prop_assert!(power <= 1e-12);
    }

    #[test]
    fn relaxed_force_does_no_work(omega in alg(3.0), beta in 0.01..5.0f64) {
        let sys = relaxed(beta);
        prop_assert!(pairing(&sys.force(&omega), &omega).abs() <= 1e-12);
        // dC/dt = 2 <M, f>
        prop_assert!(pairing(&sys.force(&omega), &AlgebraVector(sys.dl(&omega).0)) >= -1e-12);
    }

    #[test]
    fn energy_identity(omega in alg(3.0)) {
        let sys = llg(1.0);
        let e = pairing(&sys.dl(&omega), &omega) - sys.lagrangian(&omega);
        prop_assert!((sys.energy(&omega) - e).abs() <= 1e-13);
        prop_assert!((sys.hamiltonian(&sys.dl(&omega)) - e).abs() <= 1e-12);
    }

    #[test]
    fn free_flow_conserves_the_casimir(mu in alg(3.0)) {
        let sys = free_rigid_body(INERTIA).unwrap();
        let mu = DualVector(mu.0);
        let rate = pairing(&lie_poisson_rhs(&sys, &mu), &AlgebraVector(mu.0 * 2.0));
        prop_assert!(rate.abs() <= 1e-12);
    }

    #[test]
    fn force_jacobians_match_differences(omega in alg(2.0)) {
        for sys in [llg(0.7), relaxed(0.3)] {
            let step = 1e-6;
            for a in 0..3 {
                let d = AlgebraVector::basis(a) * step;
                let fd = (sys.force(&(omega + d)) - sys.force(&(omega - d))).0 / (2.0 * step);
                let col = sys.force_jacobian(&omega).column(a).into_owned();
                prop_assert!((fd - col).norm() <= 1e-7 * (1.0 + col.norm()));
            }
        }
    }
}
