use forced_ep::groupoid::{
    forced_hamiltonian, forced_hamiltonian_gradient, hamiltonian_vector_field, k_force, poisson_bracket,
    vector_field_from_gradient, GroupoidGradient, GroupoidPoint,
};
use forced_ep::lie::{ad_star, bracket, pairing, Vec3};
use forced_ep::systems::{
    free_rigid_body, lie_poisson_rhs, relaxed_rigid_body, rigid_body_llg, ForcedEpSystem, RigidBody,
    RigidBodyParams,
};
use forced_ep::{AlgebraVector, DualVector, Error, GroupElement, Retraction};
use proptest::prelude::*;

const INERTIA: [f64; 3] = [0.5, 2.0, 1.0];

fn systems() -> [RigidBody; 2] {
    [
        rigid_body_llg(RigidBodyParams::new(INERTIA, 1.0)).unwrap(),
        relaxed_rigid_body(RigidBodyParams::new(INERTIA, 0.1)).unwrap(),
    ]
}

fn v3(r: f64) -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-r..r).prop_map(Vec3::from)
}

fn retraction() -> impl Strategy<Value = Retraction> {
    prop_oneof![Just(Retraction::exponential()), Just(Retraction::cayley())]
}

fn point(r: Retraction) -> impl Strategy<Value = GroupoidPoint> {
    (v3(2.0), v3(0.57), v3(2.0))
        .prop_map(move |(l, x, m)| GroupoidPoint::new(DualVector(l), r.tau(&AlgebraVector(x)), DualVector(m)))
}

fn gradient() -> impl Strategy<Value = GroupoidGradient> {
    (v3(2.0), v3(2.0), v3(2.0)).prop_map(|(a, b, c)| GroupoidGradient {
        d_lambda: AlgebraVector(a),
        d_u: DualVector(b),
        d_mu: AlgebraVector(c),
    })
}

fn lambda_only(xi: AlgebraVector) -> GroupoidGradient {
    GroupoidGradient {
        d_lambda: xi,
        ..Default::default()
    }
}

fn mu_only(xi: AlgebraVector) -> GroupoidGradient {
    GroupoidGradient {
        d_mu: xi,
        ..Default::default()
    }
}

#[test]
fn identity_section_maps() {
    let mu = DualVector::new(0.3, -1.0, 0.2);
    let e = GroupoidPoint::identity_of(mu);
    assert_eq!((e.source(), e.target()), (mu, mu));
    assert_eq!(e.u, GroupElement::identity());
    assert_eq!(e.inverse(), e);
}

#[test]
fn non_composable_points_are_rejected() {
    let r = Retraction::cayley();
    let p = GroupoidPoint::new(DualVector::new(1.0, 0.0, 0.0), r.tau(&AlgebraVector::new(0.1, 0.0, 0.0)), DualVector::new(0.0, 1.0, 0.0));
    assert!(matches!(p.multiply(&p), Err(Error::Parameter(_))));
}

#[test]
fn coordinate_function_brackets() {
    let r = Retraction::cayley();
    let p = GroupoidPoint::new(
        DualVector::new(0.4, -0.3, 1.2),
        r.tau(&AlgebraVector::new(0.3, 0.2, -0.1)),
        DualVector::new(-0.6, 0.5, 0.2),
    );
    let xi = AlgebraVector::new(1.0, 0.5, -0.2);
    let xi2 = AlgebraVector::new(-0.3, 0.8, 0.4);
    let got = poisson_bracket(&lambda_only(xi), &lambda_only(xi2), &p);
    assert!((got - pairing(&p.lambda, &bracket(&xi, &xi2))).abs() <= 1e-14);
    assert!(poisson_bracket(&lambda_only(xi), &mu_only(xi2), &p).abs() <= 1e-14);
    let got = poisson_bracket(&mu_only(xi), &mu_only(xi2), &p);
    assert!((got + pairing(&p.mu, &bracket(&xi, &xi2))).abs() <= 1e-14);
}

#[test]
fn k_vanishes_on_the_identity_section() {
    let sys = &systems()[0];
    let p = GroupoidPoint::identity_of(DualVector::new(0.2, 0.4, -0.9));
    for r in [Retraction::exponential(), Retraction::cayley()] {
        assert_eq!(k_force(|m| sys.force_dual(m), &p, &r).unwrap(), 0.0);
    }
}

#[test]
fn k_outside_the_domain_is_a_domain_error() {
    let sys = &systems()[0];
    let r = Retraction::exponential();
    let half_turn = r.tau(&AlgebraVector::new(0.0, std::f64::consts::PI, 0.0));
    let p = GroupoidPoint::new(DualVector::new(1.0, 0.0, 0.0), half_turn, DualVector::new(0.0, 0.0, 1.0));
    assert!(matches!(k_force(|m| sys.force_dual(m), &p, &r), Err(Error::Domain(_))));
    assert!(hamiltonian_vector_field(sys, &p, &r).is_err());
}

#[test]
fn u_gradient_of_k_on_the_identity_section_is_minus_the_force() {
    let step = 1e-5;
    for sys in systems() {
        for r in [Retraction::exponential(), Retraction::cayley()] {
            let mu = DualVector::new(0.7, -0.4, 0.5);
            let p = GroupoidPoint::identity_of(mu);
            let mut fd = Vec3::zeros();
            for a in 0..3 {
                let k = |t: f64| {
                    let moved = GroupoidPoint::new(mu, r.tau(&(AlgebraVector::basis(a) * t)), mu);
                    k_force(|m| sys.force_dual(m), &moved, &r).unwrap()
                };
                fd[a] = (k(step) - k(-step)) / (2.0 * step);
            }
            assert!((fd + sys.force_dual(&mu).0).norm() <= 1e-9);
            let analytic = forced_hamiltonian_gradient(&sys, &p, &r).unwrap().d_u;
            assert!((analytic.0 + sys.force_dual(&mu).0).norm() <= 1e-12);
        }
    }
}

#[test]
fn free_field_on_the_identity_section() {
    let sys = free_rigid_body(INERTIA).unwrap();
    let r = Retraction::cayley();
    let mu = DualVector::new(0.3, 0.8, -0.5);
    let x = hamiltonian_vector_field(&sys, &GroupoidPoint::identity_of(mu), &r).unwrap();
    let expect = ad_star(&sys.legendre_inv(&mu), &mu);
    assert!(x.d_u.norm() <= 1e-15);
    assert!((x.d_lambda - expect).norm() <= 1e-14);
    assert!((x.d_mu - expect).norm() <= 1e-14);
}

#[test]
fn forcing_adds_the_dual_force_on_the_identity_section() {
    let free = free_rigid_body(INERTIA).unwrap();
    let r = Retraction::cayley();
    let mu = DualVector::new(0.3, 0.8, -0.5);
    let p = GroupoidPoint::identity_of(mu);
    let x0 = hamiltonian_vector_field(&free, &p, &r).unwrap();
    for sys in systems() {
        let x = hamiltonian_vector_field(&sys, &p, &r).unwrap();
        let f = sys.force_dual(&mu);
        assert!((x.d_lambda - x0.d_lambda - f).norm() <= 1e-13);
        assert!((x.d_mu - x0.d_mu - f).norm() <= 1e-13);
        assert!((x.d_u - x0.d_u).norm() <= 1e-13);
    }
}

proptest! {
    #[test]
    fn inverse_is_an_involution(p in point(Retraction::cayley())) {
        let back = p.inverse().inverse();
        prop_assert_eq!((back.lambda, back.mu), (p.lambda, p.mu));
        prop_assert!(back.u.distance(&p.u) <= 1e-14);
        prop_assert_eq!(p.inverse().source(), p.target());
    }

    #[test]
    fn multiplication_is_associative(p in point(Retraction::cayley()), x in v3(0.5), y in v3(0.5), m2 in v3(2.0), m3 in v3(2.0)) {
        let r = Retraction::cayley();
        let q = GroupoidPoint::new(p.mu, r.tau(&AlgebraVector(x)), DualVector(m2));
        let s = GroupoidPoint::new(DualVector(m2), r.tau(&AlgebraVector(y)), DualVector(m3));
        let left = p.multiply(&q).unwrap().multiply(&s).unwrap();
        let right = p.multiply(&q.multiply(&s).unwrap()).unwrap();
        prop_assert_eq!((left.lambda, left.mu), (right.lambda, right.mu));
        prop_assert!(left.u.distance(&right.u) <= 1e-14);
        prop_assert_eq!(left.lambda, p.lambda);
        prop_assert_eq!(left.mu, DualVector(m3));
        let unit = p.multiply(&GroupoidPoint::identity_of(p.mu)).unwrap();
        prop_assert!(unit.u.distance(&p.u) <= 1e-15);
    }

    #[test]
    fn bracket_is_antisymmetric_and_bilinear(ga in gradient(), gb in gradient(), gc in gradient(), a in -2.0..2.0f64, b in -2.0..2.0f64, p in point(Retraction::cayley())) {
        prop_assert!(poisson_bracket(&ga, &ga, &p).abs() <= 1e-12);
        prop_assert!((poisson_bracket(&ga, &gb, &p) + poisson_bracket(&gb, &ga, &p)).abs() <= 1e-12);
        let mix = ga.scaled(a).plus(&gb.scaled(b));
        let lhs = poisson_bracket(&mix, &gc, &p);
        let rhs = a * poisson_bracket(&ga, &gc, &p) + b * poisson_bracket(&gb, &gc, &p);
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn vector_field_reproduces_the_bracket(ga in gradient(), gb in gradient(), p in point(Retraction::cayley())) {
        // <dA, X_B> = {A, B}
        let x = vector_field_from_gradient(&gb, &p);
        let lhs = pairing(&x.d_lambda, &ga.d_lambda) + pairing(&ga.d_u, &x.d_u) + pairing(&x.d_mu, &ga.d_mu);
        prop_assert!((lhs - poisson_bracket(&ga, &gb, &p)).abs() <= 1e-12);
    }

    #[test]
    fn k_is_odd_under_inversion(r in retraction(), p in point(Retraction::cayley())) {
        prop_assume!(r.tau_inv(&p.u).unwrap().norm() <= 1.0);
        for sys in systems() {
            let k = k_force(|m| sys.force_dual(m), &p, &r).unwrap();
            let k_inv = k_force(|m| sys.force_dual(m), &p.inverse(), &r).unwrap();
            prop_assert!((k + k_inv).abs() <= 1e-12);
            let h = forced_hamiltonian(&sys, &p, &r).unwrap();
            prop_assert!((h + forced_hamiltonian(&sys, &p.inverse(), &r).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn analytic_gradient_matches_differences(r in retraction(), p in point(Retraction::cayley())) {
        let step = 1e-5;
        for sys in systems() {
            let g = forced_hamiltonian_gradient(&sys, &p, &r).unwrap();
            let h = |q: &GroupoidPoint| forced_hamiltonian(&sys, q, &r).unwrap();
            let scale = 1.0 + p.lambda.norm().max(p.mu.norm()).powi(3);
            for a in 0..3 {
                let d = Vec3::ith(a, step);
                let dl = (h(&GroupoidPoint::new(p.lambda + DualVector(d), p.u, p.mu))
                    - h(&GroupoidPoint::new(p.lambda - DualVector(d), p.u, p.mu))) / (2.0 * step);
                let dm = (h(&GroupoidPoint::new(p.lambda, p.u, p.mu + DualVector(d)))
                    - h(&GroupoidPoint::new(p.lambda, p.u, p.mu - DualVector(d)))) / (2.0 * step);
                let du = (h(&GroupoidPoint::new(p.lambda, &p.u * &r.tau(&AlgebraVector(d)), p.mu))
                    - h(&GroupoidPoint::new(p.lambda, &p.u * &r.tau(&AlgebraVector(-d)), p.mu))) / (2.0 * step);
                prop_assert!((dl - g.d_lambda[a]).abs() <= 1e-6 * scale);
                prop_assert!((dm - g.d_mu[a]).abs() <= 1e-6 * scale);
                prop_assert!((du - g.d_u[a]).abs() <= 1e-6 * scale);
            }
        }
    }

    #[test]
    fn identity_section_is_invariant(m in v3(3.0), r in retraction()) {
        let mu = DualVector(m);
        for sys in systems() {
            let x = hamiltonian_vector_field(&sys, &GroupoidPoint::identity_of(mu), &r).unwrap();
            prop_assert!(x.d_u.norm() <= 1e-10);
            prop_assert!((x.d_lambda - x.d_mu).norm() <= 1e-10);
            prop_assert!((x.d_mu - lie_poisson_rhs(&sys, &mu)).norm() <= 1e-8);
        }
    }
}
