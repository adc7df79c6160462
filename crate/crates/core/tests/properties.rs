//! Randomized checks of the structural invariants: transforms, inner
//! product, projections, media, solver constraints, boosts and field files.

use std::sync::Arc;

use canonform::catalog::{build_model, example_grid, example_params, model_dim, ParameterRecord, Profile, Tensor};
use canonform::cli::{decode_field, encode_field};
use canonform::field::{apply_medium, inner_product, random_bandlimited_field, ComponentField, MediumField, Representation};
use canonform::grid::{Axis, AxisRole, SpacetimeGrid};
use canonform::projections::{check_projection, family_by_name};
use canonform::solver::{krylov_solve, manufactured_problem, CanonicalProblem};
use canonform::transforms::{boost_acoustic, boost_coupled_acoustic, boost_coupled_elastic, boost_elastic, BoostSpec};
use canonform::transforms::{general_acoustic_l, CoupledAcousticL};
use canonform::{grid::DualPoint, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn role() -> impl Strategy<Value = AxisRole> {
    prop_oneof![Just(AxisRole::Spatial), Just(AxisRole::Momentum), Just(AxisRole::Time)]
}

/// One to three axes of mixed roles, at most one time axis.
fn grid() -> impl Strategy<Value = Arc<SpacetimeGrid>> {
    prop::collection::vec((1usize..7, 0.1f64..2.0, role()), 1..4)
        .prop_filter("one time axis at most", |axes| {
            axes.iter().filter(|a| a.2 == AxisRole::Time).count() <= 1
        })
        .prop_map(|axes| {
            Arc::new(SpacetimeGrid::new(axes.into_iter().map(|(n, h, r)| Axis::new(n, h, r)).collect()).unwrap())
        })
}

fn values(n: usize, seed: u64) -> Vec<C64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn field(grid: &Arc<SpacetimeGrid>, ncomp: usize, seed: u64) -> ComponentField {
    let labels = (0..ncomp).map(|i| format!("c{i}")).collect();
    ComponentField::new(grid.clone(), labels, values(grid.npts() * ncomp, seed), Representation::Real).unwrap()
}

fn dual(dim: usize, dim_p: usize) -> impl Strategy<Value = DualPoint> {
    (prop::collection::vec(-4.0f64..4.0, dim), prop::collection::vec(-4.0f64..4.0, dim_p), -4.0f64..4.0)
        .prop_map(|(k, kp, w)| DualPoint::new(k, kp, w))
}

const FAMILIES: [&str; 9] = ["G", "N", "S", "Y", "EM", "BGK", "Gs", "Kl", "Dp"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_round_trip_and_parseval(g in grid(), ncomp in 1usize..3, seed in any::<u64>()) {
        let f = field(&g, ncomp, seed);
        let d = f.to_dual();
        let back = d.to_real();
        let err = back.sub(&f).unwrap().norm() / f.norm();
        prop_assert!(err <= 1e-13, "round trip {err}");
        prop_assert!((d.norm() - f.norm()).abs() <= 1e-12 * f.norm());
        let zero = g.dual_coordinates(&vec![0; g.axes().len()]).unwrap();
        prop_assert!(zero.is_zero());
    }

    #[test]
    fn inner_product_is_positive_and_linear(g in grid(), seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let x = field(&g, 2, seed);
        let y = field(&g, 2, seed ^ 1);
        let z = field(&g, 2, seed ^ 2);
        prop_assert!(inner_product(&x, &x).unwrap().re > 0.0);
        let s = C64::new(a, b);
        let lhs = inner_product(&x, &y.scale(s).add(&z).unwrap()).unwrap();
        let rhs = s * inner_product(&x, &y).unwrap() + inner_product(&x, &z).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn medium_acts_pointwise(seed in any::<u64>(), p in 0usize..24) {
        let g = Arc::new(SpacetimeGrid::new(vec![Axis::spatial(4, 1.0), Axis::time(6, 0.5)]).unwrap());
        let l = MediumField::new(g.clone(), 2, values(g.npts() * 4, seed)).unwrap();
        let e = field(&g, 2, seed ^ 7);
        let mut vals = l.values().to_vec();
        for v in &mut vals[p * 4..(p + 1) * 4] {
            *v += C64::new(1.0, -0.5);
        }
        let l2 = MediumField::new(g.clone(), 2, vals).unwrap();
        let (a, b) = (apply_medium(&l, &e).unwrap(), apply_medium(&l2, &e).unwrap());
        for q in 0..g.npts() {
            prop_assert_eq!(a.point(q) == b.point(q), q != p);
        }
    }

    #[test]
    fn families_are_orthogonal_projections(name in prop::sample::select(FAMILIES.to_vec()), d in dual(3, 3)) {
        let f = family_by_name(name, 3, 3).unwrap();
        let r = check_projection(&f, std::slice::from_ref(&d));
        prop_assert!(r.hermiticity <= 1e-12 && r.idempotency <= 1e-12, "{r:?}");
        let p = f.eval(&d);
        let q = f.complement().eval(&d);
        prop_assert!((&p * &q).norm() <= 1e-12);
        if let Some(fact) = r.factorization {
            prop_assert!(fact <= 1e-12);
            let t = p.trace();
            prop_assert!(t.im.abs() <= 1e-10 && (t.re - t.re.round()).abs() <= 1e-10);
        }
    }

    #[test]
    fn field_identities_on_random_fields(id in prop::sample::select(vec!["acoustics", "em", "boussinesq", "nmr_bloch_torrey"]), seed in any::<u64>()) {
        let g = Arc::new(example_grid(id, &[4, 3], 6).unwrap());
        let m = build_model(id, g.clone(), &example_params(id, model_dim(id, &g).unwrap()).unwrap()).unwrap();
        let gamma = m.gamma.on_grid(&g);
        let a = field(&g, m.n(), seed).with_labels(m.e_labels()).unwrap();
        let b = field(&g, m.n(), seed ^ 3).with_labels(m.e_labels()).unwrap();
        let (ga, gb) = (gamma.apply(&a).unwrap(), gamma.apply(&b).unwrap());
        let sym = (inner_product(&a, &gb).unwrap() - inner_product(&ga, &b).unwrap()).norm();
        prop_assert!(sym <= 1e-10 * a.norm() * b.norm());
        let jb = b.sub(&gb).unwrap();
        prop_assert!(inner_product(&ga, &jb).unwrap().norm() <= 1e-10 * a.norm() * b.norm());
    }

    #[test]
    fn thermoelastic_last_flux_is_minus_its_source(seed in any::<u64>()) {
        let g = Arc::new(example_grid("thermoelasticity", &[3, 3], 4).unwrap());
        let m = build_model("thermoelasticity", g.clone(), &example_params("thermoelasticity", 2).unwrap()).unwrap();
        let e = field(&g, m.n(), seed).with_labels(m.e_labels()).unwrap();
        let s = field(&g, m.n(), seed ^ 5).with_labels(m.j_labels()).unwrap();
        let j = apply_medium(&m.medium, &e).unwrap().sub(&s).unwrap();
        let last = m.n() - 1;
        for p in 0..g.npts() {
            prop_assert_eq!(j.point(p)[last], -s.point(p)[last]);
        }
    }

    #[test]
    fn boost_group_law(w1 in prop::collection::vec(-2.0f64..2.0, 3), w2 in prop::collection::vec(-2.0f64..2.0, 3)) {
        let b1 = BoostSpec::new(&w1).unwrap();
        let b2 = BoostSpec::new(&w2).unwrap();
        let sum: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
        let b12 = BoostSpec::new(&sum).unwrap();
        let a = boost_acoustic(1.7, 0.6, &BoostSpec::new(&[0.0; 3]).unwrap()).unwrap();
        let lhs = boost_coupled_acoustic(&boost_coupled_acoustic(&a, &b1), &b2).matrix();
        let rhs = boost_coupled_acoustic(&a, &b12).matrix();
        prop_assert!((&lhs - &rhs).amax() <= 1e-14 * rhs.amax().max(1.0));
        let c = Tensor::isotropic_stiffness(3, 1.2, 0.7);
        let c = DMatrix::from_fn(9, 9, |i, j| c.at(i, j).re);
        let e = boost_elastic(&c, &DMatrix::identity(3, 3), &BoostSpec::new(&[0.0; 3]).unwrap()).unwrap();
        let lhs = boost_coupled_elastic(&boost_coupled_elastic(&e, &b1), &b2).matrix();
        let rhs = boost_coupled_elastic(&e, &b12).matrix();
        prop_assert!((&lhs - &rhs).amax() <= 1e-14 * rhs.amax().max(1.0));
    }

    #[test]
    fn boosts_preserve_signature(rho in 0.1f64..5.0, kappa in 0.1f64..5.0, w in prop::collection::vec(-1.5f64..1.5, 2)) {
        let b = boost_acoustic(rho, kappa, &BoostSpec::new(&w).unwrap()).unwrap();
        let ev = b.matrix().symmetric_eigen().eigenvalues;
        let neg = ev.iter().filter(|&&x| x < 0.0).count();
        let pos = ev.iter().filter(|&&x| x > 0.0).count();
        prop_assert_eq!((neg, pos), (2, 1));
        let g = Arc::new(SpacetimeGrid::new(vec![Axis::spatial(2, 1.0), Axis::spatial(2, 1.0), Axis::time(2, 1.0)]).unwrap());
        let m = general_acoustic_l(&g, 2, |_| CoupledAcousticL::new(b.rho.clone(), b.f.clone(), b.kappa_inv).unwrap()).unwrap();
        let expected: Vec<C64> = b.matrix().transpose().iter().map(|&x| C64::new(x, 0.0)).collect();
        prop_assert_eq!(m.at(3), &expected[..]);
    }

    #[test]
    fn field_file_round_trip_is_bitwise(g in grid(), ncomp in 1usize..3, seed in any::<u64>(), dual_repr in any::<bool>()) {
        let mut f = field(&g, ncomp, seed);
        if dual_repr {
            f = f.to_dual();
        }
        f.values_mut()[0] = C64::new(-0.0, f64::MIN_POSITIVE);
        let bytes = encode_field(&f).unwrap();
        let back = decode_field(&bytes).unwrap();
        prop_assert_eq!(encode_field(&back).unwrap(), bytes);
        prop_assert_eq!(back.representation(), f.representation());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn solved_fields_satisfy_the_constraint(seed in any::<u64>(), contrast in 0.0f64..0.4) {
        let g = Arc::new(SpacetimeGrid::new(vec![Axis::spatial(8, 0.25), Axis::time(8, 1.0)]).unwrap());
        let rec = ParameterRecord::new()
            .with("K", Tensor::identity(1))
            .with_real("alpha", 1.0)
            .modulate("K", contrast, Profile::Cosine { axis: 0, mode: 1 });
        let m = build_model("convective_diffusion", g, &rec).unwrap();
        let mp = manufactured_problem(&m, seed, 2).unwrap();
        let problem = CanonicalProblem::new(&m, mp.source.clone(), None).unwrap();
        let (e, r) = krylov_solve(&problem, 1e-10, 400).unwrap();
        prop_assert!(r.converged);
        prop_assert!(r.constraint_defect <= 1e-12);
        let gauge = random_bandlimited_field(m.grid(), m.n(), 2, seed ^ 9).unwrap();
        let j0 = m.gamma.complement().on_grid(m.grid()).apply(&gauge).unwrap().with_labels(m.j_labels()).unwrap();
        let shifted = CanonicalProblem::new(&m, mp.source.add(&j0).unwrap(), None).unwrap();
        let (e2, _) = krylov_solve(&shifted, 1e-10, 400).unwrap();
        prop_assert!(e2.sub(&e).unwrap().norm() <= 1e-9 * e.norm());
    }
}
