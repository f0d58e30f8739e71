use linflow::currents::{evaluate_curve, evaluate_family, Battery};
use linflow::curves::{boundary_multiset, concatenate, find_retraced_arc, maximal_excision, reverse};
use linflow::linearization::Linearizer;
use linflow::precise::circle_offset;
use linflow::sampling::{self, planted_family, random_path, random_point, random_trig_poly};
use linflow::spectral::exterior_derivative;
use linflow::torus_flow::{flow, DirectionVector};
use proptest::prelude::*;

fn torus_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| circle_offset(u - v).abs()).fold(0.0, f64::max)
}

fn golden_linearizer() -> Linearizer {
    Linearizer::at_origin(DirectionVector::golden(), 2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn path_independence_modulo_loops(seed in any::<u64>()) {
        let lin = golden_linearizer();
        let mut rng = sampling::rng(seed);
        let x = lin.basepoint().clone();
        let y = random_point(&mut rng, 2);
        let g1 = random_path(&mut rng, &x, &y, 3, 1, lin.alpha());
        let g2 = random_path(&mut rng, &x, &y, 2, 2, lin.alpha());
        let p1 = lin.linearize(&y, &g1).unwrap();
        let p2 = lin.linearize(&y, &g2).unwrap();
        let closing = concatenate(&g1, &reverse(&g2)).unwrap();
        prop_assert!(closing.is_closed());
        for (f, (a, b)) in lin.battery().forms().iter().zip(p1.evaluations().iter().zip(p2.evaluations())) {
            prop_assert!((a - b - evaluate_curve(&closing, &f.form)).abs() < 1e-10, "{}", f.id);
        }
    }

    #[test]
    fn albanese_semiconjugacy(seed in any::<u64>(), t in -20.0f64..20.0) {
        let lin = golden_linearizer();
        let mut rng = sampling::rng(seed);
        let x = lin.basepoint().clone();
        let y = random_point(&mut rng, 2);
        let p = lin.linearize(&y, &random_path(&mut rng, &x, &y, 2, 1, lin.alpha())).unwrap();
        let q = lin.advance(&p, t).unwrap();
        let moved: Vec<f64> = lin.albanese(&p).coords.iter().zip(lin.alpha().alpha()).map(|(c, a)| c + t * a).collect();
        prop_assert!(torus_gap(&lin.albanese(&q).coords, &moved) < 1e-9);
        prop_assert!(torus_gap(&lin.albanese(&q).coords, flow(&y, t, lin.alpha()).coords()) < 1e-9);
    }

    #[test]
    fn generator_projects_to_the_flow(t in -50.0f64..50.0) {
        let lin = golden_linearizer();
        let c = lin.generator().unwrap();
        let projected: Vec<f64> = (1..=2).map(|j| c.value(&format!("dx{j}")).unwrap() * t).collect();
        let x = lin.basepoint().clone();
        prop_assert!(torus_gap(&projected, flow(&x, t, lin.alpha()).coords()) < 1e-9);
    }

    #[test]
    fn exact_forms_are_invisible_to_linearization(seed in any::<u64>()) {
        let lin = golden_linearizer();
        let mut rng = sampling::rng(seed);
        let x = lin.basepoint().clone();
        let y = random_point(&mut rng, 2);
        let p = lin.linearize(&y, &random_path(&mut rng, &x, &y, 3, 1, lin.alpha())).unwrap();
        let df = exterior_derivative(&random_trig_poly(&mut rng, 2, 4, 5, 0.3));
        let v = linflow::currents::evaluate_twisted(p.representative(), &df).unwrap();
        prop_assert!(v.abs() < 1e-10);
    }

    #[test]
    fn maximal_excision_is_idempotent(seed in any::<u64>()) {
        let alpha = DirectionVector::golden();
        let mut rng = sampling::rng(seed);
        let family = planted_family(&mut rng, &alpha);
        let once = maximal_excision(&family);
        prop_assert!(find_retraced_arc(&once).is_none());
        prop_assert_eq!(maximal_excision(&once), once.clone());
        prop_assert!(boundary_multiset(&once).same_as(&boundary_multiset(&family)));
        prop_assert!(once.total_length() <= family.total_length() + 1e-12);
        let battery = Battery::standard(2, 2);
        for f in battery.forms() {
            let gap = evaluate_family(&family.curves, &f.form) - evaluate_family(&once.curves, &f.form);
            prop_assert!(gap.abs() < 1e-9);
        }
    }
}
