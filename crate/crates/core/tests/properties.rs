use proptest::prelude::*;
use ripd_core::certificate::{chain_lemma, cutoff_function, radii_sequence, CertificateConfig};
use ripd_core::gain::GainFunction;
use ripd_core::*;

fn space_and_f() -> impl Strategy<Value = (MetricMeasureSpace, Vec<f64>)> {
    (2usize..25).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), n),
            prop::collection::vec(0.05f64..3.0, n),
            prop::collection::vec(prop::sample::select(vec![0.0, 1.0, 2.5, -1.0, 4.0, 0.3]), n),
        )
            .prop_filter_map("distinct points", |(pts, w, f)| MetricMeasureSpace::from_points(&pts, w).ok().map(|s| (s, f)))
    })
}

fn registry() -> Vec<RiSpace> {
    vec![
        RiSpace::Lp(1.0),
        RiSpace::Lp(2.0),
        RiSpace::Lp(3.5),
        RiSpace::Lp(f64::INFINITY),
        RiSpace::lorentz(2.0, 1.0).unwrap(),
        RiSpace::lorentz(3.0, 2.0).unwrap(),
        RiSpace::lorentz_zygmund(2.0, 2.0, 1.0).unwrap(),
        RiSpace::lorentz_zygmund(1.0, 1.0, 0.5).unwrap(),
        RiSpace::Orlicz(YoungFunction::Power(2.0)),
        RiSpace::Orlicz(YoungFunction::ExpMinusOne),
        RiSpace::Orlicz(YoungFunction::TLogAlpha(1.0)),
        RiSpace::marcinkiewicz(RiSpace::Lp(2.0)),
        RiSpace::lambda(RiSpace::Lp(2.0)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn equimeasurable((space, f) in space_and_f()) {
        let dist = distribution(&space, &f, None).unwrap();
        let u = decreasing_rearrangement(&space, &f, None).unwrap();
        for &t in dist.breaks() {
            let direct: f64 = f.iter().zip(space.weights()).filter(|(v, _)| v.abs() > t).map(|(_, w)| w).sum();
            prop_assert!((u.level_measure(t) - direct).abs() <= 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn permutation_invariant((space, f) in space_and_f(), seed in any::<u64>()) {
        let n = space.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let w: Vec<f64> = perm.iter().map(|&i| space.weights()[i]).collect();
        let g: Vec<f64> = perm.iter().map(|&i| f[i]).collect();
        let coords: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let other = MetricMeasureSpace::from_points(&coords, w).unwrap();
        let a = decreasing_rearrangement(&space, &f, None).unwrap();
        let b = decreasing_rearrangement(&other, &g, None).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn norms_homogeneous_and_monotone((space, f) in space_and_f(), c in 0.1f64..10.0) {
        let u = decreasing_rearrangement(&space, &f, None).unwrap();
        let bigger: Vec<f64> = f.iter().map(|v| v.abs() + 0.5).collect();
        let v = decreasing_rearrangement(&space, &bigger, None).unwrap();
        for x in registry() {
            let a = x.norm(&u).unwrap();
            let b = x.norm(&u.scaled(c)).unwrap();
            prop_assert!((b - c * a).abs() <= 1e-9 * (c * a).max(1e-300), "{x}: {b} vs {}", c * a);
            prop_assert!(x.norm(&v).unwrap() >= a * (1.0 - 1e-10), "{x}");
        }
    }

    #[test]
    fn indicator_norm_is_fundamental(t in 0.001f64..1.0) {
        let chi = StepFunction::indicator(t, 1.0, 1.0).unwrap();
        for x in registry() {
            let n = x.norm(&chi).unwrap();
            let phi = x.fundamental(t);
            prop_assert!((n - phi).abs() <= 1e-8 * phi, "{x}: {n} vs {phi}");
        }
    }

    #[test]
    fn local_norm_dominates_mean((space, f) in space_and_f(), center in 0usize..25, r in 0.5f64..8.0) {
        let center = center % space.len();
        let ball = Ball::open(center, r);
        let members = space.ball_members(&ball).unwrap();
        let mass: f64 = members.iter().map(|&i| space.weights()[i]).sum();
        let mean = members.iter().map(|&i| f[i].abs() * space.weights()[i]).sum::<f64>() / mass;
        for p in [1.0, 2.0, 4.0, f64::INFINITY] {
            let v = local_norm(&space, &f, &ball, &RiSpace::Lp(p)).unwrap();
            prop_assert!(v >= mean * (1.0 - 1e-12));
        }
    }

    #[test]
    fn marcinkiewicz_lambda_sandwich((space, f) in space_and_f(), p in 1.0f64..6.0) {
        let u = decreasing_rearrangement(&space, &f, None).unwrap();
        let lp = RiSpace::Lp(p).norm(&u).unwrap();
        let m = RiSpace::marcinkiewicz(RiSpace::Lp(p)).norm(&u).unwrap();
        let l = RiSpace::lambda(RiSpace::Lp(p)).norm(&u).unwrap();
        let conj = if p > 1.0 { p / (p - 1.0) } else { 1.0 };
        prop_assert!(m <= conj * lp * (1.0 + 1e-9));
        prop_assert!(lp <= l * (1.0 + 1e-9));
    }

    #[test]
    fn orlicz_two_paths((space, f) in space_and_f(), center in 0usize..25, r in 0.5f64..8.0, k in 0usize..4) {
        let a = [YoungFunction::Power(1.5), YoungFunction::ExpMinusOne, YoungFunction::TLogAlpha(2.0), YoungFunction::PowerLog { p: 2.0, alpha: 1.0 }][k];
        let ball = Ball::open(center % space.len(), r);
        let direct = norms::luxemburg_on_ball(&a, &space, &f, &ball).unwrap();
        let via = local_norm(&space, &f, &ball, &RiSpace::Orlicz(a)).unwrap();
        prop_assert!((direct - via).abs() <= 1e-8 * direct.max(1e-300));
    }

    #[test]
    fn radii_telescope(r in 0.1f64..10.0, eps in 0.3f64..2.0, count in 2usize..200) {
        let cfg = CertificateConfig::new(GainFunction::pow(eps).unwrap(), 1.0, 5).unwrap();
        let radii = radii_sequence(r, &cfg, count).unwrap();
        let sum: f64 = (1..count).map(|j| 1.0 / cfg.h(j as f64)).sum();
        let oracle = r / (2.0 * cfg.c1) * sum;
        prop_assert!((radii[0] - radii[count - 1] - oracle).abs() <= 1e-12 * r * count as f64);
        prop_assert!(radii.iter().all(|&x| x > r / 2.0));
    }

    #[test]
    fn cutoffs_are_lipschitz((space, _f) in space_and_f(), r in 0.5f64..6.0, j in 1usize..8) {
        let cfg = CertificateConfig::new(GainFunction::pow(1.0).unwrap(), 1.0, 10).unwrap();
        let radii = radii_sequence(r, &cfg, 10).unwrap();
        let f = cutoff_function(&space, 0, j, &radii).unwrap();
        let lip = 1.0 / (radii[j - 1] - radii[j]);
        for a in 0..space.len() {
            prop_assert!((0.0..=1.0).contains(&f[a]));
            for b in 0..space.len() {
                prop_assert!((f[a] - f[b]).abs() <= space.d(a, b) * lip * (1.0 + 1e-12) + 1e-15);
            }
        }
    }

    #[test]
    fn chain_lemma_holds(sigma in 1.1f64..5.0, ln_p in 0.0f64..40.0, frac in 0.0f64..1.0, j in 1usize..30, ln_c in -2.0f64..6.0) {
        let x = RiSpace::Lp(2.0 * sigma);
        let y = RiSpace::Lp(2.0);
        let g = GainFunction::psi_of(x.clone(), y.clone()).unwrap();
        // largest admissible measure ratio, scaled down
        let a_max = x.fundamental_inverse((-ln_p).exp()).unwrap().min(1.0);
        let a = (a_max * frac).max(f64::MIN_POSITIVE * 1e10);
        let lemma = chain_lemma(&x, &y, &g, ln_c.exp(), j, ln_p, a).unwrap();
        prop_assert!(lemma.porfin_holds && lemma.claim_holds);
        prop_assert!(lemma.holds(), "{lemma:?}");
    }
}

#[test]
fn registry_fundamentals_dominate_identity() {
    for x in registry() {
        for i in 1..1000 {
            let t = i as f64 / 1000.0;
            assert!(t <= x.fundamental(t) * (1.0 + 1e-12), "{x} at {t}");
        }
    }
}
