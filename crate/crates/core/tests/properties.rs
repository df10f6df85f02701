use etc_core::grid::{gen_channels, gen_random_balls, RandomBalls};
use etc_core::preconditioner::{coefficient_stats, lp_optimum, ones_reference, solve_reference_lp, Bounds};
use etc_core::scalar::dot;
use etc_core::tpfa::{build_system, harmonic_mean};
use etc_core::transforms::{alpha, dct1d_ref_forward, fct_post_permute, fct_pre_permute, makhoul_index, SlabPlan};
use etc_core::{BoundaryConfig, CoefficientStats, GridSpec, OrthotropicField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn positive() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
}

fn field(max: usize) -> impl Strategy<Value = OrthotropicField> {
    (1..=max, 1..=max, 1..=max).prop_flat_map(|(nx, ny, nz)| {
        let n = nx * ny * nz;
        let arr = || prop::collection::vec(positive(), n);
        (arr(), arr(), arr(), 0.5f64..2.0, 0.5f64..2.0).prop_map(move |(a, b, c, ly, lz)| {
            OrthotropicField::new(GridSpec::new(nx, ny, nz, 1.0, ly, lz).unwrap(), a, b, c).unwrap()
        })
    })
}

fn stats() -> impl Strategy<Value = CoefficientStats> {
    prop::array::uniform5((positive(), 1.0f64..1e3, any::<bool>())).prop_map(|g| CoefficientStats {
        groups: g.map(|(min, ratio, absent)| if absent { None } else { Some(Bounds { min, max: min * ratio }) }),
    })
    .prop_filter("at least one group", |s| s.groups.iter().any(Option::is_some))
}

fn dct2_direct(u: &[f64], nx: usize, ny: usize) -> Vec<f64> {
    let mut out = u.to_vec();
    for row in out.chunks_mut(nx) {
        let r = dct1d_ref_forward(row);
        row.copy_from_slice(&r);
    }
    for i in 0..nx {
        let col: Vec<f64> = (0..ny).map(|j| out[j * nx + i]).collect();
        for (j, v) in dct1d_ref_forward(&col).into_iter().enumerate() {
            out[j * nx + i] = v;
        }
    }
    out
}

proptest! {
    #[test]
    fn harmonic_mean_bounds(a in positive(), b in positive()) {
        let h = harmonic_mean(a, b);
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(h >= lo * (1.0 - 1e-15) && h <= hi * (1.0 + 1e-15));
        prop_assert!(h <= 2.0 * lo * (1.0 + 1e-15));
        prop_assert_eq!(h, harmonic_mean(b, a));
    }

    #[test]
    fn operator_symmetric_positive(f in field(5), seed in any::<u64>()) {
        let sys = build_system(&f, BoundaryConfig::unit_z()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..sys.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..sys.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (mut au, mut av) = (vec![0.0; u.len()], vec![0.0; u.len()]);
        sys.apply(&u, &mut au).unwrap();
        sys.apply(&v, &mut av).unwrap();
        let (l, r) = (dot(&au, &v), dot(&u, &av));
        let scale = dot(&au, &au).sqrt() * dot(&v, &v).sqrt() + dot(&av, &av).sqrt() * dot(&u, &u).sqrt();
        prop_assert!((l - r).abs() <= 1e-12 * scale);
        prop_assert!(dot(&au, &u) > 0.0);
    }

    #[test]
    fn lp_feasible_and_optimal(s in stats()) {
        let p = solve_reference_lp(&s);
        for (g, r) in s.groups.iter().zip(p.refs()) {
            prop_assert!(r > 0.0 && r.is_finite());
            if let Some(b) = g {
                prop_assert!(p.lambda_lo * r <= b.min * (1.0 + 1e-12));
                prop_assert!(p.lambda_hi * r >= b.max * (1.0 - 1e-12));
            }
        }
        prop_assert!((p.objective().ln() - lp_optimum(&s)).abs() <= 1e-10 * (1.0 + lp_optimum(&s)));
        prop_assert!(p.objective() <= ones_reference(&s).objective() * (1.0 + 1e-12));
    }

    #[test]
    fn lp_scale_equivariant(s in stats(), c in positive()) {
        let (p, q) = (solve_reference_lp(&s), solve_reference_lp(&s.scaled(c)));
        for (a, b) in p.refs().iter().zip(q.refs()) {
            prop_assert!((a * c - b).abs() <= 1e-12 * b);
        }
        prop_assert!((p.objective() - q.objective()).abs() <= 1e-12 * p.objective());
    }

    #[test]
    fn fast_transform_matches_direct_sum(nx in 1usize..20, ny in 1usize..20, nz in 1usize..3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..nx * ny * nz).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let plan = SlabPlan::<f64>::new(nx, ny, nz).unwrap();
        let mut ws = plan.workspaces(2);
        let mut fast = u.clone();
        plan.forward_batch(&mut fast, &mut ws).unwrap();
        for (k, slice) in u.chunks(nx * ny).enumerate() {
            let direct = dct2_direct(slice, nx, ny);
            let scale = direct.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
            for (a, b) in fast[k * nx * ny..(k + 1) * nx * ny].iter().zip(&direct) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
            // Parseval: sum u^2 = 4/(nx ny) sum alpha_i alpha_j uhat^2
            let energy: f64 = slice.iter().map(|v| v * v).sum();
            let mut spectral = 0.0;
            for j in 0..ny {
                for i in 0..nx {
                    spectral += alpha(i) * alpha(j) * direct[j * nx + i].powi(2);
                }
            }
            spectral *= 4.0 / (nx * ny) as f64;
            prop_assert!((energy - spectral).abs() <= 1e-12 * energy.max(1e-300));
        }
        plan.backward_batch(&mut fast, &mut ws).unwrap();
        for (a, b) in fast.iter().zip(&u) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn reshuffle_is_a_bijection(nx in 1usize..40, ny in 1usize..40) {
        for n in [nx, ny] {
            let mut seen = vec![false; n];
            for m in 0..n {
                let s = makhoul_index(m, n);
                prop_assert!(s < n && !seen[s]);
                seen[s] = true;
            }
        }
        let v: Vec<usize> = (0..nx * ny).collect();
        let (mut w, mut back) = (vec![0; v.len()], vec![0; v.len()]);
        fct_pre_permute(&v, &mut w, nx, ny);
        fct_post_permute(&w, &mut back, nx, ny);
        prop_assert_eq!(back, v);
    }

    #[test]
    fn generators_are_pure(seed in any::<u64>(), count in 1usize..6, kappa in positive()) {
        let spec = RandomBalls { count, r_min: 0.05, r_max: 0.3, kappa_inc: kappa, seed };
        let a = gen_random_balls(10, &spec).unwrap();
        prop_assert_eq!(&a, &gen_random_balls(10, &spec).unwrap());
        prop_assert!(a.kx().iter().all(|&v| v == 1.0 || v == kappa));
        prop_assert_eq!(a.kx(), a.kz());
    }
}

/// Brute-force check of the closed-form reference parameters: no point of a
/// grid over log-space reference values does better than the closed form.
#[test]
fn lp_closed_form_beats_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let s = CoefficientStats {
            groups: std::array::from_fn(|_| {
                let min = 10f64.powf(rng.gen_range(-2.0..2.0));
                Some(Bounds { min, max: min * 10f64.powf(rng.gen_range(0.0..2.0)) })
            }),
        };
        let best = solve_reference_lp(&s);
        let centre = best.refs().map(f64::ln);
        let objective = |c: [f64; 5]| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for (g, ci) in s.groups.iter().zip(c) {
                let b = g.unwrap();
                lo = lo.min(b.min.ln() - ci);
                hi = hi.max(b.max.ln() - ci);
            }
            hi - lo
        };
        assert!((objective(centre) - best.objective().ln()).abs() < 1e-12);
        let steps = [-1.0, -0.3, -0.05, 0.0, 0.05, 0.3, 1.0];
        let mut idx = [0usize; 5];
        loop {
            let c: [f64; 5] = std::array::from_fn(|d| centre[d] + steps[idx[d]]);
            assert!(objective(c) >= objective(centre) - 1e-12);
            let mut d = 0;
            while d < 5 {
                idx[d] += 1;
                if idx[d] < steps.len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == 5 {
                break;
            }
        }
    }
}

#[test]
fn stats_come_from_the_faces() {
    let f = gen_channels(8, 2, 2.0).unwrap();
    let sys = build_system(&f, BoundaryConfig::unit_z()).unwrap();
    let s = coefficient_stats(&sys);
    let n2 = 16.0 * 16.0;
    let z = s.groups[2].unwrap();
    assert!((z.min - n2).abs() < 1e-9 && (z.max - 100.0 * n2).abs() < 1e-9);
    let inflow = s.groups[3].unwrap();
    assert!((inflow.min - n2).abs() < 1e-9 && (inflow.max - 100.0 * n2).abs() < 1e-9);
}
