use std::sync::Arc;

use bmclab_core::criterion::{criterion_value_of, inf_theta, phi, CriterionOptions, MeanVector};
use bmclab_core::kernel::{
    build_moment_kernel, convolve_n, Boundary, EnvironmentRealization, EnvironmentSpec,
    GeneratorSet, MomentKernel, OffspringVector, SiteLaw, Window,
};
use bmclab_core::spectral::{
    min_superharmonic_t, solve_frozen, spectral_radius_window, GreenSeries,
};
use proptest::prelude::*;

fn opts() -> CriterionOptions {
    CriterionOptions::default()
}

fn small_kernel() -> impl Strategy<Value = MomentKernel> {
    (1usize..6).prop_flat_map(|n| {
        prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..2.0], n * n).prop_map(move |vals| {
            let rows: Vec<Vec<f64>> = vals.chunks(n).map(|c| c.to_vec()).collect();
            MomentKernel::from_dense(&rows).unwrap()
        })
    })
}

/// Irreducible kernel: a random nonnegative matrix plus a positive cycle.
fn irreducible_kernel() -> impl Strategy<Value = MomentKernel> {
    (2usize..7).prop_flat_map(|n| {
        (
            prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.5], n * n),
            prop::collection::vec(0.1f64..1.5, n),
        )
            .prop_map(move |(vals, cyc)| {
                let mut rows: Vec<Vec<f64>> = vals.chunks(n).map(|c| c.to_vec()).collect();
                for i in 0..n {
                    rows[i][(i + 1) % n] += cyc[i];
                }
                MomentKernel::from_dense(&rows).unwrap()
            })
    })
}

/// A law on the 1-d nearest-neighbour steps `[+1, -1]` with 1..4 atoms.
fn law_1d() -> impl Strategy<Value = SiteLaw> {
    prop::collection::vec(((0u32..4, 0u32..4), 0.05f64..1.0), 1..5).prop_map(|atoms| {
        let z: f64 = atoms.iter().map(|a| a.1).sum();
        let atoms = atoms
            .into_iter()
            .map(|((u, d), p)| (OffspringVector::from_dense(&[u, d]), p / z))
            .collect();
        SiteLaw::new(2, atoms).unwrap()
    })
}

fn mean_1d() -> impl Strategy<Value = MeanVector> {
    (0.01f64..2.0, 0.01f64..2.0).prop_map(|(u, d)| MeanVector::nearest_neighbour_1d(u, d).unwrap())
}

fn assert_close(a: &MomentKernel, b: &MomentKernel, rel: f64) {
    let (da, db) = (a.to_dense(), b.to_dense());
    for (x, y) in da.iter().zip(db.iter()) {
        assert!((x - y).abs() <= rel * x.abs().max(y.abs()).max(1.0), "{x} vs {y}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semigroup_law(k in small_kernel(), a in 0u32..5, b in 0u32..5) {
        let lhs = convolve_n(&k, a + b);
        let rhs = convolve_n(&k, a).mul(&convolve_n(&k, b));
        assert_close(&lhs, &rhs, 1e-10);
    }

    #[test]
    fn stored_mean_matches_atoms(law in law_1d()) {
        for (m, r) in law.mean().iter().zip(law.recomputed_mean()) {
            prop_assert!((m - r).abs() <= 1e-12);
        }
    }

    #[test]
    fn absorbing_rows_conserve_mass(a in law_1d(), b in law_1d(), l in 1i64..6, seed in any::<u64>()) {
        let spec = Arc::new(EnvironmentSpec::relaxed(
            GeneratorSet::nearest_neighbour(1), vec![a, b], vec![0.5, 0.5], 1e-12,
        ).unwrap());
        let w = Window::new(1, l).unwrap();
        let env = spec.sample(w, seed).unwrap();
        let k = build_moment_kernel(&env, w, Boundary::Absorbing).unwrap();
        for r in 0..w.len() {
            let law = env.law_at_rank(r);
            prop_assert!((k.row_sum(r) - law.total_mean()).abs() <= 1e-12);
        }
    }

    #[test]
    fn irreducible_on_boxes_in_two_dimensions(l in 0i64..5, seed in any::<u64>()) {
        let g = GeneratorSet::nearest_neighbour(2);
        // every atom puts one child on each of the four neighbours
        let all = SiteLaw::deterministic(4, OffspringVector::from_dense(&[1, 1, 1, 1])).unwrap();
        let mixed = SiteLaw::new(4, vec![
            (OffspringVector::from_dense(&[1, 1, 1, 1]), 0.5),
            (OffspringVector::from_dense(&[2, 1, 1, 3]), 0.5),
        ]).unwrap();
        let spec = Arc::new(EnvironmentSpec::new(g, vec![all, mixed], vec![0.3, 0.7], 0.1).unwrap());
        let w = Window::new(2, l).unwrap();
        let env = spec.sample(w, seed).unwrap();
        let k = build_moment_kernel(&env, w, Boundary::Truncated).unwrap();
        prop_assert!(k.is_irreducible());
    }

    #[test]
    fn superharmonic_bisection_agrees_with_power_iteration(k in irreducible_kernel()) {
        let tol = 1e-10;
        let est = spectral_radius_window(&k, tol, 1_000_000).unwrap();
        prop_assume!(est.converged);
        let t = min_superharmonic_t(&k, tol).unwrap();
        // the residual bound controls the eigenvalue only up to the
        // conditioning of the Perron vector
        prop_assert!((t - est.value).abs() <= 1e-6 * est.value.max(1.0), "{t} vs {}", est.value);
    }

    #[test]
    fn eigen_residual_within_tolerance(k in irreducible_kernel()) {
        let est = spectral_radius_window(&k, 1e-10, 1_000_000).unwrap();
        prop_assert!(est.converged);
        let mv = k.apply(&est.vector);
        let norm = est.vector.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let res = mv.iter().zip(&est.vector)
            .fold(0.0f64, |a, (m, v)| a.max((m - est.value * v).abs())) / norm;
        prop_assert!(res <= 1e-10);
    }

    #[test]
    fn scaling_covariance(ms in prop::collection::vec(mean_1d(), 1..4), gamma in 0.1f64..10.0) {
        let c = criterion_value_of(&ms, opts()).unwrap().c;
        let scaled: Vec<MeanVector> = ms.iter().map(|m| m.scaled(gamma)).collect();
        let cs = criterion_value_of(&scaled, opts()).unwrap().c;
        prop_assert!((cs - gamma * c).abs() <= 1e-9 * gamma * c);
    }

    #[test]
    fn theta_zero_bound(ms in prop::collection::vec(mean_1d(), 1..4)) {
        let c = criterion_value_of(&ms, opts()).unwrap().c;
        let bound = ms.iter().map(|m| m.total()).fold(0.0, f64::max);
        prop_assert!(c <= bound + 1e-12);
    }

    #[test]
    fn symmetric_palettes_sit_at_theta_zero(masses in prop::collection::vec(0.01f64..2.0, 1..4)) {
        let ms: Vec<MeanVector> = masses.iter()
            .map(|&a| MeanVector::nearest_neighbour_1d(a, a).unwrap())
            .collect();
        let r = criterion_value_of(&ms, opts()).unwrap();
        let best = masses.iter().fold(0.0f64, |a, &m| a.max(2.0 * m));
        prop_assert!((r.c - best).abs() <= 1e-12 * best);
        prop_assert!(r.theta_star[0].abs() <= 1e-6);
        // each φ is even in θ, so its derivative vanishes at the origin
        for m in &ms {
            let h = 1e-6;
            let g = (phi(m, &[h]) - phi(m, &[-h])) / (2.0 * h);
            prop_assert!(g.abs() <= 1e-8);
        }
    }

    #[test]
    fn hull_points_do_not_change_c(
        ms in prop::collection::vec(mean_1d(), 2..4),
        w in prop::collection::vec(0.01f64..1.0, 4),
    ) {
        let c = criterion_value_of(&ms, opts()).unwrap().c;
        let refs: Vec<&MeanVector> = ms.iter().collect();
        let z: f64 = w[..ms.len()].iter().sum();
        let weights: Vec<f64> = w[..ms.len()].iter().map(|x| x / z).collect();
        let mut more = ms.clone();
        more.push(MeanVector::combination(&refs, &weights).unwrap());
        let c2 = criterion_value_of(&more, opts()).unwrap().c;
        prop_assert!((c - c2).abs() <= 1e-10 * c.max(1.0));
    }

    #[test]
    fn inf_theta_closed_form(u in 0.01f64..3.0, d in 0.01f64..3.0) {
        let r = inf_theta(&MeanVector::nearest_neighbour_1d(u, d).unwrap(), 1e-12).unwrap();
        prop_assert!((r.value - 2.0 * (u * d).sqrt()).abs() <= 1e-12 * r.value.max(1.0));
        prop_assert!((r.theta[0] - 0.5 * (d / u).ln()).abs() <= 1e-8);
    }
}

fn tridiagonal(p: f64, q: f64, l: i64, boundary: Boundary) -> MomentKernel {
    bmclab_core::kernel::homogeneous_kernel(
        &[vec![1], vec![-1]],
        &[p, q],
        Window::new(1, l).unwrap(),
        boundary,
    )
    .unwrap()
}

#[test]
fn common_growth_rate_across_pairs() {
    // steps [+1, -1, 0]; the self-loop makes the kernel aperiodic so that
    // every entry of M^64 is positive
    let g = GeneratorSet::new(1, vec![vec![1], vec![-1], vec![0]], &[vec![1], vec![-1]]).unwrap();
    let a = SiteLaw::new(
        3,
        vec![
            (OffspringVector::from_dense(&[1, 1, 1]), 0.6),
            (OffspringVector::from_dense(&[1, 1, 0]), 0.4),
        ],
    )
    .unwrap();
    let b = SiteLaw::new(
        3,
        vec![
            (OffspringVector::from_dense(&[2, 1, 1]), 0.5),
            (OffspringVector::from_dense(&[1, 2, 1]), 0.5),
        ],
    )
    .unwrap();
    let spec = Arc::new(EnvironmentSpec::relaxed(g, vec![a, b], vec![0.5, 0.5], 1e-12).unwrap());
    let w = Window::new(1, 2).unwrap();
    let env = spec.sample(w, 17).unwrap();
    let k = build_moment_kernel(&env, w, Boundary::Truncated).unwrap();
    assert!(k.is_irreducible());
    let rates: Vec<f64> = convolve_n(&k, 64)
        .triplets()
        .filter(|t| t.2 > 0.0)
        .map(|t| t.2.powf(1.0 / 64.0))
        .collect();
    assert_eq!(rates.len(), w.len() * w.len());
    let lo = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rates.iter().copied().fold(0.0, f64::max);
    assert!(hi / lo - 1.0 < 0.05, "rates spread over [{lo}, {hi}]");
}

#[test]
fn windowed_radius_is_monotone_in_the_box() {
    let spec = Arc::new(
        EnvironmentSpec::new(
            GeneratorSet::nearest_neighbour(1),
            vec![
                SiteLaw::branching_walk_with_mean(&[0.5, 0.5], 1.1).unwrap(),
                SiteLaw::branching_walk_with_mean(&[0.8, 0.2], 1.4).unwrap(),
            ],
            vec![0.6, 0.4],
            0.05,
        )
        .unwrap(),
    );
    let env: EnvironmentRealization = spec.sample(Window::new(1, 40).unwrap(), 5).unwrap();
    let mut prev = 0.0;
    for l in [1, 2, 5, 10, 20, 40] {
        let k = build_moment_kernel(&env, Window::new(1, l).unwrap(), Boundary::Truncated).unwrap();
        let v = spectral_radius_window(&k, 1e-11, 1_000_000).unwrap().value;
        assert!(v >= prev - 1e-10, "L={l}: {v} < {prev}");
        prev = v;
    }
}

#[test]
fn frozen_solution_matches_series() {
    let k = tridiagonal(0.5, 0.5, 2, Boundary::Absorbing);
    let delta = k.absorbing().unwrap();
    let t = 2.0;
    let sol = solve_frozen(&k, t).unwrap();
    assert!(sol.finite);
    for (&x, &f) in sol.interior.iter().zip(&sol.values) {
        let series = GreenSeries::compute(&k, x, delta, 60).unwrap().eval(1.0 / t).unwrap();
        assert!((f - series).abs() < 1e-8, "x={x}: {f} vs {series}");
    }
}

#[test]
fn green_function_counts_returns() {
    // Σ_{n≤20, n even} C(n, n/2) 2^{-n}
    let k = tridiagonal(0.5, 0.5, 30, Boundary::Truncated);
    let o = k.origin();
    let got = bmclab_core::spectral::green_partial(&k, o, o, 1.0, 20).unwrap();
    let mut want = 0.0;
    let mut c = 1.0f64;
    for j in 0..=10u32 {
        if j > 0 {
            c *= (2 * j) as f64 * (2 * j - 1) as f64 / (j as f64 * j as f64);
        }
        want += c * 0.5f64.powi(2 * j as i32);
    }
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
}
