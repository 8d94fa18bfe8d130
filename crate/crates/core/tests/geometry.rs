use proptest::prelude::*;
use shellstat_core::{
    canonical_mean_energy, canonical_probabilities, compare_distributions, feasible_interval_3,
    fit_beta, is_member, occupation_from_free, shell_vertices, EnergyShell, EnergySpectrum,
};

/// Strictly increasing levels in [-10, 10] with gaps of at least 0.1.
fn spectrum_strategy(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    n.prop_flat_map(|n| {
        (-10.0..0.0f64, prop::collection::vec(0.1..4.0f64, n - 1)).prop_map(|(start, gaps)| {
            let mut levels = vec![start];
            for g in gaps {
                let last = *levels.last().unwrap();
                levels.push(last + g);
            }
            levels
        })
    })
}

fn shell_strategy(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = EnergyShell> {
    (spectrum_strategy(n), 0.02..0.98f64).prop_map(|(levels, q)| {
        let s = EnergySpectrum::new(levels).unwrap();
        let (lo, hi) = s.bounds();
        EnergyShell::new(s, lo + q * (hi - lo)).unwrap()
    })
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn vertices_and_completions_are_members(shell in shell_strategy(3..=7), w in prop::collection::vec(0.0..1.0f64, 12)) {
        let verts = shell_vertices(&shell);
        prop_assert!(!verts.is_empty());
        for v in &verts {
            prop_assert!(is_member(&shell, v, 1e-9));
        }
        // Convex combination of vertices, re-completed from its free block.
        let weights: Vec<f64> = (0..verts.len()).map(|i| w[i % w.len()] + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let k = shell.free_dim();
        let free: Vec<f64> = (0..k)
            .map(|d| verts.iter().zip(&weights).map(|(v, wi)| v[d] * wi).sum::<f64>() / total)
            .collect();
        let p = occupation_from_free(&shell, &free).unwrap();
        prop_assert!(is_member(&shell, &p, 1e-9));
    }

    #[test]
    fn interval_matches_dense_grid(shell in shell_strategy(3..=3)) {
        let iv = feasible_interval_3(&shell).unwrap();
        let n = 4000;
        for i in 0..=n {
            let x = i as f64 / n as f64;
            if (x - iv.lo).abs() < 1e-9 || (x - iv.hi).abs() < 1e-9 {
                continue;
            }
            let ok = occupation_from_free(&shell, &[x]).is_ok();
            prop_assert_eq!(ok, iv.contains(x), "x = {}, interval = {:?}", x, iv);
        }
    }

    #[test]
    fn geometry_is_shift_and_scale_invariant(shell in shell_strategy(3..=6), shift in -50.0..50.0f64, scale in 0.1..20.0f64, t in 0.0..1.0f64) {
        let moved = shell.affine(shift, scale).unwrap();
        let va = shell_vertices(&shell);
        let vb = shell_vertices(&moved);
        prop_assert_eq!(va.len(), vb.len());
        for (a, b) in va.iter().zip(&vb) {
            prop_assert!(close(a.as_slice(), b.as_slice(), 1e-9));
        }
        if shell.n_levels() == 3 {
            let a = feasible_interval_3(&shell).unwrap();
            let b = feasible_interval_3(&moved).unwrap();
            prop_assert!((a.lo - b.lo).abs() < 1e-9 && (a.hi - b.hi).abs() < 1e-9);
        }
        // A point on the segment between the first and last vertex.
        let (first, last) = (&va[0], &va[va.len() - 1]);
        let free: Vec<f64> = (0..shell.free_dim()).map(|d| (1.0 - t) * first[d] + t * last[d]).collect();
        let pa = occupation_from_free(&shell, &free).unwrap();
        let pb = occupation_from_free(&moved, &free).unwrap();
        prop_assert!(close(pa.as_slice(), pb.as_slice(), 1e-9));
    }

    #[test]
    fn mean_energy_decreases_in_beta(levels in spectrum_strategy(2..=8)) {
        let s = EnergySpectrum::new(levels).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=80 {
            let beta = -4.0 + 0.1 * i as f64;
            let e = canonical_mean_energy(&s, beta).unwrap();
            prop_assert!(e < prev, "beta = {}: {} !< {}", beta, e, prev);
            prev = e;
        }
    }

    #[test]
    fn fit_recovers_beta(levels in spectrum_strategy(2..=6), beta0 in -2.0..2.0f64) {
        let tol = 1e-10;
        let s = EnergySpectrum::new(levels.iter().map(|e| e / 4.0).collect()).unwrap();
        let e = canonical_mean_energy(&s, beta0).unwrap();
        let shell = EnergyShell::new(s, e).unwrap();
        let fit = fit_beta(&shell, tol).unwrap();
        prop_assert!(fit.residual.abs() < tol);
        prop_assert!((fit.beta - beta0).abs() < 10.0 * tol, "beta0 {} fit {}", beta0, fit.beta);
    }

    #[test]
    fn fit_covariance(shell in shell_strategy(3..=6), shift in -50.0..50.0f64, scale in 0.1..20.0f64) {
        let a = fit_beta(&shell, 1e-10).unwrap();
        let shifted = fit_beta(&shell.affine(shift, 1.0).unwrap(), 1e-10).unwrap();
        let scaled = fit_beta(&shell.affine(0.0, scale).unwrap(), 1e-10).unwrap();
        prop_assert!((shifted.beta - a.beta).abs() < 1e-8 * (1.0 + a.beta.abs()));
        prop_assert!((scaled.beta - a.beta / scale).abs() < 1e-8 * (1.0 + a.beta.abs() / scale));
        prop_assert!(close(&shifted.probabilities, &a.probabilities, 1e-8));
        prop_assert!(close(&scaled.probabilities, &a.probabilities, 1e-8));
    }

    #[test]
    fn total_variation_identity(raw in prop::collection::vec((0.001..1.0f64, 0.001..1.0f64), 2..10)) {
        let (sa, sb): (f64, f64) = raw.iter().fold((0.0, 0.0), |(x, y), (a, b)| (x + a, y + b));
        let micro: Vec<f64> = raw.iter().map(|(a, _)| a / sa).collect();
        let canon: Vec<f64> = raw.iter().map(|(_, b)| b / sb).collect();
        let d = compare_distributions(&micro, &canon).unwrap();
        let via_rel: f64 = 0.5 * d.rel_diff.iter().zip(&canon).map(|(r, c)| r * c).sum::<f64>();
        prop_assert!((d.total_variation - via_rel).abs() < 1e-12);
        prop_assert!(d.total_variation <= 1.0 && d.kl_divergence >= 0.0);
        prop_assert_eq!(d.max_rel_diff, d.rel_diff.iter().copied().fold(0.0, f64::max));
    }
}

#[test]
fn two_level_shell_point() {
    for (lo, hi, e) in [(0.0, 1.0, 0.5), (-2.0, 2.0, 1.0), (3.0, 7.0, 3.5)] {
        let shell = EnergyShell::new(EnergySpectrum::new(vec![lo, hi]).unwrap(), e).unwrap();
        let v = shell_vertices(&shell);
        assert_eq!(v.len(), 1);
        assert!((v[0][0] - (hi - e) / (hi - lo)).abs() < 1e-15);
    }
}

#[test]
fn canonical_probabilities_are_normalised() {
    let s = EnergySpectrum::new(vec![-3.0, 0.0, 1.0, 7.5]).unwrap();
    for beta in [-50.0, -1.0, 0.0, 0.3, 12.0, 700.0] {
        let p = canonical_probabilities(&s, beta).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
    }
}
