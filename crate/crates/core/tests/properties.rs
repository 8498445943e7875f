use cocktail_core::mi::{
    capacity, mi_binary_antipodal, mi_discrete_awgn, mixture_entropy, Constellation, NoiseSpec,
    QuadratureConfig,
};
use cocktail_core::scheme::{
    adr_paper, derive, low_snr_gap, mi_exact_layer1, mi_exact_total, CocktailParams,
};
use cocktail_core::sim::{
    ber_analytic_layer1, ber_analytic_layer2_genie, mi_monte_carlo, simulate, CancellationMode,
    SimConfig,
};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn constellation() -> impl Strategy<Value = Constellation> {
    prop::collection::vec((-4.0f64..4.0, 0.05f64..1.0), 1..6).prop_map(|pts| {
        let total: f64 = pts.iter().map(|(_, w)| w).sum();
        let (points, probs): (Vec<_>, Vec<_>) =
            pts.into_iter().map(|(x, w)| (x, w / total)).unzip();
        // Renormalize the last weight so the sum is 1 to within rounding.
        let mut probs = probs;
        let head: f64 = probs[..probs.len() - 1].iter().sum();
        *probs.last_mut().unwrap() = 1.0 - head;
        Constellation::new(points, probs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scale_invariance(c in constellation(), sigma2 in 0.05f64..4.0, s in 0.2f64..5.0) {
        let noise = NoiseSpec::new(sigma2).unwrap();
        let base = mi_discrete_awgn(&c, noise, &q()).unwrap().value_bits;
        let scaled_noise = NoiseSpec::new(sigma2 * s * s).unwrap();
        let scaled = mi_discrete_awgn(&c.scaled(s).unwrap(), scaled_noise, &q()).unwrap().value_bits;
        prop_assert!((base - scaled).abs() <= 2.0 * TOL, "{base} vs {scaled}");
    }

    #[test]
    fn negation_symmetry(c in constellation(), sigma2 in 0.05f64..4.0) {
        let noise = NoiseSpec::new(sigma2).unwrap();
        let h = mixture_entropy(&c, noise, &q()).unwrap().value_bits;
        let hn = mixture_entropy(&c.scaled(-1.0).unwrap(), noise, &q()).unwrap().value_bits;
        prop_assert!((h - hn).abs() <= 2.0 * TOL);
    }

    #[test]
    fn capacity_and_cardinality_bounds(c in constellation(), sigma2 in 0.01f64..10.0) {
        let noise = NoiseSpec::new(sigma2).unwrap();
        let mi = mi_discrete_awgn(&c, noise, &q()).unwrap();
        prop_assert!(mi.value_bits >= -mi.est_error_bits - TOL);
        prop_assert!(mi.est_error_bits <= TOL);
        // Real channel: the complex-baseband form log₂(1+snr) bounds it too.
        let cap = capacity(c.energy() / sigma2).unwrap();
        prop_assert!(mi.value_bits <= cap + TOL);
        prop_assert!(mi.value_bits <= 0.5 * (1.0 + c.energy() / sigma2).log2() + TOL);
        prop_assert!(mi.value_bits <= (c.distinct_points() as f64).log2() + TOL);
    }

    #[test]
    fn scheme_energy_accounting(ratio in 0.01f64..0.99, alpha in 0.1f64..10.0, sigma2 in 0.01f64..100.0) {
        let params = CocktailParams::new(alpha, ratio * alpha).unwrap();
        let d = derive(&params, NoiseSpec::new(sigma2).unwrap());
        prop_assert!(d.a1 > d.a2 && d.a2 > 0.0);
        prop_assert!((0.5 * d.a1 * d.a1 + 0.5 * d.a2 * d.a2 - d.e_in).abs() <= 1e-12 * d.e_in.max(1.0));
        prop_assert_eq!(d.g_e, d.e_used - d.e_in);
        prop_assert!((d.g_e - params.beta().powi(2)).abs() <= 1e-12 * d.e_used.max(1.0));
        prop_assert!((d.gamma - (d.gamma1 + d.gamma2) / 2.0).abs() <= 1e-12 * d.gamma.max(1.0));
    }

    #[test]
    fn scheme_information_identities(ratio in 0.02f64..0.98, snr in 0.001f64..20.0) {
        let params = CocktailParams::unit_energy(ratio).unwrap();
        let noise = params.noise_for_snr(snr).unwrap();
        let adr = adr_paper(&params, noise, &q()).unwrap();
        prop_assert!(adr.exact_total_bits <= adr.capacity_bits + 2.0 * TOL);
        prop_assert!(adr.layer1_bits >= adr.exact_layer1_bits - 2.0 * TOL);
        prop_assert!((adr.total_bits - adr.layer1_bits - adr.layer2_bits).abs() <= 1e-12);

        let layer2 = mi_binary_antipodal(derive(&params, noise).gamma3, &q()).unwrap();
        let total = mi_exact_total(&params, noise, &q()).unwrap();
        let layer1 = mi_exact_layer1(&params, noise, &q()).unwrap();
        prop_assert!((total - (layer1 + layer2)).abs() <= 2.0 * TOL);
        prop_assert_eq!(total, adr.exact_total_bits);
    }

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>(), n in 1u64..5000, dd in any::<bool>()) {
        let params = CocktailParams::new(1.0, 0.6).unwrap();
        let noise = NoiseSpec::new(0.5).unwrap();
        let mode = if dd { CancellationMode::DecisionDirected } else { CancellationMode::Genie };
        let cfg = SimConfig::new(n, seed, mode).unwrap();
        let a = simulate(&params, noise, &cfg);
        prop_assert_eq!(a, simulate(&params, noise, &cfg));
        prop_assert!(a.errors_layer1 <= n && a.errors_layer2 <= n);
        prop_assert_eq!(a.errors_layer2, (a.ber_layer2 * n as f64).round() as u64);
    }
}

#[test]
fn binary_antipodal_is_monotone() {
    let grid: Vec<f64> = (0..=200).map(|k| 0.05 * k as f64).collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|&s| mi_binary_antipodal(s, &q()).unwrap())
        .collect();
    for (w, s) in values.windows(2).zip(&grid[1..]) {
        assert!(w[1] - w[0] >= -2.0 * TOL, "dip at snr {s}");
        assert!(w[1] <= 1.0f64.min(capacity(*s).unwrap()) + TOL);
    }
}

// The layered rate's excess over capacity approaches (β²/σ²)·log₂e, and its
// layer-1 part approaches capacity.
#[test]
fn low_snr_consistency_of_the_layered_rate() {
    for ratio in [0.3, 0.7, 0.9] {
        let params = CocktailParams::unit_energy(ratio).unwrap();
        for (snr, tol) in [(1e-3, 0.05), (1e-4, 0.01)] {
            let noise = params.noise_for_snr(snr).unwrap();
            let adr = adr_paper(&params, noise, &q()).unwrap();
            let rel = adr.gap_paper() / low_snr_gap(&params, noise);
            assert!((rel - 1.0).abs() <= tol, "ratio {ratio}, snr {snr}: {rel}");
            let eq1 = adr.layer1_bits / adr.capacity_bits;
            assert!((eq1 - 1.0).abs() <= tol, "ratio {ratio}, snr {snr}: {eq1}");
        }
    }
}

#[test]
fn sampling_error_shrinks_with_sample_count() {
    let c = CocktailParams::new(1.0, 0.7).unwrap().constellation();
    let noise = NoiseSpec::new(1.0).unwrap();
    let truth = mi_discrete_awgn(&c, noise, &q()).unwrap().value_bits;
    let mean_abs_err = |n: u64| {
        (0..10)
            .map(|seed| (mi_monte_carlo(&c, noise, n, 100 + seed).unwrap() - truth).abs())
            .sum::<f64>()
            / 10.0
    };
    let errs: Vec<f64> = [10_000, 100_000, 1_000_000].map(mean_abs_err).to_vec();
    assert!(errs[0] >= errs[1] && errs[1] >= errs[2], "{errs:?}");
}

#[test]
fn genie_layer2_matches_plain_bpsk() {
    let params = CocktailParams::new(1.0, 0.4).unwrap();
    let noise = NoiseSpec::new(0.36).unwrap();
    let cfg = SimConfig::new(1_000_000, 77, CancellationMode::Genie).unwrap();
    let r = simulate(&params, noise, &cfg);
    let want2 = ber_analytic_layer2_genie(&params, noise);
    assert!((r.ber_layer2 - want2).abs() <= 4.0 * r.stderr_ber2);
    // Sign detection on the first layer is never significantly worse than its analytic rate.
    assert!(r.ber_layer1 <= ber_analytic_layer1(&params, noise) + 4.0 * r.stderr_ber1);
}

#[test]
fn sample_mi_in_report_tracks_quadrature() {
    let params = CocktailParams::new(1.0, 0.7).unwrap();
    let noise = NoiseSpec::new(1.0).unwrap();
    let cfg = SimConfig::new(2_000_000, 5, CancellationMode::Genie).unwrap();
    let r = simulate(&params, noise, &cfg);
    let quad = mi_discrete_awgn(&params.constellation(), noise, &q()).unwrap().value_bits;
    assert!((r.mi_sample_total_bits - quad).abs() < 2e-3);
}
