#![no_main]

// Bytes decode as little-endian f64 pairs (point, weight) plus a final
// noise variance; accepted inputs go through the entropy integrator.

use cocktail_core::mi::{mi_discrete_awgn, Constellation, NoiseSpec, QuadratureConfig};
use libfuzzer_sys::fuzz_target;

fn f64s(data: &[u8]) -> Vec<f64> {
    data.chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

fuzz_target!(|data: &[u8]| {
    let values = f64s(data);
    if values.len() < 3 {
        return;
    }
    let (sigma2, pairs) = values.split_last().unwrap();
    let pairs: Vec<(f64, f64)> = pairs.chunks_exact(2).take(8).map(|c| (c[0], c[1].abs())).collect();
    if pairs.is_empty() {
        return;
    }
    let total: f64 = pairs.iter().map(|(_, w)| w).sum();
    let points = pairs.iter().map(|(x, _)| *x).collect();
    let probs = pairs.iter().map(|(_, w)| w / total).collect();
    let (Ok(c), Ok(noise)) = (Constellation::new(points, probs), NoiseSpec::new(*sigma2)) else {
        return;
    };
    let q = QuadratureConfig {
        abs_tol: 1e-6,
        max_refinements: 4,
        tail_sigmas: 8.0,
    };
    if let Ok(mi) = mi_discrete_awgn(&c, noise, &q) {
        assert!(mi.value_bits.is_finite());
        assert!(mi.value_bits <= (c.len() as f64).log2() + 1e-3);
    }
});
