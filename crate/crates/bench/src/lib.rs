//! Benchmark fixtures for the engine. The benchmarks themselves live in `benches/`.

use cantor_core::{make_oracle, GameConfig, Oracle, Rat, Side};

/// A dyadic window of width `2^-k` around `1/φ`. The continued fraction of
/// `1/φ` is all ones, so the least-index rational inside sits at
/// Stern–Brocot depth about `1.44 k`.
pub fn narrow_window(k: u32) -> (Rat, Rat) {
    let (mut f0, mut f1) = (Rat::one(), Rat::one());
    // F_n / F_{n+1} is within 1/F_n^2 of 1/φ; 2k steps is ample
    for _ in 0..2 * k + 4 {
        let f2 = &f0 + &f1;
        f0 = std::mem::replace(&mut f1, f2);
    }
    let scale = Rat::pow2_inv(k);
    let cells = Rat::new((f0 / &f1 / &scale).floor(), 1);
    let lo = cells * &scale;
    let hi = &lo + &scale;
    (lo, hi)
}

/// The oracles used for extraction benchmarks, by descriptor.
pub fn oracles() -> Vec<(String, Oracle)> {
    let config = GameConfig::unit();
    [("midpoint_A", Side::A), ("tree_chaser_A", Side::A), ("midpoint_B", Side::B), ("countable_killer_B", Side::B)]
        .into_iter()
        .map(|(d, s)| (d.to_string(), make_oracle(d, Some(s), &config).expect("built-in strategy")))
        .collect()
}
