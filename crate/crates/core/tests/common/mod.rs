#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use twolayer::spectral::{Field, Grid};

/// Random trigonometric polynomial with modes up to `kmax` per axis and sup norm `amp`.
pub fn smooth_field(g: Grid, rng: &mut ChaCha8Rng, kmax: i32, amp: f64) -> Field {
    let ky_max = if g.dim() == 2 { kmax } else { 0 };
    let (lx, ly) = (g.length(0), if g.dim() == 2 { g.length(1) } else { 1.0 });
    let mut modes = Vec::new();
    for kx in 0..=kmax {
        for ky in -ky_max..=ky_max {
            if kx == 0 && ky <= 0 {
                continue;
            }
            let decay = 1.0 / (1.0 + (kx * kx + ky * ky) as f64);
            modes.push((kx as f64, ky as f64, decay * rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.3)));
        }
    }
    let tau = 2.0 * std::f64::consts::PI;
    let f = Field::from_fn(g, |x, y| {
        modes
            .iter()
            .map(|(kx, ky, a, ph)| a * (tau * (kx * x / lx + ky * y / ly) + ph).cos())
            .sum()
    });
    let m = f.sup_norm();
    f.scale(amp / m)
}

/// Relative difference in the discrete L2 norm.
pub fn rel_l2(a: &Field, b: &Field) -> f64 {
    (a - b).l2_norm() / b.l2_norm()
}
