//! Log-domain binomial weights.
//!
//! `(2S)!` overflows an `f64` once `S` passes ~85, and even `ln Γ` differences
//! lose ~`log10(S ln S)` digits to cancellation. The symmetric binomial
//! weight is therefore evaluated through the Stirling remainder and the
//! deviance `bd0`, which keeps full relative precision for `S` in the
//! thousands.

use std::f64::consts::PI;

/// `ln Γ(n+1) - [(n + 1/2) ln n - n + ln √(2π)]` at integers 1..=15.
#[allow(clippy::excessive_precision)]
const STIRLERR_TABLE: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_22,
    0.041_340_695_955_409_294_09,
    0.027_677_925_684_998_339_15,
    0.020_790_672_103_765_093_11,
    0.016_644_691_189_821_192_16,
    0.013_876_128_823_070_747_99,
    0.011_896_709_945_891_770_10,
    0.010_411_265_261_972_096_50,
    0.009_255_462_182_712_732_918,
    0.008_330_563_433_362_871_256,
    0.007_573_675_487_951_840_795,
    0.006_942_840_107_209_529_866,
    0.006_408_994_188_004_207_068,
    0.005_951_370_112_758_847_736,
    0.005_554_733_551_962_801_371,
];

/// Stirling-series remainder of `ln n!` for integer `n >= 1`.
pub fn stirlerr(n: u64) -> f64 {
    if n < STIRLERR_TABLE.len() as u64 {
        return STIRLERR_TABLE[n as usize];
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let n = n as f64;
    let nn = 1.0 / (n * n);
    (S0 - (S1 - (S2 - (S3 - S4 * nn) * nn) * nn) * nn) / n
}

/// Deviance term `x ln(x/np) + np - x`, evaluated without cancellation when
/// `x` is close to `np`.
pub fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `ln n!` for integer `n`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let x = n as f64;
    stirlerr(n) + (x + 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln()
}

/// `ln[ C(n, k) 2^-n ]`, the log probability of `k` successes in `n` fair
/// trials.
pub fn ln_binomial_half(n: u64, k: u64) -> f64 {
    assert!(k <= n, "k = {k} exceeds n = {n}");
    let half_ln = -std::f64::consts::LN_2;
    if k == 0 || k == n {
        return n as f64 * half_ln;
    }
    let nf = n as f64;
    let kf = k as f64;
    let mean = 0.5 * nf;
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(kf, mean) - bd0(nf - kf, mean);
    let lf = (2.0 * PI).ln() + kf.ln() + (-kf / nf).ln_1p();
    lc - 0.5 * lf
}
