use std::f64::consts::PI;

const RESCALE_ABOVE: f64 = 1e150;

/// Hermite functions `h_0(x) … h_{k_max}(x)`, orthonormal in `L²(ℝ)`.
///
/// Normalized so that `h_0(x) = 2^{1/4} e^{-πx²}` and
/// `√(k+1) h_{k+1} = 2√π x h_k − √k h_{k-1}`; with this choice the Bargmann
/// transform of `h_k` is `√(π^k/k!) z^k`.
///
/// The recurrence runs on the polynomial factor with a running power-of-ten
/// rescale and applies the Gaussian at the end, so values stay finite where
/// `e^{-πx²}` alone would underflow. Entries that are genuinely below the
/// double range come back as `0`.
pub fn hermite_block(k_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max + 1);
    let gauss_log = -PI * x * x;
    let gauss = gauss_log.exp();
    let two_sqrt_pi_x = 2.0 * PI.sqrt() * x;
    // h_k = p_k · exp(gauss_log + log_scale)
    let mut log_scale = 0.0f64;
    let mut prev = 0.0f64;
    let mut cur = 2f64.powf(0.25);
    out.push(cur * gauss);
    for k in 0..k_max {
        let kf = k as f64;
        let next = (two_sqrt_pi_x * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            prev /= RESCALE_ABOVE;
            cur /= RESCALE_ABOVE;
            log_scale += RESCALE_ABOVE.ln();
        }
        if log_scale == 0.0 && gauss > 0.0 {
            out.push(cur * gauss);
        } else {
            out.push(scaled(cur, gauss_log + log_scale));
        }
    }
    out
}

fn scaled(p: f64, log_factor: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    let l = p.abs().ln() + log_factor;
    p.signum() * l.exp()
}

/// Single Hermite function `h_k(x)`.
pub fn hermite(k: usize, x: f64) -> f64 {
    hermite_block(k, x)[k]
}
