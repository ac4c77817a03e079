//! Theoretical bounds written to the `bound` column, evaluated per row.

use semidiag::symfun::SpaceSpec;

fn pow2(e: f64) -> f64 {
    e.exp2()
}

/// `‖[p_m, α(j)]‖_∞ ≤ 2^{-m}`.
pub fn comm_inf(m: u32) -> f64 {
    pow2(-(m as f64))
}

/// `τ(p_m) ≤ 2^{mn} τ(q)`.
pub fn trace(m: u32, n: usize, tau_q: f64) -> f64 {
    pow2((m as usize * n) as f64) * tau_q
}

/// `‖[p_m, α(j)]‖_E ≤ max{2τ(q), 1} 2^{-m} φ_E(2^{mn})`.
pub fn comm_space(space: &SpaceSpec, m: u32, n: usize, tau_q: f64) -> f64 {
    let t = pow2((m as usize * n) as f64);
    let phi = if t.is_finite() { space.fundamental(t) } else { f64::INFINITY };
    (2.0 * tau_q).max(1.0) * pow2(-(m as f64)) * phi
}

/// `‖[a, q_k]‖ ≤ 2^{-k}`.
pub fn appendix_comm(k: u32) -> f64 {
    pow2(-(k as f64))
}

/// `‖a − a_k‖ ≤ 2^{2-k}`.
pub fn appendix_step1(k: u32) -> f64 {
    pow2(2.0 - k as f64)
}

/// `‖a − d_k‖ ≤ 2^{3-k}`.
pub fn appendix_residual(k: u32) -> f64 {
    pow2(3.0 - k as f64)
}

/// Tuple construction residual `3^n ε`.
pub fn tuple_residual(n: usize, epsilon: f64) -> f64 {
    3f64.powi(n as i32) * epsilon
}
