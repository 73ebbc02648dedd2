//! Incoherence of illumination matrices: σ_∞,min, its closed 2×2 form, the
//! singular-value lower bound, and why duplicating a frame buys nothing.
//!
//! ```text
//! cargo run --example incoherence
//! ```

use num_complex::Complex64;
use srlab::incoherence::{
    duplicate_row_invariance_check, sigma_inf_min, sigma_inf_min_2x2, svd_lower_bound,
};
use srlab::linalg::CMat;

fn main() {
    println!("σ_∞,min(A) = min over ‖x‖_∞ ≥ 1 of ‖Ax‖_∞\n");

    // The correlated 2×2 family [[1,s],[s,1]] has the closed form 1−s.
    println!("  s    solver      closed form   σ_min/√T");
    for i in 0..=10 {
        let s = i as f64 / 10.0;
        let a = CMat::from_real(&[vec![1.0, s], vec![s, 1.0]]);
        let rep = sigma_inf_min(&a, 1e-6).unwrap();
        println!(
            "  {s:.1}  {:.8}  {:.8}    {:.6}",
            rep.value,
            sigma_inf_min_2x2(s).unwrap(),
            rep.lower_bound_svd
        );
    }

    // A complex matrix: the minimizer absorbs column phases.
    let a = CMat::from_rows(&[
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.6)],
        vec![Complex64::new(0.2, -0.4), Complex64::new(0.9, 0.1)],
        vec![Complex64::new(-0.5, 0.2), Complex64::new(0.4, 0.4)],
    ]);
    let rep = sigma_inf_min(&a, 1e-6).unwrap();
    println!("\nrandom-ish 3×2 complex matrix:");
    println!("  σ_∞,min      = {:.8}", rep.value);
    println!("  σ_min/√T     = {:.8}  (always a lower bound)", svd_lower_bound(&a));
    println!(
        "  argmin       = [{:.4}{:+.4}i, {:.4}{:+.4}i] with ‖x‖_∞ = 1",
        rep.argmin[0].re, rep.argmin[0].im, rep.argmin[1].re, rep.argmin[1].im
    );

    // Repeating a pattern cannot improve the value.
    let base = CMat::from_real(&[vec![1.0, 0.7], vec![0.7, 1.0]]);
    println!(
        "\nduplicating the last illumination row leaves σ_∞,min unchanged: {}",
        duplicate_row_invariance_check(&base, 1e-6).unwrap()
    );
}
