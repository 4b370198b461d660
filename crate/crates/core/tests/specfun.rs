use std::f64::consts::{LN_2, PI};

use approx::assert_relative_eq;
use nlperim::specfun::{appell_h, harmonic_number, pochhammer, sphere_area, unit_ball_volume};
use proptest::prelude::*;

/// Double sum of the F4 series over `m, n < terms`, accumulated smallest terms first.
fn appell_brute(d: usize, t: f64, terms: usize) -> f64 {
    let b = (d as f64 + 2.0) / 2.0;
    let c = (d as f64 + 1.0) / 2.0;
    // term(m, n) = (3/2)_{m+n} (c)_{m+n} / ((b)_m (b)_n m! n!) t^{m+n}, built by ratios
    let mut row_start = 1.0f64;
    let mut all = Vec::with_capacity(terms * terms);
    for m in 0..terms {
        if m > 0 {
            let s = (m - 1) as f64;
            row_start *= (1.5 + s) * (c + s) / ((b + s) * m as f64) * t;
        }
        let mut term = row_start;
        for n in 0..terms {
            if n > 0 {
                let s = (m + n - 1) as f64;
                let k = (n - 1) as f64;
                term *= (1.5 + s) * (c + s) / ((b + k) * n as f64) * t;
            }
            all.push(term);
        }
    }
    all.sort_by(f64::total_cmp);
    all.iter().sum()
}

#[test]
fn harmonic_numbers() {
    assert_eq!(harmonic_number(0.0).unwrap(), 0.0);
    assert!((harmonic_number(0.5).unwrap() - (2.0 - 2.0 * LN_2)).abs() <= 1e-12);
    assert!((harmonic_number(1.0).unwrap() - 1.0).abs() <= 1e-12);
    assert!((harmonic_number(2.0).unwrap() - 1.5).abs() <= 1e-12);
    assert!((harmonic_number(10.0).unwrap() - 7381.0 / 2520.0).abs() <= 1e-12);
    assert!(harmonic_number(-0.5).is_err());
}

#[test]
fn pochhammer_values() {
    assert_eq!(pochhammer(1.5, 0), 1.0);
    assert_eq!(pochhammer(2.0, 3), 24.0);
    assert_eq!(pochhammer(0.5, 2), 0.75);
}

#[test]
fn appell_against_double_sum() {
    assert_eq!(appell_h(2, 0.0, 1e-15).unwrap().value, 1.0);
    for (d, t) in [(3usize, 0.1), (2, 0.1), (2, 0.2), (3, 0.0625), (1, 0.15)] {
        let series = appell_h(d, t, 1e-15).unwrap();
        let brute = appell_brute(d, t, 200);
        assert_relative_eq!(series.value, brute, max_relative = 1e-13);
        assert!(series.tail_bound <= 1e-14 * series.value);
    }
    // close to the singularity the diagonals are long and individually huge
    let near = appell_h(2, 0.24, 1e-15).unwrap();
    assert_relative_eq!(near.value, appell_brute(2, 0.24, 1500), max_relative = 1e-12);
    assert!(appell_h(2, 0.25, 1e-12).is_err());
}

#[test]
fn ball_and_sphere_constants() {
    assert_relative_eq!(unit_ball_volume(1), 2.0);
    assert_relative_eq!(unit_ball_volume(2), PI);
    assert_relative_eq!(unit_ball_volume(3), 4.0 * PI / 3.0);
    assert_relative_eq!(sphere_area(2), 2.0 * PI);
    assert_relative_eq!(sphere_area(3), 4.0 * PI);
}

proptest! {
    #[test]
    fn harmonic_recurrence(q in 0.0f64..20.0) {
        let lhs = harmonic_number(q + 1.0).unwrap();
        let rhs = harmonic_number(q).unwrap() + 1.0 / (q + 1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn harmonic_reflection_at_halves(k in 0u32..30) {
        // H_{k+1/2} = 2 - 2 ln 2 + Σ_{j=1}^k 1/(j + 1/2)
        let q = k as f64 + 0.5;
        let direct = 2.0 - 2.0 * LN_2 + (1..=k).map(|j| 1.0 / (j as f64 + 0.5)).sum::<f64>();
        prop_assert!((harmonic_number(q).unwrap() - direct).abs() <= 1e-12);
    }

    #[test]
    fn appell_is_increasing(d in 1usize..4, t in 0.0f64..0.2, dt in 1e-4f64..0.04) {
        let a = appell_h(d, t, 1e-15).unwrap().value;
        let b = appell_h(d, t + dt, 1e-15).unwrap().value;
        prop_assert!(b > a);
        prop_assert!(a >= 1.0);
    }

    #[test]
    fn pochhammer_recurrence(a in 0.1f64..5.0, n in 0u32..12) {
        let lhs = pochhammer(a, n + 1);
        let rhs = pochhammer(a, n) * (a + n as f64);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
    }
}
