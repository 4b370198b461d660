mod common;

use std::f64::consts::{E, PI};

use approx::assert_relative_eq;
use nlperim::kernels::Kernel;
use nlperim::Error;
use proptest::prelude::*;

use common::{midpoint, simpson};

/// `ω_{d-1} ∫_lo^1 K(t) t^{d-1} dt` in the variable `u = ln t`.
fn mass_oracle(k: &Kernel, lo: f64) -> f64 {
    let d = k.dimension as i32;
    let omega = match d {
        1 => 1.0,
        2 => 2.0,
        _ => PI,
    };
    omega * midpoint(|u| k.value(u.exp()).unwrap() * u.exp().powi(d), lo.ln(), 0.0, 200_000)
}

#[test]
fn kernel_values() {
    let k = Kernel::power_cutoff(0.1, 2).unwrap();
    assert_eq!(k.value(0.5).unwrap(), 4.0);
    assert_eq!(k.value(0.05).unwrap(), 0.0);
    assert_eq!(Kernel::fractional_shift(0.5, 2).unwrap().value(1.0).unwrap(), 1.0);
    assert!(matches!(k.value(-1.0), Err(Error::Domain(_))));
}

#[test]
fn mollifier_masses() {
    let k = Kernel::power_cutoff((-1.0f64).exp(), 2).unwrap();
    assert_relative_eq!(k.mollifier_mass().unwrap(), 2.0, max_relative = 1e-13);
    assert_relative_eq!(mass_oracle(&k, k.epsilon), 2.0, max_relative = 1e-9);

    let f = Kernel::fractional_shift(0.5, 2).unwrap();
    assert_relative_eq!(f.mollifier_mass().unwrap(), 4.0, max_relative = 1e-13);
    // ∫ t^{ε-1} over (δ, 1) misses δ^ε/ε of the mass
    let delta = 1e-12f64;
    assert_relative_eq!(mass_oracle(&f, delta) + 2.0 * delta.sqrt() / 0.5, 4.0, max_relative = 1e-8);

    assert_eq!(Kernel::power_cutoff(1.0, 2).unwrap().mollifier_mass().unwrap(), 0.0);
    assert!(Kernel::power_cutoff(0.0, 2).unwrap().mollifier_mass().unwrap_err().is_divergent());
}

#[test]
fn mass_grows_without_bound() {
    for bound in [10.0, 100.0, 1000.0] {
        // 2 ln(1/ε) > B once ε < e^{-B/2}
        let eps = (-bound / 2.0 - 1.0f64).exp();
        assert!(Kernel::power_cutoff(eps, 2).unwrap().mollifier_mass().unwrap() > bound);
    }
}

#[test]
fn f_and_g_transforms() {
    let k0 = Kernel::power_cutoff(0.0, 2).unwrap();
    assert_relative_eq!(k0.f_transform(0.5).unwrap(), 4.0 * PI, max_relative = 1e-14);
    assert_relative_eq!(k0.f_transform(1.0).unwrap(), 2.0 * PI, max_relative = 1e-14);
    assert_eq!(k0.g_transform(1.0).unwrap(), 0.0);
    assert_relative_eq!(k0.g_transform(E).unwrap(), 2.0 * PI, max_relative = 1e-14);
    assert_relative_eq!(k0.g_transform(1.0 / E).unwrap(), 2.0 * PI, max_relative = 1e-14);

    // F(1) = σ₁ ∫₁^∞ t^{-q} dt for the q = 3.5 tail, checked by quadrature in s = 1/t
    let q = Kernel::supercritical(3.5, 0.0, 2).unwrap();
    let oracle = 2.0 * PI * simpson(|s| s.powf(1.5), 0.0, 1.0, 100_000);
    assert_relative_eq!(q.f_transform(1.0).unwrap(), oracle, max_relative = 1e-8);
    assert_relative_eq!(q.f_transform(1.0).unwrap(), 2.0 * PI / 2.5, max_relative = 1e-14);

    assert!(matches!(Kernel::power_cutoff(0.1, 2).unwrap().f_transform(1.0), Err(Error::Precondition(_))));
}

#[test]
fn ball_condition() {
    let k0 = Kernel::power_cutoff(0.0, 2).unwrap();
    assert!(k0.check_ball_condition(1.0, &[0.1, 0.25, 0.4]).unwrap());
    let steep = Kernel::supercritical(5.0, 0.0, 2).unwrap();
    assert!(!steep.check_ball_condition(1.0, &[0.01]).unwrap());
    assert!(steep.check_ball_condition(0.0, &[0.01, 0.3]).unwrap());
    assert!(k0.check_ball_condition(1.0, &[0.5]).is_err());
}

#[test]
fn invalid_kernels_are_rejected() {
    assert!(Kernel::power_cutoff(-0.1, 2).is_err());
    assert!(Kernel::power_cutoff(f64::NAN, 2).is_err());
    assert!(Kernel::power_cutoff(0.1, 0).is_err());
    assert!(Kernel::supercritical(1.5, 0.1, 2).is_err());
}

proptest! {
    #[test]
    fn kernels_are_nonnegative_and_nonincreasing(eps in 0.0f64..0.9, d in 1usize..4, r in 1e-3f64..10.0, h in 0.0f64..1.0) {
        for k in [Kernel::power_cutoff(eps, d).unwrap(), Kernel::fractional_shift(eps, d).unwrap()] {
            let a = k.value(r).unwrap();
            let b = k.value(r + h).unwrap();
            prop_assert!(a >= 0.0 && b >= 0.0);
            // the cutoff only switches the kernel on, so monotonicity holds past it
            if r > k.cutoff() {
                prop_assert!(b <= a * (1.0 + 1e-15));
            }
        }
    }

    #[test]
    fn power_cutoff_mass_is_logarithmic(eps in 1e-8f64..1.0, d in 1usize..4) {
        let k = Kernel::power_cutoff(eps, d).unwrap();
        let omega = [1.0, 2.0, PI][d - 1];
        prop_assert!((k.mollifier_mass().unwrap() - omega * (1.0 / eps).ln()).abs() <= 1e-12 * omega * (1.0 / eps).ln().max(1.0));
    }

    #[test]
    fn moments_add_over_intervals(eps in 0.0f64..0.5, a in 0.5f64..1.0, b in 1.0f64..3.0, c in 3.0f64..9.0) {
        let k = Kernel::fractional_shift(eps.max(1e-3), 2).unwrap();
        let whole = k.moment(a, c, 1.0).unwrap();
        let parts = k.moment(a, b, 1.0).unwrap() + k.moment(b, c, 1.0).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.abs().max(1.0));
    }
}
