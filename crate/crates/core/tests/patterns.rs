mod common;

use std::f64::consts::{E, LN_2, PI};

use approx::assert_relative_eq;
use nlperim::autocorr::RadialAutocorrelation;
use nlperim::energy::energy_radial;
use nlperim::kernels::Kernel;
use nlperim::patterns::{
    ball_lattice_energy, ball_self_energy, compare_phases, lattice_zeta, max_fraction, optimal_ball_lattice, optimal_stripe, phase_sweep,
    stripe_energy, stripe_energy_via_slices, two_ball_interaction, two_ball_lower_bound, BallLattice, BravaisLattice, Phase,
    StripePattern,
};
use nlperim::Error;
use proptest::prelude::*;

use common::{lens_volume, midpoint, two_ball_oracle};

/// `Σ_{0 < |m| <= radius} |m|^{-3}` over `Z²`, plus the continuum tail `2π/radius`.
fn square_zeta3(radius: i64) -> f64 {
    let r2 = radius * radius;
    let mut terms = Vec::new();
    for i in -radius..=radius {
        for j in -radius..=radius {
            let n2 = i * i + j * j;
            if n2 > 0 && n2 <= r2 {
                terms.push((n2 as f64).powf(-1.5));
            }
        }
    }
    terms.sort_by(|a, b| a.total_cmp(b));
    terms.iter().sum::<f64>() + 2.0 * PI / radius as f64
}

#[test]
fn square_lattice_zeta_by_direct_summation() {
    let z = lattice_zeta(&BravaisLattice::square(), 3.0, 1e-7).unwrap();
    let direct = square_zeta3(2000);
    assert!((z.value - direct).abs() <= 1e-6, "{} vs {direct}", z.value);
    assert!(z.tail_bound <= 1e-7);
    assert!(lattice_zeta(&BravaisLattice::square(), 2.0, 1e-7).unwrap_err().is_divergent());
}

#[test]
fn zeta_does_not_depend_on_the_basis() {
    let pairs = [
        (BravaisLattice::square(), BravaisLattice::new(vec![vec![1.0, 0.0], vec![3.0, 1.0]]).unwrap()),
        (BravaisLattice::triangular(), {
            let t = BravaisLattice::triangular();
            let b = t.basis();
            BravaisLattice::new(vec![b[0].clone(), vec![b[1][0] - 2.0 * b[0][0], b[1][1] - 2.0 * b[0][1]]]).unwrap()
        }),
    ];
    for (a, b) in pairs {
        let za = lattice_zeta(&a, 3.0, 1e-6).unwrap();
        let zb = lattice_zeta(&b, 3.0, 1e-6).unwrap();
        assert!((za.value - zb.value).abs() <= za.tail_bound + zb.tail_bound + 1e-12);
        assert_relative_eq!(a.shortest_vector(), b.shortest_vector(), max_relative = 1e-12);
    }
    // the triangular lattice packs tighter than the square one at equal density
    let t = lattice_zeta(&BravaisLattice::triangular(), 3.0, 1e-6).unwrap().value;
    let s = lattice_zeta(&BravaisLattice::square(), 3.0, 1e-6).unwrap().value;
    assert!(t < s);
}

#[test]
fn optimal_stripes_at_half() {
    let opt = optimal_stripe(0.5, 2).unwrap();
    assert_relative_eq!(opt.d_opt, PI / E, max_relative = 1e-14);
    assert_relative_eq!(opt.e_s, -2.0 * E / PI, max_relative = 1e-14);
    let p = StripePattern::with_fraction(2, 0.5, opt.d_opt).unwrap();
    assert_relative_eq!(stripe_energy(&p).unwrap(), opt.e_s, max_relative = 1e-13);
    // the same number through the autocorrelation quadrature
    let rad = RadialAutocorrelation::stripes(&p, &[]).unwrap();
    let e = energy_radial(&rad, &Kernel::power_cutoff(0.0, 2).unwrap()).unwrap();
    assert!((e.value - opt.e_s).abs() <= e.quadrature_error + 1e-9);
}

#[test]
fn thin_stripes_approach_their_slope() {
    // e_S(λ) = -(2e/π) sin(πλ) in the plane, so e_S/λ → -2e
    for lambda in [1e-3, 1e-5] {
        let opt = optimal_stripe(lambda, 2).unwrap();
        assert_relative_eq!(opt.e_s / lambda, -2.0 * E, max_relative = 2.0 * lambda);
    }
}

#[test]
fn ball_self_energy_by_quadrature() {
    // single disc of radius 1/2: ∫₀¹ (|B ∩ (B + r)| - |B| + r) r^{-2} dr - |B| over the far range
    let rho = 0.5;
    let ball = PI * rho * rho;
    let near = midpoint(|r| (lens_volume(rho, r, 2) - ball + 2.0 * rho * r) / (r * r), 0.0, 1.0, 200_000);
    let oracle = 2.0 * PI * (near - ball);
    assert_relative_eq!(ball_self_energy(rho, 2).unwrap(), oracle, max_relative = 1e-7);
    assert_relative_eq!(oracle, -2.0 * PI * LN_2, max_relative = 1e-7);
}

#[test]
fn dilute_lattice_is_a_sum_of_single_balls() {
    let rho = 0.5;
    let self_energy = ball_self_energy(rho, 2).unwrap();
    for scale in [10.0, 40.0] {
        let lattice = BravaisLattice::square().scaled(scale).unwrap();
        let e = ball_lattice_energy(&BallLattice::new(lattice.clone(), rho).unwrap()).unwrap();
        let per_ball = e.value * lattice.cell_volume();
        // the leftover is the pair interaction |B|²ζ(3)/scale³ of a single ball with its copies
        let pair = (PI * rho * rho).powi(2) * lattice_zeta(&BravaisLattice::square(), 3.0, 1e-6).unwrap().value / scale.powi(3);
        assert_relative_eq!(per_ball - self_energy, pair, max_relative = 0.02);
    }
}

#[test]
fn two_balls_against_quadrature() {
    for (rho, q, d) in [(1.0, 3.0, 2usize), (0.5, 1.2, 2), (1.0, 2.5, 3), (0.3, 2.0, 3)] {
        let v = two_ball_interaction(rho, q, d).unwrap();
        assert_relative_eq!(v, two_ball_oracle(rho, q, d), max_relative = 1e-6);
        assert!(two_ball_lower_bound(rho, q, d) <= v);
    }
    for d in [2usize, 3] {
        let v = two_ball_interaction(1e-4, 2.0, d).unwrap();
        assert_relative_eq!(v, 2f64.powi(-(d as i32 + 1)), max_relative = 1e-7);
    }
    assert!(matches!(two_ball_interaction(1.0, 2.0, 2), Err(Error::Domain(_) | Error::Precondition(_))));
}

#[test]
fn ball_lattices_respect_separation() {
    let t = BravaisLattice::triangular();
    assert!(matches!(optimal_ball_lattice(0.95, &t, 2), Err(Error::Infeasible(_))));
    assert_relative_eq!(max_fraction(&t), PI / 12f64.sqrt(), max_relative = 1e-12);
    assert_relative_eq!(max_fraction(&BravaisLattice::square()), PI / 4.0, max_relative = 1e-12);
    assert!(BallLattice::new(BravaisLattice::square(), 0.5).is_err());
    assert!(BallLattice::new(BravaisLattice::square(), 0.49).is_ok());
}

#[test]
fn optimal_scale_beats_its_neighbours() {
    for (lambda, lattice) in [(0.05, BravaisLattice::triangular()), (0.2, BravaisLattice::square()), (0.1, BravaisLattice::bcc())] {
        let d = lattice.dimension();
        let opt = optimal_ball_lattice(lambda, &lattice, d).unwrap();
        let unit = lattice.normalized();
        let rho = opt.rho_opt / opt.scale;
        for factor in [0.9, 0.97, 1.0, 1.03, 1.1] {
            let a = opt.scale * factor;
            let e = ball_lattice_energy(&BallLattice::new(unit.scaled(a).unwrap(), rho * a).unwrap()).unwrap();
            assert_relative_eq!(e.fraction, lambda, max_relative = 1e-10);
            assert!(e.value >= opt.e_b - e.error - opt.error - 1e-12 * opt.e_b.abs(), "{factor}: {} < {}", e.value, opt.e_b);
            if factor == 1.0 {
                assert_relative_eq!(e.value, opt.e_b, max_relative = 1e-9);
            }
        }
    }
}

#[test]
fn phases_at_the_extremes() {
    let lattices = [BravaisLattice::square(), BravaisLattice::triangular()];
    let dense = compare_phases(0.5, &lattices, 2).unwrap();
    assert_eq!(dense.verdict, Phase::Stripes);
    assert!(dense.margin.unwrap() > 0.0);
    let dilute = compare_phases(0.02, &lattices, 2).unwrap();
    assert_eq!(dilute.verdict, Phase::Balls { lattice: 1 });
    assert!(dilute.margin.unwrap() > 0.0);
    assert!(dilute.e_b[1].unwrap() < dilute.e_b[0].unwrap());

    // past the packing limit of both lattices only stripes remain
    let packed = compare_phases(0.95, &lattices, 2).unwrap();
    assert_eq!(packed.verdict, Phase::Stripes);
    assert!(packed.margin.is_none() && packed.e_b.iter().all(Option::is_none));

    let grid = [0.02, 0.1, 0.3, 0.5];
    for (row, &lambda) in phase_sweep(&grid, &lattices, 2).unwrap().iter().zip(&grid) {
        assert_eq!(row, &compare_phases(lambda, &lattices, 2).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn slab_sums_converge_to_the_closed_form(d in 1usize..4, width in 0.05f64..3.0, gap in 0.05f64..3.0) {
        let p = StripePattern::new(d, width, gap).unwrap();
        let exact = stripe_energy(&p).unwrap();
        let terms = 4000;
        let sliced = stripe_energy_via_slices(&p, terms).unwrap();
        // the dropped pairs add up to about (ω/a) Σ_{k>K} 2λ²/k²
        let omega = [1.0, 2.0, PI][d - 1];
        let lambda = p.fraction();
        prop_assert!((sliced - exact).abs() <= omega / p.period() * 2.5 * lambda * lambda / terms as f64 + 1e-12 * exact.abs().max(1.0));
    }

    #[test]
    fn stripe_energy_is_complement_symmetric(d in 1usize..4, width in 0.05f64..3.0, gap in 0.05f64..3.0) {
        let p = StripePattern::new(d, width, gap).unwrap();
        let a = stripe_energy(&p).unwrap();
        let b = stripe_energy(&p.complement()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn optimal_width_minimises(lambda in 0.02f64..0.98, d in 1usize..4, factor in 0.5f64..2.0) {
        let opt = optimal_stripe(lambda, d).unwrap();
        let p = StripePattern::with_fraction(d, lambda, opt.d_opt * factor).unwrap();
        prop_assert!(stripe_energy(&p).unwrap() >= opt.e_s - 1e-12 * opt.e_s.abs());
    }
}
