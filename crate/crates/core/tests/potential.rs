use num_traits::One;
use taubnut::chartmetric::{ChartPoint, NumericParams};
use taubnut::number::rat;
use taubnut::potential::{ddc_check, dh_coefficients, h, potential_properties, PotentialSpec};
use taubnut::{Partition, Rat, SolitonParams};

fn np(n: usize, a: i64) -> NumericParams {
    let p = SolitonParams::rational(Partition::new(n, 2, vec![n - 2]).unwrap(), vec![rat(0, 1), rat(1, 1)], rat(a, 1)).unwrap();
    NumericParams::new(&p).unwrap()
}

#[test]
fn n3_second_coefficient_simplifies() {
    // x - 1 + 1/(1+x) = x²/(1+x), exactly
    for (p, q) in [(1, 3), (7, 2), (41, 5), (1000, 7)] {
        let x = rat(p, q);
        let lhs = &x - Rat::one() + Rat::one() / (Rat::one() + &x);
        assert_eq!(lhs, &x * &x / (Rat::one() + &x));
    }
    let s = PotentialSpec::new(3.0, 3).unwrap();
    for x in [1.5, 4.0, 30.0, 2e3] {
        let (_, d2) = dh_coefficients(-2.0, x, &s);
        assert!((d2 - x * x / (1.0 + x)).abs() <= 1e-12 * d2);
        // the coefficient is dominated by the square root of the quadratic growth of H
        assert!(d2 <= 2.0 * h(-2.0, x, &s).unwrap().sqrt());
    }
}

#[test]
fn gradient_bound_constant_stabilizes() {
    let m = np(3, 0);
    let s = PotentialSpec::new(3.0, 3).unwrap();
    let c: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|&e| potential_properties(&s, &m, 400, e).unwrap().c_prime).collect();
    assert!(c.iter().all(|v| v.is_finite() && *v > 0.0));
    assert!(c[2] <= 1.5 * c[1], "{c:?}");
    let r = potential_properties(&s, &m, 400, 1e4).unwrap();
    assert!(r.rho_ratio.1 / r.rho_ratio.0 < 10.0, "{r:?}");
}

#[test]
fn potential_rejects_other_families() {
    let s = PotentialSpec::new(3.0, 3).unwrap();
    let soliton = np(3, 1);
    assert!(ddc_check(&ChartPoint::centered(&soliton, vec![-1.0, 2.0]), &s, &soliton).is_err());
    let other = np(4, 0);
    assert!(ddc_check(&ChartPoint::centered(&other, vec![-1.0, 2.0]), &s, &other).is_err());
}
