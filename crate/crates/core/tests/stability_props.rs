use aligned_einstein::curvature::{ricci_eigenvalues, scalar_curvature, CertifiedMetric, DiagonalMetric};
use aligned_einstein::einstein::{default_eps, solve};
use aligned_einstein::exact::{int, rat, to_f64, Interval, Rational};
use aligned_einstein::spaces::{AlignedSpace, Catalog};
use aligned_einstein::stability::{hessian_l, instability_certificate, StabilityReport, StabilityVerdict};
use num_traits::Zero;
use proptest::prelude::*;
use std::sync::OnceLock;

fn solved() -> &'static [(AlignedSpace, CertifiedMetric)] {
    static CELL: OnceLock<Vec<(AlignedSpace, CertifiedMetric)>> = OnceLock::new();
    CELL.get_or_init(|| {
        let cat = Catalog::bundled();
        let mut spaces: Vec<AlignedSpace> = cat.sporadic_pairs().unwrap().into_iter().map(|s| s.space).collect();
        for f in &cat.families {
            spaces.extend((f.m_min..f.m_min + 6).map(|m| f.instantiate(m).unwrap().space));
        }
        for l in &cat.listed {
            spaces.push(cat.space(&l.id).unwrap().space);
        }
        spaces.push(cat.space("SU5xSO8_T4").unwrap().space);
        let mut out = Vec::new();
        for s in spaces {
            for m in solve(&s, &default_eps()).unwrap().metrics {
                out.push((s.clone(), m.metric));
            }
        }
        out
    })
}

fn report(s: &AlignedSpace, g: &CertifiedMetric) -> StabilityReport {
    instability_certificate(s, g).unwrap()
}

fn positive() -> impl Strategy<Value = Rational> {
    (1i64..500, 1i64..80).prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn kernel_identity_off_shell(i in 0usize..1000, x in [positive(), positive(), positive()]) {
        let (s, _) = &solved()[i % solved().len()];
        let g = DiagonalMetric::new(x[0].clone(), x[1].clone(), x[2].clone()).unwrap();
        let l = hessian_l(s, &g);
        prop_assert!(l.kernel_defect().iter().all(|v| v.is_zero()));
        let lf = l.to_f64();
        let w = [s.n1, s.n2, s.d].map(|v| (v as f64).sqrt());
        for row in lf {
            let scale: f64 = row.iter().zip(w).map(|(a, b)| (a * b).abs()).sum();
            let dot: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum();
            prop_assert!(dot.abs() <= 1e-12 * scale.max(1e-300));
        }
    }

    #[test]
    fn kernel_identity_on_tori(n1 in 1i64..80, n2 in 1i64..80, d in 1i64..20, p in 1i64..4, q in 1i64..4,
                               k1 in 1i64..=50, k2 in 1i64..=50, x in [positive(), positive(), positive()]) {
        prop_assume!(num_integer::gcd(p, q) == 1);
        let s = AlignedSpace::abelian("t", n1, n2, d, rat(p * p + q * q, p * p), rat(k1, 100), rat(k2, 100)).unwrap();
        let g = DiagonalMetric::new(x[0].clone(), x[1].clone(), x[2].clone()).unwrap();
        prop_assert!(hessian_l(&s, &g).kernel_defect().iter().all(|v| v.is_zero()));
    }
}

#[test]
fn enough_metrics_are_probed() {
    assert!(solved().len() >= 100);
}

#[test]
fn second_diagonal_witness_is_positive_everywhere() {
    let mut floor_fails = Vec::new();
    for (s, g) in solved() {
        let r = report(s, g);
        assert_eq!(r.witness_l22, Some(1), "{}", s.name);
        let expected = if s.is_abelian() { StabilityVerdict::Saddle } else { StabilityVerdict::Unstable };
        assert_eq!(r.verdict, expected, "{}", s.name);
        let k = s.constants();
        let x2 = g.x2.clone() / g.x3.clone();
        let floor = Interval::point((int(1) - int(2) * &k.k2) / (int(2) * &k.c1)) / x2.square();
        let two_rho = Interval::point(int(2)) * r.rho.clone();
        if (two_rho - r.l.diagonal(1) - floor).sign() != Some(1) {
            floor_fails.push(s.name.clone());
        }
    }
    let stray: Vec<_> = floor_fails
        .iter()
        .filter(|n| solved().iter().any(|(s, _)| &s.name == *n && s.admissibility_bound_holds()))
        .collect();
    assert!(stray.is_empty(), "lower bound fails on {stray:?}");
}

#[test]
fn tori_are_saddles() {
    for (s, g) in solved().iter().filter(|(s, _)| s.is_abelian()) {
        let r = report(s, g);
        assert_eq!(r.witness_l33, Some(-1));
        assert_eq!(r.verdict, StabilityVerdict::Saddle);
        assert_eq!(r.tangent_signs, Some([1, -1]));
    }
}

#[test]
fn einstein_constant_matches_each_eigenvalue() {
    for (s, g) in solved() {
        let r = report(s, g);
        let mid = g.midpoint();
        let unit = mid.scaled(&(int(1) / &mid.entries()[2]));
        let rho = to_f64(&r.rho.midpoint());
        for e in ricci_eigenvalues(s, &unit) {
            assert!((to_f64(&e) - rho).abs() <= 1e-9 * rho.abs(), "{}", s.name);
        }
    }
}

/// Hessian of unit-volume scal in the chart `y_i -> y_i (1 + t_i)` at the Einstein point.
fn slice_hessian(s: &AlignedSpace, y: &[Rational; 2], h: &Rational) -> [[f64; 2]; 2] {
    let n = s.dimension() as f64;
    let w = [s.n1 as f64 / n, s.n2 as f64 / n];
    let hf = to_f64(h);
    let f = |t: [i64; 2]| {
        let z: Vec<Rational> = (0..2).map(|i| &y[i] * (int(1) + int(t[i]) * h)).collect();
        let scal = scalar_curvature(s, &DiagonalMetric::new(z[0].clone(), z[1].clone(), int(1)).unwrap());
        let vol: f64 = (0..2).map(|i| w[i] * (to_f64(&y[i]).ln() + (t[i] as f64 * hf).ln_1p())).sum();
        to_f64(&scal) * vol.exp()
    };
    let c = f([0, 0]);
    let d11 = (f([1, 0]) - 2.0 * c + f([-1, 0])) / (hf * hf);
    let d22 = (f([0, 1]) - 2.0 * c + f([0, -1])) / (hf * hf);
    let d12 = (f([1, 1]) - f([1, -1]) - f([-1, 1]) + f([-1, -1])) / (4.0 * hf * hf);
    [[d11, d12], [d12, d22]]
}

#[test]
fn tangent_signs_match_the_numerical_hessian() {
    let mut compared = 0;
    for (s, g) in solved() {
        let Some(signs) = report(s, g).tangent_signs else { continue };
        let m = g.midpoint();
        let y = [&m.x1 / &m.x3, &m.x2 / &m.x3];
        let hs = slice_hessian(s, &y, &rat(1, 10_000));
        let (tr, det) = (hs[0][0] + hs[1][1], hs[0][0] * hs[1][1] - hs[0][1] * hs[0][1]);
        let scale = hs.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        if det.abs() < 1e-3 * scale * scale {
            continue;
        }
        let numeric = if det < 0.0 {
            [1, -1]
        } else if tr > 0.0 {
            [1, 1]
        } else {
            [-1, -1]
        };
        assert_eq!(signs, numeric, "{}: hessian {hs:?}", s.name);
        compared += 1;
    }
    assert!(compared >= 50, "only {compared} comparisons");
}
