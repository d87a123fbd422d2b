use proptest::prelude::*;
use smoothgreed_core::cones::linalg::{inverse_spd, logdet_spd, sym_eigenvalues, Mat};
use smoothgreed_core::cones::*;
use smoothgreed_core::smoothing::{design_optimal, nesterov_penalty_smoothing, DesignSpec};
use smoothgreed_core::ScalarConcave;

fn catalog() -> Vec<ScalarConcave> {
    vec![
        ScalarConcave::cap(),
        ScalarConcave::three_piece(),
        ScalarConcave::log1p(),
        ScalarConcave::sqrt(),
        ScalarConcave::power(0.3).unwrap(),
        ScalarConcave::linear(2.0),
        ScalarConcave::penalty(2.0, 1.0).unwrap(),
        ScalarConcave::piecewise_linear(vec![0.0, 0.5, 2.0], vec![3.0, 1.0, 0.25]).unwrap(),
    ]
}

/// `inf_y (y u - f*(y))` over `y = k / 10^4` in `[-3, 3]`; equals `f(u)`
/// for concave `f`.
fn biconjugate_on_grid(f: &ScalarConcave, u: f64) -> f64 {
    (-30_000..=30_000)
        .map(|k| {
            let y = k as f64 / 10_000.0;
            let c = f.conjugate(y);
            if c == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                y * u - c
            }
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn evaluation_examples() {
    assert_eq!(ScalarConcave::cap().value(0.5), 0.5);
    assert!((ScalarConcave::three_piece().value(0.6) - 0.55).abs() < 1e-15);
    // u - (u - 1)_+ at u = 2.
    let lin = ScalarConcave::linear(1.0).value(2.0);
    let pen = ScalarConcave::penalty(1.0, 1.0).unwrap().value(2.0);
    assert_eq!(lin + pen, 1.0);
    assert!(ScalarConcave::cap().eval(-1.0).is_err());
}

#[test]
fn conjugate_examples() {
    let cap = ScalarConcave::cap();
    assert_eq!(cap.conjugate(0.0), -1.0);
    for y in [0.1, 0.5, 0.9, 1.0] {
        assert!((cap.conjugate(y) - (y - 1.0)).abs() < 1e-15);
    }
    assert_eq!(cap.conjugate(-0.1), f64::NEG_INFINITY);
    let lg = ScalarConcave::log1p();
    for y in [0.05, 0.3, 0.77, 1.0] {
        // Grid minimization of y u - log(1 + u).
        let grid = (0..200_000).map(|k| k as f64 * 1e-3).map(|u| y * u - (1.0 + u).ln()).fold(f64::INFINITY, f64::min);
        let closed = 1.0 - y + y.ln();
        assert!((lg.conjugate(y) - closed).abs() < 1e-12);
        assert!((grid - closed).abs() < 1e-6);
    }
}

#[test]
fn supergradient_examples() {
    let cap = ScalarConcave::cap();
    let s = cap.supergrad(1.0);
    assert_eq!((s.lo, s.hi), (0.0, 1.0));
    let s = cap.supergrad(2.0);
    assert_eq!((s.lo, s.hi), (0.0, 0.0));
    let s = ScalarConcave::power(0.5).unwrap().supergrad(4.0);
    assert!((s.lo - 0.25).abs() < 1e-15 && (s.hi - 0.25).abs() < 1e-15);
}

#[test]
fn alpha_examples() {
    assert_eq!(ScalarConcave::linear(1.0).alpha_at(3.0).unwrap(), 0.0);
    assert_eq!(ScalarConcave::cap().alpha_at(1.0).unwrap(), -1.0);
    let p = ScalarConcave::power(0.4).unwrap();
    assert!((p.alpha_at(2.5).unwrap() + 0.6).abs() < 1e-12);
    assert_eq!(ScalarConcave::cap().alpha_bar(5.0, 100).unwrap(), -1.0);
    assert_eq!(ScalarConcave::power(0.5).unwrap().alpha_bar(5.0, 100).unwrap(), -0.5);
    // log1p on (0, 100]: the infimum sits at the horizon.
    let closed = |u: f64| (u / (1.0 + u) - u.ln_1p()) / u.ln_1p();
    let got = ScalarConcave::log1p().alpha_bar(100.0, 10_000).unwrap();
    assert!((got - closed(100.0)).abs() < 1e-9, "{got}");
    assert!(got < -0.78);
}

#[test]
fn lp_ball_examples() {
    let d = lp_ball_distance(&[2.0, 2.0], 1.0);
    assert!((d.value - 3.0).abs() < 1e-10);
    assert!((d.r.unwrap() - 0.5).abs() < 1e-10);
    let d = lp_ball_distance(&[0.3, 0.4], 2.0);
    assert_eq!(d.value, 0.0);
    assert_eq!(d.grad_lo, vec![0.0, 0.0]);
    // The separable cap is the p = infinity distance.
    let cap_dist: f64 = [2.0f64, 0.5].iter().map(|u| (u - 1.0).max(0.0)).sum();
    assert_eq!(cap_dist, 1.0);
    let far = lp_ball_distance(&[2.0, 0.5], 64.0).value;
    assert!((far - cap_dist).abs() < 0.05, "{far}");
}

#[test]
fn dense_linear_algebra_matches_nalgebra() {
    let rows = vec![vec![4.0, 1.0, 0.5], vec![1.0, 3.0, -0.2], vec![0.5, -0.2, 2.0]];
    let m = Mat::from_rows(&rows).unwrap();
    let nm = nalgebra::DMatrix::from_fn(3, 3, |i, j| rows[i][j]);
    let eig = nalgebra::SymmetricEigen::new(nm.clone());
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (a, b) in sym_eigenvalues(&m).iter().zip(&ev) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!((logdet_spd(&m).unwrap() - nm.determinant().ln()).abs() < 1e-12);
    let inv = nm.try_inverse().unwrap();
    let ours = inverse_spd(&m).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((ours[(i, j)] - inv[(i, j)]).abs() < 1e-12);
        }
    }
}

#[test]
fn path_graph_base_matrix() {
    // P3: L0 has spectrum {0, 1, 3}; adding 1 1^T lifts the zero to 3.
    let a0 = graph_base_matrix(3, &[(0, 1), (1, 2)]);
    let nm = nalgebra::DMatrix::from_fn(3, 3, |i, j| a0[(i, j)]);
    let oracle = nalgebra::SymmetricEigen::new(nm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    assert!((sym_eigenvalues(&a0)[0] - oracle).abs() < 1e-12);
    assert!((oracle - 1.0).abs() < 1e-12);
}

#[test]
fn sherman_morrison_drift_after_500_updates() {
    let a0 = Mat::identity(4);
    let mut s = LogDetState::new(&a0).unwrap();
    for t in 0..500 {
        let a: Vec<f64> = (0..4).map(|i| ((t * 7 + i * 3) % 11) as f64 / 11.0 - 0.4).collect();
        s.accept(&a, 0.5 + 0.5 * ((t % 3) as f64 / 2.0)).unwrap();
    }
    assert!(s.drift() <= DRIFT_TOL);
    assert!((s.gain - logdet_spd(&s.m).unwrap()).abs() < 1e-8);
    assert!(s.refactorizations >= 3);
}

#[test]
fn antitone_on_orthant_objectives() {
    let des = design_optimal(&DesignSpec::new(ScalarConcave::cap(), 1.0, 200)).unwrap();
    let objs = [
        OrthantObjective::Separable(SeparableObjective::new(catalog().into_iter().map(Coord::from).collect())),
        OrthantObjective::Separable(SeparableObjective::new(vec![
            des.smoothed.clone().into(),
            nesterov_penalty_smoothing(1.5, 0.7).unwrap().smoothed.into(),
        ])),
    ];
    for (k, obj) in objs.iter().enumerate() {
        let r = antitone_check(obj, 2000, k as u64).unwrap();
        assert!(r.passed, "{r:?}");
    }
}

#[test]
fn antitone_on_psd_pairs() {
    let a0 = graph_base_matrix(4, &[(0, 1), (1, 2), (2, 3)]);
    let obj = LogDetObjective::new(a0, 2.0, 10.0).unwrap();
    let r = antitone_check_logdet(&obj, 300, 11).unwrap();
    assert!(r.passed, "{r:?}");
}

fn psd(entries: &[f64], n: usize) -> Mat {
    let mut m = Mat::zeros(n);
    for col in entries.chunks(n) {
        m.add_outer(col, 1.0);
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugate_round_trip(k in 0usize..8, u in 0.05f64..3.0) {
        let f = &catalog()[k];
        let back = biconjugate_on_grid(f, u);
        prop_assert!((back - f.value(u)).abs() < 1e-6, "f={f:?} u={u} back={back} value={}", f.value(u));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn fenchel_young_equality(k in 0usize..8, u in 0.0f64..4.0, t in 0.0f64..=1.0) {
        let f = &catalog()[k];
        let s = f.supergrad(u);
        prop_assume!(s.hi.is_finite() && s.hi < 1e6);
        let y = s.lo + t * (s.hi - s.lo);
        let lhs = f.conjugate(y) + f.value(u);
        prop_assert!((lhs - y * u).abs() <= 1e-9 * (1.0 + (y * u).abs()), "f={f:?} u={u} y={y}");
    }

    #[test]
    fn fenchel_young_on_kinks(k in 0usize..8, t in 0.0f64..=1.0) {
        let f = &catalog()[k];
        for u in f.kinks() {
            let s = f.supergrad(u);
            let y = s.lo + t * (s.hi - s.lo);
            prop_assert!((f.conjugate(y) + f.value(u) - y * u).abs() <= 1e-9);
        }
    }

    #[test]
    fn scalar_supergradients_antitone(k in 0usize..8, u in 0.0f64..4.0, du in 0.0f64..2.0) {
        let f = &catalog()[k];
        prop_assert!(f.supergrad(u + du).hi <= f.supergrad(u).lo + 1e-12);
    }

    #[test]
    fn alpha_in_unit_range(k in 0usize..8, u in 0.01f64..50.0) {
        let f = &catalog()[k];
        prop_assume!(f.is_monotone() && f.value(u) > 0.0);
        let a = f.alpha_at(u).unwrap();
        prop_assert!((-1.0 - 1e-12..=1e-12).contains(&a), "f={f:?} u={u} alpha={a}");
    }

    #[test]
    fn value_at_zero_is_zero(k in 0usize..8) {
        prop_assert_eq!(catalog()[k].value(0.0), 0.0);
    }

    #[test]
    fn lp_ball_is_l1_lipschitz(
        u in prop::collection::vec(0.0f64..2.0, 3),
        v in prop::collection::vec(0.0f64..2.0, 3),
        p in 1.0f64..6.0,
    ) {
        let du = lp_ball_distance(&u, p).value;
        let dv = lp_ball_distance(&v, p).value;
        let l1: f64 = u.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        prop_assert!((du - dv).abs() <= l1 + 1e-9);
    }

    #[test]
    fn lp_ball_p1_closed_form(u in prop::collection::vec(0.0f64..3.0, 1..6)) {
        let d = lp_ball_distance(&u, 1.0).value;
        let closed = (u.iter().sum::<f64>() - 1.0).max(0.0);
        prop_assert!((d - closed).abs() <= 1e-10 * (1.0 + closed), "d={d} closed={closed}");
    }

    #[test]
    fn lp_ball_conjugate_fenchel_young(u in prop::collection::vec(0.0f64..2.0, 2..4), v in 0.0f64..2.0, p in 1.0f64..4.0) {
        let obj = OrthantObjective::LpBall(LpBallObjective { l: 3.0, p, n: u.len() });
        let mut w = vec![v];
        w.extend(&u);
        let y = obj.min_supergrad(&w).unwrap();
        let yu: f64 = y.iter().zip(&w).map(|(a, b)| a * b).sum();
        let lhs = obj.conjugate(&y).unwrap() + obj.value(&w).unwrap();
        prop_assert!((lhs - yu).abs() <= 1e-7 * (1.0 + yu.abs()), "lhs={lhs} yu={yu}");
    }

    #[test]
    fn logdet_gradient_antitone_on_psd_pairs(
        b in prop::collection::vec(-1.0f64..1.0, 9),
        c in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let a0 = Mat::identity(3);
        let v = psd(&b, 3);
        let mut u = v.clone();
        let extra = psd(&c, 3);
        for k in 0..9 {
            u.data[k] += extra.data[k];
        }
        let worst = logdet_antitone_violation(&a0, &[(u, v)]).unwrap();
        prop_assert!(worst <= 1e-10, "{worst}");
    }
}
