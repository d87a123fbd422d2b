use nalgebra::DMatrix;
use proptest::prelude::*;
use smoothgreed_core::cones::*;
use smoothgreed_core::instances::{gen_adwords_triangular, gen_lp_random};
use smoothgreed_core::online::*;
use smoothgreed_core::smoothing::{design_optimal, DesignSpec, SmoothedScalar};
use smoothgreed_core::ScalarConcave;
use std::sync::OnceLock;

const ONE_MINUS_INV_E: f64 = 1.0 - 1.0 / std::f64::consts::E;

fn adwords(n: usize) -> OrthantObjective {
    OrthantObjective::Separable(SeparableObjective::uniform(Coord::Scalar(ScalarConcave::cap()), n))
}

fn cap_design() -> &'static (SmoothedScalar, f64) {
    static D: OnceLock<(SmoothedScalar, f64)> = OnceLock::new();
    D.get_or_init(|| {
        let r = design_optimal(&DesignSpec::new(ScalarConcave::cap(), 1.0, 200)).unwrap();
        assert!(r.certified);
        (r.smoothed, r.beta)
    })
}

fn smoothed_adwords(n: usize) -> Problem {
    let s = cap_design().0.clone();
    let run = OrthantObjective::Separable(SeparableObjective::uniform(Coord::Smoothed(s), n));
    Problem::smoothed_orthant(run, adwords(n))
}

fn bids(w: &[f64]) -> Step {
    Step::new(StepMatrix::Diag { w: w.to_vec() }, FeasibleSet::Simplex { k: w.len() }).unwrap()
}

/// Independent budgeted-adwords evaluation: `sum_i min(u_i, 1)`.
fn adwords_value(u: &[f64]) -> f64 {
    u.iter().map(|v| v.min(1.0)).sum()
}

/// Best integral assignment: every step picks one advertiser or nobody.
fn integral_opt(steps: &[Vec<f64>]) -> f64 {
    let n = steps[0].len();
    let mut best = 0.0f64;
    let total = (n + 1).pow(steps.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut u = vec![0.0; n];
        for w in steps {
            let pick = c % (n + 1);
            c /= n + 1;
            if pick < n {
                u[pick] += w[pick];
            }
        }
        best = best.max(adwords_value(&u));
    }
    best
}

fn arb_bids(n: usize, m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0), 0.05f64..1.0], n), m)
}

#[test]
fn single_linear_step_is_exact() {
    let obj = OrthantObjective::Separable(SeparableObjective::uniform(Coord::Scalar(ScalarConcave::linear(1.0)), 1));
    let problem = Problem::orthant(obj);
    let steps = [Step::new(StepMatrix::Diag { w: vec![1.0] }, FeasibleSet::UnitInterval {}).unwrap()];
    for alg in [Algorithm::Sequential, Algorithm::Simultaneous] {
        let trace = run(&problem, &steps, alg).unwrap();
        assert_eq!(trace.steps[0].x, vec![1.0]);
        let rep = certify(&problem, &trace, BoundRule::Ratio { r: 1.0 }).unwrap();
        assert!((rep.primal - 1.0).abs() < 1e-12);
        assert!((rep.dual - 1.0).abs() < 1e-12);
        assert!((rep.ratio_lb - 1.0).abs() < 1e-12);
        assert!(rep.passed);
    }
}

#[test]
fn two_advertiser_toy_matches_enumeration() {
    let w = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
    let steps: Vec<Step> = w.iter().map(|b| bids(b)).collect();
    let problem = Problem::orthant(adwords(2));
    let trace = run_sequential(&problem, &steps).unwrap();

    // Hand simulation: y = 1 on unspent budgets, 0 once spent.
    let mut u = [0.0f64; 2];
    let mut sum_sigma = 0.0;
    for (t, b) in w.iter().enumerate() {
        let y: Vec<f64> = u.iter().map(|&v| if v < 1.0 { 1.0 } else { 0.0 }).collect();
        let scores = [0.0, b[0] * y[0], b[1] * y[1]];
        let best = (0..3).fold(0, |a, j| if scores[j] > scores[a] { j } else { a });
        sum_sigma += scores[best];
        let mut x = vec![0.0; 2];
        if best > 0 {
            x[best - 1] = 1.0;
            u[best - 1] += b[best - 1];
        }
        assert_eq!(trace.steps[t].x, x, "step {t}");
    }
    let y_final: Vec<f64> = u.iter().map(|&v| if v < 1.0 { 1.0 } else { 0.0 }).collect();
    // (min(., 1))*(y) = min(0, y - 1) for y >= 0.
    let conj: f64 = y_final.iter().map(|&y| (y - 1.0).min(0.0)).sum();
    let rep = certify(&problem, &trace, BoundRule::Beta { beta: 2.0, kappa: 0.0 }).unwrap();
    assert!((rep.primal - adwords_value(&u)).abs() < 1e-12);
    assert!((rep.dual - (sum_sigma - conj)).abs() < 1e-12);
    assert_eq!(rep.primal, integral_opt(&w));
    assert!(rep.dual >= integral_opt(&w));
    assert!(rep.passed);
}

#[test]
fn classic_adversary_halves_simultaneous_greedy() {
    // Both advertisers bid first; the second step only reaches the one that
    // ties-first absorbed.
    let w = vec![vec![1.0, 1.0], vec![1.0, 0.0]];
    let steps: Vec<Step> = w.iter().map(|b| bids(b)).collect();
    let problem = Problem::orthant(adwords(2));
    let trace = run_simultaneous(&problem, &steps).unwrap();
    assert_eq!(trace.steps[0].x, vec![1.0, 0.0]);
    let opt = integral_opt(&w);
    assert_eq!(opt, 2.0);
    assert!((trace.primal / opt - 0.5).abs() < 1e-12);
    let rep = certify(&problem, &trace, BoundRule::Beta { beta: 2.0, kappa: 0.0 }).unwrap();
    assert!(rep.passed);
    assert!(rep.ratio_lb >= 0.5 - 1e-9);
}

fn logdet_value(a0: &DMatrix<f64>, vs: &[Vec<f64>], xs: &[f64], b: f64, l: f64) -> f64 {
    let mut m = a0.clone();
    for (v, &x) in vs.iter().zip(xs) {
        let a = nalgebra::DVector::from_column_slice(v);
        m += &a * a.transpose() * x;
    }
    let u: f64 = xs.iter().sum();
    m.determinant().ln() - a0.determinant().ln() - l * (u - b).max(0.0)
}

#[test]
fn logdet_identical_vectors_match_grid_enumeration() {
    let n = 3;
    let (b, l) = (2.0, 2.5);
    let a = vec![1.0, 0.0, 0.0];
    let vs = vec![a.clone(); 3];
    let obj = LogDetObjective::new(Mat::identity(n), b, l).unwrap();
    let steps: Vec<Step> =
        vs.iter().map(|v| Step::new(StepMatrix::RankOne { a: v.clone() }, FeasibleSet::UnitInterval {}).unwrap()).collect();
    let problem = Problem::logdet(obj);
    let trace = run_simultaneous(&problem, &steps).unwrap();

    let a0 = DMatrix::<f64>::identity(n, n);
    let grid: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    // Per-step coordinate maximization on the grid.
    let mut xs = Vec::new();
    for t in 0..3 {
        let pick = grid
            .iter()
            .copied()
            .fold((f64::NEG_INFINITY, 0.0), |(bv, bx), x| {
                let mut trial = xs.clone();
                trial.push(x);
                let v = logdet_value(&a0, &vs[..=t], &trial, b, l);
                if v > bv + 1e-12 {
                    (v, x)
                } else {
                    (bv, bx)
                }
            })
            .1;
        xs.push(pick);
        assert!((trace.steps[t].x[0] - pick).abs() <= 0.01, "step {t}: {} vs {pick}", trace.steps[t].x[0]);
    }
    // The first two copies fill the budget, the third is priced out.
    assert_eq!(xs, vec![1.0, 1.0, 0.0]);

    let mut opt = f64::NEG_INFINITY;
    for &x1 in &grid {
        for &x2 in &grid {
            for &x3 in &grid {
                opt = opt.max(logdet_value(&a0, &vs, &[x1, x2, x3], b, l));
            }
        }
    }
    assert!((trace.primal - opt).abs() < 1e-9, "{} vs {opt}", trace.primal);
    let rep = certify(&problem, &trace, BoundRule::RealizedAlpha).unwrap();
    assert!(rep.passed);
    assert!(rep.dual >= opt - 1e-9);
}

#[test]
fn logdet_distinct_directions_beat_repeats() {
    let n = 3;
    let obj = LogDetObjective::new(Mat::identity(n), 3.0, 2.5).unwrap();
    let e = |i: usize| {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    };
    let steps: Vec<Step> = [e(0), e(0), e(1)]
        .into_iter()
        .map(|a| Step::new(StepMatrix::RankOne { a }, FeasibleSet::UnitInterval {}).unwrap())
        .collect();
    let trace = run_simultaneous(&Problem::logdet(obj), &steps).unwrap();
    let gains: Vec<f64> = trace.steps.iter().map(|s| s.gain).collect();
    assert!(gains[2] > gains[1], "{gains:?}");
}

#[test]
fn unsmoothed_triangular_simultaneous_is_half() {
    let inst = gen_adwords_triangular(20, 10).unwrap();
    let problem = Problem::orthant(adwords(20));
    let trace = run_simultaneous(&problem, &inst.steps).unwrap();
    let opt = inst.meta.offline_opt.unwrap();
    assert!((trace.primal / opt - 0.5).abs() < 1e-9, "{}", trace.primal / opt);
    let rep = certify(&problem, &trace, BoundRule::Beta { beta: 2.0, kappa: 0.0 }).unwrap();
    assert!(rep.passed && rep.ratio_lb >= 0.5 - 1e-9);
}

#[test]
fn smoothed_triangular_beats_half() {
    let inst = gen_adwords_triangular(20, 10).unwrap();
    let problem = smoothed_adwords(20);
    let beta = cap_design().1;
    let trace = run_simultaneous(&problem, &inst.steps).unwrap();
    let rep = certify(&problem, &trace, BoundRule::Beta { beta, kappa: 0.0 }).unwrap();
    assert!(rep.passed);
    assert!(rep.ratio_lb >= ONE_MINUS_INV_E - 1e-3, "{}", rep.ratio_lb);
    assert!(trace.primal / inst.meta.offline_opt.unwrap() > 0.6);
    assert!(duality_gap_diagnostics(&trace, None).passed);
}

#[test]
fn linear_objective_has_ratio_one() {
    let obj = OrthantObjective::Separable(SeparableObjective::new(vec![
        Coord::Scalar(ScalarConcave::linear(1.0)),
        Coord::Scalar(ScalarConcave::linear(0.5)),
        Coord::Scalar(ScalarConcave::linear(2.0)),
    ]));
    let problem = Problem::orthant(obj);
    let steps = vec![bids(&[0.3, 0.9, 0.1]), bids(&[0.2, 0.0, 0.7]), bids(&[1.0, 1.0, 1.0])];
    for alg in [Algorithm::Sequential, Algorithm::Simultaneous] {
        let trace = run(&problem, &steps, alg).unwrap();
        let rep = certify(&problem, &trace, BoundRule::Ratio { r: 1.0 }).unwrap();
        assert!((rep.ratio_lb - 1.0).abs() < 1e-9, "{alg:?}: {}", rep.ratio_lb);
        let lemma = duality_gap_diagnostics(&trace, None);
        assert!(lemma.margin.abs() < 1e-9);
    }
}

#[test]
fn lp_simultaneous_smoothed_stays_feasible() {
    for seed in 0..5 {
        let inst = gen_lp_random(4, 30, 3, 0.5, seed).unwrap();
        let lp = inst.lp_objective(PenaltyKind::SeparableCap).unwrap();
        let problem = Problem::smoothed_orthant(lp.orthant(true).unwrap(), lp.orthant(false).unwrap());
        let trace = run_simultaneous(&problem, &inst.steps).unwrap();
        for (i, (&u, &b)) in trace.final_u[1..].iter().zip(&lp.budget).enumerate() {
            assert!(u <= b + 1e-9, "seed {seed} row {i}: {u} > {b}");
        }
        let rep = certify(&problem, &trace, BoundRule::RealizedAlpha).unwrap();
        assert!(rep.passed);
    }
}

#[test]
fn runs_are_deterministic() {
    let inst = gen_lp_random(3, 20, 3, 0.7, 11).unwrap();
    let lp = inst.lp_objective(PenaltyKind::SeparableCap).unwrap();
    let problem = Problem::smoothed_orthant(lp.orthant(true).unwrap(), lp.orthant(false).unwrap());
    for alg in [Algorithm::Sequential, Algorithm::Simultaneous] {
        let a = serde_json::to_string(&run(&problem, &inst.steps, alg).unwrap()).unwrap();
        let b = serde_json::to_string(&run(&problem, &inst.steps, alg).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn sqrt_objective_records_interior_shift() {
    let obj = OrthantObjective::Separable(SeparableObjective::uniform(Coord::Scalar(ScalarConcave::sqrt()), 2));
    let trace = run_sequential(&Problem::orthant(obj), &[bids(&[1.0, 0.5])]).unwrap();
    assert_eq!(trace.interior_shift, Some(INTERIOR_SHIFT));
    assert!(trace.steps[0].dual.iter().all(|y| y.is_finite()));
}

#[test]
fn malformed_steps_are_rejected() {
    let problem = Problem::orthant(adwords(2));
    let bad = Step { a: StepMatrix::Diag { w: vec![1.0, 1.0, 1.0] }, f: FeasibleSet::Simplex { k: 2 } };
    assert!(run_sequential(&problem, &[bad]).is_err());
    let wrong_dim = bids(&[1.0, 1.0, 1.0]);
    assert!(run_simultaneous(&problem, &[wrong_dim]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simultaneous_gains_are_nonnegative(w in arb_bids(3, 6), smooth in any::<bool>()) {
        let steps: Vec<Step> = w.iter().map(|b| bids(b)).collect();
        let problem = if smooth { smoothed_adwords(3) } else { Problem::orthant(adwords(3)) };
        let trace = run_simultaneous(&problem, &steps).unwrap();
        for s in &trace.steps {
            prop_assert!(s.gain >= -1e-12, "gain {}", s.gain);
        }
        prop_assert!(duality_gap_diagnostics(&trace, None).passed);
    }

    #[test]
    fn duals_are_antitone(w in arb_bids(3, 6), smooth in any::<bool>(), seq in any::<bool>()) {
        let steps: Vec<Step> = w.iter().map(|b| bids(b)).collect();
        let problem = if smooth { smoothed_adwords(3) } else { Problem::orthant(adwords(3)) };
        let alg = if seq { Algorithm::Sequential } else { Algorithm::Simultaneous };
        let trace = run(&problem, &steps, alg).unwrap();
        for pair in trace.steps.windows(2) {
            for (a, b) in pair[0].dual.iter().zip(&pair[1].dual) {
                prop_assert!(b <= a, "{:?} then {:?}", pair[0].dual, pair[1].dual);
            }
        }
    }

    #[test]
    fn sequential_step_is_one_frank_wolfe_step(w in arb_bids(3, 6)) {
        let problem = smoothed_adwords(3);
        let Problem::Orthant { run: obj, .. } = &problem else { unreachable!() };
        let steps: Vec<Step> = w.iter().map(|b| bids(b)).collect();
        let trace = run_sequential(&problem, &steps).unwrap();
        let mut u = vec![0.0; 3];
        for (s, rec) in steps.iter().zip(&trace.steps) {
            // Linearize at the current point and take the best vertex.
            let g = obj.min_supergrad(&u).unwrap();
            let z = s.a.transpose_apply(&g);
            let mut best = (0.0, None);
            for j in 0..3 {
                if z[j] > best.0 {
                    best = (z[j], Some(j));
                }
            }
            let mut x = vec![0.0; 3];
            if let Some(j) = best.1 {
                x[j] = 1.0;
            }
            prop_assert_eq!(&rec.x, &x);
            for (ui, d) in u.iter_mut().zip(s.a.apply(&x)) {
                *ui += d;
            }
        }
    }

    #[test]
    fn dual_bounds_integral_optimum(w in arb_bids(2, 5), seq in any::<bool>(), smooth in any::<bool>()) {
        let steps: Vec<Step> = w.iter().map(|b| bids(b)).collect();
        let problem = if smooth { smoothed_adwords(2) } else { Problem::orthant(adwords(2)) };
        let alg = if seq { Algorithm::Sequential } else { Algorithm::Simultaneous };
        let trace = run(&problem, &steps, alg).unwrap();
        let rep = certify(&problem, &trace, BoundRule::RealizedAlpha).unwrap();
        prop_assert!(rep.dual >= integral_opt(&w) - 1e-9, "D = {} < {}", rep.dual, integral_opt(&w));
        prop_assert!(rep.passed);
    }

    #[test]
    fn adwords_certificates_hold(w in arb_bids(3, 8), seq in any::<bool>()) {
        let steps: Vec<Step> = w.iter().map(|b| bids(b)).collect();
        let alg = if seq { Algorithm::Sequential } else { Algorithm::Simultaneous };
        let plain = Problem::orthant(adwords(3));
        let trace = run(&plain, &steps, alg).unwrap();
        if !seq {
            let rep = certify(&plain, &trace, BoundRule::Beta { beta: 2.0, kappa: 0.0 }).unwrap();
            prop_assert!(rep.passed && rep.ratio_lb >= 0.5 - 1e-9, "{}", rep.ratio_lb);
        }
        let smooth = smoothed_adwords(3);
        let trace = run_simultaneous(&smooth, &steps).unwrap();
        let rep = certify(&smooth, &trace, BoundRule::Beta { beta: cap_design().1, kappa: 0.0 }).unwrap();
        prop_assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn logdet_runs_certify(seed in 0u64..1000, seq in any::<bool>()) {
        let inst = smoothgreed_core::instances::gen_logdet_stream(
            3, 8, 2.0, &smoothgreed_core::instances::LogDetSource::RandomVectors, seed).unwrap();
        let problem = Problem::logdet(inst.logdet_objective().unwrap());
        let alg = if seq { Algorithm::Sequential } else { Algorithm::Simultaneous };
        let trace = run(&problem, &inst.steps, alg).unwrap();
        let rep = certify(&problem, &trace, BoundRule::RealizedAlpha).unwrap();
        prop_assert!(rep.passed, "{rep:?}");
        prop_assert!(duality_gap_diagnostics(&trace, None).passed);
    }
}
