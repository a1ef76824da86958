use repcount_core::density::{
    chi_inf_slab, chi_p_exact, euler_product, hensel_nonsingular, main_term, raghavan_count, residue_count,
    singular_series_truncated, DensityConfig, LevelSchedule,
};
use repcount_core::enumerate::count_representations;
use repcount_core::linalg::IntMatrix;
use repcount_core::psi::normalize_psi;
use repcount_core::{expand_system, Form, TargetForm};

fn five_squares() -> Form {
    Form::sum_of_squares(5)
}

#[test]
fn series_approaches_the_euler_product() {
    let f = five_squares();
    let sys = expand_system(&f, 1).unwrap();
    let psi = TargetForm::diagonal(2, &[3]).unwrap();
    // Each prime at the largest level with p^l ≤ 64.
    let schedule = LevelSchedule::parse("2:6,3:3,5:2,7:2").unwrap().with(11, 1);
    let product = euler_product(&sys, &psi, 61, &schedule).unwrap();
    assert!(product.factors.iter().all(|(_, e)| e.value >= 0.0));
    let e = product.estimate.value;
    let coarse = singular_series_truncated(&sys, &psi, 8).unwrap().value;
    let fine = singular_series_truncated(&sys, &psi, 64).unwrap().value;
    assert!(coarse >= 0.0 && fine >= 0.0);
    assert!((fine - e).abs() / e < 0.02, "series {fine} vs product {e}");
    assert!((fine - e).abs() < (coarse - e).abs());
}

#[test]
fn main_term_predicts_five_squares() {
    let f = five_squares();
    let psi = TargetForm::diagonal(2, &[3]).unwrap();
    let exact = count_representations(&f, &psi).unwrap();
    assert_eq!(exact, 80);
    let mut cfg = DensityConfig::new(11);
    cfg.schedule = LevelSchedule::parse("2:6,3:3").unwrap();
    let rep = main_term(&f, &psi, &cfg).unwrap();
    assert!(rep.eps_consistent);
    let ratio = exact as f64 / rep.prediction;
    assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}, prediction {} ± {}", rep.prediction, rep.stderr);
}

#[test]
fn slab_is_invariant_under_relabelling_blocks() {
    let sys = expand_system(&five_squares(), 2).unwrap();
    let psi = TargetForm::parse("11:2,12:1,22:3", 2, 2).unwrap();
    let swapped = psi.permute(&[1, 0]).unwrap();
    let a = chi_inf_slab(&sys, &normalize_psi(&psi).unwrap(), 0.05, 400_000, 1).unwrap();
    let b = chi_inf_slab(&sys, &normalize_psi(&swapped).unwrap(), 0.05, 400_000, 2).unwrap();
    assert!(a.value > 0.0 && b.value > 0.0);
    let sigma = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
    assert!((a.value - b.value).abs() <= 3.0 * sigma, "{} vs {} (σ = {sigma})", a.value, b.value);
}

#[test]
fn nonsingular_reductions_stabilise_at_level_one() {
    let mut checked = 0;
    for p in [3u64, 5, 7] {
        for coeffs in [[1i64, 1, 2], [1, 2, 3], [2, 3, 5], [1, 1, 1]] {
            let text = format!("{} x1^2 + {} x2^2 + {} x3^2", coeffs[0], coeffs[1], coeffs[2]);
            let f = Form::parse(&text, 3).unwrap();
            let sys = expand_system(&f, 1).unwrap();
            for n in 1..=6i64 {
                let psi = TargetForm::diagonal(2, &[n]).unwrap();
                if !hensel_nonsingular(&sys, &psi, p).unwrap() {
                    continue;
                }
                let l1 = chi_p_exact(&sys, &psi, p, 1).unwrap().value;
                let l2 = chi_p_exact(&sys, &psi, p, 2).unwrap().value;
                assert_eq!(l1, l2, "{text} = {n} at p = {p}");
                checked += 1;
            }
        }
    }
    assert!(checked > 20);
}

#[test]
fn raghavan_congruences_are_the_general_system() {
    let grams = [
        vec![vec![2i64, 1, 0], vec![1, 3, 1], vec![0, 1, 4]],
        vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 2, 1], vec![0, 0, 1, 2]],
    ];
    let targets = [vec![vec![2i64, 1], vec![1, 3]], vec![vec![1, 0], vec![0, 2]]];
    for a in &grams {
        let a = IntMatrix::from_rows(a).unwrap();
        let f = Form::from_gram(&a).unwrap();
        let sys = expand_system(&f, 2).unwrap();
        for b in &targets {
            let b = IntMatrix::from_rows(b).unwrap();
            let psi = TargetForm::from_gram(&b).unwrap();
            for q in [3u64, 5, 9] {
                assert_eq!(raghavan_count(&a, &b, q).unwrap(), residue_count(&sys, &psi, q).unwrap(), "q = {q}");
            }
        }
    }
}
