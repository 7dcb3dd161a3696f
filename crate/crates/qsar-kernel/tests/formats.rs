use proptest::prelude::*;
use qsar_kernel::gram_io::{read_gram, write_gram};
use qsar_kernel::model_io::{model_from_str, model_to_string, SavedModel, FORMAT_TAG};
use qsar_kernel::parallel::gram_parallel;
use qsar_kernel_core::eval::Label;
use qsar_kernel_core::kernel::gram;
use qsar_kernel_core::regression::{fit_least_squares, BasisSpec};
use qsar_kernel_core::svm::{train, SvmConfig};
use qsar_kernel_core::{Entanglement, FeatureMapFamily, FeatureMapSpec, KernelConfig};

fn points(n: usize, dim: usize, salt: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            (0..dim)
                .map(|d| (0.5 + 0.5 * ((i * 7 + d * 3) as f64 * 0.37 + salt).sin()).clamp(0.0, 1.0))
                .collect()
        })
        .collect()
}

fn labels(rows: &[Vec<f64>]) -> Vec<Label> {
    rows.iter()
        .map(|r| Label::from_sign((r[0] - 0.5) * (r[1] - 0.5)))
        .collect()
}

fn zz(n: usize, ent: Entanglement) -> FeatureMapSpec {
    FeatureMapSpec::new(FeatureMapFamily::Zz, n, 2, ent).unwrap()
}

fn kernels(n: usize) -> Vec<KernelConfig> {
    vec![
        KernelConfig::Linear,
        KernelConfig::Rbf { gamma: 0.7 },
        KernelConfig::Poly {
            degree: 3,
            offset: 0.5,
        },
        KernelConfig::QuantumExact {
            feature_map: zz(n, Entanglement::Full),
        },
        KernelConfig::QuantumShots {
            feature_map: FeatureMapSpec::new(FeatureMapFamily::Custom, n, 1, Entanglement::Linear).unwrap(),
            shots: 50,
            seed: 9,
        },
    ]
}

#[test]
fn gram_text_round_trip_is_bit_exact() {
    let rows = points(9, 3, 0.1);
    for cfg in kernels(3) {
        let g = gram(&cfg, &rows).unwrap();
        let mut buf = Vec::new();
        write_gram(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("9\n"));
        assert!(text.lines().nth(1).unwrap().split(' ').all(|t| t.contains('e')));
        let back = read_gram(buf.as_slice()).unwrap();
        assert_eq!(back, g);
        let bits = |m: &qsar_kernel_core::GramMatrix| m.entries().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&g));
    }
}

#[test]
fn malformed_gram_files_are_rejected() {
    let good = {
        let g = gram(&KernelConfig::Linear, &points(2, 2, 0.0)).unwrap();
        let mut buf = Vec::new();
        write_gram(&mut buf, &g).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let lines: Vec<&str> = good.lines().collect();
    let cases = [
        String::new(),
        format!("x\n{}", lines[1..].join("\n")),
        format!("{}\n{}\n{}", lines[0], lines[1], lines[3]),
        format!("{}\n{} 1.0\n{}\n{}", lines[0], lines[1], lines[2], lines[3]),
        format!("{}\n{}\n{}\ndigest=abc", lines[0], lines[1], lines[2]),
        format!("{}\n{}\n{}\ndigest=abc kernel={{\"kind\":\"rbf\",\"gamma\":-1.0}}", lines[0], lines[1], lines[2]),
    ];
    for c in cases {
        let err = read_gram(c.as_bytes()).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
    }
}

#[test]
fn parallel_gram_matches_sequential_for_any_worker_count() {
    let rows = points(17, 3, 0.4);
    for cfg in kernels(3) {
        let seq = gram(&cfg, &rows).unwrap();
        for workers in [1, 2, 3, 8] {
            assert_eq!(gram_parallel(&cfg, &rows, workers).unwrap(), seq, "{workers} workers, {cfg:?}");
        }
    }
}

#[test]
fn svm_model_round_trip_reproduces_decisions() {
    let rows = points(14, 2, 0.2);
    let y = labels(&rows);
    let queries = points(6, 2, 1.3);
    for cfg in kernels(2) {
        let g = gram(&cfg, &rows).unwrap();
        let m = train(&g, &y, &rows, &SvmConfig::default()).unwrap();
        let text = model_to_string(&SavedModel::Svm(m.clone())).unwrap();
        assert!(text.starts_with(&format!("{FORMAT_TAG} v1\n")));
        let SavedModel::Svm(back) = model_from_str(&text).unwrap() else {
            panic!("wrong model type");
        };
        assert_eq!(back, m);
        for q in &queries {
            assert_eq!(
                back.decision_value(q).unwrap().to_bits(),
                m.decision_value(q).unwrap().to_bits()
            );
        }
    }
}

#[test]
fn regression_model_round_trip() {
    let rows = points(12, 2, 0.7);
    let y: Vec<f64> = labels(&rows).iter().map(|l| l.sign()).collect();
    let mut m = fit_least_squares(&rows, &y, BasisSpec::Poly2, 0.01).unwrap();
    m.threshold = 0.25;
    let saved = SavedModel::Reg(m);
    let back = model_from_str(&model_to_string(&saved).unwrap()).unwrap();
    assert_eq!(back, saved);
}

#[test]
fn model_records_reject_bad_versions_and_truncation() {
    let m = SavedModel::Reg(fit_least_squares(&points(4, 1, 0.0), &[1.0, -1.0, 1.0, -1.0], BasisSpec::Affine, 0.0).unwrap());
    let text = model_to_string(&m).unwrap();
    assert!(model_from_str(&text.replace(" v1", " v2")).is_err());
    assert!(model_from_str(&text.replace("\nend\n", "\n")).is_err());
    assert!(model_from_str(&text.replace("affine", "cubic")).is_err());
    assert!(model_from_str("").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_round_trip_arbitrary_values(vals in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 16)) {
        let g = qsar_kernel_core::GramMatrix::from_entries(4, vals, KernelConfig::Rbf { gamma: 0.1 + 1e-17 }, "ab".into()).unwrap();
        let mut buf = Vec::new();
        write_gram(&mut buf, &g).unwrap();
        prop_assert_eq!(read_gram(buf.as_slice()).unwrap(), g);
    }
}
