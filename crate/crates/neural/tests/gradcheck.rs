use tispell_core::augment::{CorruptionId, CorruptionRecord};
use tispell_neural::gradcheck::gradient_check;
use tispell_neural::{examples_from_records, EncoderConfig, Example, HeadMode, TiSpell, Vocab};

fn record(source: &str, corrupted: &str, semi: &str, ops: Vec<CorruptionId>) -> CorruptionRecord {
    CorruptionRecord {
        id: "0".into(),
        source: source.into(),
        corrupted: corrupted.into(),
        semi_mask: semi.into(),
        ops,
        seed: 0,
        noops: vec![],
    }
}

fn tiny(mode: HeadMode, head_layers: usize) -> (TiSpell, Vec<Example>) {
    let cfg = EncoderConfig {
        layers: 2,
        heads: 2,
        d_model: 8,
        d_ff: 16,
        max_len: 8,
        dropout: 0.1,
        head_layers,
        head_mode: mode,
    };
    let vocab = Vocab::from_texts(["ཀཁགངིུ"]);
    let records = vec![
        record("ཀ་ཁི་ག", "ཀ་ག", "ཀ་[MASK]་ག", vec![CorruptionId::ALL[6]]),
        record("ཁུ་ང", "ཁ་ང", "ཁུ་ང", vec![CorruptionId::ALL[0]]),
        record("ག་ང", "ག་ང", "ག་ང", vec![]),
    ];
    let model = TiSpell::new(cfg, vocab, 11).unwrap();
    let ex = examples_from_records(&records, &model.vocab, 8);
    (model, ex)
}

#[test]
fn analytic_gradients_match_finite_differences() {
    for (mode, layers) in [
        (HeadMode::Dual, 2),
        (HeadMode::Dual, 1),
        (HeadMode::NoResidual, 2),
        (HeadMode::SingleHead, 2),
    ] {
        let (model, batch) = tiny(mode, layers);
        let report = gradient_check(&model, &batch, (1.0, 2.0), 8, 5, None).unwrap();
        let (name, err) = report.worst().unwrap().clone();
        assert!(
            report.max_rel_error < 1e-4,
            "{mode}/{layers}: {name} has relative error {err:e}"
        );
        assert_eq!(report.per_tensor.len(), model.params.tensors().len());
    }
}

#[test]
fn swapped_weights_are_also_exact() {
    let (model, batch) = tiny(HeadMode::Dual, 2);
    let report = gradient_check(&model, &batch, (2.0, 1.0), 4, 6, None).unwrap();
    assert!(report.max_rel_error < 1e-4);
}

#[test]
fn tampered_gradient_is_caught() {
    let (model, batch) = tiny(HeadMode::Dual, 2);
    let tamper = |g: &mut tispell_neural::params::ModelParams| {
        g.layers[1].value.w.mapv_inplace(|v| v * 1.5 + 1e-3);
    };
    let report = gradient_check(&model, &batch, (1.0, 2.0), 4, 5, Some(&tamper)).unwrap();
    assert!(report.max_rel_error > 1e-2, "{:e}", report.max_rel_error);
    assert_eq!(report.worst().unwrap().0, "layers.1.value.w");
}
