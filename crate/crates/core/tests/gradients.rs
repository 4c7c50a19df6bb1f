use rgat_core::corefhead::{GapInstance, Label};
use rgat_core::depgraph::parse_conllu;
use rgat_core::embedstore::synth_embeddings;
use rgat_core::pipeline::{model_grad_check, tiny_dataset, Dataset, Model, TrainConfig};
use rgat_core::rgat::{FinalAggregator, InnerAggregator};

fn tiny_config(aggregator: FinalAggregator, inner: InnerAggregator, per_relation_attention: bool) -> TrainConfig {
    TrainConfig {
        d: 4,
        m: 3,
        n: 5,
        hidden: 6,
        aggregator,
        inner,
        per_relation_attention,
        ..TrainConfig::default()
    }
}

/// Two three-token documents: "Ann Bo she", head chain 0 <- 1 -> 2.
fn three_node_dataset() -> Dataset {
    let mut conllu = String::new();
    let mut rows = Vec::new();
    for (k, label) in [Label::A, Label::B].into_iter().enumerate() {
        let id = format!("three-{k}");
        conllu.push_str(&format!(
            "# newdoc id = {id}\n# text = Ann Bo she\n1\tAnn\t_\t_\t_\t_\t2\tnsubj\t_\t_\n2\tBo\t_\t_\t_\t_\t0\troot\t_\t_\n3\tshe\t_\t_\t_\t_\t2\tobj\t_\t_\n\n"
        ));
        rows.push(GapInstance {
            doc_id: id,
            text: "Ann Bo she".into(),
            pronoun: "she".into(),
            pronoun_offset: 7,
            a_text: "Ann".into(),
            a_offset: 0,
            b_text: "Bo".into(),
            b_offset: 4,
            label,
        });
    }
    let graphs = parse_conllu(&conllu).unwrap();
    let table = synth_embeddings(&graphs, 8, 3, None).unwrap();
    Dataset::assemble(rows, graphs, table).unwrap()
}

#[test]
fn full_loss_on_three_node_graphs() {
    let data = three_node_dataset();
    let cfg = tiny_config(FinalAggregator::Concat, InnerAggregator::Sum, false);
    let model = Model::init(&cfg, 8, 4).unwrap();
    let report = model_grad_check(&model, &data, &[0, 1], &cfg.regularizer(), 0, 1e-5, 1e-4).unwrap();
    assert_eq!(report.tensors.len(), model.named().len());
    for t in &report.tensors {
        assert!(t.passed, "{} rel {:e}", t.name, t.max_rel_error);
    }
}

#[test]
fn every_variant_on_five_token_documents() {
    let data = tiny_dataset(8, 9).unwrap();
    let batch: Vec<usize> = (0..data.len()).collect();
    for aggregator in [FinalAggregator::Concat, FinalAggregator::Sum, FinalAggregator::Mean] {
        for inner in [InnerAggregator::Sum, InnerAggregator::Mean] {
            for per_relation in [false, true] {
                let cfg = tiny_config(aggregator, inner, per_relation);
                let model = Model::init(&cfg, 8, 5).unwrap();
                let report = model_grad_check(&model, &data, &batch, &cfg.regularizer(), 1, 1e-5, 1e-4).unwrap();
                let failed: Vec<String> = report.failures().map(|t| format!("{} rel {:e}", t.name, t.max_rel_error)).collect();
                assert!(failed.is_empty(), "{aggregator:?}/{inner:?}/{per_relation}: {failed:?}");
            }
        }
    }
}
