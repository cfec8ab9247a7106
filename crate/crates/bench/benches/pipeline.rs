use std::fmt::Write as _;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use itelos_core::alignment::{etr_predict, AlignmentPolicy};
use itelos_core::integration::{generate_entities, ColumnTarget, Integrator, SchemaMapping};
use itelos_core::metrics::{coverage, extensiveness, sparsity};
use itelos_core::model::{
    Category, Datatype, ElementSet, Etg, Label, PropertyDef, ResourceKind, ResourceMeta,
};

fn l(s: &str) -> Label {
    Label::new(s).unwrap()
}

fn etg(id: &str, etypes: usize, props: usize, offset: usize) -> Etg {
    let mut g = Etg::new(
        id,
        ResourceMeta {
            id: id.into(),
            kind: ResourceKind::Ontology,
            category: Category::Common,
            popularity: 0,
            origin: String::new(),
        },
    );
    for e in 0..etypes {
        let etype = l(&format!("etype_{}", e + offset));
        g.add_etype(etype.clone());
        for p in 0..props {
            g.put_property(
                &etype,
                PropertyDef::data(l(&format!("prop_{}", p + e)), Datatype::String),
            );
        }
    }
    g
}

fn metrics(c: &mut Criterion) {
    let mut group = c.benchmark_group("metrics");
    for n in [100usize, 1000, 10_000] {
        let alpha_labels: Vec<Label> = (0..n).map(|i| l(&format!("e{i}"))).collect();
        let beta_labels: Vec<Label> = (n / 2..n + n / 2).map(|i| l(&format!("e{i}"))).collect();
        let alpha = ElementSet::etypes(alpha_labels.iter());
        let beta = ElementSet::etypes(beta_labels.iter());
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                (
                    coverage(black_box(&alpha), black_box(&beta)).unwrap().value,
                    extensiveness(&alpha, &beta).unwrap().value,
                    sparsity(&alpha, &beta).unwrap().value,
                )
            })
        });
    }
    group.finish();
}

fn etr(c: &mut Criterion) {
    let mut group = c.benchmark_group("etr_predict");
    let policy = AlignmentPolicy::default();
    for n in [10usize, 50, 200] {
        let model = etg("model", n, 6, 0);
        let onto = etg("onto", n, 6, n / 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| etr_predict(black_box(&model), black_box(&onto), &policy))
        });
    }
    group.finish();
}

fn integration(c: &mut Criterion) {
    let mut group = c.benchmark_group("integration");
    let schema = etg("schema", 1, 4, 0);
    let etype = l("etype_0");
    let columns = ["prop_0", "prop_1", "prop_2", "prop_3"];
    let mapping = |dataset: &str| SchemaMapping {
        dataset_id: dataset.into(),
        etype: etype.clone(),
        columns: columns
            .iter()
            .map(|c| (l(c), ColumnTarget::Property(etype.clone(), l(c))))
            .collect(),
        identity_key: vec![l("prop_0")],
    };
    for rows in [100usize, 1000] {
        let mut csv = columns.join(",");
        csv.push('\n');
        for r in 0..rows {
            let _ = writeln!(csv, "k{r},a{r},b{},c{}", r % 7, r % 13);
        }
        let (first, second) = (mapping("left"), mapping("right"));
        group.bench_with_input(BenchmarkId::from_parameter(rows), &rows, |b, _| {
            b.iter(|| {
                let mut it = Integrator::new("eg", schema.clone());
                for m in [&first, &second] {
                    let fragment = generate_entities(csv.as_bytes(), m, &schema).unwrap();
                    it.integrate(fragment).unwrap();
                }
                it.finish().1.entities
            })
        });
    }
    group.finish();
}

criterion_group!(benches, metrics, etr, integration);
criterion_main!(benches);
