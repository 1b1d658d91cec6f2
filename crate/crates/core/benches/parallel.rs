use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pkb::{
    parse_sentence, saturate_all, Clause, EngineConfig, Execution, KnowledgeBase, Literal, Method,
    Query, Term, TruthValue,
};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn atom(i: usize) -> Term {
    Term::app("x", [Term::num(i as f64)])
}

/// Implication chains x_i -> x_{i+1} and x_i -> x_{i+2} with a few units.
fn chain(n: usize) -> Vec<Clause> {
    let v = |a, b| TruthValue::new(a, b).unwrap();
    let mut clauses = vec![Clause::new([Literal::pos(atom(0))], v(0.9, 0.0)).unwrap()];
    for i in 0..n {
        clauses.push(
            Clause::new(
                [Literal::neg(atom(i)), Literal::pos(atom(i + 1))],
                v(0.8, 0.05),
            )
            .unwrap(),
        );
        if i % 3 == 0 {
            clauses.push(
                Clause::new(
                    [Literal::neg(atom(i)), Literal::pos(atom(i + 2))],
                    v(0.6, 0.1),
                )
                .unwrap(),
            );
        }
    }
    clauses.push(Clause::new([Literal::neg(atom(n))], v(0.3, 0.0)).unwrap());
    clauses
}

fn saturation(c: &mut Criterion) {
    let config = EngineConfig {
        inference_cutoff: 0.05,
        ..EngineConfig::default()
    };
    let mut group = c.benchmark_group("saturate");
    for n in [8, 14] {
        let clauses = chain(n);
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &clauses, |b, clauses| {
                b.iter(|| saturate_all(black_box(clauses), &config, mode))
            });
        }
    }
    group.finish();
}

fn family_kb(people: usize) -> KnowledgeBase {
    let mut text = String::from(
        "(rule (and (parent $x $y) (parent $y $z)) (grand $x $z) (0.9 . 0))\n\
         (rule (and (grand $x $y) (parent $y $z)) (great $x $z) (0.8 . 0.05))\n\
         (rule (and (parent $x $y) (not (estranged $x))) (close $x $y) (0.7 . 0.1))\n",
    );
    for i in 0..people {
        text.push_str(&format!("(fact (parent p{i} p{}) (0.9 . 0))\n", i + 1));
        text.push_str(&format!("(fact (parent p{i} p{}) (0.6 . 0.1))\n", i + 2));
        if i % 4 == 0 {
            text.push_str(&format!("(fact (estranged p{i}) (0.5 . 0.2))\n"));
        }
    }
    KnowledgeBase::from_text(&text).unwrap()
}

fn batch_queries(c: &mut Criterion) {
    let mut group = c.benchmark_group("query_batch");
    for people in [20, 60] {
        let kb = family_kb(people);
        let queries: Vec<Query> = (0..people)
            .flat_map(|i| {
                ["great", "grand", "close"].map(|head| {
                    let goal = parse_sentence(&format!("({head} p{i} $z)")).unwrap();
                    Query::new(goal).cutoff(0.0).method(Method::BackwardChain)
                })
            })
            .collect();
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, people), &queries, |b, queries| {
                b.iter(|| kb.query_batch(black_box(queries), mode))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, saturation, batch_queries);
criterion_main!(benches);
