use grfabc::commands::{select_structures, AcceptanceRow, SelectionRow, ToyRow};
use grfabc::core::abc::Epsilon;
use grfabc::core::protein::{AminoSequence, CandidateStructure};
use grfabc::core::{Configuration, ModelPrior, ModelSpec, Simulator, SiteGraph};
use grfabc::formats::{csv_string, parse_contact_graph, parse_csv, render_contact_graph};
use grfabc::{Engine, RunConfig};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::ZERO
}

prop_compose! {
    fn toy_row()(
        dataset in any::<u64>(), true_model in 0u8..2, theta in finite(),
        s0 in any::<u32>(), s1 in any::<u32>(), exact_p0 in finite(), exact_log_bf in finite(),
        exact_category in "[a-z0-9, \"-]{0,12}", epsilon_mode in "(0|q:0\\.[0-9]{1,3})",
        epsilon in finite(), proposals in any::<u64>(), accepted in any::<u64>(),
        n0 in any::<u64>(), n1 in any::<u64>(),
        p0_hat in prop::option::of(finite()), bf_plugin in prop::option::of(finite()),
        bf_smoothed in finite(), log_bf_smoothed in finite(), category_smoothed in "[a-z1-]{0,14}",
        ratio in finite(),
    ) -> ToyRow {
        ToyRow {
            dataset, true_model, theta, s0, s1, exact_p0, exact_log_bf, exact_category, epsilon_mode,
            epsilon, proposals, accepted, n0, n1, p0_hat, bf_plugin, bf_smoothed, log_bf_smoothed,
            category_smoothed, ratio,
        }
    }
}

prop_compose! {
    fn selection_row()(
        reference in "[A-Za-z0-9_ ,]{1,10}", candidate in "[A-Za-z0-9_\"]{1,10}",
        bf in finite(), log_bf in finite(), category in "[a-z01-]{1,14}",
        n_reference in any::<u64>(), n_candidate in any::<u64>(), proposals in any::<u64>(),
        epsilon in finite(),
    ) -> SelectionRow {
        SelectionRow { reference, candidate, bf, log_bf, category, n_reference, n_candidate, proposals, epsilon }
    }
}

proptest! {
    #[test]
    fn toy_rows_survive_csv(rows in prop::collection::vec(toy_row(), 1..6)) {
        let text = csv_string(&rows).unwrap();
        let back: Vec<ToyRow> = parse_csv(&text).unwrap();
        prop_assert_eq!(&back, &rows);
        prop_assert_eq!(csv_string(&back).unwrap(), text);
    }

    #[test]
    fn selection_rows_survive_csv(rows in prop::collection::vec(selection_row(), 1..6)) {
        let text = csv_string(&rows).unwrap();
        let back: Vec<SelectionRow> = parse_csv(&text).unwrap();
        prop_assert_eq!(back, rows);
    }

    #[test]
    fn acceptance_rows_survive_csv(
        raw in prop::collection::vec((any::<u64>(), 0u8..2, any::<u64>(), any::<u64>(), any::<u64>(), finite()), 1..6)
    ) {
        let rows: Vec<AcceptanceRow> = raw
            .into_iter()
            .map(|(dataset, true_model, proposals, accepted_exact, accepted_tolerance, epsilon)| AcceptanceRow {
                dataset, true_model, proposals, accepted_exact, accepted_tolerance, epsilon,
            })
            .collect();
        let back: Vec<AcceptanceRow> = parse_csv(&csv_string(&rows).unwrap()).unwrap();
        prop_assert_eq!(back, rows);
    }

    #[test]
    fn contact_graphs_survive_rendering(n in 2usize..30, picks in prop::collection::vec((0usize..30, 0usize..30), 0..40)) {
        let mut edges: Vec<(usize, usize)> = picks
            .into_iter()
            .map(|(a, b)| (a % n, b % n))
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let graph = SiteGraph::new(n, edges).unwrap();
        let text = render_contact_graph(&graph);
        let back = parse_contact_graph(&text, "mem").unwrap();
        prop_assert_eq!(render_contact_graph(&back), text);
        prop_assert_eq!(back.n_sites(), n);
    }
}

#[test]
fn engine_results_do_not_depend_on_worker_count() {
    let x0 = Configuration::new(vec![0, 1, 1, 0, 1, 1, 1, 0, 0, 1, 0, 1]).unwrap();
    let sim = Simulator::new(
        vec![ModelSpec::toy_bernoulli(), ModelSpec::toy_markov()],
        ModelPrior::uniform(2),
        &x0,
        0,
        99,
    )
    .unwrap();
    let runs: Vec<_> = [1, 3]
        .into_iter()
        .map(|w| {
            Engine::new(Some(w)).unwrap().run(
                &sim,
                ModelPrior::uniform(2),
                30_000,
                Epsilon::Finite(2.5),
            )
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert!(runs[0].counts().total() > 0);
}

fn graph(n: usize, edges: &[(usize, usize)]) -> SiteGraph {
    SiteGraph::new(n, edges.to_vec()).unwrap()
}

#[test]
fn ranking_ignores_candidate_order() {
    let seq = AminoSequence::new("AVLIKDEGFWMS").unwrap();
    let chain: Vec<_> = (0..11).map(|i| (i, i + 1)).collect();
    let candidates = vec![
        CandidateStructure::new("chain", graph(12, &chain)),
        CandidateStructure::new(
            "star",
            graph(12, &(1..12).map(|i| (0, i)).collect::<Vec<_>>()),
        ),
        CandidateStructure::new(
            "pairs",
            graph(12, &(0..6).map(|i| (i, i + 6)).collect::<Vec<_>>()),
        ),
        CandidateStructure::new("ring", graph(12, &[chain.clone(), vec![(0, 11)]].concat())),
    ];
    let cfg = RunConfig {
        proposals: 3000,
        pilot: 300,
        sweeps: 5,
        ..RunConfig::default()
    };
    let engine = Engine::new(Some(2)).unwrap();
    let forward = select_structures(&cfg, &engine, &seq, &candidates, "chain").unwrap();
    let mut reversed = candidates.clone();
    reversed.reverse();
    let backward = select_structures(&cfg, &engine, &seq, &reversed, "chain").unwrap();
    assert_eq!(forward, backward);
    assert_eq!(forward.len(), 3);
    assert!(forward.windows(2).all(|w| w[0].bf >= w[1].bf));
}
