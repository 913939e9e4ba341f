use dgm_core::cut::{cut_decomposition, is_cut};
use dgm_core::graph::{check_decomposable, perfect_order};
use dgm_core::io::{parse_params, to_json, ParamDump};
use dgm_core::probs::CondProbs;
use dgm_core::random::{random_cond_probs, random_decomposable_graph, random_model};
use dgm_core::theta::ThetaKind;
use dgm_core::transform::{convert, ParamKind, Params};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KINDS: [ParamKind; 6] = [
    ParamKind::Joint,
    ParamKind::PCond,
    ParamKind::Theta(ThetaKind::Mod),
    ParamKind::Theta(ThetaKind::Cond),
    ParamKind::Theta(ThetaKind::Cliq),
    ParamKind::Theta(ThetaKind::Xi),
];

fn pcond(p: &Params) -> &CondProbs {
    match p {
        Params::PCond(cp) => cp,
        _ => panic!("expected pcond"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_graphs_are_decomposable(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_decomposable_graph(&mut rng, n);
        prop_assert!(check_decomposable(&g).is_chordal());
        let order = perfect_order(&g).unwrap();
        for l in 1..order.len() {
            let s = order.separator(l);
            prop_assert!(g.is_complete(s));
            prop_assert!(s.is_subset(order.history_before(l)));
        }
        prop_assert_eq!(order.vertices(), g.vertices());
    }

    #[test]
    fn every_kind_round_trips(seed in any::<u64>(), from in 0usize..6, to in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 5, 3).unwrap();
        let cp = random_cond_probs(&mut rng, model.spec(), &model.families());
        let start = Params::PCond(cp.clone());
        let a = convert(&model, &start, KINDS[from], 1e-9).unwrap();
        let b = convert(&model, &a, KINDS[to], 1e-9).unwrap();
        let back = convert(&model, &b, ParamKind::PCond, 1e-9).unwrap();
        prop_assert!(pcond(&back).max_abs_diff(&cp) < 1e-9);
    }

    #[test]
    fn dumps_read_back_exactly(seed in any::<u64>(), kind in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 4, 3).unwrap();
        let cp = random_cond_probs(&mut rng, model.spec(), &model.families());
        let p = convert(&model, &Params::PCond(cp), KINDS[kind], 1e-9).unwrap();
        let text = to_json(&ParamDump::from_params(&model, &p)).unwrap();
        let q = parse_params(&model, &text, "<dump>").unwrap();
        prop_assert_eq!(to_json(&ParamDump::from_params(&model, &q)).unwrap(), text);
    }

    #[test]
    fn cut_decomposition_exists_exactly_for_cuts(seed in any::<u64>(), mask in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 7, 2).unwrap();
        let g = model.graph();
        let a = g.vertices().intersection(dgm_core::varset::VarSet(mask));
        prop_assume!(!a.is_empty());
        let check = is_cut(g, a).unwrap();
        let decomp = cut_decomposition(g, a);
        prop_assert_eq!(check.is_cut(), decomp.is_ok());
        if let Ok(d) = decomp {
            let covered = d.components.iter().fold(a, |acc, c| acc.union(c.component));
            prop_assert_eq!(covered, g.vertices());
            for c in &d.components {
                prop_assert!(g.is_complete(c.boundary));
                prop_assert!(c.boundary.is_subset(a));
            }
        }
    }
}
