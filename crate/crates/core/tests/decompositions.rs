//! Atoms, bag families and decomposition/term bridges on generated inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twcanon::atoms::atom_decomposition;
use twcanon::bags::{bags_with_atoms, Params};
use twcanon::decomp::{decomposition_to_term, is_connectivity_sensitive, make_cs, term_to_decomposition, validate};
use twcanon::improved::improve;
use twcanon::oracle::{brute_iso, brute_treewidth, gen_partial_ktree, random_connected_graph};
use twcanon::VertexSet;

#[test]
fn atom_trees_validate_and_bridge_to_terms() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..60 {
        let n = rng.gen_range(1..=9);
        let g = random_connected_graph(n, rng.gen_range(0.0..0.4), &mut rng);
        let td = atom_decomposition(&g).unwrap().tree_decomposition();
        let w = validate(&g, &td).unwrap();
        let term = decomposition_to_term(&g, &td, (w.width + 1) as usize).unwrap();
        assert!(term.used().is_empty());
        let eval = term.eval();
        assert!(brute_iso(&eval.graph, &g).is_some());
        let (h, back) = term_to_decomposition(&term);
        assert!(validate(&h, &back).is_ok());
        assert!(brute_treewidth(&g) <= w.width);
    }
}

#[test]
fn make_cs_keeps_width_and_adds_sensitivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..60 {
        let n = rng.gen_range(1..=9);
        let g = random_connected_graph(n, rng.gen_range(0.0..0.4), &mut rng);
        let td = atom_decomposition(&g).unwrap().tree_decomposition();
        let before = validate(&g, &td).unwrap();
        let cs = make_cs(&g, &td).unwrap();
        let after = validate(&g, &cs).unwrap();
        assert!(after.width <= before.width);
        assert!(is_connectivity_sensitive(&g, &cs));
    }
}

#[test]
fn bag_families_cover_partial_ktrees() {
    for seed in 0..30u64 {
        let k = 1 + (seed % 3) as usize;
        let g = gen_partial_ktree(8 + (seed as usize % 12), k, 1.0, seed);
        let p = Params::new(k + 1);
        let imp = improve(&g, k + 1).unwrap();
        let run = bags_with_atoms(&imp, &p).unwrap();
        assert!(!run.family.is_empty(), "seed {seed}");
        let covered: VertexSet = run.family.iter().flatten().copied().collect();
        assert_eq!(covered, g.vertices());
        for d in &run.per_u {
            assert!(d.decomposition.bags.iter().flatten().all(|v| *v < g.n()));
        }
    }
}
