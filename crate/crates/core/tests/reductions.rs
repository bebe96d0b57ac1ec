use cavity_core::instances::{parse_cnf, CnfFormula, Graph, SetSystem};
use cavity_core::radical::Radical;
use cavity_core::reductions::*;
use proptest::prelude::*;

/// Every subset achieving the target, by plain enumeration with exact sums.
fn witnesses(inst: &SubsetSumInstance) -> Vec<Vec<bool>> {
    let k = inst.len();
    assert!(k <= 20, "test oracle limited to 20 weights");
    (0u64..1 << k)
        .map(|mask| (0..k).map(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
        .filter(|c| inst.is_witness(c))
        .collect()
}

fn feasible(inst: &SubsetSumInstance) -> bool {
    !witnesses(inst).is_empty()
}

fn k3() -> Graph {
    Graph::undirected(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
}

fn p3() -> Graph {
    Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap()
}

fn star() -> Graph {
    Graph::undirected(4, &[(0, 1), (0, 2), (0, 3)]).unwrap()
}

fn decodes_all(inst: &SubsetSumInstance) {
    for w in witnesses(inst) {
        decode(inst, &w).unwrap();
    }
}

#[test]
fn sat_examples() {
    let f = parse_cnf("p cnf 2 1\n1 2 -1 0\n").unwrap();
    let inst = encode_3sat(&f).unwrap();
    assert_eq!(inst.len(), 6);
    assert!(feasible(&inst));
    for w in witnesses(&inst) {
        let d = decode(&inst, &w).unwrap();
        let Solution::Assignment(x) = d.solution else { panic!() };
        assert!(f.is_satisfied_by(&x));
    }
    let unsat = CnfFormula::new(1, vec![[1, 1, 1], [-1, -1, -1]]).unwrap();
    assert!(!feasible(&encode_3sat(&unsat).unwrap()));
    assert!(encode_3sat(&CnfFormula::new(2, vec![]).unwrap()).is_err());
}

#[test]
fn sat_target_and_ranks() {
    let f = CnfFormula::new(2, vec![[1, -2, 2]]).unwrap();
    let inst = encode_3sat(&f).unwrap();
    // T = √α_2 + √α_3 + 3√α_1 for m = 1, n = 2.
    let mut t = Radical::term(1, 3);
    t.add_term(2, 1);
    t.add_term(3, 1);
    assert_eq!(inst.target, t);
    assert_eq!(inst.roles[0], RoleTag::VarTrue(1));
    assert_eq!(inst.weights[0], Radical::basis(2) + Radical::basis(1));
    assert_eq!(inst.weights[3], Radical::basis(3) + Radical::basis(1));
}

#[test]
fn sat_decode_reads_var_true() {
    let f = CnfFormula::new(1, vec![[1, 1, 1]]).unwrap();
    let inst = encode_3sat(&f).unwrap();
    // x1 true fills the clause three times, no slack needed.
    let chosen = [true, false, false, false];
    let d = decode(&inst, &chosen).unwrap();
    assert_eq!(d.solution, Solution::Assignment(vec![true]));
}

#[test]
fn vertex_cover_examples() {
    let g = k3();
    for k in 0..=3 {
        assert_eq!(encode_vertex_cover(&g, k).unwrap().len(), 6);
    }
    let two = encode_vertex_cover(&g, 2).unwrap();
    assert!(feasible(&two));
    decodes_all(&two);
    assert!(!feasible(&encode_vertex_cover(&g, 1).unwrap()));
    assert!(encode_vertex_cover(&g, 4).is_err());

    let chosen = forward_map(&two, &Solution::Vertices(vec![1, 2])).unwrap();
    let d = decode(&two, &chosen).unwrap();
    assert_eq!(d.solution, Solution::Vertices(vec![1, 2]));
    assert_eq!(d.certificate.iter().filter(|l| l.contains("covered")).count(), 3);
}

#[test]
fn mis_examples() {
    let inst = encode_mis(&p3(), 2).unwrap();
    assert_eq!(inst.len(), 5);
    let ws = witnesses(&inst);
    assert_eq!(ws.len(), 1);
    assert_eq!(decode(&inst, &ws[0]).unwrap().solution, Solution::Vertices(vec![1, 3]));
    assert!(!feasible(&encode_mis(&k3(), 2).unwrap()));
}

#[test]
fn clique_examples() {
    let inst = encode_clique(&k3(), 3).unwrap();
    assert_eq!(inst.target, Radical::term(4, 9));
    assert!(feasible(&inst));
    decodes_all(&inst);
    assert!(!feasible(&encode_clique(&p3(), 3).unwrap()));
}

#[test]
fn matching_examples() {
    assert_eq!(encode_matching(&p3(), 1).unwrap().len(), 5);
    assert!(feasible(&encode_matching(&p3(), 1).unwrap()));
    assert!(!feasible(&encode_matching(&p3(), 2).unwrap()));
}

#[test]
fn exact_cover_examples() {
    let s = SetSystem::new(2, vec![vec![0], vec![1], vec![0, 1]]).unwrap();
    let inst = encode_exact_cover(&s).unwrap();
    assert_eq!(inst.len(), 3);
    let ws = witnesses(&inst);
    assert_eq!(ws.len(), 2);
    let mut decoded: Vec<_> = ws.iter().map(|w| decode(&inst, w).unwrap().solution).collect();
    decoded.sort_by_key(|s| format!("{s:?}"));
    assert_eq!(decoded, vec![Solution::Subsets(vec![1, 2]), Solution::Subsets(vec![3])]);
    let lonely = SetSystem::new(2, vec![vec![0]]).unwrap();
    assert!(!feasible(&encode_exact_cover(&lonely).unwrap()));
}

#[test]
fn set_packing_examples() {
    let disjoint = SetSystem::new(2, vec![vec![0], vec![1]]).unwrap();
    let inst = encode_set_packing(&disjoint, 2).unwrap();
    assert_eq!(inst.len(), 4);
    assert!(feasible(&inst));
    let overlap = SetSystem::new(2, vec![vec![0, 1], vec![0]]).unwrap();
    assert!(!feasible(&encode_set_packing(&overlap, 2).unwrap()));
}

#[test]
fn maxcut_examples() {
    let two = encode_maxcut(&k3(), 2).unwrap();
    assert_eq!(two.len(), 9);
    assert!(feasible(&two));
    decodes_all(&two);
    assert!(!feasible(&encode_maxcut(&k3(), 3).unwrap()));
    // Triangle cuts have size 0 or 2, so "at least 1" lands on 2.
    let (k, _) = maxcut_at_least(&k3(), 1, |i| Ok(feasible(i))).unwrap().unwrap();
    assert_eq!(k, 2);
    assert!(maxcut_at_least(&k3(), 3, |i| Ok(feasible(i))).unwrap().is_none());
}

#[test]
fn dominating_set_examples() {
    let inst = encode_dominating_set(&star(), 1).unwrap();
    assert_eq!(inst.len(), 16);
    let ws = witnesses(&inst);
    assert!(!ws.is_empty());
    for w in &ws {
        assert_eq!(decode(&inst, w).unwrap().solution, Solution::Vertices(vec![1]));
    }
    let edge = Graph::undirected(2, &[(0, 1)]).unwrap();
    assert!(feasible(&encode_dominating_set(&edge, 1).unwrap()));
    // An isolated vertex must belong to the set.
    let isolated = Graph::undirected(2, &[]).unwrap();
    assert!(!feasible(&encode_dominating_set(&isolated, 1).unwrap()));
    assert!(feasible(&encode_dominating_set(&isolated, 2).unwrap()));
}

#[test]
fn coloring_examples() {
    let inst = encode_3coloring(&k3()).unwrap();
    assert_eq!(inst.len(), 18);
    let chosen = forward_map(&inst, &Solution::Coloring(vec![Color::Red, Color::Green, Color::Blue])).unwrap();
    assert!(inst.is_witness(&chosen));
    let edge = Graph::undirected(2, &[(0, 1)]).unwrap();
    let e = encode_3coloring(&edge).unwrap();
    assert_eq!(e.len(), 9);
    // 3 · 2 proper colorings of one edge, each with a unique slack pattern.
    assert_eq!(witnesses(&e).len(), 6);
    decodes_all(&e);
}

#[test]
fn decode_rejects_non_witness() {
    let inst = encode_vertex_cover(&k3(), 2).unwrap();
    let err = decode(&inst, &[false; 6]).unwrap_err();
    assert!(matches!(err, cavity_core::Error::Precondition(_)));
    assert!(decode(&inst, &[false; 5]).is_err());
}

#[test]
fn empty_target_decodes_to_empty_solution() {
    let edgeless = Graph::undirected(2, &[]).unwrap();
    let inst = encode_vertex_cover(&edgeless, 0).unwrap();
    assert!(inst.target.is_zero());
    let d = decode(&inst, &[false, false]).unwrap();
    assert_eq!(d.solution, Solution::Vertices(vec![]));
}

#[test]
fn directed_graphs_are_rejected() {
    let d = Graph::new(2, vec![(0, 1)], true, None).unwrap();
    assert!(encode_vertex_cover(&d, 1).is_err());
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let len = pairs.len();
        prop::collection::vec(any::<bool>(), len).prop_map(move |keep| {
            let edges: Vec<_> = pairs.iter().zip(&keep).filter(|(_, &k)| k).map(|(&e, _)| e).collect();
            Graph::undirected(n, &edges).unwrap()
        })
    })
}

fn arb_cnf() -> impl Strategy<Value = CnfFormula> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(n, m)| {
        let lit = (1..=n as i32, any::<bool>()).prop_map(|(v, neg)| if neg { -v } else { v });
        prop::collection::vec([lit.clone(), lit.clone(), lit], m)
            .prop_map(move |clauses| CnfFormula::new(n, clauses).unwrap())
    })
}

proptest! {
    #[test]
    fn graph_encoders_meet_cost_and_rank_windows(g in arb_graph(7), k in 0usize..8) {
        let (n, m) = (g.num_vertices, g.num_edges());
        let checks: Vec<(Result<SubsetSumInstance, _>, usize, u32)> = vec![
            (encode_vertex_cover(&g, k.min(n)), n + m, (m + 1) as u32),
            (encode_mis(&g, k.min(n)), n + m, (m + 1) as u32),
            (encode_clique(&g, k.min(n)), n + m, (n + 1) as u32),
            (encode_matching(&g, k.min(m)), n + m, (n + 1) as u32),
            (encode_maxcut(&g, k.min(m)), n + 2 * m, (m + 1) as u32),
            (encode_dominating_set(&g, k.min(n)), n + 4 * m, (n + m + 1) as u32),
            (encode_3coloring(&g), 3 * (n + m), (n + 3 * m).max(1) as u32),
        ];
        for (inst, cost, window) in checks {
            let inst = inst.unwrap();
            prop_assert_eq!(inst.len(), cost);
            prop_assert!(inst.audit.holds());
            for w in inst.weights.iter().chain(std::iter::once(&inst.target)) {
                prop_assert!(w.ranks().all(|p| p <= window));
            }
        }
    }

    #[test]
    fn sat_pairing_and_soundness(f in arb_cnf()) {
        let inst = encode_3sat(&f).unwrap();
        prop_assert_eq!(inst.len(), 2 * (f.num_vars + f.num_clauses()));
        for w in witnesses(&inst) {
            for i in 1..=f.num_vars {
                let t = inst.role_index(&RoleTag::VarTrue(i)).unwrap();
                let fl = inst.role_index(&RoleTag::VarFalse(i)).unwrap();
                prop_assert!(w[t] ^ w[fl]);
            }
            let Solution::Assignment(x) = decode(&inst, &w).unwrap().solution else { unreachable!() };
            prop_assert!(f.is_satisfied_by(&x));
        }
    }

    #[test]
    fn sat_completeness(f in arb_cnf()) {
        let inst = encode_3sat(&f).unwrap();
        for mask in 0u32..1 << f.num_vars {
            let x: Vec<bool> = (0..f.num_vars).map(|i| mask >> i & 1 == 1).collect();
            let sol = Solution::Assignment(x.clone());
            match forward_map(&inst, &sol) {
                Ok(chosen) => prop_assert!(f.is_satisfied_by(&x) && inst.is_witness(&chosen)),
                Err(e) => prop_assert!(!f.is_satisfied_by(&x), "{}", e),
            }
        }
    }

    #[test]
    fn set_encoders_cost(universe in 1usize..6, subsets in prop::collection::vec(prop::collection::btree_set(0usize..6, 0..4), 0..5)) {
        let subsets: Vec<Vec<usize>> = subsets.into_iter().map(|s| s.into_iter().filter(|&e| e < universe).collect()).collect();
        let s = SetSystem::new(universe, subsets).unwrap();
        prop_assert_eq!(encode_exact_cover(&s).unwrap().len(), s.subsets.len());
        prop_assert_eq!(encode_set_packing(&s, 0).unwrap().len(), universe + s.subsets.len());
    }
}

#[test]
fn encodings_round_trip_through_json() {
    let f = parse_cnf("p cnf 3 2\n1 -2 3 0\n-1 2 3 0\n").unwrap();
    let sets = SetSystem::new(3, vec![vec![0], vec![1, 2], vec![0, 2]]).unwrap();
    let cases = vec![
        encode_3sat(&f).unwrap(),
        encode_clique(&k3(), 2).unwrap(),
        encode_dominating_set(&star(), 1).unwrap(),
        encode_3coloring(&p3()).unwrap(),
        encode_set_packing(&sets, 2).unwrap(),
        encode_exact_cover(&sets).unwrap(),
    ];
    for inst in cases {
        let back = SubsetSumInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
    }
    let mut tampered = encode_clique(&k3(), 2).unwrap().to_json();
    tampered["weights"][0] = serde_json::json!("[(1,7)]");
    assert!(SubsetSumInstance::from_json(&tampered).is_err());
}
