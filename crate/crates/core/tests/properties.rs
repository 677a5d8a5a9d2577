use std::collections::BTreeSet;

use dynmatch::degrees::ApproxDegreeTable;
use dynmatch::graph::{format_stream, key, parse_stream};
use dynmatch::kernel::{Kernel, KernelParams, Variant};
use dynmatch::oracle::{exhaustive_max_matching, max_matching, mu, mwm};
use dynmatch::orientation::Orientation;
use dynmatch::pipeline::{DegreeChoice, Pipeline, PipelineConfig, PipelineVariant};
use dynmatch::recourse::plan_transform;
use dynmatch::reductions::fold::unfold_graph;
use dynmatch::reductions::sparsify::SparsifiedView;
use dynmatch::stability::PhaseMatcher;
use dynmatch::{AdjList, DynamicGraph, Matching, NodeId, UpdateEvent, UpdateKind};
use proptest::prelude::*;

/// Turn raw pairs into a valid stream: a pair toggles its edge.
fn toggles(n: usize, raw: &[(u8, u8)]) -> Vec<UpdateEvent> {
    let mut live = BTreeSet::new();
    let mut out = Vec::new();
    for &(a, b) in raw {
        let (u, v) = ((a as usize % n) as NodeId, (b as usize % n) as NodeId);
        if u == v {
            continue;
        }
        let e = key(u, v);
        if live.insert(e) {
            out.push(UpdateEvent::insert(e.0, e.1));
        } else {
            live.remove(&e);
            out.push(UpdateEvent::delete(e.0, e.1));
        }
    }
    out
}

fn edges_strategy(max_n: usize, max_m: usize) -> impl Strategy<Value = (usize, Vec<(NodeId, NodeId)>)> {
    (2..=max_n).prop_flat_map(move |n| {
        let pair = (0..n as NodeId, 0..n as NodeId);
        (Just(n), prop::collection::vec(pair, 0..max_m)).prop_map(|(n, raw)| {
            let set: BTreeSet<_> = raw.into_iter().filter(|(u, v)| u != v).map(|(u, v)| key(u, v)).collect();
            (n, set.into_iter().collect())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blossom_matches_exhaustive((n, edges) in edges_strategy(14, 40)) {
        let m = max_matching(&AdjList::from_edges(n, &edges));
        let set: BTreeSet<_> = edges.iter().copied().collect();
        prop_assert!(m.is_valid_in(|u, v| set.contains(&key(u, v))));
        prop_assert_eq!(m.len(), exhaustive_max_matching(n, &edges));
    }

    #[test]
    fn kernel_invariants_hold(raw in prop::collection::vec((0u8..24, 0u8..24), 0..300), pool in any::<bool>(), d in 2usize..8) {
        let n = 24;
        let variant = if pool { Variant::Pool } else { Variant::Scan };
        let mut k = Kernel::new(n, KernelParams::new(0.25, d).unwrap(), variant);
        for ev in toggles(n, &raw) {
            let changes = k.apply(&ev).unwrap();
            prop_assert!(changes.len() <= 3);
            let rep = k.check();
            prop_assert!(rep.passed(), "{:?}", rep.violations);
        }
    }

    #[test]
    fn orientation_respects_cap(raw in prop::collection::vec((0u8..30, 0u8..30), 0..400)) {
        let mut o = Orientation::new(30);
        for ev in toggles(30, &raw) {
            match ev.kind {
                UpdateKind::Insert => o.orient_insert(ev.u, ev.v).unwrap(),
                UpdateKind::Delete => o.orient_delete(ev.u, ev.v).unwrap(),
            };
            prop_assert!(o.max_out_degree() <= o.cap());
            prop_assert!(o.check().is_ok());
        }
    }

    #[test]
    fn transform_plans_keep_a_large_valid_matching((n, edges) in edges_strategy(30, 80), split in 0usize..80) {
        let cut = split.min(edges.len());
        let a = dynmatch::matching::greedy_maximal(n, &edges).edges();
        let mut rev = edges.clone();
        rev.reverse();
        let b = dynmatch::matching::greedy_maximal(n, &rev[..cut]).edges();
        let plan = plan_transform(&a, &b).unwrap();
        let floor = a.len().min(b.len()).saturating_sub(1);
        let mut cur = Matching::from_edges(n, &a).unwrap();
        for s in plan.steps() {
            if let Some((u, v)) = s.remove {
                prop_assert!(cur.remove(u, v));
            }
            if let Some((u, v)) = s.add {
                prop_assert!(cur.is_free(u) && cur.is_free(v));
                cur.add(u, v);
            }
            prop_assert!(cur.len() >= floor);
        }
        for (u, v) in b {
            prop_assert!(cur.contains(u, v));
        }
    }

    #[test]
    fn approximate_degrees_stay_within_alpha(
        raw in prop::collection::vec((0u8..16, 0u8..16, any::<bool>()), 0..300),
        alpha in 1usize..4,
    ) {
        let n = 16;
        let mut t = ApproxDegreeTable::new(n, alpha as f64, n).unwrap();
        let mut kernel = BTreeSet::new();
        for (a, b, flip) in raw {
            let (u, v) = (a as NodeId, b as NodeId);
            if u == v {
                continue;
            }
            let e = key(u, v);
            if !t.graph().has_edge(u, v) {
                t.insert_edge(u, v).unwrap();
            } else if flip {
                let ev = if kernel.insert(e) {
                    UpdateEvent::insert(e.0, e.1)
                } else {
                    kernel.remove(&e);
                    UpdateEvent::delete(e.0, e.1)
                };
                let touched = t.kernel_change(&ev).unwrap();
                prop_assert!(touched.iter().all(|(_, l)| l.len() <= t.quota()));
            } else if !kernel.contains(&e) {
                t.delete_edge(u, v).unwrap();
            }
            prop_assert!(t.max_error() as f64 <= alpha as f64);
        }
    }

    #[test]
    fn fold_preserves_weight(
        n in 2usize..9,
        raw in prop::collection::vec((0u8..9, 0u8..9, 1u64..5), 0..20),
    ) {
        let left = n / 2;
        let mut seen = BTreeSet::new();
        let edges: Vec<_> = raw
            .into_iter()
            .map(|(a, b, w)| ((a as usize % left.max(1)) as NodeId, (left + b as usize % (n - left)) as NodeId, w))
            .filter(|&(u, v, _)| u != v && seen.insert(key(u, v)))
            .collect();
        let f = unfold_graph(n, &edges).unwrap();
        prop_assert_eq!(mu(f.node_count(), f.edges()) as u64, mwm(n, &edges).unwrap());
        prop_assert_eq!(f.refold(f.edges()).unwrap().len(), edges.len());
    }

    #[test]
    fn sparsifier_degree_and_selection(raw in prop::collection::vec((0u8..20, 0u8..20), 0..300), m_hat in 1usize..40) {
        let mut sv = SparsifiedView::new(20, 0.5, m_hat).unwrap();
        let mut g = DynamicGraph::new(20);
        for ev in toggles(20, &raw) {
            g.apply(&ev).unwrap();
            sv.update(&ev).unwrap();
            prop_assert!(sv.sparse().max_degree() <= sv.capacity());
            prop_assert!(sv.sparse().edges().all(|(u, v)| g.has_edge(u, v)));
            prop_assert!(sv.check().is_ok());
        }
    }

    #[test]
    fn stability_matcher_is_near_maximum(raw in prop::collection::vec((0u8..18, 0u8..18), 0..250)) {
        let n = 18;
        let mut pm = PhaseMatcher::stability(n, 1.0 / 3.0, n).unwrap();
        let mut g = DynamicGraph::new(n);
        for ev in toggles(n, &raw) {
            g.apply(&ev).unwrap();
            pm.update(&ev).unwrap();
            let m = pm.matching();
            prop_assert!(m.is_valid_in(|u, v| g.has_edge(u, v)));
            prop_assert!(m.len() as f64 * (4.0 / 3.0) >= max_matching(&g).len() as f64);
        }
    }

    #[test]
    fn pipelines_stay_within_their_factor(raw in prop::collection::vec((0u8..20, 0u8..20), 0..200), beat in any::<bool>()) {
        let n = 20;
        let variant = if beat { PipelineVariant::BeatTwo } else { PipelineVariant::TwoPlusEps };
        let cfg = PipelineConfig { d: DegreeChoice::Fixed(20), ..PipelineConfig::desk(variant) };
        let mut p = Pipeline::new(n, cfg).unwrap();
        for ev in toggles(n, &raw) {
            p.update(&ev).unwrap();
            let g = p.graph();
            let out = p.output_matching();
            prop_assert!(out.is_valid_in(|u, v| g.has_edge(u, v)));
            prop_assert!(out.len() as f64 * cfg.approx_factor() >= max_matching(g).len() as f64);
        }
    }

    #[test]
    fn stream_text_round_trips(raw in prop::collection::vec((0u8..50, 0u8..50), 0..100)) {
        let events = toggles(50, &raw);
        prop_assert_eq!(parse_stream(&format_stream(&events)).unwrap(), events);
    }
}
