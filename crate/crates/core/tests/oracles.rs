mod common;

use common::*;
use critexp::digraph::{
    brute_force_cycle_mean, build_representation, min_cycle_mean_karp, min_cycle_mean_lowmem, Digraph,
    LowMemOptions,
};
use critexp::family::{deriv_log_inf, fixed_point_neg, ParamInterval};
use critexp::partition::{grid_point, phase_partition, phase_partition_with, Spacing};
use critexp::rigor::{log_lo, Interval};
use proptest::prelude::*;

fn point_in(lo: f64, hi: f64, t: f64) -> f64 {
    (lo + t * (hi - lo)).clamp(lo, hi)
}

fn interval() -> impl Strategy<Value = (f64, f64)> {
    let scale = prop_oneof![Just(1e-8), Just(1.0), Just(1e3)];
    (-1.0f64..1.0, -1.0f64..1.0, scale).prop_map(|(a, b, s)| (a.min(b) * s, a.max(b) * s))
}

fn positive_interval() -> impl Strategy<Value = (f64, f64)> {
    interval().prop_map(|(a, b)| (a.abs().min(b.abs()), a.abs().max(b.abs())))
}

fn omega() -> impl Strategy<Value = (f64, f64)> {
    (1.4f64..2.0, 0.0f64..1e-3).prop_map(|(a, w)| (a, (a + w).min(2.0)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn arithmetic_encloses_exact_results(
        (xl, xh) in interval(), (yl, yh) in interval(), s in 0.0f64..1.0, t in 0.0f64..1.0,
    ) {
        let (x, y) = (Interval::new(xl, xh).unwrap(), Interval::new(yl, yh).unwrap());
        let (px, py) = (point_in(xl, xh, s), point_in(yl, yh, t));
        let (qx, qy) = (q(px), q(py));
        let sum = x.add(&y).unwrap();
        prop_assert!(contains(sum.lo(), sum.hi(), &(&qx + &qy)));
        let diff = x.sub(&y).unwrap();
        prop_assert!(contains(diff.lo(), diff.hi(), &(&qx - &qy)));
        let prod = x.mul(&y).unwrap();
        prop_assert!(contains(prod.lo(), prod.hi(), &(&qx * &qy)));
        let sq = x.square().unwrap();
        prop_assert!(contains(sq.lo(), sq.hi(), &(&qx * &qx)));
        prop_assert!(sq.lo() >= 0.0);
        let neg = x.neg();
        prop_assert!(contains(neg.lo(), neg.hi(), &-qx));
    }

    #[test]
    fn sqrt_and_log_bounds((xl, xh) in positive_interval(), s in 0.0f64..1.0) {
        let x = Interval::new(xl, xh).unwrap();
        let px = point_in(xl, xh, s);
        let r = x.sqrt().unwrap();
        prop_assert!(contains_sqrt(r.lo(), r.hi(), &q(px)));
        if px > 0.0 {
            let l = log_lo(px).unwrap();
            prop_assert!(below_ln(l, px));
            prop_assert!((l - px.ln()).abs() <= 4.0 * f64::EPSILON * px.ln().abs().max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn set_operations((xl, xh) in interval(), (yl, yh) in interval(), s in 0.0f64..1.0) {
        let (x, y) = (Interval::new(xl, xh).unwrap(), Interval::new(yl, yh).unwrap());
        let h = x.hull(&y);
        prop_assert!(h.contains_interval(&x) && h.contains_interval(&y));
        match x.intersect(&y) {
            Some(i) => {
                prop_assert!(x.contains_interval(&i) && y.contains_interval(&i));
                prop_assert!(x.intersects(&y));
            }
            None => {
                let p = point_in(xl, xh, s);
                prop_assert!(!y.contains(p));
                prop_assert!(!x.intersects(&y));
            }
        }
    }

    #[test]
    fn single_precision_enclosures(a in -100.0f32..100.0, b in -100.0f32..100.0, c in -100.0f32..100.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        let x = Interval::new(lo, hi).unwrap();
        let y = Interval::point(c);
        let p = x.mul(&y).unwrap();
        let exact = q(lo as f64) * q(c as f64);
        prop_assert!(contains(p.lo() as f64, p.hi() as f64, &exact));
        let s = x.add(&y).unwrap();
        prop_assert!(contains(s.lo() as f64, s.hi() as f64, &(q(hi as f64) + q(c as f64))));
    }

    #[test]
    fn family_enclosures((al, ah) in omega(), s in 0.0f64..1.0, t in 0.0f64..1.0, (xl, xh) in (-2.0f64..2.0, 0.0f64..0.5)) {
        let w = ParamInterval::new(0, al, ah).unwrap();
        let a = point_in(al, ah, s);
        let qa = q(a);
        // fixed point: -2p - 1 = sqrt(1 + 4a)
        let p = w.fixed_point_neg().unwrap();
        let rhs = q(1.0) + q(4.0) * &qa;
        prop_assert!(contains_sqrt(-2.0 * p.hi() - 1.0, -2.0 * p.lo() - 1.0, &rhs));
        let dom = w.phase_domain().unwrap().interval();
        prop_assert!(dom.lo() == -dom.hi() && dom.lo() <= p.lo());

        let x = Interval::new(xl, (xl + xh).min(2.0)).unwrap();
        let px = point_in(x.lo(), x.hi(), t);
        let img = w.image(&x).unwrap();
        let fx = &qa - q(px) * q(px);
        prop_assert!(contains(img.lo(), img.hi(), &fx));

        // preimage of the image recovers px on one branch
        let pre = w.preimage(&img).unwrap();
        let hits = pre.branches().filter(|b| b.contains(px)).count();
        prop_assert!(hits >= 1);
        // and the branches enclose the exact square roots
        let y = Interval::new(img.lo(), img.hi()).unwrap();
        let py = point_in(y.lo(), y.hi(), s);
        let rad = &qa - q(py);
        if rad >= q(0.0) {
            let pos = pre.positive.unwrap();
            let pre_y = w.preimage(&Interval::point(py)).unwrap().positive.unwrap();
            prop_assert!(contains_sqrt(pre_y.lo(), pre_y.hi(), &rad));
            prop_assert!(pos.lo() <= pre_y.lo() || pos.contains_interval(&pre_y) || pre_y.lo() >= 0.0);
        }

        if !x.contains_zero() {
            let d = deriv_log_inf(&x).unwrap();
            prop_assert!(below_ln(d, 2.0 * px.abs()));
        }
    }

    #[test]
    fn fixed_point_of_point_parameter(a in 0.0f64..2.0) {
        let p = fixed_point_neg(&Interval::point(a)).unwrap();
        // f(p) = p, i.e. p^2 + p - a = 0, changes sign across the enclosure
        let g = |x: f64| q(x) * q(x) + q(x) - q(a);
        prop_assert!(g(p.lo()) >= q(0.0));
        prop_assert!(g(p.hi()) <= q(0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn partitions_are_symmetric_covers(
        (al, ah) in omega(), log_delta in -6.0f64..-1.5, half in 1usize..200, geometric in any::<bool>(),
    ) {
        let w = ParamInterval::new(0, al, ah).unwrap();
        let delta = 10f64.powf(log_delta);
        let spacing = if geometric { Spacing::Geometric } else { Spacing::Adapted };
        let part = phase_partition_with(&w, delta, 2 * half, spacing).unwrap();
        let cells = part.cells();
        let p = w.phase_domain().unwrap().radius();
        prop_assert_eq!(cells.len(), 2 * half);
        prop_assert_eq!(cells[0].lo(), -p);
        prop_assert_eq!(cells[2 * half - 1].hi(), p);
        prop_assert_eq!(cells[half - 1].hi(), -delta);
        prop_assert_eq!(cells[half].lo(), delta);
        for j in 0..2 * half {
            prop_assert!(cells[j].lo() < cells[j].hi());
            prop_assert_eq!(cells[j], cells[2 * half - 1 - j].neg());
            if j + 1 < 2 * half && j + 1 != half {
                prop_assert_eq!(cells[j].hi(), cells[j + 1].lo());
            }
        }
        prop_assert_eq!(part.critical(), Interval::new(-delta, delta).unwrap());
    }

    #[test]
    fn representation_graph_covers_sampled_transitions(
        (al, ah) in omega(), log_delta in -4.0f64..-1.5, half in 10usize..150,
        samples in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0usize..10_000), 20),
    ) {
        let w = ParamInterval::new(0, al, ah).unwrap();
        let delta = 10f64.powf(log_delta);
        let part = phase_partition(&w, delta, 2 * half).unwrap();
        let g = build_representation(&w, &part).unwrap();
        let k = part.len();
        prop_assert_eq!(g.num_vertices(), k + 1);
        prop_assert_eq!(g.out_edges(k).count(), 0);
        for (s, t, c) in samples {
            let c = c % k;
            let cell = part.cells()[c];
            let a = point_in(al, ah, s);
            let x = point_in(cell.lo(), cell.hi(), t);
            let fx = q(a) - q(x) * q(x);
            // every vertex whose cell contains f(x) must be a target, with a
            // weight below log|2x|
            let mut found = false;
            for (v, wt) in g.out_edges(c) {
                let target = if v == k { part.critical() } else { part.cells()[v] };
                if contains(target.lo(), target.hi(), &fx) {
                    found = true;
                    prop_assert!(below_ln(wt, 2.0 * x.abs()), "edge {c}->{v} weight {wt} x {x}");
                }
            }
            prop_assert!(found, "no edge from cell {c} covers f({x})");
        }
    }

    #[test]
    fn grids_agree_on_refinement(n in 1usize..5000, i in 0usize..5000, m in 2usize..5) {
        let i = i % (n + 1);
        let a: f64 = critexp::rigor::repr("1.4").unwrap();
        prop_assert_eq!(grid_point(a, 2.0, n, i).to_bits(), grid_point(a, 2.0, m * n, m * i).to_bits());
    }
}

fn random_graph() -> impl Strategy<Value = Digraph<f64>> {
    (1usize..=8).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, -20i32..20), 0..(3 * n)).prop_map(move |edges| {
            Digraph::from_edges(n, edges.into_iter().map(|(u, v, w)| (u, v, w as f64))).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn cycle_mean_algorithms_agree(g in random_graph()) {
        let brute = brute_force_cycle_mean(&g).unwrap();
        let karp = min_cycle_mean_karp(&g);
        let low = min_cycle_mean_lowmem(&g, &LowMemOptions::default());
        prop_assert_eq!(karp.value, brute.value);
        prop_assert_eq!(low.value.is_none(), brute.value.is_none());
        prop_assert_eq!(g.is_acyclic(), brute.value.is_none());
        if let (Some(l), Some(b)) = (low.value, brute.value) {
            prop_assert!(l <= b && b - l <= 1e-9, "lowmem {l} brute {b}");
            let cycle = low.cycle.unwrap();
            let mut sum = 0.0;
            for i in 0..cycle.len() {
                let w = g.weight(cycle[i], cycle[(i + 1) % cycle.len()]);
                prop_assert!(w.is_some(), "witness {:?} is not a cycle", cycle);
                sum += w.unwrap();
            }
            prop_assert!(sum / cycle.len() as f64 - b <= 1e-9);
            prop_assert_eq!(cycle[0], *cycle.iter().min().unwrap());
        }
    }

    #[test]
    fn dump_round_trips(g in random_graph()) {
        let text = g.dump();
        let back = Digraph::<f64>::parse_dump(text.as_bytes(), "mem").unwrap();
        prop_assert_eq!(back, g);
    }
}
