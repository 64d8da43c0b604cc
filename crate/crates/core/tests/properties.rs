mod common;

use std::collections::BTreeMap;

use flownet::dynamics::{network_limit_flow, rhs, FixedPointConfig};
use flownet::flows::{FlowFunction, PerturbationSpec};
use flownet::resilience::cut_attack;
use flownet::routing::{cooperative_gap, LocalRouting, LogitPolicy};
use flownet::topology::max_flow_value;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn min_cut_equals_max_flow(seed in any::<u64>(), n in 2usize..=8, extra in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topo = common::random_dag(&mut rng, n, extra);
        let caps: Vec<f64> = (0..topo.link_count()).map(|_| rand::Rng::gen_range(&mut rng, 0.1..5.0)).collect();
        let mc = flownet::topology::min_cut_capacity(&topo, &caps).unwrap();
        let mf = max_flow_value(&topo, &caps).unwrap();
        prop_assert!((mc.capacity - mf).abs() <= 1e-12 * mc.capacity.max(1.0));
        prop_assert!((mc.cut.capacity(&topo, &caps) - mc.capacity).abs() <= 1e-12 * mc.capacity);
    }

    #[test]
    fn logit_split_is_a_cooperative_distribution(
        eta in 0.05f64..5.0,
        weights in prop::collection::vec(0.01f64..20.0, 1..6),
        rho in prop::collection::vec(0.0f64..50.0, 6),
        sigma in prop::collection::vec(0.0f64..50.0, 6),
    ) {
        let k = weights.len();
        let p = LogitPolicy::new(eta, weights).unwrap();
        let g = p.route(&rho[..k]).into_vec();
        prop_assert!((g.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(g.iter().all(|&x| x >= 0.0));
        let jac = p.jacobian(&rho[..k]);
        for (e, row) in jac.iter().enumerate() {
            prop_assert!(row.iter().sum::<f64>().abs() <= 1e-12);
            for (j, &v) in row.iter().enumerate() {
                if j != e {
                    prop_assert!(v >= 0.0);
                }
            }
        }
        prop_assert!(cooperative_gap(&p, &rho[..k], &sigma[..k]) <= 1e-12);
    }

    #[test]
    fn limit_flow_is_an_equilibrium(seed in any::<u64>(), n in 2usize..=6, extra in 0usize..6, frac in 0.05f64..0.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (net, policy) = common::random_network(&mut rng, n, extra);
        let inflow = frac * net.outgoing_capacity(net.origin());
        let limit = network_limit_flow(&net, &policy, inflow, &FixedPointConfig::default()).unwrap();
        for &v in net.order() {
            let out = net.topology().outgoing(v);
            if out.is_empty() || out.iter().any(|&k| limit.saturated[k]) {
                continue;
            }
            let sum: f64 = out.iter().map(|&k| limit.flows[k]).sum();
            prop_assert!((sum - limit.node_inflows[v.0]).abs() <= 1e-8 * (1.0 + sum));
        }
        prop_assert!(limit.saturation_is_blockwise(&net));
        // at an interior equilibrium the vector field vanishes
        if limit.saturated.iter().all(|s| !s) {
            let d = rhs(&net, &policy, inflow, &limit.densities).unwrap();
            prop_assert!(d.iter().all(|x| x.abs() <= 1e-8), "{d:?}");
        }
    }

    #[test]
    fn local_limit_flow_is_monotone_in_inflow(
        eta in 0.2f64..3.0,
        a in prop::collection::vec(0.2f64..5.0, 3),
        fmax in prop::collection::vec(0.2f64..3.0, 3),
        t1 in 0.01f64..0.98,
        dt in 0.001f64..0.5,
    ) {
        let flows: Vec<FlowFunction> = fmax.iter().map(|&f| FlowFunction::exponential(1.0, f).unwrap()).collect();
        let refs: Vec<&FlowFunction> = flows.iter().collect();
        let cap: f64 = fmax.iter().sum();
        let p = LogitPolicy::new(eta, a).unwrap();
        let cfg = FixedPointConfig::default();
        let lo = flownet::dynamics::local_limit_flow(&p, &refs, t1 * cap, &cfg).unwrap();
        let hi = flownet::dynamics::local_limit_flow(&p, &refs, ((t1 + dt).min(0.99)) * cap, &cfg).unwrap();
        for (x, y) in lo.flows.iter().zip(&hi.flows) {
            prop_assert!(*x <= *y + 1e-9);
        }
    }

    #[test]
    fn scaling_magnitude_is_lost_capacity(seed in any::<u64>(), n in 2usize..=6, extra in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (net, _) = common::random_network(&mut rng, n, extra);
        let mut factors = BTreeMap::new();
        for k in 0..net.link_count() {
            if rand::Rng::gen_bool(&mut rng, 0.5) {
                factors.insert(k, rand::Rng::gen_range(&mut rng, 0.01..=1.0));
            }
        }
        let spec = PerturbationSpec::scaling(net.flows(), &factors).unwrap();
        let expected: f64 = factors.iter().map(|(&k, &e)| (1.0 - e) * net.flows()[k].f_max()).sum();
        prop_assert!((spec.magnitude() - expected).abs() <= 1e-12 * (1.0 + expected));
        prop_assert_eq!(spec.stretching(), 1.0);
    }

    #[test]
    fn cut_attack_magnitude(seed in any::<u64>(), n in 2usize..=6, extra in 0usize..6, alpha in 0.01f64..=1.0, frac in 0.05f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (net, _) = common::random_network(&mut rng, n, extra);
        let c = net.min_cut().unwrap().capacity;
        let inflow = frac * c;
        let atk = cut_attack(&net, alpha, inflow).unwrap();
        prop_assert!((atk.magnitude() - (c - alpha * inflow / 2.0)).abs() <= 1e-12 * c);
        let perturbed = net.perturbed(&atk.perturbation).min_cut().unwrap().capacity;
        prop_assert!(perturbed <= alpha * inflow / 2.0 * (1.0 + 1e-12));
    }
}
