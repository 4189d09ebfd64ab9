use bcbounds_core::bounds::{
    bssc, conjecture_gap_search, lambda_grid, lemma_chain_check, marton_weighted_max, outer_region,
    outer_sum_rate, outer_sum_rate_search, OuterTerms, SearchConfig, LEMMA3_RANGES,
};
use bcbounds_core::probcore::{BroadcastChannel, Var};
use bcbounds_core::sampling::{random_channel, random_joint, rng_for};
use proptest::prelude::*;
use rand::Rng;

fn binary_channel(seed: u64) -> BroadcastChannel {
    let mut rng = rng_for(seed, 0);
    let (n1, n2) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
    random_channel(&mut rng, 2, n1, n2)
}

fn inner_cfg() -> SearchConfig {
    SearchConfig {
        restarts: 8,
        iterations: 200,
        polish: 1,
        card_w: Some(2),
        ..Default::default()
    }
}

#[test]
fn inner_sum_rate_below_outer_on_random_channels() {
    for s in 0..50 {
        let ch = binary_channel(300 + s);
        let inner = 2.0 * marton_weighted_max(&ch, 0.5, &inner_cfg()).unwrap().value;
        let outer = outer_sum_rate(&ch, &SearchConfig::default()).unwrap().value;
        assert!(
            inner <= outer + 1e-6,
            "channel {s}: inner {inner} > outer {outer}"
        );
        assert!(outer <= 1.0 + 1e-12 && inner <= 1.0 + 1e-12);
    }
}

#[test]
fn inner_below_outer_at_every_lambda() {
    let lambdas = lambda_grid(5);
    for s in 0..3 {
        let ch = binary_channel(400 + s);
        let outer = outer_region(&ch, &lambdas, &SearchConfig::default()).unwrap();
        for e in &outer.entries {
            let inner = marton_weighted_max(&ch, e.lambda, &inner_cfg()).unwrap();
            assert!(
                inner.value <= e.value + 1e-6,
                "lambda {}: {} > {}",
                e.lambda,
                inner.value,
                e.value
            );
        }
    }
}

#[test]
fn envelope_method_matches_direct_search() {
    let cfg = SearchConfig {
        restarts: 16,
        ..Default::default()
    };
    let mut chs = vec![bssc(0.5).unwrap()];
    chs.extend((0..10).map(|s| binary_channel(500 + s)));
    for (i, ch) in chs.iter().enumerate() {
        let env = outer_sum_rate(ch, &cfg).unwrap().value;
        let search = outer_sum_rate_search(ch, &cfg).unwrap().value;
        assert!(
            (env - search).abs() <= 1e-3,
            "channel {i}: envelope {env} search {search}"
        );
    }
}

#[test]
fn larger_auxiliaries_do_not_lose() {
    let ch = bssc(0.5).unwrap();
    let at = |card| {
        let cfg = SearchConfig {
            restarts: 16,
            card_u: Some(card),
            card_v: Some(card),
            ..Default::default()
        };
        outer_sum_rate_search(&ch, &cfg).unwrap().value
    };
    let (two, three) = (at(2), at(3));
    assert!(
        three >= two - 1e-9,
        "|U|=3 gives {three}, |U|=2 gives {two}"
    );
}

#[test]
fn witnesses_reproduce_reported_values() {
    let ch = bssc(0.5).unwrap();
    let o = outer_sum_rate(&ch, &SearchConfig::default()).unwrap();
    let t = OuterTerms::from_joint(&o.witness, &ch).unwrap();
    assert!((t.sum_bound() - o.value).abs() <= 1e-9);
    let r = outer_region(&ch, &[0.3], &SearchConfig::default()).unwrap();
    let e = &r.entries[0];
    let (v, _) = OuterTerms::from_joint(&e.witness, &ch)
        .unwrap()
        .polytope()
        .support(0.3)
        .unwrap();
    assert!((v - e.value).abs() <= 1e-9);
}

#[test]
fn searches_are_seed_deterministic() {
    let ch = binary_channel(600);
    let cfg = SearchConfig {
        restarts: 12,
        seed: 77,
        ..inner_cfg()
    };
    let a = marton_weighted_max(&ch, 0.4, &cfg).unwrap();
    let b = marton_weighted_max(&ch, 0.4, &cfg).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.witness, b.witness);
    let o1 = outer_sum_rate_search(&ch, &cfg).unwrap();
    let o2 = outer_sum_rate_search(&ch, &cfg).unwrap();
    assert_eq!(o1.value.to_bits(), o2.value.to_bits());
    let g1 = conjecture_gap_search(&ch, &cfg, None).unwrap();
    let g2 = conjecture_gap_search(&ch, &cfg, None).unwrap();
    assert_eq!(g1.gap.to_bits(), g2.gap.to_bits());
}

#[test]
fn chain_holds_on_random_joints() {
    let ch = bssc(0.5).unwrap();
    let mut rng = rng_for(31, 0);
    for _ in 0..1000 {
        let (nu, nv) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let j = random_joint(
            &mut rng,
            vec![Var::U, Var::V, Var::X],
            vec![nu, nv, 2],
            0.25,
        );
        let c = lemma_chain_check(&j, &ch).unwrap();
        assert!(c.terms.windows(2).all(|w| w[0] <= w[1] + 1e-10), "{c:?}");
    }
}

#[test]
fn restricted_input_law_never_beats_the_conjecture() {
    let ch = bssc(0.5).unwrap();
    let cfg = SearchConfig {
        restarts: 64,
        iterations: 100,
        ..Default::default()
    };
    for r in LEMMA3_RANGES {
        let g = conjecture_gap_search(&ch, &cfg, Some(r)).unwrap();
        assert!(g.gap <= 1e-6, "{r:?}: gap {}", g.gap);
        let eta = g.witness.marginalize(&[Var::X]).unwrap().table()[0];
        assert!(eta >= r.lo - 1e-12 && eta <= r.hi + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn outer_sum_rate_is_bounded(seed in any::<u64>()) {
        let ch = binary_channel(seed);
        let o = outer_sum_rate(&ch, &SearchConfig { grid: 513, ..Default::default() }).unwrap();
        let c = bcbounds_core::bounds::time_division_sum_rate(&ch);
        prop_assert!(o.value >= c - 1e-6);
        prop_assert!(o.value <= 1.0 + 1e-12);
    }
}
