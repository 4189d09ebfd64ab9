use bcbounds_core::constructions::{
    atom_functionals, deterministic_identities, deterministic_lift, independence_identities,
    lift_to_independent, max_residual, reduce_support, verify_random, Side,
};
use bcbounds_core::probcore::{BroadcastChannel, JointPmf, Pmf, Var};
use bcbounds_core::sampling::{random_channel, random_joint, rng_for, uniform_simplex};
use proptest::prelude::*;
use rand::Rng;

fn channels(seed: u64) -> Vec<BroadcastChannel> {
    (0..10)
        .map(|c| {
            let mut rng = rng_for(seed, 1000 + c);
            let nx = if c < 5 { 2 } else { 3 };
            random_channel(&mut rng, nx, 2 + (c as usize % 2), 3)
        })
        .collect()
}

#[test]
fn eight_identities_on_a_thousand_joints() {
    let chs = channels(21);
    let mut worst = 0.0f64;
    for t in 0..1000u64 {
        let mut rng = rng_for(21, t);
        let ch = &chs[(t % 10) as usize];
        let (nu, nv) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let j = random_joint(
            &mut rng,
            vec![Var::U, Var::V, Var::X],
            vec![nu, nv, ch.input_size()],
            0.3,
        );
        let lifted = lift_to_independent(&j).unwrap();
        let det = deterministic_lift(&j).unwrap();
        let mut checks = independence_identities(&j, &lifted, ch).unwrap();
        checks.extend(deterministic_identities(&j, &det, ch).unwrap());
        assert_eq!(checks.len(), 8);
        worst = worst.max(max_residual(&checks));
        assert!(lifted.dependence() < 1e-12);
        assert!(det.is_deterministic());
    }
    assert!(worst <= 1e-9, "max residual {worst}");
}

#[test]
fn reduction_of_eight_atom_binary_instances() {
    let mut rng = rng_for(22, 0);
    for trial in 0..200 {
        let ch = random_channel(&mut rng, 2, 2, 2);
        let side = if trial % 2 == 0 { Side::U } else { Side::V };
        let w = Pmf::new(uniform_simplex(&mut rng, 8)).unwrap();
        let conds: Vec<Pmf> = (0..8)
            .map(|_| Pmf::new(uniform_simplex(&mut rng, 2)).unwrap())
            .collect();
        let red = reduce_support(&w, &conds, &ch, side).unwrap();
        assert!(
            red.kept.len() <= 4,
            "trial {trial}: {} atoms",
            red.kept.len()
        );
        let totals = |ws: &[f64], idx: &[usize]| {
            let mut t = [0.0; 3];
            for (&wk, &i) in ws.iter().zip(idx) {
                let (fa, fb) = atom_functionals(&conds[i], &ch, side);
                t[0] += wk * conds[i].weights()[0];
                t[1] += wk * fa;
                t[2] += wk * fb;
            }
            t
        };
        let all: Vec<usize> = (0..8).collect();
        let before = totals(w.weights(), &all);
        let after = totals(&red.weights, &red.kept);
        for k in 0..3 {
            assert!(
                (before[k] - after[k]).abs() <= 1e-9,
                "trial {trial}: {before:?} vs {after:?}"
            );
        }
    }
}

#[test]
fn harness_report_is_reproducible() {
    let a = verify_random(200, 5, 4).unwrap();
    assert!(a.passes(1e-9), "{a:?}");
    assert_eq!(a, verify_random(200, 5, 4).unwrap());
    assert_eq!((a.trials, a.seed, a.max_card), (200, 5, 4));
}

fn joint_strategy() -> impl Strategy<Value = (JointPmf, BroadcastChannel)> {
    (1usize..=3, 1usize..=3, 2usize..=3, any::<u64>()).prop_map(|(nu, nv, nx, seed)| {
        let mut rng = rng_for(seed, 0);
        let j = random_joint(
            &mut rng,
            vec![Var::U, Var::V, Var::X],
            vec![nu, nv, nx],
            0.3,
        );
        (j, random_channel(&mut rng, nx, 2, 3))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn liftings_preserve_identities((j, ch) in joint_strategy()) {
        let lifted = lift_to_independent(&j).unwrap();
        prop_assert!(max_residual(&independence_identities(&j, &lifted, &ch).unwrap()) <= 1e-9);
        let det = deterministic_lift(&j).unwrap();
        prop_assert!(max_residual(&deterministic_identities(&j, &det, &ch).unwrap()) <= 1e-9);
    }

    #[test]
    fn liftings_keep_the_input_law((j, _ch) in joint_strategy()) {
        let px = j.marginalize(&[Var::X]).unwrap();
        let lifted = lift_to_independent(&j).unwrap().joint.marginalize(&[Var::X]).unwrap();
        for (a, b) in px.table().iter().zip(lifted.table()) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
    }
}
