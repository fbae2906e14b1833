use std::f64::consts::E;

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;

use ic_alloc::baselines::{draw, thin, ThinningSpec};
use ic_alloc::counting::{card_r_beta_i, t_beta, CountingTables};
use ic_alloc::design::{build_base_partition, derive_parameters, refine};
use ic_alloc::oracle::{brute_force_pi_star, classify_by_support, classify_excluded};
use ic_alloc::{binomial, pi_of, TaskSet};

#[test]
fn support_census_totals() {
    for d in 1..=4u32 {
        for n in d..=20u32 {
            for s in (1..=n).filter(|s| n % s == 0) {
                let census = classify_by_support(n, d, s).unwrap();
                let total: u64 = census.values().sum();
                assert_eq!(BigUint::from(total), binomial(n as u64, d as u64), "({n},{d},{s})");
            }
        }
    }
}

#[test]
fn excluded_census_is_uniform_over_supports() {
    for d in 2..=4u32 {
        for n in d..=18u32 {
            for f in d..=n {
                for s0 in 1..=n / f {
                    if n == f * s0 {
                        continue;
                    }
                    for (beta, counts) in classify_excluded(n, d, s0, f).unwrap() {
                        assert!(counts.windows(2).all(|w| w[0] == w[1]), "({n},{d},{s0},{f},{beta})");
                    }
                }
            }
        }
    }
}

#[test]
fn excluded_totals_cover_the_rest() {
    // every tuple outside the first f*s0 files lands in exactly one class
    for (n, d, s0, f) in [(7, 2, 2, 3), (11, 3, 2, 4), (14, 3, 3, 4), (17, 4, 3, 5)] {
        let g = n - f * s0;
        let mut sum = BigUint::from(0u32);
        for beta in 0..d {
            let per = card_r_beta_i(s0, f, g, d, beta).unwrap_or_default();
            sum += binomial(f as u64, beta as u64) * per;
        }
        let expected = binomial(n as u64, d as u64) - binomial((f * s0) as u64, d as u64);
        assert_eq!(sum, expected, "({n},{d},{s0},{f})");
    }
}

/// The excluded-class count with the alternating sign attached to `i`
/// rather than `beta - i`.
fn excluded_count_other_sign(s0: u32, g: u32, d: u32, beta: u32) -> BigInt {
    let mut acc = BigInt::from(0);
    for m in 1..=(d - beta).min(g) {
        let mut inner = BigInt::from(0);
        for i in 0..=beta {
            let term = BigInt::from(binomial(beta as u64, i as u64))
                * BigInt::from(binomial((s0 * i) as u64, (d - m) as u64));
            if i % 2 == 0 {
                inner += term;
            } else {
                inner -= term;
            }
        }
        acc += BigInt::from(binomial(g as u64, m as u64)) * inner;
    }
    acc
}

#[test]
fn excluded_count_sign_convention() {
    // n = 7: families {1,2},{3,4},{5,6}, file 7 excluded, d = 2
    let census = classify_excluded(7, 2, 2, 3).unwrap();
    assert_eq!(census[&1], vec![2, 2, 2]);
    assert_eq!(card_r_beta_i(2, 3, 1, 2, 1).unwrap(), BigUint::from(2u32));
    assert_eq!(excluded_count_other_sign(2, 1, 2, 1), BigInt::from(-2));
    // the other placement of the sign disagrees with enumeration whenever
    // beta is odd
    for (n, d, s0, f) in [(11, 3, 2, 4), (14, 3, 3, 4)] {
        let g = n - f * s0;
        let census = classify_excluded(n, d, s0, f).unwrap();
        let odd = census[&1][0];
        assert_eq!(card_r_beta_i(s0, f, g, d, 1).unwrap(), BigUint::from(odd));
        assert_ne!(excluded_count_other_sign(s0, g, d, 1), BigInt::from(odd));
    }
}

#[test]
fn closed_forms_match_census() {
    for d in 1..=4u32 {
        for n in d..=20u32 {
            for s in (1..=n).filter(|s| n % s == 0) {
                let f = n / s;
                let census = classify_by_support(n, d, s).unwrap();
                for beta in 1..=d.min(f) {
                    let closed = binomial(f as u64, beta as u64) * t_beta(s, f, d, beta).unwrap_or_default();
                    let seen = census.get(&beta).copied().unwrap_or(0);
                    assert_eq!(closed, BigUint::from(seen), "({n},{d},{s},{beta})");
                }
                if d <= f {
                    let tables = CountingTables::new(s, f, d, 0).unwrap();
                    assert_eq!(tables.total_c(), binomial(n as u64, d as u64));
                }
            }
        }
    }
}

fn random_tasks(n: u32, d: u32, m: usize, key: u64) -> TaskSet {
    let mut all: Vec<_> = ic_alloc::enumerate_lex(n, d).unwrap().collect();
    for i in 0..m.min(all.len()) {
        let j = i + (draw(key, 9, i as u128) % (all.len() - i) as u64) as usize;
        all.swap(i, j);
    }
    all.truncate(m);
    TaskSet::new(n, d, all).unwrap()
}

#[test]
fn construction_against_exhaustive_optimum() {
    let mut worst: f64 = 0.0;
    for key in 0..60u64 {
        let d = 2 + (key % 2) as u32;
        let n = d + 3 + (key % 5) as u32;
        let w = 1 + key % 4;
        let Ok(params) = derive_parameters(n, d, w) else { continue };
        let m = 1 + (draw(key, 8, 0) % 14) as usize;
        let x = random_tasks(n, d, m, key);
        let star = brute_force_pi_star(&x, w, 16).unwrap();
        let ic = refine(&build_base_partition(&params).unwrap(), &x).unwrap();
        let pi_ic = pi_of(&ic);
        assert!(pi_ic >= star.pi_star, "key {key}");
        assert!(star.pi_star >= star.lower_bound);
        worst = worst.max(pi_ic as f64 / star.pi_star as f64);
    }
    assert!(worst <= 4.0 * E, "{worst}");
}

/// Minimum over every one of the `N^|X|` assignments, without pruning.
fn naive_optimum(x: &TaskSet, workers: u64) -> u64 {
    let m = x.len() as u32;
    let mut best = u64::MAX;
    for code in 0..workers.pow(m) {
        let mut masks = vec![0u64; workers as usize];
        let mut c = code;
        for t in x.edges() {
            masks[(c % workers) as usize] |= t.elements().iter().fold(0, |a, &e| a | 1 << e);
            c /= workers;
        }
        best = best.min(masks.iter().map(|m| m.count_ones() as u64).max().unwrap());
    }
    best
}

#[test]
fn branch_and_bound_matches_naive_search() {
    for (n, d, w) in [(4, 2, 2), (5, 2, 2), (5, 2, 3), (4, 3, 2), (5, 3, 2), (5, 3, 3), (6, 3, 2)] {
        let x = TaskSet::full(n, d).unwrap();
        let res = brute_force_pi_star(&x, w, 20).unwrap();
        assert_eq!(res.pi_star, naive_optimum(&x, w), "({n},{d},{w})");
    }
    for key in 0..30 {
        let x = random_tasks(8, 2, 1 + (key % 10) as usize, key);
        for w in 1..=3 {
            let res = brute_force_pi_star(&x, w, 16).unwrap();
            assert_eq!(res.pi_star, naive_optimum(&x, w), "key {key} N {w}");
        }
    }
}

#[test]
fn converse_holds_on_thinned_sets() {
    for seed in 0..20 {
        let x = thin(7, 2, &ThinningSpec::new(0.5, seed)).unwrap();
        if x.len() > 14 {
            continue;
        }
        for w in 1..=3 {
            let res = brute_force_pi_star(&x, w, 16).unwrap();
            let phi = x.len() as f64 / 21.0;
            let real = phi.sqrt() * 7.0 / (w as f64).sqrt();
            if x.is_empty() {
                assert_eq!(res.pi_star, 0);
                continue;
            }
            // a single task already needs d files
            let floor = (real - 1e-9).ceil().max(2.0).to_u64().unwrap();
            assert_eq!(res.lower_bound, floor);
            assert!(res.pi_star >= floor);
        }
    }
}
