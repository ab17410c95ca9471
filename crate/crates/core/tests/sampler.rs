use std::collections::HashSet;

use sds_core::fragility::std_normal_cdf;
use sds_core::ingest::make_toy_case;
use sds_core::sampler::*;

fn pool(case: &str, n: usize, seed: u64, kind: SamplerKind) -> ScenarioPool {
    let b = make_toy_case(case).unwrap();
    sample_pool(&b.grid, &b.track, n, seed, &SamplerConfig::default(), kind).unwrap()
}

#[test]
fn pools_are_seed_deterministic() {
    for kind in [SamplerKind::Relevance, SamplerKind::Normal] {
        let a = pool("ring6", 500, 7, kind);
        assert_eq!(a, pool("ring6", 500, 7, kind));
        assert_ne!(a.events, pool("ring6", 500, 8, kind).events);
    }
}

#[test]
fn pools_do_not_depend_on_thread_count() {
    let b = make_toy_case("coastal12").unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_pool_sds(&b.grid, &b.track, 800, 3, &SamplerConfig::default()).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn prefix_of_a_larger_pool_is_the_smaller_pool() {
    let small = pool("micro2", 200, 5, SamplerKind::Relevance);
    let large = pool("micro2", 400, 5, SamplerKind::Relevance);
    let head: Vec<_> = large.events.iter().filter(|e| e.scenario < 200).copied().collect();
    assert_eq!(small.events, head);
}

#[test]
fn events_are_sorted_unique_first_failures_in_relevant_sets() {
    for kind in [SamplerKind::Relevance, SamplerKind::Normal] {
        let p = pool("coastal12", 2000, 11, kind);
        assert!(p.events.windows(2).all(|w| (w[0].scenario, w[0].segment) < (w[1].scenario, w[1].segment)));
        let mut seen = HashSet::new();
        for e in &p.events {
            assert!(seen.insert((e.scenario, e.segment)));
            assert!(e.scenario < p.n_scenarios && e.t_fail < p.horizon);
            assert!(p.relevance[e.t_fail].contains(&e.segment));
        }
    }
}

#[test]
fn line_outage_frequency_is_nondecreasing_in_time() {
    let p = pool("coastal12", 2000, 13, SamplerKind::Relevance);
    for row in p.line_failure_frequency() {
        assert!(row.windows(2).all(|w| w[0] <= w[1]));
        assert!(row.iter().all(|f| (0.0..=1.0).contains(f)));
    }
}

#[test]
fn first_interval_failure_rate_matches_lognormal_convolution() {
    // With ln w ~ N(μ, s²) and capacity lognormal(ln w0, β), a segment fails
    // with probability Φ((μ − ln w0) / sqrt(s² + β²)).
    let b = make_toy_case("coastal12").unwrap();
    let cfg = SamplerConfig::default();
    let t = (0..b.grid.horizon())
        .find(|&t| !classify_segments(&b.grid, &b.track, t, &cfg).unwrap().relevant.is_empty())
        .unwrap();
    let model = prepare_timestep(&b.grid, &b.track, t, &cfg).unwrap();
    let n = 20_000;
    for kind in [SamplerKind::Relevance, SamplerKind::Normal] {
        let p = sample_pool(&b.grid, &b.track, n, 17, &cfg, kind).unwrap();
        for (i, &seg) in model.relevant.iter().enumerate() {
            let fp = model.fragility[i];
            let s = model.marginal_sd[i];
            let expect =
                std_normal_cdf((model.ln_mean[i] - fp.w0.ln()) / (s * s + fp.beta * fp.beta).sqrt());
            let hits = p.events.iter().filter(|e| e.segment == seg && e.t_fail == t).count();
            let freq = hits as f64 / n as f64;
            let se = (expect * (1.0 - expect) / n as f64).sqrt().max(1.0 / n as f64);
            assert!((freq - expect).abs() < 4.5 * se, "{kind} seg {seg}: {freq} vs {expect}");
        }
    }
}

#[test]
fn relevance_partition_covers_every_segment() {
    let b = make_toy_case("coastal12").unwrap();
    let cfg = SamplerConfig::default();
    for t in 0..b.grid.horizon() {
        let c = classify_segments(&b.grid, &b.track, t, &cfg).unwrap();
        let mut all: Vec<usize> = c.relevant.iter().chain(&c.nonfragile).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..b.grid.segment_count()).collect::<Vec<_>>());
        assert_eq!(c.mean_wind.len(), c.relevant.len());
    }
}

#[test]
fn raising_the_threshold_shrinks_the_relevance_set() {
    let b = make_toy_case("coastal12").unwrap();
    let loose = SamplerConfig::default();
    let strict = SamplerConfig {
        p_threshold: 0.2,
        ..loose.clone()
    };
    for t in 0..b.grid.horizon() {
        let a: HashSet<_> = classify_segments(&b.grid, &b.track, t, &loose).unwrap().relevant.into_iter().collect();
        let s: HashSet<_> = classify_segments(&b.grid, &b.track, t, &strict).unwrap().relevant.into_iter().collect();
        assert!(s.is_subset(&a));
    }
}

#[test]
fn invalid_requests_are_rejected() {
    let b = make_toy_case("micro2").unwrap();
    let cfg = SamplerConfig::default();
    assert!(matches!(
        sample_pool_sds(&b.grid, &b.track, 0, 1, &cfg),
        Err(SamplerError::InvalidInput(_))
    ));
    let mut short = b.track.clone();
    short.steps.truncate(1);
    assert!(matches!(
        sample_pool_smc(&b.grid, &short, 10, 1, &cfg),
        Err(SamplerError::InvalidInput(_))
    ));
}
