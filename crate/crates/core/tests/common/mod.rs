//! Independent re-implementations used as oracles by several test targets.

#![allow(dead_code)]

/// 1-d k-NN with optional `1/K` pseudo-counts, written from the definition:
/// sort by (distance, label), vote, normalise.
pub fn knn_1d(train: &[(f64, usize)], k: usize, n_classes: usize, smoothing: bool, x: f64) -> Vec<f64> {
    let mut d: Vec<(f64, usize)> = train.iter().map(|&(p, y)| ((p - x).abs(), y)).collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut votes = vec![0.0; n_classes];
    for &(_, y) in d.iter().take(k) {
        votes[y] += 1.0;
    }
    if smoothing {
        for v in votes.iter_mut() {
            *v += 1.0 / n_classes as f64;
        }
    }
    let total: f64 = votes.iter().sum();
    votes.iter().map(|v| v / total).collect()
}

pub fn argmax_lowest(p: &[f64]) -> usize {
    let mut best = 0;
    for j in 1..p.len() {
        if p[j] > p[best] {
            best = j;
        }
    }
    best
}

pub fn error_rate_1d(train: &[(f64, usize)], k: usize, n_classes: usize, smoothing: bool, eval: &[(f64, usize)]) -> f64 {
    let wrong = eval
        .iter()
        .filter(|&&(x, y)| argmax_lowest(&knn_1d(train, k, n_classes, smoothing, x)) != y)
        .count();
    wrong as f64 / eval.len() as f64
}

pub fn with(train: &[(f64, usize)], x: f64, y: usize) -> Vec<(f64, usize)> {
    let mut t = train.to_vec();
    t.push((x, y));
    t
}

/// Exhaustive EfeLc: both labels of the candidate, pool-wide least confidence.
pub fn efelc_oracle(d: &[(f64, usize)], pool: &[f64], k: usize, smoothing: bool, x: f64) -> f64 {
    let p = knn_1d(d, k, 2, smoothing, x);
    let mut s = 0.0;
    for j in 0..2 {
        if p[j] == 0.0 {
            continue;
        }
        let t = with(d, x, j);
        let lc: f64 = pool
            .iter()
            .map(|&u| {
                let q = knn_1d(&t, k, 2, smoothing, u);
                1.0 - q[argmax_lowest(&q)]
            })
            .sum();
        s += p[j] * lc;
    }
    -s
}

pub fn simple_eq_oracle(d: &[(f64, usize)], k: usize, smoothing: bool, x: f64) -> f64 {
    let p = knn_1d(d, k, 2, smoothing, x);
    let mut s = 0.0;
    for j in 0..2 {
        if p[j] > 0.0 {
            s += p[j] * error_rate_1d(&with(d, x, j), k, 2, smoothing, d);
        }
    }
    -s
}

pub fn partition_eq_oracle(
    calib: &[(f64, usize)],
    train: &[(f64, usize)],
    eval: &[(f64, usize)],
    k: usize,
    smoothing: bool,
    x: f64,
) -> f64 {
    let p = knn_1d(calib, k, 2, smoothing, x);
    let mut s = 0.0;
    for j in 0..2 {
        if p[j] > 0.0 {
            s += p[j] * error_rate_1d(&with(train, x, j), k, 2, smoothing, eval);
        }
    }
    -s
}

/// A labelled 1-d set and a pool of at most five points.
pub struct Fixture {
    pub d: Vec<(f64, usize)>,
    pub pool: Vec<f64>,
}

/// Deterministic fixtures with generic (tie-free) coordinates, both classes
/// present, pool sizes 1 to 5.
pub fn fixtures() -> Vec<Fixture> {
    use rand::Rng;
    let mut rng = eqlab::rng::stream(20_240_601);
    let mut out = vec![Fixture {
        d: vec![(-1.0, 0), (1.0, 1), (-2.2, 0), (1.7, 1)],
        pool: vec![-0.4, 0.0, 0.3],
    }];
    for pool_size in 1..=5 {
        for rep in 0..8 {
            let n = 3 + rep % 4;
            let mut d: Vec<(f64, usize)> = (0..n)
                .map(|i| (rng.random_range(-3.0..3.0), usize::from(i % 2 == 1)))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0));
            let pool = (0..pool_size).map(|_| rng.random_range(-3.0..3.0)).collect();
            out.push(Fixture { d, pool });
        }
    }
    out
}

pub fn labeled(d: &[(f64, usize)]) -> eqlab::LabeledSet {
    eqlab::LabeledSet::new(d.iter().map(|&(x, _)| vec![x]).collect(), d.iter().map(|&(_, y)| y).collect(), 2).unwrap()
}
