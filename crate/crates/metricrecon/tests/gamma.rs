use clusternet::{Cluster, ClusterNet, NetStats};
use linkfn::LinkFunction;
use manifold::{ManifoldModel, Point};
use metricrecon::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rgg::{Adjacency, VertexSet};

struct Table {
    n: usize,
    edges: Vec<bool>,
}

impl Table {
    fn empty(n: usize) -> Self {
        Self { n, edges: vec![false; n * n] }
    }

    fn join(&mut self, i: usize, j: usize) {
        self.edges[i * self.n + j] = true;
        self.edges[j * self.n + i] = true;
    }
}

impl Adjacency for Table {
    fn vertex_count(&self) -> usize {
        self.n
    }

    fn adjacent(&self, i: usize, j: usize) -> bool {
        self.edges[i * self.n + j]
    }
}

fn net_of(clusters: Vec<(Vec<usize>, usize)>, delta: f64) -> ClusterNet {
    ClusterNet {
        clusters: clusters
            .into_iter()
            .map(|(m, c)| Cluster { members: VertexSet::new(m), center: c, radius_param: 0.1 })
            .collect(),
        delta,
        halted_normally: true,
        stats: NetStats::default(),
    }
}

/// `p(t) = 1 - t / 2` on `[0, 2]`.
fn affine() -> LinkFunction {
    LinkFunction::affine(1.0, 0.5, 1.0).unwrap()
}

#[test]
fn companion_threshold_is_inclusive() {
    // U = 0..8; vertex 10 sees 5 of 8 members, vertex 11 sees 4.
    let mut g = Table::empty(12);
    for u in 0..5 {
        g.join(10, u);
    }
    for u in 0..4 {
        g.join(11, u);
    }
    let net = net_of(vec![((0..8).collect(), 0)], 1.0);
    let eta = 0.5;
    assert_eq!(affine().prob(1.5 * eta), 0.625);
    let u = extract_companion_clusters(&g, &net, &[VertexSet::new(vec![10, 11])], &affine(), eta).unwrap();
    assert_eq!(u[0].as_slice(), &[10]);
}

#[test]
fn edgeless_graph_has_empty_companions() {
    let g = Table::empty(20);
    let net = net_of(vec![((0..5).collect(), 0)], 1.0);
    let u = extract_companion_clusters(&g, &net, &[VertexSet::range(10, 20)], &affine(), 0.5).unwrap();
    assert!(u[0].is_empty());
}

#[test]
fn companion_batches_must_cover_the_net() {
    let g = Table::empty(6);
    let net = net_of(vec![(vec![0], 0), (vec![1], 1)], 1.0);
    let r = extract_companion_clusters(&g, &net, &[VertexSet::range(2, 4)], &affine(), 0.5);
    assert!(matches!(r, Err(ReconError::Config(_))));
}

#[test]
fn distance_estimate_inverts_the_ratio() {
    let mut g = Table::empty(6);
    g.join(5, 0);
    let u = VertexSet::new(vec![0, 1]);
    assert_eq!(estimate_center_distance(&g, 5, &u, &affine()).unwrap(), 1.0);
    g.join(5, 1);
    assert_eq!(estimate_center_distance(&g, 5, &u, &affine()).unwrap(), 0.0);
    assert!(estimate_center_distance(&g, 5, &VertexSet::new(vec![]), &affine()).is_err());
    assert!(estimate_center_distance(&g, 0, &u, &affine()).is_err());
}

#[test]
fn ratio_above_the_link_maximum_clamps_to_zero() {
    let link = LinkFunction::exp_decay(0.5, 1.0, 2.0).unwrap();
    let mut g = Table::empty(4);
    g.join(3, 0);
    assert_eq!(estimate_center_distance(&g, 3, &VertexSet::new(vec![0]), &link).unwrap(), 0.0);
}

#[test]
fn center_edge_weight_adds_the_offset() {
    let est = [0.0, 0.5, 0.5, 0.0];
    let gamma = WeightedGraph::from_parts(vec![10, 20], &est, &[], 1.0, 0.01).unwrap();
    assert!((gamma.center_weight(0, 1) - 0.5004).abs() < 1e-15);
    assert_eq!(gamma.edges(), vec![(10, 20, 0.5 + 0.04 * 0.01)]);
}

#[test]
fn infinite_rule_gives_complete_center_graph() {
    let k = 5;
    let est: Vec<f64> = (0..k * k).map(|x| 10.0 + x as f64).collect();
    let gamma = WeightedGraph::from_parts((0..k).collect(), &est, &[], f64::INFINITY, 0.1).unwrap();
    assert_eq!(gamma.edges().len(), k * (k - 1) / 2);
}

#[test]
fn equal_estimates_attach_to_the_earlier_center() {
    // Companions for six centres; vertex 30 sees half of companions 2 and 5.
    let mut g = Table::empty(40);
    let companions: Vec<VertexSet> = (0..6).map(|s| VertexSet::new(vec![6 + 2 * s, 7 + 2 * s])).collect();
    g.join(30, companions[2].as_slice()[0]);
    g.join(30, companions[5].as_slice()[1]);
    assert_eq!(nearest_center(&g, 30, &companions, &affine()), 2);
    let net = net_of((0..6).map(|s| (vec![s], s)).collect(), 0.1);
    let gamma = build_gamma(&g, &net, &companions, &affine(), f64::INFINITY, &VertexSet::new(vec![30])).unwrap();
    assert_eq!(gamma.slot_of(30), Some(2));
}

#[test]
fn leaf_to_leaf_goes_through_both_centers() {
    let est = [0.0, 0.7, 0.7, 0.0];
    let delta = 0.1;
    let gamma = WeightedGraph::from_parts(vec![0, 1], &est, &[(5, 0), (6, 1), (7, 0)], f64::INFINITY, delta).unwrap();
    let omega = 0.7 + 0.04 * delta;
    assert_eq!(gamma.path_metric(5, 6), delta + omega + delta);
    assert_eq!(gamma.path_metric(5, 7), 2.0 * delta);
    assert_eq!(gamma.path_metric(5, 1), delta + omega);
    assert_eq!(gamma.path_metric(6, 6), 0.0);
}

#[test]
fn disconnected_centers_are_infinitely_far() {
    let est = [0.0, 5.0, 5.0, 0.0];
    let gamma = WeightedGraph::from_parts(vec![0, 1], &est, &[(2, 0)], 1.0, 0.1).unwrap();
    assert_eq!(gamma.path_metric(2, 1), f64::INFINITY);
    assert_eq!(gamma.search_distance(2, 1), f64::INFINITY);
}

/// Centres: a greedy `delta`-separated subset of random sphere points; every
/// other point hangs off its truly nearest centre; centre estimates are the
/// true chords.
fn synthetic(seed: u64, points: usize, delta: f64, rule_r: f64) -> (Vec<Point>, WeightedGraph) {
    let model = ManifoldModel::sphere(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point> = (0..points).map(|_| model.sample_point(&mut rng)).collect();
    let mut centers: Vec<usize> = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        if centers.iter().all(|&c| pts[c].dist(p) > delta) {
            centers.push(i);
        }
    }
    let k = centers.len();
    let mut est = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            est[a * k + b] = pts[centers[a]].dist(&pts[centers[b]]);
        }
    }
    let leaves: Vec<(usize, usize)> = (0..points)
        .filter(|i| !centers.contains(i))
        .map(|i| {
            let d: Vec<f64> = centers.iter().map(|&c| pts[c].dist(&pts[i])).collect();
            let s = (0..k).fold(0, |b, s| if d[s] < d[b] { s } else { b });
            (i, s)
        })
        .collect();
    let gamma = WeightedGraph::from_parts(centers, &est, &leaves, rule_r, delta).unwrap();
    (pts, gamma)
}

#[test]
fn closed_form_matches_search_on_metric_estimates() {
    let (_, gamma) = synthetic(3, 400, 0.3, f64::INFINITY);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let v = rand::Rng::random_range(&mut rng, 0..400);
        let w = rand::Rng::random_range(&mut rng, 0..400);
        assert_eq!(gamma.path_metric(v, w), gamma.search_distance(v, w), "pair ({v}, {w})");
    }
}

#[test]
fn finite_rule_matches_search() {
    let (_, gamma) = synthetic(4, 400, 0.3, 0.8);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let v = rand::Rng::random_range(&mut rng, 0..400);
        let w = rand::Rng::random_range(&mut rng, 0..400);
        let (a, b) = (gamma.path_metric(v, w), gamma.search_distance(v, w));
        assert!((a - b).abs() <= 1e-12 * a.max(1.0), "pair ({v}, {w}): {a} vs {b}");
    }
}

#[test]
fn exact_estimates_keep_euclidean_error_within_four_delta() {
    let delta = 0.25;
    let (pts, gamma) = synthetic(5, 600, delta, f64::INFINITY);
    for v in 0..600 {
        for w in (v + 1)..600 {
            let err = (gamma.path_metric(v, w) - pts[v].dist(&pts[w])).abs();
            assert!(err <= 4.0 * delta, "pair ({v}, {w}) error {err}");
        }
    }
}

#[test]
fn rebuilding_gives_identical_edges() {
    let mut g = Table::empty(30);
    for v in 10..30 {
        g.join(v, v % 4 + 4);
    }
    let companions: Vec<VertexSet> = (0..3).map(|s| VertexSet::new(vec![4 + s])).collect();
    let net = net_of((0..3).map(|s| (vec![s], s)).collect(), 0.2);
    let extra = VertexSet::range(10, 30);
    let a = build_gamma(&g, &net, &companions, &affine(), 0.9, &extra).unwrap();
    let b = build_gamma(&g, &net, &companions, &affine(), 0.9, &extra).unwrap();
    assert_eq!(a.edges(), b.edges());
    assert_eq!(a, b);
}

#[test]
fn single_cluster_measure_is_a_point_mass() {
    let g = Table::empty(10);
    let nu = empirical_measure(&g, &[VertexSet::new(vec![0, 1])], &VertexSet::range(4, 10), &affine());
    assert_eq!(nu.weights, vec![1.0]);
}

#[test]
fn evaluation_reports_zero_error_on_the_diagonal() {
    let (pts, gamma) = synthetic(6, 100, 0.3, f64::INFINITY);
    let dim = 3;
    let coords: Vec<f64> = pts.iter().flat_map(|p| p.coords.clone()).collect();
    let latents = rgg::Latents::from_coords(dim, coords);
    let k = gamma.centers().len();
    let nu = EmpiricalMeasure { weights: vec![1.0 / k as f64; k] };
    let model = ManifoldModel::sphere(1.0).unwrap();
    let rep = evaluate_reconstruction(&latents, &model, &gamma, &gamma, &nu, &[(3, 3), (4, 9)], &[0.5, 1.0], 0.5, 0.1).unwrap();
    assert_eq!(rep.pairs[0].abs_err_gd, 0.0);
    assert_eq!(rep.pairs[0].abs_err_euc, 0.0);
    assert_eq!(rep.balls.len(), 2 * k);
    let mut csv = Vec::new();
    rep.write_csv(&mut csv).unwrap();
    assert!(String::from_utf8(csv).unwrap().starts_with("pair_id,true_gd,est_gd,true_euc,est_euc,abs_err_gd,abs_err_euc\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn path_metric_is_a_metric(seed in 0u64..1000, a in 0usize..150, b in 0usize..150, c in 0usize..150) {
        let (_, gamma) = synthetic(seed, 150, 0.4, f64::INFINITY);
        let d = |x, y| gamma.path_metric(x, y);
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-12);
    }
}
