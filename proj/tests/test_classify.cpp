#include <doctest.h>

#include <twr/classify.hpp>
#include <twr/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace twr;

namespace {

// cyclic Jacobi sweep, enough for the small symmetric oracles used here
Eigen::MatrixXd symmetric_eigenvectors(Eigen::MatrixXd g, Eigen::VectorXd& values) {
  const Index n = g.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += g(p, q) * g(p, q);
    if (off < 1e-26) break;
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (std::abs(g(p, q)) < 1e-300) continue;
        const double theta = 0.5 * std::atan2(2.0 * g(p, q), g(p, p) - g(q, q));
        const double c = std::cos(theta), s = std::sin(theta);
        Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(n, n);
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = -s;
        rot(q, p) = s;
        g = rot.transpose() * g * rot;
        v = v * rot;
      }
    }
  }
  values = g.diagonal();
  return v;
}

std::vector<Eigen::MatrixXd> random_samples(Index count, Index rows, Index cols,
                                            std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Eigen::MatrixXd> out;
  for (Index i = 0; i < count; ++i) {
    Eigen::MatrixXd a(rows, cols);
    for (Index j = 0; j < a.size(); ++j) a(j) = unif(gen);
    out.push_back(a);
  }
  return out;
}

FeatureMap labeled_map(const Eigen::MatrixXd& data, int label) {
  FeatureMap m;
  m.data = data;
  m.label = label;
  return m;
}

}  // namespace

TEST_CASE("bilinear resampling averages with half-pixel centers") {
  Eigen::MatrixXd checker(4, 4);
  checker << 1, 0, 1, 0, 0, 1, 0, 1, 1, 0, 1, 0, 0, 1, 0, 1;
  const Eigen::MatrixXd half = resize_bilinear(checker, 2, 2);
  REQUIRE(half.rows() == 2);
  REQUIRE(half.cols() == 2);
  for (Index i = 0; i < 4; ++i) CHECK(half(i) == doctest::Approx(0.5).epsilon(1e-12));

  // identity when the shape is unchanged
  const Eigen::MatrixXd same = resize_bilinear(checker, 4, 4);
  CHECK((same - checker).norm() <= 1e-12);

  // constant input stays constant at any output shape
  const Eigen::MatrixXd flat = resize_bilinear(Eigen::MatrixXd::Constant(3, 5, 0.7), 8, 2);
  CHECK(flat.isConstant(0.7, 1e-12));

  CHECK_THROWS(resize_bilinear(checker, 0, 2));
}

TEST_CASE("feature maps are max-normalized and scale-invariant") {
  RangeMap map;
  map.bin_spacing_m = 0.03;
  map.prf_hz = 113.0;
  map.data = Eigen::MatrixXcd::Zero(32, 40);
  map.data(10, 3) = {3.0, 4.0};
  map.data(20, 8) = {0.0, 2.0};

  const FeatureMap feat = prepare_feature_map(map, FeatureKind::rpca_rangemap, 32, 40);
  CHECK_FALSE(feat.degenerate);
  CHECK(feat.source_kind == FeatureKind::rpca_rangemap);
  CHECK(feat.data.maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(feat.data(10, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(feat.data(20, 8) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(feat.data.minCoeff() >= 0.0);

  RangeMap scaled = map;
  scaled.data *= std::complex<double>(0.0, 7.0);  // global gain and phase drop out
  const FeatureMap feat2 = prepare_feature_map(scaled, FeatureKind::rpca_rangemap, 32, 40);
  CHECK((feat2.data - feat.data).norm() <= 1e-12);

  RangeMap zero = map;
  zero.data.setZero();
  const FeatureMap empty = prepare_feature_map(zero, FeatureKind::mean_sub_rangemap, 32, 40);
  CHECK(empty.degenerate);
  CHECK(empty.data.isZero(0.0));
}

TEST_CASE("spectrogram features clamp to the dB floor") {
  Spectrogram spec;
  spec.data = Eigen::MatrixXd::Zero(8, 6);
  spec.data(2, 1) = 1.0;     // peak, 0 dB
  spec.data(5, 4) = 1e-2;    // -20 dB
  spec.data(6, 2) = 1e-6;    // -60 dB, below the 40 dB floor
  spec.frequency_hz = Eigen::VectorXd::LinSpaced(8, -56.5, 56.5);
  spec.time_s = Eigen::VectorXd::LinSpaced(6, 0.0, 1.0);

  const FeatureMap feat =
      prepare_feature_map(spec, FeatureKind::rpca_spectrogram, 8, 6, 40.0);
  CHECK(feat.data(2, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(feat.data(5, 4) == doctest::Approx(0.5).epsilon(1e-12));  // -20 of 40 dB span
  CHECK(feat.data(6, 2) == 0.0);                                  // clipped at the floor
  CHECK(feat.data(0, 0) == 0.0);                                  // true zeros clamp too
  CHECK(feat.data.minCoeff() >= 0.0);
  CHECK(feat.data.maxCoeff() <= 1.0);
}

TEST_CASE("scatter basis matches a dense eigensolve") {
  const auto samples = random_samples(9, 6, 5, 2024);
  const ProjectionBasis basis = twodpca_fit(samples, 5);
  REQUIRE(basis.components.rows() == 5);
  REQUIRE(basis.components.cols() == 5);

  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(6, 5);
  for (const auto& a : samples) mean += a;
  mean /= double(samples.size());
  CHECK((basis.mean_map - mean).norm() <= 1e-12);

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(5, 5);
  for (const auto& a : samples) {
    const Eigen::MatrixXd c = a - mean;
    g += c.transpose() * c;
  }
  g /= double(samples.size());

  Eigen::VectorXd values;
  const Eigen::MatrixXd vectors = symmetric_eigenvectors(g, values);
  std::vector<Index> order(5);
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return values(a) > values(b); });

  for (Index j = 0; j < 5; ++j) {
    CHECK(basis.eigenvalues(j) == doctest::Approx(values(order[std::size_t(j)])).epsilon(1e-8));
    const Eigen::VectorXd want = vectors.col(order[std::size_t(j)]);
    const Eigen::VectorXd got = basis.components.col(j);
    // eigenvectors match up to sign
    CHECK(std::min((got - want).norm(), (got + want).norm()) <= 1e-7);
  }

  // orthonormal columns, eigenvalues descending
  CHECK((basis.components.transpose() * basis.components - Eigen::MatrixXd::Identity(5, 5))
            .norm() <= 1e-10);
  for (Index j = 1; j < 5; ++j) CHECK(basis.eigenvalues(j) <= basis.eigenvalues(j - 1) + 1e-12);
}

TEST_CASE("identical samples produce a zero scatter spectrum") {
  const std::vector<Eigen::MatrixXd> same(4, Eigen::MatrixXd::Constant(3, 4, 1.5));
  const ProjectionBasis basis = twodpca_fit(same, 2);
  CHECK(basis.eigenvalues.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((basis.components.transpose() * basis.components - Eigen::MatrixXd::Identity(2, 2))
            .norm() <= 1e-10);
}

TEST_CASE("a single varying column dominates the basis") {
  // two samples differing only in column 0: G has one nonzero eigenvalue
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 2), b = a;
  a(0, 0) = 1.0;
  b(0, 0) = -1.0;
  const ProjectionBasis basis = twodpca_fit(std::vector<Eigen::MatrixXd>{a, b}, 2);
  CHECK(basis.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(basis.eigenvalues(1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(basis.components(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(basis.components(1, 0)) <= 1e-12);
}

TEST_CASE("projection is the centered product and the full basis is an isometry") {
  const auto samples = random_samples(6, 7, 4, 11);
  const ProjectionBasis basis = twodpca_fit(samples, 4);

  const Eigen::MatrixXd projected = twodpca_project(samples[2], basis);
  const Eigen::MatrixXd expected = (samples[2] - basis.mean_map) * basis.components;
  CHECK((projected - expected).norm() <= 1e-12);

  // with all columns kept the Frobenius norm of the centered map survives
  for (const auto& a : samples) {
    const double centered = (a - basis.mean_map).norm();
    CHECK(twodpca_project(a, basis).norm() == doctest::Approx(centered).epsilon(1e-10));
  }

  CHECK(twodpca_project(basis.mean_map, basis).norm() <= 1e-12);

  CHECK_THROWS(twodpca_fit(std::vector<Eigen::MatrixXd>{}, 2));
  CHECK_THROWS(twodpca_fit(samples, 0));
  CHECK_THROWS(twodpca_fit(samples, 5));  // d exceeds the column count
}

TEST_CASE("nearest neighbor voting") {
  std::vector<Eigen::MatrixXd> train;
  std::vector<int> labels;
  const auto point = [](double x, double y) {
    Eigen::MatrixXd m(1, 2);
    m << x, y;
    return m;
  };
  train.push_back(point(0.0, 0.0));
  labels.push_back(0);
  train.push_back(point(0.1, 0.0));
  labels.push_back(0);
  train.push_back(point(5.0, 5.0));
  labels.push_back(1);

  // an exact training point is its own nearest neighbor
  CHECK(knn_classify(train, labels, point(0.0, 0.0), 1) == 0);
  CHECK(knn_classify(train, labels, point(5.0, 5.0), 1) == 1);
  // two votes for class 0 beat one for class 1 at k = 3
  CHECK(knn_classify(train, labels, point(4.0, 4.0), 3) == 0);

  // brute-force oracle on a larger random set
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<Eigen::MatrixXd> big;
  std::vector<int> big_labels;
  for (int i = 0; i < 24; ++i) {
    Eigen::MatrixXd m(2, 3);
    for (Index j = 0; j < m.size(); ++j) m(j) = unif(gen);
    big.push_back(m);
    big_labels.push_back(i % 3);
  }
  Eigen::MatrixXd query(2, 3);
  for (Index j = 0; j < query.size(); ++j) query(j) = unif(gen);

  for (const int k : {1, 3, 5, 7}) {
    std::vector<std::pair<double, int>> dist;
    for (std::size_t i = 0; i < big.size(); ++i)
      dist.emplace_back((big[i] - query).norm(), big_labels[i]);
    std::sort(dist.begin(), dist.end());
    std::array<int, 3> votes{};
    std::array<double, 3> pulled{};
    for (int i = 0; i < k; ++i) {
      votes[std::size_t(dist[std::size_t(i)].second)] += 1;
      pulled[std::size_t(dist[std::size_t(i)].second)] += dist[std::size_t(i)].first;
    }
    int want = 0;
    for (int c = 1; c < 3; ++c) {
      if (votes[std::size_t(c)] > votes[std::size_t(want)] ||
          (votes[std::size_t(c)] == votes[std::size_t(want)] &&
           pulled[std::size_t(c)] < pulled[std::size_t(want)]))
        want = c;
    }
    CHECK(knn_classify(big, big_labels, query, k) == want);
  }

  // input checks
  CHECK_THROWS(knn_classify(train, labels, point(0, 0), 0));
  CHECK_THROWS(knn_classify(train, labels, point(0, 0), 4));
  CHECK_THROWS(knn_classify({}, {}, point(0, 0), 1));
}

TEST_CASE("confusion matrix bookkeeping") {
  ConfusionMatrix cm;
  cm.counts.setZero(3, 3);
  cm.counts << 4, 1, 0, 0, 5, 0, 1, 1, 3;
  CHECK(cm.accuracy() == doctest::Approx(12.0 / 15.0).epsilon(1e-12));
  const Eigen::MatrixXd frac = cm.fractions();
  for (Index r = 0; r < 3; ++r) CHECK(frac.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(frac(0, 0) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("separable clusters evaluate perfectly, shuffled labels at chance") {
  const Index per_class = 10;
  LabeledDataset ds;
  ds.class_names = {"a", "b", "c"};
  std::mt19937_64 gen(13);
  std::normal_distribution<double> jitter(0.0, 0.02);
  for (int c = 0; c < 3; ++c) {
    for (Index i = 0; i < per_class; ++i) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
      m(c, c) = 1.0;
      for (Index j = 0; j < m.size(); ++j) m(j) += jitter(gen);
      ds.samples.push_back(labeled_map(m, c));
    }
  }
  ds.validate();
  CHECK(ds.class_counts() == std::vector<Index>{10, 10, 10});

  const EvaluationResult result = evaluate_split(ds, 0.8, 3, 4, 3);
  CHECK(result.accuracy == doctest::Approx(1.0));
  CHECK(result.train_size == 24);
  CHECK(result.test_size == 6);
  CHECK(result.confusion.counts.sum() == doctest::Approx(6.0));

  // same seed, same split; the evaluation is a pure function of its inputs
  const EvaluationResult again = evaluate_split(ds, 0.8, 3, 4, 3);
  CHECK(again.accuracy == result.accuracy);
  CHECK((again.confusion.counts - result.confusion.counts).norm() == 0.0);

  // destroying the label structure drops accuracy to chance
  LabeledDataset shuffled = ds;
  std::mt19937_64 shuffle_gen(99);
  for (auto& sample : shuffled.samples)
    sample.label = int(shuffle_gen() % 3);
  double total = 0.0;
  int runs = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    total += evaluate_split(shuffled, 0.8, seed, 4, 3).accuracy;
    ++runs;
  }
  CHECK(total / runs <= 0.65);  // three classes, chance is about one third
}

TEST_CASE("dataset validation and label plumbing") {
  LabeledDataset ds;
  ds.class_names = {"x", "y"};
  ds.samples.push_back(labeled_map(Eigen::MatrixXd::Zero(2, 2), 0));
  ds.samples.push_back(labeled_map(Eigen::MatrixXd::Zero(2, 2), 5));  // out of range
  CHECK_THROWS(ds.validate());
  ds.samples[1].label = 1;
  ds.validate();

  CHECK_THROWS(evaluate_split(ds, 0.8, 1, 1, 1));  // one sample per class cannot split
}

TEST_CASE("feature kind names round trip") {
  for (const auto kind : {FeatureKind::mean_sub_rangemap, FeatureKind::rpca_rangemap,
                          FeatureKind::mean_sub_spectrogram, FeatureKind::rpca_spectrogram}) {
    CHECK(feature_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS(feature_kind_from_string("wavelet"));
  CHECK(is_spectrogram_kind(FeatureKind::rpca_spectrogram));
  CHECK_FALSE(is_spectrogram_kind(FeatureKind::rpca_rangemap));
}
