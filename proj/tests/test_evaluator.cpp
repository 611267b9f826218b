#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "testutil.hpp"
#include "vmf/errors.hpp"
#include "vmf/evaluator.hpp"
#include "vmf/rng.hpp"
#include "vmf/trainer.hpp"

using namespace vmf;

namespace {

Matrix random_unit_rows(Rng& rng, std::size_t n, std::size_t p) {
  Matrix m(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    auto u = random_unit_vector(rng, p);
    for (std::size_t j = 0; j < p; ++j) m(i, j) = u[j];
  }
  return m;
}

// Brute-force retrieval oracle: full sort per query by (cosine desc, index
// asc), then recall = fraction of eligible queries with a same-class hit in
// the top K.
std::map<std::size_t, double> recall_oracle(const Matrix& emb,
                                            const std::vector<int>& labels,
                                            const std::vector<std::size_t>& ks,
                                            std::size_t* skipped_out) {
  const std::size_t N = emb.rows();
  std::map<std::size_t, std::size_t> hits;
  std::size_t eligible = 0, skipped = 0;
  for (std::size_t q = 0; q < N; ++q) {
    bool has_candidate = false;
    for (std::size_t i = 0; i < N && !has_candidate; ++i) {
      has_candidate = i != q && labels[i] == labels[q];
    }
    if (!has_candidate) {
      ++skipped;
      continue;
    }
    ++eligible;
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < N; ++i) {
      if (i == q) continue;
      double dot = 0.0;
      for (std::size_t j = 0; j < emb.cols(); ++j) dot += emb(q, j) * emb(i, j);
      scored.emplace_back(dot, i);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (std::size_t K : ks) {
      bool hit = false;
      for (std::size_t t = 0; t < K && t < scored.size(); ++t) {
        if (labels[scored[t].second] == labels[q]) hit = true;
      }
      if (hit) hits[K] += 1;
    }
  }
  std::map<std::size_t, double> out;
  for (std::size_t K : ks) {
    out[K] = eligible == 0 ? 0.0
                           : static_cast<double>(hits[K]) /
                                 static_cast<double>(eligible);
  }
  if (skipped_out) *skipped_out = skipped;
  return out;
}

Network identity_network(std::size_t p) {
  Network net = init_network(NetworkConfig{{p, p}, Activation::relu, 0});
  auto& layer = net.layers()[0];
  for (auto& w : layer.weights.data()) w = 0.0;
  for (std::size_t j = 0; j < p; ++j) layer.weights(j, j) = 1.0;
  return net;
}

}  // namespace

TEST_CASE("predict picks the closest prototype, ties to the smaller index") {
  Matrix mus(5, 3);
  mus(0, 1) = 1.0;
  mus(1, 0) = 1.0;  // tied winner
  mus(2, 2) = 1.0;
  mus(3, 1) = -1.0;
  mus(4, 0) = 1.0;  // same direction as class 1
  const PrototypeSet protos(mus, 10.0);
  CHECK(predict(UnitVector({1.0, 0.0, 0.0}), protos) == 1);
  CHECK(predict(UnitVector({0.0, 1.0, 0.0}), protos) == 0);
  CHECK(predict(UnitVector({0.0, -1.0, 0.0}), protos) == 3);

  Matrix emb(2, 3);
  emb(0, 2) = 1.0;
  emb(1, 1) = -1.0;
  auto preds = predict_batch(emb, protos);
  CHECK(preds == std::vector<int>{2, 3});
  CHECK_THROWS_AS(predict(UnitVector({1.0, 0.0}), protos), ConfigError);
}

TEST_CASE("predict agrees with the argmin-Euclidean rule") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t C = 2 + rng.index(6);
    const std::size_t p = 2 + rng.index(5);
    Matrix mus = random_unit_rows(rng, C, p);
    const PrototypeSet protos(mus, 1.0);
    auto r = random_unit_vector(rng, p);
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t c = 0; c < C; ++c) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        const double diff = r[j] - mus(c, j);
        d2 += diff * diff;
      }
      if (d2 < best_d) {
        best_d = d2;
        best = c;
      }
    }
    CHECK(predict(UnitVector(r), protos) == static_cast<int>(best));
  }
}

TEST_CASE("accuracy on points equal to their prototypes") {
  Matrix mus(3, 3);
  mus(0, 0) = 1.0;
  mus(1, 1) = 1.0;
  mus(2, 2) = 1.0;
  const PrototypeSet protos(mus, 5.0);
  LabeledDataset data;
  data.features = Matrix(6, 3);
  data.labels = {0, 1, 2, 0, 1, 2};
  data.num_classes = 3;
  for (std::size_t n = 0; n < 6; ++n) data.features(n, n % 3) = 2.5;
  Network net = identity_network(3);
  CHECK(accuracy(net, protos, data) == 1.0);
  data.labels = {1, 2, 0, 1, 2, 0};
  CHECK(accuracy(net, protos, data) == 0.0);
  data.labels = {0, 1, 0, 0, 1, 2};  // wrong only at index 2
  CHECK(accuracy(net, protos, data) == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("random prototypes score near chance") {
  Rng rng(7);
  const std::size_t C = 10, p = 8, N = 4000;
  const PrototypeSet protos(random_unit_rows(rng, C, p), 15.0);
  LabeledDataset data;
  data.features = random_unit_rows(rng, N, p);
  data.num_classes = C;
  data.labels.resize(N);
  for (auto& l : data.labels) l = static_cast<int>(rng.index(C));
  const double acc = accuracy(identity_network(p), protos, data);
  CHECK(acc > 0.06);
  CHECK(acc < 0.145);
}

TEST_CASE("recall@k matches a brute-force oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t N = 12 + rng.index(30);
    const std::size_t p = 2 + rng.index(4);
    Matrix emb = random_unit_rows(rng, N, p);
    std::vector<int> labels(N);
    for (auto& l : labels) l = static_cast<int>(rng.index(4));
    const std::vector<std::size_t> ks{1, 2, 5};

    RetrievalResult got = recall_at_k(emb, labels, ks);
    std::size_t skipped = 0;
    auto expected = recall_oracle(emb, labels, ks, &skipped);
    for (std::size_t K : ks) {
      CAPTURE(trial);
      CAPTURE(K);
      CHECK(got.recall_at.at(K) == doctest::Approx(expected.at(K)).epsilon(1e-15));
    }
    CHECK(got.skipped_queries == skipped);
    CHECK(got.evaluated_queries == N - skipped);
    // Monotone in K.
    CHECK(got.recall_at.at(1) <= got.recall_at.at(2));
    CHECK(got.recall_at.at(2) <= got.recall_at.at(5));
    // Neighbor lists hold max(ks) distinct non-query indices.
    REQUIRE(got.neighbors.size() == N);
    for (std::size_t q = 0; q < N; ++q) {
      CHECK(got.neighbors[q].size() == 5);
      std::set<std::size_t> uniq(got.neighbors[q].begin(),
                                 got.neighbors[q].end());
      CHECK(uniq.size() == 5);
      CHECK(uniq.count(q) == 0);
    }
  }
}

TEST_CASE("retrieval corner cases") {
  SUBCASE("duplicated points give perfect recall@1") {
    Rng rng(13);
    Matrix base = random_unit_rows(rng, 6, 3);
    Matrix emb(12, 3);
    std::vector<int> labels(12);
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        emb(2 * i, j) = base(i, j);
        emb(2 * i + 1, j) = base(i, j);
      }
      labels[2 * i] = labels[2 * i + 1] = static_cast<int>(i);
    }
    RetrievalResult r = recall_at_k(emb, labels, {1});
    CHECK(r.recall_at.at(1) == 1.0);
    CHECK(r.skipped_queries == 0);
    // The duplicate is the top neighbor for every query.
    for (std::size_t q = 0; q < 12; ++q) {
      CHECK(labels[r.neighbors[q][0]] == labels[q]);
    }
  }

  SUBCASE("a class's two antipodal members are each other's worst match") {
    Matrix emb(4, 2);
    emb(0, 0) = 1.0;
    emb(1, 0) = -1.0;  // class 0, opposite pole
    emb(2, 1) = 1.0;
    emb(3, 1) = -1.0;  // class 1, opposite pole
    RetrievalResult r = recall_at_k(emb, {0, 0, 1, 1}, {1, 2});
    CHECK(r.recall_at.at(1) == 0.0);
    CHECK(r.recall_at.at(2) == 0.0);  // ties at cos=0 resolve by index first
  }

  SUBCASE("singleton classes are skipped, not failed") {
    Matrix emb(5, 2);
    emb(0, 0) = 1.0;
    emb(1, 0) = 1.0;
    emb(2, 1) = 1.0;   // singleton class 1
    emb(3, 0) = -1.0;  // singleton class 2
    emb(4, 1) = -1.0;  // singleton class 3
    RetrievalResult r = recall_at_k(emb, {0, 0, 1, 2, 3}, {1});
    CHECK(r.evaluated_queries == 2);
    CHECK(r.skipped_queries == 3);
    CHECK(r.recall_at.at(1) == 1.0);
  }

  SUBCASE("validation") {
    Rng rng(17);
    Matrix emb = random_unit_rows(rng, 5, 2);
    std::vector<int> labels{0, 0, 1, 1, 0};
    CHECK_THROWS_AS(recall_at_k(emb, labels, {5}), DataError);     // N < K+1
    CHECK_THROWS_AS(recall_at_k(emb, labels, {}), ConfigError);    // no K
    CHECK_THROWS_AS(recall_at_k(emb, labels, {0}), ConfigError);   // K = 0
    CHECK_THROWS_AS(recall_at_k(emb, {0, 0, 1}, {1}), ConfigError);
  }
}

TEST_CASE("nmi reference values and properties") {
  CHECK(nmi({0, 0, 1, 1}, {0, 0, 1, 1}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nmi({0, 0, 1, 1, 2, 2}, {1, 1, 0, 0, 2, 2}) ==
        doctest::Approx(1.0).epsilon(1e-12));  // relabeling is free
  CHECK(nmi({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(nmi({0, 0, 0, 1}, {0, 0, 1, 1}) ==
        doctest::Approx(0.3455920299442113).epsilon(1e-12));
  CHECK(nmi({0, 1, 2, 0, 1, 2, 0, 1}, {0, 0, 0, 1, 1, 1, 2, 2}) ==
        doctest::Approx(0.07849738428937655).epsilon(1e-12));

  // Single-cluster conventions.
  CHECK(nmi({0, 0, 0}, {0, 0, 0}) == 1.0);
  CHECK(nmi({0, 0, 0}, {0, 1, 2}) == 0.0);
  CHECK(nmi({0, 1, 2}, {0, 0, 0}) == 0.0);

  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 5 + rng.index(40);
    std::vector<int> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng.index(4));
      b[i] = static_cast<int>(rng.index(3));
    }
    const double ab = nmi(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(testutil::close_abs(ab, nmi(b, a), 1e-12));  // symmetric
    CHECK(nmi(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(nmi({0, 1}, {0, 1, 1}), DataError);
  CHECK_THROWS_AS(nmi({}, {}), DataError);
}

TEST_CASE("diagnostics on controlled embedding geometry") {
  SUBCASE("orthonormal prototypes have zero average cosine") {
    Matrix mus(4, 4);
    for (std::size_t c = 0; c < 4; ++c) mus(c, c) = 1.0;
    const PrototypeSet protos(mus, 10.0);
    LabeledDataset data;
    data.num_classes = 4;
    data.features = Matrix(8, 4);
    data.labels.resize(8);
    Rng rng(23);
    for (std::size_t n = 0; n < 8; ++n) {
      const std::size_t c = n % 4;
      data.labels[n] = static_cast<int>(c);
      data.features(n, c) = 3.0;
      data.features(n, (c + 1) % 4) = 0.1 * rng.uniform01();
    }
    SpaceDiagnostics d = diagnostics(identity_network(4), protos, data);
    CHECK(d.average_cosine == 0.0);
    CHECK(d.skipped_classes.empty());
    CHECK(d.average_kappa_hat > 0.0);
  }

  SUBCASE("identical samples per class trip the concentration clamp") {
    Matrix mus(2, 3);
    mus(0, 0) = 1.0;
    mus(1, 1) = 1.0;
    const PrototypeSet protos(mus, 5.0);
    LabeledDataset data;
    data.num_classes = 2;
    data.features = Matrix(4, 3);
    data.labels = {0, 0, 1, 1};
    data.features(0, 0) = data.features(1, 0) = 1.0;
    data.features(2, 1) = data.features(3, 1) = 1.0;
    SpaceDiagnostics d = diagnostics(identity_network(3), protos, data);
    CHECK(d.kappa_clamped);
    CHECK(d.average_kappa_hat > 1e8);
  }

  SUBCASE("classes with fewer than two samples are skipped") {
    Matrix mus(3, 3);
    mus(0, 0) = 1.0;
    mus(1, 1) = 1.0;
    mus(2, 2) = 1.0;
    const PrototypeSet protos(mus, 5.0);
    LabeledDataset data;
    data.num_classes = 3;
    data.features = Matrix(3, 3);
    data.labels = {0, 0, 1};  // class 1 singleton, class 2 absent
    data.features(0, 0) = 1.0;
    data.features(1, 1) = 1.0;
    data.features(2, 2) = 1.0;
    SpaceDiagnostics d = diagnostics(identity_network(3), protos, data);
    CHECK(d.skipped_classes == std::vector<int>{1, 2});
    CHECK_FALSE(d.kappa_clamped);
  }

  SUBCASE("sampled clouds recover their concentration on average") {
    const std::size_t p = 5, per_class = 1000;
    const double kappa = 30.0;
    std::vector<std::vector<double>> dirs = {
        {1, 0, 0, 0, 0}, {0, 1, 0, 0, 0}, {0, 0, 1, 0, 0}};
    LabeledDataset data;
    data.num_classes = 3;
    data.features = Matrix(3 * per_class, p);
    data.labels.resize(3 * per_class);
    Matrix mus(3, p);
    for (std::size_t c = 0; c < 3; ++c) {
      SampleCloud cloud =
          sample_vmf(VmfParams{UnitVector(dirs[c]), kappa}, per_class, 900 + c);
      for (std::size_t n = 0; n < per_class; ++n) {
        for (std::size_t j = 0; j < p; ++j) {
          data.features(c * per_class + n, j) = cloud.points()(n, j);
        }
        data.labels[c * per_class + n] = static_cast<int>(c);
      }
      mus(c, c) = 1.0;
    }
    SpaceDiagnostics d =
        diagnostics(identity_network(p), PrototypeSet(mus, kappa), data);
    CHECK(d.average_kappa_hat > 27.0);
    CHECK(d.average_kappa_hat < 33.0);
    CHECK_FALSE(d.kappa_clamped);
    CHECK(d.average_cosine < 0.1);
  }
}
