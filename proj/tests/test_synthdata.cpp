#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "hypercd/hyperbolicity.hpp"
#include "hypercd/synthdata.hpp"
#include "support/test_util.hpp"

using namespace hypercd;

namespace {

int nearest_prototype(const Vec& x, const std::vector<Vec>& prototypes) {
  int best = 0;
  double best_dist = (x - prototypes[0]).norm();
  for (int i = 1; i < static_cast<int>(prototypes.size()); ++i) {
    const double d = (x - prototypes[i]).norm();
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

std::map<int, int> label_histogram(const std::vector<PairSample>& pairs) {
  std::map<int, int> hist;
  for (const auto& p : pairs) {
    ++hist[p.label];
  }
  return hist;
}

}  // namespace

TEST_CASE("hierarchy spec validation") {
  synth::HierarchySpec spec;
  CHECK_NOTHROW(spec.validate());
  CHECK(spec.leaf_count() == 27);

  synth::HierarchySpec bad = spec;
  bad.depth = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.branching = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.dim = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.class_sep = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.class_sep = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.nuisance_strength = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.noise_std = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  synth::HierarchySpec wide;
  wide.depth = 5;
  wide.branching = 2;
  CHECK(wide.leaf_count() == 32);
}

TEST_CASE("state tree shape and determinism") {
  synth::HierarchySpec spec;
  spec.depth = 1;
  spec.branching = 2;
  spec.dim = 4;
  const auto two = synth::build_state_tree(spec);
  REQUIRE(two.size() == 2);
  CHECK(two[0].size() == 4);
  CHECK((two[0] - two[1]).norm() > 0.0);

  synth::HierarchySpec deep;
  const auto a = synth::build_state_tree(deep);
  const auto b = synth::build_state_tree(deep);
  REQUIRE(a.size() == 27);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i] - b[i]).cwiseAbs().maxCoeff() == 0.0);
  }

  deep.seed = 43;
  const auto c = synth::build_state_tree(deep);
  CHECK((a[0] - c[0]).norm() > 0.0);
}

TEST_CASE("sibling leaves sit closer than cousins") {
  // Children of one parent differ by level-depth offsets only, so on average
  // they are closer than leaves from different branches.
  synth::HierarchySpec spec;
  const auto leaves = synth::build_state_tree(spec);
  double sibling = 0.0;
  int n_sibling = 0;
  double cross = 0.0;
  int n_cross = 0;
  for (int i = 0; i < 27; ++i) {
    for (int j = i + 1; j < 27; ++j) {
      const double d = (leaves[i] - leaves[j]).norm();
      if (i / 3 == j / 3) {
        sibling += d;
        ++n_sibling;
      } else if (i / 9 != j / 9) {
        cross += d;
        ++n_cross;
      }
    }
  }
  CHECK(sibling / n_sibling < cross / n_cross);
}

TEST_CASE("leaf set is more hyperbolic than an iid cloud") {
  synth::HierarchySpec spec;
  const auto leaves = synth::build_state_tree(spec);

  Vec mean = Vec::Zero(spec.dim);
  for (const Vec& p : leaves) {
    mean += p;
  }
  mean /= static_cast<double>(leaves.size());
  double var = 0.0;
  for (const Vec& p : leaves) {
    var += (p - mean).squaredNorm();
  }
  var /= static_cast<double>(leaves.size());
  const double coord_std = std::sqrt(var / spec.dim);

  auto rng = make_rng(4242);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec> cloud;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    Vec p(spec.dim);
    for (int k = 0; k < spec.dim; ++k) {
      p[k] = gauss(rng) * coord_std;
    }
    cloud.push_back(p);
  }

  const auto metric = hyperbolicity::MetricChoice::euclidean();
  const auto rel_leaf = hyperbolicity::delta_sampled(leaves, 12, 20, 7, metric);
  const auto rel_iid = hyperbolicity::delta_sampled(cloud, 12, 20, 7, metric);
  CHECK(rel_leaf.relative_mean < rel_iid.relative_mean);
  // Regression freeze of both estimates.
  CHECK(rel_leaf.relative_mean ==
        doctest::Approx(0.18518283898968985).epsilon(1e-12));
  CHECK(rel_iid.relative_mean ==
        doctest::Approx(0.32753293985916898).epsilon(1e-12));
}

TEST_CASE("pair constructors") {
  Vec proto(2);
  proto << 1.0, -2.0;
  Vec n1(2);
  n1 << 0.25, 0.0;
  Vec n2(2);
  n2 << 0.0, -0.5;
  Vec nu(2);
  nu << 3.0, 4.0;

  const PairSample same = synth::detail::make_no_change_pair(proto, n1, n2, nu);
  CHECK(same.label == 0);
  CHECK(same.x1[0] == doctest::Approx(4.25).epsilon(1e-15));
  CHECK(same.x2[1] == doctest::Approx(1.5).epsilon(1e-15));
  // The shared offset cancels in the pair difference.
  CHECK((same.x2 - same.x1 - (n2 - n1)).cwiseAbs().maxCoeff() <= 1e-12);

  Vec proto2(2);
  proto2 << -1.0, 0.5;
  const PairSample diff =
      synth::detail::make_change_pair(proto, proto2, n1, n2, nu, Vec::Zero(2));
  CHECK(diff.label == 1);
  CHECK(diff.x1[0] == doctest::Approx(4.25).epsilon(1e-15));
  CHECK(diff.x2[0] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("no-change difference is independent of the shared nuisance") {
  auto rng = make_rng(401);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    Vec proto(8), n1(8), n2(8), nu(8);
    for (int k = 0; k < 8; ++k) {
      proto[k] = 2.0 * gauss(rng);
      n1[k] = 0.1 * gauss(rng);
      n2[k] = 0.1 * gauss(rng);
      nu[k] = 5.0 * gauss(rng);
    }
    const PairSample with_nu =
        synth::detail::make_no_change_pair(proto, n1, n2, nu);
    const PairSample without =
        synth::detail::make_no_change_pair(proto, n1, n2, Vec::Zero(8));
    const Vec diff_a = with_nu.x2 - with_nu.x1;
    const Vec diff_b = without.x2 - without.x1;
    CHECK((diff_a - diff_b).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("nuisance strength does not shift the sampling stream") {
  synth::HierarchySpec weak;
  weak.nuisance_strength = 0.0;
  synth::HierarchySpec strong = weak;
  strong.nuisance_strength = 5.0;

  const auto protos = synth::build_state_tree(weak);
  const auto pw = synth::sample_pairs(protos, weak, 300);
  const auto ps = synth::sample_pairs(protos, strong, 300);
  REQUIRE(pw.size() == ps.size());
  for (std::size_t i = 0; i < pw.size(); ++i) {
    CHECK(pw[i].label == ps[i].label);
    if (pw[i].label == 0) {
      const Vec da = pw[i].x2 - pw[i].x1;
      const Vec db = ps[i].x2 - ps[i].x1;
      CHECK((da - db).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("zero noise and nuisance collapse no-change pairs") {
  synth::HierarchySpec spec;
  spec.noise_std = 0.0;
  spec.nuisance_strength = 0.0;
  const auto protos = synth::build_state_tree(spec);
  const auto pairs = synth::sample_pairs(protos, spec, 500);
  for (const auto& p : pairs) {
    if (p.label == 0) {
      CHECK((p.x1 - p.x2).cwiseAbs().maxCoeff() == 0.0);
    } else {
      CHECK((p.x1 - p.x2).norm() > 0.0);
    }
  }
}

TEST_CASE("clean pairs are perfectly separable by nearest prototype") {
  synth::HierarchySpec spec;
  spec.noise_std = 0.0;
  spec.nuisance_strength = 0.0;
  const auto protos = synth::build_state_tree(spec);
  const auto pairs = synth::sample_pairs(protos, spec, 400);
  for (const auto& p : pairs) {
    const int ix = nearest_prototype(p.x1, protos);
    const int iy = nearest_prototype(p.x2, protos);
    const int predicted = (ix != iy) ? 1 : 0;
    CHECK(predicted == p.label);
  }
}

TEST_CASE("label histogram follows the rounding rule") {
  synth::HierarchySpec spec;
  const auto protos = synth::build_state_tree(spec);

  auto hist = label_histogram(synth::sample_pairs(protos, spec, 2000));
  CHECK(hist[1] == 1440);
  CHECK(hist[0] == 560);

  hist = label_histogram(synth::sample_pairs(protos, spec, 50, 1.0));
  CHECK(hist[1] == 50);
  CHECK(hist[0] == 0);

  hist = label_histogram(synth::sample_pairs(protos, spec, 50, 0.0));
  CHECK(hist[1] == 0);
  CHECK(hist[0] == 50);

  hist = label_histogram(synth::sample_pairs(protos, spec, 7, 0.5));
  CHECK(hist[1] == 4);  // lround(3.5)
  CHECK(hist[0] == 3);
}

TEST_CASE("generation is deterministic") {
  synth::HierarchySpec spec;
  const auto a = synth::generate(spec, 200, 100);
  const auto b = synth::generate(spec, 200, 100);
  REQUIRE(a.train.size() == 200);
  REQUIRE(a.test.size() == 100);
  CHECK(a.change_fraction == synth::kDefaultChangeFraction);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].label == b.train[i].label);
    CHECK((a.train[i].x1 - b.train[i].x1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.train[i].x2 - b.train[i].x2).cwiseAbs().maxCoeff() == 0.0);
  }
  for (std::size_t i = 0; i < a.test.size(); ++i) {
    CHECK((a.test[i].x1 - b.test[i].x1).cwiseAbs().maxCoeff() == 0.0);
  }

  // Train and test use distinct streams of one seed.
  CHECK((a.train[0].x1 - a.test[0].x1).norm() > 0.0);
}

TEST_CASE("sampling validates arguments") {
  synth::HierarchySpec spec;
  const auto protos = synth::build_state_tree(spec);
  CHECK_THROWS_AS(synth::sample_pairs(protos, spec, 0), std::invalid_argument);
  CHECK_THROWS_AS(synth::sample_pairs(protos, spec, 10, -0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(synth::sample_pairs(protos, spec, 10, 1.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(synth::sample_pairs({}, spec, 10), std::invalid_argument);

  const std::vector<Vec> one{Vec::Zero(16)};
  CHECK_THROWS_AS(synth::sample_pairs(one, spec, 10, 0.5),
                  std::invalid_argument);
  // All no-change works with a single prototype.
  const auto only_same = synth::sample_pairs(one, spec, 10, 0.0);
  CHECK(label_histogram(only_same)[0] == 10);
}
