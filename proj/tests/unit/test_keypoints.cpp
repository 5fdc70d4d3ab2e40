#include "a2p/alignment.hpp"
#include "a2p/keypoints.hpp"
#include "a2p/motion.hpp"

#include "doctest.h"
#include "error_code.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <set>

using namespace a2p;
using namespace a2p::keypoints;
using a2p::testing::gaussian;
using a2p::testing::uniform;
using a2p::testing::visible_frame;

namespace {

std::vector<KeypointFrame> static_clip(int n) {
  std::vector<KeypointFrame> frames;
  for (int i = 0; i < n; ++i) {
    frames.push_back(visible_frame(a2p::testing::base_skeleton(), i));
    frames.back().person_id = "p";
  }
  return frames;
}

// Every rule evaluated from scratch against the last kept frame.
std::vector<std::int64_t> filter_oracle(const std::vector<KeypointFrame>& frames, double width, double fraction) {
  std::vector<std::int64_t> kept;
  const KeypointFrame* last = nullptr;
  for (const auto& f : frames) {
    bool ok = true;
    for (int p = 0; p < kNumPoints; ++p) {
      ok = ok && f.visible[p];
    }
    if (ok && last != nullptr) {
      for (int p = 0; p < kNumPoints; ++p) {
        const double dx = f.points[p].x() - last->points[p].x();
        const double dy = f.points[p].y() - last->points[p].y();
        if (std::sqrt(dx * dx + dy * dy) > fraction * width) {
          ok = false;
        }
      }
    }
    if (ok) {
      kept.push_back(f.frame_index);
      last = &f;
    }
  }
  return kept;
}

Similarity random_similarity(std::mt19937_64& rng) {
  return Similarity::from_parameters(uniform(rng, 0.5, 2.0), uniform(rng, 0, 2 * std::numbers::pi),
                                     {uniform(rng, -50, 50), uniform(rng, -50, 50)});
}

KeypointFrame transformed(const PoseVector& pose, const Similarity& s, std::int64_t index) {
  auto f = visible_frame(pose, index);
  for (auto& p : f.points) {
    p = s.apply(p);
  }
  return f;
}

}  // namespace

TEST_CASE("filter_frames") {
  SUBCASE("jump threshold at width 200") {
    FilterConfig c;
    c.frame_width = 200;
    c.jump_fraction = 0.10;
    CHECK(c.jump_threshold() == doctest::Approx(20.0));
  }
  SUBCASE("static visible frames are all kept") {
    FilterConfig c;
    c.frame_width = 200;
    const auto r = filter_frames(static_clip(30), c);
    CHECK(r.kept.size() == 30);
    CHECK(r.dropped.empty());
  }
  SUBCASE("+50 px jumps at width 200 are exactly the dropped frames") {
    std::mt19937_64 rng(1);
    auto frames = static_clip(400);
    std::set<std::int64_t> perturbed;
    for (auto& f : frames) {
      for (auto& p : f.points) {
        p += Point2(uniform(rng, -1, 1), uniform(rng, -1, 1));
      }
      if (f.frame_index > 0 && uniform(rng, 0, 1) < 0.10) {
        const int block = static_cast<int>(rng() % 3);
        const int lo = block == 0 ? 0 : (block == 1 ? kLeftHandOffset : kRightHandOffset);
        const int hi = block == 0 ? kUpperBodyPoints : lo + kHandPoints;
        for (int p = lo; p < hi; ++p) {
          f.points[p].x() += 50.0;
        }
        perturbed.insert(f.frame_index);
      }
    }
    FilterConfig c;
    c.frame_width = 200;
    const auto r = filter_frames(frames, c);
    const auto expected = filter_oracle(frames, 200, 0.10);
    REQUIRE(r.kept.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK(r.kept[i].frame_index == expected[i]);
    }
    std::set<std::int64_t> dropped;
    for (const auto& d : r.dropped) {
      CHECK(d.reason == DropReason::Jump);
      dropped.insert(d.frame_index);
    }
    CHECK(dropped == perturbed);
  }
  SUBCASE("missing points, person mismatch and reference box") {
    auto frames = static_clip(6);
    frames[1].visible[12] = false;
    frames[2].person_id = "other";
    for (auto& p : frames[4].points) {
      p.x() += 1000.0;
    }
    frames[5] = frames[4];
    frames[5].frame_index = 5;
    FilterConfig c;
    c.frame_width = 320;
    c.reference_box = Rect{0, 0, 320, 240};
    const auto r = filter_frames(frames, c);
    REQUIRE(r.dropped.size() == 4);
    CHECK(r.dropped[0].reason == DropReason::MissingPoints);
    CHECK(r.dropped[1].reason == DropReason::PersonMismatch);
    CHECK(r.dropped[2].reason == DropReason::OutsideReferenceBox);
    CHECK(r.dropped[3].reason == DropReason::OutsideReferenceBox);
  }
  SUBCASE("kept frames preserve order and indices") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
      auto frames = static_clip(50);
      for (auto& f : frames) {
        f.frame_index = f.frame_index * 3 + 1;
        if (uniform(rng, 0, 1) < 0.2) {
          f.visible[rng() % kNumPoints] = false;
        }
        if (uniform(rng, 0, 1) < 0.2) {
          f.points[rng() % kNumPoints].y() += 40.0;
        }
      }
      FilterConfig c;
      c.frame_width = 200;
      const auto r = filter_frames(frames, c);
      std::size_t cursor = 0;
      for (const auto& k : r.kept) {
        while (cursor < frames.size() && frames[cursor].frame_index != k.frame_index) {
          ++cursor;
        }
        REQUIRE(cursor < frames.size());
        CHECK(k.points == frames[cursor].points);
      }
      CHECK(r.kept.size() + r.dropped.size() == frames.size());
    }
  }
  SUBCASE("interpolation fills a missing point linearly") {
    auto frames = static_clip(3);
    frames[0].points[10] = Point2(0, 0);
    frames[2].points[10] = Point2(10, 4);
    frames[1].visible[10] = false;
    FilterConfig c;
    c.frame_width = 320;
    c.interpolate_missing = true;
    const auto r = filter_frames(frames, c);
    REQUIRE(r.kept.size() == 3);
    CHECK(r.kept[1].points[10].isApprox(Point2(5, 2)));
  }
  SUBCASE("empty input is rejected") {
    FilterConfig c;
    c.frame_width = 200;
    CHECK(error_code([&] { filter_frames({}, c); }) == ErrorCode::InvalidInput);
  }
}

TEST_CASE("solve_similarity") {
  std::vector<Point2> ref;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 8; ++i) {
    ref.emplace_back(uniform(rng, 0, 300), uniform(rng, 0, 200));
  }

  SUBCASE("identity") {
    const auto s = solve_similarity(ref, ref);
    CHECK(s.scale == doctest::Approx(1.0));
    CHECK(s.rotation.isApprox(Eigen::Matrix2d::Identity()));
    CHECK(s.translation.norm() < 1e-9);
  }
  SUBCASE("pure translation") {
    std::vector<Point2> shifted;
    for (const auto& r : ref) {
      shifted.push_back(r + Point2(5, -3));
    }
    const auto s = solve_similarity(ref, shifted);
    CHECK(s.scale == doctest::Approx(1.0));
    CHECK(std::abs(s.angle()) < 1e-12);
    CHECK((s.translation - Point2(5, -3)).norm() < 1e-9);
  }
  SUBCASE("known transform under 1e-6 noise") {
    const auto truth = Similarity::from_parameters(1.7, 40.0 * std::numbers::pi / 180.0, {12, 8});
    std::vector<Point2> target;
    for (const auto& r : ref) {
      target.push_back(truth.apply(r) + 1e-6 * Point2(gaussian(rng), gaussian(rng)));
    }
    const auto s = solve_similarity(ref, target);
    CHECK(std::abs(s.scale - 1.7) < 1e-4);
    CHECK(std::abs(s.angle() - 40.0 * std::numbers::pi / 180.0) < 1e-4);
    CHECK((s.translation - Point2(12, 8)).norm() < 1e-4);
    // The optimum can only beat the generating transform.
    CHECK(similarity_residual(s, ref, target) <= similarity_residual(truth, ref, target));
  }
  SUBCASE("matches the normal-equation solution and no perturbation improves it") {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Point2> pts, target;
      for (int i = 0; i < 8; ++i) {
        pts.emplace_back(uniform(rng, 0, 300), uniform(rng, 0, 200));
        target.emplace_back(uniform(rng, 0, 300), uniform(rng, 0, 200));
      }
      // Unknowns (a, b, tx, ty) with x' = a x - b y + tx, y' = b x + a y + ty.
      Eigen::Matrix4d ata = Eigen::Matrix4d::Zero();
      Eigen::Vector4d atb = Eigen::Vector4d::Zero();
      for (int i = 0; i < 8; ++i) {
        const Eigen::Vector4d rx(pts[i].x(), -pts[i].y(), 1, 0);
        const Eigen::Vector4d ry(pts[i].y(), pts[i].x(), 0, 1);
        ata += rx * rx.transpose() + ry * ry.transpose();
        atb += rx * target[i].x() + ry * target[i].y();
      }
      const Eigen::Vector4d sol = ata.fullPivLu().solve(atb);
      const auto s = solve_similarity(pts, target);
      CHECK(std::abs(s.scale * std::cos(s.angle()) - sol[0]) < 1e-9);
      CHECK(std::abs(s.scale * std::sin(s.angle()) - sol[1]) < 1e-9);
      CHECK((s.translation - Eigen::Vector2d(sol[2], sol[3])).norm() < 1e-7);

      const double best = similarity_residual(s, pts, target);
      for (int k = 0; k < 100; ++k) {
        const auto p = Similarity::from_parameters(s.scale * (1.0 + 1e-3 * gaussian(rng)), s.angle() + 1e-3 * gaussian(rng),
                                                   s.translation + 1e-2 * Point2(gaussian(rng), gaussian(rng)));
        CHECK(similarity_residual(p, pts, target) >= best);
      }
    }
  }
  SUBCASE("coincident points are degenerate") {
    const std::vector<Point2> same(5, Point2(3, 3));
    CHECK(error_code([&] { solve_similarity(same, std::span<const Point2>(ref).first(5)); }) == ErrorCode::DegenerateConfiguration);
  }
}

TEST_CASE("rigid alignment") {
  std::mt19937_64 rng(4);
  const PoseVector reference = a2p::testing::base_skeleton();

  SUBCASE("pure rigid motion is removed completely") {
    std::vector<KeypointFrame> frames;
    for (int i = 0; i < 20; ++i) {
      frames.push_back(transformed(reference, random_similarity(rng), i));
    }
    const auto model = fit_alignment(frames, reference);
    const auto aligned = remove_rigid(frames, model);
    for (Eigen::Index c = 0; c < aligned.cols(); ++c) {
      CHECK((aligned.col(c) - reference).cwiseAbs().maxCoeff() < 1e-6);
    }
    for (const auto& m : model.frame_motion) {
      CHECK(std::abs(m.rotation.determinant() - 1.0) < 1e-9);
      CHECK(m.scale > 0.0);
    }
  }
  SUBCASE("identity motion returns the input") {
    std::vector<KeypointFrame> frames = static_clip(3);
    AlignmentModel model;
    model.reference_pose = reference;
    model.frame_motion.assign(3, Similarity{});
    const auto aligned = remove_rigid(frames, model);
    for (int c = 0; c < 3; ++c) {
      CHECK(aligned.col(c) == frames[c].pose());
    }
  }
  SUBCASE("hand wiggle on a rigid track is recovered and the stored motion reproduces the frame") {
    std::vector<KeypointFrame> frames;
    std::vector<PoseVector> wiggles;
    for (int i = 0; i < 30; ++i) {
      PoseVector w = PoseVector::Zero();
      for (int p = kUpperBodyPoints; p < kNumPoints; ++p) {
        w[2 * p] = 3.0 * gaussian(rng);
        w[2 * p + 1] = 3.0 * gaussian(rng);
      }
      wiggles.push_back(w);
      frames.push_back(transformed(reference + w, random_similarity(rng), i));
    }
    const auto model = fit_alignment(frames, reference);
    const auto aligned = remove_rigid(frames, model);
    for (int i = 0; i < 30; ++i) {
      CHECK((aligned.col(i) - (reference + wiggles[i])).cwiseAbs().maxCoeff() < 1e-6);
      for (int p = 0; p < kNumPoints; ++p) {
        const Point2 back = model.frame_motion[i].apply(Point2(aligned(2 * p, i), aligned(2 * p + 1, i)));
        CHECK((back - frames[i].points[p]).norm() < 1e-6);
      }
    }
  }
  SUBCASE("missing similarity is rejected") {
    AlignmentModel model;
    model.reference_pose = reference;
    CHECK(error_code([&] { remove_rigid(static_clip(2), model); }) == ErrorCode::InvalidInput);
  }
}

TEST_CASE("medoid_index matches a brute-force scan") {
  std::mt19937_64 rng(5);
  std::vector<KeypointFrame> frames;
  for (int i = 0; i < 60; ++i) {
    PoseVector p = a2p::testing::base_skeleton();
    for (int d = 0; d < kPoseDim; ++d) {
      p[d] += 5.0 * gaussian(rng);
    }
    frames.push_back(visible_frame(p, i));
  }
  std::size_t best = 0;
  double best_cost = 1e300;
  for (std::size_t c = 0; c < frames.size(); ++c) {
    double cost = 0.0;
    for (const auto& other : frames) {
      double ss = 0.0;
      for (int d = 0; d < kPoseDim; ++d) {
        const double diff = frames[c].pose()[d] - other.pose()[d];
        ss += diff * diff;
      }
      cost += std::sqrt(ss);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = c;
    }
  }
  CHECK(medoid_index(frames) == best);
}

TEST_CASE("fit_pca") {
  std::mt19937_64 rng(6);

  SUBCASE("rank-1 data") {
    Eigen::MatrixXd data(10, 50);
    Eigen::VectorXd dir = Eigen::VectorXd::LinSpaced(10, 1, 10);
    for (int j = 0; j < 50; ++j) {
      data.col(j) = Eigen::VectorXd::Constant(10, 3.0) + gaussian(rng) * dir;
    }
    const auto m = fit_pca(data, {0.90, std::nullopt});
    CHECK(m.modes() == 1);
    CHECK(m.variance_fraction_captured == doctest::Approx(1.0));
  }
  SUBCASE("planted subspace, structure and energy accounting") {
    const int dim = 40;
    Eigen::MatrixXd raw(dim, 3);
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
      raw.data()[i] = gaussian(rng);
    }
    const auto planted = a2p::testing::gram_schmidt(raw);
    Eigen::MatrixXd data(dim, 3000);
    for (int j = 0; j < 3000; ++j) {
      data.col(j) = 6.0 * gaussian(rng) * planted.col(0) + 4.0 * gaussian(rng) * planted.col(1) +
                    3.0 * gaussian(rng) * planted.col(2);
      for (int i = 0; i < dim; ++i) {
        data(i, j) += 0.2 * gaussian(rng);
      }
    }
    const auto m = fit_pca(data, {0.90, std::nullopt});
    REQUIRE(m.modes() == 3);
    CHECK(a2p::testing::max_principal_angle(m.components, planted) < 1e-2);
    CHECK((m.components.transpose() * m.components - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
    for (int k = 1; k < m.modes(); ++k) {
      CHECK(m.mode_variances[k] <= m.mode_variances[k - 1]);
    }
    CHECK(std::abs(m.mode_variances.sum() / m.total_variance - m.variance_fraction_captured) < 1e-8);
    for (int k = 0; k < m.modes(); ++k) {
      Eigen::Index idx = 0;
      m.components.col(k).cwiseAbs().maxCoeff(&idx);
      CHECK(m.components(idx, k) > 0.0);
    }

    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    a2p::testing::jacobi_eigen(a2p::testing::covariance_oracle(data), values, vectors);
    for (int k = 0; k < 3; ++k) {
      CHECK(m.mode_variances[k] == doctest::Approx(values[k]).epsilon(1e-9));
    }
    CHECK(m.total_variance == doctest::Approx(values.sum()).epsilon(1e-9));

    const auto fixed = fit_pca(data, {0.90, 5});
    CHECK(fixed.modes() == 5);
  }
  SUBCASE("identical frames are degenerate") {
    const Eigen::MatrixXd data = Eigen::MatrixXd::Constant(6, 10, 1.5);
    CHECK(error_code([&] { fit_pca(data, {0.90, std::nullopt}); }) == ErrorCode::DegenerateData);
  }
}

TEST_CASE("project and reconstruct") {
  std::mt19937_64 rng(7);
  Eigen::MatrixXd data(12, 400);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    data.data()[i] = gaussian(rng) * (1.0 + static_cast<double>(i % 12));
  }
  const auto m = fit_pca(data, {0.90, 4});
  CHECK(project(m, m.mean).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::VectorXd c = project(m, m.mean + 2.0 * m.components.col(0));
  CHECK(c[0] == doctest::Approx(2.0));
  CHECK(c.tail(3).cwiseAbs().maxCoeff() < 1e-12);

  const auto q = a2p::testing::gram_schmidt(m.components);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(12);
    for (auto& v : x) {
      v = 10.0 * gaussian(rng);
    }
    const Eigen::VectorXd rec = reconstruct(m, project(m, x));
    Eigen::VectorXd residual = x - m.mean;
    for (int k = 0; k < q.cols(); ++k) {
      residual -= q.col(k).dot(x - m.mean) * q.col(k);
    }
    CHECK(std::abs((x - rec).norm() - residual.norm()) < 1e-8);
  }
  CHECK(error_code([&] { project(m, Eigen::VectorXd::Zero(5)); }) == ErrorCode::InvalidInput);
}

TEST_CASE("upsample_linear") {
  Eigen::MatrixXd s(1, 2);
  s << 0.0, 8.0;
  Eigen::MatrixXd expected(1, 5);
  expected << 0, 2, 4, 6, 8;
  CHECK(upsample_linear(s, 4) == expected);
  CHECK(upsample_linear(s, 1) == s);

  std::mt19937_64 rng(8);
  Eigen::MatrixXd r(3, 9);
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    r.data()[i] = gaussian(rng) * 1e3;
  }
  const auto u = upsample_linear(r, 4);
  CHECK(u.cols() == 33);
  for (int j = 0; j < 9; ++j) {
    CHECK(u.col(4 * j) == r.col(j));
  }
  CHECK(error_code([&] { upsample_linear(r, 0); }) == ErrorCode::InvalidInput);
}

TEST_CASE("standardization") {
  Eigen::MatrixXd two(1, 2);
  two << 1.0, 3.0;
  const auto stats = StandardizationStats::fit(two);
  CHECK(stats.mean[0] == 2.0);
  CHECK(stats.std[0] == 1.0);
  Eigen::MatrixXd expected(1, 2);
  expected << -1.0, 1.0;
  CHECK(standardize(two, stats) == expected);

  std::mt19937_64 rng(9);
  Eigen::MatrixXd r(4, 50);
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    r.data()[i] = gaussian(rng) * 7.0 + 3.0;
  }
  const auto st = StandardizationStats::fit(r);
  CHECK((destandardize(standardize(r, st), st) - r).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::MatrixXd at_mean = st.mean.replicate(1, 3);
  CHECK(standardize(at_mean, st).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd flat(2, 5);
  flat.row(0).setConstant(1.0);
  flat.row(1) = Eigen::RowVectorXd::LinSpaced(5, 0, 1);
  CHECK(error_code([&] { StandardizationStats::fit(flat); }) == ErrorCode::DegenerateData);
}

TEST_CASE("keypoint and motion files round trip") {
  const auto dir = a2p::testing::scratch_dir("unit_keypoint_io");
  KeypointClip clip;
  clip.fps = 24;
  clip.width = 320;
  clip.height = 240;
  clip.frames = static_clip(3);
  clip.frames[1].visible[7] = false;
  clip.frames[1].confidence[7] = 0.0;
  clip.frames[2].confidence[3] = 0.25;
  write_keypoint_json(dir / "k.json", clip);
  const auto back = read_keypoint_json(dir / "k.json");
  REQUIRE(back.frames.size() == 3);
  CHECK(back.width == 320);
  CHECK(back.frames[1].visible[7] == false);
  CHECK(back.frames[2].confidence[3] == 0.25);
  CHECK(back.frames[2].points == clip.frames[2].points);
  CHECK(back.frames[0].person_id == "p");

  std::mt19937_64 rng(10);
  Eigen::MatrixXd data(kPoseDim, 300);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    data.data()[i] = gaussian(rng);
  }
  MotionModel m;
  m.reference_pose = a2p::testing::base_skeleton();
  m.pca = fit_pca(data, {0.9, 6});
  m.input_stats = StandardizationStats::fit(data.topRows(28));
  m.output_stats = StandardizationStats::fit(project_all(m.pca, data));
  write_motion_model(dir / "m.a2pm", m);
  const auto mb = read_motion_model(dir / "m.a2pm");
  CHECK(mb.pca.components == m.pca.components);
  CHECK(mb.pca.mean == m.pca.mean);
  CHECK(mb.output_stats.std == m.output_stats.std);
  CHECK(mb.reference_pose == m.reference_pose);
  CHECK(mb.pca.scope == "corpus");

  CHECK(error_code([&] { parse_keypoint_json("{not json"); }) == ErrorCode::CorruptFile);
}
