#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <thread>

#include "gyrolab/device.hpp"
#include "gyrolab/error.hpp"
#include "support.hpp"

namespace gyrolab {
namespace {

using namespace device;
using test::Rng;

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kService;
}

DevicePose pose(const Vec3& p, const Vec3& v = Vec3::Zero()) { return DevicePose{p, v, 0}; }

TEST(ProjectSpherical, Examples) {
  EXPECT_EQ(project_spherical(Vec3(0.2, 0, 0), 0.1), Vec3(0.1, 0, 0));
  const Vec3 on(0.06, 0.0, 0.08);
  EXPECT_TRUE(project_spherical(on, 0.1).isApprox(on, 1e-15));
  EXPECT_EQ(code_of([] { project_spherical(Vec3::Zero(), 0.1); }), ErrorCode::kUndefinedProjection);
}

TEST(ProjectSpherical, NormEqualsRadius) {
  Rng rng(31);
  for (int i = 0; i < 10'000; ++i) {
    const Vec3 raw = rng.unit() * std::pow(10.0, rng.uniform(-6, 3));
    const double radius = rng.uniform(1e-3, 1.0);
    const Vec3 p = project_spherical(raw, radius);
    ASSERT_LT(std::abs(p.norm() - radius), 1e-12);
    ASSERT_GT(p.dot(raw), 0.0);
  }
}

TEST(Couple, Examples) {
  const CouplingMap map;
  EXPECT_EQ(couple(Vec3(0.01, 0.03, 0.02), map), Vec3(0.01, -0.03, 0.02));
  EXPECT_EQ(couple(Vec3(0.01, 0.0, 0.02), map).y(), 0.0);
  const DevicePose p{Vec3(0.01, 0.03, 0.02), Vec3(1, 2, 3), 7};
  const DevicePose c = couple(p, map);
  EXPECT_EQ(c.position, Vec3(0.01, -0.03, 0.02));
  EXPECT_EQ(c.velocity, Vec3(1, -2, 3));
  EXPECT_EQ(c.tick, 7);
}

TEST(Couple, NormPreservingInvolution) {
  Rng rng(32);
  for (int i = 0; i < 10'000; ++i) {
    CouplingMap map;
    map.mirrored = {rng.coin(), rng.coin(), rng.coin()};
    const DevicePose p = pose(rng.vec(-1, 1), rng.vec(-5, 5));
    const DevicePose back = couple(couple(p, map), map);
    ASSERT_EQ(back.position, p.position);
    ASSERT_EQ(back.velocity, p.velocity);
    ASSERT_EQ(couple(p.position, map).norm(), p.position.norm());
    ASSERT_EQ(couple(p.velocity, map).norm(), p.velocity.norm());
  }
}

TEST(AxleFromHandles, Examples) {
  EXPECT_EQ(axle_from_handles(pose(Vec3(0.1, 0, 0)), pose(Vec3(-0.1, 0, 0))), Vec3(1, 0, 0));
  EXPECT_EQ(code_of([] { axle_from_handles(pose(Vec3(0.1, 0, 0)), pose(Vec3(0.1, 0, 0))); }),
            ErrorCode::kDegenerateAxle);
  const Vec3 d = axle_from_handles(pose(Vec3(0.1, 0.1, 0)), pose(Vec3(-0.1, -0.1, 0)));
  EXPECT_NEAR(d.x(), 0.7071, 1e-4);
  EXPECT_NEAR(d.y(), 0.7071, 1e-4);
  EXPECT_NEAR(d.x(), std::sqrt(0.5), 1e-15);
  EXPECT_EQ(d.z(), 0.0);
}

TEST(AxleFromHandles, RigidPairGivesHandleDirection) {
  Rng rng(33);
  const CouplingMap map;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = rng.unit() * map.sphere_radius_m;
    const Vec3 b = couple(a, map);  // B's own frame
    const Vec3 axle = axle_from_handles(pose(a), pose(to_partner_frame(b, map)));
    ASSERT_LE((axle - a.normalized()).norm(), 1e-15);
  }
}

TEST(CouplingCorrection, Examples) {
  const CouplingMap map;
  const auto [fa0, fb0] = coupling_correction(pose(Vec3(0.01, 0.03, 0.0)), pose(Vec3(0.01, -0.03, 0.0)), map);
  EXPECT_EQ(fa0, Vec3::Zero());
  EXPECT_EQ(fb0, Vec3::Zero());

  // A sits at y = 0.03, B's image at y = 0.02: 0.5 N each, opposing the gap.
  const auto [fa, fb] = coupling_correction(pose(Vec3(0, 0.03, 0)), pose(Vec3(0, -0.02, 0)), map);
  EXPECT_NEAR(fa.norm(), 200 * 0.005 * 0.5, 1e-12);
  EXPECT_NEAR(fb.norm(), 0.5, 1e-12);
  EXPECT_LT(fa.y(), 0.0);  // A pulled down toward the image
  EXPECT_LT(fb.y(), 0.0);  // B pulled from -0.02 toward -0.03
  EXPECT_EQ(fa, -couple(fb, map));
}

TEST(CouplingCorrection, SymmetricAndVanishesOnlyWhenMirrored) {
  Rng rng(34);
  for (int i = 0; i < 10'000; ++i) {
    CouplingMap map;
    map.mirrored = {rng.coin(), rng.coin(), rng.coin()};
    map.stiffness_N_m = rng.uniform(1, 500);
    const Vec3 a = rng.vec(-0.05, 0.05);
    const bool mirrored = rng.coin();
    const Vec3 b = mirrored ? couple(a, map) : rng.vec(-0.05, 0.05);
    const auto [fa, fb] = coupling_correction(pose(a), pose(b), map);
    ASSERT_EQ(fa, -couple(fb, map));
    if (mirrored) {
      ASSERT_EQ(fa, Vec3::Zero());
    } else {
      ASSERT_GT(fa.norm(), 0.0);
    }
  }
}

TEST(CouplingCorrection, ClosedLoopDoesNoNetWork) {
  const CouplingMap map;
  const int n = 2000;
  double work = 0.0;
  const auto a_at = [](double s) { return Vec3(0.03 * std::cos(s), 0.02 * std::sin(2 * s), 0.01); };
  const auto b_at = [&](double s) {
    return Vec3(0.03 * std::cos(s + 0.3), -0.02 * std::sin(2 * s) + 0.01 * std::sin(s), 0.01);
  };
  for (int i = 0; i < n; ++i) {
    const double s0 = 2 * std::numbers::pi * i / n, s1 = 2 * std::numbers::pi * (i + 1) / n;
    const auto [fa0, fb0] = coupling_correction(pose(a_at(s0)), pose(b_at(s0)), map);
    const auto [fa1, fb1] = coupling_correction(pose(a_at(s1)), pose(b_at(s1)), map);
    work += 0.5 * (fa0 + fa1).dot(a_at(s1) - a_at(s0));
    work += 0.5 * (fb0 + fb1).dot(b_at(s1) - b_at(s0));
  }
  EXPECT_LE(work, 1e-12);
  EXPECT_GE(work, -1e-12);
}

TEST(Calibrate, Examples) {
  const haptics::DeviceCaps caps;
  const double h = caps.half_side();
  const AffineMap id = calibrate({Vec3::Constant(-h), Vec3::Constant(h)}, caps);
  EXPECT_TRUE(id.scale.isApprox(Vec3::Ones(), 1e-15));
  EXPECT_LE(id.offset.norm(), 1e-17);

  const AffineMap unit = calibrate({Vec3::Zero(), Vec3::Ones()}, caps);
  EXPECT_TRUE(unit.scale.isApprox(Vec3::Constant(0.1016), 1e-15));
  EXPECT_TRUE(unit.offset.isApprox(Vec3::Constant(-0.0508), 1e-15));

  const Box raw{Vec3(-3, 10, 0.5), Vec3(5, 12, 0.75)};
  const AffineMap m = calibrate(raw, caps);
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 p((corner & 1) ? raw.max.x() : raw.min.x(), (corner & 2) ? raw.max.y() : raw.min.y(),
                 (corner & 4) ? raw.max.z() : raw.min.z());
    const Vec3 want((corner & 1) ? h : -h, (corner & 2) ? h : -h, (corner & 4) ? h : -h);
    EXPECT_LE((m.apply(p) - want).norm(), 1e-15);
  }
  EXPECT_EQ(code_of([] { calibrate({Vec3::Zero(), Vec3(1, 0, 1)}); }), ErrorCode::kCalibration);
  EXPECT_EQ(code_of([] { calibrate({Vec3::Ones(), Vec3::Zero()}); }), ErrorCode::kCalibration);
}

TEST(Calibrate, InverseRoundTrip) {
  Rng rng(35);
  const haptics::DeviceCaps caps;
  for (int i = 0; i < 10'000; ++i) {
    const Vec3 lo = rng.vec(-10, 10);
    const Box raw{lo, lo + rng.vec(0.01, 5)};
    const AffineMap m = calibrate(raw, caps);
    const Vec3 q = rng.vec(-caps.half_side(), caps.half_side());
    ASSERT_LE((m.apply(m.invert(q)) - q).norm(), 1e-12);
  }
}

TEST(ScriptedSource, Examples) {
  const Vec3 p0(0.01, 0.02, 0.03), p1(0.03, -0.02, 0.0);
  const ScriptedSource src({{0, p0}, {1000, p1}});
  EXPECT_TRUE(poll(src, 500, 0.001).position.isApprox(0.5 * (p0 + p1), 1e-15));
  const DevicePose beyond = poll(src, 5000, 0.001);
  EXPECT_EQ(beyond.position, p1);
  EXPECT_EQ(beyond.velocity, Vec3::Zero());
  const ScriptedSource still({{0, p0}, {10, p0}, {20, p0}});
  for (std::int64_t t = 0; t < 30; ++t) EXPECT_EQ(poll(still, t, 0.001).velocity, Vec3::Zero());
  EXPECT_TRUE(poll(src, 500, 0.001).velocity.isApprox((p1 - p0) / 1.0, 1e-9));
}

TEST(ScriptedSource, RejectsBadTrajectories) {
  EXPECT_EQ(code_of([] { ScriptedSource s({}); }), ErrorCode::kInvalidSource);
  EXPECT_EQ(code_of([] { ScriptedSource s({{5, Vec3::Zero()}, {5, Vec3::Ones()}}); }), ErrorCode::kInvalidSource);
  EXPECT_EQ(code_of([] { ScriptedSource s({{5, Vec3::Zero()}, {4, Vec3::Ones()}}); }), ErrorCode::kInvalidSource);
}

TEST(ScriptedSource, PiecewiseLinearAndDeterministic) {
  Rng rng(36);
  for (int i = 0; i < 1000; ++i) {
    std::vector<TrajectorySample> samples;
    std::int64_t t = rng.integer(0, 10);
    for (int k = 0; k < 5; ++k) {
      samples.push_back({t, rng.vec(-0.05, 0.05)});
      t += rng.integer(1, 200);
    }
    const ScriptedSource src(samples);
    const std::size_t seg = static_cast<std::size_t>(rng.integer(0, 3));
    const auto& s0 = samples[seg];
    const auto& s1 = samples[seg + 1];
    const std::int64_t q = rng.integer(s0.tick, s1.tick);
    const Vec3 p = src.position_at(q);
    const double u = double(q - s0.tick) / double(s1.tick - s0.tick);
    ASSERT_LE((p - (s0.position + u * (s1.position - s0.position))).norm(), 1e-15);
    ASSERT_EQ(poll(src, q, 0.001).position, poll(src, q, 0.001).position);
  }
}

TEST(PoseSource, InteractiveLastValueWinsAndReleases) {
  PoseSource src(InteractiveSource{}, 5);
  EXPECT_FALSE(src.poll(1, 0.001).engaged);
  src.command(Vec3(0.01, 0, 0));
  src.command(Vec3(0.02, 0, 0));
  auto p = src.poll(2, 0.001);
  EXPECT_TRUE(p.engaged);
  EXPECT_EQ(p.pose.position, Vec3(0.02, 0, 0));
  EXPECT_EQ(p.pose.velocity, Vec3::Zero());  // first contact starts at rest
  src.command(Vec3(0.021, 0, 0));
  p = src.poll(3, 0.001);
  EXPECT_TRUE(p.pose.velocity.isApprox(Vec3(1.0, 0, 0), 1e-9));
  for (std::int64_t t = 4; t <= 7; ++t) EXPECT_TRUE(src.poll(t, 0.001).engaged);
  EXPECT_TRUE(src.poll(8, 0.001).engaged);
  EXPECT_FALSE(src.poll(9, 0.001).engaged);
  src.reset();
  EXPECT_FALSE(src.poll(10, 0.001).engaged);
}

TEST(PoseSource, CommandRequiresInteractive) {
  PoseSource free;
  EXPECT_EQ(code_of([&] { free.command(Vec3::Zero()); }), ErrorCode::kInvalidSource);
  EXPECT_FALSE(free.poll(1, 0.001).engaged);
}

TEST(InteractiveSource, NeverTearsAcrossThreads) {
  InteractiveSource src;
  std::atomic<bool> done{false};
  std::thread writer([&] {
    for (int i = 1; i <= 200'000; ++i) src.command(Vec3::Constant(double(i)));
    done = true;
  });
  while (!done) {
    if (const auto v = src.take()) {
      ASSERT_EQ(v->x(), v->y());
      ASSERT_EQ(v->y(), v->z());
    }
  }
  writer.join();
}

}  // namespace
}  // namespace gyrolab
