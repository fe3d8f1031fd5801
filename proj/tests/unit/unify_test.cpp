#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "generators.hpp"
#include "sxcad/error.hpp"
#include "sxcad/unify.hpp"

namespace sxcad {
namespace {

UnifiedParamVector make(CommandType type, std::array<double, kSlotCount> slots = {}, FrameForm form = FrameForm::Normal) {
  UnifiedParamVector v;
  v.type = type;
  v.mask = slot_mask(type);
  for (std::size_t s = 0; s < kSlotCount; ++s) v.slots[s] = v.mask[s] ? slots[s] : 0.0;
  v.frame_form = form;
  return v;
}

EncodedProgram one_part(std::vector<UnifiedParamVector> tokens, NormalizationBox box = {{0, 0, 0}, 1}) {
  return EncodedProgram{box, {PartTokens{"part", std::move(tokens)}}};
}

UnifiedParamVector z_extrude() {
  std::array<double, kSlotCount> s{};
  s[slot::kE3] = 1;
  s[slot::kExtent] = 0.25;
  return make(CommandType::ExtrudeNew, s);
}

TEST(Encode, UnitCubeExample) {
  const EncodedProgram e = encode(test::unit_cube(), {{0.5, 0.5, 0.5}, 1.0});
  ASSERT_EQ(e.parts.size(), 1u);
  const auto& t = e.parts[0].tokens;
  ASSERT_EQ(t.size(), 6u);
  EXPECT_EQ(t[0].type, CommandType::Sol);
  EXPECT_EQ(t[2].type, CommandType::Line);
  EXPECT_DOUBLE_EQ(t[2].slots[slot::kX], 0.5);
  EXPECT_DOUBLE_EQ(t[2].slots[slot::kY], 0.5);
  EXPECT_EQ(t[5].type, CommandType::ExtrudeNew);
  EXPECT_EQ(t[5].frame_form, FrameForm::Euler);
  for (const auto& v : t) {
    for (std::size_t s = 0; s < kSlotCount; ++s) {
      EXPECT_LE(std::abs(v.slots[s]), 1.0);
      if (!v.mask[s]) EXPECT_EQ(v.slots[s], 0.0);
    }
  }
}

TEST(Encode, HalfTurnSweepIsZero) {
  const CadProgram p({Part("cap", {Block{Profile({Line({2, 0}), Arc({0, 0}, 180, 1)}), ExtrudeCommand(EulerFrame{}, {}, 1)}})});
  const EncodedProgram e = encode(p, NormalizationBox::fit(p));
  EXPECT_EQ(e.parts[0].tokens[2].type, CommandType::Arc);
  EXPECT_EQ(e.parts[0].tokens[2].slots[slot::kSweep], 0.0);
  EXPECT_EQ(e.parts[0].tokens[2].slots[slot::kCcw], 1.0);
}

TEST(Encode, SolTokenOpensEveryLoop) {
  const EncodedProgram e = encode(test::backrest(), NormalizationBox::fit(test::backrest()));
  const auto& t = e.parts[0].tokens;
  ASSERT_EQ(t.size(), 8u);
  EXPECT_EQ(t[0].type, CommandType::Sol);
  EXPECT_EQ(t[5].type, CommandType::Sol);
  EXPECT_EQ(t[6].type, CommandType::Circle);
  EXPECT_EQ(t[7].type, CommandType::ExtrudeNew);
}

TEST(Encode, BoxTooSmallIsRejected) {
  EXPECT_THROW(encode(test::three_cubes(), {{0, 0, 0}, 1.0}), InvariantError);
  EXPECT_THROW(encode(test::three_cubes(), {{0, 0, 0}, 0.0}), InvariantError);
}

TEST(RoundTrip, Fixtures) {
  for (const CadProgram& p : {test::unit_cube(), test::backrest(), test::three_cubes()}) {
    const NormalizationBox box = NormalizationBox::fit(p, 0.1);
    const DecodeResult d = decode(encode(p, box));
    EXPECT_TRUE(approx_equal(d.program, p, 1e-9));
    EXPECT_EQ(d.clamped, 0);
    EXPECT_EQ(d.nudged, 0);
  }
}

TEST(RoundTrip, GeneratedPrograms) {
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    const CadProgram p = gen::valid_program(rng);
    const DecodeResult d = decode(encode(p, NormalizationBox::fit(p)));
    EXPECT_TRUE(approx_equal(d.program, p, 1e-9));
  }
}

TEST(RoundTrip, EulerAnglesWrap) {
  const CadProgram p({Part("panel", {Block{Profile(test::unit_square()), ExtrudeCommand(EulerFrame{-90, 30, 400}, {}, 1)}})});
  const DecodeResult d = decode(encode(p, {{0, 0, 0}, 2}));
  const auto e = std::get<EulerFrame>(d.program.parts()[0].blocks()[0].extrude.frame());
  EXPECT_NEAR(e.alpha_deg, 270, 1e-9);
  EXPECT_NEAR(e.theta_deg, 30, 1e-9);
  EXPECT_NEAR(e.gamma_deg, 40, 1e-9);
}

TEST(Decode, AllZeroArc) {
  const NormalizationBox box{{1, 2, 3}, 2};
  const DecodeResult d = decode(one_part({make(CommandType::Sol), make(CommandType::Line, {0.5, 0}), make(CommandType::Arc), z_extrude()}, box));
  const Block& b = d.program.parts()[0].blocks()[0];
  const Arc arc = std::get<Arc>(b.profile.outer()[1]);
  EXPECT_EQ(arc.sweep_deg(), 180.0);
  EXPECT_EQ(arc.ccw_flag(), 1);
  // The origin is the box center, so the plane center is the sketch origin.
  EXPECT_EQ(b.extrude.origin(), box.center);
  EXPECT_EQ(arc.end(), (Vec2{0, 0}));
}

TEST(Decode, ClampsOutOfRangeSlots) {
  std::array<double, kSlotCount> s{};
  s[slot::kX] = 1.5;
  const DecodeResult d = decode(one_part({make(CommandType::Sol), make(CommandType::Line, s), make(CommandType::Line, {0, 0.5}), z_extrude()}));
  EXPECT_EQ(d.clamped, 1);
  EXPECT_EQ(std::get<Line>(d.program.parts()[0].blocks()[0].profile.outer()[0]).end(), (Vec2{1.0, 0.0}));
}

TEST(Decode, NudgesDegenerateValues) {
  std::array<double, kSlotCount> circle{};
  circle[slot::kRadius] = 0.0;
  auto flat = z_extrude();
  flat.slots[slot::kExtent] = 0.0;
  const DecodeResult d = decode(one_part({make(CommandType::Sol), make(CommandType::Circle, circle), flat}));
  EXPECT_EQ(d.nudged, 2);
  const Block& b = d.program.parts()[0].blocks()[0];
  EXPECT_GT(std::get<Circle>(b.profile.outer()[0]).radius(), 0.0);
  EXPECT_NE(b.extrude.extent(), 0.0);
}

TEST(Decode, MalformedStreams) {
  EXPECT_THROW(decode(one_part({make(CommandType::Sol), make(CommandType::Line, {0.5, 0})})), InvariantError);
  EXPECT_THROW(decode(one_part({make(CommandType::Line, {0.5, 0}), z_extrude()})), InvariantError);
  EXPECT_THROW(decode(one_part({z_extrude()})), InvariantError);
  auto bad_mask = make(CommandType::Line, {0.5, 0});
  bad_mask.mask[slot::kRadius] = true;
  EXPECT_THROW(decode(one_part({make(CommandType::Sol), bad_mask, z_extrude()})), InvariantError);
}

TEST(Quantize, RangeEnds) {
  EXPECT_EQ(quantize_value(-1.0), 0);
  EXPECT_EQ(quantize_value(1.0), 255);
  EXPECT_EQ(quantize_value(0.0), 128);
  EXPECT_THROW(quantize_value(1.0001), InvariantError);
  EXPECT_THROW(quantize_value(NAN), InvariantError);
  EXPECT_THROW(dequantize_value(256), InvariantError);
}

TEST(Quantize, ErrorBoundAndFixedPoint) {
  Rng rng(6);
  for (int i = 0; i < 100000; ++i) {
    const double x = rng.uniform(-1, 1);
    EXPECT_LE(std::abs(dequantize_value(quantize_value(x)) - x), 1.0 / 256);
  }
  for (int i = 0; i < kBins; ++i) EXPECT_EQ(quantize_value(dequantize_value(i)), i);
}

TEST(Quantize, VectorsRespectMask) {
  const auto v = make(CommandType::Arc, {0.25, -0.5, 0.1, 1.0});
  const BinIndices q = quantize(v);
  for (std::size_t s = 4; s < kSlotCount; ++s) EXPECT_EQ(q[s], 0);
  const UnifiedParamVector back = dequantize(q, CommandType::Arc);
  EXPECT_EQ(back.mask, v.mask);
  for (std::size_t s = 0; s < kSlotCount; ++s) EXPECT_LE(std::abs(back.slots[s] - v.slots[s]), 1.0 / 256);
}

TEST(TokenJson, RoundTrip) {
  const CadProgram p = test::backrest();
  const EncodedProgram e = encode(p, NormalizationBox::fit(p));
  const EncodedProgram back = tokens_from_json(tokens_to_json(e));
  ASSERT_EQ(back.parts.size(), e.parts.size());
  EXPECT_EQ(back.box.center, e.box.center);
  EXPECT_EQ(back.box.half_extent, e.box.half_extent);
  EXPECT_EQ(back.parts[0].label, e.parts[0].label);
  EXPECT_EQ(back.parts[0].tokens, e.parts[0].tokens);
  EXPECT_TRUE(approx_equal(decode(back).program, p, 1e-9));
}

TEST(TokenJson, Errors) {
  EXPECT_THROW(tokens_from_json("[]"), FormatError);
  EXPECT_THROW(tokens_from_json("{"), FormatError);
  EXPECT_THROW(tokens_from_json(R"([{"part":0,"label":"a","box":{"center":[0,0,0],"half_extent":1},"tokens":[{"type":"Spline","slots":[0,0,0,0,0,0,0,0,0,0,0,0]}]}])"),
               FormatError);
}

}  // namespace
}  // namespace sxcad
