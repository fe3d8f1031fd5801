#pragma once

// Fixed-width parameter vectors for every command type, plus the uniform
// 256-bin quantizer used by the discrete-head variant.
//
// Slot layout: [x, y, sweep, ccw, radius, e1, e2, e3, ox, oy, oz, extent].
// Points are normalized by an isotropic box: sketch coordinates relative to
// the box center projected into the sketch plane, world points relative to
// the box center, both divided by the half extent. Lengths (radius, extent)
// are divided by the full box width so they stay in [-1, 1]. Angles map
// [0, 360] to [-1, 1]; flags map {0, 1} to {-1, +1}.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sxcad/ir.hpp"
#include "sxcad/vec.hpp"

namespace sxcad {

enum class CommandType { Sol, Line, Arc, Circle, ExtrudeNew, ExtrudeCut };
enum class FrameForm { Normal, Euler };

std::string_view to_string(CommandType t);
std::string_view to_string(FrameForm f);

inline constexpr std::size_t kSlotCount = 12;

namespace slot {
inline constexpr std::size_t kX = 0;
inline constexpr std::size_t kY = 1;
inline constexpr std::size_t kSweep = 2;
inline constexpr std::size_t kCcw = 3;
inline constexpr std::size_t kRadius = 4;
inline constexpr std::size_t kE1 = 5;
inline constexpr std::size_t kE2 = 6;
inline constexpr std::size_t kE3 = 7;
inline constexpr std::size_t kOx = 8;
inline constexpr std::size_t kOy = 9;
inline constexpr std::size_t kOz = 10;
inline constexpr std::size_t kExtent = 11;
}  // namespace slot

using SlotMask = std::array<bool, kSlotCount>;

/// Slots carried by a command type.
SlotMask slot_mask(CommandType type);

struct UnifiedParamVector {
  CommandType type = CommandType::Sol;
  std::array<double, kSlotCount> slots{};  ///< masked-out slots are 0
  SlotMask mask{};
  FrameForm frame_form = FrameForm::Normal;  ///< meaning of e1..e3 on extrude tokens

  bool operator==(const UnifiedParamVector&) const = default;
};

struct NormalizationBox {
  Vec3 center;
  double half_extent = 1.0;

  /// Cube around the compiled solids and every extrusion origin, grown by
  /// `margin` (relative). Throws GeometryError for an empty program.
  static NormalizationBox fit(const CadProgram& program, double margin = 0.0);
};

struct PartTokens {
  std::string label;
  std::vector<UnifiedParamVector> tokens;
};

struct EncodedProgram {
  NormalizationBox box;
  std::vector<PartTokens> parts;
};

/// One SOL token opens every loop (outer, then each cut); an extrude token
/// closes the block. Throws InvariantError when a slot leaves [-1, 1].
EncodedProgram encode(const CadProgram& program, const NormalizationBox& box);

struct DecodeResult {
  CadProgram program;
  int clamped = 0;  ///< slots pulled back into [-1, 1]
  int nudged = 0;   ///< degenerate values moved to the nearest valid one
};

/// Inverse of encode. Throws InvariantError for token streams that do not
/// form blocks or whose masks disagree with their types.
DecodeResult decode(const EncodedProgram& encoded);

inline constexpr int kBins = 256;
using BinIndices = std::array<int, kSlotCount>;

int quantize_value(double x);
double dequantize_value(int index);

/// Masked slots map to bin 0. Throws InvariantError for slots outside [-1, 1].
BinIndices quantize(const UnifiedParamVector& v);
/// Bin centers for masked-in slots, 0 elsewhere. Throws InvariantError for
/// indices outside [0, 256).
UnifiedParamVector dequantize(const BinIndices& bins, CommandType type, FrameForm form = FrameForm::Normal);

/// Flat JSON array: [{part, label, box, tokens: [{type, slots, mask, frame?}]}].
std::string tokens_to_json(const EncodedProgram& encoded);
/// Throws FormatError.
EncodedProgram tokens_from_json(std::string_view text);

}  // namespace sxcad
