#ifndef CFGSMITH_SORT_H
#define CFGSMITH_SORT_H

#include <cstdint>
#include <string>

#include "cfgsmith/errors.h"

namespace cfgsmith {

enum class SortKind
{
  kBool,
  kBitVec
};

// Bool or a fixed-width bit-vector. Widths are capped at 64 so concrete
// values fit in a machine word.
class Sort
{
 public:
  static constexpr unsigned kMaxWidth = 64;

  static Sort boolean() { return Sort(SortKind::kBool, 0); }

  static Sort bitvec(unsigned width)
  {
    if (width < 1 || width > kMaxWidth) {
      throw SortError("bit-vector width must be in [1, "
                      + std::to_string(kMaxWidth) + "], got "
                      + std::to_string(width));
    }
    return Sort(SortKind::kBitVec, width);
  }

  SortKind kind() const { return kind_; }
  bool is_bool() const { return kind_ == SortKind::kBool; }
  bool is_bv() const { return kind_ == SortKind::kBitVec; }

  unsigned width() const
  {
    if (!is_bv()) {
      throw SortError("width() on a non-bit-vector sort");
    }
    return width_;
  }

  // Mask with the low `width` bits set; 2^64 wraps, handled explicitly.
  uint64_t mask() const
  {
    unsigned w = width();
    return w == 64 ? ~uint64_t(0) : ((uint64_t(1) << w) - 1);
  }

  bool operator==(const Sort & o) const
  {
    return kind_ == o.kind_ && width_ == o.width_;
  }
  bool operator!=(const Sort & o) const { return !(*this == o); }

  std::string str() const
  {
    return is_bool() ? "Bool" : "(_ BitVec " + std::to_string(width_) + ")";
  }

 private:
  Sort(SortKind kind, unsigned width) : kind_(kind), width_(width) {}
  SortKind kind_;
  unsigned width_;
};

}  // namespace cfgsmith

#endif
