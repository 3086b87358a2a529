#ifndef CFGSMITH_MEMTILE_H
#define CFGSMITH_MEMTILE_H

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfgsmith/frontend.h"
#include "cfgsmith/optimize.h"
#include "cfgsmith/transition_system.h"
#include "cfgsmith/unroll.h"

namespace cfgsmith {

// Concrete affine access pattern. dim nested counters c_{dim-1} .. c_0
// run through their ranges with c_0 innermost; each step of the nest
// produces offset + sum_j c_j * strides[j], wrapping at the value
// width.
struct AffineConfig
{
  unsigned dim = 0;
  std::vector<uint64_t> ranges;
  std::vector<uint64_t> strides;
  uint64_t offset = 0;

  bool operator==(const AffineConfig & o) const
  {
    return dim == o.dim && ranges == o.ranges && strides == o.strides
           && offset == o.offset;
  }
};

// The full value stream of one pass through the loop nest:
// prod(ranges[0..dim-1]) values. Requires 1 <= dim <= ranges.size(),
// strides.size() >= dim, and every active range nonzero; throws
// ModelError otherwise.
std::vector<uint64_t> affine_sequence(const AffineConfig & cfg,
                                      unsigned value_width);

// Field widths of one symbolic generator.
struct GeneratorParams
{
  unsigned maxdim = 2;       // entries in ranges/strides
  unsigned range_width = 4;  // bits per range field and per counter
  unsigned value_width = 16; // bits of the produced value
};

// Where a generator sits in the tile. Direction is port-centric: a
// generator serving a memory's write port is `write` no matter which
// stage owns it.
struct GeneratorBinding
{
  enum class Stage
  {
    kAgg,
    kSram,
    kTb,
  };

  std::string name;
  bool addressor = false;  // false: accessor (contributes fire timing)
  bool write = false;
  Stage stage = Stage::kAgg;
  bool shared = false;     // accessor shared with the neighbouring stage
};

// Symbolic counterpart of AffineConfig: config fields as variables,
// one counter per dimension, and the affine value over the current
// counters. Accessors also carry a registered fire flag.
struct GeneratorFragment
{
  GeneratorBinding binding;
  GeneratorParams params;
  Variable dim{ "", Sort::boolean() };
  std::vector<Variable> ranges;
  std::vector<Variable> strides;
  Variable offset{ "", Sort::boolean() };
  std::vector<Variable> counters;
  std::optional<Variable> fire;
  Term value;

  std::vector<Variable> config_vars() const;
  std::vector<Variable> state_vars() const;  // counters, then fire
};

// Variables are named <binding.name>_dim, _r<j>, _s<j>, _off, _c<j>,
// _fire. The value term uses shift-and-add over the counter bits, so
// bit-blasting never sees a general multiplication.
GeneratorFragment build_affine_generator(const GeneratorBinding & binding,
                                         const GeneratorParams & params);

// Init conjuncts: counters at zero, fire low, dim <= maxdim, every
// active range nonzero.
std::vector<Term> generator_init(const GeneratorFragment & g);

// Next-state functions over unprimed variables only, so callers can
// embed them in other right-hand sides and keep trans functional.
// counter_next is the carry chain: c_0 steps when `advance` holds, c_j
// resets and carries into c_{j+1} at ranges[j]; counters at index >=
// dim are held at zero.
struct GeneratorStep
{
  std::vector<Term> counter_next;
  Term value_next;
};

GeneratorStep generator_step(const GeneratorFragment & g,
                             const Term & advance);

// The c_j' = counter_next[j] conjuncts.
std::vector<Term> generator_trans(const GeneratorFragment & g,
                                  const GeneratorStep & step);

// An (accessor, addressor) pair serving one port must agree on its
// iteration shape: equal dim, equal ranges on every active dimension.
std::vector<Term> pairing_constraints(const GeneratorFragment & accessor,
                                      const GeneratorFragment & addressor);

// One free-running generator as a closed system. An output variable
// <name>_val observes the value. Addressors step every cycle;
// accessors carry a cycle counter plus a registered <name>_fire output
// and step when the value matches the cycle.
TransitionSystem build_affine_generator_sts(const GeneratorBinding & binding,
                                            const GeneratorParams & params);

// The generator's config fields as an optimization group.
GeneratorGroup generator_group(const GeneratorFragment & g);

// Desk-scale tile dimensions. Word values travel in word_width bits;
// the aggregator packs pack_ratio of them into one memory line.
struct MiniTileParams
{
  unsigned word_width = 8;
  unsigned pack_ratio = 4;
  unsigned sram_depth = 8;
  unsigned maxdim = 2;
  unsigned counter_width = 16;  // cycle counter and accessor values
};

struct TilePart
{
  std::string name;
  TransitionSystem system;
};

// The memory tile: a serial-in parallel-out aggregator (AGG), a
// register-file SRAM, and a parallel-in serial-out transpose buffer
// (TB), each timed by affine accessors and addressed by affine
// addressors. The accessor of each stage-to-stage port is shared by
// both stages; the data crossing a port travels over an explicit bus
// register (agg_bus, sram_bus), which keeps the addressors private to
// their stage.
struct MiniTile
{
  MiniTileParams params;
  TransitionSystem parent;
  std::vector<TilePart> parts;              // agg, sram, tb
  std::vector<std::string> shared_names;    // union of the two interfaces
  std::vector<GeneratorFragment> generators;
  std::vector<GeneratorGroup> groups;       // same order as generators

  const GeneratorFragment & generator(const std::string & name) const;
};

// Builds the tile over eight generators:
//   aw_acc/aw_addr   word intake into the aggregator slots
//   ar_acc/sw_addr   packed-line transfer into the SRAM (ar_acc shared)
//   sr_acc/sr_addr   line readout into the TB        (sr_acc shared)
//   tr_acc/tr_addr   word emission from the TB slices
// Throws ModelError on inconsistent parameters (line wider than 64
// bits, pack_ratio < 2, maxdim of 0).
MiniTile build_mini_tile(const MiniTileParams & params);

// Identity example: width*height distinct words 1..n enter at steps
// 0..n-1 and leave unchanged at steps latency..latency+n-1. k is the
// last output step.
Trace gen_identity_trace(unsigned width, unsigned height, size_t latency);

// 3x3 stencil example: the image enters row-major; for every window
// anchor (row-major over rows then columns) the nine covered pixels
// leave row-major, starting at step latency. Requires width and height
// of at least 3.
Trace gen_conv3x3_trace(unsigned width, unsigned height, size_t latency);

// A solved per-stage schedule: the parent trace plus one trace per
// tile part that additionally pins the port buses and the registered
// fire flags, making every stage of a modular solve well-determined.
struct TilePlan
{
  size_t k = 0;
  Trace parent_trace;
  std::vector<Trace> part_traces;  // aligned with MiniTile::parts
};

// Plans the identity example: words enter back to back, full lines are
// packed into consecutive SRAM lines, and the TB drains them in write
// order. Requires width*height to fit the SRAM (and to be a multiple
// of pack_ratio when it exceeds one line) and the latency to leave
// room for the pack/unpack pipeline; throws ModelError otherwise.
TilePlan plan_identity(const MiniTile & tile, unsigned width,
                       unsigned height, size_t latency);

// Plans the 3x3 stencil: image rows must align with memory lines
// (width == pack_ratio), one line per row, windows drained row by row.
// Needs params.maxdim >= 4 for the TB generators.
TilePlan plan_conv3x3(const MiniTile & tile, unsigned width,
                      unsigned height, size_t latency);

// Reads one generator's concrete fields out of a configuration,
// trimmed to the active dimensions.
AffineConfig extract_affine_config(const Configuration & config,
                                   const GeneratorGroup & group);

// Plain-text report, one block per group: the active fields plus a
// loop-nest comment. parse_configuration_report reads the blocks back;
// the round trip reproduces extract_affine_config exactly.
std::string render_configuration(const Configuration & config,
                                 const std::vector<GeneratorGroup> & groups);

std::map<std::string, AffineConfig>
parse_configuration_report(const std::string & text);

}  // namespace cfgsmith

#endif
